//! In-memory state, rebuilt by folding the event log.

use std::collections::{BTreeMap, HashMap};

use critters_core::engine::Setup;
use critters_core::levels::{Level, UNLOCK_POINTS};
use serde::{Deserialize, Serialize};

use crate::log::{Event, GameFinished, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Setup,
    Running,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Player {
    pub player_id: String,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub player: String,
    pub level: String,
    pub seed: u64,
    pub phase: Phase,
    pub setup: Setup,
    pub started_at: u64,
    pub setup_seconds: Option<f64>,
    pub finished: Option<GameFinished>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Progress {
    pub best_total: i64,
    pub best_stars: u8,
    pub attempts: u32,
    /// Sequence number of the record that first reached `best_total`.
    #[serde(skip)]
    pub best_seq: u64,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Model {
    pub players: HashMap<String, Player>,
    pub sessions: HashMap<String, Session>,
    /// Keyed by (player, level).
    pub progress: BTreeMap<(String, String), Progress>,
    pub records: Vec<Record>,
    last_timestamp: HashMap<String, u64>,
}

impl Model {
    pub fn replay(records: impl IntoIterator<Item = Record>) -> Model {
        let mut model = Model::default();
        for r in records {
            model.apply(r);
        }
        model
    }

    pub fn next_seq(&self) -> u64 {
        self.records.last().map_or(1, |r| r.seq + 1)
    }

    /// `now`, moved forward if needed so a player's records never go back in time.
    pub fn timestamp_for(&self, player: &str, now: u64) -> u64 {
        self.last_timestamp.get(player).map_or(now, |&last| now.max(last))
    }

    pub fn apply(&mut self, record: Record) {
        self.last_timestamp.insert(record.player.clone(), record.timestamp);
        match &record.event {
            Event::PlayerCreated { display_name } => {
                self.players.insert(
                    record.player.clone(),
                    Player { player_id: record.player.clone(), display_name: display_name.clone() },
                );
            }
            Event::SessionCreated { session_id, seed } => {
                self.sessions.insert(
                    session_id.clone(),
                    Session {
                        id: session_id.clone(),
                        player: record.player.clone(),
                        level: record.level.clone().unwrap_or_default(),
                        seed: *seed,
                        phase: Phase::Setup,
                        setup: Setup::default(),
                        started_at: record.timestamp,
                        setup_seconds: None,
                        finished: None,
                    },
                );
            }
            Event::TestsSubmitted { session_id, setup } => {
                if let Some(s) = self.sessions.get_mut(session_id) {
                    s.setup = setup.clone();
                }
            }
            Event::TestBlockAdded { .. } | Event::TestBlockRemoved { .. } => {}
            Event::GameStarted { session_id, setup_seconds } => {
                if let Some(s) = self.sessions.get_mut(session_id) {
                    s.phase = Phase::Running;
                    s.setup_seconds = Some(*setup_seconds);
                }
            }
            Event::GameFinished(game) => {
                if let Some(s) = self.sessions.get_mut(&game.session_id) {
                    s.phase = Phase::Finished;
                    s.finished = Some(game.clone());
                }
                if let Some(level) = &record.level {
                    let p = self
                        .progress
                        .entry((record.player.clone(), level.clone()))
                        .or_insert(Progress { best_total: i64::MIN, best_stars: 0, attempts: 0, best_seq: 0 });
                    p.attempts += 1;
                    if game.total > p.best_total {
                        p.best_total = game.total;
                        p.best_seq = record.seq;
                    }
                    p.best_stars = p.best_stars.max(game.stars);
                }
            }
        }
        self.records.push(record);
    }

    pub fn best_total(&self, player: &str, level: &str) -> Option<i64> {
        self.progress.get(&(player.to_string(), level.to_string())).map(|p| p.best_total)
    }

    /// A level is open when it has no prerequisite or the player's best on
    /// the prerequisite reaches the required points. Anonymous players only
    /// see levels without prerequisites.
    pub fn is_unlocked(&self, player: Option<&str>, level: &Level) -> bool {
        let Some(required) = &level.unlock.requires else {
            return true;
        };
        let min = level.unlock.min_points.unwrap_or(UNLOCK_POINTS);
        player.and_then(|p| self.best_total(p, required)).is_some_and(|best| best >= min)
    }

    /// Players with progress on `level`, best first; ties go to whoever got there first.
    pub fn leaderboard(&self, level: &str) -> Vec<(&Player, &Progress)> {
        let mut rows: Vec<_> = self
            .progress
            .iter()
            .filter(|((_, l), _)| l == level)
            .filter_map(|((p, _), progress)| self.players.get(p).map(|player| (player, progress)))
            .collect();
        rows.sort_by_key(|(_, p)| (std::cmp::Reverse(p.best_total), p.best_seq));
        rows
    }
}
