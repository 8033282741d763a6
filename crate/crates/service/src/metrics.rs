//! Telemetry aggregates for study analysis.

use std::collections::BTreeMap;

use critters_core::levels::{Level, LevelKind};
use serde::Serialize;

use crate::log::{Event, Record};
use crate::model::Model;

const DAY_MS: u64 = 86_400_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Counts {
    pub test_blocks_added: usize,
    pub test_blocks_removed: usize,
    pub games_started: usize,
    pub games_played: usize,
    /// Base levels: mutants teleported and healthy critters saved.
    pub detected_mutants: usize,
    pub saved_humans: usize,
    /// Loop levels: wrong collectors sent back and correct ones completing.
    pub detected_wrong_recipes: usize,
    pub successful_collectors: usize,
}

impl Counts {
    fn add(&mut self, record: &Record, kind: Option<LevelKind>) {
        match &record.event {
            Event::TestBlockAdded { count, .. } => self.test_blocks_added += count,
            Event::TestBlockRemoved { count, .. } => self.test_blocks_removed += count,
            Event::GameStarted { .. } => self.games_started += 1,
            Event::GameFinished(g) => {
                self.games_played += 1;
                match kind {
                    Some(LevelKind::Base) => {
                        self.detected_mutants += g.mutants_detected;
                        self.saved_humans += g.healthy_passed;
                    }
                    Some(LevelKind::Loop) => {
                        self.detected_wrong_recipes += g.mutants_detected;
                        self.successful_collectors += g.healthy_passed;
                    }
                    None => {}
                }
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelCounts {
    pub level: String,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlayerCounts {
    pub player: String,
    pub display_name: String,
    pub levels: Vec<LevelCounts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DayCount {
    /// Start of the UTC day, in milliseconds since the epoch.
    pub day_start: u64,
    pub games: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsExport {
    pub from: Option<u64>,
    pub to: Option<u64>,
    pub totals: Counts,
    pub players: Vec<PlayerCounts>,
    pub games_over_time: Vec<DayCount>,
}

/// Aggregates records with `from <= timestamp < to`.
pub fn export(model: &Model, levels: &[Level], from: Option<u64>, to: Option<u64>) -> MetricsExport {
    let kind_of = |id: &str| levels.iter().find(|l| l.id == id).map(|l| l.kind);
    let mut totals = Counts::default();
    let mut per: BTreeMap<&str, BTreeMap<&str, Counts>> = BTreeMap::new();
    let mut days: BTreeMap<u64, usize> = BTreeMap::new();
    let in_range = |r: &&Record| from.is_none_or(|f| r.timestamp >= f) && to.is_none_or(|t| r.timestamp < t);
    for record in model.records.iter().filter(in_range) {
        let Some(level) = record.level.as_deref() else { continue };
        let kind = kind_of(level);
        totals.add(record, kind);
        per.entry(&record.player).or_default().entry(level).or_default().add(record, kind);
        if let Event::GameFinished(_) = record.event {
            *days.entry(record.timestamp / DAY_MS * DAY_MS).or_default() += 1;
        }
    }
    let players = per
        .into_iter()
        .map(|(player, levels)| PlayerCounts {
            player: player.to_string(),
            display_name: model.players.get(player).map(|p| p.display_name.clone()).unwrap_or_default(),
            levels: levels.into_iter().map(|(level, counts)| LevelCounts { level: level.to_string(), counts }).collect(),
        })
        .collect();
    MetricsExport {
        from,
        to,
        totals,
        players,
        games_over_time: days.into_iter().map(|(day_start, games)| DayCount { day_start, games }).collect(),
    }
}
