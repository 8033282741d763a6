use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocklang::Color;
use crate::levels::Level;
use crate::mutation::MutantSpec;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Origin {
    Healthy,
    Mutant { id: String },
}

impl Origin {
    pub fn is_mutant(&self) -> bool {
        matches!(self, Origin::Mutant { .. })
    }

    pub fn mutant_id(&self) -> Option<&str> {
        match self {
            Origin::Mutant { id } => Some(id),
            Origin::Healthy => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RosterEntry {
    pub critter_index: usize,
    pub origin: Origin,
    pub spawn_tick: u64,
    pub appearance: BTreeMap<String, Color>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster {
    pub entries: Vec<RosterEntry>,
}

impl Roster {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Unshuffled roster: healthy critters first, then each catalog mutant times
/// its multiplicity.
fn deck(level: &Level, catalog: &[MutantSpec]) -> Vec<(Origin, BTreeMap<String, Color>)> {
    let roster = &level.roster;
    let mut deck: Vec<_> = (0..roster.healthy_count as usize)
        .map(|j| (Origin::Healthy, roster.appearance(j)))
        .collect();
    for mutant in catalog {
        let (multiplicity, appearance) = roster.mutant_entry(&mutant.id);
        for _ in 0..multiplicity {
            deck.push((Origin::Mutant { id: mutant.id.clone() }, roster.appearance(appearance)));
        }
    }
    deck
}

/// Spawn order for a run: a seeded shuffle of the deck, one critter every
/// `spawn_interval` ticks starting at tick 0.
pub fn spawn_schedule(level: &Level, seed: u64) -> Roster {
    schedule_catalog(level, &level.mutants, seed)
}

fn schedule_catalog(level: &Level, catalog: &[MutantSpec], seed: u64) -> Roster {
    let mut deck = deck(level, catalog);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    deck.shuffle(&mut rng);
    let entries = deck
        .into_iter()
        .enumerate()
        .map(|(i, (origin, appearance))| RosterEntry {
            critter_index: i,
            origin,
            spawn_tick: i as u64 * level.roster.spawn_interval,
            appearance,
        })
        .collect();
    Roster { entries }
}
