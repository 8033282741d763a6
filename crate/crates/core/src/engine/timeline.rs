use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blocklang::{AstPath, BerryKind, Effect, Value};
use crate::levels::Pos;

/// Where a test ran.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TestSite {
    Portal { tile: Pos },
    Signpost { index: usize, tile: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum EventKind {
    /// `mutant` drives the infected look; the mutant's identity is not part of the timeline.
    Spawn { pos: Pos, mutant: bool },
    Move { to: Pos },
    AttrChange { name: String, value: Value },
    Collect { berry: BerryKind, count: u64 },
    TestPass { site: TestSite },
    TestFail { site: TestSite, assertion_path: AstPath },
    Teleport { tile: Pos },
    ExitCrossing { round: u64 },
    ReachTower,
    Deposit { berries: BTreeMap<String, u64> },
}

impl From<&Effect> for EventKind {
    fn from(effect: &Effect) -> Self {
        match effect {
            Effect::AttrChange { name, value } => EventKind::AttrChange { name: name.clone(), value: *value },
            Effect::Collect { berry, count, .. } => EventKind::Collect { berry: berry.clone(), count: *count },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub critter: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Every event of a run ordered by tick, then by spawn order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTimeline {
    pub events: Vec<Event>,
}

impl EventTimeline {
    /// Merges per-critter event streams. Each stream must be in causal
    /// order; the merge is stable so that order survives.
    pub(crate) fn merge(streams: Vec<Vec<Event>>) -> Self {
        let mut events: Vec<Event> = streams.into_iter().flatten().collect();
        events.sort_by_key(|e| (e.tick, e.critter));
        EventTimeline { events }
    }

    pub fn to_canonical_json(&self) -> String {
        crate::canonical::to_string(self)
    }

    pub fn for_critter(&self, critter: usize) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.critter == critter)
    }

    pub fn last_tick(&self) -> u64 {
        self.events.last().map_or(0, |e| e.tick)
    }
}

/// Collects one critter's events.
pub(crate) struct Stream {
    critter: usize,
    pub tick: u64,
    events: Vec<Event>,
}

impl Stream {
    pub fn new(critter: usize, tick: u64) -> Self {
        Stream { critter, tick, events: Vec::new() }
    }

    pub fn push(&mut self, kind: EventKind) {
        self.events.push(Event { tick: self.tick, critter: self.critter, kind });
    }

    pub fn finish(self) -> Vec<Event> {
        self.events
    }
}
