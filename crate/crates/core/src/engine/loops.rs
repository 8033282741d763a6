use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::roster::{spawn_schedule, Origin};
use super::timeline::{EventKind, EventTimeline, Stream, TestSite};
use super::trace::loop_trace;
use super::{fraction, mutant_program, EngineError, SignpostTest};
use crate::blocklang::{run_test, CounterRole, Effect, Program};
use crate::levels::Level;
use crate::mutation::{first_divergence_for, Divergence};

/// Points lost for every lap a mutant survives past its first effect.
pub const LATE_DETECTION_PENALTY: i64 = 25;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum LoopOutcome {
    Completed { laps: u64 },
    SentBack { round: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollectorResult {
    pub critter: usize,
    pub origin: Origin,
    pub outcome: LoopOutcome,
    /// For mutants: the first lap whose signpost state (or existence)
    /// differs from a healthy collector's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_effect_round: Option<u64>,
    /// Late-detection penalty points charged for this collector (non-negative).
    pub penalty: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopRunResult {
    pub collectors: Vec<CollectorResult>,
    pub healthy_total: usize,
    pub healthy_successful: usize,
    pub mutants_total: usize,
    pub mutants_detected: usize,
    pub successful_fraction: f64,
    pub detected_fraction: f64,
    pub total_penalty: i64,
}

/// Late-detection penalty for one detected mutant. A mutant sent back before
/// its mutation shows (only possible with an over-strict test) costs nothing.
pub fn penalty_for(detect_round: u64, first_effect_round: u64) -> i64 {
    LATE_DETECTION_PENALTY * detect_round.saturating_sub(first_effect_round) as i64
}

/// Runs a loop level. Each lap starts at the basket: `roundsCount` becomes
/// the lap number and the lap body runs. Collect events are stamped at the
/// first bush of their kind; each signpost tests the collector as it passes.
/// A failing collector walks on to the crossing and leaves; the others
/// deposit at the basket after their last lap.
pub fn simulate_loop(
    level: &Level,
    tests: &[SignpostTest],
    seed: u64,
) -> Result<(LoopRunResult, EventTimeline), EngineError> {
    let roster = spawn_schedule(level, seed);
    let board = &level.board;
    let path = &board.path;
    let len = path.len();
    let signpost_tiles = &board.landmarks.signposts;
    // path index -> (signpost index, test)
    let mut checks: BTreeMap<usize, Vec<&SignpostTest>> = BTreeMap::new();
    for t in tests {
        if let Some(idx) = signpost_tiles.get(t.signpost).and_then(|p| board.path_index(*p)) {
            checks.entry(idx).or_default().push(t);
        }
    }
    let crossing = board.landmarks.crossing.and_then(|p| board.path_index(p));

    let mut programs: BTreeMap<String, Program> = BTreeMap::new();
    let mut divergence: BTreeMap<(String, String), Option<u64>> = BTreeMap::new();
    let mut streams = Vec::with_capacity(roster.len());
    let mut collectors = Vec::with_capacity(roster.len());

    for entry in &roster.entries {
        let program = match &entry.origin {
            Origin::Healthy => &level.program,
            Origin::Mutant { id } => {
                if !programs.contains_key(id) {
                    programs.insert(id.clone(), mutant_program(level, id)?);
                }
                &programs[id]
            }
        };
        let trace = loop_trace(level, program, &entry.appearance)?;
        let laps = trace.len() as u64;

        let mut stream = Stream::new(entry.critter_index, entry.spawn_tick);
        stream.push(EventKind::Spawn { pos: path[0], mutant: entry.origin.is_mutant() });

        let mut lap = 1u64;
        let mut pending = start_lap(level, &trace[0].effects, &mut stream);
        let mut exiting: Option<u64> = None;
        let mut at = 0usize;
        let outcome = loop {
            stream.tick += 1;
            at = (at + 1) % len;
            stream.push(EventKind::Move { to: path[at] });
            if let Some(round) = exiting {
                if Some(at) == crossing {
                    stream.push(EventKind::ExitCrossing { round });
                    break LoopOutcome::SentBack { round };
                }
                continue;
            }
            if at == 0 {
                if lap == laps {
                    stream.push(EventKind::Deposit { berries: berry_totals(level, &trace[trace.len() - 1].state) });
                    break LoopOutcome::Completed { laps };
                }
                lap += 1;
                pending = start_lap(level, &trace[lap as usize - 1].effects, &mut stream);
                continue;
            }
            if let Some(effects) = pending.remove(&at) {
                effects.into_iter().for_each(|k| stream.push(k));
            }
            let state = &trace[lap as usize - 1].state;
            for check in checks.get(&at).into_iter().flatten() {
                let site = TestSite::Signpost { index: check.signpost, tile: path[at] };
                match run_test(&check.test, state, None)?.failed_assertion_path {
                    None => stream.push(EventKind::TestPass { site }),
                    Some(assertion_path) => {
                        stream.push(EventKind::TestFail { site, assertion_path });
                        exiting = Some(lap);
                        break;
                    }
                }
            }
            if let Some(round) = exiting {
                if crossing.is_none() || Some(at) == crossing {
                    stream.push(EventKind::ExitCrossing { round });
                    break LoopOutcome::SentBack { round };
                }
            }
        };

        let first_effect_round = match &entry.origin {
            Origin::Healthy => None,
            Origin::Mutant { id } => {
                let key = (id.clone(), crate::canonical::to_string(&entry.appearance));
                if !divergence.contains_key(&key) {
                    let round = match first_divergence_for(level, program, &entry.appearance)? {
                        Some(Divergence::Round(r)) => Some(r),
                        _ => None,
                    };
                    divergence.insert(key.clone(), round);
                }
                divergence[&key]
            }
        };
        let penalty = match (&outcome, first_effect_round) {
            (LoopOutcome::SentBack { round }, Some(first)) if entry.origin.is_mutant() => penalty_for(*round, first),
            _ => 0,
        };
        streams.push(stream.finish());
        collectors.push(CollectorResult {
            critter: entry.critter_index,
            origin: entry.origin.clone(),
            outcome,
            first_effect_round,
            penalty,
        });
    }

    let healthy_total = collectors.iter().filter(|c| !c.origin.is_mutant()).count();
    let mutants_total = collectors.len() - healthy_total;
    let healthy_successful = collectors
        .iter()
        .filter(|c| !c.origin.is_mutant() && matches!(c.outcome, LoopOutcome::Completed { .. }))
        .count();
    let mutants_detected = collectors
        .iter()
        .filter(|c| c.origin.is_mutant() && matches!(c.outcome, LoopOutcome::SentBack { .. }))
        .count();
    let total_penalty = collectors.iter().map(|c| c.penalty).sum();
    let result = LoopRunResult {
        collectors,
        healthy_total,
        healthy_successful,
        mutants_total,
        mutants_detected,
        successful_fraction: fraction(healthy_successful, healthy_total),
        detected_fraction: fraction(mutants_detected, mutants_total),
        total_penalty,
    };
    Ok((result, EventTimeline::merge(streams)))
}

/// Emits the lap-start events and returns the collect events deferred to
/// their bush, keyed by path index.
fn start_lap(level: &Level, effects: &[Effect], stream: &mut Stream) -> BTreeMap<usize, Vec<EventKind>> {
    let mut pending: BTreeMap<usize, Vec<EventKind>> = BTreeMap::new();
    for effect in effects {
        let at_bush = match effect {
            Effect::Collect { berry, .. } => level.board.bush_index(berry),
            Effect::AttrChange { .. } => None,
        };
        match at_bush {
            Some(idx) => pending.entry(idx).or_default().push(effect.into()),
            None => stream.push(effect.into()),
        }
    }
    pending
}

fn berry_totals(level: &Level, state: &crate::blocklang::CritterState) -> BTreeMap<String, u64> {
    level
        .schema
        .counters
        .iter()
        .filter_map(|(name, role)| match role {
            CounterRole::Berry { berry } => Some((berry.to_string(), state.count(name))),
            CounterRole::Rounds => None,
        })
        .collect()
}
