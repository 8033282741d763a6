use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::roster::{spawn_schedule, Origin};
use super::timeline::{EventKind, EventTimeline, Stream, TestSite};
use super::trace::base_trace;
use super::{fraction, mutant_program, EngineError, PortalPlacement};
use crate::blocklang::{run_test, Program};
use crate::levels::{Level, Pos};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum BaseOutcome {
    ReachedTower,
    Teleported { tile: Pos, tile_index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CritterResult {
    pub critter: usize,
    pub origin: Origin,
    pub outcome: BaseOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BaseRunResult {
    pub critters: Vec<CritterResult>,
    pub healthy_total: usize,
    pub healthy_saved: usize,
    pub mutants_total: usize,
    pub mutants_detected: usize,
    pub portal_count: usize,
    /// healthy at the tower / healthy total
    pub saved_fraction: f64,
    /// mutants teleported / mutants total
    pub detected_fraction: f64,
}

/// Runs a base level: critters walk from the village to the tower one tile
/// per tick. On each tile the per-tile code runs first, then the portal test
/// on that tile (if any); a failing critter is teleported away.
pub fn simulate_base(
    level: &Level,
    placements: &[PortalPlacement],
    seed: u64,
) -> Result<(BaseRunResult, EventTimeline), EngineError> {
    let roster = spawn_schedule(level, seed);
    let path = &level.board.path;
    let portals: BTreeMap<usize, &PortalPlacement> = placements
        .iter()
        .filter_map(|p| level.board.path_index(p.tile).map(|i| (i, p)))
        .collect();

    let mut programs: BTreeMap<String, Program> = BTreeMap::new();
    let mut streams = Vec::with_capacity(roster.len());
    let mut critters = Vec::with_capacity(roster.len());

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
        let trace = base_trace(level, program, &entry.appearance)?;

        let mut stream = Stream::new(entry.critter_index, entry.spawn_tick);
        stream.push(EventKind::Spawn { pos: path[0], mutant: entry.origin.is_mutant() });
        trace[0].effects.iter().for_each(|e| stream.push(e.into()));

        let mut outcome = BaseOutcome::ReachedTower;
        for (i, step) in trace.iter().enumerate().skip(1) {
            stream.tick += 1;
            stream.push(EventKind::Move { to: path[i] });
            step.effects.iter().for_each(|e| stream.push(e.into()));
            if let Some(portal) = portals.get(&i) {
                let site = TestSite::Portal { tile: portal.tile };
                let result = run_test(&portal.test, &step.state, level.board.terrain(path[i]))?;
                match result.failed_assertion_path {
                    None => stream.push(EventKind::TestPass { site }),
                    Some(assertion_path) => {
                        stream.push(EventKind::TestFail { site, assertion_path });
                        stream.push(EventKind::Teleport { tile: path[i] });
                        outcome = BaseOutcome::Teleported { tile: path[i], tile_index: i };
                        break;
                    }
                }
            }
            if i + 1 == path.len() {
                stream.push(EventKind::ReachTower);
            }
        }
        streams.push(stream.finish());
        critters.push(CritterResult { critter: entry.critter_index, origin: entry.origin.clone(), outcome });
    }

    let healthy_total = critters.iter().filter(|c| !c.origin.is_mutant()).count();
    let mutants_total = critters.len() - healthy_total;
    let healthy_saved = critters
        .iter()
        .filter(|c| !c.origin.is_mutant() && c.outcome == BaseOutcome::ReachedTower)
        .count();
    let mutants_detected = critters
        .iter()
        .filter(|c| c.origin.is_mutant() && c.outcome != BaseOutcome::ReachedTower)
        .count();
    let result = BaseRunResult {
        critters,
        healthy_total,
        healthy_saved,
        mutants_total,
        mutants_detected,
        portal_count: placements.len(),
        saved_fraction: fraction(healthy_saved, healthy_total),
        detected_fraction: fraction(mutants_detected, mutants_total),
    };
    Ok((result, EventTimeline::merge(streams)))
}
