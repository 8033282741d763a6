use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{apply_edits, MutantSpec};
use crate::blocklang::{Color, Program};
use crate::engine::trace::{base_trace, loop_trace};
use crate::engine::EngineError;
use crate::levels::{Level, LevelKind};

/// Where a mutant first behaves observably differently from the healthy program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Divergence {
    /// 1-based lap of a loop level.
    Round(u64),
    /// Path index on a base level (0 is the village, after initialization).
    #[serde(rename = "tileIndex")]
    Tile(usize),
}

/// First divergence of a catalog mutant, compared against a healthy critter
/// wearing the mutant's roster appearance.
pub fn first_divergence(level: &Level, mutant: &MutantSpec) -> Result<Option<Divergence>, EngineError> {
    let program = apply_edits(&level.program, &mutant.edits)?;
    let (_, appearance) = level.roster.mutant_entry(&mutant.id);
    first_divergence_for(level, &program, &level.roster.appearance(appearance))
}

/// Differentially runs the healthy program and `program` with no tests.
///
/// Loop levels compare the state every lap ends its body with (what the
/// signposts see). If those never differ but the lap counts do, the first
/// lap only one of them runs is the divergence. Base levels compare states
/// tile by tile.
pub fn first_divergence_for(
    level: &Level,
    program: &Program,
    appearance: &BTreeMap<String, Color>,
) -> Result<Option<Divergence>, EngineError> {
    match level.kind {
        LevelKind::Loop => {
            let healthy = loop_trace(level, &level.program, appearance)?;
            let mutant = loop_trace(level, program, appearance)?;
            let shared = healthy.len().min(mutant.len());
            if let Some(i) = (0..shared).find(|&i| healthy[i].state != mutant[i].state) {
                return Ok(Some(Divergence::Round(i as u64 + 1)));
            }
            if healthy.len() != mutant.len() {
                return Ok(Some(Divergence::Round(shared as u64 + 1)));
            }
            Ok(None)
        }
        LevelKind::Base => {
            let healthy = base_trace(level, &level.program, appearance)?;
            let mutant = base_trace(level, program, appearance)?;
            Ok(healthy
                .iter()
                .zip(&mutant)
                .position(|(h, m)| h.state != m.state)
                .map(Divergence::Tile))
        }
    }
}
