//! Deterministic simulation of base and loop levels.
//!
//! A run is a pure function of `(level, setup, seed)`: the seed only fixes
//! spawn order, critters never interact, and every event carries the tick it
//! happened on. Results and timelines serialize to canonical JSON, so two
//! runs can be compared byte for byte.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocklang::{EvalError, Program};
use crate::diagnostic::{has_errors, Diagnostic};
use crate::levels::{Level, LevelKind};
use crate::mutation::{apply_edits, EditError};

mod base;
mod loops;
mod roster;
mod score;
mod setup;
mod timeline;
pub mod trace;

pub use base::{simulate_base, BaseOutcome, BaseRunResult, CritterResult};
pub use loops::{penalty_for, simulate_loop, CollectorResult, LoopOutcome, LoopRunResult, LATE_DETECTION_PENALTY};
pub use roster::{spawn_schedule, Origin, Roster, RosterEntry};
pub use score::{score_base, score_loop, stars, RowDetail, ScoreBreakdown, ScoreRow, TimeBonusConfig};
pub use setup::{validate_setup, PortalPlacement, Setup, SignpostTest};
pub use timeline::{Event, EventKind, EventTimeline, TestSite};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid setup: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSetup(Vec<Diagnostic>),
    #[error("unknown mutant `{0}`")]
    UnknownMutant(String),
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub(crate) fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub(crate) fn mutant_program(level: &Level, id: &str) -> Result<Program, EngineError> {
    let spec = level.mutant(id).ok_or_else(|| EngineError::UnknownMutant(id.to_string()))?;
    Ok(apply_edits(&level.program, &spec.edits)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RunResult {
    Base(BaseRunResult),
    Loop(LoopRunResult),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub result: RunResult,
    pub timeline: EventTimeline,
}

impl RunOutput {
    pub fn score(&self, setup_seconds: f64, cfg: &TimeBonusConfig) -> ScoreBreakdown {
        match &self.result {
            RunResult::Base(r) => score_base(r, setup_seconds, cfg),
            RunResult::Loop(r) => score_loop(r),
        }
    }
}

/// Validates the setup, then runs whichever simulation the level needs.
pub fn simulate(level: &Level, setup: &Setup, seed: u64) -> Result<RunOutput, EngineError> {
    let diags = validate_setup(level, setup);
    if has_errors(&diags) {
        return Err(EngineError::InvalidSetup(diags));
    }
    match level.kind {
        LevelKind::Base => {
            let (result, timeline) = simulate_base(level, &setup.portals, seed)?;
            Ok(RunOutput { result: RunResult::Base(result), timeline })
        }
        LevelKind::Loop => {
            let (result, timeline) = simulate_loop(level, &setup.signposts, seed)?;
            Ok(RunOutput { result: RunResult::Loop(result), timeline })
        }
    }
}

/// Re-runs the level and compares canonical timelines. Any JSON spelling of
/// the right timeline verifies; anything else (including unparsable text)
/// does not.
pub fn verify_timeline(level: &Level, setup: &Setup, seed: u64, timeline_json: &str) -> bool {
    let Ok(claimed) = crate::canonical::canonicalize(timeline_json) else {
        return false;
    };
    match simulate(level, setup, seed) {
        Ok(run) => run.timeline.to_canonical_json() == claimed,
        Err(_) => false,
    }
}
