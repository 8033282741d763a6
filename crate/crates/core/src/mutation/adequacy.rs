use serde::{Deserialize, Serialize};

use super::{Divergence, MutantSpec};
use crate::engine::{simulate, BaseOutcome, EngineError, LoopOutcome, RunResult, Setup};
use crate::levels::Level;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MutantKill {
    pub id: String,
    pub killed: bool,
    /// Earliest tile index or lap at which an instance was diverted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kill_position: Option<Divergence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdequacyReport {
    pub mutants: Vec<MutantKill>,
    /// Healthy critters the setup diverted.
    pub false_positives: usize,
    pub mutation_score: f64,
}

impl AdequacyReport {
    pub fn killed(&self) -> usize {
        self.mutants.iter().filter(|m| m.killed).count()
    }

    pub fn is_adequate(&self) -> bool {
        self.false_positives == 0 && self.mutants.iter().all(|m| m.killed)
    }
}

/// Runs the level once with `catalog` in place of its own mutants and
/// reports which mutants the setup caught. Mutants missing from the roster
/// (multiplicity 0) count as not killed.
pub fn adequacy(level: &Level, setup: &Setup, catalog: &[MutantSpec]) -> Result<AdequacyReport, EngineError> {
    let mut level = level.clone();
    level.mutants = catalog.to_vec();
    let run = simulate(&level, setup, 0)?;
    let diverted: Vec<(Option<&str>, Option<Divergence>)> = match &run.result {
        RunResult::Base(r) => r
            .critters
            .iter()
            .map(|c| {
                let at = match c.outcome {
                    BaseOutcome::Teleported { tile_index, .. } => Some(Divergence::Tile(tile_index)),
                    BaseOutcome::ReachedTower => None,
                };
                (c.origin.mutant_id(), at)
            })
            .collect(),
        RunResult::Loop(r) => r
            .collectors
            .iter()
            .map(|c| {
                let at = match c.outcome {
                    LoopOutcome::SentBack { round } => Some(Divergence::Round(round)),
                    LoopOutcome::Completed { .. } => None,
                };
                (c.origin.mutant_id(), at)
            })
            .collect(),
    };
    let false_positives = diverted.iter().filter(|(id, at)| id.is_none() && at.is_some()).count();
    let mutants: Vec<MutantKill> = catalog
        .iter()
        .map(|m| {
            let kill_position = diverted
                .iter()
                .filter(|(id, _)| *id == Some(m.id.as_str()))
                .filter_map(|(_, at)| *at)
                .min();
            MutantKill { id: m.id.clone(), killed: kill_position.is_some(), kill_position }
        })
        .collect();
    let killed = mutants.iter().filter(|m| m.killed).count();
    Ok(AdequacyReport {
        mutation_score: crate::engine::fraction(killed, mutants.len()),
        mutants,
        false_positives,
    })
}
