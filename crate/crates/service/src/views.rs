//! Response bodies.

use std::collections::BTreeSet;

use critters_core::blocklang::{AttributeSchema, Color, Program, Terrain, Ty};
use critters_core::engine::{simulate, EngineError, EventTimeline, RunResult, ScoreBreakdown, Setup, TimeBonusConfig};
use critters_core::levels::{Board, Level, LevelKind, Unlock};
use critters_core::mutation::{apply_edits, first_divergence, Divergence, Edit};
use serde::Serialize;

use crate::model::{Phase, Progress};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelSummary {
    pub id: String,
    pub kind: LevelKind,
    pub title: String,
    pub locked: bool,
    pub unlock: Unlock,
    pub best_total: Option<i64>,
    pub stars: u8,
    pub attempts: u32,
}

impl LevelSummary {
    pub fn new(level: &Level, locked: bool, progress: Option<&Progress>) -> Self {
        LevelSummary {
            id: level.id.clone(),
            kind: level.kind,
            title: level.title.clone(),
            locked,
            unlock: level.unlock.clone(),
            best_total: progress.map(|p| p.best_total),
            stars: progress.map_or(0, |p| p.best_stars),
            attempts: progress.map_or(0, |p| p.attempts),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeBlock {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: Ty,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub palette: Option<Vec<Color>>,
    /// Maintained by the game rather than the program.
    pub engine_managed: bool,
}

/// Blocks a test editor may offer on this level.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockPalette {
    pub attributes: Vec<AttributeBlock>,
    pub colors: Vec<Color>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terrains: Vec<Terrain>,
    pub statements: Vec<&'static str>,
}

impl BlockPalette {
    pub fn for_level(schema: &AttributeSchema, kind: LevelKind) -> Self {
        let mut attributes: Vec<AttributeBlock> = schema
            .colors
            .iter()
            .map(|(name, palette)| AttributeBlock {
                name: name.clone(),
                ty: Ty::Color,
                palette: Some(palette.clone()),
                engine_managed: false,
            })
            .collect();
        attributes.extend(schema.counters.keys().map(|name| AttributeBlock {
            name: name.clone(),
            ty: Ty::Count,
            palette: None,
            engine_managed: schema.is_engine_managed(name),
        }));
        attributes.sort_by(|a, b| a.name.cmp(&b.name));
        BlockPalette {
            attributes,
            colors: schema.palette_union(),
            terrains: match kind {
                LevelKind::Base => Terrain::ALL.to_vec(),
                LevelKind::Loop => Vec::new(),
            },
            statements: vec!["assertEq", "if"],
        }
    }
}

/// A level as players see it before finishing it: no mutant code, ids or hints.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PublicLevel {
    pub id: String,
    pub kind: LevelKind,
    pub title: String,
    pub flavor: String,
    pub schema: AttributeSchema,
    pub board: Board,
    pub program: Program,
    pub blocks: BlockPalette,
    pub critters: usize,
    pub healthy_count: u32,
    pub spawn_interval: u64,
    pub unlock: Unlock,
}

impl From<&Level> for PublicLevel {
    fn from(level: &Level) -> Self {
        PublicLevel {
            id: level.id.clone(),
            kind: level.kind,
            title: level.title.clone(),
            flavor: level.flavor.clone(),
            schema: level.schema.clone(),
            board: level.board.clone(),
            program: level.program.clone(),
            blocks: BlockPalette::for_level(&level.schema, level.kind),
            critters: level.roster_size(),
            healthy_count: level.roster.healthy_count,
            spawn_interval: level.roster.spawn_interval,
            unlock: level.unlock.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MutantReveal {
    pub id: String,
    pub hint: String,
    pub edits: Vec<Edit>,
    pub program: Program,
    pub detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_effect: Option<Divergence>,
}

/// Outcome of a finished game, recomputed from the stored inputs.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub session_id: String,
    pub phase: Phase,
    pub seed: u64,
    pub setup_seconds: f64,
    pub result: RunResult,
    pub score: ScoreBreakdown,
    pub timeline: EventTimeline,
    pub mutant_reveal: Vec<MutantReveal>,
}

impl RunReport {
    pub fn compute(
        level: &Level,
        session_id: &str,
        setup: &Setup,
        seed: u64,
        setup_seconds: f64,
        bonus: &TimeBonusConfig,
    ) -> Result<RunReport, EngineError> {
        let run = simulate(level, setup, seed)?;
        let score = run.score(setup_seconds, bonus);
        let detected: BTreeSet<&str> = match &run.result {
            RunResult::Base(r) => r
                .critters
                .iter()
                .filter(|c| !matches!(c.outcome, critters_core::engine::BaseOutcome::ReachedTower))
                .filter_map(|c| c.origin.mutant_id())
                .collect(),
            RunResult::Loop(r) => r
                .collectors
                .iter()
                .filter(|c| matches!(c.outcome, critters_core::engine::LoopOutcome::SentBack { .. }))
                .filter_map(|c| c.origin.mutant_id())
                .collect(),
        };
        let mutant_reveal = level
            .mutants
            .iter()
            .map(|m| {
                Ok(MutantReveal {
                    id: m.id.clone(),
                    hint: m.hint.clone(),
                    edits: m.edits.clone(),
                    program: apply_edits(&level.program, &m.edits)?,
                    detected: detected.contains(m.id.as_str()),
                    first_effect: first_divergence(level, m)?,
                })
            })
            .collect::<Result<Vec<_>, EngineError>>()?;
        Ok(RunReport {
            session_id: session_id.to_string(),
            phase: Phase::Finished,
            seed,
            setup_seconds,
            result: run.result,
            score,
            timeline: run.timeline,
            mutant_reveal,
        })
    }
}
