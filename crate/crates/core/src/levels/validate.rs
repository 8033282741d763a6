use std::collections::{BTreeMap, BTreeSet};

use super::{Board, Level, LevelKind, Pos, UNLOCK_POINTS};
use crate::blocklang::{emit_ast, typecheck_program, CounterRole, ROUNDS_COUNT};
use crate::diagnostic::{has_errors, DiagCode, Diagnostic, Location};
use crate::mutation::{apply_edits, first_divergence, killable_mutants, SolveBounds, SolveError, DEFAULT_SOLVE_BUDGET};

/// Knobs for the expensive mutant checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Reject mutants no test can tell apart from the healthy program.
    pub check_equivalence: bool,
    /// Warn about mutants no test within `solver_bounds` can kill.
    pub check_killable: bool,
    pub solver_bounds: SolveBounds,
    pub solver_budget: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            check_equivalence: true,
            check_killable: true,
            solver_bounds: SolveBounds::default(),
            solver_budget: DEFAULT_SOLVE_BUDGET,
        }
    }
}

pub fn validate_level(level: &Level) -> Vec<Diagnostic> {
    validate_level_with(level, &ValidationOptions::default())
}

/// All structural checks, then (if those pass) the mutant equivalence and
/// killability checks.
pub fn validate_level_with(level: &Level, options: &ValidationOptions) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    check_board(level, &mut diags);
    check_schema(level, &mut diags);
    diags.extend(typecheck_program(&level.program, &level.schema, level.kind));
    check_mutants(level, &mut diags);
    check_roster(level, &mut diags);
    if has_errors(&diags) {
        return diags;
    }
    if options.check_equivalence {
        for m in &level.mutants {
            match first_divergence(level, m) {
                Ok(Some(_)) => {}
                Ok(None) => diags.push(Diagnostic::error(
                    DiagCode::EquivalentMutant,
                    Location::Level,
                    format!("mutant `{}` behaves exactly like the healthy program", m.id),
                )),
                Err(e) => diags.push(Diagnostic::error(
                    DiagCode::BadMutantEdit,
                    Location::Level,
                    format!("mutant `{}` cannot run: {e}", m.id),
                )),
            }
        }
    }
    if options.check_killable && !has_errors(&diags) {
        match killable_mutants(level, options.solver_bounds, options.solver_budget) {
            Ok(killable) => {
                for m in level.mutants.iter().filter(|m| !killable.contains(&m.id)) {
                    diags.push(Diagnostic::warning(
                        DiagCode::UnkillableMutant,
                        Location::Level,
                        format!(
                            "no test with at most {} assertion(s) and if-depth {} detects mutant `{}` without failing healthy critters",
                            options.solver_bounds.max_assertions, options.solver_bounds.max_if_depth, m.id
                        ),
                    ));
                }
            }
            Err(SolveError::Engine(e)) => diags.push(Diagnostic::error(
                DiagCode::BadMutantEdit,
                Location::Level,
                format!("simulation failed: {e}"),
            )),
            Err(e) => diags.push(Diagnostic::warning(DiagCode::SolverBudget, Location::Level, e.to_string())),
        }
    }
    diags
}

fn board_error(diags: &mut Vec<Diagnostic>, code: DiagCode, pos: Pos, message: impl Into<String>) {
    diags.push(Diagnostic::error(code, Location::Board { pos }, message));
}

fn level_error(diags: &mut Vec<Diagnostic>, code: DiagCode, message: impl Into<String>) {
    diags.push(Diagnostic::error(code, Location::Level, message));
}

fn check_board(level: &Level, diags: &mut Vec<Diagnostic>) {
    let board = &level.board;
    if board.width == 0 || board.height == 0 {
        level_error(diags, DiagCode::BoardSize, "the board needs at least one row and column");
        return;
    }
    let standard = match level.kind {
        LevelKind::Base => 16,
        LevelKind::Loop => 8,
    };
    if board.width != standard || board.height != standard {
        diags.push(Diagnostic::warning(
            DiagCode::NonstandardBoardSize,
            Location::Level,
            format!("{} levels are usually {standard}x{standard}, not {}x{}", kind_name(level.kind), board.width, board.height),
        ));
    }
    let rows = board.tiles.rows();
    if rows.len() != board.height as usize || rows.iter().any(|r| r.len() != board.width as usize) {
        level_error(diags, DiagCode::TileRows, format!("tiles must be {} rows of {} codes", board.height, board.width));
        return;
    }
    check_path(level.kind, board, diags);
    check_landmarks(level, diags);
}

fn kind_name(kind: LevelKind) -> &'static str {
    match kind {
        LevelKind::Base => "base",
        LevelKind::Loop => "loop",
    }
}

fn check_path(kind: LevelKind, board: &Board, diags: &mut Vec<Diagnostic>) {
    let path = &board.path;
    if path.len() < 2 {
        level_error(diags, DiagCode::PathEmpty, "the path needs at least two tiles");
        return;
    }
    let mut seen = BTreeSet::new();
    for (i, pos) in path.iter().enumerate() {
        match board.terrain(*pos) {
            None => board_error(diags, DiagCode::PathOutOfBounds, *pos, "path leaves the board"),
            Some(t) if !t.walkable() => {
                board_error(diags, DiagCode::UnwalkablePath, *pos, format!("critters cannot walk on {t}"))
            }
            Some(_) => {}
        }
        if !seen.insert(*pos) {
            board_error(diags, DiagCode::PathRevisit, *pos, "the path visits this tile twice");
        }
        if i > 0 && !path[i - 1].is_adjacent(*pos) {
            board_error(diags, DiagCode::PathNotAdjacent, *pos, format!("not next to the previous waypoint {}", path[i - 1]));
        }
    }
    if kind == LevelKind::Loop && !path[path.len() - 1].is_adjacent(path[0]) {
        board_error(diags, DiagCode::PathNotCycle, path[path.len() - 1], "a loop path must end next to its start");
    }
}

fn check_landmarks(level: &Level, diags: &mut Vec<Diagnostic>) {
    let board = &level.board;
    let marks = &board.landmarks;
    let path = &board.path;
    if path.len() < 2 {
        return;
    }
    let mut endpoint = |name: &str, pos: Option<Pos>, expected: Pos| match pos {
        None => level_error(diags, DiagCode::MissingLandmark, format!("the board has no {name}")),
        Some(p) if p != expected => {
            board_error(diags, DiagCode::LandmarkOffPath, p, format!("the {name} must be at path tile {expected}"))
        }
        Some(_) => {}
    };
    match level.kind {
        LevelKind::Base => {
            endpoint("village", marks.village, path[0]);
            endpoint("tower", marks.tower, path[path.len() - 1]);
        }
        LevelKind::Loop => {
            endpoint("basket", marks.basket, path[0]);
            let on_loop = |p: Pos| board.path_index(p).is_some_and(|i| i >= 1);
            match marks.crossing {
                None => level_error(diags, DiagCode::MissingLandmark, "the board has no crossing"),
                Some(p) if !on_loop(p) => {
                    board_error(diags, DiagCode::LandmarkOffPath, p, "the crossing must be on the path, away from the basket")
                }
                Some(_) => {}
            }
            if marks.signposts.is_empty() {
                level_error(diags, DiagCode::MissingLandmark, "the board has no signpost");
            }
            for p in &marks.signposts {
                if !on_loop(*p) {
                    board_error(diags, DiagCode::LandmarkOffPath, *p, "signposts must be on the path, away from the basket");
                }
            }
            let first_sign = board.signpost_indices().into_iter().flatten().min();
            for bush in &marks.bushes {
                if level.schema.berry_counter(&bush.berry).is_none() {
                    board_error(diags, DiagCode::UnknownBerry, bush.pos, format!("no counter collects `{}` berries", bush.berry));
                }
                let near = path.iter().skip(1).any(|p| *p == bush.pos || p.is_adjacent(bush.pos));
                if !near {
                    board_error(diags, DiagCode::BushPlacement, bush.pos, "bushes must be next to the path");
                }
            }
            let berries: BTreeSet<_> = marks.bushes.iter().map(|b| &b.berry).collect();
            for berry in berries {
                if let (Some(at), Some(sign)) = (board.bush_index(berry), first_sign) {
                    if at > sign {
                        diags.push(Diagnostic::warning(
                            DiagCode::BushAfterSignpost,
                            Location::Board { pos: path[at] },
                            format!("`{berry}` berries are picked after the first signpost"),
                        ));
                    }
                }
            }
        }
    }
}

fn check_schema(level: &Level, diags: &mut Vec<Diagnostic>) {
    for (name, palette) in &level.schema.colors {
        if palette.is_empty() {
            level_error(diags, DiagCode::EmptyPalette, format!("color attribute `{name}` has no colors"));
        }
    }
    if level.kind == LevelKind::Loop && level.schema.counters.get(ROUNDS_COUNT) != Some(&CounterRole::Rounds) {
        level_error(
            diags,
            DiagCode::MissingRoundsCount,
            format!("loop levels need a `{ROUNDS_COUNT}` counter with the rounds role"),
        );
    }
}

fn check_mutants(level: &Level, diags: &mut Vec<Diagnostic>) {
    let source = emit_ast(&level.program);
    let mut ids = BTreeSet::new();
    let mut programs: BTreeMap<String, &str> = BTreeMap::new();
    for m in &level.mutants {
        if !ids.insert(m.id.as_str()) {
            level_error(diags, DiagCode::DuplicateMutantId, format!("mutant id `{}` is used twice", m.id));
        }
        if m.edits.is_empty() {
            level_error(diags, DiagCode::BadMutantEdit, format!("mutant `{}` has no edits", m.id));
            continue;
        }
        let program = match apply_edits(&level.program, &m.edits) {
            Ok(p) => p,
            Err(e) => {
                level_error(diags, DiagCode::BadMutantEdit, format!("mutant `{}`: {e}", m.id));
                continue;
            }
        };
        let root = format!("mutant[{}]", m.id);
        diags.extend(
            typecheck_program(&program, &level.schema, level.kind)
                .into_iter()
                .map(|d| d.with_root(&root)),
        );
        let text = emit_ast(&program);
        if text == source {
            level_error(diags, DiagCode::MutantUnchanged, format!("mutant `{}` equals the healthy program", m.id));
        } else if let Some(other) = programs.get(&text) {
            level_error(diags, DiagCode::DuplicateMutant, format!("mutants `{other}` and `{}` are the same program", m.id));
        } else {
            programs.insert(text, &m.id);
        }
    }
}

fn check_roster(level: &Level, diags: &mut Vec<Diagnostic>) {
    let roster = &level.roster;
    if level.roster_size() == 0 {
        level_error(diags, DiagCode::EmptyRoster, "nobody walks this level");
    }
    for (i, appearance) in roster.appearances.iter().enumerate() {
        for (name, color) in appearance {
            match level.schema.palette(name) {
                None => level_error(
                    diags,
                    DiagCode::BadAppearance,
                    format!("appearance #{i} sets `{name}`, which is not a color attribute"),
                ),
                Some(p) if !p.contains(color) => level_error(
                    diags,
                    DiagCode::BadAppearance,
                    format!("appearance #{i} uses {color}, which is not in the `{name}` palette"),
                ),
                Some(_) => {}
            }
        }
    }
    for entry in &roster.mutants {
        if level.mutant(&entry.id).is_none() {
            level_error(diags, DiagCode::RosterUnknownMutant, format!("roster names unknown mutant `{}`", entry.id));
        }
        if entry.appearance >= roster.appearances.len().max(1) {
            level_error(
                diags,
                DiagCode::BadAppearance,
                format!("mutant `{}` uses appearance #{}, which does not exist", entry.id, entry.appearance),
            );
        }
    }
}

/// Cross-level checks: unlock prerequisites exist, form no cycle, and every
/// loop level requires a base level with the standard points threshold.
pub fn validate_catalog(levels: &[Level]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let by_id: BTreeMap<&str, &Level> = levels.iter().map(|l| (l.id.as_str(), l)).collect();
    for level in levels {
        match (&level.unlock.requires, level.kind) {
            (None, LevelKind::Loop) => level_error(
                &mut diags,
                DiagCode::UnlockMissing,
                format!("loop level `{}` names no base level to unlock it", level.id),
            ),
            (None, LevelKind::Base) => {}
            (Some(req), kind) => match by_id.get(req.as_str()) {
                None => level_error(
                    &mut diags,
                    DiagCode::UnlockUnknownLevel,
                    format!("`{}` requires unknown level `{req}`", level.id),
                ),
                Some(prereq) => {
                    if kind == LevelKind::Loop
                        && (prereq.kind != LevelKind::Base || level.unlock.min_points != Some(UNLOCK_POINTS))
                    {
                        level_error(
                            &mut diags,
                            DiagCode::UnlockMissing,
                            format!("loop level `{}` must require a base level with {UNLOCK_POINTS} points", level.id),
                        );
                    }
                }
            },
        }
    }
    for level in levels {
        let mut seen = BTreeSet::new();
        let mut at = level;
        while let Some(next) = at.unlock.requires.as_deref().and_then(|r| by_id.get(r)) {
            if !seen.insert(at.id.as_str()) || next.id == level.id {
                level_error(&mut diags, DiagCode::UnlockCycle, format!("unlock chain of `{}` is circular", level.id));
                break;
            }
            at = next;
        }
    }
    diags
}
