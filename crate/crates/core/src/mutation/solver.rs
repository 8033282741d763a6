//! Exhaustive search for the smallest adequate test.
//!
//! Tests never change critters, so every state a test can observe is known
//! up front: one per critter kind and tile on base levels, one per kind and
//! lap at a loop-level signpost. Each candidate condition is evaluated once
//! into a bitmask over those observations, and candidate tests are then
//! scored with bitwise operations alone.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::apply_edits;
use crate::blocklang::{
    eval_expr, Color, CritterState, Expr, Literal, Terrain, TestStmt, Ty, Value,
};
use crate::engine::trace::{base_trace, loop_trace};
use crate::engine::{EngineError, PortalPlacement, Setup, SignpostTest};
use crate::levels::{Level, LevelKind};

/// Candidate tests examined before giving up.
pub const DEFAULT_SOLVE_BUDGET: u64 = 5_000_000;

const MAX_BITS: usize = 128;

/// Size limits of the test grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveBounds {
    /// Total `AssertEq` blocks across all placements.
    pub max_assertions: usize,
    /// Nesting depth of `If` blocks within one test.
    pub max_if_depth: usize,
}

impl SolveBounds {
    pub const fn new(max_assertions: usize, max_if_depth: usize) -> Self {
        SolveBounds { max_assertions, max_if_depth }
    }
}

impl Default for SolveBounds {
    fn default() -> Self {
        SolveBounds::new(2, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("search budget of {0} candidate tests exhausted")]
    BudgetExceeded(u64),
    #[error("level has more than {MAX_BITS} observations at one site or critter kinds")]
    TooLarge,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CStmt {
    Assert(usize),
    If(usize, Vec<CStmt>, Vec<CStmt>),
}

fn depth(block: &[CStmt]) -> usize {
    block
        .iter()
        .map(|s| match s {
            CStmt::Assert(_) => 0,
            CStmt::If(_, t, e) => 1 + depth(t).max(depth(e)),
        })
        .max()
        .unwrap_or(0)
}

/// Observations that fail the test, given those that reach it.
fn failures(block: &[CStmt], reach: u128, truth: &[u128]) -> u128 {
    let mut alive = reach;
    let mut failed = 0;
    for stmt in block {
        match stmt {
            CStmt::Assert(a) => {
                failed |= alive & !truth[*a];
                alive &= truth[*a];
            }
            CStmt::If(c, then, otherwise) => {
                let f = failures(then, alive & truth[*c], truth) | failures(otherwise, alive & !truth[*c], truth);
                failed |= f;
                alive &= !f;
            }
        }
    }
    failed
}

/// Calls `f` with every block holding exactly `assertions` assertions and
/// no `If` nested deeper than `depth`, in generation order.
fn each_block(
    assertions: usize,
    depth: usize,
    grammar: (usize, usize),
    prefix: &mut Vec<CStmt>,
    f: &mut dyn FnMut(&[CStmt]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if assertions == 0 {
        return f(prefix);
    }
    for first in 1..=assertions {
        each_stmt(first, depth, grammar, &mut |stmt| {
            prefix.push(stmt);
            let flow = each_block(assertions - first, depth, grammar, prefix, f);
            prefix.pop();
            flow
        })?;
    }
    ControlFlow::Continue(())
}

fn each_stmt(
    assertions: usize,
    depth: usize,
    (n_atoms, n_conds): (usize, usize),
    f: &mut dyn FnMut(CStmt) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if assertions == 1 {
        for a in 0..n_atoms {
            f(CStmt::Assert(a))?;
        }
    }
    if depth >= 1 {
        for c in 0..n_conds {
            for in_then in (0..=assertions).rev() {
                each_block(in_then, depth - 1, (n_atoms, n_conds), &mut Vec::new(), &mut |then| {
                    each_block(assertions - in_then, depth - 1, (n_atoms, n_conds), &mut Vec::new(), &mut |otherwise| {
                        f(CStmt::If(c, then.to_vec(), otherwise.to_vec()))
                    })
                })?;
            }
        }
    }
    ControlFlow::Continue(())
}

#[derive(Debug, Clone, Copy)]
enum SiteRef {
    Tile(usize),
    Signpost(usize),
}

struct Site {
    at: SiteRef,
    /// Truth of each condition, one bit per observation.
    truth: Vec<u128>,
    all: u128,
    healthy: u128,
    kind_of: Vec<usize>,
}

impl Site {
    fn kinds(&self, mut observations: u128) -> u128 {
        let mut kinds = 0u128;
        while observations != 0 {
            let bit = observations.trailing_zeros() as usize;
            kinds |= 1 << self.kind_of[bit];
            observations &= observations - 1;
        }
        kinds
    }
}

struct Space {
    /// Assertion operands are `conds[..n_atoms]`; the rest are tile conditions.
    conds: Vec<Expr>,
    n_atoms: usize,
    sites: Vec<Site>,
    mutant_ids: Vec<Option<String>>,
    mutants: u128,
}

impl Space {
    fn grammar(&self) -> (usize, usize) {
        (self.n_atoms, self.conds.len())
    }

    fn to_test(&self, block: &[CStmt]) -> Vec<TestStmt> {
        block
            .iter()
            .map(|s| match s {
                CStmt::Assert(a) => match &self.conds[*a] {
                    Expr::Eq { lhs, rhs } => TestStmt::assert_eq((**lhs).clone(), (**rhs).clone()),
                    other => unreachable!("assertion atom {other:?} is not a comparison"),
                },
                CStmt::If(c, t, e) => TestStmt::if_else(self.conds[*c].clone(), self.to_test(t), self.to_test(e)),
            })
            .collect()
    }
}

struct Kind {
    mutant: Option<String>,
    appearance: BTreeMap<String, Color>,
    program: crate::blocklang::Program,
}

fn kinds(level: &Level, all_mutants: bool) -> Result<Vec<Kind>, EngineError> {
    let roster = &level.roster;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for j in 0..roster.healthy_count as usize {
        let appearance = roster.appearance(j);
        if seen.insert(appearance.clone()) {
            out.push(Kind { mutant: None, appearance, program: level.program.clone() });
        }
        if seen.len() >= roster.appearances.len().max(1) {
            break;
        }
    }
    for m in &level.mutants {
        let (multiplicity, appearance) = roster.mutant_entry(&m.id);
        if multiplicity == 0 && !all_mutants {
            continue;
        }
        out.push(Kind {
            mutant: Some(m.id.clone()),
            appearance: roster.appearance(appearance),
            program: apply_edits(&level.program, &m.edits)?,
        });
    }
    Ok(out)
}

/// Comparison atoms: each attribute against every later attribute of its
/// type, then against the literals of its type.
fn atoms(level: &Level, count_max: u64) -> Vec<Expr> {
    let schema = &level.schema;
    let names = schema.attr_names();
    let mut out = Vec::new();
    for (i, lhs) in names.iter().enumerate() {
        let ty = schema.attr_type(lhs);
        for rhs in &names[i + 1..] {
            if schema.attr_type(rhs) == ty {
                out.push(Expr::eq(Expr::attr(*lhs), Expr::attr(*rhs)));
            }
        }
        match ty {
            Some(Ty::Color) => {
                for c in schema.palette(lhs).unwrap_or(&[]) {
                    out.push(Expr::eq(Expr::attr(*lhs), Expr::lit(Literal::Color(*c))));
                }
            }
            Some(Ty::Count) => {
                for n in 0..=count_max {
                    out.push(Expr::eq(Expr::attr(*lhs), Expr::count(n)));
                }
            }
            _ => {}
        }
    }
    out
}

fn build_space(level: &Level, all_mutants: bool) -> Result<Space, SolveError> {
    let kinds = kinds(level, all_mutants)?;
    if kinds.len() > MAX_BITS {
        return Err(SolveError::TooLarge);
    }
    let board = &level.board;
    let path = &board.path;

    // Per kind: the observations at each site, as (state, tile).
    let mut traces: Vec<Vec<CritterState>> = Vec::with_capacity(kinds.len());
    for k in &kinds {
        let steps = match level.kind {
            LevelKind::Base => base_trace(level, &k.program, &k.appearance)?,
            LevelKind::Loop => loop_trace(level, &k.program, &k.appearance)?,
        };
        traces.push(steps.into_iter().map(|s| s.state).collect());
    }

    let laps = level.program.recipe_loop().map(|(t, _)| t).unwrap_or(0);
    let peak = kinds
        .iter()
        .zip(&traces)
        .filter(|(k, _)| k.mutant.is_none())
        .flat_map(|(_, t)| t.iter())
        .flat_map(|s| s.attrs().values())
        .filter_map(|v| match v {
            Value::Count(n) => Some(*n),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let conds_eq = atoms(level, (laps + 1).max(peak));
    let n_atoms = conds_eq.len();
    let mut conds = conds_eq;
    if level.kind == LevelKind::Base {
        conds.extend(Terrain::ALL.into_iter().map(Expr::tile_is));
    }

    let site_refs: Vec<SiteRef> = match level.kind {
        LevelKind::Base => (1..path.len().saturating_sub(1)).map(SiteRef::Tile).collect(),
        LevelKind::Loop => board
            .signpost_indices()
            .iter()
            .enumerate()
            .filter(|(_, idx)| idx.is_some())
            .map(|(s, _)| SiteRef::Signpost(s))
            .collect(),
    };

    let mut sites = Vec::with_capacity(site_refs.len());
    for at in site_refs {
        let mut obs: Vec<(usize, &CritterState, Option<Terrain>)> = Vec::new();
        for (k, trace) in traces.iter().enumerate() {
            match at {
                SiteRef::Tile(i) => obs.push((k, &trace[i], board.terrain(path[i]))),
                SiteRef::Signpost(_) => obs.extend(trace.iter().map(|s| (k, s, None))),
            }
        }
        if obs.len() > MAX_BITS {
            return Err(SolveError::TooLarge);
        }
        let mut truth = Vec::with_capacity(conds.len());
        for cond in &conds {
            let mut mask = 0u128;
            for (bit, (_, state, tile)) in obs.iter().enumerate() {
                let value = eval_expr(cond, state, *tile).map_err(EngineError::from)?;
                if value == Value::Truth(true) {
                    mask |= 1 << bit;
                }
            }
            truth.push(mask);
        }
        let all = if obs.len() == MAX_BITS { u128::MAX } else { (1u128 << obs.len()) - 1 };
        let healthy = obs
            .iter()
            .enumerate()
            .filter(|(_, (k, _, _))| kinds[*k].mutant.is_none())
            .fold(0u128, |m, (bit, _)| m | 1 << bit);
        sites.push(Site { at, truth, all, healthy, kind_of: obs.iter().map(|(k, _, _)| *k).collect() });
    }

    let mutants = kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| k.mutant.is_some())
        .fold(0u128, |m, (i, _)| m | 1 << i);
    Ok(Space { conds, n_atoms, sites, mutant_ids: kinds.into_iter().map(|k| k.mutant).collect(), mutants })
}

struct Search<'a> {
    space: &'a Space,
    budget: u64,
    used: u64,
    chosen: Vec<(usize, Vec<CStmt>)>,
}

impl Search<'_> {
    fn spend(&mut self) -> ControlFlow<Option<SolveError>> {
        self.used += 1;
        if self.used > self.budget {
            ControlFlow::Break(Some(SolveError::BudgetExceeded(self.budget)))
        } else {
            ControlFlow::Continue(())
        }
    }

    /// Fills placement `i` onwards. Breaks with `None` once an adequate
    /// setup is in `chosen`.
    fn place(
        &mut self,
        i: usize,
        parts: &[usize],
        site_ids: &[usize],
        d: usize,
        killed: u128,
        deepest: usize,
    ) -> ControlFlow<Option<SolveError>> {
        if i == parts.len() {
            if deepest == d && killed & self.space.mutants == self.space.mutants {
                return ControlFlow::Break(None);
            }
            return ControlFlow::Continue(());
        }
        let space = self.space;
        let site = &space.sites[site_ids[i]];
        let mut outcome = ControlFlow::Continue(());
        let _ = each_block(parts[i], d, space.grammar(), &mut Vec::new(), &mut |test| {
            if let ControlFlow::Break(e) = self.spend() {
                outcome = ControlFlow::Break(e);
                return ControlFlow::Break(());
            }
            let failed = failures(test, site.all, &site.truth);
            if failed & site.healthy != 0 {
                return ControlFlow::Continue(());
            }
            let caught = site.kinds(failed);
            if caught & !killed == 0 {
                return ControlFlow::Continue(());
            }
            self.chosen.push((site_ids[i], test.to_vec()));
            let flow = self.place(i + 1, parts, site_ids, d, killed | caught, deepest.max(depth(test)));
            if flow.is_break() {
                outcome = flow;
                return ControlFlow::Break(());
            }
            self.chosen.pop();
            ControlFlow::Continue(())
        });
        outcome
    }
}

/// Compositions of `n` into `k` positive parts, lexicographically.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Increasing `k`-subsets of `0..n`, lexicographically.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Finds the first setup, in size order, that diverts every mutant in the
/// roster and no healthy critter. Size order is total assertion count, then
/// `If` depth, then number of placements, then generation order (sites
/// along the path, atoms by attribute name).
///
/// Loop levels get tests on their signposts, base levels get portals. An
/// adequate setup must divert something, so a level with no killable
/// mutant yields `None`.
pub fn solve_min_test(level: &Level, bounds: SolveBounds, budget: u64) -> Result<Option<Setup>, SolveError> {
    let space = build_space(level, false)?;
    if space.mutants == 0 {
        return Ok(None);
    }
    let mut search = Search { space: &space, budget, used: 0, chosen: Vec::new() };
    for n in 1..=bounds.max_assertions {
        for d in 0..=bounds.max_if_depth {
            for k in 1..=n.min(space.sites.len()) {
                for parts in compositions(n, k) {
                    for site_ids in combinations(space.sites.len(), k) {
                        match search.place(0, &parts, &site_ids, d, 0, 0) {
                            ControlFlow::Continue(()) => {}
                            ControlFlow::Break(Some(err)) => return Err(err),
                            ControlFlow::Break(None) => return Ok(Some(to_setup(level, &space, &search.chosen))),
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

fn to_setup(level: &Level, space: &Space, chosen: &[(usize, Vec<CStmt>)]) -> Setup {
    let mut setup = Setup::default();
    for (site, test) in chosen {
        let test = space.to_test(test);
        match space.sites[*site].at {
            SiteRef::Tile(i) => setup.portals.push(PortalPlacement { tile: level.board.path[i], test }),
            SiteRef::Signpost(signpost) => setup.signposts.push(SignpostTest { signpost, test }),
        }
    }
    setup
}

/// Ids of catalog mutants that some single test within `bounds` diverts
/// without diverting a healthy critter.
pub fn killable_mutants(level: &Level, bounds: SolveBounds, budget: u64) -> Result<BTreeSet<String>, SolveError> {
    let space = build_space(level, true)?;
    let mut killed = 0u128;
    let mut used = 0u64;
    let mut exhausted = false;
    'sites: for site in &space.sites {
        for n in 1..=bounds.max_assertions {
            let flow = each_block(n, bounds.max_if_depth, space.grammar(), &mut Vec::new(), &mut |test| {
                used += 1;
                if used > budget {
                    exhausted = true;
                    return ControlFlow::Break(());
                }
                let failed = failures(test, site.all, &site.truth);
                if failed & site.healthy == 0 {
                    killed |= site.kinds(failed);
                }
                if killed & space.mutants == space.mutants {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            if exhausted {
                return Err(SolveError::BudgetExceeded(budget));
            }
            if flow.is_break() {
                break 'sites;
            }
        }
    }
    Ok(space
        .mutant_ids
        .iter()
        .enumerate()
        .filter(|(i, _)| killed & (1 << i) != 0)
        .filter_map(|(_, id)| id.clone())
        .collect())
}
