//! Tree-walking interpreter for behavior and test programs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AstPath, AttributeSchema, BehaviorStmt, BerryKind, Color, Expr, Terrain, TestStmt, Ty, Value};

pub const DEFAULT_COUNTER_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type mismatch: cannot compare or assign {left} and {right}")]
    TypeMismatch { left: Ty, right: Ty },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("no counter collects `{0}` berries")]
    UnknownBerry(BerryKind),
    #[error("tile condition evaluated without a tile")]
    TileContextMissing,
    #[error("counter `{name}` exceeds the cap of {cap}")]
    CounterOverflow { name: String, cap: u64 },
}

/// Attribute store of one critter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CritterState {
    attrs: BTreeMap<String, Value>,
}

impl CritterState {
    /// Fresh state: colors from `appearance` (else the palette's first
    /// entry), all counters zero.
    pub fn initial(schema: &AttributeSchema, appearance: &BTreeMap<String, Color>) -> Self {
        let mut attrs = BTreeMap::new();
        for (name, palette) in &schema.colors {
            let color = appearance
                .get(name)
                .copied()
                .or_else(|| palette.first().copied())
                .unwrap_or(Color::Red);
            attrs.insert(name.clone(), Value::Color(color));
        }
        for name in schema.counters.keys() {
            attrs.insert(name.clone(), Value::Count(0));
        }
        CritterState { attrs }
    }

    pub fn from_attrs(attrs: BTreeMap<String, Value>) -> Self {
        CritterState { attrs }
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.attrs.get(name).copied()
    }

    pub fn attrs(&self) -> &BTreeMap<String, Value> {
        &self.attrs
    }

    pub fn count(&self, name: &str) -> u64 {
        match self.attrs.get(name) {
            Some(Value::Count(n)) => *n,
            _ => 0,
        }
    }

    /// Stores a color or count. Fails on conditions and on a type change.
    pub fn set(&mut self, name: &str, value: Value) -> Result<(), EvalError> {
        let slot = self
            .attrs
            .get_mut(name)
            .ok_or_else(|| EvalError::UnknownAttribute(name.to_string()))?;
        if slot.ty() != value.ty() || value.ty() == Ty::Bool {
            return Err(EvalError::TypeMismatch { left: slot.ty(), right: value.ty() });
        }
        *slot = value;
        Ok(())
    }
}

/// Observable side effects of behavior code, in execution order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Effect {
    AttrChange { name: String, value: Value },
    Collect { berry: BerryKind, count: u64, counter: String },
}

/// What behavior code needs besides the state: the schema (to map berries to
/// counters) and the counter cap.
#[derive(Debug, Clone, Copy)]
pub struct ExecEnv<'a> {
    pub schema: &'a AttributeSchema,
    pub counter_cap: u64,
}

impl<'a> ExecEnv<'a> {
    pub fn new(schema: &'a AttributeSchema) -> Self {
        ExecEnv { schema, counter_cap: DEFAULT_COUNTER_CAP }
    }
}

pub fn eval_expr(expr: &Expr, state: &CritterState, tile: Option<Terrain>) -> Result<Value, EvalError> {
    match expr {
        Expr::Lit { value } => Ok((*value).into()),
        Expr::Attr { name } => {
            state.get(name).ok_or_else(|| EvalError::UnknownAttribute(name.clone()))
        }
        Expr::TileIs { terrain } => {
            let here = tile.ok_or(EvalError::TileContextMissing)?;
            Ok(Value::Truth(here == *terrain))
        }
        Expr::Eq { lhs, rhs } => {
            let l = eval_expr(lhs, state, tile)?;
            let r = eval_expr(rhs, state, tile)?;
            match (l, r) {
                (Value::Color(a), Value::Color(b)) => Ok(Value::Truth(a == b)),
                (Value::Count(a), Value::Count(b)) => Ok(Value::Truth(a == b)),
                _ => Err(EvalError::TypeMismatch { left: l.ty(), right: r.ty() }),
            }
        }
    }
}

fn eval_cond(expr: &Expr, state: &CritterState, tile: Option<Terrain>) -> Result<bool, EvalError> {
    match eval_expr(expr, state, tile)? {
        Value::Truth(b) => Ok(b),
        other => Err(EvalError::TypeMismatch { left: Ty::Bool, right: other.ty() }),
    }
}

/// Runs behavior statements sequentially and returns the new state with the
/// effects that produced it. The input state is not modified.
pub fn exec_behavior(
    stmts: &[BehaviorStmt],
    state: &CritterState,
    tile: Option<Terrain>,
    env: &ExecEnv<'_>,
) -> Result<(CritterState, Vec<Effect>), EvalError> {
    let mut next = state.clone();
    let mut effects = Vec::new();
    exec_block(stmts, &mut next, tile, env, &mut effects)?;
    Ok((next, effects))
}

fn exec_block(
    stmts: &[BehaviorStmt],
    state: &mut CritterState,
    tile: Option<Terrain>,
    env: &ExecEnv<'_>,
    effects: &mut Vec<Effect>,
) -> Result<(), EvalError> {
    for stmt in stmts {
        match stmt {
            BehaviorStmt::SetAttr { name, value } => {
                let v = eval_expr(value, state, tile)?;
                if let Value::Count(n) = v {
                    if n > env.counter_cap {
                        return Err(EvalError::CounterOverflow { name: name.clone(), cap: env.counter_cap });
                    }
                }
                state.set(name, v)?;
                effects.push(Effect::AttrChange { name: name.clone(), value: v });
            }
            BehaviorStmt::Collect { berry, count } => {
                let counter = env
                    .schema
                    .berry_counter(berry)
                    .ok_or_else(|| EvalError::UnknownBerry(berry.clone()))?;
                let total = state
                    .count(counter)
                    .checked_add(*count)
                    .filter(|t| *t <= env.counter_cap)
                    .ok_or_else(|| EvalError::CounterOverflow {
                        name: counter.to_string(),
                        cap: env.counter_cap,
                    })?;
                state.set(counter, Value::Count(total))?;
                effects.push(Effect::Collect {
                    berry: berry.clone(),
                    count: *count,
                    counter: counter.to_string(),
                });
            }
            BehaviorStmt::If { cond, then, otherwise } => {
                let branch = if eval_cond(cond, state, tile)? { then } else { otherwise };
                exec_block(branch, state, tile, env, effects)?;
            }
            BehaviorStmt::Repeat { times, body } => {
                for _ in 0..*times {
                    exec_block(body, state, tile, env, effects)?;
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TestOutcome {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_assertion_path: Option<AstPath>,
}

impl TestOutcome {
    fn pass() -> Self {
        TestOutcome { passed: true, failed_assertion_path: None }
    }
}

/// Evaluates a test against a critter. Every executed assertion must hold;
/// evaluation stops at the first one that does not.
pub fn run_test(test: &[TestStmt], state: &CritterState, tile: Option<Terrain>) -> Result<TestOutcome, EvalError> {
    let mut path = Vec::new();
    match first_failure(test, state, tile, &mut path)? {
        Some(p) => Ok(TestOutcome { passed: false, failed_assertion_path: Some(AstPath(p)) }),
        None => Ok(TestOutcome::pass()),
    }
}

fn first_failure(
    block: &[TestStmt],
    state: &CritterState,
    tile: Option<Terrain>,
    path: &mut Vec<usize>,
) -> Result<Option<Vec<usize>>, EvalError> {
    for (i, stmt) in block.iter().enumerate() {
        path.push(i);
        let failed = match stmt {
            TestStmt::AssertEq { lhs, rhs } => {
                let cmp = Expr::Eq { lhs: Box::new(lhs.clone()), rhs: Box::new(rhs.clone()) };
                if eval_cond(&cmp, state, tile)? {
                    None
                } else {
                    Some(path.clone())
                }
            }
            TestStmt::If { cond, then, otherwise } => {
                let (slot, branch) = if eval_cond(cond, state, tile)? { (1, then) } else { (2, otherwise) };
                path.push(slot);
                let inner = first_failure(branch, state, tile, path)?;
                path.pop();
                inner
            }
        };
        path.pop();
        if failed.is_some() {
            return Ok(failed);
        }
    }
    Ok(None)
}
