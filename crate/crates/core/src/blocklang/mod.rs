//! The block language: behavior programs that critters execute and test
//! programs that portals and signposts evaluate.
//!
//! Programs are plain data. [`eval`] interprets them, [`typecheck`] checks
//! them against a level's [`AttributeSchema`], and [`text`] converts them to
//! and from canonical JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod eval;
pub mod path;
pub mod text;
pub mod typecheck;

pub use eval::{
    eval_expr, exec_behavior, run_test, CritterState, Effect, EvalError, ExecEnv, TestOutcome,
    DEFAULT_COUNTER_CAP,
};
pub use path::AstPath;
pub use text::{emit_ast, parse_ast, AstError};
pub use typecheck::{typecheck_program, typecheck_test, Context};

/// The engine-managed lap counter present in every loop-level schema.
pub const ROUNDS_COUNT: &str = "roundsCount";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Orange,
    Blue,
    Pink,
    Green,
    Purple,
}

impl Color {
    pub const ALL: [Color; 6] =
        [Color::Red, Color::Orange, Color::Blue, Color::Pink, Color::Green, Color::Purple];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Orange => "orange",
            Color::Blue => "blue",
            Color::Pink => "pink",
            Color::Green => "green",
            Color::Purple => "purple",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown color `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terrain {
    Grass,
    Dirt,
    Ice,
    Water,
    Wood,
}

impl Terrain {
    pub const ALL: [Terrain; 5] =
        [Terrain::Grass, Terrain::Dirt, Terrain::Ice, Terrain::Water, Terrain::Wood];

    /// Critters only walk on grass, dirt and ice.
    pub fn walkable(self) -> bool {
        matches!(self, Terrain::Grass | Terrain::Dirt | Terrain::Ice)
    }

    /// Single-character code used in level files.
    pub fn code(self) -> char {
        match self {
            Terrain::Grass => 'g',
            Terrain::Dirt => 'd',
            Terrain::Ice => 'i',
            Terrain::Water => 'w',
            Terrain::Wood => 'o',
        }
    }

    pub fn from_code(c: char) -> Option<Terrain> {
        Terrain::ALL.into_iter().find(|t| t.code() == c)
    }
}

impl fmt::Display for Terrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Terrain::Grass => "grass",
            Terrain::Dirt => "dirt",
            Terrain::Ice => "ice",
            Terrain::Water => "water",
            Terrain::Wood => "wood",
        };
        f.write_str(name)
    }
}

/// A kind of berry. The schema maps each kind to the counter it fills.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BerryKind(pub String);

impl BerryKind {
    pub fn new(name: impl Into<String>) -> Self {
        BerryKind(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BerryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A literal block: a color swatch or a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Color(Color),
    Count(u64),
}

impl Literal {
    pub fn ty(self) -> Ty {
        match self {
            Literal::Color(_) => Ty::Color,
            Literal::Count(_) => Ty::Count,
        }
    }
}

impl From<Literal> for Value {
    fn from(lit: Literal) -> Self {
        match lit {
            Literal::Color(c) => Value::Color(c),
            Literal::Count(n) => Value::Count(n),
        }
    }
}

/// Runtime values. `Truth` only arises while evaluating conditions and is
/// never stored in a critter's attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Color(Color),
    Count(u64),
    Truth(bool),
}

impl Value {
    pub fn ty(self) -> Ty {
        match self {
            Value::Color(_) => Ty::Color,
            Value::Count(_) => Ty::Count,
            Value::Truth(_) => Ty::Bool,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Color(c) => write!(f, "{c}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Truth(b) => write!(f, "{b}"),
        }
    }
}

/// Static types of expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Ty {
    Color,
    Count,
    Bool,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ty::Color => "color",
            Ty::Count => "count",
            Ty::Bool => "condition",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Expr {
    Lit { value: Literal },
    Attr { name: String },
    TileIs { terrain: Terrain },
    Eq { lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn lit(value: Literal) -> Self {
        Expr::Lit { value }
    }

    pub fn color(c: Color) -> Self {
        Expr::Lit { value: Literal::Color(c) }
    }

    pub fn count(n: u64) -> Self {
        Expr::Lit { value: Literal::Count(n) }
    }

    pub fn attr(name: impl Into<String>) -> Self {
        Expr::Attr { name: name.into() }
    }

    pub fn tile_is(terrain: Terrain) -> Self {
        Expr::TileIs { terrain }
    }

    pub fn eq(lhs: Expr, rhs: Expr) -> Self {
        Expr::Eq { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum BehaviorStmt {
    SetAttr {
        name: String,
        value: Expr,
    },
    Collect {
        berry: BerryKind,
        count: u64,
    },
    If {
        cond: Expr,
        then: Vec<BehaviorStmt>,
        #[serde(rename = "else")]
        otherwise: Vec<BehaviorStmt>,
    },
    Repeat {
        times: u64,
        body: Vec<BehaviorStmt>,
    },
}

impl BehaviorStmt {
    pub fn set_attr(name: impl Into<String>, value: Expr) -> Self {
        BehaviorStmt::SetAttr { name: name.into(), value }
    }

    pub fn collect(berry: &str, count: u64) -> Self {
        BehaviorStmt::Collect { berry: BerryKind::new(berry), count }
    }

    pub fn if_else(cond: Expr, then: Vec<BehaviorStmt>, otherwise: Vec<BehaviorStmt>) -> Self {
        BehaviorStmt::If { cond, then, otherwise }
    }

    pub fn repeat(times: u64, body: Vec<BehaviorStmt>) -> Self {
        BehaviorStmt::Repeat { times, body }
    }
}

/// A statement of portal or signpost code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum TestStmt {
    /// "only critters with `lhs` equals `rhs` can pass"
    AssertEq { lhs: Expr, rhs: Expr },
    If {
        cond: Expr,
        then: Vec<TestStmt>,
        #[serde(rename = "else")]
        otherwise: Vec<TestStmt>,
    },
}

impl TestStmt {
    pub fn assert_eq(lhs: Expr, rhs: Expr) -> Self {
        TestStmt::AssertEq { lhs, rhs }
    }

    pub fn if_else(cond: Expr, then: Vec<TestStmt>, otherwise: Vec<TestStmt>) -> Self {
        TestStmt::If { cond, then, otherwise }
    }
}

/// Counts `AssertEq` blocks in a test.
pub fn assertion_count(test: &[TestStmt]) -> usize {
    test.iter()
        .map(|s| match s {
            TestStmt::AssertEq { .. } => 1,
            TestStmt::If { then, otherwise, .. } => assertion_count(then) + assertion_count(otherwise),
        })
        .sum()
}

/// Counts every block (statements and expressions) in a test.
pub fn block_count(test: &[TestStmt]) -> usize {
    fn expr(e: &Expr) -> usize {
        match e {
            Expr::Eq { lhs, rhs } => 1 + expr(lhs) + expr(rhs),
            _ => 1,
        }
    }
    test.iter()
        .map(|s| match s {
            TestStmt::AssertEq { lhs, rhs } => 1 + expr(lhs) + expr(rhs),
            TestStmt::If { cond, then, otherwise } => {
                1 + expr(cond) + block_count(then) + block_count(otherwise)
            }
        })
        .sum()
}

/// Behavior program executed by critters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Program {
    /// Critter under test: initialization plus code executed on each tile.
    Critter {
        init: Vec<BehaviorStmt>,
        #[serde(rename = "onTile")]
        on_tile: Vec<BehaviorStmt>,
    },
    /// Recipe under test: exactly one top-level `Repeat` whose iterations are laps.
    Recipe { body: Vec<BehaviorStmt> },
}

impl Program {
    /// For a well-formed recipe, the number of laps and the lap body.
    pub fn recipe_loop(&self) -> Option<(u64, &[BehaviorStmt])> {
        match self {
            Program::Recipe { body } => match body.as_slice() {
                [BehaviorStmt::Repeat { times, body }] => Some((*times, body.as_slice())),
                _ => None,
            },
            Program::Critter { .. } => None,
        }
    }
}

/// What a counter attribute counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "camelCase", deny_unknown_fields)]
pub enum CounterRole {
    Berry { berry: BerryKind },
    /// Managed by the engine; holds the current 1-based lap.
    Rounds,
}

/// Attribute declarations of a level.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSchema {
    #[serde(default)]
    pub colors: BTreeMap<String, Vec<Color>>,
    #[serde(default)]
    pub counters: BTreeMap<String, CounterRole>,
}

impl AttributeSchema {
    pub fn attr_type(&self, name: &str) -> Option<Ty> {
        if self.colors.contains_key(name) {
            Some(Ty::Color)
        } else if self.counters.contains_key(name) {
            Some(Ty::Count)
        } else {
            None
        }
    }

    pub fn palette(&self, name: &str) -> Option<&[Color]> {
        self.colors.get(name).map(Vec::as_slice)
    }

    /// All colors used by any palette, in canonical color order.
    pub fn palette_union(&self) -> Vec<Color> {
        let mut all: Vec<Color> = self.colors.values().flatten().copied().collect();
        all.sort();
        all.dedup();
        all
    }

    /// Counter filled by collecting `berry`.
    pub fn berry_counter(&self, berry: &BerryKind) -> Option<&str> {
        self.counters.iter().find_map(|(name, role)| match role {
            CounterRole::Berry { berry: b } if b == berry => Some(name.as_str()),
            _ => None,
        })
    }

    pub fn is_engine_managed(&self, name: &str) -> bool {
        matches!(self.counters.get(name), Some(CounterRole::Rounds))
    }

    /// Attribute names in sorted order.
    pub fn attr_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> =
            self.colors.keys().chain(self.counters.keys()).map(String::as_str).collect();
        names.sort();
        names
    }
}
