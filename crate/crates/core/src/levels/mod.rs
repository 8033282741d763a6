//! Level definitions: board, program under test, mutant catalog, roster and
//! unlock rules.
//!
//! Level files are JSON with the top-level keys `id`, `kind`, `title`,
//! `flavor`, `schema`, `board`, `program`, `mutants`, `roster` and `unlock`.
//! Tiles are rows of single-character terrain codes (`g` grass, `d` dirt,
//! `i` ice, `w` water, `o` wood); positions are `[x, y]` with the origin in
//! the top-left corner. One tick moves a critter by one path tile.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocklang::{AstError, AttributeSchema, BerryKind, Color, Program, Terrain};
use crate::diagnostic::{has_errors, Diagnostic};
use crate::mutation::MutantSpec;

mod builtin;
mod validate;

pub use crate::blocklang::Context as LevelKind;
pub use builtin::{builtin_catalog, builtin_level, BUILTIN_IDS};
pub use validate::{validate_catalog, validate_level, validate_level_with, ValidationOptions};

/// Points a base level must reach before its loop level unlocks.
pub const UNLOCK_POINTS: i64 = 800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn is_adjacent(self, other: Pos) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }
}

impl From<[i32; 2]> for Pos {
    fn from([x, y]: [i32; 2]) -> Self {
        Pos { x, y }
    }
}

impl From<Pos> for [i32; 2] {
    fn from(p: Pos) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

/// Terrain grid, serialized as rows of terrain codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TileGrid {
    rows: Vec<Vec<Terrain>>,
}

impl TileGrid {
    pub fn rows(&self) -> &[Vec<Terrain>] {
        &self.rows
    }

    pub fn get(&self, pos: Pos) -> Option<Terrain> {
        if pos.x < 0 || pos.y < 0 {
            return None;
        }
        self.rows.get(pos.y as usize)?.get(pos.x as usize).copied()
    }
}

impl TryFrom<Vec<String>> for TileGrid {
    type Error = String;

    fn try_from(lines: Vec<String>) -> Result<Self, Self::Error> {
        let rows = lines
            .iter()
            .enumerate()
            .map(|(y, line)| {
                line.chars()
                    .enumerate()
                    .map(|(x, c)| {
                        Terrain::from_code(c).ok_or_else(|| format!("unknown terrain code `{c}` at [{x}, {y}]"))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TileGrid { rows })
    }
}

impl From<TileGrid> for Vec<String> {
    fn from(grid: TileGrid) -> Self {
        grid.rows.iter().map(|row| row.iter().map(|t| t.code()).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bush {
    pub pos: Pos,
    pub berry: BerryKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Landmarks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub village: Option<Pos>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<Pos>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basket: Option<Pos>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing: Option<Pos>,
    #[serde(default)]
    pub bushes: Vec<Bush>,
    #[serde(default)]
    pub signposts: Vec<Pos>,
}

/// The map. Base paths run from the village to the tower; loop paths are a
/// cycle starting at the basket (the last waypoint connects back to the first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Board {
    pub width: u32,
    pub height: u32,
    pub tiles: TileGrid,
    pub path: Vec<Pos>,
    #[serde(default)]
    pub landmarks: Landmarks,
}

impl Board {
    pub fn terrain(&self, pos: Pos) -> Option<Terrain> {
        if pos.x >= self.width as i32 || pos.y >= self.height as i32 {
            return None;
        }
        self.tiles.get(pos)
    }

    pub fn path_index(&self, pos: Pos) -> Option<usize> {
        self.path.iter().position(|p| *p == pos)
    }

    /// Path index of each signpost, in landmark order.
    pub fn signpost_indices(&self) -> Vec<Option<usize>> {
        self.landmarks.signposts.iter().map(|p| self.path_index(*p)).collect()
    }

    /// First path index (after the start) where a collector passes a bush of `berry`.
    pub fn bush_index(&self, berry: &BerryKind) -> Option<usize> {
        (1..self.path.len()).find(|&i| {
            let here = self.path[i];
            self.landmarks
                .bushes
                .iter()
                .any(|b| &b.berry == berry && (b.pos == here || b.pos.is_adjacent(here)))
        })
    }
}

fn default_multiplicity() -> u32 {
    1
}

fn default_spawn_interval() -> u64 {
    8
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RosterMutant {
    pub id: String,
    #[serde(default = "default_multiplicity")]
    pub multiplicity: u32,
    /// Index into the roster's appearances.
    #[serde(default)]
    pub appearance: usize,
}

/// Who walks the level. Healthy critter `j` wears `appearances[j % len]`;
/// mutants wear the appearance named in their entry. Catalog mutants without
/// an entry appear once in the first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RosterConfig {
    pub healthy_count: u32,
    #[serde(default = "default_spawn_interval")]
    pub spawn_interval: u64,
    #[serde(default)]
    pub appearances: Vec<BTreeMap<String, Color>>,
    #[serde(default)]
    pub mutants: Vec<RosterMutant>,
}

impl RosterConfig {
    pub fn appearance(&self, index: usize) -> BTreeMap<String, Color> {
        if self.appearances.is_empty() {
            BTreeMap::new()
        } else {
            self.appearances[index % self.appearances.len()].clone()
        }
    }

    /// Multiplicity and appearance index for a catalog mutant.
    pub fn mutant_entry(&self, id: &str) -> (u32, usize) {
        self.mutants
            .iter()
            .find(|m| m.id == id)
            .map(|m| (m.multiplicity, m.appearance))
            .unwrap_or((1, 0))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Unlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_points: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub id: String,
    pub kind: LevelKind,
    pub title: String,
    #[serde(default)]
    pub flavor: String,
    pub schema: AttributeSchema,
    pub board: Board,
    pub program: Program,
    #[serde(default)]
    pub mutants: Vec<MutantSpec>,
    pub roster: RosterConfig,
    #[serde(default)]
    pub unlock: Unlock,
}

impl Level {
    pub fn mutant(&self, id: &str) -> Option<&MutantSpec> {
        self.mutants.iter().find(|m| m.id == id)
    }

    /// Number of critters in one run.
    pub fn roster_size(&self) -> usize {
        let mutants: u32 = self.mutants.iter().map(|m| self.roster.mutant_entry(&m.id).0).sum();
        (self.roster.healthy_count + mutants) as usize
    }

    /// Canonical JSON text of the level.
    pub fn to_json(&self) -> String {
        crate::canonical::to_string(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error(transparent)]
    Syntax(#[from] AstError),
    #[error("level failed validation with {} error(s)", .0.iter().filter(|d| d.is_error()).count())]
    ValidationFailed(Vec<Diagnostic>),
}

/// Parses a level file without validating it.
pub fn parse_level(text: &str) -> Result<Level, AstError> {
    crate::blocklang::parse_ast(text)
}

/// Parses and validates a level; fails if validation reports any error.
pub fn load_level(text: &str) -> Result<Level, LevelError> {
    load_level_with(text, &ValidationOptions::default())
}

pub fn load_level_with(text: &str, options: &ValidationOptions) -> Result<Level, LevelError> {
    let level = parse_level(text)?;
    let diags = validate_level_with(&level, options);
    if has_errors(&diags) {
        return Err(LevelError::ValidationFailed(diags));
    }
    Ok(level)
}
