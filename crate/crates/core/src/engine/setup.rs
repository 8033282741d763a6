use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::blocklang::{typecheck_test, TestStmt};
use crate::diagnostic::{DiagCode, Diagnostic, Location};
use crate::levels::{Level, LevelKind, Pos};

/// A portal on a base-level path tile.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortalPlacement {
    pub tile: Pos,
    pub test: Vec<TestStmt>,
}

/// The test written on a loop-level signpost (index into the board's signposts).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignpostTest {
    pub signpost: usize,
    pub test: Vec<TestStmt>,
}

/// Everything the player installs before a run: portals on base levels,
/// signpost tests on loop levels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setup {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub portals: Vec<PortalPlacement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub signposts: Vec<SignpostTest>,
}

impl Setup {
    pub fn portals(portals: Vec<PortalPlacement>) -> Self {
        Setup { portals, signposts: Vec::new() }
    }

    pub fn signposts(signposts: Vec<SignpostTest>) -> Self {
        Setup { portals: Vec::new(), signposts }
    }

    /// A single test on the first signpost.
    pub fn signpost(test: Vec<TestStmt>) -> Self {
        Setup::signposts(vec![SignpostTest { signpost: 0, test }])
    }

    pub fn tests(&self) -> impl Iterator<Item = &[TestStmt]> {
        self.portals.iter().map(|p| p.test.as_slice()).chain(self.signposts.iter().map(|s| s.test.as_slice()))
    }
}

/// Checks placements and test code against a level.
pub fn validate_setup(level: &Level, setup: &Setup) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let board = &level.board;
    match level.kind {
        LevelKind::Base => {
            if !setup.signposts.is_empty() {
                diags.push(Diagnostic::error(
                    DiagCode::WrongLevelKind,
                    Location::Level,
                    "base levels take portals, not signpost tests",
                ));
            }
            let mut seen = BTreeSet::new();
            for (i, portal) in setup.portals.iter().enumerate() {
                let at = Location::Board { pos: portal.tile };
                match (board.terrain(portal.tile), board.path_index(portal.tile)) {
                    (None, _) => diags.push(Diagnostic::error(DiagCode::PortalOffPath, at, "tile is off the board")),
                    (Some(t), _) if !t.walkable() => diags.push(Diagnostic::error(
                        DiagCode::UnwalkablePortal,
                        at,
                        format!("portals cannot stand on {t}"),
                    )),
                    (Some(_), None) => {
                        diags.push(Diagnostic::error(DiagCode::PortalOffPath, at, "portal is not on the path"))
                    }
                    (Some(_), Some(idx)) if idx == 0 || idx + 1 == board.path.len() => diags.push(
                        Diagnostic::error(DiagCode::PortalOnEndpoint, at, "portals cannot block the village or the tower"),
                    ),
                    _ => {}
                }
                if !seen.insert(portal.tile) {
                    diags.push(Diagnostic::error(
                        DiagCode::DuplicatePortal,
                        Location::Board { pos: portal.tile },
                        "only one portal fits on a tile",
                    ));
                }
                let root = format!("portal[{i}]");
                diags.extend(
                    typecheck_test(&portal.test, &level.schema, LevelKind::Base)
                        .into_iter()
                        .map(|d| d.with_root(&root)),
                );
            }
        }
        LevelKind::Loop => {
            if !setup.portals.is_empty() {
                diags.push(Diagnostic::error(
                    DiagCode::WrongLevelKind,
                    Location::Level,
                    "loop levels take signpost tests, not portals",
                ));
            }
            let mut seen = BTreeSet::new();
            for (i, sign) in setup.signposts.iter().enumerate() {
                if sign.signpost >= board.landmarks.signposts.len() {
                    diags.push(Diagnostic::error(
                        DiagCode::UnknownSignpost,
                        Location::Level,
                        format!("the board has no signpost #{}", sign.signpost),
                    ));
                }
                if !seen.insert(sign.signpost) {
                    diags.push(Diagnostic::error(
                        DiagCode::DuplicateSignpost,
                        Location::Level,
                        format!("signpost #{} has more than one test", sign.signpost),
                    ));
                }
                let root = format!("signpost[{i}]");
                diags.extend(
                    typecheck_test(&sign.test, &level.schema, LevelKind::Loop)
                        .into_iter()
                        .map(|d| d.with_root(&root)),
                );
            }
        }
    }
    diags
}
