//! Mutants of behavior programs: AST edits, generation operators, first
//! divergence, adequacy of a test setup and a bounded search for minimal
//! adequate tests.

use serde::{Deserialize, Serialize};

mod adequacy;
mod divergence;
mod edit;
mod generate;
mod solver;

pub use adequacy::{adequacy, AdequacyReport, MutantKill};
pub use divergence::{first_divergence, first_divergence_for, Divergence};
pub use edit::{apply_edits, apply_edits_checked, apply_edits_with_inverse, node_at, preorder, Edit, EditError, Node, NodeRef};
pub use generate::{generate_mutants, Operator};
pub use solver::{killable_mutants, solve_min_test, SolveBounds, SolveError, DEFAULT_SOLVE_BUDGET};

/// A mutant: edits applied to the level's healthy program, with the text
/// shown when mutants are revealed after a game.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutantSpec {
    pub id: String,
    pub edits: Vec<Edit>,
    #[serde(default, alias = "displayHint")]
    pub hint: String,
}

/// A list of mutants, serialized as `{"mutants": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutantCatalog {
    pub mutants: Vec<MutantSpec>,
    /// Level id or file the mutants were derived from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl MutantCatalog {
    pub fn len(&self) -> usize {
        self.mutants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutants.is_empty()
    }

    pub fn to_json(&self) -> String {
        crate::canonical::to_string(self)
    }
}
