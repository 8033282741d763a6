use std::fmt;

use serde::{Deserialize, Serialize};

/// Address of an AST node as a list of child indices from the root.
///
/// Child numbering: a program's blocks (`init` = 0, `onTile` = 1; a recipe
/// body = 0); a block's statements by position; `setAttr` value = 0;
/// `if` cond = 0, then = 1, else = 2; `repeat` body = 0; `eq`/`assertEq`
/// lhs = 0, rhs = 1. A test program is itself a block.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AstPath(pub Vec<usize>);

impl AstPath {
    pub fn root() -> Self {
        AstPath(Vec::new())
    }

    pub fn child(&self, index: usize) -> Self {
        let mut steps = self.0.clone();
        steps.push(index);
        AstPath(steps)
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn parent(&self) -> Option<AstPath> {
        let (_, init) = self.0.split_last()?;
        Some(AstPath(init.to_vec()))
    }

    pub fn is_prefix_of(&self, other: &AstPath) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for AstPath {
    fn from(steps: Vec<usize>) -> Self {
        AstPath(steps)
    }
}

impl fmt::Display for AstPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("/")?;
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}
