use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::edit::{apply_edits, node_at, preorder, Edit, Node, NodeRef};
use super::{MutantCatalog, MutantSpec};
use crate::blocklang::{
    emit_ast, typecheck_program, AstPath, AttributeSchema, BehaviorStmt, Color, Context, Expr, Literal, Program,
};

/// Mutation operators, in enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    /// Replace a color literal with another color of the same palette.
    ColorConstant,
    /// Replace a count (literal or collected amount) with 0, n-1 or n+1.
    CountReplacement,
    /// Swap the then and else blocks of an `If`.
    BranchSwap,
    /// Change a `Repeat` bound by one.
    LoopBound,
    /// Remove one statement.
    StatementDeletion,
}

impl Operator {
    pub const ALL: [Operator; 5] = [
        Operator::ColorConstant,
        Operator::CountReplacement,
        Operator::BranchSwap,
        Operator::LoopBound,
        Operator::StatementDeletion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operator::ColorConstant => "color-constant",
            Operator::CountReplacement => "count-replacement",
            Operator::BranchSwap => "branch-swap",
            Operator::LoopBound => "loop-bound",
            Operator::StatementDeletion => "statement-deletion",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operator::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| format!("unknown operator `{s}`"))
    }
}

/// Palette a color literal at `path` draws from: the attribute it is
/// assigned to or compared with, else every declared color.
fn palette_for(program: &Program, path: &AstPath, schema: &AttributeSchema) -> Vec<Color> {
    let parent = path.parent().and_then(|p| node_at(program, &p));
    let attr = match parent {
        Some(NodeRef::Stmt(BehaviorStmt::SetAttr { name, .. })) => Some(name.as_str()),
        Some(NodeRef::Expr(Expr::Eq { lhs, rhs })) => match (lhs.as_ref(), rhs.as_ref()) {
            (Expr::Attr { name }, _) | (_, Expr::Attr { name }) => Some(name.as_str()),
            _ => None,
        },
        _ => None,
    };
    match attr.and_then(|a| schema.palette(a)) {
        Some(p) if !p.is_empty() => p.to_vec(),
        _ => schema.palette_union(),
    }
}

fn count_values(n: u64) -> Vec<u64> {
    let mut values: BTreeSet<u64> = [0, n + 1].into_iter().collect();
    if n >= 1 {
        values.insert(n - 1);
    }
    values.remove(&n);
    values.into_iter().collect()
}

/// Candidate edits of one operator at one node, with a short description.
fn candidates(
    program: &Program,
    path: &AstPath,
    node: NodeRef<'_>,
    op: Operator,
    schema: &AttributeSchema,
) -> Vec<(Edit, String)> {
    let mut out = Vec::new();
    match (op, node) {
        (Operator::ColorConstant, NodeRef::Expr(Expr::Lit { value: Literal::Color(c) })) => {
            for other in palette_for(program, path, schema) {
                if other != *c {
                    out.push((
                        Edit::new(path.clone(), Node::Expr(Expr::color(other))),
                        format!("{other} instead of {c}"),
                    ));
                }
            }
        }
        (Operator::CountReplacement, NodeRef::Expr(Expr::Lit { value: Literal::Count(n) })) => {
            for v in count_values(*n) {
                out.push((Edit::new(path.clone(), Node::Expr(Expr::count(v))), format!("{v} instead of {n}")));
            }
        }
        (Operator::CountReplacement, NodeRef::Stmt(BehaviorStmt::Collect { berry, count })) => {
            for v in count_values(*count) {
                out.push((
                    Edit::new(path.clone(), Node::Stmt(BehaviorStmt::Collect { berry: berry.clone(), count: v })),
                    format!("collects {v} {berry} instead of {count}"),
                ));
            }
        }
        (Operator::BranchSwap, NodeRef::Stmt(BehaviorStmt::If { cond, then, otherwise })) => {
            let swapped = BehaviorStmt::if_else(cond.clone(), otherwise.clone(), then.clone());
            out.push((Edit::new(path.clone(), Node::Stmt(swapped)), "then and else swapped".to_string()));
        }
        (Operator::LoopBound, NodeRef::Stmt(BehaviorStmt::Repeat { times, body })) => {
            let mut bounds = Vec::new();
            if *times > 1 {
                bounds.push(times - 1);
            }
            bounds.push(times + 1);
            for t in bounds {
                out.push((
                    Edit::new(path.clone(), Node::Stmt(BehaviorStmt::repeat(t, body.clone()))),
                    format!("repeats {t} times instead of {times}"),
                ));
            }
        }
        (Operator::StatementDeletion, NodeRef::Stmt(_)) => {
            if let (Some(parent), Some(&index)) = (path.parent(), path.steps().last()) {
                if let Some(NodeRef::Block(block)) = node_at(program, &parent) {
                    let mut body = block.to_vec();
                    body.remove(index);
                    out.push((Edit::new(parent, Node::Block(body)), "a statement is missing".to_string()));
                }
            }
        }
        _ => {}
    }
    out
}

/// Enumerates single-edit mutants in preorder, then operator order, then
/// value order. Ill-typed and unchanged results are skipped, duplicates (by
/// resulting program) keep their first occurrence, and at most `limit`
/// mutants are returned.
pub fn generate_mutants(
    program: &Program,
    schema: &AttributeSchema,
    operators: &[Operator],
    limit: usize,
) -> MutantCatalog {
    let context = match program {
        Program::Critter { .. } => Context::Base,
        Program::Recipe { .. } => Context::Loop,
    };
    let ops: BTreeSet<Operator> = operators.iter().copied().collect();
    let source = emit_ast(program);
    let mut seen = BTreeSet::new();
    let mut mutants = Vec::new();
    'outer: for (path, node) in preorder(program) {
        for &op in &ops {
            for (edit, what) in candidates(program, &path, node, op, schema) {
                if mutants.len() >= limit {
                    break 'outer;
                }
                let Ok(mutant) = apply_edits(program, std::slice::from_ref(&edit)) else {
                    continue;
                };
                if !typecheck_program(&mutant, schema, context).is_empty() {
                    continue;
                }
                let text = emit_ast(&mutant);
                if text == source || !seen.insert(text) {
                    continue;
                }
                mutants.push(MutantSpec {
                    id: format!("m{:02}", mutants.len() + 1),
                    hint: format!("{op} at {path}: {what}"),
                    edits: vec![edit],
                });
            }
        }
    }
    MutantCatalog { mutants, source: None }
}
