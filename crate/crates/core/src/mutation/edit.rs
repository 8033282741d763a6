//! Addressing and replacing nodes of behavior programs.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::blocklang::{typecheck_program, AstPath, AttributeSchema, BehaviorStmt, Context, Expr, Program};
use crate::diagnostic::Diagnostic;

/// A replaceable AST node. Blocks serialize as `{"kind":"block","body":[…]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Expr(Expr),
    Stmt(BehaviorStmt),
    Block(Vec<BehaviorStmt>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRepr {
    kind: String,
    body: Vec<BehaviorStmt>,
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Node::Expr(e) => e.serialize(s),
            Node::Stmt(st) => st.serialize(s),
            Node::Block(body) => BlockRepr { kind: "block".into(), body: body.clone() }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| D::Error::custom("node without a `kind`"))?
            .to_string();
        match kind.as_str() {
            "lit" | "attr" | "tileIs" | "eq" => {
                serde_json::from_value(value).map(Node::Expr).map_err(D::Error::custom)
            }
            "setAttr" | "collect" | "if" | "repeat" => {
                serde_json::from_value(value).map(Node::Stmt).map_err(D::Error::custom)
            }
            "block" => serde_json::from_value::<BlockRepr>(value)
                .map(|b| Node::Block(b.body))
                .map_err(D::Error::custom),
            other => Err(D::Error::custom(format!("unknown node kind `{other}`"))),
        }
    }
}

/// Borrowed view of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef<'a> {
    Expr(&'a Expr),
    Stmt(&'a BehaviorStmt),
    Block(&'a [BehaviorStmt]),
}

impl NodeRef<'_> {
    pub fn to_owned(self) -> Node {
        match self {
            NodeRef::Expr(e) => Node::Expr(e.clone()),
            NodeRef::Stmt(s) => Node::Stmt(s.clone()),
            NodeRef::Block(b) => Node::Block(b.to_vec()),
        }
    }
}

/// Replace the node at `path` with `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edit {
    pub path: AstPath,
    pub replacement: Node,
}

impl Edit {
    pub fn new(path: impl Into<AstPath>, replacement: Node) -> Self {
        Edit { path: path.into(), replacement }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EditError {
    #[error("no node at {0}")]
    BadPath(AstPath),
    #[error("cannot put {found} where {expected} belongs ({path})")]
    IllTypedReplacement { path: AstPath, expected: &'static str, found: &'static str },
    #[error("edited program does not typecheck: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    IllTyped(Vec<Diagnostic>),
}

fn children(program: &Program) -> Vec<&[BehaviorStmt]> {
    match program {
        Program::Critter { init, on_tile } => vec![init, on_tile],
        Program::Recipe { body } => vec![body],
    }
}

fn child<'a>(node: NodeRef<'a>, index: usize) -> Option<NodeRef<'a>> {
    match node {
        NodeRef::Block(b) => b.get(index).map(NodeRef::Stmt),
        NodeRef::Stmt(stmt) => match (stmt, index) {
            (BehaviorStmt::SetAttr { value, .. }, 0) => Some(NodeRef::Expr(value)),
            (BehaviorStmt::If { cond, .. }, 0) => Some(NodeRef::Expr(cond)),
            (BehaviorStmt::If { then, .. }, 1) => Some(NodeRef::Block(then)),
            (BehaviorStmt::If { otherwise, .. }, 2) => Some(NodeRef::Block(otherwise)),
            (BehaviorStmt::Repeat { body, .. }, 0) => Some(NodeRef::Block(body)),
            _ => None,
        },
        NodeRef::Expr(expr) => match (expr, index) {
            (Expr::Eq { lhs, .. }, 0) => Some(NodeRef::Expr(lhs)),
            (Expr::Eq { rhs, .. }, 1) => Some(NodeRef::Expr(rhs)),
            _ => None,
        },
    }
}

fn child_count(node: NodeRef<'_>) -> usize {
    match node {
        NodeRef::Block(b) => b.len(),
        NodeRef::Stmt(BehaviorStmt::SetAttr { .. }) => 1,
        NodeRef::Stmt(BehaviorStmt::If { .. }) => 3,
        NodeRef::Stmt(BehaviorStmt::Repeat { .. }) => 1,
        NodeRef::Stmt(BehaviorStmt::Collect { .. }) => 0,
        NodeRef::Expr(Expr::Eq { .. }) => 2,
        NodeRef::Expr(_) => 0,
    }
}

/// The node at `path`, if any. The program root itself has no node.
pub fn node_at<'a>(program: &'a Program, path: &AstPath) -> Option<NodeRef<'a>> {
    let (first, rest) = path.steps().split_first()?;
    let mut node = NodeRef::Block(children(program).get(*first).copied()?);
    for &i in rest {
        node = child(node, i)?;
    }
    Some(node)
}

/// All nodes in preorder (a node before its children, children in index order).
pub fn preorder(program: &Program) -> Vec<(AstPath, NodeRef<'_>)> {
    fn walk<'a>(path: AstPath, node: NodeRef<'a>, out: &mut Vec<(AstPath, NodeRef<'a>)>) {
        out.push((path.clone(), node));
        for i in 0..child_count(node) {
            if let Some(c) = child(node, i) {
                walk(path.child(i), c, out);
            }
        }
    }
    let mut out = Vec::new();
    for (i, block) in children(program).into_iter().enumerate() {
        walk(AstPath(vec![i]), NodeRef::Block(block), &mut out);
    }
    out
}

enum SlotMut<'a> {
    Expr(&'a mut Expr),
    Stmt(&'a mut BehaviorStmt),
    Block(&'a mut Vec<BehaviorStmt>),
}

impl SlotMut<'_> {
    fn name(&self) -> &'static str {
        match self {
            SlotMut::Expr(_) => "an expression",
            SlotMut::Stmt(_) => "a statement",
            SlotMut::Block(_) => "a block",
        }
    }
}

fn node_name(node: &Node) -> &'static str {
    match node {
        Node::Expr(_) => "an expression",
        Node::Stmt(_) => "a statement",
        Node::Block(_) => "a block",
    }
}

fn slot_mut<'a>(program: &'a mut Program, path: &AstPath) -> Option<SlotMut<'a>> {
    let (first, rest) = path.steps().split_first()?;
    let root = match (program, first) {
        (Program::Critter { init, .. }, 0) => init,
        (Program::Critter { on_tile, .. }, 1) => on_tile,
        (Program::Recipe { body }, 0) => body,
        _ => return None,
    };
    let mut slot = SlotMut::Block(root);
    for &i in rest {
        slot = match slot {
            SlotMut::Block(b) => SlotMut::Stmt(b.get_mut(i)?),
            SlotMut::Stmt(stmt) => match (stmt, i) {
                (BehaviorStmt::SetAttr { value, .. }, 0) => SlotMut::Expr(value),
                (BehaviorStmt::If { cond, .. }, 0) => SlotMut::Expr(cond),
                (BehaviorStmt::If { then, .. }, 1) => SlotMut::Block(then),
                (BehaviorStmt::If { otherwise, .. }, 2) => SlotMut::Block(otherwise),
                (BehaviorStmt::Repeat { body, .. }, 0) => SlotMut::Block(body),
                _ => return None,
            },
            SlotMut::Expr(expr) => match (expr, i) {
                (Expr::Eq { lhs, .. }, 0) => SlotMut::Expr(lhs),
                (Expr::Eq { rhs, .. }, 1) => SlotMut::Expr(rhs),
                _ => return None,
            },
        };
    }
    Some(slot)
}

/// Replaces one node in place and returns the node it displaced.
fn replace(program: &mut Program, edit: &Edit) -> Result<Node, EditError> {
    let slot = slot_mut(program, &edit.path).ok_or_else(|| EditError::BadPath(edit.path.clone()))?;
    let mismatch = |slot: &SlotMut<'_>| EditError::IllTypedReplacement {
        path: edit.path.clone(),
        expected: slot.name(),
        found: node_name(&edit.replacement),
    };
    Ok(match (slot, &edit.replacement) {
        (SlotMut::Expr(e), Node::Expr(new)) => Node::Expr(std::mem::replace(e, new.clone())),
        (SlotMut::Stmt(s), Node::Stmt(new)) => Node::Stmt(std::mem::replace(s, new.clone())),
        (SlotMut::Block(b), Node::Block(new)) => Node::Block(std::mem::replace(b, new.clone())),
        (slot, _) => return Err(mismatch(&slot)),
    })
}

/// Applies edits in order, each addressing the program as edited so far.
/// The input program is left untouched.
pub fn apply_edits(program: &Program, edits: &[Edit]) -> Result<Program, EditError> {
    apply_edits_with_inverse(program, edits).map(|(p, _)| p)
}

/// Like [`apply_edits`], also returning the edits that undo the change.
pub fn apply_edits_with_inverse(program: &Program, edits: &[Edit]) -> Result<(Program, Vec<Edit>), EditError> {
    let mut out = program.clone();
    let mut inverse = Vec::with_capacity(edits.len());
    for edit in edits {
        let old = replace(&mut out, edit)?;
        inverse.push(Edit { path: edit.path.clone(), replacement: old });
    }
    inverse.reverse();
    Ok((out, inverse))
}

/// [`apply_edits`] followed by a type check of the result.
pub fn apply_edits_checked(
    program: &Program,
    edits: &[Edit],
    schema: &AttributeSchema,
    context: Context,
) -> Result<Program, EditError> {
    let out = apply_edits(program, edits)?;
    let diags = typecheck_program(&out, schema, context);
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(EditError::IllTyped(diags))
    }
}
