//! Static checks for programs and tests against an attribute schema.

use serde::{Deserialize, Serialize};

use super::{AstPath, AttributeSchema, BehaviorStmt, Expr, Literal, Program, TestStmt, Ty};
use crate::diagnostic::{DiagCode, Diagnostic, Location};

/// Which kind of level code runs in. Also the level kind in level files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    Base,
    Loop,
}

struct Checker<'a> {
    schema: &'a AttributeSchema,
    root: &'static str,
    diags: Vec<Diagnostic>,
}

/// Where a block of code sits, for placement rules.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Site {
    Init,
    OnTile,
    Recipe,
    BaseTest,
    LoopTest,
}

impl Site {
    fn allows_tile(self) -> bool {
        matches!(self, Site::OnTile | Site::BaseTest)
    }

    fn allows_loop_blocks(self) -> bool {
        self == Site::Recipe
    }
}

impl<'a> Checker<'a> {
    fn new(schema: &'a AttributeSchema, root: &'static str) -> Self {
        Checker { schema, root, diags: Vec::new() }
    }

    fn error(&mut self, code: DiagCode, path: &AstPath, message: String) {
        self.diags.push(Diagnostic::error(
            code,
            Location::Ast { root: self.root.to_string(), path: path.clone() },
            message,
        ));
    }

    fn expr(&mut self, e: &Expr, path: &AstPath, site: Site) -> Option<Ty> {
        match e {
            Expr::Lit { value } => Some(value.ty()),
            Expr::Attr { name } => {
                let ty = self.schema.attr_type(name);
                if ty.is_none() {
                    self.error(DiagCode::UnknownAttribute, path, format!("unknown attribute `{name}`"));
                }
                ty
            }
            Expr::TileIs { terrain } => {
                if !site.allows_tile() {
                    self.error(
                        DiagCode::ContextViolation,
                        path,
                        format!("`tile is {terrain}` is only available in per-tile code and portal tests"),
                    );
                }
                Some(Ty::Bool)
            }
            Expr::Eq { lhs, rhs } => {
                self.comparison(lhs, rhs, path, site);
                Some(Ty::Bool)
            }
        }
    }

    fn comparison(&mut self, lhs: &Expr, rhs: &Expr, path: &AstPath, site: Site) {
        let l = self.expr(lhs, &path.child(0), site);
        let r = self.expr(rhs, &path.child(1), site);
        if let (Some(l), Some(r)) = (l, r) {
            if l != r || l == Ty::Bool {
                self.error(DiagCode::TypeMismatch, path, format!("cannot compare {l} with {r}"));
            }
        }
    }

    fn cond(&mut self, e: &Expr, path: &AstPath, site: Site) {
        if let Some(ty) = self.expr(e, path, site) {
            if ty != Ty::Bool {
                self.error(DiagCode::TypeMismatch, path, format!("condition expected, found {ty}"));
            }
        }
    }

    fn behavior_block(&mut self, stmts: &[BehaviorStmt], path: &AstPath, site: Site) {
        for (i, stmt) in stmts.iter().enumerate() {
            self.behavior(stmt, &path.child(i), site);
        }
    }

    fn behavior(&mut self, stmt: &BehaviorStmt, path: &AstPath, site: Site) {
        match stmt {
            BehaviorStmt::SetAttr { name, value } => {
                let value_ty = self.expr(value, &path.child(0), site);
                let Some(target_ty) = self.schema.attr_type(name) else {
                    self.error(DiagCode::UnknownAttribute, path, format!("unknown attribute `{name}`"));
                    return;
                };
                if self.schema.is_engine_managed(name) {
                    self.error(DiagCode::EngineAttribute, path, format!("`{name}` is managed by the game"));
                }
                match value_ty {
                    Some(v) if v != target_ty => self.error(
                        DiagCode::TypeMismatch,
                        path,
                        format!("cannot store a {v} in {target_ty} attribute `{name}`"),
                    ),
                    Some(Ty::Color) => self.palette_check(name, value, path),
                    _ => {}
                }
            }
            BehaviorStmt::Collect { berry, .. } => {
                if !site.allows_loop_blocks() {
                    self.error(DiagCode::ContextViolation, path, "collect blocks only appear in recipes".into());
                }
                if self.schema.berry_counter(berry).is_none() {
                    self.error(DiagCode::UnknownBerry, path, format!("no counter collects `{berry}` berries"));
                }
            }
            BehaviorStmt::If { cond, then, otherwise } => {
                self.cond(cond, &path.child(0), site);
                self.behavior_block(then, &path.child(1), site);
                self.behavior_block(otherwise, &path.child(2), site);
            }
            BehaviorStmt::Repeat { times, body } => {
                if !site.allows_loop_blocks() {
                    self.error(DiagCode::ContextViolation, path, "repeat blocks only appear in recipes".into());
                }
                if *times == 0 {
                    self.error(DiagCode::ZeroRepeat, path, "repeat count must be at least 1".into());
                }
                self.behavior_block(body, &path.child(0), site);
            }
        }
    }

    fn palette_check(&mut self, target: &str, value: &Expr, path: &AstPath) {
        let Some(palette) = self.schema.palette(target) else { return };
        let ok = match value {
            Expr::Lit { value: Literal::Color(c) } => palette.contains(c),
            Expr::Attr { name } => self
                .schema
                .palette(name)
                .is_some_and(|src| src.iter().all(|c| palette.contains(c))),
            _ => true,
        };
        if !ok {
            self.error(
                DiagCode::PaletteViolation,
                path,
                format!("value may fall outside the palette of `{target}`"),
            );
        }
    }

    fn test_block(&mut self, stmts: &[TestStmt], path: &AstPath, site: Site) {
        for (i, stmt) in stmts.iter().enumerate() {
            let here = path.child(i);
            match stmt {
                TestStmt::AssertEq { lhs, rhs } => self.comparison(lhs, rhs, &here, site),
                TestStmt::If { cond, then, otherwise } => {
                    self.cond(cond, &here.child(0), site);
                    self.test_block(then, &here.child(1), site);
                    self.test_block(otherwise, &here.child(2), site);
                }
            }
        }
    }
}

/// Checks a behavior program. An empty result means the program is legal
/// for `context` and never raises a type or attribute error at run time.
pub fn typecheck_program(program: &Program, schema: &AttributeSchema, context: Context) -> Vec<Diagnostic> {
    let mut checker = Checker::new(schema, "program");
    let root = AstPath::root();
    match (program, context) {
        (Program::Critter { init, on_tile }, Context::Base) => {
            checker.behavior_block(init, &root.child(0), Site::Init);
            checker.behavior_block(on_tile, &root.child(1), Site::OnTile);
        }
        (Program::Recipe { body }, Context::Loop) => {
            if program.recipe_loop().is_none() {
                checker.error(
                    DiagCode::RecipeShape,
                    &root.child(0),
                    "a recipe must consist of exactly one repeat block".into(),
                );
            }
            checker.behavior_block(body, &root.child(0), Site::Recipe);
        }
        (Program::Critter { .. }, Context::Loop) => {
            checker.error(DiagCode::ProgramKind, &root, "loop levels run recipes, not critter code".into())
        }
        (Program::Recipe { .. }, Context::Base) => {
            checker.error(DiagCode::ProgramKind, &root, "base levels run critter code, not recipes".into())
        }
    }
    checker.diags
}

/// Checks portal (`Base`) or signpost (`Loop`) test code.
pub fn typecheck_test(test: &[TestStmt], schema: &AttributeSchema, context: Context) -> Vec<Diagnostic> {
    let mut checker = Checker::new(schema, "test");
    let site = match context {
        Context::Base => Site::BaseTest,
        Context::Loop => Site::LoopTest,
    };
    checker.test_block(test, &AstPath::root(), site);
    checker.diags
}
