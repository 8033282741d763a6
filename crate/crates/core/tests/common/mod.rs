#![allow(dead_code)]

use std::path::PathBuf;

use critters_core::blocklang::{parse_ast, Color, Expr, TestStmt};
use critters_core::engine::{PortalPlacement, Setup};
use critters_core::levels::{builtin_level, Level, Pos};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn test_fixture(name: &str) -> Vec<TestStmt> {
    parse_ast(&fixture(name)).unwrap()
}

pub fn level(id: &str) -> &'static Level {
    builtin_level(id).unwrap_or_else(|| panic!("no level {id}"))
}

pub fn shirt_is(c: Color) -> Vec<TestStmt> {
    vec![TestStmt::assert_eq(Expr::attr("shirt"), Expr::color(c))]
}

/// First dirt tile of base-01.
pub const FIRST_DIRT: Pos = Pos::new(6, 2);
/// A grass tile before the dirt on base-01.
pub const BEFORE_DIRT: Pos = Pos::new(3, 2);

pub fn orange_portal() -> PortalPlacement {
    PortalPlacement { tile: FIRST_DIRT, test: shirt_is(Color::Orange) }
}

pub fn red_portal() -> PortalPlacement {
    PortalPlacement { tile: BEFORE_DIRT, test: shirt_is(Color::Red) }
}

pub fn signpost(name: &str) -> Setup {
    Setup::signpost(test_fixture(name))
}
