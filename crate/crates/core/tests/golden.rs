mod common;

use common::fixture;
use critters_core::blocklang::{emit_ast, parse_ast, BehaviorStmt, Color, Expr, Program, TestStmt};
use critters_core::canonical::canonicalize;

fn rc() -> Expr {
    Expr::attr("roundsCount")
}

fn red() -> Expr {
    Expr::attr("redBerries")
}

fn assert_golden<T: serde::Serialize>(name: &str, value: &T) {
    assert_eq!(emit_ast(value), fixture(name).trim_end(), "{name}");
}

#[test]
fn short_loop_test_matches_golden_file() {
    assert_golden("loop01-short-test.json", &vec![TestStmt::assert_eq(red(), rc())]);
}

#[test]
fn long_loop_test_matches_golden_file() {
    let per_round = |n: u64| TestStmt::assert_eq(red(), Expr::count(n));
    let test = vec![TestStmt::if_else(
        Expr::eq(rc(), Expr::count(1)),
        vec![per_round(1)],
        vec![TestStmt::if_else(Expr::eq(rc(), Expr::count(2)), vec![per_round(2)], vec![per_round(3)])],
    )];
    assert_golden("loop01-long-test.json", &test);
}

#[test]
fn rounds_four_matches_golden_file() {
    assert_golden("loop01-rounds-four.json", &vec![TestStmt::assert_eq(rc(), Expr::count(4))]);
}

#[test]
fn three_assertions_match_golden_file() {
    let test: Vec<_> = (1..=3).map(|n| TestStmt::assert_eq(red(), Expr::count(n))).collect();
    assert_golden("loop01-three-assertions.json", &test);
}

#[test]
fn shirt_test_matches_golden_file() {
    let test = vec![TestStmt::if_else(
        Expr::eq(Expr::attr("shirt"), Expr::color(Color::Blue)),
        vec![TestStmt::assert_eq(Expr::attr("pinkBerries"), rc())],
        vec![TestStmt::assert_eq(red(), rc())],
    )];
    assert_golden("loop02-shirt-test.json", &test);
}

#[test]
fn recipe_matches_golden_file() {
    let recipe = Program::Recipe { body: vec![BehaviorStmt::repeat(3, vec![BehaviorStmt::collect("red", 1)])] };
    assert_golden("loop01-recipe.json", &recipe);
    assert_eq!(recipe, common::level("loop-01").program);
}

#[test]
fn golden_files_are_canonical_and_reparse() {
    for name in [
        "loop01-short-test.json",
        "loop01-long-test.json",
        "loop01-rounds-four.json",
        "loop01-three-assertions.json",
        "loop02-shirt-test.json",
        "base01-orange-portal.json",
    ] {
        let text = fixture(name);
        assert_eq!(canonicalize(&text).unwrap(), text.trim_end(), "{name}");
        let parsed: Vec<TestStmt> = parse_ast(&text).unwrap();
        assert_eq!(emit_ast(&parsed), text.trim_end());
    }
}
