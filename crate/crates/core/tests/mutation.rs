mod common;

use std::collections::BTreeSet;

use common::{level, orange_portal, red_portal, signpost};
use critters_core::blocklang::{emit_ast, parse_ast, AstPath, BehaviorStmt, Context, Expr, Program, typecheck_program};
use critters_core::engine::{simulate, LoopOutcome, RunResult, Setup, TimeBonusConfig};
use critters_core::mutation::{
    adequacy, apply_edits, apply_edits_with_inverse, first_divergence, generate_mutants, killable_mutants,
    node_at, solve_min_test, Divergence, Edit, EditError, MutantSpec, Node, NodeRef, Operator, SolveBounds,
    SolveError, DEFAULT_SOLVE_BUDGET,
};

fn recipe(body: Vec<BehaviorStmt>) -> Program {
    Program::Recipe { body: vec![BehaviorStmt::repeat(3, body)] }
}

fn collector_outcomes(level_id: &str, setup: &Setup, seed: u64) -> Vec<(Option<String>, LoopOutcome)> {
    let run = simulate(level(level_id), setup, seed).unwrap();
    let RunResult::Loop(r) = run.result else { panic!("loop level expected") };
    r.collectors.into_iter().map(|c| (c.origin.mutant_id().map(str::to_string), c.outcome)).collect()
}

#[test]
fn edit_replaces_collected_amount() {
    let p = recipe(vec![BehaviorStmt::collect("red", 1)]);
    let edit = Edit::new(vec![0, 0, 0, 0], Node::Stmt(BehaviorStmt::collect("red", 2)));
    assert_eq!(apply_edits(&p, &[edit]).unwrap(), recipe(vec![BehaviorStmt::collect("red", 2)]));
}

#[test]
fn edits_apply_in_order() {
    let p = recipe(vec![BehaviorStmt::collect("red", 1)]);
    let edits = [
        Edit::new(vec![0, 0, 0, 0], Node::Stmt(BehaviorStmt::collect("red", 2))),
        Edit::new(vec![0, 0, 0], Node::Block(vec![])),
    ];
    assert_eq!(apply_edits(&p, &edits).unwrap(), recipe(vec![]));
    assert!(matches!(apply_edits(&p, &[edits[1].clone(), edits[0].clone()]), Err(EditError::BadPath(_))));
}

#[test]
fn edit_errors() {
    let p = recipe(vec![BehaviorStmt::collect("red", 1)]);
    let bad = Edit::new(vec![0, 4], Node::Block(vec![]));
    assert_eq!(apply_edits(&p, &[bad]), Err(EditError::BadPath(AstPath(vec![0, 4]))));
    let wrong = Edit::new(vec![0, 0, 0, 0], Node::Expr(Expr::count(1)));
    assert!(matches!(apply_edits(&p, &[wrong]), Err(EditError::IllTypedReplacement { .. })));
}

#[test]
fn inverse_edits_restore_the_program() {
    for l in critters_core::levels::builtin_catalog() {
        for m in &l.mutants {
            let (mutant, inverse) = apply_edits_with_inverse(&l.program, &m.edits).unwrap();
            assert_ne!(mutant, l.program, "{}/{}", l.id, m.id);
            assert_eq!(apply_edits(&mutant, &inverse).unwrap(), l.program, "{}/{}", l.id, m.id);
        }
    }
}

#[test]
fn edit_json_shape() {
    let edit = Edit::new(vec![1, 0, 1], Node::Block(vec![]));
    let text = emit_ast(&edit);
    assert_eq!(text, r#"{"path":[1,0,1],"replacement":{"body":[],"kind":"block"}}"#);
    assert_eq!(parse_ast::<Edit>(&text).unwrap(), edit);
}

#[test]
fn node_lookup_follows_child_numbering() {
    let l = level("loop-10");
    assert!(matches!(node_at(&l.program, &AstPath(vec![0, 0])), Some(NodeRef::Stmt(BehaviorStmt::Repeat { times: 2, .. }))));
    assert!(matches!(
        node_at(&l.program, &AstPath(vec![0, 0, 0, 1])),
        Some(NodeRef::Stmt(BehaviorStmt::Collect { count: 1, .. }))
    ));
    assert!(node_at(&l.program, &AstPath(vec![0, 0, 0, 2])).is_none());
}

#[test]
fn generated_loop_01_mutants() {
    let l = level("loop-01");
    let cat = generate_mutants(&l.program, &l.schema, &Operator::ALL, 100);
    let programs: Vec<_> = cat.mutants.iter().map(|m| apply_edits(&l.program, &m.edits).unwrap()).collect();
    // 0 and 2 red berries, 2 and 4 laps, and the empty lap
    assert_eq!(cat.len(), 5);
    assert!(programs.contains(&recipe(vec![BehaviorStmt::collect("red", 0)])));
    assert!(programs.contains(&recipe(vec![BehaviorStmt::collect("red", 2)])));
    assert!(programs.contains(&recipe(vec![])));
    assert!(programs.contains(&Program::Recipe {
        body: vec![BehaviorStmt::repeat(4, vec![BehaviorStmt::collect("red", 1)])]
    }));
    assert_eq!(cat.mutants[0].hint, "loop-bound at /0/0: repeats 2 times instead of 3");
}

#[test]
fn generated_mutants_typecheck_and_respect_limit() {
    for l in critters_core::levels::builtin_catalog() {
        let cat = generate_mutants(&l.program, &l.schema, &Operator::ALL, 1000);
        assert!(!cat.is_empty());
        let mut seen = BTreeSet::new();
        for m in &cat.mutants {
            let p = apply_edits(&l.program, &m.edits).unwrap();
            assert!(typecheck_program(&p, &l.schema, l.kind).is_empty(), "{}", m.hint);
            assert!(seen.insert(emit_ast(&p)));
        }
        let limited = generate_mutants(&l.program, &l.schema, &Operator::ALL, 3);
        assert_eq!(limited.mutants, cat.mutants[..3.min(cat.len())]);
    }
}

#[test]
fn only_requested_operators_are_used() {
    let l = level("base-01");
    let cat = generate_mutants(&l.program, &l.schema, &[Operator::BranchSwap], 100);
    assert_eq!(cat.len(), 1);
    assert!(cat.mutants[0].hint.starts_with("branch-swap at /1/0:"));
}

#[test]
fn catalog_json_round_trips() {
    let l = level("loop-01");
    let cat = generate_mutants(&l.program, &l.schema, &Operator::ALL, 100);
    let specs: Vec<MutantSpec> = serde_json::from_value(serde_json::from_str::<serde_json::Value>(&cat.to_json()).unwrap()["mutants"].clone()).unwrap();
    assert_eq!(specs, cat.mutants);
}

#[test]
fn divergences_of_builtin_mutants() {
    let expect: &[(&str, &str, Divergence)] = &[
        ("base-01", "dirt-pink", Divergence::Tile(6)),
        ("base-01", "born-blue", Divergence::Tile(0)),
        ("base-01", "swapped-branches", Divergence::Tile(1)),
        ("loop-01", "two-red", Divergence::Round(1)),
        ("loop-01", "greedy-second-round", Divergence::Round(2)),
        ("loop-01", "lazy-third-round", Divergence::Round(3)),
        ("loop-02", "red-picks-pink", Divergence::Round(1)),
        ("loop-10", "greedy-second-round", Divergence::Round(2)),
    ];
    for (level_id, mutant, at) in expect {
        let l = level(level_id);
        assert_eq!(first_divergence(l, l.mutant(mutant).unwrap()).unwrap(), Some(*at), "{level_id}/{mutant}");
    }
}

#[test]
fn extra_lap_diverges_after_the_last_shared_lap() {
    let l = level("loop-01");
    let m = MutantSpec {
        id: "four-laps".into(),
        edits: vec![Edit::new(vec![0, 0], Node::Stmt(BehaviorStmt::repeat(4, vec![BehaviorStmt::collect("red", 1)])))],
        hint: String::new(),
    };
    assert_eq!(first_divergence(l, &m).unwrap(), Some(Divergence::Round(4)));
}

#[test]
fn divergence_json() {
    assert_eq!(emit_ast(&Divergence::Round(2)), r#"{"round":2}"#);
    assert_eq!(emit_ast(&Divergence::Tile(6)), r#"{"tileIndex":6}"#);
}

#[test]
fn short_test_is_adequate() {
    let l = level("loop-01");
    let report = adequacy(l, &signpost("loop01-short-test.json"), &l.mutants).unwrap();
    assert!(report.is_adequate());
    assert_eq!(report.mutation_score, 1.0);
    let at: Vec<_> = report.mutants.iter().map(|m| m.kill_position).collect();
    assert_eq!(
        at,
        vec![
            Some(Divergence::Round(1)),
            Some(Divergence::Round(1)),
            Some(Divergence::Round(2)),
            Some(Divergence::Round(3))
        ]
    );
}

#[test]
fn empty_test_kills_nothing() {
    let l = level("loop-01");
    let report = adequacy(l, &Setup::default(), &l.mutants).unwrap();
    assert_eq!(report.killed(), 0);
    assert_eq!(report.mutation_score, 0.0);
    assert_eq!(report.false_positives, 0);
}

#[test]
fn rounds_four_has_false_positives() {
    let l = level("loop-01");
    let report = adequacy(l, &signpost("loop01-rounds-four.json"), &l.mutants).unwrap();
    assert_eq!(report.mutation_score, 1.0);
    assert_eq!(report.false_positives, 6);
    assert!(!report.is_adequate());
}

#[test]
fn orange_portal_kills_the_dirt_mutants() {
    let l = level("base-01");
    let report = adequacy(l, &Setup::portals(vec![orange_portal()]), &l.mutants).unwrap();
    assert_eq!(report.killed(), 8);
    let both = adequacy(l, &Setup::portals(vec![red_portal(), orange_portal()]), &l.mutants).unwrap();
    assert!(both.is_adequate());
}

#[test]
fn solver_finds_the_short_test_for_loop_01() {
    let setup = solve_min_test(level("loop-01"), SolveBounds::new(1, 0), DEFAULT_SOLVE_BUDGET).unwrap().unwrap();
    assert_eq!(setup, signpost("loop01-short-test.json"));
}

#[test]
fn solver_output_on_loop_02_matches_the_shirt_test() {
    let l = level("loop-02");
    let solved = solve_min_test(l, SolveBounds::default(), DEFAULT_SOLVE_BUDGET).unwrap().unwrap();
    let fixture = signpost("loop02-shirt-test.json");
    for seed in 0..3 {
        assert_eq!(collector_outcomes("loop-02", &solved, seed), collector_outcomes("loop-02", &fixture, seed));
    }
    assert_eq!(simulate(l, &solved, 0).unwrap().score(0.0, &TimeBonusConfig::default()).total, 1000);
}

#[test]
fn solver_outputs_are_adequate_and_minimal() {
    for l in critters_core::levels::builtin_catalog() {
        let bounds = SolveBounds::default();
        let setup = solve_min_test(l, bounds, DEFAULT_SOLVE_BUDGET).unwrap().unwrap_or_else(|| panic!("{}", l.id));
        assert!(adequacy(l, &setup, &l.mutants).unwrap().is_adequate(), "{}", l.id);
        let size: usize = setup
            .portals
            .iter()
            .map(|p| critters_core::blocklang::assertion_count(&p.test))
            .chain(setup.signposts.iter().map(|s| critters_core::blocklang::assertion_count(&s.test)))
            .sum();
        assert!(size <= bounds.max_assertions);
        if size > 1 {
            assert_eq!(solve_min_test(l, SolveBounds::new(size - 1, bounds.max_if_depth), DEFAULT_SOLVE_BUDGET).unwrap(), None);
        }
    }
}

#[test]
fn base_01_needs_two_portals() {
    let l = level("base-01");
    let setup = solve_min_test(l, SolveBounds::new(2, 0), DEFAULT_SOLVE_BUDGET).unwrap().unwrap();
    assert_eq!(setup.portals.len(), 2);
    assert_eq!(solve_min_test(l, SolveBounds::new(1, 1), DEFAULT_SOLVE_BUDGET).unwrap(), None);
}

#[test]
fn no_test_separates_an_equivalent_mutant() {
    let mut l = level("loop-01").clone();
    // collecting in two halves of zero and one leaves the same counts every lap
    l.mutants = vec![MutantSpec {
        id: "split".into(),
        edits: vec![Edit::new(
            vec![0, 0, 0],
            Node::Block(vec![BehaviorStmt::collect("red", 0), BehaviorStmt::collect("red", 1)]),
        )],
        hint: String::new(),
    }];
    l.roster.mutants.clear();
    assert_eq!(solve_min_test(&l, SolveBounds::default(), DEFAULT_SOLVE_BUDGET).unwrap(), None);
    assert!(killable_mutants(&l, SolveBounds::default(), DEFAULT_SOLVE_BUDGET).unwrap().is_empty());
}

#[test]
fn every_builtin_mutant_is_killable() {
    for l in critters_core::levels::builtin_catalog() {
        let killable = killable_mutants(l, SolveBounds::default(), DEFAULT_SOLVE_BUDGET).unwrap();
        let all: BTreeSet<String> = l.mutants.iter().map(|m| m.id.clone()).collect();
        assert_eq!(killable, all, "{}", l.id);
    }
}

#[test]
fn tiny_budget_is_reported() {
    assert_eq!(
        solve_min_test(level("base-01"), SolveBounds::default(), 10),
        Err(SolveError::BudgetExceeded(10))
    );
}

#[test]
fn solved_tests_respect_the_level_context() {
    for l in critters_core::levels::builtin_catalog() {
        let setup = solve_min_test(l, SolveBounds::default(), DEFAULT_SOLVE_BUDGET).unwrap().unwrap();
        let tests = setup.portals.iter().map(|p| &p.test).chain(setup.signposts.iter().map(|s| &s.test));
        for t in tests {
            assert!(critters_core::blocklang::typecheck_test(t, &l.schema, l.kind).is_empty());
        }
        if l.kind == Context::Loop {
            assert!(setup.portals.is_empty());
        }
    }
}
