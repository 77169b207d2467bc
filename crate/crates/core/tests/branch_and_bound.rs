mod common;

use std::time::Duration;

use optlab::bnb::{enumerate_optimal, solve, Cut, NoCuts, SolveConfig, SolveError, SolveStatus};
use optlab::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarKind};
use optlab::puzzles::queens::{build_queens, QueensOptions};

#[test]
fn random_binary_programs_match_enumeration() {
    let mut rng = common::rng(31);
    let (mut infeasible, mut optimal) = (0, 0);
    for k in 0..200 {
        let model = common::random_binary_ilp(&mut rng, 12, 8);
        let oracle = common::binary_brute_force(&model);
        let sol = solve(&model, &SolveConfig::default(), None).unwrap();
        match oracle {
            None => {
                assert_eq!(sol.status, SolveStatus::Infeasible, "instance {k}");
                infeasible += 1;
            }
            Some(z) => {
                assert_eq!(sol.status, SolveStatus::Optimal, "instance {k}");
                assert!((sol.objective.unwrap() - z).abs() < 1e-6, "instance {k}: {:?} vs {z}", sol.objective);
                assert!(model.check_feasible(&sol.values, 1e-6).unwrap().feasible);
                optimal += 1;
            }
        }
    }
    assert!(infeasible > 20 && optimal > 20, "{infeasible} infeasible, {optimal} optimal");
}

#[test]
fn twelve_item_knapsack() {
    let weights = [23.0, 31.0, 29.0, 44.0, 53.0, 38.0, 63.0, 85.0, 89.0, 82.0, 19.0, 41.0];
    let values = [92.0, 57.0, 49.0, 68.0, 60.0, 43.0, 67.0, 84.0, 87.0, 72.0, 33.0, 50.0];
    let mut m = Model::new("knap");
    let x: Vec<_> = (0..12).map(|k| m.add_binary(format!("x{k}")).unwrap()).collect();
    m.add_constraint("cap", x.iter().zip(weights).map(|(&v, w)| (v, w)).collect(), Sense::Le, 165.0).unwrap();
    m.set_objective(ObjectiveSense::Maximize, x.iter().zip(values).map(|(&v, u)| (v, u)).collect()).unwrap();
    let sol = solve(&m, &SolveConfig::default(), None).unwrap();
    let oracle = common::knapsack_brute_force(&weights, &values, 165.0);
    assert_eq!(sol.objective, Some(oracle));
    assert!(sol.stats.nodes_explored >= 1 && sol.stats.lp_iterations_total > 0);
}

#[test]
fn general_integers_and_continuous() {
    // max 5x + 4y + z, 6x + 4y ≤ 24, x + 2y ≤ 6, z ≤ 1.5, x, y integer.
    let mut m = Model::new("mixed");
    let x = m.add_variable("x", 0.0, 10.0, VarKind::Integer).unwrap();
    let y = m.add_variable("y", 0.0, 10.0, VarKind::Integer).unwrap();
    let z = m.add_variable("z", 0.0, 1.5, VarKind::Continuous).unwrap();
    m.add_constraint("a", LinExpr::term(x, 6.0).with_term(y, 4.0), Sense::Le, 24.0).unwrap();
    m.add_constraint("b", LinExpr::term(x, 1.0).with_term(y, 2.0), Sense::Le, 6.0).unwrap();
    m.set_objective(ObjectiveSense::Maximize, LinExpr::term(x, 5.0).with_term(y, 4.0).with_term(z, 1.0)).unwrap();
    let sol = solve(&m, &SolveConfig::default(), None).unwrap();
    // Integer points: (4,0) → 20, (3,1) → 19, (2,2) → 18.
    assert!((sol.objective.unwrap() - 21.5).abs() < 1e-9);
    assert_eq!((sol.value(x), sol.value(y)), (4.0, 0.0));
}

#[test]
fn unbounded_relaxation_is_reported() {
    let mut m = Model::new("unb");
    let b = m.add_binary("b").unwrap();
    let x = m.add_variable("x", 0.0, f64::INFINITY, VarKind::Continuous).unwrap();
    m.set_objective(ObjectiveSense::Maximize, LinExpr::term(x, 1.0).with_term(b, 1.0)).unwrap();
    assert_eq!(solve(&m, &SolveConfig::default(), None).unwrap().status, SolveStatus::Unbounded);
}

#[test]
fn inert_handler_changes_nothing() {
    let mut rng = common::rng(32);
    for _ in 0..40 {
        let model = common::random_binary_ilp(&mut rng, 10, 6);
        let plain = solve(&model, &SolveConfig::default(), None).unwrap();
        let mut inert = NoCuts;
        let with = solve(&model, &SolveConfig::default(), Some(&mut inert)).unwrap();
        assert_eq!(plain.status, with.status);
        assert_eq!(plain.values, with.values);
        assert_eq!(plain.stats.nodes_explored, with.stats.nodes_explored);
        assert_eq!(with.stats.cuts_added, 0);
    }
}

#[test]
fn deterministic() {
    let q = build_queens(6, QueensOptions::default()).unwrap();
    let a = solve(&q.model, &SolveConfig::default(), None).unwrap();
    let b = solve(&q.model, &SolveConfig::default(), None).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.stats.nodes_explored, b.stats.nodes_explored);
    assert_eq!(a.stats.lp_iterations_total, b.stats.lp_iterations_total);
    assert_eq!(a.objective, Some(6.0));
}

#[test]
fn lazy_cuts_are_named_and_enforced() {
    // Two binaries; the handler forbids taking both.
    let mut m = Model::new("lazy");
    let x = m.add_binary("x").unwrap();
    let y = m.add_binary("y").unwrap();
    m.set_objective(ObjectiveSense::Maximize, LinExpr::term(x, 2.0).with_term(y, 1.0)).unwrap();
    let mut handler = |_: &Model, v: &[f64]| {
        if v[0] + v[1] > 1.5 {
            vec![Cut { expr: LinExpr::sum([x, y]), sense: Sense::Le, rhs: 1.0 }]
        } else {
            Vec::new()
        }
    };
    let sol = solve(&m, &SolveConfig::default(), Some(&mut handler)).unwrap();
    assert_eq!(sol.objective, Some(2.0));
    assert_eq!(sol.stats.cuts_added, 1);
    assert_eq!(sol.cuts[0].name, "lazy_1");
}

#[test]
fn limits() {
    let q = build_queens(8, QueensOptions::default()).unwrap();
    let sol = solve(&q.model, &SolveConfig::default().with_node_limit(1), None).unwrap();
    assert_eq!(sol.status, SolveStatus::LimitReached);
    assert!(sol.stats.nodes_explored <= 1);
    let sol = solve(&q.model, &SolveConfig::default().with_time_limit(Duration::ZERO), None).unwrap();
    assert_eq!(sol.status, SolveStatus::LimitReached);
}

#[test]
fn enumeration_counts_queens() {
    for (n, count) in [(4, 2), (5, 10), (6, 4)] {
        let q = build_queens(n, QueensOptions::default()).unwrap();
        let all = enumerate_optimal(&q.model, &SolveConfig::default(), usize::MAX).unwrap();
        assert!(all.complete);
        assert_eq!(all.solutions.len(), count);
        assert_eq!(common::queens_solutions(n).len(), count);
        let boards: Vec<_> = all.solutions.iter().map(|s| q.decode(s).queens).collect();
        assert!(common::distinct(&boards));
    }
    let q = build_queens(5, QueensOptions::default()).unwrap();
    let some = enumerate_optimal(&q.model, &SolveConfig::default(), 3).unwrap();
    assert_eq!(some.solutions.len(), 3);
    assert!(!some.complete);
}

#[test]
fn integers_need_finite_bounds() {
    let mut m = Model::new("int");
    m.add_variable("n", 0.0, f64::INFINITY, VarKind::Integer).unwrap();
    assert!(matches!(solve(&m, &SolveConfig::default(), None), Err(SolveError::UnboundedIntegerVariable(_))));
}

#[test]
fn enumeration_needs_binaries() {
    let mut m = Model::new("int");
    let x = m.add_variable("x", 0.0, 3.0, VarKind::Integer).unwrap();
    m.set_objective(ObjectiveSense::Maximize, LinExpr::term(x, 1.0)).unwrap();
    assert!(matches!(
        enumerate_optimal(&m, &SolveConfig::default(), 10),
        Err(SolveError::NotBinaryModel(name)) if name == "x"
    ));
}
