mod common;

use common::{build_lp as build, certificate, vertex_enumeration};
use proptest::prelude::*;
use stochpath_core::lp::{solve_lp, LpState, LpStatus};
use stochpath_core::model::{Row, Sense};

#[test]
fn beale_example_terminates() {
    // classic cycling instance under the textbook largest-coefficient rule
    let c = [-0.75, 20.0, -0.5, 6.0];
    let inf = f64::INFINITY;
    let rows = vec![
        (vec![(0, 0.25), (1, -8.0), (2, -1.0), (3, 9.0)], Sense::Le, 0.0),
        (vec![(0, 0.5), (1, -12.0), (2, -0.5), (3, 3.0)], Sense::Le, 0.0),
        (vec![(2, 1.0)], Sense::Le, 1.0),
    ];
    let m = build(&c, &[(0.0, inf); 4], &rows);
    let s = solve_lp(&m, None);
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective + 1.25).abs() < 1e-9, "{}", s.objective);
}

#[test]
fn infeasible_row_addition_detected() {
    let m = build(&[1.0, 1.0], &[(0.0, 1.0); 2], &[(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 1.0)]);
    let mut st = LpState::new(&m);
    assert!(st.solve(None).is_optimal());
    let bad = Row::new("bad", vec![(0, 1.0), (1, 1.0)], Sense::Le, 0.5);
    assert_eq!(st.add_rows_and_reoptimize(&[bad]).status, LpStatus::Infeasible);
}

#[test]
fn satisfied_row_keeps_objective() {
    let m = build(&[-1.0, -2.0], &[(0.0, 3.0); 2], &[(vec![(0, 1.0), (1, 1.0)], Sense::Le, 4.0)]);
    let mut st = LpState::new(&m);
    let before = st.solve(None).objective;
    let slack = Row::new("slack", vec![(0, 1.0)], Sense::Le, 10.0);
    assert_eq!(st.add_rows_and_reoptimize(&[slack]).objective, before);
}

fn dense_system() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(prop::collection::vec(-5i32..=5, 5), 3),
        prop::collection::vec(0u32..4, 5),
        prop::collection::vec(1i32..=9, 5),
    )
        .prop_map(|(a, x0, c)| {
            let a: Vec<Vec<f64>> = a.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
            let b = a.iter().map(|r| r.iter().zip(&x0).map(|(v, &x)| v * f64::from(x)).sum()).collect();
            (a, b, c.into_iter().map(f64::from).collect())
        })
}

fn random_box_lp() -> impl Strategy<Value = (Vec<f64>, Vec<(Vec<(usize, f64)>, Sense, f64)>, Vec<Vec<(usize, f64)>>)> {
    let n = 8usize;
    let row = prop::collection::vec((0..n, -3i32..=3), 1..6)
        .prop_map(|v| v.into_iter().map(|(j, a)| (j, f64::from(a))).collect::<Vec<_>>());
    (
        prop::collection::vec(-9i32..=9, n),
        prop::collection::vec((row.clone(), 0u8..3, -4i32..=6), 1..6),
        prop::collection::vec(row, 1..8),
    )
        .prop_map(|(c, rows, cuts)| {
            let rows = rows
                .into_iter()
                .map(|(coefs, s, rhs)| {
                    let sense = [Sense::Le, Sense::Ge, Sense::Eq][s as usize];
                    (coefs, sense, f64::from(rhs) / 2.0)
                })
                .collect();
            (c.into_iter().map(f64::from).collect(), rows, cuts)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_vertex_enumeration((a, b, c) in dense_system()) {
        let rows: Vec<_> = a.iter().zip(&b)
            .map(|(r, &rhs)| (r.iter().copied().enumerate().collect(), Sense::Eq, rhs))
            .collect();
        let m = build(&c, &[(0.0, f64::INFINITY); 5], &rows);
        let s = solve_lp(&m, None);
        // x0 is feasible by construction and c > 0, so an optimum exists
        prop_assert_eq!(s.status, LpStatus::Optimal);
        let best = vertex_enumeration(&a, &b, &c).expect("feasible system has a vertex");
        prop_assert!((s.objective - best).abs() <= 1e-7 * best.abs().max(1.0), "{} vs {}", s.objective, best);
        let (res, dinf, gap) = certificate(&m, &s);
        prop_assert!(res <= 1e-7 && dinf <= 1e-7 && gap <= 1e-6 * s.objective.abs().max(1.0));
    }

    #[test]
    fn warm_reoptimization_matches_cold((c, rows, cuts) in random_box_lp(), rhs_seed in prop::collection::vec(-2i32..=3, 8)) {
        let m = build(&c, &[(0.0, 1.0); 8], &rows);
        let mut st = LpState::new(&m);
        let mut sol = st.solve(None);
        let mut ext = m.clone();
        for (i, coefs) in cuts.iter().enumerate() {
            if sol.status != LpStatus::Optimal {
                break;
            }
            let cut = Row::new(format!("cut{i}"), coefs.clone(), Sense::Ge, f64::from(rhs_seed[i]) / 2.0);
            ext.add_row(cut.clone());
            let prev = sol.objective;
            sol = st.add_rows_and_reoptimize(&[cut]);
            let cold = solve_lp(&ext, None);
            prop_assert_eq!(sol.status, cold.status);
            if sol.status == LpStatus::Optimal {
                prop_assert!(sol.objective >= prev - 1e-9);
                prop_assert!((sol.objective - cold.objective).abs() <= 1e-6 * cold.objective.abs().max(1.0));
                let (res, dinf, gap) = certificate(&ext, &sol);
                prop_assert!(res <= 1e-7, "residual {res}");
                prop_assert!(dinf <= 1e-7, "dual infeasibility {dinf}");
                prop_assert!(gap <= 1e-6 * sol.objective.abs().max(1.0), "gap {gap}");
            }
        }
    }

    #[test]
    fn bound_fixing_matches_cold((c, rows, _) in random_box_lp(), fix in prop::collection::vec((0usize..8, any::<bool>()), 1..5)) {
        let m = build(&c, &[(0.0, 1.0); 8], &rows);
        let mut st = LpState::new(&m);
        let root = st.solve(None);
        prop_assume!(root.status == LpStatus::Optimal);
        let mut fixed = m.clone();
        for &(j, up) in &fix {
            let v = if up { 1.0 } else { 0.0 };
            st.set_column_bounds(j, v, v);
            fixed.columns[j].lower = v;
            fixed.columns[j].upper = v;
        }
        let warm = st.solve(Some(&root.basis));
        let cold = solve_lp(&fixed, None);
        prop_assert_eq!(warm.status, cold.status);
        if warm.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() <= 1e-6 * cold.objective.abs().max(1.0));
            prop_assert!(warm.objective >= root.objective - 1e-9);
        }
    }
}
