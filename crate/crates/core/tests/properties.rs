use hjb_lab::bench::compute_errors;
use hjb_lab::schemes::{evaluate_control, local_update, local_value};
use hjb_lab::solvers::{prepared_grid, solve, Marcher, Step};
use hjb_lab::verify::is_safe;
use hjb_lab::{
    Bounds, Catalog, ControlSet, Grid, Method, NodeState, Params, Problem, ReferenceSolution, Scheme, SolverConfig,
    BIG,
};
use proptest::prelude::*;

fn catalog() -> impl Strategy<Value = Catalog> {
    prop::sample::select(Catalog::ALL.to_vec())
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop::sample::select(vec![Scheme::Sl2p, Scheme::Sl3p])
}

fn params() -> impl Strategy<Value = Params> {
    (1.0f64..12.0, 1.0f64..12.0, 0.0f64..0.1).prop_map(|(lambda, mu, eps)| Params { lambda, mu, eps })
}

/// Odd sizes keep the origin on a node.
fn odd_grid(lo: usize, hi: usize) -> impl Strategy<Value = usize> {
    (lo / 2..hi / 2).prop_map(|h| 2 * h + 1)
}

/// Random 3x3 patch: neighbour values in [0, 3), some unreached.
fn patch(cx: f64, cy: f64, vals: [f64; 8], unreached: [bool; 8]) -> Grid {
    let h = 0.05;
    let mut g = Grid::new(Bounds::new(cx - h, cx + h, cy - h, cy + h), 3).unwrap();
    let mut slot = 0;
    for k in 0..9 {
        if k == 4 {
            continue;
        }
        if unreached[slot] {
            g.values[k] = BIG;
            g.states[k] = NodeState::Far;
        } else {
            g.values[k] = vals[slot];
            g.states[k] = NodeState::Acc;
        }
        slot += 1;
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn iso_reg_methods_agree_at_any_size(n in odd_grid(5, 61), s in scheme()) {
        let p = Problem::catalog(Catalog::A, Params::default());
        let mut base = prepared_grid(&p, n).unwrap();
        solve(&mut base, &p, &SolverConfig::new(Method::Itm, s)).unwrap();
        for m in [Method::Fsm, Method::Fmm, Method::Sm, Method::Sfmm] {
            let mut g = prepared_grid(&p, n).unwrap();
            let r = solve(&mut g, &p, &SolverConfig::new(m, s)).unwrap();
            prop_assert!(!r.stalled);
            for k in 0..g.len() {
                prop_assert!((g.values[k] - base.values[k]).abs() <= 1e-12, "{} node {}", m, k);
            }
        }
    }

    #[test]
    fn marching_recomputes_each_node_at_most_eight_times(
        which in catalog(), prm in params(), n in odd_grid(5, 41), s in scheme(),
    ) {
        let p = Problem::catalog(which, prm);
        for m in [Method::Fmm, Method::Sm, Method::Sfmm] {
            let mut g = prepared_grid(&p, n).unwrap();
            let r = solve(&mut g, &p, &SolverConfig::new(m, s)).unwrap();
            prop_assert!(r.max_recomputes() <= 8);
        }
    }

    #[test]
    fn marching_states_only_move_forward_and_band_stays_thin(
        which in catalog(), prm in params(), n in odd_grid(5, 31),
    ) {
        let p = Problem::catalog(which, prm);
        let mut g = prepared_grid(&p, n).unwrap();
        let cfg = SolverConfig::new(Method::Fmm, Scheme::Sl3p);
        let mut m = Marcher::new(&mut g, &p, &cfg).unwrap();
        let mut prev = m.grid().states.clone();
        while let Step::Accepted(_) = m.step() {
            let grid = m.grid();
            for (k, &before) in prev.iter().enumerate() {
                let rank = |s: NodeState| match s { NodeState::Far => 0, NodeState::Cons => 1, NodeState::Acc => 2 };
                prop_assert!(rank(grid.states[k]) >= rank(before));
                if grid.states[k] == NodeState::Cons {
                    let touches_acc = grid
                        .stencil_neighbors(k)
                        .iter()
                        .flatten()
                        .any(|&j| grid.states[j] == NodeState::Acc);
                    prop_assert!(touches_acc, "CONS node {} detached from ACC", k);
                }
            }
            prev = grid.states.clone();
        }
    }

    #[test]
    fn itm_iterates_never_increase(which in catalog(), prm in params(), n in odd_grid(5, 21), k in 1usize..12) {
        let p = Problem::catalog(which, prm);
        let run = |iters: usize| {
            let mut g = prepared_grid(&p, n).unwrap();
            let mut cfg = SolverConfig::new(Method::Itm, Scheme::Sl3p);
            cfg.max_iter = Some(iters);
            solve(&mut g, &p, &cfg).unwrap();
            g.values
        };
        let (a, b) = (run(k), run(k + 1));
        prop_assert!(b.iter().zip(&a).all(|(x, y)| x <= y));
    }

    #[test]
    fn local_update_is_monotone(
        which in catalog(), s in scheme(),
        cx in -1.9f64..1.9, cy in -1.9f64..1.9,
        vals in prop::array::uniform8(0.0f64..3.0),
        unreached in prop::array::uniform8(prop::bool::weighted(0.2)),
        bump in prop::array::uniform8(0.0f64..0.5),
    ) {
        let p = Problem::catalog(which, Params::default());
        let cs = ControlSet::default();
        let g = patch(cx, cy, vals, unreached);
        let before = local_value(&g, &p, &cs, 4, s).map_or(f64::INFINITY, |v| v.0);
        let mut raised = vals;
        for (v, b) in raised.iter_mut().zip(bump) {
            *v += b;
        }
        let h = patch(cx, cy, raised, unreached);
        let after = local_value(&h, &p, &cs, 4, s).map_or(f64::INFINITY, |v| v.0);
        prop_assert!(after >= before);
    }

    #[test]
    fn weights_partition_unity_and_rebuild_value(
        which in catalog(), s in scheme(), cx in -1.9f64..1.9, cy in -1.9f64..1.9,
        vals in prop::array::uniform8(0.0f64..3.0), control in 0usize..64,
    ) {
        let p = Problem::catalog(which, Params::default());
        let cs = ControlSet::default();
        let g = patch(cx, cy, vals, [false; 8]);
        let u = evaluate_control(&g, &p, &cs, 4, control, s).expect("all neighbours reached");
        let sum: f64 = u.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(u.weights().iter().all(|&w| w >= 0.0));
        prop_assert!(!u.stencil().contains(&Some(4)));
        let interp: f64 = u.stencil().iter().zip(u.weights()).map(|(nb, w)| w * g.values[nb.unwrap()]).sum();
        prop_assert!((interp + u.travel - u.value).abs() <= 1e-12);
        let best = local_update(&g, &p, &cs, 4, s).unwrap();
        prop_assert!(best.value <= u.value);
    }

    #[test]
    fn safeness_mass_is_a_fraction(
        cx in -1.9f64..1.9, cy in -1.9f64..1.9, vals in prop::array::uniform8(0.0f64..3.0),
        cons in prop::array::uniform8(any::<bool>()), s in scheme(),
    ) {
        let p = Problem::catalog(Catalog::E, Params::default());
        let cs = ControlSet::default();
        let mut g = patch(cx, cy, vals, [false; 8]);
        let mut slot = 0;
        for k in 0..9 {
            if k != 4 {
                if cons[slot] {
                    g.states[k] = NodeState::Cons;
                }
                slot += 1;
            }
        }
        let u = local_update(&g, &p, &cs, 4, s).unwrap();
        let check = is_safe(&g, &u, 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&check.mass_on_acc));
        let any_cons = u.support().any(|(nb, _)| g.states[nb.unwrap()] == NodeState::Cons);
        prop_assert_eq!(check.safe, !any_cons || check.mass_on_acc >= 1.0 - 1e-9);
    }

    #[test]
    fn restricted_reference_has_zero_error(which in catalog(), factor in 1usize..4) {
        let p = Problem::catalog(which, Params::default());
        let coarse = 11;
        let fine = (coarse - 1) * factor + 1;
        let mut g = prepared_grid(&p, fine).unwrap();
        solve(&mut g, &p, &SolverConfig::new(Method::Fsm, Scheme::Sl3p)).unwrap();
        let r = ReferenceSolution::from_grid(&g, "fsm");
        let mut c = Grid::new(Bounds::default(), coarse).unwrap();
        c.values = r.restrict(&c).unwrap();
        let e = compute_errors(&c, &r).unwrap();
        prop_assert_eq!(e.einf, 0.0);
        prop_assert_eq!(e.e1, 0.0);
        prop_assert_eq!(e.excluded_nodes, 1);
    }
}
