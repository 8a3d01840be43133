//! Verification tools for single-pass methods.
//!
//! A CONS node is *safe* when its optimal interpolation rests entirely on
//! ACC nodes, and *exact* when its value already matches the converged
//! fixed-point solution on the same grid. The two "dumb" methods accept
//! by these tests; when they stall, no local single-pass acceptance rule
//! can process the grid either.

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Bounds, Grid, NodeState, BIG};
use crate::problems::{ControlSet, Problem};
use crate::schemes::{local_update, LocalUpdate, Scheme};
use crate::solvers::{run_as, solve, Method, SolverConfig, SolverReport};

/// Converged fixed-point solution used as ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub n: usize,
    pub bounds: Bounds,
    pub field: Vec<f64>,
    /// Provenance, e.g. `FSM sl3p tol=1e-16 nc=64`.
    pub source: String,
}

impl ReferenceSolution {
    pub fn from_grid(grid: &Grid, source: impl Into<String>) -> Self {
        ReferenceSolution {
            n: grid.n(),
            bounds: grid.bounds(),
            field: grid.values.clone(),
            source: source.into(),
        }
    }

    /// Solves `problem` to `tol` on an `n x n` grid over `bounds`.
    ///
    /// `solver` must be ITM or FSM; both converge to the same discrete
    /// fixed point, FSM in far fewer visits.
    pub fn compute(
        problem: &Problem,
        bounds: Bounds,
        n: usize,
        scheme: Scheme,
        controls: &ControlSet,
        tol: f64,
        solver: Method,
    ) -> Result<Self> {
        if solver.is_single_pass() {
            return Err(Error::InvalidConfig(format!(
                "reference solver must be ITM or FSM, got {solver}"
            )));
        }
        let mut grid = Grid::new(bounds, n)?;
        grid.embed_target(&problem.target)?;
        let mut cfg = SolverConfig::new(solver, scheme).with_controls(controls.clone());
        cfg.tol = tol;
        let report = solve(&mut grid, problem, &cfg)?;
        if !report.converged {
            return Err(Error::InvalidConfig(format!(
                "reference {solver} run did not converge on {n}x{n}"
            )));
        }
        let source = format!("{solver} {scheme} tol={tol:e} nc={}", controls.len());
        Ok(ReferenceSolution::from_grid(&grid, source))
    }

    /// Index stride from `grid` nodes to reference nodes.
    pub fn check_nested(&self, grid: &Grid) -> Result<usize> {
        let not_nested = || Error::NotNested {
            reference: self.n,
            field: grid.n(),
        };
        if self.n < grid.n() || !(self.n - 1).is_multiple_of(grid.n() - 1) {
            return Err(not_nested());
        }
        let a = self.bounds;
        let b = grid.bounds();
        let tol = 1e-12 * (a.xmax - a.xmin).abs();
        let same = (a.xmin - b.xmin).abs() <= tol
            && (a.xmax - b.xmax).abs() <= tol
            && (a.ymin - b.ymin).abs() <= tol
            && (a.ymax - b.ymax).abs() <= tol;
        if !same {
            return Err(not_nested());
        }
        Ok((self.n - 1) / (grid.n() - 1))
    }

    /// Reference value at node `k` of a nested `grid`.
    #[inline]
    pub fn value_at(&self, grid: &Grid, k: usize) -> Option<f64> {
        let m = grid.n();
        if m < 2 || !(self.n - 1).is_multiple_of(m - 1) {
            return None;
        }
        let stride = (self.n - 1) / (m - 1);
        let (i, j) = grid.ij(k);
        self.field.get(j * stride * self.n + i * stride).copied()
    }

    /// Reference values at the nodes of `grid`.
    pub fn restrict(&self, grid: &Grid) -> Result<Vec<f64>> {
        let stride = self.check_nested(grid)?;
        Ok((0..grid.len())
            .map(|k| {
                let (i, j) = grid.ij(k);
                self.field[j * stride * self.n + i * stride]
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyCheck {
    pub safe: bool,
    /// Total interpolation weight resting on ACC nodes.
    pub mass_on_acc: f64,
    /// 1 where the stencil node is ACC.
    pub flags: Vec<u8>,
}

/// Safe-node test for the optimal update `u` of a CONS node.
pub fn is_safe(grid: &Grid, u: &LocalUpdate, sigma: f64) -> SafetyCheck {
    let flags: Vec<u8> = u
        .stencil()
        .iter()
        .map(|nb| match nb {
            Some(j) if grid.states[*j] == NodeState::Acc => 1,
            _ => 0,
        })
        .collect();
    let mass_on_acc: f64 = u
        .weights()
        .iter()
        .zip(&flags)
        .map(|(&w, &b)| w * b as f64)
        .sum();
    SafetyCheck {
        safe: mass_on_acc >= 1.0 - sigma,
        mass_on_acc,
        flags,
    }
}

/// Exact-node test: `|T(x_k) - T_ref(x_k)| <= tol_exact * max(1, |T_ref(x_k)|)`.
pub fn is_exact(grid: &Grid, k: usize, reference: &ReferenceSolution, tol_exact: f64) -> Result<bool> {
    reference.check_nested(grid)?;
    let r = reference.value_at(grid, k).expect("nested grids");
    Ok((grid.values[k] - r).abs() <= tol_exact * r.abs().max(1.0))
}

/// Safe Dumb Method: accepts the lowest-index node that is safe and exact.
pub fn solve_sdm(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    run_as(grid, problem, cfg, Method::Sdm)
}

/// Dumb Method: accepts the lowest-index exact node.
pub fn solve_dm(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    run_as(grid, problem, cfg, Method::Dm)
}

/// Optimal update recomputed from the current field at every reached,
/// non-target node.
pub fn current_updates(
    grid: &Grid,
    problem: &Problem,
    controls: &ControlSet,
    scheme: Scheme,
) -> Vec<Option<LocalUpdate>> {
    (0..grid.len())
        .map(|k| {
            let reached = grid.states[k] != NodeState::Far;
            let v = grid.values[k];
            if reached && v > 0.0 && v < BIG {
                local_update(grid, problem, controls, k, scheme)
            } else {
                None
            }
        })
        .collect()
}

/// Optimal velocity `f(x_k, a*)` at every reached non-target node.
pub fn extract_optimal_field(
    grid: &Grid,
    problem: &Problem,
    controls: &ControlSet,
    scheme: Scheme,
) -> Vec<Option<[f64; 2]>> {
    current_updates(grid, problem, controls, scheme)
        .into_iter()
        .map(|u| u.map(|u| u.velocity))
        .collect()
}

/// A closed dependency loop among CONS nodes: every member's optimal
/// stencil puts positive weight on another member.
///
/// Returns the members of the first strongly connected component with more
/// than one node, in ascending index order.
pub fn cons_dependency_cycle(grid: &Grid, updates: &[Option<LocalUpdate>]) -> Option<Vec<usize>> {
    let mut graph = DiGraphMap::<usize, ()>::new();
    for (k, u) in updates.iter().enumerate() {
        if grid.states[k] != NodeState::Cons {
            continue;
        }
        if let Some(u) = u {
            for (nb, _) in u.support() {
                if let Some(j) = nb {
                    if grid.states[j] == NodeState::Cons {
                        graph.add_edge(k, j, ());
                    }
                }
            }
        }
    }
    tarjan_scc(&graph)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .min_by_key(|c| c[0])
}

/// Per-node result of the ISO diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoNode {
    pub index: usize,
    /// Optimal velocity `f(x, a*)`.
    pub characteristic: [f64; 2],
    /// Upwind descent direction `-grad T`.
    pub descent: [f64; 2],
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoDiagnosis {
    pub nodes: Vec<IsoNode>,
    pub examined: usize,
    pub flagged: usize,
    pub iso: bool,
}

impl IsoDiagnosis {
    pub fn flagged_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(|n| n.flagged).map(|n| n.index)
    }
}

/// Closed quadrants of `a` and `b` share no point: some component has
/// strictly opposite signs.
fn different_simplex(a: [f64; 2], b: [f64; 2]) -> bool {
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    let tol = 1e-9;
    (0..2).any(|c| {
        let sa = a[c] / na;
        let sb = b[c] / nb;
        (sa > tol && sb < -tol) || (sa < -tol && sb > tol)
    })
}

/// Compares, at every interior non-target node, the characteristic
/// direction chosen by the scheme with the upwind descent direction of the
/// field. Nodes where they fall in different grid quadrants are flagged.
pub fn diagnose_iso(grid: &Grid, problem: &Problem, controls: &ControlSet, scheme: Scheme) -> IsoDiagnosis {
    let n = grid.n();
    let dx = grid.dx();
    let t = &grid.values;
    let mut nodes = Vec::new();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = grid.index(i, j);
            let v = t[k];
            if v <= 0.0 || v >= BIG {
                continue;
            }
            let Some(u) = local_update(grid, problem, controls, k, scheme) else {
                continue;
            };
            // smaller neighbour per axis; zero slope when both are larger
            let slope = |lo: f64, hi: f64| -> f64 {
                if lo <= hi {
                    if lo < v {
                        (v - lo) / dx
                    } else {
                        0.0
                    }
                } else if hi < v {
                    -(v - hi) / dx
                } else {
                    0.0
                }
            };
            let gx = slope(t[grid.index(i - 1, j)], t[grid.index(i + 1, j)]);
            let gy = slope(t[grid.index(i, j - 1)], t[grid.index(i, j + 1)]);
            let descent = [-gx, -gy];
            let flagged = (gx != 0.0 || gy != 0.0) && different_simplex(u.velocity, descent);
            nodes.push(IsoNode {
                index: k,
                characteristic: u.velocity,
                descent,
                flagged,
            });
        }
    }
    let flagged = nodes.iter().filter(|n| n.flagged).count();
    IsoDiagnosis {
        examined: nodes.len(),
        flagged,
        iso: flagged == 0,
        nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Catalog, Params};
    use crate::solvers::prepared_grid;

    fn update_with(grid: &Grid, weights: &[f64]) -> LocalUpdate {
        // evaluate a real update, then overwrite its weights for the test
        let p = Problem::catalog(Catalog::A, Params::default());
        let cs = ControlSet::default();
        let k = grid.index(2, 2);
        let scheme = if weights.len() == 3 { Scheme::Sl3p } else { Scheme::Sl2p };
        let mut u = local_update(grid, &p, &cs, k, scheme).unwrap();
        u.set_weights_for_test(weights);
        u
    }

    fn band_grid() -> Grid {
        let mut g = Grid::new(Bounds::centered(2.0), 5).unwrap();
        for k in 0..g.len() {
            g.values[k] = 1.0;
            g.states[k] = NodeState::Cons;
        }
        g
    }

    #[test]
    fn all_acc_stencil_is_safe() {
        let mut g = band_grid();
        let u = update_with(&g, &[0.3, 0.3, 0.4]);
        for nb in u.stencil().iter().flatten() {
            g.states[*nb] = NodeState::Acc;
        }
        let c = is_safe(&g, &u, 0.0);
        assert!(c.safe);
        assert!((c.mass_on_acc - 1.0).abs() < 1e-15);
        assert_eq!(c.flags, vec![1, 1, 1]);
    }

    #[test]
    fn half_cons_stencil_is_not_safe() {
        let mut g = band_grid();
        let u = update_with(&g, &[0.5, 0.5]);
        let first = u.stencil()[0].unwrap();
        g.states[first] = NodeState::Acc;
        let c = is_safe(&g, &u, 1e-9);
        assert!(!c.safe);
        assert_eq!(c.mass_on_acc, 0.5);
    }

    #[test]
    fn zero_weight_cons_nodes_do_not_block() {
        let mut g = band_grid();
        let u = update_with(&g, &[1.0, 0.0, 0.0]);
        g.states[u.stencil()[0].unwrap()] = NodeState::Acc;
        let c = is_safe(&g, &u, 0.0);
        assert!(c.safe);
        assert_eq!(c.mass_on_acc, 1.0);
        assert_eq!(c.flags, vec![1, 0, 0]);
    }

    #[test]
    fn exactness_is_relative() {
        let mut g = Grid::new(Bounds::centered(2.0), 5).unwrap();
        g.values.iter_mut().enumerate().for_each(|(k, v)| *v = 2.0 + k as f64);
        let r = ReferenceSolution::from_grid(&g, "test");
        assert!(is_exact(&g, 3, &r, 1e-10).unwrap());
        g.values[3] += 1.0;
        assert!(!is_exact(&g, 3, &r, 1e-10).unwrap());
        g.values[3] = r.field[3] * (1.0 + 1e-14);
        assert!(is_exact(&g, 3, &r, 1e-10).unwrap());
        let other = Grid::new(Bounds::centered(2.0), 4).unwrap();
        assert!(matches!(is_exact(&other, 0, &r, 1e-10), Err(Error::NotNested { .. })));
    }

    #[test]
    fn nested_restriction() {
        let mut fine = Grid::new(Bounds::centered(2.0), 9).unwrap();
        for k in 0..fine.len() {
            fine.values[k] = k as f64;
        }
        let r = ReferenceSolution::from_grid(&fine, "test");
        let coarse = Grid::new(Bounds::centered(2.0), 5).unwrap();
        assert_eq!(r.check_nested(&coarse).unwrap(), 2);
        let v = r.restrict(&coarse).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 2.0);
        assert_eq!(v[5], 18.0);
        let shifted = Grid::new(Bounds::centered(1.0), 5).unwrap();
        assert!(r.check_nested(&shifted).is_err());
    }

    #[test]
    fn dumb_methods_reproduce_reference_on_hjb_a() {
        let p = Problem::catalog(Catalog::A, Params::default());
        let cs = ControlSet::default();
        let g0 = prepared_grid(&p, 31).unwrap();
        let r = std::sync::Arc::new(
            ReferenceSolution::compute(&p, g0.bounds(), 31, Scheme::Sl3p, &cs, 1e-16, Method::Fsm).unwrap(),
        );
        for method in [Method::Sdm, Method::Dm] {
            let mut g = g0.clone();
            let cfg = SolverConfig::new(method, Scheme::Sl3p).with_reference(r.clone());
            let rep = solve(&mut g, &p, &cfg).unwrap();
            assert!(rep.converged && !rep.stalled, "{method}");
            for k in 0..g.len() {
                assert!(is_exact(&g, k, &r, 1e-10).unwrap());
            }
        }
    }

    #[test]
    fn hjb_a_optimal_field_points_home() {
        let p = Problem::catalog(Catalog::A, Params::default());
        let cs = ControlSet::default();
        let mut g = prepared_grid(&p, 21).unwrap();
        solve(&mut g, &p, &SolverConfig::new(Method::Fsm, Scheme::Sl3p)).unwrap();
        let f = extract_optimal_field(&g, &p, &cs, Scheme::Sl3p);
        let home = f[g.index(11, 10)].unwrap();
        assert!(home[0] == -1.0 && home[1].abs() < 1e-15);
        assert_eq!(f[g.index(10, 10)], None);
        let d = diagnose_iso(&g, &p, &cs, Scheme::Sl3p);
        assert!(d.iso, "{} flagged", d.flagged);
        assert_eq!(d.examined, 19 * 19 - 1);
    }

    #[test]
    fn cycle_detection_on_hand_built_band() {
        let p = Problem::catalog(Catalog::A, Params::default());
        let cs = ControlSet::default();
        let mut g = Grid::new(Bounds::centered(2.0), 5).unwrap();
        for k in 0..g.len() {
            g.values[k] = 1.0;
            g.states[k] = NodeState::Cons;
        }
        let a = g.index(1, 2);
        let b = g.index(2, 2);
        let (east, west) = (0, cs.len() / 2);
        let mut updates = vec![None; g.len()];
        updates[a] = crate::schemes::evaluate_control(&g, &p, &cs, a, east, Scheme::Sl3p);
        updates[b] = crate::schemes::evaluate_control(&g, &p, &cs, b, west, Scheme::Sl3p);
        assert_eq!(cons_dependency_cycle(&g, &updates), Some(vec![a, b]));
        g.states[b] = NodeState::Acc;
        assert_eq!(cons_dependency_cycle(&g, &updates), None);
    }
}
