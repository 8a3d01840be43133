//! Global solution strategies built on the local updates.
//!
//! `ITM` and `FSM` are Gauss-Seidel fixed-point iterations that differ only
//! in the visiting order. The single-pass methods (`FMM`, `SM`, `SFMM` and
//! the verification methods `SDM`, `DM`) share one narrow-band engine,
//! [`Marcher`], and differ only in which CONS node they accept next.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, NodeState};
use crate::problems::{ControlSet, Problem};
use crate::schemes::{local_update, local_value, LocalUpdate, Scheme};
use crate::verify::{is_safe, ReferenceSolution};

pub const DEFAULT_TOL: f64 = 1e-16;
pub const DEFAULT_SIGMA: f64 = 1e-9;
pub const DEFAULT_TOL_EXACT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Itm,
    Fsm,
    Fmm,
    Sm,
    Sfmm,
    Sdm,
    Dm,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Itm,
        Method::Fsm,
        Method::Fmm,
        Method::Sm,
        Method::Sfmm,
        Method::Sdm,
        Method::Dm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Itm => "ITM",
            Method::Fsm => "FSM",
            Method::Fmm => "FMM",
            Method::Sm => "SM",
            Method::Sfmm => "SFMM",
            Method::Sdm => "SDM",
            Method::Dm => "DM",
        }
    }

    pub fn is_single_pass(self) -> bool {
        !matches!(self, Method::Itm | Method::Fsm)
    }

    /// Whether the method consults the same-grid reference solution.
    pub fn needs_reference(self) -> bool {
        matches!(self, Method::Sdm | Method::Dm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}` (expected itm, fsm, fmm, sm, sfmm, sdm or dm)"))
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    pub scheme: Scheme,
    pub controls: ControlSet,
    /// Stopping threshold on the max nodal change of one iteration/sweep.
    pub tol: f64,
    /// Safeness relaxation: a node is safe when its ACC weight is `>= 1 - sigma`.
    pub sigma: f64,
    /// Relative tolerance of the exact-node test.
    pub tol_exact: f64,
    /// Iteration/sweep cap; `None` means `10 * N`.
    pub max_iter: Option<usize>,
    pub reference: Option<Arc<ReferenceSolution>>,
}

impl SolverConfig {
    pub fn new(method: Method, scheme: Scheme) -> Self {
        SolverConfig {
            method,
            scheme,
            controls: ControlSet::default(),
            tol: DEFAULT_TOL,
            sigma: DEFAULT_SIGMA,
            tol_exact: DEFAULT_TOL_EXACT,
            max_iter: None,
            reference: None,
        }
    }

    pub fn with_reference(mut self, reference: Arc<ReferenceSolution>) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_controls(mut self, controls: ControlSet) -> Self {
        self.controls = controls;
        self
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::InvalidConfig(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        if self.tol_exact.is_nan() || self.tol_exact < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tol_exact must be nonnegative, got {}",
                self.tol_exact
            )));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        if self.method.needs_reference() {
            let reference = self
                .reference
                .as_ref()
                .ok_or(Error::MissingReference(self.method.as_str()))?;
            reference.check_nested(grid)?;
        }
        Ok(())
    }

    fn iteration_cap(&self, grid: &Grid) -> usize {
        self.max_iter.unwrap_or(10 * grid.len())
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub method: Option<Method>,
    pub converged: bool,
    pub stalled: bool,
    /// FSM sweeps (four directional passes each), stopping sweep included.
    pub sweeps: usize,
    /// ITM lexicographic iterations, stopping iteration included.
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub accepted_order: Vec<usize>,
    #[serde(skip)]
    pub recompute_counts: Vec<u32>,
    pub accepted_count: usize,
}

impl SolverReport {
    pub fn max_recomputes(&self) -> u32 {
        self.recompute_counts.iter().copied().max().unwrap_or(0)
    }
}

/// Runs `cfg.method` on a grid with the target already embedded.
pub fn solve(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    match cfg.method {
        Method::Itm => solve_itm(grid, problem, cfg),
        Method::Fsm => solve_fsm(grid, problem, cfg),
        _ => Ok(Marcher::new(grid, problem, cfg)?.run()),
    }
}

/// Gauss-Seidel iteration in a fixed lexicographic order.
pub fn solve_itm(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate(grid)?;
    let n = grid.n();
    let passes = [Pass {
        i_up: true,
        j_up: true,
    }];
    let (converged, count) = iterate(grid, problem, cfg, &passes, n)?;
    Ok(SolverReport {
        method: Some(Method::Itm),
        converged,
        iterations: count,
        accepted_count: grid.count_state(NodeState::Acc),
        ..Default::default()
    })
}

/// Gauss-Seidel iteration alternating four sweeping directions.
pub fn solve_fsm(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate(grid)?;
    let n = grid.n();
    let (converged, count) = iterate(grid, problem, cfg, &FSM_PASSES, n)?;
    Ok(SolverReport {
        method: Some(Method::Fsm),
        converged,
        sweeps: count,
        accepted_count: grid.count_state(NodeState::Acc),
        ..Default::default()
    })
}

#[derive(Debug, Clone, Copy)]
struct Pass {
    i_up: bool,
    j_up: bool,
}

const FSM_PASSES: [Pass; 4] = [
    Pass { i_up: true, j_up: true },
    Pass { i_up: false, j_up: true },
    Pass { i_up: false, j_up: false },
    Pass { i_up: true, j_up: false },
];

/// Repeats the group of `passes` until one full group changes no node by
/// `tol` or more. Returns `(converged, groups run)`.
fn iterate(
    grid: &mut Grid,
    problem: &Problem,
    cfg: &SolverConfig,
    passes: &[Pass],
    n: usize,
) -> Result<(bool, usize)> {
    // targets stay fixed at 0; everything else is being computed
    for s in grid.states.iter_mut() {
        if *s != NodeState::Acc {
            *s = NodeState::Cons;
        }
    }
    let cap = cfg.iteration_cap(grid);
    let mut count = 0;
    let mut converged = false;
    while count < cap {
        count += 1;
        let mut max_change: f64 = 0.0;
        for pass in passes {
            for jj in 0..n {
                let j = if pass.j_up { jj } else { n - 1 - jj };
                for ii in 0..n {
                    let i = if pass.i_up { ii } else { n - 1 - ii };
                    let k = j * n + i;
                    if grid.states[k] == NodeState::Acc {
                        continue;
                    }
                    if let Some((v, _)) = local_value(grid, problem, &cfg.controls, k, cfg.scheme) {
                        let old = grid.values[k];
                        if v < old {
                            grid.values[k] = v;
                            max_change = max_change.max(old - v);
                        }
                    }
                }
            }
        }
        if max_change < cfg.tol {
            converged = true;
            break;
        }
    }
    if converged {
        for s in grid.states.iter_mut() {
            *s = NodeState::Acc;
        }
    }
    Ok((converged, count))
}

/// How the next node to accept is picked among eligible CONS nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    MinValue,
    LowestIndex,
}

/// Acceptance rule of a single-pass method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptanceRule {
    pub selection: Selection,
    pub require_safe: bool,
    pub require_exact: bool,
}

impl AcceptanceRule {
    pub fn for_method(method: Method) -> Option<Self> {
        let (selection, require_safe, require_exact) = match method {
            Method::Fmm => (Selection::MinValue, false, false),
            Method::Sm => (Selection::LowestIndex, true, false),
            Method::Sfmm => (Selection::MinValue, true, false),
            Method::Sdm => (Selection::LowestIndex, true, true),
            Method::Dm => (Selection::LowestIndex, false, true),
            Method::Itm | Method::Fsm => return None,
        };
        Some(AcceptanceRule {
            selection,
            require_safe,
            require_exact,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Key {
    value: f64,
    index: usize,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.index.cmp(&other.index))
    }
}

/// Result of one [`Marcher::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Accepted(usize),
    /// CONS is not empty but holds no eligible node.
    Stalled,
    /// CONS is empty.
    Done,
}

/// Narrow-band engine: one node moves CONS -> ACC per step, its
/// 8-neighbours enter CONS (if FAR) and are recomputed.
///
/// A recomputed value is kept only if strictly smaller than the stored one.
pub struct Marcher<'a> {
    grid: &'a mut Grid,
    problem: &'a Problem,
    controls: &'a ControlSet,
    scheme: Scheme,
    rule: AcceptanceRule,
    method: Option<Method>,
    sigma: f64,
    tol_exact: f64,
    reference: Option<&'a ReferenceSolution>,
    updates: Vec<Option<LocalUpdate>>,
    keys: Vec<Option<Key>>,
    eligible: BTreeSet<Key>,
    cons_count: usize,
    accepted_order: Vec<usize>,
    recompute_counts: Vec<u32>,
    finished: Option<Step>,
}

impl<'a> Marcher<'a> {
    /// Engine for a single-pass `cfg.method`. Nodes already ACC in `grid`
    /// (the embedded target) seed the band.
    pub fn new(grid: &'a mut Grid, problem: &'a Problem, cfg: &'a SolverConfig) -> Result<Self> {
        cfg.validate(grid)?;
        let rule = AcceptanceRule::for_method(cfg.method).ok_or_else(|| {
            Error::InvalidConfig(format!("{} is not a single-pass method", cfg.method))
        })?;
        let mut m = Marcher::with_rule(grid, problem, &cfg.controls, cfg.scheme, rule, cfg.reference.as_deref());
        m.method = Some(cfg.method);
        m.sigma = cfg.sigma;
        m.tol_exact = cfg.tol_exact;
        m.seed();
        Ok(m)
    }

    fn with_rule(
        grid: &'a mut Grid,
        problem: &'a Problem,
        controls: &'a ControlSet,
        scheme: Scheme,
        rule: AcceptanceRule,
        reference: Option<&'a ReferenceSolution>,
    ) -> Self {
        let len = grid.len();
        Marcher {
            grid,
            problem,
            controls,
            scheme,
            rule,
            method: None,
            sigma: DEFAULT_SIGMA,
            tol_exact: DEFAULT_TOL_EXACT,
            reference,
            updates: vec![None; len],
            keys: vec![None; len],
            eligible: BTreeSet::new(),
            cons_count: 0,
            accepted_order: Vec::new(),
            recompute_counts: vec![0; len],
            finished: None,
        }
    }

    fn seed(&mut self) {
        let seeds: Vec<usize> = (0..self.grid.len())
            .filter(|&k| self.grid.states[k] == NodeState::Acc)
            .collect();
        self.accepted_order.extend_from_slice(&seeds);
        for &k in &seeds {
            self.expand(k);
        }
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    /// Current optimal update of every node (None for FAR/target nodes).
    pub fn updates(&self) -> &[Option<LocalUpdate>] {
        &self.updates
    }

    pub fn cons_count(&self) -> usize {
        self.cons_count
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted_order.len()
    }

    pub fn recompute_counts(&self) -> &[u32] {
        &self.recompute_counts
    }

    /// Whether CONS node `k` currently satisfies the acceptance rule.
    pub fn is_eligible(&self, k: usize) -> bool {
        self.keys[k].is_some()
    }

    pub fn step(&mut self) -> Step {
        if let Some(s) = self.finished {
            return s;
        }
        match self.eligible.pop_first() {
            Some(key) => {
                let k = key.index;
                self.keys[k] = None;
                debug_assert_eq!(self.grid.states[k], NodeState::Cons);
                self.grid.states[k] = NodeState::Acc;
                self.cons_count -= 1;
                self.accepted_order.push(k);
                self.expand(k);
                Step::Accepted(k)
            }
            None => {
                let s = if self.cons_count > 0 {
                    Step::Stalled
                } else {
                    Step::Done
                };
                self.finished = Some(s);
                s
            }
        }
    }

    pub fn run(mut self) -> SolverReport {
        let outcome = loop {
            match self.step() {
                Step::Accepted(_) => {}
                other => break other,
            }
        };
        self.report(outcome)
    }

    /// Runs to completion or stall, keeping the engine for inspection.
    pub fn run_in_place(&mut self) -> SolverReport {
        let outcome = loop {
            match self.step() {
                Step::Accepted(_) => {}
                other => break other,
            }
        };
        self.report(outcome)
    }

    fn report(&self, outcome: Step) -> SolverReport {
        SolverReport {
            method: self.method,
            converged: outcome == Step::Done,
            stalled: outcome == Step::Stalled,
            sweeps: 0,
            iterations: 0,
            accepted_order: self.accepted_order.clone(),
            recompute_counts: self.recompute_counts.clone(),
            accepted_count: self.accepted_order.len(),
        }
    }

    /// Neighbours of the freshly accepted node `k` enter CONS and are recomputed.
    fn expand(&mut self, k: usize) {
        for nb in self.grid.stencil_neighbors(k).into_iter().flatten() {
            match self.grid.states[nb] {
                NodeState::Acc => continue,
                NodeState::Far => {
                    self.grid.states[nb] = NodeState::Cons;
                    self.cons_count += 1;
                }
                NodeState::Cons => {}
            }
            self.recompute(nb);
            self.refresh(nb);
        }
    }

    fn recompute(&mut self, k: usize) {
        self.recompute_counts[k] += 1;
        if let Some(u) = local_update(self.grid, self.problem, self.controls, k, self.scheme) {
            if u.value < self.grid.values[k] {
                self.grid.values[k] = u.value;
                self.updates[k] = Some(u);
            }
        }
    }

    fn refresh(&mut self, k: usize) {
        if let Some(old) = self.keys[k].take() {
            self.eligible.remove(&old);
        }
        if self.qualifies(k) {
            let value = match self.rule.selection {
                Selection::MinValue => self.grid.values[k],
                Selection::LowestIndex => 0.0,
            };
            let key = Key { value, index: k };
            self.eligible.insert(key);
            self.keys[k] = Some(key);
        }
    }

    fn qualifies(&self, k: usize) -> bool {
        if self.rule.require_safe {
            match &self.updates[k] {
                Some(u) if is_safe(self.grid, u, self.sigma).safe => {}
                _ => return false,
            }
        }
        if self.rule.require_exact {
            let reference = self.reference.expect("validated: reference present");
            let exact = reference.value_at(self.grid, k).is_some_and(|r| {
                (self.grid.values[k] - r).abs() <= self.tol_exact * r.abs().max(1.0)
            });
            if !exact {
                return false;
            }
        }
        true
    }
}

/// Accepts nodes by minimal value.
pub fn solve_fmm(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    run_as(grid, problem, cfg, Method::Fmm)
}

/// Accepts the lowest-index safe node.
pub fn solve_sm(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    run_as(grid, problem, cfg, Method::Sm)
}

/// Accepts the safe node of minimal value.
pub fn solve_sfmm(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig) -> Result<SolverReport> {
    run_as(grid, problem, cfg, Method::Sfmm)
}

pub(crate) fn run_as(grid: &mut Grid, problem: &Problem, cfg: &SolverConfig, method: Method) -> Result<SolverReport> {
    let cfg = SolverConfig {
        method,
        ..cfg.clone()
    };
    Ok(Marcher::new(grid, problem, &cfg)?.run())
}

/// Fresh grid on the default domain with the problem's target embedded.
pub fn prepared_grid(problem: &Problem, n: usize) -> Result<Grid> {
    let mut g = Grid::new(Default::default(), n)?;
    g.embed_target(&problem.target)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Bounds;
    use crate::problems::{Catalog, Params};
    use std::f64::consts::SQRT_2;

    fn small(problem: &Problem, n: usize, half: f64) -> Grid {
        let mut g = Grid::new(Bounds::centered(half), n).unwrap();
        g.embed_target(&problem.target).unwrap();
        g
    }

    fn hjb(which: Catalog) -> Problem {
        Problem::catalog(which, Params::default())
    }

    #[test]
    fn itm_all_target_converges_at_once() {
        let p = Problem::custom(
            "all-target",
            crate::problems::ProblemClass { iso: true, reg: true },
            Vec::new(),
            |_, a| a,
        );
        let mut g = Grid::new(Bounds::centered(1.0), 3).unwrap();
        let pts: Vec<[f64; 2]> = (0..9).map(|k| g.coord(k)).collect();
        g.embed_target(&pts).unwrap();
        let r = solve_itm(&mut g, &p, &SolverConfig::new(Method::Itm, Scheme::Sl3p)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn itm_three_by_three() {
        let p = hjb(Catalog::A);
        let mut g = small(&p, 3, 1.0);
        let r = solve_itm(&mut g, &p, &SolverConfig::new(Method::Itm, Scheme::Sl3p)).unwrap();
        assert!(r.converged);
        for (i, j) in [(0, 1), (1, 0), (2, 1), (1, 2)] {
            assert!((g.values[g.index(i, j)] - 1.0).abs() < 1e-15);
        }
        for (i, j) in [(0, 0), (2, 0), (0, 2), (2, 2)] {
            assert!((g.values[g.index(i, j)] - (3.0 - SQRT_2)).abs() < 1e-14);
        }
    }

    #[test]
    fn itm_tolerance_below_ulp_is_bitwise_stable() {
        let p = hjb(Catalog::A);
        let mut a = small(&p, 21, 2.0);
        let mut b = a.clone();
        let mut cfg = SolverConfig::new(Method::Itm, Scheme::Sl3p);
        solve_itm(&mut a, &p, &cfg).unwrap();
        cfg.tol = 1e-12;
        solve_itm(&mut b, &p, &cfg).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn itm_reports_nonconvergence() {
        let p = hjb(Catalog::A);
        let mut g = small(&p, 21, 2.0);
        let mut cfg = SolverConfig::new(Method::Itm, Scheme::Sl3p);
        cfg.max_iter = Some(1);
        let r = solve_itm(&mut g, &p, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn fmm_three_by_three_order() {
        let p = hjb(Catalog::A);
        let mut g = small(&p, 3, 1.0);
        let r = solve_fmm(&mut g, &p, &SolverConfig::new(Method::Fmm, Scheme::Sl3p)).unwrap();
        assert!(r.converged && !r.stalled);
        assert_eq!(r.accepted_count, 9);
        let order = &r.accepted_order;
        assert_eq!(order[0], g.index(1, 1));
        let axis: Vec<usize> = [(0, 1), (1, 0), (2, 1), (1, 2)].iter().map(|&(i, j)| g.index(i, j)).collect();
        for &k in &order[1..5] {
            assert!(axis.contains(&k));
            assert!((g.values[k] - 1.0).abs() < 1e-15);
        }
        for &k in &order[5..] {
            assert!((g.values[k] - (3.0 - SQRT_2)).abs() < 1e-14);
        }
    }

    #[test]
    fn marcher_keeps_band_one_cell_thick() {
        for which in [Catalog::A, Catalog::C, Catalog::E] {
            let p = hjb(which);
            for method in [Method::Fmm, Method::Sm, Method::Sfmm] {
                let mut g = small(&p, 21, 2.0);
                let cfg = SolverConfig::new(method, Scheme::Sl3p);
                let mut m = Marcher::new(&mut g, &p, &cfg).unwrap();
                let mut seen = vec![false; m.grid().len()];
                while let Step::Accepted(k) = m.step() {
                    assert!(!seen[k], "node accepted twice");
                    seen[k] = true;
                    let grid = m.grid();
                    for c in 0..grid.len() {
                        if grid.states[c] == NodeState::Cons {
                            let touches = grid
                                .stencil_neighbors(c)
                                .iter()
                                .flatten()
                                .any(|&nb| grid.states[nb] == NodeState::Acc);
                            assert!(touches, "{which} {method}: CONS node {c} detached");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn states_only_move_forward() {
        let p = hjb(Catalog::B);
        let mut g = small(&p, 15, 2.0);
        let cfg = SolverConfig::new(Method::Sfmm, Scheme::Sl3p);
        let mut m = Marcher::new(&mut g, &p, &cfg).unwrap();
        let rank = |s: NodeState| match s {
            NodeState::Far => 0,
            NodeState::Cons => 1,
            NodeState::Acc => 2,
        };
        let mut last: Vec<u8> = m.grid().states.iter().map(|&s| rank(s)).collect();
        while let Step::Accepted(_) = m.step() {
            for (k, &s) in m.grid().states.iter().enumerate() {
                assert!(rank(s) >= last[k]);
                last[k] = rank(s);
            }
        }
    }

    #[test]
    fn dumb_methods_require_reference() {
        let p = hjb(Catalog::A);
        let mut g = small(&p, 5, 2.0);
        for method in [Method::Sdm, Method::Dm] {
            let err = solve(&mut g.clone(), &p, &SolverConfig::new(method, Scheme::Sl3p)).unwrap_err();
            assert!(matches!(err, Error::MissingReference(_)));
        }
        let mut cfg = SolverConfig::new(Method::Fsm, Scheme::Sl3p);
        cfg.tol = 0.0;
        assert!(solve(&mut g, &p, &cfg).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().to_lowercase().parse::<Method>().unwrap(), m);
        }
        assert!("oum".parse::<Method>().is_err());
    }
}
