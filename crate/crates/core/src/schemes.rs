//! Semi-Lagrangian local updates.
//!
//! For every control `a` the characteristic is followed for one explicit
//! Euler step with the frozen velocity `f(x_i, a)`, the value at the foot is
//! interpolated from first neighbours, and the travel time is added:
//!
//! ```text
//! T(x_i) = min_a { I[T](x_i + tau f) + tau }
//! ```
//!
//! * SL-2p stops on the segment joining the two axis neighbours of the
//!   quadrant holding `f` and interpolates linearly between them.
//! * SL-3p stops at distance `dx` and interpolates barycentrically on the
//!   triangle formed by the two axis neighbours and the diagonal neighbour.
//!
//! The node itself never enters its own stencil.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, Neighbor, NodeState, BIG};
use crate::problems::{ControlSet, Problem};

/// Weights below this are treated as exact zeros.
const WEIGHT_FLOOR: f64 = 1e-12;
/// Controls with a slower velocity than this are skipped.
const MIN_SPEED: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sl2p,
    Sl3p,
}

impl Scheme {
    pub fn points(self) -> usize {
        match self {
            Scheme::Sl2p => 2,
            Scheme::Sl3p => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Sl2p => "sl2p",
            Scheme::Sl3p => "sl3p",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "sl2p" => Ok(Scheme::Sl2p),
            "sl3p" => Ok(Scheme::Sl3p),
            _ => Err(format!("unknown scheme `{s}` (expected sl2p or sl3p)")),
        }
    }
}

/// Result of one local update: the minimizing control and the
/// interpolation data behind the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalUpdate {
    pub value: f64,
    pub control: usize,
    /// Velocity `f(x_i, a*)`.
    pub velocity: [f64; 2],
    stencil: [Neighbor; 3],
    weights: [f64; 3],
    points: usize,
    pub foot: [f64; 2],
    pub travel: f64,
}

impl LocalUpdate {
    pub fn stencil(&self) -> &[Neighbor] {
        &self.stencil[..self.points]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights[..self.points]
    }

    /// Stencil nodes carrying positive weight.
    pub fn support(&self) -> impl Iterator<Item = (Neighbor, f64)> + '_ {
        self.stencil()
            .iter()
            .copied()
            .zip(self.weights().iter().copied())
            .filter(|&(_, w)| w > 0.0)
    }

    #[cfg(test)]
    pub(crate) fn set_weights_for_test(&mut self, w: &[f64]) {
        self.weights = [0.0; 3];
        self.weights[..w.len()].copy_from_slice(w);
        self.points = w.len();
    }
}

/// Stencil slots in [`crate::grid::NEIGHBOR_OFFSETS`] order.
const EAST: usize = 0;
const NORTH: usize = 1;
const WEST: usize = 2;
const SOUTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Geometry {
    slots: [usize; 3],
    weights: [f64; 3],
    points: usize,
    /// Distance from the node to the foot, in units of `dx`.
    reach: f64,
}

/// Quadrant holding unit direction `d`. Directions on an axis belong to two
/// quadrants; the lower-numbered one (counter-clockwise from +x) is used.
#[inline]
fn quadrant_slots(d: [f64; 2]) -> (usize, usize, usize) {
    let east = d[0] > 0.0 || (d[0] == 0.0 && d[1] > 0.0);
    let north = d[1] >= 0.0;
    let axis_x = if east { EAST } else { WEST };
    let axis_y = if north { NORTH } else { SOUTH };
    let diag = match (east, north) {
        (true, true) => 4,
        (false, true) => 5,
        (false, false) => 6,
        (true, false) => 7,
    };
    (axis_x, axis_y, diag)
}

// rounding can push u + v - 1 slightly below zero
#[inline]
fn clamp_weights(w: &mut [f64; 3]) {
    for wi in w.iter_mut() {
        if *wi < 0.0 {
            *wi = 0.0;
        }
    }
}

// A segment weight at rounding level means the foot sits on a node; without
// snapping, axis controls could never start from a point target.
#[inline]
fn snap_segment_weights(w: &mut [f64; 3]) {
    if w[0] < WEIGHT_FLOOR {
        w[0] = 0.0;
        w[1] = 1.0;
    } else if w[1] < WEIGHT_FLOOR {
        w[0] = 1.0;
        w[1] = 0.0;
    }
}

#[inline]
pub(crate) fn geometry(d: [f64; 2], scheme: Scheme) -> Geometry {
    let (ax, ay, diag) = quadrant_slots(d);
    let u = d[0].abs();
    let v = d[1].abs();
    match scheme {
        Scheme::Sl2p => {
            let s = u + v;
            let mut weights = [u / s, v / s, 0.0];
            snap_segment_weights(&mut weights);
            Geometry {
                slots: [ax, ay, 0],
                weights,
                points: 2,
                reach: 1.0 / s,
            }
        }
        Scheme::Sl3p => {
            // foot (u, v) in the unit triangle (1,0), (0,1), (1,1)
            let mut weights = [1.0 - v, 1.0 - u, u + v - 1.0];
            clamp_weights(&mut weights);
            Geometry {
                slots: [ax, ay, diag],
                weights,
                points: 3,
                reach: 1.0,
            }
        }
    }
}

#[inline]
fn neighbor_value(grid: &Grid, nb: Neighbor) -> f64 {
    match nb {
        Some(j) => {
            let v = grid.values[j];
            debug_assert!(
                grid.states[j] != NodeState::Far || v >= BIG,
                "stencil read a finite value ({v}) at FAR node {j}"
            );
            v
        }
        None => BIG,
    }
}

#[inline]
fn interpolate(geo: &Geometry, vals: &[f64; 8]) -> Option<f64> {
    let mut acc = 0.0;
    for p in 0..geo.points {
        let w = geo.weights[p];
        if w > 0.0 {
            let v = vals[geo.slots[p]];
            if v >= BIG {
                return None;
            }
            acc += w * v;
        }
    }
    Some(acc)
}

/// Stencil geometry, speed and unit direction of control `c` at `x`.
#[inline]
fn control_geometry(
    problem: &Problem,
    controls: &ControlSet,
    x: [f64; 2],
    c: usize,
    scheme: Scheme,
) -> Option<(Geometry, f64, [f64; 2])> {
    let a = controls.get(c);
    match problem.speed(x, a) {
        Some(s) if s >= MIN_SPEED => Some((*controls.geometry(c, scheme), s, a)),
        Some(_) => None,
        None => {
            let f = problem.velocity(x, a);
            let speed = f[0].hypot(f[1]);
            if speed < MIN_SPEED {
                return None;
            }
            let d = [f[0] / speed, f[1] / speed];
            Some((geometry(d, scheme), speed, d))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build(
    grid: &Grid,
    problem: &Problem,
    controls: &ControlSet,
    k: usize,
    nbs: &[Neighbor; 8],
    vals: &[f64; 8],
    control: usize,
    scheme: Scheme,
) -> Option<LocalUpdate> {
    let x = grid.coord(k);
    let (geo, speed, d) = control_geometry(problem, controls, x, control, scheme)?;
    let interp = interpolate(&geo, vals)?;
    let dx = grid.dx();
    let travel = geo.reach * dx / speed;
    let mut stencil = [None; 3];
    for p in 0..geo.points {
        stencil[p] = nbs[geo.slots[p]];
    }
    Some(LocalUpdate {
        value: interp + travel,
        control,
        velocity: problem.velocity(x, controls.get(control)),
        stencil,
        weights: geo.weights,
        points: geo.points,
        foot: [x[0] + geo.reach * dx * d[0], x[1] + geo.reach * dx * d[1]],
        travel,
    })
}

fn gather(grid: &Grid, k: usize) -> ([Neighbor; 8], [f64; 8]) {
    let nbs = grid.stencil_neighbors(k);
    let mut vals = [BIG; 8];
    for (v, nb) in vals.iter_mut().zip(nbs.iter()) {
        *v = neighbor_value(grid, *nb);
    }
    (nbs, vals)
}

/// Value of the local update at node `k`, minimized over `controls`.
///
/// Returns `None` when every control is rejected (all candidates would
/// interpolate a [`BIG`] value with positive weight).
pub fn local_value(
    grid: &Grid,
    problem: &Problem,
    controls: &ControlSet,
    k: usize,
    scheme: Scheme,
) -> Option<(f64, usize)> {
    let (_, vals) = gather(grid, k);
    if vals.iter().all(|&v| v >= BIG) {
        return None;
    }
    let x = grid.coord(k);
    let dx = grid.dx();
    let mut best: Option<(f64, usize)> = None;
    for c in 0..controls.len() {
        let Some((geo, speed, _)) = control_geometry(problem, controls, x, c, scheme) else {
            continue;
        };
        if let Some(interp) = interpolate(&geo, &vals) {
            let cand = interp + geo.reach * dx / speed;
            if best.is_none_or(|(b, _)| cand < b) {
                best = Some((cand, c));
            }
        }
    }
    best
}

/// Full local update at node `k` with deterministic lowest-index tie-break.
pub fn local_update(
    grid: &Grid,
    problem: &Problem,
    controls: &ControlSet,
    k: usize,
    scheme: Scheme,
) -> Option<LocalUpdate> {
    let (_, c) = local_value(grid, problem, controls, k, scheme)?;
    evaluate_control(grid, problem, controls, k, c, scheme)
}

/// The candidate of a single control, or `None` when it is rejected.
pub fn evaluate_control(
    grid: &Grid,
    problem: &Problem,
    controls: &ControlSet,
    k: usize,
    control: usize,
    scheme: Scheme,
) -> Option<LocalUpdate> {
    let (nbs, vals) = gather(grid, k);
    build(grid, problem, controls, k, &nbs, &vals, control, scheme)
}

/// Two-point update.
pub fn update_sl2p(grid: &Grid, problem: &Problem, controls: &ControlSet, k: usize) -> Option<LocalUpdate> {
    local_update(grid, problem, controls, k, Scheme::Sl2p)
}

/// Three-point update.
pub fn update_sl3p(grid: &Grid, problem: &Problem, controls: &ControlSet, k: usize) -> Option<LocalUpdate> {
    local_update(grid, problem, controls, k, Scheme::Sl3p)
}
