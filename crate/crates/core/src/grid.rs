//! Uniform square grids carrying a value field and ACC/CONS/FAR labels.
//!
//! Nodes are stored row-major: index `k = j * n + i`, where `i` runs along
//! the x axis and `j` along the y axis.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel for "no information yet". Stencil points outside the domain
/// read as this value, so directions leaving the domain lose every
/// minimization.
pub const BIG: f64 = 1e10;

/// Narrow-band label of a node. Legal transitions are `Far -> Cons -> Acc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeState {
    Acc,
    Cons,
    Far,
}

impl NodeState {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeState::Acc => "ACC",
            NodeState::Cons => "CONS",
            NodeState::Far => "FAR",
        }
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned square domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Bounds {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    /// The square `[-half, half]^2`.
    pub fn centered(half: f64) -> Self {
        Bounds::new(-half, half, -half, half)
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::centered(2.0)
    }
}

/// One of the eight first neighbours, or a point beyond the boundary.
pub type Neighbor = Option<usize>;

/// Offsets of the 8-neighbourhood, axis neighbours first.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

#[derive(Debug, Clone)]
pub struct Grid {
    bounds: Bounds,
    n: usize,
    dx: f64,
    pub values: Vec<f64>,
    pub states: Vec<NodeState>,
}

impl Grid {
    /// Builds an `n x n` grid over `bounds` with every node FAR at [`BIG`].
    pub fn new(bounds: Bounds, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewNodes(n));
        }
        let Bounds {
            xmin,
            xmax,
            ymin,
            ymax,
        } = bounds;
        let wx = xmax - xmin;
        let wy = ymax - ymin;
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !finite || wx <= 0.0 || wy <= 0.0 || (wx - wy).abs() > 1e-12 * wx.max(wy) {
            return Err(Error::BadBounds {
                xmin,
                xmax,
                ymin,
                ymax,
            });
        }
        let len = n * n;
        Ok(Grid {
            bounds,
            n,
            dx: wx / (n - 1) as f64,
            values: vec![BIG; len],
            states: vec![NodeState::Far; len],
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Nodes per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        j * self.n + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    #[inline]
    pub fn coord(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.ij(k);
        [
            self.bounds.xmin + i as f64 * self.dx,
            self.bounds.ymin + j as f64 * self.dx,
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let b = &self.bounds;
        p[0] >= b.xmin && p[0] <= b.xmax && p[1] >= b.ymin && p[1] <= b.ymax
    }

    /// Nearest node to `p`; exact half-way ties go to the lower index.
    pub fn nearest(&self, p: [f64; 2]) -> Result<usize> {
        if !self.contains(p) {
            return Err(Error::OutsideDomain(p[0], p[1]));
        }
        let snap = |t: f64| -> usize {
            let lo = t.floor();
            let frac = t - lo;
            let s = if frac > 0.5 { lo + 1.0 } else { lo };
            (s.max(0.0) as usize).min(self.n - 1)
        };
        let i = snap((p[0] - self.bounds.xmin) / self.dx);
        let j = snap((p[1] - self.bounds.ymin) / self.dx);
        Ok(self.index(i, j))
    }

    /// Neighbour of `k` shifted by `(di, dj)`, `None` when it falls outside.
    #[inline]
    pub fn offset(&self, k: usize, di: isize, dj: isize) -> Neighbor {
        let (i, j) = self.ij(k);
        let ii = i as isize + di;
        let jj = j as isize + dj;
        let n = self.n as isize;
        if ii < 0 || jj < 0 || ii >= n || jj >= n {
            None
        } else {
            Some(jj as usize * self.n + ii as usize)
        }
    }

    /// The 8-neighbourhood in [`NEIGHBOR_OFFSETS`] order.
    pub fn stencil_neighbors(&self, k: usize) -> [Neighbor; 8] {
        let mut out = [None; 8];
        for (slot, &(di, dj)) in out.iter_mut().zip(NEIGHBOR_OFFSETS.iter()) {
            *slot = self.offset(k, di, dj);
        }
        out
    }

    /// The four axis neighbours (east, north, west, south).
    pub fn axis_neighbors(&self, k: usize) -> [Neighbor; 4] {
        let all = self.stencil_neighbors(k);
        [all[0], all[1], all[2], all[3]]
    }

    /// Value read by a stencil: OUTSIDE reads as [`BIG`].
    #[inline]
    pub fn value_at(&self, nb: Neighbor) -> f64 {
        match nb {
            Some(k) => self.values[k],
            None => BIG,
        }
    }

    /// Puts the nearest node of each point into ACC with value 0.
    ///
    /// Returns the selected node indices in input order (duplicates collapse).
    pub fn embed_target(&mut self, points: &[[f64; 2]]) -> Result<Vec<usize>> {
        let mut picked = Vec::with_capacity(points.len());
        for &p in points {
            let k = self.nearest(p)?;
            if !picked.contains(&k) {
                picked.push(k);
            }
        }
        for &k in &picked {
            self.values[k] = 0.0;
            self.states[k] = NodeState::Acc;
        }
        Ok(picked)
    }

    /// Resets every node to FAR/[`BIG`].
    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = BIG);
        self.states.iter_mut().for_each(|s| *s = NodeState::Far);
    }

    pub fn count_state(&self, state: NodeState) -> usize {
        self.states.iter().filter(|&&s| s == state).count()
    }

    /// Writes the `x,y,value,state` dump, optionally with `fx,fy` columns.
    pub fn write_csv<W: Write>(&self, mut w: W, field: Option<&[Option<[f64; 2]>]>) -> Result<()> {
        if field.is_some() {
            writeln!(w, "x,y,value,state,fx,fy")?;
        } else {
            writeln!(w, "x,y,value,state")?;
        }
        for k in 0..self.len() {
            let [x, y] = self.coord(k);
            write!(
                w,
                "{:.16e},{:.16e},{:.16e},{}",
                x, y, self.values[k], self.states[k]
            )?;
            if let Some(f) = field {
                match f[k] {
                    Some([fx, fy]) => write!(w, ",{:.16e},{:.16e}", fx, fy)?,
                    None => write!(w, ",,")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
