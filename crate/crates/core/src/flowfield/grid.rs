use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node counts and physical extent of the planning grid.
///
/// Nodes span the full extent: the first and last node of every axis sit on
/// the domain boundary, so `spacing = extent / (n - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Physical edge length of every axis, meters.
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nx: 128, ny: 128, nz: 128, extent: 155.0 }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, nz: usize, extent: f64) -> Result<Self> {
        let spec = Self { nx, ny, nz, extent };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cube(n: usize, extent: f64) -> Result<Self> {
        Self::new(n, n, n, extent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || self.nz < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 nodes per axis, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::Config(format!("grid extent must be positive, got {}", self.extent)));
        }
        let nodes = self.nx.checked_mul(self.ny).and_then(|v| v.checked_mul(self.nz));
        if nodes.is_none_or(|n| n > u32::MAX as usize) {
            return Err(Error::Config("grid has too many nodes".into()));
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Meters between adjacent nodes along each axis.
    pub fn spacing(&self) -> [f64; 3] {
        [
            self.extent / (self.nx - 1) as f64,
            self.extent / (self.ny - 1) as f64,
            self.extent / (self.nz - 1) as f64,
        ]
    }

    pub fn is_isotropic(&self) -> bool {
        self.nx == self.ny && self.ny == self.nz
    }

    /// Flat index, x fastest.
    #[inline]
    pub fn index(&self, node: GridNode) -> usize {
        node.ix + self.nx * (node.iy + self.ny * node.iz)
    }

    #[inline]
    pub fn node(&self, index: usize) -> GridNode {
        let ix = index % self.nx;
        let rest = index / self.nx;
        GridNode { ix, iy: rest % self.ny, iz: rest / self.ny }
    }

    pub fn contains(&self, node: GridNode) -> bool {
        node.ix < self.nx && node.iy < self.ny && node.iz < self.nz
    }

    pub fn contains_signed(&self, ix: i64, iy: i64, iz: i64) -> bool {
        ix >= 0
            && iy >= 0
            && iz >= 0
            && (ix as usize) < self.nx
            && (iy as usize) < self.ny
            && (iz as usize) < self.nz
    }

    pub fn check(&self, node: GridNode) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::OutOfBounds(node))
        }
    }

    /// Physical coordinates of a node, meters from the domain origin.
    pub fn position(&self, node: GridNode) -> [f64; 3] {
        let s = self.spacing();
        [node.ix as f64 * s[0], node.iy as f64 * s[1], node.iz as f64 * s[2]]
    }

    /// Closest node to a physical point, clamped into the grid.
    pub fn nearest_node(&self, p: [f64; 3]) -> GridNode {
        let s = self.spacing();
        let snap = |v: f64, s: f64, n: usize| -> usize {
            let i = (v / s).round();
            if i.is_nan() || i <= 0.0 {
                0
            } else {
                (i as usize).min(n - 1)
            }
        };
        GridNode {
            ix: snap(p[0], s[0], self.nx),
            iy: snap(p[1], s[1], self.ny),
            iz: snap(p[2], s[2], self.nz),
        }
    }

    /// Physical Euclidean distance between two nodes.
    ///
    /// Every distance in the crate goes through here so that planner costs and
    /// metric recomputations agree bit for bit.
    #[inline]
    pub fn distance(&self, a: GridNode, b: GridNode) -> f64 {
        let d = a.delta(b);
        if self.is_isotropic() {
            euclid_steps(d, self.spacing()[0])
        } else {
            let s = self.spacing();
            let (x, y, z) = (d[0] as f64 * s[0], d[1] as f64 * s[1], d[2] as f64 * s[2]);
            (x * x + y * y + z * z).sqrt()
        }
    }
}

#[inline]
pub(crate) fn euclid_steps(d: [i64; 3], spacing: f64) -> f64 {
    let (x, y, z) = (d[0] as f64, d[1] as f64, d[2] as f64);
    spacing * (x * x + y * y + z * z).sqrt()
}

/// Integer grid coordinates of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 3]", into = "[usize; 3]")]
pub struct GridNode {
    pub ix: usize,
    pub iy: usize,
    pub iz: usize,
}

impl GridNode {
    pub const fn new(ix: usize, iy: usize, iz: usize) -> Self {
        Self { ix, iy, iz }
    }

    /// Signed per-axis offset `other - self`.
    #[inline]
    pub fn delta(self, other: GridNode) -> [i64; 3] {
        [
            other.ix as i64 - self.ix as i64,
            other.iy as i64 - self.iy as i64,
            other.iz as i64 - self.iz as i64,
        ]
    }

    pub fn chebyshev(self, other: GridNode) -> usize {
        let d = self.delta(other);
        d.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// True when `other` is one of the 26 neighbors of `self`.
    pub fn is_neighbor(self, other: GridNode) -> bool {
        self.chebyshev(other) == 1
    }
}

impl From<[usize; 3]> for GridNode {
    fn from(v: [usize; 3]) -> Self {
        Self { ix: v[0], iy: v[1], iz: v[2] }
    }
}

impl From<GridNode> for [usize; 3] {
    fn from(n: GridNode) -> Self {
        [n.ix, n.iy, n.iz]
    }
}

impl fmt::Display for GridNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.ix, self.iy, self.iz)
    }
}
