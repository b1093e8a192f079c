use serde::{Deserialize, Serialize};

use super::grid::{GridNode, GridSpec};
use crate::error::{Error, Result};

/// Box model of the lead vehicle with a payload bay open from below.
///
/// In the hull frame x runs along the length with the stern at `+length/2`,
/// y across the beam and z up. `heading` rotates that frame about the
/// vertical axis through `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullModel {
    pub center: [f64; 3],
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub bay_length: f64,
    pub bay_width: f64,
    pub bay_height: f64,
    /// Degrees, counter-clockwise seen from above.
    pub heading: f64,
}

impl HullModel {
    /// Default vehicle dimensions placed at the center of the domain.
    pub fn centered(spec: &GridSpec) -> Self {
        let c = spec.extent / 2.0;
        Self {
            center: [c, c, c],
            length: 22.0,
            width: 2.2,
            height: 2.7,
            bay_length: 5.5,
            bay_width: 1.5,
            bay_height: 2.2,
            heading: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("length", self.length, self.bay_length),
            ("width", self.width, self.bay_width),
            ("height", self.height, self.bay_height),
        ];
        for (name, hull, bay) in dims {
            if !(hull.is_finite() && bay.is_finite() && bay > 0.0 && hull > bay) {
                return Err(Error::Geometry(format!(
                    "bay {name} {bay} must be positive and smaller than hull {name} {hull}"
                )));
            }
        }
        if !self.center.iter().chain([&self.heading]).all(|v| v.is_finite()) {
            return Err(Error::Geometry("hull center and heading must be finite".into()));
        }
        Ok(())
    }

    /// Checks that the hull, and the boundary-layer shell under it, stay at
    /// least one node away from every domain face.
    pub fn check_fits(&self, spec: &GridSpec) -> Result<()> {
        self.validate()?;
        let s = spec.spacing();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        let (sin, cos) = self.heading.to_radians().sin_cos();
        let ext_x = (hl * cos).abs() + (hw * sin).abs();
        let ext_y = (hl * sin).abs() + (hw * cos).abs();
        let lo = [
            self.center[0] - ext_x,
            self.center[1] - ext_y,
            self.center[2] - self.height / 2.0 - s[2],
        ];
        let hi = [self.center[0] + ext_x, self.center[1] + ext_y, self.center[2] + self.height / 2.0];
        for axis in 0..3 {
            if lo[axis] < s[axis] || hi[axis] > spec.extent - s[axis] {
                return Err(Error::Geometry(format!(
                    "hull spans [{:.3}, {:.3}] on axis {axis}, needs one node of margin inside [0, {}]",
                    lo[axis], hi[axis], spec.extent
                )));
            }
        }
        Ok(())
    }

    /// Point expressed in the hull frame (origin at `center`).
    pub fn to_local(&self, p: [f64; 3]) -> [f64; 3] {
        let (dx, dy, dz) = (p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]);
        let (sin, cos) = self.heading.to_radians().sin_cos();
        [cos * dx + sin * dy, -sin * dx + cos * dy, dz]
    }

    pub fn to_world(&self, q: [f64; 3]) -> [f64; 3] {
        let (sin, cos) = self.heading.to_radians().sin_cos();
        [
            self.center[0] + cos * q[0] - sin * q[1],
            self.center[1] + sin * q[0] + cos * q[1],
            self.center[2] + q[2],
        ]
    }

    fn in_hull_local(&self, q: [f64; 3]) -> bool {
        q[0].abs() <= self.length / 2.0
            && q[1].abs() <= self.width / 2.0
            && q[2].abs() <= self.height / 2.0
    }

    fn bay_z_range(&self) -> (f64, f64) {
        let floor = -self.height / 2.0;
        (floor, floor + self.bay_height)
    }

    fn in_bay_local(&self, q: [f64; 3]) -> bool {
        let (z0, z1) = self.bay_z_range();
        q[0].abs() <= self.bay_length / 2.0
            && q[1].abs() <= self.bay_width / 2.0
            && q[2] >= z0
            && q[2] <= z1
    }

    pub fn in_hull(&self, p: [f64; 3]) -> bool {
        self.in_hull_local(self.to_local(p))
    }

    pub fn in_bay(&self, p: [f64; 3]) -> bool {
        self.in_bay_local(self.to_local(p))
    }

    /// Solid material: inside the hull box and outside the bay void.
    pub fn is_solid(&self, p: [f64; 3]) -> bool {
        let q = self.to_local(p);
        self.in_hull_local(q) && !self.in_bay_local(q)
    }

    /// First node layer below the bay opening, within the bay footprint.
    pub fn in_opening_shell(&self, p: [f64; 3], dz: f64) -> bool {
        let q = self.to_local(p);
        let bottom = -self.height / 2.0;
        q[0].abs() <= self.bay_length / 2.0
            && q[1].abs() <= self.bay_width / 2.0
            && q[2] < bottom
            && q[2] >= bottom - dz
    }

    pub fn bay_center(&self) -> [f64; 3] {
        let (z0, z1) = self.bay_z_range();
        self.to_world([0.0, 0.0, (z0 + z1) / 2.0])
    }

    /// Midpoint of the stern face, where the wake starts.
    pub fn stern(&self) -> [f64; 3] {
        self.to_world([self.length / 2.0, 0.0, 0.0])
    }

    /// Planning goal: the non-solid node closest to the bay center.
    ///
    /// On coarse grids the node nearest the center can fall inside the hull
    /// walls; nearby nodes are then searched, ties going to the lower index.
    pub fn goal_node(&self, spec: &GridSpec) -> GridNode {
        const REACH: i64 = 3;
        let c = self.bay_center();
        let near = spec.nearest_node(c);
        if !self.is_solid(spec.position(near)) {
            return near;
        }
        let d2 = |p: [f64; 3]| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2);
        let mut best: Option<(f64, usize, GridNode)> = None;
        for dz in -REACH..=REACH {
            for dy in -REACH..=REACH {
                for dx in -REACH..=REACH {
                    let (x, y, z) = (near.ix as i64 + dx, near.iy as i64 + dy, near.iz as i64 + dz);
                    if !spec.contains_signed(x, y, z) {
                        continue;
                    }
                    let n = GridNode::new(x as usize, y as usize, z as usize);
                    let p = spec.position(n);
                    if self.is_solid(p) {
                        continue;
                    }
                    let key = (d2(p), spec.index(n), n);
                    if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                        best = Some(key);
                    }
                }
            }
        }
        best.map_or(near, |b| b.2)
    }
}
