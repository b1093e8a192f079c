//! Analytic stand-in for CFD wake data: freestream background plus an
//! axisymmetric decaying jet behind the stern.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FlowField, GridSpec, HullModel, ScenarioParams};
use crate::error::{Error, Result};

/// Shape of the synthetic jet wake.
///
/// Excess speed over the freestream `U` at axial distance `s` behind the
/// stern and radial distance `r` from the wake axis:
///
/// ```text
/// (k_peak - 1) U (1 + s/decay_length)^-decay_exponent (1 - (s/wake_length)^2)^2 exp(-r^2 / 2w^2)
/// w = radial_width + spread_rate * s
/// ```
///
/// and zero upstream of the stern or beyond `wake_length`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WakeShapeParams {
    /// Centerline peak speed as a multiple of the freestream speed.
    pub k_peak: f64,
    /// Gaussian radius at the stern, meters.
    pub radial_width: f64,
    /// Radius growth per meter downstream.
    pub spread_rate: f64,
    pub decay_length: f64,
    pub decay_exponent: f64,
    /// Wake influence ends this far behind the stern, meters.
    pub wake_length: f64,
    /// Relative amplitude of seeded multiplicative jitter; 0 disables it.
    pub noise: f64,
}

impl Default for WakeShapeParams {
    fn default() -> Self {
        Self {
            k_peak: 2.0,
            radial_width: 5.0,
            spread_rate: 0.08,
            decay_length: 20.0,
            decay_exponent: 1.0,
            wake_length: 120.0,
            noise: 0.0,
        }
    }
}

impl WakeShapeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k_peak", self.k_peak),
            ("radial_width", self.radial_width),
            ("decay_length", self.decay_length),
            ("wake_length", self.wake_length),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("wake {name} must be positive, got {v}")));
            }
        }
        if self.k_peak < 1.0 {
            return Err(Error::Config(format!("wake k_peak must be >= 1, got {}", self.k_peak)));
        }
        for (name, v) in [
            ("spread_rate", self.spread_rate),
            ("decay_exponent", self.decay_exponent),
            ("noise", self.noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("wake {name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Excess speed factor (multiple of `U`) at axial/radial offsets.
    pub fn excess_factor(&self, s: f64, r: f64) -> f64 {
        if !(0.0..self.wake_length).contains(&s) {
            return 0.0;
        }
        let w = self.radial_width + self.spread_rate * s;
        let axial = (1.0 + s / self.decay_length).powf(-self.decay_exponent);
        let t = s / self.wake_length;
        let taper = (1.0 - t * t) * (1.0 - t * t);
        (self.k_peak - 1.0) * axial * taper * (-(r * r) / (2.0 * w * w)).exp()
    }
}

/// Builds a wake-bearing field around `hull`.
///
/// The wake axis leaves the stern along the hull's +x direction rotated by
/// `flow_angle` about the vertical. Solid hull nodes get speed 0; the node
/// layer under the bay opening gets half the freestream speed.
pub fn make_wake_field(
    spec: GridSpec,
    scenario: ScenarioParams,
    hull: &HullModel,
    wake: &WakeShapeParams,
) -> Result<FlowField> {
    spec.validate()?;
    scenario.validate()?;
    wake.validate()?;
    hull.check_fits(&spec)?;

    let u = scenario.flow_speed;
    let stern = hull.stern();
    let (sin, cos) = (hull.heading + scenario.flow_angle).to_radians().sin_cos();
    let axis = [cos, sin, 0.0];
    let dz = spec.spacing()[2];
    let cap = wake.k_peak * u;
    let mut rng = (wake.noise > 0.0).then(|| ChaCha8Rng::seed_from_u64(scenario.seed));

    let n = spec.len();
    let mut speed = Vec::with_capacity(n);
    let mut occupied = Vec::with_capacity(n);
    for i in 0..n {
        let p = spec.position(spec.node(i));
        if hull.is_solid(p) {
            speed.push(0.0);
            occupied.push(true);
            continue;
        }
        occupied.push(false);
        if hull.in_opening_shell(p, dz) {
            speed.push(0.5 * u);
            continue;
        }
        let rel = [p[0] - stern[0], p[1] - stern[1], p[2] - stern[2]];
        let s = rel[0] * axis[0] + rel[1] * axis[1];
        let radial = [rel[0] - s * axis[0], rel[1] - s * axis[1], rel[2]];
        let r = (radial[0] * radial[0] + radial[1] * radial[1] + radial[2] * radial[2]).sqrt();
        let mut v = u + u * wake.excess_factor(s, r);
        if let Some(rng) = rng.as_mut() {
            let jitter: f64 = rng.gen_range(-1.0..=1.0);
            v = (v * (1.0 + wake.noise * jitter)).clamp(0.0, cap);
        }
        speed.push(v);
    }
    FlowField::from_parts(spec, speed, occupied, scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::GridNode;

    fn desk() -> (GridSpec, HullModel) {
        let spec = GridSpec::cube(33, 40.0).unwrap();
        (spec, HullModel::centered(&spec))
    }

    #[test]
    fn peak_is_bounded_by_k_peak() {
        let (spec, hull) = desk();
        let sc = ScenarioParams::new(1.0, 0.0, 1).unwrap();
        let f = make_wake_field(spec, sc, &hull, &WakeShapeParams::default()).unwrap();
        let (_, max) = f.min_max_speed();
        assert!(max > 1.0 && max <= 2.0, "max {max}");
    }

    #[test]
    fn zero_angle_wake_is_mirror_symmetric() {
        let (spec, hull) = desk();
        let sc = ScenarioParams::new(1.3, 0.0, 1).unwrap();
        let f = make_wake_field(spec, sc, &hull, &WakeShapeParams::default()).unwrap();
        for iz in 0..spec.nz {
            for iy in 0..spec.ny {
                for ix in 0..spec.nx {
                    let a = GridNode::new(ix, iy, iz);
                    let b = GridNode::new(ix, spec.ny - 1 - iy, iz);
                    assert!((f.speed_at(a) - f.speed_at(b)).abs() <= 1e-9);
                    assert_eq!(f.is_occupied(a), f.is_occupied(b));
                }
            }
        }
    }

    #[test]
    fn deterministic_for_seed_even_with_noise() {
        let (spec, hull) = desk();
        let wake = WakeShapeParams { noise: 0.01, ..Default::default() };
        let sc = ScenarioParams::new(2.0, 30.0, 99).unwrap();
        let a = make_wake_field(spec, sc, &hull, &wake).unwrap();
        let b = make_wake_field(spec, sc, &hull, &wake).unwrap();
        assert_eq!(a, b);
        let c = make_wake_field(spec, ScenarioParams { seed: 100, ..sc }, &hull, &wake).unwrap();
        assert_ne!(a.speeds(), c.speeds());
        let (_, max) = a.min_max_speed();
        assert!(max <= wake.k_peak * 2.0 + 1e-9);
    }

    #[test]
    fn freestream_recovered_beyond_wake_length() {
        let spec = GridSpec::cube(41, 80.0).unwrap();
        let hull = HullModel::centered(&spec);
        let wake = WakeShapeParams { wake_length: 20.0, ..Default::default() };
        let sc = ScenarioParams::new(1.0, 0.0, 0).unwrap();
        let f = make_wake_field(spec, sc, &hull, &wake).unwrap();
        let stern_x = hull.stern()[0];
        let mut checked = 0;
        for i in 0..spec.len() {
            let p = spec.position(spec.node(i));
            if p[0] - stern_x >= wake.wake_length {
                assert!((f.speeds()[i] - 1.0).abs() <= 0.01);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn hull_outside_domain_is_a_geometry_error() {
        let spec = GridSpec::cube(16, 20.0).unwrap();
        let hull = HullModel::centered(&spec);
        let sc = ScenarioParams::new(1.0, 0.0, 0).unwrap();
        let err = make_wake_field(spec, sc, &hull, &WakeShapeParams::default()).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn goal_is_free_and_shell_is_slow() {
        let spec = GridSpec::default();
        let hull = HullModel::centered(&spec);
        let sc = ScenarioParams::new(2.0, 0.0, 0).unwrap();
        let f = make_wake_field(spec, sc, &hull, &WakeShapeParams::default()).unwrap();
        let goal = hull.goal_node(&spec);
        assert!(!f.is_occupied(goal));
        let shell = (0..spec.len())
            .filter(|&i| hull.in_opening_shell(spec.position(spec.node(i)), spec.spacing()[2]))
            .collect::<Vec<_>>();
        assert!(!shell.is_empty());
        assert!(shell.iter().all(|&i| f.speeds()[i] == 1.0));
        assert!(f.occupancy().iter().any(|&o| o));
    }
}
