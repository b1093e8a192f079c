//! Discretized flow environment: fluid speed magnitude and obstacle
//! occupancy on a regular 3D grid.

mod grid;
mod hull;
mod io;
mod wake;

use serde::{Deserialize, Serialize};

pub use grid::{GridNode, GridSpec};
pub use hull::HullModel;
pub use io::{field_from_bytes, field_to_bytes, read_field, write_field, MAGIC};
pub use wake::{make_wake_field, WakeShapeParams};

use crate::error::{Error, Result};
use crate::planner::PlannerConfig;

pub(crate) use grid::euclid_steps;

pub const MIN_FLOW_SPEED: f64 = 0.1;
pub const MAX_FLOW_SPEED: f64 = 5.0;
pub const MAX_FLOW_ANGLE: f64 = 60.0;

/// Freestream condition for one field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Freestream current magnitude, m/s.
    pub flow_speed: f64,
    /// Wake incidence angle, degrees.
    pub flow_angle: f64,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self { flow_speed: 1.0, flow_angle: 0.0, seed: 0 }
    }
}

impl ScenarioParams {
    pub fn new(flow_speed: f64, flow_angle: f64, seed: u64) -> Result<Self> {
        let s = Self { flow_speed, flow_angle, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        // Small slack so sweeps built by repeated addition (0.1 + 0.1 + ...) stay valid.
        let tol = 1e-9;
        if !(self.flow_speed >= MIN_FLOW_SPEED - tol && self.flow_speed <= MAX_FLOW_SPEED + tol) {
            return Err(Error::Config(format!(
                "flow speed {} outside [{MIN_FLOW_SPEED}, {MAX_FLOW_SPEED}] m/s",
                self.flow_speed
            )));
        }
        if !(self.flow_angle >= -tol && self.flow_angle <= MAX_FLOW_ANGLE + tol) {
            return Err(Error::Config(format!(
                "flow angle {} outside [0, {MAX_FLOW_ANGLE}] degrees",
                self.flow_angle
            )));
        }
        Ok(())
    }
}

/// Dense speed and occupancy arrays over a [`GridSpec`], x fastest.
///
/// Immutable after construction; the fingerprint is the CRC32 of the
/// serialized payload and identifies the field in [`FieldStats`] and metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    spec: GridSpec,
    speed: Vec<f64>,
    occupied: Vec<bool>,
    scenario: ScenarioParams,
    fingerprint: u32,
}

impl FlowField {
    pub fn from_parts(
        spec: GridSpec,
        speed: Vec<f64>,
        occupied: Vec<bool>,
        scenario: ScenarioParams,
    ) -> Result<Self> {
        spec.validate()?;
        let n = spec.len();
        if speed.len() != n || occupied.len() != n {
            return Err(Error::Shape(format!(
                "field arrays have {} speeds and {} flags, grid needs {n}",
                speed.len(),
                occupied.len()
            )));
        }
        if let Some(bad) = speed.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!(
                "speed {} at {} is not a finite non-negative value",
                speed[bad],
                spec.node(bad)
            )));
        }
        let fingerprint = io::payload_crc(&speed, &occupied);
        Ok(Self { spec, speed, occupied, scenario, fingerprint })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn scenario(&self) -> &ScenarioParams {
        &self.scenario
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speed
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn fingerprint(&self) -> u32 {
        self.fingerprint
    }

    #[inline]
    pub fn speed_at(&self, node: GridNode) -> f64 {
        self.speed[self.spec.index(node)]
    }

    #[inline]
    pub fn is_occupied(&self, node: GridNode) -> bool {
        self.occupied[self.spec.index(node)]
    }

    pub fn free_count(&self) -> usize {
        self.occupied.iter().filter(|o| !**o).count()
    }

    pub fn min_max_speed(&self) -> (f64, f64) {
        self.speed
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Field with every node at the freestream speed and no obstacles.
pub fn make_uniform_field(spec: GridSpec, scenario: ScenarioParams) -> Result<FlowField> {
    spec.validate()?;
    scenario.validate()?;
    let n = spec.len();
    FlowField::from_parts(spec, vec![scenario.flow_speed; n], vec![false; n], scenario)
}

/// Removes the wake: every traversable node gets the freestream speed,
/// occupancy is kept as is.
pub fn strip_wake(field: &FlowField) -> FlowField {
    let u = field.scenario.flow_speed;
    let speed = field
        .speed
        .iter()
        .zip(&field.occupied)
        .map(|(&v, &occ)| if occ { v } else { u })
        .collect();
    FlowField::from_parts(field.spec, speed, field.occupied.clone(), field.scenario)
        .expect("stripping preserves field invariants")
}

/// Summary statistics over the traversable nodes of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub median_speed: f64,
    /// Population standard deviation.
    pub std_speed: f64,
    pub mean_speed: f64,
    /// Mean of `omega1 * F_D(v)` over traversable nodes, N (J per meter).
    pub mean_energy_rate: f64,
    /// Minimum of `omega1 * F_D(v)` over traversable nodes.
    pub min_energy_rate: f64,
    pub free_nodes: usize,
    /// Fingerprint of the field these statistics describe.
    pub field_id: u32,
}

impl FieldStats {
    /// Speed at or above which a node counts as high-velocity.
    pub fn high_velocity_threshold(&self) -> f64 {
        self.median_speed + self.std_speed
    }
}

/// Mean and minimum energy rate over traversable nodes, in index order.
///
/// The mean is accumulated as an offset from the minimum so that a constant
/// field yields mean == min exactly.
pub(crate) fn energy_rate_summary(field: &FlowField, cfg: &PlannerConfig) -> Option<(f64, f64)> {
    let free = || field.speed.iter().zip(&field.occupied).filter(|(_, &occ)| !occ).map(|(&v, _)| cfg.energy_rate(v));
    let min = free().fold(f64::INFINITY, f64::min);
    let mut offset = 0.0;
    let mut count = 0usize;
    for rate in free() {
        offset += rate - min;
        count += 1;
    }
    (count > 0).then(|| (min + offset / count as f64, min))
}

pub fn field_stats(field: &FlowField, cfg: &PlannerConfig) -> Result<FieldStats> {
    let mut free: Vec<f64> = field
        .speed
        .iter()
        .zip(&field.occupied)
        .filter(|(_, occ)| !**occ)
        .map(|(v, _)| *v)
        .collect();
    if free.is_empty() {
        return Err(Error::EmptyField);
    }
    let n = free.len() as f64;
    let mean = free.iter().sum::<f64>() / n;
    let var = free.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let (mean_rate, min_rate) = energy_rate_summary(field, cfg).ok_or(Error::EmptyField)?;
    let median = median_in_place(&mut free);
    Ok(FieldStats {
        median_speed: median,
        std_speed: var.sqrt(),
        mean_speed: mean,
        mean_energy_rate: mean_rate,
        min_energy_rate: min_rate,
        free_nodes: free.len(),
        field_id: field.fingerprint,
    })
}

/// Median of a non-empty slice; even counts average the two middle values.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower_max + upper) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(speed: f64) -> ScenarioParams {
        ScenarioParams::new(speed, 0.0, 7).unwrap()
    }

    #[test]
    fn uniform_field_is_constant() {
        let f = make_uniform_field(GridSpec::cube(8, 10.0).unwrap(), scenario(1.0)).unwrap();
        assert_eq!(f.speeds().len(), 512);
        assert!(f.speeds().iter().all(|&v| v == 1.0));
        assert!(f.occupancy().iter().all(|&o| !o));
    }

    #[test]
    fn uniform_desk_grid_min_equals_max() {
        let f = make_uniform_field(GridSpec::default(), scenario(0.1)).unwrap();
        assert_eq!(f.min_max_speed(), (0.1, 0.1));
    }

    #[test]
    fn uniform_field_rejects_bad_spec() {
        let spec = GridSpec { nx: 1, ny: 8, nz: 8, extent: 10.0 };
        assert!(matches!(make_uniform_field(spec, scenario(1.0)), Err(Error::Config(_))));
    }

    #[test]
    fn scenario_ranges() {
        assert!(ScenarioParams::new(0.05, 0.0, 0).is_err());
        assert!(ScenarioParams::new(5.1, 0.0, 0).is_err());
        assert!(ScenarioParams::new(1.0, 61.0, 0).is_err());
        assert!(ScenarioParams::new(0.1, 60.0, 0).is_ok());
        assert!(ScenarioParams::new(5.0, 0.0, 0).is_ok());
    }

    #[test]
    fn stats_of_uniform_field() {
        let f = make_uniform_field(GridSpec::cube(6, 10.0).unwrap(), scenario(2.0)).unwrap();
        let stats = field_stats(&f, &PlannerConfig::default()).unwrap();
        assert_eq!(stats.std_speed, 0.0);
        assert_eq!(stats.median_speed, 2.0);
        // 0.5 * 1025.1627 * 2^2 * 0.15 * 0.051
        assert!((stats.mean_energy_rate - 15.684989309999999).abs() < 1e-12);
        let cfg = PlannerConfig { omega1: 3.0, ..Default::default() };
        let stats = field_stats(&f, &cfg).unwrap();
        assert!((stats.mean_energy_rate - 3.0 * 15.684989309999999).abs() < 1e-11);
    }

    #[test]
    fn small_sample_median_and_mean() {
        let spec = GridSpec::new(2, 2, 1 + 1, 1.0).unwrap();
        let speed = vec![1.0, 1.0, 1.0, 3.0, 9.0, 9.0, 9.0, 9.0];
        let occ = vec![false, false, false, false, true, true, true, true];
        let f = FlowField::from_parts(spec, speed, occ, scenario(1.0)).unwrap();
        let stats = field_stats(&f, &PlannerConfig::default()).unwrap();
        assert_eq!(stats.median_speed, 1.0);
        assert_eq!(stats.mean_speed, 1.5);
        assert_eq!(stats.free_nodes, 4);
        // population std of {1,1,1,3}
        assert!((stats.std_speed - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fully_occupied_field_has_no_stats() {
        let spec = GridSpec::cube(2, 1.0).unwrap();
        let f = FlowField::from_parts(spec, vec![1.0; 8], vec![true; 8], scenario(1.0)).unwrap();
        assert!(matches!(field_stats(&f, &PlannerConfig::default()), Err(Error::EmptyField)));
    }

    #[test]
    fn rejects_negative_or_nan_speed() {
        let spec = GridSpec::cube(2, 1.0).unwrap();
        let mut speed = vec![1.0; 8];
        speed[3] = -0.5;
        assert!(FlowField::from_parts(spec, speed.clone(), vec![false; 8], scenario(1.0)).is_err());
        speed[3] = f64::NAN;
        assert!(FlowField::from_parts(spec, speed, vec![false; 8], scenario(1.0)).is_err());
    }

    #[test]
    fn strip_keeps_occupancy_and_is_idempotent() {
        let spec = GridSpec::cube(3, 2.0).unwrap();
        let speed: Vec<f64> = (0..27).map(|i| i as f64 * 0.1).collect();
        let occ: Vec<bool> = (0..27).map(|i| i % 5 == 0).collect();
        let f = FlowField::from_parts(spec, speed, occ.clone(), scenario(1.0)).unwrap();
        let s = strip_wake(&f);
        assert_eq!(s.occupancy(), &occ[..]);
        for i in 0..27 {
            if !occ[i] {
                assert_eq!(s.speeds()[i], 1.0);
            }
        }
        assert_eq!(strip_wake(&s), s);
        let stats = field_stats(&s, &PlannerConfig::default()).unwrap();
        assert_eq!(stats.std_speed, 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_in_place(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median_in_place(&mut [5.0]), 5.0);
    }
}
