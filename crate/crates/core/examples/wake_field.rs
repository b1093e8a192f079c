//! Builds a wake-bearing field, prints its statistics and round-trips it
//! through the binary field format.

use wakeplan::{field_stats, make_wake_field, read_field, strip_wake, write_field, GridSpec, HullModel, PlannerConfig, ScenarioParams, WakeShapeParams};

fn main() -> wakeplan::Result<()> {
    let spec = GridSpec::cube(32, 40.0)?;
    let hull = HullModel::centered(&spec);
    let scenario = ScenarioParams::new(2.0, 30.0, 7)?;
    let field = make_wake_field(spec, scenario, &hull, &WakeShapeParams::default())?;
    let stats = field_stats(&field, &PlannerConfig::default())?;
    let (vmin, vmax) = field.min_max_speed();
    println!("grid {:?}, spacing {:.3} m", spec.dims(), spec.spacing()[0]);
    println!("free nodes {} of {}", stats.free_nodes, spec.len());
    println!("speed min {vmin:.3}  median {:.3}  max {vmax:.3} m/s", stats.median_speed);
    println!("high-velocity threshold {:.3} m/s", stats.high_velocity_threshold());

    let freestream = strip_wake(&field);
    println!("freestream copy: max speed {:.3} m/s", freestream.min_max_speed().1);

    let path = std::env::temp_dir().join("wakeplan_example_field.wpf");
    write_field(&path, &field)?;
    let back = read_field(&path)?;
    assert_eq!(back, field);
    println!("round trip through {} ok, fingerprint {:08x}", path.display(), back.fingerprint());
    std::fs::remove_file(&path)?;
    Ok(())
}
