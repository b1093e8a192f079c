//! Generates a small path corpus for both variants and writes it to disk.

use wakeplan::dataset::{generate_corpus, read_corpus, write_corpus, CorpusConfig, DomainConfig, ScenarioGrid};
use wakeplan::{GridSpec, HeuristicMode, PlannerConfig};

fn main() -> wakeplan::Result<()> {
    let cfg = CorpusConfig {
        domain: DomainConfig { grid: GridSpec::cube(24, 30.0)?, ..Default::default() },
        scenarios: ScenarioGrid { speeds: vec![0.5, 2.0, 4.0], angles: vec![0.0, 30.0], starts_per_field: 4, seed: 5 },
        planner: PlannerConfig::default().with_heuristic(HeuristicMode::AdmissibleMin),
        ..Default::default()
    };
    let corpus = generate_corpus(&cfg)?;
    for c in &corpus.manifest().counts {
        println!("{}: {} paths, {} failures", c.variant, c.paths, c.failures);
    }
    let dir = std::env::temp_dir().join("wakeplan_example_corpus");
    write_corpus(&dir, &corpus)?;
    let back = read_corpus(&dir)?;
    assert_eq!(back.records, corpus.records);
    println!("wrote {}", dir.display());
    Ok(())
}
