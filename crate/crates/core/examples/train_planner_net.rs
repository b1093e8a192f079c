//! Trains the planner network on a small corpus, saves a checkpoint and
//! predicts a path for a held-out start.

use wakeplan::dataset::{generate_corpus, split_stratified, stratum, CorpusConfig, DomainConfig, NormStats, ScenarioGrid};
use wakeplan::mlp::{infer_path, load_checkpoint, save_checkpoint, train, TrainConfig};
use wakeplan::{GridSpec, HeuristicMode, PlannerConfig, Variant};

fn main() -> wakeplan::Result<()> {
    let cfg = CorpusConfig {
        domain: DomainConfig { grid: GridSpec::cube(20, 30.0)?, ..Default::default() },
        scenarios: ScenarioGrid { speeds: vec![0.5, 1.5, 3.0, 4.5], angles: vec![0.0, 30.0, 60.0], starts_per_field: 5, seed: 2 },
        planner: PlannerConfig::default().with_heuristic(HeuristicMode::AdmissibleMin),
        variants: vec![Variant::WakeInformed],
        ..Default::default()
    };
    let corpus = generate_corpus(&cfg)?;
    let (samples, _) = corpus.samples(Variant::WakeInformed);
    let strata: Vec<_> = samples.iter().map(|s| stratum(&s.scenario)).collect();
    let (tr, va) = split_stratified(&strata, 0.8, 0)?;
    let raw: Vec<_> = tr.iter().map(|&i| samples[i].clone()).collect();
    let norm = NormStats::fit(&raw)?;
    let train_set: Vec<_> = raw.iter().map(|s| norm.normalize(s)).collect();
    let val_set: Vec<_> = va.iter().map(|&i| norm.normalize(&samples[i])).collect();

    let tcfg = TrainConfig { lr: 1e-3, batch_size: 8, max_epochs: 150, patience: Some(20), ..Default::default() };
    let (model, report) = train(&train_set, &val_set, norm, &tcfg)?;
    println!(
        "{} train / {} val samples; best val loss {:.4} at epoch {}, stopped at {}",
        train_set.len(),
        val_set.len(),
        report.best_val,
        report.best_epoch,
        report.stopped_epoch
    );

    let dir = std::env::temp_dir().join("wakeplan_example_model");
    save_checkpoint(&dir, &model, &tcfg)?;
    let (model, _) = load_checkpoint(&dir)?;

    let held_out = &samples[va[0]];
    let spec = cfg.domain.grid;
    let rec = corpus.records.iter().find(|r| r.key() == held_out.key()).expect("sample comes from the corpus");
    let pred = infer_path(&model, spec.position(rec.start), spec.position(rec.goal), &rec.scenario, spec.spacing()[0])?;
    println!(
        "{} start {}: {} waypoints (planner {}), reached goal: {}, {:.1} us",
        rec.scenario_id,
        rec.start_index,
        pred.waypoints.len(),
        rec.nodes.len(),
        pred.reached_goal,
        1e6 * pred.wall_time
    );
    Ok(())
}
