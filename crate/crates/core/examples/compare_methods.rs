//! Four-way comparison table of both planners and their networks.

use std::collections::HashSet;

use wakeplan::bench::{emit_distribution_data, energy_gap, evaluate_nn, run_comparison, Method};
use wakeplan::dataset::{generate_corpus, split_stratified, stratum, CorpusConfig, DomainConfig, MetricsRow, NormStats, ScenarioGrid};
use wakeplan::mlp::{train, TrainConfig};
use wakeplan::{GridSpec, HeuristicMode, PlannerConfig, Variant};

fn main() -> wakeplan::Result<()> {
    let cfg = CorpusConfig {
        domain: DomainConfig { grid: GridSpec::cube(20, 30.0)?, ..Default::default() },
        scenarios: ScenarioGrid { speeds: vec![0.3, 0.8, 1.5, 2.5, 3.5, 4.5], angles: vec![0.0, 30.0, 60.0], starts_per_field: 5, seed: 4 },
        planner: PlannerConfig::default().with_heuristic(HeuristicMode::AdmissibleMin),
        ..Default::default()
    };
    let corpus = generate_corpus(&cfg)?;
    let tcfg = TrainConfig { lr: 1e-3, batch_size: 8, max_epochs: 100, patience: Some(15), ..Default::default() };

    let mut inputs = Vec::new();
    let mut val_keys: Option<HashSet<(String, usize)>> = None;
    for variant in Variant::ALL {
        let (samples, _) = corpus.samples(variant);
        let strata: Vec<_> = samples.iter().map(|s| stratum(&s.scenario)).collect();
        let (tr, va) = split_stratified(&strata, 0.8, 0)?;
        let raw: Vec<_> = tr.iter().map(|&i| samples[i].clone()).collect();
        let norm = NormStats::fit(&raw)?;
        let train_set: Vec<_> = raw.iter().map(|s| norm.normalize(s)).collect();
        let val_set: Vec<_> = va.iter().map(|&i| norm.normalize(&samples[i])).collect();
        let (model, _) = train(&train_set, &val_set, norm, &tcfg)?;
        // Both variants share starts, so the split keys coincide.
        let keys = val_keys.get_or_insert_with(|| va.iter().map(|&i| samples[i].key()).collect());
        let astar_rows: Vec<MetricsRow> =
            corpus.records_for(variant).filter(|r| keys.contains(&r.key())).map(MetricsRow::from_record).collect();
        let nn_rows = evaluate_nn(&model, &corpus, true, |k| keys.contains(k))?;
        if let Some(g) = energy_gap(&nn_rows, &astar_rows) {
            println!("{variant}: network paths use {:+.1}% energy over {} pairs", g.percent, g.pairs);
        }
        inputs.push((Method::astar(variant), astar_rows));
        inputs.push((Method::nn(variant), nn_rows));
    }
    inputs.sort_by_key(|(m, _)| *m);
    let tables = run_comparison(&inputs)?;
    println!("{}", tables.to_markdown());
    let cells = emit_distribution_data(&inputs.iter().find(|(m, _)| *m == Method::WiAstar).expect("present").1);
    println!("{} (speed, angle) cells of distribution data", cells.len());
    Ok(())
}
