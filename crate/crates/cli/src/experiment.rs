//! Static-rebuild and dynamic-reuse pipelines over a sequence of snapshots.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use dimp_core::graph::{
    apply_update_batch, assign_wc_weights, generate_random_updates, load_edge_list_path,
};
use dimp_core::oracle::estimate_influence_mc;
use dimp_core::rng::{derive_seed, purpose, stream};
use dimp_core::rr::build_collection;
use dimp_core::select::decide_sample_size;
use dimp_core::{
    greedy_select, mix_collection, Graph, MixConfig, MixStats, RRCollection, UpdateBatch,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, WeightModel};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "static")]
    Static,
    #[serde(rename = "dynamic-reuse")]
    DynamicReuse,
}

/// One row of `runs.csv`. Rows are keyed by algorithm, repeat, update count
/// and timestep; timestep 0 is the unchanged input graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub repeat: usize,
    pub update_count: usize,
    pub timestep: usize,
    pub sample_size: usize,
    pub influence_mc_mean: f64,
    pub influence_mc_stderr: f64,
    pub rr_estimate: f64,
    pub kept: Option<usize>,
    pub resampled_accepted: Option<usize>,
    pub fresh: Option<usize>,
    pub kept_fraction: Option<f64>,
    /// Original node ids separated by spaces, in selection order.
    pub seeds: String,
    /// Collection build or mix plus seed selection. Excludes graph loading,
    /// update application and Monte Carlo evaluation.
    pub wall_time_ms: f64,
}

/// Loads the configured edge list and assigns weights.
pub fn load_graph(cfg: &ExperimentConfig) -> Result<Graph, CliError> {
    if cfg.graph_path.as_os_str().is_empty() {
        return Err(CliError::Config("graph_path is required".into()));
    }
    if !cfg.graph_path.is_file() {
        return Err(CliError::io(
            &cfg.graph_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "graph file not found"),
        ));
    }
    let report = load_edge_list_path(&cfg.graph_path)?;
    match cfg.weight_model {
        WeightModel::Wc => Ok(assign_wc_weights(&report.graph)),
    }
}

/// Batch taking snapshot `timestep - 1` to `timestep`. Static and dynamic
/// runs draw from the same stream, so they see identical graph sequences.
pub fn update_batch(
    cfg: &ExperimentConfig,
    g: &Graph,
    repeat: usize,
    update_count: usize,
    timestep: usize,
) -> Result<UpdateBatch, CliError> {
    let mut rng = stream(
        cfg.master_seed,
        &[
            purpose::UPDATES,
            repeat as u64,
            update_count as u64,
            timestep as u64,
        ],
    );
    if update_count > g.edge_count() {
        return Err(CliError::Argument(format!(
            "{update_count} updates requested but the graph has {} edges",
            g.edge_count()
        )));
    }
    Ok(generate_random_updates(g, update_count, &mut rng)?)
}

fn mc_seed(cfg: &ExperimentConfig, repeat: usize, update_count: usize, timestep: usize) -> u64 {
    if timestep == 0 {
        derive_seed(cfg.master_seed, &[purpose::MONTE_CARLO, repeat as u64])
    } else {
        derive_seed(
            cfg.master_seed,
            &[
                purpose::MONTE_CARLO,
                repeat as u64,
                update_count as u64,
                timestep as u64,
            ],
        )
    }
}

struct Snapshot {
    sample_size: usize,
    collection: RRCollection,
    record: RunRecord,
}

/// Timestep 0, shared by both pipelines of one repeat.
fn initial_snapshot(
    cfg: &ExperimentConfig,
    g: &Graph,
    repeat: usize,
    algorithm: Algorithm,
) -> Result<Snapshot, CliError> {
    let r = repeat as u64;
    let policy = cfg.sample_size_policy();
    let sample_size = decide_sample_size(
        g,
        cfg.k,
        &policy,
        derive_seed(cfg.master_seed, &[purpose::SAMPLE_SIZE, r]),
    )?;
    let start = Instant::now();
    let collection = build_collection(
        g,
        sample_size,
        derive_seed(cfg.master_seed, &[purpose::BUILD, r]),
    )?;
    let selection = greedy_select(&collection, cfg.k)?;
    let elapsed = ms_since(start);
    let record = evaluate(
        cfg,
        g,
        algorithm,
        repeat,
        0,
        0,
        sample_size,
        &selection,
        None,
        elapsed,
    )?;
    Ok(Snapshot {
        sample_size,
        collection,
        record,
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    cfg: &ExperimentConfig,
    g: &Graph,
    algorithm: Algorithm,
    repeat: usize,
    update_count: usize,
    timestep: usize,
    sample_size: usize,
    selection: &dimp_core::SelectionResult,
    reuse: Option<(MixStats, usize)>,
    wall_time_ms: f64,
) -> Result<RunRecord, CliError> {
    let mc = estimate_influence_mc(
        g,
        &selection.seeds,
        cfg.r_mc,
        mc_seed(cfg, repeat, update_count, timestep),
    )?;
    let seeds = selection
        .seeds
        .iter()
        .map(|&v| g.original_id(v).to_string())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(RunRecord {
        algorithm,
        repeat,
        update_count,
        timestep,
        sample_size,
        influence_mc_mean: mc.mean,
        influence_mc_stderr: mc.stderr,
        rr_estimate: selection.rr_influence_estimate,
        kept: reuse.map(|(s, _)| s.kept),
        resampled_accepted: reuse.map(|(s, _)| s.resampled_accepted),
        fresh: reuse.map(|(s, _)| s.fresh),
        kept_fraction: reuse.map(|(s, old_len)| s.kept_fraction(old_len)),
        seeds,
        wall_time_ms,
    })
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Rebuilds the collection from scratch at every snapshot.
pub fn run_static(cfg: &ExperimentConfig, g0: &Graph) -> Result<Vec<RunRecord>, CliError> {
    cfg.validate()?;
    let mut records = Vec::new();
    for repeat in 0..cfg.repeats {
        let initial = initial_snapshot(cfg, g0, repeat, Algorithm::Static)?;
        for &u in &cfg.update_counts {
            records.push(RunRecord {
                update_count: u,
                ..initial.record.clone()
            });
            let build_seed =
                derive_seed(cfg.master_seed, &[purpose::BUILD, repeat as u64, u as u64]);
            let mut g = g0.clone();
            for t in 1..=cfg.timesteps {
                let batch = update_batch(cfg, &g, repeat, u, t)?;
                g = apply_update_batch(&g, &batch)?;
                let start = Instant::now();
                let collection = build_collection(&g, initial.sample_size, build_seed)?;
                let selection = greedy_select(&collection, cfg.k)?;
                let elapsed = ms_since(start);
                records.push(evaluate(
                    cfg,
                    &g,
                    Algorithm::Static,
                    repeat,
                    u,
                    t,
                    initial.sample_size,
                    &selection,
                    None,
                    elapsed,
                )?);
            }
        }
    }
    Ok(records)
}

/// Carries the timestep-0 collection through each batch by mixing. When
/// `collections_dir` is set, every collection is written there as JSON.
pub fn run_dynamic(
    cfg: &ExperimentConfig,
    g0: &Graph,
    collections_dir: Option<&Path>,
) -> Result<Vec<RunRecord>, CliError> {
    cfg.validate()?;
    if let Some(dir) = collections_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut records = Vec::new();
    for repeat in 0..cfg.repeats {
        let initial = initial_snapshot(cfg, g0, repeat, Algorithm::DynamicReuse)?;
        for &u in &cfg.update_counts {
            records.push(RunRecord {
                update_count: u,
                ..initial.record.clone()
            });
            let mix_config = MixConfig {
                lambda: cfg.lambda,
                seed: derive_seed(cfg.master_seed, &[purpose::MIX, repeat as u64, u as u64]),
            };
            let mut g = g0.clone();
            let mut collection = initial.collection.clone();
            save(collections_dir, &collection, repeat, u, 0)?;
            for t in 1..=cfg.timesteps {
                let batch = update_batch(cfg, &g, repeat, u, t)?;
                g = apply_update_batch(&g, &batch)?;
                let old_len = collection.len();
                let start = Instant::now();
                let outcome =
                    mix_collection(collection, &g, &batch, initial.sample_size, mix_config)?;
                let selection = greedy_select(&outcome.collection, cfg.k)?;
                let elapsed = ms_since(start);
                collection = outcome.collection;
                save(collections_dir, &collection, repeat, u, t)?;
                records.push(evaluate(
                    cfg,
                    &g,
                    Algorithm::DynamicReuse,
                    repeat,
                    u,
                    t,
                    initial.sample_size,
                    &selection,
                    Some((outcome.stats, old_len)),
                    elapsed,
                )?);
            }
        }
    }
    Ok(records)
}

fn save(
    dir: Option<&Path>,
    c: &RRCollection,
    repeat: usize,
    update_count: usize,
    timestep: usize,
) -> Result<(), CliError> {
    let Some(dir) = dir else {
        return Ok(());
    };
    let path = dir.join(format!("rr_r{repeat}_u{update_count}_t{timestep}.json"));
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    c.write_json(BufWriter::new(file))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dimp_core::oracle::exact_influence_bruteforce;

    fn tiny() -> Graph {
        Graph::from_weighted_edges(4, &[(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.4), (2, 3, 0.4)])
            .unwrap()
    }

    fn cfg(update_counts: Vec<usize>, repeats: usize) -> ExperimentConfig {
        ExperimentConfig {
            k: 1,
            r_mc: 20_000,
            repeats,
            update_counts,
            sample_size: 5_000,
            master_seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn static_record_matches_bruteforce() {
        let g = tiny();
        let records = run_static(&cfg(vec![1], 1), &g).unwrap();
        assert_eq!(records.len(), 2);
        let r0 = &records[0];
        assert_eq!(r0.timestep, 0);
        assert_eq!(r0.seeds, "0");
        let exact = exact_influence_bruteforce(&g, &[0]).unwrap();
        assert!((r0.influence_mc_mean - exact).abs() <= 4.0 * r0.influence_mc_stderr);
        assert!(r0.kept.is_none());
    }

    #[test]
    fn repeats_use_distinct_streams() {
        let records = run_static(&cfg(vec![1], 3), &tiny()).unwrap();
        let t0: Vec<&RunRecord> = records.iter().filter(|r| r.timestep == 0).collect();
        assert_eq!(t0.len(), 3);
        assert!(
            t0[0].influence_mc_mean != t0[1].influence_mc_mean
                || t0[1].influence_mc_mean != t0[2].influence_mc_mean
        );
    }

    #[test]
    fn empty_batch_keeps_everything() {
        let records = run_dynamic(&cfg(vec![0], 1), &tiny(), None).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].kept_fraction, Some(1.0));
        assert_eq!(records[1].seeds, records[0].seeds);
        assert_eq!(records[1].rr_estimate, records[0].rr_estimate);
    }

    #[test]
    fn timestep_zero_agrees_across_pipelines() {
        let c = cfg(vec![1, 2], 2);
        let g = tiny();
        let s = run_static(&c, &g).unwrap();
        let d = run_dynamic(&c, &g, None).unwrap();
        assert_eq!(s.len(), d.len());
        for (a, b) in s.iter().zip(&d).filter(|(a, _)| a.timestep == 0) {
            assert_eq!(a.seeds, b.seeds);
            assert_eq!(a.influence_mc_mean, b.influence_mc_mean);
            assert_eq!(b.timestep, 0);
        }
    }

    #[test]
    fn dynamic_tracks_static_on_two_in_edges() {
        let g = Graph::from_weighted_edges(3, &[(0, 2, 0.5), (1, 2, 0.5)]).unwrap();
        let c = ExperimentConfig {
            k: 1,
            r_mc: 20_000,
            repeats: 1,
            update_counts: vec![1],
            sample_size: 20_000,
            master_seed: 5,
            ..ExperimentConfig::default()
        };
        let s = run_static(&c, &g).unwrap();
        let d = run_dynamic(&c, &g, None).unwrap();
        let (a, b) = (&s[1], &d[1]);
        let sigma = (a.influence_mc_stderr.powi(2) + b.influence_mc_stderr.powi(2)).sqrt();
        assert!((a.influence_mc_mean - b.influence_mc_mean).abs() <= 4.0 * sigma + 1e-12);
    }

    #[test]
    fn oversized_batch_is_an_argument_error() {
        let err = run_static(&cfg(vec![5], 1), &tiny()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn collections_are_persisted() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(vec![1], 1);
        c.timesteps = 2;
        run_dynamic(&c, &tiny(), Some(dir.path())).unwrap();
        let last = dir.path().join("rr_r0_u1_t2.json");
        let back = RRCollection::read_json(File::open(last).unwrap()).unwrap();
        assert_eq!(back.len(), 5_000);
        assert_eq!(back.graph_version(), 2);
    }
}
