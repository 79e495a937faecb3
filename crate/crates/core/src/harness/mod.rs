//! Reproducible experiments behind the `couette` CLI.
//!
//! Each `cmd_*` function validates an [`ExperimentConfig`], runs one
//! experiment and writes its artifacts into `config.output.dir`. Every CSV
//! starts with a `# config=<json>` line and every JSON document carries
//! `config` and `seed` keys, so any file can be traced back to the exact
//! run that produced it.

mod compare;
mod config;
mod sweep;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kmc::{self, RunOptions, SimOptions, SimReport};
use crate::lattice::{self, Params};
use crate::moments::{self, MarginalProfile};
use crate::oracle;
use crate::rng;
use crate::stationary::{self, RegimeReport, StationaryProfile};

pub use compare::{cmd_compare, CompareReport, MethodResult, PairResult, Rule};
pub use config::{CompareSpec, EpsilonRule, ExperimentConfig, Method, OutputSpec, Overrides, RunControls, SweepPoint, SweepSpec};
pub use sweep::{cmd_sweep, SweepRow, SweepSummary, SweepSummaryEntry};

/// Result of a command plus the files it wrote.
#[derive(Debug, Clone)]
pub struct Artifacts<T> {
    pub result: T,
    pub files: Vec<PathBuf>,
}

/// Rayon pool with `workers` threads (`0`: one per core).
pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

fn warn_params(params: &Params) {
    for w in params.warnings() {
        log::warn!("{w}");
    }
}

fn prepare(config: &ExperimentConfig) -> Result<()> {
    config.validate()?;
    warn_params(&config.params);
    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn config_line(config: &ExperimentConfig) -> String {
    format!("# config={}", serde_json::to_string(config).expect("config serializes"))
}

pub(crate) fn write_csv<F>(config: &ExperimentConfig, name: &str, body: F) -> Result<PathBuf>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let path = config.output.dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", config_line(config))
        .and_then(|_| body(&mut out))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub(crate) fn write_json<T: Serialize>(config: &ExperimentConfig, name: &str, value: &T) -> Result<PathBuf> {
    let mut doc = serde_json::to_value(value)?;
    if let Some(map) = doc.as_object_mut() {
        map.insert("config".into(), serde_json::to_value(config)?);
        map.entry("seed").or_insert(config.run.seed.into());
    } else {
        doc = serde_json::json!({ "config": config, "seed": config.run.seed, "result": doc });
    }
    let path = config.output.dir.join(name);
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads back the config embedded in an artifact written by this module.
pub fn embedded_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Some(rest) = text.strip_prefix("# config=") {
        let line = rest.lines().next().unwrap_or("");
        return ExperimentConfig::from_json(line);
    }
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let cfg = doc
        .get("config")
        .ok_or_else(|| Error::Config(format!("{} has no embedded config", path.display())))?;
    serde_json::from_value(cfg.clone()).map_err(|e| Error::Config(e.to_string()))
}

/// Runs `run.replicas` independent kMC replicas in parallel and merges them
/// in replica order. Replica `r` draws its initial configuration and its
/// dynamics from separate streams of `run.seed`.
pub fn run_ensemble(config: &ExperimentConfig, params: &Params) -> Result<SimReport> {
    let run = &config.run;
    let opts = RunOptions {
        t_burn: run.t_burn,
        t_measure: run.t_measure,
        batches: run.batches,
        sim: SimOptions {
            explicit_identity_swaps: run.explicit_identity_swaps,
        },
    };
    let reports: Vec<SimReport> = pool(run.workers)?.install(|| {
        (0..run.replicas as u64)
            .into_par_iter()
            .map(|r| {
                let init = lattice::init_product_with(params, run.vee_share, &mut rng::init_stream(run.seed, r))?;
                kmc::run_with(init, params, &opts, run.seed, r)
            })
            .collect::<Result<_>>()
    })?;
    let mut iter = reports.into_iter();
    let first = iter.next().expect("at least one replica");
    Ok(iter.fold(first, |acc, r| acc.merge(&r)))
}

/// kMC ensemble; writes `simulate.json` and `simulate_profile.csv`.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Artifacts<SimReport>> {
    prepare(config)?;
    let report = run_ensemble(config, &config.params)?;
    if report.absorbed {
        log::warn!("a replica reached an absorbing state");
    }
    let json = write_json(config, "simulate.json", &report)?;
    let csv = write_csv(config, "simulate_profile.csv", |out| {
        writeln!(out, "k,p_hole,p_zero,p_v,se_hole,se_zero,se_v")?;
        for l in &report.profile {
            writeln!(out, "{},{},{},{},{},{},{}", l.k, l.p_hole, l.p_zero, l.p_v, l.se_hole, l.se_zero, l.se_v)?;
        }
        Ok(())
    })?;
    Ok(Artifacts {
        result: report,
        files: vec![json, csv],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub t_end: f64,
    pub dt: f64,
    /// Final marginals.
    pub last: MarginalProfile,
    /// Max-abs right-hand side of the moment equations at `last`.
    pub residual: f64,
}

fn trajectory_times(run: &RunControls) -> Vec<f64> {
    (0..=run.samples).map(|i| run.t_end * i as f64 / run.samples as f64).collect()
}

/// Integrates the moment equations from the product law; writes
/// `ode_trajectory.csv` and `ode.json`.
pub fn cmd_ode(config: &ExperimentConfig) -> Result<Artifacts<TrajectorySummary>> {
    prepare(config)?;
    let initial = MarginalProfile::from_density(&config.params, config.run.vee_share);
    let traj = moments::integrate_at(&initial, &config.params, &trajectory_times(&config.run), config.run.dt)?;
    finish_trajectory(config, "ode", traj)
}

fn finish_trajectory(config: &ExperimentConfig, stem: &str, traj: Vec<MarginalProfile>) -> Result<Artifacts<TrajectorySummary>> {
    let csv = write_csv(config, &format!("{stem}_trajectory.csv"), |mut out| moments::write_trajectory_csv(&mut out, &traj))?;
    let last = traj.last().expect("non-empty trajectory").clone();
    let summary = TrajectorySummary {
        t_end: config.run.t_end,
        dt: config.run.dt,
        residual: moments::residual(&last, &config.params)?,
        last,
    };
    let json = write_json(config, &format!("{stem}.json"), &summary)?;
    Ok(Artifacts {
        result: summary,
        files: vec![csv, json],
    })
}

/// Evolves the exact single-column chain from the product law; writes
/// `exact_trajectory.csv`, `exact.json` and optionally `exact_generator.csv`.
pub fn cmd_exact(config: &ExperimentConfig) -> Result<Artifacts<TrajectorySummary>> {
    prepare(config)?;
    let params = &config.params;
    let q = oracle::build_generator(params)?;
    let initial = MarginalProfile::from_density(params, config.run.vee_share);
    let mut pi = oracle::product_law(&initial)?;
    let times = trajectory_times(&config.run);
    let mut traj = Vec::with_capacity(times.len());
    let mut t_prev = 0.0;
    for &t in &times {
        pi = oracle::evolve(&pi, &q, t - t_prev)?;
        t_prev = t;
        let mut m = oracle::marginals(&pi, params.s);
        m.t = t;
        traj.push(m);
    }
    let mut out = finish_trajectory(config, "exact", traj)?;
    if config.output.dump_generator {
        out.files.push(write_csv(config, "exact_generator.csv", |mut w| q.write_csv(&mut w))?);
    }
    Ok(out)
}

/// Best available stationary profile: closed form when `lambda, beta > 0`,
/// otherwise the linear system.
pub fn stationary_profile(params: &Params) -> Result<StationaryProfile> {
    if params.lambda > 0.0 && params.beta > 0.0 {
        stationary::explicit_profile(params)
    } else {
        stationary::solve_stationary_system(params)
    }
}

/// Stationary profile and regime; writes `stationary_profile.csv` and
/// `regime.json`.
pub fn cmd_stationary(config: &ExperimentConfig) -> Result<Artifacts<(StationaryProfile, RegimeReport)>> {
    prepare(config)?;
    let profile = stationary_profile(&config.params)?;
    let regime = stationary::classify_regime(&config.params);
    let csv = write_csv(config, "stationary_profile.csv", |mut out| profile.write_csv(&mut out))?;
    let json = write_json(config, "regime.json", &regime)?;
    Ok(Artifacts {
        result: (profile, regime),
        files: vec![csv, json],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dir: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.params = Params::new(2, 16).with_epsilon(0.3);
        cfg.run.replicas = 3;
        cfg.run.t_burn = 5.0;
        cfg.run.t_measure = 20.0;
        cfg.run.t_end = 2.0;
        cfg.run.samples = 4;
        cfg.run.workers = 2;
        cfg.output.dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn replicas_zero_rejected_before_running() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        cfg.run.replicas = 0;
        assert!(matches!(cmd_simulate(&cfg), Err(Error::Config(_))));
        assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
    }

    #[test]
    fn ensemble_does_not_depend_on_workers() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        let a = run_ensemble(&cfg, &cfg.params).unwrap();
        cfg.run.workers = 1;
        let b = run_ensemble(&cfg, &cfg.params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.replicas, 3);
    }

    #[test]
    fn artifacts_embed_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        for files in [cmd_ode(&cfg).unwrap().files, cmd_stationary(&cfg).unwrap().files] {
            for f in files {
                assert_eq!(embedded_config(&f).unwrap(), cfg, "{}", f.display());
            }
        }
    }

    #[test]
    fn exact_and_ode_agree() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        let a = cmd_exact(&cfg).unwrap().result.last;
        let b = cmd_ode(&cfg).unwrap().result.last;
        for k in 0..a.layers() {
            assert!((a.p_v[k] - b.p_v[k]).abs() < 1e-6);
            assert!((a.p_hole[k] - b.p_hole[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn exact_refuses_large_strips() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        cfg.params.s = oracle::MAX_S + 1;
        assert!(matches!(cmd_exact(&cfg), Err(Error::Capacity { .. })));
    }
}
