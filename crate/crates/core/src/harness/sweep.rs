//! Stationary `V` profiles across strip sizes against the `g_K` limit.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{pool, prepare, stationary_profile, write_csv, write_json, Artifacts, EpsilonRule, ExperimentConfig};
use crate::error::Result;
use crate::stationary::{self, layer_at};

/// One `(S, K, u)` row of `sweep.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub u: f64,
    pub mu_v: f64,
    pub g_k: f64,
    pub abs_err: f64,
}

/// Sup-norm error over `u` at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummaryEntry {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub epsilon: f64,
    pub sup_err: f64,
    /// `|mu_v[[S/2]] - rho/2|`.
    pub mid_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub entries: Vec<SweepSummaryEntry>,
    /// For the `k_scaling` rule: per `K`, whether `sup_err` strictly
    /// decreases along `s_list`.
    pub strictly_decreasing: Vec<(f64, bool)>,
}

/// Evaluates the closed-form profile at every sweep point; writes
/// `sweep.csv` (`S,K,u,mu_v,g_K,abs_err`) and `sweep_summary.json`.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<Artifacts<(Vec<SweepRow>, SweepSummary)>> {
    prepare(config)?;
    let base = config.params;
    let spec = &config.sweep;
    let points = spec.points(base.lambda);

    let per_point: Vec<(Vec<SweepRow>, SweepSummaryEntry)> = pool(config.run.workers)?.install(|| {
        points
            .par_iter()
            .map(|pt| {
                let mut params = base;
                params.s = pt.s;
                params.epsilon = pt.epsilon;
                let profile = stationary_profile(&params)?;
                let k = match pt.nominal_k {
                    Some(k) => k,
                    None => stationary::reynolds_analog(&params)?,
                };
                let rows = spec
                    .u_points
                    .iter()
                    .map(|&u| {
                        let mu_v = profile.at_fraction(u);
                        let g_k = stationary::limit_profile_gk(k, params.rho, u)?;
                        Ok(SweepRow {
                            s: pt.s,
                            k,
                            u,
                            mu_v,
                            g_k,
                            abs_err: (mu_v - g_k).abs(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let entry = SweepSummaryEntry {
                    s: pt.s,
                    k,
                    epsilon: pt.epsilon,
                    sup_err: rows.iter().map(|r| r.abs_err).fold(0.0, f64::max),
                    mid_deviation: (profile.mu_v[layer_at(0.5, pt.s)] - params.rho / 2.0).abs(),
                };
                Ok((rows, entry))
            })
            .collect::<Result<_>>()
    })?;

    let rows: Vec<SweepRow> = per_point.iter().flat_map(|(r, _)| r.iter().copied()).collect();
    let entries: Vec<SweepSummaryEntry> = per_point.iter().map(|(_, e)| *e).collect();
    let strictly_decreasing = match &spec.epsilon {
        EpsilonRule::KScaling { k_list } => k_list
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let errs = &entries[i * spec.s_list.len()..(i + 1) * spec.s_list.len()];
                (k, errs.windows(2).all(|w| w[1].sup_err < w[0].sup_err))
            })
            .collect(),
        _ => Vec::new(),
    };
    let summary = SweepSummary { entries, strictly_decreasing };

    let csv = write_csv(config, "sweep.csv", |out: &mut dyn Write| {
        writeln!(out, "S,K,u,mu_v,g_K,abs_err")?;
        for r in &rows {
            writeln!(out, "{},{},{},{},{},{}", r.s, r.k, r.u, r.mu_v, r.g_k, r.abs_err)?;
        }
        Ok(())
    })?;
    let json = write_json(config, "sweep_summary.json", &summary)?;
    Ok(Artifacts {
        result: (rows, summary),
        files: vec![csv, json],
    })
}
