//! Cross-validation of the four solution methods.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::{prepare, run_ensemble, stationary_profile, write_csv, write_json, Artifacts, ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::lattice::Params;
use crate::moments::{self, MarginalProfile};
use crate::oracle;

/// Work budget (generator entries times uniformization terms) above which
/// the exact chain is skipped.
const ORACLE_WORK_LIMIT: f64 = 1e10;

/// Per-layer output of one method, or the reason it was skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub skip_reason: Option<String>,
    pub p_hole: Vec<f64>,
    pub p_v: Vec<f64>,
    /// Standard errors; zero for deterministic methods.
    pub se_hole: Vec<f64>,
    pub se_v: Vec<f64>,
}

impl MethodResult {
    fn skipped(method: Method, reason: String) -> Self {
        MethodResult {
            method,
            skip_reason: Some(reason),
            p_hole: Vec::new(),
            p_v: Vec::new(),
            se_hole: Vec::new(),
            se_v: Vec::new(),
        }
    }

    fn exact(method: Method, m: MarginalProfile) -> Self {
        let n = m.layers();
        MethodResult {
            method,
            skip_reason: None,
            p_hole: m.p_hole,
            p_v: m.p_v,
            se_hole: vec![0.0; n],
            se_v: vec![0.0; n],
        }
    }

    pub fn available(&self) -> bool {
        self.skip_reason.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Max-abs difference against `abs_tol`.
    Absolute,
    /// Max z-score against `z_tol`.
    ZScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResult {
    pub a: Method,
    pub b: Method,
    pub rule: Rule,
    pub max_abs: f64,
    /// `None` when neither method carries error bars.
    pub max_z: Option<f64>,
    /// Layer of the largest discrepancy under `rule`.
    pub worst_layer: usize,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    /// Density the deterministic methods were evaluated at: the configured
    /// `rho`, or the realised kMC density when `kmc` takes part.
    pub rho: f64,
    /// Horizon of `moments` and `oracle`; `stationary` is the `t -> inf` limit
    /// and `kmc` a time average after burn-in.
    pub t_end: f64,
    pub methods: Vec<MethodResult>,
    pub pairs: Vec<PairResult>,
    pub pass: bool,
}

impl CompareReport {
    /// Human-readable per-layer table followed by one line per pair.
    pub fn table(&self) -> String {
        let avail: Vec<&MethodResult> = self.methods.iter().filter(|m| m.available()).collect();
        let mut s = String::new();
        let _ = write!(s, "{:>4}", "k");
        for m in &avail {
            let _ = write!(s, " {:>14} {:>14}", format!("{} p_hole", m.method.name()), format!("{} p_v", m.method.name()));
        }
        s.push('\n');
        let layers = avail.first().map_or(0, |m| m.p_v.len());
        for k in 0..layers {
            let _ = write!(s, "{k:>4}");
            for m in &avail {
                let _ = write!(s, " {:>14.8} {:>14.8}", m.p_hole[k], m.p_v[k]);
            }
            s.push('\n');
        }
        for m in self.methods.iter().filter(|m| !m.available()) {
            let _ = writeln!(s, "skipped {}: {}", m.method.name(), m.skip_reason.as_deref().unwrap_or(""));
        }
        for p in &self.pairs {
            let z = p.max_z.map_or("-".to_string(), |z| format!("{z:.3}"));
            let _ = writeln!(
                s,
                "{} vs {}: max_abs={:.3e} max_z={} layer={} rule={:?} tol={} {}",
                p.a.name(),
                p.b.name(),
                p.max_abs,
                z,
                p.worst_layer,
                p.rule,
                p.tolerance,
                if p.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(s, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

fn oracle_result(params: &Params, initial: &MarginalProfile, t_end: f64) -> Result<MethodResult> {
    if params.s > oracle::MAX_S {
        return Ok(MethodResult::skipped(
            Method::Oracle,
            format!("S = {} exceeds the exact-chain cap S <= {}", params.s, oracle::MAX_S),
        ));
    }
    let q = oracle::build_generator(params)?;
    let layers = params.layers() as f64;
    let max_rate = params.lambda * (layers - 1.0) + 2.0 * params.beta + params.epsilon * layers;
    let work = (q.off_diagonal_count() + q.states()) as f64 * (max_rate * t_end + 1.0);
    if work > ORACLE_WORK_LIMIT {
        return Ok(MethodResult::skipped(
            Method::Oracle,
            format!("exact evolution to t = {t_end} needs about {work:.1e} operations"),
        ));
    }
    let pi = oracle::evolve(&oracle::product_law(initial)?, &q, t_end)?;
    Ok(MethodResult::exact(Method::Oracle, oracle::marginals(&pi, params.s)))
}

fn compare_pair(a: &MethodResult, b: &MethodResult, config: &ExperimentConfig) -> PairResult {
    let stochastic = a.method.is_stochastic() || b.method.is_stochastic();
    let mut max_abs: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    let (mut worst_abs, mut worst_z) = (0, 0);
    for k in 0..a.p_v.len() {
        for (x, y, sx, sy) in [
            (a.p_hole[k], b.p_hole[k], a.se_hole[k], b.se_hole[k]),
            (a.p_v[k], b.p_v[k], a.se_v[k], b.se_v[k]),
        ] {
            let d = (x - y).abs();
            let se = (sx * sx + sy * sy).sqrt();
            let z = if d == 0.0 {
                0.0
            } else if se > 0.0 {
                d / se
            } else {
                f64::INFINITY
            };
            if d > max_abs {
                max_abs = d;
                worst_abs = k;
            }
            if z > max_z {
                max_z = z;
                worst_z = k;
            }
        }
    }
    let (rule, tolerance, value, worst_layer) = if stochastic {
        (Rule::ZScore, config.compare.z_tol, max_z, worst_z)
    } else {
        (Rule::Absolute, config.compare.abs_tol, max_abs, worst_abs)
    };
    PairResult {
        a: a.method,
        b: b.method,
        rule,
        max_abs,
        max_z: stochastic.then_some(max_z),
        worst_layer,
        tolerance,
        pass: value <= tolerance,
    }
}

/// Runs every selected method, compares all available pairs and writes
/// `compare.json` and `compare_table.csv` (`k,method,p_hole,p_v,se_hole,se_v`).
///
/// A pair involving `kmc` uses the z-score rule, other pairs the max-abs
/// rule. When `kmc` is selected the deterministic methods are evaluated at
/// the realised kMC density, since a finite strip never has exactly `rho`.
pub fn cmd_compare(config: &ExperimentConfig) -> Result<Artifacts<CompareReport>> {
    let mut methods = config.compare.methods.clone();
    methods.sort();
    methods.dedup();
    if methods.len() < 2 {
        return Err(Error::Config("compare needs at least two distinct methods".into()));
    }
    prepare(config)?;

    let mut params = config.params;
    let mut results = Vec::with_capacity(methods.len());
    if methods.contains(&Method::Kmc) {
        let report = run_ensemble(config, &params)?;
        if report.empty_window {
            results.push(MethodResult::skipped(Method::Kmc, "measurement window t_measure is zero".into()));
        } else {
            params.rho = report.density;
            results.push(MethodResult {
                method: Method::Kmc,
                skip_reason: None,
                p_hole: report.p_hole(),
                p_v: report.p_v(),
                se_hole: report.profile.iter().map(|l| l.se_hole).collect(),
                se_v: report.profile.iter().map(|l| l.se_v).collect(),
            });
        }
    }
    let t_end = config.run.t_end;
    let initial = MarginalProfile::from_density(&params, config.run.vee_share);
    for &m in methods.iter().filter(|m| !m.is_stochastic()) {
        let r = match m {
            Method::Moments => {
                let traj = moments::integrate_at(&initial, &params, &[t_end], config.run.dt)?;
                MethodResult::exact(m, traj.into_iter().last().expect("one sample"))
            }
            Method::Stationary => match stationary_profile(&params) {
                Ok(p) => MethodResult::exact(m, p.to_marginal()),
                Err(e) => MethodResult::skipped(m, e.to_string()),
            },
            Method::Oracle => oracle_result(&params, &initial, t_end)?,
            Method::Kmc => unreachable!(),
        };
        results.push(r);
    }
    results.sort_by_key(|r| r.method);
    for r in results.iter().filter(|r| !r.available()) {
        log::warn!("skipping {}: {}", r.method.name(), r.skip_reason.as_deref().unwrap_or(""));
    }

    let avail: Vec<&MethodResult> = results.iter().filter(|r| r.available()).collect();
    if avail.len() < 2 {
        return Err(Error::Config(format!(
            "fewer than two methods available at S = {}: {}",
            params.s,
            results
                .iter()
                .filter_map(|r| r.skip_reason.as_ref().map(|why| format!("{} ({why})", r.method.name())))
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let mut pairs = Vec::new();
    for (i, a) in avail.iter().enumerate() {
        for b in &avail[i + 1..] {
            pairs.push(compare_pair(a, b, config));
        }
    }
    let report = CompareReport {
        rho: params.rho,
        t_end,
        pass: pairs.iter().all(|p| p.pass),
        methods: results,
        pairs,
    };

    let json = write_json(config, "compare.json", &report)?;
    let csv = write_csv(config, "compare_table.csv", |out: &mut dyn Write| {
        writeln!(out, "k,method,p_hole,p_v,se_hole,se_v")?;
        for m in report.methods.iter().filter(|m| m.available()) {
            for k in 0..m.p_v.len() {
                writeln!(out, "{},{},{},{},{},{}", k, m.method.name(), m.p_hole[k], m.p_v[k], m.se_hole[k], m.se_v[k])?;
            }
        }
        Ok(())
    })?;
    Ok(Artifacts {
        result: report,
        files: vec![json, csv],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(dir: &std::path::Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.output.dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn single_method_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = base(dir.path());
        cfg.compare.methods = vec![Method::Moments, Method::Moments];
        assert!(matches!(cmd_compare(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn oracle_skipped_above_cap() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = base(dir.path());
        cfg.params.s = 12;
        cfg.params.epsilon = 0.1;
        cfg.run.t_end = 5.0;
        cfg.compare.methods = vec![Method::Moments, Method::Stationary, Method::Oracle];
        cfg.compare.abs_tol = 1.0;
        let rep = cmd_compare(&cfg).unwrap().result;
        let oracle = rep.methods.iter().find(|m| m.method == Method::Oracle).unwrap();
        assert!(oracle.skip_reason.as_deref().unwrap().contains("cap"));
        assert_eq!(rep.pairs.len(), 1);
        assert!(rep.table().contains("skipped oracle"));
    }

    #[test]
    fn z_rule_for_stochastic_pairs() {
        let a = MethodResult {
            method: Method::Kmc,
            skip_reason: None,
            p_hole: vec![0.5, 0.5],
            p_v: vec![0.2, 0.3],
            se_hole: vec![0.01, 0.01],
            se_v: vec![0.01, 0.01],
        };
        let b = MethodResult::exact(
            Method::Stationary,
            MarginalProfile {
                t: 0.0,
                p_hole: vec![0.5, 0.5],
                p_v: vec![0.22, 0.3],
            },
        );
        let cfg = ExperimentConfig::default();
        let p = compare_pair(&a, &b, &cfg);
        assert_eq!(p.rule, Rule::ZScore);
        assert!((p.max_z.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(p.worst_layer, 0);
        assert!(p.pass);
    }
}
