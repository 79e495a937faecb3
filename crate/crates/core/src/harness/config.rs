//! Experiment configuration: one JSON document, overridable from the CLI.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Params;
use crate::stationary::epsilon_for_k;

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: Params,
    pub run: RunControls,
    pub sweep: SweepSpec,
    pub compare: CompareSpec,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunControls {
    pub seed: u64,
    /// Independent kMC replicas.
    pub replicas: usize,
    pub t_burn: f64,
    pub t_measure: f64,
    /// Batches per replica for batch-means error bars.
    pub batches: usize,
    /// Share of particles with velocity `V` in the initial product law.
    pub vee_share: f64,
    /// RK4 step for the moment equations.
    pub dt: f64,
    /// Horizon for `ode`, `exact` and the deterministic methods of `compare`.
    pub t_end: f64,
    /// Rows of the trajectory exports, excluding `t = 0`.
    pub samples: usize,
    /// Worker threads; `0` uses all available cores.
    pub workers: usize,
    /// Fire identity swaps as real events instead of eliding them.
    pub explicit_identity_swaps: bool,
}

impl Default for RunControls {
    fn default() -> Self {
        RunControls {
            seed: 1,
            replicas: 8,
            t_burn: 200.0,
            t_measure: 2000.0,
            batches: crate::kmc::DEFAULT_BATCHES,
            vee_share: 0.5,
            dt: 0.01,
            t_end: 100.0,
            samples: 100,
            workers: 0,
            explicit_identity_swaps: false,
        }
    }
}

/// How `epsilon` depends on `S` along a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonRule {
    /// The same `epsilon` for every `S`.
    Fixed { epsilon: f64 },
    /// `epsilon = lambda K^2 / (2 S^2)` for each `K`.
    KScaling { k_list: Vec<f64> },
    /// `epsilon = coefficient * S^(-exponent)`.
    Exponent { coefficient: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub s_list: Vec<usize>,
    pub epsilon: EpsilonRule,
    /// Fractions `u` at which `mu_v[[u S]]` is compared with `g_K(u)`.
    pub u_points: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            s_list: vec![64, 128, 256],
            epsilon: EpsilonRule::KScaling {
                k_list: vec![0.5, 2.0, 8.0],
            },
            u_points: (1..=9).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

/// One point of a sweep: `S`, its `epsilon`, and the nominal `K` when the
/// rule fixes one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub s: usize,
    pub epsilon: f64,
    pub nominal_k: Option<f64>,
}

impl SweepSpec {
    pub fn points(&self, lambda: f64) -> Vec<SweepPoint> {
        match &self.epsilon {
            EpsilonRule::Fixed { epsilon } => self
                .s_list
                .iter()
                .map(|&s| SweepPoint {
                    s,
                    epsilon: *epsilon,
                    nominal_k: None,
                })
                .collect(),
            EpsilonRule::KScaling { k_list } => k_list
                .iter()
                .flat_map(|&k| {
                    self.s_list.iter().map(move |&s| SweepPoint {
                        s,
                        epsilon: epsilon_for_k(k, s, lambda),
                        nominal_k: Some(k),
                    })
                })
                .collect(),
            EpsilonRule::Exponent { coefficient, exponent } => self
                .s_list
                .iter()
                .map(|&s| SweepPoint {
                    s,
                    epsilon: coefficient * (s as f64).powf(-exponent),
                    nominal_k: None,
                })
                .collect(),
        }
    }
}

/// Solution methods that `compare` can cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kmc,
    Moments,
    Stationary,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Kmc => "kmc",
            Method::Moments => "moments",
            Method::Stationary => "stationary",
            Method::Oracle => "oracle",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Kmc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    pub methods: Vec<Method>,
    /// Max-abs tolerance between two deterministic methods.
    pub abs_tol: f64,
    /// Max z-score tolerance when a stochastic method is involved.
    pub z_tol: f64,
}

impl Default for CompareSpec {
    fn default() -> Self {
        CompareSpec {
            methods: vec![Method::Moments, Method::Stationary],
            abs_tol: 1e-6,
            z_tol: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Also write the column generator as `row,col,rate` from `exact`.
    pub dump_generator: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            dump_generator: false,
        }
    }
}

/// CLI values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn with_overrides(mut self, o: &Overrides) -> Self {
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(workers) = o.workers {
            self.run.workers = workers;
        }
        self
    }

    /// Checks every field; called by each command before any work.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let r = &self.run;
        let bad = |msg: String| Err(Error::Config(msg));
        if r.replicas == 0 {
            return bad("run.replicas must be at least 1".into());
        }
        if r.batches == 0 {
            return bad("run.batches must be at least 1".into());
        }
        if r.samples == 0 {
            return bad("run.samples must be at least 1".into());
        }
        for (name, v) in [("run.t_burn", r.t_burn), ("run.t_measure", r.t_measure), ("run.t_end", r.t_end)] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(r.dt > 0.0 && r.dt.is_finite()) {
            return bad(format!("run.dt must be positive, got {}", r.dt));
        }
        if !(0.0..=1.0).contains(&r.vee_share) {
            return bad(format!("run.vee_share must lie in [0, 1], got {}", r.vee_share));
        }
        let s = &self.sweep;
        if s.s_list.is_empty() || s.s_list.contains(&0) {
            return bad("sweep.s_list must be non-empty with S >= 1".into());
        }
        if s.u_points.is_empty() || s.u_points.iter().any(|&u| !(u > 0.0 && u < 1.0)) {
            return bad("sweep.u_points must be non-empty and strictly inside (0, 1)".into());
        }
        match &s.epsilon {
            EpsilonRule::Fixed { epsilon } if !(*epsilon >= 0.0 && epsilon.is_finite()) => {
                return bad(format!("sweep epsilon must be non-negative, got {epsilon}"));
            }
            EpsilonRule::KScaling { k_list } if k_list.is_empty() || k_list.iter().any(|k| !(*k >= 0.0 && k.is_finite())) => {
                return bad("sweep k_list must be non-empty with finite K >= 0".into());
            }
            EpsilonRule::Exponent { coefficient, exponent } if !(*coefficient >= 0.0 && coefficient.is_finite() && exponent.is_finite()) => {
                return bad("sweep exponent rule needs a finite coefficient >= 0 and a finite exponent".into());
            }
            _ => {}
        }
        let c = &self.compare;
        if !(c.abs_tol >= 0.0) || !(c.z_tol >= 0.0) {
            return bad("compare tolerances must be non-negative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.epsilon = EpsilonRule::Exponent {
            coefficient: 2.0,
            exponent: 1.5,
        };
        cfg.compare.methods = vec![Method::Kmc, Method::Oracle];
        let back = ExperimentConfig::from_json(&cfg.to_json_pretty()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_params_keep_other_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"params": {"S": 3, "epsilon": 0.2}}"#).unwrap();
        assert_eq!(cfg.params.s, 3);
        assert_eq!(cfg.params.epsilon, 0.2);
        assert_eq!(cfg.params.w, 128);
    }

    #[test]
    fn unknown_fields_and_two_rules_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"parms": {}}"#).is_err());
        let two = r#"{"sweep": {"epsilon": {"rule": "fixed", "epsilon": 1.0, "k_list": [1.0]}}}"#;
        assert!(ExperimentConfig::from_json(two).is_err());
    }

    #[test]
    fn overrides_win() {
        let cfg = ExperimentConfig::default().with_overrides(&Overrides {
            seed: Some(99),
            out: Some("x".into()),
            workers: Some(3),
        });
        assert_eq!((cfg.run.seed, cfg.run.workers), (99, 3));
        assert_eq!(cfg.output.dir, PathBuf::from("x"));
    }

    #[test]
    fn zero_replicas_is_invalid() {
        let mut cfg = ExperimentConfig::default();
        cfg.run.replicas = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn u_points_exclude_the_plates() {
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.u_points = vec![0.0, 0.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn k_scaling_points() {
        let spec = SweepSpec {
            s_list: vec![10, 20],
            epsilon: EpsilonRule::KScaling { k_list: vec![2.0] },
            u_points: vec![0.5],
        };
        let pts = spec.points(1.0);
        assert_eq!(pts.len(), 2);
        assert!((pts[0].epsilon - 0.02).abs() < 1e-15);
        assert!((pts[1].epsilon - 0.005).abs() < 1e-15);
    }
}
