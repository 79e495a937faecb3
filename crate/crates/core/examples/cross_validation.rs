//! All four methods on one small strip, compared pairwise.
//!
//! cargo run --release --example cross_validation

use couette::harness::{self, ExperimentConfig, Method};
use couette::lattice::Params;

fn main() -> couette::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.params = Params::new(3, 128).with_rates(1.0, 1.0, 1.0, 0.25).with_rho(0.5);
    cfg.run.replicas = 16;
    cfg.run.t_burn = 100.0;
    cfg.run.t_measure = 1000.0;
    cfg.run.t_end = 300.0;
    cfg.compare.methods = vec![Method::Kmc, Method::Moments, Method::Stationary, Method::Oracle];
    cfg.compare.abs_tol = 1e-8;
    cfg.output.dir = std::env::temp_dir().join("couette-compare");

    let out = harness::cmd_compare(&cfg)?;
    print!("{}", out.result.table());
    if !out.result.pass {
        std::process::exit(2);
    }
    Ok(())
}
