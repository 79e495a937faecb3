//! kMC ensemble with no perturbation: the measured `V` profile is linear.
//!
//! cargo run --release --example simulate_strip

use couette::harness::{self, ExperimentConfig};
use couette::lattice::Params;
use couette::stationary;

fn main() -> couette::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.params = Params::new(8, 128).with_rho(0.5);
    cfg.run.replicas = 16;
    cfg.run.t_burn = 200.0;
    cfg.run.t_measure = 1000.0;
    cfg.output.dir = std::env::temp_dir().join("couette-simulate");

    let out = harness::cmd_simulate(&cfg)?;
    let report = &out.result;
    let linear = stationary::linear_profile(&cfg.params)?;

    println!("realised density {:.4}, events {}", report.density, report.events.total());
    println!("{:>3} {:>9} {:>9} {:>9} {:>6}", "k", "p_v", "se", "linear", "z");
    for (l, mu) in report.profile.iter().zip(&linear.mu_v) {
        println!("{:>3} {:>9.5} {:>9.5} {:>9.5} {:>6.2}", l.k, l.p_v, l.se_v, mu, (l.p_v - mu) / l.se_v);
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
