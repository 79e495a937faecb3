//! Sup-norm distance between the discrete profile and `g_K` as `S` grows
//! with `eps = lambda K^2 / (2 S^2)`.
//!
//! cargo run --example phase_transition_sweep -- [CONFIG.json]

use couette::harness::{self, ExperimentConfig};

fn main() -> couette::Result<()> {
    let mut cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::default(),
    };
    if std::env::args().nth(1).is_none() {
        cfg.sweep.s_list = vec![16, 32, 64, 128, 256, 512];
        cfg.output.dir = std::env::temp_dir().join("couette-sweep");
    }
    let out = harness::cmd_sweep(&cfg)?;
    let (_, summary) = &out.result;

    println!("{:>6} {:>5} {:>12} {:>10} {:>12}", "K", "S", "eps", "sup_err", "mid_dev");
    for e in &summary.entries {
        println!("{:>6} {:>5} {:>12.4e} {:>10.5} {:>12.3e}", e.k, e.s, e.epsilon, e.sup_err, e.mid_deviation);
    }
    for (k, dec) in &summary.strictly_decreasing {
        println!("K = {k}: error strictly decreasing in S: {dec}");
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
