//! Relaxation of the layer marginals towards the stationary profile.

use couette::lattice::Params;
use couette::moments::{self, MarginalProfile};
use couette::stationary;

fn main() -> couette::Result<()> {
    let params = Params::new(8, 1).with_rates(1.0, 1.0, 0.7, 0.3).with_rho(0.6);
    let start = MarginalProfile::from_density(&params, 0.0);
    let target = stationary::explicit_profile(&params)?;
    let dt = 0.5 * moments::stability_bound(&params);

    let times = [0.0, 1.0, 5.0, 20.0, 50.0, 100.0, 200.0];
    println!("{:>6} {:>12} {:>12}", "t", "dist", "residual");
    for m in moments::integrate_at(&start, &params, &times, dt)? {
        let dist = m.p_v.iter().zip(&target.mu_v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{:>6} {:>12.3e} {:>12.3e}", m.t, dist, moments::residual(&m, &params)?);
    }

    let traj = moments::integrate_sampled(&start, &params, 2.0, dt, 2)?;
    moments::write_trajectory_csv(&mut std::io::stdout().lock(), &traj).map_err(|e| couette::Error::Config(e.to_string()))?;
    Ok(())
}
