//! Stationary `V` profiles from laminar to turbulent-like, with the `g_K`
//! limit they approach.

use couette::lattice::Params;
use couette::stationary::{self, epsilon_for_k};

fn main() -> couette::Result<()> {
    let s = 128;
    let base = Params::new(s, 1).with_rho(0.5);
    let us = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95];

    print!("{:>8} {:>10}", "K", "regime");
    for u in us {
        print!(" {:>7}", format!("u={u}"));
    }
    println!();
    for k in [0.0, 0.1, 1.0, 3.0, 10.0, 30.0] {
        let params = base.with_epsilon(epsilon_for_k(k, s, base.lambda));
        let profile = stationary::explicit_profile(&params)?;
        print!("{k:>8} {:>10}", profile.regime.to_string());
        for u in us {
            print!(" {:>7.4}", profile.at_fraction(u));
        }
        println!();
        print!("{:>8} {:>10}", "", "g_K");
        for u in us {
            print!(" {:>7.4}", stationary::limit_profile_gk(k, params.rho, u)?);
        }
        println!();
    }

    let params = Params::new(1, 1).with_rates(1.0, 1.0, 1.0, 1.0).with_rho(1.0);
    let p = stationary::explicit_profile(&params)?;
    println!("S = 1, all rates 1: mu_v = {:?}, z = ({:?}, {:?})", p.mu_v, p.z1, p.z2);
    Ok(())
}
