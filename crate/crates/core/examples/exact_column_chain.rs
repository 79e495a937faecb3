//! The exact single-column chain against the moment equations, and its
//! stationary law sector by sector.

use couette::lattice::Params;
use couette::moments::{self, MarginalProfile};
use couette::oracle;

fn main() -> couette::Result<()> {
    let params = Params::new(2, 1).with_rates(1.0, 1.0, 1.0, 0.5).with_rho(0.5);
    let q = oracle::build_generator(&params)?;
    println!("{} states, {} transitions", q.states(), q.off_diagonal_count());

    let initial = MarginalProfile::from_density(&params, 0.5);
    let pi0 = oracle::product_law(&initial)?;
    let times = [0.5, 2.0, 10.0];
    let ode = moments::integrate_at(&initial, &params, &times, 0.01)?;
    for (t, m) in times.iter().zip(&ode) {
        let exact = oracle::marginals(&oracle::evolve(&pi0, &q, *t)?, params.s);
        let diff = exact.p_v.iter().zip(&m.p_v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("t = {t:>4}: exact p_v {:.6?}  |exact - ode| = {diff:.2e}", exact.p_v);
    }

    let weights = oracle::sector_weights(&pi0, params.layers());
    for (holes, w) in weights.iter().enumerate() {
        let m = oracle::marginals(&oracle::stationary_in_sector(&q, holes)?, params.s);
        println!("{holes} holes (weight {w:.4}): p_hole {:.4?} p_v {:.4?}", m.p_hole, m.p_v);
    }
    let mix = oracle::marginals(&oracle::stationary_mixture(&q, &pi0)?, params.s);
    println!("mixture: p_hole {:.6?} p_v {:.6?}", mix.p_hole, mix.p_v);
    Ok(())
}
