//! Statistical agreement of the simulator with the moment equations and
//! with itself under changes that must not matter.

use rayon::prelude::*;

use couette::kmc::{self, RunOptions, SimOptions, SimReport};
use couette::lattice::{self, Params};
use couette::moments::{self, MarginalProfile};
use couette::rng;

fn ensemble(params: &Params, vee_share: f64, replicas: u64, opts: &RunOptions, seed: u64) -> SimReport {
    let reports: Vec<SimReport> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let init = lattice::init_product_with(params, vee_share, &mut rng::init_stream(seed, r)).unwrap();
            kmc::run_with(init, params, opts, seed, r).unwrap()
        })
        .collect();
    reports[1..].iter().fold(reports[0].clone(), |acc, r| acc.merge(r))
}

fn max_pair_z(a: &SimReport, b: &SimReport) -> f64 {
    a.profile
        .iter()
        .zip(&b.profile)
        .flat_map(|(x, y)| {
            [
                (x.p_v - y.p_v).abs() / (x.se_v.powi(2) + y.se_v.powi(2)).sqrt(),
                (x.p_hole - y.p_hole).abs() / (x.se_hole.powi(2) + y.se_hole.powi(2)).sqrt(),
            ]
        })
        .fold(0.0, f64::max)
}

#[test]
fn transient_marginals_follow_moment_equations() {
    let params = Params::new(4, 128).with_rates(1.0, 1.0, 1.0, 0.3).with_rho(0.5);
    let times = [1.0, 5.0, 20.0];
    let replicas = 1000u64;
    let samples: Vec<Vec<Vec<lattice::LayerCounts>>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let init = lattice::init_product_with(&params, 0.0, &mut rng::init_stream(77, r)).unwrap();
            kmc::sample_histograms(init, &params, &times, 77, r).unwrap()
        })
        .collect();
    let initial = MarginalProfile::from_density(&params, 0.0);
    let ode = moments::integrate_at(&initial, &params, &times, 0.01).unwrap();
    let w = params.w as f64;
    for (ti, m) in ode.iter().enumerate() {
        for k in 0..params.layers() {
            let xs: Vec<f64> = samples.iter().map(|s| s[ti][k].vee as f64 / w).collect();
            let mean = xs.iter().sum::<f64>() / replicas as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (replicas - 1) as f64;
            let se = (var / replicas as f64).sqrt();
            let z = (mean - m.p_v[k]).abs() / se;
            assert!(z <= 3.0, "t={} k={k}: kmc {mean} vs ode {} (z {z:.2})", times[ti], m.p_v[k]);
        }
    }
}

#[test]
fn identity_swap_elision_changes_nothing() {
    let params = Params::new(5, 32).with_rates(1.0, 1.0, 1.0, 0.2).with_rho(0.7);
    let mut opts = RunOptions::new(50.0, 500.0);
    let elided = ensemble(&params, 0.5, 16, &opts, 3);
    opts.sim = SimOptions {
        explicit_identity_swaps: true,
    };
    let explicit = ensemble(&params, 0.5, 16, &opts, 3);
    assert!(explicit.events.total() > elided.events.total());
    let z = max_pair_z(&elided, &explicit);
    assert!(z <= 3.0, "max z {z}");
}

#[test]
fn stationary_estimates_ignore_initial_split() {
    let params = Params::new(5, 32).with_rates(1.0, 1.0, 1.0, 0.2).with_rho(0.5);
    let opts = RunOptions::new(100.0, 500.0);
    let even = ensemble(&params, 0.5, 16, &opts, 4);
    let all_zero = ensemble(&params, 0.0, 16, &opts, 4);
    let z = max_pair_z(&even, &all_zero);
    assert!(z <= 3.0, "max z {z}");
}

#[test]
fn hole_profile_sums_to_conserved_count() {
    let params = Params::new(3, 40).with_rates(1.0, 2.0, 0.5, 0.4).with_rho(0.45);
    let init = lattice::init_product(&params, 8).unwrap();
    let m = init.total_particles() as f64;
    let report = kmc::run(init, &params, 10.0, 100.0, 8).unwrap();
    let sum: f64 = report.profile.iter().map(|l| l.p_hole).sum();
    let expected = params.layers() as f64 - m / params.w as f64;
    assert!((sum - expected).abs() < 1e-9, "{sum} vs {expected}");
}

#[test]
fn full_density_vee_fraction_is_half() {
    let params = Params::new(0, 5000).with_rho(1.0);
    let config = lattice::init_product(&params, 12).unwrap();
    let hist = config.layer_histogram();
    let vee: usize = hist.iter().map(|h| h.vee).sum();
    let holes: usize = hist.iter().map(|h| h.hole).sum();
    assert_eq!(holes, 0);
    assert!((vee as f64 / 10_000.0 - 0.5).abs() <= 0.02);
}
