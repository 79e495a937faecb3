//! Closed linear ODEs for one-site marginals.
//!
//! Under a translation-invariant law the per-layer probabilities of a hole
//! (`p_hole`) and of a `V` particle (`p_v`) obey a closed linear system
//! that does not involve the horizontal flow rate:
//!
//! ```text
//! d p_hole[k]/dt = lambda (p_hole[k+1] + p_hole[k-1] - 2 p_hole[k])          1 <= k <= S
//! d p_v[k]/dt    = lambda (p_v[k+1] + p_v[k-1] - 2 p_v[k])
//!                  + eps (1 - p_hole[k] - 2 p_v[k])
//! ```
//!
//! with reflecting rows at `k = 0` and `k = S + 1`, plus `-beta p_v[0]`
//! at the bottom and `+beta (1 - p_hole[S+1] - p_v[S+1])` at the top.
//! `p_zero` is never stored; it is `1 - p_hole - p_v`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Params;

/// Per-layer marginals at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalProfile {
    pub t: f64,
    pub p_hole: Vec<f64>,
    pub p_v: Vec<f64>,
}

impl MarginalProfile {
    /// Product initial law: density `rho`, a share `vee_share` of the
    /// particles carrying velocity `V`, identical in every layer.
    pub fn from_density(params: &Params, vee_share: f64) -> Self {
        let n = params.layers();
        MarginalProfile {
            t: 0.0,
            p_hole: vec![1.0 - params.rho; n],
            p_v: vec![params.rho * vee_share; n],
        }
    }

    pub fn new(p_hole: Vec<f64>, p_v: Vec<f64>) -> Result<Self> {
        if p_hole.len() != p_v.len() || p_hole.len() < 2 {
            return Err(Error::InvalidParams("p_hole and p_v need equal length >= 2".into()));
        }
        Ok(MarginalProfile { t: 0.0, p_hole, p_v })
    }

    pub fn layers(&self) -> usize {
        self.p_hole.len()
    }

    pub fn p_zero(&self) -> Vec<f64> {
        self.p_hole.iter().zip(&self.p_v).map(|(h, v)| 1.0 - h - v).collect()
    }

    /// Expected particles per column, `sum_k (1 - p_hole[k])`.
    pub fn mean_particles(&self) -> f64 {
        self.p_hole.iter().map(|h| 1.0 - h).sum()
    }

    /// Entries are probabilities: non-negative with `p_hole + p_v <= 1`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.p_hole
            .iter()
            .zip(&self.p_v)
            .all(|(&h, &v)| h >= -tol && v >= -tol && h + v <= 1.0 + tol)
    }

    fn check(&self, params: &Params) -> Result<()> {
        if self.layers() != params.layers() || self.p_v.len() != params.layers() {
            return Err(Error::DimensionMismatch {
                expected: params.layers(),
                got: self.layers(),
            });
        }
        Ok(())
    }
}

/// Time derivatives of the stored marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub dp_hole: Vec<f64>,
    pub dp_v: Vec<f64>,
}

impl Derivative {
    pub fn dp_zero(&self) -> Vec<f64> {
        self.dp_hole.iter().zip(&self.dp_v).map(|(h, v)| -h - v).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.dp_hole.iter().chain(&self.dp_v).fold(0.0, |m, d| m.max(d.abs()))
    }
}

fn rhs(p_hole: &[f64], p_v: &[f64], params: &Params, dh: &mut [f64], dv: &mut [f64]) {
    let n = p_hole.len();
    let (lambda, eps, beta) = (params.lambda, params.epsilon, params.beta);
    for k in 0..n {
        let mut lap_h = 0.0;
        let mut lap_v = 0.0;
        if k > 0 {
            lap_h += p_hole[k - 1] - p_hole[k];
            lap_v += p_v[k - 1] - p_v[k];
        }
        if k + 1 < n {
            lap_h += p_hole[k + 1] - p_hole[k];
            lap_v += p_v[k + 1] - p_v[k];
        }
        dh[k] = lambda * lap_h;
        dv[k] = lambda * lap_v + eps * (1.0 - p_hole[k] - 2.0 * p_v[k]);
    }
    dv[0] -= beta * p_v[0];
    dv[n - 1] += beta * (1.0 - p_hole[n - 1] - p_v[n - 1]);
}

/// Right-hand side of the marginal equations.
pub fn derivative(profile: &MarginalProfile, params: &Params) -> Result<Derivative> {
    profile.check(params)?;
    let n = profile.layers();
    let mut d = Derivative {
        dp_hole: vec![0.0; n],
        dp_v: vec![0.0; n],
    };
    rhs(&profile.p_hole, &profile.p_v, params, &mut d.dp_hole, &mut d.dp_v);
    Ok(d)
}

/// Largest absolute component of the derivative; zero exactly at a
/// stationary point.
pub fn residual(profile: &MarginalProfile, params: &Params) -> Result<f64> {
    Ok(derivative(profile, params)?.max_abs())
}

/// Largest stable step for the explicit scheme.
pub fn stability_bound(params: &Params) -> f64 {
    let denom = 4.0 * params.lambda + 4.0 * params.epsilon + 2.0 * params.beta;
    if denom > 0.0 {
        1.0 / denom
    } else {
        f64::INFINITY
    }
}

struct Rk4 {
    k: [Vec<f64>; 8],
    tmp_h: Vec<f64>,
    tmp_v: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp_h: vec![0.0; n],
            tmp_v: vec![0.0; n],
        }
    }

    fn step(&mut self, h: &mut [f64], v: &mut [f64], params: &Params, dt: f64) {
        let n = h.len();
        let [k1h, k1v, k2h, k2v, k3h, k3v, k4h, k4v] = &mut self.k;
        rhs(h, v, params, k1h, k1v);
        for i in 0..n {
            self.tmp_h[i] = h[i] + 0.5 * dt * k1h[i];
            self.tmp_v[i] = v[i] + 0.5 * dt * k1v[i];
        }
        rhs(&self.tmp_h, &self.tmp_v, params, k2h, k2v);
        for i in 0..n {
            self.tmp_h[i] = h[i] + 0.5 * dt * k2h[i];
            self.tmp_v[i] = v[i] + 0.5 * dt * k2v[i];
        }
        rhs(&self.tmp_h, &self.tmp_v, params, k3h, k3v);
        for i in 0..n {
            self.tmp_h[i] = h[i] + dt * k3h[i];
            self.tmp_v[i] = v[i] + dt * k3v[i];
        }
        rhs(&self.tmp_h, &self.tmp_v, params, k4h, k4v);
        for i in 0..n {
            h[i] += dt / 6.0 * (k1h[i] + 2.0 * k2h[i] + 2.0 * k3h[i] + k4h[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
    }
}

/// Integrates with classical RK4 and returns the profile at each requested
/// time (sorted, `>= initial.t`). Steps are shortened so every sample time
/// is hit exactly; no step exceeds `dt`.
pub fn integrate_at(initial: &MarginalProfile, params: &Params, times: &[f64], dt: f64) -> Result<Vec<MarginalProfile>> {
    initial.check(params)?;
    let bound = stability_bound(params);
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    if dt > bound {
        return Err(Error::StabilityBound { dt, bound });
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < initial.t) {
        return Err(Error::InvalidParams("sample times must be finite, sorted and not before the initial time".into()));
    }
    let mut h = initial.p_hole.clone();
    let mut v = initial.p_v.clone();
    let mut t = initial.t;
    let mut rk = Rk4::new(h.len());
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / dt).ceil().max(1.0) as usize;
            let step = span / steps as f64;
            for _ in 0..steps {
                rk.step(&mut h, &mut v, params, step);
            }
        }
        t = target;
        out.push(MarginalProfile {
            t,
            p_hole: h.clone(),
            p_v: v.clone(),
        });
    }
    Ok(out)
}

/// Integrates to `t_end`, returning `samples + 1` evenly spaced profiles
/// from the initial one to the final one.
pub fn integrate_sampled(initial: &MarginalProfile, params: &Params, t_end: f64, dt: f64, samples: usize) -> Result<Vec<MarginalProfile>> {
    let samples = samples.max(1);
    let span = t_end - initial.t;
    let times: Vec<f64> = (0..=samples)
        .map(|i| if i == samples { t_end } else { initial.t + span * i as f64 / samples as f64 })
        .collect();
    integrate_at(initial, params, &times, dt)
}

/// Integrates to `t_end` with 100 evenly spaced samples.
pub fn integrate(initial: &MarginalProfile, params: &Params, t_end: f64, dt: f64) -> Result<Vec<MarginalProfile>> {
    integrate_sampled(initial, params, t_end, dt, 100)
}

/// Writes trajectories as CSV with header `t,k,p_hole,p_zero,p_v`.
pub fn write_trajectory_csv<W: Write>(out: &mut W, trajectory: &[MarginalProfile]) -> std::io::Result<()> {
    writeln!(out, "t,k,p_hole,p_zero,p_v")?;
    for p in trajectory {
        for (k, (h, v)) in p.p_hole.iter().zip(&p.p_v).enumerate() {
            writeln!(out, "{},{},{},{},{}", p.t, k, h, 1.0 - h - v, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(s: usize, lambda: f64, beta: f64, eps: f64, rho: f64) -> Params {
        Params::new(s, 1).with_rates(lambda, 1.0, beta, eps).with_rho(rho)
    }

    #[test]
    fn constant_holes_are_stationary() {
        let p = params(5, 1.3, 0.7, 0.4, 0.6);
        let prof = MarginalProfile::new(vec![0.3; 7], vec![0.2; 7]).unwrap();
        let d = derivative(&prof, &p).unwrap();
        assert!(d.dp_hole.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_profile_is_stationary_without_perturbation() {
        // mu_k = rho (k + lambda/beta) / (S + 1 + 2 lambda/beta)
        let (s, lambda, beta, rho) = (6usize, 1.5, 0.5, 0.7);
        let p = params(s, lambda, beta, 0.0, rho);
        let r = lambda / beta;
        let pv = (0..s + 2).map(|k| rho * (k as f64 + r) / (s as f64 + 1.0 + 2.0 * r)).collect();
        let prof = MarginalProfile::new(vec![1.0 - rho; s + 2], pv).unwrap();
        assert!(residual(&prof, &p).unwrap() <= 1e-12);
    }

    #[test]
    fn hand_solved_fixed_point() {
        let p = params(1, 1.0, 1.0, 1.0, 1.0);
        let prof = MarginalProfile::new(vec![0.0; 3], vec![0.375, 0.5, 0.625]).unwrap();
        let d = derivative(&prof, &p).unwrap();
        for x in d.dp_v {
            assert!(x.abs() < 1e-15);
        }
    }

    #[test]
    fn free_boundary_uniform_fixed_point() {
        let p = params(4, 1.0, 0.0, 0.8, 0.6);
        let prof = MarginalProfile::new(vec![0.4; 6], vec![0.3; 6]).unwrap();
        assert_eq!(residual(&prof, &p).unwrap(), 0.0);
    }

    #[test]
    fn residual_responds_to_perturbation() {
        let p = params(1, 1.0, 1.0, 1.0, 1.0);
        let delta = 1e-3;
        let prof = MarginalProfile::new(vec![0.0; 3], vec![0.375, 0.5 + delta, 0.625]).unwrap();
        // neighbour row 0 sees lambda * delta
        let d = derivative(&prof, &p).unwrap();
        assert!(d.dp_v[0].abs() >= 0.5 * p.lambda * delta);
        assert!(residual(&prof, &p).unwrap() >= 0.5 * p.lambda * delta);
    }

    #[test]
    fn dimension_mismatch() {
        let p = params(3, 1.0, 1.0, 0.0, 0.5);
        let prof = MarginalProfile::new(vec![0.5; 4], vec![0.1; 4]).unwrap();
        assert!(matches!(derivative(&prof, &p), Err(Error::DimensionMismatch { expected: 5, got: 4 })));
    }

    #[test]
    fn zero_horizon_returns_initial() {
        let p = params(3, 1.0, 1.0, 0.2, 0.5);
        let init = MarginalProfile::new(vec![0.1, 0.5, 0.3, 0.9, 0.2], vec![0.4, 0.2, 0.3, 0.05, 0.1]).unwrap();
        let traj = integrate(&init, &p, 0.0, 0.01).unwrap();
        assert!(traj.iter().all(|q| *q == init));
    }

    #[test]
    fn step_above_bound_rejected() {
        let p = params(3, 1.0, 1.0, 1.0, 0.5);
        let init = MarginalProfile::from_density(&p, 0.5);
        match integrate(&init, &p, 1.0, 0.2) {
            Err(Error::StabilityBound { bound, .. }) => assert!((bound - 0.1).abs() < 1e-15),
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn holes_relax_to_uniform() {
        // The slowest mode of the reflecting Laplacian on S + 2 = 10 layers
        // decays at gap = 2 lambda (1 - cos(pi / 10)), about 0.098 lambda.
        let p = params(8, 1.0, 1.0, 0.0, 0.5);
        let h: Vec<f64> = (0..10).map(|k| if k < 3 { 0.9 } else { 0.1 * (k % 3) as f64 }).collect();
        let mean = h.iter().sum::<f64>() / 10.0;
        let init = MarginalProfile::new(h, vec![0.0; 10]).unwrap();
        let traj = integrate_at(&init, &p, &[50.0, 100.0, 250.0], 0.05).unwrap();
        let dev = |q: &MarginalProfile| q.p_hole.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
        for x in &traj[2].p_hole {
            assert!((x - mean).abs() <= 1e-8, "{x} vs {mean}");
        }
        let gap = 2.0 * (1.0 - (std::f64::consts::PI / 10.0).cos());
        let observed = -(dev(&traj[1]) / dev(&traj[0])).ln() / 50.0;
        assert!((observed - gap).abs() < 1e-3 * gap, "decay rate {observed} vs {gap}");
    }

    #[test]
    fn hole_mass_conserved_over_run() {
        let p = params(12, 0.8, 1.2, 0.5, 0.5);
        let h: Vec<f64> = (0..14).map(|k| 0.5 + 0.4 * ((k as f64) * 0.7).sin()).collect();
        let init = MarginalProfile::new(h, vec![0.1; 14]).unwrap();
        let m0 = init.mean_particles();
        for q in integrate(&init, &p, 30.0, 0.05).unwrap() {
            assert!((q.mean_particles() - m0).abs() <= 1e-10);
        }
    }

    #[test]
    fn csv_layout() {
        let prof = MarginalProfile::new(vec![0.5, 0.25], vec![0.25, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[prof]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,k,p_hole,p_zero,p_v\n0,0,0.5,0.25,0.25\n0,1,0.25,0.25,0.5\n");
    }

    fn profile_strategy(n: usize) -> impl Strategy<Value = MarginalProfile> {
        (prop::collection::vec(0.0..1.0f64, n), prop::collection::vec(0.0..1.0f64, n)).prop_map(|(a, b)| {
            let p_v = a.iter().zip(&b).map(|(h, v)| (1.0 - h) * v).collect();
            MarginalProfile::new(a, p_v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn derivative_conserves_holes_and_particles(prof in profile_strategy(7), l in 0.0..5.0f64, b in 0.0..5.0f64, e in 0.0..5.0f64) {
            let p = params(5, l, b, e, 0.5);
            let d = derivative(&prof, &p).unwrap();
            let sum_h: f64 = d.dp_hole.iter().sum();
            prop_assert!(sum_h.abs() <= 1e-14);
            let particles: f64 = d.dp_v.iter().zip(d.dp_zero()).map(|(v, z)| v + z).sum();
            prop_assert!(particles.abs() <= 1e-14);
        }

        #[test]
        fn derivative_is_affine(p1 in profile_strategy(6), p2 in profile_strategy(6), a in -2.0..2.0f64) {
            // f(a P + (1 - a) Q) = a f(P) + (1 - a) f(Q) for an affine map.
            let p = params(4, 1.1, 0.6, 0.9, 0.5);
            let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| a * u + (1.0 - a) * v).collect::<Vec<_>>();
            let m = MarginalProfile::new(mix(&p1.p_hole, &p2.p_hole), mix(&p1.p_v, &p2.p_v)).unwrap();
            let (d1, d2, dm) = (derivative(&p1, &p).unwrap(), derivative(&p2, &p).unwrap(), derivative(&m, &p).unwrap());
            let lin_h = mix(&d1.dp_hole, &d2.dp_hole);
            let lin_v = mix(&d1.dp_v, &d2.dp_v);
            for k in 0..6 {
                prop_assert!((dm.dp_hole[k] - lin_h[k]).abs() <= 1e-12);
                prop_assert!((dm.dp_v[k] - lin_v[k]).abs() <= 1e-12);
            }
        }
    }
}
