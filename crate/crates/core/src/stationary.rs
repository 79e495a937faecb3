//! Stationary velocity profiles.
//!
//! In the stationary regime holes are uniform over layers (`1 - rho`) and
//! the `V` probabilities `mu_v[k]` solve a tridiagonal linear system. It
//! has two closed forms:
//!
//! * without perturbation (`eps = 0`) the profile is linear,
//!   `mu_v[k] = rho (k + lambda/beta) / (S + 1 + 2 lambda/beta)`;
//! * with `eps > 0` it is a combination of `z1^k` and `z2^k`, the roots of
//!   `lambda z^2 - 2 (lambda + eps) z + lambda = 0`.
//!
//! [`solve_stationary_system`] solves the linear system directly and is
//! kept independent of the closed forms so each checks the other.
//!
//! Letting `S -> infinity` with `eps S^2 = lambda K^2 / 2` fixed, the
//! profile converges to [`limit_profile_gk`], which interpolates between
//! the linear (laminar, `K -> 0`) and the flat `rho / 2` (turbulent,
//! `K -> infinity`) shapes.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Params;
use crate::tridiag;

/// Below this `eps / lambda` the closed form is evaluated through its
/// `eps -> 0` limit, the linear profile.
pub const RESONANCE_THRESHOLD: f64 = 1e-8;

/// `K` at or below which a profile is labelled laminar-like.
pub const K_LAMINAR: f64 = 0.3;
/// `K` at or above which a profile is labelled turbulent-like.
pub const K_TURBULENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Laminar,
    Turbulent,
    Critical,
    /// `K` is undefined (`lambda = 0` and `eps = 0`).
    Finite,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Laminar => "laminar",
            Regime::Turbulent => "turbulent",
            Regime::Critical => "critical",
            Regime::Finite => "finite",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub mu_hole: Vec<f64>,
    pub mu_v: Vec<f64>,
    pub rho: f64,
    /// Characteristic roots, present when `eps > 0`.
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    /// Reynolds-number analog `S sqrt(2 eps / lambda)`.
    #[serde(rename = "K")]
    pub k: f64,
    pub regime: Regime,
}

impl StationaryProfile {
    fn assemble(params: &Params, mu_v: Vec<f64>, regime: Option<Regime>) -> Self {
        let report = classify_regime(params);
        let roots = (params.epsilon > 0.0 && params.lambda > 0.0)
            .then(|| characteristic_roots(params.epsilon, params.lambda).ok())
            .flatten();
        StationaryProfile {
            mu_hole: vec![1.0 - params.rho; mu_v.len()],
            mu_v,
            rho: params.rho,
            z1: roots.map(|r| r.0),
            z2: roots.map(|r| r.1),
            k: report.k,
            regime: regime.unwrap_or(report.regime),
        }
    }

    pub fn layers(&self) -> usize {
        self.mu_v.len()
    }

    pub fn mu_zero(&self) -> Vec<f64> {
        self.mu_v.iter().map(|v| self.rho - v).collect()
    }

    /// `mu_v` at layer `[u S]`.
    pub fn at_fraction(&self, u: f64) -> f64 {
        self.mu_v[layer_at(u, self.layers() - 2)]
    }

    /// As a marginal profile (for residual checks and comparisons).
    pub fn to_marginal(&self) -> crate::moments::MarginalProfile {
        crate::moments::MarginalProfile {
            t: f64::INFINITY,
            p_hole: self.mu_hole.clone(),
            p_v: self.mu_v.clone(),
        }
    }

    /// CSV with header `k,u,mu_hole,mu_zero,mu_v`, `u = k / (S + 1)`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "k,u,mu_hole,mu_zero,mu_v")?;
        let s1 = (self.layers() - 1) as f64;
        for (k, (h, v)) in self.mu_hole.iter().zip(&self.mu_v).enumerate() {
            writeln!(out, "{},{},{},{},{}", k, k as f64 / s1, h, self.rho - v, v)?;
        }
        Ok(())
    }
}

/// Layer index `[u S]`, robust to `u S` landing a rounding error below an
/// integer.
pub fn layer_at(u: f64, s: usize) -> usize {
    ((u * s as f64 + 1e-9).floor().max(0.0) as usize).min(s + 1)
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
    }
}

/// Linear profile of the unperturbed system.
pub fn linear_profile(params: &Params) -> Result<StationaryProfile> {
    params.validate()?;
    require_positive("beta", params.beta)?;
    require_positive("lambda", params.lambda)?;
    let r = params.lambda / params.beta;
    let denom = params.s as f64 + 1.0 + 2.0 * r;
    let mu_v = (0..params.layers()).map(|k| params.rho * (k as f64 + r) / denom).collect();
    Ok(StationaryProfile::assemble(params, mu_v, Some(Regime::Laminar)))
}

/// Roots `(z1, z2)` of `lambda z^2 - 2 (lambda + eps) z + lambda = 0`,
/// `z1 >= 1 >= z2 = 1 / z1`.
pub fn characteristic_roots(epsilon: f64, lambda: f64) -> Result<(f64, f64)> {
    require_positive("lambda", lambda)?;
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParams(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let a = epsilon / lambda;
    // 1 + a + sqrt((1 + a)^2 - 1) with the radicand as a (2 + a) to avoid
    // cancellation for small a.
    let z1 = 1.0 + a + (a * (2.0 + a)).sqrt();
    Ok((z1, 1.0 / z1))
}

/// `b(z) = 1 + (2 eps + lambda (1 - 1/z)) / beta`.
pub fn boundary_factor(z: f64, params: &Params) -> Result<f64> {
    if z == 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("boundary factor needs finite non-zero z, got {z}")));
    }
    require_positive("beta", params.beta)?;
    Ok(1.0 + (2.0 * params.epsilon + params.lambda * (1.0 - 1.0 / z)) / params.beta)
}

/// Closed-form stationary profile for `eps >= 0`.
///
/// Numerator and denominator are divided by `b(z1)^2 z1^(S+1)`, leaving
/// only powers of `z2 <= 1`, so the evaluation does not overflow for any
/// `S`.
pub fn explicit_profile(params: &Params) -> Result<StationaryProfile> {
    params.validate()?;
    require_positive("lambda", params.lambda)?;
    require_positive("beta", params.beta)?;
    if params.epsilon / params.lambda < RESONANCE_THRESHOLD {
        let mut p = linear_profile(params)?;
        let report = classify_regime(params);
        p.regime = report.regime;
        return Ok(p);
    }
    let (z1, z2) = characteristic_roots(params.epsilon, params.lambda)?;
    let b1 = boundary_factor(z1, params)?;
    let b2 = boundary_factor(z2, params)?;
    let s1 = (params.s + 1) as i32;
    let c = b2 / (b1 * b1);
    let denom = 2.0 * (1.0 - (b2 / b1).powi(2) * z2.powi(2 * s1));
    let rho = params.rho;
    let mu_v = (0..params.layers() as i32)
        .map(|k| {
            let num = z2.powi(k) / b1 - c * z2.powi(2 * s1 - k) - z2.powi(s1 - k) / b1 + c * z2.powi(s1 + k);
            rho / 2.0 - rho * num / denom
        })
        .collect();
    Ok(StationaryProfile::assemble(params, mu_v, None))
}

/// Direct solve of the stationary equations
///
/// ```text
/// 0 = lambda (mu[k+1] + mu[k-1] - 2 mu[k]) + eps (rho - 2 mu[k])             1 <= k <= S
/// 0 = lambda (mu[1] - mu[0]) + eps (rho - 2 mu[0]) - beta mu[0]
/// 0 = lambda (mu[S] - mu[S+1]) + eps (rho - 2 mu[S+1]) + beta (rho - mu[S+1])
/// ```
///
/// by tridiagonal elimination.
pub fn solve_stationary_system(params: &Params) -> Result<StationaryProfile> {
    params.validate()?;
    if params.beta == 0.0 && params.epsilon == 0.0 {
        return Err(Error::Singular(
            "beta = eps = 0: every profile with the right density is stationary".into(),
        ));
    }
    let n = params.layers();
    let (l, e, b, rho) = (params.lambda, params.epsilon, params.beta, params.rho);
    // rows negated so the diagonal is positive
    let mut diag = vec![2.0 * l + 2.0 * e; n];
    diag[0] = l + 2.0 * e + b;
    diag[n - 1] = l + 2.0 * e + b;
    let off = vec![-l; n - 1];
    let mut rhs = vec![e * rho; n];
    rhs[n - 1] += b * rho;
    let mu_v = tridiag::solve(&off, &diag, &off, &rhs)?;
    Ok(StationaryProfile::assemble(params, mu_v, None))
}

/// Limiting profile `g_K(u) = rho/2 (1 + sinh(K (u - 1/2)) / sinh(K / 2))`.
pub fn limit_profile_gk(k: f64, rho: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u must lie in (0, 1), got {u}")));
    }
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("K must be non-negative, got {k}")));
    }
    if k < 1e-6 {
        return Ok(rho * u);
    }
    let ratio = if k > 50.0 {
        // sinh(K d) / sinh(K/2) = sign(d) e^{-K min(u, 1-u)} (1 - e^{-2K|d|}) / (1 - e^{-K})
        let d = u - 0.5;
        d.signum() * (-k * u.min(1.0 - u)).exp() * (-(-2.0 * k * d.abs()).exp_m1()) / (-(-k).exp_m1())
    } else {
        (k * (u - 0.5)).sinh() / (k / 2.0).sinh()
    };
    Ok(rho / 2.0 * (1.0 + ratio))
}

/// `K = S sqrt(2 eps / lambda)`.
pub fn reynolds_analog(params: &Params) -> Result<f64> {
    require_positive("lambda", params.lambda)?;
    Ok(params.s as f64 * (2.0 * params.epsilon / params.lambda).sqrt())
}

/// Perturbation rate giving transition parameter `k` at size `s`:
/// `eps = lambda K^2 / (2 S^2)`.
pub fn epsilon_for_k(k: f64, s: usize, lambda: f64) -> f64 {
    lambda * k * k / (2.0 * (s * s) as f64)
}

/// Regime label together with `K`, the roots and the density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub regime: Regime,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub rho: f64,
}

/// Desk-scale label from `K`: laminar-like for `K <= 0.3`, turbulent-like
/// for `K >= 10`, critical in between. The true transition is asymptotic
/// in `S`; these cut-offs are heuristic.
pub fn classify_regime(params: &Params) -> RegimeReport {
    let k = if params.lambda > 0.0 {
        params.s as f64 * (2.0 * params.epsilon / params.lambda).sqrt()
    } else if params.epsilon > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    };
    let regime = if k.is_nan() {
        Regime::Finite
    } else if k <= K_LAMINAR {
        Regime::Laminar
    } else if k >= K_TURBULENT {
        Regime::Turbulent
    } else {
        Regime::Critical
    };
    let roots = (params.lambda > 0.0 && params.epsilon > 0.0)
        .then(|| characteristic_roots(params.epsilon, params.lambda).ok())
        .flatten();
    RegimeReport {
        k,
        regime,
        z1: roots.map(|r| r.0),
        z2: roots.map(|r| r.1),
        rho: params.rho,
    }
}
