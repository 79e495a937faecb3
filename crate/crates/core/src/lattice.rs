//! Strip geometry, site states and translation-invariant initial ensembles.
//!
//! The strip has layers `0..=S+1` stacked vertically and `W` columns that
//! wrap around (a torus in `x`). Layer `0` touches the fixed plate, layer
//! `S + 1` the moving one.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// State of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Velocity {
    Hole,
    Zero,
    Vee,
}

impl Velocity {
    pub const ALL: [Velocity; 3] = [Velocity::Hole, Velocity::Zero, Velocity::Vee];

    /// Dense index: Hole = 0, Zero = 1, Vee = 2.
    pub const fn index(self) -> usize {
        match self {
            Velocity::Hole => 0,
            Velocity::Zero => 1,
            Velocity::Vee => 2,
        }
    }

    pub const fn from_index(i: usize) -> Option<Velocity> {
        match i {
            0 => Some(Velocity::Hole),
            1 => Some(Velocity::Zero),
            2 => Some(Velocity::Vee),
            _ => None,
        }
    }

    pub const fn is_particle(self) -> bool {
        !matches!(self, Velocity::Hole)
    }

    /// The `0 <-> V` exchange; holes stay holes.
    pub const fn flipped(self) -> Velocity {
        match self {
            Velocity::Hole => Velocity::Hole,
            Velocity::Zero => Velocity::Vee,
            Velocity::Vee => Velocity::Zero,
        }
    }

    pub const fn as_char(self) -> char {
        match self {
            Velocity::Hole => '.',
            Velocity::Zero => '0',
            Velocity::Vee => 'V',
        }
    }

    pub fn from_char(c: char) -> Option<Velocity> {
        match c {
            '.' => Some(Velocity::Hole),
            '0' => Some(Velocity::Zero),
            'V' => Some(Velocity::Vee),
            _ => None,
        }
    }
}

/// Model rates and geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Number of inner layers; the strip has `S + 2` layers.
    #[serde(rename = "S")]
    pub s: usize,
    /// Torus circumference in the horizontal direction.
    #[serde(rename = "W")]
    pub w: usize,
    /// Vertical velocity exchange rate per neighbouring pair.
    pub lambda: f64,
    /// Horizontal flow rate of a `V` particle into a hole on its right.
    pub lambda1: f64,
    /// Boundary flip rate (bottom `V -> 0`, top `0 -> V`).
    pub beta: f64,
    /// Random perturbation rate `0 <-> V` per particle.
    pub epsilon: f64,
    /// Particle density of the initial product law.
    pub rho: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            s: 8,
            w: 128,
            lambda: 1.0,
            lambda1: 1.0,
            beta: 1.0,
            epsilon: 0.0,
            rho: 0.5,
        }
    }
}

impl Params {
    pub fn new(s: usize, w: usize) -> Self {
        Params {
            s,
            w,
            ..Params::default()
        }
    }

    pub fn with_rates(mut self, lambda: f64, lambda1: f64, beta: f64, epsilon: f64) -> Self {
        self.lambda = lambda;
        self.lambda1 = lambda1;
        self.beta = beta;
        self.epsilon = epsilon;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// Number of layers, `S + 2`.
    pub fn layers(&self) -> usize {
        self.s + 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.w == 0 {
            return Err(Error::InvalidParams("W must be at least 1".into()));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("lambda1", self.lambda1),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParams(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        Ok(())
    }

    /// Human-readable notes on parameter choices that leave the regime where
    /// the closed-form results are stated (`lambda, lambda1, beta > 0`), or
    /// that silently disable an event kind.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.lambda <= 0.0 {
            out.push("lambda = 0: layers never exchange velocities".to_string());
        }
        if self.lambda1 <= 0.0 {
            out.push("lambda1 = 0: no horizontal flow".to_string());
        }
        if self.beta <= 0.0 {
            out.push("beta = 0: boundaries exert no influence (free boundary)".to_string());
        }
        if self.lambda1 > 0.0 && self.w < 2 {
            out.push("lambda1 > 0 with W < 2: horizontal flow is disabled on a width-1 torus".to_string());
        }
        out
    }
}

/// Per-layer counts of each site state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerCounts {
    pub hole: usize,
    pub zero: usize,
    pub vee: usize,
}

impl LayerCounts {
    pub fn total(&self) -> usize {
        self.hole + self.zero + self.vee
    }

    pub fn get(&self, v: Velocity) -> usize {
        match v {
            Velocity::Hole => self.hole,
            Velocity::Zero => self.zero,
            Velocity::Vee => self.vee,
        }
    }

    pub(crate) fn get_mut(&mut self, v: Velocity) -> &mut usize {
        match v {
            Velocity::Hole => &mut self.hole,
            Velocity::Zero => &mut self.zero,
            Velocity::Vee => &mut self.vee,
        }
    }
}

/// A `(S + 2) x W` grid of site states, periodic in `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    s: usize,
    w: usize,
    cells: Vec<Velocity>,
}

impl Configuration {
    /// Configuration with every site set to `fill`.
    pub fn filled(s: usize, w: usize, fill: Velocity) -> Self {
        Configuration {
            s,
            w,
            cells: vec![fill; (s + 2) * w],
        }
    }

    /// Builds a configuration from rows listed bottom (layer 0) to top.
    pub fn from_layers(layers: &[Vec<Velocity>]) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::Parse("need at least two layers".into()));
        }
        let w = layers[0].len();
        if w == 0 || layers.iter().any(|l| l.len() != w) {
            return Err(Error::Parse("layers must be non-empty and of equal width".into()));
        }
        Ok(Configuration {
            s: layers.len() - 2,
            w,
            cells: layers.concat(),
        })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn layers(&self) -> usize {
        self.s + 2
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Flat index of site `(k, x)`; `x` wraps modulo `W`.
    #[inline]
    pub fn site(&self, k: usize, x: usize) -> usize {
        debug_assert!(k < self.layers());
        k * self.w + x % self.w
    }

    #[inline]
    pub fn get(&self, k: usize, x: usize) -> Velocity {
        self.cells[self.site(k, x)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, x: usize, v: Velocity) {
        let i = self.site(k, x);
        self.cells[i] = v;
    }

    pub fn cells(&self) -> &[Velocity] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [Velocity] {
        &mut self.cells
    }

    pub fn layer(&self, k: usize) -> &[Velocity] {
        &self.cells[k * self.w..(k + 1) * self.w]
    }

    /// Number of particles (sites that are not holes).
    pub fn total_particles(&self) -> usize {
        self.cells.iter().filter(|v| v.is_particle()).count()
    }

    pub fn layer_histogram(&self) -> Vec<LayerCounts> {
        (0..self.layers())
            .map(|k| {
                let mut c = LayerCounts::default();
                for &v in self.layer(k) {
                    *c.get_mut(v) += 1;
                }
                c
            })
            .collect()
    }

    /// Particle density `total_particles / ((S + 2) W)`.
    pub fn density(&self) -> f64 {
        self.total_particles() as f64 / self.cells.len() as f64
    }

    pub fn check_matches(&self, params: &Params) -> Result<()> {
        if self.s != params.s || self.w != params.w {
            return Err(Error::InvalidParams(format!(
                "configuration is S={} W={} but params say S={} W={}",
                self.s, self.w, params.s, params.w
            )));
        }
        Ok(())
    }
}

/// Independent product law: each site is a hole with probability `1 - rho`,
/// otherwise a particle with velocity `V` with probability `vee_share` and `0`
/// otherwise.
pub fn init_product_with<R: Rng + ?Sized>(params: &Params, vee_share: f64, rng: &mut R) -> Result<Configuration> {
    params.validate()?;
    if !(0.0..=1.0).contains(&vee_share) {
        return Err(Error::InvalidParams(format!("vee_share must lie in [0, 1], got {vee_share}")));
    }
    let mut config = Configuration::filled(params.s, params.w, Velocity::Hole);
    let hole_prob = 1.0 - params.rho;
    for cell in config.cells_mut() {
        let u: f64 = rng.random();
        if u >= hole_prob {
            let c: f64 = rng.random();
            *cell = if c < vee_share { Velocity::Vee } else { Velocity::Zero };
        }
    }
    Ok(config)
}

/// Translation-invariant product configuration with an even `0`/`V` split.
pub fn init_product(params: &Params, seed: u64) -> Result<Configuration> {
    init_product_with(params, 0.5, &mut rng::init_stream(seed, 0))
}

/// Text format: a header line `S W`, then `S + 2` lines of `W` characters
/// from `{., 0, V}`, layer 0 first.
impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.s, self.w)?;
        for k in 0..self.layers() {
            let line: String = self.layer(k).iter().map(|v| v.as_char()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let mut dims = header.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad header {header:?}: {e}")))
        });
        let (s, w) = match (dims.next(), dims.next(), dims.next()) {
            (Some(s), Some(w), None) => (s?, w?),
            _ => return Err(Error::Parse(format!("header must be `S W`, got {header:?}"))),
        };
        let mut layers = Vec::with_capacity(s + 2);
        for (k, line) in lines.enumerate() {
            if k >= s + 2 {
                if line.is_empty() {
                    continue;
                }
                return Err(Error::Parse(format!("more than S+2 = {} layers", s + 2)));
            }
            let row = line
                .chars()
                .map(|c| Velocity::from_char(c).ok_or_else(|| Error::Parse(format!("layer {k}: bad site {c:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != w {
                return Err(Error::Parse(format!("layer {k} has {} sites, expected {w}", row.len())));
            }
            layers.push(row);
        }
        if layers.len() != s + 2 {
            return Err(Error::Parse(format!("expected {} layers, found {}", s + 2, layers.len())));
        }
        Configuration::from_layers(&layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_zero_gives_all_holes() {
        let p = Params::new(3, 50).with_rho(0.0);
        let c = init_product(&p, 1).unwrap();
        assert_eq!(c.total_particles(), 0);
        assert!(c.cells().iter().all(|&v| v == Velocity::Hole));
    }

    #[test]
    fn rho_one_has_no_holes_and_even_split() {
        let p = Params::new(0, 5000).with_rho(1.0);
        let c = init_product(&p, 3).unwrap();
        assert_eq!(c.total_particles(), c.len());
        let vee = c.cells().iter().filter(|&&v| v == Velocity::Vee).count();
        let frac = vee as f64 / c.len() as f64;
        assert!((frac - 0.5).abs() < 0.02, "Vee fraction {frac}");
    }

    #[test]
    fn init_is_deterministic_in_seed() {
        let p = Params::new(4, 64);
        assert_eq!(init_product(&p, 11).unwrap(), init_product(&p, 11).unwrap());
        assert_ne!(init_product(&p, 11).unwrap(), init_product(&p, 12).unwrap());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(init_product(&Params::new(1, 0), 0).is_err());
        assert!(init_product(&Params::new(1, 4).with_rho(1.5), 0).is_err());
        assert!(init_product(&Params::new(1, 4).with_epsilon(-1.0), 0).is_err());
        assert!(init_product(&Params::new(1, 4).with_epsilon(f64::NAN), 0).is_err());
    }

    #[test]
    fn particle_counts() {
        assert_eq!(Configuration::filled(2, 3, Velocity::Hole).total_particles(), 0);
        assert_eq!(Configuration::filled(2, 3, Velocity::Vee).total_particles(), 12);
    }

    #[test]
    fn histogram_single_vee() {
        let mut c = Configuration::filled(0, 2, Velocity::Hole);
        c.set(0, 0, Velocity::Vee);
        let h = c.layer_histogram();
        assert_eq!(h[0], LayerCounts { hole: 1, zero: 0, vee: 1 });
        assert_eq!(h[1], LayerCounts { hole: 2, zero: 0, vee: 0 });
        let all_holes = Configuration::filled(3, 7, Velocity::Hole).layer_histogram();
        assert!(all_holes.iter().all(|c| *c == LayerCounts { hole: 7, zero: 0, vee: 0 }));
    }

    #[test]
    fn histogram_partitions_particles() {
        let c = init_product(&Params::new(5, 33), 9).unwrap();
        let h = c.layer_histogram();
        assert!(h.iter().all(|l| l.total() == 33));
        assert_eq!(h.iter().map(|l| l.zero + l.vee).sum::<usize>(), c.total_particles());
    }

    #[test]
    fn x_wraps_around() {
        let mut c = Configuration::filled(0, 4, Velocity::Hole);
        c.set(1, 5, Velocity::Zero);
        assert_eq!(c.get(1, 1), Velocity::Zero);
    }

    #[test]
    fn column_marginals_are_translation_invariant() {
        // Each column's per-layer state frequencies over many seeds agree
        // within binomial error.
        let p = Params::new(1, 4).with_rho(0.6);
        let n = 4000;
        let mut counts = vec![[0usize; 3]; p.w];
        for seed in 0..n {
            let c = init_product(&p, seed).unwrap();
            for (x, col) in counts.iter_mut().enumerate() {
                col[c.get(0, x).index()] += 1;
            }
        }
        for v in Velocity::ALL {
            let expected = match v {
                Velocity::Hole => 0.4,
                _ => 0.3,
            };
            let sd = (expected * (1.0 - expected) / n as f64).sqrt();
            for col in &counts {
                let f = col[v.index()] as f64 / n as f64;
                assert!((f - expected).abs() < 4.0 * sd, "{v:?}: {f} vs {expected}");
            }
        }
    }

    #[test]
    fn text_format() {
        let text = "1 3\n.0V\nVV.\n0..\n";
        let c: Configuration = text.parse().unwrap();
        assert_eq!(c.s(), 1);
        assert_eq!(c.get(0, 2), Velocity::Vee);
        assert_eq!(c.get(2, 0), Velocity::Zero);
        assert_eq!(c.to_string(), text);
        assert!("1 3\n.0V\nVV.\n".parse::<Configuration>().is_err());
        assert!("1 3\n.0X\nVV.\n0..\n".parse::<Configuration>().is_err());
        assert!("1 3\n.0\nVV.\n0..\n".parse::<Configuration>().is_err());
        assert!("1\n".parse::<Configuration>().is_err());
    }

    #[test]
    fn warnings_flag_theorem_preconditions() {
        assert!(Params::default().warnings().is_empty());
        let p = Params::new(2, 1).with_rates(1.0, 1.0, 0.0, 0.0);
        let w = p.warnings();
        assert_eq!(w.len(), 2);
    }
}
