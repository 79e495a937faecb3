//! Exact Markov chain of a single column.
//!
//! A column of `S + 2` sites with the vertical part of the strip dynamics
//! (exchanges at `lambda`, boundary flips at `beta`, perturbations at
//! `eps`; no horizontal flow). Its one-site marginals satisfy exactly the
//! equations of [`crate::moments`], which makes it ground truth for the
//! moment closure at small `S`.
//!
//! The chain never changes the number of holes, so it splits into sectors
//! with a fixed hole count. Stationary laws are computed per sector and
//! mixed with the initial sector weights.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::lattice::{Params, Velocity};
use crate::moments::MarginalProfile;

/// Largest `S` accepted: `3^(S+2) = 59049` states.
pub const MAX_S: usize = 8;

/// Sectors up to this size are solved densely; larger ones iteratively.
const DENSE_LIMIT: usize = 1500;

/// One column, layer 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnState(pub Vec<Velocity>);

impl ColumnState {
    /// Base-3 code with layer `k` as digit `k`.
    pub fn encode(&self) -> usize {
        self.0.iter().rev().fold(0, |acc, v| acc * 3 + v.index())
    }

    pub fn decode(mut code: usize, layers: usize) -> ColumnState {
        let mut v = Vec::with_capacity(layers);
        for _ in 0..layers {
            v.push(Velocity::from_index(code % 3).expect("digit < 3"));
            code /= 3;
        }
        ColumnState(v)
    }

    pub fn holes(&self) -> usize {
        self.0.iter().filter(|v| !v.is_particle()).count()
    }
}

/// Sparse generator: off-diagonal rates per row, diagonal kept separately
/// so that every row sums to zero.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    layers: usize,
    rows: Vec<Vec<(u32, f64)>>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn states(&self) -> usize {
        self.diag.len()
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn off_diagonal_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.diag[i] + self.rows[i].iter().map(|e| e.1).sum::<f64>()
    }

    fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(-d))
    }

    /// `pi Q` for a row vector `pi`.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = pi.iter().zip(&self.diag).map(|(p, d)| p * d).collect();
        for (i, row) in self.rows.iter().enumerate() {
            if pi[i] != 0.0 {
                for &(j, r) in row {
                    out[j as usize] += pi[i] * r;
                }
            }
        }
        out
    }

    /// Debug dump, one `row,col,rate` line per non-zero entry.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "row,col,rate")?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut entries: Vec<(u32, f64)> = row.clone();
            if self.diag[i] != 0.0 {
                entries.push((i as u32, self.diag[i]));
            }
            entries.sort_by_key(|e| e.0);
            for (j, r) in entries {
                writeln!(out, "{i},{j},{r}")?;
            }
        }
        Ok(())
    }
}

/// Builds the column generator. Transitions that leave the state unchanged
/// (exchanging equal values) are omitted; transitions of different kinds
/// reaching the same state are merged.
pub fn build_generator(params: &Params) -> Result<GeneratorMatrix> {
    params.validate()?;
    if params.s > MAX_S {
        return Err(Error::Capacity { s: params.s, cap: MAX_S });
    }
    let layers = params.layers();
    let n = 3usize.pow(layers as u32);
    let mut rows = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    for code in 0..n {
        let state = ColumnState::decode(code, layers).0;
        let mut row: Vec<(u32, f64)> = Vec::new();
        let mut add = |next: &[Velocity], rate: f64| {
            if rate <= 0.0 {
                return;
            }
            let j = ColumnState(next.to_vec()).encode() as u32;
            match row.iter_mut().find(|e| e.0 == j) {
                Some(e) => e.1 += rate,
                None => row.push((j, rate)),
            }
        };
        for k in 0..layers - 1 {
            if state[k] != state[k + 1] {
                let mut next = state.clone();
                next.swap(k, k + 1);
                add(&next, params.lambda);
            }
        }
        if state[0] == Velocity::Vee {
            let mut next = state.clone();
            next[0] = Velocity::Zero;
            add(&next, params.beta);
        }
        if state[layers - 1] == Velocity::Zero {
            let mut next = state.clone();
            next[layers - 1] = Velocity::Vee;
            add(&next, params.beta);
        }
        for k in 0..layers {
            if state[k].is_particle() {
                let mut next = state.clone();
                next[k] = state[k].flipped();
                add(&next, params.epsilon);
            }
        }
        row.sort_by_key(|e| e.0);
        diag.push(-row.iter().map(|e| e.1).sum::<f64>());
        rows.push(row);
    }
    Ok(GeneratorMatrix { layers, rows, diag })
}

fn check_distribution(pi: &[f64], states: usize) -> Result<()> {
    if pi.len() != states {
        return Err(Error::InvalidDistribution(format!("length {} but chain has {states} states", pi.len())));
    }
    if let Some(p) = pi.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDistribution(format!("negative or non-finite entry {p}")));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!("total mass {total} != 1")));
    }
    Ok(())
}

/// Transient law `pi0 exp(Q t)` by uniformization.
///
/// The horizon is split into chunks with `Lambda * tau <= 30` so the Poisson
/// weights never underflow; each chunk truncates the Poisson series once the
/// neglected mass falls below its share of the `1e-10` total budget.
pub fn evolve(pi0: &[f64], q: &GeneratorMatrix, t: f64) -> Result<Vec<f64>> {
    check_distribution(pi0, q.states())?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!("t must be finite and non-negative, got {t}")));
    }
    let rate = q.max_exit_rate();
    if t == 0.0 || rate == 0.0 {
        return Ok(pi0.to_vec());
    }
    let chunks = (rate * t / 30.0).ceil().max(1.0) as usize;
    let tau = t / chunks as f64;
    let a = rate * tau;
    let tol = 1e-10 / chunks as f64;

    let mut pi = pi0.to_vec();
    let mut term = vec![0.0; pi.len()];
    let mut next = vec![0.0; pi.len()];
    for _ in 0..chunks {
        let mut weight = (-a).exp();
        let mut mass = weight;
        term.copy_from_slice(&pi);
        let mut acc: Vec<f64> = term.iter().map(|x| x * weight).collect();
        let mut n = 0u32;
        while 1.0 - mass > tol && n < 10_000 {
            n += 1;
            // next = term * (I + Q / rate)
            for (j, x) in next.iter_mut().enumerate() {
                *x = term[j] * (1.0 + q.diag[j] / rate);
            }
            for (i, row) in q.rows.iter().enumerate() {
                let ti = term[i];
                if ti != 0.0 {
                    for &(j, r) in row {
                        next[j as usize] += ti * r / rate;
                    }
                }
            }
            std::mem::swap(&mut term, &mut next);
            weight *= a / n as f64;
            mass += weight;
            for (s, x) in acc.iter_mut().zip(&term) {
                *s += weight * x;
            }
        }
        let total: f64 = acc.iter().sum();
        pi = acc.into_iter().map(|x| x / total).collect();
    }
    Ok(pi)
}

/// Probability mass in each hole-count sector `0..=S+2`.
pub fn sector_weights(pi: &[f64], layers: usize) -> Vec<f64> {
    let mut w = vec![0.0; layers + 1];
    for (code, p) in pi.iter().enumerate() {
        w[ColumnState::decode(code, layers).holes()] += p;
    }
    w
}

fn sector_states(q: &GeneratorMatrix, holes: usize) -> Vec<usize> {
    (0..q.states())
        .filter(|&c| ColumnState::decode(c, q.layers).holes() == holes)
        .collect()
}

/// Number of closed communicating classes of the chain restricted to
/// `states` (which must be closed under the dynamics).
fn closed_classes(q: &GeneratorMatrix, states: &[usize], local: &[u32]) -> usize {
    let mut g = DiGraph::<(), ()>::with_capacity(states.len(), 0);
    let nodes: Vec<_> = states.iter().map(|_| g.add_node(())).collect();
    for (a, &s) in states.iter().enumerate() {
        for &(j, _) in &q.rows[s] {
            g.add_edge(nodes[a], nodes[local[j as usize] as usize], ());
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; states.len()];
    for (c, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp[n.index()] = c;
        }
    }
    let mut leaves = vec![false; sccs.len()];
    for (a, &s) in states.iter().enumerate() {
        for &(j, _) in &q.rows[s] {
            if comp[local[j as usize] as usize] != comp[a] {
                leaves[comp[a]] = true;
            }
        }
    }
    leaves.iter().filter(|l| !**l).count()
}

/// Stationary law of the sector with `holes` holes, returned over the full
/// state space (zero outside the sector).
pub fn stationary_in_sector(q: &GeneratorMatrix, holes: usize) -> Result<Vec<f64>> {
    stationary_in_sector_with(q, holes, DENSE_LIMIT)
}

pub(crate) fn stationary_in_sector_with(q: &GeneratorMatrix, holes: usize, dense_limit: usize) -> Result<Vec<f64>> {
    if holes > q.layers {
        return Err(Error::InvalidParams(format!("a column has at most {} holes", q.layers)));
    }
    let states = sector_states(q, holes);
    let m = states.len();
    let mut local = vec![u32::MAX; q.states()];
    for (a, &s) in states.iter().enumerate() {
        local[s] = a as u32;
    }
    let classes = closed_classes(q, &states, &local);
    if classes != 1 {
        return Err(Error::ReducibleSector { holes, classes });
    }
    let pi_local = if m == 1 {
        vec![1.0]
    } else if m <= dense_limit {
        dense_stationary(q, &states, &local)?
    } else {
        iterative_stationary(q, &states, &local)?
    };
    let mut pi = vec![0.0; q.states()];
    for (a, &s) in states.iter().enumerate() {
        pi[s] = pi_local[a];
    }
    let res = q.left_multiply(&pi).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = q.max_exit_rate().max(1.0);
    if res > 1e-10 * scale {
        return Err(Error::Singular(format!("stationary solve residual {res:e} too large")));
    }
    Ok(pi)
}

fn dense_stationary(q: &GeneratorMatrix, states: &[usize], local: &[u32]) -> Result<Vec<f64>> {
    let m = states.len();
    // Rows of A are the balance equations (columns of Q); row 0 is replaced
    // by the normalisation.
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (i, &s) in states.iter().enumerate() {
        a[(i, i)] += q.diag[s];
        for &(j, r) in &q.rows[s] {
            a[(local[j as usize] as usize, i)] += r;
        }
    }
    for c in 0..m {
        a[(0, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[0] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("sector balance equations are singular".into()))?;
    Ok(x.iter().map(|v| v.max(0.0)).collect())
}

fn iterative_stationary(q: &GeneratorMatrix, states: &[usize], local: &[u32]) -> Result<Vec<f64>> {
    // Gauss-Seidel on the balance equations pi_j exit_j = sum_i pi_i q_ij.
    let m = states.len();
    let mut incoming: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
    for (i, &s) in states.iter().enumerate() {
        for &(j, r) in &q.rows[s] {
            incoming[local[j as usize] as usize].push((i as u32, r));
        }
    }
    let exit: Vec<f64> = states.iter().map(|&s| -q.diag[s]).collect();
    let mut pi = vec![1.0 / m as f64; m];
    for sweep in 0..200_000 {
        let mut change = 0.0f64;
        for j in 0..m {
            if exit[j] > 0.0 {
                let v = incoming[j].iter().map(|&(i, r)| pi[i as usize] * r).sum::<f64>() / exit[j];
                change = change.max((v - pi[j]).abs());
                pi[j] = v;
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 16 == 0 && change < 1e-15 {
            break;
        }
    }
    Ok(pi)
}

/// Stationary law reached from `pi0`: each sector's stationary law weighted
/// by the mass `pi0` puts on that sector.
pub fn stationary_mixture(q: &GeneratorMatrix, pi0: &[f64]) -> Result<Vec<f64>> {
    check_distribution(pi0, q.states())?;
    let mut out = vec![0.0; q.states()];
    for (holes, w) in sector_weights(pi0, q.layers).into_iter().enumerate() {
        if w > 0.0 {
            let g = stationary_in_sector(q, holes)?;
            for (o, p) in out.iter_mut().zip(g) {
                *o += w * p;
            }
        }
    }
    Ok(out)
}

/// One-site marginals of a column law.
pub fn marginals(pi: &[f64], s: usize) -> MarginalProfile {
    let layers = s + 2;
    let mut p_hole = vec![0.0; layers];
    let mut p_v = vec![0.0; layers];
    for (code, &p) in pi.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut c = code;
        for k in 0..layers {
            match c % 3 {
                0 => p_hole[k] += p,
                2 => p_v[k] += p,
                _ => {}
            }
            c /= 3;
        }
    }
    MarginalProfile { t: 0.0, p_hole, p_v }
}

/// Independent sites with the given per-layer hole and `V` probabilities.
pub fn product_law(profile: &MarginalProfile) -> Result<Vec<f64>> {
    if !profile.is_valid(0.0) {
        return Err(Error::InvalidDistribution("per-layer probabilities out of range".into()));
    }
    let layers = profile.layers();
    if layers > MAX_S + 2 {
        return Err(Error::Capacity { s: layers - 2, cap: MAX_S });
    }
    let probs: Vec<[f64; 3]> = profile
        .p_hole
        .iter()
        .zip(&profile.p_v)
        .map(|(&h, &v)| [h, (1.0 - h - v).max(0.0), v])
        .collect();
    Ok((0..3usize.pow(layers as u32))
        .map(|code| {
            let mut c = code;
            probs.iter().fold(1.0, |acc, p| {
                let d = c % 3;
                c /= 3;
                acc * p[d]
            })
        })
        .collect())
}

pub fn point_mass(state: &ColumnState) -> Vec<f64> {
    let mut pi = vec![0.0; 3usize.pow(state.0.len() as u32)];
    pi[state.encode()] = 1.0;
    pi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::{linear_profile, solve_stationary_system};
    use rand::Rng;

    fn params(s: usize, lambda: f64, beta: f64, eps: f64) -> Params {
        Params::new(s, 1).with_rates(lambda, 0.0, beta, eps)
    }

    fn random_params(s: usize, seed: u64) -> Params {
        let mut rng = crate::rng::stream(seed, 0);
        params(s, rng.random_range(0.2..3.0), rng.random_range(0.2..3.0), rng.random_range(0.0..3.0))
    }

    #[test]
    fn encoding_round_trips() {
        for code in 0..81 {
            assert_eq!(ColumnState::decode(code, 4).encode(), code);
        }
        let s = ColumnState(vec![Velocity::Vee, Velocity::Hole, Velocity::Zero]);
        assert_eq!(s.encode(), 2 + 9);
    }

    #[test]
    fn smallest_chain_entry_count() {
        // 24 raw transitions on the 9 two-site states; the bottom and top
        // flips coincide with a perturbation of the same site in 3 states
        // each, leaving 18 distinct off-diagonal entries.
        let q = build_generator(&params(0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(q.states(), 9);
        assert_eq!(q.off_diagonal_count(), 18);
        let raw: f64 = (0..9).map(|i| -q.diagonal(i)).sum();
        assert_eq!(raw, 24.0);
    }

    #[test]
    fn rows_sum_to_zero() {
        let q = build_generator(&random_params(2, 3)).unwrap();
        for i in 0..q.states() {
            assert!(q.row_sum(i).abs() < 1e-12);
            assert!(q.row(i).iter().all(|e| e.1 >= 0.0));
        }
    }

    #[test]
    fn sectors_are_preserved() {
        let q = build_generator(&random_params(1, 4)).unwrap();
        for i in 0..q.states() {
            let h = ColumnState::decode(i, 3).holes();
            for &(j, _) in q.row(i) {
                assert_eq!(ColumnState::decode(j as usize, 3).holes(), h);
            }
        }
    }

    #[test]
    fn capacity_cap() {
        assert!(matches!(build_generator(&params(9, 1.0, 1.0, 1.0)), Err(Error::Capacity { s: 9, cap: 8 })));
    }

    #[test]
    fn evolve_edge_cases() {
        let q = build_generator(&params(1, 1.0, 1.0, 1.0)).unwrap();
        let pi0 = product_law(&MarginalProfile::new(vec![0.2, 0.3, 0.1], vec![0.5, 0.2, 0.4]).unwrap()).unwrap();
        assert_eq!(evolve(&pi0, &q, 0.0).unwrap(), pi0);
        let frozen = build_generator(&params(1, 0.0, 0.0, 0.0)).unwrap();
        let pm = point_mass(&ColumnState(vec![Velocity::Vee, Velocity::Zero, Velocity::Hole]));
        assert_eq!(evolve(&pm, &frozen, 7.0).unwrap(), pm);
        assert!(evolve(&vec![0.5; 27], &q, 1.0).is_err());
        let mut neg = pm.clone();
        neg[0] = -0.1;
        neg[1] = 0.1;
        assert!(evolve(&neg, &q, 1.0).is_err());
    }

    #[test]
    fn evolve_conserves_sector_mass() {
        let q = build_generator(&random_params(1, 5)).unwrap();
        let pi0 = product_law(&MarginalProfile::new(vec![0.3, 0.6, 0.1], vec![0.2, 0.1, 0.5]).unwrap()).unwrap();
        let before = sector_weights(&pi0, 3);
        let after = sector_weights(&evolve(&pi0, &q, 5.0).unwrap(), 3);
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn evolve_long_horizon_reaches_stationarity() {
        let q = build_generator(&params(1, 1.0, 1.0, 1.0)).unwrap();
        let pi0 = point_mass(&ColumnState(vec![Velocity::Zero; 3]));
        let late = evolve(&pi0, &q, 200.0).unwrap();
        let exact = stationary_in_sector(&q, 0).unwrap();
        for (a, b) in late.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn unperturbed_sector_reproduces_linear_profile() {
        let q = build_generator(&params(1, 1.0, 1.0, 0.0)).unwrap();
        let m = marginals(&stationary_in_sector(&q, 0).unwrap(), 1);
        for (k, v) in m.p_v.iter().enumerate() {
            assert!((v - (k + 1) as f64 / 4.0).abs() < 1e-10);
        }
        let lin = linear_profile(&Params::new(1, 1).with_rho(1.0)).unwrap();
        for (a, b) in m.p_v.iter().zip(&lin.mu_v) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sector_law_has_mirror_symmetry() {
        // Reversing the column and exchanging 0 <-> V maps the dynamics to
        // itself, so the sector law is invariant.
        let q = build_generator(&params(2, 1.3, 0.7, 0.4)).unwrap();
        for holes in 0..=4 {
            let pi = stationary_in_sector(&q, holes).unwrap();
            for code in 0..q.states() {
                let s = ColumnState::decode(code, 4);
                let mirrored = ColumnState(s.0.iter().rev().map(|v| v.flipped()).collect());
                assert!((pi[code] - pi[mirrored.encode()]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_holes_uniform_and_match_linear_solve() {
        let p = params(2, 0.9, 1.4, 0.6).with_rho(0.55);
        let q = build_generator(&p).unwrap();
        let pi0 = product_law(&MarginalProfile::from_density(&p, 0.3)).unwrap();
        let m = marginals(&stationary_mixture(&q, &pi0).unwrap(), 2);
        for h in &m.p_hole {
            assert!((h - 0.45).abs() < 1e-10);
        }
        let sol = solve_stationary_system(&p).unwrap();
        for (a, b) in m.p_v.iter().zip(&sol.mu_v) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn reducible_sector_detected() {
        // Only exchanges: the numbers of 0s and Vs are conserved too.
        let q = build_generator(&params(1, 1.0, 0.0, 0.0)).unwrap();
        match stationary_in_sector(&q, 1) {
            Err(Error::ReducibleSector { holes: 1, classes }) => assert_eq!(classes, 3),
            other => panic!("expected reducible sector, got {other:?}"),
        }
        // The all-hole sector is a single state.
        assert_eq!(stationary_in_sector(&q, 3).unwrap()[0], 1.0);
    }

    #[test]
    fn iterative_solver_matches_dense() {
        let q = build_generator(&params(3, 1.0, 0.8, 0.3)).unwrap();
        let dense = stationary_in_sector_with(&q, 1, usize::MAX).unwrap();
        let iter = stationary_in_sector_with(&q, 1, 0).unwrap();
        for (a, b) in dense.iter().zip(&iter) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn marginal_edge_cases() {
        let m = marginals(&point_mass(&ColumnState(vec![Velocity::Hole; 4])), 2);
        assert!(m.p_hole.iter().all(|&h| h == 1.0));
        let m = marginals(&vec![1.0 / 27.0; 27], 1);
        for k in 0..3 {
            assert!((m.p_hole[k] - 1.0 / 3.0).abs() < 1e-15);
            assert!((m.p_v[k] - 1.0 / 3.0).abs() < 1e-15);
        }
        let prof = MarginalProfile::new(vec![0.1, 0.7, 0.25], vec![0.6, 0.05, 0.5]).unwrap();
        let m = marginals(&product_law(&prof).unwrap(), 1);
        for k in 0..3 {
            assert!((m.p_hole[k] - prof.p_hole[k]).abs() < 1e-15);
            assert!((m.p_v[k] - prof.p_v[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn within_sector_details_are_forgotten() {
        let q = build_generator(&params(2, 1.0, 0.5, 0.2)).unwrap();
        let a = point_mass(&ColumnState(vec![Velocity::Hole, Velocity::Vee, Velocity::Vee, Velocity::Vee]));
        let b = point_mass(&ColumnState(vec![Velocity::Zero, Velocity::Zero, Velocity::Zero, Velocity::Hole]));
        let (ma, mb) = (marginals(&evolve(&a, &q, 150.0).unwrap(), 2), marginals(&evolve(&b, &q, 150.0).unwrap(), 2));
        for k in 0..4 {
            assert!((ma.p_v[k] - mb.p_v[k]).abs() < 1e-9);
            assert!((ma.p_hole[k] - mb.p_hole[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_dump() {
        let q = build_generator(&params(0, 1.0, 0.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,col,rate\n"));
        // 6 unequal pairs: one off-diagonal and one diagonal entry each
        assert_eq!(text.lines().count(), 1 + 12);
    }
}
