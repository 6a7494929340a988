//! Local-unitary canonicalization.
//!
//! `U(d)` is parametrized as `Φ_α A_{d,2} ... A_{d,d} Φ_β`, where `A_{d,k}`
//! embeds the k×k block
//!
//! ```text
//! [ I - (1 - cos θ)|a><a|   sin θ |a> ]
//! [ -sin θ <a|              cos θ     ]
//! ```
//!
//! into the top-left corner. Searches over these parameters start from a few
//! polar-decomposition sweeps and finish with a coordinate-wise golden-section
//! search.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigh, max_dev_from_identity, max_principal_angle, polar_maximizer, CMatrix};
use crate::state::{reduced_density_matrix, seeded_rng, PureState, C64, ZERO};
use crate::subspace::SubspaceProjector;

/// Fidelity at or above `1 - EQUALITY_EPS` counts as LU-equal.
pub const EQUALITY_EPS: f64 = 1e-6;
/// Largest principal angle at which two spans count as LU-equal.
pub const SUBSPACE_ANGLE_TOL: f64 = 1e-6;
/// Amplitudes below this modulus print as zero.
pub const DISPLAY_ZERO: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-8;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JarlskogParams {
    pub d: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `theta[k - 2]` is the angle of block `k`.
    pub theta: Vec<f64>,
    /// `a[k - 2]` has length `k - 1`.
    pub a: Vec<Vec<C64>>,
}

impl JarlskogParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, theta: Vec<f64>, a: Vec<Vec<C64>>) -> Result<Self> {
        let d = alpha.len();
        let p = JarlskogParams { d, alpha, beta, theta, a };
        p.validate()?;
        Ok(p)
    }

    pub fn identity(d: usize) -> Self {
        let a = (2..=d)
            .map(|k| {
                let mut v = vec![ZERO; k - 1];
                v[0] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        JarlskogParams { d, alpha: vec![0.0; d], beta: vec![0.0; d], theta: vec![0.0; d.saturating_sub(1)], a }
    }

    /// Independent uniform phases and angles, Gaussian directions.
    pub fn random<R: Rng>(d: usize, rng: &mut R) -> Self {
        let tau = std::f64::consts::TAU;
        let mut reals = Vec::with_capacity(Self::real_count(d));
        for _ in 0..2 * d + d.saturating_sub(1) {
            reals.push(rng.gen::<f64>() * tau);
        }
        for _ in 0..d * d.saturating_sub(1) {
            reals.push(rng.sample(StandardNormal));
        }
        Self::from_reals(d, &reals).expect("length matches")
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        if d == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if self.beta.len() != d || self.theta.len() != d - 1 || self.a.len() != d - 1 {
            return Err(Error::InvalidConfig(format!("parameter lengths do not match d = {d}")));
        }
        for (i, v) in self.a.iter().enumerate() {
            if v.len() != i + 1 {
                return Err(Error::InvalidConfig(format!("a_{} must have length {}", i + 2, i + 1)));
            }
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidConfig(format!("a_{} has norm^2 {n}", i + 2)));
            }
        }
        Ok(())
    }

    /// `d^2 + 2d - 1`.
    pub fn real_count(d: usize) -> usize {
        d * d + 2 * d - 1
    }

    /// Layout: alpha, beta, theta, then (re, im) pairs of every `a_k`.
    pub fn to_reals(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::real_count(self.d));
        out.extend(&self.alpha);
        out.extend(&self.beta);
        out.extend(&self.theta);
        for v in &self.a {
            for z in v {
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    /// Inverse of `to_reals`; each `a_k` is normalized, a zero vector becomes `e_1`.
    pub fn from_reals(d: usize, x: &[f64]) -> Result<Self> {
        if d == 0 || x.len() != Self::real_count(d) {
            return Err(Error::LengthMismatch { expected: Self::real_count(d.max(1)), got: x.len() });
        }
        let alpha = x[..d].to_vec();
        let beta = x[d..2 * d].to_vec();
        let theta = x[2 * d..3 * d - 1].to_vec();
        let mut off = 3 * d - 1;
        let mut a = Vec::with_capacity(d - 1);
        for k in 2..=d {
            let mut v: Vec<C64> = (0..k - 1).map(|j| C64::new(x[off + 2 * j], x[off + 2 * j + 1])).collect();
            off += 2 * (k - 1);
            normalize_or_e1(&mut v);
            a.push(v);
        }
        Ok(JarlskogParams { d, alpha, beta, theta, a })
    }
}

fn normalize_or_e1(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n < 1e-300 || !n.is_finite() {
        v.iter_mut().for_each(|z| *z = ZERO);
        v[0] = C64::new(1.0, 0.0);
    } else {
        v.iter_mut().for_each(|z| *z /= n);
    }
}

/// `A_{d,k}`: the k×k block in the top-left corner, identity elsewhere.
pub fn jarlskog_block(d: usize, k: usize, theta: f64, a: &[C64]) -> CMatrix {
    let mut m = CMatrix::identity(d, d);
    let (s, c) = theta.sin_cos();
    for i in 0..k - 1 {
        for j in 0..k - 1 {
            m[(i, j)] -= (1.0 - c) * a[i] * a[j].conj();
        }
        m[(i, k - 1)] = s * a[i];
        m[(k - 1, i)] = -s * a[i].conj();
    }
    m[(k - 1, k - 1)] = C64::new(c, 0.0);
    m
}

pub fn jarlskog_unitary(p: &JarlskogParams) -> CMatrix {
    let d = p.d;
    let mut y = CMatrix::identity(d, d);
    for k in 2..=d {
        y *= jarlskog_block(d, k, p.theta[k - 2], &p.a[k - 2]);
    }
    for i in 0..d {
        let l = C64::from_polar(1.0, p.alpha[i]);
        for j in 0..d {
            y[(i, j)] *= l * C64::from_polar(1.0, p.beta[j]);
        }
    }
    y
}

/// Parameters reproducing a given unitary.
pub fn jarlskog_decompose(u: &CMatrix) -> Result<JarlskogParams> {
    let d = u.nrows();
    if d == 0 || u.ncols() != d {
        return Err(Error::InvalidShape(format!("expected a square matrix, got {}x{}", u.nrows(), u.ncols())));
    }
    let dev = max_dev_from_identity(&(u.adjoint() * u));
    if dev > UNITARY_TOL {
        return Err(Error::InvalidConfig(format!("matrix is not unitary (deviation {dev:e})")));
    }
    let mut p = decompose_rec(u);
    for v in p.a.iter_mut() {
        normalize_or_e1(v);
    }
    Ok(p)
}

fn decompose_rec(u: &CMatrix) -> JarlskogParams {
    let d = u.nrows();
    if d == 1 {
        return JarlskogParams { d: 1, alpha: vec![u[(0, 0)].arg()], beta: vec![0.0], theta: vec![], a: vec![] };
    }
    let last = d - 1;
    let corner = u[(last, last)];
    let c = corner.norm().min(1.0);
    let phase = if c > 0.0 { corner.arg() } else { 0.0 };
    let s = (0..last).map(|j| u[(last, j)].norm_sqr()).sum::<f64>().sqrt();
    let theta = s.atan2(c);
    let mut a: Vec<C64> = if s > 1e-14 {
        (0..last).map(|j| -u[(last, j)].conj() / s).collect()
    } else {
        let mut v = vec![ZERO; last];
        v[0] = C64::new(1.0, 0.0);
        v
    };
    normalize_or_e1(&mut a);
    let block = jarlskog_block(d, d, theta, &a);
    let mut v = u.clone();
    for i in 0..d {
        v[(i, last)] *= C64::from_polar(1.0, -phase);
    }
    let v = v * block.adjoint();
    let inner = decompose_rec(&v.view((0, 0), (last, last)).into_owned());
    for (z, b) in a.iter_mut().zip(&inner.beta) {
        *z *= C64::from_polar(1.0, *b);
    }
    let mut alpha = inner.alpha;
    alpha.push(0.0);
    let mut beta = inner.beta;
    beta.push(phase);
    let mut thetas = inner.theta;
    thetas.push(theta);
    let mut avs = inner.a;
    avs.push(a);
    JarlskogParams { d, alpha, beta, theta: thetas, a: avs }
}

/// Haar-distributed unitary.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    polar_maximizer(&g)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonConfig {
    /// Starting points besides the deterministic ones.
    pub restarts: usize,
    /// Objective evaluations allowed for the whole search.
    pub budget: usize,
    pub polar_sweeps: usize,
    pub seed: u64,
}

impl Default for CanonConfig {
    fn default() -> Self {
        CanonConfig { restarts: 8, budget: 200_000, polar_sweeps: 500, seed: 0 }
    }
}

impl CanonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a fidelity maximization.
#[derive(Clone, Debug)]
pub struct LuFit {
    /// `max |<ψ|U_1 ⊗ ... ⊗ U_n|guess>|`.
    pub fidelity: f64,
    pub params: Vec<JarlskogParams>,
    pub unitaries: Vec<CMatrix>,
    /// False if the budget ran out before the search settled.
    pub converged: bool,
    pub evaluations: usize,
}

impl LuFit {
    pub fn equal(&self) -> bool {
        self.fidelity >= 1.0 - EQUALITY_EPS
    }
}

fn apply_locals_raw(amps: &[C64], dims: &[usize], us: &[CMatrix], skip: Option<usize>) -> Vec<C64> {
    let mut cur = amps.to_vec();
    let mut stride = 1;
    for site in (0..dims.len()).rev() {
        let d = dims[site];
        if skip != Some(site) {
            let u = &us[site];
            let block = d * stride;
            let mut col = vec![ZERO; d];
            for base in (0..cur.len()).step_by(block) {
                for off in 0..stride {
                    for (j, c) in col.iter_mut().enumerate() {
                        *c = cur[base + j * stride + off];
                    }
                    for i in 0..d {
                        let mut acc = ZERO;
                        for j in 0..d {
                            acc += u[(i, j)] * col[j];
                        }
                        cur[base + i * stride + off] = acc;
                    }
                }
            }
        }
        stride *= d;
    }
    cur
}

/// `X[j][i] = Σ ket[..j..] conj(bra[..i..])` over the other parties, so that
/// `<bra|U ⊗ I|ket> = Tr(U X)`.
fn local_contraction(ket: &[C64], bra: &[C64], dims: &[usize], site: usize) -> CMatrix {
    let d = dims[site];
    let stride: usize = dims[site + 1..].iter().product();
    let mut x = CMatrix::zeros(d, d);
    for base in (0..ket.len()).step_by(d * stride) {
        for off in 0..stride {
            for j in 0..d {
                let k = ket[base + j * stride + off];
                for i in 0..d {
                    x[(j, i)] += k * bra[base + i * stride + off].conj();
                }
            }
        }
    }
    x
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn unitaries_of(params: &[JarlskogParams]) -> Vec<CMatrix> {
    params.iter().map(jarlskog_unitary).collect()
}

/// Coordinate-wise golden-section maximization. Returns the best value and
/// whether the bracket shrank below `1e-9` before the budget ran out.
fn coordinate_search<F: Fn(&[f64]) -> f64>(x: &mut [f64], f: F, budget: &mut usize) -> (f64, bool) {
    let mut best = f(x);
    *budget = budget.saturating_sub(1);
    let mut h = 0.5;
    while h > 1e-9 {
        let start = best;
        for i in 0..x.len() {
            if *budget < 40 {
                return (best, false);
            }
            let x0 = x[i];
            let (mut lo, mut hi) = (x0 - h, x0 + h);
            let probe = |t: f64, x: &mut [f64]| {
                x[i] = t;
                f(x)
            };
            let mut m1 = hi - GOLDEN * (hi - lo);
            let mut m2 = lo + GOLDEN * (hi - lo);
            let mut f1 = probe(m1, x);
            let mut f2 = probe(m2, x);
            let mut used = 2;
            while hi - lo > h * 1e-3 {
                if f1 >= f2 {
                    hi = m2;
                    m2 = m1;
                    f2 = f1;
                    m1 = hi - GOLDEN * (hi - lo);
                    f1 = probe(m1, x);
                } else {
                    lo = m1;
                    m1 = m2;
                    f1 = f2;
                    m2 = lo + GOLDEN * (hi - lo);
                    f2 = probe(m2, x);
                }
                used += 1;
            }
            *budget -= used;
            let (t, v) = if f1 >= f2 { (m1, f1) } else { (m2, f2) };
            if v > best {
                best = v;
                x[i] = t;
            } else {
                x[i] = x0;
            }
        }
        if best - start <= 1e-15 * best.abs().max(1.0) {
            h *= 0.25;
        }
    }
    (best, true)
}

fn params_to_reals(params: &[JarlskogParams]) -> Vec<f64> {
    params.iter().flat_map(|p| p.to_reals()).collect()
}

fn reals_to_params(dims: &[usize], x: &[f64]) -> Vec<JarlskogParams> {
    let mut off = 0;
    dims.iter()
        .map(|&d| {
            let n = JarlskogParams::real_count(d);
            let p = JarlskogParams::from_reals(d, &x[off..off + n]).expect("length matches");
            off += n;
            p
        })
        .collect()
}

fn decompose_all(us: &[CMatrix]) -> Vec<JarlskogParams> {
    us.iter().map(|u| jarlskog_decompose(u).expect("polar factors are unitary")).collect()
}

fn starts(dims: &[usize], cfg: &CanonConfig, extra: Vec<Vec<CMatrix>>) -> Vec<Vec<CMatrix>> {
    let mut out = vec![dims.iter().map(|&d| CMatrix::identity(d, d)).collect::<Vec<_>>()];
    out.extend(extra);
    for r in 0..cfg.restarts {
        let mut rng = seeded_rng(cfg.seed.wrapping_add(r as u64));
        out.push(dims.iter().map(|&d| random_unitary(d, &mut rng)).collect());
    }
    out
}

/// Alternating per-party polar updates for `|<ψ|U|φ>|`; returns the value and sweeps used.
fn polar_fidelity(psi: &PureState, phi: &PureState, us: &mut [CMatrix], max_sweeps: usize) -> (f64, usize) {
    let dims = psi.shape().dims();
    let mut last = -1.0;
    for sweep in 0..max_sweeps {
        let mut v = 0.0;
        for s in 0..dims.len() {
            let ket = apply_locals_raw(phi.amplitudes(), dims, us, Some(s));
            let x = local_contraction(&ket, psi.amplitudes(), dims, s);
            us[s] = polar_maximizer(&x);
            v = (us[s].clone() * x).trace().norm();
        }
        if v - last <= 1e-15 {
            return (v, sweep + 1);
        }
        last = v;
    }
    (last, max_sweeps)
}

/// Maximizes `|<ψ|U_1 ⊗ ... ⊗ U_n|guess>|` over local unitaries.
pub fn lu_fidelity(state: &PureState, guess: &PureState, cfg: &CanonConfig) -> Result<LuFit> {
    state.shape().ensure_same(guess.shape())?;
    cfg.validate()?;
    let dims = state.shape().dims().to_vec();
    let n = dims.len();
    let seeds = starts(&dims, cfg, vec![]);
    let share = (cfg.polar_sweeps * n).max(1);
    let runs: Vec<(f64, Vec<CMatrix>, usize)> = seeds
        .into_par_iter()
        .map(|mut us| {
            let (v, sweeps) = polar_fidelity(state, guess, &mut us, cfg.polar_sweeps);
            (v, us, sweeps * n)
        })
        .collect();
    let mut used: usize = runs.iter().map(|r| r.2).sum::<usize>().min(share * runs.len());
    let best = runs.into_iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one start");
    let mut x = params_to_reals(&decompose_all(&best.1));
    let objective = |x: &[f64]| {
        let us = unitaries_of(&reals_to_params(&dims, x));
        dot(state.amplitudes(), &apply_locals_raw(guess.amplitudes(), &dims, &us, None)).norm()
    };
    let mut budget = cfg.budget.saturating_sub(used);
    let before = budget;
    let (fidelity, settled) = coordinate_search(&mut x, objective, &mut budget);
    used += before - budget;
    let params = reals_to_params(&dims, &x);
    Ok(LuFit {
        fidelity: fidelity.min(1.0),
        unitaries: unitaries_of(&params),
        params,
        converged: settled,
        evaluations: used,
    })
}

/// Entrywise `ℓ1` norm of the amplitudes.
pub fn l1_norm(amps: &[C64]) -> f64 {
    amps.iter().map(|z| z.norm()).sum()
}

#[derive(Clone, Debug)]
pub struct Sparsified {
    pub state: PureState,
    pub l1: f64,
    pub params: Vec<JarlskogParams>,
    pub unitaries: Vec<CMatrix>,
    pub converged: bool,
    pub evaluations: usize,
}

/// Local frames diagonalizing every one-party marginal.
fn hosvd_frame(state: &PureState) -> Result<Vec<CMatrix>> {
    (0..state.shape().parties())
        .map(|s| {
            if state.shape().parties() == 1 {
                return Ok(CMatrix::identity(state.shape().dim(0), state.shape().dim(0)));
            }
            let rho = reduced_density_matrix(state, &[s])?;
            let (_, vecs) = hermitian_eigh(rho.entries());
            Ok(vecs.adjoint())
        })
        .collect()
}

/// Minimizes the `ℓ1` norm of `(U_1 ⊗ ... ⊗ U_n)|ψ>` over local unitaries.
/// Starts from the identity, the marginal eigenframes and `cfg.restarts` random frames.
pub fn sparsify(state: &PureState, cfg: &CanonConfig) -> Result<Sparsified> {
    cfg.validate()?;
    let dims = state.shape().dims().to_vec();
    let seeds = starts(&dims, cfg, vec![hosvd_frame(state)?]);
    let per = (cfg.budget / seeds.len()).max(1);
    let runs: Vec<(f64, Vec<f64>, bool, usize)> = seeds
        .into_par_iter()
        .map(|us| {
            let mut x = params_to_reals(&decompose_all(&us));
            let objective = |x: &[f64]| {
                let us = unitaries_of(&reals_to_params(&dims, x));
                -l1_norm(&apply_locals_raw(state.amplitudes(), &dims, &us, None))
            };
            let mut budget = per;
            let (v, settled) = coordinate_search(&mut x, objective, &mut budget);
            (-v, x, settled, per - budget)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.3).sum();
    let best = runs.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one start");
    let params = reals_to_params(&dims, &best.1);
    let unitaries = unitaries_of(&params);
    let out = state.apply_locals(&unitaries)?;
    Ok(Sparsified { l1: l1_norm(out.amplitudes()), state: out, params, unitaries, converged: best.2, evaluations })
}

/// Amplitudes with modulus at least `DISPLAY_ZERO`, as `(digits, amplitude)`.
pub fn nonzero_entries(state: &PureState) -> Vec<(Vec<usize>, C64)> {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() >= DISPLAY_ZERO)
        .map(|(i, z)| (state.shape().digits(i), *z))
        .collect()
}

/// One line per nonzero amplitude, `|0 1 1>  re im`.
pub fn pretty_print(state: &PureState) -> String {
    let mut out = String::new();
    for (digits, z) in nonzero_entries(state) {
        let label: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("|{}>  {:+.9} {:+.9}i\n", label.join(" "), z.re, z.im));
    }
    out
}

#[derive(Clone, Debug)]
pub struct SubspaceMatch {
    /// Largest principal angle between `(U_1 ⊗ ... ⊗ U_n) span(found)` and `span(target)`.
    pub angle: f64,
    /// `Tr(P_target U P_found U†) / k`.
    pub overlap: f64,
    pub unitaries: Vec<CMatrix>,
    pub converged: bool,
}

fn subspace_overlap(found: &[Vec<C64>], target: &SubspaceProjector) -> f64 {
    let k = target.rank() as f64;
    found.iter().map(|v| target.expectation(v)).sum::<f64>() / k
}

/// Local unitaries rotating `span(found)` onto `span(target)`.
pub fn lu_match_subspace(found: &SubspaceProjector, target: &SubspaceProjector, cfg: &CanonConfig) -> Result<SubspaceMatch> {
    found.shape().ensure_same(target.shape())?;
    if found.rank() != target.rank() {
        return Err(Error::InvalidProjector(format!("ranks differ: {} vs {}", found.rank(), target.rank())));
    }
    cfg.validate()?;
    let dims = found.shape().dims().to_vec();
    let seeds = starts(&dims, cfg, vec![]);
    let sweeps = cfg.polar_sweeps;
    let runs: Vec<(f64, Vec<CMatrix>, bool)> = seeds
        .into_par_iter()
        .map(|mut us| {
            let mut last = -1.0;
            let mut settled = false;
            for _ in 0..sweeps {
                for s in 0..dims.len() {
                    let mut g = CMatrix::zeros(dims[s], dims[s]);
                    for b in found.basis() {
                        let ket = apply_locals_raw(b.amplitudes(), &dims, &us, Some(s));
                        for t in target.basis() {
                            let x = local_contraction(&ket, t.amplitudes(), &dims, s);
                            let c = (us[s].clone() * &x).trace();
                            g += x * c.conj();
                        }
                    }
                    us[s] = polar_maximizer(&g);
                }
                let moved: Vec<Vec<C64>> =
                    found.basis().iter().map(|b| apply_locals_raw(b.amplitudes(), &dims, &us, None)).collect();
                let v = subspace_overlap(&moved, target);
                if v - last <= 1e-15 {
                    settled = true;
                    last = v;
                    break;
                }
                last = v;
            }
            (last, us, settled)
        })
        .collect();
    let best = runs.into_iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one start");
    let moved: Vec<DVector<C64>> = found
        .basis()
        .iter()
        .map(|b| DVector::from_vec(apply_locals_raw(b.amplitudes(), &dims, &best.1, None)))
        .collect();
    let m = CMatrix::from_columns(&moved);
    let angle = max_principal_angle(&m, &target.basis_matrix());
    Ok(SubspaceMatch { angle, overlap: best.0, unitaries: best.1, converged: best.2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{random_pure_state, SystemShape};
    use crate::zoo;

    #[test]
    fn identity_params() {
        for d in 1..6 {
            let u = jarlskog_unitary(&JarlskogParams::identity(d));
            assert!(max_dev_from_identity(&u) < 1e-15);
        }
    }

    #[test]
    fn su2_form() {
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let (phi, chi): (f64, f64) = (rng.gen::<f64>() * 6.0, rng.gen::<f64>() * 6.0);
            let t: f64 = rng.gen::<f64>() * 1.5;
            let alpha = C64::from_polar(t.cos(), phi);
            let beta = C64::from_polar(t.sin(), chi);
            let pi = std::f64::consts::PI;
            let p = JarlskogParams::new(
                vec![0.0, chi + pi - phi],
                vec![phi, -chi - pi],
                vec![t],
                vec![vec![C64::new(1.0, 0.0)]],
            )
            .unwrap();
            let u = jarlskog_unitary(&p);
            let want = CMatrix::from_row_slice(2, 2, &[alpha, -beta.conj(), beta, alpha.conj()]);
            assert!((u - want).camax() < 1e-12);
        }
    }

    #[test]
    fn decompose_roundtrip() {
        let mut rng = seeded_rng(11);
        for d in 1..7 {
            for _ in 0..5 {
                let u = random_unitary(d, &mut rng);
                let p = jarlskog_decompose(&u).unwrap();
                p.validate().unwrap();
                assert!((jarlskog_unitary(&p) - &u).camax() < 1e-12, "d = {d}");
            }
        }
    }

    #[test]
    fn reals_roundtrip() {
        let mut rng = seeded_rng(5);
        let p = JarlskogParams::random(4, &mut rng);
        let x = p.to_reals();
        assert_eq!(x.len(), 23);
        let q = JarlskogParams::from_reals(4, &x).unwrap();
        assert!((jarlskog_unitary(&p) - jarlskog_unitary(&q)).camax() < 1e-14);
    }

    #[test]
    fn contraction_matches_trace() {
        let shape = SystemShape::new(vec![2, 3, 2]).unwrap();
        let a = random_pure_state(&shape, 1);
        let b = random_pure_state(&shape, 2);
        let mut rng = seeded_rng(9);
        let u = random_unitary(3, &mut rng);
        let x = local_contraction(a.amplitudes(), b.amplitudes(), shape.dims(), 1);
        let direct = b.inner(&a.apply_local(1, &u).unwrap()).unwrap();
        assert!(((u * x).trace() - direct).norm() < 1e-12);
    }

    #[test]
    fn flipped_w_is_recovered() {
        let w = zoo::w_state(3).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, C64::new(1.0, 0.0), C64::new(1.0, 0.0), ZERO]);
        let flipped = w.apply_locals(&[x.clone(), x.clone(), x]).unwrap();
        let fit = lu_fidelity(&flipped, &w, &CanonConfig::default()).unwrap();
        assert!(fit.equal(), "{}", fit.fidelity);
        let same = lu_fidelity(&w, &w, &CanonConfig::default()).unwrap();
        assert!(same.fidelity > 1.0 - 1e-12);
    }

    #[test]
    fn ghz_and_w_differ() {
        let fit = lu_fidelity(&zoo::ghz(3, 2).unwrap(), &zoo::w_state(3).unwrap(), &CanonConfig::default()).unwrap();
        assert!(!fit.equal());
        assert!(fit.fidelity < 0.99, "{}", fit.fidelity);
    }

    #[test]
    fn sparsify_ghz_stays() {
        let s = sparsify(&zoo::ghz(3, 2).unwrap(), &CanonConfig { restarts: 2, budget: 20_000, ..Default::default() }).unwrap();
        assert!((s.l1 - 2f64.sqrt()).abs() < 1e-8, "{}", s.l1);
    }
}
