//! Maximally entangled subspaces.
//!
//! A rank-k projector `P` is scored by `1 - sup <π|P|π>` over product states.
//! The see-saw generalizes by replacing each local vector with the top
//! eigenvector of the effective one-party matrix, and the ascent step keeps
//! the top-k eigenvectors of `P - θ|π><π|`.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ascent::{AscentConfig, Termination, Variant, MIN_OVERLAP_TOL, STAGNATION_IMPROVEMENT};
use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, hermitian_eigh, CMatrix};
use crate::refine::newton_refine_sum;
use crate::seesaw::SeesawConfig;
use crate::state::{contract_raw, random_pure_state_with, seeded_rng, ProductState, PureState, SystemShape, C64, ZERO};

const GRAM_TOL: f64 = 1e-10;
const CUT_TOL: f64 = 1e-12;
const POLISH_MARGIN: f64 = 1e-3;
const POLISH_MAX_CHAINS: usize = 8;
const DEGENERATE_RETRIES: usize = 16;

/// Orthonormal basis of a k-dimensional subspace, `P = Σ |v_i><v_i|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceProjector {
    shape: SystemShape,
    basis: Vec<PureState>,
}

impl SubspaceProjector {
    /// Checks that the basis is orthonormal within `1e-10` and `1 <= k < D`.
    pub fn new(basis: Vec<PureState>) -> Result<Self> {
        let Some(first) = basis.first() else {
            return Err(Error::InvalidProjector("empty basis".into()));
        };
        let shape = first.shape().clone();
        for v in &basis {
            shape.ensure_same(v.shape())?;
        }
        if basis.len() >= shape.total_dim() {
            return Err(Error::InvalidProjector(format!(
                "rank {} must be below the total dimension {}",
                basis.len(),
                shape.total_dim()
            )));
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let g = a.inner(b)?;
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - C64::new(want, 0.0)).norm() > GRAM_TOL {
                    return Err(Error::InvalidProjector(format!("Gram entry ({i}, {j}) = {g}")));
                }
            }
        }
        Ok(SubspaceProjector { shape, basis })
    }

    /// Orthonormalizes the given states; fails if they are linearly dependent.
    pub fn from_states(states: &[PureState]) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidProjector("empty basis".into()));
        };
        let shape = first.shape().clone();
        for s in states {
            shape.ensure_same(s.shape())?;
        }
        let vecs: Vec<DVector<C64>> = states.iter().map(|s| DVector::from_column_slice(s.amplitudes())).collect();
        let ortho = gram_schmidt(&vecs, 1e-8);
        if ortho.len() != states.len() {
            return Err(Error::InvalidProjector("states are linearly dependent".into()));
        }
        let basis = ortho
            .into_iter()
            .map(|v| PureState::new(shape.clone(), v.iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis)
    }

    /// `k` Haar vectors orthonormalized by Gram-Schmidt.
    pub fn random(shape: &SystemShape, k: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        Self::random_with(shape, k, &mut rng)
    }

    pub fn random_with<R: Rng>(shape: &SystemShape, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k >= shape.total_dim() {
            return Err(Error::InvalidProjector(format!(
                "rank {k} must satisfy 1 <= k < {}",
                shape.total_dim()
            )));
        }
        loop {
            let states: Vec<PureState> = (0..k).map(|_| random_pure_state_with(shape, rng)).collect();
            if let Ok(p) = Self::from_states(&states) {
                return Ok(p);
            }
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn basis(&self) -> &[PureState] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `D × k` matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> CMatrix {
        let d = self.shape.total_dim();
        CMatrix::from_fn(d, self.rank(), |r, c| self.basis[c].amplitudes()[r])
    }

    /// `<φ|P|φ>` for an arbitrary vector of matching shape.
    pub fn expectation(&self, amps: &[C64]) -> f64 {
        self.basis
            .iter()
            .map(|v| v.amplitudes().iter().zip(amps).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr())
            .sum()
    }

    /// Normalized state `Σ c_i |v_i>`.
    pub fn combine(&self, coeffs: &[C64]) -> Result<PureState> {
        if coeffs.len() != self.rank() {
            return Err(Error::LengthMismatch { expected: self.rank(), got: coeffs.len() });
        }
        let mut amps = vec![ZERO; self.shape.total_dim()];
        for (v, c) in self.basis.iter().zip(coeffs) {
            for (a, b) in amps.iter_mut().zip(v.amplitudes()) {
                *a += c * b;
            }
        }
        PureState::new(self.shape.clone(), amps)
    }
}

/// `<π|P|π>`.
pub fn projector_value(p: &SubspaceProjector, pi: &ProductState) -> Result<f64> {
    p.shape.ensure_same(pi.shape())?;
    let mut value = 0.0;
    for v in &p.basis {
        value += pi.inner(v)?.norm_sqr();
    }
    Ok(value)
}

/// One sweep of the generalized see-saw; returns `<π|P|π>` after it.
pub fn projector_sweep_in_place(p: &SubspaceProjector, iterate: &mut ProductState) -> Result<f64> {
    p.shape.ensure_same(iterate.shape())?;
    let mut value = 0.0;
    for site in 0..p.shape.parties() {
        let d = p.shape.dim(site);
        let mut eff = CMatrix::zeros(d, d);
        for v in &p.basis {
            let w = DVector::from_vec(contract_raw(v.amplitudes(), iterate, site));
            eff += &w * w.adjoint();
        }
        let (vals, vecs) = hermitian_eigh(&eff);
        if !(vals[0] > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateIterate { site });
        }
        let top = vals.iter().take_while(|&&l| vals[0] - l <= CUT_TOL * vals[0].max(1.0)).count();
        let mut next: Vec<C64> = vecs.column(0).iter().copied().collect();
        if top > 1 {
            // stay as close as possible to the current local vector
            let cur = DVector::from_column_slice(iterate.local(site));
            let mut proj = DVector::from_element(d, ZERO);
            for j in 0..top {
                let q = vecs.column(j);
                proj += q * q.dotc(&cur);
            }
            if proj.norm() > 1e-8 {
                next = proj.iter().copied().collect();
            }
        }
        iterate.set_local_normalized(site, next)?;
        value = vals[0];
    }
    Ok(value)
}

fn run_projector_chain(p: &SubspaceProjector, it: &mut ProductState, sweeps: usize, tol: f64) -> Result<f64> {
    let mut prev = projector_value(p, it)?;
    let mut value = prev;
    for _ in 0..sweeps {
        value = projector_sweep_in_place(p, it)?;
        if (value - prev).abs() < tol {
            break;
        }
        prev = value;
    }
    Ok(value)
}

fn random_projector_chain(p: &SubspaceProjector, cfg: &SeesawConfig, chain: u64) -> (ProductState, f64) {
    let mut rng = seeded_rng(cfg.seed.wrapping_add(chain));
    for _ in 0..DEGENERATE_RETRIES {
        let mut it = ProductState::random(&p.shape, &mut rng);
        if let Ok(v) = run_projector_chain(p, &mut it, cfg.sweeps_max, cfg.overlap_tol) {
            return (it, v);
        }
    }
    (ProductState::random(&p.shape, &mut rng), 0.0)
}

/// Maximizes `<π|P|π>` over product states with randomized restarts.
pub fn best_product_overlap_with_projector(p: &SubspaceProjector, cfg: &SeesawConfig) -> Result<(ProductState, f64)> {
    best_product_overlap_with_projector_from(p, cfg, &[])
}

/// Like [`best_product_overlap_with_projector`] with extra starting points.
pub fn best_product_overlap_with_projector_from(
    p: &SubspaceProjector,
    cfg: &SeesawConfig,
    hints: &[ProductState],
) -> Result<(ProductState, f64)> {
    let mut chains = projector_contenders(p, cfg, hints, POLISH_MARGIN, POLISH_MAX_CHAINS)?;
    let (pi, _) = chains.swap_remove(0);
    let value = projector_value(p, &pi)?.min(1.0);
    Ok((pi, value))
}

/// All see-saw chains, best first; the leading ones within `margin` of the top
/// (at most `max_polish`) are polished.
fn projector_contenders(
    p: &SubspaceProjector,
    cfg: &SeesawConfig,
    hints: &[ProductState],
    margin: f64,
    max_polish: usize,
) -> Result<Vec<(ProductState, f64)>> {
    cfg.validate()?;
    for h in hints {
        p.shape.ensure_same(h.shape())?;
    }
    let hinted: Vec<(ProductState, f64)> = hints
        .par_iter()
        .filter_map(|h| {
            let mut it = h.clone();
            run_projector_chain(p, &mut it, cfg.sweeps_max, cfg.overlap_tol)
                .ok()
                .map(|v| (it, v))
        })
        .collect();
    let random: Vec<(ProductState, f64)> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|chain| random_projector_chain(p, cfg, chain))
        .collect();
    let mut chains: Vec<(ProductState, f64)> = hinted.into_iter().chain(random).collect();
    let top = chains.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let mut contenders: Vec<usize> = (0..chains.len()).filter(|&i| chains[i].1 >= top - margin).collect();
    contenders.sort_by(|&a, &b| chains[b].1.total_cmp(&chains[a].1).then(a.cmp(&b)));
    contenders.truncate(max_polish);
    let refs: Vec<&PureState> = p.basis.iter().collect();
    let polished: Vec<(usize, ProductState, f64)> = contenders
        .par_iter()
        .map(|&i| {
            let mut it = chains[i].0.clone();
            let v = run_projector_chain(p, &mut it, cfg.polish_sweeps, cfg.overlap_tol)
                .and_then(|_| newton_refine_sum(&refs, &mut it, cfg.refine_steps))
                .unwrap_or(chains[i].1);
            (i, it, v)
        })
        .collect();
    for (i, it, v) in polished {
        chains[i] = (it, v);
    }
    let mut order: Vec<usize> = (0..chains.len()).collect();
    order.sort_by(|&a, &b| chains[b].1.total_cmp(&chains[a].1).then(a.cmp(&b)));
    let mut slots: Vec<Option<(ProductState, f64)>> = chains.into_iter().map(Some).collect();
    Ok(order.into_iter().map(|i| slots[i].take().expect("each index once")).collect())
}

/// `1 - sup <π|P|π>`.
pub fn subspace_measure(p: &SubspaceProjector, cfg: &SeesawConfig) -> Result<f64> {
    Ok(1.0 - best_product_overlap_with_projector(p, cfg)?.1)
}

/// Span of the top-k eigenvectors of `P - θ|π><π|`.
pub fn subspace_ascend_step(p: &SubspaceProjector, pi: &ProductState, theta: f64) -> Result<SubspaceProjector> {
    p.shape.ensure_same(pi.shape())?;
    let k = p.rank();
    let pi_vec = DVector::from_vec(pi.to_pure().into_amplitudes());
    let mut vecs: Vec<DVector<C64>> = p.basis.iter().map(|v| DVector::from_column_slice(v.amplitudes())).collect();
    vecs.push(pi_vec.clone());
    let q = gram_schmidt(&vecs, 1e-12);
    let m = q.len();
    // coordinates of the basis vectors and of π in the reduced span
    let coords: Vec<Vec<C64>> = vecs.iter().map(|v| q.iter().map(|qi| qi.dotc(v)).collect()).collect();
    let pq = &coords[k];
    let mut a = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let x: C64 = coords[..k].iter().map(|c| c[i] * c[j].conj()).sum();
            a[(i, j)] = x - C64::new(theta, 0.0) * pq[i] * pq[j].conj();
        }
    }
    let (vals, evecs) = hermitian_eigh(&a);
    // the operator vanishes on the complement of the reduced span
    let mut next = if m > k { vals[k] } else { f64::NEG_INFINITY };
    if p.shape.total_dim() > m {
        next = next.max(0.0);
    }
    if vals[k - 1] - next <= CUT_TOL {
        return Err(Error::DegenerateCut { upper: vals[k - 1], lower: next });
    }
    let d = p.shape.total_dim();
    let vecs: Vec<DVector<C64>> = (0..k)
        .map(|c| {
            let mut amps = DVector::from_element(d, ZERO);
            for (i, qi) in q.iter().enumerate() {
                amps.axpy(evecs[(i, c)], qi, C64::new(1.0, 0.0));
            }
            amps
        })
        .collect();
    rebuild(&p.shape, &vecs)
}

fn rebuild(shape: &SystemShape, vecs: &[DVector<C64>]) -> Result<SubspaceProjector> {
    let states = gram_schmidt(vecs, 1e-8)
        .into_iter()
        .map(|v| PureState::new(shape.clone(), v.iter().copied().collect()))
        .collect::<Result<Vec<_>>>()?;
    SubspaceProjector::new(states)
}

/// Span of the top-k eigenvectors of `P - K` for a Hermitian shift `K`.
pub fn subspace_shift_step(p: &SubspaceProjector, shift: &CMatrix) -> Result<SubspaceProjector> {
    let d = p.shape.total_dim();
    if shift.nrows() != d || shift.ncols() != d {
        return Err(Error::LengthMismatch { expected: d * d, got: shift.len() });
    }
    let k = p.rank();
    let b = p.basis_matrix();
    let a = &b * b.adjoint() - shift;
    let (vals, evecs) = hermitian_eigh(&a);
    if vals[k - 1] - vals[k] <= CUT_TOL {
        return Err(Error::DegenerateCut { upper: vals[k - 1], lower: vals[k] });
    }
    let vecs: Vec<DVector<C64>> = (0..k).map(|c| evecs.column(c).into_owned()).collect();
    rebuild(&p.shape, &vecs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub iter: usize,
    /// `1 - sup <π|P|π>` at this iterate.
    pub measure: f64,
    pub value: f64,
    pub theta: f64,
}

#[derive(Clone, Debug)]
pub struct SubspaceTrace {
    pub records: Vec<SubspaceRecord>,
    /// Projector with the largest measure seen.
    pub best: SubspaceProjector,
    pub best_measure: f64,
    pub termination: Termination,
}

impl SubspaceTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,measure,value,theta\n");
        for r in &self.records {
            out.push_str(&format!("{},{:.15},{:.15},{:.6e}\n", r.iter, r.measure, r.value, r.theta));
        }
        out
    }
}

/// Subspace ascent from a random rank-k projector seeded with `seed`.
/// Uses `cfg`'s step schedule. Momentum variants accumulate the shifts
/// `K <- γK + θ|π><π|` and step with `P - K`; Nesterov is treated as momentum.
pub fn run_subspace_ascent(shape: &SystemShape, k: usize, cfg: &AscentConfig, seed: u64) -> Result<SubspaceTrace> {
    let p = SubspaceProjector::random(shape, k, seed)?;
    run_subspace_ascent_from(&p, cfg)
}

pub fn run_subspace_ascent_from(initial: &SubspaceProjector, cfg: &AscentConfig) -> Result<SubspaceTrace> {
    cfg.validate()?;
    let mut sc = cfg.seesaw.clone();
    let mut calls = 0u64;
    let mut p = initial.clone();
    let mut theta = cfg.theta0;
    let mut records = Vec::new();
    let mut best_measure = f64::NEG_INFINITY;
    let mut best = p.clone();
    let mut best_pi: Option<ProductState> = None;
    let mut last_improvement = 0usize;
    let mut prev_pi: Option<ProductState> = None;
    let mut termination = Termination::IterationLimit;
    let gamma = match cfg.variant {
        Variant::Plain => 0.0,
        _ => cfg.gamma,
    };
    let dim = p.shape.total_dim();
    let mut kappa = CMatrix::zeros(dim, dim);

    for iter in 0..=cfg.iters_max {
        sc.seed = cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(calls.wrapping_mul(1_000_003));
        calls += 1;
        let hints: Vec<ProductState> = prev_pi.iter().cloned().collect();
        let (pi, value) = best_product_overlap_with_projector_from(&p, &sc, &hints)?;
        let measure = 1.0 - value;
        records.push(SubspaceRecord { iter, measure, value, theta });
        if measure > best_measure + STAGNATION_IMPROVEMENT {
            last_improvement = iter;
        }
        if measure > best_measure {
            best_measure = measure;
            best = p.clone();
            best_pi = Some(pi.clone());
        }
        if iter == cfg.iters_max {
            break;
        }
        if value >= 1.0 - 1e-12 && iter - last_improvement >= cfg.stagnation_window {
            termination = Termination::ProductState;
            break;
        }
        if iter - last_improvement >= cfg.stagnation_window {
            theta *= 0.5;
            sc.overlap_tol = (sc.overlap_tol * 0.1).max(MIN_OVERLAP_TOL);
            last_improvement = iter;
            if theta < cfg.theta_min {
                termination = Termination::Converged;
                break;
            }
            p = best.clone();
            prev_pi = best_pi.clone();
            kappa.fill(ZERO);
            continue;
        }
        let v = DVector::from_vec(pi.to_pure().into_amplitudes());
        let proj = &v * v.adjoint();
        let mut next = None;
        for factor in [1.0, 1.1, 0.9] {
            let step = if gamma > 0.0 {
                subspace_shift_step(&p, &(&kappa * C64::new(gamma, 0.0) + &proj * C64::new(theta * factor, 0.0)))
            } else {
                subspace_ascend_step(&p, &pi, theta * factor)
            };
            match step {
                Ok(q) => {
                    next = Some((q, factor));
                    break;
                }
                Err(Error::DegenerateCut { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        match next {
            Some((q, f)) => {
                p = q;
                if gamma > 0.0 {
                    kappa = &kappa * C64::new(gamma, 0.0) + &proj * C64::new(theta * f, 0.0);
                }
            }
            None => {
                termination = Termination::ProductState;
                break;
            }
        }
        prev_pi = Some(pi);
    }

    Ok(SubspaceTrace { records, best, best_measure, termination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ascent::{ascend_step, DirectionMode};
    use crate::linalg::max_principal_angle;
    use crate::seesaw::best_product_approximation;
    use crate::state::random_pure_state;
    use crate::zoo;

    #[test]
    fn rank_one_matches_closest_product() {
        let shape = SystemShape::uniform(3, 2).unwrap();
        for seed in 0..5 {
            let psi = random_pure_state(&shape, seed);
            let p = SubspaceProjector::new(vec![psi.clone()]).unwrap();
            let cfg = SeesawConfig::default();
            let (_, value) = best_product_overlap_with_projector(&p, &cfg).unwrap();
            let bpa = best_product_approximation(&psi, &cfg).unwrap();
            assert!((value - bpa.lambda * bpa.lambda).abs() < 1e-9, "{value} vs {}", bpa.lambda);
        }
    }

    #[test]
    fn product_state_in_span_gives_zero() {
        let shape = SystemShape::uniform(3, 2).unwrap();
        let prod = PureState::basis(shape.clone(), &[0, 1, 1]).unwrap();
        let other = zoo::w_state(3).unwrap();
        let p = SubspaceProjector::from_states(&[prod, other]).unwrap();
        let m = subspace_measure(&p, &SeesawConfig::default()).unwrap();
        assert!(m.abs() < 1e-9);
    }

    #[test]
    fn w_v_span_has_w_measure() {
        let p = SubspaceProjector::new(vec![zoo::w_state(3).unwrap(), zoo::v_state()]).unwrap();
        let m = subspace_measure(&p, &SeesawConfig::default().with_restarts(30)).unwrap();
        assert!((m - 5.0 / 9.0).abs() < 1e-8, "{m}");
    }

    #[test]
    fn zero_step_keeps_span() {
        let shape = SystemShape::uniform(3, 2).unwrap();
        let p = SubspaceProjector::random(&shape, 2, 4).unwrap();
        let (pi, _) = best_product_overlap_with_projector(&p, &SeesawConfig::default()).unwrap();
        let q = subspace_ascend_step(&p, &pi, 0.0).unwrap_or_else(|_| p.clone());
        assert!(max_principal_angle(&p.basis_matrix(), &q.basis_matrix()) < 1e-8);
    }

    #[test]
    fn step_lowers_old_overlap() {
        let shape = SystemShape::uniform(3, 2).unwrap();
        let p = SubspaceProjector::random(&shape, 2, 9).unwrap();
        let (pi, value) = best_product_overlap_with_projector(&p, &SeesawConfig::default()).unwrap();
        let q = subspace_ascend_step(&p, &pi, 0.05).unwrap();
        assert!(projector_value(&q, &pi).unwrap() < value);
        assert_eq!(q.rank(), 2);
    }

    #[test]
    fn rank_one_step_follows_state_update() {
        let shape = SystemShape::uniform(3, 2).unwrap();
        let theta = 1e-4;
        for seed in 0..5 {
            let psi = random_pure_state(&shape, 100 + seed);
            let bpa = best_product_approximation(&psi, &SeesawConfig::default()).unwrap();
            let p = SubspaceProjector::new(vec![psi.clone()]).unwrap();
            let q = subspace_ascend_step(&p, &bpa.pi, theta).unwrap();
            let plain = ascend_step(&psi, &bpa.pi, theta, DirectionMode::Normalized).unwrap();
            let tangent = |v: &PureState| {
                let c = psi.inner(v).unwrap();
                let amps: Vec<C64> = v.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| a - c * b).collect();
                let m = CMatrix::from_column_slice(amps.len(), 1, &amps);
                let n = m.norm();
                m.unscale(n)
            };
            let angle = max_principal_angle(&tangent(&q.basis()[0]), &tangent(&plain));
            assert!(angle < 1e-6, "{angle}");
        }
    }
}
