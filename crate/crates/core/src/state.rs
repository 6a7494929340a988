//! Pure multi-qudit states, product states and the tensor primitives built on
//! them.
//!
//! Amplitudes are stored row-major with party 0 as the most significant index:
//! the flat index of the basis ket `|i_0 i_1 ... i_{n-1}>` is
//! `((i_0 * d_1 + i_1) * d_2 + i_2) ...`. Every file format uses the same order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigh, CMatrix};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Deterministic RNG used for every seeded routine in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ordered local dimensions of an `n`-party system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SystemShape {
    dims: Vec<usize>,
    total: usize,
}

impl TryFrom<Vec<usize>> for SystemShape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        SystemShape::new(dims)
    }
}

impl From<SystemShape> for Vec<usize> {
    fn from(s: SystemShape) -> Self {
        s.dims
    }
}

impl SystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("at least one party is required".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("local dimension {d} < 2")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::ShapeTooLarge)?;
        // amplitude storage must itself be addressable
        total
            .checked_mul(std::mem::size_of::<C64>())
            .filter(|&b| b <= isize::MAX as usize)
            .ok_or(Error::ShapeTooLarge)?;
        Ok(SystemShape { dims, total })
    }

    /// `n` parties of local dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.parties() {
            return Err(Error::SiteOutOfRange {
                site,
                parties: self.parties(),
            });
        }
        Ok(())
    }

    /// Validates a nonempty proper subset of parties and returns it sorted
    /// together with its complement.
    pub(crate) fn split(&self, subset: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let n = self.parties();
        let mut keep = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() || keep.len() != subset.len() || keep.len() >= n || keep[keep.len() - 1] >= n {
            return Err(Error::InvalidSubset(subset.to_vec()));
        }
        let rest = (0..n).filter(|i| keep.binary_search(i).is_err()).collect();
        Ok((keep, rest))
    }

    pub(crate) fn ensure_same(&self, other: &SystemShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            });
        }
        Ok(())
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn normalize_in_place(v: &mut [C64]) -> Result<()> {
    let n = norm_sqr(v).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let inv = 1.0 / n;
    v.iter_mut().for_each(|z| *z *= inv);
    Ok(())
}

fn gaussian_vector<R: rand::Rng>(len: usize, rng: &mut R) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// A unit vector in the joint Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    shape: SystemShape,
    amps: Vec<C64>,
}

impl PureState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(shape: SystemShape, mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() != shape.total_dim() {
            return Err(Error::LengthMismatch {
                expected: shape.total_dim(),
                got: amps.len(),
            });
        }
        normalize_in_place(&mut amps)?;
        Ok(PureState { shape, amps })
    }

    /// Like [`PureState::new`] but rejects input whose squared norm differs
    /// from one by more than `tol`. Amplitudes normalized to within `1e-12`
    /// are kept bit-for-bit.
    pub fn from_normalized(shape: SystemShape, amps: Vec<C64>, tol: f64) -> Result<Self> {
        let ns = norm_sqr(&amps);
        if (ns - 1.0).abs() > tol {
            return Err(Error::NotNormalized(ns));
        }
        if (ns - 1.0).abs() <= 1e-12 && amps.len() == shape.total_dim() {
            return Ok(PureState { shape, amps });
        }
        Self::new(shape, amps)
    }

    /// Computational basis ket `|digits>`.
    pub fn basis(shape: SystemShape, digits: &[usize]) -> Result<Self> {
        if digits.len() != shape.parties() || digits.iter().zip(shape.dims()).any(|(&i, &d)| i >= d) {
            return Err(Error::InvalidShape(format!("basis label {digits:?} does not fit {:?}", shape.dims())));
        }
        let mut amps = vec![ZERO; shape.total_dim()];
        amps[shape.index_of(digits)] = C64::new(1.0, 0.0);
        Ok(PureState { shape, amps })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, digits: &[usize]) -> C64 {
        self.amps[self.shape.index_of(digits)]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.shape.ensure_same(&other.shape)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies every amplitude by a unit-modulus phase.
    pub fn with_phase(mut self, phase: C64) -> Self {
        self.amps.iter_mut().for_each(|z| *z *= phase);
        self
    }

    /// Applies `u` to a single party.
    pub fn apply_local(&self, site: usize, u: &CMatrix) -> Result<PureState> {
        self.shape.check_site(site)?;
        let d = self.shape.dim(site);
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::InvalidShape(format!(
                "local operator is {}x{}, party {site} has dimension {d}",
                u.nrows(),
                u.ncols()
            )));
        }
        Ok(PureState {
            shape: self.shape.clone(),
            amps: apply_local_raw(&self.amps, self.shape.dims(), site, u),
        })
    }

    /// Applies `U_0 ⊗ U_1 ⊗ ... ⊗ U_{n-1}`.
    pub fn apply_locals(&self, us: &[CMatrix]) -> Result<PureState> {
        if us.len() != self.shape.parties() {
            return Err(Error::InvalidShape(format!(
                "{} local operators for {} parties",
                us.len(),
                self.shape.parties()
            )));
        }
        let mut out = self.clone();
        for (site, u) in us.iter().enumerate() {
            out = out.apply_local(site, u)?;
        }
        Ok(out)
    }

    /// Reorders parties: party `k` of the result is party `perm[k]` of `self`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<PureState> {
        let n = self.shape.parties();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidSubset(perm.to_vec()));
        }
        let new_shape = SystemShape::new(perm.iter().map(|&p| self.shape.dim(p)).collect())?;
        let mut amps = vec![ZERO; self.amps.len()];
        let mut new_digits = vec![0; n];
        for (idx, &a) in self.amps.iter().enumerate() {
            let old = self.shape.digits(idx);
            for (k, &p) in perm.iter().enumerate() {
                new_digits[k] = old[p];
            }
            amps[new_shape.index_of(&new_digits)] = a;
        }
        Ok(PureState {
            shape: new_shape,
            amps,
        })
    }

    /// Regroups consecutive runs of parties into single parties, e.g.
    /// grouping `[2, 2]` on an 8-qubit state yields four 4-level parties.
    /// The amplitude vector is unchanged.
    pub fn group_parties(&self, sizes: &[usize]) -> Result<PureState> {
        if sizes.iter().sum::<usize>() != self.shape.parties() || sizes.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "group sizes {sizes:?} do not partition {} parties",
                self.shape.parties()
            )));
        }
        let mut dims = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &s in sizes {
            dims.push(self.shape.dims()[at..at + s].iter().product());
            at += s;
        }
        Ok(PureState {
            shape: SystemShape::new(dims)?,
            amps: self.amps.clone(),
        })
    }
}

pub(crate) fn apply_local_raw(amps: &[C64], dims: &[usize], site: usize, u: &CMatrix) -> Vec<C64> {
    let d = dims[site];
    let right: usize = dims[site + 1..].iter().product();
    let left = amps.len() / (d * right);
    let mut out = vec![ZERO; amps.len()];
    for l in 0..left {
        let base = l * d * right;
        for i in 0..d {
            let dst = &mut out[base + i * right..base + (i + 1) * right];
            for j in 0..d {
                let uij = u[(i, j)];
                if uij == ZERO {
                    continue;
                }
                let src = &amps[base + j * right..base + (j + 1) * right];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += uij * s;
                }
            }
        }
    }
    out
}

/// Haar-random pure state: independent complex Gaussian amplitudes,
/// normalized. Deterministic for a fixed seed.
pub fn random_pure_state(shape: &SystemShape, seed: u64) -> PureState {
    let mut rng = seeded_rng(seed);
    random_pure_state_with(shape, &mut rng)
}

pub fn random_pure_state_with<R: rand::Rng>(shape: &SystemShape, rng: &mut R) -> PureState {
    loop {
        let mut amps = gaussian_vector(shape.total_dim(), rng);
        if normalize_in_place(&mut amps).is_ok() {
            return PureState {
                shape: shape.clone(),
                amps,
            };
        }
    }
}

/// `|x_0> ⊗ |x_1> ⊗ ... ⊗ |x_{n-1}>` with unit-norm local vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    shape: SystemShape,
    locals: Vec<Vec<C64>>,
}

impl ProductState {
    /// Builds a product state, normalizing each local vector.
    pub fn new(mut locals: Vec<Vec<C64>>) -> Result<Self> {
        let shape = SystemShape::new(locals.iter().map(Vec::len).collect())?;
        for v in &mut locals {
            normalize_in_place(v)?;
        }
        Ok(ProductState { shape, locals })
    }

    /// Product of computational basis vectors.
    pub fn computational(shape: &SystemShape, digits: &[usize]) -> Result<Self> {
        if digits.len() != shape.parties() {
            return Err(Error::InvalidShape("basis label length".into()));
        }
        let locals = shape
            .dims()
            .iter()
            .zip(digits)
            .map(|(&d, &i)| {
                if i >= d {
                    return Err(Error::InvalidShape(format!("level {i} >= dimension {d}")));
                }
                let mut v = vec![ZERO; d];
                v[i] = C64::new(1.0, 0.0);
                Ok(v)
            })
            .collect::<Result<_>>()?;
        Ok(ProductState {
            shape: shape.clone(),
            locals,
        })
    }

    /// Independent Haar-random local vectors.
    pub fn random<R: rand::Rng>(shape: &SystemShape, rng: &mut R) -> Self {
        let locals = shape
            .dims()
            .iter()
            .map(|&d| loop {
                let mut v = gaussian_vector(d, rng);
                if normalize_in_place(&mut v).is_ok() {
                    break v;
                }
            })
            .collect();
        ProductState {
            shape: shape.clone(),
            locals,
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn locals(&self) -> &[Vec<C64>] {
        &self.locals
    }

    pub fn local(&self, site: usize) -> &[C64] {
        &self.locals[site]
    }

    /// Replaces one local vector by `v / |v|`.
    pub(crate) fn set_local_normalized(&mut self, site: usize, mut v: Vec<C64>) -> Result<()> {
        normalize_in_place(&mut v)?;
        self.locals[site] = v;
        Ok(())
    }

    /// Expands the tensor product into a dense state.
    pub fn to_pure(&self) -> PureState {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for v in &self.locals {
            let mut next = Vec::with_capacity(amps.len() * v.len());
            for a in &amps {
                for x in v {
                    next.push(a * x);
                }
            }
            amps = next;
        }
        PureState {
            shape: self.shape.clone(),
            amps,
        }
    }

    /// `<self|psi>`.
    pub fn inner(&self, psi: &PureState) -> Result<C64> {
        self.shape.ensure_same(psi.shape())?;
        let head = contract_raw(psi.amplitudes(), self, 0);
        Ok(head
            .iter()
            .zip(&self.locals[0])
            .map(|(a, x)| x.conj() * a)
            .sum())
    }

    /// Rotates the global phase (carried by the first local vector) so that
    /// `<self|psi>` is real and non-negative; returns that overlap.
    pub fn fix_phase(&mut self, psi: &PureState) -> Result<f64> {
        let ov = self.inner(psi)?;
        let lambda = ov.norm();
        if lambda > 0.0 {
            let phase = ov / lambda;
            self.locals[0].iter_mut().for_each(|z| *z *= phase);
        }
        Ok(lambda)
    }
}

/// Anything that can stand on the left of an inner product with a
/// [`PureState`].
pub trait Bra {
    fn braket(&self, ket: &PureState) -> Result<C64>;
}

impl Bra for PureState {
    fn braket(&self, ket: &PureState) -> Result<C64> {
        self.inner(ket)
    }
}

impl Bra for ProductState {
    fn braket(&self, ket: &PureState) -> Result<C64> {
        self.inner(ket)
    }
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn overlap<B: Bra + ?Sized>(a: &B, b: &PureState) -> Result<C64> {
    a.braket(b)
}

fn contract_last(t: &[C64], x: &[C64]) -> Vec<C64> {
    let d = x.len();
    t.chunks_exact(d)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b.conj()).sum())
        .collect()
}

fn contract_first(t: &[C64], x: &[C64]) -> Vec<C64> {
    let rest = t.len() / x.len();
    let mut out = vec![ZERO; rest];
    for (j, xj) in x.iter().enumerate() {
        let c = xj.conj();
        for (o, a) in out.iter_mut().zip(&t[j * rest..(j + 1) * rest]) {
            *o += c * a;
        }
    }
    out
}

pub(crate) fn contract_raw(amps: &[C64], product: &ProductState, site: usize) -> Vec<C64> {
    let n = product.shape().parties();
    let mut t: Option<Vec<C64>> = None;
    for p in (site + 1..n).rev() {
        t = Some(contract_last(t.as_deref().unwrap_or(amps), product.local(p)));
    }
    for p in 0..site {
        t = Some(contract_first(t.as_deref().unwrap_or(amps), product.local(p)));
    }
    t.unwrap_or_else(|| amps.to_vec())
}

/// Contracts `state` with the conjugated local vectors of every party except
/// `site`, returning the unnormalized vector on that party.
pub fn contract_all_but(state: &PureState, product: &ProductState, site: usize) -> Result<Vec<C64>> {
    state.shape().ensure_same(product.shape())?;
    state.shape().check_site(site)?;
    Ok(contract_raw(state.amplitudes(), product, site))
}

/// Reshapes the amplitudes into a `(Π_{left} d_i) × (Π_{rest} d_i)` matrix,
/// each side row-major in increasing party order.
pub fn matricization(state: &PureState, left: &[usize]) -> Result<CMatrix> {
    let shape = state.shape();
    let (keep, rest) = shape.split(left)?;
    let rows: usize = keep.iter().map(|&i| shape.dim(i)).product();
    let cols: usize = rest.iter().map(|&i| shape.dim(i)).product();
    let mut m = DMatrix::from_element(rows, cols, ZERO);
    for (idx, &a) in state.amplitudes().iter().enumerate() {
        let digits = shape.digits(idx);
        let r = keep.iter().fold(0, |acc, &i| acc * shape.dim(i) + digits[i]);
        let c = rest.iter().fold(0, |acc, &i| acc * shape.dim(i) + digits[i]);
        m[(r, c)] = a;
    }
    Ok(m)
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigh(&self.entries).0
    }

    /// Largest entrywise deviation from `I / dim`.
    pub fn distance_from_maximally_mixed(&self) -> f64 {
        let n = self.dim();
        let flat = 1.0 / n as f64;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { flat } else { 0.0 };
                worst = worst.max((self.entries[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Partial trace over the complement of `keep`.
pub fn reduced_density_matrix(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    let m = matricization(state, keep)?;
    Ok(DensityMatrix {
        entries: &m * m.adjoint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ghz3() -> PureState {
        let s = SystemShape::uniform(3, 2).unwrap();
        let mut a = vec![ZERO; 8];
        a[0] = c(1.0);
        a[7] = c(1.0);
        PureState::new(s, a).unwrap()
    }

    fn w3() -> PureState {
        let s = SystemShape::uniform(3, 2).unwrap();
        let mut a = vec![ZERO; 8];
        a[1] = c(1.0);
        a[2] = c(1.0);
        a[4] = c(1.0);
        PureState::new(s, a).unwrap()
    }

    #[test]
    fn shape_rejects_bad_input() {
        assert!(SystemShape::new(vec![]).is_err());
        assert!(SystemShape::new(vec![2, 1]).is_err());
        assert_eq!(
            SystemShape::new(vec![usize::MAX, 2]).unwrap_err(),
            Error::ShapeTooLarge
        );
        assert_eq!(
            SystemShape::new(vec![1 << 20; 4]).unwrap_err(),
            Error::ShapeTooLarge
        );
    }

    #[test]
    fn digits_roundtrip() {
        let s = SystemShape::new(vec![2, 3, 4]).unwrap();
        for i in 0..s.total_dim() {
            assert_eq!(s.index_of(&s.digits(i)), i);
        }
        assert_eq!(s.digits(5), vec![0, 1, 1]);
    }

    #[test]
    fn random_state_is_normalized_and_deterministic() {
        let s = SystemShape::new(vec![2]).unwrap();
        let a = random_pure_state(&s, 7);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        let s3 = SystemShape::new(vec![2, 3, 2]).unwrap();
        assert_eq!(random_pure_state(&s3, 11), random_pure_state(&s3, 11));
        assert_ne!(random_pure_state(&s3, 11), random_pure_state(&s3, 12));
    }

    #[test]
    fn overlap_examples() {
        let psi = ghz3();
        assert!((overlap(&psi, &psi).unwrap() - c(1.0)).norm() < 1e-15);
        let zero = PureState::basis(psi.shape().clone(), &[0, 0, 0]).unwrap();
        assert!((overlap(&zero, &psi).unwrap() - c(0.5f64.sqrt())).norm() < 1e-15);
        let b011 = ProductState::computational(psi.shape(), &[0, 1, 1]).unwrap();
        assert!(overlap(&b011, &w3()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn overlap_shape_mismatch() {
        let a = ghz3();
        let b = PureState::basis(SystemShape::uniform(2, 2).unwrap(), &[0, 0]).unwrap();
        assert!(matches!(overlap(&a, &b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn contraction_examples() {
        let s = SystemShape::uniform(2, 2).unwrap();
        let psi = PureState::basis(s.clone(), &[0, 0]).unwrap();
        let pi = ProductState::computational(&s, &[0, 0]).unwrap();
        let v = contract_all_but(&psi, &pi, 0).unwrap();
        assert_eq!(v, vec![c(1.0), ZERO]);

        let g = ghz3();
        let pi = ProductState::computational(g.shape(), &[0, 0, 0]).unwrap();
        let v = contract_all_but(&g, &pi, 0).unwrap();
        assert!((v[0] - c(0.5f64.sqrt())).norm() < 1e-15);
        assert!(v[1].norm() < 1e-15);
        assert!(matches!(
            contract_all_but(&g, &pi, 3),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn contraction_matches_triple_loop() {
        let s = SystemShape::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure_state(&s, 3);
        let mut rng = seeded_rng(4);
        let pi = ProductState::random(&s, &mut rng);
        let x = pi.locals();
        for site in 0..3 {
            let v = contract_all_but(&psi, &pi, site).unwrap();
            let mut oracle = vec![ZERO; s.dim(site)];
            for a in 0..2 {
                for b in 0..3 {
                    for cc in 0..2 {
                        let amp = psi.amplitude(&[a, b, cc]);
                        let (slot, w) = match site {
                            0 => (a, x[1][b].conj() * x[2][cc].conj()),
                            1 => (b, x[0][a].conj() * x[2][cc].conj()),
                            _ => (cc, x[0][a].conj() * x[1][b].conj()),
                        };
                        oracle[slot] += amp * w;
                    }
                }
            }
            for (u, o) in v.iter().zip(&oracle) {
                assert!((u - o).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn product_overlap_matches_expanded() {
        let s = SystemShape::new(vec![3, 2, 4]).unwrap();
        let psi = random_pure_state(&s, 9);
        let mut rng = seeded_rng(10);
        let pi = ProductState::random(&s, &mut rng);
        let a = overlap(&pi, &psi).unwrap();
        let b = overlap(&pi.to_pure(), &psi).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn matricization_examples() {
        let s = SystemShape::uniform(2, 2).unwrap();
        let psi = PureState::basis(s, &[0, 1]).unwrap();
        let m = matricization(&psi, &[0]).unwrap();
        assert_eq!(m[(0, 1)], c(1.0));
        assert_eq!(m.iter().filter(|z| z.norm() > 0.0).count(), 1);

        let g = matricization(&ghz3(), &[0]).unwrap();
        assert_eq!((g.nrows(), g.ncols()), (2, 4));
        let h = 0.5f64.sqrt();
        assert!((g[(0, 0)] - c(h)).norm() < 1e-15);
        assert!((g[(1, 3)] - c(h)).norm() < 1e-15);
        assert!(matches!(matricization(&ghz3(), &[]), Err(Error::InvalidSubset(_))));
        assert!(matches!(matricization(&ghz3(), &[0, 1, 2]), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn reduced_density_examples() {
        let rho = reduced_density_matrix(&ghz3(), &[0]).unwrap();
        assert!(rho.distance_from_maximally_mixed() < 1e-15);

        let rho = reduced_density_matrix(&w3(), &[0]).unwrap();
        assert!((rho.entries()[(0, 0)] - c(2.0 / 3.0)).norm() < 1e-15);
        assert!((rho.entries()[(1, 1)] - c(1.0 / 3.0)).norm() < 1e-15);
        assert!(rho.entries()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn apply_local_and_permute() {
        let w = w3();
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0), c(1.0), ZERO]);
        let flipped = w.apply_local(2, &x).unwrap();
        // |001>+|010>+|100> -> |000>+|011>+|101>
        assert!((flipped.amplitude(&[0, 0, 0]) - c(1.0 / 3f64.sqrt())).norm() < 1e-15);
        assert!(flipped.amplitude(&[0, 0, 1]).norm() < 1e-15);

        let s = SystemShape::new(vec![2, 3]).unwrap();
        let psi = PureState::basis(s, &[1, 2]).unwrap();
        let swapped = psi.permute_parties(&[1, 0]).unwrap();
        assert_eq!(swapped.shape().dims(), &[3, 2]);
        assert_eq!(swapped.amplitude(&[2, 1]), c(1.0));
    }

    #[test]
    fn fix_phase_makes_overlap_real() {
        let s = SystemShape::uniform(3, 2).unwrap();
        let psi = random_pure_state(&s, 1);
        let mut rng = seeded_rng(2);
        let mut pi = ProductState::random(&s, &mut rng);
        let lam = pi.fix_phase(&psi).unwrap();
        let ov = pi.inner(&psi).unwrap();
        assert!((ov.re - lam).abs() < 1e-14);
        assert!(ov.im.abs() < 1e-14);
    }
}
