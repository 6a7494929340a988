//! Second-order refinement of a product-state iterate.
//!
//! Near a local maximum the see-saw converges linearly and crawls along
//! nearly flat directions. This module takes Newton steps for `|<π|ψ>|²`
//! on the product of unit spheres, modulo the local phases.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::{gram_schmidt, symmetric_eigh};
use crate::state::{contract_raw, ProductState, PureState, C64, ZERO};

const MAX_STEP: f64 = 0.5;

/// Orthonormal basis of the complement of `x` (unit vector), as columns.
fn complement(x: &[C64]) -> Vec<Vec<C64>> {
    let d = x.len();
    let mut vecs = vec![DVector::from_column_slice(x)];
    for j in 0..d {
        let mut e = DVector::from_element(d, ZERO);
        e[j] = C64::new(1.0, 0.0);
        vecs.push(e);
    }
    gram_schmidt(&vecs, 1e-8)
        .into_iter()
        .skip(1)
        .take(d - 1)
        .map(|v| v.iter().copied().collect())
        .collect()
}

/// For every pair `s < t`, `H[i][j] = sum over other digits of conj(x) * psi`.
fn pair_contractions(amps: &[C64], pi: &ProductState) -> Vec<Vec<Vec<Vec<C64>>>> {
    let shape = pi.shape();
    let dims = shape.dims();
    let n = dims.len();
    let mut out: Vec<Vec<Vec<Vec<C64>>>> = (0..n)
        .map(|s| (0..n).map(|t| if t > s { vec![vec![ZERO; dims[t]]; dims[s]] } else { Vec::new() }).collect())
        .collect();
    let mut digits = vec![0usize; n];
    let mut c = vec![ZERO; n];
    let mut suffix = vec![ZERO; n + 1];
    for a in amps {
        if *a != ZERO {
            for p in 0..n {
                c[p] = pi.local(p)[digits[p]].conj();
            }
            suffix[n] = *a;
            for p in (0..n).rev() {
                suffix[p] = suffix[p + 1] * c[p];
            }
            let mut prefix = C64::new(1.0, 0.0);
            for s in 0..n {
                let mut run = prefix;
                for t in s + 1..n {
                    out[s][t][digits[s]][digits[t]] += run * suffix[t + 1];
                    run *= c[t];
                }
                prefix *= c[s];
            }
        }
        for p in (0..n).rev() {
            digits[p] += 1;
            if digits[p] < dims[p] {
                break;
            }
            digits[p] = 0;
        }
    }
    out
}

fn step(pi: &ProductState, bases: &[Vec<Vec<C64>>], w: &[f64]) -> Result<ProductState> {
    let mut locals = Vec::with_capacity(bases.len());
    let mut off = 0;
    for (s, basis) in bases.iter().enumerate() {
        let k = basis.len();
        let mut x = pi.local(s).to_vec();
        for (j, b) in basis.iter().enumerate() {
            let z = C64::new(w[off + j], w[off + k + j]);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += z * bi;
            }
        }
        off += 2 * k;
        locals.push(x);
    }
    ProductState::new(locals)
}

/// Adds the quadratic model of `|<π|ψ>|²` around `pi` in the tangent
/// coordinates given by `bases`.
fn add_model(
    amps: &[C64],
    pi: &ProductState,
    bases: &[Vec<Vec<C64>>],
    offs: &[usize],
    grad: &mut DVector<f64>,
    hess: &mut DMatrix<f64>,
) {
    let n = bases.len();
    let m = grad.len();
    let g_full: Vec<Vec<C64>> = (0..n).map(|s| contract_raw(amps, pi, s)).collect();
    let c0: C64 = pi.local(0).iter().zip(&g_full[0]).map(|(x, g)| x.conj() * g).sum();
    let cc = c0.conj();
    let f0 = c0.norm_sqr();
    // p: complex coefficients of L = sum z_s^† a_s in real coordinates
    let mut p = vec![ZERO; m];
    for s in 0..n {
        let k = bases[s].len();
        for (j, b) in bases[s].iter().enumerate() {
            let a: C64 = b.iter().zip(&g_full[s]).map(|(bi, gi)| bi.conj() * gi).sum();
            let at = cc * a;
            grad[offs[s] + j] += 2.0 * at.re;
            grad[offs[s] + k + j] += 2.0 * at.im;
            p[offs[s] + j] = a;
            p[offs[s] + k + j] = C64::new(0.0, -1.0) * a;
        }
    }
    for i in 0..m {
        for j in 0..m {
            hess[(i, j)] += 2.0 * (p[i].conj() * p[j]).re;
        }
        hess[(i, i)] -= 2.0 * f0;
    }
    let pairs = pair_contractions(amps, pi);
    for s in 0..n {
        for t in s + 1..n {
            let h = &pairs[s][t];
            let (ks, kt) = (bases[s].len(), bases[t].len());
            for (a, bs) in bases[s].iter().enumerate() {
                for (b, bt) in bases[t].iter().enumerate() {
                    let mut kab = ZERO;
                    for (i, bsi) in bs.iter().enumerate() {
                        for (j, btj) in bt.iter().enumerate() {
                            kab += bsi.conj() * h[i][j] * btj.conj();
                        }
                    }
                    let kab = cc * kab;
                    let (us, vs) = (offs[s] + a, offs[s] + ks + a);
                    let (ut, vt) = (offs[t] + b, offs[t] + kt + b);
                    let entries = [
                        (us, ut, 2.0 * kab.re),
                        (us, vt, 2.0 * kab.im),
                        (vs, ut, 2.0 * kab.im),
                        (vs, vt, -2.0 * kab.re),
                    ];
                    for (i, j, v) in entries {
                        hess[(i, j)] += v;
                        hess[(j, i)] += v;
                    }
                }
            }
        }
    }
}

fn objective(states: &[&PureState], pi: &ProductState) -> Result<f64> {
    let mut f = 0.0;
    for s in states {
        f += pi.inner(s)?.norm_sqr();
    }
    Ok(f)
}

/// Runs up to `max_steps` trust-region Newton steps on `|<π|ψ>|²` and
/// returns the final overlap. The iterate never gets worse.
pub fn newton_refine(state: &PureState, pi: &mut ProductState, max_steps: usize) -> Result<f64> {
    Ok(newton_refine_sum(&[state], pi, max_steps)?.sqrt())
}

/// Same for `Σ_i |<π|ψ_i>|²`, i.e. `<π|P|π>` for an orthonormal family.
/// Returns the final objective value.
pub fn newton_refine_sum(states: &[&PureState], pi: &mut ProductState, max_steps: usize) -> Result<f64> {
    for s in states {
        s.shape().ensure_same(pi.shape())?;
    }
    let n = pi.shape().parties();
    let mut f0 = objective(states, pi)?;
    let mut radius = 0.1;
    for _ in 0..max_steps {
        if f0 == 0.0 {
            break;
        }
        let bases: Vec<Vec<Vec<C64>>> = (0..n).map(|s| complement(pi.local(s))).collect();
        let offs: Vec<usize> = bases
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += 2 * b.len();
                Some(o)
            })
            .collect();
        let m: usize = bases.iter().map(|b| 2 * b.len()).sum();
        if m == 0 {
            break;
        }
        let mut grad = DVector::<f64>::zeros(m);
        let mut hess = DMatrix::<f64>::zeros(m, m);
        for s in states {
            add_model(s.amplitudes(), pi, &bases, &offs, &mut grad, &mut hess);
        }
        if grad.norm() <= 1e-15 * f0 {
            break;
        }
        let (mu, vecs) = symmetric_eigh(&hess);
        let gk: Vec<f64> = (0..m).map(|k| vecs.column(k).dot(&grad)).collect();
        let len = |sigma: f64| -> f64 {
            gk.iter().zip(&mu).map(|(g, u)| (g / (sigma - u)).powi(2)).sum::<f64>().sqrt()
        };
        let top = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sigma = 0.0f64;
        if top >= 0.0 || len(0.0) > radius {
            let mut lo = top.max(0.0);
            let mut hi = lo + grad.norm() / radius + 1e-300;
            while len(hi) > radius {
                hi *= 2.0;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if len(mid) > radius {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            sigma = hi;
        }
        let mut w = DVector::<f64>::zeros(m);
        for k in 0..m {
            w += vecs.column(k) * (gk[k] / (sigma - mu[k]));
        }
        let predicted: f64 = gk
            .iter()
            .zip(&mu)
            .map(|(g, u)| {
                let c = g / (sigma - u);
                g * c + 0.5 * u * c * c
            })
            .sum();
        if predicted <= 1e-16 * f0 {
            break;
        }
        let cand = step(pi, &bases, w.as_slice())?;
        let f1 = objective(states, &cand)?;
        let rho = (f1 - f0) / predicted;
        let full = w.norm() >= 0.99 * radius;
        if rho < 0.25 {
            radius *= 0.25;
        } else if rho > 0.75 && full {
            radius = (2.0 * radius).min(MAX_STEP);
        }
        if f1 > f0 {
            *pi = cand;
            f0 = f1;
        }
        if radius < 1e-14 {
            break;
        }
    }
    Ok(f0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seesaw::seesaw_sweep_in_place;
    use crate::state::{random_pure_state, seeded_rng, SystemShape};
    use crate::zoo;

    #[test]
    fn reaches_w_optimum_fast() {
        let w = zoo::w_state(3).unwrap();
        let mut rng = seeded_rng(3);
        let mut pi = ProductState::random(w.shape(), &mut rng);
        for _ in 0..5 {
            seesaw_sweep_in_place(&w, &mut pi).unwrap();
        }
        let lambda = newton_refine(&w, &mut pi, 50).unwrap();
        assert!((lambda * lambda - 4.0 / 9.0).abs() < 1e-12, "{lambda}");
    }

    #[test]
    fn never_decreases() {
        let shape = SystemShape::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure_state(&shape, 5);
        let mut rng = seeded_rng(7);
        let mut pi = ProductState::random(&shape, &mut rng);
        let before = pi.inner(&psi).unwrap().norm();
        let after = newton_refine(&psi, &mut pi, 20).unwrap();
        assert!(after >= before);
        let mut sweep = pi.clone();
        let l = seesaw_sweep_in_place(&psi, &mut sweep).unwrap();
        assert!(l - after < 1e-12);
    }
}
