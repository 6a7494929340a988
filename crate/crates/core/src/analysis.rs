//! Marginal-spectrum diagnostics: k-uniformity, AME and MMS checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{reduced_density_matrix, PureState};

/// Entrywise tolerance for a marginal to count as maximally mixed.
pub const FLAT_TOL: f64 = 1e-8;
/// Tolerance for two marginal spectra to count as equal.
pub const SPECTRUM_TOL: f64 = 1e-6;

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn check_level(state: &PureState, k: usize) -> Result<()> {
    let n = state.shape().parties();
    if k == 0 || k >= n {
        return Err(Error::InvalidSubset((0..k).collect()));
    }
    Ok(())
}

/// Descending eigenvalues of every `k`-party marginal.
pub fn marginal_spectra(state: &PureState, k: usize) -> Result<BTreeMap<Vec<usize>, Vec<f64>>> {
    check_level(state, k)?;
    let mut out = BTreeMap::new();
    for s in subsets(state.shape().parties(), k) {
        let rho = reduced_density_matrix(state, &s)?;
        out.insert(s, rho.eigenvalues());
    }
    Ok(out)
}

/// Largest entrywise deviation of any `k`-party marginal from maximally mixed.
pub fn uniformity_defect(state: &PureState, k: usize) -> Result<f64> {
    check_level(state, k)?;
    let mut worst = 0.0f64;
    for s in subsets(state.shape().parties(), k) {
        worst = worst.max(reduced_density_matrix(state, &s)?.distance_from_maximally_mixed());
    }
    Ok(worst)
}

pub fn is_k_uniform(state: &PureState, k: usize, tol: f64) -> Result<bool> {
    Ok(uniformity_defect(state, k)? <= tol)
}

/// `⌊n/2⌋`-uniform. One-party states are not AME.
pub fn is_ame(state: &PureState) -> Result<bool> {
    let half = state.shape().parties() / 2;
    if half == 0 {
        return Ok(false);
    }
    is_k_uniform(state, half, FLAT_TOL)
}

/// Largest difference between any two spectra at one level.
pub fn spectrum_spread(spectra: &BTreeMap<Vec<usize>, Vec<f64>>) -> f64 {
    let mut it = spectra.values();
    let Some(first) = it.next() else { return 0.0 };
    let mut worst = 0.0f64;
    for s in it {
        for (a, b) in s.iter().zip(first) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmsReport {
    /// Largest level `k* <= ⌊n/2⌋` such that all lower levels are uniform
    /// and the spectra at `k*` agree; `None` if no level qualifies.
    pub k_star: Option<usize>,
    /// Largest `k` such that levels `1..=k` are all uniform.
    pub uniform_up_to: usize,
    pub is_mms: bool,
}

pub fn mms_report(state: &PureState) -> Result<MmsReport> {
    let half = state.shape().parties() / 2;
    let mut uniform_up_to = 0;
    let mut k_star = None;
    for k in 1..=half {
        let spectra = marginal_spectra(state, k)?;
        if spectrum_spread(&spectra) <= SPECTRUM_TOL {
            k_star = Some(k);
        }
        if !is_k_uniform(state, k, FLAT_TOL)? {
            break;
        }
        uniform_up_to = k;
    }
    Ok(MmsReport {
        k_star,
        uniform_up_to,
        is_mms: k_star.is_some(),
    })
}

pub fn is_mms(state: &PureState) -> Result<bool> {
    Ok(mms_report(state)?.is_mms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SystemShape;
    use crate::zoo;

    #[test]
    fn subsets_enumerate() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(subsets(5, 2)[4], vec![1, 2]);
    }

    #[test]
    fn ghz_and_w_spectra() {
        let ghz = zoo::ghz(3, 2).unwrap();
        for s in marginal_spectra(&ghz, 1).unwrap().values() {
            assert!((s[0] - 0.5).abs() < 1e-12 && (s[1] - 0.5).abs() < 1e-12);
        }
        let w = zoo::w_state(3).unwrap();
        for s in marginal_spectra(&w, 1).unwrap().values() {
            assert!((s[0] - 2.0 / 3.0).abs() < 1e-12 && (s[1] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniformity_examples() {
        let ring = zoo::named_graph("ring5").unwrap();
        let g5 = zoo::graph_state(&ring).unwrap();
        assert!(is_k_uniform(&g5, 2, FLAT_TOL).unwrap());
        assert!(is_ame(&g5).unwrap());
        let psi4 = zoo::antisymmetric(4).unwrap();
        assert!(is_k_uniform(&psi4, 1, FLAT_TOL).unwrap());
        assert!(!is_ame(&psi4).unwrap());
        let zero = PureState::basis(SystemShape::uniform(4, 2).unwrap(), &[0, 0, 0, 0]).unwrap();
        assert!(!is_k_uniform(&zero, 1, FLAT_TOL).unwrap());
        assert!(is_ame(&zoo::ame_43()).unwrap());
    }

    #[test]
    fn m_tilde_is_mms_not_ame() {
        let m = zoo::m_tilde();
        let spectra = marginal_spectra(&m, 2).unwrap();
        assert_eq!(spectra.len(), 6);
        assert!(spectrum_spread(&spectra) < 1e-10);
        assert!(!is_ame(&m).unwrap());
        let r = mms_report(&m).unwrap();
        assert_eq!(r.k_star, Some(2));
        assert_eq!(r.uniform_up_to, 1);
        assert!(r.is_mms);
    }

    #[test]
    fn invalid_level() {
        let w = zoo::w_state(3).unwrap();
        assert!(marginal_spectra(&w, 0).is_err());
        assert!(marginal_spectra(&w, 3).is_err());
    }
}
