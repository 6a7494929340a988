//! Best product-state approximation by alternating (see-saw) maximization.
//!
//! Each sweep visits the parties in order and replaces the local vector of
//! the visited party by the normalized contraction of the state with all
//! other local vectors. The overlap `|<π|ψ>|` never decreases along a sweep.
//! Because the iteration only finds local maxima, several chains are started
//! from random product states and the best one is kept.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::refine::newton_refine;
use crate::state::{contract_raw, seeded_rng, ProductState, PureState, SystemShape};

/// Chains within this overlap of the best screened chain get polished.
const POLISH_MARGIN: f64 = 1e-3;
const POLISH_MAX_CHAINS: usize = 8;

/// Chains that hit a degenerate iterate are restarted this many times.
const DEGENERATE_RETRIES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SeesawConfig {
    /// Number of random starting product states.
    pub restarts: usize,
    /// Sweep budget for each screening chain.
    pub sweeps_max: usize,
    /// A chain stops once `|λ_{t+1} - λ_t|` drops below this.
    pub overlap_tol: f64,
    /// Sweeps spent on each leading chain before the Newton refinement.
    pub polish_sweeps: usize,
    /// Newton steps applied to each leading chain after its sweeps.
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            restarts: 10,
            sweeps_max: 10,
            overlap_tol: 1e-12,
            polish_sweeps: 50,
            refine_steps: 40,
            seed: 0,
        }
    }
}

impl SeesawConfig {
    /// Size-dependent defaults: 10 restarts and 10 sweeps up to total
    /// dimension 16, growing log-linearly to 100 restarts and 30 sweeps at
    /// dimension 1024 and above.
    pub fn for_shape(shape: &SystemShape) -> Self {
        let dim = shape.total_dim() as f64;
        let t = ((dim.log2() - 4.0) / 6.0).clamp(0.0, 1.0);
        SeesawConfig {
            restarts: (10.0 * 10f64.powf(t)).round() as usize,
            sweeps_max: (10.0 + 20.0 * t).round() as usize,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be >= 1".into()));
        }
        if self.sweeps_max == 0 {
            return Err(Error::InvalidConfig("sweeps_max must be >= 1".into()));
        }
        if !(self.overlap_tol > 0.0) {
            return Err(Error::InvalidConfig("overlap_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BpaResult {
    /// Best product state found, phase-fixed so that `<pi|psi> = lambda`.
    pub pi: ProductState,
    pub lambda: f64,
    /// Geometric measure `1 - lambda^2`.
    pub g: f64,
    /// Final overlap of every random chain, in chain order.
    pub restart_lambdas: Vec<f64>,
}

/// Runs one see-saw sweep in place and returns `|<iterate|state>|` after it.
pub fn seesaw_sweep_in_place(state: &PureState, iterate: &mut ProductState) -> Result<f64> {
    state.shape().ensure_same(iterate.shape())?;
    let mut lambda = 0.0;
    for site in 0..state.shape().parties() {
        let v = contract_raw(state.amplitudes(), iterate, site);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateIterate { site });
        }
        iterate.set_local_normalized(site, v)?;
        lambda = norm;
    }
    Ok(lambda)
}

/// One full sweep over all parties, returning the updated iterate.
pub fn seesaw_sweep(state: &PureState, iterate: &ProductState) -> Result<ProductState> {
    let mut next = iterate.clone();
    seesaw_sweep_in_place(state, &mut next)?;
    Ok(next)
}

/// Sweeps between extrapolation attempts in [`run_chain`].
const EXTRAPOLATE_EVERY: usize = 4;

/// Tries `anchor + α (iterate - anchor)` for doubling `α` and moves the
/// iterate to the best extrapolated point if it improves the overlap. Plain
/// sweeps crawl along nearly flat ridges of the overlap landscape; the
/// extrapolation follows the drift direction instead.
fn extrapolate(state: &PureState, iterate: &mut ProductState, anchor: &ProductState, lambda: f64) -> Result<f64> {
    let mut best = (lambda, None);
    let mut alpha = 2.0;
    for _ in 0..12 {
        let locals: Vec<Vec<_>> = iterate
            .locals()
            .iter()
            .zip(anchor.locals())
            .map(|(x, a)| x.iter().zip(a).map(|(xi, ai)| ai + (xi - ai) * alpha).collect())
            .collect();
        let Ok(trial) = ProductState::new(locals) else { break };
        let l = trial.inner(state)?.norm();
        if l <= best.0 {
            break;
        }
        best = (l, Some(trial));
        alpha *= 2.0;
    }
    if let (l, Some(trial)) = best {
        *iterate = trial;
        return Ok(l);
    }
    Ok(lambda)
}

/// Sweeps until the overlap change falls below `tol` or `sweeps` is spent.
fn run_chain(state: &PureState, iterate: &mut ProductState, sweeps: usize, tol: f64) -> Result<f64> {
    let mut prev = iterate.inner(state)?.norm();
    let mut lambda = prev;
    let mut anchor = iterate.clone();
    for k in 1..=sweeps {
        lambda = seesaw_sweep_in_place(state, iterate)?;
        if (lambda - prev).abs() < tol {
            break;
        }
        if k % EXTRAPOLATE_EVERY == 0 {
            lambda = extrapolate(state, iterate, &anchor, lambda)?;
            anchor = iterate.clone();
        }
        prev = lambda;
    }
    Ok(lambda)
}

fn random_chain(state: &PureState, cfg: &SeesawConfig, chain: u64) -> (ProductState, f64) {
    let mut rng = seeded_rng(cfg.seed.wrapping_add(chain));
    for _ in 0..DEGENERATE_RETRIES {
        let mut it = ProductState::random(state.shape(), &mut rng);
        if let Ok(lambda) = run_chain(state, &mut it, cfg.sweeps_max, cfg.overlap_tol) {
            return (it, lambda);
        }
    }
    (ProductState::random(state.shape(), &mut rng), 0.0)
}

/// Best product approximation from `cfg.restarts` random chains.
pub fn best_product_approximation(state: &PureState, cfg: &SeesawConfig) -> Result<BpaResult> {
    best_product_approximation_from(state, cfg, &[])
}

/// Like [`best_product_approximation`], additionally starting chains from the
/// given product states (e.g. the optimum of a nearby state). Hint chains run
/// before the random ones and win ties.
pub fn best_product_approximation_from(
    state: &PureState,
    cfg: &SeesawConfig,
    hints: &[ProductState],
) -> Result<BpaResult> {
    cfg.validate()?;
    for h in hints {
        state.shape().ensure_same(h.shape())?;
    }
    let hinted: Vec<(ProductState, f64)> = hints
        .par_iter()
        .filter_map(|h| {
            let mut it = h.clone();
            run_chain(state, &mut it, cfg.sweeps_max, cfg.overlap_tol)
                .ok()
                .map(|lambda| (it, lambda))
        })
        .collect();
    let random: Vec<(ProductState, f64)> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|chain| random_chain(state, cfg, chain))
        .collect();

    // Screening chains may stop early and nearly degenerate local maxima are
    // hard to rank after a few sweeps; refine every close contender.
    let n_hinted = hinted.len();
    let mut chains: Vec<(ProductState, f64)> = hinted.into_iter().chain(random).collect();
    let top = chains.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let mut contenders: Vec<usize> = (0..chains.len())
        .filter(|&i| chains[i].1 >= top - POLISH_MARGIN)
        .collect();
    contenders.sort_by(|&a, &b| chains[b].1.total_cmp(&chains[a].1).then(a.cmp(&b)));
    contenders.truncate(POLISH_MAX_CHAINS);
    contenders.sort_unstable();
    let polished: Vec<(usize, ProductState, f64)> = contenders
        .par_iter()
        .map(|&i| {
            let mut it = chains[i].0.clone();
            let lambda = run_chain(state, &mut it, cfg.polish_sweeps, cfg.overlap_tol)
                .and_then(|_| newton_refine(state, &mut it, cfg.refine_steps))
                .unwrap_or(chains[i].1);
            (i, it, lambda)
        })
        .collect();
    for (i, it, lambda) in polished {
        chains[i] = (it, lambda);
    }
    let restart_lambdas = chains[n_hinted..].iter().map(|c| c.1).collect();
    // first chain wins ties
    let mut best = 0;
    for (i, c) in chains.iter().enumerate() {
        if c.1 > chains[best].1 {
            best = i;
        }
    }
    let mut pi = chains.swap_remove(best).0;
    let lambda = pi.fix_phase(state)?.min(1.0);
    Ok(BpaResult {
        pi,
        lambda,
        g: 1.0 - lambda * lambda,
        restart_lambdas,
    })
}

/// Geometric measure `G = 1 - λ²`.
pub fn geometric_measure(state: &PureState, cfg: &SeesawConfig) -> Result<f64> {
    Ok(best_product_approximation(state, cfg)?.g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;
    use crate::state::{matricization, random_pure_state, C64};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn product_state_is_a_fixed_point() {
        let s = SystemShape::uniform(3, 2).unwrap();
        let psi = PureState::basis(s.clone(), &[0, 0, 0]).unwrap();
        let plus = vec![c(1.0), c(1.0)];
        let it = ProductState::new(vec![plus.clone(), plus.clone(), plus]).unwrap();
        let next = seesaw_sweep(&psi, &it).unwrap();
        for v in next.locals() {
            assert!((v[0].norm() - 1.0).abs() < 1e-15);
            assert!(v[1].norm() < 1e-15);
        }
        assert!((next.inner(&psi).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz_computational_start_is_fixed() {
        let s = SystemShape::uniform(3, 2).unwrap();
        let mut a = vec![c(0.0); 8];
        a[0] = c(1.0);
        a[7] = c(1.0);
        let ghz = PureState::new(s.clone(), a).unwrap();
        let it = ProductState::computational(&s, &[0, 0, 0]).unwrap();
        let next = seesaw_sweep(&ghz, &it).unwrap();
        assert_eq!(next, it);
        assert!((next.inner(&ghz).unwrap().norm() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_iterate_is_reported() {
        let s = SystemShape::uniform(2, 2).unwrap();
        let psi = PureState::basis(s.clone(), &[1, 1]).unwrap();
        let it = ProductState::computational(&s, &[0, 0]).unwrap();
        assert!(matches!(
            seesaw_sweep(&psi, &it),
            Err(Error::DegenerateIterate { site: 0 })
        ));
        // restarts recover from such starts
        let r = best_product_approximation(&psi, &SeesawConfig::default()).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_sweeps_converge_to_top_singular_value() {
        let s = SystemShape::uniform(2, 2).unwrap();
        for seed in 0..20 {
            let psi = random_pure_state(&s, seed);
            let sigma = singular_values(&matricization(&psi, &[0]).unwrap())[0];
            let mut rng = seeded_rng(seed + 100);
            let mut it = ProductState::random(&s, &mut rng);
            let mut prev = it.inner(&psi).unwrap().norm();
            for _ in 0..200 {
                let lam = seesaw_sweep_in_place(&psi, &mut it).unwrap();
                assert!(lam >= prev - 1e-12);
                prev = lam;
            }
            assert!((prev - sigma).abs() < 1e-10, "seed {seed}: {prev} vs {sigma}");
        }
    }

    #[test]
    fn result_phase_and_measure_are_consistent() {
        let s = SystemShape::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure_state(&s, 5);
        let r = best_product_approximation(&psi, &SeesawConfig::default()).unwrap();
        let ov = r.pi.inner(&psi).unwrap();
        assert!((ov.re - r.lambda).abs() < 1e-14 && ov.im.abs() < 1e-14);
        assert_eq!(r.g, 1.0 - r.lambda * r.lambda);
        assert_eq!(r.restart_lambdas.len(), 10);
    }

    #[test]
    fn config_defaults_scale_with_dimension() {
        let small = SeesawConfig::for_shape(&SystemShape::uniform(3, 2).unwrap());
        assert_eq!((small.restarts, small.sweeps_max), (10, 10));
        let big = SeesawConfig::for_shape(&SystemShape::uniform(5, 4).unwrap());
        assert_eq!((big.restarts, big.sweeps_max), (100, 30));
        assert!(SeesawConfig::default().with_restarts(0).validate().is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let s = SystemShape::uniform(4, 2).unwrap();
        let psi = random_pure_state(&s, 77);
        let cfg = SeesawConfig::default().with_seed(3);
        let a = best_product_approximation(&psi, &cfg).unwrap();
        let b = best_product_approximation(&psi, &cfg).unwrap();
        assert_eq!(a.pi, b.pi);
        assert_eq!(a.restart_lambdas, b.restart_lambdas);
    }
}
