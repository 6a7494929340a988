//! Monotone ascent of the geometric measure.
//!
//! Each step computes the best product approximation `|π>` of the current
//! state and shifts the state towards the orthocomplement of `|π>`:
//! `|ψ> ↦ (|ψ> + θ|η>)/N` with `|η> = Π|ψ>/M`, `Π = 1 - |π><π|`. The overlap
//! with the old `|π>` drops to `λ/N`, and for small enough `θ` the overlap
//! with every product state drops, so `G` increases.
//!
//! Momentum and Nesterov variants accumulate the shifts; the step size is
//! halved whenever the best measure seen stops improving over a window of
//! iterations.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seesaw::{best_product_approximation_from, BpaResult, SeesawConfig};
use crate::state::{random_pure_state, ProductState, PureState, C64, ZERO};

/// Minimum improvement of the best `G` that resets the stagnation window.
pub const STAGNATION_IMPROVEMENT: f64 = 1e-10;

/// Floor for the see-saw tolerance as it is tightened; below this the
/// overlap change is pure round-off.
pub const MIN_OVERLAP_TOL: f64 = 1e-15;

/// `λ` this close to one counts as a product state.
const PRODUCT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Momentum,
    Nesterov,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Variant::Plain),
            "momentum" => Ok(Variant::Momentum),
            "nesterov" => Ok(Variant::Nesterov),
            _ => Err(Error::InvalidConfig(format!("unknown variant '{s}'"))),
        }
    }
}

/// Whether the shift uses the unit vector `|η>` or the raw `Π|ψ>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMode {
    Normalized,
    Projected,
}

impl FromStr for DirectionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(DirectionMode::Normalized),
            "projected" => Ok(DirectionMode::Projected),
            _ => Err(Error::InvalidConfig(format!("unknown direction mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AscentConfig {
    pub theta0: f64,
    pub variant: Variant,
    /// Momentum parameter, `0 <= gamma <= 1`.
    pub gamma: f64,
    pub direction_mode: DirectionMode,
    pub iters_max: usize,
    /// Iterations without improvement of the best `G` before `θ` is halved.
    pub stagnation_window: usize,
    /// The run ends once `θ` falls below this.
    pub theta_min: f64,
    pub seesaw: SeesawConfig,
    /// Seeds the per-iteration see-saw restarts.
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            theta0: 0.01,
            variant: Variant::Momentum,
            gamma: 0.9,
            direction_mode: DirectionMode::Normalized,
            iters_max: 20_000,
            stagnation_window: 400,
            theta_min: 1e-6,
            seesaw: SeesawConfig::default(),
            seed: 0,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta0 > 0.0) {
            return Err(Error::InvalidConfig("theta0 must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig("gamma must lie in [0, 1]".into()));
        }
        if !(self.theta_min > 0.0 && self.theta_min < self.theta0) {
            return Err(Error::InvalidConfig("need 0 < theta_min < theta0".into()));
        }
        if self.stagnation_window == 0 {
            return Err(Error::InvalidConfig("stagnation_window must be >= 1".into()));
        }
        self.seesaw.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub g: f64,
    pub lambda: f64,
    pub theta: f64,
    /// `|<π_{t-1}|π_t>|`, one for the first record.
    pub overlap_with_prev_pi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `θ` dropped below `theta_min`.
    Converged,
    IterationLimit,
    /// The iterate became a product state; the measure is zero there.
    ProductState,
}

#[derive(Clone, Debug)]
pub struct AscentTrace {
    pub records: Vec<TraceRecord>,
    /// Iterate with the largest measured `G`.
    pub final_state: PureState,
    pub best_g: f64,
    pub termination: Termination,
}

impl AscentTrace {
    /// CSV with header `iter,g,lambda,theta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,g,lambda,theta\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{:.15e},{:.15e},{:.15e}", r.iter, r.g, r.lambda, r.theta);
        }
        out
    }
}

/// `Π|ψ> = |ψ> - <π|ψ>|π>` and `M = |Π|ψ>| = √(1 - λ²)`.
fn project_out(state: &PureState, pi: &ProductState) -> Result<(Vec<C64>, f64)> {
    let ov = pi.inner(state)?;
    let lambda = ov.norm();
    if lambda >= 1.0 - PRODUCT_TOL {
        return Err(Error::ProductState { lambda });
    }
    let pure_pi = pi.to_pure();
    let v: Vec<C64> = state
        .amplitudes()
        .iter()
        .zip(pure_pi.amplitudes())
        .map(|(a, p)| a - ov * p)
        .collect();
    Ok((v, (1.0 - lambda * lambda).sqrt()))
}

/// Ascent direction at `state` given its product approximation `pi`.
///
/// Returns `|η> = Π|ψ>/M` in normalized mode or `Π|ψ>` in projected mode,
/// together with `M = √(1 - λ²)`.
pub fn update_direction(state: &PureState, pi: &ProductState, mode: DirectionMode) -> Result<(Vec<C64>, f64)> {
    let (mut v, m) = project_out(state, pi)?;
    if mode == DirectionMode::Normalized {
        let inv = 1.0 / m;
        v.iter_mut().for_each(|z| *z *= inv);
    }
    Ok((v, m))
}

fn shifted(state: &PureState, kappa: &[C64]) -> Result<PureState> {
    let amps = state
        .amplitudes()
        .iter()
        .zip(kappa)
        .map(|(a, k)| a + k)
        .collect();
    PureState::new(state.shape().clone(), amps)
}

/// A single update `(|ψ> + θ|η>)/N`.
pub fn ascend_step(state: &PureState, pi: &ProductState, theta: f64, mode: DirectionMode) -> Result<PureState> {
    if !(theta > 0.0) {
        return Err(Error::InvalidConfig("theta must be > 0".into()));
    }
    let (mut dir, _) = update_direction(state, pi, mode)?;
    dir.iter_mut().for_each(|z| *z *= theta);
    shifted(state, &dir)
}

/// Truth of `1/√(1 + 2qx + x²) < 1 - qx + c x²`.
pub fn check_norm_bound(q: f64, x: f64, c: f64) -> bool {
    1.0 / (1.0 + 2.0 * q * x + x * x).sqrt() < 1.0 - q * x + c * x * x
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Rotates `eta` by a global phase so that `<kappa|eta>` is real and >= 0.
fn align_phase(kappa: &[C64], eta: &mut [C64]) {
    let ov = dot(kappa, eta);
    let mag = ov.norm();
    if mag > 0.0 {
        let phase = ov.conj() / mag;
        eta.iter_mut().for_each(|z| *z *= phase);
    }
}

struct Bpa {
    cfg: SeesawConfig,
    base_seed: u64,
    calls: u64,
}

impl Bpa {
    fn run(&mut self, state: &PureState, hint: Option<&ProductState>) -> Result<BpaResult> {
        let mut cfg = self.cfg.clone();
        cfg.seed = self
            .base_seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(self.calls.wrapping_mul(1_000_003));
        self.calls += 1;
        let hints: Vec<ProductState> = hint.into_iter().cloned().collect();
        best_product_approximation_from(state, &cfg, &hints)
    }
}

/// Runs the ascent from `initial`.
pub fn run_ascent(initial: &PureState, cfg: &AscentConfig) -> Result<AscentTrace> {
    cfg.validate()?;
    let mut bpa = Bpa {
        cfg: cfg.seesaw.clone(),
        base_seed: cfg.seed,
        calls: 0,
    };
    let dim = initial.shape().total_dim();
    let mut psi = initial.clone();
    let mut kappa = vec![ZERO; dim];
    let mut theta = cfg.theta0;
    let mut records = Vec::new();
    let mut best_g = f64::NEG_INFINITY;
    let mut best_state = psi.clone();
    let mut best_pi: Option<ProductState> = None;
    let mut last_improvement = 0usize;
    let mut prev_pi: Option<ProductState> = None;
    let mut termination = Termination::IterationLimit;

    for iter in 0..=cfg.iters_max {
        let r = bpa.run(&psi, prev_pi.as_ref())?;
        let overlap_with_prev_pi = match &prev_pi {
            Some(p) => p.to_pure().inner(&r.pi.to_pure())?.norm(),
            None => 1.0,
        };
        records.push(TraceRecord {
            iter,
            g: r.g,
            lambda: r.lambda,
            theta,
            overlap_with_prev_pi,
        });
        if r.g > best_g + STAGNATION_IMPROVEMENT {
            last_improvement = iter;
        }
        if r.g > best_g {
            best_g = r.g;
            best_state = psi.clone();
            best_pi = Some(r.pi.clone());
        }
        if iter == cfg.iters_max {
            break;
        }
        if iter - last_improvement >= cfg.stagnation_window {
            theta *= 0.5;
            bpa.cfg.overlap_tol = (bpa.cfg.overlap_tol * 0.1).max(MIN_OVERLAP_TOL);
            last_improvement = iter;
            if theta < cfg.theta_min {
                termination = Termination::Converged;
                break;
            }
            // resume from the best iterate with fresh momentum
            psi = best_state.clone();
            kappa.iter_mut().for_each(|k| *k = ZERO);
            prev_pi = best_pi.clone();
            continue;
        }

        let (eta_at, pi_at) = match cfg.variant {
            Variant::Nesterov => {
                let look = shifted(&psi, &kappa.iter().map(|k| k * cfg.gamma).collect::<Vec<_>>())?;
                let rl = bpa.run(&look, Some(&r.pi))?;
                (look, rl.pi)
            }
            _ => (psi.clone(), r.pi.clone()),
        };
        let mut eta = match update_direction(&eta_at, &pi_at, cfg.direction_mode) {
            Ok((eta, _)) => eta,
            Err(Error::ProductState { .. }) => {
                termination = Termination::ProductState;
                break;
            }
            Err(e) => return Err(e),
        };
        let gamma = match cfg.variant {
            Variant::Plain => 0.0,
            _ => cfg.gamma,
        };
        if gamma > 0.0 {
            align_phase(&kappa, &mut eta);
        }
        for (k, e) in kappa.iter_mut().zip(&eta) {
            *k = *k * gamma + e * theta;
        }
        psi = shifted(&psi, &kappa)?;
        prev_pi = Some(r.pi);
    }

    Ok(AscentTrace {
        records,
        final_state: best_state,
        best_g,
        termination,
    })
}

/// Ascent from a Haar-random initial state.
pub fn run_ascent_random(shape: &crate::state::SystemShape, cfg: &AscentConfig, seed: u64) -> Result<AscentTrace> {
    run_ascent(&random_pure_state(shape, seed), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SystemShape;
    use crate::zoo;

    fn ghz3_pi() -> (PureState, ProductState) {
        let g = zoo::ghz(3, 2).unwrap();
        let pi = ProductState::computational(g.shape(), &[0, 0, 0]).unwrap();
        (g, pi)
    }

    #[test]
    fn ghz_direction_points_to_111() {
        let (g, pi) = ghz3_pi();
        let (eta, m) = update_direction(&g, &pi, DirectionMode::Normalized).unwrap();
        assert!((m - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((eta[7].re - 1.0).abs() < 1e-15);
        assert!(eta[..7].iter().all(|z| z.norm() < 1e-15));
        let (raw, _) = update_direction(&g, &pi, DirectionMode::Projected).unwrap();
        assert!((raw[7].re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn direction_is_orthogonal_to_pi_and_overlaps_state() {
        let s = SystemShape::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure_state(&s, 4);
        let r = crate::seesaw::best_product_approximation(&psi, &SeesawConfig::default()).unwrap();
        let (eta, _) = update_direction(&psi, &r.pi, DirectionMode::Normalized).unwrap();
        let pi = r.pi.to_pure();
        assert!(dot(pi.amplitudes(), &eta).norm() < 1e-14);
        let expect = (1.0 - r.lambda * r.lambda).sqrt();
        let got = dot(psi.amplitudes(), &eta);
        assert!((got.re - expect).abs() < 1e-14 && got.im.abs() < 1e-14);
    }

    #[test]
    fn product_state_has_no_direction() {
        let s = SystemShape::uniform(2, 2).unwrap();
        let psi = PureState::basis(s.clone(), &[0, 1]).unwrap();
        let pi = ProductState::computational(&s, &[0, 1]).unwrap();
        assert!(matches!(
            update_direction(&psi, &pi, DirectionMode::Normalized),
            Err(Error::ProductState { .. })
        ));
    }

    #[test]
    fn ghz_step_matches_closed_form() {
        let (g, pi) = ghz3_pi();
        let theta = 0.1;
        let next = ascend_step(&g, &pi, theta, DirectionMode::Normalized).unwrap();
        let n = (1.0 + 0.2 / 2f64.sqrt() + 0.01).sqrt();
        assert!((next.amplitudes()[0].re - 0.5f64.sqrt() / n).abs() < 1e-15);
        // direct vector arithmetic: (|000>/√2 + |111>/√2 + θ|111>) normalized
        let h = 0.5f64.sqrt();
        let direct = (h * h + (h + theta) * (h + theta)).sqrt();
        assert!((next.amplitudes()[7].re - (h + theta) / direct).abs() < 1e-15);
    }

    #[test]
    fn small_step_stays_close() {
        let (g, pi) = ghz3_pi();
        let next = ascend_step(&g, &pi, 1e-9, DirectionMode::Normalized).unwrap();
        let dist: f64 = g
            .amplitudes()
            .iter()
            .zip(next.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dist < 2e-9);
    }

    #[test]
    fn norm_bound_examples() {
        assert!(check_norm_bound(1.0, 1.0, 3.0));
        assert!(check_norm_bound(0.0, 1e-4, 3.0));
        assert!(!check_norm_bound(1.0, 0.5, -1.0));
    }

    #[test]
    fn config_validation() {
        let mut c = AscentConfig::default();
        assert!(c.validate().is_ok());
        c.gamma = 1.5;
        assert!(c.validate().is_err());
        c = AscentConfig {
            theta_min: 0.1,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        assert_eq!("nesterov".parse::<Variant>().unwrap(), Variant::Nesterov);
        assert!("adam".parse::<Variant>().is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = SystemShape::uniform(2, 2).unwrap();
        let cfg = AscentConfig {
            iters_max: 3,
            ..Default::default()
        };
        let t = run_ascent_random(&s, &cfg, 1).unwrap();
        assert_eq!(t.records.len(), 4);
        let csv = t.to_csv();
        assert!(csv.starts_with("iter,g,lambda,theta\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
