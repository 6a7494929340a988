//! Reproduction campaigns with pass/fail tables.
//!
//! Each campaign tries a fixed list of seeds in order and keeps the first run
//! that meets its target (or the best one if none does), so results are
//! deterministic.

use std::fmt;
use std::time::Instant;

use crate::analysis::{is_ame, mms_report, uniformity_defect, FLAT_TOL};
use crate::ascent::{run_ascent_random, AscentConfig, AscentTrace};
use crate::canon::{lu_fidelity, lu_match_subspace, CanonConfig, SUBSPACE_ANGLE_TOL};
use crate::error::Result;
use crate::seesaw::{best_product_approximation, SeesawConfig};
use crate::state::{PureState, SystemShape};
use crate::subspace::{run_subspace_ascent, subspace_measure, SubspaceProjector, SubspaceTrace};
use crate::zoo;

#[derive(Clone, Debug)]
pub struct ReproRow {
    pub name: String,
    pub target: f64,
    pub achieved: f64,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ReproTable {
    pub title: String,
    pub rows: Vec<ReproRow>,
}

impl ReproTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

impl fmt::Display for ReproTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        writeln!(f, "{:<22} {:>14} {:>14} {:>8} {:>6}  detail", "case", "target", "achieved", "time/s", "")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<22} {:>14.10} {:>14.10} {:>8.1} {:>6}  {}",
                r.name,
                r.target,
                r.achieved,
                r.seconds,
                if r.pass { "PASS" } else { "FAIL" },
                r.detail
            )?;
        }
        Ok(())
    }
}

/// Careful re-evaluation of `G` used to score final states.
pub fn verify_config(shape: &SystemShape) -> SeesawConfig {
    SeesawConfig { restarts: 300, polish_sweeps: 200, refine_steps: 2000, ..SeesawConfig::for_shape(shape) }
}

pub fn verified_g(state: &PureState) -> Result<f64> {
    Ok(best_product_approximation(state, &verify_config(state.shape()))?.g)
}

/// An ascent run with its verified measure.
#[derive(Clone, Debug)]
pub struct Campaign {
    pub trace: AscentTrace,
    pub verified_g: f64,
    pub seed: u64,
    pub runs: usize,
}

/// Runs `seeds` in order until `accept` holds for the verified measure.
pub fn ascent_campaign<F: Fn(f64) -> bool>(shape: &SystemShape, cfg: &AscentConfig, seeds: &[u64], accept: F) -> Result<Campaign> {
    let mut best: Option<Campaign> = None;
    for (i, &seed) in seeds.iter().enumerate() {
        let trace = run_ascent_random(shape, &AscentConfig { seed, ..cfg.clone() }, seed)?;
        let g = verified_g(&trace.final_state)?;
        let better = best.as_ref().map_or(true, |b| g > b.verified_g);
        if better {
            best = Some(Campaign { trace, verified_g: g, seed, runs: i + 1 });
        }
        if accept(g) {
            break;
        }
    }
    let mut b = best.expect("at least one seed");
    b.runs = b.runs.max(1);
    Ok(b)
}

/// Ascent settings for `n` qubits.
pub fn qubit_config(n: usize) -> Result<AscentConfig> {
    let shape = SystemShape::uniform(n, 2)?;
    let mut seesaw = SeesawConfig::for_shape(&shape);
    let (theta0, window) = match n {
        0..=3 => (0.01, 100),
        4 => (0.01, 200),
        5 => {
            seesaw.restarts = 40;
            (0.01, 100)
        }
        6 => {
            seesaw.restarts = 60;
            (0.06, 400)
        }
        _ => (0.06, 400),
    };
    Ok(AscentConfig { theta0, stagnation_window: window, theta_min: 1e-7, iters_max: 100_000, seesaw, ..AscentConfig::default() })
}

const SEEDS: [u64; 6] = [0, 1, 2, 3, 4, 5];

/// Table-1 targets for 2..6 qubits.
pub fn table1_targets() -> Vec<(usize, f64)> {
    vec![
        (2, 0.5),
        (3, 5.0 / 9.0),
        (4, 7.0 / 9.0),
        (5, (33.0 - 3f64.sqrt()) / 36.0),
        (6, 11.0 / 12.0),
    ]
}

pub fn table1_row(n: usize, target: f64) -> Result<ReproRow> {
    let t = Instant::now();
    let shape = SystemShape::uniform(n, 2)?;
    let cfg = qubit_config(n)?;
    let c = ascent_campaign(&shape, &cfg, &SEEDS, |g| (g - target).abs() <= 1e-5)?;
    Ok(ReproRow {
        name: format!("{n} qubits"),
        target,
        achieved: c.verified_g,
        pass: (c.verified_g - target).abs() <= 1e-5,
        detail: format!("seed {} ({} run(s)), {} iterations, theta0 {}", c.seed, c.runs, c.trace.records.len(), cfg.theta0),
        seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn table1() -> Result<ReproTable> {
    let rows = table1_targets().into_iter().map(|(n, g)| table1_row(n, g)).collect::<Result<Vec<_>>>()?;
    Ok(ReproTable { title: "Maximally entangled qubit states (tolerance 1e-5)".into(), rows })
}

/// Two qudits of dimension `d`: ascent capped at 400 iterations, then the Bell fidelity.
pub fn bipartite_row(d: usize) -> Result<ReproRow> {
    let t = Instant::now();
    let shape = SystemShape::uniform(2, d)?;
    let theta0 = if d <= 5 { 0.01 } else { 0.1 };
    let cfg = AscentConfig { theta0, iters_max: 5000, theta_min: 1e-9, stagnation_window: 100, seesaw: SeesawConfig::for_shape(&shape), ..AscentConfig::default() };
    let target = 1.0 - 1.0 / d as f64;
    let bell = zoo::bell_qudit(d)?;
    let mut best: Option<(f64, f64, u64, usize)> = None;
    for &seed in &SEEDS {
        let trace = run_ascent_random(&shape, &AscentConfig { seed, ..cfg.clone() }, seed)?;
        let g = verified_g(&trace.final_state)?;
        let fid = lu_fidelity(&trace.final_state, &bell, &CanonConfig::default())?.fidelity;
        let ok = (g - target).abs() <= 1e-5 && fid >= 1.0 - 1e-6;
        if best.map_or(true, |b| fid > b.1) {
            best = Some((g, fid, seed, trace.records.len()));
        }
        if ok {
            break;
        }
    }
    let (g, fid, seed, iters) = best.expect("at least one seed");
    Ok(ReproRow {
        name: format!("2 qudits d={d}"),
        target,
        achieved: g,
        pass: (g - target).abs() <= 1e-5 && fid >= 1.0 - 1e-6,
        detail: format!("Bell fidelity {fid:.10}, seed {seed}, {iters} iterations, theta0 {theta0}"),
        seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn bipartite() -> Result<ReproTable> {
    let rows = (2..=10).map(bipartite_row).collect::<Result<Vec<_>>>()?;
    Ok(ReproTable { title: "Two-qudit ascent and Bell fidelity (tolerance 1e-5, fidelity 1 - 1e-6)".into(), rows })
}

/// Careful re-evaluation of a subspace measure.
pub fn verified_subspace_measure(p: &SubspaceProjector) -> Result<f64> {
    subspace_measure(p, &SeesawConfig { restarts: 300, ..SeesawConfig::for_shape(p.shape()) })
}

pub fn subspace_config(shape: &SystemShape) -> AscentConfig {
    AscentConfig { theta0: 0.01, stagnation_window: 100, theta_min: 1e-7, iters_max: 100_000, seesaw: SeesawConfig::for_shape(shape), ..AscentConfig::default() }
}

/// Subspace ascent over `seeds`, keeping the first run within `1e-5` of `target`.
pub fn subspace_campaign(shape: &SystemShape, k: usize, target: f64) -> Result<(SubspaceTrace, f64, u64)> {
    let cfg = subspace_config(shape);
    let mut best: Option<(SubspaceTrace, f64, u64)> = None;
    for &seed in &SEEDS {
        let tr = run_subspace_ascent(shape, k, &AscentConfig { seed, ..cfg.clone() }, seed)?;
        let m = verified_subspace_measure(&tr.best)?;
        if best.as_ref().map_or(true, |b| m > b.1) {
            best = Some((tr, m, seed));
        }
        if m >= target - 1e-5 {
            break;
        }
    }
    Ok(best.expect("at least one seed"))
}

fn conjugate(s: &PureState) -> Result<PureState> {
    PureState::new(s.shape().clone(), s.amplitudes().iter().map(|z| z.conj()).collect())
}

/// Largest principal angle to span{W, V} or its mirror image span{W, V*}
/// after local-unitary alignment.
pub fn w_v_angle(p: &SubspaceProjector) -> Result<f64> {
    let w = zoo::w_state(3)?;
    let v = zoo::v_state();
    let mut best = f64::INFINITY;
    for other in [v.clone(), conjugate(&v)?] {
        let target = SubspaceProjector::from_states(&[w.clone(), other])?;
        best = best.min(lu_match_subspace(p, &target, &CanonConfig::default())?.angle);
    }
    Ok(best)
}

pub fn subspaces() -> Result<ReproTable> {
    let mut rows = Vec::new();
    for (n, d, target) in [(3usize, 2usize, 5.0 / 9.0), (2, 3, 0.5), (2, 2, 0.0)] {
        let t = Instant::now();
        let shape = SystemShape::uniform(n, d)?;
        let (tr, m, seed) = subspace_campaign(&shape, 2, target)?;
        let mut pass = m >= target - 1e-5;
        let mut detail = format!("seed {seed}, {} iterations", tr.records.len());
        if target == 0.0 {
            pass = m.abs() <= 1e-8;
        }
        if n == 3 {
            let angle = w_v_angle(&tr.best)?;
            pass &= angle < SUBSPACE_ANGLE_TOL;
            detail.push_str(&format!(", principal angle to span{{W,V}} {angle:.3e}"));
        }
        rows.push(ReproRow {
            name: format!("{n}x{d}-dim, k=2"),
            target,
            achieved: m,
            pass,
            detail,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    Ok(ReproTable { title: "Maximally entangled two-dimensional subspaces (tolerance 1e-5)".into(), rows })
}

/// Seven qubits and the four-ququad search beating 0.975.
/// Ascent settings for `n` qudits of dimension `d >= 3`.
pub fn qudit_config(shape: &SystemShape) -> AscentConfig {
    AscentConfig {
        theta0: 0.01,
        stagnation_window: 200,
        theta_min: 1e-7,
        iters_max: 100_000,
        seesaw: SeesawConfig::for_shape(shape),
        ..AscentConfig::default()
    }
}

/// Three ququads (1-uniform at `7/8`) and four qutrits (AME at `8/9`).
pub fn qudits() -> Result<ReproTable> {
    let mut rows = Vec::new();
    for (n, d, target) in [(3usize, 4usize, 7.0 / 8.0), (4, 3, 8.0 / 9.0)] {
        let t = Instant::now();
        let shape = SystemShape::uniform(n, d)?;
        let c = ascent_campaign(&shape, &qudit_config(&shape), &SEEDS, |g| g >= target - 1e-5)?;
        let psi = &c.trace.final_state;
        let (label, ok) = if n == 3 {
            let defect = uniformity_defect(psi, 1)?;
            (format!("1-uniformity defect {defect:.2e}"), defect <= FLAT_TOL)
        } else {
            let ame = is_ame(psi)?;
            (format!("AME {ame}, 2-uniformity defect {:.2e}", uniformity_defect(psi, 2)?), ame)
        };
        rows.push(ReproRow {
            name: format!("{n} qudits d={d}"),
            target,
            achieved: c.verified_g,
            pass: c.verified_g >= target - 1e-5 && ok,
            detail: format!("{label}, seed {}, {} iterations", c.seed, c.trace.records.len()),
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    Ok(ReproTable { title: "Higher-dimensional ascent (tolerance 1e-5)".into(), rows })
}

/// Closest-product values of zoo states.
pub fn zoo_targets() -> Result<ReproTable> {
    let cases: Vec<(&str, PureState, f64, f64)> = vec![
        ("psi3", zoo::antisymmetric(3)?, 5.0 / 6.0, 1e-6),
        ("psi4", zoo::antisymmetric(4)?, 23.0 / 24.0, 1e-6),
        ("ame_3d(3)", zoo::ame_3d(3)?, 2.0 / 3.0, 1e-6),
        ("phi_34", zoo::phi_34(), 7.0 / 8.0, 1e-6),
        ("ame_43", zoo::ame_43(), 8.0 / 9.0, 1e-6),
        ("ame_5d(3)", zoo::ame_5d(3)?, 0.96122, 1e-4),
        ("ame_5d(4)", zoo::ame_5d(4)?, 31.0 / 32.0, 1e-6),
        ("ame44_pairs", zoo::ame44_pairs(), 15.0 / 16.0, 1e-6),
        ("fano", zoo::graph_state(&zoo::named_graph("fano")?)?, 15.0 / 16.0, 1e-6),
    ];
    let mut rows = Vec::new();
    for (name, psi, target, tol) in cases {
        let t = Instant::now();
        let g = verified_g(&psi)?;
        rows.push(ReproRow {
            name: name.into(),
            target,
            achieved: g,
            pass: (g - target).abs() <= tol,
            detail: format!("tolerance {tol:e}"),
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    Ok(ReproTable { title: "Closest-product values of reference states".into(), rows })
}

/// `G(phi_34) - G(ame_3d(4))`, expected `1/8`.
pub fn ame_gap() -> Result<ReproTable> {
    let t = Instant::now();
    let a = verified_g(&zoo::ame_3d(4)?)?;
    let b = verified_g(&zoo::phi_34())?;
    let gap = b - a;
    Ok(ReproTable {
        title: "Three-ququad states with different measures".into(),
        rows: vec![ReproRow {
            name: "phi_34 - ame_3d(4)".into(),
            target: 0.125,
            achieved: gap,
            pass: (gap - 0.125).abs() <= 1e-5,
            detail: format!("G(ame_3d(4)) = {a:.10}, G(phi_34) = {b:.10}"),
            seconds: t.elapsed().as_secs_f64(),
        }],
    })
}

/// Seven-qubit search, accepted at `G >= 0.941` with `k* = 3`.
pub fn seven_qubits() -> Result<ReproRow> {
    let t = Instant::now();
    let shape = SystemShape::uniform(7, 2)?;
    let cfg = AscentConfig { theta_min: 1e-5, ..qubit_config(7)? };
    let c = ascent_campaign(&shape, &cfg, &SEEDS[..2], |g| g >= 0.941)?;
    let mms = mms_report(&c.trace.final_state)?;
    Ok(ReproRow {
        name: "7 qubits".into(),
        target: 0.941,
        achieved: c.verified_g,
        pass: c.verified_g >= 0.941 && mms.is_mms && mms.k_star == Some(3),
        detail: format!("k* {:?}, uniform up to {}, seed {}", mms.k_star, mms.uniform_up_to, c.seed),
        seconds: t.elapsed().as_secs_f64(),
    })
}

/// Five-ququad search, accepted above `0.975`.
pub fn five_ququads() -> Result<ReproRow> {
    let t = Instant::now();
    let shape = SystemShape::uniform(5, 4)?;
    let cfg = AscentConfig {
        theta0: 0.01,
        stagnation_window: 200,
        theta_min: 1e-5,
        iters_max: 20_000,
        seesaw: SeesawConfig::for_shape(&shape),
        ..AscentConfig::default()
    };
    let c = ascent_campaign(&shape, &cfg, &SEEDS[..1], |g| g > 0.975)?;
    Ok(ReproRow {
        name: "5 ququads".into(),
        target: 0.975,
        achieved: c.verified_g,
        pass: c.verified_g > 0.975,
        detail: format!("seed {}, {} iterations", c.seed, c.trace.records.len()),
        seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn extended() -> Result<ReproTable> {
    Ok(ReproTable { title: "Extended searches".into(), rows: vec![seven_qubits()?, five_ququads()?] })
}
