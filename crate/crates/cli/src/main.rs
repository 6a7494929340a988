use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use geomax::analysis::{marginal_spectra, mms_report, uniformity_defect};
use geomax::ascent::{run_ascent_random, AscentConfig, DirectionMode, Termination, Variant};
use geomax::canon::{lu_fidelity, pretty_print, sparsify, CanonConfig};
use geomax::io::{projector_to_json, state_from_json, state_to_json, unitaries_to_json};
use geomax::repro;
use geomax::seesaw::{best_product_approximation, SeesawConfig};
use geomax::subspace::run_subspace_ascent;
use geomax::{zoo, PureState, SystemShape};

/// Geometric measure of entanglement: evaluation, ascent and canonicalization.
#[derive(Parser, Debug)]
#[command(name = "geomax", version)]
struct Cli {
    /// key=value file supplying defaults for the flags below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// See-saw restarts per evaluation
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Accept input states that are not normalized
    #[arg(long, global = true)]
    renormalize: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct AscentFlags {
    /// Initial step size
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// plain, momentum or nesterov
    #[arg(long)]
    variant: Option<String>,
    /// normalized or projected
    #[arg(long)]
    direction_mode: Option<String>,
    /// Iteration cap
    #[arg(long)]
    iters: Option<usize>,
    /// Iterations without improvement before the step is halved
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    theta_min: Option<f64>,
    /// Output file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace CSV file
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geometric measure of a state file ("-" or nothing reads stdin)
    Measure { file: Option<PathBuf> },
    /// Ascent from a random state
    Maximize {
        /// Local dimensions, e.g. 2,2,2
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        flags: AscentFlags,
    },
    /// Ascent over rank-k subspaces
    Subspace {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, short)]
        k: usize,
        #[command(flatten)]
        flags: AscentFlags,
    },
    /// Local-unitary comparison with a guess, or sparsification
    Canon {
        file: PathBuf,
        #[arg(long, conflicts_with = "sparsify", required_unless_present = "sparsify")]
        guess: Option<PathBuf>,
        #[arg(long)]
        sparsify: bool,
        /// Objective evaluations allowed
        #[arg(long)]
        budget: Option<usize>,
        /// Unitaries JSON file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reference states
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Marginal report of a state file
    Analyze { file: Option<PathBuf> },
    /// Reproduction tables
    Repro { target: ReproTarget },
}

#[derive(Subcommand, Debug)]
enum ZooAction {
    List,
    Emit {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReproTarget {
    Table1,
    Bipartite,
    Subspaces,
    Qudits,
    Zoo,
    Extended,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    NotConverged(String),
}

impl From<geomax::Error> for Failure {
    fn from(e: geomax::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

const CONFIG_KEYS: [&str; 11] =
    ["seed", "restarts", "jobs", "theta", "gamma", "variant", "direction-mode", "iters", "window", "theta-min", "budget"];

fn read_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Failure::Usage(format!("{}:{}: unknown key '{}'", path.display(), i + 1, k.trim())));
        }
        out.insert(key, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

struct Settings {
    config: BTreeMap<String, String>,
    seed: Option<u64>,
    restarts: Option<usize>,
    renormalize: bool,
}

impl Settings {
    /// Flag value, else config value, else `None`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Failure::Usage(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }

    fn seed(&self) -> CliResult<u64> {
        Ok(self.pick(self.seed, "seed")?.unwrap_or(0))
    }

    fn seesaw(&self, shape: &SystemShape) -> CliResult<SeesawConfig> {
        let mut cfg = SeesawConfig::for_shape(shape).with_seed(self.seed()?);
        if let Some(r) = self.pick(self.restarts, "restarts")? {
            cfg.restarts = r;
        }
        Ok(cfg)
    }

    fn ascent(&self, shape: &SystemShape, f: &AscentFlags) -> CliResult<AscentConfig> {
        let d = AscentConfig::default();
        let variant = match self.pick(f.variant.clone(), "variant")? {
            Some(v) => v.parse::<Variant>()?,
            None => d.variant,
        };
        let direction_mode = match self.pick(f.direction_mode.clone(), "direction-mode")? {
            Some(v) => v.parse::<DirectionMode>()?,
            None => d.direction_mode,
        };
        let cfg = AscentConfig {
            theta0: self.pick(f.theta, "theta")?.unwrap_or(d.theta0),
            variant,
            gamma: self.pick(f.gamma, "gamma")?.unwrap_or(d.gamma),
            direction_mode,
            iters_max: self.pick(f.iters, "iters")?.unwrap_or(d.iters_max),
            stagnation_window: self.pick(f.window, "window")?.unwrap_or(d.stagnation_window),
            theta_min: self.pick(f.theta_min, "theta-min")?.unwrap_or(d.theta_min),
            seesaw: self.seesaw(shape)?,
            seed: self.seed()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_input(file: Option<&Path>) -> CliResult<String> {
    match file {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn load_state(file: Option<&Path>, renormalize: bool) -> CliResult<PureState> {
    let text = read_input(file)?;
    state_from_json(&text, renormalize).map_err(|e| {
        let name = file.map_or("<stdin>".to_string(), |p| p.display().to_string());
        Failure::Usage(format!("{name}: {e}"))
    })
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::IterationLimit => "iteration_limit",
        Termination::ProductState => "product_state",
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    let st = Settings { config, seed: cli.seed, restarts: cli.restarts, renormalize: cli.renormalize };
    if let Some(jobs) = st.pick(cli.jobs, "jobs")? {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Measure { file } => {
            let psi = load_state(file.as_deref(), st.renormalize)?;
            let r = best_product_approximation(&psi, &st.seesaw(psi.shape())?)?;
            let locals: Vec<Value> = r
                .pi
                .locals()
                .iter()
                .map(|v| json!({"re": v.iter().map(|z| z.re).collect::<Vec<_>>(), "im": v.iter().map(|z| z.im).collect::<Vec<_>>()}))
                .collect();
            print!("{}", pretty(&json!({"g": r.g, "lambda": r.lambda, "product": locals})));
            Ok(())
        }
        Command::Maximize { dims, flags } => {
            let shape = SystemShape::new(dims)?;
            let cfg = st.ascent(&shape, &flags)?;
            let tr = run_ascent_random(&shape, &cfg, cfg.seed)?;
            write_output(flags.out.as_deref(), &state_to_json(&tr.final_state))?;
            if let Some(p) = &flags.trace {
                fs::write(p, tr.to_csv())?;
            }
            let summary = json!({
                "g": tr.best_g,
                "iterations": tr.records.len(),
                "termination": termination_name(tr.termination),
            });
            eprint!("{}", pretty(&summary));
            if tr.termination != Termination::Converged {
                return Err(Failure::NotConverged(format!("ascent stopped: {}", termination_name(tr.termination))));
            }
            Ok(())
        }
        Command::Subspace { dims, k, flags } => {
            let shape = SystemShape::new(dims)?;
            let cfg = st.ascent(&shape, &flags)?;
            let tr = run_subspace_ascent(&shape, k, &cfg, cfg.seed)?;
            write_output(flags.out.as_deref(), &projector_to_json(&tr.best))?;
            if let Some(p) = &flags.trace {
                fs::write(p, tr.to_csv())?;
            }
            eprint!(
                "{}",
                pretty(&json!({
                    "subspace_measure": tr.best_measure,
                    "iterations": tr.records.len(),
                    "termination": termination_name(tr.termination),
                }))
            );
            // a span containing a product state legitimately ends at measure zero
            if tr.termination == Termination::IterationLimit {
                return Err(Failure::NotConverged("subspace ascent hit the iteration cap".into()));
            }
            Ok(())
        }
        Command::Canon { file, guess, sparsify: _, budget, out } => {
            let psi = load_state(Some(&file), st.renormalize)?;
            let mut cc = CanonConfig { seed: st.seed()?, ..CanonConfig::default() };
            if let Some(b) = st.pick(budget, "budget")? {
                cc.budget = b;
            }
            if let Some(r) = st.pick(st.restarts, "restarts")? {
                cc.restarts = r;
            }
            let converged = if let Some(g) = guess {
                let phi = load_state(Some(&g), st.renormalize)?;
                let fit = lu_fidelity(&psi, &phi, &cc)?;
                print!(
                    "{}",
                    pretty(&json!({
                        "fidelity": fit.fidelity,
                        "equal": fit.equal(),
                        "converged": fit.converged,
                        "evaluations": fit.evaluations,
                    }))
                );
                if let Some(p) = &out {
                    fs::write(p, unitaries_to_json(&fit.unitaries))?;
                }
                fit.converged
            } else {
                let s = sparsify(&psi, &cc)?;
                print!("l1 = {:.12}\n{}", s.l1, pretty_print(&s.state));
                if let Some(p) = &out {
                    fs::write(p, unitaries_to_json(&s.unitaries))?;
                }
                s.converged
            };
            if !converged {
                return Err(Failure::NotConverged("evaluation budget exhausted".into()));
            }
            Ok(())
        }
        Command::Zoo { action } => match action {
            ZooAction::List => {
                for (name, about) in zoo::CATALOG {
                    println!("{name:<14} {about}");
                }
                Ok(())
            }
            ZooAction::Emit { name, out } => {
                let s = zoo::by_name(&name)?;
                write_output(out.as_deref(), &state_to_json(&s))
            }
        },
        Command::Analyze { file } => {
            let psi = load_state(file.as_deref(), st.renormalize)?;
            let n = psi.shape().parties();
            let g = best_product_approximation(&psi, &st.seesaw(psi.shape())?)?.g;
            let mut uniformity = serde_json::Map::new();
            let mut spectra = serde_json::Map::new();
            for k in 1..n {
                uniformity.insert(k.to_string(), json!(uniformity_defect(&psi, k)?));
                let mut level = serde_json::Map::new();
                for (subset, values) in marginal_spectra(&psi, k)? {
                    let label: Vec<String> = subset.iter().map(|i| i.to_string()).collect();
                    level.insert(label.join(","), json!(values));
                }
                spectra.insert(k.to_string(), Value::Object(level));
            }
            let (is_ame, mms) = if n >= 2 {
                (geomax::analysis::is_ame(&psi)?, Some(mms_report(&psi)?))
            } else {
                (false, None)
            };
            print!(
                "{}",
                pretty(&json!({
                    "g_estimate": g,
                    "uniformity": uniformity,
                    "spectra": spectra,
                    "is_ame": is_ame,
                    "is_mms": mms.as_ref().map_or(false, |m| m.is_mms),
                    "k_star": mms.as_ref().and_then(|m| m.k_star),
                    "uniform_up_to": mms.as_ref().map_or(0, |m| m.uniform_up_to),
                }))
            );
            Ok(())
        }
        Command::Repro { target } => {
            let table = match target {
                ReproTarget::Table1 => repro::table1()?,
                ReproTarget::Bipartite => repro::bipartite()?,
                ReproTarget::Subspaces => repro::subspaces()?,
                ReproTarget::Qudits => repro::qudits()?,
                ReproTarget::Zoo => {
                    let mut t = repro::zoo_targets()?;
                    t.rows.extend(repro::ame_gap()?.rows);
                    t
                }
                ReproTarget::Extended => repro::extended()?,
            };
            print!("{table}");
            if !table.all_pass() {
                return Err(Failure::NotConverged("some rows missed their targets".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("not converged: {msg}");
            ExitCode::from(2)
        }
    }
}
