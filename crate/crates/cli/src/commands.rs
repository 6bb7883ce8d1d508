//! Subcommand definitions and their implementations.

use std::fmt::Write;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rewardrig_core::constructions::{self, Construction};
use rewardrig_core::rational::{format, to_f64};
use rewardrig_core::value::solve_optimal;
use rewardrig_core::{Error as CoreError, Scenario};
use rewardrig_gridworld::oracle::{best_candidate, exact_policy_values};
use rewardrig_gridworld::{aggregate_runs, lookup, GridModel, PriorTag, QConfig, RunStats};
use serde_json::Value;

use crate::bundle;
use crate::chart::{self, Curve};
use crate::error::{CliError, Result};
use crate::report::{self, Labeller};
use crate::scenario_file::{self, parse_policy_flag};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "REWARD_RIG_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "reward-rig",
    version,
    about = "Classify reward-function learning processes, run corrective constructions and reproduce the gridworld experiment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a scenario as riggable, unriggable but influenceable, or uninfluenceable.
    Classify(ClassifyArgs),
    /// Run a construction on a scenario and verify its output exactly.
    Construct(ConstructArgs),
    /// Train Q-learning agents in the gridworld and report their learning curves.
    Experiment(ExperimentArgs),
    /// Optimal policy and value of a scenario's learning process.
    Solve(SolveArgs),
    /// Exact values of the gridworld's candidate policies.
    Oracle(OracleArgs),
    /// List or export the bundled scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenariosAction,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Scenario file, or the name of a bundled scenario.
    pub path: PathBuf,
    /// Print the result document instead of the summary.
    #[arg(long)]
    pub json: bool,
    /// Also write the result document here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// One of: counterfactual, unriggable, uninfluenceable, sacrifice.
    pub kind: String,
    pub path: PathBuf,
    /// Default policy: one action, or an action sequence such as "E E E".
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub json: bool,
    /// Write the result document, including the constructed scenario, here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AgentChoice {
    Standard,
    Counterfactual,
    Both,
}

impl AgentChoice {
    pub fn rules(self) -> &'static [&'static str] {
        match self {
            AgentChoice::Standard => &["standard"],
            AgentChoice::Counterfactual => &["counterfactual"],
            AgentChoice::Both => &["counterfactual", "standard"],
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// BD, DD, half or correlated.
    #[arg(long)]
    pub prior: PriorTag,
    #[arg(long, value_enum, default_value = "both")]
    pub agent: AgentChoice,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub episodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-episode means and standard deviations, one block per agent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Learning-curve chart with one-standard-deviation bands.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Restrict to one prior.
    #[arg(long)]
    pub prior: Option<PriorTag>,
}

#[derive(Debug, Subcommand)]
pub enum ScenariosAction {
    List,
    /// Print (or write) a bundled scenario file.
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Text for stdout and whether the command succeeded.
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, success: true }
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Classify(args) => classify(&args),
        Command::Construct(args) => construct(&args),
        Command::Experiment(args) => experiment(&args),
        Command::Solve(args) => solve(&args),
        Command::Oracle(args) => oracle(&args),
        Command::Scenarios { action } => scenarios(action),
    }
}

/// Reads a scenario file; a bare name that is not a file falls back to the bundle.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == ErrorKind::NotFound && path.components().count() == 1 => {
            match path.to_str().and_then(bundle::get) {
                Some(text) => text.to_string(),
                None => return Err(CliError::io("read", path, e)),
            }
        }
        Err(e) => return Err(CliError::io("read", path, e)),
    };
    let file = scenario_file::from_json(&text).map_err(|e| CliError::parse(path, e))?;
    file.to_scenario().map_err(|e| CliError::parse(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io("write", path, e))
}

fn pretty(doc: &Value) -> String {
    serde_json::to_string_pretty(doc).expect("JSON values serialize") + "\n"
}

fn classify(args: &ClassifyArgs) -> Result<Outcome> {
    let sc = load_scenario(&args.path)?;
    let c = report::classify(&sc)?;
    let doc = report::classification_json(&sc, &c);
    if let Some(out) = &args.out {
        write_file(out, &pretty(&doc))?;
    }
    let text = if args.json {
        pretty(&doc)
    } else {
        report::classification_text(&sc, &c)
    };
    Ok(Outcome::ok(text))
}

fn construction(kind: &str) -> Result<&'static dyn Construction> {
    constructions::lookup(kind).ok_or_else(|| {
        let known: Vec<&str> = constructions::registry().iter().map(|c| c.name()).collect();
        CliError::Usage(format!(
            "unknown construction `{kind}` (expected one of {})",
            known.join(", ")
        ))
    })
}

fn construct(args: &ConstructArgs) -> Result<Outcome> {
    let kind = construction(&args.kind)?;
    let sc = load_scenario(&args.path)?;
    let policy = match &args.policy {
        None => None,
        Some(_) if !kind.uses_policy() => {
            return Err(CliError::Usage(format!(
                "construction `{}` takes no policy",
                kind.name()
            )))
        }
        Some(text) => Some(parse_policy_flag(sc.spec(), text).map_err(|e| CliError::Usage(format!("--policy: {e}")))?),
    };
    let result = match kind.run(&sc, policy.as_ref()) {
        Ok(r) => r,
        Err(CoreError::Riggable(w)) => {
            let labeller = Labeller::new(sc.process.pool());
            return Err(CliError::Failed(format!(
                "`{}` needs an unriggable input, but {} is riggable; {}",
                kind.name(),
                sc.name,
                report::witness_text(&w, &labeller)
            )));
        }
        Err(CoreError::Unriggable(detail)) => {
            return Err(CliError::Failed(format!(
                "`{}` needs a riggable input, but {} is unriggable; {detail}",
                kind.name(),
                sc.name
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let output = report::constructed_scenario(&sc, &result)?;
    let doc = report::construction_json(&sc, &result, output.as_ref())?;
    if let Some(out) = &args.out {
        write_file(out, &pretty(&doc))?;
    }
    let text = if args.json {
        pretty(&doc)
    } else {
        report::construction_text(&sc, &result, output.as_ref())?
    };
    Ok(Outcome {
        text,
        success: result.passed(),
    })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start worker threads: {e}")))
}

/// CSV with one block of rows per agent.
pub fn experiment_csv(results: &[(&str, RunStats)]) -> String {
    let mut csv = String::from("agent,episode,nominal_mean,nominal_std,true_mean,true_std\n");
    for (agent, stats) in results {
        for i in 0..stats.episodes() {
            let _ = writeln!(
                csv,
                "{agent},{},{:.6},{:.6},{:.6},{:.6}",
                i + 1,
                stats.nominal.mean[i],
                stats.nominal.std[i],
                stats.truth.mean[i],
                stats.truth.std[i]
            );
        }
    }
    csv
}

fn agent_color(agent: &str) -> &'static str {
    if agent == "counterfactual" {
        "#d62728"
    } else {
        "#1f77b4"
    }
}

pub fn experiment_svg(prior: PriorTag, runs: u64, results: &[(&str, RunStats)]) -> String {
    let mut curves = Vec::new();
    for (agent, stats) in results {
        curves.push(Curve {
            label: format!("{agent} (nominal)"),
            color: agent_color(agent),
            dashed: false,
            stats: &stats.nominal,
        });
        curves.push(Curve {
            label: format!("{agent} (true reward)"),
            color: agent_color(agent),
            dashed: true,
            stats: &stats.truth,
        });
    }
    chart::render(&format!("Prior {prior}: mean of {runs} runs, one-std bands"), &curves)
}

fn experiment(args: &ExperimentArgs) -> Result<Outcome> {
    let runs = usize::try_from(args.runs).map_err(|_| CliError::Usage("--runs is too large".into()))?;
    let episodes = usize::try_from(args.episodes).map_err(|_| CliError::Usage("--episodes is too large".into()))?;
    let pool = thread_pool()?;
    // Fail on unwritable outputs before spending minutes on training.
    for path in [&args.csv, &args.svg].into_iter().flatten() {
        fs::File::create(path).map_err(|e| CliError::io("create", path, e))?;
    }
    let config = QConfig::default();
    let mut results = Vec::new();
    let mut text = format!(
        "prior {}, {} run(s) x {} episodes, seed {}\n",
        args.prior, runs, episodes, args.seed
    );
    for &agent in args.agent.rules() {
        let rule = lookup(agent)?;
        let model = GridModel::new(rule, args.prior)?;
        let stats = pool.install(|| aggregate_runs(&model, &config, runs, episodes, args.seed))?;
        let target = best_candidate(rule, args.prior)?;
        let _ = writeln!(
            text,
            "{agent}: converged nominal {:.3} (exact {} = {}), true {:.3} (exact {}); optimum: {}",
            stats.converged_nominal(),
            format(&target.nominal),
            to_f64(&target.nominal),
            stats.converged_truth(),
            format(&target.truth),
            target.candidate,
        );
        results.push((agent, stats));
    }
    if let Some(path) = &args.csv {
        write_file(path, &experiment_csv(&results))?;
    }
    if let Some(path) = &args.svg {
        write_file(path, &experiment_svg(args.prior, args.runs, &results))?;
    }
    Ok(Outcome::ok(text))
}

fn solve(args: &SolveArgs) -> Result<Outcome> {
    let sc = load_scenario(&args.path)?;
    let sol = solve_optimal(&sc.process, &sc.prior)?;
    let mut text = format!("{}: optimal value {}\n", sc.name, format(sol.root_value()));
    text.push_str("optimal policy:\n");
    for (h, a) in scenario_file::policy_table(&sol.policy) {
        let h = if h == scenario_file::DEFAULT_KEY {
            "every history".to_string()
        } else if h.is_empty() {
            "h0".to_string()
        } else {
            h
        };
        let a = a.as_str().map(str::to_string).unwrap_or_else(|| a.to_string());
        let _ = writeln!(text, "  {h} -> {a}");
    }
    Ok(Outcome::ok(text))
}

fn oracle(args: &OracleArgs) -> Result<Outcome> {
    let priors: Vec<PriorTag> = match args.prior {
        Some(p) => vec![p],
        None => PriorTag::ALL.to_vec(),
    };
    let mut text = String::new();
    for prior in priors {
        let _ = writeln!(text, "prior {prior}");
        for agent in AgentChoice::Both.rules() {
            let rule = lookup(agent)?;
            let best = best_candidate(rule, prior)?;
            let _ = writeln!(text, "  {agent}");
            for v in exact_policy_values(rule, prior)? {
                let mark = if v.candidate == best.candidate { "*" } else { " " };
                let _ = writeln!(
                    text,
                    "   {mark} {:<22} nominal {:>6}  true {:>6}",
                    v.candidate.name(),
                    format(&v.nominal),
                    format(&v.truth)
                );
            }
        }
    }
    Ok(Outcome::ok(text))
}

fn scenarios(action: ScenariosAction) -> Result<Outcome> {
    match action {
        ScenariosAction::List => {
            let mut text = String::new();
            for name in bundle::names() {
                let _ = writeln!(text, "{name}");
            }
            Ok(Outcome::ok(text))
        }
        ScenariosAction::Export { name, out } => {
            let json =
                bundle::get(&name).ok_or_else(|| CliError::Usage(format!("no bundled scenario named `{name}`")))?;
            match out {
                Some(path) => {
                    write_file(&path, json)?;
                    Ok(Outcome::ok(String::new()))
                }
                None => Ok(Outcome::ok(json.to_string())),
            }
        }
    }
}
