//! `swarmlink` command-line front end.
//!
//! Settings resolve as: command-line flag, then scenario file, then the
//! built-in default.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use swarmlink::composition::{compose, CompositionParams, CompositionPlan, Strategy};
use swarmlink::controller::Controller;
use swarmlink::experiments::{self, ExperimentConfig, ExperimentName};
use swarmlink::output::{csv_string, provenance_line};
use swarmlink::queueing::{delay_rows, DelayMode, LatencyMetric, QueueingConfig, ServiceDistribution, DELAY_HEADER};
use swarmlink::scenario::Scenario;
use swarmlink::selection::{evaluate_plan, SlaSpec, SELECTION_HEADER};
use swarmlink::sim::{simulate, SimConfig};
use swarmlink::workload::{ScenarioScale, SwarmProfile};

/// Exit code when selection finds no feasible composition.
const EXIT_NO_FEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "swarmlink", version, about = "Drone-swarm connectivity composition engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random scenario file for a swarm scale.
    Generate(GenerateArgs),
    /// Build one composition and its per-node delay table.
    Compose(ComposeArgs),
    /// Evaluate every candidate and pick the SLA-optimal one.
    Select(SlaArgs),
    /// Select, then enforce stability and the latency bound when needed.
    Enforce(SlaArgs),
    /// Run the discrete-event simulation of a plan.
    Simulate(SimulateArgs),
    /// Run one of the batch experiments.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Delay formula: paper or standard.
    #[arg(long)]
    mode: Option<DelayMode>,
    /// Cost weight between distance (1) and load (0).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// small, medium, large or reduced_large.
    #[arg(long, default_value = "small")]
    scale: String,
    #[arg(long, default_value_t = 110)]
    devices: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    strategy: Strategy,
}

#[derive(Args)]
struct SlaFlags {
    /// Latency bound in seconds.
    #[arg(long)]
    sla_latency: Option<f64>,
    /// avg or max.
    #[arg(long)]
    sla_metric: Option<LatencyMetric>,
    #[arg(long)]
    rho_max: Option<f64>,
}

#[derive(Args)]
struct SlaArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sla: SlaFlags,
    /// Also try every strategy at each alpha of the grid.
    #[arg(long)]
    alpha_grid: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Plan JSON written by `compose`.
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    warmup: Option<f64>,
    /// deterministic or exponential.
    #[arg(long)]
    distribution: Option<ServiceDistribution>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// exp1, exp2, exp3 or exp4.
    name: String,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sla: SlaFlags,
    /// Scale for exp1-exp3; comma-separated list for exp4.
    #[arg(long, value_delimiter = ',')]
    scale: Vec<String>,
    /// Comma-separated bin values (SLA seconds or device counts).
    #[arg(long, value_delimiter = ',')]
    bins: Vec<f64>,
    #[arg(long)]
    requests: Option<usize>,
    /// Nominal device count for exp1.
    #[arg(long)]
    devices: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

/// Loaded scenario (or defaults) with flags applied.
struct Setup {
    scenario: Scenario,
    seed: u64,
    params: CompositionParams,
    queueing: QueueingConfig,
}

impl Setup {
    fn new(common: &Common, require_scenario: bool) -> Result<Self> {
        let scenario = match &common.scenario {
            Some(p) => Scenario::load(p)?,
            None if require_scenario => bail!("--scenario is required"),
            None => Scenario::default(),
        };
        let seed = common.seed.unwrap_or(scenario.seed);
        let mut params = scenario.composition.clone().unwrap_or_default();
        params.seed = seed;
        if let Some(a) = common.alpha {
            params.weights.alpha = a;
        }
        let mut queueing = scenario.queueing.unwrap_or_default();
        if let Some(m) = common.mode {
            queueing.mode = m;
        }
        Ok(Self {
            scenario,
            seed,
            params,
            queueing,
        })
    }

    fn sla(&self, flags: &SlaFlags) -> Result<SlaSpec> {
        let mut sla = self.scenario.sla.unwrap_or_default();
        if let Some(v) = flags.sla_latency {
            sla.latency_bound = v;
        }
        if let Some(m) = flags.sla_metric {
            sla.metric = m;
        }
        if let Some(r) = flags.rho_max {
            sla.rho_max = r;
        }
        sla.validate()?;
        Ok(sla)
    }

    fn controller(&self, alpha_grid: bool) -> Controller {
        let mut c = Controller::new(self.params.clone(), self.queueing);
        c.alpha_grid = alpha_grid;
        c
    }

    fn provenance(&self, extra: &impl Serialize) -> String {
        provenance_line(
            self.seed,
            &json!({
                "scenario": self.scenario,
                "params": self.params,
                "queueing": self.queueing,
                "extra": extra,
            }),
        )
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn pretty(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn print(value: serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let scale = ScenarioScale::by_name(&args.scale)?;
    let scenario = Scenario::generated(&scale, args.devices, &SwarmProfile::default(), args.seed)?;
    let text = scenario.to_json() + "\n";
    match args.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_compose(args: ComposeArgs) -> Result<u8> {
    let setup = Setup::new(&args.common, true)?;
    let state = setup.scenario.state()?;
    let plan = compose(args.strategy, &state, &setup.params)?;
    let sla = setup.scenario.sla.unwrap_or_default();
    let eval = evaluate_plan(0, plan.clone(), &state, &sla, &setup.queueing);
    let provenance = setup.provenance(&json!({"command": "compose", "strategy": args.strategy}));
    let plan_path = write(&args.common.out_dir, "plan.json", &pretty(&plan)?)?;
    let rows = eval.analysis.as_ref().map(|a| delay_rows(&a.delays)).unwrap_or_default();
    let delays_path = write(
        &args.common.out_dir,
        "delays.csv",
        &csv_string(&provenance, &DELAY_HEADER, &rows),
    )?;
    print(json!({
        "strategy": plan.strategy,
        "alpha": plan.alpha,
        "paths": plan.paths.len(),
        "max_hops": plan.max_hops(),
        "stable": eval.stable(),
        "latency": eval.latency,
        "plan_file": plan_path,
        "delays_file": delays_path,
    }))?;
    Ok(0)
}

fn cmd_select(args: SlaArgs) -> Result<u8> {
    let setup = Setup::new(&args.common, true)?;
    let sla = setup.sla(&args.sla)?;
    let state = setup.scenario.state()?;
    let selection = setup.controller(args.alpha_grid).select(&state, &sla);
    let provenance = setup.provenance(&json!({"command": "select", "sla": sla}));
    let table = write(
        &args.common.out_dir,
        "selection.csv",
        &csv_string(&provenance, &SELECTION_HEADER, &selection.csv_rows()),
    )?;
    match selection.winner() {
        Some(w) => {
            write(&args.common.out_dir, "winner.json", &pretty(w)?)?;
            print(json!({
                "status": "selected",
                "strategy": w.strategy,
                "alpha": w.alpha,
                "latency": w.latency,
                "max_rho": w.max_rho(),
                "table_file": table,
            }))?;
            Ok(0)
        }
        None => {
            print(json!({
                "status": "no_feasible",
                "reasons": selection.table.iter().map(|e| e.reason.as_ref().map(|r| r.to_string())).collect::<Vec<_>>(),
                "table_file": table,
            }))?;
            Ok(EXIT_NO_FEASIBLE)
        }
    }
}

fn cmd_enforce(args: SlaArgs) -> Result<u8> {
    let setup = Setup::new(&args.common, true)?;
    let sla = setup.sla(&args.sla)?;
    let state = setup.scenario.state()?;
    let decision = setup.controller(args.alpha_grid).decide(&state, &sla);
    let decision_file = write(&args.common.out_dir, "decision.json", &pretty(&decision)?)?;
    if let Some(outcome) = &decision.enforcement {
        write(&args.common.out_dir, "enforcement.json", &pretty(outcome)?)?;
    }
    if let Some(plan) = &decision.plan {
        write(&args.common.out_dir, "plan.json", &pretty(plan)?)?;
    }
    let enforcement = decision.enforcement.as_ref();
    print(json!({
        "compliant": decision.compliant,
        "strategy": decision.strategy(),
        "latency": decision.latency(),
        "enforced": enforcement.is_some(),
        "edits": enforcement.map(|o| o.edits.clone()).unwrap_or_default(),
        "scaleout_suggestion": enforcement.and_then(|o| o.scaleout_suggestion.clone()),
        "downgrade_suggestion": enforcement.and_then(|o| o.downgrade_suggestion.clone()),
        "decision_file": decision_file,
    }))?;
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8> {
    let setup = Setup::new(&args.common, true)?;
    let state = setup.scenario.state()?;
    let text = fs::read_to_string(&args.plan).with_context(|| format!("reading {}", args.plan.display()))?;
    let plan: CompositionPlan = serde_json::from_str(&text).context("parsing plan")?;
    let mut config = SimConfig {
        seed: setup.seed,
        ..SimConfig::default()
    };
    if let Some(d) = args.duration {
        config.duration = d;
    }
    if let Some(w) = args.warmup {
        config.warmup = w;
    }
    if let Some(s) = args.distribution {
        config.service_distribution = s;
    }
    let result = simulate(&plan, &state, &setup.queueing, &config)?;
    let provenance = setup.provenance(&json!({"command": "simulate", "sim": config}));
    let rows: Vec<_> = result
        .nodes
        .iter()
        .map(|(id, n)| {
            (
                id.0,
                n.rho,
                n.wait_c.mean(),
                n.wait_d.mean(),
                n.sojourn_c.mean(),
                n.sojourn_d.mean(),
                n.departures.control,
                n.departures.data,
            )
        })
        .collect();
    write(
        &args.common.out_dir,
        "sim_nodes.csv",
        &csv_string(
            &provenance,
            &["drone_id", "rho", "W_c", "W_d", "D_c", "D_d", "served_c", "served_d"],
            &rows,
        ),
    )?;
    let file = write(&args.common.out_dir, "sim.json", &pretty(&result)?)?;
    print(json!({
        "l_avg": result.l_avg,
        "l_max": result.l_max,
        "generated": result.generated,
        "completed": result.completed,
        "result_file": file,
    }))?;
    Ok(0)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<u8> {
    let name: ExperimentName = args.name.parse()?;
    let setup = Setup::new(&args.common, false)?;
    let mut config = ExperimentConfig {
        seed: setup.seed,
        workers: args.workers,
        profile: setup.scenario.profile(),
        ..ExperimentConfig::default()
    };
    config.controller = setup.controller(false);
    if let Some(sla) = setup.scenario.sla {
        config.sla = sla;
    }
    if let Some(v) = args.sla.sla_latency {
        config.sla.latency_bound = v;
    }
    if let Some(m) = args.sla.sla_metric {
        config.sla.metric = m;
    }
    if let Some(r) = args.sla.rho_max {
        config.sla.rho_max = r;
    }
    config.sla.validate()?;
    if !args.bins.is_empty() {
        config.bins = Some(args.bins.clone());
    }
    if let Some(r) = args.requests {
        config.requests_per_bin = r;
    }
    if let Some(d) = args.devices {
        config.device_count = d;
    }
    let scales = args
        .scale
        .iter()
        .map(|s| ScenarioScale::by_name(s))
        .collect::<Result<Vec<_>, _>>()?;
    match (name, scales.len()) {
        (_, 0) => {}
        (ExperimentName::Exp4, _) => config.scales = Some(scales),
        (_, 1) => config.scale = Some(scales[0].clone()),
        _ => return Err(anyhow!("only exp4 accepts several scales")),
    }
    let report = experiments::run(name, &config)?;
    let provenance = provenance_line(config.seed, &config);
    let header: Vec<&str> = report.header.iter().map(String::as_str).collect();
    let csv = write(
        &args.common.out_dir,
        &format!("{name}.csv"),
        &csv_string(&provenance, &header, &report.rows),
    )?;
    let summary = write(
        &args.common.out_dir,
        &format!("{name}_summary.json"),
        &pretty(&report.summary)?,
    )?;
    print(json!({ "experiment": name, "csv_file": csv, "summary_file": summary }))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Compose(a) => cmd_compose(a),
        Command::Select(a) => cmd_select(a),
        Command::Enforce(a) => cmd_enforce(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let body = json!({ "error": e.to_string(), "chain": e.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
