//! `expreuse` command-line front end.
//!
//! Exit status is 0 on success, 1 when the engine or an input file reports an
//! error, and 2 for malformed command lines.

mod artifacts;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use expreuse::backends::{BackendRegistry, ChainModels, FsModels, MemoryModels, ModelResolver};
use expreuse::fixtures::{self, bundled_models};
use expreuse::pipeline::Pipeline;
use expreuse::prov_graph::{export_dot, load_graph, EntityKind, ProvenanceGraph};
use expreuse::rules::{builtin_rules, load_rules, notify, RuleSet, RunReport};

#[derive(Parser)]
#[command(name = "expreuse", version, about = "Reuse simulation experiments along a provenance graph")]
struct Cli {
    /// Base seed for every stochastic run.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for experiment execution (default: all cores).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Provenance graph document.
    #[arg(long)]
    graph: PathBuf,
    /// Rule document; the built-in rules are used when absent.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load a graph and a rule set and summarise them.
    Ingest {
        #[command(flatten)]
        inputs: Inputs,
        /// Write the normalised graph and rule document into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Signal that an activity completed and run the matching rules.
    Notify {
        /// Id of the completed activity; must be the latest in the event log.
        activity: String,
        #[command(flatten)]
        inputs: Inputs,
        /// Directory for the updated graph and result tables (default: update
        /// the graph file in place).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a bundled case study and write every artifact.
    Demo {
        /// One of: migration, wnt, abstract-epi.
        name: String,
        #[arg(long, default_value = "demo-out")]
        out: PathBuf,
        /// Rule document replacing the demo's own rules.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Print a graph as JSON, or as DOT with --dot.
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dot: bool,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.parallel {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("configuring worker threads")?;
    }
    match cli.command {
        Command::Ingest { inputs, out } => ingest(&inputs, out.as_deref()),
        Command::Notify { activity, inputs, out } => cmd_notify(&activity, &inputs, out.as_deref(), cli.seed),
        Command::Demo { name, out, rules } => demo(&name, &out, rules.as_deref(), cli.seed),
        Command::Export { graph, dot, out } => export(&graph, dot, out.as_deref()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(inputs: &Inputs) -> Result<(ProvenanceGraph, RuleSet)> {
    let graph = load_graph(&read(&inputs.graph)?).with_context(|| format!("loading {}", inputs.graph.display()))?;
    let rules = match &inputs.rules {
        Some(p) => load_rules(&read(p)?).with_context(|| format!("loading {}", p.display()))?,
        None => builtin_rules(),
    };
    Ok((graph, rules))
}

fn ingest(inputs: &Inputs, out: Option<&Path>) -> Result<()> {
    let (graph, rules) = load(inputs)?;
    println!("{} entities, {} activities, {} dependencies", graph.entities().len(), graph.activities().len(), graph.deps().len());
    for kind in EntityKind::ALL {
        let n = graph.entities().iter().filter(|e| e.kind == kind).count();
        if n > 0 {
            println!("  {}: {n}", kind.abbrev());
        }
    }
    println!("active rules: {}", rules.active_ids().join(", "));
    if let Some(dir) = out {
        artifacts::write_file(&dir.join("graph.json"), &expreuse::prov_graph::save_graph(&graph))?;
        artifacts::write_file(&dir.join("rules.json"), &serde_json::to_string_pretty(&expreuse::rules::rules_to_value(&rules))?)?;
    }
    Ok(())
}

/// Looks up models next to the graph file first, then among the bundled ones.
struct Models {
    fs: FsModels,
    bundled: MemoryModels,
}

impl ModelResolver for Models {
    fn resolve(&self, path: &str) -> Option<String> {
        ChainModels(vec![&self.fs, &self.bundled]).resolve(path)
    }
}

fn pipeline(root: &Path, extra: MemoryModels, seed: u64) -> Pipeline {
    let mut bundled = bundled_models();
    bundled.0.extend(extra.0);
    let models = Models { fs: FsModels { root: root.to_path_buf() }, bundled };
    Pipeline::new(BackendRegistry::with_builtins(), Box::new(models), seed)
}

fn cmd_notify(activity: &str, inputs: &Inputs, out: Option<&Path>, seed: u64) -> Result<()> {
    let (mut graph, rules) = load(inputs)?;
    let root = inputs.graph.parent().map(Path::to_path_buf).unwrap_or_default();
    let hooks = pipeline(&root, MemoryModels::default(), seed);
    let report = notify(&mut graph, &rules, activity, &hooks)?;
    print_report(&report);
    let (graph_path, dir) = match out {
        Some(d) => (d.join("graph.json"), d.to_path_buf()),
        None => (inputs.graph.clone(), root),
    };
    artifacts::write_file(&graph_path, &expreuse::prov_graph::save_graph(&graph))?;
    artifacts::write_tables(&dir, &report)?;
    Ok(())
}

fn demo(name: &str, out: &Path, rules: Option<&Path>, seed: u64) -> Result<()> {
    let mut fx = fixtures::fixture(name)
        .ok_or_else(|| anyhow!("unknown demo `{name}` (expected one of: {})", fixtures::DEMOS.join(", ")))?;
    if let Some(p) = rules {
        fx.rules = load_rules(&read(p)?).with_context(|| format!("loading {}", p.display()))?;
    }
    let hooks = pipeline(out, fx.models.clone(), seed);
    let (graph, report) = fixtures::run_demo(&fx, &hooks)?;
    print_report(&report);
    artifacts::write_demo(out, &graph, &report)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn export(graph: &Path, dot: bool, out: Option<&Path>) -> Result<()> {
    let g = load_graph(&read(graph)?).with_context(|| format!("loading {}", graph.display()))?;
    let text = if dot { export_dot(&g) } else { expreuse::prov_graph::save_graph(&g) };
    match out {
        Some(p) => artifacts::write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_report(report: &RunReport) {
    use expreuse::rules::OutcomeKind;
    if report.is_empty() {
        println!("no rule fired");
        return;
    }
    for round in &report.rounds {
        for o in &round.outcomes {
            let what = match &o.outcome {
                OutcomeKind::Generated => format!(
                    "generated {} [{}{}]",
                    o.generated_ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", "),
                    o.backend.as_deref().unwrap_or("-"),
                    o.exec_status.as_deref().map(|s| format!(", {s}")).unwrap_or_default()
                ),
                OutcomeKind::SkippedDuplicate { existing } => format!("skipped, already done by {existing}"),
                OutcomeKind::CascadeFiltered => "skipped, superseded by a later reuse".to_string(),
                OutcomeKind::Aborted { stage, reason } => format!("aborted in {stage}: {reason}"),
            };
            println!("{} at {}: reuse {} from {}: {what}", o.rule_id, o.trigger_activity, o.reused_experiment, o.experiment_activity);
        }
        for w in &round.warnings {
            println!("warning: {w}");
        }
    }
}

