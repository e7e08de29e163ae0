//! rauzylab: Rauzy induction for non-classical interval exchanges.
//!
//! Subcommands: `diagram` (reduced diagram with sinks, DOT/JSON), `orbit`
//! (JSONL expansion trace), `example` (the packaged four-band worked
//! example verifier), and `experiments` (the Monte Carlo gate suite).
//!
//! Exit codes: 0 success, 1 gate or assertion failure, 2 invalid type,
//! 3 inadmissible widths.

mod experiments;

use clap::{Args, Parser, Subcommand};
use rauzylab_core::combinatorics::{GeneralizedPermutation, WidthVector};
use rauzylab_core::diagram::RauzyDiagram;
use rauzylab_core::expansion::{run, DetectorConfig};
use rauzylab_core::four_band;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_GATE: u8 = 1;
const EXIT_TYPE: u8 = 2;
const EXIT_WIDTHS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rauzylab",
    version,
    about = "Rauzy induction for non-classical interval exchanges"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the reduced diagram of a type and export DOT/JSON with sinks.
    Diagram(DiagramArgs),
    /// Run one expansion orbit and stream a JSONL detector trace.
    Orbit(OrbitArgs),
    /// Verify the built-in four-band example family against its closed forms.
    Example(ExampleArgs),
    /// Run the Monte Carlo experiment suite and write CSV/JSON reports.
    Experiments(ExperimentsArgs),
}

#[derive(Args)]
struct DiagramArgs {
    /// Combinatorial type: inline JSON {"d":..,"top":[..],"bottom":[..]} or a file path.
    #[arg(long = "type", value_name = "JSON|FILE")]
    type_spec: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Formats to write (dot, json).
    #[arg(long, value_delimiter = ',', default_values = ["dot", "json"])]
    format: Vec<String>,
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long = "type", value_name = "JSON|FILE")]
    type_spec: String,
    /// Comma-separated exact widths, e.g. "10/17,7/17".
    #[arg(long, value_delimiter = ',')]
    widths: Vec<String>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Detector thresholds.
    #[arg(long = "c-thresholds", value_delimiter = ',', default_values_t = [2u32, 4, 8])]
    c_thresholds: Vec<u32>,
    /// Output directory; the trace goes to <out>/trace.jsonl.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExampleArgs {
    /// Smallest family parameter to verify.
    #[arg(long = "n-min", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    n_min: u32,
    /// Largest family parameter to verify.
    #[arg(long = "n-max", default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    n_max: u32,
}

#[derive(Args)]
struct ExperimentsArgs {
    /// Combinatorial type; defaults to the classical two-band exchange.
    #[arg(long = "type", value_name = "JSON|FILE")]
    type_spec: Option<String>,
    /// Seed; falls back to RAUZYLAB_SEED, then 7.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "n-samples", default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    n_samples: u64,
    #[arg(long = "max-steps", default_value_t = 2_000)]
    max_steps: usize,
    #[arg(long = "c-thresholds", value_delimiter = ',', default_values_t = [2u32, 4, 8])]
    c_thresholds: Vec<u32>,
    /// Sequence length for the normality coverage gate.
    #[arg(short = 'k', long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Diagram(args) => cmd_diagram(args),
        Command::Orbit(args) => cmd_orbit(args),
        Command::Example(args) => cmd_example(args),
        Command::Experiments(args) => cmd_experiments(args),
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn gate(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_GATE,
            message: message.into(),
        }
    }

    fn invalid_type(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_TYPE,
            message: message.into(),
        }
    }

    fn widths(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_WIDTHS,
            message: message.into(),
        }
    }
}

fn load_type(spec: &str) -> Result<GeneralizedPermutation, CliError> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec)
            .map_err(|e| CliError::invalid_type(format!("cannot read {spec}: {e}")))?
    };
    let pi: GeneralizedPermutation = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid_type(format!("bad type JSON: {e}")))?;
    let report = pi.validate();
    if !report.is_valid() {
        let details: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::invalid_type(format!(
            "invalid type: {}",
            details.join("; ")
        )));
    }
    Ok(pi)
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("RAUZYLAB_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(7)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::gate(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::gate(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_diagram(args: DiagramArgs) -> Result<(), CliError> {
    let pi = load_type(&args.type_spec)?;
    let g = RauzyDiagram::build(&pi);
    if args.format.iter().any(|f| f == "dot") {
        write_file(&args.out, "diagram.dot", &g.to_dot())?;
    }
    if args.format.iter().any(|f| f == "json") {
        let json = serde_json::to_string_pretty(&g.to_json()).unwrap();
        write_file(&args.out, "diagram.json", &(json + "\n"))?;
        let sinks = serde_json::json!({ "sinks": g.sinks });
        write_file(
            &args.out,
            "sinks.json",
            &(serde_json::to_string_pretty(&sinks).unwrap() + "\n"),
        )?;
    }
    println!(
        "diagram: {} nodes, {} edges, {} sink(s)",
        g.node_count(),
        g.edge_count(),
        g.sinks.len()
    );
    Ok(())
}

fn cmd_orbit(args: OrbitArgs) -> Result<(), CliError> {
    let pi = load_type(&args.type_spec)?;
    let entries = args
        .widths
        .iter()
        .map(|s| rauzylab_core::numeric::parse_rational(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::widths)?;
    let widths = WidthVector::new(entries);
    if widths.d() != pi.d() {
        return Err(CliError::widths(format!(
            "{} widths given for {} bands",
            widths.d(),
            pi.d()
        )));
    }
    if !widths.all_positive() {
        return Err(CliError::widths("widths must be strictly positive"));
    }
    if !widths.is_normalized() {
        return Err(CliError::widths("widths must sum to 1"));
    }
    if !widths.satisfies_switch(&pi) {
        return Err(CliError::widths(
            "widths violate the switch condition: reversing totals differ",
        ));
    }

    let g = RauzyDiagram::build(&pi);
    let config = DetectorConfig {
        c_values: args.c_thresholds.clone(),
        compute_diameter: true,
    };
    let trace = run(&pi, &widths, args.steps, &config);

    let mut out = String::new();
    let header = serde_json::json!({
        "config": {
            "type": pi,
            "widths": widths,
            "steps": args.steps,
            "c_thresholds": args.c_thresholds,
        }
    });
    out.push_str(&header.to_string());
    out.push('\n');
    let mut current = pi.clone();
    for (i, rec) in trace.records.iter().enumerate() {
        let report = &trace.reports[i + 1];
        current = current
            .split_with_winner(rec.winner_side)
            .expect("recorded split replays")
            .permutation;
        let node = g.node_id(&current).expect("orbit stays in the diagram");
        let line = serde_json::json!({
            "n": i + 1,
            "winner": rec.winner.0,
            "loser": rec.loser.0,
            "type_id": node,
            "column_ratio": report.column_ratio,
            "vertex_ratio": report.vertex_ratio,
            "diameter": report.diameter,
            "flags": report.flags,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    if let Some(halt) = trace.halt {
        let line = serde_json::json!({
            "n": trace.records.len(),
            "halt": halt,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    write_file(&args.out, "trace.jsonl", &out)?;
    println!("orbit: {} steps, halt: {:?}", trace.records.len(), trace.halt);
    Ok(())
}

fn cmd_example(args: ExampleArgs) -> Result<(), CliError> {
    if args.n_min > args.n_max {
        return Err(CliError::invalid_type("n-min exceeds n-max"));
    }
    for n in args.n_min..=args.n_max {
        let report = four_band::verify(n as usize)
            .map_err(|e| CliError::gate(format!("geometry failure at n = {n}: {e}")))?;
        if let Some(fail) = report.first_failure() {
            return Err(CliError::gate(format!(
                "n = {n}: {} mismatch: expected {}, got {}",
                fail.name, fail.expected, fail.actual
            )));
        }
        let p = four_band::expected_split_probability(n as usize);
        println!(
            "n = {n}: all {} checks pass (split probability {})",
            report.checks.len(),
            rauzylab_core::numeric::format_rational(&p)
        );
    }
    println!(
        "example family verified for n in {}..={}",
        args.n_min, args.n_max
    );
    Ok(())
}

fn cmd_experiments(args: ExperimentsArgs) -> Result<(), CliError> {
    let pi = match &args.type_spec {
        Some(spec) => load_type(spec)?,
        None => GeneralizedPermutation::from_rows(vec![1, 2], vec![2, 1]),
    };
    let seed = resolve_seed(args.seed);
    let outcome = experiments::run_suite(
        &pi,
        seed,
        args.n_samples as usize,
        args.max_steps,
        &args.c_thresholds,
        args.k,
    )
    .map_err(CliError::gate)?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::gate(format!("cannot create {}: {e}", args.out.display())))?;
    for (name, contents) in &outcome.files {
        let path = args.out.join(name);
        let mut f = fs::File::create(&path)
            .map_err(|e| CliError::gate(format!("cannot write {}: {e}", path.display())))?;
        f.write_all(contents.as_bytes())
            .map_err(|e| CliError::gate(e.to_string()))?;
        println!("wrote {}", path.display());
    }
    let mut pass = true;
    for gate in &outcome.gates {
        println!(
            "{} {}: {}",
            if gate.pass { "PASS" } else { "FAIL" },
            gate.name,
            gate.details
        );
        pass &= gate.pass;
    }
    if !pass {
        return Err(CliError::gate("one or more experiment gates failed"));
    }
    Ok(())
}
