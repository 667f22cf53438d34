use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pop_core::mining::retain_progressive;
use pop_core::ChainState;
use pop_scenarios::config::parse_override;
use pop_scenarios::{
    corrupted_retain, default_config, lookup, run_named, run_theorem_checks, ScenarioError, ScenarioOutput, TheoremConfig, SCENARIOS,
};
use rayon::prelude::*;

const OK: u8 = 0;
const VIOLATION: u8 = 1;
const USAGE: u8 = 2;
const RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "pop-sim", version, about = "Proof-of-Prestige simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, or all of them, and write CSV plus a summary.
    Run(RunArgs),
    /// Randomized checks of the split and conservation guarantees.
    Check(CheckArgs),
    /// Advance a chain snapshot by some blocks.
    Step(StepArgs),
    /// List scenarios, or print one scenario's default config as TOML.
    List {
        #[arg(long, value_name = "SCENARIO")]
        config: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario name; see `list`.
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    scenario: Option<String>,
    /// Run every scenario in parallel.
    #[arg(long)]
    all: bool,
    /// TOML config file layered over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ignored by scenarios that use no randomness.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Config override, `key=value`; dotted keys reach into tables and arrays.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Fraction of the full audience and budget (bbc).
    #[arg(long)]
    scale: Option<f64>,
    /// simple, progressive or both.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Swap in a broken retain rule; the checks must then fail.
    #[arg(long, hide = true)]
    corrupt_retain: bool,
}

#[derive(Args)]
struct StepArgs {
    state_file: PathBuf,
    #[arg(long, default_value_t = 1)]
    blocks: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Check(a) => cmd_check(a),
        Command::Step(a) => cmd_step(a),
        Command::List { config: Some(name) } => match default_config(&name) {
            Ok(text) => {
                print!("{text}");
                OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                USAGE
            }
        },
        Command::List { config: None } => {
            for s in SCENARIOS {
                println!("{:<10} {}", s.name, s.description);
            }
            OK
        }
    };
    ExitCode::from(code)
}

fn error_code(e: &ScenarioError) -> u8 {
    if e.is_usage() {
        USAGE
    } else {
        RUNTIME
    }
}

fn write_output(dir: &Path, out: &ScenarioOutput) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in out.files() {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> u8 {
    let names: Vec<&str> = match &a.scenario {
        Some(n) => match lookup(n) {
            Ok(s) => vec![s.name],
            Err(e) => {
                eprintln!("error: {e}");
                return USAGE;
            }
        },
        None => SCENARIOS.iter().map(|s| s.name).collect(),
    };
    let file = match &a.config {
        Some(p) => match fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return USAGE;
            }
        },
        None => None,
    };
    let mut base = Vec::new();
    for raw in &a.set {
        match parse_override(raw) {
            Ok(kv) => base.push(kv),
            Err(e) => {
                eprintln!("error: {e}");
                return USAGE;
            }
        }
    }

    // per-scenario override lists; flags a single scenario cannot take are errors
    let mut jobs = Vec::new();
    for name in names {
        let info = lookup(name).expect("registered");
        let mut ov = Vec::new();
        if let (Some(seed), true) = (a.seed, info.seeded) {
            ov.push(("seed".to_string(), seed.to_string()));
        }
        for (flag, value, takes) in [("mode", a.mode.clone(), info.moded), ("scale", a.scale.map(|s| s.to_string()), info.scaled)] {
            match (value, takes) {
                (Some(v), true) => ov.push((flag.to_string(), v)),
                (Some(_), false) if !a.all => {
                    eprintln!("error: scenario {name} has no --{flag}");
                    return USAGE;
                }
                _ => {}
            }
        }
        ov.extend(base.iter().cloned());
        jobs.push((name, ov));
    }

    let results: Vec<(&str, Result<ScenarioOutput, ScenarioError>)> = jobs
        .par_iter()
        .map(|(name, ov)| (*name, run_named(name, file.as_deref(), ov)))
        .collect();

    let mut code = OK;
    for (name, res) in results {
        match res {
            Ok(out) => {
                if let Err(e) = write_output(&a.out, &out) {
                    eprintln!("error: writing {name} output to {}: {e}", a.out.display());
                    code = code.max(RUNTIME);
                    continue;
                }
                let verdict = if out.summary.all_passed() { "ok" } else { "FAILED" };
                println!("{name}: {verdict}");
                for f in out.summary.failed() {
                    println!("  failed check: {f}");
                }
                if !out.summary.all_passed() {
                    code = code.max(VIOLATION);
                }
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                code = code.max(error_code(&e));
            }
        }
    }
    code
}

fn cmd_check(a: CheckArgs) -> u8 {
    let cfg = TheoremConfig {
        seed: a.seed,
        trials: a.trials,
        ..TheoremConfig::default()
    };
    let retain = if a.corrupt_retain { corrupted_retain } else { retain_progressive };
    match run_theorem_checks(&cfg, retain) {
        Ok(report) => {
            for r in &report.results {
                println!(
                    "{:<18} {:>6} samples  max violation {:e}  tolerance {:e}  {}",
                    r.name,
                    r.samples,
                    r.max_violation,
                    r.tolerance,
                    if r.passed { "pass" } else { "FAIL" }
                );
            }
            if report.all_passed() {
                OK
            } else {
                VIOLATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn cmd_step(a: StepArgs) -> u8 {
    let text = match fs::read_to_string(&a.state_file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", a.state_file.display());
            return USAGE;
        }
    };
    let mut chain = match ChainState::from_snapshot(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", a.state_file.display());
            return USAGE;
        }
    };
    let mut log = String::from("height,minter,transfers,fees,subsidy,motivator_payout,total_prestige,total_coins\n");
    for _ in 0..a.blocks {
        match chain.advance_block() {
            Ok(b) => log.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                b.height,
                b.minter,
                b.processed.len(),
                b.fees_collected,
                b.subsidy,
                b.motivator_payout,
                chain.total_prestige(),
                chain.total_coins()
            )),
            Err(e) => {
                eprintln!("error: block {}: {e}", chain.height() + 1);
                return RUNTIME;
            }
        }
    }
    let written = fs::create_dir_all(&a.out)
        .and_then(|_| fs::write(a.out.join("state.txt"), chain.to_snapshot()))
        .and_then(|_| fs::write(a.out.join("blocks.csv"), log));
    if let Err(e) = written {
        eprintln!("error: writing to {}: {e}", a.out.display());
        return RUNTIME;
    }
    println!("height {} after {} blocks", chain.height(), a.blocks);
    OK
}
