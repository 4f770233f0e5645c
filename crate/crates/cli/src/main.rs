use std::fs::File;
use std::io::{self, BufReader, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lcf_core::obstruction::{
    bieberbach_dirac_table, check_bounds_lcf, check_bounds_lcf_sum, lens_eta_signature, lens_record, read_records,
    write_records, EtaValue, LENS_CALIBRATION,
};

mod bundled;
mod checks;
mod config;
mod report;

use checks::{CheckName, ALL_CHECKS};
use config::ScenarioConfig;
use report::{run_scenario, RunOptions};

#[derive(Parser)]
#[command(name = "lcf", version, about = "Curvature, transgression and eta-obstruction checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a scenario file, or `bundled:<name>`.
    Run {
        config: String,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<String>,
        /// Count expected errors as failures.
        #[arg(long)]
        strict: bool,
        /// Leave runtimes out of the report, making it reproducible byte for byte.
        #[arg(long)]
        no_timing: bool,
    },
    /// List bundled scenarios and checks.
    List,
    /// Document a check, or print a bundled scenario as JSON.
    Describe { name: String },
    /// Eta records: lens spaces, the flat-manifold table, verdicts.
    #[command(subcommand)]
    Eta(EtaCommand),
}

#[derive(Subcommand)]
enum EtaCommand {
    /// Eta of the odd signature operator on L(p, q).
    Lens { p: i64, q: i64 },
    /// Export records as JSON lines: the flat-manifold table plus any lens spaces.
    Export {
        /// Lens spaces as `p:q`.
        #[arg(long = "lens")]
        lens: Vec<String>,
        /// Output file (default: standard output).
        #[arg(long)]
        output: Option<String>,
    },
    /// Verdict for every record of a JSON-lines file.
    Check {
        path: String,
        /// Treat all records as components of one boundary.
        #[arg(long)]
        sum: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("lcf: {msg}");
    ExitCode::from(2)
}

fn load_config(spec: &str) -> Result<ScenarioConfig, String> {
    if let Some(name) = spec.strip_prefix("bundled:") {
        return bundled::find(name)
            .map(|b| b.config())
            .ok_or_else(|| format!("no bundled scenario `{name}`"));
    }
    ScenarioConfig::load(spec).map_err(|e| e.to_string())
}

fn run(config: &str, threads: Option<usize>, seed: Option<u64>, report: Option<&str>, strict: bool, timing: bool) -> ExitCode {
    let mut cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(format!("thread pool: {e}"));
        }
    }
    let scenario = match cfg.build() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let rep = run_scenario(
        &scenario,
        RunOptions {
            strict,
            timing,
            threads,
        },
    );
    if let Some(path) = report {
        if let Err(e) = std::fs::write(path, rep.to_json() + "\n") {
            return fail(format!("cannot write report {path}: {e}"));
        }
    }
    print!("{}", rep.text_summary());
    ExitCode::from(rep.exit_code() as u8)
}

fn list() {
    println!("bundled scenarios (run with `lcf run bundled:<name>`):");
    for b in bundled::BUNDLED {
        println!("  {:<30} {}", b.name, b.summary);
    }
    println!("checks:");
    for c in ALL_CHECKS {
        println!("  {:<30} default tolerance {:.0e}", c.name(), c.default_tolerance());
    }
}

fn describe(name: &str) -> ExitCode {
    if let Ok(c) = name.parse::<CheckName>() {
        println!("{}: {}", c.name(), c.describe());
        println!("default tolerance: {:e}", c.default_tolerance());
        return ExitCode::SUCCESS;
    }
    if let Some(b) = bundled::find(name) {
        println!("{}", serde_json::to_string_pretty(&b.config()).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    fail(format!("unknown check or scenario `{name}`"))
}

fn parse_lens(s: &str) -> Result<(i64, i64), String> {
    let (p, q) = s.split_once(':').ok_or_else(|| format!("expected p:q, got `{s}`"))?;
    let p = p.trim().parse().map_err(|_| format!("bad p in `{s}`"))?;
    let q = q.trim().parse().map_err(|_| format!("bad q in `{s}`"))?;
    Ok((p, q))
}

fn eta(cmd: EtaCommand) -> ExitCode {
    match cmd {
        EtaCommand::Lens { p, q } => match lens_eta_signature(p, q) {
            Ok(v) => {
                println!("eta(L({p},{q})) = {v}  [convention-calibrated, c = {LENS_CALIBRATION}]");
                if let EtaValue::Rational { .. } = v {
                    let r = v.as_rational().expect("rational");
                    println!("verdict: {}", check_bounds_lcf(r, 1e-9));
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        EtaCommand::Export { lens, output } => {
            let mut records = bieberbach_dirac_table();
            for s in &lens {
                let rec = parse_lens(s).map_err(|e| e.to_string()).and_then(|(p, q)| lens_record(p, q).map_err(|e| e.to_string()));
                match rec {
                    Ok(r) => records.push(r),
                    Err(e) => return fail(e),
                }
            }
            let result = match output {
                Some(path) => File::create(&path).and_then(|mut f| write_records(&mut f, &records)),
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    write_records(&mut lock, &records).and_then(|_| lock.flush())
                }
            };
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        EtaCommand::Check { path, sum, tol } => {
            let file = match File::open(&path) {
                Ok(f) => f,
                Err(e) => return fail(format!("cannot read {path}: {e}")),
            };
            let records = match read_records(BufReader::new(file)) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            if sum {
                let etas: Vec<_> = records.iter().map(|r| r.eta()).collect();
                let total: num_rational::Rational64 = etas.iter().copied().sum();
                println!("sum of {} components: {total}  {}", records.len(), check_bounds_lcf_sum(&etas, tol));
            } else {
                for r in &records {
                    println!("{:<12} {:<9} {:>8}  {}", r.label, r.kind, r.eta().to_string(), check_bounds_lcf(r.eta(), tol));
                }
            }
            ExitCode::SUCCESS
        }
    }
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
    match cli.command {
        Command::Run {
            config,
            threads,
            seed,
            report,
            strict,
            no_timing,
        } => run(&config, threads, seed, report.as_deref(), strict, !no_timing),
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Describe { name } => describe(&name),
        Command::Eta(cmd) => eta(cmd),
    }
}
