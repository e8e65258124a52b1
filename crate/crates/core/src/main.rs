use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use relform::cli::{calibrate, prepare, run_suite, status, write_report, CliError, RunConfig, Suite};

/// Verification suites for truncated-kernel asymptotics.
#[derive(Parser, Debug)]
#[command(name = "relform", version)]
struct Args {
    /// asymptotics, periods, geometry, kernel, trace-formula, all, or calibrate
    suite: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Overrides `n_max` from the config.
    #[arg(long)]
    nmax: Option<u32>,
    /// Allow `calibrate` to replace existing constants.
    #[arg(long)]
    force_calibrate: bool,
}

fn run(args: &Args) -> Result<i32, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(n) = args.nmax {
        cfg.n_max = n;
    }
    if args.suite == "calibrate" {
        let fc = calibrate(&cfg, &args.out, args.force_calibrate)?;
        println!(
            "calibrated at anchor slope {}: formal_degree = {}, split c0 = {}",
            fc.anchor_slope, fc.formal_degree, fc.split_c0
        );
        return Ok(status::OK);
    }
    let suites = Suite::parse(&args.suite)
        .ok_or_else(|| CliError::Usage(format!("unknown suite {:?}", args.suite)))?;
    let resolved = prepare(&cfg, &args.out)?;
    let mut code = status::OK;
    for s in suites {
        let report = run_suite(s, &resolved)?;
        write_report(&report, &resolved.hash, &args.out)?;
        let verdict = if report.passed() { "ok" } else { "FAILED" };
        println!("{}: {verdict} ({} checks)", s.name(), report.checks.len());
        for c in report.failures() {
            eprintln!("  failing: {} ({})", c.name, c.detail);
            code = status::FAILED;
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { status::USAGE } else { status::OK };
            return ExitCode::from(code as u8);
        }
    };
    if let Some(n) = std::env::var("RELFORM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let code = match run(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("relform: {e}");
            e.status()
        }
    };
    ExitCode::from(code as u8)
}
