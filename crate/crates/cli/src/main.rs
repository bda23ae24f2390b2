use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use traceai::cegar::{verify, Verdict, VerifyConfig, VerifyOutcome};
use traceai::domains::DomainKind;
use traceai::frontend::compile;
use traceai::harness::{all_settings, run_bench, BenchOptions, Setting};
use traceai::par::with_threads;

#[derive(Parser)]
#[command(
    name = "traceai",
    version,
    about = "Trace abstraction refined by abstract interpretation of path programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one program.
    Verify(VerifyArgs),
    /// Run every `.imp` file of a directory under a list of settings.
    Bench(BenchArgs),
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// interval, octagon, congruence or comp
    #[arg(long, default_value = "interval")]
    domain: String,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value = "true")]
    enhance: bool,
    /// Plain trace abstraction without abstract interpretation.
    #[arg(long)]
    no_ai: bool,
    #[arg(long, default_value_t = 3)]
    widen_delay: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    disjuncts: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    /// Seconds.
    #[arg(long, default_value_t = 90.0)]
    timeout: f64,
    #[arg(long, default_value_t = traceai::linsolve::DEFAULT_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    solver_budget: u64,
    /// Build path programs from every edge carrying a trace statement.
    #[arg(long)]
    pp_by_label: bool,
    /// Write statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the final data automaton as DOT into this directory.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the counterexample of an UNSAFE verdict.
    #[arg(long)]
    cex: Option<PathBuf>,
    /// Worker threads for batched Hoare checks; 0 means one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    /// Comma separated; `ta`, `<domain>` or `<domain>-plain`. Defaults to all nine.
    #[arg(long)]
    settings: Option<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seconds per sample.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Re-check every produced automaton.
    #[arg(long)]
    audit: bool,
    /// Write the per-sample CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the per-setting summary CSV here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Write the sorted series CSV here.
    #[arg(long)]
    series: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn seconds(s: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(s)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| format!("invalid timeout {s}"))
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, String> {
    let src = std::fs::read_to_string(&a.file).map_err(|e| format!("{}: {e}", a.file.display()))?;
    let program = compile(&src).map_err(|e| format!("{}:{e}", a.file.display()))?;
    let domain: DomainKind = a.domain.parse().map_err(|e| format!("{e}"))?;
    let cfg = VerifyConfig {
        domain: (!a.no_ai).then_some(domain),
        enhance: a.enhance,
        widen_delay: a.widen_delay,
        disjuncts: a.disjuncts as usize,
        max_iter: a.max_iter as usize,
        timeout: seconds(a.timeout)?,
        solver_budget: a.solver_budget as usize,
        pp_by_label: a.pp_by_label,
        ..VerifyConfig::default()
    };
    let jobs = match a.jobs {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    };
    let out = with_threads(jobs, || verify(&program, &cfg));
    println!("{} {}", out.verdict.name(), a.file.display());
    if let Verdict::Unknown(r) = &out.verdict {
        eprintln!("reason: {r}");
    }
    if let Some(path) = &a.stats {
        write(path, &stats_json(&out))?;
    }
    if let Some(dir) = &a.dot {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let stem = a
            .file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "program".into());
        let alphabet = program.alphabet();
        write(
            &dir.join(format!("{stem}.dot")),
            &out.automaton.to_dot(Some(&alphabet)),
        )?;
    }
    if let (Some(path), Verdict::Unsafe(cex)) = (&a.cex, &out.verdict) {
        let mut text = String::new();
        for (i, st) in cex.trace.iter().enumerate() {
            text.push_str(&format!("{}\n{st}\n", cex.execution.states[i]));
        }
        text.push_str(&format!("{}\n", cex.execution.states[cex.trace.len()]));
        write(path, &text)?;
    }
    Ok(match out.verdict {
        Verdict::Safe => 0,
        Verdict::Unsafe(_) => 1,
        Verdict::Unknown(_) => 2,
    })
}

fn stats_json(out: &VerifyOutcome) -> String {
    let mut v = serde_json::to_value(&out.stats).unwrap_or_default();
    if let Some(m) = v.as_object_mut() {
        m.insert("verdict".into(), json!(out.verdict.name()));
    }
    serde_json::to_string_pretty(&v).unwrap_or_default()
}

fn cmd_bench(a: BenchArgs) -> Result<u8, String> {
    let settings = match &a.settings {
        Some(list) => Setting::parse_list(list).map_err(|e| e.to_string())?,
        None => all_settings(),
    };
    if settings.is_empty() {
        return Err("no settings".into());
    }
    let opts = BenchOptions {
        jobs: a.jobs.max(1),
        audit: a.audit,
        timeout: a.timeout.map(seconds).transpose()?,
        max_iter: a.max_iter,
    };
    let report = run_bench(&a.dir, &settings, &opts).map_err(|e| e.to_string())?;
    print!("{}", report.table());
    if let Some(p) = &a.csv {
        write(p, &report.to_csv(false))?;
    }
    if let Some(p) = &a.summary {
        write(p, &report.summary_csv())?;
    }
    if let Some(p) = &a.series {
        write(p, &report.series_csv())?;
    }
    let wrong = report.wrong();
    for r in &wrong {
        eprintln!(
            "wrong verdict: {} under {}: {} (expected {})",
            r.file, r.setting, r.verdict, r.expected
        );
    }
    Ok(if wrong.is_empty() { 0 } else { 1 })
}
