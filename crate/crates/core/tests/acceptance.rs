//! The acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p traceai-core --test acceptance -- --nocapture`.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::automata::{check_inclusion, inclusion_case, INCLUSION_CASES};
use common::config;
use common::domains::{check, strategy, POST_CASES};
use common::linsolve::{check_entails, check_sat, entail_case, sat_case, ENTAIL_CASES, SAT_CASES};
use common::running::{check_annotation, check_enhanced_edges, check_traces, P1};
use proptest::test_runner::TestRunner;
use traceai::cegar::{verify, Verdict, VerifyConfig};
use traceai::domains::DomainKind;
use traceai::frontend::compile;
use traceai::harness::{all_settings, run_bench, BenchOptions, BenchReport, Outcome};

const P1_MAX: Duration = Duration::from_secs(1);
const BENCH_MAX: Duration = Duration::from_secs(120);
const PROPERTIES_MAX: Duration = Duration::from_secs(60);
const MIN_CORPUS: usize = 20;
const MIN_RELATIONAL_WINS: usize = 2;

struct Line {
    id: &'static str,
    what: &'static str,
    result: Result<String, String>,
}

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn running_example() -> Result<String, String> {
    let p = compile(P1).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = verify(&p, &VerifyConfig::with_domain(Some(DomainKind::Interval)));
    let took = start.elapsed();
    let s = &out.stats;
    let detail = format!(
        "{} total={} ai={} useful={} in {:.0} ms",
        out.verdict.name(),
        s.total_refinements,
        s.ai_refinements,
        s.useful_ai_refinements,
        took.as_secs_f64() * 1e3
    );
    let ok = out.verdict == Verdict::Safe
        && (
            s.total_refinements,
            s.ai_refinements,
            s.useful_ai_refinements,
        ) == (2, 1, 1)
        && took < P1_MAX;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fuzz<S, F>(cases: u32, strategy: S, check: F) -> Result<String, String>
where
    S: proptest::strategy::Strategy,
    F: Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
{
    TestRunner::new(config(cases))
        .run(&strategy, check)
        .map(|_| format!("{cases} cases"))
        .map_err(|e| e.to_string())
}

fn bench(audit: bool) -> (BenchReport, Duration) {
    let opts = BenchOptions {
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        audit,
        ..BenchOptions::default()
    };
    let start = Instant::now();
    let report = run_bench(&corpus(), &all_settings(), &opts).expect("corpus");
    (report, start.elapsed())
}

fn verdicts_under_comp(r: &BenchReport) -> Result<String, String> {
    let bad: Vec<String> = r
        .rows_for("comp")
        .filter(|row| row.wrong || row.outcome == Outcome::Error)
        .map(|row| format!("{} gave {}", row.file, row.verdict))
        .collect();
    let c = r.counts("comp");
    let detail = format!(
        "{} files, {} solved, {} unknown",
        r.files.len(),
        c.success,
        c.timeout + c.unknown
    );
    if r.files.len() < MIN_CORPUS {
        Err(format!("only {} files", r.files.len()))
    } else if bad.is_empty() {
        Ok(detail)
    } else {
        Err(bad.join(", "))
    }
}

fn relational_wins(r: &BenchReport) -> Result<String, String> {
    let wins: Vec<&String> = r
        .files
        .iter()
        .filter(|f| (r.solved(f, "octagon") || r.solved(f, "comp")) && !r.solved(f, "interval"))
        .collect();
    let names: Vec<&str> = wins.iter().map(|f| f.as_str()).collect();
    let detail = format!("{}: {}", wins.len(), names.join(" "));
    if wins.len() >= MIN_RELATIONAL_WINS {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn portfolio_dominates(r: &BenchReport) -> Result<String, String> {
    let best = r.portfolio().success;
    let worse: Vec<&String> = r
        .settings
        .iter()
        .filter(|s| r.counts(s).success > best)
        .collect();
    let sizes_ok = r
        .settings
        .iter()
        .all(|s| r.counts(s).total() == r.files.len());
    let max = r
        .settings
        .iter()
        .map(|s| r.counts(s).success)
        .max()
        .unwrap_or(0);
    if worse.is_empty() && sizes_ok {
        Ok(format!("portfolio {best}, best setting {max}"))
    } else {
        Err(format!("portfolio {best} below {worse:?}"))
    }
}

fn timed(took: Duration, max: Duration) -> Result<String, String> {
    let detail = format!("{:.1} s (limit {} s)", took.as_secs_f64(), max.as_secs());
    if took < max {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hoare_audit(r: &BenchReport) -> Result<String, String> {
    let violations: usize = r.rows.iter().map(|row| row.audit_violations).sum();
    let unknown: usize = r.rows.iter().map(|row| row.audit_unknown).sum();
    let detail = format!(
        "{} runs, {violations} violations, {unknown} undecided",
        r.rows.len()
    );
    if violations == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn progress(r: &BenchReport) -> Result<String, String> {
    let bad: Vec<String> = r
        .rows
        .iter()
        .filter(|row| !row.progress_ok)
        .map(|row| format!("{}/{}", row.file, row.setting))
        .collect();
    if bad.is_empty() {
        Ok(format!("{} runs", r.rows.len()))
    } else {
        Err(bad.join(", "))
    }
}

fn determinism(a: &BenchReport, b: &BenchReport) -> Result<String, String> {
    let (x, y) = (a.to_csv(true), b.to_csv(true));
    if x == y {
        Ok(format!("{} rows identical", a.rows.len()))
    } else {
        let diff = x.lines().zip(y.lines()).find(|(l, r)| l != r);
        Err(format!("first difference: {diff:?}"))
    }
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();
    let mut push = |id, what, result| lines.push(Line { id, what, result });

    push("1", "running example under intervals", running_example());
    push(
        "2",
        "interval annotation of the path program",
        check_annotation().map(|_| "5 locations".into()),
    );
    push(
        "3",
        "edges of the enhanced automaton",
        check_enhanced_edges().map(|_| "all present".into()),
    );
    push(
        "4",
        "infeasibility of both traces",
        check_traces().map(|_| "refuted at 1 and 4".into()),
    );

    // the audit only re-checks what the search produced, so both runs must agree
    let (first, took) = bench(false);
    let (audited, _) = bench(true);
    push(
        "5a",
        "comp verdicts match the headers",
        verdicts_under_comp(&first),
    );
    push(
        "5b",
        "solved by octagon or comp, not interval",
        relational_wins(&first),
    );
    push(
        "5c",
        "portfolio dominates every setting",
        portfolio_dominates(&first),
    );
    push("5d", "full bench run time", timed(took, BENCH_MAX));

    let start = Instant::now();
    push(
        "6a",
        "satisfiability against enumeration",
        fuzz(SAT_CASES, sat_case(), check_sat),
    );
    push(
        "6a",
        "entailment against enumeration",
        fuzz(ENTAIL_CASES, entail_case(), check_entails),
    );
    for kind in DomainKind::ALL {
        let result = fuzz(POST_CASES, strategy(), |(s, others, widen, guard, st)| {
            check(kind, &s, &others, widen, &guard, &st)
        });
        push(
            "6b",
            "abstract post soundness",
            result.map(|d| format!("{kind}: {d}")),
        );
    }
    push(
        "6c",
        "inclusion against enumeration",
        fuzz(INCLUSION_CASES, inclusion_case(), check_inclusion),
    );
    push(
        "6",
        "fuzz suites time",
        timed(start.elapsed(), PROPERTIES_MAX),
    );
    push(
        "6d",
        "Hoare audit of every data automaton",
        hoare_audit(&audited),
    );
    push("6e", "strict progress on every run", progress(&audited));
    push(
        "6f",
        "two corpus runs, identical CSV",
        determinism(&first, &audited),
    );

    println!("{}", first.table());
    let mut failed = 0;
    for l in &lines {
        let (tag, detail) = match &l.result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:<3} {:<42} {detail}", l.id, l.what);
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
