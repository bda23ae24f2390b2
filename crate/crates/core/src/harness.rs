//! Corpus benchmarking: every `.imp` file of a directory under a list of
//! settings, with the expected verdict read from a `// @expect` header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::cegar::{progress_audit, verify, Verdict, VerifyConfig};
use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::frontend::compile;

#[derive(Clone, Debug)]
pub struct Setting {
    pub name: String,
    pub config: VerifyConfig,
}

impl Setting {
    /// `ta` is trace abstraction alone, `<domain>` uses the enhanced path
    /// program automata and `<domain>-plain` the unenhanced ones.
    pub fn parse(name: &str) -> Result<Setting> {
        let name = name.trim();
        let config = if name == "ta" {
            VerifyConfig::with_domain(None)
        } else {
            let (d, enhance) = match name.strip_suffix("-plain") {
                Some(d) => (d, false),
                None => (name, true),
            };
            let mut c = VerifyConfig::with_domain(Some(d.parse::<DomainKind>()?));
            c.enhance = enhance;
            c
        };
        Ok(Setting {
            name: name.to_string(),
            config,
        })
    }

    pub fn parse_list(list: &str) -> Result<Vec<Setting>> {
        list.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Setting::parse)
            .collect()
    }
}

/// All nine settings.
pub fn all_settings() -> Vec<Setting> {
    let mut names = vec!["ta".to_string()];
    for d in DomainKind::ALL {
        names.push(d.name().to_string());
        names.push(format!("{}-plain", d.name()));
    }
    names.iter().map(|n| Setting::parse(n).unwrap()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Safe,
    Unsafe,
}

impl Expect {
    pub fn name(self) -> &'static str {
        match self {
            Expect::Safe => "SAFE",
            Expect::Unsafe => "UNSAFE",
        }
    }
}

/// Reads the `// @expect safe|unsafe` header.
pub fn read_expect(src: &str) -> Option<Expect> {
    src.lines().find_map(|l| {
        let rest = l
            .trim()
            .strip_prefix("//")?
            .trim()
            .strip_prefix("@expect")?;
        match rest.trim().to_ascii_lowercase().as_str() {
            "safe" => Some(Expect::Safe),
            "unsafe" => Some(Expect::Unsafe),
            _ => None,
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Timeout,
    Error,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub file: String,
    pub setting: String,
    pub verdict: String,
    pub expected: String,
    pub wall_ms: u128,
    pub total_refinements: usize,
    pub ai_refinements: usize,
    pub useful_ai_refinements: usize,
    pub outcome: Outcome,
    /// The verdict contradicts the header.
    pub wrong: bool,
    pub progress_ok: bool,
    pub audit_violations: usize,
    pub audit_unknown: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub success: usize,
    pub timeout: usize,
    pub error: usize,
    pub unknown: usize,
}

impl Counts {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Success => self.success += 1,
            Outcome::Timeout => self.timeout += 1,
            Outcome::Error => self.error += 1,
            Outcome::Unknown => self.unknown += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.success + self.timeout + self.error + self.unknown
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub jobs: usize,
    pub audit: bool,
    pub timeout: Option<Duration>,
    pub max_iter: Option<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            jobs: 1,
            audit: false,
            timeout: None,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub files: Vec<String>,
    pub settings: Vec<String>,
    /// File-major, in the order of `files` and `settings`.
    pub rows: Vec<BenchRow>,
}

/// The `.imp` files of `dir`, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "imp"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_one(path: &Path, setting: &Setting, opts: &BenchOptions) -> BenchRow {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut row = BenchRow {
        file,
        setting: setting.name.clone(),
        verdict: "ERROR".into(),
        expected: "-".into(),
        wall_ms: 0,
        total_refinements: 0,
        ai_refinements: 0,
        useful_ai_refinements: 0,
        outcome: Outcome::Error,
        wrong: false,
        progress_ok: true,
        audit_violations: 0,
        audit_unknown: 0,
    };
    let Ok(src) = std::fs::read_to_string(path) else {
        return row;
    };
    let expect = read_expect(&src);
    if let Some(e) = expect {
        row.expected = e.name().into();
    }
    let Ok(program) = compile(&src) else {
        return row;
    };
    let mut cfg = setting.config.clone();
    cfg.audit = opts.audit;
    if let Some(t) = opts.timeout {
        cfg.timeout = t;
    }
    if let Some(m) = opts.max_iter {
        cfg.max_iter = m;
    }
    let out = verify(&program, &cfg);
    row.verdict = out.verdict.name().into();
    row.wall_ms = out.stats.wall_ms;
    row.total_refinements = out.stats.total_refinements;
    row.ai_refinements = out.stats.ai_refinements;
    row.useful_ai_refinements = out.stats.useful_ai_refinements;
    row.progress_ok = progress_audit(&out.stats.iterations);
    row.audit_violations = out.stats.audit.violations.len();
    row.audit_unknown = out.stats.audit.unknown;
    row.outcome = match (&out.verdict, expect) {
        (_, None) => Outcome::Error,
        (Verdict::Unknown(crate::cegar::UnknownReason::SolverBudget(_)), _) => Outcome::Unknown,
        (Verdict::Unknown(_), _) => Outcome::Timeout,
        (Verdict::Safe, Some(Expect::Safe)) | (Verdict::Unsafe(_), Some(Expect::Unsafe)) => {
            Outcome::Success
        }
        _ => {
            row.wrong = true;
            Outcome::Error
        }
    };
    row
}

/// Runs every setting on every file of `dir`, `opts.jobs` samples at a time.
pub fn run_bench(dir: &Path, settings: &[Setting], opts: &BenchOptions) -> Result<BenchReport> {
    Ok(run_files(&corpus_files(dir)?, settings, opts))
}

pub fn run_files(files: &[PathBuf], settings: &[Setting], opts: &BenchOptions) -> BenchReport {
    let tasks: Vec<(&PathBuf, &Setting)> = files
        .iter()
        .flat_map(|f| settings.iter().map(move |s| (f, s)))
        .collect();
    let rows = run_tasks(&tasks, opts);
    BenchReport {
        files: files
            .iter()
            .map(|f| {
                f.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
        settings: settings.iter().map(|s| s.name.clone()).collect(),
        rows,
    }
}

#[cfg(feature = "parallel")]
fn run_tasks(tasks: &[(&PathBuf, &Setting)], opts: &BenchOptions) -> Vec<BenchRow> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build();
    match pool {
        Ok(pool) => pool.install(|| tasks.par_iter().map(|(f, s)| run_one(f, s, opts)).collect()),
        Err(_) => tasks.iter().map(|(f, s)| run_one(f, s, opts)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_tasks(tasks: &[(&PathBuf, &Setting)], opts: &BenchOptions) -> Vec<BenchRow> {
    tasks.iter().map(|(f, s)| run_one(f, s, opts)).collect()
}

impl BenchReport {
    pub fn rows_for<'a>(&'a self, setting: &'a str) -> impl Iterator<Item = &'a BenchRow> + 'a {
        self.rows.iter().filter(move |r| r.setting == setting)
    }

    pub fn counts(&self, setting: &str) -> Counts {
        let mut c = Counts::default();
        for r in self.rows_for(setting) {
            c.add(r.outcome);
        }
        c
    }

    /// Per file, the best outcome over all settings.
    pub fn portfolio(&self) -> Counts {
        let rank = |o: Outcome| match o {
            Outcome::Success => 0,
            Outcome::Unknown => 1,
            Outcome::Timeout => 2,
            Outcome::Error => 3,
        };
        let mut c = Counts::default();
        for f in &self.files {
            let best = self
                .rows
                .iter()
                .filter(|r| &r.file == f)
                .map(|r| r.outcome)
                .min_by_key(|o| rank(*o))
                .unwrap_or(Outcome::Error);
            c.add(best);
        }
        c
    }

    pub fn wrong(&self) -> Vec<&BenchRow> {
        self.rows.iter().filter(|r| r.wrong).collect()
    }

    pub fn solved(&self, file: &str, setting: &str) -> bool {
        self.rows
            .iter()
            .any(|r| r.file == file && r.setting == setting && r.outcome == Outcome::Success)
    }

    /// One line per sample and setting. With `mask_time` the wall clock
    /// column is blanked, which makes two runs comparable.
    pub fn to_csv(&self, mask_time: bool) -> String {
        let mut s = String::from(
            "file,setting,verdict,expected,wall_ms,total_refinements,ai_refinements,useful_ai_refinements\n",
        );
        for r in &self.rows {
            let ms = if mask_time {
                "-".to_string()
            } else {
                r.wall_ms.to_string()
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.file,
                r.setting,
                r.verdict,
                r.expected,
                ms,
                r.total_refinements,
                r.ai_refinements,
                r.useful_ai_refinements
            );
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("setting,success,timeout,error,unknown\n");
        let mut line = |name: &str, c: Counts| {
            let _ = writeln!(
                s,
                "{name},{},{},{},{}",
                c.success, c.timeout, c.error, c.unknown
            );
        };
        for name in &self.settings {
            line(name, self.counts(name));
        }
        line("Portfolio", self.portfolio());
        s
    }

    pub fn table(&self) -> String {
        let width = self
            .settings
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max(9);
        let mut s = format!(
            "{:<width$} {:>7} {:>7} {:>7} {:>7}\n",
            "setting", "success", "timeout", "error", "unknown"
        );
        let mut line = |name: &str, c: Counts| {
            let _ = writeln!(
                s,
                "{name:<width$} {:>7} {:>7} {:>7} {:>7}",
                c.success, c.timeout, c.error, c.unknown
            );
        };
        for name in &self.settings {
            line(name, self.counts(name));
        }
        line("Portfolio", self.portfolio());
        s
    }

    /// Per setting, the successful samples' wall time and refinement counts,
    /// each sorted ascending and listed by rank.
    pub fn series_csv(&self) -> String {
        let mut s = String::from("setting,measure,rank,value\n");
        for name in &self.settings {
            let ok: Vec<&BenchRow> = self
                .rows_for(name)
                .filter(|r| r.outcome == Outcome::Success)
                .collect();
            type Measure = fn(&BenchRow) -> u128;
            let measures: [(&str, Measure); 3] = [
                ("wall_ms", |r| r.wall_ms),
                ("total_refinements", |r| r.total_refinements as u128),
                ("ai_refinements", |r| r.ai_refinements as u128),
            ];
            for (m, f) in measures {
                let mut vals: Vec<u128> = ok.iter().map(|r| f(r)).collect();
                vals.sort_unstable();
                for (i, v) in vals.iter().enumerate() {
                    let _ = writeln!(s, "{name},{m},{},{v}", i + 1);
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_parsing() {
        assert_eq!(read_expect("// @expect safe\nvar x;"), Some(Expect::Safe));
        assert_eq!(
            read_expect("var x;\n  //@expect UNSAFE"),
            Some(Expect::Unsafe)
        );
        assert_eq!(read_expect("// expect safe"), None);
    }

    #[test]
    fn setting_names() {
        assert_eq!(all_settings().len(), 9);
        let s = Setting::parse("octagon-plain").unwrap();
        assert_eq!(s.config.domain, Some(DomainKind::Octagon));
        assert!(!s.config.enhance);
        assert!(Setting::parse("ta").unwrap().config.domain.is_none());
        assert!(Setting::parse("polyhedra").is_err());
    }
}
