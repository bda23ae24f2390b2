//! The refinement loop: trace abstraction whose refinements come from path
//! program fixpoints when the counterexample has a loop, and from the
//! generalized infeasibility proof of the trace otherwise.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::automata::{inclusion_counterexample, FloydHoareAutomaton};
use crate::domains::DomainKind;
use crate::expr::Statement;
use crate::fixpoint::{analyze, is_safe, FixpointConfig};
use crate::linsolve::Solver;
use crate::pathprog::{extract, has_loop, PathProgramCache};
use crate::program::ProgramAutomaton;
use crate::refine::{
    analyze_trace_with, audit_automaton_cached, audit_sequence, automaton_from_pathprogram,
    automaton_from_sequence_with, AuditCache, AuditReport, HoareMemo, PathProgramOptions,
    TraceAnalysis,
};
use crate::semantics::Execution;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// `None` is plain trace abstraction without abstract interpretation.
    pub domain: Option<DomainKind>,
    pub enhance: bool,
    pub enhance_budget: usize,
    pub widen_delay: usize,
    pub disjuncts: usize,
    pub narrowing: bool,
    pub max_iter: usize,
    pub timeout: Duration,
    pub solver_budget: usize,
    pub pp_by_label: bool,
    /// Re-check every produced automaton and assertion sequence.
    pub audit: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            domain: Some(DomainKind::Interval),
            enhance: true,
            enhance_budget: 5000,
            widen_delay: 3,
            disjuncts: 1,
            narrowing: true,
            max_iter: 200,
            timeout: Duration::from_secs(90),
            solver_budget: crate::linsolve::DEFAULT_BUDGET,
            pp_by_label: false,
            audit: false,
        }
    }
}

impl VerifyConfig {
    pub fn with_domain(domain: Option<DomainKind>) -> Self {
        VerifyConfig {
            domain,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum UnknownReason {
    SolverBudget(String),
    IterationLimit,
    TimeLimit,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::SolverBudget(r) => write!(f, "solver: {r}"),
            UnknownReason::IterationLimit => f.write_str("iteration limit"),
            UnknownReason::TimeLimit => f.write_str("time limit"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub trace: Vec<Statement>,
    pub execution: Execution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Unsafe(Counterexample),
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Safe => "SAFE",
            Verdict::Unsafe(_) => "UNSAFE",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationLog {
    pub iter: usize,
    pub trace_len: usize,
    pub has_loop: bool,
    pub cache_hit: bool,
    pub ai_used: bool,
    pub ai_safe: bool,
    pub a_d_states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    /// The counterexample word.
    #[serde(skip)]
    pub word: Vec<String>,
    #[serde(skip)]
    pub rejected_before: bool,
    #[serde(skip)]
    pub accepted_after: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunStats {
    pub total_refinements: usize,
    pub ai_refinements: usize,
    pub useful_ai_refinements: usize,
    pub wall_ms: u128,
    pub iterations: Vec<IterationLog>,
    #[serde(skip)]
    pub audit: AuditReport,
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    pub stats: RunStats,
    /// The final data automaton.
    pub automaton: FloydHoareAutomaton,
}

pub fn verify(p: &ProgramAutomaton, cfg: &VerifyConfig) -> VerifyOutcome {
    let start = Instant::now();
    let solver = Solver::new(cfg.solver_budget);
    let alphabet = p.alphabet();
    let mut ad = FloydHoareAutomaton::empty();
    let mut cache = PathProgramCache::new();
    let memo = HoareMemo::new();
    let mut audit_cache = AuditCache::default();
    let mut stats = RunStats::default();
    let pp_opts = PathProgramOptions {
        enhance: cfg.enhance,
        enhance_budget: cfg.enhance_budget,
    };
    let verdict = loop {
        if stats.iterations.len() >= cfg.max_iter {
            break Verdict::Unknown(UnknownReason::IterationLimit);
        }
        if start.elapsed() > cfg.timeout {
            break Verdict::Unknown(UnknownReason::TimeLimit);
        }
        let Some(run) = inclusion_counterexample(p, &ad) else {
            break Verdict::Safe;
        };
        let word = &run.statements;
        let mut log = IterationLog {
            iter: stats.iterations.len() + 1,
            trace_len: word.len(),
            has_loop: has_loop(&run, p),
            cache_hit: false,
            ai_used: false,
            ai_safe: false,
            a_d_states: ad.num_states(),
            verdict: None,
            word: word.iter().map(|s| s.to_string()).collect(),
            rejected_before: !ad.accepts(word),
            accepted_after: false,
        };
        let seq = match analyze_trace_with(word, &solver, &memo) {
            TraceAnalysis::Feasible(execution) => {
                log.verdict = Some("UNSAFE".into());
                stats.iterations.push(log);
                break Verdict::Unsafe(Counterexample {
                    trace: word.clone(),
                    execution,
                });
            }
            TraceAnalysis::Unknown(r) => {
                log.verdict = Some("UNKNOWN".into());
                stats.iterations.push(log);
                break Verdict::Unknown(UnknownReason::SolverBudget(r));
            }
            TraceAnalysis::Infeasible(seq) => seq,
        };
        if cfg.audit {
            stats.audit.merge(&audit_sequence(word, &seq, &solver));
        }
        let mut refinement = None;
        if let (Some(domain), true) = (cfg.domain, log.has_loop) {
            let pp = extract(&run, p, cfg.pp_by_label);
            if cache.seen_before(&pp) {
                log.cache_hit = true;
            } else {
                log.ai_used = true;
                stats.ai_refinements += 1;
                let fcfg = FixpointConfig {
                    domain,
                    widen_delay: cfg.widen_delay,
                    disjuncts: cfg.disjuncts,
                    narrowing: cfg.narrowing,
                };
                let ann = analyze(&pp.automaton, &fcfg);
                cache.remember(&pp);
                if is_safe(&ann, &pp.automaton) {
                    log.ai_safe = true;
                    let built = automaton_from_pathprogram(&pp, &ann, &alphabet, &pp_opts);
                    if built.automaton.accepts(word) {
                        stats.useful_ai_refinements += 1;
                        refinement = Some(built.automaton);
                    }
                }
            }
        }
        let refinement = refinement
            .unwrap_or_else(|| automaton_from_sequence_with(word, &seq, &alphabet, &solver, &memo));
        if cfg.audit {
            stats.audit.merge(&audit_automaton_cached(
                &refinement,
                &solver,
                &mut audit_cache,
            ));
        }
        stats.total_refinements += 1;
        ad.merge(&refinement);
        log.accepted_after = ad.accepts(word);
        stats.iterations.push(log);
    };
    if let (Some(last), Verdict::Safe) = (stats.iterations.last_mut(), &verdict) {
        last.verdict.get_or_insert_with(|| "SAFE".into());
    }
    stats.wall_ms = start.elapsed().as_millis();
    VerifyOutcome {
        verdict,
        stats,
        automaton: ad,
    }
}

/// Every refined counterexample was rejected by the data automaton before
/// its refinement and accepted after it, and no counterexample repeats.
pub fn progress_audit(log: &[IterationLog]) -> bool {
    let mut seen = BTreeSet::new();
    log.iter().all(|it| {
        let fresh = seen.insert(it.word.clone());
        // the final iteration ends the loop instead of refining
        fresh && it.rejected_before && (it.accepted_after || it.verdict.is_some())
    })
}
