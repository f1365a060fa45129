use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use membrane_tm::compiler::{
    build_family_member, compile_for_input, encode_input, label_count_formula, rule_census, CompilerError,
};
use membrane_tm::dump::member_json;
use membrane_tm::engine::{Engine, Recognition, RunPolicy};
use membrane_tm::object::Verdict;
use membrane_tm::tm::{parse_tm, tm_run, SymId, TmError, TmSpec};
use membrane_tm::verify::gen::{case_seeds, random_dtm_case, random_ntm_case, GenParams};
use membrane_tm::verify::{compare_run, verify_nd, Limits, VerifyError};

use crate::{Cli, Command, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Contract(_) => 2,
            _ => 3,
        }
    }
}

impl From<CompilerError> for CliError {
    fn from(e: CompilerError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Compile(e) => e.into(),
            VerifyError::Nondeterministic => CliError::Usage(e.to_string()),
            other => CliError::Contract(other.to_string()),
        }
    }
}

type Out<'a> = &'a mut dyn Write;

fn load(path: &Path) -> Result<TmSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_tm(&text).map_err(|e| CliError::Usage(format!("{}:{e}", path.display())))
}

fn word(tm: &TmSpec, input: &str) -> Result<Vec<SymId>, CliError> {
    tm.parse_input(input).map_err(|e| CliError::Usage(e.to_string()))
}

fn exit_for(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Accept => 0,
        Verdict::Reject => 1,
    }
}

fn structured(out: Out<'_>, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn no_csv(cli: &Cli, what: &str) -> Result<(), CliError> {
    if cli.format == Format::CsvTrace {
        return Err(CliError::Usage(format!("--format csv-trace is not available for {what}")));
    }
    Ok(())
}

pub fn run(cli: &Cli, out: Out<'_>) -> Result<u8, CliError> {
    match &cli.command {
        Command::RunTm { tm, input } => run_tm(cli, out, &load(tm)?, input),
        Command::Compile { tm, n } => {
            let member = build_family_member(&load(tm)?, *n)?;
            out.write_all(member_json(&member).as_bytes())?;
            Ok(0)
        }
        Command::Encode { tm, input } => {
            no_csv(cli, "encode")?;
            let tm = load(tm)?;
            let w = encode_input(&word(&tm, input)?, &tm)?;
            let objects: Vec<String> = w.iter().map(|(o, _)| o.to_string()).collect();
            match cli.format {
                Format::Structured => structured(out, &objects)?,
                _ => writeln!(out, "{}", objects.join(" "))?,
            }
            Ok(0)
        }
        Command::Simulate {
            tm,
            input,
            trace,
            seed,
            budget,
        } => simulate(cli, out, &load(tm)?, input, trace.as_deref(), *seed, *budget),
        Command::Verify { tm, input, budget } => {
            no_csv(cli, "verify")?;
            let tm = load(tm)?;
            let limits = Limits {
                budget: *budget,
                ..Limits::default()
            };
            let r = compare_run(&tm, &word(&tm, input)?, limits)?;
            match cli.format {
                Format::Structured => structured(out, &r)?,
                _ => {
                    let matched = r.boundary_matches.iter().filter(|&&b| b).count();
                    writeln!(out, "machine verdict: {} after {} steps", r.machine_verdict, r.machine_steps)?;
                    let system = r.system_verdict.map_or("none".to_owned(), |v| v.to_string());
                    writeln!(out, "system verdict: {system} after {} steps (t_end {})", r.totals.steps, r.totals.t_end)?;
                    writeln!(out, "boundaries matched: {matched}/{}", r.boundary_matches.len())?;
                    let observed = r.cycle_length_observed.map_or("n/a".to_owned(), |c| c.to_string());
                    writeln!(out, "cycle length: {observed} (expected {})", r.expected_cycle_length)?;
                    writeln!(out, "confluence violations: {}", r.confluence_violations)?;
                    writeln!(out, "depth violations: {}", r.depth_violations)?;
                    writeln!(out, "schedule mismatches: {}", r.schedule_mismatches)?;
                    if let Some(m) = &r.first_schedule_mismatch {
                        writeln!(out, "  first: {m}")?;
                    }
                    for v in &r.recogniser_violations {
                        writeln!(out, "recogniser violation: {v}")?;
                    }
                    writeln!(out, "{}", if r.ok() { "verified" } else { "MISMATCH" })?;
                }
            }
            Ok(if r.ok() { 0 } else { 2 })
        }
        Command::VerifyNd {
            tm,
            input,
            budget,
            branch_bound,
        } => {
            no_csv(cli, "verify-nd")?;
            let tm = load(tm)?;
            let limits = Limits {
                budget: *budget,
                branch_bound: *branch_bound,
            };
            let r = verify_nd(&tm, &word(&tm, input)?, limits)?;
            match cli.format {
                Format::Structured => structured(out, &r)?,
                _ => {
                    writeln!(
                        out,
                        "machine: {} ({} branches, {} accepting)",
                        r.machine_verdict, r.machine_branches, r.machine_accepting_branches
                    )?;
                    let system = r.system_verdict.map_or("none".to_owned(), |v| v.to_string());
                    writeln!(
                        out,
                        "system: {system} ({} branches, {} accepting, {} states)",
                        r.system_branches, r.system_accepting_branches, r.states_visited
                    )?;
                    writeln!(out, "choice points: {} ({} mismatched)", r.choice_points, r.choice_mismatches)?;
                    if r.partial {
                        writeln!(out, "branch bound reached: result is partial")?;
                    }
                    writeln!(out, "{}", if r.ok() { "verified" } else { "MISMATCH" })?;
                }
            }
            Ok(if r.ok() { 0 } else { 2 })
        }
        Command::Fuzz { template, cases, seed, nd } => {
            no_csv(cli, "fuzz")?;
            fuzz(cli, out, &load(template)?, *cases, *seed, *nd)
        }
        Command::Stats { tm, n } => {
            no_csv(cli, "stats")?;
            let member = build_family_member(&load(tm)?, *n)?;
            let meta = &member.metadata;
            let census = rule_census(&member.system);
            match cli.format {
                Format::Structured => structured(
                    out,
                    &json!({
                        "metadata": meta,
                        "labels_formula": label_count_formula(meta.p),
                        "rules_by_kind": census,
                        "objects": member.system.alphabet.len(),
                        "default_budget": meta.default_budget(),
                    }),
                )?,
                _ => {
                    writeln!(out, "n: {}", meta.n)?;
                    writeln!(out, "p(n): {}", meta.p)?;
                    writeln!(out, "m: {}", meta.m)?;
                    writeln!(out, "cycle length: {}", meta.cycle_len)?;
                    writeln!(out, "labels: {}", meta.labels)?;
                    writeln!(out, "labels (formula): {}", label_count_formula(meta.p))?;
                    writeln!(out, "objects: {}", member.system.alphabet.len())?;
                    writeln!(out, "rules: {}", meta.rules)?;
                    for (kind, count) in &census {
                        writeln!(out, "  {kind}: {count}")?;
                    }
                    writeln!(out, "t_end: {}", meta.t_end)?;
                    writeln!(out, "default budget: {}", meta.default_budget())?;
                }
            }
            Ok(0)
        }
    }
}

fn run_tm(cli: &Cli, out: Out<'_>, tm: &TmSpec, input: &str) -> Result<u8, CliError> {
    let x = word(tm, input)?;
    let p = tm.tape_bound(x.len()).map_err(|e| CliError::Usage(e.to_string()))?;
    let run = tm_run(tm, &x, p).map_err(|e| match e {
        TmError::Invalid(_) | TmError::BlankInInput { .. } | TmError::UnknownSymbol(_) => CliError::Usage(e.to_string()),
        other => CliError::Contract(other.to_string()),
    })?;
    let rows: Vec<_> = run
        .trace
        .iter()
        .map(|c| (c.step, tm.state_name(c.state), c.head, tm.format_input(&c.tape)))
        .collect();
    match cli.format {
        Format::Structured => structured(
            out,
            &json!({
                "verdict": run.verdict,
                "steps": run.halting_step(),
                "branches": run.branches,
                "accepting_branches": run.accepting_branches,
                "trace": rows.iter().map(|(step, state, head, tape)| json!({
                    "step": step, "state": state, "head": head, "tape": tape,
                })).collect::<Vec<_>>(),
            }),
        )?,
        Format::CsvTrace => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["step", "state", "head", "tape"])?;
            for (step, state, head, tape) in &rows {
                w.serialize((step, state, head, tape))?;
            }
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "verdict: {}", run.verdict)?;
            writeln!(out, "steps: {}", run.halting_step())?;
            if run.branches > 1 {
                writeln!(out, "branches: {} ({} accepting)", run.branches, run.accepting_branches)?;
            }
            for (step, state, head, tape) in &rows {
                writeln!(out, "{step:>4}  {state:<8} head {head:<3} {tape}")?;
            }
        }
    }
    Ok(exit_for(run.verdict))
}

#[derive(Serialize)]
struct TraceRow {
    step: usize,
    membrane_count: usize,
    object_count: u64,
    rules_applied: u64,
    emissions: String,
}

fn simulate(
    cli: &Cli,
    out: Out<'_>,
    tm: &TmSpec,
    input: &str,
    trace: Option<&Path>,
    seed: u64,
    budget: Option<usize>,
) -> Result<u8, CliError> {
    let x = word(tm, input)?;
    let (member, system) = compile_for_input(tm, &x)?;
    let engine = Engine::new(&system).map_err(|e| CliError::Contract(e.to_string()))?;
    let budget = budget.unwrap_or_else(|| member.metadata.default_budget());
    let start = engine.initial_configuration();
    let mut rows = vec![TraceRow {
        step: 0,
        membrane_count: start.membrane_count(),
        object_count: start.object_count(),
        rules_applied: 0,
        emissions: String::new(),
    }];
    let result = engine
        .run_with(budget, RunPolicy::SeededRandom(seed), false, |ev| {
            rows.push(TraceRow {
                step: ev.step,
                membrane_count: ev.after.membrane_count(),
                object_count: ev.after.object_count(),
                rules_applied: ev.assignment.rules_applied(),
                emissions: ev
                    .emitted
                    .iter()
                    .map(|(o, _)| system.alphabet.get(*o).to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            })
        })
        .map_err(|e| CliError::Contract(e.to_string()))?;
    let write_csv = |w: &mut dyn Write| -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(w);
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    };
    if let Some(path) = trace {
        write_csv(&mut std::fs::File::create(path)?)?;
    }
    let audit = Recognition::audit(&result, &system.alphabet);
    match cli.format {
        Format::CsvTrace => write_csv(out)?,
        Format::Structured => structured(
            out,
            &json!({
                "seed": seed,
                "steps": result.steps,
                "t_end": member.metadata.t_end,
                "verdict": audit.as_ref().ok().map(|r| r.verdict),
                "violation": audit.as_ref().err().map(|e| e.to_string()),
            }),
        )?,
        Format::Human => {
            writeln!(out, "seed: {seed}")?;
            writeln!(out, "steps: {}", result.steps)?;
            match &audit {
                Ok(r) => writeln!(out, "{}", r.verdict)?,
                Err(e) => writeln!(out, "recogniser contract violated: {e}")?,
            }
        }
    }
    match audit {
        Ok(r) => Ok(exit_for(r.verdict)),
        Err(_) => Ok(2),
    }
}

#[derive(Serialize)]
struct FuzzResult {
    case: usize,
    seed: u64,
    attempts: Option<usize>,
    ok: bool,
    verdict: Option<Verdict>,
    detail: String,
}

fn fuzz_case(case: usize, seed: u64, params: &GenParams, nd: bool) -> FuzzResult {
    let generated = if nd {
        random_ntm_case(seed, params)
    } else {
        random_dtm_case(seed, params)
    };
    let Some(c) = generated else {
        return FuzzResult {
            case,
            seed,
            attempts: None,
            ok: false,
            verdict: None,
            detail: "no admitted machine within the attempt limit".into(),
        };
    };
    let (ok, verdict, detail) = if nd {
        match verify_nd(&c.tm, &c.input, Limits::default()) {
            Ok(r) => (
                r.ok(),
                r.system_verdict,
                format!("{} of {} branches accept", r.system_accepting_branches, r.system_branches),
            ),
            Err(e) => (false, None, e.to_string()),
        }
    } else {
        match compare_run(&c.tm, &c.input, Limits::default()) {
            Ok(r) => (
                r.ok(),
                r.system_verdict,
                format!("{} machine steps, {} engine steps", r.machine_steps, r.totals.steps),
            ),
            Err(e) => (false, None, e.to_string()),
        }
    };
    FuzzResult {
        case,
        seed,
        attempts: Some(c.attempts),
        ok,
        verdict,
        detail,
    }
}

fn fuzz(cli: &Cli, out: Out<'_>, template: &TmSpec, cases: usize, seed: u64, nd: bool) -> Result<u8, CliError> {
    let params = GenParams::from_template(template);
    let seeds = case_seeds(seed, cases);
    let results: Vec<FuzzResult> = seeds
        .par_iter()
        .enumerate()
        .map(|(case, &s)| fuzz_case(case, s, &params, nd))
        .collect();
    let passed = results.iter().filter(|r| r.ok).count();
    match cli.format {
        Format::Structured => structured(
            out,
            &json!({
                "seed": seed,
                "cases": cases,
                "mode": if nd { "nondeterministic" } else { "deterministic" },
                "passed": passed,
                "failed": cases - passed,
                "results": results,
            }),
        )?,
        _ => {
            writeln!(out, "seed: {seed}")?;
            for r in &results {
                let verdict = r.verdict.map_or("-".to_owned(), |v| v.to_string());
                let status = if r.ok { "ok" } else { "FAIL" };
                writeln!(out, "case {:>4} seed {:>20}: {status:<4} {verdict:<6} {}", r.case, r.seed, r.detail)?;
            }
            writeln!(out, "passed: {passed}/{cases}")?;
        }
    }
    Ok(if passed == cases { 0 } else { 2 })
}
