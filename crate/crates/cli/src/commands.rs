use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde::Serialize;

use powerq::audit::{lower_bound_audit, AuditStatus, EigenvalueMap};
use powerq::discretization::{build_matrix, discretization_error_study};
use powerq::eigen::{constant_eigensystem, solve_eigensystem, EigenSystem};
use powerq::frequency::{difference_set, frequency_sets, symbolic_run};
use powerq::phase_estimation::{
    build_pe_schedule, default_q_grid, eigensystem_for, query_count_scaling, run_phase_estimation,
    worst_case_error_sweep, InitialMode, OutcomeDecoder, PEConfig, PEResult,
};
use powerq::quantum::{run_schedule, sample_outcomes, RegisterLayout};
use powerq::{Error, PotentialSpec};

use crate::args::*;
use crate::output::{emit, f, to_csv, to_json};

/// Brute-force difference-set check is skipped above this many `M` pairs.
const DIFFERENCE_CHECK_LIMIT: usize = 1 << 24;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_PREMISE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, message: message.into() }
    }

    fn io(what: &str, path: &Path, e: std::io::Error) -> Self {
        CliError { code: EXIT_NUMERICAL, message: format!("cannot {what} {}: {e}", path.display()) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    version: &'static str,
    config: &'a Command,
    results: T,
}

/// Output text plus the exit code to finish with.
struct Payload {
    text: String,
    code: u8,
}

impl Payload {
    fn ok(text: String) -> Self {
        Payload { text, code: 0 }
    }
}

pub fn run(cmd: &Command) -> CliResult<ExitCode> {
    let common = cmd.common();
    let start = Instant::now();
    let payload = match cmd {
        Command::Discretize(a) => discretize(cmd, a)?,
        Command::Eigensolve(a) => eigensolve(cmd, a)?,
        Command::PhaseEstimate(a) => phase_estimate(cmd, a)?,
        Command::ErrorSweep(a) => error_sweep(cmd, a)?,
        Command::FreqAudit(a) => freq_audit(cmd, a)?,
        Command::LowerboundAudit(a) => lowerbound_audit(cmd, a)?,
    };
    let computed = start.elapsed();
    let path = match cmd {
        Command::LowerboundAudit(a) => a.report.as_deref().or(common.output.as_deref()),
        _ => common.output.as_deref(),
    };
    if let Err(e) = emit(&payload.text, path) {
        return Err(match path {
            Some(p) => CliError::io("write", p, e),
            None => CliError { code: EXIT_NUMERICAL, message: format!("cannot write to stdout: {e}") },
        });
    }
    if common.timings {
        eprintln!("timing {}: compute {:.3} ms, total {:.3} ms", cmd.name(), ms(computed), ms(start.elapsed()));
    }
    Ok(ExitCode::from(payload.code))
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn json<T: Serialize>(cmd: &Command, results: T) -> String {
    to_json(&Report { version: env!("CARGO_PKG_VERSION"), config: cmd, results })
}

fn load_potential(p: &PotentialArgs) -> CliResult<PotentialSpec> {
    match (&p.q, &p.q_file) {
        (Some(q), _) => Ok(q.clone()),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io("read", path, e))?;
            Ok(PotentialSpec::from_csv_str(&text)?)
        }
        (None, None) => Err(CliError::validation("a potential is required: pass --q or --q-file")),
    }
}

fn require_constant(q: &PotentialSpec, what: &str) -> CliResult<f64> {
    q.as_constant().ok_or_else(|| CliError::validation(format!("{what} needs a constant potential (const:V)")))
}

fn discretize(cmd: &Command, a: &DiscretizeArgs) -> CliResult<Payload> {
    let q = load_potential(&a.potential)?;
    if let Some(list) = &a.n_list {
        let c = require_constant(&q, "the error study")?;
        let rows = discretization_error_study(c, list)?;
        return Ok(Payload::ok(match a.common.format.unwrap_or(Format::Csv) {
            Format::Json => json(cmd, &rows),
            Format::Csv => to_csv(
                &["n", "lambda_continuum", "lambda_discrete", "error", "scaled_error"],
                rows.iter().map(|r| {
                    vec![r.n.to_string(), f(r.lambda_continuum), f(r.lambda_discrete), f(r.error), f(r.scaled_error)]
                }),
            ),
        }));
    }
    let n = a.n.ok_or_else(|| CliError::validation("pass --n or --n-list"))?;
    if a.common.format == Some(Format::Csv) {
        return Err(CliError::validation("the matrix is reported as JSON only"));
    }
    let m = build_matrix(&q, n)?;
    #[derive(Serialize)]
    struct Matrix<'a> {
        #[serde(flatten)]
        matrix: &'a powerq::discretization::TridiagonalSystem,
        warnings: Vec<String>,
    }
    Ok(Payload::ok(json(cmd, Matrix { matrix: &m, warnings: q.warnings() })))
}

fn eigensolve(cmd: &Command, a: &EigensolveArgs) -> CliResult<Payload> {
    let q = load_potential(&a.potential)?;
    if !(a.tol > 0.0) {
        return Err(CliError::validation(format!("--tol must be positive, got {}", a.tol)));
    }
    let m = build_matrix(&q, a.n)?;
    let (eig, method): (EigenSystem, &'static str) = match (a.method, q.as_constant()) {
        (Method::ClosedForm, None) => return Err(CliError::validation("closed-form needs a constant potential")),
        (Method::Auto | Method::ClosedForm, Some(c)) => (constant_eigensystem(c, a.n)?, "closed-form"),
        _ => (solve_eigensystem(&m, a.tol)?, "bisection"),
    };
    #[derive(Serialize)]
    struct Eigen {
        method: &'static str,
        ground_eigenvalue: f64,
        orthonormality_deviation: f64,
        scaled_residual: f64,
        #[serde(flatten)]
        summary: powerq::eigen::EigenSummary,
    }
    Ok(Payload::ok(match a.common.format.unwrap_or(Format::Json) {
        Format::Json => json(
            cmd,
            Eigen {
                method,
                ground_eigenvalue: eig.ground_eigenvalue(),
                orthonormality_deviation: eig.orthonormality_deviation(),
                scaled_residual: eig.scaled_residual(&m),
                summary: eig.summary(a.vectors),
            },
        ),
        Format::Csv => {
            to_csv(&["s", "eigenvalue"], eig.eigenvalues().iter().enumerate().map(|(s, v)| vec![s.to_string(), f(*v)]))
        }
    }))
}

fn phase_estimate(cmd: &Command, a: &PhaseEstimateArgs) -> CliResult<Payload> {
    let q = load_potential(&a.potential)?;
    let cfg = PEConfig { t: a.t, n: a.n, q, initial_mode: a.mode, epsilon: a.epsilon };
    cfg.validate()?;
    if a.samples == Some(0) {
        return Err(CliError::validation("--samples must be at least 1"));
    }
    let result = run_phase_estimation(&cfg)?;
    if let Some(path) = &a.dump_state {
        let eig = eigensystem_for(&cfg.q, cfg.n)?;
        let state = run_schedule(&build_pe_schedule(cfg.t, cfg.n, cfg.initial_mode)?, &eig)?;
        fs::write(path, to_json(&state.dump())).map_err(|e| CliError::io("write", path, e))?;
    }
    let samples = match a.samples {
        Some(count) => Some(summarize_samples(&result, count, a.seed)?),
        None => None,
    };
    Ok(Payload::ok(match a.common.format.unwrap_or(Format::Json) {
        Format::Csv => result.distribution.to_csv(),
        Format::Json => {
            let (best, _) = result
                .distribution
                .probabilities
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc });
            #[derive(Serialize)]
            struct Pe<'a> {
                #[serde(flatten)]
                run: &'a PEResult,
                most_likely_outcome: usize,
                most_likely_estimate: f64,
                samples: Option<SampleSummary>,
            }
            json(
                cmd,
                Pe {
                    run: &result,
                    most_likely_outcome: result.distribution.labels[best],
                    most_likely_estimate: result.estimates[best],
                    samples,
                },
            )
        }
    }))
}

#[derive(Serialize)]
struct SampleSummary {
    count: usize,
    seed: u64,
    /// `[outcome, hits]`, ascending by outcome.
    histogram: Vec<(usize, usize)>,
    empirical_success: f64,
}

fn summarize_samples(r: &PEResult, count: usize, seed: u64) -> CliResult<SampleSummary> {
    let outcomes = sample_outcomes(&r.distribution, count, seed)?;
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    let mut hits = 0;
    for &k in &outcomes {
        *hist.entry(k).or_default() += 1;
        let idx = r.distribution.labels.iter().position(|&l| l == k).expect("sampled label exists");
        if (r.estimates[idx] - r.lambda_ground).abs() <= r.epsilon {
            hits += 1;
        }
    }
    Ok(SampleSummary { count, seed, histogram: hist.into_iter().collect(), empirical_success: hits as f64 / count as f64 })
}

fn error_sweep(cmd: &Command, a: &ErrorSweepArgs) -> CliResult<Payload> {
    if a.grid == 0 {
        return Err(CliError::validation("--grid must be at least 1"));
    }
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::validation(format!("--threshold {} outside [0, 1]", a.threshold)));
    }
    let grid = default_q_grid(a.grid);
    let format = a.common.format.unwrap_or(Format::Csv);
    if let Some(eps) = &a.epsilons {
        if eps.is_empty() {
            return Err(CliError::validation("--epsilons is empty"));
        }
        let rows = query_count_scaling(eps, a.n, &grid)?;
        return Ok(Payload::ok(match format {
            Format::Json => json(cmd, &rows),
            Format::Csv => to_csv(
                &["epsilon", "min_T", "error_at_T"],
                rows.iter().map(|r| vec![f(r.epsilon), r.min_t.to_string(), f(r.error_at_t)]),
            ),
        }));
    }
    RegisterLayout::new(a.t_range.last, a.n)?;
    let mut reports = Vec::new();
    for t in a.t_range.first..=a.t_range.last {
        reports.push(worst_case_error_sweep(t, a.n, &grid, a.threshold)?);
        eprintln!("error-sweep: T = {t} done");
    }
    Ok(Payload::ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                #[serde(rename = "T")]
                t: usize,
                epsilon_achieved: f64,
                min_success_prob: f64,
            }
            let rows: Vec<Row> = reports
                .iter()
                .map(|r| Row { t: r.t, epsilon_achieved: r.epsilon_achieved, min_success_prob: r.success_probability_min })
                .collect();
            json(cmd, rows)
        }
        Format::Csv => to_csv(
            &["T", "epsilon_achieved", "min_success_prob"],
            reports.iter().map(|r| vec![r.t.to_string(), f(r.epsilon_achieved), f(r.success_probability_min)]),
        ),
    }))
}

fn freq_audit(cmd: &Command, a: &FreqAuditArgs) -> CliResult<Payload> {
    let powers = match (&a.powers, a.pe_t) {
        (Some(p), _) => p.clone(),
        (None, Some(t)) => build_pe_schedule(t, 1, InitialMode::ExactGround)?.powers(),
        (None, None) => return Err(CliError::validation("pass --powers or --pe-T")),
    };
    if a.coefficients.is_some() && a.pe_t.is_none() {
        return Err(CliError::validation("--coefficients needs --pe-T"));
    }
    if powers.is_empty() || powers.contains(&0) {
        return Err(CliError::validation("powers must be a nonempty list of positive integers"));
    }
    if let (Some(path), Some(t)) = (&a.coefficients, a.pe_t) {
        let schedule = build_pe_schedule(t, a.n, a.mode)?;
        let coeffs = symbolic_run(&schedule, &constant_eigensystem(0.0, a.n)?)?;
        fs::write(path, coeffs.to_csv()).map_err(|e| CliError::io("write", path, e))?;
    }
    let sets = frequency_sets(&powers)?;
    let difference_check = (sets.m_set.len().saturating_mul(sets.m_set.len()) <= DIFFERENCE_CHECK_LIMIT)
        .then(|| difference_set(&sets.m_set) == sets.l_set);
    #[derive(Serialize)]
    struct Freq<'a> {
        powers: &'a [u64],
        m_set: &'a [i64],
        l_set: &'a [i64],
        m_cardinality: usize,
        cardinality: usize,
        /// `3^T`, absent when it does not fit in 64 bits.
        max_cardinality: Option<u64>,
        sharp: bool,
        difference_set_matches: Option<bool>,
    }
    let max_cardinality = u32::try_from(powers.len()).ok().and_then(|t| 3u64.checked_pow(t));
    Ok(Payload::ok(match a.common.format.unwrap_or(Format::Json) {
        Format::Json => json(
            cmd,
            Freq {
                powers: &sets.powers,
                m_set: &sets.m_set,
                l_set: &sets.l_set,
                m_cardinality: sets.m_set.len(),
                cardinality: sets.l_set.len(),
                max_cardinality,
                sharp: sets.is_sharp(),
                difference_set_matches: difference_check,
            },
        ),
        Format::Csv => to_csv(
            &["set", "value"],
            sets.m_set
                .iter()
                .map(|m| vec!["m".to_string(), m.to_string()])
                .chain(sets.l_set.iter().map(|l| vec!["l".to_string(), l.to_string()])),
        ),
    }))
}

fn lowerbound_audit(cmd: &Command, a: &LowerboundArgs) -> CliResult<Payload> {
    if a.common.format == Some(Format::Csv) {
        return Err(CliError::validation("the audit record is reported as JSON only"));
    }
    let epsilon = match a.epsilon {
        EpsilonArg::Auto => 4.0 * PI * 2f64.powi(-(a.t.min(1023) as i32)),
        EpsilonArg::Value(v) => v,
    };
    let mut schedule = build_pe_schedule(a.t, a.n, InitialMode::ExactGround)?;
    if let DecoderArg::Shuffled(seed) = a.decoder {
        schedule = schedule.with_decoder(OutcomeDecoder::shuffled(a.t, seed))?;
    }
    let map = match a.eigen_map {
        EigenMapArg::Discrete => EigenvalueMap::Discrete,
        EigenMapArg::Continuum => EigenvalueMap::Continuum,
    };
    let audit = lower_bound_audit(&schedule, &constant_eigensystem(0.0, a.n)?, epsilon, map)?;
    let text = json(cmd, &audit);
    match audit.status {
        AuditStatus::Passed => Ok(Payload::ok(text)),
        AuditStatus::PremiseFailed => {
            eprintln!("premise failed: success probability below the threshold at some grid input");
            Ok(Payload { text, code: EXIT_PREMISE })
        }
        AuditStatus::VerdictFailed => {
            eprintln!("audit verdict failed: {:?}", audit.verdicts);
            Ok(Payload { text, code: EXIT_NUMERICAL })
        }
    }
}
