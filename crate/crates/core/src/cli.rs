//! Batch front-end.
//!
//! Exit status: 0 when every emitted check passes, 1 on a certification
//! failure, 2 on a configuration error.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{Problem, ProblemConfig};
use crate::error::{Error, Result};
use crate::integrator::{integrate, ControlSignal};
use crate::mintime::{self, write_results};
use crate::problem::{validate_h1, validate_h3, ValidationReport};
use crate::regularity::{self, CertificationReport};
use crate::report::fmt_num;
use crate::steering::{self, SteeringParams};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Thread count for parallel sample sweeps; all cores when unset.
pub const THREADS_ENV: &str = "MINTAU_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mintau", version, about = "Minimum time for controlled delay systems")]
pub struct Cli {
    /// Directory for CSV and text artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Seed for sampling-based validators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check H1, H3 and the Petrov condition; print derived constants.
    Validate { config: PathBuf },
    /// Integrate one history under a control and write the trajectory.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        history: String,
        /// `3` (constant), `0:1,0.5:0` (start:index segments) or `word:0,1,1`.
        #[arg(long)]
        control: String,
        /// Final time; the search horizon when absent.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Run the Petrov steering construction from one history.
    Steer {
        config: PathBuf,
        #[arg(long)]
        history: String,
    },
    /// Minimum time estimate for one history.
    Mintime {
        config: PathBuf,
        #[arg(long)]
        history: String,
    },
    /// Run one certification.
    Certify { check: Check, config: PathBuf },
    /// Everything above for every experiment, with a summary table.
    Report { config: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Dpp,
    DistanceBound,
    Lipschitz,
    Semiconcavity,
    BoundaryLemma,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Dpp,
        Check::DistanceBound,
        Check::Lipschitz,
        Check::Semiconcavity,
        Check::BoundaryLemma,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            Check::Dpp => "dpp",
            Check::DistanceBound => "distance-bound",
            Check::Lipschitz => "lipschitz",
            Check::Semiconcavity => "semiconcavity",
            Check::BoundaryLemma => "boundary-lemma",
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PetrovViolation { .. }
        | Error::SteeringFailure { .. }
        | Error::Blowup { .. }
        | Error::Domain { .. } => EXIT_FAIL,
        _ => EXIT_CONFIG,
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::SteeringFailure { log, .. } = &e {
                eprintln!("steering log: {} steps, max ratio {}", log.steps.len(), fmt_num(log.max_ratio()));
            }
            if let Error::PetrovViolation { point, value, .. } = &e {
                eprintln!("witness: z = {:?}, min inner product {}", point, fmt_num(*value));
            }
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}: not a thread count: '{v}'")))?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn load(path: &Path) -> Result<Problem> {
    ProblemConfig::load(path)?.build()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    let out = &cli.output_dir;
    match &cli.command {
        Command::Validate { config } => {
            let p = load(config)?;
            let (text, ok) = validate(&p, cli.seed)?;
            print!("{text}");
            write_text(out, "validate.txt", &text)?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Simulate {
            config,
            history,
            control,
            t_end,
        } => {
            let p = load(config)?;
            let x0 = p.history(history)?;
            let u = parse_control(control, p.search.switch_mesh)?;
            let t_end = t_end.unwrap_or(p.search.horizon);
            let traj = integrate(x0, &u, &p.dyn_, t_end, p.dt)?;
            let name = format!("trajectory_{history}.csv");
            traj.write_csv(create(out, &name)?, &p.target)?;
            match traj.hitting_time(&p.target) {
                Some(t) => println!("hitting time: {}", fmt_num(t)),
                None => println!("no hit before t = {}", fmt_num(traj.t_end())),
            }
            println!("wrote {}", out.join(name).display());
            Ok(EXIT_PASS)
        }
        Command::Steer { config, history } => {
            let p = load(config)?;
            let params = p.steering_params(&p.petrov_certificate()?)?;
            let (text, ok) = steer_one(&p, &params, history, out)?;
            print!("{text}");
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Mintime { config, history } => {
            let p = load(config)?;
            let (text, ok) = mintime_one(&p, history, out)?;
            print!("{text}");
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Certify { check, config } => {
            let p = load(config)?;
            let params = p.steering_params(&p.petrov_certificate()?)?;
            let report = certify(&p, &params, *check)?;
            emit_report(&report, *check, out, cli.seed)?;
            print!("{}", report.to_text());
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Report { config } => {
            let p = load(config)?;
            full_report(&p, cli.seed, out)
        }
    }
}

/// `3`, `0:1,0.5:0` or `word:0,1,1`.
pub fn parse_control(spec: &str, mesh: f64) -> Result<ControlSignal> {
    let bad = || Error::Config(format!("--control: cannot parse '{spec}'"));
    let spec = spec.trim();
    if let Some(word) = spec.strip_prefix("word:") {
        let idx = word
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        return ControlSignal::from_word(&idx, mesh);
    }
    if spec.contains(':') {
        let segs = spec
            .split(',')
            .map(|seg| {
                let (t, c) = seg.split_once(':').ok_or_else(bad)?;
                Ok((
                    t.trim().parse::<f64>().map_err(|_| bad())?,
                    c.trim().parse::<usize>().map_err(|_| bad())?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        return ControlSignal::from_segments(&segs).map_err(|e| Error::Config(format!("--control: {e}")));
    }
    Ok(ControlSignal::constant(spec.parse().map_err(|_| bad())?))
}

fn h1_samples(dim: usize) -> usize {
    match dim {
        1 => 41,
        2 => 21,
        _ => 9,
    }
}

fn validate(p: &Problem, seed: u64) -> Result<(String, bool)> {
    let mut text = format!("problem: {}\nseed: {seed}\n\n", p.name);
    let n = h1_samples(p.dyn_.dim_state());
    let h1 = validate_h1(&p.dyn_, &p.domain, n, seed)?;
    let h3 = validate_h3(&p.dyn_, &p.domain, n, &[0.1, 0.05, 0.025, 0.0125])?;
    let mut ok = h1.passed && h3.passed;
    for r in [&h1, &h3] {
        text += &r.to_text();
        text.push('\n');
    }
    let cert = p.petrov_certificate()?;
    let h4 = ValidationReport {
        check: "H4 (Petrov condition)".into(),
        passed: true,
        measured: vec![
            ("mu".into(), cert.mu),
            ("sigma".into(), cert.sigma),
            ("shell_samples".into(), cert.shell_samples as f64),
        ],
        witness: None,
        notes: vec![format!("worst shell point {:?}", cert.worst_point)],
    };
    text += &h4.to_text();
    text.push('\n');
    let mut target = p.target.clone();
    let shell = if target.dk_shell_r > 0.0 { target.dk_shell_r } else { p.petrov.sigma };
    let dk = target.calibrate_dk(shell, 400, &[0.1, 0.05, 0.025], seed)?;
    text += &format!("d_K semiconcavity constant: {} on shell radius {}\n\n", fmt_num(dk), fmt_num(shell));
    let params = p.steering_params(&cert)?;
    text += &constants_text(&params);
    if params.tau >= params.semiconcavity_tau_threshold() {
        text += "note: tau is not below mu / (6 M L); semiconcavity is not covered\n";
    }
    ok &= cert.replay(&p.dyn_, &p.target) <= 1e-12;
    Ok((text, ok))
}

fn constants_text(p: &SteeringParams) -> String {
    let mut s = String::from("derived constants\n");
    for (k, v) in [
        ("mu", p.mu),
        ("M", p.m),
        ("M_bar", p.m_bar),
        ("L", p.l),
        ("tau", p.tau),
        ("delta", p.delta),
        ("k", p.k_contraction),
        ("C", p.c_bound),
        ("step_coef", p.step_coef),
        ("tau_threshold_lipschitz", p.lipschitz_tau_threshold()),
        ("tau_threshold_semiconcavity", p.semiconcavity_tau_threshold()),
    ] {
        s += &format!("  {k} = {}\n", fmt_num(v));
    }
    s
}

fn steer_one(p: &Problem, params: &SteeringParams, history: &str, out: &Path) -> Result<(String, bool)> {
    let x0 = p.history(history)?;
    let name = format!("steering_{history}.csv");
    match steering::steer(x0, &p.dyn_, &p.target, params, p.dt) {
        Ok(o) => {
            o.log.write_csv(create(out, &name)?)?;
            let budget = params.c_bound * p.target.distance(x0.head());
            Ok((
                format!(
                    "steer {history}: total time {} <= C d_K(x(0)) = {} over {} steps, max ratio {} (k = {}): pass\n",
                    fmt_num(o.total_time),
                    fmt_num(budget),
                    o.log.steps.len(),
                    fmt_num(o.log.max_ratio()),
                    fmt_num(params.k_contraction)
                ),
                true,
            ))
        }
        Err(Error::SteeringFailure { reason, log }) => {
            log.write_csv(create(out, &name)?)?;
            Ok((format!("steer {history}: fail: {reason}\n"), false))
        }
        Err(e) => Err(e),
    }
}

fn mintime_one(p: &Problem, history: &str, out: &Path) -> Result<(String, bool)> {
    let x0 = p.history(history)?;
    let name = format!("mintime_{history}.csv");
    match mintime::value(x0, &p.dyn_, &p.target, &p.oracle().policy)? {
        Some(r) => {
            write_results(create(out, &name)?, &[(history.to_string(), r.clone())])?;
            Ok((
                format!(
                    "mintime {history}: T = {} ({}, mesh {}, {} nodes)\n",
                    fmt_num(r.value),
                    r.method.name(),
                    fmt_num(r.mesh),
                    r.nodes_explored
                ),
                true,
            ))
        }
        None => Ok((format!("mintime {history}: no control reaches K within the horizon\n"), false)),
    }
}

fn missing(what: &str) -> Error {
    Error::Config(format!("experiments.{what}: not configured"))
}

/// Run one certification on the configured experiment.
pub fn certify(p: &Problem, params: &SteeringParams, check: Check) -> Result<CertificationReport> {
    let oracle = p.oracle();
    let e = &p.experiments;
    match check {
        Check::Dpp => {
            let d = e.dpp.as_ref().ok_or_else(|| missing("dpp"))?;
            regularity::check_dpp(p.history(&d.history)?, &oracle, &d.probes, &p.dpp_controls()?)
        }
        Check::DistanceBound => {
            let samples: Vec<_> = if e.distance_bound.is_empty() {
                p.histories.values().cloned().collect()
            } else {
                e.distance_bound
                    .iter()
                    .map(|n| p.history(n).cloned())
                    .collect::<Result<_>>()?
            };
            regularity::check_distance_bound(&samples, &oracle, params, p.tolerances.tol_bound_rel)
        }
        Check::Lipschitz => {
            if e.lipschitz.is_empty() {
                return Err(missing("lipschitz"));
            }
            let pairs = e
                .lipschitz
                .iter()
                .map(|(a, b)| Ok((p.history(a)?.clone(), p.history(b)?.clone())))
                .collect::<Result<Vec<_>>>()?;
            regularity::estimate_lipschitz(&pairs, &oracle, params)
        }
        Check::Semiconcavity => {
            let f = e.semiconcavity.as_ref().ok_or_else(|| missing("semiconcavity"))?;
            let est = regularity::estimate_semiconcavity(
                p.history(&f.base)?,
                p.family(&f.family)?,
                &oracle,
                params,
            )?;
            Ok(est.to_report("semiconcavity"))
        }
        Check::BoundaryLemma => {
            let f = e.boundary_lemma.as_ref().ok_or_else(|| missing("boundary_lemma"))?;
            let shell = if p.target.dk_shell_r > 0.0 { p.target.dk_shell_r } else { p.petrov.sigma };
            let rho = f.rho.unwrap_or_else(|| regularity::lemma_radius(params, shell));
            regularity::check_boundary_lemma(
                p.history(&f.base)?,
                p.family(&f.family)?,
                &oracle,
                params,
                rho,
            )
        }
    }
}

fn emit_report(report: &CertificationReport, check: Check, out: &Path, seed: u64) -> Result<()> {
    let stem = format!("certify_{}", check.slug());
    report.write_csv(create(out, &format!("{stem}.csv"))?)?;
    write_text(out, &format!("{stem}.txt"), &format!("seed: {seed}\n{}", report.to_text()))
}

fn full_report(p: &Problem, seed: u64, out: &Path) -> Result<i32> {
    let mut summary: Vec<Vec<String>> = Vec::new();
    let record = |item: String, ok: bool, summary: &mut Vec<Vec<String>>| {
        summary.push(vec![item, if ok { "pass" } else { "fail" }.to_string()]);
    };

    let (text, ok) = validate(p, seed)?;
    write_text(out, "validate.txt", &text)?;
    record("validate".into(), ok, &mut summary);

    let params = p.steering_params(&p.petrov_certificate()?)?;
    for name in p.histories.keys() {
        let x0 = &p.histories[name];
        let d0 = p.target.distance(x0.head());
        if d0 > 0.0 && d0 < params.delta && x0.lip_constant() <= params.m_bar * (1.0 + 1e-9) {
            let (_, ok) = steer_one(p, &params, name, out)?;
            record(format!("steer {name}"), ok, &mut summary);
        }
        let (_, ok) = mintime_one(p, name, out)?;
        record(format!("mintime {name}"), ok, &mut summary);
    }
    for check in Check::ALL {
        let configured = match check {
            Check::Dpp => p.experiments.dpp.is_some(),
            Check::DistanceBound => !p.histories.is_empty(),
            Check::Lipschitz => !p.experiments.lipschitz.is_empty(),
            Check::Semiconcavity => p.experiments.semiconcavity.is_some(),
            Check::BoundaryLemma => p.experiments.boundary_lemma.is_some(),
        };
        if !configured {
            continue;
        }
        let report = certify(p, &params, check)?;
        emit_report(&report, check, out, seed)?;
        let item = format!("certify {}", check.slug());
        summary.push(vec![item, report.verdict.name().to_string()]);
    }
    crate::report::write_rows(create(out, "summary.csv")?, &["item", "verdict"], &summary)?;
    println!("{:<32} verdict", "item");
    for row in &summary {
        println!("{:<32} {}", row[0], row[1]);
    }
    let all_pass = summary.iter().all(|row| row[1] == "pass");
    Ok(if all_pass { EXIT_PASS } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_specs() {
        assert_eq!(parse_control("3", 0.25).unwrap(), ControlSignal::constant(3));
        let u = parse_control("0:1,0.5:0", 0.25).unwrap();
        assert_eq!(u.index_at(0.2), 1);
        assert_eq!(u.index_at(0.7), 0);
        let w = parse_control("word:0,1,1", 0.25).unwrap();
        assert_eq!(w.index_at(0.3), 1);
        assert!(matches!(parse_control("x", 0.25), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::DelayTooLarge { tau: 0.6, threshold: 0.5, rule: "mu/(2*M_bar*L)" }), EXIT_CONFIG);
        assert_eq!(
            exit_code(&Error::PetrovViolation { point: vec![2.0], value: 1.0, neg_mu: 0.0 }),
            EXIT_FAIL
        );
    }
}
