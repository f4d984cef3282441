//! The four subcommands. Each runner returns the process exit code on the
//! happy path (0, or a documented flagged code with outputs still written)
//! and a [`Failure`] when the run stops before producing its outputs.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use amen_solver::SolverConfig;
use amen_summation::{amen_sum, binary_sum, SummationConfig, SummationReport};
use clap::{Args, ValueEnum};
use dense_oracle::{
    dense_detection, dense_hamiltonian, dense_liouvillian, dense_spectrum, DenseLimits,
};
use serde::Serialize;
use serde_json::json;
use spectrum_engine::{
    build_liouvillian, detection_state, spectrum, SolverBackend, SpectrumError, SpectrumRequest,
};
use spin_model::{commutation_superoperator, hamiltonian_terms, SpinSystem};
use tt_core::TruncationPolicy;

use crate::exit_code;
use crate::fixture::backbone_chain;
use crate::manifest::{prepare_out_dir, RunManifest};
use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Amen,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Amen,
    Dmrg,
}

fn load_system(path: &Path) -> Result<SpinSystem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::schema(format!("cannot read {}: {e}", path.display())))?;
    SpinSystem::from_json(&text)
        .map_err(|e| Failure::schema(format!("{}: {e}", path.display())))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Assemble the Liouvillian as a compressed TT operator.
#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Spin-system JSON file.
    pub input: PathBuf,
    /// Relative summation tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    /// Summation strategy.
    #[arg(long, value_enum, default_value_t = Method::Amen)]
    pub method: Method,
    /// Output directory, created when missing.
    #[arg(long)]
    pub out: PathBuf,
}

fn print_rank_table(report: &SummationReport, label: &str) {
    println!("{:>6}  {:>8}  {:>9}  {:>11}  {:>13}", label, "max_rank", "effective", "delta", "residual_est");
    for (i, profile) in report.rank_history.iter().enumerate() {
        let delta = report
            .delta_history
            .get(i)
            .map_or_else(|| format!("{:>11}", "-"), |d| format!("{d:>11.3e}"));
        let resid = report
            .residual_history
            .get(i)
            .map_or_else(|| format!("{:>13}", "-"), |r| format!("{r:>13.3e}"));
        println!(
            "{:>6}  {:>8}  {:>9.2}  {}  {}",
            i + 1,
            profile.max_rank(),
            profile.effective_rank,
            delta,
            resid
        );
    }
}

pub fn build(args: &BuildArgs) -> Result<i32, Failure> {
    let t_total = Instant::now();
    let sys = load_system(&args.input)?;
    if !(args.eps > 0.0) || !args.eps.is_finite() {
        return Err(Failure::schema(format!(
            "--eps must be positive and finite, got {}",
            args.eps
        )));
    }
    let ham = hamiltonian_terms(&sys);
    let sum = commutation_superoperator(&ham).expect("hamiltonian terms live in Hilbert space");

    let t_sum = Instant::now();
    let (op, report) = match args.method {
        Method::Amen => amen_sum(&sum, &SummationConfig::new(args.eps)),
        Method::Binary => binary_sum(&sum, &TruncationPolicy::new(args.eps)),
    }
    .map_err(Failure::io)?;
    let sum_ms = ms(t_sum);

    match args.method {
        Method::Amen => print_rank_table(&report, "sweep"),
        Method::Binary => print_rank_table(&report, "round"),
    }
    let profile = op.rank_profile();
    println!(
        "final ranks: max {} effective {:.2}, error estimate {:.3e}",
        profile.max_rank(),
        profile.effective_rank,
        report.final_rel_error_estimate
    );

    let t_write = Instant::now();
    let out_dir = prepare_out_dir(&args.out)?;
    let tt_path = out_dir.join("liouvillian.tt");
    op.save(&tt_path)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", tt_path.display())))?;
    let report_path = out_dir.join("summation-report.json");
    let sidecar = json!({
        "method": format!("{:?}", args.method).to_lowercase(),
        "eps": args.eps,
        "final_ranks": profile,
        "report": report,
    });
    std::fs::write(&report_path, serde_json::to_string_pretty(&sidecar).expect("report serializes"))
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", report_path.display())))?;

    let code = if report.converged {
        exit_code::OK
    } else {
        eprintln!("warning: summation did not converge within the sweep budget");
        exit_code::BUILD_NOT_CONVERGED
    };

    let mut manifest = RunManifest::new(
        "build",
        Some(&args.input),
        json!({
            "eps": args.eps,
            "method": format!("{:?}", args.method).to_lowercase(),
            "out": args.out.display().to_string(),
        }),
    );
    manifest.record_output(&tt_path);
    manifest.record_output(&report_path);
    manifest.record_timing("summation", sum_ms);
    manifest.record_timing("write", ms(t_write));
    manifest.record_timing("total", ms(t_total));
    manifest.exit_code = code;
    manifest.write(&out_dir.join("ttspin-build.manifest.json"))?;
    Ok(code)
}

/// Sweep a frequency window and write the spectrum.
#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Spin-system JSON file.
    pub input: PathBuf,
    /// Detection isotope, e.g. 1H.
    #[arg(long)]
    pub isotope: String,
    /// Window start on the Hz axis.
    #[arg(long, allow_negative_numbers = true)]
    pub from_hz: f64,
    /// Window end on the Hz axis.
    #[arg(long, allow_negative_numbers = true)]
    pub to_hz: f64,
    /// Number of grid points.
    #[arg(long)]
    pub points: usize,
    /// Per-point relative residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Sweep algorithm for the shifted systems.
    #[arg(long, value_enum, default_value_t = SolverChoice::Amen)]
    pub solver: SolverChoice,
    /// Output directory, created when missing.
    #[arg(long)]
    pub out: PathBuf,
}

/// Hz window to strictly increasing angular frequencies. The omega axis
/// runs opposite to the Hz axis, so the window is traversed in reverse.
fn omega_grid(from_hz: f64, to_hz: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if points == 0 {
        return Err(Failure::schema("--points must be at least 1"));
    }
    if !from_hz.is_finite() || !to_hz.is_finite() {
        return Err(Failure::schema("frequency window must be finite"));
    }
    if points == 1 {
        if from_hz != to_hz {
            return Err(Failure::schema(
                "a single-point window needs --from-hz equal to --to-hz",
            ));
        }
        return Ok(vec![-TAU * from_hz]);
    }
    if to_hz <= from_hz {
        return Err(Failure::schema(format!(
            "--to-hz ({to_hz}) must exceed --from-hz ({from_hz})"
        )));
    }
    let step = (to_hz - from_hz) / (points - 1) as f64;
    Ok((0..points)
        .rev()
        .map(|k| -TAU * (from_hz + step * k as f64))
        .collect())
}

fn classify_spectrum_error(e: SpectrumError) -> Failure {
    match &e {
        SpectrumError::Summation(_) | SpectrumError::Tensor(_) => Failure::io(e),
        _ => Failure::schema(e),
    }
}

pub fn spectrum_cmd(args: &SpectrumArgs) -> Result<i32, Failure> {
    let t_total = Instant::now();
    let sys = load_system(&args.input)?;
    let grid = omega_grid(args.from_hz, args.to_hz, args.points)?;
    if !(args.eps > 0.0) || !args.eps.is_finite() {
        return Err(Failure::schema(format!(
            "--eps must be positive and finite, got {}",
            args.eps
        )));
    }

    let mut req = SpectrumRequest::new(sys, &args.isotope, grid, SolverConfig::new(args.eps));
    req.backend = match args.solver {
        SolverChoice::Amen => SolverBackend::Amen,
        SolverChoice::Dmrg => SolverBackend::Dmrg,
    };
    let t_solve = Instant::now();
    let result = spectrum(&req).map_err(classify_spectrum_error)?;
    let solve_ms = ms(t_solve);

    let t_write = Instant::now();
    let out_dir = prepare_out_dir(&args.out)?;
    let csv_path = out_dir.join("spectrum.csv");
    std::fs::write(&csv_path, result.to_csv())
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", csv_path.display())))?;
    let diag_path = out_dir.join("diagnostics.json");
    std::fs::write(&diag_path, result.to_json())
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", diag_path.display())))?;

    let fraction = result.converged_fraction();
    let max_sweeps = result.points.iter().map(|p| p.sweeps()).max().unwrap_or(0);
    println!(
        "{} points, {:.1}% converged, max {} sweeps, Liouvillian ranks max {}",
        result.points.len(),
        100.0 * fraction,
        max_sweeps,
        result.liouvillian_ranks.max_rank()
    );
    let code = if fraction >= 0.9 {
        exit_code::OK
    } else {
        eprintln!(
            "warning: only {:.1}% of points converged (threshold 90%)",
            100.0 * fraction
        );
        exit_code::SPECTRUM_UNDERCONVERGED
    };

    let mut manifest = RunManifest::new(
        "spectrum",
        Some(&args.input),
        json!({
            "isotope": args.isotope,
            "from_hz": args.from_hz,
            "to_hz": args.to_hz,
            "points": args.points,
            "eps": args.eps,
            "solver": format!("{:?}", args.solver).to_lowercase(),
            "out": args.out.display().to_string(),
        }),
    );
    manifest.record_output(&csv_path);
    manifest.record_output(&diag_path);
    manifest.record_timing("solve", solve_ms);
    manifest.record_timing("write", ms(t_write));
    manifest.record_timing("total", ms(t_total));
    manifest.exit_code = code;
    manifest.write(&out_dir.join("ttspin-spectrum.manifest.json"))?;
    Ok(code)
}

/// Cross-check the tensor pipeline against the dense oracle.
#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Spin-system JSON file.
    pub input: PathBuf,
    /// Tolerance driving both the tensor pipeline and the pass gates.
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
}

#[derive(Debug, Serialize)]
struct CheckRow {
    name: &'static str,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
}

impl CheckRow {
    fn new(name: &'static str, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

fn rel_frobenius(
    left: &ndarray::Array2<tt_core::C64>,
    right: &ndarray::Array2<tt_core::C64>,
) -> f64 {
    let num = (left - right).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den = right.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

pub fn validate(args: &ValidateArgs) -> Result<i32, Failure> {
    let t_total = Instant::now();
    let sys = load_system(&args.input)?;
    if !(args.eps > 0.0) || !args.eps.is_finite() {
        return Err(Failure::schema(format!(
            "--eps must be positive and finite, got {}",
            args.eps
        )));
    }
    let limits = DenseLimits::default();
    let n = sys.n_spins();
    if n > limits.max_liouville_spins {
        return Err(Failure::cap(format!(
            "oracle cap exceeded: {n} spins, dense Liouville limit is {}",
            limits.max_liouville_spins
        )));
    }
    let eps = args.eps;
    let isotope = sys.spins[0].isotope.clone();
    let mut rows = Vec::new();

    let ham_sum = hamiltonian_terms(&sys);
    let (ham_tt, _) = amen_sum(&ham_sum, &SummationConfig::new(eps)).map_err(Failure::io)?;
    let ham_dense = dense_hamiltonian(&sys, &limits).map_err(Failure::io)?;
    rows.push(CheckRow::new(
        "hamiltonian",
        rel_frobenius(&ham_tt.to_dense().map_err(Failure::io)?, &ham_dense),
        100.0 * eps,
    ));

    let (hcomm, hcomm_sq) = build_liouvillian(&sys, eps).map_err(Failure::io)?;
    let liou_dense = dense_liouvillian(&sys, &limits).map_err(Failure::io)?;
    rows.push(CheckRow::new(
        "liouvillian",
        rel_frobenius(&hcomm.to_dense().map_err(Failure::io)?, &liou_dense),
        100.0 * eps,
    ));
    rows.push(CheckRow::new(
        "liouvillian_squared",
        rel_frobenius(
            &hcomm_sq.to_dense().map_err(Failure::io)?,
            &liou_dense.dot(&liou_dense),
        ),
        1000.0 * eps,
    ));

    let d_tt = detection_state(&sys, &isotope).map_err(Failure::io)?;
    let d_dense = dense_detection(&sys, &isotope, &limits).map_err(Failure::io)?;
    let d_dev = (&d_tt.to_dense().map_err(Failure::io)? - &d_dense)
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    rows.push(CheckRow::new("detection_state", d_dev, 1e-12));

    // spectrum over a window covering every offset, solved at the same eps
    let lo = sys.spins.iter().map(|s| s.offset_hz).fold(f64::INFINITY, f64::min) - 40.0;
    let hi = sys.spins.iter().map(|s| s.offset_hz).fold(f64::NEG_INFINITY, f64::max) + 40.0;
    let grid = omega_grid(lo, hi, 21)?;
    let req = SpectrumRequest::new(sys.clone(), &isotope, grid.clone(), SolverConfig::new(eps));
    let result = spectrum(&req).map_err(classify_spectrum_error)?;
    let oracle = dense_spectrum(&sys, &grid, sys.damping_mu, &isotope, &limits).map_err(Failure::io)?;
    let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s_dev = result
        .points
        .iter()
        .zip(&oracle)
        .map(|(p, o)| (p.amplitude - o).abs())
        .fold(0.0f64, f64::max)
        / scale.max(f64::MIN_POSITIVE);
    rows.push(CheckRow::new("spectrum", s_dev, 1e4 * eps));

    println!("{:<20}  {:>13}  {:>10}  {:>6}", "check", "max_deviation", "tolerance", "status");
    for row in &rows {
        println!(
            "{:<20}  {:>13.3e}  {:>10.1e}  {:>6}",
            row.name,
            row.max_deviation,
            row.tolerance,
            if row.passed { "pass" } else { "FAIL" }
        );
    }
    let all_passed = rows.iter().all(|r| r.passed);
    let code = if all_passed {
        exit_code::OK
    } else {
        eprintln!("error: oracle comparison exceeded tolerance");
        exit_code::ORACLE_MISMATCH
    };

    let report_path = PathBuf::from("ttspin-validate.report.json");
    let report = json!({
        "eps": eps,
        "isotope": isotope,
        "checks": rows,
        "passed": all_passed,
    });
    std::fs::write(&report_path, serde_json::to_string_pretty(&report).expect("report serializes"))
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", report_path.display())))?;

    let mut manifest = RunManifest::new(
        "validate",
        Some(&args.input),
        json!({ "eps": eps }),
    );
    manifest.record_output(&report_path);
    manifest.record_timing("total", ms(t_total));
    manifest.exit_code = code;
    manifest.write(Path::new("ttspin-validate.manifest.json"))?;
    Ok(code)
}

/// Write a synthetic backbone-chain spin system.
#[derive(Args, Debug)]
pub struct FixtureArgs {
    /// Chain length in spins.
    #[arg(long)]
    pub spins: usize,
    /// Damping rate mu in rad/s.
    #[arg(long, default_value_t = 20.0)]
    pub mu: f64,
    /// Seed for the offset jitter.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output JSON file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn fixture(args: &FixtureArgs) -> Result<i32, Failure> {
    let t_total = Instant::now();
    if args.spins == 0 {
        return Err(Failure::schema("--spins must be at least 1"));
    }
    if !(args.mu > 0.0) || !args.mu.is_finite() {
        return Err(Failure::schema(format!(
            "--mu must be positive and finite, got {}",
            args.mu
        )));
    }
    let sys = backbone_chain(args.spins, args.mu, args.seed);
    let mut text = sys.to_json();
    text.push('\n');
    std::fs::write(&args.out, text)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", args.out.display())))?;
    println!(
        "wrote {} ({} spins, {} couplings)",
        args.out.display(),
        sys.n_spins(),
        sys.couplings.len()
    );

    let manifest_dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut manifest = RunManifest::new(
        "fixture",
        None,
        json!({
            "spins": args.spins,
            "mu": args.mu,
            "seed": args.seed,
            "out": args.out.display().to_string(),
        }),
    );
    manifest.record_output(&args.out);
    manifest.record_timing("total", ms(t_total));
    manifest.write(&manifest_dir.join("ttspin-fixture.manifest.json"))?;
    Ok(exit_code::OK)
}
