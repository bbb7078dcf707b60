//! Batch command-line surface: compute, decompose, transport, verify, and
//! cross-check two-qubit states from JSON files, emitting machine-readable
//! reports on stdout and one-line diagnostics on stderr.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 separable
//! input where an entangled one is required, 5 certificate failure, 6 bad
//! (annihilating or non-invertible) map.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bsakit::entanglement::{concurrence, entanglement_of_formation, is_separable};
use bsakit::error::Error;
use bsakit::io::{
    parse_map_json, parse_state_json, validate_state, LqccMapJson, LsDecompositionJson, Report,
    StateInput,
};
use bsakit::lqcc::{
    apply_lqcc, concurrence_transform_check, transport_decomposition,
    verify_transported_optimality,
};
use bsakit::lsd::{ls_decompose_bd, verify_optimality, wronskian_checks};
use bsakit::oracle::bsa_search;
use bsakit::qstate::{random_bd, Region};
use bsakit::Tolerances;

#[derive(Parser)]
#[command(
    name = "bsakit",
    about = "Two-qubit concurrence, separability, optimal Lewenstein-Sanpera \
             decompositions, LQCC transport, and brute-force cross-checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence, R-matrix eigenvalues and entanglement of formation.
    Concurrence(StateArg),
    /// PPT separability verdict with the witnessing eigenvalue.
    Separable(StateArg),
    /// Optimal Lewenstein-Sanpera decomposition of a Bell-diagonal state.
    Lsd(LsdArgs),
    /// Apply an LQCC map; optionally transport the decomposition or check
    /// the concurrence transformation law.
    Lqcc(LqccArgs),
    /// Write seeded random Bell-diagonal state files.
    Random(RandomArgs),
    /// Brute-force best-separable-approximation search.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct StateArg {
    /// State JSON: {"v":1,"p":[..]} or {"v":1,"dim":4,"re":[[..]],"im":[[..]]}.
    state: PathBuf,
}

#[derive(Args)]
struct LsdArgs {
    state: PathBuf,
    /// Attach the optimality certificate; exit 5 if it fails.
    #[arg(long)]
    verify: bool,
    /// Cross-check lambda with the brute-force search at this budget.
    #[arg(long, value_name = "BUDGET")]
    oracle: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LqccArgs {
    state: PathBuf,
    /// Map JSON: {"v":1,"U_A":..,"U_B":..,"f_a":{..},"f_b":{..}}.
    map: PathBuf,
    /// Transport the optimal decomposition through the map.
    #[arg(long)]
    transport: bool,
    /// Check the multiplicative concurrence transformation law.
    #[arg(long)]
    check_law: bool,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = ["any", "entangled"], default_value = "any")]
    region: String,
    /// Output directory for state_<k>.json files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    state: PathBuf,
    #[arg(long, default_value_t = 4000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Map library errors onto the exit-code partition.
fn classify(err: Error) -> Failure {
    let code = match &err {
        Error::NotEntangled(_) => 4,
        Error::CertificateFailed(_) => 5,
        Error::Annihilated(_) | Error::NotInvertible(_) => 6,
        _ => 3,
    };
    Failure::new(code, err.to_string())
}

fn tolerances() -> Result<Tolerances, Failure> {
    let base = Tolerances::default();
    match std::env::var("BSAKIT_TOLERANCE_SCALE") {
        Ok(s) => {
            let factor: f64 = s
                .parse()
                .map_err(|_| Failure::new(2, format!("BSAKIT_TOLERANCE_SCALE={s} is not a number")))?;
            if !(factor.is_finite() && factor > 0.0) {
                return Err(Failure::new(
                    2,
                    "BSAKIT_TOLERANCE_SCALE must be positive and finite",
                ));
            }
            Ok(base.scaled(factor))
        }
        Err(_) => Ok(base),
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))
}

fn load_state(
    path: &PathBuf,
    tol: &Tolerances,
    report: &mut Report,
) -> Result<StateInput, Failure> {
    let text = read_file(path)?;
    report.record_input("state", text.as_bytes());
    let parsed = parse_state_json(&text)
        .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    validate_state(&parsed, tol).map_err(classify)
}

fn load_map(path: &PathBuf, report: &mut Report) -> Result<bsakit::lqcc::LqccMap, Failure> {
    let text = read_file(path)?;
    report.record_input("map", text.as_bytes());
    let parsed: LqccMapJson = parse_map_json(&text)
        .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    parsed.to_map().map_err(classify)
}

fn emit(report: &Report) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::new(3, format!("cannot serialize report: {e}")))?;
    println!("{text}");
    Ok(())
}

fn run() -> Result<(), Failure> {
    let cli = Cli::parse();
    let tol = tolerances()?;
    let started = Instant::now();

    match cli.command {
        Command::Concurrence(args) => {
            let mut report = Report::new("concurrence", &tol);
            let input = load_state(&args.state, &tol, &mut report)?;
            let rep = concurrence(&input.rho, &tol).map_err(classify)?;
            let eof = entanglement_of_formation(&input.rho, &tol).map_err(classify)?;
            report.outputs = serde_json::json!({
                "lambdas": rep.lambdas,
                "concurrence": rep.concurrence,
                "entanglement_of_formation": eof,
                "bell_diagonal": input.bd.map(|b| b.p()),
            });
            report.wall_time_ms = started.elapsed().as_millis();
            emit(&report)
        }
        Command::Separable(args) => {
            let mut report = Report::new("separable", &tol);
            let input = load_state(&args.state, &tol, &mut report)?;
            let verdict = is_separable(&input.rho, &tol).map_err(classify)?;
            report.outputs = serde_json::to_value(&verdict)
                .map_err(|e| Failure::new(3, e.to_string()))?;
            report.wall_time_ms = started.elapsed().as_millis();
            emit(&report)
        }
        Command::Lsd(args) => {
            let mut report = Report::new("lsd", &tol);
            report.seed = Some(args.seed);
            let input = load_state(&args.state, &tol, &mut report)?;
            let bd = input.bd.ok_or_else(|| {
                Failure::new(3, "lsd needs a Bell-diagonal state (off-diagonal Bell entries found)")
            })?;
            let verdict = is_separable(&input.rho, &tol).map_err(classify)?;
            let d = ls_decompose_bd(&bd, &tol).map_err(|e| {
                if matches!(e, Error::NotEntangled(_)) {
                    // Print the witness: the PPT eigenvalue and the closed form.
                    eprintln!(
                        "separable input: max p_i = {} <= 1/2, min PT eigenvalue {}",
                        bd.max_p(),
                        verdict.min_pt_eigenvalue
                    );
                }
                classify(e)
            })?;
            let mut outputs = serde_json::json!({
                "decomposition": LsDecompositionJson::from_decomposition(&d),
                "wronskian": d
                    .separable_bd
                    .as_ref()
                    .and_then(|b| wronskian_checks(b).ok()),
            });
            let mut residuals = serde_json::Map::new();
            if args.verify {
                let cert = verify_optimality(&d, &tol).map_err(classify)?;
                let pass = cert.pass;
                residuals.insert(
                    "certificate".into(),
                    serde_json::to_value(&cert).map_err(|e| Failure::new(3, e.to_string()))?,
                );
                if !pass {
                    report.outputs = outputs;
                    report.residuals = Some(serde_json::Value::Object(residuals));
                    report.wall_time_ms = started.elapsed().as_millis();
                    emit(&report)?;
                    return Err(Failure::new(5, "optimality certificate failed"));
                }
            }
            if let Some(budget) = args.oracle {
                let res = bsa_search(&input.rho, budget, args.seed, &tol).map_err(classify)?;
                let gap = (res.best_lambda - d.lambda).abs();
                residuals.insert(
                    "oracle_gap".into(),
                    serde_json::json!({
                        "best_lambda": res.best_lambda,
                        "lambda": d.lambda,
                        "gap": gap,
                        "evaluations": res.evaluations,
                        "converged": res.converged,
                    }),
                );
            }
            outputs["lambda"] = serde_json::json!(d.lambda);
            report.outputs = outputs;
            if !residuals.is_empty() {
                report.residuals = Some(serde_json::Value::Object(residuals));
            }
            report.wall_time_ms = started.elapsed().as_millis();
            emit(&report)
        }
        Command::Lqcc(args) => {
            let mut report = Report::new("lqcc", &tol);
            let input = load_state(&args.state, &tol, &mut report)?;
            let map = load_map(&args.map, &mut report)?;
            let (rho_out, success) = apply_lqcc(&map, &input.rho, &tol).map_err(classify)?;
            let mut outputs = serde_json::json!({
                "state": bsakit::io::MatrixJson::from_matrix(rho_out.matrix()),
                "success_probability": success,
            });
            let mut residuals = serde_json::Map::new();
            if args.check_law {
                let chk = concurrence_transform_check(&map, &input.rho, &tol).map_err(classify)?;
                residuals.insert(
                    "concurrence_law".into(),
                    serde_json::to_value(&chk).map_err(|e| Failure::new(3, e.to_string()))?,
                );
            }
            if args.transport {
                let bd = input.bd.ok_or_else(|| {
                    Failure::new(3, "transport needs a Bell-diagonal source state")
                })?;
                let d = ls_decompose_bd(&bd, &tol).map_err(classify)?;
                let td = transport_decomposition(&map, &d, &tol).map_err(classify)?;
                let cert = verify_transported_optimality(&map, &td, &tol).map_err(classify)?;
                outputs["transported"] =
                    serde_json::to_value(LsDecompositionJson::from_decomposition(&td))
                        .map_err(|e| Failure::new(3, e.to_string()))?;
                residuals.insert(
                    "transported_certificate".into(),
                    serde_json::to_value(&cert).map_err(|e| Failure::new(3, e.to_string()))?,
                );
            }
            report.outputs = outputs;
            if !residuals.is_empty() {
                report.residuals = Some(serde_json::Value::Object(residuals));
            }
            report.wall_time_ms = started.elapsed().as_millis();
            emit(&report)
        }
        Command::Random(args) => {
            use rand::SeedableRng;
            let region = if args.region == "entangled" {
                Region::Entangled
            } else {
                Region::Any
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            let mut written = Vec::new();
            for k in 0..args.count {
                let bd = random_bd(&mut rng, region);
                let file = args.out.join(format!("state_{k}.json"));
                let body = serde_json::json!({"v": 1, "p": bd.p()});
                std::fs::write(&file, serde_json::to_string(&body).unwrap())
                    .map_err(|e| Failure::new(2, format!("cannot write {}: {e}", file.display())))?;
                written.push(file.display().to_string());
            }
            let mut report = Report::new("random", &tol);
            report.seed = Some(args.seed);
            report.outputs = serde_json::json!({
                "count": args.count,
                "region": args.region,
                "files": written,
            });
            report.wall_time_ms = started.elapsed().as_millis();
            emit(&report)
        }
        Command::Oracle(args) => {
            let mut report = Report::new("oracle", &tol);
            report.seed = Some(args.seed);
            let input = load_state(&args.state, &tol, &mut report)?;
            let res = bsa_search(&input.rho, args.budget, args.seed, &tol).map_err(classify)?;
            report.outputs = serde_json::json!({
                "best_lambda": res.best_lambda,
                "best_psi": bsakit::io::VectorJson::from_vector(res.best_psi.vector()),
                "evaluations": res.evaluations,
                "converged": res.converged,
            });
            report.wall_time_ms = started.elapsed().as_millis();
            emit(&report)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bsakit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
