//! Command-line front end: every pipeline stage behind one binary.
//!
//! Exit codes: 0 success, 2 input/domain error, 3 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use qnc::operator::{basis_criterion_check, build_matrix, UnitaryBasis, Variant};
use qnc::pairing::{eval_f, qnc, qnc_bound, CharacterTable};
use qnc::real::HighPrecisionReal;
use qnc::spectral::{det_from_spectrum, det_grid_csv, singular_values, spectrum_csv};
use qnc::zeros::{contradiction_report, load_zeros, ZetaZeroTable};
use qnc::QncError;

#[derive(Parser)]
#[command(
    name = "qnc",
    about = "Quantum non-commutativity of primes: pairing values, operator truncations, spectra, determinants, and the zeta-zero comparison",
    version
)]
struct Cli {
    /// Working precision in bits (>= 64)
    #[arg(long, global = true, default_value_t = 192)]
    precision: usize,

    /// Truncation dimension
    #[arg(long, global = true, default_value_t = 25)]
    n: usize,

    /// Operator variant
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,

    /// Character table file (required for --variant weighted)
    #[arg(long, global = true)]
    character: Option<PathBuf>,

    /// Zero-ordinate file; the bundled 100-zero table is used when omitted
    #[arg(long, global = true)]
    zeros: Option<PathBuf>,

    /// Stdout format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Seed for randomized basis checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for file outputs
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Standard,
    Modified,
    Weighted,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// Plain text (files are always CSV)
    Csv,
    /// JSON on stdout
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the pairing qnc(x, y) with its error budget
    Qnc {
        /// First argument, a decimal number > 1
        x: String,
        /// Second argument, a decimal number > 1
        y: String,
    },
    /// Build a truncation; write matrix.csv and matrix.json to --out
    Matrix,
    /// Compute the spectrum; write spectrum.csv (and det_grid.csv) to --out
    Spectrum {
        /// Sample det(I - wR) on real w: min:max:count
        #[arg(long)]
        det_grid: Option<String>,
        /// Run the orthonormal-basis summability check with a seeded basis
        #[arg(long)]
        basis_check: bool,
    },
    /// Full pipeline: trace-norm budget vs reciprocal zero sums; writes report.json
    Compare,
}

fn main() -> ExitCode {
    // default SIGPIPE disposition so piping into `head` ends quietly
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<(), QncError> {
    if cli.precision < 64 {
        return Err(QncError::InvalidArgument(
            "precision must be at least 64 bits".into(),
        ));
    }
    match &cli.command {
        Command::Qnc { x, y } => cmd_qnc(cli, x, y),
        Command::Matrix => cmd_matrix(cli),
        Command::Spectrum {
            det_grid,
            basis_check,
        } => cmd_spectrum(cli, det_grid.as_deref(), *basis_check),
        Command::Compare => cmd_compare(cli),
    }
}

fn variant(cli: &Cli) -> Result<Variant, QncError> {
    match cli.variant {
        VariantArg::Standard => Ok(Variant::Standard),
        VariantArg::Modified => Ok(Variant::Modified),
        VariantArg::Weighted => {
            let path = cli.character.as_ref().ok_or_else(|| {
                QncError::InvalidArgument(
                    "--variant weighted requires --character <file>".into(),
                )
            })?;
            let text = fs::read_to_string(path)?;
            Ok(Variant::Weighted(CharacterTable::parse(
                &text,
                cli.precision,
            )?))
        }
    }
}

fn zero_table(cli: &Cli) -> Result<ZetaZeroTable, QncError> {
    match &cli.zeros {
        Some(path) => load_zeros(path),
        None => Ok(ZetaZeroTable::bundled()),
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn cmd_qnc(cli: &Cli, x_raw: &str, y_raw: &str) -> Result<(), QncError> {
    let bits = cli.precision;
    let x = HighPrecisionReal::parse_decimal(x_raw, bits)?;
    let y = HighPrecisionReal::parse_decimal(y_raw, bits)?;
    let value = qnc(&x, &y, 0.5f64.powi(40))?;

    // propagated truncation budget of the two series evaluations
    let one = HighPrecisionReal::one(bits);
    let truncation = if x == y {
        HighPrecisionReal::zero(bits)
    } else {
        let fx = eval_f(&x, &y, 1e-30)?;
        let fy = eval_f(&y, &x, 1e-30)?;
        let num = x
            .mul(&y.sub(&one))
            .mul(&fx.truncation_error)
            .add(&y.mul(&x.sub(&one)).mul(&fy.truncation_error));
        num.div(&x.mul(&y).mul(&HighPrecisionReal::from_u64(12, bits)))
            .abs()
    };

    let prime_pair = match (x.to_u64_exact(), y.to_u64_exact()) {
        (Some(p), Some(q)) if is_prime(p) && is_prime(q) => Some((p, q)),
        _ => None,
    };
    let bound = prime_pair.map(|(p, q)| qnc_bound(p, q, bits));

    match cli.format {
        FormatArg::Csv => {
            println!("qnc({x_raw}, {y_raw}) = {value}");
            println!("truncation_error <= {truncation}");
            if let Some(b) = &bound {
                println!("closed_form_bound = {b}");
            }
        }
        FormatArg::Json => {
            let mut obj = serde_json::json!({
                "x": x_raw,
                "y": y_raw,
                "value": value.to_string(),
                "truncation_error": truncation.to_string(),
            });
            if let Some(b) = &bound {
                obj["bound"] = serde_json::Value::String(b.to_string());
            }
            println!("{}", serde_json::to_string_pretty(&obj).expect("serializable"));
        }
    }
    Ok(())
}

fn cmd_matrix(cli: &Cli) -> Result<(), QncError> {
    let m = build_matrix(cli.n, &variant(cli)?, cli.precision)?;
    fs::create_dir_all(&cli.out)?;
    let csv_path = cli.out.join("matrix.csv");
    let mut csv = Vec::new();
    m.write_csv(&mut csv)?;
    fs::write(&csv_path, csv)?;
    let sidecar_path = cli.out.join("matrix.json");
    fs::write(
        &sidecar_path,
        serde_json::to_string_pretty(&m.sidecar()).expect("serializable"),
    )?;

    let abs = m.entry_abs_sum();
    let hs = m.hs_norm_sq();
    match cli.format {
        FormatArg::Csv => {
            println!("n = {}, variant = {}, precision = {} bits", m.n(), m.variant_kind(), m.precision_bits());
            println!("entry_abs_sum = {abs}");
            println!("hs_norm_sq = {hs}");
            println!("tail: {}", m.tail_bound());
            println!("wrote {} and {}", csv_path.display(), sidecar_path.display());
        }
        FormatArg::Json => {
            let obj = serde_json::json!({
                "n": m.n(),
                "variant": m.variant_kind().to_string(),
                "precision_bits": m.precision_bits(),
                "entry_abs_sum": abs.to_string(),
                "hs_norm_sq": hs.to_string(),
                "tail_bound": m.tail_bound().to_string(),
                "files": {
                    "csv": csv_path.display().to_string(),
                    "sidecar": sidecar_path.display().to_string(),
                },
            });
            println!("{}", serde_json::to_string_pretty(&obj).expect("serializable"));
        }
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, QncError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(QncError::InvalidArgument(format!(
            "det grid must be min:max:count, got {spec:?}"
        )));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|e| QncError::InvalidArgument(format!("bad grid min: {e}")))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|e| QncError::InvalidArgument(format!("bad grid max: {e}")))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| QncError::InvalidArgument(format!("bad grid count: {e}")))?;
    if count < 2 || !(max > min) {
        return Err(QncError::InvalidArgument(
            "det grid needs max > min and count >= 2".into(),
        ));
    }
    Ok((0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_spectrum(cli: &Cli, det_grid: Option<&str>, basis_check: bool) -> Result<(), QncError> {
    let m = build_matrix(cli.n, &variant(cli)?, cli.precision)?;
    let s = singular_values(&m)?;
    fs::create_dir_all(&cli.out)?;
    let spec_path = cli.out.join("spectrum.csv");
    fs::write(&spec_path, spectrum_csv(&s))?;

    let mut grid_path = None;
    if let Some(gspec) = det_grid {
        let samples: Vec<(Complex64, Complex64)> = parse_grid(gspec)?
            .into_iter()
            .map(|w| {
                let wc = Complex64::new(w, 0.0);
                (wc, det_from_spectrum(&s, wc))
            })
            .collect();
        let path = cli.out.join("det_grid.csv");
        fs::write(&path, det_grid_csv(&samples))?;
        grid_path = Some(path);
    }

    let basis_value = if basis_check {
        let basis = UnitaryBasis::random(m.n(), cli.seed, cli.precision);
        Some(basis_criterion_check(&m, &basis)?)
    } else {
        None
    };

    match cli.format {
        FormatArg::Csv => {
            println!(
                "n = {}, variant = {}, pairing_defect = {:e}, solver_tolerance = {:e}",
                m.n(),
                m.variant_kind(),
                s.pairing_defect,
                s.solver_tolerance
            );
            println!("trace_norm = {:e}", s.trace_norm());
            if let Some(v) = &basis_value {
                println!("basis_criterion (seed {}) = {v}", cli.seed);
                println!("entry_abs_sum = {}", m.entry_abs_sum());
            }
            println!("wrote {}", spec_path.display());
            if let Some(p) = &grid_path {
                println!("wrote {}", p.display());
            }
        }
        FormatArg::Json => {
            let mut obj = serde_json::json!({
                "n": m.n(),
                "variant": m.variant_kind().to_string(),
                "lambdas": s.lambdas,
                "pairing_defect": s.pairing_defect,
                "solver_tolerance": s.solver_tolerance,
                "trace_norm": s.trace_norm(),
                "files": { "spectrum": spec_path.display().to_string() },
            });
            if let Some(v) = &basis_value {
                obj["basis_criterion"] = serde_json::Value::String(v.to_string());
                obj["seed"] = serde_json::json!(cli.seed);
            }
            if let Some(p) = &grid_path {
                obj["files"]["det_grid"] = serde_json::Value::String(p.display().to_string());
            }
            println!("{}", serde_json::to_string_pretty(&obj).expect("serializable"));
        }
    }
    Ok(())
}

fn cmd_compare(cli: &Cli) -> Result<(), QncError> {
    if cli.variant != VariantArg::Standard {
        return Err(QncError::InvalidArgument(
            "the comparison report is defined for the standard variant".into(),
        ));
    }
    let table = zero_table(cli)?;
    let m = build_matrix(cli.n, &Variant::Standard, cli.precision)?;
    let s = singular_values(&m)?;
    let tail = m
        .tail_bound()
        .as_finite()
        .expect("standard variant has a finite tail")
        .clone();
    let report = contradiction_report(&s, &tail, &table);

    fs::create_dir_all(&cli.out)?;
    let report_path = cli.out.join("report.json");
    fs::write(
        &report_path,
        serde_json::to_string_pretty(&report).expect("serializable"),
    )?;

    match cli.format {
        FormatArg::Csv => {
            print!("{report}");
            println!("zeros: {}", table.source());
            println!("wrote {}", report_path.display());
        }
        FormatArg::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        }
    }
    Ok(())
}
