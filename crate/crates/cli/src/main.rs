use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sinklab_core::{
    family_determinant, format_rational, parse_matrix, parse_rational, pullback, pullback_chain_probe, search_one_step,
    sinkhorn_iterate, verify_one_step, write_matrix, AnyMatrix, Error, FamilyParams, IterateOptions, Matrix, Predicate,
    PullbackResult, Rational, Scalar, SearchMode, SearchSpec, DEFAULT_MAX_STEPS,
};

#[derive(Parser, Debug)]
#[command(name = "sinklab", version, about = "Alternate row/column matrix scaling laboratory")]
struct Cli {
    /// Emit JSON instead of plain text; rationals are "p/q" strings.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the alternate scaling algorithm on a matrix file.
    Scale {
        /// Matrix file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Stopping tolerance for float runs.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Run in exact rational arithmetic (requires a rational matrix).
        #[arg(long)]
        exact: bool,
        /// Print the matrix after every step.
        #[arg(long)]
        intermediates: bool,
    },
    /// Build a matrix from the two-parameter one-step family.
    Generate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational_arg)]
        x: Rational,
        #[arg(long, value_parser = rational_arg)]
        z: Rational,
        #[arg(long, value_enum, default_value_t = Emit::Matrix)]
        emit: Emit,
    },
    /// Stochasticity and determinant report.
    Check {
        #[arg(long, default_value = "-")]
        input: String,
        /// Tolerance for float matrices.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Solve for the diagonal Z with ZA column stochastic.
    Pullback {
        #[arg(long, default_value = "-")]
        input: String,
        /// Keep pulling back, alternating sides, up to this many links.
        #[arg(long)]
        chain: Option<usize>,
    },
    /// Search for one-step matrices with bounded denominators.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bound: u64,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Required for randomized mode.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value = "one-step-nonsingular")]
        predicate: Predicate,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    Matrix,
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exhaustive,
    Randomized,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not an integer or p/q rational"))
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Invariant(e.to_string())
        }
    }
}

type CmdResult = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let json = cli.json;
    match cli.command {
        Command::Scale {
            input,
            max_steps,
            tolerance,
            exact,
            intermediates,
        } => scale(&read_matrix(&input)?, max_steps, tolerance, exact, intermediates, json),
        Command::Generate { k, ell, n, x, z, emit } => generate(FamilyParams::new(k, ell, n, x, z)?, emit, json),
        Command::Check { input, tolerance } => check(&read_matrix(&input)?, tolerance, json),
        Command::Pullback { input, chain } => {
            let a = read_matrix(&input)?.into_rational()?;
            pullback_cmd(&a, chain, json)
        }
        Command::Search {
            n,
            bound,
            mode,
            seed,
            samples,
            predicate,
            workers,
        } => {
            let mode = match mode {
                Mode::Exhaustive => SearchMode::Exhaustive,
                Mode::Randomized => {
                    let seed = seed.ok_or_else(|| Failure::Input("randomized mode needs --seed".into()))?;
                    SearchMode::Randomized { seed, samples }
                }
            };
            let spec = SearchSpec {
                n,
                denominator_bound: bound,
                mode,
                predicate,
                planted: Vec::new(),
            };
            let report = search_one_step(&spec, workers)?;
            Ok(if json { to_json(&report) } else { report.to_text() })
        }
    }
}

fn read_matrix(path: &str) -> Result<AnyMatrix, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?
    };
    Ok(parse_matrix(&text)?)
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn scale(
    a: &AnyMatrix,
    max_steps: usize,
    tolerance: Option<f64>,
    exact: bool,
    intermediates: bool,
    json: bool,
) -> CmdResult {
    if exact {
        if tolerance.is_some_and(|t| t != 0.0) {
            return Err(Error::NonzeroToleranceInExactMode.into());
        }
        let a = a.clone().into_rational()?;
        let trace = sinkhorn_iterate(&a, &IterateOptions::with_max_steps(max_steps))?;
        Ok(if json {
            to_json(&trace)
        } else {
            trace.to_report(intermediates)
        })
    } else {
        let opts = IterateOptions {
            max_steps,
            tolerance: tolerance.unwrap_or_else(f64::default_tolerance),
        };
        let trace = sinkhorn_iterate(&a.to_f64(), &opts)?;
        Ok(if json {
            to_json(&trace)
        } else {
            trace.to_report(intermediates)
        })
    }
}

fn generate(params: FamilyParams, emit: Emit, json: bool) -> CmdResult {
    let a = params.matrix();
    if let Emit::Matrix = emit {
        return Ok(if json { to_json(&a) } else { write_matrix(&a) });
    }
    let report = verify_one_step(&params)?;
    let det = family_determinant(&params)?;
    if !report.all_pass() {
        return Err(Failure::Invariant(format!("one-step verification failed: {report:?}")));
    }
    if json {
        return Ok(to_json(&json!({
            "params": params_json(&params),
            "checks": report,
            "determinant": format_rational(&det.determinant),
            "determinant_case": det.case,
            "matrix": a,
            "scaled": report.scaled,
        })));
    }
    let pass = |b: bool| if b { "pass" } else { "fail" };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "params k={} l={} n={} x={} z={} y={} w={}",
        params.k,
        params.ell,
        params.n,
        format_rational(&params.x),
        format_rational(&params.z),
        format_rational(&params.y),
        format_rational(&params.w)
    );
    let _ = writeln!(out, "rows_sum_to_one {}", pass(report.rows_sum_to_one));
    let _ = writeln!(
        out,
        "column_sums_match {} outer={} inner={}",
        pass(report.column_sums_match),
        format_rational(&params.outer_col_sum()),
        format_rational(&params.inner_col_sum())
    );
    let _ = writeln!(
        out,
        "scaled_doubly_stochastic {}",
        pass(report.scaled_doubly_stochastic)
    );
    let _ = writeln!(out, "scaling_count_is_one {}", pass(report.scaling_count_is_one));
    let case = serde_json::to_value(det.case).expect("enum serializes");
    let _ = writeln!(
        out,
        "determinant {} case {}",
        format_rational(&det.determinant),
        case.as_str().unwrap_or_default()
    );
    out.push_str("matrix\n");
    out.push_str(&write_matrix(&a));
    out.push_str("column_scaled\n");
    out.push_str(&write_matrix(&report.scaled));
    Ok(out)
}

fn params_json(p: &FamilyParams) -> serde_json::Value {
    json!({
        "k": p.k, "ell": p.ell, "n": p.n,
        "x": format_rational(&p.x), "z": format_rational(&p.z),
        "y": format_rational(&p.y), "w": format_rational(&p.w),
    })
}

fn check(a: &AnyMatrix, tolerance: Option<f64>, json: bool) -> CmdResult {
    match a {
        AnyMatrix::Rational(m) => {
            if tolerance.is_some_and(|t| t != 0.0) {
                return Err(Error::NonzeroToleranceInExactMode.into());
            }
            check_report(m, &Rational::default_tolerance(), json)
        }
        AnyMatrix::Float(m) => check_report(m, &tolerance.unwrap_or_else(f64::default_tolerance), json),
    }
}

trait Determinant: Scalar {
    fn det(m: &Matrix<Self>) -> Result<Self, Error>;
}

impl Determinant for Rational {
    fn det(m: &Matrix<Self>) -> Result<Self, Error> {
        m.determinant()
    }
}

impl Determinant for f64 {
    fn det(m: &Matrix<Self>) -> Result<Self, Error> {
        m.determinant()
    }
}

fn check_report<T: Determinant>(m: &Matrix<T>, tolerance: &T, json: bool) -> CmdResult {
    let report = m.stochasticity(tolerance)?;
    let det = if m.is_square() { Some(T::det(m)?) } else { None };
    let texts = |v: Vec<T>| v.iter().map(T::to_text).collect::<Vec<_>>();
    if json {
        return Ok(to_json(&json!({
            "kind": T::KIND,
            "rows": m.rows(),
            "cols": m.cols(),
            "row_sums": m.row_sums().iter().map(T::to_json).collect::<Vec<_>>(),
            "col_sums": m.col_sums().iter().map(T::to_json).collect::<Vec<_>>(),
            "positive": m.is_positive(),
            "stochasticity": report,
            "determinant": det.as_ref().map(T::to_json),
        })));
    }
    let mut out = String::new();
    let _ = writeln!(out, "kind {}", T::KIND);
    let _ = writeln!(out, "dims {} {}", m.rows(), m.cols());
    let _ = writeln!(out, "row_sums {}", texts(m.row_sums()).join(" "));
    let _ = writeln!(out, "col_sums {}", texts(m.col_sums()).join(" "));
    let _ = writeln!(out, "positive {}", m.is_positive());
    let _ = writeln!(out, "row_stochastic {}", report.row_stochastic);
    let _ = writeln!(out, "col_stochastic {}", report.col_stochastic);
    let _ = writeln!(out, "doubly_stochastic {}", report.doubly_stochastic());
    let _ = writeln!(out, "max_row_deviation {}", report.max_row_deviation.to_text());
    let _ = writeln!(out, "max_col_deviation {}", report.max_col_deviation.to_text());
    match det {
        Some(d) => {
            let _ = writeln!(out, "determinant {}", d.to_text());
        }
        None => out.push_str("determinant undefined\n"),
    }
    Ok(out)
}

fn pullback_text(out: &mut String, r: &PullbackResult) {
    let z: Vec<_> = r.z.iter().map(format_rational).collect();
    let signs: Vec<_> = r.sign_pattern.iter().map(ToString::to_string).collect();
    let _ = writeln!(
        out,
        "side {}",
        serde_json::to_value(r.side).expect("enum").as_str().unwrap_or_default()
    );
    let _ = writeln!(out, "z {}", z.join(" "));
    let _ = writeln!(out, "signs {}", signs.join(" "));
    let _ = writeln!(out, "all_positive {}", r.all_positive);
    if !r.all_positive {
        out.push_str("note no positivity-restoring adjustment is attempted\n");
    }
    out.push_str(&write_matrix(&r.b));
}

fn pullback_cmd(a: &Matrix<Rational>, chain: Option<usize>, json: bool) -> CmdResult {
    let Some(depth) = chain else {
        let r = pullback(a)?;
        if json {
            return Ok(to_json(&r));
        }
        let mut out = String::new();
        pullback_text(&mut out, &r);
        return Ok(out);
    };
    let probe = pullback_chain_probe(a, depth)?;
    if json {
        return Ok(to_json(&probe));
    }
    let mut out = String::new();
    for (i, link) in probe.links.iter().enumerate() {
        let _ = writeln!(out, "link {}", i + 1);
        pullback_text(&mut out, link);
    }
    let _ = writeln!(out, "chain_length {}", probe.links.len());
    let _ = writeln!(out, "stop {}", probe.stop);
    Ok(out)
}
