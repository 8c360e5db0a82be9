//! Command-line front end: decompose, classify, count, graph, apply, verify.
//!
//! Exit codes: 0 success, 1 negative classification, 2 decomposition
//! failure, 3 numerical-check failure, 64 usage/parse errors, 65 dimension
//! or arity mismatches.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spectracalc::calculus::{self, SeriesEval};
use spectracalc::document::{self, InputDocument, MatrixDocument};
use spectracalc::hybrid::{self, HybridOperatorSpec};
use spectracalc::jordan::{self, JordanSpec, SpectralFamily};
use spectracalc::scalar::Tolerance;
use spectracalc::{analogy, asg, enumeration};

const EXIT_NOT_ANALOGOUS: u8 = 1;
const EXIT_DECOMPOSE: u8 = 2;
const EXIT_CHECK: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DIMENSION: u8 = 65;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(
    name = "spectracalc",
    about = "Projector/nilpotent decomposition, analogous-family classification, and matrix functional calculus",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Relative rank threshold (default 1e-9)
    #[arg(long)]
    rank_eps: Option<f64>,
    /// Reconstruction residual bound (default 1e-8)
    #[arg(long)]
    recon_eps: Option<f64>,
    /// Eigenvalue cluster separation (default 1e-7)
    #[arg(long)]
    cluster_eps: Option<f64>,
}

impl TolArgs {
    /// CLI flags override per-document tolerances, which override defaults.
    fn resolve(&self, doc_tol: Option<&Tolerance>) -> Tolerance {
        let base = doc_tol.cloned().unwrap_or_default();
        Tolerance::new(
            self.rank_eps.unwrap_or(base.rank_eps),
            self.recon_eps.unwrap_or(base.recon_eps),
            self.cluster_eps.unwrap_or(base.cluster_eps),
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a matrix document and print its Jordan structure, family,
    /// and verification report
    Decompose {
        input: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        /// Full-precision JSON output instead of 4-decimal pretty printing
        #[arg(long)]
        json: bool,
        /// Pretty output (default)
        #[arg(long, conflicts_with = "json")]
        pretty: bool,
    },
    /// Decide whether two documents are analogous and verify the structural
    /// propositions
    Classify {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Count analogous families for a dimension
    Count {
        m: usize,
        /// Also print the closed-form estimate for K equal-multiplicity
        /// eigenvalue groups
        #[arg(long, value_name = "K")]
        asymptotic: Option<usize>,
        /// Print both the literal count and the unordered-multiset count
        #[arg(long)]
        both_conventions: bool,
        /// Cap on m (default 200)
        #[arg(long, default_value_t = enumeration::DEFAULT_FAMILY_CAP)]
        cap: usize,
    },
    /// Export the analogous structure graph as Graphviz DOT
    Graph {
        input: PathBuf,
        /// Write DOT to this file instead of stdout
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Evaluate a function of one or more matrices
    Apply {
        /// Function spec file ({"builtin": ...} or {"series": ...})
        function: PathBuf,
        /// Matrix or hybrid documents, one per function argument
        matrices: Vec<PathBuf>,
        /// Truncation degree for the series oracle
        #[arg(long, default_value_t = 30)]
        oracle_degree: u32,
        /// Compare against the truncated series oracle and fail above 1e-6
        #[arg(long)]
        check: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Decompose and run the family verification report only
    Verify {
        input: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult<ExitCode> {
    match command {
        Command::Decompose {
            input,
            tol,
            json,
            pretty: _,
        } => cmd_decompose(&input, &tol, json),
        Command::Classify { a, b, tol } => cmd_classify(&a, &b, &tol),
        Command::Count {
            m,
            asymptotic,
            both_conventions,
            cap,
        } => cmd_count(m, asymptotic, both_conventions, cap),
        Command::Graph { input, dot, tol } => cmd_graph(&input, dot.as_deref(), &tol),
        Command::Apply {
            function,
            matrices,
            oracle_degree,
            check,
            json,
            tol,
        } => cmd_apply(&function, &matrices, oracle_degree, check, json, &tol),
        Command::Verify { input, tol } => cmd_verify(&input, &tol),
    }
}

fn series_opts() -> SeriesEval {
    let mut opts = SeriesEval::default();
    if let Ok(v) = std::env::var("SPECTRACALC_MAX_TERMS") {
        if let Ok(n) = v.parse::<usize>() {
            opts.max_terms = n;
        }
    }
    opts
}

fn load_json(path: &Path) -> CliResult<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_input(path: &Path, tol: &Tolerance) -> CliResult<InputDocument> {
    let value = load_json(path)?;
    document::parse_input(&value, tol)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

/// Effective tolerance for a document: CLI flags override the document's own
/// tolerances block.
fn doc_tolerance(doc: &InputDocument, tol_args: &TolArgs) -> Tolerance {
    match doc {
        InputDocument::Matrix(MatrixDocument::Numeric { tolerances, .. }) => {
            tol_args.resolve(tolerances.as_ref())
        }
        _ => tol_args.resolve(None),
    }
}

/// Jordan spec of a matrix document, decomposing numeric input.
fn resolve_spec(doc: &MatrixDocument, tol: &Tolerance) -> CliResult<JordanSpec> {
    match doc {
        MatrixDocument::Structured(spec) => Ok(spec.clone()),
        MatrixDocument::Numeric {
            matrix,
            eigenvalues,
            ..
        } => {
            let result = match eigenvalues {
                Some(evs) => jordan::decompose_with_eigenvalues(matrix, evs, tol),
                None => jordan::decompose(matrix, tol),
            };
            result.map_err(|e| Failure::new(EXIT_DECOMPOSE, e.to_string()))
        }
    }
}

fn resolve_family(spec: &JordanSpec, tol: &Tolerance) -> CliResult<SpectralFamily> {
    spec.extract_family(tol)
        .map_err(|e| Failure::new(EXIT_DECOMPOSE, e.to_string()))
}

fn cmd_decompose(input: &Path, tol_args: &TolArgs, json: bool) -> CliResult<ExitCode> {
    let doc = load_input(input, &tol_args.resolve(None))?;
    let tol = doc_tolerance(&doc, tol_args);
    let InputDocument::Matrix(matrix_doc) = doc else {
        return Err(Failure::new(
            EXIT_USAGE,
            "decompose expects a matrix document; use apply for hybrid specs",
        ));
    };
    let spec = resolve_spec(&matrix_doc, &tol)?;
    let family = resolve_family(&spec, &tol)?;
    let report = jordan::verify_family(&family, &tol);

    if json {
        let groups: Vec<serde_json::Value> = spec
            .groups()
            .iter()
            .map(|g| {
                serde_json::json!({
                    "eigenvalue": document::scalar_to_json(&g.eigenvalue),
                    "block_sizes": g.block_sizes,
                })
            })
            .collect();
        let items: Vec<serde_json::Value> = family
            .items()
            .iter()
            .map(|it| {
                serde_json::json!({
                    "group": it.group,
                    "block": it.block,
                    "eigenvalue": document::scalar_to_json(&it.eigenvalue),
                    "block_size": it.block_size,
                    "projector": document::matrix_to_json(&it.projector),
                    "nilpotent": document::matrix_to_json(&it.nilpotent),
                })
            })
            .collect();
        let out = serde_json::json!({
            "transform": document::matrix_to_json(spec.transform()),
            "groups": groups,
            "family": items,
            "verification": report.to_string().trim(),
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        print!("{}", render::spec_summary(&spec));
        println!("transform U =");
        print!("{}", render::matrix(spec.transform()));
        print!("{}", render::family(&family));
        println!("verification: {}", report.to_string().trim());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(a: &Path, b: &Path, tol_args: &TolArgs) -> CliResult<ExitCode> {
    let base_tol = tol_args.resolve(None);
    let doc_a = load_input(a, &base_tol)?;
    let doc_b = load_input(b, &base_tol)?;
    match (doc_a, doc_b) {
        (InputDocument::Hybrid(ha), InputDocument::Hybrid(hb)) => {
            match hybrid::analogous_hybrid(&ha, &hb, &base_tol) {
                Ok(result) => {
                    println!("analogous");
                    for (i, c) in result.ratios.discrete.iter().enumerate() {
                        println!("  discrete node {}: ratio {}", i + 1, render::scalar(c));
                    }
                    for (i, c) in result.ratios.continuous.iter().enumerate() {
                        println!("  continuous node {}: ratio {}", i + 1, render::scalar(c));
                    }
                    print!("{}", result.props);
                    Ok(ExitCode::SUCCESS)
                }
                Err(hybrid::HybridError::Structural(why))
                | Err(hybrid::HybridError::Invalid(why)) => {
                    println!("not analogous: {why}");
                    Ok(ExitCode::from(EXIT_NOT_ANALOGOUS))
                }
                Err(hybrid::HybridError::ZeroPairing) => {
                    println!("not analogous: {}", hybrid::HybridError::ZeroPairing);
                    Ok(ExitCode::from(EXIT_NOT_ANALOGOUS))
                }
                Err(e) => Err(Failure::new(EXIT_DECOMPOSE, e.to_string())),
            }
        }
        (InputDocument::Matrix(da), InputDocument::Matrix(db)) => {
            let tol_a = match &da {
                MatrixDocument::Numeric { tolerances, .. } => tol_args.resolve(tolerances.as_ref()),
                _ => base_tol.clone(),
            };
            let tol_b = match &db {
                MatrixDocument::Numeric { tolerances, .. } => tol_args.resolve(tolerances.as_ref()),
                _ => base_tol.clone(),
            };
            let spec_a = resolve_spec(&da, &tol_a)?;
            let spec_b = resolve_spec(&db, &tol_b)?;
            if spec_a.dimension() != spec_b.dimension() {
                return Err(Failure::new(
                    EXIT_DIMENSION,
                    format!(
                        "dimension mismatch: {} vs {}",
                        spec_a.dimension(),
                        spec_b.dimension()
                    ),
                ));
            }
            match analogy::check_analogous(&spec_a, &spec_b) {
                Ok(profile) => {
                    println!("analogous");
                    for (k, c) in profile.ratios.iter().enumerate() {
                        println!("  group {}: ratio {}", k + 1, render::scalar(c));
                    }
                    let report = analogy::verify_props(&spec_a, &spec_b, &profile, &base_tol)
                        .map_err(|e| Failure::new(EXIT_DECOMPOSE, e.to_string()))?;
                    print!("{report}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(why) => {
                    println!("not analogous: {why}");
                    Ok(ExitCode::from(EXIT_NOT_ANALOGOUS))
                }
            }
        }
        _ => Err(Failure::new(
            EXIT_DIMENSION,
            "classify needs two matrix documents or two hybrid specs",
        )),
    }
}

fn cmd_count(
    m: usize,
    asymptotic: Option<usize>,
    both_conventions: bool,
    cap: usize,
) -> CliResult<ExitCode> {
    if m == 0 {
        return Err(Failure::new(EXIT_USAGE, "m must be at least 1"));
    }
    let count = enumeration::family_count_with_cap(m, cap)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    println!("families({m}) = {count}");
    if both_conventions {
        let unordered = enumeration::family_count_unordered(m, cap)
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        println!("families({m}, unordered multisets) = {unordered}");
    }
    if let Some(k) = asymptotic {
        let est = enumeration::asymptotic_family_count(m, k)
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        println!(
            "asymptotic estimate (K = {k}): {:.6e} (ln = {:.6})",
            est.value, est.ln_value
        );
        if m <= cap {
            // Exact reference: P(m/K)^K, the equal-multiplicity family count.
            let per_group = enumeration::count_to_f64(&enumeration::partition_total(m / k));
            let exact_f = per_group.powi(k as i32);
            if exact_f.is_finite() && exact_f > 0.0 {
                println!(
                    "exact P({})^{k} = {exact_f:.6e}, ratio = {:.6}",
                    m / k,
                    est.value / exact_f
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_graph(input: &Path, dot_out: Option<&Path>, tol_args: &TolArgs) -> CliResult<ExitCode> {
    let doc = load_input(input, &tol_args.resolve(None))?;
    let tol = doc_tolerance(&doc, tol_args);
    let InputDocument::Matrix(matrix_doc) = doc else {
        return Err(Failure::new(EXIT_USAGE, "graph expects a matrix document"));
    };
    let spec = resolve_spec(&matrix_doc, &tol)?;
    let family = resolve_family(&spec, &tol)?;
    let graph = asg::build_graph(&family, &tol)
        .map_err(|e| Failure::new(EXIT_DECOMPOSE, e.to_string()))?;
    let dot = graph.export_dot();
    match dot_out {
        Some(path) => std::fs::write(path, dot)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?,
        None => print!("{dot}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_apply(
    function: &Path,
    matrices: &[PathBuf],
    oracle_degree: u32,
    check: bool,
    json: bool,
    tol_args: &TolArgs,
) -> CliResult<ExitCode> {
    let f_value = load_json(function)?;
    let f = document::parse_function(&f_value)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", function.display())))?;
    if matrices.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "apply needs at least one matrix document"));
    }
    if f.arity() != matrices.len() {
        return Err(Failure::new(
            EXIT_DIMENSION,
            format!(
                "function arity {} but {} matrix documents",
                f.arity(),
                matrices.len()
            ),
        ));
    }
    let opts = series_opts();
    let base_tol = tol_args.resolve(None);

    let docs: Vec<InputDocument> = matrices
        .iter()
        .map(|p| load_input(p, &base_tol))
        .collect::<CliResult<_>>()?;
    let all_hybrid = docs.iter().all(|d| matches!(d, InputDocument::Hybrid(_)));

    let map_calc = |e: calculus::CalcError| match e {
        calculus::CalcError::OutOfRadius { .. } | calculus::CalcError::NonConvergent { .. } => {
            Failure::new(EXIT_CHECK, e.to_string())
        }
        calculus::CalcError::ArityMismatch { .. } => Failure::new(EXIT_DIMENSION, e.to_string()),
        other => Failure::new(EXIT_DECOMPOSE, other.to_string()),
    };
    let map_hybrid = |e: hybrid::HybridError| match e {
        hybrid::HybridError::Calc(inner) => map_calc(inner),
        other => Failure::new(EXIT_DECOMPOSE, other.to_string()),
    };

    // Realized matrices for the oracle check.
    let mut realized: Vec<spectracalc::MatrixC> = Vec::new();
    let result = if all_hybrid {
        let specs: Vec<HybridOperatorSpec> = docs
            .iter()
            .map(|d| match d {
                InputDocument::Hybrid(h) => h.clone(),
                InputDocument::Matrix(_) => unreachable!(),
            })
            .collect();
        for s in &specs {
            realized.push(
                s.realize(&base_tol)
                    .map_err(|e| Failure::new(EXIT_DECOMPOSE, e.to_string()))?
                    .matrix,
            );
        }
        if specs.len() == 1 {
            hybrid::apply_hybrid(&f, &specs[0], &base_tol, &opts).map_err(map_hybrid)?
        } else {
            hybrid::apply_hybrid_multi(&f, &specs, &base_tol, &opts).map_err(map_hybrid)?
        }
    } else {
        let mut families = Vec::new();
        for doc in &docs {
            let (spec, tol) = match doc {
                InputDocument::Matrix(md) => {
                    let tol = match md {
                        MatrixDocument::Numeric { tolerances, .. } => {
                            tol_args.resolve(tolerances.as_ref())
                        }
                        _ => base_tol.clone(),
                    };
                    (resolve_spec(md, &tol)?, tol)
                }
                InputDocument::Hybrid(h) => (
                    h.to_jordan_spec(&base_tol)
                        .map_err(|e| Failure::new(EXIT_DECOMPOSE, e.to_string()))?,
                    base_tol.clone(),
                ),
            };
            let family = resolve_family(&spec, &tol)?;
            realized.push(
                spec.assemble(&tol)
                    .map_err(|e| Failure::new(EXIT_DECOMPOSE, e.to_string()))?,
            );
            families.push(family);
        }
        calculus::apply_multi(&f, &families, &opts).map_err(map_calc)?
    };

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "result": document::matrix_to_json(&result),
            }))
            .unwrap()
        );
    } else {
        if matrices.len() == 1 {
            println!("f(X) =");
        } else {
            println!("f(X1,...,X{}) =", matrices.len());
        }
        print!("{}", render::matrix(&result));
    }

    if check {
        let oracle = calculus::series_oracle(&f, &realized, oracle_degree, &opts)
            .map_err(map_calc)?;
        let residual = result
            .sub(&oracle)
            .map_err(|e| Failure::new(EXIT_DIMENSION, e.to_string()))?
            .max_abs();
        println!("oracle residual (degree {oracle_degree}): {residual:.3e}");
        if residual > 1e-6 {
            return Err(Failure::new(
                EXIT_CHECK,
                format!("oracle residual {residual:.3e} exceeds 1e-6"),
            ));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(input: &Path, tol_args: &TolArgs) -> CliResult<ExitCode> {
    let doc = load_input(input, &tol_args.resolve(None))?;
    let tol = doc_tolerance(&doc, tol_args);
    let InputDocument::Matrix(matrix_doc) = doc else {
        return Err(Failure::new(EXIT_USAGE, "verify expects a matrix document"));
    };
    let spec = resolve_spec(&matrix_doc, &tol)?;
    let family = resolve_family(&spec, &tol)?;
    let report = jordan::verify_family(&family, &tol);
    println!("{}", report.to_string().trim());
    if report.is_valid() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_CHECK))
    }
}
