//! `floqcert`: load operators, functions, perturbations and metric graphs
//! from JSON and run one analysis per subcommand.
//!
//! Exit codes: 0 success or something found, 1 negative result, 2 invalid
//! input, 3 degenerate input (flat band or Dirichlet collision).

mod format;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use floqcert::perturbation::{find_embedded_with_bands, lambda_scan};
use floqcert::quantum::{reduce, subdivide_safe};
use floqcert::schema::{self, SchemaError};
use floqcert::solver::surface_irreducibility;
use floqcert::{
    bands, fermi_samples, floquet_surface_poly, halfspace_no_compact_support, parse_rational, plant_embedded,
    solve, symbol, GaussRational, Irreducibility, LatticeFunction, LocalPerturbation, Membership, PeriodicGraph,
    PeriodicOperator, PerturbedOperator, QuantumError, SolveOutcome, SpectrumError,
};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use format::{envelope, pretty, sig, Csv};

#[derive(Parser)]
#[command(name = "floqcert", version, about = "Floquet analysis and embedded eigenfunctions of periodic graph operators")]
struct Cli {
    /// Output format. JSON wraps results as {"version", "command", "result"}.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Add missing conjugate partners to asymmetric operator term lists.
    #[arg(long, global = true)]
    symmetrize: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Energy {
    /// Energy as `p/q`, an integer, or a decimal (read as the exact rational it denotes).
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
}

#[derive(Subcommand)]
enum Command {
    /// Print the symbol A(z).
    Symbol { operator: PathBuf },
    /// Spectral bands from the dispersion relation on a torus grid.
    Bands {
        operator: PathBuf,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Sample the real Floquet surface at an energy.
    Fermi {
        operator: PathBuf,
        #[command(flatten)]
        energy: Energy,
        /// Slices per axis in dimension two; ignored in dimension one.
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// Decide whether (A - λ)u = ψ has a compactly supported solution.
    Solve {
        operator: PathBuf,
        rhs: PathBuf,
        #[command(flatten)]
        energy: Energy,
    },
    /// Build a local perturbation making f an eigenfunction at λ.
    Plant {
        operator: PathBuf,
        function: PathBuf,
        #[command(flatten)]
        energy: Energy,
    },
    /// All compactly supported eigenfunctions of A + B at λ within the certified radius.
    FindEmbedded {
        operator: PathBuf,
        perturbation: PathBuf,
        #[command(flatten)]
        energy: Energy,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Half-space certificate that A + B - λ has no compactly supported kernel.
    CheckHalfspace {
        operator: PathBuf,
        perturbation: Option<PathBuf>,
        #[command(flatten)]
        energy: Energy,
        /// Comma-separated integer direction, e.g. `1,0`. Defaults to the first axis.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Vec<i64>,
    },
    /// Irreducibility of the Floquet surface polynomial Δ₁ at λ.
    Irreducible {
        operator: PathBuf,
        #[command(flatten)]
        energy: Energy,
    },
    /// Reduce a metric graph at λ to a combinatorial operator.
    QuantumReduce {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Insert fake vertices on Dirichlet-resonant edges first.
        #[arg(long)]
        subdivide: bool,
        /// Where to write the reduced edge perturbation, if the graph has one.
        #[arg(long)]
        perturbation_output: Option<PathBuf>,
    },
    /// Rational energy grid inside each band, searching for embedded eigenfunctions (heuristic in λ).
    LambdaScan {
        operator: PathBuf,
        perturbation: PathBuf,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
}

/// How a run ended, mapped to the process exit code.
enum Status {
    Found,
    Negative,
}

enum Failure {
    Input(String),
    Degenerate(String),
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run = Result<(String, Status), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T, SchemaError>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_operator(path: &Path, symmetrize: bool) -> Result<PeriodicOperator, Failure> {
    with_path(path, schema::load_operator(&read(path)?, symmetrize))
}

fn load_function(path: &Path, graph: &PeriodicGraph) -> Result<LatticeFunction, Failure> {
    with_path(path, schema::load_function(&read(path)?, graph))
}

fn load_perturbation(path: &Path, graph: &PeriodicGraph) -> Result<LocalPerturbation, Failure> {
    with_path(path, schema::load_perturbation(&read(path)?, graph))
}

/// Exact energy; decimals are accepted with a warning naming the rational used.
fn parse_energy(text: &str) -> Result<GaussRational, Failure> {
    let t = text.trim();
    if t.contains(['.', 'e', 'E']) {
        let r = parse_rational(t).map_err(|e| Failure::Input(format!("--lambda {t}: {e}")))?;
        let exact = GaussRational::real(r);
        eprintln!("warning: decimal energy {t} read as the exact rational {exact}");
        return Ok(exact);
    }
    t.parse::<GaussRational>().map_err(|e| Failure::Input(format!("--lambda {t}: {e}")))
}

fn real_energy(lambda: &GaussRational) -> Result<f64, Failure> {
    if !lambda.is_real() {
        return Err(Failure::Input(format!("energy {lambda} must be real")));
    }
    lambda.re.to_f64().ok_or_else(|| Failure::Input(format!("energy {lambda} is out of range")))
}

fn cell_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("cell{i}")).collect()
}

fn function_rows(csv: &mut Csv, prefix: &[String], f: &LatticeFunction, graph: &PeriodicGraph) {
    for (site, value) in f.iter() {
        let mut row = prefix.to_vec();
        row.push(graph.vertices[site.vertex].clone());
        row.extend(site.cell.0.iter().map(|c| c.to_string()));
        row.push(value.to_string());
        let z = value.to_complex();
        row.push(sig(z.re));
        row.push(sig(z.im));
        csv.row(row);
    }
}

fn function_header(prefix: &[&str], dim: usize) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    h.push("vertex".into());
    h.extend(cell_header(dim));
    h.extend(["value".into(), "re".into(), "im".into()]);
    h
}

fn run(cli: &Cli) -> Run {
    let fmt = cli.format;
    match &cli.command {
        Command::Symbol { operator } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let m = symbol(&a).map_err(input)?;
            let n = a.domain_size();
            let labels = &a.graph.vertices;
            let text = match fmt {
                Format::Csv => {
                    let mut csv = Csv::new(&["row", "col", "entry"]);
                    for i in 0..n {
                        for j in 0..n {
                            csv.row(vec![labels[i].clone(), labels[j].clone(), m.get(i, j).render()]);
                        }
                    }
                    csv.finish()
                }
                Format::Json => {
                    let rows: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j).render()).collect()).collect();
                    envelope("symbol", json!({ "vertices": labels, "dimension": a.dimension(), "matrix": rows }))
                }
            };
            Ok((text, Status::Found))
        }
        Command::Bands { operator, resolution } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let b = bands(&a, *resolution).map_err(input)?;
            let text = match fmt {
                Format::Csv => {
                    let mut csv = Csv::new(&["band", "min", "max"]);
                    for (i, band) in b.bands.iter().enumerate() {
                        csv.row(vec![i.to_string(), sig(band.lower), sig(band.upper)]);
                    }
                    csv.finish()
                }
                Format::Json => {
                    let list: Vec<Value> =
                        b.bands.iter().map(|band| json!({ "min": band.lower, "max": band.upper })).collect();
                    envelope("bands", json!({ "resolution": resolution, "bands": list }))
                }
            };
            Ok((text, Status::Found))
        }
        Command::Fermi { operator, energy, grid } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let lambda = real_energy(&parse_energy(&energy.lambda)?)?;
            let samples = fermi_samples(&a, lambda, *grid).map_err(spectrum_failure)?;
            let dim = a.dimension();
            let text = match fmt {
                Format::Csv => {
                    let mut header = vec!["point".to_string()];
                    for i in 1..=dim {
                        header.extend([format!("z{i}_re"), format!("z{i}_im"), format!("k{i}")]);
                    }
                    let mut csv = Csv::new(&header);
                    for (i, p) in samples.points.iter().enumerate() {
                        let mut row = vec![i.to_string()];
                        for z in p {
                            row.extend([sig(z.re), sig(z.im), sig(z.arg())]);
                        }
                        csv.row(row);
                    }
                    csv.finish()
                }
                Format::Json => {
                    let pts: Vec<Value> = samples
                        .points
                        .iter()
                        .map(|p| Value::Array(p.iter().map(|z| json!([z.re, z.im])).collect()))
                        .collect();
                    envelope("fermi", json!({ "energy": lambda, "points": pts }))
                }
            };
            let status = if samples.points.is_empty() { Status::Negative } else { Status::Found };
            Ok((text, status))
        }
        Command::Solve { operator, rhs, energy } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let psi = load_function(rhs, &a.graph)?;
            let lambda = parse_energy(&energy.lambda)?;
            let report = solve(&a, &lambda, &psi).map_err(input)?;
            if report.outcome == SolveOutcome::FlatBandDegenerate {
                return Err(Failure::Degenerate(format!("det(A(z) - {lambda}) vanishes identically")));
            }
            eprintln!("{}; certified radius {}; Δ₁ {}", report.outcome.label(), report.certified_bound, report.irreducibility);
            let text = match fmt {
                Format::Csv => {
                    let mut csv = Csv::new(&function_header(&[], a.dimension()));
                    if let Some(u) = report.solution() {
                        function_rows(&mut csv, &[], u, &a.graph);
                    }
                    csv.finish()
                }
                Format::Json => {
                    let ledger = report.ledger.as_ref().map(|l| {
                        json!({
                            "a1": [l.a1, l.a1_bound()],
                            "adjugate": [l.adjugate, l.adjugate_bound()],
                            "determinant": [l.determinant, l.determinant_bound()],
                            "numerator": [l.numerator, l.numerator_bound()],
                            "solution": [l.solution, l.solution_bound()],
                        })
                    });
                    envelope(
                        "solve",
                        json!({
                            "outcome": report.outcome.label(),
                            "certified_bound": report.certified_bound,
                            "achieved_radius": report.achieved_radius,
                            "irreducibility": report.irreducibility.label(),
                            "ledger": ledger,
                            "solution": report.solution().map(|u| schema::function_to_json(u, &a.graph)),
                        }),
                    )
                }
            };
            let status = if report.solution().is_some() { Status::Found } else { Status::Negative };
            Ok((text, status))
        }
        Command::Plant { operator, function, energy } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let f = load_function(function, &a.graph)?;
            let lambda = parse_energy(&energy.lambda)?;
            let b = plant_embedded(&a, &f, &lambda).map_err(input)?;
            let doc = schema::perturbation_to_json(&b, &a.graph);
            let text = match fmt {
                Format::Csv => pretty(&doc),
                Format::Json => envelope("plant", doc),
            };
            Ok((text, Status::Found))
        }
        Command::FindEmbedded { operator, perturbation, energy, resolution } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let b = load_perturbation(perturbation, &a.graph)?;
            let lambda = parse_energy(&energy.lambda)?;
            let band_list = if lambda.is_real() { Some(bands(&a, *resolution).map_err(input)?) } else { None };
            let report = find_embedded_with_bands(&a, &b, &lambda, band_list.as_ref()).map_err(input)?;
            let band = report.band_status.as_ref().map_or("complex energy", Membership::label);
            eprintln!(
                "{} eigenfunctions within radius {}; λ {band}; Δ₁ {}",
                report.basis.len(),
                report.search_radius,
                report.irreducibility
            );
            if !report.hypotheses_hold() {
                eprintln!("warning: λ is not a band-interior energy with irreducible Δ₁, so the radius is not certified");
            }
            let text = match fmt {
                Format::Csv => {
                    let mut csv = Csv::new(&function_header(&["basis"], a.dimension()));
                    for (i, f) in report.basis.iter().enumerate() {
                        function_rows(&mut csv, &[i.to_string()], f, &a.graph);
                    }
                    csv.finish()
                }
                Format::Json => envelope(
                    "find-embedded",
                    json!({
                        "lambda": lambda.to_string(),
                        "search_radius": report.search_radius,
                        "band_status": report.band_status.as_ref().map(Membership::label),
                        "irreducibility": report.irreducibility.label(),
                        "hypotheses_hold": report.hypotheses_hold(),
                        "bound_satisfied": report.bound_satisfied,
                        "basis": report.basis.iter().map(|f| schema::function_to_json(f, &a.graph)).collect::<Vec<_>>(),
                    }),
                ),
            };
            let status = if report.basis.is_empty() { Status::Negative } else { Status::Found };
            Ok((text, status))
        }
        Command::CheckHalfspace { operator, perturbation, energy, direction } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let b = perturbation.as_ref().map(|p| load_perturbation(p, &a.graph)).transpose()?;
            let lambda = parse_energy(&energy.lambda)?;
            let direction = if direction.is_empty() {
                (0..a.dimension()).map(|i| i64::from(i == 0)).collect()
            } else {
                direction.clone()
            };
            let op = PerturbedOperator::new(&a, b.as_ref(), lambda);
            let certified = halfspace_no_compact_support(&op, &direction).map_err(input)?;
            let text = match fmt {
                Format::Csv => {
                    let mut csv = Csv::new(&["direction", "no_compact_support"]);
                    let d: Vec<String> = direction.iter().map(|x| x.to_string()).collect();
                    csv.row(vec![d.join(" "), certified.to_string()]);
                    csv.finish()
                }
                Format::Json => envelope("check-halfspace", json!({ "direction": direction, "no_compact_support": certified })),
            };
            Ok((text, if certified { Status::Found } else { Status::Negative }))
        }
        Command::Irreducible { operator, energy } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let lambda = parse_energy(&energy.lambda)?;
            let surface = floquet_surface_poly(&a, &lambda).map_err(spectrum_failure)?;
            let status = surface_irreducibility(&surface.delta1);
            let witness = match &status {
                Irreducibility::Reducible(f) => Some(f.render()),
                Irreducibility::Unknown(why) => Some(why.clone()),
                Irreducibility::Irreducible => None,
            };
            let text = match fmt {
                Format::Csv => {
                    let mut csv = Csv::new(&["delta1", "status", "detail"]);
                    csv.row(vec![surface.delta1.render(), status.label().into(), witness.clone().unwrap_or_default()]);
                    csv.finish()
                }
                Format::Json => envelope(
                    "irreducible",
                    json!({
                        "delta1": surface.delta1.render(),
                        "monomial_content": surface.q,
                        "status": status.label(),
                        "detail": witness,
                    }),
                ),
            };
            Ok((text, if status.is_irreducible() { Status::Found } else { Status::Negative }))
        }
        Command::QuantumReduce { graph, lambda, subdivide, perturbation_output } => {
            let path = graph;
            let (mut g, mut perts) = with_path(path, schema::load_metric_graph(&read(path)?))?;
            if *subdivide {
                let sub = subdivide_safe(&g, *lambda).map_err(quantum_failure)?;
                perts = sub.map_perturbations(&g, &perts);
                g = sub.graph;
            }
            let red = reduce(&g, *lambda, &perts).map_err(quantum_failure)?;
            let op_doc = schema::operator_to_json(&red.operator);
            let b_doc = red.perturbation.as_ref().map(|b| schema::perturbation_to_json(b, &red.operator.graph));
            if let (Some(doc), Some(out)) = (&b_doc, perturbation_output) {
                fs::write(out, pretty(doc)).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            } else if b_doc.is_some() && fmt == Format::Csv {
                eprintln!("warning: the reduced perturbation is only written with --perturbation-output or --format json");
            }
            let text = match fmt {
                Format::Csv => pretty(&op_doc),
                Format::Json => envelope("quantum-reduce", json!({ "operator": op_doc, "perturbation": b_doc })),
            };
            Ok((text, Status::Found))
        }
        Command::LambdaScan { operator, perturbation, steps, resolution } => {
            let a = load_operator(operator, cli.symmetrize)?;
            let b = load_perturbation(perturbation, &a.graph)?;
            let band_list = bands(&a, *resolution).map_err(input)?;
            let hits = lambda_scan(&a, &b, &band_list, *steps).map_err(input)?;
            let text = match fmt {
                Format::Csv => {
                    let mut csv = Csv::new(&["lambda", "lambda_approx", "eigenfunctions"]);
                    for (l, k) in &hits {
                        csv.row(vec![l.to_string(), sig(l.to_complex().re), k.to_string()]);
                    }
                    csv.finish()
                }
                Format::Json => {
                    let list: Vec<Value> =
                        hits.iter().map(|(l, k)| json!({ "lambda": l.to_string(), "eigenfunctions": k })).collect();
                    envelope("lambda-scan", json!({ "steps": steps, "hits": list }))
                }
            };
            Ok((text, if hits.is_empty() { Status::Negative } else { Status::Found }))
        }
    }
}

fn spectrum_failure(e: SpectrumError) -> Failure {
    match e {
        SpectrumError::FlatBandDegenerate => Failure::Degenerate(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

fn quantum_failure(e: QuantumError) -> Failure {
    match e {
        QuantumError::DirichletCollision(_) | QuantumError::TooManyCuts { .. } => Failure::Degenerate(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, status) = match run(&cli) {
        Ok(done) => done,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Degenerate(msg)) => {
            eprintln!("degenerate: {msg}");
            return ExitCode::from(3);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    match status {
        Status::Found => ExitCode::SUCCESS,
        Status::Negative => ExitCode::from(1),
    }
}
