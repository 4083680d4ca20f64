//! `kirchhoff` command-line front end. Reports go to stdout as JSON, tables to stderr.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kirchhoff::amplitude::integrate::{integrate_simplex, Method};
use kirchhoff::amplitude::{parametric_integrand, phi_massive, Exponents, Kinematics};
use kirchhoff::corpus::{self, GraphFile};
use kirchhoff::degeneration::{tension_limit, BiextensionPoint, OrbitData, TensionReport};
use kirchhoff::hypersurface::{jump_locus, patterson_scan, PattersonReport};
use kirchhoff::landau::{find_physical_pinch, hessian_check, locate_threshold, HessianReport, PinchPoint};
use kirchhoff::rational::{self, Rational};
use kirchhoff::symanzik::{first_symanzik, Configuration, PsiMethod, QuadraticSpace};
use kirchhoff::{Error, Graph};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "kirchhoff", version, about = "Symanzik polynomials, graph hypersurfaces, amplitudes and Landau singularities")]
struct Cli {
    /// seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// cap on worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphSource {
    /// graph JSON file
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    graph: Option<PathBuf>,
    /// name of a built-in graph
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Euclidean,
    Minkowski,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    PlainMc,
    Stratified,
    Quadrature,
}

#[derive(Subcommand)]
enum Command {
    /// first and second Symanzik polynomials
    Symanzik {
        #[command(flatten)]
        source: GraphSource,
        /// signature of the momentum space used for phi
        #[arg(long, value_enum, default_value = "euclidean")]
        metric: Metric,
    },
    /// corank against multiplicity on sampled points of the graph hypersurface
    Hypersurface {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// also compute the locus where the fibre dimension jumps
        #[arg(long)]
        jump_locus: bool,
    },
    /// Euclidean parametric amplitude
    Amplitude {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        dimension: usize,
        #[arg(long, value_enum, default_value = "plain-mc")]
        method: MethodArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// alpha' times the height along a degenerating orbit
    TensionLimit {
        #[command(flatten)]
        source: GraphSource,
        /// positive edge weights Y, comma separated
        #[arg(long = "Y", value_delimiter = ',', required = true)]
        y: Vec<f64>,
        /// real parts X, comma separated (default 0)
        #[arg(long = "X", value_delimiter = ',')]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001,0.0001")]
        alpha_schedule: Vec<f64>,
        /// degree-zero divisor in vertex order (default: first minus last vertex)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        delta: Vec<String>,
        /// degree-zero divisor in vertex order (default: equal to delta)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu: Vec<String>,
    },
    /// physical pinch points in Minkowski space
    Landau {
        #[command(flatten)]
        source: GraphSource,
        /// edge masses, comma separated (overrides the file)
        #[arg(long, value_delimiter = ',')]
        masses: Vec<String>,
        /// external momenta as JSON, e.g. '{"1":[3,0],"2":[-3,0]}' (overrides the file)
        #[arg(long)]
        external: Option<String>,
        #[arg(long, default_value_t = 32)]
        starts: usize,
        /// bisect the threshold on LO,HI, in multiples of the external momenta
        #[arg(long, value_delimiter = ',', num_args = 1)]
        bracket: Vec<f64>,
    },
    /// built-in graphs
    Corpus {
        /// run the invariant suite over every built-in graph
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Singular | Error::InexactDivision | Error::RankDeficient | Error::NotAGraph | Error::NotSquare { .. } => {
                Failure::Internal(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Run<T> = Result<T, Failure>;

#[derive(Serialize)]
struct Report<T: Serialize> {
    tool_version: &'static str,
    seed: u64,
    graph_hash: String,
    #[serde(flatten)]
    body: T,
}

struct Loaded {
    file: GraphFile,
    graph: Graph,
    hash: String,
}

fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn load(src: &GraphSource) -> Run<Loaded> {
    let file = match (&src.graph, &src.builtin) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            GraphFile::parse(&text)?
        }
        (None, Some(name)) => corpus::builtin_file(name).ok_or_else(|| {
            Failure::Validation(format!("unknown built-in graph {name:?}; known: {}", corpus::builtin_names().join(", ")))
        })?,
        (None, None) => return Err(Failure::Validation("either --graph or --builtin is required".into())),
    };
    let graph = file.graph()?;
    let hash = sha256(&file.canonical_json()?);
    Ok(Loaded { file, graph, hash })
}

fn parse_rationals(values: &[String]) -> Run<Vec<Rational>> {
    Ok(values.iter().map(|v| rational::parse(v.trim())).collect::<Result<_, _>>()?)
}

fn zero_momenta(g: &Graph, dim: usize) -> Vec<Vec<Rational>> {
    vec![vec![rational::zero(); dim]; g.n_vertices()]
}

#[derive(Serialize)]
struct SymanzikOut {
    n_edges: usize,
    loops: usize,
    psi: String,
    psi_degree: usize,
    /// absent when the file carries no momenta
    phi: Option<String>,
    phi_degree: usize,
}

fn symanzik(l: &Loaded, metric: Metric) -> Run<SymanzikOut> {
    let g = &l.graph;
    let psi = first_symanzik(&Configuration::from_graph(g), PsiMethod::Determinant)?;
    let phi = match l.file.momenta(g)? {
        None => None,
        Some(p) => {
            let dim = p[0].len();
            let space = match metric {
                Metric::Euclidean => QuadraticSpace::euclidean(dim),
                Metric::Minkowski => QuadraticSpace::minkowski(dim)?,
            };
            let masses = l.file.masses(g)?.unwrap_or_else(|| vec![rational::zero(); g.n_edges()]);
            Some(phi_massive(g, &Kinematics::new(space, p, masses)?)?.to_string())
        }
    };
    let loops = g.loop_number();
    Ok(SymanzikOut { n_edges: g.n_edges(), loops, psi: psi.to_string(), psi_degree: loops, phi, phi_degree: loops + 1 })
}

#[derive(Serialize)]
struct HypersurfaceOut {
    #[serde(flatten)]
    patterson: PattersonReport,
    /// projective points (as `p/q` strings) where the fibre dimension jumps, with the jump
    jump_locus: Option<Vec<(Vec<Vec<String>>, usize)>>,
}

fn hypersurface(l: &Loaded, samples: usize, seed: u64, with_locus: bool) -> Run<HypersurfaceOut> {
    let c = Configuration::from_graph(&l.graph);
    let patterson = patterson_scan(&c, samples, seed)?;
    let jump_locus = if with_locus {
        let locus = jump_locus(&c)?;
        Some(
            locus
                .iter()
                .map(|comp| (comp.basis.iter().map(|v| v.iter().map(rational::format).collect()).collect(), comp.epsilon))
                .collect(),
        )
    } else {
        None
    };
    Ok(HypersurfaceOut { patterson, jump_locus })
}

#[derive(Serialize)]
struct AmplitudeOut {
    /// momentum-space integral; absent when the normalization diverges
    value: Option<f64>,
    std_error: Option<f64>,
    simplex_value: f64,
    simplex_std_error: f64,
    exponents: Exponents,
    log_divergent: bool,
    converged: bool,
    method: Method,
    samples: usize,
}

fn amplitude(l: &Loaded, dimension: usize, method: MethodArg, samples: usize, seed: u64) -> Run<AmplitudeOut> {
    let g = &l.graph;
    let momenta = l.file.momenta(g)?.unwrap_or_else(|| zero_momenta(g, dimension));
    if momenta[0].len() != dimension {
        return Err(Error::DimensionMismatch { expected: dimension, got: momenta[0].len() }.into());
    }
    let masses = l.file.masses(g)?.unwrap_or_else(|| vec![rational::zero(); g.n_edges()]);
    let integrand = parametric_integrand(g, dimension, &Kinematics::euclidean(momenta, masses)?)?;
    let method = match method {
        MethodArg::PlainMc => Method::PlainMc,
        MethodArg::Stratified => Method::Stratified,
        MethodArg::Quadrature => Method::Quadrature,
    };
    let est = integrate_simplex(g.n_edges(), |a: &[f64]| integrand.evaluate(a), method, samples, seed)?;
    let scale = integrand.amplitude_prefactor();
    let finite = scale.is_finite();
    Ok(AmplitudeOut {
        value: finite.then_some(scale * est.value),
        std_error: finite.then_some(scale * est.std_error),
        simplex_value: est.value,
        simplex_std_error: est.std_error,
        exponents: integrand.exponents(),
        log_divergent: integrand.log_divergent,
        converged: est.converged,
        method,
        samples: est.n_samples,
    })
}

fn tension(l: &Loaded, y: &[f64], x: &[f64], schedule: &[f64], delta: &[String], mu: &[String]) -> Run<TensionReport> {
    let g = &l.graph;
    let nv = g.n_vertices();
    let delta = if delta.is_empty() {
        let mut d = vec![rational::zero(); nv];
        d[0] = rational::int(1);
        d[nv - 1] -= rational::int(1);
        d
    } else {
        parse_rationals(delta)?
    };
    let mu = if mu.is_empty() { delta.clone() } else { parse_rationals(mu)? };
    let x = if x.is_empty() { vec![0.0; g.n_edges()] } else { x.to_vec() };
    let d = OrbitData::from_graph(g, &delta, &mu, BiextensionPoint::zero(g.loop_number()))?;
    Ok(tension_limit(&d, y, &x, schedule)?)
}

#[derive(Serialize)]
struct LandauOut {
    pinches: Vec<PinchPoint>,
    hessians: Vec<HessianReport>,
    threshold: Option<f64>,
}

fn landau(l: &Loaded, masses: &[String], external: Option<&str>, starts: usize, bracket: &[f64], seed: u64) -> Run<LandauOut> {
    let g = &l.graph;
    let mut file = l.file.clone();
    if let Some(text) = external {
        let map: BTreeMap<String, Vec<Value>> =
            serde_json::from_str(text).map_err(|e| Failure::Validation(format!("--external: {e}")))?;
        file.momenta = Some(map);
    }
    let masses = if masses.is_empty() {
        file.masses(g)?.ok_or_else(|| Failure::Validation("edge masses are required (--masses or the graph file)".into()))?
    } else {
        let m = parse_rationals(masses)?;
        if m.len() != g.n_edges() {
            return Err(Error::DimensionMismatch { expected: g.n_edges(), got: m.len() }.into());
        }
        m
    };
    let momenta = file.momenta(g)?.ok_or_else(|| Failure::Validation("external momenta are required (--external or the graph file)".into()))?;
    let kin = Kinematics::new(QuadraticSpace::minkowski(momenta[0].len())?, momenta, masses)?;
    let pinches = find_physical_pinch(g, &kin, seed, starts)?;
    let hessians = pinches.iter().map(|p| hessian_check(p, g, &kin)).collect::<Result<_, _>>()?;
    let threshold = match bracket {
        [] => None,
        [lo, hi] => Some(locate_threshold(g, &kin, *lo, *hi, seed)?),
        _ => return Err(Failure::Validation("--bracket takes LO,HI".into())),
    };
    Ok(LandauOut { pinches, hessians, threshold })
}

#[derive(Serialize)]
struct CorpusEntry {
    name: &'static str,
    hash: String,
    n_vertices: usize,
    n_edges: usize,
    loops: usize,
}

#[derive(Serialize)]
struct CorpusOut {
    graphs: Vec<CorpusEntry>,
    checks: Option<Vec<corpus::Check>>,
    all_passed: Option<bool>,
}

fn corpus_cmd(verify: bool, seed: u64) -> Run<(String, CorpusOut)> {
    let mut joined = String::new();
    let mut graphs = Vec::new();
    for name in corpus::builtin_names() {
        let file = corpus::builtin_file(name).expect("listed");
        let canon = file.canonical_json()?;
        joined.push_str(&canon);
        joined.push('\n');
        let g = file.graph()?;
        graphs.push(CorpusEntry { name, hash: sha256(&canon), n_vertices: g.n_vertices(), n_edges: g.n_edges(), loops: g.loop_number() });
    }
    let (checks, all_passed) = if verify {
        let checks = corpus::verify_all(seed)?;
        eprintln!("{:<16} {:<24} {:<6} detail", "graph", "check", "result");
        for c in &checks {
            eprintln!("{:<16} {:<24} {:<6} {}", c.graph, c.check, if c.passed { "pass" } else { "FAIL" }, c.detail);
        }
        let ok = checks.iter().all(|c| c.passed);
        (Some(checks), Some(ok))
    } else {
        for g in &graphs {
            eprintln!("{:<16} V={:<3} E={:<3} g={}", g.name, g.n_vertices, g.n_edges, g.loops);
        }
        (None, None)
    };
    Ok((sha256(&joined), CorpusOut { graphs, checks, all_passed }))
}

fn emit<T: Serialize>(seed: u64, graph_hash: String, body: T) -> Run<()> {
    let report = Report { tool_version: env!("CARGO_PKG_VERSION"), seed, graph_hash, body };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Internal(e.to_string()))?;
    // a closed pipe downstream is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn run(cli: Cli) -> Run<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Symanzik { source, metric } => {
            let l = load(&source)?;
            emit(seed, l.hash.clone(), symanzik(&l, metric)?)
        }
        Command::Hypersurface { source, samples, jump_locus } => {
            let l = load(&source)?;
            emit(seed, l.hash.clone(), hypersurface(&l, samples, seed, jump_locus)?)
        }
        Command::Amplitude { source, dimension, method, samples } => {
            let l = load(&source)?;
            emit(seed, l.hash.clone(), amplitude(&l, dimension, method, samples, seed)?)
        }
        Command::TensionLimit { source, y, x, alpha_schedule, delta, mu } => {
            let l = load(&source)?;
            emit(seed, l.hash.clone(), tension(&l, &y, &x, &alpha_schedule, &delta, &mu)?)
        }
        Command::Landau { source, masses, external, starts, bracket } => {
            let l = load(&source)?;
            let out = landau(&l, &masses, external.as_deref(), starts, &bracket, seed)?;
            for (p, h) in out.pinches.iter().zip(&out.hessians) {
                eprintln!("c = {:?}  signature = {:?}  verdict = {:?}", p.c, h.signature, h.verdict);
            }
            emit(seed, l.hash.clone(), out)
        }
        Command::Corpus { verify } => {
            let (hash, out) = corpus_cmd(verify, seed)?;
            let failed = out.all_passed == Some(false);
            emit(seed, hash, out)?;
            if failed {
                return Err(Failure::Internal("invariant suite failed".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
