//! Command-line front end: argument model, graph files, report assembly
//! and emission. The `node-certainty` binary is a thin wrapper over
//! [`run_command`] and [`emit_report`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::centrality::{
    centrality_report, geodesic_closeness, information_centrality, is_tree,
    pairwise_oracle, rank_nodes, InfoVariant, PairComparison, PathCaps,
};
use crate::certainty::{
    analytic_covariance, certainty_routes, certainty_spectral, covariance_trajectory, dispersion_summary,
    group_inverse_residuals, mirror_group_inverse, spectral_decompose,
    CertaintyReport, CovarianceMode, DispersionSummary, Integrator, ModelParams, Route,
};
use crate::error::{Error, Result};
use crate::families::{closed_form_covariance, closed_form_mu, make_family, ClosedFormResult, FamilySpec};
use crate::graph::{classify, laplacian, mirror_graph, GraphProfile, WeightedDigraph};
use crate::simulator::{
    empirical_moments, simulate_ensemble, simulate_ensemble_with_threads, validate_moments, MomentReport,
    MomentValidation, SimConfig, DEFAULT_GATE,
};
use crate::tolerance::Tolerances;

pub const TOOL: &str = "node-certainty";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Curves,
}

/// Certainty of coupled drift-diffusion units on a weighted digraph.
///
/// Defaults: sigma = 1, beta = 1. Graph files use 1-based node labels.
#[derive(Debug, Clone, Parser)]
#[command(name = TOOL, version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SharedArgs {
    /// Diffusion standard deviation.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub sigma: f64,
    /// Drift rate.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Base seed for Monte Carlo runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Last time of the variance curves.
    #[arg(long, global = true, default_value_t = 5.0)]
    pub t_max: f64,
    /// Spacing of the variance curves.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub t_step: f64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Certainty index of every node by every applicable route.
    Analyze { graph: PathBuf },
    /// Closeness and information centrality, with the path oracle on small graphs.
    Centrality {
        graph: PathBuf,
        /// Largest graph for which simple paths are enumerated.
        #[arg(long, default_value_t = 10)]
        path_cap: usize,
    },
    /// Canonical family given as kind:n:alpha, e.g. complete:9:1 or circulant[1,3]:7:1.
    Family { spec: FamilySpec },
    /// Monte Carlo moments compared with the analytic covariance.
    Simulate {
        graph: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Invariant checks on a graph; exits with status 1 if any gated check fails.
    Verify { graph: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 5.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Comma-separated sample times on the step grid; may be empty.
    #[arg(long, default_value = "1,2,3,4,5")]
    pub sample_times: String,
    /// Worker threads (does not affect the output).
    #[arg(long)]
    pub threads: Option<usize>,
}

pub fn parse_times(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Usage(format!("bad sample time {s:?}"))))
        .collect()
}

// ---------------------------------------------------------------- graph files

/// On-disk graph: `{"n": 5, "edges": [[1, 2, 1.0], ...], "undirected": true}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub undirected: bool,
}

impl GraphFile {
    pub fn build(&self) -> Result<WeightedDigraph> {
        let edges = self.edges.iter().map(|&(k, j, w)| (k - 1, j - 1, w));
        if self.undirected {
            WeightedDigraph::undirected(self.n, edges)
        } else {
            WeightedDigraph::new(self.n, edges)
        }
    }

    pub fn from_graph(g: &WeightedDigraph) -> Self {
        let undirected = g.is_symmetric();
        let edges = g
            .edges()
            .iter()
            .filter(|e| !undirected || e.source < e.target)
            .map(|e| (e.source + 1, e.target + 1, e.weight))
            .collect();
        Self {
            n: g.node_count(),
            edges,
            undirected,
        }
    }
}

pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Parse("graph file must be a JSON object".into()))?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("field \"n\" must be a nonnegative integer".into()))? as usize;
    let undirected = match obj.get("undirected") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| Error::Parse("field \"undirected\" must be true or false".into()))?,
    };
    let list = obj
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("field \"edges\" must be an array".into()))?;
    let mut edges = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let bad = |what: &str| Error::Parse(format!("edge {} ({item}): {what}", i + 1));
        let triple = item.as_array().filter(|a| a.len() == 3).ok_or_else(|| bad("expected [k, j, weight]"))?;
        let node = |v: &Value| {
            v.as_u64()
                .map(|x| x as usize)
                .filter(|&x| (1..=n).contains(&x))
                .ok_or_else(|| bad(&format!("node labels must be integers in 1..={n}")))
        };
        let k = node(&triple[0])?;
        let j = node(&triple[1])?;
        let w = triple[2].as_f64().ok_or_else(|| bad("weight must be a number"))?;
        edges.push((k, j, w));
    }
    Ok(GraphFile { n, edges, undirected })
}

pub fn load_graph(path: &Path) -> Result<(GraphFile, WeightedDigraph)> {
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let file = parse_graph(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    let g = file.build()?;
    Ok((file, g))
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSettings {
    pub trajectories: usize,
    pub horizon: f64,
    pub step: f64,
    pub sample_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub sigma: f64,
    pub beta: f64,
    pub seed: u64,
    pub format: Format,
    pub t_max: f64,
    pub t_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteOutcome {
    pub route: Route,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// `null` entries are infinite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inv_mu: Option<Vec<f64>>,
}

impl RouteOutcome {
    fn from_result(route: Route, r: &Result<CertaintyReport>) -> Self {
        match r {
            Ok(rep) => Self {
                route,
                applicable: true,
                reason: None,
                mu: Some(rep.mu_values()),
                inv_mu: Some(rep.inv_mu.clone()),
            },
            Err(e) => Self {
                route,
                applicable: false,
                reason: Some(e.to_string()),
                mu: None,
                inv_mu: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeResults {
    pub degree: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closeness: Option<Vec<f64>>,
    pub routes: Vec<RouteOutcome>,
    /// Largest relative gap in `1/mu` between applicable routes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEntry {
    pub pair: (usize, usize),
    pub paths: usize,
    pub path_information: f64,
    pub matrix_information: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityResults {
    pub closeness: Vec<f64>,
    pub info_harmonic: Vec<f64>,
    pub info_arithmetic: Vec<f64>,
    /// 1-based node labels by decreasing harmonic information centrality.
    pub ranking: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceCheck {
    pub t: f64,
    pub max_abs_diff: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyResults {
    pub closed_form: ClosedFormResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_mu: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_mu: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_gap: Option<f64>,
    pub covariance_checks: Vec<CovarianceCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub moments: MomentReport,
    pub target_mean: f64,
    pub target_covariance: Vec<Vec<f64>>,
    pub validation: MomentValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateResults {
    pub samples: Vec<SampleResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    /// Gated checks decide the exit status; the others are informational.
    pub gated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyResults {
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    Analyze(AnalyzeResults),
    Centrality(CentralityResults),
    Family(FamilyResults),
    Simulate(SimulateResults),
    Verify(VerifyResults),
}

/// Node variances on a time grid with the bounds `sigma^2 t` and `sigma^2 t / n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curves {
    pub times: Vec<f64>,
    pub variances: Vec<Vec<f64>>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<GraphProfile>,
    pub results: Results,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curves: Option<Curves>,
}

impl Report {
    pub fn passed(&self) -> bool {
        match &self.results {
            Results::Family(r) => r.passed,
            Results::Simulate(r) => r.passed,
            Results::Verify(r) => r.passed,
            _ => true,
        }
    }

    pub fn node_count(&self) -> usize {
        if let Some(g) = &self.config.graph {
            return g.n;
        }
        self.config.family.as_ref().map_or(0, |f| f.n)
    }
}

fn time_grid(t_max: f64, t_step: f64) -> Result<Vec<f64>> {
    if !(t_step.is_finite() && t_step > 0.0 && t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::Usage("--t-max must be >= 0 and --t-step > 0".into()));
    }
    let count = (t_max / t_step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * t_step).collect())
}

fn curves_from(times: Vec<f64>, variances: Vec<Vec<f64>>, params: &ModelParams, n: usize) -> Curves {
    let s2 = params.sigma * params.sigma;
    Curves {
        upper: times.iter().map(|t| s2 * t).collect(),
        lower: times.iter().map(|t| s2 * t / n as f64).collect(),
        times,
        variances,
    }
}

fn diagonal(m: &DMatrix<f64>) -> Vec<f64> {
    m.diagonal().iter().copied().collect()
}

pub fn run_command(cli: &Cli) -> Result<Report> {
    let s = &cli.shared;
    let params = ModelParams::new(s.beta, s.sigma)?;
    let tol = Tolerances::default();
    let want_curves = s.format == Format::Curves;
    let mut config = RunConfig {
        sigma: s.sigma,
        beta: s.beta,
        seed: s.seed,
        format: s.format,
        t_max: s.t_max,
        t_step: s.t_step,
        graph: None,
        family: None,
        path_cap: None,
        simulation: None,
    };
    let mut curves = None;

    let (name, profile, results) = match &cli.command {
        Command::Analyze { graph } => {
            let (file, g) = load_graph(graph)?;
            config.graph = Some(file);
            let results = analyze(&g, &params, &tol);
            if want_curves {
                let times = time_grid(s.t_max, s.t_step)?;
                let covs = covariance_trajectory(&laplacian(&g), &params, &times, &Integrator::default())?;
                let vars = covs.iter().map(diagonal).collect();
                curves = Some(curves_from(times, vars, &params, g.node_count()));
            }
            ("analyze", Some(classify(&g, tol.normality)), Results::Analyze(results))
        }
        Command::Centrality { graph, path_cap } => {
            let (file, g) = load_graph(graph)?;
            config.graph = Some(file);
            config.path_cap = Some(*path_cap);
            let results = centrality(&g, *path_cap, &tol)?;
            ("centrality", Some(classify(&g, tol.normality)), Results::Centrality(results))
        }
        Command::Family { spec } => {
            config.family = Some(spec.clone());
            let g = make_family(spec)?;
            let results = family(spec, &g, &params, &tol)?;
            if want_curves {
                let times = time_grid(s.t_max, s.t_step)?;
                let vars = times
                    .iter()
                    .map(|&t| closed_form_covariance(spec, &params, t).map(|c| diagonal(&c)))
                    .collect::<Result<_>>()?;
                curves = Some(curves_from(times, vars, &params, spec.n));
            }
            ("family", Some(classify(&g, tol.normality)), Results::Family(results))
        }
        Command::Simulate { graph, sim } => {
            let (file, g) = load_graph(graph)?;
            config.graph = Some(file);
            let sample_times = parse_times(&sim.sample_times)?;
            config.simulation = Some(SimSettings {
                trajectories: sim.trajectories,
                horizon: sim.horizon,
                step: sim.step,
                sample_times: sample_times.clone(),
            });
            let cfg = SimConfig {
                params,
                horizon: sim.horizon,
                step: sim.step,
                trajectories: sim.trajectories,
                seed: s.seed,
                sample_times,
            };
            let results = simulate(&g, &cfg, sim.threads)?;
            if want_curves {
                let times = results.samples.iter().map(|r| r.moments.time).collect();
                let vars = results.samples.iter().map(|r| r.moments.variances()).collect();
                curves = Some(curves_from(times, vars, &params, g.node_count()));
            }
            ("simulate", Some(classify(&g, tol.normality)), Results::Simulate(results))
        }
        Command::Verify { graph } => {
            let (file, g) = load_graph(graph)?;
            config.graph = Some(file);
            let results = verify(&g, &params, &tol);
            ("verify", Some(classify(&g, tol.normality)), Results::Verify(results))
        }
    };
    if want_curves && curves.is_none() {
        return Err(Error::Usage(format!("--format curves is not available for {name}")));
    }
    Ok(Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: name.into(),
        config,
        profile,
        results,
        curves,
    })
}

fn analyze(g: &WeightedDigraph, params: &ModelParams, tol: &Tolerances) -> AnalyzeResults {
    let routes = certainty_routes(g, params, tol);
    let ok: Vec<&CertaintyReport> = routes.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let route_agreement = (ok.len() >= 2).then(|| {
        ok.iter()
            .flat_map(|a| ok.iter().map(move |b| a.max_relative_gap(b)))
            .fold(0.0, f64::max)
    });
    let mirror = mirror_graph(g);
    let dispersion = ok
        .first()
        .and_then(|rep| dispersion_summary(rep, &laplacian(&mirror), params).ok());
    AnalyzeResults {
        degree: g.out_degrees(),
        closeness: geodesic_closeness(&mirror).ok().map(|(_, c)| c),
        routes: routes.iter().map(|(route, r)| RouteOutcome::from_result(*route, r)).collect(),
        route_agreement,
        dispersion,
    }
}

fn centrality(g: &WeightedDigraph, path_cap: usize, tol: &Tolerances) -> Result<CentralityResults> {
    if !g.is_symmetric() {
        return Err(Error::NotUndirected);
    }
    let report = centrality_report(g, tol)?;
    let caps = PathCaps {
        max_nodes: path_cap,
        ..PathCaps::default()
    };
    let (oracle, oracle_skipped) = match pairwise_oracle(g, &caps) {
        Ok(pairs) => (Some(pairs.iter().map(oracle_entry).collect()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(CentralityResults {
        closeness: report.closeness,
        info_harmonic: report.info_harmonic,
        info_arithmetic: report.info_arithmetic,
        ranking: report.ranking.iter().map(|k| k + 1).collect(),
        oracle,
        oracle_skipped,
    })
}

fn oracle_entry(p: &PairComparison) -> OracleEntry {
    OracleEntry {
        pair: (p.source + 1, p.target + 1),
        paths: p.path_count,
        path_information: p.path_information,
        matrix_information: p.matrix_information,
    }
}

/// Times at which family closed forms are checked against integration.
pub const FAMILY_CHECK_TIMES: [f64; 3] = [0.1, 1.0, 5.0];
pub const FAMILY_COVARIANCE_TOL: f64 = 1e-6;

fn family(spec: &FamilySpec, g: &WeightedDigraph, params: &ModelParams, tol: &Tolerances) -> Result<FamilyResults> {
    let closed = closed_form_mu(spec, params.sigma)?;
    let lap = laplacian(g);
    let (spectral_mu, spectral_gap) = match (&closed.inv_mu, spectral_decompose(&lap, tol)) {
        (Some(inv), Ok(sd)) => {
            let rep = certainty_spectral(&sd, params);
            let gap = inv
                .iter()
                .zip(&rep.inv_mu)
                .map(|(a, b)| (a - b).abs() / 1f64.max(a.abs()).max(b.abs()))
                .fold(0.0, f64::max);
            (Some(rep.mu_values()), Some(gap))
        }
        _ => (None, None),
    };
    let numeric = covariance_trajectory(&lap, params, &FAMILY_CHECK_TIMES, &Integrator::default())?;
    let covariance_checks = FAMILY_CHECK_TIMES
        .iter()
        .zip(&numeric)
        .map(|(&t, num)| {
            let closed = closed_form_covariance(spec, params, t)?;
            let diff = (closed - num).amax();
            Ok(CovarianceCheck {
                t,
                max_abs_diff: diff,
                passed: diff <= FAMILY_COVARIANCE_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = covariance_checks.iter().all(|c| c.passed)
        && spectral_gap.is_none_or(|gap| gap <= tol.route_agreement);
    Ok(FamilyResults {
        closed_form_mu: closed.mu(),
        closed_form: closed,
        spectral_mu,
        spectral_gap,
        covariance_checks,
        passed,
    })
}

fn simulate(g: &WeightedDigraph, cfg: &SimConfig, threads: Option<usize>) -> Result<SimulateResults> {
    let ensemble = match threads {
        Some(t) => simulate_ensemble_with_threads(g, cfg, t)?,
        None => simulate_ensemble(g, cfg)?,
    };
    let lap = laplacian(g);
    let targets = covariance_trajectory(&lap, &cfg.params, &ensemble.times, &Integrator::default())?;
    let n = g.node_count();
    let samples = ensemble
        .times
        .iter()
        .zip(targets)
        .map(|(&t, target)| {
            let mean = cfg.params.beta * t;
            let moments = empirical_moments(&ensemble, t)?.with_target(&vec![mean; n], &target)?;
            let validation = validate_moments(&moments, &target, DEFAULT_GATE)?;
            Ok(SampleResult {
                moments,
                target_mean: mean,
                target_covariance: target.row_iter().map(|r| r.iter().copied().collect()).collect(),
                validation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = samples.iter().all(|s| s.validation.passed);
    Ok(SimulateResults { samples, passed })
}

fn check(name: &str, gated: bool, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    let ok = value <= tolerance;
    Check {
        name: name.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        gated,
        value: Some(value),
        tolerance: Some(tolerance),
        detail: detail.into(),
    }
}

fn skipped(name: &str, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        status: CheckStatus::Skipped,
        gated: false,
        value: None,
        tolerance: None,
        detail: detail.into(),
    }
}

fn failed(name: &str, err: &Error) -> Check {
    Check {
        name: name.into(),
        status: CheckStatus::Fail,
        gated: true,
        value: None,
        tolerance: None,
        detail: err.to_string(),
    }
}

/// Invariant suite over every module for one graph.
pub fn verify(g: &WeightedDigraph, params: &ModelParams, tol: &Tolerances) -> VerifyResults {
    let mut checks = Vec::new();
    let n = g.node_count();
    let lap = laplacian(g);
    let profile = classify(g, tol.normality);
    let s2 = params.sigma * params.sigma;

    let row = lap.row_sums().iter().fold(0.0f64, |a, r| a.max(r.abs()));
    checks.push(check("laplacian-row-sums", true, row, 0.0, "max |row sum| of L"));

    let times = [0.5, 1.0, 5.0];
    match covariance_trajectory(&lap, params, &times, &Integrator::default()) {
        Ok(covs) => {
            let worst = times
                .iter()
                .zip(&covs)
                .flat_map(|(&t, c)| {
                    let (lo, hi) = (s2 * t / n as f64, s2 * t);
                    c.diagonal()
                        .iter()
                        .map(move |&v| ((lo - v).max(v - hi).max(0.0)) / hi)
                        .collect::<Vec<_>>()
                })
                .fold(0.0, f64::max);
            checks.push(check(
                "variance-bounds",
                true,
                worst,
                1e-9,
                "sigma^2 t / n <= Var(x_k(t)) <= sigma^2 t at t = 0.5, 1, 5 (relative excess)",
            ));
        }
        Err(e) => checks.push(failed("variance-bounds", &e)),
    }

    let spectral_names = [
        "spectral-orthonormality",
        "spectral-eigen-residual",
        "group-inverse-identities",
        "route-agreement",
        "dispersion-identity",
        "certainty-ranking-matches-information",
        "normal-covariance-matches-integration",
    ];
    if profile.spectral_ready() {
        spectral_checks(g, params, tol, &mut checks);
    } else {
        let why = if !profile.normal_laplacian {
            "Laplacian is not normal"
        } else {
            "graph is not strongly connected"
        };
        checks.extend(spectral_names.iter().map(|name| skipped(name, why)));
    }

    let mirror = mirror_graph(g);
    let mirror_connected = laplacian(&mirror).is_strongly_connected();
    let tree = is_tree(&mirror);
    if !mirror_connected {
        checks.push(skipped("path-oracle", "mirror graph is disconnected"));
    } else if n < 2 {
        checks.push(skipped("path-oracle", "fewer than two nodes"));
    } else {
        match pairwise_oracle(&mirror, &PathCaps::default()) {
            Ok(pairs) => {
                let worst = pairs.iter().map(PairComparison::gap).fold(0.0, f64::max);
                let detail = if tree {
                    "path-enumeration I_kj vs matrix I_kj (tree: exact)"
                } else {
                    "path-enumeration I_kj vs matrix I_kj (cyclic graph: informational)"
                };
                checks.push(check("path-oracle", tree, worst, 1e-6, detail));
            }
            Err(e) => checks.push(skipped("path-oracle", e.to_string())),
        }
    }
    if tree && n >= 2 {
        let close = geodesic_closeness(&mirror).map(|(_, c)| c);
        let info = information_centrality(&mirror, InfoVariant::Harmonic);
        match (close, info) {
            (Ok(c), Ok(i)) => {
                let gap = c.iter().zip(&i).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                checks.push(check(
                    "tree-closeness-equals-information",
                    true,
                    gap,
                    1e-9,
                    "on trees the geodesic is the only path",
                ));
            }
            (Err(e), _) | (_, Err(e)) => checks.push(failed("tree-closeness-equals-information", &e)),
        }
    } else {
        checks.push(skipped("tree-closeness-equals-information", "mirror graph is not a tree"));
    }

    let passed = !checks.iter().any(|c| c.gated && c.status == CheckStatus::Fail);
    VerifyResults { checks, passed }
}

fn spectral_checks(g: &WeightedDigraph, params: &ModelParams, tol: &Tolerances, checks: &mut Vec<Check>) {
    let lap = laplacian(g);
    let spec = match spectral_decompose(&lap, tol) {
        Ok(s) => s,
        Err(e) => {
            checks.push(failed("spectral-decomposition", &e));
            return;
        }
    };
    checks.push(check(
        "spectral-orthonormality",
        true,
        spec.orthonormality_defect(),
        tol.orthonormality,
        "max |U* U - I|",
    ));
    let scale = 1f64.max(lap.matrix().norm());
    checks.push(check(
        "spectral-eigen-residual",
        true,
        spec.eigen_residual(&lap),
        tol.eigen_residual * scale,
        "max ||L u - lambda u||",
    ));

    let mirror_lap = lap.symmetric_part();
    match mirror_group_inverse(&mirror_lap) {
        Ok(x) => {
            let r = group_inverse_residuals(mirror_lap.matrix(), &x);
            checks.push(check(
                "group-inverse-identities",
                true,
                r.max(),
                tol.identity_residual,
                "PXP = P, XPX = X, PX = XP, X 1 = 0",
            ));
        }
        Err(e) => checks.push(failed("group-inverse-identities", &e)),
    }

    let routes = certainty_routes(g, params, tol);
    let ok: Vec<&CertaintyReport> = routes.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    if ok.len() == routes.len() {
        let gap = ok
            .iter()
            .flat_map(|a| ok.iter().map(move |b| a.max_relative_gap(b)))
            .fold(0.0, f64::max);
        checks.push(check(
            "route-agreement",
            true,
            gap,
            tol.route_agreement,
            "spectral, group-inverse and centrality routes, per node",
        ));
    } else if let Some((_, Err(e))) = routes.iter().find(|(_, r)| r.is_err()) {
        checks.push(failed("route-agreement", e));
    }

    let spectral = certainty_spectral(&spec, params);
    match dispersion_summary(&spectral, &mirror_lap, params) {
        Ok(d) => checks.push(check(
            "dispersion-identity",
            true,
            d.identity_residual,
            tol.identity_residual * 1f64.max(d.total_dispersion),
            "sum 1/mu = sigma^2 K_f / (2n)",
        )),
        Err(e) => checks.push(failed("dispersion-identity", &e)),
    }

    let mirror = mirror_graph(g);
    let ranking = information_centrality(&mirror, InfoVariant::Harmonic)
        .map(|kappa| (rank_nodes(&spectral.mu_values(), tol.rank_tie), rank_nodes(&kappa, tol.rank_tie)));
    match ranking {
        Ok((by_mu, by_info)) => {
            let same = by_mu == by_info;
            checks.push(Check {
                name: "certainty-ranking-matches-information".into(),
                status: if same { CheckStatus::Pass } else { CheckStatus::Fail },
                gated: true,
                value: None,
                tolerance: None,
                detail: format!(
                    "by mu {:?}, by information centrality {:?}",
                    by_mu.iter().map(|k| k + 1).collect::<Vec<_>>(),
                    by_info.iter().map(|k| k + 1).collect::<Vec<_>>()
                ),
            });
        }
        Err(e) => checks.push(failed("certainty-ranking-matches-information", &e)),
    }

    let t = 1.0;
    let normal = analytic_covariance(&lap, params, t, CovarianceMode::Normal);
    let general = analytic_covariance(&lap, params, t, CovarianceMode::General);
    match (normal, general) {
        (Ok(a), Ok(b)) => checks.push(check(
            "normal-covariance-matches-integration",
            true,
            (a - b).amax(),
            1e-6,
            "eigen-expansion vs RK4 covariance at t = 1, max-norm",
        )),
        (Err(e), _) | (_, Err(e)) => checks.push(failed("normal-covariance-matches-integration", &e)),
    }
}

// ---------------------------------------------------------------- emission

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numerical(format!("csv: {other:?}")),
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn emit_report(report: &Report, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report).map_err(|e| Error::Io(e.into()))?;
            writeln!(out)?;
        }
        Format::Csv => write_csv(report, out)?,
        Format::Curves => {
            let curves = report
                .curves
                .as_ref()
                .ok_or_else(|| Error::Usage(format!("no curves in a {} report", report.command)))?;
            write_curves(curves, report.node_count(), out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_curves(c: &Curves, n: usize, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|k| format!("var_v{k}")));
    header.extend(["upper".to_string(), "lower".to_string()]);
    w.write_record(&header).map_err(csv_err)?;
    for (i, t) in c.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(c.variances[i].iter().map(|v| num(*v)));
        row.push(num(c.upper[i]));
        row.push(num(c.lower[i]));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_csv(report: &Report, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut put = |row: Vec<String>| w.write_record(&row).map_err(csv_err);
    match &report.results {
        Results::Analyze(r) => {
            put(vec!["node".into(), "mu".into(), "inv_mu".into(), "route".into()])?;
            for route in r.routes.iter().filter(|r| r.applicable) {
                let (Some(mu), Some(inv)) = (&route.mu, &route.inv_mu) else { continue };
                for k in 0..mu.len() {
                    put(vec![(k + 1).to_string(), num(mu[k]), num(inv[k]), route.route.as_str().into()])?;
                }
            }
        }
        Results::Centrality(r) => {
            put(["node", "closeness", "info_harmonic", "info_arithmetic", "rank"].map(String::from).to_vec())?;
            let mut rank = vec![0; r.ranking.len()];
            for (pos, &label) in r.ranking.iter().enumerate() {
                rank[label - 1] = pos + 1;
            }
            for k in 0..r.closeness.len() {
                put(vec![
                    (k + 1).to_string(),
                    num(r.closeness[k]),
                    num(r.info_harmonic[k]),
                    num(r.info_arithmetic[k]),
                    rank[k].to_string(),
                ])?;
            }
        }
        Results::Family(r) => {
            put(["node", "mu_closed_form", "inv_mu_closed_form", "mu_spectral"].map(String::from).to_vec())?;
            for k in 0..r.closed_form.spec.n {
                put(vec![
                    (k + 1).to_string(),
                    opt_num(r.closed_form_mu.as_ref().map(|v| v[k])),
                    opt_num(r.closed_form.inv_mu.as_ref().map(|v| v[k])),
                    opt_num(r.spectral_mu.as_ref().map(|v| v[k])),
                ])?;
            }
        }
        Results::Simulate(r) => {
            put(
                ["time", "node", "mean", "mean_se", "variance", "variance_se", "target_variance", "z"]
                    .map(String::from)
                    .to_vec(),
            )?;
            for s in &r.samples {
                let m = &s.moments;
                for k in 0..m.mean.len() {
                    let z = m.covariance_z.as_ref().map(|z| z[k][k]);
                    put(vec![
                        num(m.time),
                        (k + 1).to_string(),
                        num(m.mean[k]),
                        num(m.mean_se[k]),
                        num(m.covariance[k][k]),
                        num(m.covariance_se[k][k]),
                        num(s.target_covariance[k][k]),
                        opt_num(z),
                    ])?;
                }
            }
        }
        Results::Verify(r) => {
            put(["check", "status", "gated", "value", "tolerance", "detail"].map(String::from).to_vec())?;
            for c in &r.checks {
                let status = match c.status {
                    CheckStatus::Pass => "pass",
                    CheckStatus::Fail => "fail",
                    CheckStatus::Skipped => "skipped",
                };
                put(vec![
                    c.name.clone(),
                    status.into(),
                    c.gated.to_string(),
                    opt_num(c.value),
                    opt_num(c.tolerance),
                    c.detail.clone(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs the parsed command line and writes the report. Returns the process
/// exit status: 0 on success, 1 when a check fails, 2 on usage or I/O errors.
pub fn main_with(cli: &Cli) -> i32 {
    let outcome = run_command(cli).and_then(|report| {
        match &cli.shared.output {
            Some(path) => {
                let mut file = fs::File::create(path).map_err(|source| Error::File {
                    path: path.clone(),
                    source,
                })?;
                emit_report(&report, cli.shared.format, &mut file)?;
            }
            None => emit_report(&report, cli.shared.format, &mut std::io::stdout().lock())?,
        }
        Ok(report.passed())
    });
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("{TOOL}: {e}");
            2
        }
    }
}
