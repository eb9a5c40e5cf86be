//! Euler-Maruyama Monte Carlo for `dx = (beta 1 - L x) dt + sigma dW`.
//!
//! Trajectory `i` draws its noise from `ChaCha8Rng::seed_from_u64(seed)` with
//! the stream set to `i`, so every trajectory is a pure function of
//! `(seed, i)`. Trajectories are grouped into fixed chunks of
//! [`CHUNK_TRAJECTORIES`]; each chunk accumulates moments in index order and
//! the chunks are merged left to right. Output is therefore bit-identical for
//! any worker count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certainty::ModelParams;
use crate::error::{Error, Result};
use crate::graph::{laplacian, WeightedDigraph};

pub const CHUNK_TRAJECTORIES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub horizon: f64,
    pub step: f64,
    pub trajectories: usize,
    pub seed: u64,
    pub sample_times: Vec<f64>,
}

impl SimConfig {
    /// Grid indices of the sample times, sorted and deduplicated.
    fn sample_steps(&self) -> Result<Vec<usize>> {
        let mut steps = Vec::with_capacity(self.sample_times.len());
        for &t in &self.sample_times {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::NegativeTime(t));
            }
            if t > self.horizon * (1.0 + 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "sample time {t} lies beyond horizon {}",
                    self.horizon
                )));
            }
            let s = (t / self.step).round();
            if (s * self.step - t).abs() > 1e-9 * t.max(1.0) {
                return Err(Error::InvalidConfig(format!(
                    "sample time {t} is not a multiple of step {}",
                    self.step
                )));
            }
            steps.push(s as usize);
        }
        steps.sort_unstable();
        steps.dedup();
        Ok(steps)
    }

    fn validate(&self, g: &WeightedDigraph) -> Result<Vec<usize>> {
        ModelParams::new(self.params.beta, self.params.sigma)?;
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::InvalidConfig(format!("horizon must be nonnegative, got {}", self.horizon)));
        }
        if self.trajectories < 2 {
            return Err(Error::InvalidConfig("at least two trajectories are required".into()));
        }
        let norm = laplacian(g).inf_norm();
        if norm > 0.0 && self.step > 0.1 / norm {
            return Err(Error::StepTooLarge {
                step: self.step,
                limit: 0.1 / norm,
            });
        }
        self.sample_steps()
    }
}

/// Streaming mean and centered second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: Vec<f64>,
    /// Row-major `n x n` sum of centered outer products.
    pub m2: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; n],
            m2: vec![0.0; n * n],
        }
    }

    fn push(&mut self, x: &[f64], delta: &mut [f64]) {
        let n = x.len();
        self.count += 1;
        let c = self.count as f64;
        for k in 0..n {
            delta[k] = x[k] - self.mean[k];
            self.mean[k] += delta[k] / c;
        }
        for k in 0..n {
            let after = x[k] - self.mean[k];
            let row = &mut self.m2[k * n..(k + 1) * n];
            for (j, r) in row.iter_mut().enumerate() {
                *r += delta[j] * after;
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let n = self.mean.len();
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        let delta: Vec<f64> = (0..n).map(|k| other.mean[k] - self.mean[k]).collect();
        for k in 0..n {
            for j in 0..n {
                self.m2[k * n + j] += other.m2[k * n + j] + delta[k] * delta[j] * na * nb / total;
            }
            self.mean[k] += delta[k] * nb / total;
        }
        self.count += other.count;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub n: usize,
    pub config: SimConfig,
    /// Sample times actually recorded (sorted, on the grid).
    pub times: Vec<f64>,
    pub moments: Vec<Moments>,
}

struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl Csr {
    fn new(g: &WeightedDigraph) -> Self {
        let n = g.node_count();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut degree = Vec::with_capacity(n);
        for k in 0..n {
            let mut d = 0.0;
            for (j, w) in g.neighbors(k) {
                cols.push(j);
                weights.push(w);
                d += w;
            }
            degree.push(d);
            row_ptr.push(cols.len());
        }
        Self {
            row_ptr,
            cols,
            weights,
            degree,
        }
    }
}

/// Trajectories advanced in lockstep inside a chunk. Each keeps its own
/// generator and draw order, so batching does not change any sample.
const LANES: usize = 8;

fn run_chunk(csr: &Csr, cfg: &SimConfig, steps: &[usize], range: std::ops::Range<usize>) -> Vec<Moments> {
    let n = csr.degree.len();
    let h = cfg.step;
    let drift = cfg.params.beta * h;
    let noise = cfg.params.sigma * h.sqrt();
    let last = steps.last().copied().unwrap_or(0);
    let mut moments = vec![Moments::new(n); steps.len()];
    let mut scratch = vec![0.0; n];
    // Node-major state: x[k * LANES + lane].
    let mut x = vec![0.0; n * LANES];
    let mut next = vec![0.0; n * LANES];
    let mut recorded = vec![vec![0.0; n * LANES]; steps.len()];
    let mut single = vec![0.0; n];

    let mut first = range.start;
    while first < range.end {
        let lanes = LANES.min(range.end - first);
        let mut rngs: Vec<ChaCha8Rng> = (first..first + lanes)
            .map(|traj| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(traj as u64);
                rng
            })
            .collect();
        x.iter_mut().for_each(|v| *v = 0.0);
        let mut slot = 0;
        while slot < steps.len() && steps[slot] == 0 {
            recorded[slot].copy_from_slice(&x);
            slot += 1;
        }
        for step in 1..=last {
            for k in 0..n {
                let span = csr.row_ptr[k]..csr.row_ptr[k + 1];
                let mut pull = [0.0; LANES];
                let own = &x[k * LANES..(k + 1) * LANES];
                for (p, &xk) in pull.iter_mut().zip(own) {
                    *p = -csr.degree[k] * xk;
                }
                for (&j, &w) in csr.cols[span.clone()].iter().zip(&csr.weights[span]) {
                    let other = &x[j * LANES..(j + 1) * LANES];
                    for (p, &xj) in pull.iter_mut().zip(other) {
                        *p += w * xj;
                    }
                }
                let out = &mut next[k * LANES..(k + 1) * LANES];
                for lane in 0..lanes {
                    let xi: f64 = rngs[lane].sample(StandardNormal);
                    out[lane] = own[lane] + drift + pull[lane] * h + noise * xi;
                }
            }
            std::mem::swap(&mut x, &mut next);
            while slot < steps.len() && steps[slot] == step {
                recorded[slot].copy_from_slice(&x);
                slot += 1;
            }
        }
        for (m, state) in moments.iter_mut().zip(&recorded) {
            for lane in 0..lanes {
                for (k, v) in single.iter_mut().enumerate() {
                    *v = state[k * LANES + lane];
                }
                m.push(&single, &mut scratch);
            }
        }
        first += lanes;
    }
    moments
}

/// Runs the ensemble on rayon's current thread pool.
pub fn simulate_ensemble(g: &WeightedDigraph, cfg: &SimConfig) -> Result<Ensemble> {
    let steps = cfg.validate(g)?;
    let n = g.node_count();
    let csr = Csr::new(g);
    let chunks: Vec<_> = (0..cfg.trajectories)
        .step_by(CHUNK_TRAJECTORIES)
        .map(|s| s..(s + CHUNK_TRAJECTORIES).min(cfg.trajectories))
        .collect();
    let partial: Vec<Vec<Moments>> = chunks
        .into_par_iter()
        .map(|r| run_chunk(&csr, cfg, &steps, r))
        .collect();
    let mut moments = vec![Moments::new(n); steps.len()];
    for part in &partial {
        for (acc, m) in moments.iter_mut().zip(part) {
            acc.merge(m);
        }
    }
    Ok(Ensemble {
        n,
        config: cfg.clone(),
        times: steps.iter().map(|&s| s as f64 * cfg.step).collect(),
        moments,
    })
}

/// Runs the ensemble on a dedicated pool of `threads` workers.
pub fn simulate_ensemble_with_threads(g: &WeightedDigraph, cfg: &SimConfig, threads: usize) -> Result<Ensemble> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| simulate_ensemble(g, cfg))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub time: f64,
    pub trajectories: usize,
    pub mean: Vec<f64>,
    /// Unbiased (`1/(M-1)`) covariance, row-major.
    pub covariance: Vec<Vec<f64>>,
    pub mean_se: Vec<f64>,
    /// Normal-theory standard error of each covariance entry.
    pub covariance_se: Vec<Vec<f64>>,
    pub mean_z: Option<Vec<f64>>,
    pub covariance_z: Option<Vec<Vec<f64>>>,
}

impl MomentReport {
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let n = self.mean.len();
        DMatrix::from_fn(n, n, |k, j| self.covariance[k][j])
    }

    pub fn variances(&self) -> Vec<f64> {
        (0..self.mean.len()).map(|k| self.covariance[k][k]).collect()
    }

    pub fn variance_se(&self) -> Vec<f64> {
        (0..self.mean.len()).map(|k| self.covariance_se[k][k]).collect()
    }

    /// Fills in z-scores against an analytic mean and covariance.
    pub fn with_target(mut self, mean: &[f64], covariance: &DMatrix<f64>) -> Result<Self> {
        let n = self.mean.len();
        if mean.len() != n || covariance.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: n,
                rows: covariance.nrows(),
                cols: covariance.ncols(),
            });
        }
        self.mean_z = Some((0..n).map(|k| z_score(self.mean[k], mean[k], self.mean_se[k])).collect());
        self.covariance_z = Some(
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|j| z_score(self.covariance[k][j], covariance[(k, j)], self.covariance_se[k][j]))
                        .collect()
                })
                .collect(),
        );
        Ok(self)
    }
}

fn z_score(value: f64, target: f64, se: f64) -> f64 {
    let diff = value - target;
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY.copysign(diff)
    }
}

pub fn empirical_moments(e: &Ensemble, t: f64) -> Result<MomentReport> {
    let tol = 1e-9 * t.abs().max(1.0);
    let idx = e
        .times
        .iter()
        .position(|&s| (s - t).abs() <= tol)
        .ok_or(Error::UnknownSampleTime(t))?;
    let m = &e.moments[idx];
    let n = e.n;
    let count = m.count as f64;
    let dof = count - 1.0;
    let cov = DMatrix::from_fn(n, n, |k, j| {
        let s = 0.5 * (m.m2[k * n + j] + m.m2[j * n + k]);
        s / dof
    });
    let cov_se = DMatrix::from_fn(n, n, |k, j| {
        if k == j {
            (2.0 / dof).sqrt() * cov[(k, k)]
        } else {
            ((cov[(k, k)] * cov[(j, j)] + cov[(k, j)].powi(2)) / dof).sqrt()
        }
    });
    Ok(MomentReport {
        time: e.times[idx],
        trajectories: m.count as usize,
        mean: m.mean.clone(),
        covariance: to_rows(&cov),
        mean_se: (0..n).map(|k| (cov[(k, k)] / count).sqrt()).collect(),
        covariance_se: to_rows(&cov_se),
        mean_z: None,
        covariance_z: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryCheck {
    pub row: usize,
    pub col: usize,
    pub empirical: f64,
    pub target: f64,
    pub se: f64,
    pub z: f64,
    pub within_gate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentValidation {
    pub passed: bool,
    pub diagonal_gate: f64,
    pub off_diagonal_gate: f64,
    pub max_diagonal_z: f64,
    pub max_off_diagonal_z: f64,
    pub entries: Vec<EntryCheck>,
}

pub const OFF_DIAGONAL_GATE: f64 = 5.0;
pub const DEFAULT_GATE: f64 = 4.0;

/// Compares the empirical covariance with `target`. Only diagonal entries
/// decide the outcome; off-diagonal entries are flagged against a looser gate.
pub fn validate_moments(report: &MomentReport, target: &DMatrix<f64>, gate: f64) -> Result<MomentValidation> {
    let n = report.mean.len();
    if target.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            expected: n,
            rows: target.nrows(),
            cols: target.ncols(),
        });
    }
    let mut entries = Vec::with_capacity(n * (n + 1) / 2);
    let (mut max_d, mut max_o) = (0.0f64, 0.0f64);
    for k in 0..n {
        for j in k..n {
            let se = report.covariance_se[k][j];
            let z = z_score(report.covariance[k][j], target[(k, j)], se);
            let limit = if k == j { gate } else { OFF_DIAGONAL_GATE };
            if k == j {
                max_d = max_d.max(z.abs());
            } else {
                max_o = max_o.max(z.abs());
            }
            entries.push(EntryCheck {
                row: k,
                col: j,
                empirical: report.covariance[k][j],
                target: target[(k, j)],
                se,
                z,
                within_gate: z.abs() <= limit,
            });
        }
    }
    Ok(MomentValidation {
        passed: max_d <= gate,
        diagonal_gate: gate,
        off_diagonal_gate: OFF_DIAGONAL_GATE,
        max_diagonal_z: max_d,
        max_off_diagonal_z: max_o,
        entries,
    })
}
