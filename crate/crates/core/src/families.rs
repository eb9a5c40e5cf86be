//! Canonical graph families with closed-form certainty and covariance.
//!
//! Everything here is evaluated from explicit formulas and never touches the
//! generic spectral machinery, so the two can check each other.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::certainty::ModelParams;
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    Complete,
    UndirectedRing,
    DirectedRing,
    /// Node `k` observes nodes `k + o mod n` for every offset `o`.
    Circulant {
        offsets: Vec<usize>,
    },
    /// Node 0 is the center.
    UndirectedStar,
    UndirectedPath,
    /// The center observes every leaf.
    ExplodingStar,
    /// Every leaf observes the center.
    ImplodingStar,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Complete => "complete",
            FamilyKind::UndirectedRing => "undirected_ring",
            FamilyKind::DirectedRing => "directed_ring",
            FamilyKind::Circulant { .. } => "circulant",
            FamilyKind::UndirectedStar => "undirected_star",
            FamilyKind::UndirectedPath => "undirected_path",
            FamilyKind::ExplodingStar => "exploding_star",
            FamilyKind::ImplodingStar => "imploding_star",
        }
    }

    fn is_ring(&self) -> bool {
        matches!(self, FamilyKind::UndirectedRing | FamilyKind::DirectedRing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub n: usize,
    pub alpha: f64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, n: usize, alpha: f64) -> Result<Self> {
        let spec = Self { kind, n, alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFamily(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be finite and positive, got {}", self.alpha));
        }
        if self.kind.is_ring() && self.n < 3 {
            return bad(format!("{} needs n >= 3, got {}", self.kind.name(), self.n));
        }
        if let FamilyKind::Circulant { offsets } = &self.kind {
            if offsets.is_empty() {
                return bad("circulant needs at least one offset".into());
            }
            let mut seen = vec![false; self.n];
            for &o in offsets {
                let r = o % self.n;
                if r == 0 {
                    return bad(format!("circulant offset {o} is zero mod {}", self.n));
                }
                if std::mem::replace(&mut seen[r], true) {
                    return bad(format!("circulant offset {o} repeats mod {}", self.n));
                }
            }
        }
        Ok(())
    }

    /// Offsets of the circulant form, for families that have one.
    fn circulant_offsets(&self) -> Option<Vec<usize>> {
        let n = self.n;
        match &self.kind {
            FamilyKind::Complete => Some((1..n).collect()),
            FamilyKind::UndirectedRing => Some(vec![1, n - 1]),
            FamilyKind::DirectedRing => Some(vec![1]),
            FamilyKind::Circulant { offsets } => Some(offsets.iter().map(|o| o % n).collect()),
            _ => None,
        }
    }

    pub fn is_normal(&self) -> bool {
        self.n == 1 || !matches!(self.kind, FamilyKind::ExplodingStar | FamilyKind::ImplodingStar)
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        match &self.kind {
            FamilyKind::ExplodingStar | FamilyKind::ImplodingStar => false,
            FamilyKind::Circulant { .. } => {
                let offsets = self.circulant_offsets().unwrap_or_default();
                offsets.into_iter().fold(self.n, gcd) == 1
            }
            _ => true,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::Circulant { offsets } => {
                let list: Vec<String> = offsets.iter().map(|o| o.to_string()).collect();
                write!(f, "circulant[{}]:{}:{}", list.join(","), self.n, self.alpha)
            }
            kind => write!(f, "{}:{}:{}", kind.name(), self.n, self.alpha),
        }
    }
}

/// Parses `kind:n:alpha`, with circulants written `circulant[1,3]:7:1`.
impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFamily(format!("expected kind:n:alpha, got {s:?}"));
        let mut parts = s.trim().rsplitn(3, ':');
        let alpha = parts.next().ok_or_else(bad)?;
        let n = parts.next().ok_or_else(bad)?;
        let kind = parts.next().ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let alpha: f64 = alpha.trim().parse().map_err(|_| bad())?;
        let kind = match kind.trim().replace('-', "_").as_str() {
            "complete" => FamilyKind::Complete,
            "undirected_ring" => FamilyKind::UndirectedRing,
            "directed_ring" => FamilyKind::DirectedRing,
            "undirected_star" => FamilyKind::UndirectedStar,
            "undirected_path" => FamilyKind::UndirectedPath,
            "exploding_star" => FamilyKind::ExplodingStar,
            "imploding_star" => FamilyKind::ImplodingStar,
            other => {
                let inner = other
                    .strip_prefix("circulant[")
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| Error::InvalidFamily(format!("unknown family kind {other:?}")))?;
                let offsets = inner
                    .split(',')
                    .map(|o| o.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidFamily(format!("bad circulant offsets {inner:?}")))?;
                FamilyKind::Circulant { offsets }
            }
        };
        FamilySpec::new(kind, n, alpha)
    }
}

pub fn make_family(spec: &FamilySpec) -> Result<WeightedDigraph> {
    spec.validate()?;
    let n = spec.n;
    let a = spec.alpha;
    if let Some(offsets) = spec.circulant_offsets() {
        let arcs = (0..n).flat_map(|k| offsets.iter().map(move |&o| (k, (k + o) % n, a)));
        return WeightedDigraph::new(n, arcs.collect::<Vec<_>>());
    }
    match spec.kind {
        FamilyKind::UndirectedStar => WeightedDigraph::undirected(n, (1..n).map(|k| (0, k, a))),
        FamilyKind::UndirectedPath => WeightedDigraph::undirected(n, (1..n).map(|k| (k - 1, k, a))),
        FamilyKind::ExplodingStar => WeightedDigraph::new(n, (1..n).map(|k| (0, k, a))),
        FamilyKind::ImplodingStar => WeightedDigraph::new(n, (1..n).map(|k| (k, 0, a))),
        _ => unreachable!("circulant families handled above"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormResult {
    pub spec: FamilySpec,
    pub sigma: f64,
    /// `1/mu` per node; `None` when the index is not defined for the family.
    pub inv_mu: Option<Vec<f64>>,
    pub normal: bool,
    pub strongly_connected: bool,
    pub reason: Option<String>,
}

impl ClosedFormResult {
    pub fn mu(&self) -> Option<Vec<f64>> {
        self.inv_mu
            .as_ref()
            .map(|v| v.iter().map(|&x| if x == 0.0 { f64::INFINITY } else { 1.0 / x }).collect())
    }

    /// Node variances at time `t` (drift does not enter).
    pub fn variance(&self, t: f64) -> Result<Vec<f64>> {
        let params = ModelParams::new(0.0, self.sigma)?;
        let cov = closed_form_covariance(&self.spec, &params, t)?;
        Ok(cov.diagonal().iter().copied().collect())
    }
}

pub fn closed_form_mu(spec: &FamilySpec, sigma: f64) -> Result<ClosedFormResult> {
    spec.validate()?;
    ModelParams::new(0.0, sigma)?;
    let normal = spec.is_normal();
    let strongly_connected = spec.is_strongly_connected();
    let mut result = ClosedFormResult {
        spec: spec.clone(),
        sigma,
        inv_mu: None,
        normal,
        strongly_connected,
        reason: None,
    };
    if !normal {
        result.reason = Some("Laplacian is not normal".into());
        return Ok(result);
    }
    if !strongly_connected {
        result.reason = Some("graph is not strongly connected".into());
        return Ok(result);
    }

    let n = spec.n;
    if n == 1 {
        result.inv_mu = Some(vec![0.0]);
        return Ok(result);
    }
    let nf = n as f64;
    let a = spec.alpha;
    let s2 = sigma * sigma;
    let inv_mu = match spec.kind {
        FamilyKind::Complete => vec![s2 * (nf - 1.0) / (2.0 * a * nf * nf); n],
        FamilyKind::UndirectedStar => {
            let mut v = vec![s2 * (nf - 1.0) / (2.0 * a * nf * nf); n];
            if n >= 2 {
                let leaf = s2 * (nf.powi(3) - 2.0 * nf * nf + 1.0) / (2.0 * a * (nf - 1.0) * nf * nf);
                v[1..].iter_mut().for_each(|x| *x = leaf);
            }
            v
        }
        FamilyKind::UndirectedPath => (1..=n)
            .map(|k| {
                let kf = k as f64;
                let sum: f64 = (2..=n)
                    .map(|p| {
                        let theta = std::f64::consts::PI / nf * (p - 1) as f64;
                        (theta * (kf - 0.5)).cos().powi(2) / (1.0 - theta.cos())
                    })
                    .sum();
                s2 * sum / (2.0 * a * nf)
            })
            .collect(),
        _ => {
            let eig = circulant_eigenvalues(spec);
            let sum: f64 = eig[1..].iter().map(|l| 1.0 / (2.0 * l.re)).sum();
            vec![s2 * sum / nf; n]
        }
    };
    result.inv_mu = Some(inv_mu);
    Ok(result)
}

/// `lambda_p = sum_q l_q exp(-i 2 pi q (n + 1 - p) / n)` for `p = 1..n`,
/// where `l` is the first Laplacian row. Index 0 holds the zero eigenvalue.
pub fn circulant_eigenvalues(spec: &FamilySpec) -> Vec<Complex<f64>> {
    let n = spec.n;
    let Some(offsets) = spec.circulant_offsets() else {
        return Vec::new();
    };
    let mut row = vec![0.0; n];
    for &o in &offsets {
        row[o] -= spec.alpha;
    }
    row[0] = spec.alpha * offsets.len() as f64;
    (1..=n)
        .map(|p| {
            (0..n)
                .map(|q| {
                    let angle = -2.0 * std::f64::consts::PI * (q * (n + 1 - p)) as f64 / n as f64;
                    Complex::from_polar(row[q], angle)
                })
                .sum()
        })
        .collect()
}

/// Closed-form eigenstructure of the undirected path Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `p` is the normalized eigenvector for `eigenvalues[p]`.
    pub vectors: DMatrix<f64>,
}

pub fn path_spectrum(n: usize, alpha: f64) -> PathSpectrum {
    let nf = n as f64;
    let theta = |p: usize| std::f64::consts::PI / nf * p as f64;
    let eigenvalues = (0..n).map(|p| 2.0 * alpha * (1.0 - theta(p).cos())).collect();
    let vectors = DMatrix::from_fn(n, n, |k, p| {
        if p == 0 {
            1.0 / nf.sqrt()
        } else {
            (2.0 / nf).sqrt() * (theta(p) * (k as f64 + 0.5)).cos()
        }
    });
    PathSpectrum { eigenvalues, vectors }
}

/// `int_0^t e^{-2 r s} ds`.
fn decay_integral(rate: f64, t: f64) -> f64 {
    if rate == 0.0 {
        t
    } else {
        -(-2.0 * rate * t).exp_m1() / (2.0 * rate)
    }
}

/// State covariance at time `t` from explicit formulas.
pub fn closed_form_covariance(spec: &FamilySpec, params: &ModelParams, t: f64) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let n = spec.n;
    let s2 = params.sigma * params.sigma;
    if n == 1 {
        return Ok(DMatrix::from_element(1, 1, s2 * t));
    }
    let nf = n as f64;
    let m = nf - 1.0;
    let a = spec.alpha;
    // 1 - e^{-x}
    let one_minus = |x: f64| -(-x).exp_m1();

    let cov = match spec.kind {
        FamilyKind::Complete => {
            let g = one_minus(2.0 * nf * a * t);
            let diag = g / (2.0 * nf * a);
            let off = t / nf - g / (2.0 * nf * nf * a);
            DMatrix::from_fn(n, n, |k, j| off + if k == j { diag } else { 0.0 })
        }
        FamilyKind::UndirectedStar => {
            let gn = one_minus(2.0 * nf * a * t);
            let g1 = one_minus(2.0 * a * t);
            let c1 = t / nf + m / (2.0 * a * nf * nf) * gn;
            let c2 = t / nf - gn / (2.0 * nf * nf * a);
            let c3 = g1 / (2.0 * a);
            let c4 = t / nf - g1 / (2.0 * m * a) + gn / (2.0 * nf * nf * m * a);
            DMatrix::from_fn(n, n, |k, j| match (k, j) {
                (0, 0) => c1,
                (0, _) | (_, 0) => c2,
                _ if k == j => c3 + c4,
                _ => c4,
            })
        }
        FamilyKind::UndirectedPath => {
            let ps = path_spectrum(n, a);
            let mut cov = DMatrix::from_element(n, n, t / nf);
            for p in 1..n {
                let gain = decay_integral(ps.eigenvalues[p], t);
                let u = ps.vectors.column(p);
                cov += (u * u.transpose()) * gain;
            }
            cov
        }
        FamilyKind::ExplodingStar => {
            let e1 = (-m * a * t).exp_m1();
            let c1 = t / m + 2.0 / (m * m * a) * e1 + nf / (2.0 * m * m * a) * one_minus(2.0 * m * a * t);
            let c2 = t / m + e1 / (m * m * a);
            DMatrix::from_fn(n, n, |k, j| match (k, j) {
                (0, 0) => c1,
                (0, _) | (_, 0) => c2,
                _ if k == j => t,
                _ => 0.0,
            })
        }
        FamilyKind::ImplodingStar => {
            let c1 = t - one_minus(a * t) / a;
            let c2 = t + (-(1.5) + 2.0 * (-a * t).exp() - 0.5 * (-2.0 * a * t).exp()) / a;
            let c3 = one_minus(2.0 * a * t) / (2.0 * a);
            DMatrix::from_fn(n, n, |k, j| match (k, j) {
                (0, 0) => t,
                (0, _) | (_, 0) => c1,
                _ if k == j => c2 + c3,
                _ => c2,
            })
        }
        _ => circulant_covariance(spec, t)?,
    };
    Ok(cov * s2)
}

/// Fourier form `(1/n) sum_p g_p w^{p (k - j)}` with `g_p = int_0^t e^{-2 Re(lambda_p) s} ds`.
fn circulant_covariance(spec: &FamilySpec, t: f64) -> Result<DMatrix<f64>> {
    let n = spec.n;
    let nf = n as f64;
    let gains: Vec<f64> = circulant_eigenvalues(spec)
        .iter()
        .enumerate()
        .map(|(p, l)| if p == 0 { t } else { decay_integral(l.re, t) })
        .collect();
    let mut cov = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let shift = (k + n - j) % n;
            let z: Complex<f64> = gains
                .iter()
                .enumerate()
                .map(|(p, &g)| {
                    let angle = 2.0 * std::f64::consts::PI * (p * shift) as f64 / nf;
                    Complex::from_polar(g, angle)
                })
                .sum::<Complex<f64>>()
                / nf;
            if z.im.abs() > 1e-12 * z.re.abs().max(1.0) {
                return Err(Error::Numerical(format!(
                    "circulant covariance has imaginary residue {:e}",
                    z.im
                )));
            }
            cov[(k, j)] = z.re;
        }
    }
    Ok(cov)
}
