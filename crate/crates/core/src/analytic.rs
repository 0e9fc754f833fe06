//! Closed-form test problems on Euclidean space with known Pareto sets.
//!
//! Kinks are resolved deterministically: `sign(0) := +1` for absolute
//! values, and ties in a maximum go to the lowest index.

use crate::error::{check_dim, Error, Result};
use crate::problem::MultiObjective;
use crate::space::{Dual, InnerProductSpace, Primal};

#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticKind {
    /// `f₁ = |x₁| + x₂²`, `f₂ = |x₁ − 2| + x₂²`; Pareto set `[0,2] × {0}`.
    AbsDist,
    /// `f₁ = ‖x − a‖²`, `f₂ = ‖x + a‖²`; Pareto set the segment `[−a, a]`.
    SmoothPair { a: Vec<f64> },
    /// `f = ‖x‖₁`, minimizer `0`.
    L1Norm,
    /// `f = ‖x‖_∞`, minimizer `0`.
    LInfNorm,
    /// `f = ½‖x‖²`, minimizer `0`.
    Sphere,
}

#[derive(Clone, Debug)]
pub struct AnalyticProblem {
    name: &'static str,
    kind: AnalyticKind,
    space: InnerProductSpace,
}

fn sign(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn distance_to_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
    let ax: Vec<f64> = a.iter().zip(x).map(|(p, q)| q - p).collect();
    let len_sq: f64 = ab.iter().map(|v| v * v).sum();
    let s = if len_sq > 0.0 {
        (ab.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>() / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ax.iter()
        .zip(&ab)
        .map(|(p, q)| (p - s * q).powi(2))
        .sum::<f64>()
        .sqrt()
}

impl AnalyticProblem {
    pub const NAMES: [&'static str; 5] = ["absdist", "smoothpair", "l1norm", "linfnorm", "sphere"];

    pub fn absdist() -> Self {
        Self {
            name: "absdist",
            kind: AnalyticKind::AbsDist,
            space: InnerProductSpace::euclidean(2),
        }
    }

    pub fn smooth_pair(a: Vec<f64>) -> Self {
        let dim = a.len();
        Self {
            name: "smoothpair",
            kind: AnalyticKind::SmoothPair { a },
            space: InnerProductSpace::euclidean(dim),
        }
    }

    pub fn l1_norm(dim: usize) -> Self {
        Self {
            name: "l1norm",
            kind: AnalyticKind::L1Norm,
            space: InnerProductSpace::euclidean(dim),
        }
    }

    pub fn linf_norm(dim: usize) -> Self {
        Self {
            name: "linfnorm",
            kind: AnalyticKind::LInfNorm,
            space: InnerProductSpace::euclidean(dim),
        }
    }

    pub fn sphere(dim: usize) -> Self {
        Self {
            name: "sphere",
            kind: AnalyticKind::Sphere,
            space: InnerProductSpace::euclidean(dim),
        }
    }

    /// Looks a problem up by name with its default dimension (2).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "absdist" => Ok(Self::absdist()),
            "smoothpair" => Ok(Self::smooth_pair(vec![1.0, 0.0])),
            "l1norm" => Ok(Self::l1_norm(2)),
            "linfnorm" => Ok(Self::linf_norm(2)),
            "sphere" => Ok(Self::sphere(2)),
            other => Err(Error::InvalidArgument(format!(
                "unknown analytic problem '{other}' (known: {})",
                Self::NAMES.join(", ")
            ))),
        }
    }

    /// Every problem of the suite in its default configuration.
    pub fn suite() -> Vec<Self> {
        Self::NAMES
            .iter()
            .map(|n| Self::by_name(n).expect("suite names are valid"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn kind(&self) -> &AnalyticKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `inf f_i`; every suite member is bounded below by zero and attains it.
    pub fn infimum(&self, _index: usize) -> f64 {
        0.0
    }

    pub fn eval_objectives(&self, x: &Primal) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.dim())?;
        let x = x.coeffs();
        Ok(match &self.kind {
            AnalyticKind::AbsDist => {
                let q = x[1] * x[1];
                vec![x[0].abs() + q, (x[0] - 2.0).abs() + q]
            }
            AnalyticKind::SmoothPair { a } => {
                let f1 = x.iter().zip(a).map(|(p, q)| (p - q).powi(2)).sum();
                let f2 = x.iter().zip(a).map(|(p, q)| (p + q).powi(2)).sum();
                vec![f1, f2]
            }
            AnalyticKind::L1Norm => vec![x.iter().map(|v| v.abs()).sum()],
            AnalyticKind::LInfNorm => vec![x.iter().fold(0.0, |m, v| f64::max(m, v.abs()))],
            AnalyticKind::Sphere => vec![0.5 * x.iter().map(|v| v * v).sum::<f64>()],
        })
    }

    pub fn subgradient(&self, index: usize, x: &Primal) -> Result<Dual> {
        check_dim(self.dim(), x.dim())?;
        if index >= self.num_objectives() {
            return Err(Error::InvalidArgument(format!(
                "objective index {index} out of range for {}",
                self.name
            )));
        }
        let x = x.coeffs();
        let g = match &self.kind {
            AnalyticKind::AbsDist => {
                let shift = if index == 0 { 0.0 } else { 2.0 };
                vec![sign(x[0] - shift), 2.0 * x[1]]
            }
            AnalyticKind::SmoothPair { a } => {
                let s = if index == 0 { -1.0 } else { 1.0 };
                x.iter().zip(a).map(|(p, q)| 2.0 * (p + s * q)).collect()
            }
            AnalyticKind::L1Norm => x.iter().map(|&v| sign(v)).collect(),
            AnalyticKind::LInfNorm => {
                let mut best = 0;
                for (i, v) in x.iter().enumerate() {
                    if v.abs() > x[best].abs() {
                        best = i;
                    }
                }
                let mut g = vec![0.0; x.len()];
                g[best] = sign(x[best]);
                g
            }
            AnalyticKind::Sphere => x.to_vec(),
        };
        Ok(Dual::new(g))
    }

    /// Euclidean distance from `x` to the known Pareto set.
    pub fn pareto_distance(&self, x: &Primal) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        let c = x.coeffs();
        Ok(match &self.kind {
            AnalyticKind::AbsDist => distance_to_segment(c, &[0.0, 0.0], &[2.0, 0.0]),
            AnalyticKind::SmoothPair { a } => {
                let neg: Vec<f64> = a.iter().map(|v| -v).collect();
                distance_to_segment(c, &neg, a)
            }
            AnalyticKind::L1Norm | AnalyticKind::LInfNorm | AnalyticKind::Sphere => {
                c.iter().map(|v| v * v).sum::<f64>().sqrt()
            }
        })
    }
}

impl MultiObjective for AnalyticProblem {
    fn space(&self) -> &InnerProductSpace {
        &self.space
    }

    fn num_objectives(&self) -> usize {
        match self.kind {
            AnalyticKind::AbsDist | AnalyticKind::SmoothPair { .. } => 2,
            _ => 1,
        }
    }

    fn values(&self, x: &Primal) -> Result<Vec<f64>> {
        self.eval_objectives(x)
    }

    fn value_and_subgradient(&self, index: usize, x: &Primal) -> Result<(f64, Dual)> {
        let xi = self.subgradient(index, x)?;
        let f = self.eval_objectives(x)?[index];
        Ok((f, xi))
    }
}
