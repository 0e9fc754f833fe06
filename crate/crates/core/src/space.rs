//! Finite-dimensional Hilbert spaces with an explicit Gram matrix.
//!
//! Points and directions are [`Primal`] coefficient vectors; subderivatives
//! are [`Dual`] coefficient vectors acting by the plain nodal pairing
//! `ξ(v) = gᵀv`. The Gram matrix `M` defines `⟨u, v⟩ = uᵀMv`, the Riesz map
//! `R: v ↦ Mv`, and the dual inner product `⟨ξ, η⟩_* = gᵀM⁻¹h`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, CsrMatrix, SkylineCholesky};

const SYMMETRY_TOL: f64 = 1e-12;

/// Coefficients of an element of the space itself.
#[derive(Clone, Debug, PartialEq)]
pub struct Primal(Vec<f64>);

/// Coefficients of a continuous linear functional on the space.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual(Vec<f64>);

macro_rules! coefficient_vector {
    ($name:ident) => {
        impl $name {
            pub fn new(coeffs: Vec<f64>) -> Self {
                Self(coeffs)
            }

            pub fn zeros(dim: usize) -> Self {
                Self(vec![0.0; dim])
            }

            pub fn constant(dim: usize, value: f64) -> Self {
                Self(vec![value; dim])
            }

            pub fn coeffs(&self) -> &[f64] {
                &self.0
            }

            pub fn into_coeffs(self) -> Vec<f64> {
                self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn scaled(&self, factor: f64) -> Self {
                Self(self.0.iter().map(|v| factor * v).collect())
            }

            /// `self + factor * other`.
            pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
                debug_assert_eq!(self.dim(), other.dim());
                Self(
                    self.0
                        .iter()
                        .zip(&other.0)
                        .map(|(a, b)| a + factor * b)
                        .collect(),
                )
            }

            pub fn max_abs(&self) -> f64 {
                self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}

coefficient_vector!(Primal);
coefficient_vector!(Dual);

/// A finite-dimensional model of a real Hilbert space.
///
/// The Gram matrix is factorized once at construction; the space is
/// immutable afterwards and can be shared freely between threads.
#[derive(Clone, Debug)]
pub struct InnerProductSpace {
    gram: CsrMatrix,
    factor: SkylineCholesky,
    euclidean: bool,
}

impl InnerProductSpace {
    /// Validates `gram` (symmetric to 1e-12 relative, positive definite) and
    /// factorizes it.
    pub fn new(gram: CsrMatrix) -> Result<Self> {
        check_dim(gram.nrows(), gram.ncols())?;
        if gram.nrows() == 0 {
            return Err(Error::InvalidArgument("space dimension must be positive".into()));
        }
        let asym = gram.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::Factorization(format!(
                "Gram matrix asymmetric (relative deviation {asym:e})"
            )));
        }
        let factor = SkylineCholesky::factor(&gram)?;
        let euclidean = gram.is_identity();
        Ok(Self {
            gram,
            factor,
            euclidean,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(CsrMatrix::from_dense(rows)?)
    }

    /// `R^n` with the standard inner product.
    pub fn euclidean(dim: usize) -> Self {
        Self::new(CsrMatrix::identity(dim)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CsrMatrix {
        &self.gram
    }

    pub fn is_euclidean(&self) -> bool {
        self.euclidean
    }

    fn check(&self, len: usize) -> Result<()> {
        check_dim(self.dim(), len)
    }

    pub fn inner(&self, u: &Primal, v: &Primal) -> Result<f64> {
        self.check(u.dim())?;
        self.check(v.dim())?;
        if self.euclidean {
            return Ok(dot(u.coeffs(), v.coeffs()));
        }
        self.gram.bilinear(u.coeffs(), v.coeffs())
    }

    pub fn norm(&self, v: &Primal) -> Result<f64> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }

    /// The Riesz map `R: H → H*`, `v ↦ ⟨v, ·⟩`.
    pub fn riesz(&self, v: &Primal) -> Result<Dual> {
        self.check(v.dim())?;
        if self.euclidean {
            return Ok(Dual(v.0.clone()));
        }
        Ok(Dual(self.gram.mul_vec(v.coeffs())?))
    }

    /// The inverse Riesz map: returns `r` with `M r = ξ`.
    pub fn riesz_inv(&self, xi: &Dual) -> Result<Primal> {
        self.check(xi.dim())?;
        if self.euclidean {
            return Ok(Primal(xi.0.clone()));
        }
        Ok(Primal(self.factor.solve(xi.coeffs())?))
    }

    /// `ξ(v)`; independent of the Gram matrix.
    pub fn dual_pair(&self, xi: &Dual, v: &Primal) -> Result<f64> {
        self.check(xi.dim())?;
        self.check(v.dim())?;
        Ok(dot(xi.coeffs(), v.coeffs()))
    }

    pub fn dual_inner(&self, xi: &Dual, eta: &Dual) -> Result<f64> {
        self.check(eta.dim())?;
        let r = self.riesz_inv(xi)?;
        Ok(dot(eta.coeffs(), r.coeffs()))
    }

    pub fn dual_norm(&self, xi: &Dual) -> Result<f64> {
        Ok(self.dual_inner(xi, xi)?.max(0.0).sqrt())
    }
}
