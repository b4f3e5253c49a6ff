//! Dense primal-dual interior-point solver for linear and second-order cone
//! programs in the form
//!
//! ```text
//! minimize    cᵀx
//! subject to  A x = b
//!             h − G x ∈ K
//! ```
//!
//! where `K` is a product of nonnegative orthants and second-order cones.
//! The solver runs on the homogeneous self-dual embedding, so infeasible and
//! unbounded problems are reported through certificates instead of
//! diverging.

mod cones;
mod solver;
mod text;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use cones::{total_degree, total_dim, violation, Cone};
pub use solver::{feasibility, solve, solve_lp, solve_with, Settings};
pub use text::{dump, load};

/// Default stopping tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub cones: Vec<Cone>,
}

impl ConicProblem {
    /// Problem without equality constraints.
    pub fn new(c: DVector<f64>, g: DMatrix<f64>, h: DVector<f64>, cones: Vec<Cone>) -> Self {
        let n = c.len();
        Self {
            c,
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
            g,
            h,
            cones,
        }
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_eq(&self) -> usize {
        self.b.len()
    }

    pub fn num_cone_rows(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, p) = (self.num_vars(), self.num_eq(), self.num_cone_rows());
        let mismatch = |what: &str| Err(Error::DimensionMismatch(what.to_string()));
        if self.a.shape() != (m, n) {
            return mismatch("A must be len(b) x len(c)");
        }
        if self.g.shape() != (p, n) {
            return mismatch("G must be len(h) x len(c)");
        }
        if total_dim(&self.cones) != p {
            return mismatch("cone dimensions must sum to len(h)");
        }
        if m > n {
            return mismatch("more equalities than variables");
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(self.c.as_slice())
            && finite(self.a.as_slice())
            && finite(self.b.as_slice())
            && finite(self.g.as_slice())
            && finite(self.h.as_slice()))
        {
            return Err(Error::NonFinite("conic problem data"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: Status,
    /// Primal point (a ray for `DualInfeasible`).
    pub x: DVector<f64>,
    /// Equality multipliers.
    pub y: DVector<f64>,
    /// Cone multipliers (a certificate for `PrimalInfeasible`).
    pub z: DVector<f64>,
    /// Primal slack `h − G x`.
    pub s: DVector<f64>,
    pub obj: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `sᵀz` at the returned point.
    pub gap: f64,
    pub iterations: usize,
    /// Complementarity measure `μ` at the start of each iteration.
    pub gap_trace: Vec<f64>,
}

/// Outcome of a pure feasibility query.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(DVector<f64>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}
