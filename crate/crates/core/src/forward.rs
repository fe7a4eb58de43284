//! Exterior-value problem `((-Δ)^s + q) u = 0` in the interior region with
//! `u = f` on the exterior, and the associated Poisson operator.
//!
//! Eliminating the prescribed exterior values gives the Schur system
//! `u_Ω = -(A_ΩΩ + Q)^{-1} A_ΩE f`. The problem is well-posed exactly when
//! that interior block is invertible, the discrete rendering of "zero is
//! not an exterior Dirichlet eigenvalue"; it holds in particular for q ≥ 0.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, LU};

use crate::fracop::FracOperator;
use crate::grid::{GridFunction, RegionPartition};
use crate::linalg;
use crate::scalar::abs;
use crate::{Error, Result};

/// Relative tolerance on `σ_min` below which the interior operator is
/// declared singular.
pub const WELLPOSED_RTOL: f64 = 1e-10;

/// Bounded potential on the interior nodes, in region order.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: DVector<f64>,
}

impl Potential {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(
                "potential contains non-finite values".into(),
            ));
        }
        Ok(Potential { values })
    }

    pub fn zero(len: usize) -> Self {
        Potential {
            values: DVector::zeros(len),
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    /// Sup-norm bound of the potential.
    pub fn bound(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(abs(v)))
    }
}

/// Assembled interior problem for one `(operator, potential)` pair with a
/// cached LU factorization; immutable after construction, so solves may run
/// concurrently.
pub struct ForwardProblem<'a> {
    op: &'a FracOperator,
    partition: &'a RegionPartition,
    q: Potential,
    interior: DMatrix<f64>,
    coupling: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    sigma_min: f64,
    tol: f64,
}

impl<'a> ForwardProblem<'a> {
    pub fn assemble(
        op: &'a FracOperator,
        partition: &'a RegionPartition,
        q: Potential,
    ) -> Result<Self> {
        if op.grid() != partition.grid() {
            return Err(Error::IndexMismatch {
                expected: partition.grid().node_count(),
                got: op.grid().node_count(),
            });
        }
        let omega = partition.omega();
        if q.len() != omega.len() {
            return Err(Error::IndexMismatch {
                expected: omega.len(),
                got: q.len(),
            });
        }
        let mut interior = linalg::submatrix(op.matrix(), omega, omega);
        for (k, &qv) in q.values().iter().enumerate() {
            interior[(k, k)] += qv;
        }
        let coupling = linalg::submatrix(op.matrix(), omega, partition.exterior());
        // symmetric block: σ_min = min |λ|
        let (eigvals, _) = linalg::sym_eig(&interior)?;
        let sigma_min = eigvals.iter().fold(f64::INFINITY, |m, &v| m.min(abs(v)));
        let tol = WELLPOSED_RTOL * linalg::max_abs(&interior);
        let lu = interior.clone().lu();
        Ok(ForwardProblem {
            op,
            partition,
            q,
            interior,
            coupling,
            lu,
            sigma_min,
            tol,
        })
    }

    pub fn operator(&self) -> &FracOperator {
        self.op
    }

    pub fn partition(&self) -> &RegionPartition {
        self.partition
    }

    pub fn potential(&self) -> &Potential {
        &self.q
    }

    pub fn interior_matrix(&self) -> &DMatrix<f64> {
        &self.interior
    }

    /// Smallest singular value of the interior block (diagnostic).
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// Singularity tolerance: `1e-10` times the max-abs interior entry.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn is_well_posed(&self) -> bool {
        self.sigma_min > self.tol
    }

    fn require_well_posed(&self) -> Result<()> {
        if self.is_well_posed() {
            Ok(())
        } else {
            Err(Error::IllPosed {
                sigma_min: self.sigma_min,
                tol: self.tol,
            })
        }
    }

    /// Solves the exterior-value problem for data `f` on the full exterior
    /// (exterior order). The solution satisfies `u|_ext = f` exactly and
    /// `(A^s u + q u)|_Ω = 0` up to factorization round-off.
    pub fn solve(&self, f: &DVector<f64>) -> Result<GridFunction> {
        self.require_well_posed()?;
        let ext = self.partition.exterior();
        if f.len() != ext.len() {
            return Err(Error::IndexMismatch {
                expected: ext.len(),
                got: f.len(),
            });
        }
        let rhs = -(&self.coupling * f);
        let u_omega = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::NumericalFailure("interior LU solve failed".into()))?;
        let mut values = DVector::zeros(self.partition.grid().node_count());
        for (k, &i) in self.partition.omega().iter().enumerate() {
            values[i] = u_omega[k];
        }
        for (k, &i) in ext.iter().enumerate() {
            values[i] = f[k];
        }
        GridFunction::new(self.partition.grid().clone(), values)
    }

    /// Solves with data supported on a window (window order, zero on the
    /// rest of the exterior).
    pub fn solve_window(&self, window: &[usize], data: &DVector<f64>) -> Result<GridFunction> {
        let f = self.partition.window_to_exterior(window, data)?;
        self.solve(&f)
    }

    /// Interior solution values for every indicator datum of the window:
    /// column j is `solve(e_j)|_Ω`. This is the discrete Poisson operator
    /// restricted to the interior.
    pub fn poisson_operator(&self, window: &[usize]) -> Result<DMatrix<f64>> {
        self.require_well_posed()?;
        let positions = self.partition.exterior_positions(window)?;
        let cols: Vec<usize> = positions.to_vec();
        let rhs = -DMatrix::from_fn(self.partition.omega().len(), cols.len(), |i, j| {
            self.coupling[(i, cols[j])]
        });
        self.lu
            .solve(&rhs)
            .ok_or_else(|| Error::NumericalFailure("interior LU solve failed".into()))
    }

    /// Solves the inhomogeneous problem with interior source `F` and zero
    /// exterior values: `(A^s φ + q φ)|_Ω = F`, `φ|_ext = 0`.
    pub fn solve_interior_source(&self, source: &DVector<f64>) -> Result<GridFunction> {
        self.require_well_posed()?;
        let omega = self.partition.omega();
        if source.len() != omega.len() {
            return Err(Error::IndexMismatch {
                expected: omega.len(),
                got: source.len(),
            });
        }
        let phi_omega = self
            .lu
            .solve(source)
            .ok_or_else(|| Error::NumericalFailure("interior LU solve failed".into()))?;
        crate::grid::extend_by_zero(self.partition.grid(), omega, &phi_omega)
    }

    /// Interior residual `max |(A^s u + q u)|_Ω|` of a candidate solution,
    /// relative to the operator scale (diagnostic oracle for tests).
    pub fn interior_residual(&self, u: &GridFunction) -> Result<f64> {
        let au = self.op.apply(u)?;
        let omega = self.partition.omega();
        let u_om = u.restrict(omega)?;
        let mut worst: f64 = 0.0;
        for (k, &i) in omega.iter().enumerate() {
            let r = au.values()[i] + self.q.values()[k] * u_om[k];
            worst = worst.max(abs(r));
        }
        let scale = linalg::max_abs(self.op.matrix()) * u.max_abs().max(1e-300);
        Ok(worst / scale)
    }
}
