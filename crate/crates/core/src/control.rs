//! Quantitative Runge approximation: exterior controls supported in a
//! window whose solutions approximate a prescribed interior target.
//!
//! Density of interior restrictions of window-supported solutions makes the
//! approximation error arbitrarily small; the computable surrogate is the
//! Tikhonov minimizer of `‖P f - v‖² + α ‖f‖²` in the weighted norms, whose
//! error/cost trade-off as α shrinks quantifies the cost of approximate
//! controllability. The dual certificate solves the adjoint problem with an
//! interior source and reads off the window trace that obstructs
//! approximation; antilocality forces that trace to be nonzero for any
//! nonzero source, which is exactly why the closure is everything.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::forward::ForwardProblem;
use crate::grid::{weighted_norm, GridFunction};
use crate::{Error, Result};

/// Tikhonov control along with its diagnostics, all in `h^dim`-weighted
/// norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlResult {
    /// Control data on the window, window order.
    pub f: DVector<f64>,
    /// Regularization weight used.
    pub alpha: f64,
    /// `‖P f - v‖` on the interior region.
    pub achieved_error: f64,
    /// `‖f‖` on the window.
    pub control_cost: f64,
    /// Norm of the normal-equation gradient at the minimizer, scaled.
    pub optimality_residual: f64,
}

/// Minimizes `‖P f - v‖² + α ‖f‖²` through the normal equations
/// `(PᵀP + αI) f = Pᵀ v` with a symmetric positive-definite solve.
pub fn compute_control(
    problem: &ForwardProblem<'_>,
    window: &[usize],
    target: &DVector<f64>,
    alpha: f64,
) -> Result<ControlResult> {
    if !(alpha > 0.0) {
        return Err(Error::NumericalFailure(alloc::format!(
            "regularization weight must be positive, got {alpha}"
        )));
    }
    let omega = problem.partition().omega();
    if target.len() != omega.len() {
        return Err(Error::IndexMismatch {
            expected: omega.len(),
            got: target.len(),
        });
    }
    let p = problem.poisson_operator(window)?;
    let mut gram = p.transpose() * &p;
    for k in 0..gram.nrows() {
        gram[(k, k)] += alpha;
    }
    let rhs = p.transpose() * target;
    let chol = gram.clone().cholesky().ok_or_else(|| {
        Error::NumericalFailure(
            "normal equations are numerically singular; increase alpha".into(),
        )
    })?;
    let f = chol.solve(&rhs);

    let grid = problem.partition().grid();
    let residual = &p * &f - target;
    let gradient = &gram * &f - &rhs;
    let scale = rhs.norm() + alpha * f.norm();
    Ok(ControlResult {
        achieved_error: weighted_norm(grid, &residual),
        control_cost: weighted_norm(grid, &f),
        optimality_residual: gradient.norm() / scale.max(1e-300),
        alpha,
        f,
    })
}

/// One [`compute_control`] per regularization weight; weights must be
/// positive and strictly decreasing so the rows trace the error/cost curve.
pub fn cost_curve(
    problem: &ForwardProblem<'_>,
    window: &[usize],
    target: &DVector<f64>,
    alphas: &[f64],
) -> Result<Vec<ControlResult>> {
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::NumericalFailure(
            "alpha sweep must be strictly decreasing".into(),
        ));
    }
    alphas
        .iter()
        .map(|&a| compute_control(problem, window, target, a))
        .collect()
}

/// Adjoint solution for an interior source together with its window trace,
/// the discrete obstruction to approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    /// Solution of `(A^s + q) φ = F` in the interior with zero exterior
    /// values.
    pub phi: GridFunction,
    /// `(A^s φ)` sampled on the window, window order.
    pub window_trace: DVector<f64>,
}

/// Solves the inhomogeneous adjoint problem and evaluates the window trace.
/// The duality identity `⟨F, P_q f⟩_Ω = -⟨A^s φ, f⟩_W` holds exactly for
/// every window datum f.
pub fn dual_certificate(
    problem: &ForwardProblem<'_>,
    window: &[usize],
    source: &DVector<f64>,
) -> Result<DualCertificate> {
    problem.partition().exterior_positions(window)?;
    let phi = problem.solve_interior_source(source)?;
    let a_phi = problem.operator().apply(&phi)?;
    let window_trace = a_phi.restrict(window)?;
    Ok(DualCertificate { phi, window_trace })
}

/// SVD-filtered solution of the same Tikhonov problem, used as the
/// independent oracle for the normal-equation path.
pub fn control_svd_oracle(
    p: &DMatrix<f64>,
    target: &DVector<f64>,
    alpha: f64,
) -> Result<DVector<f64>> {
    let svd = crate::linalg::svd(p)?;
    let u = svd.u.as_ref().ok_or(Error::SvdFailure)?;
    let vt = svd.v_t.as_ref().ok_or(Error::SvdFailure)?;
    let coeffs = u.transpose() * target;
    let mut filtered = DVector::zeros(coeffs.len());
    for k in 0..coeffs.len() {
        let s = svd.singular_values[k];
        filtered[k] = s * coeffs[k] / (s * s + alpha);
    }
    Ok(vt.transpose() * filtered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::Potential;
    use crate::fracop::assemble_spectral;
    use crate::grid::{Grid, HyperBox, RegionPartition};
    use crate::scalar::abs;

    fn setup(n: usize) -> (Grid, RegionPartition, crate::fracop::FracOperator) {
        let h = 1.0 / (n as f64 - 1.0);
        let grid = Grid::new(1, &[n], h, &[0.0]).unwrap();
        let part = RegionPartition::from_boxes(
            &grid,
            &HyperBox::new(&[(0.3, 0.7)]).unwrap(),
            &HyperBox::new(&[(0.0, 0.25)]).unwrap(),
            &HyperBox::new(&[(0.75, 1.0)]).unwrap(),
        )
        .unwrap();
        let op = assemble_spectral(&grid, 0.5).unwrap();
        (grid, part, op)
    }

    fn pseudo_random(len: usize, seed: usize) -> DVector<f64> {
        DVector::from_fn(len, |k, _| {
            let v = ((k * 2654435761 + seed * 1013904223) % 1000) as f64 / 1000.0;
            2.0 * v - 1.0
        })
    }

    #[test]
    fn zero_target_gives_zero_control() {
        let (_g, part, op) = setup(24);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        let res = compute_control(&p, part.w1(), &DVector::zeros(part.omega().len()), 1e-6).unwrap();
        assert_eq!(res.f.norm(), 0.0);
        assert_eq!(res.achieved_error, 0.0);
        assert_eq!(res.control_cost, 0.0);
    }

    #[test]
    fn in_range_target_is_recovered_as_alpha_shrinks() {
        let (_g, part, op) = setup(24);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        let pmat = p.poisson_operator(part.w1()).unwrap();
        // target generated from a control in the well-resolved subspace
        let svd = crate::linalg::svd(&pmat).unwrap();
        let vt = svd.v_t.as_ref().unwrap();
        let g = vt.row(0).transpose() + vt.row(1).transpose() * 0.5;
        let target = &pmat * &g;
        let mut prev_err = f64::INFINITY;
        let mut prev_gap = f64::INFINITY;
        for &alpha in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let res = compute_control(&p, part.w1(), &target, alpha).unwrap();
            assert!(res.achieved_error <= prev_err + 1e-14);
            let gap = (res.f.clone() - &g).norm();
            assert!(gap <= prev_gap + 1e-12);
            prev_err = res.achieved_error;
            prev_gap = gap;
        }
        assert!(prev_err < 1e-6);
        assert!(prev_gap < 1e-4 * g.norm());
    }

    #[test]
    fn optimality_residual_is_small() {
        let (_g, part, op) = setup(24);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        let target = DVector::from_element(part.omega().len(), 1.0);
        for &alpha in &[1e-2, 1e-6, 1e-10] {
            let res = compute_control(&p, part.w1(), &target, alpha).unwrap();
            assert!(res.optimality_residual <= 1e-8, "alpha {alpha}");
        }
    }

    #[test]
    fn normal_equations_match_svd_oracle() {
        let (_g, part, op) = setup(24);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        let pmat = p.poisson_operator(part.w1()).unwrap();
        let target = pseudo_random(part.omega().len(), 3);
        for &alpha in &[1e-2, 1e-6, 1e-10] {
            let res = compute_control(&p, part.w1(), &target, alpha).unwrap();
            let oracle = control_svd_oracle(&pmat, &target, alpha).unwrap();
            let gap = (res.f.clone() - &oracle).norm();
            assert!(gap <= 1e-8 * oracle.norm().max(1e-12), "alpha {alpha}: {gap}");
        }
    }

    #[test]
    fn cost_curve_is_monotone_and_reproduces_single_solves() {
        let (_g, part, op) = setup(32);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        let target = DVector::from_element(part.omega().len(), 1.0);
        let alphas = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10];
        let curve = cost_curve(&p, part.w1(), &target, &alphas).unwrap();
        let single = compute_control(&p, part.w1(), &target, 1e-6).unwrap();
        assert_eq!(curve[2], single);
        for w in curve.windows(2) {
            assert!(w[1].achieved_error <= w[0].achieved_error + 1e-14);
            assert!(w[1].control_cost >= w[0].control_cost - 1e-14);
        }

        let err = cost_curve(&p, part.w1(), &target, &[1e-4, 1e-2]);
        assert!(err.is_err());
    }

    #[test]
    fn dual_certificate_zero_source() {
        let (_g, part, op) = setup(20);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        let cert = dual_certificate(&p, part.w1(), &DVector::zeros(part.omega().len())).unwrap();
        assert_eq!(cert.phi.max_abs(), 0.0);
        assert_eq!(cert.window_trace.norm(), 0.0);
    }

    #[test]
    fn duality_identity_on_window_basis() {
        let (g, part, op) = setup(32);
        let q = Potential::new(pseudo_random(part.omega().len(), 8).map(|v| v.abs())).unwrap();
        let p = ForwardProblem::assemble(&op, &part, q).unwrap();
        let w = part.w1().to_vec();
        let weight = g.cell_weight();
        for seed in 0..5 {
            let source = pseudo_random(part.omega().len(), 40 + seed);
            let cert = dual_certificate(&p, &w, &source).unwrap();
            for j in 0..w.len() {
                let mut data = DVector::zeros(w.len());
                data[j] = 1.0;
                let u = p.solve_window(&w, &data).unwrap();
                let u_om = u.restrict(part.omega()).unwrap();
                let lhs = weight * source.dot(&u_om);
                let rhs = -weight * cert.window_trace[j];
                assert!(
                    abs(lhs - rhs) <= 1e-9 * (1.0 + abs(lhs)),
                    "seed {seed} basis {j}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn nonzero_source_has_nonzero_window_trace() {
        let (_g, part, op) = setup(28);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        for seed in 0..10 {
            let source = pseudo_random(part.omega().len(), 60 + seed);
            let cert = dual_certificate(&p, part.w1(), &source).unwrap();
            assert!(cert.window_trace.norm() > 1e-12 * source.norm());
        }
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let (_g, part, op) = setup(20);
        let p = ForwardProblem::assemble(&op, &part, Potential::zero(part.omega().len())).unwrap();
        let target = DVector::zeros(part.omega().len());
        assert!(compute_control(&p, part.w1(), &target, 0.0).is_err());
        assert!(compute_control(&p, part.w1(), &target, -1.0).is_err());
    }
}
