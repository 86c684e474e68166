//! Fast solve, residual check, refinement, dense fallback.

use num_complex::Complex64;

use crate::classic::{bareiss_factor, bareiss_solve, levinson_solve_report};
use crate::displacement::CauchyTypeSystem;
use crate::error::{DisplaceError, Result};
use crate::factorization::Factorization;
use crate::gko::{gko_factor, gko_solve, GeneratorConditioning};
use crate::matrices::{
    dense_lu_pp, estimate_kappa_inf, toeplitz_matvec, DenseMatrix, HankelMatrix, Materialize,
    ToeplitzMatrix, Vector,
};
use crate::report::{residual_metrics, Method, SolveReport};
use crate::scalar::{Scalar, EPS};
use crate::seminormal::seminormal_solve;
use crate::toeplitz_pipeline::{
    gko_toeplitz_factor, gko_toeplitz_solve, hankel_solve, to_scalar, GkoToeplitzFactorization,
};

#[cfg(any(test, feature = "fault-injection"))]
use crate::gko::{gko_factor_with_fault, FaultInjection};
#[cfg(any(test, feature = "fault-injection"))]
use crate::toeplitz_pipeline::gko_toeplitz_factor_with_fault;

/// Refinement sweeps attempted with each factorization before giving up on it.
pub const REFINEMENT_SWEEPS: usize = 2;

/// Conditioning used by the fast GKO path.
pub const DRIVER_CONDITIONING: GeneratorConditioning = GeneratorConditioning::GuOrthogonal;

/// `100 n eps`.
pub fn default_tolerance(n: usize) -> f64 {
    100.0 * n as f64 * EPS
}

/// Any matrix the driver accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuredSystem<S: Scalar = f64> {
    Toeplitz(ToeplitzMatrix<S>),
    Hankel(HankelMatrix<S>),
    Cauchy(CauchyTypeSystem<S>),
    Dense(DenseMatrix<S>),
}

impl<S: Scalar> StructuredSystem<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            StructuredSystem::Toeplitz(_) => "toeplitz",
            StructuredSystem::Hankel(_) => "hankel",
            StructuredSystem::Cauchy(_) => "cauchy",
            StructuredSystem::Dense(_) => "dense",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            StructuredSystem::Toeplitz(t) => t.n(),
            StructuredSystem::Hankel(h) => h.n(),
            StructuredSystem::Cauchy(c) => c.n(),
            StructuredSystem::Dense(d) => d.rows(),
        }
    }

    pub fn matvec(&self, x: &[S]) -> Result<Vector<S>> {
        match self {
            StructuredSystem::Toeplitz(t) => toeplitz_matvec(t, x),
            StructuredSystem::Hankel(h) => h.matvec(x),
            StructuredSystem::Cauchy(c) => c.matvec(x),
            StructuredSystem::Dense(d) => d.matvec(x),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        match self {
            StructuredSystem::Toeplitz(t) => t.norm_inf(),
            StructuredSystem::Hankel(h) => h.row_reversed().norm_inf(),
            StructuredSystem::Cauchy(c) => c.norm_inf(),
            StructuredSystem::Dense(d) => d.norm_inf(),
        }
    }
}

impl<S: Scalar> Materialize<S> for StructuredSystem<S> {
    fn materialize(&self) -> Result<DenseMatrix<S>> {
        match self {
            StructuredSystem::Toeplitz(t) => t.materialize(),
            StructuredSystem::Hankel(h) => h.materialize(),
            StructuredSystem::Cauchy(c) => c.materialize(),
            StructuredSystem::Dense(d) => d.materialize(),
        }
    }
}

type SolveDyn<'a, S> = dyn Fn(&[S]) -> Result<(Vector<S>, f64)> + 'a;
type SolveFn<'a, S> = Box<SolveDyn<'a, S>>;
type AdjointFn<'a, S> = Box<dyn Fn(&[S]) -> Result<Vector<S>> + 'a>;

/// A factorization viewed through `S`-valued solves; the second component of
/// `solve` is the discarded imaginary part (0 unless a complex pipeline serves
/// a real system).
struct FastSolver<'a, S: Scalar> {
    method: Method,
    growth: f64,
    order: usize,
    solve: SolveFn<'a, S>,
    solve_adjoint: AdjointFn<'a, S>,
}

impl<'a, S: Scalar> FastSolver<'a, S> {
    fn from_factorization<F: Factorization<S> + 'a>(method: Method, growth: f64, f: F) -> Self {
        let f = std::rc::Rc::new(f);
        let g = f.clone();
        FastSolver {
            method,
            growth,
            order: f.order(),
            solve: Box::new(move |b| Ok((f.solve(b)?, 0.0))),
            solve_adjoint: Box::new(move |b| g.solve_adjoint(b)),
        }
    }

    /// Toeplitz factorization through the DFT pipeline. With `reverse`, serves
    /// the Hankel matrix `J T` instead.
    fn from_pipeline(
        cond: GeneratorConditioning,
        fac: GkoToeplitzFactorization,
        reverse: bool,
    ) -> Self {
        let fac = std::rc::Rc::new(fac);
        let g = fac.clone();
        let growth = fac.growth();
        let order = fac.order();
        let to_c = |b: &[S]| b.iter().map(|v| v.to_complex()).collect::<Vec<Complex64>>();
        FastSolver {
            method: Method::Gko(cond),
            growth,
            order,
            solve: Box::new(move |b| {
                let mut bc = to_c(b);
                if reverse {
                    bc.reverse();
                }
                to_scalar::<S>(&fac.solve(&bc)?)
            }),
            solve_adjoint: Box::new(move |c| {
                let mut z = g.solve_adjoint(&to_c(c))?.into_inner();
                if reverse {
                    z.reverse();
                }
                Ok(z.into_iter()
                    .map(S::from_complex)
                    .collect::<Vec<_>>()
                    .into())
            }),
        }
    }

    /// Real Bareiss factors serving a real system stored as `S`.
    fn from_bareiss(t: &ToeplitzMatrix<S>) -> Result<Self> {
        let f = std::rc::Rc::new(bareiss_factor(&t.map(|v| v.re()))?);
        let g = f.clone();
        let lift = |v: Vector| v.iter().map(|&e| S::from_f64(e)).collect::<Vec<_>>().into();
        let lower = |b: &[S]| b.iter().map(|v| v.re()).collect::<Vec<f64>>();
        Ok(FastSolver {
            method: Method::Bareiss,
            growth: 1.0,
            order: t.n(),
            solve: Box::new(move |b| Ok((lift(f.solve(&lower(b))?), 0.0))),
            solve_adjoint: Box::new(move |b| Ok(lift(g.solve_adjoint(&lower(b))?))),
        })
    }
}

/// Preferred fast method: Bareiss for real symmetric positive definite Toeplitz
/// matrices, GKO (through the DFT pipeline for Toeplitz and Hankel) otherwise,
/// partial-pivoting LU for dense input.
fn fast_solver<S: Scalar>(sys: &StructuredSystem<S>) -> Result<FastSolver<'static, S>> {
    match sys {
        StructuredSystem::Toeplitz(t) => {
            if !S::IS_COMPLEX && t.is_symmetric() && t.diag(0).re() > 0.0 {
                if let Ok(f) = FastSolver::from_bareiss(t) {
                    return Ok(f);
                }
            }
            let fac = gko_toeplitz_factor(t, DRIVER_CONDITIONING)?;
            Ok(FastSolver::from_pipeline(DRIVER_CONDITIONING, fac, false))
        }
        StructuredSystem::Hankel(h) => {
            let fac = gko_toeplitz_factor(&h.row_reversed(), DRIVER_CONDITIONING)?;
            Ok(FastSolver::from_pipeline(DRIVER_CONDITIONING, fac, true))
        }
        StructuredSystem::Cauchy(c) => {
            let f = gko_factor(c, DRIVER_CONDITIONING)?;
            Ok(FastSolver::from_factorization(
                Method::Gko(DRIVER_CONDITIONING),
                f.growth,
                f,
            ))
        }
        StructuredSystem::Dense(d) => Ok(FastSolver::from_factorization(
            Method::Dense,
            1.0,
            dense_lu_pp(d)?,
        )),
    }
}

#[cfg(any(test, feature = "fault-injection"))]
fn faulty_solver<S: Scalar>(
    sys: &StructuredSystem<S>,
    fault: FaultInjection,
) -> Result<FastSolver<'static, S>> {
    let cond = DRIVER_CONDITIONING;
    match sys {
        StructuredSystem::Toeplitz(t) => {
            let fac = gko_toeplitz_factor_with_fault(t, cond, fault)?;
            Ok(FastSolver::from_pipeline(cond, fac, false))
        }
        StructuredSystem::Hankel(h) => {
            let fac = gko_toeplitz_factor_with_fault(&h.row_reversed(), cond, fault)?;
            Ok(FastSolver::from_pipeline(cond, fac, true))
        }
        StructuredSystem::Cauchy(c) => {
            let f = gko_factor_with_fault(c, cond, fault)?;
            Ok(FastSolver::from_factorization(
                Method::Gko(cond),
                f.growth,
                f,
            ))
        }
        StructuredSystem::Dense(_) => Err(DisplaceError::InvalidInput(
            "fault injection targets the structured generator update; dense input has none".into(),
        )),
    }
}

/// State of one solve-check-refine attempt.
struct Attempt<S: Scalar> {
    x: Vector<S>,
    normalized: f64,
    leak: f64,
    sweeps: usize,
}

fn residual<S: Scalar>(sys: &StructuredSystem<S>, x: &[S], b: &[S]) -> Result<Vec<S>> {
    let ax = sys.matvec(x)?;
    Ok(ax.iter().zip(b).map(|(&a, &bb)| a - bb).collect())
}

/// Solves, then refines with the same solver while the normalized residual
/// exceeds `tol`, for at most [`REFINEMENT_SWEEPS`] sweeps. Residuals go to
/// `history`.
fn attempt<S: Scalar>(
    sys: &StructuredSystem<S>,
    solve: &SolveDyn<'_, S>,
    b: &[S],
    tol: f64,
    norm_a: f64,
    history: &mut Vec<f64>,
) -> Result<Attempt<S>> {
    let (mut x, mut leak) = solve(b)?;
    let measure = |x: &[S]| -> Result<(f64, Vec<S>)> {
        let r = residual(sys, x, b)?;
        Ok((residual_metrics(&r, norm_a, x, b).normalized, r))
    };
    let (mut normalized, mut r) = measure(&x)?;
    history.push(normalized);
    let mut sweeps = 0;
    while !(normalized <= tol) && sweeps < REFINEMENT_SWEEPS && x.iter().all(|v| v.is_finite()) {
        let (d, l) = solve(&r)?;
        x = x.sub(&d);
        leak = leak.max(l);
        (normalized, r) = measure(&x)?;
        history.push(normalized);
        sweeps += 1;
    }
    Ok(Attempt {
        x,
        normalized,
        leak,
        sweeps,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish<S: Scalar>(
    sys: &StructuredSystem<S>,
    b: &[S],
    method: Method,
    growth: f64,
    kappa: f64,
    att: Attempt<S>,
    history: Vec<f64>,
    fallback_used: bool,
) -> Result<SolveReport<S>> {
    let norm_a = sys.norm_inf();
    let r = residual(sys, &att.x, b)?;
    let res = residual_metrics(&r, norm_a, &att.x, b);
    let mut report = SolveReport::direct(method, att.x, res, norm_a, kappa, growth);
    report.refine_iters = att.sweeps;
    report.fallback_used = fallback_used;
    report.residual_history = history;
    report.imaginary_leak = att.leak;
    Ok(report)
}

fn drive<S: Scalar>(
    sys: &StructuredSystem<S>,
    b: &[S],
    tol: Option<f64>,
    fast: impl FnOnce() -> Result<FastSolver<'static, S>>,
) -> Result<SolveReport<S>> {
    check_square_rhs(sys, b)?;
    let n = sys.n();
    let tol = tol.unwrap_or_else(|| default_tolerance(n));
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(DisplaceError::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let norm_a = sys.norm_inf();
    let mut history = Vec::new();
    let mut best = f64::INFINITY;

    if let Ok(f) = fast() {
        if let Ok(att) = attempt(sys, &*f.solve, b, tol, norm_a, &mut history) {
            if att.normalized <= tol {
                let kappa = estimate_kappa_inf(
                    f.order,
                    norm_a,
                    |v| (f.solve)(v).map(|(x, _)| x.into_inner()),
                    |v| (f.solve_adjoint)(v).map(Vector::into_inner),
                )?;
                return finish(sys, b, f.method, f.growth, kappa, att, history, false);
            }
            if att.normalized.is_finite() {
                best = best.min(att.normalized);
            }
        }
    }

    let dense = sys.materialize()?;
    let unsolved = |best: f64| DisplaceError::UnsolvedWithinTolerance { tol, best };
    let lu = dense_lu_pp(&dense).map_err(|_| unsolved(best))?;
    let solve = |v: &[S]| Ok((lu.solve(v)?, 0.0));
    let att = attempt(sys, &solve, b, tol, norm_a, &mut history)?;
    if !(att.normalized <= tol) {
        return Err(unsolved(best.min(att.normalized)));
    }
    let kappa = lu.kappa_inf_estimate(norm_a)?;
    finish(sys, b, Method::Dense, 1.0, kappa, att, history, true)
}

fn check_square_rhs<S: Scalar>(sys: &StructuredSystem<S>, b: &[S]) -> Result<()> {
    if let StructuredSystem::Dense(d) = sys {
        if !d.is_square() {
            return Err(DisplaceError::dims(format!(
                "{}x{} matrix is not square",
                d.rows(),
                d.cols()
            )));
        }
    }
    if b.len() != sys.n() {
        return Err(DisplaceError::dims(format!(
            "{} system of order {}, rhs length {}",
            sys.kind(),
            sys.n(),
            b.len()
        )));
    }
    Ok(())
}

fn lift_report<S: Scalar>(r: SolveReport<f64>) -> SolveReport<S> {
    SolveReport {
        method: r.method,
        x: r.x
            .iter()
            .map(|&v| S::from_f64(v))
            .collect::<Vec<_>>()
            .into(),
        normalized_residual: r.normalized_residual,
        rhs_residual: r.rhs_residual,
        residual_norm: r.residual_norm,
        norm_a: r.norm_a,
        norm_b: r.norm_b,
        kappa: r.kappa,
        generator_growth: r.generator_growth,
        refine_iters: r.refine_iters,
        fallback_used: r.fallback_used,
        residual_history: r.residual_history,
        imaginary_leak: r.imaginary_leak,
    }
}

/// Solves with one named method and no fallback. `refine` is the number of
/// refinement steps for the semi-normal equations, which also accept
/// rectangular dense input (least squares). Returns
/// [`DisplaceError::InvalidInput`] when the method does not apply to the input.
pub fn solve_with_method<S: Scalar>(
    sys: &StructuredSystem<S>,
    b: &[S],
    method: Method,
    refine: usize,
) -> Result<SolveReport<S>> {
    let real = |v: &[S]| v.iter().map(|e| e.re()).collect::<Vec<f64>>();
    match (method, sys) {
        (Method::Seminormal, StructuredSystem::Dense(d)) if !S::IS_COMPLEX => {
            let d = d.map(|v| v.re());
            seminormal_solve(&d, &real(b), refine).map(|(_, r)| lift_report(r))
        }
        _ => {
            check_square_rhs(sys, b)?;
            match (method, sys) {
                (Method::Gko(c), StructuredSystem::Toeplitz(t)) => {
                    gko_toeplitz_solve(t, b, c).map(|(_, r)| r)
                }
                (Method::Gko(c), StructuredSystem::Hankel(h)) => {
                    hankel_solve(h, b, c).map(|(_, r)| r)
                }
                (Method::Gko(c), StructuredSystem::Cauchy(k)) => gko_solve(k, b, c).map(|(_, r)| r),
                (
                    Method::Bareiss | Method::Levinson | Method::Seminormal,
                    StructuredSystem::Toeplitz(t),
                ) if !S::IS_COMPLEX => {
                    let (t, b) = (t.map(|v| v.re()), real(b));
                    let rep = match method {
                        Method::Bareiss => bareiss_solve(&t, &b)?.1,
                        Method::Levinson => levinson_solve_report(&t, &b)?.0,
                        _ => seminormal_solve(&t, &b, refine)?.1,
                    };
                    Ok(lift_report(rep))
                }
                (Method::Dense, _) => {
                    let lu = dense_lu_pp(&sys.materialize()?)?;
                    let x = lu.solve(b)?;
                    let norm_a = sys.norm_inf();
                    let res = residual_metrics(&residual(sys, &x, b)?, norm_a, &x, b);
                    let kappa = lu.kappa_inf_estimate(norm_a)?;
                    Ok(SolveReport::direct(
                        Method::Dense,
                        x,
                        res,
                        norm_a,
                        kappa,
                        1.0,
                    ))
                }
                _ => Err(DisplaceError::InvalidInput(format!(
                    "method {method} does not apply to {}{} input",
                    if S::IS_COMPLEX { "complex " } else { "" },
                    sys.kind()
                ))),
            }
        }
    }
}

/// Solves `A x = b` with the preferred fast method and checks the normalized
/// residual `||A x - b|| / (||A|| ||x||)` against `tol` (default
/// [`default_tolerance`]). Up to [`REFINEMENT_SWEEPS`] refinement sweeps reuse
/// the fast factorization; if the residual is still above `tol`, or the fast
/// method fails outright, the system is solved densely with partial pivoting
/// and `fallback_used` is set.
///
/// Returns [`DisplaceError::UnsolvedWithinTolerance`] when the dense solve
/// cannot meet `tol` either.
pub fn guaranteed_solve<S: Scalar>(
    sys: &StructuredSystem<S>,
    b: &[S],
    tol: Option<f64>,
) -> Result<SolveReport<S>> {
    drive(sys, b, tol, || fast_solver(sys))
}

/// [`guaranteed_solve`] with the fast path's generator update corrupted.
/// The fast path is always GKO here, since that is where the hook lives.
#[cfg(any(test, feature = "fault-injection"))]
pub fn guaranteed_solve_with_fault<S: Scalar>(
    sys: &StructuredSystem<S>,
    b: &[S],
    tol: Option<f64>,
    fault: FaultInjection,
) -> Result<SolveReport<S>> {
    drive(sys, b, tol, || faulty_solver(sys, fault))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_spd_toeplitz, trial_rng, well_conditioned_toeplitz};

    #[test]
    fn identity_takes_fast_path() {
        let t = StructuredSystem::Toeplitz(ToeplitzMatrix::<f64>::identity(5));
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let rep = guaranteed_solve(&t, &b, Some(1e-12)).unwrap();
        assert!(!rep.fallback_used);
        assert_eq!(rep.method, Method::Bareiss);
        assert_eq!(rep.x.into_inner(), b.to_vec());
    }

    #[test]
    fn general_toeplitz_uses_gko() {
        let (t, _) = well_conditioned_toeplitz(&mut trial_rng(11, 0), 24, 1e3).unwrap();
        let b: Vec<f64> = (0..24).map(|i| (i as f64).sin()).collect();
        let rep = guaranteed_solve(&StructuredSystem::Toeplitz(t), &b, None).unwrap();
        assert_eq!(rep.method, Method::Gko(GeneratorConditioning::GuOrthogonal));
        assert!(!rep.fallback_used);
        assert!(rep.normalized_residual <= default_tolerance(24));
    }

    #[test]
    fn fault_forces_fallback() {
        let t = random_spd_toeplitz(&mut trial_rng(12, 0), 16);
        let b = vec![1.0; 16];
        let sys = StructuredSystem::Toeplitz(t);
        let rep = guaranteed_solve_with_fault(
            &sys,
            &b,
            None,
            FaultInjection {
                step: 3,
                magnitude: 1.0,
            },
        )
        .unwrap();
        assert!(rep.fallback_used);
        assert_eq!(rep.method, Method::Dense);
        assert!(rep.normalized_residual <= default_tolerance(16));
    }

    #[test]
    fn singular_system_is_unsolved() {
        let sys =
            StructuredSystem::Dense(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]));
        let err = guaranteed_solve(&sys, &[1.0, 1.0], None).unwrap_err();
        assert_eq!(err.name(), "UnsolvedWithinTolerance");
        assert!(guaranteed_solve(&sys, &[1.0], None).is_err());
        let i = StructuredSystem::Dense(DenseMatrix::<f64>::identity(2));
        assert!(guaranteed_solve(&i, &[1.0, 1.0], Some(0.0)).is_err());
    }

    #[test]
    fn explicit_methods_dispatch() {
        let t = ToeplitzMatrix::symmetric(vec![4.0, 1.0, 0.5]).unwrap();
        let b = [1.0, 2.0, 3.0];
        let sys = StructuredSystem::Toeplitz(t.clone());
        let dense = solve_with_method(&sys, &b, Method::Dense, 0).unwrap();
        for m in Method::ALL {
            let rep = solve_with_method(&sys, &b, m, 3).unwrap();
            assert_eq!(rep.method, m);
            assert!(rep.x.sub(&dense.x).norm_inf() < 1e-14, "{m}");
        }
        let c = StructuredSystem::Toeplitz(t.map(|v| Complex64::new(v, 0.0)));
        let bc = [Complex64::new(1.0, 0.0); 3];
        assert_eq!(
            solve_with_method(&c, &bc, Method::Levinson, 0)
                .unwrap_err()
                .name(),
            "InvalidInput"
        );
        let d = StructuredSystem::Dense(t.to_dense());
        assert_eq!(
            solve_with_method(&d, &b, Method::Gko(GeneratorConditioning::Plain), 0)
                .unwrap_err()
                .name(),
            "InvalidInput"
        );
        let rect = StructuredSystem::Dense(DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]));
        let rep = solve_with_method(&rect, &[1.0, 3.0], Method::Seminormal, 3).unwrap();
        assert!((rep.x[0] - 2.0).abs() < 1e-15);
        assert_eq!(
            guaranteed_solve(&rect, &[1.0, 3.0], None)
                .unwrap_err()
                .name(),
            "DimensionMismatch"
        );
    }

    #[test]
    fn hankel_and_complex_inputs() {
        let h = HankelMatrix::new(vec![1.0, 4.0, 2.0, 0.5, 3.0]).unwrap();
        let x = [1.0, -1.0, 2.0];
        let b = h.matvec(&x).unwrap();
        let rep = guaranteed_solve(&StructuredSystem::Hankel(h), &b, None).unwrap();
        assert!(!rep.fallback_used);
        for (a, e) in rep.x.iter().zip(x) {
            assert!((a - e).abs() < 1e-13);
        }

        let tc = ToeplitzMatrix::new(
            vec![
                Complex64::new(3.0, 1.0),
                Complex64::new(0.5, -1.0),
                Complex64::new(0.0, 0.25),
            ],
            vec![Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.5)],
        )
        .unwrap();
        let bc = vec![Complex64::new(1.0, 0.0); 3];
        let rep = guaranteed_solve(&StructuredSystem::Toeplitz(tc), &bc, None).unwrap();
        assert!(!rep.fallback_used && rep.normalized_residual <= default_tolerance(3));
    }
}
