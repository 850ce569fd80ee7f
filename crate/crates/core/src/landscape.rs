//! Objective, gradient, curvature and Hessian of
//! `F(U) = Σ_m ω_m Tr[U ρ_m U^† O_m]`, and critical-point classification.
//!
//! Directions are Hermitian `A` acting through `s ↦ e^{isA} U`. The
//! curvature `h_U(A)` is the coefficient of `s²` in the expansion of
//! `F(e^{isA} U)`, so `d²F/ds² = 2 h_U(A)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::ensemble::EnsembleProblem;
use crate::error::{Error, Result};
use crate::linalg::{
    self, anticommutator, commutator, duplication_matrices, ensure_hermitian, ensure_unitary,
    hermitian_deviation, hermitian_tolerance, kron, trace_product, CMatrix, RMatrix,
};
use crate::scalar::{abs, cplx, max, real, tol, to_f64, Real};

/// Search direction for optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ascend,
    Descend,
}

impl Direction {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Direction::Ascend => T::one(),
            Direction::Descend => -T::one(),
        }
    }
}

fn check_point<T: Real>(problem: &EnsembleProblem<T>, u: &CMatrix<T>) -> Result<()> {
    let d = problem.dimension();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if u.nrows() != d { u.nrows() } else { u.ncols() },
        });
    }
    ensure_unitary(u)
}

/// `U ρ_m U^†` for every term.
pub fn rotated_states<T: Real>(problem: &EnsembleProblem<T>, u: &CMatrix<T>) -> Vec<CMatrix<T>> {
    let ud = u.adjoint();
    problem
        .terms()
        .iter()
        .map(|t| u * &t.state * &ud)
        .collect()
}

pub(crate) fn value_unchecked<T: Real>(problem: &EnsembleProblem<T>, u: &CMatrix<T>) -> T {
    let ud = u.adjoint();
    problem.terms().iter().fold(T::zero(), |acc, t| {
        acc + t.weight * trace_product(&(u * &t.state * &ud), &t.operator).re
    })
}

/// `F(U)`.
pub fn evaluate<T: Real>(problem: &EnsembleProblem<T>, u: &CMatrix<T>) -> Result<T> {
    check_point(problem, u)?;
    let ud = u.adjoint();
    let mut total = cplx(T::zero(), T::zero());
    for t in problem.terms() {
        total += trace_product(&(u * &t.state * &ud), &t.operator) * cplx(t.weight, T::zero());
    }
    let scale = max(T::one(), problem.operator_scale());
    debug_assert!(abs(total.im) < tol::<T>(1e-10) * scale);
    Ok(total.re)
}

pub(crate) fn commutator_sum_unchecked<T: Real>(
    problem: &EnsembleProblem<T>,
    rotated: &[CMatrix<T>],
) -> CMatrix<T> {
    let d = problem.dimension();
    problem
        .terms()
        .iter()
        .zip(rotated)
        .fold(CMatrix::<T>::zeros(d, d), |acc, (t, r)| {
            acc + commutator(r, &t.operator) * cplx(t.weight, T::zero())
        })
}

/// `C = Σ_m ω_m [U ρ_m U^†, O_m]` (anti-Hermitian); `U` is critical iff `C = 0`.
pub fn critical_commutator<T: Real>(problem: &EnsembleProblem<T>, u: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_point(problem, u)?;
    Ok(commutator_sum_unchecked(problem, &rotated_states(problem, u)))
}

pub(crate) fn gradient_unchecked<T: Real>(
    problem: &EnsembleProblem<T>,
    rotated: &[CMatrix<T>],
    direction: Direction,
) -> CMatrix<T> {
    let c = commutator_sum_unchecked(problem, rotated);
    linalg::hermitian_part(&(c * cplx(T::zero(), direction.sign::<T>())))
}

/// Steepest direction `A = ±i C`: moving along `e^{isA}U` changes `F` at
/// rate `±||A||_F²`.
pub fn gradient_direction<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    direction: Direction,
) -> Result<CMatrix<T>> {
    check_point(problem, u)?;
    Ok(gradient_unchecked(problem, &rotated_states(problem, u), direction))
}

fn check_direction<T: Real>(problem: &EnsembleProblem<T>, a: &CMatrix<T>) -> Result<()> {
    let d = problem.dimension();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.nrows(),
        });
    }
    let dev = hermitian_deviation(a);
    if dev >= hermitian_tolerance(a) {
        return Err(Error::NonHermitianDirection {
            deviation: to_f64(dev),
        });
    }
    Ok(())
}

/// `dF(e^{isA}U)/ds` at `s = 0`, i.e. `Tr[iA C]`.
pub fn directional_derivative<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    a: &CMatrix<T>,
) -> Result<T> {
    check_direction(problem, a)?;
    let c = critical_commutator(problem, u)?;
    Ok((trace_product(a, &c) * cplx(T::zero(), T::one())).re)
}

pub(crate) fn curvature_unchecked<T: Real>(
    problem: &EnsembleProblem<T>,
    rotated: &[CMatrix<T>],
    a: &CMatrix<T>,
) -> T {
    let a2 = a * a;
    let half = real::<T>(0.5);
    problem
        .terms()
        .iter()
        .zip(rotated)
        .fold(T::zero(), |acc, (t, r)| {
            let inner = a * &t.operator * a
                - anticommutator(&t.operator, &a2) * cplx(half, T::zero());
            acc + t.weight * trace_product(r, &inner).re
        })
}

/// `h_U(A) = Σ_m ω_m Tr[U ρ_m U^† (A O_m A - ½{O_m, A²})]`, valid at every
/// point.
pub fn directional_curvature<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    a: &CMatrix<T>,
) -> Result<T> {
    check_point(problem, u)?;
    check_direction(problem, a)?;
    Ok(curvature_unchecked(problem, &rotated_states(problem, u), a))
}

/// Which operator `T` with `h_U(A) = vec(A)^† T vec(A)` to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureForm {
    /// `Σ ω (O^⊤ ⊗ ρ' - ½ (ρ'O)^⊤ ⊗ I - ½ I ⊗ Oρ')`, exact everywhere.
    General,
    /// `Σ ω (O^⊤ ⊗ ρ' - I ⊗ ρ'O)`, exact only at critical points.
    Critical,
}

pub(crate) fn curvature_operator_unchecked<T: Real>(
    problem: &EnsembleProblem<T>,
    rotated: &[CMatrix<T>],
    form: CurvatureForm,
) -> CMatrix<T> {
    let d = problem.dimension();
    let id = CMatrix::<T>::identity(d, d);
    let half = cplx(real::<T>(0.5), T::zero());
    let mut out = CMatrix::<T>::zeros(d * d, d * d);
    for (t, r) in problem.terms().iter().zip(rotated) {
        let w = cplx(t.weight, T::zero());
        let mut term = kron(&t.operator.transpose(), r);
        match form {
            CurvatureForm::General => {
                term -= kron(&(r * &t.operator).transpose(), &id) * half;
                term -= kron(&id, &(&t.operator * r)) * half;
            }
            CurvatureForm::Critical => {
                term -= kron(&id, &(r * &t.operator));
            }
        }
        out += term * w;
    }
    out
}

/// The `D² × D²` operator `T` in the requested form.
pub fn curvature_operator<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    form: CurvatureForm,
) -> Result<CMatrix<T>> {
    check_point(problem, u)?;
    Ok(curvature_operator_unchecked(problem, &rotated_states(problem, u), form))
}

pub(crate) fn hessian_unchecked<T: Real>(
    problem: &EnsembleProblem<T>,
    rotated: &[CMatrix<T>],
    form: CurvatureForm,
) -> RMatrix<T> {
    let d = problem.dimension();
    let t = curvature_operator_unchecked(problem, rotated, form);
    let t_re = t.map(|z| z.re);
    let t_im = t.map(|z| z.im);
    let dup = duplication_matrices::<T>(d);
    let (dsy, day) = (&dup.d_sy, &dup.d_ay);
    let ns = dsy.ncols();
    let n = d * d;
    let mut h = RMatrix::<T>::zeros(n, n);
    h.view_mut((0, 0), (ns, ns))
        .copy_from(&(dsy.transpose() * &t_re * dsy));
    h.view_mut((0, ns), (ns, n - ns))
        .copy_from(&(-(dsy.transpose() * &t_im * day)));
    h.view_mut((ns, 0), (n - ns, ns))
        .copy_from(&(day.transpose() * &t_im * dsy));
    h.view_mut((ns, ns), (n - ns, n - ns))
        .copy_from(&(day.transpose() * &t_re * day));
    (&h + h.transpose()) * real::<T>(0.5)
}

/// Real symmetric `D² × D²` Hessian `H` with `v^⊤ H v = h_U(A)` for
/// `v = (vech(Re A), vech(Im A))`, built from the general curvature
/// operator (so the identity also holds away from critical points).
pub fn hessian_matrix<T: Real>(problem: &EnsembleProblem<T>, u: &CMatrix<T>) -> Result<RMatrix<T>> {
    hessian_matrix_with(problem, u, CurvatureForm::General)
}

pub fn hessian_matrix_with<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    form: CurvatureForm,
) -> Result<RMatrix<T>> {
    check_point(problem, u)?;
    Ok(hessian_unchecked(problem, &rotated_states(problem, u), form))
}

/// Hessian coordinates `(vech(Re A), vech(Im A))` of a Hermitian direction.
pub fn hessian_coordinates<T: Real>(a: &CMatrix<T>) -> Result<DVector<T>> {
    ensure_hermitian(a)?;
    let a = linalg::hermitian_part(a);
    let re = a.map(|z| z.re);
    let im = a.map(|z| z.im);
    let s = linalg::vech_sym(&re)?;
    let y = linalg::vech_asym(&im)?;
    Ok(DVector::from_iterator(
        s.len() + y.len(),
        s.iter().chain(y.iter()).copied(),
    ))
}

/// Inverse of [`hessian_coordinates`].
pub fn direction_from_hessian_coordinates<T: Real>(v: &DVector<T>, dim: usize) -> CMatrix<T> {
    let dup = duplication_matrices::<T>(dim);
    let ns = dup.d_sy.ncols();
    let re = &dup.d_sy * v.rows(0, ns);
    let im = &dup.d_ay * v.rows(ns, v.len() - ns);
    CMatrix::<T>::from_fn(dim, dim, |i, j| cplx(re[i + dim * j], im[i + dim * j]))
}

/// Scale factors converting Hessian coordinates to coordinates in the
/// Frobenius-orthonormal Hermitian basis.
fn metric_scaling<T: Real>(dim: usize) -> DVector<T> {
    let inv = T::one() / real::<T>(2.0).sqrt();
    let mut s = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for i in j..dim {
            s.push(if i == j { T::one() } else { inv });
        }
    }
    s.resize(dim * dim, inv);
    DVector::from_vec(s)
}

/// Spectrum of the Hessian in Frobenius-orthonormal coordinates. Unlike the
/// spectrum of [`hessian_matrix`], it is invariant under changes of frame.
pub fn metric_spectrum<T: Real>(h: &RMatrix<T>, dim: usize) -> Vec<T> {
    let s = metric_scaling::<T>(dim);
    let scaled = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| s[i] * h[(i, j)] * s[j]);
    linalg::symmetric_eigenvalues(&scaled)
}

/// Point type per the sign pattern of the Hessian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Classification {
    LocalMax,
    LocalMin,
    Saddle,
    NotCritical,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::LocalMax => "LocalMax",
            Classification::LocalMin => "LocalMin",
            Classification::Saddle => "Saddle",
            Classification::NotCritical => "NotCritical",
        }
    }

    /// Classifies from a curvature spectrum (the critical-point condition is
    /// assumed). A flat spectrum is both maximal and minimal and reported as
    /// [`Classification::LocalMax`].
    pub fn from_spectrum<T: Real>(spectrum: &[T], relative: T, floor: T) -> Self {
        let (lo, hi, radius) = spectrum_bounds(spectrum);
        let tau = max(relative * radius, floor);
        if hi <= tau {
            Classification::LocalMax
        } else if lo >= -tau {
            Classification::LocalMin
        } else {
            Classification::Saddle
        }
    }
}

fn spectrum_bounds<T: Real>(spectrum: &[T]) -> (T, T, T) {
    let lo = spectrum.iter().copied().fold(T::zero(), |a, b| if b < a { b } else { a });
    let hi = spectrum.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    (lo, hi, max(abs(lo), abs(hi)))
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tolerances used by [`classify_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances<T: Real> {
    /// `τ_c`: a point is critical iff `||C||_F < τ_c`.
    pub critical: T,
    /// Semidefiniteness tolerance relative to the spectral radius.
    pub hessian_relative: T,
    /// Absolute lower bound on the semidefiniteness tolerance.
    pub hessian_floor: T,
    /// `τ_rec`: reconcilable iff every `||[Uρ_mU^†, O_m]||_F < τ_rec`.
    pub reconcilable: T,
}

impl<T: Real> Tolerances<T> {
    /// Defaults for exact (closed-form) points: `τ_c = 1e-8 Σ ω_m ||O_m||_F`,
    /// `τ_h = 1e-8` times the spectral radius, and
    /// `τ_rec = 1e-8 max(1, max_m ||O_m||_F)`.
    pub fn for_problem(problem: &EnsembleProblem<T>) -> Self {
        let base = tol::<T>(1e-8);
        let op_max = problem
            .terms()
            .iter()
            .fold(T::one(), |acc, t| max(acc, t.operator.norm()));
        Tolerances {
            critical: base * max(problem.operator_scale(), tol::<T>(1e-4)),
            hessian_relative: base,
            hessian_floor: T::zero(),
            reconcilable: base * op_max,
        }
    }

    /// Tolerances for points located numerically with residual `residual`:
    /// criticality up to `10 · grad_tol · Σ ω ||O||`, and curvature and
    /// reconcilability thresholds widened in proportion to the residual.
    pub fn numerical(problem: &EnsembleProblem<T>, grad_tol: T) -> Self {
        let exact = Self::for_problem(problem);
        let scale = max(problem.operator_scale(), tol::<T>(1e-4));
        let op_max = exact.reconcilable / tol::<T>(1e-8);
        Tolerances {
            critical: max(exact.critical, real::<T>(10.0) * grad_tol * scale),
            hessian_relative: tol::<T>(1e-6),
            hessian_floor: real::<T>(1e3) * grad_tol * scale,
            reconcilable: max(exact.reconcilable, tol::<T>(1e-6) * op_max),
        }
    }
}

/// Diagnostics for a candidate point.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalReport<T: Real> {
    #[serde(skip)]
    pub point: CMatrix<T>,
    pub value: T,
    /// `||Σ_m ω_m [Uρ_mU^†, O_m]||_F`.
    pub residual: T,
    pub classification: Classification,
    /// Eigenvalues of [`hessian_matrix`], ascending.
    pub hessian_spectrum: Vec<T>,
    pub reconcilable: bool,
    /// `max_m ||[Uρ_mU^†, O_m]||_F`.
    pub max_term_commutator: T,
    pub tolerances: Tolerances<T>,
}

impl<T: Real> CriticalReport<T> {
    pub fn is_local_max(&self) -> bool {
        self.classification == Classification::LocalMax
    }
}

/// [`classify_with`] using [`Tolerances::for_problem`].
pub fn classify<T: Real>(problem: &EnsembleProblem<T>, u: &CMatrix<T>) -> Result<CriticalReport<T>> {
    classify_with(problem, u, &Tolerances::for_problem(problem))
}

/// Evaluates, tests criticality and classifies by the Hessian's sign
/// pattern.
pub fn classify_with<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    tolerances: &Tolerances<T>,
) -> Result<CriticalReport<T>> {
    check_point(problem, u)?;
    let rotated = rotated_states(problem, u);
    let residual = commutator_sum_unchecked(problem, &rotated).norm();
    let max_term = problem
        .terms()
        .iter()
        .zip(&rotated)
        .fold(T::zero(), |acc, (t, r)| max(acc, commutator(r, &t.operator).norm()));
    let h = hessian_unchecked(problem, &rotated, CurvatureForm::General);
    let spectrum = linalg::symmetric_eigenvalues(&h);
    let classification = if residual >= tolerances.critical {
        Classification::NotCritical
    } else {
        Classification::from_spectrum(&spectrum, tolerances.hessian_relative, tolerances.hessian_floor)
    };
    Ok(CriticalReport {
        point: u.clone(),
        value: value_unchecked(problem, u),
        residual,
        classification,
        hessian_spectrum: spectrum,
        reconcilable: max_term < tolerances.reconcilable,
        max_term_commutator: max_term,
        tolerances: *tolerances,
    })
}
