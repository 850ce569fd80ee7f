//! Gradient flow `U ← e^{isA} U` on the unitary group, multi-seed
//! experiments, and a numerical critical-point finder.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::EnsembleProblem;
use crate::error::{Error, Result};
use crate::landscape::{
    classify_with, commutator_sum_unchecked, curvature_unchecked, direction_from_hessian_coordinates,
    gradient_unchecked, hessian_unchecked, metric_spectrum, rotated_states, value_unchecked, Classification,
    CriticalReport, CurvatureForm, Direction, Tolerances,
};
use crate::linalg::{
    self, commutator, expi_unchecked, hermitian_basis, hermitian_coordinates, hermitian_from_coordinates,
    reunitarize, CMatrix, RMatrix,
};
use crate::scalar::{abs, max, real, to_f64, Real};

pub use crate::random::random_unitary;

/// Backtracking parameters for the step along `s ↦ F(e^{isA}U)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineSearch {
    pub shrink: f64,
    /// Armijo constant: accept when the gain is at least `sufficient · s · ||A||²`.
    pub sufficient: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            shrink: 0.5,
            sufficient: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub mode: Direction,
    pub max_iters: usize,
    /// Stop once `||A||_F < grad_tol`.
    pub grad_tol: f64,
    /// `η_0`; later steps start from twice the last accepted step.
    pub initial_step: f64,
    pub line_search: LineSearch,
    pub seed: u64,
    pub reunitarize_every: usize,
    pub record_trajectory: bool,
    /// Leave saddles along a positive-curvature direction instead of
    /// stopping there.
    pub escape_saddles: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            mode: Direction::Ascend,
            max_iters: 20_000,
            grad_tol: 1e-7,
            initial_step: 1.0,
            line_search: LineSearch::default(),
            seed: 0,
            reunitarize_every: 50,
            record_trajectory: false,
            escape_saddles: true,
        }
    }
}

impl OptimizerConfig {
    pub fn with_mode(mode: Direction) -> Self {
        OptimizerConfig {
            mode,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        let ls = &self.line_search;
        let ok = self.initial_step > 0.0
            && self.grad_tol > 0.0
            && ls.shrink > 0.0
            && ls.shrink < 1.0
            && ls.sufficient > 0.0
            && ls.sufficient < 1.0
            && self.reunitarize_every > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange("optimizer step sizes and tolerances must be positive".into()))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord<T: Real> {
    pub seed: u64,
    pub iterations: usize,
    pub terminal_value: T,
    /// `||Σω[Uρ_mU^†, O_m]||_F` at the terminal point.
    pub terminal_residual: T,
    pub terminal_classification: Classification,
    pub reconcilable: bool,
    /// `false` when `max_iters` ran out or the line search stalled.
    pub converged: bool,
    pub saddle_escapes: usize,
    pub trajectory: Option<Vec<(usize, T)>>,
    #[serde(skip)]
    pub point: CMatrix<T>,
}

/// Runs from the Haar-random start `random_unitary(config.seed, D)`.
pub fn optimize<T: Real>(problem: &EnsembleProblem<T>, config: &OptimizerConfig) -> Result<RunRecord<T>> {
    let u0 = random_unitary(config.seed, problem.dimension());
    optimize_from(problem, &u0, config)
}

const MAX_ESCAPES: usize = 20;

/// Runs from a given unitary.
pub fn optimize_from<T: Real>(
    problem: &EnsembleProblem<T>,
    u0: &CMatrix<T>,
    config: &OptimizerConfig,
) -> Result<RunRecord<T>> {
    config.check()?;
    let tol = Tolerances::numerical(problem, real::<T>(config.grad_tol));
    // Surface dimension and unitarity errors before iterating.
    classify_with(problem, u0, &tol)?;
    let sign = config.mode.sign::<T>();
    let ls = config.line_search;
    let (shrink, sufficient) = (real::<T>(ls.shrink), real::<T>(ls.sufficient));
    let grad_tol = real::<T>(config.grad_tol);
    let max_step = real::<T>(1e3 * config.initial_step);

    let mut u = u0.clone();
    let mut value = value_unchecked(problem, &u);
    let mut step = real::<T>(config.initial_step);
    let mut trajectory = config.record_trajectory.then(|| vec![(0, value)]);
    let mut converged = false;
    let mut escapes = 0;
    let mut iterations = 0;

    while iterations < config.max_iters {
        let rotated = rotated_states(problem, &u);
        let a = gradient_unchecked(problem, &rotated, config.mode);
        let slope = a.norm_squared();
        if a.norm() < grad_tol {
            if config.escape_saddles && escapes < MAX_ESCAPES {
                if let Some(next) = escape_step(problem, &u, value, config.mode, &tol) {
                    escapes += 1;
                    iterations += 1;
                    u = next.0;
                    value = next.1;
                    if let Some(t) = trajectory.as_mut() {
                        t.push((iterations, value));
                    }
                    continue;
                }
            }
            converged = true;
            break;
        }
        let mut s = step;
        let mut accepted = None;
        for _ in 0..=ls.max_backtracks {
            let cand = expi_unchecked(&a, s) * &u;
            let v = value_unchecked(problem, &cand);
            if sign * (v - value) >= sufficient * s * slope {
                accepted = Some((cand, v));
                break;
            }
            s *= shrink;
        }
        let Some((cand, v)) = accepted else {
            break;
        };
        iterations += 1;
        (u, value) = (cand, v);
        if iterations % config.reunitarize_every == 0 {
            let polar = reunitarize(&u);
            let pv = value_unchecked(problem, &polar);
            if sign * (pv - value) >= T::zero() {
                (u, value) = (polar, pv);
            }
        }
        step = if s * real::<T>(2.0) < max_step { s * real::<T>(2.0) } else { max_step };
        if let Some(t) = trajectory.as_mut() {
            t.push((iterations, value));
        }
    }
    if !converged {
        let rotated = rotated_states(problem, &u);
        converged = gradient_unchecked(problem, &rotated, config.mode).norm() < grad_tol;
    }

    let u = reunitarize(&u);
    let report = classify_with(problem, &u, &tol)?;
    Ok(RunRecord {
        seed: config.seed,
        iterations,
        terminal_value: report.value,
        terminal_residual: report.residual,
        terminal_classification: report.classification,
        reconcilable: report.reconcilable,
        converged,
        saddle_escapes: escapes,
        trajectory,
        point: u,
    })
}

/// Moves off a near-critical point along a direction of favourable
/// curvature, trying both signs and shrinking the step until the objective
/// improves.
fn escape_step<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    value: T,
    mode: Direction,
    tol: &Tolerances<T>,
) -> Option<(CMatrix<T>, T)> {
    let b = escape_direction(problem, u, mode, tol)?;
    let b = &b / cplx_norm(&b);
    let sign = mode.sign::<T>();
    let mut s = T::one();
    for _ in 0..40 {
        for t in [s, -s] {
            let cand = expi_unchecked(&b, t) * u;
            let v = value_unchecked(problem, &cand);
            if sign * (v - value) > T::zero() {
                return Some((cand, v));
            }
        }
        s *= real::<T>(0.5);
    }
    None
}

fn cplx_norm<T: Real>(a: &CMatrix<T>) -> nalgebra::Complex<T> {
    crate::scalar::cplx(a.norm(), T::zero())
}

fn curvature_threshold<T: Real>(h: &RMatrix<T>, tol: &Tolerances<T>) -> T {
    max(tol.hessian_relative * h.amax(), tol.hessian_floor)
}

fn escape_direction<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    mode: Direction,
    tol: &Tolerances<T>,
) -> Option<CMatrix<T>> {
    let sign = mode.sign::<T>();
    let rotated = rotated_states(problem, u);
    let h = hessian_unchecked(problem, &rotated, CurvatureForm::General);
    let threshold = curvature_threshold(&h, tol);
    let best = hermitian_basis::<T>(problem.dimension())
        .into_iter()
        .map(|e| (sign * curvature_unchecked(problem, &rotated, &e), e))
        .max_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
    if let Some((c, e)) = best {
        if c > threshold {
            return Some(e);
        }
    }
    let signed = &h * sign;
    let eig = nalgebra::SymmetricEigen::new(signed);
    let (k, top) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(&y.1).expect("finite"))?;
    (top > threshold).then(|| direction_from_hessian_coordinates(&eig.eigenvectors.column(k).into_owned(), problem.dimension()))
}

/// A Hermitian direction whose curvature has the sign that improves the
/// objective for `mode` (positive when ascending), or `None` when the point
/// is a local optimum for that mode.
///
/// The canonical Hermitian basis is scanned first; when every basis
/// direction is flat or unfavourable the leading Hessian eigenvector is
/// used. Returns `None` when `U` is not near-critical.
pub fn saddle_escape_direction<T: Real>(
    problem: &EnsembleProblem<T>,
    u: &CMatrix<T>,
    mode: Direction,
) -> Result<Option<CMatrix<T>>> {
    let tol = Tolerances::for_problem(problem);
    let report = classify_with(problem, u, &tol)?;
    if report.residual >= real::<T>(10.0) * tol.critical {
        return Ok(None);
    }
    Ok(escape_direction(problem, u, mode, &tol))
}

/// Runs `config` once per seed in parallel; records come back in seed order.
pub fn run_seeds<T: Real>(
    problem: &EnsembleProblem<T>,
    config: &OptimizerConfig,
    seeds: &[u64],
) -> Result<Vec<RunRecord<T>>> {
    seeds
        .par_iter()
        .map(|&seed| {
            optimize(
                problem,
                &OptimizerConfig {
                    seed,
                    ..config.clone()
                },
            )
        })
        .collect()
}

/// Outcome of one critical-point search.
#[derive(Clone, Debug, Serialize)]
pub struct SeedOutcome<T: Real> {
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub value: T,
    pub residual: T,
    pub classification: Classification,
    pub reconcilable: bool,
}

/// A deduplicated critical point with the number of seeds that found it.
#[derive(Clone, Debug, Serialize)]
pub struct SurveyPoint<T: Real> {
    pub report: CriticalReport<T>,
    /// Frame-invariant Hessian spectrum used for deduplication.
    pub metric_spectrum: Vec<T>,
    pub hits: usize,
    pub first_seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalSurvey<T: Real> {
    pub tol: f64,
    pub points: Vec<SurveyPoint<T>>,
    pub outcomes: Vec<SeedOutcome<T>>,
}

/// Iteration cap for one critical-point search.
pub const SEARCH_ITERATIONS: usize = 400;
/// Deduplication radii for values and metric spectra.
pub const DEDUP_VALUE: f64 = 1e-6;
pub const DEDUP_SPECTRUM: f64 = 1e-4;

/// Critical points reached from seeds `0..n_seeds`, deduplicated.
pub fn find_critical_points<T: Real>(problem: &EnsembleProblem<T>, n_seeds: usize, tol: f64) -> Result<Vec<CriticalReport<T>>> {
    let seeds: Vec<u64> = (0..n_seeds as u64).collect();
    Ok(critical_point_survey(problem, &seeds, tol)?
        .points
        .into_iter()
        .map(|p| p.report)
        .collect())
}

/// Residual `r(U)`: coordinates of `iΣω[Uρ_mU^†, O_m]` in the Hermitian basis.
fn residual_vector<T: Real>(problem: &EnsembleProblem<T>, rotated: &[CMatrix<T>]) -> DVector<T> {
    let c = commutator_sum_unchecked(problem, rotated);
    hermitian_coordinates(&linalg::hermitian_part(&(c * crate::scalar::cplx(T::zero(), T::one()))))
}

/// Columns `dr/ds` along `e^{isE_j}U`, i.e. coordinates of
/// `-Σω[[E_j, Uρ_mU^†], O_m]`.
fn residual_jacobian<T: Real>(problem: &EnsembleProblem<T>, rotated: &[CMatrix<T>], basis: &[CMatrix<T>]) -> RMatrix<T> {
    let n = basis.len();
    let mut jac = RMatrix::<T>::zeros(n, n);
    for (j, e) in basis.iter().enumerate() {
        let mut acc = CMatrix::<T>::zeros(e.nrows(), e.ncols());
        for (t, r) in problem.terms().iter().zip(rotated) {
            acc -= commutator(&commutator(e, r), &t.operator) * crate::scalar::cplx(t.weight, T::zero());
        }
        jac.set_column(j, &hermitian_coordinates(&linalg::hermitian_part(&acc)));
    }
    jac
}

/// Damped Gauss-Newton (Levenberg-Marquardt) on `g(U) = ||r(U)||²` from
/// `u0`. Returns the final point, iterations, and whether `g < tol²`.
fn search<T: Real>(problem: &EnsembleProblem<T>, u0: CMatrix<T>, tol: T) -> (CMatrix<T>, usize, bool) {
    let dim = problem.dimension();
    let basis = hermitian_basis::<T>(dim);
    let polish = real::<T>(1e-13) * max(problem.operator_scale(), T::one());
    let mut u = u0;
    let mut rotated = rotated_states(problem, &u);
    let mut r = residual_vector(problem, &rotated);
    let mut g = r.norm_squared();
    let mut mu = real::<T>(1e-3);
    let mut iters = 0;
    while iters < SEARCH_ITERATIONS && r.norm() > polish {
        iters += 1;
        let jac = residual_jacobian(problem, &rotated, &basis);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let rhs = -(&jt * &r);
        let mut improved = false;
        for _ in 0..12 {
            let mut sys = jtj.clone();
            let scale = max(jtj.diagonal().amax(), T::one());
            for i in 0..sys.nrows() {
                sys[(i, i)] += mu * scale;
            }
            let Some(chol) = nalgebra::Cholesky::new(sys) else {
                mu *= real::<T>(4.0);
                continue;
            };
            let x = chol.solve(&rhs);
            let b = hermitian_from_coordinates(&x, dim);
            let cand = expi_unchecked(&b, T::one()) * &u;
            let cand_rot = rotated_states(problem, &cand);
            let cand_r = residual_vector(problem, &cand_rot);
            let cand_g = cand_r.norm_squared();
            if cand_g < g {
                u = cand;
                rotated = cand_rot;
                r = cand_r;
                g = cand_g;
                mu = max(mu / real::<T>(3.0), real::<T>(1e-12));
                improved = true;
                break;
            }
            mu *= real::<T>(4.0);
        }
        if !improved {
            break;
        }
        if iters % 50 == 0 {
            u = reunitarize(&u);
            rotated = rotated_states(problem, &u);
            r = residual_vector(problem, &rotated);
            g = r.norm_squared();
        }
    }
    let u = reunitarize(&u);
    let g = residual_vector(problem, &rotated_states(problem, &u)).norm_squared();
    (u, iters, g < tol * tol)
}

type Found<T> = (u64, usize, bool, CriticalReport<T>, Vec<T>);

/// Searches for critical points from each seed, classifies the converged
/// ones and merges duplicates (value within [`DEDUP_VALUE`], metric
/// spectrum within [`DEDUP_SPECTRUM`] in sup norm). Points are sorted by
/// value.
pub fn critical_point_survey<T: Real>(problem: &EnsembleProblem<T>, seeds: &[u64], tol: f64) -> Result<CriticalSurvey<T>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange(format!("tolerance {tol} must be positive")));
    }
    let tolerances = Tolerances::numerical(problem, real::<T>(tol));
    let dim = problem.dimension();
    let found: Vec<Found<T>> = seeds
        .par_iter()
        .map(|&seed| {
            let (u, iters, ok) = search(problem, random_unitary(seed, dim), real::<T>(tol));
            let report = classify_with(problem, &u, &tolerances)?;
            let h = hessian_unchecked(problem, &rotated_states(problem, &u), CurvatureForm::General);
            Ok((seed, iters, ok, report, metric_spectrum(&h, dim)))
        })
        .collect::<Result<_>>()?;

    let (dv, ds) = (real::<T>(DEDUP_VALUE), real::<T>(DEDUP_SPECTRUM));
    let mut points: Vec<SurveyPoint<T>> = Vec::new();
    let mut outcomes = Vec::with_capacity(found.len());
    for (seed, iters, ok, report, spectrum) in found {
        outcomes.push(SeedOutcome {
            seed,
            iterations: iters,
            converged: ok,
            value: report.value,
            residual: report.residual,
            classification: report.classification,
            reconcilable: report.reconcilable,
        });
        if !ok {
            continue;
        }
        let same = points.iter_mut().find(|p| {
            abs(p.report.value - report.value) <= dv
                && p.metric_spectrum
                    .iter()
                    .zip(&spectrum)
                    .all(|(a, b)| abs(*a - *b) <= ds)
        });
        match same {
            Some(p) => p.hits += 1,
            None => points.push(SurveyPoint {
                report,
                metric_spectrum: spectrum,
                hits: 1,
                first_seed: seed,
            }),
        }
    }
    points.sort_by(|a, b| a.report.value.partial_cmp(&b.report.value).expect("finite"));
    Ok(CriticalSurvey { tol, points, outcomes })
}

/// Terminal values rounded to `digits` decimals with their counts, in
/// ascending order.
pub fn terminal_value_set<T: Real>(records: &[RunRecord<T>], digits: i32) -> Vec<(f64, usize)> {
    let scale = 10f64.powi(digits);
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut vals: Vec<f64> = records.iter().map(|r| (to_f64(r.terminal_value) * scale).round() / scale).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    for v in vals {
        match out.last_mut() {
            Some((x, n)) if *x == v => *n += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::catalog::{decompose, enumerate, m1_solution, Permutation};
    use crate::landscape::{classify, directional_derivative, evaluate, gradient_direction};
    use crate::random::random_problem;

    #[test]
    fn ascent_is_monotone_and_converges() {
        let p = random_problem::<f64>(3, 3, 2);
        let cfg = OptimizerConfig {
            record_trajectory: true,
            seed: 7,
            ..OptimizerConfig::default()
        };
        let r = optimize(&p, &cfg).unwrap();
        assert!(r.converged);
        let t = r.trajectory.unwrap();
        assert!(t.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(r.terminal_residual < 10.0 * cfg.grad_tol * p.operator_scale());
        assert!(linalg::unitary_deviation(&r.point) < 1e-10);
    }

    #[test]
    fn descent_is_monotone() {
        let p = random_problem::<f64>(4, 3, 2);
        let cfg = OptimizerConfig {
            record_trajectory: true,
            ..OptimizerConfig::with_mode(Direction::Descend)
        };
        let r = optimize(&p, &cfg).unwrap();
        let t = r.trajectory.unwrap();
        assert!(t.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(r.converged);
    }

    #[test]
    fn initial_slope_is_gradient_norm_squared() {
        for seed in 0..10 {
            let p = random_problem::<f64>(seed, 3, 2);
            let u = random_unitary::<f64>(seed + 100, 3);
            for mode in [Direction::Ascend, Direction::Descend] {
                let a = gradient_direction(&p, &u, mode).unwrap();
                let d = directional_derivative(&p, &u, &a).unwrap();
                let n2 = a.norm_squared();
                assert!((d - mode.sign::<f64>() * n2).abs() <= 1e-6 * n2);
            }
        }
    }

    #[test]
    fn long_runs_stay_unitary() {
        let p = random_problem::<f64>(9, 3, 2);
        let cfg = OptimizerConfig {
            max_iters: 10_000,
            grad_tol: 1e-300,
            escape_saddles: false,
            ..OptimizerConfig::default()
        };
        let r = optimize(&p, &cfg).unwrap();
        assert!(linalg::unitary_deviation(&r.point) < 1e-10);
    }

    #[test]
    fn rejects_bad_config() {
        let p = bundled::opt1::<f64>();
        let cfg = OptimizerConfig {
            initial_step: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(matches!(optimize(&p, &cfg), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn run_seeds_preserves_order() {
        let p = bundled::opt1::<f64>();
        let seeds = [5, 1, 9];
        let rs = run_seeds(&p, &OptimizerConfig::default(), &seeds).unwrap();
        assert_eq!(rs.iter().map(|r| r.seed).collect::<Vec<_>>(), seeds);
        let again = run_seeds(&p, &OptimizerConfig::default(), &seeds).unwrap();
        for (a, b) in rs.iter().zip(&again) {
            assert_eq!(a.terminal_value.to_bits(), b.terminal_value.to_bits());
        }
    }

    #[test]
    fn opt1_runs_end_at_catalog_maxima() {
        let p = bundled::opt1::<f64>();
        let seeds: Vec<u64> = (0..40).collect();
        let rs = run_seeds(&p, &OptimizerConfig::default(), &seeds).unwrap();
        for r in &rs {
            assert!(r.converged, "seed {}", r.seed);
            let near = |v: f64| (r.terminal_value - v).abs() < 1e-6;
            assert!(near(0.36) || near(0.39), "seed {}: {}", r.seed, r.terminal_value);
        }
    }

    #[test]
    fn escape_directions() {
        let p = bundled::opt1::<f64>();
        let dec = decompose(&p).unwrap();
        let id = Permutation::identity(4).matrix::<f64>();
        assert!(saddle_escape_direction(&p, &id, Direction::Ascend).unwrap().is_none());
        let u2 = "3,2,4,1".parse::<Permutation>().unwrap().matrix::<f64>();
        assert!(saddle_escape_direction(&p, &u2, Direction::Ascend).unwrap().is_none());
        let saddle = enumerate(&dec, crate::catalog::EnumerationMode::Exhaustive)
            .unwrap()
            .into_iter()
            .find(|pt| pt.classification == Classification::Saddle)
            .unwrap();
        let a = saddle_escape_direction(&p, &saddle.representative, Direction::Ascend)
            .unwrap()
            .unwrap();
        let rotated = rotated_states(&p, &saddle.representative);
        assert!(curvature_unchecked(&p, &rotated, &a) > 0.0);
        let b = saddle_escape_direction(&p, &saddle.representative, Direction::Descend)
            .unwrap()
            .unwrap();
        assert!(curvature_unchecked(&p, &rotated, &b) < 0.0);
        let far = random_unitary::<f64>(1, 4);
        assert!(saddle_escape_direction(&p, &far, Direction::Ascend).unwrap().is_none());
    }

    #[test]
    fn m1_runs_reach_sorted_optimum() {
        for seed in 0..5 {
            let p = random_problem::<f64>(seed, 4, 1);
            let target = m1_solution(&p).unwrap().max_value;
            for s in 0..5 {
                let cfg = OptimizerConfig {
                    seed: s,
                    ..OptimizerConfig::default()
                };
                let r = optimize(&p, &cfg).unwrap();
                assert!((r.terminal_value - target).abs() < 1e-6, "{seed}/{s}");
            }
        }
    }

    #[test]
    fn critical_points_of_opt1_are_critical() {
        let p = bundled::opt1::<f64>();
        let survey = critical_point_survey(&p, &(0..30).collect::<Vec<_>>(), 1e-8).unwrap();
        assert!(!survey.points.is_empty());
        let catalog: Vec<f64> = enumerate(&decompose(&p).unwrap(), crate::catalog::EnumerationMode::Exhaustive)
            .unwrap()
            .iter()
            .map(|pt| pt.value)
            .collect();
        for pt in &survey.points {
            assert!(pt.report.residual < 1e-8);
            assert_ne!(pt.report.classification, Classification::NotCritical);
            if pt.report.reconcilable {
                assert!(catalog.iter().any(|v| (v - pt.report.value).abs() < 1e-8), "{}", pt.report.value);
            }
            assert!((evaluate(&p, &pt.report.point).unwrap() - pt.report.value).abs() < 1e-14);
        }
        assert_eq!(survey.outcomes.len(), 30);
        assert_eq!(survey.points.iter().map(|p| p.hits).sum::<usize>(), survey.outcomes.iter().filter(|o| o.converged).count());
    }

    #[test]
    fn terminal_values_bucket() {
        let p = bundled::opt1::<f64>();
        let r = classify(&p, &CMatrix::<f64>::identity(4, 4)).unwrap();
        let rec = RunRecord {
            seed: 0,
            iterations: 0,
            terminal_value: r.value,
            terminal_residual: r.residual,
            terminal_classification: r.classification,
            reconcilable: r.reconcilable,
            converged: true,
            saddle_escapes: 0,
            trajectory: None,
            point: r.point,
        };
        assert_eq!(terminal_value_set(&[rec.clone(), rec], 6), vec![(0.39, 2)]);
    }
}
