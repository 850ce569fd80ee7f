//! Ensembles `{ω_m, ρ_m, O_m}` defining the landscape, their structural
//! properties, POVM rescaling and Naimark dilation.

use nalgebra::{Complex, ComplexField};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, commutator, ensure_hermitian, hermitian_eig, kron, psd_sqrt, trace, trace_product,
    CMatrix, RMatrix,
};
use crate::scalar::{abs, cre, real, to_f64, tol, Real};

/// Structural tolerance for commutativity, measurement and orthogonality tests.
pub const STRUCTURE_TOLERANCE: f64 = 1e-9;

/// One summand `ω Tr[U ρ U^† O]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<T: Real> {
    pub weight: T,
    pub state: CMatrix<T>,
    pub operator: CMatrix<T>,
}

impl<T: Real> Term<T> {
    pub fn new(weight: T, state: CMatrix<T>, operator: CMatrix<T>) -> Self {
        Term {
            weight,
            state,
            operator,
        }
    }
}

/// A validated ensemble problem on a `D`-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleProblem<T: Real> {
    dimension: usize,
    terms: Vec<Term<T>>,
}

impl<T: Real> EnsembleProblem<T> {
    /// Validates and builds a problem.
    ///
    /// Weights must be nonnegative, states Hermitian with eigenvalues
    /// `>= -1e-10` and unit trace (within `1e-10`), operators Hermitian.
    pub fn new(dimension: usize, terms: Vec<Term<T>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if terms.is_empty() {
            return Err(Error::InvalidState {
                term: 0,
                reason: "at least one term is required".into(),
            });
        }
        for (m, term) in terms.iter().enumerate() {
            for mat in [&term.state, &term.operator] {
                if mat.nrows() != dimension || mat.ncols() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        found: if mat.nrows() != dimension {
                            mat.nrows()
                        } else {
                            mat.ncols()
                        },
                    });
                }
            }
            if !term.weight.is_finite() || term.weight < T::zero() {
                return Err(Error::InvalidState {
                    term: m,
                    reason: format!("weight {} must be finite and nonnegative", to_f64(term.weight)),
                });
            }
            ensure_hermitian(&term.state)?;
            ensure_hermitian(&term.operator)?;
            let spectrum = hermitian_eig(&term.state)?.values;
            let lowest = spectrum.last().copied().unwrap_or_else(T::zero);
            if lowest < -tol::<T>(1e-10) {
                return Err(Error::InvalidState {
                    term: m,
                    reason: format!("state has negative eigenvalue {}", to_f64(lowest)),
                });
            }
            let tr = trace(&term.state).re;
            if abs(tr - T::one()) > tol::<T>(1e-10) {
                return Err(Error::InvalidState {
                    term: m,
                    reason: format!("state trace {} differs from 1", to_f64(tr)),
                });
            }
        }
        Ok(EnsembleProblem { dimension, terms })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    /// Number of terms `M`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weights(&self) -> Vec<T> {
        self.terms.iter().map(|t| t.weight).collect()
    }

    /// `Σ_m ω_m ||O_m||_F`, the natural scale of gradients and curvatures.
    pub fn operator_scale(&self) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, t| acc + t.weight * t.operator.norm())
    }

    /// Applies `X ↦ W X W^†` to every state and operator.
    pub fn conjugated(&self, w: &CMatrix<T>) -> Result<Self> {
        let wd = w.adjoint();
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                weight: t.weight,
                state: linalg::hermitian_part(&(w * &t.state * &wd)),
                operator: linalg::hermitian_part(&(w * &t.operator * &wd)),
            })
            .collect();
        EnsembleProblem::new(self.dimension, terms)
    }

    pub fn structure(&self) -> StructureReport<T> {
        validate(self)
    }
}

/// Structural facts about an ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct StructureReport<T: Real> {
    pub states_commute: bool,
    pub operators_commute: bool,
    pub projective: bool,
    pub povm: bool,
    /// `Tr[ρ_m ρ_m']`.
    pub state_gram: Vec<Vec<T>>,
    /// `Tr[O_m O_m']`.
    pub operator_gram: Vec<Vec<T>>,
    pub states_distinguishable: bool,
    pub operators_distinguishable: bool,
    /// Mean leakage `(ε_1 + ε_2 + ε_3) / 3`, only for members of the
    /// three-level leakage family.
    pub epsilon: Option<T>,
}

fn pairwise_commute<T: Real>(mats: &[&CMatrix<T>], tol: T) -> bool {
    for (i, a) in mats.iter().enumerate() {
        for b in &mats[i + 1..] {
            if commutator(a, b).norm() >= tol {
                return false;
            }
        }
    }
    true
}

fn gram<T: Real>(mats: &[&CMatrix<T>]) -> Vec<Vec<T>> {
    mats.iter()
        .map(|a| mats.iter().map(|b| trace_product(a, b).re).collect())
        .collect()
}

fn off_diagonal_vanishes<T: Real>(g: &[Vec<T>], tol: T) -> bool {
    g.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, &x)| i == j || abs(x) < tol))
}

fn sums_to_identity<T: Real>(ops: &[&CMatrix<T>], dim: usize, tol: T) -> bool {
    let total = ops
        .iter()
        .fold(CMatrix::<T>::zeros(dim, dim), |acc, o| acc + *o);
    (total - CMatrix::<T>::identity(dim, dim)).norm() < tol
}

/// Computes the [`StructureReport`] of a problem with tolerance
/// [`STRUCTURE_TOLERANCE`].
pub fn validate<T: Real>(problem: &EnsembleProblem<T>) -> StructureReport<T> {
    let tau = tol::<T>(STRUCTURE_TOLERANCE);
    let dim = problem.dimension();
    let states: Vec<&CMatrix<T>> = problem.terms().iter().map(|t| &t.state).collect();
    let ops: Vec<&CMatrix<T>> = problem.terms().iter().map(|t| &t.operator).collect();

    let complete = sums_to_identity(&ops, dim, tau);
    let projective = complete
        && ops.iter().enumerate().all(|(i, a)| {
            ops.iter().enumerate().all(|(j, b)| {
                let prod = *a * *b;
                let target = if i == j {
                    (*a).clone()
                } else {
                    CMatrix::<T>::zeros(dim, dim)
                };
                (prod - target).norm() < tau
            })
        });
    let povm = complete
        && ops.iter().all(|o| {
            linalg::hermitian_eig_unchecked(o)
                .values
                .last()
                .is_none_or(|&l| l >= -tau)
        });

    let state_gram = gram(&states);
    let operator_gram = gram(&ops);
    StructureReport {
        states_commute: pairwise_commute(&states, tau),
        operators_commute: pairwise_commute(&ops, tau),
        projective,
        povm,
        states_distinguishable: off_diagonal_vanishes(&state_gram, tau),
        operators_distinguishable: off_diagonal_vanishes(&operator_gram, tau),
        state_gram,
        operator_gram,
        epsilon: epsilon_parameters(problem)
            .map(|e| (e[0] + e[1] + e[2]) / real::<T>(3.0)),
    }
}

/// Recognizes the three-level leakage family
/// `ρ_m = (1-ε_m)|m⟩⟨m| + ε_m|m+1⟩⟨m+1|`, `O_m = |m⟩⟨m|`, equal weights,
/// and returns `(ε_1, ε_2, ε_3)`.
pub fn epsilon_parameters<T: Real>(problem: &EnsembleProblem<T>) -> Option<[T; 3]> {
    if problem.dimension() != 3 || problem.len() != 3 {
        return None;
    }
    let tau = tol::<T>(STRUCTURE_TOLERANCE);
    let third = T::one() / real::<T>(3.0);
    let mut eps = [T::zero(); 3];
    for (m, term) in problem.terms().iter().enumerate() {
        if abs(term.weight - third) > tau {
            return None;
        }
        let next = (m + 1) % 3;
        let leak = term.state[(next, next)].re;
        for i in 0..3 {
            for j in 0..3 {
                let expected_state = if i != j {
                    T::zero()
                } else if i == m {
                    T::one() - leak
                } else if i == next {
                    leak
                } else {
                    T::zero()
                };
                let expected_op = if i == m && j == m { T::one() } else { T::zero() };
                if (term.state[(i, j)] - cre(expected_state)).modulus() > tau
                    || (term.operator[(i, j)] - cre(expected_op)).modulus() > tau
                {
                    return None;
                }
            }
        }
        if leak < -tau || leak > real::<T>(0.5) + tau {
            return None;
        }
        eps[m] = leak;
    }
    Some(eps)
}

/// Affine relation between an original and a rescaled objective:
/// `F_original(U) = F_rescaled(U) + offset`, where `F_rescaled` uses the
/// rescaled problem's own weights.
#[derive(Clone, Debug, Serialize)]
pub struct AffineRecord<T: Real> {
    /// `ω̄_m = ω_m (λ_max(O_m) - λ_min(O_m))` (times the completion scale).
    pub scaled_weights: Vec<T>,
    /// `α`.
    pub offset: T,
    /// Whether the complement term `O_{M+1} = I - Σ Ō_m` was appended.
    pub appended_complement: bool,
}

/// Rescales every operator to `0 ⪯ Ō_m ⪯ I`.
///
/// With `complete`, the operators are additionally shrunk (if needed) so that
/// `Σ Ō_m ⪯ I`, and the complement `I - Σ Ō_m` is appended with the
/// maximally mixed state and unit weight, yielding a POVM. Problems whose
/// operators already form a POVM are returned unchanged.
pub fn rescale_to_povm<T: Real>(
    problem: &EnsembleProblem<T>,
    complete: bool,
) -> Result<(EnsembleProblem<T>, AffineRecord<T>)> {
    if validate(problem).povm {
        return Ok((
            problem.clone(),
            AffineRecord {
                scaled_weights: problem.weights(),
                offset: T::zero(),
                appended_complement: false,
            },
        ));
    }
    let dim = problem.dimension();
    let id = CMatrix::<T>::identity(dim, dim);
    let mut offset = T::zero();
    let mut terms = Vec::with_capacity(problem.len() + 1);
    for (m, term) in problem.terms().iter().enumerate() {
        let spectrum = hermitian_eig(&term.operator)?.values;
        let hi = spectrum[0];
        let lo = spectrum[dim - 1];
        let width = hi - lo;
        if width <= tol::<T>(1e-12) * (abs(hi) + abs(lo) + T::one()) {
            return Err(Error::ConstantOperator { term: m });
        }
        offset += term.weight * lo;
        let op = (&term.operator - &id * cre(lo)) * cre(T::one() / width);
        terms.push(Term::new(term.weight * width, term.state.clone(), op));
    }
    let mut appended = false;
    if complete {
        let total = terms
            .iter()
            .fold(CMatrix::<T>::zeros(dim, dim), |acc, t| acc + &t.operator);
        let top = hermitian_eig(&linalg::hermitian_part(&total))?.values[0];
        if top > T::one() {
            for t in terms.iter_mut() {
                t.operator *= cre(T::one() / top);
                t.weight *= top;
            }
        }
        let total = terms
            .iter()
            .fold(CMatrix::<T>::zeros(dim, dim), |acc, t| acc + &t.operator);
        let complement = linalg::hermitian_part(&(&id - total));
        if complement.norm() > tol::<T>(1e-12) {
            let mixed = &id * cre(T::one() / real::<T>(dim as f64));
            offset -= trace(&complement).re / real::<T>(dim as f64);
            terms.push(Term::new(T::one(), mixed, complement));
            appended = true;
        }
    }
    let scaled_weights = terms.iter().take(problem.len()).map(|t| t.weight).collect();
    Ok((
        EnsembleProblem::new(dim, terms)?,
        AffineRecord {
            scaled_weights,
            offset,
            appended_complement: appended,
        },
    ))
}

/// Projective purification of a POVM problem on `D ⊗ M` (system index
/// major, ancilla minor).
#[derive(Clone, Debug)]
pub struct NaimarkDilation<T: Real> {
    /// States `ρ_m ⊗ |0⟩⟨0|`, operators `I_D ⊗ |m⟩⟨m|`.
    pub problem: EnsembleProblem<T>,
    /// Unitary `V` extending `|ψ⟩⊗|0⟩ ↦ Σ_m √O_m|ψ⟩⊗|m⟩`.
    pub isometry: CMatrix<T>,
    pub ancilla: usize,
}

impl<T: Real> NaimarkDilation<T> {
    /// Extended ansatz `V (U ⊗ I_M)` reproducing the original objective.
    pub fn lift(&self, u: &CMatrix<T>) -> CMatrix<T> {
        let id = CMatrix::<T>::identity(self.ancilla, self.ancilla);
        &self.isometry * kron(u, &id)
    }
}

fn basis_ket<T: Real>(dim: usize, idx: usize) -> CMatrix<T> {
    let mut k = CMatrix::<T>::zeros(dim, dim);
    k[(idx, idx)] = cre(T::one());
    k
}

/// Naimark dilation of a problem whose operators form a POVM.
pub fn naimark_dilate<T: Real>(problem: &EnsembleProblem<T>) -> Result<NaimarkDilation<T>> {
    if !validate(problem).povm {
        return Err(Error::NotPovm);
    }
    let dim = problem.dimension();
    let anc = problem.len();
    let big = dim * anc;
    let roots = problem
        .terms()
        .iter()
        .map(|t| psd_sqrt(&t.operator))
        .collect::<Result<Vec<_>>>()?;

    let mut v = CMatrix::<T>::zeros(big, big);
    for j in 0..dim {
        for (slot, root) in roots.iter().enumerate() {
            for i in 0..dim {
                v[(i * anc + slot, j * anc)] = root[(i, j)];
            }
        }
    }

    // Extend the D isometry columns to an orthonormal basis, scanning the
    // standard basis in index order and filling ancilla slots 1..M.
    let mut filled: Vec<usize> = (0..dim).map(|j| j * anc).collect();
    let free: Vec<usize> = (0..dim)
        .flat_map(|j| (1..anc).map(move |a| j * anc + a))
        .collect();
    let mut free_iter = free.into_iter();
    let mut next_slot = free_iter.next();
    for candidate in 0..big {
        let Some(slot) = next_slot else { break };
        let mut w = nalgebra::DVector::<Complex<T>>::zeros(big);
        w[candidate] = cre(T::one());
        for _ in 0..2 {
            for &c in &filled {
                let col = v.column(c);
                let overlap = col.dotc(&w);
                w -= col * overlap;
            }
        }
        let norm = w.norm();
        if norm > real::<T>(1e-6) {
            v.set_column(slot, &(w / cre(norm)));
            filled.push(slot);
            next_slot = free_iter.next();
        }
    }

    let ket0 = basis_ket::<T>(anc, 0);
    let id = CMatrix::<T>::identity(dim, dim);
    let terms = problem
        .terms()
        .iter()
        .enumerate()
        .map(|(m, t)| Term::new(t.weight, kron(&t.state, &ket0), kron(&id, &basis_ket(anc, m))))
        .collect();
    Ok(NaimarkDilation {
        problem: EnsembleProblem::new(big, terms)?,
        isometry: v,
        ancilla: anc,
    })
}

/// Real diagonal of a matrix (used for diagonal ensembles).
pub fn real_diagonal<T: Real>(x: &CMatrix<T>) -> Vec<T> {
    x.diagonal().iter().map(|z| z.re).collect()
}

/// Builds a problem from diagonal states and operators.
pub fn diagonal_problem<T: Real>(weights: &[T], states: &[Vec<T>], operators: &[Vec<T>]) -> Result<EnsembleProblem<T>> {
    let dim = states.first().map(|s| s.len()).unwrap_or(0);
    let terms = weights
        .iter()
        .zip(states)
        .zip(operators)
        .map(|((&w, s), o)| Term::new(w, linalg::diag(s), linalg::diag(o)))
        .collect();
    EnsembleProblem::new(dim, terms)
}

#[allow(dead_code)]
pub(crate) fn real_matrix<T: Real>(x: &CMatrix<T>) -> RMatrix<T> {
    x.map(|z| z.re)
}
