//! Reconcilable critical points of commuting ensembles.
//!
//! When all states commute and all operators commute, `P̂` diagonalizes the
//! weighted states `σ_m = ω_m ρ_m` and `Q̂` the operators, with positions
//! ordered into dominant blocks. Every permutation `π` then yields the
//! reconcilable critical point `Q̂^† Π P̂` whose value and Hessian spectrum
//! have closed forms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use itertools::Itertools;
use nalgebra::ComplexField;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{validate, EnsembleProblem};
use crate::error::{Error, Result};
use crate::landscape::Classification;
use crate::linalg::{self, hermitian_eig_unchecked, permutation_matrix, CMatrix, RMatrix};
use crate::scalar::{abs, max, real, tol, Real};

/// Largest dimension accepted by exhaustive enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Tolerance for collapsing permutations with equal value and spectrum.
pub const COLLAPSE_TOLERANCE: f64 = 1e-10;

/// Permutation of `0..D`, stored by images: `π e_k = e_{π(k)}`.
///
/// Parsed from and displayed in one-line notation with 1-based images.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// From 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a permutation of 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    /// From 1-based one-line notation.
    pub fn from_one_line(one_line: &[usize]) -> Result<Self> {
        if one_line.contains(&0) {
            return Err(Error::InvalidPermutation("one-line images are 1-based".into()));
        }
        Self::from_images(one_line.iter().map(|k| k - 1).collect())
    }

    /// Product of transpositions `t_1 t_2 ... t_r` (1-based positions),
    /// applied right to left.
    pub fn from_transpositions(n: usize, swaps: &[(usize, usize)]) -> Result<Self> {
        let mut p = Self::identity(n);
        for &(a, b) in swaps.iter().rev() {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::InvalidPermutation(format!("transposition ({a},{b})")));
            }
            let mut t = Self::identity(n);
            t.0.swap(a - 1, b - 1);
            p = t.compose(&p);
        }
        Ok(p)
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.0.iter().map(|k| k + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (k, &i) in self.0.iter().enumerate() {
            inv[i] = k;
        }
        Permutation(inv)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation(other.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn matrix<T: Real>(&self) -> CMatrix<T> {
        permutation_matrix(&self.0)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.one_line().iter().map(|k| k.to_string()).join(" ");
        f.write_str(&s)
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts comma- or whitespace-separated 1-based one-line notation.
    fn from_str(s: &str) -> Result<Self> {
        let parts: std::result::Result<Vec<usize>, _> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect();
        match parts {
            Ok(v) if !v.is_empty() => Self::from_one_line(&v),
            _ => Err(Error::InvalidPermutation(format!("cannot parse `{s}`"))),
        }
    }
}

/// Simultaneous diagonalization data with dominant-block ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition<T: Real> {
    /// `P̂`: `P̂ ω_m ρ_m P̂^†` is diagonal with diagonal row `m` of `g_rho`.
    pub p_hat: CMatrix<T>,
    /// `Q̂`: `Q̂ O_m Q̂^†` is diagonal with diagonal row `m` of `g_o`.
    pub q_hat: CMatrix<T>,
    /// `d_m`: number of positions dominated by `σ_m` (zero-padded to `M`).
    pub state_blocks: Vec<usize>,
    pub operator_blocks: Vec<usize>,
    /// `Ĝ_ρ` (`M × D`), columns ordered by dominant block.
    pub g_rho: RMatrix<T>,
    pub g_o: RMatrix<T>,
    /// Run lengths of equal consecutive columns of `Ĝ_ρ`.
    pub state_multiplicities: Vec<usize>,
    pub operator_multiplicities: Vec<usize>,
    /// Dominant block of each position.
    pub state_dominance: Vec<usize>,
    pub operator_dominance: Vec<usize>,
}

fn scale_of<T: Real>(g: &RMatrix<T>) -> T {
    max(T::one(), g.amax())
}

/// Orthonormal `P` with `P X P^†` diagonal for every `X` in a commuting
/// family, by successive refinement inside eigenspaces.
fn simultaneous_diagonalizer<T: Real>(mats: &[CMatrix<T>]) -> CMatrix<T> {
    let dim = mats[0].nrows();
    let diag_tol = tol::<T>(1e-12);
    if mats
        .iter()
        .all(|x| linalg::is_diagonal(x, diag_tol * max(T::one(), x.norm())))
    {
        return CMatrix::identity(dim, dim);
    }
    let mut v = CMatrix::<T>::identity(dim, dim);
    let mut groups: Vec<Range<usize>> = std::iter::once(0..dim).collect();
    for x in mats {
        let split_tol = tol::<T>(1e-9) * max(T::one(), x.norm());
        let mut next = Vec::new();
        for g in groups {
            let k = g.len();
            if k == 1 {
                next.push(g);
                continue;
            }
            let b = v.columns(g.start, k).into_owned();
            let local = linalg::hermitian_part(&(b.adjoint() * x * &b));
            let eig = hermitian_eig_unchecked(&local);
            v.columns_mut(g.start, k).copy_from(&(&b * &eig.vectors));
            let mut start = 0;
            for i in 1..=k {
                if i == k || eig.values[i - 1] - eig.values[i] > split_tol {
                    next.push(g.start + start..g.start + i);
                    start = i;
                }
            }
        }
        groups = next;
    }
    v.adjoint()
}

fn close<T: Real>(a: T, b: T, eps: T) -> bool {
    abs(a - b) <= eps
}

fn compare_desc<T: Real>(a: T, b: T, eps: T) -> Ordering {
    if close(a, b, eps) {
        Ordering::Equal
    } else if a > b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

struct Ordered<T: Real> {
    transform: CMatrix<T>,
    g: RMatrix<T>,
    blocks: Vec<usize>,
    multiplicities: Vec<usize>,
    dominance: Vec<usize>,
}

/// Diagonalizes a commuting family of weighted matrices and orders the
/// positions by dominant block.
fn order_family<T: Real>(mats: Vec<CMatrix<T>>) -> Ordered<T> {
    let m = mats.len();
    let dim = mats[0].nrows();
    let p = simultaneous_diagonalizer(&mats);
    let pd = p.adjoint();
    let raw = RMatrix::<T>::from_fn(m, dim, |i, k| (&p * &mats[i] * &pd)[(k, k)].re);
    let scale = scale_of(&raw);
    let tie = tol::<T>(1e-12) * scale;
    let equal = tol::<T>(1e-10) * scale;

    let dominant: Vec<usize> = (0..dim)
        .map(|k| {
            let top = (0..m).fold(raw[(0, k)], |a, i| max(a, raw[(i, k)]));
            (0..m).find(|&i| raw[(i, k)] >= top - tie).unwrap_or(0)
        })
        .collect();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        dominant[a]
            .cmp(&dominant[b])
            .then_with(|| compare_desc(raw[(dominant[a], a)], raw[(dominant[b], b)], equal))
            .then_with(|| {
                (0..m)
                    .map(|i| compare_desc(raw[(i, a)], raw[(i, b)], equal))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| a.cmp(&b))
    });

    let transform = CMatrix::<T>::from_fn(dim, dim, |i, j| p[(order[i], j)]);
    let g = RMatrix::<T>::from_fn(m, dim, |i, k| raw[(i, order[k])]);
    let dominance: Vec<usize> = order.iter().map(|&k| dominant[k]).collect();
    let mut blocks = vec![0; m];
    for &d in &dominance {
        blocks[d] += 1;
    }
    let mut multiplicities = Vec::new();
    let mut run = 1;
    for k in 1..=dim {
        let same = k < dim && (0..m).all(|i| close(g[(i, k)], g[(i, k - 1)], equal));
        if same {
            run += 1;
        } else {
            multiplicities.push(run);
            run = 1;
        }
    }
    Ordered {
        transform,
        g,
        blocks,
        multiplicities,
        dominance,
    }
}

/// Builds the [`BlockDecomposition`] of a commuting ensemble.
pub fn decompose<T: Real>(problem: &EnsembleProblem<T>) -> Result<BlockDecomposition<T>> {
    let report = validate(problem);
    if !report.states_commute {
        return Err(Error::NotCommuting("states"));
    }
    if !report.operators_commute {
        return Err(Error::NotCommuting("operators"));
    }
    let sigma: Vec<CMatrix<T>> = problem
        .terms()
        .iter()
        .map(|t| &t.state * crate::scalar::cplx(t.weight, T::zero()))
        .collect();
    let ops: Vec<CMatrix<T>> = problem.terms().iter().map(|t| t.operator.clone()).collect();
    let s = order_family(sigma);
    let o = order_family(ops);
    Ok(BlockDecomposition {
        p_hat: s.transform,
        q_hat: o.transform,
        state_blocks: s.blocks,
        operator_blocks: o.blocks,
        g_rho: s.g,
        g_o: o.g,
        state_multiplicities: s.multiplicities,
        operator_multiplicities: o.multiplicities,
        state_dominance: s.dominance,
        operator_dominance: o.dominance,
    })
}

fn intervals(blocks: &[usize]) -> Vec<Range<usize>> {
    let mut start = 0;
    blocks
        .iter()
        .map(|&d| {
            let r = start..start + d;
            start += d;
            r
        })
        .collect()
}

impl<T: Real> BlockDecomposition<T> {
    pub fn dimension(&self) -> usize {
        self.g_rho.ncols()
    }

    pub fn terms(&self) -> usize {
        self.g_rho.nrows()
    }

    pub fn blocks_match(&self) -> bool {
        self.state_blocks == self.operator_blocks
    }

    /// Position intervals `I_m` of the state blocks (0-based, half-open).
    pub fn intervals(&self) -> Vec<Range<usize>> {
        intervals(&self.state_blocks)
    }

    pub fn operator_intervals(&self) -> Vec<Range<usize>> {
        intervals(&self.operator_blocks)
    }

    /// Whether `Ĝ_o` has column `e_m` at every position of `I'_m`, i.e. the
    /// operators are complementary projectors in the block frame.
    pub fn operators_projective(&self) -> bool {
        let eps = tol::<T>(1e-9);
        self.operator_intervals().iter().enumerate().all(|(m, r)| {
            r.clone().all(|k| {
                (0..self.terms()).all(|i| {
                    let target = if i == m { T::one() } else { T::zero() };
                    close(self.g_o[(i, k)], target, eps)
                })
            })
        })
    }

    fn check(&self, pi: &Permutation) -> Result<()> {
        if pi.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: pi.len(),
            });
        }
        Ok(())
    }

    /// `F(π) = Σ_k Σ_m Ĝ_ρ[m, k] Ĝ_o[m, π(k)]`.
    pub fn value(&self, pi: &Permutation) -> Result<T> {
        self.check(pi)?;
        Ok(self.value_unchecked(pi.images()))
    }

    pub(crate) fn value_unchecked(&self, images: &[usize]) -> T {
        let m = self.terms();
        images.iter().enumerate().fold(T::zero(), |acc, (k, &j)| {
            (0..m).fold(acc, |a, i| a + self.g_rho[(i, k)] * self.g_o[(i, j)])
        })
    }

    /// `h_{jj'} = -Σ_m (λ^m_(j) - λ^m_(j')) (o^m_j - o^m_j')` for `j ≤ j'`
    /// (row-major over the upper triangle), where `λ_(j)` is the state
    /// column moved to position `j`.
    pub fn hessian_eigs(&self, pi: &Permutation) -> Result<Vec<T>> {
        self.check(pi)?;
        Ok(self.hessian_unchecked(pi.images()))
    }

    pub(crate) fn hessian_unchecked(&self, images: &[usize]) -> Vec<T> {
        let d = self.dimension();
        let m = self.terms();
        let mut source = vec![0; d];
        for (k, &j) in images.iter().enumerate() {
            source[j] = k;
        }
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for j in 0..d {
            for jp in j..d {
                let (a, b) = (source[j], source[jp]);
                let h = (0..m).fold(T::zero(), |acc, i| {
                    acc - (self.g_rho[(i, a)] - self.g_rho[(i, b)])
                        * (self.g_o[(i, j)] - self.g_o[(i, jp)])
                });
                out.push(h);
            }
        }
        out
    }

    pub(crate) fn classification_unchecked(&self, images: &[usize]) -> Classification {
        Classification::from_spectrum(&self.hessian_unchecked(images), tol::<T>(1e-8), T::zero())
    }

    /// `Q̂^† Π P̂`.
    pub fn representative(&self, pi: &Permutation) -> Result<CMatrix<T>> {
        self.check(pi)?;
        Ok(self.q_hat.adjoint() * pi.matrix::<T>() * &self.p_hat)
    }

    /// The permutation `Π` with `U = Q̂^† Π P̂` up to phases, if `U` has
    /// that form.
    pub fn frame_permutation(&self, u: &CMatrix<T>) -> Option<Permutation> {
        let d = self.dimension();
        if u.nrows() != d || u.ncols() != d {
            return None;
        }
        let x = &self.q_hat * u * self.p_hat.adjoint();
        let eps = tol::<T>(1e-8);
        let mut images = Vec::with_capacity(d);
        for k in 0..d {
            let col: Vec<T> = (0..d).map(|i| x[(i, k)].modulus()).collect();
            let hits: Vec<usize> = (0..d).filter(|&i| abs(col[i] - T::one()) <= eps).collect();
            if hits.len() != 1 || (0..d).any(|i| i != hits[0] && col[i] > eps) {
                return None;
            }
            images.push(hits[0]);
        }
        Permutation::from_images(images).ok()
    }

    /// Catalog entry for one permutation.
    pub fn point(&self, pi: &Permutation) -> Result<PermutationPoint<T>> {
        self.check(pi)?;
        let eigs = sorted(self.hessian_unchecked(pi.images()));
        Ok(PermutationPoint {
            pi: pi.clone(),
            value: self.value_unchecked(pi.images()),
            classification: Classification::from_spectrum(&eigs, tol::<T>(1e-8), T::zero()),
            hessian_eigs: eigs,
            representative: self.representative(pi)?,
            multiplicity: 1,
        })
    }
}

fn sorted<T: Real>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

/// A reconcilable critical point `Q̂^† Π P̂`.
#[derive(Clone, Debug, Serialize)]
pub struct PermutationPoint<T: Real> {
    pub pi: Permutation,
    pub value: T,
    /// `{h_{kk'} : k ≤ k'}`, ascending.
    pub hessian_eigs: Vec<T>,
    pub classification: Classification,
    #[serde(skip)]
    pub representative: CMatrix<T>,
    /// Number of enumerated permutations collapsed into this entry.
    pub multiplicity: usize,
}

impl<T: Real> PermutationPoint<T> {
    /// The Hessian spectrum with `D` zeros and every off-diagonal `h_{kk'}`
    /// twice, ascending.
    pub fn full_spectrum(&self, d: usize) -> Vec<T> {
        // Zeros come from the diagonal pairs; all other values appear twice.
        let mut zeros = d;
        let mut out = Vec::with_capacity(d * d);
        for &h in &self.hessian_eigs {
            if zeros > 0 && h == T::zero() {
                zeros -= 1;
                out.push(h);
            } else {
                out.push(h);
                out.push(h);
            }
        }
        sorted(out)
    }

    pub fn min_hessian(&self) -> T {
        self.hessian_eigs.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max_hessian(&self) -> T {
        self.hessian_eigs.last().copied().unwrap_or_else(T::zero)
    }
}

/// Which permutations to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumerationMode {
    Exhaustive,
    /// `count` distinct permutations drawn uniformly without replacement.
    Sampled { count: usize, seed: u64 },
}

fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

pub(crate) fn all_permutations(d: usize) -> Result<Vec<Vec<usize>>> {
    if d > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            dimension: d,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    Ok((0..d).permutations(d).collect())
}

fn sampled_permutations(d: usize, count: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if factorial(d).is_some_and(|f| count >= f) {
        return all_permutations(d);
    }
    let mut rng = crate::random::rng(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut base: Vec<usize> = (0..d).collect();
    while seen.len() < count {
        base.shuffle(&mut rng);
        seen.insert(base.clone());
    }
    let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

struct Collapser<T: Real> {
    buckets: BTreeMap<i64, Vec<usize>>,
    width: f64,
    eps: T,
}

impl<T: Real> Collapser<T> {
    fn new(eps: f64) -> Self {
        Collapser {
            buckets: BTreeMap::new(),
            width: 10.0 * eps,
            eps: real(eps),
        }
    }

    fn key(&self, v: T) -> i64 {
        (crate::scalar::to_f64(v) / self.width).round() as i64
    }

    /// Index of an existing entry matching `(value, spectrum)`, or records
    /// `index` as a new one.
    fn find_or_insert(&mut self, points: &[(T, Vec<T>)], index: usize) -> Option<usize> {
        let (v, s) = &points[index];
        let k = self.key(*v);
        for kk in [k - 1, k, k + 1] {
            if let Some(list) = self.buckets.get(&kk) {
                for &j in list {
                    let (w, t) = &points[j];
                    if close(*v, *w, self.eps)
                        && s.iter().zip(t).all(|(a, b)| close(*a, *b, self.eps))
                    {
                        return Some(j);
                    }
                }
            }
        }
        self.buckets.entry(k).or_default().push(index);
        None
    }
}

/// Enumerates reconcilable critical points, one per distinct
/// `(value, spectrum)` class, in lexicographic order of the first
/// permutation of each class.
pub fn enumerate<T: Real>(
    decomposition: &BlockDecomposition<T>,
    mode: EnumerationMode,
) -> Result<Vec<PermutationPoint<T>>> {
    let d = decomposition.dimension();
    let perms = match mode {
        EnumerationMode::Exhaustive => all_permutations(d)?,
        EnumerationMode::Sampled { count, seed } => sampled_permutations(d, count, seed)?,
    };
    let summaries: Vec<(T, Vec<T>)> = perms
        .par_iter()
        .map(|p| {
            (
                decomposition.value_unchecked(p),
                sorted(decomposition.hessian_unchecked(p)),
            )
        })
        .collect();
    let mut collapser = Collapser::new(COLLAPSE_TOLERANCE);
    let mut firsts: Vec<usize> = Vec::new();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..perms.len() {
        match collapser.find_or_insert(&summaries, i) {
            Some(j) => *counts.get_mut(&j).expect("recorded") += 1,
            None => {
                firsts.push(i);
                counts.insert(i, 1);
            }
        }
    }
    firsts
        .into_iter()
        .map(|i| {
            let pi = Permutation(perms[i].clone());
            let mut point = decomposition.point(&pi)?;
            point.multiplicity = counts[&i];
            Ok(point)
        })
        .collect()
}

/// Analytical landscape of a single-term problem.
#[derive(Clone, Debug)]
pub struct M1Solution<T: Real> {
    pub decomposition: BlockDecomposition<T>,
    /// Spectra of `ωρ` and `O`, each sorted descending.
    pub state_spectrum: Vec<T>,
    pub operator_spectrum: Vec<T>,
    pub state_multiplicities: Vec<usize>,
    pub operator_multiplicities: Vec<usize>,
    /// Co-sorted spectra: `Σ_k λ_k o_k`.
    pub max_value: T,
    /// Anti-sorted spectra.
    pub min_value: T,
    pub maximizer: CMatrix<T>,
    pub minimizer: CMatrix<T>,
    /// Full catalog when `D ≤ 8`.
    pub catalog: Option<Vec<PermutationPoint<T>>>,
    /// Every catalogued local maximum attains `max_value` and every local
    /// minimum attains `min_value`.
    pub trap_free: bool,
}

/// Closed-form solution for `M = 1`.
pub fn m1_solution<T: Real>(problem: &EnsembleProblem<T>) -> Result<M1Solution<T>> {
    if problem.len() != 1 {
        return Err(Error::WrongM {
            expected: 1,
            found: problem.len(),
        });
    }
    let dec = decompose(problem)?;
    let d = dec.dimension();
    let lam: Vec<T> = (0..d).map(|k| dec.g_rho[(0, k)]).collect();
    let o: Vec<T> = (0..d).map(|k| dec.g_o[(0, k)]).collect();
    let max_value = lam.iter().zip(&o).fold(T::zero(), |a, (x, y)| a + *x * *y);
    let min_value = lam.iter().zip(o.iter().rev()).fold(T::zero(), |a, (x, y)| a + *x * *y);
    let reversal = Permutation((0..d).rev().collect());
    let maximizer = dec.representative(&Permutation::identity(d))?;
    let minimizer = dec.representative(&reversal)?;
    let catalog = if d <= EXHAUSTIVE_LIMIT {
        Some(enumerate(&dec, EnumerationMode::Exhaustive)?)
    } else {
        None
    };
    let scale = max(T::one(), abs(max_value) + abs(min_value));
    let eps = tol::<T>(1e-10) * scale;
    let trap_free = catalog.as_ref().is_none_or(|c| {
        c.iter().all(|p| match p.classification {
            Classification::LocalMax => close(p.value, max_value, eps),
            Classification::LocalMin => close(p.value, min_value, eps),
            _ => true,
        })
    });
    Ok(M1Solution {
        state_multiplicities: dec.state_multiplicities.clone(),
        operator_multiplicities: dec.operator_multiplicities.clone(),
        state_spectrum: lam,
        operator_spectrum: o,
        max_value,
        min_value,
        maximizer,
        minimizer,
        catalog,
        trap_free,
        decomposition: dec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::ensemble::diagonal_problem;
    use crate::landscape::{classify, evaluate, hessian_matrix};
    use crate::random::{random_diagonal_problem, random_unitary};

    #[test]
    fn permutation_notation() {
        let p: Permutation = "3,2,4,1".parse().unwrap();
        assert_eq!(p.images(), &[2, 1, 3, 0]);
        assert_eq!(p.to_string(), "3 2 4 1");
        assert_eq!("3 2 4 1".parse::<Permutation>().unwrap(), p);
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(4));
        assert!("1,1,2".parse::<Permutation>().is_err());
        assert!("0,1".parse::<Permutation>().is_err());
        assert!("x".parse::<Permutation>().is_err());
    }

    #[test]
    fn transpositions_compose_right_to_left() {
        let p = Permutation::from_transpositions(6, &[(4, 6), (1, 4)]).unwrap();
        // (1 4) first sends 1 -> 4, then (4 6) sends 4 -> 6.
        assert_eq!(p.one_line()[0], 6);
        let m: CMatrix<f64> = p.matrix();
        let t46: CMatrix<f64> = Permutation::from_one_line(&[1, 2, 3, 6, 5, 4]).unwrap().matrix();
        let t14: CMatrix<f64> = Permutation::from_one_line(&[4, 2, 3, 1, 5, 6]).unwrap().matrix();
        assert_eq!(m, t46 * t14);
    }

    #[test]
    fn opt1_blocks() {
        let dec = decompose(&bundled::opt1::<f64>()).unwrap();
        assert_eq!(dec.state_blocks, vec![1, 2, 1]);
        assert_eq!(dec.operator_blocks, vec![1, 2, 1]);
        assert_eq!(dec.p_hat, CMatrix::identity(4, 4));
        assert_eq!(dec.q_hat, CMatrix::identity(4, 4));
        assert!(dec.operators_projective());
        assert_eq!(dec.operator_multiplicities, vec![1, 2, 1]);
    }

    #[test]
    fn single_term_block() {
        let p = diagonal_problem(&[1.0], &[vec![0.5, 0.3, 0.2]], &[vec![3.0, 2.0, 1.0]]).unwrap();
        let dec = decompose(&p).unwrap();
        assert_eq!(dec.state_blocks, vec![3]);
        assert_eq!(dec.g_rho.row(0).iter().copied().collect::<Vec<_>>(), vec![0.5, 0.3, 0.2]);
        assert_eq!(dec.state_multiplicities, vec![1, 1, 1]);
    }

    #[test]
    fn decomposition_invariants_in_rotated_frame() {
        let p = bundled::opt1::<f64>();
        let w = random_unitary::<f64>(12, 4);
        let q = p.conjugated(&w).unwrap();
        let dec = decompose(&q).unwrap();
        for (m, t) in q.terms().iter().enumerate() {
            let s = &dec.p_hat * &t.state * dec.p_hat.adjoint() * nalgebra::Complex::new(t.weight, 0.0);
            let o = &dec.q_hat * &t.operator * dec.q_hat.adjoint();
            assert!(linalg::is_diagonal(&s, 1e-10));
            assert!(linalg::is_diagonal(&o, 1e-10));
            for k in 0..4 {
                assert!((s[(k, k)].re - dec.g_rho[(m, k)]).abs() < 1e-12);
            }
        }
        assert_eq!(dec.state_blocks, vec![1, 2, 1]);
        assert_eq!(dec.operator_blocks, vec![1, 2, 1]);
        assert_eq!(decompose(&q).unwrap(), dec);
        let points = enumerate(&dec, EnumerationMode::Exhaustive).unwrap();
        for pt in &points {
            let f = evaluate(&q, &pt.representative).unwrap();
            assert!((f - pt.value).abs() < 1e-10);
        }
    }

    fn check_dominance(dec: &BlockDecomposition<f64>) {
        for (m, r) in dec.intervals().iter().enumerate() {
            for k in r.clone() {
                for mp in 0..dec.terms() {
                    if mp < m {
                        assert!(dec.g_rho[(m, k)] > dec.g_rho[(mp, k)]);
                    } else {
                        assert!(dec.g_rho[(m, k)] >= dec.g_rho[(mp, k)]);
                    }
                }
            }
        }
    }

    #[test]
    fn dominance_and_grouping() {
        for seed in 0..20 {
            let p = random_diagonal_problem::<f64>(seed, 5, 3);
            let dec = decompose(&p).unwrap();
            check_dominance(&dec);
            assert_eq!(dec.state_multiplicities.iter().sum::<usize>(), 5);
        }
        let nu = decompose(&bundled::nonuniqueness::<f64>()).unwrap();
        check_dominance(&nu);
        assert_eq!(nu.state_blocks, vec![2, 2, 2]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let p = diagonal_problem(
            &[0.5, 0.5],
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let dec = decompose(&p).unwrap();
        assert_eq!(dec.state_blocks, vec![2, 0]);
        assert_eq!(dec.state_multiplicities, vec![2]);
    }

    #[test]
    fn non_commuting_rejected() {
        let p = crate::random::random_problem::<f64>(1, 3, 2);
        assert!(matches!(decompose(&p), Err(Error::NotCommuting(_))));
    }

    #[test]
    fn opt1_catalog() {
        let dec = decompose(&bundled::opt1::<f64>()).unwrap();
        let points = enumerate(&dec, EnumerationMode::Exhaustive).unwrap();
        assert_eq!(points.iter().map(|p| p.multiplicity).sum::<usize>(), 24);
        let find = |s: &str| {
            let pi: Permutation = s.parse().unwrap();
            let v = dec.value(&pi).unwrap();
            let (c, _) = (dec.classification_unchecked(pi.images()), ());
            (v, c)
        };
        let (v1, c1) = find("1,2,3,4");
        let (v2, c2) = find("3,2,4,1");
        assert!((v1 - 0.39).abs() < 1e-12 && c1 == Classification::LocalMax);
        assert!((v2 - 0.36).abs() < 1e-12 && c2 == Classification::LocalMax);
        assert!(points.iter().any(|p| (p.value - 0.39).abs() < 1e-12 && p.classification == Classification::LocalMax));
        assert!(points.iter().any(|p| (p.value - 0.36).abs() < 1e-12 && p.classification == Classification::LocalMax));
        let firsts: Vec<_> = points.iter().map(|p| p.pi.clone()).collect();
        let mut sorted_firsts = firsts.clone();
        sorted_firsts.sort();
        assert_eq!(firsts, sorted_firsts);
    }

    #[test]
    fn closed_forms_match_engine() {
        for seed in 0..10 {
            let p = random_diagonal_problem::<f64>(seed, 4, 3);
            let dec = decompose(&p).unwrap();
            for images in all_permutations(4).unwrap().into_iter().step_by(5) {
                let pt = dec.point(&Permutation(images)).unwrap();
                let r = classify(&p, &pt.representative).unwrap();
                assert!((r.value - pt.value).abs() < 1e-10);
                assert!(r.max_term_commutator < 1e-10);
                assert_eq!(r.classification, pt.classification);
                let h = crate::linalg::symmetric_eigenvalues(
                    &hessian_matrix(&p, &pt.representative).unwrap(),
                );
                for (a, b) in h.iter().zip(pt.full_spectrum(4)) {
                    assert!((a - b).abs() < 1e-8, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn nonuniqueness_catalog() {
        let p = bundled::nonuniqueness::<f64>();
        let dec = decompose(&p).unwrap();
        let points = enumerate(&dec, EnumerationMode::Exhaustive).unwrap();
        let max = points.iter().map(|p| p.value).fold(f64::MIN, f64::max);
        assert!((max - 0.58).abs() < 1e-12);
        for target in [79.0 / 150.0, 0.42] {
            assert!(points
                .iter()
                .any(|p| (p.value - target).abs() < 1e-12 && p.classification == Classification::LocalMax));
        }
        let u1 = Permutation::from_transpositions(6, &[(4, 6), (1, 4)]).unwrap();
        let u2 = Permutation::from_transpositions(6, &[(3, 5), (2, 3), (4, 6), (1, 4)]).unwrap();
        let (f1, f2) = (
            dec.frame_permutation(&u1.matrix()).unwrap(),
            dec.frame_permutation(&u2.matrix()).unwrap(),
        );
        assert!((dec.value(&f1).unwrap() - 79.0 / 150.0).abs() < 1e-12);
        assert!((dec.value(&f2).unwrap() - 0.42).abs() < 1e-12);
        assert!((evaluate(&p, &dec.representative(&f1).unwrap()).unwrap() - 79.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_mode() {
        let dec = decompose(&bundled::nonuniqueness::<f64>()).unwrap();
        let a = enumerate(&dec, EnumerationMode::Sampled { count: 100, seed: 3 }).unwrap();
        let b = enumerate(&dec, EnumerationMode::Sampled { count: 100, seed: 3 }).unwrap();
        assert_eq!(a.iter().map(|p| p.multiplicity).sum::<usize>(), 100);
        assert_eq!(
            a.iter().map(|p| p.pi.clone()).collect::<Vec<_>>(),
            b.iter().map(|p| p.pi.clone()).collect::<Vec<_>>()
        );
        let all = enumerate(&dec, EnumerationMode::Sampled { count: 10_000, seed: 3 }).unwrap();
        assert_eq!(all.iter().map(|p| p.multiplicity).sum::<usize>(), 720);
    }

    #[test]
    fn too_large() {
        let p = random_diagonal_problem::<f64>(0, 9, 2);
        let dec = decompose(&p).unwrap();
        assert!(matches!(
            enumerate(&dec, EnumerationMode::Exhaustive),
            Err(Error::TooLarge { .. })
        ));
        assert!(enumerate(&dec, EnumerationMode::Sampled { count: 50, seed: 1 }).is_ok());
    }

    #[test]
    fn m1_sorted_spectra() {
        let p = diagonal_problem::<f64>(&[1.0], &[vec![0.5, 0.3, 0.2]], &[vec![1.0, 2.0, 3.0]]).unwrap();
        let s = m1_solution(&p).unwrap();
        assert!((s.max_value - 2.3).abs() < 1e-15);
        assert!((s.min_value - 1.7).abs() < 1e-15);
        assert!(s.trap_free);
        let rev: CMatrix<f64> = Permutation::from_one_line(&[3, 2, 1]).unwrap().matrix();
        assert!((evaluate(&p, &rev).unwrap() - 2.3).abs() < 1e-15);
        assert!((evaluate(&p, &s.maximizer).unwrap() - 2.3).abs() < 1e-15);
        let h = dec_h(&s.decomposition);
        assert_eq!(h.len(), 6);
    }

    fn dec_h(dec: &BlockDecomposition<f64>) -> Vec<f64> {
        dec.hessian_eigs(&Permutation::identity(dec.dimension())).unwrap()
    }

    #[test]
    fn m1_closed_form_hessian() {
        let p = diagonal_problem(&[1.0], &[vec![0.5, 0.3, 0.2]], &[vec![3.0, 2.0, 1.0]]).unwrap();
        let dec = decompose(&p).unwrap();
        let h = dec_h(&dec);
        let lam = [0.5, 0.3, 0.2];
        let o = [3.0, 2.0, 1.0];
        let mut idx = 0;
        for k in 0..3 {
            for kp in k..3 {
                let expected = -(lam[k] - lam[kp]) * (o[k] - o[kp]);
                assert!((h[idx] - expected).abs() < 1e-15);
                idx += 1;
            }
        }
    }

    #[test]
    fn m1_identity_operator() {
        let p = diagonal_problem(&[1.0], &[vec![0.6, 0.4]], &[vec![1.0, 1.0]]).unwrap();
        let s = m1_solution(&p).unwrap();
        assert_eq!(s.max_value, 1.0);
        assert_eq!(s.min_value, 1.0);
        let c = s.catalog.unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].multiplicity, 2);
    }

    #[test]
    fn m1_trap_free_random() {
        for seed in 0..10 {
            let p = random_diagonal_problem::<f64>(seed, 5, 1);
            let s = m1_solution(&p).unwrap();
            assert!(s.trap_free);
            let maxima: Vec<f64> = s
                .catalog
                .unwrap()
                .iter()
                .filter(|p| p.classification == Classification::LocalMax)
                .map(|p| p.value)
                .collect();
            assert!(maxima.iter().all(|v| (v - s.max_value).abs() < 1e-12));
        }
    }

    #[test]
    fn m1_requires_one_term() {
        assert!(matches!(
            m1_solution(&bundled::opt1::<f64>()),
            Err(Error::WrongM { expected: 1, found: 3 })
        ));
    }
}
