//! Seeded random generators for unitaries and test ensembles.

use nalgebra::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ensemble::{EnsembleProblem, Term};
use crate::linalg::{self, CMatrix};
use crate::scalar::{real, Real};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix<f64> {
    CMatrix::<f64>::from_fn(dim, dim, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn convert<T: Real>(x: &CMatrix<f64>) -> CMatrix<T> {
    x.map(|z| Complex::new(real::<T>(z.re), real::<T>(z.im)))
}

fn haar(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix<f64> {
    let qr = gaussian_matrix(rng, dim).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Haar-distributed unitary from a seeded complex Gaussian matrix
/// (QR with the phases of `R`'s diagonal removed).
pub fn random_unitary<T: Real>(seed: u64, dim: usize) -> CMatrix<T> {
    convert(&haar(&mut rng(seed), dim))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<T: Real>(seed: u64, dim: usize) -> CMatrix<T> {
    let g = gaussian_matrix(&mut rng(seed), dim);
    convert(&linalg::hermitian_part(&g))
}

fn density(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix<f64> {
    let g = gaussian_matrix(rng, dim);
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    linalg::hermitian_part(&(w / Complex::new(tr, 0.0)))
}

/// Random full-rank density matrix (normalized Wishart).
pub fn random_density<T: Real>(seed: u64, dim: usize) -> CMatrix<T> {
    convert(&density(&mut rng(seed), dim))
}

/// Generic ensemble: random densities, random Hermitian operators and
/// random positive weights.
pub fn random_problem<T: Real>(seed: u64, dim: usize, terms: usize) -> EnsembleProblem<T> {
    let mut r = rng(seed);
    let ts = (0..terms)
        .map(|_| {
            let w: f64 = r.random_range(0.1..1.0);
            let s = density(&mut r, dim);
            let o = linalg::hermitian_part(&gaussian_matrix(&mut r, dim));
            Term::new(real::<T>(w), convert(&s), convert(&o))
        })
        .collect();
    EnsembleProblem::new(dim, ts).expect("random problem is valid")
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Diagonal ensemble with random nonnegative spectra. Weights are random and
/// operator spectra are uniform in `[0, 1)`.
pub fn random_diagonal_problem<T: Real>(seed: u64, dim: usize, terms: usize) -> EnsembleProblem<T> {
    let mut r = rng(seed);
    let mut weights = Vec::new();
    let mut states = Vec::new();
    let mut ops = Vec::new();
    for _ in 0..terms {
        weights.push(real::<T>(r.random_range(0.1..1.0)));
        let raw: Vec<f64> = (0..dim).map(|_| r.random_range(0.01..1.0)).collect();
        states.push(normalized(&raw).into_iter().map(real::<T>).collect());
        ops.push((0..dim).map(|_| real::<T>(r.random_range(0.0..1.0))).collect());
    }
    crate::ensemble::diagonal_problem(&weights, &states, &ops).expect("valid")
}

fn random_composition(r: &mut ChaCha8Rng, total: usize, parts: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..total).collect();
    cuts.shuffle(r);
    let mut chosen: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    chosen.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut last = 0;
    for c in chosen.into_iter().chain(std::iter::once(total)) {
        sizes.push(c - last);
        last = c;
    }
    sizes
}

/// Diagonal ensemble whose weighted states are dominant exactly on the
/// supports of projective operators, so state and operator blocks coincide.
/// Positions are shuffled by a common random permutation.
pub fn random_block_matched_problem<T: Real>(seed: u64, dim: usize, terms: usize) -> EnsembleProblem<T> {
    assert!(terms >= 1 && terms <= dim);
    let mut r = rng(seed);
    let sizes = random_composition(&mut r, dim, terms);
    let mut owner = Vec::with_capacity(dim);
    for (m, &d) in sizes.iter().enumerate() {
        owner.extend(std::iter::repeat_n(m, d));
    }
    let mut positions: Vec<usize> = (0..dim).collect();
    positions.shuffle(&mut r);

    let mut sigma = vec![vec![0.0; dim]; terms];
    for k in 0..dim {
        let col: Vec<f64> = (0..terms).map(|_| r.random_range(0.0..1.0)).collect();
        let top = col.iter().cloned().fold(0.0, f64::max);
        for m in 0..terms {
            sigma[m][positions[k]] = if m == owner[k] {
                top + r.random_range(0.05..1.0)
            } else {
                col[m]
            };
        }
    }
    let row_sums: Vec<f64> = sigma.iter().map(|row| row.iter().sum()).collect();
    let total: f64 = row_sums.iter().sum();
    let weights: Vec<T> = row_sums.iter().map(|s| real::<T>(s / total)).collect();
    let states: Vec<Vec<T>> = sigma
        .iter()
        .zip(&row_sums)
        .map(|(row, s)| row.iter().map(|x| real::<T>(x / s)).collect())
        .collect();
    let ops: Vec<Vec<T>> = (0..terms)
        .map(|m| {
            let mut o = vec![T::zero(); dim];
            for k in 0..dim {
                if owner[k] == m {
                    o[positions[k]] = T::one();
                }
            }
            o
        })
        .collect();
    crate::ensemble::diagonal_problem(&weights, &states, &ops).expect("valid")
}

/// Diagonal ensemble with pairwise disjoint state supports and pairwise
/// disjoint operator supports.
pub fn random_distinguishable_problem<T: Real>(seed: u64, dim: usize, terms: usize) -> EnsembleProblem<T> {
    assert!(terms >= 1 && terms <= dim);
    let mut r = rng(seed);
    let support = |r: &mut ChaCha8Rng| {
        let sizes = random_composition(r, dim, terms);
        let mut positions: Vec<usize> = (0..dim).collect();
        positions.shuffle(r);
        let mut out = vec![Vec::new(); terms];
        let mut it = positions.into_iter();
        for (m, &d) in sizes.iter().enumerate() {
            out[m] = it.by_ref().take(d).collect::<Vec<_>>();
        }
        out
    };
    let state_support = support(&mut r);
    let op_support = support(&mut r);
    let mut weights = Vec::new();
    let mut states = Vec::new();
    let mut ops = Vec::new();
    for m in 0..terms {
        weights.push(real::<T>(r.random_range(0.1..1.0)));
        let mut s = vec![0.0; dim];
        for &k in &state_support[m] {
            s[k] = r.random_range(0.05..1.0);
        }
        states.push(normalized(&s).into_iter().map(real::<T>).collect());
        let mut o = vec![T::zero(); dim];
        for &k in &op_support[m] {
            o[k] = real::<T>(r.random_range(0.05..1.0));
        }
        ops.push(o);
    }
    crate::ensemble::diagonal_problem(&weights, &states, &ops).expect("valid")
}

/// Uniformly random permutation images of `0..n`.
pub fn random_permutation(seed: u64, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rng(seed));
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_unitary() {
        let a = random_unitary::<f64>(3, 5);
        let b = random_unitary::<f64>(3, 5);
        assert_eq!(a, b);
        assert!(linalg::is_unitary(&a));
        assert_ne!(a, random_unitary::<f64>(4, 5));
    }

    #[test]
    fn haar_first_moment() {
        let dim = 4;
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|s| random_unitary::<f64>(s, dim)[(0, 0)].norm_sqr())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        // Var |U_11|^2 = (D-1) / (D^2 (D+1)).
        let var = (dim as f64 - 1.0) / ((dim * dim) as f64 * (dim as f64 + 1.0));
        let sigma = (var / n as f64).sqrt();
        assert!((mean - 1.0 / dim as f64).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn generators_produce_valid_structures() {
        let p = random_block_matched_problem::<f64>(1, 6, 3);
        let s = p.structure();
        assert!(s.projective && s.states_commute);
        let q = random_distinguishable_problem::<f64>(2, 6, 3);
        let s = q.structure();
        assert!(s.states_distinguishable && s.operators_distinguishable);
        let d = random_density::<f64>(5, 3);
        assert!((linalg::trace(&d).re - 1.0).abs() < 1e-12);
    }
}
