//! False-trap certification for reconcilable critical points.
//!
//! With matched state and operator blocks and projective operators, a
//! reconcilable local maximum is a false trap exactly when its permutation
//! moves elements around a cycle of at least three blocks. The brute-force
//! census over all permutations is the reference every criterion is checked
//! against.

use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{all_permutations, decompose, BlockDecomposition, Permutation, PermutationPoint};
use crate::ensemble::{diagonal_problem, validate, EnsembleProblem};
use crate::error::{Error, Result};
use crate::landscape::Classification;
use crate::scalar::{abs, real, to_f64, Real};

/// Tolerance separating false-trap values from the global value.
pub const TRAP_TOLERANCE: f64 = 1e-10;

/// Directed block-exchange graph of a permutation (blocks 0-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExchangeGraph {
    pub blocks: usize,
    /// `(i, j)`: some position of `I_i` is sent into `I_j`.
    pub edges: BTreeSet<(usize, usize)>,
    #[serde(skip)]
    pub intervals: Vec<Range<usize>>,
}

impl ExchangeGraph {
    pub fn has_two_cycle(&self) -> bool {
        self.edges.iter().any(|&(i, j)| self.edges.contains(&(j, i)))
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((i, 0)..(i + 1, 0)).map(|&(_, j)| j)
    }

    /// A simple directed cycle through at least three blocks, starting at
    /// its smallest node; the lexicographically first such cycle is
    /// returned.
    pub fn long_cycle(&self) -> Option<Vec<usize>> {
        for start in 0..self.blocks {
            let mut path = vec![start];
            if let Some(c) = self.extend(&mut path, start) {
                return Some(c);
            }
        }
        None
    }

    fn extend(&self, path: &mut Vec<usize>, start: usize) -> Option<Vec<usize>> {
        let last = *path.last().expect("nonempty");
        for next in self.successors(last) {
            if next == start && path.len() >= 3 {
                return Some(path.clone());
            }
            if next > start && !path.contains(&next) {
                path.push(next);
                if let Some(c) = self.extend(path, start) {
                    return Some(c);
                }
                path.pop();
            }
        }
        None
    }
}

fn block_of(intervals: &[Range<usize>], k: usize) -> usize {
    intervals
        .iter()
        .position(|r| r.contains(&k))
        .expect("intervals cover all positions")
}

fn check_matched<T: Real>(dec: &BlockDecomposition<T>) -> Result<()> {
    if !dec.blocks_match() {
        return Err(Error::BlockMismatch {
            state: dec.state_blocks.clone(),
            operator: dec.operator_blocks.clone(),
        });
    }
    Ok(())
}

/// Builds the exchange graph of `pi` over the block intervals.
pub fn exchange_graph<T: Real>(pi: &Permutation, dec: &BlockDecomposition<T>) -> Result<ExchangeGraph> {
    check_matched(dec)?;
    if pi.len() != dec.dimension() {
        return Err(Error::DimensionMismatch {
            expected: dec.dimension(),
            found: pi.len(),
        });
    }
    let intervals = dec.intervals();
    let mut edges = BTreeSet::new();
    for (k, &j) in pi.images().iter().enumerate() {
        let (a, b) = (block_of(&intervals, k), block_of(&intervals, j));
        if a != b {
            edges.insert((a, b));
        }
    }
    Ok(ExchangeGraph {
        blocks: dec.terms(),
        edges,
        intervals,
    })
}

/// How a trap verdict was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificationMethod {
    CycleCriterion,
    BruteForce,
    Corollary2,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrapCertificate<T: Real> {
    pub is_false_trap: bool,
    /// Blocks of the exchange cycle (0-based).
    pub witness_cycle: Option<Vec<usize>>,
    pub global_value: T,
    pub point_value: T,
    pub method: CertificationMethod,
}

impl<T: Real> TrapCertificate<T> {
    /// Witness cycle with 1-based block labels.
    pub fn witness_one_based(&self) -> Option<Vec<usize>> {
        self.witness_cycle
            .as_ref()
            .map(|c| c.iter().map(|b| b + 1).collect())
    }
}

/// Certifies a reconcilable local maximum by the cycle criterion.
pub fn certify_trap<T: Real>(point: &PermutationPoint<T>, dec: &BlockDecomposition<T>) -> Result<TrapCertificate<T>> {
    if point.classification != Classification::LocalMax {
        return Err(Error::NotLocalMax);
    }
    check_matched(dec)?;
    if !dec.operators_projective() {
        return Err(Error::NotProjective);
    }
    let graph = exchange_graph(&point.pi, dec)?;
    let cycle = graph.long_cycle();
    Ok(TrapCertificate {
        is_false_trap: cycle.is_some(),
        witness_cycle: cycle,
        global_value: dec.value(&Permutation::identity(dec.dimension()))?,
        point_value: point.value,
        method: CertificationMethod::CycleCriterion,
    })
}

/// A three-block loop satisfying the cyclic inequalities.
#[derive(Clone, Debug, Serialize)]
pub struct LoopWitness {
    /// `(m_1, m_2, m_3)`, 0-based.
    pub blocks: [usize; 3],
    /// `k_i`: the position of `I_{m_i}` that moves to block `m_{i+1}`.
    pub positions: [usize; 3],
    /// Permutation sending `k_i` to the slot of `k_{i+1}`.
    pub permutation: Permutation,
}

#[derive(Clone, Debug, Serialize)]
pub struct Corollary2Outcome {
    pub traps_exist: bool,
    pub witness: Option<LoopWitness>,
}

/// Three-term loop test.
///
/// For each orientation `(m_1, m_2, m_3)` of the blocks, `k_i` minimizes
/// the loss `λ^{m_i}_k - λ^{m_{i+1}}_k` over `I_{m_i}` (with `m_4 = m_1`),
/// and the loop certifies a trap when
/// `λ^{m_i}_{k_i} - λ^{m_{i+1}}_{k_i} ≤ λ^{m_i}_{k_{i-1}} - λ^{m_{i+1}}_{k_{i-1}}`
/// for `i = 1, 2, 3` (with `k_0 = k_3`) and the total loss is positive.
/// `λ` are the weighted state eigenvalues `Ĝ_ρ`.
pub fn corollary2_check<T: Real>(dec: &BlockDecomposition<T>) -> Result<Corollary2Outcome> {
    if dec.terms() != 3 {
        return Err(Error::WrongM {
            expected: 3,
            found: dec.terms(),
        });
    }
    check_matched(dec)?;
    let g = &dec.g_rho;
    let intervals = dec.intervals();
    let eps = real::<T>(TRAP_TOLERANCE);
    let loss = |m: usize, n: usize, k: usize| g[(m, k)] - g[(n, k)];
    for blocks in [[0, 1, 2], [0, 2, 1]] {
        let mut positions = [0usize; 3];
        let mut feasible = true;
        for i in 0..3 {
            let (m, n) = (blocks[i], blocks[(i + 1) % 3]);
            let best = intervals[m].clone().reduce(|a, b| if loss(m, n, b) < loss(m, n, a) { b } else { a });
            match best {
                Some(k) => positions[i] = k,
                None => feasible = false,
            }
        }
        if !feasible {
            continue;
        }
        let holds = (0..3).all(|i| {
            let (m, n) = (blocks[i], blocks[(i + 1) % 3]);
            let prev = positions[(i + 2) % 3];
            loss(m, n, positions[i]) <= loss(m, n, prev) + eps
        });
        let total = (0..3).fold(T::zero(), |acc, i| {
            acc + loss(blocks[i], blocks[(i + 1) % 3], positions[i])
        });
        if holds && total > eps {
            let mut images: Vec<usize> = (0..dec.dimension()).collect();
            for i in 0..3 {
                images[positions[i]] = positions[(i + 1) % 3];
            }
            return Ok(Corollary2Outcome {
                traps_exist: true,
                witness: Some(LoopWitness {
                    blocks,
                    positions,
                    permutation: Permutation::from_images(images)?,
                }),
            });
        }
    }
    Ok(Corollary2Outcome {
        traps_exist: false,
        witness: None,
    })
}

/// One group of permutations sharing classification and value.
#[derive(Clone, Debug, Serialize)]
pub struct CensusEntry<T: Real> {
    pub value: T,
    pub count: usize,
    pub classification: Classification,
    /// Every catalog point is reconcilable; kept for export symmetry.
    pub reconcilable: bool,
    pub false_trap: bool,
    /// Lexicographically first permutation of the group.
    pub first: Permutation,
}

/// Exhaustive census of reconcilable critical points.
#[derive(Clone, Debug, Serialize)]
pub struct TrapCensus<T: Real> {
    pub global_max: T,
    pub global_min: T,
    /// Distinct values of local maxima below `global_max`, ascending.
    pub max_trap_values: Vec<T>,
    /// Distinct values of local minima above `global_min`, ascending.
    pub min_trap_values: Vec<T>,
    /// Grouped by classification and value, ordered by value.
    pub entries: Vec<CensusEntry<T>>,
    pub permutations: usize,
}

impl<T: Real> TrapCensus<T> {
    /// False-trap values for maximization.
    pub fn ft_values(&self) -> &[T] {
        &self.max_trap_values
    }

    /// Whether the permutation with this value and classification is a
    /// false trap.
    pub fn is_trap(&self, value: T, classification: Classification) -> bool {
        let eps = real::<T>(TRAP_TOLERANCE);
        match classification {
            Classification::LocalMax => value < self.global_max - eps,
            Classification::LocalMin => value > self.global_min + eps,
            _ => false,
        }
    }
}

fn distinct_sorted<T: Real>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let eps = real::<T>(TRAP_TOLERANCE);
    let mut out: Vec<T> = Vec::new();
    for x in v {
        if out.last().is_none_or(|&y| abs(x - y) > eps) {
            out.push(x);
        }
    }
    out
}

/// Census of a decomposition over all `D!` permutations.
pub fn survey_decomposition<T: Real>(dec: &BlockDecomposition<T>) -> Result<TrapCensus<T>> {
    let perms = all_permutations(dec.dimension())?;
    let rows: Vec<(T, Classification)> = perms
        .par_iter()
        .map(|p| (dec.value_unchecked(p), dec.classification_unchecked(p)))
        .collect();
    let global_max = rows.iter().map(|r| r.0).fold(rows[0].0, |a, b| if b > a { b } else { a });
    let global_min = rows.iter().map(|r| r.0).fold(rows[0].0, |a, b| if b < a { b } else { a });
    let mut census = TrapCensus {
        global_max,
        global_min,
        max_trap_values: Vec::new(),
        min_trap_values: Vec::new(),
        entries: Vec::new(),
        permutations: perms.len(),
    };
    let eps = real::<T>(TRAP_TOLERANCE);
    let mut order: Vec<usize> = (0..perms.len()).collect();
    order.sort_by(|&a, &b| {
        rows[a]
            .0
            .partial_cmp(&rows[b].0)
            .expect("finite")
            .then(rows[a].1.cmp(&rows[b].1))
            .then(a.cmp(&b))
    });
    let mut entries: Vec<CensusEntry<T>> = Vec::new();
    for i in order {
        let (value, class) = rows[i];
        let existing = entries
            .iter_mut()
            .rev()
            .take_while(|e| abs(e.value - value) <= eps)
            .find(|e| e.classification == class);
        match existing {
            Some(e) => {
                e.count += 1;
                let p = Permutation::from_images(perms[i].clone())?;
                if p < e.first {
                    e.first = p;
                }
            }
            None => entries.push(CensusEntry {
                value,
                count: 1,
                classification: class,
                reconcilable: true,
                false_trap: census.is_trap(value, class),
                first: Permutation::from_images(perms[i].clone())?,
            }),
        }
    }
    census.max_trap_values = distinct_sorted(
        entries
            .iter()
            .filter(|e| e.false_trap && e.classification == Classification::LocalMax)
            .map(|e| e.value)
            .collect(),
    );
    census.min_trap_values = distinct_sorted(
        entries
            .iter()
            .filter(|e| e.false_trap && e.classification == Classification::LocalMin)
            .map(|e| e.value)
            .collect(),
    );
    census.entries = entries;
    Ok(census)
}

/// Decomposes a commuting problem and surveys every permutation.
pub fn brute_force_survey<T: Real>(problem: &EnsembleProblem<T>) -> Result<TrapCensus<T>> {
    let d = problem.dimension();
    if d > crate::catalog::EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            dimension: d,
            limit: crate::catalog::EXHAUSTIVE_LIMIT,
        });
    }
    survey_decomposition(&decompose(problem)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem4Report<T: Real> {
    pub passed: bool,
    /// First false trap found, if any: `(permutation, value, classification)`.
    pub counterexample: Option<(Permutation, T, Classification)>,
    pub census: TrapCensus<T>,
}

/// Checks that a perfectly distinguishable problem has no reconcilable
/// false traps.
pub fn theorem4_check<T: Real>(problem: &EnsembleProblem<T>) -> Result<Theorem4Report<T>> {
    let report = validate(problem);
    if !report.states_distinguishable {
        return Err(Error::NotDistinguishable("states"));
    }
    if !report.operators_distinguishable {
        return Err(Error::NotDistinguishable("operators"));
    }
    let census = brute_force_survey(problem)?;
    let counterexample = census
        .entries
        .iter()
        .find(|e| e.false_trap)
        .map(|e| (e.first.clone(), e.value, e.classification));
    Ok(Theorem4Report {
        passed: counterexample.is_none(),
        counterexample,
        census,
    })
}

/// Member of the three-level leakage family with predicted facts.
#[derive(Clone, Debug)]
pub struct EpsilonFamily<T: Real> {
    pub eps: [T; 3],
    pub problem: EnsembleProblem<T>,
    /// `1 - (ε_1 + ε_2 + ε_3) / 3`.
    pub predicted_global_max: T,
    /// `ε_i + 2 ε_{i+1} ≥ 1` for all `i` (cyclically).
    pub predicts_false_traps: bool,
    /// `(ε_1 + ε_2 + ε_3) / 3`.
    pub mean_epsilon: T,
}

/// `ρ_m = (1-ε_m)|m⟩⟨m| + ε_m|m+1⟩⟨m+1|`, `O_m = |m⟩⟨m|`, `ω_m = 1/3`.
pub fn epsilon_family<T: Real>(eps: [T; 3]) -> Result<EpsilonFamily<T>> {
    let half = real::<T>(0.5);
    for (i, &e) in eps.iter().enumerate() {
        if !(e >= T::zero() && e <= half) {
            return Err(Error::OutOfRange(format!(
                "epsilon_{} = {} outside [0, 1/2]",
                i + 1,
                to_f64(e)
            )));
        }
    }
    let third = T::one() / real::<T>(3.0);
    let mut states = vec![vec![T::zero(); 3]; 3];
    let mut ops = vec![vec![T::zero(); 3]; 3];
    for m in 0..3 {
        states[m][m] = T::one() - eps[m];
        states[m][(m + 1) % 3] = eps[m];
        ops[m][m] = T::one();
    }
    let problem = diagonal_problem(&[third, third, third], &states, &ops)?;
    let slack = real::<T>(1e-12);
    let predicts = (0..3).all(|i| eps[i] + real::<T>(2.0) * eps[(i + 1) % 3] >= T::one() - slack);
    let mean = (eps[0] + eps[1] + eps[2]) * third;
    Ok(EpsilonFamily {
        eps,
        problem,
        predicted_global_max: T::one() - mean,
        predicts_false_traps: predicts,
        mean_epsilon: mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::catalog::{enumerate, EnumerationMode};
    use crate::random::{random_block_matched_problem, random_distinguishable_problem};

    fn point(dec: &BlockDecomposition<f64>, s: &str) -> PermutationPoint<f64> {
        dec.point(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn opt1_graph_and_certificate() {
        let dec = decompose(&bundled::opt1::<f64>()).unwrap();
        let g = exchange_graph(&"3,2,4,1".parse().unwrap(), &dec).unwrap();
        assert_eq!(g.edges, BTreeSet::from([(0, 1), (1, 2), (2, 0)]));
        let cert = certify_trap(&point(&dec, "3,2,4,1"), &dec).unwrap();
        assert!(cert.is_false_trap);
        assert_eq!(cert.witness_one_based(), Some(vec![1, 2, 3]));
        assert!((cert.global_value - 0.39).abs() < 1e-12);
        assert!((cert.point_value - 0.36).abs() < 1e-12);
        let id = certify_trap(&point(&dec, "1,2,3,4"), &dec).unwrap();
        assert!(!id.is_false_trap && id.witness_cycle.is_none());
    }

    #[test]
    fn trivial_graphs() {
        let dec = decompose(&bundled::opt1::<f64>()).unwrap();
        assert!(exchange_graph(&Permutation::identity(4), &dec).unwrap().edges.is_empty());
        assert!(exchange_graph(&"1,3,2,4".parse().unwrap(), &dec).unwrap().edges.is_empty());
    }

    #[test]
    fn rejects_non_maxima_and_mismatched_blocks() {
        let dec = decompose(&bundled::opt1::<f64>()).unwrap();
        let worst = point(&dec, "4,3,2,1");
        assert_ne!(worst.classification, Classification::LocalMax);
        assert!(matches!(certify_trap(&worst, &dec), Err(Error::NotLocalMax)));
        let tied = epsilon_family([0.5, 0.5, 0.5]).unwrap();
        let dec = decompose(&tied.problem).unwrap();
        assert!(matches!(
            exchange_graph(&Permutation::identity(3), &dec),
            Err(Error::BlockMismatch { .. })
        ));
        assert!(matches!(corollary2_check(&dec), Err(Error::BlockMismatch { .. })));
    }

    #[test]
    fn nonuniqueness_traps() {
        let dec = decompose(&bundled::nonuniqueness::<f64>()).unwrap();
        let u1 = Permutation::from_transpositions(6, &[(4, 6), (1, 4)]).unwrap();
        let u2 = Permutation::from_transpositions(6, &[(3, 5), (2, 3), (4, 6), (1, 4)]).unwrap();
        for (pi, v) in [(u1, 79.0 / 150.0), (u2, 0.42)] {
            let pt = dec.point(&dec.frame_permutation(&pi.matrix()).unwrap()).unwrap();
            assert_eq!(pt.classification, Classification::LocalMax);
            let cert = certify_trap(&pt, &dec).unwrap();
            assert!(cert.is_false_trap);
            assert!((cert.point_value - v).abs() < 1e-12);
            assert!((cert.global_value - 0.58).abs() < 1e-12);
        }
        let census = survey_decomposition(&dec).unwrap();
        assert!((census.global_max - 0.58).abs() < 1e-12);
        for v in [79.0 / 150.0, 0.42] {
            assert!(census.ft_values().iter().any(|x| (x - v).abs() < 1e-12));
        }
    }

    #[test]
    fn opt1_census() {
        let c = brute_force_survey(&bundled::opt1::<f64>()).unwrap();
        assert!((c.global_max - 0.39).abs() < 1e-12);
        assert!(c.ft_values().iter().any(|v| (v - 0.36).abs() < 1e-12));
        assert_eq!(c.entries.iter().map(|e| e.count).sum::<usize>(), 24);
    }

    #[test]
    fn appendix_census() {
        let p = bundled::appendix_distinguishable::<f64>();
        let c = brute_force_survey(&p).unwrap();
        assert!((c.global_max - 0.54).abs() < 1e-12);
        assert!(c.global_min.abs() < 1e-12);
        assert!(c.max_trap_values.is_empty() && c.min_trap_values.is_empty());
        assert!(theorem4_check(&p).unwrap().passed);
    }

    #[test]
    fn theorem4_rejects_indistinguishable() {
        assert!(matches!(
            theorem4_check(&bundled::opt1::<f64>()),
            Err(Error::NotDistinguishable("states"))
        ));
    }

    #[test]
    fn theorem4_random() {
        for seed in 0..20 {
            let p = random_distinguishable_problem::<f64>(seed, 6, 3);
            let r = theorem4_check(&p).unwrap();
            assert!(r.passed, "seed {seed}: {:?}", r.counterexample);
        }
        let zero = epsilon_family([0.0, 0.0, 0.0]).unwrap();
        assert!(theorem4_check(&zero.problem).unwrap().passed);
    }

    #[test]
    fn corollary2_examples() {
        let zero = epsilon_family([0.0, 0.0, 0.0]).unwrap();
        assert!(!corollary2_check(&decompose(&zero.problem).unwrap()).unwrap().traps_exist);
        let mixed = epsilon_family([0.4, 0.2, 0.1]).unwrap();
        let dec = decompose(&mixed.problem).unwrap();
        assert!(!corollary2_check(&dec).unwrap().traps_exist);
        assert!(survey_decomposition(&dec).unwrap().ft_values().is_empty());
        let trap = epsilon_family([0.4, 0.4, 0.4]).unwrap();
        let dec = decompose(&trap.problem).unwrap();
        let out = corollary2_check(&dec).unwrap();
        assert!(out.traps_exist);
        let w = out.witness.unwrap();
        let pt = dec.point(&w.permutation).unwrap();
        assert_eq!(pt.classification, Classification::LocalMax);
        assert!(certify_trap(&pt, &dec).unwrap().is_false_trap);
        assert!(matches!(
            corollary2_check(&decompose(&bundled::appendix_distinguishable::<f64>()).unwrap()),
            Err(Error::BlockMismatch { .. }) | Err(Error::WrongM { .. })
        ));
    }

    #[test]
    fn corollary2_requires_three_terms() {
        let p = random_block_matched_problem::<f64>(0, 4, 2);
        assert!(matches!(
            corollary2_check(&decompose(&p).unwrap()),
            Err(Error::WrongM { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn epsilon_family_facts() {
        let f = epsilon_family::<f64>([0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.predicted_global_max, 1.0);
        assert!(!f.predicts_false_traps);
        let h = epsilon_family::<f64>([0.5, 0.5, 0.5]).unwrap();
        assert!(h.predicts_false_traps);
        assert!((h.mean_epsilon - 0.5).abs() < 1e-15);
        assert!(matches!(epsilon_family([0.6, 0.0, 0.0]), Err(Error::OutOfRange(_))));
        assert!(matches!(epsilon_family([-0.1, 0.0, 0.0]), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn cycle_criterion_matches_census_on_random_problems() {
        for seed in 0..30 {
            let d = 4 + (seed as usize % 3);
            let p = random_block_matched_problem::<f64>(seed, d, 3);
            let dec = decompose(&p).unwrap();
            assert!(dec.blocks_match());
            let census = survey_decomposition(&dec).unwrap();
            for pt in enumerate(&dec, EnumerationMode::Exhaustive).unwrap() {
                if pt.classification != Classification::LocalMax {
                    continue;
                }
                let g = exchange_graph(&pt.pi, &dec).unwrap();
                assert!(!g.has_two_cycle());
                let cert = certify_trap(&pt, &dec).unwrap();
                assert_eq!(cert.is_false_trap, census.is_trap(pt.value, pt.classification));
                if cert.is_false_trap {
                    assert!(cert.point_value < cert.global_value - 1e-10);
                }
            }
        }
    }

    #[test]
    fn two_term_complementary_operators_trap_free() {
        for seed in 0..20 {
            let mut r = crate::random::rng(seed);
            use rand::Rng;
            let d = 4;
            let o1: Vec<f64> = (0..d).map(|_| r.random_range(0.0..1.0)).collect();
            let o2: Vec<f64> = o1.iter().map(|x| 1.0 - x).collect();
            let s: Vec<Vec<f64>> = (0..2)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| r.random_range(0.01..1.0)).collect();
                    let t: f64 = v.iter().sum();
                    v.into_iter().map(|x| x / t).collect()
                })
                .collect();
            let p = diagonal_problem(&[0.3, 0.7], &s, &[o1, o2]).unwrap();
            let c = brute_force_survey(&p).unwrap();
            assert!(c.max_trap_values.is_empty() && c.min_trap_values.is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn corollary2_matches_census() {
        let grid: Vec<f64> = (0..6).map(|i| i as f64 / 10.0).collect();
        for &a in &grid {
            for &b in &grid {
                for &c in &grid {
                    let fam = epsilon_family([a, b, c]).unwrap();
                    let dec = decompose(&fam.problem).unwrap();
                    let census = survey_decomposition(&dec).unwrap();
                    match corollary2_check(&dec) {
                        Ok(out) => assert_eq!(out.traps_exist, !census.ft_values().is_empty(), "({a}, {b}, {c})"),
                        Err(Error::BlockMismatch { .. }) => assert!(!dec.blocks_match()),
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
        let mut disagreements = Vec::new();
        let mut positives = 0;
        for seed in 0..200 {
            let p = random_block_matched_problem::<f64>(seed, 3 + seed as usize % 4, 3);
            let dec = decompose(&p).unwrap();
            let out = corollary2_check(&dec).unwrap();
            let census = survey_decomposition(&dec).unwrap();
            if out.traps_exist != !census.ft_values().is_empty() {
                disagreements.push((seed, out.traps_exist));
            }
            if out.traps_exist {
                positives += 1;
            }
        }
        assert!(positives > 0);
        assert!(disagreements.is_empty(), "{disagreements:?}");
    }
}
