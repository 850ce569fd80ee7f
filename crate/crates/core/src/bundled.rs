//! The worked example problems, available both as constructors and as
//! bundled problem files.

use crate::ensemble::{diagonal_problem, EnsembleProblem};
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Bundled example names, in catalog order.
pub const NAMES: [&str; 5] = [
    "opt1",
    "nonuniqueness",
    "povm-dilation",
    "epsilon-family",
    "appendix-distinguishable",
];

/// Leakage parameters of the bundled `epsilon-family` member.
pub const DEFAULT_EPSILON: [f64; 3] = [0.4, 0.4, 0.4];

fn build<T: Real>(weights: &[f64], states: &[&[f64]], ops: &[&[f64]]) -> EnsembleProblem<T> {
    let w: Vec<T> = weights.iter().map(|&x| real(x)).collect();
    let s: Vec<Vec<T>> = states.iter().map(|r| r.iter().map(|&x| real(x)).collect()).collect();
    let o: Vec<Vec<T>> = ops.iter().map(|r| r.iter().map(|&x| real(x)).collect()).collect();
    diagonal_problem(&w, &s, &o).expect("bundled problem is valid")
}

const THIRD: f64 = 1.0 / 3.0;

/// Two-qubit problem with a reconcilable false trap at the permutation
/// `3 2 4 1`.
pub fn opt1<T: Real>() -> EnsembleProblem<T> {
    build(
        &[THIRD, THIRD, THIRD],
        &[
            &[0.4, 0.35, 0.15, 0.1],
            &[0.35, 0.45, 0.2, 0.0],
            &[0.29, 0.41, 0.18, 0.12],
        ],
        &[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ],
    )
}

/// Six-level problem with two distinct false traps.
pub fn nonuniqueness<T: Real>() -> EnsembleProblem<T> {
    build(
        &[THIRD, THIRD, THIRD],
        &[
            &[0.23, 0.35, 0.17, 0.25, 0.0, 0.0],
            &[0.0, 0.0, 0.27, 0.3, 0.22, 0.21],
            &[0.15, 0.26, 0.0, 0.0, 0.35, 0.24],
        ],
        &[
            &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        ],
    )
}

/// Two-qubit problem whose operators form a non-projective POVM.
pub fn povm_example<T: Real>() -> EnsembleProblem<T> {
    build(
        &[0.25, 0.25, 0.5],
        &[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.8, 0.2],
        ],
        &[
            &[0.3, 0.2, 0.4, 0.3],
            &[0.35, 0.45, 0.25, 0.5],
            &[0.35, 0.35, 0.35, 0.2],
        ],
    )
}

/// Member of the three-level leakage family with `ε_i = 0.4`.
pub fn epsilon_example<T: Real>() -> EnsembleProblem<T> {
    let e = DEFAULT_EPSILON.map(real::<T>);
    crate::traps::epsilon_family(e).expect("in range").problem
}

/// Diagonal problem with perfectly distinguishable states and operators.
pub fn appendix_distinguishable<T: Real>() -> EnsembleProblem<T> {
    build(
        &[0.25, 0.25, 0.5],
        &[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.8, 0.2],
        ],
        &[
            &[0.8, 0.2, 0.0, 0.0],
            &[0.0, 0.0, 0.4, 0.0],
            &[0.0, 0.0, 0.0, 0.6],
        ],
    )
}

/// Bundled problem by name.
pub fn by_name<T: Real>(name: &str) -> Result<EnsembleProblem<T>> {
    Ok(match name {
        "opt1" => opt1(),
        "nonuniqueness" => nonuniqueness(),
        "povm-dilation" => povm_example(),
        "epsilon-family" => epsilon_example(),
        "appendix-distinguishable" => appendix_distinguishable(),
        other => return Err(Error::Field {
            field: "problem".into(),
            message: format!("unknown bundled problem `{other}`"),
        }),
    })
}

/// Contents of the bundled problem file for `name`.
pub fn file_contents(name: &str) -> Option<&'static str> {
    Some(match name {
        "opt1" => include_str!("../problems/opt1.json"),
        "nonuniqueness" => include_str!("../problems/nonuniqueness.json"),
        "povm-dilation" => include_str!("../problems/povm-dilation.json"),
        "epsilon-family" => include_str!("../problems/epsilon-family.json"),
        "appendix-distinguishable" => include_str!("../problems/appendix-distinguishable.json"),
        _ => return None,
    })
}
