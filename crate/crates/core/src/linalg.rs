//! Dense complex-matrix kernel.
//!
//! Vectorization is column-major throughout, so that
//! `vec(X Y Z) = (Z^T ⊗ X) vec(Y)` holds literally. Half-vectorizations keep
//! the lower triangle column by column: `vech_sym` includes the diagonal,
//! `vech_asym` keeps only the strict lower triangle.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{abs, cplx, cre, max, real, to_f64, tol, Real};

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense real matrix.
pub type RMatrix<T> = DMatrix<T>;

/// Hermiticity tolerance `1e-12 * max(1, ||X||_F)`.
pub fn hermitian_tolerance<T: Real>(x: &CMatrix<T>) -> T {
    tol::<T>(1e-12) * max(T::one(), x.norm())
}

/// Unitarity tolerance `1e-10 * sqrt(D)`.
pub fn unitary_tolerance<T: Real>(dim: usize) -> T {
    tol::<T>(1e-10) * real::<T>(dim as f64).sqrt()
}

/// Largest entrywise modulus of `X - X^†`.
pub fn hermitian_deviation<T: Real>(x: &CMatrix<T>) -> T {
    if !x.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    let n = x.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for i in 0..=j {
            let d = (x[(i, j)] - x[(j, i)].conj()).modulus();
            worst = max(worst, d);
        }
    }
    worst
}

pub fn is_hermitian<T: Real>(x: &CMatrix<T>) -> bool {
    x.is_square() && hermitian_deviation(x) < hermitian_tolerance(x)
}

/// `||U^† U - I||_F`.
pub fn unitary_deviation<T: Real>(u: &CMatrix<T>) -> T {
    if !u.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::<T>::identity(n, n)).norm()
}

pub fn is_unitary<T: Real>(u: &CMatrix<T>) -> bool {
    u.is_square() && unitary_deviation(u) < unitary_tolerance::<T>(u.nrows())
}

pub(crate) fn ensure_unitary<T: Real>(u: &CMatrix<T>) -> Result<()> {
    if is_unitary(u) {
        Ok(())
    } else {
        Err(Error::NonUnitary {
            deviation: to_f64(unitary_deviation(u)),
        })
    }
}

pub(crate) fn ensure_hermitian<T: Real>(x: &CMatrix<T>) -> Result<()> {
    if is_hermitian(x) {
        Ok(())
    } else {
        Err(Error::NonHermitianInput {
            deviation: to_f64(hermitian_deviation(x)),
        })
    }
}

/// `(X + X^†) / 2`.
pub fn hermitian_part<T: Real>(x: &CMatrix<T>) -> CMatrix<T> {
    (x + x.adjoint()) * cre(real::<T>(0.5))
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

pub fn trace<T: Real>(x: &CMatrix<T>) -> Complex<T> {
    x.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
}

/// `Tr[X Y]` without forming the product.
pub fn trace_product<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> Complex<T> {
    let n = x.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for k in 0..x.ncols() {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    acc
}

/// Embeds a real matrix as a complex one.
pub fn complexify<T: Real>(x: &RMatrix<T>) -> CMatrix<T> {
    x.map(cre)
}

/// Diagonal complex matrix from real entries.
pub fn diag<T: Real>(entries: &[T]) -> CMatrix<T> {
    let n = entries.len();
    let mut m = CMatrix::<T>::zeros(n, n);
    for (i, &e) in entries.iter().enumerate() {
        m[(i, i)] = cre(e);
    }
    m
}

/// Whether every off-diagonal entry is below `tol` in modulus.
pub fn is_diagonal<T: Real>(x: &CMatrix<T>, tol: T) -> bool {
    let n = x.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || x[(i, j)].modulus() < tol))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Columns are eigenvectors; the first component above the noise floor
    /// of each column is real and positive.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(Λ) V^†` for a real spectral function `f`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.map_spectrum(cre)
    }
}

/// Hermitian eigendecomposition `X = V diag(λ) V^†` with `λ` descending.
pub fn hermitian_eig<T: Real>(x: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    ensure_hermitian(x)?;
    Ok(hermitian_eig_unchecked(&hermitian_part(x)))
}

pub(crate) fn hermitian_eig_unchecked<T: Real>(x: &CMatrix<T>) -> HermitianEigen<T> {
    let n = x.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::<T>::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(x.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let floor = T::default_epsilon().sqrt();
    let mut vectors = CMatrix::<T>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let phase = col
            .iter()
            .find(|z| z.modulus() > floor)
            .map(|z| z.conj() / cre(z.modulus()))
            .unwrap_or_else(|| cre(T::one()));
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    HermitianEigen { values, vectors }
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn symmetric_eigenvalues<T: Real>(h: &RMatrix<T>) -> Vec<T> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let sym = (h + h.transpose()) * real::<T>(0.5);
    let mut values: Vec<T> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    values
}

/// `e^{i s A}` for Hermitian `A`, computed spectrally.
pub fn expi<T: Real>(a: &CMatrix<T>, s: T) -> Result<CMatrix<T>> {
    ensure_hermitian(a)?;
    Ok(expi_unchecked(a, s))
}

pub(crate) fn expi_unchecked<T: Real>(a: &CMatrix<T>, s: T) -> CMatrix<T> {
    let eig = hermitian_eig_unchecked(&hermitian_part(a));
    eig.map_spectrum(|lambda| {
        let phi = s * lambda;
        cplx(phi.cos(), phi.sin())
    })
}

/// Square root of a positive semidefinite Hermitian matrix; negative
/// round-off eigenvalues are clamped to zero.
pub fn psd_sqrt<T: Real>(x: &CMatrix<T>) -> Result<CMatrix<T>> {
    let eig = hermitian_eig(x)?;
    Ok(eig.map_spectrum(|l| cre(max(l, T::zero()).sqrt())))
}

/// Nearest unitary (polar factor) `U (U^† U)^{-1/2}`.
pub fn reunitarize<T: Real>(u: &CMatrix<T>) -> CMatrix<T> {
    let gram = hermitian_part(&(u.adjoint() * u));
    let eig = hermitian_eig_unchecked(&gram);
    u * eig.map_spectrum(|l| cre(T::one() / l.sqrt()))
}

/// Column-major vectorization.
pub fn vec<N: nalgebra::Scalar>(x: &DMatrix<N>) -> DVector<N> {
    DVector::from_iterator(x.len(), x.iter().cloned())
}

fn symmetric_deviation<T: Real>(x: &RMatrix<T>, sign: T) -> T {
    let n = x.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for i in 0..n {
            worst = max(worst, abs(x[(i, j)] - sign * x[(j, i)]));
        }
    }
    worst
}

fn symmetry_tolerance<T: Real>(x: &RMatrix<T>) -> T {
    tol::<T>(1e-12) * max(T::one(), x.norm())
}

/// Half-vectorization of a real symmetric matrix (lower triangle with diagonal).
pub fn vech_sym<T: Real>(x: &RMatrix<T>) -> Result<DVector<T>> {
    if !x.is_square() || symmetric_deviation(x, T::one()) >= symmetry_tolerance(x) {
        return Err(Error::SymmetryViolation("symmetric"));
    }
    let n = x.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in j..n {
            out.push(x[(i, j)]);
        }
    }
    Ok(DVector::from_vec(out))
}

/// Half-vectorization of a real antisymmetric matrix (strict lower triangle).
pub fn vech_asym<T: Real>(x: &RMatrix<T>) -> Result<DVector<T>> {
    if !x.is_square() || symmetric_deviation(x, -T::one()) >= symmetry_tolerance(x) {
        return Err(Error::SymmetryViolation("antisymmetric"));
    }
    let n = x.nrows();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 0..n {
        for i in j + 1..n {
            out.push(x[(i, j)]);
        }
    }
    Ok(DVector::from_vec(out))
}

/// Duplication matrices mapping half-vectorizations back to `vec`.
#[derive(Clone, Debug)]
pub struct DuplicationMatrices<T: Real> {
    /// `D^2 x D(D+1)/2`, entries in {0, 1}.
    pub d_sy: RMatrix<T>,
    /// `D^2 x D(D-1)/2`, entries in {-1, 0, 1}.
    pub d_ay: RMatrix<T>,
    pub dimension: usize,
}

pub fn duplication_matrices<T: Real>(dim: usize) -> DuplicationMatrices<T> {
    let n = dim;
    let mut d_sy = RMatrix::<T>::zeros(n * n, n * (n + 1) / 2);
    let mut d_ay = RMatrix::<T>::zeros(n * n, n * n.saturating_sub(1) / 2);
    let (mut cs, mut ca) = (0, 0);
    for j in 0..n {
        for i in j..n {
            // vec index of entry (i, j) is j * n + i
            d_sy[(j * n + i, cs)] = T::one();
            d_sy[(i * n + j, cs)] = T::one();
            cs += 1;
            if i > j {
                d_ay[(j * n + i, ca)] = T::one();
                d_ay[(i * n + j, ca)] = -T::one();
                ca += 1;
            }
        }
    }
    DuplicationMatrices {
        d_sy,
        d_ay,
        dimension: n,
    }
}

/// Kronecker product `X ⊗ Y`.
pub fn kron<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> CMatrix<T> {
    x.kronecker(y)
}

/// Orthonormal (Frobenius) basis of the `D^2`-dimensional real space of
/// Hermitian matrices: `E_kk`, then for each `k < l` the symmetric and
/// antisymmetric couplings.
pub fn hermitian_basis<T: Real>(dim: usize) -> Vec<CMatrix<T>> {
    let inv_sqrt2 = T::one() / real::<T>(2.0).sqrt();
    let mut basis = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        let mut e = CMatrix::<T>::zeros(dim, dim);
        e[(k, k)] = cre(T::one());
        basis.push(e);
    }
    for k in 0..dim {
        for l in k + 1..dim {
            let mut s = CMatrix::<T>::zeros(dim, dim);
            s[(k, l)] = cre(inv_sqrt2);
            s[(l, k)] = cre(inv_sqrt2);
            basis.push(s);
            let mut a = CMatrix::<T>::zeros(dim, dim);
            a[(k, l)] = cplx(T::zero(), -inv_sqrt2);
            a[(l, k)] = cplx(T::zero(), inv_sqrt2);
            basis.push(a);
        }
    }
    basis
}

/// Coordinates of a Hermitian matrix in [`hermitian_basis`].
pub fn hermitian_coordinates<T: Real>(a: &CMatrix<T>) -> DVector<T> {
    let dim = a.nrows();
    let sqrt2 = real::<T>(2.0).sqrt();
    let mut out = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        out.push(a[(k, k)].re);
    }
    for k in 0..dim {
        for l in k + 1..dim {
            out.push(a[(k, l)].re * sqrt2);
            out.push(-a[(k, l)].im * sqrt2);
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`hermitian_coordinates`].
pub fn hermitian_from_coordinates<T: Real>(coords: &DVector<T>, dim: usize) -> CMatrix<T> {
    let inv_sqrt2 = T::one() / real::<T>(2.0).sqrt();
    let mut a = CMatrix::<T>::zeros(dim, dim);
    for k in 0..dim {
        a[(k, k)] = cre(coords[k]);
    }
    let mut idx = dim;
    for k in 0..dim {
        for l in k + 1..dim {
            let re = coords[idx] * inv_sqrt2;
            let im = -coords[idx + 1] * inv_sqrt2;
            a[(k, l)] = cplx(re, im);
            a[(l, k)] = cplx(re, -im);
            idx += 2;
        }
    }
    a
}

/// Permutation matrix with `P e_k = e_{images[k]}`.
pub fn permutation_matrix<T: Real>(images: &[usize]) -> CMatrix<T> {
    let n = images.len();
    let mut p = CMatrix::<T>::zeros(n, n);
    for (k, &img) in images.iter().enumerate() {
        p[(img, k)] = cre(T::one());
    }
    p
}
