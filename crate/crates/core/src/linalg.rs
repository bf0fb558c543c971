//! Dense complex linear algebra for small registers.
//!
//! Everything here works on row-major logical indices with qubit 1 as the
//! leftmost tensor factor, so `kron(a, b)` puts `a` on the high-order bits of
//! the basis index.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

/// Double precision complex scalar.
pub type C64 = Complex<f64>;

/// Hermiticity tolerance on `max |h - h^dagger|`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below `-PSD_TOL` are a hard error; those in `[-PSD_TOL, 0)` are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const CLUSTER_GAP: f64 = 1e-8;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from entries in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                c64(diag[i], 0.0)
            } else {
                C64::default()
            }
        })
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.0[(row, col)] = value;
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows().min(self.cols()))
            .map(|i| self.0[(i, i)])
            .collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.0.shape() != other.0.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |h - h^dagger|`, or infinity for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(h + h^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// `Tr(self^dagger other)`, the Hilbert-Schmidt inner product.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Conjugation `u self u^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    /// Applies the matrix to a ket.
    pub fn apply(&self, ket: &Ket) -> Ket {
        Ket(&self.0 * &ket.0)
    }

    /// Column `j` as a ket.
    pub fn column(&self, j: usize) -> Ket {
        Ket(self.0.column(j).into_owned())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Column state vector.
#[derive(Clone, PartialEq)]
pub struct Ket(DVector<C64>);

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self(DVector::from_vec(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(amplitudes.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// Computational basis vector `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = c64(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Returns the ket scaled to unit norm; a zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            Self(self.0.map(|z| z / n))
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.0.dotc(&other.0)
    }

    /// `|self><other|`.
    pub fn outer(&self, other: &Ket) -> ComplexMatrix {
        ComplexMatrix(&self.0 * other.0.adjoint())
    }

    /// `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        self.outer(self)
    }

    pub fn to_column(&self) -> ComplexMatrix {
        ComplexMatrix(DMatrix::from_column_slice(self.dim(), 1, self.0.as_slice()))
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        Ket(self.0.kronecker(&other.0))
    }

    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub(crate) fn as_nalgebra(&self) -> &DVector<C64> {
        &self.0
    }
}

impl<'a> Add<&'a Ket> for &'a Ket {
    type Output = Ket;
    fn add(self, rhs: &Ket) -> Ket {
        Ket(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Ket> for &'a Ket {
    type Output = Ket;
    fn sub(self, rhs: &Ket) -> Ket {
        Ket(&self.0 - &rhs.0)
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ket[")?;
        for z in self.0.iter() {
            write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
        }
        write!(f, " ]")
    }
}

/// Largest deviation of the Gram matrix of `kets` from the identity.
pub fn gram_deviation(kets: &[Ket]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in kets.iter().enumerate() {
        for (j, b) in kets.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - c64(target, 0.0)).norm());
        }
    }
    worst
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal, `eigenvectors[i]` pairs with `eigenvalues[i]`.
    pub eigenvectors: Vec<Ket>,
}

impl HermitianEigen {
    /// `sum_i g(lambda_i) |v_i><v_i|`.
    pub fn reconstruct_with(&self, mut g: impl FnMut(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvectors.first().map_or(0, Ket::dim);
        let mut v = DMatrix::<C64>::zeros(n, n);
        for (j, ket) in self.eigenvectors.iter().enumerate() {
            v.set_column(j, ket.as_nalgebra());
        }
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = g(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| c64(x, 0.0))
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { max_deviation: dev });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Within a cluster of eigenvalues closer than [`CLUSTER_GAP`] the vectors are
/// re-orthonormalised by modified Gram-Schmidt in index order. Which basis of a
/// degenerate eigenspace comes back is otherwise unspecified.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let sym = h.hermitian_part();
    let decomposition = sym.0.symmetric_eigen();

    let mut order: Vec<usize> = (0..decomposition.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        decomposition.eigenvalues[a]
            .total_cmp(&decomposition.eigenvalues[b])
            .then(a.cmp(&b))
    });

    let eigenvalues: Vec<f64> = order
        .iter()
        .map(|&i| decomposition.eigenvalues[i])
        .collect();
    let mut eigenvectors: Vec<Ket> = order
        .iter()
        .map(|&i| Ket(decomposition.eigenvectors.column(i).into_owned()))
        .collect();

    let mut start = 0;
    while start < eigenvalues.len() {
        let mut end = start + 1;
        while end < eigenvalues.len() && eigenvalues[end] - eigenvalues[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            gram_schmidt(&mut eigenvectors[start..end]);
        }
        start = end;
    }

    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

fn gram_schmidt(vectors: &mut [Ket]) {
    for i in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(i);
        let v = &mut rest[0];
        for u in done.iter() {
            let overlap = u.inner(v);
            v.0 -= &u.0 * overlap;
        }
        let n = v.norm();
        v.0 /= c64(n, 0.0);
    }
}

/// `exp(-i h t)` for Hermitian `h`.
pub fn matexp_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h)?;
    Ok(eig.reconstruct_with(|lambda| Complex::from_polar(1.0, -lambda * t)))
}

/// Principal square root of a positive semidefinite matrix.
pub fn matsqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    Ok(eig.reconstruct_with(|lambda| c64(lambda.max(0.0).sqrt(), 0.0)))
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of `rho` on `C^dA (x) C^dB`, keeping the named factor.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    keep: Keep,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = da * db;
    if rho.rows() != n || rho.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {da}x{db} needs a {n}x{n} matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let out = match keep {
        Keep::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho.get(i * db + k, j * db + k)).sum()
        }),
        Keep::B => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| rho.get(k * db + i, k * db + j)).sum()
        }),
    };
    Ok(out)
}

/// Pauli matrices and friends.
pub mod pauli {
    use super::{c64, ComplexMatrix};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| c64(if i != j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64(0.0, -1.0),
            (1, 0) => c64(0.0, 1.0),
            _ => c64(0.0, 0.0),
        })
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    /// Single-qubit Pauli by letter (`I`, `X`, `Y`, `Z`).
    pub fn by_letter(letter: char) -> Option<ComplexMatrix> {
        match letter {
            'I' => Some(identity()),
            'X' => Some(x()),
            'Y' => Some(y()),
            'Z' => Some(z()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn hermitian_from(vals: &[f64], n: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |i, j| {
            c64(vals[2 * (i * n + j)], vals[2 * (i * n + j) + 1])
        });
        g.hermitian_part()
    }

    #[test]
    fn kron_examples() {
        let zi = kron(&pauli::z(), &pauli::identity());
        assert_eq!(
            zi,
            ComplexMatrix::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0])
        );
        assert_eq!(
            kron(&pauli::identity(), &pauli::identity()),
            ComplexMatrix::identity(4)
        );

        let plus = Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).to_column();
        let pp = kron(&plus, &plus);
        assert_eq!((pp.rows(), pp.cols()), (4, 1));
        for i in 0..4 {
            assert!((pp.get(i, 0) - c64(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn eig_pauli_x() {
        let e = eig_hermitian(&pauli::x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!(e.reconstruct().max_abs_diff(&pauli::x()) < 1e-12);
    }

    #[test]
    fn eig_refined_observable_spectrum() {
        let a = ComplexMatrix::from_real_diagonal(&[-3.0, 1.0, 3.0, -1.0]);
        let e = eig_hermitian(&a).unwrap();
        let expected = [-3.0, -1.0, 1.0, 3.0];
        for (got, want) in e.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_identity_is_degenerate_but_orthonormal() {
        let e = eig_hermitian(&ComplexMatrix::identity(4)).unwrap();
        assert!(e.eigenvalues.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(gram_deviation(&e.eigenvectors) < 1e-12);
        assert!(e.reconstruct().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            eig_hermitian(&rect),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn matexp_examples() {
        let u = matexp_hermitian(&pauli::x(), 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);

        let u = matexp_hermitian(&pauli::z(), PI / 2.0).unwrap();
        let expected = ComplexMatrix::from_row_major(
            2,
            2,
            &[c64(0.0, -1.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0)],
        )
        .unwrap();
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn matsqrt_examples() {
        let quarter = ComplexMatrix::identity(4).scale(0.25);
        assert!(
            matsqrt_psd(&quarter)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::identity(4).scale(0.5))
                < 1e-14
        );

        let d = ComplexMatrix::from_real_diagonal(&[4.0, 1.0]);
        assert!(
            matsqrt_psd(&d)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 1.0]))
                < 1e-14
        );

        let p = Ket::from_real(&[0.6, 0.8]).projector();
        assert!(matsqrt_psd(&p).unwrap().max_abs_diff(&p) < 1e-7);

        let neg = ComplexMatrix::from_real_diagonal(&[1.0, -0.5]);
        assert!(matches!(matsqrt_psd(&neg), Err(Error::NotPsd { .. })));

        let tiny_neg = ComplexMatrix::from_real_diagonal(&[1.0, -1e-12]);
        let s = matsqrt_psd(&tiny_neg).unwrap();
        assert_eq!(s.get(1, 1), c64(0.0, 0.0));
    }

    #[test]
    fn partial_trace_examples() {
        let sys = ComplexMatrix::from_row_major(
            2,
            2,
            &[c64(0.7, 0.0), c64(0.1, 0.2), c64(0.1, -0.2), c64(0.3, 0.0)],
        )
        .unwrap();
        let anc = ComplexMatrix::from_real_diagonal(&[0.25, 0.75]);
        let joint = kron(&anc, &sys);
        assert!(
            partial_trace(&joint, (2, 2), Keep::B)
                .unwrap()
                .max_abs_diff(&sys)
                < 1e-15
        );
        assert!(
            partial_trace(&joint, (2, 2), Keep::A)
                .unwrap()
                .max_abs_diff(&anc)
                < 1e-15
        );

        let bell = Ket::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).projector();
        let reduced = partial_trace(&bell, (2, 2), Keep::A).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);

        assert!(matches!(
            partial_trace(&ComplexMatrix::identity(3), (2, 2), Keep::A),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn random_hermitian_reconstruction() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = [1usize, 2, 4, 8, 16][trial % 5];
            let vals: Vec<f64> = (0..2 * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = hermitian_from(&vals, n);
            let e = eig_hermitian(&h).unwrap();
            assert!(e.reconstruct().max_abs_diff(&h) <= 1e-9);
            assert!(gram_deviation(&e.eigenvectors) <= 1e-9);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn hermitian_strategy() -> impl Strategy<Value = ComplexMatrix> {
            prop::sample::select(vec![2usize, 4, 8]).prop_flat_map(|n| {
                prop::collection::vec(-2.0f64..2.0, 2 * n * n)
                    .prop_map(move |v| hermitian_from(&v, n))
            })
        }

        proptest! {
            #[test]
            fn matexp_inverse_is_negated_time(h in hermitian_strategy(), t in -3.0f64..3.0) {
                let u = matexp_hermitian(&h, t).unwrap();
                let v = matexp_hermitian(&h, -t).unwrap();
                let n = h.rows();
                prop_assert!((&u * &v).max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-9);
                prop_assert!((&u * &u.adjoint()).max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-9);
            }

            #[test]
            fn partial_trace_preserves_trace(h in hermitian_strategy()) {
                let n = h.rows();
                let total = h.trace();
                for &(da, db) in &[(2usize, n / 2), (n / 2, 2)] {
                    for keep in [Keep::A, Keep::B] {
                        let r = partial_trace(&h, (da, db), keep).unwrap();
                        prop_assert!((r.trace() - total).norm() <= 1e-12);
                    }
                }
            }

            #[test]
            fn kron_is_associative(a in hermitian_strategy(), b in hermitian_strategy()) {
                let c = pauli::y();
                let left = kron(&kron(&a, &b), &c);
                let right = kron(&a, &kron(&b, &c));
                prop_assert_eq!((left.rows(), left.cols()), (right.rows(), right.cols()));
                prop_assert!(left.max_abs_diff(&right) <= 1e-12);
            }
        }
    }
}
