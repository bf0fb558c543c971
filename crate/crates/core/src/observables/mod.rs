//! The degenerate system observable, its nondegenerate refinements, the
//! ancilla coupling observable and the polynomial map relating them.

mod pointer;

pub use pointer::{
    build_ua, pointer_state, pointer_states, solve_pointer_config, PointerConfig, SearchSpace,
};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, ComplexMatrix, Ket};
use crate::register::SYSTEM_DIM;

/// Tolerance for orthonormality of eigenbasis kets and projector identities.
pub const BASIS_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are grouped into the same block.
pub const EIGENVALUE_TOL: f64 = 1e-9;

/// Eigenvalues of the degenerate observable, indexed like the basis kets.
pub const DEGENERATE_EIGENVALUES: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

/// Eigenbasis `chi_0..chi_3` of the degenerate observable.
///
/// `chi_0, chi_1` live in `span{|00>, |01>}` and `chi_2, chi_3` in
/// `span{|10>, |11>}`; each is `alpha_j |phi_a> + beta_j |phi_b>` for the
/// first and second basis ket of its block.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    chi: [Ket; 4],
}

impl EigenBasis {
    pub fn computational() -> Self {
        Self {
            chi: std::array::from_fn(|j| Ket::basis(SYSTEM_DIM, j)),
        }
    }

    /// Builds the basis from block coefficients.
    pub fn from_coefficients(alpha: [linalg::C64; 4], beta: [linalg::C64; 4]) -> Result<Self> {
        let zero = c64(0.0, 0.0);
        let chi = std::array::from_fn(|j| {
            if j < 2 {
                Ket::new(vec![alpha[j], beta[j], zero, zero])
            } else {
                Ket::new(vec![zero, zero, alpha[j], beta[j]])
            }
        });
        Self::from_kets(chi)
    }

    /// Real-rotation-plus-phase parametrisation of the two blocks:
    /// `chi_0 = cos(t) |a> + e^{i p} sin(t) |b>`, `chi_1 = -e^{-i p} sin(t) |a> + cos(t) |b>`.
    pub fn from_angles(theta_plus: f64, phi_plus: f64, theta_minus: f64, phi_minus: f64) -> Self {
        let block = |theta: f64, phi: f64| {
            let (s, c) = theta.sin_cos();
            let e = linalg::Complex::from_polar(1.0, phi);
            ([c64(c, 0.0), -e.conj() * s], [e * s, c64(c, 0.0)])
        };
        let (ap, bp) = block(theta_plus, phi_plus);
        let (am, bm) = block(theta_minus, phi_minus);
        Self::from_coefficients([ap[0], ap[1], am[0], am[1]], [bp[0], bp[1], bm[0], bm[1]])
            .expect("rotation blocks are orthonormal")
    }

    /// Validates block structure and orthonormality.
    pub fn from_kets(chi: [Ket; 4]) -> Result<Self> {
        for (j, ket) in chi.iter().enumerate() {
            if ket.dim() != SYSTEM_DIM {
                return Err(Error::InvalidBasis(format!(
                    "chi_{j} has dimension {}",
                    ket.dim()
                )));
            }
            let outside = if j < 2 { [2, 3] } else { [0, 1] };
            for i in outside {
                if ket.amplitude(i).norm() > BASIS_TOL {
                    return Err(Error::InvalidBasis(format!(
                        "chi_{j} leaks outside its degenerate block (component {i})"
                    )));
                }
            }
        }
        let dev = linalg::gram_deviation(&chi);
        if dev > BASIS_TOL {
            return Err(Error::InvalidBasis(format!(
                "basis is not orthonormal (Gram deviation {dev:e})"
            )));
        }
        Ok(Self { chi })
    }

    pub fn kets(&self) -> &[Ket; 4] {
        &self.chi
    }

    /// Coefficient of the first ket of the block.
    pub fn alpha(&self, j: usize) -> linalg::C64 {
        self.chi[j].amplitude(if j < 2 { 0 } else { 2 })
    }

    /// Coefficient of the second ket of the block.
    pub fn beta(&self, j: usize) -> linalg::C64 {
        self.chi[j].amplitude(if j < 2 { 1 } else { 3 })
    }
}

/// Indices of eigenvectors that share one eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBlock {
    pub value: f64,
    pub members: Vec<usize>,
}

/// Hermitian operator stored with an orthonormal eigenbasis.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Ket>,
    blocks: Vec<EigenBlock>,
}

impl Observable {
    /// `sum_j values[j] |v_j><v_j|`; the vectors must be a complete orthonormal set.
    pub fn from_eigenbasis(values: Vec<f64>, vectors: Vec<Ket>) -> Result<Self> {
        if values.len() != vectors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues for {} eigenvectors",
                values.len(),
                vectors.len()
            )));
        }
        let dim = vectors.first().map_or(0, Ket::dim);
        if dim != vectors.len() || vectors.iter().any(|v| v.dim() != dim) {
            return Err(Error::InvalidBasis(format!(
                "{} eigenvectors do not form a complete basis of dimension {dim}",
                vectors.len()
            )));
        }
        let dev = linalg::gram_deviation(&vectors);
        if dev > BASIS_TOL {
            return Err(Error::InvalidBasis(format!(
                "eigenvectors are not orthonormal (Gram deviation {dev:e})"
            )));
        }

        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for (&value, v) in values.iter().zip(&vectors) {
            matrix = &matrix + &v.projector().scale(value);
        }

        let mut blocks: Vec<EigenBlock> = Vec::new();
        for (j, &value) in values.iter().enumerate() {
            match blocks
                .iter_mut()
                .find(|b| (b.value - value).abs() < EIGENVALUE_TOL)
            {
                Some(block) => block.members.push(j),
                None => blocks.push(EigenBlock {
                    value,
                    members: vec![j],
                }),
            }
        }

        Ok(Self {
            matrix,
            eigenvalues: values,
            eigenvectors: vectors,
            blocks,
        })
    }

    /// Diagonalises a Hermitian matrix.
    pub fn from_hermitian(h: &ComplexMatrix) -> Result<Self> {
        let eig = linalg::eig_hermitian(h)?;
        let mut obs = Self::from_eigenbasis(eig.eigenvalues, eig.eigenvectors)?;
        obs.matrix = h.hermitian_part();
        Ok(obs)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Ket] {
        &self.eigenvectors
    }

    /// Rank-1 projectors `|v_j><v_j|`.
    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        self.eigenvectors.iter().map(Ket::projector).collect()
    }

    /// Eigenvalue blocks in order of first appearance.
    pub fn blocks(&self) -> &[EigenBlock] {
        &self.blocks
    }

    /// Spectral projector of one block.
    pub fn block_projector(&self, block: usize) -> ComplexMatrix {
        let dim = self.dim();
        self.blocks[block]
            .members
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, &j| {
                &acc + &self.eigenvectors[j].projector()
            })
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.blocks.len() == self.eigenvalues.len()
    }

    /// Max-abs entry of `[self, other]`.
    pub fn commutator_norm(&self, other: &Observable) -> f64 {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        ab.max_abs_diff(&ba)
    }
}

/// Degenerate observable `(Pi_0 + Pi_1) - (Pi_2 + Pi_3)`.
pub fn build_a(basis: &EigenBasis) -> Observable {
    Observable::from_eigenbasis(DEGENERATE_EIGENVALUES.to_vec(), basis.kets().to_vec())
        .expect("EigenBasis is validated on construction")
}

fn check_distinct(values: &[f64]) -> Result<()> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if (values[i] - values[j]).abs() < EIGENVALUE_TOL {
                return Err(Error::DegenerateSpectrum(values.to_vec()));
            }
        }
    }
    Ok(())
}

/// Nondegenerate refinement `sum_j a'_j |phi_j><phi_j|` in the computational basis.
pub fn build_a_prime(a_prime: [f64; 4]) -> Result<Observable> {
    build_refined(a_prime, &EigenBasis::computational())
}

/// Nondegenerate refinement `sum_j a'_j |chi_j><chi_j|` in an arbitrary block basis.
pub fn build_refined(a_prime: [f64; 4], basis: &EigenBasis) -> Result<Observable> {
    check_distinct(&a_prime)?;
    Observable::from_eigenbasis(a_prime.to_vec(), basis.kets().to_vec())
}

/// Ancilla observable `q1 sigma_z (x) 1 + q2 1 (x) sigma_z`.
pub fn build_q(q1: f64, q2: f64) -> Observable {
    let values = vec![q1 + q2, q1 - q2, -q1 + q2, -q1 - q2];
    let vectors = (0..4).map(|j| Ket::basis(4, j)).collect();
    Observable::from_eigenbasis(values, vectors).expect("computational basis is orthonormal")
}

/// Cubic polynomial `f(x) = c0 + c1 x + c2 x^2 + c3 x^3` relabelling refined
/// outcomes onto degenerate ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefiningMap {
    pub coefficients: [f64; 4],
}

impl RefiningMap {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }

    /// `f(m)` by Horner's rule on matrices.
    pub fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let n = m.rows();
        let id = ComplexMatrix::identity(n);
        self.coefficients
            .iter()
            .rev()
            .fold(ComplexMatrix::zeros(n, n), |acc, &c| {
                &(&acc * m) + &id.scale(c)
            })
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Lagrange interpolant through `(nodes[j], values[j])`, in monomial form.
pub fn fit_refining_map(nodes: [f64; 4], values: [f64; 4]) -> Result<RefiningMap> {
    check_distinct(&nodes)?;
    let mut coefficients = [0.0; 4];
    for i in 0..4 {
        let mut basis = vec![1.0];
        let mut denom = 1.0;
        for j in (0..4).filter(|&j| j != i) {
            basis = poly_mul(&basis, &[-nodes[j], 1.0]);
            denom *= nodes[i] - nodes[j];
        }
        for (k, b) in basis.iter().enumerate() {
            coefficients[k] += values[i] * b / denom;
        }
    }
    Ok(RefiningMap { coefficients })
}

/// True iff `f(A')` reproduces `A` within 1e-9.
pub fn verify_refinement(map: &RefiningMap, a_prime: &Observable, a: &Observable) -> bool {
    map.apply(a_prime.matrix()).max_abs_diff(a.matrix()) <= 1e-9
}
