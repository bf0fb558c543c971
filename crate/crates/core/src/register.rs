//! State preparation and readout for the 2-ancilla + 2-system register.
//!
//! Qubits 1 and 2 (the leftmost tensor factors) are the ancilla, qubits 3
//! and 4 the system. A register matrix is therefore `ANCILLA_DIM x SYSTEM_DIM`
//! blocks of `SYSTEM_DIM x SYSTEM_DIM`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, kron, pauli, ComplexMatrix, Ket, HERMITIAN_TOL, PSD_TOL};

pub const ANCILLA_DIM: usize = 4;
pub const SYSTEM_DIM: usize = 4;
pub const REGISTER_DIM: usize = ANCILLA_DIM * SYSTEM_DIM;

const TRACE_TOL: f64 = 1e-10;

/// A Hermitian operator that every channel in this crate transforms linearly.
///
/// Implemented by [`DensityMatrix`] and [`DeviationMatrix`] so that the same
/// channel code handles both the full state and its traceless part.
pub trait OperatorState: Clone {
    fn matrix(&self) -> &ComplexMatrix;

    /// Wraps the image of `self` under a trace-preserving map without
    /// re-validating it.
    fn map_matrix(&self, m: ComplexMatrix) -> Self;

    fn dim(&self) -> usize {
        self.matrix().rows()
    }
}

/// Hermitian, unit-trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_hermitian_square(&matrix)?;
        let tr = matrix.trace();
        if (tr - c64(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let eig = linalg::eig_hermitian(&matrix)?;
        if let Some(&min) = eig.eigenvalues.first() {
            if min < -PSD_TOL {
                return Err(Error::NotPsd {
                    min_eigenvalue: min,
                });
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_ket(ket: &Ket) -> Self {
        Self {
            matrix: ket.normalized().projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Traceless part `rho - I/d`.
    pub fn deviation(&self) -> DeviationMatrix {
        let d = self.dim();
        DeviationMatrix {
            matrix: &self.matrix - &ComplexMatrix::identity(d).scale(1.0 / d as f64),
        }
    }
}

impl OperatorState for DensityMatrix {
    fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    fn map_matrix(&self, m: ComplexMatrix) -> Self {
        Self { matrix: m }
    }
}

/// Hermitian and traceless: the signal-carrying part of an ensemble state.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationMatrix {
    matrix: ComplexMatrix,
}

impl DeviationMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_hermitian_square(&matrix)?;
        let tr = matrix.trace();
        if tr.norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "deviation matrix trace is {tr}, expected 0"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl OperatorState for DeviationMatrix {
    fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    fn map_matrix(&self, m: ComplexMatrix) -> Self {
        Self { matrix: m }
    }
}

fn check_hermitian_square(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "state must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { max_deviation: dev });
    }
    Ok(())
}

/// Computational basis ket for a bitstring, qubit 1 leftmost.
pub fn basis_ket(label: &str) -> Result<Ket> {
    if label.is_empty() {
        return Err(Error::BadLabel(label.to_string()));
    }
    let mut index = 0usize;
    for ch in label.chars() {
        let bit = match ch {
            '0' => 0,
            '1' => 1,
            _ => return Err(Error::BadLabel(label.to_string())),
        };
        index = (index << 1) | bit;
    }
    Ok(Ket::basis(1 << label.len(), index))
}

/// `|+>^{(x) n}`.
pub fn plus_register(n: usize) -> Ket {
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    Ket::new(vec![c64(amp, 0.0); dim])
}

pub fn plus() -> Ket {
    plus_register(1)
}

pub fn minus() -> Ket {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Ket::from_real(&[a, -a])
}

/// Pair-of-pseudopure-states deviation `|++++><++++| - |+++-><+++-|`.
pub fn pops_deviation() -> DeviationMatrix {
    let a = plus_register(4);
    let b = plus_register(3).kron(&minus());
    DeviationMatrix {
        matrix: &a.projector() - &b.projector(),
    }
}

/// Register factor addressed by [`dephase_subsystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Ancilla,
    System,
}

/// Ideal dephasing of one register factor in its computational basis.
///
/// Zeroes every element whose row and column disagree on that factor's
/// index, which is the ensemble effect of a projective computational-basis
/// measurement of the factor with outcomes discarded.
pub fn dephase_subsystem<S: OperatorState>(rho: &S, subsystem: Subsystem) -> Result<S> {
    let m = rho.matrix();
    if m.rows() != REGISTER_DIM || m.cols() != REGISTER_DIM {
        return Err(Error::DimensionMismatch(format!(
            "dephasing needs a {REGISTER_DIM}x{REGISTER_DIM} register matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let out = ComplexMatrix::from_fn(REGISTER_DIM, REGISTER_DIM, |r, c| {
        let keep = match subsystem {
            Subsystem::Ancilla => r / SYSTEM_DIM == c / SYSTEM_DIM,
            Subsystem::System => r % SYSTEM_DIM == c % SYSTEM_DIM,
        };
        if keep {
            m.get(r, c)
        } else {
            c64(0.0, 0.0)
        }
    });
    Ok(rho.map_matrix(out))
}

/// The 15 non-identity two-qubit Pauli labels, in lexicographic order.
pub fn pauli_labels() -> Vec<String> {
    const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];
    let mut labels = Vec::with_capacity(15);
    for a in LETTERS {
        for b in LETTERS {
            if a == 'I' && b == 'I' {
                continue;
            }
            labels.push(format!("{a}{b}"));
        }
    }
    labels.sort();
    labels
}

/// Two-qubit Pauli operator for a label such as `"IX"`.
pub fn pauli_operator(label: &str) -> Result<ComplexMatrix> {
    let letters: Vec<char> = label.chars().collect();
    if letters.len() != 2 {
        return Err(Error::BadLabel(label.to_string()));
    }
    let a = pauli::by_letter(letters[0]).ok_or_else(|| Error::BadLabel(label.to_string()))?;
    let b = pauli::by_letter(letters[1]).ok_or_else(|| Error::BadLabel(label.to_string()))?;
    Ok(kron(&a, &b))
}

/// `Tr(rho P)` for every non-identity two-qubit Pauli `P`.
pub fn pauli_expectations(rho: &ComplexMatrix) -> Result<BTreeMap<String, f64>> {
    if rho.rows() != SYSTEM_DIM || rho.cols() != SYSTEM_DIM {
        return Err(Error::DimensionMismatch(format!(
            "tomography works on {SYSTEM_DIM}x{SYSTEM_DIM} system matrices, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    pauli_labels()
        .into_iter()
        .map(|label| {
            let p = pauli_operator(&label)?;
            // Tr(rho P) = <P, rho>_HS since P is Hermitian.
            Ok((label, p.hs_inner(rho).re))
        })
        .collect()
}

fn pauli_sum(expectations: &BTreeMap<String, f64>) -> Result<ComplexMatrix> {
    for key in expectations.keys() {
        pauli_operator(key)?;
        if key == "II" {
            return Err(Error::BadLabel(key.clone()));
        }
    }
    let mut acc = ComplexMatrix::zeros(SYSTEM_DIM, SYSTEM_DIM);
    for label in pauli_labels() {
        let value = *expectations
            .get(&label)
            .ok_or_else(|| Error::MissingLabel(label.clone()))?;
        acc = &acc + &pauli_operator(&label)?.scale(value);
    }
    Ok(acc)
}

/// Linear-inversion tomography: `rho = (I + sum_P c_P P) / 4`.
pub fn tomo_reconstruct_density(expectations: &BTreeMap<String, f64>) -> Result<DensityMatrix> {
    let sum = pauli_sum(expectations)?;
    DensityMatrix::new((&ComplexMatrix::identity(SYSTEM_DIM) + &sum).scale(0.25))
}

/// Linear-inversion tomography of a traceless part: `rho' = sum_P c_P P / 4`.
pub fn tomo_reconstruct_deviation(expectations: &BTreeMap<String, f64>) -> Result<DeviationMatrix> {
    DeviationMatrix::new(pauli_sum(expectations)?.scale(0.25))
}

/// Random unit ket with i.i.d. complex Gaussian amplitudes.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    let amps = (0..dim)
        .map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Ket::new(amps).normalized()
}

/// Random full-rank density matrix `G G^dagger / Tr(G G^dagger)` with Gaussian `G`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix {
        matrix: w.scale(1.0 / tr).hermitian_part(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, Keep};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_kets() {
        assert_eq!(
            basis_ket("00").unwrap(),
            Ket::from_real(&[1.0, 0.0, 0.0, 0.0])
        );
        assert_eq!(
            basis_ket("11").unwrap(),
            Ket::from_real(&[0.0, 0.0, 0.0, 1.0])
        );
        assert_eq!(basis_ket("0").unwrap(), Ket::from_real(&[1.0, 0.0]));
        assert_eq!(
            basis_ket("01").unwrap(),
            Ket::from_real(&[0.0, 1.0, 0.0, 0.0])
        );
        assert!(matches!(basis_ket("0a"), Err(Error::BadLabel(_))));
        assert!(matches!(basis_ket(""), Err(Error::BadLabel(_))));
    }

    #[test]
    fn plus_registers() {
        assert!(
            plus_register(1).max_abs_diff(&Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])) < 1e-15
        );
        assert!(plus_register(2).max_abs_diff(&Ket::from_real(&[0.5; 4])) < 1e-15);
        assert!(plus_register(4).max_abs_diff(&Ket::from_real(&[0.25; 16])) < 1e-15);
    }

    #[test]
    fn pops_structure() {
        let pops = pops_deviation();
        assert!(pops.matrix().trace().norm() < 1e-14);
        assert!(pops.matrix().is_hermitian(1e-14));
        let eig = linalg::eig_hermitian(pops.matrix()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[15] - 1.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1..15].iter().all(|x| x.abs() < 1e-12));

        // Direct computation from the two projectors: the ancilla factor is
        // |++> in both terms, so tracing it leaves the system parts.
        let sys_plus = plus_register(2);
        let sys_mixed = plus().kron(&minus());
        let expected = &sys_plus.projector() - &sys_mixed.projector();
        let reduced = partial_trace(pops.matrix(), (ANCILLA_DIM, SYSTEM_DIM), Keep::B).unwrap();
        assert!(reduced.max_abs_diff(&expected) < 1e-14);
        // ... which is |+><+| (x) sigma_x.
        assert!(expected.max_abs_diff(&kron(&plus().projector(), &pauli::x())) < 1e-14);
    }

    #[test]
    fn dephasing_leaves_diagonal_ancilla_products_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let anc = ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4]);
        let sys = random_density(4, &mut rng);
        let joint = DensityMatrix::new(kron(&anc, sys.matrix())).unwrap();
        let out = dephase_subsystem(&joint, Subsystem::Ancilla).unwrap();
        assert!(out.matrix().max_abs_diff(joint.matrix()) < 1e-15);
    }

    #[test]
    fn dephasing_decoheres_ancilla_system_bell_pair() {
        // Bell pair between ancilla qubit 1 and system qubit 3, others |0>.
        let mut amps = vec![c64(0.0, 0.0); 16];
        amps[0b0000] = c64(FRAC_1_SQRT_2, 0.0);
        amps[0b1010] = c64(FRAC_1_SQRT_2, 0.0);
        let bell = DensityMatrix::from_ket(&Ket::new(amps));
        let out = dephase_subsystem(&bell, Subsystem::Ancilla).unwrap();
        assert_eq!(out.matrix().get(0b0000, 0b1010), c64(0.0, 0.0));
        assert!((out.matrix().get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((out.matrix().get(0b1010, 0b1010).re - 0.5).abs() < 1e-15);
        let purity = (out.matrix() * out.matrix()).trace().re;
        assert!((purity - 0.5).abs() < 1e-14);
    }

    #[test]
    fn dephasing_matches_projector_channel_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rho = random_density(16, &mut rng);
            let fast = dephase_subsystem(&rho, Subsystem::Ancilla).unwrap();
            let mut slow = ComplexMatrix::zeros(16, 16);
            for k in 0..4 {
                let p = kron(&Ket::basis(4, k).projector(), &ComplexMatrix::identity(4));
                slow = &slow + &(&(&p * rho.matrix()) * &p);
            }
            assert!(fast.matrix().max_abs_diff(&slow) < 1e-12);
            let twice = dephase_subsystem(&fast, Subsystem::Ancilla).unwrap();
            assert!(twice.matrix().max_abs_diff(fast.matrix()) < 1e-15);
            assert!((fast.matrix().trace() - rho.matrix().trace()).norm() < 1e-12);

            let sys = dephase_subsystem(&rho, Subsystem::System).unwrap();
            let mut slow = ComplexMatrix::zeros(16, 16);
            for k in 0..4 {
                let p = kron(&ComplexMatrix::identity(4), &Ket::basis(4, k).projector());
                slow = &slow + &(&(&p * rho.matrix()) * &p);
            }
            assert!(sys.matrix().max_abs_diff(&slow) < 1e-12);
        }
    }

    #[test]
    fn dephasing_rejects_wrong_dimension() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            dephase_subsystem(&rho, Subsystem::Ancilla),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn tomography_examples() {
        let zeros: BTreeMap<String, f64> = pauli_labels().into_iter().map(|l| (l, 0.0)).collect();
        let mixed = tomo_reconstruct_density(&zeros).unwrap();
        assert!(
            mixed
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale(0.25))
                < 1e-15
        );

        let mut ix = zeros.clone();
        ix.insert("IX".into(), 1.0);
        let rho = tomo_reconstruct_density(&ix).unwrap();
        let expected =
            (&ComplexMatrix::identity(4) + &kron(&pauli::identity(), &pauli::x())).scale(0.25);
        assert!(rho.matrix().max_abs_diff(&expected) < 1e-15);

        let mut missing = zeros.clone();
        missing.remove("ZY");
        assert_eq!(
            tomo_reconstruct_density(&missing),
            Err(Error::MissingLabel("ZY".into()))
        );

        let mut bogus = zeros;
        bogus.insert("QX".into(), 0.0);
        assert!(matches!(
            tomo_reconstruct_density(&bogus),
            Err(Error::BadLabel(_))
        ));
    }

    #[test]
    fn tomography_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let rho = random_density(4, &mut rng);
            let exps = pauli_expectations(rho.matrix()).unwrap();
            let back = tomo_reconstruct_density(&exps).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-12);

            let dev = rho.deviation();
            let exps = pauli_expectations(dev.matrix()).unwrap();
            let back = tomo_reconstruct_deviation(&exps).unwrap();
            assert!(back.matrix().max_abs_diff(dev.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn state_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.5, -0.5])),
            Err(Error::NotPsd { .. })
        ));
        assert!(DeviationMatrix::new(ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).is_err());
        assert!(DeviationMatrix::new(pauli::z()).is_ok());
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            &[c64(0.5, 0.0), c64(0.0, 1.0), c64(0.0, 1.0), c64(0.5, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }
}
