//! Measuring devices as projective state-update channels, and their
//! ancilla-coupled circuit realisation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, ComplexMatrix, Keep, Ket};
use crate::observables::{build_q, Observable, PointerConfig, EIGENVALUE_TOL};
use crate::register::{
    dephase_subsystem, DensityMatrix, DeviationMatrix, OperatorState, Subsystem, ANCILLA_DIM,
    SYSTEM_DIM,
};

const PARTITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Lueders,
    VonNeumann,
    Intermediate,
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceKind::Lueders => "lueders",
            DeviceKind::VonNeumann => "vonneumann",
            DeviceKind::Intermediate => "intermediate",
        })
    }
}

/// A projective measurement of a degenerate observable.
///
/// Each partition element carries the eigenvalue of the measured observable
/// it reports. Lueders devices use the observable's own eigenspaces, von
/// Neumann devices the rank-1 eigenprojectors of a commuting refinement, and
/// intermediate devices anything strictly in between.
#[derive(Debug, Clone)]
pub struct MeasurementDevice {
    kind: DeviceKind,
    partition: Vec<ComplexMatrix>,
    outcomes: Vec<f64>,
    /// Eigenvalue of the observable the ancilla couples to, per element.
    coupling_values: Option<Vec<f64>>,
    refining_basis: Option<Vec<Ket>>,
}

impl MeasurementDevice {
    /// Projects onto the eigenspaces of `a`.
    pub fn lueders(a: &Observable) -> Self {
        let partition: Vec<ComplexMatrix> = (0..a.blocks().len())
            .map(|b| a.block_projector(b))
            .collect();
        let outcomes: Vec<f64> = a.blocks().iter().map(|b| b.value).collect();
        Self {
            kind: DeviceKind::Lueders,
            partition,
            coupling_values: Some(outcomes.clone()),
            outcomes,
            refining_basis: None,
        }
    }

    /// Projects onto the eigenbasis of a nondegenerate refinement of `a`.
    pub fn von_neumann(a: &Observable, refined: &Observable) -> Result<Self> {
        if !refined.is_nondegenerate() {
            return Err(Error::DegenerateSpectrum(refined.eigenvalues().to_vec()));
        }
        if a.dim() != refined.dim() {
            return Err(Error::DimensionMismatch(
                "refinement acts on a different space".into(),
            ));
        }
        let comm = a.commutator_norm(refined);
        if comm > PARTITION_TOL {
            return Err(Error::InvalidPartition(format!(
                "refining observable does not commute with the measured one ([A, A'] = {comm:e})"
            )));
        }
        let partition = refined.projectors();
        let outcomes = partition
            .iter()
            .map(|p| block_value(a, p))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            kind: DeviceKind::VonNeumann,
            partition,
            outcomes,
            coupling_values: Some(refined.eigenvalues().to_vec()),
            refining_basis: Some(refined.eigenvectors().to_vec()),
        })
    }

    /// A partition that refines the eigenspaces of `a` without reaching rank 1 everywhere.
    pub fn intermediate(a: &Observable, partition: Vec<ComplexMatrix>) -> Result<Self> {
        validate_partition(&partition, a.dim())?;
        let outcomes = partition
            .iter()
            .map(|p| block_value(a, p))
            .collect::<Result<Vec<f64>>>()?;
        let n = partition.len();
        if n <= a.blocks().len() || n >= a.dim() {
            return Err(Error::InvalidPartition(format!(
                "{n} elements is not strictly between the {} eigenspaces and a rank-1 refinement",
                a.blocks().len()
            )));
        }
        Ok(Self {
            kind: DeviceKind::Intermediate,
            partition,
            outcomes,
            coupling_values: None,
            refining_basis: None,
        })
    }

    pub fn kind(&self) -> DeviceKind {
        self.kind
    }

    pub fn partition(&self) -> &[ComplexMatrix] {
        &self.partition
    }

    /// Reported eigenvalue per partition element.
    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn refining_basis(&self) -> Option<&[Ket]> {
        self.refining_basis.as_deref()
    }

    /// System operator the ancilla couples to in the circuit realisation.
    ///
    /// Every eigenvalue must be one of the pointer configuration's `a'`
    /// values, so that `U_a^dagger` maps each pointer state to a computational
    /// ancilla state. Intermediate devices take the `a'` values in order.
    pub fn coupling_operator(&self, config: &PointerConfig) -> Result<ComplexMatrix> {
        let values: Vec<f64> = match &self.coupling_values {
            Some(values) => {
                for &v in values {
                    if config.index_of(v).is_none() {
                        return Err(Error::PointerMismatch(format!(
                            "coupling eigenvalue {v} is not among the pointer a' values {:?}",
                            config.a_prime()
                        )));
                    }
                }
                values.clone()
            }
            None => config.a_prime()[..self.partition.len()].to_vec(),
        };
        let dim = self.partition[0].rows();
        Ok(self
            .partition
            .iter()
            .zip(values)
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (p, v)| {
                &acc + &p.scale(v)
            }))
    }

    pub fn joint_unitary(&self, config: &PointerConfig) -> Result<ComplexMatrix> {
        interaction_unitary(config, &self.coupling_operator(config)?)
    }
}

fn validate_partition(partition: &[ComplexMatrix], dim: usize) -> Result<()> {
    if partition.is_empty() {
        return Err(Error::InvalidPartition("empty partition".into()));
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (k, p) in partition.iter().enumerate() {
        if p.rows() != dim || p.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "projector {k} is not {dim}x{dim}"
            )));
        }
        if !p.is_hermitian(PARTITION_TOL) || (p * p).max_abs_diff(p) > PARTITION_TOL {
            return Err(Error::InvalidPartition(format!(
                "element {k} is not an orthogonal projector"
            )));
        }
        if p.trace().re < 0.5 {
            return Err(Error::InvalidPartition(format!(
                "element {k} is the zero projector"
            )));
        }
        for (l, q) in partition.iter().enumerate().skip(k + 1) {
            if (p * q).max_abs() > PARTITION_TOL {
                return Err(Error::InvalidPartition(format!(
                    "elements {k} and {l} overlap"
                )));
            }
        }
        sum = &sum + p;
    }
    if sum.max_abs_diff(&ComplexMatrix::identity(dim)) > PARTITION_TOL {
        return Err(Error::InvalidPartition(
            "projectors do not sum to the identity".into(),
        ));
    }
    Ok(())
}

/// Eigenvalue of the block of `a` that contains the range of `p`.
fn block_value(a: &Observable, p: &ComplexMatrix) -> Result<f64> {
    for (b, block) in a.blocks().iter().enumerate() {
        let bp = a.block_projector(b);
        if (&bp * p).max_abs_diff(p) <= PARTITION_TOL {
            return Ok(block.value);
        }
    }
    Err(Error::InvalidPartition(
        "a projector straddles two eigenspaces of the measured observable".into(),
    ))
}

fn check_system_dim(m: &ComplexMatrix) -> Result<()> {
    if m.rows() != SYSTEM_DIM || m.cols() != SYSTEM_DIM {
        return Err(Error::DimensionMismatch(format!(
            "device acts on {SYSTEM_DIM}x{SYSTEM_DIM} system states, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// `rho -> sum_k P_k rho P_k` over the device partition.
pub fn apply_device<S: OperatorState>(device: &MeasurementDevice, rho: &S) -> Result<S> {
    let m = rho.matrix();
    check_system_dim(m)?;
    let out = device
        .partition
        .iter()
        .fold(ComplexMatrix::zeros(SYSTEM_DIM, SYSTEM_DIM), |acc, p| {
            &acc + &(&(p * m) * p)
        });
    Ok(rho.map_matrix(out))
}

/// Probability of each reported eigenvalue, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub entries: Vec<(f64, f64)>,
}

impl OutcomeDistribution {
    pub fn probability(&self, outcome: f64) -> f64 {
        self.entries
            .iter()
            .find(|(v, _)| (v - outcome).abs() < EIGENVALUE_TOL)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }
}

/// `p_a = sum_{k : label(k) = a} Tr(P_k rho P_k)`.
pub fn outcome_probabilities(
    device: &MeasurementDevice,
    rho: &DensityMatrix,
) -> Result<OutcomeDistribution> {
    let m = rho.matrix();
    check_system_dim(m)?;
    let mut entries: Vec<(f64, f64)> = Vec::new();
    for (p, &label) in device.partition.iter().zip(&device.outcomes) {
        let prob = (&(p * m) * p).trace().re;
        match entries
            .iter_mut()
            .find(|(v, _)| (*v - label).abs() < EIGENVALUE_TOL)
        {
            Some(entry) => entry.1 += prob,
            None => entries.push((label, prob)),
        }
    }
    Ok(OutcomeDistribution { entries })
}

/// `exp(-i g (Q (x) system_op) tau)` with `Q` from the pointer configuration.
pub fn interaction_unitary(
    config: &PointerConfig,
    system_op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    coupling_unitary(
        config.g(),
        config.tau(),
        config.q1(),
        config.q2(),
        system_op,
    )
}

/// `exp(-i g (Q (x) system_op) tau)` for explicit coupling parameters.
pub fn coupling_unitary(
    g: f64,
    tau: f64,
    q1: f64,
    q2: f64,
    system_op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let h = kron(build_q(q1, q2).matrix(), system_op).scale(g);
    linalg::matexp_hermitian(&h, tau)
}

/// Joint evolution coupling the ancilla to `A` (Lueders) or to `A'` (von Neumann).
pub fn build_joint_unitary(
    kind: DeviceKind,
    config: &PointerConfig,
    a: &Observable,
    a_prime: &Observable,
) -> Result<ComplexMatrix> {
    match kind {
        DeviceKind::Lueders => interaction_unitary(config, a.matrix()),
        DeviceKind::VonNeumann => interaction_unitary(config, a_prime.matrix()),
        DeviceKind::Intermediate => Err(Error::InvalidParameter(
            "intermediate devices need a partition; use MeasurementDevice::joint_unitary".into(),
        )),
    }
}

/// Full 4-qubit register state fed to the circuit.
#[derive(Debug, Clone)]
pub enum RegisterInput {
    Pure(Ket),
    Density(DensityMatrix),
    Deviation(DeviationMatrix),
}

impl From<Ket> for RegisterInput {
    fn from(k: Ket) -> Self {
        RegisterInput::Pure(k)
    }
}

impl From<DensityMatrix> for RegisterInput {
    fn from(d: DensityMatrix) -> Self {
        RegisterInput::Density(d)
    }
}

impl From<DeviationMatrix> for RegisterInput {
    fn from(d: DeviationMatrix) -> Self {
        RegisterInput::Deviation(d)
    }
}

/// A system-side output of the circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemState {
    Density(DensityMatrix),
    Deviation(DeviationMatrix),
}

impl SystemState {
    pub fn matrix(&self) -> &ComplexMatrix {
        match self {
            SystemState::Density(d) => d.matrix(),
            SystemState::Deviation(d) => d.matrix(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CircuitResult {
    pub system_state: SystemState,
    /// Probabilities of ancilla readouts `|00>, |01>, |10>, |11>`; absent for deviation input.
    pub ancilla_distribution: Option<[f64; 4]>,
    /// Register state after the ancilla has been dephased.
    pub joint_post_state: ComplexMatrix,
}

/// Coupling, `U_a^dagger` rotation, ancilla dephasing and ancilla trace-out.
pub fn run_circuit(
    device: &MeasurementDevice,
    config: &PointerConfig,
    input: &RegisterInput,
) -> Result<CircuitResult> {
    let u = device.joint_unitary(config)?;
    let readout = kron(&config.ua().adjoint(), &ComplexMatrix::identity(SYSTEM_DIM));
    let step = &readout * &u;

    match input {
        RegisterInput::Pure(ket) => {
            check_register_ket(ket)?;
            let rho = DensityMatrix::from_ket(ket);
            let (joint, system) = propagate(&step, &rho)?;
            Ok(CircuitResult {
                ancilla_distribution: Some(ancilla_distribution(joint.matrix())),
                system_state: SystemState::Density(system),
                joint_post_state: joint.into_matrix(),
            })
        }
        RegisterInput::Density(rho) => {
            let (joint, system) = propagate(&step, rho)?;
            Ok(CircuitResult {
                ancilla_distribution: Some(ancilla_distribution(joint.matrix())),
                system_state: SystemState::Density(system),
                joint_post_state: joint.into_matrix(),
            })
        }
        RegisterInput::Deviation(dev) => {
            let (joint, system) = propagate(&step, dev)?;
            Ok(CircuitResult {
                ancilla_distribution: None,
                system_state: SystemState::Deviation(system),
                joint_post_state: joint.into_matrix(),
            })
        }
    }
}

fn check_register_ket(ket: &Ket) -> Result<()> {
    if ket.dim() != ANCILLA_DIM * SYSTEM_DIM {
        return Err(Error::DimensionMismatch(format!(
            "register ket has dimension {}",
            ket.dim()
        )));
    }
    if (ket.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!(
            "register ket has norm {}",
            ket.norm()
        )));
    }
    Ok(())
}

fn propagate<S: OperatorState>(step: &ComplexMatrix, rho: &S) -> Result<(S, S)> {
    let m = rho.matrix();
    if m.rows() != ANCILLA_DIM * SYSTEM_DIM || m.cols() != ANCILLA_DIM * SYSTEM_DIM {
        return Err(Error::DimensionMismatch(format!(
            "circuit input must be a {0}x{0} register matrix, got {1}x{2}",
            ANCILLA_DIM * SYSTEM_DIM,
            m.rows(),
            m.cols()
        )));
    }
    let evolved = rho.map_matrix(m.conjugate_by(step));
    let measured = dephase_subsystem(&evolved, Subsystem::Ancilla)?;
    let system = linalg::partial_trace(measured.matrix(), (ANCILLA_DIM, SYSTEM_DIM), Keep::B)?
        .hermitian_part();
    let system = rho.map_matrix(system);
    Ok((measured, system))
}

fn ancilla_distribution(joint: &ComplexMatrix) -> [f64; 4] {
    std::array::from_fn(|k| {
        (0..SYSTEM_DIM)
            .map(|s| joint.get(k * SYSTEM_DIM + s, k * SYSTEM_DIM + s).re)
            .sum()
    })
}

/// `(1 - p) rho + p Tr(rho) I / d`.
pub fn depolarize<S: OperatorState>(rho: &S, p: f64) -> Result<S> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    let m = rho.matrix();
    let d = m.rows();
    let mixed = ComplexMatrix::identity(d).scale_complex(m.trace() / d as f64);
    Ok(rho.map_matrix(&m.scale(1.0 - p) + &mixed.scale(p)))
}

/// A black-box map on system density matrices.
pub trait Channel {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix>;
}

impl Channel for MeasurementDevice {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_device(self, rho)
    }
}

impl<F> Channel for F
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix>,
{
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self(rho)
    }
}

/// A channel followed by depolarising noise of strength `p`.
#[derive(Debug, Clone)]
pub struct Noisy<C> {
    pub inner: C,
    pub p: f64,
}

impl<C: Channel> Channel for Noisy<C> {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        depolarize(&self.inner.apply(rho)?, self.p)
    }
}
