use serde::{Deserialize, Serialize};

use crate::devices::{DeviceKind, MeasurementDevice, RegisterInput};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::observables::{
    build_a, build_refined, EigenBasis, Observable, PointerConfig, SearchSpace,
};
use crate::register::{
    plus_register, pops_deviation, DensityMatrix, DeviationMatrix, REGISTER_DIM,
};

/// Everything a command needs. Every field has a default, so `{}` is a
/// valid config and reproduces the worked example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub g: f64,
    pub tau: f64,
    pub pointer: PointerSpec,
    pub search: SearchConfig,
    pub device: DeviceConfig,
    pub input: InputSpec,
    /// Depolarizing strength applied after the device.
    pub noise: Option<f64>,
    pub protocol: ProtocolConfig,
    pub baseline: BaselineConfig,
    pub metrics: MetricsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            tau: 1.0,
            pointer: PointerSpec::Canonical,
            search: SearchConfig::default(),
            device: DeviceConfig::default(),
            input: InputSpec::PlusRegister,
            noise: None,
            protocol: ProtocolConfig::default(),
            baseline: BaselineConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointerSpec {
    Canonical,
    /// First solution of the grid search, preferring the canonical one.
    Solve,
    Explicit {
        q1: f64,
        q2: f64,
        a_prime: [f64; 4],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub a_prime_bound: i32,
    pub a_prime_candidates: Option<Vec<[i32; 4]>>,
    pub q1_resolution: u32,
    pub q1_multiples: Option<Vec<u32>>,
    pub q2_ratios: Vec<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let s = SearchSpace::default();
        Self {
            a_prime_bound: s.a_prime_bound,
            a_prime_candidates: s.a_prime_candidates,
            q1_resolution: s.q1_resolution,
            q1_multiples: s.q1_multiples,
            q2_ratios: s.q2_ratios,
        }
    }
}

impl From<&SearchConfig> for SearchSpace {
    fn from(c: &SearchConfig) -> Self {
        SearchSpace {
            a_prime_bound: c.a_prime_bound,
            a_prime_candidates: c.a_prime_candidates.clone(),
            q1_resolution: c.q1_resolution,
            q1_multiples: c.q1_multiples.clone(),
            q2_ratios: c.q2_ratios.clone(),
        }
    }
}

/// Eigenbasis of A as one rotation angle and phase per degenerate block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisAngles {
    pub theta_plus: f64,
    pub phi_plus: f64,
    pub theta_minus: f64,
    pub phi_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub kind: DeviceKind,
    /// Computational basis when absent.
    pub basis: Option<BasisAngles>,
    /// Groups of basis indices, one group per partition element. Only used
    /// by intermediate devices; defaults to `[[0], [1], [2, 3]]`.
    pub partition: Option<Vec<Vec<usize>>>,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            kind: DeviceKind::Lueders,
            basis: None,
            partition: None,
        }
    }
}

impl DeviceConfig {
    pub fn eigenbasis(&self) -> EigenBasis {
        match self.basis {
            Some(b) => {
                EigenBasis::from_angles(b.theta_plus, b.phi_plus, b.theta_minus, b.phi_minus)
            }
            None => EigenBasis::computational(),
        }
    }

    pub fn observable(&self) -> Observable {
        build_a(&self.eigenbasis())
    }

    /// Builds a device of `kind` sharing this config's basis and partition.
    pub fn build(&self, kind: DeviceKind, pointer: &PointerConfig) -> Result<MeasurementDevice> {
        let basis = self.eigenbasis();
        let a = build_a(&basis);
        match kind {
            DeviceKind::Lueders => Ok(MeasurementDevice::lueders(&a)),
            DeviceKind::VonNeumann => {
                let refined = build_refined(pointer.a_prime(), &basis)?;
                MeasurementDevice::von_neumann(&a, &refined)
            }
            DeviceKind::Intermediate => {
                let groups = self
                    .partition
                    .clone()
                    .unwrap_or_else(|| vec![vec![0], vec![1], vec![2, 3]]);
                let kets = basis.kets();
                let mut elements = Vec::with_capacity(groups.len());
                for group in &groups {
                    let mut p = ComplexMatrix::zeros(4, 4);
                    for &j in group {
                        let ket = kets.get(j).ok_or_else(|| {
                            Error::InvalidParameter(format!("partition index {j} is out of range"))
                        })?;
                        p = &p + &ket.projector();
                    }
                    elements.push(p);
                }
                MeasurementDevice::intermediate(&a, elements)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Density,
    Deviation,
}

/// A matrix given as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub kind: StateKind,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self.matrix.len();
        let cols = self.matrix.first().map_or(0, Vec::len);
        if self.matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(
                "matrix rows have different lengths".into(),
            ));
        }
        let data: Vec<_> = self
            .matrix
            .iter()
            .flatten()
            .map(|&[re, im]| c64(re, im))
            .collect();
        ComplexMatrix::from_row_major(rows, cols, &data)
    }
}

/// Register state fed to the circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    /// `|++++>`.
    PlusRegister,
    /// Deviation `|++++><++++| - |+++-><+++-|`.
    Pops,
    /// A 16x16 register matrix.
    Explicit(MatrixSpec),
}

impl InputSpec {
    pub fn to_register_input(&self) -> Result<RegisterInput> {
        match self {
            InputSpec::PlusRegister => Ok(RegisterInput::Pure(plus_register(4))),
            InputSpec::Pops => Ok(RegisterInput::Deviation(pops_deviation())),
            InputSpec::Explicit(spec) => {
                let m = spec.to_matrix()?;
                if m.rows() != REGISTER_DIM || m.cols() != REGISTER_DIM {
                    return Err(Error::DimensionMismatch(format!(
                        "register input must be {REGISTER_DIM}x{REGISTER_DIM}, got {}x{}",
                        m.rows(),
                        m.cols()
                    )));
                }
                match spec.kind {
                    StateKind::Density => Ok(RegisterInput::Density(DensityMatrix::new(m)?)),
                    StateKind::Deviation => Ok(RegisterInput::Deviation(DeviationMatrix::new(m)?)),
                }
            }
        }
    }
}

/// A system state used by the metrics command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    /// Output of the circuit for the given device kind and input.
    Circuit {
        device: DeviceKind,
        input: InputSpec,
    },
    /// A 4x4 system matrix, e.g. a tomographically reconstructed state.
    Explicit(MatrixSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub fidelity: Option<[StateSpec; 2]>,
    pub correlation: Option<[StateSpec; 2]>,
    pub baseline_target: Option<StateSpec>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        let circuit = |device, input| StateSpec::Circuit { device, input };
        Self {
            fidelity: Some([
                circuit(DeviceKind::Lueders, InputSpec::PlusRegister),
                circuit(DeviceKind::VonNeumann, InputSpec::PlusRegister),
            ]),
            correlation: Some([
                circuit(DeviceKind::Lueders, InputSpec::Pops),
                circuit(DeviceKind::Lueders, InputSpec::Pops),
            ]),
            baseline_target: Some(circuit(DeviceKind::Lueders, InputSpec::Pops)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub n_states: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n_states: 3,
            tol: crate::protocol::DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Replaces both random seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.protocol.seed = seed;
        self.baseline.seed = seed;
        self
    }

    /// Resolves the pointer configuration named by `pointer`.
    pub fn pointer_config(&self) -> Result<PointerConfig> {
        match &self.pointer {
            PointerSpec::Canonical => PointerConfig::canonical(self.g, self.tau),
            PointerSpec::Solve => {
                let solutions = crate::observables::solve_pointer_config(
                    self.g,
                    self.tau,
                    &(&self.search).into(),
                )?;
                let pick = solutions
                    .iter()
                    .position(PointerConfig::is_canonical)
                    .unwrap_or(0);
                Ok(solutions
                    .into_iter()
                    .nth(pick)
                    .expect("solver returns at least one solution"))
            }
            PointerSpec::Explicit { q1, q2, a_prime } => {
                PointerConfig::new(self.g, self.tau, *q1, *q2, *a_prime)
            }
        }
    }

    pub fn noise_probability(&self) -> Result<Option<f64>> {
        match self.noise {
            Some(p) if !(0.0..=1.0).contains(&p) => Err(Error::BadProbability(p)),
            other => Ok(other),
        }
    }
}
