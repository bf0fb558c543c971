use super::config::{ExperimentConfig, InputSpec, StateKind, StateSpec};
use super::report::{
    ket_entries, matrix_rows, readout_map, ClassificationReport, EvidenceReport, MetricsReport,
    PopsReport, Report, SimulationReport, SolutionEntry, SolutionsReport,
};
use crate::devices::{
    depolarize, run_circuit, MeasurementDevice, RegisterInput, SystemState,
};
use crate::error::{Error, Result};
use crate::linalg::kron;
use crate::observables::{solve_pointer_config, PointerConfig};
use crate::protocol::{correlation, hm_discriminate, null_baseline, uhlmann_fidelity};
use crate::register::{
    minus, plus, plus_register, DensityMatrix, DeviationMatrix, OperatorState, SYSTEM_DIM,
};

/// Lists every grid solution and reports the one `pointer` resolves to.
pub fn cmd_solve_pointer(config: &ExperimentConfig) -> Result<Report> {
    let solutions = solve_pointer_config(config.g, config.tau, &(&config.search).into())?;
    let entries: Vec<SolutionEntry> = solutions
        .iter()
        .map(|s| SolutionEntry {
            a_prime: s.a_prime(),
            q1: s.q1(),
            q2: s.q2(),
            canonical: s.is_canonical(),
        })
        .collect();
    let chosen = solutions
        .iter()
        .find(|s| s.is_canonical())
        .unwrap_or(&solutions[0]);
    let mut report = Report::new("solve-pointer", config);
    report.pointer = Some(chosen.into());
    report.solutions = Some(SolutionsReport {
        count: entries.len(),
        canonical_found: entries.iter().any(|e| e.canonical),
        entries,
    });
    Ok(report)
}

fn apply_noise(state: SystemState, p: Option<f64>) -> Result<SystemState> {
    match p {
        None => Ok(state),
        Some(p) => match state {
            SystemState::Density(d) => Ok(SystemState::Density(depolarize(&d, p)?)),
            SystemState::Deviation(d) => Ok(SystemState::Deviation(depolarize(&d, p)?)),
        },
    }
}

/// Runs the ancilla circuit once on `input`.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Report> {
    let pointer = config.pointer_config()?;
    let noise = config.noise_probability()?;
    let device = config.device.build(config.device.kind, &pointer)?;
    let input = config.input.to_register_input()?;
    let result = run_circuit(&device, &pointer, &input)?;
    let state = apply_noise(result.system_state, noise)?;

    let pops = match config.input {
        InputSpec::Pops => {
            let half = |last| -> Result<_> {
                let ket = plus().kron(&plus()).kron(&plus()).kron(&last);
                let r = run_circuit(&device, &pointer, &RegisterInput::Pure(ket))?;
                Ok((
                    apply_noise(r.system_state, noise)?,
                    r.ancilla_distribution.unwrap_or_default(),
                ))
            };
            let (p_state, p_dist) = half(plus())?;
            let (m_state, m_dist) = half(minus())?;
            let diff = p_state.matrix() - m_state.matrix();
            Some(PopsReport {
                plus_half_distribution: readout_map(p_dist),
                minus_half_distribution: readout_map(m_dist),
                linearity_residual: diff.max_abs_diff(state.matrix()),
                frobenius_norm: state.matrix().frobenius_norm(),
            })
        }
        _ => None,
    };

    let mut report = Report::new("simulate", config);
    report.pointer = Some((&pointer).into());
    report.simulation = Some(SimulationReport {
        device: device.kind(),
        state_kind: match state {
            SystemState::Density(_) => StateKind::Density,
            SystemState::Deviation(_) => StateKind::Deviation,
        },
        system_state: matrix_rows(state.matrix()),
        ancilla_distribution: result.ancilla_distribution.map(readout_map),
        pops,
    });
    Ok(report)
}

/// The device as a black box: `rho` is joined with a `|++>` ancilla and sent
/// through the circuit.
fn circuit_channel<'a>(
    device: &'a MeasurementDevice,
    pointer: &'a PointerConfig,
    noise: Option<f64>,
) -> impl Fn(&DensityMatrix) -> Result<DensityMatrix> + 'a {
    let ancilla = plus_register(2).projector();
    move |rho: &DensityMatrix| {
        let register = DensityMatrix::new(kron(&ancilla, rho.matrix()))?;
        match apply_noise(
            run_circuit(device, pointer, &RegisterInput::Density(register))?.system_state,
            noise,
        )? {
            SystemState::Density(d) => Ok(d),
            SystemState::Deviation(_) => unreachable!("density input yields a density output"),
        }
    }
}

pub fn cmd_discriminate(config: &ExperimentConfig) -> Result<Report> {
    let pointer = config.pointer_config()?;
    let noise = config.noise_probability()?;
    let device = config.device.build(config.device.kind, &pointer)?;
    let a = config.device.observable();
    let channel = circuit_channel(&device, &pointer, noise);
    let p = &config.protocol;
    let c = hm_discriminate(&channel, &a, p.n_states, p.tol, p.seed)?;

    let mut report = Report::new("discriminate", config);
    report.pointer = Some((&pointer).into());
    report.classification = Some(ClassificationReport {
        device: device.kind(),
        verdict: c.verdict,
        evidence: c
            .evidence
            .iter()
            .map(|e| EvidenceReport {
                block_value: e.block_value,
                fidelity: e.fidelity,
                input: ket_entries(&e.input),
                output: matrix_rows(e.output.matrix()),
            })
            .collect(),
        recovered_basis: c
            .recovered_basis
            .map(|b| b.iter().map(ket_entries).collect()),
    });
    Ok(report)
}

fn resolve_state(
    config: &ExperimentConfig,
    pointer: &PointerConfig,
    spec: &StateSpec,
) -> Result<SystemState> {
    match spec {
        StateSpec::Circuit { device, input } => {
            let dev = config.device.build(*device, pointer)?;
            let result = run_circuit(&dev, pointer, &input.to_register_input()?)?;
            apply_noise(result.system_state, config.noise_probability()?)
        }
        StateSpec::Explicit(explicit) => {
            let m = explicit.to_matrix()?;
            if m.rows() != SYSTEM_DIM || m.cols() != SYSTEM_DIM {
                return Err(Error::DimensionMismatch(format!(
                    "system state must be {SYSTEM_DIM}x{SYSTEM_DIM}, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            match explicit.kind {
                StateKind::Density => Ok(SystemState::Density(DensityMatrix::new(m)?)),
                StateKind::Deviation => Ok(SystemState::Deviation(DeviationMatrix::new(m)?)),
            }
        }
    }
}

fn as_density(state: SystemState) -> Result<DensityMatrix> {
    match state {
        SystemState::Density(d) => Ok(d),
        SystemState::Deviation(_) => Err(Error::InvalidState(
            "fidelity needs density-matrix states".into(),
        )),
    }
}

fn as_deviation(state: SystemState) -> DeviationMatrix {
    match state {
        SystemState::Density(d) => d.deviation(),
        SystemState::Deviation(d) => d,
    }
}

/// Fidelity, correlation and null baseline for the configured state pairs.
pub fn cmd_report_metrics(config: &ExperimentConfig) -> Result<Report> {
    let pointer = config.pointer_config()?;
    let m = &config.metrics;
    let fidelity = match &m.fidelity {
        Some([a, b]) => Some(uhlmann_fidelity(
            &as_density(resolve_state(config, &pointer, a)?)?,
            &as_density(resolve_state(config, &pointer, b)?)?,
        )?),
        None => None,
    };
    let corr = match &m.correlation {
        Some([a, b]) => Some(correlation(
            &as_deviation(resolve_state(config, &pointer, a)?),
            &as_deviation(resolve_state(config, &pointer, b)?),
        )?),
        None => None,
    };
    let baseline = match &m.baseline_target {
        Some(t) => {
            let target = as_deviation(resolve_state(config, &pointer, t)?);
            Some(null_baseline(
                &target,
                config.baseline.n_samples,
                config.baseline.seed,
            )?)
        }
        None => None,
    };
    let mut report = Report::new("report-metrics", config);
    report.pointer = Some((&pointer).into());
    report.metrics = Some(MetricsReport {
        fidelity,
        correlation: corr,
        baseline,
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolvePointer,
    Simulate,
    Discriminate,
    ReportMetrics,
}

pub fn run(command: Command, config: &ExperimentConfig) -> Result<Report> {
    match command {
        Command::SolvePointer => cmd_solve_pointer(config),
        Command::Simulate => cmd_simulate(config),
        Command::Discriminate => cmd_discriminate(config),
        Command::ReportMetrics => cmd_report_metrics(config),
    }
}
