use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use super::config::{ExperimentConfig, StateKind};
use crate::devices::DeviceKind;
use crate::linalg::{ComplexMatrix, Ket};
use crate::observables::PointerConfig;
use crate::protocol::{BaselineReport, Verdict};

pub type Entries = Vec<[f64; 2]>;
pub type Rows = Vec<Entries>;

pub fn matrix_rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m.get(i, j).re, m.get(i, j).im])
                .collect()
        })
        .collect()
}

pub fn ket_entries(k: &Ket) -> Entries {
    k.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer: Option<PointerReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solutions: Option<SolutionsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
}

impl Report {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            pointer: None,
            solutions: None,
            simulation: None,
            classification: None,
            metrics: None,
        }
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerReport {
    pub g: f64,
    pub tau: f64,
    pub q1: f64,
    pub q2: f64,
    pub a_prime: [f64; 4],
    pub canonical: bool,
    pub gram_deviation: f64,
    pub pointer_states: Vec<Entries>,
    pub ua: Rows,
}

impl From<&PointerConfig> for PointerReport {
    fn from(p: &PointerConfig) -> Self {
        Self {
            g: p.g(),
            tau: p.tau(),
            q1: p.q1(),
            q2: p.q2(),
            a_prime: p.a_prime(),
            canonical: p.is_canonical(),
            gram_deviation: p.gram_deviation(),
            pointer_states: p.pointer_states().iter().map(ket_entries).collect(),
            ua: matrix_rows(p.ua()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    pub a_prime: [f64; 4],
    pub q1: f64,
    pub q2: f64,
    pub canonical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionsReport {
    pub count: usize,
    pub canonical_found: bool,
    pub entries: Vec<SolutionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopsReport {
    /// Ancilla readout for the `|++++>` and `|+++->` halves.
    pub plus_half_distribution: BTreeMap<String, f64>,
    pub minus_half_distribution: BTreeMap<String, f64>,
    /// Max-abs gap between the deviation output and the difference of the halves.
    pub linearity_residual: f64,
    pub frobenius_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub device: DeviceKind,
    pub state_kind: StateKind,
    pub system_state: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_distribution: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pops: Option<PopsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub block_value: f64,
    pub fidelity: f64,
    pub input: Entries,
    pub output: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub device: DeviceKind,
    pub verdict: Verdict,
    pub evidence: Vec<EvidenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered_basis: Option<Vec<Entries>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineReport>,
}

pub fn readout_map(p: [f64; 4]) -> BTreeMap<String, f64> {
    ["00", "01", "10", "11"]
        .iter()
        .map(|l| l.to_string())
        .zip(p)
        .collect()
}

/// Compact JSON with every float written to 17 significant digits.
struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_structured(report: &Report) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    report
        .serialize(&mut ser)
        .expect("report serialises to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn fmt_matrix(out: &mut String, m: &Rows) {
    for row in m {
        let cells: Vec<String> = row
            .iter()
            .map(|[re, im]| {
                if im.abs() < 5e-7 {
                    format!("{re:>10.6}")
                } else {
                    format!("{re:.6}{im:+.6}i")
                }
            })
            .collect();
        let _ = writeln!(out, "    {}", cells.join(" "));
    }
}

pub fn to_human(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", report.command);
    if let Some(p) = &report.pointer {
        let _ = writeln!(
            out,
            "pointer: a' = {:?}, q1 = {:.12}, q2 = {:.12}{}",
            p.a_prime,
            p.q1,
            p.q2,
            if p.canonical { " (worked example)" } else { "" }
        );
        let _ = writeln!(out, "  gram deviation: {:.3e}", p.gram_deviation);
    }
    if let Some(s) = &report.solutions {
        let _ = writeln!(
            out,
            "solutions: {} found, worked example {}",
            s.count,
            if s.canonical_found {
                "present"
            } else {
                "absent"
            }
        );
    }
    if let Some(s) = &report.simulation {
        let _ = writeln!(out, "device: {}", s.device);
        let _ = writeln!(
            out,
            "system {}:",
            if s.state_kind == StateKind::Density {
                "state"
            } else {
                "deviation"
            }
        );
        fmt_matrix(&mut out, &s.system_state);
        if let Some(d) = &s.ancilla_distribution {
            let _ = writeln!(out, "ancilla readout:");
            for (label, p) in d {
                let _ = writeln!(out, "    |{label}>  {p:.6}");
            }
        }
        if let Some(p) = &s.pops {
            let _ = writeln!(
                out,
                "pops: deviation norm {:.6}, linearity residual {:.3e}",
                p.frobenius_norm, p.linearity_residual
            );
        }
    }
    if let Some(c) = &report.classification {
        let _ = writeln!(out, "device: {}", c.device);
        let _ = writeln!(out, "verdict: {}", c.verdict);
        let _ = writeln!(out, "  {:>6}  {:>10}", "block", "fidelity");
        for e in &c.evidence {
            let _ = writeln!(out, "  {:>6}  {:>10.8}", e.block_value, e.fidelity);
        }
        if let Some(basis) = &c.recovered_basis {
            let _ = writeln!(out, "recovered basis (columns):");
            let cols: Rows = (0..basis.len())
                .map(|i| basis.iter().map(|k| k[i]).collect())
                .collect();
            fmt_matrix(&mut out, &cols);
        }
    }
    if let Some(m) = &report.metrics {
        if let Some(f) = m.fidelity {
            let _ = writeln!(out, "fidelity: {f:.12}");
        }
        if let Some(c) = m.correlation {
            let _ = writeln!(out, "correlation: {c:.12}");
        }
        if let Some(b) = &m.baseline {
            let _ = writeln!(
                out,
                "baseline: max {:.6} over {} samples (mean {:.6}, sd {:.6})",
                b.max_correlation, b.sample_count, b.mean, b.std_dev
            );
        }
    }
    out
}
