//! Black-box discrimination of measuring devices and the metrics used to
//! compare their outputs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::devices::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, ComplexMatrix, Ket};
use crate::observables::Observable;
use crate::register::{DensityMatrix, DeviationMatrix, OperatorState};

/// Default change-detection tolerance for noiseless devices.
pub const DEFAULT_TOL: f64 = 1e-6;

const EIGENSTATE_TOL: f64 = 1e-9;
const NULL_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every test state survived. Either a Lueders device, or a refinement the
    /// test states happened not to probe.
    LuedersConsistent,
    VonNeumann,
    Intermediate,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::LuedersConsistent => "lueders_consistent",
            Verdict::VonNeumann => "von_neumann",
            Verdict::Intermediate => "intermediate",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One prepared eigenstate and what the device did to it.
#[derive(Debug, Clone)]
pub struct Evidence {
    /// Eigenvalue of the block the input was drawn from.
    pub block_value: f64,
    pub input: Ket,
    pub output: DensityMatrix,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    /// Common eigenbasis of all outputs, present for a von Neumann verdict.
    pub recovered_basis: Option<Vec<Ket>>,
}

/// Runs the discrimination protocol with seeded random test states.
///
/// For every degenerate eigenspace of `a` this prepares `n_states` random
/// superpositions inside the eigenspace, followed by the eigenspace's basis
/// kets. State `i` draws from its own ChaCha stream so results do not depend
/// on evaluation order.
pub fn hm_discriminate<C: Channel + ?Sized>(
    device: &C,
    a: &Observable,
    n_states: usize,
    tol: f64,
    seed: u64,
) -> Result<Classification> {
    if n_states < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 test states per degenerate block, got {n_states}"
        )));
    }
    let states = test_states(a, n_states, seed)?;
    hm_discriminate_with_states(device, a, &states, tol)
}

/// The test states [`hm_discriminate`] would prepare.
pub fn test_states(a: &Observable, n_states: usize, seed: u64) -> Result<Vec<Ket>> {
    let blocks: Vec<_> = a.blocks().iter().filter(|b| b.members.len() > 1).collect();
    if blocks.is_empty() {
        return Err(Error::BadObservable(
            "observable has no degenerate eigenspace".into(),
        ));
    }
    let mut states = Vec::new();
    let mut stream = 0u64;
    for block in blocks {
        let kets: Vec<&Ket> = block
            .members
            .iter()
            .map(|&j| &a.eigenvectors()[j])
            .collect();
        for _ in 0..n_states {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            stream += 1;
            let xi = kets
                .iter()
                .fold(Ket::new(vec![c64(0.0, 0.0); a.dim()]), |acc, v| {
                    let c = c64(rng.sample(StandardNormal), rng.sample(StandardNormal));
                    &acc + &v.scale(c)
                });
            states.push(xi.normalized());
        }
        states.extend(kets.into_iter().cloned());
    }
    Ok(states)
}

/// Runs the protocol on caller-chosen eigenstates of `a`.
pub fn hm_discriminate_with_states<C: Channel + ?Sized>(
    device: &C,
    a: &Observable,
    states: &[Ket],
    tol: f64,
) -> Result<Classification> {
    if a.is_nondegenerate() {
        return Err(Error::BadObservable(
            "observable has no degenerate eigenspace".into(),
        ));
    }
    if states.is_empty() {
        return Err(Error::InvalidParameter("no test states supplied".into()));
    }
    let projectors: Vec<ComplexMatrix> = (0..a.blocks().len())
        .map(|b| a.block_projector(b))
        .collect();

    let mut evidence = Vec::with_capacity(states.len());
    let mut block_of = Vec::with_capacity(states.len());
    for ket in states {
        if ket.dim() != a.dim() {
            return Err(Error::DimensionMismatch(format!(
                "test state has dimension {}, observable {}",
                ket.dim(),
                a.dim()
            )));
        }
        let ket = ket.normalized();
        let block = projectors
            .iter()
            .position(|p| p.apply(&ket).max_abs_diff(&ket) <= EIGENSTATE_TOL)
            .ok_or_else(|| {
                Error::InvalidState("test state is not an eigenstate of the observable".into())
            })?;
        let input = DensityMatrix::from_ket(&ket);
        let output = device.apply(&input)?;
        let fidelity = uhlmann_fidelity(&output, &input)?;
        block_of.push(block);
        evidence.push(Evidence {
            block_value: a.blocks()[block].value,
            input: ket,
            output,
            fidelity,
        });
    }

    let mut changed_blocks = 0;
    let mut preserved_blocks = 0;
    for b in 0..a.blocks().len() {
        let members: Vec<&Evidence> = evidence
            .iter()
            .zip(&block_of)
            .filter(|(_, &blk)| blk == b)
            .map(|(e, _)| e)
            .collect();
        if members.is_empty() {
            continue;
        }
        if members.iter().all(|e| e.fidelity >= 1.0 - tol) {
            preserved_blocks += 1;
            continue;
        }
        let outputs: Vec<&DensityMatrix> = members.iter().map(|e| &e.output).collect();
        if common_eigenbasis(&outputs, tol)?.is_none() {
            return Ok(Classification {
                verdict: Verdict::Inconclusive,
                evidence,
                recovered_basis: None,
            });
        }
        changed_blocks += 1;
    }

    let (verdict, recovered_basis) = if changed_blocks == 0 {
        (Verdict::LuedersConsistent, None)
    } else if preserved_blocks > 0 {
        (Verdict::Intermediate, None)
    } else {
        let outputs: Vec<&DensityMatrix> = evidence.iter().map(|e| &e.output).collect();
        match common_eigenbasis(&outputs, tol)? {
            Some(basis) => (Verdict::VonNeumann, Some(canonical_order(basis))),
            None => (Verdict::Inconclusive, None),
        }
    };

    Ok(Classification {
        verdict,
        evidence,
        recovered_basis,
    })
}

/// Eigenbasis of `sum_i (i + 1) rho_i`, accepted only if it diagonalises
/// every `rho_i` to within `tol`.
fn common_eigenbasis(outputs: &[&DensityMatrix], tol: f64) -> Result<Option<Vec<Ket>>> {
    let dim = outputs[0].dim();
    let weighted = outputs
        .iter()
        .enumerate()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, (i, rho)| {
            &acc + &rho.matrix().scale((i + 1) as f64)
        });
    let eig = linalg::eig_hermitian(&weighted.hermitian_part())?;
    let v = ComplexMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[j].amplitude(i));
    for rho in outputs {
        let d = &(&v.adjoint() * rho.matrix()) * &v;
        for i in 0..dim {
            for j in 0..dim {
                if i != j && d.get(i, j).norm() > tol {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(eig.eigenvectors))
}

/// Orders kets by their dominant component and rotates that component onto the positive real axis.
fn canonical_order(basis: Vec<Ket>) -> Vec<Ket> {
    let dominant = |k: &Ket| {
        (0..k.dim())
            .max_by(|&i, &j| k.amplitude(i).norm().total_cmp(&k.amplitude(j).norm()))
            .unwrap_or(0)
    };
    let mut kets: Vec<(usize, Ket)> = basis
        .into_iter()
        .map(|k| {
            let i = dominant(&k);
            let a = k.amplitude(i);
            let phase = if a.norm() > 0.0 {
                a.conj() / a.norm()
            } else {
                c64(1.0, 0.0)
            };
            (i, k.scale(phase))
        })
        .collect();
    kets.sort_by_key(|(i, _)| *i);
    kets.into_iter().map(|(_, k)| k).collect()
}

/// Uhlmann fidelity `Tr sqrt(sqrt(sigma) rho sqrt(sigma))`.
///
/// Evaluated as the trace norm of `sqrt(rho) sqrt(sigma)`, which is the same
/// quantity but avoids taking square roots of round-off eigenvalues.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between {}x{0} and {}x{1} states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let a = linalg::matsqrt_psd(rho.matrix())?;
    let b = linalg::matsqrt_psd(sigma.matrix())?;
    let product = (&a * &b).as_nalgebra().clone();
    let f: f64 = product.singular_values().iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Normalised Hilbert-Schmidt overlap `Tr[a b] / sqrt(Tr[a^2] Tr[b^2])`.
pub fn correlation(a: &DeviationMatrix, b: &DeviationMatrix) -> Result<f64> {
    correlation_of(a.matrix(), b.matrix())
}

fn correlation_of(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(
            "correlation of matrices with different shapes".into(),
        ));
    }
    let na = a.frobenius_norm();
    let nb = b.frobenius_norm();
    if na <= NULL_NORM || nb <= NULL_NORM {
        return Err(Error::NullMatrix);
    }
    // Both Hermitian, so Tr[a b] = <a, b>_HS.
    Ok((a.hs_inner(b).re / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub sample_count: usize,
    pub max_correlation: f64,
    pub mean: f64,
    pub std_dev: f64,
}

/// Correlation of `target` with random traceless diagonal matrices.
///
/// Diagonals are i.i.d. standard normal, mean-subtracted and normalised to
/// unit Frobenius norm.
pub fn null_baseline(
    target: &DeviationMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<BaselineReport> {
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "baseline needs at least 1000 samples, got {n_samples}"
        )));
    }
    if target.matrix().frobenius_norm() <= NULL_NORM {
        return Err(Error::NullMatrix);
    }
    let dim = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let sample = random_traceless_diagonal(dim, &mut rng);
        let c = correlation_of(target.matrix(), &sample)?;
        max = max.max(c);
        sum += c;
        sum_sq += c * c;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    Ok(BaselineReport {
        sample_count: n_samples,
        max_correlation: max,
        mean,
        std_dev: (sum_sq / n - mean * mean).max(0.0).sqrt(),
    })
}

fn random_traceless_diagonal<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let mut d: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let mean = d.iter().sum::<f64>() / dim as f64;
        d.iter_mut().for_each(|x| *x -= mean);
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > NULL_NORM {
            d.iter_mut().for_each(|x| *x /= norm);
            return ComplexMatrix::from_real_diagonal(&d);
        }
    }
}
