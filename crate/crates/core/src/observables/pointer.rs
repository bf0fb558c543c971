//! Pointer states of the two ancilla qubits and the search for coupling
//! parameters that make them orthonormal.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, Complex, ComplexMatrix, Ket};
use crate::register::plus_register;

use super::build_q;

/// Orthonormality tolerance for pointer states.
pub const POINTER_TOL: f64 = 1e-9;

/// Refined eigenvalues of the worked example.
pub const CANONICAL_A_PRIME: [f64; 4] = [-3.0, 1.0, 3.0, -1.0];

/// `exp(-i g a' Q tau) |++>`.
pub fn pointer_state(g: f64, tau: f64, q1: f64, q2: f64, a_prime: f64) -> Ket {
    let q = build_q(q1, q2);
    let u =
        linalg::matexp_hermitian(q.matrix(), g * a_prime * tau).expect("Q is diagonal and real");
    u.apply(&plus_register(2))
}

/// One pointer state per refined eigenvalue.
pub fn pointer_states(g: f64, tau: f64, q1: f64, q2: f64, a_prime: [f64; 4]) -> [Ket; 4] {
    a_prime.map(|a| pointer_state(g, tau, q1, q2, a))
}

/// Unitary with the pointer states as columns, so that `U_a |j> = psi_j`.
pub fn build_ua(states: &[Ket; 4]) -> Result<ComplexMatrix> {
    if states.iter().any(|s| s.dim() != 4) {
        return Err(Error::DimensionMismatch(
            "pointer states must be two-qubit kets".into(),
        ));
    }
    let dev = linalg::gram_deviation(states);
    if dev > POINTER_TOL {
        return Err(Error::NotOrthonormal { max_deviation: dev });
    }
    Ok(ComplexMatrix::from_fn(4, 4, |i, j| states[j].amplitude(i)))
}

/// A solution of the pointer orthonormality constraints.
#[derive(Debug, Clone)]
pub struct PointerConfig {
    g: f64,
    tau: f64,
    q1: f64,
    q2: f64,
    a_prime: [f64; 4],
    pointer_states: [Ket; 4],
    ua: ComplexMatrix,
}

impl PointerConfig {
    pub fn new(g: f64, tau: f64, q1: f64, q2: f64, a_prime: [f64; 4]) -> Result<Self> {
        check_coupling(g, tau)?;
        super::check_distinct(&a_prime)?;
        let pointer_states = pointer_states(g, tau, q1, q2, a_prime);
        let ua = build_ua(&pointer_states)?;
        Ok(Self {
            g,
            tau,
            q1,
            q2,
            a_prime,
            pointer_states,
            ua,
        })
    }

    /// `a' = (-3, 1, 3, -1)`, `q1 = pi / (4 g tau)`, `q2 = -q1 / 2`.
    pub fn canonical(g: f64, tau: f64) -> Result<Self> {
        check_coupling(g, tau)?;
        let q1 = PI / (4.0 * g * tau);
        Self::new(g, tau, q1, -q1 / 2.0, CANONICAL_A_PRIME)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    pub fn a_prime(&self) -> [f64; 4] {
        self.a_prime
    }

    pub fn pointer_states(&self) -> &[Ket; 4] {
        &self.pointer_states
    }

    pub fn ua(&self) -> &ComplexMatrix {
        &self.ua
    }

    pub fn gram_deviation(&self) -> f64 {
        linalg::gram_deviation(&self.pointer_states)
    }

    /// Whether this is the worked-example solution for its `g` and `tau`.
    pub fn is_canonical(&self) -> bool {
        let q1 = PI / (4.0 * self.g * self.tau);
        self.a_prime == CANONICAL_A_PRIME
            && (self.q1 - q1).abs() <= 1e-12 * q1.abs().max(1.0)
            && (self.q2 + q1 / 2.0).abs() <= 1e-12 * q1.abs().max(1.0)
    }

    /// Index of the refined eigenvalue equal to `value`, if any.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.a_prime
            .iter()
            .position(|&a| (a - value).abs() < super::EIGENVALUE_TOL)
    }
}

fn check_coupling(g: f64, tau: f64) -> Result<()> {
    let gt = g * tau;
    if !gt.is_finite() || gt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "g * tau must be positive and finite, got {gt}"
        )));
    }
    Ok(())
}

/// Finite grid searched by [`solve_pointer_config`].
///
/// `q1` runs over `m * pi / (q1_resolution * g * tau)` for `m = 1..=q1_resolution`
/// (or only the listed `q1_multiples`), and `q2 = r * q1` for each ratio `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    /// Integer `a'` values are drawn from `-bound..=bound`.
    pub a_prime_bound: i32,
    /// Overrides the enumerated `a'` tuples when set.
    pub a_prime_candidates: Option<Vec<[i32; 4]>>,
    pub q1_resolution: u32,
    pub q1_multiples: Option<Vec<u32>>,
    pub q2_ratios: Vec<f64>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            a_prime_bound: 5,
            a_prime_candidates: None,
            q1_resolution: 32,
            q1_multiples: None,
            q2_ratios: vec![0.5, -0.5, 1.0, -1.0, 2.0, -2.0],
        }
    }
}

impl SearchSpace {
    fn a_prime_tuples(&self) -> Result<Vec<[i32; 4]>> {
        if let Some(candidates) = &self.a_prime_candidates {
            for c in candidates {
                super::check_distinct(&c.map(f64::from))?;
            }
            return Ok(candidates.clone());
        }
        if self.a_prime_bound < 2 {
            return Err(Error::InvalidParameter(format!(
                "a' bound {} leaves fewer than four distinct values",
                self.a_prime_bound
            )));
        }
        let values: Vec<i32> = (-self.a_prime_bound..=self.a_prime_bound).collect();
        let mut out = Vec::new();
        for &a in &values {
            for &b in &values {
                for &c in &values {
                    for &d in &values {
                        let t = [a, b, c, d];
                        if (0..4).all(|i| (i + 1..4).all(|j| t[i] != t[j])) {
                            out.push(t);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn q1_steps(&self) -> Result<Vec<u32>> {
        if self.q1_resolution == 0 {
            return Err(Error::InvalidParameter(
                "q1 resolution must be at least 1".into(),
            ));
        }
        match &self.q1_multiples {
            Some(m) => {
                if let Some(bad) = m.iter().find(|&&k| k == 0 || k > self.q1_resolution) {
                    return Err(Error::InvalidParameter(format!(
                        "q1 multiple {bad} is outside 1..={}",
                        self.q1_resolution
                    )));
                }
                Ok(m.clone())
            }
            None => Ok((1..=self.q1_resolution).collect()),
        }
    }
}

/// Enumerates every grid point whose pointer states are orthonormal.
///
/// The output is sorted lexicographically by `(a'_0, .., a'_3, q1, q2)`.
pub fn solve_pointer_config(g: f64, tau: f64, space: &SearchSpace) -> Result<Vec<PointerConfig>> {
    check_coupling(g, tau)?;
    let tuples = space.a_prime_tuples()?;
    let steps = space.q1_steps()?;
    let gt = g * tau;
    let lo = tuples.iter().flatten().copied().min().unwrap_or(0);
    let hi = tuples.iter().flatten().copied().max().unwrap_or(0);

    let mut hits: Vec<([i32; 4], f64, f64)> = Vec::new();
    for &m in &steps {
        let q1 = f64::from(m) * PI / (f64::from(space.q1_resolution) * gt);
        for &ratio in &space.q2_ratios {
            let q2 = ratio * q1;
            let q = [q1 + q2, q1 - q2, -q1 + q2, -q1 - q2];
            // Q is diagonal, so psi(a)_k = exp(-i g tau a Q_k) / 2.
            let table: Vec<[linalg::C64; 4]> = (lo..=hi)
                .map(|a| q.map(|qk| Complex::from_polar(0.5, -gt * f64::from(a) * qk)))
                .collect();
            for t in &tuples {
                let states = t.map(|a| table[(a - lo) as usize]);
                if screen_orthonormal(&states) {
                    hits.push((*t, q1, q2));
                }
            }
        }
    }

    hits.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.total_cmp(&b.1))
            .then_with(|| a.2.total_cmp(&b.2))
    });
    hits.dedup_by(|a, b| {
        a.0 == b.0
            && a.1.total_cmp(&b.1) == Ordering::Equal
            && a.2.total_cmp(&b.2) == Ordering::Equal
    });

    let configs: Vec<PointerConfig> = hits
        .into_iter()
        .filter_map(|(t, q1, q2)| PointerConfig::new(g, tau, q1, q2, t.map(f64::from)).ok())
        .collect();
    if configs.is_empty() {
        return Err(Error::NoSolution);
    }
    Ok(configs)
}

fn screen_orthonormal(states: &[[linalg::C64; 4]; 4]) -> bool {
    for i in 0..4 {
        for j in i + 1..4 {
            let overlap: linalg::C64 = (0..4).map(|k| states[i][k].conj() * states[j][k]).sum();
            if overlap.norm() > POINTER_TOL {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::observables::DEGENERATE_EIGENVALUES;
    use crate::observables::{
        build_a, build_a_prime, fit_refining_map, verify_refinement, EigenBasis,
    };

    /// Worked-example `U_a`, entry (i, j) = z^e[i][j] / 2 with z = e^{i pi / 8}.
    fn canonical_ua_closed_form() -> ComplexMatrix {
        let e = [
            [3, -1, -3, 1],
            [9, -3, -9, 3],
            [-9, 3, 9, -3],
            [-3, 1, 3, -1],
        ];
        ComplexMatrix::from_fn(4, 4, |i, j| {
            Complex::from_polar(0.5, f64::from(e[i][j]) * PI / 8.0)
        })
    }

    fn z_pow(k: i32) -> linalg::C64 {
        Complex::from_polar(1.0, f64::from(k) * PI / 8.0)
    }

    #[test]
    fn canonical_pointer_state_psi1() {
        let psi = pointer_states(1.0, 1.0, PI / 4.0, -PI / 8.0, CANONICAL_A_PRIME);
        let expected =
            Ket::new(vec![z_pow(-1), z_pow(-3), z_pow(3), z_pow(1)]).scale(c64(0.5, 0.0));
        assert!(psi[1].max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn matexp_route_matches_closed_form_pointer() {
        // Same column through the generic matrix exponential with g tau absorbed.
        let q = build_q(PI / 4.0, -PI / 8.0);
        let u = linalg::matexp_hermitian(q.matrix(), 1.0).unwrap();
        let psi1 = u.apply(&plus_register(2));
        let expected =
            Ket::new(vec![z_pow(-1), z_pow(-3), z_pow(3), z_pow(1)]).scale(c64(0.5, 0.0));
        assert!(psi1.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn zero_refined_value_gives_plus_plus() {
        let psi = pointer_state(1.0, 1.0, PI / 4.0, -PI / 8.0, 0.0);
        assert!(psi.max_abs_diff(&plus_register(2)) < 1e-15);
    }

    #[test]
    fn canonical_config_is_orthonormal_and_matches_closed_form_ua() {
        let cfg = PointerConfig::canonical(1.0, 1.0).unwrap();
        assert!(cfg.gram_deviation() <= 1e-12);
        assert!(cfg.ua().max_abs_diff(&canonical_ua_closed_form()) <= 1e-12);
        assert!(cfg.is_canonical());
        for j in 0..4 {
            let back = cfg.ua().adjoint().apply(&cfg.pointer_states()[j]);
            assert!(back.max_abs_diff(&Ket::basis(4, j)) <= 1e-9);
        }
    }

    #[test]
    fn canonical_config_scales_with_coupling() {
        let cfg = PointerConfig::canonical(2.0, 0.25).unwrap();
        assert!(cfg.gram_deviation() <= 1e-12);
        assert!(cfg.ua().max_abs_diff(&canonical_ua_closed_form()) <= 1e-12);
    }

    #[test]
    fn ua_examples() {
        let basis: [Ket; 4] = std::array::from_fn(|j| Ket::basis(4, j));
        assert!(
            build_ua(&basis)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::identity(4))
                < 1e-15
        );
        let mut bad = basis.clone();
        bad[1] = plus_register(2);
        assert!(matches!(build_ua(&bad), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn bad_coupling_rejected() {
        assert!(matches!(
            PointerConfig::canonical(0.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            solve_pointer_config(1.0, -1.0, &SearchSpace::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    /// Independent oracle: orthogonality holds iff cos(d q1 g tau) cos(d q2 g tau) = 0
    /// for every pairwise difference d of refined eigenvalues.
    fn oracle_solutions(space: &SearchSpace) -> Vec<([i32; 4], u32, f64)> {
        let values: Vec<i32> = (-space.a_prime_bound..=space.a_prime_bound).collect();
        let tuples: Vec<[i32; 4]> = match &space.a_prime_candidates {
            Some(c) => c.clone(),
            None => {
                let mut v = Vec::new();
                for &a in &values {
                    for &b in &values {
                        for &c in &values {
                            for &d in &values {
                                if a != b && a != c && a != d && b != c && b != d && c != d {
                                    v.push([a, b, c, d]);
                                }
                            }
                        }
                    }
                }
                v
            }
        };
        let mut out = Vec::new();
        for t in tuples {
            for m in 1..=space.q1_resolution {
                let q1 = f64::from(m) * PI / f64::from(space.q1_resolution);
                for &r in &space.q2_ratios {
                    let ok = (0..4).all(|i| {
                        (i + 1..4).all(|j| {
                            let d = f64::from(t[j] - t[i]);
                            ((d * q1).cos() * (d * r * q1).cos()).abs() < 1e-9
                        })
                    });
                    if ok {
                        out.push((t, m, r));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn solver_contains_canonical_solution() {
        let sols = solve_pointer_config(1.0, 1.0, &SearchSpace::default()).unwrap();
        assert!(sols.iter().any(PointerConfig::is_canonical));
        assert!(sols.iter().all(|c| c.gram_deviation() <= POINTER_TOL));
        assert_eq!(sols.len(), oracle_solutions(&SearchSpace::default()).len());
        assert_eq!(sols.len(), 9504);
    }

    #[test]
    fn solver_output_is_sorted_and_antisymmetric() {
        let sols = solve_pointer_config(1.0, 1.0, &SearchSpace::default()).unwrap();
        let key = |c: &PointerConfig| (c.a_prime().map(|x| x as i32), c.q1(), c.q2());
        for w in sols.windows(2) {
            let (a, b) = (key(&w[0]), key(&w[1]));
            assert!(a.0 < b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 < b.2))));
        }
        let set: std::collections::HashSet<_> = sols
            .iter()
            .map(|c| {
                (
                    c.a_prime().map(|x| x as i32),
                    c.q1().to_bits(),
                    c.q2().to_bits(),
                )
            })
            .collect();
        for c in &sols {
            let neg = c.a_prime().map(|x| -(x as i32));
            assert!(set.contains(&(neg, c.q1().to_bits(), c.q2().to_bits())));
        }
    }

    #[test]
    fn every_solution_admits_a_refining_map() {
        let a = build_a(&EigenBasis::computational());
        let sols = solve_pointer_config(1.0, 1.0, &SearchSpace::default()).unwrap();
        for c in sols.iter().step_by(37) {
            let ap = build_a_prime(c.a_prime()).unwrap();
            let f = fit_refining_map(c.a_prime(), DEGENERATE_EIGENVALUES).unwrap();
            assert!(verify_refinement(&f, &ap, &a));
            assert!(a.commutator_norm(&ap) <= 1e-12);
            for j in 0..4 {
                let back = c.ua().adjoint().apply(&c.pointer_states()[j]);
                assert!(back.max_abs_diff(&Ket::basis(4, j)) <= 1e-9);
            }
        }
    }

    #[test]
    fn restricted_search_spaces_agree_with_oracle() {
        // (1, 2, 3, 4) does admit solutions on this grid, e.g. q1 = pi/2, q2 = pi/4.
        let consecutive = SearchSpace {
            a_prime_candidates: Some(vec![[1, 2, 3, 4]]),
            ..SearchSpace::default()
        };
        let sols = solve_pointer_config(1.0, 1.0, &consecutive).unwrap();
        assert_eq!(sols.len(), oracle_solutions(&consecutive).len());
        assert_eq!(sols.len(), 6);

        let gapped = SearchSpace {
            a_prime_candidates: Some(vec![[0, 1, 2, 4]]),
            ..SearchSpace::default()
        };
        assert!(oracle_solutions(&gapped).is_empty());
        assert!(matches!(
            solve_pointer_config(1.0, 1.0, &gapped),
            Err(Error::NoSolution)
        ));

        let no_quarter = SearchSpace {
            a_prime_candidates: Some(vec![[-3, 1, 3, -1]]),
            q1_multiples: Some(vec![1, 2, 3, 5, 6, 7]),
            ..SearchSpace::default()
        };
        assert!(matches!(
            solve_pointer_config(1.0, 1.0, &no_quarter),
            Err(Error::NoSolution)
        ));

        let degenerate = SearchSpace {
            a_prime_candidates: Some(vec![[1, 1, 2, 3]]),
            ..SearchSpace::default()
        };
        assert!(matches!(
            solve_pointer_config(1.0, 1.0, &degenerate),
            Err(Error::DegenerateSpectrum(_))
        ));
    }
}
