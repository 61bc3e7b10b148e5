//! Exact 2×2 machinery for the ancilla channel.
//!
//! The classical machine's operations are doubly stochastic matrices acting
//! on bit probability vectors; the quantum machine's operations are unitaries
//! acting on a single-qubit density matrix. Between the two quantum gates the
//! state may be dephased, which shrinks the off-diagonal coherences.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::TOLERANCE;

fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::Probability(p))
    }
}

fn check_hint(h: f64) -> Result<f64> {
    if (-0.5..=0.5).contains(&h) {
        Ok(h)
    } else {
        Err(Error::Hint(h))
    }
}

/// A 2×2 complex matrix with finite entries, indexed `[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    entries: [[Complex64; 2]; 2],
}

impl ComplexMatrix2 {
    pub fn new(entries: [[Complex64; 2]; 2]) -> Result<Self> {
        if entries.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self { entries })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn identity() -> Self {
        Self::real([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Real-valued matrix. Panics on non-finite input.
    pub fn real(entries: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self::new([
            [c(entries[0][0]), c(entries[0][1])],
            [c(entries[1][0]), c(entries[1][1])],
        ])
        .expect("finite real entries")
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let e = &self.entries;
        Self {
            entries: [
                [e[0][0].conj(), e[1][0].conj()],
                [e[0][1].conj(), e[1][1].conj()],
            ],
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut entries = self.entries;
        entries.iter_mut().flatten().for_each(|z| *z *= factor);
        Self { entries }
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self { entries: out }
    }
}

/// The quantum realization of one operation `u_j`: a superposition of the
/// identity and the logical NOT with relative phase `phase`.
///
/// ```text
/// [ √p            e^{iφ}√(1−p) ]
/// [ e^{−iφ}√(1−p)   −√p        ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryGate {
    p_identity: f64,
    phase: f64,
    matrix: ComplexMatrix2,
}

impl UnitaryGate {
    pub fn p_identity(&self) -> f64 {
        self.p_identity
    }

    /// Phase in radians, reduced to `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.matrix
    }
}

pub fn build_unitary(p_identity: f64, phase: f64) -> Result<UnitaryGate> {
    let p = check_probability(p_identity)?;
    if !phase.is_finite() {
        return Err(Error::Phase(phase));
    }
    let phase = phase.rem_euclid(TAU);
    let (stay, flip) = (p.sqrt(), (1.0 - p).sqrt());
    let rot = Complex64::from_polar(1.0, phase);
    let matrix = ComplexMatrix2::new([
        [Complex64::new(stay, 0.0), rot * flip],
        [rot.conj() * flip, Complex64::new(-stay, 0.0)],
    ])?;
    Ok(UnitaryGate {
        p_identity: p,
        phase,
        matrix,
    })
}

/// The classical realization of one operation `u_j`: identity with
/// probability `p`, NOT otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticGate {
    p_identity: f64,
    matrix: [[f64; 2]; 2],
}

impl StochasticGate {
    pub fn p_identity(&self) -> f64 {
        self.p_identity
    }

    pub fn matrix(&self) -> &[[f64; 2]; 2] {
        &self.matrix
    }

    /// Evolves a bit probability vector `(P(0), P(1))`.
    pub fn apply(&self, probs: [f64; 2]) -> [f64; 2] {
        let m = &self.matrix;
        [
            m[0][0] * probs[0] + m[0][1] * probs[1],
            m[1][0] * probs[0] + m[1][1] * probs[1],
        ]
    }
}

pub fn build_stochastic(p_identity: f64) -> Result<StochasticGate> {
    let p = check_probability(p_identity)?;
    let q = 1.0 - p;
    Ok(StochasticGate {
        p_identity: p,
        matrix: [[p, q], [q, p]],
    })
}

/// Absolute phase difference between the two unitaries, chosen from the
/// sign of `h0·h1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseDifference {
    /// Δ = 0, hints of equal sign.
    Aligned,
    /// Δ = π/2, at least one hint is exactly zero.
    Quadrature,
    /// Δ = π, hints of opposite sign.
    Opposed,
}

impl PhaseDifference {
    pub fn radians(self) -> f64 {
        match self {
            Self::Aligned => 0.0,
            Self::Quadrature => FRAC_PI_2,
            Self::Opposed => PI,
        }
    }

    /// `cos Δ`, exact for the three rule outputs.
    pub fn cos(self) -> f64 {
        match self {
            Self::Aligned => 1.0,
            Self::Quadrature => 0.0,
            Self::Opposed => -1.0,
        }
    }
}

impl fmt::Display for PhaseDifference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Aligned => f.write_str("0"),
            Self::Quadrature => f.write_str("pi/2"),
            Self::Opposed => f.write_str("pi"),
        }
    }
}

/// The zero branch is an exact floating-point test: grid points on the axes
/// must land in it, and nothing else may.
pub fn phase_rule(h0: f64, h1: f64) -> Result<PhaseDifference> {
    let product = check_hint(h0)? * check_hint(h1)?;
    Ok(if product > 0.0 {
        PhaseDifference::Aligned
    } else if product < 0.0 {
        PhaseDifference::Opposed
    } else {
        PhaseDifference::Quadrature
    })
}

/// Single-qubit density matrix: Hermitian, unit trace, positive semidefinite
/// (all checked to within [`TOLERANCE`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix2,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix2) -> Result<Self> {
        if matrix.max_abs_diff(&matrix.adjoint()) > TOLERANCE {
            return Err(Error::DensityMatrix("not Hermitian"));
        }
        let state = Self { matrix };
        if (matrix.trace().re - 1.0).abs() > TOLERANCE {
            return Err(Error::DensityMatrix("trace is not 1"));
        }
        if state.eigenvalues()[0] < -TOLERANCE {
            return Err(Error::DensityMatrix("negative eigenvalue"));
        }
        Ok(state)
    }

    /// Computational basis state `|b⟩⟨b|`.
    pub fn basis(bit: bool) -> Self {
        let matrix = if bit {
            ComplexMatrix2::real([[0.0, 0.0], [0.0, 1.0]])
        } else {
            ComplexMatrix2::real([[1.0, 0.0], [0.0, 0.0]])
        };
        Self { matrix }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: ComplexMatrix2::real([[0.5, 0.0], [0.0, 0.5]]),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.get(0, 0).re;
        let d = self.get(1, 1).re;
        let b = self.get(0, 1).norm();
        let mid = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d).powi(2) + b * b).sqrt();
        [mid - half_gap, mid + half_gap]
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }
}

/// `U ρ U†`.
pub fn apply_unitary(gate: &UnitaryGate, state: &DensityMatrix) -> DensityMatrix {
    let u = *gate.matrix();
    DensityMatrix {
        matrix: u * state.matrix * u.adjoint(),
    }
}

/// Decays the coherences by `1 − gamma`, leaving populations untouched.
/// Equivalent to a phase flip applied with probability `gamma / 2`.
pub fn dephase(state: &DensityMatrix, gamma: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::DephasingRate(gamma));
    }
    let mut entries = *state.matrix.entries();
    let keep = 1.0 - gamma;
    entries[0][1] *= keep;
    entries[1][0] *= keep;
    Ok(DensityMatrix {
        matrix: ComplexMatrix2 { entries },
    })
}

/// Computational-basis readout probabilities `(P(0), P(1))`.
pub fn measure_probs(state: &DensityMatrix) -> (f64, f64) {
    (state.get(0, 0).re, state.get(1, 1).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_unitary(gate: &UnitaryGate) {
        let u = *gate.matrix();
        let product = u.adjoint() * u;
        assert!(product.max_abs_diff(&ComplexMatrix2::identity()) <= TOLERANCE);
    }

    fn assert_valid_state(rho: &DensityMatrix) {
        DensityMatrix::new(*rho.matrix()).expect("valid density matrix");
    }

    /// Arbitrary density matrix from a Bloch vector inside the unit ball.
    fn bloch_state(x: f64, y: f64, z: f64) -> DensityMatrix {
        let norm = (x * x + y * y + z * z).sqrt().max(1.0);
        let (x, y, z) = (x / norm, y / norm, z / norm);
        DensityMatrix::new(
            ComplexMatrix2::new([
                [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y)],
                [c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn unitary_identity_branch() {
        let gate = build_unitary(1.0, 0.0).unwrap();
        let expected = ComplexMatrix2::real([[1.0, 0.0], [0.0, -1.0]]);
        assert!(gate.matrix().max_abs_diff(&expected) <= TOLERANCE);
    }

    #[test]
    fn unitary_flip_branch() {
        let gate = build_unitary(0.0, 0.0).unwrap();
        let expected = ComplexMatrix2::real([[0.0, 1.0], [1.0, 0.0]]);
        assert!(gate.matrix().max_abs_diff(&expected) <= TOLERANCE);
    }

    #[test]
    fn unitary_half_with_quarter_phase() {
        let gate = build_unitary(0.5, FRAC_PI_2).unwrap();
        let r = 0.5f64.sqrt();
        let expected =
            ComplexMatrix2::new([[c(r, 0.0), c(0.0, r)], [c(0.0, -r), c(-r, 0.0)]]).unwrap();
        assert!(gate.matrix().max_abs_diff(&expected) <= TOLERANCE);
        assert_unitary(&gate);
    }

    #[test]
    fn unitary_rejects_bad_inputs() {
        assert!(matches!(build_unitary(1.5, 0.0), Err(Error::Probability(_))));
        assert!(matches!(build_unitary(-0.1, 0.0), Err(Error::Probability(_))));
        assert!(matches!(build_unitary(f64::NAN, 0.0), Err(Error::Probability(_))));
        assert!(matches!(build_unitary(0.5, f64::INFINITY), Err(Error::Phase(_))));
    }

    #[test]
    fn unitary_phase_is_reduced() {
        let gate = build_unitary(0.3, -FRAC_PI_2).unwrap();
        assert!((gate.phase() - 3.0 * FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn stochastic_examples() {
        assert_eq!(build_stochastic(1.0).unwrap().matrix(), &[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(build_stochastic(0.0).unwrap().matrix(), &[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(build_stochastic(0.75).unwrap().matrix(), &[[0.75, 0.25], [0.25, 0.75]]);
        assert!(matches!(build_stochastic(1.01), Err(Error::Probability(_))));
    }

    #[test]
    fn phase_rule_branches() {
        assert_eq!(phase_rule(0.3, 0.2).unwrap(), PhaseDifference::Aligned);
        assert_eq!(phase_rule(0.3, -0.2).unwrap(), PhaseDifference::Opposed);
        assert_eq!(phase_rule(0.0, 0.4).unwrap(), PhaseDifference::Quadrature);
        assert_eq!(phase_rule(-0.0, -0.4).unwrap(), PhaseDifference::Quadrature);
        assert_eq!(phase_rule(1e-300, 1e-300).unwrap(), PhaseDifference::Quadrature);
        assert_eq!(phase_rule(1e-200, 1e-100).unwrap(), PhaseDifference::Aligned);
        assert!(matches!(phase_rule(0.6, 0.0), Err(Error::Hint(_))));
        assert!(matches!(phase_rule(0.0, f64::NAN), Err(Error::Hint(_))));
    }

    #[test]
    fn phase_difference_values() {
        assert_eq!(PhaseDifference::Aligned.radians(), 0.0);
        assert_eq!(PhaseDifference::Quadrature.radians(), FRAC_PI_2);
        assert_eq!(PhaseDifference::Opposed.radians(), PI);
        for d in [
            PhaseDifference::Aligned,
            PhaseDifference::Quadrature,
            PhaseDifference::Opposed,
        ] {
            assert!((d.cos() - d.radians().cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn apply_unitary_examples() {
        let ground = DensityMatrix::basis(false);
        let out = apply_unitary(&build_unitary(1.0, 0.0).unwrap(), &ground);
        assert!(out.matrix().max_abs_diff(ground.matrix()) <= TOLERANCE);

        let out = apply_unitary(&build_unitary(0.0, 0.0).unwrap(), &ground);
        assert!(out.matrix().max_abs_diff(DensityMatrix::basis(true).matrix()) <= TOLERANCE);

        // Explicit product for p = 0.8: U|0⟩ = (√0.8, √0.2), so ρ = vv†.
        let out = apply_unitary(&build_unitary(0.8, 0.0).unwrap(), &ground);
        let v = [0.8f64.sqrt(), 0.2f64.sqrt()];
        let expected = ComplexMatrix2::real([[v[0] * v[0], v[0] * v[1]], [v[1] * v[0], v[1] * v[1]]]);
        assert!(out.matrix().max_abs_diff(&expected) <= TOLERANCE);
        assert!((out.get(0, 1).re - 0.4).abs() <= TOLERANCE);
        let (p0, p1) = measure_probs(&out);
        assert!((p0 - 0.8).abs() <= TOLERANCE && (p1 - 0.2).abs() <= TOLERANCE);
    }

    #[test]
    fn dephase_examples() {
        let rho = bloch_state(0.6, -0.3, 0.2);
        let same = dephase(&rho, 0.0).unwrap();
        assert_eq!(same, rho);

        let full = dephase(&rho, 1.0).unwrap();
        assert_eq!(full.get(0, 1), c(0.0, 0.0));
        assert_eq!(full.get(1, 0), c(0.0, 0.0));
        assert_eq!(full.get(0, 0), rho.get(0, 0));
        assert_eq!(full.get(1, 1), rho.get(1, 1));

        let plus = bloch_state(1.0, 0.0, 0.0);
        assert!((plus.get(0, 1).re - 0.5).abs() < 1e-15);
        let half = dephase(&plus, 0.5).unwrap();
        assert!((half.get(0, 1).re - 0.25).abs() <= TOLERANCE);

        assert!(matches!(dephase(&rho, 1.5), Err(Error::DephasingRate(_))));
        assert!(matches!(dephase(&rho, -0.1), Err(Error::DephasingRate(_))));
    }

    #[test]
    fn measure_examples() {
        assert_eq!(measure_probs(&DensityMatrix::basis(false)), (1.0, 0.0));
        assert_eq!(measure_probs(&DensityMatrix::maximally_mixed()), (0.5, 0.5));
    }

    #[test]
    fn density_matrix_validation() {
        let not_hermitian = ComplexMatrix2::new([[c(0.5, 0.0), c(0.1, 0.0)], [c(0.2, 0.0), c(0.5, 0.0)]]).unwrap();
        assert!(DensityMatrix::new(not_hermitian).is_err());
        let bad_trace = ComplexMatrix2::real([[0.6, 0.0], [0.0, 0.6]]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = ComplexMatrix2::real([[0.5, 0.8], [0.8, 0.5]]);
        assert!(DensityMatrix::new(negative).is_err());
        assert!(ComplexMatrix2::new([[c(f64::NAN, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]).is_err());
    }

    proptest! {
        #[test]
        fn unitary_for_all_parameters(p in 0.0f64..=1.0, phase in 0.0f64..TAU) {
            let gate = build_unitary(p, phase).unwrap();
            let u = *gate.matrix();
            prop_assert!((u.adjoint() * u).max_abs_diff(&ComplexMatrix2::identity()) <= TOLERANCE);
            prop_assert!((u.get(0, 0).norm_sqr() - p).abs() <= TOLERANCE);
        }

        #[test]
        fn stochastic_preserves_distributions(p in 0.0f64..=1.0, a in 0.0f64..=1.0) {
            let gate = build_stochastic(p).unwrap();
            let m = gate.matrix();
            prop_assert!(m.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
            prop_assert_eq!(m[0][1], m[1][0]);
            for (top, bottom) in m[0].iter().zip(&m[1]) {
                prop_assert!((top + bottom - 1.0).abs() <= TOLERANCE);
            }
            let out = gate.apply([a, 1.0 - a]);
            prop_assert!(out.iter().all(|x| (-TOLERANCE..=1.0 + TOLERANCE).contains(x)));
            prop_assert!((out[0] + out[1] - 1.0).abs() <= TOLERANCE);
        }

        #[test]
        fn unitary_action_preserves_state_invariants(
            p in 0.0f64..=1.0, phase in 0.0f64..TAU,
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
        ) {
            let rho = bloch_state(x, y, z);
            let out = apply_unitary(&build_unitary(p, phase).unwrap(), &rho);
            assert_valid_state(&out);
            prop_assert!((out.matrix().trace().re - 1.0).abs() <= TOLERANCE);
            prop_assert!((out.purity() - rho.purity()).abs() <= TOLERANCE);
            let (p0, p1) = measure_probs(&out);
            prop_assert!((p0 + p1 - 1.0).abs() <= TOLERANCE);
        }

        #[test]
        fn dephasing_composes_multiplicatively(
            g1 in 0.0f64..=1.0, g2 in 0.0f64..=1.0,
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
        ) {
            let rho = bloch_state(x, y, z);
            let twice = dephase(&dephase(&rho, g1).unwrap(), g2).unwrap();
            assert_valid_state(&twice);
            let expected = rho.get(0, 1) * ((1.0 - g1) * (1.0 - g2));
            prop_assert!((twice.get(0, 1) - expected).norm() <= TOLERANCE);
            prop_assert_eq!(twice.get(0, 0), rho.get(0, 0));

            let full = dephase(&rho, 1.0).unwrap();
            prop_assert_eq!(dephase(&full, 1.0).unwrap(), full);
        }

        #[test]
        fn dephasing_matches_phase_flip_mixture(
            gamma in 0.0f64..=1.0,
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
        ) {
            let rho = bloch_state(x, y, z);
            let pauli_z = ComplexMatrix2::real([[1.0, 0.0], [0.0, -1.0]]);
            let flipped = pauli_z * *rho.matrix() * pauli_z;
            let keep = Complex64::new(1.0 - gamma / 2.0, 0.0);
            let flip = Complex64::new(gamma / 2.0, 0.0);
            let mut mix = rho.matrix().scale(keep);
            let flipped = flipped.scale(flip);
            let mut entries = *mix.entries();
            for (r, row) in entries.iter_mut().enumerate() {
                for (col, entry) in row.iter_mut().enumerate() {
                    *entry += flipped.get(r, col);
                }
            }
            mix = ComplexMatrix2::new(entries).unwrap();
            let out = dephase(&rho, gamma).unwrap();
            prop_assert!(out.matrix().max_abs_diff(&mix) <= TOLERANCE);
        }
    }
}
