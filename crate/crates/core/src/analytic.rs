//! Closed-form payoffs for both machines, plus an enumeration oracle that
//! reaches the same numbers without any of the closed forms.
//!
//! With preferences `p_j = 1/2 + h_j` the guess probabilities are
//!
//! ```text
//! P(y0 = 0) = 1/2 + h0
//! P(y1 = 0) = 1/2 + 2·h0·h1                       (classical)
//! P(y1 = 0) = 1/2 + 2·h0·h1 + (1 − γ)·Γ·cos Δ     (quantum)
//! Γ = 2·√((1/4 − h0²)(1/4 − h1²))
//! ```
//!
//! and a payoff is `ξ/2 · Σ_κ (P(y_κ = x_κ) − P(y_κ ≠ x_κ))`.

use crate::error::{Error, Result};
use crate::game::{self, Guess, HintVector, ScoreTable, SecretBits, TauCase};
use crate::machines::MachineKind;
use crate::qcore::{self, DensityMatrix, PhaseDifference};
use crate::TOLERANCE;

fn check_rate(gamma_rate: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&gamma_rate) {
        Ok(gamma_rate)
    } else {
        Err(Error::DephasingRate(gamma_rate))
    }
}

/// Interference magnitude `Γ(h) ∈ [0, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GammaValue(f64);

impl GammaValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn gamma(h: &HintVector) -> GammaValue {
    let a = 0.25 - h.h0() * h.h0();
    let b = 0.25 - h.h1() * h.h1();
    GammaValue(2.0 * (a * b).sqrt())
}

/// Probabilities of each guess value on each card.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessProbabilities {
    pub y0_zero: f64,
    pub y0_one: f64,
    pub y1_zero: f64,
    pub y1_one: f64,
}

impl GuessProbabilities {
    fn from_zeros(y0_zero: f64, y1_zero: f64) -> Self {
        Self {
            y0_zero,
            y0_one: 1.0 - y0_zero,
            y1_zero,
            y1_one: 1.0 - y1_zero,
        }
    }

    /// `P(y_κ = x_κ)` for card `kappa`.
    pub fn correct(&self, kappa: usize, secrets: &SecretBits) -> f64 {
        let (zero, one) = match kappa {
            0 => (self.y0_zero, self.y0_one),
            1 => (self.y1_zero, self.y1_one),
            _ => panic!("card index {kappa} out of range"),
        };
        if secrets.get(kappa) {
            one
        } else {
            zero
        }
    }

    /// Bob's average payoff against fixed secrets.
    pub fn payoff(&self, secrets: &SecretBits, table: &ScoreTable) -> f64 {
        let half = 0.5 * table.xi();
        (0..2)
            .map(|k| {
                let right = self.correct(k, secrets);
                half * (right - (1.0 - right))
            })
            .sum()
    }
}

pub fn classical_probs(h: &HintVector) -> GuessProbabilities {
    GuessProbabilities::from_zeros(0.5 + h.h0(), 0.5 + 2.0 * h.h0() * h.h1())
}

pub fn quantum_probs(h: &HintVector, delta: PhaseDifference, gamma_rate: f64) -> Result<GuessProbabilities> {
    interference_probs(h, delta.cos(), gamma_rate)
}

/// Quantum probabilities for an arbitrary relative phase `delta` (radians).
pub fn quantum_probs_at_phase(h: &HintVector, delta: f64, gamma_rate: f64) -> Result<GuessProbabilities> {
    if !delta.is_finite() {
        return Err(Error::Phase(delta));
    }
    interference_probs(h, delta.cos(), gamma_rate)
}

fn interference_probs(h: &HintVector, cos_delta: f64, gamma_rate: f64) -> Result<GuessProbabilities> {
    let keep = 1.0 - check_rate(gamma_rate)?;
    let y1_zero = 0.5 + 2.0 * h.h0() * h.h1() + keep * gamma(h).value() * cos_delta;
    let probs = GuessProbabilities::from_zeros(0.5 + h.h0(), y1_zero);
    for p in [probs.y0_zero, probs.y0_one, probs.y1_zero, probs.y1_one] {
        assert!(
            (-TOLERANCE..=1.0 + TOLERANCE).contains(&p),
            "quantum guess probability {p} outside [0, 1] for {h:?}"
        );
    }
    Ok(probs)
}

/// Classical payoff (ξ = 1) against the secrets that `tau` guesses
/// perfectly.
pub fn xi_bar_classical(h: &HintVector, tau: TauCase) -> f64 {
    let (h0, h1) = (h.h0(), h.h1());
    match tau {
        TauCase::Tau1 => h0 + 2.0 * h0 * h1,
        TauCase::Tau2 => h0 - 2.0 * h0 * h1,
        TauCase::Tau3 => -h0 - 2.0 * h0 * h1,
        TauCase::Tau4 => -h0 + 2.0 * h0 * h1,
    }
}

/// Quantum payoff (ξ = 1) against the secrets that `tau` guesses perfectly.
/// The interference term enters with `+` when `x1 = 0` (τ1, τ4) and `−`
/// when `x1 = 1` (τ2, τ3).
pub fn xi_bar_quantum(h: &HintVector, tau: TauCase, delta: PhaseDifference, gamma_rate: f64) -> Result<f64> {
    let keep = 1.0 - check_rate(gamma_rate)?;
    let sign = match tau {
        TauCase::Tau1 | TauCase::Tau4 => 1.0,
        TauCase::Tau2 | TauCase::Tau3 => -1.0,
    };
    Ok(xi_bar_classical(h, tau) + sign * keep * gamma(h).value() * delta.cos())
}

/// Expected score of one machine against fixed secrets, from the guess
/// probabilities. The quantum machine uses the phase rule for `Δ`; the
/// classical machine ignores `gamma_rate` beyond range-checking it.
pub fn expected_score(
    kind: MachineKind,
    h: &HintVector,
    secrets: &SecretBits,
    gamma_rate: f64,
    table: &ScoreTable,
) -> Result<f64> {
    let probs = match kind {
        MachineKind::Classical => {
            check_rate(gamma_rate)?;
            classical_probs(h)
        }
        MachineKind::Quantum => quantum_probs(h, h.phase_difference(), gamma_rate)?,
    };
    Ok(probs.payoff(secrets, table))
}

/// Average over Alice choosing her secrets uniformly at random.
pub fn uniform_alice_average(kind: MachineKind, h: &HintVector, gamma_rate: f64, table: &ScoreTable) -> Result<f64> {
    let total = SecretBits::all()
        .iter()
        .map(|x| expected_score(kind, h, x, gamma_rate, table))
        .sum::<Result<f64>>()?;
    Ok(total / 4.0)
}

/// Exact expected score by direct enumeration.
///
/// Classical: sums over the four deterministic `(u0, u1)` pairs weighted by
/// their preference products, scoring each with the game rules. Quantum:
/// runs both card pipelines through the density-matrix primitives.
pub fn brute_force_oracle(
    kind: MachineKind,
    h: &HintVector,
    secrets: &SecretBits,
    gamma_rate: f64,
    table: &ScoreTable,
) -> Result<f64> {
    check_rate(gamma_rate)?;
    let (p0, p1) = game::preferences_from_hint(h);
    match kind {
        MachineKind::Classical => Ok(TauCase::ALL
            .iter()
            .map(|&tau| {
                let w0 = if tau.u0() == game::Op::Identity { p0 } else { 1.0 - p0 };
                let w1 = if tau.u1() == game::Op::Identity { p1 } else { 1.0 - p1 };
                let guess = Guess::new(tau.outcome(0, false), tau.outcome(1, false));
                w0 * w1 * game::score(secrets, &guess, table)
            })
            .sum()),
        MachineKind::Quantum => {
            let u0 = qcore::build_unitary(p0, 0.0)?;
            let u1 = qcore::build_unitary(p1, qcore::phase_rule(h.h0(), h.h1())?.radians())?;
            let after_u0 = qcore::apply_unitary(&u0, &DensityMatrix::basis(false));
            let card1 = qcore::apply_unitary(&u1, &qcore::dephase(&after_u0, gamma_rate)?);
            let readouts = [qcore::measure_probs(&after_u0), qcore::measure_probs(&card1)];
            let half = 0.5 * table.xi();
            Ok(readouts
                .iter()
                .enumerate()
                .map(|(k, &(zero, one))| {
                    let (right, wrong) = if secrets.get(k) { (one, zero) } else { (zero, one) };
                    half * (right - wrong)
                })
                .sum())
        }
    }
}

/// Both machines' payoffs at one hint for one `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffSurfacePoint {
    pub h0: f64,
    pub h1: f64,
    pub tau: TauCase,
    pub xi_bar_c: f64,
    pub xi_bar_q: f64,
}

pub fn payoff_surface_point(h: &HintVector, tau: TauCase, gamma_rate: f64) -> Result<PayoffSurfacePoint> {
    let point = PayoffSurfacePoint {
        h0: h.h0(),
        h1: h.h1(),
        tau,
        xi_bar_c: xi_bar_classical(h, tau),
        xi_bar_q: xi_bar_quantum(h, tau, h.phase_difference(), gamma_rate)?,
    };
    debug_assert!((point.xi_bar_q - point.xi_bar_c).abs() <= gamma(h).value() + TOLERANCE);
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{classify_hint, correct_tau, symmetric_hint, HintQuality};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn hint(h0: f64, h1: f64) -> HintVector {
        HintVector::new(h0, h1).unwrap()
    }

    fn unit() -> ScoreTable {
        ScoreTable::default()
    }

    const X00: SecretBits = SecretBits::new(false, false);

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOLERANCE
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&hint(0.0, 0.0)).value(), 0.5);
        assert_eq!(gamma(&hint(0.5, 0.2)).value(), 0.0);
        // 2·√(0.24·0.21) = 2·√0.0504
        assert!(close(gamma(&hint(0.1, 0.2)).value(), 0.448_998_886_412_873));
        // Interference amplitude from the preferences directly.
        let (p0, p1): (f64, f64) = (0.6, 0.7);
        let amp = 2.0 * (p0 * (1.0 - p0) * p1 * (1.0 - p1)).sqrt();
        assert!(close(gamma(&hint(0.1, 0.2)).value(), amp));
    }

    #[test]
    fn classical_probability_examples() {
        let p = classical_probs(&hint(0.0, 0.0));
        assert_eq!([p.y0_zero, p.y0_one, p.y1_zero, p.y1_one], [0.5; 4]);
        let p = classical_probs(&hint(0.5, 0.5));
        assert_eq!((p.y0_zero, p.y1_zero), (1.0, 1.0));

        // Enumerate the four pairs: y1 = 0 iff u0 and u1 agree.
        let (p0, p1) = (0.8, 0.3);
        let y1_zero = p0 * p1 + (1.0 - p0) * (1.0 - p1);
        let p = classical_probs(&hint(0.3, -0.2));
        assert!(close(p.y0_zero, 0.8));
        assert!(close(p.y1_zero, y1_zero));
        assert!(close(p.y1_zero, 0.38));
    }

    #[test]
    fn quantum_probability_examples() {
        let p = quantum_probs(&hint(0.0, 0.0), PhaseDifference::Quadrature, 0.0).unwrap();
        assert_eq!(p.y1_zero, 0.5);
        let p = quantum_probs(&hint(0.3, 0.3), PhaseDifference::Aligned, 0.0).unwrap();
        assert!(close(p.y1_zero, 1.0));
        let p = quantum_probs(&hint(0.3, 0.3), PhaseDifference::Aligned, 0.5).unwrap();
        assert!(close(p.y1_zero, 0.84));
        assert!(quantum_probs(&hint(0.3, 0.3), PhaseDifference::Aligned, 2.0).is_err());
    }

    #[test]
    fn xi_bar_classical_examples() {
        assert!(close(xi_bar_classical(&hint(0.3, 0.3), TauCase::Tau1), 0.48));
        for tau in TauCase::ALL {
            assert_eq!(xi_bar_classical(&hint(0.0, 0.0), tau), 0.0);
        }
        // x = (1, 1) is the all-wrong secret pair for h = (0.3, 0.3).
        assert!(close(xi_bar_classical(&hint(0.3, 0.3), TauCase::Tau3), -0.48));
        // x = (1, 0): brute force over pairs gives −0.16 + 0.04.
        assert!(close(xi_bar_classical(&hint(0.3, 0.3), TauCase::Tau4), -0.12));
    }

    #[test]
    fn xi_bar_matches_payoff_definition() {
        for &(h0, h1) in &[(0.3, 0.3), (-0.2, 0.45), (0.1, -0.4), (0.0, 0.25)] {
            let h = hint(h0, h1);
            for tau in TauCase::ALL {
                let x = tau.secrets();
                let c = classical_probs(&h).payoff(&x, &unit());
                assert!(close(xi_bar_classical(&h, tau), c), "{tau} at {h:?}");
                for g in [0.0, 0.3, 1.0] {
                    let q = quantum_probs(&h, h.phase_difference(), g).unwrap().payoff(&x, &unit());
                    assert!(close(xi_bar_quantum(&h, tau, h.phase_difference(), g).unwrap(), q));
                }
            }
        }
    }

    #[test]
    fn xi_bar_quantum_examples() {
        let h = hint(0.3, 0.3);
        assert!(close(xi_bar_quantum(&h, TauCase::Tau1, PhaseDifference::Aligned, 0.0).unwrap(), 0.80));
        assert!(close(xi_bar_quantum(&h, TauCase::Tau1, PhaseDifference::Aligned, 1.0).unwrap(), 0.48));
        let h = hint(0.3, -0.3);
        assert!(close(xi_bar_quantum(&h, TauCase::Tau2, PhaseDifference::Opposed, 0.0).unwrap(), 0.80));
    }

    #[test]
    fn expected_score_examples() {
        let q = expected_score(MachineKind::Quantum, &hint(0.3, 0.3), &X00, 0.0, &unit()).unwrap();
        assert!(close(q, 0.80));
        let c = expected_score(MachineKind::Classical, &hint(0.5, 0.5), &X00, 0.0, &unit()).unwrap();
        assert_eq!(c, 1.0);
        // |h| + 2h² + Γ with Γ(0.01, 0.01) = 2·(0.25 − 0.0001).
        let q = expected_score(MachineKind::Quantum, &hint(0.01, 0.01), &X00, 0.0, &unit()).unwrap();
        assert!(close(q, 0.01 + 0.0002 + 0.4998));
        let scaled = expected_score(MachineKind::Quantum, &hint(0.3, 0.3), &X00, 0.0, &ScoreTable::new(2.0).unwrap()).unwrap();
        assert!(close(scaled, 1.6));
    }

    #[test]
    fn best_and_worst_payoffs() {
        // Good hints reach |h0| + 2|h0 h1| (+Γ quantum); Poor hints the negatives (−Γ quantum).
        for &(a, b) in &[(0.3, 0.3), (0.1, 0.4), (0.45, 0.05)] {
            for x in SecretBits::all() {
                let tau = correct_tau(&x);
                let good = hint(tau.u0().sign() * a, tau.u1().sign() * b);
                let poor = hint(-tau.u0().sign() * a, tau.u1().sign() * b);
                assert_eq!(classify_hint(&good, &x), HintQuality::Good);
                assert_eq!(classify_hint(&poor, &x), HintQuality::Poor);
                let g = gamma(&good).value();
                let best = a + 2.0 * a * b;
                let score = |k, h: &HintVector| expected_score(k, h, &x, 0.0, &unit()).unwrap();
                assert!(close(score(MachineKind::Classical, &good), best));
                assert!(close(score(MachineKind::Quantum, &good), best + g));
                assert!(close(score(MachineKind::Classical, &poor), -best));
                assert!(close(score(MachineKind::Quantum, &poor), -best - g));
            }
        }
    }

    #[test]
    fn uniform_alice_examples() {
        let t = unit();
        assert!(uniform_alice_average(MachineKind::Classical, &hint(0.3, 0.3), 0.0, &t).unwrap().abs() <= TOLERANCE);
        assert!(uniform_alice_average(MachineKind::Quantum, &hint(0.3, 0.3), 0.0, &t).unwrap().abs() <= TOLERANCE);
        assert!(uniform_alice_average(MachineKind::Quantum, &hint(0.1, -0.4), 0.3, &t).unwrap().abs() <= TOLERANCE);
    }

    #[test]
    fn oracle_examples() {
        let t = unit();
        assert_eq!(brute_force_oracle(MachineKind::Classical, &hint(0.5, 0.5), &X00, 0.0, &t).unwrap(), 1.0);
        for &(h0, h1) in &[(0.2, 0.1), (-0.3, 0.4), (0.0, -0.2)] {
            let h = hint(h0, h1);
            for x in SecretBits::all() {
                let q = brute_force_oracle(MachineKind::Quantum, &h, &x, 1.0, &t).unwrap();
                let c = brute_force_oracle(MachineKind::Classical, &h, &x, 0.0, &t).unwrap();
                assert!(close(q, c));
            }
        }
    }

    #[test]
    fn symmetric_discontinuity_limit() {
        let t = unit();
        let gap = |kind, eps: f64| {
            let good = symmetric_hint(eps, &X00).unwrap();
            let poor = symmetric_hint(-eps, &X00).unwrap();
            expected_score(kind, &good, &X00, 0.0, &t).unwrap() - expected_score(kind, &poor, &X00, 0.0, &t).unwrap()
        };
        for eps in [1e-3, 1e-6, 1e-9] {
            assert!((gap(MachineKind::Quantum, eps) - 2.0 * gamma(&HintVector::zero()).value()).abs() < 10.0 * eps);
            assert!(gap(MachineKind::Classical, eps).abs() < 10.0 * eps);
        }
        assert_eq!(expected_score(MachineKind::Quantum, &HintVector::zero(), &X00, 0.0, &t).unwrap(), 0.0);
    }

    #[test]
    fn quantum_grid_changes_sign_across_axes() {
        let t = unit();
        let diff = |h0, h1| {
            let h = hint(h0, h1);
            expected_score(MachineKind::Quantum, &h, &X00, 0.0, &t).unwrap()
                - expected_score(MachineKind::Classical, &h, &X00, 0.0, &t).unwrap()
        };
        for &(a, b) in &[(0.1, 0.2), (0.3, 0.05), (0.49, 0.49)] {
            assert!(diff(a, b) > 0.0);
            assert!(diff(-a, b) < 0.0);
            assert!(diff(-a, -b) > 0.0);
            assert!(diff(a, -b) < 0.0);
        }
    }

    proptest! {
        #[test]
        fn gamma_bounds(h0 in -0.5f64..=0.5, h1 in -0.5f64..=0.5) {
            let g = gamma(&hint(h0, h1)).value();
            prop_assert!((0.0..=0.5).contains(&g));
        }

        #[test]
        fn quantum_classical_gap_bounded_by_gamma(
            h0 in -0.5f64..=0.5, h1 in -0.5f64..=0.5, g in 0.0f64..=1.0, x0: bool, x1: bool,
        ) {
            let h = hint(h0, h1);
            let x = SecretBits::new(x0, x1);
            let q = expected_score(MachineKind::Quantum, &h, &x, g, &unit()).unwrap();
            let c = expected_score(MachineKind::Classical, &h, &x, g, &unit()).unwrap();
            prop_assert!((q - c).abs() <= gamma(&h).value() + TOLERANCE);
            for tau in TauCase::ALL {
                let point = payoff_surface_point(&h, tau, g).unwrap();
                prop_assert!((point.xi_bar_q - point.xi_bar_c).abs() <= gamma(&h).value() + TOLERANCE);
            }
        }

        #[test]
        fn operation_flip_symmetry(
            h0 in -0.5f64..=0.5, h1 in -0.5f64..=0.5, g in 0.0f64..=1.0, x0: bool, x1: bool,
        ) {
            let x = SecretBits::new(x0, x1);
            for kind in MachineKind::ALL {
                let s = expected_score(kind, &hint(h0, h1), &x, g, &unit()).unwrap();
                let u0_flip = expected_score(kind, &hint(-h0, h1), &x.complement(), g, &unit()).unwrap();
                let u1_flip = expected_score(kind, &hint(h0, -h1), &SecretBits::new(x0, !x1), g, &unit()).unwrap();
                prop_assert!(close(s, u0_flip));
                prop_assert!(close(s, u1_flip));
            }
        }

        #[test]
        fn decoherence_is_affine(
            h0 in -0.5f64..=0.5, h1 in -0.5f64..=0.5, g in 0.0f64..=1.0, x0: bool, x1: bool,
        ) {
            let h = hint(h0, h1);
            let x = SecretBits::new(x0, x1);
            let at = |g| expected_score(MachineKind::Quantum, &h, &x, g, &unit()).unwrap();
            let sign = if x1 { -1.0 } else { 1.0 };
            let slope = -sign * gamma(&h).value() * h.phase_difference().cos();
            prop_assert!(close(at(g), at(0.0) + slope * g));
        }

        #[test]
        fn uniform_alice_is_null(h0 in -0.5f64..=0.5, h1 in -0.5f64..=0.5, g in 0.0f64..=1.0) {
            for kind in MachineKind::ALL {
                prop_assert!(uniform_alice_average(kind, &hint(h0, h1), g, &unit()).unwrap().abs() <= TOLERANCE);
            }
        }

        #[test]
        fn oracle_agrees_with_closed_forms(
            h0 in -0.5f64..=0.5, h1 in -0.5f64..=0.5, g in 0.0f64..=1.0, x0: bool, x1: bool, xi in 0.1f64..5.0,
        ) {
            let h = hint(h0, h1);
            let x = SecretBits::new(x0, x1);
            let t = ScoreTable::new(xi).unwrap();
            for kind in MachineKind::ALL {
                let a = expected_score(kind, &h, &x, g, &t).unwrap();
                let b = brute_force_oracle(kind, &h, &x, g, &t).unwrap();
                prop_assert!((a - b).abs() <= TOLERANCE * xi.max(1.0));
            }
        }

        #[test]
        fn phase_rule_maximizes_good_hint_payoff(
            a in 0.001f64..0.499, b in 0.001f64..0.499, x0: bool, x1: bool,
        ) {
            let x = SecretBits::new(x0, x1);
            let tau = correct_tau(&x);
            let h = hint(tau.u0().sign() * a, tau.u1().sign() * b);
            let chosen = expected_score(MachineKind::Quantum, &h, &x, 0.0, &unit()).unwrap();
            for i in 0..64 {
                let delta = TAU * i as f64 / 64.0;
                let other = quantum_probs_at_phase(&h, delta, 0.0).unwrap().payoff(&x, &unit());
                prop_assert!(other <= chosen + TOLERANCE);
            }
            let at_pi = quantum_probs_at_phase(&h, PI, 0.0).unwrap().payoff(&x, &unit());
            prop_assert!(at_pi <= chosen + TOLERANCE);
        }
    }
}
