//! Rules of the secret-bit guessing game.
//!
//! Alice holds secrets `(x0, x1)`. For each card `κ`, Bob's machine sends a
//! fiducial bit `α` through `u0` and, only when `κ = 1`, then through `u1`;
//! the readout `m_κ` gives the guess `y_κ = m_κ ⊕ α`. Each correct guess
//! earns `ξ/2`, each wrong one costs `ξ/2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::qcore::{self, PhaseDifference};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SecretBits {
    pub x0: bool,
    pub x1: bool,
}

impl SecretBits {
    pub const fn new(x0: bool, x1: bool) -> Self {
        Self { x0, x1 }
    }

    /// All four secret pairs in order 00, 01, 10, 11.
    pub const fn all() -> [SecretBits; 4] {
        [
            Self::new(false, false),
            Self::new(false, true),
            Self::new(true, false),
            Self::new(true, true),
        ]
    }

    pub fn get(&self, kappa: usize) -> bool {
        match kappa {
            0 => self.x0,
            1 => self.x1,
            _ => panic!("card index {kappa} out of range"),
        }
    }

    /// Both bits flipped.
    pub fn complement(&self) -> Self {
        Self::new(!self.x0, !self.x1)
    }
}

impl fmt::Display for SecretBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", u8::from(self.x0), u8::from(self.x1))
    }
}

impl FromStr for SecretBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(Self::new(false, false)),
            "01" => Ok(Self::new(false, true)),
            "10" => Ok(Self::new(true, false)),
            "11" => Ok(Self::new(true, true)),
            other => Err(Error::Config(format!("secrets must be 00, 01, 10 or 11, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Guess {
    pub y0: bool,
    pub y1: bool,
}

impl Guess {
    pub const fn new(y0: bool, y1: bool) -> Self {
        Self { y0, y1 }
    }

    pub fn get(&self, kappa: usize) -> bool {
        match kappa {
            0 => self.y0,
            1 => self.y1,
            _ => panic!("card index {kappa} out of range"),
        }
    }

    pub fn flipped(&self) -> Self {
        Self::new(!self.y0, !self.y1)
    }
}

/// Hint vector `(h0, h1)`, each component in `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HintVector {
    h0: f64,
    h1: f64,
}

impl HintVector {
    pub fn new(h0: f64, h1: f64) -> Result<Self> {
        for h in [h0, h1] {
            if !(-0.5..=0.5).contains(&h) {
                return Err(Error::Hint(h));
            }
        }
        // Normalize -0.0 so that emitted values never carry a sign on zero.
        Ok(Self { h0: h0 + 0.0, h1: h1 + 0.0 })
    }

    pub const fn zero() -> Self {
        Self { h0: 0.0, h1: 0.0 }
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn get(&self, j: usize) -> f64 {
        match j {
            0 => self.h0,
            1 => self.h1,
            _ => panic!("operation index {j} out of range"),
        }
    }

    pub fn phase_difference(&self) -> PhaseDifference {
        qcore::phase_rule(self.h0, self.h1).expect("hint vector is range-checked")
    }
}

/// Operation preferences `P(u_j → 𝟙) = 1/2 + h_j`.
pub fn preferences_from_hint(h: &HintVector) -> (f64, f64) {
    (0.5 + h.h0, 0.5 + h.h1)
}

/// A deterministic operation on the ancilla bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Identity,
    Not,
}

impl Op {
    pub fn apply(self, bit: bool) -> bool {
        match self {
            Op::Identity => bit,
            Op::Not => !bit,
        }
    }

    /// +1 for the identity, −1 for NOT.
    pub fn sign(self) -> f64 {
        match self {
            Op::Identity => 1.0,
            Op::Not => -1.0,
        }
    }
}

/// The four deterministic `(u0, u1)` pairs and the guess function each one
/// realizes with `α = 0`:
///
/// | τ | (u0, u1) | guesses (y0, y1) |
/// |---|----------|------------------|
/// | 1 | (𝟙, 𝟙)   | (0, 0)           |
/// | 2 | (𝟙, X)   | (0, 1)           |
/// | 3 | (X, 𝟙)   | (1, 1)           |
/// | 4 | (X, X)   | (1, 0)           |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TauCase {
    Tau1,
    Tau2,
    Tau3,
    Tau4,
}

impl TauCase {
    pub const ALL: [TauCase; 4] = [TauCase::Tau1, TauCase::Tau2, TauCase::Tau3, TauCase::Tau4];

    pub fn from_ops(u0: Op, u1: Op) -> Self {
        match (u0, u1) {
            (Op::Identity, Op::Identity) => TauCase::Tau1,
            (Op::Identity, Op::Not) => TauCase::Tau2,
            (Op::Not, Op::Identity) => TauCase::Tau3,
            (Op::Not, Op::Not) => TauCase::Tau4,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            TauCase::Tau1 => 1,
            TauCase::Tau2 => 2,
            TauCase::Tau3 => 3,
            TauCase::Tau4 => 4,
        }
    }

    pub fn u0(self) -> Op {
        match self {
            TauCase::Tau1 | TauCase::Tau2 => Op::Identity,
            TauCase::Tau3 | TauCase::Tau4 => Op::Not,
        }
    }

    pub fn u1(self) -> Op {
        match self {
            TauCase::Tau1 | TauCase::Tau3 => Op::Identity,
            TauCase::Tau2 | TauCase::Tau4 => Op::Not,
        }
    }

    /// Ancilla readout for card `kappa` starting from bit `alpha`.
    pub fn outcome(self, kappa: usize, alpha: bool) -> bool {
        let after_u0 = self.u0().apply(alpha);
        match kappa {
            0 => after_u0,
            1 => self.u1().apply(after_u0),
            _ => panic!("card index {kappa} out of range"),
        }
    }

    /// Guess function `f_τ(κ)`, independent of `α`.
    pub fn guess_fn(self, kappa: usize) -> bool {
        self.outcome(kappa, false)
    }

    /// The secrets this pair guesses perfectly.
    pub fn secrets(self) -> SecretBits {
        SecretBits::new(self.guess_fn(0), self.guess_fn(1))
    }
}

impl fmt::Display for TauCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau{}", self.index())
    }
}

/// Score scale `ξ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTable {
    xi: f64,
}

impl ScoreTable {
    pub fn new(xi: f64) -> Result<Self> {
        if xi > 0.0 && xi.is_finite() {
            Ok(Self { xi })
        } else {
            Err(Error::Config(format!("score scale must be positive and finite, got {xi}")))
        }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

impl Default for ScoreTable {
    fn default() -> Self {
        Self { xi: 1.0 }
    }
}

/// Bob's score: `+ξ/2` per correct guess, `−ξ/2` per wrong one.
pub fn score(secrets: &SecretBits, guess: &Guess, table: &ScoreTable) -> f64 {
    let half = 0.5 * table.xi;
    (0..2)
        .map(|k| if guess.get(k) == secrets.get(k) { half } else { -half })
        .sum()
}

/// The unique pair `(u0, u1)` whose deterministic guesses equal `secrets`.
pub fn correct_tau(secrets: &SecretBits) -> TauCase {
    let u0 = if secrets.x0 { Op::Not } else { Op::Identity };
    let u1 = if secrets.x0 == secrets.x1 { Op::Identity } else { Op::Not };
    TauCase::from_ops(u0, u1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HintQuality {
    /// Both components push toward the pair that guesses everything right.
    Good,
    /// Both components push toward the pair that guesses everything wrong.
    Poor,
    Mixed,
    /// No hint at all.
    Neutral,
}

/// Classifies a hint against the secrets.
///
/// With signs `s_j = ±1` for the correct operations, the hint is Good when
/// `s0·h0 > 0` and `s1·h1 > 0`. The all-wrong pair differs from the correct
/// one in `u0` only (flipping `u0` flips both readouts), so the hint is Poor
/// when `s0·h0 < 0` and `s1·h1 > 0`.
pub fn classify_hint(h: &HintVector, secrets: &SecretBits) -> HintQuality {
    if h.h0 == 0.0 && h.h1 == 0.0 {
        return HintQuality::Neutral;
    }
    let tau = correct_tau(secrets);
    let a = tau.u0().sign() * h.h0;
    let b = tau.u1().sign() * h.h1;
    match (a, b) {
        (a, b) if a > 0.0 && b > 0.0 => HintQuality::Good,
        (a, b) if a < 0.0 && b > 0.0 => HintQuality::Poor,
        _ => HintQuality::Mixed,
    }
}

/// Hint on the symmetric diagonal for `secrets`: `h > 0` points along the
/// Good diagonal, `h < 0` along the Poor one, with `|h0| = |h1| = |h|`.
pub fn symmetric_hint(h: f64, secrets: &SecretBits) -> Result<HintVector> {
    let tau = correct_tau(secrets);
    let (s0, s1) = (tau.u0().sign(), tau.u1().sign());
    HintVector::new(s0 * h, s1 * h.abs())
}
