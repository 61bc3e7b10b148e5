//! The two decision-making machines.
//!
//! The classical machine draws `(u0, u1)` once per game from the hint
//! preferences and runs both cards through that deterministic pair. The
//! quantum machine prepares `|α⟩` separately for each card, applies `û0`
//! (and, for card 1, optional dephasing then `û1`), and samples a readout.
//! Both are immutable after construction; randomness is passed in.

mod rng;

pub use rng::{derive_seed, RngStream};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::game::{self, Guess, HintVector, Op, ScoreTable, SecretBits, TauCase};
use crate::qcore::{self, DensityMatrix, PhaseDifference, UnitaryGate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MachineKind {
    Classical,
    Quantum,
}

impl MachineKind {
    pub const ALL: [MachineKind; 2] = [MachineKind::Classical, MachineKind::Quantum];

    /// Short tag used in CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            MachineKind::Classical => "cdm",
            MachineKind::Quantum => "qdm",
        }
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MachineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cdm" => Ok(MachineKind::Classical),
            "qdm" => Ok(MachineKind::Quantum),
            other => Err(Error::Config(format!("unknown machine {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineConfig {
    pub hint: HintVector,
    pub alpha: bool,
    /// Dephasing rate between `û0` and `û1`. Must be zero for the classical machine.
    pub gamma: f64,
    pub table: ScoreTable,
}

impl MachineConfig {
    pub fn new(hint: HintVector) -> Self {
        Self {
            hint,
            alpha: false,
            gamma: 0.0,
            table: ScoreTable::default(),
        }
    }

    pub fn with_alpha(mut self, alpha: bool) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_table(mut self, table: ScoreTable) -> Self {
        self.table = table;
        self
    }

    pub fn validate(&self, kind: MachineKind) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::DephasingRate(self.gamma));
        }
        if kind == MachineKind::Classical && self.gamma != 0.0 {
            return Err(Error::Config(format!(
                "the classical machine has no coherence to dephase (gamma = {})",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameResult {
    pub m0: bool,
    pub m1: bool,
    pub guess: Guess,
    pub score: f64,
    /// The deterministic pair drawn by the classical machine.
    pub sampled_tau: Option<TauCase>,
}

impl GameResult {
    fn from_readouts(
        m0: bool,
        m1: bool,
        alpha: bool,
        secrets: &SecretBits,
        table: &ScoreTable,
        sampled_tau: Option<TauCase>,
    ) -> Self {
        let guess = Guess::new(m0 ^ alpha, m1 ^ alpha);
        Self {
            m0,
            m1,
            guess,
            score: game::score(secrets, &guess, table),
            sampled_tau,
        }
    }
}

pub trait DecisionMachine {
    fn kind(&self) -> MachineKind;

    fn config(&self) -> &MachineConfig;

    fn play(&self, secrets: &SecretBits, rng: &mut RngStream) -> GameResult;
}

#[derive(Debug, Clone)]
pub struct ClassicalMachine {
    config: MachineConfig,
    p_identity: (f64, f64),
}

impl ClassicalMachine {
    pub fn new(config: MachineConfig) -> Result<Self> {
        config.validate(MachineKind::Classical)?;
        Ok(Self {
            p_identity: game::preferences_from_hint(&config.hint),
            config,
        })
    }

    /// Draws the deterministic pair for one game: `u0` first, then `u1`.
    pub fn sample_tau(&self, rng: &mut RngStream) -> TauCase {
        let pick = |p: f64, rng: &mut RngStream| if rng.bernoulli(p) { Op::Identity } else { Op::Not };
        let u0 = pick(self.p_identity.0, rng);
        let u1 = pick(self.p_identity.1, rng);
        TauCase::from_ops(u0, u1)
    }
}

impl DecisionMachine for ClassicalMachine {
    fn kind(&self) -> MachineKind {
        MachineKind::Classical
    }

    fn config(&self) -> &MachineConfig {
        &self.config
    }

    fn play(&self, secrets: &SecretBits, rng: &mut RngStream) -> GameResult {
        let tau = self.sample_tau(rng);
        let alpha = self.config.alpha;
        GameResult::from_readouts(
            tau.outcome(0, alpha),
            tau.outcome(1, alpha),
            alpha,
            secrets,
            &self.config.table,
            Some(tau),
        )
    }
}

/// Exact readout distribution of the quantum machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    /// `P(m0 = 0)` on card 0.
    pub p_m0_zero: f64,
    /// `P(m1 = 0)` on card 1.
    pub p_m1_zero: f64,
}

impl OutcomeDistribution {
    /// `(P(y0 = 0), P(y1 = 0))` given the fiducial bit.
    pub fn guess_zero_probs(&self, alpha: bool) -> (f64, f64) {
        if alpha {
            (1.0 - self.p_m0_zero, 1.0 - self.p_m1_zero)
        } else {
            (self.p_m0_zero, self.p_m1_zero)
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuantumMachine {
    config: MachineConfig,
    delta: PhaseDifference,
    gates: (UnitaryGate, UnitaryGate),
    outcomes: OutcomeDistribution,
}

impl QuantumMachine {
    /// Builds `û0 = U(1/2 + h0, 0)` and `û1 = U(1/2 + h1, Δ)` and evaluates
    /// both card pipelines once.
    pub fn new(config: MachineConfig) -> Result<Self> {
        config.validate(MachineKind::Quantum)?;
        let (p0, p1) = game::preferences_from_hint(&config.hint);
        let delta = config.hint.phase_difference();
        let u0 = qcore::build_unitary(p0, 0.0)?;
        let u1 = qcore::build_unitary(p1, delta.radians())?;

        let prepared = DensityMatrix::basis(config.alpha);
        let after_u0 = qcore::apply_unitary(&u0, &prepared);
        let (p_m0_zero, _) = qcore::measure_probs(&after_u0);
        let card1 = qcore::apply_unitary(&u1, &qcore::dephase(&after_u0, config.gamma)?);
        let (p_m1_zero, _) = qcore::measure_probs(&card1);

        Ok(Self {
            config,
            delta,
            gates: (u0, u1),
            outcomes: OutcomeDistribution { p_m0_zero, p_m1_zero },
        })
    }

    pub fn delta(&self) -> PhaseDifference {
        self.delta
    }

    pub fn gates(&self) -> (&UnitaryGate, &UnitaryGate) {
        (&self.gates.0, &self.gates.1)
    }

    /// Exact evaluation mode.
    pub fn outcome_distribution(&self) -> OutcomeDistribution {
        self.outcomes
    }

    /// Expected score against `secrets`, without sampling.
    pub fn exact_expected_score(&self, secrets: &SecretBits) -> f64 {
        let (y0_zero, y1_zero) = self.outcomes.guess_zero_probs(self.config.alpha);
        let half = 0.5 * self.config.table.xi();
        let edge = |p_zero: f64, x: bool| {
            let p_right = if x { 1.0 - p_zero } else { p_zero };
            half * (2.0 * p_right - 1.0)
        };
        edge(y0_zero, secrets.x0) + edge(y1_zero, secrets.x1)
    }
}

impl DecisionMachine for QuantumMachine {
    fn kind(&self) -> MachineKind {
        MachineKind::Quantum
    }

    fn config(&self) -> &MachineConfig {
        &self.config
    }

    /// Two independent preparations, one per card.
    fn play(&self, secrets: &SecretBits, rng: &mut RngStream) -> GameResult {
        let m0 = !rng.bernoulli(self.outcomes.p_m0_zero);
        let m1 = !rng.bernoulli(self.outcomes.p_m1_zero);
        GameResult::from_readouts(m0, m1, self.config.alpha, secrets, &self.config.table, None)
    }
}

pub fn play_classical(config: &MachineConfig, secrets: &SecretBits, rng: &mut RngStream) -> Result<GameResult> {
    Ok(ClassicalMachine::new(*config)?.play(secrets, rng))
}

pub fn play_quantum(config: &MachineConfig, secrets: &SecretBits, rng: &mut RngStream) -> Result<GameResult> {
    Ok(QuantumMachine::new(*config)?.play(secrets, rng))
}

/// Either machine behind one type, for harnesses that iterate over kinds.
#[derive(Debug, Clone)]
pub enum Machine {
    Classical(ClassicalMachine),
    Quantum(QuantumMachine),
}

impl Machine {
    pub fn new(kind: MachineKind, config: MachineConfig) -> Result<Self> {
        Ok(match kind {
            MachineKind::Classical => Machine::Classical(ClassicalMachine::new(config)?),
            MachineKind::Quantum => Machine::Quantum(QuantumMachine::new(config)?),
        })
    }
}

impl DecisionMachine for Machine {
    fn kind(&self) -> MachineKind {
        match self {
            Machine::Classical(m) => m.kind(),
            Machine::Quantum(m) => m.kind(),
        }
    }

    fn config(&self) -> &MachineConfig {
        match self {
            Machine::Classical(m) => m.config(),
            Machine::Quantum(m) => m.config(),
        }
    }

    fn play(&self, secrets: &SecretBits, rng: &mut RngStream) -> GameResult {
        match self {
            Machine::Classical(m) => m.play(secrets, rng),
            Machine::Quantum(m) => m.play(secrets, rng),
        }
    }
}
