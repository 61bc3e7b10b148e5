//! Sweep harnesses: hint grid, symmetric-hint line and decoherence sweep.
//!
//! Every sweep expands into independent cells. Each cell draws from its own
//! substream, seeded by hashing the master seed with the cell's coordinates,
//! so the output does not depend on how many threads evaluate it or in what
//! order. Records come back ordered by machine, secrets, γ, then hints.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic;
use crate::error::{Error, Result};
use crate::game::{symmetric_hint, HintVector, ScoreTable, SecretBits};
use crate::machines::{derive_seed, DecisionMachine, Machine, MachineConfig, MachineKind, RngStream};
use crate::TOLERANCE;

pub const CSV_HEADER: &str = "experiment,machine,x0,x1,h0,h1,gamma,delta,n_games,mean_score,std_err,analytic_score";

/// Records further than this many standard errors from the analytic value
/// count as outliers.
pub const SE_BAND: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentTag {
    Grid,
    Symmetric,
    Decoherence,
}

impl ExperimentTag {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentTag::Grid => "grid",
            ExperimentTag::Symmetric => "symmetric",
            ExperimentTag::Decoherence => "decoherence",
        }
    }

    fn id(self) -> u64 {
        match self {
            ExperimentTag::Grid => 1,
            ExperimentTag::Symmetric => 2,
            ExperimentTag::Decoherence => 3,
        }
    }
}

impl fmt::Display for ExperimentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ExperimentTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(ExperimentTag::Grid),
            "symmetric" => Ok(ExperimentTag::Symmetric),
            "decoherence" => Ok(ExperimentTag::Decoherence),
            other => Err(Error::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

/// How each cell is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// Play `games_per_cell` seeded games.
    MonteCarlo,
    /// Closed-form expected score only; records carry `n_games = 0`.
    Analytic,
}

/// Settings shared by all three sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub machines: Vec<MachineKind>,
    pub secrets: Vec<SecretBits>,
    /// Dephasing rates for the quantum machine. The classical machine is
    /// always run once at γ = 0.
    pub gamma_list: Vec<f64>,
    pub games_per_cell: u64,
    pub master_seed: u64,
    pub alpha: bool,
    pub table: ScoreTable,
    pub evaluation: Evaluation,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            machines: MachineKind::ALL.to_vec(),
            secrets: SecretBits::all().to_vec(),
            gamma_list: vec![0.0],
            games_per_cell: 10_000,
            master_seed: 0,
            alpha: false,
            table: ScoreTable::default(),
            evaluation: Evaluation::MonteCarlo,
        }
    }
}

impl RunSettings {
    fn validate(&self) -> Result<()> {
        if self.machines.is_empty() {
            return Err(Error::Config("no machines selected".into()));
        }
        if self.secrets.is_empty() {
            return Err(Error::Config("no secret pairs selected".into()));
        }
        if self.gamma_list.is_empty() {
            return Err(Error::Config("empty dephasing-rate list".into()));
        }
        if let Some(&g) = self.gamma_list.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::DephasingRate(g));
        }
        if self.evaluation == Evaluation::MonteCarlo && self.games_per_cell == 0 {
            return Err(Error::Config("games per cell must be at least 1".into()));
        }
        Ok(())
    }

    /// `(index, γ)` pairs to run for `machine`.
    fn gammas_for(&self, machine: MachineKind) -> Vec<(usize, f64)> {
        match machine {
            MachineKind::Classical => vec![(0, 0.0)],
            MachineKind::Quantum => self.gamma_list.iter().copied().enumerate().collect(),
        }
    }
}

/// Square hint grid from `grid_min` to `grid_max` on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub grid_min: f64,
    pub grid_max: f64,
    pub step: f64,
    pub settings: RunSettings,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            grid_min: -0.5,
            grid_max: 0.5,
            step: 0.01,
            settings: RunSettings::default(),
        }
    }
}

impl SweepSpec {
    pub fn axis(&self) -> Result<Vec<f64>> {
        axis_values(self.grid_min, self.grid_max, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineQuality {
    /// Every value is taken as `+|h|`.
    Good,
    /// Every value is taken as `−|h|`.
    Poor,
    /// Values keep their sign: positive is Good, negative Poor.
    Both,
}

impl FromStr for LineQuality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "good" => Ok(LineQuality::Good),
            "poor" => Ok(LineQuality::Poor),
            "both" => Ok(LineQuality::Both),
            other => Err(Error::Config(format!("unknown hint quality {other:?}"))),
        }
    }
}

/// Hints on the symmetric diagonal `|h0| = |h1| = |h|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricLineSpec {
    pub quality: LineQuality,
    pub h_values: Vec<f64>,
    pub settings: RunSettings,
}

impl Default for SymmetricLineSpec {
    fn default() -> Self {
        Self {
            quality: LineQuality::Both,
            h_values: axis_values(-0.5, 0.5, 0.01).expect("static axis"),
            settings: RunSettings::default(),
        }
    }
}

/// One sweep cell's estimate and its closed-form reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub experiment: ExperimentTag,
    pub machine: MachineKind,
    pub secrets: SecretBits,
    pub h0: f64,
    pub h1: f64,
    pub gamma: f64,
    /// Phase difference in radians; zero for the classical machine.
    pub delta: f64,
    pub n_games: u64,
    pub mean_score: f64,
    pub std_err: f64,
    pub analytic_score: f64,
}

impl RunRecord {
    /// `|mean − analytic|` in standard errors. A zero standard error counts
    /// as zero deviation on an exact match and infinite otherwise.
    pub fn deviation_se(&self) -> f64 {
        let gap = (self.mean_score - self.analytic_score).abs();
        if self.std_err > 0.0 {
            gap / self.std_err
        } else if gap <= TOLERANCE {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Evenly spaced values from `min` to `max` inclusive.
///
/// When `step` divides the span, values are computed as `min + span·i/n`
/// so that the endpoints and the midpoint land exactly.
pub fn axis_values(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || min > max {
        return Err(Error::Config(format!("bad range {min}:{max}:{step}")));
    }
    let span = max - min;
    let ratio = span / step;
    let n = (ratio + 1e-9).floor();
    if n > 10_000_000.0 {
        return Err(Error::Config(format!("range {min}:{max}:{step} has too many points")));
    }
    let n = n as u64;
    let exact = (ratio - n as f64).abs() < 1e-9;
    Ok((0..=n)
        .map(|i| {
            let v = if exact && n > 0 {
                min + span * i as f64 / n as f64
            } else {
                min + step * i as f64
            };
            v.clamp(min, max) + 0.0
        })
        .collect())
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    experiment: ExperimentTag,
    machine: MachineKind,
    secrets: SecretBits,
    hint: HintVector,
    gamma: f64,
    key: [u64; 7],
}

fn cell_key(
    experiment: ExperimentTag,
    machine: MachineKind,
    secrets: SecretBits,
    i: usize,
    j: usize,
    gamma_index: usize,
) -> [u64; 7] {
    let machine_id = match machine {
        MachineKind::Classical => 0,
        MachineKind::Quantum => 1,
    };
    [
        experiment.id(),
        machine_id,
        u64::from(secrets.x0),
        u64::from(secrets.x1),
        i as u64,
        j as u64,
        gamma_index as u64,
    ]
}

fn evaluate(cell: &Cell, settings: &RunSettings) -> Result<RunRecord> {
    let config = MachineConfig::new(cell.hint)
        .with_alpha(settings.alpha)
        .with_gamma(cell.gamma)
        .with_table(settings.table);
    let analytic_score = analytic::expected_score(cell.machine, &cell.hint, &cell.secrets, cell.gamma, &settings.table)?;
    let delta = match cell.machine {
        MachineKind::Classical => 0.0,
        MachineKind::Quantum => cell.hint.phase_difference().radians(),
    };
    let (n_games, mean_score, std_err) = match settings.evaluation {
        Evaluation::Analytic => (0, analytic_score, 0.0),
        Evaluation::MonteCarlo => {
            let machine = Machine::new(cell.machine, config)?;
            let mut rng = RngStream::new(derive_seed(settings.master_seed, &cell.key));
            let n = settings.games_per_cell;
            let (mut wins, mut losses) = (0u64, 0u64);
            for _ in 0..n {
                let s = machine.play(&cell.secrets, &mut rng).score;
                if s > 0.0 {
                    wins += 1;
                } else if s < 0.0 {
                    losses += 1;
                }
            }
            let (mean, se) = score_moments(wins, losses, n, settings.table.xi());
            (n, mean, se)
        }
    };
    Ok(RunRecord {
        experiment: cell.experiment,
        machine: cell.machine,
        secrets: cell.secrets,
        h0: cell.hint.h0(),
        h1: cell.hint.h1(),
        gamma: cell.gamma,
        delta,
        n_games,
        mean_score,
        std_err,
        analytic_score,
    })
}

/// Mean and standard error of `n` scores in `{−ξ, 0, ξ}` with the given
/// win and loss counts. Uses the Bessel-corrected sample deviation.
fn score_moments(wins: u64, losses: u64, n: u64, xi: f64) -> (f64, f64) {
    let nf = n as f64;
    let mean = xi * (wins as f64 - losses as f64) / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let sum_sq = xi * xi * (wins + losses) as f64;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn evaluate_all(cells: &[Cell], settings: &RunSettings) -> Result<Vec<RunRecord>> {
    cells.par_iter().map(|c| evaluate(c, settings)).collect()
}

pub fn run_grid(spec: &SweepSpec) -> Result<Vec<RunRecord>> {
    let settings = &spec.settings;
    settings.validate()?;
    if spec.grid_min < -0.5 || spec.grid_max > 0.5 {
        return Err(Error::Config(format!(
            "grid bounds {}..{} leave [-1/2, 1/2]",
            spec.grid_min, spec.grid_max
        )));
    }
    let axis = spec.axis()?;
    let mut cells = Vec::new();
    for &machine in &settings.machines {
        for &secrets in &settings.secrets {
            for (g, gamma) in settings.gammas_for(machine) {
                for (i, &h0) in axis.iter().enumerate() {
                    for (j, &h1) in axis.iter().enumerate() {
                        cells.push(Cell {
                            experiment: ExperimentTag::Grid,
                            machine,
                            secrets,
                            hint: HintVector::new(h0, h1)?,
                            gamma,
                            key: cell_key(ExperimentTag::Grid, machine, secrets, i, j, g),
                        });
                    }
                }
            }
        }
    }
    evaluate_all(&cells, settings)
}

pub fn run_symmetric(spec: &SymmetricLineSpec) -> Result<Vec<RunRecord>> {
    let settings = &spec.settings;
    settings.validate()?;
    if spec.h_values.is_empty() {
        return Err(Error::Config("no symmetric hint values".into()));
    }
    let signed: Vec<f64> = spec
        .h_values
        .iter()
        .map(|&h| match spec.quality {
            LineQuality::Good => h.abs(),
            LineQuality::Poor => -h.abs(),
            LineQuality::Both => h,
        })
        .collect();
    let mut cells = Vec::new();
    for &machine in &settings.machines {
        for &secrets in &settings.secrets {
            for (g, gamma) in settings.gammas_for(machine) {
                for (i, &h) in signed.iter().enumerate() {
                    cells.push(Cell {
                        experiment: ExperimentTag::Symmetric,
                        machine,
                        secrets,
                        hint: symmetric_hint(h, &secrets)?,
                        gamma,
                        key: cell_key(ExperimentTag::Symmetric, machine, secrets, i, 0, g),
                    });
                }
            }
        }
    }
    evaluate_all(&cells, settings)
}

/// Good symmetric hints `|h|` from the sweep axis (which must lie in
/// `[0, 1/2]`) against each dephasing rate.
pub fn run_decoherence(spec: &SweepSpec) -> Result<Vec<RunRecord>> {
    if spec.grid_min < 0.0 || spec.grid_max > 0.5 {
        return Err(Error::Config(format!(
            "decoherence hints {}..{} must lie in [0, 1/2]",
            spec.grid_min, spec.grid_max
        )));
    }
    run_decoherence_line(&spec.axis()?, &spec.settings)
}

/// Decoherence sweep over explicit hint magnitudes. The classical machine
/// is run once per hint as the γ-independent baseline.
pub fn run_decoherence_line(h_values: &[f64], settings: &RunSettings) -> Result<Vec<RunRecord>> {
    settings.validate()?;
    if h_values.is_empty() {
        return Err(Error::Config("no decoherence hint values".into()));
    }
    if let Some(&h) = h_values.iter().find(|h| !(0.0..=0.5).contains(*h)) {
        return Err(Error::Config(format!("decoherence hint {h} must lie in [0, 1/2]")));
    }
    let mut cells = Vec::new();
    for &machine in &settings.machines {
        for &secrets in &settings.secrets {
            for (g, gamma) in settings.gammas_for(machine) {
                for (i, &h) in h_values.iter().enumerate() {
                    cells.push(Cell {
                        experiment: ExperimentTag::Decoherence,
                        machine,
                        secrets,
                        hint: symmetric_hint(h, &secrets)?,
                        gamma,
                        key: cell_key(ExperimentTag::Decoherence, machine, secrets, i, 0, g),
                    });
                }
            }
        }
    }
    evaluate_all(&cells, settings)
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = one per core).
pub fn with_threads<T, F>(threads: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub cells: usize,
    pub total_games: u64,
    /// Largest `|mean − analytic|` in standard errors.
    pub max_deviation_se: f64,
    /// Cells within [`SE_BAND`] standard errors.
    pub within_band: usize,
}

impl GroupSummary {
    pub fn within_band_fraction(&self) -> f64 {
        self.within_band as f64 / self.cells as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub groups: BTreeMap<ExperimentTag, GroupSummary>,
}

pub fn summarize(records: &[RunRecord]) -> Result<SummaryStats> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut groups: BTreeMap<ExperimentTag, GroupSummary> = BTreeMap::new();
    for r in records {
        let g = groups.entry(r.experiment).or_insert(GroupSummary {
            cells: 0,
            total_games: 0,
            max_deviation_se: 0.0,
            within_band: 0,
        });
        let dev = r.deviation_se();
        g.cells += 1;
        g.total_games += r.n_games;
        g.max_deviation_se = g.max_deviation_se.max(dev);
        if dev <= SE_BAND {
            g.within_band += 1;
        }
    }
    Ok(SummaryStats { groups })
}

/// 17 significant digits, enough to round-trip any `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(records: &[RunRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.machine,
            u8::from(r.secrets.x0),
            u8::from(r.secrets.x1),
            float(r.h0),
            float(r.h1),
            float(r.gamma),
            float(r.delta),
            r.n_games,
            float(r.mean_score),
            float(r.std_err),
            float(r.analytic_score),
        )?;
    }
    out.flush()
}

pub fn to_csv_string(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Writes the CSV next to `path` and renames it into place, so a failed
/// write never leaves a partial file behind.
pub fn write_csv_file(path: &Path, records: &[RunRecord]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    write_csv(records, io::BufWriter::new(tmp.as_file_mut())).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("missing or wrong CSV header".into()));
    }
    let bad = |line: &str| Error::Config(format!("malformed CSV row {line:?}"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 12 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            let bit = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad(line)),
            };
            Ok(RunRecord {
                experiment: f[0].parse()?,
                machine: f[1].parse()?,
                secrets: SecretBits::new(bit(f[2])?, bit(f[3])?),
                h0: num(f[4])?,
                h1: num(f[5])?,
                gamma: num(f[6])?,
                delta: num(f[7])?,
                n_games: f[8].parse().map_err(|_| bad(line))?,
                mean_score: num(f[9])?,
                std_err: num(f[10])?,
                analytic_score: num(f[11])?,
            })
        })
        .collect()
}
