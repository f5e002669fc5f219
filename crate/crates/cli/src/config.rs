use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use transframe::frame::{choose_schedule, FrameSchedule, ScheduleMode, TranslationSequence};
use transframe::haar::{atom, HaarIndex};
use transframe::stepfn::{combine, Interval, StepFunction};

/// Run parameters read from a TOML file. Every key is optional; missing keys
/// fall back to the per-subcommand defaults.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub p: Option<f64>,
    pub c_u: Option<f64>,
    /// `demo` or `certified`.
    pub mode: Option<String>,
    /// Explicit block sizes `N_1, …, N_K`.
    pub n: Option<Vec<u64>>,
    /// Level count `K` for a chosen schedule.
    pub levels: Option<usize>,
    /// `N_k = a·r^k`.
    pub geometric: Option<Geometric>,
    /// `integers`, `powers3`, `sidon:P:W`, `sidon-auto:W`, `list:…`, `list+:…`.
    pub sequence: Option<String>,
    /// Haar atoms `cell:level:offset` of the test function.
    pub atoms: Option<Vec<String>>,
    pub coefs: Option<Vec<f64>>,
    pub eps: Option<f64>,
    /// `[start, end]`, integer endpoints.
    pub interval: Option<[i64; 2]>,
    /// Restriction diagnostic family: `geometric` or `disjoint`.
    pub family: Option<String>,
    pub distribution: Option<String>,
    pub max_level: Option<u32>,
    pub pieces: Option<usize>,
    pub resolution: Option<u32>,
    pub max_iter: Option<usize>,
    pub thresholds: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Geometric {
    pub a: u64,
    pub r: u64,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn p_or(&self, default: f64) -> f64 {
        self.p.unwrap_or(default)
    }

    pub fn mode(&self) -> Result<Option<ScheduleMode>> {
        self.mode.as_deref().map(|m| m.parse().map_err(anyhow::Error::from)).transpose()
    }

    /// Explicit `n`, then `geometric`, then `choose_schedule` when a mode is
    /// given, else the demo schedule `4, 16, 64`.
    pub fn frame_schedule(&self, default_p: f64) -> Result<FrameSchedule> {
        let p = self.p_or(default_p);
        let mode = self.mode()?;
        Ok(match (&self.n, self.geometric, mode) {
            (Some(_), Some(_), _) => bail!("`n` and `geometric` are mutually exclusive"),
            (Some(n), None, m) => {
                let tail = transframe::frame::Tail::Finite;
                FrameSchedule::new(p, self.c_u, n.clone(), m.unwrap_or(ScheduleMode::Demo), tail)?
            }
            (None, Some(g), _) => FrameSchedule::geometric(p, self.c_u, g.a, g.r, self.levels.unwrap_or(3))?,
            (None, None, Some(m)) => choose_schedule(p, self.c_u, self.levels.unwrap_or(3), m)?,
            (None, None, None) => FrameSchedule::demo(p, self.c_u, vec![4, 16, 64])?,
        })
    }

    /// The translation sequence; `sidon-auto:W` sizes a Sidon set to the schedule.
    pub fn sequence(&self, schedule: &FrameSchedule) -> Result<TranslationSequence> {
        let text = self.sequence.as_deref().unwrap_or("integers");
        if let Some(w) = text.strip_prefix("sidon-auto:") {
            let scale: u64 = w.parse().with_context(|| format!("bad Sidon scale {w:?}"))?;
            return Ok(TranslationSequence::sidon_for(schedule.total_atoms() as usize, scale)?);
        }
        Ok(text.parse()?)
    }

    /// `Σ coefs_k · atom_k`, defaulting to the first two listed atoms.
    pub fn test_function(&self, p: f64, default_atoms: &[HaarIndex]) -> Result<StepFunction> {
        let atoms: Vec<HaarIndex> = match &self.atoms {
            Some(list) => list.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
            None => default_atoms.to_vec(),
        };
        let coefs = self.coefs.clone().unwrap_or_else(|| vec![1.0, 0.5]);
        if atoms.is_empty() {
            bail!("the test function needs at least one atom");
        }
        if coefs.len() < atoms.len() {
            bail!("{} atoms but only {} coefficients", atoms.len(), coefs.len());
        }
        let steps = atoms.iter().map(|ix| atom(ix, p)).collect::<Result<Vec<_>, _>>()?;
        Ok(combine(coefs.iter().copied().zip(&steps)))
    }

    pub fn interval(&self) -> Result<Interval> {
        let [a, b] = self.interval.unwrap_or([0, 1]);
        if b <= a {
            bail!("interval [{a}, {b}] is empty");
        }
        Ok(Interval::ints(a, b)?)
    }
}
