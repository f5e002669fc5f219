//! Seeded random test functions and empirical estimates of `ℓ_p`-equivalence
//! and unconditionality constants.
//!
//! Every trial draws from its own ChaCha8 stream (`seed`, stream = trial
//! index), so results do not depend on scheduling or on how many trials run.
//! The estimates are one-sided: they can exhibit a large ratio, never prove a
//! small constant.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{abs_pow, CompensatedSum};
use crate::stepfn::{DyadicRational, Interval, Piece, StepFunction};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Distribution {
    #[default]
    Signs,
    /// Irwin–Hall sum of twelve uniforms, centred.
    Gaussianish,
    /// Each coefficient nonzero with probability 1/4.
    Sparse,
}

impl Distribution {
    pub fn as_str(&self) -> &'static str {
        match self {
            Distribution::Signs => "signs",
            Distribution::Gaussianish => "gaussian",
            Distribution::Sparse => "sparse",
        }
    }

    pub fn draw(&self, rng: &mut impl Rng, n: usize) -> Vec<f64> {
        match self {
            Distribution::Signs => (0..n).map(|_| sign(rng)).collect(),
            Distribution::Gaussianish => (0..n)
                .map(|_| (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0)
                .collect(),
            Distribution::Sparse => {
                let mut a: Vec<f64> = (0..n)
                    .map(|_| if rng.gen_bool(0.25) { rng.gen_range(-1.0..=1.0) } else { 0.0 })
                    .collect();
                if n > 0 && a.iter().all(|&v| v == 0.0) {
                    let k = rng.gen_range(0..n);
                    a[k] = sign(rng);
                }
                a
            }
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signs" => Ok(Distribution::Signs),
            "gaussian" => Ok(Distribution::Gaussianish),
            "sparse" => Ok(Distribution::Sparse),
            _ => Err(Error::InvalidArgument(format!("unknown distribution {s:?} (signs, gaussian, sparse)"))),
        }
    }
}

fn sign(rng: &mut impl Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeConfig {
    pub seed: u64,
    pub trials: u64,
    pub distribution: Distribution,
}

impl ProbeConfig {
    pub fn new(seed: u64, trials: u64) -> Self {
        ProbeConfig {
            seed,
            trials,
            distribution: Distribution::default(),
        }
    }

    pub fn with_distribution(mut self, distribution: Distribution) -> Self {
        self.distribution = distribution;
        self
    }
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random step function on `support` with `pieces` pieces, breakpoints on the
/// grid `2^{-resolution}ℤ` and values in `[-1,1]` (or all equal to `value`).
///
/// The support endpoints must lie on the grid.
pub fn random_step(seed: u64, support: &Interval, pieces: usize, resolution: u32, value: Option<f64>) -> Result<StepFunction> {
    if pieces == 0 {
        return Err(Error::InvalidArgument("at least one piece is required".into()));
    }
    let cells = support.length().mul_pow2(resolution as i32);
    let lo = support.start().mul_pow2(resolution as i32);
    let (Some(cells), Some(lo)) = (cells.is_integer().then(|| cells.to_i64()).flatten(), lo.is_integer().then(|| lo.to_i64()).flatten()) else {
        return Err(Error::InvalidArgument(format!("support endpoints are not multiples of 2^-{resolution}")));
    };
    if (cells as u64) < pieces as u64 {
        return Err(Error::InvalidArgument(format!("{cells} grid cells cannot hold {pieces} pieces")));
    }
    let mut rng = trial_rng(seed, 0);
    let mut cuts: Vec<i64> = sample(&mut rng, (cells - 1) as usize, pieces - 1)
        .into_iter()
        .map(|k| k as i64 + 1)
        .collect();
    cuts.sort_unstable();
    let mut bounds = Vec::with_capacity(pieces + 1);
    bounds.push(0);
    bounds.extend(cuts);
    bounds.push(cells);
    let out = bounds
        .windows(2)
        .map(|w| {
            let v = value.unwrap_or_else(|| rng.gen_range(-1.0..=1.0));
            Piece::new(
                DyadicRational::new(lo + w[0], resolution),
                DyadicRational::new(lo + w[1], resolution),
                v,
            )
        })
        .collect();
    StepFunction::from_pieces(out)
}

/// The generators on their common refinement, so that `‖Σ a_i f_i‖_p` costs
/// one pass over the pieces instead of an exact merge.
#[derive(Clone, Debug)]
pub struct Sampler {
    lengths: Vec<f64>,
    entries: Vec<Vec<(usize, f64)>>,
}

impl Sampler {
    pub fn new(generators: &[StepFunction]) -> Self {
        let mut breaks: Vec<&DyadicRational> = generators
            .iter()
            .flat_map(|f| f.pieces().iter().flat_map(|p| [&p.start, &p.end]))
            .collect();
        breaks.sort_unstable();
        breaks.dedup();
        let lengths = breaks.windows(2).map(|w| (w[1] - w[0]).to_f64()).collect();
        let entries = generators
            .iter()
            .map(|f| {
                let mut out = Vec::new();
                let mut k = 0usize;
                for p in f.pieces() {
                    k += breaks[k..].partition_point(|b| *b < &p.start);
                    while breaks[k] < &p.end {
                        out.push((k, p.value));
                        k += 1;
                    }
                }
                out
            })
            .collect();
        Sampler { lengths, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `‖Σ a_i f_i‖_p^p`.
    pub fn norm_pow(&self, coefs: &[f64], p: f64) -> f64 {
        let mut values = vec![0.0; self.lengths.len()];
        for (a, e) in coefs.iter().zip(&self.entries) {
            if *a != 0.0 {
                for &(k, v) in e {
                    values[k] += a * v;
                }
            }
        }
        values
            .iter()
            .zip(&self.lengths)
            .filter(|(v, _)| **v != 0.0)
            .map(|(v, l)| abs_pow(*v, p) * l)
            .collect::<CompensatedSum>()
            .value()
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `(min, max)` over trials of `‖Σ a_i f_i‖_p / (Σ |a_i|^p)^{1/p}`.
pub fn lp_equivalence_estimate(generators: &[StepFunction], p: f64, config: &ProbeConfig) -> Result<(f64, f64)> {
    check_p(p)?;
    if generators.is_empty() {
        return Err(Error::InvalidArgument("no generators".into()));
    }
    let sampler = Sampler::new(generators);
    let n = generators.len();
    let ratios: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .filter_map(|t| {
            let a = config.distribution.draw(&mut trial_rng(config.seed, t), n);
            let lp: f64 = a.iter().map(|&v| abs_pow(v, p)).collect::<CompensatedSum>().value();
            (lp > 0.0).then(|| (sampler.norm_pow(&a, p) / lp).powf(1.0 / p))
        })
        .collect();
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("no trials with a nonzero coefficient vector".into()));
    }
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(0.0, f64::max);
    Ok((lower, upper))
}

/// Largest observed `‖Σ σ_i a_i f_i‖_p / ‖Σ a_i f_i‖_p`, at least 1.
pub fn unconditionality_estimate(generators: &[StepFunction], p: f64, config: &ProbeConfig) -> Result<f64> {
    check_p(p)?;
    let sampler = Sampler::new(generators);
    let n = generators.len();
    let worst = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, t);
            let a = config.distribution.draw(&mut rng, n);
            let signed: Vec<f64> = a.iter().map(|&v| sign(&mut rng) * v).collect();
            let base = sampler.norm_pow(&a, p);
            if base > 0.0 {
                (sampler.norm_pow(&signed, p) / base).powf(1.0 / p)
            } else {
                1.0
            }
        })
        .reduce(|| 1.0, f64::max);
    Ok(worst.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_value_single_piece_is_an_indicator() {
        let s = Interval::ints(2, 5).unwrap();
        let f = random_step(9, &s, 1, 3, Some(1.0)).unwrap();
        assert_eq!(f, StepFunction::indicator(&s));
    }

    #[test]
    fn sampler_matches_exact_norm() {
        let s = Interval::ints(0, 2).unwrap();
        let gens: Vec<StepFunction> = (0..4).map(|k| random_step(k, &s, 5, 4, None).unwrap()).collect();
        let a = [0.5, -1.0, 2.0, 0.25];
        let exact = crate::stepfn::combine(a.iter().copied().zip(&gens)).lp_norm_pow(3.0).unwrap();
        let fast = Sampler::new(&gens).norm_pow(&a, 3.0);
        assert!(crate::numeric::rel_diff(exact, fast) < 1e-12);
    }
}
