//! Restriction operators `x ↦ x|_I`, the conditional expectations used to
//! approximate them, and the block systems whose restrictions to `[0,1]` are
//! (or are not) compact.

mod blocks;
mod diagnostic;

pub use blocks::{build_disjoint, build_haar, AtomFamily, BlockSystem, HaarBlockReport, Witness};
pub use diagnostic::{compactness_diagnostic, geometric_family, CompactnessReport, HolderChain};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::stepfn::{DyadicRational, Interval, Piece, StepFunction};

/// Upper limit on the number of intervals in a generated dyadic partition.
pub const MAX_PARTITION: u64 = 1 << 24;

/// Consecutive intervals of positive length covering `[start, end)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    intervals: Vec<Interval>,
}

impl Partition {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidPartition("no intervals".into()));
        }
        for (k, iv) in intervals.iter().enumerate() {
            if iv.is_degenerate() {
                return Err(Error::InvalidPartition(format!("interval {k} has zero length")));
            }
            if k > 0 && intervals[k - 1].end() != iv.start() {
                return Err(Error::InvalidPartition(format!(
                    "intervals {} and {k} are not consecutive",
                    k - 1
                )));
            }
        }
        Ok(Partition { intervals })
    }

    /// `Q_n` on every unit cell `[c, c+1)`, `c ∈ cells`.
    pub fn dyadic(cells: std::ops::Range<i64>, n: u32) -> Result<Self> {
        let count = (cells.end - cells.start).max(0) as u64;
        if n > 62 || count.checked_shl(n).map_or(true, |t| t > MAX_PARTITION || t >> n != count) {
            return Err(Error::Overflow(format!("{count} cells at level {n} exceed {MAX_PARTITION} intervals")));
        }
        let mut intervals = Vec::with_capacity((count << n) as usize);
        for c in cells {
            for k in 0..(1i64 << n) {
                let start = DyadicRational::new((c << n) + k, n);
                let end = DyadicRational::new((c << n) + k + 1, n);
                intervals.push(Interval::new(start, end)?);
            }
        }
        Partition::new(intervals)
    }

    /// The integer cells meeting `f`'s support, refined to `Q_n`.
    pub fn dyadic_covering(f: &StepFunction, n: u32) -> Result<Self> {
        let s = f.support().unwrap_or_else(|| Interval::unit(0));
        let lo = s.start().floor().to_i64();
        let hi = s.end().ceil().to_i64();
        match (lo, hi) {
            (Some(lo), Some(hi)) => Partition::dyadic(lo..hi.max(lo + 1), n),
            _ => Err(Error::Overflow("support outside the 64-bit cell range".into())),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn range(&self) -> Interval {
        let first = self.intervals.first().expect("partition is nonempty");
        let last = self.intervals.last().expect("partition is nonempty");
        Interval::new(first.start().clone(), last.end().clone()).expect("consecutive intervals")
    }
}

/// `E_P f = Σ_k (∫_{I_k} f) χ_{I_k} / m(I_k)`.
///
/// Whatever part of `f` lies outside the range of `P` is dropped. An interval
/// inside a single piece keeps that piece's value verbatim, so `P`-measurable
/// inputs are fixed exactly.
pub fn conditional_expectation(partition: &Partition, f: &StepFunction) -> StepFunction {
    let pieces = f.pieces();
    let mut out = Vec::with_capacity(partition.len());
    let mut cursor = 0usize;
    for iv in partition.intervals() {
        cursor += pieces[cursor..].partition_point(|p| &p.end <= iv.start());
        let mut k = cursor;
        let mut integral = CompensatedSum::new();
        let mut single = None;
        while let Some(p) = pieces.get(k) {
            if &p.start >= iv.end() {
                break;
            }
            if &p.start <= iv.start() && &p.end >= iv.end() {
                single = Some(p.value);
            } else {
                let lo = if &p.start > iv.start() { &p.start } else { iv.start() };
                let hi = if &p.end < iv.end() { &p.end } else { iv.end() };
                integral.add(p.value * (hi - lo).to_f64());
            }
            k += 1;
        }
        let value = single.unwrap_or_else(|| integral.value() / iv.length().to_f64());
        if value != 0.0 {
            out.push(Piece::new(iv.start().clone(), iv.end().clone(), value));
        }
    }
    StepFunction::from_sorted_unchecked(out)
}

/// Smallest `n` with `E_{Q_n} f = f` on the cells covering `f`: every
/// breakpoint must be a multiple of `2^{-n}`.
pub fn exact_refinement_level(f: &StepFunction) -> u32 {
    f.resolution()
}
