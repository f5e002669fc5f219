//! Compactly supported piecewise-constant functions on the real line.
//!
//! Breakpoints are exact dyadic rationals; values are `f64`. Every
//! [`StepFunction`] is kept in canonical form: pieces sorted, pairwise
//! disjoint, each with `start < end` and a non-zero value, and adjacent
//! pieces with equal values merged. The empty piece list is the zero
//! function.
//!
//! Pieces are half-open `[start, end)`; supports and disjointness are
//! measure-theoretic, so touching endpoints never count as overlap.

pub mod dyadic;
pub mod superpose;
mod text;

use std::cmp::Ordering;

pub use dyadic::DyadicRational;
pub use superpose::Superposition;

use crate::error::{Error, Result};
use crate::numeric::{abs_pow, CompensatedSum};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    start: DyadicRational,
    end: DyadicRational,
}

impl Interval {
    pub fn new(start: DyadicRational, end: DyadicRational) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidInterval(format!("start {start} exceeds end {end}")));
        }
        Ok(Interval { start, end })
    }

    /// `[a, b]` for integers `a <= b`.
    pub fn ints(a: i64, b: i64) -> Result<Self> {
        Self::new(a.into(), b.into())
    }

    /// The unit cell `[cell, cell + 1]`.
    pub fn unit(cell: i64) -> Self {
        Interval {
            start: DyadicRational::from_int(cell),
            end: DyadicRational::from_int(cell + 1),
        }
    }

    pub fn start(&self) -> &DyadicRational {
        &self.start
    }

    pub fn end(&self) -> &DyadicRational {
        &self.end
    }

    pub fn length(&self) -> DyadicRational {
        &self.end - &self.start
    }

    pub fn is_degenerate(&self) -> bool {
        self.start == self.end
    }

    /// Intersection has positive measure.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn translate(&self, shift: &DyadicRational) -> Interval {
        Interval {
            start: &self.start + shift,
            end: &self.end + shift,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub start: DyadicRational,
    pub end: DyadicRational,
    pub value: f64,
}

impl Piece {
    pub fn new(start: DyadicRational, end: DyadicRational, value: f64) -> Self {
        Piece { start, end, value }
    }

    pub fn length(&self) -> f64 {
        (&self.end - &self.start).to_f64()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepFunction {
    pieces: Vec<Piece>,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Drops zero pieces and merges equal-valued neighbours. Input must already
/// be sorted and disjoint.
fn canonicalize(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for piece in pieces {
        if piece.value == 0.0 || piece.start >= piece.end {
            continue;
        }
        if let Some(last) = out.last_mut() {
            if last.end == piece.start && last.value == piece.value {
                last.end = piece.end;
                continue;
            }
        }
        out.push(piece);
    }
    out
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction::default()
    }

    pub fn indicator(interval: &Interval) -> Self {
        Self::constant_on(interval, 1.0)
    }

    pub fn constant_on(interval: &Interval, value: f64) -> Self {
        StepFunction {
            pieces: canonicalize(vec![Piece::new(
                interval.start.clone(),
                interval.end.clone(),
                value,
            )]),
        }
    }

    /// Validates ordering and disjointness, then canonicalizes.
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self> {
        for (k, piece) in pieces.iter().enumerate() {
            if !piece.value.is_finite() {
                return Err(Error::MalformedPieces(format!("piece {k} has value {}", piece.value)));
            }
            if piece.start >= piece.end {
                return Err(Error::MalformedPieces(format!(
                    "piece {k} is empty or reversed: [{}, {})",
                    piece.start, piece.end
                )));
            }
            if k > 0 && pieces[k - 1].end > piece.start {
                return Err(Error::MalformedPieces(format!(
                    "pieces {} and {k} overlap or are unsorted",
                    k - 1
                )));
            }
        }
        Ok(StepFunction {
            pieces: canonicalize(pieces),
        })
    }

    pub(crate) fn from_sorted_unchecked(pieces: Vec<Piece>) -> Self {
        StepFunction {
            pieces: canonicalize(pieces),
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Smallest interval containing the support; `None` for the zero function.
    pub fn support(&self) -> Option<Interval> {
        let first = self.pieces.first()?;
        let last = self.pieces.last()?;
        Some(Interval {
            start: first.start.clone(),
            end: last.end.clone(),
        })
    }

    /// Largest dyadic exponent among the breakpoints (finest resolution used).
    pub fn resolution(&self) -> u32 {
        self.pieces
            .iter()
            .flat_map(|p| [p.start.exponent(), p.end.exponent()])
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &DyadicRational) -> f64 {
        let k = self.pieces.partition_point(|p| &p.end <= x);
        match self.pieces.get(k) {
            Some(p) if &p.start <= x => p.value,
            _ => 0.0,
        }
    }

    pub fn translate(&self, shift: &DyadicRational) -> StepFunction {
        if shift.is_zero() {
            return self.clone();
        }
        StepFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece::new(&p.start + shift, &p.end + shift, p.value))
                .collect(),
        }
    }

    pub fn translate_int(&self, shift: i64) -> StepFunction {
        self.translate(&DyadicRational::from_int(shift))
    }

    /// `T_λ f(x) = f(x − λ)` for a real shift, converted exactly to a dyadic.
    pub fn translate_f64(&self, shift: f64) -> Result<StepFunction> {
        Ok(self.translate(&DyadicRational::from_f64(shift)?))
    }

    pub fn scale(&self, c: f64) -> StepFunction {
        self.map_values(|v| c * v)
    }

    /// Applies `f` to every value, keeping breakpoints.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> StepFunction {
        StepFunction::from_sorted_unchecked(
            self.pieces
                .iter()
                .map(|p| Piece::new(p.start.clone(), p.end.clone(), f(p.value)))
                .collect(),
        )
    }

    /// `∫ |f|^p`.
    pub fn lp_norm_pow(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        Ok(self
            .pieces
            .iter()
            .map(|piece| abs_pow(piece.value, p) * piece.length())
            .collect::<CompensatedSum>()
            .value())
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        let s = self.lp_norm_pow(p)?;
        Ok(if p == 1.0 { s } else { s.powf(1.0 / p) })
    }

    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.value * p.length())
            .collect::<CompensatedSum>()
            .value()
    }

    /// Calls `visit(overlap_length, f_value, g_value)` for every positive-measure
    /// overlap of a piece of `self` with a piece of `other`, in increasing position.
    fn for_each_overlap(&self, other: &StepFunction, mut visit: impl FnMut(&Piece, &Piece) -> bool) {
        let (small, large, swapped) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        if small.is_zero() {
            return;
        }
        let mut from = 0usize;
        for s in &small.pieces {
            from += large.pieces[from..].partition_point(|l| l.end <= s.start);
            let mut k = from;
            while k < large.pieces.len() && large.pieces[k].start < s.end {
                let l = &large.pieces[k];
                let keep_going = if swapped { visit(l, s) } else { visit(s, l) };
                if !keep_going {
                    return;
                }
                k += 1;
            }
        }
    }

    /// `∫ f g`.
    pub fn pair(&self, other: &StepFunction) -> f64 {
        let mut acc = CompensatedSum::new();
        self.for_each_overlap(other, |a, b| {
            let lo = if a.start > b.start { &a.start } else { &b.start };
            let hi = if a.end < b.end { &a.end } else { &b.end };
            acc.add(a.value * b.value * (hi - lo).to_f64());
            true
        });
        acc.value()
    }

    /// True iff the supports intersect in a null set.
    pub fn supports_disjoint(&self, other: &StepFunction) -> bool {
        let mut disjoint = true;
        self.for_each_overlap(other, |_, _| {
            disjoint = false;
            false
        });
        disjoint
    }

    pub fn restrict(&self, interval: &Interval) -> StepFunction {
        let from = self.pieces.partition_point(|p| p.end <= interval.start);
        let mut out = Vec::new();
        for p in &self.pieces[from..] {
            if p.start >= interval.end {
                break;
            }
            let start = if p.start < interval.start { interval.start.clone() } else { p.start.clone() };
            let end = if p.end > interval.end { interval.end.clone() } else { p.end.clone() };
            out.push(Piece::new(start, end, p.value));
        }
        StepFunction::from_sorted_unchecked(out)
    }

    /// The part of `self` outside `interval`.
    pub fn restrict_complement(&self, interval: &Interval) -> StepFunction {
        let mut out = Vec::new();
        for p in &self.pieces {
            if p.end <= interval.start || p.start >= interval.end {
                out.push(p.clone());
                continue;
            }
            if p.start < interval.start {
                out.push(Piece::new(p.start.clone(), interval.start.clone(), p.value));
            }
            if p.end > interval.end {
                out.push(Piece::new(interval.end.clone(), p.end.clone(), p.value));
            }
        }
        StepFunction::from_sorted_unchecked(out)
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        combine([(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &StepFunction) -> StepFunction {
        combine([(1.0, self), (-1.0, other)])
    }

    /// Re-runs canonicalization; a no-op on any value produced by this module.
    pub fn canonicalized(&self) -> StepFunction {
        StepFunction::from_sorted_unchecked(self.pieces.clone())
    }
}

/// Exact pointwise linear combination `Σ c_k f_k` over the common refinement
/// of all breakpoints.
///
/// Values on each elementary interval are accumulated in term order, so
/// `combine([(1, f), (-1, f)])` is exactly zero.
pub fn combine<'a, I>(terms: I) -> StepFunction
where
    I: IntoIterator<Item = (f64, &'a StepFunction)>,
{
    let terms: Vec<(f64, &StepFunction)> = terms
        .into_iter()
        .filter(|(c, f)| *c != 0.0 && !f.is_zero())
        .collect();
    match terms.len() {
        0 => return StepFunction::zero(),
        1 => return terms[0].1.scale(terms[0].0),
        _ => {}
    }
    let mut breaks: Vec<&DyadicRational> = terms
        .iter()
        .flat_map(|(_, f)| f.pieces.iter().flat_map(|p| [&p.start, &p.end]))
        .collect();
    breaks.sort_unstable();
    breaks.dedup();
    let mut values = vec![0.0f64; breaks.len().saturating_sub(1)];
    for (c, f) in &terms {
        let mut cursor = 0usize;
        for piece in &f.pieces {
            cursor += breaks[cursor..].partition_point(|b| *b < &piece.start);
            let mut k = cursor;
            while breaks[k] < &piece.end {
                values[k] += c * piece.value;
                k += 1;
            }
            cursor = k;
        }
    }
    let pieces = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, v)| Piece::new(breaks[k].clone(), breaks[k + 1].clone(), *v))
        .collect();
    StepFunction::from_sorted_unchecked(pieces)
}

/// Finds two members with overlapping supports, if any, by a sorted sweep.
pub fn first_overlap(functions: &[StepFunction]) -> Option<(usize, usize)> {
    let mut spans: Vec<(&DyadicRational, &DyadicRational, usize)> = functions
        .iter()
        .enumerate()
        .flat_map(|(k, f)| f.pieces.iter().map(move |p| (&p.start, &p.end, k)))
        .collect();
    spans.sort_by(|a, b| a.0.cmp(b.0).then(a.2.cmp(&b.2)));
    // Track the furthest-reaching span seen so far; pieces of one function
    // never overlap each other, so any overlap with it is cross-function.
    let mut reach: Option<(&DyadicRational, usize)> = None;
    for (start, end, k) in spans {
        if let Some((r_end, r_k)) = reach {
            if start < r_end && r_k != k {
                return Some((r_k.min(k), r_k.max(k)));
            }
            if end.cmp(r_end) == Ordering::Greater {
                reach = Some((end, k));
            }
        } else {
            reach = Some((end, k));
        }
    }
    None
}
