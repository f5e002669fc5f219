//! The translated Haar system of `L^p(ℝ)`.
//!
//! Each integer cell `[c, c+1]` carries its own `L^p`-normalized Haar basis:
//! level 0 is the indicator of the cell, and level `n ≥ 1` holds the
//! `2^{n-1}` two-valued functions on the dyadic subintervals of length
//! `2^{1-n}` (level 1 is the mother function on the whole cell). The atoms of
//! all cells are enumerated diagonally in `|cell| + level`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::stepfn::{DyadicRational, Interval, Piece, StepFunction};

/// Deepest level whose breakpoints and values are handled.
pub const MAX_LEVEL: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HaarIndex {
    pub cell: i64,
    pub level: u32,
    pub offset: u64,
}

/// Number of atoms on one cell at a given level.
pub fn level_width(level: u32) -> u64 {
    if level == 0 {
        1
    } else {
        1u64 << (level - 1)
    }
}

impl HaarIndex {
    pub fn new(cell: i64, level: u32, offset: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::InvalidHaarIndex(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        if offset >= level_width(level) {
            return Err(Error::InvalidHaarIndex(format!(
                "offset {offset} out of range for level {level} (width {})",
                level_width(level)
            )));
        }
        Ok(HaarIndex { cell, level, offset })
    }

    pub fn indicator(cell: i64) -> Self {
        HaarIndex {
            cell,
            level: 0,
            offset: 0,
        }
    }

    /// The `j`-th atom (1-based) of a single cell, in level-then-offset order.
    pub fn within_cell(cell: i64, j: u64) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidHaarIndex("within-cell position starts at 1".into()));
        }
        if j == 1 {
            return Ok(HaarIndex::indicator(cell));
        }
        let level = 64 - (j - 1).leading_zeros();
        HaarIndex::new(cell, level, j - 1 - level_width(level))
    }

    /// Inverse of [`HaarIndex::within_cell`].
    pub fn position_in_cell(&self) -> u64 {
        if self.level == 0 {
            1
        } else {
            1 + level_width(self.level) + self.offset
        }
    }

    pub fn translated(&self, cells: i64) -> Self {
        HaarIndex {
            cell: self.cell + cells,
            ..*self
        }
    }

    fn bounds(&self) -> (DyadicRational, DyadicRational, DyadicRational) {
        if self.level == 0 {
            let a = DyadicRational::from_int(self.cell);
            let b = DyadicRational::from_int(self.cell + 1);
            let mid = DyadicRational::new(2 * self.cell + 1, 1);
            return (a, mid, b);
        }
        let e = self.level - 1;
        let num = (BigInt::from(self.cell) << e) + BigInt::from(self.offset);
        let start = DyadicRational::from_parts(num.clone(), e);
        let mid = DyadicRational::from_parts(2 * num.clone() + 1, e + 1);
        let end = DyadicRational::from_parts(num + 1, e);
        (start, mid, end)
    }

    pub fn support(&self) -> Interval {
        let (a, _, b) = self.bounds();
        Interval::new(a, b).expect("Haar support is a proper interval")
    }
}

impl fmt::Display for HaarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.cell, self.level, self.offset)
    }
}

impl FromStr for HaarIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::InvalidHaarIndex(format!("expected cell:level:offset, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let cell = parts[0].parse().map_err(|_| bad())?;
        let level = parts[1].parse().map_err(|_| bad())?;
        let offset = parts[2].parse().map_err(|_| bad())?;
        HaarIndex::new(cell, level, offset)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn amplitude(level: u32, p: f64) -> f64 {
    if level == 0 {
        1.0
    } else {
        2f64.powf((level - 1) as f64 / p)
    }
}

fn two_valued(ix: &HaarIndex, hi: f64, lo: f64) -> StepFunction {
    let (a, mid, b) = ix.bounds();
    if ix.level == 0 {
        return StepFunction::indicator(&Interval::new(a, b).unwrap());
    }
    StepFunction::from_sorted_unchecked(vec![Piece::new(a, mid.clone(), hi), Piece::new(mid, b, lo)])
}

/// `L^p`-normalized atom; positive on the left half of its support.
pub fn atom(ix: &HaarIndex, p: f64) -> Result<StepFunction> {
    check_p(p)?;
    let v = amplitude(ix.level, p);
    Ok(two_valued(ix, v, -v))
}

/// `|h|^{p-1} sign(h)` for the atom `h`; biorthogonal to the whole system.
pub fn dual_atom(ix: &HaarIndex, p: f64) -> Result<StepFunction> {
    check_p(p)?;
    let v = amplitude(ix.level, p).powf(p - 1.0);
    Ok(two_valued(ix, v, -v))
}

pub fn coefficient(h: &StepFunction, ix: &HaarIndex, p: f64) -> Result<f64> {
    Ok(h.pair(&dual_atom(ix, p)?))
}

/// The configured unconditionality constant, or `max(p-1, 1/(p-1))`.
pub fn unconditionality_constant(p: f64, configured: Option<f64>) -> Result<f64> {
    check_p(p)?;
    match configured {
        Some(c) if c.is_finite() && c >= 1.0 => Ok(c),
        Some(c) => Err(Error::InvalidArgument(format!("unconditionality constant {c} must be >= 1"))),
        None => Ok((p - 1.0).max(1.0 / (p - 1.0))),
    }
}

/// All atoms of one cell up to and including `max_level`.
pub fn cell_indices(cell: i64, max_level: u32) -> Vec<HaarIndex> {
    (0..=max_level)
        .flat_map(|n| (0..level_width(n)).map(move |k| HaarIndex { cell, level: n, offset: k }))
        .collect()
}

/// Haar coefficients of `h` over every cell it touches, up to `max_level`.
/// Exact reconstruction holds when `max_level >= h.resolution() + 1`.
pub fn expand(h: &StepFunction, p: f64, max_level: u32) -> Result<Vec<(HaarIndex, f64)>> {
    check_p(p)?;
    let Some(support) = h.support() else {
        return Ok(Vec::new());
    };
    let cell = |x: &DyadicRational| {
        x.to_i64()
            .ok_or_else(|| Error::Overflow(format!("support endpoint {x} outside 64-bit cells")))
    };
    let lo = cell(&support.start().floor())?;
    let hi = cell(&support.end().ceil())?;
    let mut out = Vec::new();
    for c in lo..hi {
        let local = h.restrict(&Interval::unit(c));
        if local.is_zero() {
            continue;
        }
        for ix in cell_indices(c, max_level) {
            let a = coefficient(&local, &ix, p)?;
            if a != 0.0 {
                out.push((ix, a));
            }
        }
    }
    Ok(out)
}

/// Diagonal enumeration `k ↦ e_k` (1-based) of the translated Haar system.
///
/// Group `g` holds the atoms with `|cell| + level = g`, ordered by `|cell|`
/// ascending, negative cell before positive, then by offset. Group `g` has
/// `3·2^{g-1}` members (one for `g = 0`).
#[derive(Clone, Copy, Debug, Default)]
pub struct BasisEnumeration;

impl BasisEnumeration {
    fn cumulative(g: u32) -> u64 {
        3 * (1u64 << g) - 2
    }

    pub fn position(&self, k: u64) -> Result<HaarIndex> {
        if k == 0 {
            return Err(Error::InvalidHaarIndex("enumeration starts at 1".into()));
        }
        let mut g = 0u32;
        while Self::cumulative(g) < k {
            g += 1;
            if g > MAX_LEVEL {
                return Err(Error::Overflow(format!("position {k} beyond supported levels")));
            }
        }
        let mut r = k - if g == 0 { 0 } else { Self::cumulative(g - 1) } - 1;
        for a in 0..=g as i64 {
            let level = g - a as u32;
            let w = level_width(level);
            let signs: &[i64] = if a == 0 { &[1] } else { &[-1, 1] };
            for &s in signs {
                if r < w {
                    return HaarIndex::new(s * a, level, r);
                }
                r -= w;
            }
        }
        unreachable!("group sizes account for every position")
    }

    pub fn index_of(&self, ix: &HaarIndex) -> Result<u64> {
        let a = ix.cell.unsigned_abs();
        let g = a + ix.level as u64;
        if g > MAX_LEVEL as u64 {
            return Err(Error::Overflow(format!("{ix} beyond supported levels")));
        }
        let g = g as u32;
        let mut k = if g == 0 { 0 } else { Self::cumulative(g - 1) };
        for b in 0..a {
            let w = level_width(g - b as u32);
            k += if b == 0 { w } else { 2 * w };
        }
        if ix.cell > 0 {
            k += level_width(ix.level);
        }
        Ok(k + ix.offset + 1)
    }

    /// `e_1, …, e_count`.
    pub fn first(&self, count: u64) -> Result<Vec<HaarIndex>> {
        (1..=count).map(|k| self.position(k)).collect()
    }
}
