//! Functions assembled from atoms on `[0,1]` placed at the positions `3^i`.
//!
//! Atoms are grouped into consecutive blocks `J_1, J_2, …`; every atom of block
//! `j` is `coef_j · atom_j`. With `f = Σ_i coef T_{3^i} atom` and
//! `f_i = T_{-3^i} f`, each `f_i` splits into its local part on `[0,1]` and a
//! remainder `g_i` supported on `∪_{ℓ≠i} [3^ℓ − 3^i, 3^ℓ − 3^i + 1]`. Distinct
//! pairs `(ℓ, i)` give distinct differences of powers of three, so the
//! remainders are pairwise disjoint and miss `[0,1]`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::stepfn::{DyadicRational, Interval, Piece, StepFunction};

/// Upper limit on the number of placed atoms (positions up to `3^4096`).
pub const MAX_PLACED: u64 = 4096;

#[derive(Clone, Debug)]
pub struct PlacementBlock {
    pub size: u64,
    pub coef: f64,
    /// Supported in `[0,1]`.
    pub atom: StepFunction,
}

#[derive(Clone, Debug)]
pub struct Placement {
    blocks: Vec<PlacementBlock>,
    /// `block_of[i-1]` is the 0-based block of atom `i`.
    block_of: Vec<usize>,
    /// `coef_j · atom_j`.
    local: Vec<StepFunction>,
}

impl Placement {
    pub fn new(blocks: Vec<PlacementBlock>) -> Result<Self> {
        let total: u64 = blocks.iter().map(|b| b.size).sum();
        if total == 0 {
            return Err(Error::InvalidArgument("placement needs at least one atom".into()));
        }
        if total > MAX_PLACED {
            return Err(Error::Overflow(format!("{total} placed atoms exceed the limit {MAX_PLACED}")));
        }
        let unit = Interval::unit(0);
        for (j, b) in blocks.iter().enumerate() {
            if let Some(s) = b.atom.support() {
                if !unit.contains(&s) {
                    return Err(Error::InvalidArgument(format!("atom of block {} leaves [0,1]", j + 1)));
                }
            }
        }
        let block_of = blocks
            .iter()
            .enumerate()
            .flat_map(|(j, b)| std::iter::repeat(j).take(b.size as usize))
            .collect();
        let local = blocks.iter().map(|b| b.atom.scale(b.coef)).collect();
        Ok(Placement { blocks, block_of, local })
    }

    pub fn blocks(&self) -> &[PlacementBlock] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn count(&self) -> usize {
        self.block_of.len()
    }

    /// 1-based block of the 1-based atom `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i - 1] + 1
    }

    /// 1-based atom indices of block `j`.
    pub fn members(&self, j: usize) -> RangeInclusive<usize> {
        let start: u64 = self.blocks[..j - 1].iter().map(|b| b.size).sum();
        (start as usize + 1)..=(start + self.blocks[j - 1].size) as usize
    }

    /// `coef_j · atom_j` for block `j`.
    pub fn local(&self, j: usize) -> &StepFunction {
        &self.local[j - 1]
    }

    pub fn position(i: usize) -> DyadicRational {
        DyadicRational::pow3(i as u32)
    }

    /// `Σ_{ℓ ∈ which} T_{3^ℓ + offset} (local part of ℓ)`, `which` ascending.
    fn placed(&self, which: impl Iterator<Item = usize>, offset: &DyadicRational) -> StepFunction {
        let mut pieces = Vec::new();
        for l in which {
            let shift = &Placement::position(l) + offset;
            for p in self.local[self.block_of[l - 1]].pieces() {
                pieces.push(Piece::new(&p.start + &shift, &p.end + &shift, p.value));
            }
        }
        StepFunction::from_sorted_unchecked(pieces)
    }

    /// `f`.
    pub fn function(&self) -> StepFunction {
        self.placed(1..=self.count(), &DyadicRational::zero())
    }

    /// `f_i = T_{-3^i} f`.
    pub fn translate_of(&self, i: usize) -> StepFunction {
        self.placed(1..=self.count(), &-Placement::position(i))
    }

    /// `g_i = f_i − (local part of i)`, built directly from the other atoms.
    pub fn remainder(&self, i: usize) -> StepFunction {
        self.placed((1..=self.count()).filter(|&l| l != i), &-Placement::position(i))
    }

    /// Closed form of `‖f‖_p^p`: `Σ_j size_j ‖coef_j atom_j‖_p^p`.
    pub fn norm_pow_closed_form(&self, p: f64) -> Result<f64> {
        let mut s = 0.0;
        for (b, l) in self.blocks.iter().zip(&self.local) {
            s += b.size as f64 * l.lp_norm_pow(p)?;
        }
        Ok(s)
    }

    /// `‖g_i‖_p^p` in closed form (all other atoms, disjointly placed).
    pub fn remainder_norm_pow(&self, i: usize, p: f64) -> Result<f64> {
        Ok(self.norm_pow_closed_form(p)? - self.local[self.block_of[i - 1]].lp_norm_pow(p)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::{combine, first_overlap};

    fn sample() -> Placement {
        let half = Interval::new(0.into(), DyadicRational::new(1, 1)).unwrap();
        Placement::new(vec![
            PlacementBlock {
                size: 2,
                coef: 0.5,
                atom: StepFunction::indicator(&Interval::unit(0)),
            },
            PlacementBlock {
                size: 3,
                coef: 0.25,
                atom: StepFunction::constant_on(&half, 2.0),
            },
        ])
        .unwrap()
    }

    #[test]
    fn decomposition_is_exact() {
        let pl = sample();
        for i in 1..=pl.count() {
            let fi = pl.translate_of(i);
            let gi = pl.remainder(i);
            let r = combine([(1.0, &fi), (-1.0, pl.local(pl.block_of(i))), (-1.0, &gi)]);
            assert!(r.is_zero());
            assert!(gi.restrict(&Interval::unit(0)).is_zero());
        }
        let gs: Vec<StepFunction> = (1..=pl.count()).map(|i| pl.remainder(i)).collect();
        assert_eq!(first_overlap(&gs), None);
    }

    #[test]
    fn blocks_and_norms() {
        let pl = sample();
        assert_eq!(pl.members(2), 3..=5);
        assert_eq!(pl.block_of(3), 2);
        let f = pl.function();
        let closed = pl.norm_pow_closed_form(3.0).unwrap();
        assert!((f.lp_norm_pow(3.0).unwrap() - closed).abs() < 1e-15);
        let g = pl.remainder(1);
        assert!((g.lp_norm_pow(3.0).unwrap() - pl.remainder_norm_pow(1, 3.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rejects_atoms_outside_the_unit_interval() {
        let bad = PlacementBlock {
            size: 1,
            coef: 1.0,
            atom: StepFunction::indicator(&Interval::unit(1)),
        };
        assert!(Placement::new(vec![bad]).is_err());
    }
}
