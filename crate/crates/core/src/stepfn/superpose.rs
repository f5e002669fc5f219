//! Lazy linear combinations of integer translates.
//!
//! A frame sum `Σ_u c_u T_{λ_u} f`, with `f` itself a sum of thousands of
//! translated atoms, expands to tens of millions of pieces at certified
//! schedule sizes. [`Superposition`] keeps it factored as two levels:
//! *templates* are lists of `(coef, shift, prototype)` terms, and the
//! superposition is a list of `(coef, shift, template)` blocks. Norms and
//! pairings are evaluated directly from the expansion, cell by cell, without
//! assuming anything about overlaps.

use std::collections::HashMap;
use std::sync::Arc;

use super::{combine, DyadicRational, Interval, StepFunction};
use crate::error::{Error, Result};
use crate::numeric::{abs_pow, CompensatedSum};

/// Expanded entries handled per pass of the cell-grouped norm evaluation.
const PASS_BUDGET: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub shift: i64,
    pub index: u32,
}

impl Term {
    pub fn new(coef: f64, shift: i64, index: usize) -> Self {
        Term {
            coef,
            shift,
            index: index as u32,
        }
    }
}

#[derive(Debug)]
struct Prototype {
    function: StepFunction,
    /// `(cell offset, restriction to that unit cell moved to [0, 1))`.
    cells: Vec<(i64, StepFunction)>,
}

fn cell_of(x: &DyadicRational) -> Result<i64> {
    x.floor()
        .to_i64()
        .ok_or_else(|| Error::Overflow(format!("position {x} does not fit a 64-bit cell index")))
}

fn split_cells(f: &StepFunction) -> Result<Vec<(i64, StepFunction)>> {
    let Some(support) = f.support() else {
        return Ok(Vec::new());
    };
    let lo = cell_of(support.start())?;
    let hi = cell_of(&support.end().ceil())?;
    let mut cells = Vec::new();
    for c in lo..hi {
        let local = f.restrict(&Interval::unit(c));
        if !local.is_zero() {
            cells.push((c, local.translate_int(-c)));
        }
    }
    Ok(cells)
}

impl Prototype {
    fn new(function: &StepFunction) -> Result<Self> {
        Ok(Prototype {
            function: function.clone(),
            cells: split_cells(function)?,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Superposition {
    protos: Vec<Arc<Prototype>>,
    templates: Vec<Arc<Vec<Term>>>,
    blocks: Vec<Term>,
}

impl Superposition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_step(f: &StepFunction) -> Result<Self> {
        let mut s = Superposition::new();
        let proto = s.add_prototype(f)?;
        let t = s.add_template(vec![Term::new(1.0, 0, proto)])?;
        s.push(1.0, 0, t);
        Ok(s)
    }

    pub fn add_prototype(&mut self, f: &StepFunction) -> Result<usize> {
        self.protos.push(Arc::new(Prototype::new(f)?));
        Ok(self.protos.len() - 1)
    }

    pub fn add_template(&mut self, terms: Vec<Term>) -> Result<usize> {
        if let Some(bad) = terms.iter().find(|t| t.index as usize >= self.protos.len()) {
            return Err(Error::InvalidArgument(format!("template refers to missing prototype {}", bad.index)));
        }
        self.templates.push(Arc::new(terms));
        Ok(self.templates.len() - 1)
    }

    /// Adds `coef · T_shift (template)`.
    pub fn push(&mut self, coef: f64, shift: i64, template: usize) {
        assert!(template < self.templates.len(), "unknown template {template}");
        if coef != 0.0 {
            self.blocks.push(Term::new(coef, shift, template));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Number of translated prototypes in the full expansion.
    pub fn term_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| self.templates[b.index as usize].len())
            .sum()
    }

    /// `self += c · other`.
    pub fn scaled_add(&mut self, c: f64, other: &Superposition) {
        if c == 0.0 {
            return;
        }
        let proto_base = self.protos.len();
        let template_base = self.templates.len();
        self.protos.extend(other.protos.iter().cloned());
        for t in &other.templates {
            let shifted: Vec<Term> = t
                .iter()
                .map(|term| Term {
                    index: term.index + proto_base as u32,
                    ..*term
                })
                .collect();
            self.templates.push(Arc::new(shifted));
        }
        for b in &other.blocks {
            self.push(c * b.coef, b.shift, b.index as usize + template_base);
        }
    }

    pub fn scaled(&self, c: f64) -> Superposition {
        let mut out = Superposition {
            protos: self.protos.clone(),
            templates: self.templates.clone(),
            blocks: Vec::new(),
        };
        for b in &self.blocks {
            out.push(c * b.coef, b.shift, b.index as usize);
        }
        out
    }

    pub fn translate(&self, shift: i64) -> Superposition {
        let mut out = self.clone();
        for b in &mut out.blocks {
            b.shift += shift;
        }
        out
    }

    /// Visits every expanded term as `(coef, shift, prototype)`.
    pub fn for_each_term(&self, mut visit: impl FnMut(f64, i64, &StepFunction)) {
        for b in &self.blocks {
            for t in self.templates[b.index as usize].iter() {
                let coef = b.coef * t.coef;
                if coef != 0.0 {
                    visit(coef, b.shift + t.shift, &self.protos[t.index as usize].function);
                }
            }
        }
    }

    fn for_each_cell(&self, mut visit: impl FnMut(i64, f64, u32, u32)) {
        for b in &self.blocks {
            for t in self.templates[b.index as usize].iter() {
                let coef = b.coef * t.coef;
                if coef == 0.0 {
                    continue;
                }
                let shift = b.shift + t.shift;
                for (k, (offset, _)) in self.protos[t.index as usize].cells.iter().enumerate() {
                    visit(shift + offset, coef, t.index, k as u32);
                }
            }
        }
    }

    /// `∫ |Σ terms|^p`, evaluated cell by cell. Cells hit by a single term use
    /// that term's piece values directly; cells hit by several terms are
    /// combined exactly before integrating.
    pub fn lp_norm_pow(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        let local_pow: Vec<Vec<f64>> = self
            .protos
            .iter()
            .map(|proto| {
                proto
                    .cells
                    .iter()
                    .map(|(_, local)| local.lp_norm_pow(p).unwrap_or(f64::NAN))
                    .collect()
            })
            .collect();
        let mut entries_total = 0usize;
        self.for_each_cell(|_, _, _, _| entries_total += 1);
        let passes = entries_total.div_ceil(PASS_BUDGET).max(1) as i64;

        let mut acc = CompensatedSum::new();
        let mut entries: Vec<(i64, u32, u32, f64)> = Vec::new();
        for pass in 0..passes {
            entries.clear();
            self.for_each_cell(|cell, coef, proto, local| {
                if cell.rem_euclid(passes) == pass {
                    entries.push((cell, proto, local, coef));
                }
            });
            entries.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < entries.len() {
                let mut j = i + 1;
                while j < entries.len() && entries[j].0 == entries[i].0 {
                    j += 1;
                }
                if j - i == 1 {
                    let (_, proto, local, coef) = entries[i];
                    acc.add(abs_pow(coef, p) * local_pow[proto as usize][local as usize]);
                } else {
                    let group = &entries[i..j];
                    let merged = combine(group.iter().map(|&(_, proto, local, coef)| {
                        (coef, &self.protos[proto as usize].cells[local as usize].1)
                    }));
                    acc.add(merged.lp_norm_pow(p)?);
                }
                i = j;
            }
        }
        Ok(acc.value())
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        Ok(self.lp_norm_pow(p)?.powf(1.0 / p))
    }

    /// `∫ (Σ terms) · g`.
    pub fn pair(&self, g: &StepFunction) -> Result<f64> {
        let localized: HashMap<i64, StepFunction> = split_cells(g)?.into_iter().collect();
        if localized.is_empty() {
            return Ok(0.0);
        }
        let lo = *localized.keys().min().unwrap();
        let hi = *localized.keys().max().unwrap();
        let mut acc = CompensatedSum::new();
        for b in &self.blocks {
            for t in self.templates[b.index as usize].iter() {
                let coef = b.coef * t.coef;
                if coef == 0.0 {
                    continue;
                }
                let shift = b.shift + t.shift;
                for (offset, local) in &self.protos[t.index as usize].cells {
                    let cell = shift + offset;
                    if cell < lo || cell > hi {
                        continue;
                    }
                    if let Some(gl) = localized.get(&cell) {
                        acc.add(coef * local.pair(gl));
                    }
                }
            }
        }
        Ok(acc.value())
    }

    /// Full expansion as a single canonical step function.
    pub fn materialize(&self) -> StepFunction {
        let mut shifted: Vec<(f64, StepFunction)> = Vec::with_capacity(self.term_count());
        self.for_each_term(|coef, shift, proto| shifted.push((coef, proto.translate_int(shift))));
        combine(shifted.iter().map(|(c, f)| (*c, f)))
    }
}
