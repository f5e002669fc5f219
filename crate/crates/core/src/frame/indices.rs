//! Inductive choice of the translation indices `n_{k,i}` and an independent
//! brute-force verifier of the resulting support conditions.

use std::collections::HashSet;

use num_traits::ToPrimitive;

use super::schedule::FrameSchedule;
use super::sequence::TranslationSequence;
use crate::error::{Error, Result};
use crate::haar::{BasisEnumeration, HaarIndex};

/// Candidates examined per entry before the search is abandoned.
const SEARCH_LIMIT: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableEntry {
    /// Level `k`, 1-based: the entry translates `e_k`.
    pub level: usize,
    /// Position `i` within the level, 1-based.
    pub i: u64,
    pub n: u64,
    pub lambda: i64,
}

#[derive(Clone, Debug)]
pub struct IndexTable {
    pub entries: Vec<TableEntry>,
    /// `e_1, …, e_K`.
    pub atoms: Vec<HaarIndex>,
    pub sequence: TranslationSequence,
}

impl IndexTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn atom(&self, level: usize) -> &HaarIndex {
        &self.atoms[level - 1]
    }

    /// The entry with sequence index `n`, if `n` was selected.
    pub fn lookup(&self, n: u64) -> Option<&TableEntry> {
        self.entries
            .binary_search_by_key(&n, |e| e.n)
            .ok()
            .map(|k| &self.entries[k])
    }

    /// Largest selected index at the given level.
    pub fn last_index_of_level(&self, level: usize) -> Option<u64> {
        self.entries.iter().filter(|e| e.level == level).map(|e| e.n).max()
    }
}

/// Greedy selection: each `n_{k,i}` is the smallest index above its
/// predecessor whose translates stay clear of everything chosen so far.
///
/// With integer translations and cell-aligned atoms, all supports live on
/// unit cells, so the checks are membership tests on cell registries: the
/// cells of `f`'s atoms, the cells of all off-diagonal pieces `λ_u − λ_v + c_v`
/// and the cells covered by `e_1, …, e_K`. Off-diagonal pieces are kept off the
/// covered cells as well, which makes `S(h) − h` an exact disjoint sum.
pub fn choose_indices(sequence: &TranslationSequence, schedule: &FrameSchedule) -> Result<IndexTable> {
    sequence.check_usable()?;
    let atoms = BasisEnumeration.first(schedule.levels() as u64)?;
    let needed = schedule.total_atoms();
    let covered: HashSet<i64> = atoms.iter().map(|a| a.cell).collect();
    let lo = covered.iter().min().copied().unwrap_or(0);
    let hi = covered.iter().max().copied().unwrap_or(0);

    if let TranslationSequence::Sidon { prime, scale } = sequence {
        // Distinct differences spaced by `scale` cannot meet once `scale`
        // exceeds the spread of the covered cells.
        if (*scale as i64) > hi - lo + 1 {
            if needed > *prime {
                return Err(Error::SequenceExhausted {
                    needed: needed as usize,
                    available: *prime as usize,
                });
            }
            let mut entries = Vec::with_capacity(needed as usize);
            let mut n = 0;
            for (k, &size) in schedule.n.iter().enumerate() {
                for i in 1..=size {
                    n += 1;
                    let lambda = sequence.value(n).expect("within prime range");
                    entries.push(TableEntry { level: k + 1, i, n, lambda });
                }
            }
            return Ok(IndexTable {
                entries,
                atoms,
                sequence: sequence.clone(),
            });
        }
    }

    let mut f_cells: HashSet<i64> = HashSet::new();
    let mut off_cells: HashSet<i64> = HashSet::new();
    let mut prior: Vec<(i64, i64)> = Vec::new();
    let mut entries = Vec::new();
    let mut next = 1u64;
    let mut fresh: HashSet<i64> = HashSet::new();
    for (k, &size) in schedule.n.iter().enumerate() {
        let c = atoms[k].cell;
        for i in 1..=size {
            let start = next;
            loop {
                if next - start > SEARCH_LIMIT {
                    return Err(Error::Degenerate(format!(
                        "no admissible index for entry ({}, {i}) within {SEARCH_LIMIT} candidates",
                        k + 1
                    )));
                }
                let lambda = sequence.value(next).ok_or(Error::SequenceExhausted {
                    needed: needed as usize,
                    available: (next - 1) as usize,
                })?;
                next += 1;
                if prior.iter().any(|&(l, _)| (lambda - l).abs() <= 1) {
                    continue;
                }
                if f_cells.contains(&(c - lambda)) {
                    continue;
                }
                fresh.clear();
                let ok = prior.iter().all(|&(l, cu)| {
                    [l - lambda + c, lambda - l + cu].into_iter().all(|cell| {
                        !covered.contains(&cell) && !off_cells.contains(&cell) && fresh.insert(cell)
                    })
                });
                if !ok {
                    continue;
                }
                off_cells.extend(fresh.drain());
                f_cells.insert(c - lambda);
                prior.push((lambda, c));
                entries.push(TableEntry {
                    level: k + 1,
                    i,
                    n: next - 1,
                    lambda,
                });
                break;
            }
        }
    }
    Ok(IndexTable {
        entries,
        atoms,
        sequence: sequence.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Which family of conditions failed: 2..=5 for the inductive conditions,
    /// 6 and 7 for their consequences, 8 for an off-diagonal piece meeting a
    /// covered cell.
    pub condition: u8,
    /// Positions (0-based, lexicographic) of the tuples involved.
    pub tuple: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct ConditionReport {
    /// Number of instances examined per condition 2..=8.
    pub checked: [u64; 7],
    pub violations: Vec<Violation>,
}

impl ConditionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, condition: u8, tuple: Vec<usize>) {
        if self.violations.len() < 16 {
            self.violations.push(Violation { condition, tuple });
        }
    }
}

/// Support hull of `T_shift e` in units of `2^-scale`.
type Hull = (i128, i128);

fn overlaps(a: Hull, b: Hull) -> bool {
    a.0 < b.1 && b.0 < a.1
}

/// Checks every applicable tuple of the inductive conditions against exact
/// support hulls of the translated atoms. Quartic in the table size; meant for
/// demo-scale tables.
pub fn verify_conditions(table: &IndexTable) -> Result<ConditionReport> {
    let scale = table.atoms.iter().map(|a| a.level.saturating_sub(1)).max().unwrap_or(0);
    let local: Vec<Hull> = table
        .atoms
        .iter()
        .map(|a| {
            let s = a.support();
            let conv = |x: &crate::stepfn::DyadicRational| {
                (x.numerator() << (scale - x.exponent()))
                    .to_i128()
                    .ok_or_else(|| Error::Overflow(format!("support endpoint {x}")))
            };
            Ok((conv(s.start())?, conv(s.end())?))
        })
        .collect::<Result<_>>()?;
    let lam: Vec<i128> = table.entries.iter().map(|e| (e.lambda as i128) << scale).collect();
    let hull_of = |atom_of: usize, shift: i128| {
        let (a, b) = local[table.entries[atom_of].level - 1];
        (a + shift, b + shift)
    };
    // T_{λ_u − λ_v} e_{level(v)}
    let piece = |u: usize, v: usize| hull_of(v, lam[u] - lam[v]);
    let f_atom = |u: usize| hull_of(u, -lam[u]);
    let m = table.len();
    let unit = 1i128 << scale;
    let mut rep = ConditionReport::default();

    for x in 0..m {
        for s in 0..x {
            rep.checked[0] += 1;
            if (lam[x] - lam[s]).abs() <= unit {
                rep.record(2, vec![x, s]);
            }
            rep.checked[1] += 1;
            if overlaps(f_atom(x), f_atom(s)) {
                rep.record(3, vec![x, s]);
            }
        }
        // x plays (k,i): the largest tuple involved.
        for s in 0..x {
            let left4 = piece(s, x);
            let left5 = piece(x, s);
            for kp in 0..=x {
                for sp in 0..=x {
                    if sp == kp {
                        continue;
                    }
                    let right = piece(sp, kp);
                    if sp != s {
                        rep.checked[2] += 1;
                        if overlaps(left4, right) {
                            rep.record(4, vec![x, s, kp, sp]);
                        }
                    }
                    if sp < x {
                        rep.checked[3] += 1;
                        if overlaps(left5, right) {
                            rep.record(5, vec![x, s, kp, sp]);
                        }
                    }
                }
            }
        }
    }

    // Consequences, by sorting: all atoms of f are pairwise disjoint, and all
    // off-diagonal pieces of all translates are pairwise disjoint.
    let mut f_hulls: Vec<(Hull, usize)> = (0..m).map(|u| (f_atom(u), u)).collect();
    rep.checked[4] = m as u64;
    for (a, b) in sweep(&mut f_hulls) {
        rep.record(6, vec![a, b]);
    }
    let mut off: Vec<(Hull, usize)> = Vec::with_capacity(m * m.saturating_sub(1));
    for u in 0..m {
        for v in 0..m {
            if u != v {
                off.push((piece(u, v), u * m + v));
            }
        }
    }
    rep.checked[5] = off.len() as u64;
    for (a, b) in sweep(&mut off) {
        rep.record(7, vec![a / m, a % m, b / m, b % m]);
    }
    let covered: Vec<Hull> = table
        .atoms
        .iter()
        .map(|a| ((a.cell as i128) << scale, ((a.cell + 1) as i128) << scale))
        .collect();
    for (h, tag) in &off {
        rep.checked[6] += 1;
        if covered.iter().any(|c| overlaps(*c, *h)) {
            rep.record(8, vec![tag / m, tag % m]);
        }
    }
    Ok(rep)
}

/// Overlapping pairs among hulls (each offending hull reported once, against
/// the hull reaching furthest right before it).
fn sweep(hulls: &mut [(Hull, usize)]) -> Vec<(usize, usize)> {
    hulls.sort_by_key(|h| h.0);
    let mut bad = Vec::new();
    let mut reach: Option<(i128, usize)> = None;
    for &(h, tag) in hulls.iter() {
        if let Some((end, who)) = reach {
            if h.0 < end {
                bad.push((who, tag));
            }
        }
        if reach.map_or(true, |(end, _)| h.1 > end) {
            reach = Some((h.1, tag));
        }
    }
    bad
}
