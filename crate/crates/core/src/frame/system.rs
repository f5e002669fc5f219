//! The frame function `f`, the functionals `g*_j` and the truncated frame operator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::indices::{choose_indices, IndexTable};
use super::schedule::FrameSchedule;
use super::sequence::TranslationSequence;
use crate::error::Result;
use crate::haar::{atom, coefficient, dual_atom};
use crate::numeric::abs_pow;
use crate::stepfn::superpose::Term;
use crate::stepfn::{StepFunction, Superposition};

#[derive(Clone, Debug)]
pub struct FrameSystem {
    pub schedule: FrameSchedule,
    pub table: IndexTable,
    /// `f = Σ_{k,i} N_k^{-1/2} T_{-λ_{n_{k,i}}} e_k`, kept factored.
    f: Superposition,
    /// Template index of `f` inside `f` itself (and any superposition cloned from it).
    f_template: usize,
}

impl FrameSystem {
    pub fn build(sequence: &TranslationSequence, schedule: &FrameSchedule) -> Result<Self> {
        let table = choose_indices(sequence, schedule)?;
        FrameSystem::from_table(schedule.clone(), table)
    }

    pub fn from_table(schedule: FrameSchedule, table: IndexTable) -> Result<Self> {
        let p = schedule.p;
        let mut f = Superposition::new();
        let protos = table
            .atoms
            .iter()
            .map(|ix| f.add_prototype(&atom(ix, p)?))
            .collect::<Result<Vec<_>>>()?;
        let terms = table
            .entries
            .iter()
            .map(|e| Term::new(schedule.weight(e.level), -e.lambda, protos[e.level - 1]))
            .collect();
        let f_template = f.add_template(terms)?;
        f.push(1.0, 0, f_template);
        Ok(FrameSystem {
            schedule,
            table,
            f,
            f_template,
        })
    }

    pub fn p(&self) -> f64 {
        self.schedule.p
    }

    pub fn frame_function(&self) -> &Superposition {
        &self.f
    }

    /// `‖f‖_p^p`, evaluated directly from the expansion.
    pub fn f_norm_pow(&self) -> Result<f64> {
        self.f.lp_norm_pow(self.p())
    }

    /// `g*_j`: `N_k^{-1/2} e*_k` when `j = n_{k,i}`, zero otherwise.
    pub fn dual_functional(&self, j: u64) -> Result<StepFunction> {
        match self.table.lookup(j) {
            Some(e) => Ok(dual_atom(self.table.atom(e.level), self.p())?.scale(self.schedule.weight(e.level))),
            None => Ok(StepFunction::zero()),
        }
    }

    /// `e*_k(h)` for every covered level `k`.
    pub fn basis_coefficients(&self, h: &StepFunction) -> Result<Vec<f64>> {
        self.table.atoms.iter().map(|ix| coefficient(h, ix, self.p())).collect()
    }

    /// Same, for a lazily represented function.
    pub fn basis_coefficients_lazy(&self, h: &Superposition) -> Result<Vec<f64>> {
        self.table
            .atoms
            .iter()
            .map(|ix| h.pair(&dual_atom(ix, self.p())?))
            .collect()
    }

    /// `Σ_k e*_k(h) e_k` from given coefficients.
    pub fn covered_part(&self, coefs: &[f64]) -> Result<StepFunction> {
        let atoms = self
            .table
            .atoms
            .iter()
            .map(|ix| atom(ix, self.p()))
            .collect::<Result<Vec<_>>>()?;
        Ok(crate::stepfn::combine(coefs.iter().copied().zip(atoms.iter())))
    }

    /// `Σ_{j ∈ selected} g*_j(h) T_{λ_j} f` given the level coefficients
    /// `e*_k(h)`; `select` picks table positions.
    pub fn frame_sum(&self, coefs: &[f64], mut select: impl FnMut(usize) -> bool) -> Superposition {
        let mut out = self.f.scaled(0.0);
        for (pos, e) in self.table.entries.iter().enumerate() {
            let c = coefs[e.level - 1];
            if c != 0.0 && select(pos) {
                out.push(self.schedule.weight(e.level) * c, e.lambda, self.f_template);
            }
        }
        out
    }

    /// `S(h) = Σ_j g*_j(h) T_{λ_j} f` over the table.
    pub fn apply_frame_operator(&self, h: &StepFunction) -> Result<Superposition> {
        let coefs = self.basis_coefficients(h)?;
        Ok(self.frame_sum(&coefs, |_| true))
    }

    /// Closed form of `‖S(e_s) − e_s‖_p^p` for a covered level `s`, valid
    /// because all off-diagonal pieces are disjoint from each other and from
    /// the covered cells: `N_s^{1-p/2} (Σ_k N_k^{1-p/2} − N_s^{-p/2})`.
    pub fn closed_form_error_pow(&self, s: usize) -> f64 {
        let p = self.p();
        let ns = self.schedule.n[s - 1] as f64;
        ns.powf(1.0 - p / 2.0) * (self.schedule.sigma_partial() - ns.powf(-p / 2.0))
    }

    /// Closed form of `‖S(h) − h‖_p^p` for `h = Σ_k a_k e_k` in the covered span.
    pub fn closed_form_error_pow_span(&self, coefs: &[f64]) -> f64 {
        let p = self.p();
        (1..=self.schedule.levels())
            .map(|s| abs_pow(coefs[s - 1], p) * self.closed_form_error_pow(s))
            .sum()
    }

    /// Largest `‖Σ_{j∈A} g*_j(h) T_{λ_j} f‖_p` over `trials` random subsets `A`
    /// of the table entries with index above `threshold`. Each trial keeps its
    /// draws fixed across thresholds, so the subsets for larger thresholds are
    /// nested inside those for smaller ones.
    pub fn unconditional_tail_check(
        &self,
        h: &StepFunction,
        threshold: u64,
        trials: u64,
        seed: u64,
    ) -> Result<f64> {
        let coefs = self.basis_coefficients(h)?;
        let mut worst = 0.0f64;
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let keep: Vec<bool> = (0..self.table.len()).map(|_| rng.gen_bool(0.5)).collect();
            let sum = self.frame_sum(&coefs, |pos| keep[pos] && self.table.entries[pos].n > threshold);
            if !sum.is_empty() {
                worst = worst.max(sum.lp_norm(self.p())?);
            }
        }
        Ok(worst)
    }
}
