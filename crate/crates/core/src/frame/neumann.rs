//! Inverting the truncated frame operator by the Neumann series.
//!
//! The truncated operator acts as `S` on the span `V` of the covered atoms and
//! as the identity off it: `S_K(y) = S(Π_V y) + (y − Π_V y)`. On `V` it agrees
//! with the table-truncated frame operator, and `‖S_K − Id‖` is bounded by the
//! certified contraction.

use super::system::FrameSystem;
use crate::error::{Error, Result};
use crate::stepfn::{StepFunction, Superposition};

#[derive(Clone, Debug)]
pub struct NeumannOutcome {
    /// `y ≈ S_K^{-1} h`.
    pub solution: Superposition,
    /// Corrections applied.
    pub iterations: usize,
    /// `‖h − S_K y_m‖_p` for `m = 0..=iterations`.
    pub residuals: Vec<f64>,
}

impl FrameSystem {
    /// `S_K(y)`.
    pub fn apply_truncated(&self, y: &Superposition) -> Result<Superposition> {
        let coefs = self.basis_coefficients_lazy(y)?;
        let mut out = self.frame_sum(&coefs, |_| true);
        out.scaled_add(1.0, y);
        let covered = Superposition::from_step(&self.covered_part(&coefs)?)?;
        out.scaled_add(-1.0, &covered);
        Ok(out)
    }

    /// `y = Σ_{m ≤ M} (Id − S_K)^m h`, stopping once `‖S_K y − h‖_p ≤ tol`.
    pub fn neumann_inverse_apply(&self, h: &StepFunction, tol: f64, max_iter: usize) -> Result<NeumannOutcome> {
        let p = self.p();
        let target = Superposition::from_step(h)?;
        let mut y = target.clone();
        let mut residuals = Vec::new();
        for m in 0..=max_iter {
            let mut r = target.clone();
            r.scaled_add(-1.0, &self.apply_truncated(&y)?);
            let norm = r.lp_norm(p)?;
            residuals.push(norm);
            if norm <= tol {
                return Ok(NeumannOutcome {
                    solution: y,
                    iterations: m,
                    residuals,
                });
            }
            if m == max_iter {
                break;
            }
            y.scaled_add(1.0, &r);
        }
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: *residuals.last().unwrap(),
        })
    }

    /// Iterations the certified contraction allows for reaching `tol` from `‖h‖_p`:
    /// `⌈log(tol/‖h‖) / log B*⌉`.
    pub fn iteration_budget(&self, h_norm: f64, tol: f64) -> Option<usize> {
        let b = self.schedule.contraction();
        if !(b > 0.0 && b < 1.0) {
            return None;
        }
        if h_norm <= tol {
            return Some(0);
        }
        Some(((tol / h_norm).ln() / b.ln()).ceil() as usize)
    }
}
