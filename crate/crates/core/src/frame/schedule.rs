//! Block-size schedules `N_1, …, N_K` and the analytic `‖S − Id‖` bound.

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::haar::unconditionality_constant;
use crate::numeric::compensated_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleMode {
    Demo,
    Certified,
}

impl ScheduleMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleMode::Demo => "demo",
            ScheduleMode::Certified => "certified",
        }
    }
}

impl std::str::FromStr for ScheduleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "demo" => Ok(ScheduleMode::Demo),
            "certified" => Ok(ScheduleMode::Certified),
            other => Err(Error::InvalidSchedule(format!("unknown mode {other:?}"))),
        }
    }
}

/// How the levels beyond `K` are accounted for in the series `Σ N_k^{1-p/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// Only the listed levels exist.
    Finite,
    /// `N_k^{1-p/2} ≤ 2^{-(k+c)}` for every `k`, so the tail is at most `2^{-(K+c)}`.
    Dyadic { c: u32 },
    /// `N_k = a·r^k` for every `k`; the tail is summed in closed form.
    Geometric { a: u64, r: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSchedule {
    pub p: f64,
    pub c_u: f64,
    pub n: Vec<u64>,
    pub mode: ScheduleMode,
    pub tail: Tail,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

impl FrameSchedule {
    /// Validates and builds; certified schedules must satisfy
    /// `Σ_k N_k^{1-p/2} < (2 C_u)^{-p}` including the tail.
    pub fn new(p: f64, c_u: Option<f64>, n: Vec<u64>, mode: ScheduleMode, tail: Tail) -> Result<Self> {
        check_p(p)?;
        let c_u = unconditionality_constant(p, c_u)?;
        if n.is_empty() {
            return Err(Error::InvalidSchedule("at least one level is required".into()));
        }
        if n.contains(&0) {
            return Err(Error::InvalidSchedule("block sizes must be positive".into()));
        }
        let s = FrameSchedule { p, c_u, n, mode, tail };
        if mode == ScheduleMode::Certified && s.sigma() >= s.certified_threshold() {
            return Err(Error::InvalidSchedule(format!(
                "series {:e} is not below (2 C_u)^-p = {:e}",
                s.sigma(),
                s.certified_threshold()
            )));
        }
        Ok(s)
    }

    pub fn demo(p: f64, c_u: Option<f64>, n: Vec<u64>) -> Result<Self> {
        FrameSchedule::new(p, c_u, n, ScheduleMode::Demo, Tail::Finite)
    }

    /// `N_k = 4^k`, `k = 1..K`.
    pub fn demo_default(p: f64, c_u: Option<f64>, k: usize) -> Result<Self> {
        if k == 0 || k > 31 {
            return Err(Error::InvalidSchedule(format!("demo level count {k} outside 1..=31")));
        }
        FrameSchedule::demo(p, c_u, (1..=k as u32).map(|i| 4u64.pow(i)).collect())
    }

    /// `N_k = a·r^k` with the infinite tail summed analytically.
    pub fn geometric(p: f64, c_u: Option<f64>, a: u64, r: u64, k: usize) -> Result<Self> {
        if a == 0 || r < 2 {
            return Err(Error::InvalidSchedule("geometric schedule needs a >= 1 and r >= 2".into()));
        }
        let n = (1..=k as u32)
            .map(|i| {
                r.checked_pow(i)
                    .and_then(|v| v.checked_mul(a))
                    .ok_or_else(|| Error::Overflow(format!("{a}*{r}^{i} exceeds 64 bits")))
            })
            .collect::<Result<Vec<_>>>()?;
        FrameSchedule::new(p, c_u, n, ScheduleMode::Certified, Tail::Geometric { a, r })
    }

    pub fn levels(&self) -> usize {
        self.n.len()
    }

    pub fn total_atoms(&self) -> u64 {
        self.n.iter().sum()
    }

    /// `N_k^{-1/2}`, `k` 1-based.
    pub fn weight(&self, k: usize) -> f64 {
        (self.n[k - 1] as f64).powf(-0.5)
    }

    /// `N_k^{1-p/2}`, `k` 1-based.
    pub fn term(&self, k: usize) -> f64 {
        (self.n[k - 1] as f64).powf(1.0 - self.p / 2.0)
    }

    pub fn sigma_partial(&self) -> f64 {
        compensated_sum((1..=self.levels()).map(|k| self.term(k)))
    }

    /// Upper bound on `Σ_{k>K} N_k^{1-p/2}`.
    pub fn tail_bound(&self) -> f64 {
        let big_k = self.levels() as f64;
        match self.tail {
            Tail::Finite => 0.0,
            Tail::Dyadic { c } => 2f64.powf(-(big_k + c as f64)),
            Tail::Geometric { a, r } => {
                let e = 1.0 - self.p / 2.0;
                let rho = (r as f64).powf(e);
                (a as f64).powf(e) * rho.powf(big_k + 1.0) / (1.0 - rho)
            }
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_partial() + self.tail_bound()
    }

    /// `(2 C_u)^{-p}`.
    pub fn certified_threshold(&self) -> f64 {
        (2.0 * self.c_u).powf(-self.p)
    }

    /// `C_u (σ·σ)^{1/p} + 1/4`.
    pub fn analytic_bound(&self) -> f64 {
        self.contraction() + 0.25
    }

    /// `C_u σ^{2/p}`: bound on the part of `S − Id` not absorbed by the 1/4 slack,
    /// and on `S − Id` restricted to the covered span.
    pub fn contraction(&self) -> f64 {
        let s = self.sigma();
        self.c_u * (s * s).powf(1.0 / self.p)
    }
}

/// Certified: `N_k = ⌈2^{2(k+c)/(p-2)}⌉` with the smallest integer `c` such that
/// `2^{-c} < (2 C_u)^{-p}`. Demo: `N_k = 4^k`.
pub fn choose_schedule(p: f64, c_u: Option<f64>, k: usize, mode: ScheduleMode) -> Result<FrameSchedule> {
    check_p(p)?;
    if k == 0 {
        return Err(Error::InvalidSchedule("K must be at least 1".into()));
    }
    if mode == ScheduleMode::Demo {
        return FrameSchedule::demo_default(p, c_u, k);
    }
    let cu = unconditionality_constant(p, c_u)?;
    let threshold = (2.0 * cu).powf(-p);
    let mut c = 0u32;
    while 2f64.powi(-(c as i32)) >= threshold {
        c += 1;
    }
    let n = (1..=k as u32)
        .map(|i| {
            let v = 2f64.powf(2.0 * (i + c) as f64 / (p - 2.0)).ceil();
            if v < 9.0e15 {
                Ok(v as u64)
            } else {
                Err(Error::Overflow(format!("N_{i} = 2^{} is too large", 2.0 * (i + c) as f64 / (p - 2.0))))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    FrameSchedule::new(p, c_u, n, ScheduleMode::Certified, Tail::Dyadic { c })
}

/// Analytic certificate for a schedule; never materializes anything.
pub fn certify_analytic_bound(s: &FrameSchedule) -> Certificate {
    let mut cert = Certificate::new();
    cert.provenance("p", s.p)
        .provenance("c_u", s.c_u)
        .provenance("mode", s.mode.as_str())
        .provenance(
            "n",
            s.n.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
        );
    cert.info("levels", s.levels() as f64)
        .info("sigma_partial", s.sigma_partial())
        .info("tail_bound", s.tail_bound())
        .info("f_norm_pow", s.sigma_partial());
    let b = s.analytic_bound();
    match s.mode {
        ScheduleMode::Certified => {
            cert.check("sigma", s.sigma(), s.certified_threshold(), true)
                .check("analytic_bound", b, 0.5, true);
        }
        ScheduleMode::Demo => {
            cert.bound_only("sigma", s.sigma(), s.certified_threshold())
                .bound_only("analytic_bound", b, 0.5);
        }
    }
    cert.info("contraction", s.contraction());
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certified_p3() {
        let s = choose_schedule(3.0, None, 4, ScheduleMode::Certified).unwrap();
        assert_eq!(s.tail, Tail::Dyadic { c: 7 });
        assert_eq!(s.n, vec![1 << 16, 1 << 18, 1 << 20, 1 << 22]);
        // the whole series is 2^-7 = 1/128
        assert!((s.sigma() - 1.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn certified_p6() {
        let s = choose_schedule(6.0, Some(5.0), 3, ScheduleMode::Certified).unwrap();
        assert_eq!(s.tail, Tail::Dyadic { c: 20 });
        assert_eq!(s.n, vec![1449, 2048, 2897]);
        assert!(s.analytic_bound() < 0.5);
    }

    #[test]
    fn geometric_tail() {
        let s = FrameSchedule::geometric(6.0, Some(5.0), 1000, 2, 3).unwrap();
        let full: f64 = (1..200).map(|k| (1000.0 * 2f64.powi(k)).powi(-2)).sum();
        assert!((s.sigma() - full).abs() < 1e-20);
        assert!((s.sigma() - 1e-6 / 3.0).abs() < 1e-18);
        assert!(s.analytic_bound() < 0.5);
    }

    #[test]
    fn demo_bound_has_no_verdict() {
        let s = choose_schedule(3.0, None, 3, ScheduleMode::Demo).unwrap();
        assert_eq!(s.n, vec![4, 16, 64]);
        // σ = 4^{-1/2} + 16^{-1/2} + 64^{-1/2} = 7/8
        assert!((s.sigma() - 0.875).abs() < 1e-15);
        let b = s.analytic_bound();
        assert!((b - (2.0 * (0.875f64 * 0.875).powf(1.0 / 3.0) + 0.25)).abs() < 1e-12);
        let cert = certify_analytic_bound(&s);
        assert_eq!(cert.row("analytic_bound").unwrap().pass, None);
    }

    #[test]
    fn rejects_small_p_and_bad_certified() {
        assert!(choose_schedule(2.0, None, 1, ScheduleMode::Demo).is_err());
        assert!(FrameSchedule::new(3.0, None, vec![4], ScheduleMode::Certified, Tail::Finite).is_err());
    }
}
