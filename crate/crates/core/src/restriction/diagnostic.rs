use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::numeric::{abs_pow, compensated_sum, conjugate};
use crate::stepfn::{Interval, Piece, StepFunction};

/// Which Hölder chain turns small tails into a bound on `sup ‖x|_I‖` over the
/// unit ball of the tail span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HolderChain {
    /// `1 < p ≤ 2`: `‖x|_I‖ ≤ ‖a‖_q (Σ ‖f_i|_I‖^p)^{1/p}` and `‖a‖_q ≤ ‖a‖_2 ≤ K‖x‖`.
    Dual { q: f64 },
    /// `2 < p ≤ 4`: `‖x|_I‖ ≤ C (Σ|a_i|^2 ‖f_i|_I‖^2)^{1/2}
    /// ≤ C ‖a‖_p (Σ ‖f_i|_I‖^r)^{1/r} ≤ C² ‖x‖ (Σ ‖f_i|_I‖^p)^{1/p}`, `r = 2p/(p-2) ≥ p`.
    Quartic { r: f64 },
    Unavailable,
}

impl HolderChain {
    pub fn for_exponent(p: f64) -> Self {
        if p > 1.0 && p <= 2.0 {
            HolderChain::Dual { q: conjugate(p) }
        } else if p > 2.0 && p <= 4.0 {
            HolderChain::Quartic { r: 2.0 * p / (p - 2.0) }
        } else {
            HolderChain::Unavailable
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompactnessReport {
    pub p: f64,
    pub interval: Interval,
    /// `‖f_i|_I‖_p^p`, `i = 1, 2, …`.
    pub restricted: Vec<f64>,
    /// `tails[k] = Σ_{i > k} ‖f_i|_I‖_p^p`; `tails[0]` is the full sum.
    pub tails: Vec<f64>,
    /// First index of the tail the bound is stated for (1-based).
    pub n: usize,
    pub chain: HolderChain,
}

impl CompactnessReport {
    /// `Σ_{i ≥ n} ‖f_i|_I‖_p^p`.
    pub fn tail_sum(&self) -> f64 {
        self.tail_from(self.n)
    }

    pub fn tail_from(&self, n: usize) -> f64 {
        self.tails.get(n.max(1) - 1).copied().unwrap_or(0.0)
    }

    /// `(Σ_{i ≥ n} ‖f_i|_I‖_p^p)^{1/p}`: the bound on `‖x|_I‖` per unit of the
    /// chain's constant (`K` or `C²`).
    pub fn bound_factor(&self) -> Option<f64> {
        match self.chain {
            HolderChain::Unavailable => None,
            _ => Some(self.tail_sum().powf(1.0 / self.p)),
        }
    }

    /// For the quartic chain, `(Σ_{i ≥ n} ‖f_i|_I‖_p^r)^{1/r}`, the middle
    /// link; never larger than [`bound_factor`](Self::bound_factor).
    pub fn middle_factor(&self) -> Option<f64> {
        match self.chain {
            HolderChain::Quartic { r } => {
                let s = compensated_sum(
                    self.restricted[(self.n.max(1) - 1).min(self.restricted.len())..]
                        .iter()
                        .map(|&v| abs_pow(v.powf(1.0 / self.p), r)),
                );
                Some(s.powf(1.0 / r))
            }
            _ => None,
        }
    }

    /// Smallest `n` whose tail factor `(Σ_{i≥n} …)^{1/p}` is below `eps`.
    pub fn first_index_below(&self, eps: f64) -> Option<usize> {
        (1..=self.tails.len() + 1).find(|&n| self.tail_from(n).powf(1.0 / self.p) < eps)
    }

    pub fn certificate(&self, eps: Option<f64>) -> Certificate {
        let mut cert = Certificate::new();
        cert.provenance("p", self.p)
            .provenance("interval", format!("[{}, {}]", self.interval.start(), self.interval.end()))
            .provenance("generators", self.restricted.len())
            .provenance("n", self.n);
        cert.info("total_restricted_pow", self.tail_from(1))
            .info("tail_sum", self.tail_sum());
        match (self.bound_factor(), eps) {
            (Some(b), Some(e)) => {
                cert.check("bound_factor", b, e, true);
            }
            (Some(b), None) => {
                cert.info("bound_factor", b);
            }
            _ => {}
        }
        if let (Some(m), Some(b)) = (self.middle_factor(), self.bound_factor()) {
            cert.check("middle_factor", m, b * (1.0 + 1e-12), false);
        }
        cert
    }
}

/// Restricted `p`-th powers and their tail sums for the generators `f_i`.
///
/// The raw sums are always reported; the Hölder chain is only available for
/// `1 < p ≤ 4`.
pub fn compactness_diagnostic(generators: &[StepFunction], interval: &Interval, p: f64, n: usize) -> Result<CompactnessReport> {
    if interval.is_degenerate() {
        return Err(Error::InvalidInterval("restriction interval has zero length".into()));
    }
    let restricted = generators
        .iter()
        .map(|g| g.restrict(interval).lp_norm_pow(p))
        .collect::<Result<Vec<_>>>()?;
    let mut tails = vec![0.0; restricted.len()];
    let mut acc = 0.0;
    for k in (0..restricted.len()).rev() {
        acc += restricted[k];
        tails[k] = acc;
    }
    Ok(CompactnessReport {
        p,
        interval: interval.clone(),
        restricted,
        tails,
        n: n.max(1),
        chain: HolderChain::for_exponent(p),
    })
}

/// `f = Σ_{k=1}^{K} 2^{-k} χ_{[2^k, 2^k+1]}` and its translates `f_i = T_{-2^i} f`,
/// `i = 1..K`. Only the `k = i` atom of `f_i` meets `[0,1]`, so
/// `‖f_i|_{[0,1]}‖_p^p = 2^{-ip}`.
pub fn geometric_family(k: u32) -> Result<Vec<StepFunction>> {
    if !(1..=61).contains(&k) {
        return Err(Error::InvalidArgument(format!("family size {k} outside 1..=61")));
    }
    let pieces = (1..=k)
        .map(|j| {
            let start = 1i64 << j;
            Piece::new(start.into(), (start + 1).into(), 2f64.powi(-(j as i32)))
        })
        .collect();
    let f = StepFunction::from_pieces(pieces)?;
    Ok((1..=k).map(|i| f.translate_int(-(1i64 << i))).collect())
}
