//! Block systems `f = Σ_j Σ_{i∈J_j} N_j^{-1} T_{3^i} x_j` with `|J_j| = m_j = ⌈N_j^q⌉`.
//!
//! With disjoint normalized `x_j` the translates `f_i = T_{-3^i} f` are
//! equivalent to the unit vector basis of `ℓ_p`, yet the normalized block sums
//! `m_j^{-1/p} Σ_{i∈J_j} f_i` keep restricted norm at least one on `[0,1]`,
//! so restriction to `[0,1]` is not compact. With Haar atoms the same block
//! sums reproduce the Haar basis up to disjoint tails.

use num_bigint::BigUint;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::haar::{atom, HaarIndex};
use crate::numeric::{compensated_sum, conjugate};
use crate::placement::{Placement, PlacementBlock, MAX_PLACED};
use crate::probe::{lp_equivalence_estimate, ProbeConfig};
use crate::stepfn::{combine, first_overlap, DyadicRational, Interval, StepFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomFamily {
    /// `x_j = 2^{j/p} χ_{[2^{-j}, 2^{1-j})}`.
    Disjoint,
    /// `h_j`, the `j`-th normalized Haar function of `[0,1]`.
    Haar,
}

#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub family: AtomFamily,
    pub p: f64,
    pub q: f64,
    pub n: Vec<u64>,
    pub m: Vec<u64>,
    /// Whether `m_j − 1 < N_j^q ≤ m_j` was confirmed in integer arithmetic.
    pub m_verified: Vec<bool>,
    atoms: Vec<StepFunction>,
    placement: Placement,
    f: StepFunction,
}

/// `m_{j}^{-1/p} y_j` for `y_j = Σ_{i∈J_j} f_i`.
#[derive(Clone, Debug)]
pub struct Witness {
    pub j: usize,
    pub vector: StepFunction,
    /// `‖(m_j^{-1/p} y_j)|_{[0,1]}‖_p`.
    pub restricted_norm: f64,
    /// `m_j^{1-1/p} / N_j`.
    pub closed_form: f64,
    /// `‖m_j^{-1/p} y_j‖_p`.
    pub norm: f64,
    /// Max deviation of `y_j|_{[0,1]}` from `(m_j/N_j) x_j`.
    pub diagonal_error: f64,
}

impl Witness {
    /// The part `e_j` of the normalized block sum off `[0,1]`.
    pub fn off_part(&self) -> StepFunction {
        self.vector.restrict_complement(&Interval::unit(0))
    }
}

#[derive(Clone, Debug)]
pub struct HaarBlockReport {
    pub j: usize,
    /// `m_j^{1-1/p} / N_j`, the factor in front of `h_j`.
    pub scale: f64,
    pub off_unit: bool,
    pub off_norm: f64,
    /// Empirical `ℓ_p^{m_j}` constants of `(f_i)_{i∈J_j}`.
    pub lower: f64,
    pub upper: f64,
}

/// Rational `a/b` equal to `p` in `f64` with a small denominator.
fn small_fraction(p: f64) -> Option<(u32, u32)> {
    (1..=1000u32).find_map(|b| {
        let a = (p * b as f64).round();
        (a >= 1.0 && a <= 4096.0 && a / b as f64 == p).then_some((a as u32, b))
    })
}

/// `⌈N^q⌉` for `q = p/(p-1)`; the flag reports integer verification.
pub fn ceil_conjugate_power(n: u64, p: f64) -> Result<(u64, bool)> {
    let q = conjugate(p);
    let approx = (n as f64).powf(q).ceil();
    if !(approx <= MAX_PLACED as f64) {
        return Err(Error::Overflow(format!("block size ⌈{n}^{q}⌉ exceeds {MAX_PLACED} placed atoms")));
    }
    let mut m = approx as u64;
    let Some((a, b)) = small_fraction(p) else {
        return Ok((m, false));
    };
    // m − 1 < N^{a/(a−b)} ≤ m  ⇔  (m−1)^{a−b} < N^a ≤ m^{a−b}
    let e = a - b;
    let target = BigUint::from(n).pow(a);
    while BigUint::from(m).pow(e) < target {
        m += 1;
    }
    while m > 1 && BigUint::from(m - 1).pow(e) >= target {
        m -= 1;
    }
    if m > MAX_PLACED {
        return Err(Error::Overflow(format!("block size {m} exceeds {MAX_PLACED} placed atoms")));
    }
    Ok((m, true))
}

fn family_atom(family: AtomFamily, j: usize, p: f64) -> Result<StepFunction> {
    match family {
        AtomFamily::Disjoint => {
            if j > 62 {
                return Err(Error::Overflow(format!("disjoint atom {j} is finer than 2^-62")));
            }
            let iv = Interval::new(DyadicRational::new(1, j as u32), DyadicRational::new(2, j as u32))?;
            Ok(StepFunction::constant_on(&iv, 2f64.powf(j as f64 / p)))
        }
        AtomFamily::Haar => atom(&HaarIndex::within_cell(0, j as u64)?, p),
    }
}

pub fn build_disjoint(p: f64, n: Vec<u64>) -> Result<BlockSystem> {
    BlockSystem::build(AtomFamily::Disjoint, p, n)
}

pub fn build_haar(p: f64, n: Vec<u64>) -> Result<BlockSystem> {
    BlockSystem::build(AtomFamily::Haar, p, n)
}

impl BlockSystem {
    pub fn build(family: AtomFamily, p: f64, n: Vec<u64>) -> Result<Self> {
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::InvalidExponent(p));
        }
        if n.is_empty() || n.contains(&0) {
            return Err(Error::InvalidSchedule("block sizes must be a nonempty list of positive integers".into()));
        }
        let mut m = Vec::with_capacity(n.len());
        let mut m_verified = Vec::with_capacity(n.len());
        for &v in &n {
            let (mj, ok) = ceil_conjugate_power(v, p)?;
            m.push(mj);
            m_verified.push(ok);
        }
        let atoms = (1..=n.len()).map(|j| family_atom(family, j, p)).collect::<Result<Vec<_>>>()?;
        let blocks = n
            .iter()
            .zip(&m)
            .zip(&atoms)
            .map(|((&nj, &mj), a)| PlacementBlock {
                size: mj,
                coef: 1.0 / nj as f64,
                atom: a.clone(),
            })
            .collect();
        let placement = Placement::new(blocks)?;
        let f = placement.function();
        Ok(BlockSystem {
            family,
            p,
            q: conjugate(p),
            n,
            m,
            m_verified,
            atoms,
            placement,
            f,
        })
    }

    pub fn blocks(&self) -> usize {
        self.n.len()
    }

    pub fn count(&self) -> usize {
        self.placement.count()
    }

    pub fn members(&self, j: usize) -> std::ops::RangeInclusive<usize> {
        self.placement.members(j)
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.placement.block_of(i)
    }

    pub fn f(&self) -> &StepFunction {
        &self.f
    }

    pub fn atom(&self, j: usize) -> &StepFunction {
        &self.atoms[j - 1]
    }

    pub fn f_i(&self, i: usize) -> StepFunction {
        self.placement.translate_of(i)
    }

    pub fn g(&self, i: usize) -> StepFunction {
        self.placement.remainder(i)
    }

    /// `f_i|_{[0,1]} = N_j^{-1} x_j`.
    pub fn restricted(&self, i: usize) -> StepFunction {
        self.placement.local(self.block_of(i)).clone()
    }

    /// `f_i − N_j^{-1} x_j − g_i`, exactly zero by construction.
    pub fn decomposition_residual(&self, i: usize) -> StepFunction {
        combine([(1.0, &self.f_i(i)), (-1.0, &self.restricted(i)), (-1.0, &self.g(i))])
    }

    /// `Σ_j m_j N_j^{-p}`.
    pub fn norm_pow_closed_form(&self) -> f64 {
        compensated_sum(self.n.iter().zip(&self.m).map(|(&nj, &mj)| mj as f64 * (nj as f64).powf(-self.p)))
    }

    /// `2 Σ_j N_j^{q-p}`.
    pub fn norm_pow_bound(&self) -> f64 {
        2.0 * compensated_sum(self.n.iter().map(|&nj| (nj as f64).powf(self.q - self.p)))
    }

    /// `m_j^{1/q} / N_j`, the sharp constant in `N_j^{-1}|Σ_{i∈J_j} a_i| ≤ C ‖a‖_p`.
    pub fn block_sum_constant(&self, j: usize) -> f64 {
        (self.m[j - 1] as f64).powf(1.0 / self.q) / self.n[j - 1] as f64
    }

    /// `m_j^{p-1} = N_j^p` in integers, i.e. `m_j = N_j^q` with no rounding.
    /// `None` unless `p` is an integer.
    pub fn exact_block_size(&self, j: usize) -> Option<bool> {
        if self.p.fract() != 0.0 || self.p > 64.0 {
            return None;
        }
        let k = self.p as u32;
        Some(BigUint::from(self.m[j - 1]).pow(k - 1) == BigUint::from(self.n[j - 1]).pow(k))
    }

    pub fn witness(&self, j: usize) -> Result<Witness> {
        if j == 0 || j > self.blocks() {
            return Err(Error::InvalidArgument(format!("block {j} outside 1..={}", self.blocks())));
        }
        let p = self.p;
        let (nj, mj) = (self.n[j - 1] as f64, self.m[j - 1] as f64);
        let members: Vec<StepFunction> = self.members(j).map(|i| self.f_i(i)).collect();
        let y = combine(members.iter().map(|g| (1.0, g)));
        let unit = Interval::unit(0);
        let diag = combine([(1.0, &y.restrict(&unit)), (-(mj / nj), self.atom(j))]);
        let diagonal_error = diag.pieces().iter().map(|pc| pc.value.abs()).fold(0.0, f64::max);
        let vector = y.scale(mj.powf(-1.0 / p));
        Ok(Witness {
            j,
            restricted_norm: vector.restrict(&unit).lp_norm(p)?,
            closed_form: mj.powf(1.0 - 1.0 / p) / nj,
            norm: vector.lp_norm(p)?,
            diagonal_error,
            vector,
        })
    }

    /// Decomposition of the normalized block sum as `scale · h_j + e_j` and
    /// the block's empirical `ℓ_p^{m_j}` constants.
    pub fn haar_report(&self, j: usize, config: &ProbeConfig) -> Result<HaarBlockReport> {
        let w = self.witness(j)?;
        let e = w.off_part();
        let gens: Vec<StepFunction> = self.members(j).map(|i| self.f_i(i)).collect();
        let (lower, upper) = lp_equivalence_estimate(&gens, self.p, config)?;
        Ok(HaarBlockReport {
            j,
            scale: w.closed_form,
            off_unit: e.restrict(&Interval::unit(0)).is_zero(),
            off_norm: e.lp_norm(self.p)?,
            lower,
            upper,
        })
    }

    /// Pairwise overlap among the off-unit parts `e_j`, if any.
    pub fn off_part_overlap(&self) -> Result<Option<(usize, usize)>> {
        let parts = (1..=self.blocks()).map(|j| Ok(self.witness(j)?.off_part())).collect::<Result<Vec<_>>>()?;
        Ok(first_overlap(&parts).map(|(a, b)| (a + 1, b + 1)))
    }

    pub fn remainder_overlap(&self) -> Option<(usize, usize)> {
        let gs: Vec<StepFunction> = (1..=self.count()).map(|i| self.g(i)).collect();
        first_overlap(&gs).map(|(a, b)| (a + 1, b + 1))
    }

    /// Exact identities, norm bounds, block-sum constants and witness values.
    pub fn certificate(&self, config: &ProbeConfig) -> Result<Certificate> {
        let p = self.p;
        let mut cert = Certificate::new();
        cert.provenance("family", format!("{:?}", self.family).to_lowercase())
            .provenance("p", p)
            .provenance("n", join(&self.n))
            .provenance("m", join(&self.m))
            .provenance("seed", config.seed)
            .provenance("trials", config.trials);
        let measured = self.f.lp_norm_pow(p)?;
        cert.info("f_norm_pow", measured);
        cert.check("f_norm_pow_vs_closed_form", crate::numeric::rel_diff(measured, self.norm_pow_closed_form()), 1e-12, false);
        cert.check("f_norm_pow_vs_bound", measured, self.norm_pow_bound() * (1.0 + 1e-12), false);
        let worst_residual = (1..=self.count())
            .map(|i| self.decomposition_residual(i).lp_norm(p))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        cert.check("decomposition_residual", worst_residual, 0.0, false);
        let g_on_unit = (1..=self.count()).filter(|&i| !self.g(i).restrict(&Interval::unit(0)).is_zero()).count();
        cert.check("remainders_meeting_unit", g_on_unit as f64, 0.0, false);
        cert.check("remainder_overlaps", self.remainder_overlap().map_or(0.0, |_| 1.0), 0.0, false);
        for j in 1..=self.blocks() {
            cert.info(format!("m_{j}"), self.m[j - 1] as f64);
            cert.check(format!("m_{j}_verified"), self.m_verified[j - 1] as u8 as f64, 1.0, false)
                .check(format!("block_sum_constant_{j}"), self.block_sum_constant(j), 2.0 + 1e-9, false);
            let w = self.witness(j)?;
            cert.check_min(format!("witness_{j}"), w.restricted_norm, 1.0 - 1e-12, false)
                .check(format!("witness_{j}_vs_closed_form"), crate::numeric::rel_diff(w.restricted_norm, w.closed_form), 1e-12, false)
                .info(format!("witness_{j}_norm"), w.norm);
            if self.family == AtomFamily::Haar {
                let r = self.haar_report(j, &ProbeConfig { seed: config.seed.wrapping_add(j as u64), ..*config })?;
                cert.check(format!("e_{j}_meets_unit"), (!r.off_unit) as u8 as f64, 0.0, false)
                    .info(format!("h_{j}_scale"), r.scale)
                    .info(format!("block_{j}_lower"), r.lower)
                    .info(format!("block_{j}_upper"), r.upper);
            }
        }
        if self.family == AtomFamily::Haar {
            cert.check("e_overlaps", self.off_part_overlap()?.map_or(0.0, |_| 1.0), 0.0, false);
        }
        let restricted: Vec<StepFunction> = (1..=self.count()).map(|i| self.restricted(i)).collect();
        let (_, upper) = lp_equivalence_estimate(&restricted, p, config)?;
        cert.check("restricted_upper_constant", upper, 2.0 + 1e-9, false);
        Ok(cert)
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}
