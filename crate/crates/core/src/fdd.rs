//! An unconditional finite-dimensional decomposition built from translates.
//!
//! Block `j` places `N_j` copies of `N_j^{-1/2} h_j` (the `j`-th Haar atom of
//! `[0,1]`) at the positions `3^i`, `i ∈ J_j`. Each `f_i = T_{-3^i} f` splits
//! as `N_j^{-1/2} h_j + g_i` with disjoint remainders `g_i`. In block
//! coordinates an element of `F_j = span{h_j, g_i : i ∈ J_j}` is
//! `a h_j + Σ c_i g_i`; `E_j = span{f_i : i ∈ J_j}` has codimension one and
//! `P_j` projects `F_j` onto `E_j` along `z_j = N_j^{-1/p} Σ g_i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::haar::{atom, dual_atom, HaarIndex};
use crate::numeric::{abs_pow, compensated_sum, conjugate, CompensatedSum};
use crate::placement::{Placement, PlacementBlock};
use crate::stepfn::{combine, first_overlap, StepFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct FddSchedule {
    pub p: f64,
    pub eps: f64,
    pub n: Vec<u64>,
}

impl FddSchedule {
    pub fn new(p: f64, eps: Option<f64>, n: Vec<u64>) -> Result<Self> {
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::InvalidExponent(p));
        }
        if n.is_empty() || n.contains(&0) {
            return Err(Error::InvalidSchedule("block sizes must be a nonempty list of positive integers".into()));
        }
        let eps = eps.unwrap_or(0.125);
        if !(eps > 0.0) {
            return Err(Error::InvalidSchedule(format!("eps = {eps} must be positive")));
        }
        Ok(FddSchedule { p, eps, n })
    }

    /// `Σ_j N_j^{1-p/2}`, which is `‖f‖_p^p`.
    pub fn sigma(&self) -> f64 {
        compensated_sum(self.n.iter().map(|&v| (v as f64).powf(1.0 - self.p / 2.0)))
    }

    /// `Σ_j N_j^{1/p-1/2}`; the construction asks for this to be below `eps`.
    pub fn perturbation_sum(&self) -> f64 {
        compensated_sum(self.n.iter().map(|&v| (v as f64).powf(1.0 / self.p - 0.5)))
    }
}

/// `a h_j + Σ_{i∈J_j} c_i g_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector {
    pub j: usize,
    pub a: f64,
    pub c: Vec<f64>,
}

impl BlockVector {
    /// Coefficient `λ` of `z_j` in `x = λ z_j + Σ b_i f_i`.
    pub fn z_component(&self, n: u64, p: f64) -> f64 {
        let n = n as f64;
        (compensated_sum(self.c.iter().copied()) - self.a * n.sqrt()) / n.powf(1.0 - 1.0 / p)
    }

    /// `P_j`: drop the `z_j` component. The `h_j` coordinate is unchanged.
    pub fn project(&self, n: u64, p: f64) -> BlockVector {
        let shift = self.z_component(n, p) * (n as f64).powf(-1.0 / p);
        BlockVector {
            j: self.j,
            a: self.a,
            c: self.c.iter().map(|c| c - shift).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PhiReport {
    pub j: usize,
    /// `max_{i∈J_j} |φ_j(f_i)|`.
    pub max_on_block: f64,
    pub q_norm: f64,
    /// `φ_j(z_j)`.
    pub value_at_z: f64,
    /// `|φ_j(z_j)| / ‖φ_j‖_q`, a lower bound on `d(z_j, E_j)`.
    pub distance_bound: f64,
    pub z_norm: f64,
}

#[derive(Clone, Debug)]
pub struct HbarReport {
    pub j: usize,
    /// `‖h̄_j − h_j‖_p`, evaluated directly.
    pub distance: f64,
    /// `N_j^{-1/2} (Σ ‖g_i‖_p^p)^{1/p}`.
    pub closed_form: f64,
    /// `N_j^{1/p-1/2} ‖f‖_p`.
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct FddSystem {
    pub schedule: FddSchedule,
    placement: Placement,
    atoms: Vec<HaarIndex>,
    f: StepFunction,
    remainders: Vec<StepFunction>,
    /// `‖g_i‖_p^p`.
    remainder_pow: Vec<f64>,
}

impl FddSystem {
    pub fn build(schedule: FddSchedule) -> Result<Self> {
        let p = schedule.p;
        let atoms = (1..=schedule.n.len() as u64)
            .map(|j| HaarIndex::within_cell(0, j))
            .collect::<Result<Vec<_>>>()?;
        let blocks = schedule
            .n
            .iter()
            .zip(&atoms)
            .map(|(&n, ix)| {
                Ok(PlacementBlock {
                    size: n,
                    coef: (n as f64).powf(-0.5),
                    atom: atom(ix, p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let placement = Placement::new(blocks)?;
        let f = placement.function();
        let remainders: Vec<StepFunction> = (1..=placement.count()).map(|i| placement.remainder(i)).collect();
        let remainder_pow = remainders.iter().map(|g| g.lp_norm_pow(p)).collect::<Result<Vec<_>>>()?;
        Ok(FddSystem {
            schedule,
            placement,
            atoms,
            f,
            remainders,
            remainder_pow,
        })
    }

    pub fn p(&self) -> f64 {
        self.schedule.p
    }

    pub fn blocks(&self) -> usize {
        self.schedule.n.len()
    }

    pub fn count(&self) -> usize {
        self.placement.count()
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn f(&self) -> &StepFunction {
        &self.f
    }

    pub fn members(&self, j: usize) -> std::ops::RangeInclusive<usize> {
        self.placement.members(j)
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.placement.block_of(i)
    }

    pub fn h(&self, j: usize) -> Result<StepFunction> {
        atom(&self.atoms[j - 1], self.p())
    }

    pub fn f_i(&self, i: usize) -> StepFunction {
        self.placement.translate_of(i)
    }

    pub fn g(&self, i: usize) -> &StepFunction {
        &self.remainders[i - 1]
    }

    pub fn remainder_norm_pow(&self, i: usize) -> f64 {
        self.remainder_pow[i - 1]
    }

    /// `f_i − N_j^{-1/2} h_j − g_i`; zero for every `i`.
    pub fn decomposition_residual(&self, i: usize) -> StepFunction {
        let local = self.placement.local(self.block_of(i));
        combine([(1.0, &self.f_i(i)), (-1.0, local), (-1.0, self.g(i))])
    }

    /// First pair of remainders whose supports meet, if any.
    pub fn remainder_overlap(&self) -> Option<(usize, usize)> {
        first_overlap(&self.remainders).map(|(a, b)| (a + 1, b + 1))
    }

    /// `h̄_j = N_j^{-1/2} Σ_{i∈J_j} f_i`.
    pub fn hbar(&self, j: usize) -> StepFunction {
        let w = (self.schedule.n[j - 1] as f64).powf(-0.5);
        let fs: Vec<StepFunction> = self.members(j).map(|i| self.f_i(i)).collect();
        combine(fs.iter().map(|f| (w, f)))
    }

    pub fn hbar_report(&self, j: usize) -> Result<HbarReport> {
        let p = self.p();
        let n = self.schedule.n[j - 1] as f64;
        let distance = self.hbar(j).sub(&self.h(j)?).lp_norm(p)?;
        let g_sum = compensated_sum(self.members(j).map(|i| self.remainder_pow[i - 1]));
        Ok(HbarReport {
            j,
            distance,
            closed_form: n.powf(-0.5) * g_sum.powf(1.0 / p),
            bound: n.powf(1.0 / p - 0.5) * self.f.lp_norm(p)?,
        })
    }

    /// `g̃_i = |g_i|^{p-1} sign(g_i) / ‖g_i‖_p^p`.
    pub fn g_dual(&self, i: usize) -> Result<StepFunction> {
        let p = self.p();
        let norm_pow = self.remainder_pow[i - 1];
        if norm_pow == 0.0 {
            return Err(Error::Degenerate(format!("g_{i} vanishes (single-atom system)")));
        }
        Ok(self.g(i).map_values(|v| v.signum() * v.abs().powf(p - 1.0) / norm_pow))
    }

    /// `z_j = N_j^{-1/p} Σ_{i∈J_j} g_i`.
    pub fn z(&self, j: usize) -> StepFunction {
        let w = (self.schedule.n[j - 1] as f64).powf(-1.0 / self.p());
        combine(self.members(j).map(|i| (w, self.g(i))))
    }

    /// `φ_j = N_j^{1/2-1/q} h̃_j − N_j^{-1/q} Σ_{i∈J_j} g̃_i`.
    pub fn phi(&self, j: usize) -> Result<StepFunction> {
        let q = conjugate(self.p());
        let n = self.schedule.n[j - 1] as f64;
        let h_dual = dual_atom(&self.atoms[j - 1], self.p())?;
        let duals = self.members(j).map(|i| self.g_dual(i)).collect::<Result<Vec<_>>>()?;
        let w = -n.powf(-1.0 / q);
        let mut terms = vec![(n.powf(0.5 - 1.0 / q), &h_dual)];
        terms.extend(duals.iter().map(|d| (w, d)));
        Ok(combine(terms))
    }

    pub fn phi_report(&self, j: usize) -> Result<PhiReport> {
        let phi = self.phi(j)?;
        let q = conjugate(self.p());
        let max_on_block = self
            .members(j)
            .map(|i| phi.pair(&self.f_i(i)).abs())
            .fold(0.0, f64::max);
        let z = self.z(j);
        let value_at_z = phi.pair(&z);
        let q_norm = phi.lp_norm(q)?;
        Ok(PhiReport {
            j,
            max_on_block,
            q_norm,
            value_at_z,
            distance_bound: value_at_z.abs() / q_norm,
            z_norm: z.lp_norm(self.p())?,
        })
    }

    /// `Σ_j (a_j h_j + Σ c_i g_i)`.
    pub fn synthesize(&self, blocks: &[BlockVector]) -> Result<StepFunction> {
        let hs = blocks.iter().map(|b| self.h(b.j)).collect::<Result<Vec<_>>>()?;
        let mut terms: Vec<(f64, &StepFunction)> = Vec::new();
        for (b, h) in blocks.iter().zip(&hs) {
            terms.push((b.a, h));
            for (i, c) in self.members(b.j).zip(&b.c) {
                terms.push((*c, self.g(i)));
            }
        }
        Ok(combine(terms))
    }

    /// `‖Σ_j (a_j h_j + Σ c_i g_i)‖_p^p` from coordinates: the `h_j` part lives
    /// on `[0,1]` and every `g_i` is disjoint from it and from the others.
    pub fn norm_pow_of(&self, blocks: &[BlockVector]) -> Result<f64> {
        let p = self.p();
        let hs = blocks.iter().map(|b| self.h(b.j)).collect::<Result<Vec<_>>>()?;
        let head = combine(blocks.iter().zip(&hs).map(|(b, h)| (b.a, h)));
        let mut acc = CompensatedSum::new();
        acc.add(head.lp_norm_pow(p)?);
        for b in blocks {
            for (i, c) in self.members(b.j).zip(&b.c) {
                acc.add(abs_pow(*c, p) * self.remainder_pow[i - 1]);
            }
        }
        Ok(acc.value())
    }

    /// Block coordinates of `x`, recovered by pairing with `h̃_j` and `g̃_i`.
    /// Fails with [`Error::NotInSpan`] when the coordinates do not resynthesize `x`.
    pub fn coordinates(&self, x: &StepFunction, tol: f64) -> Result<Vec<BlockVector>> {
        let p = self.p();
        let mut out = Vec::with_capacity(self.blocks());
        for j in 1..=self.blocks() {
            let a = x.pair(&dual_atom(&self.atoms[j - 1], p)?);
            let c = self
                .members(j)
                .map(|i| Ok(x.pair(&self.g_dual(i)?)))
                .collect::<Result<Vec<_>>>()?;
            out.push(BlockVector { j, a, c });
        }
        let residual = x.sub(&self.synthesize(&out)?).lp_norm(p)?;
        if residual > tol {
            return Err(Error::NotInSpan { residual });
        }
        Ok(out)
    }

    /// `P x = Σ_j P_j x_j` for a function in the span of the blocks.
    pub fn project(&self, x: &StepFunction, tol: f64) -> Result<StepFunction> {
        let coords = self.coordinates(x, tol)?;
        let projected: Vec<BlockVector> = coords
            .iter()
            .map(|b| b.project(self.schedule.n[b.j - 1], self.p()))
            .collect();
        self.synthesize(&projected)
    }

    /// Random block vector with coordinates uniform in `[-1, 1]`.
    pub fn random_block_vector(&self, j: usize, rng: &mut impl Rng) -> BlockVector {
        BlockVector {
            j,
            a: rng.gen_range(-1.0..=1.0),
            c: self.members(j).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
        }
    }

    /// `E_j` element `Σ_{i∈J_j} b_i f_i` in block coordinates.
    pub fn e_block(&self, j: usize, b: &[f64]) -> BlockVector {
        let n = self.schedule.n[j - 1] as f64;
        BlockVector {
            j,
            a: n.powf(-0.5) * compensated_sum(b.iter().copied()),
            c: b.to_vec(),
        }
    }

    /// Largest observed `‖Σ σ_j x_j‖_p / ‖Σ x_j‖_p` for random `x_j ∈ E_j` and
    /// random signs `σ_j`.
    pub fn unconditionality_estimate(&self, trials: u64, seed: u64) -> Result<f64> {
        let mut worst = 1.0f64;
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let xs: Vec<BlockVector> = (1..=self.blocks())
                .map(|j| {
                    let b: Vec<f64> = self.members(j).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    self.e_block(j, &b)
                })
                .collect();
            let signed: Vec<BlockVector> = xs
                .iter()
                .map(|x| {
                    let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    BlockVector {
                        j: x.j,
                        a: s * x.a,
                        c: x.c.iter().map(|c| s * c).collect(),
                    }
                })
                .collect();
            let base = self.norm_pow_of(&xs)?;
            if base > 0.0 {
                worst = worst.max((self.norm_pow_of(&signed)? / base).powf(1.0 / self.p()));
            }
        }
        Ok(worst)
    }

    /// Largest observed `‖P x‖_p / ‖x‖_p` over random `x = Σ_j x_j`, `x_j ∈ F_j`.
    pub fn projection_norm_estimate(&self, trials: u64, seed: u64) -> Result<f64> {
        let mut worst = 0.0f64;
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let xs: Vec<BlockVector> = (1..=self.blocks()).map(|j| self.random_block_vector(j, &mut rng)).collect();
            let px: Vec<BlockVector> = xs.iter().map(|x| x.project(self.schedule.n[x.j - 1], self.p())).collect();
            let base = self.norm_pow_of(&xs)?;
            if base > 0.0 {
                worst = worst.max((self.norm_pow_of(&px)? / base).powf(1.0 / self.p()));
            }
        }
        Ok(worst)
    }

    /// Per-block bounds and the global identities as certificate rows.
    pub fn certificate(&self, tol: f64) -> Result<Certificate> {
        let p = self.p();
        let mut cert = Certificate::new();
        cert.provenance("p", p)
            .provenance("eps", self.schedule.eps)
            .provenance(
                "n",
                self.schedule.n.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            );
        let norm_pow = self.f.lp_norm_pow(p)?;
        let sigma = self.schedule.sigma();
        cert.check("f_norm_pow_rel_err", (norm_pow - sigma).abs() / sigma, 1e-12, false);
        let worst_residual = (1..=self.count())
            .map(|i| self.decomposition_residual(i).lp_norm(p))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        cert.check("decomposition_residual", worst_residual, 0.0, false);
        cert.check(
            "remainder_overlaps",
            self.remainder_overlap().map_or(0.0, |_| 1.0),
            0.0,
            false,
        );
        cert.bound_only("perturbation_sum", self.schedule.perturbation_sum(), self.schedule.eps);
        for j in 1..=self.blocks() {
            let hb = self.hbar_report(j)?;
            cert.check(format!("hbar_distance[{j}]"), hb.distance, hb.bound * (1.0 + 1e-12), false);
            if self.schedule.n.iter().sum::<u64>() > 1 {
                let phi = self.phi_report(j)?;
                cert.check(format!("phi_on_block[{j}]"), phi.max_on_block, tol, false)
                    .info(format!("phi_q_norm[{j}]"), phi.q_norm)
                    .info(format!("phi_at_z[{j}]"), phi.value_at_z)
                    .check_min(format!("distance_bound[{j}]"), phi.distance_bound, 0.0, true)
                    .info(format!("z_norm[{j}]"), phi.z_norm);
            }
        }
        Ok(cert)
    }
}
