use anyhow::{bail, Result};
use transframe::certificate::Certificate;
use transframe::fdd::{FddSchedule, FddSystem};
use transframe::frame::{certify_analytic_bound, verify_conditions, FrameSystem, ScheduleMode};
use transframe::haar::{atom, cell_indices, unconditionality_constant};
use transframe::numeric::rel_diff;
use transframe::probe::{lp_equivalence_estimate, random_step, unconditionality_estimate, Distribution, ProbeConfig};
use transframe::restriction::{
    compactness_diagnostic, conditional_expectation, exact_refinement_level, BlockSystem, Partition,
};
use transframe::stepfn::{Interval, Superposition, StepFunction};

use crate::config::{Config, Geometric};

/// Exact identities are judged at this relative tolerance.
const IDENTITY_TOL: f64 = 1e-12;
/// Tables up to this size get the exhaustive (quartic) condition check.
const EXHAUSTIVE_LIMIT: usize = 400;

pub struct Outcome {
    pub cert: Certificate,
    /// `(file name, contents)` written next to the certificate.
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn new(cert: Certificate) -> Self {
        Outcome { cert, artifacts: Vec::new() }
    }

    fn with(mut self, name: &str, contents: String) -> Self {
        self.artifacts.push((name.to_string(), contents));
        self
    }
}

fn probe_config(cfg: &mut Config, default_trials: u64) -> Result<ProbeConfig> {
    let trials = *cfg.trials.get_or_insert(default_trials);
    let seed = *cfg.seed.get_or_insert(0);
    let dist: Distribution = cfg.distribution.get_or_insert_with(|| "signs".into()).parse()?;
    Ok(ProbeConfig::new(seed, trials).with_distribution(dist))
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn frame_system(cfg: &mut Config, default_p: f64) -> Result<FrameSystem> {
    let schedule = cfg.frame_schedule(default_p)?;
    let seq = cfg.sequence(&schedule)?;
    cfg.p = Some(schedule.p);
    cfg.c_u = Some(schedule.c_u);
    Ok(FrameSystem::build(&seq, &schedule)?)
}

fn frame_provenance(cert: &mut Certificate, sys: &FrameSystem) {
    let s = &sys.schedule;
    cert.provenance("p", s.p)
        .provenance("c_u", s.c_u)
        .provenance("mode", s.mode.as_str())
        .provenance("n", join(&s.n))
        .provenance("sequence", &sys.table.sequence);
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn construct(cfg: &mut Config) -> Result<Outcome> {
    let sys = frame_system(cfg, 3.0)?;
    let mut cert = Certificate::new();
    frame_provenance(&mut cert, &sys);
    let closed = sys.schedule.sigma_partial();
    let got = sys.f_norm_pow()?;
    cert.info("levels", sys.schedule.levels() as f64)
        .info("atoms", sys.table.len() as f64)
        .info("f_norm_pow", got)
        .info("f_norm_pow_closed_form", closed)
        .check("f_norm_identity", rel_diff(got, closed), IDENTITY_TOL, false);
    if sys.table.len() <= EXHAUSTIVE_LIMIT {
        let rep = verify_conditions(&sys.table)?;
        for (k, c) in rep.checked.iter().enumerate() {
            cert.info(format!("condition_{}_instances", k + 2), *c as f64);
        }
        cert.check("condition_violations", rep.violations.len() as f64, 0.0, false);
    }
    let table = csv_text(
        &["level", "i", "n", "lambda"],
        sys.table
            .entries
            .iter()
            .map(|e| vec![e.level.to_string(), e.i.to_string(), e.n.to_string(), e.lambda.to_string()]),
    )?;
    Ok(Outcome::new(cert)
        .with("table.csv", table)
        .with("f.txt", sys.frame_function().materialize().to_text()))
}

pub fn certify(cfg: &mut Config) -> Result<Outcome> {
    if cfg.n.is_none() && cfg.geometric.is_none() && cfg.mode.is_none() {
        cfg.geometric = Some(Geometric { a: 1000, r: 2 });
    }
    let schedule = cfg.frame_schedule(6.0)?;
    cfg.p = Some(schedule.p);
    cfg.c_u = Some(schedule.c_u);
    let mut cert = certify_analytic_bound(&schedule);
    cert.provenance("n", join(&schedule.n));
    Ok(Outcome::new(cert))
}

pub fn reconstruct(cfg: &mut Config) -> Result<Outcome> {
    let sys = frame_system(cfg, 6.0)?;
    let p = sys.p();
    let tol = *cfg.tol.get_or_insert(1e-6);
    let max_iter = *cfg.max_iter.get_or_insert(50);
    let trials = *cfg.trials.get_or_insert(100);
    let seed = *cfg.seed.get_or_insert(0);
    let certified = sys.schedule.mode == ScheduleMode::Certified;
    let mut cert = Certificate::new();
    frame_provenance(&mut cert, &sys);
    cert.provenance("tol", tol).provenance("seed", seed).provenance("trials", trials);
    let contraction = sys.schedule.contraction();
    cert.info("contraction", contraction);

    for s in 1..=sys.schedule.levels() {
        let e = atom(sys.table.atom(s), p)?;
        let mut diff = sys.apply_frame_operator(&e)?;
        diff.scaled_add(-1.0, &Superposition::from_step(&e)?);
        let direct = diff.lp_norm(p)?;
        let closed = sys.closed_form_error_pow(s).powf(1.0 / p);
        cert.info(format!("operator_error_{s}"), direct)
            .check(format!("operator_error_{s}_vs_closed_form"), rel_diff(direct, closed), 1e-10, false);
        if certified {
            cert.check(format!("operator_error_{s}_vs_bound"), direct, contraction, false);
        } else {
            cert.bound_only(format!("operator_error_{s}_vs_bound"), direct, contraction);
        }
    }

    let h = cfg.test_function(p, &sys.table.atoms[..sys.table.atoms.len().min(2)])?;
    let h_norm = h.lp_norm(p)?;
    let out = sys.neumann_inverse_apply(&h, tol * h_norm.max(f64::MIN_POSITIVE), max_iter)?;
    for (m, r) in out.residuals.iter().enumerate() {
        cert.info(format!("residual_{m}"), *r / h_norm);
    }
    cert.check("relative_residual", out.residuals.last().copied().unwrap_or(0.0) / h_norm, tol, false);
    if let Some(budget) = sys.iteration_budget(1.0, tol) {
        cert.check("iterations", out.iterations as f64, budget as f64, false);
    } else {
        cert.info("iterations", out.iterations as f64);
    }
    if out.residuals.len() >= 2 && out.residuals[0] > 0.0 {
        let ratio = out.residuals[1] / out.residuals[0];
        if certified {
            cert.check("decay_ratio", ratio, contraction + 0.05, false);
        } else {
            cert.bound_only("decay_ratio", ratio, contraction + 0.05);
        }
    }

    let thresholds = cfg.thresholds.get_or_insert_with(|| {
        let mut t = vec![0];
        t.extend((1..=sys.schedule.levels()).filter_map(|l| sys.table.last_index_of_level(l)));
        t
    });
    thresholds.sort_unstable();
    thresholds.dedup();
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for &t in thresholds.iter() {
        let v = sys.unconditional_tail_check(&h, t, trials, seed)?;
        monotone &= v <= prev * (1.0 + 1e-12);
        prev = v;
        cert.info(format!("tail_after_{t}"), v);
    }
    cert.check("tail_monotone", (!monotone) as u8 as f64, 0.0, false);

    Ok(Outcome::new(cert)
        .with("h.txt", h.to_text())
        .with("solution.txt", out.solution.materialize().to_text()))
}

pub fn fdd(cfg: &mut Config) -> Result<Outcome> {
    let p = *cfg.p.get_or_insert(3.0);
    let n = cfg.n.get_or_insert_with(|| vec![4, 16]).clone();
    let tol = *cfg.tol.get_or_insert(1e-10);
    let schedule = FddSchedule::new(p, cfg.eps, n)?;
    cfg.eps = Some(schedule.eps);
    let sys = FddSystem::build(schedule)?;
    let cert = sys.certificate(tol)?;
    Ok(Outcome::new(cert).with("f.txt", sys.f().to_text()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RestrictionMode {
    /// Restricted norms and Hölder tail certificate of a translate family.
    Diagnostic,
    /// Disjoint-atom blocks: `ℓ_p` translates with a non-compact restriction.
    Disjoint,
    /// Haar-atom blocks.
    Haar,
    /// Conditional expectations on dyadic partitions of random step functions.
    Expectation,
}

pub fn restriction(cfg: &mut Config, mode: RestrictionMode) -> Result<Outcome> {
    match mode {
        RestrictionMode::Diagnostic => diagnostic(cfg),
        RestrictionMode::Disjoint | RestrictionMode::Haar => {
            let p = *cfg.p.get_or_insert(3.0);
            let n = cfg.n.get_or_insert_with(|| vec![4, 16]).clone();
            let probe = probe_config(cfg, 1000)?;
            let sys = if mode == RestrictionMode::Haar {
                transframe::restriction::build_haar(p, n)?
            } else {
                transframe::restriction::build_disjoint(p, n)?
            };
            let mut cert = sys.certificate(&probe)?;
            block_rows(&mut cert, &sys)?;
            Ok(Outcome::new(cert).with("f.txt", sys.f().to_text()))
        }
        RestrictionMode::Expectation => expectation(cfg),
    }
}

/// Per block: restricted tail mass against `m_j N_j^{-p}`, and the witness value.
fn block_rows(cert: &mut Certificate, sys: &BlockSystem) -> Result<()> {
    let p = sys.p;
    let gens: Vec<StepFunction> = (1..=sys.count()).map(|i| sys.f_i(i)).collect();
    let rep = compactness_diagnostic(&gens, &Interval::unit(0), p, 1)?;
    for j in 1..=sys.blocks() {
        let mass: f64 = sys.members(j).map(|i| rep.restricted[i - 1]).sum();
        let closed = sys.m[j - 1] as f64 * (sys.n[j - 1] as f64).powf(-p);
        cert.info(format!("block_{j}_tail_sum"), mass)
            .check(format!("block_{j}_tail_vs_closed_form"), rel_diff(mass, closed), IDENTITY_TOL, false);
    }
    Ok(())
}

fn diagnostic(cfg: &mut Config) -> Result<Outcome> {
    let family = cfg.family.get_or_insert_with(|| "geometric".into()).clone();
    let eps = *cfg.eps.get_or_insert(1e-3);
    let interval = cfg.interval()?;
    let (p, gens) = match family.as_str() {
        "geometric" => {
            let p = *cfg.p.get_or_insert(1.5);
            let k = *cfg.levels.get_or_insert(40);
            (p, transframe::restriction::geometric_family(k as u32)?)
        }
        "disjoint" => {
            let p = *cfg.p.get_or_insert(3.0);
            let n = cfg.n.get_or_insert_with(|| vec![4, 16]).clone();
            let sys = transframe::restriction::build_disjoint(p, n)?;
            (p, (1..=sys.count()).map(|i| sys.f_i(i)).collect())
        }
        other => bail!("unknown family {other:?} (geometric, disjoint)"),
    };
    let full = compactness_diagnostic(&gens, &interval, p, 1)?;
    let n = full.first_index_below(eps).unwrap_or(gens.len() + 1).min(gens.len().max(1));
    let rep = transframe::restriction::CompactnessReport { n, ..full };
    let mut cert = rep.certificate(Some(eps));
    cert.provenance("family", &family);
    for (i, (r, t)) in rep.restricted.iter().zip(&rep.tails).enumerate() {
        cert.info(format!("restricted_{}", i + 1), *r).info(format!("tail_from_{}", i + 1), *t);
    }
    Ok(Outcome::new(cert))
}

fn expectation(cfg: &mut Config) -> Result<Outcome> {
    let p = *cfg.p.get_or_insert(3.0);
    let pieces = *cfg.pieces.get_or_insert(8);
    let res = *cfg.resolution.get_or_insert(4);
    let trials = *cfg.trials.get_or_insert(1000);
    let seed = *cfg.seed.get_or_insert(0);
    let support = cfg.interval.get_or_insert([0, 2]);
    let support = Interval::ints(support[0], support[1])?;
    let mut cert = Certificate::new();
    cert.provenance("p", p)
        .provenance("pieces", pieces)
        .provenance("resolution", res)
        .provenance("trials", trials)
        .provenance("seed", seed);
    let (mut not_idempotent, mut not_contractive, mut inexact) = (0u64, 0u64, 0u64);
    let mut worst = vec![0.0f64; res as usize + 2];
    for t in 0..trials {
        let f = random_step(seed.wrapping_add(t), &support, pieces, res, None)?;
        let r = exact_refinement_level(&f);
        for (n, w) in worst.iter_mut().enumerate() {
            let part = Partition::dyadic_covering(&f, n as u32)?;
            let e = conditional_expectation(&part, &f);
            if conditional_expectation(&part, &e) != e {
                not_idempotent += 1;
            }
            for q in [1.0, 2.0, p] {
                if e.lp_norm(q)? > f.lp_norm(q)? * (1.0 + IDENTITY_TOL) {
                    not_contractive += 1;
                }
            }
            let err = f.sub(&e).lp_norm(p)?;
            if n as u32 >= r && err != 0.0 {
                inexact += 1;
            }
            *w = w.max(err);
        }
    }
    cert.check("idempotence_failures", not_idempotent as f64, 0.0, false)
        .check("contraction_failures", not_contractive as f64, 0.0, false)
        .check("inexact_at_resolution", inexact as f64, 0.0, false);
    for (n, w) in worst.iter().enumerate() {
        cert.info(format!("max_refinement_error_{n}"), *w);
    }
    Ok(Outcome::new(cert))
}

pub fn probe(cfg: &mut Config) -> Result<Outcome> {
    let p = *cfg.p.get_or_insert(3.0);
    let level = *cfg.max_level.get_or_insert(4);
    let probe = probe_config(cfg, 1000)?;
    let gens = cell_indices(0, level)
        .iter()
        .map(|ix| atom(ix, p))
        .collect::<Result<Vec<_>, _>>()?;
    let cu = unconditionality_constant(p, cfg.c_u)?;
    let (lower, upper) = lp_equivalence_estimate(&gens, p, &probe)?;
    let u = unconditionality_estimate(&gens, p, &probe)?;
    let mut cert = Certificate::new();
    cert.provenance("p", p)
        .provenance("max_level", level)
        .provenance("generators", gens.len())
        .provenance("seed", probe.seed)
        .provenance("trials", probe.trials)
        .provenance("distribution", probe.distribution);
    cert.info("lp_lower", lower)
        .info("lp_upper", upper)
        .check("unconditionality", u, cu, false);
    Ok(Outcome::new(cert))
}
