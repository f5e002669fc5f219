//! Acceptance criteria 1–11, one line each. Oracles are computed here from
//! closed forms, independently of the library's own bookkeeping.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use transframe::fdd::{BlockVector, FddSchedule, FddSystem};
use transframe::frame::{
    certify_analytic_bound, choose_schedule, verify_conditions, FrameSchedule, FrameSystem, ScheduleMode,
    TranslationSequence,
};
use transframe::haar::atom;
use transframe::numeric::rel_diff;
use transframe::probe::{lp_equivalence_estimate, random_step, trial_rng, ProbeConfig};
use transframe::restriction::{
    build_disjoint, compactness_diagnostic, conditional_expectation, exact_refinement_level, geometric_family,
    Partition,
};
use transframe::stepfn::{combine, DyadicRational, Interval, StepFunction, Superposition};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// `Σ_k N_k^{1-p/2}` summed directly.
fn series(n: &[u64], p: f64) -> f64 {
    n.iter().map(|&v| (v as f64).powf(1.0 - p / 2.0)).sum()
}

fn c1_norm_identity() -> Outcome {
    let t = Instant::now();
    let s = FrameSchedule::demo(3.0, None, vec![4, 16, 64]).map_err(|e| e.to_string())?;
    let sys = FrameSystem::build(&TranslationSequence::Integers, &s).map_err(|e| e.to_string())?;
    let got = sys.frame_function().materialize().lp_norm_pow(3.0).map_err(|e| e.to_string())?;
    let oracle = series(&[4, 16, 64], 3.0);
    let el = t.elapsed();
    ensure(
        rel_diff(got, oracle) <= 1e-12 && el < Duration::from_secs(5),
        format!(
            "‖f‖_3^3 = {got:.15} vs Σ N_k^(1-p/2) = {oracle} (rel {:.1e}); {:.2}s",
            rel_diff(got, oracle),
            secs(el)
        ),
    )
}

fn c2_structure() -> Outcome {
    let t = Instant::now();
    let s = FrameSchedule::demo(3.0, None, vec![4, 16, 64]).map_err(|e| e.to_string())?;
    let sys = FrameSystem::build(&TranslationSequence::Integers, &s).map_err(|e| e.to_string())?;
    let rep = verify_conditions(&sys.table).map_err(|e| e.to_string())?;
    let el = t.elapsed();
    let total: u64 = rep.checked.iter().sum();
    ensure(
        rep.ok() && total > 0 && el < Duration::from_secs(30),
        format!(
            "{} table entries, {total} instances checked, {} violations; {:.2}s",
            sys.table.len(),
            rep.violations.len(),
            secs(el)
        ),
    )
}

fn c3_analytic_bound() -> Outcome {
    let t = Instant::now();
    let s = FrameSchedule::geometric(6.0, Some(5.0), 1000, 2, 3).map_err(|e| e.to_string())?;
    let cert = certify_analytic_bound(&s);
    let el = t.elapsed();
    let b = cert.row("analytic_bound").map(|r| r.value).ok_or("no bound row")?;
    // Σ_{k≥1} (1000·2^k)^{-2} = 10^{-6}/3; bound = 5 σ^{2/6} + 1/4
    let sigma: f64 = 1e-6 / 3.0;
    let oracle = 5.0 * sigma.powf(1.0 / 3.0) + 0.25;
    ensure(
        b < 0.5 && rel_diff(b, oracle) < 1e-12 && cert.passed() && el < Duration::from_secs(1),
        format!("bound {b:.12} (oracle {oracle:.12}) < 1/2; {:.4}s", secs(el)),
    )
}

struct Certified {
    sys: FrameSystem,
    built: Duration,
}

fn certified_system() -> Result<Certified, String> {
    let t = Instant::now();
    let s = choose_schedule(6.0, Some(5.0), 3, ScheduleMode::Certified).map_err(|e| e.to_string())?;
    let seq = TranslationSequence::sidon_for(s.total_atoms() as usize, 4).map_err(|e| e.to_string())?;
    let sys = FrameSystem::build(&seq, &s).map_err(|e| e.to_string())?;
    Ok(Certified { sys, built: t.elapsed() })
}

fn c4_operator_error(c: &Certified) -> Outcome {
    let t = Instant::now();
    let sys = &c.sys;
    let p = 6.0;
    let n = &sys.schedule.n;
    let sigma_k = series(n, p);
    let bound = sys.schedule.analytic_bound();
    let mut worst_rel = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for s in 1..=3 {
        let e = atom(sys.table.atom(s), p).map_err(|e| e.to_string())?;
        let mut diff = sys.apply_frame_operator(&e).map_err(|e| e.to_string())?;
        diff.scaled_add(-1.0, &Superposition::from_step(&e).map_err(|e| e.to_string())?);
        let direct = diff.lp_norm(p).map_err(|e| e.to_string())?;
        // N_s^{1-p/2} (Σ_k N_k^{1-p/2} − N_s^{-p/2}): every off-diagonal atom is disjoint
        let ns = n[s - 1] as f64;
        let oracle = (ns.powf(1.0 - p / 2.0) * (sigma_k - ns.powf(-p / 2.0))).powf(1.0 / p);
        worst_rel = worst_rel.max(rel_diff(direct, oracle));
        worst_ratio = worst_ratio.max(direct / (bound * e.lp_norm(p).map_err(|e| e.to_string())?));
    }
    let el = t.elapsed() + c.built;
    ensure(
        worst_rel <= 1e-10 && worst_ratio <= 1.0 && el < Duration::from_secs(60),
        format!(
            "N = {n:?}, max rel error vs closed form {worst_rel:.1e}, max ‖S h − h‖/(B‖h‖) = {worst_ratio:.4}; {:.1}s",
            secs(el)
        ),
    )
}

fn c5_reconstruction(c: &Certified) -> Outcome {
    let sys = &c.sys;
    let p = 6.0;
    let atoms: Vec<StepFunction> = (1..=3).map(|s| atom(sys.table.atom(s), p).unwrap()).collect();
    let h = combine([(1.0, &atoms[0]), (0.5, &atoms[1]), (-0.25, &atoms[2])]);
    let h_norm = h.lp_norm(p).map_err(|e| e.to_string())?;
    let contraction = sys.schedule.contraction();
    let budget = sys.iteration_budget(h_norm, 1e-6 * h_norm).ok_or("no contraction")?;
    let out = sys.neumann_inverse_apply(&h, 1e-6 * h_norm, budget).map_err(|e| e.to_string())?;
    let res = out.residuals.last().copied().unwrap_or(f64::INFINITY) / h_norm;
    let ratios: Vec<f64> = out.residuals.windows(2).map(|w| w[1] / w[0]).collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    ensure(
        res <= 1e-6 && out.iterations <= budget && worst <= contraction + 0.05,
        format!(
            "residual {res:.1e} after {} of ≤{budget} iterations; decay ratios {ratios:?} vs contraction {contraction:.4}",
            out.iterations
        ),
    )
}

fn c6_unconditional_tails() -> Outcome {
    let p = 6.0;
    let s = FrameSchedule::demo(p, None, vec![4, 16, 64]).map_err(|e| e.to_string())?;
    let sys = FrameSystem::build(&TranslationSequence::Integers, &s).map_err(|e| e.to_string())?;
    let h = combine([
        (1.0, &atom(&sys.table.atoms[0], p).unwrap()),
        (-2.0, &atom(&sys.table.atoms[1], p).unwrap()),
    ]);
    let cleared = sys.table.last_index_of_level(2).ok_or("no level 2")?;
    let mut thresholds: Vec<u64> = (0..=12).map(|k| cleared * k / 10).collect();
    thresholds.dedup();
    let mut values = Vec::new();
    for &t in &thresholds {
        values.push(sys.unconditional_tail_check(&h, t, 100, 2024).map_err(|e| e.to_string())?);
    }
    let monotone = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let after: Vec<f64> = thresholds.iter().zip(&values).filter(|(t, _)| **t >= cleared).map(|(_, v)| *v).collect();
    let below = !after.is_empty() && after.iter().all(|&v| v < 1e-3);
    ensure(
        monotone && below,
        format!(
            "level 2 cleared at n = {cleared}; tails {:.3e} → {:.3e}, monotone = {monotone}",
            values[0],
            values.last().unwrap()
        ),
    )
}

fn c7_fdd() -> Outcome {
    let t = Instant::now();
    let n = vec![4u64, 16, 64, 256];
    let p = 3.0;
    let sys = FddSystem::build(FddSchedule::new(p, None, n.clone()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let residual_zero = (1..=sys.count()).all(|i| sys.decomposition_residual(i).is_zero());
    let f_norm = series(&n, p).powf(1.0 / p);
    let fis: Vec<StepFunction> = (1..=sys.count()).map(|i| sys.f_i(i)).collect();
    let mut max_pair = 0.0f64;
    let mut hbar_ok = true;
    for j in 1..=sys.blocks() {
        let phi = sys.phi(j).map_err(|e| e.to_string())?;
        for fi in &fis {
            max_pair = max_pair.max(phi.pair(fi).abs());
        }
        let dist = sys.hbar_report(j).map_err(|e| e.to_string())?.distance;
        hbar_ok &= dist <= (n[j - 1] as f64).powf(1.0 / p - 0.5) * f_norm;
    }
    // Every vector: P_j twice in block coordinates, measured with the exact
    // norm of the synthesized difference (remainders are pairwise disjoint).
    let disjoint = sys.remainder_overlap().is_none();
    let mut worst_idem = 0.0f64;
    for trial in 0..1000u64 {
        let j = 1 + (trial as usize % sys.blocks());
        let v = sys.random_block_vector(j, &mut trial_rng(7, trial));
        let nj = n[j - 1];
        let pv = v.project(nj, p);
        let ppv = pv.project(nj, p);
        let diff = BlockVector { j, a: ppv.a - pv.a, c: ppv.c.iter().zip(&pv.c).map(|(x, y)| x - y).collect() };
        let rel = (sys.norm_pow_of(&[diff]).map_err(|e| e.to_string())?
            / sys.norm_pow_of(std::slice::from_ref(&v)).map_err(|e| e.to_string())?)
        .powf(1.0 / p);
        worst_idem = worst_idem.max(rel);
    }
    // One vector per block through the dual pairings: coordinates invert
    // synthesis and the function-space projection is idempotent.
    let mut worst_fn = 0.0f64;
    for j in 1..=sys.blocks() {
        let v = sys.random_block_vector(j, &mut trial_rng(8, j as u64));
        let x = sys.synthesize(std::slice::from_ref(&v)).map_err(|e| e.to_string())?;
        let back = &sys.coordinates(&x, 1e-9).map_err(|e| e.to_string())?[j - 1];
        let coord_err = back.c.iter().zip(&v.c).map(|(a, b)| (a - b).abs()).fold((back.a - v.a).abs(), f64::max);
        let px = sys.project(&x, 1e-9).map_err(|e| e.to_string())?;
        let ppx = sys.project(&px, 1e-9).map_err(|e| e.to_string())?;
        let rel = ppx.sub(&px).lp_norm(p).map_err(|e| e.to_string())? / x.lp_norm(p).map_err(|e| e.to_string())?;
        worst_fn = worst_fn.max(rel).max(coord_err);
    }
    ensure(
        residual_zero && disjoint && max_pair <= 1e-10 && hbar_ok && worst_idem <= 1e-12 && worst_fn <= 1e-12,
        format!(
            "residuals exact = {residual_zero}, max |φ_j(f_i)| = {max_pair:.1e}, h̄ bounds hold = {hbar_ok}, \
             max ‖P²x − Px‖/‖x‖ = {worst_idem:.1e} over 1000 vectors, {worst_fn:.1e} through the pairings; {:.1}s",
            secs(t.elapsed())
        ),
    )
}

fn c8_witness() -> Outcome {
    let sys = build_disjoint(3.0, vec![4, 16]).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = sys.m == vec![8, 64];
    for j in 1..=2 {
        let (nj, mj) = (sys.n[j - 1] as u128, sys.m[j - 1] as u128);
        // m_j = N_j^{3/2} exactly ⇔ m_j² = N_j³, so m_j^{2/3}/N_j = 1
        let exact = mj * mj == nj * nj * nj;
        let w = sys.witness(j).map_err(|e| e.to_string())?;
        ok &= exact && (w.restricted_norm - 1.0).abs() <= 1e-12;
        lines.push(format!("‖T_I w_{j}‖ = {:.15}", w.restricted_norm));
    }
    let restricted: Vec<StepFunction> = (1..=sys.count()).map(|i| sys.restricted(i)).collect();
    let (_, upper) = lp_equivalence_estimate(&restricted, 3.0, &ProbeConfig::new(8, 10_000)).map_err(|e| e.to_string())?;
    ok &= upper <= 2.0 + 1e-9;
    ensure(ok, format!("m = {:?}, {}, upper constant {upper:.6} over 10^4 draws", sys.m, lines.join(", ")))
}

/// Random partition of `[lo, hi)` with cut points on `2^{-res}ℤ`.
fn random_partition(seed: u64, lo: i64, hi: i64, res: u32) -> Partition {
    let mut rng = trial_rng(seed, 1);
    let cells = (hi - lo) << res;
    let mut cuts: Vec<i64> = (1..cells).filter(|_| rng.gen_ratio(1, 3)).collect();
    cuts.insert(0, 0);
    cuts.push(cells);
    let ivs = cuts
        .windows(2)
        .map(|w| {
            Interval::new(
                DyadicRational::new((lo << res) + w[0], res),
                DyadicRational::new((lo << res) + w[1], res),
            )
            .unwrap()
        })
        .collect();
    Partition::new(ivs).unwrap()
}

fn c9_expectation() -> Outcome {
    let support = Interval::ints(-2, 3).map_err(|e| e.to_string())?;
    let (mut idem, mut contr, mut exact, mut before) = (0, 0, 0, 0);
    for seed in 0..1000u64 {
        let f = random_step(seed, &support, 1 + seed as usize % 12, 4, None).map_err(|e| e.to_string())?;
        let parts = [
            Partition::dyadic(-2..3, (seed % 5) as u32).map_err(|e| e.to_string())?,
            random_partition(seed, -2, 3, (seed % 4) as u32),
        ];
        for part in &parts {
            let e = conditional_expectation(part, &f);
            idem += (conditional_expectation(part, &e) != e) as u32;
            for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
                contr += (e.lp_norm(p).unwrap() > f.lp_norm(p).unwrap() * (1.0 + 1e-12)) as u32;
            }
        }
        let r = exact_refinement_level(&f);
        let err = |n: u32| {
            let part = Partition::dyadic_covering(&f, n).unwrap();
            f.sub(&conditional_expectation(&part, &f)).lp_norm(3.0).unwrap()
        };
        exact += (err(r) != 0.0 || err(r + 1) != 0.0) as u32;
        if r > 0 {
            before += (err(r - 1) == 0.0) as u32;
        }
    }
    ensure(
        idem == 0 && contr == 0 && exact == 0 && before == 0,
        format!(
            "1000 functions: {idem} idempotence / {contr} contraction failures; \
             {exact} inexact at the breakpoint scale, {before} exact one level early"
        ),
    )
}

fn c10_compactness() -> Outcome {
    let p = 1.5;
    let gens = geometric_family(40).map_err(|e| e.to_string())?;
    let rep = compactness_diagnostic(&gens, &Interval::unit(0), p, 1).map_err(|e| e.to_string())?;
    let n = rep.first_index_below(1e-3).ok_or("tail never drops below 1e-3")?;
    // Σ_{i=n}^{40} 2^{-1.5 i}
    let oracle: f64 = (n..=40).map(|i| 2f64.powf(-p * i as f64)).sum();
    let cert_value = rep.tail_from(n).powf(1.0 / p);
    let mut ok = cert_value < 1e-3 && rel_diff(rep.tail_from(n), oracle) < 1e-12;

    let sys = build_disjoint(3.0, vec![4, 16]).map_err(|e| e.to_string())?;
    let fis: Vec<StepFunction> = (1..=sys.count()).map(|i| sys.f_i(i)).collect();
    let rep6 = compactness_diagnostic(&fis, &Interval::unit(0), 3.0, 1).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for j in 1..=2 {
        let block: f64 = sys.members(j).map(|i| rep6.restricted[i - 1]).sum();
        let oracle = sys.m[j - 1] as f64 / (sys.n[j - 1] as f64).powi(3);
        worst = worst.max(rel_diff(block, oracle));
    }
    ok &= worst <= 1e-12;
    ensure(
        ok,
        format!("p=1.5: tail certificate {cert_value:.3e} < 1e-3 at N = {n}; per-block tails vs m_j N_j^-3: rel {worst:.1e}"),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_transframe"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("TRANSFRAME_OUT")
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?} exited with {:?}", status.status.code()));
    }
    std::fs::read(out.join("certificate.csv")).map_err(|e| e.to_string())
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 5] = [
        &["probe", "--seed", "11", "--trials", "500"],
        &["restriction", "--mode", "disjoint", "--seed", "11", "--trials", "500"],
        &["restriction", "--mode", "expectation", "--seed", "11", "--trials", "100"],
        &["reconstruct", "--seed", "11", "--trials", "50"],
        &["fdd", "--seed", "11"],
    ];
    let mut same = 0;
    for (k, args) in runs.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("{k}a")))?;
        let b = run_cli(args, &dir.path().join(format!("{k}b")))?;
        same += (a == b) as usize;
    }
    ensure(same == runs.len(), format!("{same}/{} subcommands byte-identical across repeated runs", runs.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |k: usize, name: &str, r: Outcome| {
        let (tag, msg) = match r {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {k:>2} [{tag}] {name}: {msg}");
    };
    report(1, "frame norm identity", c1_norm_identity());
    report(2, "structural certification", c2_structure());
    report(3, "analytic bound", c3_analytic_bound());
    match certified_system() {
        Ok(c) => {
            report(4, "operator-error oracle", c4_operator_error(&c));
            report(5, "reconstruction", c5_reconstruction(&c));
        }
        Err(e) => {
            report(4, "operator-error oracle", Err(e.clone()));
            report(5, "reconstruction", Err(e));
        }
    }
    report(6, "unconditional tails", c6_unconditional_tails());
    report(7, "FDD identities", c7_fdd());
    report(8, "non-compact witness", c8_witness());
    report(9, "conditional expectation", c9_expectation());
    report(10, "compactness diagnostic", c10_compactness());
    report(11, "determinism", c11_determinism());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
