//! The ten experiment commands. Each one writes its CSV/JSON artifacts and
//! returns the checks that decide the exit status.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hamlin::blockenc::{decode, encode};
use hamlin::corela::{self, c, comm, expm_hermitian, opnorm, random, CMat, CVec, MatrixDoc, C64};
use hamlin::estimate::{
    estimate_from_probabilities, green_estimate, green_oracle, repetition_seed, sample_log, MeasurementPlan,
    OverlapPlan,
};
use hamlin::fermions::{
    comm_sector_report, eta_seminorm, quad, sector_indices, sector_leakage, sector_norm, sos_simulate,
    sos_square_path, subset_sum_max, QuadCoeff, SosSpec, SosTerms, MAX_JW_MODES, MAX_SUBSET_MODES,
};
use hamlin::formulas::{
    gc_evolve, gc_higher, gc_m2, gc_m2_bound, loglog_slope, multiply_generic, trotter_apply, FormulaSpec,
};
use hamlin::hqsvt::{frac_scale, invert, qsvt_odd, square_with, SquarePairs};
use hamlin::polyapprox::{
    dominated_pair, pair_cube, pair_fractional, pair_green, pair_inverse, pair_overlap, ChebPoly, DominatedPair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::*;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Largest dense dimension the sweep commands accept.
const MAX_DIM: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }
}

/// Output directory plus the list of files written so far.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Artifacts { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let s = serde_json::to_string_pretty(value).expect("artifact serializes");
        self.text(name, &s)
    }

    pub fn text(&mut self, name: &str, s: &str) -> Result<()> {
        let mut s = s.to_string();
        if !s.ends_with('\n') {
            s.push('\n');
        }
        std::fs::write(self.dir.join(name), s)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// 17 significant digits.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(usage(format!("dim = {dim}; need 1..={MAX_DIM}")));
    }
    Ok(())
}

fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(repetition_seed(seed, index))
}

/// e^{−τ²[J,K]} through its Hermitian generator −iτ²[J,K].
fn gc_target(j: &CMat, k: &CMat, t: f64) -> Result<CMat> {
    let g = comm(j, k) * c(0.0, -t);
    Ok(expm_hermitian(&corela::symmetrize(&g), 1.0)?)
}

fn slope_of(xs: &[f64], ys: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).filter(|(_, &e)| e > 0.0).map(|(&a, &b)| (a, b)).unzip();
    if x.len() < 2 {
        return f64::NAN;
    }
    loglog_slope(&x, &y)
}

pub fn bound_check(p: &BoundCheck, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    check_dim(p.dim)?;
    if p.taus.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(usage("taus must be finite and non-negative"));
    }
    let per_trial: Vec<Vec<(f64, f64, f64)>> = (0..p.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = point_rng(seed, trial as u64);
            let j = random::hermitian(&mut rng, p.dim, 1.0);
            let k = random::hermitian(&mut rng, p.dim, 1.0);
            p.taus
                .iter()
                .map(|&tau| {
                    let err = opnorm(&(gc_m2(&j, &k, tau)? - gc_target(&j, &k, tau * tau)?));
                    Ok((tau, err, gc_m2_bound(&j, &k, tau)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for (trial, pts) in per_trial.iter().enumerate() {
        for &(tau, err, bound) in pts {
            let ratio = if bound > 0.0 { err / bound } else { 0.0 };
            if err > bound && err > 1e-14 {
                violations += 1;
            }
            worst = worst.max(ratio);
            rows.push(vec![trial.to_string(), f17(tau), f17(err), f17(bound), f17(ratio)]);
        }
    }
    out.csv("bound_check.csv", &["trial", "tau", "error", "bound", "ratio"], &rows)?;
    Ok(vec![Check::new(
        "error within bound",
        violations == 0,
        format!("{violations} violations, max ratio {worst:.6}"),
    )])
}

pub fn trotter_sweep(p: &TrotterSweep, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    check_dim(p.dim)?;
    if p.terms == 0 || p.steps.is_empty() {
        return Err(usage("need at least one term and one step count"));
    }
    let mut rng = point_rng(seed, 0);
    let terms: Vec<CMat> = (0..p.terms).map(|_| random::hermitian(&mut rng, p.dim, 1.0)).collect();
    let sum = terms.iter().fold(CMat::zeros(p.dim, p.dim), |a, t| a + t);
    let exact = expm_hermitian(&sum, p.time)?;
    let errs: Vec<f64> = p
        .steps
        .par_iter()
        .map(|&r| Ok(opnorm(&(trotter_apply(&terms, &FormulaSpec::suzuki(p.order, r, p.time))? - &exact))))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = p.steps.iter().zip(&errs).map(|(r, e)| vec![r.to_string(), f17(*e)]).collect();
    out.csv("trotter_sweep.csv", &["steps", "error"], &rows)?;
    let xs: Vec<f64> = p.steps.iter().map(|&r| r as f64).collect();
    let slope = slope_of(&xs, &errs);
    let expected = -(p.order as f64);
    Ok(vec![Check::new(
        "error slope matches order",
        (slope - expected).abs() <= p.slope_tol,
        format!("slope {slope:.4}, expected {expected}"),
    )])
}

pub fn gc_sweep(p: &GcSweep, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    check_dim(p.dim)?;
    if p.order < 2 || p.order % 2 != 0 || p.order > 8 {
        return Err(usage(format!("order {} must be even and at most 8", p.order)));
    }
    let k_rec = p.order / 2;
    let per_trial: Vec<(Vec<f64>, Vec<f64>)> = (0..p.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = point_rng(seed, trial as u64);
            let j = random::hermitian(&mut rng, p.dim, 1.0);
            let k = random::hermitian(&mut rng, p.dim, 1.0);
            let tau_errs = p
                .taus
                .iter()
                .map(|&tau| Ok(opnorm(&(gc_higher(&j, &k, tau, k_rec)? - gc_target(&j, &k, tau * tau)?))))
                .collect::<Result<Vec<_>>>()?;
            let sj = corela::Spectral::new(&j)?;
            let sk = corela::Spectral::new(&k)?;
            let ej = |s: f64| sj.exp(s);
            let ek = |s: f64| sk.exp(s);
            let target = gc_target(&j, &k, p.time)?;
            let step_errs = p
                .steps
                .iter()
                .map(|&r| Ok(opnorm(&(gc_evolve(&ej, &ek, p.order, r, p.time)? - &target))))
                .collect::<Result<Vec<_>>>()?;
            Ok((tau_errs, step_errs))
        })
        .collect::<Result<_>>()?;

    let tau_x: Vec<f64> = p.taus.clone();
    let step_x: Vec<f64> = p.steps.iter().map(|&r| r as f64).collect();
    let mut tau_rows = Vec::new();
    let mut step_rows = Vec::new();
    let mut slope_rows = Vec::new();
    let (mut tau_ok, mut step_ok) = (true, true);
    let want_tau = p.order as f64 + 1.0;
    let want_steps = -(p.order as f64 - 1.0) / 2.0;
    for (trial, (te, se)) in per_trial.iter().enumerate() {
        for (tau, e) in p.taus.iter().zip(te) {
            tau_rows.push(vec![trial.to_string(), f17(*tau), f17(*e)]);
        }
        for (r, e) in p.steps.iter().zip(se) {
            step_rows.push(vec![trial.to_string(), r.to_string(), f17(*e)]);
        }
        let s_tau = slope_of(&tau_x, te);
        let s_steps = slope_of(&step_x, se);
        tau_ok &= (s_tau - want_tau).abs() <= p.slope_tol;
        step_ok &= (s_steps - want_steps).abs() <= p.steps_slope_tol;
        slope_rows.push(vec![trial.to_string(), f17(s_tau), f17(s_steps)]);
    }
    out.csv("gc_tau.csv", &["trial", "tau", "error"], &tau_rows)?;
    out.csv("gc_steps.csv", &["trial", "steps", "error"], &step_rows)?;
    out.csv("gc_slopes.csv", &["trial", "tau_slope", "steps_slope"], &slope_rows)?;
    Ok(vec![
        Check::new("tau slope", tau_ok, format!("expected {want_tau} +- {}", p.slope_tol)),
        Check::new("repetition slope", step_ok, format!("expected {want_steps} +- {}", p.steps_slope_tol)),
    ])
}

pub fn multiply_demo(p: &MultiplyDemo, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    check_dim(p.dim)?;
    if p.steps.is_empty() {
        return Err(usage("no step counts"));
    }
    let (a, b) = if p.dim == 1 {
        (corela::diag_real(&[p.a]), corela::diag_real(&[p.b]))
    } else {
        let mut rng = point_rng(seed, 0);
        (random::with_norm(&mut rng, p.dim, p.a), random::with_norm(&mut rng, p.dim, p.b))
    };
    let ea = encode(&a)?;
    let eb = encode(&b)?;
    let ab = &a * &b;
    let results: Vec<(C64, f64, f64)> = p
        .steps
        .par_iter()
        .map(|&r| {
            let m = multiply_generic(&ea, &eb, &FormulaSpec::group_commutator(p.order, r, 1.0))?;
            let d = decode(&m)?;
            Ok((d[(0, 0)], opnorm(&(d - &ab)), m.payload_error().unwrap_or(f64::NAN)))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = p
        .steps
        .iter()
        .zip(&results)
        .map(|(r, (d, e, w))| vec![r.to_string(), f17(d.re), f17(d.im), f17(*e), f17(*w)])
        .collect();
    out.csv("multiply.csv", &["steps", "decoded_re", "decoded_im", "error", "w_error"], &rows)?;
    let monotone = results.windows(2).all(|w| w[1].1 < w[0].1);
    let last = results.last().map_or(f64::NAN, |r| r.1);
    Ok(vec![
        Check::new("error decreases with steps", monotone, String::new()),
        Check::new("final error within tol", last <= p.tol, format!("error {last:.3e}, tol {:.1e}", p.tol)),
    ])
}

/// Random payload with singular values in [lo, hi].
fn random_with_singular_values(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> CMat {
    let u = random::unitary(rng, n);
    let v = random::unitary(rng, n);
    let s: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => hi,
            1 => lo,
            _ => lo + (hi - lo) * rng.random::<f64>(),
        })
        .collect();
    u * corela::diag_real(&s) * v.adjoint()
}

pub fn qsvt_demo(p: &QsvtDemo, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    check_dim(p.dim)?;
    if !(p.norm > 0.0 && p.norm <= 1.0) {
        return Err(usage(format!("norm = {}; need (0, 1]", p.norm)));
    }
    let base_tol = 10.0 * p.eps.sqrt();
    let tol = if p.target == "square" { base_tol + 2.0 * p.eps } else { base_tol };
    let cube = match p.target.as_str() {
        "cube" => Some(Arc::new(pair_cube((FRAC_PI_2 - p.norm).min(0.3), p.eps)?)),
        "fractional" | "inverse" | "square" => None,
        t => return Err(usage(format!("unknown qsvt target {t}"))),
    };
    let square_pairs = if p.target == "square" { Some(SquarePairs::new(p.eps)?) } else { None };
    let results: Vec<(f64, f64)> = (0..p.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = point_rng(seed, trial as u64);
            let res = match p.target.as_str() {
                "cube" => qsvt_odd(&encode(&random::with_norm(&mut rng, p.dim, p.norm))?, cube.clone().unwrap())?,
                "fractional" => frac_scale(&encode(&random::with_norm(&mut rng, p.dim, p.norm))?, p.tau, p.eps)?,
                "inverse" => {
                    let lo = (1.05 / p.kappa).min(p.norm);
                    invert(&encode(&random_with_singular_values(&mut rng, p.dim, lo, p.norm))?, p.kappa, p.eps)?
                }
                _ => square_with(
                    &encode(&random::hermitian(&mut rng, p.dim, p.norm))?,
                    square_pairs.as_ref().unwrap(),
                )?,
            };
            Ok((res.measured_error.unwrap_or(f64::NAN), corela::unitarity_defect(res.output.w())))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .enumerate()
        .map(|(t, (e, u))| vec![t.to_string(), f17(*e), f17(tol), f17(*u)])
        .collect();
    out.csv("qsvt.csv", &["trial", "measured_error", "tolerance", "unitarity_defect"], &rows)?;
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    Ok(vec![Check::new(
        "measured error within tolerance",
        results.iter().all(|r| r.0 <= tol),
        format!("max error {worst:.3e}, tolerance {tol:.3e}"),
    )])
}

/// x³ = (3T₁ + T₃)/4.
fn cubic_poly() -> ChebPoly {
    ChebPoly::new(vec![0.0, 0.75, 0.0, 0.25], 1.0)
}

pub fn build_pair(p: &PolyVerify) -> Result<DominatedPair> {
    Ok(match p.target.as_str() {
        "x" => dominated_pair(&ChebPoly::identity(1.0), p.xi, p.eps)?,
        "x3" => dominated_pair(&cubic_poly(), p.xi, p.eps)?,
        "cube" => pair_cube(p.xi, p.eps)?,
        "fractional" => pair_fractional(p.tau, p.xi, p.eps)?,
        "overlap" => pair_overlap(p.xi, p.eps)?,
        "inverse" => pair_inverse(p.kappa, p.xi, p.eps)?,
        "green" => pair_green(p.eta, p.xi, p.eps)?,
        t => return Err(usage(format!("unknown pair target {t}"))),
    })
}

pub fn poly_verify(p: &PolyVerify, _seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    if p.grid < 2 || p.recheck_factor == 0 {
        return Err(usage("grid must be at least 2 and recheck_factor positive"));
    }
    let pair = build_pair(p)?;
    let first = pair.verify(p.grid);
    let second = pair.verify(p.grid * p.recheck_factor);
    out.text("pair.json", &pair.to_json())?;
    #[derive(Serialize)]
    struct Report<'a> {
        construction: &'a hamlin::polyapprox::Violations,
        grid: &'a hamlin::polyapprox::CertReport,
        recheck: &'a hamlin::polyapprox::CertReport,
    }
    out.json("violations.json", &Report { construction: &pair.violations, grid: &first, recheck: &second })?;
    let v = |r: &hamlin::polyapprox::CertReport| {
        format!(
            "p {:.2e}, q {:.2e}, dominance {:.2e}",
            r.violations.p_error, r.violations.q_error, r.violations.dominance
        )
    };
    Ok(vec![
        Check::new("certified on grid", first.certified, v(&first)),
        Check::new("certified on refined grid", second.certified, v(&second)),
    ])
}

pub fn overlap_sim(p: &OverlapSim, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    if p.reps == 0 {
        return Err(usage("reps must be positive"));
    }
    let a = corela::diag_real(&[p.a]);
    let e = encode(&a)?;
    let plan = OverlapPlan::new(e.norm_bound(), p.eps, p.pfail)?;
    let psi = CVec::from_element(1, c(1.0, 0.0));
    let probs = plan.probabilities(&e, &psi)?;
    let ests: Vec<C64> = (0..p.reps)
        .into_par_iter()
        .map(|rep| Ok(estimate_from_probabilities(probs, p.eps, p.pfail, repetition_seed(seed, rep as u64))?.value()))
        .collect::<Result<_>>()?;
    let truth = c(p.a, 0.0);
    let rows: Vec<Vec<String>> = ests
        .iter()
        .enumerate()
        .map(|(rep, z)| vec![rep.to_string(), f17(z.re), f17(z.im), f17((z - truth).norm())])
        .collect();
    out.csv("overlap.csv", &["rep", "est_re", "est_im", "deviation"], &rows)?;
    if p.log_samples {
        let mplan = MeasurementPlan::new(p.eps, p.pfail, repetition_seed(seed, 0))?;
        let log = sample_log(&mplan, probs);
        let mut buf = Vec::new();
        log.write_csv(&mut buf)?;
        out.text("samples.csv", &String::from_utf8(buf).expect("ascii log"))?;
    }
    let failures = ests.iter().filter(|z| (*z - truth).norm() > p.eps).count();
    Ok(vec![Check::new(
        "failures within cap",
        failures <= p.max_failures,
        format!("{failures} of {} repetitions off by more than {}", p.reps, p.eps),
    )])
}

pub fn green_demo(p: &GreenDemo, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    if p.modes == 0 || p.modes > 6 {
        return Err(usage(format!("modes = {}; need 1..=6", p.modes)));
    }
    let mut rng = point_rng(seed, 0);
    let w = random::real_symmetric(&mut rng, p.modes, 1.0);
    let h = quad(&QuadCoeff::new(w)?)?;
    let pairs: Vec<(usize, usize)> = if p.all_pairs {
        (0..p.modes).flat_map(|j| (0..p.modes).map(move |k| (j, k))).collect()
    } else {
        vec![(p.j, p.k)]
    };
    let z = c(p.zeta, p.eta);
    let results = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(j, k))| {
            let est = green_estimate(&h, j, k, z, p.eps, repetition_seed(seed, 1 + i as u64))?;
            let oracle = green_oracle(&h, j, k, z)?;
            Ok((est, oracle))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (&(j, k), (est, oracle)) in pairs.iter().zip(&results) {
        for (branch, e, o) in [("advanced", est.advanced, oracle.advanced), ("retarded", est.retarded, oracle.retarded)] {
            let err = (e - o).norm();
            worst = worst.max(err);
            rows.push(vec![
                j.to_string(),
                k.to_string(),
                branch.to_string(),
                f17(e.re),
                f17(e.im),
                f17(o.re),
                f17(o.im),
                f17(err),
                est.samples.to_string(),
            ]);
        }
    }
    out.csv(
        "green.csv",
        &["j", "k", "branch", "est_re", "est_im", "oracle_re", "oracle_im", "error", "samples"],
        &rows,
    )?;
    Ok(vec![Check::new("estimates within eps", worst <= p.eps, format!("max error {worst:.3e}"))])
}

fn random_sos_spec(p: &SosSim, rng: &mut ChaCha8Rng) -> Result<SosSpec> {
    let payload = if p.modes > 0 {
        let terms = (0..p.nk)
            .map(|_| (0..p.nj).map(|_| QuadCoeff::new(random::hermitian(rng, p.modes, p.norm))).collect())
            .collect::<hamlin::Result<_>>()?;
        SosTerms::Fermionic { modes: p.modes, terms }
    } else {
        check_dim(p.dim)?;
        let hermitian = p.path == "square";
        let terms = (0..p.nk)
            .map(|_| {
                (0..p.nj)
                    .map(|_| {
                        let a = if hermitian {
                            random::hermitian(rng, p.dim, p.norm)
                        } else {
                            random::with_norm(rng, p.dim, p.norm)
                        };
                        MatrixDoc::from_matrix(&a)
                    })
                    .collect()
            })
            .collect();
        SosTerms::Dense { terms }
    };
    Ok(SosSpec { t: p.t, eps: p.eps, order: p.order, steps: 0, payload })
}

/// Largest weight outside the η sector after evolving |a⟩⊗ψ, over ancilla
/// values a and each η.
fn evolution_leakage(evo: &CMat, modes: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, f64)> {
    let d = 1usize << modes;
    (0..=modes)
        .map(|eta| {
            let mut psi = CVec::zeros(d);
            for s in sector_indices(modes, eta) {
                psi[s] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            let psi = psi.normalize();
            let mut worst: f64 = 0.0;
            for a in 0..2 {
                let mut v = CVec::zeros(2 * d);
                v.rows_mut(a * d, d).copy_from(&psi);
                let w = evo * v;
                let top: Vec<C64> = w.rows(0, d).iter().copied().collect();
                let bottom: Vec<C64> = w.rows(d, d).iter().copied().collect();
                let (l0, l1) = (sector_leakage(&top, eta), sector_leakage(&bottom, eta));
                worst = worst.max((l0 * l0 + l1 * l1).sqrt());
            }
            (eta, worst)
        })
        .collect()
}

pub fn sos_sim(p: &SosSim, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    let mut rng = point_rng(seed, 0);
    let spec = if p.spec.is_empty() {
        random_sos_spec(p, &mut rng)?
    } else {
        let s = std::fs::read_to_string(&p.spec).map_err(|e| usage(format!("{}: {e}", p.spec)))?;
        SosSpec::from_json(&s)?
    };
    spec.payloads()?;
    out.text("spec.json", &spec.to_json())?;
    let rep = match p.path.as_str() {
        "generic" => sos_simulate(&spec)?,
        "square" => sos_square_path(&spec)?,
        other => return Err(usage(format!("unknown path {other}"))),
    };
    let rows: Vec<Vec<String>> = rep.trace.iter().map(|(r, e)| vec![r.to_string(), f17(*e)]).collect();
    out.csv("sos_trace.csv", &["steps", "error"], &rows)?;
    let mut checks = vec![Check::new(
        "converged",
        rep.error <= spec.eps,
        format!("error {:.3e} at r = {}", rep.error, rep.steps),
    )];
    if let SosTerms::Fermionic { modes, .. } = &spec.payload {
        let leak = evolution_leakage(&rep.evolution, *modes, &mut rng);
        let rows: Vec<Vec<String>> = leak.iter().map(|(e, l)| vec![e.to_string(), f17(*l)]).collect();
        out.csv("leakage.csv", &["eta", "leakage"], &rows)?;
        let worst = leak.iter().map(|x| x.1).fold(0.0, f64::max);
        checks.push(Check::new(
            "particle number preserved",
            worst <= p.leakage_tol,
            format!("max leakage {worst:.3e}"),
        ));
    }
    Ok(checks)
}

/// Normal matrix U diag(λ) U† with complex Gaussian λ, returned with λ.
fn random_normal(rng: &mut ChaCha8Rng, n: usize) -> (CMat, Vec<C64>) {
    let u = random::unitary(rng, n);
    let lam: Vec<C64> = (0..n).map(|_| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)).collect();
    (&u * corela::diag(&lam) * u.adjoint(), lam)
}

pub fn eta_norm(p: &EtaNorm, seed: u64, out: &mut Artifacts) -> Result<Vec<Check>> {
    if p.n == 0 || p.n > MAX_SUBSET_MODES {
        return Err(usage(format!("n = {}; need 1..={MAX_SUBSET_MODES}", p.n)));
    }
    let sector_limit = 8.min(MAX_JW_MODES);
    let per_trial: Vec<Vec<(usize, f64, f64, f64)>> = (0..p.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = point_rng(seed, trial as u64);
            let (j, lam) = if p.normal {
                random_normal(&mut rng, p.n)
            } else {
                let h = random::hermitian(&mut rng, p.n, 1.0);
                let (vals, _) = corela::eig_hermitian(&h)?;
                (h, vals.iter().map(|&v| c(v, 0.0)).collect())
            };
            let op = if p.n <= sector_limit { Some(quad(&QuadCoeff::new(j.clone())?)?) } else { None };
            (0..=p.n)
                .map(|eta| {
                    let fast = eta_seminorm(&j, eta)?;
                    let brute = subset_sum_max(&lam, eta)?;
                    let sector = op.as_ref().map_or(f64::NAN, |q| sector_norm(q, p.n, eta));
                    Ok((eta, fast, brute, sector))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let (mut d_brute, mut d_sector): (f64, f64) = (0.0, 0.0);
    for (trial, pts) in per_trial.iter().enumerate() {
        for &(eta, fast, brute, sector) in pts {
            d_brute = d_brute.max((fast - brute).abs());
            if sector.is_finite() {
                d_sector = d_sector.max((fast - sector).abs());
            }
            rows.push(vec![trial.to_string(), eta.to_string(), f17(fast), f17(brute), f17(sector)]);
        }
    }
    out.csv("eta_norm.csv", &["trial", "eta", "fast", "brute", "sector"], &rows)?;
    let mut checks = vec![
        Check::new("fast path equals subset oracle", d_brute <= p.tol, format!("max difference {d_brute:.3e}")),
        Check::new("sector norm equals seminorm", d_sector <= p.tol, format!("max difference {d_sector:.3e}")),
    ];
    if p.comm_terms > 0 && p.n <= 6 {
        let mut rng = point_rng(seed, p.trials as u64);
        let ws: Vec<QuadCoeff> =
            (0..p.comm_terms).map(|_| QuadCoeff::new(random::hermitian(&mut rng, p.n, 1.0))).collect::<hamlin::Result<_>>()?;
        let mut rows = Vec::new();
        let mut ok = true;
        for eta in 0..=p.n {
            for r in comm_sector_report(&ws, eta)? {
                ok &= r.exact_norm <= r.bound * (1.0 + 1e-9) + 1e-12;
                rows.push(vec![eta.to_string(), r.k1.to_string(), r.k2.to_string(), f17(r.exact_norm), f17(r.bound)]);
            }
        }
        out.csv("comm_bound.csv", &["eta", "k1", "k2", "exact_norm", "bound"], &rows)?;
        checks.push(Check::new("sector commutators within bound", ok, String::new()));
    }
    Ok(checks)
}
