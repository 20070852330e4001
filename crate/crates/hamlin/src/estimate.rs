//! Overlap and Green's function estimation from ancilla measurement
//! probabilities, in exact-probability and sampled modes.
//!
//! Samples come from ChaCha8 keyed by (seed, stream, index): stream is the
//! setting, and sample i reads the 64-bit word at position 2i, so any chunk
//! of a sample run can be regenerated independently.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::blockenc::{encode, BlockEncoding};
use crate::corela::{self, c, opnorm, CMat, CVec, C64};
use crate::error::{Error, Result};
use crate::fermions::jordan_wigner;
use crate::hqsvt::{qsvt_odd, QsvtResult};
use crate::polyapprox::{green_even, pair_green, pair_overlap, ChebPoly, DominatedPair};

const STATE_TOL: f64 = 1e-12;
const CHUNK: u64 = 1 << 16;

/// Ancilla preparations |β⟩ of the overlap protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Setting {
    ZPlus,
    ZMinus,
    XMinus,
    YPlus,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::ZPlus, Setting::ZMinus, Setting::XMinus, Setting::YPlus];

    /// (⟨0|β⟩, ⟨1|β⟩)
    pub fn amplitudes(self) -> (C64, C64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Setting::ZPlus => (c(1.0, 0.0), c(0.0, 0.0)),
            Setting::ZMinus => (c(0.0, 0.0), c(1.0, 0.0)),
            Setting::XMinus => (c(h, 0.0), c(-h, 0.0)),
            Setting::YPlus => (c(h, 0.0), c(0.0, h)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Setting::ZPlus => "+Z",
            Setting::ZMinus => "-Z",
            Setting::XMinus => "-X",
            Setting::YPlus => "+Y",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

fn check_accuracy(eps: f64, p_fail: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps = {eps}")));
    }
    if !(p_fail > 0.0 && p_fail < 1.0) {
        return Err(Error::Domain(format!("p_fail = {p_fail} outside (0, 1)")));
    }
    Ok(())
}

/// ⌈ln(2/p_fail)/(2ε²)⌉ draws for one Hoeffding estimate.
pub fn amplitude_sample_count(eps: f64, p_fail: f64) -> Result<u64> {
    check_accuracy(eps, p_fail)?;
    Ok(((2.0 / p_fail).ln() / (2.0 * eps * eps)).ceil() as u64)
}

/// ⌈ln(8/p_fail)/(2(ε/4)²)⌉ draws per setting: each of the four
/// probabilities to ε/4 with failure p_fail/4.
pub fn overlap_sample_count(eps: f64, p_fail: f64) -> Result<u64> {
    check_accuracy(eps, p_fail)?;
    let e = eps / 4.0;
    Ok(((8.0 / p_fail).ln() / (2.0 * e * e)).ceil() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementPlan {
    pub settings: [Setting; 4],
    pub samples_per_setting: u64,
    pub seed: u64,
}

impl MeasurementPlan {
    pub fn new(eps: f64, p_fail: f64, seed: u64) -> Result<Self> {
        let n = overlap_sample_count(eps, p_fail)?;
        log::info!("overlap budget: eps/4 = {:.3e} and p_fail/4 per setting, {n} samples each", eps / 4.0);
        Ok(MeasurementPlan { settings: Setting::ALL, samples_per_setting: n, seed })
    }
}

fn keyed_rng(seed: u64, stream: u64, start: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * start as u128);
    rng
}

fn draw(rng: &mut ChaCha8Rng, p: f64) -> bool {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p
}

/// Number of ones among samples [0, n) of Bernoulli(p) on a stream.
pub fn bernoulli_count(p: f64, n: u64, seed: u64, stream: u64) -> u64 {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let len = CHUNK.min(n - start);
            let mut rng = keyed_rng(seed, stream, start);
            (0..len).filter(|_| draw(&mut rng, p)).count() as u64
        })
        .sum()
}

/// Individual outcomes, identical to those counted by `bernoulli_count`.
pub fn bernoulli_bits(p: f64, n: u64, seed: u64, stream: u64) -> Vec<bool> {
    let mut rng = keyed_rng(seed, stream, 0);
    (0..n).map(|_| draw(&mut rng, p)).collect()
}

/// Seed of repetition `rep` under a master seed (splitmix64 finalizer).
pub fn repetition_seed(seed: u64, rep: u64) -> u64 {
    let mut z = seed.wrapping_add(rep.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_state(psi: &CVec, n: usize) -> Result<()> {
    if psi.len() != n {
        return Err(Error::Dimension(format!("state of length {} for a {n}-dimensional system", psi.len())));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > STATE_TOL {
        return Err(Error::State(format!("state norm {norm} is not 1")));
    }
    Ok(())
}

/// Exact probabilities ‖(⟨0|⊗I) W (|β⟩⊗ψ)‖² in the order (+Z, −Z, −X, +Y).
pub fn overlap_probabilities(e_f: &BlockEncoding, psi: &CVec) -> Result<[f64; 4]> {
    let n = e_f.n();
    check_state(psi, n)?;
    let w = e_f.w();
    let w00 = w.view((0, 0), (n, n));
    let w01 = w.view((0, n), (n, n));
    let (a0, a1) = (w00 * psi, w01 * psi);
    let mut out = [0.0; 4];
    for s in Setting::ALL {
        let (b0, b1) = s.amplitudes();
        let v = &a0 * b0 + &a1 * b1;
        out[s.index()] = v.norm_squared().clamp(0.0, 1.0);
    }
    Ok(out)
}

/// (2p₊Y − p₊Z − p₋Z) + i(2p₋X − p₊Z − p₋Z).
pub fn combine(p: [f64; 4]) -> C64 {
    let z = p[0] + p[1];
    c(2.0 * p[3] - z, 2.0 * p[2] - z)
}

/// One row per sample: (setting, sample_index, outcome_bit).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleLog {
    pub rows: Vec<(usize, u64, bool)>,
}

impl SampleLog {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "setting,sample_index,outcome_bit")?;
        for &(s, i, b) in &self.rows {
            writeln!(w, "{s},{i},{}", b as u8)?;
        }
        Ok(())
    }
}

pub fn sample_log(plan: &MeasurementPlan, probs: [f64; 4]) -> SampleLog {
    let mut rows = Vec::with_capacity(4 * plan.samples_per_setting as usize);
    for s in plan.settings {
        let bits = bernoulli_bits(probs[s.index()], plan.samples_per_setting, plan.seed, s.index() as u64);
        rows.extend(bits.into_iter().enumerate().map(|(i, b)| (s.index(), i as u64, b)));
    }
    SampleLog { rows }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapEstimate {
    pub re: f64,
    pub im: f64,
    pub eps: f64,
    pub p_fail: f64,
    pub n_samples: u64,
    pub seed: u64,
    #[serde(skip)]
    pub frequencies: [f64; 4],
}

impl OverlapEstimate {
    pub fn value(&self) -> C64 {
        c(self.re, self.im)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serializes")
    }
}

/// Sampled estimate from known probabilities.
pub fn estimate_from_probabilities(probs: [f64; 4], eps: f64, p_fail: f64, seed: u64) -> Result<OverlapEstimate> {
    let plan = MeasurementPlan::new(eps, p_fail, seed)?;
    let n = plan.samples_per_setting;
    let mut freq = [0.0; 4];
    for s in plan.settings {
        freq[s.index()] = bernoulli_count(probs[s.index()], n, seed, s.index() as u64) as f64 / n as f64;
    }
    let v = combine(freq);
    Ok(OverlapEstimate { re: v.re, im: v.im, eps, p_fail, n_samples: n, seed, frequencies: freq })
}

/// The arcsin/2 pair for a given norm bound and target accuracy, reusable
/// across states and seeds.
#[derive(Clone, Debug)]
pub struct OverlapPlan {
    pub pair: Arc<DominatedPair>,
    pub eps: f64,
    pub p_fail: f64,
}

impl OverlapPlan {
    pub fn new(norm_bound: f64, eps: f64, p_fail: f64) -> Result<Self> {
        check_accuracy(eps, p_fail)?;
        if !(norm_bound < 1.0 - 1e-3) {
            return Err(Error::Norm(format!("overlap estimation needs norm bound < 1, got {norm_bound}")));
        }
        let xi = (1.0 - norm_bound).min(0.5);
        let eps_pair = (eps / 40.0).powi(2).min(1e-4);
        Ok(OverlapPlan { pair: Arc::new(pair_overlap(xi, eps_pair)?), eps, p_fail })
    }

    pub fn transform(&self, e: &BlockEncoding) -> Result<QsvtResult> {
        qsvt_odd(e, self.pair.clone())
    }

    pub fn probabilities(&self, e: &BlockEncoding, psi: &CVec) -> Result<[f64; 4]> {
        overlap_probabilities(&self.transform(e)?.output, psi)
    }
}

/// Estimate of ⟨ψ|A|ψ⟩ to ε with probability at least 1 − p_fail.
pub fn overlap_estimate(e: &BlockEncoding, psi: &CVec, eps: f64, p_fail: f64, seed: u64) -> Result<OverlapEstimate> {
    let plan = OverlapPlan::new(e.norm_bound(), eps, p_fail)?;
    let probs = plan.probabilities(e, psi)?;
    estimate_from_probabilities(probs, eps, p_fail, seed)
}

/// Mean of ⌈ln(2/p_fail)/(2ε²)⌉ Bernoulli(p_true) draws.
pub fn amplitude_estimate(p_true: f64, eps: f64, p_fail: f64, seed: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_true) {
        return Err(Error::Domain(format!("probability {p_true}")));
    }
    let n = amplitude_sample_count(eps, p_fail)?;
    Ok(bernoulli_count(p_true, n, seed, 0) as f64 / n as f64)
}

/// Advanced and retarded Green's functions G₊(z), G₋(z).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenEstimate {
    pub advanced: C64,
    pub retarded: C64,
    /// Total measurement shots drawn; 0 in exact-probability mode.
    pub samples: u64,
}

struct Ground {
    lambda0: f64,
    psi0: CVec,
    modes: Vec<CMat>,
}

fn ground(h: &CMat, j: usize, k: usize) -> Result<Ground> {
    corela::check_hermitian(h)?;
    let dim = h.nrows();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::Dimension(format!("dimension {dim} is not 2^n")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > 6 {
        return Err(Error::Cost(format!("{n} modes; Green estimation is limited to 6")));
    }
    if j >= n || k >= n {
        return Err(Error::Domain(format!("mode indices ({j}, {k}) out of range for {n} modes")));
    }
    let (vals, vecs) = corela::eig_hermitian(h)?;
    let mut psi0: CVec = vecs.column(0).into_owned();
    // Fix the global phase so real Hamiltonians give real ground states.
    let (imax, _) = psi0.iter().enumerate().fold((0, 0.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
    let ph = psi0[imax] / psi0[imax].norm();
    psi0 /= ph;
    Ok(Ground { lambda0: vals[0], psi0, modes: jordan_wigner(n)? })
}

/// Dense-inverse oracle: G₊ = ⟨ψ₀|A_j (z − (H−λ₀))⁻¹ A_k†|ψ₀⟩ and
/// G₋ = ⟨ψ₀|A_k† (z + (H−λ₀))⁻¹ A_j|ψ₀⟩, modes 0-based.
pub fn green_oracle(h: &CMat, j: usize, k: usize, z: C64) -> Result<GreenEstimate> {
    let g = ground(h, j, k)?;
    let n = h.nrows();
    let x = h - corela::eye(n).scale(g.lambda0);
    let id = corela::eye(n);
    let plus = (id.clone() * z - &x).try_inverse().ok_or(Error::Singular)?;
    let minus = (id * z + &x).try_inverse().ok_or(Error::Singular)?;
    let a = |m: &CMat, op: &CMat, v: &CVec| -> CVec { m * (op * v) };
    let adv = g.psi0.dotc(&(&g.modes[j] * a(&plus, &g.modes[k].adjoint(), &g.psi0)));
    let ret = g.psi0.dotc(&(g.modes[k].adjoint() * a(&minus, &g.modes[j], &g.psi0)));
    Ok(GreenEstimate { advanced: adv, retarded: ret, samples: 0 })
}

/// Shot source for the Green pipeline: exact probabilities or binomial
/// draws on consecutive streams.
struct Shots {
    seed: Option<u64>,
    stream: u64,
    total: u64,
}

impl Shots {
    fn mean(&mut self, p: f64, n: u64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self.seed {
            None => p,
            Some(seed) => {
                let mut rng = keyed_rng(seed, self.stream, 0);
                self.stream += 1;
                self.total += n;
                let b = Binomial::new(n, p).expect("p clamped to [0, 1]");
                b.sample(&mut rng) as f64 / n as f64
            }
        }
    }
}

/// Encodings for one branch X = H − λ₀ ± ζ, normalized by N.
struct Branch {
    w_odd: BlockEncoding,
    t_even: CMat,
}

impl Branch {
    fn new(x_tilde: &CMat, pair: &Arc<DominatedPair>, h_even: &ChebPoly) -> Result<Self> {
        let w_odd = qsvt_odd(&encode(x_tilde)?.with_norm_bound(1.0), pair.clone())?.output;
        let (vals, q) = corela::eig_hermitian(x_tilde)?;
        let tv: Vec<f64> = vals.iter().map(|&m| h_even.eval(m.sin())).collect();
        let t_even = &q * corela::diag_real(&tv) * q.adjoint();
        Ok(Branch { w_odd, t_even })
    }
}

struct Budget {
    eta: f64,
    eps: f64,
    p_each: f64,
}

/// (⟨v|X/(η²+X²)|v⟩, ⟨v|η/(η²+X²)|v⟩) through the preparation probability
/// ‖v/2‖², the overlap protocol and a direct ancilla measurement.
fn quadratic_terms(br: &Branch, v: &CVec, budget: &Budget, shots: &mut Shots) -> Result<(f64, f64)> {
    let norm = v.norm();
    if norm < 1e-14 {
        return Ok((0.0, 0.0));
    }
    let p1 = (0.25 * norm * norm).min(1.0);
    let d1 = budget.eta * budget.eps / 32.0;
    let n1 = amplitude_sample_count(d1, budget.p_each)?;
    let p1_hat = shots.mean(p1, n1);
    let vt = v / c(norm, 0.0);
    let probs = overlap_probabilities(&br.w_odd, &vt)?;
    let d2 = (budget.eta * budget.eps / (32.0 * (p1_hat + d1).min(1.0))).min(1.0);
    let n2 = overlap_sample_count(d2, budget.p_each)?;
    let mut freq = [0.0; 4];
    for (f, &p) in freq.iter_mut().zip(&probs) {
        *f = shots.mean(p, n2);
    }
    let odd = combine(freq).re;
    let pe = (&br.t_even * &vt).norm_squared();
    let n3 = amplitude_sample_count(d2, budget.p_each)?;
    let even = shots.mean(pe, n3);
    let scale = 4.0 / budget.eta * p1_hat;
    Ok((scale * odd, scale * even))
}

/// ⟨b|M|a⟩ for M = X/(η²+X²) and η/(η²+X²) by diagonal expansion.
fn bilinear(br: &Branch, a: &CVec, b: &CVec, real: bool, budget: &Budget, shots: &mut Shots) -> Result<(C64, C64)> {
    let mut q = |v: CVec| quadratic_terms(br, &v, budget, shots);
    if (a - b).norm() < 1e-14 {
        let (o, e) = q(a.clone())?;
        return Ok((c(o, 0.0), c(e, 0.0)));
    }
    if real {
        // For real symmetric M and real vectors: ⟨b|M|a⟩ = ½(Q(a+b) − Q(a) − Q(b)).
        let (o1, e1) = q(a + b)?;
        let (o2, e2) = q(a.clone())?;
        let (o3, e3) = q(b.clone())?;
        return Ok((c(0.5 * (o1 - o2 - o3), 0.0), c(0.5 * (e1 - e2 - e3), 0.0)));
    }
    let i = c(0.0, 1.0);
    let (o1, e1) = q(a + b)?;
    let (o2, e2) = q(a - b)?;
    let (o3, e3) = q(a + b * i)?;
    let (o4, e4) = q(a - b * i)?;
    Ok((c(0.25 * (o1 - o2), 0.25 * (o3 - o4)), c(0.25 * (e1 - e2), 0.25 * (e3 - e4))))
}

fn is_real(v: &CVec) -> bool {
    v.iter().all(|z| z.im.abs() <= 1e-12)
}

fn green_pipeline(h: &CMat, j: usize, k: usize, z: C64, eps: f64, seed: Option<u64>) -> Result<GreenEstimate> {
    let (zeta, eta) = (z.re, z.im);
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("broadening eta = {eta} must be positive")));
    }
    check_accuracy(eps, 0.5)?;
    let g = ground(h, j, k)?;
    let n = h.nrows();
    let alpha_h = opnorm(h);
    let big_n = (alpha_h + g.lambda0.abs() + zeta.abs()).max(eta);
    let eta_t = eta / big_n;
    let xi = FRAC_PI_2 - 1.0;
    let eps_pair = 1e-6;
    let pair = Arc::new(pair_green(eta_t, xi, eps_pair)?);
    let h_even = green_even(eta_t, xi, eps_pair)?;
    let shifted = |s: f64| (h - corela::eye(n).scale(g.lambda0 - s)).scale(1.0 / big_n);
    let ret = Branch::new(&shifted(zeta), &pair, &h_even)?;
    let adv = Branch::new(&shifted(-zeta), &pair, &h_even)?;

    let real = corela::max_abs_entry(&h.map(|z| c(z.im, 0.0))) <= 1e-12 && is_real(&g.psi0);
    let budget = Budget { eta, eps, p_each: 1e-3 / 24.0 };
    let mut shots = Shots { seed, stream: 0, total: 0 };

    let a = &g.modes[j] * &g.psi0;
    let b = &g.modes[k] * &g.psi0;
    let (so, se) = bilinear(&ret, &a, &b, real, &budget, &mut shots)?;
    let retarded = so - c(0.0, 1.0) * se;

    let a = g.modes[k].adjoint() * &g.psi0;
    let b = g.modes[j].adjoint() * &g.psi0;
    let (so, se) = bilinear(&adv, &a, &b, real, &budget, &mut shots)?;
    let advanced = -so - c(0.0, 1.0) * se;
    Ok(GreenEstimate { advanced, retarded, samples: shots.total })
}

/// Sampled Green's functions for a fermionic Hamiltonian on 2ⁿ dimensions.
/// The broadening is z.im; mode indices are 0-based.
pub fn green_estimate(h: &CMat, j: usize, k: usize, z: C64, eps: f64, seed: u64) -> Result<GreenEstimate> {
    green_pipeline(h, j, k, z, eps, Some(seed))
}

/// The same pipeline with exact measurement probabilities.
pub fn green_exact(h: &CMat, j: usize, k: usize, z: C64, eps: f64) -> Result<GreenEstimate> {
    green_pipeline(h, j, k, z, eps, None)
}
