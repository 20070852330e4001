//! Fermionic operators in the Jordan-Wigner picture, quadratic forms, the
//! η-seminorm and sum-of-squares simulation.
//!
//! Mode j (0-based here, A_{j+1} in one-based notation) is bit j of the
//! basis index; bit value 1 means occupied.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blockenc::{to_controlled_evolution, BlockEncoding, Form};
use crate::corela::{self, block, dilate, kron, matpow, opnorm, pauli_z, CMat, MatrixDoc, Spectral, C64};
use crate::error::{Error, Result};
use crate::formulas::{multiply_with, suzuki_step};
use crate::hqsvt::{square_with, SquarePairs};

pub const MAX_JW_MODES: usize = 10;
pub const MAX_SUBSET_MODES: usize = 16;
pub const MAX_SOS_DIM: usize = 64;
pub const MAX_SOS_TERMS: usize = 4;
pub const MAX_AUTO_STEPS: u64 = 1 << 14;

const NORMAL_TOL: f64 = 1e-10;

fn check_modes(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("need at least one mode".into()));
    }
    if n > MAX_JW_MODES {
        return Err(Error::Cost(format!("{n} modes exceeds the dense limit of {MAX_JW_MODES}")));
    }
    Ok(())
}

/// A_j = I^{⊗(n−j−1)} ⊗ |0⟩⟨1| ⊗ Z^{⊗j} as dense 2ⁿ×2ⁿ matrices.
pub fn jordan_wigner(n: usize) -> Result<Vec<CMat>> {
    check_modes(n)?;
    let lower = corela::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])?;
    Ok((0..n)
        .map(|j| {
            let mut m = corela::eye(1 << (n - j - 1));
            m = kron(&m, &lower);
            for _ in 0..j {
                m = kron(&m, &pauli_z());
            }
            m
        })
        .collect())
}

fn parity_below(s: usize, mode: usize) -> f64 {
    if (s & ((1 << mode) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A_mode|s⟩ as (index, sign), or None when the mode is empty.
pub fn annihilate(s: usize, mode: usize) -> Option<(usize, f64)> {
    (s >> mode & 1 == 1).then(|| (s ^ (1 << mode), parity_below(s, mode)))
}

/// A_mode†|s⟩ as (index, sign), or None when the mode is occupied.
pub fn create(s: usize, mode: usize) -> Option<(usize, f64)> {
    (s >> mode & 1 == 0).then(|| (s | (1 << mode), parity_below(s, mode)))
}

/// Cre(β) = Σ β_p A_p†.
pub fn cre(beta: &[C64]) -> Result<CMat> {
    let n = beta.len();
    check_modes(n)?;
    let mut m = CMat::zeros(1 << n, 1 << n);
    for s in 0..1usize << n {
        for (p, &b) in beta.iter().enumerate() {
            if let Some((t, sg)) = create(s, p) {
                m[(t, s)] += b * sg;
            }
        }
    }
    Ok(m)
}

/// Ann(γ) = Σ γ_p A_p.
pub fn ann(gamma: &[C64]) -> Result<CMat> {
    let n = gamma.len();
    check_modes(n)?;
    let mut m = CMat::zeros(1 << n, 1 << n);
    for s in 0..1usize << n {
        for (p, &g) in gamma.iter().enumerate() {
            if let Some((t, sg)) = annihilate(s, p) {
                m[(t, s)] += g * sg;
            }
        }
    }
    Ok(m)
}

pub fn number_operator(n: usize) -> Result<CMat> {
    check_modes(n)?;
    let d: Vec<f64> = (0..1usize << n).map(|s| s.count_ones() as f64).collect();
    Ok(corela::diag_real(&d))
}

/// Coefficient matrix W of the quadratic operator Σ W_pq A_p†A_q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuadCoeffDoc", into = "QuadCoeffDoc")]
pub struct QuadCoeff {
    pub n: usize,
    pub w: CMat,
    pub hermitian: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadCoeffDoc {
    n: usize,
    w: MatrixDoc,
    hermitian: bool,
}

impl TryFrom<QuadCoeffDoc> for QuadCoeff {
    type Error = Error;
    fn try_from(d: QuadCoeffDoc) -> Result<Self> {
        let q = QuadCoeff { n: d.n, w: d.w.to_matrix()?, hermitian: d.hermitian };
        q.validate()?;
        Ok(q)
    }
}

impl From<QuadCoeff> for QuadCoeffDoc {
    fn from(q: QuadCoeff) -> Self {
        QuadCoeffDoc { n: q.n, w: MatrixDoc::from_matrix(&q.w), hermitian: q.hermitian }
    }
}

impl QuadCoeff {
    /// Wraps W, flagging it Hermitian when it is within tolerance.
    pub fn new(w: CMat) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::Dimension(format!("{}x{} coefficient matrix", w.nrows(), w.ncols())));
        }
        let hermitian = corela::is_hermitian(&w);
        let q = QuadCoeff { n: w.nrows(), w, hermitian };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w.nrows() != self.n || self.w.ncols() != self.n {
            return Err(Error::Dimension(format!(
                "n = {} but W is {}x{}",
                self.n,
                self.w.nrows(),
                self.w.ncols()
            )));
        }
        check_modes(self.n)?;
        if self.hermitian {
            corela::check_hermitian(&self.w)?;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("quad coefficients serialize")
    }
}

/// Quad(W) = Σ W_pq A_p†A_q, assembled on occupation bitstrings.
pub fn quad(wc: &QuadCoeff) -> Result<CMat> {
    wc.validate()?;
    let n = wc.n;
    let mut m = CMat::zeros(1 << n, 1 << n);
    for s in 0..1usize << n {
        for q in 0..n {
            let Some((s1, g1)) = annihilate(s, q) else { continue };
            for p in 0..n {
                let w = wc.w[(p, q)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((s2, g2)) = create(s1, p) {
                    m[(s2, s)] += w * (g1 * g2);
                }
            }
        }
    }
    Ok(m)
}

/// Max |Σλ| over size-η subsets, by enumeration.
pub fn subset_sum_max(vals: &[C64], eta: usize) -> Result<f64> {
    let n = vals.len();
    if eta > n {
        return Err(Error::Domain(format!("eta = {eta} exceeds {n} modes")));
    }
    if n > MAX_SUBSET_MODES {
        return Err(Error::Cost(format!("subset enumeration over {n} > {MAX_SUBSET_MODES} modes")));
    }
    let mut best = 0.0f64;
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != eta {
            continue;
        }
        let s: C64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| vals[i]).sum();
        best = best.max(s.norm());
    }
    Ok(best)
}

/// Largest |sum| of η sorted reals: the top or the bottom η.
fn sorted_extreme_sum(mut v: Vec<f64>, eta: usize) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let bottom: f64 = v[..eta].iter().sum();
    let top: f64 = v[v.len() - eta..].iter().sum();
    bottom.abs().max(top.abs())
}

/// ‖Quad(J)‖ restricted to the η-particle sector, from the eigenvalues of J.
pub fn eta_seminorm(j: &CMat, eta: usize) -> Result<f64> {
    if !j.is_square() {
        return Err(Error::Dimension(format!("{}x{} coefficient matrix", j.nrows(), j.ncols())));
    }
    let n = j.nrows();
    if eta > n {
        return Err(Error::Domain(format!("eta = {eta} exceeds {n} modes")));
    }
    let jd = j.adjoint();
    let dev = opnorm(&(j * &jd - &jd * j));
    if dev > NORMAL_TOL {
        return Err(Error::Normality(dev));
    }
    if eta == 0 {
        return Ok(0.0);
    }
    if corela::is_hermitian(j) {
        let (vals, _) = corela::eig_hermitian(j)?;
        return Ok(sorted_extreme_sum(vals, eta));
    }
    let ij = j * C64::new(0.0, 1.0);
    if corela::is_hermitian(&ij) {
        let (vals, _) = corela::eig_hermitian(&ij)?;
        return Ok(sorted_extreme_sum(vals, eta));
    }
    if n > MAX_SUBSET_MODES {
        return Err(Error::Cost(format!("general normal path limited to {MAX_SUBSET_MODES} modes")));
    }
    let vals: Vec<C64> = j.clone().schur().eigenvalues().ok_or(Error::Normality(dev))?.iter().cloned().collect();
    subset_sum_max(&vals, eta)
}

pub fn sector_indices(n: usize, eta: usize) -> Vec<usize> {
    (0..1usize << n).filter(|s| s.count_ones() as usize == eta).collect()
}

/// Operator restricted to the η-particle sector.
pub fn sector_block(op: &CMat, n: usize, eta: usize) -> CMat {
    let idx = sector_indices(n, eta);
    CMat::from_fn(idx.len(), idx.len(), |a, b| op[(idx[a], idx[b])])
}

pub fn sector_norm(op: &CMat, n: usize, eta: usize) -> f64 {
    let b = sector_block(op, n, eta);
    if b.is_empty() {
        0.0
    } else {
        opnorm(&b)
    }
}

/// Weight of a state outside the η-particle sector.
pub fn sector_leakage(psi: &[C64], eta: usize) -> f64 {
    psi.iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() as usize != eta)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn check_hermitian_terms(ws: &[QuadCoeff]) -> Result<usize> {
    let n = ws.first().map(|w| w.n).ok_or_else(|| Error::Dimension("no terms".into()))?;
    for w in ws {
        if w.n != n {
            return Err(Error::Dimension(format!("mixed mode counts {} and {n}", w.n)));
        }
        corela::check_hermitian(&w.w)?;
    }
    Ok(n)
}

/// First-order commutator bound for H = Σ Quad(W_k)² on the η sector:
/// (Σ_{k₂,k₁} 4‖W_{k₂}‖_η ‖W_{k₁}‖_η ‖[W_{k₂}, W_{k₁}]‖_η)^{1/2}.
pub fn comm_bound_eta_p1(ws: &[QuadCoeff], eta: usize) -> Result<f64> {
    Ok(comm_bound_terms(ws, eta)?.iter().map(|r| r.bound).sum::<f64>().sqrt())
}

/// One (k₁, k₂) term of the η-sector commutator bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorRow {
    pub k1: usize,
    pub k2: usize,
    /// ‖[Quad(W_{k₂})², Quad(W_{k₁})²]‖ on the sector; NaN when not computed.
    pub exact_norm: f64,
    pub bound: f64,
}

fn comm_bound_terms(ws: &[QuadCoeff], eta: usize) -> Result<Vec<SectorRow>> {
    check_hermitian_terms(ws)?;
    let semis: Vec<f64> = ws.iter().map(|w| eta_seminorm(&w.w, eta)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for k2 in 0..ws.len() {
        for k1 in 0..ws.len() {
            let bound = if k1 == k2 {
                0.0
            } else {
                let c = corela::comm(&ws[k2].w, &ws[k1].w);
                4.0 * semis[k2] * semis[k1] * eta_seminorm(&c, eta)?
            };
            rows.push(SectorRow { k1, k2, exact_norm: f64::NAN, bound });
        }
    }
    Ok(rows)
}

/// Per-pair bounds next to the dense sector norms they dominate.
pub fn comm_sector_report(ws: &[QuadCoeff], eta: usize) -> Result<Vec<SectorRow>> {
    let n = check_hermitian_terms(ws)?;
    let squares: Vec<CMat> = ws
        .iter()
        .map(|w| quad(w).map(|q| &q * &q))
        .collect::<Result<_>>()?;
    let mut rows = comm_bound_terms(ws, eta)?;
    for r in &mut rows {
        r.exact_norm = sector_norm(&corela::comm(&squares[r.k2], &squares[r.k1]), n, eta);
    }
    Ok(rows)
}

/// Payloads A_jk of a sum-of-squares Hamiltonian H = Σ_k (Σ_j A_jk)†(Σ_j A_jk).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SosTerms {
    /// terms[k][j]
    Dense { terms: Vec<Vec<MatrixDoc>> },
    /// terms[k][j], each mapped through Quad on `modes` modes.
    Fermionic { modes: usize, terms: Vec<Vec<QuadCoeff>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosSpec {
    pub t: f64,
    pub eps: f64,
    /// Product formula order p (1, 2, 4, ...).
    pub order: u32,
    /// Step count r; 0 selects r by doubling.
    #[serde(default)]
    pub steps: u64,
    pub payload: SosTerms,
}

impl SosSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: SosSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.payloads()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sos spec serializes")
    }

    pub fn n_k(&self) -> usize {
        match &self.payload {
            SosTerms::Dense { terms } => terms.len(),
            SosTerms::Fermionic { terms, .. } => terms.len(),
        }
    }

    pub fn n_j(&self) -> usize {
        match &self.payload {
            SosTerms::Dense { terms } => terms.first().map_or(0, Vec::len),
            SosTerms::Fermionic { terms, .. } => terms.first().map_or(0, Vec::len),
        }
    }

    /// Dense payloads indexed [k][j], validated.
    pub fn payloads(&self) -> Result<Vec<Vec<CMat>>> {
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::Domain(format!("t = {}", self.t)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Domain(format!("eps = {}", self.eps)));
        }
        if !(self.order == 1 || (self.order >= 2 && self.order % 2 == 0)) {
            return Err(Error::Order(self.order));
        }
        let (nk, nj) = (self.n_k(), self.n_j());
        if nk == 0 || nj == 0 || nk > MAX_SOS_TERMS || nj > MAX_SOS_TERMS {
            return Err(Error::Dimension(format!("n_K = {nk}, n_J = {nj}; need 1..={MAX_SOS_TERMS}")));
        }
        let out: Vec<Vec<CMat>> = match &self.payload {
            SosTerms::Dense { terms } => terms
                .iter()
                .map(|row| row.iter().map(MatrixDoc::to_matrix).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?,
            SosTerms::Fermionic { modes, terms } => terms
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|q| {
                            if q.n != *modes {
                                return Err(Error::Dimension(format!("term on {} modes, spec has {modes}", q.n)));
                            }
                            quad(q)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?,
        };
        let n = out[0][0].nrows();
        for row in &out {
            if row.len() != nj {
                return Err(Error::Dimension("ragged term table".into()));
            }
            for a in row {
                if a.nrows() != n || a.ncols() != n {
                    return Err(Error::Dimension("payloads must share one square shape".into()));
                }
                let na = opnorm(a);
                if na >= FRAC_PI_2 {
                    return Err(Error::Norm(format!("payload norm {na} is not below pi/2")));
                }
            }
        }
        if n > MAX_SOS_DIM {
            return Err(Error::Cost(format!("system dimension {n} exceeds {MAX_SOS_DIM}")));
        }
        Ok(out)
    }
}

/// Exact H = Σ_k B_k†B_k with B_k = Σ_j A_jk.
pub fn sos_hamiltonian(payloads: &[Vec<CMat>]) -> CMat {
    let n = payloads[0][0].nrows();
    let mut h = CMat::zeros(n, n);
    for row in payloads {
        let b: CMat = row.iter().fold(CMat::zeros(n, n), |acc, a| acc + a);
        h += b.adjoint() * &b;
    }
    h
}

#[derive(Clone, Debug)]
pub struct SosReport {
    /// |0⟩⟨0| ⊗ e^{−itH} + |1⟩⟨1| ⊗ e^{itH} up to the simulation error.
    pub evolution: CMat,
    pub steps: u64,
    /// ‖top block − exp(−it·dilate(H))‖ at the chosen step count.
    pub error: f64,
    /// (r, error) for every step count tried.
    pub trace: Vec<(u64, f64)>,
}

fn dilation_spectra(row: &[CMat], adjoint: bool) -> Result<Vec<Spectral>> {
    row.iter()
        .map(|a| {
            let a = if adjoint { a.adjoint() } else { a.clone() };
            Spectral::new(&dilate(&a)?)
        })
        .collect()
}

fn inner_product(spectra: &[Spectral], order: u32, s: f64) -> CMat {
    let exps: Vec<Box<dyn Fn(f64) -> CMat + Sync + '_>> =
        spectra.iter().map(|sp| Box::new(move |x: f64| sp.exp(x)) as Box<dyn Fn(f64) -> CMat + Sync>).collect();
    let refs: Vec<&(dyn Fn(f64) -> CMat + Sync)> = exps.iter().map(|b| b.as_ref()).collect();
    suzuki_step(&refs, order, s).expect("order validated by the spec")
}

/// Doubles r from 1 until `error(r)` is at most eps.
fn search_steps(
    spec: &SosSpec,
    mut run: impl FnMut(u64) -> Result<(CMat, f64)>,
) -> Result<(CMat, u64, f64, Vec<(u64, f64)>)> {
    let mut trace = Vec::new();
    if spec.steps > 0 {
        let (u, err) = run(spec.steps)?;
        trace.push((spec.steps, err));
        return Ok((u, spec.steps, err, trace));
    }
    let mut r = 1u64;
    loop {
        match run(r) {
            Ok((u, err)) => {
                trace.push((r, err));
                log::debug!("sos r = {r}: error {err:.3e}");
                if err <= spec.eps {
                    return Ok((u, r, err, trace));
                }
            }
            Err(Error::Norm(m)) => {
                log::debug!("sos r = {r}: {m}");
                trace.push((r, f64::NAN));
            }
            Err(e) => return Err(e),
        }
        if r >= MAX_AUTO_STEPS {
            return Err(Error::Convergence(format!("sos error above {} at r = {MAX_AUTO_STEPS}; trace {:?}", spec.eps, trace)));
        }
        r *= 2;
    }
}

fn finish_report(top: CMat, h: &CMat, t: f64, steps: u64, error: f64, trace: Vec<(u64, f64)>) -> Result<SosReport> {
    let payload = h.scale(t);
    let nb = opnorm(&payload);
    let e = BlockEncoding::new_unchecked(top, Some(payload), nb, Form::StandardOffDiag);
    Ok(SosReport { evolution: to_controlled_evolution(&e)?, steps, error, trace })
}

/// Sum-of-squares simulation with group-commutator multiplication of
/// E_{B†} and E_B and Trotter addition over j (inner) and k (outer).
pub fn sos_simulate(spec: &SosSpec) -> Result<SosReport> {
    let payloads = spec.payloads()?;
    let n = payloads[0][0].nrows();
    let h = sos_hamiltonian(&payloads);
    let exact = Spectral::new(&dilate(&h)?)?.exp(spec.t);
    let order = spec.order;
    let gc_order = order.max(2) + order.max(2) % 2;
    let b_spectra: Vec<Vec<Spectral>> = payloads.iter().map(|row| dilation_spectra(row, false)).collect::<Result<_>>()?;
    let bd_spectra: Vec<Vec<Spectral>> = payloads.iter().map(|row| dilation_spectra(row, true)).collect::<Result<_>>()?;

    let outer: Vec<Box<dyn Fn(f64) -> CMat + Sync + '_>> = (0..payloads.len())
        .map(|k| {
            let (b, bd) = (&b_spectra[k], &bd_spectra[k]);
            Box::new(move |s: f64| {
                let ea = |x: f64| inner_product(bd, order, x);
                let eb = |x: f64| inner_product(b, order, x);
                multiply_with(&ea, &eb, n, gc_order, 1, s).expect("order validated by the spec")
            }) as Box<dyn Fn(f64) -> CMat + Sync>
        })
        .collect();
    let refs: Vec<&(dyn Fn(f64) -> CMat + Sync)> = outer.iter().map(|b| b.as_ref()).collect();

    let (top, steps, error, trace) = search_steps(spec, |r| {
        let step = suzuki_step(&refs, order, spec.t / r as f64)?;
        let top = block(&matpow(&step, r), 0, 0, 2 * n, 2 * n);
        let err = opnorm(&(&top - &exact));
        Ok((top, err))
    })?;
    finish_report(top, &h, spec.t, steps, error, trace)
}

/// Sum-of-squares simulation for Hermitian B_k through the squaring
/// pipeline, with a single ancilla throughout.
pub fn sos_square_path(spec: &SosSpec) -> Result<SosReport> {
    let payloads = spec.payloads()?;
    let n = payloads[0][0].nrows();
    let bs: Vec<CMat> = payloads.iter().map(|row| row.iter().fold(CMat::zeros(n, n), |acc, a| acc + a)).collect();
    for b in &bs {
        corela::check_hermitian(b)?;
    }
    let h = sos_hamiltonian(&payloads);
    let exact = Spectral::new(&dilate(&h)?)?.exp(spec.t);
    let order = spec.order;
    let eps_pair = (spec.eps * 1e-3).clamp(1e-9, 1e-6);
    let pairs = Arc::new(SquarePairs::new(eps_pair)?);
    let spectra: Vec<Vec<Spectral>> = payloads.iter().map(|row| dilation_spectra(row, false)).collect::<Result<_>>()?;
    let norm_sums: Vec<f64> = payloads.iter().map(|row| row.iter().map(opnorm).sum()).collect();

    let (top, steps, error, trace) = search_steps(spec, |r| {
        let tau = spec.t / r as f64;
        if norm_sums.iter().any(|&m| tau.sqrt() * m > 1.0) {
            return Err(Error::Norm(format!("sqrt(tau) * sum ||A_jk|| exceeds 1 at r = {r}")));
        }
        let outer: Vec<Box<dyn Fn(f64) -> CMat + Sync + '_>> = (0..bs.len())
            .map(|k| {
                let (sp, b, m, pairs) = (&spectra[k], &bs[k], norm_sums[k], pairs.clone());
                Box::new(move |s: f64| {
                    let root = s.abs().sqrt();
                    let w = inner_product(sp, order, root);
                    let e = BlockEncoding::new_unchecked(w, Some(b.scale(root)), root * m, Form::StandardOffDiag);
                    let sq = square_with(&e, &pairs).expect("norm checked per step").output.into_w();
                    if s < 0.0 {
                        sq.adjoint()
                    } else {
                        sq
                    }
                }) as Box<dyn Fn(f64) -> CMat + Sync>
            })
            .collect();
        let refs: Vec<&(dyn Fn(f64) -> CMat + Sync)> = outer.iter().map(|b| b.as_ref()).collect();
        // The outer Suzuki coefficients are at most 1 in magnitude, so the
        // per-call norm stays within the check above.
        let step = suzuki_step(&refs, order, tau)?;
        let top = matpow(&step, r);
        let err = opnorm(&(&top - &exact));
        Ok((top, err))
    })?;
    finish_report(top, &h, spec.t, steps, error, trace)
}
