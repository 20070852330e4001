//! Product formulas: Trotter–Suzuki addition and Lie group commutator
//! multiplication of block encodings.
//!
//! Formulas are written against exponential closures `s ↦ e^{−isG}` so the
//! same recursion serves plain Hermitian terms, block encodings of scaled
//! payloads and the nested formulas of the sum-of-squares pipeline.

use serde::{Deserialize, Serialize};

use crate::blockenc::{self, BlockEncoding, Form};
use crate::corela::{self, c, comm, eye, kron, matpow, opnorm, pauli_x, phase_s, CMat, Spectral};
use crate::error::{Error, Result};

/// A one-parameter family of unitaries `s ↦ e^{−isG}`.
pub type Evo<'a> = &'a (dyn Fn(f64) -> CMat + Sync);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaKind {
    Suzuki,
    GroupCommutator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaSpec {
    pub kind: FormulaKind,
    pub order: u32,
    pub steps: u64,
    pub time: f64,
}

impl FormulaSpec {
    pub fn suzuki(order: u32, steps: u64, time: f64) -> Self {
        FormulaSpec { kind: FormulaKind::Suzuki, order, steps, time }
    }

    pub fn group_commutator(order: u32, steps: u64, time: f64) -> Self {
        FormulaSpec { kind: FormulaKind::GroupCommutator, order, steps, time }
    }

    fn validate(&self, kind: FormulaKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Domain(format!("expected a {kind:?} formula, got {:?}", self.kind)));
        }
        let ok = match kind {
            FormulaKind::Suzuki => self.order == 1 || (self.order >= 2 && self.order % 2 == 0),
            FormulaKind::GroupCommutator => self.order >= 2 && self.order % 2 == 0,
        };
        if !ok {
            return Err(Error::Order(self.order));
        }
        if self.steps == 0 {
            return Err(Error::Domain("step count must be positive".into()));
        }
        if !self.time.is_finite() {
            return Err(Error::Domain(format!("time {}", self.time)));
        }
        Ok(())
    }
}

/// u_k = 1/(4 − 4^{1/(2k−1)}).
pub fn suzuki_coefficient(k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("Suzuki coefficient needs k >= 2, got {k}")));
    }
    Ok(1.0 / (4.0 - 4f64.powf(1.0 / (2 * k - 1) as f64)))
}

/// (v_k, β_k, γ_k) for the group commutator recursion.
pub fn gc_coefficients(k: u32) -> Result<(f64, f64, f64)> {
    if k < 2 {
        return Err(Error::Domain(format!("commutator coefficients need k >= 2, got {k}")));
    }
    let t = 2f64.powf(1.0 / k as f64);
    let v = t / (4.0 * (2.0 - t));
    Ok((v, (2.0 * v).sqrt(), (0.25 + v).sqrt()))
}

/// One step S_p(τ) over the given exponentials, E_1 acting first.
pub fn suzuki_step(exps: &[Evo], order: u32, tau: f64) -> Result<CMat> {
    if exps.is_empty() {
        return Err(Error::Dimension("no terms".into()));
    }
    match order {
        1 => {
            let mut m = exps[0](tau);
            for e in &exps[1..] {
                m = e(tau) * m;
            }
            Ok(m)
        }
        2 => {
            let half = tau / 2.0;
            let mut m = exps[0](half);
            for e in &exps[1..] {
                m = e(half) * m;
            }
            for e in exps.iter().rev() {
                m = e(half) * m;
            }
            Ok(m)
        }
        p if p >= 4 && p % 2 == 0 => {
            let u = suzuki_coefficient(p / 2)?;
            let outer = suzuki_step(exps, p - 2, u * tau)?;
            let outer2 = &outer * &outer;
            let mid = suzuki_step(exps, p - 2, (1.0 - 4.0 * u) * tau)?;
            Ok(&outer2 * mid * &outer2)
        }
        p => Err(Error::Order(p)),
    }
}

/// S_p(t/r)^r over closures.
pub fn suzuki_evolve(exps: &[Evo], order: u32, steps: u64, t: f64) -> Result<CMat> {
    if steps == 0 {
        return Err(Error::Domain("step count must be positive".into()));
    }
    let step = suzuki_step(exps, order, t / steps as f64)?;
    Ok(matpow(&step, steps))
}

fn check_terms(terms: &[CMat]) -> Result<usize> {
    let n = terms.first().ok_or_else(|| Error::Dimension("no terms".into()))?.nrows();
    for h in terms {
        if h.shape() != (n, n) {
            return Err(Error::Dimension(format!("term shape {:?} vs {n}x{n}", h.shape())));
        }
        corela::check_hermitian(h)?;
    }
    Ok(n)
}

/// Trotter–Suzuki approximation of e^{−it Σ H_j}.
pub fn trotter_apply(terms: &[CMat], spec: &FormulaSpec) -> Result<CMat> {
    check_terms(terms)?;
    spec.validate(FormulaKind::Suzuki)?;
    let cache: Vec<Spectral> = terms.iter().map(Spectral::new).collect::<Result<_>>()?;
    let closures: Vec<Box<dyn Fn(f64) -> CMat + Sync + '_>> =
        cache.iter().map(|s| Box::new(move |x: f64| s.exp(x)) as Box<dyn Fn(f64) -> CMat + Sync>).collect();
    let exps: Vec<Evo> = closures.iter().map(|b| b.as_ref() as Evo).collect();
    suzuki_evolve(&exps, spec.order, spec.steps, spec.time)
}

/// (Σ over (p+1)-tuples of ‖[H_{j_{p+1}}, …, [H_{j_2}, H_{j_1}]]‖)^{1/(p+1)}.
pub fn alpha_comm(terms: &[CMat], p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::Domain("alpha_comm needs p >= 1".into()));
    }
    if p > 3 {
        return Err(Error::Cost(format!("alpha_comm enumerates gamma^(p+1) tuples; p = {p} > 3")));
    }
    check_terms(terms)?;
    // Each level holds the nested commutators of all tuples of that length.
    let mut level: Vec<CMat> = terms.to_vec();
    for _ in 0..p {
        let mut next = Vec::with_capacity(level.len() * terms.len());
        for inner in &level {
            for h in terms {
                next.push(comm(h, inner));
            }
        }
        level = next;
    }
    let total: f64 = level.iter().map(opnorm).sum();
    Ok(total.powf(1.0 / (p + 1) as f64))
}

/// Commutator-scaling step estimate r = ⌈(α t)^{1+1/p} / ε^{1/p}⌉ with unit
/// constant. Used as a starting point for adaptive doubling.
pub fn suzuki_steps(alpha: f64, p: u32, t: f64, eps: f64) -> u64 {
    if alpha == 0.0 || t == 0.0 {
        return 1;
    }
    let p = p as f64;
    let r = (alpha * t.abs()).powf(1.0 + 1.0 / p) / eps.powf(1.0 / p);
    (r.ceil() as u64).max(1)
}

fn payload_or_decode(e: &BlockEncoding) -> Result<CMat> {
    match e.payload() {
        Some(a) => Ok(a.clone()),
        None => blockenc::decode(e),
    }
}

/// Encoding of t·Σ A_j by a Suzuki formula over per-step encodings of the
/// scaled payloads.
pub fn trotter_add(encodings: &[BlockEncoding], spec: &FormulaSpec) -> Result<BlockEncoding> {
    spec.validate(FormulaKind::Suzuki)?;
    let first = encodings.first().ok_or_else(|| Error::Dimension("no encodings".into()))?;
    let n = first.n();
    let mut payloads = Vec::with_capacity(encodings.len());
    let mut nb = 0.0;
    for e in encodings {
        if e.form() != Form::StandardOffDiag {
            return Err(Error::Form { expected: Form::StandardOffDiag.name(), got: e.form().name() });
        }
        if e.n() != n {
            return Err(Error::Dimension("encodings of different sizes".into()));
        }
        payloads.push(payload_or_decode(e)?);
        nb += e.norm_bound();
    }
    let gens: Vec<CMat> = payloads.iter().map(corela::dilate).collect::<Result<_>>()?;
    let w = trotter_apply(&gens, spec)?;
    let sum = payloads.iter().fold(CMat::zeros(n, n), |acc, a| acc + a);
    Ok(BlockEncoding::new_unchecked(w, Some(sum * c(spec.time, 0.0)), nb * spec.time.abs(), Form::StandardOffDiag))
}

/// e^{−iτJ} e^{−iτK} e^{iτJ} e^{iτK}.
pub fn gc_m2(j: &CMat, k: &CMat, tau: f64) -> Result<CMat> {
    if tau < 0.0 {
        return Err(Error::Sign(tau));
    }
    check_terms(&[j.clone(), k.clone()])?;
    let sj = Spectral::new(j)?;
    let sk = Spectral::new(k)?;
    let ej = |s: f64| sj.exp(s);
    let ek = |s: f64| sk.exp(s);
    gc_formula(&ej, &ek, 2, tau)
}

/// M_{2k}(τ) for J, K Hermitian.
pub fn gc_higher(j: &CMat, k: &CMat, tau: f64, order_k: u32) -> Result<CMat> {
    if tau < 0.0 {
        return Err(Error::Sign(tau));
    }
    if order_k > 4 {
        return Err(Error::Cost(format!("recursion depth k = {order_k} > 4")));
    }
    if order_k < 1 {
        return Err(Error::Order(0));
    }
    check_terms(&[j.clone(), k.clone()])?;
    let sj = Spectral::new(j)?;
    let sk = Spectral::new(k)?;
    let ej = |s: f64| sj.exp(s);
    let ek = |s: f64| sk.exp(s);
    gc_formula(&ej, &ek, 2 * order_k, tau)
}

/// Group commutator formula M_p(τ) over closures; any sign of τ.
pub fn gc_formula(ea: Evo, eb: Evo, order: u32, tau: f64) -> Result<CMat> {
    match order {
        2 => Ok(ea(tau) * eb(tau) * ea(-tau) * eb(-tau)),
        p if p >= 4 && p % 2 == 0 => {
            let (_, beta, gamma) = gc_coefficients(p / 2)?;
            let g = gc_formula(ea, eb, p - 2, gamma * tau)? * gc_formula(ea, eb, p - 2, -gamma * tau)?;
            let b = gc_formula(ea, eb, p - 2, -beta * tau)? * gc_formula(ea, eb, p - 2, beta * tau)?;
            // M⁻¹(βτ) M⁻¹(−βτ) = (M(−βτ) M(βτ))†.
            Ok(&g * b.adjoint() * &g)
        }
        p => Err(Error::Order(p)),
    }
}

/// M_p(√(|t|/r))^r approximating e^{−t[G_A, G_B]}; negative t takes the
/// Hermitian conjugate of the formula for |t|.
pub fn gc_evolve(ea: Evo, eb: Evo, order: u32, steps: u64, t: f64) -> Result<CMat> {
    if steps == 0 {
        return Err(Error::Domain("step count must be positive".into()));
    }
    let tau = (t.abs() / steps as f64).sqrt();
    let m = matpow(&gc_formula(ea, eb, order, tau)?, steps);
    Ok(if t < 0.0 { m.adjoint() } else { m })
}

/// Lemma bound τ³/2 (‖[J,[J,K]]‖ + ‖[K,[K,J]]‖).
pub fn gc_m2_bound(j: &CMat, k: &CMat, tau: f64) -> f64 {
    let jk = comm(j, k);
    let kj = comm(k, j);
    0.5 * tau.powi(3) * (opnorm(&comm(j, &jk)) + opnorm(&comm(k, &kj)))
}

/// r = ⌈t³/(4ε²) (‖[J,[J,K]]‖ + ‖[K,[K,J]]‖)²⌉, at least 1.
pub fn gc_steps(j: &CMat, k: &CMat, t: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps = {eps}")));
    }
    if !j.is_square() || j.shape() != k.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", j.shape(), k.shape())));
    }
    let jk = comm(j, k);
    let kj = comm(k, j);
    let s = opnorm(&comm(j, &jk)) + opnorm(&comm(k, &kj));
    // Singular values carry relative error near 1e-16; keep exact integers exact.
    let r = (t.abs().powi(3) / (4.0 * eps * eps) * s * s * (1.0 - 1e-12)).ceil();
    Ok((r as u64).max(1))
}

/// Closing conjugation (X⊗S⊗I)(CNOT₂,₁⊗I) for the two-ancilla layout.
fn multiply_correction(n: usize) -> CMat {
    // CNOT with control a2, target a1 on |a1 a2⟩.
    let mut cnot = CMat::zeros(4, 4);
    for a1 in 0..2 {
        for a2 in 0..2 {
            cnot[((a1 ^ a2) * 2 + a2, a1 * 2 + a2)] = c(1.0, 0.0);
        }
    }
    let xs = kron(&pauli_x(), &phase_s());
    kron(&(xs * cnot), &eye(n))
}

/// (SWAP⊗I)(I⊗X⊗I) on two ancillas and an n-dimensional system.
fn b_embedding(n: usize) -> CMat {
    let mut swap = CMat::zeros(4, 4);
    for a1 in 0..2 {
        for a2 in 0..2 {
            swap[(a2 * 2 + a1, a1 * 2 + a2)] = c(1.0, 0.0);
        }
    }
    let ix = kron(&eye(2), &pauli_x());
    kron(&(swap * ix), &eye(n))
}

/// Lifts a 2n-dimensional unitary to the a1 = 0 half of the 4n space.
fn controlled_on_a1_zero(w: &CMat) -> CMat {
    corela::blkdiag(w, &eye(w.nrows()))
}

/// Group commutator multiplication over closures: `exp_a(s)` and `exp_b(s)`
/// must approximate encode(sA).W and encode(sB).W (dimension 2n).
pub fn multiply_with(exp_a: Evo, exp_b: Evo, n: usize, order: u32, steps: u64, t: f64) -> Result<CMat> {
    let p = b_embedding(n);
    let pd = p.adjoint();
    let ga = |s: f64| controlled_on_a1_zero(&exp_a(s));
    let gb = |s: f64| &p * controlled_on_a1_zero(&exp_b(s)) * &pd;
    let m = gc_evolve(&ga, &gb, order, steps, t)?;
    let cc = multiply_correction(n);
    Ok(&cc * m * cc.adjoint())
}

fn check_gc_encoding(e: &BlockEncoding, limit: f64) -> Result<CMat> {
    if e.form() != Form::StandardOffDiag {
        return Err(Error::Form { expected: Form::StandardOffDiag.name(), got: e.form().name() });
    }
    if !(e.norm_bound() < limit) {
        return Err(Error::Norm(format!("norm bound {} is not below {limit}", e.norm_bound())));
    }
    payload_or_decode(e)
}

/// Encoding of t·AB in Controlled4Block form (a1 = 0 half).
pub fn multiply_generic(ea: &BlockEncoding, eb: &BlockEncoding, spec: &FormulaSpec) -> Result<BlockEncoding> {
    spec.validate(FormulaKind::GroupCommutator)?;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let a = check_gc_encoding(ea, half_pi)?;
    let b = check_gc_encoding(eb, half_pi)?;
    if a.shape() != b.shape() {
        return Err(Error::Dimension("factors of different sizes".into()));
    }
    let n = a.nrows();
    let sa = Spectral::new(&corela::dilate(&a)?)?;
    let sb = Spectral::new(&corela::dilate(&b)?)?;
    let exp_a = |s: f64| sa.exp(s);
    let exp_b = |s: f64| sb.exp(s);
    let w = multiply_with(&exp_a, &exp_b, n, spec.order, spec.steps, spec.time)?;
    let payload = (&a * &b) * c(spec.time, 0.0);
    let nb = ea.norm_bound() * eb.norm_bound() * spec.time.abs();
    Ok(BlockEncoding::new_unchecked(w, Some(payload), nb, Form::Controlled4Block))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Encoding of t·AK (Right) or t·KA (Left) with one ancilla.
pub fn multiply_hermitian(ea: &BlockEncoding, k: &CMat, side: Side, spec: &FormulaSpec) -> Result<BlockEncoding> {
    spec.validate(FormulaKind::GroupCommutator)?;
    corela::check_hermitian(k)?;
    let a = check_gc_encoding(ea, std::f64::consts::PI)?;
    let n = a.nrows();
    if k.shape() != (n, n) {
        return Err(Error::Dimension(format!("K is {:?}, payload is {n}x{n}", k.shape())));
    }
    let nk = opnorm(k);
    if !(ea.norm_bound() + nk < std::f64::consts::PI) {
        return Err(Error::Norm(format!("‖A‖ + ‖K‖ = {} is not below pi", ea.norm_bound() + nk)));
    }
    let sd = Spectral::new(&corela::dilate(&a)?)?;
    let sk = Spectral::new(k)?;
    let exp_d = |s: f64| sd.exp(s);
    let exp_k = |s: f64| {
        let e = sk.exp(s);
        match side {
            Side::Right => corela::blkdiag(&e, &eye(n)),
            Side::Left => corela::blkdiag(&eye(n), &e),
        }
    };
    let m = match side {
        Side::Right => gc_evolve(&exp_d, &exp_k, spec.order, spec.steps, spec.time)?,
        Side::Left => gc_evolve(&exp_k, &exp_d, spec.order, spec.steps, spec.time)?,
    };
    let s = kron(&phase_s(), &eye(n));
    let w = &s * m * s.adjoint();
    let payload = match side {
        Side::Right => &a * k,
        Side::Left => k * &a,
    } * c(spec.time, 0.0);
    let nb = ea.norm_bound() * nk * spec.time.abs();
    Ok(BlockEncoding::new_unchecked(w, Some(payload), nb, Form::StandardOffDiag))
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockenc::{decode, encode};
    use crate::corela::{diag_real, expm_hermitian, pauli_y, pauli_z, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(a: &CMat, b: &CMat) -> f64 {
        opnorm(&(a - b))
    }

    /// e^{−τ²[J,K]} through the Hermitian generator −iτ²[J,K].
    fn gc_target(j: &CMat, k: &CMat, tau: f64) -> CMat {
        let g = comm(j, k) * c(0.0, -tau * tau);
        expm_hermitian(&corela::symmetrize(&g), 1.0).unwrap()
    }

    #[test]
    fn suzuki_coefficient_values() {
        assert!((suzuki_coefficient(2).unwrap() - 0.4144907717).abs() < 1e-9);
        let u3 = 1.0 / (4.0 - 4f64.powf(0.2));
        assert!((suzuki_coefficient(3).unwrap() - u3).abs() < 1e-15);
        assert!((suzuki_coefficient(3).unwrap() - 0.3730658277).abs() < 1e-9);
        assert!((suzuki_coefficient(1000).unwrap() - 1.0 / 3.0).abs() < 1e-3);
        assert!(suzuki_coefficient(1).is_err());
    }

    #[test]
    fn gc_coefficient_values() {
        let (v, b, g) = gc_coefficients(2).unwrap();
        assert!((v - 0.6035533906).abs() < 1e-9);
        assert!((b - 1.0986841135).abs() < 1e-9);
        assert!((g - 0.9238795325).abs() < 1e-9);
        assert!((g - (std::f64::consts::PI / 8.0).cos()).abs() < 1e-12);
        for k in 2..6 {
            let (_, b, g) = gc_coefficients(k).unwrap();
            assert!((4.0 * g * g - 2.0 * b * b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trotter_commuting_is_exact() {
        let z = pauli_z();
        let terms = vec![z.clone(), z.scale(2.0)];
        for r in [1, 3, 7] {
            let w = trotter_apply(&terms, &FormulaSpec::suzuki(2, r, 0.7)).unwrap();
            assert!(dist(&w, &expm_hermitian(&z.scale(3.0), 0.7).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn trotter_first_order_product() {
        let terms = vec![pauli_x(), pauli_y()];
        let w = trotter_apply(&terms, &FormulaSpec::suzuki(1, 1, 0.1)).unwrap();
        let want = expm_hermitian(&pauli_y(), 0.1).unwrap() * expm_hermitian(&pauli_x(), 0.1).unwrap();
        assert!(dist(&w, &want) < 1e-14);
        assert!(matches!(
            trotter_apply(&terms, &FormulaSpec::suzuki(3, 1, 0.1)),
            Err(Error::Order(3))
        ));
    }

    #[test]
    fn trotter_second_order_slope() {
        let terms = vec![pauli_x(), pauli_y()];
        let exact = expm_hermitian(&(pauli_x() + pauli_y()), 1.0).unwrap();
        let rs = [4u64, 8, 16, 32, 64];
        let errs: Vec<f64> = rs
            .iter()
            .map(|&r| dist(&trotter_apply(&terms, &FormulaSpec::suzuki(2, r, 1.0)).unwrap(), &exact))
            .collect();
        let xs: Vec<f64> = rs.iter().map(|&r| r as f64).collect();
        assert!((loglog_slope(&xs, &errs) + 2.0).abs() < 0.1);
    }

    #[test]
    fn alpha_comm_examples() {
        assert_eq!(alpha_comm(&[pauli_x()], 2).unwrap(), 0.0);
        assert_eq!(alpha_comm(&[pauli_z(), pauli_z().scale(0.5)], 1).unwrap(), 0.0);
        assert!((alpha_comm(&[pauli_x(), pauli_y()], 1).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(alpha_comm(&[pauli_x()], 4), Err(Error::Cost(_))));
    }

    #[test]
    fn trotter_add_examples() {
        let a = encode(&eye(2).scale(0.3)).unwrap();
        let b = encode(&eye(2).scale(-0.5)).unwrap();
        let s = trotter_add(&[a, b], &FormulaSpec::suzuki(1, 1, 1.0)).unwrap();
        assert!(s.payload_error().unwrap() < 1e-12);

        let ex = encode(&pauli_x().scale(0.5)).unwrap();
        let ey = encode(&pauli_y().scale(0.5)).unwrap();
        let s = trotter_add(&[ex, ey], &FormulaSpec::suzuki(2, 32, 1.0)).unwrap();
        let gens = vec![corela::dilate(&pauli_x().scale(0.5)).unwrap(), corela::dilate(&pauli_y().scale(0.5)).unwrap()];
        // Second-order commutator-scaling bound with the nested commutators made explicit.
        let alpha = alpha_comm(&gens, 2).unwrap();
        let bound = alpha.powi(3) / (12.0 * 32f64.powi(2));
        let err = s.payload_error().unwrap();
        assert!(err <= bound, "{err} > {bound}");
    }

    #[test]
    fn gc_m2_examples() {
        let z = pauli_z();
        let m = gc_m2(&z, &z.scale(0.3), 0.4).unwrap();
        assert!(dist(&m, &eye(2)) < 1e-14);
        let (x, y) = (pauli_x(), pauli_y());
        let tau = 0.1;
        let err = dist(&gc_m2(&x, &y, tau).unwrap(), &gc_target(&x, &y, tau));
        let bound = gc_m2_bound(&x, &y, tau);
        assert!((bound - 4e-3).abs() < 1e-15);
        assert!(err <= bound);
        let tau = 1e-2;
        let err = dist(&gc_m2(&x, &y, tau).unwrap(), &gc_target(&x, &y, tau));
        let lead = opnorm(&(comm(&x, &comm(&x, &y)).scale(0.5) + comm(&y, &comm(&x, &y)).scale(0.5)));
        assert!((err / tau.powi(3) / lead - 1.0).abs() < 0.02);
        assert!(matches!(gc_m2(&x, &y, -0.1), Err(Error::Sign(_))));
    }

    #[test]
    fn gc_higher_order_slope() {
        let (x, y) = (pauli_x(), pauli_y());
        assert!(dist(&gc_higher(&pauli_z(), &pauli_z(), 0.3, 2).unwrap(), &eye(2)) < 1e-13);
        let taus = [3e-2, 6e-2, 1.2e-1, 2.4e-1];
        let errs: Vec<f64> = taus
            .iter()
            .map(|&t| dist(&gc_higher(&x, &y, t, 2).unwrap(), &gc_target(&x, &y, t)))
            .collect();
        let s = loglog_slope(&taus, &errs);
        assert!((s - 5.0).abs() < 0.2, "slope {s}");
        assert!(matches!(gc_higher(&x, &y, 0.1, 5), Err(Error::Cost(_))));
    }

    #[test]
    fn gc_steps_examples() {
        let z = pauli_z();
        assert_eq!(gc_steps(&z, &z, 1.0, 0.1).unwrap(), 1);
        assert_eq!(gc_steps(&pauli_x(), &pauli_y(), 1.0, 0.1).unwrap(), 1600);
        let (x, y) = (pauli_x(), pauli_y().scale(0.5));
        let r = gc_steps(&x, &y, 1.0, 0.05).unwrap();
        let sx = Spectral::new(&x).unwrap();
        let sy = Spectral::new(&y).unwrap();
        let ex = |s: f64| sx.exp(s);
        let ey = |s: f64| sy.exp(s);
        let m = gc_evolve(&ex, &ey, 2, r, 1.0).unwrap();
        assert!(dist(&m, &gc_target(&x, &y, 1.0)) <= 0.05);
    }

    #[test]
    fn multiply_generic_examples() {
        let ea = encode(&diag_real(&[0.4])).unwrap();
        let e0 = encode(&diag_real(&[0.0])).unwrap();
        let z = multiply_generic(&ea, &e0, &FormulaSpec::group_commutator(2, 4, 1.0)).unwrap();
        assert!(dist(&z.top_block().unwrap().into_w(), &eye(2)) < 1e-13);

        let eb = encode(&diag_real(&[0.5])).unwrap();
        let m = multiply_generic(&ea, &eb, &FormulaSpec::group_commutator(2, 64, 1.0)).unwrap();
        let d = decode(&m).unwrap();
        assert!((d[(0, 0)].re - 0.2).abs() < 5e-3 && d[(0, 0)].im.abs() < 5e-3);
        assert!(corela::unitarity_defect(m.w()) < 1e-9);

        let hx = encode(&pauli_x().scale(0.5)).unwrap();
        let m = multiply_generic(&hx, &hx, &FormulaSpec::group_commutator(2, 64, 1.0)).unwrap();
        assert!(dist(&decode(&m).unwrap(), &eye(2).scale(0.25)) < 1e-2);

        let big = encode(&diag_real(&[1.6])).unwrap();
        assert!(matches!(
            multiply_generic(&big, &eb, &FormulaSpec::group_commutator(2, 4, 1.0)),
            Err(Error::Norm(_))
        ));
    }

    #[test]
    fn multiply_generic_complex_payloads() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random::with_norm(&mut rng, 2, 0.5);
        let b = random::with_norm(&mut rng, 2, 0.5);
        let m = multiply_generic(&encode(&a).unwrap(), &encode(&b).unwrap(), &FormulaSpec::group_commutator(4, 16, 1.0))
            .unwrap();
        assert!(m.payload_error().unwrap() < 1e-3);
        assert!(dist(&decode(&m).unwrap(), &(&a * &b)) < 1e-3);
    }

    #[test]
    fn multiply_hermitian_examples() {
        let ea = encode(&diag_real(&[0.3])).unwrap();
        let g1 = corela::dilate(&diag_real(&[0.3])).unwrap();
        let g2 = diag_real(&[1.0, 0.0]);
        // Error allowed by the step-count corollary at r = 64.
        let s = opnorm(&comm(&g1, &comm(&g1, &g2))) + opnorm(&comm(&g2, &comm(&g2, &g1)));
        let eps = s / (4.0 * 64.0f64).sqrt();
        for side in [Side::Left, Side::Right] {
            let m = multiply_hermitian(&ea, &diag_real(&[1.0]), side, &FormulaSpec::group_commutator(2, 64, 1.0)).unwrap();
            let err = (decode(&m).unwrap()[(0, 0)] - c(0.3, 0.0)).norm();
            assert!(err < eps, "{side:?} {err} {eps}");
            let m4 = multiply_hermitian(&ea, &diag_real(&[1.0]), side, &FormulaSpec::group_commutator(4, 64, 1.0)).unwrap();
            let e4 = (decode(&m4).unwrap()[(0, 0)] - c(0.3, 0.0)).norm();
            assert!(e4 < err / 10.0, "{e4}");
            let z = multiply_hermitian(&ea, &diag_real(&[0.0]), side, &FormulaSpec::group_commutator(2, 3, 1.0)).unwrap();
            assert!(dist(z.w(), &eye(2)) < 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random::hermitian(&mut rng, 4, 0.5);
        let k = random::hermitian(&mut rng, 4, 0.5);
        let ea = encode(&a).unwrap();
        let r = multiply_hermitian(&ea, &k, Side::Right, &FormulaSpec::group_commutator(2, 128, 1.0)).unwrap();
        let er = dist(&decode(&r).unwrap(), &(&a * &k));
        assert!(er < 1e-2, "{er}");
        let l = multiply_hermitian(&ea, &k, Side::Left, &FormulaSpec::group_commutator(2, 128, 1.0)).unwrap();
        assert!(dist(&decode(&l).unwrap(), &(&k * &a)) < 1e-2);
    }
}
