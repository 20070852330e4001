//! Hamiltonian singular value transformation, simulated semantically: the
//! output unitary is assembled singular value by singular value from the
//! dominated pair, without phase factors.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::Arc;

use serde::Serialize;

use crate::blockenc::{self, conjugate, decode, encode, integer_scale, phase_scale, BlockEncoding, Form};
use crate::corela::{self, blkdiag, c, diag_real, eye, kron, opnorm, pauli_x, CMat};
use crate::error::{Error, Result};
use crate::formulas::{multiply_generic, FormulaSpec};
use crate::polyapprox::{
    cheb_fit_on, coeffs_from_values, cheb_nodes, clenshaw, dominated_extension, pair_cube,
    pair_fractional, pair_inverse, pair_poly, ChebPoly, DominatedPair, Parity,
};

#[derive(Clone, Debug)]
pub struct QsvtResult {
    pub output: BlockEncoding,
    /// ‖W_out − encode(payload').W‖ when the payload is known.
    pub measured_error: Option<f64>,
    pub pair: Arc<DominatedPair>,
}

#[derive(Serialize)]
struct QsvtSummary<'a> {
    measured_error: Option<f64>,
    norm_bound: f64,
    form: Form,
    unitarity_defect: f64,
    target: &'a crate::polyapprox::Target,
    xi: f64,
    eps: f64,
    degree_p: usize,
    degree_q: usize,
    certified: bool,
}

impl QsvtResult {
    pub fn to_json(&self) -> String {
        let s = QsvtSummary {
            measured_error: self.measured_error,
            norm_bound: self.output.norm_bound(),
            form: self.output.form(),
            unitarity_defect: corela::unitarity_defect(self.output.w()),
            target: &self.pair.target,
            xi: self.pair.xi,
            eps: self.pair.eps,
            degree_p: self.pair.p.degree(),
            degree_q: self.pair.q.degree(),
            certified: self.pair.certified,
        };
        serde_json::to_string_pretty(&s).expect("summary serializes")
    }
}

/// U f(Σ) V† for odd parity, V f(Σ) V† for even parity.
pub fn sv_transform(a: &CMat, f: &dyn Fn(f64) -> f64, parity: Parity) -> Result<CMat> {
    let (u, s, v) = corela::svd(a)?;
    let fs: Vec<f64> = s.iter().map(|&x| f(x)).collect();
    match parity {
        Parity::Odd => Ok(&u * diag_real(&fs) * v.adjoint()),
        Parity::Even => Ok(&v * diag_real(&fs) * v.adjoint()),
        Parity::None => Err(Error::Parity(0)),
    }
}

/// Oracle encoding of the singular value transform f_sv(A).
pub fn exact_transform(a: &CMat, f: &dyn Fn(f64) -> f64, parity: Parity) -> Result<BlockEncoding> {
    encode(&sv_transform(a, f, parity)?)
}

fn measured(output: &BlockEncoding) -> Option<f64> {
    output.payload_error()
}

/// Encoding of the sum of commuting payloads from the product of their W.
fn commuting_product(parts: &[&BlockEncoding], payload: Option<CMat>, norm_bound: f64) -> BlockEncoding {
    let mut w = parts[0].w().clone();
    for p in &parts[1..] {
        w = &w * p.w();
    }
    BlockEncoding::new_unchecked(w, payload, norm_bound, Form::StandardOffDiag)
}

fn scalar_encoding(n: usize, s: f64) -> Result<BlockEncoding> {
    encode(&eye(n).scale(s))
}

/// Odd-case transform of a standard encoding with a certified pair.
pub fn qsvt_odd(e: &BlockEncoding, pair: Arc<DominatedPair>) -> Result<QsvtResult> {
    if !pair.certified {
        return Err(Error::Cert(format!("{} pair is not certified", pair.target.name())));
    }
    if e.form() != Form::StandardOffDiag {
        return Err(Error::Form { expected: Form::StandardOffDiag.name(), got: e.form().name() });
    }
    let limit = pair.region.hi.asin();
    if e.norm_bound() > limit + 1e-12 {
        return Err(Error::Norm(format!("norm bound {} exceeds {limit} allowed by xi = {}", e.norm_bound(), pair.xi)));
    }
    let n = e.n();
    let a_eff = decode(e)?;
    let (u, s, v) = corela::svd(&a_eff)?;
    let norm = (1.0 + pair.eps).sqrt();
    let mut pd = vec![0.0; n];
    let mut qd = vec![0.0; n];
    for (k, &sigma) in s.iter().enumerate() {
        let x = sigma.sin();
        if x > pair.region.hi + 1e-9 || x < pair.region.lo - 1e-9 {
            return Err(Error::Region(format!(
                "sin(sigma) = {x} outside [{}, {}]",
                pair.region.lo, pair.region.hi
            )));
        }
        pd[k] = pair.p.eval(x) / norm;
        qd[k] = pair.q.eval(x) / norm * sigma.cos();
    }
    let p = diag_real(&pd);
    let iq = diag_real(&qd) * c(0.0, 1.0);
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&p);
    m.view_mut((n, n), (n, n)).copy_from(&p);
    m.view_mut((0, n), (n, n)).copy_from(&iq);
    m.view_mut((n, 0), (n, n)).copy_from(&iq);
    let closing = kron(&pauli_x(), &eye(n)) * c(0.0, -1.0);
    let w = blkdiag(&v, &u) * m * blkdiag(&u.adjoint(), &v.adjoint()) * closing;

    let target = pair.target.clone();
    let big_f = move |x: f64| target.eval(x);
    let payload = match e.payload() {
        Some(a) => Some(sv_transform(a, &big_f, Parity::Odd)?),
        None => None,
    };
    let nb = match &payload {
        Some(b) => opnorm(b),
        None => s.iter().map(|&x| big_f(x).abs()).fold(0.0, f64::max),
    };
    let output = BlockEncoding::new_unchecked(w, payload, nb, Form::StandardOffDiag);
    Ok(QsvtResult { measured_error: measured(&output), output, pair })
}

fn slack_warning(xi: f64) {
    if xi < 0.1 {
        log::warn!("norm slack xi = {xi:.3} is below 0.1; polynomial degrees grow as 1/xi");
    }
}

/// f(H) for Hermitian H with ‖H‖ ≤ π/4 − ξ and even f.
pub fn qsvt_even_hermitian(e: &BlockEncoding, f: &ChebPoly, eps: f64) -> Result<QsvtResult> {
    if e.form() != Form::StandardOffDiag {
        return Err(Error::Form { expected: Form::StandardOffDiag.name(), got: e.form().name() });
    }
    if f.parity != Parity::Even {
        return Err(Error::Parity(f.degree()));
    }
    let h = match e.payload() {
        Some(a) => a.clone(),
        None => decode(e)?,
    };
    corela::check_hermitian(&h)?;
    let nb = e.norm_bound();
    let xi = (FRAC_PI_4 - nb).min(0.3);
    if !(xi > 0.0) {
        return Err(Error::Norm(format!("norm bound {nb} is not below pi/4")));
    }
    slack_warning(xi);
    let n = e.n();

    // Extend f from [−π/4, π/4] (as y ∈ [−1, 1]) to a window-dominated
    // polynomial on [−3π/4, 3π/4].
    let fy = |y: f64| f.eval(y * FRAC_PI_4);
    let f_unit = cheb_fit_on(&fy, f.degree(), 1.0)?.enforce(Parity::Even);
    let mut h_dom = dominated_extension(&f_unit, xi / FRAC_PI_4, 3.0, eps)?;
    h_dom.half_width = 3.0 * FRAC_PI_4;
    let h_odd_fn = |s: f64| h_dom.eval(s - FRAC_PI_4) - h_dom.eval(-s - FRAC_PI_4);
    let h_odd = cheb_fit_on(&h_odd_fn, h_dom.degree().max(1), FRAC_PI_2)?.enforce(Parity::Odd);
    let pair = Arc::new(pair_poly(&h_odd, xi, eps)?);

    let shift = scalar_encoding(n, FRAC_PI_4)?;
    let shifted = commuting_product(&[e, &shift], Some(&h + eye(n).scale(FRAC_PI_4)), nb + FRAC_PI_4);
    let r = qsvt_odd(&shifted, pair.clone())?;

    let (vals, q) = corela::eig_hermitian(&h)?;
    let fv: Vec<f64> = vals.iter().map(|&l| f.eval(l)).collect();
    let payload = &q * diag_real(&fv) * q.adjoint();
    let nb_out = opnorm(&payload);
    let output = BlockEncoding::new_unchecked(r.output.into_w(), Some(payload), nb_out, Form::StandardOffDiag);
    Ok(QsvtResult { measured_error: measured(&output), output, pair })
}

/// Coefficients of P with f(s) = P(s²) for even f, on y ∈ [0, y_max].
fn even_to_square_argument(f: &ChebPoly, y_max: f64) -> Vec<f64> {
    let d = f.degree() / 2;
    let nodes = cheb_nodes(d + 1);
    let vals: Vec<f64> = nodes.iter().map(|&u| f.eval((0.5 * (u + 1.0) * y_max).sqrt())).collect();
    coeffs_from_values(&vals)
}

/// Even transform V f(Σ) V† of a general encoding with ‖A‖ < √(π/2).
pub fn qsvt_even_general(e: &BlockEncoding, f: &ChebPoly, eps: f64) -> Result<QsvtResult> {
    if e.form() != Form::StandardOffDiag {
        return Err(Error::Form { expected: Form::StandardOffDiag.name(), got: e.form().name() });
    }
    if f.parity != Parity::Even {
        return Err(Error::Parity(f.degree()));
    }
    let nb = e.norm_bound();
    if !(nb * nb < FRAC_PI_2) {
        return Err(Error::Norm(format!("norm bound {nb} is not below sqrt(pi/2)")));
    }
    let a = match e.payload() {
        Some(a) => a.clone(),
        None => decode(e)?,
    };
    let n = e.n();
    let xi = (0.2f64).min((FRAC_PI_2 - nb * nb) / 2.0);
    slack_warning(xi);

    // E_{A†A} by group commutator multiplication, steps doubled until the
    // product is accurate to eps.
    let ed = conjugate(e)?;
    let mut steps = 4u64;
    let gram = loop {
        let m = multiply_generic(&ed, e, &FormulaSpec::group_commutator(4, steps, 1.0))?.top_block()?;
        let err = m.payload_error().unwrap_or(0.0);
        if err <= eps || steps >= 1 << 12 {
            if err > eps {
                log::warn!("A†A encoding error {err:.3e} above eps at r = {steps}");
            }
            break m;
        }
        steps *= 2;
    };
    let gram = gram.with_norm_bound(nb * nb);

    let shift = FRAC_PI_4 - xi;
    let neg = scalar_encoding(n, -shift)?;
    let ata = a.adjoint() * &a;
    let ex = commuting_product(&[&gram, &neg], Some(&ata - eye(n).scale(shift)), shift);

    // g(x) = f(√(x + shift)) is the polynomial P(x + shift).
    let y_max = 2.0 * shift + 1e-12;
    let pc = even_to_square_argument(f, y_max);
    let g_fn = |x: f64| clenshaw(&pc, 2.0 * (x + shift) / y_max - 1.0);
    let g = cheb_fit_on(&g_fn, (f.degree() / 2).max(1), FRAC_PI_4)?;
    let mut g_odd = g.clone().enforce(Parity::Odd);
    let g_even = g.enforce(Parity::Even);

    // g_odd(X) = F(2X) with F(σ) = g_odd(σ/2).
    g_odd.half_width *= 2.0;
    let e2x = integer_scale(&ex, 2)?;
    let odd_pair = Arc::new(pair_poly(&g_odd, 2.0 * xi, eps)?);
    let r_odd = qsvt_odd(&e2x, odd_pair)?;
    let r_even = qsvt_even_hermitian(&ex, &g_even, eps)?;

    let payload = sv_transform(&a, &|s| f.eval(s), Parity::Even)?;
    let nb_out = opnorm(&payload);
    let output = commuting_product(&[&r_odd.output, &r_even.output], Some(payload), nb_out);
    Ok(QsvtResult { measured_error: measured(&output), output, pair: r_even.pair })
}

/// Encoding of A⁻¹/κ for σ_min(A) ≥ 1/κ.
pub fn invert(e: &BlockEncoding, kappa: f64, eps: f64) -> Result<QsvtResult> {
    let a = match e.payload() {
        Some(a) => a.clone(),
        None => decode(e)?,
    };
    let (_, s, _) = corela::svd(&a)?;
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= 1e-14 * s[0].max(1.0) {
        return Err(Error::Singular);
    }
    let nb = e.norm_bound();
    let xi = (0.2f64).min(FRAC_PI_2 - nb);
    if !(xi > 0.0) {
        return Err(Error::Norm(format!("norm bound {nb} is not below pi/2")));
    }
    slack_warning(xi);
    let pair = Arc::new(pair_inverse(kappa, xi, eps)?);
    // Transforming A† yields V Σ⁻¹ U†/κ = A⁻¹/κ.
    let r = qsvt_odd(&conjugate(e)?, pair)?;
    Ok(r)
}

/// Encoding of τA for 0 < τ < 1.
pub fn frac_scale(e: &BlockEncoding, tau: f64, eps: f64) -> Result<QsvtResult> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("tau = {tau} outside (0, 1)")));
    }
    let nb = e.norm_bound();
    let xi = (0.2f64).min(FRAC_PI_2 - nb);
    if !(xi > 0.0) {
        return Err(Error::Norm(format!("norm bound {nb} is not below pi/2")));
    }
    slack_warning(xi);
    qsvt_odd(e, Arc::new(pair_fractional(tau, xi, eps)?))
}

const SQUARE_XI: f64 = 0.2;

/// The two pairs used by `square`: x³ and x/3, both at slack 0.2.
#[derive(Clone, Debug)]
pub struct SquarePairs {
    pub cube: Arc<DominatedPair>,
    pub third: Arc<DominatedPair>,
}

impl SquarePairs {
    pub fn new(eps: f64) -> Result<Self> {
        Ok(SquarePairs {
            cube: Arc::new(pair_cube(SQUARE_XI, eps)?),
            third: Arc::new(pair_fractional(1.0 / 3.0, SQUARE_XI, eps)?),
        })
    }
}

/// Encoding of H² for Hermitian H with ‖H‖ ≤ 1.
pub fn square(e: &BlockEncoding, eps: f64) -> Result<QsvtResult> {
    square_with(e, &SquarePairs::new(eps)?)
}

/// `square` with precomputed pairs.
pub fn square_with(e: &BlockEncoding, pairs: &SquarePairs) -> Result<QsvtResult> {
    if e.form() != Form::StandardOffDiag {
        return Err(Error::Form { expected: Form::StandardOffDiag.name(), got: e.form().name() });
    }
    let h = match e.payload() {
        Some(a) => a.clone(),
        None => decode(e)?,
    };
    corela::check_hermitian(&h)?;
    let nb = e.norm_bound();
    if nb > 1.0 + 1e-12 {
        return Err(Error::Norm(format!("squaring needs norm bound <= 1, got {nb}")));
    }
    let n = e.n();
    let third = scalar_encoding(n, 1.0 / 3.0)?;
    let shifted = commuting_product(&[e, &third], Some(&h + eye(n).scale(1.0 / 3.0)), nb + 1.0 / 3.0);
    // (H + 1/3)³ − H³ − H/3 − 1/27 = H².
    let r1 = qsvt_odd(&shifted, pairs.cube.clone())?;
    let neg = phase_scale(e, std::f64::consts::PI)?;
    let r2 = qsvt_odd(&neg, pairs.cube.clone())?;
    let r3 = qsvt_odd(&neg, pairs.third.clone())?;
    let e4 = scalar_encoding(n, -1.0 / 27.0)?;
    let payload = &h * &h;
    let output = commuting_product(&[&r1.output, &r2.output, &r3.output, &e4], Some(payload), nb * nb);
    Ok(QsvtResult { measured_error: measured(&output), output, pair: pairs.cube.clone() })
}

/// Runs `square` on an encoding built from a payload; convenience for tests
/// and the CLI.
pub fn square_of(h: &CMat, eps: f64) -> Result<QsvtResult> {
    square(&blockenc::encode(h)?, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corela::{pauli_z, random};
    use crate::polyapprox::pair_overlap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x_squared() -> ChebPoly {
        // x² = (T₀ + T₂)/2 on [−1, 1].
        ChebPoly { coeffs: vec![0.5, 0.0, 0.5], parity: Parity::Even, half_width: 1.0 }
    }

    #[test]
    fn exact_transform_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random::with_norm(&mut rng, 3, 0.8);
        let e = exact_transform(&a, &|s| s, Parity::Odd).unwrap();
        assert!(opnorm(&(e.w() - encode(&a).unwrap().w())) < 1e-12);
        let e = exact_transform(&diag_real(&[0.5]), &|s| s * s * s, Parity::Odd).unwrap();
        assert!((e.payload().unwrap()[(0, 0)].re - 0.125).abs() < 1e-15);
        let e = exact_transform(&pauli_z().scale(0.3), &|s| s * s, Parity::Even).unwrap();
        assert!(opnorm(&(e.payload().unwrap() - eye(2).scale(0.09))) < 1e-15);
    }

    #[test]
    fn identity_pair_is_identity_map() {
        let eps = 1e-6;
        let pair = Arc::new(crate::polyapprox::dominated_pair(&ChebPoly::identity(1.0), 0.3, eps).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let a = random::with_norm(&mut rng, 3, 1.0);
        let e = encode(&a).unwrap();
        let r = qsvt_odd(&e, pair).unwrap();
        assert!(opnorm(&(r.output.w() - e.w())) <= 2.0 * eps);
    }

    #[test]
    fn cube_transforms() {
        let eps = 1e-6;
        let pair = Arc::new(pair_cube(0.2, eps).unwrap());
        let r = qsvt_odd(&encode(&diag_real(&[0.5])).unwrap(), pair.clone()).unwrap();
        assert!(r.measured_error.unwrap() <= 10.0 * eps.sqrt());
        assert!((decode(&r.output).unwrap()[(0, 0)].re - 0.125).abs() <= 10.0 * eps.sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random::with_norm(&mut rng, 4, 1.0);
        let r = qsvt_odd(&encode(&a).unwrap(), pair).unwrap();
        assert!(r.measured_error.unwrap() <= 1e-2);
        assert!(corela::unitarity_defect(r.output.w()) <= 2.0 * eps + 1e-9);
    }

    #[test]
    fn qsvt_rejects_bad_inputs() {
        let pair = Arc::new(pair_overlap(0.3, 1e-4).unwrap());
        let e = encode(&diag_real(&[0.9])).unwrap();
        assert!(matches!(qsvt_odd(&e, pair.clone()), Err(Error::Norm(_))));
        let mut bad = (*pair).clone();
        bad.certified = false;
        let e = encode(&diag_real(&[0.1])).unwrap();
        assert!(matches!(qsvt_odd(&e, Arc::new(bad)), Err(Error::Cert(_))));
    }

    #[test]
    fn even_hermitian_examples() {
        let eps = 1e-6;
        let zero = ChebPoly::zero();
        let e = encode(&diag_real(&[0.2, -0.1])).unwrap().with_norm_bound(0.5);
        let r = qsvt_even_hermitian(&e, &zero, eps).unwrap();
        assert!(opnorm(&(r.output.w() - eye(4))) <= 10.0 * eps.sqrt());
        let h = diag_real(&[0.5, -0.3]);
        let r = qsvt_even_hermitian(&encode(&h).unwrap(), &x_squared(), eps).unwrap();
        assert!(r.measured_error.unwrap() <= 10.0 * eps.sqrt() + 2.0 * eps);
        let d = decode(&r.output).unwrap();
        assert!((d[(0, 0)].re - 0.25).abs() < 1e-2 && (d[(1, 1)].re - 0.09).abs() < 1e-2);
        let r = qsvt_even_hermitian(&encode(&corela::zeros(2)).unwrap(), &x_squared(), eps).unwrap();
        assert!(opnorm(&(r.output.w() - eye(4))) <= 10.0 * eps.sqrt());
    }

    #[test]
    fn even_general_examples() {
        let eps = 1e-6;
        let r = qsvt_even_general(&encode(&diag_real(&[0.6])).unwrap(), &x_squared(), eps).unwrap();
        assert!((decode(&r.output).unwrap()[(0, 0)].re - 0.36).abs() <= 0.05);
        let a = crate::corela::from_real_rows(2, 2, &[0.0, 0.5, 0.0, 0.0]).unwrap();
        let r = qsvt_even_general(&encode(&a).unwrap(), &x_squared(), eps).unwrap();
        let want = diag_real(&[0.0, 0.25]);
        // V f(Σ) V†: the right singular vector of σ = 0.5 is e₂.
        assert!(opnorm(&(r.output.payload().unwrap() - &want)) < 1e-12);
        assert!(r.measured_error.unwrap() <= 0.05);
        let r = qsvt_even_general(&encode(&corela::zeros(2)).unwrap(), &x_squared(), eps).unwrap();
        assert!(r.measured_error.unwrap() <= 0.05);
    }

    #[test]
    fn invert_examples() {
        let eps = 1e-6;
        let r = invert(&encode(&eye(2)).unwrap(), 1.01, eps).unwrap();
        assert!((decode(&r.output).unwrap()[(0, 0)].re - 1.0 / 1.01).abs() <= 10.0 * eps.sqrt());
        let a = diag_real(&[0.5, 1.0]);
        let r = invert(&encode(&a).unwrap(), 2.2, eps).unwrap();
        let want = diag_real(&[2.0 / 2.2, 1.0 / 2.2]);
        assert!(opnorm(&(decode(&r.output).unwrap() - want)) <= 10.0 * eps.sqrt());
        assert!(matches!(invert(&encode(&a).unwrap(), 1.5, eps), Err(Error::Region(_))));
        assert!(matches!(invert(&encode(&diag_real(&[0.0, 1.0])).unwrap(), 2.0, eps), Err(Error::Singular)));
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let u = random::unitary(&mut rng, 3);
        let a = &u * diag_real(&[0.4, 0.7, 1.0]) * random::unitary(&mut rng, 3);
        let r = invert(&encode(&a).unwrap(), 3.0, eps).unwrap();
        let inv = a.clone().try_inverse().unwrap().scale(1.0 / 3.0);
        assert!(opnorm(&(r.output.payload().unwrap() - &inv)) < 1e-12);
        assert!(r.measured_error.unwrap() <= 10.0 * eps.sqrt());
    }

    #[test]
    fn frac_scale_examples() {
        let eps = 1e-6;
        let r = frac_scale(&encode(&diag_real(&[0.8])).unwrap(), 0.5, eps).unwrap();
        assert!((decode(&r.output).unwrap()[(0, 0)].re - 0.4).abs() <= 10.0 * eps.sqrt());
        let r = frac_scale(&encode(&corela::zeros(2)).unwrap(), 0.5, eps).unwrap();
        assert!(opnorm(&(r.output.w() - eye(4))) <= 10.0 * eps.sqrt());
        let once = frac_scale(&encode(&diag_real(&[0.8])).unwrap(), 0.5, eps).unwrap();
        let twice = frac_scale(&once.output, 0.5, eps).unwrap();
        assert_eq!(twice.output.payload().unwrap()[(0, 0)].re, 0.2);
        assert!(matches!(frac_scale(&encode(&eye(1)).unwrap(), 1.0, eps), Err(Error::Domain(_))));
    }

    #[test]
    fn square_examples() {
        let eps = 1e-6;
        let pairs = SquarePairs::new(eps).unwrap();
        let r = square_with(&encode(&corela::zeros(1)).unwrap(), &pairs).unwrap();
        assert!(opnorm(&(r.output.w() - eye(2))) <= 10.0 * eps.sqrt() + 2.0 * eps);
        let r = square_with(&encode(&diag_real(&[0.5])).unwrap(), &pairs).unwrap();
        assert!((decode(&r.output).unwrap()[(0, 0)].re - 0.25).abs() <= 10.0 * eps.sqrt() + 2.0 * eps);
        let r = square_with(&encode(&pauli_z().scale(0.4)).unwrap(), &pairs).unwrap();
        assert_eq!(r.output.payload().unwrap(), &(pauli_z().scale(0.4) * pauli_z().scale(0.4)));
        assert!(r.measured_error.unwrap() <= 10.0 * eps.sqrt() + 2.0 * eps);
    }
}
