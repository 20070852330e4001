//! Dominated (p, q) pairs, smooth windows and dominated extensions.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc_inv};

use super::certify::{certify_grid, CertReport, Violations, DEFAULT_GRID};
use super::cheb::{
    arcsin_degree, cheb_fit_on, fit_adaptive, invsqrt_degree, maclaurin_arcsin, maclaurin_invsqrt,
    trig_poly, uniform_grid, ChebPoly, Parity, Trig,
};
use crate::error::{Error, Result};

/// The function F applied to singular values σ: the pair approximates
/// sin F(arcsin x) and cos F(arcsin x)/√(1−x²).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Poly { f: ChebPoly },
    Fractional { tau: f64 },
    Overlap,
    Inverse { kappa: f64 },
    Cube,
    Green { eta: f64 },
}

impl Target {
    pub fn eval(&self, sigma: f64) -> f64 {
        match self {
            Target::Poly { f } => f.eval(sigma),
            Target::Fractional { tau } => tau * sigma,
            Target::Overlap => 0.5 * sigma.asin(),
            Target::Inverse { kappa } => 1.0 / (kappa * sigma),
            Target::Cube => sigma * sigma * sigma,
            Target::Green { eta } => 0.5 * (eta * sigma / (eta * eta + sigma * sigma)).asin(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Target::Poly { .. } => "poly",
            Target::Fractional { .. } => "fractional",
            Target::Overlap => "overlap",
            Target::Inverse { .. } => "inverse",
            Target::Cube => "cube",
            Target::Green { .. } => "green",
        }
    }

    /// Largest x for which F(arcsin x) is defined.
    fn hi_limit(&self) -> f64 {
        match self {
            Target::Overlap => 1f64.sin(),
            _ => 1.0,
        }
    }

    /// Approximation region lo ≤ |x| ≤ hi for slack ξ.
    pub fn region(&self, xi: f64) -> Region {
        let hi = match self {
            Target::Overlap => (1.0 - xi).sin(),
            _ => (std::f64::consts::FRAC_PI_2 - xi).sin(),
        };
        let lo = match self {
            Target::Inverse { kappa } => (1.0 / kappa).sin(),
            _ => 0.0,
        };
        Region { lo, hi }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominatedPair {
    pub p: ChebPoly,
    pub q: ChebPoly,
    pub xi: f64,
    pub eps: f64,
    pub certified: bool,
    pub grid_points: usize,
    pub region: Region,
    pub target: Target,
    pub violations: Violations,
}

/// JSON form of a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDocument {
    pub target: Target,
    pub xi: f64,
    pub eps: f64,
    pub degree_p: usize,
    pub degree_q: usize,
    pub coeffs_p: Vec<f64>,
    pub coeffs_q: Vec<f64>,
    pub certified: bool,
    pub max_violations: Violations,
}

impl DominatedPair {
    /// Re-runs the grid certification with the pair's own target.
    pub fn verify(&self, grid_points: usize) -> CertReport {
        let t = self.target.clone();
        verify_dominated(self, &move |s| t.eval(s), grid_points)
    }

    pub fn to_document(&self) -> PairDocument {
        PairDocument {
            target: self.target.clone(),
            xi: self.xi,
            eps: self.eps,
            degree_p: self.p.degree(),
            degree_q: self.q.degree(),
            coeffs_p: self.p.coeffs.clone(),
            coeffs_q: self.q.coeffs.clone(),
            certified: self.certified,
            max_violations: self.violations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("pair documents serialize")
    }

    pub fn from_document(doc: PairDocument) -> Result<Self> {
        check_xi_eps(doc.xi, doc.eps)?;
        if doc.coeffs_p.len() != doc.degree_p + 1 || doc.coeffs_q.len() != doc.degree_q + 1 {
            return Err(Error::Parse("degree does not match coefficient count".into()));
        }
        if doc.coeffs_p.iter().chain(&doc.coeffs_q).any(|c| !c.is_finite()) {
            return Err(Error::Parse("non-finite coefficient".into()));
        }
        let p = ChebPoly { coeffs: doc.coeffs_p, parity: Parity::None, half_width: 1.0 };
        let q = ChebPoly { coeffs: doc.coeffs_q, parity: Parity::None, half_width: 1.0 };
        if p.coeffs.iter().step_by(2).any(|&c| c != 0.0) {
            return Err(Error::Parity(p.degree()));
        }
        if q.coeffs.iter().skip(1).step_by(2).any(|&c| c != 0.0) {
            return Err(Error::Parity(q.degree()));
        }
        Ok(DominatedPair {
            p: p.enforce(Parity::Odd),
            q: q.enforce(Parity::Even),
            region: doc.target.region(doc.xi),
            xi: doc.xi,
            eps: doc.eps,
            certified: doc.certified,
            grid_points: 0,
            target: doc.target,
            violations: doc.max_violations,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PairDocument = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_document(doc)
    }
}

/// Certification report for `pair` against F = `f_target` (a function of σ).
pub fn verify_dominated(pair: &DominatedPair, f_target: &(dyn Fn(f64) -> f64 + Sync), grid_points: usize) -> CertReport {
    certify_grid(&pair.p, &pair.q, f_target, pair.region.lo, pair.region.hi, pair.eps, grid_points)
}

fn check_xi_eps(xi: f64, eps: f64) -> Result<()> {
    if !(xi > 0.0 && xi <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("xi = {xi} outside (0, pi/2]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} outside (0, 1)")));
    }
    Ok(())
}

/// ½(erf(κ(x+c)) − erf(κ(x−c))): ≈1 for |x| < c, ≈0 beyond.
fn erf_bump(x: f64, c: f64, kappa: f64) -> f64 {
    0.5 * (erf(kappa * (x + c)) - erf(kappa * (x - c)))
}

const FIT_CAP: usize = 1 << 16;

fn finish(
    p: ChebPoly,
    q: ChebPoly,
    target: Target,
    region: Region,
    xi: f64,
    eps: f64,
) -> Result<DominatedPair> {
    let mut pair = DominatedPair {
        p,
        q,
        xi,
        eps,
        certified: false,
        grid_points: DEFAULT_GRID,
        region,
        target,
        violations: Violations::default(),
    };
    let report = pair.verify(DEFAULT_GRID);
    pair.violations = report.violations;
    pair.certified = report.certified;
    Ok(pair)
}

/// Pair for `target` from Chebyshev fits of the windowed composite targets
/// on all of [−1, 1]. The window W is an erf product that is 1 (to double
/// precision) on the region and decays before the edge of the domain of F,
/// so p² + (1−x²)q² = W² ≤ 1 up to the fit error.
fn windowed_pair(target: Target, xi: f64, eps: f64) -> Result<DominatedPair> {
    check_xi_eps(xi, eps)?;
    let region = target.region(xi);
    let gap = target.hi_limit() - region.hi;
    if !(gap > 0.0) || region.lo >= region.hi {
        return Err(Error::Domain(format!("empty approximation region for xi = {xi}")));
    }
    let (c_hi, k_hi, clamp_hi) = (region.hi + 0.4 * gap, 6.0 / (0.4 * gap), region.hi + 0.8 * gap);
    let lo = region.lo;
    let window = move |x: f64| {
        let mut w = erf_bump(x, c_hi, k_hi);
        if lo > 0.0 {
            w *= 1.0 - erf_bump(x, 0.6 * lo, 6.0 / (0.4 * lo));
        }
        w
    };
    let clamp = move |x: f64| x.signum() * x.abs().max(0.2 * lo).min(clamp_hi);
    let tp = target.clone();
    let fp = move |x: f64| {
        let w = window(x);
        if w == 0.0 {
            return 0.0;
        }
        tp.eval(clamp(x).asin()).sin() * w
    };
    let tq = target.clone();
    let fq = move |x: f64| {
        let w = window(x);
        if w == 0.0 {
            return 0.0;
        }
        let c = clamp(x);
        tq.eval(c.asin()).cos() / (1.0 - c * c).sqrt() * w
    };
    let tol = 1e-3 * eps;
    let (p, ok_p) = fit_adaptive(&fp, 1.0, 64, FIT_CAP, tol)?;
    let (q, ok_q) = fit_adaptive(&fq, 1.0, 64, FIT_CAP, tol)?;
    if !(ok_p && ok_q) {
        return Err(Error::Cert(format!(
            "{} fit did not converge below degree {FIT_CAP}",
            target.name()
        )));
    }
    let p = p.enforce(Parity::Odd).chop(tol);
    let q = q.enforce(Parity::Even).chop(tol);
    let pair = finish(p, q, target, region, xi, eps)?;
    if !pair.certified {
        return Err(Error::Cert(format!("{} pair: {:?}", pair.target.name(), pair.violations)));
    }
    Ok(pair)
}

/// Pair for F(σ) = f(σ) built by the Maclaurin composition
/// p = h_sin(f(h_arcsin x)/α), q = h_invsqrt(x) h_cos(f(h_arcsin x)/α).
/// `f` is odd and is read as a function of σ ∈ [−π/2, π/2].
pub fn dominated_pair(f: &ChebPoly, xi: f64, eps: f64) -> Result<DominatedPair> {
    check_xi_eps(xi, eps)?;
    if f.parity != Parity::Odd {
        return Err(Error::Parity(f.degree()));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f_max = f.max_abs_on(-half_pi, half_pi, DEFAULT_GRID);
    let df_max = f.derivative().max_abs_on(-half_pi, half_pi, DEFAULT_GRID).max(1.0);
    let target = Target::Poly { f: f.clone() };
    let region = target.region(xi);
    let s = region.hi;
    // q errors are amplified by 1/√(1−s²) = 1/sin ξ.
    let g = 1.0 / (1.0 - s * s).sqrt();
    let alpha = f_max * (1.0 + 1e-3) + eps;
    let mut shrink = 1.0;
    let mut last = None;
    for _round in 0..3 {
        let e_trig = eps / (8.0 * g) * shrink;
        let e_arcsin = eps / (8.0 * g * df_max) * shrink;
        let e_inv = eps / 8.0 * shrink;
        let h_arcsin = maclaurin_arcsin(arcsin_degree(s, e_arcsin))?;
        let h_inv = maclaurin_invsqrt(invsqrt_degree(s, e_inv))?;
        let h_sin = trig_poly(alpha, Trig::Sin, e_trig);
        let h_cos = trig_poly(alpha, Trig::Cos, e_trig);
        let inner = |x: f64| f.eval(h_arcsin.eval(x)) / alpha;
        let fp = |x: f64| h_sin.eval(inner(x));
        let fq = |x: f64| h_inv.eval(x) * h_cos.eval(inner(x));
        let comp = f.degree() * h_arcsin.degree();
        let dp = h_sin.degree() * comp;
        let dq = h_inv.degree() + h_cos.degree() * comp;
        let tol = 1e-3 * eps;
        let (p, _) = fit_adaptive(&fp, 1.0, 64, dp.min(FIT_CAP), tol)?;
        let (q, _) = fit_adaptive(&fq, 1.0, 64, dq.min(FIT_CAP), tol)?;
        let p = p.enforce(Parity::Odd).chop(tol);
        let q = q.enforce(Parity::Even).chop(tol);
        let pair = finish(p, q, target.clone(), region, xi, eps)?;
        if pair.certified {
            return Ok(pair);
        }
        log::debug!("dominated_pair round failed: {:?}", pair.violations);
        last = Some(pair.violations);
        shrink *= 0.1;
    }
    Err(Error::Cert(format!("dominated_pair after tightening: {:?}", last)))
}

pub fn pair_poly(f: &ChebPoly, xi: f64, eps: f64) -> Result<DominatedPair> {
    if f.parity != Parity::Odd {
        return Err(Error::Parity(f.degree()));
    }
    windowed_pair(Target::Poly { f: f.clone() }, xi, eps)
}

pub fn pair_inverse(kappa: f64, xi: f64, eps: f64) -> Result<DominatedPair> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa = {kappa} must exceed 1")));
    }
    windowed_pair(Target::Inverse { kappa }, xi, eps)
}

pub fn pair_fractional(tau: f64, xi: f64, eps: f64) -> Result<DominatedPair> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("tau = {tau} outside (0, 1)")));
    }
    windowed_pair(Target::Fractional { tau }, xi, eps)
}

pub fn pair_overlap(xi: f64, eps: f64) -> Result<DominatedPair> {
    if !(xi < 1.0) {
        return Err(Error::Domain(format!("overlap needs xi < 1, got {xi}")));
    }
    windowed_pair(Target::Overlap, xi, eps)
}

pub fn pair_cube(xi: f64, eps: f64) -> Result<DominatedPair> {
    windowed_pair(Target::Cube, xi, eps)
}

pub fn pair_green(eta: f64, xi: f64, eps: f64) -> Result<DominatedPair> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("eta = {eta} must be positive")));
    }
    windowed_pair(Target::Green { eta }, xi, eps)
}

/// Even polynomial ≈ η/√(η² + arcsin² x) on |x| ≤ sin(π/2 − ξ), bounded by
/// 1 + ε on [−1, 1].
pub fn green_even(eta: f64, xi: f64, eps: f64) -> Result<ChebPoly> {
    check_xi_eps(xi, eps)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("eta = {eta} must be positive")));
    }
    let hi = (std::f64::consts::FRAC_PI_2 - xi).sin();
    let gap = 1.0 - hi;
    let (c_hi, k_hi) = (hi + 0.4 * gap, 6.0 / (0.4 * gap));
    let target = move |x: f64| eta / (eta * eta + x.asin().powi(2)).sqrt();
    let f = move |x: f64| target(x.clamp(-1.0, 1.0)) * erf_bump(x, c_hi, k_hi);
    let tol = 1e-3 * eps;
    let (h, ok) = fit_adaptive(&f, 1.0, 64, FIT_CAP, tol)?;
    if !ok {
        return Err(Error::Cert(format!("green_even fit did not converge below degree {FIT_CAP}")));
    }
    let h = h.enforce(Parity::Even).chop(tol);
    let (mut err, mut over) = (0.0f64, 0.0f64);
    for x in uniform_grid(-1.0, 1.0, DEFAULT_GRID) {
        let v = h.eval(x);
        over = over.max(v.abs() - 1.0);
        if x.abs() <= hi {
            err = err.max((v - target(x)).abs());
        }
    }
    if err > eps || over > eps {
        return Err(Error::Cert(format!("green_even: error {err:.3e}, overshoot {over:.3e}")));
    }
    Ok(h)
}

const WINDOW_DOUBLINGS: u32 = 8;

/// Even polynomial on [−b, b] (half_width b) in [1−ε_rec, 1] for
/// |x| ≤ 1−ξ, in [0, 1] for 1−ξ < |x| < 1 and in [0, ε_rec] for 1 ≤ |x| ≤ b.
pub fn window_poly(xi: f64, b: f64, eps_rec: f64) -> Result<ChebPoly> {
    if !(xi > 0.0 && xi <= 1.0 && b > 1.0) {
        return Err(Error::Domain(format!("window needs 0 < xi <= 1 < b, got xi = {xi}, b = {b}")));
    }
    if !(eps_rec > 0.0 && eps_rec < 1.0) {
        return Err(Error::Domain(format!("eps_rec = {eps_rec}")));
    }
    let c = 1.0 - xi / 2.0;
    let kappa = erfc_inv(eps_rec / 2.0) / (xi / 2.0);
    let f = move |x: f64| (1.0 - eps_rec / 2.0) * erf_bump(x, c, kappa) + eps_rec / 4.0;
    let mut d = ((b * kappa).ceil() as usize).max(16);
    d += d % 2;
    for _ in 0..=WINDOW_DOUBLINGS {
        let w = cheb_fit_on(&f, d, b)?.enforce(Parity::Even).chop(1e-3 * eps_rec);
        if window_ok(&w, xi, b, eps_rec) {
            return Ok(w);
        }
        d *= 2;
    }
    Err(Error::Cert(format!("window (xi = {xi}, b = {b}, eps = {eps_rec}) after {WINDOW_DOUBLINGS} doublings")))
}

fn window_ok(w: &ChebPoly, xi: f64, b: f64, eps_rec: f64) -> bool {
    uniform_grid(-b, b, DEFAULT_GRID).all(|x| {
        let v = w.eval(x);
        let ax = x.abs();
        if ax <= 1.0 - xi {
            (1.0 - eps_rec..=1.0).contains(&v)
        } else if ax < 1.0 {
            (0.0..=1.0).contains(&v)
        } else {
            (0.0..=eps_rec).contains(&v)
        }
    })
}

/// h = f·w on [−b, b] with |h − f| ≤ ε on [−1+ξ, 1−ξ], |h| ≤ |f| + ε on
/// [−1, 1] and |h| ≤ ε for 1 ≤ |x| ≤ b.
pub fn dominated_extension(f: &ChebPoly, xi: f64, b: f64, eps_dom: f64) -> Result<ChebPoly> {
    if (f.half_width - 1.0).abs() > 1e-15 {
        return Err(Error::Domain("extension input must live on [-1, 1]".into()));
    }
    if f.coeffs.iter().all(|&c| c == 0.0) {
        return Ok(ChebPoly { coeffs: vec![0.0], parity: Parity::Even, half_width: b });
    }
    let m = f.max_abs_on(-b, b, DEFAULT_GRID);
    let eps_rec = eps_dom / m.max(1.0);
    let w = window_poly(xi, b, eps_rec.min(0.5))?;
    let fb = f.rescaled(b)?;
    let h = fb.mul(&w)?.chop(1e-3 * eps_dom).enforce(f.parity);
    let ok = uniform_grid(-b, b, DEFAULT_GRID).all(|x| {
        let (hv, ax) = (h.eval(x), x.abs());
        if ax >= 1.0 {
            hv.abs() <= eps_dom
        } else {
            let fv = f.eval(x);
            let inner = ax > 1.0 - xi || (hv - fv).abs() <= eps_dom;
            inner && hv.abs() <= fv.abs() + eps_dom
        }
    });
    if !ok {
        return Err(Error::Cert(format!("extension (xi = {xi}, b = {b}, eps = {eps_dom})")));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_values() {
        let t = Target::Fractional { tau: 0.999 };
        assert!((t.eval(0.5f64.asin()).sin() - 0.4995465).abs() < 1e-6);
        assert_eq!(Target::Overlap.eval(0.0), 0.0);
        let k: f64 = 5.0;
        let x = (1.0f64 / k).sin();
        assert!((Target::Inverse { kappa: k }.eval(x.asin()).sin() - 0.841471).abs() < 1e-6);
        assert!((Target::Cube.eval(0.5).sin() - 0.124675).abs() < 1e-6);
    }

    #[test]
    fn identity_pair_collapses() {
        let pair = dominated_pair(&ChebPoly::identity(1.0), 0.3, 1e-4).unwrap();
        assert!(pair.certified);
        assert!((pair.p.eval(0.5) - 0.5).abs() <= 1e-4);
        for x in [0.0, 0.3, -0.7, 0.9] {
            assert!((pair.q.eval(x) - 1.0).abs() <= 1e-4);
        }
    }

    #[test]
    fn cube_pair_via_composition() {
        let f = cheb_fit_on(&|s: f64| s * s * s, 3, std::f64::consts::FRAC_PI_2).unwrap();
        let pair = dominated_pair(&f, 0.4, 1e-4).unwrap();
        let r = pair.verify(20_000);
        assert!(r.certified, "{:?}", r.violations);
        assert!(pair.verify(80_000).certified);
    }

    #[test]
    fn windowed_pairs_certify() {
        for pair in [
            pair_fractional(0.5, 0.2, 1e-4).unwrap(),
            pair_overlap(0.2, 1e-4).unwrap(),
            pair_inverse(5.0, 0.2, 1e-4).unwrap(),
            pair_cube(0.2, 1e-4).unwrap(),
            pair_green(0.5, 0.2, 1e-4).unwrap(),
        ] {
            let r = pair.verify(80_000);
            assert!(r.certified, "{} {:?}", pair.target.name(), r.violations);
        }
        assert!(matches!(pair_inverse(1.0, 0.2, 1e-4), Err(Error::Domain(_))));
        assert!(matches!(pair_fractional(1.0, 0.2, 1e-4), Err(Error::Domain(_))));
    }

    #[test]
    fn green_even_examples() {
        let h = green_even(0.5, 0.2, 1e-4).unwrap();
        assert!((h.eval(0.0) - 1.0).abs() <= 1e-4);
        assert_eq!(h.parity, Parity::Even);
    }

    #[test]
    fn window_examples() {
        let w = window_poly(0.3, 3.0, 1e-3).unwrap();
        assert!(w.eval(0.0) >= 1.0 - 1e-3);
        assert!(w.eval(3.0) <= 1e-3 && w.eval(-3.0) <= 1e-3);
        assert_eq!(w.parity, Parity::Even);
        let outside = |w: &ChebPoly| uniform_grid(1.0, 3.0, 2000).map(|x| w.eval(x).abs()).fold(0.0, f64::max);
        let a = window_poly(0.3, 3.0, 1e-2).unwrap();
        let b = window_poly(0.3, 3.0, 1e-4).unwrap();
        assert!(outside(&b) < outside(&a));
    }

    #[test]
    fn extension_examples() {
        let z = dominated_extension(&ChebPoly::zero(), 0.3, 3.0, 1e-3).unwrap();
        assert_eq!(z.eval(0.4), 0.0);
        let h = dominated_extension(&ChebPoly::constant(1.0), 0.3, 3.0, 1e-3).unwrap();
        assert!((h.eval(0.0) - 1.0).abs() <= 1e-3);
        assert!(h.eval(2.0).abs() <= 1e-3);
        let f = ChebPoly::new(vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.25, 0.2], 1.0);
        let h = dominated_extension(&f, 0.3, 3.0, 1e-3).unwrap();
        assert!((h.eval(0.5) - f.eval(0.5)).abs() <= 1e-3);
    }

    #[test]
    fn document_round_trip() {
        let pair = pair_fractional(0.5, 0.3, 1e-3).unwrap();
        let back = DominatedPair::from_json(&pair.to_json()).unwrap();
        assert_eq!(back.p.coeffs, pair.p.coeffs);
        assert_eq!(back.target, pair.target);
        assert_eq!(back.region, pair.region);
        assert!(DominatedPair::from_json("{\"target\":{\"kind\":\"cube\"}}").is_err());
    }
}
