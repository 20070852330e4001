//! Chebyshev series on a symmetric interval [−L, L].

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Odd,
    Even,
    None,
}

/// Σ c_k T_k(x/L) for x ∈ [−L, L].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebPoly {
    pub coeffs: Vec<f64>,
    pub parity: Parity,
    #[serde(default = "unit")]
    pub half_width: f64,
}

fn unit() -> f64 {
    1.0
}

const PARITY_TOL: f64 = 1e-12;

impl ChebPoly {
    pub fn new(coeffs: Vec<f64>, half_width: f64) -> Self {
        let mut p = ChebPoly { coeffs, parity: Parity::None, half_width };
        p.parity = p.detect_parity(0.0);
        p
    }

    pub fn zero() -> Self {
        ChebPoly { coeffs: vec![0.0], parity: Parity::Even, half_width: 1.0 }
    }

    pub fn constant(c: f64) -> Self {
        ChebPoly { coeffs: vec![c], parity: Parity::Even, half_width: 1.0 }
    }

    /// f(x) = x on [−L, L].
    pub fn identity(half_width: f64) -> Self {
        ChebPoly { coeffs: vec![0.0, half_width], parity: Parity::Odd, half_width }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw recurrence; defined (as a polynomial) outside [−L, L] too.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x / self.half_width)
    }

    fn detect_parity(&self, tol: f64) -> Parity {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
        let even = self.coeffs.iter().step_by(2).all(|c| c.abs() <= tol * scale);
        let odd = self.coeffs.iter().skip(1).step_by(2).all(|c| c.abs() <= tol * scale);
        match (even, odd) {
            (_, true) => Parity::Even,
            (true, false) => Parity::Odd,
            _ => Parity::None,
        }
    }

    /// Zeroes the coefficients of the wrong parity.
    pub fn enforce(mut self, parity: Parity) -> Self {
        let skip = match parity {
            Parity::Odd => 0,
            Parity::Even => 1,
            Parity::None => {
                self.parity = Parity::None;
                return self;
            }
        };
        for c in self.coeffs.iter_mut().skip(skip).step_by(2) {
            *c = 0.0;
        }
        self.parity = parity;
        self
    }

    /// Drops trailing coefficients while their absolute sum stays ≤ tol.
    pub fn chop(mut self, tol: f64) -> Self {
        let mut acc = 0.0;
        while self.coeffs.len() > 1 {
            let last = self.coeffs[self.coeffs.len() - 1].abs();
            if acc + last > tol {
                break;
            }
            acc += last;
            self.coeffs.pop();
        }
        self
    }

    /// Derivative d/dx, on the same interval.
    pub fn derivative(&self) -> ChebPoly {
        let n = self.coeffs.len();
        if n <= 1 {
            return ChebPoly { coeffs: vec![0.0], parity: Parity::Even, half_width: self.half_width };
        }
        let mut d = vec![0.0; n];
        // c'_{k−1} = c'_{k+1} + 2k c_k.
        for k in (1..n).rev() {
            let next = if k + 1 < n { d[k + 1] } else { 0.0 };
            d[k - 1] = next + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] /= 2.0;
        d.pop();
        let parity = match self.parity {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
            Parity::None => Parity::None,
        };
        let s = 1.0 / self.half_width;
        ChebPoly { coeffs: d.into_iter().map(|c| c * s).collect(), parity, half_width: self.half_width }
    }

    /// Product via T_m T_n = ½(T_{m+n} + T_{|m−n|}); intervals must agree.
    pub fn mul(&self, other: &ChebPoly) -> Result<ChebPoly> {
        if (self.half_width - other.half_width).abs() > 1e-15 * self.half_width.max(1.0) {
            return Err(Error::Domain(format!(
                "product of series on [-{}, {}] and [-{}, {}]",
                self.half_width, self.half_width, other.half_width, other.half_width
            )));
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (m, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (n, &b) in other.coeffs.iter().enumerate() {
                let h = 0.5 * a * b;
                out[m + n] += h;
                out[m.abs_diff(n)] += h;
            }
        }
        let parity = match (self.parity, other.parity) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        };
        Ok(ChebPoly { coeffs: out, parity, half_width: self.half_width }.enforce(parity))
    }

    pub fn scale(&self, s: f64) -> ChebPoly {
        ChebPoly { coeffs: self.coeffs.iter().map(|c| c * s).collect(), ..self.clone() }
    }

    /// Maximum of |f| on a uniform grid of `points` over [a, b].
    pub fn max_abs_on(&self, a: f64, b: f64, points: usize) -> f64 {
        uniform_grid(a, b, points).map(|x| self.eval(x).abs()).fold(0.0, f64::max)
    }

    /// The same polynomial re-expanded on [−L', L'].
    pub fn rescaled(&self, half_width: f64) -> Result<ChebPoly> {
        let p = self.clone();
        let f = move |x: f64| p.eval(x);
        let out = cheb_fit_on(&f, self.degree(), half_width)?;
        Ok(out.enforce(self.parity))
    }
}

pub fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

pub fn uniform_grid(a: f64, b: f64, points: usize) -> impl Iterator<Item = f64> {
    let n = points.max(2);
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Chebyshev points of the first kind, x_j = cos(π(j+½)/N).
pub fn cheb_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos()).collect()
}

/// Interpolation coefficients from values at the N first-kind nodes, by a
/// DCT-II through a length-2N FFT.
pub fn coeffs_from_values(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n == 1 {
        return vec![y[0]];
    }
    let mut v: Vec<Complex64> = y.iter().chain(y.iter().rev()).map(|&t| Complex64::new(t, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(2 * n).process(&mut v);
    let mut c: Vec<f64> = (0..n)
        .map(|k| {
            let w = Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2 * n) as f64);
            0.5 * (w * v[k]).re * 2.0 / n as f64
        })
        .collect();
    c[0] /= 2.0;
    c
}

/// Degree-d interpolant of f at d+1 Chebyshev points on [−1, 1].
pub fn cheb_fit(f: &dyn Fn(f64) -> f64, d: usize) -> Result<ChebPoly> {
    cheb_fit_on(f, d, 1.0)
}

/// Degree-d interpolant on [−L, L]; parity is detected from the node values.
pub fn cheb_fit_on(f: &dyn Fn(f64) -> f64, d: usize, half_width: f64) -> Result<ChebPoly> {
    let nodes = cheb_nodes(d + 1);
    let mut y = Vec::with_capacity(d + 1);
    for &x in &nodes {
        let v = f(x * half_width);
        if !v.is_finite() {
            return Err(Error::Eval(x * half_width));
        }
        y.push(v);
    }
    let coeffs = coeffs_from_values(&y);
    // Nodes are symmetric: x_{N−1−j} = −x_j.
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let n = y.len();
    let odd_gap = (0..n).map(|j| (y[j] + y[n - 1 - j]).abs()).fold(0.0, f64::max);
    let even_gap = (0..n).map(|j| (y[j] - y[n - 1 - j]).abs()).fold(0.0, f64::max);
    let parity = if even_gap <= PARITY_TOL * scale {
        Parity::Even
    } else if odd_gap <= PARITY_TOL * scale {
        Parity::Odd
    } else {
        Parity::None
    };
    Ok(ChebPoly { coeffs, parity: Parity::None, half_width }.enforce(parity))
}

/// Fits by doubling the degree from `start` until the trailing eighth of the
/// coefficients sums to at most `tol`, or `cap` is reached. Returns the fit
/// and whether the tail criterion was met.
pub fn fit_adaptive(
    f: &dyn Fn(f64) -> f64,
    half_width: f64,
    start: usize,
    cap: usize,
    tol: f64,
) -> Result<(ChebPoly, bool)> {
    let mut d = start.max(8).min(cap);
    loop {
        let p = cheb_fit_on(f, d, half_width)?;
        let tail: f64 = p.coeffs[p.coeffs.len() - p.coeffs.len() / 8..].iter().map(|c| c.abs()).sum();
        if tail <= tol {
            return Ok((p, true));
        }
        if d >= cap {
            return Ok((p, false));
        }
        d = (2 * d).min(cap);
    }
}

/// Smallest d with 2M/(ρ−1) ρ^{−d} ≤ ε.
pub fn degree_bound(rho: f64, m: f64, eps: f64) -> Result<usize> {
    if !(rho > 1.0) {
        return Err(Error::Domain(format!("rho = {rho} must exceed 1")));
    }
    if !(eps > 0.0) || !(m >= 0.0) {
        return Err(Error::Domain(format!("M = {m}, eps = {eps}")));
    }
    if m == 0.0 {
        return Ok(0);
    }
    let x = (2.0 * m / ((rho - 1.0) * eps)).ln() / rho.ln();
    // Absorb rounding when the bound lands on an integer.
    Ok((x - 1e-9).ceil().max(0.0) as usize)
}

fn arcsin_coeff(k: usize) -> f64 {
    central_ratio(k) / (2 * k + 1) as f64
}

/// (2k)!/(4^k (k!)²), built as a running product.
fn central_ratio(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64 / (2 * j) as f64)
}

fn from_monomials(mono: &[f64], parity: Parity) -> ChebPoly {
    let d = mono.len() - 1;
    let f = |x: f64| mono.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let nodes = cheb_nodes(d + 1);
    let y: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    ChebPoly { coeffs: coeffs_from_values(&y), parity: Parity::None, half_width: 1.0 }.enforce(parity)
}

/// Truncated Maclaurin series of arcsin up to odd degree d.
pub fn maclaurin_arcsin(d: usize) -> Result<ChebPoly> {
    if d % 2 == 0 {
        return Err(Error::Parity(d));
    }
    let mut mono = vec![0.0; d + 1];
    for k in 0..=(d - 1) / 2 {
        mono[2 * k + 1] = arcsin_coeff(k);
    }
    Ok(from_monomials(&mono, Parity::Odd))
}

/// Truncated Maclaurin series of 1/√(1−x²) up to even degree d.
pub fn maclaurin_invsqrt(d: usize) -> Result<ChebPoly> {
    if d % 2 == 1 {
        return Err(Error::Parity(d));
    }
    let mut mono = vec![0.0; d + 1];
    for k in 0..=d / 2 {
        mono[2 * k] = central_ratio(k);
    }
    Ok(from_monomials(&mono, Parity::Even))
}

/// Smallest odd degree whose arcsin tail on [−s, s] is ≤ ε.
pub fn arcsin_degree(s: f64, eps: f64) -> usize {
    let tail_factor = 1.0 / (1.0 - s * s);
    let mut k = 0usize;
    // Tail after the x^{2K+1} term: a_{K+1} s^{2K+3}/(1−s²).
    while arcsin_coeff(k + 1) * s.powi(2 * k as i32 + 3) * tail_factor > eps {
        k += 1;
    }
    2 * k + 1
}

/// Smallest even degree whose 1/√(1−x²) tail on [−s, s] is ≤ ε.
pub fn invsqrt_degree(s: f64, eps: f64) -> usize {
    let tail_factor = 1.0 / (1.0 - s * s);
    let mut k = 0usize;
    while central_ratio(k + 1) * s.powi(2 * k as i32 + 2) * tail_factor > eps {
        k += 1;
    }
    2 * k
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trig {
    Sin,
    Cos,
}

/// Smallest d with α^{d+1}/(d+1)! ≤ ε.
pub fn trig_degree(alpha: f64, eps: f64) -> usize {
    let mut d = 0usize;
    let mut term = alpha; // α^{d+1}/(d+1)!
    while term > eps {
        d += 1;
        term *= alpha / (d + 1) as f64;
    }
    d
}

/// Truncated Maclaurin series of sin(αx) or cos(αx) on [−1, 1].
pub fn trig_poly(alpha: f64, kind: Trig, eps: f64) -> ChebPoly {
    let mut d = trig_degree(alpha.abs(), eps);
    // Drop a trailing zero term so the degree has the series' parity.
    match kind {
        Trig::Sin if d % 2 == 0 => d = d.saturating_sub(1).max(1),
        Trig::Cos if d % 2 == 1 => d -= 1,
        _ => {}
    }
    let mut mono = vec![0.0; d + 1];
    let mut fact = 1.0;
    let mut pw = 1.0;
    for m in 0..=d {
        if m > 0 {
            fact *= m as f64;
            pw *= alpha;
        }
        let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
        match kind {
            Trig::Sin if m % 2 == 1 => mono[m] = sign * pw / fact,
            Trig::Cos if m % 2 == 0 => mono[m] = sign * pw / fact,
            _ => {}
        }
    }
    let parity = match kind {
        Trig::Sin => Parity::Odd,
        Trig::Cos => Parity::Even,
    };
    from_monomials(&mono, parity)
}
