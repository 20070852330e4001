//! Dense complex linear algebra: the exact matrix functions used both as
//! building blocks and as brute-force oracles.
//!
//! Every exponential goes through a Hermitian eigendecomposition. The
//! ancilla is always the most significant tensor factor, so a 2n×2n matrix
//! reads as a 2×2 grid of n×n blocks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Builds a matrix from row-major entries.
pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Result<CMat> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if entries.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    Ok(CMat::from_row_slice(rows, cols, entries))
}

pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<CMat> {
    let v: Vec<C64> = entries.iter().map(|&x| re(x)).collect();
    from_rows(rows, cols, &v)
}

/// JSON form of a complex matrix: row-major real part and optional
/// imaginary part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        let im = m.iter().any(|z| z.im != 0.0).then(|| rows(|z| z.im));
        MatrixDoc { re: rows(|z| z.re), im }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let r = self.re.len();
        let c = self.re.first().map_or(0, |row| row.len());
        if self.re.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        let mut entries: Vec<C64> = self.re.iter().flatten().map(|&x| re(x)).collect();
        if let Some(im) = &self.im {
            if im.len() != r || im.iter().any(|row| row.len() != c) {
                return Err(Error::Parse("imaginary part shape differs from real part".into()));
            }
            for (z, &y) in entries.iter_mut().zip(im.iter().flatten()) {
                z.im = y;
            }
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        from_rows(r, c, &entries)
    }
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn diag_real(d: &[f64]) -> CMat {
    let mut m = zeros(d.len());
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = re(x);
    }
    m
}

pub fn diag(d: &[C64]) -> CMat {
    let mut m = zeros(d.len());
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = x;
    }
    m
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)])
}

pub fn pauli_z() -> CMat {
    diag_real(&[1.0, -1.0])
}

pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[re(s), re(s), re(s), re(-s)])
}

/// Phase gate diag(1, i).
pub fn phase_s() -> CMat {
    diag(&[re(1.0), c(0.0, 1.0)])
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Block-diagonal matrix with `a` in the top-left and `b` in the bottom-right.
pub fn blkdiag(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = CMat::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

/// Copy of the `nr`×`nc` block starting at (`r0`, `c0`).
pub fn block(m: &CMat, r0: usize, c0: usize, nr: usize, nc: usize) -> CMat {
    m.view((r0, c0), (nr, nc)).into_owned()
}

/// Largest entrywise |M − M†|.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(m: &CMat) -> bool {
    hermitian_deviation(m) <= HERMITIAN_TOL
}

pub fn check_hermitian(m: &CMat) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev <= HERMITIAN_TOL {
        Ok(())
    } else {
        Err(Error::Hermiticity(dev))
    }
}

/// (M + M†)/2. Only call this when the caller explicitly asks for it.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let d = m.adjoint() * m - eye(m.nrows());
    opnorm(&d)
}

pub fn check_unitary(m: &CMat) -> Result<()> {
    let d = unitarity_defect(m);
    if d <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::Unitarity(d))
    }
}

pub fn spectral_norm(m: &CMat) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    Ok(opnorm(m))
}

/// Spectral norm of a nonempty matrix.
pub fn opnorm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eig_hermitian(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    if h.nrows() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    check_hermitian(h)?;
    Ok(eigh_unchecked(h))
}

fn eigh_unchecked(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let eig = nalgebra::SymmetricEigen::new(symmetrize(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut q = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        q.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, q)
}

/// A = U diag(Σ) V† with Σ descending. U and V are square.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if m != n {
        // Pad to square; the extra singular values are zero.
        let k = m.max(n);
        let mut p = CMat::zeros(k, k);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        return svd(&p);
    }
    let s = nalgebra::SVD::new(a.clone(), true, true);
    let u = s.u.expect("left singular vectors requested");
    let vt = s.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| s.singular_values[y].total_cmp(&s.singular_values[x]));
    let sig = order.iter().map(|&i| s.singular_values[i]).collect();
    let mut uo = CMat::zeros(n, n);
    let mut vo = CMat::zeros(n, n);
    let v = vt.adjoint();
    for (k, &i) in order.iter().enumerate() {
        uo.set_column(k, &u.column(i));
        vo.set_column(k, &v.column(i));
    }
    Ok((uo, sig, vo))
}

/// Cached eigendecomposition of a Hermitian generator, for evaluating
/// e^{−itH} at many times.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub vals: Vec<f64>,
    pub vecs: CMat,
}

impl Spectral {
    pub fn new(h: &CMat) -> Result<Self> {
        let (vals, vecs) = eig_hermitian(h)?;
        Ok(Spectral { vals, vecs })
    }

    pub fn dim(&self) -> usize {
        self.vals.len()
    }

    /// e^{−itH}.
    pub fn exp(&self, t: f64) -> CMat {
        self.apply_fn(|l| C64::from_polar(1.0, -t * l))
    }

    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMat {
        let mut scaled = self.vecs.clone();
        for (j, &l) in self.vals.iter().enumerate() {
            let z = f(l);
            scaled.column_mut(j).scale_mut(1.0);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= z;
            }
        }
        scaled * self.vecs.adjoint()
    }
}

/// e^{−itH} for Hermitian H.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    Ok(Spectral::new(h)?.exp(t))
}

/// [[0, A†], [A, 0]].
pub fn dilate(a: &CMat) -> Result<CMat> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "dilation needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let mut d = CMat::zeros(2 * n, 2 * n);
    d.view_mut((0, n), (n, n)).copy_from(&a.adjoint());
    d.view_mut((n, 0), (n, n)).copy_from(a);
    Ok(d)
}

fn check_same_square(j: &CMat, k: &CMat) -> Result<()> {
    if !j.is_square() || j.shape() != k.shape() {
        return Err(Error::Dimension(format!(
            "{:?} vs {:?}",
            j.shape(),
            k.shape()
        )));
    }
    Ok(())
}

pub fn commutator(j: &CMat, k: &CMat) -> Result<CMat> {
    check_same_square(j, k)?;
    Ok(j * k - k * j)
}

pub fn anticommutator(j: &CMat, k: &CMat) -> Result<CMat> {
    check_same_square(j, k)?;
    Ok(j * k + k * j)
}

/// Commutator of equal-shape matrices; panics on mismatch.
pub fn comm(j: &CMat, k: &CMat) -> CMat {
    j * k - k * j
}

/// M^r by repeated squaring.
pub fn matpow(m: &CMat, mut r: u64) -> CMat {
    let mut result = eye(m.nrows());
    let mut base = m.clone();
    while r > 0 {
        if r & 1 == 1 {
            result = &result * &base;
        }
        r >>= 1;
        if r > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Eigendecomposition of a unitary (more generally normal) matrix through
/// the complex Schur form. Returns eigenvalues and the unitary Q.
pub fn eig_unitary(w: &CMat) -> (Vec<C64>, CMat) {
    let schur = nalgebra::Schur::new(w.clone());
    let (q, t) = schur.unpack();
    let vals = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    (vals, q)
}

/// Principal generator G with W = e^{−iG}, phases in (−π, π].
pub fn generator_of_unitary(w: &CMat) -> CMat {
    let (vals, q) = eig_unitary(w);
    let n = vals.len();
    let mut g = CMat::zeros(n, n);
    for (i, z) in vals.iter().enumerate() {
        g[(i, i)] = re(-z.arg());
    }
    &q * g * q.adjoint()
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random matrices for tests, sweeps and demos.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
        CMat::from_fn(n, n, |_, _| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            c(a, b) / 2f64.sqrt()
        })
    }

    /// Random complex matrix rescaled to the given spectral norm.
    pub fn with_norm<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> CMat {
        let g = ginibre(rng, n);
        let s = opnorm(&g);
        g.scale(norm / s)
    }

    /// Random Hermitian matrix rescaled to the given spectral norm.
    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> CMat {
        let g = ginibre(rng, n);
        let h = symmetrize(&g);
        let s = opnorm(&h);
        h.scale(norm / s)
    }

    /// Random real symmetric matrix rescaled to the given spectral norm.
    pub fn real_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> CMat {
        let g = CMat::from_fn(n, n, |_, _| re(rng.sample::<f64, _>(StandardNormal)));
        let h = symmetrize(&g);
        let s = opnorm(&h);
        h.scale(norm / s)
    }

    /// Haar-like random unitary from the QR factorization of a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
        let g = ginibre(rng, n);
        let qr = g.qr();
        let (q, r) = qr.unpack();
        let mut ph = CMat::zeros(n, n);
        for i in 0..n {
            let d = r[(i, i)];
            ph[(i, i)] = if d.norm() > 0.0 { d / d.norm() } else { re(1.0) };
        }
        q * ph
    }

    pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
        let v = CVec::from_fn(n, |_, _| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            c(a, b)
        });
        let nv = v.norm();
        v / re(nv)
    }
}
