//! Hamiltonian block encodings and their exact elementary operations.
//!
//! A block encoding stores the unitary W together with the payload A it
//! encodes (when known). Operations update W by conjugation or powering and
//! update the payload symbolically, so the payload stays the exact target even
//! after W has picked up approximation error.

use serde::{Deserialize, Serialize};

use crate::corela::{
    self, blkdiag, block, c, dagger, eye, generator_of_unitary, hadamard, kron, opnorm, pauli_x,
    re, CMat, C64,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    /// W ≈ exp(−i [[0, A†], [A, 0]]), one ancilla.
    StandardOffDiag,
    /// Two ancillas; the a1 = 0 half is a StandardOffDiag encoding.
    Controlled4Block,
    /// W ≈ diag(e^{−iH}, e^{iH}) for Hermitian H.
    DiagonalZ,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::StandardOffDiag => "StandardOffDiag",
            Form::Controlled4Block => "Controlled4Block",
            Form::DiagonalZ => "DiagonalZ",
        }
    }

    fn ancilla_dim(self) -> usize {
        match self {
            Form::Controlled4Block => 4,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    w: CMat,
    payload: Option<CMat>,
    norm_bound: f64,
    form: Form,
}

impl BlockEncoding {
    /// Wraps an existing unitary. Fails if W is not unitary or the payload
    /// shape does not match the form.
    pub fn from_parts(w: CMat, payload: Option<CMat>, norm_bound: f64, form: Form) -> Result<Self> {
        corela::check_unitary(&w)?;
        let k = form.ancilla_dim();
        if w.nrows() % k != 0 || w.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "W has dimension {} which is not a multiple of {k}",
                w.nrows()
            )));
        }
        if let Some(a) = &payload {
            if a.shape() != (w.nrows() / k, w.nrows() / k) {
                return Err(Error::Dimension(format!(
                    "payload {:?} does not fit W of dimension {}",
                    a.shape(),
                    w.nrows()
                )));
            }
        }
        Ok(BlockEncoding { w, payload, norm_bound, form })
    }

    pub(crate) fn new_unchecked(w: CMat, payload: Option<CMat>, norm_bound: f64, form: Form) -> Self {
        BlockEncoding { w, payload, norm_bound, form }
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    pub fn into_w(self) -> CMat {
        self.w
    }

    pub fn payload(&self) -> Option<&CMat> {
        self.payload.as_ref()
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn form(&self) -> Form {
        self.form
    }

    /// Dimension n of the encoded operator.
    pub fn n(&self) -> usize {
        self.w.nrows() / self.form.ancilla_dim()
    }

    pub fn with_norm_bound(mut self, nb: f64) -> Self {
        self.norm_bound = nb;
        self
    }

    fn require(&self, form: Form) -> Result<()> {
        if self.form == form {
            Ok(())
        } else {
            Err(Error::Form { expected: form.name(), got: self.form.name() })
        }
    }

    /// The a1 = 0 half of a Controlled4Block encoding, as a standard encoding.
    pub fn top_block(&self) -> Result<BlockEncoding> {
        self.require(Form::Controlled4Block)?;
        let m = 2 * self.n();
        let w = block(&self.w, 0, 0, m, m);
        Ok(BlockEncoding {
            w,
            payload: self.payload.clone(),
            norm_bound: self.norm_bound,
            form: Form::StandardOffDiag,
        })
    }

    /// Distance of W (or its top block) from the exact encoding of the payload.
    pub fn payload_error(&self) -> Option<f64> {
        let a = self.payload.as_ref()?;
        let exact = encode(a).ok()?;
        let w = match self.form {
            Form::StandardOffDiag => self.w.clone(),
            Form::Controlled4Block => block(&self.w, 0, 0, 2 * self.n(), 2 * self.n()),
            Form::DiagonalZ => {
                let h = kron(&hadamard(), &eye(self.n()));
                &h * &self.w * &h
            }
        };
        Some(opnorm(&(w - exact.w)))
    }
}

/// Standard-form encoding W = exp(−i dilate(A)).
pub fn encode(a: &CMat) -> Result<BlockEncoding> {
    let g = corela::dilate(a)?;
    let w = corela::expm_hermitian(&g, 1.0)?;
    Ok(BlockEncoding {
        w,
        payload: Some(a.clone()),
        norm_bound: opnorm(a),
        form: Form::StandardOffDiag,
    })
}

/// Recovers the encoded operator from W through the principal logarithm.
pub fn decode(e: &BlockEncoding) -> Result<CMat> {
    if !(e.norm_bound < std::f64::consts::PI) {
        return Err(Error::Branch(e.norm_bound));
    }
    let n = e.n();
    let w = match e.form {
        Form::StandardOffDiag => e.w.clone(),
        Form::Controlled4Block => block(&e.w, 0, 0, 2 * n, 2 * n),
        Form::DiagonalZ => {
            let h = kron(&hadamard(), &eye(n));
            &h * &e.w * &h
        }
    };
    let g = generator_of_unitary(&w);
    Ok(block(&g, n, 0, n, n))
}

fn x_on_ancilla(n: usize) -> CMat {
    kron(&pauli_x(), &eye(n))
}

/// Encoding of A† with one query: (X⊗I) W (X⊗I).
pub fn conjugate(e: &BlockEncoding) -> Result<BlockEncoding> {
    e.require(Form::StandardOffDiag)?;
    let x = x_on_ancilla(e.n());
    Ok(BlockEncoding {
        w: &x * &e.w * &x,
        payload: e.payload.as_ref().map(dagger),
        norm_bound: e.norm_bound,
        form: e.form,
    })
}

fn phase_diag(theta: f64, n: usize) -> CMat {
    let d = corela::diag(&[C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0)]);
    kron(&d, &eye(n))
}

/// Encoding of e^{iθ}A.
pub fn phase_scale(e: &BlockEncoding, theta: f64) -> Result<BlockEncoding> {
    e.require(Form::StandardOffDiag)?;
    let d = phase_diag(theta, e.n());
    let w = &d * &e.w * d.adjoint();
    Ok(BlockEncoding {
        w,
        payload: e.payload.as_ref().map(|a| a * C64::from_polar(1.0, theta)),
        norm_bound: e.norm_bound,
        form: e.form,
    })
}

/// Encoding of nA from n queries.
pub fn integer_scale(e: &BlockEncoding, n: u32) -> Result<BlockEncoding> {
    e.require(Form::StandardOffDiag)?;
    Ok(BlockEncoding {
        w: corela::matpow(&e.w, n as u64),
        payload: e.payload.as_ref().map(|a| a * re(n as f64)),
        norm_bound: e.norm_bound * n as f64,
        form: e.form,
    })
}

/// Encoding of UAV: blkdiag(V†, U) W blkdiag(V, U†).
pub fn unitary_sandwich(e: &BlockEncoding, u: &CMat, v: &CMat) -> Result<BlockEncoding> {
    e.require(Form::StandardOffDiag)?;
    let n = e.n();
    if u.shape() != (n, n) || v.shape() != (n, n) {
        return Err(Error::Dimension(format!("sandwich factors must be {n}x{n}")));
    }
    corela::check_unitary(u)?;
    corela::check_unitary(v)?;
    let left = blkdiag(&v.adjoint(), u);
    let right = blkdiag(v, &u.adjoint());
    Ok(BlockEncoding {
        w: &left * &e.w * &right,
        payload: e.payload.as_ref().map(|a| u * a * v),
        norm_bound: e.norm_bound,
        form: e.form,
    })
}

/// (Had⊗I) W (Had⊗I) = diag(e^{−iH}, e^{iH}) for a Hermitian payload.
pub fn to_controlled_evolution(e: &BlockEncoding) -> Result<CMat> {
    e.require(Form::StandardOffDiag)?;
    match &e.payload {
        Some(a) => corela::check_hermitian(a)?,
        None => {
            let a = decode(e)?;
            corela::check_hermitian(&a)?;
        }
    }
    let h = kron(&hadamard(), &eye(e.n()));
    Ok(&h * &e.w * &h)
}

/// The same, returned as a DiagonalZ encoding.
pub fn to_diagonal_form(e: &BlockEncoding) -> Result<BlockEncoding> {
    let w = to_controlled_evolution(e)?;
    Ok(BlockEncoding { w, payload: e.payload.clone(), norm_bound: e.norm_bound, form: Form::DiagonalZ })
}

const BASIS_TOL: f64 = 1e-10;

/// Γ² = 0 and Γ†Γ is a projector.
pub fn basis_operator_check(g: &CMat) -> bool {
    if !g.is_square() || g.nrows() == 0 {
        return false;
    }
    let sq = g * g;
    let p = g.adjoint() * g;
    opnorm(&sq) <= BASIS_TOL && opnorm(&(&p * &p - &p)) <= BASIS_TOL
}

/// Unitary U with U†ΓU = [[0, I_r, 0], [0, 0, 0], [0, 0, 0]].
pub fn canonicalize(g: &CMat) -> Result<CMat> {
    if !basis_operator_check(g) {
        return Err(Error::NotNilpotent);
    }
    let n = g.nrows();
    let (u, s, v) = corela::svd(g)?;
    let r = s.iter().filter(|&&x| x > 0.5).count();
    let mut cols: Vec<corela::CVec> = Vec::with_capacity(n);
    let mut second: Vec<corela::CVec> = Vec::with_capacity(r);
    for k in 0..r {
        let mut uk = u.column(k).into_owned();
        let mut vk = v.column(k).into_owned();
        // Fix the joint phase so the largest entry of v_k is real positive.
        let (imax, _) = vk
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-12 { (i, z.norm()) } else { acc });
        let ph = vk[imax] / re(vk[imax].norm());
        let inv = ph.conj();
        uk *= inv;
        vk *= inv;
        cols.push(uk);
        second.push(vk);
    }
    cols.extend(second);
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = corela::CVec::zeros(n);
        e[i] = re(1.0);
        for _ in 0..2 {
            for q in &cols {
                let ov = (q.adjoint() * &e)[(0, 0)];
                e -= q * ov;
            }
        }
        let nrm = e.norm();
        if nrm > 1e-6 {
            cols.push(e / re(nrm));
        }
    }
    Ok(CMat::from_columns(&cols))
}

/// The canonical [[0, I_r, 0], [0, 0, 0], [0, 0, 0]] form of size n.
pub fn canonical_form(n: usize, r: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for k in 0..r {
        m[(k, r + k)] = c(1.0, 0.0);
    }
    m
}
