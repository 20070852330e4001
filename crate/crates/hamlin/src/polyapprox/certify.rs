//! Grid certification of dominated pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cheb::ChebPoly;

pub const DEFAULT_GRID: usize = 20_000;

/// Worst-case values of the three pair conditions on a uniform grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Violations {
    /// max |p − sin F(arcsin x)| over the region.
    pub p_error: f64,
    pub p_argmax: f64,
    /// max |q − cos F(arcsin x)/√(1−x²)| over the region.
    pub q_error: f64,
    pub q_argmax: f64,
    /// max (p² + (1−x²)q² − 1) over [−1, 1], clamped at 0.
    pub dominance: f64,
    pub dominance_argmax: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub grid_points: usize,
    pub eps: f64,
    pub violations: Violations,
    /// Markov-inequality allowance for values between grid points:
    /// (h/2)·d²·max|p| for the larger of the two degrees.
    pub markov_slack: f64,
    pub certified: bool,
}

#[derive(Clone, Copy, Default)]
struct Acc {
    pe: f64,
    px: f64,
    qe: f64,
    qx: f64,
    de: f64,
    dx: f64,
    pmax: f64,
}

impl Acc {
    fn merge(self, o: Acc) -> Acc {
        let mut r = self;
        if o.pe > r.pe {
            r.pe = o.pe;
            r.px = o.px;
        }
        if o.qe > r.qe {
            r.qe = o.qe;
            r.qx = o.qx;
        }
        if o.de > r.de {
            r.de = o.de;
            r.dx = o.dx;
        }
        r.pmax = r.pmax.max(o.pmax);
        r
    }
}

/// Checks p, q against the targets sin F(arcsin x) and cos F(arcsin x)/√(1−x²)
/// for lo ≤ |x| ≤ hi, and domination on all of [−1, 1].
pub fn certify_grid(
    p: &ChebPoly,
    q: &ChebPoly,
    big_f: &(dyn Fn(f64) -> f64 + Sync),
    lo: f64,
    hi: f64,
    eps: f64,
    grid_points: usize,
) -> CertReport {
    let n = grid_points.max(2);
    let acc = (0..n)
        .into_par_iter()
        .fold(Acc::default, |mut a, i| {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let pv = p.eval(x);
            let qv = q.eval(x);
            let w = 1.0 - x * x;
            let dom = pv * pv + w * qv * qv - 1.0;
            if dom > a.de {
                a.de = dom;
                a.dx = x;
            }
            a.pmax = a.pmax.max(pv.abs()).max(qv.abs());
            let ax = x.abs();
            if ax >= lo && ax <= hi {
                let f = big_f(x.asin());
                let pe = (pv - f.sin()).abs();
                let qe = (qv - f.cos() / w.sqrt()).abs();
                if pe > a.pe || pe.is_nan() {
                    a.pe = if pe.is_nan() { f64::INFINITY } else { pe };
                    a.px = x;
                }
                if qe > a.qe || qe.is_nan() {
                    a.qe = if qe.is_nan() { f64::INFINITY } else { qe };
                    a.qx = x;
                }
            }
            a
        })
        .reduce(Acc::default, Acc::merge);
    let d = p.degree().max(q.degree()) as f64;
    let h = 2.0 / (n - 1) as f64;
    let violations = Violations {
        p_error: acc.pe,
        p_argmax: acc.px,
        q_error: acc.qe,
        q_argmax: acc.qx,
        dominance: acc.de,
        dominance_argmax: acc.dx,
    };
    CertReport {
        grid_points: n,
        eps,
        violations,
        markov_slack: 0.5 * h * d * d * acc.pmax,
        certified: acc.pe <= eps && acc.qe <= eps && acc.de <= eps,
    }
}
