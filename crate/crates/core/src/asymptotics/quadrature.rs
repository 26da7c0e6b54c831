//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Absolute tolerance used throughout the module.
pub const DEFAULT_TOLERANCE: f64 = 1e-11;

const MAX_INTERVALS: usize = 4000;

struct Piece {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn rule<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    for (j, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in nodes {
            f(c + sign * h * x, buf);
            for d in 0..dim {
                kron[d] += wk * buf[d];
                if j % 2 == 1 {
                    gauss[d] += WG[j / 2] * buf[d];
                }
            }
        }
    }
    let mut error = 0.0f64;
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
        let diff = (kron[d] - gauss[d]).abs();
        // f64::max would silently drop a NaN.
        error = if diff.is_finite() { error.max(diff) } else { f64::INFINITY };
    }
    Piece {
        a,
        b,
        value: kron,
        error,
    }
}

/// Integrates a vector-valued function over `[a, b]`; `f(t, out)` writes
/// `dim` components. The error bound applies to every component.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(mut f: F, a: f64, b: f64, dim: usize, tol: f64) -> Result<Vec<f64>> {
    if b <= a {
        return Ok(vec![0.0; dim]);
    }
    let mut buf = vec![0.0; dim];
    let mut pieces = vec![rule(&mut f, a, b, dim, &mut buf)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: total,
            });
        }
        if total <= tol {
            break;
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: total,
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| if p.error > be { (i, p.error) } else { (bi, be) });
        let piece = pieces.swap_remove(worst);
        let mid = 0.5 * (piece.a + piece.b);
        if mid <= piece.a || mid >= piece.b {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: total,
            });
        }
        pieces.push(rule(&mut f, piece.a, mid, dim, &mut buf));
        pieces.push(rule(&mut f, mid, piece.b, dim, &mut buf));
    }
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut out = vec![0.0; dim];
    for p in &pieces {
        for d in 0..dim {
            out[d] += p.value[d];
        }
    }
    Ok(out)
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    Ok(integrate_vec(|t, out| out[0] = f(t), a, b, 1, tol)?[0])
}
