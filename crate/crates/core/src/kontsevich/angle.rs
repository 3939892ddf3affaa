//! The harmonic angle on the upper half-plane and its gradient.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

/// `φ(p, q) = arg(q − p) − arg(q − p̄)` reduced to `[0, 2π)`.
///
/// This is the argument of `(q−p)(q̄−p)/((q−p̄)(q̄−p̄))` halved, resolved on
/// the branch that makes φ continuous in p away from q. Returns `None` for
/// coincident points or `p` off the open upper half-plane.
pub fn angle(p: Complex64, q: Complex64) -> Option<f64> {
    if p.im <= 0.0 || p == q || q.im < 0.0 {
        return None;
    }
    let a = (q - p).arg() - (q - p.conj()).arg();
    Some(a.rem_euclid(TAU))
}

/// The closed-form expression `(1/2i) Log(((q−p)(q̄−p))/((q−p̄)(q̄−p̄)))`
/// on the principal branch; agrees with [`angle`] modulo π.
pub fn angle_log_formula(p: Complex64, q: Complex64) -> Complex64 {
    let num = (q - p) * (q.conj() - p);
    let den = (q - p.conj()) * (q.conj() - p.conj());
    (num / den).ln() / Complex64::new(0.0, 2.0)
}

/// Gradient of `arg(w)` with respect to `w = (a, b)`.
fn darg(w: Complex64) -> (f64, f64) {
    let r2 = w.norm_sqr();
    (-w.im / r2, w.re / r2)
}

/// Partial derivatives of `φ(p, q)`: `(∂/∂p.re, ∂/∂p.im, ∂/∂q.re, ∂/∂q.im)`.
pub fn angle_gradient(p: Complex64, q: Complex64) -> [f64; 4] {
    let (a1, b1) = darg(q - p);
    let (a2, b2) = darg(q - p.conj());
    // d(q − p) = dq − dp ; d(q − p̄) = dq − (dx − i dy)
    [-a1 + a2, -b1 - b2, a1 - a2, b1 - b2]
}

/// `π` re-exported for chart code.
pub(crate) const PI_F: f64 = PI;
