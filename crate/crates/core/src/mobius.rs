//! Möbius transformations of `ℂ ∪ {∞}` and the cross ratio.

use num_complex::Complex64;

use crate::efield::ProjValue;
use crate::error::{Error, Result};

/// `w ↦ (a·w + b)/(c·w + d)` with `ad − bc ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

fn homogeneous(p: ProjValue) -> (Complex64, Complex64) {
    match p {
        ProjValue::Finite(v) => (v, Complex64::new(1.0, 0.0)),
        ProjValue::Infinity => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
    }
}

fn from_homogeneous(x: Complex64, y: Complex64) -> ProjValue {
    if y == Complex64::new(0.0, 0.0) || (x / y).re.is_infinite() || (x / y).im.is_infinite() {
        ProjValue::Infinity
    } else {
        ProjValue::Finite(x / y)
    }
}

impl Mobius {
    pub fn identity() -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mobius { a: one, b: zero, c: zero, d: one }
    }

    /// The unique map with `0 ↦ at_zero`, `∞ ↦ at_infinity`, `1 ↦ at_one`.
    pub fn from_three(at_zero: ProjValue, at_infinity: ProjValue, at_one: ProjValue) -> Result<Self> {
        let (a0, a1) = homogeneous(at_zero);
        let (b0, b1) = homogeneous(at_infinity);
        let (d0, d1) = homogeneous(at_one);
        // λ·B + κ·A = D
        let det = b0 * a1 - a0 * b1;
        let scale = a0.norm().max(a1.norm()) * b0.norm().max(b1.norm());
        if det.norm() <= 1e-14 * scale {
            return Err(Error::invalid("Möbius data must be three distinct points"));
        }
        let lambda = (d0 * a1 - a0 * d1) / det;
        let kappa = (b0 * d1 - d0 * b1) / det;
        if lambda.norm() <= 1e-14 * lambda.norm().max(kappa.norm()) || kappa.norm() <= 1e-14 * lambda.norm().max(kappa.norm()) {
            return Err(Error::invalid("Möbius data must be three distinct points"));
        }
        Ok(Mobius { a: lambda * b0, b: kappa * a0, c: lambda * b1, d: kappa * a1 })
    }

    pub fn apply(&self, w: ProjValue) -> ProjValue {
        let (x, y) = homogeneous(w);
        from_homogeneous(self.a * x + self.b * y, self.c * x + self.d * y)
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }
}

/// `[a, b, c, d] = (a − c)(b − d) / ((b − c)(a − d))`, extended to `∞` by continuity.
pub fn cross_ratio(a: ProjValue, b: ProjValue, c: ProjValue, d: ProjValue) -> ProjValue {
    let (a0, a1) = homogeneous(a);
    let (b0, b1) = homogeneous(b);
    let (c0, c1) = homogeneous(c);
    let (d0, d1) = homogeneous(d);
    let det = |x0: Complex64, x1: Complex64, y0: Complex64, y1: Complex64| x0 * y1 - y0 * x1;
    from_homogeneous(det(a0, a1, c0, c1) * det(b0, b1, d0, d1), det(b0, b1, c0, c1) * det(a0, a1, d0, d1))
}
