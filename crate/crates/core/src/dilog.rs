//! The dilogarithm `Li₂` and the Bloch–Wigner function `D` on the complex plane.
//!
//! `Li₂` is evaluated on the principal branch (cut `[1, ∞)`, continuous from
//! above on the cut) by mapping every argument into a region where a rapidly
//! converging series applies:
//!
//! - `|z| ≤ 1/2`: the defining series `Σ zᵏ/k²`;
//! - `|1 − z| ≤ 1/2`: reflection `Li₂(z) = π²/6 − ln z·ln(1−z) − Li₂(1−z)`;
//! - `|z| > 2`: inversion `Li₂(z) = −π²/6 − ½ln²(−z) − Li₂(1/z)`;
//! - otherwise: the Bernoulli series in `u = −ln(1−z)`, after inversion when `|z| > 1`.
//!
//! Every series argument stays inside radius 1/2 (or `|u| < 2.2` for the
//! Bernoulli series, whose radius of convergence is `2π`).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const ZETA2: f64 = PI * PI / 6.0;

/// Terms below this magnitude end a series.
const TERM_CUTOFF: f64 = 1e-17;

/// `B₂, B₄, …, B₄₀`.
const BERNOULLI_EVEN: [f64; 20] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
    -26315271553053477373.0 / 1919190.0,
    2929993913841559.0 / 6.0,
    -261082718496449122051.0 / 13530.0,
];

pub(crate) fn ensure_finite(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {z}")))
    }
}

/// Principal-branch dilogarithm.
pub fn li2(z: Complex64) -> Result<Complex64> {
    ensure_finite(z, "li2 argument")?;
    Ok(li2_unchecked(z))
}

pub(crate) fn li2_unchecked(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    let r = z.norm();
    if r <= 0.5 {
        return li2_series(z);
    }
    let one = Complex64::new(1.0, 0.0);
    let w = one - z;
    if w.norm() <= 0.5 {
        if w == Complex64::new(0.0, 0.0) {
            return Complex64::new(ZETA2, 0.0);
        }
        return ZETA2 - z.ln() * w.ln() - li2_series(w);
    }
    if r > 2.0 {
        return inversion(z, li2_series(z.inv()));
    }
    if r > 1.0 {
        inversion(z, li2_bernoulli(z.inv()))
    } else {
        li2_bernoulli(z)
    }
}

/// `Li₂(z)` from `Li₂(1/z)`.
fn inversion(z: Complex64, li2_of_inverse: Complex64) -> Complex64 {
    let l = (-z).ln();
    -ZETA2 - 0.5 * l * l - li2_of_inverse
}

/// The defining power series. Only meaningful for `|z| < 1`; used for `|z| ≤ 1/2`.
pub fn li2_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = z;
    let mut k = 1.0_f64;
    loop {
        let term = power / (k * k);
        sum += term;
        if term.norm() < TERM_CUTOFF || k > 10_000.0 {
            break;
        }
        power *= z;
        k += 1.0;
    }
    sum
}

/// Bernoulli expansion `Li₂(z) = Σ Bₙ uⁿ⁺¹/(n+1)!`, `u = −ln(1−z)`.
fn li2_bernoulli(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut sum = u - 0.25 * u2;
    // u^{2k+1}/(2k+1)!
    let mut power = u;
    let mut factorial = 1.0_f64;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2 * k + 3;
        power *= u2;
        factorial *= ((n - 1) * n) as f64;
        let term = power * (b / factorial);
        sum += term;
        if term.norm() < TERM_CUTOFF {
            break;
        }
    }
    sum
}

/// Bloch–Wigner dilogarithm `D(z) = Im Li₂(z) + arg(1−z)·ln|z|`.
///
/// `D` vanishes identically on the real line (including the continuous
/// extension at 0 and 1), which is returned exactly.
pub fn bloch_wigner(z: Complex64) -> Result<f64> {
    ensure_finite(z, "Bloch-Wigner argument")?;
    Ok(bloch_wigner_unchecked(z))
}

pub(crate) fn bloch_wigner_unchecked(z: Complex64) -> f64 {
    if z.im == 0.0 {
        return 0.0;
    }
    let one_minus = Complex64::new(1.0 - z.re, -z.im);
    li2_unchecked(z).im + one_minus.arg() * z.norm().ln()
}

/// `|D(x) − D(y) + D(y/x) + D((1−x)/(1−y)) − D((1−x⁻¹)/(1−y⁻¹))|`.
pub fn five_term_residual_d(x: Complex64, y: Complex64) -> Result<f64> {
    ensure_finite(x, "x")?;
    ensure_finite(y, "y")?;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if x == zero || x == one || y == zero || y == one {
        return Err(Error::invalid("five-term arguments must avoid 0 and 1"));
    }
    if x == y {
        return Err(Error::invalid("five-term arguments must differ"));
    }
    let d = bloch_wigner_unchecked;
    let value = d(x) - d(y) + d(y / x) + d((one - x) / (one - y))
        - d((one - x.inv()) / (one - y.inv()));
    Ok(value.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn li2_at_zero_and_one() {
        assert_eq!(li2(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let v = li2(c(1.0, 0.0)).unwrap();
        assert!((v.re - ZETA2).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn li2_on_unit_circle_matches_closed_form() {
        // Re Li₂(e^{iθ}) = π²/6 − θ(2π − θ)/4 for θ ∈ [0, 2π].
        for k in 1..64 {
            let theta = 2.0 * PI * k as f64 / 64.0;
            let v = li2(Complex64::from_polar(1.0, theta)).unwrap();
            let expected = ZETA2 - theta * (2.0 * PI - theta) / 4.0;
            assert!((v.re - expected).abs() < 1e-13, "theta={theta}: {} vs {expected}", v.re);
        }
    }

    #[test]
    fn regions_agree_near_their_borders() {
        // Bernoulli route against the defining series just inside |z| = 1/2.
        for k in 0..32 {
            let z = Complex64::from_polar(0.49, 0.3 + k as f64 * 0.19);
            let a = li2_series(z);
            let b = li2_bernoulli(z);
            assert!((a - b).norm() < 1e-14, "{z}: {a} vs {b}");
        }
        // Bernoulli after inversion against plain inversion just outside |z| = 2.
        for k in 0..32 {
            let z = Complex64::from_polar(2.01, 0.3 + k as f64 * 0.19);
            let a = inversion(z, li2_series(z.inv()));
            let b = inversion(z, li2_bernoulli(z.inv()));
            assert!((a - b).norm() < 1e-13, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(matches!(li2(c(f64::NAN, 0.0)), Err(Error::InvalidArgument(_))));
        assert!(bloch_wigner(c(0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn bloch_wigner_special_values() {
        assert_eq!(bloch_wigner(c(0.5, 0.0)).unwrap(), 0.0);
        assert_eq!(bloch_wigner(c(0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(bloch_wigner(c(1.0, 0.0)).unwrap(), 0.0);
        let z = c(2.0, 3.0);
        let sum = bloch_wigner(z).unwrap() + bloch_wigner(z.inv()).unwrap();
        assert!(sum.abs() < 1e-14);
    }

    #[test]
    fn five_term_forbidden_values() {
        assert!(five_term_residual_d(c(0.0, 0.0), c(2.0, 1.0)).is_err());
        assert!(five_term_residual_d(c(2.0, 1.0), c(1.0, 0.0)).is_err());
        assert!(five_term_residual_d(c(2.0, 1.0), c(2.0, 1.0)).is_err());
        assert!(five_term_residual_d(c(0.3, 0.0), c(0.7, 0.0)).unwrap() < 1e-12);
        assert!(five_term_residual_d(c(2.0, 1.0), c(3.0, -1.0)).unwrap() < 1e-10);
    }
}
