//! Jacobi `θ₁` and the Weierstrass `℘` function of the lattice `⟨1, τ⟩`.
//!
//! `θ₁(w) = 2 Σₖ (−1)ᵏ q^{(k+½)²} sin((2k+1)πw)` with `q = e^{iπτ}`; its zeros are
//! exactly the lattice points. Arguments are first reduced to the cell
//! `|Re w| ≤ ½, |Im w| ≤ Im τ / 2` and the quasi-periodicity factor
//! `θ₁(w + m + nτ) = (−1)^{m+n} e^{−iπτn² − 2πinw} θ₁(w)` is carried in log form,
//! so products of many theta values never overflow.
//!
//! `℘(z) = −(log θ₁)''(z) + θ₁'''(0) / (3θ₁'(0))`, which has Laurent expansion
//! `z⁻² + O(z²)` with no constant term.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::efield::Divisor;
use crate::error::{Error, Result};
use crate::torus::{Lattice, TorusPoint};

/// Relative size of the first omitted theta term.
const THETA_TRUNCATION: f64 = 1e-18;

/// `℘` refuses to evaluate closer than this to a lattice point.
pub const POLE_GUARD: f64 = 1e-6;

/// Highest derivative order supported by [`ThetaContext::log_jet`].
pub const MAX_JET_ORDER: usize = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Precomputed theta-series data for one lattice.
#[derive(Debug, Clone)]
pub struct ThetaContext {
    tau: Complex64,
    /// `(−1)ᵏ e^{iπτ(k+½)²}` for `k = 0..N`.
    coeffs: Vec<Complex64>,
    wp_shift: Complex64,
}

/// `log θ₁` and its derivatives at one point.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    /// `log θ₁(z)`, branch unspecified (only `exp` of sums is meaningful).
    /// Real part is `-∞` when `z` is exactly a lattice point.
    pub log: Complex64,
    /// `derivs[j - 1] = (log θ₁)^{(j)}(z)`.
    pub derivs: Vec<Complex64>,
}

impl ThetaContext {
    pub fn new(tau: Complex64) -> Self {
        let abs_q = (-PI * tau.im).exp();
        // On the reduced cell the k-th term is bounded by |q|^{(k+½)² − (k+½)}.
        let mut n = 1usize;
        loop {
            let p = n as f64 + 0.5;
            if abs_q.powf(p * p - p) < THETA_TRUNCATION {
                break;
            }
            n += 1;
        }
        let coeffs: Vec<Complex64> = (0..n)
            .map(|k| {
                let p = k as f64 + 0.5;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * (I * PI * tau * (p * p)).exp()
            })
            .collect();
        let (mut s1, mut s3) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (k, c) in coeffs.iter().enumerate() {
            let p = (2 * k + 1) as f64;
            s1 += c * p;
            s3 += c * (p * p * p);
        }
        let wp_shift = -PI * PI * s3 / (3.0 * s1);
        ThetaContext { tau, coeffs, wp_shift }
    }

    /// Number of series terms kept.
    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// `θ₁'''(0) / (3θ₁'(0))`, the constant that removes the `z⁰` Laurent term.
    pub fn wp_shift(&self) -> Complex64 {
        self.wp_shift
    }

    /// Splits `z = w + m + nτ` with `w` in the centered cell.
    pub fn split(&self, z: Complex64) -> (Complex64, f64, f64) {
        let n = (z.im / self.tau.im).round();
        let w1 = z - n * self.tau;
        let m = w1.re.round();
        (w1 - m, m, n)
    }

    /// `θ₁^{(j)}(w)` for `j = 0..=order` by direct summation (no reduction).
    pub fn series_derivatives(&self, w: Complex64, order: usize) -> Vec<Complex64> {
        let x = (I * PI * w).exp();
        let x2 = x * x;
        let xi = x.inv();
        let xi2 = xi * xi;
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        let (mut xp, mut xm) = (x, xi);
        for (k, c) in self.coeffs.iter().enumerate() {
            let p = (2 * k + 1) as f64;
            let ipp = I * PI * p;
            let mut factor = Complex64::new(1.0, 0.0);
            let mut sign = 1.0;
            for slot in out.iter_mut() {
                *slot += -I * c * factor * (xp - sign * xm);
                factor *= ipp;
                sign = -sign;
            }
            xp *= x2;
            xm *= xi2;
        }
        out
    }

    /// `θ₁(z)` evaluated through the reduced cell.
    pub fn theta1(&self, z: Complex64) -> Complex64 {
        let jet = self.log_jet(z, 0);
        if jet.log.re == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            jet.log.exp()
        }
    }

    /// `θ₁'(z)`.
    pub fn theta1_prime(&self, z: Complex64) -> Complex64 {
        let (w, m, n) = self.split(z);
        let d = self.series_derivatives(w, 1);
        let factor = self.quasi_factor_log(w, m, n).exp();
        factor * (d[1] - 2.0 * PI * I * n * d[0])
    }

    fn quasi_factor_log(&self, w: Complex64, m: f64, n: f64) -> Complex64 {
        I * PI * (m + n) - I * PI * self.tau * (n * n) - 2.0 * PI * I * n * w
    }

    /// `log θ₁(z)` together with `(log θ₁)^{(j)}(z)` for `j = 1..=order`.
    pub fn log_jet(&self, z: Complex64, order: usize) -> ThetaJet {
        assert!(order <= MAX_JET_ORDER, "jet order {order} exceeds {MAX_JET_ORDER}");
        let (w, m, n) = self.split(z);
        let d = self.series_derivatives(w, order);
        let quasi = self.quasi_factor_log(w, m, n);
        if d[0] == Complex64::new(0.0, 0.0) {
            return ThetaJet {
                log: Complex64::new(f64::NEG_INFINITY, 0.0),
                derivs: vec![Complex64::new(f64::NAN, f64::NAN); order],
            };
        }
        let log = quasi + d[0].ln();
        let t: Vec<Complex64> = d.iter().map(|v| v / d[0]).collect();
        let mut g = vec![Complex64::new(0.0, 0.0); order + 1];
        for k in 1..=order {
            // θ^{(k)} = Σ_{j<k} C(k−1, j) θ^{(j)} g^{(k−j)}
            let mut acc = t[k];
            let mut binom = 1.0;
            for j in 1..k {
                binom = binom * (k - j) as f64 / j as f64;
                acc -= binom * t[j] * g[k - j];
            }
            g[k] = acc;
        }
        if order >= 1 {
            g[1] -= 2.0 * PI * I * n;
        }
        ThetaJet { log, derivs: g[1..].to_vec() }
    }
}

fn checked_cell_point(lattice: &Lattice, z: Complex64) -> Result<Complex64> {
    crate::dilog::ensure_finite(z, "wp argument")?;
    let w = z - lattice.nearest_period(z);
    if w.norm() < POLE_GUARD {
        return Err(Error::PoleProximity { distance: w.norm() });
    }
    Ok(w)
}

/// Weierstrass `℘(z)` for `⟨1, τ⟩`, normalized as `z⁻² + O(z²)`.
pub fn wp(z: Complex64, lattice: &Lattice) -> Result<Complex64> {
    let w = checked_cell_point(lattice, z)?;
    let ctx = lattice.theta();
    let jet = ctx.log_jet(w, 2);
    Ok(ctx.wp_shift - jet.derivs[1])
}

/// `℘'(z)`.
pub fn wp_prime(z: Complex64, lattice: &Lattice) -> Result<Complex64> {
    let w = checked_cell_point(lattice, z)?;
    let jet = lattice.theta().log_jet(w, 3);
    Ok(-jet.derivs[2])
}

/// Divisor of `z ↦ ℘(z − α) − ℘(z − β)`: the four halvings of `α + β` as simple
/// zeros and `α`, `β` as double poles.
pub fn wp_diff_divisor(lattice: &Lattice, alpha: &TorusPoint, beta: &TorusPoint) -> Result<Divisor> {
    if lattice.points_equal(alpha, beta, lattice.eps()) {
        return Err(Error::invalid("wp_diff_divisor needs alpha != beta"));
    }
    let sum = lattice.point(alpha.lift + beta.lift);
    let zeros = lattice.halvings(&sum).to_vec();
    let poles = vec![*alpha, *alpha, *beta, *beta];
    Ok(Divisor::from_points(lattice, &zeros, &poles))
}
