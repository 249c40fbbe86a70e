//! Arithmetic on the complex torus `E = ℂ/⟨1, τ⟩`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::dilog::ensure_finite;
use crate::error::{Error, Result};
use crate::weierstrass::ThetaContext;

/// Default point-equality tolerance on the torus.
pub const DEFAULT_EPS: f64 = 1e-8;

/// Smallest accepted `Im τ`.
pub const MIN_IM_TAU: f64 = 0.2;

/// The period lattice `⟨1, τ⟩` together with its cached nome, theta
/// coefficients and the point-equality tolerance used by everything built on it.
#[derive(Debug, Clone)]
pub struct Lattice {
    tau: Complex64,
    nome: Complex64,
    eps: f64,
    theta: ThetaContext,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.tau == other.tau && self.eps == other.eps
    }
}

impl Lattice {
    pub fn new(tau: Complex64) -> Result<Self> {
        Self::with_eps(tau, DEFAULT_EPS)
    }

    pub fn with_eps(tau: Complex64, eps: f64) -> Result<Self> {
        ensure_finite(tau, "tau")?;
        if tau.im < MIN_IM_TAU {
            return Err(Error::invalid(format!(
                "Im(tau) must be at least {MIN_IM_TAU}, got {}",
                tau.im
            )));
        }
        if !(eps > 0.0 && eps < 1e-2) {
            return Err(Error::invalid(format!("eps must lie in (0, 1e-2), got {eps}")));
        }
        if tau.im < 0.5 {
            log::warn!("Im(tau) = {} is small; q-series converge slowly", tau.im);
        }
        let nome = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
        Ok(Lattice { tau, nome, eps, theta: ThetaContext::new(tau) })
    }

    pub fn shared(tau: Complex64) -> Result<Arc<Self>> {
        Self::new(tau).map(Arc::new)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// `q = exp(2πiτ)`.
    pub fn nome(&self) -> Complex64 {
        self.nome
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn theta(&self) -> &ThetaContext {
        &self.theta
    }

    /// Real coordinates `(u, v)` with `z = u + v·τ`.
    pub fn raw_coords(&self, z: Complex64) -> (f64, f64) {
        let v = z.im / self.tau.im;
        let u = z.re - v * self.tau.re;
        (u, v)
    }

    pub fn from_coords(&self, u: f64, v: f64) -> Complex64 {
        Complex64::new(u, 0.0) + v * self.tau
    }

    /// Normalizes `z` to a torus point; the lift is kept verbatim.
    pub fn point(&self, z: Complex64) -> TorusPoint {
        let (u, v) = self.raw_coords(z);
        TorusPoint { lift: z, u: unit_interval(u), v: unit_interval(v) }
    }

    /// The representative of `z` in the half-open fundamental parallelogram.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        let p = self.point(z);
        self.from_coords(p.u, p.v)
    }

    /// The lattice vector closest to `z`.
    pub fn nearest_period(&self, z: Complex64) -> Complex64 {
        let (u, v) = self.raw_coords(z);
        let (m0, n0) = (u.round(), v.round());
        let mut best = self.from_coords(m0, n0);
        let mut best_d = (z - best).norm();
        for dm in -1..=1 {
            for dn in -1..=1 {
                let w = self.from_coords(m0 + dm as f64, n0 + dn as f64);
                let d = (z - w).norm();
                if d < best_d {
                    best = w;
                    best_d = d;
                }
            }
        }
        best
    }

    /// Flat distance from `z` to the lattice.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        (z - self.nearest_period(z)).norm()
    }

    /// Flat distance between two points of the torus.
    pub fn distance(&self, a: Complex64, b: Complex64) -> f64 {
        self.distance_to_lattice(a - b)
    }

    pub fn points_equal(&self, p: &TorusPoint, q: &TorusPoint, eps: f64) -> bool {
        self.distance(p.lift, q.lift) < eps
    }

    /// Equality at the lattice's own tolerance.
    pub fn same_point(&self, a: Complex64, b: Complex64) -> bool {
        self.distance(a, b) < self.eps
    }

    pub fn add(&self, p: &TorusPoint, q: &TorusPoint) -> TorusPoint {
        self.point(p.lift + q.lift)
    }

    pub fn sub(&self, p: &TorusPoint, q: &TorusPoint) -> TorusPoint {
        self.point(p.lift - q.lift)
    }

    pub fn neg(&self, p: &TorusPoint) -> TorusPoint {
        self.point(-p.lift)
    }

    /// The 2-torsion subgroup `{0, 1/2, τ/2, (1+τ)/2}`.
    pub fn two_torsion(&self) -> [TorusPoint; 4] {
        self.half_offsets().map(|t| self.point(t))
    }

    fn half_offsets(&self) -> [Complex64; 4] {
        let half = Complex64::new(0.5, 0.0);
        [Complex64::new(0.0, 0.0), half, 0.5 * self.tau, half + 0.5 * self.tau]
    }

    /// The four solutions `x` of `2x = p`. Lifts are `p.lift/2` plus a half period.
    pub fn halvings(&self, p: &TorusPoint) -> [TorusPoint; 4] {
        let base = 0.5 * p.lift;
        self.half_offsets().map(|t| self.point(base + t))
    }

    /// One solution of `3ρ = p`: `p.lift / 3`.
    pub fn third_point(&self, p: &TorusPoint) -> TorusPoint {
        self.point(p.lift / 3.0)
    }

    pub fn is_two_torsion(&self, p: &TorusPoint) -> bool {
        self.distance_to_lattice(2.0 * p.lift) < self.eps
    }

    /// The lexicographically smaller of `{p, −p}` by `(u, v)`, with `+1` if `p`
    /// itself was chosen and `−1` otherwise. 2-torsion points are fixed with `+1`.
    pub fn neg_canonical(&self, p: &TorusPoint) -> (TorusPoint, i64) {
        if self.is_two_torsion(p) {
            return (*p, 1);
        }
        let n = self.neg(p);
        if (p.u, p.v) <= (n.u, n.v) {
            (*p, 1)
        } else {
            (n, -1)
        }
    }
}

fn unit_interval(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of `E` carried as an exact complex lift plus its reduced
/// coordinates `(u, v) ∈ [0, 1)²` with `lift ≡ u + v·τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub lift: Complex64,
    pub u: f64,
    pub v: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalize_examples() {
        let l = Lattice::new(c(0.0, 1.0)).unwrap();
        let p = l.point(c(3.5, 1.75));
        assert!((p.u - 0.5).abs() < 1e-15 && (p.v - 0.75).abs() < 1e-15);
        assert_eq!(p.lift, c(3.5, 1.75));
        let p = l.point(c(0.0, 0.0));
        assert_eq!((p.u, p.v), (0.0, 0.0));
        let l2 = Lattice::new(c(0.0, 2.0)).unwrap();
        let p = l2.point(c(-0.25, 0.0));
        assert!((p.u - 0.75).abs() < 1e-15 && p.v == 0.0);
    }

    #[test]
    fn small_im_tau_is_rejected() {
        assert!(Lattice::new(c(0.0, 0.1)).is_err());
        assert!(Lattice::new(c(0.0, -1.0)).is_err());
        assert!(Lattice::new(c(f64::NAN, 1.0)).is_err());
    }

    #[test]
    fn equality_wraps_around() {
        let l = Lattice::new(c(0.0, 1.0)).unwrap();
        let p = l.point(l.from_coords(0.1, 0.999999));
        let q = l.point(l.from_coords(0.1, 0.0000005));
        assert!(l.points_equal(&p, &q, 1e-4));
        assert!(l.points_equal(&p, &p, 1e-12));
        let a = l.point(l.from_coords(0.3, 0.3));
        let b = l.point(l.from_coords(0.5, 0.3));
        assert!(!l.points_equal(&a, &b, 1e-6));
    }

    #[test]
    fn halvings_of_a_point() {
        let l = Lattice::new(c(0.0, 1.0)).unwrap();
        let h = l.halvings(&l.point(c(0.3, 0.4)));
        let expected = [c(0.15, 0.2), c(0.65, 0.2), c(0.15, 0.7), c(0.65, 0.7)];
        for (p, e) in h.iter().zip(expected) {
            assert!((p.lift - e).norm() < 1e-15);
        }
        let p = l.point(c(0.3, 0.4));
        for x in &h {
            assert!(l.points_equal(&l.add(x, x), &p, 1e-12));
        }
    }

    #[test]
    fn two_torsion_doubles_to_zero() {
        let l = Lattice::new(c(0.3, 1.1)).unwrap();
        let zero = l.point(c(0.0, 0.0));
        let t = l.two_torsion();
        for x in &t {
            assert!(l.points_equal(&l.add(x, x), &zero, 1e-12));
            assert!(l.is_two_torsion(x));
        }
        for i in 0..4 {
            for j in 0..i {
                assert!(!l.points_equal(&t[i], &t[j], 1e-3));
            }
        }
    }

    #[test]
    fn third_point_examples() {
        let l = Lattice::new(c(0.0, 1.0)).unwrap();
        assert_eq!(l.third_point(&l.point(c(0.0, 0.0))).lift, c(0.0, 0.0));
        let r = l.third_point(&l.point(c(0.9, 0.0)));
        assert!((r.lift - c(0.3, 0.0)).norm() < 1e-15);
        let p = l.point(c(0.77, 0.41));
        let r = l.third_point(&p);
        assert!(l.points_equal(&l.point(3.0 * r.lift), &p, 1e-12));
    }

    #[test]
    fn neg_canonical_examples() {
        let l = Lattice::new(c(0.0, 1.0)).unwrap();
        let p = l.point(l.from_coords(0.2, 0.7));
        let (q, s) = l.neg_canonical(&p);
        assert_eq!(s, 1);
        assert!(l.points_equal(&q, &p, 1e-12));
        let p = l.point(l.from_coords(0.8, 0.3));
        let (q, s) = l.neg_canonical(&p);
        assert_eq!(s, -1);
        assert!((q.u - 0.2).abs() < 1e-12 && (q.v - 0.7).abs() < 1e-12);
        let p = l.point(l.from_coords(0.5, 0.0));
        assert_eq!(l.neg_canonical(&p), (p, 1));
    }
}
