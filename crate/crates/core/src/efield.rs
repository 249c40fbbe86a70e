//! Elliptic functions on `E = ℂ/⟨1, τ⟩` as divisor data plus a scalar.
//!
//! A function of degree `n` is stored as zero lifts `a₁…aₙ`, pole lifts
//! `c₁…cₙ` with `Σaᵢ = Σcⱼ` exactly in `ℂ`, and a scale `s`:
//!
//! ```text
//! f(z) = s · Πᵢ θ₁(z − aᵢ) / Πⱼ θ₁(z − cⱼ)
//! ```
//!
//! The exact lift-sum makes the quasi-periodicity factors of `θ₁` cancel, so
//! `f` is doubly periodic. All algebra (products, quotients, `1 − f`) is
//! divisor arithmetic; values are only used to pin down scales at probe points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::rootfind;
use crate::torus::{Lattice, TorusPoint};

/// A point of the projective line `ℂ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjValue {
    Finite(Complex64),
    Infinity,
}

impl ProjValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ProjValue::Finite(v) => Some(v),
            ProjValue::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ProjValue::Infinity)
    }

    pub fn recip(self) -> ProjValue {
        match self {
            ProjValue::Infinity => ProjValue::Finite(Complex64::new(0.0, 0.0)),
            ProjValue::Finite(v) if v == Complex64::new(0.0, 0.0) => ProjValue::Infinity,
            ProjValue::Finite(v) => ProjValue::Finite(v.inv()),
        }
    }

    /// Agreement within `tol`, relative to `max(1, |target|)`; infinite
    /// targets compare through reciprocals.
    pub fn close_to(self, target: ProjValue, tol: f64) -> bool {
        match (self, target) {
            (ProjValue::Infinity, ProjValue::Infinity) => true,
            (v, ProjValue::Infinity) => match v.recip() {
                ProjValue::Finite(r) => r.norm() < tol,
                ProjValue::Infinity => false,
            },
            (ProjValue::Infinity, ProjValue::Finite(_)) => false,
            (ProjValue::Finite(a), ProjValue::Finite(b)) => (a - b).norm() <= tol * b.norm().max(1.0),
        }
    }
}

impl From<Complex64> for ProjValue {
    fn from(v: Complex64) -> Self {
        ProjValue::Finite(v)
    }
}

/// A divisor `Σ mult·[point]` on `E`, with entries merged within the lattice tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    entries: Vec<(TorusPoint, i64)>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor { entries: Vec::new() }
    }

    pub fn from_points(lattice: &Lattice, zeros: &[TorusPoint], poles: &[TorusPoint]) -> Self {
        let mut d = Divisor::zero();
        for p in zeros {
            d.add(lattice, *p, 1);
        }
        for p in poles {
            d.add(lattice, *p, -1);
        }
        d
    }

    pub fn from_lifts(lattice: &Lattice, zeros: &[Complex64], poles: &[Complex64]) -> Self {
        let z: Vec<_> = zeros.iter().map(|&l| lattice.point(l)).collect();
        let p: Vec<_> = poles.iter().map(|&l| lattice.point(l)).collect();
        Self::from_points(lattice, &z, &p)
    }

    pub fn add(&mut self, lattice: &Lattice, point: TorusPoint, mult: i64) {
        if mult == 0 {
            return;
        }
        if let Some(i) = self.entries.iter().position(|(q, _)| lattice.same_point(q.lift, point.lift)) {
            self.entries[i].1 += mult;
            if self.entries[i].1 == 0 {
                self.entries.remove(i);
            }
        } else {
            self.entries.push((point, mult));
        }
    }

    pub fn entries(&self) -> &[(TorusPoint, i64)] {
        &self.entries
    }

    /// Sum of the positive multiplicities.
    pub fn degree(&self) -> usize {
        self.entries.iter().filter(|e| e.1 > 0).map(|e| e.1 as usize).sum()
    }

    /// Total multiplicity (zero for principal divisors).
    pub fn total(&self) -> i64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplicity-weighted sum of the lifts.
    pub fn lift_sum(&self) -> Complex64 {
        self.entries.iter().map(|(p, m)| p.lift * (*m as f64)).sum()
    }

    /// Points with positive multiplicity, expanded.
    pub fn zeros(&self) -> Vec<TorusPoint> {
        self.expanded(1)
    }

    /// Points with negative multiplicity, expanded.
    pub fn poles(&self) -> Vec<TorusPoint> {
        self.expanded(-1)
    }

    fn expanded(&self, sign: i64) -> Vec<TorusPoint> {
        let mut out = Vec::new();
        for (p, m) in &self.entries {
            if m.signum() == sign {
                out.extend(std::iter::repeat_n(*p, m.unsigned_abs() as usize));
            }
        }
        out
    }

    pub fn multiplicity_at(&self, lattice: &Lattice, z: Complex64) -> i64 {
        self.entries
            .iter()
            .find(|(q, _)| lattice.same_point(q.lift, z))
            .map(|e| e.1)
            .unwrap_or(0)
    }

    /// Equality as formal sums of torus points.
    pub fn matches(&self, lattice: &Lattice, other: &Divisor) -> bool {
        let mut diff = self.clone();
        for (p, m) in &other.entries {
            diff.add(lattice, *p, -m);
        }
        diff.is_zero()
    }
}

/// How the scalar of a function built from a divisor is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Use this scale for the theta quotient as given.
    Scale(Complex64),
    /// Choose the scale so that `f(at) = value`.
    Probe { at: Complex64, value: Complex64 },
}

/// Log-derivative jet of a function at one point.
#[derive(Debug, Clone)]
pub(crate) struct FnJet {
    pub log: Complex64,
    pub at_zero: bool,
    pub at_pole: bool,
    /// `(log f)^{(k)}` for `k = 1..=order`.
    pub dlog: Vec<Complex64>,
}

impl FnJet {
    pub fn value(&self) -> ProjValue {
        if self.at_pole {
            ProjValue::Infinity
        } else if self.at_zero {
            ProjValue::Finite(Complex64::new(0.0, 0.0))
        } else {
            ProjValue::Finite(self.log.exp())
        }
    }

    /// `f^{(k)}/f` for `k = 0..=order` (complete Bell polynomials of the log-derivatives).
    pub fn bell(&self) -> Vec<Complex64> {
        let order = self.dlog.len();
        let mut y = vec![Complex64::new(0.0, 0.0); order + 1];
        y[0] = Complex64::new(1.0, 0.0);
        for k in 0..order {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut binom = 1.0;
            for j in 0..=k {
                acc += binom * self.dlog[j] * y[k - j];
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            y[k + 1] = acc;
        }
        y
    }
}

/// A rational function on `E`; see the module docs for the representation.
#[derive(Clone)]
pub struct EllipticFunction {
    lattice: Arc<Lattice>,
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    scale: Complex64,
    /// Zero lifts of `1 − f`, filled on first use.
    complement: Arc<OnceLock<Vec<Complex64>>>,
}

impl fmt::Debug for EllipticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticFunction")
            .field("tau", &self.lattice.tau())
            .field("scale", &self.scale)
            .field("zeros", &self.zeros)
            .field("poles", &self.poles)
            .finish()
    }
}

/// Bitwise equality of the representation (lattice, lifts, scale).
impl PartialEq for EllipticFunction {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.tau() == other.lattice.tau()
            && self.scale == other.scale
            && self.zeros == other.zeros
            && self.poles == other.poles
    }
}

/// Minimum distance from a scale-fixing probe to any support point.
const PROBE_CLEARANCE: f64 = 0.05;

/// Deterministic probe candidates: an R2 low-discrepancy sequence on the torus.
pub(crate) fn probe_candidates(lattice: &Lattice) -> impl Iterator<Item = Complex64> + '_ {
    const G: f64 = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / G, 1.0 / (G * G));
    (1..).map(move |k| {
        let k = k as f64;
        let u = (0.5 + k * a1).fract();
        let v = (0.5 + k * a2).fract();
        lattice.from_coords(u, v)
    })
}

/// A probe point far from all of `supports` (never within `10·eps` of one).
pub(crate) fn probe_point(lattice: &Lattice, supports: &[Complex64]) -> Complex64 {
    let clearance = |z: Complex64| {
        supports
            .iter()
            .map(|&s| lattice.distance(z, s))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (Complex64::new(0.0, 0.0), -1.0);
    for z in probe_candidates(lattice).take(64) {
        let d = clearance(z);
        if d >= PROBE_CLEARANCE.min(0.25 * lattice.tau().im) {
            return z;
        }
        if d > best.1 {
            best = (z, d);
        }
    }
    debug_assert!(best.1 > 10.0 * lattice.eps());
    best.0
}

/// Rewrites `lifts` so that their sum equals `target` exactly, spreading the
/// lattice part of the correction over the lifts in unit steps.
fn balance(lattice: &Lattice, target: Complex64, lifts: &mut [Complex64], tol: f64) -> Result<()> {
    let sum: Complex64 = lifts.iter().sum();
    let diff = target - sum;
    let scale = 1.0 + lifts.iter().map(|l| l.norm()).sum::<f64>() + target.norm();
    if diff.norm() <= 1e-14 * scale {
        return Ok(());
    }
    let period = lattice.nearest_period(diff);
    let residual = diff - period;
    if residual.norm() > tol {
        return Err(Error::NonPrincipal { re: residual.re, im: residual.im });
    }
    if lifts.is_empty() {
        return Err(Error::NonPrincipal { re: diff.re, im: diff.im });
    }
    let (m, n) = lattice.raw_coords(period);
    let (m, n) = (m.round() as i64, n.round() as i64);
    let len = lifts.len();
    let mut slot = 0usize;
    for _ in 0..m.unsigned_abs() {
        lifts[slot % len] += m.signum() as f64;
        slot += 1;
    }
    for _ in 0..n.unsigned_abs() {
        lifts[slot % len] += n.signum() as f64 * lattice.tau();
        slot += 1;
    }
    let sum: Complex64 = lifts.iter().sum();
    lifts[len - 1] += target - sum;
    Ok(())
}

impl EllipticFunction {
    /// The constant function `value` (degree 0).
    pub fn constant(lattice: Arc<Lattice>, value: Complex64) -> Result<Self> {
        crate::dilog::ensure_finite(value, "constant")?;
        if value == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid("the zero function is not an element of K*"));
        }
        Ok(Self::raw(lattice, Vec::new(), Vec::new(), value))
    }

    fn raw(lattice: Arc<Lattice>, zeros: Vec<Complex64>, poles: Vec<Complex64>, scale: Complex64) -> Self {
        EllipticFunction { lattice, zeros, poles, scale, complement: Arc::new(OnceLock::new()) }
    }

    /// Builds the function with the given zero and pole lifts (with multiplicity).
    ///
    /// The pole lifts are shifted by periods (and, within the lattice tolerance,
    /// by rounding error) so that the lift sums agree exactly; a mismatch that is
    /// not a period is rejected. Coincident zero/pole pairs are cancelled.
    pub fn from_divisor(
        lattice: Arc<Lattice>,
        zeros: Vec<Complex64>,
        mut poles: Vec<Complex64>,
        norm: Normalization,
    ) -> Result<Self> {
        if zeros.len() != poles.len() {
            return Err(Error::invalid(format!(
                "divisor has {} zeros but {} poles",
                zeros.len(),
                poles.len()
            )));
        }
        for &z in zeros.iter().chain(poles.iter()) {
            crate::dilog::ensure_finite(z, "divisor point")?;
        }
        let target: Complex64 = zeros.iter().sum();
        balance(&lattice, target, &mut poles, lattice.eps())?;
        let (scale, probe) = match norm {
            Normalization::Scale(s) => {
                crate::dilog::ensure_finite(s, "scale")?;
                if s == Complex64::new(0.0, 0.0) {
                    return Err(Error::invalid("scale must be nonzero"));
                }
                (s, None)
            }
            Normalization::Probe { at, value } => {
                crate::dilog::ensure_finite(at, "probe")?;
                crate::dilog::ensure_finite(value, "probe value")?;
                if value == Complex64::new(0.0, 0.0) {
                    return Err(Error::invalid("probe value must be nonzero"));
                }
                let near = zeros
                    .iter()
                    .chain(poles.iter())
                    .any(|&s| lattice.distance(at, s) < 10.0 * lattice.eps());
                if near {
                    return Err(Error::invalid("probe point lies on the divisor support"));
                }
                (Complex64::new(1.0, 0.0), Some((at, value)))
            }
        };
        let mut f = Self::raw(lattice, zeros, poles, scale);
        if let Some((at, value)) = probe {
            let current = f.log_value(at);
            f.scale = value * (-current).exp();
        }
        f.cancel_common()
    }

    /// Cancels zero/pole pairs that coincide on `E`, preserving the function.
    fn cancel_common(self) -> Result<Self> {
        let lattice = self.lattice.clone();
        let mut zeros = self.zeros.clone();
        let mut poles = self.poles.clone();
        let mut cancelled = false;
        let mut i = 0;
        while i < zeros.len() {
            if let Some(j) = poles.iter().position(|&p| lattice.same_point(p, zeros[i])) {
                zeros.swap_remove(i);
                poles.swap_remove(j);
                cancelled = true;
            } else {
                i += 1;
            }
        }
        if !cancelled {
            return Ok(self);
        }
        let mut supports = self.zeros.clone();
        supports.extend_from_slice(&self.poles);
        let at = probe_point(&lattice, &supports);
        let value = self.log_value(at);
        if zeros.is_empty() {
            return Ok(Self::raw(lattice, Vec::new(), Vec::new(), value.exp()));
        }
        let zeros: Vec<_> = zeros.iter().map(|&z| lattice.reduce(z)).collect();
        let mut poles: Vec<_> = poles.iter().map(|&p| lattice.reduce(p)).collect();
        let target: Complex64 = zeros.iter().sum();
        balance(&lattice, target, &mut poles, 10.0 * lattice.eps())?;
        let mut f = Self::raw(lattice, zeros, poles, Complex64::new(1.0, 0.0));
        f.scale = (value - f.log_value(at)).exp();
        Ok(f)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    /// Number of zeros with multiplicity.
    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_constant(&self) -> bool {
        self.zeros.is_empty()
    }

    /// The principal divisor `(f)`.
    pub fn divisor(&self) -> Divisor {
        Divisor::from_lifts(&self.lattice, &self.zeros, &self.poles)
    }

    /// All zero and pole lifts.
    pub fn support(&self) -> Vec<Complex64> {
        let mut s = self.zeros.clone();
        s.extend_from_slice(&self.poles);
        s
    }

    /// `log f(z)` (branch unspecified); `±∞` real part on the divisor.
    pub(crate) fn log_value(&self, z: Complex64) -> Complex64 {
        self.jet(z, 0).log
    }

    pub(crate) fn jet(&self, z: Complex64, order: usize) -> FnJet {
        let ctx = self.lattice.theta();
        let mut log = self.scale.ln();
        let mut dlog = vec![Complex64::new(0.0, 0.0); order];
        let (mut at_zero, mut at_pole) = (false, false);
        for (lifts, sign) in [(&self.zeros, 1.0), (&self.poles, -1.0)] {
            for &a in lifts.iter() {
                let j = ctx.log_jet(z - a, order);
                if j.log.re == f64::NEG_INFINITY {
                    if sign > 0.0 {
                        at_zero = true;
                    } else {
                        at_pole = true;
                    }
                    continue;
                }
                log += sign * j.log;
                for (d, v) in dlog.iter_mut().zip(&j.derivs) {
                    *d += sign * v;
                }
            }
        }
        if at_zero || at_pole {
            log = Complex64::new(if at_pole { f64::INFINITY } else { f64::NEG_INFINITY }, 0.0);
            dlog.iter_mut().for_each(|d| *d = Complex64::new(f64::NAN, f64::NAN));
        }
        FnJet { log, at_zero: at_zero && !at_pole, at_pole, dlog }
    }

    /// `f(z)`; `∞` within the lattice tolerance of a pole.
    pub fn evaluate(&self, z: Complex64) -> ProjValue {
        if self.is_constant() {
            return ProjValue::Finite(self.scale);
        }
        if self.poles.iter().any(|&p| self.lattice.same_point(p, z)) {
            return ProjValue::Infinity;
        }
        self.jet(z, 0).value()
    }

    /// `f(z)` when finite.
    pub fn value(&self, z: Complex64) -> Option<Complex64> {
        self.evaluate(z).finite()
    }

    /// `f(z)` and `f'(z)` away from poles.
    pub fn value_and_derivative(&self, z: Complex64) -> Option<(Complex64, Complex64)> {
        let j = self.jet(z, 1);
        if j.at_pole || j.at_zero {
            return None;
        }
        let v = j.log.exp();
        Some((v, v * j.dlog[0]))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_lattice(other)?;
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        Self::raw(self.lattice.clone(), zeros, poles, self.scale * other.scale).cancel_common()
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_same_lattice(other)?;
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.poles);
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.zeros);
        Self::raw(self.lattice.clone(), zeros, poles, self.scale / other.scale).cancel_common()
    }

    /// `1/f`. Shares the cached fiber over 1, since `1 − 1/f` vanishes where `f = 1`.
    pub fn recip(&self) -> Self {
        EllipticFunction {
            lattice: self.lattice.clone(),
            zeros: self.poles.clone(),
            poles: self.zeros.clone(),
            scale: self.scale.inv(),
            complement: Arc::new(self.complement.get().cloned().map(OnceLock::from).unwrap_or_default()),
        }
    }

    pub fn scalar_mul(&self, c: Complex64) -> Result<Self> {
        crate::dilog::ensure_finite(c, "scalar")?;
        if c == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid("cannot scale by zero"));
        }
        Ok(Self::raw(self.lattice.clone(), self.zeros.clone(), self.poles.clone(), self.scale * c))
    }

    /// `z ↦ f(z + ρ)`: every lift moves by `−ρ`; the theta quotient keeps its scale.
    pub fn translate(&self, rho: &TorusPoint) -> Self {
        let shift = |v: &[Complex64]| v.iter().map(|&a| a - rho.lift).collect::<Vec<_>>();
        let complement = OnceLock::new();
        if let Some(c) = self.complement.get() {
            let _ = complement.set(shift(c));
        }
        EllipticFunction {
            lattice: self.lattice.clone(),
            zeros: shift(&self.zeros),
            poles: shift(&self.poles),
            scale: self.scale,
            complement: Arc::new(complement),
        }
    }

    fn check_same_lattice(&self, other: &Self) -> Result<()> {
        if self.lattice.tau() != other.lattice.tau() {
            return Err(Error::invalid("functions live on different lattices"));
        }
        Ok(())
    }

    /// Zero lifts of `1 − f` (the fiber `f⁻¹(1)` with multiplicity), cached.
    pub fn fiber_over_one(&self) -> Result<Vec<Complex64>> {
        if let Some(c) = self.complement.get() {
            return Ok(c.clone());
        }
        let lifts = rootfind::fiber_lifts(self, ProjValue::Finite(Complex64::new(1.0, 0.0)))?;
        let _ = self.complement.set(lifts.clone());
        Ok(lifts)
    }

    /// `1 − f`. Its zeros come from the root finder (or the cache); poles are those of `f`.
    pub fn one_minus(&self) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        if self.is_constant() {
            return Self::constant(self.lattice.clone(), one - self.scale);
        }
        let mut zeros = self.fiber_over_one()?;
        if zeros.len() != self.degree() {
            return Err(Error::numerical(format!(
                "fiber over 1 has {} points, expected {}",
                zeros.len(),
                self.degree()
            )));
        }
        let target: Complex64 = self.poles.iter().sum();
        balance(&self.lattice, target, &mut zeros, 1e-8)?;
        let at = probe_point(&self.lattice, &[zeros.as_slice(), self.poles.as_slice()].concat());
        let value = one - self.value(at).ok_or_else(|| Error::numerical("probe hit a pole"))?;
        let mut g = Self::raw(self.lattice.clone(), zeros, self.poles.clone(), one);
        g.scale = value * (-g.log_value(at)).exp();
        let _ = g.complement.set(self.zeros.clone());
        Ok(g)
    }

    /// `1 − f⁻¹ = (f − 1)/f`, assembled from the fiber over 1 and the zeros of `f`.
    pub fn one_minus_reciprocal(&self) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        if self.is_constant() {
            return Self::constant(self.lattice.clone(), one - self.scale.inv());
        }
        let mut zeros = self.fiber_over_one()?;
        let mut poles = self.zeros.clone();
        let target: Complex64 = poles.iter().sum();
        balance(&self.lattice, target, &mut zeros, 1e-8)?;
        let at = probe_point(&self.lattice, &self.support().iter().chain(zeros.iter()).copied().collect::<Vec<_>>());
        let fv = self.value(at).ok_or_else(|| Error::numerical("probe hit a pole"))?;
        let value = one - fv.inv();
        let mut g = Self::raw(self.lattice.clone(), std::mem::take(&mut zeros), std::mem::take(&mut poles), one);
        g.scale = value * (-g.log_value(at)).exp();
        let _ = g.complement.set(self.poles.clone());
        g.cancel_common()
    }

    /// Equality in `K`: same degree, same divisor on `E`, same value at a probe (rel. 1e-8).
    pub fn functions_equal(&self, other: &Self) -> bool {
        if self.lattice.tau() != other.lattice.tau() || self.degree() != other.degree() {
            return false;
        }
        if !self.divisor().matches(&self.lattice, &other.divisor()) {
            return false;
        }
        let mut supports = self.support();
        supports.extend(other.support());
        let at = probe_point(&self.lattice, &supports);
        match (self.value(at), other.value(at)) {
            (Some(a), Some(b)) => (a - b).norm() <= 1e-8 * a.norm().max(b.norm()),
            _ => false,
        }
    }

    /// True when `f` is the constant `c` (within relative 1e-12).
    pub fn is_constant_value(&self, c: Complex64) -> bool {
        self.is_constant() && (self.scale - c).norm() <= 1e-12 * c.norm().max(1.0)
    }

    /// A random function of degree `n ≥ 2`: `n` uniform zeros, `n − 1` uniform
    /// poles, the last pole fixed by Abel's condition, a unit-modulus value at a probe point.
    pub fn random(lattice: Arc<Lattice>, n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("random functions need degree at least 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut pt = || lattice.from_coords(rng.gen::<f64>(), rng.gen::<f64>());
            let zeros: Vec<_> = (0..n).map(|_| pt()).collect();
            let mut poles: Vec<_> = (0..n - 1).map(|_| pt()).collect();
            let last = zeros.iter().sum::<Complex64>() - poles.iter().sum::<Complex64>();
            poles.push(lattice.reduce(last));
            let all: Vec<_> = zeros.iter().chain(poles.iter()).copied().collect();
            let separated = all.iter().enumerate().all(|(i, &a)| {
                all[..i].iter().all(|&b| lattice.distance(a, b) > RANDOM_SEPARATION)
            });
            let phase = rng.gen::<f64>() * std::f64::consts::TAU;
            if !separated {
                continue;
            }
            let at = probe_point(&lattice, &all);
            let value = Complex64::from_polar(1.0, phase);
            return Self::from_divisor(lattice.clone(), zeros, poles, Normalization::Probe { at, value });
        }
    }

    pub fn to_json(&self) -> FunctionJson {
        FunctionJson {
            tau: pair(self.lattice.tau()),
            scale: pair(self.scale),
            zeros: self.zeros.iter().map(|&z| pair(z)).collect(),
            poles: self.poles.iter().map(|&z| pair(z)).collect(),
        }
    }

    /// Rebuilds a function; `lattice` must carry the document's `tau`.
    pub fn from_json(doc: &FunctionJson, lattice: Arc<Lattice>) -> Result<Self> {
        if complex(doc.tau) != lattice.tau() {
            return Err(Error::Format("function tau does not match the lattice".into()));
        }
        Self::from_divisor(
            lattice,
            doc.zeros.iter().map(|&p| complex(p)).collect(),
            doc.poles.iter().map(|&p| complex(p)).collect(),
            Normalization::Scale(complex(doc.scale)),
        )
    }
}

/// Minimum pairwise support distance for [`EllipticFunction::random`].
pub const RANDOM_SEPARATION: f64 = 0.01;

/// JSON form of a function: `{ "tau", "scale", "zeros", "poles" }`, complex numbers as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionJson {
    pub tau: [f64; 2],
    pub scale: [f64; 2],
    pub zeros: Vec<[f64; 2]>,
    pub poles: Vec<[f64; 2]>,
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}
