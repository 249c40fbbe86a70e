//! Degree-2 interpolation and the auxiliary functions of the reduction step.

use num_complex::Complex64;
use std::sync::Arc;

use crate::efield::{probe_point, EllipticFunction, Normalization, ProjValue};
use crate::error::{Error, Result};
use crate::mobius::Mobius;
use crate::reduction::hfunc::mu_candidates;
use crate::reduction::witness::{Coincidence, GenericityWitness};
use crate::rootfind::fiber_lifts;
use crate::torus::{Lattice, TorusPoint};

/// Relative tolerance of the value self-checks.
pub const VALUE_TOL: f64 = 1e-8;

/// A degree-2 function taking the values `a, b, c, d` at `α, β, γ, δ`.
///
/// With `M` the Möbius map `0 ↦ a, ∞ ↦ b, 1 ↦ d` and `m = M⁻¹(c)`, a point
/// `μ` with `h_{α,β,γ,δ}(μ) = m` gives `f̃` with divisor
/// `[α] + [2μ−α] − [β] − [2μ−β]` and `f̃(δ) = 1`, hence `f̃(γ) = m`; the
/// result is `M∘f̃`, checked at all four points.
#[allow(clippy::too_many_arguments)]
pub fn interpolate_degree2(
    lattice: &Arc<Lattice>,
    alpha: &TorusPoint,
    beta: &TorusPoint,
    gamma: &TorusPoint,
    delta: &TorusPoint,
    a: ProjValue,
    b: ProjValue,
    c: ProjValue,
    d: ProjValue,
) -> Result<EllipticFunction> {
    let vals = [a, b, c, d];
    for i in 0..4 {
        for j in 0..i {
            if vals[i].close_to(vals[j], 1e-12) {
                return Err(Error::invalid("interpolation values must be mutually different"));
            }
        }
    }
    let moebius = Mobius::from_three(a, b, d)?;
    let m = moebius
        .inverse()
        .apply(c)
        .finite()
        .ok_or_else(|| Error::numerical("cross-ratio datum is infinite"))?;
    let candidates = mu_candidates(lattice, alpha, beta, gamma, delta, m)?;
    let mut last = Error::numerical("no admissible point in the fiber of h");
    for mu in candidates {
        match build(lattice, alpha, beta, delta, &mu, &moebius) {
            Ok(g) => {
                let pts = [alpha, beta, gamma, delta];
                if pts.iter().zip(vals).all(|(p, v)| g.evaluate(p.lift).close_to(v, VALUE_TOL)) {
                    return Ok(g);
                }
                last = Error::numerical("interpolation self-check failed");
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn build(
    lattice: &Arc<Lattice>,
    alpha: &TorusPoint,
    beta: &TorusPoint,
    delta: &TorusPoint,
    mu: &TorusPoint,
    moebius: &Mobius,
) -> Result<EllipticFunction> {
    let two_mu = 2.0 * mu.lift;
    let base = EllipticFunction::from_divisor(
        lattice.clone(),
        vec![alpha.lift, two_mu - alpha.lift],
        vec![beta.lift, two_mu - beta.lift],
        Normalization::Probe { at: delta.lift, value: Complex64::new(1.0, 0.0) },
    )?;
    if base.degree() != 2 {
        return Err(Error::numerical("base function degenerated"));
    }
    let inverse = moebius.inverse();
    let zeros = fiber_lifts(&base, inverse.apply(ProjValue::Finite(Complex64::new(0.0, 0.0))))?;
    let poles = fiber_lifts(&base, inverse.apply(ProjValue::Infinity))?;
    let mut avoid = base.support();
    avoid.extend_from_slice(&zeros);
    avoid.extend_from_slice(&poles);
    let at = probe_point(lattice, &avoid);
    let value = moebius
        .apply(base.evaluate(at))
        .finite()
        .ok_or_else(|| Error::numerical("probe hit a pole of the interpolant"))?;
    EllipticFunction::from_divisor(lattice.clone(), zeros, poles, Normalization::Probe { at, value })
}

/// Which of the three divisor shapes an auxiliary function has.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Degree 3, zeros ⊇ {α₁, α₂}, poles ⊇ {γ₁, γ₂}.
    Cubic,
    /// Degree 2, zeros = {α₁, α₂}, one pole among the γ.
    PolesDegenerate,
    /// Degree 2, poles = {γ₁, γ₂}, one zero among the α.
    ZerosDegenerate,
}

fn contains_pair(lattice: &Lattice, lifts: &[Complex64], a: Complex64, b: Complex64) -> bool {
    let mut rest = lifts.to_vec();
    for target in [a, b] {
        match rest.iter().position(|&z| lattice.same_point(z, target)) {
            Some(i) => {
                rest.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

fn contains_any(lattice: &Lattice, lifts: &[Complex64], a: Complex64, b: Complex64) -> bool {
    lifts.iter().any(|&z| lattice.same_point(z, a) || lattice.same_point(z, b))
}

/// Classifies the divisor of `g` against the witness points.
pub fn classify_shape(g: &EllipticFunction, w: &GenericityWitness) -> Option<Shape> {
    let l = g.lattice();
    let (a1, a2, g1, g2) = (w.alpha1.lift, w.alpha2.lift, w.gamma1.lift, w.gamma2.lift);
    let zeros_full = contains_pair(l, g.zeros(), a1, a2);
    let poles_full = contains_pair(l, g.poles(), g1, g2);
    match g.degree() {
        3 if zeros_full && poles_full => Some(Shape::Cubic),
        2 if zeros_full && contains_any(l, g.poles(), g1, g2) => Some(Shape::PolesDegenerate),
        2 if poles_full && contains_any(l, g.zeros(), a1, a2) => Some(Shape::ZerosDegenerate),
        _ => None,
    }
}

/// The auxiliary function `g` with `g(β₁) = g(β₂) = 1` built from a generic witness.
pub fn auxiliary_degree3(lattice: &Arc<Lattice>, w: &GenericityWitness) -> Result<(EllipticFunction, Shape)> {
    let one = Complex64::new(1.0, 0.0);
    let p = lattice.point(w.alpha1.lift + w.alpha2.lift - w.gamma1.lift);
    let g1 = EllipticFunction::from_divisor(
        lattice.clone(),
        vec![w.alpha1.lift, w.alpha2.lift],
        vec![w.gamma1.lift, p.lift],
        Normalization::Scale(one),
    )?;
    let at_b1 = g1.value(w.beta1.lift).ok_or_else(|| Error::numerical("g₁ has a pole at β₁"))?;
    let g1 = g1.scalar_mul(at_b1.inv())?;
    let v = g1.value(w.beta2.lift).ok_or_else(|| Error::numerical("g₁ has a pole at β₂"))?;
    let g2 = interpolate_degree2(
        lattice,
        &p,
        &w.gamma2,
        &w.beta1,
        &w.beta2,
        ProjValue::Finite(Complex64::new(0.0, 0.0)),
        ProjValue::Infinity,
        ProjValue::Finite(one),
        ProjValue::Finite(v.inv()),
    )?;
    let g = g1.mul(&g2)?;
    for b in [w.beta1, w.beta2] {
        let val = g.value(b.lift).ok_or_else(|| Error::numerical("auxiliary function has a pole at β"))?;
        if (val - one).norm() > VALUE_TOL {
            return Err(Error::numerical(format!("auxiliary function takes {val} at β, not 1")));
        }
    }
    let shape = classify_shape(&g, w).ok_or_else(|| {
        Error::numerical(format!("auxiliary function has unexpected divisor shape (degree {})", g.degree()))
    })?;
    Ok((g, shape))
}

/// The degree-2 function used when two of the point sums coincide.
///
/// - `α₁+α₂ ≡ β₁+β₂`: divisor `[α₁]+[α₂]−[γ₁]−[α₁+α₂−γ₁]`, `h(β₁) = 1`;
/// - `β₁+β₂ ≡ γ₁+γ₂`: divisor `[α₁]+[γ₁+γ₂−α₁]−[γ₁]−[γ₂]`, `h(β₁) = 1`;
/// - `α₁+α₂ ≡ γ₁+γ₂`: divisor `[α₁]+[α₂]−[γ₁]−[γ₂]`, `h(β₁) = 1`.
///
/// In the first two cases Abel's relation forces `h(β₂) = 1` as well.
pub fn lemma_sp_auxiliary(
    lattice: &Arc<Lattice>,
    w: &GenericityWitness,
    case: Coincidence,
) -> Result<EllipticFunction> {
    let one = Complex64::new(1.0, 0.0);
    let (a1, a2, g1, g2) = (w.alpha1.lift, w.alpha2.lift, w.gamma1.lift, w.gamma2.lift);
    let (zeros, poles) = match case {
        Coincidence::AlphaBeta => (vec![a1, a2], vec![g1, a1 + a2 - g1]),
        Coincidence::BetaGamma => (vec![a1, g1 + g2 - a1], vec![g1, g2]),
        Coincidence::AlphaGamma => (vec![a1, a2], vec![g1, g2]),
    };
    let h = EllipticFunction::from_divisor(
        lattice.clone(),
        zeros,
        poles,
        Normalization::Probe { at: w.beta1.lift, value: one },
    )?;
    if h.degree() != 2 {
        return Err(Error::numerical("auxiliary function degenerated"));
    }
    let mut checks = vec![(w.alpha1, ProjValue::Finite(Complex64::new(0.0, 0.0))), (w.gamma1, ProjValue::Infinity)];
    match case {
        Coincidence::AlphaBeta => {
            checks.push((w.alpha2, ProjValue::Finite(Complex64::new(0.0, 0.0))));
            checks.push((w.beta2, ProjValue::Finite(one)));
        }
        Coincidence::BetaGamma => {
            checks.push((w.gamma2, ProjValue::Infinity));
            checks.push((w.beta2, ProjValue::Finite(one)));
        }
        Coincidence::AlphaGamma => {
            checks.push((w.alpha2, ProjValue::Finite(Complex64::new(0.0, 0.0))));
            checks.push((w.gamma2, ProjValue::Infinity));
        }
    }
    for (p, v) in checks {
        if !h.evaluate(p.lift).close_to(v, VALUE_TOL) {
            return Err(Error::numerical("auxiliary function misses a prescribed value"));
        }
    }
    Ok(h)
}
