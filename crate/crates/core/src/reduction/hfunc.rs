//! The degree-8 cross-ratio function
//! `h_{α,β,γ,δ}(z) = [℘(z−α), ℘(z−β), ℘(z−γ), ℘(z−δ)]` and its fibers.

use num_complex::Complex64;
use std::sync::Arc;

use crate::efield::{probe_point, EllipticFunction, Normalization, ProjValue};
use crate::error::{Error, Result};
use crate::mobius::cross_ratio;
use crate::rootfind::{fiber_roots, RESIDUAL_TOL};
use crate::torus::{Lattice, TorusPoint};
use crate::weierstrass::wp;

fn check_distinct(lattice: &Lattice, pts: &[TorusPoint]) -> Result<()> {
    for i in 0..pts.len() {
        for j in 0..i {
            if lattice.same_point(pts[i].lift, pts[j].lift) {
                return Err(Error::invalid("points must be mutually different"));
            }
        }
    }
    Ok(())
}

/// Direct evaluation through `℘`.
pub fn h_direct(lattice: &Lattice, pts: [TorusPoint; 4], z: Complex64) -> Result<ProjValue> {
    let v: Vec<ProjValue> = pts
        .iter()
        .map(|p| wp(z - p.lift, lattice).map(ProjValue::Finite))
        .collect::<Result<_>>()?;
    Ok(cross_ratio(v[0], v[1], v[2], v[3]))
}

/// `h_{α,β,γ,δ}` in divisor form: zeros at the halvings of `α+γ` and `β+δ`,
/// poles at the halvings of `α+δ` and `β+γ`; the scale comes from one direct
/// evaluation at a probe.
pub fn h_function(
    lattice: &Arc<Lattice>,
    alpha: &TorusPoint,
    beta: &TorusPoint,
    gamma: &TorusPoint,
    delta: &TorusPoint,
) -> Result<EllipticFunction> {
    let pts = [*alpha, *beta, *gamma, *delta];
    check_distinct(lattice, &pts)?;
    let halves = |a: &TorusPoint, b: &TorusPoint| lattice.halvings(&lattice.point(a.lift + b.lift)).map(|p| p.lift);
    let zeros: Vec<_> = halves(alpha, gamma).into_iter().chain(halves(beta, delta)).collect();
    let poles: Vec<_> = halves(alpha, delta).into_iter().chain(halves(beta, gamma)).collect();
    let mut avoid: Vec<_> = zeros.iter().chain(poles.iter()).copied().collect();
    avoid.extend(pts.iter().map(|p| p.lift));
    let at = probe_point(lattice, &avoid);
    let value = h_direct(lattice, pts, at)?
        .finite()
        .ok_or_else(|| Error::numerical("h probe landed on a pole"))?;
    EllipticFunction::from_divisor(lattice.clone(), zeros, poles, Normalization::Probe { at, value })
}

/// All points `μ` with `h(μ) = m`, `μ ∉ {α, β}` and
/// `2μ ∉ {α+γ, β+δ, α+δ, β+γ, α+β, δ+γ}`, in fiber order.
pub fn mu_candidates(
    lattice: &Arc<Lattice>,
    alpha: &TorusPoint,
    beta: &TorusPoint,
    gamma: &TorusPoint,
    delta: &TorusPoint,
    m: Complex64,
) -> Result<Vec<TorusPoint>> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    crate::dilog::ensure_finite(m, "m")?;
    if m == zero || m == one {
        return Err(Error::invalid("m must avoid 0, 1 and ∞"));
    }
    let h = h_function(lattice, alpha, beta, gamma, delta)?;
    let roots = fiber_roots(&h, ProjValue::Finite(m))?;
    let sums = [
        alpha.lift + gamma.lift,
        beta.lift + delta.lift,
        alpha.lift + delta.lift,
        beta.lift + gamma.lift,
        alpha.lift + beta.lift,
        delta.lift + gamma.lift,
    ];
    let tol = RESIDUAL_TOL * m.norm().max(1.0);
    Ok(roots
        .iter()
        .map(|r| lattice.point(r.point))
        .filter(|mu| {
            let ok_value = h.value(mu.lift).is_some_and(|v| (v - m).norm() < tol);
            let ok_points = !lattice.same_point(mu.lift, alpha.lift) && !lattice.same_point(mu.lift, beta.lift);
            let ok_double = sums.iter().all(|&s| !lattice.same_point(2.0 * mu.lift, s));
            ok_value && ok_points && ok_double
        })
        .collect())
}

/// A point `μ` with `h_{α,β,γ,δ}(μ) = m` avoiding the excluded configurations.
pub fn find_mu(
    lattice: &Arc<Lattice>,
    alpha: &TorusPoint,
    beta: &TorusPoint,
    gamma: &TorusPoint,
    delta: &TorusPoint,
    m: Complex64,
) -> Result<TorusPoint> {
    mu_candidates(lattice, alpha, beta, gamma, delta, m)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::numerical("no admissible point in the fiber of h"))
}
