//! Fibers `f⁻¹(c)` of elliptic functions, with multiplicities.
//!
//! Seeds come from local minima of `|f − c|` on a periodic grid over the
//! fundamental parallelogram; each seed is polished by Newton's method on the
//! analytic log-derivative. Multiplicities are read off a small-circle winding
//! number and multiple roots are re-centred by Newton on `f^{(m−1)}`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::efield::{Divisor, EllipticFunction, FnJet, ProjValue};
use crate::error::{Error, Result};
use crate::torus::Lattice;

/// Grid sizes tried in turn.
pub const GRID_LEVELS: [usize; 3] = [64, 128, 256];

/// Root residual bound, relative to `max(1, |c|)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Abel-sum tolerance for a fiber.
pub const ABEL_TOL: f64 = 1e-8;

const NEWTON_MAX_ITER: usize = 100;
const WINDING_NODES: usize = 64;

/// One point of a fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    /// Representative in the fundamental parallelogram.
    pub point: Complex64,
    pub multiplicity: usize,
}

/// Number of solutions of `f = c` (with multiplicity) from the argument
/// principle, integrating `F'/F` for `F = (f − c)·Π θ₁(z − pⱼ)` around a
/// shifted fundamental parallelogram.
pub fn count_zeros(f: &EllipticFunction, c: ProjValue) -> Result<usize> {
    let c = match c {
        ProjValue::Infinity => return Ok(f.degree()),
        ProjValue::Finite(c) => c,
    };
    if f.is_constant() {
        return if (f.scale() - c).norm() <= 1e-14 * c.norm().max(1.0) {
            Err(Error::invalid("constant function equals c everywhere"))
        } else {
            Ok(0)
        };
    }
    let lattice = f.lattice().clone();
    let tau = lattice.tau();
    let shifts = [(0.013, 0.021), (0.271, 0.137), (0.417, 0.389), (0.093, 0.613), (0.587, 0.241)];
    for &(su, sv) in &shifts {
        let start = lattice.from_coords(-su, -sv);
        let corners = [start, start + 1.0, start + 1.0 + tau, start + tau, start];
        let mut previous: Option<f64> = None;
        let mut n = 512;
        while n <= 8192 {
            match contour_integral(f, c, &corners, n) {
                Some(v) => {
                    let count = v.re;
                    let near_integer = v.im.abs() < 1e-3 && (count - count.round()).abs() < 1e-3 && count.round() >= 0.0;
                    let settled =
                        previous.is_some_and(|p| (p - count).abs() < 1e-4) || (count - count.round()).abs() < 1e-6;
                    if near_integer && settled {
                        return Ok(count.round() as usize);
                    }
                    previous = Some(count);
                }
                None => break,
            }
            n *= 2;
        }
    }
    Err(Error::numerical("argument-principle count did not settle after 5 contours"))
}

/// `(1/2πi)∮ F'/F` along a closed polygon, composite trapezoid with `n` nodes per side.
fn contour_integral(f: &EllipticFunction, c: Complex64, corners: &[Complex64], n: usize) -> Option<Complex64> {
    let ctx = f.lattice().theta();
    let integrand = |z: Complex64| -> Option<Complex64> {
        let j = f.jet(z, 1);
        if j.at_pole || j.at_zero {
            return None;
        }
        let v = j.log.exp();
        let denom = v - c;
        if denom.norm() < 1e-13 * c.norm().max(1.0) {
            return None;
        }
        let mut g = v * j.dlog[0] / denom;
        for &p in f.poles() {
            g += ctx.log_jet(z - p, 1).derivs[0];
        }
        Some(g)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for w in corners.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = (b - a) / n as f64;
        let mut side = 0.5 * (integrand(a)? + integrand(b)?);
        for k in 1..n {
            side += integrand(a + h * k as f64)?;
        }
        total += side * h;
    }
    Some(total / Complex64::new(0.0, 2.0 * PI))
}

/// The fiber `f⁻¹(c)` as a divisor.
pub fn solve_fiber(f: &EllipticFunction, c: ProjValue) -> Result<Divisor> {
    let roots = fiber_roots(f, c)?;
    let lattice = f.lattice();
    let mut d = Divisor::zero();
    for r in roots {
        d.add(lattice, lattice.point(r.point), r.multiplicity as i64);
    }
    Ok(d)
}

/// The fiber as a flat list of points repeated by multiplicity, sorted by `(u, v)`.
pub fn fiber_lifts(f: &EllipticFunction, c: ProjValue) -> Result<Vec<Complex64>> {
    let roots = fiber_roots(f, c)?;
    Ok(roots
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.point, r.multiplicity))
        .collect())
}

/// The fiber `f⁻¹(c)` as distinct points with multiplicities, sorted by `(u, v)`.
///
/// `c = 0` and `c = ∞` are answered from the stored divisor.
pub fn fiber_roots(f: &EllipticFunction, c: ProjValue) -> Result<Vec<Root>> {
    let lattice = f.lattice().clone();
    let known = match c {
        ProjValue::Infinity => Some(f.poles()),
        ProjValue::Finite(v) if v == Complex64::new(0.0, 0.0) => Some(f.zeros()),
        _ => None,
    };
    if let Some(points) = known {
        let mut roots: Vec<Root> = Vec::new();
        for &p in points {
            match roots.iter_mut().find(|r| lattice.same_point(r.point, p)) {
                Some(r) => r.multiplicity += 1,
                None => roots.push(Root { point: lattice.reduce(p), multiplicity: 1 }),
            }
        }
        sort_roots(&lattice, &mut roots);
        return Ok(roots);
    }
    let c = c.finite().expect("finite target");
    crate::dilog::ensure_finite(c, "fiber value")?;
    if f.is_constant() {
        if (f.scale() - c).norm() <= 1e-14 * c.norm().max(1.0) {
            return Err(Error::invalid("constant function equals c everywhere"));
        }
        return Ok(Vec::new());
    }
    let mut last_err = None;
    for &n in &GRID_LEVELS {
        match attempt(f, c, n) {
            Ok(roots) => return Ok(roots),
            Err(e) => {
                log::debug!("fiber solve at grid {n} failed: {e}");
                last_err = Some(e);
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::numerical("fiber solve failed")))
}

fn sort_roots(lattice: &Lattice, roots: &mut [Root]) {
    roots.sort_by(|a, b| {
        let pa = lattice.point(a.point);
        let pb = lattice.point(b.point);
        (pa.u, pa.v).partial_cmp(&(pb.u, pb.v)).unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// `|f(z)/c − 1|` (or `|f(z)|` for tiny `c`), `∞` at poles.
fn mismatch(j: &FnJet, c: Complex64) -> f64 {
    match j.value() {
        ProjValue::Infinity => f64::INFINITY,
        ProjValue::Finite(v) => (v - c).norm(),
    }
}

fn attempt(f: &EllipticFunction, c: Complex64, n: usize) -> Result<Vec<Root>> {
    let lattice = f.lattice().clone();
    let deg = f.degree();
    let mut grid = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for k in 0..n {
            let z = lattice.from_coords((i as f64 + 0.37) / n as f64, (k as f64 + 0.61) / n as f64);
            let v = mismatch(&f.jet(z, 0), c);
            grid[i * n + k] = if v.is_nan() { f64::INFINITY } else { v };
        }
    }
    let cell = (1.0f64).min(lattice.tau().im) / n as f64;
    let mut seeds = Vec::new();
    for i in 0..n {
        for k in 0..n {
            let g = grid[i * n + k];
            if !g.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in [n - 1, 0, 1] {
                for dk in [n - 1, 0, 1] {
                    if di == 0 && dk == 0 {
                        continue;
                    }
                    let other = grid[((i + di) % n) * n + (k + dk) % n];
                    if other < g {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push((g, lattice.from_coords((i as f64 + 0.37) / n as f64, (k as f64 + 0.61) / n as f64)));
            }
        }
    }
    // Near a zero or pole the fiber can sit inside a single grid cell.
    for &s in f.zeros().iter().chain(f.poles()) {
        for r in [0.3 * cell, 3.0 * cell] {
            for k in 0..8 {
                let z = s + Complex64::from_polar(r, PI * (k as f64 + 0.5) / 4.0);
                seeds.push((mismatch(&f.jet(z, 0), c), z));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut candidates: Vec<(Complex64, f64)> = Vec::new();
    for &(_, z0) in &seeds {
        if let Some((z, res)) = newton(f, c, z0) {
            candidates.push((lattice.reduce(z), res));
        }
    }
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    log::trace!("grid {n}: {} seeds, candidates {:?}", seeds.len(), candidates);

    let r0 = 0.25 * cell;
    let mut accepted: Vec<Root> = Vec::new();
    let tol = RESIDUAL_TOL * c.norm().max(1.0);
    for &(z, _) in &candidates {
        if accepted.iter().any(|r| lattice.distance(r.point, z) < r0.max(10.0 * lattice.eps())) {
            continue;
        }
        let mut radius = r0;
        for &p in f.poles() {
            radius = radius.min(0.4 * lattice.distance(z, p));
        }
        for r in &accepted {
            radius = radius.min(0.4 * lattice.distance(z, r.point));
        }
        log::trace!("candidate {z} radius {radius} winding {:?}", winding(f, c, z, radius));
        let m = match winding(f, c, z, radius) {
            Some(m) => m,
            None => continue,
        };
        if m == 0 {
            continue;
        }
        let centre = if m == 1 { z } else { refine_multiple(f, z, m, radius)? };
        let residual = mismatch(&f.jet(centre, 0), c);
        if residual.is_nan() || residual >= tol {
            return Err(Error::numerical(format!(
                "root residual {residual:e} above {tol:e} (multiplicity {m})"
            )));
        }
        if m > 1 && winding(f, c, centre, 0.5 * radius) != Some(m) {
            return Err(Error::numerical("multiplicity cross-check failed"));
        }
        accepted.push(Root { point: lattice.reduce(centre), multiplicity: m });
    }
    let total: usize = accepted.iter().map(|r| r.multiplicity).sum();
    if total != deg {
        return Err(Error::numerical(format!("found {total} roots with multiplicity, expected {deg}")));
    }
    let sum: Complex64 = accepted.iter().map(|r| r.point * r.multiplicity as f64).sum();
    let pole_sum: Complex64 = f.poles().iter().sum();
    let abel = lattice.distance(sum, pole_sum);
    if abel > ABEL_TOL {
        return Err(Error::numerical(format!("fiber violates Abel's relation by {abel:e}")));
    }
    sort_roots(&lattice, &mut accepted);
    Ok(accepted)
}

/// Damped Newton's method for `f(z) = c`; returns the limit and its residual.
fn newton(f: &EllipticFunction, c: Complex64, z0: Complex64) -> Option<(Complex64, f64)> {
    let max_step = 0.1 * (1.0f64).min(f.lattice().tau().im);
    let mut z = z0;
    let mut j = f.jet(z, 1);
    let mut res = mismatch(&j, c);
    for _ in 0..NEWTON_MAX_ITER {
        if j.at_pole || !res.is_finite() {
            return None;
        }
        if j.at_zero || res == 0.0 {
            break;
        }
        let v = j.log.exp();
        let mut step = (v - c) / (v * j.dlog[0]);
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        let mut accepted = false;
        for _ in 0..40 {
            let trial = z - step;
            let tj = f.jet(trial, 1);
            let tr = mismatch(&tj, c);
            if tr < res || (tr == res && step.norm() < 1e-14) {
                z = trial;
                j = tj;
                res = tr;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    res.is_finite().then_some((z, res))
}

/// Winding number of `f − c` around the circle `|z − centre| = radius`.
fn winding(f: &EllipticFunction, c: Complex64, centre: Complex64, radius: f64) -> Option<usize> {
    for nodes in [WINDING_NODES, 4 * WINDING_NODES] {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut ok = true;
        for k in 0..nodes {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
            let z = centre + radius * e;
            let j = f.jet(z, 1);
            if j.at_pole || j.at_zero {
                ok = false;
                break;
            }
            let v = j.log.exp();
            let d = v - c;
            if d.norm() == 0.0 {
                ok = false;
                break;
            }
            // (f'/(f−c)) dz with dz = i·radius·e dθ
            acc += v * j.dlog[0] / d * radius * e;
        }
        if !ok {
            return None;
        }
        let w = acc.re / nodes as f64;
        if (w - w.round()).abs() < 0.05 && acc.im.abs() / (nodes as f64) < 0.05 && w.round() >= 0.0 {
            return Some(w.round() as usize);
        }
    }
    None
}

/// Re-centres a root of multiplicity `m` by Newton on `f^{(m−1)}`.
fn refine_multiple(f: &EllipticFunction, z0: Complex64, m: usize, radius: f64) -> Result<Complex64> {
    let k = m - 1;
    if k + 1 > crate::weierstrass::MAX_JET_ORDER {
        return Err(Error::numerical("multiplicity beyond supported jet order"));
    }
    let mut z = z0;
    for _ in 0..NEWTON_MAX_ITER {
        let j = f.jet(z, k + 1);
        if j.at_pole || j.at_zero {
            break;
        }
        let y = j.bell();
        let step = y[k] / y[k + 1];
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if (z - z0).norm() > radius {
            return Err(Error::numerical("multiple-root refinement left its disc"));
        }
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efield::Normalization;
    use crate::torus::Lattice;
    use crate::weierstrass::wp;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wp_function(l: &Arc<Lattice>) -> EllipticFunction {
        // ℘ itself: double pole at 0, zeros at ±z₀ for some z₀; build from ℘ − ℘(a) plus ℘(a).
        let a = c(0.3, 0.2);
        let z0 = c(0.37, 0.29);
        let zero = c(0.0, 0.0);
        let base = EllipticFunction::from_divisor(
            l.clone(),
            vec![a, -a],
            vec![zero, zero],
            Normalization::Probe { at: z0, value: wp(z0, l).unwrap() - wp(a, l).unwrap() },
        )
        .unwrap();
        let shift = wp(a, l).unwrap();
        // ℘ = (℘ − ℘(a)) + ℘(a): recover its zeros through the fiber over −℘(a).
        let zeros = fiber_lifts(&base, ProjValue::Finite(-shift)).unwrap();
        EllipticFunction::from_divisor(
            l.clone(),
            zeros,
            vec![zero, zero],
            Normalization::Probe { at: z0, value: wp(z0, l).unwrap() },
        )
        .unwrap()
    }

    #[test]
    fn symmetric_fiber() {
        let l = Lattice::shared(c(0.0, 1.0)).unwrap();
        let a = c(0.21, 0.33);
        let z0 = c(0.37, 0.29);
        let zero = c(0.0, 0.0);
        let f = EllipticFunction::from_divisor(
            l.clone(),
            vec![a, -a],
            vec![zero, zero],
            Normalization::Probe { at: z0, value: wp(z0, &l).unwrap() - wp(a, &l).unwrap() },
        )
        .unwrap();
        let target = c(2.5, -1.0);
        let roots = fiber_roots(&f, target.into()).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(l.same_point(roots[0].point, -roots[1].point));
        for r in &roots {
            assert!((f.value(r.point).unwrap() - target).norm() < 1e-10 * target.norm());
        }
    }

    #[test]
    fn double_root_at_two_torsion() {
        let l = Lattice::shared(c(0.0, 1.0)).unwrap();
        let p = wp_function(&l);
        let half = c(0.5, 0.0);
        let roots = fiber_roots(&p, wp(half, &l).unwrap().into()).unwrap();
        assert_eq!(roots.len(), 1, "{roots:?}");
        assert_eq!(roots[0].multiplicity, 2);
        assert!(l.distance(roots[0].point, half) < 1e-8);
    }

    #[test]
    fn random_fiber_and_count() {
        let l = Lattice::shared(c(0.2, 0.9)).unwrap();
        let f = EllipticFunction::random(l.clone(), 4, 17).unwrap();
        let one = ProjValue::Finite(c(1.0, 0.0));
        let lifts = fiber_lifts(&f, one).unwrap();
        assert_eq!(lifts.len(), 4);
        assert_eq!(count_zeros(&f, one).unwrap(), 4);
        assert_eq!(count_zeros(&f, ProjValue::Infinity).unwrap(), 4);
        let g = EllipticFunction::random(l, 5, 3).unwrap();
        assert_eq!(count_zeros(&g, one).unwrap(), 5);
    }

    #[test]
    fn reciprocal_fiber_agrees() {
        let l = Lattice::shared(c(-0.1, 1.2)).unwrap();
        let f = EllipticFunction::random(l.clone(), 3, 8).unwrap();
        let target = c(0.4, 0.7);
        let a = fiber_roots(&f, target.into()).unwrap();
        let b = fiber_roots(&f.recip(), target.inv().into()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(l.same_point(x.point, y.point));
            assert_eq!(x.multiplicity, y.multiplicity);
        }
    }

    #[test]
    fn known_fibers_are_read_from_the_divisor() {
        let l = Lattice::shared(c(0.0, 1.0)).unwrap();
        let f = EllipticFunction::random(l.clone(), 3, 2).unwrap();
        let d = solve_fiber(&f, ProjValue::Infinity).unwrap();
        assert_eq!(d.degree(), 3);
        let z = solve_fiber(&f, ProjValue::Finite(c(0.0, 0.0))).unwrap();
        assert!(z.matches(&l, &Divisor::from_lifts(&l, f.zeros(), &[])));
    }
}
