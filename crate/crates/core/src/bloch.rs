//! The formal side of elliptic Bloch relations: `ℤ[E]⁻`, the maps `β` and
//! `β∘δ`, the elliptic dilogarithm `D_τ` and its extension to `ℤ[E]⁻`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::dilog::bloch_wigner_unchecked;
use crate::efield::{complex, pair, EllipticFunction, FunctionJson};
use crate::error::{Error, Result};
use crate::torus::{Lattice, TorusPoint};

/// Terms of `D_τ` are dropped once `|q|^{n−v}·(1 + 2πn·Im τ)` falls below this.
pub const EDILOG_CUTOFF: f64 = 1e-15;

/// An element of `ℤ[E]⁻`: integer combinations of points modulo `[ξ] + [−ξ]`.
///
/// Each class is stored once, at the representative chosen by
/// [`Lattice::neg_canonical`] when the class was first inserted. Coefficients
/// of 2-torsion points live in `ℤ/2` and are kept as 0 or 1.
#[derive(Debug, Clone)]
pub struct ZEMinusSum {
    lattice: Arc<Lattice>,
    terms: Vec<(TorusPoint, i64)>,
}

impl ZEMinusSum {
    pub fn new(lattice: Arc<Lattice>) -> Self {
        ZEMinusSum { lattice, terms: Vec::new() }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// Adds `k·[p]`.
    pub fn insert(&mut self, p: TorusPoint, k: i64) {
        if k == 0 {
            return;
        }
        let l = &self.lattice;
        let torsion = l.is_two_torsion(&p);
        let hit = self.terms.iter().position(|(q, _)| l.same_point(q.lift, p.lift));
        let (idx, delta) = match hit {
            Some(i) => (Some(i), k),
            None if torsion => (None, k),
            None => match self.terms.iter().position(|(q, _)| l.same_point(q.lift, -p.lift)) {
                Some(i) => (Some(i), -k),
                None => (None, k),
            },
        };
        match idx {
            Some(i) => {
                let c = &mut self.terms[i].1;
                *c += delta;
                if torsion {
                    *c = c.rem_euclid(2);
                }
                if *c == 0 {
                    self.terms.remove(i);
                }
            }
            None => {
                let (q, s) = l.neg_canonical(&p);
                let c = if torsion { delta.rem_euclid(2) } else { s * delta };
                if c != 0 {
                    self.terms.push((q, c));
                }
            }
        }
    }

    pub fn insert_lift(&mut self, z: Complex64, k: i64) {
        let p = self.lattice.point(z);
        self.insert(p, k);
    }

    pub fn add_scaled(&mut self, other: &ZEMinusSum, k: i64) {
        for (p, c) in &other.terms {
            self.insert(*p, k * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms sorted by `(u, v)`.
    pub fn terms(&self) -> Vec<(TorusPoint, i64)> {
        let mut t = self.terms.clone();
        t.sort_by(|a, b| (a.0.u, a.0.v).partial_cmp(&(b.0.u, b.0.v)).unwrap_or(std::cmp::Ordering::Equal));
        t
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Equality in `ℤ[E]⁻`.
    pub fn equals(&self, other: &ZEMinusSum) -> bool {
        let mut d = self.clone();
        d.add_scaled(other, -1);
        d.is_zero()
    }

    pub fn to_json(&self) -> ZEMinusSumJson {
        ZEMinusSumJson {
            tau: pair(self.lattice.tau()),
            terms: self
                .terms()
                .into_iter()
                .map(|(p, c)| PointTerm { point: pair(p.lift), coeff: c })
                .collect(),
        }
    }

    pub fn from_json(doc: &ZEMinusSumJson, lattice: Arc<Lattice>) -> Result<Self> {
        if complex(doc.tau) != lattice.tau() {
            return Err(Error::Format("sum tau does not match the lattice".into()));
        }
        let mut s = ZEMinusSum::new(lattice);
        for t in &doc.terms {
            let z = complex(t.point);
            crate::dilog::ensure_finite(z, "point")?;
            s.insert_lift(z, t.coeff);
        }
        Ok(s)
    }
}

/// JSON form of a [`ZEMinusSum`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZEMinusSumJson {
    pub tau: [f64; 2],
    pub terms: Vec<PointTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTerm {
    pub point: [f64; 2],
    pub coeff: i64,
}

/// `β(f ∧ g) = Σ nᵢmⱼ [xᵢ − yⱼ]` over the divisors `Σnᵢ[xᵢ]` of `f` and `Σmⱼ[yⱼ]` of `g`.
pub fn beta(f: &EllipticFunction, g: &EllipticFunction) -> ZEMinusSum {
    let lattice = f.lattice().clone();
    let mut s = ZEMinusSum::new(lattice.clone());
    let df = f.divisor();
    let dg = g.divisor();
    for (x, n) in df.entries() {
        for (y, m) in dg.entries() {
            s.insert_lift(x.lift - y.lift, n * m);
        }
    }
    s
}

/// `β(f ∧ (1 − f))`.
pub fn delta_beta(f: &EllipticFunction) -> Result<ZEMinusSum> {
    if f.is_constant() {
        if f.is_constant_value(Complex64::new(1.0, 0.0)) {
            return Err(Error::invalid("[1] is not a generator"));
        }
        return Ok(ZEMinusSum::new(f.lattice().clone()));
    }
    let g = f.one_minus()?;
    Ok(beta(f, &g))
}

/// The elliptic dilogarithm `D_τ(ξ) = Σₙ D(e^{2πi(ξ + nτ)})`.
pub fn edilog(lattice: &Lattice, xi: &TorusPoint) -> f64 {
    let rep = lattice.from_coords(xi.u, xi.v);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let x = (two_pi_i * rep).exp();
    let x_inv = x.inv();
    let q = lattice.nome();
    let qn_abs = q.norm();
    let im_tau = lattice.tau().im;
    let mut sum = bloch_wigner_unchecked(x);
    let mut qn = Complex64::new(1.0, 0.0);
    let mut n = 1usize;
    loop {
        qn *= q;
        sum += bloch_wigner_unchecked(x * qn) - bloch_wigner_unchecked(x_inv * qn);
        let bound = qn_abs.powf(n as f64 - xi.v) * (1.0 + 2.0 * PI * n as f64 * im_tau);
        if bound < EDILOG_CUTOFF || n > 10_000 {
            break;
        }
        n += 1;
    }
    sum
}

/// `D̃_τ` on `ℤ[E]⁻`, summed in `(u, v)` order.
pub fn edilog_sum(s: &ZEMinusSum) -> f64 {
    s.terms().iter().map(|(p, c)| *c as f64 * edilog(&s.lattice, p)).sum()
}

/// The left-hand side of the elliptic Bloch relation for `f`, summed over
/// multiplicity-expanded zeros `α`, fiber over 1 `β` and poles `γ`:
/// `Σᵢⱼ D_τ(αᵢ − βⱼ) + D_τ(βᵢ − γⱼ) + D_τ(γᵢ − αⱼ)`.
pub fn bloch_relation_value(f: &EllipticFunction) -> Result<f64> {
    if f.is_constant() {
        if f.is_constant_value(Complex64::new(1.0, 0.0)) {
            return Err(Error::invalid("[1] is not a generator"));
        }
        return Ok(0.0);
    }
    let alpha = f.zeros();
    let beta = f.fiber_over_one()?;
    let gamma = f.poles();
    Ok(triple_sum(f.lattice(), alpha, &beta, gamma))
}

pub(crate) fn triple_sum(lattice: &Lattice, alpha: &[Complex64], beta: &[Complex64], gamma: &[Complex64]) -> f64 {
    let d = |a: Complex64, b: Complex64| edilog(lattice, &lattice.point(a - b));
    let mut sum = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            sum += d(alpha[i], beta[j]) + d(beta[i], gamma[j]) + d(gamma[i], alpha[j]);
        }
    }
    sum
}

/// `|bloch_relation_value(f)|`.
pub fn bloch_relation_residual(f: &EllipticFunction) -> Result<f64> {
    bloch_relation_value(f).map(f64::abs)
}

/// An element of `ℤ[K ∖ {0, 1}]`, collected under [`EllipticFunction::functions_equal`].
#[derive(Debug, Clone, Default)]
pub struct FunctionSum {
    terms: Vec<(i64, EllipticFunction)>,
}

impl FunctionSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, coeff: i64, f: EllipticFunction) -> Result<()> {
        if coeff == 0 {
            return Ok(());
        }
        if f.is_constant_value(Complex64::new(1.0, 0.0)) {
            return Err(Error::invalid("[1] is not a generator"));
        }
        match self.terms.iter().position(|(_, g)| g.functions_equal(&f)) {
            Some(i) => {
                self.terms[i].0 += coeff;
                if self.terms[i].0 == 0 {
                    self.terms.remove(i);
                }
            }
            None => self.terms.push((coeff, f)),
        }
        Ok(())
    }

    pub fn add_sum(&mut self, other: &FunctionSum, k: i64) -> Result<()> {
        for (c, f) in &other.terms {
            self.add(k * c, f.clone())?;
        }
        Ok(())
    }

    pub fn terms(&self) -> &[(i64, EllipticFunction)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn delta_beta(&self) -> Result<Option<ZEMinusSum>> {
        let mut acc: Option<ZEMinusSum> = None;
        for (c, f) in &self.terms {
            let s = delta_beta(f)?;
            acc.get_or_insert_with(|| ZEMinusSum::new(f.lattice().clone())).add_scaled(&s, *c);
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> FunctionSumJson {
        FunctionSumJson {
            terms: self.terms.iter().map(|(c, f)| FunctionTerm { coeff: *c, f: f.to_json() }).collect(),
        }
    }

    pub fn from_json(doc: &FunctionSumJson, lattice: Arc<Lattice>) -> Result<Self> {
        let mut s = FunctionSum::new();
        for t in &doc.terms {
            s.add(t.coeff, EllipticFunction::from_json(&t.f, lattice.clone())?)?;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSumJson {
    pub terms: Vec<FunctionTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionTerm {
    pub coeff: i64,
    pub f: FunctionJson,
}

/// The five terms `[x] − [y] + [y/x] + [(1−x)/(1−y)] − [(1−x⁻¹)/(1−y⁻¹)]`, uncollected.
pub fn five_term_terms(x: &EllipticFunction, y: &EllipticFunction) -> Result<Vec<(i64, EllipticFunction)>> {
    let one = Complex64::new(1.0, 0.0);
    for f in [x, y] {
        if f.is_constant_value(one) {
            return Err(Error::invalid("five-term arguments must differ from 1"));
        }
    }
    if x.functions_equal(y) {
        return Err(Error::invalid("five-term arguments must differ"));
    }
    let y_over_x = y.div(x)?;
    let third = x.one_minus()?.div(&y.one_minus()?)?;
    let fourth = x.one_minus_reciprocal()?.div(&y.one_minus_reciprocal()?)?;
    Ok(vec![(1, x.clone()), (-1, y.clone()), (1, y_over_x), (1, third), (-1, fourth)])
}

/// [`five_term_terms`] collected into a [`FunctionSum`].
pub fn five_term_sum(x: &EllipticFunction, y: &EllipticFunction) -> Result<FunctionSum> {
    let mut s = FunctionSum::new();
    for (c, f) in five_term_terms(x, y)? {
        s.add(c, f)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efield::Normalization;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lattice() -> Arc<Lattice> {
        Lattice::shared(c(0.15, 0.95)).unwrap()
    }

    fn symmetric(l: &Arc<Lattice>, a: Complex64, seed: f64) -> EllipticFunction {
        let zero = c(0.0, 0.0);
        EllipticFunction::from_divisor(l.clone(), vec![a, -a], vec![zero, zero], Normalization::Scale(c(seed, 0.3)))
            .unwrap()
    }

    #[test]
    fn canonical_form_cancels_negatives_and_torsion() {
        let l = lattice();
        let mut s = ZEMinusSum::new(l.clone());
        s.insert_lift(c(0.3, 0.2), 2);
        s.insert_lift(c(-0.3, -0.2), 2);
        assert!(s.is_zero());
        s.insert_lift(c(0.5, 0.0), 1);
        s.insert_lift(c(0.5, 0.0), 1);
        assert!(s.is_zero());
        s.insert_lift(c(0.0, 0.0), 3);
        assert_eq!(s.terms()[0].1, 1);
        s.insert_lift(c(1.0, 0.0), 1);
        assert!(s.is_zero());
    }

    #[test]
    fn beta_of_symmetric_pair_vanishes() {
        let l = lattice();
        let f = symmetric(&l, c(0.21, 0.33), 1.0);
        let g = symmetric(&l, c(0.41, 0.13), 2.0);
        assert!(beta(&f, &g).is_zero());
        assert!(beta(&f, &f).is_zero());
        let k = EllipticFunction::constant(l, c(3.0, 0.0)).unwrap();
        assert!(beta(&f, &k).is_zero());
    }

    #[test]
    fn beta_is_bilinear_and_antisymmetric() {
        let l = lattice();
        let f = EllipticFunction::random(l.clone(), 3, 1).unwrap();
        let g = EllipticFunction::random(l.clone(), 2, 2).unwrap();
        let h = EllipticFunction::random(l.clone(), 3, 3).unwrap();
        let lhs = beta(&f.mul(&g).unwrap(), &h);
        let mut rhs = beta(&f, &h);
        rhs.add_scaled(&beta(&g, &h), 1);
        assert!(lhs.equals(&rhs));
        let mut anti = beta(&f, &h);
        anti.add_scaled(&beta(&h, &f), 1);
        assert!(anti.is_zero());
    }

    #[test]
    fn edilog_antisymmetry_and_torsion() {
        let l = lattice();
        for k in 0..20 {
            let z = l.from_coords(0.05 * k as f64 + 0.013, 0.9 - 0.041 * k as f64);
            let a = edilog(&l, &l.point(z));
            let b = edilog(&l, &l.point(-z));
            assert!((a + b).abs() < 1e-12, "{z}: {a} {b}");
        }
        for t in l.two_torsion() {
            assert!(edilog(&l, &t).abs() < 1e-12);
        }
    }

    #[test]
    fn edilog_matches_bilateral_sum() {
        let l = lattice();
        let xi = l.point(c(0.31, 0.42));
        let q = l.nome();
        let x = (Complex64::new(0.0, 2.0 * PI) * xi.lift).exp();
        let mut direct = 0.0;
        for n in -40i32..=40 {
            direct += bloch_wigner_unchecked(x * q.powi(n));
        }
        assert!((direct - edilog(&l, &xi)).abs() < 1e-12);
    }

    #[test]
    fn low_degree_and_random_relations() {
        let l = lattice();
        let f = symmetric(&l, c(0.21, 0.33), 0.7);
        assert!(delta_beta(&f).unwrap().is_zero());
        assert!(bloch_relation_residual(&f).unwrap() < 1e-9);
        let g = EllipticFunction::random(l.clone(), 4, 5).unwrap();
        let s = delta_beta(&g).unwrap();
        assert!(!s.is_zero());
        let v = bloch_relation_value(&g).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
        assert!((edilog_sum(&s) - v).abs() < 1e-8);
    }

    #[test]
    fn five_term_kernel() {
        let l = lattice();
        let x = EllipticFunction::random(l.clone(), 2, 10).unwrap();
        let y = EllipticFunction::random(l.clone(), 3, 11).unwrap();
        let s = five_term_sum(&x, &y).unwrap();
        let d = s.delta_beta().unwrap().unwrap();
        assert!(d.is_zero(), "{:?}", d.terms());
        let kx = EllipticFunction::constant(l.clone(), c(2.0, 1.0)).unwrap();
        let ky = EllipticFunction::constant(l, c(-1.0, 0.5)).unwrap();
        let s = five_term_sum(&kx, &ky).unwrap();
        assert!(s.terms().iter().all(|(_, f)| f.is_constant()));
        assert!(five_term_sum(&kx, &kx).is_err());
    }

    #[test]
    fn json_round_trip() {
        let l = lattice();
        let g = EllipticFunction::random(l.clone(), 3, 5).unwrap();
        let s = beta(&g, &EllipticFunction::random(l.clone(), 2, 6).unwrap());
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back = ZEMinusSum::from_json(&serde_json::from_str(&text).unwrap(), l.clone()).unwrap();
        assert!(back.equals(&s));
        assert_eq!(back.to_json(), s.to_json());
        let mut fs = FunctionSum::new();
        fs.add(2, g.clone()).unwrap();
        fs.add(-1, g.recip()).unwrap();
        let text = serde_json::to_string(&fs.to_json()).unwrap();
        let back = FunctionSum::from_json(&serde_json::from_str(&text).unwrap(), l).unwrap();
        assert_eq!(back.to_json(), fs.to_json());
    }
}
