//! Splitting an elliptic Bloch relation into antisymmetry relations and
//! relations of degree-3 functions whose zeros sum to 0.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::bloch::{bloch_relation_value, delta_beta, triple_sum, ZEMinusSum};
use crate::efield::{complex, pair, EllipticFunction};
use crate::error::{Error, Result};
use crate::reduction::{reduce, Budget, ReductionCertificate};
use crate::torus::{Lattice, TorusPoint};

/// The nine points of a degree-3 relation: zeros `α`, fiber over 1 `β`, poles `γ`, with `Σα ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rel3Instance {
    pub coeff: i64,
    pub alpha: [TorusPoint; 3],
    pub beta: [TorusPoint; 3],
    pub gamma: [TorusPoint; 3],
}

impl Rel3Instance {
    /// `Σᵢⱼ D_τ(αᵢ − βⱼ) + D_τ(βᵢ − γⱼ) + D_τ(γᵢ − αⱼ)`.
    pub fn value(&self, lattice: &Lattice) -> f64 {
        let l = |p: &[TorusPoint; 3]| p.map(|x| x.lift);
        triple_sum(lattice, &l(&self.alpha), &l(&self.beta), &l(&self.gamma))
    }

    /// `β(g ∧ (1 − g))` written in the nine points.
    pub fn zeminus(&self, lattice: &Arc<Lattice>) -> ZEMinusSum {
        let mut s = ZEMinusSum::new(lattice.clone());
        for i in 0..3 {
            for j in 0..3 {
                s.insert_lift(self.alpha[i].lift - self.beta[j].lift, 1);
                s.insert_lift(self.alpha[i].lift - self.gamma[j].lift, -1);
                s.insert_lift(self.gamma[i].lift - self.beta[j].lift, -1);
                s.insert_lift(self.gamma[i].lift - self.gamma[j].lift, 1);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rel3Json {
    pub coeff: i64,
    pub alpha: Vec<[f64; 2]>,
    pub beta: Vec<[f64; 2]>,
    pub gamma: Vec<[f64; 2]>,
}

impl Rel3Instance {
    pub fn to_json(&self) -> Rel3Json {
        let v = |p: &[TorusPoint; 3]| p.iter().map(|x| pair(x.lift)).collect();
        Rel3Json { coeff: self.coeff, alpha: v(&self.alpha), beta: v(&self.beta), gamma: v(&self.gamma) }
    }

    pub fn from_json(doc: &Rel3Json, lattice: &Lattice) -> Result<Self> {
        let pts = |v: &Vec<[f64; 2]>| -> Result<[TorusPoint; 3]> {
            if v.len() != 3 {
                return Err(Error::Format("relation triples need exactly three points".into()));
            }
            Ok([0, 1, 2].map(|i| lattice.point(complex(v[i]))))
        };
        Ok(Rel3Instance { coeff: doc.coeff, alpha: pts(&doc.alpha)?, beta: pts(&doc.beta)?, gamma: pts(&doc.gamma)? })
    }
}

/// Checks attached to a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// Elliptic Bloch relation value of the input.
    pub input_value: f64,
    /// `Σ k·value` over the degree-3 instances.
    pub rel3_sum: f64,
    pub analytic_residual: f64,
    pub analytic: bool,
    /// `β∘δ(f) = Σ k·β∘δ(terminal)` in `ℤ[E]⁻`.
    pub zeminus: bool,
    /// Every terminal of degree at most 2 has `β∘δ = 0`.
    pub low_degree_vanish: bool,
    pub steps: usize,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.analytic && self.zeminus && self.low_degree_vanish
    }
}

/// The zeros, fiber over 1 and poles of a degree-3 function, after
/// translating so that its zeros sum to 0.
pub fn rel3_from_terminal(g: &EllipticFunction, coeff: i64) -> Result<Rel3Instance> {
    if g.degree() != 3 {
        return Err(Error::invalid("degree-3 function expected"));
    }
    let l = g.lattice();
    let zero_sum: num_complex::Complex64 = g.zeros().iter().sum();
    let rho = l.third_point(&l.point(zero_sum));
    let h = g.translate(&rho);
    let fiber = h.fiber_over_one()?;
    let pts = |v: &[num_complex::Complex64]| [0, 1, 2].map(|i| l.point(v[i]));
    Ok(Rel3Instance { coeff, alpha: pts(h.zeros()), beta: pts(&fiber), gamma: pts(h.poles()) })
}

/// Reduces `f` and rewrites its Bloch relation through the degree-3 terminals.
pub fn decompose_bloch_relation(
    f: &EllipticFunction,
    budget: Budget,
    tol_analytic: f64,
) -> Result<(Vec<Rel3Instance>, DecompositionReport)> {
    decompose_certificate(&reduce(f, budget)?, tol_analytic)
}

/// The same as [`decompose_bloch_relation`] starting from an existing certificate.
pub fn decompose_certificate(
    cert: &ReductionCertificate,
    tol_analytic: f64,
) -> Result<(Vec<Rel3Instance>, DecompositionReport)> {
    let f = &cert.target;
    let lattice = f.lattice().clone();
    let mut instances = Vec::new();
    let mut low_degree_vanish = true;
    let mut rhs = ZEMinusSum::new(lattice.clone());
    for (k, g) in cert.terminals.terms() {
        if g.degree() <= 2 {
            if !delta_beta(g)?.is_zero() {
                low_degree_vanish = false;
            }
            continue;
        }
        let inst = rel3_from_terminal(g, *k)?;
        rhs.add_scaled(&inst.zeminus(&lattice), *k);
        instances.push(inst);
    }
    let input_value = bloch_relation_value(f)?;
    let rel3_sum: f64 = instances.iter().map(|i| i.coeff as f64 * i.value(&lattice)).sum();
    let lhs = delta_beta(f)?;
    let residual = (input_value - rel3_sum).abs();
    let report = DecompositionReport {
        input_value,
        rel3_sum,
        analytic_residual: residual,
        analytic: residual < tol_analytic,
        zeminus: lhs.equals(&rhs),
        low_degree_vanish,
        steps: cert.steps.len(),
    };
    Ok((instances, report))
}

/// JSON form of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub tau: [f64; 2],
    pub instances: Vec<Rel3Json>,
    pub report: DecompositionReport,
}
