//! Reduction certificates: data, JSON form and independent verification.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::bloch::{delta_beta, edilog_sum, five_term_terms, FunctionSum, FunctionSumJson, ZEMinusSum};
use crate::efield::{complex, EllipticFunction, FunctionJson};
use crate::error::{Error, Result};
use crate::torus::Lattice;

/// Default bound for the analytic check.
pub const DEFAULT_TOL_ANALYTIC: f64 = 1e-6;

/// One use of the five-term relation with arguments `x, y`, weighted by `sign`.
#[derive(Debug, Clone)]
pub struct FiveTermInstance {
    pub x: EllipticFunction,
    pub y: EllipticFunction,
    pub sign: i64,
}

/// Asserts `[target] − terminals = Σ sign·(five-term relation of x, y)`.
#[derive(Debug, Clone)]
pub struct ReductionCertificate {
    pub target: EllipticFunction,
    pub steps: Vec<FiveTermInstance>,
    pub terminals: FunctionSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepJson {
    pub x: FunctionJson,
    pub y: FunctionJson,
    pub sign: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub target: FunctionJson,
    pub steps: Vec<StepJson>,
    pub terminals: Vec<crate::bloch::FunctionTerm>,
}

impl ReductionCertificate {
    pub fn lattice(&self) -> &Arc<Lattice> {
        self.target.lattice()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            target: self.target.to_json(),
            steps: self
                .steps
                .iter()
                .map(|s| StepJson { x: s.x.to_json(), y: s.y.to_json(), sign: s.sign })
                .collect(),
            terminals: self.terminals.to_json().terms,
        }
    }

    /// Rebuilds a certificate on a lattice with the document's `tau` and tolerance `eps`.
    pub fn from_json(doc: &CertificateJson, eps: f64) -> Result<Self> {
        let lattice = Arc::new(Lattice::with_eps(complex(doc.target.tau), eps)?);
        let target = EllipticFunction::from_json(&doc.target, lattice.clone())?;
        let mut steps = Vec::new();
        for s in &doc.steps {
            if s.sign != 1 && s.sign != -1 {
                return Err(Error::Format(format!("step sign must be ±1, got {}", s.sign)));
            }
            steps.push(FiveTermInstance {
                x: EllipticFunction::from_json(&s.x, lattice.clone())?,
                y: EllipticFunction::from_json(&s.y, lattice.clone())?,
                sign: s.sign,
            });
        }
        let terminals = FunctionSum::from_json(&FunctionSumJson { terms: doc.terminals.clone() }, lattice)?;
        Ok(ReductionCertificate { target, steps, terminals })
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `[target] − terminals − Σ sign·five-term` collects to the empty sum.
    pub formal: bool,
    /// The same combination, mapped term by term through `β∘δ`, is 0 in `ℤ[E]⁻`.
    pub zeminus: bool,
    /// `|D̃_τ|` of that combination, summed term by term.
    pub analytic_residual: f64,
    pub analytic: bool,
    /// Every terminal has degree at most 3.
    pub terminals_low_degree: bool,
    pub steps: usize,
    pub terminals: usize,
    /// Left-over terms of the formal check, if any.
    pub leftover_terms: usize,
    /// Set when a check could not be evaluated.
    pub error: Option<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.formal && self.zeminus && self.analytic && self.terminals_low_degree && self.error.is_none()
    }
}

/// Checks a certificate using only its own data.
pub fn verify_certificate(cert: &ReductionCertificate, tol_analytic: f64) -> CertificateReport {
    let mut report = CertificateReport {
        formal: false,
        zeminus: false,
        analytic_residual: f64::NAN,
        analytic: false,
        terminals_low_degree: cert.terminals.terms().iter().all(|(_, f)| f.degree() <= 3),
        steps: cert.steps.len(),
        terminals: cert.terminals.terms().len(),
        leftover_terms: 0,
        error: None,
    };
    if let Err(e) = run_checks(cert, tol_analytic, &mut report) {
        report.error = Some(e.to_string());
    }
    report
}

fn run_checks(cert: &ReductionCertificate, tol: f64, report: &mut CertificateReport) -> Result<()> {
    let mut pieces: Vec<(i64, EllipticFunction)> = vec![(1, cert.target.clone())];
    for (k, f) in cert.terminals.terms() {
        pieces.push((-k, f.clone()));
    }
    for s in &cert.steps {
        for (c, f) in five_term_terms(&s.x, &s.y)? {
            pieces.push((-s.sign * c, f));
        }
    }
    let mut collected = FunctionSum::new();
    for (k, f) in &pieces {
        collected.add(*k, f.clone())?;
    }
    report.leftover_terms = collected.terms().len();
    report.formal = collected.is_empty();

    let mut total = ZEMinusSum::new(cert.lattice().clone());
    let mut analytic = 0.0;
    for (k, f) in &pieces {
        let s = delta_beta(f)?;
        analytic += *k as f64 * edilog_sum(&s);
        total.add_scaled(&s, *k);
    }
    report.zeminus = total.is_zero();
    report.analytic_residual = analytic.abs();
    report.analytic = analytic.abs() < tol;
    Ok(())
}
