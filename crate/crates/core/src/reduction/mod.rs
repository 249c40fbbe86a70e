//! Degree reduction in the pre-Bloch group.
//!
//! [`reduce`] rewrites `[f]` as a combination of generators of degree at most
//! 3 plus five-term relations, recording every relation it uses in a
//! [`ReductionCertificate`]. Each step substitutes `x = g, y = f` into the
//! five-term relation for an auxiliary `g`; the three new non-auxiliary terms
//! have strictly smaller degree and are reduced recursively.

pub mod certificate;
pub mod decompose;
pub mod hfunc;
pub mod interpolate;
pub mod witness;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::bloch::{five_term_terms, FunctionSum};
use crate::efield::EllipticFunction;
use crate::error::{Error, Result};

pub use certificate::{verify_certificate, CertificateReport, FiveTermInstance, ReductionCertificate};
pub use decompose::{decompose_bloch_relation, decompose_certificate, DecompositionReport, Rel3Instance};
pub use hfunc::{find_mu, h_direct, h_function};
pub use interpolate::{auxiliary_degree3, interpolate_degree2, lemma_sp_auxiliary, Shape};
pub use witness::{classify, genericity_witness, Coincidence, Configuration, GenericityWitness};

/// Limits for [`reduce`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// Maximum recursion depth.
    pub max_depth: usize,
    /// Fresh constants tried per constant-substitution detour.
    pub max_retries: usize,
    /// Largest accepted input degree.
    pub max_degree: usize,
    /// Seed for the constants of the detour branch.
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 12, max_retries: 8, max_degree: 8, seed: 0 }
    }
}

/// Counters describing one reduction run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReductionStats {
    pub generic_steps: usize,
    pub special_steps: usize,
    pub detours: usize,
    pub failed_detours: usize,
}

struct Builder {
    steps: Vec<FiveTermInstance>,
    terminals: Vec<(i64, EllipticFunction)>,
    stats: ReductionStats,
    rng: ChaCha8Rng,
    budget: Budget,
}

/// Reduces `[f]` to generators of degree at most 3.
pub fn reduce(f: &EllipticFunction, budget: Budget) -> Result<ReductionCertificate> {
    reduce_with_stats(f, budget).map(|(c, _)| c)
}

pub fn reduce_with_stats(f: &EllipticFunction, budget: Budget) -> Result<(ReductionCertificate, ReductionStats)> {
    if f.is_constant_value(Complex64::new(1.0, 0.0)) {
        return Err(Error::invalid("[1] is not a generator"));
    }
    if f.degree() > budget.max_degree {
        return Err(Error::Budget(format!(
            "input degree {} exceeds the limit {}",
            f.degree(),
            budget.max_degree
        )));
    }
    let mut b = Builder {
        steps: Vec::new(),
        terminals: Vec::new(),
        stats: ReductionStats::default(),
        rng: ChaCha8Rng::seed_from_u64(budget.seed),
        budget,
    };
    reduce_into(&mut b, f, 1, 0, true)?;
    let mut terminals = FunctionSum::new();
    for (k, g) in b.terminals {
        terminals.add(k, g)?;
    }
    Ok((ReductionCertificate { target: f.clone(), steps: b.steps, terminals }, b.stats))
}

fn reduce_into(b: &mut Builder, f: &EllipticFunction, coeff: i64, depth: usize, allow_detour: bool) -> Result<()> {
    let n = f.degree();
    if n <= 3 {
        b.terminals.push((coeff, f.clone()));
        return Ok(());
    }
    if depth >= b.budget.max_depth {
        return Err(Error::Budget(format!("recursion depth {depth} reached at degree {n}")));
    }
    let lattice = f.lattice().clone();
    match classify(f)? {
        Configuration::Generic(w) => {
            let (g, shape) = auxiliary_degree3(&lattice, &w)?;
            log::debug!("degree {n}: generic step, auxiliary shape {shape:?}");
            b.stats.generic_steps += 1;
            step(b, &g, f, coeff, depth, Some(n - 1))
        }
        Configuration::Special(w, case) => {
            let h = lemma_sp_auxiliary(&lattice, &w, case)?;
            log::debug!("degree {n}: special step ({case:?})");
            b.stats.special_steps += 1;
            step(b, &h, f, coeff, depth, Some(n - 1))
        }
        Configuration::Degenerate => {
            if !allow_detour {
                return Err(Error::Budget(format!("second constant detour needed at degree {n}")));
            }
            detour(b, f, coeff, depth)
        }
    }
}

/// Substitutes `x = aux, y = f` and recurses on the three remaining terms.
fn step(
    b: &mut Builder,
    aux: &EllipticFunction,
    f: &EllipticFunction,
    coeff: i64,
    depth: usize,
    max_child_degree: Option<usize>,
) -> Result<()> {
    let terms = five_term_terms(aux, f)?;
    b.steps.push(FiveTermInstance { x: aux.clone(), y: f.clone(), sign: -coeff });
    // terms: [x], −[y], [y/x], [(1−x)/(1−y)], −[(1−x⁻¹)/(1−y⁻¹)]; drop −[y].
    let children: Vec<_> = terms
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i != 1)
        .map(|(_, t)| t)
        .collect();
    for (i, (c, g)) in children.iter().enumerate() {
        if i > 0 {
            if let Some(limit) = max_child_degree {
                if g.degree() > limit {
                    return Err(Error::numerical(format!(
                        "five-term term has degree {} above {limit}",
                        g.degree()
                    )));
                }
            }
        }
        let allow = max_child_degree.is_some();
        reduce_into(b, g, coeff * c, depth + 1, allow)?;
    }
    Ok(())
}

/// Substitutes a random constant for `x`; the new terms keep the degree of `f`.
fn detour(b: &mut Builder, f: &EllipticFunction, coeff: i64, depth: usize) -> Result<()> {
    let lattice = f.lattice().clone();
    let mut last = Error::Budget("no constant tried".into());
    for attempt in 0..b.budget.max_retries {
        let r = b.rng.gen_range(0.5..2.0);
        let phi = b.rng.gen_range(0.3..TAU - 0.3);
        let a = EllipticFunction::constant(lattice.clone(), Complex64::from_polar(r, phi))?;
        let (steps, terminals) = (b.steps.len(), b.terminals.len());
        b.stats.detours += 1;
        log::debug!("degree {}: constant detour, attempt {attempt}", f.degree());
        match step(b, &a, f, coeff, depth, None) {
            Ok(()) => return Ok(()),
            Err(e) => {
                log::debug!("detour attempt {attempt} failed: {e}");
                b.steps.truncate(steps);
                b.terminals.truncate(terminals);
                b.stats.failed_detours += 1;
                last = e;
            }
        }
    }
    Err(last)
}
