//! Selecting marked divisor points: generic witnesses and the special
//! configurations where the pairwise sums collide.

use crate::efield::EllipticFunction;
use crate::error::Result;
use crate::torus::{Lattice, TorusPoint};

/// Two zeros, two points of the fiber over 1 and two poles of a function.
///
/// Conditions, numbered as in [`GenericityWitness::conditions`]:
/// 1. `α₁ = α₂` only at a zero of multiplicity ≥ 2, likewise for the poles;
/// 2. `β₁ ≠ β₂`;
/// 3. `α₁+α₂`, `β₁+β₂`, `γ₁+γ₂` mutually different;
/// 4. `α₁+α₂−γ₁−β₁ ≠ 0` and `α₁+α₂−γ₁−β₂ ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericityWitness {
    pub alpha1: TorusPoint,
    pub alpha2: TorusPoint,
    pub beta1: TorusPoint,
    pub beta2: TorusPoint,
    pub gamma1: TorusPoint,
    pub gamma2: TorusPoint,
}

/// Which two of `α₁+α₂`, `β₁+β₂`, `γ₁+γ₂` coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coincidence {
    AlphaBeta,
    BetaGamma,
    AlphaGamma,
}

/// Outcome of the marked-point search for one function.
#[derive(Debug, Clone, PartialEq)]
pub enum Configuration {
    /// All four separation conditions hold.
    Generic(GenericityWitness),
    /// Conditions 1–2 hold and condition 3 fails.
    Special(GenericityWitness, Coincidence),
    /// Condition 1 or 2 fails for every choice.
    Degenerate,
}

impl GenericityWitness {
    /// Conditions 3 and 4 (the ones that depend only on the six points).
    pub fn sum_conditions(&self, lattice: &Lattice) -> (Option<Coincidence>, bool) {
        let sa = self.alpha1.lift + self.alpha2.lift;
        let sb = self.beta1.lift + self.beta2.lift;
        let sg = self.gamma1.lift + self.gamma2.lift;
        let coincidence = if lattice.same_point(sa, sb) {
            Some(Coincidence::AlphaBeta)
        } else if lattice.same_point(sb, sg) {
            Some(Coincidence::BetaGamma)
        } else if lattice.same_point(sa, sg) {
            Some(Coincidence::AlphaGamma)
        } else {
            None
        };
        let base = sa - self.gamma1.lift;
        let fourth = !lattice.same_point(base, self.beta1.lift) && !lattice.same_point(base, self.beta2.lift);
        (coincidence, fourth)
    }

    /// All four conditions, with multiplicities read from `f`.
    pub fn conditions(&self, f: &EllipticFunction) -> [bool; 4] {
        let l = f.lattice();
        let d = f.divisor();
        let first = (!l.same_point(self.alpha1.lift, self.alpha2.lift)
            || d.multiplicity_at(l, self.alpha1.lift) >= 2)
            && (!l.same_point(self.gamma1.lift, self.gamma2.lift) || d.multiplicity_at(l, self.gamma1.lift) <= -2);
        let second = !l.same_point(self.beta1.lift, self.beta2.lift);
        let (c, fourth) = self.sum_conditions(l);
        [first, second, c.is_none(), fourth]
    }
}

fn sorted(lattice: &Lattice, lifts: &[num_complex::Complex64]) -> Vec<TorusPoint> {
    let mut pts: Vec<_> = lifts.iter().map(|&z| lattice.point(z)).collect();
    pts.sort_by(|a, b| (a.u, a.v).partial_cmp(&(b.u, b.v)).unwrap_or(std::cmp::Ordering::Equal));
    pts
}

/// Searches marked points in lexicographic order: unordered index pairs of
/// zeros, unordered pairs of distinct fiber points, ordered pairs of poles
/// (condition 4 is not symmetric in the poles). Index pairs from the
/// multiplicity-expanded lists satisfy condition 1 by construction.
pub fn classify(f: &EllipticFunction) -> Result<Configuration> {
    let l = f.lattice();
    let zeros = sorted(l, f.zeros());
    let fiber = sorted(l, &f.fiber_over_one()?);
    let poles = sorted(l, f.poles());
    let mut special = None;
    for i in 0..zeros.len() {
        for j in i + 1..zeros.len() {
            for p in 0..fiber.len() {
                for q in p + 1..fiber.len() {
                    if l.same_point(fiber[p].lift, fiber[q].lift) {
                        continue;
                    }
                    for r in 0..poles.len() {
                        for s in 0..poles.len() {
                            if r == s {
                                continue;
                            }
                            let w = GenericityWitness {
                                alpha1: zeros[i],
                                alpha2: zeros[j],
                                beta1: fiber[p],
                                beta2: fiber[q],
                                gamma1: poles[r],
                                gamma2: poles[s],
                            };
                            match w.sum_conditions(l) {
                                (None, true) => return Ok(Configuration::Generic(w)),
                                (Some(c), _) if special.is_none() => special = Some((w, c)),
                                _ => {}
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(match special {
        Some((w, c)) => Configuration::Special(w, c),
        None => Configuration::Degenerate,
    })
}

/// The first generic witness, if any.
pub fn genericity_witness(f: &EllipticFunction) -> Result<Option<GenericityWitness>> {
    Ok(match classify(f)? {
        Configuration::Generic(w) => Some(w),
        _ => None,
    })
}
