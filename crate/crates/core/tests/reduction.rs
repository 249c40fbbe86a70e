use std::sync::Arc;

use ellbloch::bloch::{bloch_relation_value, delta_beta};
use ellbloch::reduction::interpolate::classify_shape;
use ellbloch::reduction::*;
use ellbloch::rootfind::fiber_roots;
use ellbloch::{EllipticFunction, Lattice, Normalization, ProjValue, TorusPoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lattice() -> Arc<Lattice> {
    Lattice::shared(c(0.1, 1.1)).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Mutually separated random points.
fn points(l: &Lattice, n: usize, rng: &mut ChaCha8Rng) -> Vec<TorusPoint> {
    let mut out: Vec<TorusPoint> = Vec::new();
    while out.len() < n {
        let p = l.point(l.from_coords(rng.gen(), rng.gen()));
        if out.iter().all(|q| l.distance(p.lift, q.lift) > 0.05) {
            out.push(p);
        }
    }
    out
}

#[test]
fn h_has_degree_eight_and_two_torsion_invariance() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = points(&l, 4, &mut rng);
    let h = h_function(&l, &p[0], &p[1], &p[2], &p[3]).unwrap();
    assert_eq!(h.degree(), 8);
    let roots = fiber_roots(&h, ProjValue::Finite(c(0.3, 0.2))).unwrap();
    assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 8);
    for z in [c(0.13, 0.27), c(0.71, 0.05), c(0.4, 0.8)] {
        let base = h.value(z).unwrap();
        for t in l.two_torsion() {
            assert!(rel(h.value(z + t.lift).unwrap(), base) < 1e-8);
        }
        let direct = h_direct(&l, [p[0], p[1], p[2], p[3]], z).unwrap().finite().unwrap();
        assert!(rel(base, direct) < 1e-8);
    }
}

#[test]
fn one_minus_h_swaps_middle_points() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = points(&l, 4, &mut rng);
    let h = h_function(&l, &p[0], &p[1], &p[2], &p[3]).unwrap();
    let swapped = h_function(&l, &p[0], &p[2], &p[1], &p[3]).unwrap();
    assert!(h.one_minus().unwrap().functions_equal(&swapped));
}

#[test]
fn find_mu_meets_all_conditions() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = points(&l, 4, &mut rng);
    let m = c(-0.4, 0.9);
    let mu = find_mu(&l, &p[0], &p[1], &p[2], &p[3], m).unwrap();
    let h = h_function(&l, &p[0], &p[1], &p[2], &p[3]).unwrap();
    for t in l.two_torsion() {
        let v = h.value(mu.lift + t.lift).unwrap();
        assert!((v - m).norm() < 1e-10 * m.norm().max(1.0));
    }
    assert!(!l.same_point(mu.lift, p[0].lift) && !l.same_point(mu.lift, p[1].lift));
    let (a, b, g, d) = (p[0].lift, p[1].lift, p[2].lift, p[3].lift);
    for s in [a + g, b + d, a + d, b + g, a + b, d + g] {
        assert!(!l.same_point(2.0 * mu.lift, s));
    }
}

#[test]
fn find_mu_rejects_excluded_values() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let p = points(&l, 4, &mut rng);
    assert!(find_mu(&l, &p[0], &p[1], &p[2], &p[3], c(1.0, 0.0)).is_err());
    assert!(h_function(&l, &p[0], &p[0], &p[2], &p[3]).is_err());
}

#[test]
fn interpolation_hits_prescribed_values() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let p = points(&l, 4, &mut rng);
        let vals: Vec<ProjValue> = (0..4)
            .map(|_| ProjValue::Finite(c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))))
            .collect();
        let f = interpolate_degree2(&l, &p[0], &p[1], &p[2], &p[3], vals[0], vals[1], vals[2], vals[3]).unwrap();
        assert_eq!(f.degree(), 2);
        for (pt, v) in p.iter().zip(&vals) {
            assert!(f.evaluate(pt.lift).close_to(*v, 1e-8));
        }
    }
}

#[test]
fn interpolation_with_zero_and_pole_values() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = points(&l, 4, &mut rng);
    let zero = ProjValue::Finite(c(0.0, 0.0));
    let v = c(0.7, -1.3);
    let f = interpolate_degree2(&l, &p[0], &p[1], &p[2], &p[3], zero, ProjValue::Infinity, ProjValue::Finite(c(1.0, 0.0)), ProjValue::Finite(v))
        .unwrap();
    let d = f.divisor();
    assert_eq!(d.multiplicity_at(&l, p[0].lift), 1);
    assert_eq!(d.multiplicity_at(&l, p[1].lift), -1);

    let m = c(0.35, 0.6);
    let g = interpolate_degree2(&l, &p[0], &p[1], &p[2], &p[3], zero, ProjValue::Infinity, ProjValue::Finite(m), ProjValue::Finite(c(1.0, 0.0)))
        .unwrap();
    let ratio = g.value(p[2].lift).unwrap() / g.value(p[3].lift).unwrap();
    assert!(rel(ratio, m) < 1e-9);
}

fn witness_from(p: &[TorusPoint]) -> GenericityWitness {
    GenericityWitness { alpha1: p[0], alpha2: p[1], beta1: p[2], beta2: p[3], gamma1: p[4], gamma2: p[5] }
}

#[test]
fn auxiliary_is_one_on_betas_and_usually_cubic() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut cubic = 0;
    for _ in 0..6 {
        let w = witness_from(&points(&l, 6, &mut rng));
        let (g, shape) = auxiliary_degree3(&l, &w).unwrap();
        for b in [w.beta1, w.beta2] {
            assert!(rel(g.value(b.lift).unwrap(), c(1.0, 0.0)) < 1e-8);
        }
        assert_eq!(classify_shape(&g, &w), Some(shape));
        if shape == Shape::Cubic {
            assert_eq!(g.degree(), 3);
            cubic += 1;
        }
    }
    assert!(cubic >= 4);
}

#[test]
fn shape_classifier_on_hand_built_divisors() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let p = points(&l, 7, &mut rng);
    let w = witness_from(&p);
    let (a1, a2, g1, g2) = (p[0].lift, p[1].lift, p[4].lift, p[5].lift);
    let build = |z: Vec<Complex64>, q: Vec<Complex64>| {
        EllipticFunction::from_divisor(l.clone(), z, q, Normalization::Scale(c(1.0, 0.0))).unwrap()
    };
    let extra = p[6].lift;
    let cubic = build(vec![a1, a2, extra], vec![g1, g2, a1 + a2 + extra - g1 - g2]);
    assert_eq!(classify_shape(&cubic, &w), Some(Shape::Cubic));
    let poles_deg = build(vec![a1, a2], vec![g1, a1 + a2 - g1]);
    assert_eq!(classify_shape(&poles_deg, &w), Some(Shape::PolesDegenerate));
    let zeros_deg = build(vec![a1, g1 + g2 - a1], vec![g1, g2]);
    assert_eq!(classify_shape(&zeros_deg, &w), Some(Shape::ZerosDegenerate));
    let other = build(vec![extra, a1 + a2 - extra], vec![g1, a1 + a2 - g1]);
    assert_eq!(classify_shape(&other, &w), None);
}

/// Five-term children of `x = aux, y = f` other than `[x]` and `−[y]`.
fn children(aux: &EllipticFunction, f: &EllipticFunction) -> Vec<EllipticFunction> {
    ellbloch::bloch::five_term_terms(aux, f)
        .unwrap()
        .into_iter()
        .skip(2)
        .map(|(_, g)| g)
        .collect()
}

#[test]
fn special_configuration_drops_degree() {
    let l = lattice();
    // 4[a] − 4[a+t] with t of order 2: every choice of pairs has α₁+α₂ ≡ β₁+β₂.
    let a = c(0.21, 0.17);
    let t = l.two_torsion()[1].lift;
    let f = EllipticFunction::from_divisor(l.clone(), vec![a; 4], vec![a + t; 4], Normalization::Scale(c(0.8, 0.3)))
        .unwrap();
    assert!(genericity_witness(&f).unwrap().is_none());
    let Configuration::Special(w, case) = classify(&f).unwrap() else {
        panic!("expected a special configuration");
    };
    let h = lemma_sp_auxiliary(&l, &w, case).unwrap();
    assert_eq!(h.degree(), 2);
    assert!(h.evaluate(w.alpha1.lift).close_to(ProjValue::Finite(c(0.0, 0.0)), 1e-8));
    assert!(h.evaluate(w.gamma1.lift).is_infinite());
    assert!(rel(h.value(w.beta1.lift).unwrap(), c(1.0, 0.0)) < 1e-8);
    for g in children(&h, &f) {
        assert!(g.degree() < f.degree());
    }
    let (cert, stats) = reduce_with_stats(&f, Budget::default()).unwrap();
    assert!(stats.special_steps >= 1);
    assert!(verify_certificate(&cert, 1e-6).passed());
}

#[test]
fn special_cases_built_from_witnesses() {
    let l = lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let p = points(&l, 5, &mut rng);
    let (a1, a2, b1, g1, g2) = (p[0], p[1], p[2], p[3], p[4]);
    let cases = [
        (Coincidence::AlphaBeta, l.point(a1.lift + a2.lift - b1.lift), g2),
        (Coincidence::BetaGamma, l.point(g1.lift + g2.lift - b1.lift), g2),
        (Coincidence::AlphaGamma, l.point(a1.lift + p[2].lift), l.point(a1.lift + a2.lift - g1.lift)),
    ];
    for (case, b2, gamma2) in cases {
        let w = GenericityWitness { alpha1: a1, alpha2: a2, beta1: b1, beta2: b2, gamma1: g1, gamma2 };
        assert_eq!(w.sum_conditions(&l).0, Some(case));
        let h = lemma_sp_auxiliary(&l, &w, case).unwrap();
        assert_eq!(h.degree(), 2);
        assert!(rel(h.value(b1.lift).unwrap(), c(1.0, 0.0)) < 1e-8);
        if case != Coincidence::AlphaGamma {
            assert!(rel(h.value(b2.lift).unwrap(), c(1.0, 0.0)) < 1e-8);
            let fiber: Complex64 = h.fiber_over_one().unwrap().iter().sum();
            assert!(l.same_point(fiber, b1.lift + b2.lift));
        }
    }
}

#[test]
fn degenerate_input_takes_constant_detour() {
    let l = lattice();
    let a = c(0.3, 0.4);
    let b = c(0.62, 0.21);
    let u = EllipticFunction::from_divisor(l.clone(), vec![a; 4], vec![b, b, b, 4.0 * a - 3.0 * b], Normalization::Scale(c(1.0, 0.0)))
        .unwrap();
    let f = u.one_minus().unwrap();
    assert_eq!(f.degree(), 4);
    assert_eq!(classify(&f).unwrap(), Configuration::Degenerate);
    let (cert, stats) = reduce_with_stats(&f, Budget::default()).unwrap();
    assert!(stats.detours >= 1);
    assert!(verify_certificate(&cert, 1e-6).passed());
}

#[test]
fn reduce_small_degree_is_trivial() {
    let l = lattice();
    for n in [2, 3] {
        let f = EllipticFunction::random(l.clone(), n, 40 + n as u64).unwrap();
        let cert = reduce(&f, Budget::default()).unwrap();
        assert!(cert.steps.is_empty());
        assert_eq!(cert.terminals.terms().len(), 1);
        assert!(verify_certificate(&cert, 1e-6).passed());
    }
}

#[test]
fn reduce_random_degree_four_to_six() {
    let l = lattice();
    for (n, seed) in [(4, 2), (5, 3), (6, 4)] {
        let f = EllipticFunction::random(l.clone(), n, seed).unwrap();
        let cert = reduce(&f, Budget::default()).unwrap();
        assert!(!cert.steps.is_empty());
        assert!(cert.terminals.terms().iter().all(|(_, g)| g.degree() <= 3));
        let report = verify_certificate(&cert, 1e-6);
        assert!(report.passed(), "{report:?}");
    }
}

#[test]
fn reduce_respects_degree_limit() {
    let l = lattice();
    let f = EllipticFunction::random(l, 5, 1).unwrap();
    let budget = Budget { max_degree: 4, ..Budget::default() };
    assert!(matches!(reduce(&f, budget), Err(ellbloch::Error::Budget(_))));
}

#[test]
fn tampered_certificate_fails() {
    let l = lattice();
    let f = EllipticFunction::random(l.clone(), 4, 21).unwrap();
    let cert = reduce(&f, Budget::default()).unwrap();
    let mut flipped = cert.clone();
    flipped.steps[0].sign = -flipped.steps[0].sign;
    let report = verify_certificate(&flipped, 1e-6);
    assert!(!report.formal && !report.passed());

    let mut dropped = cert.clone();
    let mut terms = ellbloch::bloch::FunctionSum::new();
    for (k, g) in cert.terminals.terms().iter().skip(1) {
        terms.add(*k, g.clone()).unwrap();
    }
    dropped.terminals = terms;
    assert!(!verify_certificate(&dropped, 1e-6).passed());
}

#[test]
fn certificate_json_round_trip() {
    let l = lattice();
    let f = EllipticFunction::random(l.clone(), 4, 22).unwrap();
    let cert = reduce(&f, Budget::default()).unwrap();
    let doc = cert.to_json();
    let text = serde_json::to_string(&doc).unwrap();
    let back: certificate::CertificateJson = serde_json::from_str(&text).unwrap();
    assert_eq!(back, doc);
    let rebuilt = ReductionCertificate::from_json(&back, l.eps()).unwrap();
    assert_eq!(rebuilt.to_json(), doc);
    assert!(verify_certificate(&rebuilt, 1e-6).passed());
}

#[test]
fn decompose_degree_two_is_empty() {
    let l = lattice();
    let f = EllipticFunction::random(l, 2, 30).unwrap();
    let (inst, report) = decompose_bloch_relation(&f, Budget::default(), 1e-6).unwrap();
    assert!(inst.is_empty());
    assert!(report.passed());
    assert!(bloch_relation_value(&f).unwrap().abs() < 1e-9);
}

#[test]
fn decompose_zero_sum_cubic_is_identity() {
    let l = lattice();
    let zeros = vec![c(0.1, 0.2), c(0.45, 0.3), c(-0.55, -0.5)];
    let poles = vec![c(0.7, 0.05), c(0.3, 0.8), c(-1.0, -0.85)];
    let f = EllipticFunction::from_divisor(l.clone(), zeros.clone(), poles, Normalization::Scale(c(0.6, 0.2))).unwrap();
    let (inst, report) = decompose_bloch_relation(&f, Budget::default(), 1e-6).unwrap();
    assert_eq!(inst.len(), 1);
    assert_eq!(inst[0].coeff, 1);
    for z in &zeros {
        assert!(inst[0].alpha.iter().any(|p| l.same_point(p.lift, *z)));
    }
    assert!(report.passed());
    assert!((inst[0].value(&l) - bloch_relation_value(&f).unwrap()).abs() < 1e-9);
}

#[test]
fn decompose_random_degree_five() {
    let l = lattice();
    let f = EllipticFunction::random(l.clone(), 5, 31).unwrap();
    let (inst, report) = decompose_bloch_relation(&f, Budget::default(), 1e-6).unwrap();
    assert!(!inst.is_empty());
    assert!(report.passed(), "{report:?}");
    for i in &inst {
        let s: Complex64 = i.alpha.iter().map(|p| p.lift).sum();
        assert!(l.same_point(s, c(0.0, 0.0)));
    }
    let lhs = delta_beta(&f).unwrap();
    assert!(!lhs.is_zero());
}
