//! Fundamental domains for Γ¹ and Γ: completeness on random geodesics,
//! witness soundness, the minimal-norm dichotomy and precision stability.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theta_geodesics::brandt::left_ideal_classes;
use theta_geodesics::btree::GeodesicClass;
use theta_geodesics::error::Error;
use theta_geodesics::mat2::Mat2;
use theta_geodesics::quaternion::order::{combine, eichler_order, maximal_order, Order};
use theta_geodesics::quaternion::{make_algebra, Quaternion};
use theta_geodesics::quotient::{
    domains, gamma_classes, random_geodesic, DomainRecord, Group, QuotientContext, QuotientDomain,
};

fn r(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn tame(ell: u64, level: u64) -> Order {
    let alg = make_algebra(ell).unwrap();
    eichler_order(&maximal_order(&alg).unwrap(), level).unwrap()
}

fn setup(ell: u64, level: u64, p: u64, n: u32) -> (QuotientContext, usize, QuotientDomain, QuotientDomain) {
    let ctx = QuotientContext::new(&tame(ell, level), p, n, 20).unwrap();
    let h = left_ideal_classes(&ctx.order).unwrap().class_number();
    let (d1, d) = domains(&ctx, h).unwrap();
    (ctx, h, d1, d)
}

fn reps(d: &QuotientDomain) -> Vec<Mat2> {
    d.edges.iter().map(|g| g.rep.clone()).collect()
}

fn pow_p(p: u64, e: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p)).pow(e as i32)
}

fn is_even_p_power(x: &BigRational, p: u64) -> bool {
    (0..40).any(|e| *x == pow_p(p, 2 * e))
}

#[test]
fn example_domains() {
    let (ctx, h, d1, d) = setup(3, 1, 5, 1);
    assert_eq!(h, 2);
    assert_eq!(
        reps(&d1),
        vec![Mat2::identity(), Mat2::w(), Mat2::from_ints(0, 1, 5, 0), Mat2::from_ints(1, 0, 0, 5)]
    );
    assert!(d1.len() <= 2 * h);
    assert_eq!(reps(&d), vec![Mat2::identity(), Mat2::w()]);
    assert_eq!(d.stabilizers, vec![2, 2]);
    assert_eq!(ctx.find_norm_p_element(), Some(Quaternion::from_ints([1, 2, 0, 0])));
    assert_eq!(ctx.index_gamma_over_gamma1(), 2);
    assert_eq!(d1.len() / d.len(), 2);
    // the two Γ-representatives are inequivalent under both groups
    assert!(ctx.equivalence(&d.edges[0], &d.edges[1], Group::Gamma).unwrap().is_none());
    assert!(ctx.equivalence(&d.edges[0], &d.edges[1], Group::Gamma1).unwrap().is_none());
}

#[test]
fn example_stabilizer_witnesses() {
    let (ctx, _, _, d) = setup(3, 1, 5, 1);
    let w = &d.edges[1];
    let wit = ctx.witnesses(w, w, Group::Gamma1).unwrap();
    // coordinates (0,-2,0,1) in the maximal-order basis give -i; up to sign, i
    let max = maximal_order(&make_algebra(3).unwrap()).unwrap();
    let minus_i = combine(&max.basis(), &[0, -2, 0, 1].map(BigInt::from));
    assert_eq!(minus_i, Quaternion::from_ints([0, -1, 0, 0]));
    assert!(wit.contains(&minus_i.neg()));
    assert_eq!(wit.len(), 2);
    assert!(wit.contains(&Quaternion::one()));
    // the canonical witness is the lexicographically least: i here, 1 when the stabilizer is trivial
    assert_eq!(ctx.equivalence(w, w, Group::Gamma1).unwrap(), Some(Quaternion::from_ints([0, 1, 0, 0])));
    let (ctx2, _, _, d2) = setup(3, 1, 5, 2);
    let g = &d2.edges[d2.stabilizers.iter().position(|&s| s == 1).unwrap()];
    assert_eq!(ctx2.equivalence(g, g, Group::Gamma1).unwrap(), Some(Quaternion::one()));
}

#[test]
fn level_two_domain() {
    let (_, h, d1, d) = setup(3, 1, 5, 2);
    assert_eq!(h, 6);
    assert_eq!(d1.len(), 12);
    assert_eq!(d.len(), 6);
    assert_eq!(d.stabilizers, vec![2, 2, 1, 1, 1, 1]);
}

#[test]
fn hom_lattice_examples() {
    let max = maximal_order(&make_algebra(3).unwrap()).unwrap();
    let ctx = QuotientContext::new(&max, 5, 0, 20).unwrap();
    let id = Mat2::identity();
    let l = ctx.hom_lattice(&id, &id, 0, Group::Gamma1).unwrap();
    assert_eq!(l.minimal_norm(), r(1));
    assert!(l.basis.iter().all(|x| max.contains(x)));
    let five = Mat2::from_ints(1, 0, 0, 5);
    assert!(matches!(ctx.hom_lattice(&id, &five, 0, Group::Gamma1), Err(Error::Parity(1))));
    // under Γ the odd case is allowed and contains the norm-5 elements
    let l = ctx.hom_lattice(&id, &five, 0, Group::Gamma).unwrap();
    assert_eq!(l.minimal_norm(), r(5));
}

fn sample(rng: &mut ChaCha8Rng, p: u64, n: u32) -> GeodesicClass {
    let steps = rng.gen_range(0..6);
    random_geodesic(p, n, steps, |k| rng.gen_range(0..k))
}

#[test]
fn domain_completeness_and_uniqueness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [1u32, 2] {
        let (ctx, _, d1, d) = setup(3, 1, 5, n);
        for _ in 0..200 {
            let g = sample(&mut rng, 5, n);
            for (dom, group) in [(&d1, Group::Gamma1), (&d, Group::Gamma)] {
                let hits: Vec<usize> = (0..dom.len())
                    .filter(|&i| ctx.equivalence(&g, &dom.edges[i], group).unwrap().is_some())
                    .collect();
                assert_eq!(hits.len(), 1, "{g:?} under {group:?}");
                let (i, w) = ctx.locate(&g, &dom.edges, group).unwrap().unwrap();
                assert_eq!(ctx.act(&w, &g).unwrap(), dom.edges[i]);
            }
        }
    }
}

#[test]
fn gluing_witnesses_are_sound() {
    for (ell, level, p, n) in [(3u64, 1u64, 5u64, 1u32), (3, 1, 5, 2), (5, 1, 3, 1), (3, 7, 5, 1)] {
        let (ctx, h, d1, _) = setup(ell, level, p, n);
        assert!(d1.len() <= 2 * h, "ℓ={ell} N={level} p={p}");
        assert!(!d1.gluings.is_empty());
        for gl in &d1.gluings {
            assert_eq!(ctx.act(&gl.witness, &gl.from).unwrap(), d1.vertices[gl.to]);
            assert!(is_even_p_power(&ctx.tame.alg.norm(&gl.witness), p));
        }
    }
}

/// Γ¹(1) elements x/p with n(x) = p² move a geodesic to an equivalent one,
/// and the returned witness reproduces the translate.
#[test]
fn translates_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (ctx, _, _, _) = setup(3, 1, 5, 2);
    let gens = ctx.order.elements_of_norm(&r(25));
    assert!(!gens.is_empty());
    for _ in 0..40 {
        let g = sample(&mut rng, 5, 2);
        let x = &gens[rng.gen_range(0..gens.len())];
        let y = ctx.act(x, &g).unwrap();
        let w = ctx.equivalence(&g, &y, Group::Gamma1).unwrap().expect("translate must be equivalent");
        assert_eq!(ctx.act(&w, &g).unwrap(), y);
    }
}

#[test]
fn minimal_norm_dichotomy() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [1u32, 2] {
        let (ctx, _, d1, _) = setup(3, 1, 5, n);
        for _ in 0..60 {
            let g = sample(&mut rng, 5, n);
            for h in &d1.edges {
                let l = match ctx.hom_lattice(&g.rep, &h.rep, n, Group::Gamma1) {
                    Err(Error::Parity(_)) => continue,
                    other => other.unwrap(),
                };
                let min = l.minimal_norm();
                let target = l.target_norm(5);
                assert!(min >= target);
                assert_eq!(min == target, ctx.equivalence(&g, h, Group::Gamma1).unwrap().is_some());
            }
        }
    }
}

#[test]
fn domains_are_stable_under_precision() {
    for n in [1u32, 2] {
        let ctx = QuotientContext::new(&tame(3, 1), 5, n, 20).unwrap();
        let h = left_ideal_classes(&ctx.order).unwrap().class_number();
        let (a1, a) = domains(&ctx, h).unwrap();
        let (b1, b) = domains(&ctx.with_precision(25).unwrap(), h).unwrap();
        let (c1, c) = domains(&ctx.with_precision(40).unwrap(), h).unwrap();
        assert_eq!(a1.record(), b1.record());
        assert_eq!(a.record(), b.record());
        assert_eq!(a1.record(), c1.record());
        assert_eq!(a.record(), c.record());
    }
}

#[test]
fn other_primes_close_up() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (ctx, h, d1, d) = setup(5, 1, 3, 1);
    assert!(d1.len() <= 2 * h);
    assert_eq!(d.len(), d1.len() / ctx.index_gamma_over_gamma1() as usize);
    for v in &d1.vertices {
        for e in v.extend() {
            assert!(ctx.locate(&e, &d1.edges, Group::Gamma1).unwrap().is_some());
        }
    }
    for _ in 0..50 {
        let g = sample(&mut rng, 3, 1);
        assert!(ctx.locate(&g, &d.edges, Group::Gamma).unwrap().is_some());
    }
}

/// Presence of norm-p elements in R_N, decided by a full coordinate box in the
/// maximal-order basis (|coordinates| ≤ 2√p + 2 covers norm p for ℓ = 3).
#[test]
fn norm_p_elements_against_enumeration() {
    let max = maximal_order(&make_algebra(3).unwrap()).unwrap();
    for (level, p, n) in [(1u64, 7u64, 1u32), (1, 5, 1), (1, 7, 2), (1, 11, 1), (7, 5, 1), (35, 11, 1)] {
        let t = tame(3, level);
        let ctx = QuotientContext::new(&t, p, n, 20).unwrap();
        let mut found = vec![];
        let rad = 2 * (p as i64).isqrt() + 2;
        for a in -rad..=rad {
            for b in -rad..=rad {
                for c in -rad..=rad {
                    for e in -rad..=rad {
                        let x = combine(&max.basis(), &[a, b, c, e].map(BigInt::from));
                        if max.alg.norm(&x) == r(p as i64) && t.contains(&x) {
                            found.push(x);
                        }
                    }
                }
            }
        }
        let got = ctx.find_norm_p_element();
        if !found.is_empty() {
            let x = got.unwrap();
            assert_eq!(max.alg.norm(&x), r(p as i64));
            assert!(found.contains(&x) || found.contains(&x.neg()));
            assert_eq!(ctx.index_gamma_over_gamma1(), 2);
        } else if let Some(x) = got {
            assert_eq!(max.alg.norm(&x), r((p * p * p) as i64), "N={level} p={p}");
        }
    }
}

#[test]
fn gamma_merging() {
    let (ctx, _, d1, d) = setup(3, 1, 5, 1);
    // already at the class number: unchanged
    let same = gamma_classes(&ctx, &d1, d1.len()).unwrap();
    assert_eq!(reps(&same), reps(&d1));
    assert_eq!(same.group, Group::Gamma);
    // Γ-representatives with their translates by δ are merged back
    let delta = ctx.find_norm_p_element().unwrap();
    let mut synthetic = d1.clone();
    synthetic.edges = vec![d.edges[0].clone(), d.edges[1].clone()];
    synthetic.edges.extend(d.edges.iter().map(|g| ctx.act(&delta, g).unwrap()));
    synthetic.stabilizers = vec![2; 4];
    let merged = gamma_classes(&ctx, &synthetic, 2).unwrap();
    assert_eq!(reps(&merged), reps(&d));
    assert!(gamma_classes(&ctx, &synthetic, 3).is_err());
    assert!(gamma_classes(&ctx, &d, 2).is_err());
}

#[test]
fn stabilizer_counts_witnesses() {
    let (ctx, _, _, _) = setup(3, 1, 5, 2);
    let g = GeodesicClass::privileged(5, 2);
    let s = ctx.stabilizer_order(&g).unwrap();
    let units = ctx.witnesses(&g, &g, Group::Gamma1).unwrap();
    assert_eq!(s, units.len());
    assert!(units.contains(&Quaternion::one()));
}

#[test]
fn domain_records_round_trip() {
    let (_, _, d1, d) = setup(3, 1, 5, 1);
    for dom in [&d1, &d] {
        let rec = dom.record();
        let json = serde_json::to_value(&rec).unwrap();
        for key in ["group", "p", "ell", "N", "n", "E", "P", "stabilizers", "schema"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let back: DomainRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, rec);
        let rebuilt = back.to_domain().unwrap();
        assert_eq!(reps(&rebuilt), reps(dom));
        assert_eq!(rebuilt.stabilizers, dom.stabilizers);
    }
}
