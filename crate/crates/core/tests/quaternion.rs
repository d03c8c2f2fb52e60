//! Algebras, orders, lattices and splittings, with exhaustive oracles for
//! Hilbert symbols, sublattices, short vectors and lattice indices.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theta_geodesics::btree::GeodesicClass;
use theta_geodesics::linalg::{inverse, Matrix};
use theta_geodesics::mat2::Mat2;
use theta_geodesics::quaternion::enumerate::{eval, short_vectors};
use theta_geodesics::quaternion::lattice::Lattice;
use theta_geodesics::quaternion::order::{combine, eichler_order, maximal_order, sublattices_index_p};
use theta_geodesics::quaternion::splitting::splitting_map;
use theta_geodesics::quaternion::{make_algebra, Quaternion, QuaternionAlgebra};
use theta_geodesics::quotient::{domains, Group, QuotientContext};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn qt(c: [i64; 4], d: i64) -> Quaternion {
    Quaternion::new(c.map(|x| r(x, d)))
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn legendre(a: i64, p: i64) -> i64 {
    let a = a.rem_euclid(p);
    if a == 0 {
        return 0;
    }
    if (1..p).any(|x| x * x % p == a) {
        1
    } else {
        -1
    }
}

/// Hilbert symbol at an odd prime, from the unit/valuation decomposition.
fn hilbert_odd(a: i64, b: i64, q: i64) -> i64 {
    let split = |mut x: i64| {
        let mut v = 0;
        while x % q == 0 {
            x /= q;
            v += 1;
        }
        (v, x)
    };
    let ((al, u), (be, w)) = (split(a), split(b));
    let eps = if (q - 1) / 2 % 2 == 1 && (al * be) % 2 == 1 { -1 } else { 1 };
    let lu = if be % 2 == 1 { legendre(u, q) } else { 1 };
    let lw = if al % 2 == 1 { legendre(w, q) } else { 1 };
    eps * lu * lw
}

fn trace_gram(alg: &QuaternionAlgebra, b: &[Quaternion]) -> Matrix<BigRational> {
    b.iter().map(|x| b.iter().map(|y| alg.mul(x, &y.conj()).trace()).collect()).collect()
}

fn det4(m: &Matrix<BigRational>) -> BigRational {
    theta_geodesics::linalg::det(m)
}

#[test]
fn algebra_parameters_and_ramification() {
    let a3 = make_algebra(3).unwrap();
    assert_eq!((a3.a, a3.b), (-1, -3));
    let a5 = make_algebra(5).unwrap();
    assert_eq!((a5.a, a5.b), (-2, -5));
    let a17 = make_algebra(17).unwrap();
    let q = (3u64..).find(|&q| is_prime(q) && q % 4 == 3 && legendre(17, q as i64) == -1).unwrap();
    assert_eq!((a17.a, a17.b), (-17, -(q as i64)));
    assert!(make_algebra(2).is_err());
    assert!(make_algebra(9).is_err());
    for ell in (3u64..200).filter(|&l| is_prime(l)) {
        let alg = make_algebra(ell).unwrap();
        assert!(alg.a < 0 && alg.b < 0);
        // odd ramified primes among those dividing 2ab·ℓ; ∞ is ramified, so by
        // the product formula 2 is unramified exactly when this set has odd size
        let mut odd: Vec<i64> = vec![];
        for q in (3..=(alg.a * alg.b).abs()).filter(|&q| is_prime(q as u64) && (alg.a * alg.b) % q == 0) {
            if hilbert_odd(alg.a, alg.b, q) == -1 {
                odd.push(q);
            }
        }
        assert_eq!(odd, vec![ell as i64], "ℓ={ell}");
        assert_eq!(alg.ramified_primes(), vec![ell]);
    }
}

#[test]
fn maximal_order_bases() {
    let a3 = make_algebra(3).unwrap();
    let m3 = maximal_order(&a3).unwrap();
    let listed = [qt([1, 0, 1, 0], 2), qt([0, 1, 0, 1], 2), qt([0, 0, 1, 0], 1), qt([0, 0, 0, 1], 1)];
    assert_eq!(m3.lattice, Lattice::from_basis(&listed));
    let a5 = make_algebra(5).unwrap();
    let m5 = maximal_order(&a5).unwrap();
    let listed = [qt([1, 0, 1, 1], 2), qt([0, 1, 2, 1], 4), qt([0, 0, 1, 0], 1), qt([0, 0, 0, 1], 1)];
    assert_eq!(m5.lattice, Lattice::from_basis(&listed));
    // reduced discriminant: det of the trace Gram matrix is disc²
    for ell in (3u64..120).filter(|&l| is_prime(l)) {
        let alg = make_algebra(ell).unwrap();
        let o = maximal_order(&alg).unwrap();
        let d = det4(&trace_gram(&alg, &o.basis()));
        assert_eq!(d, r((ell * ell) as i64, 1), "ℓ={ell}");
        assert!(o.contains(&Quaternion::one()));
        for x in o.basis() {
            assert!(o.contains(&alg.mul(&x, &x)));
            assert!(alg.norm(&x).is_integer() && x.trace().is_integer());
            for y in o.basis() {
                assert!(o.contains(&alg.mul(&x, &y)));
            }
        }
    }
}

#[test]
fn eichler_order_of_level_five() {
    let alg = make_algebra(3).unwrap();
    let max = maximal_order(&alg).unwrap();
    let o = eichler_order(&max, 5).unwrap();
    let corrected = [qt([1, 0, 1, 2], 2), qt([0, 1, 0, 5], 2), qt([0, 0, 1, 2], 1), qt([0, 0, 0, 5], 1)];
    assert_eq!(o.lattice, Lattice::from_basis(&corrected));
    let listed = [qt([1, 0, 1, 2], 2), qt([0, 1, 0, 5], 2), qt([0, 0, 1, 2], 2), qt([0, 0, 0, 5], 1)];
    assert!(!Lattice::from_basis(&listed).is_closed_under_mul(&alg));
    assert_eq!(max.lattice.index_of(&o.lattice), r(5, 1));
    let d = det4(&trace_gram(&alg, &o.basis()));
    assert_eq!(d, r(15 * 15, 1));
    assert_eq!(eichler_order(&max, 1).unwrap().lattice, max.lattice);
    assert!(eichler_order(&max, 3).is_err());
}

#[test]
fn eichler_orders_are_locally_upper_triangular() {
    for (ell, n) in [(3u64, 5u64), (3, 35), (5, 7), (7, 15), (11, 5), (3, 25)] {
        let alg = make_algebra(ell).unwrap();
        let o = eichler_order(&maximal_order(&alg).unwrap(), n).unwrap();
        assert!(o.lattice.is_closed_under_mul(&alg));
        for (q, e) in theta_geodesics::arith::factorize(n) {
            let qe = BigInt::from(q.pow(e));
            let s = splitting_map(&alg, q, e).unwrap();
            let imgs: Vec<Mat2> = o.basis().iter().map(|x| s.image_integral(x).unwrap()).collect();
            for m in &imgs {
                assert!((m.c.numer() % &qe).is_zero() && m.c.denom().is_one());
            }
            // the images span all upper-triangular matrices mod q
            let rows: Vec<Vec<i64>> = imgs
                .iter()
                .map(|m| [&m.a, &m.b, &m.d].iter().map(|x| x.to_integer().mod_floor(&BigInt::from(q)).to_i64().unwrap()).collect())
                .collect();
            assert_eq!(rank_mod(rows, q as i64), 3, "ℓ={ell} N={n} q={q}");
        }
    }
}

fn rank_mod(mut m: Vec<Vec<i64>>, p: i64) -> usize {
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c].rem_euclid(p) != 0) else { continue };
        m.swap(rank, piv);
        let inv = (1..p).find(|x| (m[rank][c] * x).rem_euclid(p) == 1).unwrap();
        for i in 0..m.len() {
            if i != rank {
                let f = m[i][c] * inv;
                for k in 0..cols {
                    m[i][k] = (m[i][k] - f * m[rank][k]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn norms_and_traces() {
    let alg = make_algebra(3).unwrap();
    assert_eq!(alg.norm(&Quaternion::one()), r(1, 1));
    assert_eq!(Quaternion::one().trace(), r(2, 1));
    assert_eq!(alg.norm(&qt([1, 2, 0, 0], 1)), r(5, 1));
    let x = qt([3, -1, 4, 2], 2);
    assert_eq!(alg.mul(&x, &x.conj()), Quaternion::from_rational(alg.norm(&x)));
}

/// Index-p sublattices of Z⁴ are the kernels of the (p⁴−1)/(p−1) lines of functionals mod p.
#[test]
fn index_p_sublattices_are_all_hyperplanes() {
    let base = theta_geodesics::quaternion::lattice::standard();
    for p in [2u64, 3] {
        let subs = sublattices_index_p(&base, p);
        assert_eq!(subs.len() as u64, (p.pow(4) - 1) / (p - 1));
        let mut seen = HashSet::new();
        for l in &subs {
            assert_eq!(base.index_of(l), r(p as i64, 1));
            let pi = p as i64;
            let funcs: Vec<[i64; 4]> = (1..pi.pow(4))
                .map(|t| [t % pi, t / pi % pi, t / (pi * pi) % pi, t / (pi * pi * pi)])
                .filter(|f| {
                    l.basis().iter().all(|x| {
                        let s: BigRational = (0..4).map(|i| &x.0[i] * r(f[i], 1)).sum();
                        s.is_integer() && (s.to_integer() % BigInt::from(p)).is_zero()
                    })
                })
                .collect();
            assert_eq!(funcs.len() as u64, p - 1);
            let lead = funcs.iter().min().unwrap();
            assert!(seen.insert(*lead), "duplicate sublattice");
        }
        assert_eq!(seen.len(), subs.len());
    }
    let subs = sublattices_index_p(&base, 5);
    assert_eq!(subs.len(), 156);
}

fn random_gram(rng: &mut ChaCha8Rng) -> Option<(Matrix<BigRational>, Matrix<i64>)> {
    let b: Matrix<i64> = (0..4).map(|_| (0..4).map(|_| rng.gen_range(-20..=20)).collect()).collect();
    let g: Matrix<BigRational> = (0..4)
        .map(|i| (0..4).map(|j| r((0..4).map(|k| b[i][k] * b[j][k]).sum(), 1)).collect())
        .collect();
    (!det4(&g).is_zero()).then_some((g, b))
}

/// Short vectors against a full coordinate box, radius sqrt(bound · (G⁻¹)ᵢᵢ).
#[test]
fn short_vectors_match_box_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tested = 0;
    while tested < 100 {
        let Some((g, _)) = random_gram(&mut rng) else { continue };
        let gi = inverse(&g).unwrap();
        let bound = (0..4).map(|i| g[i][i].clone()).min().unwrap() * r(3, 2);
        let radii: Vec<i64> = (0..4)
            .map(|i| ((&bound * &gi[i][i]).to_f64().unwrap().sqrt().floor() as i64) + 1)
            .collect();
        if radii.iter().map(|&x| 2 * x + 1).product::<i64>() > 400_000 {
            continue;
        }
        tested += 1;
        let mut want = HashSet::new();
        for a in -radii[0]..=radii[0] {
            for b in -radii[1]..=radii[1] {
                for c in -radii[2]..=radii[2] {
                    for d in -radii[3]..=radii[3] {
                        let x: Vec<BigInt> = [a, b, c, d].iter().map(|&t| BigInt::from(t)).collect();
                        let first = x.iter().find(|t| !t.is_zero());
                        if first.is_none_or(|t| t.is_negative()) {
                            continue;
                        }
                        let v = eval(&g, &x);
                        if v <= bound {
                            want.insert((x, v));
                        }
                    }
                }
            }
        }
        let got: HashSet<_> = short_vectors(&g, &bound).into_iter().collect();
        assert_eq!(got, want);
    }
}

#[test]
fn short_vectors_on_orders() {
    let alg = make_algebra(3).unwrap();
    let max = maximal_order(&alg).unwrap();
    // units of the maximal order: ±1, ±i, ±(1±j)/2-type elements, 12 in total
    let units = max.elements_of_norm(&r(1, 1));
    let mut brute = 0;
    for c in itertools_box(3) {
        let x = combine(&max.basis(), &c);
        if alg.norm(&x) == r(1, 1) {
            brute += 1;
        }
    }
    assert_eq!(2 * units.len(), brute);
    assert_eq!(brute, 12);
    let o = eichler_order(&max, 5).unwrap();
    let five = o.elements_of_norm(&r(5, 1));
    for x in [qt([1, 2, 0, 0], 1), qt([1, -2, 0, 0], 1)] {
        assert!(five.contains(&x) || five.contains(&x.neg()));
    }
    let scaled = max.lattice.scale(&r(5, 1));
    let gram = scaled.gram(&alg);
    assert!(short_vectors(&gram, &r(24, 1)).is_empty());
}

fn itertools_box(rad: i64) -> Vec<Vec<BigInt>> {
    let mut out = vec![];
    for a in -rad..=rad {
        for b in -rad..=rad {
            for c in -rad..=rad {
                for d in -rad..=rad {
                    out.push([a, b, c, d].iter().map(|&t| BigInt::from(t)).collect());
                }
            }
        }
    }
    out
}

/// Index of a full sublattice against coset counting: with e·L ⊂ L′, the box
/// [0,e)⁴ in L-coordinates holds e⁴/[L:L′] points of L′.
fn brute_index(l: &Lattice, sub: &Lattice) -> Option<u64> {
    let b = l.basis();
    let e = (1..=12).find(|&e| b.iter().all(|x| sub.contains(&x.scale(&r(e, 1)))))?;
    let mut hits = 0u64;
    for c in itertools_box_nonneg(e) {
        if sub.contains(&combine(&b, &c)) {
            hits += 1;
        }
    }
    Some((e as u64).pow(4) / hits)
}

fn itertools_box_nonneg(e: i64) -> Vec<Vec<BigInt>> {
    let mut out = vec![];
    for a in 0..e {
        for b in 0..e {
            for c in 0..e {
                for d in 0..e {
                    out.push([a, b, c, d].iter().map(|&t| BigInt::from(t)).collect());
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn hnf_index_matches_coset_count(
        diag in prop::array::uniform4(1i64..5),
        off in prop::array::uniform4(prop::array::uniform4(-6i64..7)),
    ) {
        let alg = make_algebra(3).unwrap();
        let max = maximal_order(&alg).unwrap();
        let b = max.basis();
        // triangular generators with small pivots, then mixed by a unimodular change
        let mut m = [[0i64; 4]; 4];
        for i in 0..4 {
            m[i][i] = diag[i];
            for j in (i + 1)..4 {
                m[i][j] = off[i][j];
            }
        }
        let mixed: Vec<[i64; 4]> = (0..4)
            .map(|i| if i == 0 { m[0] } else { std::array::from_fn(|k| m[i][k] + off[i][0] * m[i - 1][k]) })
            .collect();
        let gens: Vec<Quaternion> = mixed.iter().map(|row| combine(&b, &row.map(BigInt::from))).collect();
        let sub = Lattice::from_basis(&gens);
        prop_assume!(sub.is_full());
        let idx = max.lattice.index_of(&sub);
        prop_assume!(idx <= r(100, 1));
        if let Some(brute) = brute_index(&max.lattice, &sub) {
            prop_assert_eq!(idx, r(brute as i64, 1));
        }
        // canonical form is basis-independent
        let shuffled: Vec<Quaternion> = vec![gens[1].add(&gens[0]), gens[0].clone(), gens[3].clone(), gens[2].sub(&gens[3])];
        prop_assert_eq!(Lattice::from_basis(&shuffled), sub);
    }
}

#[test]
fn splitting_is_a_ring_morphism_mod_p_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (ell, p, m) in [(3u64, 5u64, 1u32), (3, 5, 20), (3, 7, 4), (5, 3, 6), (5, 11, 3), (17, 5, 5), (13, 7, 2)] {
        let alg = make_algebra(ell).unwrap();
        let max = maximal_order(&alg).unwrap();
        let Ok(s) = splitting_map(&alg, p, m) else {
            assert!((alg.a * alg.b) % p as i64 == 0, "ℓ={ell} p={p}");
            continue;
        };
        let pm = BigInt::from(p).pow(m);
        let red = |x: &BigRational| x.to_integer().mod_floor(&pm);
        let same = |x: &Mat2, y: &Mat2| [(&x.a, &y.a), (&x.b, &y.b), (&x.c, &y.c), (&x.d, &y.d)].iter().all(|(u, v)| red(u) == red(v));
        let [one, i, j, k] = s.images().clone();
        let sc = |c: i64| Mat2::identity().scale(&r(c, 1));
        assert!(same(&one, &Mat2::identity()));
        assert!(same(&i.mul(&i), &sc(alg.a)) && same(&j.mul(&j), &sc(alg.b)));
        assert!(same(&i.mul(&j), &k) && same(&j.mul(&i), &k.scale(&r(-1, 1))));
        let rand_elt = |rng: &mut ChaCha8Rng| {
            let c: Vec<BigInt> = (0..4).map(|_| BigInt::from(rng.gen_range(-50i64..=50))).collect();
            combine(&max.basis(), &c)
        };
        for _ in 0..1000 / 7 + 1 {
            let (x, y) = (rand_elt(&mut rng), rand_elt(&mut rng));
            let (ix, iy) = (s.image_integral(&x).unwrap(), s.image_integral(&y).unwrap());
            assert!(same(&s.image_integral(&alg.mul(&x, &y)).unwrap(), &ix.mul(&iy)));
            assert!(same(&s.image_integral(&x.add(&y)).unwrap(), &ix.add(&iy)));
            let det = ix.det();
            assert_eq!(red(&det), alg.norm(&x).to_integer().mod_floor(&pm));
            assert_eq!(s.preimage(&ix).map(|z| s.image_integral(&z).unwrap()).map(|z| same(&z, &ix)).ok(), Some(true));
        }
    }
    assert!(splitting_map(&make_algebra(3).unwrap(), 3, 4).is_err());
}

#[test]
fn splitting_on_example_coordinates() {
    let alg = make_algebra(3).unwrap();
    let max = maximal_order(&alg).unwrap();
    let s = splitting_map(&alg, 5, 20).unwrap();
    let u1 = combine(&max.basis(), &[2, 0, -1, 0].map(BigInt::from));
    assert_eq!(u1, Quaternion::one());
    assert_eq!(s.image_integral(&u1).unwrap(), Mat2::identity());
    // (0,6,0,-2) is 3i + k: trace 0 and determinant 12, so in any antidiagonal
    // conjugate the antidiagonal product is -12. Its edge lies in the Γ-class of W.
    let u2 = combine(&max.basis(), &[0, 6, 0, -2].map(BigInt::from));
    assert_eq!(u2, qt([0, 3, 0, 1], 1));
    let m = s.image_integral(&u2).unwrap();
    let p20 = BigInt::from(5).pow(20);
    assert!((m.trace().to_integer() % &p20).is_zero());
    assert_eq!(m.det().to_integer().mod_floor(&p20), BigInt::from(12));
    let e = GeodesicClass::from_matrix(&m, 5, 1).unwrap();
    let ctx = QuotientContext::new(&max, 5, 1, 20).unwrap();
    let (_, gamma) = domains(&ctx, 2).unwrap();
    assert_eq!(gamma.edges.iter().map(|g| g.rep.clone()).collect::<Vec<_>>(), vec![Mat2::identity(), Mat2::w()]);
    let (idx, _) = ctx.locate(&e, &gamma.edges, Group::Gamma).unwrap().unwrap();
    assert_eq!(idx, 1);
}

#[test]
fn order_records_round_trip() {
    let alg = make_algebra(3).unwrap();
    let o = eichler_order(&maximal_order(&alg).unwrap(), 5).unwrap();
    let rec = o.record();
    let text = serde_json::to_string(&rec).unwrap();
    let back: theta_geodesics::quaternion::order::OrderRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rec);
    assert_eq!(Lattice::from_basis(&back.basis().unwrap()), o.lattice);
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
