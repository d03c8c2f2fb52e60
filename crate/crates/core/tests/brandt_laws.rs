//! Brandt matrices: Hecke relations, row sums, mass identities, character
//! lifts and eigenform extraction across several orders.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use theta_geodesics::arith::{factorize, legendre, rat, ratio};
use theta_geodesics::brandt::*;
use theta_geodesics::character::DirichletCharacter;
use theta_geodesics::cyclotomic::CyclotomicElement;
use theta_geodesics::error::Error;
use theta_geodesics::linalg::{mat_mul, Matrix};
use theta_geodesics::quaternion::order::{combine, eichler_order, maximal_order, Order};
use theta_geodesics::quaternion::splitting::splitting_map;
use theta_geodesics::quaternion::{make_algebra, Quaternion};

fn order(ell: u64, level: u64) -> Order {
    eichler_order(&maximal_order(&make_algebra(ell).unwrap()).unwrap(), level).unwrap()
}

/// Mass formula written out from the level factorisation.
fn mass_oracle(ell: u64, level: u64) -> BigRational {
    let mut m = ratio(ell as i64 - 1, 24) * rat(level as i64);
    for (q, _) in factorize(level) {
        m *= ratio(q as i64 + 1, q as i64);
    }
    m
}

fn sigma_coprime(m: u64, avoid: u64) -> BigRational {
    rat((1..=m).filter(|d| m.is_multiple_of(*d) && d.gcd(&avoid) == 1).sum::<u64>() as i64)
}

const CASES: [(u64, u64); 7] = [(3, 1), (3, 5), (3, 7), (3, 25), (5, 1), (7, 5), (11, 1)];

#[test]
fn mass_identity_and_class_numbers() {
    for (ell, level) in CASES {
        let o = order(ell, level);
        let cls = left_ideal_classes(&o).unwrap();
        assert_eq!(cls.mass(), mass_oracle(ell, level), "ℓ={ell} N={level}");
        assert_eq!(cls.mass(), eichler_mass(ell, &o.level));
        for i in 0..cls.class_number() {
            for j in 0..i {
                assert!(!cls.reps[i].is_equivalent(&cls.reps[j], &o.alg));
            }
        }
    }
    // maximal order at ℓ = 3: a single class with 12 units, counted by a box
    let o = order(3, 1);
    let cls = left_ideal_classes(&o).unwrap();
    assert_eq!(cls.class_number(), 1);
    let mut units = 0;
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            for c in -3i64..=3 {
                for d in -3i64..=3 {
                    let x = combine(&o.basis(), &[a, b, c, d].map(BigInt::from));
                    if o.alg.norm(&x) == rat(1) {
                        units += 1;
                    }
                }
            }
        }
    }
    assert_eq!(units, 12);
    assert_eq!(cls.unit_orders, vec![units / 2]);
}

#[test]
fn hecke_relations_for_trivial_character() {
    for (ell, level) in CASES {
        let o = order(ell, level);
        let cls = left_ideal_classes(&o).unwrap();
        let chi = LiftedCharacter::trivial(&o);
        let avoid = ell * level;
        let b = |m: u64| brandt_matrix(&cls, &chi, m).as_rational().unwrap();
        let ms: Vec<u64> = coprime_indices(12, avoid);
        let mats: Vec<Matrix<BigRational>> = ms.iter().map(|&m| b(m)).collect();
        for (x, &m) in mats.iter().zip(&ms) {
            for (i, row) in x.iter().enumerate() {
                assert_eq!(row.iter().sum::<BigRational>(), sigma_coprime(m, avoid), "ℓ={ell} N={level} m={m}");
                for (j, e) in row.iter().enumerate() {
                    assert!(!e.is_negative());
                    assert!((BigInt::from(cls.unit_orders[j]) % e.denom()).is_zero() || e.is_zero());
                    let w = |k: usize| rat(cls.unit_orders[k] as i64);
                    assert_eq!(w(j) * e, w(i) * &x[j][i]);
                }
            }
            for y in &mats {
                assert_eq!(mat_mul(x, y), mat_mul(y, x));
            }
        }
        for (m1, m2) in [(2u64, 3u64), (2, 5), (3, 4), (2, 7)] {
            if m1.gcd(&avoid) == 1 && m2.gcd(&avoid) == 1 && m1.gcd(&m2) == 1 {
                assert_eq!(b(m1 * m2), mat_mul(&b(m1), &b(m2)), "ℓ={ell} N={level} {m1}·{m2}");
            }
        }
    }
}

#[test]
fn example_theta_series() {
    let o = order(3, 5);
    let cls = left_ideal_classes(&o).unwrap();
    let chi = LiftedCharacter::trivial(&o);
    let s = theta_series_coefficients(&cls, &chi, 0, 0, 5);
    // b₁₁(1) counts units of R: 2w/2w = 1; b₁₁(4) from the Hecke relation at 2
    let b2 = brandt_matrix(&cls, &chi, 2).as_rational().unwrap();
    let b4 = mat_mul(&b2, &b2);
    let want = [ratio(1, 4), rat(1), rat(1), rat(0), &b4[0][0] - rat(2), rat(6)];
    for (got, want) in s.iter().zip(want.iter()) {
        assert_eq!(got.as_rational().unwrap(), *want);
    }
    for m in 0..=5 {
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(theta_series_coefficients(&cls, &chi, i, j, 5)[m as usize], brandt_matrix(&cls, &chi, m).entries[i][j]);
            }
        }
    }
}

#[test]
fn example_eigenforms() {
    let o = order(3, 5);
    let cls = left_ideal_classes(&o).unwrap();
    let chi = LiftedCharacter::trivial(&o);
    let int = CyclotomicElement::from_int;
    let newform = eigenform_vector(&cls, &chi, &[(2, int(-1))]).unwrap();
    assert_eq!(newform.values, vec![int(1), int(-1)]);
    let b5 = brandt_matrix(&cls, &chi, 5).as_rational().unwrap();
    assert_eq!(b5[0][0].clone() - &b5[0][1], rat(1));
    let b3 = brandt_matrix(&cls, &chi, 3).as_rational().unwrap();
    assert_eq!(b3[0][0].clone() - &b3[0][1], rat(-1));
    let eis = eigenform_vector(&cls, &chi, &[(2, int(3))]).unwrap();
    assert_eq!(eis.values, vec![int(1), int(1)]);
    assert!(matches!(eigenform_vector(&cls, &chi, &[(2, int(2))]), Err(Error::NotFound(_))));
    assert!(matches!(eigenform_vector(&cls, &chi, &[(2, int(-1)), (2, int(3))]), Err(Error::NotFound(_))));
    let round = EigenformVector::from_record(&newform.record()).unwrap();
    assert_eq!(round, newform);
}

#[test]
fn diagonalization_edge_cases() {
    let id: Matrix<BigRational> = vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]];
    assert!(matches!(simultaneous_diagonalize(std::slice::from_ref(&id)), Err(Error::Ambiguous(_))));
    let diag = vec![vec![rat(2), rat(0)], vec![rat(0), rat(5)]];
    let d = simultaneous_diagonalize(std::slice::from_ref(&diag)).unwrap();
    let mut t = d.transition();
    t.sort();
    assert_eq!(t, vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]]);
    let one = simultaneous_diagonalize(&[vec![vec![rat(7)]]]).unwrap();
    assert_eq!(one.transition(), vec![vec![rat(1)]]);
    let n = vec![vec![rat(0), rat(1)], vec![rat(0), rat(0)]];
    assert!(matches!(simultaneous_diagonalize(&[diag, n]), Err(Error::Argument(_))));
    // the level-15 pair gives C = [[1,1],[1,-1]] up to row scaling
    let o = order(3, 5);
    let cls = left_ideal_classes(&o).unwrap();
    let chi = LiftedCharacter::trivial(&o);
    let b = |m| brandt_matrix(&cls, &chi, m).as_rational().unwrap();
    let c = simultaneous_diagonalize(&[b(2), b(3)]).unwrap().transition();
    for row in &c {
        let s = &row[0] / &rat(1);
        let unit = [rat(1), rat(1)];
        let alt = [rat(1), rat(-1)];
        let scaled: Vec<BigRational> = row.iter().map(|x| x / &s).collect();
        assert!(scaled == unit || scaled == alt);
    }
    for m in [b(2), b(3)] {
        let cm = mat_mul(&mat_mul(&c, &m), &theta_geodesics::linalg::inverse(&c).unwrap());
        assert!(cm[0][1].is_zero() && cm[1][0].is_zero());
    }
}

#[test]
fn character_lifts() {
    let o = order(3, 5);
    let triv = LiftedCharacter::trivial(&o);
    assert_eq!(triv.eval(&Quaternion::from_ints([1, 2, 0, 0])), CyclotomicElement::one());
    let chi = lift_character(&DirichletCharacter::quadratic(5).unwrap(), &o).unwrap();
    assert_eq!(chi.eval(&Quaternion::one()), CyclotomicElement::one());
    let s = splitting_map(&o.alg, 5, 1).unwrap();
    for x in [Quaternion::from_ints([1, 2, 0, 0]), Quaternion::from_ints([3, 0, 1, 0]), Quaternion::from_ints([2, 1, 1, 0])] {
        if !o.contains(&x) {
            continue;
        }
        let d = s.image_integral(&x).unwrap().d.to_integer();
        let want = legendre(&d, 5);
        assert_eq!(chi.eval(&x), CyclotomicElement::from_int(want as i64), "{x}");
    }
    assert!(lift_character(&DirichletCharacter::quadratic(3).unwrap(), &o).is_err());
    assert!(lift_character(&DirichletCharacter::quadratic(7).unwrap(), &o).is_err());
}

/// With a nontrivial character of conductor 25 the matrices have cyclotomic
/// entries; the Hecke algebra still commutes and B(0) vanishes.
#[test]
fn brandt_matrices_with_character() {
    let o = order(3, 25);
    let cls = left_ideal_classes(&o).unwrap();
    let eps = theta_geodesics::character::PAdicFiniteCharacter::new(5, 2, 0, 1).unwrap();
    let chi = lift_character(&eps.to_dirichlet(), &o).unwrap();
    let b0 = brandt_matrix(&cls, &chi, 0);
    assert!(b0.entries.iter().flatten().all(|x| x.is_zero()));
    let mats: Vec<BrandtMatrix> = [2u64, 4, 7].iter().map(|&m| brandt_matrix(&cls, &chi, m)).collect();
    for x in &mats {
        for y in &mats {
            assert_eq!(x.mul(y), y.mul(x));
        }
    }
    assert_eq!(brandt_matrix(&cls, &chi, 14).entries, mats[0].mul(&mats[2]));
    let rec = mats[0].record();
    assert_eq!(rec.h, cls.class_number());
}

#[test]
fn sturm_bounds() {
    assert_eq!(sturm_bound(2, 5, 3).unwrap(), 4);
    assert_eq!(sturm_bound(2, 1, 3).unwrap(), 1);
    assert!(sturm_bound(2, 11, 1).is_err());
    // ⌊2·25·3·(6/5)(4/3)/12⌋ = 20
    assert_eq!(sturm_bound(2, 25, 3).unwrap(), 20);
}
