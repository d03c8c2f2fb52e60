//! Dirichlet characters with their local (CRT) components, finite-order p-adic
//! characters of p-power conductor, and arithmetic points on the weight space.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, pow};
use crate::cyclotomic::CyclotomicElement;
use crate::error::{Error, Result};
use crate::padic::{self, PAdicScalar};

/// χ_q on (Z/q^e)^×, as a value table indexed by residue (None off the units).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalComponent {
    pub prime: u64,
    pub exponent: u32,
    values: Vec<Option<CyclotomicElement>>,
}

impl LocalComponent {
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.exponent)
    }

    pub fn eval(&self, x: &BigInt) -> CyclotomicElement {
        let m = BigInt::from(self.modulus());
        let r = x.mod_floor(&m).to_usize().unwrap();
        self.values[r].clone().unwrap_or_else(CyclotomicElement::zero)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletCharacter {
    modulus: u64,
    components: Vec<LocalComponent>,
}

impl DirichletCharacter {
    pub fn trivial(modulus: u64) -> Self {
        Self::from_fn(modulus, |_| CyclotomicElement::one())
    }

    /// Character given by its values on units mod `modulus`; the table is split
    /// into local components through the Chinese remainder theorem.
    pub fn from_fn<F: Fn(u64) -> CyclotomicElement>(modulus: u64, f: F) -> Self {
        assert!(modulus >= 1);
        let components = arith::factorize(modulus)
            .into_iter()
            .map(|(q, e)| {
                let qe = q.pow(e);
                let rest = modulus / qe;
                let values = (0..qe)
                    .map(|r| {
                        if r % q == 0 {
                            return None;
                        }
                        // y ≡ r mod q^e, y ≡ 1 mod rest
                        let y = crt(r, qe, 1, rest);
                        Some(f(y))
                    })
                    .collect();
                LocalComponent { prime: q, exponent: e, values }
            })
            .collect();
        DirichletCharacter { modulus, components }
    }

    /// Character sending the canonical generator of (Z/q^e)^× (q odd) to ζ^k_(φ(q^e)),
    /// for each listed prime power; trivial on the remaining factors of `modulus`.
    pub fn from_generators(modulus: u64, gens: &[(u64, i64)]) -> Result<Self> {
        let mut comps = Vec::new();
        for (q, e) in arith::factorize(modulus) {
            let qe = q.pow(e);
            let k = gens.iter().find(|(qq, _)| *qq == q).map(|x| x.1).unwrap_or(0);
            if q == 2 && k != 0 {
                return Err(Error::Argument("generator description needs odd primes".into()));
            }
            let phi = qe / q * (q - 1);
            let mut values = vec![None; qe as usize];
            if q == 2 {
                for r in (1..qe).step_by(2) {
                    values[r as usize] = Some(CyclotomicElement::one());
                }
            } else {
                let g = generator_prime_power(q, e);
                let mut x = 1u64;
                for t in 0..phi {
                    values[x as usize] = Some(CyclotomicElement::zeta_pow(phi, k * t as i64));
                    x = x * g % qe;
                }
            }
            comps.push(LocalComponent { prime: q, exponent: e, values });
        }
        Ok(DirichletCharacter { modulus, components: comps })
    }

    /// Real character x ↦ ∏ (x/q) over the odd primes of a squarefree modulus.
    pub fn quadratic(modulus: u64) -> Result<Self> {
        if !arith::is_squarefree(modulus) || modulus.is_multiple_of(2) {
            return Err(Error::Argument("quadratic character needs an odd squarefree modulus".into()));
        }
        Ok(Self::from_fn(modulus, |x| {
            let s: i32 = arith::factorize(modulus)
                .iter()
                .map(|&(q, _)| arith::legendre(&BigInt::from(x), q))
                .product();
            CyclotomicElement::from_int(s as i64)
        }))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn eval(&self, x: &BigInt) -> CyclotomicElement {
        if !x.gcd(&BigInt::from(self.modulus)).is_one() {
            return CyclotomicElement::zero();
        }
        self.components
            .iter()
            .fold(CyclotomicElement::one(), |acc, c| acc.mul(&c.eval(x)))
    }

    /// Value at a rational integral at every prime of the modulus.
    pub fn eval_rational(&self, x: &BigRational) -> CyclotomicElement {
        let m = BigInt::from(self.modulus);
        if !x.denom().gcd(&m).is_one() {
            return CyclotomicElement::zero();
        }
        let inv = arith::modinv(x.denom(), &m).unwrap();
        self.eval(&(x.numer() * inv))
    }

    pub fn is_trivial(&self) -> bool {
        (1..=self.modulus)
            .filter(|x| x.gcd(&self.modulus) == 1)
            .all(|x| self.eval(&BigInt::from(x)) == CyclotomicElement::one())
    }

    pub fn is_even(&self) -> bool {
        self.eval(&BigInt::from(-1)) == CyclotomicElement::one()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.modulus.lcm(&o.modulus);
        Self::from_fn(m, |x| self.eval(&BigInt::from(x)).mul(&o.eval(&BigInt::from(x))))
    }

    pub fn inverse(&self) -> Self {
        Self::from_fn(self.modulus, |x| self.eval(&BigInt::from(x)).inverse().unwrap())
    }

    /// Smallest modulus through which the character factors.
    pub fn conductor(&self) -> u64 {
        let m = self.modulus;
        (1..=m)
            .filter(|d| m.is_multiple_of(*d))
            .find(|&d| {
                (1..=m).filter(|x| x.gcd(&m) == 1 && (x - 1) % d == 0).all(|x| {
                    self.eval(&BigInt::from(x)) == CyclotomicElement::one()
                })
            })
            .unwrap()
    }
}

fn crt(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    let (b1, b2) = (BigInt::from(m1), BigInt::from(m2));
    let inv = arith::modinv(&b1, &b2).unwrap();
    let t = ((BigInt::from(r2) - BigInt::from(r1)) * inv).mod_floor(&b2);
    (BigInt::from(r1) + t * b1).to_u64().unwrap()
}

/// Smallest generator of (Z/q^e)^× for an odd prime q.
pub fn generator_prime_power(q: u64, e: u32) -> u64 {
    let g = padic::primitive_root(q);
    if e == 1 {
        return g;
    }
    let q2 = q * q;
    let gb = BigInt::from(g);
    if gb.modpow(&BigInt::from(q - 1), &BigInt::from(q2)).is_one() {
        g + q
    } else {
        g
    }
}

/// Local components of χ, one per prime dividing the modulus.
pub fn decompose_dirichlet(chi: &DirichletCharacter) -> Vec<LocalComponent> {
    chi.components.clone()
}

/// ε = ω^tame · (wild part sending 1+p to `generator_image`), conductor p^n.
#[derive(Clone, Debug, PartialEq)]
pub struct PAdicFiniteCharacter {
    pub prime: u64,
    pub conductor_exponent: u32,
    pub tame_exponent: u64,
    pub generator_image: CyclotomicElement,
}

impl PAdicFiniteCharacter {
    pub fn trivial(p: u64) -> Self {
        PAdicFiniteCharacter {
            prime: p,
            conductor_exponent: 0,
            tame_exponent: 0,
            generator_image: CyclotomicElement::one(),
        }
    }

    /// Wild part 1+p ↦ ζ_(p^(n-1))^k.
    pub fn new(p: u64, n: u32, tame_exponent: u64, k: i64) -> Result<Self> {
        if !arith::is_prime(p) || p == 2 {
            return Err(Error::Argument(format!("{p} is not an odd prime")));
        }
        let image = if n >= 2 {
            CyclotomicElement::zeta_pow(p.pow(n - 1), k)
        } else {
            CyclotomicElement::one()
        };
        Ok(PAdicFiniteCharacter {
            prime: p,
            conductor_exponent: n,
            tame_exponent: tame_exponent % (p - 1),
            generator_image: image,
        })
    }

    /// Order of the field Q(ζ) holding the values.
    pub fn value_order(&self) -> u64 {
        let wild = if self.conductor_exponent >= 2 { self.prime.pow(self.conductor_exponent - 1) } else { 1 };
        if self.tame_exponent == 0 { wild } else { wild * (self.prime - 1) }
    }

    pub fn is_primitive(&self) -> bool {
        let p = self.prime;
        match self.conductor_exponent {
            0 => true,
            1 => self.tame_exponent != 0,
            n => self.generator_image.pow(p.pow(n - 2) as i64) != CyclotomicElement::one(),
        }
    }

    pub fn eval_int(&self, x: &BigInt) -> Result<CyclotomicElement> {
        let n = self.conductor_exponent.max(1);
        self.eval(&PAdicScalar::from_integer(x, self.prime, n))
    }

    pub fn eval(&self, x: &PAdicScalar) -> Result<CyclotomicElement> {
        let p = self.prime;
        if !x.is_unit() {
            return Err(Error::Domain("character argument is not a p-adic unit".into()));
        }
        let n = self.conductor_exponent.max(1);
        if x.precision() < n {
            return Err(Error::Precision { required: n, available: x.precision() });
        }
        let u = x.residue(n)?;
        let tame = if self.tame_exponent == 0 {
            CyclotomicElement::one()
        } else {
            let ind = padic::index_mod_p(&u, p)?;
            CyclotomicElement::zeta_pow(p - 1, (ind * self.tame_exponent) as i64)
        };
        if self.conductor_exponent < 2 {
            return Ok(tame);
        }
        let w = padic::teichmuller(&u, p, n)?;
        let m = pow(p, n);
        let principal = (&u * arith::modinv(w.unit_part(), &m).unwrap()).mod_floor(&m);
        let log = padic::log_one_plus_p(&principal, p, n)?;
        let wild = self.generator_image.pow(log.to_i64().unwrap());
        Ok(tame.mul(&wild))
    }

    /// The same character as a Dirichlet character modulo p^n.
    pub fn to_dirichlet(&self) -> DirichletCharacter {
        let m = self.prime.pow(self.conductor_exponent);
        DirichletCharacter::from_fn(m, |x| self.eval_int(&BigInt::from(x)).unwrap())
    }

    pub fn inverse(&self) -> Self {
        PAdicFiniteCharacter {
            prime: self.prime,
            conductor_exponent: self.conductor_exponent,
            tame_exponent: (self.prime - 1 - self.tame_exponent) % (self.prime - 1),
            generator_image: self.generator_image.inverse().unwrap(),
        }
    }

    pub fn record(&self) -> CharacterRecord {
        CharacterRecord {
            schema: 1,
            prime: self.prime,
            conductor_exponent: self.conductor_exponent,
            tame_exponent: self.tame_exponent,
            generator_image_order: self.generator_image.order(),
            generator_image_coeffs: self.generator_image.coeffs().iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn from_record(r: &CharacterRecord) -> Result<Self> {
        if r.schema != 1 {
            return Err(Error::Argument(format!("unsupported schema {}", r.schema)));
        }
        let coeffs = r
            .generator_image_coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(PAdicFiniteCharacter {
            prime: r.prime,
            conductor_exponent: r.conductor_exponent,
            tame_exponent: r.tame_exponent,
            generator_image: CyclotomicElement::new(r.generator_image_order, coeffs),
        })
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Argument(format!("cannot parse rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterRecord {
    pub schema: u32,
    pub prime: u64,
    pub conductor_exponent: u32,
    pub tame_exponent: u64,
    pub generator_image_order: u64,
    pub generator_image_coeffs: Vec<String>,
}

/// The weight-space point (k, ε).
#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticPoint {
    pub weight: u32,
    pub character: PAdicFiniteCharacter,
}

/// ε_A(p^n) under the normalization fixed to 1.
pub fn adelic_value_at_p_power(_eps: &PAdicFiniteCharacter, _n: u32) -> CyclotomicElement {
    CyclotomicElement::one()
}

/// Weight-2 points with primitive characters of the listed conductor exponents,
/// wild parts 1+p ↦ ζ_(p^(n-1)) so that ε_(n+1)^p and ε_n agree on 1+p.
/// Exponent-1 entries carry the Teichmüller character as their tame part.
pub fn character_ladder(p: u64, exponents: &[u32]) -> Result<Vec<ArithmeticPoint>> {
    if exponents.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("conductor exponents must increase strictly".into()));
    }
    if exponents.contains(&0) {
        return Err(Error::Argument("conductor exponents must be positive".into()));
    }
    exponents
        .iter()
        .map(|&n| {
            let tame = if n == 1 { 1 } else { 0 };
            let eps = PAdicFiniteCharacter::new(p, n, tame, 1)?;
            debug_assert!(eps.is_primitive());
            Ok(ArithmeticPoint { weight: 2, character: eps })
        })
        .collect()
}
