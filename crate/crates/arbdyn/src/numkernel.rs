//! Exact arithmetic substrate: valuations, square tests, budgeted integer
//! factorization, dense polynomials over Q and over prime fields, resultants
//! and the discriminant oracle.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// small-prime machinery over u64
// ---------------------------------------------------------------------------

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    // p prime
    pow_mod(a % p, p - 2, p)
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Euler-criterion Legendre symbol over u64 (p an odd prime).
pub fn legendre_u64(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let e = pow_mod(a, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// All primes <= bound, by an Eratosthenes sieve.
pub fn primes_upto(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in [lo, hi].
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    primes_upto(hi).into_iter().filter(|&p| p >= lo).collect()
}

// ---------------------------------------------------------------------------
// valuations, squares, Legendre over BigInt
// ---------------------------------------------------------------------------

/// p-adic valuation of a nonzero integer.
pub fn v_int(n: &BigInt, p: &BigInt) -> i64 {
    assert!(!n.is_zero());
    let mut m = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = m.div_rem(p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

/// p-adic valuation of a nonzero rational (negative for denominators).
pub fn v_p(x: &BigRational, p: &BigInt) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::Argument("valuation of 0 is undefined".into()));
    }
    if !is_prime(p) {
        return Err(Error::Argument(format!("{p} is not prime")));
    }
    Ok(v_int(x.numer(), p) - v_int(x.denom(), p))
}

pub fn is_square_int(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// Exact rational perfect-square test via integer square roots on the
/// canonical (reduced) form.
pub fn is_square(x: &BigRational) -> bool {
    if x.is_negative() {
        return false;
    }
    is_square_int(x.numer()) && is_square_int(x.denom())
}

/// Legendre symbol for BigInt arguments (p an odd prime).
pub fn legendre(a: &BigInt, p: &BigInt) -> i32 {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return 0;
    }
    let e = a.modpow(&((p - BigInt::one()) / BigInt::from(2)), p);
    if e.is_one() {
        1
    } else {
        -1
    }
}

// ---------------------------------------------------------------------------
// primality and budgeted factorization
// ---------------------------------------------------------------------------

/// Primality for arbitrary BigInt: u64 fast path, otherwise Miller-Rabin
/// with a fixed witness set (deterministic far beyond the sizes the
/// factoring budget lets through).
pub fn is_prime(n: &BigInt) -> bool {
    if n.sign() != num_bigint::Sign::Plus {
        return false;
    }
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    let two = BigInt::from(2);
    if (n % &two).is_zero() {
        return false;
    }
    let n1 = n - BigInt::one();
    let mut d = n1.clone();
    let mut s = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        s += 1;
    }
    'witness: for &a in &[
        2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ] {
        let a = BigInt::from(a);
        if &a >= n {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Clone)]
pub struct FactorBudget {
    /// trial-divide by primes up to this bound first
    pub trial_bound: u64,
    /// Pollard-rho iteration cap per composite
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 1_000_000,
            rho_iterations: 2_000_000,
        }
    }
}

/// Factorization of |n|: primes with exponents, plus a composite cofactor
/// when the budget ran out. `value()` always reproduces |n|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(BigInt, u32)>,
    pub cofactor: Option<BigInt>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_none()
    }

    pub fn value(&self) -> BigInt {
        let mut v = BigInt::one();
        for (p, e) in &self.factors {
            v *= p.pow(*e);
        }
        if let Some(c) = &self.cofactor {
            v *= c;
        }
        v
    }

    pub fn primes(&self) -> Vec<BigInt> {
        self.factors.iter().map(|(p, _)| p.clone()).collect()
    }
}

fn pollard_rho(n: &BigInt, max_iter: u64) -> Option<BigInt> {
    // Floyd cycle detection with a deterministic parameter sweep.
    for c in 1u64..20 {
        let cc = BigInt::from(c);
        let mut x = BigInt::from(2);
        let mut y = BigInt::from(2);
        let mut d = BigInt::one();
        let mut iters = 0u64;
        let f = |v: &BigInt| (v * v + &cc) % n;
        while d.is_one() {
            if iters >= max_iter {
                return None;
            }
            iters += 1;
            x = f(&x);
            y = f(&f(&y));
            let diff = if x >= y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break; // cycle without factor; retry with next c
            }
            d = diff.gcd(n);
        }
        if !d.is_one() && &d != n {
            return Some(d);
        }
    }
    None
}

/// Budgeted factorization of n != 0. Never silently wrong: anything the
/// budget cannot resolve lands in the composite cofactor.
pub fn factor(n: &BigInt, budget: &FactorBudget) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Argument("cannot factor 0".into()));
    }
    let mut m = n.abs();
    let mut found: Vec<(BigInt, u32)> = Vec::new();
    if m.is_one() {
        return Ok(Factorization {
            factors: found,
            cofactor: None,
        });
    }
    // trial division
    let push = |found: &mut Vec<(BigInt, u32)>, p: BigInt, e: u32| {
        if e > 0 {
            found.push((p, e));
        }
    };
    let mut d = 2u64;
    while d <= budget.trial_bound {
        let db = BigInt::from(d);
        if &(&db * &db) > &m {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = m.div_rem(&db);
            if r.is_zero() {
                e += 1;
                m = q;
            } else {
                break;
            }
        }
        push(&mut found, db, e);
        d += if d == 2 { 1 } else { 2 };
    }
    if m.is_one() {
        found.sort_by(|a, b| a.0.cmp(&b.0));
        return Ok(Factorization {
            factors: found,
            cofactor: None,
        });
    }
    // general phase: primality test + Pollard rho on a work stack
    let mut cofactor = BigInt::one();
    let mut stack = vec![m];
    while let Some(c) = stack.pop() {
        if is_prime(&c) {
            // merge into found
            if let Some(entry) = found.iter_mut().find(|(p, _)| *p == c) {
                entry.1 += 1;
            } else {
                found.push((c, 1));
            }
            continue;
        }
        // perfect powers split for free
        let r = c.sqrt();
        if &(&r * &r) == &c {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        match pollard_rho(&c, budget.rho_iterations) {
            Some(f) => {
                stack.push(&c / &f);
                stack.push(f);
            }
            None => cofactor *= &c,
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Factorization {
        factors: found,
        cofactor: if cofactor.is_one() {
            None
        } else {
            Some(cofactor)
        },
    })
}

/// Product of the primes dividing |n| to odd multiplicity.
pub fn squarefree_part(n: &BigInt, budget: &FactorBudget) -> Result<BigInt> {
    let f = factor(n, budget)?;
    if !f.is_complete() {
        return Err(Error::Resource(format!(
            "factoring budget exhausted on cofactor {}",
            f.cofactor.unwrap()
        )));
    }
    let mut out = BigInt::one();
    for (p, e) in &f.factors {
        if e % 2 == 1 {
            out *= p;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// dense polynomials over Q
// ---------------------------------------------------------------------------

/// Dense univariate polynomial over Q, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::new(vec![c])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn x() -> Self {
        QPoly::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &BigRational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    /// Remainder of self by a nonzero divisor.
    pub fn rem(&self, divisor: &QPoly) -> QPoly {
        assert!(!divisor.is_zero());
        let dd = divisor.degree().unwrap();
        let lead_inv = divisor.leading().recip();
        let mut r = self.coeffs.clone();
        while r.len() > dd {
            let c = r.last().unwrap() * &lead_inv;
            let shift = r.len() - 1 - dd;
            if !c.is_zero() {
                for (i, b) in divisor.coeffs.iter().enumerate() {
                    let idx = shift + i;
                    let t = b * &c;
                    r[idx] -= t;
                }
            }
            r.pop();
            while r.last().map_or(false, |c| c.is_zero()) {
                r.pop();
            }
            if r.len() <= dd {
                break;
            }
        }
        QPoly::new(r)
    }
}

/// Classical resultant over Q via the Euclidean remainder sequence.
pub fn resultant(f: &QPoly, g: &QPoly) -> Result<BigRational> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::Argument("resultant of zero polynomial".into()));
    }
    fn go(f: &QPoly, g: &QPoly) -> BigRational {
        let df = f.degree().unwrap();
        let dg = g.degree().unwrap();
        if dg == 0 {
            return pow_rat(&g.leading(), df as i64);
        }
        if df < dg {
            let sign = if (df * dg) % 2 == 1 {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            return sign * go(g, f);
        }
        let r = f.rem(g);
        if r.is_zero() {
            return BigRational::zero();
        }
        let dr = r.degree().unwrap();
        let sign = if (df * dg) % 2 == 1 {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        sign * pow_rat(&g.leading(), (df - dr) as i64) * go(g, &r)
    }
    Ok(go(f, g))
}

/// x^e for rational x with integer e (e < 0 requires x != 0).
pub fn pow_rat(x: &BigRational, e: i64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    let base = if e < 0 { x.recip() } else { x.clone() };
    let mut acc = BigRational::one();
    let mut b = base;
    let mut n = e.unsigned_abs();
    while n > 0 {
        if n & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        n >>= 1;
    }
    acc
}

/// Signed discriminant oracle: (-1)^{d(d-1)/2} l(f)^{-1} Res(f, f').
pub fn disc_direct(f: &QPoly) -> Result<BigRational> {
    let d = f
        .degree()
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Argument("discriminant needs degree >= 1".into()))?;
    if d == 1 {
        return Ok(BigRational::one());
    }
    let r = resultant(f, &f.derivative())?;
    let sign = if (d * (d - 1) / 2) % 2 == 1 {
        -BigRational::one()
    } else {
        BigRational::one()
    };
    Ok(sign * r / f.leading())
}

// ---------------------------------------------------------------------------
// dense polynomials over F_p (p an odd u64 prime)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpPoly {
    pub p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (mul_mod(acc, x, self.p) + c) % self.p;
        }
        acc
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        FpPoly::new(
            self.p,
            (0..n)
                .map(|i| {
                    (self.coeffs.get(i).copied().unwrap_or(0)
                        + other.coeffs.get(i).copied().unwrap_or(0))
                        % self.p
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        FpPoly::new(
            self.p,
            (0..n)
                .map(|i| {
                    (self.p + self.coeffs.get(i).copied().unwrap_or(0)
                        - other.coeffs.get(i).copied().unwrap_or(0))
                        % self.p
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: u64) -> FpPoly {
        FpPoly::new(
            self.p,
            self.coeffs.iter().map(|&a| mul_mod(a, c, self.p)).collect(),
        )
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.p);
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, self.p)) % self.p;
            }
        }
        FpPoly::new(self.p, out)
    }

    pub fn rem(&self, divisor: &FpPoly) -> FpPoly {
        assert!(!divisor.is_zero());
        let dd = divisor.degree().unwrap();
        let inv = inv_mod(divisor.leading(), self.p);
        let mut r = self.coeffs.clone();
        while r.len() > dd {
            let c = mul_mod(*r.last().unwrap(), inv, self.p);
            let shift = r.len() - 1 - dd;
            if c != 0 {
                for (i, &b) in divisor.coeffs.iter().enumerate() {
                    let t = mul_mod(b, c, self.p);
                    r[shift + i] = (self.p + r[shift + i] - t) % self.p;
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
            if r.len() <= dd {
                break;
            }
        }
        FpPoly::new(self.p, r)
    }

    /// Exact quotient by a known divisor.
    pub fn div_exact(&self, divisor: &FpPoly) -> FpPoly {
        assert!(!divisor.is_zero());
        let dd = divisor.degree().unwrap();
        let inv = inv_mod(divisor.leading(), self.p);
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            assert!(self.is_zero());
            return FpPoly::zero(self.p);
        }
        let mut q = vec![0u64; r.len() - dd];
        while r.len() > dd {
            let c = mul_mod(*r.last().unwrap(), inv, self.p);
            let shift = r.len() - 1 - dd;
            q[shift] = c;
            if c != 0 {
                for (i, &b) in divisor.coeffs.iter().enumerate() {
                    let t = mul_mod(b, c, self.p);
                    r[shift + i] = (self.p + r[shift + i] - t) % self.p;
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        FpPoly::new(self.p, q)
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.leading(), self.p))
    }

    pub fn derivative(&self) -> FpPoly {
        if self.coeffs.len() <= 1 {
            return FpPoly::zero(self.p);
        }
        FpPoly::new(
            self.p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mul_mod(c, (i as u64) % self.p, self.p))
                .collect(),
        )
    }
}

pub fn fp_gcd(a: &FpPoly, b: &FpPoly) -> FpPoly {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    a.monic()
}

/// base^exp mod f, with polynomial base.
pub fn fp_powmod(base: &FpPoly, mut exp: u64, f: &FpPoly) -> FpPoly {
    let mut acc = FpPoly::one(base.p);
    let mut b = base.rem(f);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc.mul(&b).rem(f);
        }
        b = b.mul(&b).rem(f);
        exp >>= 1;
    }
    acc
}
