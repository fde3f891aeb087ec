//! Frobenius cycle-type sampling: factor-degree multisets of iterate
//! numerators over prime fields, root-density statistics against the
//! centralizer fixed-point prediction, and orbit prime-divisor density.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::certify::{self, CertifyOpts, Verdict};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::numkernel::{self, fp_gcd, fp_powmod, FpPoly};
use crate::quadmap::{self, AutQuadMap, ProjPoint};
use crate::treegroups;

/// Cycle type of Frobenius at p, read off the factor degrees of p_n mod p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTypeSample {
    pub p: u64,
    /// (degree, number of irreducible factors of that degree)
    pub degrees: Vec<(usize, usize)>,
    pub has_root: bool,
    /// set when the prime cannot be used, with the reason
    pub excluded: Option<String>,
}

/// Distinct-degree factorization of a squarefree f: for each d, the number
/// of irreducible degree-d factors is deg(gcd(x^(p^d) - x, f)) / d.
fn ddf(f: &FpPoly) -> Vec<(usize, usize)> {
    let p = f.p;
    let mut f = f.monic();
    let mut out = Vec::new();
    let mut frob = FpPoly::x(p); // x^(p^d) mod f, advanced per round
    let mut d = 0usize;
    while f.degree().unwrap_or(0) > 0 {
        d += 1;
        if 2 * d > f.degree().unwrap() {
            // remainder is a single irreducible factor
            out.push((f.degree().unwrap(), 1));
            break;
        }
        frob = fp_powmod(&frob, p, &f);
        let g = fp_gcd(&frob.sub(&FpPoly::x(p)), &f);
        if let Some(dg) = g.degree() {
            if dg > 0 {
                out.push((d, dg / d));
                f = f.div_exact(&g);
                frob = frob.rem(&f);
            }
        }
    }
    out
}

/// Factor-degree multiset of p_n mod p for the map k(x^2 + b)/x.
pub fn factor_degrees_mod_p(
    k: &BigRational,
    b: &BigRational,
    n: usize,
    p: u64,
) -> Result<CycleTypeSample> {
    if p < 3 || !numkernel::is_prime_u64(p) {
        return Err(Error::Argument(format!("p = {p} must be an odd prime")));
    }
    let excluded = |reason: &str| CycleTypeSample {
        p,
        degrees: Vec::new(),
        has_root: false,
        excluded: Some(reason.into()),
    };
    // good reduction: p must not divide Res(q, p) = kb or any denominator
    let pb = num_bigint::BigInt::from(p);
    for part in [k.numer(), k.denom(), b.numer(), b.denom()] {
        if numkernel::v_int(part, &pb) > 0 {
            return Ok(excluded("bad reduction: p divides kb"));
        }
    }
    let map = AutQuadMap::new(k.clone(), b.clone())?.to_gen();
    let (pn, _) = quadmap::iterate_poly_mod(&map, n, p)?;
    if pn.degree() != Some(1 << n) {
        return Ok(excluded("degree drop mod p"));
    }
    let deriv = pn.derivative();
    if deriv.is_zero() || fp_gcd(&pn, &deriv).degree() != Some(0) {
        return Ok(excluded("ramified: p_n not squarefree mod p"));
    }
    let degrees = ddf(&pn);
    let has_root = degrees.iter().any(|&(d, _)| d == 1);
    // independent cross-check via gcd(x^p - x, p_n)
    let xp = fp_powmod(&FpPoly::x(p), p, &pn);
    let lin = fp_gcd(&xp.sub(&FpPoly::x(p)), &pn);
    let has_root2 = lin.degree().unwrap_or(0) > 0;
    if has_root != has_root2 {
        return Err(Error::Verify(format!(
            "root detection disagrees at p = {p}, n = {n}"
        )));
    }
    Ok(CycleTypeSample {
        p,
        degrees,
        has_root,
        excluded: None,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootDensityReport {
    pub n: usize,
    pub p_min: u64,
    pub p_max: u64,
    pub good: usize,
    pub with_root: usize,
    pub excluded: Vec<(u64, String)>,
    pub fraction: f64,
    /// centralizer fixed-point proportion at level n
    pub prediction: f64,
    /// when maximality is not certified, the prediction is only an upper
    /// bound on the true density
    pub prediction_is_upper_bound_only: bool,
}

/// Fraction of good primes in [p_min, p_max] for which p_n has a root mod
/// p, against the fixed-point proportion of the level-n centralizer.
pub fn root_density_sample(
    k: &BigRational,
    b: &BigRational,
    n: usize,
    p_min: u64,
    p_max: u64,
    mode: ExecMode,
) -> Result<RootDensityReport> {
    let primes = numkernel::primes_in(p_min.max(3), p_max);
    if primes.is_empty() {
        return Err(Error::Argument(format!(
            "no odd primes in [{p_min}, {p_max}]"
        )));
    }
    let (kk, bb) = (k.clone(), b.clone());
    let samples: Vec<Result<CycleTypeSample>> = exec::map_items(mode, primes, move |p| {
        factor_degrees_mod_p(&kk, &bb, n, p)
    });
    let mut good = 0usize;
    let mut with_root = 0usize;
    let mut excluded = Vec::new();
    for s in samples {
        let s = s?;
        match s.excluded {
            Some(reason) => excluded.push((s.p, reason)),
            None => {
                good += 1;
                if s.has_root {
                    with_root += 1;
                }
            }
        }
    }
    let prediction_rat = treegroups::fixprop(n)?;
    let maximal = b == &BigRational::from_integer(1.into())
        && n <= certify::MAX_LEVEL_CAP
        && matches!(
            certify::certify_maximality(k, n.max(2), &CertifyOpts::default())?.verdict,
            Verdict::MaximalTo(_)
        );
    Ok(RootDensityReport {
        n,
        p_min,
        p_max,
        good,
        with_root,
        excluded,
        fraction: with_root as f64 / good as f64,
        prediction: prediction_rat.to_f64().unwrap(),
        prediction_is_upper_bound_only: !maximal,
    })
}

/// Fraction of good primes <= p_max dividing some orbit numerator
/// phi^m(a0) with 1 <= m <= horizon, computed on the projective orbit
/// mod p.
pub fn orbit_prime_density(
    k: &BigRational,
    b: &BigRational,
    a0: &BigRational,
    horizon: usize,
    p_max: u64,
    mode: ExecMode,
) -> Result<f64> {
    let map = AutQuadMap::new(k.clone(), b.clone())?.to_gen();
    let start = ProjPoint::from_rational(a0);
    let primes = numkernel::primes_in(3, p_max);
    if primes.is_empty() {
        return Err(Error::Argument("no odd primes below bound".into()));
    }
    let hits: Vec<Result<Option<bool>>> = exec::map_items(mode, primes, move |p| {
        match crate::sieve::mod_orbit_general(&map, &start, p, false) {
            Ok(rep) => Ok(Some(matches!(rep.zero_hit, Some(h) if h <= horizon))),
            Err(Error::Precondition(_)) => Ok(None), // bad reduction: skip
            Err(e) => Err(e),
        }
    });
    let mut total = 0usize;
    let mut dividing = 0usize;
    for h in hits {
        if let Some(hit) = h? {
            total += 1;
            if hit {
                dividing += 1;
            }
        }
    }
    Ok(dividing as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// brute-force factor degrees by trial division with enumerated monic
    /// irreducibles (small p, small degree only)
    fn brute_degrees(f: &FpPoly) -> Vec<(usize, usize)> {
        let p = f.p;
        let mut f = f.monic();
        let mut irreducibles: Vec<FpPoly> = Vec::new();
        // enumerating up to half the degree suffices: after dividing out all
        // small factors, a nontrivial remainder is a single irreducible
        let max_d = f.degree().unwrap() / 2;
        for d in 1..=max_d {
            let count = (p as usize).pow(d as u32);
            for idx in 0..count {
                let mut coeffs = Vec::with_capacity(d + 1);
                let mut v = idx;
                for _ in 0..d {
                    coeffs.push((v % p as usize) as u64);
                    v /= p as usize;
                }
                coeffs.push(1);
                let cand = FpPoly::new(p, coeffs);
                if irreducibles
                    .iter()
                    .filter(|g| g.degree().unwrap() <= d / 2)
                    .all(|g| !cand.rem(g).is_zero())
                {
                    irreducibles.push(cand);
                }
            }
        }
        let mut out: std::collections::BTreeMap<usize, usize> = Default::default();
        for g in &irreducibles {
            while f.degree() >= g.degree() && f.rem(g).is_zero() {
                *out.entry(g.degree().unwrap()).or_default() += 1;
                f = f.div_exact(g);
            }
        }
        if let Some(d) = f.degree() {
            if d > 0 {
                *out.entry(d).or_default() += 1;
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn ddf_matches_brute_force() {
        // deterministic LCG over small primes; squarefree inputs only
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        let mut tested = 0;
        while tested < 120 {
            let p = [3u64, 5, 7][next() as usize % 3];
            let deg = 2 + (next() as usize % 7);
            let mut coeffs: Vec<u64> = (0..deg).map(|_| next() % p).collect();
            coeffs.push(1 + next() % (p - 1));
            let f = FpPoly::new(p, coeffs);
            if f.degree() != Some(deg) {
                continue;
            }
            let deriv = f.derivative();
            if deriv.is_zero() || fp_gcd(&f, &deriv).degree() != Some(0) {
                continue;
            }
            assert_eq!(ddf(&f), brute_degrees(&f), "p = {p}, f = {:?}", f.coeffs());
            tested += 1;
        }
    }

    #[test]
    fn cycle_type_examples() {
        // n=1: x^2 + 1 splits iff p = 1 mod 4
        let s = factor_degrees_mod_p(&rat(1, 1), &rat(1, 1), 1, 13).unwrap();
        assert!(s.has_root);
        assert_eq!(s.degrees, vec![(1, 2)]);
        let s = factor_degrees_mod_p(&rat(1, 1), &rat(1, 1), 1, 7).unwrap();
        assert!(!s.has_root);
        assert_eq!(s.degrees, vec![(2, 1)]);

        // n=2, p=11: brute-force root search over F_11
        let s = factor_degrees_mod_p(&rat(1, 1), &rat(1, 1), 2, 11).unwrap();
        let brute = (0..11u64).any(|x| {
            (x * x % 11 * (x * x % 11) + 3 * x * x + 1) % 11 == 0
        });
        assert_eq!(s.has_root, brute);
        let total: usize = s.degrees.iter().map(|(d, c)| d * c).sum();
        assert_eq!(total, 4);

        // ramified prime is excluded, not silently used: disc p_2 = 400
        let s = factor_degrees_mod_p(&rat(1, 1), &rat(1, 1), 2, 5).unwrap();
        assert!(s.excluded.is_some());
    }

    #[test]
    fn degree_sum_invariant() {
        for p in numkernel::primes_in(3, 60) {
            for n in [1usize, 2, 3] {
                let s = factor_degrees_mod_p(&rat(1, 1), &rat(1, 1), n, p).unwrap();
                if s.excluded.is_none() {
                    let total: usize = s.degrees.iter().map(|(d, c)| d * c).sum();
                    assert_eq!(total, 1 << n, "p = {p}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn level_one_density_half() {
        let r = root_density_sample(&rat(1, 1), &rat(1, 1), 1, 3, 10000, ExecMode::Sequential)
            .unwrap();
        assert!((r.fraction - 0.5).abs() <= 0.03, "fraction {}", r.fraction);
        assert_eq!(r.prediction, 0.5);
        assert!(!r.prediction_is_upper_bound_only);
    }

    #[test]
    fn level_three_density() {
        let r = root_density_sample(&rat(1, 1), &rat(1, 1), 3, 3, 20000, ExecMode::Parallel)
            .unwrap();
        assert!(r.good >= 2000, "only {} good primes", r.good);
        assert!(
            (r.fraction - 0.1875).abs() <= 0.03,
            "fraction {} vs 3/16",
            r.fraction
        );
        // excluded primes are finite and carry reasons
        assert!(r.excluded.len() < 10);
        assert!(r.excluded.iter().all(|(_, why)| !why.is_empty()));
    }

    #[test]
    fn orbit_density_small() {
        let f = orbit_prime_density(
            &rat(1, 1),
            &rat(1, 1),
            &rat(1, 1),
            20,
            10000,
            ExecMode::Sequential,
        )
        .unwrap();
        // zero-density claim: the empirical fraction at this horizon is small
        assert!(f < 0.25, "fraction {f}");
        let f1 = orbit_prime_density(
            &rat(1, 1),
            &rat(1, 1),
            &rat(1, 1),
            1,
            10000,
            ExecMode::Sequential,
        )
        .unwrap();
        // horizon 1: only primes dividing a_1 = 2 (none odd) qualify
        assert_eq!(f1, 0.0);
    }
}
