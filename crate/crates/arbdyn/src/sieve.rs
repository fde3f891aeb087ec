//! Mod-p orbit engine for the symmetric family: the eventually periodic
//! sequence (delta_n, eps_n) mod p with tail/cycle detection and
//! quadratic-residue flags, plus the congruence rules built on it.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numkernel::{
    self, factor, inv_mod, legendre_u64, mul_mod, primes_upto, FactorBudget,
};
use crate::quadmap::{GenQuadMap, ProjPoint};

// ---------------------------------------------------------------------------
// (delta, eps) orbits mod p
// ---------------------------------------------------------------------------

/// Eventually periodic orbit of (delta_n, eps_n) mod p. `states[i]` holds
/// level n = i + 1; a level is "exceptional" when delta_n is a quadratic
/// residue (including 0) mod p. Residues inside the cycle recur for
/// infinitely many n and are reported separately from tail exceptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModOrbitReport {
    pub p: u64,
    pub k_mod_p: u64,
    pub tail_len: usize,
    pub cycle_len: usize,
    pub states: Vec<(u64, u64)>,
    /// legendre(delta, p) per state
    pub qr_flags: Vec<i32>,
    /// legendre(-delta, p) per state
    pub neg_qr_flags: Vec<i32>,
    /// tail levels n with delta_n a residue mod p
    pub exceptional_levels: Vec<usize>,
    /// true when some cycle state has delta a residue mod p
    pub cycle_has_residue: bool,
}

/// x mod p for a rational with denominator invertible mod p.
pub fn reduce_rational_mod(x: &BigRational, p: u64) -> Result<u64> {
    let pb = BigInt::from(p);
    let num = x.numer().mod_floor(&pb).to_u64().unwrap();
    let den = x.denom().mod_floor(&pb).to_u64().unwrap();
    if den == 0 {
        return Err(Error::Argument(format!("p = {p} divides den({x})")));
    }
    Ok(mul_mod(num, inv_mod(den, p), p))
}

/// Orbit of (delta, eps) mod p from (2k^2, k), iterating
/// (d, e) -> (d^2 + e^2, d e / k) until the first repeated state.
pub fn mod_orbit(k: &BigRational, p: u64) -> Result<ModOrbitReport> {
    if p < 3 || !numkernel::is_prime_u64(p) {
        return Err(Error::Argument(format!("p = {p} must be an odd prime")));
    }
    let km = reduce_rational_mod(k, p)?;
    if km == 0 {
        return Err(Error::Argument(format!("p = {p} divides num(k)")));
    }
    let kinv = inv_mod(km, p);
    let mut state = (mul_mod(2 % p, mul_mod(km, km, p), p), km);
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    let mut states = Vec::new();
    loop {
        if let Some(&i) = seen.get(&state) {
            let tail_len = i;
            let cycle_len = states.len() - i;
            let qr_flags: Vec<i32> = states.iter().map(|&(d, _)| legendre_u64(d, p)).collect();
            let neg_qr_flags: Vec<i32> = states
                .iter()
                .map(|&(d, _)| legendre_u64((p - d % p) % p, p))
                .collect();
            let mut exceptional_levels = Vec::new();
            let mut cycle_has_residue = false;
            for (idx, &f) in qr_flags.iter().enumerate() {
                if f >= 0 {
                    if idx < tail_len {
                        exceptional_levels.push(idx + 1);
                    } else {
                        cycle_has_residue = true;
                    }
                }
            }
            return Ok(ModOrbitReport {
                p,
                k_mod_p: km,
                tail_len,
                cycle_len,
                states,
                qr_flags,
                neg_qr_flags,
                exceptional_levels,
                cycle_has_residue,
            });
        }
        seen.insert(state, states.len());
        states.push(state);
        let (d, e) = state;
        state = (
            (mul_mod(d, d, p) + mul_mod(e, e, p)) % p,
            mul_mod(mul_mod(d, e, p), kinv, p),
        );
    }
}

// ---------------------------------------------------------------------------
// general pair orbits mod p
// ---------------------------------------------------------------------------

/// Orbit of the affine pair (p_n(x0), q_n(x0)) mod p for a general map.
/// `states[i]` is the pair after i+1 applications of the map.
#[derive(Debug, Clone)]
pub struct PairOrbitReport {
    pub p: u64,
    pub start: (u64, u64),
    pub tail_len: usize,
    pub cycle_len: usize,
    pub states: Vec<(u64, u64)>,
    /// legendre(u, p) and legendre(-u, p) per state
    pub qr_flags: Vec<i32>,
    pub neg_qr_flags: Vec<i32>,
    /// first 1-based step where the numerator vanishes mod p, if any
    pub zero_hit: Option<usize>,
}

/// Reduces the map mod p and iterates the homogeneous pair from
/// (x0 num/den, 1). Bad reduction (p | Res(p, q) or a coefficient
/// denominator) is an error unless explicitly allowed.
pub fn mod_orbit_general(
    map: &GenQuadMap,
    start: &ProjPoint,
    p: u64,
    allow_bad_reduction: bool,
) -> Result<PairOrbitReport> {
    if p < 2 || !numkernel::is_prime_u64(p) {
        return Err(Error::Argument(format!("p = {p} must be prime")));
    }
    if !allow_bad_reduction {
        let res = numkernel::resultant(&map.q_poly(), &map.p_poly())?;
        let v = numkernel::v_int(res.numer(), &BigInt::from(p))
            - numkernel::v_int(res.denom(), &BigInt::from(p));
        if v > 0 {
            return Err(Error::Precondition(format!(
                "bad reduction: p = {p} divides Res(q, p) = {res}"
            )));
        }
    }
    let (pc, qc) = map.int_model();
    let pb = BigInt::from(p);
    let red = |c: &BigInt| c.mod_floor(&pb).to_u64().unwrap();
    let pcm = [red(&pc[0]), red(&pc[1]), red(&pc[2])];
    let qcm = [red(&qc[0]), red(&qc[1]), red(&qc[2])];
    let apply = |u: u64, w: u64, c: &[u64; 3]| -> u64 {
        (mul_mod(c[2], mul_mod(u, u, p), p)
            + mul_mod(c[1], mul_mod(u, w, p), p)
            + mul_mod(c[0], mul_mod(w, w, p), p))
            % p
    };
    // normalize the start to (x0 mod p, 1), or (1, 0) when it reduces to
    // infinity, so the orbit states are the literal pairs (p_n(x0), q_n(x0))
    let su = red(start.u());
    let sw = red(start.w());
    let mut state = if sw == 0 {
        (1, 0)
    } else {
        (mul_mod(su, inv_mod(sw, p), p), 1)
    };
    let start_state = state;
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    let mut states: Vec<(u64, u64)> = Vec::new();
    let (tail_len, cycle_len) = loop {
        let next = (apply(state.0, state.1, &pcm), apply(state.0, state.1, &qcm));
        if let Some(&i) = seen.get(&next) {
            break (i, states.len() - i);
        }
        seen.insert(next, states.len());
        states.push(next);
        state = next;
    };
    let qr_flags: Vec<i32> = states
        .iter()
        .map(|&(u, _)| if p == 2 { if u == 0 { 0 } else { 1 } } else { legendre_u64(u, p) })
        .collect();
    let neg_qr_flags: Vec<i32> = states
        .iter()
        .map(|&(u, _)| if p == 2 { if u == 0 { 0 } else { 1 } } else { legendre_u64((p - u % p) % p, p) })
        .collect();
    let zero_hit = states.iter().position(|&(u, _)| u == 0).map(|i| i + 1);
    Ok(PairOrbitReport {
        p,
        start: start_state,
        tail_len,
        cycle_len,
        states,
        qr_flags,
        neg_qr_flags,
        zero_hit,
    })
}

// ---------------------------------------------------------------------------
// congruence rules (b = 1, K = Q)
// ---------------------------------------------------------------------------

/// 2-adic rule: v_2(k) = 0 certifies delta_n not a square for all n >= 1
/// (n = 1 because delta_1 = 2k^2 square would force 2 square).
pub fn rule_nosquare(k: &BigRational) -> bool {
    !k.is_zero() && k.numer().is_odd() && k.denom().is_odd()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeVerdict {
    /// delta_n nonsquare for all n >= 1 (v_3(k) = 0)
    AllN,
    /// delta_n nonsquare for all odd n (unconditional over Q)
    OddNOnly,
}

pub fn rule_three(k: &BigRational) -> ThreeVerdict {
    let three = BigInt::from(3);
    let v = numkernel::v_int(k.numer(), &three) - numkernel::v_int(k.denom(), &three);
    if v == 0 {
        ThreeVerdict::AllN
    } else {
        ThreeVerdict::OddNOnly
    }
}

/// Mod-5 rule: k = +-2 mod 5 certifies neither of +-delta_n square, all n.
pub fn rule_five(k: &BigRational) -> bool {
    match reduce_rational_mod(k, 5) {
        Ok(r) => r == 2 || r == 3,
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiveSevenPart {
    /// k = +-2 mod 7: all n via the mod-7 cycle alone
    Part1,
    /// k = +-1 mod 7: even n via mod 7, odd n via the unconditional mod-3
    /// argument
    Part2,
}

pub fn rule_fiveseven(k: &BigRational) -> Option<FiveSevenPart> {
    match reduce_rational_mod(k, 7) {
        Ok(2) | Ok(5) => Some(FiveSevenPart::Part1),
        Ok(1) | Ok(6) => Some(FiveSevenPart::Part2),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixedPointVerdict {
    Applies { case: u8, witness: BigInt },
    NotApplicable,
    Unknown(String),
}

/// Fixed-point congruence rule, three cases:
/// (1) a prime p | 2k -+ 1 with 2 a non-residue mod p (p = 3, 5 mod 8);
/// (2) p | 2k^2 - k + 1 with -k a non-residue mod p;
/// (3) p | 2k^2 + k + 1 with k a non-residue mod p.
pub fn rule_fixedpoint(k: &BigRational, budget: &FactorBudget) -> FixedPointVerdict {
    let two = BigRational::from_integer(2.into());
    let one = BigRational::one();
    let case1 = [&two * k - &one, &two * k + &one];
    let mut incomplete = None;
    for m in &case1 {
        if m.is_zero() {
            continue;
        }
        match factor(m.numer(), budget) {
            Ok(f) => {
                for p in f.primes() {
                    let r = p.mod_floor(&BigInt::from(8)).to_u64().unwrap();
                    if r == 3 || r == 5 {
                        return FixedPointVerdict::Applies {
                            case: 1,
                            witness: p,
                        };
                    }
                }
                if !f.is_complete() {
                    incomplete = Some(format!("cofactor of {m} unresolved"));
                }
            }
            Err(e) => incomplete = Some(e.to_string()),
        }
    }
    let k2 = k * k;
    for (case, m, test_val) in [
        (2u8, &two * &k2 - k + &one, -k.clone()),
        (3u8, &two * &k2 + k + &one, k.clone()),
    ] {
        if m.is_zero() {
            continue;
        }
        match factor(m.numer(), budget) {
            Ok(f) => {
                for p in f.primes() {
                    if p == BigInt::from(2) {
                        continue;
                    }
                    // test value as a residue mod p needs its denominator
                    // invertible; p | num(2k^2 -+ k + 1) never divides
                    // num(k) or den(k)
                    let pb = &p;
                    let num = test_val.numer().mod_floor(pb);
                    let den = test_val.denom().mod_floor(pb);
                    if den.is_zero() {
                        continue;
                    }
                    let deninv = den.modpow(&(pb - BigInt::from(2)), pb);
                    let val = (num * deninv).mod_floor(pb);
                    if numkernel::legendre(&val, pb) == -1 {
                        return FixedPointVerdict::Applies { case, witness: p };
                    }
                }
                if !f.is_complete() {
                    incomplete = Some(format!("cofactor of {m} unresolved"));
                }
            }
            Err(e) => incomplete = Some(e.to_string()),
        }
    }
    match incomplete {
        Some(msg) => FixedPointVerdict::Unknown(msg),
        None => FixedPointVerdict::NotApplicable,
    }
}

// ---------------------------------------------------------------------------
// guarded custom search
// ---------------------------------------------------------------------------

/// Why a small exceptional level is harmless despite delta_n being a
/// residue mod the search prime.
pub fn guard_reason(n: usize, k: &BigRational) -> Option<&'static str> {
    if n % 2 == 1 {
        // S_n = 2 mod 3 for odd n, unconditionally over Q
        return Some("odd level: delta_n = 2 mod 3 argument");
    }
    if n == 2 && k.is_integer() && k.is_positive() {
        return Some("level 2: 4k^2 + 1 is never a square for positive integer k");
    }
    None
}

#[derive(Debug, Clone)]
pub struct CustomSearchResult {
    pub p: u64,
    pub report: ModOrbitReport,
    /// guard reason per exceptional tail level
    pub guards: Vec<(usize, &'static str)>,
}

/// Two-phase search for a certifying prime. Phase 1: smallest odd p < 200
/// with no residue delta anywhere in the orbit. Phase 2: smallest odd
/// p <= bound whose cycle is residue-free and whose tail exceptions are all
/// guarded and at level <= 3.
pub fn custom_search(k: &BigRational, bound: u64) -> Option<CustomSearchResult> {
    let skip = |p: u64| {
        reduce_rational_mod(k, p).map(|r| r == 0).unwrap_or(true)
    };
    let phase1_bound = bound.min(200);
    for p in primes_upto(phase1_bound) {
        if p == 2 || skip(p) {
            continue;
        }
        if let Ok(rep) = mod_orbit(k, p) {
            if !rep.cycle_has_residue && rep.exceptional_levels.is_empty() {
                return Some(CustomSearchResult {
                    p,
                    report: rep,
                    guards: Vec::new(),
                });
            }
        }
    }
    for p in primes_upto(bound) {
        if p == 2 || skip(p) {
            continue;
        }
        if let Ok(rep) = mod_orbit(k, p) {
            if rep.cycle_has_residue {
                continue;
            }
            let mut guards = Vec::new();
            let mut ok = true;
            for &n in &rep.exceptional_levels {
                match guard_reason(n, k) {
                    Some(g) if n <= 3 => guards.push((n, g)),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Some(CustomSearchResult {
                    p,
                    report: rep,
                    guards,
                });
            }
        }
    }
    None
}

/// The dedicated mod-11 rule: for k = +-1 mod 11 the orbit has tail 2 and
/// cycle 4, with the only exception at the guarded level 2.
pub fn rule_mod11(k: &BigRational) -> Option<CustomSearchResult> {
    let r = reduce_rational_mod(k, 11).ok()?;
    if r != 1 && r != 10 {
        return None;
    }
    let rep = mod_orbit(k, 11).ok()?;
    if rep.cycle_has_residue {
        return None;
    }
    let mut guards = Vec::new();
    for &n in &rep.exceptional_levels {
        guards.push((n, guard_reason(n, k)?));
    }
    Some(CustomSearchResult {
        p: 11,
        report: rep,
        guards,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadmap::{self, AutQuadMap};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn mod_orbit_five() {
        // p=5, k=2: (3,2) -> (3,3) -> (3,2), a pure 2-cycle with delta = 3 a
        // nonresidue throughout
        let rep = mod_orbit(&rat(2, 1), 5).unwrap();
        assert_eq!(rep.states, vec![(3, 2), (3, 3)]); // delta_1 = 8 = 3
        assert_eq!((rep.tail_len, rep.cycle_len), (0, 2));
        assert!(!rep.cycle_has_residue);
        assert!(rep.exceptional_levels.is_empty());
    }

    #[test]
    fn mod_orbit_seven() {
        // p=7, k=2: (1,2) -> (5,1) -> (5,6) -> (5,1). delta_1 = 8 = 1 is a
        // residue, so level 1 is exceptional (covered by the odd-level guard);
        // the cycle deltas are both 5, a nonresidue
        let rep = mod_orbit(&rat(2, 1), 7).unwrap();
        assert_eq!(rep.states, vec![(1, 2), (5, 1), (5, 6)]);
        assert_eq!((rep.tail_len, rep.cycle_len), (1, 2));
        assert!(!rep.cycle_has_residue);
        assert_eq!(rep.exceptional_levels, vec![1]);
    }

    #[test]
    fn mod_orbit_table_row() {
        // k=444, p=61: tail 0, cycle 4, no exceptions
        let rep = mod_orbit(&rat(444, 1), 61).unwrap();
        assert_eq!((rep.tail_len, rep.cycle_len), (0, 4));
        assert!(rep.exceptional_levels.is_empty());
        assert!(!rep.cycle_has_residue);
    }

    #[test]
    fn mod_orbit_matches_exact_table() {
        // reduced exact (delta_n, eps_n) must equal the sieve states
        for (k, p) in [(rat(2, 1), 5u64), (rat(444, 1), 61), (rat(7, 3), 13)] {
            let rep = mod_orbit(&k, p).unwrap();
            let horizon = (rep.tail_len + 2 * rep.cycle_len).min(rep.states.len());
            let table = quadmap::orbit_table(&k, horizon).unwrap();
            for i in 0..horizon {
                let d = reduce_rational_mod(&table.delta[i], p).unwrap();
                let e = reduce_rational_mod(&table.eps[i], p).unwrap();
                assert_eq!((d, e), rep.states[i], "k={k}, p={p}, level {}", i + 1);
            }
        }
    }

    #[test]
    fn general_orbit_cycle_family() {
        // start -1/3, p=5: (3,0) -> (2,1) -> (3,4) -> (3,4); neither +-3 a
        // residue in the cycle
        let m = GenQuadMap::cycle_family(&rat(0, 1)).unwrap();
        let start = ProjPoint::from_rational(&rat(-1, 3));
        let rep = mod_orbit_general(&m, &start, 5, false).unwrap();
        assert_eq!(&rep.states[..3], &[(3, 0), (2, 1), (3, 4)]);
        assert_eq!(rep.cycle_len, 1);
        assert!(rep.zero_hit.is_none());
        for (i, &(u, _)) in rep.states.iter().enumerate() {
            if i >= rep.tail_len {
                assert_eq!(legendre_u64(u, 5), -1);
                assert_eq!(legendre_u64(5 - u, 5), -1);
            }
        }
    }

    #[test]
    fn general_orbit_sigma_membership() {
        let m = AutQuadMap::symmetric(rat(1, 1)).unwrap().to_gen();
        let one = ProjPoint::from_rational(&rat(1, 1));
        // 5 is in Sigma: 0 appears
        let rep = mod_orbit_general(&m, &one, 5, false).unwrap();
        assert!(rep.zero_hit.is_some());
        // 3 is not
        let rep = mod_orbit_general(&m, &one, 3, false).unwrap();
        assert!(rep.zero_hit.is_none());
    }

    #[test]
    fn rules_basic() {
        assert!(rule_nosquare(&rat(1, 1)));
        assert!(!rule_nosquare(&rat(444, 1)));
        assert!(!rule_nosquare(&rat(2, 3)));

        assert_eq!(rule_three(&rat(1, 1)), ThreeVerdict::AllN);
        assert_eq!(rule_three(&rat(3, 1)), ThreeVerdict::OddNOnly);
        assert_eq!(rule_three(&rat(444, 1)), ThreeVerdict::OddNOnly);

        assert!(rule_five(&rat(2, 1)));
        assert!(rule_five(&rat(7, 1)));
        assert!(!rule_five(&rat(1, 1)));

        assert_eq!(rule_fiveseven(&rat(2, 1)), Some(FiveSevenPart::Part1));
        assert_eq!(rule_fiveseven(&rat(6, 1)), Some(FiveSevenPart::Part2));
        assert_eq!(rule_fiveseven(&rat(3, 1)), None);
    }

    #[test]
    fn fixedpoint_rule() {
        let budget = FactorBudget::default();
        // k=1: 2k+1 = 3 = 3 mod 8
        match rule_fixedpoint(&rat(1, 1), &budget) {
            FixedPointVerdict::Applies { case: 1, witness } => {
                assert_eq!(witness, BigInt::from(3))
            }
            v => panic!("unexpected verdict {v:?}"),
        }
        // integers not divisible by 4 always hit case 1
        for k in 1..=200i64 {
            if k % 4 != 0 {
                assert!(
                    matches!(
                        rule_fixedpoint(&rat(k, 1), &budget),
                        FixedPointVerdict::Applies { case: 1, .. }
                    ),
                    "k = {k}"
                );
            }
        }
    }

    #[test]
    fn custom_search_table_rows() {
        // k=6240 -> p=17, tail 4, cycle 4, exceptional n=1 (guarded)
        let r = custom_search(&rat(6240, 1), 500).unwrap();
        assert_eq!(r.p, 17);
        assert_eq!((r.report.tail_len, r.report.cycle_len), (4, 4));
        assert_eq!(r.report.exceptional_levels, vec![1]);
        assert_eq!(r.guards.len(), 1);

        // k=3336 -> p=37, tail 2, cycle 6, exceptional n=2 (guarded)
        let r = custom_search(&rat(3336, 1), 500).unwrap();
        assert_eq!(r.p, 37);
        assert_eq!((r.report.tail_len, r.report.cycle_len), (2, 6));
        assert_eq!(r.report.exceptional_levels, vec![2]);
    }

    #[test]
    fn mod11_rule() {
        // k = +-1 mod 11: tail 2, cycle 4, exceptional n=2 only
        let r = rule_mod11(&rat(45, 1)).unwrap();
        assert_eq!((r.report.tail_len, r.report.cycle_len), (2, 4));
        assert_eq!(r.report.exceptional_levels, vec![2]);
        assert!(rule_mod11(&rat(3, 1)).is_none());
    }

    #[test]
    fn custom_search_sound_against_exact() {
        for k in [rat(444, 1), rat(6240, 1), rat(9804, 1)] {
            let r = custom_search(&k, 500).unwrap();
            let table = quadmap::orbit_table(&k, 12).unwrap();
            for d in &table.delta {
                assert!(!numkernel::is_square(d), "k = {k}, p = {}", r.p);
            }
        }
    }

    #[test]
    fn cycle_well_formed() {
        for (k, p) in [(rat(840, 1), 197u64), (rat(1620, 1), 37)] {
            let rep = mod_orbit(&k, p).unwrap();
            let kinv = inv_mod(rep.k_mod_p, p);
            let mut s = rep.states[rep.tail_len];
            for _ in 0..rep.cycle_len {
                s = (
                    (mul_mod(s.0, s.0, p) + mul_mod(s.1, s.1, p)) % p,
                    mul_mod(mul_mod(s.0, s.1, p), kinv, p),
                );
            }
            assert_eq!(s, rep.states[rep.tail_len]);
            assert!(rep.tail_len + rep.cycle_len <= (p * p) as usize);
        }
    }
}
