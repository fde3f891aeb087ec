//! Certificate pipeline: PCF detection, finite-index certificates from the
//! congruence rules, level-m maximality, the integer-range scan, the Sigma
//! prime set, and the verification reports for the special map family.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::numkernel::{self, FactorBudget};
use crate::quadmap::{self, AutQuadMap, GenQuadMap, ProjPoint};
use crate::sieve::{self, FiveSevenPart, FixedPointVerdict};

fn rat_i(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Renders a rational as "n" or "n/d".
pub fn rat_to_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse()
            .map_err(|_| Error::Argument(format!("not an integer: {t:?}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Argument("zero denominator".into()));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

// ---------------------------------------------------------------------------
// certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PCF")]
    Pcf,
    #[serde(rename = "IRREDUCIBLE_ALL")]
    IrreducibleAll,
    #[serde(rename = "FINITE_INDEX")]
    FiniteIndex,
    #[serde(rename = "MAXIMAL_TO")]
    MaximalTo(u32),
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub rule: String,
    pub params: String,
    pub witnesses: Vec<String>,
}

impl RuleRecord {
    fn new(rule: &str, params: String, witnesses: Vec<String>) -> Self {
        RuleRecord {
            rule: rule.into(),
            params,
            witnesses,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: String,
    pub b: String,
    pub verdict: Verdict,
    pub rule_chain: Vec<RuleRecord>,
    pub exact_levels_checked: usize,
    pub created_at: String,
}

#[derive(Debug, Clone)]
pub struct CertifyOpts {
    /// prime bound for custom_search
    pub prime_bound: u64,
    /// levels of exact delta square-checking
    pub exact_levels: usize,
    pub budget: FactorBudget,
    /// injected timestamp, so certificate streams are reproducible
    pub created_at: String,
    pub mode: ExecMode,
}

impl Default for CertifyOpts {
    fn default() -> Self {
        CertifyOpts {
            prime_bound: 500,
            exact_levels: 8,
            budget: FactorBudget::default(),
            created_at: "1970-01-01T00:00:00Z".into(),
            mode: ExecMode::Parallel,
        }
    }
}

// ---------------------------------------------------------------------------
// PCF detection
// ---------------------------------------------------------------------------

const PCF_ORBIT_CAP: usize = 64;
const PCF_BIT_CAP: u64 = 128;

/// Whether k(x^2+1)/x is post-critically finite, with the orbit of the
/// critical point 1 as evidence (the orbit of -1 is its mirror image).
/// Short-circuits to false when the multiplicative height of k exceeds 2.
pub fn is_pcf(k: &BigRational) -> Result<(bool, Vec<ProjPoint>)> {
    if k.is_zero() {
        return Err(Error::Argument("k must be nonzero".into()));
    }
    let height = k.numer().abs().max(k.denom().abs());
    if height > BigInt::from(2) {
        return Ok((false, Vec::new()));
    }
    let map = AutQuadMap::symmetric(k.clone())?.to_gen();
    let mut orbit = vec![ProjPoint::from_rational(&BigRational::one())];
    for _ in 0..PCF_ORBIT_CAP {
        let next = quadmap::iterate_point(&map, 1, orbit.last().unwrap())?;
        if orbit.contains(&next) {
            return Ok((true, orbit));
        }
        if next.u().bits() > PCF_BIT_CAP || next.w().bits() > PCF_BIT_CAP {
            return Ok((false, orbit));
        }
        orbit.push(next);
    }
    Ok((false, orbit))
}

/// All rationals of multiplicative height <= bound whose map is PCF.
pub fn pcf_search(height_bound: u64) -> Result<Vec<BigRational>> {
    use num_integer::Integer;
    let mut out = Vec::new();
    for num in 1..=height_bound as i64 {
        for den in 1..=height_bound as i64 {
            if !num.gcd(&den).is_one() {
                continue;
            }
            for sign in [1i64, -1] {
                let k = BigRational::new(BigInt::from(sign * num), BigInt::from(den));
                if is_pcf(&k)?.0 {
                    out.push(k);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// finite-index certification (b = 1)
// ---------------------------------------------------------------------------

/// Certifies [C_inf : G_inf] < inf for k(x^2+1)/x over Q by the cheapest
/// applicable rule. Every FINITE_INDEX rule chain covers all levels n;
/// -delta_n non-squareness is automatic since delta_n > 0, and -1 is not a
/// square. Failure is UNKNOWN, never a disproof.
pub fn certify_finite_index(k: &BigRational, opts: &CertifyOpts) -> Result<Certificate> {
    if k.is_zero() {
        return Err(Error::Argument("k must be nonzero".into()));
    }
    let ks = rat_to_string(k);
    let mut chain = Vec::new();
    let cert = |verdict, chain, levels| Certificate {
        k: ks.clone(),
        b: "1".into(),
        verdict,
        rule_chain: chain,
        exact_levels_checked: levels,
        created_at: opts.created_at.clone(),
    };

    // exact refutation probe: a square delta_n means p_n is reducible and
    // no all-n certificate can exist
    let table = quadmap::orbit_table(k, opts.exact_levels)?;
    for n in 2..=opts.exact_levels {
        let d = &table.delta[n - 1];
        if numkernel::is_square(d) {
            let chain = vec![RuleRecord::new(
                "reducible_level",
                format!("delta_{n} = {} is a square", rat_to_string(d)),
                Vec::new(),
            )];
            return Ok(cert(Verdict::Unknown, chain, opts.exact_levels));
        }
    }

    let (pcf, orbit) = is_pcf(k)?;
    if pcf {
        chain.push(RuleRecord::new(
            "pcf",
            format!("orbit of 1 has {} points", orbit.len()),
            Vec::new(),
        ));
        return Ok(cert(Verdict::Pcf, chain, opts.exact_levels));
    }

    if sieve::rule_nosquare(k) {
        chain.push(RuleRecord::new("nosquare", "v_2(k) = 0".into(), vec!["2".into()]));
        return Ok(cert(Verdict::FiniteIndex, chain, opts.exact_levels));
    }

    match sieve::rule_fixedpoint(k, &opts.budget) {
        FixedPointVerdict::Applies { case, witness } => {
            chain.push(RuleRecord::new(
                "fixedpoint",
                format!("case {case}"),
                vec![witness.to_string()],
            ));
            return Ok(cert(Verdict::FiniteIndex, chain, opts.exact_levels));
        }
        FixedPointVerdict::Unknown(msg) => {
            chain.push(RuleRecord::new("fixedpoint", format!("unknown: {msg}"), Vec::new()));
        }
        FixedPointVerdict::NotApplicable => {}
    }

    if sieve::rule_five(k) {
        chain.push(RuleRecord::new("five", "k = +-2 mod 5".into(), vec!["5".into()]));
        return Ok(cert(Verdict::FiniteIndex, chain, opts.exact_levels));
    }

    if let Some(part) = sieve::rule_fiveseven(k) {
        let (params, witnesses) = match part {
            FiveSevenPart::Part1 => ("k = +-2 mod 7, all n".to_string(), vec!["7".into()]),
            FiveSevenPart::Part2 => (
                "k = +-1 mod 7 for even n; odd n via mod 3".to_string(),
                vec!["7".into(), "3".into()],
            ),
        };
        chain.push(RuleRecord::new("fiveseven", params, witnesses));
        return Ok(cert(Verdict::FiniteIndex, chain, opts.exact_levels));
    }

    if let Some(r) = sieve::rule_mod11(k) {
        chain.push(custom_record("mod11", &r));
        return Ok(cert(Verdict::FiniteIndex, chain, opts.exact_levels));
    }

    if let Some(r) = sieve::custom_search(k, opts.prime_bound) {
        chain.push(custom_record("custom_search", &r));
        return Ok(cert(Verdict::FiniteIndex, chain, opts.exact_levels));
    }

    chain.push(RuleRecord::new(
        "exhausted",
        format!("no certifying prime below {}", opts.prime_bound),
        Vec::new(),
    ));
    Ok(cert(Verdict::Unknown, chain, opts.exact_levels))
}

fn custom_record(name: &str, r: &sieve::CustomSearchResult) -> RuleRecord {
    let guards: Vec<String> = r
        .guards
        .iter()
        .map(|(n, g)| format!("n={n}: {g}"))
        .collect();
    RuleRecord::new(
        name,
        format!(
            "p={} tail={} cycle={} guards=[{}]",
            r.p,
            r.report.tail_len,
            r.report.cycle_len,
            guards.join("; ")
        ),
        vec![r.p.to_string()],
    )
}

/// Re-runs every recorded rule and checks it still yields the verdict.
pub fn verify_certificate(cert: &Certificate) -> Result<bool> {
    let k = parse_rat(&cert.k)?;
    let opts = CertifyOpts {
        created_at: cert.created_at.clone(),
        ..CertifyOpts::default()
    };
    let fresh = match cert.verdict {
        Verdict::MaximalTo(m) => certify_maximality(&k, m as usize, &opts)?,
        _ => certify_finite_index(&k, &opts)?,
    };
    Ok(fresh.verdict == cert.verdict && fresh.rule_chain == cert.rule_chain)
}

// ---------------------------------------------------------------------------
// integer-range scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub from: u64,
    pub to: u64,
    pub total: usize,
    pub pcf: usize,
    pub finite_index: usize,
    pub unknown: usize,
    /// k values the fixed-point rule does not reach
    pub fixedpoint_survivors: Vec<u64>,
    /// of the survivors, eliminated by the mod-7 rule
    pub fiveseven_removed: usize,
    /// of the rest, eliminated by the dedicated mod-11 rule
    pub mod11_removed: usize,
    /// of the rest, certified by per-k prime search
    pub custom_search_certified: Vec<u64>,
}

/// Certifies every integer k in [from, to] and reports the rule-stage
/// partition of the fixed-point survivors.
pub fn scan_range(
    from: u64,
    to: u64,
    opts: &CertifyOpts,
) -> Result<(ScanSummary, Vec<Certificate>)> {
    if from < 1 || to < from {
        return Err(Error::Argument(format!("bad range {from}..{to}")));
    }
    let ks: Vec<u64> = (from..=to).collect();
    let opts2 = opts.clone();
    let per_k: Vec<Result<(u64, Certificate, u8)>> = exec::map_items(opts.mode, ks, move |k| {
        let kr = rat_i(k as i64);
        let cert = certify_finite_index(&kr, &opts2)?;
        // stage flags for the partition counts, independent of the chain
        let stage = if is_pcf(&kr)?.0 {
            0u8 // pcf
        } else if !matches!(
            sieve::rule_fixedpoint(&kr, &opts2.budget),
            FixedPointVerdict::NotApplicable
        ) {
            1 // fixedpoint (or unresolved budget; none occur for small k)
        } else if sieve::rule_fiveseven(&kr).is_some() {
            2
        } else if sieve::rule_mod11(&kr).is_some() {
            3
        } else if sieve::custom_search(&kr, opts2.prime_bound).is_some() {
            4
        } else {
            5
        };
        Ok((k, cert, stage))
    });
    let mut certs = Vec::with_capacity(per_k.len());
    let mut summary = ScanSummary {
        from,
        to,
        total: per_k.len(),
        pcf: 0,
        finite_index: 0,
        unknown: 0,
        fixedpoint_survivors: Vec::new(),
        fiveseven_removed: 0,
        mod11_removed: 0,
        custom_search_certified: Vec::new(),
    };
    let mut rows: Vec<(u64, Certificate, u8)> = per_k.into_iter().collect::<Result<_>>()?;
    rows.sort_by_key(|(k, _, _)| *k);
    for (k, cert, stage) in rows {
        match cert.verdict {
            Verdict::Pcf => summary.pcf += 1,
            Verdict::FiniteIndex => summary.finite_index += 1,
            _ => summary.unknown += 1,
        }
        if stage >= 2 {
            summary.fixedpoint_survivors.push(k);
        }
        match stage {
            2 => summary.fiveseven_removed += 1,
            3 => summary.mod11_removed += 1,
            4 => summary.custom_search_certified.push(k),
            _ => {}
        }
        certs.push(cert);
    }
    Ok((summary, certs))
}

// ---------------------------------------------------------------------------
// maximality (b = 1)
// ---------------------------------------------------------------------------

pub const MAX_LEVEL_CAP: usize = 12;

/// Certifies G_m = C_m: delta_n not a square for 2 <= n <= m, -1 not a
/// square (automatic over Q), and v_p(k) = 0 for every prime p dividing
/// some a_n with n < m/2 + 1 (a_n the k = 1 integer sequence).
pub fn certify_maximality(k: &BigRational, m: usize, opts: &CertifyOpts) -> Result<Certificate> {
    if k.is_zero() {
        return Err(Error::Argument("k must be nonzero".into()));
    }
    if m < 2 {
        return Err(Error::Argument("maximality level must be >= 2".into()));
    }
    if m > MAX_LEVEL_CAP {
        return Err(Error::Resource(format!(
            "maximality certification capped at level {MAX_LEVEL_CAP}"
        )));
    }
    let ks = rat_to_string(k);
    let mut chain = Vec::new();
    let mk = |verdict, chain| Certificate {
        k: ks.clone(),
        b: "1".into(),
        verdict,
        rule_chain: chain,
        exact_levels_checked: m,
        created_at: opts.created_at.clone(),
    };

    let table = quadmap::orbit_table(k, m)?;
    for n in 2..=m {
        if numkernel::is_square(&table.delta[n - 1]) {
            chain.push(RuleRecord::new(
                "square_delta",
                format!("delta_{n} is a square"),
                Vec::new(),
            ));
            return Ok(mk(Verdict::Unknown, chain));
        }
    }
    chain.push(RuleRecord::new(
        "delta_nonsquare",
        format!("exact checks for 2 <= n <= {m}; -delta_n < 0 < delta_n"),
        Vec::new(),
    ));

    // primes dividing a_n for n < m/2 + 1
    let n_max = (m + 1) / 2;
    let base = quadmap::orbit_table(&BigRational::one(), n_max)?;
    let a_seq = base.a_seq.as_ref().unwrap();
    let mut primes: Vec<BigInt> = Vec::new();
    for a in a_seq.iter().take(n_max) {
        let f = numkernel::factor(a, &opts.budget)?;
        if !f.is_complete() {
            chain.push(RuleRecord::new(
                "factoring",
                format!("budget exhausted on {a}"),
                Vec::new(),
            ));
            return Ok(mk(Verdict::Unknown, chain));
        }
        primes.extend(f.primes());
    }
    primes.sort();
    primes.dedup();
    for p in &primes {
        let v = numkernel::v_int(k.numer(), p) - numkernel::v_int(k.denom(), p);
        if v != 0 {
            chain.push(RuleRecord::new(
                "valuation",
                format!("v_{p}(k) = {v} != 0"),
                vec![p.to_string()],
            ));
            return Ok(mk(Verdict::Unknown, chain));
        }
    }
    chain.push(RuleRecord::new(
        "coprimality",
        format!("v_p(k) = 0 for primes of a_1..a_{n_max}"),
        primes.iter().map(|p| p.to_string()).collect(),
    ));
    Ok(mk(Verdict::MaximalTo(m as u32), chain))
}

// ---------------------------------------------------------------------------
// Sigma primes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaPrimeSet {
    pub bound: u64,
    pub primes: Vec<u64>,
    /// smallest n with p | a_n
    pub first_hit: BTreeMap<u64, usize>,
}

/// Primes p <= bound dividing some a_n (k = 1), detected on the projective
/// orbit of 1 mod p: a_n and b_n are coprime, so p | a_n exactly when the
/// reduced orbit hits 0. The orbit lives on P^1(F_p) and repeats within
/// p + 2 steps.
pub fn sigma_primes(bound: u64) -> Result<SigmaPrimeSet> {
    if bound < 2 {
        return Err(Error::Argument("bound must be >= 2".into()));
    }
    let mut primes = Vec::new();
    let mut first_hit = BTreeMap::new();
    for p in numkernel::primes_upto(bound) {
        if let Some(n) = sigma_first_hit(p) {
            primes.push(p);
            first_hit.insert(p, n);
        }
    }
    Ok(SigmaPrimeSet {
        bound,
        primes,
        first_hit,
    })
}

fn sigma_first_hit(p: u64) -> Option<usize> {
    // states: Some(x) for finite x, None for infinity (a fixed point)
    let mut x: Option<u64> = Some(1 % p);
    for n in 1..=(p as usize + 2) {
        x = match x {
            None => None,
            Some(0) => None,
            Some(v) => Some(
                numkernel::mul_mod(
                    (numkernel::mul_mod(v, v, p) + 1) % p,
                    numkernel::inv_mod(v, p),
                    p,
                ),
            ),
        };
        match x {
            Some(0) => return Some(n),
            None => return None, // reached the fixed point at infinity
            _ => {}
        }
    }
    None
}

// ---------------------------------------------------------------------------
// primitive-prime witness for general maps
// ---------------------------------------------------------------------------

/// Searches for a prime q with v_q(p_n(gamma_1) p_n(gamma_2)) odd and
/// v_q = 0 on l(p), l(c), Res(q, p), Disc p, and p_j(gamma_i) for
/// 2 <= j <= n - 1; such a q certifies [K_n : K_{n-1}] maximal.
pub fn maxcor2_check(
    map: &GenQuadMap,
    n: usize,
    budget: &FactorBudget,
) -> Result<Option<BigInt>> {
    if n < 2 {
        return Err(Error::Argument("level must be >= 2".into()));
    }
    let cd = quadmap::critical_data(map)?;
    let gammas = match &cd.points {
        quadmap::CriticalPoints::Rational(pts) if pts.len() == 2 => pts.clone(),
        _ => {
            return Err(Error::Precondition(
                "needs two finite rational critical points".into(),
            ))
        }
    };
    if cd.values.iter().any(|v| v.is_none()) {
        return Err(Error::Precondition("critical values must be finite".into()));
    }
    let inf = ProjPoint::infinity();
    for m in 1..=n {
        if quadmap::iterate_point(map, m, &inf)?.is_zero_point() {
            return Err(Error::Precondition(format!("phi^{m}(infinity) = 0")));
        }
    }
    let mut evals: Vec<Vec<BigRational>> = Vec::new(); // evals[j-1][i] = p_j(gamma_i)
    for j in 1..=n {
        let (pj, _) = quadmap::iterate_poly(map, j)?;
        evals.push(gammas.iter().map(|g| pj.eval(g)).collect());
    }
    let prod: BigRational = evals[n - 1]
        .iter()
        .fold(BigRational::one(), |a, b| a * b);
    if prod.is_zero() {
        return Ok(None);
    }
    let lp = map.p_poly().leading();
    let lc = cd.c.leading();
    let res = numkernel::resultant(&map.q_poly(), &map.p_poly())?;
    let disc_p = numkernel::disc_direct(&map.p_poly())?;
    let mut candidates: Vec<BigInt> = Vec::new();
    for part in [prod.numer(), prod.denom()] {
        if part.is_one() {
            continue;
        }
        let f = numkernel::factor(part, budget)?;
        if !f.is_complete() {
            return Err(Error::Resource(format!(
                "factoring budget exhausted on {}",
                f.cofactor.unwrap()
            )));
        }
        candidates.extend(f.primes());
    }
    candidates.sort();
    candidates.dedup();
    'cand: for q in candidates {
        let v = |x: &BigRational| numkernel::v_int(x.numer(), &q) - numkernel::v_int(x.denom(), &q);
        if v(&prod) % 2 == 0 {
            continue;
        }
        for x in [&lp, &lc, &res, &disc_p] {
            if !x.is_zero() && v(x) != 0 {
                continue 'cand;
            }
        }
        for row in evals.iter().take(n - 1).skip(1) {
            for x in row {
                if x.is_zero() || v(x) != 0 {
                    continue 'cand;
                }
            }
        }
        return Ok(Some(q));
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// non-polynomial-behavior verification for the critical 2-cycle family
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonpolyReport {
    pub levels: usize,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

fn v2_int(x: &BigInt) -> i64 {
    numkernel::v_int(x, &BigInt::from(2))
}

fn v3_int(x: &BigInt) -> i64 {
    numkernel::v_int(x, &BigInt::from(3))
}

/// Exact verification for phi_0 = (1 + 3x^2)/(1 - 4x - x^2): base values at
/// x = 1, the power-of-two pattern, 2- and 3-adic parity at the critical
/// point -1/3, the mod-5 and mod-3 orbit structure, and the one-cocycle
/// value pattern at x = 0 across the family.
pub fn nonpoly_verify(levels: usize) -> Result<NonpolyReport> {
    if levels < 2 || levels > 12 {
        return Err(Error::Argument("levels must be in 2..=12".into()));
    }
    let map = GenQuadMap::cycle_family(&BigRational::zero())?;
    let mut checks = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        checks.push(CheckResult {
            name: name.into(),
            pass,
            detail,
        });
    };

    // (a) base values at x = 1
    let one = BigInt::one();
    let (p1, _q1) = quadmap::iterate_pair_raw(&map, 1, &one, &one)?;
    let (p2, q2) = quadmap::iterate_pair_raw(&map, 2, &one, &one)?;
    let a_ok = p1 == BigInt::from(4) && p2 == BigInt::from(64) && q2 == BigInt::from(64);
    push(
        "base_values",
        a_ok,
        format!("p1(1)={p1}, p2(1)={p2}, q2(1)={q2}"),
    );

    // (b) p_n(1) is an even power of 2
    let mut b_ok = true;
    let mut b_detail = String::new();
    for n in 1..=levels {
        let (pn, _) = quadmap::iterate_pair_raw(&map, n, &one, &one)?;
        let e = v2_int(&pn);
        let odd_part = &pn >> e as usize;
        if !(pn.is_positive() && odd_part.is_one() && e % 2 == 0) {
            b_ok = false;
            b_detail = format!("p_{n}(1) = {pn} is not an even power of 2");
            break;
        }
    }
    push("power_of_two", b_ok, b_detail);

    // (c) 2- and 3-adic parity at -1/3: p_n(-1/3) = P_n(-1,3)/3^(2^n), so
    // v2 is v2(P_n) and v3 is v3(P_n) - 2^n (same parity for n >= 1)
    let mut c_ok = true;
    let mut c_detail = String::new();
    for n in 1..=levels {
        let (pn, _) = quadmap::iterate_pair_raw(&map, n, &BigInt::from(-1), &BigInt::from(3))?;
        let v2 = v2_int(&pn);
        let v3 = v3_int(&pn) - (1i64 << n);
        if v2 % 2 != 0 || (n >= 2 && v3 % 2 != 0) {
            c_ok = false;
            c_detail = format!("level {n}: v2 = {v2}, v3 = {v3}");
            break;
        }
    }
    push("adic_parity", c_ok, c_detail);

    // (d) mod-5 orbit of -1/3: (3,0) -> (2,1) -> (3,4) -> (3,4), with
    // neither of +-p_n(-1/3) ever a square mod 5
    let start = ProjPoint::from_rational(&BigRational::new(BigInt::from(-1), BigInt::from(3)));
    let rep5 = sieve::mod_orbit_general(&map, &start, 5, false)?;
    let d_ok = rep5.states.len() >= 3
        && rep5.states[..3] == [(3, 0), (2, 1), (3, 4)]
        && rep5.zero_hit.is_none()
        && rep5.qr_flags.iter().all(|&f| f == -1)
        && rep5.neg_qr_flags.iter().all(|&f| f == -1);
    push("mod5_orbit", d_ok, format!("states {:?}", rep5.states));

    // (e) mod-3 orbit of infinity: hits 0, then the 2-cycle 1 -> -1 -> 1
    let rep3 = sieve::mod_orbit_general(&map, &ProjPoint::infinity(), 3, false)?;
    let e_ok = rep3.zero_hit == Some(1)
        && rep3.cycle_len == 2
        && rep3.states[rep3.tail_len..].iter().all(|&(u, w)| {
            // projectively 1 = (1,1) and -1 = (1,2) or scalings
            u != 0 && w != 0 && (u == w || (u + u) % 3 == w % 3 || (w + w) % 3 == u % 3)
        });
    push("mod3_infinity", e_ok, format!("states {:?}", rep3.states));

    // (f) value pattern at x = 0 across the family: p_1(0) = 1,
    // p_2(0) = 4 + 2a, then squares times alternating constants 4 and
    // 4 + 2a; and q_n(0) = (-1)^(n+1) p_n(0)
    let mut f_ok = true;
    let mut f_detail = String::new();
    'outer: for a in [0i64, 1, -1, 3] {
        let fam = GenQuadMap::cycle_family(&rat_i(a))?;
        let mut vals = Vec::new();
        for n in 1..=levels.min(6) {
            let (pn, qn) = quadmap::iterate_pair_raw(&fam, n, &BigInt::zero(), &one)?;
            if qn != if n % 2 == 1 { pn.clone() } else { -pn.clone() } {
                f_ok = false;
                f_detail = format!("a={a}, level {n}: q_n(0) sign relation fails");
                break 'outer;
            }
            vals.push(pn);
        }
        let c_even = BigInt::from(4);
        let c_odd = BigInt::from(4 + 2 * a);
        if vals[0] != one || vals[1] != c_odd {
            f_ok = false;
            f_detail = format!("a={a}: base values {:?}", &vals[..2]);
            break;
        }
        for (i, pair) in vals.windows(2).enumerate().skip(1) {
            let mult = if (i + 1) % 2 == 1 { &c_odd } else { &c_even };
            if pair[1] != mult * &pair[0] * &pair[0] {
                f_ok = false;
                f_detail = format!("a={a}: pattern fails at level {}", i + 2);
                break 'outer;
            }
        }
    }
    push("value_pattern", f_ok, f_detail);

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(NonpolyReport {
        levels,
        checks,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn pcf_examples() {
        assert!(is_pcf(&rat(1, 2)).unwrap().0);
        assert!(is_pcf(&rat(-1, 2)).unwrap().0);
        assert!(!is_pcf(&rat(1, 1)).unwrap().0);
        assert!(!is_pcf(&rat(3, 1)).unwrap().0);
        let found = pcf_search(2).unwrap();
        assert_eq!(found, vec![rat(-1, 2), rat(1, 2)]);
    }

    #[test]
    fn certify_small_k() {
        let opts = CertifyOpts::default();
        let c = certify_finite_index(&rat(1, 1), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::FiniteIndex);
        assert_eq!(c.rule_chain[0].rule, "nosquare");

        let c = certify_finite_index(&rat(1, 2), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Pcf);

        // square delta_2 = 100/81 at k = 2/3 refutes any all-n certificate
        let c = certify_finite_index(&rat(2, 3), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        assert_eq!(c.rule_chain[0].rule, "reducible_level");
        assert!(c.rule_chain[0].params.contains("100/81"));
    }

    #[test]
    fn certify_table_rows_use_expected_primes() {
        let opts = CertifyOpts::default();
        for (k, p) in [(444u64, 61u64), (840, 197), (6240, 17), (9804, 29)] {
            let c = certify_finite_index(&rat(k as i64, 1), &opts).unwrap();
            assert_eq!(c.verdict, Verdict::FiniteIndex, "k = {k}");
            let last = c.rule_chain.last().unwrap();
            assert_eq!(last.rule, "custom_search");
            assert_eq!(last.witnesses, vec![p.to_string()]);
        }
    }

    #[test]
    fn certificate_roundtrip_and_replay() {
        let opts = CertifyOpts::default();
        for k in [rat(1, 1), rat(444, 1), rat(2, 3), rat(1, 2)] {
            let c = certify_finite_index(&k, &opts).unwrap();
            let json = serde_json::to_string(&c).unwrap();
            let back: Certificate = serde_json::from_str(&json).unwrap();
            assert_eq!(back, c);
            assert!(verify_certificate(&c).unwrap());
        }
    }

    #[test]
    fn consistency_with_exact_squares() {
        let opts = CertifyOpts::default();
        for k in 1..=300i64 {
            let kr = rat(k, 1);
            let c = certify_finite_index(&kr, &opts).unwrap();
            if c.verdict == Verdict::FiniteIndex {
                let t = quadmap::orbit_table(&kr, 8).unwrap();
                for d in &t.delta {
                    assert!(!numkernel::is_square(d), "k = {k}");
                    assert!(!numkernel::is_square(&-d), "k = {k}");
                }
            }
        }
    }

    #[test]
    fn maximality_examples() {
        let opts = CertifyOpts::default();
        let c = certify_maximality(&rat(1, 1), 8, &opts).unwrap();
        assert_eq!(c.verdict, Verdict::MaximalTo(8));
        let coprime = c.rule_chain.iter().find(|r| r.rule == "coprimality").unwrap();
        assert_eq!(coprime.witnesses, vec!["2", "5", "29", "941"]);

        let c = certify_maximality(&rat(3, 1), 6, &opts).unwrap();
        assert_eq!(c.verdict, Verdict::MaximalTo(6));

        let c = certify_maximality(&rat(5, 1), 6, &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        assert!(c
            .rule_chain
            .iter()
            .any(|r| r.rule == "valuation" && r.witnesses == vec!["5"]));
    }

    #[test]
    fn sigma_small() {
        let s = sigma_primes(50).unwrap();
        assert_eq!(s.primes, vec![2, 5, 29, 41]);
        assert_eq!(s.first_hit[&2], 1);
        assert_eq!(s.first_hit[&5], 2);
        assert_eq!(s.first_hit[&29], 3);
    }

    #[test]
    fn maxcor2_examples() {
        let budget = FactorBudget::default();
        let m = GenQuadMap::cycle_family(&rat(0, 1)).unwrap();
        let w2 = maxcor2_check(&m, 2, &budget).unwrap().unwrap();
        assert!(w2 > BigInt::from(5), "witness {w2} should avoid 2, 3, 5");
        let w3 = maxcor2_check(&m, 3, &budget).unwrap();
        assert!(w3.is_some());
    }

    #[test]
    fn nonpoly_small() {
        let r = nonpoly_verify(5).unwrap();
        assert!(r.all_pass, "{:?}", r.checks);
    }

    #[test]
    fn scan_small_range() {
        let opts = CertifyOpts {
            mode: ExecMode::Sequential,
            ..CertifyOpts::default()
        };
        let (summary, certs) = scan_range(1, 200, &opts).unwrap();
        assert_eq!(summary.total, 200);
        assert_eq!(certs.len(), 200);
        // 36, 120, 144 are the survivors below 200
        assert_eq!(summary.fixedpoint_survivors, vec![36, 120, 144]);
        // every certificate in a small integer range certifies
        assert_eq!(summary.unknown, 0);
        assert_eq!(summary.pcf, 0);
    }

    #[test]
    fn scan_deterministic_across_modes() {
        let seq = CertifyOpts {
            mode: ExecMode::Sequential,
            ..CertifyOpts::default()
        };
        let par = CertifyOpts {
            mode: ExecMode::Parallel,
            ..CertifyOpts::default()
        };
        let a = scan_range(40, 160, &seq).unwrap();
        let b = scan_range(40, 160, &par).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn rat_parsing() {
        assert_eq!(parse_rat("444").unwrap(), rat(444, 1));
        assert_eq!(parse_rat("2/3").unwrap(), rat(2, 3));
        assert_eq!(parse_rat("-1/2").unwrap(), rat(-1, 2));
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("1/0").is_err());
        assert_eq!(rat_to_string(&rat(4, 6)), "2/3");
    }
}
