//! Closed-form discriminant and fiber-discriminant formulas, each checked
//! against the resultant-based oracle `numkernel::disc_direct`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numkernel::{self, pow_rat};
use crate::quadmap::{self, AutQuadMap, GenQuadMap, ProjPoint};

/// A closed-form value side by side with the signed oracle. Closed forms are
/// stated up to sign, so `matched` compares absolute values.
#[derive(Debug, Clone)]
pub struct DiscReport {
    pub n: usize,
    pub closed_form: BigRational,
    pub oracle: BigRational,
    pub k1: i64,
    pub k2: i64,
    pub k3: i64,
    pub matched: bool,
}

/// |Disc p_n| for the symmetric family k(x^2+b)/x, by the recursion
/// |Disc p_n| = |k|^{2^n(2^{n-1}-1)} |b|^{2^{2n-2}} Disc(p_{n-1})^2 p*_n(1)^2
/// with base |Disc p_1| = |4 b k^2|.
pub fn disc_closed_aut(k: &BigRational, b: &BigRational, n: usize) -> Result<BigRational> {
    if k.is_zero() || b.is_zero() {
        return Err(Error::Argument("k and b must be nonzero".into()));
    }
    if n < 1 {
        return Err(Error::Argument("level must be >= 1".into()));
    }
    if n > 10 {
        return Err(Error::Resource(
            "closed-form recursion capped at level 10 (doubly exponential growth)".into(),
        ));
    }
    let four = BigRational::from_integer(4.into());
    let mut disc = (four * b * k * k).abs();
    if n == 1 {
        return Ok(disc);
    }
    // p*_j(1) = delta_j / k for the b = 1 map with the same k
    let table = quadmap::orbit_table(k, n)?;
    for j in 2..=n {
        let star = &table.delta[j - 1] / k;
        let ek = ((1i64 << j) * ((1i64 << (j - 1)) - 1)) as i64;
        let eb = 1i64 << (2 * j - 2);
        disc = pow_rat(&k.abs(), ek) * pow_rat(&b.abs(), eb) * &disc * &disc * &star * &star;
    }
    Ok(disc)
}

/// |Disc p_n| for a general degree-2 map, assembled from the closed formula.
/// Requires phi^n(infinity) != 0 and phi^{n-1}(infinity) != 0; branches on
/// whether infinity is fixed.
pub fn disc_closed_general(map: &GenQuadMap, n: usize) -> Result<DiscReport> {
    if n < 2 {
        return Err(Error::Argument("closed form needs level >= 2".into()));
    }
    let inf = ProjPoint::infinity();
    for m in [n, n - 1] {
        let img = quadmap::iterate_point(map, m, &inf)?;
        if img.is_zero_point() {
            return Err(Error::Precondition(format!(
                "phi^{m}(infinity) = 0; hypothesis fails"
            )));
        }
    }
    let d: i64 = 2;
    let p = map.p_poly();
    let q = map.q_poly();
    let cd = quadmap::critical_data(map)?;
    let c = &cd.c;
    let d_p = p.degree().unwrap() as i64;
    let d_q = q.degree().map(|x| x as i64).unwrap_or(0);
    let d_c = c.degree().unwrap() as i64;
    let (pn, _) = quadmap::iterate_poly(map, n)?;
    let (pn1, _) = quadmap::iterate_poly(map, n - 1)?;
    let disc_prev = numkernel::disc_direct(&pn1)?;
    let res_qp = numkernel::resultant(&q, &p)?;
    // product over critical roots, as a resultant
    let prod = numkernel::resultant(c, &pn)? / pow_rat(&c.leading(), pn.degree().unwrap() as i64);
    let dn = d.pow(n as u32);
    let dn1 = d.pow((n - 1) as u32);
    let res_exp = dn1 * (dn1 - 2);
    let (k1, k2, k3, assembled) = if map.fixes_infinity() {
        // k1 = d^{2n-1} - d_q(d^{2n-2} - 2 d^{n-1}) - d_c (1-d^n)/(1-d) - 2
        let k1 = d.pow((2 * n - 1) as u32) - d_q * (d.pow((2 * n - 2) as u32) - 2 * dn1)
            - d_c * (dn - 1)
            - 2;
        let k2 = dn;
        let v = pow_rat(&p.leading(), k1)
            * pow_rat(&c.leading(), k2)
            * &disc_prev
            * &disc_prev
            * pow_rat(&res_qp, res_exp)
            * &prod;
        (k1, k2, 0, v)
    } else {
        let k1 = 2 * d - 2 - d_c;
        let k2 = dn1 * (d - d_p) * (dn1 - 2);
        let k3 = dn;
        let v = pow_rat(&pn.leading(), k1)
            * pow_rat(&q.leading(), k2)
            * pow_rat(&c.leading(), k3)
            * &disc_prev
            * &disc_prev
            * pow_rat(&res_qp, res_exp)
            * &prod;
        (k1, k2, k3, v)
    };
    let oracle = numkernel::disc_direct(&pn)?;
    let closed_form = assembled.abs();
    let matched = closed_form == oracle.abs();
    Ok(DiscReport {
        n,
        closed_form,
        oracle,
        k1,
        k2,
        k3,
        matched,
    })
}

/// Comparison report for the symmetric-family recursion against the oracle.
pub fn disc_report_aut(k: &BigRational, b: &BigRational, n: usize) -> Result<DiscReport> {
    let closed = disc_closed_aut(k, b, n)?;
    let map = AutQuadMap::new(k.clone(), b.clone())?.to_gen();
    let (pn, _) = quadmap::iterate_poly(&map, n)?;
    let oracle = numkernel::disc_direct(&pn)?;
    let matched = closed == oracle.abs();
    Ok(DiscReport {
        n,
        closed_form: closed,
        oracle,
        k1: ((1i64 << n) * ((1i64 << (n - 1)) - 1)) as i64,
        k2: 1i64 << (2 * n - 2),
        k3: 0,
        matched,
    })
}

/// Discriminant of the fiber quadratic p - t q.
#[derive(Debug, Clone)]
pub struct FiberDisc {
    pub value: BigRational,
    /// deg(p - tq) < 2; the degree-1 case is reported as a unit
    pub degenerate: bool,
    /// C * prod(phi(gamma_i) - t), available when the critical values are
    /// rational and finite
    pub product_form: Option<BigRational>,
}

pub fn disc_fiber(map: &GenQuadMap, t: &BigRational) -> Result<FiberDisc> {
    let fiber = |t: &BigRational| map.p_poly().sub(&map.q_poly().scale(t));
    let f = fiber(t);
    let (value, degenerate) = match f.degree() {
        Some(2) => (numkernel::disc_direct(&f)?, false),
        Some(_) => (BigRational::one(), true),
        None => return Err(Error::Argument("p - tq vanished identically".into())),
    };
    let cd = quadmap::critical_data(map)?;
    let product_form = match &cd.points {
        quadmap::CriticalPoints::Rational(pts)
            if !pts.is_empty() && cd.values.iter().all(|v| v.is_some()) =>
        {
            let prod_at = |t: &BigRational| -> BigRational {
                cd.values
                    .iter()
                    .map(|v| v.as_ref().unwrap() - t)
                    .fold(BigRational::one(), |a, b| a * b)
            };
            // pin the constant C at a reference fiber with nonzero product
            let mut c_const = None;
            for t0i in 0..16i64 {
                let t0 = BigRational::from_integer(t0i.into());
                let f0 = fiber(&t0);
                let prod0 = prod_at(&t0);
                if f0.degree() == Some(2) && !prod0.is_zero() {
                    c_const = Some(numkernel::disc_direct(&f0)? / prod0);
                    break;
                }
            }
            c_const.map(|c| c * prod_at(t))
        }
        _ => None,
    };
    Ok(FiberDisc {
        value,
        degenerate,
        product_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn aut_closed_form_examples() {
        // k=1, b=1, n=2 -> 400
        assert_eq!(
            disc_closed_aut(&rat(1, 1), &rat(1, 1), 2).unwrap(),
            rat(400, 1)
        );
        // n=3 -> 400^2 * 841 (recursion with p3*(1) = 29, k=b=1)
        assert_eq!(
            disc_closed_aut(&rat(1, 1), &rat(1, 1), 3).unwrap(),
            rat(400 * 400 * 841, 1)
        );
    }

    #[test]
    fn aut_matches_oracle() {
        for k in [rat(1, 1), rat(2, 1), rat(3, 1), rat(2, 3), rat(-5, 1)] {
            for b in [rat(1, 1), rat(2, 1), rat(-5, 1)] {
                for n in [2usize, 3] {
                    let r = disc_report_aut(&k, &b, n).unwrap();
                    assert!(r.matched, "mismatch at k={k}, b={b}, n={n}");
                }
            }
        }
    }

    #[test]
    fn general_matches_oracle() {
        for a in [rat(0, 1), rat(1, 1), rat(-1, 1), rat(3, 1)] {
            let m = GenQuadMap::cycle_family(&a).unwrap();
            for n in [2usize, 3] {
                let r = disc_closed_general(&m, n).unwrap();
                assert!(r.matched, "mismatch for cycle family a={a}, n={n}");
            }
        }
    }

    #[test]
    fn general_specializes_to_aut() {
        // the general formula must reproduce the symmetric-family recursion,
        // exercising the infinity-fixed branch
        for k in [rat(1, 1), rat(3, 1), rat(2, 3)] {
            let m = AutQuadMap::new(k.clone(), rat(1, 1)).unwrap().to_gen();
            assert!(m.fixes_infinity());
            for n in [2usize, 3] {
                let r = disc_closed_general(&m, n).unwrap();
                assert!(r.matched);
                assert_eq!(
                    r.closed_form,
                    disc_closed_aut(&k, &rat(1, 1), n).unwrap()
                );
            }
        }
    }

    #[test]
    fn inseparable_detection() {
        // phi = x^2/(x+1) has the critical point 0 with phi(0) = 0, so p_2
        // is inseparable and both the closed form and the oracle vanish
        let m = GenQuadMap::new(
            [rat(0, 1), rat(0, 1), rat(1, 1)],
            [rat(1, 1), rat(1, 1), rat(0, 1)],
        )
        .unwrap();
        let r = disc_closed_general(&m, 2).unwrap();
        assert!(r.closed_form.is_zero());
        assert!(r.oracle.is_zero());
        assert!(r.matched);
    }

    #[test]
    fn fiber_examples() {
        // k(x^2+b)/x at t = beta: beta^2 - 4bk^2
        let m = AutQuadMap::new(rat(3, 1), rat(7, 1)).unwrap().to_gen();
        let beta = rat(5, 1);
        let fd = disc_fiber(&m, &beta).unwrap();
        assert_eq!(fd.value, rat(25 - 4 * 7 * 9, 1));

        // cycle family at t=0: Disc(1 + 3x^2) = -12
        let m0 = GenQuadMap::cycle_family(&rat(0, 1)).unwrap();
        let fd = disc_fiber(&m0, &rat(0, 1)).unwrap();
        assert_eq!(fd.value, rat(-12, 1));
        assert_eq!(fd.product_form, Some(rat(-12, 1)));

        // t = phi(gamma_1) -> 0
        let cd = quadmap::critical_data(&m0).unwrap();
        let v = cd.values[0].clone().unwrap();
        let fd = disc_fiber(&m0, &v).unwrap();
        assert!(fd.value.is_zero());
    }
}
