//! Degree-2 map types and exact orbit/iterate computation: the symmetric
//! family k(x^2+b)/x, general quadratic maps p(x)/q(x), projective points
//! with content removal, and the integer sequences attached per level.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numkernel::{self, FpPoly, QPoly};

/// Default cap for exact polynomial iteration over Q (degree 2^12 = 4096).
pub const EXACT_LEVEL_CAP: usize = 12;
/// Degree cap for mod-p polynomial iteration.
pub const MOD_DEGREE_CAP: usize = 1 << 16;

fn rat_i(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// map types
// ---------------------------------------------------------------------------

/// The symmetric family phi(x) = k(x^2 + b)/x, commuting with x -> -x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutQuadMap {
    pub k: BigRational,
    pub b: BigRational,
}

impl AutQuadMap {
    pub fn new(k: BigRational, b: BigRational) -> Result<Self> {
        if k.is_zero() || b.is_zero() {
            return Err(Error::Argument(
                "symmetric family needs k != 0 and b != 0".into(),
            ));
        }
        Ok(AutQuadMap { k, b })
    }

    pub fn symmetric(k: BigRational) -> Result<Self> {
        AutQuadMap::new(k, BigRational::one())
    }

    /// k = -1/2 is the excluded normal-form value (the map degenerates to a
    /// conjugate of 1/z^2); callers decide how to treat it.
    pub fn is_excluded_normal_form(&self) -> bool {
        self.k == BigRational::new(BigInt::from(-1), BigInt::from(2))
    }

    pub fn to_gen(&self) -> GenQuadMap {
        let kb = &self.k * &self.b;
        GenQuadMap {
            p: [kb, BigRational::zero(), self.k.clone()],
            q: [BigRational::zero(), BigRational::one(), BigRational::zero()],
        }
    }
}

/// General quadratic map p(x)/q(x), coefficients constant-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenQuadMap {
    pub p: [BigRational; 3],
    pub q: [BigRational; 3],
}

impl GenQuadMap {
    pub fn new(p: [BigRational; 3], q: [BigRational; 3]) -> Result<Self> {
        let m = GenQuadMap { p, q };
        let dp = m.p_poly().degree();
        let dq = m.q_poly().degree();
        if dp.max(dq) != Some(2) {
            return Err(Error::Argument("map must have degree exactly 2".into()));
        }
        let r = numkernel::resultant(&m.p_poly(), &m.q_poly())?;
        if r.is_zero() {
            return Err(Error::Argument(
                "numerator and denominator share a root".into(),
            ));
        }
        Ok(m)
    }

    /// One-parameter family of maps with critical points 1 and -1/3, the
    /// critical 2-cycle 1 -> -1 -> 1, and 0 preperiodic (0 -> 1):
    /// (1 + a x + (3+a) x^2) / (1 - (4+a) x - (a+1) x^2), a != -2.
    pub fn cycle_family(a: &BigRational) -> Result<Self> {
        GenQuadMap::new(
            [BigRational::one(), a.clone(), a + rat_i(3)],
            [
                BigRational::one(),
                -(a + rat_i(4)),
                -(a + BigRational::one()),
            ],
        )
    }

    pub fn p_poly(&self) -> QPoly {
        QPoly::new(self.p.to_vec())
    }

    pub fn q_poly(&self) -> QPoly {
        QPoly::new(self.q.to_vec())
    }

    /// Whether infinity is a fixed point (deg p = 2, deg q < 2).
    pub fn fixes_infinity(&self) -> bool {
        !self.p[2].is_zero() && self.q[2].is_zero()
    }

    /// Homogeneous integer model: coefficients scaled by one common
    /// denominator, so (P, Q) define the same projective map.
    pub fn int_model(&self) -> ([BigInt; 3], [BigInt; 3]) {
        let mut l = BigInt::one();
        for c in self.p.iter().chain(self.q.iter()) {
            l = l.lcm(c.denom());
        }
        let scale = |c: &BigRational| (c * BigRational::from_integer(l.clone())).to_integer();
        (
            [scale(&self.p[0]), scale(&self.p[1]), scale(&self.p[2])],
            [scale(&self.q[0]), scale(&self.q[1]), scale(&self.q[2])],
        )
    }
}

// ---------------------------------------------------------------------------
// projective points
// ---------------------------------------------------------------------------

/// Content-free projective point (u : w) over Z.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    u: BigInt,
    w: BigInt,
}

impl ProjPoint {
    pub fn new(u: BigInt, w: BigInt) -> Result<Self> {
        if u.is_zero() && w.is_zero() {
            return Err(Error::Argument("(0, 0) is not a projective point".into()));
        }
        let g = u.gcd(&w);
        let (mut u, mut w) = (u / &g, w / &g);
        // canonical sign: w > 0, or u > 0 at infinity
        let flip = if w.is_zero() {
            u.is_negative()
        } else {
            w.is_negative()
        };
        if flip {
            u = -u;
            w = -w;
        }
        Ok(ProjPoint { u, w })
    }

    pub fn infinity() -> Self {
        ProjPoint {
            u: BigInt::one(),
            w: BigInt::zero(),
        }
    }

    pub fn from_rational(x: &BigRational) -> Self {
        ProjPoint {
            u: x.numer().clone(),
            w: x.denom().clone(),
        }
    }

    pub fn u(&self) -> &BigInt {
        &self.u
    }

    pub fn w(&self) -> &BigInt {
        &self.w
    }

    pub fn is_infinity(&self) -> bool {
        self.w.is_zero()
    }

    pub fn is_zero_point(&self) -> bool {
        self.u.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_infinity() {
            None
        } else {
            Some(BigRational::new(self.u.clone(), self.w.clone()))
        }
    }
}

fn apply_homog(pc: &[BigInt; 3], u: &BigInt, w: &BigInt) -> BigInt {
    // constant-first coefficients: value = c2 u^2 + c1 u w + c0 w^2
    &pc[2] * u * u + &pc[1] * u * w + &pc[0] * w * w
}

/// n-th iterate at a point, with content removed after every step.
pub fn iterate_point(map: &GenQuadMap, n: usize, x0: &ProjPoint) -> Result<ProjPoint> {
    Ok(iterate_point_recording(map, n, x0)?.0)
}

/// Same as `iterate_point`, also returning the content divided out at each
/// step (the cancellation pattern matters for valuation arguments).
pub fn iterate_point_recording(
    map: &GenQuadMap,
    n: usize,
    x0: &ProjPoint,
) -> Result<(ProjPoint, Vec<BigInt>)> {
    let (pc, qc) = map.int_model();
    let mut u = x0.u.clone();
    let mut w = x0.w.clone();
    let mut contents = Vec::with_capacity(n);
    for _ in 0..n {
        let nu = apply_homog(&pc, &u, &w);
        let nw = apply_homog(&qc, &u, &w);
        if nu.is_zero() && nw.is_zero() {
            return Err(Error::Precondition(
                "iterate passed through a common root of P and Q".into(),
            ));
        }
        let g = nu.gcd(&nw);
        contents.push(g.clone());
        u = nu / &g;
        w = nw / &g;
    }
    let pt = ProjPoint::new(u, w)?;
    Ok((pt, contents))
}

/// Raw homogeneous pair iteration without content removal: returns
/// (P_n(u0, w0), Q_n(u0, w0)) exactly. Values double in bit size per level.
pub fn iterate_pair_raw(
    map: &GenQuadMap,
    n: usize,
    u0: &BigInt,
    w0: &BigInt,
) -> Result<(BigInt, BigInt)> {
    if n > 20 {
        return Err(Error::Resource(format!(
            "raw pair iteration capped at level 20, requested {n}"
        )));
    }
    let (pc, qc) = map.int_model();
    let mut u = u0.clone();
    let mut w = w0.clone();
    for _ in 0..n {
        let nu = apply_homog(&pc, &u, &w);
        let nw = apply_homog(&qc, &u, &w);
        u = nu;
        w = nw;
    }
    Ok((u, w))
}

// ---------------------------------------------------------------------------
// polynomial iterates
// ---------------------------------------------------------------------------

/// (p_n, q_n) with phi^n = p_n/q_n, by the homogeneous composition
/// p_n = p(p_{n-1}, q_{n-1}), q_n = q(p_{n-1}, q_{n-1}).
pub fn iterate_poly(map: &GenQuadMap, n: usize) -> Result<(QPoly, QPoly)> {
    iterate_poly_capped(map, n, EXACT_LEVEL_CAP)
}

pub fn iterate_poly_capped(map: &GenQuadMap, n: usize, cap: usize) -> Result<(QPoly, QPoly)> {
    if n < 1 {
        return Err(Error::Argument("iterate level must be >= 1".into()));
    }
    if n > cap {
        return Err(Error::Resource(format!(
            "exact polynomial iteration capped at level {cap}, requested {n}"
        )));
    }
    let mut pn = map.p_poly();
    let mut qn = map.q_poly();
    for _ in 1..n {
        let pp = pn.mul(&pn);
        let pq = pn.mul(&qn);
        let qq = qn.mul(&qn);
        let compose = |c: &[BigRational; 3]| {
            pp.scale(&c[2]).add(&pq.scale(&c[1])).add(&qq.scale(&c[0]))
        };
        let np = compose(&map.p);
        let nq = compose(&map.q);
        pn = np;
        qn = nq;
    }
    Ok((pn, qn))
}

/// (p_n, q_n) reduced mod p, built by reducing the recursion from the start.
/// The integer model may scale (p_n, q_n) by a common constant; roots,
/// factor degrees, and squarefreeness are unaffected.
pub fn iterate_poly_mod(map: &GenQuadMap, n: usize, p: u64) -> Result<(FpPoly, FpPoly)> {
    if n < 1 {
        return Err(Error::Argument("iterate level must be >= 1".into()));
    }
    if (1usize << n.min(63)) > MOD_DEGREE_CAP {
        return Err(Error::Resource(format!(
            "mod-p iteration degree cap {MOD_DEGREE_CAP} exceeded at level {n}"
        )));
    }
    let (pc, qc) = map.int_model();
    let red = |c: &BigInt| -> u64 {
        let m = c.mod_floor(&BigInt::from(p));
        use num_traits::ToPrimitive;
        m.to_u64().unwrap()
    };
    let pcm = [red(&pc[0]), red(&pc[1]), red(&pc[2])];
    let qcm = [red(&qc[0]), red(&qc[1]), red(&qc[2])];
    let mut pn = FpPoly::new(p, pcm.to_vec());
    let mut qn = FpPoly::new(p, qcm.to_vec());
    for _ in 1..n {
        let pp = pn.mul(&pn);
        let pq = pn.mul(&qn);
        let qq = qn.mul(&qn);
        let compose = |c: &[u64; 3]| pp.scale(c[2]).add(&pq.scale(c[1])).add(&qq.scale(c[0]));
        let np = compose(&pcm);
        let nq = compose(&qcm);
        pn = np;
        qn = nq;
    }
    Ok((pn, qn))
}

// ---------------------------------------------------------------------------
// orbit table for the symmetric family (b = 1)
// ---------------------------------------------------------------------------

/// Exact per-level data for phi(x) = k(x^2+1)/x: the (delta, eps) sequence,
/// its k-free parts (S_n, T_n) with k-exponents, the k=1 integer sequences
/// (a_n, b_n), and the k=0 constant terms (sigma_n, tau_n).
/// Index i holds level n = i + 1.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    pub k: BigRational,
    pub delta: Vec<BigRational>,
    pub eps: Vec<BigRational>,
    pub s_vals: Vec<BigRational>,
    pub t_vals: Vec<BigRational>,
    pub s_exp: Vec<u64>,
    pub t_exp: Vec<u64>,
    pub a_seq: Option<Vec<BigInt>>,
    pub b_seq: Option<Vec<BigInt>>,
    pub sigma: Vec<BigInt>,
    pub tau: Vec<BigInt>,
}

/// s(n) = (2^n - (-1)^n)/3.
pub fn s_exponent(n: usize) -> u64 {
    let sign: i128 = if n % 2 == 0 { 1 } else { -1 };
    (((1i128 << n) - sign) / 3) as u64
}

/// t(n) = s(n) - 1 for odd n, s(n) for even n.
pub fn t_exponent(n: usize) -> u64 {
    if n % 2 == 1 {
        s_exponent(n) - 1
    } else {
        s_exponent(n)
    }
}

pub fn orbit_table(k: &BigRational, n_max: usize) -> Result<OrbitTable> {
    if k.is_zero() {
        return Err(Error::Argument("k must be nonzero".into()));
    }
    let mut delta = Vec::with_capacity(n_max);
    let mut eps = Vec::with_capacity(n_max);
    let mut s_vals = Vec::with_capacity(n_max);
    let mut t_vals = Vec::with_capacity(n_max);
    let mut s_exp = Vec::with_capacity(n_max);
    let mut t_exp = Vec::with_capacity(n_max);
    let k2 = k * k;
    delta.push(rat_i(2) * &k2);
    eps.push(k.clone());
    s_vals.push(rat_i(2));
    t_vals.push(BigRational::one());
    s_exp.push(s_exponent(1));
    t_exp.push(t_exponent(1));
    for n in 2..=n_max {
        let d = delta[n - 2].clone();
        let e = eps[n - 2].clone();
        delta.push(&d * &d + &e * &e);
        eps.push(d * e / k);
        let sp = &s_vals[n - 2];
        let tp = &t_vals[n - 2];
        let s = if n % 2 == 1 {
            sp * sp + tp * tp
        } else {
            &k2 * sp * sp + tp * tp
        };
        t_vals.push(sp * tp);
        s_vals.push(s);
        s_exp.push(s_exponent(n));
        t_exp.push(t_exponent(n));
    }
    let (a_seq, b_seq) = if k.is_one() {
        let mut a = vec![BigInt::from(2)];
        let mut b = vec![BigInt::one()];
        for n in 2..=n_max {
            let (ap, bp) = (a[n - 2].clone(), b[n - 2].clone());
            a.push(&ap * &ap + &bp * &bp);
            b.push(ap * bp);
        }
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    let (sigma, tau) = sigma_tau(n_max);
    Ok(OrbitTable {
        k: k.clone(),
        delta,
        eps,
        s_vals,
        t_vals,
        s_exp,
        t_exp,
        a_seq,
        b_seq,
        sigma,
        tau,
    })
}

/// The k=0 constant-term sequences: sigma_1 = 2, tau_1 = 1,
/// sigma_{2j} = tau_{2j-1}^2, sigma_{2j+1} = sigma_{2j}^2 + tau_{2j}^2,
/// tau_j = sigma_{j-1} tau_{j-1}. Index i holds level i + 1.
pub fn sigma_tau(n_max: usize) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut sigma = vec![BigInt::from(2)];
    let mut tau = vec![BigInt::one()];
    for n in 2..=n_max {
        let sp = &sigma[n - 2];
        let tp = &tau[n - 2];
        let s = if n % 2 == 0 {
            tp * tp
        } else {
            sp * sp + tp * tp
        };
        tau.push(sp * tp);
        sigma.push(s);
    }
    (sigma, tau)
}

// ---------------------------------------------------------------------------
// critical points and values
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum CriticalPoints {
    /// finite rational critical points
    Rational(Vec<BigRational>),
    /// irrational conjugate pair, carried as the quadratic they satisfy
    Conjugate { quadratic: QPoly, disc: BigRational },
}

#[derive(Debug, Clone)]
pub struct CriticalData {
    /// Wronskian numerator c = q p' - p q'
    pub c: QPoly,
    /// true when deg c < 2d - 2 = 2, i.e. infinity is critical
    pub infinity_critical: bool,
    pub points: CriticalPoints,
    /// phi(gamma) for each rational critical point; None encodes infinity
    pub values: Vec<Option<BigRational>>,
}

pub fn critical_data(map: &GenQuadMap) -> Result<CriticalData> {
    let p = map.p_poly();
    let q = map.q_poly();
    let c = q.mul(&p.derivative()).sub(&p.mul(&q.derivative()));
    let deg = c
        .degree()
        .ok_or_else(|| Error::Argument("degenerate map: zero Wronskian".into()))?;
    let infinity_critical = deg < 2;
    let (points, values) = match deg {
        2 => {
            let (c2, c1, c0) = (c.coeff(2), c.coeff(1), c.coeff(0));
            let disc = &c1 * &c1 - rat_i(4) * &c2 * &c0;
            if numkernel::is_square(&disc) {
                let root = BigRational::new(disc.numer().sqrt(), disc.denom().sqrt());
                let two_a = rat_i(2) * &c2;
                let g1 = (-&c1 + &root) / &two_a;
                let g2 = (-&c1 - &root) / &two_a;
                let pts = vec![g1, g2];
                let vals = pts
                    .iter()
                    .map(|g| {
                        let qv = q.eval(g);
                        if qv.is_zero() {
                            None
                        } else {
                            Some(p.eval(g) / qv)
                        }
                    })
                    .collect();
                (CriticalPoints::Rational(pts), vals)
            } else {
                (
                    CriticalPoints::Conjugate {
                        quadratic: c.clone(),
                        disc,
                    },
                    Vec::new(),
                )
            }
        }
        1 => {
            let g = -c.coeff(0) / c.coeff(1);
            let qv = q.eval(&g);
            let val = if qv.is_zero() {
                None
            } else {
                Some(p.eval(&g) / qv)
            };
            (CriticalPoints::Rational(vec![g]), vec![val])
        }
        _ => (CriticalPoints::Rational(Vec::new()), Vec::new()),
    };
    Ok(CriticalData {
        c,
        infinity_critical,
        points,
        values,
    })
}

// ---------------------------------------------------------------------------
// sqrt(b) evaluation identity
// ---------------------------------------------------------------------------

/// For b a nonzero rational square, checks p_n(sqrt(b)) = b^{2^{n-1}} p*_n(1)
/// for all n <= n_max, where p*_n comes from the b = 1 map with the same k.
pub fn sqrtb_identity_check(k: &BigRational, b: &BigRational, n_max: usize) -> Result<bool> {
    if b.is_zero() || !numkernel::is_square(b) {
        return Err(Error::Precondition(
            "b must be a nonzero rational square".into(),
        ));
    }
    let sqrt_b = BigRational::new(b.numer().sqrt(), b.denom().sqrt());
    let map = AutQuadMap::new(k.clone(), b.clone())?.to_gen();
    let star = AutQuadMap::symmetric(k.clone())?.to_gen();
    let one = BigRational::one();
    for n in 1..=n_max {
        let (pn, _) = iterate_poly(&map, n)?;
        let (pn_star, _) = iterate_poly(&star, n)?;
        let lhs = pn.eval(&sqrt_b);
        let rhs = crate::numkernel::pow_rat(b, 1i64 << (n - 1)) * pn_star.eval(&one);
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
