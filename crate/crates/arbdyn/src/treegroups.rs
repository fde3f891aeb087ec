//! Automorphism groups of complete binary rooted trees, the centralizer of
//! the subtree-swapping involution, and the fixed-point proportions that
//! drive the density statistics.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest level enumerated explicitly (2^(2^4 - 1) = 32768 elements).
pub const ENUM_LEVEL_CAP: usize = 4;
/// Largest level where f^m(0) is carried as an exact rational (numerator
/// bits double per step).
pub const EXACT_CM_CAP: usize = 20;

// ---------------------------------------------------------------------------
// tree automorphisms as leaf permutations
// ---------------------------------------------------------------------------

/// Automorphism of the depth-n complete binary tree, stored as a permutation
/// of the 2^n leaves. Leaf indices are root-to-leaf paths, most significant
/// bit first, so bit n-1 is the level-1 branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAut {
    pub n: usize,
    perm: Vec<u32>,
}

impl TreeAut {
    /// Validates the tree-respecting property: for every level j, leaves
    /// sharing an ancestor at level j map to leaves sharing one.
    pub fn new(n: usize, perm: Vec<u32>) -> Result<Self> {
        let size = 1usize << n;
        if perm.len() != size {
            return Err(Error::Argument(format!(
                "level-{n} automorphism needs {size} leaves"
            )));
        }
        let mut seen = vec![false; size];
        for &x in &perm {
            let x = x as usize;
            if x >= size || seen[x] {
                return Err(Error::Argument("not a permutation of the leaves".into()));
            }
            seen[x] = true;
        }
        for j in 1..n {
            let shift = n - j;
            let mut image: Vec<Option<u32>> = vec![None; 1 << j];
            for l in 0..size {
                let pre = l >> shift;
                let post = perm[l] >> shift;
                match image[pre] {
                    None => image[pre] = Some(post),
                    Some(v) if v == post => {}
                    Some(_) => {
                        return Err(Error::Argument(format!(
                            "permutation does not respect level {j}"
                        )))
                    }
                }
            }
        }
        Ok(TreeAut { n, perm })
    }

    pub fn identity(n: usize) -> Self {
        TreeAut {
            n,
            perm: (0..1u32 << n).collect(),
        }
    }

    /// The involution swapping the two level-1 subtrees identically at all
    /// depths: leaf XOR with the top path bit.
    pub fn iota(n: usize) -> Self {
        assert!(n >= 1);
        let top = 1u32 << (n - 1);
        TreeAut {
            n,
            perm: (0..1u32 << n).map(|l| l ^ top).collect(),
        }
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn apply(&self, leaf: u32) -> u32 {
        self.perm[leaf as usize]
    }

    /// self then other (other ∘ self as functions on leaves).
    pub fn compose(&self, other: &TreeAut) -> TreeAut {
        assert_eq!(self.n, other.n);
        TreeAut {
            n: self.n,
            perm: self.perm.iter().map(|&l| other.perm[l as usize]).collect(),
        }
    }

    pub fn commutes_with(&self, other: &TreeAut) -> bool {
        self.compose(other) == other.compose(self)
    }

    pub fn fixes_some_leaf(&self) -> bool {
        self.perm.iter().enumerate().any(|(i, &x)| i as u32 == x)
    }

    /// Whether the action on level 1 (the top path bit) is trivial.
    pub fn trivial_on_level1(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let shift = self.n - 1;
        (self.perm[0] >> shift) == 0
    }

    /// Restriction to the subtree under level-1 branch `side` (0 or 1),
    /// defined when that subtree maps to itself.
    pub fn restrict(&self, side: u32) -> Result<TreeAut> {
        if self.n == 0 {
            return Err(Error::Argument("no subtree below a leaf".into()));
        }
        let shift = self.n - 1;
        let half = 1u32 << shift;
        let mut perm = Vec::with_capacity(half as usize);
        for r in 0..half {
            let img = self.perm[((side << shift) | r) as usize];
            if img >> shift != side {
                return Err(Error::Precondition(
                    "automorphism moves the subtree".into(),
                ));
            }
            perm.push(img & (half - 1));
        }
        TreeAut::new(self.n - 1, perm)
    }
}

fn enumerate_aut_unchecked(n: usize) -> Vec<TreeAut> {
    if n == 0 {
        return vec![TreeAut {
            n: 0,
            perm: vec![0],
        }];
    }
    let sub = enumerate_aut_unchecked(n - 1);
    let shift = n - 1;
    let mut out = Vec::with_capacity(2 * sub.len() * sub.len());
    for swap in [false, true] {
        for a in &sub {
            for b in &sub {
                let subs = [a, b];
                let perm = (0..1u32 << n)
                    .map(|l| {
                        let t = (l >> shift) as usize;
                        let r = l & ((1 << shift) - 1);
                        let nt = if swap { 1 - t as u32 } else { t as u32 };
                        (nt << shift) | subs[t].perm[r as usize]
                    })
                    .collect();
                out.push(TreeAut { n, perm });
            }
        }
    }
    out
}

/// All 2^(2^n - 1) automorphisms of the depth-n tree.
pub fn enumerate_aut(n: usize) -> Result<Vec<TreeAut>> {
    if n > ENUM_LEVEL_CAP {
        return Err(Error::Resource(format!(
            "enumeration capped at level {ENUM_LEVEL_CAP}, requested {n}"
        )));
    }
    Ok(enumerate_aut_unchecked(n))
}

/// The centralizer of the involution, by commutation test.
pub fn enumerate_centralizer(n: usize) -> Result<Vec<TreeAut>> {
    if n < 1 {
        return Err(Error::Argument("centralizer needs level >= 1".into()));
    }
    let iota = TreeAut::iota(n);
    Ok(enumerate_aut(n)?
        .into_iter()
        .filter(|a| a.commutes_with(&iota))
        .collect())
}

// ---------------------------------------------------------------------------
// closed-form orders
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupOrderReport {
    pub n: usize,
    pub order_aut: BigInt,
    pub order_c: BigInt,
    /// order of ker(C_n -> C_{n-1}); defined for n >= 2
    pub kernel_order: Option<BigInt>,
    pub hausdorff: BigRational,
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e as usize
}

/// #Aut = 2^(2^n - 1), #C_n = 2^(2^(n-1)), #ker = 2^(2^(n-2)),
/// hausdorff = 2^(n-1)/(2^n - 1).
pub fn group_orders(n: usize) -> Result<GroupOrderReport> {
    if n < 1 {
        return Err(Error::Argument("level must be >= 1".into()));
    }
    if n > 1000 {
        return Err(Error::Resource("order formulas capped at level 1000".into()));
    }
    let order_aut = pow2((1u64 << n) - 1);
    let order_c = pow2(1u64 << (n - 1));
    let kernel_order = if n >= 2 {
        Some(pow2(1u64 << (n - 2)))
    } else {
        None
    };
    let hausdorff = BigRational::new(pow2((n - 1) as u64), pow2(n as u64) - BigInt::one());
    Ok(GroupOrderReport {
        n,
        order_aut,
        order_c,
        kernel_order,
        hausdorff,
    })
}

// ---------------------------------------------------------------------------
// fixed-point proportions
// ---------------------------------------------------------------------------

/// c_m = f^m(0) for f(z) = z^2/2 + 1/2, exact. Numerator bits double per
/// step, so this is capped.
pub fn c_m_exact(m: usize) -> Result<BigRational> {
    if m > EXACT_CM_CAP {
        return Err(Error::Resource(format!(
            "exact c_m capped at m = {EXACT_CM_CAP}, requested {m}"
        )));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut c = BigRational::zero();
    for _ in 0..m {
        c = &half * &c * &c + &half;
    }
    Ok(c)
}

/// A value plus a rigorous absolute error bound.
#[derive(Debug, Clone)]
pub struct ApproxValue {
    pub value: BigRational,
    pub error_bound: BigRational,
}

/// c_m in fixed-point arithmetic with `bits` fractional bits. Each step
/// rounds down by < 2^-bits, and f has derivative f'(z) = z < 1 on [0, 1),
/// so errors accumulate to at most m * 2^-bits.
pub fn c_m_approx(m: usize, bits: u32) -> ApproxValue {
    let one = BigUint::one() << bits as usize;
    let mut x = BigUint::zero();
    for _ in 0..m {
        // x <- x^2 / 2^(bits+1) + 2^(bits-1), rounding down
        x = (&x * &x >> (bits as usize + 1)) + (BigUint::one() << (bits as usize - 1));
        if x > one {
            x = one.clone();
        }
    }
    let denom = BigInt::one() << bits as usize;
    ApproxValue {
        value: BigRational::new(BigInt::from(x), denom.clone()),
        error_bound: BigRational::new(BigInt::from(m as u64), denom),
    }
}

/// Proportion of Aut(T_m) fixing at least one leaf: 1 - c_m (exact).
pub fn fix_frac(m: usize) -> Result<BigRational> {
    Ok(BigRational::one() - c_m_exact(m)?)
}

/// Proportion of C_n fixing at least one leaf: fix_frac(n - 1) / 2 (exact).
pub fn fixprop(n: usize) -> Result<BigRational> {
    if n < 1 {
        return Err(Error::Argument("level must be >= 1".into()));
    }
    Ok(fix_frac(n - 1)? / BigRational::from_integer(2.into()))
}

/// fixprop(n) with a tracked error bound, usable for any n.
pub fn fixprop_approx(n: usize, bits: u32) -> Result<ApproxValue> {
    if n < 1 {
        return Err(Error::Argument("level must be >= 1".into()));
    }
    let c = c_m_approx(n - 1, bits);
    let two = BigRational::from_integer(2.into());
    Ok(ApproxValue {
        value: (BigRational::one() - c.value) / &two,
        error_bound: c.error_bound / two,
    })
}

/// Exact proportion of the enumerated centralizer fixing >= 1 leaf.
pub fn centralizer_fixprop(n: usize) -> Result<BigRational> {
    let c = enumerate_centralizer(n)?;
    let fixed = c.iter().filter(|a| a.fixes_some_leaf()).count();
    Ok(BigRational::new(BigInt::from(fixed), BigInt::from(c.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn enumerated_orders() {
        for n in 1..=4usize {
            let aut = enumerate_aut(n).unwrap();
            assert_eq!(aut.len(), 1 << ((1usize << n) - 1), "Aut at n = {n}");
            let c = enumerate_centralizer(n).unwrap();
            assert_eq!(c.len(), 1 << (1usize << (n - 1)), "C at n = {n}");
            if n >= 2 {
                let kernel: Vec<_> = c
                    .iter()
                    .filter(|a| a.trivial_on_level1())
                    .filter(|a| {
                        // in ker(C_n -> C_{n-1}): trivial down to level n-1
                        (0..1u32 << n).all(|l| a.apply(l) >> 1 == l >> 1)
                    })
                    .collect();
                assert_eq!(kernel.len(), 1 << (1usize << (n - 2)), "ker at n = {n}");
            }
        }
    }

    #[test]
    fn order_formulas() {
        let r = group_orders(2).unwrap();
        assert_eq!(r.order_aut, BigInt::from(8));
        assert_eq!(r.order_c, BigInt::from(4));
        assert_eq!(r.kernel_order, Some(BigInt::from(2)));
        assert_eq!(group_orders(1).unwrap().order_c, BigInt::from(2));
        assert_eq!(group_orders(5).unwrap().hausdorff, rat(16, 31));
    }

    #[test]
    fn kernel_restriction_bijection() {
        // restriction to one level-1 subtree is a bijection from
        // ker(C_n -> C_1) onto Aut(T_{n-1})
        for n in 2..=4usize {
            let c = enumerate_centralizer(n).unwrap();
            let kernel: Vec<_> = c.iter().filter(|a| a.trivial_on_level1()).collect();
            let mut images: Vec<TreeAut> =
                kernel.iter().map(|a| a.restrict(0).unwrap()).collect();
            images.sort_by(|a, b| a.perm().cmp(b.perm()));
            images.dedup();
            assert_eq!(images.len(), kernel.len(), "injective at n = {n}");
            assert_eq!(images.len(), enumerate_aut(n - 1).unwrap().len());
        }
    }

    #[test]
    fn nontrivial_top_fixes_nothing() {
        for n in 1..=4usize {
            for a in enumerate_centralizer(n).unwrap() {
                if !a.trivial_on_level1() {
                    assert!(!a.fixes_some_leaf(), "n = {n}");
                }
            }
        }
    }

    #[test]
    fn cm_and_fixprop_values() {
        assert_eq!(c_m_exact(1).unwrap(), rat(1, 2));
        assert_eq!(c_m_exact(2).unwrap(), rat(5, 8));
        assert_eq!(c_m_exact(3).unwrap(), rat(89, 128));
        assert_eq!(fix_frac(2).unwrap(), rat(3, 8));
        assert_eq!(fixprop(1).unwrap(), rat(1, 2));
        assert_eq!(fixprop(2).unwrap(), rat(1, 4));
        assert_eq!(fixprop(3).unwrap(), rat(3, 16));
        assert_eq!(fixprop(4).unwrap(), rat(39, 256));
    }

    #[test]
    fn centralizer_fixprop_matches_formula() {
        for n in 1..=4usize {
            assert_eq!(centralizer_fixprop(n).unwrap(), fixprop(n).unwrap());
        }
    }

    #[test]
    fn aut_fix_frac_matches_enumeration() {
        for m in 1..=3usize {
            let aut = enumerate_aut(m).unwrap();
            let fixed = aut.iter().filter(|a| a.fixes_some_leaf()).count();
            assert_eq!(
                BigRational::new(BigInt::from(fixed), BigInt::from(aut.len())),
                fix_frac(m).unwrap()
            );
        }
    }

    #[test]
    fn cm_monotone_approx() {
        // strict increase with limit 1, checked through rigorous error
        // bounds at 256 fractional bits
        let bits = 256u32;
        let mut prev = c_m_approx(0, bits);
        for m in 1..=60usize {
            let cur = c_m_approx(m, bits);
            let gap = &cur.value - &prev.value;
            assert!(
                gap > &prev.error_bound + &cur.error_bound,
                "c_{m} not provably above c_{}",
                m - 1
            );
            assert!(cur.value < BigRational::one());
            prev = cur;
        }
    }

    #[test]
    fn approx_matches_exact_small() {
        let bits = 128u32;
        for m in [1usize, 5, 12] {
            let e = c_m_exact(m).unwrap();
            let a = c_m_approx(m, bits);
            assert!((e - a.value).abs() <= a.error_bound);
        }
    }

    #[test]
    fn n_fixprop_tends_to_one() {
        let a = fixprop_approx(1000, 256).unwrap();
        let n = BigRational::from_integer(1000.into());
        let dev = (&n * &a.value - BigRational::one()).abs();
        let slack = n * a.error_bound;
        assert!(&dev + slack < rat(1, 10), "deviation {dev:?}");
    }

    #[test]
    fn tree_respecting_validation() {
        // a raw 4-cycle on 4 leaves is not tree-respecting
        assert!(TreeAut::new(2, vec![1, 2, 3, 0]).is_err());
        assert!(TreeAut::new(2, vec![1, 0, 2, 3]).is_ok());
        assert!(TreeAut::new(2, vec![0, 0, 1, 2]).is_err());
        let iota = TreeAut::iota(3);
        assert!(iota.commutes_with(&TreeAut::identity(3)));
        assert!(!iota.fixes_some_leaf());
    }

    #[test]
    fn hausdorff_converges() {
        // deviation is 1/(2(2^n - 1)): equal to 2^-n at n = 1, strictly
        // below from n = 2 on
        let half = rat(1, 2);
        for n in 1..=30usize {
            let h = group_orders(n).unwrap().hausdorff;
            let bound = BigRational::new(BigInt::one(), BigInt::one() << n);
            let dev = (h - &half).abs();
            assert!(dev <= bound);
            if n >= 2 {
                assert!(dev < bound);
            }
        }
    }
}
