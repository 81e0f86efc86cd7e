//! Sorted sets of big integers and the sum-set / difference-set machinery built on them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

/// A finite set of integers stored strictly increasing.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntSet(Vec<BigInt>);

impl IntSet {
    pub fn new<I, T>(items: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut v: Vec<BigInt> = items.into_iter().map(Into::into).collect();
        v.sort();
        v.dedup();
        IntSet(v)
    }

    pub fn singleton(x: impl Into<BigInt>) -> Self {
        IntSet(vec![x.into()])
    }

    /// Caller guarantees `v` is strictly increasing.
    pub(crate) fn from_sorted(v: Vec<BigInt>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        IntSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigInt> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<BigInt> {
        self.0
    }

    pub fn min(&self) -> Option<&BigInt> {
        self.0.first()
    }

    pub fn max(&self) -> Option<&BigInt> {
        self.0.last()
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn translate(&self, t: &BigInt) -> IntSet {
        IntSet(self.0.iter().map(|x| x + t).collect())
    }

    pub fn union(&self, other: &IntSet) -> IntSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        IntSet(out)
    }

    /// |(shift + self) ∩ other|, by a merge walk.
    pub fn shifted_overlap(&self, shift: &BigInt, other: &IntSet) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.len() && j < other.len() {
            let a = &self.0[i] + shift;
            match a.cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub(crate) fn lanes(&self) -> Lanes {
        Lanes::of(&self.0)
    }
}

impl fmt::Debug for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.0.iter().map(|x| x.to_string()))
            .finish()
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl<'a> IntoIterator for &'a IntSet {
    type Item = &'a BigInt;
    type IntoIter = std::slice::Iter<'a, BigInt>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// `{a + b : a ∈ A, b ∈ B}`, merged from the |B| sorted translates of A.
///
/// Fails if `|A|·|B|` exceeds `limit`.
pub fn sum_set(a: &IntSet, b: &IntSet, limit: u64) -> Result<IntSet> {
    let product = (a.len() as u128) * (b.len() as u128);
    if product > limit as u128 {
        return Err(Error::budget("sum set", product, limit));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(IntSet::default());
    }
    // Translate the longer operand by each element of the shorter one.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut heap: BinaryHeap<Reverse<(BigInt, usize, usize)>> = short
        .iter()
        .enumerate()
        .map(|(si, s)| Reverse((&long.0[0] + s, si, 0)))
        .collect();
    let mut out: Vec<BigInt> = Vec::with_capacity(product as usize);
    while let Some(Reverse((value, si, li))) = heap.pop() {
        if out.last() != Some(&value) {
            out.push(value);
        }
        if li + 1 < long.len() {
            heap.push(Reverse((&long.0[li + 1] + &short.0[si], si, li + 1)));
        }
    }
    Ok(IntSet(out))
}

const SMALL_BOUND: i64 = 1 << 60;

/// Element storage chosen for counting kernels: machine words when every
/// element is small enough that sums and differences of three of them cannot
/// overflow, big integers otherwise.
pub(crate) enum Lanes {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

impl Lanes {
    pub(crate) fn of(v: &[BigInt]) -> Lanes {
        let fits = v
            .iter()
            .all(|x| x.abs() < BigInt::from(SMALL_BOUND) && x.to_i64().is_some());
        if fits {
            Lanes::Small(v.iter().map(|x| x.to_i64().unwrap()).collect())
        } else {
            Lanes::Big(v.to_vec())
        }
    }
}

/// Minimal arithmetic needed by the generic counting kernels.
pub(crate) trait Lane: Clone + Ord + std::fmt::Debug {
    fn sub(&self, o: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn to_big(&self) -> BigInt;
    fn from_big(b: &BigInt) -> Option<Self>;
    fn is_positive(&self) -> bool;
}

impl Lane for i64 {
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i64().filter(|x| x.abs() < SMALL_BOUND)
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
}

impl Lane for BigInt {
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

/// One distinct difference `x - y` of a set together with how many ordered
/// pairs realize it, and one pair's first coordinate.
#[derive(Clone, Debug)]
pub(crate) struct DiffEntry<T> {
    pub diff: T,
    pub count: u64,
    pub witness: T,
}

/// Multiset of pairwise differences `x - y` (x, y ∈ S), sorted by difference.
pub(crate) fn diff_histogram<T: Lane>(xs: &[T]) -> Vec<DiffEntry<T>> {
    let mut all: Vec<(T, T)> = Vec::with_capacity(xs.len() * xs.len());
    for x in xs {
        for y in xs {
            all.push((x.sub(y), x.clone()));
        }
    }
    all.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<DiffEntry<T>> = Vec::new();
    for (d, x) in all {
        match out.last_mut() {
            Some(e) if e.diff == d => e.count += 1,
            _ => out.push(DiffEntry {
                diff: d,
                count: 1,
                witness: x,
            }),
        }
    }
    out
}

/// Cross differences `x - y` with x ∈ xs, y ∈ ys, deduplicated and positive only.
pub(crate) fn positive_cross_differences<T: Lane>(xs: &[T], ys: &[T]) -> Vec<T> {
    let mut out: Vec<T> = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| x.sub(y)))
        .filter(|d| d.is_positive())
        .collect();
    out.sort();
    out.dedup();
    out
}

pub(crate) fn lookup<'a, T: Lane>(hist: &'a [DiffEntry<T>], d: &T) -> Option<&'a DiffEntry<T>> {
    hist.binary_search_by(|e| e.diff.cmp(d))
        .ok()
        .map(|i| &hist[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[i64]) -> IntSet {
        IntSet::new(v.iter().copied())
    }

    #[test]
    fn sum_set_examples() {
        assert_eq!(
            sum_set(&set(&[0]), &set(&[0, 2]), 100).unwrap(),
            set(&[0, 2])
        );
        assert_eq!(
            sum_set(&set(&[0, 1]), &set(&[0, 2]), 100).unwrap(),
            set(&[0, 1, 2, 3])
        );
        assert_eq!(
            sum_set(&set(&[0, 1, 3]), &set(&[0, 6, 13]), 100).unwrap(),
            set(&[0, 1, 3, 6, 7, 9, 13, 14, 16])
        );
    }

    #[test]
    fn sum_set_budget() {
        let err = sum_set(&set(&[0, 1, 2]), &set(&[0, 1, 2]), 8).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        assert!(sum_set(&set(&[]), &set(&[1]), 0).unwrap().is_empty());
    }

    #[test]
    fn overlap_walk() {
        let d = set(&[0, 1, 3, 6, 7, 9, 13, 14, 16]);
        assert_eq!(d.shifted_overlap(&BigInt::from(4), &d), 2);
        assert_eq!(d.shifted_overlap(&BigInt::from(0), &d), 9);
        assert_eq!(d.shifted_overlap(&BigInt::from(-4), &d), 2);
    }

    #[test]
    fn histogram_counts_pairs() {
        let h = diff_histogram(&[0i64, 1, 3]);
        let total: u64 = h.iter().map(|e| e.count).sum();
        assert_eq!(total, 9);
        assert_eq!(lookup(&h, &0).unwrap().count, 3);
        assert_eq!(lookup(&h, &2).unwrap().count, 1);
        assert!(lookup(&h, &4).is_none());
    }

    #[test]
    fn big_lanes_used_for_large_values() {
        let big = IntSet::new([BigInt::from(0), BigInt::from(1u64 << 62)]);
        assert!(matches!(big.lanes(), Lanes::Big(_)));
        assert!(matches!(set(&[0, 5]).lanes(), Lanes::Small(_)));
    }

    fn arb_set() -> impl Strategy<Value = IntSet> {
        proptest::collection::vec(-200i64..200, 0..12).prop_map(IntSet::new)
    }

    proptest! {
        #[test]
        fn sum_set_matches_pairwise(a in arb_set(), b in arb_set()) {
            let s = sum_set(&a, &b, u64::MAX).unwrap();
            let brute = IntSet::new(a.iter().flat_map(|x| b.iter().map(move |y| x + y)));
            prop_assert_eq!(&s, &brute);
            prop_assert!(s.len() <= a.len() * b.len());
        }

        #[test]
        fn sum_set_commutes_and_associates(a in arb_set(), b in arb_set(), c in arb_set()) {
            let ab = sum_set(&a, &b, u64::MAX).unwrap();
            prop_assert_eq!(&ab, &sum_set(&b, &a, u64::MAX).unwrap());
            let left = sum_set(&ab, &c, u64::MAX).unwrap();
            let right = sum_set(&a, &sum_set(&b, &c, u64::MAX).unwrap(), u64::MAX).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
