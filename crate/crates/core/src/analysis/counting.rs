//! Closed-form index-pair counts used by the constructions and certificates.

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};

/// Number of pairs `(a, d) ∈ {1..r}²` with `|a - d| < m`, i.e.
/// `r² - (r-m)(r-m+1)`. Requires `1 ≤ m ≤ r`.
pub fn gap_pair_count(r: &BigInt, m: &BigInt) -> Result<BigInt> {
    if *m < BigInt::one() || m > r {
        return Err(Error::Precondition(format!(
            "gap count needs 1 ≤ m ≤ r, got m = {m}, r = {r}"
        )));
    }
    let far = r - m;
    Ok(r * r - &far * (&far + 1u32))
}

/// The count as printed alongside the window argument, `2mr - m² - m - r + 1`.
/// Kept only for reporting; it undercounts (r = 5, m = 2 gives 10, not 13).
pub fn printed_gap_pair_count(r: &BigInt, m: &BigInt) -> BigInt {
    BigInt::from(2u32) * m * r - m * m - m - r + 1u32
}

/// Number of k-tuples in `{0..r-1}^k` whose largest and smallest entries
/// differ by at most `g`.
pub fn spread_tuple_count(r: &BigInt, g: &BigInt, k: u32) -> BigInt {
    if r.is_zero() {
        return BigInt::zero();
    }
    if *g >= r - 1u32 {
        return Pow::pow(r, k);
    }
    // Windows [x, x+g] for x = 0..r-1-g, minus the overlaps [x, x+g-1].
    let windows = r - g;
    windows.clone() * Pow::pow(&(g + 1u32), k) - (windows - 1u32) * Pow::pow(g, k)
}

/// `x_i = i(i+1)/2`.
pub fn triangular(i: &BigInt) -> BigInt {
    i * (i + 1u32) / 2u32
}

/// `|x_{a+c} - x_a - (x_{b+c} - x_b)|` for `|c| < min(a, b)`.
pub fn triangular_gap(a: &BigInt, b: &BigInt, c: &BigInt) -> Result<BigInt> {
    if a.is_negative() || b.is_negative() || c.abs() >= *a.min(b) {
        return Err(Error::Precondition(format!(
            "triangular gap needs |c| < min(a, b), got a = {a}, b = {b}, c = {c}"
        )));
    }
    let lhs = triangular(&(a + c)) - triangular(a);
    let rhs = triangular(&(b + c)) - triangular(b);
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn brute_pairs(r: i64, m: i64) -> i64 {
        let mut n = 0;
        for a in 1..=r {
            for d in 1..=r {
                if (a - d).abs() < m {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_pair_count(&big(5), &big(2)).unwrap(), big(13));
        assert_eq!(brute_pairs(5, 2), 13);
        assert_eq!(gap_pair_count(&big(7), &big(7)).unwrap(), big(49));
        assert_eq!(gap_pair_count(&big(9), &big(1)).unwrap(), big(9));
        assert_eq!(printed_gap_pair_count(&big(5), &big(2)), big(10));
        assert!(gap_pair_count(&big(3), &big(4)).is_err());
        assert!(gap_pair_count(&big(3), &big(0)).is_err());
    }

    #[test]
    fn gap_matches_brute_force() {
        for r in 1..=40 {
            for m in 1..=r {
                assert_eq!(
                    gap_pair_count(&big(r), &big(m)).unwrap(),
                    big(brute_pairs(r, m))
                );
            }
        }
    }

    #[test]
    fn spread_counts() {
        // Pairs in {0..9}² with |i - j| ≤ 3: 100 - 42.
        assert_eq!(spread_tuple_count(&big(10), &big(3), 2), big(58));
        for r in 1..8i64 {
            for g in 0..r + 2 {
                for k in 1..4u32 {
                    let mut n = 0i64;
                    let total = r.pow(k);
                    for code in 0..total {
                        let mut c = code;
                        let (mut lo, mut hi) = (r, -1);
                        for _ in 0..k {
                            let v = c % r;
                            c /= r;
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                        if hi - lo <= g {
                            n += 1;
                        }
                    }
                    assert_eq!(
                        spread_tuple_count(&big(r), &big(g), k),
                        big(n),
                        "r={r} g={g} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn triangular_examples() {
        assert_eq!(triangular_gap(&big(5), &big(5), &big(2)).unwrap(), big(0));
        assert_eq!(triangular_gap(&big(5), &big(3), &big(2)).unwrap(), big(4));
        assert_eq!(triangular_gap(&big(4), &big(3), &big(1)).unwrap(), big(1));
        assert_eq!(triangular_gap(&big(5), &big(3), &big(-2)).unwrap(), big(4));
        assert!(triangular_gap(&big(2), &big(3), &big(2)).is_err());
    }
}
