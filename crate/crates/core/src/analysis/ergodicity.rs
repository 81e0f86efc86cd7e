//! Non-ergodicity of `T × T` through missing complement pairs.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::report::{CertificateKind, CertificateReport, Entry, Verdict};
use crate::column::RankOneSpec;
use crate::error::{Error, Result};
use crate::intset::{diff_histogram, lookup, IntSet, Lane, Lanes};

/// Fraction of `(a, a') ∈ D²` for which some `(d, d') ∈ D²` has
/// `a - d = a' - d' - b`, i.e. `a - a' + b ∈ D - D`.
///
/// With `require_a_ne_d` the complement must also have `d ≠ a`.
pub fn pair_fraction_of(
    d: &IntSet,
    b: &BigInt,
    require_a_ne_d: bool,
    max_pairs: u64,
) -> Result<BigRational> {
    let n = d.len() as u64;
    let pairs = BigInt::from(n) * BigInt::from(n);
    if pairs > BigInt::from(max_pairs) {
        return Err(Error::budget("complement pairs", pairs, max_pairs));
    }
    if n == 0 {
        return Ok(BigRational::from_integer(BigInt::from(0)));
    }
    let good = match (d.lanes(), i64::from_big(b)) {
        (Lanes::Small(v), Some(bs)) => count_good(&v, &bs, require_a_ne_d),
        _ => {
            let v = d.as_slice().to_vec();
            count_good(&v, b, require_a_ne_d)
        }
    };
    Ok(BigRational::new(BigInt::from(good), pairs))
}

fn count_good<T: Lane>(xs: &[T], b: &T, require_a_ne_d: bool) -> u64 {
    let hist = diff_histogram(xs);
    let mut good = 0u64;
    for e in &hist {
        let target = e.diff.add(b);
        let Some(t) = lookup(&hist, &target) else {
            continue;
        };
        good += e.count;
        if require_a_ne_d && t.count == 1 {
            // the only complement has d = witness; the pair (a, a') with
            // a = d fails, and exists iff a - δ ∈ D
            let a = &t.witness;
            let a2 = a.sub(&e.diff);
            if xs.binary_search(&a2).is_ok() {
                good -= 1;
            }
        }
    }
    good
}

/// [`pair_fraction_of`] on `D(I, n)` for `I` the base of `C_0`.
pub fn nonerg_pair_fraction(
    spec: &RankOneSpec,
    n: usize,
    b: &BigInt,
    require_a_ne_d: bool,
) -> Result<BigRational> {
    let d = spec.descendant_set(0, n, &BigInt::from(0))?;
    pair_fraction_of(&d, b, require_a_ne_d, spec.budget().max_pairs)
}

/// Pair fractions for every stage `n < horizon` small enough to enumerate.
/// Refuted-ergodicity when at least one stage was computed and every
/// computed fraction is at most 1/2.
pub fn nonergodicity_certificate(
    spec: &RankOneSpec,
    b: &BigInt,
    horizon: usize,
    require_a_ne_d: bool,
) -> Result<CertificateReport> {
    let mut rep = CertificateReport::new(CertificateKind::NonErgodicity, "stage");
    let half = BigRational::new(1.into(), 2.into());
    let limit = BigInt::from(spec.budget().max_pairs);
    let mut skipped = Vec::new();
    for n in 0..horizon {
        let size = spec.cut_product(0, n)?;
        if &size * &size > limit || size > BigInt::from(spec.budget().max_descendants) {
            skipped.push(n);
            continue;
        }
        let f = nonerg_pair_fraction(spec, n, b, require_a_ne_d)?;
        rep.values
            .push(Entry::new(n, f).with("descendants", BigRational::from_integer(size)));
        rep.horizon = BigInt::from(n);
    }
    if !skipped.is_empty() {
        rep.note("skipped_stages", format!("{skipped:?}"));
    }
    rep.note("b", b);
    rep.note("require_a_ne_d", require_a_ne_d);
    rep.verdict = if !rep.values.is_empty() && rep.values.iter().all(|e| e.value <= half) {
        Verdict::Refuted
    } else {
        Verdict::InconclusiveAtHorizon
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::Budget;
    use crate::gallery::staircase;
    use proptest::prelude::*;

    fn set(v: &[i64]) -> IntSet {
        IntSet::new(v.iter().copied())
    }

    fn brute(d: &[i64], b: i64, a_ne_d: bool) -> BigRational {
        let mut good = 0i64;
        for &a in d {
            for &a2 in d {
                let ok = d.iter().any(|&x| {
                    d.iter()
                        .any(|&x2| a - x == a2 - x2 - b && (!a_ne_d || a != x))
                });
                if ok {
                    good += 1;
                }
            }
        }
        BigRational::new(good.into(), ((d.len() * d.len()) as i64).into())
    }

    #[test]
    fn examples() {
        let one = BigInt::from(1);
        assert_eq!(
            pair_fraction_of(&set(&[0, 2]), &one, false, 100).unwrap(),
            BigRational::from_integer(0.into())
        );
        assert_eq!(
            pair_fraction_of(&set(&[0, 2, 5]), &BigInt::from(0), false, 100).unwrap(),
            BigRational::from_integer(1.into())
        );
        let f = pair_fraction_of(&set(&[0, 1, 3]), &one, false, 100).unwrap();
        assert_eq!(f, brute(&[0, 1, 3], 1, false));
        assert_eq!(f, BigRational::new(8.into(), 9.into()));
    }

    #[test]
    fn staircase_b0_inconclusive() {
        let s = staircase(vec![3, 3]).into_spec(Budget::default()).unwrap();
        let rep = nonergodicity_certificate(&s, &BigInt::from(0), 3, false).unwrap();
        assert!(rep
            .values
            .iter()
            .all(|e| e.value == BigRational::from_integer(1.into())));
        assert_eq!(rep.verdict, Verdict::InconclusiveAtHorizon);
    }

    #[test]
    fn budget_skips_stages() {
        let s = staircase(vec![3])
            .into_spec(Budget {
                max_pairs: 100,
                ..Budget::default()
            })
            .unwrap();
        let rep = nonergodicity_certificate(&s, &BigInt::from(1), 4, false).unwrap();
        assert_eq!(rep.values.len(), 3);
        assert_eq!(rep.note_value("skipped_stages"), Some("[3]"));
    }

    proptest! {
        #[test]
        fn matches_brute(v in proptest::collection::vec(-20i64..20, 1..7), b in -6i64..6, flag: bool) {
            let d = set(&v);
            let xs: Vec<i64> = d.iter().map(|x| i64::try_from(x).unwrap()).collect();
            prop_assert_eq!(pair_fraction_of(&d, &BigInt::from(b), flag, 1000).unwrap(), brute(&xs, b, flag));
        }

        #[test]
        fn big_lane_agrees(v in proptest::collection::vec(0i64..30, 1..6), b in -4i64..4) {
            let shift = BigInt::from(1) << 70;
            let d = set(&v);
            let big = IntSet::new(d.iter().map(|x| x + &shift));
            for flag in [false, true] {
                prop_assert_eq!(
                    pair_fraction_of(&d, &BigInt::from(b), flag, 1000).unwrap(),
                    pair_fraction_of(&big, &BigInt::from(b), flag, 1000).unwrap()
                );
            }
        }

        #[test]
        fn b_zero_is_one(v in proptest::collection::vec(-50i64..50, 1..10)) {
            prop_assert_eq!(
                pair_fraction_of(&set(&v), &BigInt::from(0), false, 1000).unwrap(),
                BigRational::from_integer(1.into())
            );
        }
    }
}
