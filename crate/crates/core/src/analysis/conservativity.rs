//! Conservativity of k-fold products: the shared-coordinate bound, exact
//! complement counts and the arithmetic non-conservativity witness.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use super::counting::spread_tuple_count;
use super::report::{CertificateKind, CertificateReport, Entry, Verdict};
use crate::column::{RankOneSpec, Spacers, StageSpec};
use crate::error::{Error, Result};
use crate::intset::{diff_histogram, IntSet, Lane, Lanes};

fn frac(p: impl Into<BigInt>, q: impl Into<BigInt>) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// `Π_{m=i}^{j-1} (1 - 1/r_m^{k-1})`: the fraction of k-tuples of descendants
/// that share no stage coordinate.
pub fn rho_bound(spec: &RankOneSpec, i: usize, j: usize, k: u32) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k} < 2")));
    }
    if !spec.is_direct_sum(i, j)? {
        return Err(Error::NotDirectSum { from: i, to: j });
    }
    let mut rho = BigRational::one();
    for m in i..j {
        let r = spec.stage(m)?.spec.r.clone();
        rho *= BigRational::one() - frac(1, Pow::pow(&r, k - 1));
    }
    Ok(rho)
}

/// Partial products of `Π (1 - 1/r_n^{k-1})` up to `horizon`; satisfied once
/// one falls below `threshold`.
pub fn conservativity_sufficient(
    spec: &RankOneSpec,
    k: u32,
    horizon: usize,
    threshold: &BigRational,
) -> Result<CertificateReport> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k} < 2")));
    }
    let mut rep = CertificateReport::new(CertificateKind::Conservativity, "stage");
    let mut product = BigRational::one();
    for n in 0..horizon {
        let r = spec.stage(n)?.spec.r.clone();
        product *= BigRational::one() - frac(1, Pow::pow(&r, k - 1));
        rep.values.push(Entry::new(n, product.clone()));
        rep.horizon = BigInt::from(n);
        if product < *threshold {
            rep.verdict = Verdict::Satisfied;
            rep.note("reached_at_stage", n);
            break;
        }
    }
    rep.note("k", k);
    rep.note("threshold", threshold);
    Ok(rep)
}

/// Fraction of `k`-tuples `a ∈ D^k` with a complement `d ∈ D^k`,
/// `a_0 - d_0 = … = a_{k-1} - d_{k-1} ≠ 0`.
pub fn cons_fraction_of(d: &IntSet, k: u32, max_pairs: u64) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k} < 2")));
    }
    let n = BigInt::from(d.len());
    let tuples = Pow::pow(&n, k);
    if tuples > BigInt::from(max_pairs) {
        return Err(Error::budget("complement tuples", tuples, max_pairs));
    }
    if d.is_empty() {
        return Ok(BigRational::zero());
    }
    let good = if k == 2 {
        // (a0, a1) has a complement iff another pair realizes a0 - a1.
        let good = match d.lanes() {
            Lanes::Small(v) => shared_difference_pairs(&v),
            Lanes::Big(v) => shared_difference_pairs(&v),
        };
        BigInt::from(good)
    } else {
        BigInt::from(brute_tuples(d, k as usize))
    };
    Ok(BigRational::new(good, tuples))
}

fn shared_difference_pairs<T: Lane>(v: &[T]) -> u64 {
    diff_histogram(v)
        .iter()
        .filter(|e| e.count >= 2)
        .map(|e| e.count)
        .sum()
}

/// For each tuple, look for a common nonzero `t` with every `a_l - t ∈ D`.
fn brute_tuples(d: &IntSet, k: usize) -> u64 {
    let xs = d.as_slice();
    let n = xs.len();
    let mut idx = vec![0usize; k];
    let mut good = 0u64;
    loop {
        let a0 = &xs[idx[0]];
        let found = xs.iter().any(|d0| {
            let t = a0 - d0;
            !t.is_zero() && idx[1..].iter().all(|&i| d.contains(&(&xs[i] - &t)))
        });
        if found {
            good += 1;
        }
        let mut p = 0;
        loop {
            if p == k {
                return good;
            }
            idx[p] += 1;
            if idx[p] < n {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// [`cons_fraction_of`] on `D(I, j)` for `I` the base of `C_i`.
pub fn cons_fraction_exact(spec: &RankOneSpec, i: usize, j: usize, k: u32) -> Result<BigRational> {
    let d = spec.descendant_set(i, j, &BigInt::zero())?;
    cons_fraction_of(&d, k, spec.budget().max_pairs)
}

/// Whether a stage's height set has the staircase shape: consecutive gaps
/// `h + c, h + c + 1, …` for some integer `c`.
pub fn is_staircase_stage(stage: &StageSpec) -> bool {
    match &stage.spacers {
        Spacers::Arithmetic { step, .. } => step.is_one() || stage.r <= BigInt::from(2),
        Spacers::Explicit(s) => s[..s.len() - 1]
            .windows(2)
            .all(|w| &w[1] - &w[0] == BigInt::one()),
    }
}

/// Lower bound on the non-returning mass of `T^{(k)}` from stages whose
/// cut indices spread by more than `2·max D(I, j)`.
///
/// Per stage, `|K_j|` counts index k-tuples of `{0..r_j-1}` whose spread
/// exceeds `2·max D(I, j)`. The verdict uses the product of `|K_j|/r_j^k`;
/// the complementary product `Π(1 - |K_j|/r_j^k)` is reported as
/// `complement_product`. Conservativity is refuted when the witness product
/// stays at or above `floor` through `horizon`.
pub fn nonconservativity_check(
    spec: &RankOneSpec,
    k: u32,
    horizon: usize,
    floor: &BigRational,
) -> Result<CertificateReport> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k} < 2")));
    }
    let mut rep = CertificateReport::new(CertificateKind::NonConservativity, "stage");
    let mut witness = BigRational::one();
    let mut complement = BigRational::one();
    for j in 0..horizon {
        let stage = spec.stage(j)?;
        if !is_staircase_stage(&stage.spec) {
            return Err(Error::NotStronglyArithmetic(j));
        }
        let r = &stage.spec.r;
        let gap = &stage.max_descendant * 2u32;
        let all = Pow::pow(r, k);
        let spread = &all - spread_tuple_count(r, &gap, k);
        let part = BigRational::new(spread.clone(), all);
        witness *= &part;
        complement *= BigRational::one() - &part;
        rep.values.push(
            Entry::new(j, witness.clone())
                .with("k_fraction", part)
                .with("complement_product", complement.clone()),
        );
        rep.horizon = BigInt::from(j);
    }
    rep.verdict = if horizon > 0 && witness >= *floor {
        Verdict::Refuted
    } else {
        Verdict::InconclusiveAtHorizon
    };
    rep.note("k", k);
    rep.note("floor", floor);
    rep.note("witness_product_f64", witness.to_f64().unwrap_or(f64::NAN));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::{Budget, BuildContext, BuiltStage, StageRule};
    use crate::gallery::{staircase, Builder, CutRule};

    #[derive(Debug)]
    struct Fixed(Vec<StageSpec>);

    impl StageRule for Fixed {
        fn next_stage(&self, ctx: &BuildContext<'_>) -> Result<BuiltStage> {
            Ok(self.0[ctx.n.min(self.0.len() - 1)].clone().into())
        }
        fn name(&self) -> String {
            "fixed".into()
        }
    }

    fn set(v: &[i64]) -> IntSet {
        IntSet::new(v.iter().copied())
    }

    #[test]
    fn rho_examples() {
        let s = RankOneSpec::new(Fixed(vec![StageSpec::explicit([0, 0])]), Budget::default());
        assert_eq!(rho_bound(&s, 0, 2, 2).unwrap(), frac(1, 4));
        assert_eq!(rho_bound(&s, 1, 1, 2).unwrap(), BigRational::one());
        let s = staircase(vec![3]).into_spec(Budget::default()).unwrap();
        assert_eq!(rho_bound(&s, 0, 1, 3).unwrap(), frac(8, 9));
        assert!(rho_bound(&s, 0, 1, 1).is_err());
    }

    #[test]
    fn sufficient_examples() {
        let s = RankOneSpec::new(Fixed(vec![StageSpec::explicit([0, 0])]), Budget::default());
        let rep = conservativity_sufficient(&s, 2, 1, &frac(1, 4)).unwrap();
        assert_eq!(rep.verdict, Verdict::InconclusiveAtHorizon);
        assert_eq!(rep.values[0].value, frac(1, 2));
        let s = Builder::Staircase {
            r: CutRule::Linear { start: 2, step: 1 },
        }
        .into_spec(Budget::default())
        .unwrap();
        let rep = conservativity_sufficient(&s, 2, 40, &frac(1, 20)).unwrap();
        assert_eq!(rep.verdict, Verdict::Satisfied);
        // telescoping: Π_{n<N} (n+1)/(n+2) = 1/(N+1)
        for e in &rep.values {
            assert_eq!(e.value, frac(1, &e.at + 2));
        }
    }

    #[test]
    fn cons_fraction_examples() {
        assert_eq!(cons_fraction_of(&set(&[0, 1]), 2, 100).unwrap(), frac(1, 2));
        assert_eq!(
            cons_fraction_of(&set(&[0]), 2, 100).unwrap(),
            BigRational::zero()
        );
        assert_eq!(
            cons_fraction_of(&set(&[0]), 3, 100).unwrap(),
            BigRational::zero()
        );
        // D = {0,1,3} only repeats the zero difference
        assert_eq!(
            cons_fraction_of(&set(&[0, 1, 3]), 2, 100).unwrap(),
            frac(1, 3)
        );
        let s = staircase(vec![3]).into_spec(Budget::default()).unwrap();
        assert_eq!(cons_fraction_exact(&s, 0, 1, 2).unwrap(), frac(1, 3));
        assert!(cons_fraction_of(&set(&[0, 1, 3]), 3, 20).is_err());
    }

    fn brute(d: &[i64], k: usize) -> BigRational {
        let n = d.len();
        let total = n.pow(k as u32);
        let mut good = 0;
        for code in 0..total {
            let a: Vec<i64> = (0..k).map(|l| d[(code / n.pow(l as u32)) % n]).collect();
            let ok = (0..total).any(|c2| {
                let dd: Vec<i64> = (0..k).map(|l| d[(c2 / n.pow(l as u32)) % n]).collect();
                let t = a[0] - dd[0];
                t != 0 && (0..k).all(|l| a[l] - dd[l] == t)
            });
            if ok {
                good += 1;
            }
        }
        frac(good, total as i64)
    }

    #[test]
    fn k2_and_k3_match_brute() {
        for d in [
            vec![0, 1, 3],
            vec![0, 2, 3, 7],
            vec![0, 1, 2, 3],
            vec![0, 5, 6, 11, 12],
        ] {
            for k in [2u32, 3] {
                assert_eq!(
                    cons_fraction_of(&set(&d), k, 1 << 20).unwrap(),
                    brute(&d, k as usize),
                    "{d:?} k={k}"
                );
            }
        }
    }

    #[test]
    fn staircase_shape_of_stages() {
        assert!(is_staircase_stage(&StageSpec::arithmetic(5, 3, 1, 0)));
        assert!(!is_staircase_stage(&StageSpec::arithmetic(5, 3, 2, 0)));
        assert!(is_staircase_stage(&StageSpec::explicit([2, 3, 4, 0])));
        assert!(!is_staircase_stage(&StageSpec::explicit([2, 4, 4])));
    }

    #[test]
    fn noncons_examples() {
        // r ≤ 2·maxD + 2 leaves no spread tuples
        let s = staircase(vec![2, 3]).into_spec(Budget::default()).unwrap();
        let rep = nonconservativity_check(&s, 2, 3, &frac(1, 2)).unwrap();
        assert_eq!(
            rep.values[1].get("k_fraction").unwrap(),
            &BigRational::zero()
        );
        assert_eq!(rep.verdict, Verdict::InconclusiveAtHorizon);
        let koop = Builder::Koopman {}.into_spec(Budget::default()).unwrap();
        assert!(matches!(
            nonconservativity_check(&koop, 2, 3, &frac(1, 2)),
            Err(Error::NotStronglyArithmetic(_))
        ));
    }

    #[test]
    fn spread_count_example() {
        // r = 10, gap threshold 3: pairs with |i - i'| > 3
        let all = BigInt::from(100);
        let far = &all - spread_tuple_count(&BigInt::from(10), &BigInt::from(3), 2);
        assert_eq!(far, BigInt::from(42));
    }
}
