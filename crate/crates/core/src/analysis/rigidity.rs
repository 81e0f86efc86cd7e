//! Partial rigidity, α-type profiles and the Koopman decay bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::report::{CertificateKind, CertificateReport, Entry, Verdict};
use crate::column::RankOneSpec;
use crate::error::{Error, Result};
use crate::intset::{diff_histogram, IntSet, Lane, Lanes};
use crate::tower::{refine, translate_intersection_measure, LevelSet};

/// `|(a + H) ∩ H| / |H|`.
pub fn rigidity_ratio(h: &IntSet, a: &BigInt) -> Result<BigRational> {
    if a.is_negative() {
        return Err(Error::Precondition(format!("rigidity shift {a} < 0")));
    }
    if h.is_empty() {
        return Err(Error::Precondition("empty height set".into()));
    }
    Ok(BigRational::new(
        BigInt::from(h.shifted_overlap(a, h)),
        BigInt::from(h.len()),
    ))
}

/// Positive shift with the largest overlap, smallest on ties.
pub fn best_shift(h: &IntSet, max_pairs: u64) -> Result<Option<(BigInt, BigRational)>> {
    let pairs = (h.len() as u128) * (h.len() as u128);
    if pairs > max_pairs as u128 {
        return Err(Error::budget("rigidity candidates", pairs, max_pairs));
    }
    let best = match h.lanes() {
        Lanes::Small(v) => best_positive(&v),
        Lanes::Big(v) => best_positive(&v),
    };
    Ok(best.map(|(a, c)| (a, BigRational::new(BigInt::from(c), BigInt::from(h.len())))))
}

fn best_positive<T: Lane>(v: &[T]) -> Option<(BigInt, u64)> {
    let mut best: Option<(BigInt, u64)> = None;
    for e in diff_histogram(v) {
        if !e.diff.is_positive() {
            continue;
        }
        // entries arrive in increasing order, so strict > keeps the smallest a
        if best.as_ref().is_none_or(|(_, c)| e.count > *c) {
            best = Some((e.diff.to_big(), e.count));
        }
    }
    best
}

/// `(a*, ratio*)` over `a ∈ (H_n - H_n) ∩ ℕ`.
pub fn rigidity_scan(spec: &RankOneSpec, n: usize) -> Result<(BigInt, BigRational)> {
    let h = spec.height_set(n)?;
    best_shift(&h, spec.budget().max_pairs)?
        .ok_or_else(|| Error::Precondition(format!("stage {n} has a single subcolumn")))
}

/// Every nonzero `μ(B ∩ T^k B)/μ(B)` for `1 ≤ k ≤ k_max`, exception set
/// `{k : ratio > threshold}` and supremum over `k` past the last exception.
///
/// For each `k` the measure is read at the least stage `n` with
/// `h_n > max D_n + k`, where every shift stays inside `C_n`; there it equals
/// `(number of pairs in D_n with difference k)·w_n`. One histogram per stage
/// therefore covers a whole window of `k`.
pub fn alpha_type_profile(
    spec: &RankOneSpec,
    b: &LevelSet,
    k_max: &BigInt,
    threshold: &BigRational,
) -> Result<CertificateReport> {
    let mut rep = CertificateReport::new(CertificateKind::AlphaType, "k");
    let mu = b.measure(spec)?;
    if mu.is_zero() {
        return Err(Error::Precondition("empty level set".into()));
    }
    let mut lo = BigInt::one();
    let mut n = b.stage();
    let mut stages = Vec::new();
    while lo <= *k_max {
        let d = refine(spec, b, n)?;
        let top = d.heights().max().cloned().unwrap_or_default();
        // shifts k with top + k < h_n
        let hi = (spec.height(n)? - top - 1u32).min(k_max.clone());
        if hi >= lo {
            let pairs = (d.heights().len() as u128).pow(2);
            if pairs > spec.budget().max_pairs as u128 {
                return Err(Error::budget(
                    "alpha histogram",
                    pairs,
                    spec.budget().max_pairs,
                ));
            }
            let w = spec.width(n)?;
            let hist: Vec<(BigInt, u64)> = match d.heights().lanes() {
                Lanes::Small(v) => window(&v, &lo, &hi),
                Lanes::Big(v) => window(&v, &lo, &hi),
            };
            for (k, c) in hist {
                let ratio = BigRational::from_integer(BigInt::from(c)) * &w / mu.value();
                rep.values.push(Entry::new(k, ratio));
            }
            stages.push(format!("{n}:[{lo},{hi}]"));
            lo = hi + 1u32;
        }
        n += 1;
    }
    rep.horizon = k_max.clone();
    let exceptions: Vec<&Entry> = rep.values.iter().filter(|e| e.value > *threshold).collect();
    let last_exc = exceptions.last().map(|e| e.at.clone());
    let tail_sup = rep
        .values
        .iter()
        .filter(|e| last_exc.as_ref().is_none_or(|l| e.at > *l))
        .map(|e| e.value.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    let exc: Vec<String> = exceptions.iter().map(|e| e.at.to_string()).collect();
    rep.note("exception_set", format!("[{}]", exc.join(",")));
    rep.note("exception_count", exc.len());
    rep.note("tail_sup", &tail_sup);
    rep.note("threshold", threshold);
    rep.note("stage_windows", stages.join(" "));
    // the profile is only finite evidence; satisfied means the tail past the
    // exceptions stays at or below the threshold within k_max
    rep.verdict = if tail_sup <= *threshold {
        Verdict::Satisfied
    } else {
        Verdict::Refuted
    };
    Ok(rep)
}

fn window<T: Lane>(v: &[T], lo: &BigInt, hi: &BigInt) -> Vec<(BigInt, u64)> {
    diff_histogram(v)
        .into_iter()
        .filter_map(|e| {
            let k = e.diff.to_big();
            (k >= *lo && k <= *hi).then_some((k, e.count))
        })
        .collect()
}

/// Largest `n` with `h_n ≤ k`.
pub fn stage_window(spec: &RankOneSpec, k: &BigInt) -> Result<usize> {
    let mut n = 0;
    while spec.height(n + 1)? <= *k {
        n += 1;
    }
    Ok(n)
}

/// Checks `μ(B ∩ T^k B)/μ(B) < 2/n(k)` for each sampled `k`, `n(k)` the
/// stage window of `k`. Each `k` must be at least `h_{m+1}` for `B` a union
/// of levels of `C_m`.
pub fn koopman_decay_check(
    spec: &RankOneSpec,
    b: &LevelSet,
    ks: &[BigInt],
) -> Result<CertificateReport> {
    let mut rep = CertificateReport::new(CertificateKind::KoopmanDecay, "k");
    let floor = spec.height(b.stage() + 1)?;
    let mu = b.measure(spec)?;
    let mut ok = true;
    let mut window_sup: Vec<(usize, BigRational)> = Vec::new();
    for k in ks {
        if *k < floor {
            return Err(Error::Precondition(format!(
                "sampled k = {k} below h_{} = {floor}",
                b.stage() + 1
            )));
        }
        let n = stage_window(spec, k)?;
        let ratio = translate_intersection_measure(spec, b, k)?.ratio(&mu);
        let bound = BigRational::new(BigInt::from(2), BigInt::from(n));
        ok &= ratio < bound;
        match window_sup.iter_mut().find(|(m, _)| *m == n) {
            Some((_, s)) if *s < ratio => *s = ratio.clone(),
            Some(_) => {}
            None => window_sup.push((n, ratio.clone())),
        }
        rep.values.push(
            Entry::new(k.clone(), ratio)
                .with("bound", bound)
                .with("window", BigRational::from_integer(BigInt::from(n))),
        );
        rep.horizon = rep.horizon.clone().max(k.clone());
    }
    window_sup.sort_by_key(|(n, _)| *n);
    let sups: Vec<String> = window_sup.iter().map(|(n, s)| format!("{n}:{s}")).collect();
    rep.note("window_sup", sups.join(" "));
    rep.verdict = if ok {
        Verdict::Satisfied
    } else {
        Verdict::Refuted
    };
    Ok(rep)
}
