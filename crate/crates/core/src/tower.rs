//! Exact simulation of the transformation in tower coordinates.
//!
//! A point is `(stage n, height y, offset x)` with `0 ≤ y < h_n` and
//! `0 ≤ x < w_n`: the point sits at horizontal position `x` inside level `y`
//! of `C_n`. Lifting to `n+1` picks the subcolumn `c = ⌊x / w_{n+1}⌋`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::column::RankOneSpec;
use crate::error::{Error, Result};
use crate::intset::{sum_set, IntSet};

/// An exact nonnegative measure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Measure(pub BigRational);

impl Measure {
    pub fn zero() -> Self {
        Measure(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `self / other`; `other` must be nonzero.
    pub fn ratio(&self, other: &Measure) -> BigRational {
        &self.0 / &other.0
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::ops::Add for Measure {
    type Output = Measure;
    fn add(self, rhs: Measure) -> Measure {
        Measure(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Measure {
    type Output = Measure;
    fn sub(self, rhs: Measure) -> Measure {
        Measure(self.0 - rhs.0)
    }
}

/// A finite union of levels of one column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSet {
    stage: usize,
    heights: IntSet,
}

impl LevelSet {
    /// Checks every height lies in `[0, h_stage)`.
    pub fn new(spec: &RankOneSpec, stage: usize, heights: IntSet) -> Result<Self> {
        let h = spec.height(stage)?;
        if let (Some(lo), Some(hi)) = (heights.min(), heights.max()) {
            if lo.is_negative() || *hi >= h {
                return Err(Error::Precondition(format!(
                    "levels {heights} not inside column {stage} of height {h}"
                )));
            }
        }
        Ok(LevelSet { stage, heights })
    }

    /// The bottom level of `C_stage`.
    pub fn base(stage: usize) -> Self {
        LevelSet {
            stage,
            heights: IntSet::singleton(0),
        }
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn heights(&self) -> &IntSet {
        &self.heights
    }

    pub fn measure(&self, spec: &RankOneSpec) -> Result<Measure> {
        let w = spec.width(self.stage)?;
        Ok(Measure(
            w * BigRational::from_integer(BigInt::from(self.heights.len())),
        ))
    }

    /// Largest height this set occupies once refined to stage `m`.
    fn max_height_at(&self, spec: &RankOneSpec, m: usize) -> Result<BigInt> {
        let top = self.heights.max().cloned().unwrap_or_default();
        Ok(top + spec.max_descendant_between(self.stage, m)?)
    }
}

/// Express `b` as a union of levels of `C_m`, `m ≥ b.stage`.
pub fn refine(spec: &RankOneSpec, b: &LevelSet, m: usize) -> Result<LevelSet> {
    if m < b.stage {
        return Err(Error::Precondition(format!(
            "cannot refine stage {} to earlier stage {m}",
            b.stage
        )));
    }
    if m == b.stage {
        return Ok(b.clone());
    }
    let limit = spec.budget().max_descendants;
    let needed = spec.cut_product(b.stage, m)? * BigInt::from(b.heights.len());
    if needed > BigInt::from(limit) {
        return Err(Error::budget("refined level set", needed, limit));
    }
    let desc = spec.descendant_set(b.stage, m, &BigInt::zero())?;
    Ok(LevelSet {
        stage: m,
        heights: sum_set(&b.heights, &desc, limit)?,
    })
}

/// Least stage `n ≥ from` at which every set in `sets`, refined to `n`, stays
/// inside `C_n` after a shift by `|k|`.
pub fn shift_stage(spec: &RankOneSpec, sets: &[&LevelSet], k: &BigInt) -> Result<usize> {
    let from = sets.iter().map(|s| s.stage).max().unwrap_or(0);
    let mut n = from;
    loop {
        let mut top = BigInt::zero();
        for s in sets {
            top = top.max(s.max_height_at(spec, n)?);
        }
        if spec.height(n)? > top + k.abs() {
            return Ok(n);
        }
        n += 1;
    }
}

/// `μ(B ∩ T^k B)`, exact. Symmetric in `k ↔ -k`.
pub fn translate_intersection_measure(
    spec: &RankOneSpec,
    b: &LevelSet,
    k: &BigInt,
) -> Result<Measure> {
    let n = match shift_stage(spec, &[b], k) {
        Ok(n) if fits(spec, b, n)? => n,
        _ => return intersection_measure_adaptive(spec, b, b, k),
    };
    let d = refine(spec, b, n)?;
    let hits = d.heights.shifted_overlap(&k.abs(), &d.heights);
    Ok(Measure(
        spec.width(n)? * BigRational::from_integer(BigInt::from(hits)),
    ))
}

/// `μ(T^k A ∩ B)`, exact.
pub fn intersection_measure(
    spec: &RankOneSpec,
    a: &LevelSet,
    b: &LevelSet,
    k: &BigInt,
) -> Result<Measure> {
    // μ(T^k A ∩ B) = μ(A ∩ T^{-k} B), so a negative shift moves B instead.
    let (moved, fixed) = if k.is_negative() { (b, a) } else { (a, b) };
    let n = match shift_stage(spec, &[a, b], k) {
        Ok(n) if fits(spec, a, n)? && fits(spec, b, n)? => n,
        _ => return intersection_measure_adaptive(spec, a, b, k),
    };
    let moved = refine(spec, moved, n)?;
    let fixed = refine(spec, fixed, n)?;
    let hits = moved.heights.shifted_overlap(&k.abs(), &fixed.heights);
    Ok(Measure(
        spec.width(n)? * BigRational::from_integer(BigInt::from(hits)),
    ))
}

/// `(c, y)` with `height = offset(c) + y`, `0 ≤ y < h`: the subcolumn of
/// stage `st` holding a level of the next column. `None` on a spacer.
fn locate(st: &crate::column::Stage, height: &BigInt) -> Option<(BigInt, BigInt)> {
    // Largest c with offset(c) ≤ height.
    let (mut lo, mut hi) = (BigInt::zero(), &st.spec.r - 1);
    while lo < hi {
        let mid: BigInt = (&lo + &hi + 1) >> 1;
        if st.offset(&mid) <= *height {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let y = height - st.offset(&lo);
    (y < st.height).then_some((lo, y))
}

/// Height in `C_m` of the level containing level `x` of `C_n`, `m ≤ n`;
/// `None` when that level is a spacer added after stage `m`.
pub fn level_ancestor(
    spec: &RankOneSpec,
    n: usize,
    x: &BigInt,
    m: usize,
) -> Result<Option<BigInt>> {
    let mut x = x.clone();
    for j in (m..n).rev() {
        match locate(&*spec.stage(j)?, &x) {
            Some((_, y)) => x = y,
            None => return Ok(None),
        }
    }
    Ok(Some(x))
}

fn fits(spec: &RankOneSpec, b: &LevelSet, n: usize) -> Result<bool> {
    let needed = spec.cut_product(b.stage, n)? * BigInt::from(b.heights.len());
    Ok(needed <= BigInt::from(spec.budget().max_descendants))
}

/// `μ(T^k A ∩ B)` computed level by level: a level whose image stays inside
/// its column is settled there by looking up its ancestor in `B`'s column,
/// and only levels pushed over the top are refined one stage further. Exact
/// for any `k`; useful when the single common stage would be too deep.
pub fn intersection_measure_adaptive(
    spec: &RankOneSpec,
    a: &LevelSet,
    b: &LevelSet,
    k: &BigInt,
) -> Result<Measure> {
    let (moved, fixed) = if k.is_negative() { (b, a) } else { (a, b) };
    let k = k.abs();
    let start = moved.stage.max(fixed.stage);
    let limit = spec.budget().max_descendants;
    let moved = refine(spec, moved, start)?;
    let mut work: Vec<(usize, BigInt)> = moved.heights.iter().map(|y| (start, y.clone())).collect();
    let mut visited: u64 = 0;
    let mut total = BigRational::zero();
    while let Some((n, y)) = work.pop() {
        visited += 1;
        if visited > limit {
            return Err(Error::budget("adaptive refinement", visited, limit));
        }
        let st = spec.stage(n)?;
        let target = &y + &k;
        if target < st.height {
            if let Some(z) = level_ancestor(spec, n, &target, fixed.stage)? {
                if fixed.heights.contains(&z) {
                    total += spec.width(n)?;
                }
            }
            continue;
        }
        let r = st.spec.r_within(limit)?;
        for c in 0..r {
            work.push((n + 1, &y + st.offset(&BigInt::from(c))));
        }
    }
    Ok(Measure(total))
}

/// A point in tower coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub stage: usize,
    pub height: BigInt,
    pub offset: BigRational,
}

impl Point {
    pub fn new(
        spec: &RankOneSpec,
        stage: usize,
        height: BigInt,
        offset: BigRational,
    ) -> Result<Self> {
        let h = spec.height(stage)?;
        let w = spec.width(stage)?;
        if height.is_negative() || height >= h || offset.is_negative() || offset >= w {
            return Err(Error::Precondition(format!(
                "point ({stage}, {height}, {offset}) outside column of height {h} and width {w}"
            )));
        }
        Ok(Point {
            stage,
            height,
            offset,
        })
    }

    /// The same point expressed in `C_{stage+1}`.
    pub fn lift(&self, spec: &RankOneSpec) -> Result<Point> {
        let st = spec.stage(self.stage)?;
        let w_next = spec.width(self.stage + 1)?;
        let c = (&self.offset / &w_next).floor().to_integer();
        Ok(Point {
            stage: self.stage + 1,
            height: &self.height + st.offset(&c),
            offset: &self.offset - BigRational::from_integer(c) * w_next,
        })
    }

    pub fn lift_to(&self, spec: &RankOneSpec, m: usize) -> Result<Point> {
        let mut p = self.clone();
        while p.stage < m {
            p = p.lift(spec)?;
        }
        Ok(p)
    }

    /// The same point in `C_{stage-1}`, or `None` when it sits on a spacer
    /// added at stage `stage-1`.
    pub fn lower(&self, spec: &RankOneSpec) -> Result<Option<Point>> {
        if self.stage == 0 {
            return Err(Error::Precondition("cannot lower below C_0".into()));
        }
        let st = spec.stage(self.stage - 1)?;
        let Some((lo, y)) = locate(&st, &self.height) else {
            return Ok(None);
        };
        let w = spec.width(self.stage)?;
        Ok(Some(Point {
            stage: self.stage - 1,
            height: y,
            offset: &self.offset + BigRational::from_integer(lo) * w,
        }))
    }

    /// Lower to stage `m ≤ stage`; `None` if the point is not in `C_m`.
    pub fn lower_to(&self, spec: &RankOneSpec, m: usize) -> Result<Option<Point>> {
        let mut p = self.clone();
        while p.stage > m {
            match p.lower(spec)? {
                Some(q) => p = q,
                None => return Ok(None),
            }
        }
        Ok(Some(p))
    }

    /// Whether both coordinates name the same point of `X`.
    pub fn same_as(&self, other: &Point, spec: &RankOneSpec) -> Result<bool> {
        let m = self.stage.max(other.stage);
        Ok(self.lift_to(spec, m)? == other.lift_to(spec, m)?)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.stage, self.height, self.offset)
    }
}

/// `T^k(p)`. Lifts only when the orbit reaches the top (or, for negative `k`,
/// the bottom) of the current column, so repeated single steps and one jump
/// land on identical coordinates.
pub fn apply_pointwise(spec: &RankOneSpec, p: &Point, k: &BigInt) -> Result<Point> {
    let mut p = p.clone();
    let mut remaining = k.abs();
    let up = !k.is_negative();
    while !remaining.is_zero() {
        let h = spec.height(p.stage)?;
        let room = if up {
            &h - BigInt::one() - &p.height
        } else {
            p.height.clone()
        };
        if remaining <= room {
            if up {
                p.height += &remaining;
            } else {
                p.height -= &remaining;
            }
            break;
        }
        // Walk to the top (bottom), then continue in the next column.
        if up {
            p.height = h - 1;
        } else {
            p.height = BigInt::zero();
        }
        remaining -= room;
        p = p.lift(spec)?;
        let h = spec.height(p.stage)?;
        let blocked = if up {
            p.height == h - 1
        } else {
            p.height.is_zero()
        };
        if !blocked {
            if up {
                p.height += 1;
            } else {
                p.height -= 1;
            }
            remaining -= 1;
        }
    }
    Ok(p)
}
