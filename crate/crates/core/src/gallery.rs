//! Builders for the named constructions.
//!
//! Every builder is a [`StageRule`]; its parameters deserialize from the
//! `builder` object of a spec file.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::counting::gap_pair_count;
use crate::column::{
    Budget, BuildContext, BuiltStage, Property, RankOneSpec, StageRule, StageSpec,
};
use crate::error::{Error, Result};

/// How many cuts each stage uses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutRule {
    /// `r_n` from the list; the last entry repeats.
    List(Vec<u64>),
    /// `r_n = start + step·n`.
    Linear { start: u64, step: u64 },
    /// `r_n = factor·(n+1)²·(2·max D(I,n) + 1)`: far more cuts than the
    /// column is tall, so almost every pair of cut indices is far apart.
    HeightScaled { factor: u64 },
}

impl CutRule {
    fn validate(&self, strictly_increasing: bool) -> Result<()> {
        match self {
            CutRule::List(v) => {
                if v.is_empty() || v.iter().any(|&r| r < 2) {
                    return Err(Error::InvalidParameter("cut list needs entries ≥ 2".into()));
                }
                if strictly_increasing && v.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParameter(
                        "cut list must be strictly increasing".into(),
                    ));
                }
            }
            CutRule::Linear { start, step } => {
                if *start < 2 {
                    return Err(Error::InvalidParameter(
                        "linear cut rule needs start ≥ 2".into(),
                    ));
                }
                if strictly_increasing && *step == 0 {
                    return Err(Error::InvalidParameter("cut rule must grow".into()));
                }
            }
            CutRule::HeightScaled { factor } => {
                if *factor == 0 {
                    return Err(Error::InvalidParameter(
                        "height-scaled factor must be ≥ 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn cuts(&self, ctx: &BuildContext<'_>, strictly_increasing: bool) -> Result<BigInt> {
        let n = ctx.n;
        Ok(match self {
            CutRule::List(v) => {
                if strictly_increasing && n >= v.len() {
                    return Err(Error::InvalidParameter(format!(
                        "increasing cut list has {} entries, stage {n} requested",
                        v.len()
                    )));
                }
                BigInt::from(v[n.min(v.len() - 1)])
            }
            CutRule::Linear { start, step } => BigInt::from(*start) + BigInt::from(*step) * n,
            CutRule::HeightScaled { factor } => {
                let sq = BigInt::from((n + 1) * (n + 1));
                let r = BigInt::from(*factor) * sq * (ctx.max_descendant * 2u32 + 1u32);
                r.max(BigInt::from(2))
            }
        })
    }
}

/// Spacer offsets `z_n` of a high staircase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shift {
    Constant(u64),
    List(Vec<u64>),
}

impl Shift {
    fn at(&self, n: usize) -> BigInt {
        match self {
            Shift::Constant(z) => BigInt::from(*z),
            Shift::List(v) => BigInt::from(v[n.min(v.len() - 1)]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitStage {
    pub spacers: Vec<u64>,
}

/// A named construction and its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builder {
    /// `i` spacers on the `i`-th subcolumn.
    Staircase { r: CutRule },
    /// `i + z_n` spacers on the `i`-th subcolumn, `r_n` strictly increasing.
    HighStaircase { r: CutRule, z: Shift },
    /// Two-element even stages `{0, g_n}`, staircase odd stages.
    MainWde {
        #[serde(default)]
        max_odd_r: Option<u64>,
        #[serde(default)]
        extra_pad: u64,
    },
    /// Arithmetic-progression even stages of growing length, staircase odd stages.
    RigidWde {
        #[serde(default)]
        max_odd_r: Option<u64>,
        #[serde(default)]
        extra_pad: u64,
    },
    /// Even stages `{0, γ, …, (q-1)γ}` with `γ = 2h_n`, staircase odd stages.
    #[serde(rename = "t_q")]
    TQ {
        q: u64,
        #[serde(default)]
        max_odd_r: Option<u64>,
        #[serde(default)]
        extra_pad: u64,
    },
    /// `H_n = {0, 2h_n, 4h_n, …, 2^{n+1} h_n}`.
    Koopman {},
    /// Staircase with steps of size `k`; every height-set element divisible by `k`.
    PartitionStaircase { k: u64, r: CutRule },
    /// `H_n = {0, 2h_n, …, 2(q-1)h_n}` with one extra spacer on top.
    NotEic { q: u64 },
    /// Spacer lists per stage; the last stage repeats.
    Explicit { stages: Vec<ExplicitStage> },
}

impl Builder {
    pub fn validate(&self) -> Result<()> {
        match self {
            Builder::Staircase { r } => r.validate(false),
            Builder::HighStaircase { r, .. } => r.validate(true),
            Builder::PartitionStaircase { k, r } => {
                if *k == 0 {
                    return Err(Error::InvalidParameter("step k must be ≥ 1".into()));
                }
                r.validate(false)
            }
            Builder::TQ { q, max_odd_r, .. } => {
                if *q < 2 {
                    return Err(Error::InvalidParameter(format!("q = {q} < 2")));
                }
                validate_cap(*max_odd_r)
            }
            Builder::NotEic { q } => {
                if *q < 2 {
                    return Err(Error::InvalidParameter(format!("q = {q} < 2")));
                }
                Ok(())
            }
            Builder::MainWde { max_odd_r, .. } | Builder::RigidWde { max_odd_r, .. } => {
                validate_cap(*max_odd_r)
            }
            Builder::Koopman {} => Ok(()),
            Builder::Explicit { stages } => {
                if stages.is_empty() {
                    return Err(Error::InvalidParameter(
                        "explicit builder needs a stage".into(),
                    ));
                }
                stages
                    .iter()
                    .try_for_each(|s| StageSpec::explicit(s.spacers.iter().copied()).validate())?;
                // The repeated stage must keep adding room above the last
                // subcolumn, otherwise no finite stage settles a shift.
                if stages.last().and_then(|s| s.spacers.last()) == Some(&0) {
                    return Err(Error::InvalidParameter(
                        "the last explicit stage needs a spacer on its last subcolumn".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Validate and wrap in a spec.
    pub fn into_spec(self, budget: Budget) -> Result<RankOneSpec> {
        self.validate()?;
        Ok(RankOneSpec::new(self, budget))
    }

    /// Short name of the builder kind as used in spec files.
    pub fn kind(&self) -> &'static str {
        match self {
            Builder::Staircase { .. } => "staircase",
            Builder::HighStaircase { .. } => "high_staircase",
            Builder::MainWde { .. } => "main_wde",
            Builder::RigidWde { .. } => "rigid_wde",
            Builder::TQ { .. } => "t_q",
            Builder::Koopman {} => "koopman",
            Builder::PartitionStaircase { .. } => "partition_staircase",
            Builder::NotEic { .. } => "not_eic",
            Builder::Explicit { .. } => "explicit",
        }
    }

    /// Caps that make the construction a scaled-down variant, if any.
    pub fn caps(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Builder::MainWde {
                max_odd_r,
                extra_pad,
            }
            | Builder::RigidWde {
                max_odd_r,
                extra_pad,
            }
            | Builder::TQ {
                max_odd_r,
                extra_pad,
                ..
            } => {
                if let Some(c) = max_odd_r {
                    out.push(format!("max_odd_r={c}"));
                }
                if *extra_pad > 0 {
                    out.push(format!("extra_pad={extra_pad}"));
                }
            }
            _ => {}
        }
        out
    }
}

fn validate_cap(cap: Option<u64>) -> Result<()> {
    match cap {
        Some(c) if c < 2 => Err(Error::InvalidParameter("max_odd_r must be ≥ 2".into())),
        _ => Ok(()),
    }
}

/// Smallest `r` such that at least `1 - 1/(4n²)` of the pairs in `{0..r-1}²`
/// have index gap greater than `gap`.
pub fn min_cuts_for_spread(n: usize, gap: &BigInt) -> BigInt {
    let four_n2 = BigInt::from(4 * n * n);
    let ok = |r: &BigInt| -> bool {
        let m = gap + 1u32;
        if m > *r {
            return false;
        }
        let close = gap_pair_count(r, &m).expect("1 ≤ m ≤ r");
        &four_n2 * close <= r * r
    };
    let mut hi = (gap + 2u32).max(BigInt::from(2));
    while !ok(&hi) {
        hi *= 2u32;
    }
    let mut lo = BigInt::from(2);
    while lo < hi {
        let mid: BigInt = (&lo + &hi) >> 1;
        if ok(&mid) {
            hi = mid;
        } else {
            lo = mid + 1u32;
        }
    }
    lo
}

/// The cut count that the `T_q` choice prescribes for odd stage `n+1`, from
/// `r_{n+1} > 2((2m-1)n² + √(n² - 2m²n² + n⁴ - 4mn⁴ + 4m²n⁴))` with
/// `m = 2qγ_n`.
pub fn t_q_formula_cuts(q: u64, n: usize, gamma: &BigInt) -> BigInt {
    let m = BigInt::from(2 * q) * gamma;
    let n1 = BigInt::from(n);
    let n2 = &n1 * &n1;
    let n4 = &n2 * &n2;
    let radicand: BigInt = &n2 - BigInt::from(2) * &m * &m * &n2 + &n4 - BigInt::from(4) * &m * &n4
        + BigInt::from(4) * &m * &m * &n4;
    let root = if radicand.is_positive() {
        radicand.sqrt()
    } else {
        BigInt::zero()
    };
    // isqrt(x) + 1 > √x, so this is strictly above the bound.
    BigInt::from(2) * ((BigInt::from(2) * &m - 1u32) * &n2 + root) + 2u32
}

fn capped(required: BigInt, cap: Option<u64>) -> (BigInt, Option<BigInt>) {
    match cap {
        Some(c) if required > BigInt::from(c) => (BigInt::from(c.max(2)), Some(required)),
        _ => (required, None),
    }
}

/// `2·Σ_{i=1}^{r-1} i + 2·maxD + 1`.
fn staircase_clearance(r: &BigInt, max_desc: &BigInt) -> BigInt {
    r * (r - 1u32) + max_desc * 2u32 + 1u32
}

/// Odd stage of the alternating constructions: `β_i = i·h + i(i+1)/2`.
fn odd_staircase(r: BigInt) -> StageSpec {
    let last = r.clone();
    StageSpec::arithmetic(r, 1, 1, last)
}

/// `(r, capped_from)` for odd stage `n` of main/rigid WDE given `max D(I, n)`.
fn wde_odd_cuts(n: usize, max_desc: &BigInt, cap: Option<u64>) -> (BigInt, Option<BigInt>) {
    let gap = max_desc * 2u32 + 1u32;
    capped(min_cuts_for_spread(n, &gap), cap)
}

/// `(r, capped_from)` for the odd stage following even stage `n` of `T_q`.
fn t_q_odd_cuts(
    q: u64,
    n: usize,
    h_even: &BigInt,
    max_desc_next: &BigInt,
    cap: Option<u64>,
) -> (BigInt, Option<BigInt>) {
    let gamma = h_even * 2u32;
    let formula = t_q_formula_cuts(q, n, &gamma);
    let gap = max_desc_next * 2u32 + 1u32;
    let corrected = min_cuts_for_spread(n + 1, &gap);
    capped(formula.max(corrected), cap)
}

/// Even stage with `H = {0, δ, 2δ, …, (r-1)δ}` and a padded last subcolumn.
fn progression_stage(
    h: &BigInt,
    r: BigInt,
    delta: &BigInt,
    min_next_height: &BigInt,
    extra: u64,
) -> StageSpec {
    let base = delta - h;
    let natural = &r * h + &base * (&r - 1u32);
    let pad = (min_next_height - &natural).max(BigInt::zero()) + extra;
    StageSpec::arithmetic(r, base, 0, pad)
}

impl StageRule for Builder {
    fn next_stage(&self, ctx: &BuildContext<'_>) -> Result<BuiltStage> {
        let h = ctx.height;
        let n = ctx.n;
        match self {
            Builder::Staircase { r } => {
                let r = r.cuts(ctx, false)?;
                let last = &r - 1u32;
                Ok(StageSpec::arithmetic(r, 0, 1, last).into())
            }
            Builder::HighStaircase { r, z } => {
                let r = r.cuts(ctx, true)?;
                let z = z.at(n);
                let last = &z + &r - 1u32;
                Ok(StageSpec::arithmetic(r, z, 1, last).into())
            }
            Builder::PartitionStaircase { k, r } => {
                let r = r.cuts(ctx, false)?;
                let k = BigInt::from(*k);
                let h_hat = h.div_ceil(&k) * &k;
                let base = &h_hat - h;
                let natural_last = &base + &k * (&r - 1u32);
                let spec =
                    StageSpec::arithmetic(r.clone(), base.clone(), k.clone(), natural_last.clone());
                let short = spec.next_height(h).mod_floor(&k);
                let last = if short.is_zero() {
                    natural_last
                } else {
                    natural_last + (&k - short)
                };
                Ok(StageSpec::arithmetic(r, base, k, last).into())
            }
            Builder::Koopman {} => {
                let r = n + 2;
                let mut spacers = Vec::with_capacity(r);
                spacers.push(h.clone());
                for l in 1..r - 1 {
                    spacers.push(((BigInt::one() << l) - 1u32) * h);
                }
                let mut last = ((BigInt::one() << (n + 1)) + 1u32) * h;
                let top = (BigInt::one() << (n + 1)) * h + h + &last;
                if top.is_odd() {
                    last += 1u32;
                }
                spacers.push(last);
                Ok(StageSpec::explicit(spacers).into())
            }
            Builder::NotEic { q } => {
                let r = BigInt::from(*q);
                Ok(StageSpec::arithmetic(r, h.clone(), 0, h + 1u32).into())
            }
            Builder::Explicit { stages } => {
                let s = &stages[n.min(stages.len() - 1)];
                Ok(StageSpec::explicit(s.spacers.iter().copied()).into())
            }
            Builder::MainWde {
                max_odd_r,
                extra_pad,
            } => {
                if n % 2 == 1 {
                    let (r, capped_from) = wde_odd_cuts(n, ctx.max_descendant, *max_odd_r);
                    return Ok(BuiltStage {
                        spec: odd_staircase(r),
                        capped_from,
                    });
                }
                let g = (ctx.max_descendant * 2u32 + 2u32).max(h.clone());
                let next_desc = ctx.max_descendant + &g;
                let (r_next, _) = wde_odd_cuts(n + 1, &next_desc, *max_odd_r);
                let need = staircase_clearance(&r_next, &next_desc) + 1u32;
                Ok(progression_stage(h, BigInt::from(2), &g, &need, *extra_pad).into())
            }
            Builder::RigidWde {
                max_odd_r,
                extra_pad,
            } => {
                if n % 2 == 1 {
                    let (r, capped_from) = wde_odd_cuts(n, ctx.max_descendant, *max_odd_r);
                    return Ok(BuiltStage {
                        spec: odd_staircase(r),
                        capped_from,
                    });
                }
                let r = BigInt::from(n + 2);
                let gamma = h * 2u32;
                let next_desc = ctx.max_descendant + &gamma * (&r - 1u32);
                let (r_next, _) = wde_odd_cuts(n + 1, &next_desc, *max_odd_r);
                let need = staircase_clearance(&r_next, &next_desc) + 1u32;
                Ok(progression_stage(h, r, &gamma, &need, *extra_pad).into())
            }
            Builder::TQ {
                q,
                max_odd_r,
                extra_pad,
            } => {
                if n % 2 == 1 {
                    let prev = &ctx.previous[n - 1];
                    let (r, capped_from) =
                        t_q_odd_cuts(*q, n - 1, &prev.height, ctx.max_descendant, *max_odd_r);
                    return Ok(BuiltStage {
                        spec: odd_staircase(r),
                        capped_from,
                    });
                }
                let r = BigInt::from(*q);
                let gamma = h * 2u32;
                let next_desc = ctx.max_descendant + &gamma * (&r - 1u32);
                let (r_next, _) = t_q_odd_cuts(*q, n, h, &next_desc, *max_odd_r);
                let need = staircase_clearance(&r_next, &next_desc)
                    .max(&r_next * 10u32)
                    .max(BigInt::from(10 * q) * h)
                    + 1u32;
                Ok(progression_stage(h, r, &gamma, &need, *extra_pad).into())
            }
        }
    }

    fn name(&self) -> String {
        let caps = self.caps();
        if caps.is_empty() {
            self.kind().to_string()
        } else {
            format!("{}[{}]", self.kind(), caps.join(","))
        }
    }

    fn properties(&self) -> Vec<Property> {
        let mut p = vec![Property::DirectSum];
        match self {
            Builder::Staircase { .. } | Builder::HighStaircase { .. } => {
                p.push(Property::StronglyArithmetic)
            }
            Builder::Koopman {} | Builder::NotEic { .. } => {
                p.push(Property::DivisibleBy(BigInt::from(2)))
            }
            Builder::PartitionStaircase { k, r: _ } if *k >= 2 => {
                p.push(Property::DivisibleBy(BigInt::from(*k)))
            }
            Builder::PartitionStaircase { .. } => p.push(Property::StronglyArithmetic),
            _ => {}
        }
        p
    }
}

/// Convenience constructors.
pub fn staircase(r: Vec<u64>) -> Builder {
    Builder::Staircase {
        r: CutRule::List(r),
    }
}

pub fn t_q(q: u64, max_odd_r: Option<u64>) -> Builder {
    Builder::TQ {
        q,
        max_odd_r,
        extra_pad: 0,
    }
}

pub fn main_wde(max_odd_r: Option<u64>) -> Builder {
    Builder::MainWde {
        max_odd_r,
        extra_pad: 0,
    }
}

pub fn rigid_wde(max_odd_r: Option<u64>) -> Builder {
    Builder::RigidWde {
        max_odd_r,
        extra_pad: 0,
    }
}
