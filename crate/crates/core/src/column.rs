//! Columns, cutting stages and the height-set / descendant-set calculus.
//!
//! Column `C_0` is the unit interval. Stage `n` cuts `C_n` into `r_n`
//! subcolumns, puts `s_{n,k}` spacers on subcolumn `k` and stacks left to
//! right, so `h_{n+1} = Σ_k (h_n + s_{n,k})` and `w_{n+1} = w_n / r_n`.

use std::fmt;
use std::ops::Deref;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intset::{sum_set, IntSet};

/// Spacer counts for one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Spacers {
    /// One count per subcolumn.
    Explicit(Vec<BigInt>),
    /// `s_k = base + k·step` for `k < r-1`, and `last` on the rightmost subcolumn.
    Arithmetic {
        base: BigInt,
        step: BigInt,
        last: BigInt,
    },
}

/// One cutting stage: `r` subcolumns and their spacers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSpec {
    pub r: BigInt,
    pub spacers: Spacers,
}

impl StageSpec {
    pub fn explicit<I, T>(spacers: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let s: Vec<BigInt> = spacers.into_iter().map(Into::into).collect();
        StageSpec {
            r: BigInt::from(s.len()),
            spacers: Spacers::Explicit(s),
        }
    }

    pub fn arithmetic(
        r: impl Into<BigInt>,
        base: impl Into<BigInt>,
        step: impl Into<BigInt>,
        last: impl Into<BigInt>,
    ) -> Self {
        StageSpec {
            r: r.into(),
            spacers: Spacers::Arithmetic {
                base: base.into(),
                step: step.into(),
                last: last.into(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < BigInt::from(2) {
            return Err(Error::InvalidParameter(format!(
                "cut count r = {} < 2",
                self.r
            )));
        }
        match &self.spacers {
            Spacers::Explicit(s) => {
                if BigInt::from(s.len()) != self.r {
                    return Err(Error::InvalidParameter(format!(
                        "{} spacer counts for r = {}",
                        s.len(),
                        self.r
                    )));
                }
                if s.iter().any(Signed::is_negative) {
                    return Err(Error::InvalidParameter("negative spacer count".into()));
                }
            }
            Spacers::Arithmetic { base, step, last } => {
                if base.is_negative() || step.is_negative() || last.is_negative() {
                    return Err(Error::InvalidParameter("negative spacer count".into()));
                }
            }
        }
        Ok(())
    }

    /// `r` as a machine integer, if it fits under `limit`.
    pub fn r_within(&self, limit: u64) -> Result<usize> {
        match self.r.to_u64() {
            Some(r) if r <= limit => Ok(r as usize),
            _ => Err(Error::budget("cut count", &self.r, limit)),
        }
    }

    /// `s_k`.
    pub fn spacer(&self, k: &BigInt) -> BigInt {
        match &self.spacers {
            Spacers::Explicit(s) => s[k.to_usize().expect("subcolumn index")].clone(),
            Spacers::Arithmetic { base, step, last } => {
                if *k == &self.r - 1 {
                    last.clone()
                } else {
                    base + step * k
                }
            }
        }
    }

    /// Height of subcolumn `c` inside the next column: `Σ_{k<c} (h + s_k)`.
    pub fn offset(&self, c: &BigInt, h: &BigInt) -> BigInt {
        match &self.spacers {
            Spacers::Explicit(s) => {
                let c = c.to_usize().expect("subcolumn index");
                s[..c].iter().map(|x| h + x).sum()
            }
            Spacers::Arithmetic { base, step, .. } => {
                // c ≤ r-1 so only the arithmetic part is involved.
                c * (h + base) + step * (c * (c - 1u32) / 2u32)
            }
        }
    }

    /// `max H_n`.
    pub fn max_offset(&self, h: &BigInt) -> BigInt {
        self.offset(&(&self.r - 1), h)
    }

    pub fn next_height(&self, h: &BigInt) -> BigInt {
        self.max_offset(h) + h + self.spacer(&(&self.r - 1))
    }

    /// gcd of the consecutive gaps `h + s_k`, k < r-1; equals the gcd of the
    /// nonzero height-set elements.
    pub fn height_gcd(&self, h: &BigInt) -> BigInt {
        match &self.spacers {
            Spacers::Explicit(s) => s[..s.len() - 1]
                .iter()
                .fold(BigInt::zero(), |g, x| g.gcd(&(h + x))),
            Spacers::Arithmetic { base, step, .. } => {
                let first = h + base;
                if self.r > BigInt::from(2) {
                    first.gcd(step)
                } else {
                    first
                }
            }
        }
    }
}

/// A declared structural property of a construction; checked, never trusted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Property {
    /// Every nonzero height-set element is divisible by this number.
    DivisibleBy(BigInt),
    /// Every height set is a full-length staircase.
    StronglyArithmetic,
    /// Every descendant has a unique stage decomposition.
    DirectSum,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::DivisibleBy(g) => write!(f, "all-heights-divisible-by-{g}"),
            Property::StronglyArithmetic => write!(f, "strongly-arithmetic"),
            Property::DirectSum => write!(f, "direct-sum"),
        }
    }
}

/// What a stage rule sees when asked for stage `n`.
pub struct BuildContext<'a> {
    pub n: usize,
    /// `h_n`.
    pub height: &'a BigInt,
    /// `max D(I, n)` for `I` the base of `C_0`.
    pub max_descendant: &'a BigInt,
    pub previous: &'a [Arc<Stage>],
}

/// A generator of cutting stages. Stage `n` may depend only on the rule's
/// parameters and stages `< n`.
pub trait StageRule: Send + Sync + fmt::Debug {
    fn next_stage(&self, ctx: &BuildContext<'_>) -> Result<BuiltStage>;
    fn name(&self) -> String;
    fn properties(&self) -> Vec<Property> {
        Vec::new()
    }
}

/// A stage as produced by a rule, with a note when a cap overrode the
/// construction's own choice of `r`.
#[derive(Clone, Debug)]
pub struct BuiltStage {
    pub spec: StageSpec,
    /// The cut count the construction asked for, when a cap replaced it.
    pub capped_from: Option<BigInt>,
}

impl From<StageSpec> for BuiltStage {
    fn from(spec: StageSpec) -> Self {
        BuiltStage {
            spec,
            capped_from: None,
        }
    }
}

/// A materialized stage together with the column it cuts.
#[derive(Clone, Debug)]
pub struct Stage {
    pub index: usize,
    pub spec: StageSpec,
    /// `h_n`.
    pub height: BigInt,
    /// `w_n`.
    pub width: BigRational,
    /// `max D(I, n)`.
    pub max_descendant: BigInt,
    pub capped_from: Option<BigInt>,
}

impl Stage {
    /// `h_{n,k}` offsets: the `c`-th element of `H_n`.
    pub fn offset(&self, c: &BigInt) -> BigInt {
        self.spec.offset(c, &self.height)
    }

    pub fn max_offset(&self) -> BigInt {
        self.spec.max_offset(&self.height)
    }

    pub fn next_height(&self) -> BigInt {
        self.spec.next_height(&self.height)
    }
}

/// Enumeration and materialization limits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_stage: usize,
    pub max_height_bits: u64,
    pub max_descendants: u64,
    pub max_pairs: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_stage: 64,
            max_height_bits: 1 << 16,
            max_descendants: 1 << 20,
            max_pairs: 1 << 27,
        }
    }
}

/// The sorted translation offsets `H_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightSet(IntSet);

impl HeightSet {
    pub fn new(set: IntSet) -> Self {
        HeightSet(set)
    }

    pub fn into_inner(self) -> IntSet {
        self.0
    }
}

impl Deref for HeightSet {
    type Target = IntSet;
    fn deref(&self) -> &IntSet {
        &self.0
    }
}

/// A rank-one construction: a stage rule, a budget and the materialized prefix.
///
/// Materialization is append-only behind a lock, so a shared reference can be
/// queried from several threads.
#[derive(Debug)]
pub struct RankOneSpec {
    rule: Box<dyn StageRule>,
    budget: Budget,
    stages: RwLock<Vec<Arc<Stage>>>,
}

impl RankOneSpec {
    pub fn new(rule: impl StageRule + 'static, budget: Budget) -> Self {
        Self::from_boxed(Box::new(rule), budget)
    }

    pub fn from_boxed(rule: Box<dyn StageRule>, budget: Budget) -> Self {
        RankOneSpec {
            rule,
            budget,
            stages: RwLock::new(Vec::new()),
        }
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn rule(&self) -> &dyn StageRule {
        self.rule.as_ref()
    }

    pub fn materialized(&self) -> usize {
        self.stages.read().unwrap().len()
    }

    /// Make stages `0..n` (and hence `h_0..h_n`, `w_0..w_n`) available.
    pub fn materialize(&self, n: usize) -> Result<()> {
        if n > self.budget.max_stage {
            return Err(Error::budget("stage", n, self.budget.max_stage));
        }
        if self.stages.read().unwrap().len() >= n {
            return Ok(());
        }
        let mut stages = self.stages.write().unwrap();
        while stages.len() < n {
            let m = stages.len();
            let (height, width, max_desc) = match stages.last() {
                None => (BigInt::one(), BigRational::one(), BigInt::zero()),
                Some(prev) => (
                    prev.next_height(),
                    &prev.width / BigRational::from_integer(prev.spec.r.clone()),
                    &prev.max_descendant + prev.max_offset(),
                ),
            };
            let built = self.rule.next_stage(&BuildContext {
                n: m,
                height: &height,
                max_descendant: &max_desc,
                previous: &stages,
            })?;
            built.spec.validate()?;
            let stage = Stage {
                index: m,
                spec: built.spec,
                height,
                width,
                max_descendant: max_desc,
                capped_from: built.capped_from,
            };
            let bits = stage.next_height().bits();
            if bits > self.budget.max_height_bits {
                return Err(Error::budget(
                    "height bit length",
                    bits,
                    self.budget.max_height_bits,
                ));
            }
            stages.push(Arc::new(stage));
        }
        Ok(())
    }

    /// Stage `n`, materializing through it.
    pub fn stage(&self, n: usize) -> Result<Arc<Stage>> {
        self.materialize(n + 1)?;
        Ok(self.stages.read().unwrap()[n].clone())
    }

    /// `h_n`.
    pub fn height(&self, n: usize) -> Result<BigInt> {
        if n == 0 {
            return Ok(BigInt::one());
        }
        Ok(self.stage(n - 1)?.next_height())
    }

    /// `w_n = 1 / (r_0 ⋯ r_{n-1})`.
    pub fn width(&self, n: usize) -> Result<BigRational> {
        if n == 0 {
            return Ok(BigRational::one());
        }
        let prev = self.stage(n - 1)?;
        Ok(&prev.width / BigRational::from_integer(prev.spec.r.clone()))
    }

    /// `max D(I, n)` for `I` the base of `C_0`.
    pub fn max_descendant(&self, n: usize) -> Result<BigInt> {
        if n == 0 {
            return Ok(BigInt::zero());
        }
        let prev = self.stage(n - 1)?;
        Ok(&prev.max_descendant + prev.max_offset())
    }

    /// `max (H_i + … + H_{j-1})`.
    pub fn max_descendant_between(&self, i: usize, j: usize) -> Result<BigInt> {
        Ok(self.max_descendant(j)? - self.max_descendant(i)?)
    }

    /// `r_i ⋯ r_{j-1}`.
    pub fn cut_product(&self, i: usize, j: usize) -> Result<BigInt> {
        let mut p = BigInt::one();
        for m in i..j {
            p *= &self.stage(m)?.spec.r;
        }
        Ok(p)
    }

    /// `H_n = {0} ∪ {Σ_{k≤ℓ} (h_n + s_{n,k}) : ℓ < r_n - 1}`.
    pub fn height_set(&self, n: usize) -> Result<HeightSet> {
        let stage = self.stage(n)?;
        let r = stage.spec.r_within(self.budget.max_descendants)?;
        let mut v = Vec::with_capacity(r);
        let mut acc = BigInt::zero();
        v.push(acc.clone());
        for k in 0..r - 1 {
            acc += &stage.height + stage.spec.spacer(&BigInt::from(k));
            v.push(acc.clone());
        }
        Ok(HeightSet(IntSet::from_sorted(v)))
    }

    /// `D(I, j) = b + H_i + … + H_{j-1}` for `I` the level of `C_i` at height `b`.
    pub fn descendant_set(&self, i: usize, j: usize, b: &BigInt) -> Result<IntSet> {
        if i > j {
            return Err(Error::Precondition(format!("descendant stages {i} > {j}")));
        }
        let h = self.height(i)?;
        if b.is_negative() || *b >= h {
            return Err(Error::Precondition(format!(
                "base height {b} outside [0, {h})"
            )));
        }
        let bound = self.cut_product(i, j)?;
        if bound > BigInt::from(self.budget.max_descendants) {
            return Err(Error::budget(
                "descendant set",
                bound,
                self.budget.max_descendants,
            ));
        }
        let mut acc = IntSet::singleton(b.clone());
        for m in i..j {
            let hs = self.height_set(m)?;
            acc = sum_set(&acc, &hs, self.budget.max_descendants)?;
        }
        Ok(acc)
    }

    /// Whether `|H_i + … + H_{j-1}| = r_i ⋯ r_{j-1}`.
    pub fn is_direct_sum(&self, i: usize, j: usize) -> Result<bool> {
        let d = self.descendant_set(i, j, &BigInt::zero())?;
        Ok(BigInt::from(d.len()) == self.cut_product(i, j)?)
    }
}

/// Whether every element of `S_0 + … + S_{m-1}` has exactly one decomposition.
///
/// Height sets of a genuine construction always pass (each `H_{n+1}` starts
/// above `max H_n + h_n`); arbitrary sets need not.
pub fn is_direct_sum_of(sets: &[IntSet], limit: u64) -> Result<bool> {
    let mut acc = IntSet::singleton(0);
    let mut product: u128 = 1;
    for s in sets {
        acc = sum_set(&acc, s, limit)?;
        product *= s.len() as u128;
    }
    Ok(acc.len() as u128 == product)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fixed list of stages, repeating the last one.
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

    fn staircase3() -> RankOneSpec {
        RankOneSpec::new(
            Fixed(vec![StageSpec::explicit([0, 1, 2])]),
            Budget::default(),
        )
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn first_column_is_unit_interval() {
        let spec = staircase3();
        spec.materialize(0).unwrap();
        assert_eq!(spec.height(0).unwrap(), big(1));
        assert_eq!(spec.width(0).unwrap(), BigRational::one());
    }

    #[test]
    fn staircase_first_stage() {
        let spec = staircase3();
        spec.materialize(1).unwrap();
        assert_eq!(spec.height(1).unwrap(), big(6));
        assert_eq!(spec.stage(0).unwrap().spec.r, big(3));
        assert_eq!(*spec.height_set(0).unwrap(), IntSet::new([0, 1, 3]));
    }

    #[test]
    fn no_spacers_doubles_height() {
        let spec = RankOneSpec::new(Fixed(vec![StageSpec::explicit([0, 0])]), Budget::default());
        spec.materialize(1).unwrap();
        assert_eq!(spec.height(1).unwrap(), big(2));
        assert_eq!(spec.width(1).unwrap(), BigRational::new(big(1), big(2)));
    }

    #[test]
    fn materialize_is_idempotent() {
        let spec = staircase3();
        spec.materialize(3).unwrap();
        let h = spec.height(3).unwrap();
        spec.materialize(2).unwrap();
        spec.materialize(3).unwrap();
        assert_eq!(spec.materialized(), 3);
        assert_eq!(spec.height(3).unwrap(), h);
    }

    #[test]
    fn stage_budget_enforced() {
        let budget = Budget {
            max_stage: 2,
            ..Budget::default()
        };
        let spec = RankOneSpec::new(Fixed(vec![StageSpec::explicit([0, 1, 2])]), budget);
        assert!(spec.materialize(2).is_ok());
        assert!(matches!(
            spec.materialize(3),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn height_bits_budget_enforced() {
        let budget = Budget {
            max_height_bits: 10,
            ..Budget::default()
        };
        let spec = RankOneSpec::new(Fixed(vec![StageSpec::explicit([0, 0, 0, 0])]), budget);
        // h_n = 4^n exceeds 10 bits at n = 5.
        assert!(spec.materialize(4).is_ok());
        assert!(spec.materialize(5).is_err());
    }

    #[test]
    fn height_set_examples() {
        let two = RankOneSpec::new(Fixed(vec![StageSpec::explicit([0, 0])]), Budget::default());
        // h_2 = 4; a stage with h = 5 needs a spacer somewhere earlier.
        let five = RankOneSpec::new(
            Fixed(vec![
                StageSpec::explicit([0, 3]),
                StageSpec::explicit([0, 0]),
            ]),
            Budget::default(),
        );
        assert_eq!(five.height(1).unwrap(), big(5));
        assert_eq!(*five.height_set(1).unwrap(), IntSet::new([0, 5]));
        assert_eq!(*two.height_set(3).unwrap(), IntSet::new([0, 8]));
    }

    #[test]
    fn arithmetic_spacers_agree_with_explicit() {
        let a = StageSpec::arithmetic(5, 2, 3, 7);
        let e = StageSpec::explicit([2, 5, 8, 11, 7]);
        let h = big(13);
        for c in 0..5 {
            assert_eq!(a.offset(&big(c), &h), e.offset(&big(c), &h));
        }
        assert_eq!(a.next_height(&h), e.next_height(&h));
        assert_eq!(a.height_gcd(&h), e.height_gcd(&h));
    }

    #[test]
    fn invalid_stages_rejected() {
        assert!(StageSpec::explicit([0]).validate().is_err());
        assert!(StageSpec::explicit([0, -1]).validate().is_err());
        assert!(StageSpec::arithmetic(3, -1, 0, 0).validate().is_err());
    }

    #[test]
    fn descendant_examples() {
        let spec = staircase3();
        assert_eq!(
            spec.descendant_set(0, 2, &big(0)).unwrap(),
            IntSet::new([0, 1, 3, 6, 7, 9, 13, 14, 16])
        );
        assert_eq!(
            spec.descendant_set(2, 2, &big(4)).unwrap(),
            IntSet::new([4])
        );
        let even = RankOneSpec::new(Fixed(vec![StageSpec::explicit([1, 0])]), Budget::default());
        assert_eq!(*even.height_set(0).unwrap(), IntSet::new([0, 2]));
        // b must lie inside C_i; h_0 = 1, so translate at stage 1 (h_1 = 3, H_1 = {0,4}).
        assert_eq!(
            even.descendant_set(1, 2, &big(1)).unwrap(),
            IntSet::new([1, 5])
        );
        assert!(even.descendant_set(0, 1, &big(1)).is_err());
    }

    #[test]
    fn direct_sum_detection() {
        let spec = staircase3();
        assert!(spec.is_direct_sum(0, 2).unwrap());
        assert!(spec.is_direct_sum(1, 1).unwrap());
        let collide = [IntSet::new([0, 1]), IntSet::new([0, 1])];
        assert!(!is_direct_sum_of(&collide, u64::MAX).unwrap());
        let fine = [IntSet::new([0, 1]), IntSet::new([0, 2])];
        assert!(is_direct_sum_of(&fine, u64::MAX).unwrap());
        assert!(is_direct_sum_of(&[], u64::MAX).unwrap());
    }

    #[test]
    fn descendant_budget() {
        let budget = Budget {
            max_descendants: 8,
            ..Budget::default()
        };
        let spec = RankOneSpec::new(Fixed(vec![StageSpec::explicit([0, 1, 2])]), budget);
        assert!(spec.descendant_set(0, 1, &big(0)).is_ok());
        assert!(matches!(
            spec.descendant_set(0, 2, &big(0)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn height_recurrence_invariants() {
        let spec = staircase3();
        for n in 0..5 {
            let st = spec.stage(n).unwrap();
            let h_next = spec.height(n + 1).unwrap();
            assert!(st.max_offset() + &st.height <= h_next);
            assert!(h_next >= &st.spec.r * &st.height);
            // h_n w_n grows strictly because spacers are added.
            let m_now = BigRational::from_integer(st.height.clone()) * &st.width;
            let m_next = BigRational::from_integer(h_next) * spec.width(n + 1).unwrap();
            assert!(m_next > m_now);
        }
    }
}
