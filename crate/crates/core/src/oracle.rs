//! Slow, independent cross-checks. Nothing here shares a code path with the
//! sum-set or histogram machinery it is used to validate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg32;

use crate::column::RankOneSpec;
use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::tower::{apply_pointwise, LevelSet, Point};

/// Heights in `C_j` of the level at height `b` of `C_i`, by building every
/// column from `C_i` to `C_j` as an explicit array of levels.
pub fn brute_descendants(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    b: &BigInt,
    max_levels: usize,
) -> Result<IntSet> {
    if i > j {
        return Err(Error::Precondition(format!("descendant stages {i} > {j}")));
    }
    let too_big = |h: &BigInt| Error::budget("explicit column", h, max_levels);
    let hj = spec.height(j)?;
    if hj > BigInt::from(max_levels) {
        return Err(too_big(&hj));
    }
    let hi = spec.height(i)?.to_usize().ok_or_else(|| too_big(&hj))?;
    let b = b
        .to_usize()
        .filter(|&b| b < hi)
        .ok_or_else(|| Error::Precondition(format!("level {b} not in C_{i}")))?;
    let mut column = vec![false; hi];
    column[b] = true;
    for m in i..j {
        let st = spec.stage(m)?;
        let r = st.spec.r.to_usize().ok_or_else(|| too_big(&st.spec.r))?;
        let mut next = Vec::new();
        for c in 0..r {
            next.extend_from_slice(&column);
            let s = st
                .spec
                .spacer(&BigInt::from(c))
                .to_usize()
                .ok_or_else(|| too_big(&hj))?;
            next.resize(next.len() + s, false);
        }
        column = next;
    }
    Ok(IntSet::new(
        column
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(h, _)| h as u64),
    ))
}

/// Fraction of `a ∈ D^k` with some `d ∈ D^k`, `a_l - d_l` all equal and
/// nonzero, by looping over all `2k`-tuples.
pub fn brute_tuple_fraction(d: &IntSet, k: usize, max_work: u64) -> Result<BigRational> {
    let n = d.len();
    let work = (n as u128).checked_pow(2 * k as u32).unwrap_or(u128::MAX);
    if work > max_work as u128 {
        return Err(Error::budget("2k-tuple loop", work, max_work));
    }
    let xs = d.as_slice();
    let total = n.pow(k as u32);
    let digits = |code: usize| -> Vec<&BigInt> {
        (0..k).map(|l| &xs[(code / n.pow(l as u32)) % n]).collect()
    };
    let mut good = 0u64;
    for ca in 0..total {
        let a = digits(ca);
        let hit = (0..total).any(|cd| {
            let dd = digits(cd);
            let t = a[0] - dd[0];
            !t.is_zero() && (1..k).all(|l| a[l] - dd[l] == t)
        });
        if hit {
            good += 1;
        }
    }
    Ok(BigRational::new(good.into(), total.into()))
}

/// Fraction of k-tuples of stage decompositions `(c_i, …, c_{j-1})` that
/// agree in some coordinate.
pub fn brute_shared_coordinate_fraction(
    spec: &RankOneSpec,
    i: usize,
    j: usize,
    k: usize,
    max_work: u64,
) -> Result<BigRational> {
    let mut rs = Vec::new();
    for m in i..j {
        let r = spec
            .stage(m)?
            .spec
            .r
            .to_usize()
            .ok_or_else(|| Error::budget("cuts", "huge", max_work))?;
        rs.push(r);
    }
    let words: usize = rs.iter().product();
    let total = (words as u128).pow(k as u32);
    if total > max_work as u128 {
        return Err(Error::budget("index tuples", total, max_work));
    }
    let digit = |w: usize, pos: usize| -> usize {
        let below: usize = rs[..pos].iter().product();
        (w / below) % rs[pos]
    };
    let total = total as usize;
    let mut shared = 0u64;
    for code in 0..total {
        let tuple: Vec<usize> = (0..k)
            .map(|l| (code / words.pow(l as u32)) % words)
            .collect();
        let any =
            (0..rs.len()).any(|pos| tuple.iter().all(|&w| digit(w, pos) == digit(tuple[0], pos)));
        if any {
            shared += 1;
        }
    }
    Ok(BigRational::new(shared.into(), total.into()))
}

/// Monte Carlo estimate of `μ(B ∩ T^k B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Samples points of `B` uniformly (level uniformly, offset on a `2^-64`
/// grid), pushes each through `T^k` and counts those landing back in `B`.
/// The generator is PCG-XSH-RR 64/32 seeded with `seed`.
pub fn monte_carlo_measure(
    spec: &RankOneSpec,
    b: &LevelSet,
    k: &BigInt,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let mu = b.measure(spec)?.value().to_f64().unwrap_or(f64::NAN);
    let levels = b.heights().as_slice();
    if levels.is_empty() {
        return Ok(McEstimate {
            hits: 0,
            samples,
            estimate: 0.0,
            stderr: 0.0,
        });
    }
    let w = spec.width(b.stage())?;
    let grid = BigRational::from_integer(BigInt::from(1u8) << 64);
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let level = &levels[(rng.next_u64() % levels.len() as u64) as usize];
        let u = BigRational::from_integer(BigInt::from(rng.next_u64()));
        let p = Point::new(spec, b.stage(), level.clone(), &w * u / &grid)?;
        let q = apply_pointwise(spec, &p, k)?;
        if let Some(home) = q.lower_to(spec, b.stage())? {
            if b.heights().contains(&home.height) {
                hits += 1;
            }
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        hits,
        samples,
        estimate: mu * p,
        stderr: mu * (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

/// `T^k(p)` in one jump equals `k` single steps.
pub fn stepwise_orbit_check(spec: &RankOneSpec, p: &Point, k: i64) -> Result<bool> {
    let jump = apply_pointwise(spec, p, &BigInt::from(k))?;
    let unit = BigInt::from(k.signum());
    let mut q = p.clone();
    for _ in 0..k.unsigned_abs() {
        q = apply_pointwise(spec, &q, &unit)?;
    }
    jump.same_as(&q, spec)
}

/// A seeded uniform point of `C_stage`.
pub fn random_point(spec: &RankOneSpec, stage: usize, rng: &mut Pcg32) -> Result<Point> {
    let h = spec.height(stage)?;
    let w = spec.width(stage)?;
    let y = BigInt::from(rng.next_u64()) % &h;
    let u = BigRational::from_integer(BigInt::from(rng.next_u64()));
    let grid = BigRational::from_integer(BigInt::from(1u8) << 64);
    Point::new(spec, stage, y, w * u / grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::conservativity::{cons_fraction_of, rho_bound};
    use crate::column::Budget;
    use crate::gallery::{staircase, Builder, CutRule};
    use crate::tower::translate_intersection_measure;
    use num_traits::One;

    fn set(v: &[i64]) -> IntSet {
        IntSet::new(v.iter().copied())
    }

    #[test]
    fn unfolding_examples() {
        let s = staircase(vec![3, 3]).into_spec(Budget::default()).unwrap();
        let brute = brute_descendants(&s, 0, 2, &BigInt::from(0), 1 << 20).unwrap();
        assert_eq!(brute.len(), 9);
        assert_eq!(brute, s.descendant_set(0, 2, &BigInt::from(0)).unwrap());
        assert_eq!(
            brute_descendants(&s, 1, 1, &BigInt::from(4), 100).unwrap(),
            set(&[4])
        );
        let flat = Builder::Explicit {
            stages: vec![
                crate::gallery::ExplicitStage {
                    spacers: vec![0, 0],
                },
                crate::gallery::ExplicitStage {
                    spacers: vec![0, 1],
                },
            ],
        }
        .into_spec(Budget::default())
        .unwrap();
        assert_eq!(
            brute_descendants(&flat, 0, 1, &BigInt::from(0), 100).unwrap(),
            set(&[0, 1])
        );
        assert!(brute_descendants(&s, 0, 5, &BigInt::from(0), 10).is_err());
    }

    #[test]
    fn tuple_examples() {
        assert_eq!(
            brute_tuple_fraction(&set(&[0]), 2, 100).unwrap(),
            BigRational::zero()
        );
        assert_eq!(
            brute_tuple_fraction(&set(&[0, 1]), 2, 100).unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        let d = set(&[0, 1, 3]);
        assert_eq!(
            brute_tuple_fraction(&d, 2, 1000).unwrap(),
            cons_fraction_of(&d, 2, 1000).unwrap()
        );
    }

    #[test]
    fn shared_coordinates_match_rho() {
        let s = staircase(vec![2, 3, 2])
            .into_spec(Budget::default())
            .unwrap();
        for k in [2usize, 3] {
            let brute = brute_shared_coordinate_fraction(&s, 0, 3, k, 1 << 22).unwrap();
            assert_eq!(
                brute,
                BigRational::one() - rho_bound(&s, 0, 3, k as u32).unwrap()
            );
        }
    }

    #[test]
    fn mc_examples() {
        let s = staircase(vec![3]).into_spec(Budget::default()).unwrap();
        let b = LevelSet::base(0);
        let z = monte_carlo_measure(&s, &b, &BigInt::from(0), 1000, 1).unwrap();
        assert_eq!(z.estimate, 1.0);
        assert_eq!(z.stderr, 0.0);
        let exact = translate_intersection_measure(&s, &b, &BigInt::from(2)).unwrap();
        assert_eq!(exact.value(), &BigRational::new(1.into(), 3.into()));
        let est = monte_carlo_measure(&s, &b, &BigInt::from(2), 20_000, 7).unwrap();
        assert!((est.estimate - 1.0 / 3.0).abs() <= 3.0 * est.stderr + 1e-12);
        // same seed, same answer
        assert_eq!(
            est,
            monte_carlo_measure(&s, &b, &BigInt::from(2), 20_000, 7).unwrap()
        );
        let k = Builder::Koopman {}.into_spec(Budget::default()).unwrap();
        let odd = monte_carlo_measure(&k, &b, &BigInt::from(5), 2000, 3).unwrap();
        assert_eq!(odd.hits, 0);
    }

    #[test]
    fn orbit_examples() {
        let s = RankOneSpec::new(
            Builder::Staircase {
                r: CutRule::List(vec![3]),
            },
            Budget::default(),
        );
        let mut rng = Pcg32::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_point(&s, 1, &mut rng).unwrap();
            for k in [0, 7, -5, 23, -23] {
                assert!(stepwise_orbit_check(&s, &p, k).unwrap());
            }
        }
    }
}
