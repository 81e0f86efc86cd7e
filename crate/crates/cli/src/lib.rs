//! `rankone` command-line front end: spec files in, exact reports out.

pub mod output;
pub mod spec_file;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg32;
use rankone::analysis::{self, counting};
use rankone::oracle;
use rankone::tower::{intersection_measure, translate_intersection_measure};
use rankone::{IntSet, LevelSet, RankOneSpec};
use serde_json::Value;

use output::{int, rat, Doc, Format};
use spec_file::{BudgetOverrides, SpecFile};

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Schema(String),
    Budget(String),
    Precondition(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Schema(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Precondition(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (tag, m) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Schema(m) => ("schema", m),
            CliError::Budget(m) => ("budget", m),
            CliError::Precondition(m) => ("precondition", m),
            CliError::Io(m) => ("io", m),
        };
        write!(f, "{tag} error: {m}")
    }
}

impl From<rankone::Error> for CliError {
    fn from(e: rankone::Error) -> Self {
        use rankone::Error as E;
        match e {
            E::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            E::InvalidParameter(_) => CliError::Usage(e.to_string()),
            E::Precondition(_) | E::NotDirectSum { .. } | E::NotStronglyArithmetic(_) => {
                CliError::Precondition(e.to_string())
            }
        }
    }
}

type Res<T> = Result<T, CliError>;

fn parse_big(s: &str) -> Result<BigInt, String> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|e| format!("{s:?}: {e}"))
}

/// `p/q`, an integer, or a finite decimal, all read exactly.
fn parse_rat(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (parse_big(p)?, parse_big(q)?);
        if q.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let digits = format!("{whole}{frac}");
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(BigRational::new(parse_big(&digits)?, scale));
    }
    Ok(BigRational::from_integer(parse_big(s)?))
}

fn parse_levels(s: &str) -> Result<IntSet, String> {
    s.split(',')
        .map(parse_big)
        .collect::<Result<Vec<_>, _>>()
        .map(IntSet::new)
}

#[derive(Parser, Debug)]
#[command(
    name = "rankone",
    version,
    about = "Exact rank-one cutting-and-stacking reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Spec file (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true)]
    pub max_stage: Option<usize>,
    #[arg(long, global = true)]
    pub max_descendants: Option<u64>,
    #[arg(long, global = true)]
    pub max_pairs: Option<u64>,
    #[arg(long, global = true)]
    pub max_height_bits: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-stage table: r_n, h_n, |H_n|, max D(I,n).
    Describe {
        #[arg(short = 'n', long = "stage", default_value_t = 6)]
        stages: usize,
    },
    /// The height set H_n.
    Heights {
        #[arg(short = 'n', long)]
        stage: usize,
    },
    /// D(I, j) for I the level at height b of C_i.
    Descendants {
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(short = 'n', long)]
        stage: usize,
        #[arg(long, value_parser = parse_big, default_value = "0")]
        b: BigInt,
    },
    /// μ(T^k A ∩ B) for unions of levels A (and B, default A).
    Measure {
        #[arg(short = 'n', long)]
        stage: usize,
        #[arg(long, value_parser = parse_levels, default_value = "0")]
        levels: IntSet,
        #[arg(long, value_parser = parse_big, allow_hyphen_values = true)]
        k: BigInt,
        #[arg(long)]
        stage_b: Option<usize>,
        #[arg(long, value_parser = parse_levels)]
        levels_b: Option<IntSet>,
    },
    /// Partial products of Π(1 - 1/r_n^{k-1}) against a threshold.
    CheckCons {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(short = 'n', long = "stage", default_value_t = 40)]
        horizon: usize,
        #[arg(long, value_parser = parse_rat, default_value = "1/1000")]
        threshold: BigRational,
    },
    /// Spread-tuple witness product for staircase-shaped specs.
    CheckNoncons {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(short = 'n', long = "stage", default_value_t = 10)]
        horizon: usize,
        #[arg(long, value_parser = parse_rat, default_value = "1/2")]
        threshold: BigRational,
    },
    /// Fraction of pairs of D(I,n) with a complement for offset b.
    CheckNonerg {
        #[arg(long, value_parser = parse_big, default_value = "1", allow_hyphen_values = true)]
        b: BigInt,
        #[arg(short = 'n', long = "stage", default_value_t = 8)]
        horizon: usize,
        #[arg(long)]
        a_ne_d: bool,
    },
    /// Best rigidity shift of H_n, or the ratio at a given shift.
    Rigidity {
        #[arg(short = 'n', long)]
        stage: usize,
        #[arg(long, value_parser = parse_big)]
        a: Option<BigInt>,
    },
    /// Exact μ(B ∩ T^k B)/μ(B) for 1 ≤ k ≤ kmax.
    Alpha {
        #[arg(short = 'n', long, default_value_t = 0)]
        stage: usize,
        #[arg(long, value_parser = parse_levels, default_value = "0")]
        levels: IntSet,
        #[arg(long, value_parser = parse_big)]
        kmax: BigInt,
        #[arg(long, value_parser = parse_rat, default_value = "1/2")]
        threshold: BigRational,
    },
    /// Staircase subsets per stage and the arithmetic verdict.
    Arithmetic {
        #[arg(short = 'n', long = "stage", default_value_t = 8)]
        horizon: usize,
        #[arg(long, value_parser = parse_rat, default_value = "1/2")]
        tau: BigRational,
    },
    /// gcd of all height-set elements.
    Divisibility {
        #[arg(short = 'n', long = "stage", default_value_t = 8)]
        horizon: usize,
    },
    /// Smallest n ≤ kmax with μ(A ∩ T^{-n}A) > 0 and μ(B ∩ T^{-n}A) > 0.
    Wde {
        #[arg(short = 'n', long)]
        stage: usize,
        #[arg(long, value_parser = parse_big)]
        level_a: BigInt,
        #[arg(long, value_parser = parse_big)]
        level_b: BigInt,
        #[arg(long, value_parser = parse_big)]
        kmax: BigInt,
    },
    /// Decay μ(B ∩ T^k B)/μ(B) < 2/n(k) on sampled k in [h_n, h_{n+1}).
    Koopman {
        #[arg(short = 'n', long = "stage", default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        stage_b: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Brute-force and stochastic cross-checks.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Closed-form pair counts next to a brute-force count.
    Counts {
        #[arg(long, value_parser = parse_big)]
        r: BigInt,
        #[arg(long, value_parser = parse_big)]
        m: BigInt,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Unfolded columns against the sum-set descendants.
    Descendants {
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(short = 'n', long)]
        stage: usize,
        #[arg(long, value_parser = parse_big, default_value = "0")]
        b: BigInt,
    },
    /// 2k-tuple loop against the exact complement fraction.
    Tuples {
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(short = 'n', long)]
        stage: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Monte Carlo estimate of μ(B ∩ T^k B) next to the exact value.
    Mc {
        #[arg(short = 'n', long, default_value_t = 0)]
        stage: usize,
        #[arg(long, value_parser = parse_levels, default_value = "0")]
        levels: IntSet,
        #[arg(long, value_parser = parse_big, allow_hyphen_values = true)]
        k: BigInt,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One jump against repeated single steps on seeded points.
    Orbit {
        #[arg(short = 'n', long, default_value_t = 1)]
        stage: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 50)]
        kmax: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Ctx {
    file: SpecFile,
    spec: RankOneSpec,
}

impl Ctx {
    fn doc(&self, command: &str) -> Doc {
        let mut d = Doc::new(command);
        d.set("spec_name", self.file.name.as_str());
        d.set("spec_hash", self.file.hash());
        d.set("builder", self.file.builder.kind());
        d.set("caps", Value::from(self.file.builder.caps()));
        let b = self.spec.budget();
        d.set(
            "budget",
            serde_json::json!({
                "max_stage": b.max_stage,
                "max_descendants": b.max_descendants,
                "max_pairs": b.max_pairs,
                "max_height_bits": b.max_height_bits,
            }),
        );
        d
    }

    fn capped_note(&self, d: &mut Doc, upto: usize) -> Res<()> {
        let mut capped = Vec::new();
        for n in 0..upto {
            if let Some(c) = &self.spec.stage(n)?.capped_from {
                capped.push(Value::from(format!("{n}:{c}")));
            }
        }
        d.set("capped_stages", Value::Array(capped));
        Ok(())
    }
}

/// Runs one parsed command and renders its report.
pub fn execute(cli: &Cli) -> Res<String> {
    let overrides = BudgetOverrides {
        max_stage: cli.max_stage,
        max_descendants: cli.max_descendants,
        max_pairs: cli.max_pairs,
        max_height_bits: cli.max_height_bits,
    };
    if let Command::Counts { r, m } = &cli.command {
        return Ok(counts(r, m)?.render(cli.format));
    }
    let path = cli
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Usage("--spec is required".into()))?;
    let file = SpecFile::load(path)?;
    let spec = file.build(&overrides)?;
    let ctx = Ctx { file, spec };
    let doc = dispatch(&ctx, &cli.command)?;
    Ok(doc.render(cli.format))
}

fn dispatch(ctx: &Ctx, command: &Command) -> Res<Doc> {
    let spec = &ctx.spec;
    match command {
        Command::Describe { stages } => {
            let mut d = ctx.doc("describe");
            d.set("rule", spec.rule().name());
            d.set(
                "properties",
                Value::from(
                    spec.rule()
                        .properties()
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>(),
                ),
            );
            d.columns(&[
                "n",
                "r_n",
                "h_n",
                "height_set_size",
                "max_descendant",
                "capped_from",
            ]);
            for n in 0..*stages {
                let st = spec.stage(n)?;
                d.row(vec![
                    n.to_string(),
                    int(&st.spec.r),
                    int(&st.height),
                    int(&st.spec.r),
                    int(&st.max_descendant),
                    st.capped_from.as_ref().map(int).unwrap_or_default(),
                ]);
            }
            d.set("horizon", *stages);
            Ok(d)
        }
        Command::Heights { stage } => {
            let mut d = ctx.doc("heights");
            let st = spec.stage(*stage)?;
            d.set("stage", *stage);
            d.set("h_n", int(&st.height));
            d.set("horizon", *stage);
            d.columns(&["index", "element"]);
            for (i, x) in spec.height_set(*stage)?.iter().enumerate() {
                d.row(vec![i.to_string(), int(x)]);
            }
            Ok(d)
        }
        Command::Descendants { from, stage, b } => {
            let mut d = ctx.doc("descendants");
            let set = spec.descendant_set(*from, *stage, b)?;
            d.set("from", *from);
            d.set("stage", *stage);
            d.set("b", int(b));
            d.set("horizon", *stage);
            d.set("size", set.len());
            d.set("direct_sum", spec.is_direct_sum(*from, *stage)?);
            d.columns(&["height"]);
            for x in set.iter() {
                d.row(vec![int(x)]);
            }
            Ok(d)
        }
        Command::Measure {
            stage,
            levels,
            k,
            stage_b,
            levels_b,
        } => {
            let a = LevelSet::new(spec, *stage, levels.clone())?;
            let b = match (stage_b, levels_b) {
                (None, None) => a.clone(),
                (s, l) => LevelSet::new(
                    spec,
                    s.unwrap_or(*stage),
                    l.clone().unwrap_or_else(|| levels.clone()),
                )?,
            };
            let m = if a == b {
                translate_intersection_measure(spec, &a, k)?
            } else {
                intersection_measure(spec, &a, &b, k)?
            };
            let mut d = ctx.doc("measure");
            d.set("k", int(k));
            d.set("horizon", int(k));
            d.set("measure_a", rat(a.measure(spec)?.value()));
            d.set("measure_b", rat(b.measure(spec)?.value()));
            d.set("measure", rat(m.value()));
            d.set("ratio_to_a", rat(&m.ratio(&a.measure(spec)?)));
            Ok(d)
        }
        Command::CheckCons {
            k,
            horizon,
            threshold,
        } => {
            let rep = analysis::conservativity_sufficient(spec, *k, *horizon, threshold)?;
            let mut d = ctx.doc("check-cons");
            d.certificate(&rep);
            ctx.capped_note(&mut d, *horizon)?;
            Ok(d)
        }
        Command::CheckNoncons {
            k,
            horizon,
            threshold,
        } => {
            let rep = analysis::nonconservativity_check(spec, *k, *horizon, threshold)?;
            let mut d = ctx.doc("check-noncons");
            d.certificate(&rep);
            Ok(d)
        }
        Command::CheckNonerg { b, horizon, a_ne_d } => {
            let rep = analysis::nonergodicity_certificate(spec, b, *horizon, *a_ne_d)?;
            let mut d = ctx.doc("check-nonerg");
            d.certificate(&rep);
            ctx.capped_note(&mut d, *horizon)?;
            Ok(d)
        }
        Command::Rigidity { stage, a } => {
            let mut d = ctx.doc("rigidity");
            d.set("stage", *stage);
            d.set("horizon", *stage);
            match a {
                Some(a) => {
                    let h = spec.height_set(*stage)?;
                    let r = analysis::rigidity_ratio(&h, a)?;
                    d.set("a", int(a));
                    d.set("ratio", rat(&r));
                }
                None => {
                    let (a, r) = analysis::rigidity_scan(spec, *stage)?;
                    d.set("a_star", int(&a));
                    d.set("ratio", rat(&r));
                }
            }
            Ok(d)
        }
        Command::Alpha {
            stage,
            levels,
            kmax,
            threshold,
        } => {
            let b = LevelSet::new(spec, *stage, levels.clone())?;
            let rep = analysis::alpha_type_profile(spec, &b, kmax, threshold)?;
            let mut d = ctx.doc("alpha");
            d.certificate(&rep);
            d.set("ratio_at_0", "1/1");
            d.set("omitted_rows", "k with ratio 0/1");
            Ok(d)
        }
        Command::Arithmetic { horizon, tau } => {
            let rep = analysis::arithmetic_report(spec, *horizon, tau)?;
            let mut d = ctx.doc("arithmetic");
            d.certificate(&rep);
            Ok(d)
        }
        Command::Divisibility { horizon } => {
            let (g, rep) = analysis::divisibility_gcd(spec, *horizon)?;
            let mut d = ctx.doc("divisibility");
            d.certificate(&rep);
            d.set("gcd", int(&g));
            Ok(d)
        }
        Command::Wde {
            stage,
            level_a,
            level_b,
            kmax,
        } => {
            let a = LevelSet::new(spec, *stage, IntSet::singleton(level_a.clone()))?;
            let b = LevelSet::new(spec, *stage, IntSet::singleton(level_b.clone()))?;
            let n = analysis::wde_probe(spec, &a, &b, kmax)?;
            let mut d = ctx.doc("wde");
            d.set("horizon", int(kmax));
            d.set(
                "n",
                n.as_ref().map(int).map(Value::from).unwrap_or(Value::Null),
            );
            d.set("found", n.is_some());
            Ok(d)
        }
        Command::Koopman {
            window,
            stage_b,
            samples,
            seed,
        } => {
            let lo = spec.height(*window)?;
            let hi = spec.height(*window + 1)?;
            let mut rng = Pcg32::seed_from_u64(*seed);
            let span = &hi - &lo;
            let mut ks: Vec<BigInt> = (0..*samples)
                .map(|_| &lo + BigInt::from(rng.next_u64()) % &span)
                .collect();
            ks.sort();
            let rep = analysis::koopman_decay_check(spec, &LevelSet::base(*stage_b), &ks)?;
            let mut d = ctx.doc("koopman");
            d.certificate(&rep);
            d.set("seed", *seed);
            Ok(d)
        }
        Command::Oracle { which } => oracle_cmd(ctx, which),
        Command::Counts { .. } => unreachable!("handled before loading a spec"),
    }
}

fn oracle_cmd(ctx: &Ctx, which: &OracleCommand) -> Res<Doc> {
    let spec = &ctx.spec;
    match which {
        OracleCommand::Descendants { from, stage, b } => {
            let fast = spec.descendant_set(*from, *stage, b)?;
            let slow = oracle::brute_descendants(
                spec,
                *from,
                *stage,
                b,
                spec.budget().max_descendants as usize,
            )?;
            let mut d = ctx.doc("oracle descendants");
            d.set("horizon", *stage);
            d.set("size", fast.len());
            d.set("agree", fast == slow);
            Ok(d)
        }
        OracleCommand::Tuples { from, stage, k } => {
            let set = spec.descendant_set(*from, *stage, &BigInt::zero())?;
            let exact = analysis::cons_fraction_of(&set, *k, spec.budget().max_pairs)?;
            let brute = oracle::brute_tuple_fraction(&set, *k as usize, 100_000_000)?;
            let mut d = ctx.doc("oracle tuples");
            d.set("horizon", *stage);
            d.set("exact", rat(&exact));
            d.set("brute", rat(&brute));
            d.set("agree", exact == brute);
            Ok(d)
        }
        OracleCommand::Mc {
            stage,
            levels,
            k,
            samples,
            seed,
        } => {
            let b = LevelSet::new(spec, *stage, levels.clone())?;
            let est = oracle::monte_carlo_measure(spec, &b, k, *samples, *seed)?;
            let exact = translate_intersection_measure(spec, &b, k)?;
            let exact_f = exact.value().to_f64().unwrap_or(f64::NAN);
            let mut d = ctx.doc("oracle mc");
            d.set("horizon", int(k));
            d.set("seed", *seed);
            d.set("samples", *samples);
            d.set("hits", est.hits);
            d.set("estimate", format!("{:.12e}", est.estimate));
            d.set("stderr", format!("{:.12e}", est.stderr));
            d.set("exact", rat(exact.value()));
            d.set(
                "within_3_sigma",
                (est.estimate - exact_f).abs() <= 3.0 * est.stderr + 1e-15,
            );
            Ok(d)
        }
        OracleCommand::Orbit {
            stage,
            points,
            kmax,
            seed,
        } => {
            let mut rng = Pcg32::seed_from_u64(*seed);
            let mut failures = 0usize;
            let span = 2 * *kmax as u64 + 1;
            for _ in 0..*points {
                let p = oracle::random_point(spec, *stage, &mut rng)?;
                let k = (rng.next_u64() % span) as i64 - kmax;
                if !oracle::stepwise_orbit_check(spec, &p, k)? {
                    failures += 1;
                }
            }
            let mut d = ctx.doc("oracle orbit");
            d.set("horizon", *kmax);
            d.set("seed", *seed);
            d.set("points", *points);
            d.set("failures", failures);
            d.set("pass", failures == 0);
            Ok(d)
        }
    }
}

fn counts(r: &BigInt, m: &BigInt) -> Res<Doc> {
    let exact = counting::gap_pair_count(r, m)?;
    let printed = counting::printed_gap_pair_count(r, m);
    let mut d = Doc::new("counts");
    d.set("r", int(r));
    d.set("m", int(m));
    d.set("gap_pair_count", int(&exact));
    d.set("printed_formula", int(&printed));
    d.set(
        "note",
        "printed formula 2mr-m^2-m-r+1 undercounts pairs with |a-d| < m; exact count is r^2-(r-m)(r-m+1)",
    );
    if let Some(ri) = r.to_i64().filter(|&x| x <= 2000) {
        let mi = m.to_i64().unwrap_or(0);
        let brute = (1..=ri)
            .flat_map(|a| (1..=ri).map(move |d| (a, d)))
            .filter(|(a, d)| (a - d).abs() < mi)
            .count();
        d.set("brute_force", brute);
    }
    Ok(d)
}

/// Entry point shared by the binary and tests: exit code plus stdout text.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => return (e.exit_code(), e.to_string()),
    };
    match execute(&cli) {
        Ok(out) => (0, out),
        Err(e) => (e.exit_code(), format!("{e}\n")),
    }
}
