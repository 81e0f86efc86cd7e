//! Browser bindings. Each export takes a builder as JSON (the `builder`
//! object of a spec file) and returns a JSON string for the page to draw.
//! The `*_json` functions are plain Rust so they can be tested natively.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rankone::analysis::alpha_type_profile;
use rankone::tower::apply_pointwise;
use rankone::{Budget, Builder, LevelSet, Point, RankOneSpec};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

// Enough for interactive use without freezing a tab.
fn budget() -> Budget {
    Budget {
        max_stage: 24,
        max_height_bits: 4096,
        max_descendants: 1 << 16,
        max_pairs: 1 << 22,
    }
}

fn load(builder: &str) -> Result<RankOneSpec, String> {
    let b: Builder = serde_json::from_str(builder).map_err(|e| e.to_string())?;
    b.into_spec(budget()).map_err(|e| e.to_string())
}

fn err(e: rankone::Error) -> String {
    e.to_string()
}

fn f64_of(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Heights, cut counts, spacer lists and the first `show` elements of each
/// height set for stages `0..stages`.
pub fn tower_layout_json(builder: &str, stages: usize, show: usize) -> Result<Value, String> {
    let spec = load(builder)?;
    let mut out = Vec::new();
    for n in 0..stages {
        let st = match spec.stage(n) {
            Ok(st) => st,
            Err(e) if out.is_empty() => return Err(err(e)),
            Err(_) => break,
        };
        let h = spec.height_set(n).map_err(err);
        let shown: Vec<String> = match &h {
            Ok(h) => h.iter().take(show).map(|x| x.to_string()).collect(),
            Err(_) => (0..show.min(st.spec.r.to_usize().unwrap_or(show)))
                .map(|c| st.offset(&BigInt::from(c)).to_string())
                .collect(),
        };
        out.push(json!({
            "n": n,
            "r": st.spec.r.to_string(),
            "h": st.height.to_string(),
            "log2_h": st.height.bits(),
            "max_descendant": st.max_descendant.to_string(),
            "height_set": shown,
            "capped_from": st.capped_from.as_ref().map(|c| c.to_string()),
        }));
    }
    Ok(json!({ "name": spec.rule().name(), "stages": out }))
}

/// Nonzero ratios `μ(B ∩ T^k B)/μ(B)` for `B` the base of `C_stage`.
pub fn alpha_profile_json(
    builder: &str,
    stage: usize,
    kmax: u64,
    threshold: &str,
) -> Result<Value, String> {
    let spec = load(builder)?;
    let threshold: BigRational = threshold
        .parse()
        .map_err(|_| format!("bad threshold {threshold:?}"))?;
    let rep = alpha_type_profile(
        &spec,
        &LevelSet::base(stage),
        &BigInt::from(kmax),
        &threshold,
    )
    .map_err(err)?;
    let points: Vec<Value> = rep
        .values
        .iter()
        .map(|e| json!([e.at.to_string(), e.value.to_string(), f64_of(&e.value)]))
        .collect();
    Ok(json!({
        "verdict": rep.verdict.as_str(),
        "exception_set": rep.note_value("exception_set"),
        "tail_sup": rep.note_value("tail_sup"),
        "points": points,
    }))
}

/// `T^i p` for `i = 0..steps`, seen in column `C_view`. `x` in `[0, 1)` picks
/// the starting point on the base of `C_view`. Points outside `C_view` (on
/// later spacers) come back with `level: null`.
pub fn orbit_json(builder: &str, view: usize, x: f64, steps: usize) -> Result<Value, String> {
    if !(0.0..1.0).contains(&x) {
        return Err(format!("x = {x} outside [0, 1)"));
    }
    let spec = load(builder)?;
    let w = spec.width(view).map_err(err)?;
    let frac = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    let mut p = Point::new(&spec, view, BigInt::zero(), &w * frac).map_err(err)?;
    let one = BigInt::from(1);
    let mut path = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let seen = if p.stage >= view {
            p.lower_to(&spec, view).map_err(err)?
        } else {
            Some(p.lift_to(&spec, view).map_err(err)?)
        };
        path.push(match seen {
            Some(q) => {
                json!({ "i": i, "level": q.height.to_string(), "x": f64_of(&(&q.offset / &w)) })
            }
            None => json!({ "i": i, "level": Value::Null, "stage": p.stage }),
        });
        if i < steps {
            p = apply_pointwise(&spec, &p, &one).map_err(err)?;
        }
    }
    Ok(json!({ "h": spec.height(view).map_err(err)?.to_string(), "path": path }))
}

fn js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tower_layout(builder: &str, stages: usize, show: usize) -> Result<String, JsValue> {
    js(tower_layout_json(builder, stages, show))
}

#[wasm_bindgen]
pub fn alpha_profile(
    builder: &str,
    stage: usize,
    kmax: u64,
    threshold: &str,
) -> Result<String, JsValue> {
    js(alpha_profile_json(builder, stage, kmax, threshold))
}

#[wasm_bindgen]
pub fn orbit(builder: &str, view: usize, x: f64, steps: usize) -> Result<String, JsValue> {
    js(orbit_json(builder, view, x, steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAIRCASE: &str = r#"{"kind": "staircase", "r": [3]}"#;

    #[test]
    fn layout_of_staircase() {
        let v = tower_layout_json(STAIRCASE, 3, 8).unwrap();
        let st = v["stages"].as_array().unwrap();
        assert_eq!(st[0]["height_set"], json!(["0", "1", "3"]));
        assert_eq!(st[1]["h"], "6");
    }

    #[test]
    fn bad_builder_is_an_error() {
        assert!(tower_layout_json(r#"{"kind": "nope"}"#, 2, 4).is_err());
        assert!(orbit_json(STAIRCASE, 0, 1.5, 3).is_err());
    }
}
