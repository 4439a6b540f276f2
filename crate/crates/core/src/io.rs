//! JSON file formats. Every float is written with 17 significant digits so a
//! write/read round trip is bit-exact.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Number, Value};

use crate::error::{Error, Result};
use crate::game_core::{Game, JointDistribution};
use crate::matkit::Matrix;
use crate::quantum_state::{DensityState, PureState};

/// `x` as a JSON number with 17 significant digits.
pub fn number(x: f64) -> Result<Value> {
    if !x.is_finite() {
        return Err(Error::Format(format!("{x} has no JSON representation")));
    }
    let n: Number = format!("{x:.16e}")
        .parse()
        .map_err(|e: serde_json::Error| Error::Format(e.to_string()))?;
    Ok(Value::Number(n))
}

/// Rewrites every non-integer number in `v` to 17 significant digits.
pub fn canonicalize(v: Value) -> Result<Value> {
    Ok(match v {
        Value::Number(n) if n.is_f64() => number(n.as_f64().unwrap_or(f64::NAN))?,
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect::<Result<_>>()?),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, v)| canonicalize(v).map(|v| (k, v)))
                .collect::<Result<Map<_, _>>>()?,
        ),
        other => other,
    })
}

/// Pretty JSON of any report, floats canonicalized.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = canonicalize(serde_json::to_value(value)?)?;
    Ok(serde_json::to_string_pretty(&v)?)
}

fn parse(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Format(format!("missing field `{key}`")))
}

fn as_f64(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Format(format!("expected a number, got {v}")))
}

fn as_usize_list(v: &Value) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| Error::Format("expected an array of integers".into()))?
        .iter()
        .map(|x| {
            x.as_u64()
                .and_then(|u| usize::try_from(u).ok())
                .ok_or_else(|| Error::Format(format!("expected a nonnegative integer, got {x}")))
        })
        .collect()
}

fn as_f64_list(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Format("expected an array of numbers".into()))?
        .iter()
        .map(as_f64)
        .collect()
}

fn nest(flat: &[f64], shape: &[usize]) -> Result<Value> {
    match shape {
        [] => number(flat[0]),
        [n, rest @ ..] => {
            let block = flat.len() / n;
            Ok(Value::Array(
                (0..*n)
                    .map(|k| nest(&flat[k * block..(k + 1) * block], rest))
                    .collect::<Result<_>>()?,
            ))
        }
    }
}

fn flatten(v: &Value, shape: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match shape {
        [] => out.push(as_f64(v)?),
        [n, rest @ ..] => {
            let a = v
                .as_array()
                .filter(|a| a.len() == *n)
                .ok_or_else(|| Error::Format(format!("expected an array of length {n}")))?;
            for x in a {
                flatten(x, rest, out)?;
            }
        }
    }
    Ok(())
}

/// `{players, strategyCounts, utilities, normalized}`; `utilities[i]` is
/// player `i`'s payoff tensor as nested arrays indexed by `s_1, …, s_k`.
pub fn game_to_value(g: &Game) -> Result<Value> {
    let utilities = (0..g.players())
        .map(|i| nest(g.utilities(i), g.strategy_counts()))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "players": g.players(),
        "strategyCounts": g.strategy_counts(),
        "utilities": utilities,
        "normalized": g.is_normalized(),
    }))
}

pub fn game_to_json(g: &Game) -> Result<String> {
    Ok(serde_json::to_string_pretty(&game_to_value(g)?)?)
}

pub fn game_from_json(text: &str) -> Result<Game> {
    let v = parse(text)?;
    let counts = as_usize_list(field(&v, "strategyCounts")?)?;
    if let Some(k) = v.get("players").and_then(Value::as_u64) {
        if k as usize != counts.len() {
            return Err(Error::Format(format!(
                "players = {k} but {} strategy counts",
                counts.len()
            )));
        }
    }
    let us = field(&v, "utilities")?
        .as_array()
        .ok_or_else(|| Error::Format("`utilities` must be an array".into()))?;
    let utilities = us
        .iter()
        .map(|u| {
            let mut flat = Vec::new();
            flatten(u, &counts, &mut flat)?;
            Ok(flat)
        })
        .collect::<Result<Vec<_>>>()?;
    let g = Game::new(counts, utilities)?;
    if v.get("normalized").and_then(Value::as_bool) == Some(true) && !g.is_normalized() {
        return Err(Error::Format("marked normalized but payoffs leave [0, 1]".into()));
    }
    Ok(g)
}

/// `{shape, probabilities}` with probabilities flattened row-major.
pub fn distribution_to_value(p: &JointDistribution) -> Result<Value> {
    Ok(json!({
        "shape": p.shape(),
        "probabilities": p.probabilities().iter().map(|&x| number(x)).collect::<Result<Vec<_>>>()?,
    }))
}

pub fn distribution_to_json(p: &JointDistribution) -> Result<String> {
    Ok(serde_json::to_string_pretty(&distribution_to_value(p)?)?)
}

pub fn distribution_from_json(text: &str) -> Result<JointDistribution> {
    let v = parse(text)?;
    JointDistribution::new(
        as_usize_list(field(&v, "shape")?)?,
        as_f64_list(field(&v, "probabilities")?)?,
    )
}

/// A quantum state read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Pure(PureState),
    Density(DensityState),
}

impl StateInput {
    pub fn dims(&self) -> &[usize] {
        match self {
            StateInput::Pure(p) => p.dims(),
            StateInput::Density(d) => d.dims(),
        }
    }
}

fn complex_list(zs: &[Complex64]) -> Result<Value> {
    Ok(Value::Array(
        zs.iter()
            .map(|z| Ok(Value::Array(vec![number(z.re)?, number(z.im)?])))
            .collect::<Result<_>>()?,
    ))
}

/// `{dims, kind: "pure", entries}`: amplitudes as `[re, im]` pairs.
pub fn pure_to_json(psi: &PureState) -> Result<String> {
    let v = json!({"dims": psi.dims(), "kind": "pure", "entries": complex_list(psi.amplitudes())?});
    Ok(serde_json::to_string_pretty(&v)?)
}

/// `{dims, kind: "density", entries}`: the matrix row-major as `[re, im]` pairs.
pub fn density_to_json(rho: &DensityState) -> Result<String> {
    let v = json!({"dims": rho.dims(), "kind": "density", "entries": complex_list(rho.matrix().data())?});
    Ok(serde_json::to_string_pretty(&v)?)
}

/// Reads either state kind. Without `kind`, the entry count decides.
pub fn state_from_json(text: &str) -> Result<StateInput> {
    let v = parse(text)?;
    let dims = as_usize_list(field(&v, "dims")?)?;
    let entries = field(&v, "entries")?
        .as_array()
        .ok_or_else(|| Error::Format("`entries` must be an array".into()))?
        .iter()
        .map(|e| match e.as_array().map(Vec::as_slice) {
            Some([re, im]) => Ok(Complex64::new(as_f64(re)?, as_f64(im)?)),
            _ => Err(Error::Format(format!("expected [re, im], got {e}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("dimension overflow".into()))?;
    let kind = v.get("kind").and_then(Value::as_str);
    match kind {
        Some("pure") => Ok(StateInput::Pure(PureState::new(dims, entries)?)),
        Some("density") => Ok(StateInput::Density(DensityState::new(
            dims,
            Matrix::from_vec(n, n, entries)?,
        )?)),
        None if entries.len() == n => Ok(StateInput::Pure(PureState::new(dims, entries)?)),
        None => Ok(StateInput::Density(DensityState::new(
            dims,
            Matrix::from_vec(n, n, entries)?,
        )?)),
        Some(k) => Err(Error::Format(format!("unknown state kind `{k}`"))),
    }
}
