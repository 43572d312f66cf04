//! Coefficient cache file.
//!
//! ```json
//! {
//!   "format": "bfield-pt-coeffs",
//!   "version": 1,
//!   "state": "1s0",
//!   "order": 2,
//!   "epsilon": ["-1", "1/2", "-53/96"],
//!   "phi": [[[0, 1, "1"]], [[2, 1, "1/24"], [2, 0, "1/16"], [0, 2, "1/24"]]]
//! }
//! ```
//!
//! `phi[n]` lists `[s-exponent, t-exponent, "p/q"]` triples of `Φₙ`; it may
//! be shorter than `epsilon` when corrections were only built to lower order.

use super::{parse_rational, PhasePolynomial, PtSeries};
use crate::error::{Error, Result};
use crate::units::StateLabel;
use serde_json::{json, Value};
use std::path::Path;

pub const FORMAT_VERSION: u64 = 1;
const FORMAT_TAG: &str = "bfield-pt-coeffs";

pub fn to_json(series: &PtSeries) -> Value {
    let eps: Vec<String> = series.epsilons.iter().map(|e| e.to_string()).collect();
    let phi: Vec<Value> = series
        .corrections
        .iter()
        .map(|p| Value::Array(p.terms.iter().map(|(&(i, j), c)| json!([i, j, c.to_string()])).collect()))
        .collect();
    json!({
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "state": series.state.name(),
        "order": series.order(),
        "epsilon": eps,
        "phi": phi,
    })
}

pub fn from_json(v: &Value) -> Result<PtSeries> {
    let obj = v.as_object().ok_or_else(|| parse_err("top level", "expected an object"))?;
    let state = match obj.get("state") {
        Some(s) => s
            .as_str()
            .ok_or_else(|| parse_err("state", "expected a string"))?
            .parse::<StateLabel>()
            .map_err(|e| parse_err("state", &e.to_string()))?,
        None => {
            return Err(Error::Schema(format!(
                "file has no `state` field (pre-versioned layout); this reader requires format version {FORMAT_VERSION}"
            )))
        }
    };
    match obj.get("version").and_then(Value::as_u64) {
        Some(FORMAT_VERSION) => {}
        Some(other) => {
            return Err(Error::Schema(format!("format version {other} is not supported (expected {FORMAT_VERSION})")))
        }
        None => return Err(Error::Schema("missing `version` field".into())),
    }
    let eps_arr = obj
        .get("epsilon")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("epsilon", "expected an array of strings"))?;
    let mut epsilons = Vec::with_capacity(eps_arr.len());
    for (i, e) in eps_arr.iter().enumerate() {
        let loc = format!("epsilon[{i}]");
        let s = e.as_str().ok_or_else(|| parse_err(&loc, "expected a string"))?;
        epsilons.push(parse_rational(s).ok_or_else(|| parse_err(&loc, &format!("not a rational: '{s}'")))?);
    }
    if let Some(order) = obj.get("order").and_then(Value::as_u64) {
        if order as usize + 1 != epsilons.len() {
            return Err(parse_err("order", &format!("order {order} but {} epsilon entries", epsilons.len())));
        }
    }
    let mut corrections = Vec::new();
    if let Some(phi) = obj.get("phi") {
        let arr = phi.as_array().ok_or_else(|| parse_err("phi", "expected an array"))?;
        for (n, p) in arr.iter().enumerate() {
            let terms = p.as_array().ok_or_else(|| parse_err(&format!("phi[{n}]"), "expected an array"))?;
            let mut poly = PhasePolynomial::default();
            for (k, t) in terms.iter().enumerate() {
                let loc = format!("phi[{n}][{k}]");
                let tri = t.as_array().filter(|a| a.len() == 3).ok_or_else(|| parse_err(&loc, "expected [i, j, \"p/q\"]"))?;
                let i = tri[0].as_u64().ok_or_else(|| parse_err(&loc, "s-exponent must be a non-negative integer"))?;
                let j = tri[1].as_u64().ok_or_else(|| parse_err(&loc, "t-exponent must be a non-negative integer"))?;
                if i % 2 == 1 {
                    return Err(parse_err(&loc, "odd s-exponent"));
                }
                let s = tri[2].as_str().ok_or_else(|| parse_err(&loc, "coefficient must be a string"))?;
                let c = parse_rational(s).ok_or_else(|| parse_err(&loc, &format!("not a rational: '{s}'")))?;
                poly.terms.insert((i as u32, j as u32), c);
            }
            corrections.push(poly);
        }
    }
    if corrections.len() > epsilons.len() {
        return Err(parse_err("phi", "more corrections than energies"));
    }
    Ok(PtSeries { state, epsilons, corrections })
}

fn parse_err(location: &str, message: &str) -> Error {
    Error::Parse { location: location.to_string(), message: message.to_string() }
}

pub fn export_coeffs(series: &PtSeries, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_json(series)).map_err(|e| Error::Internal(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn import_coeffs(path: &Path) -> Result<PtSeries> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    from_json(&v)
}

/// The checked-in coefficient caches (`N = 100`) for both states.
pub fn bundled_coeffs(state: StateLabel) -> Result<PtSeries> {
    let text = match (state.m, state.p) {
        (0, 0) => include_str!("../../data/pt_1s0_100.json"),
        (0, 1) => include_str!("../../data/pt_2p0_100.json"),
        _ => return Err(Error::Unsupported(format!("no bundled coefficients for {}", state.name()))),
    };
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse { location: "bundled".into(), message: e.to_string() })?;
    from_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rb_pt::run;

    #[test]
    fn json_roundtrip() {
        let s = run(StateLabel::GROUND, 6).unwrap();
        let back = from_json(&to_json(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_token() {
        let v = json!({"version": 1, "state": "1s0", "epsilon": ["-1", "1/2x"]});
        match from_json(&v) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "epsilon[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_legacy_layout() {
        let v = json!({"order": 1, "epsilon": ["-1", "1/2"]});
        assert!(matches!(from_json(&v), Err(Error::Schema(m)) if m.contains("version")));
    }
}
