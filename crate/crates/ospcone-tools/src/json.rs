//! Canonical JSON encodings. Object keys are sorted (serde_json's default map is ordered).

use ospcone_core::flags::{Component, FlagCase, FlagKind, IsotropicFlag, ResolutionPoint, Side, StepRecord, StepRule};
use ospcone_core::osp::{make_space, OddElement, OspSpace};
use ospcone_core::section::{Section, SectionChecks};
use ospcone_core::weights::{BoundReport, Weight};
use ospcone_core::{Error, GaussianRational, Mat};
use serde_json::{json, Map, Value};

pub fn to_canonical(v: &Value) -> String {
    serde_json::to_string(v).expect("values built here always serialize")
}

pub fn parse(text: &str) -> Result<Value, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn vector_json(v: &[GaussianRational]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn matrix_json(m: &Mat) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vector_json(r)).collect())
}

fn scalar_from(v: &Value) -> Result<GaussianRational, Error> {
    match v {
        Value::String(s) => s.parse().map_err(|e: ospcone_core::scalar::ParseScalarError| Error::Parse(e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(GaussianRational::from_int(n.as_i64().unwrap())),
        other => Err(Error::Parse(format!("matrix entry {other} is not an exact scalar"))),
    }
}

fn vector_from(v: &Value) -> Result<Vec<GaussianRational>, Error> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of entries".into()))?
        .iter()
        .map(scalar_from)
        .collect()
}

pub fn matrix_from(v: &Value) -> Result<Mat, Error> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let rows: Vec<Vec<GaussianRational>> = rows.iter().map(vector_from).collect::<Result<_, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("matrix rows must be nonempty and of equal length".into()));
    }
    Ok(Mat::from_rows(&rows))
}

pub fn element_json(x: &OddElement) -> Value {
    json!({"m": x.space.m, "n": x.space.n, "A": matrix_json(&x.a)})
}

/// Accepts `{"A": …}` (with optional `m`, `n`) or a bare 2n×m matrix.
pub fn element_from(v: &Value) -> Result<OddElement, Error> {
    let a = matrix_from(v.get("A").unwrap_or(v))?;
    if a.rows() % 2 == 1 {
        return Err(Error::Parse(format!("A has {} rows; 2n rows are required", a.rows())));
    }
    let (m, n) = (a.cols(), a.rows() / 2);
    for (key, want) in [("m", m), ("n", n)] {
        if let Some(given) = v.get(key) {
            if given.as_u64() != Some(want as u64) {
                return Err(Error::Parse(format!("{key} = {given} does not match the matrix shape")));
            }
        }
    }
    make_space(m, n)?.element(a).map_err(|e| match e {
        Error::DimensionMismatch { .. } => Error::Parse(e.to_string()),
        other => other,
    })
}

pub fn weight_json(w: &Weight) -> Value {
    json!({"eps": w.eps, "delta": w.delta, "text": w.to_string()})
}

pub fn weight_from(v: &Value, m: usize, n: usize) -> Result<Weight, Error> {
    let ints = |key: &str| -> Result<Vec<i64>, Error> {
        v.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse(format!("weight needs {key}")))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| Error::Parse("weight coefficients are integers".into())))
            .collect()
    };
    let w = Weight { m, n, eps: ints("eps")?, delta: ints("delta")? };
    if w.eps.len() != m / 2 || w.delta.len() != n {
        return Err(Error::ShapeMismatch);
    }
    Ok(w)
}

pub fn bound_json(r: &BoundReport) -> Value {
    json!({
        "m": r.m,
        "n": r.n,
        "closed_form": weight_json(&r.closed_form),
        "psi": weight_json(&r.psi),
        "delta_n": weight_json(&r.delta_n),
        "match": r.matches(),
    })
}

fn side_tag(s: Side) -> &'static str {
    match s {
        Side::V0 => "V0",
        Side::V1 => "V1",
    }
}

pub fn flag_json(f: &IsotropicFlag) -> Value {
    let kind = match f.kind {
        FlagKind::Complete => json!("complete"),
        FlagKind::Partial(k) => json!({"partial": k}),
    };
    json!({
        "side": side_tag(f.side),
        "kind": kind,
        "chain": Value::Array(f.chain.iter().map(|v| vector_json(v)).collect()),
    })
}

pub fn flag_from(v: &Value, space: &OspSpace) -> Result<IsotropicFlag, Error> {
    let side = match v.get("side").and_then(Value::as_str) {
        Some("V0") => Side::V0,
        Some("V1") => Side::V1,
        _ => return Err(Error::Parse("flag side must be V0 or V1".into())),
    };
    let kind = match v.get("kind") {
        Some(Value::String(s)) if s == "complete" => FlagKind::Complete,
        Some(k) => match k.get("partial").and_then(Value::as_u64) {
            Some(d) => FlagKind::Partial(d as usize),
            None => return Err(Error::Parse("flag kind must be \"complete\" or {\"partial\": k}".into())),
        },
        None => return Err(Error::Parse("flag needs a kind".into())),
    };
    let chain = v
        .get("chain")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("flag needs a chain".into()))?
        .iter()
        .map(vector_from)
        .collect::<Result<Vec<_>, _>>()?;
    IsotropicFlag::new(side, space, kind, chain)
}

fn step_json(s: &StepRecord) -> Value {
    let rule = match s.rule {
        StepRule::Forced => "forced",
        StepRule::Propagated => "propagated",
        StepRule::ComponentChoice => "component",
    };
    json!({"side": side_tag(s.side), "index": s.index, "dim": s.dim, "rule": rule, "deferred": s.deferred})
}

pub fn component_from(tag: &str) -> Result<Component, Error> {
    match tag {
        "plus" => Ok(Component::Plus),
        "minus" => Ok(Component::Minus),
        "n/a" => Ok(Component::NotApplicable),
        other => Err(Error::Parse(format!("unknown component {other:?}"))),
    }
}

pub fn resolution_json(p: &ResolutionPoint, steps: &[StepRecord]) -> Value {
    json!({
        "X": element_json(&p.x),
        "F0": flag_json(&p.f0),
        "F1": flag_json(&p.f1),
        "case": p.case.tag(),
        "component": p.component.tag(),
        "steps": Value::Array(steps.iter().map(step_json).collect()),
    })
}

pub fn resolution_from(v: &Value) -> Result<ResolutionPoint, Error> {
    let x = element_from(v.get("X").ok_or_else(|| Error::Parse("missing X".into()))?)?;
    let f0 = flag_from(v.get("F0").ok_or_else(|| Error::Parse("missing F0".into()))?, &x.space)?;
    let f1 = flag_from(v.get("F1").ok_or_else(|| Error::Parse("missing F1".into()))?, &x.space)?;
    let case = FlagCase::of(x.space.m, x.space.n);
    if v.get("case").and_then(Value::as_str) != Some(case.tag()) {
        return Err(Error::CaseMismatch(format!("expected case {}", case.tag())));
    }
    let component = component_from(v.get("component").and_then(Value::as_str).unwrap_or(""))?;
    Ok(ResolutionPoint { x, f0, f1, case, component })
}

pub fn checks_json(c: &SectionChecks) -> Value {
    let mut map = Map::new();
    for (k, ok) in c.entries() {
        map.insert(k.to_string(), Value::Bool(ok));
    }
    map.insert("samples".into(), json!(c.samples));
    Value::Object(map)
}

pub fn section_json(s: &Section, degrees: &[usize], checks: &SectionChecks) -> Value {
    json!({
        "m": s.space.m,
        "n": s.space.n,
        "u": matrix_json(&s.u.a),
        "h0": s.h0,
        "h1": s.h1,
        "L": Value::Array(s.l_basis.iter().map(|t| json!({"i": t.i, "j": t.j, "eigenvalue": t.eigenvalue})).collect()),
        "degrees": degrees,
        "checks": checks_json(checks),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ospcone_core::{representative, ABDiagram};

    #[test]
    fn element_round_trip() {
        let x = representative(&ABDiagram::parse("e1+a0").unwrap()).unwrap().x;
        let text = to_canonical(&element_json(&x));
        assert_eq!(element_from(&parse(&text).unwrap()).unwrap(), x);
        assert!(text.starts_with("{\"A\":"));
    }

    #[test]
    fn bare_matrices_and_bad_entries() {
        let zero = parse(r#"[["0","0"],["0","0"]]"#).unwrap();
        let x = element_from(&zero).unwrap();
        assert_eq!((x.space.m, x.space.n), (2, 1));
        assert!(matches!(element_from(&parse(r#"[["1.5","0"],["0","0"]]"#).unwrap()), Err(Error::Parse(_))));
        assert!(matches!(element_from(&parse(r#"[["1","0"]]"#).unwrap()), Err(Error::Parse(_))));
        assert!(matches!(parse("[[").unwrap_err(), Error::Parse(_)));
    }
}
