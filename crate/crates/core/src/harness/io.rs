//! JSON formats for classes, samples and perturbation maps.
//!
//! A class is `{"domain": [names], "labels": {"kind": ..}, "concepts":
//! {"name": [labels]}}`. Binary and multiclass labels are integers,
//! real-grid labels are strings `"i/q"`, and a `"*"` entry makes the class
//! partial. A sample is a list of `[point, label]` where the point is a
//! domain name or an index. A perturbation map sends point names to lists
//! of point names; points left out perturb only to themselves.

use serde_json::{json, Map, Value};

use crate::concepts::{ConceptClass, FiniteDomain, Label, LabelSpace, LabeledSample, PartialClass};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, parse_rational, Rational};
use crate::reductions::robust::PerturbationMap;

/// A parsed class file.
#[derive(Clone, Debug)]
pub enum ClassFile {
    Total(ConceptClass),
    Partial(PartialClass),
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn labels_to_json(l: LabelSpace) -> Value {
    match l {
        LabelSpace::Binary => json!({"kind": "binary"}),
        LabelSpace::Multiclass(m) => json!({"kind": "multiclass", "m": m}),
        LabelSpace::RealGrid(q) => json!({"kind": "realGrid", "q": q}),
    }
}

fn labels_from_json(v: &Value) -> Result<LabelSpace> {
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| parse_err("labels.kind missing"))?;
    let int = |k: &str| -> Result<u32> {
        let n = v.get(k).and_then(Value::as_u64).ok_or_else(|| parse_err(format!("labels.{k} missing")))?;
        u32::try_from(n).map_err(|_| parse_err(format!("labels.{k} too large")))
    };
    match kind {
        "binary" => Ok(LabelSpace::Binary),
        "multiclass" => Ok(LabelSpace::Multiclass(int("m")?)),
        "realGrid" => Ok(LabelSpace::RealGrid(int("q")?)),
        other => Err(parse_err(format!("unknown label kind {other:?}"))),
    }
}

pub fn label_to_json(labels: LabelSpace, l: Label) -> Value {
    match labels {
        LabelSpace::RealGrid(_) => Value::String(fmt_rational(&labels.value(l))),
        _ => json!(l),
    }
}

pub fn label_from_json(labels: LabelSpace, v: &Value) -> Result<Label> {
    let code = match v {
        Value::Number(n) => {
            let n = n.as_u64().ok_or_else(|| parse_err(format!("bad label {v}")))?;
            match labels {
                LabelSpace::RealGrid(_) => labels.code_of(&Rational::from_integer(n as i64)),
                _ => u32::try_from(n).ok(),
            }
        }
        Value::String(s) => labels.code_of(&parse_rational(s)?),
        _ => None,
    };
    code.filter(|&c| labels.contains(c)).ok_or_else(|| Error::LabelMismatch(format!("label {v} not in the label space")))
}

pub fn class_to_json(class: &ConceptClass) -> Value {
    let labels = class.labels();
    let concepts: Map<String, Value> = (0..class.len())
        .map(|c| (class.name(c).to_string(), Value::Array(class.concept(c).iter().map(|&l| label_to_json(labels, l)).collect())))
        .collect();
    json!({"domain": class.domain().names(), "labels": labels_to_json(labels), "concepts": concepts})
}

pub fn partial_to_json(class: &PartialClass) -> Value {
    let n = class.domain().len();
    let concepts: Map<String, Value> = (0..class.len())
        .map(|c| {
            let row = (0..n).map(|x| class.value(c, x).map_or(json!("*"), |b| json!(u8::from(b)))).collect();
            (class.names()[c].clone(), Value::Array(row))
        })
        .collect();
    json!({"domain": class.domain().names(), "labels": {"kind": "binary"}, "concepts": concepts})
}

pub fn class_from_json(v: &Value) -> Result<ClassFile> {
    let domain: Vec<String> = v
        .get("domain")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("domain missing"))?
        .iter()
        .map(|d| d.as_str().map(str::to_string).ok_or_else(|| parse_err("domain names must be strings")))
        .collect::<Result<_>>()?;
    let labels = labels_from_json(v.get("labels").ok_or_else(|| parse_err("labels missing"))?)?;
    let concepts = v.get("concepts").and_then(Value::as_object).ok_or_else(|| parse_err("concepts missing"))?;
    let domain = FiniteDomain::new(domain)?;
    let mut names = Vec::new();
    let mut rows = Vec::new();
    for (name, row) in concepts {
        names.push(name.clone());
        rows.push(row.as_array().ok_or_else(|| parse_err(format!("concept {name:?} must be a list")))?.clone());
    }
    let partial = rows.iter().flatten().any(|e| e.as_str() == Some("*"));
    if partial {
        if !labels.is_binary() {
            return Err(parse_err("partial classes must be binary"));
        }
        let table = rows
            .iter()
            .map(|r| r.iter().map(|e| if e.as_str() == Some("*") { Ok(None) } else { label_from_json(labels, e).map(|l| Some(l == 1)) }).collect())
            .collect::<Result<_>>()?;
        return Ok(ClassFile::Partial(PartialClass::new(domain, names, table)?));
    }
    let table = rows.iter().map(|r| r.iter().map(|e| label_from_json(labels, e)).collect()).collect::<Result<_>>()?;
    Ok(ClassFile::Total(ConceptClass::new(domain, labels, names, table)?))
}

fn point_from_json(domain: &FiniteDomain, v: &Value) -> Result<usize> {
    let x = match v {
        Value::String(s) => domain.lookup(s),
        Value::Number(n) => n.as_u64().map(|n| n as usize).filter(|&n| n < domain.len()),
        _ => None,
    };
    x.ok_or_else(|| Error::InvalidSample(format!("unknown point {v}")))
}

fn pairs_from_json(domain: &FiniteDomain, v: &Value) -> Result<Vec<(usize, Value)>> {
    v.as_array()
        .ok_or_else(|| parse_err("sample must be a list"))?
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([x, y]) => Ok((point_from_json(domain, x)?, y.clone())),
            _ => Err(parse_err(format!("sample entry {p} must be [point, label]"))),
        })
        .collect()
}

pub fn sample_from_json(domain: &FiniteDomain, labels: LabelSpace, v: &Value) -> Result<LabeledSample> {
    let pairs = pairs_from_json(domain, v)?.into_iter().map(|(x, y)| Ok((x, label_from_json(labels, &y)?))).collect::<Result<_>>()?;
    Ok(LabeledSample::new(pairs))
}

/// Real-valued sample: labels may be any rational in `[0, 1]`.
pub fn real_sample_from_json(domain: &FiniteDomain, v: &Value) -> Result<LabeledSample<Rational>> {
    let pairs = pairs_from_json(domain, v)?
        .into_iter()
        .map(|(x, y)| {
            let r = match &y {
                Value::String(s) => parse_rational(s)?,
                Value::Number(n) => Rational::from_integer(n.as_i64().ok_or_else(|| parse_err(format!("bad label {y}")))?),
                _ => return Err(parse_err(format!("bad label {y}"))),
            };
            Ok((x, r))
        })
        .collect::<Result<_>>()?;
    Ok(LabeledSample::new(pairs))
}

pub fn sample_to_json(domain: &FiniteDomain, labels: LabelSpace, s: &LabeledSample) -> Value {
    Value::Array(s.pairs.iter().map(|&(x, y)| json!([domain.name(x), label_to_json(labels, y)])).collect())
}

pub fn real_sample_to_json(domain: &FiniteDomain, s: &LabeledSample<Rational>) -> Value {
    Value::Array(s.pairs.iter().map(|(x, y)| json!([domain.name(*x), fmt_rational(y)])).collect())
}

/// A file holding either one sample or a list of samples.
pub fn samples_from_json<T>(v: &Value, one: impl Fn(&Value) -> Result<T>) -> Result<Vec<T>> {
    let list = v.as_array().ok_or_else(|| parse_err("samples must be a list"))?;
    let nested = !list.is_empty() && list.iter().all(|e| e.as_array().is_some_and(|a| a.iter().all(Value::is_array)));
    if nested {
        list.iter().map(one).collect()
    } else {
        Ok(vec![one(v)?])
    }
}

pub fn perturbation_from_json(domain: &FiniteDomain, v: &Value) -> Result<PerturbationMap> {
    let map = v.as_object().ok_or_else(|| parse_err("perturbation file must be an object"))?;
    let mut sets: Vec<Vec<usize>> = (0..domain.len()).map(|x| vec![x]).collect();
    for (k, list) in map {
        let x = domain.lookup(k).ok_or_else(|| parse_err(format!("unknown point {k:?}")))?;
        sets[x] = list
            .as_array()
            .ok_or_else(|| parse_err(format!("perturbations of {k:?} must be a list")))?
            .iter()
            .map(|z| point_from_json(domain, z))
            .collect::<Result<_>>()?;
    }
    PerturbationMap::new(sets)
}

pub fn perturbation_to_json(domain: &FiniteDomain, u: &PerturbationMap) -> Value {
    let map: Map<String, Value> = (0..u.len()).map(|x| (domain.name(x).to_string(), json!(u.get(x).iter().map(|&z| domain.name(z)).collect::<Vec<_>>()))).collect();
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_roundtrip() {
        let v = json!({
            "domain": ["a", "b"],
            "labels": {"kind": "realGrid", "q": 2},
            "concepts": {"z": ["0", "1/2"], "o": ["1", 1]}
        });
        let ClassFile::Total(c) = class_from_json(&v).unwrap() else { panic!("expected a total class") };
        assert_eq!(c.concept(0), &[0, 1]);
        assert_eq!(c.concept(1), &[2, 2]);
        assert_eq!(c.names(), &["z".to_string(), "o".to_string()]);
        let ClassFile::Total(back) = class_from_json(&class_to_json(&c)).unwrap() else { panic!() };
        assert_eq!(back.table(), c.table());
    }

    #[test]
    fn partial_and_samples() {
        let v = json!({"domain": ["a", "b"], "labels": {"kind": "binary"}, "concepts": {"p": [1, "*"]}});
        let ClassFile::Partial(p) = class_from_json(&v).unwrap() else { panic!("expected a partial class") };
        assert_eq!(p.support(0), vec![0]);
        let s = sample_from_json(p.domain(), LabelSpace::Binary, &json!([["a", 1], [1, 0]])).unwrap();
        assert_eq!(s.pairs, vec![(0, 1), (1, 0)]);
        let many = samples_from_json(&json!([[["a", 1]], []]), |e| sample_from_json(p.domain(), LabelSpace::Binary, e)).unwrap();
        assert_eq!(many.len(), 2);
        assert!(many[1].is_empty());
        assert!(sample_from_json(p.domain(), LabelSpace::Binary, &json!([["c", 1]])).is_err());
    }

    #[test]
    fn perturbation_defaults_to_identity() {
        let d = FiniteDomain::indexed(3).unwrap();
        let u = perturbation_from_json(&d, &json!({"0": ["0", "2"]})).unwrap();
        assert_eq!(u.get(0), &[0, 2]);
        assert_eq!(u.get(1), &[1]);
        assert!(perturbation_from_json(&d, &json!({"0": ["1"]})).is_err());
    }
}
