//! JSON formats.
//!
//! - Dyadic: `[numerator, exponent]`, the numerator a JSON integer or, when it does not fit
//!   in 64 bits, a decimal string. Strings such as `"3/4"` or `"0.75"` are accepted on input
//!   when exactly dyadic.
//! - Point: a list of dyadics.
//! - Rational coefficient: `[numerator, denominator]`; integers and `"a/b"` strings are
//!   accepted on input.
//! - Space: `{"kind": "full" | "cube" | "ball" | "finite", "dim": d}` plus `"radius"` for a
//!   ball and `"points"`, `"base"` for a finite set.
//! - Molecule: `{"space": ..., "terms": [{"point": ..., "coeff": ...}]}`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::basis_cube::{CubeBasisCoefficients, CubeBasisIndex};
use crate::basis_rd::{CutoffSequence, RdBasisCoefficients, RdBasisIndex, RdKind};
use crate::dyadic::{parse_rational, Dyadic, Rational};
use crate::error::{Error, Result};
use crate::grid::Point;
use crate::interpolation::WeightMap;
use crate::molecule::{Molecule, SpaceDescriptor, SpaceKind};

fn bad(what: &str, v: &Value) -> Error {
    Error::Parse(format!("expected {what}, got {v}"))
}

fn int_value(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn parse_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| bad("an integer", v)),
        Value::String(s) => s.trim().parse::<BigInt>().map_err(|_| bad("an integer", v)),
        _ => Err(bad("an integer", v)),
    }
}

pub fn dyadic_to_json(x: &Dyadic) -> Value {
    json!([int_value(&x.numerator()), x.exponent()])
}

pub fn dyadic_from_json(v: &Value) -> Result<Dyadic> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let num = parse_int(&a[0])?;
            let exp = a[1].as_u64().ok_or_else(|| bad("a non-negative exponent", &a[1]))?;
            Ok(Dyadic::from_bigint(num, exp as i64))
        }
        Value::String(s) => s.parse(),
        Value::Number(n) if n.is_i64() => Ok(Dyadic::from_int(n.as_i64().unwrap())),
        _ => Err(bad("a dyadic [numerator, exponent]", v)),
    }
}

pub fn point_to_json(x: &Point) -> Value {
    Value::Array(x.coords().iter().map(dyadic_to_json).collect())
}

pub fn point_from_json(v: &Value) -> Result<Point> {
    let a = v.as_array().ok_or_else(|| bad("a point", v))?;
    Point::new(a.iter().map(dyadic_from_json).collect::<Result<_>>()?)
        .map_err(|_| bad("a nonempty point", v))
}

pub fn rational_to_json(r: &Rational) -> Value {
    json!([int_value(r.numer()), int_value(r.denom())])
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let den = parse_int(&a[1])?;
            if den == BigInt::from(0) {
                return Err(bad("a nonzero denominator", v));
            }
            Ok(Rational::new(parse_int(&a[0])?, den))
        }
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(BigInt::from(n.as_i64().unwrap()))),
        _ => Err(bad("a rational [numerator, denominator]", v)),
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        dyadic_to_json(self).serialize(s)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.dim()))?;
        for c in self.coords() {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

pub fn space_to_json(space: &SpaceDescriptor) -> Value {
    let mut obj = Map::new();
    obj.insert("dim".into(), json!(space.dim()));
    match space.kind() {
        SpaceKind::Full => {
            obj.insert("kind".into(), json!("full"));
        }
        SpaceKind::Cube => {
            obj.insert("kind".into(), json!("cube"));
        }
        SpaceKind::Ball { radius } => {
            obj.insert("kind".into(), json!("ball"));
            obj.insert("radius".into(), dyadic_to_json(radius));
        }
        SpaceKind::Finite { points } => {
            obj.insert("kind".into(), json!("finite"));
            obj.insert("points".into(), Value::Array(points.iter().map(point_to_json).collect()));
            obj.insert("base".into(), point_to_json(space.base()));
        }
    }
    Value::Object(obj)
}

pub fn space_from_json(v: &Value) -> Result<SpaceDescriptor> {
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("a space with a kind", v))?;
    let dim = || -> Result<usize> {
        v.get("dim").and_then(Value::as_u64).filter(|&d| d > 0).map(|d| d as usize).ok_or_else(|| bad("a positive dim", v))
    };
    match kind {
        "full" => Ok(SpaceDescriptor::full(dim()?)),
        "cube" => Ok(SpaceDescriptor::unit_cube(dim()?)),
        "ball" => {
            let r = dyadic_from_json(v.get("radius").ok_or_else(|| bad("a ball radius", v))?)?;
            SpaceDescriptor::ball(dim()?, r)
        }
        "finite" => {
            let pts = v.get("points").and_then(Value::as_array).ok_or_else(|| bad("a point list", v))?;
            let pts: Vec<Point> = pts.iter().map(point_from_json).collect::<Result<_>>()?;
            let base = match v.get("base") {
                Some(b) => point_from_json(b)?,
                None => Point::origin(pts.first().map(Point::dim).unwrap_or(dim()?)),
            };
            SpaceDescriptor::finite(pts, base)
        }
        other => Err(Error::Parse(format!("unknown space kind {other:?}"))),
    }
}

pub fn molecule_to_json(m: &Molecule) -> Value {
    let terms: Vec<Value> = m
        .terms()
        .iter()
        .map(|(x, a)| json!({"point": point_to_json(x), "coeff": rational_to_json(a)}))
        .collect();
    json!({"space": space_to_json(m.space()), "terms": terms})
}

/// A molecule and whether the input had to be canonicalized.
#[derive(Clone, PartialEq, Debug)]
pub struct LoadedMolecule {
    pub molecule: Molecule,
    pub canonicalized: bool,
}

pub fn molecule_from_json(v: &Value) -> Result<LoadedMolecule> {
    let space = space_from_json(v.get("space").ok_or_else(|| bad("a molecule with a space", v))?)?;
    let raw = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("a term list", v))?;
    let mut terms = Vec::with_capacity(raw.len());
    for t in raw {
        let x = point_from_json(t.get("point").ok_or_else(|| bad("a term point", t))?)?;
        if x.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: x.dim() });
        }
        let a = rational_from_json(t.get("coeff").ok_or_else(|| bad("a term coeff", t))?)?;
        terms.push((x, a));
    }
    let molecule = Molecule::canonicalize(terms.iter().cloned(), space)?;
    let canonicalized = molecule.len() != terms.len()
        || terms.iter().any(|(x, a)| &molecule.coeff(x) != a);
    Ok(LoadedMolecule { molecule, canonicalized })
}

pub fn weights_to_json(w: &WeightMap) -> Value {
    Value::Array(
        w.iter()
            .map(|(v, c)| json!({"vertex": point_to_json(v), "weight": dyadic_to_json(c)}))
            .collect(),
    )
}

pub fn cube_coefficients_to_json(c: &CubeBasisCoefficients) -> Value {
    Value::Array(
        c.entries()
            .iter()
            .map(|(i, a)| json!({"level": i.level, "point": point_to_json(&i.point), "coeff": rational_to_json(a)}))
            .collect(),
    )
}

fn entries(v: &Value) -> Result<&Vec<Value>> {
    match v {
        Value::Array(a) => Ok(a),
        Value::Object(o) => o.get("coefficients").and_then(Value::as_array).ok_or_else(|| bad("a coefficient list", v)),
        _ => Err(bad("a coefficient list", v)),
    }
}

fn level_of(e: &Value) -> Result<u32> {
    e.get("level").and_then(Value::as_u64).map(|l| l as u32).ok_or_else(|| bad("a level", e))
}

pub fn cube_coefficients_from_json(v: &Value, dim: usize) -> Result<CubeBasisCoefficients> {
    let mut out = Vec::new();
    for e in entries(v)? {
        let x = point_from_json(e.get("point").ok_or_else(|| bad("a point", e))?)?;
        let idx = CubeBasisIndex::new(level_of(e)?, x)?;
        out.push((idx, rational_from_json(e.get("coeff").ok_or_else(|| bad("a coeff", e))?)?));
    }
    CubeBasisCoefficients::new(dim, out)
}

fn kind_name(k: RdKind) -> &'static str {
    match k {
        RdKind::InnerRefine => "inner-refine",
        RdKind::OuterShell => "outer-shell",
    }
}

pub fn rd_coefficients_to_json(c: &RdBasisCoefficients) -> Value {
    Value::Array(
        c.entries()
            .iter()
            .map(|(i, a)| {
                let (n, s) = i.eta();
                json!({
                    "level": i.level(),
                    "point": point_to_json(i.point()),
                    "coeff": rational_to_json(a),
                    "kind": kind_name(i.kind()),
                    "eta": [n, dyadic_to_json(&s)],
                })
            })
            .collect(),
    )
}

/// Indices are re-derived from `level`, `point` and the cutoffs; a `kind` field, if present,
/// must agree.
pub fn rd_coefficients_from_json(v: &Value, dim: usize, k: &CutoffSequence) -> Result<RdBasisCoefficients> {
    let mut out = Vec::new();
    for e in entries(v)? {
        let x = point_from_json(e.get("point").ok_or_else(|| bad("a point", e))?)?;
        let idx = RdBasisIndex::new(level_of(e)?, x, k)?;
        if let Some(kind) = e.get("kind").and_then(Value::as_str) {
            if kind != kind_name(idx.kind()) {
                return Err(Error::InvalidIndex(format!("{} is {}, not {kind}", idx.point(), kind_name(idx.kind()))));
            }
        }
        out.push((idx, rational_from_json(e.get("coeff").ok_or_else(|| bad("a coeff", e))?)?));
    }
    RdBasisCoefficients::new(dim, out)
}

/// Reads a point list such as `[[[1,0]], [[3,1]]]` or `[["1"], ["3/2"]]`.
pub fn points_from_json(v: &Value) -> Result<Vec<Point>> {
    v.as_array().ok_or_else(|| bad("a point list", v))?.iter().map(point_from_json).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_round_trip() {
        for s in ["0", "3/4", "-5/8", "12"] {
            let x: Dyadic = s.parse().unwrap();
            assert_eq!(dyadic_from_json(&dyadic_to_json(&x)).unwrap(), x);
        }
        assert_eq!(dyadic_to_json(&"3/4".parse().unwrap()), json!([3, 2]));
        assert_eq!(dyadic_from_json(&json!("0.75")).unwrap(), "3/4".parse().unwrap());
        assert!(dyadic_from_json(&json!("0.1")).is_err());
        let big = Dyadic::from_bigint(BigInt::from(1) << 80, 0);
        assert_eq!(dyadic_from_json(&dyadic_to_json(&big)).unwrap(), big);
    }

    #[test]
    fn molecule_round_trip() {
        let v = json!({
            "space": {"kind": "full", "dim": 1},
            "terms": [
                {"point": [[1, 1]], "coeff": [1, 1]},
                {"point": [[1, 1]], "coeff": [1, 3]},
                {"point": [[0, 0]], "coeff": 5}
            ]
        });
        let loaded = molecule_from_json(&v).unwrap();
        assert!(loaded.canonicalized);
        assert_eq!(loaded.molecule.len(), 1);
        let again = molecule_from_json(&molecule_to_json(&loaded.molecule)).unwrap();
        assert!(!again.canonicalized);
        assert_eq!(again.molecule, loaded.molecule);
        let bad_dim = json!({"space": {"kind": "full", "dim": 2}, "terms": [{"point": [[1, 0]], "coeff": 1}]});
        assert!(matches!(molecule_from_json(&bad_dim), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spaces() {
        for s in [
            SpaceDescriptor::full(2),
            SpaceDescriptor::unit_cube(1),
            SpaceDescriptor::ball(1, Dyadic::from_int(3)).unwrap(),
            SpaceDescriptor::finite([Point::from_ints(&[2])], Point::from_ints(&[1])).unwrap(),
        ] {
            assert_eq!(space_from_json(&space_to_json(&s)).unwrap(), s);
        }
    }
}
