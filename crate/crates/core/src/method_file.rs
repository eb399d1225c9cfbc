//! JSON method files.
//!
//! ```json
//! {
//!   "name": "ssp22",
//!   "class": "explicit",
//!   "order": 2,
//!   "A": [[0, 0], [1, 0]],
//!   "b": ["1/2", "1/2"],
//!   "A_tilde": [[0, 0], [0, 0]],
//!   "b_tilde": [0, 0]
//! }
//! ```
//!
//! Coefficients are JSON numbers or strings accepted by [`Coef::parse`].
//! Rows of `A` may be ragged; missing trailing entries are zero. The
//! perturbation keys are optional.

use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::coef::Coef;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tableau::{Perturbation, RKMethod, StructuralClass};

/// Arithmetic used when loading a method file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NumericPolicy {
    /// Rational when every coefficient is exact, float otherwise.
    #[default]
    Auto,
    Rational,
    Float,
}

impl FromStr for NumericPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "auto" => Ok(Self::Auto),
            "rational" | "exact" => Ok(Self::Rational),
            "float" | "f64" => Ok(Self::Float),
            other => Err(Error::Parse(format!("unknown numeric policy `{other}`"))),
        }
    }
}

/// The concrete arithmetic chosen for a document.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Rational,
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodDoc {
    pub name: String,
    pub class: StructuralClass,
    pub order: u32,
    pub a: Vec<Vec<Coef>>,
    pub b: Vec<Coef>,
    pub a_tilde: Option<Vec<Vec<Coef>>>,
    pub b_tilde: Option<Vec<Coef>>,
}

fn coef_from_value(v: &Value) -> Result<Coef> {
    match v {
        Value::Number(n) => Coef::parse(&n.to_string()),
        Value::String(s) => Coef::parse(s),
        other => Err(Error::Parse(format!("expected a number or string, got {other}"))),
    }
}

fn coef_to_value(c: &Coef) -> Value {
    match c.as_rational() {
        Some(q) if q.is_integer() => serde_json::from_str(&q.numer().to_string()).expect("integer literal"),
        Some(q) => Value::String(crate::coef::fmt_rational(q)),
        None => serde_json::Number::from_f64(c.approx()).map(Value::Number).unwrap_or(Value::Null),
    }
}

fn vector(v: &Value, key: &str) -> Result<Vec<Coef>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("`{key}` must be an array")))?
        .iter()
        .map(coef_from_value)
        .collect()
}

fn rows(v: &Value, key: &str) -> Result<Vec<Vec<Coef>>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("`{key}` must be an array of rows")))?
        .iter()
        .map(|row| vector(row, key))
        .collect()
}

fn square<T: Scalar>(rows: &[Vec<Coef>], s: usize, key: &str) -> Result<Matrix<T>> {
    if rows.len() != s {
        return Err(Error::ShapeMismatch(format!("`{key}` has {} rows, expected {s}", rows.len())));
    }
    if let Some(i) = rows.iter().position(|r| r.len() > s) {
        return Err(Error::ShapeMismatch(format!("row {i} of `{key}` has more than {s} entries")));
    }
    let mut m = Matrix::zeros(s, s);
    for (i, row) in rows.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            m[(i, j)] = c.to_scalar()?;
        }
    }
    Ok(m)
}

fn to_vec<T: Scalar>(v: &[Coef]) -> Result<Vec<T>> {
    v.iter().map(Coef::to_scalar).collect()
}

impl MethodDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("method file must be a JSON object".into()))?;
        let get = |k: &str| obj.get(k).ok_or_else(|| Error::Parse(format!("missing key `{k}`")));
        let name = get("name")?.as_str().ok_or_else(|| Error::Parse("`name` must be a string".into()))?.to_string();
        let order = get("order")?
            .as_u64()
            .and_then(|o| u32::try_from(o).ok())
            .ok_or_else(|| Error::Parse("`order` must be a positive integer".into()))?;
        let a = rows(get("A")?, "A")?;
        let b = vector(get("b")?, "b")?;
        let class = match obj.get("class") {
            Some(c) => c.as_str().ok_or_else(|| Error::Parse("`class` must be a string".into()))?.parse()?,
            None => StructuralClass::infer(&square::<f64>(&a, b.len(), "A")?),
        };
        let a_tilde = obj.get("A_tilde").map(|v| rows(v, "A_tilde")).transpose()?;
        let b_tilde = obj.get("b_tilde").map(|v| vector(v, "b_tilde")).transpose()?;
        if a_tilde.is_some() != b_tilde.is_some() {
            return Err(Error::Parse("`A_tilde` and `b_tilde` must be given together".into()));
        }
        Ok(Self { name, class, order, a, b, a_tilde, b_tilde })
    }

    pub fn from_method<T: Scalar>(method: &RKMethod<T>, pert: Option<&Perturbation<T>>) -> Self {
        let mat = |m: &Matrix<T>| m.to_rows().iter().map(|r| r.iter().map(Coef::from_scalar).collect()).collect();
        let vec = |v: &[T]| v.iter().map(Coef::from_scalar).collect();
        Self {
            name: method.name().to_string(),
            class: method.class(),
            order: method.order(),
            a: mat(method.a()),
            b: vec(method.b()),
            a_tilde: pert.map(|p| mat(p.a_tilde())),
            b_tilde: pert.map(|p| vec(p.b_tilde())),
        }
    }

    pub fn to_value(&self) -> Value {
        let mat = |m: &[Vec<Coef>]| Value::Array(m.iter().map(|r| Value::Array(r.iter().map(coef_to_value).collect())).collect());
        let vec = |v: &[Coef]| Value::Array(v.iter().map(coef_to_value).collect());
        let mut obj = Map::new();
        obj.insert("name".into(), json!(self.name));
        obj.insert("class".into(), json!(self.class.as_str()));
        obj.insert("order".into(), json!(self.order));
        obj.insert("A".into(), mat(&self.a));
        obj.insert("b".into(), vec(&self.b));
        if let (Some(at), Some(bt)) = (&self.a_tilde, &self.b_tilde) {
            obj.insert("A_tilde".into(), mat(at));
            obj.insert("b_tilde".into(), vec(bt));
        }
        Value::Object(obj)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("serializable")
    }

    pub fn is_exact(&self) -> bool {
        let all = |v: &[Coef]| v.iter().all(Coef::is_exact);
        self.a.iter().all(|r| all(r))
            && all(&self.b)
            && self.a_tilde.iter().flatten().all(|r| all(r))
            && self.b_tilde.as_deref().is_none_or(all)
    }

    pub fn arithmetic(&self, policy: NumericPolicy) -> Result<Arithmetic> {
        match policy {
            NumericPolicy::Float => Ok(Arithmetic::Float),
            NumericPolicy::Auto if self.is_exact() => Ok(Arithmetic::Rational),
            NumericPolicy::Auto => Ok(Arithmetic::Float),
            NumericPolicy::Rational if self.is_exact() => Ok(Arithmetic::Rational),
            NumericPolicy::Rational => {
                let bad = self
                    .a
                    .iter()
                    .flatten()
                    .chain(&self.b)
                    .chain(self.a_tilde.iter().flatten().flatten())
                    .chain(self.b_tilde.iter().flatten())
                    .find(|c| !c.is_exact())
                    .expect("some coefficient is inexact");
                Err(Error::Irrational(bad.source().to_string()))
            }
        }
    }

    pub fn method<T: Scalar>(&self) -> Result<RKMethod<T>> {
        let s = self.b.len();
        RKMethod::new(self.name.clone(), self.class, self.order, square(&self.a, s, "A")?, to_vec(&self.b)?)
    }

    pub fn perturbation<T: Scalar>(&self) -> Result<Option<Perturbation<T>>> {
        match (&self.a_tilde, &self.b_tilde) {
            (Some(at), Some(bt)) => {
                let s = self.b.len();
                if bt.len() != s {
                    return Err(Error::ShapeMismatch(format!("`b_tilde` has {} entries, expected {s}", bt.len())));
                }
                Perturbation::new(self.class, square(at, s, "A_tilde")?, to_vec(bt)?).map(Some)
            }
            _ => Ok(None),
        }
    }
}

/// Parse a method file into a method and optional perturbation.
pub fn parse_method<T: Scalar>(text: &str) -> Result<(RKMethod<T>, Option<Perturbation<T>>)> {
    let doc = MethodDoc::from_json(text)?;
    Ok((doc.method()?, doc.perturbation()?))
}

pub fn render_method<T: Scalar>(method: &RKMethod<T>, pert: Option<&Perturbation<T>>) -> String {
    MethodDoc::from_method(method, pert).to_json_pretty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    const SSP22: &str = r#"{"name":"ssp22","class":"explicit","order":2,"A":[[0],[1,0]],"b":["1/2",0.5]}"#;

    #[test]
    fn parses_ragged_rows_and_mixed_literals() {
        let (m, p) = parse_method::<Rational>(SSP22).unwrap();
        assert!(p.is_none());
        assert_eq!(m.stages(), 2);
        assert_eq!(m.b()[1], Rational::new(1.into(), 2.into()));
    }

    #[test]
    fn round_trip_rational() {
        let doc = MethodDoc::from_json(SSP22).unwrap();
        let m = doc.method::<Rational>().unwrap();
        let back = parse_method::<Rational>(&render_method(&m, None)).unwrap().0;
        assert_eq!(back, m);
    }

    #[test]
    fn round_trip_float_is_bit_exact() {
        let text = r#"{"name":"x","class":"explicit","order":1,"A":[[0,0],[0.1,0]],"b":[0.3333333333333333,"2/3"],
                       "A_tilde":[[0,0],[0.7,0]],"b_tilde":[1e-3,0]}"#;
        let (m, p) = parse_method::<f64>(text).unwrap();
        let (m2, p2) = parse_method::<f64>(&render_method(&m, p.as_ref())).unwrap();
        assert_eq!(m2, m);
        assert_eq!(p2, p);
    }

    #[test]
    fn policy() {
        let doc = MethodDoc::from_json(SSP22).unwrap();
        assert_eq!(doc.arithmetic(NumericPolicy::Auto).unwrap(), Arithmetic::Rational);
        let irr = MethodDoc::from_json(r#"{"name":"x","order":1,"A":[[0]],"b":["sqrt(2)/sqrt(2)"]}"#).unwrap();
        assert_eq!(irr.arithmetic(NumericPolicy::Auto).unwrap(), Arithmetic::Float);
        assert!(matches!(irr.arithmetic(NumericPolicy::Rational), Err(Error::Irrational(_))));
        assert_eq!(irr.class, StructuralClass::Explicit);
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad = r#"{"name":"x","order":1,"A":[[0,0,0],[1,0]],"b":[0,1]}"#;
        assert!(matches!(parse_method::<f64>(bad), Err(Error::ShapeMismatch(_))));
        let lower = r#"{"name":"x","class":"explicit","order":1,"A":[[1]],"b":[1]}"#;
        assert!(matches!(parse_method::<f64>(lower), Err(Error::StructureViolation { .. })));
    }
}
