//! Coefficient literals.
//!
//! Method files and the built-in catalog write coefficients as text:
//! integers, decimals (`0.392382`, `1e-3`), fractions (`"1/6"`) and small
//! expressions with square roots (`"(1+sqrt(7))/3"`). A [`Coef`] keeps the
//! exact rational value whenever the expression has one, plus an `f64`
//! approximation that is always available.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Coef {
    exact: Option<BigRational>,
    approx: f64,
    source: String,
}

impl Coef {
    pub fn exact(q: BigRational) -> Self {
        let approx = rational_to_f64(&q);
        Self { source: fmt_rational(&q), exact: Some(q), approx }
    }

    pub fn integer(n: i64) -> Self {
        Self::exact(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn float(x: f64) -> Self {
        Self { exact: None, approx: x, source: format!("{x:?}") }
    }

    /// Exact for rational scalars, float otherwise.
    pub fn from_scalar<T: Scalar>(x: &T) -> Self {
        let any: &dyn std::any::Any = x;
        match any.downcast_ref::<BigRational>() {
            Some(q) => Self::exact(q.clone()),
            None => Self::float(x.to_f64_lossy()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser { s: text.as_bytes(), pos: 0 };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Parse(format!("trailing input in `{text}`")));
        }
        Ok(Self { source: text.trim().to_string(), ..v })
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_zero(),
            None => self.approx == 0.0,
        }
    }

    /// Materialize as a scalar. Exact scalar types need an exact value.
    pub fn to_scalar<T: Scalar>(&self) -> Result<T> {
        match (&self.exact, T::EXACT) {
            (Some(q), _) => Ok(T::from_rational(q)),
            (None, false) => Ok(T::from_f64_lossy(self.approx)),
            (None, true) => Err(Error::Irrational(self.source.clone())),
        }
    }

    fn binary(
        a: Coef,
        b: Coef,
        exact: impl Fn(&BigRational, &BigRational) -> Option<BigRational>,
        approx: impl Fn(f64, f64) -> f64,
    ) -> Coef {
        let q = match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => exact(x, y),
            _ => None,
        };
        match q {
            Some(q) => Coef::exact(q),
            None => Coef { exact: None, approx: approx(a.approx, b.approx), source: String::new() },
        }
    }

    fn sqrt(self) -> Result<Coef> {
        if self.approx < 0.0 {
            return Err(Error::Parse(format!("sqrt of negative value {}", self.approx)));
        }
        if let Some(q) = &self.exact {
            if let (Some(n), Some(d)) = (exact_isqrt(q.numer()), exact_isqrt(q.denom())) {
                return Ok(Coef::exact(BigRational::new(n, d)));
            }
        }
        Ok(Coef { exact: None, approx: self.approx.sqrt(), source: String::new() })
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// `p/q`, or just `p` for integers.
pub fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Exact value of a decimal literal such as `-0.125` or `3.5e-2`.
fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid number `{text}`"));
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(k) => (&text[..k], text[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(k) => (&mantissa[..k], &mantissa[k + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() || digits == "-" || digits == "+" { format!("{digits}0") } else { digits };
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(n);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(q)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{}` at offset {}", c as char, self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Coef> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == b'+' {
                Coef::binary(acc, rhs, |a, b| Some(a + b), |a, b| a + b)
            } else {
                Coef::binary(acc, rhs, |a, b| Some(a - b), |a, b| a - b)
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Coef> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == b'/' && rhs.approx == 0.0 && rhs.exact.as_ref().is_none_or(Zero::is_zero) {
                return Err(Error::Parse("division by zero".into()));
            }
            acc = if op == b'*' {
                Coef::binary(acc, rhs, |a, b| Some(a * b), |a, b| a * b)
            } else {
                Coef::binary(acc, rhs, |a, b| Some(a / b), |a, b| a / b)
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Coef> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(Coef::binary(Coef::zero(), v, |a, b| Some(a - b), |a, b| a - b))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Coef> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos];
                    let exp_sign = (c == b'+' || c == b'-')
                        && self.pos > start
                        && matches!(self.s[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                let q = parse_decimal(text)?;
                let approx = text.parse::<f64>().unwrap_or_else(|_| rational_to_f64(&q));
                Ok(Coef { exact: Some(q), approx, source: text.to_string() })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                if name != "sqrt" {
                    return Err(Error::Parse(format!("unknown function `{name}`")));
                }
                self.expect(b'(')?;
                let v = self.expr()?;
                self.expect(b')')?;
                v.sqrt()
            }
            _ => Err(Error::Parse(format!("unexpected input at offset {}", self.pos))),
        }
    }
}
