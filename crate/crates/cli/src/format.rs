use serde_json::{json, Value};
use sspert::coef::Coef;
use sspert::{Matrix, Scalar};

/// Six decimals, truncated toward zero. The tiny guard keeps values such as
/// `0.685` that are stored just below their decimal from losing a digit.
pub fn trunc6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let t = (x.abs() * 1e6 + 1e-6).floor() / 1e6;
    let t = if x < 0.0 && t != 0.0 { -t } else { t };
    format!("{t:.6}")
}

/// Full-precision value plus the exact rational when there is one.
pub fn scalar_json<T: Scalar>(x: &T) -> Value {
    let c = Coef::from_scalar(x);
    match c.as_rational() {
        Some(_) => json!({ "value": x.to_f64_lossy(), "exact": c.source() }),
        None => json!({ "value": x.to_f64_lossy() }),
    }
}

pub fn print_matrix(label: &str, m: &Matrix<f64>) {
    println!("{label}:");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{:>10}", trunc6(*x))).collect();
        println!("  {}", row.join(" "));
    }
}

pub fn print_vector(label: &str, v: &[f64]) {
    let row: Vec<String> = v.iter().map(|x| format!("{:>10}", trunc6(*x))).collect();
    println!("{label}:\n  {}", row.join(" "));
}
