//! Linear-programming feasibility by dense phase-1 simplex.
//!
//! Problems have the form
//!
//! ```text
//! eq_A · x  = eq_b
//! ineq_A · x ≥ ineq_b
//! x ≥ 0
//! ```
//!
//! Every feasible answer carries a certificate `x` that has been checked
//! against the original (unscaled) constraints.

use log::{debug, warn};

/// Phase-1 objective below this: feasible.
pub const FEASIBLE_OBJECTIVE: f64 = 1e-9;
/// Phase-1 objective above this: infeasible. In between: numerical failure.
pub const INFEASIBLE_OBJECTIVE: f64 = 1e-7;
/// Relative residual allowed on certificates.
pub const CERTIFICATE_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-12;
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct LpFeasibility {
    n_vars: usize,
    eq_a: Vec<Vec<f64>>,
    eq_b: Vec<f64>,
    ineq_a: Vec<Vec<f64>>,
    ineq_b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Feasible(Vec<f64>),
    /// Carries the phase-1 objective.
    Infeasible(f64),
    NumericalFailure(String),
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }

    pub fn certificate(&self) -> Option<&[f64]> {
        match self {
            Self::Feasible(x) => Some(x),
            _ => None,
        }
    }

    pub fn into_certificate(self) -> Option<Vec<f64>> {
        match self {
            Self::Feasible(x) => Some(x),
            _ => None,
        }
    }
}

impl LpFeasibility {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, eq_a: Vec::new(), eq_b: Vec::new(), ineq_a: Vec::new(), ineq_b: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_eq(&self) -> usize {
        self.eq_b.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.ineq_b.len()
    }

    /// `row · x = rhs`.
    ///
    /// # Panics
    /// If `row.len() != n_vars`.
    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.n_vars, "constraint width");
        self.eq_a.push(row);
        self.eq_b.push(rhs);
        self
    }

    /// `row · x ≥ rhs`.
    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.n_vars, "constraint width");
        self.ineq_a.push(row);
        self.ineq_b.push(rhs);
        self
    }

    /// `row · x ≤ rhs`.
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.add_ge(row.into_iter().map(|a| -a).collect(), -rhs)
    }

    /// Largest violation of `x` against the constraints, each row measured
    /// relative to `max(1, ‖row‖∞, |rhs|)`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let scale = |row: &[f64], rhs: f64| row.iter().fold(1f64.max(rhs.abs()), |m, a| m.max(a.abs()));
        let eq = self.eq_a.iter().zip(&self.eq_b).map(|(r, &b)| (dot(r) - b).abs() / scale(r, b));
        let ineq = self.ineq_a.iter().zip(&self.ineq_b).map(|(r, &b)| (b - dot(r)).max(0.0) / scale(r, b));
        let sign = x.iter().map(|&v| (-v).max(0.0));
        eq.chain(ineq).chain(sign).fold(0.0, f64::max)
    }

    pub fn is_certificate(&self, x: &[f64]) -> bool {
        x.len() == self.n_vars && x.iter().all(|v| v.is_finite()) && self.violation(x) <= CERTIFICATE_TOL
    }
}

/// Decide feasibility of `problem`.
pub fn solve_feasibility(problem: &LpFeasibility) -> LpResult {
    let m = problem.n_eq() + problem.n_ineq();
    let n = problem.n_vars;
    if m == 0 {
        return LpResult::Feasible(vec![0.0; n]);
    }
    let mut tab = Tableau::build(problem);
    let outcome = tab.run(50 * (m + tab.cols));
    match outcome {
        Err(msg) => {
            warn!("simplex gave up: {msg}");
            LpResult::NumericalFailure(msg)
        }
        Ok(()) => {
            let obj = tab.objective();
            debug!("phase-1 objective {obj:e} ({m} rows, {n} vars)");
            if obj > INFEASIBLE_OBJECTIVE {
                LpResult::Infeasible(obj)
            } else if obj >= FEASIBLE_OBJECTIVE {
                debug!("phase-1 objective {obj:e} is inconclusive");
                LpResult::NumericalFailure(format!("inconclusive phase-1 objective {obj:e}"))
            } else {
                let x = tab.solution(n);
                if problem.is_certificate(&x) {
                    LpResult::Feasible(x)
                } else {
                    let v = problem.violation(&x);
                    warn!("certificate failed verification (violation {v:e})");
                    LpResult::NumericalFailure(format!("certificate violation {v:e}"))
                }
            }
        }
    }
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    first_artificial: usize,
    /// Reduced costs of the phase-1 objective.
    d: Vec<f64>,
}

impl Tableau {
    fn build(p: &LpFeasibility) -> Self {
        let n = p.n_vars;
        let n_surplus = p.n_ineq();
        let rows: Vec<(Vec<f64>, f64, Option<usize>)> = p
            .eq_a
            .iter()
            .zip(&p.eq_b)
            .map(|(r, &b)| (r.clone(), b, None))
            .chain(p.ineq_a.iter().zip(&p.ineq_b).enumerate().map(|(k, (r, &b))| (r.clone(), b, Some(k))))
            .collect();

        // Normalize: rhs ≥ 0, max |coef| = 1. A surplus column keeps ±1
        // (its variable absorbs the row scale).
        let mut norm: Vec<(Vec<f64>, f64, Option<(usize, f64)>)> = Vec::with_capacity(rows.len());
        for (mut a, mut b, surplus) in rows {
            let mut s_coef = -1.0;
            if b < 0.0 {
                a.iter_mut().for_each(|v| *v = -*v);
                b = -b;
                s_coef = 1.0;
            }
            let scale = a.iter().fold(0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                a.iter_mut().for_each(|v| *v /= scale);
                b /= scale;
            }
            norm.push((a, b, surplus.map(|k| (k, s_coef))));
        }

        let needs_artificial: Vec<bool> = norm.iter().map(|(_, _, s)| !matches!(s, Some((_, c)) if *c > 0.0)).collect();
        let n_art = needs_artificial.iter().filter(|&&x| x).count();
        let cols = n + n_surplus + n_art;
        let first_artificial = n + n_surplus;
        let mut t = Vec::with_capacity(norm.len());
        let mut basis = Vec::with_capacity(norm.len());
        let mut next_art = first_artificial;
        for ((a, b, surplus), art) in norm.into_iter().zip(needs_artificial) {
            let mut row = vec![0.0; cols + 1];
            row[..n].copy_from_slice(&a);
            if let Some((k, c)) = surplus {
                row[n + k] = c;
            }
            row[cols] = b;
            if art {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(n + surplus.expect("slack basis").0);
            }
            t.push(row);
        }
        let mut tab = Self { t, basis, cols, first_artificial, d: Vec::new() };
        tab.recompute_costs();
        tab
    }

    fn cost(&self, j: usize) -> f64 {
        if j >= self.first_artificial {
            1.0
        } else {
            0.0
        }
    }

    fn recompute_costs(&mut self) {
        let mut d: Vec<f64> = (0..=self.cols).map(|j| if j < self.cols { self.cost(j) } else { 0.0 }).collect();
        for (row, &bj) in self.t.iter().zip(&self.basis) {
            let cb = self.cost(bj);
            if cb != 0.0 {
                for (dj, v) in d.iter_mut().zip(row) {
                    *dj -= cb * v;
                }
            }
        }
        self.d = d;
    }

    fn objective(&self) -> f64 {
        self.t.iter().zip(&self.basis).filter(|(_, &b)| b >= self.first_artificial).map(|(r, _)| r[self.cols].max(0.0)).sum()
    }

    fn solution(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (row, &b) in self.t.iter().zip(&self.basis) {
            if b < n {
                x[b] = row[self.cols].max(0.0);
            }
        }
        x
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = (0..self.cols).filter(|&j| self.d[j] < -COST_TOL);
        if bland {
            candidates.into_iter().next()
        } else {
            candidates.min_by(|&a, &b| self.d[a].total_cmp(&self.d[b]))
        }
    }

    fn leaving(&self, j: usize) -> Option<usize> {
        let rhs = self.cols;
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.t.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[rhs].max(0.0) / row[j];
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let better = ratio < br - 1e-12
                            || (ratio <= br + 1e-12
                                && (row[j] > self.t[bi][j] * 10.0 || self.basis[i] < self.basis[bi]));
                        Some(if better { (i, ratio) } else { (bi, br) })
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    row[c] = 0.0;
                }
            }
        }
        let f = self.d[c];
        for (v, pv) in self.d.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        self.d[c] = 0.0;
        self.basis[r] = c;
    }

    fn run(&mut self, cap: usize) -> Result<(), String> {
        let mut streak = 0;
        let mut last_obj = self.objective();
        for it in 0..cap {
            if it > 0 && it % 100 == 0 {
                self.recompute_costs();
            }
            if self.objective() <= 0.0 {
                return Ok(());
            }
            let Some(c) = self.entering(streak >= DEGENERATE_STREAK) else {
                return Ok(());
            };
            let Some(r) = self.leaving(c) else {
                // Unbounded below is impossible for a phase-1 objective.
                return Err("unbounded ratio test in phase 1".into());
            };
            self.pivot(r, c);
            let obj = self.objective();
            if obj < last_obj - 1e-15 {
                streak = 0;
            } else {
                streak += 1;
            }
            last_obj = obj;
        }
        Err(format!("iteration cap {cap} reached"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_equality() {
        let mut p = LpFeasibility::new(1);
        p.add_eq(vec![1.0], 1.0);
        let x = solve_feasibility(&p).into_certificate().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_contradiction() {
        let mut p = LpFeasibility::new(2);
        p.add_eq(vec![1.0, 1.0], 1.0).add_eq(vec![1.0, -1.0], 3.0);
        assert!(matches!(solve_feasibility(&p), LpResult::Infeasible(obj) if obj > 0.5));
    }

    #[test]
    fn inequalities_and_bounds() {
        // x + y ≥ 2, x ≤ 1, y ≤ 1  →  x = y = 1
        let mut p = LpFeasibility::new(2);
        p.add_ge(vec![1.0, 1.0], 2.0).add_le(vec![1.0, 0.0], 1.0).add_le(vec![0.0, 1.0], 1.0);
        let x = solve_feasibility(&p).into_certificate().unwrap();
        assert!(p.is_certificate(&x));
        p.add_le(vec![1.0, 1.0], 1.9);
        assert!(!solve_feasibility(&p).is_feasible());
    }

    #[test]
    fn empty_problem() {
        assert_eq!(solve_feasibility(&LpFeasibility::new(3)), LpResult::Feasible(vec![0.0; 3]));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling instance, recast as feasibility with an
        // objective cut at its optimum.
        let mut p = LpFeasibility::new(4);
        p.add_le(vec![0.25, -8.0, -1.0, 9.0], 0.0)
            .add_le(vec![0.5, -12.0, -0.5, 3.0], 0.0)
            .add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0)
            .add_ge(vec![0.75, -20.0, 0.5, -6.0], 1.25 - 1e-9);
        let x = solve_feasibility(&p).into_certificate().unwrap();
        assert!(p.is_certificate(&x));
        let mut q = p.clone();
        q.add_ge(vec![0.75, -20.0, 0.5, -6.0], 1.3);
        assert!(!solve_feasibility(&q).is_feasible());
    }
}
