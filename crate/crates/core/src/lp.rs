//! Dense simplex solver for small covering-style linear programs.
//!
//! Programs have the shape
//!
//! ```text
//! minimize    c·x
//! subject to  a_r·x >= b_r      for every row r
//!             Σ x_i <= s
//!             x >= 0
//! ```
//!
//! The cap row keeps the feasible region bounded, so a program is either
//! infeasible or has an optimal vertex. The solver works on the program
//! relaxed by a relative slack `ε` (each `b_r` becomes `b_r - ε|b_r|`, the
//! cap becomes `s(1 + ε)`), which keeps boundary-feasible programs from being
//! declared infeasible because of rounding.
//!
//! Phase one is a dual simplex on the nonnegative part of the costs, started
//! from the all-slack basis (which is dual feasible for such costs). Phase
//! two is a primal simplex on the true costs. For nonnegative costs phase two
//! finishes immediately. Pricing is Dantzig/most-infeasible with a switch to
//! Bland's rule after a run of degenerate pivots.

use crate::error::{Error, Result};

/// Smallest relative slack accepted by [`solve_lp`]'s default tolerance.
pub const MIN_TOLERANCE: f64 = 1e-12;

const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// Minimized.
    pub objective: Vec<f64>,
    /// `(a, b)` means `a·x >= b`.
    pub ge_constraints: Vec<(Vec<f64>, f64)>,
    /// `Σ x <= simplex_cap`.
    pub simplex_cap: f64,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, simplex_cap: f64) -> Self {
        Self {
            num_vars: objective.len(),
            objective,
            ge_constraints: Vec::new(),
            simplex_cap,
        }
    }

    pub fn with_ge(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.ge_constraints.push((row, rhs));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::LpInput(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        if !(self.simplex_cap.is_finite() && self.simplex_cap > 0.0) {
            return Err(Error::LpInput(format!(
                "simplex cap must be positive and finite, got {}",
                self.simplex_cap
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::LpInput("non-finite objective coefficient".into()));
        }
        for (r, (row, rhs)) in self.ge_constraints.iter().enumerate() {
            if row.len() != self.num_vars {
                return Err(Error::LpInput(format!(
                    "constraint {r} has {} coefficients for {} variables",
                    row.len(),
                    self.num_vars
                )));
            }
            if !rhs.is_finite() || row.iter().any(|a| !a.is_finite()) {
                return Err(Error::LpInput(format!("non-finite value in constraint {r}")));
            }
        }
        Ok(())
    }

    /// Checks `x` against the ε-relaxed constraints.
    pub fn is_feasible_within(&self, x: &[f64], eps: f64) -> bool {
        let scale = 1.0 + 1e-9;
        x.len() == self.num_vars
            && x.iter().all(|&v| v >= 0.0)
            && x.iter().sum::<f64>() <= self.simplex_cap * (1.0 + eps) * scale
            && self.ge_constraints.iter().all(|(row, b)| {
                let lhs = dot(row, x);
                let need = b - eps * b.abs();
                lhs >= need - 1e-9 * (1.0 + b.abs())
            })
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// All zeros when infeasible.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub tolerance: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Relative slack `Δ²/(N⁴T²)`, clamped below at [`MIN_TOLERANCE`].
pub fn default_tolerance(delta: f64, n: usize, horizon: u64) -> f64 {
    let n = n as f64;
    let t = horizon as f64;
    (delta * delta / (n.powi(4) * t * t)).max(MIN_TOLERANCE)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `lp` to within relative slack `eps`. Deterministic for a fixed
/// input.
pub fn solve_lp(lp: &LinearProgram, eps: f64) -> Result<LpSolution> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::LpInput(format!("tolerance must be positive, got {eps}")));
    }
    lp.validate()?;

    let cap = lp.simplex_cap * (1.0 + eps);
    let infeasible = || LpSolution {
        status: LpStatus::Infeasible,
        x: vec![0.0; lp.num_vars],
        objective_value: f64::INFINITY,
        tolerance: eps,
    };

    // A row whose best achievable value under the cap falls short of its
    // right-hand side cannot be met.
    for (row, b) in &lp.ge_constraints {
        let reach = row.iter().fold(0.0f64, |m, &a| m.max(a)) * cap;
        let need = b - eps * b.abs();
        if reach < need - 1e-12 * (1.0 + need.abs()) {
            return Ok(infeasible());
        }
    }

    let mut tab = Tableau::new(lp, eps, cap);
    match tab.dual_phase()? {
        Phase::Infeasible => return Ok(infeasible()),
        Phase::Done => {}
    }
    tab.primal_phase(&lp.objective)?;

    let mut x = tab.primal_values(lp.num_vars);
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    if !lp.is_feasible_within(&x, eps) {
        return Err(Error::Invariant(
            "simplex returned a point outside the relaxed feasible region".into(),
        ));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_at(&x),
        x,
        tolerance: eps,
    })
}

enum Phase {
    Done,
    Infeasible,
}

/// Row-major dense tableau. Columns `0..n` are the structural variables,
/// `n..n+m` the slacks (one per row, cap row last).
struct Tableau {
    rows: usize,
    width: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    feas_tol: f64,
    opt_tol: f64,
}

impl Tableau {
    fn new(lp: &LinearProgram, eps: f64, cap: f64) -> Self {
        let n = lp.num_vars;
        let m = lp.ge_constraints.len() + 1;
        let width = n + m;
        let mut a = vec![0.0; m * width];
        let mut rhs = vec![0.0; m];
        let mut rhs_scale: f64 = cap;
        for (r, (row, b)) in lp.ge_constraints.iter().enumerate() {
            // a·x - s_r = b'  written as  -a·x + s_r = -b'
            for (c, &v) in row.iter().enumerate() {
                a[r * width + c] = -v;
            }
            a[r * width + n + r] = 1.0;
            let relaxed = b - eps * b.abs();
            rhs[r] = -relaxed;
            rhs_scale = rhs_scale.max(relaxed.abs());
        }
        let cap_row = m - 1;
        for c in 0..n {
            a[cap_row * width + c] = 1.0;
        }
        a[cap_row * width + n + cap_row] = 1.0;
        rhs[cap_row] = cap;

        let mut reduced = vec![0.0; width];
        let mut cost_scale: f64 = 1.0;
        for (c, &v) in lp.objective.iter().enumerate() {
            reduced[c] = v.max(0.0);
            cost_scale = cost_scale.max(v.abs());
        }
        Self {
            rows: m,
            width,
            a,
            rhs,
            basis: (n..n + m).collect(),
            reduced,
            feas_tol: 1e-11 * (1.0 + rhs_scale),
            opt_tol: 1e-11 * cost_scale,
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.a[r * w + c];
        {
            let row = &mut self.a[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        self.rhs[r] /= p;
        let (pivot_row, pivot_rhs) = (self.a[r * w..(r + 1) * w].to_vec(), self.rhs[r]);
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * w..(i + 1) * w];
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        let f = self.reduced[c];
        if f != 0.0 {
            for (v, &pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.reduced[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Dual simplex until the basis is primal feasible.
    fn dual_phase(&mut self) -> Result<Phase> {
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut leave = None;
            let mut worst = -self.feas_tol;
            for r in 0..self.rows {
                let v = self.rhs[r];
                if v < -self.feas_tol {
                    let better = match leave {
                        None => true,
                        Some(l) if bland => self.basis[r] < self.basis[l],
                        Some(_) => v < worst,
                    };
                    if better {
                        leave = Some(r);
                        worst = v;
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(Phase::Done);
            };
            let mut enter = None;
            let mut best_ratio = f64::INFINITY;
            for c in 0..self.width {
                let alpha = self.at(r, c);
                if alpha < -PIVOT_TOL {
                    let ratio = self.reduced[c].max(0.0) / -alpha;
                    if ratio < best_ratio {
                        best_ratio = ratio;
                        enter = Some(c);
                    }
                }
            }
            let Some(c) = enter else {
                // Row r reads: nonnegative combination = negative value.
                return Ok(Phase::Infeasible);
            };
            if best_ratio <= self.opt_tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::Invariant("dual simplex exceeded its pivot budget".into()))
    }

    /// Primal simplex on the true costs, from a primal feasible basis.
    fn primal_phase(&mut self, costs: &[f64]) -> Result<()> {
        let cost = |c: usize| costs.get(c).copied().unwrap_or(0.0);
        for c in 0..self.width {
            let mut d = cost(c);
            for r in 0..self.rows {
                let v = self.at(r, c);
                if v != 0.0 {
                    d -= cost(self.basis[r]) * v;
                }
            }
            self.reduced[c] = d;
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut most = -self.opt_tol;
            for c in 0..self.width {
                let d = self.reduced[c];
                if d < -self.opt_tol {
                    if bland {
                        enter = Some(c);
                        break;
                    }
                    if d < most {
                        most = d;
                        enter = Some(c);
                    }
                }
            }
            let Some(c) = enter else {
                return Ok(());
            };
            let mut leave = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.rows {
                let alpha = self.at(r, c);
                if alpha > PIVOT_TOL {
                    let ratio = self.rhs[r].max(0.0) / alpha;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio
                                || (ratio == best_ratio && self.basis[r] < self.basis[l])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::Invariant(
                    "unbounded direction in a capped program".into(),
                ));
            };
            if best_ratio <= self.feas_tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::Invariant("primal simplex exceeded its pivot budget".into()))
    }

    fn primal_values(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs[r];
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_lower_bound() {
        let lp = LinearProgram::new(vec![1.0], 1.0).with_ge(vec![1.0], 0.3);
        let s = solve_lp(&lp, 1e-12).unwrap();
        assert!(s.is_optimal());
        assert_abs_diff_eq!(s.x[0], 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(s.objective_value, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn complete_graph_program() {
        // min 8(x0 + x1) s.t. 16(x0 + x1) >= 4 twice, Σx <= 1
        let lp = LinearProgram::new(vec![8.0, 8.0], 1.0)
            .with_ge(vec![16.0, 16.0], 4.0)
            .with_ge(vec![16.0, 16.0], 4.0);
        let s = solve_lp(&lp, 1e-12).unwrap();
        assert_abs_diff_eq!(s.objective_value, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0] + s.x[1], 0.25, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_over_cap() {
        let lp = LinearProgram::new(vec![1.0], 1.0).with_ge(vec![1.0], 2.0);
        assert_eq!(solve_lp(&lp, 1e-12).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn infeasible_jointly_but_not_per_row() {
        // x0 >= 0.6 and x1 >= 0.6 with x0 + x1 <= 1
        let lp = LinearProgram::new(vec![1.0, 1.0], 1.0)
            .with_ge(vec![1.0, 0.0], 0.6)
            .with_ge(vec![0.0, 1.0], 0.6);
        assert_eq!(solve_lp(&lp, 1e-12).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn boundary_feasible_is_not_rejected() {
        let lp = LinearProgram::new(vec![2.0], 1.0).with_ge(vec![4.0], 4.0);
        let s = solve_lp(&lp, 1e-12).unwrap();
        assert!(s.is_optimal());
        assert_abs_diff_eq!(s.objective_value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn negative_costs_use_the_cap() {
        // maximize x0 + 2 x1 subject to x0 >= 0.2
        let lp = LinearProgram::new(vec![-1.0, -2.0], 1.0).with_ge(vec![1.0, 0.0], 0.2);
        let s = solve_lp(&lp, 1e-12).unwrap();
        assert_abs_diff_eq!(s.objective_value, -1.8, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 0.8, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let nan = LinearProgram::new(vec![f64::NAN], 1.0);
        assert!(matches!(solve_lp(&nan, 1e-9), Err(Error::LpInput(_))));
        let inf = LinearProgram::new(vec![1.0], 1.0).with_ge(vec![f64::INFINITY], 1.0);
        assert!(matches!(solve_lp(&inf, 1e-9), Err(Error::LpInput(_))));
        let ragged = LinearProgram::new(vec![1.0, 1.0], 1.0).with_ge(vec![1.0], 1.0);
        assert!(matches!(solve_lp(&ragged, 1e-9), Err(Error::LpInput(_))));
        let ok = LinearProgram::new(vec![1.0], 1.0);
        assert!(matches!(solve_lp(&ok, 0.0), Err(Error::LpInput(_))));
        assert!(matches!(
            solve_lp(&LinearProgram::new(vec![1.0], 0.0), 1e-9),
            Err(Error::LpInput(_))
        ));
    }

    #[test]
    fn default_tolerance_is_clamped() {
        assert_eq!(default_tolerance(0.5, 100, 10_000), MIN_TOLERANCE);
        assert_abs_diff_eq!(default_tolerance(0.5, 1, 1), 0.25);
    }

    #[test]
    fn no_constraints_means_zero_for_nonnegative_costs() {
        let s = solve_lp(&LinearProgram::new(vec![3.0, 1.0], 2.0), 1e-12).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.objective_value, 0.0);
    }
}
