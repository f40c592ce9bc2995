//! Dense-tableau two-phase simplex with Bland's anti-cycling rule.
//!
//! Small and deterministic; the LP engine uses it directly on the dual
//! programs at moderate sizes and as a cross-check for the specialized
//! chain solver at every size the tests exercise.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintOp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub op: ConstraintOp,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, op: ConstraintOp, rhs: f64) -> Self {
        Constraint { coeffs, op, rhs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Values of the caller's variables.
    pub solution: Vec<f64>,
    /// One multiplier per constraint row (sign convention: y_i such that
    /// the Lagrangian uses + y_i (b_i - A_i x)).
    pub duals: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-9;

/// Minimize c.x subject to the constraints; variables listed in
/// `free_vars` may take any sign, all others are nonnegative.
pub fn solve_lp(c: &[f64], constraints: &[Constraint], free_vars: &[usize]) -> Result<LpSolution> {
    let n_orig = c.len();
    for (i, con) in constraints.iter().enumerate() {
        if con.coeffs.len() != n_orig {
            return Err(Error::MalformedSpec(format!(
                "constraint {i} has {} coefficients, expected {n_orig}",
                con.coeffs.len()
            )));
        }
    }
    if c.iter().any(|v| !v.is_finite())
        || constraints
            .iter()
            .any(|r| !r.rhs.is_finite() || r.coeffs.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::MalformedSpec("non-finite LP coefficient".into()));
    }

    // split free variables into x+ - x-
    let is_free: Vec<bool> = {
        let mut f = vec![false; n_orig];
        for &j in free_vars {
            f[j] = true;
        }
        f
    };
    let neg_col: Vec<Option<usize>> = {
        let mut next = n_orig;
        (0..n_orig)
            .map(|j| {
                if is_free[j] {
                    let c = next;
                    next += 1;
                    Some(c)
                } else {
                    None
                }
            })
            .collect()
    };
    let n_split = n_orig + free_vars.len();

    let m = constraints.len();
    // columns: split vars | slacks/surpluses | artificials | rhs
    let mut n_slack = 0usize;
    for con in constraints {
        if con.op != ConstraintOp::Eq {
            n_slack += 1;
        }
    }
    let n_art = m; // one designated +e_i column per row (slack or artificial)
    let total = n_split + n_slack + n_art;

    let mut tab = vec![vec![0.0f64; total + 1]; m + 1];
    let mut basis = vec![0usize; m];
    let mut unit_col = vec![0usize; m]; // the +e_i column used to read duals
    let mut art_cols: Vec<usize> = Vec::new();

    let mut slack_at = n_split;
    let art_base = n_split + n_slack;
    for (i, con) in constraints.iter().enumerate() {
        let flip = con.rhs < 0.0;
        let sgn = if flip { -1.0 } else { 1.0 };
        let op = if !flip {
            con.op
        } else {
            match con.op {
                ConstraintOp::Le => ConstraintOp::Ge,
                ConstraintOp::Ge => ConstraintOp::Le,
                ConstraintOp::Eq => ConstraintOp::Eq,
            }
        };
        for j in 0..n_orig {
            tab[i][j] = sgn * con.coeffs[j];
            if let Some(nc) = neg_col[j] {
                tab[i][nc] = -sgn * con.coeffs[j];
            }
        }
        tab[i][total] = sgn * con.rhs;
        match op {
            ConstraintOp::Le => {
                tab[i][slack_at] = 1.0;
                basis[i] = slack_at;
                unit_col[i] = slack_at;
                slack_at += 1;
            }
            ConstraintOp::Ge => {
                tab[i][slack_at] = -1.0;
                slack_at += 1;
                let a = art_base + i;
                tab[i][a] = 1.0;
                basis[i] = a;
                unit_col[i] = a;
                art_cols.push(a);
            }
            ConstraintOp::Eq => {
                let a = art_base + i;
                tab[i][a] = 1.0;
                basis[i] = a;
                unit_col[i] = a;
                art_cols.push(a);
            }
        }
    }

    let mut iterations = 0usize;
    let rhs_scale: f64 = constraints.iter().map(|c| c.rhs.abs()).sum::<f64>() + 1.0;

    // phase 1: drive artificials to zero
    if !art_cols.is_empty() {
        for j in 0..=total {
            tab[m][j] = 0.0;
        }
        for &a in &art_cols {
            tab[m][a] = 1.0;
        }
        // price out the basic artificials
        for i in 0..m {
            if art_cols.contains(&basis[i]) {
                for j in 0..=total {
                    tab[m][j] -= tab[i][j];
                }
            }
        }
        let allowed = |_j: usize| true;
        if !pivot_loop(&mut tab, &mut basis, total, allowed, &mut iterations)? {
            return Err(Error::Unbounded("phase 1 unbounded".into()));
        }
        if tab[m][total].abs() > FEAS_EPS * rhs_scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                solution: vec![0.0; n_orig],
                duals: vec![0.0; m],
                iterations,
            });
        }
        // drive any artificial still in the basis out of it
        for i in 0..m {
            if art_cols.contains(&basis[i]) {
                let pivot_col = (0..art_base).find(|&j| tab[i][j].abs() > PIVOT_EPS);
                if let Some(j) = pivot_col {
                    pivot(&mut tab, i, j);
                    basis[i] = j;
                }
                // else the row is all zero: redundant constraint, harmless
            }
        }
    }

    // phase 2: true objective (artificials may not re-enter)
    for j in 0..=total {
        tab[m][j] = 0.0;
    }
    for j in 0..n_orig {
        tab[m][j] = c[j];
        if let Some(nc) = neg_col[j] {
            tab[m][nc] = -c[j];
        }
    }
    for i in 0..m {
        let cb = tab[m][basis[i]];
        if cb != 0.0 {
            for j in 0..=total {
                tab[m][j] -= cb * tab[i][j];
            }
        }
    }
    let art_set: Vec<bool> = {
        let mut v = vec![false; total];
        for &a in &art_cols {
            v[a] = true;
        }
        v
    };
    let allowed = |j: usize| !art_set[j];
    if !pivot_loop(&mut tab, &mut basis, total, allowed, &mut iterations)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective: f64::NEG_INFINITY,
            solution: vec![0.0; n_orig],
            duals: vec![0.0; m],
            iterations,
        });
    }

    let mut full = vec![0.0f64; total];
    for i in 0..m {
        full[basis[i]] = tab[i][total];
    }
    let mut solution = vec![0.0f64; n_orig];
    for j in 0..n_orig {
        solution[j] = full[j] - neg_col[j].map_or(0.0, |nc| full[nc]);
    }
    // duals from the reduced cost of each row's designated unit column
    let duals: Vec<f64> = (0..m).map(|i| -tab[m][unit_col[i]]).collect();
    let objective = -tab[m][total];

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective,
        solution,
        duals,
        iterations,
    })
}

/// Bland's rule pivoting until optimal. Returns false when unbounded.
fn pivot_loop<F: Fn(usize) -> bool>(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    total: usize,
    allowed: F,
    iterations: &mut usize,
) -> Result<bool> {
    let m = tab.len() - 1;
    let max_iter = 50_000 + 200 * (m + total);
    loop {
        // entering: smallest index with negative reduced cost
        let entering = (0..total).find(|&j| allowed(j) && tab[m][j] < -FEAS_EPS);
        let Some(col) = entering else {
            return Ok(true);
        };
        // leaving: min ratio, ties by smallest basis index (Bland)
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..m {
            let a = tab[i][col];
            if a > PIVOT_EPS {
                let ratio = tab[i][total] / a;
                match best {
                    None => best = Some((ratio, basis[i], i)),
                    Some((r, b, _)) => {
                        if ratio < r - PIVOT_EPS || (ratio < r + PIVOT_EPS && basis[i] < b) {
                            best = Some((ratio, basis[i], i));
                        }
                    }
                }
            }
        }
        let Some((_, _, row)) = best else {
            return Ok(false);
        };
        pivot(tab, row, col);
        basis[row] = col;
        *iterations += 1;
        if *iterations > max_iter {
            return Err(Error::Infeasible(
                "simplex iteration cap exceeded (cycling?)".into(),
            ));
        }
    }
}

fn pivot(tab: &mut [Vec<f64>], row: usize, col: usize) {
    let cols = tab[row].len();
    let pv = tab[row][col];
    for j in 0..cols {
        tab[row][j] /= pv;
    }
    for i in 0..tab.len() {
        if i != row {
            let factor = tab[i][col];
            if factor != 0.0 {
                for j in 0..cols {
                    tab[i][j] -= factor * tab[row][j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_bound() {
        // min x s.t. x >= 3
        let sol = solve_lp(
            &[1.0],
            &[Constraint::new(vec![1.0], ConstraintOp::Ge, 3.0)],
            &[],
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.objective, 3.0, epsilon = 1e-9);
        assert_relative_eq!(sol.solution[0], 3.0, epsilon = 1e-9);
    }

    #[test]
    fn vertex_selection() {
        // min z1 + 2 z2 s.t. z >= 0, z1 + z2 = 1 -> 1 at (1, 0)
        let sol = solve_lp(
            &[1.0, 2.0],
            &[Constraint::new(vec![1.0, 1.0], ConstraintOp::Eq, 1.0)],
            &[],
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.objective, 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.solution[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.solution[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x <= 1 and x >= 2
        let sol = solve_lp(
            &[1.0],
            &[
                Constraint::new(vec![1.0], ConstraintOp::Le, 1.0),
                Constraint::new(vec![1.0], ConstraintOp::Ge, 2.0),
            ],
            &[],
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -x s.t. x >= 0 (no upper bound)
        let sol = solve_lp(
            &[-1.0],
            &[Constraint::new(vec![1.0], ConstraintOp::Ge, 0.0)],
            &[],
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_goes_negative() {
        // min x s.t. x >= -5, x free
        let sol = solve_lp(
            &[1.0],
            &[Constraint::new(vec![1.0], ConstraintOp::Ge, -5.0)],
            &[0],
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.objective, -5.0, epsilon = 1e-9);
    }

    #[test]
    fn duals_and_complementary_slackness() {
        // min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  (classic)
        let cons = vec![
            Constraint::new(vec![1.0, 0.0], ConstraintOp::Le, 4.0),
            Constraint::new(vec![0.0, 2.0], ConstraintOp::Le, 12.0),
            Constraint::new(vec![3.0, 2.0], ConstraintOp::Le, 18.0),
        ];
        let sol = solve_lp(&[-3.0, -5.0], &cons, &[]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.objective, -36.0, epsilon = 1e-9);
        assert_relative_eq!(sol.solution[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(sol.solution[1], 6.0, epsilon = 1e-9);
        // feasibility within 1e-9 and complementary slackness within 1e-7
        for (con, &y) in cons.iter().zip(&sol.duals) {
            let ax: f64 = con
                .coeffs
                .iter()
                .zip(&sol.solution)
                .map(|(a, x)| a * x)
                .sum();
            assert!(ax <= con.rhs + 1e-9);
            assert!((y * (con.rhs - ax)).abs() <= 1e-7);
        }
        // strong duality: y.b equals the optimum
        let yb: f64 = sol
            .duals
            .iter()
            .zip(cons.iter())
            .map(|(y, c)| y * c.rhs)
            .sum();
        assert_relative_eq!(yb, sol.objective, epsilon = 1e-7);
    }
}
