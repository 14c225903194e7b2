//! Small dense two-phase simplex solver.
//!
//! Intended for the game LPs solved here: tens of variables, tens of rows.
//! Uses a full tableau and Bland's rule, so it never cycles on degenerate
//! problems (which the game LPs routinely are).

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective·x` subject to the constraints and per-variable bounds.
/// Bounds may be infinite; `(f64::NEG_INFINITY, f64::INFINITY)` is a free
/// variable. Minimize by negating the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// A program over `n` nonnegative variables with no constraints yet.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn constrain(mut self, coefficients: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        self.constraints.push(Constraint {
            coefficients,
            sense,
            rhs,
        });
        self
    }

    pub fn bound(mut self, var: usize, lower: f64, upper: f64) -> Self {
        self.bounds[var] = (lower, upper);
        self
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn infeasibility(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| {
            let lhs: f64 = c.coefficients.iter().zip(x).map(|(a, b)| a * b).sum();
            match c.sense {
                Sense::Le => (lhs - c.rhs).max(0.0),
                Sense::Ge => (c.rhs - lhs).max(0.0),
                Sense::Eq => (lhs - c.rhs).abs(),
            }
        });
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(l, u), &v)| (l - v).max(v - u).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(LpError::Malformed(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coefficients.len()
                )));
            }
            if !c.rhs.is_finite() || c.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!("constraint {i} is not finite")));
            }
        }
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!(
                    "variable {j} has bounds [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub values: Vec<f64>,
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + s
    Shifted { col: usize, offset: f64 },
    /// x = offset - s
    Mirrored { col: usize, offset: f64 },
    /// x = s⁺ - s⁻
    Split { pos: usize, neg: usize },
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;

    let mut maps = Vec::with_capacity(lp.objective.len());
    let mut std_cols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(l, u) in &lp.bounds {
        let map = if l.is_finite() {
            if u.is_finite() {
                extra_rows.push((std_cols, u - l));
            }
            VarMap::Shifted {
                col: std_cols,
                offset: l,
            }
        } else if u.is_finite() {
            VarMap::Mirrored {
                col: std_cols,
                offset: u,
            }
        } else {
            std_cols += 1;
            VarMap::Split {
                pos: std_cols - 1,
                neg: std_cols,
            }
        };
        std_cols += 1;
        maps.push(map);
    }

    // Rows in terms of standard columns: (coefficients, sense, rhs).
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; std_cols];
        let mut rhs = c.rhs;
        for (a, map) in c.coefficients.iter().zip(&maps) {
            match *map {
                VarMap::Shifted { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirrored { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.sense, rhs));
    }
    for (col, width) in extra_rows {
        let mut coeffs = vec![0.0; std_cols];
        coeffs[col] = 1.0;
        rows.push((coeffs, Sense::Le, width));
    }
    let mut std_obj = vec![0.0; std_cols];
    let mut obj_offset = 0.0;
    for (c, map) in lp.objective.iter().zip(&maps) {
        match *map {
            VarMap::Shifted { col, offset } => {
                std_obj[col] += c;
                obj_offset += c * offset;
            }
            VarMap::Mirrored { col, offset } => {
                std_obj[col] -= c;
                obj_offset += c * offset;
            }
            VarMap::Split { pos, neg } => {
                std_obj[pos] += c;
                std_obj[neg] -= c;
            }
        }
    }

    let std_values = solve_standard(&std_obj, rows)?;

    let values: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, offset } => offset + std_values[col],
            VarMap::Mirrored { col, offset } => offset - std_values[col],
            VarMap::Split { pos, neg } => std_values[pos] - std_values[neg],
        })
        .collect();
    let objective = std_obj
        .iter()
        .zip(&std_values)
        .map(|(c, x)| c * x)
        .sum::<f64>()
        + obj_offset;
    Ok(LpSolution { objective, values })
}

struct Tableau {
    /// m rows of `cols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Maximize `cost·x` over columns `< usable` with Bland's rule.
    fn optimize(&mut self, cost: &[f64], usable: usize) -> Result<(), LpError> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..usable).find(|&j| {
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, row)| cost[b] * row[j])
                        .sum::<f64>();
                reduced > 1e-10
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[j];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, j);
        }
        Err(LpError::IterationLimit(MAX_PIVOTS))
    }
}

/// Maximize `obj·x`, `x ≥ 0`, subject to `rows`.
fn solve_standard(obj: &[f64], rows: Vec<(Vec<f64>, Sense, f64)>) -> Result<Vec<f64>, LpError> {
    let n = obj.len();
    let m = rows.len();
    if m == 0 {
        return if obj.iter().any(|&c| c > 0.0) {
            Err(LpError::Unbounded)
        } else {
            Ok(vec![0.0; n])
        };
    }

    // Normalize to nonnegative right-hand sides.
    let rows: Vec<(Vec<f64>, Sense, f64)> = rows
        .into_iter()
        .map(|(a, s, b)| {
            if b < 0.0 {
                let flipped = match s {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (a.into_iter().map(|v| -v).collect(), flipped, -b)
            } else {
                (a, s, b)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let real = n + n_slack;
    let cols = real + n_art;

    let mut tableau = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        cols,
    };
    let (mut s_idx, mut a_idx) = (n, real);
    for (a, sense, b) in rows {
        let mut row = vec![0.0; cols + 1];
        row[..n].copy_from_slice(&a);
        row[cols] = b;
        match sense {
            Sense::Le => {
                row[s_idx] = 1.0;
                tableau.basis.push(s_idx);
                s_idx += 1;
            }
            Sense::Ge => {
                row[s_idx] = -1.0;
                s_idx += 1;
                row[a_idx] = 1.0;
                tableau.basis.push(a_idx);
                a_idx += 1;
            }
            Sense::Eq => {
                row[a_idx] = 1.0;
                tableau.basis.push(a_idx);
                a_idx += 1;
            }
        }
        tableau.rows.push(row);
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        phase1[real..].iter_mut().for_each(|c| *c = -1.0);
        tableau.optimize(&phase1, cols)?;
        let infeasibility: f64 = tableau
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b >= real)
            .map(|(i, _)| tableau.rhs(i))
            .sum();
        if infeasibility > 1e-9 {
            return Err(LpError::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis; rows
        // where that is impossible are redundant and dropped.
        let mut i = 0;
        while i < tableau.rows.len() {
            if tableau.basis[i] >= real {
                match (0..real).find(|&j| tableau.rows[i][j].abs() > 1e-9) {
                    Some(j) => tableau.pivot(i, j),
                    None => {
                        tableau.rows.remove(i);
                        tableau.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(obj);
    tableau.optimize(&phase2, real)?;

    let mut x = vec![0.0; n];
    for (i, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            x[b] = tableau.rhs(i).max(0.0);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_upper_bound() {
        let lp = LinearProgram::maximize(vec![1.0]).constrain(vec![1.0], Sense::Le, 3.0);
        let s = simplex_solve(&lp).unwrap();
        assert_abs_diff_eq!(s.objective, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn textbook_two_variable() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = LinearProgram::maximize(vec![3.0, 5.0])
            .constrain(vec![1.0, 0.0], Sense::Le, 4.0)
            .constrain(vec![0.0, 2.0], Sense::Le, 12.0)
            .constrain(vec![3.0, 2.0], Sense::Le, 18.0);
        let s = simplex_solve(&lp).unwrap();
        assert_abs_diff_eq!(s.objective, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.values[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.values[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn ge_and_eq_rows_with_minimization() {
        // min x + y s.t. x + 2y >= 4, x - y = 1 -> x = 2, y = 1
        let lp = LinearProgram::maximize(vec![-1.0, -1.0])
            .constrain(vec![1.0, 2.0], Sense::Ge, 4.0)
            .constrain(vec![1.0, -1.0], Sense::Eq, 1.0);
        let s = simplex_solve(&lp).unwrap();
        assert_abs_diff_eq!(s.objective, -3.0, epsilon = 1e-9);
        assert!(lp.infeasibility(&s.values) < 1e-9);
    }

    #[test]
    fn free_and_bounded_variables() {
        // max -|x - 2| style: max t, t <= x - 2, t <= 2 - x, x in [-5, 1]
        let lp = LinearProgram::maximize(vec![0.0, 1.0])
            .constrain(vec![-1.0, 1.0], Sense::Le, -2.0)
            .constrain(vec![1.0, 1.0], Sense::Le, 2.0)
            .bound(0, -5.0, 1.0)
            .bound(1, f64::NEG_INFINITY, f64::INFINITY);
        let s = simplex_solve(&lp).unwrap();
        assert_abs_diff_eq!(s.objective, -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.values[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn upper_bounded_only_variable() {
        let lp = LinearProgram::maximize(vec![-1.0]).bound(0, f64::NEG_INFINITY, 4.0);
        assert_eq!(simplex_solve(&lp), Err(LpError::Unbounded));
        let lp = LinearProgram::maximize(vec![1.0]).bound(0, f64::NEG_INFINITY, 4.0);
        assert_abs_diff_eq!(simplex_solve(&lp).unwrap().values[0], 4.0);
    }

    #[test]
    fn infeasible_reported() {
        let lp = LinearProgram::maximize(vec![1.0])
            .constrain(vec![1.0], Sense::Le, 1.0)
            .constrain(vec![1.0], Sense::Ge, 2.0);
        assert_eq!(simplex_solve(&lp), Err(LpError::Infeasible));
    }

    #[test]
    fn unbounded_reported() {
        let lp = LinearProgram::maximize(vec![1.0, 1.0]).constrain(vec![1.0, -1.0], Sense::Le, 1.0);
        assert_eq!(simplex_solve(&lp), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram::maximize(vec![1.0, 2.0])
            .constrain(vec![1.0, 1.0], Sense::Eq, 1.0)
            .constrain(vec![2.0, 2.0], Sense::Eq, 2.0);
        let s = simplex_solve(&lp).unwrap();
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_klee_minty_like_cycles_not() {
        // Beale's classic cycling example (cycles under Dantzig's rule).
        let lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0])
            .constrain(vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0)
            .constrain(vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0)
            .constrain(vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0);
        let s = simplex_solve(&lp).unwrap();
        assert_abs_diff_eq!(s.objective, 0.05, epsilon = 1e-9);
    }

    #[test]
    fn malformed_rejected() {
        let lp = LinearProgram::maximize(vec![1.0]).constrain(vec![1.0, 2.0], Sense::Le, 1.0);
        assert!(matches!(simplex_solve(&lp), Err(LpError::Malformed(_))));
    }
}
