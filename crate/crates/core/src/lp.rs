//! Exact rational two-phase simplex with Bland's rule.
//!
//! Problems are `maximize c·x` subject to `A_eq x = b_eq`, `A_le x ≤ b_le`, `x ≥ 0`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: Vec<Rational>,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LPProblem {
    n_vars: usize,
    objective: Vec<Rational>,
    equalities: Vec<LinearConstraint>,
    inequalities: Vec<LinearConstraint>,
}

impl LPProblem {
    pub fn new(objective: Vec<Rational>) -> Self {
        Self {
            n_vars: objective.len(),
            objective,
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn equalities(&self) -> &[LinearConstraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[LinearConstraint] {
        &self.inequalities
    }

    fn check_row(&self, coefficients: &[Rational]) -> Result<()> {
        if coefficients.len() != self.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "constraint has {} coefficients, expected {}",
                coefficients.len(),
                self.n_vars
            )));
        }
        Ok(())
    }

    pub fn add_equality(&mut self, coefficients: Vec<Rational>, rhs: Rational) -> Result<()> {
        self.check_row(&coefficients)?;
        self.equalities.push(LinearConstraint { coefficients, rhs });
        Ok(())
    }

    pub fn add_inequality(&mut self, coefficients: Vec<Rational>, rhs: Rational) -> Result<()> {
        self.check_row(&coefficients)?;
        self.inequalities.push(LinearConstraint { coefficients, rhs });
        Ok(())
    }

    fn rows(&self) -> impl Iterator<Item = &LinearConstraint> {
        self.equalities.iter().chain(&self.inequalities)
    }
}

/// Optimal primal and dual solutions. `dual` lists equality multipliers first, then
/// inequality multipliers.
#[derive(Clone, Debug, PartialEq)]
pub struct LPSolution {
    pub value: Rational,
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
    pub pivots: usize,
}

pub fn simplex_solve(lp: &LPProblem) -> Result<LPSolution> {
    let mut tableau = Tableau::standard_form(lp);
    tableau.phase_one()?;
    tableau.phase_two(lp)?;
    let primal = tableau.primal(lp.n_vars);
    let dual = tableau.dual(lp)?;
    let value = dot(&lp.objective, &primal);
    verify_certificate(lp, &primal, &dual)?;
    Ok(LPSolution {
        value,
        primal,
        dual,
        pivots: tableau.pivots,
    })
}

/// Checks primal feasibility, dual feasibility (`A^T y ≥ c`, inequality multipliers ≥ 0),
/// complementary slackness, and `c·x = b·y`, all in exact arithmetic.
pub fn verify_certificate(lp: &LPProblem, primal: &[Rational], dual: &[Rational]) -> Result<()> {
    let fail = |msg: String| Err(Error::Certificate(msg));
    let m_eq = lp.equalities.len();
    if primal.len() != lp.n_vars || dual.len() != m_eq + lp.inequalities.len() {
        return fail("certificate has wrong length".into());
    }
    if let Some(j) = primal.iter().position(Signed::is_negative) {
        return fail(format!("x[{j}] is negative"));
    }
    for (i, row) in lp.equalities.iter().enumerate() {
        if dot(&row.coefficients, primal) != row.rhs {
            return fail(format!("equality {i} violated"));
        }
    }
    for (i, row) in lp.inequalities.iter().enumerate() {
        let lhs = dot(&row.coefficients, primal);
        if lhs > row.rhs {
            return fail(format!("inequality {i} violated"));
        }
        let y = &dual[m_eq + i];
        if y.is_negative() {
            return fail(format!("multiplier of inequality {i} is negative"));
        }
        if !y.is_zero() && lhs != row.rhs {
            return fail(format!("inequality {i} is slack but has a positive multiplier"));
        }
    }
    for j in 0..lp.n_vars {
        let reduced: Rational = lp
            .rows()
            .zip(dual)
            .filter(|(_, y)| !y.is_zero())
            .map(|(row, y)| &row.coefficients[j] * y)
            .sum::<Rational>()
            - &lp.objective[j];
        if reduced.is_negative() {
            return fail(format!("dual constraint {j} violated"));
        }
        if !reduced.is_zero() && !primal[j].is_zero() {
            return fail(format!("x[{j}] is positive but its dual constraint is slack"));
        }
    }
    let dual_value: Rational = lp.rows().zip(dual).map(|(row, y)| &row.rhs * y).sum();
    if dual_value != dot(&lp.objective, primal) {
        return fail("primal and dual objectives differ".into());
    }
    Ok(())
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(u, v)| !u.is_zero() && !v.is_zero())
        .map(|(u, v)| u * v)
        .sum()
}

/// Dense tableau over columns `[x | slacks | artificials]`.
struct Tableau {
    /// Constraint rows; last entry is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Index of the original constraint each row came from.
    origin: Vec<usize>,
    /// True when the row was negated to make its right-hand side nonnegative.
    sign: Vec<bool>,
    basis: Vec<usize>,
    /// Reduced costs `z_j - c_j`; last entry is the current objective value.
    cost: Vec<Rational>,
    n_structural: usize,
    n_total: usize,
    pivots: usize,
}

impl Tableau {
    fn standard_form(lp: &LPProblem) -> Self {
        let m_eq = lp.equalities.len();
        let m = m_eq + lp.inequalities.len();
        let n_structural = lp.n_vars + lp.inequalities.len();
        let n_total = n_structural + m;
        let mut rows = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        for (i, row) in lp.rows().enumerate() {
            let mut r = vec![Rational::zero(); n_total + 1];
            r[..lp.n_vars].clone_from_slice(&row.coefficients);
            if i >= m_eq {
                r[lp.n_vars + i - m_eq] = Rational::from_integer(1.into());
            }
            r[n_total] = row.rhs.clone();
            let negate = row.rhs.is_negative();
            if negate {
                for v in r.iter_mut() {
                    *v = -&*v;
                }
            }
            r[n_structural + i] = Rational::from_integer(1.into());
            rows.push(r);
            sign.push(negate);
        }
        Self {
            rows,
            origin: (0..m).collect(),
            sign,
            basis: (n_structural..n_total).collect(),
            cost: vec![Rational::zero(); n_total + 1],
            n_structural,
            n_total,
            pivots: 0,
        }
    }

    /// Sets reduced costs for `maximize sum_j c_j x_j` given the current basis.
    fn price(&mut self, c: &[Rational]) {
        let mut cost: Vec<Rational> = (0..=self.n_total)
            .map(|j| if j < c.len() { -&c[j] } else { Rational::zero() })
            .collect();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = c.get(b).cloned().unwrap_or_else(Rational::zero);
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    cost[j] += &cb * v;
                }
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, r: usize, col: usize) {
        self.pivots += 1;
        let inv = self.rows[r][col].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |target: &mut Vec<Rational>| {
            let f = target[col].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nonzero {
                target[j] -= &f * &pivot_row[j];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[r] = pivot_row;
        self.basis[r] = col;
    }

    /// Bland's rule on columns `< allowed`. Returns `Ok(false)` at optimality.
    fn step(&mut self, allowed: usize) -> Result<bool> {
        let Some(col) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
            return Ok(false);
        };
        let rhs = self.n_total;
        let mut leave: Option<(usize, Rational)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if !row[col].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[col];
            let better = match &leave {
                None => true,
                Some((best, q)) => ratio < *q || (ratio == *q && self.basis[r] < self.basis[*best]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Unbounded);
        };
        self.pivot(r, col);
        Ok(true)
    }

    fn phase_one(&mut self) -> Result<()> {
        let mut c = vec![Rational::zero(); self.n_total];
        for v in &mut c[self.n_structural..] {
            *v = Rational::from_integer((-1).into());
        }
        self.price(&c);
        while self.step(self.n_total)? {}
        if self.cost[self.n_total].is_negative() {
            return Err(Error::Infeasible);
        }
        // Drive remaining artificials out; rows with no structural entry are redundant.
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.n_structural {
                r += 1;
                continue;
            }
            match (0..self.n_structural).find(|&j| !self.rows[r][j].is_zero()) {
                Some(col) => {
                    self.pivot(r, col);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                    self.origin.remove(r);
                    self.sign.remove(r);
                }
            }
        }
        Ok(())
    }

    fn phase_two(&mut self, lp: &LPProblem) -> Result<()> {
        self.price(&lp.objective);
        while self.step(self.n_structural)? {}
        Ok(())
    }

    fn primal(&self, n_vars: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < n_vars {
                x[b] = self.rows[r][self.n_total].clone();
            }
        }
        x
    }

    /// Solves `B^T y = c_B` over the surviving rows; dropped rows get multiplier 0.
    fn dual(&self, lp: &LPProblem) -> Result<Vec<Rational>> {
        let m = self.rows.len();
        let column = |j: usize, origin: usize, negated: bool| -> Rational {
            let m_eq = lp.equalities.len();
            let v = if j < lp.n_vars {
                lp.rows().nth(origin).expect("row exists").coefficients[j].clone()
            } else if origin >= m_eq && j - lp.n_vars == origin - m_eq {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            };
            if negated {
                -v
            } else {
                v
            }
        };
        // Augmented system: row k is basis column k, unknowns are the surviving rows.
        let mut system: Vec<Vec<Rational>> = self
            .basis
            .iter()
            .map(|&j| {
                let mut eq: Vec<Rational> = (0..m).map(|i| column(j, self.origin[i], self.sign[i])).collect();
                eq.push(lp.objective.get(j).cloned().unwrap_or_else(Rational::zero));
                eq
            })
            .collect();
        let y = solve_square(&mut system).ok_or_else(|| Error::Certificate("singular basis".into()))?;
        let mut dual = vec![Rational::zero(); lp.equalities.len() + lp.inequalities.len()];
        for (i, v) in y.into_iter().enumerate() {
            dual[self.origin[i]] = if self.sign[i] { -v } else { v };
        }
        Ok(dual)
    }
}

/// Gauss-Jordan on an `m x (m+1)` augmented system; `None` if singular.
fn solve_square(a: &mut [Vec<Rational>]) -> Option<Vec<Rational>> {
    let m = a.len();
    for col in 0..m {
        let p = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        let pivot = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
    }
    Some(a.iter().map(|row| row[m].clone()).collect())
}
