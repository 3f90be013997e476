//! Exact linear programming over the rationals.
//!
//! Dense two-phase tableau simplex with Bland's rule. Every pivot is exact,
//! so "infeasible" and "optimal" are decisions, not tolerances. Sizes here
//! are desk scale (a handful of rows and columns), which a dense tableau
//! handles comfortably.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        point: Vec<Rational>,
        value: Rational,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn point(self) -> Option<Vec<Rational>> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

/// `maximize objective . x` subject to the constraints. Variables are free
/// unless marked non-negative.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    vars: usize,
    nonneg: Vec<bool>,
    constraints: Vec<Constraint>,
    objective: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            nonneg: vec![false; vars],
            constraints: Vec::new(),
            objective: vec![Rational::zero(); vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn nonnegative(mut self, var: usize) -> Self {
        self.nonneg[var] = true;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.vars, "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn maximize(mut self, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), self.vars, "objective width");
        self.objective = objective;
        self
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Whether `point` satisfies every constraint and sign restriction.
    pub fn admits(&self, point: &[Rational]) -> bool {
        point.len() == self.vars
            && self
                .nonneg
                .iter()
                .zip(point)
                .all(|(&nn, v)| !nn || !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs = crate::rational::dot(&c.coeffs, point);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

/// Column map from original variables to standard-form columns.
#[derive(Debug, Clone, Copy)]
struct VarColumns {
    pos: usize,
    neg: Option<usize>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    columns: Vec<VarColumns>,
    structural: usize,
    total: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut columns = Vec::with_capacity(lp.vars);
        let mut next = 0;
        for &nn in &lp.nonneg {
            let pos = next;
            next += 1;
            let neg = (!nn).then(|| {
                next += 1;
                next - 1
            });
            columns.push(VarColumns { pos, neg });
        }
        let slack_start = next;
        let slack_count = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let structural = slack_start + slack_count;
        let m = lp.constraints.len();
        let total = structural + m;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut slack = slack_start;
        for (r, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); total];
            for (v, coef) in c.coeffs.iter().enumerate() {
                let cols = columns[v];
                row[cols.pos] = coef.clone();
                if let Some(neg) = cols.neg {
                    row[neg] = -coef.clone();
                }
            }
            match c.relation {
                Relation::Le => {
                    row[slack] = Rational::from_integer(1.into());
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = Rational::from_integer((-1).into());
                    slack += 1;
                }
                Relation::Eq => {}
            }
            let mut b = c.rhs.clone();
            if b.is_negative() {
                row.iter_mut().for_each(|x| *x = -x.clone());
                b = -b;
            }
            row[structural + r] = Rational::from_integer(1.into());
            rows.push(row);
            rhs.push(b);
        }
        Tableau {
            rows,
            rhs,
            basis: (structural..total).collect(),
            columns,
            structural,
            total,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            *x = &*x * &inv;
        }
        self.rhs[row] = &self.rhs[row] * &inv;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for (x, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = &*x - &factor * p;
                }
            }
            self.rhs[r] = &self.rhs[r] - &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost` over columns `< allowed`. Returns `false` when
    /// unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced =
                    self.basis
                        .iter()
                        .zip(&self.rows)
                        .fold(cost[j].clone(), |acc, (&b, row)| {
                            if row[j].is_zero() || cost[b].is_zero() {
                                acc
                            } else {
                                acc - &cost[b] * &row[j]
                            }
                        });
                reduced.is_positive()
            });
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leave {
                    None => true,
                    Some((best_r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        // phase one: drive the artificial columns to zero
        let mut phase_one = vec![Rational::zero(); self.total];
        for c in phase_one.iter_mut().skip(self.structural) {
            *c = Rational::from_integer((-1).into());
        }
        self.optimize(&phase_one, self.total);
        let infeasibility: Rational = self
            .basis
            .iter()
            .zip(&self.rhs)
            .filter(|(&b, _)| b >= self.structural)
            .map(|(_, v)| v.clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }

        // pivot zero-valued artificials out of the basis; drop redundant rows
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.structural {
                match (0..self.structural).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(col) => self.pivot(r, col),
                    None => {
                        self.rows.remove(r);
                        self.rhs.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        let mut cost = vec![Rational::zero(); self.total];
        for (v, cols) in self.columns.iter().enumerate() {
            cost[cols.pos] = lp.objective[v].clone();
            if let Some(neg) = cols.neg {
                cost[neg] = -lp.objective[v].clone();
            }
        }
        if !self.optimize(&cost, self.structural) {
            return LpOutcome::Unbounded;
        }

        let mut values = vec![Rational::zero(); self.total];
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            values[b] = v.clone();
        }
        let point: Vec<Rational> = self
            .columns
            .iter()
            .map(|cols| match cols.neg {
                Some(neg) => &values[cols.pos] - &values[neg],
                None => values[cols.pos].clone(),
            })
            .collect();
        let value = crate::rational::dot(&lp.objective, &point);
        LpOutcome::Optimal { point, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18, x,y >= 0 -> (2, 6), 36
        let mut lp = LinearProgram::new(2)
            .nonnegative(0)
            .nonnegative(1)
            .maximize(ints(&[3, 5]));
        lp.constrain(ints(&[1, 0]), Relation::Le, int(4));
        lp.constrain(ints(&[0, 2]), Relation::Le, int(12));
        lp.constrain(ints(&[3, 2]), Relation::Le, int(18));
        assert_eq!(
            lp.solve(),
            LpOutcome::Optimal {
                point: ints(&[2, 6]),
                value: int(36)
            }
        );
    }

    #[test]
    fn free_variables_and_fractional_optimum() {
        // max x + y with x + 2y = 1, 3x - y = 1 -> x = 3/7, y = 2/7
        let mut lp = LinearProgram::new(2).maximize(ints(&[1, 1]));
        lp.constrain(ints(&[1, 2]), Relation::Eq, int(1));
        lp.constrain(ints(&[3, -1]), Relation::Eq, int(1));
        let point = lp.solve().point().unwrap();
        assert_eq!(point, vec![ratio(3, 7), ratio(2, 7)]);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constrain(ints(&[1]), Relation::Ge, int(2));
        lp.constrain(ints(&[1]), Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(1).maximize(ints(&[1]));
        lp.constrain(ints(&[1]), Relation::Ge, int(-3));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(2).maximize(ints(&[0, 1]));
        lp.constrain(ints(&[1, 1]), Relation::Eq, int(2));
        lp.constrain(ints(&[2, 2]), Relation::Eq, int(4));
        lp.constrain(ints(&[1, 0]), Relation::Ge, int(0));
        let point = lp.solve().point().unwrap();
        assert_eq!(point, ints(&[0, 2]));
        assert!(lp.admits(&point));
    }

    #[test]
    fn negative_right_hand_sides() {
        let mut lp = LinearProgram::new(2);
        lp.constrain(ints(&[1, 1]), Relation::Eq, int(-1));
        lp.constrain(ints(&[1, 0]), Relation::Ge, int(0));
        lp.constrain(ints(&[0, 1]), Relation::Le, int(-1));
        let point = lp.solve().point().unwrap();
        assert!(lp.admits(&point));
    }
}
