//! Dense two-phase simplex over exact rationals.
//!
//! All variables are nonnegative. Pivoting follows Bland's rule (lowest
//! eligible column enters, ties in the ratio test go to the lowest basic
//! variable), so the method terminates and is deterministic.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, solution: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Is `x` feasible (exactly)?
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    /// `rows[r]` has `cols + 1` entries; the last one is the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
    num_vars: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        // Normalize to nonnegative right-hand sides.
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let slack_count = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let artificial_count = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let artificial_start = n + slack_count;
        let cols = artificial_start + artificial_count;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack, mut artificial) = (n, artificial_start);
        for (coeffs, relation, rhs) in normalized {
            let mut row = vec![Rational::zero(); cols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[cols] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
                Relation::Eq => {
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            cols,
            num_vars: n,
            artificial_start,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &(&factor * p);
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over columns `< allowed_cols`. Returns false if
    /// the objective is unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed_cols: usize) -> bool {
        loop {
            let entering = (0..allowed_cols).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        reduced -= &(&cost[b] * &row[j]);
                    }
                }
                reduced.is_positive()
            });
            let Some(c) = entering else { return true };
            let mut leaving: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[c];
                let better = match &leaving {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let has_artificial = self.artificial_start < self.cols;
        if has_artificial {
            let mut cost = vec![Rational::zero(); self.cols];
            for c in cost[self.artificial_start..].iter_mut() {
                *c = -Rational::one();
            }
            self.optimize(&cost, self.cols);
            let infeasibility: Rational = self
                .basis
                .iter()
                .zip(&self.rows)
                .filter(|(&b, _)| b >= self.artificial_start)
                .map(|(_, row)| row[self.cols].clone())
                .sum();
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-valued artificials out of the basis; drop redundant rows.
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.artificial_start {
                    match (0..self.artificial_start).find(|&j| !self.rows[r][j].is_zero()) {
                        Some(c) => {
                            self.pivot(r, c);
                            r += 1;
                        }
                        None => {
                            self.rows.remove(r);
                            self.basis.remove(r);
                        }
                    }
                } else {
                    r += 1;
                }
            }
        }
        let mut cost = vec![Rational::zero(); self.cols];
        for (c, o) in cost.iter_mut().zip(&lp.objective) {
            *c = match lp.sense {
                Sense::Maximize => o.clone(),
                Sense::Minimize => -o,
            };
        }
        if !self.optimize(&cost, self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut solution = vec![Rational::zero(); self.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.num_vars {
                solution[b] = row[self.cols].clone();
            }
        }
        let value = lp.objective_value(&solution);
        LpOutcome::Optimal { value, solution }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p, d)
    }

    fn row(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x, 1)).collect()
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(Sense::Maximize, row(&[3, 5]));
        lp.add(row(&[1, 0]), Relation::Le, q(4, 1));
        lp.add(row(&[0, 2]), Relation::Le, q(12, 1));
        lp.add(row(&[3, 2]), Relation::Le, q(18, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, q(36, 1));
                assert_eq!(solution, vec![q(2, 1), q(6, 1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minimization_with_ge_and_eq() {
        // min x + y s.t. x + 2y >= 3, 2x + y >= 3 -> 2 at (1,1)
        let mut lp = LinearProgram::new(Sense::Minimize, row(&[1, 1]));
        lp.add(row(&[1, 2]), Relation::Ge, q(3, 1));
        lp.add(row(&[2, 1]), Relation::Ge, q(3, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, q(2, 1));
                assert!(lp.is_feasible(&solution));
            }
            other => panic!("{other:?}"),
        }
        let mut eq = LinearProgram::new(Sense::Minimize, row(&[0, 0]));
        eq.add(row(&[1, 1]), Relation::Eq, q(1, 1));
        eq.add(row(&[1, -1]), Relation::Eq, q(1, 3));
        match eq.solve() {
            LpOutcome::Optimal { solution, .. } => assert_eq!(solution, vec![q(2, 3), q(1, 3)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize, row(&[1]));
        lp.add(row(&[1]), Relation::Le, q(1, 1));
        lp.add(row(&[1]), Relation::Ge, q(2, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize, row(&[1, 1]));
        lp.add(row(&[1, -1]), Relation::Le, q(1, 1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_and_negative_rhs() {
        let mut lp = LinearProgram::new(Sense::Maximize, row(&[1, 2]));
        lp.add(row(&[1, 1]), Relation::Eq, q(1, 1));
        lp.add(row(&[2, 2]), Relation::Eq, q(2, 1));
        lp.add(row(&[-1, 0]), Relation::Le, q(-1, 4));
        match lp.solve() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(solution, vec![q(1, 4), q(3, 4)]);
                assert_eq!(value, q(7, 4));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example; cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(
            Sense::Maximize,
            vec![q(3, 4), q(-20, 1), q(1, 2), q(-6, 1)],
        );
        lp.add(vec![q(1, 4), q(-8, 1), q(-1, 1), q(9, 1)], Relation::Le, q(0, 1));
        lp.add(vec![q(1, 2), q(-12, 1), q(-1, 2), q(3, 1)], Relation::Le, q(0, 1));
        lp.add(vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)], Relation::Le, q(1, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(5, 4)),
            other => panic!("{other:?}"),
        }
    }
}
