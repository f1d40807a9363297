//! Exact rational simplex for small dense problems in standard form
//! `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
//!
//! Two phases with artificial variables and Bland's rule, so it cannot
//! cycle. Redundant equality rows are detected and dropped after phase 1.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced-cost row; the last entry is minus the objective value.
    objective: Vec<Rational>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.cols]
    }

    fn set_costs(&mut self, costs: &[Rational]) {
        let mut obj: Vec<Rational> = costs.to_vec();
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (o, t) in obj.iter_mut().zip(&self.rows[i]) {
                if !t.is_zero() {
                    *o -= &cb * t;
                }
            }
        }
        self.objective = obj;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = self.rows[row].clone();
        let nz: Vec<usize> = (0..=self.cols)
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for &j in &nz {
                r[j] -= &f * &pivot_row[j];
            }
        }
        if !self.objective[col].is_zero() {
            let f = self.objective[col].clone();
            for &j in &nz {
                self.objective[j] -= &f * &pivot_row[j];
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule over the columns accepted by `allowed`. Returns
    /// false when the problem is unbounded.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool) -> bool {
        loop {
            let Some(enter) =
                (0..self.cols).find(|&j| allowed(j) && self.objective[j].is_negative())
            else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter),
                None => return false,
            }
        }
    }
}

/// Minimizes `c·x` over `{x ≥ 0 : A x = b}`.
pub fn minimize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    assert!(a.iter().all(|r| r.len() == n));
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Rational> = a[i]
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        row.extend((0..m).map(|k| {
            if k == i {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        }));
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis: (n..n + m).collect(),
        objective: Vec::new(),
        cols,
    };

    let phase1: Vec<Rational> = (0..cols)
        .map(|j| Rational::from_integer(i64::from(j >= n).into()))
        .collect();
    tab.set_costs(&phase1);
    tab.optimize(|_| true);
    if !tab.objective[cols].is_zero() {
        return LpOutcome::Infeasible;
    }

    // drive remaining artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n {
            match (0..n).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut phase2: Vec<Rational> = c.to_vec();
    phase2.extend((0..m).map(|_| Rational::zero()));
    tab.set_costs(&phase2);
    if !tab.optimize(|j| j < n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = tab.rhs(i).clone();
        }
    }
    let value = -tab.objective[cols].clone();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let out = minimize(
            &q(&[-1, -1, 0, 0]),
            &[q(&[1, 2, 1, 0]), q(&[3, 1, 0, 1])],
            &q(&[4, 6]),
        );
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, ratio(-14, 5));
                assert_eq!(x[0], ratio(8, 5));
                assert_eq!(x[1], ratio(6, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert_eq!(
            minimize(&q(&[1, 1]), &[q(&[1, 1]), q(&[1, 1])], &q(&[1, 2])),
            LpOutcome::Infeasible
        );
        assert_eq!(
            minimize(&q(&[-1, 0]), &[q(&[1, -1])], &q(&[0])),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let out = minimize(
            &q(&[1, 1]),
            &[q(&[1, -1]), q(&[2, -2]), q(&[-1, 1])],
            &q(&[-1, -2, 1]),
        );
        assert_eq!(
            out,
            LpOutcome::Optimal {
                x: q(&[0, 1]),
                value: int(1)
            }
        );
    }
}
