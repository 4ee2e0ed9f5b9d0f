//! Exact two-phase primal simplex with Bland's rule.
//!
//! Problems are stated over free or nonnegative variables with `<=`, `=`,
//! `>=` rows and converted internally to standard form. All pivoting is
//! exact, so reported optima are exact rationals, and Bland's rule makes
//! the pivot sequence (and therefore the returned vertex) deterministic.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    NonNeg,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, Scalar)>,
    rel: Relation,
    rhs: Scalar,
}

/// A linear program under construction.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    kinds: Vec<VarKind>,
    objective: Vec<Scalar>,
    sense: Sense,
    rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub objective: Scalar,
    pub x: Vector,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            kinds: Vec::new(),
            objective: Vec::new(),
            sense,
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, kind: VarKind, cost: Scalar) -> usize {
        self.kinds.push(kind);
        self.objective.push(cost);
        self.kinds.len() - 1
    }

    pub fn add_vars(&mut self, n: usize, kind: VarKind) -> Vec<usize> {
        (0..n).map(|_| self.add_var(kind, Scalar::zero())).collect()
    }

    pub fn set_cost(&mut self, var: usize, cost: Scalar) {
        self.objective[var] = cost;
    }

    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Scalar)>, rel: Relation, rhs: Scalar) {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution> {
        // Column layout: each user variable maps to one (NonNeg) or two
        // (Free: plus, minus) standard columns; then slacks; then artificials.
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.kinds.len());
        let mut ncols = 0;
        for kind in &self.kinds {
            match kind {
                VarKind::NonNeg => {
                    col_of.push((ncols, None));
                    ncols += 1;
                }
                VarKind::Free => {
                    col_of.push((ncols, Some(ncols + 1)));
                    ncols += 2;
                }
            }
        }
        let n_struct = ncols;
        let m = self.rows.len();

        // Normalize rows to nonnegative right-hand sides.
        let mut dense: Vec<Vec<Scalar>> = Vec::with_capacity(m);
        let mut rels = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for row in &self.rows {
            let mut r = vec![Scalar::zero(); n_struct];
            for (v, c) in &row.coeffs {
                let (p, mneg) = col_of[*v];
                r[p] += c;
                if let Some(mn) = mneg {
                    r[mn] -= c;
                }
            }
            let (r, rel, b) = if row.rhs.is_negative() {
                let flipped = match row.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (r.into_iter().map(|x| -x).collect(), flipped, -&row.rhs)
            } else {
                (r, row.rel, row.rhs.clone())
            };
            dense.push(r);
            rels.push(rel);
            rhs.push(b);
        }

        let n_slack = rels.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = rels.iter().filter(|r| **r != Relation::Le).count();
        let total = n_struct + n_slack + n_art;
        let art_start = n_struct + n_slack;

        let mut tab = Tableau {
            a: Vec::with_capacity(m),
            b: rhs,
            basis: Vec::with_capacity(m),
            ncols: total,
        };
        let mut slack = n_struct;
        let mut art = art_start;
        for (i, mut r) in dense.into_iter().enumerate() {
            r.resize(total, Scalar::zero());
            match rels[i] {
                Relation::Le => {
                    r[slack] = Scalar::one();
                    tab.basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    r[slack] = -Scalar::one();
                    slack += 1;
                    r[art] = Scalar::one();
                    tab.basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    r[art] = Scalar::one();
                    tab.basis.push(art);
                    art += 1;
                }
            }
            tab.a.push(r);
        }

        // Phase 1: minimize the sum of artificials.
        if n_art > 0 {
            let mut cost = vec![Scalar::zero(); total];
            for c in cost.iter_mut().skip(art_start) {
                *c = Scalar::one();
            }
            let value = tab.run(&cost, total)?;
            if !value.is_zero() {
                return Err(Error::Infeasible(format!(
                    "phase-1 optimum {value} > 0"
                )));
            }
            // Drive remaining artificials out of the basis.
            let mut i = 0;
            while i < tab.a.len() {
                if tab.basis[i] >= art_start {
                    match (0..art_start).find(|&j| !tab.a[i][j].is_zero()) {
                        Some(j) => {
                            tab.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            // redundant equality
                            tab.a.remove(i);
                            tab.b.remove(i);
                            tab.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        // Phase 2 over structural + slack columns only.
        let mut cost = vec![Scalar::zero(); total];
        for (v, (p, mneg)) in col_of.iter().enumerate() {
            let c = match self.sense {
                Sense::Minimize => self.objective[v].clone(),
                Sense::Maximize => -&self.objective[v],
            };
            if let Some(mn) = mneg {
                cost[*mn] = -&c;
            }
            cost[*p] = c;
        }
        let value = tab.run(&cost, art_start)?;

        let mut std_x = vec![Scalar::zero(); total];
        for (i, &bv) in tab.basis.iter().enumerate() {
            std_x[bv] = tab.b[i].clone();
        }
        let x: Vector = col_of
            .iter()
            .map(|(p, mneg)| match mneg {
                Some(mn) => &std_x[*p] - &std_x[*mn],
                None => std_x[*p].clone(),
            })
            .collect();
        let objective = match self.sense {
            Sense::Minimize => value,
            Sense::Maximize => -value,
        };
        Ok(LpSolution { objective, x })
    }
}

struct Tableau {
    a: Vec<Vec<Scalar>>,
    b: Vec<Scalar>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.a[r][c].recip();
        if inv != Scalar::one() {
            for x in self.a[r].iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
            self.b[r] = &self.b[r] * &inv;
        }
        let prow = self.a[r].clone();
        let pb = self.b[r].clone();
        let nz: Vec<usize> = (0..self.ncols).filter(|&j| !prow[j].is_zero()).collect();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for &j in &nz {
                let d = &prow[j] * &f;
                self.a[i][j] -= &d;
            }
            let d = &pb * &f;
            self.b[i] -= &d;
        }
        self.basis[r] = c;
    }

    /// Minimize `cost` using only columns `< active`. Returns the optimum.
    fn run(&mut self, cost: &[Scalar], active: usize) -> Result<Scalar> {
        loop {
            // reduced cost d_j = c_j - c_B^T A_j
            let mut entering = None;
            for j in 0..active {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &bv) in self.basis.iter().enumerate() {
                    if !cost[bv].is_zero() && !self.a[i][j].is_zero() {
                        d -= &(&cost[bv] * &self.a[i][j]);
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                let mut value = Scalar::zero();
                for (i, &bv) in self.basis.iter().enumerate() {
                    if !cost[bv].is_zero() {
                        value += &(&cost[bv] * &self.b[i]);
                    }
                }
                return Ok(value);
            };
            // ratio test, ties by smallest basic index (Bland)
            let mut leave: Option<(usize, Scalar)> = None;
            for i in 0..self.a.len() {
                if self.a[i][c].is_positive() {
                    let ratio = &self.b[i] / &self.a[i][c];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(Error::Unbounded(format!("column {c} unbounded"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qr};

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var(VarKind::NonNeg, q(3));
        let y = lp.add_var(VarKind::NonNeg, q(5));
        lp.add_row(vec![(x, q(1))], Relation::Le, q(4));
        lp.add_row(vec![(y, q(2))], Relation::Le, q(12));
        lp.add_row(vec![(x, q(3)), (y, q(2))], Relation::Le, q(18));
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective, q(36));
        assert_eq!(sol.x, vec![q(2), q(6)]);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min |x| style: min t s.t. t >= x, t >= -x, x = -3/2
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(VarKind::Free, q(0));
        let t = lp.add_var(VarKind::NonNeg, q(1));
        lp.add_row(vec![(t, q(1)), (x, q(-1))], Relation::Ge, q(0));
        lp.add_row(vec![(t, q(1)), (x, q(1))], Relation::Ge, q(0));
        lp.add_row(vec![(x, q(1))], Relation::Eq, qr(-3, 2));
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective, qr(3, 2));
        assert_eq!(sol.x[x], qr(-3, 2));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(VarKind::NonNeg, q(1));
        lp.add_row(vec![(x, q(1))], Relation::Le, q(-1));
        assert!(matches!(lp.solve(), Err(Error::Infeasible(_))));

        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var(VarKind::Free, q(1));
        lp.add_row(vec![(x, q(1))], Relation::Ge, q(0));
        assert!(matches!(lp.solve(), Err(Error::Unbounded(_))));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(VarKind::NonNeg, q(1));
        let y = lp.add_var(VarKind::NonNeg, q(2));
        lp.add_row(vec![(x, q(1)), (y, q(1))], Relation::Eq, q(2));
        lp.add_row(vec![(x, q(2)), (y, q(2))], Relation::Eq, q(4));
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective, q(2));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance; Bland's rule must terminate.
        let mut lp = LinearProgram::new(Sense::Minimize);
        let v: Vec<usize> = (0..4).map(|_| lp.add_var(VarKind::NonNeg, q(0))).collect();
        lp.set_cost(v[0], qr(-3, 4));
        lp.set_cost(v[1], q(150));
        lp.set_cost(v[2], qr(-1, 50));
        lp.set_cost(v[3], q(6));
        lp.add_row(
            vec![(v[0], qr(1, 4)), (v[1], q(-60)), (v[2], qr(-1, 25)), (v[3], q(9))],
            Relation::Le,
            q(0),
        );
        lp.add_row(
            vec![(v[0], qr(1, 2)), (v[1], q(-90)), (v[2], qr(-1, 50)), (v[3], q(3))],
            Relation::Le,
            q(0),
        );
        lp.add_row(vec![(v[2], q(1))], Relation::Le, q(1));
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective, qr(-1, 20));
    }
}
