//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! Solves `maximize c·x` subject to row constraints and `x ≥ 0`.

const EPS: f64 = 1e-10;
/// Pivot elements below this fraction of their column are noise.
const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
    PivotLimit,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        let c = Constraint { coeffs, relation, rhs };
        if !self.constraints.contains(&c) {
            self.constraints.push(c);
        }
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_orig: usize,
    n_cols: usize,
    artificial: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.objective.len();
        let m = lp.constraints.len();
        let mut extra = 0;
        for c in &lp.constraints {
            let rel = normalized(c).1;
            extra += match rel {
                Relation::Le => 1,
                Relation::Eq => 1,
                Relation::Ge => 2,
            };
        }
        let n_cols = n + extra;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut artificial = vec![false; n_cols];
        let mut next = n;
        for c in &lp.constraints {
            let (sign, rel) = normalized(c);
            let mut row = vec![0.0; n_cols + 1];
            for (j, a) in c.coeffs.iter().enumerate() {
                row[j] = sign * a;
            }
            row[n_cols] = sign * c.rhs;
            match rel {
                Relation::Le => {
                    row[next] = 1.0;
                    basis.push(next);
                    next += 1;
                }
                Relation::Ge => {
                    row[next] = -1.0;
                    row[next + 1] = 1.0;
                    artificial[next + 1] = true;
                    basis.push(next + 1);
                    next += 2;
                }
                Relation::Eq => {
                    row[next] = 1.0;
                    artificial[next] = true;
                    basis.push(next);
                    next += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            n_orig: n,
            n_cols,
            artificial,
        }
    }

    fn run(mut self, objective: &[f64]) -> LpOutcome {
        if self.artificial.iter().any(|&a| a) {
            let cost: Vec<f64> = (0..self.n_cols)
                .map(|j| if self.artificial[j] { -1.0 } else { 0.0 })
                .collect();
            match self.optimize(&cost, true) {
                Phase::Done => {}
                Phase::Unbounded => unreachable!("phase one is bounded"),
                Phase::Limit => return LpOutcome::PivotLimit,
            }
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.rows)
                .filter(|(b, _)| self.artificial[**b])
                .map(|(_, r)| r[self.n_cols])
                .sum();
            let scale = 1f64.max(self.rows.iter().map(|r| r[self.n_cols].abs()).fold(0.0, f64::max));
            if infeas > 1e-9 * scale {
                return LpOutcome::Infeasible;
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![0.0; self.n_cols];
        cost[..self.n_orig].copy_from_slice(objective);
        match self.optimize(&cost, false) {
            Phase::Done => {}
            Phase::Unbounded => return LpOutcome::Unbounded,
            Phase::Limit => return LpOutcome::PivotLimit,
        }
        let mut x = vec![0.0; self.n_orig];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_orig {
                x[b] = self.rows[i][self.n_cols];
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }

    fn optimize(&mut self, cost: &[f64], phase_one: bool) -> Phase {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.n_cols).find(|&j| {
                if !phase_one && self.artificial[j] {
                    return false;
                }
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, r)| cost[b] * r[j])
                        .sum::<f64>();
                reduced > EPS
            });
            let Some(j) = entering else {
                return Phase::Done;
            };
            let col_max = self.rows.iter().map(|r| r[j].abs()).fold(1.0, f64::max);
            let mut leave: Option<(usize, f64)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if r[j] > PIVOT_TOL * col_max {
                    let ratio = r[self.n_cols].max(0.0) / r[j];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * 1f64.max(best.abs());
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[k] {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leave else {
                return Phase::Unbounded;
            };
            self.pivot(i, j);
        }
        Phase::Limit
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let p = self.rows[i][j];
        for v in self.rows[i].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[i].clone();
        for (k, r) in self.rows.iter_mut().enumerate() {
            if k != i && r[j] != 0.0 {
                let f = r[j];
                for (v, q) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * q;
                }
                r[j] = 0.0;
            }
        }
        self.basis[i] = j;
        let n = self.n_cols;
        for r in &mut self.rows {
            if r[n] < 0.0 && r[n] > -EPS {
                r[n] = 0.0;
            }
        }
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.artificial[self.basis[i]] {
                let col = (0..self.n_cols).find(|&j| !self.artificial[j] && self.rows[i][j].abs() > EPS);
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
}

enum Phase {
    Done,
    Unbounded,
    Limit,
}

fn normalized(c: &Constraint) -> (f64, Relation) {
    if c.rhs < 0.0 {
        let flipped = match c.relation {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        };
        (-1.0, flipped)
    } else {
        (1.0, c.relation)
    }
}
