//! Dense exact-rational simplex with Bland's rule.
//!
//! Variables are free; rows are `a·x (≤ | < | =) b`. Strict rows are handled by
//! the max-slack reduction in [`feasible_point`].

use serde::{Deserialize, Serialize};

use crate::rational::Rat;
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Row {
    pub normal: Vector,
    pub relation: Relation,
    pub rhs: Rat,
}

impl Row {
    pub fn new(normal: Vector, relation: Relation, rhs: Rat) -> Row {
        Row { normal, relation, rhs }
    }

    pub fn le(normal: Vector, rhs: Rat) -> Row {
        Row::new(normal, Relation::Le, rhs)
    }

    pub fn lt(normal: Vector, rhs: Rat) -> Row {
        Row::new(normal, Relation::Lt, rhs)
    }

    pub fn eq(normal: Vector, rhs: Rat) -> Row {
        Row::new(normal, Relation::Eq, rhs)
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn holds(&self, x: &Vector) -> bool {
        let lhs = self.normal.dot(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Lt => lhs < self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }

    pub fn is_strict(&self) -> bool {
        self.relation == Relation::Lt
    }

    pub fn closed(&self) -> Row {
        let relation = match self.relation {
            Relation::Lt => Relation::Le,
            r => r,
        };
        Row::new(self.normal.clone(), relation, self.rhs.clone())
    }

    /// Embeds the row into a larger space, placing its coefficients at `offset`.
    pub fn embed(&self, dim: usize, offset: usize) -> Row {
        let mut normal = Vector::zeros(dim);
        for (i, c) in self.normal.iter().enumerate() {
            normal[offset + i] = c.clone();
        }
        Row::new(normal, self.relation, self.rhs.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    /// Objective unbounded above; carries a feasible point.
    Unbounded(Vector),
    Optimal { value: Rat, point: Vector },
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v / &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &(&f * pv);
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost·y` over columns `< active`; returns false if unbounded.
    fn run(&mut self, cost: &[Rat], active: usize) -> bool {
        let rhs = self.ncols;
        loop {
            let mut entering = None;
            for j in 0..active {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() && !row[j].is_zero() {
                        r = r - cb * &row[j];
                    }
                }
                if r.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
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
                None => return false,
            }
        }
    }

    fn values(&self) -> Vec<Rat> {
        let mut y = vec![Rat::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            y[b] = self.rows[i][self.ncols].clone();
        }
        y
    }
}

/// Maximizes `objective·x` subject to non-strict rows over free variables.
pub fn maximize(dim: usize, rows: &[Row], objective: &Vector) -> LpOutcome {
    debug_assert!(rows.iter().all(|r| r.relation != Relation::Lt));
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.relation == Relation::Le).count();
    // columns: x+ (dim), x- (dim), slacks, artificials (m)
    let n_struct = 2 * dim + n_slack;
    let ncols = n_struct + m;
    let mut table = Vec::with_capacity(m);
    let mut slack = 2 * dim;
    for (i, row) in rows.iter().enumerate() {
        let mut t = vec![Rat::zero(); ncols + 1];
        for (j, a) in row.normal.iter().enumerate() {
            t[j] = a.clone();
            t[dim + j] = -a;
        }
        if row.relation == Relation::Le {
            t[slack] = Rat::one();
            slack += 1;
        }
        t[ncols] = row.rhs.clone();
        if row.rhs.is_negative() {
            for v in t.iter_mut() {
                *v = -&*v;
            }
        }
        t[n_struct + i] = Rat::one();
        table.push(t);
    }
    let mut tab = Tableau { rows: table, basis: (n_struct..n_struct + m).collect(), ncols };

    let mut phase1 = vec![Rat::zero(); ncols];
    for c in phase1.iter_mut().skip(n_struct) {
        *c = -Rat::one();
    }
    tab.run(&phase1, ncols);
    let infeas: Rat = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n_struct)
        .map(|(i, _)| tab.rows[i][ncols].clone())
        .sum();
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n_struct {
            match (0..n_struct).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    let mut cost = vec![Rat::zero(); ncols];
    for (j, c) in objective.iter().enumerate() {
        cost[j] = c.clone();
        cost[dim + j] = -c;
    }
    let bounded = tab.run(&cost, n_struct);
    let y = tab.values();
    let point = Vector((0..dim).map(|j| &y[j] - &y[dim + j]).collect());
    if !bounded {
        return LpOutcome::Unbounded(point);
    }
    let value = objective.dot(&point);
    LpOutcome::Optimal { value, point }
}

/// Minimizes `objective·x`; the returned value is the minimum itself.
pub fn minimize(dim: usize, rows: &[Row], objective: &Vector) -> LpOutcome {
    match maximize(dim, rows, &objective.neg()) {
        LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
        other => other,
    }
}

/// Finds a point satisfying every row, strict rows included.
///
/// Strict rows are relaxed to `a·x + t ≤ b` and `t` is maximized (capped at 1);
/// the system is feasible iff the optimum is positive.
pub fn feasible_point(dim: usize, rows: &[Row]) -> Option<Vector> {
    if !rows.iter().any(Row::is_strict) {
        return match maximize(dim, rows, &Vector::zeros(dim)) {
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded(p) | LpOutcome::Optimal { point: p, .. } => Some(p),
        };
    }
    let ext = dim + 1;
    let mut relaxed: Vec<Row> = rows
        .iter()
        .map(|r| {
            let mut row = r.embed(ext, 0);
            if r.is_strict() {
                row.normal[dim] = Rat::one();
                row.relation = Relation::Le;
            }
            row
        })
        .collect();
    relaxed.push(Row::le(Vector::unit(ext, dim), Rat::one()));
    match maximize(ext, &relaxed, &Vector::unit(ext, dim)) {
        LpOutcome::Optimal { value, point } if value.is_positive() => {
            Some(point.slice(0, dim))
        }
        _ => None,
    }
}
