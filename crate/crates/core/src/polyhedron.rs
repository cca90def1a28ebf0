//! Convex polyhedra in H-representation, possibly with open facets.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Result};
use crate::lp::{self, LpOutcome, Relation, Row};
use crate::rational::{ExtRat, Rat};
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HPolyhedron {
    pub dim: usize,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FeasibilityResult {
    Feasible { witness: Vector },
    Infeasible,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }
}

impl HPolyhedron {
    pub fn new(dim: usize, rows: Vec<Row>) -> Result<HPolyhedron> {
        for r in &rows {
            if r.dim() != dim {
                return Err(dim_mismatch("polyhedron row", dim, r.dim()));
            }
        }
        Ok(HPolyhedron { dim, rows })
    }

    pub fn whole(dim: usize) -> HPolyhedron {
        HPolyhedron { dim, rows: Vec::new() }
    }

    /// The box `{x : |x_i - c_i| < r}` (open) or `≤ r` (closed).
    pub fn ball(center: &Vector, radius: &Rat, open: bool) -> HPolyhedron {
        let d = center.dim();
        let rel = if open { Relation::Lt } else { Relation::Le };
        let mut rows = Vec::with_capacity(2 * d);
        for i in 0..d {
            rows.push(Row::new(Vector::unit(d, i), rel, &center[i] + radius));
            rows.push(Row::new(Vector::unit(d, i).neg(), rel, -(&center[i] - radius)));
        }
        HPolyhedron { dim: d, rows }
    }

    pub fn point(p: &Vector) -> HPolyhedron {
        let d = p.dim();
        HPolyhedron {
            dim: d,
            rows: (0..d).map(|i| Row::eq(Vector::unit(d, i), p[i].clone())).collect(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.dim() == self.dim && self.rows.iter().all(|r| r.holds(x))
    }

    pub fn has_strict_rows(&self) -> bool {
        self.rows.iter().any(Row::is_strict)
    }

    /// Relaxes strict rows. Only the closure when the polyhedron is nonempty.
    pub fn relaxed(&self) -> HPolyhedron {
        HPolyhedron { dim: self.dim, rows: self.rows.iter().map(Row::closed).collect() }
    }

    pub fn closure(&self) -> HPolyhedron {
        if self.feasible().is_some() {
            self.relaxed()
        } else {
            HPolyhedron::empty(self.dim)
        }
    }

    pub fn empty(dim: usize) -> HPolyhedron {
        HPolyhedron { dim, rows: vec![Row::le(Vector::zeros(dim), -Rat::one())] }
    }

    pub fn feasible(&self) -> Option<Vector> {
        lp::feasible_point(self.dim, &self.rows)
    }

    pub fn intersect(&self, other: &HPolyhedron) -> HPolyhedron {
        debug_assert_eq!(self.dim, other.dim);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        HPolyhedron { dim: self.dim, rows }
    }

    /// `self + v`.
    pub fn translate(&self, v: &Vector) -> HPolyhedron {
        let rows = self
            .rows
            .iter()
            .map(|r| Row::new(r.normal.clone(), r.relation, &r.rhs + &r.normal.dot(v)))
            .collect();
        HPolyhedron { dim: self.dim, rows }
    }

    /// `λ·self` for `λ > 0`.
    pub fn scale(&self, lambda: &Rat) -> HPolyhedron {
        debug_assert!(lambda.is_positive());
        let rows = self
            .rows
            .iter()
            .map(|r| Row::new(r.normal.clone(), r.relation, &r.rhs * lambda))
            .collect();
        HPolyhedron { dim: self.dim, rows }
    }

    pub fn embed(&self, dim: usize, offset: usize) -> HPolyhedron {
        HPolyhedron { dim, rows: self.rows.iter().map(|r| r.embed(dim, offset)).collect() }
    }

    /// Rows active at `x` (equalities and tight non-strict inequalities).
    pub fn active_rows(&self, x: &Vector) -> Vec<&Row> {
        self.rows
            .iter()
            .filter(|r| r.relation != Relation::Lt && r.normal.dot(x) == r.rhs && !r.normal.is_zero())
            .collect()
    }

    /// Whether every row bounds a single coordinate.
    pub fn is_box(&self) -> bool {
        self.rows.iter().all(|r| r.normal.iter().filter(|c| !c.is_zero()).count() <= 1)
    }

    /// Exact ℓ∞ distance from `p` to the closure; `+inf` if empty.
    pub fn distance(&self, p: &Vector) -> Result<ExtRat> {
        p.check_dim(self.dim, "distance point")?;
        if self.feasible().is_none() {
            return Ok(ExtRat::PosInf);
        }
        let d = self.dim;
        let ext = d + 1;
        let mut rows: Vec<Row> = self.rows.iter().map(|r| r.closed().embed(ext, 0)).collect();
        for i in 0..d {
            let mut up = Vector::unit(ext, i);
            up[d] = -Rat::one();
            rows.push(Row::le(up, p[i].clone()));
            let mut down = Vector::unit(ext, i).neg();
            down[d] = -Rat::one();
            rows.push(Row::le(down, -&p[i]));
        }
        match lp::minimize(ext, &rows, &Vector::unit(ext, d)) {
            LpOutcome::Optimal { value, .. } => Ok(ExtRat::Finite(value)),
            LpOutcome::Infeasible => Ok(ExtRat::PosInf),
            LpOutcome::Unbounded(_) => unreachable!("distance is bounded below by zero"),
        }
    }

    /// Fourier–Motzkin projection onto the coordinates in `keep` (in that order).
    pub fn project(&self, keep: &[usize]) -> HPolyhedron {
        let mut rows = self.rows.clone();
        let mut kept: Vec<usize> = (0..self.dim).collect();
        for var in (0..self.dim).rev() {
            if keep.contains(&var) {
                continue;
            }
            let k = kept.iter().position(|&v| v == var).expect("variable present");
            rows = eliminate(&rows, k);
            for r in rows.iter_mut() {
                r.normal.0.remove(k);
            }
            kept.remove(k);
        }
        let order: Vec<usize> = keep.iter().map(|v| kept.iter().position(|x| x == v).unwrap()).collect();
        let rows = rows
            .into_iter()
            .map(|r| {
                let normal = Vector(order.iter().map(|&i| r.normal[i].clone()).collect());
                Row::new(normal, r.relation, r.rhs)
            })
            .collect();
        HPolyhedron { dim: keep.len(), rows }
    }

    /// The complement as a list of (possibly open) halfspaces.
    pub fn complement_pieces(&self) -> Vec<HPolyhedron> {
        let mut out = Vec::new();
        for r in &self.rows {
            let neg = r.normal.neg();
            let nrhs = -&r.rhs;
            match r.relation {
                Relation::Le => out.push(Row::lt(neg, nrhs)),
                Relation::Lt => out.push(Row::le(neg, nrhs)),
                Relation::Eq => {
                    out.push(Row::lt(r.normal.clone(), r.rhs.clone()));
                    out.push(Row::lt(neg, nrhs));
                }
            }
        }
        out.into_iter().map(|row| HPolyhedron { dim: self.dim, rows: vec![row] }).collect()
    }
}

fn combine(p: &Row, n: &Row, k: usize) -> Row {
    // p has positive, n negative coefficient at k
    let cp = p.normal[k].clone();
    let cn = -&n.normal[k];
    let normal = p.normal.scale(&cn).add(&n.normal.scale(&cp));
    let rhs = &p.rhs * &cn + &n.rhs * &cp;
    let relation = if p.is_strict() || n.is_strict() { Relation::Lt } else { Relation::Le };
    Row::new(normal, relation, rhs)
}

fn canonical(row: Row) -> Row {
    match row.normal.iter().find(|c| !c.is_zero()) {
        Some(c) => {
            let s = c.abs().recip();
            Row::new(row.normal.scale(&s), row.relation, &row.rhs * &s)
        }
        None => row,
    }
}

fn eliminate(rows: &[Row], k: usize) -> Vec<Row> {
    if let Some(eq) = rows.iter().find(|r| r.relation == Relation::Eq && !r.normal[k].is_zero()) {
        let c = eq.normal[k].clone();
        return dedup(
            rows.iter()
                .filter(|r| !std::ptr::eq(*r, eq))
                .map(|r| {
                    if r.normal[k].is_zero() {
                        return r.clone();
                    }
                    let f = &r.normal[k] / &c;
                    Row::new(r.normal.sub(&eq.normal.scale(&f)), r.relation, &r.rhs - &(&eq.rhs * &f))
                })
                .collect(),
        );
    }
    let mut out = Vec::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for r in rows {
        let c = &r.normal[k];
        if c.is_zero() {
            out.push(r.clone());
        } else if c.is_positive() {
            pos.push(r);
        } else {
            neg.push(r);
        }
    }
    for p in &pos {
        for n in &neg {
            out.push(combine(p, n, k));
        }
    }
    dedup(out)
}

fn dedup(rows: Vec<Row>) -> Vec<Row> {
    let mut out: Vec<Row> = Vec::new();
    for r in rows.into_iter().map(canonical) {
        if r.normal.is_zero() && r.holds(&Vector::zeros(r.dim())) {
            continue;
        }
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

/// Exact emptiness decision with a witness satisfying every row, strict ones included.
pub fn lp_feasible(system: &HPolyhedron) -> Result<FeasibilityResult> {
    for r in &system.rows {
        if r.dim() != system.dim {
            return Err(dim_mismatch("polyhedron row", system.dim, r.dim()));
        }
    }
    Ok(match system.feasible() {
        Some(witness) => FeasibilityResult::Feasible { witness },
        None => FeasibilityResult::Infeasible,
    })
}
