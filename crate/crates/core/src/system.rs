//! Exact emptiness decisions for intersections of set expressions.
//!
//! Every expression is expanded into a disjunction of conjunctions of linear
//! rows and epigraph constraints `w[y] ≥ f(w[x])`. A conjunction without
//! epigraph constraints is one LP. With epigraph constraints that share a
//! single argument variable, the remaining variables are projected away by
//! Fourier–Motzkin, each epigraph variable is eliminated against its upper
//! bounds, and the resulting one-variable piecewise-quadratic system is
//! decided exactly.

use crate::error::{CoreError, Result};
use crate::interval::Interval1D;
use crate::lp::{self, Relation, Row};
use crate::polyhedron::HPolyhedron;
use crate::pq::PQFunction;
use crate::rational::{ExtRat, Rat};
use crate::scalar::{self, ScalarConstraint, Witness};
use crate::set::SetExpr;
use crate::vector::Vector;

const MAX_PIECES: usize = 20_000;

#[derive(Clone, Debug)]
struct EpiAtom {
    x: usize,
    y: usize,
    f: PQFunction,
}

#[derive(Clone, Debug)]
struct Conj {
    dim: usize,
    rows: Vec<Row>,
    epis: Vec<EpiAtom>,
}

impl Conj {
    fn whole(dim: usize) -> Conj {
        Conj { dim, rows: Vec::new(), epis: Vec::new() }
    }

    fn merge(&self, other: &Conj) -> Conj {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        let mut epis = self.epis.clone();
        epis.extend(other.epis.iter().cloned());
        Conj { dim: self.dim, rows, epis }
    }

    /// Places the conjunction into `dim` coordinates via `coords`.
    fn remap(&self, dim: usize, coords: &[usize]) -> Conj {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut n = Vector::zeros(dim);
                for (k, &c) in coords.iter().enumerate() {
                    n[c] = r.normal[k].clone();
                }
                Row::new(n, r.relation, r.rhs.clone())
            })
            .collect();
        let epis = self.epis.iter().map(|e| EpiAtom { x: coords[e.x], y: coords[e.y], f: e.f.clone() }).collect();
        Conj { dim, rows, epis }
    }

    fn polyhedron(&self) -> HPolyhedron {
        HPolyhedron { dim: self.dim, rows: self.rows.clone() }
    }
}

fn cross(a: Vec<Conj>, b: Vec<Conj>) -> Result<Vec<Conj>> {
    if a.len().saturating_mul(b.len()) > MAX_PIECES {
        return Err(CoreError::Unsupported("disjunctive expansion too large".into()));
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            out.push(x.merge(y));
        }
    }
    Ok(out)
}

/// Drops conjunctions whose linear part is already infeasible.
fn prune(conjs: Vec<Conj>) -> Vec<Conj> {
    conjs.into_iter().filter(|c| lp::feasible_point(c.dim, &c.rows).is_some()).collect()
}

fn dnf(set: &SetExpr) -> Result<Vec<Conj>> {
    let d = set.dim();
    if let SetExpr::Epigraph { f } = set {
        return Ok(vec![Conj { dim: 2, rows: Vec::new(), epis: vec![EpiAtom { x: 0, y: 1, f: f.clone() }] }]);
    }
    if let Some(p) = set.as_polyhedron() {
        return Ok(vec![Conj { dim: d, rows: p.rows, epis: Vec::new() }]);
    }
    match set {
        SetExpr::Union { members, .. } => {
            let mut out = Vec::new();
            for m in members {
                out.extend(dnf(m)?);
                if out.len() > MAX_PIECES {
                    return Err(CoreError::Unsupported("disjunctive expansion too large".into()));
                }
            }
            Ok(out)
        }
        SetExpr::Intersection { members, .. } => {
            let mut acc = vec![Conj::whole(d)];
            for m in members {
                acc = prune(cross(acc, dnf(m)?)?);
            }
            Ok(acc)
        }
        SetExpr::Product { factors } => {
            let mut acc = vec![Conj::whole(d)];
            let mut off = 0;
            for f in factors {
                let coords: Vec<usize> = (off..off + f.dim()).collect();
                let parts = dnf(f)?.iter().map(|c| c.remap(d, &coords)).collect();
                acc = cross(acc, parts)?;
                off += f.dim();
            }
            Ok(acc)
        }
        SetExpr::Embed { dim, coords, inner } => Ok(dnf(inner)?.iter().map(|c| c.remap(*dim, coords)).collect()),
        _ => unreachable!("convex variants handled above"),
    }
}

fn feasible(c: &Conj) -> Result<Witness> {
    if c.epis.is_empty() {
        return Ok(match lp::feasible_point(c.dim, &c.rows) {
            Some(p) => Witness::Point(p),
            None => Witness::Empty,
        });
    }
    let x = c.epis[0].x;
    if c.epis.iter().any(|e| e.x != x) {
        return Err(CoreError::Unsupported("epigraph constraints over different arguments".into()));
    }
    let mut ys: Vec<usize> = c.epis.iter().map(|e| e.y).collect();
    ys.sort();
    ys.dedup();
    if ys.contains(&x) {
        return Err(CoreError::Unsupported("epigraph argument used as a value".into()));
    }
    let mut keep = vec![x];
    keep.extend(ys.iter().copied());
    let proj = c.polyhedron().project(&keep);

    let mut cons: Vec<ScalarConstraint> = Vec::new();
    // per epigraph variable: lower bounds (function, strict), upper bounds (slope, intercept, strict)
    let mut lowers: Vec<Vec<(PQFunction, bool)>> = vec![Vec::new(); ys.len()];
    let mut uppers: Vec<Vec<(Rat, Rat, bool)>> = vec![Vec::new(); ys.len()];
    for e in &c.epis {
        let k = ys.iter().position(|&y| y == e.y).unwrap();
        lowers[k].push((e.f.clone(), false));
    }
    for r in &proj.rows {
        let a = r.normal[0].clone();
        let nz: Vec<usize> = (1..keep.len()).filter(|&i| !r.normal[i].is_zero()).collect();
        let strict = r.is_strict();
        let cy = nz.first().map(|&i| r.normal[i].clone()).unwrap_or_else(Rat::zero);
        let sides = match r.relation {
            Relation::Eq => vec![(a.clone(), cy.clone(), r.rhs.clone(), false), (-&a, -&cy, -&r.rhs, false)],
            _ => vec![(a, cy, r.rhs.clone(), strict)],
        };
        match nz.len() {
            0 => {
                for (a, _, b, s) in sides {
                    // a x - b ⊲ 0
                    cons.push(ScalarConstraint { g: PQFunction::quadratic(Rat::zero(), a, -b), strict: s });
                }
            }
            1 => {
                let k = nz[0] - 1;
                for (a, cy, b, s) in sides {
                    // a x + cy y ⊲ b
                    if cy.is_positive() {
                        uppers[k].push((-&a / &cy, &b / &cy, s));
                    } else {
                        let m = &a / &(-&cy);
                        let c0 = -&b / &(-&cy);
                        lowers[k].push((PQFunction::quadratic(Rat::zero(), m, c0), s));
                    }
                }
            }
            _ => return Err(CoreError::Unsupported("rows coupling several epigraph values".into())),
        }
    }
    for k in 0..ys.len() {
        for (lf, ls) in &lowers[k] {
            for (m, c0, us) in &uppers[k] {
                cons.push(ScalarConstraint { g: lf.minus_affine(m, c0), strict: *ls || *us });
            }
        }
    }
    match scalar::solve(&cons, &Interval1D::real()) {
        Witness::Point(p) => {
            let x0 = p[0].clone();
            let mut rows = c.rows.clone();
            rows.push(Row::eq(Vector::unit(c.dim, x), x0.clone()));
            for e in &c.epis {
                rows.push(Row::le(Vector::unit(c.dim, e.y).neg(), -e.f.eval(&x0)));
            }
            match lp::feasible_point(c.dim, &rows) {
                Some(w) => Ok(Witness::Point(w)),
                None => Err(CoreError::Unsupported("lifting a scalar witness failed".into())),
            }
        }
        other => Ok(other),
    }
}

/// Decides whether the intersection of `sets` is empty.
///
/// Returns a rational common point when one exists and can be found.
pub fn intersect(sets: &[&SetExpr]) -> Result<Witness> {
    let Some(first) = sets.first() else {
        return Err(CoreError::Malformed("no sets to intersect".into()));
    };
    let d = first.dim();
    for s in sets {
        if s.dim() != d {
            return Err(crate::error::dim_mismatch("intersected set", d, s.dim()));
        }
    }
    // order cheap polyhedral pieces first so pruning bites early
    let mut parts: Vec<Vec<Conj>> = sets.iter().map(|s| dnf(s)).collect::<Result<_>>()?;
    parts.sort_by_key(|p| p.len());
    let mut acc = vec![Conj::whole(d)];
    for p in parts {
        acc = prune(cross(acc, p)?);
        if acc.is_empty() {
            return Ok(Witness::Empty);
        }
    }
    let mut irrational = false;
    for c in &acc {
        match feasible(c)? {
            Witness::Point(p) => {
                debug_assert!(sets.iter().all(|s| s.contains(&p)), "witness must lie in every set");
                return Ok(Witness::Point(p));
            }
            Witness::Irrational => irrational = true,
            Witness::Empty => {}
        }
    }
    Ok(if irrational { Witness::Irrational } else { Witness::Empty })
}

pub fn is_empty(set: &SetExpr) -> Result<bool> {
    Ok(intersect(&[set])?.is_empty())
}

/// `S ⊆ T`, decided as emptiness of `S ∖ T`.
pub fn is_subset(s: &SetExpr, t: &SetExpr) -> Result<bool> {
    let comp = t.complement()?;
    Ok(intersect(&[s, &comp])?.is_empty())
}

/// Strict test `d(p, S) < r`, i.e. `S` meets the open ball of radius `r`.
pub fn distance_below(p: &Vector, set: &SetExpr, r: &ExtRat) -> Result<bool> {
    if matches!(r, ExtRat::Finite(v) if !v.is_positive()) || *r == ExtRat::NegInf {
        return Ok(false);
    }
    let ball = SetExpr::ball(p, r);
    Ok(!intersect(&[set, &ball])?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pq::Quadratic;
    use crate::rational::q;

    fn f4() -> PQFunction {
        PQFunction::new(
            vec![Rat::zero()],
            vec![Quadratic(Rat::zero(), Rat::one(), Rat::zero()), Quadratic(-Rat::one(), Rat::zero(), Rat::zero())],
        )
        .unwrap()
    }

    fn v(xs: &[Rat]) -> Vector {
        Vector(xs.to_vec())
    }

    #[test]
    fn epigraph_meets_box() {
        let e = SetExpr::Epigraph { f: f4() };
        // the box (0, 1/5) × (-11/100, -1/25] misses y ≥ -x² there
        let b = SetExpr::Product {
            factors: vec![
                SetExpr::Interval(Interval1D::open(Rat::zero(), q(1, 5))),
                SetExpr::Interval(Interval1D::new(ExtRat::Finite(q(-11, 100)), false, ExtRat::Finite(q(-1, 25)), true)),
            ],
        };
        assert_eq!(intersect(&[&e, &b]).unwrap(), Witness::Empty);
        let b2 = SetExpr::Product {
            factors: vec![
                SetExpr::Interval(Interval1D::open(Rat::zero(), q(1, 5))),
                SetExpr::Interval(Interval1D::new(ExtRat::Finite(q(-11, 100)), false, ExtRat::Finite(q(-1, 50)), true)),
            ],
        };
        match intersect(&[&e, &b2]).unwrap() {
            Witness::Point(p) => assert!(e.contains(&p) && b2.contains(&p)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lifted_two_epigraphs() {
        // y1 ≥ x², y2 ≥ -x, y1 < 1/4, y2 < -1/4 → x ∈ (1/4, 1/2)
        let e1 = SetExpr::Embed { dim: 3, coords: vec![0, 1], inner: Box::new(SetExpr::Epigraph { f: PQFunction::quadratic(Rat::one(), Rat::zero(), Rat::zero()) }) };
        let e2 = SetExpr::Embed { dim: 3, coords: vec![0, 2], inner: Box::new(SetExpr::Epigraph { f: PQFunction::quadratic(Rat::zero(), -Rat::one(), Rat::zero()) }) };
        let cap = SetExpr::Polyhedron(HPolyhedron {
            dim: 3,
            rows: vec![Row::lt(v(&[Rat::zero(), Rat::one(), Rat::zero()]), q(1, 4)), Row::lt(v(&[Rat::zero(), Rat::zero(), Rat::one()]), q(-1, 4))],
        });
        match intersect(&[&e1, &e2, &cap]).unwrap() {
            Witness::Point(p) => assert!(p[0] > q(1, 4) && p[0] < q(1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn subset_and_distance_below() {
        let a = SetExpr::Interval(Interval1D::lower_ray(q(-1, 2)));
        let b = SetExpr::Interval(Interval1D::lower_ray(Rat::zero()));
        assert!(is_subset(&a, &b).unwrap());
        assert!(!is_subset(&b, &a).unwrap());
        assert!(distance_below(&v(&[Rat::zero()]), &a, &ExtRat::Finite(q(3, 5))).unwrap());
        assert!(!distance_below(&v(&[Rat::zero()]), &a, &ExtRat::Finite(q(1, 2))).unwrap());
    }
}
