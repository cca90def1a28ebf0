//! The admissible set `{x ∈ Ω : F_i(x) ∩ K_i ≠ ∅ for all i}`.

use crate::error::{CoreError, Result};
use crate::interval::Interval1D;
use crate::mapping::MappingExpr;
use crate::pq::{PQFunction, Quadratic};
use crate::rational::{ExtRat, Rat};
use crate::set::SetExpr;

fn iv(lo: ExtRat, lo_closed: bool, hi: ExtRat, hi_closed: bool) -> Interval1D {
    Interval1D::new(lo, lo_closed, hi, hi_closed)
}

/// `{x : q(x) ≤ 0}` (or `< 0` when `strict`) as a list of intervals.
fn quadratic_sublevel(q: &Quadratic, strict: bool) -> Result<Vec<Interval1D>> {
    let Quadratic(a, b, c) = q;
    let fin = |r: Rat| ExtRat::Finite(r);
    let ok = |v: &Rat| if strict { v.is_negative() } else { !v.is_positive() };
    if a.is_zero() {
        if b.is_zero() {
            return Ok(if ok(c) { vec![Interval1D::real()] } else { Vec::new() });
        }
        let root = -(c / b);
        return Ok(vec![if b.is_positive() {
            iv(ExtRat::NegInf, false, fin(root), !strict)
        } else {
            iv(fin(root), !strict, ExtRat::PosInf, false)
        }]);
    }
    let disc = b.square() - &(&Rat::from_int(4) * &(a * c));
    let two_a = &Rat::from_int(2) * a;
    if disc.is_negative() {
        return Ok(if a.is_negative() { vec![Interval1D::real()] } else { Vec::new() });
    }
    let s = disc.sqrt_exact().ok_or_else(|| CoreError::Irrational("sublevel set boundary".into()))?;
    let r1 = &(-b.clone() - s.clone()) / &two_a;
    let r2 = &(-b.clone() + s) / &two_a;
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    Ok(if a.is_positive() {
        if lo == hi && strict {
            Vec::new()
        } else {
            vec![iv(fin(lo), !strict, fin(hi), !strict)]
        }
    } else {
        vec![iv(ExtRat::NegInf, false, fin(lo), !strict), iv(fin(hi), !strict, ExtRat::PosInf, false)]
    })
}

/// `{x : φ(x) ≤ u}` (or `< u`).
pub fn pq_sublevel(phi: &PQFunction, u: &Rat, strict: bool) -> Result<SetExpr> {
    let bps = phi.breakpoints();
    let mut parts = Vec::new();
    for (i, q) in phi.pieces().iter().enumerate() {
        let lo = if i == 0 { ExtRat::NegInf } else { ExtRat::Finite(bps[i - 1].clone()) };
        let hi = if i == bps.len() { ExtRat::PosInf } else { ExtRat::Finite(bps[i].clone()) };
        let last = i == bps.len();
        let dom = iv(lo, true, hi, last);
        let shifted = Quadratic(q.0.clone(), q.1.clone(), &q.2 - u);
        for s in quadratic_sublevel(&shifted, strict)? {
            let piece = s.intersect(&dom);
            if !piece.is_empty() {
                parts.push(SetExpr::interval(piece));
            }
        }
    }
    Ok(SetExpr::union(1, parts))
}

/// `{x : F(x) ∩ K ≠ ∅}`
pub fn meets(f: &MappingExpr, k: &SetExpr) -> Result<SetExpr> {
    match f {
        MappingExpr::Epigraphical { phi } => {
            let SetExpr::Interval(i) = k else {
                return Err(CoreError::Unsupported("epigraphical constraints need an interval".into()));
            };
            if i.is_empty() {
                return Ok(SetExpr::empty(1));
            }
            match &i.upper {
                ExtRat::PosInf => Ok(SetExpr::whole(1)),
                ExtRat::Finite(u) => pq_sublevel(phi, u, !i.upper_closed),
                ExtRat::NegInf => Ok(SetExpr::empty(1)),
            }
        }
        MappingExpr::PolyhedralGraph { x_dim, y_dim, graph } => {
            let g = graph.as_polyhedron().ok_or_else(|| CoreError::Unsupported("graph is not a single polyhedron".into()))?;
            let kp = k.as_polyhedron().ok_or_else(|| CoreError::Unsupported("constraint is not a single polyhedron".into()))?;
            let both = g.intersect(&kp.embed(x_dim + y_dim, *x_dim));
            let keep: Vec<usize> = (0..*x_dim).collect();
            Ok(SetExpr::Polyhedron(both.project(&keep)))
        }
        MappingExpr::Product { .. } => Err(CoreError::Unsupported("admissible set of a product mapping".into())),
    }
}

pub fn admissible_set(mappings: &[MappingExpr], omega: &SetExpr, constraints: &[SetExpr]) -> Result<SetExpr> {
    if mappings.len() != constraints.len() {
        return Err(CoreError::Malformed("one constraint set per mapping is required".into()));
    }
    let mut members = vec![omega.clone()];
    for (f, k) in mappings.iter().zip(constraints) {
        members.push(meets(f, k)?);
    }
    Ok(SetExpr::intersection(members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system;
    use crate::vector::Vector;

    fn check_against_grid(set: &SetExpr, f: &MappingExpr, k: &SetExpr) {
        for j in -40..=40 {
            let x = Vector(vec![Rat::new(j, 8)]);
            let direct = system::intersect(&[&f.value_at(&x).unwrap(), k]).unwrap();
            let nonempty = !matches!(direct, crate::scalar::Witness::Empty);
            assert_eq!(set.contains(&x), nonempty, "x = {x}");
        }
    }

    #[test]
    fn examples() {
        let lin = MappingExpr::Epigraphical { phi: PQFunction::quadratic(Rat::zero(), Rat::one(), Rat::zero()) };
        let k = SetExpr::interval(Interval1D::lower_ray(Rat::zero()));
        let s = admissible_set(&[lin.clone()], &SetExpr::whole(1), &[k.clone()]).unwrap();
        check_against_grid(&s, &lin, &k);
        assert!(s.contains(&Vector(vec![Rat::zero()])) && !s.contains(&Vector(vec![Rat::new(1, 1000)])));

        let s = admissible_set(&[lin.clone()], &SetExpr::whole(1), &[SetExpr::interval(Interval1D::empty())]).unwrap();
        assert!(system::is_empty(&s).unwrap());

        let phi = PQFunction::new(
            vec![Rat::zero()],
            vec![Quadratic(Rat::zero(), Rat::one(), Rat::zero()), Quadratic(-Rat::one(), Rat::zero(), Rat::zero())],
        )
        .unwrap();
        let f4 = MappingExpr::Epigraphical { phi };
        let zero = SetExpr::interval(Interval1D::point(Rat::zero()));
        let s = admissible_set(&[f4.clone()], &SetExpr::whole(1), &[zero.clone()]).unwrap();
        assert!(system::is_subset(&SetExpr::whole(1), &s).unwrap());
        check_against_grid(&s, &f4, &zero);
    }
}
