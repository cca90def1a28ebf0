//! Set-valued mappings given by their graphs.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, CoreError, Result};
use crate::interval::Interval1D;
use crate::lp::Row;
use crate::polyhedron::HPolyhedron;
use crate::pq::{pq_inf, PQFunction};
use crate::rational::ExtRat;
use crate::set::SetExpr;
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MappingExpr {
    /// `F(x) = [phi(x), +inf)`
    Epigraphical { phi: PQFunction },
    /// `gph F = graph ⊂ ℝ^(x_dim + y_dim)`
    PolyhedralGraph { x_dim: usize, y_dim: usize, graph: SetExpr },
    /// `F(x) = F_1(x) × … × F_n(x)`
    Product { components: Vec<MappingExpr> },
}

impl MappingExpr {
    pub fn x_dim(&self) -> usize {
        match self {
            MappingExpr::Epigraphical { .. } => 1,
            MappingExpr::PolyhedralGraph { x_dim, .. } => *x_dim,
            MappingExpr::Product { components } => components.first().map_or(0, MappingExpr::x_dim),
        }
    }

    pub fn y_dim(&self) -> usize {
        match self {
            MappingExpr::Epigraphical { .. } => 1,
            MappingExpr::PolyhedralGraph { y_dim, .. } => *y_dim,
            MappingExpr::Product { components } => components.iter().map(MappingExpr::y_dim).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MappingExpr::Epigraphical { .. } => Ok(()),
            MappingExpr::PolyhedralGraph { x_dim, y_dim, graph } => {
                graph.validate()?;
                if graph.dim() != x_dim + y_dim {
                    return Err(dim_mismatch("mapping graph", x_dim + y_dim, graph.dim()));
                }
                Ok(())
            }
            MappingExpr::Product { components } => {
                if components.is_empty() {
                    return Err(CoreError::Malformed("product mapping needs components".into()));
                }
                let xd = self.x_dim();
                for c in components {
                    c.validate()?;
                    if c.x_dim() != xd {
                        return Err(dim_mismatch("product mapping component", xd, c.x_dim()));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn graph(&self) -> SetExpr {
        match self {
            MappingExpr::Epigraphical { phi } => SetExpr::Epigraph { f: phi.clone() },
            MappingExpr::PolyhedralGraph { graph, .. } => graph.clone(),
            MappingExpr::Product { components } => {
                let xd = self.x_dim();
                let dim = xd + self.y_dim();
                let mut off = xd;
                let members = components
                    .iter()
                    .map(|c| {
                        let mut coords: Vec<usize> = (0..xd).collect();
                        coords.extend(off..off + c.y_dim());
                        off += c.y_dim();
                        SetExpr::Embed { dim, coords, inner: Box::new(c.graph()) }
                    })
                    .collect();
                SetExpr::Intersection { dim, members }
            }
        }
    }

    pub fn in_graph(&self, x: &Vector, y: &Vector) -> bool {
        x.dim() == self.x_dim() && y.dim() == self.y_dim() && self.graph().contains(&Vector::concat(&[x, y]))
    }

    /// `F(x)` as a subset of the range space.
    pub fn value_at(&self, x: &Vector) -> Result<SetExpr> {
        x.check_dim(self.x_dim(), "mapping argument")?;
        match self {
            MappingExpr::Epigraphical { phi } => Ok(SetExpr::Interval(Interval1D::upper_ray(phi.eval(&x[0])))),
            MappingExpr::PolyhedralGraph { graph, .. } => slice_graph(graph, x),
            MappingExpr::Product { components } => {
                Ok(SetExpr::Product { factors: components.iter().map(|c| c.value_at(x)).collect::<Result<_>>()? })
            }
        }
    }

    /// Exact image `F(domain)` of an epigraphical mapping over a 1-D set.
    pub fn image_of(&self, domain: &SetExpr) -> Result<SetExpr> {
        let MappingExpr::Epigraphical { phi } = self else {
            return Err(CoreError::Unsupported("image of a non-epigraphical mapping".into()));
        };
        let mut rays = Vec::new();
        for piece in intervals_of(domain)? {
            if piece.is_empty() {
                continue;
            }
            let (m, attained) = pq_inf(phi, &piece)?;
            rays.push(Interval1D::new(m, attained, ExtRat::PosInf, false));
        }
        // the union of upward rays is the ray with the lowest start
        let best = rays.into_iter().reduce(|a, b| match a.lower.cmp(&b.lower) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => if a.lower_closed { a } else { b },
        });
        Ok(match best {
            Some(r) => SetExpr::Interval(r),
            None => SetExpr::empty(1),
        })
    }
}

/// `{y : (x, y) ∈ graph}` for polyhedral graphs and their unions.
fn slice_graph(graph: &SetExpr, x: &Vector) -> Result<SetExpr> {
    if let SetExpr::Union { members, .. } = graph {
        let yd = graph.dim() - x.dim();
        return Ok(SetExpr::union(yd, members.iter().map(|m| slice_graph(m, x)).collect::<Result<_>>()?));
    }
    let p = graph
        .as_polyhedron()
        .ok_or_else(|| CoreError::Unsupported("slicing a non-polyhedral graph".into()))?;
    let xd = x.dim();
    let yd = p.dim - xd;
    let rows = p
        .rows
        .iter()
        .map(|r| Row::new(r.normal.slice(xd, yd), r.relation, &r.rhs - &r.normal.slice(0, xd).dot(x)))
        .collect();
    Ok(SetExpr::Polyhedron(HPolyhedron { dim: yd, rows }))
}

/// Splits a 1-D set into intervals.
pub fn intervals_of(domain: &SetExpr) -> Result<Vec<Interval1D>> {
    if domain.dim() != 1 {
        return Err(dim_mismatch("1-D domain", 1, domain.dim()));
    }
    match domain {
        SetExpr::Interval(i) => Ok(vec![i.clone()]),
        SetExpr::Union { members, .. } => {
            let mut out = Vec::new();
            for m in members {
                out.extend(intervals_of(m)?);
            }
            Ok(out)
        }
        other => {
            let p = other
                .as_polyhedron()
                .ok_or_else(|| CoreError::Unsupported("1-D domain outside the interval class".into()))?;
            Ok(vec![interval_of_rows(&p)])
        }
    }
}

fn interval_of_rows(p: &HPolyhedron) -> Interval1D {
    let mut out = Interval1D::real();
    for r in &p.rows {
        let a = &r.normal[0];
        let strict = r.is_strict();
        let piece = if a.is_zero() {
            if r.holds(&Vector::zeros(1)) { Interval1D::real() } else { Interval1D::empty() }
        } else {
            let t = &r.rhs / a;
            match r.relation {
                crate::lp::Relation::Eq => Interval1D::point(t),
                _ if a.is_positive() => Interval1D::new(ExtRat::NegInf, false, ExtRat::Finite(t), !strict),
                _ => Interval1D::new(ExtRat::Finite(t), !strict, ExtRat::PosInf, false),
            }
        };
        out = out.intersect(&piece);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pq::Quadratic;
    use crate::rational::{q, Rat};

    pub(crate) fn f4() -> MappingExpr {
        let phi = PQFunction::new(
            vec![Rat::zero()],
            vec![Quadratic(Rat::zero(), Rat::one(), Rat::zero()), Quadratic(-Rat::one(), Rat::zero(), Rat::zero())],
        )
        .unwrap();
        MappingExpr::Epigraphical { phi }
    }

    #[test]
    fn images() {
        let img = f4().image_of(&SetExpr::Interval(Interval1D::open(Rat::zero(), q(1, 5)))).unwrap();
        assert_eq!(img, SetExpr::Interval(Interval1D::new(ExtRat::Finite(q(-1, 25)), false, ExtRat::PosInf, false)));
        let f1 = MappingExpr::Epigraphical { phi: PQFunction::constant(Rat::zero()) };
        assert_eq!(f1.image_of(&SetExpr::whole(1)).unwrap(), SetExpr::Interval(Interval1D::upper_ray(Rat::zero())));
        assert_eq!(f1.image_of(&SetExpr::empty(1)).unwrap(), SetExpr::empty(1));
        let poly = MappingExpr::PolyhedralGraph { x_dim: 1, y_dim: 1, graph: SetExpr::whole(2) };
        assert!(matches!(poly.image_of(&SetExpr::whole(1)), Err(CoreError::Unsupported(_))));
    }

    #[test]
    fn product_graph_and_slices() {
        let f1 = MappingExpr::Epigraphical { phi: PQFunction::constant(Rat::zero()) };
        // y = x
        let id = MappingExpr::PolyhedralGraph {
            x_dim: 1,
            y_dim: 1,
            graph: SetExpr::Polyhedron(HPolyhedron { dim: 2, rows: vec![Row::eq(Vector::from_ints(&[1, -1]), Rat::zero())] }),
        };
        let prod = MappingExpr::Product { components: vec![f1, id.clone()] };
        prod.validate().unwrap();
        assert!(prod.in_graph(&Vector::from_ints(&[2]), &Vector::from_ints(&[0, 2])));
        assert!(!prod.in_graph(&Vector::from_ints(&[2]), &Vector::from_ints(&[-1, 2])));
        let v = id.value_at(&Vector::from_ints(&[3])).unwrap();
        assert!(v.contains(&Vector::from_ints(&[3])) && !v.contains(&Vector::from_ints(&[2])));
    }
}
