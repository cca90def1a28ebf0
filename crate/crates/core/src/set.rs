//! Finitely represented subsets of ℝⁿ.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, CoreError, Result};
use crate::interval::Interval1D;
use crate::lp::Row;
use crate::polyhedron::HPolyhedron;
use crate::pq::{pq_inf, PQFunction};
use crate::rational::{ExtRat, Rat};
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SetExpr {
    Polyhedron(HPolyhedron),
    Union { dim: usize, members: Vec<SetExpr> },
    Intersection { dim: usize, members: Vec<SetExpr> },
    Singleton { point: Vector },
    Interval(Interval1D),
    /// `{(x, y) : y ≥ f(x)}`
    Epigraph { f: PQFunction },
    Product { factors: Vec<SetExpr> },
    /// Cylinder `{w ∈ ℝ^dim : (w[coords[0]], …) ∈ inner}`.
    Embed { dim: usize, coords: Vec<usize>, inner: Box<SetExpr> },
}

fn select(v: &Vector, coords: &[usize]) -> Vector {
    Vector(coords.iter().map(|&i| v[i].clone()).collect())
}

impl SetExpr {
    pub fn empty(dim: usize) -> SetExpr {
        SetExpr::Union { dim, members: Vec::new() }
    }

    pub fn whole(dim: usize) -> SetExpr {
        SetExpr::Polyhedron(HPolyhedron::whole(dim))
    }

    /// Open ℓ∞ ball, or the whole space for an infinite radius.
    pub fn ball(center: &Vector, radius: &ExtRat) -> SetExpr {
        match radius {
            ExtRat::Finite(r) => SetExpr::Polyhedron(HPolyhedron::ball(center, r, true)),
            ExtRat::PosInf => SetExpr::whole(center.dim()),
            ExtRat::NegInf => SetExpr::empty(center.dim()),
        }
    }

    pub fn interval(i: Interval1D) -> SetExpr {
        SetExpr::Interval(i)
    }

    pub fn intersection(members: Vec<SetExpr>) -> SetExpr {
        let dim = members.first().map(SetExpr::dim).unwrap_or(0);
        SetExpr::Intersection { dim, members }
    }

    pub fn union(dim: usize, members: Vec<SetExpr>) -> SetExpr {
        SetExpr::Union { dim, members }
    }

    pub fn dim(&self) -> usize {
        match self {
            SetExpr::Polyhedron(p) => p.dim,
            SetExpr::Union { dim, .. } | SetExpr::Intersection { dim, .. } | SetExpr::Embed { dim, .. } => *dim,
            SetExpr::Singleton { point } => point.dim(),
            SetExpr::Interval(_) => 1,
            SetExpr::Epigraph { .. } => 2,
            SetExpr::Product { factors } => factors.iter().map(SetExpr::dim).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetExpr::Polyhedron(p) => HPolyhedron::new(p.dim, p.rows.clone()).map(|_| ()),
            SetExpr::Union { dim, members } | SetExpr::Intersection { dim, members } => {
                for m in members {
                    m.validate()?;
                    if m.dim() != *dim {
                        return Err(dim_mismatch("set member", *dim, m.dim()));
                    }
                }
                Ok(())
            }
            SetExpr::Product { factors } => {
                if factors.is_empty() {
                    return Err(CoreError::Malformed("product needs at least one factor".into()));
                }
                factors.iter().try_for_each(SetExpr::validate)
            }
            SetExpr::Embed { dim, coords, inner } => {
                inner.validate()?;
                if coords.len() != inner.dim() {
                    return Err(dim_mismatch("embedded coordinates", inner.dim(), coords.len()));
                }
                let mut seen = vec![false; *dim];
                for &c in coords {
                    if c >= *dim || seen[c] {
                        return Err(CoreError::Malformed(format!("bad embedding coordinate {c}")));
                    }
                    seen[c] = true;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            SetExpr::Polyhedron(p) => p.contains(x),
            SetExpr::Union { members, .. } => members.iter().any(|m| m.contains(x)),
            SetExpr::Intersection { members, .. } => members.iter().all(|m| m.contains(x)),
            SetExpr::Singleton { point } => point == x,
            SetExpr::Interval(i) => i.contains(&x[0]),
            SetExpr::Epigraph { f } => x[1] >= f.eval(&x[0]),
            SetExpr::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let d = f.dim();
                    let ok = f.contains(&x.slice(off, d));
                    off += d;
                    ok
                })
            }
            SetExpr::Embed { coords, inner, .. } => inner.contains(&select(x, coords)),
        }
    }

    /// `self + v`
    pub fn translate(&self, v: &Vector) -> SetExpr {
        match self {
            SetExpr::Polyhedron(p) => SetExpr::Polyhedron(p.translate(v)),
            SetExpr::Union { dim, members } => {
                SetExpr::Union { dim: *dim, members: members.iter().map(|m| m.translate(v)).collect() }
            }
            SetExpr::Intersection { dim, members } => {
                SetExpr::Intersection { dim: *dim, members: members.iter().map(|m| m.translate(v)).collect() }
            }
            SetExpr::Singleton { point } => SetExpr::Singleton { point: point.add(v) },
            SetExpr::Interval(i) => SetExpr::Interval(i.shift(&v[0])),
            SetExpr::Epigraph { f } => SetExpr::Epigraph { f: f.translate(&v[0], &v[1]) },
            SetExpr::Product { factors } => {
                let mut off = 0;
                SetExpr::Product {
                    factors: factors
                        .iter()
                        .map(|f| {
                            let d = f.dim();
                            let t = f.translate(&v.slice(off, d));
                            off += d;
                            t
                        })
                        .collect(),
                }
            }
            SetExpr::Embed { dim, coords, inner } => SetExpr::Embed {
                dim: *dim,
                coords: coords.clone(),
                inner: Box::new(inner.translate(&select(v, coords))),
            },
        }
    }

    /// Convex polyhedral form, when the expression is one.
    pub fn as_polyhedron(&self) -> Option<HPolyhedron> {
        match self {
            SetExpr::Polyhedron(p) => Some(p.clone()),
            SetExpr::Singleton { point } => Some(HPolyhedron::point(point)),
            SetExpr::Interval(i) => Some(HPolyhedron { dim: 1, rows: i.rows() }),
            SetExpr::Intersection { dim, members } => {
                let mut out = HPolyhedron::whole(*dim);
                for m in members {
                    out = out.intersect(&m.as_polyhedron()?);
                }
                Some(out)
            }
            SetExpr::Union { dim, members } if members.is_empty() => Some(HPolyhedron::empty(*dim)),
            SetExpr::Union { members, .. } if members.len() == 1 => members[0].as_polyhedron(),
            SetExpr::Product { factors } => {
                let dim = self.dim();
                let mut rows = Vec::new();
                let mut off = 0;
                for f in factors {
                    let p = f.as_polyhedron()?;
                    rows.extend(p.rows.iter().map(|r| r.embed(dim, off)));
                    off += p.dim;
                }
                Some(HPolyhedron { dim, rows })
            }
            SetExpr::Embed { dim, coords, inner } => {
                let p = inner.as_polyhedron()?;
                let rows = p
                    .rows
                    .iter()
                    .map(|r| {
                        let mut n = Vector::zeros(*dim);
                        for (k, &c) in coords.iter().enumerate() {
                            n[c] = r.normal[k].clone();
                        }
                        Row::new(n, r.relation, r.rhs.clone())
                    })
                    .collect();
                Some(HPolyhedron { dim: *dim, rows })
            }
            _ => None,
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(self, SetExpr::Epigraph { f } if f.pieces().iter().all(|p| !p.0.is_negative()) && convex_pq(f))
            || self.as_polyhedron().is_some()
    }

    pub fn closure(&self) -> SetExpr {
        match self {
            SetExpr::Polyhedron(p) => SetExpr::Polyhedron(p.closure()),
            SetExpr::Union { dim, members } => {
                SetExpr::Union { dim: *dim, members: members.iter().map(SetExpr::closure).collect() }
            }
            SetExpr::Interval(i) => SetExpr::Interval(i.closure()),
            SetExpr::Product { factors } => SetExpr::Product { factors: factors.iter().map(SetExpr::closure).collect() },
            SetExpr::Embed { dim, coords, inner } => {
                SetExpr::Embed { dim: *dim, coords: coords.clone(), inner: Box::new(inner.closure()) }
            }
            SetExpr::Intersection { .. } => match self.as_polyhedron() {
                Some(p) => SetExpr::Polyhedron(p.closure()),
                // closure of an intersection is not the intersection of closures in general
                None => self.clone(),
            },
            other => other.clone(),
        }
    }

    /// `self \ {p}`
    pub fn remove_point(&self, p: &Vector) -> SetExpr {
        if !self.contains(p) {
            return self.clone();
        }
        match self {
            SetExpr::Singleton { .. } => SetExpr::empty(self.dim()),
            SetExpr::Interval(i) => {
                let x = ExtRat::Finite(p[0].clone());
                let left = Interval1D::new(i.lower.clone(), i.lower_closed, x.clone(), false);
                let right = Interval1D::new(x, false, i.upper.clone(), i.upper_closed);
                let members = [left, right].into_iter().filter(|j| !j.is_empty()).map(SetExpr::Interval).collect();
                SetExpr::Union { dim: 1, members }
            }
            SetExpr::Union { dim, members } => {
                SetExpr::Union { dim: *dim, members: members.iter().map(|m| m.remove_point(p)).collect() }
            }
            _ => {
                let d = self.dim();
                let mut members = Vec::with_capacity(2 * d);
                for i in 0..d {
                    for sign in [1i64, -1] {
                        let n = Vector::unit(d, i).scale(&Rat::from_int(sign));
                        let rhs = &p[i] * &Rat::from_int(sign);
                        let half = SetExpr::Polyhedron(HPolyhedron { dim: d, rows: vec![Row::lt(n, rhs)] });
                        members.push(SetExpr::Intersection { dim: d, members: vec![self.clone(), half] });
                    }
                }
                SetExpr::Union { dim: d, members }
            }
        }
    }

    /// `self ∪ {p}`
    pub fn with_point(&self, p: &Vector) -> SetExpr {
        if self.contains(p) {
            return self.clone();
        }
        SetExpr::Union { dim: self.dim(), members: vec![self.clone(), SetExpr::Singleton { point: p.clone() }] }
    }

    /// Set complement as another expression.
    pub fn complement(&self) -> Result<SetExpr> {
        let d = self.dim();
        Ok(match self {
            SetExpr::Polyhedron(p) => poly_complement(p),
            SetExpr::Singleton { point } => poly_complement(&HPolyhedron::point(point)),
            SetExpr::Interval(i) => {
                let mut members = Vec::new();
                if i.is_empty() {
                    members.push(SetExpr::whole(1));
                } else {
                    let left = Interval1D::new(ExtRat::NegInf, false, i.lower.clone(), !i.lower_closed);
                    let right = Interval1D::new(i.upper.clone(), !i.upper_closed, ExtRat::PosInf, false);
                    for j in [left, right] {
                        if !j.is_empty() {
                            members.push(SetExpr::Interval(j));
                        }
                    }
                }
                SetExpr::Union { dim: 1, members }
            }
            SetExpr::Union { dim, members } => SetExpr::Intersection {
                dim: *dim,
                members: members.iter().map(SetExpr::complement).collect::<Result<_>>()?,
            },
            SetExpr::Intersection { dim, members } => SetExpr::Union {
                dim: *dim,
                members: members.iter().map(SetExpr::complement).collect::<Result<_>>()?,
            },
            SetExpr::Product { factors } => {
                let mut members = Vec::new();
                let mut off = 0;
                for f in factors {
                    let coords = (off..off + f.dim()).collect();
                    members.push(SetExpr::Embed { dim: d, coords, inner: Box::new(f.complement()?) });
                    off += f.dim();
                }
                SetExpr::Union { dim: d, members }
            }
            SetExpr::Embed { dim, coords, inner } => {
                SetExpr::Embed { dim: *dim, coords: coords.clone(), inner: Box::new(inner.complement()?) }
            }
            SetExpr::Epigraph { .. } => {
                return Err(CoreError::Unsupported("complement of an epigraph".into()));
            }
        })
    }

    /// Exact ℓ∞ distance from `p` to the set (`+inf` for the empty set).
    pub fn distance(&self, p: &Vector) -> Result<ExtRat> {
        p.check_dim(self.dim(), "distance point")?;
        if let Some(poly) = self.as_polyhedron() {
            return poly.distance(p);
        }
        match self {
            SetExpr::Union { members, .. } => {
                let mut best = ExtRat::PosInf;
                for m in members {
                    best = best.min(m.distance(p)?);
                }
                Ok(best)
            }
            SetExpr::Product { factors } => {
                let mut worst = ExtRat::Finite(Rat::zero());
                let mut off = 0;
                for f in factors {
                    worst = worst.max(f.distance(&p.slice(off, f.dim()))?);
                    off += f.dim();
                }
                Ok(worst)
            }
            SetExpr::Embed { coords, inner, .. } => inner.distance(&select(p, coords)),
            SetExpr::Epigraph { f } => epigraph_distance(f, &p[0], &p[1]),
            _ => Err(CoreError::Unsupported("distance to a non-polyhedral intersection".into())),
        }
    }
}

fn convex_pq(f: &PQFunction) -> bool {
    f.breakpoints().iter().all(|b| {
        let (l, r) = f.slopes(b);
        l <= r
    })
}

fn poly_complement(p: &HPolyhedron) -> SetExpr {
    let members = if p.rows.is_empty() {
        Vec::new()
    } else {
        p.complement_pieces().into_iter().map(SetExpr::Polyhedron).collect()
    };
    SetExpr::Union { dim: p.dim, members }
}

/// ℓ∞ distance from `(p, q)` to the epigraph of `f`.
///
/// The distance is the unique root of the strictly decreasing function
/// `r ↦ min_{|x-p| ≤ r} f(x) - q - r`; every rational candidate root is tried.
fn epigraph_distance(f: &PQFunction, p: &Rat, q: &Rat) -> Result<ExtRat> {
    if *q >= f.eval(p) {
        return Ok(ExtRat::Finite(Rat::zero()));
    }
    let mut cands: Vec<Rat> = Vec::new();
    let two = Rat::from_int(2);
    for piece in f.pieces() {
        let (a2, a1, a0) = (&piece.0, &piece.1, &piece.2);
        for s in [Rat::one(), -Rat::one()] {
            // a2 (p + s r)^2 + a1 (p + s r) + a0 - q - r = 0
            let c2 = a2.clone();
            let c1 = &(&(&two * a2) * &(p * &s)) + &(&(a1 * &s) - &Rat::one());
            let c0 = &(&(a2 * &p.square()) + &(a1 * p)) + &(a0 - q);
            cands.extend(rational_roots(&c2, &c1, &c0));
        }
        if !a2.is_zero() {
            let c = -a1 / &(&two * a2);
            cands.push(&piece.eval(&c) - q);
        }
    }
    for b in f.breakpoints() {
        cands.push(&f.eval(b) - q);
    }
    cands.retain(|r| r.is_positive());
    cands.sort();
    cands.dedup();
    for r in cands {
        let window = Interval1D::closed(p - &r, p + &r);
        let (m, _) = pq_inf(f, &window)?;
        if m == ExtRat::Finite(q + &r) {
            return Ok(ExtRat::Finite(r));
        }
    }
    Err(CoreError::Irrational(format!("distance from ({p}, {q}) to an epigraph")))
}

/// Rational roots of `c2 r² + c1 r + c0`.
pub(crate) fn rational_roots(c2: &Rat, c1: &Rat, c0: &Rat) -> Vec<Rat> {
    if c2.is_zero() {
        if c1.is_zero() {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = &c1.square() - &(&(&Rat::from_int(4) * c2) * c0);
    match disc.sqrt_exact() {
        Some(s) => {
            let den = &Rat::from_int(2) * c2;
            vec![&(-c1 + &s) / &den, &(-c1 - &s) / &den]
        }
        None => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pq::Quadratic;
    use crate::rational::q;

    fn v(xs: &[Rat]) -> Vector {
        Vector(xs.to_vec())
    }

    #[test]
    fn distances() {
        let a = SetExpr::Interval(Interval1D::lower_ray(q(-3, 100)));
        assert_eq!(a.distance(&v(&[Rat::zero()])).unwrap(), ExtRat::Finite(q(3, 100)));
        assert_eq!(SetExpr::empty(1).distance(&v(&[Rat::zero()])).unwrap(), ExtRat::PosInf);
        let s = SetExpr::Singleton { point: v(&[q(1, 3)]) };
        assert_eq!(s.distance(&v(&[Rat::zero()])).unwrap(), ExtRat::Finite(q(1, 3)));
    }

    #[test]
    fn epigraph_distance_of_parabola() {
        // y ≥ x², point (0, -1): need r with min_{|x|≤r} x² = 0 ≤ -1 + r, so r = 1
        let e = SetExpr::Epigraph { f: PQFunction::quadratic(Rat::one(), Rat::zero(), Rat::zero()) };
        assert_eq!(e.distance(&v(&[Rat::zero(), -Rat::one()])).unwrap(), ExtRat::Finite(Rat::one()));
        // y ≥ x, point (0, -1): x = -r, -r = -1 + r → r = 1/2
        let l = SetExpr::Epigraph { f: PQFunction::quadratic(Rat::zero(), Rat::one(), Rat::zero()) };
        assert_eq!(l.distance(&v(&[Rat::zero(), -Rat::one()])).unwrap(), ExtRat::Finite(q(1, 2)));
    }

    #[test]
    fn puncture_and_complement() {
        let k = SetExpr::Interval(Interval1D::lower_ray(Rat::zero()));
        let punct = k.remove_point(&v(&[Rat::zero()]));
        assert!(!punct.contains(&v(&[Rat::zero()])));
        assert!(punct.contains(&v(&[q(-1, 2)])));
        let c = k.complement().unwrap();
        assert!(c.contains(&v(&[q(1, 8)])));
        assert!(!c.contains(&v(&[Rat::zero()])));
        let box2 = SetExpr::Polyhedron(HPolyhedron::ball(&Vector::zeros(2), &Rat::one(), false));
        let p = box2.remove_point(&Vector::zeros(2));
        assert!(!p.contains(&Vector::zeros(2)));
        assert!(p.contains(&v(&[q(1, 2), Rat::zero()])));
    }

    #[test]
    fn epigraph_translation() {
        let f = PQFunction::new(
            vec![Rat::zero()],
            vec![Quadratic(Rat::zero(), Rat::one(), Rat::zero()), Quadratic(-Rat::one(), Rat::zero(), Rat::zero())],
        )
        .unwrap();
        let e = SetExpr::Epigraph { f };
        let t = e.translate(&v(&[Rat::one(), Rat::one()]));
        assert!(t.contains(&v(&[Rat::one(), Rat::one()])));
        assert!(!t.contains(&v(&[Rat::one(), q(1, 2)])));
    }
}
