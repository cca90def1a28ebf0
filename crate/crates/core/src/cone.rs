//! Finitely generated cones, normal and tangent cones, coderivatives.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{nullspace, rank};
use crate::lp::{self, LpOutcome, Relation, Row};
use crate::mapping::MappingExpr;
use crate::polyhedron::HPolyhedron;
use crate::rational::Rat;
use crate::set::SetExpr;
use crate::vector::Vector;

/// `cone(generators) + span(lineality)`; `h_rows`, when present, lists `a` with
/// the cone equal to `{v : a·v ≤ 0 for all a}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FGCone {
    pub dim: usize,
    pub generators: Vec<Vector>,
    pub lineality: Vec<Vector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_rows: Option<Vec<Vector>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeFlavor {
    Frechet,
    Clarke,
    Convex,
}

impl std::str::FromStr for ConeFlavor {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<ConeFlavor> {
        match s {
            "frechet" => Ok(ConeFlavor::Frechet),
            "clarke" => Ok(ConeFlavor::Clarke),
            "convex" => Ok(ConeFlavor::Convex),
            _ => Err(CoreError::Parse(format!("unknown cone flavor {s:?}"))),
        }
    }
}

fn dedup_directions(vs: impl IntoIterator<Item = Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        if v.is_zero() {
            continue;
        }
        let n = v.normalized_direction();
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

impl FGCone {
    pub fn zero(dim: usize) -> FGCone {
        FGCone { dim, generators: Vec::new(), lineality: Vec::new(), h_rows: None }
    }

    pub fn full(dim: usize) -> FGCone {
        FGCone { dim, generators: Vec::new(), lineality: (0..dim).map(|i| Vector::unit(dim, i)).collect(), h_rows: None }
    }

    pub fn generated(dim: usize, generators: Vec<Vector>) -> FGCone {
        FGCone { dim, generators: dedup_directions(generators), lineality: Vec::new(), h_rows: None }
    }

    /// V-representation of `{v : a·v ≤ 0 (a ∈ ineq), e·v = 0 (e ∈ eq)}`.
    pub fn from_h(dim: usize, ineq: &[Vector], eq: &[Vector]) -> FGCone {
        let ineq = dedup_directions(ineq.iter().cloned());
        let eq: Vec<Vector> = eq.iter().filter(|e| !e.is_zero()).cloned().collect();
        let all: Vec<Vector> = ineq.iter().chain(eq.iter()).cloned().collect();
        let lineality = nullspace(&all, dim);
        let mut fixed = eq.clone();
        fixed.extend(lineality.iter().cloned());
        let r = rank(&fixed, dim);
        let mut rays = Vec::new();
        if r < dim {
            let k = dim - 1 - r;
            for s in subsets(ineq.len(), k) {
                let mut rows = fixed.clone();
                rows.extend(s.iter().map(|&i| ineq[i].clone()));
                let ns = nullspace(&rows, dim);
                if ns.len() != 1 {
                    continue;
                }
                for cand in [ns[0].clone(), ns[0].neg()] {
                    if ineq.iter().all(|a| !a.dot(&cand).is_positive()) {
                        rays.push(cand);
                    }
                }
            }
        }
        let mut h = ineq.clone();
        for e in &eq {
            h.push(e.clone());
            h.push(e.neg());
        }
        FGCone { dim, generators: dedup_directions(rays), lineality, h_rows: Some(h) }
    }

    pub fn is_zero(&self) -> bool {
        self.generators.iter().all(Vector::is_zero) && self.lineality.iter().all(Vector::is_zero)
    }

    pub fn polar(&self) -> FGCone {
        FGCone::from_h(self.dim, &self.generators, &self.lineality)
    }

    /// Inequality description `{v : a·v ≤ 0}` of the cone.
    pub fn h_description(&self) -> Vec<Vector> {
        match &self.h_rows {
            Some(h) => h.clone(),
            None => {
                let p = self.polar();
                let mut h = p.generators.clone();
                for l in &p.lineality {
                    h.push(l.clone());
                    h.push(l.neg());
                }
                h
            }
        }
    }

    pub fn contains(&self, v: &Vector) -> bool {
        if v.dim() != self.dim {
            return false;
        }
        if let Some(h) = &self.h_rows {
            return h.iter().all(|a| !a.dot(v).is_positive());
        }
        let g = self.generators.len();
        let n = g + self.lineality.len();
        if n == 0 {
            return v.is_zero();
        }
        let mut rows = Vec::new();
        for c in 0..self.dim {
            let normal = Vector(self.generators.iter().chain(self.lineality.iter()).map(|w| w[c].clone()).collect());
            rows.push(Row::eq(normal, v[c].clone()));
        }
        for i in 0..g {
            rows.push(Row::le(Vector::unit(n, i).neg(), Rat::zero()));
        }
        lp::feasible_point(n, &rows).is_some()
    }

    pub fn is_subset_of(&self, other: &FGCone) -> bool {
        self.generators.iter().all(|g| other.contains(g))
            && self.lineality.iter().all(|l| other.contains(l) && other.contains(&l.neg()))
    }

    pub fn same_as(&self, other: &FGCone) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    pub fn sum(cones: &[FGCone], dim: usize) -> FGCone {
        FGCone {
            dim,
            generators: dedup_directions(cones.iter().flat_map(|c| c.generators.iter().cloned())),
            lineality: cones.iter().flat_map(|c| c.lineality.iter().cloned()).collect(),
            h_rows: None,
        }
    }

    pub fn intersect(cones: &[FGCone], dim: usize) -> FGCone {
        let polars: Vec<FGCone> = cones.iter().map(FGCone::polar).collect();
        FGCone::sum(&polars, dim).polar()
    }

    /// Places the cone on the coordinates `coords` of ℝ^dim.
    pub fn embed(&self, dim: usize, coords: &[usize]) -> FGCone {
        let lift = |v: &Vector| {
            let mut w = Vector::zeros(dim);
            for (k, &c) in coords.iter().enumerate() {
                w[c] = v[k].clone();
            }
            w
        };
        FGCone {
            dim,
            generators: self.generators.iter().map(lift).collect(),
            lineality: self.lineality.iter().map(lift).collect(),
            h_rows: None,
        }
    }

    /// `min ‖v − c‖₁` over `c` in the cone.
    pub fn l1_distance(&self, v: &Vector) -> Rat {
        // variables: λ (gens, ≥ 0), μ (lineality), s (≥ |v − Σ|)
        let g = self.generators.len();
        let l = self.lineality.len();
        let d = self.dim;
        let n = g + l + d;
        let mut rows = Vec::new();
        for c in 0..d {
            let mut a = Vector::zeros(n);
            for (i, w) in self.generators.iter().chain(self.lineality.iter()).enumerate() {
                a[i] = w[c].clone();
            }
            // v_c − Σ ≤ s_c and Σ − v_c ≤ s_c
            let mut lo = a.neg();
            lo[g + l + c] = -Rat::one();
            rows.push(Row::le(lo, -v[c].clone()));
            let mut hi = a;
            hi[g + l + c] = -Rat::one();
            rows.push(Row::le(hi, v[c].clone()));
        }
        for i in 0..g {
            rows.push(Row::le(Vector::unit(n, i).neg(), Rat::zero()));
        }
        let mut obj = Vector::zeros(n);
        for c in 0..d {
            obj[g + l + c] = Rat::one();
        }
        match lp::minimize(n, &rows, &obj) {
            LpOutcome::Optimal { value, .. } => value,
            _ => unreachable!("distance LP is feasible and bounded"),
        }
    }
}

fn polyhedral_normal(p: &HPolyhedron, x: &Vector) -> FGCone {
    let mut gens = Vec::new();
    let mut lin = Vec::new();
    for r in p.active_rows(x) {
        match r.relation {
            Relation::Eq => lin.push(r.normal.clone()),
            _ => gens.push(r.normal.clone()),
        }
    }
    FGCone { dim: p.dim, generators: dedup_directions(gens), lineality: lin, h_rows: None }
}

static STUB_CONES: AtomicBool = AtomicBool::new(false);

/// Fault injection: every normal cone becomes `{0}`.
pub fn set_stub_cones(on: bool) {
    STUB_CONES.store(on, Ordering::Relaxed);
}

/// Normal cone of `s` at `x`.
pub fn normal_cone(s: &SetExpr, x: &Vector, flavor: ConeFlavor) -> Result<FGCone> {
    x.check_dim(s.dim(), "base point")?;
    if !s.contains(x) {
        return Err(CoreError::NotInSet);
    }
    if STUB_CONES.load(Ordering::Relaxed) {
        return Ok(FGCone::zero(s.dim()));
    }
    if flavor == ConeFlavor::Convex && !s.is_convex() {
        return Err(CoreError::Unsupported("convex normal cone of a nonconvex set".into()));
    }
    let dim = s.dim();
    match s {
        SetExpr::Epigraph { f } => {
            let (x0, y0) = (&x[0], &x[1]);
            if *y0 > f.eval(x0) {
                return Ok(FGCone::zero(2));
            }
            let (sl, sr) = f.slopes(x0);
            let clarke = FGCone::generated(2, vec![Vector(vec![sl.clone(), -Rat::one()]), Vector(vec![sr.clone(), -Rat::one()])]);
            if flavor == ConeFlavor::Frechet && sl > sr {
                return Ok(FGCone::zero(2));
            }
            Ok(clarke)
        }
        SetExpr::Product { factors } => {
            let mut off = 0;
            let mut parts = Vec::new();
            for f in factors {
                let d = f.dim();
                let c = normal_cone(f, &x.slice(off, d), flavor)?;
                parts.push(c.embed(dim, &(off..off + d).collect::<Vec<_>>()));
                off += d;
            }
            Ok(FGCone::sum(&parts, dim))
        }
        SetExpr::Embed { coords, inner, .. } => {
            let sub = Vector(coords.iter().map(|&i| x[i].clone()).collect());
            Ok(normal_cone(inner, &sub, flavor)?.embed(dim, coords))
        }
        SetExpr::Union { members, .. } if members.len() > 1 => {
            let active: Vec<SetExpr> = members.iter().map(SetExpr::closure).filter(|m| m.contains(x)).collect();
            if active.len() == 1 {
                return normal_cone(&active[0], x, flavor);
            }
            match flavor {
                ConeFlavor::Frechet => {
                    let cones = active.iter().map(|m| normal_cone(m, x, flavor)).collect::<Result<Vec<_>>>()?;
                    Ok(FGCone::intersect(&cones, dim))
                }
                _ => Err(CoreError::Unsupported("Clarke normal cone of a union of several pieces".into())),
            }
        }
        _ => match s.as_polyhedron() {
            Some(p) => Ok(polyhedral_normal(&p, x)),
            None => intersection_normal(s, x, flavor),
        },
    }
}

/// Intersections of cylinders on disjoint coordinates are products in disguise.
fn intersection_normal(s: &SetExpr, x: &Vector, flavor: ConeFlavor) -> Result<FGCone> {
    let SetExpr::Intersection { dim, members } = s else {
        return Err(CoreError::Unsupported("normal cone of this set class".into()));
    };
    let mut used = vec![false; *dim];
    for m in members {
        let SetExpr::Embed { coords, .. } = m else {
            return Err(CoreError::Unsupported("normal cone of a non-polyhedral intersection".into()));
        };
        for &c in coords {
            if used[c] {
                return Err(CoreError::Unsupported("normal cone of overlapping non-polyhedral cylinders".into()));
            }
            used[c] = true;
        }
    }
    let cones = members.iter().map(|m| normal_cone(m, x, flavor)).collect::<Result<Vec<_>>>()?;
    Ok(FGCone::sum(&cones, *dim))
}

pub fn clarke_tangent(s: &SetExpr, x: &Vector) -> Result<FGCone> {
    Ok(normal_cone(s, x, ConeFlavor::Clarke)?.polar())
}

/// `{x* : (x*, −y*) ∈ N_gph F(x, y)}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoderivativeResult {
    Empty,
    Point { point: Vector },
    Segment { from: Vector, to: Vector },
    Ray { origin: Vector, direction: Vector },
    Polyhedral { set: HPolyhedron },
}

#[derive(Clone, Debug)]
pub struct Coderivative {
    pub slice: HPolyhedron,
    pub result: CoderivativeResult,
}

impl Coderivative {
    pub fn contains(&self, v: &Vector) -> bool {
        self.slice.contains(v)
    }
}

pub fn coderivative(f: &MappingExpr, x: &Vector, y: &Vector, y_star: &Vector, flavor: ConeFlavor) -> Result<Coderivative> {
    x.check_dim(f.x_dim(), "coderivative base x")?;
    y.check_dim(f.y_dim(), "coderivative base y")?;
    y_star.check_dim(f.y_dim(), "coderivative direction")?;
    let n = normal_cone(&f.graph(), &Vector::concat(&[x, y]), flavor).map_err(|e| match e {
        CoreError::NotInSet => CoreError::NotInGraph,
        e => e,
    })?;
    let xd = f.x_dim();
    let yd = f.y_dim();
    let rows = n
        .h_description()
        .iter()
        .map(|a| Row::le(a.slice(0, xd), a.slice(xd, yd).dot(y_star)))
        .collect();
    let slice = HPolyhedron { dim: xd, rows };
    let result = classify(&slice);
    Ok(Coderivative { slice, result })
}

fn classify(p: &HPolyhedron) -> CoderivativeResult {
    let Some(w) = p.feasible() else { return CoderivativeResult::Empty };
    let extent = |i: usize, sign: i32| {
        let obj = Vector::unit(p.dim, i).scale(&Rat::from_int(sign as i64));
        match lp::maximize(p.dim, &p.rows, &obj) {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    };
    if p.dim == 1 {
        return match (extent(0, -1), extent(0, 1)) {
            (Some(a), Some(b)) if a == b => CoderivativeResult::Point { point: a },
            (Some(a), Some(b)) => CoderivativeResult::Segment { from: a, to: b },
            (Some(a), None) => CoderivativeResult::Ray { origin: a, direction: Vector::from_ints(&[1]) },
            (None, Some(b)) => CoderivativeResult::Ray { origin: b, direction: Vector::from_ints(&[-1]) },
            (None, None) => CoderivativeResult::Polyhedral { set: p.clone() },
        };
    }
    let pinned = (0..p.dim).all(|i| match (extent(i, -1), extent(i, 1)) {
        (Some(a), Some(b)) => a[i] == b[i],
        _ => false,
    });
    if pinned {
        CoderivativeResult::Point { point: w }
    } else {
        CoderivativeResult::Polyhedral { set: p.clone() }
    }
}
