//! Bounded search for dual certificates. Every hit is re-verified before it is returned.

use serde::{Deserialize, Serialize};

use crate::certificate::{verify, CertKind, CertTuple, DualCertificate, SetRef};
use crate::cone::{normal_cone, ConeFlavor, FGCone};
use crate::config::SearchConfig;
use crate::error::Result;
use crate::family::MemberParam;
use crate::lp::{self, Row};
use crate::rational::{ExtRat, Rat};
use crate::set::SetExpr;
use crate::stationarity::MultiProblem;
use crate::vector::Vector;

/// Upper bound on candidate combinations tried per search.
pub const MAX_TUPLES: usize = 10_000;
const PER_SET: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Found { certificate: DualCertificate },
    NotFound { tried: usize },
}

fn push_unique(out: &mut Vec<Vector>, p: Vector) {
    if !out.contains(&p) {
        out.push(p);
    }
}

fn offsets(c: &Rat, r: &Rat, depth: u32) -> Vec<Rat> {
    let mut out = vec![c.clone()];
    for j in 1..=depth as i32 {
        let step = r * &Rat::pow2(-j);
        out.push(c + &step);
        out.push(c - &step);
    }
    out
}

/// Points of `s` inside the open box of radius `r` around `c`, biased towards
/// the boundary where normal cones are nontrivial.
pub fn candidate_points(s: &SetExpr, c: &Vector, r: &Rat, depth: u32) -> Vec<Vector> {
    let mut out = Vec::new();
    let near = |p: &Vector| p.sub(c).norm_inf() < *r;
    match s {
        SetExpr::Singleton { point } => push_unique(&mut out, point.clone()),
        SetExpr::Interval(i) => {
            for (end, closed) in [(&i.lower, i.lower_closed), (&i.upper, i.upper_closed)] {
                if let (ExtRat::Finite(t), true) = (end, closed) {
                    push_unique(&mut out, Vector(vec![t.clone()]));
                }
            }
        }
        SetExpr::Epigraph { f } => {
            let mut xs = offsets(&c[0], r, depth);
            xs.extend(f.breakpoints().iter().filter(|b| (*b - &c[0]).abs() < *r).cloned());
            for a in xs {
                let y = f.eval(&a);
                push_unique(&mut out, Vector(vec![a, y]));
            }
        }
        SetExpr::Polyhedron(h) => {
            for row in &h.rows {
                for (k, a) in row.normal.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let step = (&row.rhs - &row.normal.dot(c)) / a;
                    let mut p = c.clone();
                    p[k] = &p[k] + &step;
                    push_unique(&mut out, p);
                }
            }
        }
        SetExpr::Union { members, .. } | SetExpr::Intersection { members, .. } => {
            for m in members {
                for p in candidate_points(m, c, r, depth) {
                    push_unique(&mut out, p);
                }
            }
        }
        SetExpr::Product { factors } => {
            let mut acc = vec![Vector::zeros(0)];
            let mut off = 0;
            for f in factors {
                let d = f.dim();
                let cs = c.slice(off, d);
                let mut pts = candidate_points(f, &cs, r, depth);
                if f.contains(&cs) {
                    pts.insert(0, cs);
                }
                pts.truncate(PER_SET / 2);
                acc = acc.iter().flat_map(|a| pts.iter().map(move |p| Vector::concat(&[a, p]))).take(PER_SET * 4).collect();
                off += d;
            }
            out = acc;
        }
        SetExpr::Embed { coords, inner, .. } => {
            let cs = Vector(coords.iter().map(|&i| c[i].clone()).collect());
            for q in candidate_points(inner, &cs, r, depth) {
                let mut p = c.clone();
                for (k, &i) in coords.iter().enumerate() {
                    p[i] = q[k].clone();
                }
                push_unique(&mut out, p);
            }
        }
    }
    if s.contains(c) {
        out.insert(0, c.clone());
    }
    let mut kept: Vec<Vector> = Vec::new();
    for p in out {
        if near(&p) && s.contains(&p) && !kept.contains(&p) {
            kept.push(p);
        }
    }
    kept.truncate(PER_SET);
    kept
}

/// Sign vectors, restricted to `coords`, of the generators and lineality
/// directions of a cone; the zero pattern comes first.
fn orthants(cone: &FGCone, coords: &[usize]) -> Vec<Vec<i32>> {
    let mut out = vec![vec![0; coords.len()]];
    let mut dirs: Vec<Vector> = cone.generators.clone();
    for l in &cone.lineality {
        dirs.push(l.clone());
        dirs.push(l.neg());
    }
    for g in dirs {
        let s: Vec<i32> = coords.iter().map(|&i| g[i].signum()).collect();
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Rows fixing the sign pattern of the block at `offset` and its norm form.
fn orthant_rows(signs: &[i32], coords: &[usize], n: usize, offset: usize, norm: &mut Vector, rows: &mut Vec<Row>) {
    for (k, &s) in signs.iter().enumerate() {
        let e = Vector::unit(n, offset + coords[k]);
        match s {
            0 => rows.push(Row::eq(e, Rat::zero())),
            _ => {
                let sr = Rat::from_int(s as i64);
                rows.push(Row::le(e.scale(&-sr.clone()), Rat::zero()));
                norm[offset + coords[k]] = sr;
            }
        }
    }
}

fn abs_sum_rows(forms: &[Vector], s0: usize, n: usize, bound: &Rat, rows: &mut Vec<Row>) {
    let mut total = Vector::zeros(n);
    for (k, f) in forms.iter().enumerate() {
        let w = Vector::unit(n, s0 + k);
        rows.push(Row::le(f.sub(&w), Rat::zero()));
        rows.push(Row::le(f.neg().sub(&w), Rat::zero()));
        total[s0 + k] = Rat::one();
    }
    rows.push(Row::lt(total, bound.clone()));
}

struct Candidate {
    set: SetRef,
    point: Vector,
    cone: FGCone,
}

fn cartesian(sizes: &[usize], limit: usize) -> Vec<Vec<usize>> {
    let mut acc = vec![Vec::new()];
    for &s in sizes {
        let mut next = Vec::new();
        for a in &acc {
            for i in 0..s {
                if next.len() >= limit {
                    break;
                }
                let mut b = a.clone();
                b.push(i);
                next.push(b);
            }
        }
        acc = next;
    }
    acc
}

fn member_candidates(
    fam: &crate::family::SetFamily,
    center: &Vector,
    eps: &Rat,
    flavor: ConeFlavor,
    cfg: &SearchConfig,
    mk: impl Fn(MemberParam) -> SetRef,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    let mut seen_zero = false;
    for h in fam.members_within(center, &ExtRat::Finite(eps.clone()), cfg)? {
        for p in candidate_points(&h.realized, center, eps, cfg.depth.min(6)) {
            let Ok(cone) = normal_cone(&h.realized, &p, flavor) else { continue };
            if cone.is_zero() {
                if seen_zero {
                    continue;
                }
                seen_zero = true;
            }
            out.push(Candidate { set: mk(h.param.clone()), point: p, cone });
        }
    }
    Ok(out)
}

/// Fuzzy-separation certificate for the lifted collection at `eps`.
pub fn search_fuzzy(p: &MultiProblem, eps: &Rat, flavor: ConeFlavor, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let c = p.collection();
    let d = c.x_bar.dim();
    let all: Vec<usize> = (0..d).collect();
    let mut lists = Vec::new();
    for (i, fam) in c.families.iter().enumerate() {
        lists.push(member_candidates(fam, &c.x_bar, eps, flavor, cfg, |param| SetRef::Collection { index: i, param })?);
    }
    let k = lists.len();
    let n = (k + 1) * d;
    let mut tried = 0;
    let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
    for combo in cartesian(&sizes, MAX_TUPLES) {
        let picks: Vec<&Candidate> = combo.iter().enumerate().map(|(i, &j)| &lists[i][j]).collect();
        let patterns: Vec<Vec<Vec<i32>>> = picks.iter().map(|c| orthants(&c.cone, &all)).collect();
        let psizes: Vec<usize> = patterns.iter().map(Vec::len).collect();
        for signs in cartesian(&psizes, MAX_TUPLES) {
            if tried >= MAX_TUPLES {
                return Ok(SearchOutcome::NotFound { tried });
            }
            if signs.iter().all(|&s| s == 0) {
                continue;
            }
            tried += 1;
            let mut rows = Vec::new();
            let mut norm = Vector::zeros(n);
            for (i, pick) in picks.iter().enumerate() {
                for h in pick.cone.h_description() {
                    rows.push(Row::le(h, Rat::zero()).embed(n, i * d));
                }
                orthant_rows(&patterns[i][signs[i]], &all, n, i * d, &mut norm, &mut rows);
            }
            rows.push(Row::eq(norm, Rat::one()));
            let sums: Vec<Vector> = (0..d)
                .map(|j| {
                    let mut v = Vector::zeros(n);
                    for i in 0..k {
                        v[i * d + j] = Rat::one();
                    }
                    v
                })
                .collect();
            abs_sum_rows(&sums, k * d, n, eps, &mut rows);
            let Some(sol) = lp::feasible_point(n, &rows) else { continue };
            let tuples = picks
                .iter()
                .enumerate()
                .map(|(i, pick)| CertTuple {
                    set: pick.set.clone(),
                    point: pick.point.clone(),
                    covector: sol.slice(i * d, d),
                    flavor,
                })
                .collect();
            let cert = DualCertificate { eps: eps.clone(), kind: CertKind::FuzzySeparation, tuples };
            if verify(&cert, p)?.accepted {
                return Ok(SearchOutcome::Found { certificate: cert });
            }
        }
    }
    Ok(SearchOutcome::NotFound { tried })
}

fn graph_candidates(p: &MultiProblem, eps: &Rat, flavor: ConeFlavor, cfg: &SearchConfig) -> Vec<Vec<Candidate>> {
    p.mappings
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let g = f.graph();
            let center = Vector::concat(&[&p.x_bar, &p.y_bars[i]]);
            candidate_points(&g, &center, eps, cfg.depth.min(6))
                .into_iter()
                .filter_map(|pt| {
                    let cone = normal_cone(&g, &pt, flavor).ok()?;
                    Some(Candidate { set: SetRef::Graph { index: i }, point: pt, cone })
                })
                .collect()
        })
        .collect()
}

fn omega_candidates(p: &MultiProblem, eps: &Rat, flavor: ConeFlavor, cfg: &SearchConfig) -> Vec<Candidate> {
    candidate_points(&p.omega, &p.x_bar, eps, cfg.depth.min(6))
        .into_iter()
        .filter_map(|pt| {
            let cone = normal_cone(&p.omega, &pt, flavor).ok()?;
            Some(Candidate { set: SetRef::Omega, point: pt, cone })
        })
        .collect()
}

fn l1_normalized(v: &Vector) -> Option<Vector> {
    let n = v.norm_l1();
    (!n.is_zero()).then(|| v.scale(&n.recip()))
}

/// Unit-norm multiplier candidates for mapping `i`: normals of the member and
/// negated `y`-parts of graph normals.
fn multiplier_candidates(g: &Candidate, m: &Candidate, xd: usize, yd: usize) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    let mut dirs: Vec<Vector> = m.cone.generators.clone();
    for l in &m.cone.lineality {
        dirs.push(l.clone());
        dirs.push(l.neg());
    }
    for gen in g.cone.generators.iter().chain(&g.cone.lineality) {
        dirs.push(gen.slice(xd, yd).neg());
    }
    for d in dirs {
        if let Some(v) = l1_normalized(&d) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Multiplier-rule certificate at `eps`, with `M = 2^k` for the smallest `k ≤ 10` that works.
pub fn search_multiplier(p: &MultiProblem, eps: &Rat, flavor: ConeFlavor, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let n = p.mappings.len();
    let xd = p.x_bar.dim();
    let graphs = graph_candidates(p, eps, flavor, cfg);
    let mut members = Vec::new();
    for i in 0..n {
        let mut list = member_candidates(&p.families[i], &p.y_bars[i], eps, flavor, cfg, |param| SetRef::Member { index: i, param })?;
        list.truncate(PER_SET);
        members.push(list);
    }
    let omegas = omega_candidates(p, eps, flavor, cfg);
    let mut sizes: Vec<usize> = Vec::new();
    for i in 0..n {
        sizes.push(graphs[i].len().min(8));
        sizes.push(members[i].len().min(8));
    }
    sizes.push(omegas.len().min(4));
    let mut tried = 0;
    for combo in cartesian(&sizes, MAX_TUPLES) {
        let gs: Vec<&Candidate> = (0..n).map(|i| &graphs[i][combo[2 * i]]).collect();
        let ms: Vec<&Candidate> = (0..n).map(|i| &members[i][combo[2 * i + 1]]).collect();
        let om = &omegas[combo[2 * n]];
        let per: Vec<Vec<Vector>> =
            (0..n).map(|i| multiplier_candidates(gs[i], ms[i], xd, p.mappings[i].y_dim())).collect();
        let mut choices: Vec<Vec<Vector>> = Vec::new();
        for i in 0..n {
            for y in &per[i] {
                let mut ys: Vec<Vector> = (0..n).map(|j| Vector::zeros(p.mappings[j].y_dim())).collect();
                ys[i] = y.clone();
                choices.push(ys);
            }
        }
        if n > 1 && per.iter().all(|l| !l.is_empty()) {
            let w = Rat::new(1, n as i64);
            choices.push((0..n).map(|i| per[i][0].scale(&w)).collect());
        }
        for ys in choices {
            if tried >= MAX_TUPLES {
                return Ok(SearchOutcome::NotFound { tried });
            }
            tried += 1;
            let mut tuples = Vec::new();
            for i in 0..n {
                for c in [gs[i], ms[i]] {
                    tuples.push(CertTuple {
                        set: c.set.clone(),
                        point: c.point.clone(),
                        covector: Vector::zeros(c.point.dim()),
                        flavor,
                    });
                }
            }
            tuples.push(CertTuple { set: SetRef::Omega, point: om.point.clone(), covector: Vector::zeros(xd), flavor });
            let make = |k: i32| DualCertificate {
                eps: eps.clone(),
                kind: CertKind::MultiplierRule { m: Rat::pow2(k), y_star: ys.clone() },
                tuples: tuples.clone(),
            };
            if !verify(&make(10), p)?.accepted {
                continue;
            }
            for k in 0..=10 {
                let cert = make(k);
                if verify(&cert, p)?.accepted {
                    return Ok(SearchOutcome::Found { certificate: cert });
                }
            }
        }
    }
    Ok(SearchOutcome::NotFound { tried })
}

/// Singular certificate at `eps`: small coderivative elements cancelling an omega normal.
pub fn search_singular(p: &MultiProblem, eps: &Rat, flavor: ConeFlavor, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let n = p.mappings.len();
    let xd = p.x_bar.dim();
    let graphs = graph_candidates(p, eps, flavor, cfg);
    let omegas = omega_candidates(p, eps, flavor, cfg);
    let mut offs = Vec::new();
    let mut nv = 0;
    for f in &p.mappings {
        offs.push(nv);
        nv += xd + f.y_dim();
    }
    let om0 = nv;
    let abs_y0 = om0 + xd;
    let ytotal: usize = p.mappings.iter().map(|f| f.y_dim()).sum();
    let abs_s0 = abs_y0 + ytotal;
    let nvars = abs_s0 + xd;
    let xcoords: Vec<usize> = (0..xd).collect();
    let mut sizes: Vec<usize> = graphs.iter().map(|g| g.len()).collect();
    sizes.push(omegas.len());
    let mut tried = 0;
    for combo in cartesian(&sizes, MAX_TUPLES) {
        let gs: Vec<&Candidate> = (0..n).map(|i| &graphs[i][combo[i]]).collect();
        let om = &omegas[combo[n]];
        let mut patterns: Vec<Vec<Vec<i32>>> = gs.iter().map(|g| orthants(&g.cone, &xcoords)).collect();
        patterns.push(orthants(&om.cone, &xcoords));
        let psizes: Vec<usize> = patterns.iter().map(Vec::len).collect();
        for signs in cartesian(&psizes, MAX_TUPLES) {
            if tried >= MAX_TUPLES {
                return Ok(SearchOutcome::NotFound { tried });
            }
            if signs.iter().all(|&s| s == 0) {
                continue;
            }
            tried += 1;
            let mut rows = Vec::new();
            let mut norm = Vector::zeros(nvars);
            let mut yforms = Vec::new();
            for (i, g) in gs.iter().enumerate() {
                let yd = p.mappings[i].y_dim();
                // (x*, y*) is stored; the normal is (x*, -y*)
                for h in g.cone.h_description() {
                    let mut h = h.clone();
                    for j in xd..xd + yd {
                        h[j] = -h[j].clone();
                    }
                    rows.push(Row::le(h, Rat::zero()).embed(nvars, offs[i]));
                }
                orthant_rows(&patterns[i][signs[i]], &xcoords, nvars, offs[i], &mut norm, &mut rows);
                for j in 0..yd {
                    yforms.push(Vector::unit(nvars, offs[i] + xd + j));
                }
            }
            for h in om.cone.h_description() {
                rows.push(Row::le(h, Rat::zero()).embed(nvars, om0));
            }
            orthant_rows(&patterns[n][signs[n]], &xcoords, nvars, om0, &mut norm, &mut rows);
            rows.push(Row::eq(norm, Rat::one()));
            abs_sum_rows(&yforms, abs_y0, nvars, eps, &mut rows);
            let sums: Vec<Vector> = (0..xd)
                .map(|j| {
                    let mut v = Vector::unit(nvars, om0 + j);
                    for &o in &offs {
                        v[o + j] = Rat::one();
                    }
                    v
                })
                .collect();
            abs_sum_rows(&sums, abs_s0, nvars, eps, &mut rows);
            let Some(sol) = lp::feasible_point(nvars, &rows) else { continue };
            let mut tuples: Vec<CertTuple> = gs
                .iter()
                .enumerate()
                .map(|(i, g)| CertTuple {
                    set: g.set.clone(),
                    point: g.point.clone(),
                    covector: sol.slice(offs[i], xd + p.mappings[i].y_dim()),
                    flavor,
                })
                .collect();
            tuples.push(CertTuple { set: SetRef::Omega, point: om.point.clone(), covector: sol.slice(om0, xd), flavor });
            let cert = DualCertificate { eps: eps.clone(), kind: CertKind::Singular, tuples };
            if verify(&cert, p)?.accepted {
                return Ok(SearchOutcome::Found { certificate: cert });
            }
        }
    }
    Ok(SearchOutcome::NotFound { tried })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertKindName {
    FuzzySeparation,
    MultiplierRule,
    Singular,
}

impl std::str::FromStr for CertKindName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fuzzy-separation" => Ok(CertKindName::FuzzySeparation),
            "multiplier-rule" => Ok(CertKindName::MultiplierRule),
            "singular" => Ok(CertKindName::Singular),
            _ => Err(format!("unknown certificate kind {s}")),
        }
    }
}

pub fn search_certificates(
    p: &MultiProblem,
    eps: &Rat,
    kind: CertKindName,
    flavor: ConeFlavor,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    match kind {
        CertKindName::FuzzySeparation => search_fuzzy(p, eps, flavor, cfg),
        CertKindName::MultiplierRule => search_multiplier(p, eps, flavor, cfg),
        CertKindName::Singular => search_singular(p, eps, flavor, cfg),
    }
}
