//! Dual certificates: fuzzy separation, multiplier rule and singular alternative.

use serde::{Deserialize, Serialize};

use crate::cone::{coderivative, normal_cone, ConeFlavor, FGCone};
use crate::error::{CoreError, Result};
use crate::family::MemberParam;
use crate::lp::{self, Row};
use crate::rational::Rat;
use crate::set::SetExpr;
use crate::stationarity::{MultiProblem, TripleProblem};
use crate::vector::Vector;

/// Which set a certificate tuple refers to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SetRef {
    /// Family `index` of the lifted collection, member `param`.
    Collection { index: usize, param: MemberParam },
    /// Graph of mapping `index`.
    Graph { index: usize },
    /// Member `param` of the range family `index`.
    Member { index: usize, param: MemberParam },
    Omega,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertTuple {
    pub set: SetRef,
    pub point: Vector,
    pub covector: Vector,
    pub flavor: ConeFlavor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CertKind {
    FuzzySeparation,
    /// `y_star[i]` is the multiplier attached to mapping `i`.
    MultiplierRule { m: Rat, y_star: Vec<Vector> },
    Singular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub eps: Rat,
    pub kind: CertKind,
    pub tuples: Vec<CertTuple>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub status: ClauseStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertReport {
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub clauses: Vec<Clause>,
}

impl CertReport {
    pub fn inconclusive(&self) -> bool {
        !self.accepted && self.clauses.iter().any(|c| c.status == ClauseStatus::Inconclusive)
    }
}

#[derive(Default)]
struct Audit {
    clauses: Vec<Clause>,
}

impl Audit {
    fn check(&mut self, name: impl Into<String>, ok: bool) {
        let status = if ok { ClauseStatus::Pass } else { ClauseStatus::Fail };
        self.clauses.push(Clause { name: name.into(), status });
    }

    /// Records a fallible clause; unsupported classes become inconclusive.
    fn try_check(&mut self, name: impl Into<String>, r: Result<bool>) -> Result<()> {
        let name = name.into();
        match r {
            Ok(ok) => self.check(name, ok),
            Err(CoreError::Unsupported(m)) | Err(CoreError::Irrational(m)) => {
                self.clauses.push(Clause { name: format!("{name} ({m})"), status: ClauseStatus::Inconclusive })
            }
            Err(CoreError::NotInSet) | Err(CoreError::NotInGraph) => self.check(name, false),
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn finish(self) -> CertReport {
        let first_failure = self.clauses.iter().find(|c| c.status != ClauseStatus::Pass).map(|c| c.name.clone());
        CertReport { accepted: first_failure.is_none(), first_failure, clauses: self.clauses }
    }
}

impl From<&TripleProblem> for MultiProblem {
    fn from(p: &TripleProblem) -> MultiProblem {
        MultiProblem {
            mappings: vec![p.f.clone()],
            families: vec![p.family.clone()],
            omega: p.omega.clone(),
            x_bar: p.x_bar.clone(),
            y_bars: vec![p.y_bar.clone()],
        }
    }
}

fn in_cone(set: &SetExpr, point: &Vector, v: &Vector, flavor: ConeFlavor) -> Result<bool> {
    Ok(normal_cone(set, point, flavor)?.contains(v))
}

fn near(p: &Vector, c: &Vector, eps: &Rat) -> bool {
    p.dim() == c.dim() && p.sub(c).norm_inf() < *eps
}

/// Checks every clause of a fuzzy-separation certificate for the lifted collection.
pub fn verify_fuzzy_separation(cert: &DualCertificate, p: &MultiProblem) -> Result<CertReport> {
    let c = p.collection();
    let mut a = Audit::default();
    a.check("kind is fuzzy separation", cert.kind == CertKind::FuzzySeparation);
    a.check("one tuple per family", cert.tuples.len() == c.families.len());
    a.check("eps is positive", cert.eps.is_positive());
    let mut sum = Vector::zeros(c.x_bar.dim());
    let mut norms = Rat::zero();
    for (i, t) in cert.tuples.iter().enumerate() {
        let SetRef::Collection { index, param } = &t.set else {
            a.check(format!("tuple {i} refers to a collection member"), false);
            continue;
        };
        a.check(format!("tuple {i} is ordered"), *index == i);
        let Some(fam) = c.families.get(*index) else { continue };
        let set = fam.realize(param)?;
        if t.point.dim() != set.dim() || t.covector.dim() != set.dim() {
            a.check(format!("tuple {i} dimensions"), false);
            continue;
        }
        a.check(format!("tuple {i} point lies in its set"), set.contains(&t.point));
        a.check(format!("tuple {i} point is within eps of the reference point"), near(&t.point, &c.x_bar, &cert.eps));
        a.try_check(format!("tuple {i} covector is normal"), in_cone(&set, &t.point, &t.covector, t.flavor))?;
        sum = sum.add(&t.covector);
        norms = norms + t.covector.norm_l1();
    }
    a.check("norm of the covector sum is below eps", sum.norm_l1() < cert.eps);
    a.check("covector norms sum to one", norms == Rat::one());
    Ok(a.finish())
}

struct Located<'a> {
    graph: Vec<Option<&'a CertTuple>>,
    member: Vec<Option<&'a CertTuple>>,
    omega: Option<&'a CertTuple>,
}

fn locate<'a>(cert: &'a DualCertificate, n: usize, a: &mut Audit) -> Located<'a> {
    let mut loc = Located { graph: vec![None; n], member: vec![None; n], omega: None };
    for t in &cert.tuples {
        let slot = match &t.set {
            SetRef::Graph { index } if *index < n => &mut loc.graph[*index],
            SetRef::Member { index, .. } if *index < n => &mut loc.member[*index],
            SetRef::Omega => &mut loc.omega,
            _ => {
                a.check("tuple refers to a known set", false);
                continue;
            }
        };
        if slot.is_some() {
            a.check("each set appears once", false);
        }
        *slot = Some(t);
    }
    loc
}

/// `z ∈ N` encoded as `a·z ≤ 0` rows over variables placed at `offset`.
fn cone_rows(cone: &FGCone, n: usize, offset: usize) -> Vec<Row> {
    cone.h_description().iter().map(|h| Row::le(h.clone(), Rat::zero()).embed(n, offset)).collect()
}

/// Rows for `|v| ≤ w` with `v` given as a linear form in the variables.
fn abs_rows(forms: &[Vector], w_offset: usize, n: usize) -> Vec<Row> {
    let mut rows = Vec::new();
    for (k, f) in forms.iter().enumerate() {
        let w = Vector::unit(n, w_offset + k);
        rows.push(Row::le(f.sub(&w), Rat::zero()));
        rows.push(Row::le(f.neg().sub(&w), Rat::zero()));
    }
    rows
}

fn sum_form(n: usize, offset: usize, len: usize) -> Vector {
    let mut v = Vector::zeros(n);
    for k in 0..len {
        v[offset + k] = Rat::one();
    }
    v
}

/// `0 ∈ Σ D*F_i(x_i, y_i)(y*_i) + N_Ω(x_ω) ∩ M𝔹 + ε𝔹`, decided by one LP.
fn zero_in_multiplier_sum(
    p: &MultiProblem,
    bases: &[(Vector, Vector)],
    y_star: &[Vector],
    graph_flavor: ConeFlavor,
    omega_point: &Vector,
    omega_flavor: ConeFlavor,
    m: &Rat,
    eps: &Rat,
) -> Result<bool> {
    let xd = p.x_bar.dim();
    let k = p.mappings.len();
    // variables: x*_1..x*_k, z, w (|z|), s (|Σ + z|)
    let z0 = k * xd;
    let w0 = z0 + xd;
    let s0 = w0 + xd;
    let n = s0 + xd;
    let mut rows = Vec::new();
    for (i, f) in p.mappings.iter().enumerate() {
        let d = coderivative(f, &bases[i].0, &bases[i].1, &y_star[i], graph_flavor)?;
        for r in &d.slice.rows {
            rows.push(r.embed(n, i * xd));
        }
    }
    rows.extend(cone_rows(&normal_cone(&p.omega, omega_point, omega_flavor)?, n, z0));
    let z_forms: Vec<Vector> = (0..xd).map(|c| Vector::unit(n, z0 + c)).collect();
    rows.extend(abs_rows(&z_forms, w0, n));
    rows.push(Row::lt(sum_form(n, w0, xd), m.clone()));
    let total: Vec<Vector> = (0..xd)
        .map(|c| {
            let mut v = Vector::unit(n, z0 + c);
            for i in 0..k {
                v[i * xd + c] = Rat::one();
            }
            v
        })
        .collect();
    rows.extend(abs_rows(&total, s0, n));
    rows.push(Row::lt(sum_form(n, s0, xd), eps.clone()));
    Ok(lp::feasible_point(n, &rows).is_some())
}

/// Checks a multiplier-rule certificate: graph points, member points, the
/// proximity of each `y*_i` to a normal of its member, `Σ‖y*_i‖ = 1`, and the
/// inclusion for `0`.
pub fn verify_multiplier_rule(cert: &DualCertificate, p: &MultiProblem) -> Result<CertReport> {
    let mut a = Audit::default();
    let CertKind::MultiplierRule { m, y_star } = &cert.kind else {
        a.check("kind is multiplier rule", false);
        return Ok(a.finish());
    };
    let n = p.mappings.len();
    let eps = &cert.eps;
    a.check("eps is positive", eps.is_positive());
    a.check("M is positive", m.is_positive());
    a.check("one multiplier per mapping", y_star.len() == n);
    let loc = locate(cert, n, &mut a);
    if y_star.len() != n || loc.graph.iter().chain(&loc.member).any(Option::is_none) || loc.omega.is_none() {
        a.check("tuples for every graph, member and omega", false);
        return Ok(a.finish());
    }
    let mut bases = Vec::new();
    let mut total = Rat::zero();
    for i in 0..n {
        let f = &p.mappings[i];
        let g = loc.graph[i].unwrap();
        let (xd, yd) = (f.x_dim(), f.y_dim());
        if g.point.dim() != xd + yd || y_star[i].dim() != yd {
            a.check(format!("mapping {i} dimensions"), false);
            return Ok(a.finish());
        }
        let (x, y) = (g.point.slice(0, xd), g.point.slice(xd, yd));
        a.check(format!("graph point {i} lies in the graph"), f.in_graph(&x, &y));
        let target = Vector::concat(&[&p.x_bar, &p.y_bars[i]]);
        a.check(format!("graph point {i} is within eps"), near(&g.point, &target, eps));
        bases.push((x, y));
        let t = loc.member[i].unwrap();
        let SetRef::Member { param, .. } = &t.set else { unreachable!() };
        let set = p.families[i].realize(param)?;
        a.check(format!("member point {i} lies in its member"), set.contains(&t.point));
        a.check(format!("member point {i} is within eps"), near(&t.point, &p.y_bars[i], eps));
        let close = normal_cone(&set, &t.point, t.flavor).map(|c| c.l1_distance(&y_star[i]) < *eps);
        a.try_check(format!("multiplier {i} is within eps of a member normal"), close)?;
        total = total + y_star[i].norm_l1();
    }
    a.check("multiplier norms sum to one", total == Rat::one());
    let o = loc.omega.unwrap();
    a.check("omega point lies in omega", p.omega.contains(&o.point));
    a.check("omega point is within eps", near(&o.point, &p.x_bar, eps));
    if a.clauses.iter().all(|c| c.status == ClauseStatus::Pass) {
        let flavor = loc.graph[0].unwrap().flavor;
        let r = zero_in_multiplier_sum(p, &bases, y_star, flavor, &o.point, o.flavor, m, eps);
        a.try_check("zero lies in the coderivative sum plus bounded omega normals plus the eps ball", r)?;
    }
    Ok(a.finish())
}

/// Checks a singular certificate: graph covectors `(x*_i, y*_i)` with
/// `(x*_i, −y*_i)` normal to the graph and `‖y*_i‖ < ε`, an omega normal, a
/// small sum of the `x*` parts and unit total norm.
pub fn verify_singular(cert: &DualCertificate, p: &MultiProblem) -> Result<CertReport> {
    let mut a = Audit::default();
    a.check("kind is singular", cert.kind == CertKind::Singular);
    let n = p.mappings.len();
    let eps = &cert.eps;
    a.check("eps is positive", eps.is_positive());
    let loc = locate(cert, n, &mut a);
    if loc.graph.iter().any(Option::is_none) || loc.omega.is_none() || loc.member.iter().any(Option::is_some) {
        a.check("tuples for every graph and omega only", false);
        return Ok(a.finish());
    }
    let xd = p.x_bar.dim();
    let mut sum = Vector::zeros(xd);
    let mut norms = Rat::zero();
    for i in 0..n {
        let f = &p.mappings[i];
        let g = loc.graph[i].unwrap();
        let yd = f.y_dim();
        if g.point.dim() != xd + yd || g.covector.dim() != xd + yd {
            a.check(format!("mapping {i} dimensions"), false);
            return Ok(a.finish());
        }
        let (x, y) = (g.point.slice(0, xd), g.point.slice(xd, yd));
        a.check(format!("graph point {i} lies in the graph"), f.in_graph(&x, &y));
        let target = Vector::concat(&[&p.x_bar, &p.y_bars[i]]);
        a.check(format!("graph point {i} is within eps"), near(&g.point, &target, eps));
        let xs = g.covector.slice(0, xd);
        let ys = g.covector.slice(xd, yd);
        a.check(format!("multiplier {i} is below eps"), ys.norm_l1() < *eps);
        let normal = Vector::concat(&[&xs, &ys.neg()]);
        a.try_check(format!("graph covector {i} is a coderivative element"), in_cone(&f.graph(), &g.point, &normal, g.flavor))?;
        sum = sum.add(&xs);
        norms = norms + xs.norm_l1();
    }
    let o = loc.omega.unwrap();
    a.check("omega point lies in omega", p.omega.contains(&o.point));
    a.check("omega point is within eps", near(&o.point, &p.x_bar, eps));
    if o.covector.dim() == xd {
        a.try_check("omega covector is normal", in_cone(&p.omega, &o.point, &o.covector, o.flavor))?;
        sum = sum.add(&o.covector);
        norms = norms + o.covector.norm_l1();
    } else {
        a.check("omega covector dimension", false);
    }
    a.check("norm of the covector sum is below eps", sum.norm_l1() < *eps);
    a.check("covector norms sum to one", norms == Rat::one());
    Ok(a.finish())
}

pub fn verify(cert: &DualCertificate, p: &MultiProblem) -> Result<CertReport> {
    match cert.kind {
        CertKind::FuzzySeparation => verify_fuzzy_separation(cert, p),
        CertKind::MultiplierRule { .. } => verify_multiplier_rule(cert, p),
        CertKind::Singular => verify_singular(cert, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{ParamBuilder, SetFamily};
    use crate::interval::Interval1D;
    use crate::mapping::MappingExpr;
    use crate::pq::{PQFunction, Quadratic};
    use crate::q;

    fn f4() -> MappingExpr {
        let phi = PQFunction::new(
            vec![Rat::zero()],
            vec![
                Quadratic(Rat::zero(), Rat::one(), Rat::zero()),
                Quadratic(-Rat::one(), Rat::zero(), Rat::zero()),
            ],
        )
        .unwrap();
        MappingExpr::Epigraphical { phi }
    }

    fn rays() -> SetFamily {
        SetFamily::ParamInterval { domain: Interval1D::real(), builder: ParamBuilder::LowerRay }
    }

    fn problem(n: usize) -> MultiProblem {
        MultiProblem::new(
            vec![f4(); n],
            vec![rays(); n],
            SetExpr::whole(1),
            Vector::zeros(1),
            vec![Vector::zeros(1); n],
        )
        .unwrap()
    }

    fn v(xs: &[Rat]) -> Vector {
        Vector(xs.to_vec())
    }

    fn fuzzy(eps: Rat) -> DualCertificate {
        DualCertificate {
            eps,
            kind: CertKind::FuzzySeparation,
            tuples: vec![
                CertTuple {
                    set: SetRef::Collection { index: 0, param: MemberParam::Id(0) },
                    point: v(&[q(1, 200), q(-1, 40000)]),
                    covector: v(&[q(-1, 201), q(-100, 201)]),
                    flavor: ConeFlavor::Frechet,
                },
                CertTuple {
                    set: SetRef::Collection {
                        index: 1,
                        param: MemberParam::Tuple(vec![MemberParam::Id(0), MemberParam::Rational(q(-1, 100))]),
                    },
                    point: v(&[Rat::zero(), q(-1, 100)]),
                    covector: v(&[Rat::zero(), q(100, 201)]),
                    flavor: ConeFlavor::Frechet,
                },
            ],
        }
    }

    #[test]
    fn fuzzy_separation_accepts_and_rejects() {
        let p = problem(1);
        assert!(verify(&fuzzy(q(1, 4)), &p).unwrap().accepted);
        let r = verify(&fuzzy(q(1, 300)), &p).unwrap();
        assert!(!r.accepted);
        assert!(r.first_failure.is_some());
        let mut z = fuzzy(q(1, 4));
        for t in &mut z.tuples {
            t.covector = Vector::zeros(2);
        }
        assert_eq!(verify(&z, &p).unwrap().first_failure.as_deref(), Some("covector norms sum to one"));
    }

    fn multiplier(n: usize, eps: Rat, ys: &[Rat]) -> DualCertificate {
        let mut tuples = Vec::new();
        for i in 0..n {
            tuples.push(CertTuple {
                set: SetRef::Graph { index: i },
                point: v(&[q(1, 200), q(-1, 40000)]),
                covector: Vector::zeros(1),
                flavor: ConeFlavor::Frechet,
            });
            tuples.push(CertTuple {
                set: SetRef::Member { index: i, param: MemberParam::Rational(q(-1, 100)) },
                point: v(&[q(-1, 100)]),
                covector: Vector::zeros(1),
                flavor: ConeFlavor::Frechet,
            });
        }
        tuples.push(CertTuple {
            set: SetRef::Omega,
            point: Vector::zeros(1),
            covector: Vector::zeros(1),
            flavor: ConeFlavor::Frechet,
        });
        let y_star = ys.iter().map(|y| v(&[y.clone()])).collect();
        DualCertificate { eps, kind: CertKind::MultiplierRule { m: Rat::one(), y_star }, tuples }
    }

    #[test]
    fn multiplier_rule_single() {
        let p = problem(1);
        assert!(verify(&multiplier(1, q(1, 4), &[Rat::one()]), &p).unwrap().accepted);
        assert!(!verify(&multiplier(1, q(1, 200), &[Rat::one()]), &p).unwrap().accepted);
        assert!(!verify(&multiplier(1, q(1, 4), &[-Rat::one()]), &p).unwrap().accepted);
    }

    #[test]
    fn multiplier_rule_two_mappings() {
        let p = problem(2);
        let ok = |ys: &[Rat]| verify(&multiplier(2, q(1, 4), ys), &p).unwrap().accepted;
        assert!(ok(&[Rat::one(), Rat::zero()]));
        assert!(ok(&[q(1, 2), q(1, 2)]));
        assert!(!ok(&[Rat::one(), Rat::one()]));
        assert!(!ok(&[Rat::zero(), Rat::zero()]));
    }

    #[test]
    fn singular_on_a_point_graph() {
        let graph = SetExpr::Singleton { point: Vector::zeros(2) };
        let f = MappingExpr::PolyhedralGraph { x_dim: 1, y_dim: 1, graph };
        let p = MultiProblem::new(
            vec![f],
            vec![SetFamily::Finite { members: vec![SetExpr::whole(1)] }],
            SetExpr::Singleton { point: Vector::zeros(1) },
            Vector::zeros(1),
            vec![Vector::zeros(1)],
        )
        .unwrap();
        let cert = DualCertificate {
            eps: q(1, 8),
            kind: CertKind::Singular,
            tuples: vec![
                CertTuple {
                    set: SetRef::Graph { index: 0 },
                    point: Vector::zeros(2),
                    covector: v(&[q(1, 2), Rat::zero()]),
                    flavor: ConeFlavor::Frechet,
                },
                CertTuple {
                    set: SetRef::Omega,
                    point: Vector::zeros(1),
                    covector: v(&[q(-1, 2)]),
                    flavor: ConeFlavor::Frechet,
                },
            ],
        };
        assert!(verify(&cert, &p).unwrap().accepted);
    }
}
