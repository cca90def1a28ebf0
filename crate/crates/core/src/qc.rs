//! Aubin modulus estimates and the qualification condition ruling out singular multipliers.

use serde::{Deserialize, Serialize};

use crate::certificate::DualCertificate;
use crate::cone::{normal_cone, ConeFlavor};
use crate::config::SearchConfig;
use crate::error::{CoreError, Result};
use crate::linalg;
use crate::lp::Relation;
use crate::mapping::MappingExpr;
use crate::rational::{ExtRat, Rat};
use crate::search::{search_singular, SearchOutcome};
use crate::set::SetExpr;
use crate::stationarity::MultiProblem;
use crate::system;
use crate::vector::Vector;

pub const AUDIT_POINTS: usize = 50;

/// One sampled graph normal `(x*, -y*)` with the bound `‖x*‖₁ ≤ τ‖y*‖₁`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSample {
    pub point: Vector,
    pub x_star: Vector,
    pub y_star: Vector,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AubinReport {
    pub delta: Rat,
    /// Certified modulus on the `delta` neighbourhood.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_upper: Option<Rat>,
    /// Largest difference quotient seen on the audit grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_lower: Option<Rat>,
    pub audit: Vec<AuditSample>,
    pub audit_passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `y = A x + b` when the graph is a polyhedron given by equalities only and
/// projects onto all of `X`. Returns `A` row by row.
fn affine_map(graph: &SetExpr, xd: usize, yd: usize) -> Option<Vec<Vector>> {
    let SetExpr::Polyhedron(h) = graph else { return None };
    if h.rows.iter().any(|r| r.relation != Relation::Eq) {
        return None;
    }
    let normals: Vec<Vector> = h.rows.iter().map(|r| r.normal.clone()).collect();
    let basis = linalg::nullspace(&normals, xd + yd);
    if basis.len() != xd {
        return None;
    }
    let (reduced, pivots) = linalg::rref(&basis, xd + yd);
    if pivots.len() != xd || pivots.iter().enumerate().any(|(k, &p)| p != k) {
        return None;
    }
    // row k of the reduced basis is (e_k, A e_k)
    Some((0..yd).map(|j| Vector((0..xd).map(|k| reduced[k][xd + j].clone()).collect())).collect())
}

fn audit_normals(f: &MappingExpr, pts: &[(Vector, Vector)], tau: &Rat, out: &mut Vec<AuditSample>) -> Result<()> {
    let g = f.graph();
    let xd = f.x_dim();
    let yd = f.y_dim();
    for (x, y) in pts {
        let point = Vector::concat(&[x, y]);
        for flavor in [ConeFlavor::Frechet, ConeFlavor::Clarke] {
            let cone = match normal_cone(&g, &point, flavor) {
                Ok(c) => c,
                Err(CoreError::Unsupported(_)) => continue,
                Err(e) => return Err(e),
            };
            let mut dirs = cone.generators.clone();
            dirs.extend(cone.lineality.iter().cloned());
            for d in dirs {
                let x_star = d.slice(0, xd);
                let y_star = d.slice(xd, yd).neg();
                let holds = x_star.norm_l1() <= tau * &y_star.norm_l1();
                out.push(AuditSample { point: point.clone(), x_star, y_star, holds });
            }
        }
    }
    Ok(())
}

/// Aubin modulus of `f` around `(x̄, ȳ)` on the `delta` neighbourhood, with
/// the coderivative bound checked on sampled graph normals.
pub fn aubin_estimate(f: &MappingExpr, x_bar: &Vector, y_bar: &Vector, delta: &Rat) -> Result<AubinReport> {
    let mut report = AubinReport {
        delta: delta.clone(),
        tau_upper: None,
        tau_lower: None,
        audit: Vec::new(),
        audit_passed: true,
        note: None,
    };
    match f {
        MappingExpr::Epigraphical { phi } => {
            let (a, b) = (&x_bar[0] - delta, &x_bar[0] + delta);
            let tau = phi.max_abs_slope(&a, &b);
            let n = AUDIT_POINTS as i64;
            let grid: Vec<Rat> = (1..=n).map(|j| &a + &(&(delta * &Rat::from_int(2 * j)) / &Rat::from_int(n + 1))).collect();
            let mut lower = Rat::zero();
            for w in grid.windows(2) {
                let qd = ((phi.eval(&w[1]) - phi.eval(&w[0])) / (&w[1] - &w[0])).abs();
                lower = lower.max(qd);
            }
            let pts: Vec<(Vector, Vector)> =
                grid.iter().map(|t| (Vector(vec![t.clone()]), Vector(vec![phi.eval(t)]))).collect();
            audit_normals(f, &pts, &tau, &mut report.audit)?;
            report.tau_upper = Some(tau);
            report.tau_lower = Some(lower);
        }
        MappingExpr::PolyhedralGraph { x_dim, y_dim, graph } => {
            let Some(a) = affine_map(graph, *x_dim, *y_dim) else {
                report.note = Some("graph is not the graph of an affine map on the whole space".into());
                report.audit_passed = false;
                return Ok(report);
            };
            let tau = a.iter().map(Vector::norm_l1).max().unwrap_or_else(Rat::zero);
            let n = AUDIT_POINTS as i64;
            let mut pts = Vec::new();
            for j in 1..=n {
                let t = &(&(delta * &Rat::from_int(2 * j)) / &Rat::from_int(n + 1)) - delta;
                let x = x_bar.add(&Vector(vec![t; *x_dim]));
                let y = y_bar.add(&Vector(a.iter().map(|r| r.dot(&x.sub(x_bar))).collect()));
                pts.push((x, y));
            }
            audit_normals(f, &pts, &tau, &mut report.audit)?;
            report.tau_lower = Some(tau.clone());
            report.tau_upper = Some(tau);
        }
        MappingExpr::Product { components } => {
            let mut off = 0;
            let mut upper = Some(Rat::zero());
            let mut lower = Some(Rat::zero());
            for c in components {
                let yd = c.y_dim();
                let r = aubin_estimate(c, x_bar, &y_bar.slice(off, yd), delta)?;
                off += yd;
                upper = match (upper, r.tau_upper) {
                    (Some(u), Some(t)) => Some(u.max(t)),
                    _ => None,
                };
                lower = match (lower, r.tau_lower) {
                    (Some(u), Some(t)) => Some(u.max(t)),
                    _ => None,
                };
                report.audit_passed &= r.audit_passed;
                report.audit.extend(r.audit);
                if r.note.is_some() {
                    report.note = r.note;
                }
            }
            report.tau_upper = upper;
            report.tau_lower = lower;
        }
    }
    report.audit_passed &= report.audit.iter().all(|s| s.holds);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum SufficientCondition {
    /// The reference point has a box neighbourhood of this radius inside `Ω`.
    InteriorPoint { radius: Rat },
    /// Every mapping has the Aubin property with modulus at most `tau` on `delta` neighbourhoods.
    Aubin { tau: Rat, delta: Rat },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum QCStatus {
    HoldsWithEps { eps: Rat, condition: SufficientCondition },
    /// A singular certificate at every schedule level.
    ViolatedBy { certificates: Vec<DualCertificate> },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QCReport {
    pub flavor: ConeFlavor,
    pub status: QCStatus,
}

impl QCReport {
    pub fn holds(&self) -> bool {
        matches!(self.status, QCStatus::HoldsWithEps { .. })
    }
}

fn interior_radius(omega: &SetExpr, x_bar: &Vector, cfg: &SearchConfig) -> Result<Option<Rat>> {
    for r in cfg.schedule(None) {
        let ball = SetExpr::ball(x_bar, &ExtRat::Finite(r.clone()));
        match system::is_subset(&ball, omega) {
            Ok(true) => return Ok(Some(r)),
            Ok(false) => {}
            Err(CoreError::Unsupported(_)) | Err(CoreError::Irrational(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

pub const DEFAULT_AUBIN_DELTA: (i64, i64) = (1, 2);

/// Tries the interior-point and Aubin sufficient conditions, then searches for
/// singular certificates along the schedule.
pub fn check_qc(p: &MultiProblem, flavor: ConeFlavor, delta: &Rat, cfg: &SearchConfig) -> Result<QCReport> {
    let done = |status| Ok(QCReport { flavor, status });
    if let Some(radius) = interior_radius(&p.omega, &p.x_bar, cfg)? {
        return done(QCStatus::HoldsWithEps { eps: radius.clone(), condition: SufficientCondition::InteriorPoint { radius } });
    }
    let mut tau = Some(Rat::zero());
    for (f, y) in p.mappings.iter().zip(&p.y_bars) {
        let r = aubin_estimate(f, &p.x_bar, y, delta)?;
        tau = match (tau, r.tau_upper) {
            (Some(a), Some(b)) if r.audit_passed => Some(a.max(b)),
            _ => None,
        };
    }
    if let Some(tau) = tau {
        let eps = (Rat::one() / (&(&tau * &Rat::from_int(2)) + &Rat::one())).min(delta.clone());
        return done(QCStatus::HoldsWithEps { eps, condition: SufficientCondition::Aubin { tau, delta: delta.clone() } });
    }
    let levels = cfg.depth.min(8);
    let mut certificates = Vec::new();
    for eps in cfg.schedule(Some(levels)) {
        match search_singular(p, &eps, flavor, cfg)? {
            SearchOutcome::Found { certificate } => certificates.push(certificate),
            SearchOutcome::NotFound { .. } => {
                return done(QCStatus::Inconclusive {
                    reason: format!("no sufficient condition applies and no singular certificate was found at eps = {eps}"),
                })
            }
        }
    }
    done(QCStatus::ViolatedBy { certificates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::SetFamily;
    use crate::interval::Interval1D;
    use crate::lp::Row;
    use crate::polyhedron::HPolyhedron;
    use crate::pq::{PQFunction, Quadratic};
    use crate::q;

    fn identity() -> MappingExpr {
        let rows = vec![Row::eq(Vector(vec![-Rat::one(), Rat::one()]), Rat::zero())];
        MappingExpr::PolyhedralGraph { x_dim: 1, y_dim: 1, graph: SetExpr::Polyhedron(HPolyhedron { dim: 2, rows }) }
    }

    fn f4() -> MappingExpr {
        let phi = PQFunction::new(
            vec![Rat::zero()],
            vec![Quadratic(Rat::zero(), Rat::one(), Rat::zero()), Quadratic(-Rat::one(), Rat::zero(), Rat::zero())],
        )
        .unwrap();
        MappingExpr::Epigraphical { phi }
    }

    fn problem(f: MappingExpr, omega: SetExpr) -> MultiProblem {
        let fam = SetFamily::Finite { members: vec![SetExpr::whole(1)] };
        MultiProblem::new(vec![f], vec![fam], omega, Vector::zeros(1), vec![Vector::zeros(1)]).unwrap()
    }

    #[test]
    fn aubin_moduli() {
        let z = Vector::zeros(1);
        let r = aubin_estimate(&f4(), &z, &z, &q(1, 4)).unwrap();
        assert_eq!(r.tau_upper, Some(Rat::one()));
        assert!(r.audit_passed);
        assert!(r.audit.len() >= AUDIT_POINTS);
        let c = MappingExpr::Epigraphical { phi: PQFunction::constant(Rat::zero()) };
        assert_eq!(aubin_estimate(&c, &z, &z, &q(1, 4)).unwrap().tau_upper, Some(Rat::zero()));
        assert_eq!(aubin_estimate(&identity(), &z, &z, &q(1, 2)).unwrap().tau_upper, Some(Rat::one()));
    }

    #[test]
    fn qc_via_aubin_and_interior() {
        let cfg = SearchConfig::default();
        let half = q(1, 2);
        let ray = SetExpr::interval(Interval1D::upper_ray(Rat::zero()));
        let r = check_qc(&problem(identity(), ray), ConeFlavor::Frechet, &half, &cfg).unwrap();
        assert!(matches!(r.status, QCStatus::HoldsWithEps { ref eps, .. } if *eps == q(1, 3)));
        let r = check_qc(&problem(f4(), SetExpr::whole(1)), ConeFlavor::Frechet, &half, &cfg).unwrap();
        assert!(matches!(r.status, QCStatus::HoldsWithEps { condition: SufficientCondition::InteriorPoint { .. }, .. }));
    }

    #[test]
    fn qc_violated_at_a_point_graph() {
        let f = MappingExpr::PolyhedralGraph { x_dim: 1, y_dim: 1, graph: SetExpr::Singleton { point: Vector::zeros(2) } };
        let p = problem(f, SetExpr::Singleton { point: Vector::zeros(1) });
        let r = check_qc(&p, ConeFlavor::Frechet, &q(1, 2), &SearchConfig::default()).unwrap();
        let QCStatus::ViolatedBy { certificates } = r.status else { panic!("{:?}", r.status) };
        assert!(!certificates.is_empty());
    }
}
