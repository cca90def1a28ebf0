//! Properties O1–O6 of level-set mappings, their implication harness, and the
//! bridge from extremal points to extremal triples.

use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{CoreError, Result};
use crate::family::xi_delta_family;
use crate::interval::Interval1D;
use crate::levelset::{LevelSetMapping, TableEntry};
use crate::lp::Row;
use crate::polyhedron::HPolyhedron;
use crate::mapping::MappingExpr;
use crate::rational::{ExtRat, Rat};
use crate::scalar::Witness;
use crate::set::SetExpr;
use crate::stationarity::{check_extremal_point, check_triple, CheckOptions, CheckVerdict, Property, TripleProblem};
use crate::system;
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum OVerdict {
    HoldsOnGrid,
    /// `points` are the offending pair; `radius` is set when the failure is an
    /// empty neighbourhood of that radius.
    FailsWithWitness {
        points: Vec<Vector>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<Rat>,
    },
    Inconclusive { reason: String },
}

impl OVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, OVerdict::HoldsOnGrid)
    }

    pub fn fails(&self) -> bool {
        matches!(self, OVerdict::FailsWithWitness { .. })
    }

    fn fail(points: Vec<Vector>, radius: Option<Rat>) -> OVerdict {
        OVerdict::FailsWithWitness { points, radius }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OPropertyReport {
    pub y_bar: Vector,
    /// Radii `2^-1 .. 2^-depth`.
    pub depth: u32,
    pub o1: OVerdict,
    pub o2: OVerdict,
    pub o3: OVerdict,
    pub o4: OVerdict,
    pub o5: OVerdict,
    pub o6: OVerdict,
}

impl OPropertyReport {
    pub fn verdicts(&self) -> [(&'static str, &OVerdict); 6] {
        [("O1", &self.o1), ("O2", &self.o2), ("O3", &self.o3), ("O4", &self.o4), ("O5", &self.o5), ("O6", &self.o6)]
    }
}

fn soft(r: Result<OVerdict>) -> OVerdict {
    match r {
        Ok(v) => v,
        Err(e) => OVerdict::Inconclusive { reason: e.to_string() },
    }
}

fn ball(c: &Vector, r: &Rat) -> SetExpr {
    SetExpr::ball(c, &ExtRat::Finite(r.clone()))
}

/// A point of `L°(ȳ) ∩ B_r(ȳ)`, `None` when that set is empty.
fn punctured_point(l: &LevelSetMapping, y_bar: &Vector, r: &Rat) -> Result<Option<Vector>> {
    let lc = l.l_circ(y_bar)?;
    let b = ball(y_bar, r);
    match system::intersect(&[&lc, &b])? {
        Witness::Empty => Ok(None),
        Witness::Point(p) => Ok(Some(p)),
        Witness::Irrational => Err(CoreError::Irrational("punctured level set".into())),
    }
}

/// O1 through its characterization: for every radius some `y ∈ L°(ȳ) ∩ B_r(ȳ)`
/// has `d(ȳ, L(y)) < r`. An empty punctured neighbourhood makes the liminf `+∞`.
fn check_o1(l: &LevelSetMapping, y_bar: &Vector, cfg: &SearchConfig) -> Result<OVerdict> {
    let lc = l.l_circ(y_bar)?;
    for r in cfg.schedule(None) {
        let Some(p) = punctured_point(l, y_bar, &r)? else {
            return Ok(OVerdict::fail(vec![y_bar.clone()], Some(r)));
        };
        let mut candidates = vec![p];
        candidates.extend(l.grid_near(y_bar, &r, cfg.depth.min(8)));
        let mut found = false;
        for y in candidates {
            if y.sub(y_bar).norm_inf() >= r || !lc.contains(&y) {
                continue;
            }
            let value = match l.value(&y) {
                Ok(v) => v,
                Err(CoreError::Unsupported(_)) => continue,
                Err(e) => return Err(e),
            };
            if system::distance_below(y_bar, &value, &ExtRat::Finite(r.clone()))? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(OVerdict::Inconclusive { reason: format!("no level set within {r} of the reference point was found") });
        }
    }
    Ok(OVerdict::HoldsOnGrid)
}

fn check_o2(l: &LevelSetMapping, y_bar: &Vector, cfg: &SearchConfig) -> Result<OVerdict> {
    for r in cfg.schedule(None) {
        if punctured_point(l, y_bar, &r)?.is_none() {
            return Ok(OVerdict::fail(vec![y_bar.clone()], Some(r)));
        }
    }
    Ok(OVerdict::HoldsOnGrid)
}

fn check_o3(l: &LevelSetMapping, y_bar: &Vector) -> Result<OVerdict> {
    Ok(if l.value(y_bar)?.contains(y_bar) {
        OVerdict::fail(vec![y_bar.clone(), y_bar.clone()], None)
    } else {
        OVerdict::HoldsOnGrid
    })
}

/// O4 holds when some radius has every grid point `y` in `cl L(y)`; it fails
/// when every radius has a violating grid point.
fn check_o4(l: &LevelSetMapping, y_bar: &Vector, cfg: &SearchConfig) -> Result<OVerdict> {
    let mut last_bad = None;
    for r in cfg.schedule(None) {
        let mut bad = None;
        for y in l.grid_near(y_bar, &r, cfg.depth.min(6)) {
            if !l.closed_value(&y)?.contains(&y) {
                bad = Some(y);
                break;
            }
        }
        match bad {
            None => return Ok(OVerdict::HoldsOnGrid),
            Some(y) => last_bad = Some(y),
        }
    }
    let y = last_bad.expect("schedule is nonempty");
    Ok(OVerdict::fail(vec![y.clone(), y], None))
}

/// Points `y` at which the inclusion properties are sampled.
fn inclusion_samples(l: &LevelSetMapping, y_bar: &Vector, cfg: &SearchConfig) -> Vec<Vector> {
    let mut out = Vec::new();
    for k in [2i32, 1, 0] {
        for y in l.grid_near(y_bar, &Rat::pow2(k), cfg.depth.min(4)) {
            if !out.contains(&y) {
                out.push(y);
            }
        }
    }
    out
}

/// `cl L(y) ⊆ target` for every sampled `y ∈ domain`.
fn check_inclusion(
    l: &LevelSetMapping,
    y_bar: &Vector,
    domain: &SetExpr,
    target: &SetExpr,
    cfg: &SearchConfig,
) -> Result<OVerdict> {
    let outside = target.complement()?;
    let mut samples = inclusion_samples(l, y_bar, cfg);
    if let Witness::Point(p) = system::intersect(&[domain])? {
        samples.insert(0, p);
    }
    for y in samples {
        if !domain.contains(&y) {
            continue;
        }
        let cl = match l.closed_value(&y) {
            Ok(s) => s,
            Err(CoreError::Unsupported(_)) => continue,
            Err(e) => return Err(e),
        };
        match system::intersect(&[&cl, &outside])? {
            Witness::Empty => {}
            Witness::Point(v) => return Ok(OVerdict::fail(vec![y, v], None)),
            Witness::Irrational => return Err(CoreError::Irrational("inclusion witness".into())),
        }
    }
    Ok(OVerdict::HoldsOnGrid)
}

pub fn check_o_properties(l: &LevelSetMapping, y_bar: &Vector, cfg: &SearchConfig) -> Result<OPropertyReport> {
    l.validate()?;
    y_bar.check_dim(l.dim(), "reference point")?;
    let lc = l.l_circ(y_bar);
    let lv = l.value(y_bar);
    let o5 = match &lc {
        Ok(lc) => soft(check_inclusion(l, y_bar, lc, lc, cfg)),
        Err(e) => OVerdict::Inconclusive { reason: e.to_string() },
    };
    let o6 = match &lv {
        Ok(lv) => soft(check_inclusion(l, y_bar, lv, lv, cfg)),
        Err(e) => OVerdict::Inconclusive { reason: e.to_string() },
    };
    Ok(OPropertyReport {
        y_bar: y_bar.clone(),
        depth: cfg.depth,
        o1: soft(check_o1(l, y_bar, cfg)),
        o2: soft(check_o2(l, y_bar, cfg)),
        o3: soft(check_o3(l, y_bar)),
        o4: soft(check_o4(l, y_bar, cfg)),
        o5,
        o6,
    })
}

/// Re-checks a failure witness by exact membership and emptiness computations.
pub fn verify_failure(l: &LevelSetMapping, y_bar: &Vector, property: &str, v: &OVerdict) -> Result<bool> {
    let OVerdict::FailsWithWitness { points, radius } = v else { return Ok(false) };
    Ok(match (property, radius) {
        ("O1" | "O2", Some(r)) => punctured_point(l, y_bar, r)?.is_none(),
        ("O3", None) => l.value(y_bar)?.contains(y_bar),
        ("O4", None) => !l.closed_value(&points[0])?.contains(&points[0]),
        ("O5", None) => {
            let lc = l.l_circ(y_bar)?;
            lc.contains(&points[0]) && l.closed_value(&points[0])?.contains(&points[1]) && !lc.contains(&points[1])
        }
        ("O6", None) => {
            let lv = l.value(y_bar)?;
            lv.contains(&points[0]) && l.closed_value(&points[0])?.contains(&points[1]) && !lv.contains(&points[1])
        }
        _ => false,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSetInstance {
    pub name: String,
    pub mapping: LevelSetMapping,
    pub y_bar: Vector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicationViolation {
    pub instance: String,
    pub implication: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub instances: usize,
    /// Instances whose verdicts were all definite.
    pub definite: usize,
    /// Implication checks with a satisfied premise.
    pub exercised: usize,
    pub violations: Vec<ImplicationViolation>,
    pub reports: Vec<(String, OPropertyReport)>,
}

/// Checks `(O1) ⇒ (O2)`, `(O3) ⇔ L(ȳ) = L°(ȳ)`, `(O2) & (O4) ⇒ (O1)`,
/// `(O3) & (O4) ⇒ (O2)` and `(O3) ⇒ [(O5) ⇔ (O6)]` on every instance.
pub fn implication_harness(instances: &[LevelSetInstance], cfg: &SearchConfig) -> Result<HarnessReport> {
    let mut out = HarnessReport { instances: instances.len(), definite: 0, exercised: 0, violations: Vec::new(), reports: Vec::new() };
    for inst in instances {
        let r = check_o_properties(&inst.mapping, &inst.y_bar, cfg)?;
        if r.verdicts().iter().all(|(_, v)| !matches!(v, OVerdict::Inconclusive { .. })) {
            out.definite += 1;
        }
        let mut rule = |name: &str, premise: bool, conclusion_fails: bool| {
            if premise {
                out.exercised += 1;
                if conclusion_fails {
                    out.violations.push(ImplicationViolation { instance: inst.name.clone(), implication: name.into() });
                }
            }
        };
        rule("O1 => O2", r.o1.holds(), r.o2.fails());
        rule("O2 & O4 => O1", r.o2.holds() && r.o4.holds(), r.o1.fails());
        rule("O3 & O4 => O2", r.o3.holds() && r.o4.holds(), r.o2.fails());
        let definite56 = !matches!(r.o5, OVerdict::Inconclusive { .. }) && !matches!(r.o6, OVerdict::Inconclusive { .. });
        rule("O3 => (O5 <=> O6)", r.o3.holds() && definite56, r.o5.holds() != r.o6.holds());
        if !matches!(r.o3, OVerdict::Inconclusive { .. }) {
            let lv = inst.mapping.value(&inst.y_bar)?;
            let lc = inst.mapping.l_circ(&inst.y_bar)?;
            if let (Ok(a), Ok(b)) = (system::is_subset(&lv, &lc), system::is_subset(&lc, &lv)) {
                rule("O3 <=> L = L°", true, r.o3.holds() != (a && b));
            }
        }
        out.reports.push((inst.name.clone(), r));
    }
    Ok(out)
}

fn iv(lo: Option<Rat>, lo_closed: bool, hi: Option<Rat>, hi_closed: bool) -> SetExpr {
    let e = |v: Option<Rat>, inf: ExtRat| v.map_or(inf, ExtRat::Finite);
    SetExpr::interval(Interval1D::new(e(lo, ExtRat::NegInf), lo_closed, e(hi, ExtRat::PosInf), hi_closed))
}

fn half_planes(rows: &[([i64; 2], i64)], strict: bool) -> SetExpr {
    let rows = rows
        .iter()
        .map(|(a, b)| {
            let n = Vector::from_ints(a);
            if strict {
                Row::lt(n, Rat::from_int(*b))
            } else {
                Row::le(n, Rat::from_int(*b))
            }
        })
        .collect();
    SetExpr::Polyhedron(HPolyhedron { dim: 2, rows })
}

/// Level-set instances for the implication harness: translated sets in one
/// and two dimensions, tabulated mappings and strict Pareto orders.
pub fn generated_levelset_corpus() -> Vec<LevelSetInstance> {
    let mut out = Vec::new();
    let one = Rat::one();
    for (ci, c) in [Rat::zero(), Rat::new(1, 2), Rat::from_int(-1), Rat::new(1, 4)].into_iter().enumerate() {
        let shapes = [
            ("lower-ray", iv(None, false, Some(c.clone()), true)),
            ("upper-ray", iv(Some(c.clone()), true, None, false)),
            ("box", iv(Some(&c - &one), true, Some(&c + &one), true)),
            ("right-segment", iv(Some(c.clone()), true, Some(&c + &one), false)),
            ("point", iv(Some(c.clone()), true, Some(c.clone()), true)),
            ("open-ray-beyond", iv(None, false, Some(&c + &one), false)),
        ];
        for (name, k) in shapes {
            out.push(LevelSetInstance {
                name: format!("translate-1d-{name}-{ci}"),
                mapping: LevelSetMapping::ConeTranslation { k, y_bar: Vector(vec![c.clone()]) },
                y_bar: Vector(vec![c.clone()]),
            });
        }
    }
    let planar = [
        ("orthant-neg", half_planes(&[([1, 0], 0), ([0, 1], 0)], false)),
        ("orthant-pos", half_planes(&[([-1, 0], 0), ([0, -1], 0)], false)),
        ("half-plane-a", half_planes(&[([1, 1], 0)], false)),
        ("half-plane-b", half_planes(&[([1, -2], 0)], false)),
        ("half-plane-c", half_planes(&[([2, 1], 0)], false)),
        ("wedge", half_planes(&[([-1, 2], 0), ([-1, -1], 0)], false)),
        ("box", half_planes(&[([1, 0], 1), ([-1, 0], 1), ([0, 1], 1), ([0, -1], 1)], false)),
        ("strip", half_planes(&[([0, 1], 1), ([0, -1], 1)], false)),
    ];
    for (name, k) in planar {
        out.push(LevelSetInstance {
            name: format!("translate-2d-{name}"),
            mapping: LevelSetMapping::ConeTranslation { k: k.clone(), y_bar: Vector::zeros(2) },
            y_bar: Vector::zeros(2),
        });
        let shift = Vector::from_ints(&[1, -1]);
        out.push(LevelSetInstance {
            name: format!("translate-2d-{name}-shifted"),
            mapping: LevelSetMapping::ConeTranslation { k: k.translate(&shift), y_bar: shift.clone() },
            y_bar: shift,
        });
    }
    let mut points = vec![Rat::zero()];
    for k in 0..=12 {
        points.push(Rat::pow2(-k));
        points.push(-Rat::pow2(-k));
    }
    let half = Rat::new(1, 2);
    let tables: [(&str, fn(&Rat, &Rat) -> SetExpr); 8] = [
        ("open-lower", |p, _| iv(None, false, Some(p.clone()), false)),
        ("closed-lower", |p, _| iv(None, false, Some(p.clone()), true)),
        ("singleton", |p, _| iv(Some(p.clone()), true, Some(p.clone()), true)),
        ("closed-upper", |p, _| iv(Some(p.clone()), true, None, false)),
        ("open-ball", |p, h| iv(Some(p - h), false, Some(p + h), false)),
        ("open-upper", |p, _| iv(Some(p.clone()), false, None, false)),
        ("below-origin", |p, _| iv(None, false, Some(p.clone().min(Rat::zero())), false)),
        ("punctured-ball", |p, h| {
            SetExpr::union(1, vec![iv(Some(p - h), false, Some(p.clone()), false), iv(Some(p.clone()), false, Some(p + h), false)])
        }),
    ];
    for (name, make) in tables {
        let entries = points.iter().map(|p| TableEntry { point: Vector(vec![p.clone()]), set: make(p, &half) }).collect();
        out.push(LevelSetInstance {
            name: format!("table-{name}"),
            mapping: LevelSetMapping::TableOnGrid { dim: 1, entries },
            y_bar: Vector::zeros(1),
        });
    }
    for dim in 1..=3 {
        out.push(LevelSetInstance {
            name: format!("strict-pareto-{dim}"),
            mapping: LevelSetMapping::StrictPareto { dim, kill_point: None },
            y_bar: Vector::zeros(dim),
        });
    }
    out
}

/// The two instances where the punctured level set is empty.
pub fn empty_punctured_instances() -> Vec<LevelSetInstance> {
    vec![
        LevelSetInstance {
            name: "singleton-map".into(),
            mapping: LevelSetMapping::SingletonMap { dim: 1 },
            y_bar: Vector::zeros(1),
        },
        LevelSetInstance {
            name: "strict-pareto-with-kill-point".into(),
            mapping: LevelSetMapping::StrictPareto { dim: 2, kill_point: Some(Vector::zeros(2)) },
            y_bar: Vector::zeros(2),
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BridgeStatus {
    /// Both sides hold.
    Asserted,
    /// The extremal point was not confirmed, so nothing is asserted.
    Vacuous,
    /// O1 or O5 was not certified.
    HypothesisUnmet,
    /// The extremal point holds while the triple is refuted.
    Violated,
    /// The triple check was inconclusive.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub o1: OVerdict,
    pub o5: OVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal_point: Option<CheckVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<CheckVerdict>,
    pub status: BridgeStatus,
}

/// Runs the extremal-point check and, when it holds under O1 and O5, the
/// extremality check for the triple with the `delta` family of closed level sets.
pub fn bridge_extremal_point(
    f: &MappingExpr,
    omega: &SetExpr,
    l: &LevelSetMapping,
    x_bar: &Vector,
    y_bar: &Vector,
    delta: &Rat,
    cfg: &SearchConfig,
) -> Result<BridgeReport> {
    let props = check_o_properties(l, y_bar, cfg)?;
    let mut report = BridgeReport { o1: props.o1, o5: props.o5, extremal_point: None, triple: None, status: BridgeStatus::HypothesisUnmet };
    if !report.o1.holds() || !report.o5.holds() {
        return Ok(report);
    }
    let point = check_extremal_point(f, omega, l, x_bar, y_bar, &cfg.rho_grid());
    let holds = point.holds();
    report.extremal_point = Some(point);
    if !holds {
        report.status = BridgeStatus::Vacuous;
        return Ok(report);
    }
    let family = xi_delta_family(l.clone(), y_bar.clone(), delta.clone())?;
    let p = TripleProblem::new(f.clone(), omega.clone(), family, x_bar.clone(), y_bar.clone())?;
    let triple = check_triple(&p, Property::Extremal, cfg, &CheckOptions::default());
    report.status = if triple.holds() {
        BridgeStatus::Asserted
    } else if triple.refuted() {
        BridgeStatus::Violated
    } else {
        BridgeStatus::Inconclusive
    };
    report.triple = Some(triple);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pq::PQFunction;

    fn cfg() -> SearchConfig {
        SearchConfig { depth: 8, ..Default::default() }
    }

    #[test]
    fn singleton_map() {
        let l = LevelSetMapping::SingletonMap { dim: 1 };
        let y = Vector::zeros(1);
        let r = check_o_properties(&l, &y, &cfg()).unwrap();
        assert!(r.o4.holds() && r.o5.holds());
        assert!(r.o1.fails() && r.o2.fails());
        assert!(verify_failure(&l, &y, "O1", &r.o1).unwrap());
        assert!(verify_failure(&l, &y, "O2", &r.o2).unwrap());
    }

    #[test]
    fn strict_pareto_with_kill_point() {
        let y = Vector::zeros(2);
        let l = LevelSetMapping::StrictPareto { dim: 2, kill_point: Some(y.clone()) };
        let r = check_o_properties(&l, &y, &cfg()).unwrap();
        assert!(r.o4.holds() && r.o5.holds());
        assert!(r.o1.fails() && r.o2.fails());
    }

    #[test]
    fn lower_ray_translation() {
        let k = SetExpr::interval(Interval1D::lower_ray(Rat::zero()));
        let y = Vector::zeros(1);
        let l = LevelSetMapping::ConeTranslation { k, y_bar: y.clone() };
        let r = check_o_properties(&l, &y, &cfg()).unwrap();
        for v in [&r.o1, &r.o2, &r.o4, &r.o6] {
            assert!(v.holds(), "{r:?}");
        }
        assert!(r.o3.fails());
        assert!(verify_failure(&l, &y, "O3", &r.o3).unwrap());
    }

    #[test]
    fn harness_on_generated_corpus() {
        let mut all = empty_punctured_instances();
        all.extend(generated_levelset_corpus());
        assert!(all.len() >= 50);
        let r = implication_harness(&all, &cfg()).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.exercised > 0);
    }

    #[test]
    fn bridge_outcomes() {
        let k = SetExpr::interval(Interval1D::lower_ray(Rat::zero()));
        let z = Vector::zeros(1);
        let l = LevelSetMapping::ConeTranslation { k, y_bar: z.clone() };
        let f1 = MappingExpr::Epigraphical { phi: PQFunction::constant(Rat::zero()) };
        let r = bridge_extremal_point(&f1, &SetExpr::whole(1), &l, &z, &z, &Rat::one(), &cfg()).unwrap();
        assert_eq!(r.status, BridgeStatus::Asserted);
        let s = LevelSetMapping::SingletonMap { dim: 1 };
        let r = bridge_extremal_point(&f1, &SetExpr::whole(1), &s, &z, &z, &Rat::one(), &cfg()).unwrap();
        assert_eq!(r.status, BridgeStatus::HypothesisUnmet);
    }
}
