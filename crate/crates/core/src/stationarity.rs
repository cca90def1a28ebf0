//! Extremality, stationarity and approximate stationarity of set collections.
//!
//! Triples `{F, Ω, Ξ}` and multi-mapping problems are posed as collections in
//! the lifted `(x, y)` space, so one search and one verifier cover all cases.
//! Every witness is re-verified from scratch before it is reported.

use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{CoreError, Result};
use crate::family::{FamilyMemberHandle, MemberParam, SetFamily};
use crate::levelset::{sign_patterns, LevelSetMapping};
use crate::mapping::MappingExpr;
use crate::rational::{ExtRat, Rat};
use crate::scalar::Witness;
use crate::set::SetExpr;
use crate::system::{distance_below, intersect};
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Extremal,
    Stationary,
    ApproxStationary,
    ExtremalPoint,
}

impl std::str::FromStr for Property {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Property> {
        match s {
            "extremal" => Ok(Property::Extremal),
            "stationary" => Ok(Property::Stationary),
            "approx-stationary" => Ok(Property::ApproxStationary),
            "extremal-point" => Ok(Property::ExtremalPoint),
            _ => Err(CoreError::Parse(format!("unknown property {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub eps: Rat,
    pub rho: ExtRat,
    pub members: Vec<FamilyMemberHandle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<Vector>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationPoint {
    pub rho: ExtRat,
    pub members: Vec<MemberParam>,
    pub point: Vector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    HoldsOnSchedule {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<ExtRat>,
        witnesses: Vec<WitnessRecord>,
    },
    RefutedOnGrid { eps_star: Rat, template: String, evidence: Vec<RefutationPoint> },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub property: Property,
    pub outcome: Outcome,
}

impl CheckVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, Outcome::HoldsOnSchedule { .. })
    }

    pub fn refuted(&self) -> bool {
        matches!(self.outcome, Outcome::RefutedOnGrid { .. })
    }

    fn inconclusive(property: Property, reason: impl Into<String>) -> CheckVerdict {
        CheckVerdict { property, outcome: Outcome::Inconclusive { reason: reason.into() } }
    }
}

/// A claimed refutation: at level `eps_star`, every grid `(ρ, members)` choice
/// has a common point, either `x̄ + ρ·coeffs` or one found by the solver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationTemplate {
    pub name: String,
    pub property: Property,
    pub eps_star: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vector>,
}

/// Families in a common space, with the coordinates along which each family's
/// shift point is searched (approximate stationarity only).
#[derive(Clone, Debug)]
pub struct Collection {
    pub families: Vec<SetFamily>,
    pub x_bar: Vector,
    pub shift_coords: Vec<Vec<usize>>,
}

impl Collection {
    /// Finite families get shifts along every coordinate, others stay at `x̄`.
    pub fn new(families: Vec<SetFamily>, x_bar: Vector) -> Result<Collection> {
        if families.len() < 2 {
            return Err(CoreError::Malformed("a collection needs at least two families".into()));
        }
        for f in &families {
            f.validate()?;
            if f.dim() != x_bar.dim() {
                return Err(crate::error::dim_mismatch("family", x_bar.dim(), f.dim()));
            }
        }
        let shift_coords = families
            .iter()
            .map(|f| if matches!(f, SetFamily::Finite { .. }) { (0..x_bar.dim()).collect() } else { Vec::new() })
            .collect();
        Ok(Collection { families, x_bar, shift_coords })
    }

    fn dim(&self) -> usize {
        self.x_bar.dim()
    }
}

#[derive(Clone, Debug)]
pub struct TripleProblem {
    pub f: MappingExpr,
    pub omega: SetExpr,
    pub family: SetFamily,
    pub x_bar: Vector,
    pub y_bar: Vector,
}

impl TripleProblem {
    pub fn new(f: MappingExpr, omega: SetExpr, family: SetFamily, x_bar: Vector, y_bar: Vector) -> Result<TripleProblem> {
        f.validate()?;
        omega.validate()?;
        family.validate()?;
        x_bar.check_dim(f.x_dim(), "x_bar")?;
        y_bar.check_dim(f.y_dim(), "y_bar")?;
        if omega.dim() != f.x_dim() {
            return Err(crate::error::dim_mismatch("omega", f.x_dim(), omega.dim()));
        }
        if family.dim() != f.y_dim() {
            return Err(crate::error::dim_mismatch("family", f.y_dim(), family.dim()));
        }
        if !omega.contains(&x_bar) {
            return Err(CoreError::Malformed("reference point x_bar is not in omega".into()));
        }
        if !f.in_graph(&x_bar, &y_bar) {
            return Err(CoreError::Malformed("reference point y_bar is not in F(x_bar)".into()));
        }
        Ok(TripleProblem { f, omega, family, x_bar, y_bar })
    }

    pub fn point(&self) -> Vector {
        Vector::concat(&[&self.x_bar, &self.y_bar])
    }

    /// `{gph F}` and `{Ω × A : A ∈ Ξ}`
    pub fn collection(&self) -> Collection {
        let d = self.f.x_dim() + self.f.y_dim();
        Collection {
            families: vec![
                SetFamily::Finite { members: vec![self.f.graph()] },
                crate::family::product_family(self.omega.clone(), self.family.clone()),
            ],
            x_bar: self.point(),
            shift_coords: vec![(0..d).collect(), Vec::new()],
        }
    }
}

#[derive(Clone, Debug)]
pub struct MultiProblem {
    pub mappings: Vec<MappingExpr>,
    pub families: Vec<SetFamily>,
    pub omega: SetExpr,
    pub x_bar: Vector,
    pub y_bars: Vec<Vector>,
}

impl MultiProblem {
    pub fn new(
        mappings: Vec<MappingExpr>,
        families: Vec<SetFamily>,
        omega: SetExpr,
        x_bar: Vector,
        y_bars: Vec<Vector>,
    ) -> Result<MultiProblem> {
        if mappings.is_empty() || mappings.len() != families.len() || mappings.len() != y_bars.len() {
            return Err(CoreError::Malformed("mappings, families and y_bars must have the same positive length".into()));
        }
        for (i, f) in mappings.iter().enumerate() {
            f.validate()?;
            families[i].validate()?;
            x_bar.check_dim(f.x_dim(), "x_bar")?;
            y_bars[i].check_dim(f.y_dim(), "y_bar")?;
            if families[i].dim() != f.y_dim() {
                return Err(crate::error::dim_mismatch("family", f.y_dim(), families[i].dim()));
            }
            if !f.in_graph(&x_bar, &y_bars[i]) {
                return Err(CoreError::Malformed(format!("reference point y_bar[{i}] is not in F_{i}(x_bar)")));
            }
        }
        omega.validate()?;
        if !omega.contains(&x_bar) {
            return Err(CoreError::Malformed("reference point x_bar is not in omega".into()));
        }
        Ok(MultiProblem { mappings, families, omega, x_bar, y_bars })
    }

    pub fn point(&self) -> Vector {
        let mut parts: Vec<&Vector> = vec![&self.x_bar];
        parts.extend(self.y_bars.iter());
        Vector::concat(&parts)
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = self.x_bar.dim();
        self.mappings
            .iter()
            .map(|m| {
                let o = off;
                off += m.y_dim();
                o
            })
            .collect()
    }

    /// `{Ω_i}` for each mapping and `{Ω × A_1 × … × A_n}`.
    pub fn collection(&self) -> Collection {
        let xd = self.x_bar.dim();
        let dim = self.point().dim();
        let mut families = Vec::new();
        let mut shift_coords = Vec::new();
        for (f, off) in self.mappings.iter().zip(self.offsets()) {
            let mut coords: Vec<usize> = (0..xd).collect();
            coords.extend(off..off + f.y_dim());
            families.push(SetFamily::Finite {
                members: vec![SetExpr::Embed { dim, coords: coords.clone(), inner: Box::new(f.graph()) }],
            });
            shift_coords.push(coords);
        }
        let mut factors = vec![SetFamily::Finite { members: vec![self.omega.clone()] }];
        factors.extend(self.families.iter().cloned());
        families.push(SetFamily::ProductOf { factors });
        shift_coords.push(Vec::new());
        Collection { families, x_bar: self.point(), shift_coords }
    }
}

fn ball(center: &Vector, rho: &ExtRat) -> SetExpr {
    SetExpr::ball(center, rho)
}

fn empty_intersection(sets: &[SetExpr]) -> Result<bool> {
    let refs: Vec<&SetExpr> = sets.iter().collect();
    Ok(intersect(&refs)?.is_empty())
}

fn common_point(sets: &[SetExpr]) -> Result<Option<Vector>> {
    let refs: Vec<&SetExpr> = sets.iter().collect();
    Ok(match intersect(&refs)? {
        Witness::Point(p) => Some(p),
        _ => None,
    })
}

/// Exact re-verification of one witness record.
pub fn verify_witness(c: &Collection, property: Property, w: &WitnessRecord) -> Result<bool> {
    if w.members.len() != c.families.len() || !w.eps.is_positive() {
        return Ok(false);
    }
    for (fam, m) in c.families.iter().zip(&w.members) {
        if fam.realize(&m.param)? != m.realized {
            return Ok(false);
        }
    }
    let rho_ok = match (&w.rho, property) {
        (ExtRat::Finite(r), Property::Extremal) => r.is_positive(),
        (ExtRat::PosInf, Property::Extremal) => true,
        (ExtRat::Finite(r), _) => r.is_positive() && *r < w.eps,
        _ => false,
    };
    if !rho_ok {
        return Ok(false);
    }
    let x_bar = &c.x_bar;
    match property {
        Property::Extremal | Property::Stationary => {
            let bound = match property {
                Property::Extremal => ExtRat::Finite(w.eps.clone()),
                _ => ExtRat::Finite(&w.eps * w.rho.finite().unwrap()),
            };
            for m in &w.members {
                if !distance_below(x_bar, &m.realized, &bound)? {
                    return Ok(false);
                }
            }
            let mut sets: Vec<SetExpr> = w.members.iter().map(|m| m.realized.clone()).collect();
            sets.push(ball(x_bar, &w.rho));
            empty_intersection(&sets)
        }
        Property::ApproxStationary => {
            let Some(shifts) = &w.shifts else { return Ok(false) };
            if shifts.len() != w.members.len() {
                return Ok(false);
            }
            let rho = w.rho.finite().unwrap();
            let bound = ExtRat::Finite(&w.eps * rho);
            let mut sets = Vec::new();
            for (m, s) in w.members.iter().zip(shifts) {
                if s.dim() != x_bar.dim() || s.sub(x_bar).norm_inf() >= w.eps {
                    return Ok(false);
                }
                if !distance_below(s, &m.realized, &bound)? {
                    return Ok(false);
                }
                sets.push(m.realized.translate(&s.neg()));
            }
            sets.push(ball(&Vector::zeros(x_bar.dim()), &w.rho));
            empty_intersection(&sets)
        }
        Property::ExtremalPoint => Ok(false),
    }
}

const MAX_COMBOS: usize = 4096;

/// Lexicographic cartesian product of per-family member lists.
fn combos(lists: &[Vec<FamilyMemberHandle>]) -> Vec<Vec<FamilyMemberHandle>> {
    let mut out: Vec<Vec<FamilyMemberHandle>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::new();
        for prefix in &out {
            for m in l {
                if next.len() >= MAX_COMBOS {
                    break;
                }
                let mut p = prefix.clone();
                p.push(m.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn member_lists(c: &Collection, centers: &[Vector], radius: &ExtRat, cfg: &SearchConfig) -> Result<Vec<Vec<FamilyMemberHandle>>> {
    c.families.iter().zip(centers).map(|(f, x)| f.members_within(x, radius, cfg)).collect()
}

/// Extremality witness at one level for a fixed `ρ`.
pub fn extremal_at(c: &Collection, rho: &ExtRat, eps: &Rat, cfg: &SearchConfig) -> Result<Option<WitnessRecord>> {
    let centers = vec![c.x_bar.clone(); c.families.len()];
    let lists = member_lists(c, &centers, &ExtRat::Finite(eps.clone()), cfg)?;
    for members in combos(&lists) {
        let mut sets: Vec<SetExpr> = members.iter().map(|m| m.realized.clone()).collect();
        sets.push(ball(&c.x_bar, rho));
        if empty_intersection(&sets)? {
            let w = WitnessRecord { eps: eps.clone(), rho: rho.clone(), members, shifts: None };
            if verify_witness(c, Property::Extremal, &w)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// `ρ = ε·2^-j` candidates, coarse first.
fn stationary_rhos(eps: &Rat, cfg: &SearchConfig) -> Vec<Rat> {
    (1..=(cfg.depth / 2).max(3) as i32).map(|j| eps * &Rat::pow2(-j)).collect()
}

pub fn stationary_at(c: &Collection, eps: &Rat, cfg: &SearchConfig) -> Result<Option<WitnessRecord>> {
    let centers = vec![c.x_bar.clone(); c.families.len()];
    for rho in stationary_rhos(eps, cfg) {
        let lists = member_lists(c, &centers, &ExtRat::Finite(eps * &rho), cfg)?;
        for members in combos(&lists) {
            let mut sets: Vec<SetExpr> = members.iter().map(|m| m.realized.clone()).collect();
            sets.push(ball(&c.x_bar, &ExtRat::Finite(rho.clone())));
            if empty_intersection(&sets)? {
                let w = WitnessRecord { eps: eps.clone(), rho: ExtRat::Finite(rho.clone()), members, shifts: None };
                if verify_witness(c, Property::Stationary, &w)? {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

/// Shift candidates `x̄ + ρ·u` with `u ∈ {-1,0,1}` on the family's shift coordinates, zero first.
fn shift_options(c: &Collection, i: usize, rho: &Rat) -> Vec<Vector> {
    let coords = &c.shift_coords[i];
    let mut out = vec![c.x_bar.clone()];
    for u in sign_patterns(coords.len()) {
        if u.is_zero() {
            continue;
        }
        let mut s = c.x_bar.clone();
        for (k, &j) in coords.iter().enumerate() {
            s[j] = &s[j] + &(&u[k] * rho);
        }
        out.push(s);
    }
    out
}

pub fn approx_at(c: &Collection, eps: &Rat, cfg: &SearchConfig) -> Result<Option<WitnessRecord>> {
    for rho in stationary_rhos(eps, cfg) {
        let options: Vec<Vec<Vector>> = (0..c.families.len()).map(|i| shift_options(c, i, &rho)).collect();
        let mut shift_sets: Vec<Vec<Vector>> = vec![Vec::new()];
        for o in &options {
            shift_sets = shift_sets
                .iter()
                .flat_map(|p| o.iter().map(move |s| {
                    let mut q = p.clone();
                    q.push(s.clone());
                    q
                }))
                .take(MAX_COMBOS)
                .collect();
        }
        let radius = ExtRat::Finite(eps * &rho);
        let ball0 = ball(&Vector::zeros(c.dim()), &ExtRat::Finite(rho.clone()));
        for shifts in shift_sets {
            let lists = member_lists(c, &shifts, &radius, cfg)?;
            for members in combos(&lists) {
                let mut sets: Vec<SetExpr> =
                    members.iter().zip(&shifts).map(|(m, s)| m.realized.translate(&s.neg())).collect();
                sets.push(ball0.clone());
                if empty_intersection(&sets)? {
                    let w = WitnessRecord {
                        eps: eps.clone(),
                        rho: ExtRat::Finite(rho.clone()),
                        members,
                        shifts: Some(shifts.clone()),
                    };
                    if verify_witness(c, Property::ApproxStationary, &w)? {
                        return Ok(Some(w));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Common points for every grid `(ρ, members)` choice at `eps_star`, or `None`.
pub fn refute(
    c: &Collection,
    property: Property,
    eps_star: &Rat,
    rhos: &[ExtRat],
    coeffs: Option<&Vector>,
    cfg: &SearchConfig,
) -> Result<Option<Vec<RefutationPoint>>> {
    let centers = vec![c.x_bar.clone(); c.families.len()];
    let mut evidence = Vec::new();
    for rho in rhos {
        let radius = match property {
            Property::Extremal => ExtRat::Finite(eps_star.clone()),
            _ => match rho {
                ExtRat::Finite(r) => ExtRat::Finite(eps_star * r),
                _ => return Ok(None),
            },
        };
        let lists = member_lists(c, &centers, &radius, cfg)?;
        if lists.iter().any(Vec::is_empty) {
            // no admissible members: nothing to intersect, so no refutation
            return Ok(None);
        }
        for members in combos(&lists) {
            let mut sets: Vec<SetExpr> = members.iter().map(|m| m.realized.clone()).collect();
            sets.push(ball(&c.x_bar, rho));
            let point = match (coeffs, rho) {
                (Some(k), ExtRat::Finite(r)) => {
                    let p = c.x_bar.add(&k.scale(r));
                    if sets.iter().all(|s| s.contains(&p)) { Some(p) } else { None }
                }
                _ => common_point(&sets)?,
            };
            match point {
                Some(p) => {
                    debug_assert!(sets.iter().all(|s| s.contains(&p)));
                    evidence.push(RefutationPoint {
                        rho: rho.clone(),
                        members: members.iter().map(|m| m.param.clone()).collect(),
                        point: p,
                    });
                }
                None => return Ok(None),
            }
        }
    }
    Ok(Some(evidence))
}

/// Exact check that refutation evidence points lie in every required set.
pub fn verify_refutation(c: &Collection, evidence: &[RefutationPoint]) -> Result<bool> {
    for e in evidence {
        if e.members.len() != c.families.len() {
            return Ok(false);
        }
        let b = ball(&c.x_bar, &e.rho);
        if !b.contains(&e.point) {
            return Ok(false);
        }
        for (fam, p) in c.families.iter().zip(&e.members) {
            if !fam.realize(p)?.contains(&e.point) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn refutation_rhos(property: Property, eps_star: &Rat, fixed_rho: Option<&ExtRat>, cfg: &SearchConfig) -> Vec<ExtRat> {
    if let Some(r) = fixed_rho {
        return vec![r.clone()];
    }
    match property {
        Property::Extremal => cfg.rho_grid(),
        _ => (1..=cfg.depth as i32).map(|j| ExtRat::Finite(eps_star * &Rat::pow2(-j))).collect(),
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub fixed_rho: Option<ExtRat>,
    pub templates: Vec<RefutationTemplate>,
    pub levels: Option<u32>,
}

fn soft<T>(property: Property, r: Result<T>) -> std::result::Result<T, CheckVerdict> {
    r.map_err(|e| match e {
        CoreError::Malformed(_) | CoreError::Parse(_) => CheckVerdict::inconclusive(property, format!("invalid input: {e}")),
        e => CheckVerdict::inconclusive(property, format!("outside the supported class: {e}")),
    })
}

/// Decides a property of a collection on the level schedule.
pub fn check_collection(c: &Collection, property: Property, cfg: &SearchConfig, opts: &CheckOptions) -> CheckVerdict {
    match check_inner(c, property, cfg, opts) {
        Ok(v) | Err(v) => v,
    }
}

fn check_inner(
    c: &Collection,
    property: Property,
    cfg: &SearchConfig,
    opts: &CheckOptions,
) -> std::result::Result<CheckVerdict, CheckVerdict> {
    if property == Property::ExtremalPoint {
        return Err(CheckVerdict::inconclusive(property, "extremal points are checked on triples with a level-set mapping"));
    }
    let schedule = cfg.schedule(opts.levels);
    // verified templates take precedence: they certify failure below the schedule
    for t in opts.templates.iter().filter(|t| t.property == property) {
        let rhos = refutation_rhos(property, &t.eps_star, opts.fixed_rho.as_ref(), cfg);
        if let Some(evidence) = soft(property, refute(c, property, &t.eps_star, &rhos, t.coeffs.as_ref(), cfg))? {
            return Ok(CheckVerdict {
                property,
                outcome: Outcome::RefutedOnGrid { eps_star: t.eps_star.clone(), template: t.name.clone(), evidence },
            });
        }
    }
    let found = match property {
        Property::Extremal => {
            let rhos = match &opts.fixed_rho {
                Some(r) => vec![r.clone()],
                None => cfg.rho_grid(),
            };
            let mut hit = None;
            for rho in &rhos {
                let mut ws = Vec::new();
                for eps in &schedule {
                    match soft(property, extremal_at(c, rho, eps, cfg))? {
                        Some(w) => ws.push(w),
                        None => break,
                    }
                }
                if ws.len() == schedule.len() {
                    hit = Some((rho.clone(), ws));
                    break;
                }
            }
            hit.map(|(rho, ws)| (Some(rho), ws))
        }
        _ => {
            let mut ws = Vec::new();
            for eps in &schedule {
                let w = match property {
                    Property::Stationary => soft(property, stationary_at(c, eps, cfg))?,
                    _ => soft(property, approx_at(c, eps, cfg))?,
                };
                match w {
                    Some(w) => ws.push(w),
                    None => break,
                }
            }
            (ws.len() == schedule.len()).then_some((None, ws))
        }
    };
    if let Some((rho, witnesses)) = found {
        return Ok(CheckVerdict { property, outcome: Outcome::HoldsOnSchedule { rho, witnesses } });
    }
    if property != Property::ApproxStationary {
        for eps_star in &schedule {
            let rhos = refutation_rhos(property, eps_star, opts.fixed_rho.as_ref(), cfg);
            if let Some(evidence) = soft(property, refute(c, property, eps_star, &rhos, None, cfg))? {
                return Ok(CheckVerdict {
                    property,
                    outcome: Outcome::RefutedOnGrid { eps_star: eps_star.clone(), template: "solver".into(), evidence },
                });
            }
        }
    }
    Ok(CheckVerdict::inconclusive(
        property,
        format!("no witness on the schedule and no refutation on the grid (depth {}, budget {})", cfg.depth, cfg.budget),
    ))
}

pub fn check_triple(p: &TripleProblem, property: Property, cfg: &SearchConfig, opts: &CheckOptions) -> CheckVerdict {
    check_collection(&p.collection(), property, cfg, opts)
}

pub fn check_multi(p: &MultiProblem, property: Property, cfg: &SearchConfig, opts: &CheckOptions) -> CheckVerdict {
    check_collection(&p.collection(), property, cfg, opts)
}

/// Replays every witness at all coarser schedule levels.
pub fn replay_upward(c: &Collection, property: Property, witnesses: &[WitnessRecord], schedule: &[Rat]) -> Result<bool> {
    for w in witnesses {
        for eps in schedule.iter().filter(|e| **e > w.eps) {
            let coarse = WitnessRecord { eps: eps.clone(), ..w.clone() };
            if !verify_witness(c, property, &coarse)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Stationarity witnesses from an extremality witness with radius `rho0`.
pub fn extremal_to_stationary(c: &Collection, rho0: &ExtRat, schedule: &[Rat], cfg: &SearchConfig) -> Result<Option<Vec<WitnessRecord>>> {
    let mut out = Vec::new();
    for eps in schedule {
        let half = eps * &Rat::pow2(-1);
        let rho = match rho0 {
            ExtRat::Finite(r) => half.min(r.clone()),
            _ => half,
        };
        // members from the extremal witness at level ε·ρ also work at radius ρ ≤ ρ0
        let Some(w) = extremal_at(c, rho0, &(eps * &rho), cfg)? else { return Ok(None) };
        let s = WitnessRecord { eps: eps.clone(), rho: ExtRat::Finite(rho), members: w.members, shifts: None };
        if !verify_witness(c, Property::Stationary, &s)? {
            return Ok(None);
        }
        out.push(s);
    }
    Ok(Some(out))
}

/// Approximate-stationarity witnesses with all shifts at `x̄`.
pub fn stationary_to_approx(c: &Collection, witnesses: &[WitnessRecord]) -> Result<Option<Vec<WitnessRecord>>> {
    let mut out = Vec::new();
    for w in witnesses {
        let a = WitnessRecord { shifts: Some(vec![c.x_bar.clone(); c.families.len()]), ..w.clone() };
        if !verify_witness(c, Property::ApproxStationary, &a)? {
            return Ok(None);
        }
        out.push(a);
    }
    Ok(Some(out))
}

/// `F(Ω ∩ B_ρ(x̄)) ∩ L°(ȳ) ∩ B_ρ(ȳ) = ∅` for some grid `ρ`.
pub fn check_extremal_point(
    f: &MappingExpr,
    omega: &SetExpr,
    l: &LevelSetMapping,
    x_bar: &Vector,
    y_bar: &Vector,
    rhos: &[ExtRat],
) -> CheckVerdict {
    let property = Property::ExtremalPoint;
    let run = || -> Result<CheckVerdict> {
        if !omega.contains(x_bar) || !f.in_graph(x_bar, y_bar) {
            return Err(CoreError::Malformed("reference point is not feasible".into()));
        }
        let center = Vector::concat(&[x_bar, y_bar]);
        let target = SetExpr::Product { factors: vec![omega.clone(), l.l_circ(y_bar)?] };
        let graph = f.graph();
        let mut evidence = Vec::new();
        for rho in rhos {
            let sets = vec![graph.clone(), target.clone(), ball(&center, rho)];
            let refs: Vec<&SetExpr> = sets.iter().collect();
            match intersect(&refs)? {
                Witness::Empty => {
                    let w = WitnessRecord { eps: Rat::one(), rho: rho.clone(), members: Vec::new(), shifts: None };
                    return Ok(CheckVerdict { property, outcome: Outcome::HoldsOnSchedule { rho: Some(rho.clone()), witnesses: vec![w] } });
                }
                Witness::Point(p) => evidence.push(RefutationPoint { rho: rho.clone(), members: Vec::new(), point: p }),
                Witness::Irrational => {
                    return Ok(CheckVerdict::inconclusive(property, "only irrational common points were found"));
                }
            }
        }
        Ok(CheckVerdict {
            property,
            outcome: Outcome::RefutedOnGrid { eps_star: Rat::one(), template: "solver".into(), evidence },
        })
    };
    match soft(property, run()) {
        Ok(v) | Err(v) => v,
    }
}
