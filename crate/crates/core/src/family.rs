//! Families of sets and selection of members near a point.

use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{CoreError, Result};
use crate::interval::Interval1D;
use crate::levelset::LevelSetMapping;
use crate::rational::{ExtRat, Rat};
use crate::set::SetExpr;
use crate::system::distance_below;
use crate::vector::Vector;

/// Rule turning a rational parameter `t` into a set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ParamBuilder {
    /// `(-inf, t]`
    LowerRay,
    /// `[t, +inf)`
    UpperRay,
    /// `base + t·direction`
    Translate { base: SetExpr, direction: Vector },
}

/// Rule turning a positive integer `n` into a point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SeqBuilder {
    /// `point / n`
    Scaled { point: Vector },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SetFamily {
    Finite { members: Vec<SetExpr> },
    ParamInterval { domain: Interval1D, builder: ParamBuilder },
    SingletonSeq { builder: SeqBuilder },
    /// `{cl L(y) : y ∈ L⁻(y_bar) ∩ B_delta(y_bar)}`
    XiDelta { levelset: LevelSetMapping, y_bar: Vector, delta: Rat },
    /// `{omega × A : A ∈ inner}`
    ProductWith { omega: SetExpr, inner: Box<SetFamily> },
    /// `{A_1 × … × A_n : A_i ∈ factors[i]}` with independent parameters.
    ProductOf { factors: Vec<SetFamily> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum MemberParam {
    Rational(Rat),
    Index(u64),
    Id(usize),
    Point(Vector),
    Tuple(Vec<MemberParam>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMemberHandle {
    pub param: MemberParam,
    pub realized: SetExpr,
}

pub fn product_family(omega: SetExpr, fam: SetFamily) -> SetFamily {
    SetFamily::ProductWith { omega, inner: Box::new(fam) }
}

pub fn xi_delta_family(levelset: LevelSetMapping, y_bar: Vector, delta: Rat) -> Result<SetFamily> {
    if !delta.is_positive() {
        return Err(CoreError::Malformed("delta must be positive".into()));
    }
    Ok(SetFamily::XiDelta { levelset, y_bar, delta })
}

impl SetFamily {
    pub fn dim(&self) -> usize {
        match self {
            SetFamily::Finite { members } => members.first().map_or(0, SetExpr::dim),
            SetFamily::ParamInterval { builder, .. } => match builder {
                ParamBuilder::Translate { base, .. } => base.dim(),
                _ => 1,
            },
            SetFamily::SingletonSeq { builder: SeqBuilder::Scaled { point } } => point.dim(),
            SetFamily::XiDelta { y_bar, .. } => y_bar.dim(),
            SetFamily::ProductWith { omega, inner } => omega.dim() + inner.dim(),
            SetFamily::ProductOf { factors } => factors.iter().map(SetFamily::dim).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetFamily::Finite { members } => {
                if members.is_empty() {
                    return Err(CoreError::Malformed("a family needs at least one member".into()));
                }
                let d = members[0].dim();
                for m in members {
                    m.validate()?;
                    if m.dim() != d {
                        return Err(crate::error::dim_mismatch("family member", d, m.dim()));
                    }
                }
                Ok(())
            }
            SetFamily::ParamInterval { domain, builder } => {
                if domain.is_empty() {
                    return Err(CoreError::Malformed("empty parameter domain".into()));
                }
                if let ParamBuilder::Translate { base, direction } = builder {
                    base.validate()?;
                    direction.check_dim(base.dim(), "translation direction")?;
                }
                Ok(())
            }
            SetFamily::SingletonSeq { .. } => Ok(()),
            SetFamily::XiDelta { levelset, y_bar, delta } => {
                levelset.validate()?;
                y_bar.check_dim(levelset.dim(), "family base point")?;
                if !delta.is_positive() {
                    return Err(CoreError::Malformed("delta must be positive".into()));
                }
                Ok(())
            }
            SetFamily::ProductWith { omega, inner } => {
                omega.validate()?;
                inner.validate()
            }
            SetFamily::ProductOf { factors } => {
                if factors.is_empty() {
                    return Err(CoreError::Malformed("product family needs factors".into()));
                }
                factors.iter().try_for_each(SetFamily::validate)
            }
        }
    }

    pub fn realize(&self, param: &MemberParam) -> Result<SetExpr> {
        let bad = || CoreError::Malformed(format!("parameter {param:?} does not index this family"));
        match (self, param) {
            (SetFamily::Finite { members }, MemberParam::Id(i)) => members.get(*i).cloned().ok_or_else(bad),
            (SetFamily::ParamInterval { domain, builder }, MemberParam::Rational(t)) => {
                if !domain.contains(t) {
                    return Err(bad());
                }
                Ok(match builder {
                    ParamBuilder::LowerRay => SetExpr::Interval(Interval1D::lower_ray(t.clone())),
                    ParamBuilder::UpperRay => SetExpr::Interval(Interval1D::upper_ray(t.clone())),
                    ParamBuilder::Translate { base, direction } => base.translate(&direction.scale(t)),
                })
            }
            (SetFamily::SingletonSeq { builder: SeqBuilder::Scaled { point } }, MemberParam::Index(n)) if *n > 0 => {
                Ok(SetExpr::Singleton { point: point.scale(&Rat::from_int(*n as i64).recip()) })
            }
            (SetFamily::XiDelta { levelset, y_bar, delta }, MemberParam::Point(y)) => {
                let admissible = levelset.l_minus(y_bar)?.contains(y) && y.sub(y_bar).norm_inf() < *delta;
                if !admissible {
                    return Err(bad());
                }
                levelset.closed_value(y)
            }
            (SetFamily::ProductWith { omega, inner }, p) => {
                Ok(SetExpr::Product { factors: vec![omega.clone(), inner.realize(p)?] })
            }
            (SetFamily::ProductOf { factors }, MemberParam::Tuple(ps)) if ps.len() == factors.len() => Ok(SetExpr::Product {
                factors: factors.iter().zip(ps).map(|(f, p)| f.realize(p)).collect::<Result<_>>()?,
            }),
            _ => Err(bad()),
        }
    }

    /// Candidate parameters in search order.
    fn candidates(&self, center: &Vector, radius: &ExtRat, cfg: &SearchConfig) -> Result<Vec<MemberParam>> {
        let k = cfg.depth as i32;
        Ok(match self {
            SetFamily::Finite { members } => (0..members.len()).map(MemberParam::Id).collect(),
            SetFamily::ParamInterval { domain, builder } => {
                let ts: Vec<Rat> = match (builder, radius) {
                    // distance to (-inf, t] is max(c - t, 0): members qualify exactly for t > c - r
                    (ParamBuilder::LowerRay, ExtRat::Finite(r)) => {
                        let lo = &center[0] - r;
                        (1..=k).rev().map(|j| &lo + &(r * &Rat::pow2(-j))).chain([center[0].clone()]).collect()
                    }
                    (ParamBuilder::UpperRay, ExtRat::Finite(r)) => {
                        let hi = &center[0] + r;
                        (1..=k).rev().map(|j| &hi - &(r * &Rat::pow2(-j))).chain([center[0].clone()]).collect()
                    }
                    (ParamBuilder::LowerRay, _) => (0..=k).rev().map(|j| &center[0] - &Rat::pow2(j)).collect(),
                    (ParamBuilder::UpperRay, _) => (0..=k).rev().map(|j| &center[0] + &Rat::pow2(j)).collect(),
                    (ParamBuilder::Translate { .. }, _) => dyadic_scan(domain, cfg.depth),
                };
                ts.into_iter().filter(|t| domain.contains(t)).map(MemberParam::Rational).collect()
            }
            SetFamily::SingletonSeq { builder: SeqBuilder::Scaled { point } } => {
                let c = center.norm_inf();
                let start = match radius {
                    ExtRat::Finite(r) if c < *r => {
                        // ‖point/n − center‖ ≤ ‖point‖/n + ‖center‖ < r from here on
                        let n0 = (&point.norm_inf() / &(r - &c)).floor_u64().saturating_add(1);
                        n0.saturating_sub(cfg.budget as u64).max(1)
                    }
                    _ => 1,
                };
                (start..start + 4 * cfg.budget as u64).map(MemberParam::Index).collect()
            }
            SetFamily::XiDelta { levelset, y_bar, delta } => {
                let lm = levelset.l_minus(y_bar)?;
                let mut pts = vec![y_bar.clone()];
                pts.extend(levelset.grid_near(y_bar, delta, 2 * cfg.depth));
                pts.into_iter()
                    .filter(|y| lm.contains(y) && y.sub(y_bar).norm_inf() < *delta)
                    .map(MemberParam::Point)
                    .collect()
            }
            SetFamily::ProductWith { omega, inner } => {
                let d = omega.dim();
                inner.candidates(&center.slice(d, inner.dim()), radius, cfg)?
            }
            SetFamily::ProductOf { factors } => {
                // the ℓ∞ distance to a product is the largest factor distance
                let mut tuples: Vec<Vec<MemberParam>> = vec![Vec::new()];
                let mut off = 0;
                for f in factors {
                    let d = f.dim();
                    let ms = f.members_within(&center.slice(off, d), radius, cfg)?;
                    off += d;
                    tuples = tuples
                        .iter()
                        .flat_map(|t| ms.iter().map(move |m| {
                            let mut t = t.clone();
                            t.push(m.param.clone());
                            t
                        }))
                        .take(cfg.budget)
                        .collect();
                }
                tuples.into_iter().map(MemberParam::Tuple).collect()
            }
        })
    }

    /// Up to `budget` members `A` with `d(center, A) < radius`, in search order.
    pub fn members_within(&self, center: &Vector, radius: &ExtRat, cfg: &SearchConfig) -> Result<Vec<FamilyMemberHandle>> {
        center.check_dim(self.dim(), "family query point")?;
        let mut out = Vec::new();
        for param in self.candidates(center, radius, cfg)? {
            if out.len() >= cfg.budget {
                break;
            }
            let realized = self.realize(&param)?;
            if distance_below(center, &realized, radius)? {
                out.push(FamilyMemberHandle { param, realized });
            }
        }
        Ok(out)
    }
}

/// Dyadic points of a parameter domain, coarse levels first.
fn dyadic_scan(domain: &Interval1D, depth: u32) -> Vec<Rat> {
    let span = Rat::pow2(depth as i32);
    let lo = domain.lower.finite().cloned().unwrap_or(-&span);
    let hi = domain.upper.finite().cloned().unwrap_or(span);
    let mut out: Vec<Rat> = Vec::new();
    for m in 0..=depth.min(8) as i32 {
        let n = 1i64 << m;
        for j in 0..=n {
            let t = &lo + &(&(&hi - &lo) * &Rat::new(j, n));
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn rays() -> SetFamily {
        SetFamily::ParamInterval { domain: Interval1D::real(), builder: ParamBuilder::LowerRay }
    }

    #[test]
    fn lower_rays_near_origin() {
        let cfg = SearchConfig::default();
        let zero = Vector::zeros(1);
        let ms = rays().members_within(&zero, &ExtRat::Finite(q(1, 20)), &cfg).unwrap();
        assert!(!ms.is_empty());
        for m in &ms {
            let MemberParam::Rational(t) = &m.param else { panic!() };
            assert!(*t > q(-1, 20));
            assert!(m.realized.distance(&zero).unwrap() < ExtRat::Finite(q(1, 20)));
        }
        let a = rays().realize(&MemberParam::Rational(q(-3, 100))).unwrap();
        assert!(distance_below(&zero, &a, &ExtRat::Finite(q(1, 20))).unwrap());
    }

    #[test]
    fn singleton_sequence() {
        let cfg = SearchConfig::default();
        let fam = SetFamily::SingletonSeq { builder: SeqBuilder::Scaled { point: Vector::from_ints(&[1]) } };
        let ms = fam.members_within(&Vector::zeros(1), &ExtRat::Finite(q(1, 4)), &cfg).unwrap();
        assert_eq!(ms[0].param, MemberParam::Index(5));
        assert_eq!(ms.len(), cfg.budget);
        let fin = SetFamily::Finite { members: vec![SetExpr::Singleton { point: Vector::zeros(1) }] };
        assert_eq!(fin.members_within(&Vector::zeros(1), &ExtRat::Finite(q(1, 1000)), &cfg).unwrap().len(), 1);
    }

    #[test]
    fn products_and_xi_delta() {
        let cfg = SearchConfig::default();
        let fam = product_family(SetExpr::whole(1), rays());
        let m = fam.realize(&MemberParam::Rational(Rat::zero())).unwrap();
        assert!(m.contains(&Vector::from_ints(&[5, 0])) && !m.contains(&Vector::from_ints(&[5, 1])));
        let empty = product_family(SetExpr::empty(1), rays());
        assert!(empty.members_within(&Vector::zeros(2), &ExtRat::PosInf, &cfg).unwrap().is_empty());

        let l = LevelSetMapping::ConeTranslation {
            k: SetExpr::Interval(Interval1D::lower_ray(Rat::zero())),
            y_bar: Vector::zeros(1),
        };
        let xi = xi_delta_family(l, Vector::zeros(1), Rat::one()).unwrap();
        let ms = xi.members_within(&Vector::zeros(1), &ExtRat::Finite(q(1, 8)), &cfg).unwrap();
        assert!(!ms.is_empty());
        for m in &ms {
            let MemberParam::Point(y) = &m.param else { panic!() };
            assert!(y[0] <= Rat::zero() && y[0] > -Rat::one());
            assert_eq!(m.realized, SetExpr::Interval(Interval1D::lower_ray(y[0].clone())));
        }
        assert!(xi.realize(&MemberParam::Point(Vector::from_ints(&[1]))).is_err());
    }
}
