//! Level-set mappings `L` defining preferences: `v ≺ y` iff `v ∈ L(y)`.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, CoreError, Result};
use crate::lp::Row;
use crate::polyhedron::HPolyhedron;
use crate::rational::Rat;
use crate::set::SetExpr;
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableEntry {
    pub point: Vector,
    pub set: SetExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LevelSetMapping {
    /// `L(y) = y − y_bar + K`
    ConeTranslation { k: SetExpr, y_bar: Vector },
    /// `L(y) = {v : v_j < y_j for all j}`, except `L(kill_point) = {kill_point}`.
    StrictPareto {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kill_point: Option<Vector>,
    },
    /// `L(y) = {y}`
    SingletonMap { dim: usize },
    /// `L` tabulated on finitely many points.
    TableOnGrid { dim: usize, entries: Vec<TableEntry> },
}

impl LevelSetMapping {
    pub fn dim(&self) -> usize {
        match self {
            LevelSetMapping::ConeTranslation { y_bar, .. } => y_bar.dim(),
            LevelSetMapping::StrictPareto { dim, .. }
            | LevelSetMapping::SingletonMap { dim }
            | LevelSetMapping::TableOnGrid { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LevelSetMapping::ConeTranslation { k, y_bar } => {
                k.validate()?;
                if k.dim() != y_bar.dim() {
                    return Err(dim_mismatch("level-set cone", y_bar.dim(), k.dim()));
                }
                if !k.contains(y_bar) {
                    return Err(CoreError::Malformed("cone translation needs y_bar ∈ K".into()));
                }
                Ok(())
            }
            LevelSetMapping::StrictPareto { dim, kill_point } => match kill_point {
                Some(k) => k.check_dim(*dim, "kill point"),
                None => Ok(()),
            },
            LevelSetMapping::SingletonMap { .. } => Ok(()),
            LevelSetMapping::TableOnGrid { dim, entries } => {
                for e in entries {
                    e.point.check_dim(*dim, "table point")?;
                    e.set.validate()?;
                    if e.set.dim() != *dim {
                        return Err(dim_mismatch("table set", *dim, e.set.dim()));
                    }
                }
                Ok(())
            }
        }
    }

    /// `L(y)`
    pub fn value(&self, y: &Vector) -> Result<SetExpr> {
        y.check_dim(self.dim(), "level-set argument")?;
        Ok(match self {
            LevelSetMapping::ConeTranslation { k, y_bar } => k.translate(&y.sub(y_bar)),
            LevelSetMapping::StrictPareto { dim, kill_point } => {
                if kill_point.as_ref() == Some(y) {
                    SetExpr::Singleton { point: y.clone() }
                } else {
                    let rows = (0..*dim).map(|j| Row::lt(Vector::unit(*dim, j), y[j].clone())).collect();
                    SetExpr::Polyhedron(HPolyhedron { dim: *dim, rows })
                }
            }
            LevelSetMapping::SingletonMap { .. } => SetExpr::Singleton { point: y.clone() },
            LevelSetMapping::TableOnGrid { entries, .. } => entries
                .iter()
                .find(|e| &e.point == y)
                .map(|e| e.set.clone())
                .ok_or_else(|| CoreError::Unsupported(format!("level set at {y} is not tabulated")))?,
        })
    }

    /// `L°(y) = L(y) ∖ {y}`
    pub fn l_circ(&self, y: &Vector) -> Result<SetExpr> {
        Ok(self.value(y)?.remove_point(y))
    }

    /// `L⁻(y) = L(y) ∪ {y}`
    pub fn l_minus(&self, y: &Vector) -> Result<SetExpr> {
        Ok(self.value(y)?.with_point(y))
    }

    /// `cl L(y)`
    pub fn closed_value(&self, y: &Vector) -> Result<SetExpr> {
        Ok(self.value(y)?.closure())
    }

    /// Points at which the mapping can be evaluated near `center`, within the open
    /// box of radius `radius`, coarse levels first.
    pub fn grid_near(&self, center: &Vector, radius: &Rat, depth: u32) -> Vec<Vector> {
        let d = self.dim();
        if let LevelSetMapping::TableOnGrid { entries, .. } = self {
            return entries
                .iter()
                .map(|e| e.point.clone())
                .filter(|p| p.sub(center).norm_inf() < *radius)
                .collect();
        }
        let mut out: Vec<Vector> = Vec::new();
        let dirs = sign_patterns(d);
        for j in 1..=depth as i32 {
            let step = radius * &Rat::pow2(-j);
            for u in &dirs {
                let p = center.add(&u.scale(&step));
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// All of `{-1, 0, 1}^d` in lexicographic order.
pub fn sign_patterns(d: usize) -> Vec<Vector> {
    let mut out = vec![Vector::zeros(0)];
    for _ in 0..d {
        let mut next = Vec::new();
        for v in &out {
            for s in [-1i64, 0, 1] {
                let mut w = v.0.clone();
                w.push(Rat::from_int(s));
                next.push(Vector(w));
            }
        }
        out = next;
    }
    out
}
