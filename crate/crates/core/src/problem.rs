//! Problem files: JSON descriptions of collections, triples and multi-mapping problems.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::family::SetFamily;
use crate::levelset::LevelSetMapping;
use crate::mapping::MappingExpr;
use crate::set::SetExpr;
use crate::stationarity::{Collection, MultiProblem, RefutationTemplate, TripleProblem};
use crate::vector::Vector;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefPoint {
    pub x: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ys: Option<Vec<Vector>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    /// Factor dimensions of the ambient product space, checked against the data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<SetExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mappings: Option<Vec<MappingExpr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<SetFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<SetFamily>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levelset: Option<LevelSetMapping>,
    /// Constraint sets `K_i` for the admissible set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<SetExpr>>,
    pub refpoint: RefPoint,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refutation_templates: Vec<RefutationTemplate>,
}

#[derive(Clone, Debug)]
pub enum Problem {
    /// A bare family collection with its reference point.
    Collection(Collection),
    Triple(TripleProblem),
    Multi(MultiProblem),
}

impl Problem {
    pub fn collection(&self) -> Collection {
        match self {
            Problem::Collection(c) => c.clone(),
            Problem::Triple(p) => p.collection(),
            Problem::Multi(p) => p.collection(),
        }
    }

    /// The problem as a list of mappings, when it has any.
    pub fn as_multi(&self) -> Option<MultiProblem> {
        match self {
            Problem::Collection(_) => None,
            Problem::Triple(p) => Some(MultiProblem::from(p)),
            Problem::Multi(p) => Some(p.clone()),
        }
    }
}

fn malformed(msg: impl Into<String>) -> CoreError {
    CoreError::Malformed(msg.into())
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile> {
        serde_json::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ProblemFile> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::Io(format!("{}: {e}", path.display())))?;
        ProblemFile::from_json(&text)
    }

    /// Builds the problem, checking cross-references and feasibility of the reference point.
    pub fn build(&self) -> Result<Problem> {
        if self.version != FORMAT_VERSION {
            return Err(malformed(format!("unsupported version {:?}", self.version)));
        }
        if self.mapping.is_some() && self.mappings.is_some() {
            return Err(malformed("give either mapping or mappings, not both"));
        }
        if self.family.is_some() && self.families.is_some() {
            return Err(malformed("give either family or families, not both"));
        }
        let rp = &self.refpoint;
        let problem = match (&self.mapping, &self.mappings) {
            (None, None) => {
                let families = self.families.clone().ok_or_else(|| malformed("a collection needs families"))?;
                if self.omega.is_some() || rp.y.is_some() || rp.ys.is_some() {
                    return Err(malformed("a collection takes only families and refpoint.x"));
                }
                Problem::Collection(Collection::new(families, rp.x.clone())?)
            }
            (Some(f), None) => {
                let family = self.family.clone().ok_or_else(|| malformed("a triple needs family"))?;
                let omega = self.omega.clone().ok_or_else(|| malformed("a triple needs omega"))?;
                let y = rp.y.clone().ok_or_else(|| malformed("a triple needs refpoint.y"))?;
                Problem::Triple(TripleProblem::new(f.clone(), omega, family, rp.x.clone(), y)?)
            }
            (None, Some(fs)) => {
                let families = self.families.clone().ok_or_else(|| malformed("mappings need families"))?;
                let omega = self.omega.clone().ok_or_else(|| malformed("mappings need omega"))?;
                let ys = rp.ys.clone().ok_or_else(|| malformed("mappings need refpoint.ys"))?;
                Problem::Multi(MultiProblem::new(fs.clone(), families, omega, rp.x.clone(), ys)?)
            }
            (Some(_), Some(_)) => unreachable!(),
        };
        if let Some(space) = &self.space {
            let dim: usize = space.iter().sum();
            let actual = problem.collection().x_bar.dim();
            if dim != actual {
                return Err(crate::error::dim_mismatch("space", dim, actual));
            }
        }
        if let Some(l) = &self.levelset {
            l.validate()?;
        }
        if let (Some(ks), Some(m)) = (&self.constraints, problem.as_multi()) {
            if ks.len() != m.mappings.len() {
                return Err(malformed("one constraint set per mapping is required"));
            }
        }
        Ok(problem)
    }
}
