//! Rational vectors and the block-structured norm of a product space.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, CoreError, Result};
use crate::rational::Rat;

#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<Rat>);

impl Vector {
    pub fn new(coords: Vec<Rat>) -> Vector {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Vector {
        Vector(vec![Rat::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(dim);
        v.0[i] = Rat::one();
        v
    }

    pub fn from_ints(xs: &[i64]) -> Vector {
        Vector(xs.iter().map(|&x| Rat::from_int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rat::is_zero)
    }

    pub fn dot(&self, other: &Vector) -> Rat {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rat) -> Vector {
        Vector(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }

    pub fn norm_inf(&self) -> Rat {
        self.0.iter().map(Rat::abs).fold(Rat::zero(), Rat::max)
    }

    pub fn norm_l1(&self) -> Rat {
        self.0.iter().map(Rat::abs).sum()
    }

    pub fn concat(parts: &[&Vector]) -> Vector {
        Vector(parts.iter().flat_map(|p| p.0.iter().cloned()).collect())
    }

    pub fn slice(&self, start: usize, len: usize) -> Vector {
        Vector(self.0[start..start + len].to_vec())
    }

    pub fn check_dim(&self, dim: usize, what: &str) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(dim_mismatch(what, dim, self.dim()))
        }
    }

    /// Scales so that the first nonzero coordinate has absolute value one.
    pub fn normalized_direction(&self) -> Vector {
        match self.0.iter().find(|c| !c.is_zero()) {
            Some(c) => self.scale(&c.abs().recip()),
            None => self.clone(),
        }
    }

    /// Parses `"1/2, -3"` style comma-separated coordinates.
    pub fn parse_list(s: &str) -> Result<Vector> {
        if s.trim().is_empty() {
            return Ok(Vector(Vec::new()));
        }
        s.split(',')
            .map(|t| t.parse::<Rat>())
            .collect::<Result<Vec<_>>>()
            .map(Vector)
    }
}

impl Index<usize> for Vector {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut Rat {
        &mut self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Block structure of a product space.
///
/// The primal norm is the maximum over blocks of the block's ℓ∞ norm, which
/// collapses to the plain ℓ∞ norm; the dual norm is the sum over blocks of the
/// block's ℓ1 norm, i.e. the plain ℓ1 norm. The block structure is still kept
/// so that per-factor norms can be reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormContext {
    pub factor_dims: Vec<usize>,
}

impl NormContext {
    pub fn new(factor_dims: Vec<usize>) -> Result<NormContext> {
        if factor_dims.is_empty() || factor_dims.iter().any(|&d| d == 0) {
            return Err(CoreError::Malformed("factor dimensions must be positive".into()));
        }
        Ok(NormContext { factor_dims })
    }

    pub fn single(dim: usize) -> NormContext {
        NormContext { factor_dims: vec![dim] }
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().sum()
    }

    fn blocks<'a>(&'a self, v: &'a Vector) -> impl Iterator<Item = Vector> + 'a {
        let mut start = 0;
        self.factor_dims.iter().map(move |&d| {
            let b = v.slice(start, d);
            start += d;
            b
        })
    }

    pub fn primal_norm(&self, v: &Vector) -> Result<Rat> {
        v.check_dim(self.dim(), "primal norm")?;
        Ok(self.blocks(v).map(|b| b.norm_inf()).fold(Rat::zero(), Rat::max))
    }

    pub fn dual_norm(&self, v: &Vector) -> Result<Rat> {
        v.check_dim(self.dim(), "dual norm")?;
        Ok(self.blocks(v).map(|b| b.norm_l1()).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn product_norms_reduce_to_plain_norms() {
        let ctx = NormContext::new(vec![1, 2]).unwrap();
        let v = Vector(vec![q(-1, 2), q(1, 3), q(-2, 3)]);
        assert_eq!(ctx.primal_norm(&v).unwrap(), q(2, 3));
        assert_eq!(ctx.dual_norm(&v).unwrap(), q(3, 2));
        assert!(ctx.dual_norm(&Vector::zeros(2)).is_err());
    }

    #[test]
    fn parse_list() {
        let v = Vector::parse_list("1/200, -1/40000").unwrap();
        assert_eq!(v, Vector(vec![q(1, 200), q(-1, 40000)]));
    }
}
