//! Intervals of the real line with independent open/closed ends.

use serde::{Deserialize, Serialize};

use crate::lp::Row;
use crate::rational::{ExtRat, Rat};
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval1D {
    pub lower: ExtRat,
    pub lower_closed: bool,
    pub upper: ExtRat,
    pub upper_closed: bool,
}

impl Interval1D {
    pub fn new(lower: ExtRat, lower_closed: bool, upper: ExtRat, upper_closed: bool) -> Interval1D {
        let lower_closed = lower_closed && lower.is_finite();
        let upper_closed = upper_closed && upper.is_finite();
        Interval1D { lower, lower_closed, upper, upper_closed }
    }

    pub fn real() -> Interval1D {
        Interval1D::new(ExtRat::NegInf, false, ExtRat::PosInf, false)
    }

    pub fn closed(a: Rat, b: Rat) -> Interval1D {
        Interval1D::new(a.into(), true, b.into(), true)
    }

    pub fn open(a: Rat, b: Rat) -> Interval1D {
        Interval1D::new(a.into(), false, b.into(), false)
    }

    /// `(-inf, t]`
    pub fn lower_ray(t: Rat) -> Interval1D {
        Interval1D::new(ExtRat::NegInf, false, t.into(), true)
    }

    /// `[t, +inf)`
    pub fn upper_ray(t: Rat) -> Interval1D {
        Interval1D::new(t.into(), true, ExtRat::PosInf, false)
    }

    pub fn point(t: Rat) -> Interval1D {
        Interval1D::closed(t.clone(), t)
    }

    pub fn empty() -> Interval1D {
        Interval1D::open(Rat::zero(), Rat::zero())
    }

    pub fn is_empty(&self) -> bool {
        match self.lower.cmp(&self.upper) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => !(self.lower_closed && self.upper_closed),
            std::cmp::Ordering::Less => false,
        }
    }

    pub fn is_point(&self) -> bool {
        !self.is_empty() && self.lower == self.upper
    }

    pub fn contains(&self, x: &Rat) -> bool {
        let above = match &self.lower {
            ExtRat::NegInf => true,
            ExtRat::Finite(a) => x > a || (self.lower_closed && x == a),
            ExtRat::PosInf => false,
        };
        let below = match &self.upper {
            ExtRat::PosInf => true,
            ExtRat::Finite(b) => x < b || (self.upper_closed && x == b),
            ExtRat::NegInf => false,
        };
        above && below
    }

    pub fn intersect(&self, other: &Interval1D) -> Interval1D {
        let (lower, lower_closed) = match self.lower.cmp(&other.lower) {
            std::cmp::Ordering::Greater => (self.lower.clone(), self.lower_closed),
            std::cmp::Ordering::Less => (other.lower.clone(), other.lower_closed),
            std::cmp::Ordering::Equal => (self.lower.clone(), self.lower_closed && other.lower_closed),
        };
        let (upper, upper_closed) = match self.upper.cmp(&other.upper) {
            std::cmp::Ordering::Less => (self.upper.clone(), self.upper_closed),
            std::cmp::Ordering::Greater => (other.upper.clone(), other.upper_closed),
            std::cmp::Ordering::Equal => (self.upper.clone(), self.upper_closed && other.upper_closed),
        };
        Interval1D::new(lower, lower_closed, upper, upper_closed)
    }

    pub fn shift(&self, c: &Rat) -> Interval1D {
        let mv = |e: &ExtRat| match e {
            ExtRat::Finite(v) => ExtRat::Finite(v + c),
            other => other.clone(),
        };
        Interval1D::new(mv(&self.lower), self.lower_closed, mv(&self.upper), self.upper_closed)
    }

    pub fn closure(&self) -> Interval1D {
        if self.is_empty() {
            return Interval1D::empty();
        }
        Interval1D::new(self.lower.clone(), true, self.upper.clone(), true)
    }

    /// Some rational point of a nonempty interval, preferring the middle.
    pub fn sample(&self) -> Option<Rat> {
        if self.is_empty() {
            return None;
        }
        Some(match (&self.lower, &self.upper) {
            (ExtRat::Finite(a), ExtRat::Finite(b)) => a.midpoint(b),
            (ExtRat::Finite(a), _) => a + &Rat::one(),
            (_, ExtRat::Finite(b)) => b - &Rat::one(),
            _ => Rat::zero(),
        })
    }

    /// Exact distance from `x` to the closure.
    pub fn distance(&self, x: &Rat) -> ExtRat {
        if self.is_empty() {
            return ExtRat::PosInf;
        }
        if let ExtRat::Finite(a) = &self.lower {
            if x < a {
                return ExtRat::Finite(a - x);
            }
        }
        if let ExtRat::Finite(b) = &self.upper {
            if x > b {
                return ExtRat::Finite(x - b);
            }
        }
        ExtRat::Finite(Rat::zero())
    }

    /// Row form in one dimension.
    pub fn rows(&self) -> Vec<Row> {
        let one = Vector(vec![Rat::one()]);
        let minus = Vector(vec![-Rat::one()]);
        let mut rows = Vec::new();
        if self.is_empty() {
            rows.push(Row::le(Vector::zeros(1), -Rat::one()));
            return rows;
        }
        if let ExtRat::Finite(a) = &self.lower {
            rows.push(if self.lower_closed { Row::le(minus.clone(), -a) } else { Row::lt(minus.clone(), -a) });
        }
        if let ExtRat::Finite(b) = &self.upper {
            rows.push(if self.upper_closed { Row::le(one.clone(), b.clone()) } else { Row::lt(one.clone(), b.clone()) });
        }
        rows
    }
}

impl std::fmt::Display for Interval1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            self.lower,
            self.upper,
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn emptiness_and_membership() {
        assert!(Interval1D::open(q(1, 2), q(1, 2)).is_empty());
        assert!(!Interval1D::point(q(1, 2)).is_empty());
        let a = Interval1D::lower_ray(q(-3, 100));
        assert!(a.contains(&q(-3, 100)));
        assert!(!a.contains(&Rat::zero()));
        assert_eq!(a.distance(&Rat::zero()), ExtRat::Finite(q(3, 100)));
    }

    #[test]
    fn intersection_keeps_strictness() {
        // (-1/25, inf) ∩ (-11/100, -1/25] is empty
        let a = Interval1D::new(ExtRat::Finite(q(-1, 25)), false, ExtRat::PosInf, false);
        let b = Interval1D::new(ExtRat::Finite(q(-11, 100)), false, ExtRat::Finite(q(-1, 25)), true);
        assert!(a.intersect(&b).is_empty());
    }
}
