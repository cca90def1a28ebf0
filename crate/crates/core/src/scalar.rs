//! Exact decision of one-variable piecewise-quadratic inequality systems.
//!
//! Roots of quadratics are quadratic surds `a + b√d`; signs at surds are
//! decided by squaring, so no approximation enters the verdict. Rational
//! witnesses are recovered by walking rational upper bounds toward the left
//! end of a feasible component.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::interval::Interval1D;
use crate::pq::{PQFunction, Quadratic};
use crate::rational::{ExtRat, Rat};

/// Outcome of an exact nonemptiness test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Empty,
    Point(crate::vector::Vector),
    /// Nonempty, but every point found is irrational.
    Irrational,
}

impl Witness {
    pub fn is_empty(&self) -> bool {
        matches!(self, Witness::Empty)
    }
}

/// `g(x) < 0` when `strict`, else `g(x) ≤ 0`.
#[derive(Clone, Debug)]
pub struct ScalarConstraint {
    pub g: PQFunction,
    pub strict: bool,
}

#[derive(Clone, Debug)]
struct Surd {
    a: Rat,
    b: Rat,
    d: Rat,
}

impl Surd {
    fn rational(a: Rat) -> Surd {
        Surd { a, b: Rat::zero(), d: Rat::zero() }
    }

    fn as_rational(&self) -> Option<Rat> {
        if self.b.is_zero() || self.d.is_zero() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    /// Sign of `self - r`.
    fn cmp_rat(&self, r: &Rat) -> i32 {
        sign_surd(&(&self.a - r), &self.b, &self.d)
    }

    /// A rational `r` with `self < r ≤ self + 2^-k`.
    fn upper(&self, k: u32) -> Rat {
        let eps = Rat::pow2(-(k as i32));
        match self.as_rational() {
            Some(a) => a + eps,
            None => {
                // bracket √d between t/(2^K m) and (t+1)/(2^K m)
                let n = self.d.numer().clone();
                let m = self.d.denom().clone();
                let extra = (self.b.abs().numer().bits() as u32) + 2;
                let kk = k + extra + (m.bits() as u32);
                let scale = BigInt::from(1u8) << kk;
                let t = (&n * &m * &scale * &scale).sqrt();
                let den = &scale * &m;
                let lo = Rat::from(BigRational::new(t.clone(), den.clone()));
                let hi = Rat::from(BigRational::new(t + 1, den));
                let bound = if self.b.is_positive() { &self.b * &hi } else { &self.b * &lo };
                &self.a + &bound
            }
        }
    }
}

/// Sign of `u + v√d` for `d ≥ 0`.
fn sign_surd(u: &Rat, v: &Rat, d: &Rat) -> i32 {
    let su = u.signum();
    if v.is_zero() || d.is_zero() {
        return su;
    }
    let sv = v.signum();
    if su == 0 || su == sv {
        return sv;
    }
    let lhs = u.square();
    let rhs = &v.square() * d;
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => su,
        std::cmp::Ordering::Less => sv,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Signs of `p`, `p'`, `p''` at a surd.
fn signs_at(p: &Quadratic, s: &Surd) -> [i32; 3] {
    let Quadratic(a2, a1, a0) = p;
    let (a, b, d) = (&s.a, &s.b, &s.d);
    let two = Rat::from_int(2);
    let u = &(a2 * &(&a.square() + &(&b.square() * d))) + &(&(a1 * a) + a0);
    let v = &(&(&two * a2) * &(a * b)) + &(a1 * b);
    let du = &(&(&two * a2) * a) + a1;
    let dv = &(&two * a2) * b;
    [sign_surd(&u, &v, d), sign_surd(&du, &dv, d), a2.signum()]
}

/// Sign of `p` just to the right of `s`.
fn sign_right(p: &Quadratic, s: &Surd) -> i32 {
    signs_at(p, s).into_iter().find(|&x| x != 0).unwrap_or(0)
}

fn ok(sign: i32, strict: bool) -> bool {
    sign < 0 || (sign == 0 && !strict)
}

fn roots(p: &Quadratic) -> Vec<Surd> {
    let Quadratic(a2, a1, a0) = p;
    if a2.is_zero() {
        if a1.is_zero() {
            return Vec::new();
        }
        return vec![Surd::rational(-a0 / a1)];
    }
    let disc = &a1.square() - &(&(&Rat::from_int(4) * a2) * a0);
    if disc.is_negative() {
        return Vec::new();
    }
    let den = &Rat::from_int(2) * a2;
    let a = -a1 / &den;
    if let Some(s) = disc.sqrt_exact() {
        let off = &s / &den;
        return vec![Surd::rational(&a - &off), Surd::rational(&a + &off)];
    }
    let b = den.recip();
    vec![Surd { a: a.clone(), b: b.clone(), d: disc.clone() }, Surd { a, b: -b, d: disc }]
}

fn piece_at(g: &PQFunction, cell: &Interval1D) -> Quadratic {
    let x = cell.sample().expect("nonempty cell");
    let idx = g.breakpoints().iter().take_while(|b| **b <= x).count();
    g.pieces()[idx].clone()
}

fn all_hold(cs: &[ScalarConstraint], x: &Rat) -> bool {
    cs.iter().all(|c| ok(c.g.eval(x).signum(), c.strict))
}

fn point(x: Rat) -> Witness {
    Witness::Point(crate::vector::Vector(vec![x]))
}

/// Decides `∃x ∈ window` with every constraint satisfied.
pub fn solve(cs: &[ScalarConstraint], window: &Interval1D) -> Witness {
    if window.is_empty() {
        return Witness::Empty;
    }
    let mut cuts: Vec<Rat> = cs.iter().flat_map(|c| c.g.breakpoints().iter().cloned()).collect();
    for end in [&window.lower, &window.upper] {
        if let ExtRat::Finite(v) = end {
            cuts.push(v.clone());
        }
    }
    cuts.sort();
    cuts.dedup();
    cuts.retain(|c| window.contains(c) || window.lower == ExtRat::Finite(c.clone()) || window.upper == ExtRat::Finite(c.clone()));
    for c in &cuts {
        if window.contains(c) && all_hold(cs, c) {
            return point(c.clone());
        }
    }
    let mut irrational = false;
    let mut bounds: Vec<ExtRat> = vec![window.lower.clone()];
    bounds.extend(cuts.iter().cloned().map(ExtRat::Finite));
    bounds.push(window.upper.clone());
    bounds.dedup();
    for w in bounds.windows(2) {
        let cell = Interval1D::new(w[0].clone(), false, w[1].clone(), false);
        if cell.is_empty() {
            continue;
        }
        match solve_cell(cs, &cell) {
            Witness::Point(p) => return Witness::Point(p),
            Witness::Irrational => irrational = true,
            Witness::Empty => {}
        }
    }
    if irrational {
        Witness::Irrational
    } else {
        Witness::Empty
    }
}

fn solve_cell(cs: &[ScalarConstraint], cell: &Interval1D) -> Witness {
    let polys: Vec<(Quadratic, bool)> = cs.iter().map(|c| (piece_at(&c.g, cell), c.strict)).collect();
    let inside = |s: &Surd| {
        let above = match &cell.lower {
            ExtRat::Finite(l) => s.cmp_rat(l) > 0,
            _ => true,
        };
        let below = match &cell.upper {
            ExtRat::Finite(u) => s.cmp_rat(u) < 0,
            _ => true,
        };
        above && below
    };
    let mut irrational = false;
    let mut starts: Vec<Option<Surd>> = vec![cell.lower.finite().map(|l| Surd::rational(l.clone()))];
    for (p, _) in &polys {
        for r in roots(p) {
            if !inside(&r) {
                continue;
            }
            if polys.iter().all(|(q, strict)| ok(signs_at(q, &r)[0], *strict)) {
                match r.as_rational() {
                    Some(x) => return point(x),
                    None => irrational = true,
                }
            }
            starts.push(Some(r));
        }
    }
    for start in starts {
        let right_ok = polys.iter().all(|(q, strict)| {
            let s = match &start {
                Some(e) => sign_right(q, e),
                None => q.sign_at_infinity(-1),
            };
            ok(s, *strict)
        });
        if !right_ok {
            continue;
        }
        let below_hi = |x: &Rat| cell.upper.finite().map_or(true, |u| x < u);
        for k in 1..=400u32 {
            let x = match &start {
                Some(e) => e.upper(k),
                None => match cell.upper.finite() {
                    Some(u) => u - &Rat::pow2(k as i32),
                    None => -Rat::pow2(k as i32),
                },
            };
            if below_hi(&x) && all_hold(cs, &x) {
                return point(x);
            }
        }
        irrational = true;
    }
    if irrational {
        Witness::Irrational
    } else {
        Witness::Empty
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn quad(a2: Rat, a1: Rat, a0: Rat, strict: bool) -> ScalarConstraint {
        ScalarConstraint { g: PQFunction::quadratic(a2, a1, a0), strict }
    }

    #[test]
    fn surd_signs() {
        // 1 - √2 < 0, 2 - √2 > 0
        assert_eq!(sign_surd(&Rat::one(), &-Rat::one(), &Rat::from_int(2)), -1);
        assert_eq!(sign_surd(&Rat::from_int(2), &-Rat::one(), &Rat::from_int(2)), 1);
        let s = Surd { a: Rat::zero(), b: Rat::one(), d: Rat::from_int(2) };
        for k in [1, 5, 20] {
            let u = s.upper(k);
            assert!(s.cmp_rat(&u) < 0);
            assert!(s.cmp_rat(&(&u - &Rat::pow2(-(k as i32)))) >= 0);
        }
    }

    #[test]
    fn irrational_touching_point() {
        // x² ≤ 2 and x ≥ √2 from -(x² - 2) ≤ 0 restricted to x > 0 → only x = √2
        let cs = vec![quad(Rat::one(), Rat::zero(), -Rat::from_int(2), false), quad(-Rat::one(), Rat::zero(), Rat::from_int(2), false)];
        let w = solve(&cs, &Interval1D::open(Rat::zero(), Rat::from_int(5)));
        assert_eq!(w, Witness::Irrational);
    }

    #[test]
    fn open_interval_between_surds() {
        // x² < 2 and x > 1 → x ∈ (1, √2)
        let cs = vec![quad(Rat::one(), Rat::zero(), -Rat::from_int(2), true), quad(Rat::zero(), -Rat::one(), Rat::one(), true)];
        match solve(&cs, &Interval1D::real()) {
            Witness::Point(p) => {
                let x = &p[0];
                assert!(*x > Rat::one() && x.square() < Rat::from_int(2));
            }
            other => panic!("{other:?}"),
        }
        // x² < 2 and x > 3/2 → empty
        let cs = vec![quad(Rat::one(), Rat::zero(), -Rat::from_int(2), true), quad(Rat::zero(), -Rat::one(), q(3, 2), true)];
        assert_eq!(solve(&cs, &Interval1D::real()), Witness::Empty);
    }

    #[test]
    fn unbounded_component() {
        // x < -100
        let cs = vec![quad(Rat::zero(), Rat::one(), Rat::from_int(100), true)];
        assert!(matches!(solve(&cs, &Interval1D::real()), Witness::Point(_)));
    }
}
