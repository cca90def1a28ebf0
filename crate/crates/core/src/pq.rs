//! Continuous piecewise-quadratic functions of one variable.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::interval::Interval1D;
use crate::rational::{ExtRat, Rat};

/// `a2·x² + a1·x + a0`
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadratic(pub Rat, pub Rat, pub Rat);

impl Quadratic {
    pub fn eval(&self, x: &Rat) -> Rat {
        &(&(&self.0 * x) + &self.1) * x + &self.2
    }

    pub fn slope(&self, x: &Rat) -> Rat {
        &(&Rat::from_int(2) * &self.0) * x + &self.1
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_zero() && self.1.is_zero()
    }

    /// Sign of the polynomial as `x → +inf` (`dir = 1`) or `x → -inf` (`dir = -1`).
    pub fn sign_at_infinity(&self, dir: i32) -> i32 {
        if !self.0.is_zero() {
            self.0.signum()
        } else if !self.1.is_zero() {
            self.1.signum() * dir
        } else {
            self.2.signum()
        }
    }

    fn sub(&self, other: &Quadratic) -> Quadratic {
        Quadratic(&self.0 - &other.0, &self.1 - &other.1, &self.2 - &other.2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PQFunction {
    breakpoints: Vec<Rat>,
    pieces: Vec<Quadratic>,
}

#[derive(Deserialize)]
struct RawPQ {
    #[serde(default)]
    breakpoints: Vec<Rat>,
    pieces: Vec<Quadratic>,
}

impl<'de> Deserialize<'de> for PQFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPQ::deserialize(d)?;
        PQFunction::new(raw.breakpoints, raw.pieces).map_err(serde::de::Error::custom)
    }
}

impl PQFunction {
    pub fn new(breakpoints: Vec<Rat>, pieces: Vec<Quadratic>) -> Result<PQFunction> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(CoreError::Malformed(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::Malformed("breakpoints must be strictly increasing".into()));
        }
        for (i, b) in breakpoints.iter().enumerate() {
            if pieces[i].eval(b) != pieces[i + 1].eval(b) {
                return Err(CoreError::Malformed(format!("discontinuity at breakpoint {b}")));
            }
        }
        Ok(PQFunction { breakpoints, pieces })
    }

    pub fn quadratic(a2: Rat, a1: Rat, a0: Rat) -> PQFunction {
        PQFunction { breakpoints: Vec::new(), pieces: vec![Quadratic(a2, a1, a0)] }
    }

    pub fn constant(c: Rat) -> PQFunction {
        PQFunction::quadratic(Rat::zero(), Rat::zero(), c)
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Quadratic] {
        &self.pieces
    }

    /// Closed domain of piece `i` as an interval.
    pub fn piece_domain(&self, i: usize) -> Interval1D {
        let lower = if i == 0 { ExtRat::NegInf } else { ExtRat::Finite(self.breakpoints[i - 1].clone()) };
        let upper = if i == self.breakpoints.len() {
            ExtRat::PosInf
        } else {
            ExtRat::Finite(self.breakpoints[i].clone())
        };
        Interval1D::new(lower, true, upper, true)
    }

    fn piece_index(&self, x: &Rat) -> usize {
        self.breakpoints.iter().take_while(|b| *b <= x).count()
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// One-sided derivatives `(s⁻, s⁺)` at `x`.
    pub fn slopes(&self, x: &Rat) -> (Rat, Rat) {
        let right = self.piece_index(x);
        let left = if self.breakpoints.contains(x) { right - 1 } else { right };
        (self.pieces[left].slope(x), self.pieces[right].slope(x))
    }

    pub fn is_kink(&self, x: &Rat) -> bool {
        let (l, r) = self.slopes(x);
        l != r
    }

    /// `x ↦ f(x - dx) + dy`
    pub fn translate(&self, dx: &Rat, dy: &Rat) -> PQFunction {
        let pieces = self
            .pieces
            .iter()
            .map(|Quadratic(a2, a1, a0)| {
                let b1 = a1 - &(&(&Rat::from_int(2) * a2) * dx);
                let b0 = &(&(a2 * &dx.square()) - &(a1 * dx)) + &(a0 + dy);
                Quadratic(a2.clone(), b1, b0)
            })
            .collect();
        PQFunction { breakpoints: self.breakpoints.iter().map(|b| b + dx).collect(), pieces }
    }

    /// `x ↦ f(x) - (m·x + c)`
    pub fn minus_affine(&self, m: &Rat, c: &Rat) -> PQFunction {
        let aff = Quadratic(Rat::zero(), m.clone(), c.clone());
        PQFunction {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.sub(&aff)).collect(),
        }
    }

    /// `x ↦ λ·f(x)`
    pub fn scale(&self, lambda: &Rat) -> PQFunction {
        PQFunction {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|Quadratic(a, b, c)| Quadratic(a * lambda, b * lambda, c * lambda)).collect(),
        }
    }

    /// Largest `|f'|` over a closed bounded interval.
    pub fn max_abs_slope(&self, a: &Rat, b: &Rat) -> Rat {
        let window = Interval1D::closed(a.clone(), b.clone());
        let mut best = Rat::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            let dom = self.piece_domain(i).intersect(&window);
            if dom.is_empty() {
                continue;
            }
            // slope is affine, so extremes sit at the ends of the piece window
            for end in [&dom.lower, &dom.upper] {
                if let ExtRat::Finite(x) = end {
                    best = best.max(p.slope(x).abs());
                }
            }
        }
        best
    }
}

/// Exact infimum of `f` over a nonempty window, with whether it is attained.
pub fn pq_inf(f: &PQFunction, window: &Interval1D) -> Result<(ExtRat, bool)> {
    if window.is_empty() {
        return Err(CoreError::EmptyWindow);
    }
    if window.is_point() {
        let x = window.lower.finite().expect("finite point").clone();
        return Ok((ExtRat::Finite(f.eval(&x)), true));
    }
    let mut cands: Vec<(ExtRat, bool)> = Vec::new();
    for (end, closed, dir) in [(&window.lower, window.lower_closed, -1), (&window.upper, window.upper_closed, 1)] {
        match end {
            ExtRat::Finite(x) => cands.push((ExtRat::Finite(f.eval(x)), closed)),
            _ => {
                let p = if dir < 0 { &f.pieces[0] } else { f.pieces.last().unwrap() };
                if p.0.is_negative() || (p.0.is_zero() && p.1.signum() * dir < 0) {
                    cands.push((ExtRat::NegInf, false));
                }
            }
        }
    }
    for b in &f.breakpoints {
        if window.contains(b) {
            cands.push((ExtRat::Finite(f.eval(b)), true));
        }
    }
    for (i, p) in f.pieces.iter().enumerate() {
        let dom = f.piece_domain(i).intersect(window);
        if dom.is_empty() || dom.is_point() {
            continue;
        }
        if p.is_constant() {
            cands.push((ExtRat::Finite(p.2.clone()), true));
        } else if !p.0.is_zero() {
            let c = -&p.1 / &(&Rat::from_int(2) * &p.0);
            if dom.contains(&c) {
                cands.push((ExtRat::Finite(p.eval(&c)), true));
            }
        }
    }
    let value = cands.iter().map(|c| c.0.clone()).min().expect("window has candidates");
    let attained = cands.iter().any(|(v, a)| *a && *v == value);
    Ok((value, attained))
}
