use proptest::prelude::*;

use vex::cone::{normal_cone, ConeFlavor, FGCone};
use vex::interval::Interval1D;
use vex::lp::{feasible_point, Relation, Row};
use vex::polyhedron::HPolyhedron;
use vex::pq::{pq_inf, PQFunction, Quadratic};
use vex::rational::{ExtRat, Rat};
use vex::set::SetExpr;
use vex::vector::Vector;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn ints(xs: &[i64]) -> Vector {
    Vector::from_ints(xs)
}

/// Integer rows `a·x (<=|<) b`.
#[derive(Clone, Debug)]
struct IntRow {
    a: Vec<i64>,
    b: i64,
    strict: bool,
}

fn int_rows(dim: usize) -> impl Strategy<Value = Vec<IntRow>> {
    prop::collection::vec(
        (prop::collection::vec(-3i64..=3, dim), -4i64..=4, any::<bool>()).prop_map(|(a, b, strict)| IntRow { a, b, strict }),
        1..=4,
    )
}

fn to_rows(rs: &[IntRow]) -> Vec<Row> {
    rs.iter()
        .map(|r| Row::new(ints(&r.a), if r.strict { Relation::Lt } else { Relation::Le }, Rat::from_int(r.b)))
        .collect()
}

/// Grid scan with step 1/64 over `[-4, 4]^dim` in integer arithmetic.
fn grid_finds_point(dim: usize, rs: &[IntRow]) -> bool {
    let holds = |p: &[i64]| {
        rs.iter().all(|r| {
            let lhs: i64 = r.a.iter().zip(p).map(|(a, x)| a * x).sum();
            if r.strict { lhs < 64 * r.b } else { lhs <= 64 * r.b }
        })
    };
    let range = -256i64..=256;
    match dim {
        1 => range.clone().any(|i| holds(&[i])),
        _ => range.clone().any(|i| range.clone().any(|j| holds(&[i, j]))),
    }
}

proptest! {
    #![proptest_config(cfg(100))]

    #[test]
    fn lp_agrees_with_grid_in_1d(rs in int_rows(1)) {
        let lp = feasible_point(1, &to_rows(&rs));
        if grid_finds_point(1, &rs) {
            prop_assert!(lp.is_some());
        }
        if let Some(x) = lp {
            prop_assert!(to_rows(&rs).iter().all(|r| r.holds(&x)));
        }
    }

    #[test]
    fn lp_agrees_with_grid_in_2d(rs in int_rows(2)) {
        let lp = feasible_point(2, &to_rows(&rs));
        if grid_finds_point(2, &rs) {
            prop_assert!(lp.is_some());
        }
        if let Some(x) = lp {
            prop_assert!(to_rows(&rs).iter().all(|r| r.holds(&x)));
        }
    }

    #[test]
    fn zero_distance_means_closure_membership(rs in int_rows(2), p in prop::collection::vec(-8i64..=8, 2)) {
        let s = HPolyhedron::new(2, to_rows(&rs)).unwrap();
        let x = Vector(p.iter().map(|&c| Rat::new(c, 2)).collect());
        let d = s.distance(&x).unwrap();
        let closure = s.closure();
        if feasible_point(2, &closure.rows).is_some() {
            prop_assert_eq!(d == ExtRat::Finite(Rat::zero()), closure.contains(&x));
            // shrinking boxes around x meet cl S at every radius iff the distance is zero
            for k in [1, 4, 10] {
                let mut rows = closure.rows.clone();
                rows.extend(HPolyhedron::ball(&x, &Rat::pow2(-k), false).rows);
                let meets = feasible_point(2, &rows).is_some();
                prop_assert_eq!(meets, d <= ExtRat::Finite(Rat::pow2(-k)));
            }
        } else {
            prop_assert_eq!(d, ExtRat::PosInf);
        }
    }

    #[test]
    fn distance_is_positively_homogeneous(
        rs in int_rows(2),
        p in prop::collection::vec(-8i64..=8, 2),
        (ln, ld) in (1i64..=7, 1i64..=5),
    ) {
        let lambda = Rat::new(ln, ld);
        let s = HPolyhedron::new(2, to_rows(&rs)).unwrap();
        let scaled = HPolyhedron::new(2, s.rows.iter().map(|r| Row::new(r.normal.clone(), r.relation, &r.rhs * &lambda)).collect()).unwrap();
        let x = ints(&p);
        let d = s.distance(&x).unwrap();
        let ds = scaled.distance(&x.scale(&lambda)).unwrap();
        let expected = match d {
            ExtRat::Finite(v) => ExtRat::Finite(&v * &lambda),
            other => other,
        };
        prop_assert_eq!(ds, expected);
    }
}

fn quadratic() -> impl Strategy<Value = (i64, i64)> {
    (-2i64..=2, -3i64..=3)
}

/// Continuous piecewise quadratic with integer breakpoints.
fn continuous_pq() -> impl Strategy<Value = PQFunction> {
    (prop::collection::btree_set(-3i64..=3, 0..=3), prop::collection::vec(quadratic(), 4), -3i64..=3).prop_map(|(bps, qs, c0)| {
        let bps: Vec<Rat> = bps.into_iter().map(Rat::from_int).collect();
        let mut pieces = vec![Quadratic(Rat::from_int(qs[0].0), Rat::from_int(qs[0].1), Rat::from_int(c0))];
        for (i, b) in bps.iter().enumerate() {
            let prev = pieces.last().unwrap();
            let v = prev.eval(b);
            let (a2, a1) = (Rat::from_int(qs[i + 1].0), Rat::from_int(qs[i + 1].1));
            let a0 = &v - &(&(&a2 * &b.square()) + &(&a1 * b));
            pieces.push(Quadratic(a2, a1, a0));
        }
        PQFunction::new(bps, pieces).unwrap()
    })
}

fn window() -> impl Strategy<Value = Interval1D> {
    (-6i64..=6, 1i64..=8, any::<bool>(), any::<bool>()).prop_map(|(a, w, lc, uc)| {
        Interval1D::new(ExtRat::Finite(Rat::new(a, 2)), lc, ExtRat::Finite(Rat::new(a + w, 2)), uc)
    })
}

fn min_ext(a: ExtRat, b: ExtRat) -> ExtRat {
    if a <= b { a } else { b }
}

proptest! {
    #![proptest_config(cfg(200))]

    #[test]
    fn pq_inf_respects_partitions(f in continuous_pq(), w in window(), cuts in prop::collection::btree_set(1i64..=15, 0..=3)) {
        let (whole, _) = pq_inf(&f, &w).unwrap();
        let (lo, hi) = (w.lower.finite().unwrap().clone(), w.upper.finite().unwrap().clone());
        let width = &hi - &lo;
        let mut points: Vec<Rat> = cuts.into_iter().map(|c| &lo + &(&width * &Rat::new(c, 16))).collect();
        points.dedup();
        // pieces [lo, c1), [c1, c2), …, [ck, hi] with the original end closures
        let mut best = ExtRat::PosInf;
        let mut left = (lo.clone(), w.lower_closed);
        for c in points.iter().chain(std::iter::once(&hi)) {
            let last = c == &hi;
            let part = Interval1D::new(ExtRat::Finite(left.0.clone()), left.1, ExtRat::Finite(c.clone()), if last { w.upper_closed } else { false });
            if !part.is_empty() {
                best = min_ext(best, pq_inf(&f, &part).unwrap().0);
            }
            left = (c.clone(), true);
        }
        prop_assert_eq!(whole, best);
    }
}

fn cone_gens(dim: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, dim), 1..=4)
}

fn random_cone(dim: usize, gens: &[Vec<i64>]) -> FGCone {
    FGCone::generated(dim, gens.iter().map(|g| ints(g)).collect())
}

proptest! {
    #![proptest_config(cfg(100))]

    #[test]
    fn polar_is_an_involution_in_2d(g in cone_gens(2)) {
        let c = random_cone(2, &g);
        let pp = c.polar().polar();
        prop_assert!(c.generators.iter().all(|v| pp.contains(v)));
        prop_assert!(pp.generators.iter().all(|v| c.contains(v)));
        prop_assert!(pp.lineality.iter().all(|v| c.contains(v) && c.contains(&v.neg())));
    }

    #[test]
    fn polar_is_an_involution_in_3d(g in cone_gens(3)) {
        let c = random_cone(3, &g);
        let pp = c.polar().polar();
        prop_assert!(c.generators.iter().all(|v| pp.contains(v)));
        prop_assert!(pp.generators.iter().all(|v| c.contains(v)));
        prop_assert!(pp.lineality.iter().all(|v| c.contains(v) && c.contains(&v.neg())));
    }

    #[test]
    fn frechet_normals_are_clarke_normals(f in continuous_pq(), pick in 0usize..8, up in 0i64..=2) {
        let bps = f.breakpoints();
        let x = if bps.is_empty() { Rat::new(pick as i64 - 4, 3) } else { bps[pick % bps.len()].clone() };
        let pt = Vector(vec![x.clone(), &f.eval(&x) + &Rat::from_int(up)]);
        let epi = SetExpr::Epigraph { f: f.clone() };
        let fr = normal_cone(&epi, &pt, ConeFlavor::Frechet).unwrap();
        let cl = normal_cone(&epi, &pt, ConeFlavor::Clarke).unwrap();
        prop_assert!(fr.is_subset_of(&cl));
    }

    #[test]
    fn flavors_agree_on_polyhedra(rs in int_rows(2), p in prop::collection::vec(-4i64..=4, 2)) {
        let closed: Vec<Row> = to_rows(&rs).into_iter().map(|r| r.closed()).collect();
        let s = SetExpr::Polyhedron(HPolyhedron::new(2, closed).unwrap());
        // move onto the set by taking the LP point when the sample is outside
        let x = if s.contains(&ints(&p)) { ints(&p) } else {
            match s.as_polyhedron().and_then(|h| feasible_point(2, &h.rows)) { Some(x) => x, None => return Ok(()) }
        };
        let f = normal_cone(&s, &x, ConeFlavor::Frechet).unwrap();
        let c = normal_cone(&s, &x, ConeFlavor::Clarke).unwrap();
        let v = normal_cone(&s, &x, ConeFlavor::Convex).unwrap();
        prop_assert!(f.same_as(&c) && c.same_as(&v));
    }

    #[test]
    fn normal_cones_are_scale_invariant(rs in int_rows(2), p in prop::collection::vec(-4i64..=4, 2), (ln, ld) in (1i64..=7, 1i64..=5)) {
        let lambda = Rat::new(ln, ld);
        let closed: Vec<Row> = to_rows(&rs).into_iter().map(|r| r.closed()).collect();
        let h = HPolyhedron::new(2, closed).unwrap();
        let x = if h.contains(&ints(&p)) { ints(&p) } else {
            match feasible_point(2, &h.rows) { Some(x) => x, None => return Ok(()) }
        };
        let scaled = HPolyhedron::new(2, h.rows.iter().map(|r| Row::new(r.normal.clone(), r.relation, &r.rhs * &lambda)).collect()).unwrap();
        for fl in [ConeFlavor::Frechet, ConeFlavor::Clarke] {
            let a = normal_cone(&SetExpr::Polyhedron(h.clone()), &x, fl).unwrap();
            let b = normal_cone(&SetExpr::Polyhedron(scaled.clone()), &x.scale(&lambda), fl).unwrap();
            prop_assert!(a.same_as(&b));
        }
    }
}
