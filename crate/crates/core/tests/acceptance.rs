use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use vex::certificate::verify;
use vex::cone::{normal_cone, ConeFlavor, FGCone};
use vex::config::SearchConfig;
use vex::corpus::bundled_problem;
use vex::interval::Interval1D;
use vex::levelset::LevelSetMapping;
use vex::mapping::MappingExpr;
use vex::pq::{PQFunction, Quadratic};
use vex::preference::{
    bridge_extremal_point, empty_punctured_instances, generated_levelset_corpus, implication_harness, BridgeStatus,
};
use vex::problem::Problem;
use vex::qc::{aubin_estimate, check_qc, QCStatus, DEFAULT_AUBIN_DELTA};
use vex::rational::{ExtRat, Rat};
use vex::search::{search_certificates, search_singular, CertKindName, SearchOutcome};
use vex::set::SetExpr;
use vex::stationarity::{
    check_collection, extremal_to_stationary, stationary_to_approx, verify_witness, CheckOptions, Outcome, Property,
};
use vex::vector::Vector;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn vex(args: &[&str]) -> (i32, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_vex"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("VEX_GRID_DEPTH")
        .args(args)
        .output()
        .expect("vex runs");
    (o.status.code().unwrap_or(-1), o.stdout)
}

fn vex_json(args: &[&str]) -> (i32, Value) {
    let (code, out) = vex(args);
    (code, serde_json::from_slice(&out).unwrap_or(Value::Null))
}

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

const TRIPLES: [&str; 4] = ["f1.json", "f2.json", "f3.json", "f4.json"];

fn quartet_verdicts() -> Check {
    let (code, v) = vex_json(&["corpus", "--filter", "example-3.1"]);
    let cases = v["cases"].as_array().ok_or("no corpus report")?;
    ensure(cases.len() == 7, format!("expected 7 cases, got {}", cases.len()))?;
    let observed = |name: &str| cases.iter().find(|c| c["name"] == name).map(|c| c["observed"].as_str().unwrap_or("").to_string());
    let expect = [
        ("f1 extremal", "holds rho=inf levels=12"),
        ("f2 extremal", "holds rho="),
        ("f2 extremal with rho fixed at inf", "refuted"),
        ("f3 stationary", "holds"),
        ("f3 extremal", "refuted"),
        ("f4 approximately stationary", "holds"),
        ("f4 stationary", "refuted eps*=1/2 via t = 3rho/4"),
    ];
    for (name, prefix) in expect {
        let o = observed(name).ok_or(format!("missing case {name}"))?;
        ensure(o.starts_with(prefix), format!("{name}: {o}"))?;
    }
    ensure(!observed("f2 extremal").unwrap().starts_with("holds rho=inf"), "f2 rho is not finite")?;
    ensure(cases.iter().all(|c| c["pass"] == true) && code == 0, "a quartet case failed")?;
    Ok("all seven verdicts match, f4 refuted at eps* = 1/2 via t = 3rho/4".into())
}

fn multiplier_rule_example() -> Check {
    let (code, v) = vex_json(&["coderivative", "-p", "data/f4.json", "--x", "1/200", "--y", "-1/40000", "--y-star", "1"]);
    ensure(code == 0, "coderivative failed")?;
    ensure(v["value"] == serde_json::json!({"kind": "point", "point": ["-1/100"]}), format!("coderivative {}", v["value"]))?;
    let cert: Value = serde_json::from_str(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/f4-multiplier-cert.json")).map_err(err)?)
        .map_err(err)?;
    ensure(cert["eps"] == "1/4" && cert["kind"]["m"] == "1", "bundled certificate is not at eps = 1/4, M = 1")?;
    let (accept, _) = vex(&["verify-cert", "-p", "data/f4.json", "--cert", "data/f4-multiplier-cert.json"]);
    let (reject, _) = vex(&["verify-cert", "-p", "data/f4.json", "--cert", "data/f4-multiplier-cert.json", "--eps", "1/200"]);
    ensure(accept == 0 && reject == 10, format!("verify-cert exits {accept} and {reject}"))?;
    Ok("coderivative {-1/100}, certificate accepted at 1/4 and rejected at 1/200".into())
}

fn origin_against_singletons() -> Check {
    let (_, p) = bundled_problem("origin-and-sequence.json").map_err(err)?;
    let c = p.collection();
    let v = check_collection(&c, Property::Extremal, &cfg(), &CheckOptions::default());
    let Outcome::HoldsOnSchedule { rho, witnesses } = &v.outcome else {
        return Err(format!("not extremal: {:?}", v.outcome));
    };
    ensure(rho.as_ref() == Some(&ExtRat::PosInf), "rho is not inf")?;
    ensure(witnesses.len() == cfg().depth as usize, "missing schedule levels")?;
    for w in witnesses {
        ensure(w.rho == ExtRat::PosInf && verify_witness(&c, Property::Extremal, w).map_err(err)?, format!("level {}", w.eps))?;
    }
    Ok(format!("extremal with rho = inf at all {} levels", witnesses.len()))
}

fn o_properties_of_both_instances() -> Check {
    let (code, v) = vex_json(&["corpus", "--filter", "o-properties"]);
    let cases = v["cases"].as_array().ok_or("no corpus report")?;
    ensure(cases.len() == 2 && code == 0, "o-properties cases failed")?;
    for file in ["singleton-map.json", "strict-pareto-kill.json"] {
        let (_, r) = vex_json(&["levelset", "-p", &format!("data/{file}")]);
        let p = &r["properties"];
        for (key, want) in [("o1", "fails-with-witness"), ("o2", "fails-with-witness"), ("o4", "holds-on-grid"), ("o5", "holds-on-grid")] {
            ensure(p[key]["verdict"] == want, format!("{file} {key}: {}", p[key]["verdict"]))?;
        }
    }
    Ok("O1 and O2 fail with verified witnesses, O4 and O5 hold, on both instances".into())
}

fn implication_harness_is_clean() -> Check {
    let generated = generated_levelset_corpus();
    let translations_and_tables = generated
        .iter()
        .filter(|i| matches!(i.mapping, LevelSetMapping::ConeTranslation { .. } | LevelSetMapping::TableOnGrid { .. }))
        .count();
    ensure(translations_and_tables >= 48, format!("only {translations_and_tables} generated translations and tables"))?;
    let mut all = empty_punctured_instances();
    ensure(all.len() == 2, "two fixed instances expected")?;
    all.extend(generated);
    let rep = implication_harness(&all, &cfg()).map_err(err)?;
    ensure(rep.instances >= 50, "fewer than 50 instances")?;
    ensure(rep.violations.is_empty(), format!("violations: {:?}", rep.violations))?;
    Ok(format!("{} instances, {} implications exercised, 0 violations", rep.instances, rep.exercised))
}

fn witness_conversion() -> Check {
    let c = cfg();
    let schedule = c.schedule(None);
    let mut converted = 0;
    for file in ["origin-and-sequence.json", "f1.json", "f2.json", "f3.json", "f4.json"] {
        let (pf, p) = bundled_problem(file).map_err(err)?;
        let coll = p.collection();
        let opts = CheckOptions { templates: pf.refutation_templates.clone(), ..Default::default() };
        let ext = check_collection(&coll, Property::Extremal, &c, &opts);
        let mut stationary = None;
        if let Outcome::HoldsOnSchedule { rho: Some(rho0), .. } = &ext.outcome {
            let ws = extremal_to_stationary(&coll, rho0, &schedule, &c).map_err(err)?.ok_or(format!("{file}: extremal conversion failed"))?;
            for w in &ws {
                ensure(verify_witness(&coll, Property::Stationary, w).map_err(err)?, format!("{file}: converted stationary witness rejected"))?;
            }
            converted += ws.len();
            stationary = Some(ws);
        }
        let st = check_collection(&coll, Property::Stationary, &c, &opts);
        if let Outcome::HoldsOnSchedule { witnesses, .. } = &st.outcome {
            stationary.get_or_insert(witnesses.clone());
        }
        if let Some(ws) = stationary {
            let approx = stationary_to_approx(&coll, &ws).map_err(err)?.ok_or(format!("{file}: stationary conversion failed"))?;
            for w in &approx {
                ensure(verify_witness(&coll, Property::ApproxStationary, w).map_err(err)?, format!("{file}: converted approximate witness rejected"))?;
            }
            converted += approx.len();
        }
    }
    ensure(converted > 0, "nothing converted")?;
    Ok(format!("{converted} converted witnesses, all re-verified"))
}

fn fuzzy_certificates_on_schedule() -> Check {
    let c = cfg();
    let mut found = 0;
    for file in TRIPLES {
        let (pf, p) = bundled_problem(file).map_err(err)?;
        let opts = CheckOptions { templates: pf.refutation_templates.clone(), ..Default::default() };
        if !check_collection(&p.collection(), Property::ApproxStationary, &c, &opts).holds() {
            return Err(format!("{file}: approximate stationarity does not hold"));
        }
        let m = p.as_multi().ok_or("not a mapping problem")?;
        for k in 1..=6 {
            let eps = Rat::pow2(-k);
            let out = search_certificates(&m, &eps, CertKindName::FuzzySeparation, ConeFlavor::Frechet, &c).map_err(err)?;
            let SearchOutcome::Found { certificate } = out else {
                return Err(format!("{file}: no certificate at eps = {eps}"));
            };
            let rep = verify(&certificate, &m).map_err(err)?;
            ensure(rep.accepted && certificate.eps == eps, format!("{file}: certificate at {eps} does not verify"))?;
            found += 1;
        }
    }
    Ok(format!("{found} certificates found and re-verified"))
}

fn qc_excludes_singular_certificates() -> Check {
    let c = cfg();
    let mut audited = 0;
    let delta = Rat::new(DEFAULT_AUBIN_DELTA.0, DEFAULT_AUBIN_DELTA.1);
    for file in ["f1.json", "f2.json", "f3.json", "f4.json", "f4-pair.json", "identity-on-ray.json", "point-graph.json"] {
        let (_, p) = bundled_problem(file).map_err(err)?;
        let m = p.as_multi().ok_or("not a mapping problem")?;
        for flavor in [ConeFlavor::Frechet, ConeFlavor::Clarke] {
            let rep = check_qc(&m, flavor, &delta, &c).map_err(err)?;
            let QCStatus::HoldsWithEps { eps, .. } = &rep.status else { continue };
            for k in 0..=4 {
                let e = eps * &Rat::pow2(-k);
                if let SearchOutcome::Found { certificate } = search_singular(&m, &e, flavor, &c).map_err(err)? {
                    if verify(&certificate, &m).map_err(err)?.accepted {
                        return Err(format!("{file}: singular certificate verifies at {e} under qc with eps {eps}"));
                    }
                }
            }
            audited += 1;
        }
    }
    ensure(audited >= 6, format!("only {audited} qc instances"))?;
    Ok(format!("{audited} qc instances, no singular certificate verifies at or below the qc eps"))
}

fn aubin_audit() -> Check {
    let (_, p) = bundled_problem("f4.json").map_err(err)?;
    let Problem::Triple(t) = p else { return Err("f4 is not a triple".into()) };
    let rep = aubin_estimate(&t.f, &t.x_bar, &t.y_bar, &Rat::new(1, 4)).map_err(err)?;
    ensure(rep.tau_upper == Some(Rat::one()), format!("tau_upper = {:?}", rep.tau_upper))?;
    let points: std::collections::BTreeSet<String> = rep.audit.iter().map(|s| s.point.to_string()).collect();
    ensure(points.len() >= 50, format!("only {} audit points", points.len()))?;
    let bad = rep.audit.iter().filter(|s| !s.holds).count();
    // the audit flag must agree with the inequality recomputed here
    for s in &rep.audit {
        let holds = s.x_star.norm_l1() <= Rat::one() * s.y_star.norm_l1();
        ensure(holds == s.holds, "audit flag disagrees with the recomputed inequality")?;
    }
    ensure(bad == 0, format!("{bad} audit violations"))?;
    let (_, p) = bundled_problem("f1.json").map_err(err)?;
    let Problem::Triple(t) = p else { return Err("f1 is not a triple".into()) };
    let rep1 = aubin_estimate(&t.f, &t.x_bar, &t.y_bar, &Rat::new(1, 4)).map_err(err)?;
    ensure(rep1.tau_upper == Some(Rat::zero()) && rep1.audit_passed, "f1 tau_upper is not 0")?;
    Ok(format!("f4 tau_upper = 1 over {} samples at {} points, f1 tau_upper = 0", rep.audit.len(), points.len()))
}

/// Sampled points of the epigraph inside the open box of radius `r` around `x`.
fn epigraph_samples(f: &PQFunction, x: &Vector, r: &Rat) -> Vec<Vector> {
    let mut out = Vec::new();
    let step = r * &Rat::new(1, 16);
    for i in -15i64..=15 {
        let h = &step * &Rat::from_int(i);
        let u1 = &x[0] + &h;
        let fu = f.eval(&u1);
        // the graph point, then a coarse vertical column
        let mut column = vec![fu.clone()];
        for j in (-15i64..=15).step_by(3) {
            column.push(&x[1] + &(&step * &Rat::from_int(j)));
        }
        for u2 in column {
            let u = Vector(vec![u1.clone(), u2.clone()]);
            if u2 >= fu && u.sub(x).norm_inf() < *r && u != *x {
                out.push(u);
            }
        }
    }
    out
}

/// Largest `v·(u−x) − thr·‖u−x‖∞` over the samples is positive.
fn sampled_violation(v: &Vector, x: &Vector, samples: &[Vector], thr: &Rat) -> bool {
    samples.iter().any(|u| {
        let d = u.sub(x);
        v.dot(&d) > thr * &d.norm_inf()
    })
}

fn random_pq(rng: &mut ChaCha8Rng) -> PQFunction {
    let nb = rng.gen_range(1..=3);
    let mut bps: Vec<i64> = (0..nb).map(|_| rng.gen_range(-3..=3)).collect();
    bps.sort();
    bps.dedup();
    let bps: Vec<Rat> = bps.into_iter().map(Rat::from_int).collect();
    let q = |rng: &mut ChaCha8Rng| (Rat::from_int(rng.gen_range(-2..=2)), Rat::from_int(rng.gen_range(-3..=3)));
    let (a2, a1) = q(rng);
    let mut pieces = vec![Quadratic(a2, a1, Rat::from_int(rng.gen_range(-3..=3)))];
    for b in &bps {
        let v = pieces.last().unwrap().eval(b);
        let (a2, a1) = q(rng);
        let a0 = &v - &(&(&a2 * &b.square()) + &(&a1 * b));
        pieces.push(Quadratic(a2, a1, a0));
    }
    PQFunction::new(bps, pieces).expect("continuous")
}

fn cone_members(cone: &FGCone) -> Vec<Vector> {
    cone.generators.iter().chain(&cone.lineality).cloned().chain(cone.lineality.iter().map(Vector::neg)).collect()
}

fn frechet_cone_matches_sampler() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let covectors: Vec<Vector> = (-2i64..=2).flat_map(|a| (-2i64..=2).map(move |b| Vector::from_ints(&[a, b]))).filter(|v| !v.is_zero()).collect();
    let (mut points, mut kinks, mut compared, mut coarse_only) = (0, 0, 0, 0);
    while points < 100 || kinks < 20 {
        let f = random_pq(&mut rng);
        let bps = f.breakpoints().to_vec();
        let want_kink = kinks < 20 && !bps.is_empty();
        let x1 = if want_kink { bps[rng.gen_range(0..bps.len())].clone() } else { Rat::new(rng.gen_range(-24..=24), 8) };
        let above = !want_kink && rng.gen_bool(0.2);
        let x2 = &f.eval(&x1) + &if above { Rat::new(1, 2) } else { Rat::zero() };
        let x = Vector(vec![x1.clone(), x2]);
        let epi = SetExpr::Epigraph { f: f.clone() };
        let cone = normal_cone(&epi, &x, ConeFlavor::Frechet).map_err(err)?;
        // The sup over B_r is monotone in r, so the limsup is read off the tail
        // 2^-8..2^-10; coarser radii may cross other breakpoints and are only counted.
        // Members lose at most |v2|·|a2|·r to curvature; violators keep a margin of at least 1/16.
        let samples: Vec<(Rat, Vec<Vector>)> = (1..=10).map(|k| (Rat::pow2(-k), epigraph_samples(&f, &x, &Rat::pow2(-k)))).collect();
        let violated_at = |v: &Vector, factor: i64, i: usize| {
            let (r, pts) = &samples[i];
            sampled_violation(v, &x, pts, &(&(r * &Rat::from_int(factor)) * &v.norm_l1()))
        };
        let tail = |v: &Vector, factor: i64| (7..10).all(|i| violated_at(v, factor, i));
        for g in cone_members(&cone) {
            if tail(&g, 2) {
                return Err(format!("generator {g} rejected at {x}"));
            }
            coarse_only += (0..7).filter(|&i| violated_at(&g, 2, i)).count();
        }
        for v in &covectors {
            let violator = tail(v, 8);
            if violator && cone.contains(v) {
                return Err(format!("sampled violator {v} admitted at {x}"));
            }
            if !violator && !cone.contains(v) {
                return Err(format!("covector {v} passes the sampler but is outside the cone at {x}"));
            }
            compared += 1;
        }
        points += 1;
        if f.is_kink(&x1) && !above {
            kinks += 1;
        }
    }
    Ok(format!("{points} points, {kinks} kinks, {compared} covector comparisons, {coarse_only} coarse-radius-only violations by generators"))
}

/// 1-D minimization instances: `F(x) = [φ(x), ∞)` with the lower-ray preference at `φ(x̄)`.
fn bridge_instances() -> Vec<(String, MappingExpr, SetExpr, Vector, Vector)> {
    let q = |a: i64, b: i64, c: i64| Quadratic(Rat::from_int(a), Rat::from_int(b), Rat::from_int(c));
    let pq = |bps: Vec<i64>, ps: Vec<Quadratic>| PQFunction::new(bps.into_iter().map(Rat::from_int).collect(), ps).unwrap();
    let phis = [
        ("constant", PQFunction::constant(Rat::zero())),
        ("square", pq(vec![], vec![q(1, 0, 0)])),
        ("abs", pq(vec![0], vec![q(0, -1, 0), q(0, 1, 0)])),
        ("linear", pq(vec![], vec![q(0, 1, 0)])),
        ("concave", pq(vec![], vec![q(-1, 0, 0)])),
        ("mixed kink", pq(vec![0], vec![q(0, 1, 0), q(-1, 0, 0)])),
        ("shifted square", pq(vec![], vec![q(1, -2, 1)])),
        ("flat then rising", pq(vec![0], vec![q(0, 0, 0), q(1, 0, 0)])),
        ("steep vee", pq(vec![0], vec![q(0, -3, 0), q(0, 2, 0)])),
        ("descending", pq(vec![], vec![q(0, -1, 0)])),
    ];
    let whole = SetExpr::whole(1);
    let ray = SetExpr::interval(Interval1D::upper_ray(Rat::zero()));
    let mut out = Vec::new();
    for (name, phi) in phis {
        let x_bar = if name == "shifted square" { Rat::one() } else { Rat::zero() };
        for (oname, omega) in [("line", &whole), ("right ray", &ray)] {
            let y = phi.eval(&x_bar);
            let f = MappingExpr::Epigraphical { phi: phi.clone() };
            out.push((format!("{name} on the {oname}"), f, omega.clone(), Vector(vec![x_bar.clone()]), Vector(vec![y])));
        }
    }
    out
}

fn bridge_consistency() -> Check {
    let c = cfg();
    let instances = bridge_instances();
    ensure(instances.len() >= 20, "fewer than 20 bridge instances")?;
    let (mut asserted, mut vacuous) = (0, 0);
    for (name, f, omega, x, y) in &instances {
        let k = SetExpr::interval(Interval1D::lower_ray(y[0].clone()));
        let l = LevelSetMapping::ConeTranslation { k, y_bar: y.clone() };
        let rep = bridge_extremal_point(f, omega, &l, x, y, &Rat::one(), &c).map_err(err)?;
        ensure(rep.o1.holds() && rep.o5.holds(), format!("{name}: O1/O5 not certified"))?;
        match rep.status {
            BridgeStatus::Violated => return Err(format!("{name}: extremal point holds but the triple is refuted")),
            BridgeStatus::Asserted => asserted += 1,
            BridgeStatus::Vacuous => vacuous += 1,
            other => return Err(format!("{name}: {other:?}")),
        }
    }
    Ok(format!("{} instances: {asserted} asserted, {vacuous} without an extremal point, 0 violations", instances.len()))
}

fn corpus_is_deterministic() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut trees = Vec::new();
    for run in ["first", "second"] {
        let out = dir.path().join(run);
        let o = out.to_str().unwrap().to_string();
        let (code, stdout) = vex(&["corpus", "--out", &o, "--manifest", &format!("{o}/manifest.json")]);
        ensure(code == 0, format!("{run} corpus run exited {code}"))?;
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .map_err(err)?
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files.push(("<stdout>".into(), stdout));
        trees.push(files);
    }
    ensure(trees[0] == trees[1], "corpus outputs differ between runs")?;
    Ok(format!("{} files byte-identical across two runs", trees[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("f1-f4 quartet verdicts", quartet_verdicts),
        ("coderivative and multiplier certificate for f4", multiplier_rule_example),
        ("origin against shrinking singletons", origin_against_singletons),
        ("level-set properties of the two punctured instances", o_properties_of_both_instances),
        ("implication harness on at least 50 level-set instances", implication_harness_is_clean),
        ("witness conversion along the implication chain", witness_conversion),
        ("fuzzy-separation certificates at eps = 2^-1..2^-6", fuzzy_certificates_on_schedule),
        ("qc excludes singular certificates", qc_excludes_singular_certificates),
        ("Aubin modulus and normal-cone audit", aubin_audit),
        ("Frechet cones against the limsup sampler", frechet_cone_matches_sampler),
        ("extremal-point bridge on 20 instances", bridge_consistency),
        ("corpus determinism", corpus_is_deterministic),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(e) => {
                println!("criterion {:>2} FAIL {name}: {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
