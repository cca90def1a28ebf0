//! Bundled example problems and the regression corpus over them.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::certificate::{verify, DualCertificate};
use crate::cone::{coderivative, ConeFlavor, CoderivativeResult};
use crate::config::SearchConfig;
use crate::error::{CoreError, Result};
use crate::levelset::LevelSetMapping;
use crate::preference::{
    check_o_properties, empty_punctured_instances, generated_levelset_corpus, implication_harness, verify_failure,
};
use crate::problem::{Problem, ProblemFile};
use crate::qc::{aubin_estimate, AUDIT_POINTS};
use crate::rational::{ExtRat, Rat};
use crate::stationarity::{check_collection, CheckOptions, CheckVerdict, Outcome, Property};
use crate::vector::Vector;

pub const BUNDLED: &[(&str, &str)] = &[
    ("f1.json", include_str!("../data/f1.json")),
    ("f2.json", include_str!("../data/f2.json")),
    ("f3.json", include_str!("../data/f3.json")),
    ("f4.json", include_str!("../data/f4.json")),
    ("f4-pair.json", include_str!("../data/f4-pair.json")),
    ("f4-multiplier-cert.json", include_str!("../data/f4-multiplier-cert.json")),
    ("f4-fuzzy-cert.json", include_str!("../data/f4-fuzzy-cert.json")),
    ("origin-and-sequence.json", include_str!("../data/origin-and-sequence.json")),
    ("point-graph.json", include_str!("../data/point-graph.json")),
    ("identity-on-ray.json", include_str!("../data/identity-on-ray.json")),
    ("singleton-map.json", include_str!("../data/singleton-map.json")),
    ("strict-pareto-kill.json", include_str!("../data/strict-pareto-kill.json")),
    ("lower-ray-translation.json", include_str!("../data/lower-ray-translation.json")),
];

pub fn bundled(name: &str) -> Result<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| CoreError::Io(format!("no bundled file {name}")))
}

pub fn bundled_problem(name: &str) -> Result<(ProblemFile, Problem)> {
    let pf = ProblemFile::from_json(bundled(name)?)?;
    let p = pf.build()?;
    Ok((pf, p))
}

pub fn bundled_certificate(name: &str) -> Result<DualCertificate> {
    serde_json::from_str(bundled(name)?).map_err(|e| CoreError::Parse(e.to_string()))
}

pub fn bundled_levelset(name: &str) -> Result<LevelSetMapping> {
    serde_json::from_str(bundled(name)?).map_err(|e| CoreError::Parse(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub tag: String,
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    /// Full evidence, written as a separate artifact.
    #[serde(skip)]
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub passed: usize,
    pub failed: usize,
    pub cases: Vec<CaseResult>,
}

impl CorpusReport {
    pub fn first_failure(&self) -> Option<&CaseResult> {
        self.cases.iter().find(|c| !c.pass)
    }
}

/// Short canonical description of a verdict.
pub fn summarize(v: &CheckVerdict) -> String {
    match &v.outcome {
        Outcome::HoldsOnSchedule { rho: Some(r), witnesses } => format!("holds rho={r} levels={}", witnesses.len()),
        Outcome::HoldsOnSchedule { rho: None, witnesses } => format!("holds levels={}", witnesses.len()),
        Outcome::RefutedOnGrid { eps_star, template, .. } => format!("refuted eps*={eps_star} via {template}"),
        Outcome::Inconclusive { .. } => "inconclusive".into(),
    }
}

struct Runner<'a> {
    cfg: &'a SearchConfig,
    filter: Option<&'a str>,
    cases: Vec<CaseResult>,
}

impl Runner<'_> {
    fn case(&mut self, tag: &str, name: &str, expected: &str, run: impl FnOnce() -> Result<(String, bool, Value)>) {
        if self.filter.is_some_and(|f| f != tag) {
            return;
        }
        let (observed, pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (format!("error: {e}"), false, Value::Null),
        };
        self.cases.push(CaseResult { tag: tag.into(), name: name.into(), expected: expected.into(), observed, pass, detail });
    }
}

fn options(pf: &ProblemFile) -> CheckOptions {
    CheckOptions { templates: pf.refutation_templates.clone(), ..Default::default() }
}

fn check(name: &str, property: Property, cfg: &SearchConfig, fixed_rho: Option<ExtRat>) -> Result<CheckVerdict> {
    let (pf, p) = bundled_problem(name)?;
    let opts = CheckOptions { fixed_rho, ..options(&pf) };
    Ok(check_collection(&p.collection(), property, cfg, &opts))
}

fn verdict_case(v: CheckVerdict, pass: impl Fn(&CheckVerdict) -> bool) -> Result<(String, bool, Value)> {
    let ok = pass(&v);
    Ok((summarize(&v), ok, serde_json::to_value(&v).expect("serializable")))
}

fn levels(v: &CheckVerdict, cfg: &SearchConfig) -> bool {
    matches!(&v.outcome, Outcome::HoldsOnSchedule { witnesses, .. } if witnesses.len() == cfg.depth as usize)
}

/// Runs every bundled case whose tag matches `filter` (all when `None`).
pub fn run_corpus(cfg: &SearchConfig, filter: Option<&str>) -> CorpusReport {
    let mut r = Runner { cfg, filter, cases: Vec::new() };
    let cfg = r.cfg;

    r.case("example-1.1", "origin against shrinking singletons: extremal", "holds rho=inf at every level", || {
        let v = check("origin-and-sequence.json", Property::Extremal, cfg, None)?;
        verdict_case(v, |v| levels(v, cfg) && matches!(&v.outcome, Outcome::HoldsOnSchedule { rho: Some(ExtRat::PosInf), .. }))
    });

    r.case("example-3.1", "f1 extremal", "holds rho=inf", || {
        let v = check("f1.json", Property::Extremal, cfg, None)?;
        verdict_case(v, |v| levels(v, cfg) && matches!(&v.outcome, Outcome::HoldsOnSchedule { rho: Some(ExtRat::PosInf), .. }))
    });
    r.case("example-3.1", "f2 extremal", "holds at a finite rho", || {
        let v = check("f2.json", Property::Extremal, cfg, None)?;
        verdict_case(v, |v| levels(v, cfg) && matches!(&v.outcome, Outcome::HoldsOnSchedule { rho: Some(ExtRat::Finite(_)), .. }))
    });
    r.case("example-3.1", "f2 extremal with rho fixed at inf", "refuted", || {
        let v = check("f2.json", Property::Extremal, cfg, Some(ExtRat::PosInf))?;
        verdict_case(v, CheckVerdict::refuted)
    });
    r.case("example-3.1", "f3 stationary", "holds", || {
        let v = check("f3.json", Property::Stationary, cfg, None)?;
        verdict_case(v, |v| levels(v, cfg))
    });
    r.case("example-3.1", "f3 extremal", "refuted", || {
        let v = check("f3.json", Property::Extremal, cfg, None)?;
        verdict_case(v, CheckVerdict::refuted)
    });
    r.case("example-3.1", "f4 approximately stationary", "holds", || {
        let v = check("f4.json", Property::ApproxStationary, cfg, None)?;
        verdict_case(v, |v| levels(v, cfg))
    });
    r.case("example-3.1", "f4 stationary", "refuted eps*=1/2 via t = 3rho/4", || {
        let v = check("f4.json", Property::Stationary, cfg, None)?;
        verdict_case(v, |v| {
            matches!(&v.outcome, Outcome::RefutedOnGrid { eps_star, template, .. }
                if *eps_star == Rat::new(1, 2) && template == "t = 3rho/4")
        })
    });

    r.case("example-3.3", "f4 coderivative at (1/200, -1/40000) applied to 1", "{-1/100}", || {
        let (_, p) = bundled_problem("f4.json")?;
        let Problem::Triple(t) = p else { unreachable!() };
        let d = coderivative(&t.f, &Vector(vec![Rat::new(1, 200)]), &Vector(vec![Rat::new(-1, 40000)]), &Vector(vec![Rat::one()]), ConeFlavor::Frechet)?;
        let ok = d.result == CoderivativeResult::Point { point: Vector(vec![Rat::new(-1, 100)]) };
        let observed = match &d.result {
            CoderivativeResult::Point { point } => format!("{{{}}}", point[0]),
            other => format!("{other:?}"),
        };
        Ok((observed, ok, serde_json::to_value(&d.result).expect("serializable")))
    });
    for (eps, accept) in [(Rat::new(1, 4), true), (Rat::new(1, 200), false)] {
        let expected = if accept { "accepted" } else { "rejected" };
        r.case("example-3.3", &format!("f4 multiplier certificate at eps = {eps}"), expected, || {
            let (_, p) = bundled_problem("f4.json")?;
            let mut cert = bundled_certificate("f4-multiplier-cert.json")?;
            cert.eps = eps.clone();
            let rep = verify(&cert, &p.as_multi().expect("mapping problem"))?;
            let observed = if rep.accepted { "accepted".to_string() } else { format!("rejected: {}", rep.first_failure.clone().unwrap_or_default()) };
            Ok((observed, rep.accepted == accept, serde_json::to_value(&rep).expect("serializable")))
        });
    }
    for (eps, accept) in [(Rat::new(1, 4), true), (Rat::new(1, 300), false)] {
        let expected = if accept { "accepted" } else { "rejected" };
        r.case("example-3.3", &format!("f4 fuzzy separation certificate at eps = {eps}"), expected, || {
            let (_, p) = bundled_problem("f4.json")?;
            let mut cert = bundled_certificate("f4-fuzzy-cert.json")?;
            cert.eps = eps.clone();
            let rep = verify(&cert, &p.as_multi().expect("mapping problem"))?;
            let observed = if rep.accepted { "accepted".to_string() } else { format!("rejected: {}", rep.first_failure.clone().unwrap_or_default()) };
            Ok((observed, rep.accepted == accept, serde_json::to_value(&rep).expect("serializable")))
        });
    }

    for (file, y) in [("singleton-map.json", Vector::zeros(1)), ("strict-pareto-kill.json", Vector::zeros(2))] {
        r.case("o-properties", &format!("{file} properties"), "O1 fails, O2 fails, O4 holds, O5 holds", || {
            let l = bundled_levelset(file)?;
            let rep = check_o_properties(&l, &y, cfg)?;
            let verified = verify_failure(&l, &y, "O1", &rep.o1)? && verify_failure(&l, &y, "O2", &rep.o2)?;
            let ok = verified && rep.o4.holds() && rep.o5.holds();
            let observed = rep
                .verdicts()
                .iter()
                .map(|(n, v)| format!("{n} {}", if v.holds() { "holds" } else if v.fails() { "fails" } else { "inconclusive" }))
                .collect::<Vec<_>>()
                .join(", ");
            Ok((observed, ok, serde_json::to_value(&rep).expect("serializable")))
        });
    }

    r.case("prop-4.1", "implication harness", "no violations on at least 50 instances", || {
        let mut all = empty_punctured_instances();
        all.extend(generated_levelset_corpus());
        let rep = implication_harness(&all, cfg)?;
        let ok = rep.instances >= 50 && rep.violations.is_empty();
        let observed = format!("{} instances, {} checks exercised, {} violations", rep.instances, rep.exercised, rep.violations.len());
        let detail = json!({ "instances": rep.instances, "definite": rep.definite, "exercised": rep.exercised, "violations": rep.violations });
        Ok((observed, ok, detail))
    });

    r.case("lemma-2.1", "f4 Aubin modulus with delta = 1/4", "tau_upper = 1, no audit violations", || {
        let (_, p) = bundled_problem("f4.json")?;
        let Problem::Triple(t) = p else { unreachable!() };
        let rep = aubin_estimate(&t.f, &t.x_bar, &t.y_bar, &Rat::new(1, 4))?;
        let bad = rep.audit.iter().filter(|s| !s.holds).count();
        let ok = rep.tau_upper == Some(Rat::one()) && bad == 0 && rep.audit.len() >= AUDIT_POINTS;
        let tau = rep.tau_upper.as_ref().map_or("none".to_string(), Rat::to_string);
        Ok((format!("tau_upper = {tau}, {bad} audit violations"), ok, serde_json::to_value(&rep).expect("serializable")))
    });
    r.case("lemma-2.1", "f1 Aubin modulus", "tau_upper = 0", || {
        let (_, p) = bundled_problem("f1.json")?;
        let Problem::Triple(t) = p else { unreachable!() };
        let rep = aubin_estimate(&t.f, &t.x_bar, &t.y_bar, &Rat::new(1, 4))?;
        let ok = rep.tau_upper == Some(Rat::zero()) && rep.audit_passed;
        let tau = rep.tau_upper.as_ref().map_or("none".to_string(), Rat::to_string);
        Ok((format!("tau_upper = {tau}"), ok, serde_json::to_value(&rep).expect("serializable")))
    });

    let passed = r.cases.iter().filter(|c| c.pass).count();
    CorpusReport { passed, failed: r.cases.len() - passed, cases: r.cases }
}
