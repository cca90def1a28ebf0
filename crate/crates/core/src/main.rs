use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use vex::certificate::{verify, ClauseStatus, DualCertificate};
use vex::cone::{clarke_tangent, coderivative, normal_cone, set_stub_cones, ConeFlavor};
use vex::config::SearchConfig;
use vex::corpus::{bundled, run_corpus};
use vex::error::{CoreError, Result};
use vex::levelset::LevelSetMapping;
use vex::preference::{bridge_extremal_point, check_o_properties};
use vex::problem::{Problem, ProblemFile};
use vex::qc::{aubin_estimate, check_qc, QCStatus, DEFAULT_AUBIN_DELTA};
use vex::rational::{ExtRat, Rat};
use vex::search::{search_certificates, CertKindName, SearchOutcome};
use vex::set::SetExpr;
use vex::stationarity::{check_collection, check_extremal_point, CheckOptions, Outcome, Property};
use vex::vector::Vector;

const EXIT_HOLDS: u8 = 0;
const EXIT_REFUTED: u8 = 10;
const EXIT_INCONCLUSIVE: u8 = 20;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "vex", version, about = "Exact cones, stationarity checks and dual certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Serialize)]
struct Common {
    /// Problem file, or `bundled:<name>` for a file shipped with the tool.
    #[arg(short = 'p', long)]
    problem: String,
    /// Write the result JSON here as well as to stdout.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide extremality, stationarity or approximate stationarity on the schedule.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        property: String,
        /// Number of schedule levels (default: grid depth).
        #[arg(long)]
        levels: Option<u32>,
        /// Fix rho instead of searching the grid ("inf" allowed).
        #[arg(long)]
        rho: Option<String>,
    },
    /// Normal cone and Clarke tangent cone of Ω or a graph at a point.
    Cones {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "frechet")]
        flavor: String,
        /// `omega`, `graph` or `graph:<i>`.
        #[arg(long, default_value = "graph")]
        set: String,
        /// Comma-separated coordinates (default: the reference point).
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Coderivative `D*F(x, y)(y*)`.
    Coderivative {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "frechet")]
        flavor: String,
        #[arg(long, default_value_t = 0)]
        mapping: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y_star: String,
    },
    /// Search for a dual certificate at a given eps.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "fuzzy-separation")]
        kind: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "frechet")]
        flavor: String,
    },
    /// Verify a certificate file against a problem.
    VerifyCert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cert: String,
        /// Override the certificate's eps.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Qualification condition check.
    Qc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "frechet")]
        flavor: String,
        #[arg(long)]
        delta: Option<String>,
    },
    /// Aubin modulus bounds with a normal-cone audit.
    Aubin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        mapping: usize,
        #[arg(long)]
        delta: Option<String>,
    },
    /// Level-set properties O1..O6, plus the extremal-point bridge when a mapping is given.
    Levelset {
        #[command(flatten)]
        common: Common,
        /// Base point of the level-set mapping (default: refpoint.y, or the origin).
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long)]
        delta: Option<String>,
    },
    /// Run the bundled regression corpus.
    Corpus {
        /// Run only cases with this tag.
        #[arg(long)]
        filter: Option<String>,
        /// Directory for the report and per-case artifacts; the manifest lists them relative to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Replace every normal cone with {0}.
        #[arg(long, hide = true)]
        stub_cones: bool,
    },
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: Value,
    config: SearchConfig,
    config_hash: String,
    schedule: Vec<Rat>,
    grid: Value,
    outcome: String,
    exit_code: u8,
    artifacts: Vec<String>,
}

struct Run {
    result: Value,
    outcome: String,
    code: u8,
    artifacts: Vec<String>,
}

impl Run {
    fn new(result: Value, outcome: impl Into<String>, code: u8) -> Run {
        Run { result, outcome: outcome.into(), code, artifacts: Vec::new() }
    }
}

fn canonical(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CoreError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CoreError::Io(format!("{}: {e}", path.display())))
}

fn read_text(source: &str) -> Result<String> {
    match source.strip_prefix("bundled:") {
        Some(name) => bundled(name).map(str::to_string),
        None => std::fs::read_to_string(source).map_err(|e| CoreError::Io(format!("{source}: {e}"))),
    }
}

fn load(source: &str) -> Result<(ProblemFile, Problem)> {
    let pf = ProblemFile::from_json(&read_text(source)?)?;
    let p = pf.build()?;
    Ok((pf, p))
}

fn rat(s: &str) -> Result<Rat> {
    s.parse()
}

fn flavor(s: &str) -> Result<ConeFlavor> {
    s.parse()
}

fn delta_or_default(s: &Option<String>) -> Result<Rat> {
    s.as_deref().map_or(Ok(Rat::new(DEFAULT_AUBIN_DELTA.0, DEFAULT_AUBIN_DELTA.1)), rat)
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn multi(p: &Problem) -> Result<vex::stationarity::MultiProblem> {
    p.as_multi().ok_or_else(|| CoreError::Malformed("this command needs a problem with mappings".into()))
}

fn cmd_check(common: &Common, property: &str, levels: Option<u32>, rho: &Option<String>, cfg: &SearchConfig) -> Result<Run> {
    let property: Property = property.parse()?;
    let (pf, p) = load(&common.problem)?;
    let fixed_rho = rho.as_deref().map(str::parse::<ExtRat>).transpose()?;
    let verdict = if property == Property::ExtremalPoint {
        let (Problem::Triple(t), Some(l)) = (&p, &pf.levelset) else {
            return Err(CoreError::Malformed("extremal-point needs a single mapping and a levelset".into()));
        };
        let rhos = fixed_rho.map_or_else(|| cfg.rho_grid(), |r| vec![r]);
        check_extremal_point(&t.f, &t.omega, l, &t.x_bar, &t.y_bar, &rhos)
    } else {
        let opts = CheckOptions { fixed_rho, templates: pf.refutation_templates.clone(), levels };
        check_collection(&p.collection(), property, cfg, &opts)
    };
    let (outcome, code) = match &verdict.outcome {
        Outcome::HoldsOnSchedule { .. } => ("holds", EXIT_HOLDS),
        Outcome::RefutedOnGrid { .. } => ("refuted", EXIT_REFUTED),
        Outcome::Inconclusive { .. } => ("inconclusive", EXIT_INCONCLUSIVE),
    };
    Ok(Run::new(to_value(&verdict), outcome, code))
}

fn cmd_cones(common: &Common, fl: &str, set: &str, point: &Option<String>) -> Result<Run> {
    let fl = flavor(fl)?;
    let (pf, p) = load(&common.problem)?;
    let (s, default_point): (SetExpr, Vector) = match set {
        "omega" => {
            let omega = pf.omega.clone().ok_or_else(|| CoreError::Malformed("problem has no omega".into()))?;
            (omega, p.collection().x_bar.clone())
        }
        _ => {
            let i = match set.strip_prefix("graph") {
                Some("") => 0,
                Some(rest) => rest
                    .strip_prefix(':')
                    .and_then(|r| r.parse().ok())
                    .ok_or_else(|| CoreError::Parse(format!("bad set selector {set:?}")))?,
                None => return Err(CoreError::Parse(format!("bad set selector {set:?}"))),
            };
            let m = multi(&p)?;
            let f = m.mappings.get(i).ok_or_else(|| CoreError::Malformed(format!("no mapping {i}")))?;
            (f.graph(), Vector::concat(&[&m.x_bar, &m.y_bars[i]]))
        }
    };
    let x = point.as_deref().map_or(Ok(default_point), Vector::parse_list)?;
    let normal = normal_cone(&s, &x, fl)?;
    let tangent = clarke_tangent(&s, &x)?;
    let result = json!({ "point": x, "flavor": fl, "normal_cone": normal, "clarke_tangent_cone": tangent });
    Ok(Run::new(result, "computed", EXIT_HOLDS))
}

fn cmd_coderivative(common: &Common, fl: &str, idx: usize, x: &Option<String>, y: &Option<String>, y_star: &str) -> Result<Run> {
    let fl = flavor(fl)?;
    let (_, p) = load(&common.problem)?;
    let m = multi(&p)?;
    let f = m.mappings.get(idx).ok_or_else(|| CoreError::Malformed(format!("no mapping {idx}")))?;
    let x = x.as_deref().map_or(Ok(m.x_bar.clone()), Vector::parse_list)?;
    let y = y.as_deref().map_or(Ok(m.y_bars[idx].clone()), Vector::parse_list)?;
    let y_star = Vector::parse_list(y_star)?;
    let d = coderivative(f, &x, &y, &y_star, fl)?;
    let result = json!({ "x": x, "y": y, "y_star": y_star, "flavor": fl, "slice": d.slice, "value": d.result });
    Ok(Run::new(result, "computed", EXIT_HOLDS))
}

fn cmd_certify(common: &Common, kind: &str, eps: &str, fl: &str, cfg: &SearchConfig) -> Result<Run> {
    let kind: CertKindName = kind.parse().map_err(CoreError::Parse)?;
    let eps = rat(eps)?;
    let (_, p) = load(&common.problem)?;
    let m = multi(&p)?;
    let outcome = search_certificates(&m, &eps, kind, flavor(fl)?, cfg)?;
    Ok(match &outcome {
        SearchOutcome::Found { certificate } => Run::new(to_value(certificate), "found", EXIT_HOLDS),
        SearchOutcome::NotFound { .. } => Run::new(to_value(&outcome), "not found", EXIT_INCONCLUSIVE),
    })
}

fn cmd_verify_cert(common: &Common, cert: &str, eps: &Option<String>) -> Result<Run> {
    let (_, p) = load(&common.problem)?;
    let m = multi(&p)?;
    let mut c: DualCertificate = serde_json::from_str(&read_text(cert)?).map_err(|e| CoreError::Parse(e.to_string()))?;
    if let Some(e) = eps {
        c.eps = rat(e)?;
    }
    let rep = verify(&c, &m)?;
    let (outcome, code) = if rep.accepted {
        ("accepted", EXIT_HOLDS)
    } else if rep.clauses.iter().any(|cl| cl.status == ClauseStatus::Fail) {
        ("rejected", EXIT_REFUTED)
    } else {
        ("inconclusive", EXIT_INCONCLUSIVE)
    };
    Ok(Run::new(to_value(&rep), outcome, code))
}

fn cmd_qc(common: &Common, fl: &str, delta: &Option<String>, cfg: &SearchConfig) -> Result<Run> {
    let (_, p) = load(&common.problem)?;
    let rep = check_qc(&multi(&p)?, flavor(fl)?, &delta_or_default(delta)?, cfg)?;
    let (outcome, code) = match &rep.status {
        QCStatus::HoldsWithEps { .. } => ("holds", EXIT_HOLDS),
        QCStatus::ViolatedBy { .. } => ("violated", EXIT_REFUTED),
        QCStatus::Inconclusive { .. } => ("inconclusive", EXIT_INCONCLUSIVE),
    };
    Ok(Run::new(to_value(&rep), outcome, code))
}

fn cmd_aubin(common: &Common, idx: usize, delta: &Option<String>) -> Result<Run> {
    let (_, p) = load(&common.problem)?;
    let m = multi(&p)?;
    let f = m.mappings.get(idx).ok_or_else(|| CoreError::Malformed(format!("no mapping {idx}")))?;
    let rep = aubin_estimate(f, &m.x_bar, &m.y_bars[idx], &delta_or_default(delta)?)?;
    let (outcome, code) = match (&rep.tau_upper, rep.audit_passed) {
        (Some(_), true) => ("bounded", EXIT_HOLDS),
        (Some(_), false) => ("audit failed", EXIT_REFUTED),
        (None, _) => ("inconclusive", EXIT_INCONCLUSIVE),
    };
    Ok(Run::new(to_value(&rep), outcome, code))
}

fn cmd_levelset(common: &Common, point: &Option<String>, delta: &Option<String>, cfg: &SearchConfig) -> Result<Run> {
    let text = read_text(&common.problem)?;
    // A problem file with a `levelset` field, or a bare level-set mapping.
    let (l, pf) = match ProblemFile::from_json(&text) {
        Ok(pf) => {
            let l = pf.levelset.clone().ok_or_else(|| CoreError::Malformed("problem has no levelset".into()))?;
            (l, Some(pf))
        }
        Err(_) => (serde_json::from_str::<LevelSetMapping>(&text).map_err(|e| CoreError::Parse(e.to_string()))?, None),
    };
    l.validate()?;
    let y = match (point, pf.as_ref().and_then(|pf| pf.refpoint.y.clone())) {
        (Some(s), _) => Vector::parse_list(s)?,
        (None, Some(y)) => y,
        (None, None) => Vector::zeros(l.dim()),
    };
    let props = check_o_properties(&l, &y, cfg)?;
    let mut result = json!({ "y_bar": y, "properties": props });
    if let Some(pf) = pf.filter(|pf| pf.mapping.is_some()) {
        let Problem::Triple(t) = pf.build()? else { unreachable!() };
        let bridge = bridge_extremal_point(&t.f, &t.omega, &l, &t.x_bar, &t.y_bar, &delta_or_default(delta)?, cfg)?;
        result["bridge"] = to_value(&bridge);
    }
    let all_definite = props.verdicts().iter().all(|(_, v)| v.holds() || v.fails());
    let (outcome, code) = if all_definite { ("decided", EXIT_HOLDS) } else { ("inconclusive", EXIT_INCONCLUSIVE) };
    Ok(Run::new(result, outcome, code))
}

fn cmd_corpus(filter: &Option<String>, out: &Option<PathBuf>, stub: bool, cfg: &SearchConfig) -> Result<Run> {
    set_stub_cones(stub);
    let rep = run_corpus(cfg, filter.as_deref());
    let mut run = Run::new(
        to_value(&rep),
        format!("{} passed, {} failed", rep.passed, rep.failed),
        if rep.failed == 0 { EXIT_HOLDS } else { 1 },
    );
    if let Some(dir) = out {
        for (i, c) in rep.cases.iter().enumerate() {
            let file = format!("{:02}-{}.json", i + 1, c.tag);
            write(&dir.join(&file), &canonical(&json!({ "tag": c.tag, "name": c.name, "detail": c.detail })))?;
            run.artifacts.push(file);
        }
    }
    for c in &rep.cases {
        eprintln!("{} [{}] {}: expected {}, observed {}", if c.pass { "pass" } else { "FAIL" }, c.tag, c.name, c.expected, c.observed);
    }
    Ok(run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = SearchConfig::from_env();
    let (name, args, out, manifest, is_dir) = match &cli.command {
        Command::Check { common, property, levels, rho } => {
            ("check", json!({ "common": common, "property": property, "levels": levels, "rho": rho }), common.out.clone(), common.manifest.clone(), false)
        }
        Command::Cones { common, flavor, set, point } => {
            ("cones", json!({ "common": common, "flavor": flavor, "set": set, "point": point }), common.out.clone(), common.manifest.clone(), false)
        }
        Command::Coderivative { common, flavor, mapping, x, y, y_star } => (
            "coderivative",
            json!({ "common": common, "flavor": flavor, "mapping": mapping, "x": x, "y": y, "y_star": y_star }),
            common.out.clone(),
            common.manifest.clone(),
            false,
        ),
        Command::Certify { common, kind, eps, flavor } => {
            ("certify", json!({ "common": common, "kind": kind, "eps": eps, "flavor": flavor }), common.out.clone(), common.manifest.clone(), false)
        }
        Command::VerifyCert { common, cert, eps } => {
            ("verify-cert", json!({ "common": common, "cert": cert, "eps": eps }), common.out.clone(), common.manifest.clone(), false)
        }
        Command::Qc { common, flavor, delta } => {
            ("qc", json!({ "common": common, "flavor": flavor, "delta": delta }), common.out.clone(), common.manifest.clone(), false)
        }
        Command::Aubin { common, mapping, delta } => {
            ("aubin", json!({ "common": common, "mapping": mapping, "delta": delta }), common.out.clone(), common.manifest.clone(), false)
        }
        Command::Levelset { common, point, delta } => {
            ("levelset", json!({ "common": common, "point": point, "delta": delta }), common.out.clone(), common.manifest.clone(), false)
        }
        Command::Corpus { filter, out, manifest, stub_cones } => {
            ("corpus", json!({ "filter": filter, "stub_cones": stub_cones }), out.clone(), manifest.clone(), true)
        }
    };
    let run = match &cli.command {
        Command::Check { common, property, levels, rho } => cmd_check(common, property, *levels, rho, &cfg),
        Command::Cones { common, flavor, set, point } => cmd_cones(common, flavor, set, point),
        Command::Coderivative { common, flavor, mapping, x, y, y_star } => cmd_coderivative(common, flavor, *mapping, x, y, y_star),
        Command::Certify { common, kind, eps, flavor } => cmd_certify(common, kind, eps, flavor, &cfg),
        Command::VerifyCert { common, cert, eps } => cmd_verify_cert(common, cert, eps),
        Command::Qc { common, flavor, delta } => cmd_qc(common, flavor, delta, &cfg),
        Command::Aubin { common, mapping, delta } => cmd_aubin(common, *mapping, delta),
        Command::Levelset { common, point, delta } => cmd_levelset(common, point, delta, &cfg),
        Command::Corpus { filter, out, stub_cones, .. } => cmd_corpus(filter, out, *stub_cones, &cfg),
    };
    let mut run = match run {
        Ok(r) => r,
        Err(e) => {
            eprintln!("vex {name}: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let text = canonical(&run.result);
    print!("{text}");
    if let Some(out) = &out {
        let path = if is_dir { out.join("report.json") } else { out.clone() };
        if let Err(e) = write(&path, &text) {
            eprintln!("vex {name}: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
        run.artifacts.push(if is_dir { "report.json".into() } else { path.display().to_string() });
    }
    if let Some(path) = &manifest {
        let hashed = canonical(&json!({ "command": name, "args": args, "config": cfg }));
        let config_hash: String = Sha256::digest(hashed.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        let m = RunManifest {
            command: name.into(),
            args,
            config: cfg.clone(),
            config_hash,
            schedule: cfg.schedule(None),
            grid: json!({ "denominator": Rat::pow2(cfg.depth as i32), "rho_grid_size": cfg.rho_grid().len() }),
            outcome: run.outcome.clone(),
            exit_code: run.code,
            artifacts: run.artifacts.clone(),
        };
        if let Err(e) = write(path, &canonical(&m)) {
            eprintln!("vex {name}: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    ExitCode::from(run.code)
}
