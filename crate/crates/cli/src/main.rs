//! `icdkit` — command-line front end for the block-algebra toolkit.
//!
//! Every subcommand reads algebras, morphisms, states and families in the
//! shared JSON formats (inline or from files), computes its verdicts, and
//! emits a machine-readable report. Identical inputs and seed produce a
//! byte-identical report except for the wall-time field. Exit code 0 means
//! the verdict was computed (even if it is `false`); malformed input exits
//! with code 2.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use icd_core::json::{
    AlgebraJson, ElementJson, FamilyJson, MeasureJson, MorphismJson, SignatureJson,
};
use icd_core::{diagram, nullspace, power};
use icd_core::{AsMode, NullspaceKind};

#[derive(Parser)]
#[command(name = "icdkit", version, about = "diagrammatic and operator-algebra checks")]
struct Cli {
    /// Numeric tolerance for verdicts.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed recorded in the report and used by stochastic procedures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the structural laws of copy/delete on an algebra.
    Axioms(AxiomsArgs),
    /// Report the predicate profile of a morphism.
    Classify(ClassifyArgs),
    /// Decide almost-sure equality of two morphisms along a CPU map.
    AsEqual(AsEqualArgs),
    /// Compute a nullspace basis of a CPU map.
    Nullspace(NullspaceArgs),
    /// Parse and evaluate diagram terms.
    #[command(subcommand)]
    Diagram(DiagramCmd),
    /// Exchangeable-family verification and reconstruction.
    #[command(subcommand)]
    Definetti(DefinettiCmd),
    /// Tensor-power morphisms and family checks.
    #[command(subcommand)]
    Power(PowerCmd),
}

#[derive(Args)]
struct AxiomsArgs {
    /// Algebra JSON (inline or a file path).
    #[arg(long)]
    algebra: String,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Morphism JSON (inline or a file path).
    #[arg(long)]
    morphism: String,
}

#[derive(Args)]
struct AsEqualArgs {
    #[arg(long)]
    omega: String,
    #[arg(long)]
    phi: String,
    #[arg(long)]
    psi: String,
    /// One of left | right | both | symmetric.
    #[arg(long)]
    mode: String,
}

#[derive(Args)]
struct NullspaceArgs {
    #[arg(long)]
    omega: String,
    /// One of left | right | symmetric.
    #[arg(long)]
    kind: String,
}

#[derive(Subcommand)]
enum DiagramCmd {
    /// Evaluate a term against a signature and print the morphism.
    Eval(DiagramEvalArgs),
    /// Compare two terms up to the tolerance.
    Equal(DiagramEqualArgs),
}

#[derive(Args)]
struct DiagramEvalArgs {
    #[arg(long)]
    sig: String,
    #[arg(long)]
    term: String,
}

#[derive(Args)]
struct DiagramEqualArgs {
    #[arg(long)]
    sig: String,
    #[arg(long)]
    term_a: String,
    #[arg(long)]
    term_b: String,
}

#[derive(Subcommand)]
enum DefinettiCmd {
    /// Exchangeability, consistency, moment PSD, extremality, and an
    /// optional reconstruction or measure verification.
    Verify(DefinettiVerifyArgs),
}

#[derive(Args)]
struct DefinettiVerifyArgs {
    #[arg(long)]
    family: String,
    /// Moment-matrix degree (requires family degree 2d) and atom budget
    /// for reconstruction.
    #[arg(long)]
    degree: usize,
    /// Candidate mixing measure to verify against the family.
    #[arg(long)]
    measure: Option<String>,
}

#[derive(Subcommand)]
enum PowerCmd {
    /// Slot-permutation morphism on a tensor power.
    Perm(PowerPermArgs),
    /// Slot-projection morphism on a tensor power.
    Project(PowerProjectArgs),
    /// Validate an exchangeable family.
    Check(PowerCheckArgs),
}

#[derive(Args)]
struct PowerPermArgs {
    #[arg(long)]
    algebra: String,
    #[arg(long)]
    n: usize,
    /// 1-based permutation images, e.g. `2,3,1`.
    #[arg(long)]
    sigma: String,
}

#[derive(Args)]
struct PowerProjectArgs {
    #[arg(long)]
    algebra: String,
    #[arg(long)]
    n: usize,
    /// 1-based slots to keep, e.g. `1,3` (empty keeps none).
    #[arg(long, default_value = "")]
    slots: String,
}

#[derive(Args)]
struct PowerCheckArgs {
    #[arg(long)]
    family: String,
}

/// The machine-readable result of one invocation.
#[derive(Serialize)]
struct Report {
    command: String,
    inputs_digest: String,
    verdicts: BTreeMap<String, bool>,
    residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<serde_json::Value>,
    seed: u64,
    wall_time_ms: f64,
}

struct ReportBuilder {
    command: String,
    hasher: Sha256,
    verdicts: BTreeMap<String, bool>,
    residuals: BTreeMap<String, f64>,
    data: Option<serde_json::Value>,
}

impl ReportBuilder {
    fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Self {
            command: command.to_string(),
            hasher,
            verdicts: BTreeMap::new(),
            residuals: BTreeMap::new(),
            data: None,
        }
    }

    fn digest_input(&mut self, label: &str, content: &str) {
        self.hasher.update([0u8]);
        self.hasher.update(label.as_bytes());
        self.hasher.update([0u8]);
        self.hasher.update(content.as_bytes());
    }

    fn verdict(&mut self, key: &str, value: bool) {
        self.verdicts.insert(key.to_string(), value);
    }

    fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_string(), value);
    }

    fn finish(self, seed: u64, started: Instant) -> Report {
        Report {
            command: self.command,
            inputs_digest: format!("sha256:{:x}", self.hasher.finalize()),
            verdicts: self.verdicts,
            residuals: self.residuals,
            data: self.data,
            seed,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// Inline JSON (starting with `{`) or the contents of a file path.
fn read_spec(builder: &mut ReportBuilder, label: &str, spec: &str) -> Result<String, String> {
    let content = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).map_err(|e| format!("cannot read `{spec}`: {e}"))?
    };
    builder.digest_input(label, &content);
    Ok(content)
}

fn parse_json<T: serde::de::DeserializeOwned>(label: &str, content: &str) -> Result<T, String> {
    serde_json::from_str(content).map_err(|e| format!("invalid {label} JSON: {e}"))
}

fn parse_index_list(s: &str, what: &str) -> Result<Vec<usize>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .ok()
                .and_then(|v| v.checked_sub(1))
                .ok_or_else(|| format!("bad {what} entry `{p}` (1-based indices)"))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli, started) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text + "\n") {
                        eprintln!("error: cannot write report: {e}");
                        return ExitCode::from(2);
                    }
                }
                None => println!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, started: Instant) -> Result<Report, String> {
    let tol = cli.tol;
    match &cli.command {
        Command::Axioms(args) => {
            let mut b = ReportBuilder::new("axioms");
            let content = read_spec(&mut b, "algebra", &args.algebra)?;
            let aj: AlgebraJson = parse_json("algebra", &content)?;
            let a = aj.to_algebra().map_err(|e| e.to_string())?;
            let r = diagram::check_axioms(&a, tol);
            b.verdict("classical", r.classical);
            b.verdict("axioms_ok", r.is_ok(tol));
            b.residual("coassociativity", r.coassociativity);
            b.residual("counitality", r.counitality);
            b.residual("involution_copy", r.involution_copy);
            b.residual("involution_delete", r.involution_delete);
            b.residual("monoidal_copy", r.monoidal_copy);
            b.residual("monoidal_delete", r.monoidal_delete);
            b.residual("classicality", r.classicality_residual);
            b.residual("max", r.max_residual());
            Ok(b.finish(cli.seed, started))
        }
        Command::Classify(args) => {
            let mut b = ReportBuilder::new("classify");
            let content = read_spec(&mut b, "morphism", &args.morphism)?;
            let mj: MorphismJson = parse_json("morphism", &content)?;
            let m = mj.to_map().map_err(|e| e.to_string())?;
            let choi = m.choi();
            b.verdict("selfadjoint", m.is_selfadjoint(tol));
            b.verdict("unital", m.is_unital(tol));
            b.verdict("cp", m.is_completely_positive(tol.max(1e-10)));
            b.verdict("deterministic", m.is_deterministic(tol));
            b.verdict("autocompatible", m.is_autocompatible(tol));
            b.verdict("noninvasive", m.is_noninvasive(tol));
            b.residual("selfadjointness", m.selfadjointness_residual());
            b.residual("unitality", m.unitality_residual());
            b.residual("choi_min_eigenvalue", choi.min_eigenvalue());
            b.residual("choi_hermiticity", choi.hermiticity_residual());
            Ok(b.finish(cli.seed, started))
        }
        Command::AsEqual(args) => {
            let mut b = ReportBuilder::new("as-equal");
            let omega: MorphismJson =
                parse_json("omega", &read_spec(&mut b, "omega", &args.omega)?)?;
            let phi: MorphismJson = parse_json("phi", &read_spec(&mut b, "phi", &args.phi)?)?;
            let psi: MorphismJson = parse_json("psi", &read_spec(&mut b, "psi", &args.psi)?)?;
            b.digest_input("mode", &args.mode);
            let mode = AsMode::parse(&args.mode).map_err(|e| e.to_string())?;
            let omega = omega.to_map().map_err(|e| e.to_string())?;
            let phi = phi.to_map().map_err(|e| e.to_string())?;
            let psi = psi.to_map().map_err(|e| e.to_string())?;
            let verdict =
                nullspace::as_equal(&phi, &psi, &omega, mode, tol).map_err(|e| e.to_string())?;
            b.verdict("as_equal", verdict);
            b.residual("op_distance", phi.op_distance(&psi));
            Ok(b.finish(cli.seed, started))
        }
        Command::Nullspace(args) => {
            let mut b = ReportBuilder::new("nullspace");
            let omega: MorphismJson =
                parse_json("omega", &read_spec(&mut b, "omega", &args.omega)?)?;
            b.digest_input("kind", &args.kind);
            let kind = match args.kind.as_str() {
                "left" => NullspaceKind::Left,
                "right" => NullspaceKind::Right,
                "symmetric" => NullspaceKind::Symmetric,
                other => return Err(format!("unknown kind `{other}`")),
            };
            let omega = omega.to_map().map_err(|e| e.to_string())?;
            let ns = nullspace::nullspace(&omega, kind, tol.min(icd_core::KERNEL_TOL))
                .map_err(|e| e.to_string())?;
            let basis: Vec<ElementJson> = ns.basis().iter().map(ElementJson::from_element).collect();
            b.verdict("trivial", ns.dim() == 0);
            b.data = Some(serde_json::json!({
                "dimension": ns.dim(),
                "basis": basis,
            }));
            Ok(b.finish(cli.seed, started))
        }
        Command::Diagram(DiagramCmd::Eval(args)) => {
            let mut b = ReportBuilder::new("diagram eval");
            let sig: SignatureJson = parse_json("signature", &read_spec(&mut b, "sig", &args.sig)?)?;
            b.digest_input("term", &args.term);
            let sig = sig.to_signature().map_err(|e| e.to_string())?;
            let term = diagram::parse(&args.term, &sig).map_err(|e| e.to_string())?;
            let (dom_wires, cod_wires) = diagram::wires(&term, &sig).map_err(|e| e.to_string())?;
            let m = diagram::evaluate(&term, &sig).map_err(|e| e.to_string())?;
            b.verdict("cp", m.is_completely_positive(tol.max(1e-10)));
            b.verdict("unital", m.is_unital(tol));
            b.data = Some(serde_json::json!({
                "printed": diagram::print(&term),
                "dom_wires": dom_wires,
                "cod_wires": cod_wires,
                "morphism": MorphismJson::from_map(&m),
            }));
            Ok(b.finish(cli.seed, started))
        }
        Command::Diagram(DiagramCmd::Equal(args)) => {
            let mut b = ReportBuilder::new("diagram equal");
            let sig: SignatureJson = parse_json("signature", &read_spec(&mut b, "sig", &args.sig)?)?;
            b.digest_input("term_a", &args.term_a);
            b.digest_input("term_b", &args.term_b);
            let sig = sig.to_signature().map_err(|e| e.to_string())?;
            let ta = diagram::parse(&args.term_a, &sig).map_err(|e| e.to_string())?;
            let tb = diagram::parse(&args.term_b, &sig).map_err(|e| e.to_string())?;
            let ma = diagram::evaluate(&ta, &sig).map_err(|e| e.to_string())?;
            let mb = diagram::evaluate(&tb, &sig).map_err(|e| e.to_string())?;
            let d = ma.op_distance(&mb);
            b.verdict("equal", d <= tol);
            b.residual("op_distance", d);
            Ok(b.finish(cli.seed, started))
        }
        Command::Definetti(DefinettiCmd::Verify(args)) => {
            let mut b = ReportBuilder::new("definetti verify");
            let fj: FamilyJson = parse_json("family", &read_spec(&mut b, "family", &args.family)?)?;
            b.digest_input("degree", &args.degree.to_string());
            let fam = fj.to_family(tol.max(1e-9)).map_err(|e| e.to_string())?;
            let check = power::family_check(&fam, tol).map_err(|e| e.to_string())?;
            b.verdict("exchangeable", check.exchangeable);
            b.verdict("consistent", check.consistent);
            b.residual("permutation", check.max_permutation_residual);
            b.residual("consistency", check.max_consistency_residual);

            let mm = icd_core::definetti::moment_matrix(&fam, args.degree)
                .map_err(|e| e.to_string())?;
            b.verdict("moment_psd", mm.is_psd(tol.max(1e-10)));
            b.residual("moment_min_eigenvalue", mm.min_eigenvalue());

            if fam.max_degree() >= 2 {
                let resid =
                    icd_core::definetti::extremality_identity_residual(&fam, fam.max_degree() - 1)
                        .map_err(|e| e.to_string())?;
                b.residual("extremality", resid);
            }

            let mut data = serde_json::Map::new();
            match &args.measure {
                Some(spec) => {
                    let mj: MeasureJson =
                        parse_json("measure", &read_spec(&mut b, "measure", spec)?)?;
                    let measure = mj
                        .to_measure(fam.base(), fam.side(), tol.max(1e-9))
                        .map_err(|e| e.to_string())?;
                    let resid = icd_core::definetti::verify_measure(&fam, &measure, tol)
                        .map_err(|e| e.to_string())?;
                    b.verdict("measure_reproduces", resid <= tol.max(1e-9) * 1e2);
                    b.residual("measure", resid);
                }
                None => {
                    if fam.base().is_commutative() && fam.max_degree() + 1 >= 2 * args.degree {
                        match icd_core::definetti::reconstruct(&fam, args.degree, tol) {
                            Ok(measure) => {
                                let resid =
                                    icd_core::definetti::verify_measure(&fam, &measure, tol)
                                        .map_err(|e| e.to_string())?;
                                b.verdict("reconstruction_ok", true);
                                b.residual("reconstruction", resid);
                                data.insert(
                                    "reconstruction".into(),
                                    serde_json::to_value(MeasureJson::from_measure(&measure))
                                        .expect("measure serializes"),
                                );
                            }
                            Err(e) => {
                                b.verdict("reconstruction_ok", false);
                                data.insert("reconstruction_error".into(), e.to_string().into());
                            }
                        }
                    }
                }
            }
            if !data.is_empty() {
                b.data = Some(serde_json::Value::Object(data));
            }
            Ok(b.finish(cli.seed, started))
        }
        Command::Power(PowerCmd::Perm(args)) => {
            let mut b = ReportBuilder::new("power perm");
            let aj: AlgebraJson =
                parse_json("algebra", &read_spec(&mut b, "algebra", &args.algebra)?)?;
            b.digest_input("n", &args.n.to_string());
            b.digest_input("sigma", &args.sigma);
            let a = aj.to_algebra().map_err(|e| e.to_string())?;
            let sigma = parse_index_list(&args.sigma, "sigma")?;
            let m = power::permutation_morphism(&a, args.n, &sigma).map_err(|e| e.to_string())?;
            b.verdict("deterministic", m.is_deterministic(tol));
            b.data = Some(serde_json::json!({ "morphism": MorphismJson::from_map(&m) }));
            Ok(b.finish(cli.seed, started))
        }
        Command::Power(PowerCmd::Project(args)) => {
            let mut b = ReportBuilder::new("power project");
            let aj: AlgebraJson =
                parse_json("algebra", &read_spec(&mut b, "algebra", &args.algebra)?)?;
            b.digest_input("n", &args.n.to_string());
            b.digest_input("slots", &args.slots);
            let a = aj.to_algebra().map_err(|e| e.to_string())?;
            let slots = parse_index_list(&args.slots, "slots")?;
            let m = power::projection(&a, args.n, &slots).map_err(|e| e.to_string())?;
            b.verdict("deterministic", m.is_deterministic(tol));
            b.data = Some(serde_json::json!({ "morphism": MorphismJson::from_map(&m) }));
            Ok(b.finish(cli.seed, started))
        }
        Command::Power(PowerCmd::Check(args)) => {
            let mut b = ReportBuilder::new("power check");
            let fj: FamilyJson = parse_json("family", &read_spec(&mut b, "family", &args.family)?)?;
            let fam = fj.to_family(tol.max(1e-9)).map_err(|e| e.to_string())?;
            let check = power::family_check(&fam, tol).map_err(|e| e.to_string())?;
            b.verdict("exchangeable", check.exchangeable);
            b.verdict("consistent", check.consistent);
            b.residual("permutation", check.max_permutation_residual);
            b.residual("consistency", check.max_consistency_residual);
            Ok(b.finish(cli.seed, started))
        }
    }
}
