//! Command-line surface. Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use coarsex::constructions::GammaSet;
use coarsex::controlled::{hom_basis, karoubi_complete, quotient_hom, restrict, BhFunctor, ConvObject, Convolution, CtrlMorphism, CtrlObject};
use coarsex::group_change::{change_group, mackey_check, subgroup_inclusion, ChangeKind};
use coarsex::homology::{chain_transform, group_homology, homology, phi_psi, ChainConfig, HomologyGroup, TransformKind};
use coarsex::linalg::IntMatrix;
use coarsex::rips::{rips_complex, simplicial_homology};
use coarsex::subsets::BigFamily;
use coarsex::{Action, CoarseError, Entourage, FiniteGroup, Result, Space, ValidationReport};

use crate::doc::{self, CtrlDoc, HomDoc, LoadedSpace, SpaceDoc};
use crate::suite::{axiom_suite, Mutation, Status, SuiteConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coarsex", version, about = "Equivariant coarse homology toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroupName {
    Trivial,
    Z2,
    Z3,
    Z4,
    S3,
}

impl GroupName {
    fn build(self) -> Arc<FiniteGroup> {
        let name = match self {
            GroupName::Trivial => "trivial",
            GroupName::Z2 => "Z2",
            GroupName::Z3 => "Z3",
            GroupName::Z4 => "Z4",
            GroupName::S3 => "S3",
        };
        Arc::new(FiniteGroup::named(name).expect("menu group"))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Res,
    Bh,
    Qh,
    Ind,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Checks every law of a space document.
    Validate { file: PathBuf },
    /// Equivariant coarse homology of a space.
    Homology {
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        file: PathBuf,
    },
    /// Group homology with coefficients in the permutation module of a Γ-set.
    GroupHomology {
        #[arg(long, value_enum)]
        group: GroupName,
        /// A space document whose action gives the set, or `point`.
        #[arg(long, default_value = "point")]
        set: String,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
    },
    /// Compares the standard complex of a Γ-set with the coarse complex of Γ_can,min ⊗ S_min,max.
    PhiPsi {
        #[arg(long, value_enum)]
        group: GroupName,
        #[arg(long, default_value = "point")]
        set: String,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
    },
    /// Rips complex of a named entourage, closed up under inverses and the diagonal.
    Rips {
        #[arg(long)]
        entourage: String,
        #[arg(long, default_value_t = coarsex::rips::DEFAULT_MAX_DIM)]
        max_dim: usize,
        /// Writes the complex in the line format read back by `SimplicialComplex::parse`.
        #[arg(long)]
        export: Option<PathBuf>,
        file: PathBuf,
    },
    /// Applies a change-of-group functor along a homomorphism.
    ChangeGroup {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        hom: PathBuf,
        /// Also checks the induced chain transformation up to this degree (res, qh, ind).
        #[arg(long)]
        check_degree: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        file: PathBuf,
    },
    /// Certifies the double-coset decomposition of Res Ind.
    Mackey {
        #[arg(long, value_enum)]
        group: GroupName,
        /// Elements of the subgroup the file's space lives over, comma separated.
        #[arg(long)]
        into: String,
        /// Elements of the restricting subgroup; defaults to `--into`.
        #[arg(long)]
        into_prime: Option<String>,
        file: PathBuf,
    },
    /// Randomized axiom suite.
    Axioms {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum)]
        mutate: Option<Mutation>,
        #[arg(long, default_value_t = 1)]
        min_size: usize,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
    },
    /// Controlled objects.
    Ctrl {
        #[command(subcommand)]
        command: CtrlCommand,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FunctorKind {
    Bh,
    Conv,
}

#[derive(Debug, Subcommand)]
enum CtrlCommand {
    /// Checks the cocycle laws of an object document.
    Validate { file: PathBuf },
    /// Round trip through the bh functor or the convolution functor.
    Functor {
        #[arg(long, value_enum)]
        kind: FunctorKind,
        file: PathBuf,
    },
    /// Factors the canonical morphisms through the restriction to a big-family stage.
    Karoubi {
        /// Points generating the big family, comma separated.
        #[arg(long)]
        seed_set: String,
        file: PathBuf,
    },
    /// Hom(C, C) modulo morphisms factoring through objects supported in `sub`.
    QuotientHom {
        #[arg(long)]
        sub: String,
        file: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &CoarseError) -> i32 {
    match e {
        CoarseError::Parse(_) | CoarseError::Domain(_) | CoarseError::Precondition(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CoarseError {
    CoarseError::Parse(format!("{}: {e}", path.display()))
}

fn emit(out: &mut dyn Write, text: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", text.as_ref()).map_err(|e| CoarseError::Parse(format!("stdout: {e}")))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn code(ok: bool) -> i32 {
    if ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn print_report(out: &mut dyn Write, report: &ValidationReport) -> Result<()> {
    for c in &report.checks {
        match &c.witness {
            Some(w) if !c.passed => emit(out, format!("FAIL {}: {w}", c.name))?,
            _ => emit(out, format!("{} {}", verdict(c.passed), c.name))?,
        }
    }
    Ok(())
}

fn print_groups(out: &mut dyn Write, groups: &[HomologyGroup]) -> Result<()> {
    for (n, g) in groups.iter().enumerate() {
        emit(out, format!("H{n} {g}"))?;
    }
    Ok(())
}

fn load_space_file(path: &Path) -> Result<LoadedSpace> {
    doc::load_space(&doc::read_json::<SpaceDoc>(path)?)
}

/// Loads and validates; a document that breaks a law is an input error.
fn load_valid(path: &Path) -> Result<LoadedSpace> {
    let loaded = load_space_file(path)?;
    let report = loaded.space.validate();
    if let Some(c) = report.checks.iter().find(|c| !c.passed) {
        return Err(CoarseError::Parse(format!("{}: {}: {}", path.display(), c.name, c.witness.clone().unwrap_or_default())));
    }
    Ok(loaded)
}

fn load_set(group: &Arc<FiniteGroup>, set: &str) -> Result<GammaSet> {
    if set == "point" {
        return Ok(GammaSet::point(group.clone()));
    }
    let loaded = load_space_file(Path::new(set))?;
    let space = rebase(&loaded.space, group)?;
    GammaSet::new(space.names().to_vec(), space.action().clone())
}

/// The same space over `group`. A document with a trivial group and no action is read as a
/// trivial action; otherwise the groups must coincide.
fn rebase(space: &Arc<Space>, group: &Arc<FiniteGroup>) -> Result<Arc<Space>> {
    if space.group().as_ref() == group.as_ref() {
        return Ok(space.clone());
    }
    if space.group().order() == 1 {
        let action = Action::trivial(group.clone(), space.size());
        return Ok(Arc::new(Space::new(space.names().to_vec(), action, space.generators().to_vec(), space.bornology().clone())?));
    }
    Err(CoarseError::Parse("the document's group differs from the requested group".into()))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    let cfg = ChainConfig::default();
    match command {
        Command::Validate { file } => {
            let loaded = load_space_file(&file)?;
            let report = loaded.space.validate();
            print_report(out, &report)?;
            Ok(code(report.passed()))
        }
        Command::Homology { max_degree, file } => {
            let loaded = load_valid(&file)?;
            print_groups(out, &homology(&loaded.space, max_degree, &cfg)?)?;
            Ok(EXIT_PASS)
        }
        Command::GroupHomology { group, set, max_degree } => {
            let set = load_set(&group.build(), &set)?;
            let groups = group_homology(&set.action, max_degree, &cfg)?;
            print_groups(out, &groups)?;
            emit(out, groups.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))?;
            Ok(EXIT_PASS)
        }
        Command::PhiPsi { group, set, max_degree } => {
            let set = load_set(&group.build(), &set)?;
            let r = phi_psi(&set, max_degree, &cfg)?.report;
            emit(out, format!("{} φ chain map", verdict(r.phi_chain_map)))?;
            emit(out, format!("{} ψ chain map", verdict(r.psi_chain_map)))?;
            emit(out, format!("{} ψ∘φ = id", verdict(r.psi_phi_identity)))?;
            emit(out, format!("{} φ∘ψ = id", verdict(r.phi_psi_identity)))?;
            for (n, (s, c)) in r.standard.iter().zip(&r.coarse).enumerate() {
                emit(out, format!("H{n} standard {s} coarse {c}"))?;
            }
            Ok(code(r.holds()))
        }
        Command::Rips { entourage, max_dim, export, file } => {
            let loaded = load_valid(&file)?;
            let named = loaded.entourage(&entourage)?;
            let u = named.union(&named.invert())?.union(&Entourage::diagonal(loaded.space.size()))?;
            let rips = rips_complex(&loaded.space, &u, max_dim)?;
            let k = &rips.complex;
            for n in 0..=k.dimension().unwrap_or(0) {
                emit(out, format!("simplices {n} {}", k.count(n)))?;
            }
            print_groups(out, &simplicial_homology(k, max_dim.saturating_sub(1)))?;
            if let Some(path) = export {
                std::fs::write(&path, k.export()).map_err(|e| io_err(&path, e))?;
            }
            let report = k.validate();
            if !report.passed() {
                print_report(out, &report)?;
            }
            Ok(code(report.passed()))
        }
        Command::ChangeGroup { kind, hom, check_degree, out: target, file } => {
            let loaded = load_valid(&file)?;
            let hom = doc::load_hom(&doc::read_json::<HomDoc>(&hom)?)?;
            let change = match kind {
                KindArg::Res => ChangeKind::Res,
                KindArg::Bh => ChangeKind::Bh,
                KindArg::Qh => ChangeKind::Qh,
                KindArg::Ind => ChangeKind::Ind,
            };
            let result = change_group(change, &loaded.space, &hom)?;
            let report = result.validate();
            emit(out, format!("points {}", result.size()))?;
            emit(out, format!("group order {}", result.group().order()))?;
            emit(out, format!("orbits {}", result.action().orbits().len()))?;
            print_report(out, &report)?;
            let mut ok = report.passed();
            let transform = match kind {
                KindArg::Res => Some(TransformKind::Res),
                KindArg::Qh => Some(TransformKind::Qh),
                KindArg::Ind => Some(TransformKind::Ind),
                KindArg::Bh => None,
            };
            if let (Some(top), Some(t)) = (check_degree, transform) {
                let ct = chain_transform(t, &hom, &loaded.space, top, &cfg)?;
                let detail = ct.chain_map.clone().or(ct.well_defined.clone());
                match detail {
                    Some(w) => emit(out, format!("FAIL chain transformation: {w}"))?,
                    None => emit(out, format!("{} chain transformation", verdict(ct.holds())))?,
                }
                if let Some(note) = &ct.note {
                    emit(out, format!("note {note}"))?;
                }
                ok &= ct.holds();
            }
            let json = serde_json::to_string_pretty(&doc::space_doc(&result, None)).expect("documents serialize");
            match target {
                Some(path) => std::fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?,
                None => emit(out, json)?,
            }
            Ok(code(ok))
        }
        Command::Mackey { group, into, into_prime, file } => {
            let gamma = group.build();
            let iota = subgroup_inclusion(&gamma, &doc::parse_elements(&gamma, &into)?)?;
            let iota_prime = subgroup_inclusion(&gamma, &doc::parse_elements(&gamma, into_prime.as_deref().unwrap_or(&into))?)?;
            let loaded = load_valid(&file)?;
            let x = rebase(&loaded.space, &iota.source)?;
            let r = mackey_check(&x, &iota, &iota_prime)?;
            for s in &r.summands {
                emit(out, format!("summand γ = {} double coset {{{}}} size {}", s.representative, s.double_coset.join(","), s.summand_size))?;
            }
            emit(out, format!("left {} right {}", r.left_size, r.right_size))?;
            for w in r.iso.forward.iter().chain(&r.iso.backward) {
                emit(out, format!("witness {w}"))?;
            }
            emit(out, format!("{} isomorphism", verdict(r.holds())))?;
            Ok(code(r.holds()))
        }
        Command::Axioms { seed, trials, report, mutate, min_size, max_size, max_degree } => {
            if trials == 0 || min_size == 0 || min_size > max_size {
                return Err(CoarseError::Parse("need trials ≥ 1 and 1 ≤ min-size ≤ max-size".into()));
            }
            let cfg = SuiteConfig { seed, trials, min_size, max_size, max_degree, mutation: mutate, ..SuiteConfig::default() };
            let r = axiom_suite(&cfg);
            for c in &r.checks {
                let label = match c.verdict {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Unknown => "UNKNOWN",
                };
                emit(out, format!("{label} {} runs {} failures {}", c.name, c.runs, c.failures))?;
                if let Some(w) = &c.witness {
                    emit(out, format!("  witness {w}"))?;
                }
            }
            emit(out, format!("digest {}", r.digest))?;
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&r).expect("reports serialize");
                std::fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
            }
            Ok(code(r.passed()))
        }
        Command::Ctrl { command } => ctrl(command, out),
    }
}

fn load_ctrl(path: &Path) -> Result<(LoadedSpace, Arc<CtrlObject>, Option<Vec<usize>>)> {
    let (loaded, object, sub) = doc::load_object(&doc::read_json::<CtrlDoc>(path)?)?;
    let space_report = loaded.space.validate();
    if let Some(c) = space_report.checks.iter().find(|c| !c.passed) {
        return Err(CoarseError::Parse(format!("{}: space: {}: {}", path.display(), c.name, c.witness.clone().unwrap_or_default())));
    }
    Ok((loaded, Arc::new(object), sub))
}

fn require_valid(out: &mut dyn Write, object: &CtrlObject) -> Result<bool> {
    let report = object.validate();
    if !report.passed() {
        print_report(out, &report)?;
    }
    Ok(report.passed())
}

fn rows(m: &IntMatrix) -> String {
    let rows: Vec<String> = m.to_dense().iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")).collect();
    format!("[{}]", rows.join("; "))
}

fn sum(morphisms: Vec<CtrlMorphism>, source: &Arc<CtrlObject>, target: &Arc<CtrlObject>) -> Result<CtrlMorphism> {
    morphisms.into_iter().try_fold(CtrlMorphism::zero(source.clone(), target.clone()), |acc, f| acc.plus(&f))
}

fn ctrl(command: CtrlCommand, out: &mut dyn Write) -> Result<i32> {
    match command {
        CtrlCommand::Validate { file } => {
            let (_, object, _) = load_ctrl(&file)?;
            let report = object.validate();
            print_report(out, &report)?;
            Ok(code(report.passed()))
        }
        CtrlCommand::Functor { kind: FunctorKind::Bh, file } => {
            let (loaded, object, sub) = load_ctrl(&file)?;
            if !require_valid(out, &object)? {
                return Ok(EXIT_FAIL);
            }
            let sub = sub.ok_or_else(|| CoarseError::Parse(format!("{}: bh needs a subgroup field", file.display())))?;
            let iota = subgroup_inclusion(loaded.space.group(), &sub)?;
            let functor = BhFunctor::new(loaded.space.clone(), iota)?;
            let rep = functor.phi(&object)?;
            for (h, m) in rep.matrices.iter().enumerate() {
                emit(out, format!("Φ({}) = {}", rep.group.name(h), rows(m)))?;
            }
            let endos = hom_basis(&object, &object, loaded.space.coarse_max())?;
            let r = functor.round_trip(&[object], &endos);
            emit(out, format!("section {}", r.section.join(",")))?;
            for c in [&r.phi_psi_identity, &r.unit_isomorphism, &r.naturality] {
                match &c.witness {
                    Some(w) if !c.passed => emit(out, format!("FAIL {}: {w}", c.name))?,
                    _ => emit(out, format!("{} {}", verdict(c.passed), c.name))?,
                }
            }
            Ok(code(r.holds()))
        }
        CtrlCommand::Functor { kind: FunctorKind::Conv, file } => {
            let (loaded, object, _) = load_ctrl(&file)?;
            let set = GammaSet::new(loaded.space.names().to_vec(), loaded.space.action().clone())?;
            let conv = Convolution::new(set)?;
            let c = Arc::new(conv.preimage(&ConvObject { ranks: object.dims.clone() })?);
            let back = conv.phi(&c)?;
            let round = back.ranks == object.dims;
            emit(out, format!("{} Φ(preimage) has ranks {:?}", verdict(round), back.ranks))?;
            let r = conv.fullness(&c, &c)?;
            emit(out, format!("hom rank {} convolution rank {}", r.hom_rank, r.convolution_rank))?;
            emit(out, format!("{} faithful", verdict(r.faithful)))?;
            emit(out, format!("{} full", verdict(r.full)))?;
            Ok(code(round && r.faithful && r.full))
        }
        CtrlCommand::Karoubi { seed_set, file } => {
            let (loaded, c, _) = load_ctrl(&file)?;
            if !require_valid(out, &c)? {
                return Ok(EXIT_FAIL);
            }
            let space = loaded.space.clone();
            let seed = doc::parse_points(&space, &seed_set)?;
            let seed = space.action().saturate_set(&seed);
            let a = restrict(&c, &seed)?.object;
            let step = space.step_entourage();
            let f = sum(hom_basis(&a, &c, &step)?, &a, &c)?;
            let g = sum(hom_basis(&c, &a, &step)?, &c, &a)?;
            let family = BigFamily::generated(&space, &seed);
            let d = karoubi_complete(&f, &g, &family)?;
            emit(out, format!("stages {} → {}", d.stage_in, d.stage_out))?;
            emit(out, format!("D supported on {}", space.fmt_set(&d.piece.object.support)))?;
            match &d.commutes.witness {
                Some(w) if !d.commutes.passed => emit(out, format!("FAIL {}: {w}", d.commutes.name))?,
                _ => emit(out, format!("{} {}", verdict(d.commutes.passed), d.commutes.name))?,
            }
            Ok(code(d.commutes.passed))
        }
        CtrlCommand::QuotientHom { sub, file } => {
            let (loaded, c, _) = load_ctrl(&file)?;
            if !require_valid(out, &c)? {
                return Ok(EXIT_FAIL);
            }
            let sub = doc::parse_points(&loaded.space, &sub)?;
            let q = quotient_hom(&c, &c, &sub)?;
            emit(out, format!("hom rank {}", q.hom_rank))?;
            emit(out, format!("factoring rank {}", q.factoring_rank))?;
            emit(out, format!("quotient {}", q.quotient))?;
            emit(out, format!("blockwise quotient {}", q.simple_quotient))?;
            match &q.witness {
                Some(w) => emit(out, format!("differs: {w}"))?,
                None => emit(out, "agrees with the blockwise quotient")?,
            }
            Ok(EXIT_PASS)
        }
    }
}
