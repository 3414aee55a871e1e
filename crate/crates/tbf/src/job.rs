//! Jobs: one group/endomorphism pair and the commands to run on it.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Deserialize;
use tbf_core::abelian::{abelian_separating_quotient, coker_representatives, reidemeister_number_fg_abelian, reidemeister_number_zn};
use tbf_core::character::{character_table, tbft_verify};
use tbf_core::congruence::{gauss_congruence_check, periodic_orbit_decomposition, SequenceSource};
use tbf_core::extension::{
    build_separating_quotient, fiber_orbit_count, reidemeister_finiteness, reidemeister_number_extension, tbft_ff_certify, ExtensionError,
    Finiteness,
};
use tbf_core::ExtensionEndo;
use tbf_core::intertwiner::{intertwiner_class_function, RationalRep};
use tbf_core::twisted::twisted_classes;
use tbf_core::{Caps, ClassCount, FgAbelianEndo, FiniteEndo, IntMatrix, ReidemeisterSequence};

use crate::checks::property_suite;
use crate::input::{self, InputError, LoadedGroup};
use crate::report::{
    CertificateSection, ClassSection, CongruenceSection, FPointSection, PropertiesSection, Section, SeparationSection, SequenceSection,
    TbftSection,
};

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Finite,
    Abelian,
    Extension,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Reidemeister,
    Sequence(usize),
    Congruence(usize),
    Tbft(usize),
    Separate,
    Certify,
    Properties,
}

/// An expected value, either a count or the string `"infinite"`.
#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum CountLit {
    Finite(u64),
    Text(String),
}

impl CountLit {
    fn matches(&self, c: &ClassCount) -> bool {
        match (self, c) {
            (CountLit::Finite(v), ClassCount::Finite(r)) => r.to_u64() == Some(*v),
            (CountLit::Text(t), ClassCount::Infinite) => t.eq_ignore_ascii_case("infinite"),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    #[serde(default)]
    pub reidemeister: Option<CountLit>,
    #[serde(default)]
    pub sequence: Option<Vec<CountLit>>,
}

/// A job as stored in a corpus file. Paths are relative to the file.
///
/// * finite: `group` (group definition), `endo`, optional `rep`
/// * abelian: `matrix` (inline literal string or file) or `group` (f.g. abelian definition)
/// * extension: `group` (extension definition, which carries the endomorphism)
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: Kind,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub endo: Option<String>,
    #[serde(default)]
    pub matrix: Option<String>,
    #[serde(default)]
    pub rep: Option<String>,
    pub commands: Vec<Command>,
    #[serde(default)]
    pub expect: Option<Expect>,
    #[serde(skip)]
    pub base: PathBuf,
}

impl JobSpec {
    pub fn load(path: &Path) -> Result<JobSpec, InputError> {
        let mut spec: JobSpec = input::load_json(path)?;
        spec.base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        if spec.name.is_none() {
            spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(spec)
    }

    fn path(&self, p: &str) -> PathBuf {
        self.base.join(p)
    }

    fn origin(&self) -> String {
        self.name.clone().unwrap_or_else(|| "job".to_string())
    }

    /// Commands must suit the kind.
    pub fn check_commands(&self) -> Result<(), InputError> {
        for c in &self.commands {
            let ok = match (c, self.kind) {
                (Command::Reidemeister | Command::Sequence(_) | Command::Congruence(_), _) => true,
                (Command::Tbft(_), Kind::Finite | Kind::Extension) => true,
                (Command::Separate, Kind::Abelian | Kind::Extension) => true,
                (Command::Certify, Kind::Extension) => true,
                (Command::Properties, Kind::Finite) => true,
                _ => false,
            };
            if !ok {
                return Err(InputError::Field {
                    origin: self.origin(),
                    field: "commands".into(),
                    message: format!("{c:?} is not available for {:?} jobs", self.kind),
                });
            }
            if matches!(c, Command::Sequence(0) | Command::Congruence(0) | Command::Tbft(0)) {
                return Err(InputError::Field {
                    origin: self.origin(),
                    field: "commands".into(),
                    message: "lengths must be positive".into(),
                });
            }
        }
        Ok(())
    }
}

/// Engine failures after inputs validated; these are verification failures.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Engine(String),
}

impl RunError {
    pub fn is_input(&self) -> bool {
        matches!(self, RunError::Input(_))
    }
}

fn engine(e: impl std::fmt::Display) -> RunError {
    RunError::Engine(e.to_string())
}

#[derive(Clone, Debug)]
pub struct JobReport {
    pub name: String,
    pub kind: Kind,
    pub sections: Vec<Section>,
    /// Verification failures; empty means every check passed.
    pub failures: Vec<String>,
}

impl JobReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

enum Subject {
    Finite { group: LoadedGroup, endo: FiniteEndo, rep: Option<RationalRep> },
    Zn(IntMatrix),
    Fg(FgAbelianEndo),
    Extension(input::LoadedExtension),
}

pub fn run_job(spec: &JobSpec, caps: &Caps) -> Result<JobReport, RunError> {
    spec.check_commands()?;
    let origin = spec.origin();
    let missing = |f: &str| {
        RunError::Input(InputError::Field {
            origin: origin.clone(),
            field: f.to_string(),
            message: "required for this kind".into(),
        })
    };
    let subject = match spec.kind {
        Kind::Finite => {
            let group = input::load_group(&spec.path(spec.group.as_deref().ok_or_else(|| missing("group"))?), caps.closure)?;
            let endo = match &spec.endo {
                Some(p) => input::load_endo(&group, &spec.path(p))?,
                None => FiniteEndo::identity(&group.group),
            };
            let rep = spec.rep.as_deref().map(|p| input::load_rep(&group, &spec.path(p))).transpose()?;
            Subject::Finite { group, endo, rep }
        }
        Kind::Abelian => match (&spec.matrix, &spec.group) {
            (Some(m), None) => {
                let arg = if m.trim_start().starts_with('[') { m.clone() } else { spec.path(m).display().to_string() };
                Subject::Zn(input::parse_matrix_arg(&arg)?)
            }
            (None, Some(g)) => Subject::Fg(input::load_fg(&spec.path(g))?),
            _ => return Err(missing("matrix")),
        },
        Kind::Extension => {
            let path = spec.path(spec.group.as_deref().ok_or_else(|| missing("group"))?);
            Subject::Extension(input::load_extension(&path, caps.closure)?)
        }
    };
    let mut report = JobReport {
        name: origin,
        kind: spec.kind,
        sections: Vec::new(),
        failures: Vec::new(),
    };
    let commands = if spec.commands.is_empty() { vec![Command::Reidemeister] } else { spec.commands.clone() };
    for c in &commands {
        run_command(&subject, c, caps, &mut report)?;
    }
    if let Some(expect) = &spec.expect {
        check_expectations(&subject, expect, caps, &mut report)?;
    }
    Ok(report)
}

fn sequence(subject: &Subject, len: usize, caps: &Caps) -> Result<ReidemeisterSequence, RunError> {
    let (values, source) = match subject {
        Subject::Finite { endo, .. } => (
            (1..=len).map(|n| ClassCount::finite(twisted_classes(&endo.iterate(n)).len())).collect(),
            SequenceSource::Finite,
        ),
        Subject::Zn(m) => (
            (1..=len).map(|n| reidemeister_number_zn(m, n)).collect::<Result<_, _>>().map_err(engine)?,
            SequenceSource::Abelian,
        ),
        Subject::Fg(phi) => ((1..=len).map(|n| reidemeister_number_fg_abelian(phi, n)).collect(), SequenceSource::Abelian),
        Subject::Extension(ext) => {
            let mut values = Vec::with_capacity(len);
            for n in 1..=len {
                let power = ext.endo.power(n).map_err(engine)?;
                values.push(extension_count(&power, caps).map_err(engine)?);
            }
            (values, SequenceSource::Extension)
        }
    };
    Ok(ReidemeisterSequence::new(values, source))
}

/// Cokernels enumerated by the orbit count; much cheaper per element than a
/// materialized quotient, so the limit is larger.
pub const ORBIT_COUNT_CAP: usize = 1_000_000;

/// `R(φ)` through the separating quotient, falling back to counting orbits
/// on fiber cokernels when the quotient is over the cap. Powers of expanding
/// maps outgrow the quotient cap quickly.
pub fn extension_count(phi: &ExtensionEndo, caps: &Caps) -> Result<ClassCount, ExtensionError> {
    match reidemeister_number_extension(phi, caps) {
        Ok(c) => Ok(c.count),
        Err(ExtensionError::CapExceeded { .. }) => fiber_orbit_count(phi, ORBIT_COUNT_CAP),
        Err(e) => Err(e),
    }
}

fn run_command(subject: &Subject, command: &Command, caps: &Caps, report: &mut JobReport) -> Result<(), RunError> {
    match command {
        Command::Reidemeister => {
            let section = match subject {
                Subject::Finite { group, endo, rep } => {
                    let partition = twisted_classes(endo);
                    let mut classes: Vec<Vec<usize>> = partition
                        .classes()
                        .into_iter()
                        .map(|c| {
                            let mut c: Vec<usize> = c.into_iter().map(|x| group.to_user(x)).collect();
                            c.sort_unstable();
                            c
                        })
                        .collect();
                    classes.sort();
                    if let Some(rep) = rep {
                        let f = fpoint_section(rep, endo).map_err(engine)?;
                        report.sections.push(Section::FPoint(f));
                    }
                    ClassSection {
                        power: 1,
                        count: ClassCount::finite(classes.len()),
                        reps: Some(classes.iter().map(|c| c[0]).collect()),
                        classes: Some(classes),
                        labels: group.group.labels().map(|l| l.to_vec()),
                        detail: None,
                    }
                }
                Subject::Zn(m) => {
                    let count = reidemeister_number_zn(m, 1).map_err(engine)?;
                    let detail = count
                        .is_finite()
                        .then(|| coker_representatives(&m.identity_minus()).ok())
                        .flatten()
                        .map(|reps| format!("cokernel representatives: {}", format_vectors(&reps)));
                    ClassSection::bare(count, detail)
                }
                Subject::Fg(phi) => ClassSection::bare(reidemeister_number_fg_abelian(phi, 1), None),
                Subject::Extension(ext) => {
                    let count = reidemeister_number_extension(&ext.endo, caps).map_err(engine)?;
                    let detail = match reidemeister_finiteness(&ext.endo, caps) {
                        Finiteness::Infinite { fiber, growth } => Some(format!(
                            "fiber over {} has infinite cokernel; class counts on (Z^n/kZ^n) x| F: {}",
                            ext.top.to_user(fiber),
                            growth.iter().map(|(k, c)| format!("k={k}: {c}")).collect::<Vec<_>>().join(", ")
                        )),
                        Finiteness::Finite { .. } => Some(format!(
                            "stable under refinement: {}",
                            count.stabilization.iter().map(|(k, c)| format!("k={k}: {c}")).collect::<Vec<_>>().join(", ")
                        )),
                    };
                    ClassSection::bare(count.count, detail)
                }
            };
            report.sections.push(Section::Classes(section));
        }
        Command::Sequence(len) => {
            let seq = sequence(subject, *len, caps)?;
            report.sections.push(Section::Sequence(SequenceSection {
                source: seq.source.to_string(),
                values: seq.values,
            }));
        }
        Command::Congruence(len) => {
            let seq = sequence(subject, *len, caps)?;
            match gauss_congruence_check(&seq) {
                Ok(rep) => {
                    let orbits = periodic_orbit_decomposition(&seq).ok();
                    if !rep.pass() || orbits.is_none() {
                        report.failures.push(format!("congruences fail for the first {len} powers"));
                    }
                    report.sections.push(Section::Congruence(CongruenceSection { report: rep, orbits }));
                }
                Err(e) => report.failures.push(format!("congruence check: {e}")),
            }
        }
        Command::Tbft(len) => match subject {
            Subject::Finite { endo, .. } => {
                let table = character_table(endo.group(), caps.char_table_order).map_err(engine)?;
                let rep = tbft_verify(endo, &table, *len).map_err(engine)?;
                if !rep.pass {
                    report.failures.push("twisted class count differs from fixed character count".into());
                }
                report.sections.push(Section::Tbft(TbftSection { rows: rep.rows, pass: rep.pass }));
            }
            Subject::Extension(ext) => {
                let mut rows = Vec::new();
                for n in 1..=*len {
                    let power = ext.endo.power(n).map_err(engine)?;
                    let cert = tbft_ff_certify(&power, caps).map_err(engine)?;
                    rows.push((n, cert.reidemeister, cert.fixed_characters));
                }
                let pass = rows.iter().all(|&(_, r, f)| r == f);
                if !pass {
                    report.failures.push("twisted class count differs from fixed character count".into());
                }
                report.sections.push(Section::Tbft(TbftSection { rows, pass }));
            }
            _ => unreachable!("checked by check_commands"),
        },
        Command::Separate => {
            let section = match subject {
                Subject::Zn(m) => {
                    let q = abelian_separating_quotient(m).map_err(engine)?;
                    SeparationSection {
                        basis: q.lattice.basis().to_rows(),
                        index: q.order.clone().into(),
                        quotient_order: q.order.into(),
                        invariant_factors: Some(q.invariant_factors),
                        closure_rounds: None,
                    }
                }
                Subject::Extension(ext) => {
                    let sq = build_separating_quotient(&ext.endo, caps).map_err(engine)?;
                    SeparationSection {
                        basis: sq.sublattice.basis().to_rows(),
                        index: sq.sublattice.index().into(),
                        quotient_order: BigInt::from(sq.quotient_group.order()),
                        invariant_factors: None,
                        closure_rounds: Some(sq.closure_rounds),
                    }
                }
                Subject::Fg(_) => {
                    return Err(engine("separating quotients are built for free abelian groups and extensions"));
                }
                Subject::Finite { .. } => unreachable!("checked by check_commands"),
            };
            report.sections.push(Section::Separation(section));
        }
        Command::Certify => {
            let Subject::Extension(ext) = subject else { unreachable!("checked by check_commands") };
            let cert = tbft_ff_certify(&ext.endo, caps).map_err(engine)?;
            if !cert.certified {
                report.failures.push("finite-quotient certificate failed".into());
            }
            report.sections.push(Section::Certificate(CertificateSection::from(&cert)));
        }
        Command::Properties => {
            let Subject::Finite { endo, .. } = subject else { unreachable!("checked by check_commands") };
            let suite = property_suite(endo, 6);
            for o in suite.outcomes.iter().filter(|o| !o.holds) {
                report.failures.push(format!("property failed: {}", o.name));
            }
            report.sections.push(Section::Properties(PropertiesSection { suite }));
        }
    }
    Ok(())
}

fn fpoint_section(rep: &RationalRep, endo: &FiniteEndo) -> Result<FPointSection, tbf_core::intertwiner::RepresentationError> {
    let found = intertwiner_class_function(rep, endo)?;
    Ok(FPointSection {
        dimension: rep.dim(),
        fixed: found.is_some(),
        solution_dimension: found.as_ref().map_or(0, |i| i.solution_dimension),
    })
}

fn check_expectations(subject: &Subject, expect: &Expect, caps: &Caps, report: &mut JobReport) -> Result<(), RunError> {
    if let Some(want) = &expect.reidemeister {
        let got = sequence(subject, 1, caps)?.values.remove(0);
        if !want.matches(&got) {
            report.failures.push(format!("expected R = {want:?}, computed {got}"));
        }
    }
    if let Some(want) = &expect.sequence {
        let got = sequence(subject, want.len(), caps)?;
        for (n, (w, g)) in want.iter().zip(&got.values).enumerate() {
            if !w.matches(g) {
                report.failures.push(format!("expected R(phi^{}) = {w:?}, computed {g}", n + 1));
            }
        }
    }
    Ok(())
}

pub fn format_vectors(vs: &[Vec<BigInt>]) -> String {
    let parts: Vec<String> = vs
        .iter()
        .map(|v| format!("({})", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")))
        .collect();
    parts.join(" ")
}

/// Convenience used by the CLI for jobs given by flags rather than files.
pub fn job_from_flags(kind: Kind, group: Option<&Path>, endo: Option<&Path>, matrix: Option<&str>, rep: Option<&Path>, commands: Vec<Command>) -> JobSpec {
    let s = |p: Option<&Path>| p.map(|p| p.display().to_string());
    JobSpec {
        name: group.map(|g| g.display().to_string()).or_else(|| matrix.map(str::to_string)),
        kind,
        group: s(group),
        endo: s(endo),
        matrix: matrix.map(str::to_string),
        rep: s(rep),
        commands,
        expect: None,
        base: PathBuf::from("."),
    }
}
