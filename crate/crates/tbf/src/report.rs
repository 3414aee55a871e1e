//! Rendering job results as text tables, JSON and CSV.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde_json::{json, Value};
use tbf_core::congruence::CongruenceReport;
use tbf_core::extension::FfCertificate;
use tbf_core::{CharTable, ClassCount};

use crate::checks::PropertySuite;
use crate::input::LoadedGroup;
use crate::job::{JobReport, Kind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct ClassSection {
    pub power: usize,
    pub count: ClassCount,
    pub classes: Option<Vec<Vec<usize>>>,
    pub reps: Option<Vec<usize>>,
    pub labels: Option<Vec<String>>,
    pub detail: Option<String>,
}

impl ClassSection {
    pub fn bare(count: ClassCount, detail: Option<String>) -> Self {
        ClassSection {
            power: 1,
            count,
            classes: None,
            reps: None,
            labels: None,
            detail,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SequenceSection {
    pub source: String,
    pub values: Vec<ClassCount>,
}

#[derive(Clone, Debug)]
pub struct CongruenceSection {
    pub report: CongruenceReport,
    /// `(d, P_d/d)`; absent when the decomposition failed.
    pub orbits: Option<Vec<(usize, num_bigint::BigUint)>>,
}

#[derive(Clone, Debug)]
pub struct TbftSection {
    pub rows: Vec<(usize, usize, usize)>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct SeparationSection {
    pub basis: Vec<Vec<BigInt>>,
    pub index: BigInt,
    pub quotient_order: BigInt,
    pub invariant_factors: Option<Vec<BigInt>>,
    pub closure_rounds: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct CertificateSection {
    pub basis: Vec<Vec<BigInt>>,
    pub index: BigInt,
    pub quotient_order: usize,
    pub reidemeister: usize,
    pub fixed_characters: usize,
    pub stabilization: Vec<(i64, usize)>,
    pub certified: bool,
}

impl From<&FfCertificate> for CertificateSection {
    fn from(c: &FfCertificate) -> Self {
        CertificateSection {
            basis: c.sublattice.basis().to_rows(),
            index: c.sublattice.index().into(),
            quotient_order: c.quotient_order,
            reidemeister: c.reidemeister,
            fixed_characters: c.fixed_characters,
            stabilization: c.stabilization.clone(),
            certified: c.certified,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PropertiesSection {
    pub suite: PropertySuite,
}

#[derive(Clone, Debug)]
pub struct FPointSection {
    pub dimension: usize,
    pub fixed: bool,
    pub solution_dimension: usize,
}

#[derive(Clone, Debug)]
pub enum Section {
    Classes(ClassSection),
    Sequence(SequenceSection),
    Congruence(CongruenceSection),
    Tbft(TbftSection),
    Separation(SeparationSection),
    Certificate(CertificateSection),
    Properties(PropertiesSection),
    FPoint(FPointSection),
}

pub fn big(v: &BigInt) -> Value {
    i64::try_from(v).map_or_else(|_| Value::String(v.to_string()), Value::from)
}

pub fn count(c: &ClassCount) -> Value {
    match c {
        ClassCount::Finite(r) => big(&BigInt::from(r.clone())),
        ClassCount::Infinite => Value::String("infinite".into()),
    }
}

fn matrix(rows: &[Vec<BigInt>]) -> Value {
    Value::Array(rows.iter().map(|r| Value::Array(r.iter().map(big).collect())).collect())
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Finite => "finite",
        Kind::Abelian => "abelian",
        Kind::Extension => "extension",
    }
}

impl Section {
    pub fn to_json(&self) -> Value {
        match self {
            Section::Classes(s) => {
                let mut v = json!({ "type": "reidemeister", "R": count(&s.count), "power": s.power });
                if let Some(c) = &s.classes {
                    v["classes"] = json!(c);
                }
                if let Some(r) = &s.reps {
                    v["reps"] = json!(r);
                }
                if let Some(d) = &s.detail {
                    v["detail"] = json!(d);
                }
                v
            }
            Section::Sequence(s) => json!({
                "type": "sequence",
                "source": s.source,
                "R": s.values.iter().map(count).collect::<Vec<_>>(),
            }),
            Section::Congruence(s) => json!({
                "type": "congruence",
                "pass": s.report.pass(),
                "per_n": s.report.rows.iter().map(|r| json!({
                    "n": r.n,
                    "R": big(&BigInt::from(r.r.clone())),
                    "S_n": big(&r.sum),
                    "S_n_mod_n": big(&r.residue),
                    "pass": r.pass,
                })).collect::<Vec<_>>(),
                "P_n": s.report.rows.iter().map(|r| big(&r.sum)).collect::<Vec<_>>(),
                "orbits": s.orbits.as_ref().map(|o| o.iter().map(|(d, c)| json!({
                    "period": d,
                    "count": big(&BigInt::from(c.clone())),
                })).collect::<Vec<_>>()),
            }),
            Section::Tbft(s) => json!({
                "type": "tbft",
                "pass": s.pass,
                "rows": s.rows.iter().map(|&(n, r, f)| json!({ "n": n, "R": r, "fixed_characters": f })).collect::<Vec<_>>(),
            }),
            Section::Separation(s) => {
                let mut v = json!({
                    "type": "separating_quotient",
                    "basis": matrix(&s.basis),
                    "index": big(&s.index),
                    "quotient_order": big(&s.quotient_order),
                });
                if let Some(f) = &s.invariant_factors {
                    v["invariant_factors"] = Value::Array(f.iter().map(big).collect());
                }
                if let Some(r) = s.closure_rounds {
                    v["closure_rounds"] = json!(r);
                }
                v
            }
            Section::Certificate(s) => json!({
                "type": "certificate",
                "basis": matrix(&s.basis),
                "index": big(&s.index),
                "quotient_order": s.quotient_order,
                "R": s.reidemeister,
                "fixed_characters": s.fixed_characters,
                "stabilization": s.stabilization.iter().map(|(k, c)| json!({ "k": k, "R": c })).collect::<Vec<_>>(),
                "certified": s.certified,
            }),
            Section::Properties(s) => json!({
                "type": "properties",
                "pass": s.suite.pass(),
                "outcomes": s.suite.outcomes,
                "restriction_bound": s.suite.restriction,
            }),
            Section::FPoint(s) => json!({
                "type": "representation",
                "dimension": s.dimension,
                "fixed": s.fixed,
                "intertwiner_dimension": s.solution_dimension,
            }),
        }
    }

    pub fn to_table(&self, out: &mut String) {
        match self {
            Section::Classes(s) => {
                let _ = writeln!(out, "R(phi) = {}", s.count);
                if let Some(d) = &s.detail {
                    let _ = writeln!(out, "  {d}");
                }
                if let (Some(classes), Some(reps)) = (&s.classes, &s.reps) {
                    let _ = writeln!(out, "  {:>5}  {:>5}  {:>5}  members", "class", "rep", "size");
                    for (i, (c, r)) in classes.iter().zip(reps).enumerate() {
                        let members: Vec<String> = match &s.labels {
                            Some(l) => c.iter().map(|&x| l[x].clone()).collect(),
                            None => c.iter().map(ToString::to_string).collect(),
                        };
                        let _ = writeln!(out, "  {:>5}  {:>5}  {:>5}  {}", i, r, c.len(), members.join(" "));
                    }
                }
            }
            Section::Sequence(s) => {
                let _ = writeln!(out, "{:>4}  R(phi^n)", "n");
                for (i, v) in s.values.iter().enumerate() {
                    let _ = writeln!(out, "{:>4}  {}", i + 1, v);
                }
            }
            Section::Congruence(s) => {
                let _ = writeln!(out, "{:>4}  {:>12}  {:>12}  {:>8}  {:>10}  pass", "n", "R", "S_n", "S_n mod n", "P_n/n");
                for r in &s.report.rows {
                    let orbits = s
                        .orbits
                        .as_ref()
                        .map_or_else(|| "-".to_string(), |o| o[r.n - 1].1.to_string());
                    let _ = writeln!(
                        out,
                        "{:>4}  {:>12}  {:>12}  {:>9}  {:>10}  {}",
                        r.n,
                        r.r,
                        r.sum,
                        r.residue,
                        orbits,
                        if r.pass { "yes" } else { "NO" }
                    );
                }
                let _ = writeln!(out, "congruences: {}", if s.report.pass() { "pass" } else { "FAIL" });
            }
            Section::Tbft(s) => {
                let _ = writeln!(out, "{:>4}  {:>6}  {:>6}", "n", "R", "fixed");
                for &(n, r, f) in &s.rows {
                    let _ = writeln!(out, "{n:>4}  {r:>6}  {f:>6}{}", if r == f { "" } else { "  MISMATCH" });
                }
                let _ = writeln!(out, "tbft: {}", if s.pass { "pass" } else { "FAIL" });
            }
            Section::Separation(s) => {
                let _ = writeln!(out, "separating sublattice (HNF basis, columns):");
                for row in &s.basis {
                    let _ = writeln!(out, "  {}", row.iter().map(|x| format!("{x:>4}")).collect::<String>());
                }
                let _ = writeln!(out, "index {}, quotient order {}", s.index, s.quotient_order);
                if let Some(f) = s.invariant_factors.as_ref().filter(|f| !f.is_empty()) {
                    let f: Vec<String> = f.iter().map(ToString::to_string).collect();
                    let _ = writeln!(out, "invariant factors: {}", f.join(" "));
                }
                if let Some(r) = s.closure_rounds {
                    let _ = writeln!(out, "closure rounds: {r}");
                }
            }
            Section::Certificate(s) => {
                let _ = writeln!(out, "certificate: quotient of order {} (sublattice index {})", s.quotient_order, s.index);
                let _ = writeln!(out, "  R = {}, fixed characters = {}", s.reidemeister, s.fixed_characters);
                let stab: Vec<String> = s.stabilization.iter().map(|(k, c)| format!("k={k}: {c}")).collect();
                let _ = writeln!(out, "  refinements: {}", stab.join(", "));
                let _ = writeln!(out, "  certified: {}", if s.certified { "yes" } else { "NO" });
            }
            Section::Properties(s) => {
                for o in &s.suite.outcomes {
                    let _ = writeln!(
                        out,
                        "{:<4} {} ({} checked){}",
                        if o.holds { "ok" } else { "FAIL" },
                        o.name,
                        o.instances,
                        o.witness.as_ref().map_or_else(String::new, |w| format!(": {w}"))
                    );
                }
                if !s.suite.restriction.is_empty() {
                    let _ = writeln!(out, "restriction bound, per invariant normal subgroup H:");
                    let _ = writeln!(out, "  {:>4}  {:>8}  {:>4}  {:>4}  {:>6}  R-reading  k(G)-reading", "|H|", "R(phi|H)", "R", "k(G)", "|Fix|");
                    for r in &s.suite.restriction {
                        let _ = writeln!(
                            out,
                            "  {:>4}  {:>8}  {:>4}  {:>4}  {:>6}  {:<9}  {}",
                            r.subgroup_order, r.restricted, r.number, r.conjugacy_classes, r.quotient_fixed, r.endo_reading, r.group_reading
                        );
                    }
                }
            }
            Section::FPoint(s) => {
                let _ = writeln!(
                    out,
                    "representation of degree {}: {} (intertwiner space of dimension {})",
                    s.dimension,
                    if s.fixed { "fixed by phi" } else { "not fixed by phi" },
                    s.solution_dimension
                );
            }
        }
    }

    fn csv_records(&self) -> Vec<Vec<String>> {
        let s = |x: &dyn ToString| x.to_string();
        match self {
            Section::Classes(c) => match (&c.classes, &c.reps) {
                (Some(classes), Some(reps)) => {
                    let mut rows = vec![vec!["class".into(), "rep".into(), "size".into(), "members".into()]];
                    for (i, (cl, r)) in classes.iter().zip(reps).enumerate() {
                        let m: Vec<String> = cl.iter().map(ToString::to_string).collect();
                        rows.push(vec![s(&i), s(r), s(&cl.len()), m.join(" ")]);
                    }
                    rows
                }
                _ => vec![vec!["R".into()], vec![s(&c.count)]],
            },
            Section::Sequence(q) => {
                let mut rows = vec![vec!["n".into(), "R".into()]];
                rows.extend(q.values.iter().enumerate().map(|(i, v)| vec![s(&(i + 1)), s(v)]));
                rows
            }
            Section::Congruence(c) => c.report.to_csv_rows().into_iter().map(|r| r.to_vec()).collect(),
            Section::Tbft(t) => {
                let mut rows = vec![vec!["n".into(), "R".into(), "fixed_characters".into()]];
                rows.extend(t.rows.iter().map(|(n, r, f)| vec![s(n), s(r), s(f)]));
                rows
            }
            Section::Separation(p) => vec![
                vec!["index".into(), "quotient_order".into()],
                vec![s(&p.index), s(&p.quotient_order)],
            ],
            Section::Certificate(c) => vec![
                vec!["quotient_order".into(), "R".into(), "fixed_characters".into(), "certified".into()],
                vec![s(&c.quotient_order), s(&c.reidemeister), s(&c.fixed_characters), s(&c.certified)],
            ],
            Section::Properties(p) => {
                let mut rows = vec![vec!["property".into(), "holds".into(), "instances".into()]];
                rows.extend(p.suite.outcomes.iter().map(|o| vec![o.name.to_string(), s(&o.holds), s(&o.instances)]));
                rows
            }
            Section::FPoint(f) => vec![
                vec!["dimension".into(), "fixed".into(), "intertwiner_dimension".into()],
                vec![s(&f.dimension), s(&f.fixed), s(&f.solution_dimension)],
            ],
        }
    }
}

pub fn render(report: &JobReport, format: Format) -> String {
    match format {
        Format::Json => {
            let v = json!({
                "job": report.name,
                "kind": kind_name(report.kind),
                "pass": report.pass(),
                "failures": report.failures,
                "sections": report.sections.iter().map(Section::to_json).collect::<Vec<_>>(),
            });
            let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "== {} ({})", report.name, kind_name(report.kind));
            for s in &report.sections {
                s.to_table(&mut out);
            }
            for f in &report.failures {
                let _ = writeln!(out, "FAILED: {f}");
            }
            out
        }
        Format::Csv => {
            let mut blocks = Vec::new();
            for s in &report.sections {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in s.csv_records() {
                    w.write_record(&r).expect("in-memory write");
                }
                blocks.push(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
            }
            blocks.join("\n")
        }
    }
}

/// Character table in file indexing: classes, sizes, degrees and values as
/// coordinate vectors over `ℤ[ζ_e]` in the power basis.
pub fn char_table_json(table: &CharTable, group: &LoadedGroup) -> Value {
    let classes: Vec<Vec<usize>> = table
        .classes()
        .classes()
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|x| group.to_user(x)).collect();
            c.sort_unstable();
            c
        })
        .collect();
    json!({
        "order": table.group().order(),
        "cyclotomic_order": table.field().order(),
        "classes": classes,
        "class_sizes": table.class_sizes(),
        "degrees": table.degrees(),
        "values": table.values().iter().map(|row| row.iter().map(|c| c.0.clone()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn failure_record(kind: &str, message: &str, witness: Option<Value>) -> String {
    let mut v = json!({ "status": "error", "error": kind, "message": message });
    if let Some(w) = witness {
        v["witness"] = w;
    }
    v.to_string()
}
