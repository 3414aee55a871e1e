//! The acceptance criteria as runnable checks, plus the runner for a
//! directory of job files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tbf_core::abelian::{reduction_mod, reidemeister_number_fg_abelian, reidemeister_number_zn};
use tbf_core::character::{character_table, f_point_count, irreducibility_persistence, tbft_verify};
use tbf_core::congruence::{gauss_congruence_check, periodic_orbit_decomposition, CongruenceError, SequenceSource};
use tbf_core::extension::{build_separating_quotient, fiber_orbit_count, reidemeister_number_extension, tbft_ff_certify};
use tbf_core::group::validate_endo;
use tbf_core::twisted::{burnside_average, reidemeister_number, twisted_classes};
use tbf_core::{Caps, CharTable, ClassCount, FgAbelian, FgAbelianEndo, IntMatrix, ReidemeisterSequence};

use crate::checks::property_suite;
use crate::corpus::{extension_corpus, finite_corpus, smoke_corpus, CorpusGroup};
use crate::input::InputError;
use crate::job::{extension_count, run_job, JobSpec, ORBIT_COUNT_CAP};
use crate::report::{failure_record, render, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// A few small groups and fewer random samples.
    Smoke,
    Full,
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
    pub time_limit: Option<Duration>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    pub fn within_time(&self) -> bool {
        self.time_limit.is_none_or(|t| self.elapsed <= t)
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty() && self.checks > 0 && self.within_time()
    }

    /// One summary line, then indented notes and up to five failures.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let limit = self.time_limit.map(|t| format!(" (limit {}s)", t.as_secs())).unwrap_or_default();
        let _ = writeln!(
            out,
            "[{}] criterion {}: {}: {} checks, {} failures, {:.2}s{}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.checks,
            self.failures.len(),
            self.elapsed.as_secs_f64(),
            limit
        );
        for n in &self.notes {
            let _ = writeln!(out, "    {n}");
        }
        for f in self.failures.iter().take(5) {
            let _ = writeln!(out, "    failure: {f}");
        }
        if self.failures.len() > 5 {
            let _ = writeln!(out, "    ... {} more", self.failures.len() - 5);
        }
        out
    }
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, id: u8, title: &'static str, start: Instant, limit: Option<u64>) -> CriterionResult {
        CriterionResult {
            id,
            title,
            checks: self.checks,
            failures: self.failures,
            elapsed: start.elapsed(),
            time_limit: limit.map(Duration::from_secs),
            notes: self.notes,
        }
    }
}

fn groups(suite: Suite, caps: &Caps) -> Vec<CorpusGroup> {
    match suite {
        Suite::Smoke => smoke_corpus(caps),
        Suite::Full => finite_corpus(caps),
    }
}

fn table(g: &CorpusGroup, caps: &Caps, tally: &mut Tally) -> Option<CharTable> {
    match character_table(&g.group, caps.char_table_order) {
        Ok(t) => Some(t),
        Err(e) => {
            tally.check(false, || format!("{}: character table: {e}", g.name));
            None
        }
    }
}

const MAX_POWER: usize = 4;

pub fn tbft_equality(suite: Suite, caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    for g in groups(suite, caps) {
        let Some(table) = table(&g, caps, &mut t) else { continue };
        for (i, phi) in g.endomorphisms().iter().enumerate() {
            match tbft_verify(phi, &table, MAX_POWER) {
                Ok(rep) => {
                    for &(n, r, f) in &rep.rows {
                        t.check(r == f, || format!("{} endo #{i}, power {n}: R = {r}, fixed characters = {f}", g.name));
                    }
                }
                Err(e) => t.check(false, || format!("{} endo #{i}: {e}", g.name)),
            }
        }
    }
    t.finish(1, "twisted classes = fixed irreducible characters", start, Some(60))
}

pub fn oracle_equivalence(suite: Suite, caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    for g in groups(suite, caps) {
        for (i, phi) in g.endomorphisms().iter().enumerate() {
            for n in 1..=MAX_POWER {
                let orbits = reidemeister_number(phi, n);
                match burnside_average(&phi.iterate(n)) {
                    Ok(avg) => t.check(orbits == avg, || format!("{} endo #{i}, power {n}: {orbits} vs {avg}", g.name)),
                    Err(e) => t.check(false, || format!("{} endo #{i}, power {n}: {e}", g.name)),
                }
            }
        }
    }
    t.finish(2, "orbit enumeration = Burnside average", start, None)
}

/// `true` if the sequence had an infinite term and was skipped.
fn congruence_case(seq: &ReidemeisterSequence, label: &dyn Fn() -> String, t: &mut Tally) -> bool {
    match gauss_congruence_check(seq) {
        Err(CongruenceError::InfiniteTerm(_)) => true,
        Err(e) => {
            t.check(false, || format!("{}: {e}", label()));
            false
        }
        Ok(rep) => {
            let decomposed = periodic_orbit_decomposition(seq);
            t.check(rep.pass() && decomposed.is_ok(), || {
                let bad: Vec<usize> = rep.rows.iter().filter(|r| !r.pass).map(|r| r.n).collect();
                format!("{}: failing n {bad:?}, decomposition {:?}", label(), decomposed.err())
            });
            false
        }
    }
}

fn int_matrix(dim: usize, entries: &[i64]) -> IntMatrix {
    let rows: Vec<Vec<i64>> = entries.chunks(dim).map(<[i64]>::to_vec).collect();
    IntMatrix::from_rows(&rows).expect("rectangular")
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize, bound: i64) -> IntMatrix {
    let entries: Vec<i64> = (0..dim * dim).map(|_| rng.gen_range(-bound..=bound)).collect();
    int_matrix(dim, &entries)
}

const SEED: u64 = 0x7bf7;

pub fn gauss_congruences(suite: Suite, caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();

    let finite_before = t.checks;
    for g in groups(suite, caps) {
        for (i, phi) in g.endomorphisms().iter().enumerate() {
            let values = (1..=6).map(|n| ClassCount::finite(reidemeister_number(phi, n))).collect();
            let seq = ReidemeisterSequence::new(values, SequenceSource::Finite);
            congruence_case(&seq, &|| format!("{} endo #{i}", g.name), &mut t);
        }
    }
    let finite = t.checks - finite_before;

    let mut matrices: Vec<IntMatrix> = (-3..=3).map(|a| int_matrix(1, &[a])).collect();
    let dim2: Vec<IntMatrix> = match suite {
        Suite::Full => {
            let mut all = Vec::new();
            for code in 0..7usize.pow(4) {
                let entries: Vec<i64> = (0..4).map(|k| (code / 7usize.pow(k)) as i64 % 7 - 3).collect();
                all.push(int_matrix(2, &entries));
            }
            all
        }
        Suite::Smoke => {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            (0..100).map(|_| random_matrix(&mut rng, 2, 3)).collect()
        }
    };
    matrices.extend(dim2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let dim3 = if suite == Suite::Full { 300 } else { 30 };
    matrices.extend((0..dim3).map(|_| random_matrix(&mut rng, 3, 3)));
    let (mut abelian, mut abelian_skipped) = (0, 0);
    for m in &matrices {
        let values: Result<Vec<ClassCount>, _> = (1..=8).map(|n| reidemeister_number_zn(m, n)).collect();
        match values {
            Ok(values) => {
                let seq = ReidemeisterSequence::new(values, SequenceSource::Abelian);
                if congruence_case(&seq, &|| format!("matrix {:?}", m.to_rows()), &mut t) {
                    abelian_skipped += 1;
                } else {
                    abelian += 1;
                }
            }
            Err(e) => t.check(false, || format!("matrix {:?}: {e}", m.to_rows())),
        }
    }

    let (mut extensions, mut ext_skipped) = (0, 0);
    for inst in extension_corpus() {
        let mut values = Vec::new();
        for n in 1..=4 {
            match inst.endo.power(n).and_then(|p| extension_count(&p, caps)) {
                Ok(c) => values.push(c),
                Err(e) => {
                    t.check(false, || format!("{}, power {n}: {e}", inst.name));
                    break;
                }
            }
        }
        if values.len() == 4 {
            let seq = ReidemeisterSequence::new(values, SequenceSource::Extension);
            if congruence_case(&seq, &|| inst.name.to_string(), &mut t) {
                ext_skipped += 1;
            } else {
                extensions += 1;
            }
        }
    }
    t.notes.push(format!("finite sequences (n <= 6): {finite}"));
    t.notes.push(format!(
        "abelian sequences (n <= 8): {abelian} checked, {abelian_skipped} skipped for an infinite term"
    ));
    t.notes.push(format!(
        "extension sequences (n <= 4): {extensions} checked, {ext_skipped} skipped for an infinite term"
    ));
    t.finish(3, "Gauss congruences", start, None)
}

pub fn abelian_quotients(suite: Suite, _caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let samples = if suite == Suite::Full { 240 } else { 30 };
    for i in 0..samples {
        let dim = 1 + i % 3;
        let m = random_matrix(&mut rng, dim, 9);
        for modulus in 2..=5usize {
            let label = || format!("{:?} mod {modulus}", m.to_rows());
            let group = FgAbelian::new(0, vec![BigInt::from(modulus); dim]).expect("equal moduli divide each other");
            let fg = match FgAbelianEndo::new(group, m.clone()) {
                Ok(fg) => fg,
                Err(e) => {
                    t.check(false, || format!("{}: {e}", label()));
                    continue;
                }
            };
            let formula = reidemeister_number_fg_abelian(&fg, 1);
            let (g, map) = reduction_mod(&m, modulus);
            let brute = validate_endo(&Arc::new(g), map).map(|phi| twisted_classes(&phi).len());
            match brute {
                Ok(b) => t.check(formula == ClassCount::finite(b), || format!("{}: formula {formula}, enumeration {b}", label())),
                Err(e) => t.check(false, || format!("{}: {e}", label())),
            }
        }
    }
    t.notes.push(format!("{samples} random matrices of dimension 1..3, entries in [-9, 9], moduli 2..5"));
    t.finish(4, "abelian cokernel count = enumeration on (Z/m)^n", start, None)
}

pub fn extension_certificates(_suite: Suite, caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    let corpus = extension_corpus();
    for inst in &corpus {
        let phi = &inst.endo;
        match build_separating_quotient(phi, caps) {
            Ok(_) => t.check(true, String::new),
            Err(e) => t.check(false, || format!("{}: separating quotient: {e}", inst.name)),
        }
        let count = match reidemeister_number_extension(phi, caps) {
            Ok(c) => {
                let stable = c.stabilization.iter().all(|(_, r)| ClassCount::finite(*r) == c.count);
                t.check(stable, || format!("{}: refinement counts {:?} vs {}", inst.name, c.stabilization, c.count));
                Some(c.count)
            }
            Err(e) => {
                t.check(false, || format!("{}: {e}", inst.name));
                None
            }
        };
        match tbft_ff_certify(phi, caps) {
            Ok(cert) => t.check(cert.certified && cert.reidemeister == cert.fixed_characters, || {
                format!("{}: R = {}, fixed characters = {}", inst.name, cert.reidemeister, cert.fixed_characters)
            }),
            Err(e) => t.check(false, || format!("{}: certificate: {e}", inst.name)),
        }
        if let Some(count) = count {
            match fiber_orbit_count(phi, ORBIT_COUNT_CAP) {
                Ok(orbits) => t.check(orbits == count, || format!("{}: fiber orbits {orbits} vs quotient {count}", inst.name)),
                Err(e) => t.check(false, || format!("{}: fiber orbits: {e}", inst.name)),
            }
        }
    }
    t.notes.push(format!("{} extension instances", corpus.len()));
    t.finish(5, "finite-quotient certification on Z^n x| F", start, Some(120))
}

pub fn structural_properties(suite: Suite, caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    let (mut rows, mut endo_reading, mut group_reading) = (0, 0, 0);
    for g in groups(suite, caps) {
        for (i, phi) in g.endomorphisms().iter().enumerate() {
            let suite = property_suite(phi, MAX_POWER);
            for o in &suite.outcomes {
                t.check(o.holds, || format!("{} endo #{i}: {} ({})", g.name, o.name, o.witness.clone().unwrap_or_default()));
            }
            for r in &suite.restriction {
                rows += 1;
                endo_reading += usize::from(r.endo_reading);
                group_reading += usize::from(r.group_reading);
            }
        }
    }
    t.notes.push(format!(
        "restriction bound over {rows} (endomorphism, invariant normal subgroup) pairs: \
         holds in {endo_reading} with R(phi) as the factor, in {group_reading} with the class count of G"
    ));
    t.finish(6, "structural properties of twisted classes", start, None)
}

pub fn persistence(suite: Suite, caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    for g in groups(suite, caps) {
        let Some(table) = table(&g, caps, &mut t) else { continue };
        for (i, phi) in g.endomorphisms().iter().enumerate() {
            for n in 1..=MAX_POWER {
                let fixed = match f_point_count(phi, &table, n) {
                    Ok(r) => r.fixed_character_ids,
                    Err(e) => {
                        t.check(false, || format!("{} endo #{i}: {e}", g.name));
                        continue;
                    }
                };
                for chi in fixed {
                    match irreducibility_persistence(phi, &table, chi, n, 6) {
                        Ok(rep) => t.check(rep.pass, || {
                            format!("{} endo #{i}, power {n}, character {chi}: norms {:?}", g.name, rep.norms)
                        }),
                        Err(e) => t.check(false, || format!("{} endo #{i}: {e}", g.name)),
                    }
                }
            }
        }
    }
    t.finish(7, "fixed characters stay irreducible under iteration", start, None)
}

pub fn table_exactness(suite: Suite, caps: &Caps) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    for g in groups(suite, caps) {
        let Some(table) = table(&g, caps, &mut t) else { continue };
        let verified = table.verify();
        t.check(verified.is_ok(), || format!("{}: {:?}", g.name, verified.err()));
        let squares: usize = table.degrees().iter().map(|d| d * d).sum();
        t.check(squares == g.group.order(), || format!("{}: sum of squared degrees {squares}", g.name));
    }
    t.finish(8, "character table orthogonality and degrees", start, None)
}

pub fn run_criteria(suite: Suite, caps: &Caps) -> Vec<CriterionResult> {
    let criteria: [fn(Suite, &Caps) -> CriterionResult; 8] = [
        tbft_equality,
        oracle_equivalence,
        gauss_congruences,
        abelian_quotients,
        extension_certificates,
        structural_properties,
        persistence,
        table_exactness,
    ];
    criteria.iter().map(|c| c(suite, caps)).collect()
}

/// Job files in a corpus directory end in `.job.json`; other JSON files
/// there are the groups and maps they refer to.
pub const JOB_SUFFIX: &str = ".job.json";

#[derive(Clone, Debug)]
pub struct JobOutcome {
    pub file: PathBuf,
    /// 0 pass, 1 verification failure, 2 input error.
    pub exit: i32,
    /// Rendered report, or a failure record.
    pub output: String,
}

#[derive(Clone, Debug, Default)]
pub struct CorpusRun {
    pub jobs: Vec<JobOutcome>,
    pub warnings: Vec<String>,
}

impl CorpusRun {
    pub fn exit_code(&self) -> i32 {
        self.jobs.iter().map(|j| j.exit).max().unwrap_or(0)
    }
}

pub fn job_files(dir: &Path) -> Result<Vec<PathBuf>, InputError> {
    let io = |source: std::io::Error| InputError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(JOB_SUFFIX)) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run_one(file: &Path, caps: &Caps, format: Format) -> JobOutcome {
    let result = JobSpec::load(file).map_err(Into::into).and_then(|spec| run_job(&spec, caps));
    let (exit, output) = match result {
        Ok(report) => (if report.pass() { 0 } else { 1 }, render(&report, format)),
        Err(e) => {
            let (kind, witness) = match &e {
                crate::job::RunError::Input(i) => (i.kind(), i.witness()),
                crate::job::RunError::Engine(_) => ("ValidationError", None),
            };
            (if e.is_input() { 2 } else { 1 }, failure_record(kind, &format!("{}: {e}", file.display()), witness) + "\n")
        }
    };
    JobOutcome {
        file: file.to_path_buf(),
        exit,
        output,
    }
}

/// Runs every job in `dir` on a pool of `workers` threads. Outputs are
/// returned in file order, each one complete.
pub fn run_corpus_dir(dir: &Path, caps: &Caps, workers: usize, format: Format) -> Result<CorpusRun, InputError> {
    let files = job_files(dir)?;
    let mut run = CorpusRun::default();
    if files.is_empty() {
        run.warnings.push(format!("no {JOB_SUFFIX} files in {}", dir.display()));
        return Ok(run);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    run.jobs = pool.install(|| files.par_iter().map(|f| run_one(f, caps, format)).collect());
    Ok(run)
}
