//! JSON input formats and their conversion into core objects.
//!
//! Element indices in files are the user's own. Cayley tables whose
//! identity is not element 0 are relabelled internally (identity and 0 swap
//! places); [`LoadedGroup`] translates in both directions.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use tbf_core::extension::{validate_extension_endo, ExtensionError};
use tbf_core::group::{
    endo_from_generator_images, validate_endo, AssociativityCheck, GroupError,
};
use tbf_core::intertwiner::{RatMatrix, RationalRep, RepresentationError};
use tbf_core::{ExtensionEndo, FgAbelian, FgAbelianEndo, FiniteEndo, FiniteGroup, IntMatrix, LatticeExtension};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: line {line}, column {column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: field `{field}`: {message}")]
    Field {
        origin: String,
        field: String,
        message: String,
    },
    #[error("{origin}: {source}")]
    Group { origin: String, source: GroupError },
    #[error("{origin}: {source}")]
    Extension { origin: String, source: ExtensionError },
    #[error("{origin}: {source}")]
    Representation {
        origin: String,
        source: RepresentationError,
    },
    #[error("{origin}: {message}")]
    Abelian { origin: String, message: String },
}

impl InputError {
    /// Stable name of the error kind for machine-readable failure records.
    pub fn kind(&self) -> &'static str {
        match self {
            InputError::Io { .. } => "IoError",
            InputError::Parse { .. } | InputError::Field { .. } => "ParseError",
            InputError::Group { source, .. } => match source {
                GroupError::NotAGroup { .. } => "NotAGroup",
                GroupError::NotAHomomorphism { .. } => "NotAHomomorphism",
                GroupError::CapExceeded { .. } => "CapExceeded",
                GroupError::NotGenerating => "NotGenerating",
                _ => "ValidationError",
            },
            InputError::Extension { source, .. } => match source {
                ExtensionError::EquivarianceFailure { .. } => "EquivarianceFailure",
                ExtensionError::CocycleFailure { .. } => "CocycleFailure",
                _ => "ValidationError",
            },
            InputError::Representation { .. } => "NotARepresentation",
            InputError::Abelian { .. } => "ValidationError",
        }
    }

    /// Offending indices, when the error carries any.
    pub fn witness(&self) -> Option<serde_json::Value> {
        use serde_json::json;
        match self {
            InputError::Group { source, .. } => match source {
                GroupError::NotAGroup { reason, witness } => Some(json!({
                    "axiom": reason.to_string(),
                    "triple": [witness.0, witness.1, witness.2],
                })),
                GroupError::NotAHomomorphism { x, y } => Some(json!({ "x": x, "y": y })),
                _ => None,
            },
            InputError::Extension { source, .. } => match source {
                ExtensionError::EquivarianceFailure { f } => Some(json!({ "f": f })),
                ExtensionError::CocycleFailure { f1, f2 } => Some(json!({ "f1": f1, "f2": f2 })),
                _ => None,
            },
            InputError::Representation {
                source: RepresentationError::NotARepresentation { x, y },
                ..
            } => Some(json!({ "x": x, "y": y })),
            _ => None,
        }
    }
}

fn field(origin: &str, field: &str, message: impl Into<String>) -> InputError {
    InputError::Field {
        origin: origin.to_string(),
        field: field.to_string(),
        message: message.into(),
    }
}

/// An integer given either as a JSON number or as a decimal string.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum IntLit {
    Small(i64),
    Text(String),
}

impl IntLit {
    fn to_big(&self, origin: &str, name: &str) -> Result<BigInt, InputError> {
        match self {
            IntLit::Small(v) => Ok(BigInt::from(*v)),
            IntLit::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| field(origin, name, format!("`{s}` is not an integer"))),
        }
    }

    pub fn from_big(v: &BigInt) -> Self {
        i64::try_from(v).map_or_else(|_| IntLit::Text(v.to_string()), IntLit::Small)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupDef {
    Cayley {
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Permutation {
        generators: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

/// A group definition given inline or as a path relative to the referring file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Path(String),
    Inline(GroupDef),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ImageLit {
    Index(usize),
    Permutation(Vec<usize>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndoDef {
    #[serde(default)]
    pub map: Option<Vec<usize>>,
    /// Keys are element indices for Cayley groups and generator positions
    /// for permutation groups.
    #[serde(default)]
    pub generator_images: Option<BTreeMap<String, ImageLit>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct MatrixDef {
    pub n: usize,
    pub entries: Vec<Vec<IntLit>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FgDef {
    pub rank: usize,
    #[serde(default)]
    pub torsion: Vec<IntLit>,
    pub matrix: Vec<Vec<IntLit>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExtensionDef {
    pub n: usize,
    #[serde(rename = "F")]
    pub top: GroupRef,
    /// Matrices per element of `F`; the identity may be omitted.
    pub theta: BTreeMap<String, Vec<Vec<IntLit>>>,
    pub endo: ExtensionEndoDef,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExtensionEndoDef {
    #[serde(rename = "M")]
    pub m: Vec<Vec<IntLit>>,
    pub psi: Vec<usize>,
    /// Missing elements get `c(f) = 0`.
    #[serde(default)]
    pub c: BTreeMap<String, Vec<IntLit>>,
}

/// Per-generator matrices `numerators / denominator`.
#[derive(Clone, Debug, Deserialize)]
pub struct RepDef {
    pub generators: Vec<RepGenerator>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct RepGenerator {
    pub element: usize,
    pub numerators: Vec<Vec<i64>>,
    #[serde(default = "one")]
    pub denominator: i64,
}

fn one() -> i64 {
    1
}

pub fn read_file(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    parse_json(&read_file(path)?, &path.display().to_string())
}

/// A validated group plus the swap that maps file indices to internal ones.
#[derive(Clone, Debug)]
pub struct LoadedGroup {
    pub group: Arc<FiniteGroup>,
    /// File index of the identity; it trades places with element 0.
    swap: usize,
    /// Generators as given, for permutation groups: position → element.
    generator_elements: Vec<usize>,
    /// Element permutations, for permutation groups.
    elements: Option<Vec<Vec<usize>>>,
}

impl LoadedGroup {
    pub fn to_internal(&self, x: usize) -> usize {
        if x == self.swap {
            0
        } else if x == 0 {
            self.swap
        } else {
            x
        }
    }

    /// The swap is an involution.
    pub fn to_user(&self, x: usize) -> usize {
        self.to_internal(x)
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    /// The group as a Cayley definition in file indexing. Loading it back
    /// yields the same group, labels and indexing.
    pub fn export(&self) -> GroupDef {
        let n = self.order();
        let table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| self.to_user(self.group.mul(self.to_internal(a), self.to_internal(b))))
                    .collect()
            })
            .collect();
        let labels = self
            .group
            .labels()
            .map(|l| (0..n).map(|x| l[self.to_internal(x)].clone()).collect());
        GroupDef::Cayley { table, labels }
    }
}

fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        let mut first = true;
        while !seen[x] {
            seen[x] = true;
            if !first {
                out.push(' ');
            }
            out.push_str(&(x + 1).to_string());
            first = false;
            x = p[x];
        }
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

pub fn build_group(def: &GroupDef, origin: &str, closure_cap: usize) -> Result<LoadedGroup, InputError> {
    let group_err = |source| InputError::Group {
        origin: origin.to_string(),
        source,
    };
    match def {
        GroupDef::Cayley { table, labels } => {
            let n = table.len();
            // without an identity the builder reports the failed axiom
            let swap = identity_index(table).unwrap_or(0);
            let group = FiniteGroup::build_from_cayley(table, swap, AssociativityCheck::Auto).map_err(group_err)?;
            let mut loaded = LoadedGroup {
                group: Arc::new(group),
                swap,
                generator_elements: Vec::new(),
                elements: None,
            };
            if let Some(labels) = labels {
                if labels.len() != n {
                    return Err(field(origin, "labels", format!("expected {n} labels, found {}", labels.len())));
                }
                let internal = (0..n).map(|x| labels[loaded.to_user(x)].clone()).collect();
                let g = (*loaded.group).clone().with_labels(internal);
                loaded.group = Arc::new(g);
            }
            Ok(loaded)
        }
        GroupDef::Permutation { generators, labels } => {
            if generators.is_empty() {
                return Err(field(origin, "generators", "at least one generator is required"));
            }
            let (group, elements) = FiniteGroup::build_from_permutations(generators, closure_cap).map_err(group_err)?;
            let generator_elements = generators
                .iter()
                .map(|p| elements.iter().position(|e| e == p).expect("generators lie in their closure"))
                .collect();
            let labels = match labels {
                Some(l) if l.len() != group.order() => {
                    return Err(field(
                        origin,
                        "labels",
                        format!("expected {} labels, found {}", group.order(), l.len()),
                    ))
                }
                Some(l) => l.clone(),
                None => elements.iter().map(|p| cycle_notation(p)).collect(),
            };
            Ok(LoadedGroup {
                group: Arc::new(group.with_labels(labels)),
                swap: 0,
                generator_elements,
                elements: Some(elements),
            })
        }
    }
}

fn identity_index(table: &[Vec<usize>]) -> Option<usize> {
    let n = table.len();
    (0..n).find(|&e| (0..n).all(|x| table[e].get(x) == Some(&x) && table[x].get(e) == Some(&x)))
}

pub fn load_group(path: &Path, closure_cap: usize) -> Result<LoadedGroup, InputError> {
    let def: GroupDef = load_json(path)?;
    build_group(&def, &path.display().to_string(), closure_cap)
}

fn resolve_group_ref(r: &GroupRef, base: &Path, origin: &str, closure_cap: usize) -> Result<LoadedGroup, InputError> {
    match r {
        GroupRef::Path(p) => load_group(&base.join(p), closure_cap),
        GroupRef::Inline(def) => build_group(def, origin, closure_cap),
    }
}

pub fn build_endo(group: &LoadedGroup, def: &EndoDef, origin: &str) -> Result<FiniteEndo, InputError> {
    let group_err = |source| InputError::Group {
        origin: origin.to_string(),
        source,
    };
    let n = group.order();
    let check_index = |name: &str, x: usize| {
        if x < n {
            Ok(x)
        } else {
            Err(field(origin, name, format!("element {x} out of range for order {n}")))
        }
    };
    match (&def.map, &def.generator_images) {
        (Some(map), None) => {
            if map.len() != n {
                return Err(group_err(GroupError::MapLength {
                    expected: n,
                    found: map.len(),
                }));
            }
            let mut internal = vec![0; n];
            for (x, &y) in map.iter().enumerate() {
                internal[group.to_internal(x)] = group.to_internal(check_index("map", y)?);
            }
            validate_endo(&group.group, internal).map_err(|e| group_err(user_indexed(group, e)))
        }
        (None, Some(images)) => {
            let mut pairs = Vec::new();
            for (key, image) in images {
                let k: usize = key
                    .parse()
                    .map_err(|_| field(origin, "generator_images", format!("key `{key}` is not an index")))?;
                let source = match &group.elements {
                    Some(_) => *group
                        .generator_elements
                        .get(k)
                        .ok_or_else(|| field(origin, "generator_images", format!("no generator {k}")))?,
                    None => group.to_internal(check_index("generator_images", k)?),
                };
                let target = match (image, &group.elements) {
                    (ImageLit::Index(i), _) => group.to_internal(check_index("generator_images", *i)?),
                    (ImageLit::Permutation(p), Some(elements)) => elements
                        .iter()
                        .position(|e| e == p)
                        .ok_or_else(|| field(origin, "generator_images", format!("{p:?} is not an element of the group")))?,
                    (ImageLit::Permutation(_), None) => {
                        return Err(field(origin, "generator_images", "permutation images need a permutation group"))
                    }
                };
                pairs.push((source, target));
            }
            endo_from_generator_images(&group.group, &pairs).map_err(|e| group_err(user_indexed(group, e)))
        }
        _ => Err(field(origin, "map", "give exactly one of `map` and `generator_images`")),
    }
}

fn user_indexed(group: &LoadedGroup, e: GroupError) -> GroupError {
    match e {
        GroupError::NotAHomomorphism { x, y } => GroupError::NotAHomomorphism {
            x: group.to_user(x),
            y: group.to_user(y),
        },
        other => other,
    }
}

pub fn load_endo(group: &LoadedGroup, path: &Path) -> Result<FiniteEndo, InputError> {
    let def: EndoDef = load_json(path)?;
    build_endo(group, &def, &path.display().to_string())
}

pub fn matrix_from_lits(rows: &[Vec<IntLit>], origin: &str, name: &str) -> Result<IntMatrix, InputError> {
    let big: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_big(origin, name)).collect())
        .collect::<Result<_, _>>()?;
    IntMatrix::from_rows(&big).ok_or_else(|| field(origin, name, "rows have different lengths"))
}

/// `--matrix` argument: an inline JSON literal like `[[2,1],[1,1]]` or a
/// path to a `{ "n": .., "entries": .. }` file.
pub fn parse_matrix_arg(arg: &str) -> Result<IntMatrix, InputError> {
    let trimmed = arg.trim_start();
    let (rows, origin) = if trimmed.starts_with('[') {
        (parse_json::<Vec<Vec<IntLit>>>(arg, "--matrix")?, "--matrix".to_string())
    } else {
        let path = Path::new(arg);
        let def: MatrixDef = load_json(path)?;
        let origin = path.display().to_string();
        if def.entries.len() != def.n || def.entries.iter().any(|r| r.len() != def.n) {
            return Err(field(&origin, "entries", format!("expected a {0}×{0} matrix", def.n)));
        }
        (def.entries, origin)
    };
    let m = matrix_from_lits(&rows, &origin, "entries")?;
    if !m.is_square() || m.rows() == 0 {
        return Err(field(&origin, "entries", "matrix must be square and nonempty"));
    }
    Ok(m)
}

pub fn load_fg(path: &Path) -> Result<FgAbelianEndo, InputError> {
    let def: FgDef = load_json(path)?;
    let origin = path.display().to_string();
    let torsion = def
        .torsion
        .iter()
        .map(|t| t.to_big(&origin, "torsion"))
        .collect::<Result<Vec<_>, _>>()?;
    let group = FgAbelian::new(def.rank, torsion).map_err(|e| InputError::Abelian {
        origin: origin.clone(),
        message: e.to_string(),
    })?;
    let m = matrix_from_lits(&def.matrix, &origin, "matrix")?;
    FgAbelianEndo::new(group, m).map_err(|e| InputError::Abelian {
        origin,
        message: e.to_string(),
    })
}

/// An extension endomorphism plus the top group's index translation.
pub struct LoadedExtension {
    pub top: LoadedGroup,
    pub endo: ExtensionEndo,
}

pub fn load_extension(path: &Path, closure_cap: usize) -> Result<LoadedExtension, InputError> {
    let def: ExtensionDef = load_json(path)?;
    let origin = path.display().to_string();
    let base = path.parent().unwrap_or(Path::new("."));
    build_extension(&def, base, &origin, closure_cap)
}

pub fn build_extension(
    def: &ExtensionDef,
    base: &Path,
    origin: &str,
    closure_cap: usize,
) -> Result<LoadedExtension, InputError> {
    let top = resolve_group_ref(&def.top, base, origin, closure_cap)?;
    let order = top.order();
    let ext_err = |source| InputError::Extension {
        origin: origin.to_string(),
        source,
    };
    let index_of = |key: &str, name: &str| -> Result<usize, InputError> {
        match key.parse::<usize>() {
            Ok(f) if f < order => Ok(top.to_internal(f)),
            _ => Err(field(origin, name, format!("`{key}` is not an element of F"))),
        }
    };
    let mut theta: Vec<Option<IntMatrix>> = vec![None; order];
    theta[0] = Some(IntMatrix::identity(def.n));
    for (key, rows) in &def.theta {
        theta[index_of(key, "theta")?] = Some(matrix_from_lits(rows, origin, "theta")?);
    }
    let theta = theta
        .into_iter()
        .enumerate()
        .map(|(f, t)| t.ok_or_else(|| field(origin, "theta", format!("missing θ({})", top.to_user(f)))))
        .collect::<Result<Vec<_>, _>>()?;
    let ext = Arc::new(LatticeExtension::new(def.n, Arc::clone(&top.group), theta).map_err(ext_err)?);
    let m = matrix_from_lits(&def.endo.m, origin, "M")?;
    if def.endo.psi.len() != order {
        return Err(field(origin, "psi", format!("expected {order} images, found {}", def.endo.psi.len())));
    }
    let mut psi = vec![0; order];
    for (f, &image) in def.endo.psi.iter().enumerate() {
        if image >= order {
            return Err(field(origin, "psi", format!("element {image} out of range")));
        }
        psi[top.to_internal(f)] = top.to_internal(image);
    }
    let mut cocycle = vec![vec![BigInt::from(0); def.n]; order];
    for (key, v) in &def.endo.c {
        let f = index_of(key, "c")?;
        if v.len() != def.n {
            return Err(field(origin, "c", format!("c({key}) must have length {}", def.n)));
        }
        cocycle[f] = v.iter().map(|x| x.to_big(origin, "c")).collect::<Result<_, _>>()?;
    }
    let endo = validate_extension_endo(&ext, m, psi, cocycle).map_err(|e| ext_err(user_indexed_ext(&top, e)))?;
    Ok(LoadedExtension { top, endo })
}

fn user_indexed_ext(top: &LoadedGroup, e: ExtensionError) -> ExtensionError {
    match e {
        ExtensionError::EquivarianceFailure { f } => ExtensionError::EquivarianceFailure { f: top.to_user(f) },
        ExtensionError::CocycleFailure { f1, f2 } => ExtensionError::CocycleFailure {
            f1: top.to_user(f1),
            f2: top.to_user(f2),
        },
        ExtensionError::Psi(g) => ExtensionError::Psi(user_indexed(top, g)),
        other => other,
    }
}

pub fn load_rep(group: &LoadedGroup, path: &Path) -> Result<RationalRep, InputError> {
    let def: RepDef = load_json(path)?;
    let origin = path.display().to_string();
    let mut gens = Vec::new();
    for g in &def.generators {
        if g.element >= group.order() {
            return Err(field(&origin, "element", format!("element {} out of range", g.element)));
        }
        let rows: Vec<Vec<(i64, i64)>> = g
            .numerators
            .iter()
            .map(|r| r.iter().map(|&x| (x, g.denominator)).collect())
            .collect();
        let m = RatMatrix::from_fractions(&rows)
            .ok_or_else(|| field(&origin, "numerators", "matrix must be square with a nonzero denominator"))?;
        gens.push((group.to_internal(g.element), m));
    }
    RationalRep::from_generators(&group.group, &gens).map_err(|source| InputError::Representation { origin, source })
}
