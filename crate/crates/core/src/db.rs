//! Decomposition database: character → IDS map, component inventory,
//! stroke table, and the per-configuration reverse indices used to compose
//! decomposed text back into characters.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::decompose::{DecompConfig, Granularity};
use crate::ids::{idc_arity, is_idc, IdsError, IdsTree};

/// Default duplication marker, U+2010E.
pub const DEFAULT_MARKER: char = '\u{2010E}';
/// Default character boundary, U+2E31 WORD SEPARATOR MIDDLE DOT.
pub const DEFAULT_BOUNDARY: char = '\u{2E31}';

/// The 36 codepoints of the CJK Strokes block.
pub fn default_stroke_inventory() -> Vec<char> {
    ('\u{31C0}'..='\u{31E3}').collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbFile {
    Ids,
    Strokes,
}

impl fmt::Display for DbFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DbFile::Ids => f.write_str("ids"),
            DbFile::Strokes => f.write_str("strokes"),
        }
    }
}

#[derive(Debug, Error)]
pub enum DbError {
    #[error("{file} line {line}: {msg}")]
    Parse {
        file: DbFile,
        line: usize,
        msg: String,
    },
    #[error("ids line {line}: bad sequence for {character}: {source}")]
    Structural {
        line: usize,
        character: char,
        source: IdsError,
    },
    #[error("ids: cyclic decomposition through {0}")]
    Cycle(char),
    #[error("strokes line {line}: {msg}")]
    Reference { line: usize, msg: String },
    #[error("header: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Whether colliding flattenings receive duplication markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkerPolicy {
    /// The n-th colliding character (0-based, ascending codepoint) gets n markers.
    #[default]
    Ordinal,
    /// No markers; collisions stay unresolved. Diagnostic use only.
    Disabled,
}

/// Reserved symbols and inventories declared in the IDS file header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbHeader {
    pub marker: char,
    pub boundary: char,
    pub strokes: Vec<char>,
    pub unclear: Vec<char>,
}

impl Default for DbHeader {
    fn default() -> Self {
        DbHeader {
            marker: DEFAULT_MARKER,
            boundary: DEFAULT_BOUNDARY,
            strokes: default_stroke_inventory(),
            unclear: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdeographInventory {
    pub ideographs: BTreeSet<char>,
    pub unclear_symbols: BTreeSet<char>,
}

impl IdeographInventory {
    pub fn contains(&self, c: char) -> bool {
        self.ideographs.contains(&c) || self.unclear_symbols.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.ideographs.len() + self.unclear_symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = char> + '_ {
        self.ideographs
            .iter()
            .chain(self.unclear_symbols.iter())
            .copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrokeTable {
    pub inventory: Vec<char>,
    pub map: BTreeMap<char, Vec<char>>,
}

impl StrokeTable {
    pub fn get(&self, c: char) -> Option<&[char]> {
        self.map.get(&c).map(Vec::as_slice)
    }
}

/// Two or more characters sharing one flattened sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub config: DecompConfig,
    pub code: String,
    pub chars: Vec<char>,
}

/// Injective map between characters and their flattened form under one
/// sub-character configuration.
#[derive(Debug, Clone)]
pub struct ReverseIndex {
    config: DecompConfig,
    codes: BTreeMap<char, Box<[char]>>,
    lookup: HashMap<Box<[char]>, char>,
    alphabet: HashSet<char>,
    max_code_len: usize,
    markers_assigned: usize,
    collisions: Vec<Collision>,
}

impl ReverseIndex {
    fn build(
        config: DecompConfig,
        char_map: &BTreeMap<char, IdsTree>,
        strokes: &StrokeTable,
        header: &DbHeader,
        policy: MarkerPolicy,
    ) -> Self {
        // char_map iterates in ascending codepoint order, so each class is
        // already sorted for ordinal marker assignment.
        let mut classes: BTreeMap<Vec<char>, Vec<char>> = BTreeMap::new();
        for (&c, tree) in char_map {
            classes
                .entry(flatten(tree, config, strokes))
                .or_default()
                .push(c);
        }

        let mut codes = BTreeMap::new();
        let mut lookup = HashMap::new();
        let mut alphabet = HashSet::new();
        let mut collisions = Vec::new();
        let mut markers_assigned = 0;
        let mut max_code_len = 0;

        for (flat, members) in &classes {
            if members.len() > 1 && policy == MarkerPolicy::Disabled {
                collisions.push(Collision {
                    config,
                    code: flat.iter().collect(),
                    chars: members.clone(),
                });
            }
            for (ordinal, &c) in members.iter().enumerate() {
                let mut code = flat.clone();
                if policy == MarkerPolicy::Ordinal {
                    code.extend(std::iter::repeat_n(header.marker, ordinal));
                    markers_assigned += ordinal;
                }
                alphabet.extend(code.iter().copied());
                max_code_len = max_code_len.max(code.len());
                let code: Box<[char]> = code.into_boxed_slice();
                match lookup.get(&code) {
                    Some(&first) if policy == MarkerPolicy::Ordinal => {
                        // Only reachable when the marker itself is a component.
                        collisions.push(Collision {
                            config,
                            code: code.iter().collect(),
                            chars: vec![first, c],
                        });
                    }
                    Some(_) => {}
                    None => {
                        lookup.insert(code.clone(), c);
                    }
                }
                codes.insert(c, code);
            }
        }
        alphabet.insert(header.marker);
        alphabet.insert(header.boundary);

        ReverseIndex {
            config,
            codes,
            lookup,
            alphabet,
            max_code_len,
            markers_assigned,
            collisions,
        }
    }

    pub fn config(&self) -> DecompConfig {
        self.config
    }

    /// Flattened form of `c`, including any duplication markers.
    pub fn code(&self, c: char) -> Option<&[char]> {
        self.codes.get(&c).map(|b| &b[..])
    }

    pub fn lookup(&self, code: &[char]) -> Option<char> {
        self.lookup.get(code).copied()
    }

    /// True if `c` can occur inside some flattened form (or is a reserved symbol).
    pub fn in_alphabet(&self, c: char) -> bool {
        self.alphabet.contains(&c)
    }

    pub fn max_code_len(&self) -> usize {
        self.max_code_len
    }

    pub fn markers_assigned(&self) -> usize {
        self.markers_assigned
    }

    pub fn collisions(&self) -> &[Collision] {
        &self.collisions
    }

    pub fn is_injective(&self) -> bool {
        self.collisions.is_empty() && self.lookup.len() == self.codes.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &[char])> + '_ {
        self.codes.iter().map(|(&c, code)| (c, &code[..]))
    }
}

/// Flattened token sequence of a tree under `config`, without markers.
pub fn flatten(tree: &IdsTree, config: DecompConfig, strokes: &StrokeTable) -> Vec<char> {
    let mut out = Vec::new();
    let with_idcs = config.idcs;
    match config.granularity {
        Granularity::Character => unreachable!("character granularity has no flattening"),
        Granularity::Ideograph => tree.write_flat(with_idcs, &mut out, &mut |c, o| o.push(c)),
        Granularity::Stroke => tree.write_flat(with_idcs, &mut out, &mut |c, o| match strokes
            .get(c)
        {
            Some(seq) => o.extend_from_slice(seq),
            // Missing coverage is reported by the validator.
            None => o.push(c),
        }),
    }
    out
}

#[derive(Debug, Clone)]
pub struct DecompositionDb {
    header: DbHeader,
    char_map: BTreeMap<char, IdsTree>,
    inventory: IdeographInventory,
    strokes: StrokeTable,
    policy: MarkerPolicy,
    indices: Vec<ReverseIndex>,
    content_hash: String,
}

impl DecompositionDb {
    /// Loads an IDS file and a stroke file.
    pub fn load<A: BufRead, B: BufRead>(ids: A, strokes: B) -> Result<Self, DbError> {
        let ids_lines = read_lines(ids)?;
        let stroke_lines = read_lines(strokes)?;
        Self::load_lines(&ids_lines, &stroke_lines)
    }

    pub fn load_str(ids: &str, strokes: &str) -> Result<Self, DbError> {
        Self::load(ids.as_bytes(), strokes.as_bytes())
    }

    fn load_lines(ids_lines: &[String], stroke_lines: &[String]) -> Result<Self, DbError> {
        let header = parse_header(ids_lines)?;
        let unclear: BTreeSet<char> = header.unclear.iter().copied().collect();

        let mut raw: BTreeMap<char, (usize, IdsTree)> = BTreeMap::new();
        for (idx, line) in ids_lines.iter().enumerate() {
            let lineno = idx + 1;
            let Some(fields) = record_fields(line) else {
                continue;
            };
            if fields.len() != 2 {
                return Err(DbError::Parse {
                    file: DbFile::Ids,
                    line: lineno,
                    msg: format!("expected 2 fields, found {}", fields.len()),
                });
            }
            let character = single_char(fields[0]).ok_or_else(|| DbError::Parse {
                file: DbFile::Ids,
                line: lineno,
                msg: format!("character field {:?} is not a single codepoint", fields[0]),
            })?;
            let tree = IdsTree::parse(fields[1]).map_err(|source| DbError::Structural {
                line: lineno,
                character,
                source,
            })?;
            if raw.insert(character, (lineno, tree)).is_some() {
                return Err(DbError::Parse {
                    file: DbFile::Ids,
                    line: lineno,
                    msg: format!("duplicate record for {character}"),
                });
            }
        }

        let mut inventory = IdeographInventory {
            unclear_symbols: unclear.clone(),
            ..Default::default()
        };
        for (&c, (_, tree)) in &raw {
            if *tree == IdsTree::Leaf(c) && !unclear.contains(&c) {
                inventory.ideographs.insert(c);
            }
        }

        let char_map = expand_all(&raw)?;

        let mut stroke_table = StrokeTable {
            inventory: header.strokes.clone(),
            map: BTreeMap::new(),
        };
        let stroke_set: HashSet<char> = header.strokes.iter().copied().collect();
        for (idx, line) in stroke_lines.iter().enumerate() {
            let lineno = idx + 1;
            let Some(fields) = record_fields(line) else {
                continue;
            };
            if fields.len() != 2 {
                return Err(DbError::Parse {
                    file: DbFile::Strokes,
                    line: lineno,
                    msg: format!("expected 2 fields, found {}", fields.len()),
                });
            }
            let component = single_char(fields[0]).ok_or_else(|| DbError::Parse {
                file: DbFile::Strokes,
                line: lineno,
                msg: format!("component field {:?} is not a single codepoint", fields[0]),
            })?;
            if !inventory.contains(component) {
                return Err(DbError::Reference {
                    line: lineno,
                    msg: format!("{component} is not in the ideograph inventory"),
                });
            }
            let seq: Vec<char> = fields[1].chars().collect();
            if let Some(bad) = seq.iter().find(|s| !stroke_set.contains(s)) {
                return Err(DbError::Reference {
                    line: lineno,
                    msg: format!("{bad} is not in the stroke inventory"),
                });
            }
            if stroke_table.map.insert(component, seq).is_some() {
                return Err(DbError::Parse {
                    file: DbFile::Strokes,
                    line: lineno,
                    msg: format!("duplicate record for {component}"),
                });
            }
        }

        Ok(Self::assemble(
            header,
            char_map,
            inventory,
            stroke_table,
            MarkerPolicy::Ordinal,
        ))
    }

    /// Builds a database from already-parsed parts. Nothing is checked here;
    /// run [`validate_db`] on the result.
    pub fn from_parts(
        header: DbHeader,
        char_map: BTreeMap<char, IdsTree>,
        inventory: IdeographInventory,
        strokes: StrokeTable,
    ) -> Self {
        Self::assemble(header, char_map, inventory, strokes, MarkerPolicy::Ordinal)
    }

    fn assemble(
        header: DbHeader,
        char_map: BTreeMap<char, IdsTree>,
        inventory: IdeographInventory,
        strokes: StrokeTable,
        policy: MarkerPolicy,
    ) -> Self {
        let indices = DecompConfig::SUBCHARACTER
            .iter()
            .map(|&cfg| ReverseIndex::build(cfg, &char_map, &strokes, &header, policy))
            .collect();
        let content_hash = content_hash(&header, &char_map, &strokes, policy);
        DecompositionDb {
            header,
            char_map,
            inventory,
            strokes,
            policy,
            indices,
            content_hash,
        }
    }

    /// Same database with reverse indices rebuilt under another marker policy.
    pub fn with_marker_policy(self, policy: MarkerPolicy) -> Self {
        Self::assemble(
            self.header,
            self.char_map,
            self.inventory,
            self.strokes,
            policy,
        )
    }

    pub fn header(&self) -> &DbHeader {
        &self.header
    }

    pub fn marker(&self) -> char {
        self.header.marker
    }

    pub fn boundary(&self) -> char {
        self.header.boundary
    }

    pub fn char_map(&self) -> &BTreeMap<char, IdsTree> {
        &self.char_map
    }

    pub fn get(&self, c: char) -> Option<&IdsTree> {
        self.char_map.get(&c)
    }

    pub fn contains(&self, c: char) -> bool {
        self.char_map.contains_key(&c)
    }

    pub fn inventory(&self) -> &IdeographInventory {
        &self.inventory
    }

    pub fn strokes(&self) -> &StrokeTable {
        &self.strokes
    }

    pub fn marker_policy(&self) -> MarkerPolicy {
        self.policy
    }

    /// Reverse index for a sub-character configuration; `None` for the
    /// identity configuration.
    pub fn index(&self, cfg: DecompConfig) -> Option<&ReverseIndex> {
        cfg.slot().map(|i| &self.indices[i])
    }

    pub fn indices(&self) -> &[ReverseIndex] {
        &self.indices
    }

    /// Hex SHA-256 over a canonical serialization of the database.
    pub fn content_hash(&self) -> &str {
        &self.content_hash
    }
}

fn read_lines<R: BufRead>(r: R) -> Result<Vec<String>, DbError> {
    r.lines()
        .map(|l| l.map(|l| l.nfc().collect::<String>()).map_err(DbError::from))
        .collect()
}

fn record_fields(line: &str) -> Option<Vec<&str>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return None;
    }
    Some(trimmed.split_whitespace().collect())
}

fn single_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

fn parse_header(lines: &[String]) -> Result<DbHeader, DbError> {
    let mut header = DbHeader::default();
    for line in lines {
        let trimmed = line.trim();
        let Some(body) = trimmed.strip_prefix('#') else {
            if trimmed.is_empty() {
                continue;
            }
            break;
        };
        let Some((key, value)) = body.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "marker" => {
                header.marker = single_char(value)
                    .ok_or_else(|| DbError::Header(format!("marker {value:?} is not one codepoint")))?
            }
            "boundary" => {
                header.boundary = single_char(value).ok_or_else(|| {
                    DbError::Header(format!("boundary {value:?} is not one codepoint"))
                })?
            }
            "strokes" => {
                header.strokes = value.chars().filter(|c| !c.is_whitespace()).collect();
                if header.strokes.is_empty() {
                    return Err(DbError::Header("empty stroke inventory".into()));
                }
            }
            "unclear" => header.unclear = value.chars().filter(|c| !c.is_whitespace()).collect(),
            _ => {}
        }
    }

    let reserved = [header.marker, header.boundary];
    if header.marker == header.boundary {
        return Err(DbError::Header("marker and boundary must differ".into()));
    }
    for &r in &reserved {
        if is_idc(r) || header.strokes.contains(&r) || header.unclear.contains(&r) {
            return Err(DbError::Header(format!(
                "reserved symbol {r} overlaps an operator, stroke or unclear symbol"
            )));
        }
    }
    let distinct: BTreeSet<char> = header.strokes.iter().copied().collect();
    if distinct.len() != header.strokes.len() {
        return Err(DbError::Header("stroke inventory has duplicates".into()));
    }
    Ok(header)
}

/// Expands leaves that are themselves decomposable characters, so that every
/// tree bottoms out in atomic components.
fn expand_all(
    raw: &BTreeMap<char, (usize, IdsTree)>,
) -> Result<BTreeMap<char, IdsTree>, DbError> {
    fn resolve(
        c: char,
        raw: &BTreeMap<char, (usize, IdsTree)>,
        done: &mut HashMap<char, IdsTree>,
        visiting: &mut HashSet<char>,
    ) -> Result<IdsTree, DbError> {
        if let Some(t) = done.get(&c) {
            return Ok(t.clone());
        }
        let Some((_, tree)) = raw.get(&c) else {
            return Ok(IdsTree::Leaf(c));
        };
        if *tree == IdsTree::Leaf(c) {
            return Ok(IdsTree::Leaf(c));
        }
        if !visiting.insert(c) {
            return Err(DbError::Cycle(c));
        }
        let expanded = tree.map_leaves(&mut |leaf| {
            if leaf == c {
                Err(DbError::Cycle(c))
            } else {
                resolve(leaf, raw, done, visiting)
            }
        })?;
        visiting.remove(&c);
        done.insert(c, expanded.clone());
        Ok(expanded)
    }

    let mut done = HashMap::new();
    let mut visiting = HashSet::new();
    let mut out = BTreeMap::new();
    for &c in raw.keys() {
        out.insert(c, resolve(c, raw, &mut done, &mut visiting)?);
    }
    Ok(out)
}

fn content_hash(
    header: &DbHeader,
    char_map: &BTreeMap<char, IdsTree>,
    strokes: &StrokeTable,
    policy: MarkerPolicy,
) -> String {
    let mut h = Sha256::new();
    h.update(format!("marker\t{}\n", header.marker));
    h.update(format!("boundary\t{}\n", header.boundary));
    h.update(format!(
        "strokes\t{}\n",
        header.strokes.iter().collect::<String>()
    ));
    h.update(format!(
        "unclear\t{}\n",
        header.unclear.iter().collect::<String>()
    ));
    h.update(format!("markers\t{policy:?}\n"));
    for (c, tree) in char_map {
        h.update(format!("c\t{c}\t{tree}\n"));
    }
    for (c, seq) in &strokes.map {
        h.update(format!("s\t{c}\t{}\n", seq.iter().collect::<String>()));
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArityViolation {
    pub character: char,
    pub op: char,
    pub found: usize,
}

/// Problems found by [`validate_db`]. Empty lists mean the database is usable
/// for lossless decomposition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub characters: usize,
    pub ideographs: usize,
    pub unclear_symbols: usize,
    pub stroke_inventory: usize,
    pub markers_assigned: usize,
    /// (character, leaf) pairs whose leaf is not an inventory member.
    pub leaves_outside_inventory: Vec<(char, char)>,
    pub missing_strokes: Vec<char>,
    pub arity_violations: Vec<ArityViolation>,
    /// Inventory members that are operators, reserved symbols, or listed as
    /// both ideograph and unclear symbol.
    pub inventory_conflicts: Vec<char>,
    pub collisions: Vec<Collision>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.leaves_outside_inventory.is_empty()
            && self.missing_strokes.is_empty()
            && self.arity_violations.is_empty()
            && self.inventory_conflicts.is_empty()
            && self.collisions.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "characters\t{}", self.characters)?;
        writeln!(f, "ideographs\t{}", self.ideographs)?;
        writeln!(f, "unclear_symbols\t{}", self.unclear_symbols)?;
        writeln!(f, "stroke_inventory\t{}", self.stroke_inventory)?;
        writeln!(f, "markers_assigned\t{}", self.markers_assigned)?;
        for (c, leaf) in &self.leaves_outside_inventory {
            writeln!(f, "leaf_outside_inventory\t{c}\t{leaf}")?;
        }
        for c in &self.missing_strokes {
            writeln!(f, "missing_strokes\t{c}")?;
        }
        for v in &self.arity_violations {
            writeln!(f, "arity_violation\t{}\t{}\t{}", v.character, v.op, v.found)?;
        }
        for c in &self.inventory_conflicts {
            writeln!(f, "inventory_conflict\t{c}")?;
        }
        for col in &self.collisions {
            let chars: String = col.chars.iter().collect();
            writeln!(f, "collision\t{}\t{}\t{}", col.config, col.code, chars)?;
        }
        write!(f, "clean\t{}", self.is_clean())
    }
}

/// Checks closure, stroke coverage, operator arity and reverse-index
/// injectivity. Problems are collected, never raised.
pub fn validate_db(db: &DecompositionDb) -> ValidationReport {
    let mut report = ValidationReport {
        characters: db.char_map.len(),
        ideographs: db.inventory.ideographs.len(),
        unclear_symbols: db.inventory.unclear_symbols.len(),
        stroke_inventory: db.strokes.inventory.len(),
        ..Default::default()
    };

    for (&c, tree) in &db.char_map {
        tree.visit(&mut |node| match node {
            IdsTree::Leaf(leaf) => {
                if !db.inventory.contains(*leaf) {
                    report.leaves_outside_inventory.push((c, *leaf));
                }
            }
            IdsTree::Compound { op, children } => {
                if idc_arity(*op) != Some(children.len()) {
                    report.arity_violations.push(ArityViolation {
                        character: c,
                        op: *op,
                        found: children.len(),
                    });
                }
            }
        });
    }

    for c in db.inventory.iter() {
        if db.strokes.get(c).is_none_or(<[char]>::is_empty) {
            report.missing_strokes.push(c);
        }
    }

    let reserved = [db.header.marker, db.header.boundary];
    let mut conflicts: BTreeSet<char> = db
        .inventory
        .ideographs
        .intersection(&db.inventory.unclear_symbols)
        .copied()
        .collect();
    conflicts.extend(
        db.inventory
            .iter()
            .filter(|&c| is_idc(c) || reserved.contains(&c)),
    );
    report.inventory_conflicts = conflicts.into_iter().collect();

    for index in &db.indices {
        report.markers_assigned += index.markers_assigned();
        report.collisions.extend(index.collisions().iter().cloned());
    }
    report
}
