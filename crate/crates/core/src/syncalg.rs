//! Synchronization algebras: finite commutative, associative tables on
//! `Σ ∪ {0, ⊥}` deciding which actions synchronize and which may run alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved spelling of the idle element in text and JSON.
pub const IDLE_TEXT: &str = "0";
/// Reserved spelling of the failure element in text and JSON.
pub const BOT_TEXT: &str = "bot";

/// Default cap on alphabet size accepted from user input.
pub const DEFAULT_MAX_ALPHABET: usize = 64;

/// An action name. Cheap to clone; ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(Arc<str>);

impl Action {
    pub fn new(name: &str) -> Action {
        Action(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Action {
    fn from(s: &str) -> Action {
        Action::new(s)
    }
}

/// True for `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An element of `Σ ∪ {0, ⊥}`. The derived order is `Idle < Bot < actions`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Idle,
    Bot,
    Action(Action),
}

impl Label {
    pub fn action(name: &str) -> Label {
        Label::Action(Action::new(name))
    }

    /// Parses the reserved spellings `0` and `bot`, otherwise an identifier.
    pub fn parse(text: &str) -> Option<Label> {
        match text {
            IDLE_TEXT => Some(Label::Idle),
            BOT_TEXT => Some(Label::Bot),
            s if is_identifier(s) => Some(Label::action(s)),
            _ => None,
        }
    }

    pub fn as_action(&self) -> Option<&Action> {
        match self {
            Label::Action(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Idle => f.write_str(IDLE_TEXT),
            Label::Bot => f.write_str(BOT_TEXT),
            Label::Action(a) => f.write_str(a.as_str()),
        }
    }
}

impl From<Action> for Label {
    fn from(a: Action) -> Label {
        Label::Action(a)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("synchronization algebra violates its axioms: {0}")]
    Invalid(ValidationReport),
    #[error("ccs alphabet needs complement pairs `x`/`cox` plus `tau`: {0}")]
    BadInvolution(String),
    #[error("tcsp alphabet must contain `tau`")]
    MissingTau,
    #[error("alphabet has {size} actions, above the cap of {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },
    #[error("invalid algebra JSON: {0}")]
    Json(String),
}

/// The axiom families checked by [`validate_algebra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    MalformedTable,
    Commutativity,
    Associativity,
    BotAbsorbing,
    IdleOnlyFromIdle,
    ActionWithIdle,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::MalformedTable => "malformed-table",
            Axiom::Commutativity => "commutativity",
            Axiom::Associativity => "associativity",
            Axiom::BotAbsorbing => "σ(x,⊥)=⊥",
            Axiom::IdleOnlyFromIdle => "σ(x,y)=0 iff x=y=0",
            Axiom::ActionWithIdle => "σ(a,0)∈{a,⊥}",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Witnessing labels, rendered as text.
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} at ({})", v.axiom, v.witness.join(","))?;
        }
        Ok(())
    }
}

/// A raw operation table over ordered pairs, as read from a file. Nothing
/// about it is assumed valid; see [`validate_algebra`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraTable {
    pub alphabet: Vec<Action>,
    pub entries: BTreeMap<(Label, Label), Label>,
}

impl AlgebraTable {
    pub fn new(alphabet: Vec<Action>) -> AlgebraTable {
        AlgebraTable {
            alphabet,
            entries: BTreeMap::new(),
        }
    }

    /// Sets both `(x,y)` and `(y,x)`.
    pub fn set(&mut self, x: Label, y: Label, r: Label) {
        self.entries.insert((x.clone(), y.clone()), r.clone());
        self.entries.insert((y, x), r);
    }

    /// All elements of `Σ ∪ {0, ⊥}` in label order.
    pub fn carrier(&self) -> Vec<Label> {
        let mut out = vec![Label::Idle, Label::Bot];
        let actions: BTreeSet<&Action> = self.alphabet.iter().collect();
        out.extend(actions.into_iter().cloned().map(Label::Action));
        out
    }

    fn in_carrier(&self, l: &Label) -> bool {
        match l {
            Label::Action(a) => self.alphabet.contains(a),
            _ => true,
        }
    }
}

fn violation(axiom: Axiom, witness: &[&Label]) -> Violation {
    Violation {
        axiom,
        witness: witness.iter().map(|l| l.to_string()).collect(),
    }
}

/// Checks every axiom of a synchronization algebra, collecting violations
/// with witnessing tuples. Associativity is checked over all triples.
pub fn validate_algebra(table: &AlgebraTable) -> ValidationReport {
    let mut violations: Vec<Violation> = Vec::new();

    let distinct: BTreeSet<&Action> = table.alphabet.iter().collect();
    if distinct.len() != table.alphabet.len() {
        violations.push(violation(Axiom::MalformedTable, &[]));
    }
    for ((x, y), r) in &table.entries {
        for l in [x, y, r] {
            if !table.in_carrier(l) {
                violations.push(violation(Axiom::MalformedTable, &[x, y, r]));
                break;
            }
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }

    let carrier = table.carrier();
    for x in &carrier {
        for y in &carrier {
            if !table.entries.contains_key(&(x.clone(), y.clone())) {
                violations.push(violation(Axiom::MalformedTable, &[x, y]));
            }
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    let get = |x: &Label, y: &Label| table.entries[&(x.clone(), y.clone())].clone();

    for (i, x) in carrier.iter().enumerate() {
        for y in &carrier[i + 1..] {
            if get(x, y) != get(y, x) {
                violations.push(violation(Axiom::Commutativity, &[x, y]));
            }
        }
    }
    for x in &carrier {
        if get(x, &Label::Bot) != Label::Bot {
            violations.push(violation(Axiom::BotAbsorbing, &[x, &Label::Bot]));
        }
        for y in &carrier {
            let is_idle = get(x, y) == Label::Idle;
            let both_idle = *x == Label::Idle && *y == Label::Idle;
            if is_idle != both_idle {
                violations.push(violation(Axiom::IdleOnlyFromIdle, &[x, y]));
            }
        }
        if let Label::Action(_) = x {
            let r = get(x, &Label::Idle);
            if r != *x && r != Label::Bot {
                violations.push(violation(Axiom::ActionWithIdle, &[x, &Label::Idle, &r]));
            }
        }
    }
    for x in &carrier {
        for y in &carrier {
            let xy = get(x, y);
            for z in &carrier {
                if get(&xy, z) != get(x, &get(y, z)) {
                    violations.push(violation(Axiom::Associativity, &[x, y, z]));
                }
            }
        }
    }
    ValidationReport { violations }
}

/// A validated synchronization algebra. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct SyncAlgebra {
    name: String,
    alphabet: Vec<Action>,
    rank: BTreeMap<Action, usize>,
    // Keyed by unordered pair, canonicalized so that `x <= y`.
    table: BTreeMap<(Label, Label), Label>,
}

impl fmt::Debug for SyncAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SyncAlgebra")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet)
            .finish()
    }
}

fn canonical(x: &Label, y: &Label) -> (Label, Label) {
    if x <= y {
        (x.clone(), y.clone())
    } else {
        (y.clone(), x.clone())
    }
}

impl SyncAlgebra {
    /// Validates `table` and freezes it.
    pub fn from_table(name: &str, table: &AlgebraTable) -> Result<SyncAlgebra, AlgebraError> {
        let report = validate_algebra(table);
        if !report.is_ok() {
            return Err(AlgebraError::Invalid(report));
        }
        let mut canon = BTreeMap::new();
        for ((x, y), r) in &table.entries {
            if x <= y {
                canon.insert((x.clone(), y.clone()), r.clone());
            }
        }
        let rank = table
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(SyncAlgebra {
            name: name.to_string(),
            alphabet: table.alphabet.clone(),
            rank,
            table: canon,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Actions in declared order.
    pub fn alphabet(&self) -> &[Action] {
        &self.alphabet
    }

    pub fn contains(&self, a: &Action) -> bool {
        self.rank.contains_key(a)
    }

    /// Position of `a` in the declared alphabet.
    pub fn rank(&self, a: &Action) -> Option<usize> {
        self.rank.get(a).copied()
    }

    fn check(&self, l: &Label) -> Result<(), AlgebraError> {
        match l {
            Label::Action(a) if !self.contains(a) => Err(AlgebraError::UnknownLabel(a.to_string())),
            _ => Ok(()),
        }
    }

    /// `σ(x, y)`.
    pub fn sync(&self, x: &Label, y: &Label) -> Result<Label, AlgebraError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.table[&canonical(x, y)].clone())
    }

    /// `σ(a, b)` on two actions, `None` when the result is `⊥`.
    pub fn sync_actions(&self, a: &Action, b: &Action) -> Option<Label> {
        let key = canonical(&Label::Action(a.clone()), &Label::Action(b.clone()));
        match self.table.get(&key) {
            Some(Label::Bot) | None => None,
            Some(l) => Some(l.clone()),
        }
    }

    /// `σ(a, b)` when it is an action; `⊥` (and the impossible `0`) map to `None`.
    pub fn sync_action(&self, a: &Action, b: &Action) -> Option<Action> {
        match self.sync_actions(a, b) {
            Some(Label::Action(c)) => Some(c),
            _ => None,
        }
    }

    /// True iff `σ(a, 0) = a`.
    pub fn asynchronous(&self, a: &Action) -> bool {
        let l = Label::Action(a.clone());
        self.table.get(&canonical(&l, &Label::Idle)) == Some(&l)
    }

    /// Re-runs every axiom check on the frozen table.
    pub fn validate(&self) -> ValidationReport {
        validate_algebra(&self.to_table())
    }

    /// Expands back to a table over ordered pairs.
    pub fn to_table(&self) -> AlgebraTable {
        let mut t = AlgebraTable::new(self.alphabet.clone());
        for ((x, y), r) in &self.table {
            t.set(x.clone(), y.clone(), r.clone());
        }
        t
    }

    /// The builtin algebra called `name` over `alphabet`.
    pub fn builtin(name: &str, alphabet: &[Action]) -> Result<SyncAlgebra, AlgebraError> {
        match name {
            "trivial" => Ok(trivial(alphabet)),
            "ccs" => ccs(alphabet),
            "tcsp" => tcsp(alphabet),
            other => Err(AlgebraError::Malformed(format!("no builtin algebra named `{other}`"))),
        }
    }

    /// Serializes to the `{"alphabet", "entries"}` file format. Pairs that
    /// map to `⊥` are omitted, except `σ(a,0)`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        for ((x, y), r) in &self.table {
            let keep = *r != Label::Bot || matches!((x, y), (Label::Idle, Label::Action(_)));
            if keep && *x != Label::Bot {
                entries.push(EntryJson {
                    x: x.to_string(),
                    y: y.to_string(),
                    r: r.to_string(),
                });
            }
        }
        serde_json::to_value(AlgebraJson {
            alphabet: self.alphabet.iter().map(|a| a.to_string()).collect(),
            entries,
        })
        .expect("algebra serializes")
    }
}

fn base_table(alphabet: &[Action]) -> AlgebraTable {
    let mut t = AlgebraTable::new(alphabet.to_vec());
    let carrier = t.carrier();
    for x in &carrier {
        for y in &carrier {
            t.entries.insert((x.clone(), y.clone()), Label::Bot);
        }
    }
    t.set(Label::Idle, Label::Idle, Label::Idle);
    t
}

/// `σ(a,b) = ⊥` for all actions, `σ(a,0) = a`.
pub fn trivial(alphabet: &[Action]) -> SyncAlgebra {
    let mut t = base_table(alphabet);
    for a in alphabet {
        t.set(Label::Action(a.clone()), Label::Idle, Label::Action(a.clone()));
    }
    SyncAlgebra::from_table("trivial", &t).expect("trivial algebra is valid")
}

/// The complement spelling used for CCS: `a` ↔ `coa`.
pub fn ccs_complement(a: &Action) -> Action {
    match a.as_str().strip_prefix("co") {
        Some(rest) if !rest.is_empty() => Action::new(rest),
        _ => Action::new(&format!("co{}", a.as_str())),
    }
}

pub fn tau() -> Action {
    Action::new("tau")
}

/// Pure CCS: complementary pairs synchronize to `tau`, everything may run
/// alone, and `tau` synchronizes with nothing.
pub fn ccs(alphabet: &[Action]) -> Result<SyncAlgebra, AlgebraError> {
    let tau = tau();
    if !alphabet.contains(&tau) {
        return Err(AlgebraError::BadInvolution("missing `tau`".into()));
    }
    let set: BTreeSet<&Action> = alphabet.iter().collect();
    let mut t = base_table(alphabet);
    for a in alphabet {
        let la = Label::Action(a.clone());
        t.set(la.clone(), Label::Idle, la.clone());
        if *a == tau {
            continue;
        }
        let co = ccs_complement(a);
        if co == tau || !set.contains(&co) || ccs_complement(&co) != *a {
            return Err(AlgebraError::BadInvolution(format!("`{a}` has no complement in the alphabet")));
        }
        t.set(la, Label::Action(co), Label::Action(tau.clone()));
    }
    SyncAlgebra::from_table("ccs", &t)
}

/// TCSP: every non-`tau` action must synchronize with itself; only `tau`
/// runs alone.
pub fn tcsp(alphabet: &[Action]) -> Result<SyncAlgebra, AlgebraError> {
    let tau = tau();
    if !alphabet.contains(&tau) {
        return Err(AlgebraError::MissingTau);
    }
    let mut t = base_table(alphabet);
    for a in alphabet {
        let la = Label::Action(a.clone());
        if *a == tau {
            t.set(la, Label::Idle, Label::Action(tau.clone()));
        } else {
            t.set(la.clone(), la.clone(), la);
        }
    }
    SyncAlgebra::from_table("tcsp", &t)
}

/// Smallest alphabet on which builtin `name` accepts the given actions:
/// adds `tau` for ccs/tcsp and complements for ccs. Order of first
/// appearance is kept, additions go last.
pub fn close_alphabet(name: &str, actions: &[Action]) -> Vec<Action> {
    let mut out: Vec<Action> = Vec::new();
    let push = |a: Action, out: &mut Vec<Action>| {
        if !out.contains(&a) {
            out.push(a);
        }
    };
    for a in actions {
        push(a.clone(), &mut out);
    }
    if name == "ccs" {
        for a in actions {
            if *a != tau() {
                push(ccs_complement(a), &mut out);
            }
        }
    }
    if name == "ccs" || name == "tcsp" {
        push(tau(), &mut out);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    x: String,
    y: String,
    r: String,
}

#[derive(Serialize, Deserialize)]
struct AlgebraJson {
    alphabet: Vec<String>,
    #[serde(default)]
    entries: Vec<EntryJson>,
}

/// Reads the JSON file format into a raw table. Omitted pairs default to
/// `⊥` (and `σ(0,0)` to `0`); every `σ(a,0)` must be given explicitly.
/// Contradictory entries for `(x,y)` and `(y,x)` are kept so that
/// validation can report them.
pub fn table_from_json(text: &str, max_alphabet: usize) -> Result<AlgebraTable, AlgebraError> {
    let raw: AlgebraJson = serde_json::from_str(text).map_err(|e| AlgebraError::Json(e.to_string()))?;
    if raw.alphabet.len() > max_alphabet {
        return Err(AlgebraError::AlphabetTooLarge {
            size: raw.alphabet.len(),
            cap: max_alphabet,
        });
    }
    let mut alphabet = Vec::new();
    for s in &raw.alphabet {
        if !is_identifier(s) || s == BOT_TEXT {
            return Err(AlgebraError::Malformed(format!("`{s}` is not a valid action name")));
        }
        alphabet.push(Action::new(s));
    }
    let mut table = base_table(&alphabet);
    let mut given: BTreeMap<(Label, Label), Label> = BTreeMap::new();
    for e in &raw.entries {
        let parse = |s: &str| Label::parse(s).ok_or_else(|| AlgebraError::Malformed(format!("bad label `{s}`")));
        let (x, y, r) = (parse(&e.x)?, parse(&e.y)?, parse(&e.r)?);
        for l in [&x, &y, &r] {
            if let Label::Action(a) = l {
                if !alphabet.contains(a) {
                    return Err(AlgebraError::Malformed(format!(
                        "entry ({},{})={} mentions `{a}` outside the alphabet",
                        e.x, e.y, e.r
                    )));
                }
            }
        }
        given.insert((x, y), r);
    }
    for ((x, y), r) in &given {
        table.entries.insert((x.clone(), y.clone()), r.clone());
        let rev = (y.clone(), x.clone());
        if !given.contains_key(&rev) {
            table.entries.insert(rev, r.clone());
        }
    }
    for a in &alphabet {
        let la = Label::Action(a.clone());
        if !given.contains_key(&(la.clone(), Label::Idle)) && !given.contains_key(&(Label::Idle, la)) {
            return Err(AlgebraError::Malformed(format!("σ({a},0) must be given explicitly")));
        }
    }
    Ok(table)
}

/// Reads and validates an algebra file.
pub fn algebra_from_json(name: &str, text: &str, max_alphabet: usize) -> Result<SyncAlgebra, AlgebraError> {
    SyncAlgebra::from_table(name, &table_from_json(text, max_alphabet)?)
}
