//! Syntax and operational semantics of BPA systems.
//!
//! A system is a finite set of process constants together with Greibach-style
//! rules `X -a-> Y Z`. A process is a finite string of constants; only the head
//! constant can move, and the rest of the string is carried along unchanged.
//!
//! The textual format is line oriented:
//!
//! ```text
//! # comments run to the end of the line
//! constants: X X' Y Y'
//! X -b-> eps
//! X -tau-> X'
//! X' -a-> eps
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved spelling of the silent action.
pub const TAU: &str = "tau";
/// Reserved spelling of the empty process.
pub const EPS: &str = "eps";

/// Dense index of a process constant inside one system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConstId(pub u32);

impl ConstId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense index into a system's action table. Index 0 is always the silent action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub u32);

impl ActionId {
    pub const TAU: ActionId = ActionId(0);

    pub fn is_silent(self) -> bool {
        self == Self::TAU
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Silent,
    Visible(String),
}

impl Action {
    pub fn name(&self) -> &str {
        match self {
            Action::Silent => TAU,
            Action::Visible(name) => name,
        }
    }
}

/// A string of constants. The empty string is the terminated process ε.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Process(pub Vec<ConstId>);

impl Process {
    pub fn empty() -> Self {
        Process(Vec::new())
    }

    pub fn single(c: ConstId) -> Self {
        Process(vec![c])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn head(&self) -> Option<ConstId> {
        self.0.first().copied()
    }

    pub fn tail(&self) -> &[ConstId] {
        if self.0.is_empty() {
            &[]
        } else {
            &self.0[1..]
        }
    }

    pub fn constants(&self) -> &[ConstId] {
        &self.0
    }

    pub fn concat(&self, other: &Process) -> Process {
        let mut ids = Vec::with_capacity(self.0.len() + other.0.len());
        ids.extend_from_slice(&self.0);
        ids.extend_from_slice(&other.0);
        Process(ids)
    }
}

impl From<Vec<ConstId>> for Process {
    fn from(ids: Vec<ConstId>) -> Self {
        Process(ids)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: ConstId,
    pub label: ActionId,
    pub rhs: Process,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("missing `constants:` declaration before the first rule")]
    MissingConstants,
    #[error("duplicate `constants:` declaration")]
    DuplicateConstants,
    #[error("constant `{0}` declared twice")]
    DuplicateConstant(String),
    #[error("`{0}` is reserved and cannot name a constant")]
    ReservedName(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("undeclared constant `{0}`")]
    UndeclaredConstant(String),
    #[error("expected a rule of the form `X -action-> rhs`")]
    MalformedRule,
    #[error("expected an arrow `-action->`, found `{0}`")]
    MalformedArrow(String),
    #[error("`eps` must stand alone on the right-hand side")]
    MisplacedEps,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProcessParseError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("`eps` must stand alone")]
    MisplacedEps,
}

/// A BPA system: constants, actions and rules. Immutable once built.
#[derive(Clone, Debug)]
pub struct BpaSystem {
    constants: Vec<String>,
    actions: Vec<Action>,
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<usize>>,
}

impl PartialEq for BpaSystem {
    fn eq(&self, other: &Self) -> bool {
        self.constants == other.constants
            && self.actions == other.actions
            && self.rules == other.rules
    }
}

impl Eq for BpaSystem {}

impl BpaSystem {
    pub fn builder() -> SystemBuilder {
        SystemBuilder::default()
    }

    pub fn num_constants(&self) -> usize {
        self.constants.len()
    }

    pub fn constant_ids(&self) -> impl Iterator<Item = ConstId> {
        (0..self.constants.len() as u32).map(ConstId)
    }

    pub fn constant_name(&self, c: ConstId) -> &str {
        &self.constants[c.index()]
    }

    pub fn constant_names(&self) -> &[String] {
        &self.constants
    }

    pub fn lookup(&self, name: &str) -> Option<ConstId> {
        self.constants
            .iter()
            .position(|n| n == name)
            .map(|i| ConstId(i as u32))
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, a: ActionId) -> &Action {
        &self.actions[a.0 as usize]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        self.action(a).name()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Indices into [`rules`](Self::rules) of the rules whose left-hand side is `c`, in rule order.
    pub fn rules_of(&self, c: ConstId) -> &[usize] {
        &self.by_lhs[c.index()]
    }

    pub fn has_silent_rules(&self) -> bool {
        self.rules.iter().any(|r| r.label.is_silent())
    }

    /// All one-step transitions of `p`, in rule order of its head constant.
    pub fn transitions_of(&self, p: &Process) -> Vec<(ActionId, Process)> {
        let Some(head) = p.head() else {
            return Vec::new();
        };
        let tail = p.tail();
        self.rules_of(head)
            .iter()
            .map(|&r| {
                let rule = &self.rules[r];
                let mut ids = Vec::with_capacity(rule.rhs.len() + tail.len());
                ids.extend_from_slice(rule.rhs.constants());
                ids.extend_from_slice(tail);
                (rule.label, Process(ids))
            })
            .collect()
    }

    /// Parses whitespace separated constant names, or the literal `eps`.
    pub fn parse_process(&self, text: &str) -> Result<Process, ProcessParseError> {
        let index: HashMap<&str, ConstId> = self
            .constants
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), ConstId(i as u32)))
            .collect();
        parse_process_with(text, |name| index.get(name).copied())
    }

    pub fn format_process(&self, p: &Process) -> String {
        format_ids(p.constants(), |c| self.constant_name(c))
    }

    pub fn format_rule(&self, rule: &Rule) -> String {
        format!(
            "{} -{}-> {}",
            self.constant_name(rule.lhs),
            self.action_name(rule.label),
            self.format_process(&rule.rhs)
        )
    }
}

pub(crate) fn parse_process_with(
    text: &str,
    mut resolve: impl FnMut(&str) -> Option<ConstId>,
) -> Result<Process, ProcessParseError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() || tokens == [EPS] {
        return Ok(Process::empty());
    }
    let mut ids = Vec::with_capacity(tokens.len());
    for tok in tokens {
        if tok == EPS {
            return Err(ProcessParseError::MisplacedEps);
        }
        let id = resolve(tok).ok_or_else(|| ProcessParseError::UnknownConstant(tok.to_string()))?;
        ids.push(id);
    }
    Ok(Process(ids))
}

pub(crate) fn format_ids<'a>(ids: &[ConstId], name: impl Fn(ConstId) -> &'a str) -> String {
    if ids.is_empty() {
        return EPS.to_string();
    }
    let mut out = String::new();
    for (i, &c) in ids.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(name(c));
    }
    out
}

/// Incremental constructor used by the parser, the generator and standardization.
#[derive(Debug, Default)]
pub struct SystemBuilder {
    constants: Vec<String>,
    actions: Vec<Action>,
    rules: Vec<Rule>,
    seen: HashSet<Rule>,
}

impl SystemBuilder {
    pub fn constant(&mut self, name: impl Into<String>) -> ConstId {
        let name = name.into();
        if let Some(i) = self.constants.iter().position(|n| *n == name) {
            return ConstId(i as u32);
        }
        self.constants.push(name);
        ConstId(self.constants.len() as u32 - 1)
    }

    pub fn action(&mut self, action: Action) -> ActionId {
        if self.actions.is_empty() {
            self.actions.push(Action::Silent);
        }
        if let Some(i) = self.actions.iter().position(|a| *a == action) {
            return ActionId(i as u32);
        }
        self.actions.push(action);
        ActionId(self.actions.len() as u32 - 1)
    }

    pub fn visible(&mut self, name: &str) -> ActionId {
        if name == TAU {
            self.action(Action::Silent)
        } else {
            self.action(Action::Visible(name.to_string()))
        }
    }

    /// Adds a rule; returns false if the identical rule was already present.
    pub fn rule(&mut self, lhs: ConstId, label: ActionId, rhs: Process) -> bool {
        let rule = Rule { lhs, label, rhs };
        if self.seen.contains(&rule) {
            return false;
        }
        self.seen.insert(rule.clone());
        self.rules.push(rule);
        true
    }

    pub fn build(mut self) -> BpaSystem {
        if self.actions.is_empty() {
            self.actions.push(Action::Silent);
        }
        let n = self.constants.len();
        for r in &self.rules {
            assert!(r.lhs.index() < n, "rule refers to an unknown constant");
            assert!(r.rhs.constants().iter().all(|c| c.index() < n));
        }
        let mut by_lhs = vec![Vec::new(); n];
        for (i, r) in self.rules.iter().enumerate() {
            by_lhs[r.lhs.index()].push(i);
        }
        BpaSystem {
            constants: self.constants,
            actions: self.actions,
            rules: self.rules,
            by_lhs,
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '.')
}

/// Splits a line into whitespace separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(off, t)| (line[..off].chars().count() + 1, t))
        .collect()
}

/// Parses the line-oriented system format. Duplicate rules are collapsed.
pub fn parse_system(text: &str) -> Result<BpaSystem, ParseError> {
    let mut builder = SystemBuilder::default();
    builder.action(Action::Silent);
    let mut names: HashMap<String, ConstId> = HashMap::new();
    let mut declared = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(&(col0, first)) = toks.first() else {
            continue;
        };
        let err = |column: usize, kind: ParseErrorKind| ParseError {
            line: line_no,
            column,
            kind,
        };

        if let Some(rest) = first.strip_prefix("constants:") {
            if declared {
                return Err(err(col0, ParseErrorKind::DuplicateConstants));
            }
            declared = true;
            let mut decls: Vec<(usize, &str)> = Vec::new();
            if !rest.is_empty() {
                decls.push((col0 + "constants:".len(), rest));
            }
            decls.extend_from_slice(&toks[1..]);
            for (col, name) in decls {
                if name == TAU || name == EPS {
                    return Err(err(col, ParseErrorKind::ReservedName(name.to_string())));
                }
                if !is_identifier(name) {
                    return Err(err(col, ParseErrorKind::InvalidIdentifier(name.to_string())));
                }
                if names.contains_key(name) {
                    return Err(err(col, ParseErrorKind::DuplicateConstant(name.to_string())));
                }
                let id = builder.constant(name);
                names.insert(name.to_string(), id);
            }
            continue;
        }

        if !declared {
            return Err(err(col0, ParseErrorKind::MissingConstants));
        }
        if toks.len() < 3 {
            return Err(err(col0, ParseErrorKind::MalformedRule));
        }
        let lhs = *names
            .get(first)
            .ok_or_else(|| err(col0, ParseErrorKind::UndeclaredConstant(first.to_string())))?;
        let (acol, arrow) = toks[1];
        let label = arrow
            .strip_prefix('-')
            .and_then(|a| a.strip_suffix("->"))
            .filter(|a| is_identifier(a) && *a != EPS)
            .ok_or_else(|| err(acol, ParseErrorKind::MalformedArrow(arrow.to_string())))?;
        let action = builder.visible(label);

        let rhs_toks = &toks[2..];
        let rhs = if rhs_toks.len() == 1 && rhs_toks[0].1 == EPS {
            Process::empty()
        } else {
            let mut ids = Vec::with_capacity(rhs_toks.len());
            for &(col, name) in rhs_toks {
                if name == EPS {
                    return Err(err(col, ParseErrorKind::MisplacedEps));
                }
                let id = *names
                    .get(name)
                    .ok_or_else(|| err(col, ParseErrorKind::UndeclaredConstant(name.to_string())))?;
                ids.push(id);
            }
            Process(ids)
        };
        builder.rule(lhs, action, rhs);
    }

    Ok(builder.build())
}

/// Renders a system in the textual format; `parse_system` inverts it.
pub fn serialize_system(sys: &BpaSystem) -> String {
    let mut out = String::from("constants:");
    for name in &sys.constants {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for rule in &sys.rules {
        out.push_str(&sys.format_rule(rule));
        out.push('\n');
    }
    out
}

impl fmt::Display for BpaSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_system(self))
    }
}
