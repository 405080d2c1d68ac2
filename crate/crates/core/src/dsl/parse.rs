use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::expr::Selection;
use super::{
    Diagnostics, DslError, FactorDecl, Gate, GateKind, ObservableDecl, Pos, ScenarioSpec, StateDecl, Term,
    Warning,
};
use crate::scenarios::Epoch;

/// Deepest nesting of parentheses, unary signs and function calls.
pub const MAX_DEPTH: usize = 64;
/// Largest total dimension a description may declare.
pub const MAX_DIMENSION: usize = 1024;
pub const MAX_INPUT_BYTES: usize = 1 << 20;

const NORM_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-8;

const HEADERS: [&str; 5] = ["FACTORS", "INITIAL", "GATES", "POSTSELECT", "OBSERVABLES"];
const GATE_KINDS: [&str; 4] = ["beamsplitter", "swap_map", "projector_select", "custom_unitary"];
const EPOCHS: [&str; 4] = ["t0", "t1", "t2", "final"];

fn is_label_char(c: char) -> bool {
    !c.is_whitespace() && !c.is_control() && !":=,[]#;|()@<>".contains(c)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Character cursor over one source line.
pub(crate) struct Cursor {
    line: usize,
    chars: Vec<char>,
    i: usize,
    pub(crate) operations: usize,
}

impl Cursor {
    pub(crate) fn new(line: usize, text: &str) -> Self {
        Cursor {
            line,
            chars: text.chars().collect(),
            i: 0,
            operations: 0,
        }
    }

    pub(crate) fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.i + 1,
        }
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    pub(crate) fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.i + n).copied()
    }

    pub(crate) fn bump(&mut self) {
        self.i += 1;
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.i += 1;
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.i >= self.chars.len()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.chars.len() >= self.i + n && self.chars[self.i..self.i + n].iter().copied().eq(s.chars()) {
            self.i += n;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char, what: &str) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(DslError::syntax(self.pos(), &[what], self.found()))
        }
    }

    /// Description of the token at the cursor, for error messages.
    pub(crate) fn found(&self) -> String {
        let rest = &self.chars[self.i.min(self.chars.len())..];
        let Some(&first) = rest.first() else {
            return "end of line".into();
        };
        let word: String = if is_ident_char(first) || is_label_char(first) {
            rest.iter().take_while(|c| is_label_char(**c)).take(24).collect()
        } else if first.is_control() {
            return format!("character U+{:04X}", first as u32);
        } else {
            first.to_string()
        };
        format!("`{word}`")
    }

    pub(crate) fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        if !self.peek().is_some_and(is_ident_start) {
            return None;
        }
        let start = self.i;
        while self.peek().is_some_and(is_ident_char) {
            self.i += 1;
        }
        Some(self.chars[start..self.i].iter().collect())
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        self.skip_ws();
        let at = self.pos();
        match self.ident() {
            Some(s) => Ok((s, at)),
            None => Err(DslError::syntax(at, &[what], self.found())),
        }
    }

    fn label(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.i;
        while self.peek().is_some_and(is_label_char) {
            self.i += 1;
        }
        (self.i > start).then(|| self.chars[start..self.i].iter().collect())
    }

    pub(crate) fn expect_label(&mut self) -> Result<String, DslError> {
        self.skip_ws();
        let at = self.pos();
        self.label()
            .ok_or_else(|| DslError::syntax(at, &["a label"], self.found()))
    }

    fn expect_end(&mut self) -> Result<(), DslError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(DslError::syntax(self.pos(), &["end of line"], self.found()))
        }
    }

    fn epoch(&mut self) -> Result<Epoch, DslError> {
        self.skip_ws();
        let at = self.pos();
        let expected: Vec<String> = EPOCHS.iter().map(|e| format!("`{e}`")).collect();
        let expected: Vec<&str> = expected.iter().map(String::as_str).collect();
        match self.ident() {
            Some(word) => word
                .parse()
                .map_err(|_| DslError::syntax(at, &expected, format!("`{word}`"))),
            None => Err(DslError::syntax(at, &expected, self.found())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Factors,
    Initial,
    Gates,
    Postselect,
    Observables,
}

impl Section {
    fn from_header(s: &str) -> Option<Section> {
        Some(match s {
            "FACTORS" => Section::Factors,
            "INITIAL" => Section::Initial,
            "GATES" => Section::Gates,
            "POSTSELECT" => Section::Postselect,
            "OBSERVABLES" => Section::Observables,
            _ => return None,
        })
    }
}

#[derive(Default)]
struct Raw {
    factors_pos: Option<Pos>,
    factors: Vec<FactorDecl>,
    initial: Option<StateDecl>,
    gates: Vec<Gate>,
    postselect: Option<StateDecl>,
    observables: Vec<ObservableDecl>,
}

/// Parses and validates a description. Every syntax error is reported; if
/// there are none, every validation error is.
pub fn parse(src: &str) -> Result<ScenarioSpec, Diagnostics> {
    if src.len() > MAX_INPUT_BYTES {
        return Err(DslError::validation(
            Pos { line: 1, col: 1 },
            format!("input is {} bytes, the limit is {MAX_INPUT_BYTES}", src.len()),
        )
        .into());
    }
    let raw = parse_sections(src)?;
    validate(raw)
}

pub fn parse_bytes(bytes: &[u8]) -> Result<ScenarioSpec, Diagnostics> {
    if bytes.len() > MAX_INPUT_BYTES {
        return Err(DslError::validation(
            Pos { line: 1, col: 1 },
            format!("input is {} bytes, the limit is {MAX_INPUT_BYTES}", bytes.len()),
        )
        .into());
    }
    match std::str::from_utf8(bytes) {
        Ok(s) => parse(s),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = good.iter().filter(|b| **b == b'\n').count() + 1;
            let line_start = good.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
            let col = String::from_utf8_lossy(&good[line_start..]).chars().count() + 1;
            Err(DslError::syntax(Pos { line, col }, &["UTF-8 text"], "an invalid byte sequence").into())
        }
    }
}

fn parse_sections(src: &str) -> Result<Raw, Diagnostics> {
    let mut raw = Raw::default();
    let mut errors = Vec::new();
    let mut section: Option<Section> = None;
    for (n, line) in src.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let content = line.split('#').next().unwrap_or("");
        let mut c = Cursor::new(n + 1, content);
        if c.at_end() {
            continue;
        }
        let header_at = c.pos();
        let first_word: String = content.trim().to_owned();
        if let Some(next) = Section::from_header(&first_word) {
            if section.is_some_and(|s| s >= next) {
                let allowed: Vec<String> = HEADERS
                    .iter()
                    .filter(|h| section.is_none_or(|s| Section::from_header(h).unwrap() > s))
                    .map(|h| format!("`{h}`"))
                    .collect();
                let allowed: Vec<&str> = allowed.iter().map(String::as_str).collect();
                errors.push(DslError::syntax(header_at, &allowed, format!("`{first_word}`")));
            } else {
                section = Some(next);
                match next {
                    Section::Factors => raw.factors_pos = Some(header_at),
                    Section::Initial => {
                        raw.initial = Some(StateDecl {
                            terms: Vec::new(),
                            pos: header_at,
                        })
                    }
                    Section::Postselect => {
                        raw.postselect = Some(StateDecl {
                            terms: Vec::new(),
                            pos: header_at,
                        })
                    }
                    _ => {}
                }
            }
            continue;
        }
        let result = match section {
            None => {
                let h: Vec<String> = HEADERS.iter().map(|h| format!("`{h}`")).collect();
                let h: Vec<&str> = h.iter().map(String::as_str).collect();
                Err(DslError::syntax(header_at, &h, c.found()))
            }
            Some(Section::Factors) => factor_line(&mut c).map(|f| raw.factors.push(f)),
            Some(Section::Initial) => {
                term_line(&mut c).map(|t| raw.initial.as_mut().expect("opened by header").terms.push(t))
            }
            Some(Section::Postselect) => {
                term_line(&mut c).map(|t| raw.postselect.as_mut().expect("opened by header").terms.push(t))
            }
            Some(Section::Gates) => gate_line(&mut c).map(|g| raw.gates.push(g)),
            Some(Section::Observables) => observable_line(&mut c).map(|o| raw.observables.push(o)),
        };
        if let Err(e) = result {
            errors.push(e);
        }
    }
    if errors.is_empty() {
        Ok(raw)
    } else {
        Err(Diagnostics(errors))
    }
}

fn factor_line(c: &mut Cursor) -> Result<FactorDecl, DslError> {
    let (name, pos) = c.expect_ident("a factor name")?;
    c.expect(':', "`:`")?;
    let mut labels = vec![c.expect_label()?];
    while !c.at_end() {
        labels.push(c.expect_label()?);
    }
    Ok(FactorDecl { name, labels, pos })
}

fn term_line(c: &mut Cursor) -> Result<Term, DslError> {
    c.skip_ws();
    let pos = c.pos();
    let mut labels = vec![c.expect_label()?];
    while !c.eat(':') {
        labels.push(
            c.label()
                .ok_or_else(|| DslError::syntax(c.pos(), &["a label", "`:`"], c.found()))?,
        );
    }
    let amplitude = c.amplitude()?;
    c.expect_end()?;
    Ok(Term {
        labels,
        amplitude,
        pos,
    })
}

fn assignment(c: &mut Cursor) -> Result<(String, String), DslError> {
    let (f, _) = c.expect_ident("a factor name")?;
    c.expect('=', "`=`")?;
    Ok((f, c.expect_label()?))
}

fn gate_line(c: &mut Cursor) -> Result<Gate, DslError> {
    c.skip_ws();
    let pos = c.pos();
    let epoch = c.epoch()?;
    c.skip_ws();
    let kind_at = c.pos();
    let kinds: Vec<String> = GATE_KINDS.iter().map(|k| format!("`{k}`")).collect();
    let kinds: Vec<&str> = kinds.iter().map(String::as_str).collect();
    let kind = match c.ident().as_deref() {
        Some("beamsplitter") => {
            let (factor, _) = c.expect_ident("a factor name")?;
            c.expect(':', "`:`")?;
            let modes = [c.expect_label()?, c.expect_label()?];
            let to = if c.eat_str("->") {
                Some([c.expect_label()?, c.expect_label()?])
            } else {
                None
            };
            let (mut phase_in, mut phase_out) = (None, None);
            while !c.at_end() {
                let at = c.pos();
                let key = c.ident();
                let slot = match key.as_deref() {
                    Some("phase_in") => &mut phase_in,
                    Some("phase_out") => &mut phase_out,
                    _ => {
                        let found = key.map_or_else(|| c.found(), |k| format!("`{k}`"));
                        return Err(DslError::syntax(
                            at,
                            &["`phase_in`", "`phase_out`", "end of line"],
                            found,
                        ));
                    }
                };
                if slot.is_some() {
                    return Err(DslError::validation(at, "phase given twice"));
                }
                c.expect('=', "`=`")?;
                *slot = Some(c.real_scalar()?);
            }
            GateKind::BeamSplitter {
                factor,
                modes,
                to,
                phase_in: phase_in.unwrap_or(0.0),
                phase_out: phase_out.unwrap_or(0.0),
            }
        }
        Some("swap_map") => {
            let mut left = vec![assignment(c)?];
            while !c.eat_str("<->") {
                if c.at_end() {
                    return Err(DslError::syntax(c.pos(), &["`<->`", "a factor name"], c.found()));
                }
                left.push(assignment(c)?);
            }
            let mut right = vec![assignment(c)?];
            while !c.at_end() {
                right.push(assignment(c)?);
            }
            GateKind::SwapMap { left, right }
        }
        Some("projector_select") => {
            let (name, _) = c.expect_ident("a selection name")?;
            c.expect(':', "`:`")?;
            GateKind::ProjectorSelect {
                name,
                selections: c.selections(None)?,
            }
        }
        Some("custom_unitary") => {
            let mut factors = vec![c.expect_ident("a factor name")?.0];
            while !c.eat(':') {
                factors.push(c.expect_ident("a factor name or `:`")?.0);
            }
            let mut rows = vec![vec![c.amplitude()?]];
            loop {
                if c.eat(';') {
                    rows.last_mut().expect("nonempty").push(c.amplitude()?);
                } else if c.eat('|') {
                    rows.push(vec![c.amplitude()?]);
                } else {
                    c.expect_end()
                        .map_err(|_| DslError::syntax(c.pos(), &["`;`", "`|`", "end of line"], c.found()))?;
                    break;
                }
            }
            GateKind::CustomUnitary { factors, rows }
        }
        Some(other) => return Err(DslError::syntax(kind_at, &kinds, format!("`{other}`"))),
        None => return Err(DslError::syntax(kind_at, &kinds, c.found())),
    };
    c.expect_end()?;
    Ok(Gate { epoch, kind, pos })
}

fn observable_line(c: &mut Cursor) -> Result<ObservableDecl, DslError> {
    let (name, pos) = c.expect_ident("an observable name")?;
    let epoch = if c.eat('@') { Some(c.epoch()?) } else { None };
    c.expect('=', "`=`")?;
    let expr = c.operator()?;
    c.expect_end()?;
    Ok(ObservableDecl {
        name,
        epoch,
        expr,
        pos,
    })
}

struct Checker<'a> {
    factors: &'a [FactorDecl],
    errors: Vec<DslError>,
}

impl Checker<'_> {
    fn fail(&mut self, pos: Pos, msg: impl Into<String>) {
        self.errors.push(DslError::validation(pos, msg));
    }

    fn factor(&mut self, pos: Pos, name: &str) -> Option<&FactorDecl> {
        let found = self.factors.iter().find(|f| f.name == name);
        if found.is_none() {
            self.fail(pos, format!("unknown factor `{name}`"));
        }
        found
    }

    fn label(&mut self, pos: Pos, factor: &str, label: &str) -> Option<usize> {
        let f = self.factor(pos, factor)?;
        let i = f.labels.iter().position(|l| l == label);
        if i.is_none() {
            self.fail(pos, format!("unknown label `{label}` in factor `{factor}`"));
        }
        i
    }

    fn selections<'s>(&mut self, pos: Pos, sels: impl IntoIterator<Item = &'s Selection>) {
        for s in sels {
            for l in &s.labels {
                self.label(pos, &s.factor, l);
            }
        }
    }

    fn distinct(&mut self, pos: Pos, names: &[&str], what: &str) {
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                self.fail(pos, format!("{what} `{n}` appears twice"));
            }
        }
    }

    fn state(&mut self, decl: &mut StateDecl, section: &str, warnings: &mut Vec<Warning>) {
        if decl.terms.is_empty() {
            self.fail(decl.pos, format!("{section} has no terms"));
            return;
        }
        let mut seen = HashSet::new();
        let mut ok = true;
        for t in &decl.terms {
            if t.labels.len() != self.factors.len() {
                self.fail(
                    t.pos,
                    format!(
                        "expected {} labels, one per factor, found {}",
                        self.factors.len(),
                        t.labels.len()
                    ),
                );
                ok = false;
                continue;
            }
            let factors = self.factors;
            for (f, l) in factors.iter().zip(&t.labels) {
                ok &= self.label(t.pos, &f.name, l).is_some();
            }
            if !seen.insert(t.labels.clone()) {
                self.fail(
                    t.pos,
                    format!("basis state `{}` listed twice", t.labels.join(" ")),
                );
                ok = false;
            }
        }
        if !ok {
            return;
        }
        let norm = decl
            .terms
            .iter()
            .map(|t| t.amplitude.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !norm.is_finite() || norm <= 1e-12 {
            self.fail(decl.pos, format!("{section} state cannot be normalized"));
        } else if (norm - 1.0).abs() > NORM_TOL {
            warnings.push(Warning {
                pos: decl.pos,
                message: format!("{section} state has norm {norm}; renormalized"),
            });
            for t in &mut decl.terms {
                t.amplitude /= norm;
            }
        }
    }

    fn gate(&mut self, g: &Gate) {
        match &g.kind {
            GateKind::BeamSplitter {
                factor, modes, to, ..
            } => {
                let mut all: Vec<&str> = modes.iter().map(String::as_str).collect();
                if let Some(to) = to {
                    if to != modes {
                        all.extend(to.iter().map(String::as_str));
                    }
                }
                for m in &all {
                    self.label(g.pos, factor, m);
                }
                self.distinct(g.pos, &all, "mode");
            }
            GateKind::SwapMap { left, right } => {
                for (f, l) in left.iter().chain(right) {
                    self.label(g.pos, f, l);
                }
                let names =
                    |side: &[(String, String)]| side.iter().map(|(f, _)| f.clone()).collect::<Vec<_>>();
                let (l, r) = (names(left), names(right));
                self.distinct(g.pos, &l.iter().map(String::as_str).collect::<Vec<_>>(), "factor");
                self.distinct(g.pos, &r.iter().map(String::as_str).collect::<Vec<_>>(), "factor");
                let (ls, rs): (HashSet<_>, HashSet<_>) = (l.iter().collect(), r.iter().collect());
                if ls != rs {
                    self.fail(g.pos, "both sides of a swap_map must assign the same factors");
                } else {
                    let mut a = left.clone();
                    let mut b = right.clone();
                    a.sort();
                    b.sort();
                    if a == b {
                        self.fail(g.pos, "swap_map sides are identical");
                    }
                }
            }
            GateKind::ProjectorSelect { selections, .. } => self.selections(g.pos, selections),
            GateKind::CustomUnitary { factors, rows } => {
                self.distinct(
                    g.pos,
                    &factors.iter().map(String::as_str).collect::<Vec<_>>(),
                    "factor",
                );
                let mut dim = 1usize;
                for f in factors {
                    match self.factor(g.pos, f) {
                        Some(d) => dim = dim.saturating_mul(d.labels.len()),
                        None => return,
                    }
                }
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    self.fail(
                        g.pos,
                        format!("custom_unitary on these factors needs {dim} rows of {dim} entries"),
                    );
                    return;
                }
                let u = DMatrix::from_fn(dim, dim, |r, c| rows[r][c]);
                let dev = (u.adjoint() * &u - DMatrix::<Complex64>::identity(dim, dim))
                    .iter()
                    .fold(0.0f64, |m, z| m.max(z.norm()));
                if dev.is_nan() || dev > UNITARY_TOL {
                    self.fail(
                        g.pos,
                        format!("custom_unitary is not unitary (max |U^dag U - I| = {dev:e})"),
                    );
                }
            }
        }
    }
}

fn validate(mut raw: Raw) -> Result<ScenarioSpec, Diagnostics> {
    let mut warnings = Vec::new();
    let start = Pos { line: 1, col: 1 };
    let factors = std::mem::take(&mut raw.factors);
    let mut ck = Checker {
        factors: &factors,
        errors: Vec::new(),
    };
    if factors.is_empty() {
        ck.fail(raw.factors_pos.unwrap_or(start), "no factors declared");
    }
    let mut dim = 1usize;
    for (i, f) in factors.iter().enumerate() {
        if factors[..i].iter().any(|g| g.name == f.name) {
            ck.fail(f.pos, format!("factor `{}` declared twice", f.name));
        }
        ck.distinct(
            f.pos,
            &f.labels.iter().map(String::as_str).collect::<Vec<_>>(),
            "label",
        );
        dim = dim.saturating_mul(f.labels.len());
    }
    if dim > MAX_DIMENSION {
        ck.fail(
            raw.factors_pos.unwrap_or(start),
            format!("total dimension {dim} exceeds the limit of {MAX_DIMENSION}"),
        );
    }
    let mut initial = raw.initial.take();
    match initial.as_mut() {
        None => ck.fail(start, "missing INITIAL section"),
        Some(s) if !factors.is_empty() => ck.state(s, "INITIAL", &mut warnings),
        Some(_) => {}
    }
    if let Some(s) = raw.postselect.as_mut() {
        if !factors.is_empty() {
            ck.state(s, "POSTSELECT", &mut warnings);
        }
    }
    let mut last_epoch = Epoch::T0;
    for g in &raw.gates {
        if g.epoch < last_epoch {
            ck.fail(
                g.pos,
                format!("gate at {} follows a gate at {last_epoch}", g.epoch),
            );
        }
        last_epoch = last_epoch.max(g.epoch);
        ck.gate(g);
    }
    let mut names: Vec<(&str, Pos)> = Vec::new();
    if let Some(p) = &raw.postselect {
        names.push(("postselect", p.pos));
    }
    for g in &raw.gates {
        if let GateKind::ProjectorSelect { name, .. } = &g.kind {
            names.push((name, g.pos));
        }
    }
    let recorded: Vec<Epoch> = Epoch::ALL
        .into_iter()
        .filter(|e| *e == Epoch::T0 || raw.gates.iter().any(|g| g.epoch == *e))
        .collect();
    for o in &raw.observables {
        names.push((&o.name, o.pos));
        ck.selections(o.pos, o.expr.selections());
        if let Some(e) = o.epoch {
            if !recorded.contains(&e) {
                ck.fail(o.pos, format!("no state is recorded at {e}; it has no gates"));
            }
        }
    }
    for (i, (n, pos)) in names.iter().enumerate() {
        if names[..i].iter().any(|(m, _)| m == n) {
            ck.fail(*pos, format!("name `{n}` is already used"));
        }
    }
    let mut errors = ck.errors;
    if errors.is_empty() {
        Ok(ScenarioSpec {
            factors,
            initial: initial.expect("checked above"),
            gates: raw.gates,
            postselect: raw.postselect,
            observables: raw.observables,
            warnings,
        })
    } else {
        errors.sort_by_key(|e| (e.pos().line, e.pos().col));
        Err(Diagnostics(errors))
    }
}
