//! Line-oriented job language.
//!
//! ```text
//! field gf(2) vars t1,t2
//! let q = quaternion(t1, t2) with involution orthogonal
//! let r = quaternion(1, t1*t2) with involution orthogonal(0, 1, 1)
//! let a = tensor(q, r)
//! scramble a seed 7
//! certificate a unit
//! run decompose on a
//! ```

use std::collections::HashSet;
use std::fmt;

use char2alg::fields::{Field, FieldElem, FieldError};
use thiserror::Error;

/// A located input error; line and column are 1-based.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct InputError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl InputError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> InputError {
        InputError { line, col, msg: msg.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    AnalyzeConic,
    Decompose,
    Pfister,
    Classify,
    Metabolic,
    Transpose,
    CheckCertificate,
}

impl Command {
    const ALL: [Command; 7] = [
        Command::AnalyzeConic,
        Command::Decompose,
        Command::Pfister,
        Command::Classify,
        Command::Metabolic,
        Command::Transpose,
        Command::CheckCertificate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::AnalyzeConic => "analyze-conic",
            Command::Decompose => "decompose",
            Command::Pfister => "pfister",
            Command::Classify => "classify",
            Command::Metabolic => "metabolic",
            Command::Transpose => "transpose",
            Command::CheckCertificate => "check-certificate",
        }
    }

    fn from_name(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvolutionSpec {
    /// The canonical involution.
    Symplectic,
    /// `Int(c0 + c1 v + c2 uv)` composed with the canonical involution.
    Orthogonal([FieldElem; 3]),
}

/// `sum coeff * e_index`.
pub type Combination = Vec<(FieldElem, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertificateSpec {
    /// `S = F * 1`.
    Unit,
    Generators(Vec<Combination>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Directive {
    Quaternion { name: String, a: FieldElem, b: FieldElem, involution: InvolutionSpec },
    Tensor { name: String, left: String, right: String },
    Scramble { name: String, seed: u64 },
    Certificate { name: String, spec: CertificateSpec },
    Run { command: Command, name: String },
}

#[derive(Clone, Debug)]
pub struct Located {
    pub line: usize,
    pub directive: Directive,
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub field: Field,
    pub steps: Vec<Located>,
}

impl JobSpec {
    /// One canonical line per directive, field first.
    pub fn canonical(&self) -> Vec<String> {
        let f = &self.field;
        let mut out = vec![format!("field {}", f.describe())];
        for s in &self.steps {
            out.push(s.directive.render(f));
        }
        out
    }

    pub fn commands(&self) -> impl Iterator<Item = (Command, &str)> {
        self.steps.iter().filter_map(|s| match &s.directive {
            Directive::Run { command, name } => Some((*command, name.as_str())),
            _ => None,
        })
    }
}

impl Directive {
    pub fn render(&self, f: &Field) -> String {
        match self {
            Directive::Quaternion { name, a, b, involution } => {
                let inv = match involution {
                    InvolutionSpec::Symplectic => "symplectic".to_string(),
                    InvolutionSpec::Orthogonal(c) => {
                        format!("orthogonal({}, {}, {})", f.render(&c[0]), f.render(&c[1]), f.render(&c[2]))
                    }
                };
                format!("let {name} = quaternion({}, {}) with involution {inv}", f.render(a), f.render(b))
            }
            Directive::Tensor { name, left, right } => format!("let {name} = tensor({left}, {right})"),
            Directive::Scramble { name, seed } => format!("scramble {name} seed {seed}"),
            Directive::Certificate { name, spec } => match spec {
                CertificateSpec::Unit => format!("certificate {name} unit"),
                CertificateSpec::Generators(gens) => {
                    let g: Vec<String> = gens.iter().map(|c| render_combination(f, c)).collect();
                    format!("certificate {name} generators {}", g.join(", "))
                }
            },
            Directive::Run { command, name } => format!("run {} on {name}", command.name()),
        }
    }
}

fn render_combination(f: &Field, c: &Combination) -> String {
    if c.is_empty() {
        return "0".into();
    }
    c.iter()
        .map(|(x, i)| if x.is_one() { format!("e{i}") } else { format!("({})*e{i}", f.render(x)) })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Character cursor over one line with 1-based columns.
struct Cursor<'a> {
    line: usize,
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, src: &'a str) -> Cursor<'a> {
        Cursor { line, chars: src.chars().collect(), pos: 0, _src: src }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, msg: impl Into<String>) -> InputError {
        InputError::new(self.line, self.col(), msg)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn word(&mut self) -> Result<(usize, String), InputError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_alphanumeric() || *c == '_' || *c == '-') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a word"));
        }
        Ok((start + 1, self.chars[start..self.pos].iter().collect()))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), InputError> {
        self.skip_ws();
        let col = self.col();
        let (_, w) = self.word().map_err(|_| InputError::new(self.line, col, format!("expected `{kw}`")))?;
        if w != kw {
            return Err(InputError::new(self.line, col, format!("expected `{kw}`, found `{w}`")));
        }
        Ok(())
    }

    fn name(&mut self) -> Result<(usize, String), InputError> {
        self.skip_ws();
        let col = self.col();
        let (c, w) = self.word().map_err(|_| InputError::new(self.line, col, "expected a name"))?;
        if !w.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') {
            return Err(InputError::new(self.line, c, format!("invalid name `{w}`")));
        }
        Ok((c, w))
    }

    fn punct(&mut self, p: char) -> Result<(), InputError> {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`")))
        }
    }

    /// Comma-separated arguments of a parenthesized list, split at top
    /// level; each argument comes with the column where it starts.
    fn args(&mut self) -> Result<Vec<(usize, String)>, InputError> {
        self.punct('(')?;
        let mut out = Vec::new();
        let mut depth = 0usize;
        let mut start = self.pos;
        loop {
            let Some(&c) = self.chars.get(self.pos) else {
                return Err(self.err("unclosed `(`"));
            };
            match c {
                '(' => depth += 1,
                ')' if depth > 0 => depth -= 1,
                ')' | ',' if depth == 0 => {
                    out.push(self.trimmed(start, self.pos));
                    start = self.pos + 1;
                    if c == ')' {
                        self.pos += 1;
                        return Ok(out);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn trimmed(&self, start: usize, end: usize) -> (usize, String) {
        let s: String = self.chars[start..end].iter().collect();
        let lead = s.len() - s.trim_start().len();
        (start + 1 + s[..lead].chars().count(), s.trim().to_string())
    }

    fn rest(&mut self) -> (usize, String) {
        self.skip_ws();
        let r = self.trimmed(self.pos, self.chars.len());
        self.pos = self.chars.len();
        r
    }

    fn finish(&mut self) -> Result<(), InputError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

fn elem(f: &Field, line: usize, (col, text): &(usize, String)) -> Result<FieldElem, InputError> {
    f.parse(text).map_err(|e| match e {
        FieldError::Parse { col: c, msg } => InputError::new(line, col + c - 1, msg),
        other => InputError::new(line, *col, other.to_string()),
    })
}

/// Parse `[coeff *] e<k>` terms joined by `+`.
fn combination(f: &Field, line: usize, (col, text): &(usize, String)) -> Result<Combination, InputError> {
    let mut terms = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let chars: Vec<char> = text.chars().collect();
    let mut pieces = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '+' if depth == 0 => {
                pieces.push((start, i));
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push((start, chars.len()));
    for (s, e) in pieces {
        let piece: String = chars[s..e].iter().collect();
        let lead = piece.len() - piece.trim_start().len();
        let pcol = col + s + piece[..lead].chars().count();
        let piece = piece.trim();
        let (coef, basis) = match piece.rfind('*') {
            Some(k) => (Some(piece[..k].trim()), piece[k + 1..].trim()),
            None => (None, piece),
        };
        let index = basis
            .strip_prefix('e')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| InputError::new(line, pcol, format!("expected a basis vector `e<k>`, found `{basis}`")))?;
        let c = match coef {
            Some(t) => elem(f, line, &(pcol, t.to_string()))?,
            None => f.one(),
        };
        terms.push((c, index));
    }
    Ok(terms)
}

fn involution(f: &Field, cur: &mut Cursor) -> Result<InvolutionSpec, InputError> {
    let (col, kind) = cur.word()?;
    match kind.as_str() {
        "symplectic" => Ok(InvolutionSpec::Symplectic),
        "orthogonal" => {
            cur.skip_ws();
            if cur.at_end() {
                return Ok(InvolutionSpec::Orthogonal([f.zero(), f.one(), f.zero()]));
            }
            let args = cur.args()?;
            if args.len() != 3 {
                return Err(InputError::new(cur.line, col, "orthogonal(c0, c1, c2) takes three coefficients"));
            }
            let c: Vec<FieldElem> = args.iter().map(|a| elem(f, cur.line, a)).collect::<Result<_, _>>()?;
            Ok(InvolutionSpec::Orthogonal([c[0].clone(), c[1].clone(), c[2].clone()]))
        }
        other => Err(InputError::new(cur.line, col, format!("unknown involution `{other}`"))),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

pub fn parse(text: &str) -> Result<JobSpec, InputError> {
    let mut field: Option<Field> = None;
    let mut steps = Vec::new();
    let mut defined: HashSet<String> = HashSet::new();
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line, body);
        let (col, head) = cur.word()?;
        if head == "field" {
            if field.is_some() {
                return Err(InputError::new(line, col, "field declared twice"));
            }
            let (dcol, desc) = cur.rest();
            let f = Field::from_descriptor(&desc).map_err(|e| match e {
                FieldError::Parse { col: c, msg } => InputError::new(line, dcol, format!("bad field descriptor: {msg} (offset {c})")),
                other => InputError::new(line, dcol, other.to_string()),
            })?;
            field = Some(f);
            continue;
        }
        let f = field.as_ref().ok_or_else(|| InputError::new(line, col, "`field` must come first"))?;
        let use_name = |cur: &mut Cursor, defined: &HashSet<String>| -> Result<String, InputError> {
            let (c, n) = cur.name()?;
            if defined.contains(&n) {
                Ok(n)
            } else {
                Err(InputError::new(line, c, format!("undefined name `{n}`")))
            }
        };
        let directive = match head.as_str() {
            "let" => {
                let (_, name) = cur.name()?;
                cur.punct('=')?;
                let (kcol, kind) = cur.word()?;
                let d = match kind.as_str() {
                    "quaternion" => {
                        let args = cur.args()?;
                        if args.len() != 2 {
                            return Err(InputError::new(line, kcol, "quaternion(a, b) takes two arguments"));
                        }
                        let a = elem(f, line, &args[0])?;
                        let b = elem(f, line, &args[1])?;
                        cur.keyword("with")?;
                        cur.keyword("involution")?;
                        let involution = involution(f, &mut cur)?;
                        Directive::Quaternion { name: name.clone(), a, b, involution }
                    }
                    "tensor" => {
                        let args = cur.args()?;
                        if args.len() != 2 {
                            return Err(InputError::new(line, kcol, "tensor(x, y) takes two arguments"));
                        }
                        for (c, n) in &args {
                            if !defined.contains(n) {
                                return Err(InputError::new(line, *c, format!("undefined name `{n}`")));
                            }
                        }
                        Directive::Tensor { name: name.clone(), left: args[0].1.clone(), right: args[1].1.clone() }
                    }
                    other => return Err(InputError::new(line, kcol, format!("unknown constructor `{other}`"))),
                };
                defined.insert(name);
                d
            }
            "scramble" => {
                let name = use_name(&mut cur, &defined)?;
                cur.keyword("seed")?;
                let (scol, s) = cur.word()?;
                let seed = s.parse().map_err(|_| InputError::new(line, scol, format!("invalid seed `{s}`")))?;
                Directive::Scramble { name, seed }
            }
            "certificate" => {
                let name = use_name(&mut cur, &defined)?;
                let (kcol, kind) = cur.word()?;
                let spec = match kind.as_str() {
                    "unit" => CertificateSpec::Unit,
                    "generators" => {
                        let (rcol, rest) = cur.rest();
                        let mut gens = Vec::new();
                        let mut offset = 0;
                        for piece in rest.split(',') {
                            let lead = piece.len() - piece.trim_start().len();
                            gens.push(combination(f, line, &(rcol + offset + lead, piece.trim().to_string()))?);
                            offset += piece.chars().count() + 1;
                        }
                        CertificateSpec::Generators(gens)
                    }
                    other => return Err(InputError::new(line, kcol, format!("unknown certificate form `{other}`"))),
                };
                Directive::Certificate { name, spec }
            }
            "run" => {
                let (ccol, c) = cur.word()?;
                let command = Command::from_name(&c).ok_or_else(|| {
                    let known: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                    InputError::new(line, ccol, format!("unknown command `{c}` (expected one of {})", known.join(", ")))
                })?;
                cur.keyword("on")?;
                let name = use_name(&mut cur, &defined)?;
                Directive::Run { command, name }
            }
            other => return Err(InputError::new(line, col, format!("unknown directive `{other}`"))),
        };
        cur.finish()?;
        steps.push(Located { line, directive });
    }
    let field = field.ok_or_else(|| InputError::new(last_line, 1, "no command"))?;
    let spec = JobSpec { field, steps };
    if spec.commands().next().is_none() {
        return Err(InputError::new(last_line, 1, "no command"));
    }
    Ok(spec)
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const JOB: &str = "field gf(2) vars t1,t2\nlet q = quaternion(t1, t2) with involution orthogonal\nrun decompose on q\n";

    #[test]
    fn minimal_job() {
        let spec = parse(JOB).unwrap();
        assert_eq!(spec.steps.len(), 2);
        assert_eq!(spec.commands().count(), 1);
        assert_eq!(spec.canonical()[2], "run decompose on q");
    }

    #[test]
    fn undefined_name_is_located() {
        let err = parse("field gf(2) vars t1\nrun pfister on nope\n").unwrap_err();
        assert_eq!((err.line, err.col), (2, 16));
        assert!(err.msg.contains("undefined name"));
    }

    #[test]
    fn empty_input_has_no_command() {
        assert_eq!(parse("").unwrap_err().msg, "no command");
        assert_eq!(parse("# nothing\n\n").unwrap_err().msg, "no command");
    }

    #[test]
    fn element_errors_point_into_the_line() {
        let err = parse("field gf(2) vars t1\nlet q = quaternion(t1, t9) with involution symplectic\n").unwrap_err();
        assert_eq!((err.line, err.col), (2, 24));
    }

    #[test]
    fn certificate_generators_parse() {
        let text = "field gf(2) vars t1\nlet q = quaternion(t1, t1) with involution orthogonal\ncertificate q generators (t1+1)*e2 + e3\nrun check-certificate on q\n";
        let spec = parse(text).unwrap();
        let Directive::Certificate { spec: CertificateSpec::Generators(g), .. } = &spec.steps[1].directive else {
            panic!("expected certificate")
        };
        assert_eq!(g[0].len(), 2);
        assert_eq!(g[0][1].1, 3);
        assert_eq!(spec.canonical()[2], "certificate q generators (t1 + 1)*e2 + e3");
    }

    #[test]
    fn canonical_round_trip() {
        let text = "field gf(2) vars t1,t2\n  let q = quaternion( t1 ,t2 )   with involution orthogonal(0,1,t1)\nscramble q seed 3\nrun classify on q";
        let spec = parse(text).unwrap();
        let again = parse(&spec.canonical().join("\n")).unwrap();
        assert_eq!(spec.canonical(), again.canonical());
    }
}
