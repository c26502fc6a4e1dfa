//! The `huntspec v1` text format.
//!
//! ```text
//! huntspec v1
//! # bottom domain first
//! minus (-inf,0) path=linear(-1,0) I=(0,inf)
//! const [0,0]
//! plus (0,inf) path=linear(1,0) I=(0,inf)
//! ```
//!
//! `I` is given in the rule's own parameter. With `anchor=a` the path is
//! re-parameterized so that `path(0) = a`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::{parse_nodes, BuiltinPath, GeneratingPath, Interval, PathRule};
use crate::report::fmt_f64;
use crate::structure::{canonicalize, validate_structure, Domain, DomainKind, Structure};

pub const HEADER: &str = "huntspec v1";

/// Cantor depths below this produce a visibly coarse staircase.
const SHALLOW_CANTOR_DEPTH: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { line, column, message: message.into(), severity: Severity::Error }
    }

    fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { line, column, message: message.into(), severity: Severity::Warning }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// Where the nodes of a polyline or table come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeSource {
    Inline(Vec<(f64, f64)>),
    /// Two-column text file, relative to the spec file.
    File(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PathSpec {
    Linear { slope: f64, intercept: f64 },
    Cantor { depth: u32 },
    AffineCantor { depth: u32, outer_scale: f64, outer_offset: f64, inner_scale: f64, inner_offset: f64 },
    Polyline(NodeSource),
    Table(NodeSource),
    Knick,
    Builtin(BuiltinPath),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBody {
    pub path: PathSpec,
    pub parameter_interval: Interval,
    pub anchor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainLine {
    pub line: usize,
    pub kind: DomainKind,
    pub interval: Interval,
    pub body: Option<DomainBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub version: u32,
    pub domains: Vec<DomainLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmitError {
    #[error("domain {index} uses the user-defined path `{name}`, which cannot be written")]
    NotSerializable { index: usize, name: String },
}

/// A token and its 1-based column.
#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Splits on whitespace outside brackets.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut depth = 0i32;
    let mut start: Option<(usize, usize)> = None;
    for (col, (i, c)) in line.char_indices().enumerate() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth <= 0 {
            if let Some((b, column)) = start.take() {
                tokens.push(Token { text: &line[b..i], column });
            }
            depth = depth.max(0);
        } else if start.is_none() {
            start = Some((i, col + 1));
        }
    }
    if let Some((b, column)) = start {
        tokens.push(Token { text: &line[b..], column });
    }
    tokens
}

fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    match s {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let plausible = !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    match s.parse::<f64>() {
        Ok(v) if plausible && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a real number")),
    }
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    let mut chars = s.chars();
    let (Some(open), Some(close)) = (chars.next(), chars.next_back()) else {
        return Err(format!("`{s}` is not an interval"));
    };
    let lo_closed = match open {
        '[' => true,
        '(' => false,
        _ => return Err(format!("interval `{s}` must start with `[` or `(`")),
    };
    let hi_closed = match close {
        ']' => true,
        ')' => false,
        _ => return Err(format!("interval `{s}` must end with `]` or `)`")),
    };
    let inner = chars.as_str();
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("interval `{s}` needs exactly two endpoints"));
    }
    let lo = parse_real(parts[0])?;
    let hi = parse_real(parts[1])?;
    Interval::new(lo, hi, lo_closed, hi_closed).map_err(|e| e.to_string())
}

fn parse_inline_nodes(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair.split_once(':').ok_or_else(|| format!("node `{pair}` is not of the form s:value"))?;
            Ok((parse_real(a)?, parse_real(b)?))
        })
        .collect()
}

fn parse_nodes_arg(arg: &str) -> Result<NodeSource, String> {
    if arg.contains(':') {
        parse_inline_nodes(arg).map(NodeSource::Inline)
    } else if arg.trim().is_empty() {
        Err("missing node file".into())
    } else {
        Ok(NodeSource::File(arg.trim().to_string()))
    }
}

fn parse_depth(s: &str) -> Result<u32, String> {
    match s.trim().parse::<u32>() {
        Ok(d) if d >= 1 => Ok(d),
        _ => Err(format!("Cantor depth `{}` must be a positive integer", s.trim())),
    }
}

fn parse_pathspec(s: &str) -> Result<PathSpec, String> {
    let (name, args) = match s.find('(') {
        Some(i) => {
            let Some(inner) = s[i + 1..].strip_suffix(')') else {
                return Err(format!("path `{s}` is missing its closing `)`"));
            };
            (&s[..i], Some(inner))
        }
        None => (s, None),
    };
    let reals = |a: &str, n: usize| -> Result<Vec<f64>, String> {
        let v: Vec<f64> = a.split(',').map(parse_real).collect::<Result<_, _>>()?;
        if v.len() != n {
            return Err(format!("`{name}` takes {n} arguments, got {}", v.len()));
        }
        Ok(v)
    };
    match (name, args) {
        ("linear", Some(a)) => {
            let v = reals(a, 2)?;
            Ok(PathSpec::Linear { slope: v[0], intercept: v[1] })
        }
        ("cantor", Some(a)) => Ok(PathSpec::Cantor { depth: parse_depth(a)? }),
        ("affine_cantor", Some(a)) => {
            let parts: Vec<&str> = a.splitn(2, ',').collect();
            if parts.len() != 2 {
                return Err("`affine_cantor` takes 5 arguments".into());
            }
            let depth = parse_depth(parts[0])?;
            let v = reals(parts[1], 4)?;
            Ok(PathSpec::AffineCantor {
                depth,
                outer_scale: v[0],
                outer_offset: v[1],
                inner_scale: v[2],
                inner_offset: v[3],
            })
        }
        ("polyline", Some(a)) => parse_nodes_arg(a).map(PathSpec::Polyline),
        ("table", Some(a)) => parse_nodes_arg(a).map(PathSpec::Table),
        ("knick", None) | ("knick", Some("")) => Ok(PathSpec::Knick),
        (n, None) | (n, Some("")) if BuiltinPath::from_name(n).is_some() => {
            Ok(PathSpec::Builtin(BuiltinPath::from_name(n).expect("checked")))
        }
        _ => Err(format!("unknown path `{s}`")),
    }
}

fn parse_kind(s: &str) -> Option<DomainKind> {
    match s {
        "plus" => Some(DomainKind::Plus),
        "minus" => Some(DomainKind::Minus),
        "const" => Some(DomainKind::Const),
        _ => None,
    }
}

fn parse_domain_line(lineno: usize, tokens: &[Token<'_>], warnings: &mut Vec<ParseDiagnostic>) -> Result<DomainLine, ParseDiagnostic> {
    let err = |t: &Token<'_>, m: String| ParseDiagnostic::error(lineno, t.column, m);
    let kind_tok = tokens[0];
    let kind = parse_kind(kind_tok.text)
        .ok_or_else(|| err(&kind_tok, format!("expected plus, minus or const, found `{}`", kind_tok.text)))?;
    let Some(j_tok) = tokens.get(1) else {
        return Err(ParseDiagnostic::error(lineno, kind_tok.column + kind_tok.text.chars().count(), "missing interval"));
    };
    let interval = parse_interval(j_tok.text).map_err(|m| err(j_tok, m))?;

    let mut path = None;
    let mut param = None;
    let mut anchor = None;
    for t in &tokens[2..] {
        let Some((key, value)) = t.text.split_once('=') else {
            return Err(err(t, format!("expected key=value, found `{}`", t.text)));
        };
        let vcol = t.column + key.chars().count() + 1;
        let verr = |m: String| ParseDiagnostic::error(lineno, vcol, m);
        match key {
            "path" if path.is_none() => {
                let spec = parse_pathspec(value).map_err(verr)?;
                if let PathSpec::Cantor { depth } | PathSpec::AffineCantor { depth, .. } = spec {
                    if depth < SHALLOW_CANTOR_DEPTH {
                        warnings.push(ParseDiagnostic::warning(lineno, vcol, format!("Cantor depth {depth} is shallow")));
                    }
                }
                path = Some(spec);
            }
            "I" if param.is_none() => param = Some(parse_interval(value).map_err(verr)?),
            "anchor" if anchor.is_none() => anchor = Some(parse_real(value).map_err(verr)?),
            "path" | "I" | "anchor" => return Err(err(t, format!("duplicate key `{key}`"))),
            _ => return Err(err(t, format!("unknown key `{key}`"))),
        }
    }
    let end_col = tokens.last().map_or(1, |t| t.column + t.text.chars().count());
    let body = match (kind, path, param) {
        (DomainKind::Const, None, None) if anchor.is_none() => None,
        (DomainKind::Const, ..) => {
            return Err(ParseDiagnostic::error(lineno, tokens[2].column, "a const domain takes no path, I or anchor"))
        }
        (_, Some(path), Some(parameter_interval)) => Some(DomainBody { path, parameter_interval, anchor }),
        (_, None, _) => return Err(ParseDiagnostic::error(lineno, end_col, "missing path=")),
        (_, Some(_), None) => return Err(ParseDiagnostic::error(lineno, end_col, "missing I=")),
    };
    Ok(DomainLine { line: lineno, kind, interval, body })
}

/// Parses a document without resolving node files.
pub fn parse_spec(text: &str) -> Result<SpecDocument, Vec<ParseDiagnostic>> {
    let mut diags = Vec::new();
    let mut warnings = Vec::new();
    let mut domains = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        if !header_seen {
            let words: Vec<&str> = tokens.iter().map(|t| t.text).collect();
            if words == ["huntspec", "v1"] {
                header_seen = true;
                continue;
            }
            let msg = if words.first() == Some(&"huntspec") {
                format!("unsupported version `{}`", words[1..].join(" "))
            } else {
                format!("missing header `{HEADER}`")
            };
            diags.push(ParseDiagnostic::error(lineno, tokens[0].column, msg));
            return Err(diags);
        }
        match parse_domain_line(lineno, &tokens, &mut warnings) {
            Ok(d) => domains.push(d),
            Err(d) => diags.push(d),
        }
    }
    if !header_seen {
        diags.push(ParseDiagnostic::error(1, 1, format!("missing header `{HEADER}`")));
    } else if domains.is_empty() && diags.is_empty() {
        diags.push(ParseDiagnostic::error(text.lines().count().max(1), 1, "no domains"));
    }
    if diags.is_empty() {
        Ok(SpecDocument { version: 1, domains, warnings })
    } else {
        Err(diags)
    }
}

/// [`parse_spec`] for raw bytes; invalid UTF-8 is reported with its position.
pub fn parse_spec_bytes(bytes: &[u8]) -> Result<SpecDocument, Vec<ParseDiagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_spec(text),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = good.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let column = String::from_utf8_lossy(&good[line_start..]).chars().count() + 1;
            Err(vec![ParseDiagnostic::error(line, column, "invalid UTF-8")])
        }
    }
}

fn resolve_nodes(src: &NodeSource, base: Option<&Path>) -> Result<Vec<(f64, f64)>, String> {
    match src {
        NodeSource::Inline(nodes) => Ok(nodes.clone()),
        NodeSource::File(name) => {
            let path = match base {
                Some(b) => b.join(name),
                None => Path::new(name).to_path_buf(),
            };
            let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_nodes(&text).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

impl PathSpec {
    pub fn to_rule(&self, base: Option<&Path>) -> Result<PathRule, String> {
        Ok(match self {
            PathSpec::Linear { slope, intercept } => PathRule::Linear { slope: *slope, intercept: *intercept },
            PathSpec::Cantor { depth } => PathRule::Cantor { depth: *depth },
            PathSpec::AffineCantor { depth, outer_scale, outer_offset, inner_scale, inner_offset } => {
                PathRule::AffineCantor {
                    depth: *depth,
                    outer_scale: *outer_scale,
                    outer_offset: *outer_offset,
                    inner_scale: *inner_scale,
                    inner_offset: *inner_offset,
                }
            }
            PathSpec::Polyline(src) => PathRule::polyline(resolve_nodes(src, base)?).map_err(|e| e.to_string())?,
            PathSpec::Table(src) => PathRule::table(resolve_nodes(src, base)?).map_err(|e| e.to_string())?,
            PathSpec::Knick => PathRule::knick(),
            PathSpec::Builtin(b) => PathRule::Builtin(*b),
        })
    }
}

fn build_domain(d: &DomainLine, base: Option<&Path>) -> Result<Domain, String> {
    let Some(body) = &d.body else {
        return Ok(Domain::constant(d.interval));
    };
    let rule = body.path.to_rule(base)?;
    let mut path = GeneratingPath::new(rule, body.parameter_interval, d.interval).map_err(|e| e.to_string())?;
    if let Some(a) = body.anchor {
        if !d.interval.contains(a) {
            return Err(format!("anchor {} lies outside {}", fmt_f64(a), fmt_interval(&d.interval)));
        }
        path = path.anchored_at(a).map_err(|e| e.to_string())?;
    }
    let mut domain = Domain::monotone(d.interval, path).map_err(|e| e.to_string())?;
    if domain.kind() != d.kind {
        return Err(format!("the path is {} but the line says {}", domain.kind().token(), d.kind.token()));
    }
    if let Some(a) = body.anchor {
        domain = domain.with_anchor(a).map_err(|e| e.to_string())?;
    }
    Ok(domain)
}

impl SpecDocument {
    /// Builds and validates the structure, reading node files relative to `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<Structure, Vec<ParseDiagnostic>> {
        let mut domains = Vec::with_capacity(self.domains.len());
        let mut diags = Vec::new();
        for d in &self.domains {
            match build_domain(d, base) {
                Ok(dom) => domains.push(dom),
                Err(m) => diags.push(ParseDiagnostic::error(d.line, 1, m)),
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }
        validate_structure(domains).map_err(|faults| {
            faults
                .into_iter()
                .map(|f| {
                    let line = f.domain_indices.first().and_then(|&i| self.domains.get(i)).map_or(1, |d| d.line);
                    ParseDiagnostic::error(line, 1, format!("{:?}: {}", f.rule_id, f.message))
                })
                .collect()
        })
    }
}

/// Parses and builds in one step.
pub fn load_structure(text: &str, base: Option<&Path>) -> Result<Structure, Vec<ParseDiagnostic>> {
    parse_spec(text)?.build(base)
}

pub fn fmt_interval(i: &Interval) -> String {
    format!(
        "{}{},{}{}",
        if i.lo_closed { '[' } else { '(' },
        fmt_f64(i.lo),
        fmt_f64(i.hi),
        if i.hi_closed { ']' } else { ')' }
    )
}

fn fmt_nodes(nodes: &[(f64, f64)]) -> String {
    nodes.iter().map(|(s, v)| format!("{}:{}", fmt_f64(*s), fmt_f64(*v))).collect::<Vec<_>>().join(",")
}

fn fmt_rule(rule: &PathRule, index: usize) -> Result<String, EmitError> {
    Ok(match rule {
        PathRule::Linear { slope, intercept } => format!("linear({},{})", fmt_f64(*slope), fmt_f64(*intercept)),
        PathRule::Polyline(nodes) => format!("polyline({})", fmt_nodes(nodes)),
        PathRule::Table(c) => format!("table({})", fmt_nodes(c.nodes())),
        PathRule::Cantor { depth } => format!("cantor({depth})"),
        PathRule::AffineCantor { depth, outer_scale, outer_offset, inner_scale, inner_offset } => format!(
            "affine_cantor({depth},{},{},{},{})",
            fmt_f64(*outer_scale),
            fmt_f64(*outer_offset),
            fmt_f64(*inner_scale),
            fmt_f64(*inner_offset)
        ),
        PathRule::Builtin(b) => b.name().to_string(),
        PathRule::Callable(c) => return Err(EmitError::NotSerializable { index, name: c.name.clone() }),
    })
}

/// Writes the canonical form of `s`.
pub fn emit_spec(s: &Structure) -> Result<String, EmitError> {
    let c = canonicalize(s);
    let mut out = format!("{HEADER}\n");
    for (i, d) in c.domains().iter().enumerate() {
        out.push_str(d.kind().token());
        out.push(' ');
        out.push_str(&fmt_interval(d.interval()));
        if let Some(p) = d.path() {
            let shift = p.shift();
            let rule_domain = Interval { lo: p.domain().lo + shift, hi: p.domain().hi + shift, ..*p.domain() };
            out.push_str(&format!(" path={} I={}", fmt_rule(p.rule(), i)?, fmt_interval(&rule_domain)));
            if let Some(a) = d.anchor() {
                out.push_str(&format!(" anchor={}", fmt_f64(a)));
            }
        }
        out.push('\n');
    }
    Ok(out)
}
