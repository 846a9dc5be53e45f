//! Line-oriented netlist DSL for optical switch circuits.
//!
//! # Grammar
//!
//! ```text
//! # comment (to end of line)
//! source <id> power_mw=<f>
//! waveguide <id> in=<net> out=<net> [loss_db=<f>]
//! ybranch <id> in=<net> out=<net>,<net> [split=<f>] [loss_db=<f>]
//! switch <id> type=tapered|through in=<net> [out=<net>] [coupling=<f>]
//! ```
//!
//! Statements connect through named nets: an element's `out` drives the net,
//! another element's `in` consumes it. A source drives the net named after
//! its own id. A tapered switch has no through port, so `out=` on it is a
//! parse error; a through switch may leave `out` unset, terminating the
//! remaining light.
//!
//! Parsing never consults the rest of the circuit; wiring rules (single
//! driver per net, acyclicity, one source) are enforced when the graph is
//! built. Errors carry the 1-based line and column of the offending token.

use std::fmt;

use thiserror::Error;

use crate::optical::DeviceType;

/// Location of a statement or token in the source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn new(span: Span, msg: impl Into<String>) -> Self {
        Self {
            line: span.line,
            col: span.col,
            msg: msg.into(),
        }
    }
}

/// One parsed netlist statement. Two statements compare equal when their id
/// and kind match; the span is provenance only.
#[derive(Debug, Clone)]
pub struct Statement {
    pub id: String,
    pub kind: StatementKind,
    pub span: Span,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Source {
        power_mw: f64,
    },
    Waveguide {
        input: String,
        output: String,
        loss_db: f64,
    },
    YBranch {
        input: String,
        outputs: (String, String),
        split: f64,
        loss_db: f64,
    },
    Switch {
        device_type: DeviceType,
        input: String,
        output: Option<String>,
        coupling: f64,
    },
}

/// Parsed netlist: an ordered sequence of statements.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetlistAst {
    pub statements: Vec<Statement>,
}

impl NetlistAst {
    /// Parses netlist text. An empty file is a valid (empty) AST.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut statements = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let stmt = parse_statement(content, line)?;
            if let Some(prev) = statements.iter().find(|s: &&Statement| s.id == stmt.id) {
                return Err(ParseError::new(
                    stmt.span,
                    format!(
                        "duplicate id `{}` (first declared on line {})",
                        stmt.id, prev.span.line
                    ),
                ));
            }
            statements.push(stmt);
        }
        Ok(Self { statements })
    }

    /// Canonical text form; `parse(print(ast))` yields an equal AST.
    /// Attributes with default values are omitted.
    pub fn print(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NetlistAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            match &s.kind {
                StatementKind::Source { power_mw } => {
                    writeln!(f, "source {} power_mw={}", s.id, power_mw)?;
                }
                StatementKind::Waveguide {
                    input,
                    output,
                    loss_db,
                } => {
                    write!(f, "waveguide {} in={} out={}", s.id, input, output)?;
                    if *loss_db != 0.0 {
                        write!(f, " loss_db={}", loss_db)?;
                    }
                    writeln!(f)?;
                }
                StatementKind::YBranch {
                    input,
                    outputs,
                    split,
                    loss_db,
                } => {
                    write!(
                        f,
                        "ybranch {} in={} out={},{}",
                        s.id, input, outputs.0, outputs.1
                    )?;
                    if *split != 0.5 {
                        write!(f, " split={}", split)?;
                    }
                    if *loss_db != 0.0 {
                        write!(f, " loss_db={}", loss_db)?;
                    }
                    writeln!(f)?;
                }
                StatementKind::Switch {
                    device_type,
                    input,
                    output,
                    coupling,
                } => {
                    write!(f, "switch {} type={} in={}", s.id, device_type, input)?;
                    if let Some(out) = output {
                        write!(f, " out={}", out)?;
                    }
                    if *coupling != device_type.default_coupling() {
                        write!(f, " coupling={}", coupling)?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

struct Token<'a> {
    text: &'a str,
    span: Span,
}

fn tokenize(content: &str, line: usize) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut col = 0;
    for (i, ch) in content.char_indices() {
        if !ch.is_whitespace() {
            if col == 0 || content[..i].ends_with(char::is_whitespace) {
                col = i + 1;
                let end = content[i..]
                    .find(char::is_whitespace)
                    .map(|j| i + j)
                    .unwrap_or(content.len());
                tokens.push(Token {
                    text: &content[i..end],
                    span: Span { line, col },
                });
            }
        }
    }
    tokens
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

struct AttrList<'a> {
    attrs: Vec<(&'a str, &'a str, Span)>,
    taken: Vec<bool>,
    stmt_span: Span,
}

impl<'a> AttrList<'a> {
    fn new(tokens: &[Token<'a>], stmt_span: Span) -> Result<Self, ParseError> {
        let mut attrs = Vec::new();
        for t in tokens {
            match t.text.split_once('=') {
                Some((k, v)) if !k.is_empty() && !v.is_empty() => {
                    if attrs.iter().any(|&(key, _, _)| key == k) {
                        return Err(ParseError::new(
                            t.span,
                            format!("attribute `{k}` given more than once"),
                        ));
                    }
                    attrs.push((k, v, t.span));
                }
                _ => {
                    return Err(ParseError::new(
                        t.span,
                        format!("expected key=value attribute, got `{}`", t.text),
                    ))
                }
            }
        }
        let taken = vec![false; attrs.len()];
        Ok(Self {
            attrs,
            taken,
            stmt_span,
        })
    }

    fn take(&mut self, key: &str) -> Option<(&'a str, Span)> {
        for (i, (k, v, span)) in self.attrs.iter().enumerate() {
            if *k == key {
                self.taken[i] = true;
                return Some((v, *span));
            }
        }
        None
    }

    fn require(&mut self, key: &str) -> Result<(&'a str, Span), ParseError> {
        self.take(key)
            .ok_or_else(|| ParseError::new(self.stmt_span, format!("missing attribute `{key}`")))
    }

    fn finish(self, kind: &str) -> Result<(), ParseError> {
        for (i, (k, _, span)) in self.attrs.iter().enumerate() {
            if !self.taken[i] {
                return Err(ParseError::new(
                    *span,
                    format!("unknown attribute `{k}` for {kind}"),
                ));
            }
        }
        Ok(())
    }
}

fn parse_f64(value: &str, span: Span, key: &str) -> Result<f64, ParseError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ParseError::new(span, format!("malformed number `{value}` for `{key}`")))
}

fn parse_net(value: &str, span: Span, key: &str) -> Result<String, ParseError> {
    if valid_name(value) {
        Ok(value.to_string())
    } else {
        Err(ParseError::new(
            span,
            format!("malformed net name `{value}` for `{key}`"),
        ))
    }
}

fn parse_fraction(value: &str, span: Span, key: &str) -> Result<f64, ParseError> {
    let v = parse_f64(value, span, key)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(ParseError::new(
            span,
            format!("`{key}` must lie in [0, 1], got {value}"),
        ))
    }
}

fn parse_statement(content: &str, line: usize) -> Result<Statement, ParseError> {
    let tokens = tokenize(content, line);
    let kind_tok = &tokens[0];
    if tokens.len() < 2 {
        return Err(ParseError::new(
            kind_tok.span,
            format!("`{}` statement is missing an id", kind_tok.text),
        ));
    }
    let id_tok = &tokens[1];
    if !valid_name(id_tok.text) {
        return Err(ParseError::new(
            id_tok.span,
            format!("malformed id `{}`", id_tok.text),
        ));
    }
    let id = id_tok.text.to_string();
    let span = kind_tok.span;
    let mut attrs = AttrList::new(&tokens[2..], span)?;

    let kind = match kind_tok.text {
        "source" => {
            let (v, vs) = attrs.require("power_mw")?;
            let power_mw = parse_f64(v, vs, "power_mw")?;
            if power_mw < 0.0 {
                return Err(ParseError::new(vs, "power_mw must be >= 0".to_string()));
            }
            attrs.finish("source")?;
            StatementKind::Source { power_mw }
        }
        "waveguide" => {
            let (v, vs) = attrs.require("in")?;
            let input = parse_net(v, vs, "in")?;
            let (v, vs) = attrs.require("out")?;
            let output = parse_net(v, vs, "out")?;
            let loss_db = match attrs.take("loss_db") {
                Some((v, vs)) => {
                    let l = parse_f64(v, vs, "loss_db")?;
                    if l < 0.0 {
                        return Err(ParseError::new(vs, "loss_db must be >= 0".to_string()));
                    }
                    l
                }
                None => 0.0,
            };
            attrs.finish("waveguide")?;
            StatementKind::Waveguide {
                input,
                output,
                loss_db,
            }
        }
        "ybranch" => {
            let (v, vs) = attrs.require("in")?;
            let input = parse_net(v, vs, "in")?;
            let (v, vs) = attrs.require("out")?;
            let (o1, o2) = v.split_once(',').ok_or_else(|| {
                ParseError::new(vs, "ybranch `out` needs two nets separated by a comma")
            })?;
            let out1 = parse_net(o1, vs, "out")?;
            let out2 = parse_net(o2, vs, "out")?;
            if out1 == out2 {
                return Err(ParseError::new(
                    vs,
                    format!("ybranch outputs must be distinct nets, both are `{out1}`"),
                ));
            }
            let split = match attrs.take("split") {
                Some((v, vs)) => parse_fraction(v, vs, "split")?,
                None => 0.5,
            };
            let loss_db = match attrs.take("loss_db") {
                Some((v, vs)) => {
                    let l = parse_f64(v, vs, "loss_db")?;
                    if l < 0.0 {
                        return Err(ParseError::new(vs, "loss_db must be >= 0".to_string()));
                    }
                    l
                }
                None => 0.0,
            };
            attrs.finish("ybranch")?;
            StatementKind::YBranch {
                input,
                outputs: (out1, out2),
                split,
                loss_db,
            }
        }
        "switch" => {
            let (v, vs) = attrs.require("type")?;
            let device_type = match v {
                "tapered" => DeviceType::Tapered,
                "through" => DeviceType::Through,
                other => {
                    return Err(ParseError::new(
                        vs,
                        format!("unknown switch type `{other}` (expected tapered or through)"),
                    ))
                }
            };
            let (v, vs) = attrs.require("in")?;
            let input = parse_net(v, vs, "in")?;
            let output = match attrs.take("out") {
                Some((v, vs)) => {
                    if device_type == DeviceType::Tapered {
                        return Err(ParseError::new(vs, "tapered tap has no through port"));
                    }
                    Some(parse_net(v, vs, "out")?)
                }
                None => None,
            };
            let coupling = match attrs.take("coupling") {
                Some((v, vs)) => parse_fraction(v, vs, "coupling")?,
                None => device_type.default_coupling(),
            };
            attrs.finish("switch")?;
            StatementKind::Switch {
                device_type,
                input,
                output,
                coupling,
            }
        }
        other => {
            return Err(ParseError::new(
                kind_tok.span,
                format!("unknown element kind `{other}`"),
            ))
        }
    };

    Ok(Statement { id, kind, span })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3A: &str = "\
# two-path demo circuit: one branch feeds two cascaded through switches
source src power_mw=2
ybranch yb in=src out=a,b
switch M1 type=through in=a out=c
switch M2 type=through in=c
switch M3 type=through in=b
";

    #[test]
    fn parses_branched_demo_circuit() {
        let ast = NetlistAst::parse(FIG3A).unwrap();
        assert_eq!(ast.statements.len(), 5);
        assert!(matches!(
            ast.statements[0].kind,
            StatementKind::Source { power_mw } if power_mw == 2.0
        ));
        assert!(matches!(ast.statements[1].kind, StatementKind::YBranch { .. }));
        let switches = ast
            .statements
            .iter()
            .filter(|s| matches!(s.kind, StatementKind::Switch { .. }))
            .count();
        assert_eq!(switches, 3);
    }

    #[test]
    fn empty_file_is_a_valid_empty_ast() {
        let ast = NetlistAst::parse("").unwrap();
        assert!(ast.statements.is_empty());
        let ast = NetlistAst::parse("# only a comment\n\n").unwrap();
        assert!(ast.statements.is_empty());
    }

    #[test]
    fn tapered_switch_with_out_port_is_rejected() {
        let err = NetlistAst::parse("switch M1 type=tapered in=A out=B").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.msg.contains("tapered tap has no through port"), "{err}");
    }

    #[test]
    fn unknown_kind_duplicate_id_and_malformed_attr() {
        let err = NetlistAst::parse("laser L1 power_mw=1").unwrap_err();
        assert!(err.msg.contains("unknown element kind"), "{err}");

        let err = NetlistAst::parse("source a power_mw=1\nsource a power_mw=2").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.msg.contains("duplicate id"), "{err}");

        let err = NetlistAst::parse("source s power_mw=fast").unwrap_err();
        assert!(err.msg.contains("malformed number"), "{err}");

        let err = NetlistAst::parse("waveguide w in=a out=b gain=3").unwrap_err();
        assert!(err.msg.contains("unknown attribute `gain`"), "{err}");
    }

    #[test]
    fn error_spans_point_at_the_offending_token() {
        let err = NetlistAst::parse("switch M1 type=bogus in=a").unwrap_err();
        assert_eq!((err.line, err.col), (1, 11));
    }

    #[test]
    fn defaults_are_applied() {
        let ast = NetlistAst::parse(
            "source s power_mw=1\nybranch y in=s out=a,b\nswitch t1 type=tapered in=a\nswitch t2 type=through in=b",
        )
        .unwrap();
        match &ast.statements[1].kind {
            StatementKind::YBranch { split, loss_db, .. } => {
                assert_eq!(*split, 0.5);
                assert_eq!(*loss_db, 0.0);
            }
            k => panic!("expected ybranch, got {k:?}"),
        }
        match &ast.statements[2].kind {
            StatementKind::Switch { coupling, .. } => assert_eq!(*coupling, 0.84),
            k => panic!("expected switch, got {k:?}"),
        }
        match &ast.statements[3].kind {
            StatementKind::Switch { coupling, .. } => assert_eq!(*coupling, 0.67),
            k => panic!("expected switch, got {k:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip_on_corpus() {
        let corpus = [
            FIG3A,
            "source s power_mw=0\n",
            "source s power_mw=1.5\nswitch only type=tapered in=s coupling=0.9\n",
            "source s power_mw=3\nwaveguide w in=s out=m loss_db=0.25\nswitch m1 type=through in=m out=tail coupling=0.5\n",
            "source s power_mw=1\nybranch y in=s out=l,r split=0.3 loss_db=0.1\nswitch a type=tapered in=l\nswitch b type=tapered in=r\n",
        ];
        for text in corpus {
            let ast = NetlistAst::parse(text).unwrap();
            let printed = ast.print();
            let reparsed = NetlistAst::parse(&printed).unwrap();
            assert_eq!(ast, reparsed, "round trip failed for:\n{text}");
            // printing is a fixed point
            assert_eq!(printed, reparsed.print());
        }
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let ast = NetlistAst::parse(
            "   source   s   power_mw=2   # trailing comment\n\n\t# indented comment\n",
        )
        .unwrap();
        assert_eq!(ast.statements.len(), 1);
    }
}
