//! Versioned text format for fitted trees.
//!
//! ```text
//! HRT v1 d=<int> kind=regression|classification
//! (node kind=max|min t1=<c,c,...> t2=<c,c,...> fallback=0|1 <left> <right>)
//! (leaf <c> <c> ...)
//! ```
//!
//! The first line is the header; the rest is one tree expression where
//! whitespace is insignificant. Coefficient lists hold exactly `d+1`
//! values. Floats are written in their shortest round-trip form, so a
//! loaded model evaluates bit-identically to the saved one.

use std::fmt::Write as _;

use thiserror::Error;

use crate::config::HrtConfig;
use crate::data::CoefVector;
use crate::split::{HingeKind, SplitParams};

use super::{FitReport, HrtModel, Task, TreeNode};

pub const FORMAT_HEADER: &str = "HRT v1";

/// Nesting limit for `load`; deeper documents are rejected.
const MAX_NESTING: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFileError {
    /// Header, version or schema problems.
    #[error("model format error: {0}")]
    Format(String),
    /// The tree payload does not parse.
    #[error("corrupt model payload: {0}")]
    CorruptPayload(String),
}

fn format_err(msg: impl Into<String>) -> ModelFileError {
    ModelFileError::Format(msg.into())
}

fn corrupt(msg: impl Into<String>) -> ModelFileError {
    ModelFileError::CorruptPayload(msg.into())
}

/// Serializes a model. Leaves and splits are written one node per line,
/// indented by depth.
pub fn save(model: &HrtModel) -> String {
    let mut out = format!("{FORMAT_HEADER} d={} kind={}\n", model.dim, model.task);
    write_node(&mut out, &model.root, 0);
    out
}

fn write_floats(out: &mut String, values: &[f64], sep: char) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(sep);
        }
        let _ = write!(out, "{v:?}");
    }
}

fn write_node(out: &mut String, node: &TreeNode, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    match node {
        TreeNode::Leaf { theta } => {
            out.push_str("(leaf ");
            write_floats(out, theta.as_slice(), ' ');
            out.push_str(")\n");
        }
        TreeNode::Internal {
            split,
            left,
            right,
            fallback_used,
        } => {
            let _ = write!(out, "(node kind={} t1=", split.kind);
            write_floats(out, split.theta1.as_slice(), ',');
            out.push_str(" t2=");
            write_floats(out, split.theta2.as_slice(), ',');
            let _ = writeln!(out, " fallback={}", u8::from(*fallback_used));
            write_node(out, left, depth + 1);
            write_node(out, right, depth + 1);
            for _ in 0..depth {
                out.push_str("  ");
            }
            out.push_str(")\n");
        }
    }
}

/// Parses a document produced by [`save`]. The loaded model carries a
/// default config and an empty fit report.
pub fn load(text: &str) -> Result<HrtModel, ModelFileError> {
    let (header, body) = match text.split_once('\n') {
        Some((h, b)) => (h, b),
        None => (text, ""),
    };
    let (dim, task) = parse_header(header.trim_end_matches('\r'))?;
    let mut parser = Parser {
        tokens: tokenize(body),
        pos: 0,
        dim,
    };
    let root = parser.node(0)?;
    if let Some(tok) = parser.peek() {
        return Err(corrupt(format!("trailing content `{}`", tok.text())));
    }
    Ok(HrtModel {
        root,
        dim,
        task,
        cfg: HrtConfig::default(),
        report: FitReport::default(),
    })
}

fn parse_header(line: &str) -> Result<(usize, Task), ModelFileError> {
    let mut parts = line.split_ascii_whitespace();
    match (parts.next(), parts.next()) {
        (Some("HRT"), Some("v1")) => {}
        (Some("HRT"), Some(v)) => return Err(format_err(format!("unsupported version `{v}`"))),
        _ => return Err(format_err("missing `HRT v1` header")),
    }
    let dim = parts
        .next()
        .and_then(|t| t.strip_prefix("d="))
        .ok_or_else(|| format_err("header is missing `d=`"))?
        .parse::<usize>()
        .map_err(|_| format_err("header `d=` is not a non-negative integer"))?;
    if dim == 0 {
        return Err(format_err("header `d=` must be at least 1"));
    }
    let task = parts
        .next()
        .and_then(|t| t.strip_prefix("kind="))
        .ok_or_else(|| format_err("header is missing `kind=`"))?
        .parse::<Task>()
        .map_err(format_err)?;
    if let Some(extra) = parts.next() {
        return Err(format_err(format!("unexpected header field `{extra}`")));
    }
    Ok((dim, task))
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

impl Token<'_> {
    fn text(&self) -> &str {
        match self {
            Token::Open => "(",
            Token::Close => ")",
            Token::Atom(s) => s,
        }
    }
}

fn tokenize(body: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in body.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token::Atom(&body[s..i]));
            }
            match c {
                '(' => tokens.push(Token::Open),
                ')' => tokens.push(Token::Close),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token::Atom(&body[s..]));
    }
    tokens
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token<'a>, ModelFileError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| corrupt("unexpected end of document"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn atom(&mut self) -> Result<&'a str, ModelFileError> {
        match self.next()? {
            Token::Atom(s) => Ok(s),
            other => Err(corrupt(format!(
                "expected a value, found `{}`",
                other.text()
            ))),
        }
    }

    fn expect(&mut self, want: Token<'static>) -> Result<(), ModelFileError> {
        let got = self.next()?;
        if got != want {
            return Err(corrupt(format!(
                "expected `{}`, found `{}`",
                want.text(),
                got.text()
            )));
        }
        Ok(())
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str, ModelFileError> {
        let tok = self.atom()?;
        tok.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| corrupt(format!("expected `{key}=`, found `{tok}`")))
    }

    fn node(&mut self, nesting: usize) -> Result<TreeNode, ModelFileError> {
        if nesting > MAX_NESTING {
            return Err(corrupt("tree nesting is too deep"));
        }
        self.expect(Token::Open)?;
        let node = match self.atom()? {
            "leaf" => {
                let mut values = Vec::with_capacity(self.dim + 1);
                while let Some(Token::Atom(_)) = self.peek() {
                    values.push(parse_float(self.atom()?)?);
                }
                TreeNode::Leaf {
                    theta: self.coefs(values)?,
                }
            }
            "node" => {
                let kind = self.keyed("kind")?.parse::<HingeKind>().map_err(corrupt)?;
                let t1 = self.coef_list("t1")?;
                let t2 = self.coef_list("t2")?;
                let fallback_used = match self.keyed("fallback")? {
                    "0" => false,
                    "1" => true,
                    other => return Err(corrupt(format!("fallback flag `{other}` is not 0 or 1"))),
                };
                let left = self.node(nesting + 1)?;
                let right = self.node(nesting + 1)?;
                let split = SplitParams::new(t1, t2, kind)
                    .map_err(|e| corrupt(format!("invalid split: {e}")))?;
                TreeNode::Internal {
                    split,
                    left: Box::new(left),
                    right: Box::new(right),
                    fallback_used,
                }
            }
            other => return Err(corrupt(format!("unknown node type `{other}`"))),
        };
        self.expect(Token::Close)?;
        Ok(node)
    }

    fn coef_list(&mut self, key: &str) -> Result<CoefVector, ModelFileError> {
        let raw = self.keyed(key)?;
        let values = raw
            .split(',')
            .map(parse_float)
            .collect::<Result<Vec<_>, _>>()?;
        self.coefs(values)
    }

    fn coefs(&self, values: Vec<f64>) -> Result<CoefVector, ModelFileError> {
        if values.len() != self.dim + 1 {
            return Err(format_err(format!(
                "coefficient list has {} values, expected {}",
                values.len(),
                self.dim + 1
            )));
        }
        Ok(CoefVector::new(values))
    }
}

fn parse_float(s: &str) -> Result<f64, ModelFileError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(corrupt(format!("`{s}` is not a finite number"))),
    }
}
