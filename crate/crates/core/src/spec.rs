//! Loss spec mini-language.
//!
//! ```text
//! spec   := name [ ':' param ( ';' param )* ]
//! param  := key '=' value
//! nested := '[' spec ']' | spec          (bare nested specs take one param)
//! ```
//!
//! Families: `log`, `brier`, `zeroone`, `cnorm:a=…`, `cd:a=…,…[;scale=…]`,
//! `normloss:alpha=…`, `const`, each with an optional `n=`. Composites:
//! `msum:combiner=<nested>;parts=<nested>,<nested>[;mode=dual]`,
//! `affine:base=<nested>[;alpha=…][;t=…,…]` and `antipolar:base=<nested>`.
//! Names and keys are case-insensitive.

use std::fmt;

use crate::calculus::{dual_msum, msum, scale_translate, MSumMode, MSumSpec};
use crate::error::GeomError;
use crate::families::{CnormParam, FamilyParam, NormAlpha};
use crate::loss::ProperLoss;
use crate::polar::antipolar_loss;
use crate::vector::LossVector;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub input: String,
    /// Byte offset of the offending token.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (at position {})", self.message, self.position)?;
        writeln!(f, "  {}", self.input)?;
        write!(f, "  {}^", " ".repeat(self.position))
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone)]
enum Kind {
    Log,
    Brier,
    ZeroOne,
    Cnorm(CnormParam),
    Cd { a: Vec<f64>, scale: f64 },
    NormLoss(NormAlpha),
    Const,
}

#[derive(Debug, Clone)]
enum Node {
    Family {
        kind: Kind,
        n: Option<usize>,
        at: usize,
    },
    MSum {
        combiner: Box<Node>,
        parts: Vec<Node>,
        mode: MSumMode,
        at: usize,
    },
    Affine {
        base: Box<Node>,
        alpha: f64,
        t: Option<Vec<f64>>,
        at: usize,
    },
    Antipolar {
        base: Box<Node>,
        at: usize,
    },
}

/// Parses `text` and builds the loss. Families without an explicit `n=`
/// get dimension `default_n`.
pub fn parse_spec(text: &str, default_n: usize) -> Result<ProperLoss, ParseError> {
    let p = Parser {
        original: text,
        s: text.to_ascii_lowercase(),
    };
    let node = p.region(0, text.len())?;
    p.build(&node, default_n)
}

/// Parses an `msum:` spec into its combiner, parts and mode without
/// building the composite.
pub fn parse_msum_spec(text: &str, default_n: usize) -> Result<MSumSpec, ParseError> {
    let p = Parser {
        original: text,
        s: text.to_ascii_lowercase(),
    };
    let node = p.region(0, text.len())?;
    p.msum_spec(&node, default_n)
}

struct Parser<'a> {
    original: &'a str,
    s: String,
}

impl Parser<'_> {
    fn err(&self, position: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            input: self.original.to_string(),
            position,
            message: message.into(),
        }
    }

    fn geom(&self, at: usize, e: GeomError) -> ParseError {
        self.err(at, e.to_string())
    }

    fn bytes(&self) -> &[u8] {
        self.s.as_bytes()
    }

    /// Splits `[start, end)` at `sep` bytes outside brackets. With
    /// `before_name`, a separator only counts when a letter or `[` follows.
    fn split(&self, start: usize, end: usize, sep: u8, before_name: bool) -> Result<Vec<(usize, usize)>, ParseError> {
        let b = self.bytes();
        let mut depth = 0i32;
        let mut out = Vec::new();
        let mut from = start;
        for i in start..end {
            match b[i] {
                b'[' => depth += 1,
                b']' => {
                    depth -= 1;
                    if depth < 0 {
                        return Err(self.err(i, "unmatched ']'"));
                    }
                }
                c if c == sep && depth == 0 => {
                    let next = b.get(i + 1).copied().unwrap_or(b' ');
                    if !before_name || next.is_ascii_alphabetic() || next == b'[' {
                        out.push((from, i));
                        from = i + 1;
                    }
                }
                _ => {}
            }
        }
        if depth > 0 {
            return Err(self.err(end, "unclosed '['"));
        }
        out.push((from, end));
        Ok(out)
    }

    fn nested(&self, start: usize, end: usize) -> Result<Node, ParseError> {
        let b = self.bytes();
        if start < end && b[start] == b'[' {
            if b[end - 1] != b']' {
                return Err(self.err(end, "expected ']' closing the nested spec"));
            }
            return self.region(start + 1, end - 1);
        }
        self.region(start, end)
    }

    fn region(&self, start: usize, end: usize) -> Result<Node, ParseError> {
        let text = &self.s[start..end];
        if text.is_empty() {
            return Err(self.err(start, "empty spec"));
        }
        let (name_end, params) = match text.find(':') {
            Some(i) => (start + i, Some((start + i + 1, end))),
            None => (end, None),
        };
        let name = &self.s[start..name_end];
        if let Some(i) = name.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')) {
            return Err(self.err(start + i, format!("unexpected character in loss name '{name}'")));
        }
        let mut kv: Vec<(&str, usize, usize, usize)> = Vec::new();
        if let Some((ps, pe)) = params {
            if ps == pe {
                return Err(self.err(ps, "expected a parameter after ':'"));
            }
            for (a, b) in self.split(ps, pe, b';', false)? {
                let item = &self.s[a..b];
                let eq = item
                    .find('=')
                    .ok_or_else(|| self.err(a, format!("expected key=value, found '{}'", &self.original[a..b])))?;
                let key = &self.s[a..a + eq];
                if key.is_empty() {
                    return Err(self.err(a, "missing parameter name"));
                }
                if kv.iter().any(|(k, ..)| *k == key) {
                    return Err(self.err(a, format!("duplicate parameter '{key}'")));
                }
                kv.push((key, a, a + eq + 1, b));
            }
        }
        let allowed: &[&str] = match name {
            "log" | "brier" | "zeroone" | "zero_one" | "const" | "constant" => &["n"],
            "cnorm" => &["a", "n"],
            "cd" | "cobbdouglas" => &["a", "scale", "n"],
            "normloss" => &["alpha", "n"],
            "msum" => &["combiner", "parts", "mode"],
            "affine" => &["base", "alpha", "t"],
            "antipolar" => &["base"],
            _ => return Err(self.err(start, format!("unknown loss '{}'", &self.original[start..name_end]))),
        };
        for (k, a, ..) in &kv {
            if !allowed.contains(k) {
                return Err(self.err(*a, format!("unknown parameter '{k}' for '{name}'")));
            }
        }
        let get = |key: &str| kv.iter().find(|(k, ..)| *k == key).map(|&(_, _, vs, ve)| (vs, ve));
        let require = |key: &str| get(key).ok_or_else(|| self.err(start, format!("'{name}' requires '{key}='")));

        let n = match get("n") {
            Some((vs, ve)) => Some(self.int(vs, ve)?),
            None => None,
        };
        let family = |kind: Kind| Ok(Node::Family { kind, n, at: start });
        match name {
            "log" => family(Kind::Log),
            "brier" => family(Kind::Brier),
            "zeroone" | "zero_one" => family(Kind::ZeroOne),
            "const" | "constant" => family(Kind::Const),
            "cnorm" => {
                let (vs, ve) = require("a")?;
                let a = CnormParam::new(self.num(vs, ve)?).map_err(|e| self.geom(vs, e))?;
                family(Kind::Cnorm(a))
            }
            "cd" | "cobbdouglas" => {
                let (vs, ve) = require("a")?;
                let a = self.list(vs, ve)?;
                let scale = match get("scale") {
                    Some((s, e)) => self.num(s, e)?,
                    None => 1.0,
                };
                crate::families::CobbDouglas::new(a.clone(), scale).map_err(|e| self.geom(vs, e))?;
                family(Kind::Cd { a, scale })
            }
            "normloss" => {
                let (vs, ve) = require("alpha")?;
                let alpha = NormAlpha::new(self.num(vs, ve)?).map_err(|e| self.geom(vs, e))?;
                family(Kind::NormLoss(alpha))
            }
            "msum" => {
                let (cs, ce) = require("combiner")?;
                let combiner = Box::new(self.nested(cs, ce)?);
                let (ps, pe) = require("parts")?;
                let parts = self
                    .split(ps, pe, b',', true)?
                    .into_iter()
                    .map(|(a, b)| self.nested(a, b))
                    .collect::<Result<Vec<_>, _>>()?;
                let mode = match get("mode") {
                    None => MSumMode::Direct,
                    Some((ms, me)) => match &self.s[ms..me] {
                        "direct" => MSumMode::Direct,
                        "dual" => MSumMode::Dual,
                        other => return Err(self.err(ms, format!("mode must be 'direct' or 'dual', got '{other}'"))),
                    },
                };
                Ok(Node::MSum {
                    combiner,
                    parts,
                    mode,
                    at: start,
                })
            }
            "affine" => {
                let (bs, be) = require("base")?;
                let base = Box::new(self.nested(bs, be)?);
                let alpha = match get("alpha") {
                    Some((s, e)) => self.num(s, e)?,
                    None => 1.0,
                };
                let t = match get("t") {
                    Some((s, e)) => Some(self.list(s, e)?),
                    None => None,
                };
                Ok(Node::Affine {
                    base,
                    alpha,
                    t,
                    at: start,
                })
            }
            "antipolar" => {
                let (bs, be) = require("base")?;
                Ok(Node::Antipolar {
                    base: Box::new(self.nested(bs, be)?),
                    at: start,
                })
            }
            _ => unreachable!("name checked above"),
        }
    }

    fn num(&self, start: usize, end: usize) -> Result<f64, ParseError> {
        let t = &self.s[start..end];
        match t.parse::<f64>() {
            Ok(v) if !v.is_nan() => Ok(v),
            _ => Err(self.err(start, format!("expected a number, found '{}'", &self.original[start..end]))),
        }
    }

    fn int(&self, start: usize, end: usize) -> Result<usize, ParseError> {
        self.s[start..end]
            .parse::<usize>()
            .map_err(|_| self.err(start, format!("expected a dimension, found '{}'", &self.original[start..end])))
    }

    fn list(&self, start: usize, end: usize) -> Result<Vec<f64>, ParseError> {
        self.split(start, end, b',', false)?
            .into_iter()
            .map(|(a, b)| self.num(a, b))
            .collect()
    }

    /// Dimension fixed by the spec itself, if any.
    fn intrinsic(node: &Node) -> Option<usize> {
        match node {
            Node::Family {
                kind: Kind::Cd { a, .. }, ..
            } => Some(a.len()),
            Node::Family { n, .. } => *n,
            Node::MSum { parts, .. } => parts.iter().find_map(Self::intrinsic),
            Node::Affine { base, t, .. } => t.as_ref().map(|t| t.len()).or_else(|| Self::intrinsic(base)),
            Node::Antipolar { base, .. } => Self::intrinsic(base),
        }
    }

    fn msum_spec(&self, node: &Node, default_n: usize) -> Result<MSumSpec, ParseError> {
        let Node::MSum {
            combiner,
            parts,
            mode,
            at,
        } = node
        else {
            return Err(self.err(0, "expected an msum spec"));
        };
        let n = parts.iter().find_map(Self::intrinsic).unwrap_or(default_n);
        let parts = parts
            .iter()
            .map(|p| self.build(p, n))
            .collect::<Result<Vec<_>, _>>()?;
        let combiner = self.build(combiner, parts.len())?;
        MSumSpec::new(combiner, parts, *mode).map_err(|e| self.geom(*at, e))
    }

    fn build(&self, node: &Node, default_n: usize) -> Result<ProperLoss, ParseError> {
        match node {
            Node::Family { kind, n, at } => {
                let dim = n.unwrap_or(default_n);
                let param = match kind {
                    Kind::Log => FamilyParam::Log { n: dim },
                    Kind::Brier => FamilyParam::Brier { n: dim },
                    Kind::ZeroOne => FamilyParam::ZeroOne { n: dim },
                    Kind::Const => FamilyParam::Constant { n: dim },
                    Kind::Cnorm(a) => FamilyParam::Cnorm { a: *a, n: dim },
                    Kind::NormLoss(alpha) => FamilyParam::NormLoss { alpha: *alpha, n: dim },
                    Kind::Cd { a, scale } => {
                        if let Some(n) = n {
                            if *n != a.len() {
                                return Err(self.geom(
                                    *at,
                                    GeomError::DimensionMismatch {
                                        expected: a.len(),
                                        got: *n,
                                    },
                                ));
                            }
                        }
                        FamilyParam::CobbDouglas {
                            a: a.clone(),
                            scale: *scale,
                        }
                    }
                };
                param.build().map_err(|e| self.geom(*at, e))
            }
            Node::MSum { mode, at, .. } => {
                let spec = self.msum_spec(node, default_n)?;
                match mode {
                    MSumMode::Direct => msum(spec),
                    MSumMode::Dual => dual_msum(spec),
                }
                .map_err(|e| self.geom(*at, e))
            }
            Node::Affine { base, alpha, t, at } => {
                let n = Self::intrinsic(node).unwrap_or(default_n);
                let base = self.build(base, n)?;
                let t = t.clone().unwrap_or_else(|| vec![0.0; base.dim()]);
                let t = LossVector::new(t).map_err(|e| self.geom(*at, e))?;
                scale_translate(&base, *alpha, &t).map_err(|e| self.geom(*at, e))
            }
            Node::Antipolar { base, at } => {
                let base = self.build(base, default_n)?;
                antipolar_loss(&base).map_err(|e| self.geom(*at, e))
            }
        }
    }
}
