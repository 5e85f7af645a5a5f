//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | factor
//! factor := atom ['^' uint] ["'"]
//! atom   := 'X' | 't' | name | complex-literal | '(' expr ')'
//! ```
//!
//! `*` is mandatory between factors. A complex literal is a real number,
//! a number immediately followed by `i`, or a bare `i`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coeff_algebra::{CoeffAlgebra, Mat};
use crate::error::Error;
use crate::models_rng::{random_coefficient, trial_rng};
use crate::ncpoly::{Coefficient, NCPoly, DEFAULT_CANONICAL_CAP, DEFAULT_DEGREE_CAP};

pub const MAX_INPUT_LEN: usize = 1 << 23;
/// Bound on nested parentheses and unary minus chains.
pub const MAX_NESTING: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown coefficient {name:?} at {pos}")]
    UnknownName { name: String, pos: usize },

    #[error("degree {degree} at {pos} exceeds the degree cap {cap}")]
    DegreeCap { degree: usize, pos: usize, cap: usize },

    #[error("expression at {pos} expands to {terms} stored terms, over the cap of {cap}")]
    TooManyTerms { terms: usize, pos: usize, cap: usize },

    #[error("input is {len} characters, over the cap of {cap}")]
    TooLong { len: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// `X` or `t`.
    Indeterminate,
    Name { name: String, pos: usize },
    Scalar(Complex64),
    /// Summands, each flagged when subtracted.
    Sum(Vec<(bool, Expr)>),
    /// Factors with the position of the `*` before each (0 for the first).
    Product(Vec<(usize, Expr)>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32, usize),
    Adjoint(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, text: String, imag: bool },
    ImagUnit,
    Ident(String),
    Indet,
    Plus,
    Minus,
    Star,
    Caret,
    Prime,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num { text, imag, .. } => write!(f, "{text}{}", if *imag { "i" } else { "" }),
            Tok::ImagUnit => f.write_str("i"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Indet => f.write_str("X"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Caret => f.write_str("^"),
            Tok::Prime => f.write_str("'"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, msg: msg.into() }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '\'' => Tok::Prime,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '⊗' => return Err(syntax(start, "tensor products cannot be parsed as polynomials")),
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value = text
                    .parse::<f64>()
                    .map_err(|_| syntax(start, format!("malformed number {text:?}")))?;
                let imag = i < chars.len() && chars[i] == 'i' && !chars.get(i + 1).is_some_and(|&c| is_ident_char(c));
                if imag {
                    i += 1;
                }
                out.push((Tok::Num { value, text, imag }, start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "X" | "t" => Tok::Indet,
                    "i" => Tok::ImagUnit,
                    _ => Tok::Ident(word),
                };
                out.push((tok, start));
                continue;
            }
            other => return Err(syntax(start, format!("unexpected character {other:?}"))),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn nest(&mut self, pos: usize) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(syntax(pos, format!("nesting deeper than {MAX_NESTING}")));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![(false, self.term()?)];
        loop {
            let negate = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            items.push((negate, self.term()?));
        }
        Ok(if items.len() == 1 && !items[0].0 {
            items.pop().unwrap().1
        } else {
            Expr::Sum(items)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![(0, self.unary()?)];
        while *self.peek() == Tok::Star {
            let (_, pos) = self.bump();
            items.push((pos, self.unary()?));
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap().1
        } else {
            Expr::Product(items)
        })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            let (_, pos) = self.bump();
            self.nest(pos)?;
            let e = Expr::Neg(Box::new(self.unary()?));
            self.depth -= 1;
            return Ok(e);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        if *self.peek() == Tok::Caret {
            let (_, caret) = self.bump();
            let (tok, pos) = self.bump();
            let k = match &tok {
                Tok::Num { text, imag: false, .. } if text.bytes().all(|b| b.is_ascii_digit()) => text
                    .parse::<u32>()
                    .map_err(|_| ParseError::DegreeCap {
                        degree: usize::MAX,
                        pos,
                        cap: DEFAULT_DEGREE_CAP,
                    })?,
                other => return Err(syntax(pos, format!("expected a nonnegative integer exponent, found {other}"))),
            };
            e = Expr::Pow(Box::new(e), k, caret);
        }
        if *self.peek() == Tok::Prime {
            self.bump();
            e = Expr::Adjoint(Box::new(e));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Indet => Ok(Expr::Indeterminate),
            Tok::Ident(name) => Ok(Expr::Name { name, pos }),
            Tok::Num { value, imag: false, .. } => Ok(Expr::Scalar(Complex64::new(value, 0.0))),
            Tok::Num { value, imag: true, .. } => Ok(Expr::Scalar(Complex64::new(0.0, value))),
            Tok::ImagUnit => Ok(Expr::Scalar(Complex64::i())),
            Tok::LParen => {
                self.nest(pos)?;
                let e = self.expr()?;
                self.depth -= 1;
                match self.bump() {
                    (Tok::RParen, _) => Ok(e),
                    (other, p) => Err(syntax(p, format!("expected ')', found {other}"))),
                }
            }
            other => Err(syntax(pos, format!("expected an operand, found {other}"))),
        }
    }
}

/// Parses `text` into an expression tree without resolving names.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let len = text.chars().count();
    if len > MAX_INPUT_LEN {
        return Err(ParseError::TooLong { len, cap: MAX_INPUT_LEN });
    }
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        depth: 0,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::Indet | Tok::Ident(_) | Tok::Num { .. } | Tok::ImagUnit | Tok::LParen => Err(syntax(
            p.pos(),
            "juxtaposition is not multiplication; insert '*'",
        )),
        other => Err(syntax(p.pos(), format!("unexpected {other}"))),
    }
}

/// The coefficient names an expression may use.
///
/// `e0`, `e1`, ... always denote the orthonormal basis of `B`. Other names
/// come from the declared table; with an auto seed, undeclared names are
/// bound to fixed pseudo-random elements of `B` derived from the name.
#[derive(Debug, Clone)]
pub struct Coefficients {
    algebra: Arc<CoeffAlgebra>,
    declared: BTreeMap<String, Mat>,
    auto_seed: Option<u64>,
}

fn basis_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('e')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(is_ident_char)
        && !matches!(name, "X" | "t" | "i")
}

impl Coefficients {
    pub fn new(algebra: Arc<CoeffAlgebra>) -> Self {
        Self {
            algebra,
            declared: BTreeMap::new(),
            auto_seed: None,
        }
    }

    pub fn with_auto(algebra: Arc<CoeffAlgebra>, seed: u64) -> Self {
        Self {
            auto_seed: Some(seed),
            ..Self::new(algebra)
        }
    }

    pub fn algebra(&self) -> &Arc<CoeffAlgebra> {
        &self.algebra
    }

    pub fn declare(&mut self, name: &str, matrix: Mat) -> crate::error::Result<()> {
        if !valid_name(name) || basis_index(name).is_some() {
            return Err(Error::Config(format!("{name:?} cannot be used as a coefficient name")));
        }
        if matrix.nrows() != self.algebra.ambient_dim() || matrix.ncols() != self.algebra.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.algebra.ambient_dim(),
                found: matrix.nrows(),
            });
        }
        self.algebra.check_member(&matrix)?;
        self.declared.insert(name.to_string(), matrix);
        Ok(())
    }

    pub fn resolve(&self, name: &str) -> Option<Coefficient> {
        if let Some(k) = basis_index(name) {
            return self
                .algebra
                .basis()
                .get(k)
                .map(|e| Coefficient::named(name, e.clone()));
        }
        if let Some(m) = self.declared.get(name) {
            return Some(Coefficient::named(name, m.clone()));
        }
        let seed = self.auto_seed?;
        let digest = Sha256::digest(name.as_bytes());
        let stream = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let mut rng = trial_rng(seed, stream);
        Some(Coefficient::named(name, random_coefficient(&mut rng, &self.algebra, 1.0)))
    }
}

fn check_degree(p: &NCPoly, pos: usize) -> Result<(), ParseError> {
    if p.degree() > DEFAULT_DEGREE_CAP {
        return Err(ParseError::DegreeCap {
            degree: p.degree(),
            pos,
            cap: DEFAULT_DEGREE_CAP,
        });
    }
    Ok(())
}

fn checked_mul(a: &NCPoly, b: &NCPoly, pos: usize) -> Result<NCPoly, ParseError> {
    let degree = a.degree() + b.degree();
    if degree > DEFAULT_DEGREE_CAP {
        return Err(ParseError::DegreeCap {
            degree,
            pos,
            cap: DEFAULT_DEGREE_CAP,
        });
    }
    let terms = a.terms().len() * b.terms().len();
    if terms > DEFAULT_CANONICAL_CAP {
        return Err(ParseError::TooManyTerms {
            terms,
            pos,
            cap: DEFAULT_CANONICAL_CAP,
        });
    }
    Ok(a.mul(b).expect("operands share the algebra"))
}

/// Evaluates an expression tree to a polynomial over `ctx`'s algebra.
pub fn interpret(expr: &Expr, ctx: &Coefficients) -> Result<NCPoly, ParseError> {
    let alg = ctx.algebra();
    Ok(match expr {
        Expr::Indeterminate => NCPoly::x(alg.clone()),
        Expr::Scalar(c) => NCPoly::scalar(alg.clone(), *c),
        Expr::Name { name, pos } => {
            let b = ctx.resolve(name).ok_or_else(|| ParseError::UnknownName {
                name: name.clone(),
                pos: *pos,
            })?;
            NCPoly::constant(alg.clone(), b).expect("resolved coefficients lie in B")
        }
        Expr::Sum(items) => {
            let mut terms = Vec::new();
            for (negate, e) in items {
                let p = interpret(e, ctx)?;
                terms.extend(
                    p.terms()
                        .iter()
                        .map(|(w, m)| (if *negate { -*w } else { *w }, m.clone())),
                );
            }
            NCPoly::from_terms_unchecked(alg.clone(), terms)
        }
        Expr::Neg(a) => interpret(a, ctx)?.neg(),
        Expr::Adjoint(a) => interpret(a, ctx)?.adjoint(),
        Expr::Product(items) => {
            let mut acc = interpret(&items[0].1, ctx)?;
            for (pos, e) in &items[1..] {
                acc = checked_mul(&acc, &interpret(e, ctx)?, *pos)?;
            }
            acc
        }
        Expr::Pow(a, k, pos) => {
            let base = interpret(a, ctx)?;
            let degree = base.degree().saturating_mul(*k as usize);
            if degree > DEFAULT_DEGREE_CAP {
                return Err(ParseError::DegreeCap {
                    degree,
                    pos: *pos,
                    cap: DEFAULT_DEGREE_CAP,
                });
            }
            let mut acc = NCPoly::one(alg.clone());
            for _ in 0..*k {
                acc = checked_mul(&acc, &base, *pos)?;
            }
            check_degree(&acc, *pos)?;
            acc
        }
    })
}

/// Parses and interprets `text`.
pub fn parse(text: &str, ctx: &Coefficients) -> Result<NCPoly, ParseError> {
    interpret(&parse_expr(text)?, ctx)
}
