//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := iff
//! iff     := imp ("<->" imp)?
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := lit ("&" lit)*
//! lit     := "!" lit | "[]" lit | "<>" ("^" INT)? lit
//!          | "(" formula ")" | "true" | "false" | IDENT | cmp
//! cmp     := expr (">=" | "<=" | "=" | ">" | "<") expr
//! expr    := "-"? term (("+" | "-") term)*
//! term    := INT ("*" atom)? | atom
//! atom    := INT | "[" formula "]" | "#" "(" formula ")" | "(" expr ")"
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use super::{FormulaId, FormulaStore, LinExpr};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Bang,
    Amp,
    Bar,
    Arrow,
    DoubleArrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Box,
    Diamond,
    Caret,
    Hash,
    Plus,
    Minus,
    Star,
    Ge,
    Le,
    Eq,
    Gt,
    Lt,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Bang => "`!`",
            Tok::Amp => "`&`",
            Tok::Bar => "`|`",
            Tok::Arrow => "`->`",
            Tok::DoubleArrow => "`<->`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Box => "`[]`",
            Tok::Diamond => "`<>`",
            Tok::Caret => "`^`",
            Tok::Hash => "`#`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Ge => "`>=`",
            Tok::Le => "`<=`",
            Tok::Eq => "`=`",
            Tok::Gt => "`>`",
            Tok::Lt => "`<`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::DoubleArrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("<>") {
            (Tok::Diamond, 2)
        } else if rest.starts_with("[]") {
            (Tok::Box, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if c.is_ascii_digit() {
            let len = rest.bytes().take_while(u8::is_ascii_digit).count();
            let n = BigInt::from_str(&rest[..len]).expect("digits");
            (Tok::Int(n), len)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let len = rest
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_' || *b == b'\'')
                .count();
            (Tok::Ident(rest[..len].to_owned()), len)
        } else {
            let tok = match c {
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Bar,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b'^' => Tok::Caret,
                b'#' => Tok::Hash,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'=' => Tok::Eq,
                b'>' => Tok::Gt,
                b'<' => Tok::Lt,
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(ParseError {
                        position: start,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            };
            (tok, 1)
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    store: &'a mut FormulaStore,
    // furthest failure, reported when every alternative fails
    furthest: Option<ParseError>,
}

type PResult<T> = Result<T, ParseError>;

/// Parse `text` into `store`, returning the root node.
pub fn parse(store: &mut FormulaStore, text: &str) -> Result<FormulaId, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, store, furthest: None };
    let f = p.formula().map_err(|e| p.furthest_of(e))?;
    if p.peek() != &Tok::Eof {
        let e = p.error(format!("unexpected {}", p.peek()));
        return Err(p.furthest_of(e));
    }
    Ok(f)
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { position: self.offset(), message }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {t}, found {}", self.peek())))
        }
    }

    fn record(&mut self, e: ParseError) {
        match &self.furthest {
            Some(f) if f.position >= e.position => {}
            _ => self.furthest = Some(e),
        }
    }

    fn furthest_of(&mut self, e: ParseError) -> ParseError {
        self.record(e);
        self.furthest.clone().expect("recorded")
    }

    fn formula(&mut self) -> PResult<FormulaId> {
        let lhs = self.imp()?;
        if self.eat(&Tok::DoubleArrow) {
            let rhs = self.imp()?;
            return Ok(self.store.iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> PResult<FormulaId> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.imp()?;
            return Ok(self.store.implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<FormulaId> {
        let mut acc = self.and()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.and()?;
            acc = self.store.or(acc, rhs);
        }
        Ok(acc)
    }

    fn and(&mut self) -> PResult<FormulaId> {
        let mut acc = self.lit()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.lit()?;
            acc = self.store.and(acc, rhs);
        }
        Ok(acc)
    }

    fn lit(&mut self) -> PResult<FormulaId> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                let f = self.lit()?;
                Ok(self.store.not(f))
            }
            Tok::Box => {
                self.bump();
                let f = self.lit()?;
                Ok(self.store.boxed(f))
            }
            Tok::Diamond => {
                self.bump();
                let k = if self.eat(&Tok::Caret) {
                    match self.bump() {
                        Tok::Int(n) => n,
                        t => {
                            self.pos -= usize::from(t != Tok::Eof);
                            return Err(self.error(format!("expected integer after `^`, found {t}")));
                        }
                    }
                } else {
                    BigInt::from(1)
                };
                let f = self.lit()?;
                Ok(self.store.geq_zero(LinExpr::count(f) - &LinExpr::constant(k)))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(match name.as_str() {
                    "true" => self.store.top(),
                    "false" => self.store.bottom(),
                    _ => self.store.prop(&name),
                })
            }
            Tok::LParen => {
                // `(` opens either a parenthesized formula or an expression
                let save = self.pos;
                match self.cmp() {
                    Ok(f) => Ok(f),
                    Err(e) => {
                        self.record(e);
                        self.pos = save;
                        self.bump();
                        let f = self.formula()?;
                        self.expect(Tok::RParen)?;
                        Ok(f)
                    }
                }
            }
            Tok::Int(_) | Tok::LBracket | Tok::Hash | Tok::Minus => self.cmp(),
            t => Err(self.error(format!("expected a formula, found {t}"))),
        }
    }

    fn cmp(&mut self) -> PResult<FormulaId> {
        let lhs = self.expr()?;
        let op = self.bump();
        let rhs = match op {
            Tok::Ge | Tok::Le | Tok::Eq | Tok::Gt | Tok::Lt => self.expr()?,
            t => {
                self.pos -= usize::from(t != Tok::Eof);
                return Err(self.error(format!("expected a comparison operator, found {t}")));
            }
        };
        let one = LinExpr::constant(1);
        Ok(match op {
            Tok::Ge => self.store.geq_zero(lhs - &rhs),
            Tok::Le => self.store.geq_zero(rhs - &lhs),
            Tok::Gt => self.store.geq_zero(lhs - &rhs - &one),
            Tok::Lt => self.store.geq_zero(rhs - &lhs - &one),
            Tok::Eq => {
                let a = self.store.geq_zero(lhs.clone() - &rhs);
                let b = self.store.geq_zero(rhs - &lhs);
                self.store.and(a, b)
            }
            _ => unreachable!(),
        })
    }

    fn expr(&mut self) -> PResult<LinExpr> {
        let mut acc = if self.eat(&Tok::Minus) { -self.term()? } else { self.term()? };
        loop {
            if self.eat(&Tok::Plus) {
                let t = self.term()?;
                acc = acc + &t;
            } else if self.eat(&Tok::Minus) {
                let t = self.term()?;
                acc = acc - &t;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<LinExpr> {
        if let Tok::Int(n) = self.peek().clone() {
            self.bump();
            if self.eat(&Tok::Star) {
                let a = self.atom()?;
                return Ok(a.scale(n));
            }
            return Ok(LinExpr::constant(n));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<LinExpr> {
        match self.bump() {
            Tok::Int(n) => Ok(LinExpr::constant(n)),
            Tok::LBracket => {
                let f = self.formula()?;
                self.expect(Tok::RBracket)?;
                Ok(LinExpr::indicator(f))
            }
            Tok::Hash => {
                self.expect(Tok::LParen)?;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(LinExpr::count(f))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            t => {
                self.pos -= usize::from(t != Tok::Eof);
                Err(self.error(format!("expected an expression, found {t}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Atom, Node};
    use super::*;

    fn p(s: &mut FormulaStore, t: &str) -> FormulaId {
        parse(s, t).unwrap_or_else(|e| panic!("{t}: {e}"))
    }

    #[test]
    fn atomic_proposition() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "p");
        assert_eq!(s.node(f), &Node::Prop("p".into()));
    }

    #[test]
    fn figure_three_formula() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "p & (#(!p) >= 2) & (#(#(p) >= 1) <= 1)");
        let Node::And(lhs, c) = s.node(f).clone() else { panic!() };
        let Node::And(a, b) = s.node(lhs).clone() else { panic!() };
        assert_eq!(a, p(&mut s, "p"));
        let not_p = p(&mut s, "!p");
        assert_eq!(
            s.node(b),
            &Node::GeqZero(LinExpr::count(not_p) - &LinExpr::constant(2))
        );
        let inner = p(&mut s, "#(p) >= 1");
        assert_eq!(s.node(c), &Node::GeqZero(LinExpr::constant(1) - &LinExpr::count(inner)));
    }

    #[test]
    fn sugar_expansions() {
        let mut s = FormulaStore::new();
        let q = p(&mut s, "q");
        let diamond = p(&mut s, "<>^3 q");
        assert_eq!(diamond, s.at_least(3, q));
        let plain = p(&mut s, "<> q");
        assert_eq!(plain, s.at_least(1, q));
        let boxed = p(&mut s, "[] q");
        assert_eq!(boxed, p(&mut s, "#(!q) <= 0"));
        let strict = p(&mut s, "#(q) > 2");
        assert_eq!(strict, p(&mut s, "#(q) - 3 >= 0"));
        let lt = p(&mut s, "[q] < 1");
        assert_eq!(lt, p(&mut s, "0 - [q] >= 0"));
        let eq = p(&mut s, "#(q) = 2");
        assert_eq!(eq, p(&mut s, "(#(q) - 2 >= 0) & (2 - #(q) >= 0)"));
        assert_eq!(p(&mut s, "true"), s.top());
        assert_eq!(p(&mut s, "false"), s.bottom());
    }

    #[test]
    fn precedence() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "a | b & !c -> d");
        let g = p(&mut s, "((a | (b & (!c))) -> d)");
        assert_eq!(f, g);
        let imp = p(&mut s, "a -> b -> c");
        assert_eq!(imp, p(&mut s, "a -> (b -> c)"));
    }

    #[test]
    fn parenthesized_expression_versus_formula() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "(#(p) + 1) >= 2");
        assert_eq!(f, p(&mut s, "#(p) - 1 >= 0"));
        let g = p(&mut s, "2 * (#(p) + [q]) >= 3");
        let Node::GeqZero(e) = s.node(g).clone() else { panic!() };
        let pp = p(&mut s, "p");
        let qq = p(&mut s, "q");
        assert_eq!(
            e.terms(),
            &[(Atom::Indicator(qq), 2.into()), (Atom::Count(pp), 2.into())]
        );
        let h = p(&mut s, "((p))");
        assert_eq!(h, pp);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let mut s = FormulaStore::new();
        let e = parse(&mut s, "p & ").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse(&mut s, "#(p) >= ").unwrap_err();
        assert_eq!(e.position, 8);
        let e = parse(&mut s, "p $ q").unwrap_err();
        assert_eq!(e.position, 2);
        let e = parse(&mut s, "(p & q").unwrap_err();
        assert_eq!(e.position, 6);
        assert!(parse(&mut s, "#(p)").is_err());
        assert!(parse(&mut s, "p q").is_err());
    }

    #[test]
    fn large_constants_are_exact() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "#(p) >= 123456789012345678901234567890");
        let Node::GeqZero(e) = s.node(f) else { panic!() };
        assert_eq!(e.constant_term().to_string(), "-123456789012345678901234567890");
    }
}
