//! Text grammar for predicates.
//!
//! Integer algebra:
//!
//! ```text
//! expr := atom | expr "&&" expr | expr "||" expr | "!" expr | "(" expr ")" | "true" | "false"
//! atom := INT? "*"? "x" (("+"|"-") INT)? CMP INT
//!       | "x" "%" INT "==" INT
//! CMP  := "<" | "<=" | "==" | ">=" | ">" | "!="
//! ```
//!
//! Bitvector algebra of width `w`:
//!
//! ```text
//! expr := "in" "{" INT ("," INT)* "}" | "true" | "false"
//! ```
//!
//! Errors carry the byte offset of the offending token.

use super::{AlgebraId, BvSet, CmpOp, LinearAtom, ModAtom, Predicate};
use crate::error::{Error, Result};

pub fn parse_predicate(text: &str, algebra: AlgebraId) -> Result<Predicate> {
    let mut s = Scanner { text: text.as_bytes(), pos: 0 };
    let p = match algebra {
        AlgebraId::Lia => parse_or(&mut s)?,
        AlgebraId::Bv(w) => parse_bv(&mut s, w)?,
    };
    s.skip_ws();
    if s.pos != s.text.len() {
        return Err(s.err("unexpected trailing input"));
    }
    Ok(p)
}

struct Scanner<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    /// Keyword match: like `eat` but must not be followed by a word character.
    fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        let end = self.pos + word.len();
        if self.text[self.pos..].starts_with(word.as_bytes())
            && self.text.get(end).is_none_or(|c| !c.is_ascii_alphanumeric() && *c != b'_')
        {
            self.pos = end;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{tok}`")))
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        let mut p = self.pos;
        if self.text.get(p) == Some(&b'-') {
            p += 1;
        }
        let digits = p;
        while p < self.text.len() && self.text[p].is_ascii_digit() {
            p += 1;
        }
        if p == digits {
            return Err(self.err("expected an integer"));
        }
        let raw = std::str::from_utf8(&self.text[start..p]).unwrap();
        self.pos = p;
        raw.parse::<i64>().map_err(|_| Error::Parse {
            pos: start,
            msg: format!("integer `{raw}` out of range"),
        })
    }

    fn cmp(&mut self) -> Result<CmpOp> {
        // two-char operators first
        for (tok, op) in [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("==", CmpOp::Eq),
            ("!=", CmpOp::Ne),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ] {
            if self.eat(tok) {
                return Ok(op);
            }
        }
        Err(self.err("expected a comparison operator"))
    }
}

fn parse_or(s: &mut Scanner) -> Result<Predicate> {
    let mut p = parse_and(s)?;
    while s.eat("||") {
        let q = parse_and(s)?;
        p = p.or(&q)?;
    }
    Ok(p)
}

fn parse_and(s: &mut Scanner) -> Result<Predicate> {
    let mut p = parse_unary(s)?;
    while s.eat("&&") {
        let q = parse_unary(s)?;
        p = p.and(&q)?;
    }
    Ok(p)
}

fn parse_unary(s: &mut Scanner) -> Result<Predicate> {
    if s.peek() == Some(b'!') && !s.text[s.pos..].starts_with(b"!=") {
        s.pos += 1;
        return Ok(parse_unary(s)?.not());
    }
    parse_primary(s)
}

fn parse_primary(s: &mut Scanner) -> Result<Predicate> {
    if s.eat_word("true") {
        return Ok(Predicate::top(AlgebraId::Lia));
    }
    if s.eat_word("false") {
        return Ok(Predicate::bottom(AlgebraId::Lia));
    }
    if s.eat("(") {
        let p = parse_or(s)?;
        s.expect(")")?;
        return Ok(p);
    }
    parse_atom(s)
}

fn parse_atom(s: &mut Scanner) -> Result<Predicate> {
    let mut coeff = 1i64;
    if s.peek().is_some_and(|c| c == b'-' || c.is_ascii_digit()) {
        coeff = s.int()?;
        s.eat("*");
        if !s.eat_word("x") {
            return Err(s.err("expected `x` after coefficient"));
        }
    } else if s.eat_word("x") {
        if s.eat("%") {
            let at = s.pos;
            let modulus = s.int()?;
            if modulus < 1 {
                return Err(Error::Parse { pos: at, msg: "modulus must be positive".into() });
            }
            s.expect("==")?;
            let residue = s.int()?;
            return Ok(Predicate::from_mod(ModAtom::new(modulus, residue)));
        }
    } else {
        return Err(s.err("expected a predicate atom"));
    }
    let mut offset = 0i64;
    if s.peek() == Some(b'+') {
        s.pos += 1;
        offset = s.int()?;
    } else if s.peek() == Some(b'-') {
        s.pos += 1;
        offset = s
            .int()?
            .checked_neg()
            .ok_or_else(|| s.err("offset out of range"))?;
    }
    let cmp = s.cmp()?;
    let rhs = s.int()?;
    Ok(Predicate::from_linear(LinearAtom { coeff, offset, cmp, rhs }))
}

fn parse_bv(s: &mut Scanner, width: u32) -> Result<Predicate> {
    if !(1..=63).contains(&width) {
        return Err(s.err("bitvector width must be between 1 and 63"));
    }
    if s.eat_word("true") {
        return Ok(Predicate::top(AlgebraId::Bv(width)));
    }
    if s.eat_word("false") {
        return Ok(Predicate::bottom(AlgebraId::Bv(width)));
    }
    if !s.eat_word("in") {
        return Err(s.err("expected `in`, `true` or `false`"));
    }
    s.expect("{")?;
    let mut values = Vec::new();
    loop {
        let at = s.pos;
        let v = s.int()?;
        if v < 0 || (v as u64) >= 1u64 << width {
            return Err(Error::Parse {
                pos: at,
                msg: format!("value {v} does not fit in {width} bits"),
            });
        }
        values.push(v as u64);
        if !s.eat(",") {
            break;
        }
    }
    s.expect("}")?;
    Ok(Predicate::from_bv(BvSet::from_values(width, &values)))
}
