//! Text form of set-cardinality formulas.
//!
//! Set variables are uppercase identifiers (`U` is the universe, `empty`
//! the empty set), integer variables are lowercase; `parse_bapa_with`
//! instead resolves set variables against a declared name list of any
//! case. Set union is spelled `+` so that `|` stays free for cardinality
//! bars, intersection is `&`, complement `~`. Relations `=` and `<=`
//! apply to both sorts, with `<=` read as inclusion on sets, `sub` as
//! inclusion only; `K dvd T` is divisibility. Formulas combine with `&&`
//! (or a lone `&` after a complete atom), `||`, `!`. An `&` whose right
//! side can start a set expression binds as intersection, so formula
//! conjuncts starting with a set-sorted atom may need parentheses.

use num::BigInt;

use super::{BapaAtom, BapaFormula, BapaNode, BapaTerm, SetExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    AndAnd,
    OrOr,
    Bang,
    Eq,
    Le,
    Plus,
    Minus,
    Star,
    Amp,
    Tilde,
    LPar,
    RPar,
    CardOpen,
    CardClose,
}

/// A `|` closes a cardinality when one is open, otherwise `||` is
/// disjunction and a lone `|` opens a cardinality. Bars never nest, so
/// one flag suffices.
fn tokenize(input: &str) -> Result<Vec<(usize, Tok)>> {
    let mut toks = Vec::new();
    let mut chars = input.char_indices().peekable();
    let mut in_card = false;
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            _ if c.is_whitespace() => {
                chars.next();
            }
            _ if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        text.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((pos, Tok::Int(text.parse().expect("digits"))));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        text.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((pos, Tok::Ident(text)));
            }
            '&' => {
                chars.next();
                if chars.peek().map(|&(_, d)| d) == Some('&') {
                    chars.next();
                    toks.push((pos, Tok::AndAnd));
                } else {
                    toks.push((pos, Tok::Amp));
                }
            }
            '|' => {
                chars.next();
                if in_card {
                    in_card = false;
                    toks.push((pos, Tok::CardClose));
                } else if chars.peek().map(|&(_, d)| d) == Some('|') {
                    chars.next();
                    toks.push((pos, Tok::OrOr));
                } else {
                    in_card = true;
                    toks.push((pos, Tok::CardOpen));
                }
            }
            '<' => {
                chars.next();
                if chars.peek().map(|&(_, d)| d) == Some('=') {
                    chars.next();
                    toks.push((pos, Tok::Le));
                } else {
                    return Err(Error::Parse { pos, msg: "expected '<='".into() });
                }
            }
            '!' => {
                chars.next();
                toks.push((pos, Tok::Bang));
            }
            '=' => {
                chars.next();
                toks.push((pos, Tok::Eq));
            }
            '+' => {
                chars.next();
                toks.push((pos, Tok::Plus));
            }
            '-' => {
                chars.next();
                toks.push((pos, Tok::Minus));
            }
            '*' => {
                chars.next();
                toks.push((pos, Tok::Star));
            }
            '~' => {
                chars.next();
                toks.push((pos, Tok::Tilde));
            }
            '(' => {
                chars.next();
                toks.push((pos, Tok::LPar));
            }
            ')' => {
                chars.next();
                toks.push((pos, Tok::RPar));
            }
            _ => {
                return Err(Error::Parse {
                    pos,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(toks)
}

#[derive(Debug, Clone)]
enum Operand {
    Set(SetExpr),
    Int(BapaTerm),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
    set_vars: Vec<String>,
    // closed: set_vars is a fixed declaration list, not grown on sight
    closed: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |&(p, _)| p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(_, t)| t.clone());
        self.i += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos(), msg: msg.into() }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    // Can a set expression begin at token t? Decides whether a lone '&'
    // is intersection or formula conjunction.
    fn starts_set(&self, t: Option<&Tok>) -> bool {
        match t {
            Some(Tok::Tilde | Tok::LPar) => true,
            Some(Tok::Ident(name)) => match name.as_str() {
                "empty" | "U" => true,
                "dvd" | "sub" => false,
                _ => {
                    self.set_vars.iter().any(|v| v == name)
                        || (!self.closed
                            && name.chars().next().is_some_and(|c| c.is_ascii_uppercase()))
                }
            },
            _ => false,
        }
    }

    fn formula(&mut self) -> Result<BapaNode> {
        let mut parts = vec![self.and_formula()?];
        while self.eat(&Tok::OrOr) {
            parts.push(self.and_formula()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { BapaNode::Or(parts) })
    }

    fn and_formula(&mut self) -> Result<BapaNode> {
        let mut parts = vec![self.unary_formula()?];
        while self.eat(&Tok::AndAnd) || self.eat(&Tok::Amp) {
            parts.push(self.unary_formula()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { BapaNode::And(parts) })
    }

    fn unary_formula(&mut self) -> Result<BapaNode> {
        if self.eat(&Tok::Bang) {
            return Ok(BapaNode::Not(Box::new(self.unary_formula()?)));
        }
        let save = self.i;
        match self.atom() {
            Ok(a) => Ok(a),
            Err(atom_err) => {
                self.i = save;
                if self.eat(&Tok::LPar) {
                    let f = self.formula()?;
                    self.expect(&Tok::RPar, "')'")?;
                    Ok(f)
                } else {
                    Err(atom_err)
                }
            }
        }
    }

    fn atom(&mut self) -> Result<BapaNode> {
        let left = self.operand()?;
        if self.peek() == Some(&Tok::Ident("dvd".into())) {
            self.i += 1;
            let k = match left {
                Operand::Int(BapaTerm::Const(k)) => k,
                _ => return Err(self.err("divisor must be an integer constant")),
            };
            let t = match self.operand()? {
                Operand::Int(t) => t,
                Operand::Set(_) => return Err(self.err("divisibility applies to integers")),
            };
            return Ok(BapaNode::Atom(BapaAtom::Dvd(k, t)));
        }
        if self.peek() == Some(&Tok::Ident("sub".into())) {
            self.i += 1;
            return match (left, self.operand()?) {
                (Operand::Set(a), Operand::Set(b)) => {
                    Ok(BapaNode::Atom(BapaAtom::Subset(a, b)))
                }
                _ => Err(self.err("'sub' relates sets")),
            };
        }
        let subset = match self.peek() {
            Some(Tok::Eq) => false,
            Some(Tok::Le) => true,
            _ => return Err(self.err("expected '=', '<=', 'sub' or 'dvd'")),
        };
        self.i += 1;
        let right = self.operand()?;
        Ok(BapaNode::Atom(match (left, right) {
            (Operand::Set(a), Operand::Set(b)) => {
                if subset {
                    BapaAtom::Subset(a, b)
                } else {
                    BapaAtom::SetEq(a, b)
                }
            }
            (Operand::Int(a), Operand::Int(b)) => {
                if subset {
                    BapaAtom::Le(a, b)
                } else {
                    BapaAtom::Eq(a, b)
                }
            }
            _ => return Err(self.err("cannot relate a set to an integer")),
        }))
    }

    fn operand(&mut self) -> Result<Operand> {
        let mut acc = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.product()?;
                acc = match (acc, rhs) {
                    (Operand::Set(a), Operand::Set(b)) => Operand::Set(SetExpr::union(a, b)),
                    (Operand::Int(a), Operand::Int(b)) => Operand::Int(int_add(a, b)),
                    _ => return Err(self.err("cannot add a set and an integer")),
                };
            } else if self.eat(&Tok::Minus) {
                let rhs = self.product()?;
                acc = match (acc, rhs) {
                    (Operand::Int(a), Operand::Int(b)) => Operand::Int(int_add(a, negate(b))),
                    _ => return Err(self.err("sets have no subtraction; use '& ~'")),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Operand> {
        let mut acc = self.unary_operand()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.unary_operand()?;
                acc = match (acc, rhs) {
                    (Operand::Int(BapaTerm::Const(j)), Operand::Int(BapaTerm::Const(k))) => {
                        Operand::Int(BapaTerm::Const(j * k))
                    }
                    (Operand::Int(BapaTerm::Const(k)), Operand::Int(t))
                    | (Operand::Int(t), Operand::Int(BapaTerm::Const(k))) => {
                        Operand::Int(BapaTerm::Mul(k, Box::new(t)))
                    }
                    (Operand::Int(_), Operand::Int(_)) => {
                        return Err(self.err("products must have a constant side"))
                    }
                    _ => return Err(self.err("'*' applies to integers")),
                };
            } else if matches!(acc, Operand::Set(_))
                && self.peek() == Some(&Tok::Amp)
                && self.starts_set(self.toks.get(self.i + 1).map(|(_, t)| t))
            {
                self.i += 1;
                let rhs = self.unary_operand()?;
                acc = match (acc, rhs) {
                    (Operand::Set(a), Operand::Set(b)) => Operand::Set(SetExpr::inter(a, b)),
                    _ => return Err(self.err("'&' applies to sets")),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary_operand(&mut self) -> Result<Operand> {
        if self.eat(&Tok::Tilde) {
            return match self.unary_operand()? {
                Operand::Set(b) => Ok(Operand::Set(SetExpr::compl(b))),
                Operand::Int(_) => Err(self.err("'~' applies to sets")),
            };
        }
        if self.eat(&Tok::Minus) {
            return match self.unary_operand()? {
                Operand::Int(t) => Ok(Operand::Int(negate(t))),
                Operand::Set(_) => Err(self.err("'-' applies to integers")),
            };
        }
        self.primary_operand()
    }

    fn primary_operand(&mut self) -> Result<Operand> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(k)) => Ok(Operand::Int(BapaTerm::Const(k))),
            Some(Tok::Ident(name)) => match name.as_str() {
                "empty" => Ok(Operand::Set(SetExpr::Empty)),
                "U" => Ok(Operand::Set(SetExpr::Universe)),
                "dvd" | "sub" => {
                    Err(Error::Parse { pos, msg: format!("'{name}' is reserved") })
                }
                _ => {
                    if let Some(i) = self.set_vars.iter().position(|v| *v == name) {
                        Ok(Operand::Set(SetExpr::Var(i)))
                    } else if name.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                        if self.closed {
                            Err(Error::Parse {
                                pos,
                                msg: format!("undeclared set variable '{name}'"),
                            })
                        } else {
                            self.set_vars.push(name.clone());
                            Ok(Operand::Set(SetExpr::Var(self.set_vars.len() - 1)))
                        }
                    } else {
                        Ok(Operand::Int(BapaTerm::Var(name)))
                    }
                }
            },
            Some(Tok::CardOpen) => {
                let inner = self.operand()?;
                self.expect(&Tok::CardClose, "closing '|'")?;
                match inner {
                    Operand::Set(b) => Ok(Operand::Int(BapaTerm::Card(b))),
                    Operand::Int(_) => {
                        Err(Error::Parse { pos, msg: "cardinality of an integer".into() })
                    }
                }
            }
            Some(Tok::LPar) => {
                let inner = self.operand()?;
                self.expect(&Tok::RPar, "')'")?;
                Ok(inner)
            }
            _ => Err(Error::Parse { pos, msg: "expected an expression".into() }),
        }
    }
}

fn int_add(a: BapaTerm, b: BapaTerm) -> BapaTerm {
    match a {
        BapaTerm::Add(mut xs) => {
            xs.push(b);
            BapaTerm::Add(xs)
        }
        other => BapaTerm::Add(vec![other, b]),
    }
}

fn negate(t: BapaTerm) -> BapaTerm {
    match t {
        BapaTerm::Const(c) => BapaTerm::Const(-c),
        BapaTerm::Mul(k, t) => BapaTerm::Mul(-k, t),
        other => BapaTerm::Mul(BigInt::from(-1), Box::new(other)),
    }
}

fn parse_with(input: &str, set_vars: Vec<String>, closed: bool) -> Result<BapaFormula> {
    let toks = tokenize(input)?;
    let mut p = Parser { toks, i: 0, end: input.len(), set_vars, closed };
    let root = p.formula()?;
    if p.i < p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(BapaFormula { set_vars: p.set_vars, root })
}

pub fn parse_bapa(input: &str) -> Result<BapaFormula> {
    parse_with(input, Vec::new(), false)
}

/// Parses against a fixed set-variable declaration list. Identifiers are
/// matched case-sensitively against `declared`; the result keeps every
/// declared variable, in order, whether or not it occurs in `input`.
pub fn parse_bapa_with(input: &str, declared: &[String]) -> Result<BapaFormula> {
    parse_with(input, declared.to_vec(), true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(a: BapaAtom) -> BapaNode {
        BapaNode::Atom(a)
    }

    #[test]
    fn cardinality_conjunction() {
        let f = parse_bapa("|A| = 2 && |B| = 2 && |A + B| = 3").unwrap();
        assert_eq!(f.set_vars, vec!["A", "B"]);
        let card_eq = |b: SetExpr, c: i64| {
            atom(BapaAtom::Eq(BapaTerm::Card(b), BapaTerm::int(c)))
        };
        assert_eq!(
            f.root,
            BapaNode::And(vec![
                card_eq(SetExpr::Var(0), 2),
                card_eq(SetExpr::Var(1), 2),
                card_eq(SetExpr::union(SetExpr::Var(0), SetExpr::Var(1)), 3),
            ])
        );
    }

    #[test]
    fn set_relations_and_declaration_order() {
        let f = parse_bapa("B <= A && A = C").unwrap();
        assert_eq!(f.set_vars, vec!["B", "A", "C"]);
        assert_eq!(
            f.root,
            BapaNode::And(vec![
                atom(BapaAtom::Subset(SetExpr::Var(0), SetExpr::Var(1))),
                atom(BapaAtom::SetEq(SetExpr::Var(1), SetExpr::Var(2))),
            ])
        );
    }

    #[test]
    fn complement_binds_tighter_than_intersection() {
        let f = parse_bapa("~A & B = empty").unwrap();
        assert_eq!(
            f.root,
            atom(BapaAtom::SetEq(
                SetExpr::inter(SetExpr::compl(SetExpr::Var(0)), SetExpr::Var(1)),
                SetExpr::Empty,
            ))
        );
    }

    #[test]
    fn universe_and_divisibility() {
        let f = parse_bapa("2 dvd |U & ~A|").unwrap();
        assert_eq!(
            f.root,
            atom(BapaAtom::Dvd(
                BigInt::from(2),
                BapaTerm::Card(SetExpr::inter(
                    SetExpr::Universe,
                    SetExpr::compl(SetExpr::Var(0)),
                )),
            ))
        );
    }

    #[test]
    fn integer_arithmetic() {
        let f = parse_bapa("2*x + -1 <= y - 3").unwrap();
        assert_eq!(
            f.root,
            atom(BapaAtom::Le(
                BapaTerm::Add(vec![
                    BapaTerm::Mul(BigInt::from(2), Box::new(BapaTerm::Var("x".into()))),
                    BapaTerm::int(-1),
                ]),
                BapaTerm::Add(vec![BapaTerm::Var("y".into()), BapaTerm::int(-3)]),
            ))
        );
    }

    #[test]
    fn boolean_structure_with_bars() {
        let f = parse_bapa("(|A| = 0 || |B| = 1) && !(x = 0)").unwrap();
        let card_eq = |b: SetExpr, c: i64| {
            atom(BapaAtom::Eq(BapaTerm::Card(b), BapaTerm::int(c)))
        };
        assert_eq!(
            f.root,
            BapaNode::And(vec![
                BapaNode::Or(vec![card_eq(SetExpr::Var(0), 0), card_eq(SetExpr::Var(1), 1)]),
                BapaNode::Not(Box::new(atom(BapaAtom::Eq(
                    BapaTerm::Var("x".into()),
                    BapaTerm::int(0),
                )))),
            ])
        );
    }

    #[test]
    fn parenthesized_term_is_not_a_formula() {
        let f = parse_bapa("(x + 1) = 2").unwrap();
        assert_eq!(
            f.root,
            atom(BapaAtom::Eq(
                BapaTerm::Add(vec![BapaTerm::Var("x".into()), BapaTerm::int(1)]),
                BapaTerm::int(2),
            ))
        );
    }

    #[test]
    fn rejects_ill_sorted_input() {
        assert!(parse_bapa("A = 1").is_err());
        assert!(parse_bapa("x & y = 0").is_err());
        assert!(parse_bapa("x * y = 0").is_err());
        assert!(parse_bapa("|x| = 1").is_err());
        assert!(parse_bapa("A - B = empty").is_err());
        assert!(parse_bapa("x dvd y").is_err());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_bapa("").is_err());
        assert!(parse_bapa("|A = 1").is_err());
        assert!(parse_bapa("(|A| = 1").is_err());
        assert!(parse_bapa("|A| = 1 extra").is_err());
        assert!(parse_bapa("|A| < 1").is_err());
        assert!(parse_bapa("|A| = 1 | x = 2").is_err());
    }

    #[test]
    fn single_amp_conjoins_after_complete_atom() {
        let f = parse_bapa("|A|=3 & A sub B & |B|=2").unwrap();
        assert_eq!(f.set_vars, vec!["A", "B"]);
        assert_eq!(
            f.root,
            BapaNode::And(vec![
                atom(BapaAtom::Eq(BapaTerm::Card(SetExpr::Var(0)), BapaTerm::int(3))),
                atom(BapaAtom::Subset(SetExpr::Var(0), SetExpr::Var(1))),
                atom(BapaAtom::Eq(BapaTerm::Card(SetExpr::Var(1)), BapaTerm::int(2))),
            ])
        );
        let g = parse_bapa("(A = B) & (x = 1)").unwrap();
        assert!(matches!(g.root, BapaNode::And(ref parts) if parts.len() == 2));
    }

    #[test]
    fn amp_before_set_expression_is_intersection() {
        let f = parse_bapa("A & ~B & U = empty & |C| = 0").unwrap();
        assert_eq!(f.set_vars, vec!["A", "B", "C"]);
        let lhs = SetExpr::inter(
            SetExpr::inter(SetExpr::Var(0), SetExpr::compl(SetExpr::Var(1))),
            SetExpr::Universe,
        );
        assert_eq!(
            f.root,
            BapaNode::And(vec![
                atom(BapaAtom::SetEq(lhs, SetExpr::Empty)),
                atom(BapaAtom::Eq(BapaTerm::Card(SetExpr::Var(2)), BapaTerm::int(0))),
            ])
        );
    }

    #[test]
    fn sub_is_reserved() {
        assert!(parse_bapa("sub = 1").is_err());
        assert!(parse_bapa("A sub 1").is_err());
        assert!(parse_bapa("x sub B").is_err());
    }

    #[test]
    fn declared_names_resolve_to_sets() {
        let names = vec!["odd".to_string(), "pos".to_string()];
        let f = parse_bapa_with("|odd & pos| = 2", &names).unwrap();
        assert_eq!(f.set_vars, names);
        assert_eq!(
            f.root,
            atom(BapaAtom::Eq(
                BapaTerm::Card(SetExpr::inter(SetExpr::Var(0), SetExpr::Var(1))),
                BapaTerm::int(2),
            ))
        );

        let g = parse_bapa_with("|pos| = 1", &names).unwrap();
        assert_eq!(g.set_vars, names);
        assert_eq!(
            g.root,
            atom(BapaAtom::Eq(BapaTerm::Card(SetExpr::Var(1)), BapaTerm::int(1)))
        );

        assert!(parse_bapa_with("|Q| = 1", &names).is_err());
        let h = parse_bapa_with("|odd| = n", &names).unwrap();
        assert!(matches!(
            h.root,
            BapaNode::Atom(BapaAtom::Eq(_, BapaTerm::Var(ref v))) if v == "n"
        ));
    }
}
