//! Line-oriented automaton files.
//!
//! ```text
//! # tokens are whitespace-separated, # starts a comment
//! algebra lia              # or: algebra bv 6
//! pred odd "x % 2 == 1"
//! pred pos "x > 0"
//! states q0 q1
//! initial q0
//! accepting q0
//! trans q0 q1 (odd & pos)
//! trans q1 q0 (odd & pos)
//! cardinality "|odd & pos| = 2"
//! ```
//!
//! Directives may appear in any order; errors carry the 1-based line
//! number. Guards name declared predicates and combine them with `&`,
//! `|`, `!` and parentheses, plus the literals `true` and `false`. The
//! optional `cardinality` clause is a set-cardinality formula whose set
//! variables are the declared predicate names, resolved in declaration
//! order.

use std::path::Path;

use crate::algebra::{parse_predicate, AlgebraId, Predicate};
use crate::decide::CardinalityConstraint;
use crate::error::{Error, Result};
use crate::qfbapa::parse_bapa_with;
use crate::sfa::{GeneratorSet, Sfa, Transition};

/// Names that would collide with literals of the guard grammar or the
/// cardinality grammar.
const RESERVED: [&str; 6] = ["true", "false", "U", "empty", "dvd", "sub"];

#[derive(Debug, Clone)]
pub struct SfaFile {
    pub sfa: Sfa,
    pub cardinality: Option<CardinalityConstraint>,
}

pub fn load_sfa_file(path: impl AsRef<Path>) -> Result<SfaFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_sfa_file(&text)
}

pub fn parse_sfa_file(text: &str) -> Result<SfaFile> {
    let mut algebra: Option<(usize, AlgebraId)> = None;
    let mut preds: Vec<(usize, String, String)> = Vec::new();
    let mut states: Option<(usize, Vec<String>)> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut accepting: Vec<(usize, String)> = Vec::new();
    let mut trans: Vec<(usize, String, String, String)> = Vec::new();
    let mut cardinality: Option<(usize, String)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        let mut toks = body.split_whitespace();
        let Some(directive) = toks.next() else { continue };
        let fail = |msg: String| Error::File { line, msg };
        match directive {
            "algebra" => {
                if algebra.is_some() {
                    return Err(fail("duplicate `algebra` directive".into()));
                }
                let id = match (toks.next(), toks.next(), toks.next()) {
                    (Some("lia"), None, _) => AlgebraId::Lia,
                    (Some("bv"), Some(w), None) => {
                        let width: u32 = w
                            .parse()
                            .map_err(|_| fail(format!("bad bitvector width `{w}`")))?;
                        if width == 0 || width > 64 {
                            return Err(fail(format!(
                                "bitvector width {width} out of range 1..=64"
                            )));
                        }
                        AlgebraId::Bv(width)
                    }
                    _ => {
                        return Err(fail(
                            "expected `algebra lia` or `algebra bv WIDTH`".into(),
                        ))
                    }
                };
                algebra = Some((line, id));
            }
            "pred" => {
                let Some(name) = toks.next() else {
                    return Err(fail("`pred` needs a name".into()));
                };
                check_name(name, line)?;
                if RESERVED.contains(&name) {
                    return Err(fail(format!("predicate name `{name}` is reserved")));
                }
                if preds.iter().any(|(_, n, _)| n == name) {
                    return Err(fail(format!("duplicate predicate `{name}`")));
                }
                let expr = quoted(body, line, "pred")?;
                preds.push((line, name.to_string(), expr));
            }
            "states" => {
                if states.is_some() {
                    return Err(fail("duplicate `states` directive".into()));
                }
                let names: Vec<String> = toks.map(str::to_string).collect();
                if names.is_empty() {
                    return Err(fail("`states` needs at least one name".into()));
                }
                for (i, n) in names.iter().enumerate() {
                    check_name(n, line)?;
                    if names[..i].contains(n) {
                        return Err(fail(format!("duplicate state `{n}`")));
                    }
                }
                states = Some((line, names));
            }
            "initial" => {
                if initial.is_some() {
                    return Err(fail("duplicate `initial` directive".into()));
                }
                match (toks.next(), toks.next()) {
                    (Some(q), None) => initial = Some((line, q.to_string())),
                    _ => return Err(fail("`initial` needs exactly one state".into())),
                }
            }
            "accepting" => {
                for q in toks {
                    accepting.push((line, q.to_string()));
                }
            }
            "trans" => {
                let (Some(src), Some(dst)) = (toks.next(), toks.next()) else {
                    return Err(fail("`trans` needs source and target states".into()));
                };
                let guard = body[after_tokens(body, 3)..].trim();
                if guard.is_empty() {
                    return Err(fail("`trans` needs a guard expression".into()));
                }
                trans.push((line, src.to_string(), dst.to_string(), guard.to_string()));
            }
            "cardinality" => {
                if cardinality.is_some() {
                    return Err(fail("duplicate `cardinality` directive".into()));
                }
                cardinality = Some((line, quoted(body, line, "cardinality")?));
            }
            other => return Err(fail(format!("unknown directive `{other}`"))),
        }
    }

    let Some((_, algebra)) = algebra else {
        return Err(Error::File { line: 0, msg: "missing `algebra` directive".into() });
    };
    let Some((_, state_names)) = states else {
        return Err(Error::File { line: 0, msg: "missing `states` directive".into() });
    };
    let Some((initial_line, initial_name)) = initial else {
        return Err(Error::File { line: 0, msg: "missing `initial` directive".into() });
    };

    let mut pred_table: Vec<(String, Predicate)> = Vec::with_capacity(preds.len());
    for (line, name, expr) in preds {
        let p = parse_predicate(&expr, algebra).map_err(|e| Error::File {
            line,
            msg: format!("in predicate `{name}`: {e}"),
        })?;
        pred_table.push((name, p));
    }

    let state_of = |name: &str, line: usize| {
        state_names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::File { line, msg: format!("unknown state `{name}`") })
    };

    let initial_idx = state_of(&initial_name, initial_line)?;
    let mut accepting_idx = Vec::with_capacity(accepting.len());
    for (line, name) in accepting {
        accepting_idx.push(state_of(&name, line)?);
    }

    let mut transitions = Vec::with_capacity(trans.len());
    for (line, src, dst, guard_text) in trans {
        let source = state_of(&src, line)?;
        let target = state_of(&dst, line)?;
        let guard = parse_guard(&guard_text, algebra, &pred_table)
            .map_err(|e| Error::File { line, msg: format!("in guard: {e}") })?;
        transitions.push(Transition { source, guard, target });
    }

    let sfa = Sfa::new(algebra, state_names.len(), initial_idx, accepting_idx, transitions)?;

    let cardinality = match cardinality {
        None => None,
        Some((line, expr)) => {
            let names: Vec<String> =
                pred_table.iter().map(|(n, _)| n.clone()).collect();
            let formula = parse_bapa_with(&expr, &names).map_err(|e| Error::File {
                line,
                msg: format!("in cardinality clause: {e}"),
            })?;
            let gens = GeneratorSet::new(algebra, pred_table)?;
            Some(CardinalityConstraint::with_generators(formula, gens))
        }
    };

    Ok(SfaFile { sfa, cardinality })
}

// byte offset just past the first `n` whitespace-separated tokens
fn after_tokens(s: &str, n: usize) -> usize {
    let bytes = s.as_bytes();
    let mut pos = 0;
    for _ in 0..n {
        while bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            pos += 1;
        }
        while bytes.get(pos).is_some_and(|c| !c.is_ascii_whitespace()) {
            pos += 1;
        }
    }
    pos
}

fn strip_comment(raw: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in raw.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &raw[..i],
            _ => {}
        }
    }
    raw
}

fn check_name(name: &str, line: usize) -> Result<()> {
    let mut chars = name.chars();
    let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    if head_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(())
    } else {
        Err(Error::File { line, msg: format!("invalid name `{name}`") })
    }
}

fn quoted(body: &str, line: usize, what: &str) -> Result<String> {
    let fail = |msg: String| Error::File { line, msg };
    let open = body
        .find('"')
        .ok_or_else(|| fail(format!("`{what}` needs a quoted expression")))?;
    let rest = &body[open + 1..];
    let close = rest
        .find('"')
        .ok_or_else(|| fail("unterminated quoted expression".into()))?;
    if !rest[close + 1..].trim().is_empty() {
        return Err(fail("unexpected input after closing quote".into()));
    }
    Ok(rest[..close].to_string())
}

// ====== guard expressions ======

struct GuardParser<'a> {
    text: &'a [u8],
    pos: usize,
    algebra: AlgebraId,
    preds: &'a [(String, Predicate)],
}

fn parse_guard(
    text: &str,
    algebra: AlgebraId,
    preds: &[(String, Predicate)],
) -> Result<Predicate> {
    let mut p = GuardParser { text: text.as_bytes(), pos: 0, algebra, preds };
    let guard = p.or()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(guard)
}

impl<'a> GuardParser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.text.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Predicate> {
        let mut acc = self.and()?;
        while self.eat(b'|') {
            acc = acc.or(&self.and()?)?;
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Predicate> {
        let mut acc = self.not()?;
        while self.eat(b'&') {
            acc = acc.and(&self.not()?)?;
        }
        Ok(acc)
    }

    fn not(&mut self) -> Result<Predicate> {
        if self.eat(b'!') {
            return Ok(self.not()?.not());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Predicate> {
        if self.eat(b'(') {
            let inner = self.or()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(inner);
        }
        self.skip_ws();
        let start = self.pos;
        while self
            .text
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a predicate name"));
        }
        let name = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii");
        match name {
            "true" => Ok(Predicate::top(self.algebra)),
            "false" => Ok(Predicate::bottom(self.algebra)),
            _ => self
                .preds
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, p)| p.clone())
                .ok_or_else(|| {
                    Error::Parse {
                        pos: start,
                        msg: format!("unknown predicate `{name}`"),
                    }
                }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DomainElement;
    use crate::decide;

    const ODD_POS: &str = r#"
# two states, parity-of-length over odd positives
algebra lia
pred odd "x % 2 == 1"
pred pos "x > 0"
states q0 q1
initial q0
accepting q0
trans q0 q1 (odd & pos)
trans q1 q0 (odd & pos)
"#;

    #[test]
    fn odd_pos_file_round_trips() {
        let file = parse_sfa_file(ODD_POS).unwrap();
        assert!(file.cardinality.is_none());
        let m = &file.sfa;
        assert_eq!(m.algebra(), AlgebraId::Lia);
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.initial(), 0);
        assert_eq!(m.accepting_states(), vec![0]);
        assert_eq!(m.transitions().len(), 2);
        assert!(m.accepts(&[]).unwrap());
        assert!(!m.accepts(&[DomainElement::Int(3)]).unwrap());
        assert!(m.accepts(&[DomainElement::Int(3), DomainElement::Int(7)]).unwrap());
    }

    #[test]
    fn cardinality_clause_uses_declared_names() {
        let text = format!("{ODD_POS}\ncardinality \"|odd & pos| = 2\"\n");
        let file = parse_sfa_file(&text).unwrap();
        let constraint = file.cardinality.unwrap();
        assert_eq!(constraint.formula.set_vars, vec!["odd", "pos"]);
        let gens = constraint.generators.as_ref().unwrap();
        assert_eq!(gens.len(), 2);
        assert_eq!(gens.name(0), "odd");

        let result = decide::check_sat_card(&file.sfa, &constraint).unwrap();
        let witness = result.witness.unwrap();
        assert_eq!(witness, vec![DomainElement::Int(1), DomainElement::Int(1)]);
    }

    #[test]
    fn bitvector_algebra_and_guard_literals() {
        let text = r#"
algebra bv 6
pred hit "in {6, 14, 22, 38, 54}"
states a b
initial a
accepting b
trans a b (hit)
trans b b (true)
trans a a (!hit | false)
"#;
        let file = parse_sfa_file(text).unwrap();
        let m = &file.sfa;
        assert_eq!(m.algebra(), AlgebraId::Bv(6));
        assert!(m.accepts(&[DomainElement::Bv(6), DomainElement::Bv(0)]).unwrap());
        assert!(!m.accepts(&[DomainElement::Bv(0)]).unwrap());
    }

    #[test]
    fn directives_may_arrive_in_any_order() {
        let text = r#"
trans q0 q0 (odd)
accepting q0
initial q0
states q0
pred odd "x % 2 == 1"
algebra lia
"#;
        let file = parse_sfa_file(text).unwrap();
        assert!(file.sfa.accepts(&[DomainElement::Int(3)]).unwrap());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "algebra lia # inline\n\n   \npred odd \"x % 2 == 1\" # note\nstates q0\ninitial q0\naccepting q0\ntrans q0 q0 odd # loop\n";
        let file = parse_sfa_file(text).unwrap();
        assert_eq!(file.sfa.transitions().len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases: &[(&str, usize)] = &[
            ("algebra lia\nstates q0\ninitial q0\ntrans q0 q1 true", 4),
            ("algebra lia\npred odd \"x % 2 ==\"\nstates q0\ninitial q0", 2),
            ("algebra lia\nstates q0\ninitial q0\nbogus x", 4),
            ("algebra lia\npred true \"x > 0\"\nstates q0\ninitial q0", 2),
            ("algebra lia\npred sub \"x > 0\"\nstates q0\ninitial q0", 2),
            ("algebra lia\nstates q0 q0\ninitial q0", 2),
            ("algebra bv 0\nstates q0\ninitial q0", 1),
            ("algebra lia\nstates q0\ninitial q0\ntrans q0 q0 (odd)", 4),
            ("algebra lia\nstates q0\ninitial q0\ncardinality \"|A| = 1\"", 4),
        ];
        for (text, want) in cases {
            match parse_sfa_file(text) {
                Err(Error::File { line, .. }) => {
                    assert_eq!(line, *want, "input: {text:?}")
                }
                other => panic!("expected a line error for {text:?}, got {other:?}"),
            }
        }
        assert!(matches!(
            parse_sfa_file("states q0\ninitial q0"),
            Err(Error::File { line: 0, .. })
        ));
    }

    #[test]
    fn load_reports_missing_files() {
        assert!(matches!(
            load_sfa_file("/nonexistent/x.sfa"),
            Err(Error::Io(_))
        ));
    }
}
