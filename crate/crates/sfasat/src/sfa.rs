//! Symbolic finite automata and their propositional skeletons.
//!
//! An `Sfa` has transitions guarded by algebra predicates. Satisfiability
//! questions about its language are reduced to a plain `TableAutomaton`
//! whose alphabet is the finite set of distinct guard shapes ("letters"),
//! each a propositional formula over a fixed ordered list of generator
//! predicates. A word maps to its "table": the sequence of minterms its
//! elements induce over the generators.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{AlgebraId, DomainElement, Predicate};
use crate::error::{Error, Result};

// ====== automata ======

#[derive(Debug, Clone)]
pub struct Transition {
    pub source: usize,
    pub guard: Predicate,
    pub target: usize,
}

/// invariant: initial/targets/sources < num_states, guards share the algebra,
/// transitions deduplicated by (source, guard, target)
#[derive(Debug, Clone)]
pub struct Sfa {
    algebra: AlgebraId,
    num_states: usize,
    initial: usize,
    accepting: Vec<bool>,
    transitions: Vec<Transition>,
}

impl Sfa {
    pub fn new(
        algebra: AlgebraId,
        num_states: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        transitions: Vec<Transition>,
    ) -> Result<Sfa> {
        if num_states == 0 {
            return Err(Error::InvalidAutomaton("need at least one state".into()));
        }
        if initial >= num_states {
            return Err(Error::InvalidAutomaton(format!(
                "initial state {initial} out of range"
            )));
        }
        let mut acc = vec![false; num_states];
        for q in accepting {
            if q >= num_states {
                return Err(Error::InvalidAutomaton(format!(
                    "accepting state {q} out of range"
                )));
            }
            acc[q] = true;
        }
        let mut seen: Vec<&Transition> = Vec::new();
        let mut kept = Vec::with_capacity(transitions.len());
        for t in &transitions {
            if t.source >= num_states || t.target >= num_states {
                return Err(Error::InvalidAutomaton(format!(
                    "transition {} -> {} out of range",
                    t.source, t.target
                )));
            }
            if t.guard.algebra() != algebra {
                return Err(Error::AlgebraMismatch(format!(
                    "guard `{}` uses algebra `{}`, automaton is over `{}`",
                    t.guard,
                    t.guard.algebra(),
                    algebra
                )));
            }
            if !seen
                .iter()
                .any(|s| s.source == t.source && s.target == t.target && s.guard == t.guard)
            {
                seen.push(t);
                kept.push(t.clone());
            }
        }
        Ok(Sfa { algebra, num_states, initial, accepting: acc, transitions: kept })
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.num_states).filter(|&q| self.accepting[q]).collect()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Word membership by direct subset simulation. The empty word is
    /// accepted exactly when the initial state is accepting.
    pub fn accepts(&self, word: &[DomainElement]) -> Result<bool> {
        let mut cur = vec![false; self.num_states];
        cur[self.initial] = true;
        for element in word {
            let mut next = vec![false; self.num_states];
            let mut any = false;
            for t in &self.transitions {
                if cur[t.source] && !next[t.target] && t.guard.evaluate(element)? {
                    next[t.target] = true;
                    any = true;
                }
            }
            if !any {
                return Ok(false);
            }
            cur = next;
        }
        Ok(cur.iter().zip(&self.accepting).any(|(c, a)| *c && *a))
    }

    /// Emptiness by structure alone: drop transitions with unsatisfiable
    /// guards, then ask whether an accepting state is graph-reachable from
    /// the initial state (the empty word counts when it is accepting).
    pub fn prune_and_reach(&self) -> bool {
        if self.accepting[self.initial] {
            return true;
        }
        let mut sat_memo: HashMap<&Predicate, bool> = HashMap::new();
        let mut live: Vec<Vec<usize>> = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            let sat = *sat_memo
                .entry(&t.guard)
                .or_insert_with(|| t.guard.is_satisfiable().is_some());
            if sat {
                live[t.source].push(t.target);
            }
        }
        let mut seen = vec![false; self.num_states];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            if self.accepting[q] {
                return true;
            }
            for &next in &live[q] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        false
    }
}

// ====== generators ======

/// Ordered, named list of generator predicates. Every guard of the owning
/// automaton must be a Boolean combination of these.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    algebra: AlgebraId,
    entries: Vec<(String, Predicate)>,
}

impl GeneratorSet {
    pub fn new(algebra: AlgebraId, entries: Vec<(String, Predicate)>) -> Result<GeneratorSet> {
        let mut names: Vec<&str> = Vec::new();
        for (name, p) in &entries {
            if p.algebra() != algebra {
                return Err(Error::AlgebraMismatch(format!(
                    "generator `{name}` uses algebra `{}`",
                    p.algebra()
                )));
            }
            if names.contains(&name.as_str()) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate generator name `{name}`"
                )));
            }
            names.push(name);
        }
        Ok(GeneratorSet { algebra, entries })
    }

    /// Distinct guard atoms of `sfa` in order of first occurrence
    /// (transition order, preorder within each guard). Names are the
    /// printed atom text, suffixed on the rare collision.
    pub fn extract(sfa: &Sfa) -> GeneratorSet {
        let mut entries: Vec<(String, Predicate)> = Vec::new();
        for t in sfa.transitions() {
            for atom in t.guard.atoms() {
                if entries.iter().any(|(_, p)| *p == atom) {
                    continue;
                }
                let base = atom.to_string();
                let mut name = base.clone();
                let mut n = 1;
                while entries.iter().any(|(existing, _)| *existing == name) {
                    n += 1;
                    name = format!("{base}#{n}");
                }
                entries.push((name, atom));
            }
        }
        GeneratorSet { algebra: sfa.algebra(), entries }
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    pub fn predicate(&self, i: usize) -> &Predicate {
        &self.entries[i].1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Predicate)> {
        self.entries.iter().map(|(n, p)| (n.as_str(), p))
    }

    /// The minterm of a single element: one bit per generator.
    pub fn minterm_of(&self, element: &DomainElement) -> Result<Minterm> {
        let mut bits = Vec::with_capacity(self.entries.len());
        for (_, p) in &self.entries {
            bits.push(p.evaluate(element)?);
        }
        Ok(Minterm(bits))
    }

    /// The conjunction selecting exactly the region `m`: generator `i`
    /// appears positively where `m` has a 1 bit and negated elsewhere.
    pub fn minterm_predicate(&self, m: &Minterm) -> Result<Predicate> {
        if m.len() != self.entries.len() {
            return Err(Error::LengthMismatch { got: m.len(), want: self.entries.len() });
        }
        let mut acc = Predicate::top(self.algebra);
        for (i, (_, p)) in self.entries.iter().enumerate() {
            let lit = if m.bit(i) { p.clone() } else { p.not() };
            acc = acc.and(&lit)?;
        }
        Ok(acc)
    }

    /// Minterm sequence of a word.
    pub fn table_of(&self, word: &[DomainElement]) -> Result<Table> {
        word.iter().map(|d| self.minterm_of(d)).collect::<Result<Vec<_>>>().map(Table)
    }
}

// ====== minterms and tables ======

/// Bit pattern over the generators; bit `i` answers "does generator `i`
/// hold". Lexicographic order of the bitstring equals numeric order of
/// `index()` (bit 0 is the most significant position).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Minterm(Vec<bool>);

impl Minterm {
    pub fn new(bits: Vec<bool>) -> Minterm {
        Minterm(bits)
    }

    pub fn from_index(len: usize, index: usize) -> Minterm {
        assert!(len < usize::BITS as usize && index < (1 << len));
        Minterm((0..len).map(|i| index >> (len - 1 - i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, b| acc << 1 | usize::from(*b))
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Display for Minterm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", u8::from(*b))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table(pub Vec<Minterm>);

impl Table {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// ====== propositional letters ======

/// Propositional formula over generator variables `S1..Sk` (`Var(0)` is `S1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropFormula {
    True,
    False,
    Var(usize),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
}

impl PropFormula {
    pub fn eval_at(&self, m: &Minterm) -> bool {
        match self {
            PropFormula::True => true,
            PropFormula::False => false,
            PropFormula::Var(i) => m.bit(*i),
            PropFormula::Not(a) => !a.eval_at(m),
            PropFormula::And(a, b) => a.eval_at(m) && b.eval_at(m),
            PropFormula::Or(a, b) => a.eval_at(m) || b.eval_at(m),
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(p: &PropFormula, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match p {
                PropFormula::True => write!(f, "true"),
                PropFormula::False => write!(f, "false"),
                PropFormula::Var(i) => write!(f, "S{}", i + 1),
                PropFormula::Not(a) => {
                    write!(f, "!")?;
                    go(a, 2, f)
                }
                PropFormula::And(a, b) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(a, 1, f)?;
                    write!(f, " & ")?;
                    go(b, 1, f)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                PropFormula::Or(a, b) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go(a, 0, f)?;
                    write!(f, " | ")?;
                    go(b, 0, f)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

// ====== table automata ======

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableTransition {
    pub source: usize,
    pub letter: usize,
    pub target: usize,
}

/// The propositional skeleton of an `Sfa`: same graph, guards replaced by
/// indices into `letters`. Transition `i` corresponds to transition `i` of
/// the source automaton.
#[derive(Debug, Clone)]
pub struct TableAutomaton {
    pub num_states: usize,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub transitions: Vec<TableTransition>,
    pub letters: Vec<PropFormula>,
}

impl TableAutomaton {
    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.num_states).filter(|&q| self.accepting[q]).collect()
    }

    /// Runs the table word through the skeleton: a transition is enabled on
    /// a minterm exactly when its letter evaluates to true there.
    pub fn accepts_table(&self, table: &Table) -> bool {
        let mut cur = vec![false; self.num_states];
        cur[self.initial] = true;
        for m in &table.0 {
            let mut next = vec![false; self.num_states];
            let mut any = false;
            for t in &self.transitions {
                if cur[t.source] && !next[t.target] && self.letters[t.letter].eval_at(m) {
                    next[t.target] = true;
                    any = true;
                }
            }
            if !any {
                return false;
            }
            cur = next;
        }
        cur.iter().zip(&self.accepting).any(|(c, a)| *c && *a)
    }
}

/// Replaces every guard by a propositional formula over extracted
/// generators and deduplicates the resulting letters syntactically.
pub fn propositionalize(sfa: &Sfa) -> (GeneratorSet, TableAutomaton) {
    let gens = GeneratorSet::extract(sfa);
    let ta = propositionalize_with(sfa, &gens).expect("extracted generators cover every guard");
    (gens, ta)
}

/// Same, over a caller-supplied generator set. Guard subtrees are matched
/// against whole generator bodies first, then decomposed; an atom matching
/// no generator is an error.
pub fn propositionalize_with(sfa: &Sfa, gens: &GeneratorSet) -> Result<TableAutomaton> {
    let mut letters: Vec<PropFormula> = Vec::new();
    let mut transitions = Vec::with_capacity(sfa.transitions().len());
    for t in sfa.transitions() {
        let prop = prop_of(&t.guard, gens)?;
        let letter = match letters.iter().position(|l| *l == prop) {
            Some(i) => i,
            None => {
                letters.push(prop);
                letters.len() - 1
            }
        };
        transitions.push(TableTransition { source: t.source, letter, target: t.target });
    }
    Ok(TableAutomaton {
        num_states: sfa.num_states(),
        initial: sfa.initial(),
        accepting: (0..sfa.num_states()).map(|q| sfa.is_accepting(q)).collect(),
        transitions,
        letters,
    })
}

fn prop_of(guard: &Predicate, gens: &GeneratorSet) -> Result<PropFormula> {
    use crate::algebra::Node;
    fn go(node: &Node, algebra: AlgebraId, gens: &GeneratorSet) -> Result<PropFormula> {
        for (i, (_, p)) in gens.entries.iter().enumerate() {
            if p.node().as_ref() == node {
                return Ok(PropFormula::Var(i));
            }
        }
        match node {
            Node::True => Ok(PropFormula::True),
            Node::False => Ok(PropFormula::False),
            Node::Not(a) => Ok(PropFormula::Not(Box::new(go(a, algebra, gens)?))),
            Node::And(a, b) => Ok(PropFormula::And(
                Box::new(go(a, algebra, gens)?),
                Box::new(go(b, algebra, gens)?),
            )),
            Node::Or(a, b) => Ok(PropFormula::Or(
                Box::new(go(a, algebra, gens)?),
                Box::new(go(b, algebra, gens)?),
            )),
            Node::Lia(_) | Node::Bv(_) => {
                let shown = Predicate::from_node(algebra, std::sync::Arc::new(node.clone()));
                Err(Error::UnmatchedAtom(shown.to_string()))
            }
        }
    }
    go(guard.node(), guard.algebra(), gens)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::parse_predicate;

    /// Two-state loop accepting even-length words of positive odd numbers.
    pub(crate) fn even_odd_pos() -> Sfa {
        let guard = parse_predicate("x % 2 == 1 && x > 0", AlgebraId::Lia).unwrap();
        Sfa::new(
            AlgebraId::Lia,
            2,
            0,
            [0],
            vec![
                Transition { source: 0, guard: guard.clone(), target: 1 },
                Transition { source: 1, guard, target: 0 },
            ],
        )
        .unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<DomainElement> {
        xs.iter().map(|&x| DomainElement::Int(x)).collect()
    }

    #[test]
    fn acceptance_on_the_odd_pos_loop() {
        let m = even_odd_pos();
        assert!(m.accepts(&ints(&[])).unwrap());
        assert!(m.accepts(&ints(&[1, 3])).unwrap());
        assert!(m.accepts(&ints(&[7, 7, 9, 1])).unwrap());
        assert!(!m.accepts(&ints(&[1])).unwrap());
        assert!(!m.accepts(&ints(&[2, 3])).unwrap());
        assert!(!m.accepts(&ints(&[1, -3])).unwrap());
    }

    #[test]
    fn generator_extraction_orders_by_first_occurrence() {
        let m = even_odd_pos();
        let gens = GeneratorSet::extract(&m);
        assert_eq!(gens.len(), 2);
        assert_eq!(gens.name(0), "x % 2 == 1");
        assert_eq!(gens.name(1), "x > 0");
    }

    #[test]
    fn single_true_guard_has_no_generators() {
        let m = Sfa::new(
            AlgebraId::Lia,
            1,
            0,
            [0],
            vec![Transition { source: 0, guard: Predicate::top(AlgebraId::Lia), target: 0 }],
        )
        .unwrap();
        let (gens, ta) = propositionalize(&m);
        assert_eq!(gens.len(), 0);
        assert_eq!(ta.letters, vec![PropFormula::True]);
    }

    #[test]
    fn letters_deduplicate_syntactically() {
        let m = even_odd_pos();
        let (gens, ta) = propositionalize(&m);
        assert_eq!(ta.letters.len(), 1);
        assert_eq!(ta.letters[0].to_string(), "S1 & S2");
        assert_eq!(gens.len(), 2);
        assert_eq!(ta.transitions.len(), 2);
        assert_eq!(ta.transitions[0].letter, 0);
        assert_eq!(ta.transitions[1].letter, 0);
    }

    #[test]
    fn negated_guard_produces_distinct_letter() {
        let a = parse_predicate("x > 0", AlgebraId::Lia).unwrap();
        let m = Sfa::new(
            AlgebraId::Lia,
            2,
            0,
            [1],
            vec![
                Transition { source: 0, guard: a.clone(), target: 1 },
                Transition { source: 1, guard: a.not(), target: 0 },
            ],
        )
        .unwrap();
        let (gens, ta) = propositionalize(&m);
        assert_eq!(gens.len(), 1);
        assert_eq!(ta.letters.len(), 2);
        assert_eq!(ta.letters[0], PropFormula::Var(0));
        assert_eq!(ta.letters[1], PropFormula::Not(Box::new(PropFormula::Var(0))));
    }

    #[test]
    fn minterm_round_trip_and_order() {
        let m = Minterm::from_index(4, 0b1011);
        assert_eq!(m.to_string(), "1011");
        assert_eq!(m.index(), 0b1011);
        assert!(Minterm::from_index(2, 1) < Minterm::from_index(2, 2));
    }

    #[test]
    fn minterm_of_and_table_of() {
        let m = even_odd_pos();
        let gens = GeneratorSet::extract(&m);
        assert_eq!(gens.minterm_of(&DomainElement::Int(3)).unwrap().to_string(), "11");
        assert_eq!(gens.minterm_of(&DomainElement::Int(-3)).unwrap().to_string(), "10");
        assert_eq!(gens.minterm_of(&DomainElement::Int(2)).unwrap().to_string(), "01");
        let table = gens.table_of(&ints(&[1, 3])).unwrap();
        assert_eq!(table.0.len(), 2);
        assert!(table.0.iter().all(|m| m.to_string() == "11"));
    }

    #[test]
    fn minterm_predicate_selects_region() {
        let m = even_odd_pos();
        let gens = GeneratorSet::extract(&m);
        let p = gens.minterm_predicate(&Minterm::from_index(2, 0b11)).unwrap();
        assert_eq!(p.to_string(), "x % 2 == 1 && x > 0");
        let q = gens.minterm_predicate(&Minterm::from_index(2, 0b01)).unwrap();
        assert!(q.evaluate(&DomainElement::Int(2)).unwrap());
        assert!(!q.evaluate(&DomainElement::Int(3)).unwrap());
        // empty generator list: the lone minterm covers the whole domain
        let empty = GeneratorSet::new(AlgebraId::Lia, vec![]).unwrap();
        assert!(empty.minterm_predicate(&Minterm::new(vec![])).unwrap().is_top());
        assert!(matches!(
            gens.minterm_predicate(&Minterm::new(vec![true])),
            Err(Error::LengthMismatch { got: 1, want: 2 })
        ));
    }

    #[test]
    fn word_and_table_acceptance_agree() {
        let m = even_odd_pos();
        let (gens, ta) = propositionalize(&m);
        let words: &[&[i64]] = &[&[], &[1], &[1, 3], &[2, 3], &[5, 5, 5, 5], &[-1, 1]];
        for w in words {
            let w = ints(w);
            let table = gens.table_of(&w).unwrap();
            assert_eq!(m.accepts(&w).unwrap(), ta.accepts_table(&table), "{w:?}");
        }
    }

    #[test]
    fn prune_and_reach_examples() {
        // contradictory guard cuts the only path
        let dead = parse_predicate("x < 0 && x > 0", AlgebraId::Lia).unwrap();
        let m = Sfa::new(
            AlgebraId::Lia,
            2,
            0,
            [1],
            vec![Transition { source: 0, guard: dead, target: 1 }],
        )
        .unwrap();
        assert!(!m.prune_and_reach());

        // empty word: initial state accepting
        assert!(even_odd_pos().prune_and_reach());

        // unreachable accepting state
        let live = parse_predicate("x > 0", AlgebraId::Lia).unwrap();
        let m = Sfa::new(
            AlgebraId::Lia,
            3,
            0,
            [2],
            vec![Transition { source: 1, guard: live, target: 2 }],
        )
        .unwrap();
        assert!(!m.prune_and_reach());
    }

    #[test]
    fn duplicate_transitions_collapse() {
        let g = parse_predicate("x > 0", AlgebraId::Lia).unwrap();
        let m = Sfa::new(
            AlgebraId::Lia,
            2,
            0,
            [1],
            vec![
                Transition { source: 0, guard: g.clone(), target: 1 },
                Transition { source: 0, guard: g, target: 1 },
            ],
        )
        .unwrap();
        assert_eq!(m.transitions().len(), 1);
    }
}
