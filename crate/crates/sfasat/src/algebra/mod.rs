//! Predicate algebras over which automata are defined.
//!
//! A predicate denotes a set of domain elements and is closed under `and`,
//! `or`, `not` with `top`/`bottom` as units; non-emptiness is decidable and
//! produces a witness element. Two algebras are built in:
//!
//! * integer linear arithmetic over one variable `x` (atoms
//!   `coeff*x + offset CMP rhs` and `x % m == r`), domain = all `i64`;
//! * fixed-width bitvectors, predicates kept as reduced ordered decision
//!   diagrams, domain = unsigned values below `2^width`.
//!
//! Predicates keep their Boolean structure as a tree over atoms. For
//! bitvectors every atom is itself a whole diagram; the tree is only
//! collapsed into a single diagram when satisfiability is decided. Keeping
//! the structure lets later stages recover how a guard was assembled from
//! named building blocks.

mod bdd;
mod lia;
mod parse;

pub use bdd::BvSet;
pub use lia::{CmpOp, LiaAtom, LinearAtom, ModAtom};
pub use parse::parse_predicate;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgebraId {
    Lia,
    Bv(u32),
}

impl fmt::Display for AlgebraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraId::Lia => write!(f, "lia"),
            AlgebraId::Bv(w) => write!(f, "bv {w}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainElement {
    Int(i64),
    Bv(u64),
}

impl fmt::Display for DomainElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainElement::Int(v) => write!(f, "{v}"),
            DomainElement::Bv(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
    Not,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    True,
    False,
    Lia(LiaAtom),
    Bv(BvSet),
    Not(Arc<Node>),
    And(Arc<Node>, Arc<Node>),
    Or(Arc<Node>, Arc<Node>),
}

/// A predicate of one algebra. Immutable; clones share structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    algebra: AlgebraId,
    node: Arc<Node>,
}

impl Predicate {
    pub fn top(algebra: AlgebraId) -> Predicate {
        Predicate { algebra, node: Arc::new(Node::True) }
    }

    pub fn bottom(algebra: AlgebraId) -> Predicate {
        Predicate { algebra, node: Arc::new(Node::False) }
    }

    pub fn from_linear(atom: LinearAtom) -> Predicate {
        Predicate { algebra: AlgebraId::Lia, node: Arc::new(Node::Lia(LiaAtom::Linear(atom))) }
    }

    pub fn from_mod(atom: ModAtom) -> Predicate {
        Predicate { algebra: AlgebraId::Lia, node: Arc::new(Node::Lia(LiaAtom::Mod(atom))) }
    }

    pub fn from_bv(set: BvSet) -> Predicate {
        let algebra = AlgebraId::Bv(set.width());
        let node = if set.is_empty() {
            Node::False
        } else if set.is_full() {
            Node::True
        } else {
            Node::Bv(set)
        };
        Predicate { algebra, node: Arc::new(node) }
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn is_top(&self) -> bool {
        matches!(self.node.as_ref(), Node::True)
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self.node.as_ref(), Node::False)
    }

    fn check_same_algebra(&self, other: &Predicate) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch(format!(
                "cannot combine `{}` predicate with `{}` predicate",
                self.algebra, other.algebra
            )));
        }
        Ok(())
    }

    /// Conjunction. Constant operands fold away; other structure is kept.
    pub fn and(&self, other: &Predicate) -> Result<Predicate> {
        self.check_same_algebra(other)?;
        let node = match (self.node.as_ref(), other.node.as_ref()) {
            (Node::False, _) | (_, Node::False) => Arc::new(Node::False),
            (Node::True, _) => other.node.clone(),
            (_, Node::True) => self.node.clone(),
            _ => Arc::new(Node::And(self.node.clone(), other.node.clone())),
        };
        Ok(Predicate { algebra: self.algebra, node })
    }

    /// Disjunction, with the dual constant folding.
    pub fn or(&self, other: &Predicate) -> Result<Predicate> {
        self.check_same_algebra(other)?;
        let node = match (self.node.as_ref(), other.node.as_ref()) {
            (Node::True, _) | (_, Node::True) => Arc::new(Node::True),
            (Node::False, _) => other.node.clone(),
            (_, Node::False) => self.node.clone(),
            _ => Arc::new(Node::Or(self.node.clone(), other.node.clone())),
        };
        Ok(Predicate { algebra: self.algebra, node })
    }

    pub fn not(&self) -> Predicate {
        let node = match self.node.as_ref() {
            Node::True => Arc::new(Node::False),
            Node::False => Arc::new(Node::True),
            Node::Not(inner) => inner.clone(),
            _ => Arc::new(Node::Not(self.node.clone())),
        };
        Predicate { algebra: self.algebra, node }
    }

    /// Single dispatch point over the three connectives. `Not` takes no
    /// second operand; `And`/`Or` require one.
    pub fn combine(op: BoolOp, p: &Predicate, q: Option<&Predicate>) -> Result<Predicate> {
        match (op, q) {
            (BoolOp::And, Some(q)) => p.and(q),
            (BoolOp::Or, Some(q)) => p.or(q),
            (BoolOp::Not, None) => Ok(p.not()),
            (BoolOp::Not, Some(_)) => panic!("combine: Not takes one operand"),
            (_, None) => panic!("combine: binary operator needs two operands"),
        }
    }

    /// Membership test of `element` in the denoted set.
    pub fn evaluate(&self, element: &DomainElement) -> Result<bool> {
        match (self.algebra, element) {
            (AlgebraId::Lia, DomainElement::Int(x)) => Ok(eval_node(&self.node, &Value::Int(*x))),
            (AlgebraId::Bv(w), DomainElement::Bv(v)) => {
                if *v >= 1u64 << w {
                    return Err(Error::AlgebraMismatch(format!(
                        "value {v} does not fit in {w} bits"
                    )));
                }
                Ok(eval_node(&self.node, &Value::Bv(*v)))
            }
            _ => Err(Error::AlgebraMismatch(format!(
                "element {element} is not in the domain of a `{}` predicate",
                self.algebra
            ))),
        }
    }

    /// Some element of the denoted set, or None when it is empty. Decidable
    /// for both algebras; the returned element always evaluates to true.
    pub fn is_satisfiable(&self) -> Option<DomainElement> {
        match self.algebra {
            AlgebraId::Lia => lia::satisfiable(&self.node).map(DomainElement::Int),
            AlgebraId::Bv(w) => to_bvset(&self.node, w).min_value().map(DomainElement::Bv),
        }
    }

    /// Atom subpredicates in preorder, with repetitions.
    pub fn atoms(&self) -> Vec<Predicate> {
        let mut out = Vec::new();
        collect_atoms(&self.node, self.algebra, &mut out);
        out
    }

    pub(crate) fn node(&self) -> &Arc<Node> {
        &self.node
    }

    pub(crate) fn from_node(algebra: AlgebraId, node: Arc<Node>) -> Predicate {
        Predicate { algebra, node }
    }
}

enum Value {
    Int(i64),
    Bv(u64),
}

fn eval_node(node: &Node, v: &Value) -> bool {
    match node {
        Node::True => true,
        Node::False => false,
        Node::Lia(atom) => match v {
            Value::Int(x) => atom.eval(*x),
            Value::Bv(_) => unreachable!(),
        },
        Node::Bv(set) => match v {
            Value::Bv(x) => set.contains(*x),
            Value::Int(_) => unreachable!(),
        },
        Node::Not(a) => !eval_node(a, v),
        Node::And(a, b) => eval_node(a, v) && eval_node(b, v),
        Node::Or(a, b) => eval_node(a, v) || eval_node(b, v),
    }
}

fn to_bvset(node: &Node, width: u32) -> BvSet {
    match node {
        Node::True => BvSet::full(width),
        Node::False => BvSet::empty(width),
        Node::Bv(set) => set.clone(),
        Node::Lia(_) => unreachable!("integer atom in bitvector predicate"),
        Node::Not(a) => to_bvset(a, width).not(),
        Node::And(a, b) => to_bvset(a, width).and(&to_bvset(b, width)),
        Node::Or(a, b) => to_bvset(a, width).or(&to_bvset(b, width)),
    }
}

fn collect_atoms(node: &Node, algebra: AlgebraId, out: &mut Vec<Predicate>) {
    match node {
        Node::True | Node::False => {}
        Node::Lia(_) | Node::Bv(_) => {
            out.push(Predicate { algebra, node: Arc::new(node.clone()) })
        }
        Node::Not(a) => collect_atoms(a, algebra, out),
        Node::And(a, b) | Node::Or(a, b) => {
            collect_atoms(a, algebra, out);
            collect_atoms(b, algebra, out);
        }
    }
}

// precedence: Or < And < Not < atom
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.node, 0, f)
    }
}

fn fmt_node(node: &Node, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::True => write!(f, "true"),
        Node::False => write!(f, "false"),
        Node::Lia(atom) => write!(f, "{atom}"),
        Node::Bv(set) => match set.values(4096) {
            Some(vals) => {
                write!(f, "in {{")?;
                for (i, v) in vals.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            None => write!(f, "in {{..{} values..}}", set.count_values()),
        },
        Node::Not(a) => {
            write!(f, "!")?;
            fmt_node(a, 2, f)
        }
        Node::And(a, b) => {
            let parens = prec > 1;
            if parens {
                write!(f, "(")?;
            }
            fmt_node(a, 1, f)?;
            write!(f, " && ")?;
            fmt_node(b, 1, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Node::Or(a, b) => {
            let parens = prec > 0;
            if parens {
                write!(f, "(")?;
            }
            fmt_node(a, 0, f)?;
            write!(f, " || ")?;
            fmt_node(b, 0, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odd() -> Predicate {
        Predicate::from_mod(ModAtom::new(2, 1))
    }

    fn pos() -> Predicate {
        Predicate::from_linear(LinearAtom { coeff: 1, offset: 0, cmp: CmpOp::Gt, rhs: 0 })
    }

    #[test]
    fn evaluate_respects_structure() {
        let p = odd().and(&pos()).unwrap();
        assert!(p.evaluate(&DomainElement::Int(3)).unwrap());
        assert!(!p.evaluate(&DomainElement::Int(-3)).unwrap());
        assert!(!p.evaluate(&DomainElement::Int(4)).unwrap());
    }

    #[test]
    fn top_is_identity_for_and() {
        let p = odd();
        let q = Predicate::top(AlgebraId::Lia).and(&p).unwrap();
        for x in -5..=5 {
            let d = DomainElement::Int(x);
            assert_eq!(p.evaluate(&d).unwrap(), q.evaluate(&d).unwrap());
        }
    }

    #[test]
    fn not_top_is_bottom() {
        let p = Predicate::top(AlgebraId::Lia).not();
        assert!(p.is_bottom());
        assert_eq!(p.is_satisfiable(), None);
    }

    #[test]
    fn algebra_mismatch_is_rejected() {
        let p = odd();
        let q = Predicate::from_bv(BvSet::from_values(4, &[1]));
        assert!(matches!(p.and(&q), Err(Error::AlgebraMismatch(_))));
        assert!(matches!(
            p.evaluate(&DomainElement::Bv(1)),
            Err(Error::AlgebraMismatch(_))
        ));
        // bv value out of width
        assert!(q.evaluate(&DomainElement::Bv(16)).is_err());
    }

    #[test]
    fn witness_satisfies_predicate() {
        let p = odd().and(&pos()).unwrap();
        let w = p.is_satisfiable().unwrap();
        assert_eq!(w, DomainElement::Int(1));
        assert!(p.evaluate(&w).unwrap());

        let contradiction = odd().and(&odd().not()).unwrap();
        assert_eq!(contradiction.is_satisfiable(), None);
    }

    #[test]
    fn mod_conflict_unsat() {
        // x % 2 == 0 && x % 2 == 1 has no solution
        let p = Predicate::from_mod(ModAtom::new(2, 0))
            .and(&Predicate::from_mod(ModAtom::new(2, 1)))
            .unwrap();
        assert_eq!(p.is_satisfiable(), None);
    }

    #[test]
    fn bv_satisfiability_uses_min_value() {
        let s = Predicate::from_bv(BvSet::from_values(6, &[54, 6, 22]));
        assert_eq!(s.is_satisfiable(), Some(DomainElement::Bv(6)));
        let none = s.and(&s.not()).unwrap();
        assert_eq!(none.is_satisfiable(), None);
    }

    #[test]
    fn atoms_in_preorder() {
        let p = odd().and(&pos().or(&odd()).unwrap()).unwrap();
        let atoms = p.atoms();
        assert_eq!(atoms.len(), 3);
        assert_eq!(atoms[0], odd());
        assert_eq!(atoms[1], pos());
        assert_eq!(atoms[2], odd());
    }

    #[test]
    fn display_shapes() {
        let p = odd().and(&pos()).unwrap();
        assert_eq!(p.to_string(), "x % 2 == 1 && x > 0");
        let q = odd().or(&pos()).unwrap().not();
        assert_eq!(q.to_string(), "!(x % 2 == 1 || x > 0)");
    }
}
