//! Existential linear integer arithmetic with divisibility.
//!
//! Formulas are quantifier-free matrices of `=`, `<=` and `dvd` atoms over
//! integer terms, under a prefix of existentially quantified variables.
//! `pa_solve` decides satisfiability over the integers and returns a model:
//! the matrix goes to negation normal form, disjuncts are enumerated
//! lazily left to right (so the first satisfiable one determines the
//! model), and each conjunct is decided exactly by `system`. Partial
//! conjuncts are pruned with a cheap bound check before branching; a
//! conjunct budget aborts pathologically disjunctive inputs.

mod simplex;
mod system;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigInt, Signed, Zero};

use crate::error::{Error, Result};
use system::{Lit, LinExpr};

pub type IntAssignment = BTreeMap<String, BigInt>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Const(BigInt),
    Var(String),
    Add(Vec<Term>),
    Mul(BigInt, Box<Term>),
}

impl Term {
    pub fn int(k: impl Into<BigInt>) -> Term {
        Term::Const(k.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn add(terms: Vec<Term>) -> Term {
        Term::Add(terms)
    }

    pub fn mul(k: impl Into<BigInt>, t: Term) -> Term {
        Term::Mul(k.into(), Box::new(t))
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(_) => 1,
            Term::Add(ts) => 1 + ts.iter().map(Term::node_count).sum::<usize>(),
            Term::Mul(_, t) => 1 + t.node_count(),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Add(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Term::Mul(_, t) => t.collect_vars(out),
        }
    }

    pub fn value(&self, a: &IntAssignment) -> Result<BigInt> {
        match self {
            Term::Const(k) => Ok(k.clone()),
            Term::Var(v) => {
                a.get(v).cloned().ok_or_else(|| Error::MissingVariable(v.clone()))
            }
            Term::Add(ts) => {
                let mut acc = BigInt::zero();
                for t in ts {
                    acc += t.value(a)?;
                }
                Ok(acc)
            }
            Term::Mul(k, t) => Ok(k * t.value(a)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PaFormula {
    True,
    False,
    Eq(Term, Term),
    Le(Term, Term),
    Dvd(BigInt, Term),
    Not(Box<PaFormula>),
    And(Vec<PaFormula>),
    Or(Vec<PaFormula>),
}

impl PaFormula {
    pub fn eq(a: Term, b: Term) -> PaFormula {
        PaFormula::Eq(a, b)
    }

    pub fn le(a: Term, b: Term) -> PaFormula {
        PaFormula::Le(a, b)
    }

    pub fn ge(a: Term, b: Term) -> PaFormula {
        PaFormula::Le(b, a)
    }

    pub fn lt(a: Term, b: Term) -> PaFormula {
        PaFormula::Le(Term::add(vec![a, Term::int(1)]), b)
    }

    pub fn gt(a: Term, b: Term) -> PaFormula {
        PaFormula::lt(b, a)
    }

    pub fn ne(a: Term, b: Term) -> PaFormula {
        !PaFormula::Eq(a, b)
    }

    pub fn and(fs: Vec<PaFormula>) -> PaFormula {
        PaFormula::And(fs)
    }

    pub fn or(fs: Vec<PaFormula>) -> PaFormula {
        PaFormula::Or(fs)
    }

    pub fn node_count(&self) -> usize {
        match self {
            PaFormula::True | PaFormula::False => 1,
            PaFormula::Eq(a, b) | PaFormula::Le(a, b) => 1 + a.node_count() + b.node_count(),
            PaFormula::Dvd(_, t) => 1 + t.node_count(),
            PaFormula::Not(f) => 1 + f.node_count(),
            PaFormula::And(fs) | PaFormula::Or(fs) => {
                1 + fs.iter().map(PaFormula::node_count).sum::<usize>()
            }
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            PaFormula::True | PaFormula::False => {}
            PaFormula::Eq(a, b) | PaFormula::Le(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            PaFormula::Dvd(_, t) => t.collect_vars(out),
            PaFormula::Not(f) => f.collect_vars(out),
            PaFormula::And(fs) | PaFormula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_vars(out))
            }
        }
    }

    pub fn eval(&self, a: &IntAssignment) -> Result<bool> {
        match self {
            PaFormula::True => Ok(true),
            PaFormula::False => Ok(false),
            PaFormula::Eq(s, t) => Ok(s.value(a)? == t.value(a)?),
            PaFormula::Le(s, t) => Ok(s.value(a)? <= t.value(a)?),
            PaFormula::Dvd(k, t) => {
                let v = t.value(a)?;
                Ok(if k.is_zero() { v.is_zero() } else { (v % k).is_zero() })
            }
            PaFormula::Not(f) => Ok(!f.eval(a)?),
            PaFormula::And(fs) => {
                for f in fs {
                    if !f.eval(a)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            PaFormula::Or(fs) => {
                for f in fs {
                    if f.eval(a)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

impl std::ops::Not for PaFormula {
    type Output = PaFormula;

    fn not(self) -> PaFormula {
        PaFormula::Not(Box::new(self))
    }
}

/// Existentially closed formula. Solving treats every variable, bound or
/// free, as existential; the prefix fixes the reported variable order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresburgerFormula {
    pub exists: Vec<String>,
    pub matrix: PaFormula,
}

impl PresburgerFormula {
    pub fn new(exists: Vec<String>, matrix: PaFormula) -> PresburgerFormula {
        PresburgerFormula { exists, matrix }
    }

    /// Prefix variables in declaration order, then the remaining matrix
    /// variables sorted.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in &self.exists {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        let mut rest = BTreeSet::new();
        self.matrix.collect_vars(&mut rest);
        for v in rest {
            if !seen.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.matrix.node_count()
    }
}

/// Standard evaluation; `a` must cover every variable of the matrix.
pub fn pa_eval(f: &PresburgerFormula, a: &IntAssignment) -> Result<bool> {
    f.matrix.eval(a)
}

const DNF_BUDGET: usize = 200_000;

/// Deterministic satisfiability with model. The model covers exactly
/// `f.variables()`; variables unconstrained by the chosen disjunct are 0.
pub fn pa_solve(f: &PresburgerFormula) -> Result<Option<IntAssignment>> {
    let nf = nnf(&f.matrix, false);
    let mut acc: Vec<Lit> = Vec::new();
    let mut budget = DNF_BUDGET;
    let Some(partial) = search(&[&nf], &mut acc, &mut budget)? else {
        return Ok(None);
    };
    let mut model = IntAssignment::new();
    for v in f.variables() {
        let value = partial.get(&v).cloned().unwrap_or_default();
        model.insert(v, value);
    }
    assert!(pa_eval(f, &model)?, "solver emitted a non-model");
    Ok(Some(model))
}

// ====== negation normal form over solver literals ======

enum Nf {
    And(Vec<Nf>),
    Or(Vec<Nf>),
    Lit(Lit),
}

fn diff(a: &Term, b: &Term) -> LinExpr {
    let mut e = LinExpr::default();
    lin_into(a, &BigInt::from(1), &mut e);
    lin_into(b, &BigInt::from(-1), &mut e);
    e
}

fn lin_into(t: &Term, mult: &BigInt, out: &mut LinExpr) {
    match t {
        Term::Const(k) => out.add_const(&(mult * k)),
        Term::Var(v) => out.add_var(v, mult),
        Term::Add(ts) => ts.iter().for_each(|s| lin_into(s, mult, out)),
        Term::Mul(k, inner) => lin_into(inner, &(mult * k), out),
    }
}

fn eq_nf(e: LinExpr, neg: bool) -> Nf {
    if !neg {
        return Nf::Lit(Lit::Eq(e));
    }
    // e != 0 splits into e <= -1 or -e <= -1
    let mut lt = e.clone();
    lt.add_const(&BigInt::from(1));
    let mut gt = e.negated();
    gt.add_const(&BigInt::from(1));
    Nf::Or(vec![Nf::Lit(Lit::Le(lt)), Nf::Lit(Lit::Le(gt))])
}

fn nnf(f: &PaFormula, neg: bool) -> Nf {
    match f {
        PaFormula::True => {
            if neg {
                Nf::Or(vec![])
            } else {
                Nf::And(vec![])
            }
        }
        PaFormula::False => {
            if neg {
                Nf::And(vec![])
            } else {
                Nf::Or(vec![])
            }
        }
        PaFormula::Eq(a, b) => eq_nf(diff(a, b), neg),
        PaFormula::Le(a, b) => {
            let e = diff(a, b);
            if !neg {
                Nf::Lit(Lit::Le(e))
            } else {
                let mut g = e.negated();
                g.add_const(&BigInt::from(1));
                Nf::Lit(Lit::Le(g))
            }
        }
        PaFormula::Dvd(k, t) => {
            let mut e = LinExpr::default();
            lin_into(t, &BigInt::from(1), &mut e);
            if k.is_zero() {
                // 0 divides exactly 0
                eq_nf(e, neg)
            } else if k.abs() == BigInt::from(1) {
                if neg {
                    Nf::Or(vec![])
                } else {
                    Nf::And(vec![])
                }
            } else if neg {
                Nf::Lit(Lit::NegDvd(k.abs(), e))
            } else {
                Nf::Lit(Lit::Dvd(k.abs(), e))
            }
        }
        PaFormula::Not(g) => nnf(g, !neg),
        PaFormula::And(fs) => {
            let parts = fs.iter().map(|g| nnf(g, neg)).collect();
            if neg {
                Nf::Or(parts)
            } else {
                Nf::And(parts)
            }
        }
        PaFormula::Or(fs) => {
            let parts = fs.iter().map(|g| nnf(g, neg)).collect();
            if neg {
                Nf::And(parts)
            } else {
                Nf::Or(parts)
            }
        }
    }
}

fn spend(budget: &mut usize) -> Result<()> {
    if *budget == 0 {
        return Err(Error::DnfBudgetExceeded(DNF_BUDGET));
    }
    *budget -= 1;
    Ok(())
}

fn search(
    pending: &[&Nf],
    acc: &mut Vec<Lit>,
    budget: &mut usize,
) -> Result<Option<BTreeMap<String, BigInt>>> {
    let Some((first, rest)) = pending.split_first() else {
        spend(budget)?;
        return Ok(system::solve_conjunct(acc));
    };
    match first {
        Nf::Lit(l) => {
            acc.push(l.clone());
            let found = search(rest, acc, budget);
            acc.pop();
            found
        }
        Nf::And(children) => {
            let mut p = Vec::with_capacity(children.len() + rest.len());
            p.extend(children.iter());
            p.extend_from_slice(rest);
            search(&p, acc, budget)
        }
        Nf::Or(children) => {
            if !children.is_empty() && !acc.is_empty() {
                spend(budget)?;
                if !system::bounds_feasible(acc) {
                    return Ok(None);
                }
            }
            for child in children {
                let p: Vec<&Nf> =
                    std::iter::once(child).chain(rest.iter().copied()).collect();
                if let Some(found) = search(&p, acc, budget)? {
                    return Ok(Some(found));
                }
            }
            Ok(None)
        }
    }
}

// ====== rendering ======

fn is_atomic(t: &Term) -> bool {
    matches!(t, Term::Const(_) | Term::Var(_))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(k) => write!(f, "{k}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Mul(k, t) => {
                if k == &BigInt::from(-1) {
                    write!(f, "-")?;
                } else if k != &BigInt::from(1) {
                    write!(f, "{k}*")?;
                }
                if is_atomic(t) {
                    write!(f, "{t}")
                } else {
                    write!(f, "({t})")
                }
            }
            Term::Add(ts) => {
                if ts.is_empty() {
                    return write!(f, "0");
                }
                for (i, t) in ts.iter().enumerate() {
                    if i == 0 {
                        write!(f, "{t}")?;
                        continue;
                    }
                    // peel a leading minus into the separator
                    match t {
                        Term::Const(k) if k.is_negative() => write!(f, " - {}", -k)?,
                        Term::Mul(k, inner) if k.is_negative() => {
                            let positive = Term::Mul(-k, inner.clone());
                            write!(f, " - {positive}")?;
                        }
                        _ => write!(f, " + {t}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for PaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: Or(0) < And(1) < atoms
        fn go(p: &PaFormula, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match p {
                PaFormula::True => write!(f, "true"),
                PaFormula::False => write!(f, "false"),
                PaFormula::Eq(a, b) => write!(f, "{a} = {b}"),
                PaFormula::Le(a, b) => write!(f, "{a} <= {b}"),
                PaFormula::Dvd(k, t) => write!(f, "{k} dvd {t}"),
                PaFormula::Not(inner) => {
                    write!(f, "!(")?;
                    go(inner, 0, f)?;
                    write!(f, ")")
                }
                PaFormula::And(fs) => {
                    if fs.is_empty() {
                        return write!(f, "true");
                    }
                    if prec > 1 && fs.len() > 1 {
                        write!(f, "(")?;
                    }
                    for (i, g) in fs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " && ")?;
                        }
                        go(g, 2, f)?;
                    }
                    if prec > 1 && fs.len() > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                PaFormula::Or(fs) => {
                    if fs.is_empty() {
                        return write!(f, "false");
                    }
                    if prec > 0 && fs.len() > 1 {
                        write!(f, "(")?;
                    }
                    for (i, g) in fs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " || ")?;
                        }
                        go(g, 1, f)?;
                    }
                    if prec > 0 && fs.len() > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

impl fmt::Display for PresburgerFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.exists.is_empty() {
            write!(f, "exists {}. ", self.exists.join(", "))?;
        }
        write!(f, "{}", self.matrix)
    }
}
