//! Boolean algebra of finite sets with cardinality arithmetic.
//!
//! Formulas mix set atoms (equality, inclusion) with linear constraints
//! over set cardinalities. Solving goes through Venn regions: a formula
//! over e set variables is translated to a linear-arithmetic system whose
//! unknowns are the region sizes l_beta, which `pa_solve` then decides.
//! The deterministic solver expands all 2^e regions; the verifier checks
//! certificates that list only a sparse subset of regions, whose size is
//! limited by `sparsity_bound`.

mod parse;

pub use parse::{parse_bapa, parse_bapa_with};

use std::collections::BTreeSet;

use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::presburger::{
    pa_eval, pa_solve, IntAssignment, PaFormula, PresburgerFormula, Term,
};

/// Cap on set variables for full Venn expansion.
pub const E_MAX: usize = 14;

/// Set expression; variables index into the formula's declared list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Var(usize),
    Empty,
    Universe,
    Union(Box<SetExpr>, Box<SetExpr>),
    Inter(Box<SetExpr>, Box<SetExpr>),
    Compl(Box<SetExpr>),
}

impl SetExpr {
    pub fn union(a: SetExpr, b: SetExpr) -> SetExpr {
        SetExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn inter(a: SetExpr, b: SetExpr) -> SetExpr {
        SetExpr::Inter(Box::new(a), Box::new(b))
    }

    pub fn compl(a: SetExpr) -> SetExpr {
        SetExpr::Compl(Box::new(a))
    }

    /// Propositional value at a Venn region: variable i reads bit i of the
    /// region index, most significant bit first.
    fn holds_at(&self, region: usize, e: usize) -> bool {
        match self {
            SetExpr::Var(i) => region_bit(region, *i, e),
            SetExpr::Empty => false,
            SetExpr::Universe => true,
            SetExpr::Union(a, b) => a.holds_at(region, e) || b.holds_at(region, e),
            SetExpr::Inter(a, b) => a.holds_at(region, e) && b.holds_at(region, e),
            SetExpr::Compl(a) => !a.holds_at(region, e),
        }
    }

    fn eval(&self, sets: &[BTreeSet<usize>], universe: usize) -> BTreeSet<usize> {
        match self {
            SetExpr::Var(i) => sets[*i].clone(),
            SetExpr::Empty => BTreeSet::new(),
            SetExpr::Universe => (1..=universe).collect(),
            SetExpr::Union(a, b) => {
                a.eval(sets, universe).union(&b.eval(sets, universe)).copied().collect()
            }
            SetExpr::Inter(a, b) => a
                .eval(sets, universe)
                .intersection(&b.eval(sets, universe))
                .copied()
                .collect(),
            SetExpr::Compl(a) => {
                let inner = a.eval(sets, universe);
                (1..=universe).filter(|x| !inner.contains(x)).collect()
            }
        }
    }
}

fn region_bit(region: usize, i: usize, e: usize) -> bool {
    let shift = e - 1 - i;
    if shift >= usize::BITS as usize {
        return false;
    }
    (region >> shift) & 1 == 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BapaTerm {
    Const(BigInt),
    Var(String),
    Add(Vec<BapaTerm>),
    Mul(BigInt, Box<BapaTerm>),
    Card(SetExpr),
}

impl BapaTerm {
    pub fn int(v: impl Into<BigInt>) -> BapaTerm {
        BapaTerm::Const(v.into())
    }

    pub fn card(b: SetExpr) -> BapaTerm {
        BapaTerm::Card(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BapaAtom {
    SetEq(SetExpr, SetExpr),
    Subset(SetExpr, SetExpr),
    Eq(BapaTerm, BapaTerm),
    Le(BapaTerm, BapaTerm),
    Dvd(BigInt, BapaTerm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BapaNode {
    Atom(BapaAtom),
    And(Vec<BapaNode>),
    Or(Vec<BapaNode>),
    Not(Box<BapaNode>),
}

/// Formula together with its declaration-ordered set variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BapaFormula {
    pub set_vars: Vec<String>,
    pub root: BapaNode,
}

/// Venn-region description of a satisfying interpretation. `regions` has
/// one size per region of the declared variables, in ascending index
/// order; `sets` spells out each variable as indices over `1..=universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetModel {
    pub universe: usize,
    pub regions: Vec<BigInt>,
    pub sets: Option<Vec<BTreeSet<usize>>>,
}

impl SetModel {
    pub fn num_set_vars(&self) -> usize {
        self.regions.len().trailing_zeros() as usize
    }

    /// Region sizes nonnegative and summing to the universe size, and the
    /// concrete sets, when present, carving the universe into exactly the
    /// stated regions.
    pub fn is_consistent(&self) -> bool {
        if !self.regions.len().is_power_of_two() {
            return false;
        }
        let e = self.num_set_vars();
        if self.regions.iter().any(|l| l.is_negative()) {
            return false;
        }
        if self.regions.iter().sum::<BigInt>() != BigInt::from(self.universe) {
            return false;
        }
        let Some(sets) = &self.sets else { return true };
        if sets.len() != e {
            return false;
        }
        if sets.iter().flatten().any(|&x| x < 1 || x > self.universe) {
            return false;
        }
        let mut counts = vec![BigInt::zero(); self.regions.len()];
        for x in 1..=self.universe {
            let mut r = 0usize;
            for s in sets {
                r = (r << 1) | usize::from(s.contains(&x));
            }
            counts[r] += 1;
        }
        counts == self.regions
    }
}

/// Certificate for the nondeterministic path: a sparse list of region
/// indices plus an assignment for the system restricted to them.
#[derive(Debug, Clone)]
pub struct SparseCertificate {
    pub regions: Vec<usize>,
    pub assignment: IntAssignment,
}

fn region_var(r: usize) -> String {
    format!("$l{r}")
}

fn card_var(i: usize) -> String {
    format!("$k{i}")
}

fn map_atoms(node: &BapaNode, f: &impl Fn(&BapaAtom) -> BapaNode) -> BapaNode {
    match node {
        BapaNode::Atom(a) => f(a),
        BapaNode::And(xs) => BapaNode::And(xs.iter().map(|x| map_atoms(x, f)).collect()),
        BapaNode::Or(xs) => BapaNode::Or(xs.iter().map(|x| map_atoms(x, f)).collect()),
        BapaNode::Not(x) => BapaNode::Not(Box::new(map_atoms(x, f))),
    }
}

/// Replaces every set relation by cardinality constraints: an inclusion
/// says the part outside the right side is empty, an equality is the
/// conjunction of both inclusions.
pub fn rewrite_atoms(f: &BapaFormula) -> BapaFormula {
    let empty_outside = |a: &SetExpr, b: &SetExpr| {
        BapaNode::Atom(BapaAtom::Eq(
            BapaTerm::Card(SetExpr::inter(a.clone(), SetExpr::compl(b.clone()))),
            BapaTerm::int(0),
        ))
    };
    let root = map_atoms(&f.root, &|atom| match atom {
        BapaAtom::SetEq(a, b) => {
            BapaNode::And(vec![empty_outside(a, b), empty_outside(b, a)])
        }
        BapaAtom::Subset(a, b) => empty_outside(a, b),
        other => BapaNode::Atom(other.clone()),
    });
    BapaFormula { set_vars: f.set_vars.clone(), root }
}

fn collect_cards_term(t: &BapaTerm, out: &mut Vec<SetExpr>) {
    match t {
        BapaTerm::Const(_) | BapaTerm::Var(_) => {}
        BapaTerm::Add(ts) => ts.iter().for_each(|t| collect_cards_term(t, out)),
        BapaTerm::Mul(_, t) => collect_cards_term(t, out),
        BapaTerm::Card(b) => {
            if !out.contains(b) {
                out.push(b.clone());
            }
        }
    }
}

fn collect_cards(node: &BapaNode, out: &mut Vec<SetExpr>) {
    match node {
        BapaNode::Atom(a) => match a {
            BapaAtom::SetEq(_, _) | BapaAtom::Subset(_, _) => {}
            BapaAtom::Eq(s, t) | BapaAtom::Le(s, t) => {
                collect_cards_term(s, out);
                collect_cards_term(t, out);
            }
            BapaAtom::Dvd(_, t) => collect_cards_term(t, out),
        },
        BapaNode::And(xs) | BapaNode::Or(xs) => {
            xs.iter().for_each(|x| collect_cards(x, out))
        }
        BapaNode::Not(x) => collect_cards(x, out),
    }
}

fn term_to_pa(t: &BapaTerm, cards: &[SetExpr]) -> Term {
    match t {
        BapaTerm::Const(c) => Term::Const(c.clone()),
        BapaTerm::Var(v) => Term::var(v.clone()),
        BapaTerm::Add(ts) => Term::add(ts.iter().map(|t| term_to_pa(t, cards)).collect()),
        BapaTerm::Mul(k, t) => Term::mul(k.clone(), term_to_pa(t, cards)),
        BapaTerm::Card(b) => {
            let i = cards.iter().position(|c| c == b).expect("collected cardinality");
            Term::var(card_var(i))
        }
    }
}

fn node_to_pa(node: &BapaNode, cards: &[SetExpr]) -> PaFormula {
    match node {
        BapaNode::Atom(a) => match a {
            BapaAtom::SetEq(_, _) | BapaAtom::Subset(_, _) => {
                unreachable!("set atoms are rewritten before expansion")
            }
            BapaAtom::Eq(s, t) => PaFormula::eq(term_to_pa(s, cards), term_to_pa(t, cards)),
            BapaAtom::Le(s, t) => PaFormula::le(term_to_pa(s, cards), term_to_pa(t, cards)),
            BapaAtom::Dvd(k, t) => PaFormula::Dvd(k.clone(), term_to_pa(t, cards)),
        },
        BapaNode::And(xs) => PaFormula::and(xs.iter().map(|x| node_to_pa(x, cards)).collect()),
        BapaNode::Or(xs) => PaFormula::or(xs.iter().map(|x| node_to_pa(x, cards)).collect()),
        BapaNode::Not(x) => !node_to_pa(x, cards),
    }
}

/// Linear-arithmetic image of a formula over the listed Venn regions.
/// Each distinct cardinality expression becomes a fresh `$k` variable,
/// defined as the sum of the `$l` sizes of the listed regions where the
/// set expression holds; unlisted regions are implicitly empty. Set
/// relations still present are rewritten on entry.
pub fn venn_expand(f: &BapaFormula, regions: &[usize]) -> PresburgerFormula {
    let f = rewrite_atoms(f);
    let e = f.set_vars.len();
    let mut cards = Vec::new();
    collect_cards(&f.root, &mut cards);

    let mut parts = Vec::new();
    for &r in regions {
        parts.push(PaFormula::ge(Term::var(region_var(r)), Term::int(0)));
    }
    for (i, b) in cards.iter().enumerate() {
        let sum = regions
            .iter()
            .filter(|&&r| b.holds_at(r, e))
            .map(|&r| Term::var(region_var(r)))
            .collect();
        parts.push(PaFormula::eq(Term::var(card_var(i)), Term::add(sum)));
    }
    parts.push(node_to_pa(&f.root, &cards));
    PresburgerFormula::new(Vec::new(), PaFormula::and(parts))
}

fn concrete_sets(e: usize, regions: &[BigInt]) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); e];
    let mut next = 1usize;
    for (r, size) in regions.iter().enumerate() {
        let n = usize::try_from(size.clone()).expect("region size exceeds address space");
        for idx in next..next + n {
            for (i, set) in sets.iter_mut().enumerate() {
                if region_bit(r, i, e) {
                    set.insert(idx);
                }
            }
        }
        next += n;
    }
    sets
}

pub(crate) fn bind_int_vars(node: &BapaNode, model: &IntAssignment) -> BapaNode {
    fn bind_term(t: &BapaTerm, model: &IntAssignment) -> BapaTerm {
        match t {
            BapaTerm::Var(v) => match model.get(v) {
                Some(c) => BapaTerm::Const(c.clone()),
                None => t.clone(),
            },
            BapaTerm::Add(ts) => {
                BapaTerm::Add(ts.iter().map(|t| bind_term(t, model)).collect())
            }
            BapaTerm::Mul(k, t) => BapaTerm::Mul(k.clone(), Box::new(bind_term(t, model))),
            BapaTerm::Const(_) | BapaTerm::Card(_) => t.clone(),
        }
    }
    map_atoms(node, &|atom| {
        BapaNode::Atom(match atom {
            BapaAtom::Eq(s, t) => BapaAtom::Eq(bind_term(s, model), bind_term(t, model)),
            BapaAtom::Le(s, t) => BapaAtom::Le(bind_term(s, model), bind_term(t, model)),
            BapaAtom::Dvd(k, t) => BapaAtom::Dvd(k.clone(), bind_term(t, model)),
            other => other.clone(),
        })
    })
}

/// Decides satisfiability by expanding all `2^e` regions and solving the
/// resulting linear system. A model reconstructs concrete sets by handing
/// out universe indices to regions in ascending region order.
pub fn qfbapa_solve(f: &BapaFormula) -> Result<Option<SetModel>> {
    let e = f.set_vars.len();
    if e > E_MAX {
        return Err(Error::TooManySetVariables { got: e, limit: E_MAX });
    }
    let regions: Vec<usize> = (0..(1usize << e)).collect();
    let system = venn_expand(f, &regions);
    let Some(assignment) = pa_solve(&system)? else {
        return Ok(None);
    };

    let sizes: Vec<BigInt> = regions
        .iter()
        .map(|&r| assignment.get(&region_var(r)).cloned().unwrap_or_default())
        .collect();
    let universe = usize::try_from(sizes.iter().sum::<BigInt>())
        .expect("universe size exceeds address space");
    let model = SetModel {
        universe,
        regions: sizes.clone(),
        sets: Some(concrete_sets(e, &sizes)),
    };

    let grounded = BapaFormula {
        set_vars: f.set_vars.clone(),
        root: bind_int_vars(&f.root, &assignment),
    };
    assert!(
        matches!(eval_bapa(&grounded, &model), Ok(true)),
        "solver emitted an invalid set model"
    );
    Ok(Some(model))
}

/// Certificate for a satisfiable formula: the regions the deterministic
/// solver populates, with the full arithmetic assignment. `None` when the
/// formula has no model.
pub fn certificate_of(f: &BapaFormula) -> Result<Option<SparseCertificate>> {
    let e = f.set_vars.len();
    if e > E_MAX {
        return Err(Error::TooManySetVariables { got: e, limit: E_MAX });
    }
    let regions: Vec<usize> = (0..(1usize << e)).collect();
    let system = venn_expand(f, &regions);
    let Some(assignment) = pa_solve(&system)? else {
        return Ok(None);
    };
    let support = regions
        .into_iter()
        .filter(|&r| {
            assignment.get(&region_var(r)).is_some_and(|l| !l.is_zero())
        })
        .collect();
    Ok(Some(SparseCertificate { regions: support, assignment }))
}

fn max_abs_const(node: &BapaNode) -> BigInt {
    fn term_max(t: &BapaTerm, acc: &mut BigInt) {
        match t {
            BapaTerm::Const(c) => {
                if c.abs() > *acc {
                    *acc = c.abs();
                }
            }
            BapaTerm::Var(_) | BapaTerm::Card(_) => {}
            BapaTerm::Add(ts) => ts.iter().for_each(|t| term_max(t, acc)),
            BapaTerm::Mul(k, t) => {
                if k.abs() > *acc {
                    *acc = k.abs();
                }
                term_max(t, acc);
            }
        }
    }
    fn node_max(node: &BapaNode, acc: &mut BigInt) {
        match node {
            BapaNode::Atom(a) => match a {
                BapaAtom::SetEq(_, _) | BapaAtom::Subset(_, _) => {}
                BapaAtom::Eq(s, t) | BapaAtom::Le(s, t) => {
                    term_max(s, acc);
                    term_max(t, acc);
                }
                BapaAtom::Dvd(k, t) => {
                    if k.abs() > *acc {
                        *acc = k.abs();
                    }
                    term_max(t, acc);
                }
            },
            BapaNode::And(xs) | BapaNode::Or(xs) => {
                xs.iter().for_each(|x| node_max(x, acc))
            }
            BapaNode::Not(x) => node_max(x, acc),
        }
    }
    let mut acc = BigInt::one();
    node_max(node, &mut acc);
    acc
}

/// Region-list length allowed for a certificate: the smallest n with
/// 2^n >= (4dM)^(2d), where d = p + 1 counts the cardinality expressions
/// plus one and M = max(a, 1) caps the coefficients. This is the integer
/// cone generator bound for dimension-d vectors with entries up to M.
pub fn sparsity_bound(p: usize, a: &BigInt) -> usize {
    let d = p + 1;
    let m = if *a > BigInt::one() { a.clone() } else { BigInt::one() };
    let v = BigInt::from(4 * d as u64) * m;
    let w = v.pow(2 * d as u32);
    let bits = w.bits() as usize;
    if (&w & &(&w - 1)).is_zero() {
        bits - 1
    } else {
        bits
    }
}

/// Checks a sparse certificate: the region list must be duplicate-free,
/// in range, and within `sparsity_bound` for the instance; the assignment
/// must satisfy the system expanded over exactly the listed regions.
pub fn qfbapa_verify(f: &BapaFormula, cert: &SparseCertificate) -> bool {
    let e = f.set_vars.len();
    let rewritten = rewrite_atoms(f);
    let mut cards = Vec::new();
    collect_cards(&rewritten.root, &mut cards);
    let bound = sparsity_bound(cards.len(), &max_abs_const(&rewritten.root));
    if cert.regions.len() > bound {
        return false;
    }
    let mut seen = BTreeSet::new();
    for &r in &cert.regions {
        if e < usize::BITS as usize && r >= (1usize << e) {
            return false;
        }
        if !seen.insert(r) {
            return false;
        }
    }
    let system = venn_expand(&rewritten, &cert.regions);
    matches!(pa_eval(&system, &cert.assignment), Ok(true))
}

/// Evaluates a formula against a model with concrete sets. Free integer
/// variables are not part of a `SetModel` and make evaluation fail with
/// `MissingVariable`.
pub fn eval_bapa(f: &BapaFormula, m: &SetModel) -> Result<bool> {
    let sets = m.sets.as_ref().ok_or(Error::MissingConcreteSets)?;
    if sets.len() != f.set_vars.len() {
        return Err(Error::LengthMismatch { got: sets.len(), want: f.set_vars.len() });
    }
    eval_node(&f.root, sets, m.universe)
}

fn eval_term(t: &BapaTerm, sets: &[BTreeSet<usize>], universe: usize) -> Result<BigInt> {
    Ok(match t {
        BapaTerm::Const(c) => c.clone(),
        BapaTerm::Var(v) => return Err(Error::MissingVariable(v.clone())),
        BapaTerm::Add(ts) => {
            let mut sum = BigInt::zero();
            for t in ts {
                sum += eval_term(t, sets, universe)?;
            }
            sum
        }
        BapaTerm::Mul(k, t) => k * eval_term(t, sets, universe)?,
        BapaTerm::Card(b) => BigInt::from(b.eval(sets, universe).len()),
    })
}

fn eval_node(node: &BapaNode, sets: &[BTreeSet<usize>], universe: usize) -> Result<bool> {
    Ok(match node {
        BapaNode::Atom(a) => match a {
            BapaAtom::SetEq(x, y) => x.eval(sets, universe) == y.eval(sets, universe),
            BapaAtom::Subset(x, y) => {
                x.eval(sets, universe).is_subset(&y.eval(sets, universe))
            }
            BapaAtom::Eq(s, t) => {
                eval_term(s, sets, universe)? == eval_term(t, sets, universe)?
            }
            BapaAtom::Le(s, t) => {
                eval_term(s, sets, universe)? <= eval_term(t, sets, universe)?
            }
            BapaAtom::Dvd(k, t) => {
                let v = eval_term(t, sets, universe)?;
                if k.is_zero() {
                    v.is_zero()
                } else {
                    (v % k).is_zero()
                }
            }
        },
        BapaNode::And(xs) => {
            for x in xs {
                if !eval_node(x, sets, universe)? {
                    return Ok(false);
                }
            }
            true
        }
        BapaNode::Or(xs) => {
            for x in xs {
                if eval_node(x, sets, universe)? {
                    return Ok(true);
                }
            }
            false
        }
        BapaNode::Not(x) => !eval_node(x, sets, universe)?,
    })
}
