//! Non-emptiness of symbolic automata, plain and under a cardinality
//! constraint.
//!
//! Both deciders reduce to a single existential Presburger query. The
//! plain one combines the Parikh formula of the propositional skeleton
//! with one element-oracle call per letter; the constrained one
//! additionally splits each letter count across the satisfiable Venn
//! regions where the letter holds and ties the region sizes to the
//! constraint. A model is turned back into a concrete word via an
//! Eulerian trail over the transition flows, substituting a memoized
//! oracle witness for every position.

use std::collections::{BTreeSet, VecDeque};

use num::{BigInt, One, Zero};

use crate::algebra::{DomainElement, Predicate};
use crate::error::{Error, Result};
use crate::parikh::{flow_of_model, letter_var, parikh_formula, realize_path};
use crate::presburger::{pa_solve, IntAssignment, PaFormula, PresburgerFormula, Term};
use crate::qfbapa::{
    bind_int_vars, eval_bapa, rewrite_atoms, BapaAtom, BapaFormula, BapaNode, BapaTerm, SetExpr,
    SetModel, E_MAX,
};
use crate::sfa::{propositionalize, propositionalize_with, GeneratorSet, Minterm, Sfa, TableAutomaton};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
}

impl SatStatus {
    pub fn is_sat(self) -> bool {
        self == SatStatus::Sat
    }
}

/// Solver-side byproducts exposed for inspection and the CLI's JSON
/// output. `letter_counts` and `flows` come from the arithmetic model on
/// SAT; `region_sizes` only from the constrained decider;
/// `bounded_domain` only from brute enumeration.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub letter_counts: Vec<BigInt>,
    pub flows: Vec<BigInt>,
    pub region_sizes: Vec<(Minterm, BigInt)>,
    pub bounded_domain: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct SatResult {
    pub status: SatStatus,
    pub witness: Option<Vec<DomainElement>>,
    pub diagnostics: Diagnostics,
}

impl SatResult {
    fn unsat(diagnostics: Diagnostics) -> SatResult {
        SatResult { status: SatStatus::Unsat, witness: None, diagnostics }
    }
}

/// Constraint on the index sets of a word: for generator φ_i the set
/// variable named after it denotes {positions p : φ_i(w_p)}, and `U` is
/// all positions. Set variables resolve against `generators` when given,
/// otherwise against the atoms extracted from the automaton (named by
/// their printed text).
#[derive(Debug, Clone)]
pub struct CardinalityConstraint {
    pub formula: BapaFormula,
    pub generators: Option<GeneratorSet>,
}

impl CardinalityConstraint {
    pub fn new(formula: BapaFormula) -> CardinalityConstraint {
        CardinalityConstraint { formula, generators: None }
    }

    pub fn with_generators(formula: BapaFormula, generators: GeneratorSet) -> CardinalityConstraint {
        CardinalityConstraint { formula, generators: Some(generators) }
    }
}

/// Element-oracle answers for one automaton: a witness per letter (on its
/// original guard) and per Venn region of the generators.
#[derive(Debug, Clone)]
pub struct LetterSatProfile {
    pub letters: Vec<Option<DomainElement>>,
    pub regions: Vec<Option<DomainElement>>,
}

/// invariant: `ta` transition `i` mirrors `sfa` transition `i`
fn representative_guards<'a>(m: &'a Sfa, ta: &TableAutomaton) -> Vec<&'a Predicate> {
    let mut guards: Vec<Option<&Predicate>> = vec![None; ta.letters.len()];
    for (i, t) in ta.transitions.iter().enumerate() {
        if guards[t.letter].is_none() {
            guards[t.letter] = Some(&m.transitions()[i].guard);
        }
    }
    guards
        .into_iter()
        .map(|g| g.expect("every letter stems from some transition"))
        .collect()
}

pub fn letter_sat_profile(m: &Sfa) -> Result<LetterSatProfile> {
    let (gens, ta) = propositionalize(m);
    let k = gens.len();
    if k > E_MAX {
        return Err(Error::TooManyGenerators { got: k, limit: E_MAX });
    }
    let letters = representative_guards(m, &ta)
        .iter()
        .map(|g| g.is_satisfiable())
        .collect();
    let mut regions = Vec::with_capacity(1 << k);
    for r in 0..1usize << k {
        regions.push(gens.minterm_predicate(&Minterm::from_index(k, r))?.is_satisfiable());
    }
    Ok(LetterSatProfile { letters, regions })
}

/// Is L(M) nonempty? Letters with unsatisfiable guards get their counts
/// pinned to zero; any model of the remaining Parikh system is realized
/// as an Eulerian trail whose positions all take the per-letter witness.
pub fn check_sat(m: &Sfa) -> Result<SatResult> {
    let (_, ta) = propositionalize(m);
    let letter_witness: Vec<Option<DomainElement>> = representative_guards(m, &ta)
        .iter()
        .map(|g| g.is_satisfiable())
        .collect();

    let rho = parikh_formula(&ta);
    let mut parts = Vec::new();
    for (j, w) in letter_witness.iter().enumerate() {
        if w.is_none() {
            parts.push(PaFormula::eq(Term::var(letter_var(j)), Term::int(0)));
        }
    }
    parts.push(rho.formula.matrix.clone());
    let system = PresburgerFormula::new(rho.formula.exists.clone(), PaFormula::and(parts));

    let Some(model) = pa_solve(&system)? else {
        return Ok(SatResult::unsat(Diagnostics::default()));
    };
    let flow = flow_of_model(&ta, &model)?;
    let trail = realize_path(&ta, &flow)?;
    let word: Vec<DomainElement> = trail
        .iter()
        .map(|&j| letter_witness[j].expect("letters with flow are satisfiable"))
        .collect();

    let diagnostics = Diagnostics {
        letter_counts: (0..ta.letters.len()).map(|j| model[&letter_var(j)].clone()).collect(),
        flows: flow.y.clone(),
        region_sizes: Vec::new(),
        bounded_domain: None,
    };
    debug_assert!(verify_witness(m, None, &word), "emitted witness fails verification");
    Ok(SatResult { status: SatStatus::Sat, witness: Some(word), diagnostics })
}

fn count_var(letter: usize, region: usize) -> String {
    format!("$c{letter}_{region}")
}

// same convention as the qfbapa expansion, so diagnostics read alike
fn size_var(region: usize) -> String {
    format!("$l{region}")
}

fn resolve_set_vars(f: &BapaFormula, gens: &GeneratorSet) -> Result<Vec<usize>> {
    f.set_vars
        .iter()
        .map(|name| {
            gens.index_of(name).ok_or_else(|| Error::UnknownSetVariable(name.clone()))
        })
        .collect()
}

/// Does the region (over all k generators) fall inside the set denoted by
/// `b`, whose variables index into the constraint's declaration list?
fn region_in_set(b: &SetExpr, region: usize, k: usize, perm: &[usize]) -> bool {
    match b {
        SetExpr::Var(i) => k > 0 && region >> (k - 1 - perm[*i]) & 1 == 1,
        SetExpr::Empty => false,
        SetExpr::Universe => true,
        SetExpr::Union(a, b) => {
            region_in_set(a, region, k, perm) || region_in_set(b, region, k, perm)
        }
        SetExpr::Inter(a, b) => {
            region_in_set(a, region, k, perm) && region_in_set(b, region, k, perm)
        }
        SetExpr::Compl(a) => !region_in_set(a, region, k, perm),
    }
}

/// prefix keeps the constraint's own integer variables clear of ours
const INT_VAR_PREFIX: &str = "f$";

fn term_to_pa(t: &BapaTerm, k: usize, perm: &[usize]) -> Term {
    match t {
        BapaTerm::Const(c) => Term::int(c.clone()),
        BapaTerm::Var(v) => Term::var(format!("{INT_VAR_PREFIX}{v}")),
        BapaTerm::Add(ts) => Term::add(ts.iter().map(|t| term_to_pa(t, k, perm)).collect()),
        BapaTerm::Mul(c, t) => Term::mul(c.clone(), term_to_pa(t, k, perm)),
        BapaTerm::Card(b) => Term::add(
            (0..1usize << k)
                .filter(|&r| region_in_set(b, r, k, perm))
                .map(|r| Term::var(size_var(r)))
                .collect(),
        ),
    }
}

fn node_to_pa(node: &BapaNode, k: usize, perm: &[usize]) -> PaFormula {
    match node {
        BapaNode::Atom(BapaAtom::Eq(s, t)) => {
            PaFormula::eq(term_to_pa(s, k, perm), term_to_pa(t, k, perm))
        }
        BapaNode::Atom(BapaAtom::Le(s, t)) => {
            PaFormula::le(term_to_pa(s, k, perm), term_to_pa(t, k, perm))
        }
        BapaNode::Atom(BapaAtom::Dvd(c, t)) => {
            PaFormula::Dvd(c.clone(), term_to_pa(t, k, perm))
        }
        BapaNode::Atom(BapaAtom::SetEq(..) | BapaAtom::Subset(..)) => {
            unreachable!("set atoms are rewritten before translation")
        }
        BapaNode::And(ns) => PaFormula::and(ns.iter().map(|n| node_to_pa(n, k, perm)).collect()),
        BapaNode::Or(ns) => PaFormula::or(ns.iter().map(|n| node_to_pa(n, k, perm)).collect()),
        BapaNode::Not(n) => !node_to_pa(n, k, perm),
    }
}

fn int_vars(node: &BapaNode, out: &mut BTreeSet<String>) {
    fn term(t: &BapaTerm, out: &mut BTreeSet<String>) {
        match t {
            BapaTerm::Var(v) => {
                out.insert(v.clone());
            }
            BapaTerm::Add(ts) => ts.iter().for_each(|t| term(t, out)),
            BapaTerm::Mul(_, t) => term(t, out),
            BapaTerm::Const(_) | BapaTerm::Card(_) => {}
        }
    }
    match node {
        BapaNode::Atom(BapaAtom::Eq(s, t) | BapaAtom::Le(s, t)) => {
            term(s, out);
            term(t, out);
        }
        BapaNode::Atom(BapaAtom::Dvd(_, t)) => term(t, out),
        BapaNode::Atom(_) => {}
        BapaNode::And(ns) | BapaNode::Or(ns) => ns.iter().for_each(|n| int_vars(n, out)),
        BapaNode::Not(n) => int_vars(n, out),
    }
}

/// Is some word of L(M) compatible with the cardinality constraint?
///
/// One combined linear system over: the Parikh variables of the skeleton,
/// a size `$l{r}` per Venn region of the generators, and a split counter
/// `$c{j}_{r}` per (letter, region) pair where the letter holds
/// propositionally and the region has an element witness. Region sizes
/// are exactly the sums of their counters, so regions no letter can
/// populate are forced empty.
pub fn check_sat_card(m: &Sfa, constraint: &CardinalityConstraint) -> Result<SatResult> {
    let (gens, ta) = match &constraint.generators {
        Some(g) => (g.clone(), propositionalize_with(m, g)?),
        None => propositionalize(m),
    };
    let k = gens.len();
    if k > E_MAX {
        return Err(Error::TooManyGenerators { got: k, limit: E_MAX });
    }
    let perm = resolve_set_vars(&constraint.formula, &gens)?;
    let num_regions = 1usize << k;

    let mut region_witness: Vec<Option<Option<DomainElement>>> = vec![None; num_regions];
    let mut witness_of = |r: usize, gens: &GeneratorSet| -> Result<Option<DomainElement>> {
        if region_witness[r].is_none() {
            let p = gens.minterm_predicate(&Minterm::from_index(k, r))?;
            region_witness[r] = Some(p.is_satisfiable());
        }
        Ok(region_witness[r].unwrap())
    };

    let mut rows: Vec<PaFormula> = Vec::new();
    let mut split_vars: Vec<String> = Vec::new();
    let mut by_region: Vec<Vec<usize>> = vec![Vec::new(); num_regions];
    let mut by_letter: Vec<Vec<usize>> = vec![Vec::new(); ta.letters.len()];
    for (j, letter) in ta.letters.iter().enumerate() {
        let mut pieces = Vec::new();
        for (r, region) in by_region.iter_mut().enumerate() {
            if !letter.eval_at(&Minterm::from_index(k, r)) {
                continue;
            }
            if witness_of(r, &gens)?.is_none() {
                continue;
            }
            let v = count_var(j, r);
            rows.push(PaFormula::ge(Term::var(v.clone()), Term::int(0)));
            pieces.push(Term::var(v.clone()));
            split_vars.push(v);
            region.push(j);
            by_letter[j].push(r);
        }
        rows.push(PaFormula::eq(Term::var(letter_var(j)), Term::add(pieces)));
    }
    for (r, js) in by_region.iter().enumerate() {
        let sum = Term::add(js.iter().map(|&j| Term::var(count_var(j, r))).collect());
        rows.push(PaFormula::eq(Term::var(size_var(r)), sum));
    }

    let grounded = rewrite_atoms(&constraint.formula);
    rows.push(node_to_pa(&grounded.root, k, &perm));

    let rho = parikh_formula(&ta);
    rows.push(rho.formula.matrix.clone());

    let mut exists = rho.formula.exists.clone();
    exists.extend((0..num_regions).map(size_var));
    exists.extend(split_vars);
    let mut free_ints = BTreeSet::new();
    int_vars(&grounded.root, &mut free_ints);
    exists.extend(free_ints.iter().map(|v| format!("{INT_VAR_PREFIX}{v}")));

    let system = PresburgerFormula::new(exists, PaFormula::and(rows));
    let Some(model) = pa_solve(&system)? else {
        return Ok(SatResult::unsat(Diagnostics::default()));
    };

    let flow = flow_of_model(&ta, &model)?;
    let trail = realize_path(&ta, &flow)?;

    // hand out region witnesses per letter, ascending region order
    let mut queues: Vec<VecDeque<(usize, BigInt)>> = by_letter
        .iter()
        .enumerate()
        .map(|(j, rs)| {
            rs.iter()
                .filter_map(|&r| {
                    let c = model[&count_var(j, r)].clone();
                    (c > BigInt::zero()).then_some((r, c))
                })
                .collect()
        })
        .collect();
    let mut word = Vec::with_capacity(trail.len());
    for &j in &trail {
        let front = queues[j].front_mut().expect("letter count covers its trail uses");
        let r = front.0;
        if front.1.is_one() {
            queues[j].pop_front();
        } else {
            front.1 -= 1;
        }
        word.push(
            witness_of(r, &gens)?.expect("split counters only target witnessed regions"),
        );
    }

    let diagnostics = Diagnostics {
        letter_counts: (0..ta.letters.len()).map(|j| model[&letter_var(j)].clone()).collect(),
        flows: flow.y.clone(),
        region_sizes: (0..num_regions)
            .map(|r| (Minterm::from_index(k, r), model[&size_var(r)].clone()))
            .collect(),
        bounded_domain: None,
    };

    debug_assert!(
        {
            let bound: IntAssignment = free_ints
                .iter()
                .map(|v| (v.clone(), model[&format!("{INT_VAR_PREFIX}{v}")].clone()))
                .collect();
            let grounded_constraint = CardinalityConstraint {
                formula: BapaFormula {
                    set_vars: constraint.formula.set_vars.clone(),
                    root: bind_int_vars(&constraint.formula.root, &bound),
                },
                generators: Some(gens.clone()),
            };
            verify_witness(m, Some(&grounded_constraint), &word)
        },
        "emitted witness fails verification"
    );
    Ok(SatResult { status: SatStatus::Sat, witness: Some(word), diagnostics })
}

/// Checks a concrete word against the automaton and, when given, the
/// constraint: the word must be accepted and its index sets must satisfy
/// the formula. Any evaluation failure counts as rejection.
pub fn verify_witness(
    m: &Sfa,
    constraint: Option<&CardinalityConstraint>,
    word: &[DomainElement],
) -> bool {
    if m.accepts(word) != Ok(true) {
        return false;
    }
    let Some(c) = constraint else { return true };
    let gens = match &c.generators {
        Some(g) => g.clone(),
        None => GeneratorSet::extract(m),
    };
    let Ok(perm) = resolve_set_vars(&c.formula, &gens) else {
        return false;
    };
    let Ok(table) = gens.table_of(word) else {
        return false;
    };
    index_sets_satisfy(&c.formula, &perm, &table.0)
}

/// Builds the index-set model of a table (set `i` = positions whose
/// minterm sets generator `perm[i]`, universe = all positions) and
/// evaluates the formula over it.
fn index_sets_satisfy(f: &BapaFormula, perm: &[usize], table: &[Minterm]) -> bool {
    let e = perm.len();
    let mut sets = vec![BTreeSet::new(); e];
    let mut regions = vec![BigInt::zero(); 1 << e];
    for (pos, minterm) in table.iter().enumerate() {
        let mut r = 0usize;
        for (i, &g) in perm.iter().enumerate() {
            if minterm.bit(g) {
                sets[i].insert(pos + 1);
                r |= 1 << (e - 1 - i);
            }
        }
        regions[r] += 1;
    }
    let model = SetModel { universe: table.len(), regions, sets: Some(sets) };
    eval_bapa(f, &model) == Ok(true)
}

/// Exhaustive reference decider: every word over `domain` of length at
/// most `max_len`, in length-major then domain-index order. Errors out
/// past a million words rather than spinning.
pub fn brute_force_check(
    m: &Sfa,
    constraint: Option<&CardinalityConstraint>,
    domain: &[DomainElement],
    max_len: usize,
) -> Result<SatResult> {
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..=max_len {
        total += layer;
        if total > 1_000_000 {
            return Err(Error::BoundExceeded(format!(
                "{} words of length up to {max_len} over a {}-element domain",
                total, domain.len()
            )));
        }
        layer = layer.saturating_mul(domain.len() as u128);
    }

    let resolved = match constraint {
        None => None,
        Some(c) => {
            let gens = match &c.generators {
                Some(g) => g.clone(),
                None => GeneratorSet::extract(m),
            };
            let perm = resolve_set_vars(&c.formula, &gens)?;
            let minterms: Vec<Minterm> = domain
                .iter()
                .map(|d| gens.minterm_of(d))
                .collect::<Result<_>>()?;
            Some((&c.formula, perm, minterms))
        }
    };

    let enabled: Vec<Vec<bool>> = domain
        .iter()
        .map(|d| {
            m.transitions()
                .iter()
                .map(|t| t.guard.evaluate(d).unwrap_or(false))
                .collect()
        })
        .collect();

    let diagnostics = Diagnostics {
        bounded_domain: Some((domain.len(), max_len)),
        ..Diagnostics::default()
    };
    let mut states = vec![false; m.num_states()];
    states[m.initial()] = true;
    let mut picks = Vec::new();
    for target in 0..=max_len {
        if let Some(word) =
            search(m, &enabled, resolved.as_ref(), &states, &mut picks, target, domain)
        {
            debug_assert!(verify_witness(m, constraint, &word));
            return Ok(SatResult {
                status: SatStatus::Sat,
                witness: Some(word),
                diagnostics,
            });
        }
    }
    Ok(SatResult::unsat(diagnostics))
}

type ResolvedConstraint<'a> = (&'a BapaFormula, Vec<usize>, Vec<Minterm>);

fn search(
    m: &Sfa,
    enabled: &[Vec<bool>],
    constraint: Option<&ResolvedConstraint<'_>>,
    states: &[bool],
    picks: &mut Vec<usize>,
    target: usize,
    domain: &[DomainElement],
) -> Option<Vec<DomainElement>> {
    if picks.len() == target {
        let accepted = (0..m.num_states()).any(|q| states[q] && m.is_accepting(q));
        if !accepted {
            return None;
        }
        if let Some((f, perm, minterms)) = constraint {
            let table: Vec<Minterm> = picks.iter().map(|&d| minterms[d].clone()).collect();
            if !index_sets_satisfy(f, perm, &table) {
                return None;
            }
        }
        return Some(picks.iter().map(|&d| domain[d]).collect());
    }
    for d in 0..domain.len() {
        let mut next = vec![false; m.num_states()];
        let mut any = false;
        for (ti, t) in m.transitions().iter().enumerate() {
            if states[t.source] && enabled[d][ti] && !next[t.target] {
                next[t.target] = true;
                any = true;
            }
        }
        if !any {
            continue;
        }
        picks.push(d);
        let found = search(m, enabled, constraint, &next, picks, target, domain);
        picks.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}
