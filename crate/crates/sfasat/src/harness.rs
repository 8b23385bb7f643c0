//! Seeded random instance generators and agreement suites shared by the
//! test oracles, the acceptance run, and the `selftest` command.
//!
//! Every generator takes the RNG by argument so callers control seeding;
//! `seeded` pins the stream cipher so the same seed replays the same
//! instances on any platform.

use std::collections::BTreeSet;

use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraId, CmpOp, DomainElement, LinearAtom, ModAtom, Predicate};
use crate::decide::{
    brute_force_check, check_sat, check_sat_card, verify_witness, CardinalityConstraint,
    SatStatus,
};
use crate::error::Result;
use crate::parikh::{letter_var, parikh_formula, parikh_members_upto};
use crate::presburger::{pa_solve, PaFormula, PresburgerFormula, Term};
use crate::qfbapa::{
    eval_bapa, qfbapa_solve, BapaAtom, BapaFormula, BapaNode, BapaTerm, SetExpr, SetModel,
};
use crate::sfa::{GeneratorSet, PropFormula, Sfa, TableAutomaton, TableTransition, Transition};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ====== random integer-algebra automata ======

/// Atomic integer predicate with coefficients, offsets, bounds, and moduli
/// all of magnitude at most 4.
pub fn random_lia_atom(rng: &mut impl Rng) -> Predicate {
    if rng.random_bool(0.3) {
        let modulus = rng.random_range(2..=4);
        Predicate::from_mod(ModAtom::new(modulus, rng.random_range(0..modulus)))
    } else {
        const CMPS: [CmpOp; 6] =
            [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt, CmpOp::Ne];
        let sign = if rng.random_bool(0.2) { -1 } else { 1 };
        Predicate::from_linear(LinearAtom {
            coeff: sign * rng.random_range(1..=4),
            offset: rng.random_range(-4..=4),
            cmp: CMPS[rng.random_range(0..CMPS.len())],
            rhs: rng.random_range(-4..=4),
        })
    }
}

fn literal(rng: &mut impl Rng, pool: &[Predicate]) -> Predicate {
    let p = pool[rng.random_range(0..pool.len())].clone();
    if rng.random_bool(0.3) {
        p.not()
    } else {
        p
    }
}

/// Boolean combination of pool literals, two levels deep at most.
pub fn random_guard(rng: &mut impl Rng, pool: &[Predicate]) -> Predicate {
    let a = literal(rng, pool);
    match rng.random_range(0..8) {
        0..=2 => a,
        3 | 4 => a.and(&literal(rng, pool)).unwrap(),
        5 | 6 => a.or(&literal(rng, pool)).unwrap(),
        _ => {
            let b = literal(rng, pool);
            a.and(&b).unwrap().or(&literal(rng, pool)).unwrap()
        }
    }
}

/// Integer-algebra automaton in the oracle-agreement class: at most 6
/// states, 4 generator atoms, 6 transitions; state 0 initial.
pub fn random_sfa(rng: &mut impl Rng) -> Sfa {
    let num_states = rng.random_range(1..=6);
    let pool: Vec<Predicate> = (0..rng.random_range(1..=4))
        .map(|_| random_lia_atom(rng))
        .collect();
    let transitions = (0..rng.random_range(0..=6))
        .map(|_| Transition {
            source: rng.random_range(0..num_states),
            guard: random_guard(rng, &pool),
            target: rng.random_range(0..num_states),
        })
        .collect();
    let accepting: Vec<usize> = (0..num_states).filter(|_| rng.random_bool(0.4)).collect();
    Sfa::new(AlgebraId::Lia, num_states, 0, accepting, transitions).unwrap()
}

/// Bare skeleton with opaque letters, for Parikh-image checks: at most 5
/// states, 4 letters, 8 transitions.
pub fn random_table_automaton(rng: &mut impl Rng) -> TableAutomaton {
    let num_states = rng.random_range(1..=5);
    let num_letters = rng.random_range(1..=4);
    TableAutomaton {
        num_states,
        initial: 0,
        accepting: (0..num_states).map(|_| rng.random_bool(0.4)).collect(),
        transitions: (0..rng.random_range(0..=8))
            .map(|_| TableTransition {
                source: rng.random_range(0..num_states),
                letter: rng.random_range(0..num_letters),
                target: rng.random_range(0..num_states),
            })
            .collect(),
        letters: (0..num_letters).map(PropFormula::Var).collect(),
    }
}

// ====== random cardinality constraints ======

fn some_var(rng: &mut impl Rng, vars: usize) -> SetExpr {
    SetExpr::Var(rng.random_range(0..vars))
}

fn random_region_expr(rng: &mut impl Rng, vars: usize) -> SetExpr {
    if vars == 0 {
        return SetExpr::Universe;
    }
    match rng.random_range(0..6) {
        0 | 1 => some_var(rng, vars),
        2 => SetExpr::compl(some_var(rng, vars)),
        3 => {
            let a = some_var(rng, vars);
            SetExpr::inter(a, some_var(rng, vars))
        }
        4 => {
            let a = some_var(rng, vars);
            SetExpr::union(a, some_var(rng, vars))
        }
        _ => SetExpr::Universe,
    }
}

fn random_card_atom(rng: &mut impl Rng, vars: usize) -> BapaNode {
    let card = BapaTerm::card(random_region_expr(rng, vars));
    let c = BapaTerm::int(rng.random_range(0..=3));
    BapaNode::Atom(match rng.random_range(0..4) {
        0 => BapaAtom::Eq(card, c),
        1 => BapaAtom::Le(card, c),
        2 => BapaAtom::Le(c, card),
        _ => BapaAtom::Dvd(BigInt::from(rng.random_range(2..=3)), card),
    })
}

/// Constraint over the generator names: one or two cardinality atoms,
/// constants at most 3.
pub fn random_cardinality(rng: &mut impl Rng, gens: &GeneratorSet) -> CardinalityConstraint {
    let set_vars: Vec<String> = gens.iter().map(|(n, _)| n.to_string()).collect();
    let vars = set_vars.len();
    let a = random_card_atom(rng, vars);
    let root = if rng.random_bool(0.5) {
        a
    } else {
        let b = random_card_atom(rng, vars);
        if rng.random_bool(0.5) {
            BapaNode::And(vec![a, b])
        } else {
            BapaNode::Or(vec![a, b])
        }
    };
    let root = if rng.random_bool(0.15) { BapaNode::Not(Box::new(root)) } else { root };
    CardinalityConstraint::with_generators(
        BapaFormula { set_vars, root },
        gens.clone(),
    )
}

// ====== random standalone QFBAPA formulas ======

fn random_set_expr(rng: &mut impl Rng, vars: usize, depth: usize) -> SetExpr {
    if depth == 0 || rng.random_bool(0.5) {
        return match rng.random_range(0..8) {
            0 => SetExpr::Empty,
            1 => SetExpr::Universe,
            _ => SetExpr::Var(rng.random_range(0..vars)),
        };
    }
    match rng.random_range(0..3) {
        0 => SetExpr::compl(random_set_expr(rng, vars, depth - 1)),
        1 => SetExpr::inter(
            random_set_expr(rng, vars, depth - 1),
            random_set_expr(rng, vars, depth - 1),
        ),
        _ => SetExpr::union(
            random_set_expr(rng, vars, depth - 1),
            random_set_expr(rng, vars, depth - 1),
        ),
    }
}

fn random_bapa_atom(rng: &mut impl Rng, vars: usize) -> BapaNode {
    let atom = match rng.random_range(0..6) {
        0 => BapaAtom::SetEq(
            random_set_expr(rng, vars, 1),
            random_set_expr(rng, vars, 1),
        ),
        1 => BapaAtom::Subset(
            random_set_expr(rng, vars, 1),
            random_set_expr(rng, vars, 1),
        ),
        2 => BapaAtom::Eq(
            BapaTerm::card(random_set_expr(rng, vars, 2)),
            BapaTerm::int(rng.random_range(0..=4)),
        ),
        3 => BapaAtom::Le(
            BapaTerm::card(random_set_expr(rng, vars, 2)),
            BapaTerm::int(rng.random_range(0..=4)),
        ),
        4 => BapaAtom::Le(
            BapaTerm::int(rng.random_range(0..=4)),
            BapaTerm::card(random_set_expr(rng, vars, 2)),
        ),
        _ => BapaAtom::Dvd(
            BigInt::from(rng.random_range(2..=4)),
            BapaTerm::card(random_set_expr(rng, vars, 2)),
        ),
    };
    BapaNode::Atom(atom)
}

/// Standalone formula in the enumeration-agreement class: at most 3 set
/// variables, 3 atoms, constants at most 4, no free integer variables.
pub fn random_bapa(rng: &mut impl Rng) -> BapaFormula {
    let vars = rng.random_range(1..=3);
    let set_vars = ["A", "B", "C"][..vars].iter().map(|s| s.to_string()).collect();
    let a = random_bapa_atom(rng, vars);
    let root = match rng.random_range(0..5) {
        0 => a,
        1 => BapaNode::Not(Box::new(a)),
        2 => BapaNode::And(vec![a, random_bapa_atom(rng, vars)]),
        3 => BapaNode::Or(vec![a, random_bapa_atom(rng, vars)]),
        _ => BapaNode::And(vec![
            a,
            BapaNode::Or(vec![random_bapa_atom(rng, vars), random_bapa_atom(rng, vars)]),
        ]),
    };
    BapaFormula { set_vars, root }
}

// ====== enumeration oracles ======

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Does some set assignment over a universe of size at most `max_universe`
/// satisfy `f`? Brute enumeration of Venn region sizes; independent of the
/// solver pipeline.
pub fn bapa_enumeration_sat(f: &BapaFormula, max_universe: usize) -> bool {
    let e = f.set_vars.len();
    for universe in 0..=max_universe {
        for sizes in compositions(universe, 1 << e) {
            let regions: Vec<BigInt> = sizes.iter().map(|&n| BigInt::from(n)).collect();
            let model = SetModel {
                universe,
                regions: regions.clone(),
                sets: Some(concrete_sets_for(e, &sizes)),
            };
            if eval_bapa(f, &model) == Ok(true) {
                return true;
            }
        }
    }
    false
}

fn concrete_sets_for(e: usize, sizes: &[usize]) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); e];
    let mut next = 1;
    for (region, &n) in sizes.iter().enumerate() {
        for x in next..next + n {
            for (i, set) in sets.iter_mut().enumerate() {
                if region >> (e - 1 - i) & 1 == 1 {
                    set.insert(x);
                }
            }
        }
        next += n;
    }
    sets
}

/// Same question as `bapa_enumeration_sat` posed to the solver: is there a
/// model whose universe stays within `max_universe`?
pub fn bapa_bounded_solve(f: &BapaFormula, max_universe: usize) -> Result<bool> {
    let bounded = BapaFormula {
        set_vars: f.set_vars.clone(),
        root: BapaNode::And(vec![
            f.root.clone(),
            BapaNode::Atom(BapaAtom::Le(
                BapaTerm::card(SetExpr::Universe),
                BapaTerm::int(max_universe as i64),
            )),
        ]),
    };
    Ok(qfbapa_solve(&bounded)?.is_some())
}

/// All count vectors with the given number of entries and total at most
/// `max_total`, in lexicographic order.
pub fn count_vectors(letters: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..=max_total)
        .flat_map(|total| compositions(total, letters))
        .collect();
    out.sort();
    out
}

/// Checks the Parikh formula against direct membership enumeration: a
/// count vector with total at most `max_total` satisfies the formula
/// exactly when some accepted sequence realizes it.
pub fn parikh_matches_membership(a: &TableAutomaton, max_total: usize) -> Result<bool> {
    let members = parikh_members_upto(a, max_total)?;
    let rho = parikh_formula(a);
    for counts in count_vectors(a.letters.len(), max_total) {
        let pins: Vec<PaFormula> = counts
            .iter()
            .enumerate()
            .map(|(j, &c)| PaFormula::eq(Term::var(letter_var(j)), Term::int(c as i64)))
            .collect();
        let mut parts = pins;
        parts.push(rho.formula.matrix.clone());
        let pinned =
            PresburgerFormula::new(rho.formula.exists.clone(), PaFormula::and(parts));
        let solver_says = pa_solve(&pinned)?.is_some();
        if solver_says != members.contains(&counts) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ====== self test ======

fn trivial_constraint(m: &Sfa) -> CardinalityConstraint {
    let gens = GeneratorSet::extract(m);
    CardinalityConstraint::with_generators(
        BapaFormula {
            set_vars: gens.iter().map(|(n, _)| n.to_string()).collect(),
            root: BapaNode::Atom(BapaAtom::Eq(BapaTerm::int(0), BapaTerm::int(0))),
        },
        gens,
    )
}

/// Deterministic oracle-agreement suites. Returns one line per suite and
/// an overall flag; any disagreement reports the failing seed.
pub fn selftest() -> (bool, String) {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut suite = |name: &str, result: std::result::Result<usize, String>| match result {
        Ok(n) => lines.push(format!("{name}: {n} instances ok")),
        Err(msg) => {
            ok = false;
            lines.push(format!("{name}: FAILED ({msg})"));
        }
    };

    suite("reachability agreement", reachability_suite(101, 120));
    suite("cardinality agreement", cardinality_suite(102, 30));
    suite("qfbapa enumeration", qfbapa_suite(103, 60));
    suite("parikh membership", parikh_suite(104, 25));

    lines.push(if ok { "OK".into() } else { "FAILED".into() });
    (ok, lines.join("\n") + "\n")
}

fn reachability_suite(seed: u64, rounds: usize) -> std::result::Result<usize, String> {
    let mut rng = seeded(seed);
    for i in 0..rounds {
        let m = random_sfa(&mut rng);
        let got = check_sat(&m).map_err(|e| format!("instance {i}: {e}"))?;
        if (got.status == SatStatus::Sat) != m.prune_and_reach() {
            return Err(format!("instance {i}: status disagrees with reachability"));
        }
        if let Some(w) = &got.witness {
            if !verify_witness(&m, None, w) {
                return Err(format!("instance {i}: witness rejected"));
            }
        }
    }
    Ok(rounds)
}

fn cardinality_suite(seed: u64, rounds: usize) -> std::result::Result<usize, String> {
    let mut rng = seeded(seed);
    let domain: Vec<DomainElement> = (-8..=8).map(DomainElement::Int).collect();
    for i in 0..rounds {
        let m = random_sfa(&mut rng);
        let gens = GeneratorSet::extract(&m);
        let constraint = random_cardinality(&mut rng, &gens);
        let fancy = check_sat_card(&m, &constraint).map_err(|e| format!("instance {i}: {e}"))?;
        let brute = brute_force_check(&m, Some(&constraint), &domain, 3)
            .map_err(|e| format!("instance {i}: {e}"))?;
        if brute.status == SatStatus::Sat && fancy.status != SatStatus::Sat {
            return Err(format!("instance {i}: brute found a word the solver missed"));
        }
        if let Some(w) = &fancy.witness {
            if !verify_witness(&m, Some(&constraint), w) {
                return Err(format!("instance {i}: witness rejected"));
            }
        }
        let plain = check_sat(&m).map_err(|e| format!("instance {i}: {e}"))?;
        let trivial = check_sat_card(&m, &trivial_constraint(&m))
            .map_err(|e| format!("instance {i}: {e}"))?;
        if plain.status != trivial.status {
            return Err(format!("instance {i}: trivial constraint changed the status"));
        }
    }
    Ok(rounds)
}

fn qfbapa_suite(seed: u64, rounds: usize) -> std::result::Result<usize, String> {
    let mut rng = seeded(seed);
    for i in 0..rounds {
        let f = random_bapa(&mut rng);
        let enumerated = bapa_enumeration_sat(&f, 6);
        let solved = bapa_bounded_solve(&f, 6).map_err(|e| format!("instance {i}: {e}"))?;
        if enumerated != solved {
            return Err(format!("instance {i}: solver and enumeration disagree"));
        }
        if enumerated && qfbapa_solve(&f).map_err(|e| format!("instance {i}: {e}"))?.is_none() {
            return Err(format!("instance {i}: unbounded solve missed a small model"));
        }
    }
    Ok(rounds)
}

fn parikh_suite(seed: u64, rounds: usize) -> std::result::Result<usize, String> {
    let mut rng = seeded(seed);
    for i in 0..rounds {
        let a = random_table_automaton(&mut rng);
        if !parikh_matches_membership(&a, 4).map_err(|e| format!("instance {i}: {e}"))? {
            return Err(format!("instance {i}: formula disagrees with enumeration"));
        }
    }
    Ok(rounds)
}
