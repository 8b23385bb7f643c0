//! Letter-count images of table automata.
//!
//! `parikh_formula` captures, in one existential arithmetic formula of size
//! linear in the automaton, exactly the vectors (k_1..k_m) for which some
//! accepted letter sequence contains letter j exactly k_j times. The
//! encoding is a flow network: a fresh sink is reached from exactly one
//! accepting state, per-transition flow counts obey conservation, and
//! depth variables force the flow's support to be connected to the initial
//! state. A model of the formula is turned back into a concrete letter
//! sequence by walking an Euler trail of the flow multigraph.

use std::collections::BTreeSet;

use num::{BigInt, One, Signed};

use crate::error::{Error, Result};
use crate::presburger::{IntAssignment, PaFormula, PresburgerFormula, Term};
use crate::sfa::TableAutomaton;

/// Arithmetic formula whose free variables are exactly `letter_vars`
/// (named `k1..km`, one per letter); flow and depth variables are bound.
#[derive(Debug, Clone)]
pub struct ParikhFormula {
    pub formula: PresburgerFormula,
    pub letter_vars: Vec<String>,
}

/// Upper bound on formula nodes per unit of `|Q| + |transitions| + m`,
/// fixed by the construction below and asserted in tests.
pub const SIZE_FACTOR: usize = 60;

pub fn letter_var(j: usize) -> String {
    format!("k{}", j + 1)
}

fn y_var(t: usize) -> String {
    format!("$y{t}")
}

fn z_var(q: usize) -> String {
    format!("$z{q}")
}

fn e_var(q: usize) -> String {
    format!("$e{q}")
}

const ZF: &str = "$zf";

pub fn parikh_formula(a: &TableAutomaton) -> ParikhFormula {
    let m = a.letters.len();
    let accepting = a.accepting_states();
    let letter_vars: Vec<String> = (0..m).map(letter_var).collect();

    let mut main: Vec<PaFormula> = Vec::new();

    // exactly one selector edge into the sink; this is also the sink's
    // conservation row
    main.push(PaFormula::eq(
        Term::add(accepting.iter().map(|&q| Term::var(e_var(q))).collect()),
        Term::int(1),
    ));
    for &q in &accepting {
        main.push(PaFormula::ge(Term::var(e_var(q)), Term::int(0)));
    }
    for t in 0..a.transitions.len() {
        main.push(PaFormula::ge(Term::var(y_var(t)), Term::int(0)));
    }

    // conservation: inflow - outflow = [q = final] - [q = initial], with
    // the final-state side carried by the selector edges; self-loops cancel
    for q in 0..a.num_states {
        let mut terms = Vec::new();
        for (ti, t) in a.transitions.iter().enumerate() {
            if t.source == t.target {
                continue;
            }
            if t.target == q {
                terms.push(Term::var(y_var(ti)));
            } else if t.source == q {
                terms.push(Term::mul(-1, Term::var(y_var(ti))));
            }
        }
        if a.accepting[q] {
            terms.push(Term::mul(-1, Term::var(e_var(q))));
        }
        let rhs = if q == a.initial { -1 } else { 0 };
        main.push(PaFormula::eq(Term::add(terms), Term::int(rhs)));
    }

    // letter counts
    for (j, kv) in letter_vars.iter().enumerate() {
        let ys = a
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.letter == j)
            .map(|(ti, _)| Term::var(y_var(ti)))
            .collect();
        main.push(PaFormula::eq(Term::var(kv.clone()), Term::add(ys)));
    }

    main.push(PaFormula::eq(Term::var(z_var(a.initial)), Term::int(1)));

    // connectivity: a state either sees no inflow at all (depth 0) or is
    // entered by some flowing transition one depth step after its source
    for q in 0..a.num_states {
        if q == a.initial {
            continue;
        }
        let incoming: Vec<usize> = a
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.target == q)
            .map(|(ti, _)| ti)
            .collect();
        let mut unused = vec![PaFormula::eq(Term::var(z_var(q)), Term::int(0))];
        for &ti in &incoming {
            unused.push(PaFormula::eq(Term::var(y_var(ti)), Term::int(0)));
        }
        let mut options = vec![PaFormula::and(unused)];
        for &ti in &incoming {
            let src = a.transitions[ti].source;
            if src == q {
                continue;
            }
            options.push(PaFormula::and(vec![
                PaFormula::ge(Term::var(y_var(ti)), Term::int(1)),
                PaFormula::ge(Term::var(z_var(src)), Term::int(1)),
                PaFormula::eq(
                    Term::var(z_var(q)),
                    Term::add(vec![Term::var(z_var(src)), Term::int(1)]),
                ),
            ]));
        }
        main.push(PaFormula::or(options));
    }

    // the sink is always entered, via the chosen selector edge
    main.push(PaFormula::or(
        accepting
            .iter()
            .map(|&q| {
                PaFormula::and(vec![
                    PaFormula::ge(Term::var(e_var(q)), Term::int(1)),
                    PaFormula::ge(Term::var(z_var(q)), Term::int(1)),
                    PaFormula::eq(
                        Term::var(ZF),
                        Term::add(vec![Term::var(z_var(q)), Term::int(1)]),
                    ),
                ])
            })
            .collect(),
    ));

    let main = PaFormula::and(main);
    let matrix = if a.accepting[a.initial] {
        // the empty sequence, pinned so it is also the first model tried
        let mut eps = Vec::new();
        for kv in &letter_vars {
            eps.push(PaFormula::eq(Term::var(kv.clone()), Term::int(0)));
        }
        for t in 0..a.transitions.len() {
            eps.push(PaFormula::eq(Term::var(y_var(t)), Term::int(0)));
        }
        for q in 0..a.num_states {
            eps.push(PaFormula::eq(Term::var(z_var(q)), Term::int(0)));
        }
        eps.push(PaFormula::eq(Term::var(ZF), Term::int(0)));
        for &q in &accepting {
            eps.push(PaFormula::eq(Term::var(e_var(q)), Term::int(0)));
        }
        PaFormula::or(vec![PaFormula::and(eps), main])
    } else {
        main
    };

    let mut exists: Vec<String> = (0..a.transitions.len()).map(y_var).collect();
    exists.extend(accepting.iter().map(|&q| e_var(q)));
    exists.extend((0..a.num_states).map(z_var));
    exists.push(ZF.to_string());

    ParikhFormula { formula: PresburgerFormula::new(exists, matrix), letter_vars }
}

/// Flow read back from a model of the formula: per-transition counts, the
/// accepting state whose selector was taken (the initial state when the
/// model is the empty-sequence disjunct), and the depth values.
#[derive(Debug, Clone)]
pub struct FlowModel {
    pub y: Vec<BigInt>,
    pub final_state: usize,
    pub z: Vec<BigInt>,
}

pub fn flow_of_model(a: &TableAutomaton, model: &IntAssignment) -> Result<FlowModel> {
    let fetch = |name: String| {
        model.get(&name).cloned().ok_or(Error::MissingVariable(name))
    };
    let mut y = Vec::with_capacity(a.transitions.len());
    for t in 0..a.transitions.len() {
        y.push(fetch(y_var(t))?);
    }
    let mut z = Vec::with_capacity(a.num_states);
    for q in 0..a.num_states {
        z.push(fetch(z_var(q))?);
    }
    let mut final_state = a.initial;
    for q in a.accepting_states() {
        if fetch(e_var(q))?.is_one() {
            final_state = q;
            break;
        }
    }
    Ok(FlowModel { y, final_state, z })
}

/// An accepted letter sequence realizing the flow: an Euler trail of the
/// flow multigraph from the initial state to the chosen final state,
/// taking transitions in declaration order.
pub fn realize_path(a: &TableAutomaton, flow: &FlowModel) -> Result<Vec<usize>> {
    if flow.y.len() != a.transitions.len() {
        return Err(Error::InvalidFlow(format!(
            "{} flow counts for {} transitions",
            flow.y.len(),
            a.transitions.len()
        )));
    }
    if flow.final_state >= a.num_states {
        return Err(Error::InvalidFlow(format!(
            "final state {} out of range",
            flow.final_state
        )));
    }
    let mut remaining = Vec::with_capacity(flow.y.len());
    for v in &flow.y {
        if v.is_negative() {
            return Err(Error::InvalidFlow("negative flow count".into()));
        }
        remaining.push(
            usize::try_from(v.clone())
                .map_err(|_| Error::InvalidFlow("flow count too large to realize".into()))?,
        );
    }

    for q in 0..a.num_states {
        let mut balance: i128 = 0;
        for (ti, t) in a.transitions.iter().enumerate() {
            if t.target == q {
                balance += remaining[ti] as i128;
            }
            if t.source == q {
                balance -= remaining[ti] as i128;
            }
        }
        let expected = i128::from(q == flow.final_state) - i128::from(q == a.initial);
        if balance != expected {
            return Err(Error::InvalidFlow(format!(
                "conservation fails at state {q}"
            )));
        }
    }

    // every flowing transition must start in the part reachable from the
    // initial state through the flow's support
    let mut reach = vec![false; a.num_states];
    reach[a.initial] = true;
    let mut stack = vec![a.initial];
    while let Some(q) = stack.pop() {
        for (ti, t) in a.transitions.iter().enumerate() {
            if t.source == q && remaining[ti] > 0 && !reach[t.target] {
                reach[t.target] = true;
                stack.push(t.target);
            }
        }
    }
    if a.transitions.iter().enumerate().any(|(ti, t)| remaining[ti] > 0 && !reach[t.source]) {
        return Err(Error::InvalidFlow("flow support not connected".into()));
    }

    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); a.num_states];
    for (ti, t) in a.transitions.iter().enumerate() {
        outgoing[t.source].push(ti);
    }
    let mut cursor = vec![0usize; a.num_states];
    let mut walk: Vec<(usize, Option<usize>)> = vec![(a.initial, None)];
    let mut trail = Vec::new();
    while let Some(&(q, entered)) = walk.last() {
        while cursor[q] < outgoing[q].len() && remaining[outgoing[q][cursor[q]]] == 0 {
            cursor[q] += 1;
        }
        match outgoing[q].get(cursor[q]) {
            Some(&ti) if remaining[ti] > 0 => {
                remaining[ti] -= 1;
                walk.push((a.transitions[ti].target, Some(ti)));
            }
            _ => {
                walk.pop();
                if let Some(ti) = entered {
                    trail.push(ti);
                }
            }
        }
    }
    if remaining.iter().any(|&r| r > 0) {
        return Err(Error::InvalidFlow("flow support not connected".into()));
    }
    trail.reverse();
    Ok(trail.into_iter().map(|ti| a.transitions[ti].letter).collect())
}

/// Exact letter-count vectors of all accepted sequences of length at most
/// `len`, by breadth-first enumeration. `len` is capped at 12.
pub fn parikh_members_upto(
    a: &TableAutomaton,
    len: usize,
) -> Result<BTreeSet<Vec<usize>>> {
    if len > 12 {
        return Err(Error::BoundExceeded(format!(
            "table length {len} exceeds the enumeration cap of 12"
        )));
    }
    let m = a.letters.len();
    let mut members = BTreeSet::new();
    let mut frontier: BTreeSet<(usize, Vec<usize>)> =
        BTreeSet::from([(a.initial, vec![0; m])]);
    if a.accepting[a.initial] {
        members.insert(vec![0; m]);
    }
    for _ in 0..len {
        let mut next = BTreeSet::new();
        for (q, counts) in &frontier {
            for t in a.transitions.iter().filter(|t| t.source == *q) {
                let mut c = counts.clone();
                c[t.letter] += 1;
                if a.accepting[t.target] {
                    members.insert(c.clone());
                }
                next.insert((t.target, c));
            }
        }
        frontier = next;
    }
    Ok(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::pa_solve;
    use crate::sfa::{PropFormula, TableTransition};
    use num::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(
        num_states: usize,
        initial: usize,
        accepting: &[usize],
        trans: &[(usize, usize, usize)],
        m: usize,
    ) -> TableAutomaton {
        let mut acc = vec![false; num_states];
        for &q in accepting {
            acc[q] = true;
        }
        TableAutomaton {
            num_states,
            initial,
            accepting: acc,
            transitions: trans
                .iter()
                .map(|&(source, letter, target)| TableTransition { source, letter, target })
                .collect(),
            letters: (0..m).map(PropFormula::Var).collect(),
        }
    }

    fn two_cycle() -> TableAutomaton {
        table(2, 0, &[0], &[(0, 0, 1), (1, 0, 0)], 1)
    }

    fn self_loop() -> TableAutomaton {
        table(1, 0, &[0], &[(0, 0, 0)], 1)
    }

    fn counts_sat(rho: &ParikhFormula, counts: &[i64]) -> bool {
        assert_eq!(counts.len(), rho.letter_vars.len());
        let mut parts = vec![rho.formula.matrix.clone()];
        for (kv, &c) in rho.letter_vars.iter().zip(counts) {
            parts.push(PaFormula::eq(Term::var(kv.clone()), Term::int(c)));
        }
        let pinned =
            PresburgerFormula::new(rho.formula.exists.clone(), PaFormula::and(parts));
        pa_solve(&pinned).unwrap().is_some()
    }

    fn vectors_up_to(m: usize, total: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..m {
            out = out
                .into_iter()
                .flat_map(|v| {
                    let used: usize = v.iter().sum();
                    (0..=total - used).map(move |c| {
                        let mut w = v.clone();
                        w.push(c);
                        w
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn two_cycle_has_even_counts() {
        let a = two_cycle();
        let rho = parikh_formula(&a);
        for k in 0..=6i64 {
            assert_eq!(counts_sat(&rho, &[k]), k % 2 == 0, "k = {k}");
        }
        let members = parikh_members_upto(&a, 4).unwrap();
        let expect: BTreeSet<Vec<usize>> =
            [vec![0], vec![2], vec![4]].into_iter().collect();
        assert_eq!(members, expect);
    }

    #[test]
    fn self_loop_accepts_every_count() {
        let a = self_loop();
        let rho = parikh_formula(&a);
        for k in [0i64, 1, 2, 5] {
            assert!(counts_sat(&rho, &[k]), "k = {k}");
        }
        let members = parikh_members_upto(&a, 2).unwrap();
        let expect: BTreeSet<Vec<usize>> =
            [vec![0], vec![1], vec![2]].into_iter().collect();
        assert_eq!(members, expect);
    }

    #[test]
    fn unreachable_accepting_state_yields_nothing() {
        let a = table(2, 0, &[1], &[], 1);
        let rho = parikh_formula(&a);
        assert_eq!(pa_solve(&rho.formula).unwrap(), None);
        assert!(parikh_members_upto(&a, 5).unwrap().is_empty());
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        assert!(matches!(
            parikh_members_upto(&self_loop(), 13),
            Err(Error::BoundExceeded(_))
        ));
    }

    #[test]
    fn realize_examples() {
        let a = two_cycle();
        let flow = FlowModel {
            y: vec![BigInt::one(), BigInt::one()],
            final_state: 0,
            z: vec![BigInt::one(), BigInt::from(2)],
        };
        assert_eq!(realize_path(&a, &flow).unwrap(), vec![0, 0]);

        let empty = FlowModel {
            y: vec![BigInt::zero(), BigInt::zero()],
            final_state: 0,
            z: vec![BigInt::zero(), BigInt::zero()],
        };
        assert_eq!(realize_path(&a, &empty).unwrap(), Vec::<usize>::new());

        let loops = FlowModel {
            y: vec![BigInt::from(3)],
            final_state: 0,
            z: vec![BigInt::one()],
        };
        assert_eq!(realize_path(&self_loop(), &loops).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn realize_rejects_bad_flows() {
        let a = two_cycle();
        let unbalanced = FlowModel {
            y: vec![BigInt::one(), BigInt::zero()],
            final_state: 0,
            z: vec![BigInt::one(), BigInt::zero()],
        };
        assert!(matches!(realize_path(&a, &unbalanced), Err(Error::InvalidFlow(_))));

        // a balanced cycle nowhere reachable from the initial state
        let b = table(3, 0, &[0], &[(1, 0, 2), (2, 0, 1)], 1);
        let floating = FlowModel {
            y: vec![BigInt::one(), BigInt::one()],
            final_state: 0,
            z: vec![BigInt::one(), BigInt::zero(), BigInt::zero()],
        };
        assert!(matches!(realize_path(&b, &floating), Err(Error::InvalidFlow(_))));

        let short = FlowModel { y: vec![BigInt::one()], final_state: 0, z: vec![] };
        assert!(matches!(realize_path(&a, &short), Err(Error::InvalidFlow(_))));
    }

    #[test]
    fn model_flows_realize_to_matching_counts() {
        let a = two_cycle();
        let rho = parikh_formula(&a);
        let mut parts = vec![rho.formula.matrix.clone()];
        parts.push(PaFormula::eq(Term::var("k1"), Term::int(2)));
        let pinned =
            PresburgerFormula::new(rho.formula.exists.clone(), PaFormula::and(parts));
        let model = pa_solve(&pinned).unwrap().unwrap();
        let flow = flow_of_model(&a, &model).unwrap();
        assert_eq!(realize_path(&a, &flow).unwrap(), vec![0, 0]);
    }

    #[test]
    fn formula_size_stays_linear_on_chains() {
        for n in [5usize, 25, 50] {
            let trans: Vec<(usize, usize, usize)> =
                (0..n - 1).map(|q| (q, q % 2, q + 1)).collect();
            let a = table(n, 0, &[n - 1], &trans, 2);
            let rho = parikh_formula(&a);
            let budget = SIZE_FACTOR * (a.num_states + a.transitions.len() + a.letters.len());
            assert!(
                rho.formula.node_count() <= budget,
                "n = {n}: {} > {budget}",
                rho.formula.node_count()
            );
        }
    }

    #[test]
    fn formula_agrees_with_enumeration_on_random_automata() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9A71);
        for round in 0..5 {
            let nq = rng.random_range(2..=4);
            let m = rng.random_range(1..=3);
            let nt = rng.random_range(1..=nq + m);
            let trans: Vec<(usize, usize, usize)> = (0..nt)
                .map(|_| {
                    (
                        rng.random_range(0..nq),
                        rng.random_range(0..m),
                        rng.random_range(0..nq),
                    )
                })
                .collect();
            let accepting: Vec<usize> =
                (0..nq).filter(|_| rng.random_bool(0.4)).collect();
            let a = table(nq, 0, &accepting, &trans, m);
            let rho = parikh_formula(&a);
            let members = parikh_members_upto(&a, 6).unwrap();
            for v in vectors_up_to(m, 6) {
                let counts: Vec<i64> = v.iter().map(|&c| c as i64).collect();
                assert_eq!(
                    counts_sat(&rho, &counts),
                    members.contains(&v),
                    "round {round}, vector {v:?}, automaton {a:?}"
                );
            }
        }
    }
}
