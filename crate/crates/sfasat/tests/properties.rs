//! Randomized laws. These pin the contracts the solver leans on:
//! predicate operations mirror the Boolean connectives pointwise,
//! minterms partition the domain, the propositional table accepts
//! exactly the words the symbolic machine accepts, and models coming
//! out of a solver satisfy the formula they were solved from.

use num::BigInt;
use proptest::prelude::*;
use sfasat::algebra::{parse_predicate, AlgebraId, DomainElement, Predicate};
use sfasat::harness::{random_bapa, random_sfa, seeded};
use sfasat::presburger::{pa_eval, pa_solve, PaFormula, PresburgerFormula, Term};
use sfasat::qfbapa::{certificate_of, eval_bapa, qfbapa_solve, qfbapa_verify, sparsity_bound};
use sfasat::sfa::{propositionalize, GeneratorSet, Minterm};

fn lia(text: &str) -> Predicate {
    parse_predicate(text, AlgebraId::Lia).unwrap()
}

fn arb_atom_text() -> impl Strategy<Value = String> {
    let cmp = prop_oneof![
        Just("<"),
        Just("<="),
        Just("=="),
        Just(">="),
        Just(">"),
        Just("!=")
    ];
    prop_oneof![
        (1i64..=3, -3i64..=3, cmp, -4i64..=4).prop_map(|(c, o, cmp, k)| match o {
            0 => format!("{c}*x {cmp} {k}"),
            o if o > 0 => format!("{c}*x + {o} {cmp} {k}"),
            o => format!("{c}*x - {} {cmp} {k}", -o),
        }),
        (2i64..=4, 0i64..=3).prop_map(|(m, r)| format!("x % {m} == {}", r % m)),
    ]
}

fn arb_predicate() -> impl Strategy<Value = Predicate> {
    arb_atom_text().prop_map(|t| lia(&t)).prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(p, q)| p.and(&q).unwrap()),
            (inner.clone(), inner.clone()).prop_map(|(p, q)| p.or(&q).unwrap()),
            inner.prop_map(|p| p.not()),
        ]
    })
}

fn arb_pa_atom() -> impl Strategy<Value = PaFormula> {
    let vars = ["x", "y", "z"];
    let linear = (prop::collection::vec((-3i64..=3, 0usize..3), 1..=3), -6i64..=6, any::<bool>())
        .prop_map(move |(coeffs, k, eq)| {
            let terms =
                coeffs.into_iter().map(|(c, v)| Term::mul(c, Term::var(vars[v]))).collect();
            let lhs = Term::add(terms);
            if eq {
                PaFormula::eq(lhs, Term::int(k))
            } else {
                PaFormula::le(lhs, Term::int(k))
            }
        });
    let dvd = (2i64..=4, 0usize..3, -2i64..=2).prop_map(move |(m, v, o)| {
        PaFormula::Dvd(BigInt::from(m), Term::add(vec![Term::var(vars[v]), Term::int(o)]))
    });
    prop_oneof![4 => linear, 1 => dvd]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn predicate_connectives_act_pointwise(
        p in arb_predicate(),
        q in arb_predicate(),
        x in -12i64..=12,
    ) {
        let e = DomainElement::Int(x);
        let pv = p.evaluate(&e).unwrap();
        let qv = q.evaluate(&e).unwrap();
        prop_assert_eq!(p.and(&q).unwrap().evaluate(&e).unwrap(), pv && qv);
        prop_assert_eq!(p.or(&q).unwrap().evaluate(&e).unwrap(), pv || qv);
        prop_assert_eq!(p.not().evaluate(&e).unwrap(), !pv);
        prop_assert_eq!(p.not().not().evaluate(&e).unwrap(), pv);
        let de_morgan = p.not().or(&q.not()).unwrap();
        prop_assert_eq!(
            p.and(&q).unwrap().not().evaluate(&e).unwrap(),
            de_morgan.evaluate(&e).unwrap()
        );
        match p.is_satisfiable() {
            Some(w) => prop_assert!(p.evaluate(&w).unwrap()),
            None => prop_assert!(!pv),
        }
    }

    #[test]
    fn minterms_partition_the_domain(
        texts in prop::collection::vec(arb_atom_text(), 1..=4),
        x in -12i64..=12,
    ) {
        let entries =
            texts.iter().enumerate().map(|(i, t)| (format!("g{i}"), lia(t))).collect();
        let gens = GeneratorSet::new(AlgebraId::Lia, entries).unwrap();
        let e = DomainElement::Int(x);
        let home = gens.minterm_of(&e).unwrap();
        for i in 0..gens.len() {
            prop_assert_eq!(home.bit(i), gens.predicate(i).evaluate(&e).unwrap());
        }
        let mut covering = 0;
        for idx in 0..(1usize << gens.len()) {
            let m = Minterm::from_index(gens.len(), idx);
            if gens.minterm_predicate(&m).unwrap().evaluate(&e).unwrap() {
                covering += 1;
                prop_assert_eq!(&m, &home);
            }
        }
        prop_assert_eq!(covering, 1);
    }

    #[test]
    fn tables_accept_exactly_the_machine_words(
        seed in any::<u64>(),
        word in prop::collection::vec(-6i64..=6, 0..5),
    ) {
        let sfa = random_sfa(&mut seeded(seed));
        let word: Vec<DomainElement> = word.into_iter().map(DomainElement::Int).collect();
        let (gens, table) = propositionalize(&sfa);
        let t = gens.table_of(&word).unwrap();
        prop_assert_eq!(sfa.accepts(&word).unwrap(), table.accepts_table(&t));
    }

    #[test]
    fn arithmetic_models_satisfy_their_formula(
        atoms in prop::collection::vec(arb_pa_atom(), 1..=4),
    ) {
        let f = PresburgerFormula::new(Vec::new(), PaFormula::and(atoms));
        if let Some(model) = pa_solve(&f).unwrap() {
            prop_assert!(pa_eval(&f, &model).unwrap());
            prop_assert_eq!(pa_solve(&f).unwrap(), Some(model));
        }
    }

    #[test]
    fn bapa_models_and_certificates_check_out(seed in any::<u64>()) {
        let f = random_bapa(&mut seeded(seed));
        let solved = qfbapa_solve(&f).unwrap();
        if let Some(model) = &solved {
            prop_assert!(model.is_consistent());
            prop_assert!(eval_bapa(&f, model).unwrap());
            let cert = certificate_of(&f).unwrap().expect("solver found a model");
            prop_assert!(qfbapa_verify(&f, &cert));
        }
        prop_assert_eq!(qfbapa_solve(&f).unwrap(), solved);
    }

    #[test]
    fn sparsity_bound_is_monotone(
        p in 0usize..16,
        dp in 0usize..8,
        a in 0u32..1000,
        da in 0u32..1000,
    ) {
        let base = sparsity_bound(p, &BigInt::from(a));
        prop_assert!(base >= 1);
        prop_assert!(sparsity_bound(p + dp, &BigInt::from(a)) >= base);
        prop_assert!(sparsity_bound(p, &BigInt::from(a + da)) >= base);
    }
}
