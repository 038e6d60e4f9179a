mod common;

use ballmodal::syntax::{generate_corpus, parse, Formula};
use proptest::prelude::*;

/// Number of formulas with exactly `s` connectives over `k` variables,
/// built from one binary and three unary connectives.
fn corpus_count(k: usize, max: usize) -> Vec<usize> {
    let mut c = vec![k];
    for s in 1..=max {
        let binary: usize = (0..s).map(|a| c[a] * c[s - 1 - a]).sum();
        c.push(3 * c[s - 1] + binary);
    }
    c
}

#[test]
fn corpus_sizes_match_recurrence() {
    for (vars, max) in [(&["p"][..], 3), (&["p", "q"][..], 4)] {
        let corpus = generate_corpus(vars, max);
        let expected = corpus_count(vars.len(), max);
        for (s, &n) in expected.iter().enumerate() {
            let got = corpus.iter().filter(|f| f.connective_count() == s).count();
            assert_eq!(got, n, "{vars:?} size {s}");
        }
        assert_eq!(corpus.len(), expected.iter().sum::<usize>());
    }
    assert_eq!(corpus_count(1, 3), vec![1, 4, 20, 116]);
}

#[test]
fn corpus_is_sorted_and_duplicate_free() {
    let corpus = generate_corpus(&["p", "q"], 3);
    let keys: Vec<(usize, String)> = corpus
        .iter()
        .map(|f| (f.connective_count(), f.to_string()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(keys, sorted);
}

#[test]
fn precedence_and_associativity() {
    let f = |s: &str| parse(s).unwrap();
    assert_eq!(f("p & q | r"), Formula::or(f("p & q"), f("r")));
    assert_eq!(f("p -> q -> r"), f("p -> (q -> r)"));
    assert_eq!(f("p | q ^ r"), f("p | (q ^ r)"));
    assert_eq!(f("~p & q"), Formula::and(f("~p"), f("q")));
    assert_eq!(f("[]p -> p"), Formula::or(f("~[]p"), f("p")));
    assert_eq!(f("p <-> q"), f("(p -> q) & (q -> p)"));
    assert_eq!(f("□p ∧ ◇q"), f("[]p & <>q"));
}

proptest! {
    #[test]
    fn print_parse_round_trip(g in common::formula()) {
        prop_assert_eq!(parse(&g.to_string()).unwrap(), g.clone());
        prop_assert_eq!(parse(&g.to_unicode()).unwrap(), g);
    }

    #[test]
    fn printing_is_stable(g in common::formula()) {
        let once = g.to_string();
        prop_assert_eq!(parse(&once).unwrap().to_string(), once);
    }

    #[test]
    fn ball_substitution_keeps_shape(g in common::formula()) {
        let s = g.ball_substitution();
        prop_assert_eq!(s.connective_count(), g.connective_count() + g.var_occurrences());
        prop_assert_eq!(s.vars(), g.vars());
    }
}
