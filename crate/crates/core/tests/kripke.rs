mod common;

use std::collections::BTreeMap;

use ballmodal::algebra::{LatticeId, Ultrafilter};
use ballmodal::kripke::{
    countermodel_search, frame_valid, Frame, Limits, Model, ModelDocument, SearchOutcome,
};
use ballmodal::syntax::{parse, Formula};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = Model> {
    (1usize..=3).prop_flat_map(|n| {
        (
            prop::collection::vec(0usize..3, n),
            0u64..(1 << (n * n)),
            prop::collection::vec(0usize..4, 3 * n),
            0usize..3,
        )
            .prop_map(move |(labels, mask, picks, u)| {
                let lattices: Vec<LatticeId> = labels
                    .iter()
                    .map(|&i| LatticeId::from_index(i).unwrap())
                    .collect();
                let edges: Vec<(usize, usize)> = (0..n * n)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| (b / n, b % n))
                    .collect();
                let mut valuation = BTreeMap::new();
                for (k, var) in ["p", "q", "r"].into_iter().enumerate() {
                    let values = (0..n)
                        .map(|w| lattices[w].carrier()[picks[k * n + w]])
                        .collect();
                    valuation.insert(var.to_string(), values);
                }
                let frame = Frame::with_default_names(lattices, &edges).unwrap();
                Model::new(frame, valuation, Ultrafilter::ALL[u]).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn diamond_is_dual_box(m in model(), f in common::formula()) {
        let dual = Formula::not(Formula::boxed(Formula::not(f.clone())));
        prop_assert_eq!(m.eval_all(&Formula::diamond(f)).unwrap(), m.eval_all(&dual).unwrap());
    }

    #[test]
    fn box_distributes_over_meet(m in model(), f in common::formula(), g in common::formula()) {
        let lhs = m.eval_all(&Formula::boxed(Formula::and(f.clone(), g.clone()))).unwrap();
        let bf = m.eval_all(&Formula::boxed(f)).unwrap();
        let bg = m.eval_all(&Formula::boxed(g)).unwrap();
        let rhs: Vec<_> = bf.iter().zip(&bg).map(|(a, b)| a.meet(*b)).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn values_lie_in_the_world_carrier(m in model(), f in common::formula()) {
        for (w, v) in m.eval_all(&f).unwrap().into_iter().enumerate() {
            prop_assert!(m.frame().lattice(w).contains(v));
        }
    }

    #[test]
    fn values_do_not_depend_on_the_ultrafilter(m in model(), f in common::formula()) {
        let base = m.eval_all(&f).unwrap();
        for u in Ultrafilter::ALL {
            prop_assert_eq!(&m.clone().with_ultrafilter(u).eval_all(&f).unwrap(), &base);
        }
    }

    #[test]
    fn documents_round_trip(m in model()) {
        let doc = m.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back: ModelDocument = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.to_model().unwrap(), m);
    }
}

#[test]
fn non_normal_witness() {
    let outcome = countermodel_search(
        &[parse("p").unwrap()],
        &parse("[]p").unwrap(),
        2,
        &Ultrafilter::ALL,
        &Limits::default(),
    )
    .unwrap();
    let SearchOutcome::Found { model, world } = outcome else {
        panic!("expected a countermodel");
    };
    assert!(model.model_valid(&parse("p").unwrap()).unwrap());
    assert!(!model.satisfies(world, &parse("[]p").unwrap()).unwrap());
}

#[test]
fn search_reports_first_model_in_enumeration_order() {
    let goal = parse("p").unwrap();
    let SearchOutcome::Found { model, world } =
        countermodel_search(&[], &goal, 1, &[Ultrafilter::E1], &Limits::default()).unwrap()
    else {
        panic!("p is not valid");
    };
    assert_eq!(model.frame().index(), 0);
    assert_eq!(world, 0);
    assert_eq!(
        model.value(0, "p"),
        Some(ballmodal::algebra::Element8::ZERO)
    );
}

#[test]
fn dead_ends_make_box_true_and_diamond_false() {
    let frame = Frame::with_default_names(vec![LatticeId::B], &[]).unwrap();
    for f in ["[]F", "[=]F", "[-]F"] {
        assert!(
            frame_valid(
                &frame,
                &parse(f).unwrap(),
                Ultrafilter::E1,
                &Limits::default()
            )
            .unwrap()
            .valid
        );
    }
    let diamond = frame_valid(
        &frame,
        &parse("<>T").unwrap(),
        Ultrafilter::E1,
        &Limits::default(),
    )
    .unwrap();
    assert!(!diamond.valid);
}
