use disconnect::graph::ChemGraph;
use disconnect::normalize::{canonical_form, check_normal_form, to_normal_form};
use disconnect::oracle::random_term;
use disconnect::semantics::{functor_image, functor_image_stepwise};
use disconnect::term::{Term, TypedTerm};
use disconnect::text::parse_graph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SOURCES: [&str; 3] = [
    "graph water\nv o O 0\nv h1 H 0\nv h2 H 0\ne o h1 1\ne o h2 1\n",
    "graph salt\nv na Na 1\nv cl Cl -1\ne na cl ionic\n",
    "graph methanol_radical\nv c C 0\nv o O 0\nv h H 0\nv h1 H 0\nv h2 H 0\nv a * 0\ne c o 1\ne o h 1\ne c h1 1\ne c h2 1\ne c a 1\n",
];

fn source(k: usize) -> ChemGraph {
    parse_graph(SOURCES[k]).unwrap().graph
}

fn term(k: usize, seed: u64, len: usize) -> TypedTerm {
    random_term(&mut ChaCha8Rng::seed_from_u64(seed), &source(k), len)
}

fn typed_term() -> impl Strategy<Value = TypedTerm> {
    (0..SOURCES.len(), any::<u64>(), 0usize..=12).prop_map(|(k, seed, len)| term(k, seed, len))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(t in typed_term()) {
        let printed = t.term().to_string();
        let back = Term::parse(&printed).unwrap();
        if t.is_empty() {
            prop_assert_eq!(back.to_string(), "id");
        } else {
            prop_assert_eq!(back, t.term());
        }
    }

    #[test]
    fn bar_is_an_involution(t in typed_term()) {
        prop_assert_eq!(t.bar().bar().term(), t.term());
        let b = t.bar();
        prop_assert_eq!(b.source(), t.target());
    }

    #[test]
    fn rule_inversion_round_trips(t in typed_term()) {
        for (k, a) in t.atoms().iter().enumerate() {
            if let Some(r) = a.rule() {
                let back = r.invert().apply(&t.graphs()[k + 1]).unwrap();
                prop_assert_eq!(&back, &t.graphs()[k]);
                prop_assert_eq!(r.invert().invert(), r.clone());
            }
        }
    }

    #[test]
    fn image_of_bar_is_dagger(t in typed_term()) {
        prop_assert_eq!(functor_image_stepwise(&t.bar()), functor_image_stepwise(&t).dagger());
        prop_assert_eq!(functor_image(&t).dagger().dagger(), functor_image(&t));
    }

    #[test]
    fn image_is_functorial(t in typed_term(), cut in any::<prop::sample::Index>()) {
        let k = cut.index(t.len() + 1);
        let first = TypedTerm::elaborate(t.atoms()[..k].to_vec(), t.source().clone()).unwrap();
        let second = TypedTerm::elaborate(t.atoms()[k..].to_vec(), first.target().clone()).unwrap();
        let composed = functor_image_stepwise(&first).compose(&functor_image_stepwise(&second)).unwrap();
        prop_assert_eq!(&composed, &functor_image_stepwise(&t));
        prop_assert_eq!(composed, functor_image(&t));
    }

    #[test]
    fn normal_form_is_stable(t in typed_term()) {
        let nf = to_normal_form(&t).unwrap();
        prop_assert!(check_normal_form(nf.term()).is_ok());
        prop_assert_eq!(functor_image(nf.term()), functor_image(&t));
        let again = to_normal_form(nf.term()).unwrap();
        prop_assert!(check_normal_form(again.term()).is_ok());
        prop_assert_eq!(canonical_form(again.term()).unwrap().term().term(), canonical_form(&t).unwrap().term().term());
    }
}
