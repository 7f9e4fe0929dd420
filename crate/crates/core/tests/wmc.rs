mod common;

use common::{dnf_holds, dnf_probability, random_dnf, rng};
use plp_bounds::wmc::{bounds, ExplanationDnf};
use proptest::prelude::*;

fn cube_probability(probs: &[f64], term: &[(u32, bool)]) -> f64 {
    let mut seen: Vec<(u32, bool)> = term.to_vec();
    seen.sort();
    seen.dedup();
    if seen.windows(2).any(|w| w[0].0 == w[1].0) {
        return 0.0;
    }
    seen.iter()
        .map(|&(v, val)| if val { probs[v as usize] } else { 1.0 - probs[v as usize] })
        .product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn count_matches_enumeration(seed in any::<u64>()) {
        let (probs, terms) = random_dnf(&mut rng(seed), 15);
        let mut dnf = ExplanationDnf::new(probs.clone());
        let mut last = 0.0;
        for t in &terms {
            let p = dnf.add_explanation(t);
            // adding a disjunct never loses probability
            prop_assert!(p >= last - 1e-12);
            // at least the new term, at most the sum of all terms so far
            prop_assert!(p >= cube_probability(&probs, t) - 1e-12);
            last = p;
        }
        let union: f64 = terms.iter().map(|t| cube_probability(&probs, t)).sum();
        prop_assert!(dnf.probability() <= union + 1e-12);
        prop_assert!((dnf.probability() - dnf_probability(&probs, &terms)).abs() < 1e-9);
    }

    #[test]
    fn diagram_agrees_with_terms_on_every_world(seed in any::<u64>()) {
        let (probs, terms) = random_dnf(&mut rng(seed), 8);
        let mut dnf = ExplanationDnf::new(probs.clone());
        for t in &terms {
            dnf.add_explanation(t);
        }
        let n = probs.len();
        for m in 0..1u64 << n {
            let world: Vec<bool> = (0..n).map(|i| (m >> i) & 1 == 1).collect();
            prop_assert_eq!(dnf.bdd().eval(dnf.root(), &world), dnf_holds(&terms, &world));
        }
    }

    #[test]
    fn insertion_order_does_not_matter(seed in any::<u64>()) {
        let (probs, terms) = random_dnf(&mut rng(seed), 12);
        let mut forward = ExplanationDnf::new(probs.clone());
        let mut backward = ExplanationDnf::new(probs.clone());
        for t in &terms {
            forward.add_explanation(t);
        }
        for t in terms.iter().rev() {
            backward.add_explanation(t);
        }
        prop_assert!((forward.probability() - backward.probability()).abs() < 1e-12);
    }
}

#[test]
fn empty_sides_give_the_trivial_interval() {
    let q = ExplanationDnf::new(vec![0.3, 0.6]);
    let nq = ExplanationDnf::new(vec![0.3, 0.6]);
    assert_eq!(bounds(&q, &nq), (0.0, 1.0));
}
