//! Invariants spanning several modules, checked on generated inputs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pseudospace::oracle::{random_reduced, random_script, random_word, rerun_case, run_suite_with};
use pseudospace::{flags, ColoredSpace, Exec, SuiteConfig, Word};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn words_print_and_parse_back(seed in any::<u64>(), n in 1usize..=4) {
        let u = random_word(&mut rng(seed), n, 8);
        prop_assert_eq!(Word::parse(&u.to_string(), n).unwrap(), u);
    }

    #[test]
    fn reduction_is_associative(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (a, b, c) = (random_word(&mut r, n, 4), random_word(&mut r, n, 4), random_word(&mut r, n, 4));
        let left = a.concat_reduce(&b).unwrap().concat_reduce(&c).unwrap();
        let right = a.concat_reduce(&b.concat_reduce(&c).unwrap()).unwrap();
        prop_assert!(left.equivalent(&right));
        prop_assert!(left.equivalent(&a.concat(&b).unwrap().concat(&c).unwrap().reduce()));
    }

    #[test]
    fn inverse_swaps_stabilizers(seed in any::<u64>(), n in 1usize..=4) {
        let u = random_reduced(&mut rng(seed), n, 6);
        prop_assert_eq!(u.inverse().inverse(), u.clone());
        prop_assert_eq!(u.inverse().left_stabilizer(), u.right_stabilizer());
        prop_assert!(u.inverse().is_reduced());
    }

    #[test]
    fn reversed_paths_spell_the_inverse(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (_, m) = random_script(&mut r, n, 8);
        let all = flags::enumerate_flags(&m, None);
        let (f, g) = (&all[seed as usize % all.len()], &all[(seed / 7) as usize % all.len()]);
        let there = flags::flag_path(&m, f, g).unwrap();
        let back = flags::flag_path(&m, g, f).unwrap();
        prop_assert!(back.word.equivalent(&there.word.inverse()));
        prop_assert!(there.reduced && back.reduced);
    }

    #[test]
    fn spaces_survive_json(seed in any::<u64>(), n in 1usize..=3) {
        let (script, m) = random_script(&mut rng(seed), n, 8);
        let text = serde_json::to_string(&script).unwrap();
        prop_assert_eq!(ColoredSpace::from_script_json(&text).unwrap(), m.clone());
        let export = m.to_json().to_string();
        prop_assert_eq!(ColoredSpace::load_json(&export).unwrap(), m);
    }
}

#[test]
fn reports_do_not_depend_on_the_executor() {
    for suite in ["words-order", "flags-paths"] {
        let cfg = SuiteConfig::new(suite).seed(3).cases(40);
        let a = run_suite_with(&cfg, Exec::Sequential).unwrap();
        let b = run_suite_with(&cfg, Exec::Parallel).unwrap();
        assert_eq!(a.laws, b.laws);
        assert_eq!(a.failures, b.failures);
        assert!(rerun_case(&cfg, 17).unwrap().is_empty());
    }
}

#[test]
fn rerun_rejects_cases_out_of_range() {
    let cfg = SuiteConfig::new("ranks").cases(5);
    assert_eq!(
        rerun_case(&cfg, 5).unwrap_err().code(),
        "precondition-violated"
    );
}
