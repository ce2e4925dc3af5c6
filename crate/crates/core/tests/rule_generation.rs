mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rulegen::chr::{emit_chr_inclusion, emit_chr_membership, VarNaming};
use rulegen::inclusion::{inclusion_is_feasible, inclusion_is_valid};
use rulegen::oracle::{brute_force_minimal_inclusion_rules, brute_force_minimal_rules};
use rulegen::rules::{rule_is_feasible, rule_is_valid};
use rulegen::{generate_inclusion_rules, generate_rules, merge_by_premise, native, Rule};

fn set<T: std::hash::Hash + Eq + Clone>(v: &[T]) -> HashSet<T> {
    v.iter().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn membership_matches_oracle(rel in common::relation(4, 4)) {
        let gen = generate_rules(&rel, rel.arity() - 1).rules;
        let oracle = brute_force_minimal_rules(&rel).unwrap().rules;
        prop_assert_eq!(gen.len(), set(&gen).len());
        prop_assert_eq!(set(&gen), set(&oracle));
    }

    #[test]
    fn inclusion_matches_oracle_ternary(rel in common::relation(3, 4)) {
        let gen = generate_inclusion_rules(&rel, rel.arity() - 1).unwrap().rules;
        let oracle = brute_force_minimal_inclusion_rules(&rel).unwrap();
        prop_assert_eq!(gen.len(), set(&gen).len());
        prop_assert_eq!(set(&gen), set(&oracle));
    }

    #[test]
    fn inclusion_matches_oracle_quaternary(rel in common::relation(4, 3)) {
        let gen = generate_inclusion_rules(&rel, rel.arity() - 1).unwrap().rules;
        let oracle = brute_force_minimal_inclusion_rules(&rel).unwrap();
        prop_assert_eq!(set(&gen), set(&oracle));
    }

    #[test]
    fn generated_rules_are_valid_and_feasible(rel in common::relation(4, 4)) {
        for r in generate_rules(&rel, rel.arity() - 1).rules {
            prop_assert!(r.is_well_formed(&rel));
            prop_assert!(rule_is_valid(&rel, &r) && rule_is_feasible(&rel, &r));
        }
        for r in generate_inclusion_rules(&rel, rel.arity() - 1).unwrap().rules {
            prop_assert!(r.is_well_formed(&rel));
            prop_assert!(inclusion_is_valid(&rel, &r) && inclusion_is_feasible(&rel, &r));
        }
    }

    #[test]
    fn premise_cutoff_filters_full_set(rel in common::relation(4, 3), k in 0usize..4) {
        let full = generate_rules(&rel, rel.arity() - 1).rules;
        let cut = generate_rules(&rel, k).rules;
        let expected: Vec<Rule> = full.into_iter().filter(|r| r.premise.len() <= k).collect();
        prop_assert_eq!(cut, expected);

        let full = generate_inclusion_rules(&rel, rel.arity() - 1).unwrap().rules;
        let cut = generate_inclusion_rules(&rel, k).unwrap().rules;
        let expected: Vec<_> = full.into_iter().filter(|r| r.premise.len() <= k).collect();
        prop_assert_eq!(cut, expected);
    }

    #[test]
    fn membership_rules_specialise_inclusion_rules(rel in common::relation(3, 4)) {
        // every minimal membership rule extends some minimal inclusion rule
        let incl = generate_inclusion_rules(&rel, rel.arity() - 1).unwrap().rules;
        for r in generate_rules(&rel, rel.arity() - 1).rules {
            let covered = incl.iter().any(|i| {
                i.column == r.column
                    && i.value == r.value
                    && i.premise.iter().all(|(c, s)| r.premise.iter().any(|(pc, v)| pc == c && s.contains(v)))
            });
            prop_assert!(covered, "{:?}", r);
        }
    }

    #[test]
    fn merging_partitions_rules(rel in common::relation(4, 3)) {
        let rules = generate_rules(&rel, rel.arity() - 1).rules;
        let groups = merge_by_premise(&rel, &rules);
        let premises: HashSet<_> = groups.iter().map(|g| g.premise.clone()).collect();
        prop_assert_eq!(premises.len(), groups.len());
        let flat: Vec<Rule> = groups
            .iter()
            .flat_map(|g| g.conclusions.iter().map(|(c, v)| Rule::new(g.premise.clone(), *c, v.clone())))
            .collect();
        prop_assert_eq!(flat.len(), rules.len());
        prop_assert_eq!(set(&flat), set(&rules));
    }

    #[test]
    fn native_round_trip(rel in common::relation(4, 4)) {
        let rules = generate_rules(&rel, rel.arity() - 1).rules;
        prop_assert_eq!(&native::parse_rules(&rel, &native::render_rules(&rel, &rules, false)).unwrap(), &rules);
        let merged = native::parse_rules(&rel, &native::render_rules(&rel, &rules, true)).unwrap();
        prop_assert_eq!(set(&merged), set(&rules));
    }

    #[test]
    fn native_inclusion_round_trip(rel in common::relation(3, 4)) {
        let rules = generate_inclusion_rules(&rel, rel.arity() - 1).unwrap().rules;
        let text = native::render_inclusion_rules(&rel, &rules, false);
        prop_assert_eq!(&native::parse_inclusion_rules(&rel, &text).unwrap(), &rules);
        let merged = native::render_inclusion_rules(&rel, &rules, true);
        prop_assert_eq!(set(&native::parse_inclusion_rules(&rel, &merged).unwrap()), set(&rules));
    }

    #[test]
    fn chr_lines_are_distinct(rel in common::relation(4, 4)) {
        let rules = generate_rules(&rel, rel.arity() - 1).rules;
        let groups = merge_by_premise(&rel, &rules);
        for naming in [VarNaming::Sequential, VarNaming::ByColumn] {
            let text = emit_chr_membership(&rel, &groups, naming).unwrap();
            let lines: HashSet<&str> = text.lines().collect();
            prop_assert_eq!(lines.len(), groups.len());
        }
        let rules = generate_inclusion_rules(&rel, rel.arity() - 1).unwrap().rules;
        let groups = merge_by_premise(&rel, &rules);
        let text = emit_chr_inclusion(&rel, &groups, VarNaming::Sequential).unwrap();
        prop_assert_eq!(text.lines().collect::<HashSet<_>>().len(), groups.len());
    }
}

