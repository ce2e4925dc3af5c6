//! Exhaustive reference implementations used to cross-check the generators.
//!
//! These enumerate every syntactically possible rule and apply the minimality
//! definition literally. They share no enumeration code with
//! [`crate::rules`] or [`crate::inclusion`].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::inclusion::{inclusion_extends, inclusion_is_feasible, inclusion_is_valid, InclusionRule};
use crate::relation::Relation;
use crate::rules::{rule_is_feasible, rule_is_valid, Rule, RuleSet};
use crate::value::{Domain, Value};

/// Upper bound on candidate rules either oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 2_000_000;

fn subsets_of(n: usize, max_size: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..1 << n)
        .filter(move |m| (m.count_ones() as usize) <= max_size)
        .map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    choices.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect()
    })
}

/// Number of candidate membership rules the oracle would enumerate.
pub fn membership_candidates(rel: &Relation) -> u128 {
    let n = rel.arity();
    let w: Vec<u128> = rel.columns().iter().map(|d| d.len() as u128).collect();
    subsets_of(n, n - 1)
        .map(|cols| {
            let assignments: u128 = cols.iter().map(|&c| w[c]).product();
            let conclusions: u128 = (0..n).filter(|c| !cols.contains(c)).map(|c| w[c]).sum();
            assignments * conclusions
        })
        .sum()
}

/// Number of candidate inclusion rules the oracle would enumerate.
pub fn inclusion_candidates(rel: &Relation) -> u128 {
    let n = rel.arity();
    let w: Vec<u128> = rel.columns().iter().map(|d| d.len() as u128).collect();
    let proj: Vec<u32> = (0..n)
        .map(|c| rel.column_values(c).expect("column in range").len() as u32)
        .collect();
    subsets_of(n, n - 1)
        .map(|cols| {
            let sets: u128 = cols
                .iter()
                .map(|&c| 2u128.saturating_pow(proj[c]).saturating_sub(1))
                .product();
            let conclusions: u128 = (0..n).filter(|c| !cols.contains(c)).map(|c| w[c]).sum();
            sets.saturating_mul(conclusions)
        })
        .sum()
}

fn guard(what: &'static str, size: u128) -> Result<()> {
    if size > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            what,
            size,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// Every rule over the declared column domains that is valid, feasible and
/// has no valid proper generalisation (a rule on a strict sub-premise).
pub fn brute_force_minimal_rules(rel: &Relation) -> Result<RuleSet> {
    guard("membership oracle search space", membership_candidates(rel))?;
    let n = rel.arity();
    let mut rules = Vec::new();
    for cols in subsets_of(n, n - 1) {
        let choices: Vec<Vec<Value>> = cols.iter().map(|&c| rel.column(c).values().to_vec()).collect();
        for s in product(&choices) {
            let premise: Vec<(usize, Value)> = cols.iter().copied().zip(s).collect();
            for y in (0..n).filter(|y| !cols.contains(y)) {
                for a in rel.column(y) {
                    let r = Rule::new(premise.clone(), y, a.clone());
                    if !rule_is_valid(rel, &r) || !rule_is_feasible(rel, &r) {
                        continue;
                    }
                    let k = premise.len();
                    let has_valid_generalisation = (0u64..(1 << k) - 1).any(|keep| {
                        let sub: Vec<(usize, Value)> = premise
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| keep >> i & 1 == 1)
                            .map(|(_, p)| p.clone())
                            .collect();
                        rule_is_valid(rel, &Rule::new(sub, y, a.clone()))
                    });
                    if !has_valid_generalisation {
                        rules.push(r);
                    }
                }
            }
        }
    }
    Ok(RuleSet {
        relation: rel.name().to_string(),
        rules,
    })
}

/// Every inclusion rule whose premise sets are nonempty subsets of the column
/// projections (full projections included), kept when valid, feasible and not
/// a proper extension of another valid rule under pairwise comparison.
pub fn brute_force_minimal_inclusion_rules(rel: &Relation) -> Result<Vec<InclusionRule>> {
    guard("inclusion oracle search space", inclusion_candidates(rel))?;
    let n = rel.arity();
    let projections: Vec<Domain> = (0..n).map(|c| rel.column_values(c)).collect::<Result<_>>()?;
    let nonempty_subsets = |d: &Domain| -> Vec<Domain> {
        (1u64..1 << d.len())
            .map(|m| d.filter({
                let mut i = 0;
                move |_| {
                    i += 1;
                    m >> (i - 1) & 1 == 1
                }
            }))
            .collect()
    };

    let mut valid: HashMap<(usize, Value), Vec<InclusionRule>> = HashMap::new();
    for cols in subsets_of(n, n - 1) {
        let choices: Vec<Vec<Domain>> = cols.iter().map(|&c| nonempty_subsets(&projections[c])).collect();
        for sets in product(&choices) {
            let premise: Vec<(usize, Domain)> = cols.iter().copied().zip(sets).collect();
            for y in (0..n).filter(|y| !cols.contains(y)) {
                for a in rel.column(y) {
                    let r = InclusionRule::new(premise.clone(), y, a.clone());
                    if inclusion_is_valid(rel, &r) {
                        valid.entry((y, a.clone())).or_default().push(r);
                    }
                }
            }
        }
    }

    let mut out = Vec::new();
    for group in valid.values() {
        for r in group {
            if !inclusion_is_feasible(rel, r) {
                continue;
            }
            let properly_extends = group.iter().any(|o| o != r && inclusion_extends(r, o));
            if !properly_extends {
                out.push(r.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::inclusion::generate_inclusion_rules;
    use crate::rules::generate_rules;
    use std::collections::HashSet;

    #[test]
    fn and_oracle_matches_generator() {
        let and = catalogue::builtin("and").unwrap();
        let oracle: HashSet<Rule> = brute_force_minimal_rules(&and).unwrap().rules.into_iter().collect();
        let gen: HashSet<Rule> = generate_rules(&and, 2).rules.into_iter().collect();
        assert_eq!(oracle.len(), 7);
        assert_eq!(oracle, gen);
    }

    #[test]
    fn empty_relation() {
        let and = catalogue::builtin("and").unwrap();
        let empty = Relation::new("e", and.columns().to_vec(), vec![]).unwrap();
        assert!(brute_force_minimal_rules(&empty).unwrap().is_empty());
        assert!(brute_force_minimal_inclusion_rules(&empty).unwrap().is_empty());
    }

    #[test]
    fn single_tuple_relation() {
        let r = Relation::from_table("s", &["0", "1", "2"], 2, &[&["0", "1"]]);
        let rules = brute_force_minimal_rules(&r).unwrap().rules;
        assert!(rules.iter().all(|r| r.premise.is_empty()));
        let got: HashSet<(usize, &str)> = rules.iter().map(|r| (r.column, r.value.as_str())).collect();
        let expected: HashSet<(usize, &str)> = [(0, "1"), (0, "2"), (1, "0"), (1, "2")].into_iter().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn fork_inclusion_oracle() {
        let fork = catalogue::builtin("fork").unwrap();
        let oracle: HashSet<InclusionRule> = brute_force_minimal_inclusion_rules(&fork).unwrap().into_iter().collect();
        let gen: HashSet<InclusionRule> = generate_inclusion_rules(&fork, 2).unwrap().rules.into_iter().collect();
        assert_eq!(oracle, gen);
    }

    #[test]
    fn guards_large_tables() {
        let wide = Relation::new(
            "w",
            vec![Domain::new((0..40).map(|i| Value::from(i.to_string().as_str())).collect()).unwrap(); 5],
            vec![],
        )
        .unwrap();
        assert!(matches!(brute_force_minimal_rules(&wide), Err(Error::TooLarge { .. })));
    }
}
