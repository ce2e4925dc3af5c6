//! Inclusion rules `X ⊆ S -> y != a`, weak assignments and the generator.
//!
//! Premise sets are nonempty proper subsets of the values a column actually
//! uses. Inside the generator they are bitmasks over those values, so a
//! column may use at most 63 distinct values.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::rules::PremiseRule;
use crate::value::{Domain, Value};

/// Widest column projection the mask-based enumeration supports.
pub const MAX_PROJECTION: usize = 63;

/// `premise -> column != value`: when each premise variable's domain is a
/// subset of its set, `value` is removed from the conclusion variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InclusionRule {
    pub premise: Vec<(usize, Domain)>,
    pub column: usize,
    pub value: Value,
}

impl InclusionRule {
    pub fn new(premise: Vec<(usize, Domain)>, column: usize, value: Value) -> Self {
        InclusionRule {
            premise,
            column,
            value,
        }
    }

    pub fn is_well_formed(&self, rel: &Relation) -> bool {
        let n = rel.arity();
        self.column < n
            && rel.column(self.column).contains(&self.value)
            && self.premise.windows(2).all(|w| w[0].0 < w[1].0)
            && self.premise.iter().all(|(c, s)| {
                *c < n && *c != self.column && !s.is_empty() && s.is_subset_of(rel.column(*c))
            })
    }

    fn matches(&self, t: &[Value]) -> bool {
        self.premise.iter().all(|(c, s)| s.contains(&t[*c]))
    }

    /// True when every premise set is a singleton.
    pub fn is_plain(&self) -> bool {
        self.premise.iter().all(|(_, s)| s.len() == 1)
    }
}

impl PremiseRule for InclusionRule {
    type Premise = Vec<(usize, Domain)>;

    fn premise(&self) -> &Self::Premise {
        &self.premise
    }

    fn conclusion(&self) -> (usize, &Value) {
        (self.column, &self.value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionRuleSet {
    pub relation: String,
    pub rules: Vec<InclusionRule>,
}

impl InclusionRuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

pub fn inclusion_is_valid(rel: &Relation, r: &InclusionRule) -> bool {
    rel.tuples()
        .iter()
        .all(|t| !r.matches(t) || t[r.column] != r.value)
}

pub fn inclusion_is_feasible(rel: &Relation, r: &InclusionRule) -> bool {
    rel.tuples().iter().any(|t| r.matches(t))
}

/// `r1` extends `r2`: same conclusion, `r2`'s premise columns all appear in
/// `r1`, and on each of them `r1`'s set is a subset of `r2`'s.
pub fn inclusion_extends(r1: &InclusionRule, r2: &InclusionRule) -> bool {
    r1.column == r2.column
        && r1.value == r2.value
        && r2.premise.iter().all(|(c, s2)| {
            r1.premise
                .iter()
                .any(|(c1, s1)| c1 == c && s1.is_subset_of(s2))
        })
}

/// Column projections as positions: `proj[c][p]` is the column-domain index
/// of the `p`-th used value, and `pos[c][i]` maps back.
pub(crate) struct Projections {
    pub proj: Vec<Vec<u32>>,
    pub pos: Vec<Vec<Option<u32>>>,
}

impl Projections {
    pub fn of(rel: &Relation) -> Projections {
        let mut present: Vec<Vec<bool>> = rel.columns().iter().map(|d| vec![false; d.len()]).collect();
        for t in rel.codes() {
            for (c, &v) in t.iter().enumerate() {
                present[c][v as usize] = true;
            }
        }
        let mut proj = Vec::new();
        let mut pos = Vec::new();
        for col in present {
            let mut p = Vec::new();
            let mut back = vec![None; col.len()];
            for (i, used) in col.into_iter().enumerate() {
                if used {
                    back[i] = Some(p.len() as u32);
                    p.push(i as u32);
                }
            }
            proj.push(p);
            pos.push(back);
        }
        Projections { proj, pos }
    }

    /// Bit for tuple value `code` in column `col`.
    pub fn bit(&self, col: usize, code: u32) -> u64 {
        1u64 << self.pos[col][code as usize].expect("tuple value is in projection")
    }

    pub fn to_domain(&self, rel: &Relation, col: usize, mask: u64) -> Domain {
        let values = self.proj[col]
            .iter()
            .enumerate()
            .filter(|(p, _)| mask >> p & 1 == 1)
            .map(|(_, &i)| rel.column(col).values()[i as usize].clone())
            .collect();
        Domain::new(values).expect("projection values are distinct")
    }
}

fn check_widths(proj: &Projections) -> Result<()> {
    match proj.proj.iter().map(Vec::len).max() {
        Some(w) if w > MAX_PROJECTION => Err(Error::TooLarge {
            what: "column projection",
            size: w as u128,
            limit: MAX_PROJECTION as u128,
        }),
        _ => Ok(()),
    }
}

/// Weak assignments to a fixed column list as projection bitmasks, largest
/// first: descending total cardinality, ties in the product order of each
/// column's subset list (which is itself by descending size, then
/// lexicographic by value order).
pub(crate) struct CodedWeakAssignments<'a> {
    codes: &'a [Vec<u32>],
    proj: &'a Projections,
    cols: Vec<usize>,
    options: Vec<Vec<(u64, u32)>>,
    level: u32,
    min_level: u32,
    odometer: Vec<usize>,
    fresh: bool,
    done: bool,
}

impl<'a> CodedWeakAssignments<'a> {
    pub fn new(codes: &'a [Vec<u32>], proj: &'a Projections, cols: &[usize]) -> Self {
        let options: Vec<Vec<(u64, u32)>> = cols
            .iter()
            .map(|&c| {
                let width = proj.proj[c].len();
                let mut opts = Vec::new();
                for size in (1..width).rev() {
                    for combo in (0..width).combinations(size) {
                        let mask = combo.iter().fold(0u64, |m, &p| m | 1 << p);
                        opts.push((mask, size as u32));
                    }
                }
                opts
            })
            .collect();
        let max_level = options.iter().map(|o| o.first().map_or(0, |x| x.1)).sum();
        let done = options.iter().any(Vec::is_empty) || codes.is_empty();
        CodedWeakAssignments {
            codes,
            proj,
            cols: cols.to_vec(),
            level: max_level,
            min_level: cols.len() as u32,
            odometer: vec![0; cols.len()],
            options,
            fresh: true,
            done,
        }
    }

    fn advance(&mut self) -> bool {
        for i in (0..self.odometer.len()).rev() {
            self.odometer[i] += 1;
            if self.odometer[i] < self.options[i].len() {
                return true;
            }
            self.odometer[i] = 0;
        }
        false
    }

    fn feasible(&self, masks: &[u64]) -> bool {
        self.codes.iter().any(|t| {
            self.cols
                .iter()
                .zip(masks)
                .all(|(&c, &m)| self.proj.bit(c, t[c]) & m != 0)
        })
    }
}

impl Iterator for CodedWeakAssignments<'_> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        while !self.done {
            if self.fresh {
                self.fresh = false;
            } else if !self.advance() {
                if self.level <= self.min_level {
                    self.done = true;
                    break;
                }
                self.level -= 1;
            }
            let total: u32 = self
                .odometer
                .iter()
                .zip(&self.options)
                .map(|(&i, o)| o[i].1)
                .sum();
            if total != self.level {
                continue;
            }
            let masks: Vec<u64> = self
                .odometer
                .iter()
                .zip(&self.options)
                .map(|(&i, o)| o[i].0)
                .collect();
            if self.feasible(&masks) {
                return Some(masks);
            }
        }
        None
    }
}

/// Weak assignments to `cols`: tuples of nonempty proper subsets of the
/// column projections that some table row satisfies jointly. Yielded so that
/// a pointwise superset always comes before its subsets.
pub fn weak_assignments(rel: &Relation, cols: &[usize]) -> Result<Vec<Vec<Domain>>> {
    if !cols.windows(2).all(|w| w[0] < w[1]) || cols.iter().any(|&c| c >= rel.arity()) {
        return Err(Error::invalid(format!("column list {cols:?} must be ascending and in range")));
    }
    let proj = Projections::of(rel);
    check_widths(&proj)?;
    let out = CodedWeakAssignments::new(rel.codes(), &proj, cols)
        .map(|masks| {
            cols.iter()
                .zip(masks)
                .map(|(&c, m)| proj.to_domain(rel, c, m))
                .collect()
        })
        .collect();
    Ok(out)
}

type CodedPremise = Vec<(usize, u64)>;

/// All minimal valid inclusion rules with at most `max_premise` premise
/// columns (clamped to `arity - 1`).
///
/// Same loop skeleton as [`crate::rules::generate_rules`], with weak
/// assignments in decreasing order replacing plain assignments.
pub fn generate_inclusion_rules(rel: &Relation, max_premise: usize) -> Result<InclusionRuleSet> {
    let n = rel.arity();
    let top = max_premise.min(n - 1);
    let proj = Projections::of(rel);
    if top > 0 {
        check_widths(&proj)?;
    }
    let codes = rel.codes();
    let widths: Vec<usize> = rel.columns().iter().map(|d| d.len()).collect();

    let mut kept: Vec<(CodedPremise, usize, u32)> = Vec::new();
    let mut by_conclusion: HashMap<(usize, u32), Vec<usize>> = HashMap::new();

    for size in 0..=top {
        for cols in (0..n).combinations(size) {
            for masks in CodedWeakAssignments::new(codes, &proj, &cols) {
                let mut supported: Vec<Vec<bool>> = widths.iter().map(|&w| vec![false; w]).collect();
                let matching = codes.iter().filter(|t| {
                    cols.iter()
                        .zip(&masks)
                        .all(|(&c, &m)| proj.bit(c, t[c]) & m != 0)
                });
                for t in matching {
                    for (y, &v) in t.iter().enumerate() {
                        supported[y][v as usize] = true;
                    }
                }
                let premise: CodedPremise = cols.iter().copied().zip(masks.iter().copied()).collect();
                for y in (0..n).filter(|y| !cols.contains(y)) {
                    for d in 0..widths[y] as u32 {
                        if supported[y][d as usize] {
                            continue;
                        }
                        let bucket = by_conclusion.entry((y, d)).or_default();
                        let extends_kept = bucket.iter().any(|&k| {
                            kept[k].0.iter().all(|&(c, lm)| {
                                premise.iter().any(|&(rc, rm)| rc == c && rm & !lm == 0)
                            })
                        });
                        if !extends_kept {
                            bucket.push(kept.len());
                            kept.push((premise.clone(), y, d));
                        }
                    }
                }
            }
        }
    }

    let rules = kept
        .into_iter()
        .map(|(premise, y, d)| InclusionRule {
            premise: premise
                .into_iter()
                .map(|(c, m)| (c, proj.to_domain(rel, c, m)))
                .collect(),
            column: y,
            value: rel.column(y).values()[d as usize].clone(),
        })
        .collect();
    Ok(InclusionRuleSet {
        relation: rel.name().to_string(),
        rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::rules::{generate_rules, merge_by_premise, rule_is_valid, Rule};

    fn irule(premise: &[(usize, &[&str])], col: usize, val: &str) -> InclusionRule {
        InclusionRule::new(
            premise.iter().map(|(c, s)| (*c, Domain::of(s))).collect(),
            col,
            val.into(),
        )
    }

    #[test]
    fn fork_validity_and_extension() {
        let fork = catalogue::builtin("fork").unwrap();
        let r1 = irule(&[(0, &["+", "-"])], 2, "l");
        let r2 = irule(&[(0, &["+"])], 2, "l");
        let r3 = irule(&[(0, &["-"]), (1, &["l"])], 2, "l");
        for r in [&r1, &r2, &r3] {
            assert!(inclusion_is_valid(&fork, r));
        }
        assert!(!inclusion_is_valid(&fork, &irule(&[(0, &["+", "-", "l", "r"])], 2, "l")));
        assert!(inclusion_is_feasible(&fork, &r1));

        assert!(inclusion_extends(&r2, &r1));
        assert!(inclusion_extends(&r3, &r1));
        assert!(!inclusion_extends(&r1, &r2));
        assert!(!inclusion_extends(&r1, &r3));
        assert!(!inclusion_extends(&r2, &r3));
        assert!(!inclusion_extends(&r3, &r2));
        assert!(inclusion_extends(&r1, &r1));
    }

    #[test]
    fn feasibility() {
        let and = catalogue::builtin("and").unwrap();
        assert!(!inclusion_is_feasible(&and, &irule(&[(0, &["0"]), (2, &["1"])], 1, "0")));
        assert!(inclusion_is_feasible(&and, &irule(&[], 1, "0")));
    }

    #[test]
    fn weak_assignment_order() {
        let fork = catalogue::builtin("fork").unwrap();
        assert_eq!(weak_assignments(&fork, &[]).unwrap(), vec![Vec::<Domain>::new()]);

        let wa = weak_assignments(&fork, &[0]).unwrap();
        assert_eq!(wa.len(), 14);
        assert_eq!(wa.first().unwrap()[0].len(), 3);
        assert_eq!(wa.last().unwrap()[0].len(), 1);

        let and = catalogue::builtin("and").unwrap();
        let wa = weak_assignments(&and, &[0, 2]).unwrap();
        assert!(!wa.contains(&vec![Domain::of(&["0"]), Domain::of(&["1"])]));
        assert_eq!(wa.len(), 3);

        assert!(weak_assignments(&and, &[2, 0]).is_err());
    }

    #[test]
    fn weak_assignments_respect_superset_order() {
        let fork = catalogue::builtin("fork").unwrap();
        let wa = weak_assignments(&fork, &[0, 1]).unwrap();
        for (i, s) in wa.iter().enumerate() {
            for u in &wa[..i] {
                let u_inside_s = u.iter().zip(s).all(|(a, b)| a.is_subset_of(b));
                assert!(!u_inside_s || u == s, "{u:?} precedes its superset {s:?}");
            }
        }
    }

    #[test]
    fn and_matches_membership_rules() {
        let and = catalogue::builtin("and").unwrap();
        let inc = generate_inclusion_rules(&and, 2).unwrap();
        let mem = generate_rules(&and, 2);
        assert!(inc.rules.iter().all(InclusionRule::is_plain));
        let as_plain: Vec<Rule> = inc
            .rules
            .iter()
            .map(|r| {
                Rule::new(
                    r.premise.iter().map(|(c, s)| (*c, s.values()[0].clone())).collect(),
                    r.column,
                    r.value.clone(),
                )
            })
            .collect();
        let a: std::collections::HashSet<_> = as_plain.into_iter().collect();
        let b: std::collections::HashSet<_> = mem.rules.into_iter().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn t_junction_single_group() {
        let t = catalogue::builtin("t").unwrap();
        let inc = generate_inclusion_rules(&t, 2).unwrap();
        assert_eq!(inc.len(), 6);
        assert_eq!(merge_by_premise(&t, &inc.rules).len(), 1);
    }

    #[test]
    fn base_c_subset_rule() {
        let c = catalogue::builtin("base-c").unwrap();
        let inc = generate_inclusion_rules(&c, 1).unwrap();
        assert!(inc.rules.contains(&irule(&[(0, &["0", "1"])], 1, "2")));
    }

    #[test]
    fn singleton_specialisations_are_valid() {
        for name in ["and", "fork", "kleene-equiv", "base-c"] {
            let rel = catalogue::builtin(name).unwrap();
            for r in generate_rules(&rel, rel.arity()).rules {
                let ir = InclusionRule::new(
                    r.premise.iter().map(|(c, v)| (*c, Domain::new(vec![v.clone()]).unwrap())).collect(),
                    r.column,
                    r.value.clone(),
                );
                assert!(rule_is_valid(&rel, &r));
                assert!(inclusion_is_valid(&rel, &ir), "{name}: {ir:?}");
            }
        }
    }
}
