//! Membership rules `X = s -> y != a` and their generation from a table.

use std::collections::{HashMap, HashSet};

use itertools::Itertools;

use crate::relation::Relation;
use crate::value::Value;

/// `premise -> column != value`: when every premise variable is fixed to the
/// given value, `value` is removed from the conclusion variable's domain.
///
/// Premise columns are strictly increasing and never include `column`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub premise: Vec<(usize, Value)>,
    pub column: usize,
    pub value: Value,
}

impl Rule {
    pub fn new(premise: Vec<(usize, Value)>, column: usize, value: Value) -> Rule {
        Rule {
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
            && self
                .premise
                .iter()
                .all(|(c, v)| *c < n && *c != self.column && rel.column(*c).contains(v))
    }

    fn matches(&self, t: &[Value]) -> bool {
        self.premise.iter().all(|(c, v)| &t[*c] == v)
    }
}

/// The minimal valid rules of one relation, in generation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub relation: String,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// No tuple matching the premise has `value` in the conclusion column.
pub fn rule_is_valid(rel: &Relation, r: &Rule) -> bool {
    rel.tuples()
        .iter()
        .all(|t| !r.matches(t) || t[r.column] != r.value)
}

/// Some tuple matches the premise.
pub fn rule_is_feasible(rel: &Relation, r: &Rule) -> bool {
    rel.tuples().iter().any(|t| r.matches(t))
}

/// `r1` extends `r2`: same conclusion and `r2`'s premise is contained in
/// `r1`'s. Every rule extends itself.
pub fn rule_extends(r1: &Rule, r2: &Rule) -> bool {
    r1.column == r2.column
        && r1.value == r2.value
        && r2.premise.iter().all(|p| r1.premise.contains(p))
}

type CodedPremise = Vec<(usize, u32)>;

/// All minimal valid rules whose premise has at most `max_premise` columns
/// (clamped to `arity - 1`).
///
/// Premise sizes ascend from 0. Within a size, column subsets come in
/// lexicographic order, assignments in the order they first occur in the
/// table, then conclusion columns ascending and conclusion values in column
/// domain order. A candidate is kept when it is valid and does not extend a
/// rule already kept; since kept rules always have smaller or equal premises,
/// this yields exactly the minimal ones.
pub fn generate_rules(rel: &Relation, max_premise: usize) -> RuleSet {
    let n = rel.arity();
    let top = max_premise.min(n - 1);
    let codes = rel.codes();
    let widths: Vec<usize> = rel.columns().iter().map(|d| d.len()).collect();

    let mut kept: Vec<(CodedPremise, usize, u32)> = Vec::new();
    let mut by_conclusion: HashMap<(usize, u32), Vec<usize>> = HashMap::new();

    for size in 0..=top {
        for cols in (0..n).combinations(size) {
            let mut seen: HashSet<Vec<u32>> = HashSet::new();
            for t in codes {
                let s: Vec<u32> = cols.iter().map(|&c| t[c]).collect();
                if !seen.insert(s.clone()) {
                    continue;
                }
                let mut supported: Vec<Vec<bool>> = widths.iter().map(|&w| vec![false; w]).collect();
                for u in codes.iter().filter(|u| cols.iter().zip(&s).all(|(&c, &v)| u[c] == v)) {
                    for (y, &v) in u.iter().enumerate() {
                        supported[y][v as usize] = true;
                    }
                }
                let premise: CodedPremise = cols.iter().copied().zip(s.iter().copied()).collect();
                for y in (0..n).filter(|y| !cols.contains(y)) {
                    for d in 0..widths[y] as u32 {
                        if supported[y][d as usize] {
                            continue;
                        }
                        let bucket = by_conclusion.entry((y, d)).or_default();
                        let extends_kept = bucket
                            .iter()
                            .any(|&k| kept[k].0.iter().all(|p| premise.contains(p)));
                        if !extends_kept {
                            bucket.push(kept.len());
                            kept.push((premise.clone(), y, d));
                        }
                    }
                }
            }
        }
    }

    let value = |c: usize, i: u32| rel.column(c).values()[i as usize].clone();
    let rules = kept
        .into_iter()
        .map(|(premise, y, d)| Rule {
            premise: premise.into_iter().map(|(c, v)| (c, value(c, v))).collect(),
            column: y,
            value: value(y, d),
        })
        .collect();
    RuleSet {
        relation: rel.name().to_string(),
        rules,
    }
}

/// Rules sharing a premise, combined into one group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedGroup<P> {
    pub premise: P,
    /// `(column, value)` pairs ordered by column, then column-domain order.
    pub conclusions: Vec<(usize, Value)>,
}

/// Access to the parts of a rule needed for grouping and rendering.
pub trait PremiseRule {
    type Premise: Clone + PartialEq;

    fn premise(&self) -> &Self::Premise;
    fn conclusion(&self) -> (usize, &Value);
}

impl PremiseRule for Rule {
    type Premise = Vec<(usize, Value)>;

    fn premise(&self) -> &Self::Premise {
        &self.premise
    }

    fn conclusion(&self) -> (usize, &Value) {
        (self.column, &self.value)
    }
}

/// Groups rules by identical premise. Groups appear in the order their
/// premise first occurs.
pub fn merge_by_premise<R: PremiseRule>(rel: &Relation, rules: &[R]) -> Vec<MergedGroup<R::Premise>> {
    let mut groups: Vec<MergedGroup<R::Premise>> = Vec::new();
    for r in rules {
        let (col, val) = r.conclusion();
        match groups.iter_mut().find(|g| &g.premise == r.premise()) {
            Some(g) => g.conclusions.push((col, val.clone())),
            None => groups.push(MergedGroup {
                premise: r.premise().clone(),
                conclusions: vec![(col, val.clone())],
            }),
        }
    }
    for g in &mut groups {
        g.conclusions
            .sort_by_key(|(c, v)| (*c, rel.column(*c).index_of(v).unwrap_or(usize::MAX)));
    }
    groups
}
