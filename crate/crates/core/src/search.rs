//! Depth-first labeling on top of propagation.

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::propagate::{DomainStore, Mode, Propagators};
use crate::value::Value;

/// Largest domain product [`brute_force_solutions`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// A total assignment, one value per problem variable in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solution {
    pub values: Vec<Value>,
}

impl Solution {
    /// `A=1,B=0,...` in declaration order.
    pub fn render(&self, problem: &Problem) -> String {
        problem
            .variables()
            .iter()
            .zip(&self.values)
            .map(|(var, v)| format!("{}={}", var.name, v))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn get(&self, problem: &Problem, var: &str) -> Option<&Value> {
        problem.var_index(var).map(|i| &self.values[i])
    }
}

fn satisfies(problem: &Problem, values: &[Value]) -> bool {
    problem.scopes().iter().all(|s| {
        let t: Vec<Value> = s.vars.iter().map(|&v| values[v].clone()).collect();
        s.relation.contains(&t)
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Value assignments tried.
    pub nodes: usize,
    /// Assignments whose propagation failed, plus leaves rejected by the
    /// final tuple check.
    pub failures: usize,
    /// Values removed by propagation.
    pub prunings: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub solutions: Vec<Solution>,
    pub stats: SearchStats,
}

impl SearchResult {
    /// `solutions=N nodes=M failures=K`.
    pub fn summary(&self) -> String {
        format!(
            "solutions={} nodes={} failures={}",
            self.solutions.len(),
            self.stats.nodes,
            self.stats.failures
        )
    }
}

/// All solutions (or the first `limit`) in search order.
///
/// Variables are labeled in declaration order, values in domain order, with
/// propagation after each assignment. Every variable is branched on even
/// when already fixed, so node counts compare directly across modes.
pub fn solve_all(problem: &Problem, props: &Propagators, limit: Option<usize>) -> SearchResult {
    let mut search = Search {
        problem,
        props,
        limit: limit.unwrap_or(usize::MAX),
        solutions: Vec::new(),
        stats: SearchStats::default(),
    };
    let mut root = DomainStore::new(problem);
    search.stats.prunings += props.fixpoint(&mut root).removals;
    if root.is_inconsistent() {
        search.stats.failures += 1;
    } else if search.limit > 0 {
        search.label(&root, 0);
    }
    SearchResult {
        solutions: search.solutions,
        stats: search.stats,
    }
}

/// Builds full-size propagators for `mode` and runs [`solve_all`].
pub fn solve(problem: &Problem, mode: Mode, limit: Option<usize>) -> Result<SearchResult> {
    Ok(solve_all(problem, &Propagators::new(problem, mode)?, limit))
}

struct Search<'a> {
    problem: &'a Problem,
    props: &'a Propagators,
    limit: usize,
    solutions: Vec<Solution>,
    stats: SearchStats,
}

impl Search<'_> {
    /// Returns false once the limit is reached.
    fn label(&mut self, store: &DomainStore, var: usize) -> bool {
        let vars = self.problem.variables();
        if var == vars.len() {
            let values: Vec<Value> = (0..vars.len())
                .map(|v| {
                    let idx = store.fixed_value(v).expect("all variables labeled");
                    vars[v].domain.values()[idx].clone()
                })
                .collect();
            if satisfies(self.problem, &values) {
                self.solutions.push(Solution { values });
            } else {
                self.stats.failures += 1;
            }
            return self.solutions.len() < self.limit;
        }
        for idx in store.bits(var).ones() {
            self.stats.nodes += 1;
            let mut child = store.clone();
            child.assign(var, idx);
            self.stats.prunings += self.props.propagate_change(&mut child, var).removals;
            if child.is_inconsistent() {
                self.stats.failures += 1;
                continue;
            }
            if !self.label(&child, var + 1) {
                return false;
            }
        }
        true
    }
}

/// Every solution, by enumerating the Cartesian product of the domains in
/// lexicographic order and checking each scope.
pub fn brute_force_solutions(problem: &Problem) -> Result<Vec<Solution>> {
    let vars = problem.variables();
    let size = vars
        .iter()
        .try_fold(1u128, |acc, v| acc.checked_mul(v.domain.len() as u128))
        .unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "domain product",
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut out = Vec::new();
    let mut odometer = vec![0usize; vars.len()];
    loop {
        let values: Vec<Value> = odometer
            .iter()
            .zip(vars)
            .map(|(&i, v)| v.domain.values()[i].clone())
            .collect();
        if satisfies(problem, &values) {
            out.push(Solution { values });
        }
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < vars[pos].domain.len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::value::Domain;
    use std::collections::HashSet;
    use std::sync::Arc;

    fn as_set(s: &[Solution]) -> HashSet<Solution> {
        s.iter().cloned().collect()
    }

    #[test]
    fn and_scope_solutions_are_its_tuples() {
        let and = Arc::new(catalogue::builtin("and").unwrap());
        let p = Problem::single(and.clone(), vec![Domain::of(&["0", "1"]); 3]).unwrap();
        let bf = brute_force_solutions(&p).unwrap();
        let tuples: Vec<Vec<Value>> = bf.iter().map(|s| s.values.clone()).collect();
        assert_eq!(tuples, and.tuples());
        for mode in [Mode::Membership, Mode::Inclusion, Mode::Gac] {
            let r = solve(&p, mode, None).unwrap();
            assert_eq!(r.solutions, bf, "{mode}");
        }
    }

    #[test]
    fn free_add_network_has_eight_solutions() {
        let net = catalogue::add_network();
        let bf = brute_force_solutions(&net).unwrap();
        assert_eq!(bf.len(), 8);
        let mut nodes = Vec::new();
        for mode in [Mode::Gac, Mode::Inclusion, Mode::Membership] {
            let r = solve(&net, mode, None).unwrap();
            assert_eq!(as_set(&r.solutions), as_set(&bf));
            nodes.push(r.stats.nodes);
        }
        assert!(nodes[0] <= nodes[1] && nodes[1] <= nodes[2], "{nodes:?}");
    }

    #[test]
    fn limit_and_rendering() {
        let net = catalogue::add_network();
        let r = solve(&net, Mode::Membership, Some(3)).unwrap();
        assert_eq!(r.solutions.len(), 3);
        assert_eq!(r.solutions[0].render(&net), "I1=0,I2=0,I3=0,O1=0,O2=0,A1=0,A2=0,X1=0");
        assert_eq!(r.solutions[0].get(&net, "X1"), Some(&Value::from("0")));
        assert!(solve(&net, Mode::Gac, Some(0)).unwrap().solutions.is_empty());
    }

    #[test]
    fn inconsistent_root() {
        let c = Arc::new(catalogue::builtin("base-c").unwrap());
        let p = Problem::single(c, vec![Domain::of(&["2"]), Domain::of(&["0", "1"])]).unwrap();
        let r = solve(&p, Mode::Gac, None).unwrap();
        assert!(r.solutions.is_empty());
        assert_eq!(r.summary(), "solutions=0 nodes=0 failures=1");
        assert!(brute_force_solutions(&p).unwrap().is_empty());
    }

    #[test]
    fn guard() {
        let vars: Vec<_> = (0..7)
            .map(|i| crate::problem::Variable {
                name: format!("V{i}"),
                domain: Domain::new((0..10).map(|v| Value::from(v.to_string().as_str())).collect()).unwrap(),
            })
            .collect();
        let p = Problem::new(vars, vec![]).unwrap();
        assert!(matches!(brute_force_solutions(&p), Err(Error::TooLarge { .. })));
    }
}
