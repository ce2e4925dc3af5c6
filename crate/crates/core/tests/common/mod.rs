#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use rulegen::{Domain, DomainStore, Problem, Relation, Scope, Value, Variable};

pub const LETTERS: [&str; 4] = ["a", "b", "c", "d"];

fn letters(w: usize) -> Domain {
    Domain::of(&LETTERS[..w])
}

fn build(name: &str, widths: &[usize], mask: &[bool], order: Vec<usize>) -> Relation {
    let mut all: Vec<Vec<Value>> = vec![vec![]];
    for &w in widths {
        all = all
            .into_iter()
            .flat_map(|p| {
                LETTERS[..w].iter().map(move |v| {
                    let mut t = p.clone();
                    t.push(Value::from(*v));
                    t
                })
            })
            .collect();
    }
    let tuples = order.into_iter().filter(|&i| mask[i]).map(|i| all[i].clone()).collect();
    Relation::new(name, widths.iter().map(|&w| letters(w)).collect(), tuples).unwrap()
}

/// Relations of arity `1..=max_arity` with column domains of `1..=max_dom`
/// letters, random density and random tuple order.
pub fn relation(max_arity: usize, max_dom: usize) -> impl Strategy<Value = Relation> {
    (1..=max_arity)
        .prop_flat_map(move |n| (prop::collection::vec(1..=max_dom, n), 0.05f64..0.95))
        .prop_flat_map(|(widths, p)| {
            let size: usize = widths.iter().product();
            let order = Just((0..size).collect::<Vec<_>>()).prop_shuffle();
            (Just(widths), prop::collection::vec(prop::bool::weighted(p), size), order)
        })
        .prop_map(|(widths, mask, order)| build("r", &widths, &mask, order))
}

/// Relations over one shared domain of `dom` letters.
pub fn relation_over(arity: usize, dom: usize, name: &'static str) -> impl Strategy<Value = Relation> {
    let size = dom.pow(arity as u32);
    (
        (0.2f64..0.9).prop_flat_map(move |p| prop::collection::vec(prop::bool::weighted(p), size)),
        Just((0..size).collect::<Vec<_>>()).prop_shuffle(),
    )
        .prop_map(move |(mask, order)| build(name, &vec![dom; arity], &mask, order))
}

fn nonempty_subset(d: &Domain) -> impl Strategy<Value = Domain> {
    let d = d.clone();
    prop::collection::vec(any::<bool>(), d.len()).prop_map(move |mask| {
        let mut i = 0;
        let sub = d.filter(|_| {
            i += 1;
            mask[i - 1]
        });
        if sub.is_empty() {
            Domain::new(vec![d.values()[0].clone()]).unwrap()
        } else {
            sub
        }
    })
}

/// A relation together with a random restriction of its column domains.
pub fn restricted(max_arity: usize, max_dom: usize) -> impl Strategy<Value = (Relation, Vec<Domain>)> {
    relation(max_arity, max_dom).prop_flat_map(|rel| {
        let doms: Vec<_> = rel.columns().iter().map(nonempty_subset).collect();
        (Just(rel), doms)
    })
}

pub fn single(rel: &Relation, doms: Vec<Domain>) -> Problem {
    Problem::single(Arc::new(rel.clone()), doms).unwrap()
}

/// Problems with 2..=5 variables over a shared domain and 1..=4 scopes of
/// arity 2 or 3, each on its own random relation.
pub fn problem() -> impl Strategy<Value = Problem> {
    (2usize..=5, 2usize..=3)
        .prop_flat_map(|(nvars, dom)| {
            let full = letters(dom);
            let vars = prop::collection::vec(nonempty_subset(&full), nvars);
            let scope = (2usize..=nvars.min(3)).prop_flat_map(move |arity| {
                (
                    relation_over(arity, dom, "r"),
                    Just((0..nvars).collect::<Vec<_>>()).prop_shuffle(),
                )
                    .prop_map(move |(rel, order)| (rel, order[..arity].to_vec()))
            });
            (vars, prop::collection::vec(scope, 1..=4))
        })
        .prop_map(|(doms, scopes)| {
            let variables = doms
                .into_iter()
                .enumerate()
                .map(|(i, domain)| Variable {
                    name: format!("V{i}"),
                    domain,
                })
                .collect();
            let scopes = scopes
                .into_iter()
                .enumerate()
                .map(|(i, (rel, vars))| Scope {
                    relation: Arc::new(rel.with_name(format!("r{i}"))),
                    vars,
                })
                .collect();
            Problem::new(variables, scopes).unwrap()
        })
}

/// Domains after propagation, or `None` when a domain was wiped out.
pub fn outcome(problem: &Problem, store: &DomainStore) -> Option<Vec<Domain>> {
    (!store.is_inconsistent()).then(|| store.domains(problem))
}

/// Pointwise inclusion, with inconsistency as the bottom element.
pub fn contained(inner: &Option<Vec<Domain>>, outer: &Option<Vec<Domain>>) -> bool {
    match (inner, outer) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(i), Some(o)) => i.iter().zip(o).all(|(a, b)| a.is_subset_of(b)),
    }
}
