use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulegen::oracle::{brute_force_minimal_inclusion_rules, brute_force_minimal_rules};
use rulegen::propagate::{check_rule_consistent, gac_filter, Schedule};
use rulegen::{generate_inclusion_rules, generate_rules, Domain, DomainStore, Problem, Propagators, Relation};

use crate::Failure;

const SHUFFLES: u64 = 5;

struct Report {
    failed: bool,
}

impl Report {
    fn line(&mut self, ok: bool, what: &str, detail: String) {
        self.failed |= !ok;
        println!("{} {what} ({detail})", if ok { "PASS" } else { "FAIL" });
    }
}

fn outcome(problem: &Problem, store: &DomainStore) -> Option<Vec<Domain>> {
    (!store.is_inconsistent()).then(|| store.domains(problem))
}

/// Every value of `inner` is also in `outer`; an inconsistent outcome is the
/// bottom element.
fn contained(inner: &Option<Vec<Domain>>, outer: &Option<Vec<Domain>>) -> bool {
    match (inner, outer) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(i), Some(o)) => i.iter().zip(o).all(|(a, b)| a.is_subset_of(b)),
    }
}

fn random_restriction(rel: &Relation, rng: &mut ChaCha8Rng) -> Vec<Domain> {
    rel.columns()
        .iter()
        .map(|d| loop {
            let sub = d.filter(|_| rng.gen_bool(0.5));
            if !sub.is_empty() {
                break sub;
            }
        })
        .collect()
}

fn render(problem: &Problem, doms: &[Domain]) -> String {
    problem
        .variables()
        .iter()
        .zip(doms)
        .map(|(v, d)| format!("{} in {d}", v.name))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn run(rel: Relation, trials: usize, seed: u64) -> Result<(), Failure> {
    let mut report = Report { failed: false };
    let k = rel.arity() - 1;

    let membership = generate_rules(&rel, k).rules;
    let oracle = brute_force_minimal_rules(&rel)?.rules;
    let a: HashSet<_> = membership.iter().collect();
    let b: HashSet<_> = oracle.iter().collect();
    report.line(
        a == b,
        "membership rules = exhaustive minimal rules",
        format!("{} generated, {} from oracle", a.len(), b.len()),
    );

    let inclusion = generate_inclusion_rules(&rel, k)?.rules;
    let oracle = brute_force_minimal_inclusion_rules(&rel)?;
    let a: HashSet<_> = inclusion.iter().collect();
    let b: HashSet<_> = oracle.iter().collect();
    report.line(
        a == b,
        "inclusion rules = exhaustive minimal inclusion rules",
        format!("{} generated, {} from oracle", a.len(), b.len()),
    );

    let rel = Arc::new(rel);
    let binary = rel.columns().iter().all(|d| d.len() <= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut incl_gac, mut gac_rule, mut weaker, mut bin_eq, mut order) = (0, 0, 0, 0, 0);
    let mut witness = None;
    for trial in 0..trials {
        // the first trial always uses the full column domains
        let doms = if trial == 0 {
            rel.columns().to_vec()
        } else {
            random_restriction(&rel, &mut rng)
        };
        let problem = Problem::single(rel.clone(), doms)?;
        let m_props = Propagators::from_membership(&problem, |_| membership.clone());
        let i_props = Propagators::from_inclusion(&problem, |_| inclusion.clone());
        let fix = |props: &Propagators, schedule| {
            let mut s = DomainStore::new(&problem);
            props.fixpoint_with(&mut s, schedule, None);
            outcome(&problem, &s)
        };
        let m = fix(&m_props, Schedule::Fifo);
        let i = fix(&i_props, Schedule::Fifo);
        let gac_store = gac_filter(&problem);
        let g = outcome(&problem, &gac_store);

        incl_gac += (i == g) as usize;
        gac_rule += (gac_store.is_inconsistent() || check_rule_consistent(&problem, &gac_store)) as usize;
        weaker += contained(&i, &m) as usize;
        bin_eq += (m == g) as usize;
        if (0..SHUFFLES).all(|s| fix(&m_props, Schedule::Shuffled(s)) == m && fix(&i_props, Schedule::Shuffled(s)) == i)
        {
            order += 1;
        }
        if witness.is_none() && m != g {
            if let Some(md) = &m {
                witness = Some(format!(
                    "initial {} : membership fixpoint {} but arc consistency gives {}",
                    render(&problem, &problem.variables().iter().map(|v| v.domain.clone()).collect::<Vec<_>>()),
                    render(&problem, md),
                    g.as_ref().map_or("INCONSISTENT".to_string(), |d| render(&problem, d)),
                ));
            }
        }
    }

    let of = |n: usize| format!("{n}/{trials} restrictions");
    report.line(incl_gac == trials, "inclusion fixpoint = arc consistency", of(incl_gac));
    report.line(gac_rule == trials, "arc consistent => rule consistent", of(gac_rule));
    report.line(weaker == trials, "membership fixpoint contains inclusion fixpoint", of(weaker));
    if binary {
        report.line(bin_eq == trials, "membership fixpoint = arc consistency on binary domains", of(bin_eq));
    } else {
        println!("SKIP membership fixpoint = arc consistency on binary domains (some column domain has more than 2 values)");
    }
    report.line(order == trials, "fixpoints independent of worklist order", of(order));
    if let Some(w) = witness {
        println!("WITNESS {w}");
    }
    if report.failed {
        Err(Failure::Negative)
    } else {
        Ok(())
    }
}
