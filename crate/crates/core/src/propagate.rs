//! Fixpoint propagation of generated rules over a [`Problem`], plus the
//! table-scanning arc consistency filter the rules are checked against.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::inclusion::{generate_inclusion_rules, InclusionRule, InclusionRuleSet};
use crate::native;
use crate::problem::{Problem, Scope};
use crate::relation::Relation;
use crate::rules::{generate_rules, Rule, RuleSet};
use crate::value::Domain;

/// Current domains of all problem variables, as bitsets over each variable's
/// initial domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainStore {
    domains: Vec<FixedBitSet>,
    inconsistent: bool,
}

/// What applying a rule did to the store.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Effect {
    Unchanged,
    Pruned,
    /// A domain became empty; the store is now inconsistent.
    Wiped,
}

impl DomainStore {
    pub fn new(problem: &Problem) -> DomainStore {
        let domains = problem
            .variables()
            .iter()
            .map(|v| {
                let mut b = FixedBitSet::with_capacity(v.domain.len());
                b.insert_range(..);
                b
            })
            .collect();
        DomainStore {
            domains,
            inconsistent: false,
        }
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn bits(&self, var: usize) -> &FixedBitSet {
        &self.domains[var]
    }

    pub fn size(&self, var: usize) -> usize {
        self.domains[var].count_ones(..)
    }

    pub fn contains(&self, var: usize, idx: usize) -> bool {
        self.domains[var].contains(idx)
    }

    /// The current domain of `var` as values, in declaration order.
    pub fn domain(&self, problem: &Problem, var: usize) -> Domain {
        bits_to_domain(&problem.variables()[var].domain, &self.domains[var])
    }

    pub fn domains(&self, problem: &Problem) -> Vec<Domain> {
        (0..self.domains.len()).map(|v| self.domain(problem, v)).collect()
    }

    /// Removes value index `idx` from `var`.
    pub fn remove(&mut self, var: usize, idx: usize) -> Effect {
        if self.inconsistent || !self.domains[var].contains(idx) {
            return Effect::Unchanged;
        }
        self.domains[var].set(idx, false);
        if self.domains[var].is_clear() {
            self.inconsistent = true;
            Effect::Wiped
        } else {
            Effect::Pruned
        }
    }

    /// Intersects `var`'s domain with `keep`.
    pub fn retain(&mut self, var: usize, keep: &FixedBitSet) -> Effect {
        if self.inconsistent {
            return Effect::Unchanged;
        }
        let d = &mut self.domains[var];
        let before = d.count_ones(..);
        d.intersect_with(keep);
        let after = d.count_ones(..);
        if after == before {
            Effect::Unchanged
        } else if after == 0 {
            self.inconsistent = true;
            Effect::Wiped
        } else {
            Effect::Pruned
        }
    }

    /// Narrows `var` to the single value index `idx`.
    pub fn assign(&mut self, var: usize, idx: usize) -> Effect {
        let mut keep = FixedBitSet::with_capacity(self.domains[var].len());
        keep.insert(idx);
        self.retain(var, &keep)
    }

    /// True when every variable has exactly one value left.
    pub fn is_fixed(&self) -> bool {
        !self.inconsistent && self.domains.iter().all(|d| d.count_ones(..) == 1)
    }

    /// Index of the only value of `var`, if fixed.
    pub fn fixed_value(&self, var: usize) -> Option<usize> {
        let d = &self.domains[var];
        (d.count_ones(..) == 1).then(|| d.ones().next().expect("one bit"))
    }

    /// The problem with its domains replaced by the store's.
    pub fn to_problem(&self, problem: &Problem) -> Result<Problem> {
        if self.inconsistent {
            return Err(Error::invalid("store is inconsistent"));
        }
        problem.with_domains(self.domains(problem))
    }
}

fn bits_to_domain(initial: &Domain, bits: &FixedBitSet) -> Domain {
    let mut i = 0;
    initial.filter(|_| {
        i += 1;
        bits.contains(i - 1)
    })
}

/// Which kind of propagation to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Minimal membership rules (rule consistency).
    Membership,
    /// Minimal inclusion rules (arc consistency via rules).
    Inclusion,
    /// Direct table scanning (the arc consistency reference).
    Gac,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Membership => "membership",
            Mode::Inclusion => "inclusion",
            Mode::Gac => "gac",
        })
    }
}

/// Worklist discipline for [`Propagators::fixpoint_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Fifo,
    /// Random initial order and random pick from the pending scopes.
    Shuffled(u64),
}

#[derive(Clone, Debug)]
enum Cond {
    /// Domain of `var` is exactly `{idx}`.
    Fixed { var: usize, idx: usize },
    /// Domain of `var` is a subset of `mask`.
    Within { var: usize, mask: FixedBitSet },
}

impl Cond {
    fn holds(&self, store: &DomainStore) -> bool {
        match self {
            Cond::Fixed { var, idx } => {
                let d = &store.domains[*var];
                d.contains(*idx) && d.count_ones(..) == 1
            }
            Cond::Within { var, mask } => store.domains[*var].is_subset(mask),
        }
    }
}

#[derive(Clone, Debug)]
struct CompiledRule {
    premise: Vec<Cond>,
    var: usize,
    idx: usize,
    origin: usize,
}

#[derive(Clone, Debug)]
enum Checker {
    Rules(Vec<CompiledRule>),
    /// Tuples of the scope's relation that lie in the initial domains, as
    /// value indices of the scope variables.
    Table(Vec<Vec<usize>>),
    /// The relation has no tuples. Its minimal rule set is empty, yet every
    /// `true -> y!=a` is valid, so the scope wipes out its first variable.
    Empty,
}

/// The rules a scope's relation contributed, kept for tracing.
#[derive(Clone, Debug)]
pub enum RuleSource {
    Membership(Vec<Rule>),
    Inclusion(Vec<InclusionRule>),
    Table,
}

/// One domain change made during propagation.
#[derive(Clone, Debug)]
pub struct Firing {
    pub scope: usize,
    /// Index into the scope's rule source; `None` for table scanning.
    pub rule: Option<usize>,
    pub var: usize,
    pub before: FixedBitSet,
    pub after: FixedBitSet,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PropagationStats {
    /// Domain-changing rule applications (or table revisions).
    pub firings: usize,
    /// Values removed.
    pub removals: usize,
}

impl std::ops::AddAssign for PropagationStats {
    fn add_assign(&mut self, o: Self) {
        self.firings += o.firings;
        self.removals += o.removals;
    }
}

/// Per-scope propagators for one problem, all of a single [`Mode`].
///
/// Rules are generated once per distinct relation and then bound to each
/// scope's variables.
#[derive(Clone, Debug)]
pub struct Propagators {
    mode: Mode,
    checkers: Vec<Checker>,
    sources: Vec<Arc<RuleSource>>,
    scope_vars: Vec<Vec<usize>>,
    watchers: Vec<Vec<usize>>,
}

fn relation_key(rel: &Arc<Relation>) -> usize {
    Arc::as_ptr(rel) as usize
}

impl Propagators {
    /// Generates full-size rules for every relation of `problem`.
    pub fn new(problem: &Problem, mode: Mode) -> Result<Propagators> {
        Propagators::with_max_premise(problem, mode, None)
    }

    /// Like [`Propagators::new`] with a premise-size cutoff.
    pub fn with_max_premise(problem: &Problem, mode: Mode, max_premise: Option<usize>) -> Result<Propagators> {
        let k = |rel: &Relation| max_premise.unwrap_or(rel.arity()).min(rel.arity() - 1);
        match mode {
            Mode::Membership => Ok(Propagators::from_membership(problem, |rel| {
                generate_rules(rel, k(rel)).rules
            })),
            Mode::Inclusion => {
                let mut err = None;
                let props = Propagators::from_inclusion(problem, |rel| match generate_inclusion_rules(rel, k(rel)) {
                    Ok(InclusionRuleSet { rules, .. }) => rules,
                    Err(e) => {
                        err.get_or_insert(e);
                        Vec::new()
                    }
                });
                err.map_or(Ok(props), Err)
            }
            Mode::Gac => Ok(Propagators::build(problem, Mode::Gac, |_| RuleSource::Table)),
        }
    }

    /// Binds caller-supplied membership rules; `rules_for` is called once per
    /// distinct relation.
    pub fn from_membership(problem: &Problem, mut rules_for: impl FnMut(&Relation) -> Vec<Rule>) -> Propagators {
        Propagators::build(problem, Mode::Membership, |rel| RuleSource::Membership(rules_for(rel)))
    }

    pub fn from_inclusion(
        problem: &Problem,
        mut rules_for: impl FnMut(&Relation) -> Vec<InclusionRule>,
    ) -> Propagators {
        Propagators::build(problem, Mode::Inclusion, |rel| RuleSource::Inclusion(rules_for(rel)))
    }

    /// Binds pre-generated rule sets by relation name.
    pub fn from_rule_sets(problem: &Problem, sets: &HashMap<String, RuleSet>) -> Result<Propagators> {
        for s in problem.scopes() {
            if !sets.contains_key(s.relation.name()) {
                return Err(Error::invalid(format!("no rules for relation {}", s.relation.name())));
            }
        }
        Ok(Propagators::from_membership(problem, |rel| sets[rel.name()].rules.clone()))
    }

    fn build(problem: &Problem, mode: Mode, mut source_for: impl FnMut(&Relation) -> RuleSource) -> Propagators {
        let mut cache: HashMap<usize, Arc<RuleSource>> = HashMap::new();
        let mut checkers = Vec::new();
        let mut sources = Vec::new();
        let mut watchers = vec![Vec::new(); problem.variables().len()];
        for (si, scope) in problem.scopes().iter().enumerate() {
            let source = cache
                .entry(relation_key(&scope.relation))
                .or_insert_with(|| Arc::new(source_for(&scope.relation)))
                .clone();
            checkers.push(compile(problem, si, &source));
            sources.push(source);
            for &v in &scope.vars {
                watchers[v].push(si);
            }
        }
        Propagators {
            mode,
            checkers,
            sources,
            scope_vars: problem.scopes().iter().map(|s| s.vars.clone()).collect(),
            watchers,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn source(&self, scope: usize) -> &RuleSource {
        &self.sources[scope]
    }

    /// Number of rules bound across all scopes (0 in table mode).
    pub fn rule_count(&self) -> usize {
        self.checkers
            .iter()
            .map(|c| match c {
                Checker::Rules(r) => r.len(),
                Checker::Table(_) | Checker::Empty => 0,
            })
            .sum()
    }

    /// Runs to the common fixpoint with a FIFO worklist.
    pub fn fixpoint(&self, store: &mut DomainStore) -> PropagationStats {
        self.fixpoint_with(store, Schedule::Fifo, None)
    }

    /// Runs to the common fixpoint, optionally reporting every change.
    pub fn fixpoint_with(
        &self,
        store: &mut DomainStore,
        schedule: Schedule,
        trace: Option<&mut dyn FnMut(&Firing)>,
    ) -> PropagationStats {
        self.run(store, (0..self.checkers.len()).collect(), schedule, trace)
    }

    /// Re-establishes the fixpoint after `var` changed in a store that was at
    /// a fixpoint before.
    pub fn propagate_change(&self, store: &mut DomainStore, var: usize) -> PropagationStats {
        self.run(store, self.watchers[var].clone(), Schedule::Fifo, None)
    }

    fn run(
        &self,
        store: &mut DomainStore,
        mut initial: Vec<usize>,
        schedule: Schedule,
        mut trace: Option<&mut dyn FnMut(&Firing)>,
    ) -> PropagationStats {
        let mut stats = PropagationStats::default();
        if store.inconsistent {
            return stats;
        }
        let mut rng = match schedule {
            Schedule::Fifo => None,
            Schedule::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        if let Some(rng) = rng.as_mut() {
            for i in (1..initial.len()).rev() {
                initial.swap(i, rng.gen_range(0..=i));
            }
        }
        let mut queued = vec![false; self.checkers.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in initial {
            if !std::mem::replace(&mut queued[s], true) {
                queue.push_back(s);
            }
        }
        let mut changed = Vec::new();
        loop {
            let next = match rng.as_mut() {
                Some(rng) if !queue.is_empty() => {
                    let i = rng.gen_range(0..queue.len());
                    queue.swap_remove_back(i)
                }
                _ => queue.pop_front(),
            };
            let Some(scope) = next else { break };
            queued[scope] = false;
            changed.clear();
            self.revise(scope, store, &mut changed, &mut stats, &mut trace);
            if store.inconsistent {
                break;
            }
            for &v in &changed {
                for &s in &self.watchers[v] {
                    if !std::mem::replace(&mut queued[s], true) {
                        queue.push_back(s);
                    }
                }
            }
        }
        stats
    }

    fn revise(
        &self,
        scope: usize,
        store: &mut DomainStore,
        changed: &mut Vec<usize>,
        stats: &mut PropagationStats,
        trace: &mut Option<&mut dyn FnMut(&Firing)>,
    ) {
        match &self.checkers[scope] {
            Checker::Rules(rules) => {
                for r in rules {
                    if !store.domains[r.var].contains(r.idx) || !r.premise.iter().all(|c| c.holds(store)) {
                        continue;
                    }
                    let before = trace.as_ref().map(|_| store.domains[r.var].clone());
                    let effect = store.remove(r.var, r.idx);
                    stats.firings += 1;
                    stats.removals += 1;
                    if let (Some(t), Some(before)) = (trace.as_mut(), before) {
                        t(&Firing {
                            scope,
                            rule: Some(r.origin),
                            var: r.var,
                            before,
                            after: store.domains[r.var].clone(),
                        });
                    }
                    if !changed.contains(&r.var) {
                        changed.push(r.var);
                    }
                    if effect == Effect::Wiped {
                        return;
                    }
                }
            }
            Checker::Empty => {
                let v = self.scope_vars[scope][0];
                let before = store.domains[v].clone();
                store.retain(v, &FixedBitSet::with_capacity(before.len()));
                stats.firings += 1;
                stats.removals += before.count_ones(..);
                if let Some(t) = trace.as_mut() {
                    t(&Firing {
                        scope,
                        rule: None,
                        var: v,
                        before,
                        after: store.domains[v].clone(),
                    });
                }
                changed.push(v);
            }
            Checker::Table(rows) => {
                let vars = &self.scope_vars[scope];
                let mut support: Vec<FixedBitSet> = vars
                    .iter()
                    .map(|&v| FixedBitSet::with_capacity(store.domains[v].len()))
                    .collect();
                for row in rows {
                    if row.iter().zip(vars).all(|(&i, &v)| store.domains[v].contains(i)) {
                        for (col, &i) in row.iter().enumerate() {
                            support[col].insert(i);
                        }
                    }
                }
                for (col, &v) in vars.iter().enumerate() {
                    let before = store.domains[v].clone();
                    let lost = before.count_ones(..) - before.intersection(&support[col]).count();
                    if lost == 0 {
                        continue;
                    }
                    let effect = store.retain(v, &support[col]);
                    stats.firings += 1;
                    stats.removals += lost;
                    if let Some(t) = trace.as_mut() {
                        t(&Firing {
                            scope,
                            rule: None,
                            var: v,
                            before,
                            after: store.domains[v].clone(),
                        });
                    }
                    changed.push(v);
                    if effect == Effect::Wiped {
                        return;
                    }
                }
            }
        }
    }

    /// True when no bound rule (or table revision) would remove anything.
    pub fn is_closed(&self, store: &DomainStore) -> bool {
        if store.inconsistent {
            return false;
        }
        let mut probe = store.clone();
        let mut changed = Vec::new();
        let mut stats = PropagationStats::default();
        (0..self.checkers.len()).all(|s| {
            self.revise(s, &mut probe, &mut changed, &mut stats, &mut None);
            stats.removals == 0
        })
    }

    /// One trace line: `FIRE and(X,Y,Z) rule z=1 -> x!=0 : X {0,1} => {1}`.
    pub fn describe(&self, problem: &Problem, f: &Firing) -> String {
        let scope = &problem.scopes()[f.scope];
        let rel = &scope.relation;
        let rule = match (&*self.sources[f.scope], f.rule) {
            (RuleSource::Membership(rs), Some(i)) => format!("rule {}", native::render_rule(rel, &rs[i])),
            (RuleSource::Inclusion(rs), Some(i)) => {
                format!("rule {}", native::render_inclusion_rule(rel, &rs[i]))
            }
            _ if matches!(self.checkers[f.scope], Checker::Empty) => "empty".to_string(),
            _ => "gac".to_string(),
        };
        let var = &problem.variables()[f.var];
        format!(
            "FIRE {} {} : {} {} => {}",
            problem.scope_label(f.scope),
            rule,
            var.name,
            bits_to_domain(&var.domain, &f.before),
            bits_to_domain(&var.domain, &f.after)
        )
    }
}

fn compile_rule(problem: &Problem, scope: &Scope, r: &Rule, origin: usize) -> Option<CompiledRule> {
    let dom = |col: usize| &problem.variables()[scope.vars[col]].domain;
    let idx = dom(r.column).index_of(&r.value)?;
    let premise = r
        .premise
        .iter()
        .map(|(c, v)| {
            Some(Cond::Fixed {
                var: scope.vars[*c],
                idx: dom(*c).index_of(v)?,
            })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(CompiledRule {
        premise,
        var: scope.vars[r.column],
        idx,
        origin,
    })
}

fn compile_inclusion_rule(problem: &Problem, scope: &Scope, r: &InclusionRule, origin: usize) -> Option<CompiledRule> {
    let dom = |col: usize| &problem.variables()[scope.vars[col]].domain;
    let idx = dom(r.column).index_of(&r.value)?;
    let premise = r
        .premise
        .iter()
        .map(|(c, set)| {
            let d = dom(*c);
            let mut mask = FixedBitSet::with_capacity(d.len());
            for v in set {
                if let Some(i) = d.index_of(v) {
                    mask.insert(i);
                }
            }
            // a nonempty domain is never inside an empty mask
            (!mask.is_clear()).then_some(Cond::Within {
                var: scope.vars[*c],
                mask,
            })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(CompiledRule {
        premise,
        var: scope.vars[r.column],
        idx,
        origin,
    })
}

fn compile(problem: &Problem, scope_idx: usize, source: &RuleSource) -> Checker {
    let scope = &problem.scopes()[scope_idx];
    if scope.relation.is_empty() && !matches!(source, RuleSource::Table) {
        return Checker::Empty;
    }
    match source {
        RuleSource::Membership(rules) => Checker::Rules(
            rules
                .iter()
                .enumerate()
                .filter_map(|(i, r)| compile_rule(problem, scope, r, i))
                .collect(),
        ),
        RuleSource::Inclusion(rules) => Checker::Rules(
            rules
                .iter()
                .enumerate()
                .filter_map(|(i, r)| compile_inclusion_rule(problem, scope, r, i))
                .collect(),
        ),
        RuleSource::Table => {
            let dom = |col: usize| &problem.variables()[scope.vars[col]].domain;
            Checker::Table(
                scope
                    .relation
                    .tuples()
                    .iter()
                    .filter_map(|t| {
                        t.iter()
                            .enumerate()
                            .map(|(col, v)| dom(col).index_of(v))
                            .collect::<Option<Vec<_>>>()
                    })
                    .collect(),
            )
        }
    }
}

fn apply_compiled(store: &mut DomainStore, r: Option<CompiledRule>) -> Effect {
    match r {
        Some(r) if !store.inconsistent && r.premise.iter().all(|c| c.holds(store)) => store.remove(r.var, r.idx),
        _ => Effect::Unchanged,
    }
}

/// Removes `rule`'s conclusion if every premise variable is fixed to its
/// premise value.
pub fn apply_rule(problem: &Problem, store: &mut DomainStore, scope: usize, rule: &Rule) -> Effect {
    apply_compiled(store, compile_rule(problem, &problem.scopes()[scope], rule, 0))
}

/// Removes `rule`'s conclusion if every premise variable's domain lies
/// inside its premise set.
pub fn apply_inclusion_rule(problem: &Problem, store: &mut DomainStore, scope: usize, rule: &InclusionRule) -> Effect {
    apply_compiled(store, compile_inclusion_rule(problem, &problem.scopes()[scope], rule, 0))
}

/// Fixpoint of `mode` from the problem's initial domains.
pub fn propagate(problem: &Problem, mode: Mode) -> Result<DomainStore> {
    let props = Propagators::new(problem, mode)?;
    let mut store = DomainStore::new(problem);
    props.fixpoint(&mut store);
    Ok(store)
}

/// Generalised arc consistency by repeated table scans.
pub fn gac_filter(problem: &Problem) -> DomainStore {
    propagate(problem, Mode::Gac).expect("table mode cannot fail")
}

fn closed_under(problem: &Problem, store: &DomainStore, mode: Mode) -> Result<bool> {
    Ok(Propagators::new(problem, mode)?.is_closed(store))
}

/// Closed under every minimal valid membership rule of each scope's relation.
pub fn check_rule_consistent(problem: &Problem, store: &DomainStore) -> bool {
    closed_under(problem, store, Mode::Membership).expect("membership generation cannot fail")
}

/// Closed under every minimal valid inclusion rule of each scope's relation.
pub fn check_inclusion_rule_consistent(problem: &Problem, store: &DomainStore) -> Result<bool> {
    closed_under(problem, store, Mode::Inclusion)
}

/// Every value of every variable has a supporting tuple in each of its scopes.
pub fn check_arc_consistent(problem: &Problem, store: &DomainStore) -> bool {
    closed_under(problem, store, Mode::Gac).expect("table mode cannot fail")
}
