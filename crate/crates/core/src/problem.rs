use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::value::Domain;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

/// A constraint instance: relation column `i` is bound to problem variable
/// `vars[i]`. The binding order plays the role of a column permutation.
#[derive(Clone, Debug)]
pub struct Scope {
    pub relation: Arc<Relation>,
    pub vars: Vec<usize>,
}

/// A constraint satisfaction problem built from tabular relations.
#[derive(Clone, Debug)]
pub struct Problem {
    variables: Vec<Variable>,
    scopes: Vec<Scope>,
}

impl Problem {
    /// Validates that every scope has the relation's arity, uses declared and
    /// pairwise distinct variables, and that each variable's domain lies in
    /// the relation's column domain.
    pub fn new(variables: Vec<Variable>, scopes: Vec<Scope>) -> Result<Problem> {
        for (i, v) in variables.iter().enumerate() {
            if v.domain.is_empty() {
                return Err(Error::invalid(format!("variable {} has an empty domain", v.name)));
            }
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::invalid(format!("variable {} declared twice", v.name)));
            }
        }
        for s in &scopes {
            let rel = &s.relation;
            if s.vars.len() != rel.arity() {
                return Err(Error::invalid(format!(
                    "constraint {} has {} arguments, relation arity is {}",
                    rel.name(),
                    s.vars.len(),
                    rel.arity()
                )));
            }
            for (col, &v) in s.vars.iter().enumerate() {
                let var = variables.get(v).ok_or_else(|| {
                    Error::invalid(format!("constraint {}: variable index {v} undeclared", rel.name()))
                })?;
                if s.vars[..col].contains(&v) {
                    return Err(Error::invalid(format!(
                        "constraint {}: variable {} occurs twice",
                        rel.name(),
                        var.name
                    )));
                }
                if !var.domain.is_subset_of(rel.column(col)) {
                    return Err(Error::invalid(format!(
                        "constraint {}: domain {} of {} is not within column {} domain {}",
                        rel.name(),
                        var.domain,
                        var.name,
                        col + 1,
                        rel.column(col)
                    )));
                }
            }
        }
        Ok(Problem { variables, scopes })
    }

    /// One variable per column, with the given domains, under a single scope.
    pub fn single(rel: Arc<Relation>, domains: Vec<Domain>) -> Result<Problem> {
        let variables = domains
            .into_iter()
            .enumerate()
            .map(|(i, domain)| Variable {
                name: rel.column_name(i).to_uppercase(),
                domain,
            })
            .collect::<Vec<_>>();
        let vars = (0..variables.len()).collect();
        Problem::new(variables, vec![Scope { relation: rel, vars }])
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Same constraints over different domains (each must be a subset of the
    /// corresponding current one).
    pub fn with_domains(&self, domains: Vec<Domain>) -> Result<Problem> {
        if domains.len() != self.variables.len() {
            return Err(Error::invalid("with_domains: wrong number of domains"));
        }
        let mut variables = self.variables.clone();
        for (v, d) in variables.iter_mut().zip(domains) {
            if !d.is_subset_of(&v.domain) {
                return Err(Error::invalid(format!("with_domains: {d} not within {}", v.domain)));
            }
            v.domain = d;
        }
        Problem::new(variables, self.scopes.clone())
    }

    /// Human-readable notes about values that can never survive propagation
    /// because their relation column never uses them, and about empty relations.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.scopes {
            let rel = &s.relation;
            if rel.is_empty() {
                out.push(format!("relation {} has no tuples", rel.name()));
                continue;
            }
            for (col, &v) in s.vars.iter().enumerate() {
                let used = rel.column_values(col).expect("column in range");
                let var = &self.variables[v];
                for val in var.domain.iter().filter(|x| !used.contains(x)) {
                    out.push(format!(
                        "value {val} of {} never occurs in column {} of {}",
                        var.name,
                        col + 1,
                        rel.name()
                    ));
                }
            }
        }
        out
    }

    /// `rel(V1,V2,...)` with the problem's variable names.
    pub fn scope_label(&self, scope: usize) -> String {
        let s = &self.scopes[scope];
        let args: Vec<&str> = s.vars.iter().map(|&v| self.variables[v].name.as_str()).collect();
        format!("{}({})", s.relation.name(), args.join(","))
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.variables {
            writeln!(f, "{} in {}", v.name, v.domain)?;
        }
        for i in 0..self.scopes.len() {
            writeln!(f, "{}", self.scope_label(i))?;
        }
        Ok(())
    }
}
