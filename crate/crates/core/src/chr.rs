//! Rendering of merged rule groups as CHR propagation rules.
//!
//! ```text
//! and(1,1,X) ==> X##0.
//! equiv(t,X,Y) ==> in(Y,[f, u]) | X##t.
//! ```

use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::rules::MergedGroup;
use crate::value::{Domain, Value};

/// How free head positions are named.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VarNaming {
    /// Free positions of each head take `X, Y, Z`, then `A, B, ...`, left to
    /// right.
    #[default]
    Sequential,
    /// Each column keeps one name: its declared name capitalised, otherwise
    /// `A, B, C, ...` by column index.
    ByColumn,
}

const SEQUENTIAL: &[u8] = b"XYZABCDEFGHIJKLMNOPQRSTUVW";

fn is_bare(token: &str) -> bool {
    let mut cs = token.chars();
    cs.next().is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn quote(token: &str) -> String {
    format!("'{}'", token.replace('\'', "''"))
}

/// Values of a relation are quoted all together: if any value in any column
/// domain is not a bare atom, every value is written in quotes.
struct Renderer<'a> {
    rel: &'a Relation,
    name: String,
    quote_all: bool,
    naming: VarNaming,
    column_vars: Vec<String>,
}

impl<'a> Renderer<'a> {
    fn new(rel: &'a Relation, naming: VarNaming) -> Result<Renderer<'a>> {
        let n = rel.arity();
        if n > SEQUENTIAL.len() && (naming == VarNaming::Sequential || rel.declared_column_names().is_none()) {
            return Err(Error::invalid(format!(
                "relation `{}` has arity {n}; at most {} variables can be named without declared column names",
                rel.name(),
                SEQUENTIAL.len()
            )));
        }
        let column_vars = match rel.declared_column_names() {
            Some(names) => names.iter().map(|s| capitalise(s)).collect(),
            None => (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect(),
        };
        Ok(Renderer {
            rel,
            name: if is_bare(rel.name()) {
                rel.name().to_string()
            } else {
                quote(rel.name())
            },
            quote_all: rel.columns().iter().flatten().any(|v| !is_bare(v.as_str())),
            naming,
            column_vars,
        })
    }

    fn value(&self, v: &Value) -> String {
        if self.quote_all {
            quote(v.as_str())
        } else {
            v.as_str().to_string()
        }
    }

    /// Variable names for the free columns, indexed by column.
    fn vars(&self, fixed: &[usize]) -> Vec<Option<String>> {
        let mut next = 0;
        (0..self.rel.arity())
            .map(|c| {
                if fixed.contains(&c) {
                    return None;
                }
                Some(match self.naming {
                    VarNaming::Sequential => {
                        next += 1;
                        (SEQUENTIAL[next - 1] as char).to_string()
                    }
                    VarNaming::ByColumn => self.column_vars[c].clone(),
                })
            })
            .collect()
    }

    fn line(&self, constants: &[(usize, &Value)], guards: &[(usize, &Domain)], body: &[(usize, Value)]) -> String {
        let fixed: Vec<usize> = constants.iter().map(|(c, _)| *c).collect();
        let vars = self.vars(&fixed);
        let args: Vec<String> = (0..self.rel.arity())
            .map(|c| match &vars[c] {
                Some(v) => v.clone(),
                None => self.value(constants.iter().find(|(k, _)| *k == c).expect("fixed column").1),
            })
            .collect();
        let var = |c: usize| vars[c].as_deref().expect("free column");
        let guard: Vec<String> = guards
            .iter()
            .map(|(c, set)| {
                let items: Vec<String> = set.iter().map(|v| self.value(v)).collect();
                format!("in({},[{}])", var(*c), items.join(", "))
            })
            .collect();
        let body: Vec<String> = body.iter().map(|(c, v)| format!("{}##{}", var(*c), self.value(v))).collect();
        let guard = if guard.is_empty() {
            String::new()
        } else {
            format!("{} | ", guard.join(","))
        };
        format!("{}({}) ==> {}{}.\n", self.name, args.join(","), guard, body.join(","))
    }
}

fn capitalise(s: &str) -> String {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + cs.as_str(),
        None => String::new(),
    }
}

/// One CHR line per merged membership group.
pub fn emit_chr_membership(
    rel: &Relation,
    groups: &[MergedGroup<Vec<(usize, Value)>>],
    naming: VarNaming,
) -> Result<String> {
    let r = Renderer::new(rel, naming)?;
    Ok(groups
        .iter()
        .map(|g| {
            let constants: Vec<(usize, &Value)> = g.premise.iter().map(|(c, v)| (*c, v)).collect();
            r.line(&constants, &[], &g.conclusions)
        })
        .collect())
}

/// One CHR line per merged inclusion group. Singleton premise sets become
/// head constants, larger sets become `in/2` guards.
pub fn emit_chr_inclusion(
    rel: &Relation,
    groups: &[MergedGroup<Vec<(usize, Domain)>>],
    naming: VarNaming,
) -> Result<String> {
    let r = Renderer::new(rel, naming)?;
    Ok(groups
        .iter()
        .map(|g| {
            let (singles, sets): (Vec<_>, Vec<_>) = g.premise.iter().partition(|(_, s)| s.len() == 1);
            let constants: Vec<(usize, &Value)> = singles
                .iter()
                .map(|(c, s)| (*c, s.get(0).expect("singleton")))
                .collect();
            let guards: Vec<(usize, &Domain)> = sets.iter().map(|(c, s)| (*c, s)).collect();
            r.line(&constants, &guards, &g.conclusions)
        })
        .collect())
}

/// Comment block placed before emitted rules.
pub fn chr_header(rel: &Relation, kind: &str, raw: usize, merged: usize, inclusion: bool) -> String {
    let mut h = format!(
        "% {kind} for {}/{}: {raw} rules, {merged} after merging by premise\n",
        rel.name(),
        rel.arity()
    );
    if inclusion {
        h.push_str("% in(X,L) :- dom(X,D), subset(D,L).\n");
    }
    h
}
