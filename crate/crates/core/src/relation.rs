//! Extensional constraints and the tuple/column algebra over them.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::value::{Domain, Value};

pub type Tuple = Vec<Value>;

/// A named constraint given by an explicit table of allowed tuples.
///
/// Every tuple component lies in its column domain and tuples are unique.
/// Alongside the values the relation keeps each tuple encoded as indices into
/// the column domains, which is what the rule generators work on.
#[derive(Clone, Debug)]
pub struct Relation {
    name: String,
    columns: Vec<Domain>,
    column_names: Option<Vec<String>>,
    tuples: Vec<Tuple>,
    codes: Vec<Vec<u32>>,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.columns == other.columns
            && self.column_names == other.column_names
            && self.tuples == other.tuples
    }
}

impl Eq for Relation {}

impl Relation {
    pub fn new(name: impl Into<String>, columns: Vec<Domain>, tuples: Vec<Tuple>) -> Result<Self> {
        let name = name.into();
        if columns.is_empty() {
            return Err(Error::invalid(format!("relation `{name}` must have arity >= 1")));
        }
        let mut seen = HashSet::with_capacity(tuples.len());
        let mut codes = Vec::with_capacity(tuples.len());
        for t in &tuples {
            if t.len() != columns.len() {
                return Err(Error::invalid(format!(
                    "relation `{name}`: tuple has {} values, expected {}",
                    t.len(),
                    columns.len()
                )));
            }
            let mut code = Vec::with_capacity(t.len());
            for (c, (v, dom)) in t.iter().zip(&columns).enumerate() {
                match dom.index_of(v) {
                    Some(i) => code.push(i as u32),
                    None => {
                        return Err(Error::invalid(format!(
                            "value {v} not in column {} domain",
                            c + 1
                        )))
                    }
                }
            }
            if !seen.insert(t) {
                return Err(Error::invalid(format!(
                    "relation `{name}`: duplicate tuple ({})",
                    join(t)
                )));
            }
            codes.push(code);
        }
        Ok(Relation {
            name,
            columns,
            column_names: None,
            tuples,
            codes,
        })
    }

    /// Builds a relation from string literals; every column gets `domain`.
    /// Panics on malformed input. Used by the catalogue and by tests.
    pub fn from_table(name: &str, domain: &[&str], arity: usize, rows: &[&[&str]]) -> Relation {
        let dom = Domain::of(domain);
        let tuples = rows
            .iter()
            .map(|r| r.iter().map(|v| Value::from(*v)).collect())
            .collect();
        Relation::new(name, vec![dom; arity], tuples).expect("malformed relation literal")
    }

    /// Attaches column names, used when rendering rules.
    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.arity() {
            return Err(Error::invalid(format!(
                "relation `{}`: {} column names for arity {}",
                self.name,
                names.len(),
                self.arity()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            let ok = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(Error::invalid(format!("invalid column name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::invalid(format!("duplicate column name `{n}`")));
            }
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Domain] {
        &self.columns
    }

    pub fn column(&self, col: usize) -> &Domain {
        &self.columns[col]
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Tuples as column-domain indices, row for row with [`Relation::tuples`].
    pub fn codes(&self) -> &[Vec<u32>] {
        &self.codes
    }

    pub fn declared_column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Declared column name, or `x1..xn` when none were declared.
    pub fn column_name(&self, col: usize) -> String {
        match &self.column_names {
            Some(names) => names[col].clone(),
            None => format!("x{}", col + 1),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        (0..self.arity()).find(|&c| self.column_name(c) == name)
    }

    pub fn contains(&self, tuple: &[Value]) -> bool {
        self.tuples.iter().any(|t| t.as_slice() == tuple)
    }

    /// The values occurring in column `col` of some tuple, in column-domain order.
    pub fn column_values(&self, col: usize) -> Result<Domain> {
        self.check_col(col)?;
        let mut present = vec![false; self.columns[col].len()];
        for code in &self.codes {
            present[code[col] as usize] = true;
        }
        let mut i = 0;
        Ok(self.columns[col].filter(|_| {
            i += 1;
            present[i - 1]
        }))
    }

    /// Reorders columns so that `(a_1..a_n)` is in the result iff
    /// `(a_pi(1)..a_pi(n))` is in `self`.
    pub fn permute(&self, pi: &[usize]) -> Result<Relation> {
        let n = self.arity();
        let mut hit = vec![false; n];
        if pi.len() != n || !pi.iter().all(|&p| p < n && !std::mem::replace(&mut hit[p], true)) {
            return Err(Error::invalid(format!("{pi:?} is not a permutation of 0..{n}")));
        }
        // new column pi[i] carries old column i
        let mut columns = vec![Domain::default(); n];
        for (i, &p) in pi.iter().enumerate() {
            columns[p] = self.columns[i].clone();
        }
        let tuples = self
            .tuples
            .iter()
            .map(|t| {
                let mut a = t.clone();
                for (i, &p) in pi.iter().enumerate() {
                    a[p] = t[i].clone();
                }
                a
            })
            .collect();
        let mut rel = Relation::new(self.name.clone(), columns, tuples)?;
        if let Some(names) = &self.column_names {
            let mut permuted = names.clone();
            for (i, &p) in pi.iter().enumerate() {
                permuted[p] = names[i].clone();
            }
            rel.column_names = Some(permuted);
        }
        Ok(rel)
    }

    /// Keeps the tuples lying componentwise in `doms`, which become the new
    /// column domains.
    pub fn restrict(&self, doms: &[Domain]) -> Result<Relation> {
        if doms.len() != self.arity() {
            return Err(Error::invalid(format!(
                "restrict: {} domains for arity {}",
                doms.len(),
                self.arity()
            )));
        }
        for (c, (d, base)) in doms.iter().zip(&self.columns).enumerate() {
            if !d.is_subset_of(base) {
                return Err(Error::invalid(format!(
                    "restrict: domain {d} is not a subset of column {} domain {base}",
                    c + 1
                )));
            }
        }
        let tuples = self
            .tuples
            .iter()
            .filter(|t| t.iter().zip(doms).all(|(v, d)| d.contains(v)))
            .cloned()
            .collect();
        let mut rel = Relation::new(self.name.clone(), doms.to_vec(), tuples)?;
        rel.column_names = self.column_names.clone();
        Ok(rel)
    }

    /// True iff every column domain of `self` lies in `base`'s and `self`'s
    /// tuples are exactly `base` restricted to those domains.
    pub fn is_based_on(&self, base: &Relation) -> Result<bool> {
        if self.arity() != base.arity() {
            return Err(Error::invalid(format!(
                "is_based_on: arity {} vs {}",
                self.arity(),
                base.arity()
            )));
        }
        if !self.columns.iter().zip(&base.columns).all(|(d, b)| d.is_subset_of(b)) {
            return Ok(false);
        }
        let restricted = base.restrict(&self.columns)?;
        let mine: HashSet<&Tuple> = self.tuples.iter().collect();
        let theirs: HashSet<&Tuple> = restricted.tuples.iter().collect();
        Ok(mine == theirs)
    }

    fn check_col(&self, col: usize) -> Result<()> {
        if col >= self.arity() {
            return Err(Error::invalid(format!(
                "column index {col} out of range for arity {}",
                self.arity()
            )));
        }
        Ok(())
    }
}

/// Components of `t` at `cols`, in the order given.
pub fn tuple_project(t: &[Value], cols: &[usize]) -> Result<Tuple> {
    cols.iter()
        .map(|&c| {
            t.get(c).cloned().ok_or_else(|| {
                Error::invalid(format!("column index {c} out of range for arity {}", t.len()))
            })
        })
        .collect()
}

fn join(t: &[Value]) -> String {
    t.iter().map(Value::as_str).collect::<Vec<_>>().join(",")
}
