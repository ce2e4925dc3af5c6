//! Line-oriented relation and problem files.
//!
//! ```text
//! relation and 3
//! columns: x y z
//! domains: 0 1 | 0 1 | 0 1
//! tuples:
//! 0 0 0
//! 1 1 1
//! ```
//!
//! ```text
//! csp
//! use gates.rel
//! use builtin xor
//! var I1 in 1
//! var I2 X1 in 0 1
//! constraint xor(I1, I2, X1)
//! ```
//!
//! `#` starts a comment anywhere on a line. A `domains:` line without `|`
//! gives every column the same domain.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::catalogue;
use crate::error::{Error, Result};
use crate::problem::{Problem, Scope, Variable};
use crate::relation::Relation;
use crate::value::{Domain, Value};

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(l, _)| l).trim()
}

fn value(line: usize, token: &str) -> Result<Value> {
    Value::parse(token).map_err(|e| Error::parse(line, e.to_string()))
}

fn domain(line: usize, tokens: &str) -> Result<Domain> {
    let values = tokens
        .split_whitespace()
        .map(|t| value(line, t))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::parse(line, "empty domain"));
    }
    Domain::new(values).map_err(|e| Error::parse(line, e.to_string()))
}

fn is_identifier(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Pending {
    line: usize,
    name: String,
    arity: usize,
    columns: Option<Vec<String>>,
    domains: Option<Vec<Domain>>,
    tuples: Vec<Vec<Value>>,
    seen: HashSet<Vec<Value>>,
    in_tuples: bool,
}

impl Pending {
    fn finish(self) -> Result<Relation> {
        let domains = self
            .domains
            .ok_or_else(|| Error::parse(self.line, format!("relation {} has no domains line", self.name)))?;
        let rel = Relation::new(&self.name, domains, self.tuples).map_err(|e| Error::parse(self.line, e.to_string()))?;
        match self.columns {
            Some(names) => rel.with_column_names(names).map_err(|e| Error::parse(self.line, e.to_string())),
            None => Ok(rel),
        }
    }

    fn row(&mut self, line: usize, text: &str) -> Result<()> {
        let domains = self.domains.as_ref().expect("checked before tuples:");
        let row = text
            .split_whitespace()
            .map(|t| value(line, t))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != self.arity {
            return Err(Error::parse(
                line,
                format!("tuple has {} values, relation {} has arity {}", row.len(), self.name, self.arity),
            ));
        }
        for (i, v) in row.iter().enumerate() {
            if !domains[i].contains(v) {
                return Err(Error::parse(line, format!("value {v} not in column {} domain", i + 1)));
            }
        }
        if !self.seen.insert(row.clone()) {
            return Err(Error::parse(line, "duplicate tuple"));
        }
        self.tuples.push(row);
        Ok(())
    }
}

/// Parses every relation in a relation file, in file order.
pub fn parse_relations(text: &str) -> Result<Vec<Relation>> {
    let mut out: Vec<Relation> = Vec::new();
    let mut cur: Option<Pending> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = strip_comment(raw);
        if l.is_empty() {
            continue;
        }
        let mut words = l.split_whitespace();
        if words.next() == Some("relation") {
            if let Some(p) = cur.take() {
                out.push(p.finish()?);
            }
            let (name, arity) = match (words.next(), words.next(), words.next()) {
                (Some(n), Some(a), None) => (n, a),
                _ => return Err(Error::parse(line, "expected `relation NAME ARITY`")),
            };
            if !is_identifier(name) {
                return Err(Error::parse(line, format!("invalid relation name `{name}`")));
            }
            if out.iter().any(|r| r.name() == name) {
                return Err(Error::parse(line, format!("relation {name} defined twice")));
            }
            let arity: usize = arity
                .parse()
                .ok()
                .filter(|&a| a > 0)
                .ok_or_else(|| Error::parse(line, format!("invalid arity `{arity}`")))?;
            cur = Some(Pending {
                line,
                name: name.to_string(),
                arity,
                columns: None,
                domains: None,
                tuples: Vec::new(),
                seen: HashSet::new(),
                in_tuples: false,
            });
            continue;
        }
        let p = cur
            .as_mut()
            .ok_or_else(|| Error::parse(line, "expected `relation NAME ARITY`"))?;
        if p.in_tuples {
            p.row(line, l)?;
        } else if let Some(rest) = l.strip_prefix("columns:") {
            let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
            if names.len() != p.arity {
                return Err(Error::parse(line, format!("{} column names for arity {}", names.len(), p.arity)));
            }
            p.columns = Some(names);
        } else if let Some(rest) = l.strip_prefix("domains:") {
            let doms = if rest.contains('|') {
                rest.split('|').map(|d| domain(line, d)).collect::<Result<Vec<_>>>()?
            } else {
                vec![domain(line, rest)?; p.arity]
            };
            if doms.len() != p.arity {
                return Err(Error::parse(line, format!("{} column domains for arity {}", doms.len(), p.arity)));
            }
            p.domains = Some(doms);
        } else if l == "tuples:" {
            if p.domains.is_none() {
                return Err(Error::parse(line, "`tuples:` before `domains:`"));
            }
            p.in_tuples = true;
        } else {
            return Err(Error::parse(line, format!("unexpected line `{l}`")));
        }
    }
    match cur {
        Some(p) => out.push(p.finish()?),
        None => return Err(Error::parse(text.lines().count().max(1), "no relation defined")),
    }
    Ok(out)
}

/// Where `use` directives read relation files from.
pub trait Loader {
    fn read(&self, path: &Path) -> Result<String>;
}

/// Reads from the file system.
#[derive(Clone, Copy, Debug, Default)]
pub struct FsLoader;

impl Loader for FsLoader {
    fn read(&self, path: &Path) -> Result<String> {
        fs::read_to_string(path).map_err(|e| Error::InFile {
            path: path.to_path_buf(),
            source: Box::new(e.into()),
        })
    }
}

/// Relations made available to a problem by its `use` lines.
#[derive(Default)]
struct Library {
    relations: HashMap<String, Arc<Relation>>,
}

impl Library {
    fn add(&mut self, line: usize, rel: Relation) -> Result<()> {
        match self.relations.get(rel.name()) {
            Some(old) if **old != rel => Err(Error::parse(
                line,
                format!("relation {} already loaded with a different table", rel.name()),
            )),
            Some(_) => Ok(()),
            None => {
                self.relations.insert(rel.name().to_string(), Arc::new(rel));
                Ok(())
            }
        }
    }
}

/// Parses a problem file; relative `use` paths resolve against `base`.
pub fn parse_problem(text: &str, base: &Path, loader: &dyn Loader) -> Result<Problem> {
    let mut lib = Library::default();
    let mut variables: Vec<Variable> = Vec::new();
    let mut scopes = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = strip_comment(raw);
        if l.is_empty() {
            continue;
        }
        if !header {
            if l != "csp" {
                return Err(Error::parse(line, "problem files start with `csp`"));
            }
            header = true;
            continue;
        }
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        match kw {
            "use" => {
                let mut words = rest.split_whitespace();
                match (words.next(), words.next(), words.next()) {
                    (Some("builtin"), Some(name), None) => {
                        let rel = catalogue::builtin(name).map_err(|e| Error::parse(line, e.to_string()))?;
                        lib.add(line, rel)?;
                    }
                    (Some(path), None, None) => {
                        let full: PathBuf = base.join(path);
                        let rels = loader
                            .read(&full)
                            .and_then(|t| parse_relations(&t))
                            .map_err(|e| match e {
                                e @ Error::InFile { .. } => e,
                                e => Error::InFile {
                                    path: full.clone(),
                                    source: Box::new(e),
                                },
                            })?;
                        for r in rels {
                            lib.add(line, r)?;
                        }
                    }
                    _ => return Err(Error::parse(line, "expected `use PATH` or `use builtin NAME`")),
                }
            }
            "var" => {
                let (names, values) = rest
                    .split_once(" in ")
                    .ok_or_else(|| Error::parse(line, "expected `var NAME... in VALUE...`"))?;
                let d = domain(line, values)?;
                let names: Vec<&str> = names.split_whitespace().collect();
                if names.is_empty() {
                    return Err(Error::parse(line, "expected `var NAME... in VALUE...`"));
                }
                for n in names {
                    if !is_identifier(n) {
                        return Err(Error::parse(line, format!("invalid variable name `{n}`")));
                    }
                    if variables.iter().any(|v| v.name == n) {
                        return Err(Error::parse(line, format!("variable {n} declared twice")));
                    }
                    variables.push(Variable {
                        name: n.to_string(),
                        domain: d.clone(),
                    });
                }
            }
            "constraint" => scopes.push(constraint(line, rest, &lib, &variables)?),
            _ => return Err(Error::parse(line, format!("unexpected line `{l}`"))),
        }
    }
    if !header {
        return Err(Error::parse(1, "problem files start with `csp`"));
    }
    Problem::new(variables, scopes).map_err(|e| Error::parse(0, e.to_string()))
}

fn constraint(line: usize, text: &str, lib: &Library, variables: &[Variable]) -> Result<Scope> {
    let bad = || Error::parse(line, "expected `constraint NAME(VAR, ...)`");
    let (name, args) = text.split_once('(').ok_or_else(bad)?;
    let args = args.trim().strip_suffix(')').ok_or_else(bad)?;
    let name = name.trim();
    let rel = lib
        .relations
        .get(name)
        .ok_or_else(|| Error::parse(line, format!("unknown relation {name}")))?;
    let mut vars = Vec::new();
    for a in args.split(',').map(str::trim) {
        let v = variables
            .iter()
            .position(|v| v.name == a)
            .ok_or_else(|| Error::parse(line, format!("undeclared variable `{a}`")))?;
        if vars.contains(&v) {
            return Err(Error::parse(line, format!("variable {a} occurs twice")));
        }
        vars.push(v);
    }
    if vars.len() != rel.arity() {
        return Err(Error::parse(
            line,
            format!("{name} takes {} arguments, got {}", rel.arity(), vars.len()),
        ));
    }
    for (col, &v) in vars.iter().enumerate() {
        if let Some(x) = variables[v].domain.iter().find(|x| !rel.column(col).contains(x)) {
            return Err(Error::parse(
                line,
                format!("value {x} of {} not in column {} domain of {name}", variables[v].name, col + 1),
            ));
        }
    }
    Ok(Scope {
        relation: rel.clone(),
        vars,
    })
}

/// Reads all relations of a relation file.
pub fn load_relations(path: &Path) -> Result<Vec<Relation>> {
    FsLoader.read(path).and_then(|t| {
        parse_relations(&t).map_err(|e| Error::InFile {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    })
}

/// Reads the relation called `name` from a relation file, or its only
/// relation when `name` is `None`.
pub fn load_relation(path: &Path, name: Option<&str>) -> Result<Relation> {
    let mut rels = load_relations(path)?;
    match name {
        Some(n) => rels
            .into_iter()
            .find(|r| r.name() == n)
            .ok_or_else(|| Error::invalid(format!("{}: no relation named {n}", path.display()))),
        None if rels.len() == 1 => Ok(rels.remove(0)),
        None => Err(Error::invalid(format!(
            "{} defines {} relations; choose one by name",
            path.display(),
            rels.len()
        ))),
    }
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    let text = FsLoader.read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_problem(&text, base, &FsLoader).map_err(|e| match e {
        e @ Error::InFile { .. } => e,
        e => Error::InFile {
            path: path.to_path_buf(),
            source: Box::new(e),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND: &str = "relation and 3\ndomains: 0 1 | 0 1 | 0 1\ntuples:\n0 0 0\n0 1 0\n1 0 0\n1 1 1\n";

    struct MemLoader(HashMap<PathBuf, String>);

    impl Loader for MemLoader {
        fn read(&self, path: &Path) -> Result<String> {
            self.0
                .get(path)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("missing {}", path.display())))
        }
    }

    #[test]
    fn and_file() {
        let rels = parse_relations(AND).unwrap();
        assert_eq!(rels.len(), 1);
        let and = catalogue::builtin("and").unwrap();
        assert_eq!(rels[0].tuples(), and.tuples());
        assert_eq!(rels[0].columns(), and.columns());
        assert_eq!(rels[0].tuples().len(), 4);
        assert_eq!(rels[0].column_name(2), "x3");
    }

    #[test]
    fn value_outside_domain() {
        let bad = AND.replace("0 1 0\n", "0 2 0\n");
        let err = parse_relations(&bad).unwrap_err();
        assert_eq!(err.to_string(), "line 5: value 2 not in column 2 domain");
    }

    #[test]
    fn structural_errors() {
        assert!(parse_relations("").is_err());
        assert!(parse_relations("relation a 2\ntuples:\n").is_err());
        assert!(parse_relations("relation a 0\ndomains: 0\ntuples:\n").is_err());
        assert!(parse_relations("relation a 2\ndomains: 0 | 0 | 0\ntuples:\n").is_err());
        assert!(parse_relations("relation a 2\ndomains: 0 1\ntuples:\n0 1\n0 1\n").is_err());
        assert!(parse_relations("relation a 2\ndomains: 0 1\ntuples:\n0\n").is_err());
        assert!(parse_relations("relation a 1\ndomains: 0\ntuples:\nrelation a 1\ndomains: 0\ntuples:\n").is_err());
        assert!(parse_relations("0 1\n").is_err());
    }

    #[test]
    fn shared_domain_names_and_comments() {
        let text = "# gates\nrelation ne 2   # inequality\ncolumns: a b\ndomains: r g b\ntuples:\nr g\ng r\n\nrelation one 1\ndomains: 0\ntuples:\n";
        let rels = parse_relations(text).unwrap();
        assert_eq!(rels.len(), 2);
        assert_eq!(rels[0].column(1), &Domain::of(&["r", "g", "b"]));
        assert_eq!(rels[0].column_name(1), "b");
        assert!(rels[1].is_empty());
    }

    fn mem(files: &[(&str, &str)]) -> MemLoader {
        MemLoader(files.iter().map(|(p, t)| (PathBuf::from(p), t.to_string())).collect())
    }

    #[test]
    fn add_network_file() {
        let text = "csp\nuse builtin and\nuse builtin or\nuse builtin xor\n\
                    var I1 I2 I3 O1 O2 A1 A2 X1 in 0 1\n\
                    constraint xor(I1, I2, X1)\nconstraint and(I1, I2, A1)\nconstraint xor(X1, I3, O2)\n\
                    constraint and(I3, X1, A2)\nconstraint or(A1, A2, O1)\n";
        let p = parse_problem(text, Path::new("."), &mem(&[])).unwrap();
        assert_eq!(p.variables().len(), 8);
        assert_eq!(p.scopes().len(), 5);
        assert_eq!(p.scope_label(3), "and(I3,X1,A2)");
    }

    #[test]
    fn use_relative_path() {
        let loader = mem(&[("dir/gates.rel", AND)]);
        let text = "csp\nuse gates.rel\nvar A in 1\nvar B C in 0 1\nconstraint and(A, B, C)\n";
        let p = parse_problem(text, Path::new("dir"), &loader).unwrap();
        assert_eq!(p.variables()[0].domain, Domain::of(&["1"]));
        assert!(Arc::ptr_eq(&p.scopes()[0].relation, &p.scopes()[0].relation));
    }

    #[test]
    fn problem_errors() {
        let l = mem(&[("g.rel", AND)]);
        let base = Path::new("");
        let check = |t: &str, want: &str| {
            let e = parse_problem(t, base, &l).unwrap_err().to_string();
            assert!(e.contains(want), "{e} should mention {want}");
        };
        check("var A in 0\n", "start with `csp`");
        check("csp\nuse g.rel\nvar A B in 0 1\nconstraint and(A, B, A)\n", "occurs twice");
        check("csp\nuse g.rel\nvar A B C in 0 1\nconstraint and(A, B)\n", "takes 3 arguments");
        check("csp\nuse g.rel\nvar A B in 0 1\nconstraint and(A, B, Q)\n", "undeclared");
        check("csp\nuse g.rel\nvar A B C in 0 2\nconstraint and(A, B, C)\n", "value 2 of A");
        check("csp\nvar A in 0\nconstraint nope(A)\n", "unknown relation");
        check("csp\nuse missing.rel\n", "missing");
        check("csp\nuse builtin cube\n", "unknown builtin");
        check("csp\nvar A in 0\nvar A in 1\n", "declared twice");
        check("csp\nfrobnicate\n", "unexpected line");
    }
}
