//! Built-in relations: Boolean gates, Kleene's three-valued equivalence, the
//! Waltz fork/T/line junctions, a small binary example, and the full adder
//! derived from its gate network.
//!
//! Waltz tables list their domain as `r l - +`. Conclusions of merged rules
//! follow column domain order, so this order decides how the CHR bodies read.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{Problem, Scope, Variable};
use crate::relation::Relation;
use crate::search::brute_force_solutions;
use crate::value::Domain;

pub const BUILTIN_NAMES: &[&str] = &[
    "and",
    "or",
    "xor",
    "kleene-equiv",
    "fork",
    "t",
    "line",
    "base-c",
    "full-adder",
];

const BOOL: &[&str] = &["0", "1"];
const KLEENE: &[&str] = &["t", "f", "u"];
const WALTZ: &[&str] = &["r", "l", "-", "+"];

fn names(rel: Relation, cols: &[&str]) -> Relation {
    rel.with_column_names(cols.iter().map(|s| s.to_string()).collect())
        .expect("valid column names")
}

fn gate(name: &str, f: impl Fn(bool, bool) -> bool) -> Relation {
    let bit = |b: bool| if b { "1" } else { "0" };
    let rows: Vec<[&str; 3]> = [(false, false), (false, true), (true, false), (true, true)]
        .into_iter()
        .map(|(x, y)| [bit(x), bit(y), bit(f(x, y))])
        .collect();
    let rows: Vec<&[&str]> = rows.iter().map(|r| r.as_slice()).collect();
    names(Relation::from_table(name, BOOL, 3, &rows), &["x", "y", "z"])
}

/// Looks up a built-in relation by its catalogue name.
pub fn builtin(name: &str) -> Result<Relation> {
    let rel = match name {
        "and" => gate("and", |x, y| x && y),
        "or" => gate("or", |x, y| x || y),
        "xor" => gate("xor", |x, y| x != y),
        "kleene-equiv" => names(
            Relation::from_table(
                "equiv",
                KLEENE,
                3,
                &[
                    &["t", "t", "t"],
                    &["t", "f", "f"],
                    &["t", "u", "u"],
                    &["f", "t", "f"],
                    &["f", "f", "t"],
                    &["f", "u", "u"],
                    &["u", "t", "u"],
                    &["u", "f", "u"],
                    &["u", "u", "u"],
                ],
            ),
            &["x", "y", "z"],
        ),
        "fork" => names(
            Relation::from_table(
                "fork",
                WALTZ,
                3,
                &[
                    &["+", "+", "+"],
                    &["-", "-", "-"],
                    &["l", "r", "-"],
                    &["-", "l", "r"],
                    &["r", "-", "l"],
                ],
            ),
            &["x", "y", "z"],
        ),
        "t" => names(
            Relation::from_table(
                "t",
                WALTZ,
                3,
                &[&["r", "l", "+"], &["r", "l", "-"], &["r", "l", "r"], &["r", "l", "l"]],
            ),
            &["x", "y", "z"],
        ),
        "line" => names(
            Relation::from_table("line", WALTZ, 2, &[&["+", "+"], &["-", "-"], &["l", "r"], &["r", "l"]]),
            &["x", "y"],
        ),
        "base-c" => names(
            Relation::from_table("c", &["0", "1", "2"], 2, &[&["0", "1"], &["1", "0"], &["2", "2"]]),
            &["x", "y"],
        ),
        "full-adder" => full_adder()?,
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    Ok(rel)
}

/// The full adder as a gate network over `I1 I2 I3 O1 O2 A1 A2 X1`, every
/// domain `{0,1}`:
/// `xor(I1,I2,X1) and(I1,I2,A1) xor(X1,I3,O2) and(I3,X1,A2) or(A1,A2,O1)`.
pub fn add_network() -> Problem {
    let and = Arc::new(builtin("and").expect("builtin"));
    let or = Arc::new(builtin("or").expect("builtin"));
    let xor = Arc::new(builtin("xor").expect("builtin"));
    let order = ["I1", "I2", "I3", "O1", "O2", "A1", "A2", "X1"];
    let variables = order
        .iter()
        .map(|n| Variable {
            name: n.to_string(),
            domain: Domain::of(BOOL),
        })
        .collect();
    let ix = |n: &str| order.iter().position(|o| *o == n).expect("declared");
    let scope = |rel: &Arc<Relation>, vs: [&str; 3]| Scope {
        relation: rel.clone(),
        vars: vs.iter().map(|v| ix(v)).collect(),
    };
    let scopes = vec![
        scope(&xor, ["I1", "I2", "X1"]),
        scope(&and, ["I1", "I2", "A1"]),
        scope(&xor, ["X1", "I3", "O2"]),
        scope(&and, ["I3", "X1", "A2"]),
        scope(&or, ["A1", "A2", "O1"]),
    ];
    Problem::new(variables, scopes).expect("well-formed network")
}

/// The 5-ary `full_adder(I1,I2,I3,O1,O2)` table: solutions of
/// [`add_network`] projected on its inputs and outputs.
fn full_adder() -> Result<Relation> {
    let net = add_network();
    let keep: Vec<usize> = ["I1", "I2", "I3", "O1", "O2"]
        .iter()
        .map(|n| net.var_index(n).expect("declared"))
        .collect();
    let tuples = brute_force_solutions(&net)?
        .into_iter()
        .map(|s| keep.iter().map(|&i| s.values[i].clone()).collect())
        .collect();
    let rel = Relation::new("full_adder", vec![Domain::of(BOOL); 5], tuples)?;
    Ok(names(rel, &["i1", "i2", "i3", "o1", "o2"]))
}
