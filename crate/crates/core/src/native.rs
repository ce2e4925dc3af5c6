//! Plain-text rule format, one rule or merged group per line:
//!
//! ```text
//! true -> x!=l
//! x=1, y=1 -> z!=0
//! z=1 -> x!=0, y!=0
//! x in {0,1} -> y!=2
//! ```
//!
//! Columns are written with the relation's column names. `#` starts a
//! comment line.

use crate::error::{Error, Result};
use crate::inclusion::InclusionRule;
use crate::relation::Relation;
use crate::rules::{merge_by_premise, Rule};
use crate::value::{Domain, Value};

fn premise_text(items: Vec<String>) -> String {
    if items.is_empty() {
        "true".to_string()
    } else {
        items.join(", ")
    }
}

fn conclusions_text(rel: &Relation, conclusions: &[(usize, Value)]) -> String {
    conclusions
        .iter()
        .map(|(c, v)| format!("{}!={}", rel.column_name(*c), v))
        .collect::<Vec<_>>()
        .join(", ")
}

fn membership_premise(rel: &Relation, premise: &[(usize, Value)]) -> String {
    premise_text(premise.iter().map(|(c, v)| format!("{}={}", rel.column_name(*c), v)).collect())
}

fn inclusion_premise(rel: &Relation, premise: &[(usize, Domain)]) -> String {
    premise_text(
        premise
            .iter()
            .map(|(c, s)| match s.len() {
                1 => format!("{}={}", rel.column_name(*c), s.get(0).expect("singleton")),
                _ => format!("{} in {}", rel.column_name(*c), s),
            })
            .collect(),
    )
}

pub fn render_rule(rel: &Relation, r: &Rule) -> String {
    format!(
        "{} -> {}",
        membership_premise(rel, &r.premise),
        conclusions_text(rel, &[(r.column, r.value.clone())])
    )
}

pub fn render_inclusion_rule(rel: &Relation, r: &InclusionRule) -> String {
    format!(
        "{} -> {}",
        inclusion_premise(rel, &r.premise),
        conclusions_text(rel, &[(r.column, r.value.clone())])
    )
}

/// One line per rule, or per premise group when `merge` is set.
pub fn render_rules(rel: &Relation, rules: &[Rule], merge: bool) -> String {
    if !merge {
        return rules.iter().map(|r| render_rule(rel, r) + "\n").collect();
    }
    merge_by_premise(rel, rules)
        .iter()
        .map(|g| format!("{} -> {}\n", membership_premise(rel, &g.premise), conclusions_text(rel, &g.conclusions)))
        .collect()
}

pub fn render_inclusion_rules(rel: &Relation, rules: &[InclusionRule], merge: bool) -> String {
    if !merge {
        return rules.iter().map(|r| render_inclusion_rule(rel, r) + "\n").collect();
    }
    merge_by_premise(rel, rules)
        .iter()
        .map(|g| format!("{} -> {}\n", inclusion_premise(rel, &g.premise), conclusions_text(rel, &g.conclusions)))
        .collect()
}

fn column(rel: &Relation, line: usize, name: &str) -> Result<usize> {
    rel.column_index(name)
        .ok_or_else(|| Error::parse(line, format!("unknown column `{name}` of {}", rel.name())))
}

fn value(rel: &Relation, line: usize, col: usize, token: &str) -> Result<Value> {
    let v = Value::parse(token).map_err(|e| Error::parse(line, e.to_string()))?;
    if !rel.column(col).contains(&v) {
        return Err(Error::parse(
            line,
            format!("value {v} not in domain of column {}", rel.column_name(col)),
        ));
    }
    Ok(v)
}

/// Splits `premise -> conclusions` lines, skipping blanks and comments.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_rule(line: usize, text: &str) -> Result<(Vec<&str>, Vec<&str>)> {
    let (lhs, rhs) = text
        .split_once(" -> ")
        .ok_or_else(|| Error::parse(line, "expected `premise -> conclusion`"))?;
    let premise = match lhs.trim() {
        "true" => Vec::new(),
        l => l.split(", ").map(str::trim).collect(),
    };
    let conclusions: Vec<&str> = rhs.split(", ").map(str::trim).collect();
    Ok((premise, conclusions))
}

fn conclusions(rel: &Relation, line: usize, items: &[&str]) -> Result<Vec<(usize, Value)>> {
    items
        .iter()
        .map(|item| {
            let (c, v) = item
                .split_once("!=")
                .ok_or_else(|| Error::parse(line, format!("expected `column!=value`, got `{item}`")))?;
            let col = column(rel, line, c.trim())?;
            Ok((col, value(rel, line, col, v.trim())?))
        })
        .collect()
}

fn check_premise_columns<T>(line: usize, premise: &mut [(usize, T)], concl: &[(usize, Value)]) -> Result<()> {
    premise.sort_by_key(|(c, _)| *c);
    if premise.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::parse(line, "column repeated in premise"));
    }
    if concl.iter().any(|(c, _)| premise.iter().any(|(p, _)| p == c)) {
        return Err(Error::parse(line, "conclusion column also occurs in premise"));
    }
    Ok(())
}

/// Parses rules for `rel`; merged lines expand to one rule per conclusion.
pub fn parse_rules(rel: &Relation, text: &str) -> Result<Vec<Rule>> {
    let mut out = Vec::new();
    for (line, l) in lines(text) {
        let (p, c) = split_rule(line, l)?;
        let mut premise = p
            .iter()
            .map(|item| {
                let (c, v) = item
                    .split_once('=')
                    .ok_or_else(|| Error::parse(line, format!("expected `column=value`, got `{item}`")))?;
                let col = column(rel, line, c.trim())?;
                Ok((col, value(rel, line, col, v.trim())?))
            })
            .collect::<Result<Vec<_>>>()?;
        let concl = conclusions(rel, line, &c)?;
        check_premise_columns(line, &mut premise, &concl)?;
        out.extend(concl.into_iter().map(|(c, v)| Rule::new(premise.clone(), c, v)));
    }
    Ok(out)
}

/// Parses inclusion rules (`x in {a,b}` or `x=a` premise items).
pub fn parse_inclusion_rules(rel: &Relation, text: &str) -> Result<Vec<InclusionRule>> {
    let mut out = Vec::new();
    for (line, l) in lines(text) {
        let (p, c) = split_rule(line, l)?;
        let mut premise = p
            .iter()
            .map(|item| {
                if let Some((c, set)) = item.split_once(" in ") {
                    let col = column(rel, line, c.trim())?;
                    let body = set
                        .trim()
                        .strip_prefix('{')
                        .and_then(|s| s.strip_suffix('}'))
                        .ok_or_else(|| Error::parse(line, format!("expected `{{...}}`, got `{set}`")))?;
                    let values = body
                        .split(',')
                        .map(|t| value(rel, line, col, t.trim()))
                        .collect::<Result<Vec<_>>>()?;
                    let d = Domain::new(values).map_err(|e| Error::parse(line, e.to_string()))?;
                    Ok((col, d))
                } else {
                    let (c, v) = item
                        .split_once('=')
                        .ok_or_else(|| Error::parse(line, format!("expected `column=value`, got `{item}`")))?;
                    let col = column(rel, line, c.trim())?;
                    Ok((col, Domain::new(vec![value(rel, line, col, v.trim())?]).expect("singleton")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let concl = conclusions(rel, line, &c)?;
        check_premise_columns(line, &mut premise, &concl)?;
        out.extend(concl.into_iter().map(|(c, v)| InclusionRule::new(premise.clone(), c, v)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::inclusion::generate_inclusion_rules;
    use crate::rules::generate_rules;

    #[test]
    fn and_rendering() {
        let and = catalogue::builtin("and").unwrap();
        let rs = generate_rules(&and, 2);
        let text = render_rules(&and, &rs.rules, false);
        assert!(text.starts_with("x=0 -> z!=1\n"));
        assert!(text.contains("x=1, y=1 -> z!=0\n"));
        let merged = render_rules(&and, &rs.rules, true);
        assert!(merged.contains("z=1 -> x!=0, y!=0\n"));
        assert_eq!(merged.lines().count(), 6);
        assert_eq!(parse_rules(&and, &text).unwrap(), rs.rules);
        assert_eq!(parse_rules(&and, &merged).unwrap(), rs.rules);
    }

    #[test]
    fn empty_premise_and_symbols() {
        let t = catalogue::builtin("t").unwrap();
        let rs = generate_rules(&t, 2);
        let merged = render_rules(&t, &rs.rules, true);
        assert_eq!(merged, "true -> x!=l, x!=-, x!=+, y!=r, y!=-, y!=+\n");
        let mut back = parse_rules(&t, &merged).unwrap();
        let mut orig = rs.rules.clone();
        back.sort_by_key(|r| (r.column, r.value.clone()));
        orig.sort_by_key(|r| (r.column, r.value.clone()));
        assert_eq!(back, orig);
    }

    #[test]
    fn inclusion_round_trip() {
        let c = catalogue::builtin("base-c").unwrap();
        let rs = generate_inclusion_rules(&c, 1).unwrap();
        let text = render_inclusion_rules(&c, &rs.rules, false);
        assert!(text.contains("x in {0,1} -> y!=2\n"));
        assert!(text.contains("x in {0,2} -> y!=0\n"));
        assert!(!text.contains("x=2 "));
        assert_eq!(parse_inclusion_rules(&c, &text).unwrap(), rs.rules);
    }

    #[test]
    fn parse_errors() {
        let and = catalogue::builtin("and").unwrap();
        let err = parse_rules(&and, "# c\nx=0 -> z!=1\nx=2 -> z!=1\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
        assert!(parse_rules(&and, "w=0 -> z!=1").is_err());
        assert!(parse_rules(&and, "x=0 => z!=1").is_err());
        assert!(parse_rules(&and, "x=0 -> x!=1").is_err());
        assert!(parse_rules(&and, "x=0, x=1 -> z!=1").is_err());
        assert!(parse_inclusion_rules(&and, "x in 0,1 -> z!=1").is_err());
    }
}
