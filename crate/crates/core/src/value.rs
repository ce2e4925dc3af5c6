use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An opaque symbolic token such as `0`, `t`, `+` or `m-`.
///
/// Values carry no numeric meaning; two values are equal iff their tokens are.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value(Arc<str>);

impl Value {
    /// Validates a token: nonempty, no whitespace and none of `| , # ( )`.
    pub fn parse(token: &str) -> Result<Value> {
        if token.is_empty() {
            return Err(Error::invalid("empty value token"));
        }
        if let Some(c) = token
            .chars()
            .find(|c| c.is_whitespace() || matches!(c, '|' | ',' | '#' | '(' | ')'))
        {
            return Err(Error::invalid(format!(
                "value `{token}` contains forbidden character {c:?}"
            )));
        }
        Ok(Value(token.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Value {
    fn from(token: &str) -> Self {
        Value(token.into())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered, duplicate-free finite set of values.
///
/// Iteration follows declaration order, and everything downstream that
/// enumerates values inherits that order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Domain(Vec<Value>);

impl Domain {
    pub fn new(values: Vec<Value>) -> Result<Domain> {
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::invalid(format!("duplicate value `{v}` in domain")));
            }
        }
        Ok(Domain(values))
    }

    /// Builds a domain from string tokens. Panics on duplicates; meant for
    /// literals in code and tests.
    pub fn of(tokens: &[&str]) -> Domain {
        Domain::new(tokens.iter().map(|t| Value::from(*t)).collect()).expect("duplicate token")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.0.contains(v)
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }

    pub fn get(&self, i: usize) -> Option<&Value> {
        self.0.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Value> {
        self.0.iter()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    /// Set inclusion, ignoring order.
    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    /// Set equality, ignoring order.
    pub fn same_set(&self, other: &Domain) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }

    /// The values of `self` that satisfy `keep`, in `self`'s order.
    pub fn filter(&self, mut keep: impl FnMut(&Value) -> bool) -> Domain {
        Domain(self.0.iter().filter(|v| keep(v)).cloned().collect())
    }
}

impl<'a> IntoIterator for &'a Domain {
    type Item = &'a Value;
    type IntoIter = std::slice::Iter<'a, Value>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Domain {
    /// Renders as `{a,b,c}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
