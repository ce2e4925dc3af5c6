//! Generation of propagation rules from constraints given as tables.
//!
//! A relation over finite domains yields two families of rules:
//!
//! * membership rules `x=s, ... -> y!=a`, which fire when premise variables
//!   are fixed, and whose closure is *rule consistency*;
//! * inclusion rules `x in S, ... -> y!=a`, which fire when premise domains
//!   shrink inside the given sets, and whose closure coincides with
//!   generalised arc consistency.
//!
//! Only minimal valid rules are generated. They can be printed natively or
//! as CHR propagation rules, and run directly by the fixpoint propagator in
//! [`propagate`] underneath the labeling search in [`search`].
//!
//! ```
//! use rulegen::{catalogue, generate_rules, native};
//!
//! let and = catalogue::builtin("and").unwrap();
//! let rules = generate_rules(&and, 2);
//! assert_eq!(rules.len(), 7);
//! assert!(native::render_rules(&and, &rules.rules, true).contains("z=1 -> x!=0, y!=0"));
//! ```

pub mod catalogue;
pub mod chr;
mod error;
pub mod inclusion;
pub mod native;
pub mod oracle;
pub mod parse;
mod problem;
pub mod propagate;
mod relation;
pub mod rules;
pub mod search;
mod value;

pub use error::{Error, Result};
pub use inclusion::{generate_inclusion_rules, InclusionRule, InclusionRuleSet};
pub use problem::{Problem, Scope, Variable};
pub use propagate::{DomainStore, Mode, Propagators};
pub use relation::{tuple_project, Relation, Tuple};
pub use rules::{generate_rules, merge_by_premise, MergedGroup, Rule, RuleSet};
pub use search::{solve_all, Solution};
pub use value::{Domain, Value};
