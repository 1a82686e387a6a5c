//! Formulas, tgds and schema mappings: syntax, parsing, printing and evaluation.

mod ast;
mod decompose;
mod eval;
mod parser;
mod print;

pub use ast::{fresh_var, validate_source_formula, Atom, CertainQuery, Cq, Formula, SchemaMapping, Term, Tgd, Var};
pub use decompose::decompose;
pub use eval::{eval_formula, ground_answers, Evaluator, Tuple};
pub use parser::{parse_cq, parse_formula, parse_mapping};

pub(crate) use ast::join;
