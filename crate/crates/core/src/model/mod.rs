//! Values, facts, instances, and the homomorphism machinery (cores, isomorphism).

pub mod factfile;
mod hom;
mod instance;
mod value;

pub use hom::{compute_core, find_homomorphism, instances_isomorphic, is_core, Homomorphism};
pub use instance::{Fact, Instance, Relation, Schema};
pub use value::{Constant, Null, SkolemTerm, Value};

pub use factfile::{parse_facts, parse_facts_inferred, write_facts};
pub(crate) use value::write_quoted;

/// Connected components of the fact graph of `inst`.
pub fn blocks(inst: &Instance) -> Vec<Instance> {
    inst.blocks()
}
