//! Flattening: collapse specialization and redefinition into effective
//! trees, and derive change sets between the twins of an evolution
//! pattern.

mod changeset;
mod effective;
mod json;

pub use changeset::{diff, ChangeSet, DiffError};
pub(crate) use effective::construct_for;
pub use effective::{
    effective_members, flatten, Contribution, EffId, EffNode, EffectiveMember, EffectiveModel,
    FlattenError,
};
pub use json::export_effective_json;
