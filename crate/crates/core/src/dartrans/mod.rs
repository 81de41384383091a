//! Application of evolution patterns to concrete dartwins.
//!
//! A [`Binding`] maps the pattern's before twin onto a target dartwin and
//! names the elements the after twin introduces. [`check_applicability`]
//! decides whether that mapping is sound; [`apply_transformation`] then
//! runs the five-step procedure — bind, reduce to the core, extend with
//! the after twin, sever the pattern references — and reports what changed.

mod applicability;
mod apply;
mod binding;

pub use applicability::{
    check_applicability, ApplicabilityReport, Violation, ViolationReason,
};
pub use apply::{
    apply_transformation, extend_with_after, reduce_to_core, ApplyError, ApplyOutcome,
};
pub use binding::{parse_binding, Binding, BindingError};
