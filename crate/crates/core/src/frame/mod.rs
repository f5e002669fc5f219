//! Schauder frames of integer translates `(T_{λ_n} f, g*_n)` for `L^p(ℝ)`, `p > 2`.

pub mod indices;
pub mod neumann;
pub mod schedule;
pub mod sequence;
pub mod system;

pub use indices::{choose_indices, verify_conditions, ConditionReport, IndexTable, TableEntry};
pub use neumann::NeumannOutcome;
pub use schedule::{certify_analytic_bound, choose_schedule, FrameSchedule, ScheduleMode, Tail};
pub use sequence::TranslationSequence;
pub use system::FrameSystem;
