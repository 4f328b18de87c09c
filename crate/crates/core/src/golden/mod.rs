//! Reference machines and the checks that compare designs against them.

pub mod compliance;
pub mod emit;
pub mod equiv;
pub mod model;
pub mod run;

pub use compliance::{reset_compliance, Compliance, ComplianceReport, ResetViolation};
pub use emit::to_systemverilog;
pub use equiv::{equiv_check, reset_prologue, Counterexample, EquivConfig, EquivError, RandomFallback, Verdict};
pub use model::{
    golden_step, CompiledFsm, FsmModel, GoldenError, GoldenState, MealyRule, RegisterDecl, ResetKind, SignalDecl,
    Transition,
};
pub use run::{golden_run, GoldenRunner};
