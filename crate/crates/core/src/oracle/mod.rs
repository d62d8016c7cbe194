//! Exhaustive small-instance ground truth: a Toeplitz universal-2 family,
//! exact expected security distances, and checks of the proven
//! inequalities that the key-length bounds rest on.

mod instances;
mod suite;
mod toeplitz;
mod verify;

pub use instances::{instance_rng, mixed_reference, probe_references, random_joint_table, random_map};
pub use suite::{verification_suite, Level, SuiteReport};
pub use toeplitz::ToeplitzFamily;
pub use verify::{
    expected_security_distance, sampled_security_distance, verify_appendix_lemmas, verify_exponential, verify_leftover,
    verify_leftover_with, verify_universal, AppendixConfig, ExpectedDistance, Hooks, VerificationReport,
    CHECK_TOLERANCE, WORK_CAP,
};
