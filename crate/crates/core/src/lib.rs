//! Exact computation of the kappa parameter and the maximal density of sets
//! of nonnegative integers avoiding a finite set of differences, together with
//! the closed-form bounds for the families `{a, a+1, 2a+1, n}` and
//! `{a, a+1, 2a+1, 3a+1, n}` and a harness that checks them.

pub mod arith;
pub mod density;
pub mod families;
pub mod kappa;
pub mod verify;

pub use arith::{abs_residue, normalize, rational_cmp, ArithError, DifferenceSet, Rational};
pub use kappa::{kappa_exact, kappa_sweep_oracle, witness_mset, witness_value, KappaError, KappaResult};
pub use families::{
    classify, classify_f1, classify_f2, family_set, partition_check, replay_proof_witness, BlockFamily, CaseLabel,
    Family, FamilyCase, FamilyError,
};
pub use verify::{summarize, sweep_f1, sweep_f2, SweepOptions, VerificationRecord};
