//! Edge decompositions of coupled policy runs and the lemma checks built on
//! them.

mod decompose;
mod lemmas;

pub use decompose::{decompose, decompose_capacitated, CapacitatedDecomposition, Decomposition};
pub use lemmas::{
    exact_profile, reference_table, verify, verify_charging, verify_domination, verify_many, CouplingProfile,
    DominationVariant, LemmaId, LemmaReport, Mode, Verdict, VerifyOptions, CONFIDENCE_MULTIPLIER, EXACT_TOLERANCE,
};
