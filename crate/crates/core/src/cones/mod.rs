//! Membership tests for `CP ⊆ DNN ⊆ PSD ∪ NN ⊆ SPN ⊆ COP`, the Horn matrix and Parrilo cones.

mod eig;
mod sym;

pub use eig::{eig_sym, eig_sym_vectors, SymEigen};
pub use sym::{frobenius, SymMatrix};
mod membership;

pub use membership::{
    copositivity_sample_check, horn_matrix, is_dnn, is_nn, is_nn_exact, is_psd, is_spn, not_in_cone_witness,
    parrilo_membership, Cone, MembershipReport, SampleCheck, SpnOptions, Verdict, Witness, WitnessMode,
};
