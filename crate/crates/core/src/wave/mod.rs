//! Propagated sequences `UⁿXU⁻ⁿ`, their Cesàro means, the exact identities
//! they satisfy, and convergence experiments.

mod cesaro;
mod experiment;
mod lemma;
mod propagate;
mod proposition;

pub use cesaro::{cesaro, cesaro_means, CesaroAccumulator};
pub use experiment::{fit_decay, run_experiment, ConvergenceReport, DecayFit, ExperimentSetup, TestFamily, Trace};
pub use lemma::{
    commutator, eta, eta_block, eta_range, formal_sum, verify_eta_reflection, verify_lemma_1, verify_lemma_2,
    verify_symmetric_reformulation, verify_telescoping, EtaSequence, LemmaSetup, PairingTable, PRECONDITION_TOL,
};
pub use propagate::{
    cesaro_propagate, difference_pairing, geometric_mean_bound, phase_average, propagate, propagate_with, sum_pairing,
    DiagonalUnitary,
};
pub use proposition::{check_proposition_forward, construct_y, symmetrize, YDiagnostics};
