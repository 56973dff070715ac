//! Executable reductions: a unimodal learner turned into a DLPN distinguisher,
//! and a transcript distinguisher turned into a label predictor through hybrid
//! distributions.
//!
//! Hybrid convention: `H_j` carries real labels at positions `p < j` and
//! uniform labels at `p >= j`, so `H_0` is all uniform and `H_{k+1}` all real.

mod distinguisher;
mod hybrid;

pub use distinguisher::{
    build_dlpn_distinguisher, distinguisher_advantage, AdvantageReport, DistinguisherRun,
    DlpnDistinguisher, GaussUnimodal, PlantedAwareCheat, RandomUnimodal, ReductionBudget,
    UnimodalLearner,
};
pub use hybrid::{
    hybrid_advantage, predictor_pmu, predictor_pmu_traced, sample_hybrid, AgreementOracle,
    ConstantDistinguisher, GradedDistinguisher, HybridTable, LabelCheckOracle, PmuTrace,
    TranscriptDistinguisher,
};
