use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin/sign value must be +1 or -1, got {0}")]
    InvalidSign(i64),
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("particle index must be 1 or 2, got {0}")]
    InvalidParticle(u8),
    #[error("hidden variable axis matches neither measurement axis; the subquantum correlation is defined only in the Alice or Bob description")]
    ContextMismatch,
    #[error("conditioning on the cause is undefined: p_z = {0} (need 0 < p_z < 1)")]
    DegenerateCause(f64),
    #[error("probability out of range in {what}: {value}")]
    ProbabilityOutOfRange { what: String, value: f64 },
    #[error("table `{table}` is not normalized: entries sum to {sum}")]
    NotNormalized { table: String, sum: f64 },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("{observer} filter {filter} is not available (allowed: {allowed})")]
    InvalidFilter {
        observer: &'static str,
        filter: char,
        allowed: &'static str,
    },
    #[error("no trial was registered by both observers; the joint frequencies are undefined")]
    EmptyReport,
    #[error("algorithm {algorithm} does not belong to stage {stage}")]
    AlgorithmStageMismatch { algorithm: String, stage: u8 },
    #[error("stage must be 1, 2 or 3, got {0}")]
    InvalidStage(u8),
    #[error("inequality input {position} must be stage {expected_stage} with filters ({expected_alice}, {expected_bob}), got stage {stage} with ({alice}, {bob})")]
    InequalityInputMismatch {
        position: usize,
        expected_stage: u8,
        expected_alice: char,
        expected_bob: char,
        stage: u8,
        alice: char,
        bob: char,
    },
    #[error("event colors ({alice}, {bob}) are not both sent in stage {stage}")]
    EventNotInStage { stage: u8, alice: char, bob: char },
}

pub type Result<T> = std::result::Result<T, Error>;
