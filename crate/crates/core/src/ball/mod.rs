//! Classical colored-ball analogue of the spin experiment.
//!
//! Sam sends each observer two balls per trial, one of each color of the
//! stage's color pair, following one of two complementary executive
//! algorithms chosen with equal chance. Alice and Bob each own a detector
//! tuned to a single color and upload what they registered to a remote
//! computer, which tabulates joint frequencies over trials registered by
//! both. The observers share no state; the only channels are Sam to each
//! observer and each observer to the remote computer.

mod actors;
mod algorithm;
mod inequality;
mod stage;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use actors::{Detection, Detector, RemoteComputer, Tally, Weight};
pub use algorithm::{AlgorithmId, AlgorithmTable, Emission, Quadruple, Sam, SignedBall};
pub use inequality::{bell_inequality_check, InequalityReport};
pub use stage::{
    analytic_stage, common_cause_model, conditional_correlation, contextual_decomposition,
    run_stage, run_stage_with, stage_trial, AggregateReport, AlgorithmStats, Decomposition,
    DecompositionTerm, JointEvent, ReportMode, StageConfig, StageCounts, TrialOutcome,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Color {
    Amber,
    Blue,
    Cherry,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Amber, Color::Blue, Color::Cherry];

    pub fn letter(self) -> char {
        match self {
            Color::Amber => 'a',
            Color::Blue => 'b',
            Color::Cherry => 'c',
        }
    }

    pub fn from_letter(letter: &str) -> Option<Color> {
        match letter.trim().to_ascii_lowercase().as_str() {
            "a" | "amber" => Some(Color::Amber),
            "b" | "blue" => Some(Color::Blue),
            "c" | "cherry" => Some(Color::Cherry),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl TryFrom<String> for Color {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        Color::from_letter(&s).ok_or_else(|| format!("unknown color `{s}` (expected a, b or c)"))
    }
}

impl From<Color> for String {
    fn from(c: Color) -> String {
        c.letter().to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observer {
    Alice,
    Bob,
}

impl Observer {
    pub fn name(self) -> &'static str {
        match self {
            Observer::Alice => "alice",
            Observer::Bob => "bob",
        }
    }

    /// Colors this observer's detector can be tuned to.
    pub fn allowed_filters(self) -> [Color; 2] {
        match self {
            Observer::Alice => [Color::Amber, Color::Cherry],
            Observer::Bob => [Color::Blue, Color::Cherry],
        }
    }

    pub fn validate_filter(self, filter: Color) -> Result<()> {
        if self.allowed_filters().contains(&filter) {
            Ok(())
        } else {
            Err(Error::InvalidFilter {
                observer: self.name(),
                filter: filter.letter(),
                allowed: match self {
                    Observer::Alice => "a, c",
                    Observer::Bob => "b, c",
                },
            })
        }
    }

    /// The other color this observer's detector can be tuned to.
    pub fn alternate_filter(self, filter: Color) -> Color {
        let [first, second] = self.allowed_filters();
        if filter == first {
            second
        } else {
            first
        }
    }
}

/// One of the three stages, sending the color pairs `(a,b)`, `(a,c)` and
/// `(c,b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Stage {
    First,
    Second,
    Third,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::First, Stage::Second, Stage::Third];

    pub fn number(self) -> u8 {
        match self {
            Stage::First => 1,
            Stage::Second => 2,
            Stage::Third => 3,
        }
    }

    /// `(fixed, variable)`: the color whose signs the algorithm fixes and the
    /// color whose signs it draws. These are also the default filters of Alice
    /// and Bob respectively.
    pub fn colors(self) -> (Color, Color) {
        match self {
            Stage::First => (Color::Amber, Color::Blue),
            Stage::Second => (Color::Amber, Color::Cherry),
            Stage::Third => (Color::Cherry, Color::Blue),
        }
    }

    pub fn sends(self, color: Color) -> bool {
        let (f, v) = self.colors();
        color == f || color == v
    }

    pub fn algorithms(self) -> [AlgorithmId; 2] {
        match self {
            Stage::First => [AlgorithmId::A1, AlgorithmId::A2],
            Stage::Second => [AlgorithmId::A1Prime, AlgorithmId::A2Prime],
            Stage::Third => [AlgorithmId::A1DoublePrime, AlgorithmId::A2DoublePrime],
        }
    }
}

impl TryFrom<u8> for Stage {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Stage::First),
            2 => Ok(Stage::Second),
            3 => Ok(Stage::Third),
            other => Err(Error::InvalidStage(other)),
        }
    }
}

impl From<Stage> for u8 {
    fn from(s: Stage) -> u8 {
        s.number()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Probability that, under the first algorithm of a stage, Bob receives the
/// variable-color ball with sign `+`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    pub p_stage1: f64,
    pub p_stage23: f64,
}

impl Default for BallParams {
    fn default() -> Self {
        BallParams {
            p_stage1: 0.15,
            p_stage23: 0.04,
        }
    }
}

impl BallParams {
    pub fn for_stage(&self, stage: Stage) -> f64 {
        match stage {
            Stage::First => self.p_stage1,
            Stage::Second | Stage::Third => self.p_stage23,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, p) in [("p_stage1", self.p_stage1), ("p_stage23", self.p_stage23)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange {
                    what: what.to_string(),
                    value: p,
                });
            }
        }
        Ok(())
    }
}
