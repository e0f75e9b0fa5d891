use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BallParams, Color, Observer, Stage};
use crate::error::{Error, Result};
use crate::sign::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmId {
    #[serde(rename = "A1")]
    A1,
    #[serde(rename = "A2")]
    A2,
    #[serde(rename = "A1'")]
    A1Prime,
    #[serde(rename = "A2'")]
    A2Prime,
    #[serde(rename = "A1''")]
    A1DoublePrime,
    #[serde(rename = "A2''")]
    A2DoublePrime,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::A1,
        AlgorithmId::A2,
        AlgorithmId::A1Prime,
        AlgorithmId::A2Prime,
        AlgorithmId::A1DoublePrime,
        AlgorithmId::A2DoublePrime,
    ];

    pub fn stage(self) -> Stage {
        match self {
            AlgorithmId::A1 | AlgorithmId::A2 => Stage::First,
            AlgorithmId::A1Prime | AlgorithmId::A2Prime => Stage::Second,
            AlgorithmId::A1DoublePrime | AlgorithmId::A2DoublePrime => Stage::Third,
        }
    }

    /// Whether this is the sign-mirrored member of its stage's pair.
    pub fn is_complement(self) -> bool {
        matches!(
            self,
            AlgorithmId::A2 | AlgorithmId::A2Prime | AlgorithmId::A2DoublePrime
        )
    }

    /// Position within the stage pair: 0 for the first algorithm, 1 for its
    /// complement.
    pub fn slot(self) -> usize {
        usize::from(self.is_complement())
    }

    pub fn label(self) -> &'static str {
        match self {
            AlgorithmId::A1 => "A1",
            AlgorithmId::A2 => "A2",
            AlgorithmId::A1Prime => "A1'",
            AlgorithmId::A2Prime => "A2'",
            AlgorithmId::A1DoublePrime => "A1''",
            AlgorithmId::A2DoublePrime => "A2''",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedBall {
    pub color: Color,
    pub sign: Sign,
    pub addressee: Observer,
}

impl SignedBall {
    pub fn new(color: Color, sign: Sign, addressee: Observer) -> Self {
        SignedBall {
            color,
            sign,
            addressee,
        }
    }

    fn mirrored(self) -> Self {
        SignedBall {
            sign: -self.sign,
            ..self
        }
    }
}

impl fmt::Display for SignedBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let who = match self.addressee {
            Observer::Alice => 'A',
            Observer::Bob => 'B',
        };
        write!(f, "{}_{}{}", self.color, who, self.sign.symbol())
    }
}

/// The four balls of one trial, written `(x_A, y_A; y_B, x_B)` with `x` the
/// fixed color and `y` the variable color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadruple {
    pub alice: [SignedBall; 2],
    pub bob: [SignedBall; 2],
}

impl Quadruple {
    fn mirrored(self) -> Self {
        Quadruple {
            alice: self.alice.map(SignedBall::mirrored),
            bob: self.bob.map(SignedBall::mirrored),
        }
    }

    /// Same-color balls sent to different observers carry opposite signs.
    pub fn satisfies_anticorrelation(&self) -> bool {
        self.alice.iter().all(|a| {
            self.bob
                .iter()
                .filter(|b| b.color == a.color)
                .all(|b| b.sign == -a.sign)
        })
    }

    pub fn sign_of(&self, observer: Observer, color: Color) -> Option<Sign> {
        let balls = match observer {
            Observer::Alice => &self.alice,
            Observer::Bob => &self.bob,
        };
        balls.iter().find(|b| b.color == color).map(|b| b.sign)
    }

    /// Hands each observer the two balls addressed to them.
    pub fn dispatch(self) -> ([SignedBall; 2], [SignedBall; 2]) {
        (self.alice, self.bob)
    }
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}; {}, {})",
            self.alice[0], self.alice[1], self.bob[0], self.bob[1]
        )
    }
}

/// One executive algorithm as a frequency table over quadruples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmTable {
    pub id: AlgorithmId,
    pub stage: Stage,
    /// Probability of the configuration in which Bob's variable-color ball
    /// carries the same sign as Alice's fixed-color ball.
    pub conditional_prob: f64,
    pub rows: Vec<(Quadruple, f64)>,
}

impl AlgorithmTable {
    /// Builds the table for `id`. First algorithms send Alice the fixed color
    /// with `+`; complements are the same table with every sign flipped.
    pub fn new(id: AlgorithmId, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange {
                what: format!("conditional probability of {id}"),
                value: p,
            });
        }
        let stage = id.stage();
        let (fixed, variable) = stage.colors();
        let quad = |alice_var: Sign| Quadruple {
            alice: [
                SignedBall::new(fixed, Sign::Plus, Observer::Alice),
                SignedBall::new(variable, alice_var, Observer::Alice),
            ],
            bob: [
                SignedBall::new(variable, -alice_var, Observer::Bob),
                SignedBall::new(fixed, Sign::Minus, Observer::Bob),
            ],
        };
        let mut rows = vec![(quad(Sign::Minus), p), (quad(Sign::Plus), 1.0 - p)];
        if id.is_complement() {
            for row in &mut rows {
                row.0 = row.0.mirrored();
            }
        }
        Ok(AlgorithmTable {
            id,
            stage,
            conditional_prob: p,
            rows,
        })
    }

    pub fn stage_pair(stage: Stage, params: &BallParams) -> Result<[AlgorithmTable; 2]> {
        let p = params.for_stage(stage);
        let [first, second] = stage.algorithms();
        Ok([AlgorithmTable::new(first, p)?, AlgorithmTable::new(second, p)?])
    }

    /// `Pr(event | this algorithm)` for an event over the emitted quadruple.
    pub fn probability<F: Fn(&Quadruple) -> bool>(&self, event: F) -> f64 {
        self.rows
            .iter()
            .filter(|(q, _)| event(q))
            .map(|(_, p)| p)
            .sum()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Quadruple {
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        for (quad, p) in &self.rows {
            cumulative += p;
            if u < cumulative {
                return *quad;
            }
        }
        // u lies above the rounded cumulative sum: take the last row that
        // can occur.
        self.rows
            .iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .map(|(q, _)| *q)
            .expect("table has a row with positive probability")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emission {
    pub algorithm: AlgorithmId,
    pub quadruple: Quadruple,
}

/// The sender. Holds the stage's two complementary algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct Sam {
    tables: [AlgorithmTable; 2],
}

impl Sam {
    pub fn new(stage: Stage, params: &BallParams) -> Result<Self> {
        Ok(Sam {
            tables: AlgorithmTable::stage_pair(stage, params)?,
        })
    }

    pub fn tables(&self) -> &[AlgorithmTable; 2] {
        &self.tables
    }

    /// Picks an algorithm with probability 1/2 each, then a quadruple from
    /// its table.
    pub fn emit<R: Rng + ?Sized>(&self, rng: &mut R) -> Emission {
        let table = if rng.random::<bool>() {
            &self.tables[0]
        } else {
            &self.tables[1]
        };
        Emission {
            algorithm: table.id,
            quadruple: table.draw(rng),
        }
    }
}
