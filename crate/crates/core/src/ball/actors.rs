use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::{AlgorithmId, Color, Observer, SignedBall};
use crate::error::Result;
use crate::sign::Sign;

/// An observer's color-recognizer. It registers the passage of every ball
/// but records a sign only for balls of its filter color.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Detector {
    observer: Observer,
    filter: Color,
}

/// What one observer uploads for one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub observer: Observer,
    pub filter: Color,
    pub passed: u8,
    pub recorded: Option<Sign>,
}

impl Detector {
    pub fn new(observer: Observer, filter: Color) -> Result<Self> {
        observer.validate_filter(filter)?;
        Ok(Detector { observer, filter })
    }

    pub fn observer(&self) -> Observer {
        self.observer
    }

    pub fn filter(&self) -> Color {
        self.filter
    }

    pub fn detect(&self, balls: [SignedBall; 2]) -> Detection {
        debug_assert!(balls.iter().all(|b| b.addressee == self.observer));
        Detection {
            observer: self.observer,
            filter: self.filter,
            passed: balls.len() as u8,
            recorded: balls.iter().find(|b| b.color == self.filter).map(|b| b.sign),
        }
    }
}

/// Count type of a [`Tally`]: `u64` for simulated trials, `f64` for exact
/// probability weights.
pub trait Weight: Copy + Default + AddAssign + Send + Sync {
    fn to_f64(self) -> f64;
}

impl Weight for u64 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Weight for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

/// Accumulated uploads. Sign indices are 0 for `+` and 1 for `-`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally<W> {
    pub trials: W,
    pub passages: [W; 2],
    pub recorded: [W; 2],
    pub registered: W,
    /// `[alice_sign][bob_sign]` over jointly registered trials.
    pub joint: [[W; 2]; 2],
    /// `[algorithm slot][alice_sign][bob_sign]` over jointly registered trials.
    pub by_algorithm: [[[W; 2]; 2]; 2],
}

impl<W: Weight> Tally<W> {
    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        for i in 0..2 {
            self.passages[i] += other.passages[i];
            self.recorded[i] += other.recorded[i];
            for j in 0..2 {
                self.joint[i][j] += other.joint[i][j];
                for k in 0..2 {
                    self.by_algorithm[i][j][k] += other.by_algorithm[i][j][k];
                }
            }
        }
        self.registered += other.registered;
        self
    }
}

/// Aggregates uploads. It only accepts records: it never sees a detector,
/// and the observers never see each other.
#[derive(Clone, Copy, Debug)]
pub struct RemoteComputer {
    alice_filter: Color,
    bob_filter: Color,
}

impl RemoteComputer {
    /// A computer tabulating the `(alice_filter, bob_filter)` category.
    pub fn new(alice_filter: Color, bob_filter: Color) -> Self {
        RemoteComputer {
            alice_filter,
            bob_filter,
        }
    }

    /// Whether a pair of uploads counts as a joint registration for this
    /// category.
    pub fn registers(&self, alice: &Detection, bob: &Detection) -> Option<(Sign, Sign)> {
        if alice.filter != self.alice_filter || bob.filter != self.bob_filter {
            return None;
        }
        Some((alice.recorded?, bob.recorded?))
    }

    /// Adds one trial with weight `w`. `algorithm` comes from Sam's log.
    pub fn ingest<W: Weight>(
        &self,
        tally: &mut Tally<W>,
        algorithm: AlgorithmId,
        alice: &Detection,
        bob: &Detection,
        w: W,
    ) {
        tally.trials += w;
        for (i, d) in [alice, bob].into_iter().enumerate() {
            for _ in 0..d.passed {
                tally.passages[i] += w;
            }
            if d.recorded.is_some() {
                tally.recorded[i] += w;
            }
        }
        if let Some((a, b)) = self.registers(alice, bob) {
            tally.registered += w;
            tally.joint[a.index()][b.index()] += w;
            tally.by_algorithm[algorithm.slot()][a.index()][b.index()] += w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(color: Color, sign: Sign, who: Observer) -> SignedBall {
        SignedBall::new(color, sign, who)
    }

    #[test]
    fn detector_examples() {
        let alice = Detector::new(Observer::Alice, Color::Amber).unwrap();
        let d = alice.detect([
            ball(Color::Amber, Sign::Plus, Observer::Alice),
            ball(Color::Blue, Sign::Minus, Observer::Alice),
        ]);
        assert_eq!((d.recorded, d.passed), (Some(Sign::Plus), 2));

        let bob = Detector::new(Observer::Bob, Color::Cherry).unwrap();
        let d = bob.detect([
            ball(Color::Blue, Sign::Plus, Observer::Bob),
            ball(Color::Amber, Sign::Minus, Observer::Bob),
        ]);
        assert_eq!((d.recorded, d.passed), (None, 2));

        let d = alice.detect([
            ball(Color::Amber, Sign::Minus, Observer::Alice),
            ball(Color::Cherry, Sign::Plus, Observer::Alice),
        ]);
        assert_eq!(d.recorded, Some(Sign::Minus));
    }

    #[test]
    fn filters_restricted_per_observer() {
        assert!(Detector::new(Observer::Alice, Color::Blue).is_err());
        assert!(Detector::new(Observer::Bob, Color::Amber).is_err());
        assert!(Detector::new(Observer::Bob, Color::Cherry).is_ok());
    }

    #[test]
    fn remote_computer_counts_passages_and_registrations() {
        let rc = RemoteComputer::new(Color::Amber, Color::Blue);
        let a = Detection { observer: Observer::Alice, filter: Color::Amber, passed: 2, recorded: Some(Sign::Plus) };
        let b = Detection { observer: Observer::Bob, filter: Color::Blue, passed: 2, recorded: None };
        let mut t = Tally::<u64>::default();
        rc.ingest(&mut t, AlgorithmId::A1, &a, &b, 1);
        let b2 = Detection { recorded: Some(Sign::Minus), ..b };
        rc.ingest(&mut t, AlgorithmId::A2, &a, &b2, 1);
        assert_eq!(t.trials, 2);
        assert_eq!(t.passages, [4, 4]);
        assert_eq!(t.recorded, [2, 1]);
        assert_eq!(t.registered, 1);
        assert_eq!(t.joint[0][1], 1);
        assert_eq!(t.by_algorithm[1][0][1], 1);
    }
}
