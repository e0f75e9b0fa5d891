//! Closed-form evaluators for the local-contextual hidden-variable model of
//! a spin-singlet pair.
//!
//! A hidden variable fixes an axis `n` in the y-z plane together with the
//! predetermined, opposite outcomes of the two particles along it. Outcomes
//! along any other axis are random with a bias given by the projection of the
//! particle's spin vector onto that axis, and the joint probabilities factorize
//! once the hidden variable is held fixed.
//!
//! Every correlation is evaluated in a single *description*: either the
//! hidden-variable set anchored to Alice's axis or the one anchored to Bob's.
//! The description is always an explicit argument, so probabilities belonging
//! to different hidden-variable sets are never combined.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::Sign;

/// Outcomes are `Sign`s in units of ħ/2.
pub type SpinValue = Sign;

/// Tolerance used to decide that two directions denote the same axis.
pub const AXIS_TOLERANCE: f64 = 1e-12;

/// A measurement axis in the y-z plane, `n = sin(theta) y + cos(theta) z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Direction {
    theta: f64,
}

impl Direction {
    /// Builds a direction from an angle in radians, reduced into `[0, 2pi)`.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFiniteAngle(theta));
        }
        let mut reduced = theta.rem_euclid(TAU);
        if reduced >= TAU {
            reduced = 0.0;
        }
        Ok(Direction { theta: reduced })
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::new(degrees.to_radians())
    }

    pub fn z() -> Self {
        Direction { theta: 0.0 }
    }

    pub fn y() -> Self {
        Direction { theta: PI / 2.0 }
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    pub fn unit_vector(self) -> [f64; 3] {
        [0.0, self.theta.sin(), self.theta.cos()]
    }

    /// The direction rotated by `phi` radians within the plane.
    pub fn rotated(self, phi: f64) -> Result<Self> {
        Self::new(self.theta + phi)
    }

    pub fn same_axis(self, other: Direction) -> bool {
        angle_between(self, other) < AXIS_TOLERANCE
    }

    /// `cos` of the planar angle to `other`, i.e. the dot product of the two
    /// unit vectors. Computed from the angle difference so that identical
    /// axes give exactly 1.
    fn cos_to(self, other: Direction) -> f64 {
        (self.theta - other.theta).cos()
    }
}

impl TryFrom<f64> for Direction {
    type Error = Error;

    fn try_from(theta: f64) -> Result<Self> {
        Direction::new(theta)
    }
}

impl From<Direction> for f64 {
    fn from(direction: Direction) -> f64 {
        direction.theta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Particle {
    First,
    Second,
}

impl TryFrom<u8> for Particle {
    type Error = Error;

    fn try_from(index: u8) -> Result<Self> {
        match index {
            1 => Ok(Particle::First),
            2 => Ok(Particle::Second),
            other => Err(Error::InvalidParticle(other)),
        }
    }
}

impl From<Particle> for u8 {
    fn from(particle: Particle) -> u8 {
        match particle {
            Particle::First => 1,
            Particle::Second => 2,
        }
    }
}

/// Which observer's axis anchors the hidden-variable set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Description {
    Alice,
    Bob,
}

impl Description {
    pub const BOTH: [Description; 2] = [Description::Alice, Description::Bob];

    /// The axis the hidden variables are defined along.
    pub fn source_axis(self, axis1: Direction, axis2: Direction) -> Direction {
        match self {
            Description::Alice => axis1,
            Description::Bob => axis2,
        }
    }
}

/// A hidden variable: an axis and the predetermined outcome of particle 1
/// along it. Particle 2 always carries the opposite value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenVariable {
    pub axis: Direction,
    pub first_particle: SpinValue,
}

impl HiddenVariable {
    pub fn new(axis: Direction, first_particle: SpinValue) -> Self {
        HiddenVariable {
            axis,
            first_particle,
        }
    }

    pub fn second_particle(self) -> SpinValue {
        -self.first_particle
    }

    pub fn predetermined(self, particle: Particle) -> SpinValue {
        match particle {
            Particle::First => self.first_particle,
            Particle::Second => self.second_particle(),
        }
    }

    /// Both members of the hidden-variable set on `axis`.
    pub fn pair_on(axis: Direction) -> [HiddenVariable; 2] {
        [
            HiddenVariable::new(axis, Sign::Plus),
            HiddenVariable::new(axis, Sign::Minus),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinVector {
    pub components: [f64; 3],
}

impl SpinVector {
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, axis: Direction) -> f64 {
        self.components
            .iter()
            .zip(axis.unit_vector())
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Planar angle between two axes, in `[0, pi]`.
pub fn angle_between(n: Direction, m: Direction) -> f64 {
    let d = (n.theta - m.theta).abs();
    if d > PI {
        TAU - d
    } else {
        d
    }
}

pub fn spin_vector(lambda: HiddenVariable, particle: Particle) -> SpinVector {
    let s = lambda.predetermined(particle).as_f64();
    let [x, y, z] = lambda.axis.unit_vector();
    SpinVector {
        components: [s * x, s * y, s * z],
    }
}

/// Projection of the particle's spin vector onto `axis`: the mean outcome
/// along `axis` given `lambda`.
pub fn mean_value(lambda: HiddenVariable, particle: Particle, axis: Direction) -> f64 {
    lambda.predetermined(particle).as_f64() * lambda.axis.cos_to(axis)
}

pub fn conditional_outcome_prob(
    lambda: HiddenVariable,
    particle: Particle,
    axis: Direction,
    outcome: SpinValue,
) -> f64 {
    0.5 * (1.0 + outcome.as_f64() * mean_value(lambda, particle, axis))
}

/// Joint probability of outcomes `r` (particle 1 along `axis1`) and `q`
/// (particle 2 along `axis2`), which factorizes for fixed `lambda`.
pub fn joint_outcome_prob(
    lambda: HiddenVariable,
    axis1: Direction,
    axis2: Direction,
    r: SpinValue,
    q: SpinValue,
) -> f64 {
    conditional_outcome_prob(lambda, Particle::First, axis1, r)
        * conditional_outcome_prob(lambda, Particle::Second, axis2, q)
}

pub fn pair_expectation(lambda: HiddenVariable, axis1: Direction, axis2: Direction) -> f64 {
    let mut sum = 0.0;
    for k in Sign::BOTH {
        for l in Sign::BOTH {
            sum += k.as_f64() * l.as_f64() * joint_outcome_prob(lambda, axis1, axis2, k, l);
        }
    }
    sum
}

/// Correlation at fixed `lambda`. Only defined when `lambda` lives on one of
/// the two measurement axes.
pub fn subquantum_correlation(
    lambda: HiddenVariable,
    axis1: Direction,
    axis2: Direction,
) -> Result<f64> {
    if !lambda.axis.same_axis(axis1) && !lambda.axis.same_axis(axis2) {
        return Err(Error::ContextMismatch);
    }
    Ok(pair_expectation(lambda, axis1, axis2)
        - mean_value(lambda, Particle::First, axis1) * mean_value(lambda, Particle::Second, axis2))
}

/// Mean outcome of `particle` along `measure_axis`, averaged over the two
/// equiprobable hidden variables on `source_axis`.
pub fn marginal_expectation(
    source_axis: Direction,
    particle: Particle,
    measure_axis: Direction,
) -> f64 {
    HiddenVariable::pair_on(source_axis)
        .iter()
        .map(|&lambda| 0.5 * mean_value(lambda, particle, measure_axis))
        .sum()
}

/// Raw `<S1 S2>` averaged over the description's hidden-variable set.
pub fn averaged_pair_expectation(
    axis1: Direction,
    axis2: Direction,
    description: Description,
) -> f64 {
    HiddenVariable::pair_on(description.source_axis(axis1, axis2))
        .iter()
        .map(|&lambda| 0.5 * pair_expectation(lambda, axis1, axis2))
        .sum()
}

/// `<S1 S2> - <S1><S2>` evaluated in the given description.
pub fn quantum_correlation(axis1: Direction, axis2: Direction, description: Description) -> f64 {
    let source = description.source_axis(axis1, axis2);
    averaged_pair_expectation(axis1, axis2, description)
        - marginal_expectation(source, Particle::First, axis1)
            * marginal_expectation(source, Particle::Second, axis2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn dir(theta: f64) -> Direction {
        Direction::new(theta).unwrap()
    }

    fn lam(theta: f64, s: Sign) -> HiddenVariable {
        HiddenVariable::new(dir(theta), s)
    }

    #[test]
    fn direction_canonical_range() {
        assert_abs_diff_eq!(dir(-PI / 2.0).theta(), 1.5 * PI, epsilon = EPS);
        assert_abs_diff_eq!(dir(5.0 * PI).theta(), PI, epsilon = 1e-9);
        assert_eq!(dir(-1e-18).theta(), 0.0);
        assert!(Direction::new(f64::NAN).is_err());
        assert!(Direction::new(f64::INFINITY).is_err());
        assert_eq!(serde_json::from_str::<Direction>("-0.0").unwrap(), Direction::z());
    }

    #[test]
    fn angle_between_examples() {
        assert_eq!(angle_between(dir(0.0), dir(0.0)), 0.0);
        assert_abs_diff_eq!(angle_between(dir(0.0), dir(PI)), PI, epsilon = EPS);
        assert_abs_diff_eq!(angle_between(dir(PI / 3.0), dir(0.0)), PI / 3.0, epsilon = EPS);
        assert_abs_diff_eq!(
            angle_between(dir(0.1), dir(2.0 * PI - 0.1)),
            0.2,
            epsilon = EPS
        );
    }

    #[test]
    fn spin_vector_examples() {
        let v = spin_vector(lam(0.0, Sign::Plus), Particle::First);
        assert_eq!(v.components, [0.0, 0.0, 1.0]);
        let v = spin_vector(lam(0.0, Sign::Plus), Particle::Second);
        assert_eq!(v.components, [-0.0, -0.0, -1.0]);
        let v = spin_vector(lam(PI / 2.0, Sign::Minus), Particle::First);
        assert_abs_diff_eq!(v.components[1], -1.0, epsilon = EPS);
        assert_abs_diff_eq!(v.components[2], 0.0, epsilon = EPS);
        assert!(matches!(Particle::try_from(3), Err(Error::InvalidParticle(3))));
        assert!(Particle::try_from(0).is_err());
    }

    #[test]
    fn mean_value_examples() {
        let a = dir(0.3);
        for r in Sign::BOTH {
            assert_eq!(mean_value(HiddenVariable::new(a, r), Particle::Second, a), -r.as_f64());
        }
        let l = HiddenVariable::new(a, Sign::Plus);
        assert_abs_diff_eq!(
            mean_value(l, Particle::Second, a.rotated(PI / 3.0).unwrap()),
            -0.5,
            epsilon = EPS
        );
        assert_abs_diff_eq!(
            mean_value(l, Particle::First, a.rotated(PI / 2.0).unwrap()),
            0.0,
            epsilon = EPS
        );
    }

    #[test]
    fn conditional_prob_examples() {
        let a = dir(1.1);
        for r in Sign::BOTH {
            let l = HiddenVariable::new(a, r);
            assert_eq!(conditional_outcome_prob(l, Particle::First, a, r), 1.0);
            assert_eq!(conditional_outcome_prob(l, Particle::First, a, -r), 0.0);
        }
        let l = HiddenVariable::new(a, Sign::Plus);
        let b = a.rotated(PI / 2.0).unwrap();
        assert_abs_diff_eq!(
            conditional_outcome_prob(l, Particle::Second, b, Sign::Plus),
            0.5,
            epsilon = EPS
        );
        let b = a.rotated(PI).unwrap();
        assert_abs_diff_eq!(
            conditional_outcome_prob(l, Particle::Second, b, Sign::Plus),
            1.0,
            epsilon = EPS
        );
    }

    #[test]
    fn joint_prob_examples() {
        let a = dir(0.0);
        for r in Sign::BOTH {
            let l = HiddenVariable::new(a, r);
            assert_eq!(joint_outcome_prob(l, a, a, r, -r), 1.0);
            assert_eq!(joint_outcome_prob(l, a, a, r, r), 0.0);
        }
        // 1 * (1 - cos(pi/3)) / 2, by hand.
        let b = dir(PI / 3.0);
        let l = HiddenVariable::new(a, Sign::Plus);
        assert_abs_diff_eq!(
            joint_outcome_prob(l, a, b, Sign::Plus, Sign::Plus),
            0.25,
            epsilon = EPS
        );
    }

    #[test]
    fn pair_expectation_examples() {
        let a = dir(0.0);
        let b = dir(0.7);
        assert_abs_diff_eq!(
            pair_expectation(lam(0.0, Sign::Plus), a, b),
            -(0.7f64).cos(),
            epsilon = EPS
        );
        assert_eq!(pair_expectation(lam(0.0, Sign::Minus), a, a), -1.0);
        assert_abs_diff_eq!(
            pair_expectation(lam(0.0, Sign::Plus), a, dir(PI / 2.0)),
            0.0,
            epsilon = EPS
        );
    }

    #[test]
    fn subquantum_examples() {
        let a = dir(0.2);
        let b = dir(1.9);
        assert_abs_diff_eq!(
            subquantum_correlation(HiddenVariable::new(a, Sign::Plus), a, b).unwrap(),
            0.0,
            epsilon = EPS
        );
        assert_eq!(
            subquantum_correlation(HiddenVariable::new(a, Sign::Minus), a, a).unwrap(),
            0.0
        );
        // Bob description: lambda lives on b, particle 2 predetermined to q.
        let bob = HiddenVariable::new(b, -Sign::Plus);
        assert_abs_diff_eq!(subquantum_correlation(bob, a, b).unwrap(), 0.0, epsilon = EPS);
        let third = HiddenVariable::new(dir(3.0), Sign::Plus);
        assert_eq!(subquantum_correlation(third, a, b), Err(Error::ContextMismatch));
    }

    #[test]
    fn marginal_examples() {
        let a = dir(0.0);
        let b = dir(1.0);
        assert_eq!(marginal_expectation(a, Particle::Second, b), 0.0);
        assert_eq!(marginal_expectation(a, Particle::First, a), 0.0);
        assert_eq!(marginal_expectation(b, Particle::First, a), 0.0);
    }

    #[test]
    fn quantum_correlation_examples() {
        let a = dir(0.0);
        assert_abs_diff_eq!(
            quantum_correlation(a, dir(PI / 3.0), Description::Alice),
            -0.5,
            epsilon = EPS
        );
        for d in Description::BOTH {
            assert_eq!(quantum_correlation(a, a, d), -1.0);
        }
        assert_abs_diff_eq!(
            quantum_correlation(a, dir(PI / 2.0), Description::Bob),
            0.0,
            epsilon = EPS
        );
    }

    fn sign_strategy() -> impl Strategy<Value = Sign> {
        prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
    }

    proptest! {
        #[test]
        fn unit_vectors_normalized(theta in -20.0f64..20.0, s in sign_strategy()) {
            let d = dir(theta);
            let v = d.unit_vector();
            prop_assert!(((v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() < EPS);
            prop_assert!((spin_vector(HiddenVariable::new(d, s), Particle::Second).norm() - 1.0).abs() < EPS);
        }

        #[test]
        fn angle_matches_arccos(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU) {
            let (n, m) = (dir(t1), dir(t2));
            let dot: f64 = n.unit_vector().iter().zip(m.unit_vector()).map(|(a, b)| a * b).sum();
            prop_assert!((angle_between(n, m) - dot.clamp(-1.0, 1.0).acos()).abs() < 1e-7);
            prop_assert_eq!(angle_between(n, m), angle_between(m, n));
        }

        #[test]
        fn mean_value_is_projection(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU, s in sign_strategy()) {
            let l = HiddenVariable::new(dir(t1), s);
            for p in [Particle::First, Particle::Second] {
                prop_assert!((mean_value(l, p, dir(t2)) - spin_vector(l, p).dot(dir(t2))).abs() < EPS);
            }
        }

        #[test]
        fn probabilities_normalized(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU, t3 in 0.0f64..TAU, s in sign_strategy()) {
            let l = HiddenVariable::new(dir(t1), s);
            for p in [Particle::First, Particle::Second] {
                let total: f64 = Sign::BOTH.iter().map(|&o| conditional_outcome_prob(l, p, dir(t2), o)).sum();
                prop_assert!((total - 1.0).abs() < EPS);
            }
            let mut joint = 0.0;
            for r in Sign::BOTH {
                for q in Sign::BOTH {
                    let pr = joint_outcome_prob(l, dir(t2), dir(t3), r, q);
                    prop_assert!((0.0..=1.0).contains(&pr));
                    joint += pr;
                }
            }
            prop_assert!((joint - 1.0).abs() < EPS);
        }

        #[test]
        fn pair_expectation_sign_symmetric(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU, t3 in 0.0f64..TAU) {
            let plus = pair_expectation(lam(t1, Sign::Plus), dir(t2), dir(t3));
            let minus = pair_expectation(lam(t1, Sign::Minus), dir(t2), dir(t3));
            prop_assert!((plus - minus).abs() < EPS);
        }

        #[test]
        fn descriptions_agree(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU) {
            let (a, b) = (dir(t1), dir(t2));
            let alice = quantum_correlation(a, b, Description::Alice);
            let bob = quantum_correlation(a, b, Description::Bob);
            prop_assert!((alice - bob).abs() < EPS);
            prop_assert!((alice + angle_between(a, b).cos()).abs() < EPS);
        }
    }
}
