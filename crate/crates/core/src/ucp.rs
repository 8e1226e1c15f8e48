//! Use Case Points sizing with Karner's weight tables, and the classical
//! productivity-ratio effort rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UcpError {
    #[error("use-case model has no use cases")]
    NoUseCases,
    #[error("{table} rating {index} is {value}, expected 0..=5")]
    RatingOutOfRange {
        table: &'static str,
        index: usize,
        value: u32,
    },
    #[error("{table} ratings: expected {expected} values, got {got}")]
    WrongRatingCount {
        table: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Complexity {
    Simple,
    Average,
    Complex,
}

impl Complexity {
    pub fn actor_weight(self) -> f64 {
        match self {
            Complexity::Simple => 1.0,
            Complexity::Average => 2.0,
            Complexity::Complex => 3.0,
        }
    }

    pub fn use_case_weight(self) -> f64 {
        match self {
            Complexity::Simple => 5.0,
            Complexity::Average => 10.0,
            Complexity::Complex => 15.0,
        }
    }
}

/// Weights of the 13 technical complexity factors T1..T13.
pub const TECHNICAL_WEIGHTS: [f64; 13] = [
    2.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0,
];

/// Weights of the 8 environmental factors E1..E8.
pub const ENVIRONMENTAL_WEIGHTS: [f64; 8] = [1.5, 0.5, 1.0, 0.5, 1.0, 2.0, -1.0, -1.0];

/// Default productivity ratio in person-hours per UCP.
pub const DEFAULT_RATIO: f64 = 20.0;

const MAX_RATING: u32 = 5;

/// Classified actors and use cases plus factor ratings. The JSON form uses
/// the keys `actors`, `use_cases`, `technical` and `environmental`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UseCaseModel {
    pub actors: Vec<Complexity>,
    pub use_cases: Vec<Complexity>,
    #[serde(rename = "technical")]
    pub technical_ratings: Vec<u32>,
    #[serde(rename = "environmental")]
    pub environmental_ratings: Vec<u32>,
}

impl UseCaseModel {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn check_ratings(&self) -> Result<(), UcpError> {
        for (table, ratings, expected) in [
            (
                "technical",
                &self.technical_ratings,
                TECHNICAL_WEIGHTS.len(),
            ),
            (
                "environmental",
                &self.environmental_ratings,
                ENVIRONMENTAL_WEIGHTS.len(),
            ),
        ] {
            if ratings.len() != expected {
                return Err(UcpError::WrongRatingCount {
                    table,
                    expected,
                    got: ratings.len(),
                });
            }
            if let Some((index, &value)) = ratings.iter().enumerate().find(|(_, &r)| r > MAX_RATING)
            {
                return Err(UcpError::RatingOutOfRange {
                    table,
                    index: index + 1,
                    value,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcpBreakdown {
    pub uwa: f64,
    pub uuc: f64,
    pub uucp: f64,
    pub tcf: f64,
    pub ef: f64,
    pub ucp: f64,
}

impl UcpBreakdown {
    pub fn from_parts(uwa: f64, uuc: f64, tcf: f64, ef: f64) -> Self {
        let uucp = uwa + uuc;
        UcpBreakdown {
            uwa,
            uuc,
            uucp,
            tcf,
            ef,
            ucp: uucp * tcf * ef,
        }
    }
}

/// Returns `(uwa, uuc, uucp)`.
pub fn compute_uucp(model: &UseCaseModel) -> Result<(f64, f64, f64), UcpError> {
    if model.use_cases.is_empty() {
        return Err(UcpError::NoUseCases);
    }
    let uwa: f64 = model.actors.iter().map(|a| a.actor_weight()).sum();
    let uuc: f64 = model.use_cases.iter().map(|u| u.use_case_weight()).sum();
    Ok((uwa, uuc, uwa + uuc))
}

/// Returns `(tcf, ef)`.
pub fn compute_adjustment_factors(model: &UseCaseModel) -> Result<(f64, f64), UcpError> {
    model.check_ratings()?;
    let weighted = |weights: &[f64], ratings: &[u32]| -> f64 {
        weights
            .iter()
            .zip(ratings)
            .map(|(w, &r)| w * r as f64)
            .sum()
    };
    let tcf = 0.6 + 0.01 * weighted(&TECHNICAL_WEIGHTS, &model.technical_ratings);
    let ef = 1.4 - 0.03 * weighted(&ENVIRONMENTAL_WEIGHTS, &model.environmental_ratings);
    Ok((tcf, ef))
}

pub fn compute_ucp(model: &UseCaseModel) -> Result<UcpBreakdown, UcpError> {
    let (uwa, uuc, _) = compute_uucp(model)?;
    let (tcf, ef) = compute_adjustment_factors(model)?;
    Ok(UcpBreakdown::from_parts(uwa, uuc, tcf, ef))
}

/// Effort in person-hours as `ucp × ratio`.
pub fn classical_effort(ucp: f64, ratio: f64) -> Result<f64, UcpError> {
    if !(ucp > 0.0 && ucp.is_finite()) {
        return Err(UcpError::NonPositive("ucp"));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(UcpError::NonPositive("ratio"));
    }
    Ok(ucp * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Complexity::*;

    fn model(actors: Vec<Complexity>, use_cases: Vec<Complexity>) -> UseCaseModel {
        UseCaseModel {
            actors,
            use_cases,
            technical_ratings: vec![0; 13],
            environmental_ratings: vec![0; 8],
        }
    }

    #[test]
    fn uucp_examples() {
        let m = model(vec![Simple, Simple, Complex], vec![Average; 3]);
        assert_eq!(compute_uucp(&m).unwrap(), (5.0, 30.0, 35.0));
        assert_eq!(
            compute_uucp(&model(vec![Simple], vec![Simple])).unwrap().2,
            6.0
        );
        assert_eq!(
            compute_uucp(&model(vec![Simple], vec![])).unwrap_err(),
            UcpError::NoUseCases
        );
    }

    #[test]
    fn adjustment_factor_examples() {
        let mut m = model(vec![], vec![Simple]);
        let (tcf, ef) = compute_adjustment_factors(&m).unwrap();
        assert_eq!(tcf, 0.6);
        assert_eq!(ef, 1.4);
        m.technical_ratings = vec![3; 13];
        let (tcf, _) = compute_adjustment_factors(&m).unwrap();
        assert!((tcf - 1.02).abs() < 1e-12);
    }

    #[test]
    fn ucp_examples() {
        assert_eq!(UcpBreakdown::from_parts(5.0, 30.0, 1.0, 1.0).ucp, 35.0);
        let m = UseCaseModel {
            actors: vec![Simple, Simple, Complex],
            use_cases: vec![Average; 3],
            technical_ratings: vec![3; 13],
            environmental_ratings: vec![3, 3, 3, 3, 3, 0, 0, 0],
        };
        let b = compute_ucp(&m).unwrap();
        assert!((b.tcf - 1.02).abs() < 1e-12);
        assert!((b.ef - 0.995).abs() < 1e-12);
        assert!((b.ucp - 35.5215).abs() < 1e-9);
        assert!((classical_effort(b.ucp, DEFAULT_RATIO).unwrap() - 710.43).abs() < 1e-9);
    }

    #[test]
    fn rating_above_five_rejected() {
        let mut m = model(vec![], vec![Simple]);
        m.technical_ratings[4] = 6;
        assert_eq!(
            compute_ucp(&m).unwrap_err(),
            UcpError::RatingOutOfRange {
                table: "technical",
                index: 5,
                value: 6
            }
        );
        m.technical_ratings = vec![0; 12];
        assert!(matches!(
            compute_ucp(&m),
            Err(UcpError::WrongRatingCount { .. })
        ));
    }

    #[test]
    fn classical_effort_examples() {
        assert_eq!(classical_effort(120.0, 20.0).unwrap(), 2400.0);
        assert_eq!(classical_effort(1.0, 20.0).unwrap(), 20.0);
        assert_eq!(classical_effort(100.0, 15.0).unwrap(), 1500.0);
        assert!(classical_effort(0.0, 20.0).is_err());
        assert!(classical_effort(10.0, -1.0).is_err());
    }

    #[test]
    fn json_shape() {
        let m = UseCaseModel::from_json(
            r#"{"actors":["simple","complex"],"use_cases":["average"],
                "technical":[0,0,0,0,0,0,0,0,0,0,0,0,0],"environmental":[0,0,0,0,0,0,0,0]}"#,
        )
        .unwrap();
        assert_eq!(m.actors, vec![Simple, Complex]);
        assert_eq!(compute_ucp(&m).unwrap().uucp, 14.0);
    }

    fn complexity() -> impl Strategy<Value = Complexity> {
        prop_oneof![Just(Simple), Just(Average), Just(Complex)]
    }

    proptest! {
        #[test]
        fn adding_elements_increases_uucp(
            actors in prop::collection::vec(complexity(), 0..10),
            use_cases in prop::collection::vec(complexity(), 1..10),
            extra in complexity(),
        ) {
            let base = compute_uucp(&model(actors.clone(), use_cases.clone())).unwrap().2;
            let mut more_actors = actors.clone();
            more_actors.push(extra);
            prop_assert!(compute_uucp(&model(more_actors, use_cases.clone())).unwrap().2 > base);
            let mut more_cases = use_cases;
            more_cases.push(extra);
            prop_assert!(compute_uucp(&model(actors, more_cases)).unwrap().2 > base);
        }

        #[test]
        fn factors_within_bounds(
            t in prop::collection::vec(0u32..=5, 13),
            e in prop::collection::vec(0u32..=5, 8),
        ) {
            let m = UseCaseModel { actors: vec![], use_cases: vec![Simple], technical_ratings: t, environmental_ratings: e };
            let (tcf, ef) = compute_adjustment_factors(&m).unwrap();
            let t_sum: f64 = TECHNICAL_WEIGHTS.iter().sum();
            prop_assert!(tcf >= 0.6 && tcf <= 0.6 + 0.01 * 5.0 * t_sum + 1e-12);
            // The two negative environmental weights can push ef above 1.4.
            let pos: f64 = ENVIRONMENTAL_WEIGHTS.iter().filter(|w| **w > 0.0).sum();
            let neg: f64 = ENVIRONMENTAL_WEIGHTS.iter().filter(|w| **w < 0.0).map(|w| -w).sum();
            prop_assert!(ef >= 1.4 - 0.03 * 5.0 * pos - 1e-12);
            prop_assert!(ef <= 1.4 + 0.03 * 5.0 * neg + 1e-12);
        }

        #[test]
        fn classical_effort_is_linear(a in 0.1f64..1e4, b in 0.1f64..1e4, ratio in 15.0f64..30.0) {
            let lhs = classical_effort(a + b, ratio).unwrap();
            let rhs = classical_effort(a, ratio).unwrap() + classical_effort(b, ratio).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs);
        }
    }
}
