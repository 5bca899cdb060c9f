//! Uplink NOMA SINR under perfect SIC, the generalized-logistic similarity
//! surrogate, semantic rate and the rate/similarity feasibility checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One user's channel power gain `|h|^2` and transmit power in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserChannel {
    pub gain_sq: f64,
    pub power: f64,
}

/// Scenario for one NOMA uplink frame. Users are stored in SIC decoding
/// order, strongest channel first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomaScenario {
    pub users: Vec<UserChannel>,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Channel bandwidth in hertz.
    pub bandwidth: f64,
    /// Semantic information per word, `I / L`, in suts.
    pub info_per_word: f64,
    /// Average semantic symbols per word.
    pub symbols_per_word: u32,
    /// Upper bound on symbols per word.
    pub max_symbols: u32,
    pub p_max: f64,
    /// Minimum semantic rate (suts/s) per user.
    pub rate_threshold: f64,
    /// Minimum similarity per user.
    pub similarity_threshold: f64,
    /// Similarity at or above which a packet is Category I.
    pub category_boundary: f64,
}

impl NomaScenario {
    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::Config("scenario has no users".into()));
        }
        for (k, u) in self.users.iter().enumerate() {
            if !(u.gain_sq > 0.0 && u.gain_sq.is_finite()) {
                return Err(Error::Config(format!(
                    "user {}: gain must be positive",
                    k + 1
                )));
            }
            if !(u.power > 0.0 && u.power <= self.p_max * (1.0 + 1e-12)) {
                return Err(Error::Config(format!(
                    "user {}: power {} W outside (0, p_max = {} W] (C4)",
                    k + 1,
                    u.power,
                    self.p_max
                )));
            }
        }
        if self.users.windows(2).any(|w| w[0].gain_sq < w[1].gain_sq) {
            return Err(Error::Config(
                "users must be ordered by nonincreasing channel gain".into(),
            ));
        }
        if !(self.noise_power > 0.0 && self.bandwidth > 0.0 && self.info_per_word > 0.0) {
            return Err(Error::Config(
                "noise power, bandwidth and I/L must be positive".into(),
            ));
        }
        if self.symbols_per_word < 1 || self.symbols_per_word > self.max_symbols {
            return Err(Error::Config(format!(
                "symbols per word {} outside [1, {}] (C3)",
                self.symbols_per_word, self.max_symbols
            )));
        }
        if !(self.similarity_threshold > 0.0
            && self.similarity_threshold < self.category_boundary
            && self.category_boundary <= 1.0)
        {
            return Err(Error::Config(format!(
                "need 0 < similarity threshold ({}) < category boundary ({}) <= 1",
                self.similarity_threshold, self.category_boundary
            )));
        }
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Copy of the scenario with every user transmitting at `power` watts.
    pub fn with_common_power(&self, power: f64) -> Self {
        let mut out = self.clone();
        for u in &mut out.users {
            u.power = power;
        }
        out
    }
}

/// Coefficients of the generalized logistic similarity curve for one
/// symbols-per-word setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Lower asymptote.
    pub a1: f64,
    /// Upper asymptote.
    pub a2: f64,
    /// Growth rate per unit SINR.
    pub c1: f64,
    /// Midpoint offset.
    pub c2: f64,
}

impl LogisticParams {
    /// Illustrative placeholder coefficients. Fitted values depend on the
    /// trained semantic codec and must be supplied for real studies.
    pub const PLACEHOLDER: Self = Self {
        a1: 0.2,
        a2: 0.95,
        c1: 0.5,
        c2: -1.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.a1 && self.a1 < self.a2 && self.a2 <= 1.0) {
            return Err(Error::Config(format!(
                "logistic asymptotes need 0 <= a1 < a2 <= 1, got ({}, {})",
                self.a1, self.a2
            )));
        }
        if !(self.c1 > 0.0 && self.c2.is_finite()) {
            return Err(Error::Config(
                "logistic growth rate c1 must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self::PLACEHOLDER
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-user SINR after successive interference cancellation. User `k`
/// sees interference from every user decoded after it.
pub fn sinr_vector(scenario: &NomaScenario) -> Vec<f64> {
    let received: Vec<f64> = scenario.users.iter().map(|u| u.power * u.gain_sq).collect();
    let mut out = vec![0.0; received.len()];
    let mut interference = 0.0;
    for k in (0..received.len()).rev() {
        out[k] = received[k] / (scenario.noise_power + interference);
        interference += received[k];
    }
    out
}

/// Logistic similarity `a1 + (a2 - a1) / (1 + exp(-(c1 gamma + c2)))`.
pub fn similarity(gamma: f64, lp: &LogisticParams) -> f64 {
    lp.a1 + (lp.a2 - lp.a1) * sigmoid(lp.c1 * gamma + lp.c2)
}

/// `d similarity / d gamma`, the standard logistic derivative.
pub fn similarity_derivative(gamma: f64, lp: &LogisticParams) -> f64 {
    let s = sigmoid(lp.c1 * gamma + lp.c2);
    lp.c1 * (lp.a2 - lp.a1) * s * (1.0 - s)
}

/// Semantic rate in suts/s, `W (I/L) / rho * similarity`.
pub fn semantic_rate(gamma: f64, scenario: &NomaScenario, lp: &LogisticParams) -> f64 {
    rate_from_similarity(similarity(gamma, lp), scenario)
}

pub fn rate_from_similarity(xi: f64, scenario: &NomaScenario) -> f64 {
    scenario.bandwidth * scenario.info_per_word / scenario.symbols_per_word as f64 * xi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserFeasibility {
    pub sinr: f64,
    pub similarity: f64,
    pub rate: f64,
    pub rate_ok: bool,
    pub similarity_ok: bool,
}

/// Outcome of the minimum-rate (C1) and minimum-similarity (C2) checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub min_rate: f64,
    pub min_similarity: f64,
    pub rate_ok: bool,
    pub similarity_ok: bool,
    pub users: Vec<UserFeasibility>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.rate_ok && self.similarity_ok
    }

    /// Zero-based index of the first user failing either constraint.
    pub fn first_violation(&self) -> Option<usize> {
        self.users
            .iter()
            .position(|u| !(u.rate_ok && u.similarity_ok))
    }
}

pub fn check_feasibility(scenario: &NomaScenario, lp: &LogisticParams) -> FeasibilityReport {
    let users: Vec<UserFeasibility> = sinr_vector(scenario)
        .into_iter()
        .map(|sinr| {
            let xi = similarity(sinr, lp);
            let rate = rate_from_similarity(xi, scenario);
            UserFeasibility {
                sinr,
                similarity: xi,
                rate,
                rate_ok: rate >= scenario.rate_threshold,
                similarity_ok: xi >= scenario.similarity_threshold,
            }
        })
        .collect();
    let min_rate = users.iter().map(|u| u.rate).fold(f64::INFINITY, f64::min);
    let min_similarity = users
        .iter()
        .map(|u| u.similarity)
        .fold(f64::INFINITY, f64::min);
    FeasibilityReport {
        min_rate,
        min_similarity,
        rate_ok: min_rate >= scenario.rate_threshold,
        similarity_ok: min_similarity >= scenario.similarity_threshold,
        users,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(gains: &[f64], powers: &[f64]) -> NomaScenario {
        NomaScenario {
            users: gains
                .iter()
                .zip(powers)
                .map(|(&gain_sq, &power)| UserChannel { gain_sq, power })
                .collect(),
            noise_power: 1e-6,
            bandwidth: 200_000.0,
            info_per_word: 1.0,
            symbols_per_word: 20,
            max_symbols: 40,
            p_max: 0.01,
            rate_threshold: 1e3,
            similarity_threshold: 0.3,
            category_boundary: 0.8,
        }
    }

    #[test]
    fn single_user_has_no_interference() {
        let g = sinr_vector(&scenario(&[0.81], &[0.01]));
        assert!((g[0] - 8100.0).abs() < 1e-9);
    }

    #[test]
    fn two_users_hand_substitution() {
        let g = sinr_vector(&scenario(&[0.81, 0.64], &[0.01, 0.01]));
        assert!((g[0] - 0.0081 / 0.006401).abs() < 1e-12);
        assert!((g[0] - 1.2654).abs() < 1e-4);
        assert!((g[1] - 6400.0).abs() < 1e-9);
    }

    #[test]
    fn interference_free_limit() {
        let g = sinr_vector(&scenario(&[0.81, 0.64], &[0.01, 1e-15]));
        assert!((g[0] / 8100.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn similarity_midpoint_and_asymptote() {
        let lp = LogisticParams::PLACEHOLDER;
        assert!((similarity(2.0, &lp) - 0.575).abs() < 1e-15);
        assert!((similarity(1e6, &lp) - lp.a2).abs() < 1e-15);
        assert!((similarity_derivative(2.0, &lp) - lp.c1 * (lp.a2 - lp.a1) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let lp = LogisticParams::PLACEHOLDER;
        let h = 1e-5;
        for i in 0..100 {
            let g = 0.1 * i as f64;
            let fd = (similarity(g + h, &lp) - similarity(g - h, &lp)) / (2.0 * h);
            let d = similarity_derivative(g, &lp);
            assert!(d > 0.0);
            assert!(((fd - d) / d).abs() < 1e-6, "gamma = {g}");
        }
    }

    #[test]
    fn semantic_rate_scaling() {
        let mut s = scenario(&[0.81], &[0.01]);
        assert!((rate_from_similarity(0.9, &s) - 9000.0).abs() < 1e-9);
        assert_eq!(rate_from_similarity(0.0, &s), 0.0);
        s.symbols_per_word = 40;
        assert!((rate_from_similarity(0.9, &s) - 4500.0).abs() < 1e-9);
    }

    #[test]
    fn feasibility_edge_cases() {
        let mut s = scenario(&[0.81, 0.64], &[0.01, 0.01]);
        let perfect = LogisticParams {
            a1: 0.99,
            a2: 1.0,
            c1: 1.0,
            c2: 50.0,
        };
        s.rate_threshold = 0.0;
        assert!(check_feasibility(&s, &perfect).feasible());

        s.similarity_threshold = 0.99;
        s.category_boundary = 1.0;
        let lp = LogisticParams::PLACEHOLDER;
        let r = check_feasibility(&s, &lp);
        assert!(!r.similarity_ok);
        assert_eq!(r.first_violation(), Some(0));
    }

    #[test]
    fn validation_catches_bad_order_and_power() {
        assert!(scenario(&[0.64, 0.81], &[0.01, 0.01]).validate().is_err());
        assert!(scenario(&[0.81], &[0.02]).validate().is_err());
        assert!(scenario(&[0.81, 0.64], &[0.01, 0.01]).validate().is_ok());
    }
}
