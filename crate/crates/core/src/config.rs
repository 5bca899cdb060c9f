//! TOML scenario files.
//!
//! Powers are given in dBm, rates per second and times in seconds. Every
//! section has defaults, so a file only needs the values it changes. The
//! defaults reproduce the reference setup: six users with channel
//! amplitudes evenly spaced in `[0.8, 0.9]`, 200 kHz, `p_max = 10 dBm`,
//! `-30 dBm` noise, a 0.1 s frame and 0.1 s transmission time.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Interval;
use crate::optimizer::PolicySpace;
use crate::queueing::{ArrivalMode, QueueParams};
use crate::semantic::{self, LogisticParams, NomaScenario, UserChannel};
use crate::sim::{Routing, SimConfig};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    /// Channel power gain `|h|^2`.
    pub gain_sq: f64,
    /// Transmit power in dBm.
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub users: Vec<UserConfig>,
    /// dBm.
    pub noise_power: f64,
    /// Hz.
    pub bandwidth: f64,
    /// `I / L`, suts per word.
    pub info_per_word: f64,
    pub symbols_per_word: u32,
    pub max_symbols: u32,
    /// dBm.
    pub p_max: f64,
    /// suts/s.
    pub rate_threshold: f64,
    pub similarity_threshold: f64,
    pub category_boundary: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        // Squares of the amplitudes 0.90, 0.88, ..., 0.80.
        let users = [0.81, 0.7744, 0.7396, 0.7056, 0.6724, 0.64]
            .into_iter()
            .map(|gain_sq| UserConfig {
                gain_sq,
                power: 10.0,
            })
            .collect();
        Self {
            users,
            noise_power: -30.0,
            bandwidth: 200e3,
            info_per_word: 1.0,
            symbols_per_word: 20,
            max_symbols: 40,
            p_max: 10.0,
            // Placeholder: W (I/L) / rho caps the rate at 1e4 suts/s here.
            rate_threshold: 1e3,
            similarity_threshold: 0.3,
            category_boundary: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueConfig {
    /// `N T` in seconds; `lambda0 = 1 / frame_duration`.
    pub frame_duration: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub a: f64,
    pub theta: f64,
    pub mode: ArrivalMode,
}

impl Default for QueueConfig {
    fn default() -> Self {
        Self {
            frame_duration: 0.1,
            mu0: 20.0,
            mu1: 15.0,
            mu2: 10.0,
            a: 0.5,
            theta: 0.1,
            mode: ArrivalMode::DepartureRate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySpaceConfig {
    pub mu0_box: [f64; 2],
    pub mu1_box: [f64; 2],
    pub mu2_box: [f64; 2],
    pub grid_steps: usize,
}

impl Default for PolicySpaceConfig {
    fn default() -> Self {
        Self {
            mu0_box: [15.0, 20.0],
            mu1_box: [10.0, 15.0],
            mu2_box: [5.0, 10.0],
            grid_steps: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingKind {
    #[default]
    Bernoulli,
    SimilarityThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub routing: RoutingKind,
    pub horizon_packets: usize,
    /// Defaults to 10% of the horizon when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup_packets: Option<usize>,
    pub rng_seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            routing: RoutingKind::Bernoulli,
            horizon_packets: 1_000_000,
            warmup_packets: None,
            rng_seed: 42,
        }
    }
}

/// A complete scenario: channel model, similarity curve, queueing network,
/// optimizer search space and simulation settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub scenario: ScenarioConfig,
    pub logistic: LogisticParams,
    pub queue: QueueConfig,
    pub policy_space: PolicySpaceConfig,
    pub sim: SimSettings,
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Structural checks. Stability is left to the analysis so that an
    /// unstable but well-formed file maps to an infeasible outcome.
    pub fn validate(&self) -> Result<()> {
        self.scenario()?;
        self.logistic.validate()?;
        if !(self.queue.frame_duration > 0.0 && self.queue.frame_duration.is_finite()) {
            return Err(Error::Config("frame_duration must be positive".into()));
        }
        self.queue_params().validate()?;
        self.policy_space()?.validate()?;
        Ok(())
    }

    pub fn scenario(&self) -> Result<NomaScenario> {
        let s = &self.scenario;
        let scenario = NomaScenario {
            users: s
                .users
                .iter()
                .map(|u| UserChannel {
                    gain_sq: u.gain_sq,
                    power: dbm_to_watts(u.power),
                })
                .collect(),
            noise_power: dbm_to_watts(s.noise_power),
            bandwidth: s.bandwidth,
            info_per_word: s.info_per_word,
            symbols_per_word: s.symbols_per_word,
            max_symbols: s.max_symbols,
            p_max: dbm_to_watts(s.p_max),
            rate_threshold: s.rate_threshold,
            similarity_threshold: s.similarity_threshold,
            category_boundary: s.category_boundary,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn queue_params(&self) -> QueueParams {
        let q = &self.queue;
        QueueParams {
            lambda0: 1.0 / q.frame_duration,
            mu0: q.mu0,
            mu1: q.mu1,
            mu2: q.mu2,
            a: q.a,
            theta: q.theta,
            mode: q.mode,
        }
    }

    pub fn policy_space(&self) -> Result<PolicySpace> {
        let p = &self.policy_space;
        let interval = |name: &str, b: [f64; 2]| {
            Interval::new(b[0], b[1]).map_err(|_| {
                Error::Config(format!("{name} = [{}, {}] is not an interval", b[0], b[1]))
            })
        };
        let space = PolicySpace {
            mu0_box: interval("mu0_box", p.mu0_box)?,
            mu1_box: interval("mu1_box", p.mu1_box)?,
            mu2_box: interval("mu2_box", p.mu2_box)?,
            grid_steps: p.grid_steps,
        };
        space.validate()?;
        Ok(space)
    }

    /// Per-user similarities at the configured powers.
    pub fn similarities(&self) -> Result<Vec<f64>> {
        let scenario = self.scenario()?;
        Ok(semantic::sinr_vector(&scenario)
            .into_iter()
            .map(|g| semantic::similarity(g, &self.logistic))
            .collect())
    }

    pub fn sim_config(&self, seed: Option<u64>, packets: Option<usize>) -> Result<SimConfig> {
        let horizon = packets.unwrap_or(self.sim.horizon_packets);
        let routing = match self.sim.routing {
            RoutingKind::Bernoulli => Routing::Bernoulli,
            RoutingKind::SimilarityThreshold => Routing::SimilarityThreshold {
                boundary: self.scenario.category_boundary,
                similarities: self.similarities()?,
            },
        };
        Ok(SimConfig {
            qp: self.queue_params(),
            routing,
            horizon_packets: horizon,
            warmup_packets: self.sim.warmup_packets.unwrap_or(horizon / 10),
            rng_seed: seed.unwrap_or(self.sim.rng_seed),
        })
    }
}
