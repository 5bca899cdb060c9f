//! Closed-form stationary analysis of the scheduler and the two parallel
//! servers: D/M/1 root parameters, stage delays, per-category and blended
//! average AoI, the AoII product form, and the embedded Markov chain used to
//! validate the geometric stationary law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, SolveSettings};

/// Utilizations at or above `1 - STABILITY_MARGIN` are rejected.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Default number of states kept in the truncated embedded chain.
pub const DEFAULT_TRUNCATION: usize = 60;

/// How the arrival rate of each server is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalMode {
    /// `lambda_i = share_i * mu0 * (1 - eta0)`: server inter-arrival means are
    /// the scheduler's mean delay divided by the category share.
    #[default]
    DepartureRate,
    /// `lambda_i = share_i * lambda0`: throughput conservation through a
    /// stable scheduler.
    FlowConservation,
}

/// Parameters of the scheduler + two-server network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    /// Update generation rate, `1 / (N T)`.
    pub lambda0: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// Fraction of Category I updates.
    pub a: f64,
    /// Constant transmission time in seconds.
    pub theta: f64,
    #[serde(default)]
    pub mode: ArrivalMode,
}

impl QueueParams {
    pub fn b(&self) -> f64 {
        1.0 - self.a
    }

    pub fn with_rates(&self, mu0: f64, mu1: f64, mu2: f64) -> Self {
        Self {
            mu0,
            mu1,
            mu2,
            ..*self
        }
    }

    /// Parameter sanity independent of stability.
    pub fn validate(&self) -> Result<()> {
        let rates = [self.lambda0, self.mu0, self.mu1, self.mu2];
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config(
                "all rates must be positive and finite".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::Config(format!(
                "category share a = {} outside [0, 1]",
                self.a
            )));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::Config(
                "transmission time must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Root parameters, arrival rates, utilizations and mean stage delays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarySolution {
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoiReport {
    pub aoi_cat1: f64,
    pub aoi_cat2: f64,
    pub aoi_blended: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoiiReport {
    pub mean_one_minus_xi: f64,
    pub aoii: f64,
}

fn check_stable(stage: &str, rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0 - STABILITY_MARGIN) {
        return Err(Error::Stability {
            stage: stage.into(),
            rho,
        });
    }
    Ok(())
}

/// Smallest root of `eta = exp(-(1 - eta) / rho)`, the D/M/1 root parameter,
/// via `eta = -rho W0(-(1/rho) exp(-1/rho))`.
pub fn eta_dm1(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!(
            "D/M/1 root needs 0 < rho < 1, got {rho}"
        )));
    }
    let inv = 1.0 / rho;
    let w = numerics::lambert_w0(-inv * (-inv).exp())?;
    let eta = (-rho * w).clamp(0.0, 1.0);
    if (eta - (-(1.0 - eta) * inv).exp()).abs() > 1e-10 {
        return eta_dm1_fixed_point(rho);
    }
    Ok(eta)
}

/// The same root by direct fixed-point solving, independent of Lambert W.
pub fn eta_dm1_fixed_point(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!(
            "D/M/1 root needs 0 < rho < 1, got {rho}"
        )));
    }
    numerics::fixed_point(|x| (-(1.0 - x) / rho).exp(), 0.0, SolveSettings::default())
}

/// Mean sojourn of an exponential server with root parameter `eta`:
/// `1/mu + eta / (mu (1 - eta))`.
pub fn sojourn(mu: f64, eta: f64) -> f64 {
    1.0 / mu + eta / (mu * (1.0 - eta))
}

/// Mean scheduler delay (waiting plus service).
pub fn scheduler_delay(qp: &QueueParams) -> Result<f64> {
    let rho0 = qp.lambda0 / qp.mu0;
    check_stable("scheduler", rho0)?;
    Ok(sojourn(qp.mu0, eta_dm1(rho0)?))
}

/// Arrival rates of server 1 and server 2 under the configured mode,
/// checked against each server's stability.
pub fn server_arrival_rates(qp: &QueueParams, eta0: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&eta0) {
        return Err(Error::Domain(format!("eta0 = {eta0} outside [0, 1)")));
    }
    let total = match qp.mode {
        ArrivalMode::DepartureRate => qp.mu0 * (1.0 - eta0),
        ArrivalMode::FlowConservation => qp.lambda0,
    };
    let rates = (qp.a * total, qp.b() * total);
    if rates.0 > 0.0 {
        check_stable("server 1", rates.0 / qp.mu1)?;
    }
    if rates.1 > 0.0 {
        check_stable("server 2", rates.1 / qp.mu2)?;
    }
    Ok(rates)
}

/// Mean delay at a server fed by deterministic arrivals at `lambda_i`.
/// A server with no traffic reports its bare service time.
pub fn server_delay(mu_i: f64, lambda_i: f64) -> Result<f64> {
    Ok(server_stage(mu_i, lambda_i)?.1)
}

/// `(eta_i, delay_i)` for one server.
fn server_stage(mu_i: f64, lambda_i: f64) -> Result<(f64, f64)> {
    if lambda_i == 0.0 {
        return Ok((0.0, 1.0 / mu_i));
    }
    let rho = lambda_i / mu_i;
    check_stable("server", rho)?;
    let eta = eta_dm1(rho)?;
    Ok((eta, sojourn(mu_i, eta)))
}

pub fn stationary_solution(qp: &QueueParams) -> Result<StationarySolution> {
    qp.validate()?;
    let rho0 = qp.lambda0 / qp.mu0;
    check_stable("scheduler", rho0)?;
    let eta0 = eta_dm1(rho0)?;
    let (lambda1, lambda2) = server_arrival_rates(qp, eta0)?;
    let (eta1, d1) = server_stage(qp.mu1, lambda1).map_err(|e| rename_stage(e, "server 1"))?;
    let (eta2, d2) = server_stage(qp.mu2, lambda2).map_err(|e| rename_stage(e, "server 2"))?;
    Ok(StationarySolution {
        eta0,
        eta1,
        eta2,
        lambda1,
        lambda2,
        rho0,
        rho1: lambda1 / qp.mu1,
        rho2: lambda2 / qp.mu2,
        d0: sojourn(qp.mu0, eta0),
        d1,
        d2,
    })
}

fn rename_stage(e: Error, stage: &str) -> Error {
    match e {
        Error::Stability { rho, .. } => Error::Stability {
            stage: stage.into(),
            rho,
        },
        other => other,
    }
}

/// Per-category and blended average AoI from a stationary solution.
pub fn aoi_from_solution(qp: &QueueParams, sol: &StationarySolution) -> AoiReport {
    let common = 0.5 / qp.lambda0 + qp.theta + sol.d0;
    let aoi_cat1 = common + sol.d1;
    let aoi_cat2 = common + sol.d2;
    AoiReport {
        aoi_cat1,
        aoi_cat2,
        aoi_blended: qp.a * aoi_cat1 + qp.b() * aoi_cat2,
    }
}

pub fn average_aoi(qp: &QueueParams) -> Result<AoiReport> {
    let sol = stationary_solution(qp)?;
    Ok(aoi_from_solution(qp, &sol))
}

/// AoII as blended AoI times the mean similarity deficit over users.
pub fn average_aoii(aoi: &AoiReport, similarities: &[f64]) -> AoiiReport {
    let mean_one_minus_xi = if similarities.is_empty() {
        0.0
    } else {
        similarities.iter().map(|xi| 1.0 - xi).sum::<f64>() / similarities.len() as f64
    };
    AoiiReport {
        mean_one_minus_xi,
        aoii: aoi.aoi_blended * mean_one_minus_xi,
    }
}

/// Probability of `i` exponential completions during one deterministic
/// inter-arrival interval, `exp(-1/rho) (1/rho)^i / i!`.
fn poisson_weights(rho: f64, n: usize) -> Vec<f64> {
    let m = 1.0 / rho;
    let mut out = Vec::with_capacity(n);
    let mut term = (-m).exp();
    for i in 0..n {
        out.push(term);
        term *= m / (i + 1) as f64;
    }
    out
}

/// Transition matrix of the queue length seen by arrivals of a D/M/1 queue,
/// truncated to `truncation` states. Mass that would leave the last state
/// upwards stays in the last column.
pub fn dm1_transition_matrix(rho: f64, truncation: usize) -> Result<Vec<Vec<f64>>> {
    if truncation < 2 {
        return Err(Error::Domain(format!("truncation {truncation} < 2")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho = {rho} outside (0, 1)")));
    }
    let theta = poisson_weights(rho, truncation + 1);
    let n = truncation;
    let mut p = vec![vec![0.0; n]; n];
    for (i, row) in p.iter_mut().enumerate() {
        // From i waiting, an arrival lifts the count to i + 1 and k services
        // complete before the next arrival.
        let mut served_mass = 0.0;
        for (k, &th) in theta.iter().enumerate().take(i + 1) {
            let j = i + 1 - k;
            row[j.min(n - 1)] += th;
            served_mass += th;
        }
        row[0] += 1.0 - served_mass;
    }
    Ok(p)
}

/// Left stationary vector of a row-stochastic matrix by power iteration.
pub fn stationary_distribution(p: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = p.len();
    if n == 0 {
        return Err(Error::EmptyInput("transition matrix".into()));
    }
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let mut next = vec![0.0; n];
        for (i, row) in p.iter().enumerate() {
            let w = pi[i];
            for (j, &pij) in row.iter().enumerate() {
                next[j] += w * pij;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < tol {
            return Ok(pi);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        context: "power iteration".into(),
    })
}

/// Waiting-time distribution of an exponential server with root `eta`:
/// an atom `1 - eta` at zero and an exponential tail of rate `mu (1 - eta)`.
pub fn waiting_time_cdf(eta: f64, mu: f64, t: f64) -> f64 {
    if t < 0.0 {
        0.0
    } else {
        1.0 - eta * (-mu * (1.0 - eta) * t).exp()
    }
}
