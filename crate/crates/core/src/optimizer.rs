//! AoII minimization by decomposition.
//!
//! The queueing half picks `(mu0, mu1, mu2)` by an exact linear search over
//! a grid of scheduler rates. For a frozen `mu0` the objective is a sum of a
//! term in `mu1` and a term in `mu2`, so the inner problem is two independent
//! golden-section searches. The semantic half sets every user to `p_max`
//! and checks the rate and similarity constraints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, Interval, SolveSettings};
use crate::queueing::{self, ArrivalMode, QueueParams, STABILITY_MARGIN};
use crate::semantic::{self, LogisticParams, NomaScenario};

/// Relative margin kept above each server's arrival rate.
const STABLE_CLIP: f64 = 1e-6;
/// Gap enforcing `mu1 > mu2`.
const ORDER_GAP: f64 = 1e-9;

/// Search boxes for the three service rates and the outer grid size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySpace {
    pub mu0_box: Interval,
    pub mu1_box: Interval,
    pub mu2_box: Interval,
    pub grid_steps: usize,
}

impl PolicySpace {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [
            ("mu0", self.mu0_box),
            ("mu1", self.mu1_box),
            ("mu2", self.mu2_box),
        ] {
            Interval::new(b.lo, b.hi)
                .map_err(|_| Error::Config(format!("{name} box [{}, {}] is empty", b.lo, b.hi)))?;
            if b.lo <= 0.0 {
                return Err(Error::Config(format!("{name} box must be positive")));
            }
        }
        if self.mu1_box.hi <= self.mu2_box.lo {
            return Err(Error::Config("boxes admit no mu1 > mu2 (C7)".into()));
        }
        if self.grid_steps < 1 {
            return Err(Error::Config("grid_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Outer grid `mu0_min + k (mu0_max - mu0_min) / Q`, `k = 0..=Q`.
    pub fn mu0_grid(&self) -> Vec<f64> {
        let q = self.grid_steps;
        let step = self.mu0_box.width() / q as f64;
        (0..=q)
            .map(|k| {
                if k == q {
                    self.mu0_box.hi
                } else {
                    self.mu0_box.lo + k as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    /// Transmit power per user in watts.
    pub powers: Vec<f64>,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
}

/// One outer-grid point of the linear search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// NaN when the point admits no stable policy.
    pub objective: f64,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Solution {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub aoi_min: f64,
    pub best_index: usize,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P3Solution {
    pub powers: Vec<f64>,
    pub similarities: Vec<f64>,
    pub mean_similarity: f64,
    pub feasibility: semantic::FeasibilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub policy: Policy,
    pub aoi_min: f64,
    pub similarities: Vec<f64>,
    pub mean_similarity: f64,
    pub aoii_min: f64,
    pub best_index: usize,
    pub trace: Vec<TracePoint>,
}

/// Blended average AoI as a function of the three service rates, written
/// as `common(mu0) + a d1(mu1) + b d2(mu2)`.
pub fn aoi_objective(qp: &QueueParams, mu0: f64, mu1: f64, mu2: f64) -> Result<f64> {
    let front = FrontStage::new(qp, mu0)?;
    Ok(front.common + front.weighted_d1(mu1)? + front.weighted_d2(mu2)?)
}

/// Everything fixed once `mu0` is frozen.
struct FrontStage {
    a: f64,
    b: f64,
    lambda1: f64,
    lambda2: f64,
    common: f64,
}

impl FrontStage {
    fn new(qp: &QueueParams, mu0: f64) -> Result<Self> {
        let rho0 = qp.lambda0 / mu0;
        if rho0.is_nan() || rho0 >= 1.0 - STABILITY_MARGIN {
            return Err(Error::Stability {
                stage: "scheduler".into(),
                rho: rho0,
            });
        }
        let eta0 = queueing::eta_dm1(rho0)?;
        let total = match qp.mode {
            ArrivalMode::DepartureRate => mu0 * (1.0 - eta0),
            ArrivalMode::FlowConservation => qp.lambda0,
        };
        Ok(Self {
            a: qp.a,
            b: qp.b(),
            lambda1: qp.a * total,
            lambda2: qp.b() * total,
            common: 0.5 / qp.lambda0 + qp.theta + queueing::sojourn(mu0, eta0),
        })
    }

    fn weighted_d1(&self, mu1: f64) -> Result<f64> {
        if self.a == 0.0 {
            return Ok(0.0);
        }
        Ok(self.a * queueing::server_delay(mu1, self.lambda1).map_err(|e| stage(e, "server 1"))?)
    }

    fn weighted_d2(&self, mu2: f64) -> Result<f64> {
        if self.b == 0.0 {
            return Ok(0.0);
        }
        Ok(self.b * queueing::server_delay(mu2, self.lambda2).map_err(|e| stage(e, "server 2"))?)
    }
}

fn stage(e: Error, name: &str) -> Error {
    match e {
        Error::Stability { rho, .. } => Error::Stability {
            stage: name.into(),
            rho,
        },
        other => other,
    }
}

/// Minimize one weighted server term over its stability-clipped box.
fn inner_minimize(
    weight: f64,
    lambda: f64,
    bounds: Interval,
    term: impl Fn(f64) -> f64,
) -> std::result::Result<f64, String> {
    let clipped = bounds
        .clip(lambda * (1.0 + STABLE_CLIP), f64::INFINITY)
        .ok_or_else(|| {
            format!(
                "no stable rate in [{}, {}] for arrival rate {lambda:.6}",
                bounds.lo, bounds.hi
            )
        })?;
    if weight == 0.0 {
        return Ok(clipped.hi);
    }
    numerics::minimize_1d(term, clipped, SolveSettings::default())
        .map(|(x, _)| x)
        .map_err(|e| e.to_string())
}

fn solve_at_mu0(qp: &QueueParams, space: &PolicySpace, mu0: f64) -> TracePoint {
    let infeasible = |reason: String| TracePoint {
        mu0,
        mu1: f64::NAN,
        mu2: f64::NAN,
        objective: f64::NAN,
        feasible: false,
        reason: Some(reason),
    };
    let front = match FrontStage::new(qp, mu0) {
        Ok(f) => f,
        Err(e) => return infeasible(e.to_string()),
    };
    let term1 = |m: f64| front.weighted_d1(m).unwrap_or(f64::INFINITY);
    let mu1 = match inner_minimize(front.a, front.lambda1, space.mu1_box, term1) {
        Ok(m) => m,
        Err(r) => return infeasible(format!("server 1: {r}")),
    };
    let mu2_box = match space.mu2_box.clip(0.0, mu1 - ORDER_GAP) {
        Some(b) => b,
        None => return infeasible("no mu2 below mu1 (C7)".into()),
    };
    let term2 = |m: f64| front.weighted_d2(m).unwrap_or(f64::INFINITY);
    let mu2 = match inner_minimize(front.b, front.lambda2, mu2_box, term2) {
        Ok(m) => m,
        Err(r) => return infeasible(format!("server 2: {r}")),
    };
    match (front.weighted_d1(mu1), front.weighted_d2(mu2)) {
        (Ok(t1), Ok(t2)) => TracePoint {
            mu0,
            mu1,
            mu2,
            objective: front.common + t1 + t2,
            feasible: true,
            reason: None,
        },
        (Err(e), _) | (_, Err(e)) => infeasible(e.to_string()),
    }
}

/// AoI-optimal service rates by exact linear search over `mu0`.
///
/// Ties between grid points resolve to the smallest `mu0`.
pub fn solve_p1(qp_template: &QueueParams, space: &PolicySpace) -> Result<P1Solution> {
    space.validate()?;
    let trace: Vec<TracePoint> = space
        .mu0_grid()
        .into_par_iter()
        .map(|mu0| solve_at_mu0(qp_template, space, mu0))
        .collect();

    let mut best: Option<usize> = None;
    for (k, p) in trace.iter().enumerate() {
        if p.feasible && best.is_none_or(|b| p.objective < trace[b].objective) {
            best = Some(k);
        }
    }
    let best_index = best.ok_or_else(|| {
        let reason = trace
            .iter()
            .find_map(|p| p.reason.clone())
            .unwrap_or_default();
        Error::Infeasible(format!(
            "no grid point of mu0 admits a stable policy (C5): {reason}"
        ))
    })?;
    let b = &trace[best_index];
    Ok(P1Solution {
        mu0: b.mu0,
        mu1: b.mu1,
        mu2: b.mu2,
        aoi_min: b.objective,
        best_index,
        trace,
    })
}

/// Every user at `p_max`, then the rate and similarity constraints.
pub fn solve_p3(scenario: &NomaScenario, lp: &LogisticParams) -> Result<P3Solution> {
    scenario.validate()?;
    lp.validate()?;
    let at_max = scenario.with_common_power(scenario.p_max);
    let feasibility = semantic::check_feasibility(&at_max, lp);
    if let Some(k) = feasibility.first_violation() {
        let u = &feasibility.users[k];
        return Err(Error::Infeasible(format!(
            "user {} at p_max: rate {:.6} (threshold {}), similarity {:.6} (threshold {})",
            k + 1,
            u.rate,
            scenario.rate_threshold,
            u.similarity,
            scenario.similarity_threshold
        )));
    }
    let similarities: Vec<f64> = feasibility.users.iter().map(|u| u.similarity).collect();
    let mean_similarity = similarities.iter().sum::<f64>() / similarities.len() as f64;
    Ok(P3Solution {
        powers: at_max.users.iter().map(|u| u.power).collect(),
        similarities,
        mean_similarity,
        feasibility,
    })
}

/// Minimum AoII as the product of the two subproblem optima.
pub fn solve_p0(
    scenario: &NomaScenario,
    lp: &LogisticParams,
    qp_template: &QueueParams,
    space: &PolicySpace,
) -> Result<SolveResult> {
    let p1 = solve_p1(qp_template, space).map_err(|e| attribute(e, "P1"))?;
    let p3 = solve_p3(scenario, lp).map_err(|e| attribute(e, "P3"))?;
    Ok(SolveResult {
        policy: Policy {
            powers: p3.powers,
            mu0: p1.mu0,
            mu1: p1.mu1,
            mu2: p1.mu2,
        },
        aoi_min: p1.aoi_min,
        aoii_min: p1.aoi_min * (1.0 - p3.mean_similarity),
        similarities: p3.similarities,
        mean_similarity: p3.mean_similarity,
        best_index: p1.best_index,
        trace: p1.trace,
    })
}

fn attribute(e: Error, sub: &str) -> Error {
    match e {
        Error::Infeasible(m) => Error::Infeasible(format!("{sub}: {m}")),
        other => other,
    }
}

/// Finite-difference Hessian of the AoI in `(mu1, mu2)` at a frozen `mu0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub is_psd: bool,
}

/// Central-difference second partials at `(qp.mu1, qp.mu2)` with `mu0`
/// frozen at `mu0_fixed`. `z2` differentiates in `mu1` first, `z3` in `mu2`
/// first.
pub fn hessian_check(qp: &QueueParams, mu0_fixed: f64) -> Result<HessianReport> {
    let front = FrontStage::new(qp, mu0_fixed)?;
    let (x, y) = (qp.mu1, qp.mu2);
    let (hx, hy) = (1e-4 * x, 1e-4 * y);
    let f = |m1: f64, m2: f64| -> Result<f64> {
        Ok(front.common + front.weighted_d1(m1)? + front.weighted_d2(m2)?)
    };

    let f0 = f(x, y)?;
    let z1 = (f(x + hx, y)? - 2.0 * f0 + f(x - hx, y)?) / (hx * hx);
    let z4 = (f(x, y + hy)? - 2.0 * f0 + f(x, y - hy)?) / (hy * hy);
    let d_mu1 = |m2: f64| -> Result<f64> { Ok((f(x + hx, m2)? - f(x - hx, m2)?) / (2.0 * hx)) };
    let d_mu2 = |m1: f64| -> Result<f64> { Ok((f(m1, y + hy)? - f(m1, y - hy)?) / (2.0 * hy)) };
    let z2 = (d_mu1(y + hy)? - d_mu1(y - hy)?) / (2.0 * hy);
    let z3 = (d_mu2(x + hx)? - d_mu2(x - hx)?) / (2.0 * hx);

    let tol = 1e-6 * z1.abs().max(z4.abs());
    let is_psd = z1 >= -tol && z4 >= -tol && z1 * z4 - z2 * z3 >= -tol * tol;
    Ok(HessianReport {
        z1,
        z2,
        z3,
        z4,
        is_psd,
    })
}

/// Exhaustive search over per-user power vectors on a geometric grid from
/// `p_max / 1000` to `p_max`. Diagnostic only: it explores how interference
/// between users bears on the all-`p_max` policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDiagnostic {
    pub best_powers: Vec<f64>,
    pub best_mean_similarity: f64,
    pub pmax_mean_similarity: f64,
    pub evaluated: usize,
}

pub fn power_grid_diagnostic(
    scenario: &NomaScenario,
    lp: &LogisticParams,
    levels: usize,
) -> Result<PowerDiagnostic> {
    scenario.validate()?;
    let m = scenario.num_users();
    if levels < 2 {
        return Err(Error::Config("need at least two power levels".into()));
    }
    let total = levels
        .checked_pow(m as u32)
        .filter(|&t| t <= 5_000_000)
        .ok_or_else(|| Error::Config(format!("{levels}^{m} power vectors is too many")))?;
    let grid: Vec<f64> = (0..levels)
        .map(|i| scenario.p_max * 1e-3f64.powf(1.0 - i as f64 / (levels - 1) as f64))
        .collect();
    let mean_xi = |s: &NomaScenario| {
        semantic::sinr_vector(s)
            .iter()
            .map(|&g| semantic::similarity(g, lp))
            .sum::<f64>()
            / m as f64
    };

    let (best_idx, best_val) = (0..total)
        .into_par_iter()
        .map(|code| {
            let mut s = scenario.clone();
            let mut c = code;
            for u in &mut s.users {
                u.power = grid[c % levels];
                c /= levels;
            }
            (code, mean_xi(&s))
        })
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |x, y| {
                if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) {
                    y
                } else {
                    x
                }
            },
        );
    let mut c = best_idx;
    let best_powers = (0..m)
        .map(|_| {
            let p = grid[c % levels];
            c /= levels;
            p
        })
        .collect();
    Ok(PowerDiagnostic {
        best_powers,
        best_mean_similarity: best_val,
        pmax_mean_similarity: mean_xi(&scenario.with_common_power(scenario.p_max)),
        evaluated: total,
    })
}
