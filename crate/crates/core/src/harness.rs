//! Command implementations behind the `noma-aoii` binary: closed-form
//! metrics, simulation against the closed forms, policy optimization and
//! parameter sweeps. Every command returns a value that serializes to the
//! JSON or CSV the binary prints.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::optimizer::{self, SolveResult};
use crate::queueing::{self, AoiReport, AoiiReport, ArrivalMode, QueueParams, StationarySolution};
use crate::semantic::{self, FeasibilityReport};
use crate::sim::{self, EmpiricalAoii, SimReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Per-user channel quality, similarity and semantic rate at the configured
/// powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticReport {
    pub sinr: Vec<f64>,
    pub similarities: Vec<f64>,
    pub rates: Vec<f64>,
    pub mean_similarity: f64,
    pub mean_rate: f64,
    pub feasibility: FeasibilityReport,
}

impl SemanticReport {
    pub fn compute(cfg: &SystemConfig) -> Result<Self> {
        let scenario = cfg.scenario()?;
        let lp = cfg.logistic;
        let sinr = semantic::sinr_vector(&scenario);
        let similarities: Vec<f64> = sinr.iter().map(|&g| semantic::similarity(g, &lp)).collect();
        let rates: Vec<f64> = sinr
            .iter()
            .map(|&g| semantic::semantic_rate(g, &scenario, &lp))
            .collect();
        let m = sinr.len() as f64;
        Ok(Self {
            mean_similarity: similarities.iter().sum::<f64>() / m,
            mean_rate: rates.iter().sum::<f64>() / m,
            feasibility: semantic::check_feasibility(&scenario, &lp),
            sinr,
            similarities,
            rates,
        })
    }

    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (k, v) in self.sinr.iter().enumerate() {
            out.push((format!("sinr_{}", k + 1), *v));
        }
        for (k, v) in self.similarities.iter().enumerate() {
            out.push((format!("similarity_{}", k + 1), *v));
        }
        for (k, v) in self.rates.iter().enumerate() {
            out.push((format!("rate_{}", k + 1), *v));
        }
        out.push(("mean_similarity".into(), self.mean_similarity));
        out.push(("mean_one_minus_xi".into(), 1.0 - self.mean_similarity));
        out.push(("mean_rate".into(), self.mean_rate));
        out.push(("min_rate".into(), self.feasibility.min_rate));
        out.push(("min_similarity".into(), self.feasibility.min_similarity));
        out.push((
            "feasible".into(),
            if self.feasibility.feasible() {
                1.0
            } else {
                0.0
            },
        ));
        out
    }
}

/// Stationary queue quantities, AoI and AoII at the configured rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueReport {
    pub lambda0: f64,
    pub stationary: StationarySolution,
    pub aoi: AoiReport,
    pub aoii: AoiiReport,
}

impl QueueReport {
    pub fn compute(qp: &QueueParams, similarities: &[f64]) -> Result<Self> {
        let stationary = queueing::stationary_solution(qp)?;
        let aoi = queueing::aoi_from_solution(qp, &stationary);
        Ok(Self {
            lambda0: qp.lambda0,
            stationary,
            aoi,
            aoii: queueing::average_aoii(&aoi, similarities),
        })
    }

    pub fn metrics(&self) -> Vec<(String, f64)> {
        let s = &self.stationary;
        let values = [
            self.lambda0,
            s.eta0,
            s.eta1,
            s.eta2,
            s.lambda1,
            s.lambda2,
            s.rho0,
            s.rho1,
            s.rho2,
            s.d0,
            s.d1,
            s.d2,
            self.aoi.aoi_cat1,
            self.aoi.aoi_cat2,
            self.aoi.aoi_blended,
            self.aoii.aoii,
        ];
        Self::METRIC_NAMES
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    pub const METRIC_NAMES: [&'static str; 16] = [
        "lambda0",
        "eta0",
        "eta1",
        "eta2",
        "lambda1",
        "lambda2",
        "rho0",
        "rho1",
        "rho2",
        "d0",
        "d1",
        "d2",
        "aoi_cat1",
        "aoi_cat2",
        "aoi_blended",
        "aoii",
    ];
}

/// Output of `analytic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub semantic: SemanticReport,
    pub queue: QueueReport,
}

impl AnalyticReport {
    /// Flat `(metric, value)` list in a stable order.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out = self.semantic.metrics();
        out.extend(self.queue.metrics());
        out
    }
}

pub fn cmd_analytic(cfg: &SystemConfig) -> Result<AnalyticReport> {
    let semantic = SemanticReport::compute(cfg)?;
    let queue = QueueReport::compute(&cfg.queue_params(), &semantic.similarities)?;
    Ok(AnalyticReport { semantic, queue })
}

/// One line of the simulation-versus-closed-form table. `rel_err` is
/// measured against the flow-conservation prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    /// Prediction under [`ArrivalMode::DepartureRate`].
    pub analytic_paper_mode: f64,
    pub analytic_flow_mode: f64,
    pub simulated: f64,
    pub half_width: f64,
    pub rel_err: f64,
}

/// Metric name, closed-form accessor, simulated value and its half-width.
type ComparisonProbe = (&'static str, fn(&QueueReport) -> f64, f64, f64);

/// Output of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub report: SimReport,
    pub aoii: EmpiricalAoii,
    pub comparison: Vec<ComparisonRow>,
}

pub fn cmd_simulate(
    cfg: &SystemConfig,
    seed: Option<u64>,
    packets: Option<usize>,
    trace: Option<&Path>,
) -> Result<SimulateReport> {
    let sim_cfg = cfg.sim_config(seed, packets)?;
    let similarities = cfg.similarities()?;
    let report = sim::run(&sim_cfg)?;
    let aoii = sim::empirical_aoii(&report, &similarities)?;
    if let Some(path) = trace {
        let file = std::fs::File::create(path)?;
        sim::write_trace(&report.records, std::io::BufWriter::new(file))?;
    }

    let share = sim_cfg.routing.category1_share(sim_cfg.qp.a);
    let predict = |mode| {
        let qp = QueueParams {
            a: share,
            mode,
            ..sim_cfg.qp
        };
        QueueReport::compute(&qp, &similarities).ok()
    };
    let departure = predict(ArrivalMode::DepartureRate);
    let flow = predict(ArrivalMode::FlowConservation);
    let pick = |r: &Option<QueueReport>, f: fn(&QueueReport) -> f64| r.as_ref().map_or(f64::NAN, f);

    let entries: [ComparisonProbe; 10] = [
        (
            "scheduler_delay",
            |q| q.stationary.d0,
            report.mean_scheduler_delay,
            report.scheduler_delay_half_width,
        ),
        (
            "scheduler_zero_wait",
            |q| 1.0 - q.stationary.eta0,
            report.zero_wait_fraction,
            f64::NAN,
        ),
        (
            "server1_arrival_rate",
            |q| q.stationary.lambda1,
            report.server_arrival_rate[0],
            f64::NAN,
        ),
        (
            "server2_arrival_rate",
            |q| q.stationary.lambda2,
            report.server_arrival_rate[1],
            f64::NAN,
        ),
        (
            "server1_delay",
            |q| q.stationary.d1,
            report.mean_server_delay[0],
            f64::NAN,
        ),
        (
            "server2_delay",
            |q| q.stationary.d2,
            report.mean_server_delay[1],
            f64::NAN,
        ),
        ("aoi_cat1", |q| q.aoi.aoi_cat1, report.aoi_cat1, f64::NAN),
        ("aoi_cat2", |q| q.aoi.aoi_cat2, report.aoi_cat2, f64::NAN),
        (
            "aoi_blended",
            |q| q.aoi.aoi_blended,
            report.aoi_q_all_updates,
            report.aoi_half_width,
        ),
        ("aoii", |q| q.aoii.aoii, aoii.per_packet, aoii.half_width),
    ];
    let comparison = entries
        .into_iter()
        .map(|(metric, f, simulated, half_width)| {
            let flow_value = pick(&flow, f);
            ComparisonRow {
                metric: metric.to_string(),
                analytic_paper_mode: pick(&departure, f),
                analytic_flow_mode: flow_value,
                simulated,
                half_width,
                rel_err: (simulated - flow_value) / flow_value,
            }
        })
        .collect();
    Ok(SimulateReport {
        report,
        aoii,
        comparison,
    })
}

/// One outer-grid row of the optimizer trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub objective: f64,
    pub feasible: bool,
    pub best: bool,
    pub reason: Option<String>,
}

/// Output of `optimize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub powers: Vec<f64>,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub aoi_min: f64,
    pub similarities: Vec<f64>,
    pub mean_similarity: f64,
    pub aoii_min: f64,
    pub best_index: usize,
    pub trace: Vec<TraceRow>,
}

impl From<SolveResult> for OptimizeReport {
    fn from(r: SolveResult) -> Self {
        let trace = r
            .trace
            .into_iter()
            .enumerate()
            .map(|(k, p)| TraceRow {
                k,
                mu0: p.mu0,
                mu1: p.mu1,
                mu2: p.mu2,
                objective: p.objective,
                feasible: p.feasible,
                best: k == r.best_index,
                reason: p.reason,
            })
            .collect();
        Self {
            powers: r.policy.powers,
            mu0: r.policy.mu0,
            mu1: r.policy.mu1,
            mu2: r.policy.mu2,
            aoi_min: r.aoi_min,
            similarities: r.similarities,
            mean_similarity: r.mean_similarity,
            aoii_min: r.aoii_min,
            best_index: r.best_index,
            trace,
        }
    }
}

pub fn cmd_optimize(cfg: &SystemConfig) -> Result<OptimizeReport> {
    let result = optimizer::solve_p0(
        &cfg.scenario()?,
        &cfg.logistic,
        &cfg.queue_params(),
        &cfg.policy_space()?,
    )?;
    Ok(result.into())
}

/// One swept parameter: a dotted path into the scenario file and the values
/// it takes. A `*` segment addresses every element of an array, so
/// `scenario.users.*.power` sets a common transmit power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<f64>,
}

/// A sweep description. The base scenario is `base_config` (relative to the
/// experiment file) or the defaults, with the `base` table merged on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_config: Option<PathBuf>,
    #[serde(default)]
    pub base: toml::Table,
    pub sweep: Vec<SweepAxis>,
    pub outputs: Vec<String>,
}

impl ExperimentSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut spec: Self = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        if let (Some(base), Some(dir)) = (&spec.base_config, path.parent()) {
            if base.is_relative() {
                spec.base_config = Some(dir.join(base));
            }
        }
        Ok(spec)
    }

    pub fn base_value(&self) -> Result<toml::Value> {
        let cfg = match &self.base_config {
            Some(p) => SystemConfig::load(p)?,
            None => SystemConfig::default(),
        };
        let mut value = toml::Value::try_from(&cfg).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut value, &toml::Value::Table(self.base.clone()));
        Ok(value)
    }
}

fn merge(dst: &mut toml::Value, src: &toml::Value) {
    match (dst, src) {
        (toml::Value::Table(d), toml::Value::Table(s)) => {
            for (k, v) in s {
                match d.get_mut(k) {
                    Some(existing) => merge(existing, v),
                    None => {
                        d.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (d, s) => *d = s.clone(),
    }
}

/// Set every leaf addressed by `path` to `x`. Integer leaves accept only
/// integral values.
pub fn set_path(root: &mut toml::Value, path: &str, x: f64) -> Result<()> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("malformed path `{path}`")));
    }
    set_segments(root, &segments, x).map_err(|why| Error::Config(format!("path `{path}`: {why}")))
}

fn set_segments(
    node: &mut toml::Value,
    segments: &[&str],
    x: f64,
) -> std::result::Result<(), String> {
    let Some((head, rest)) = segments.split_first() else {
        return match node {
            toml::Value::Float(f) => {
                *f = x;
                Ok(())
            }
            toml::Value::Integer(i) => {
                if x.fract() != 0.0 || x.abs() > 9.0e15 {
                    return Err(format!("{x} is not an integer"));
                }
                *i = x as i64;
                Ok(())
            }
            other => Err(format!("leaf holds {}, not a number", other.type_str())),
        };
    };
    match node {
        toml::Value::Table(t) => {
            let child = t
                .get_mut(*head)
                .ok_or_else(|| format!("no field `{head}`"))?;
            set_segments(child, rest, x)
        }
        toml::Value::Array(items) if *head == "*" => {
            if items.is_empty() {
                return Err("empty array".into());
            }
            items
                .iter_mut()
                .try_for_each(|item| set_segments(item, rest, x))
        }
        toml::Value::Array(items) => {
            let idx: usize = head
                .parse()
                .map_err(|_| format!("`{head}` is not an index"))?;
            let len = items.len();
            let child = items
                .get_mut(idx)
                .ok_or_else(|| format!("index {idx} out of range ({len} elements)"))?;
            set_segments(child, rest, x)
        }
        _ => Err(format!("`{head}` descends into a scalar")),
    }
}

/// Metrics computed only on request because they run the optimizer.
const OPT_METRICS: [&str; 6] = [
    "opt_mu0",
    "opt_mu1",
    "opt_mu2",
    "opt_aoi_min",
    "min_aoii",
    "opt_aoii_min",
];

/// Names `sweep` can report for a scenario with `users` users.
pub fn metric_catalog(users: usize) -> Vec<String> {
    let mut names = Vec::new();
    for prefix in ["sinr", "similarity", "rate"] {
        names.extend((1..=users).map(|k| format!("{prefix}_{k}")));
    }
    names.extend(
        [
            "mean_similarity",
            "mean_one_minus_xi",
            "mean_rate",
            "min_rate",
            "min_similarity",
            "feasible",
        ]
        .map(String::from),
    );
    names.extend(QueueReport::METRIC_NAMES.map(String::from));
    names.extend(OPT_METRICS.map(String::from));
    names
}

/// One row of the long-format sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub experiment: String,
    pub param1: String,
    pub value1: f64,
    pub param2: Option<String>,
    pub value2: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub reason: Option<String>,
}

pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    if spec.sweep.is_empty() || spec.sweep.len() > 2 {
        return Err(Error::Config(format!(
            "an experiment sweeps one or two parameters, got {}",
            spec.sweep.len()
        )));
    }
    if let Some(axis) = spec.sweep.iter().find(|a| a.values.is_empty()) {
        return Err(Error::Config(format!(
            "sweep over `{}` has no values",
            axis.path
        )));
    }
    if spec.outputs.is_empty() {
        return Err(Error::Config("experiment requests no outputs".into()));
    }
    let base = spec.base_value()?;
    let base_cfg: SystemConfig = base
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    base_cfg.validate()?;
    let catalog = metric_catalog(base_cfg.scenario.users.len());
    if let Some(unknown) = spec.outputs.iter().find(|m| !catalog.contains(m)) {
        return Err(Error::Config(format!("unknown metric `{unknown}`")));
    }
    for axis in &spec.sweep {
        set_path(&mut base.clone(), &axis.path, axis.values[0])?;
    }

    let points: Vec<(f64, Option<f64>)> = match spec.sweep.as_slice() {
        [a] => a.values.iter().map(|&x| (x, None)).collect(),
        [a, b] => a
            .values
            .iter()
            .flat_map(|&x| b.values.iter().map(move |&y| (x, Some(y))))
            .collect(),
        _ => unreachable!(),
    };
    let want_opt = spec
        .outputs
        .iter()
        .any(|m| OPT_METRICS.contains(&m.as_str()));

    let rows: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&(x, y)| {
            let values = evaluate_point(spec, &base, x, y, want_opt);
            spec.outputs
                .iter()
                .map(|metric| {
                    let (value, reason) = match &values {
                        Ok(found) => found
                            .iter()
                            .find(|(name, _)| name == metric)
                            .map(|(_, v)| v.clone())
                            .unwrap_or_else(|| (f64::NAN, Some("not computed".into()))),
                        Err(e) => (f64::NAN, Some(e.to_string())),
                    };
                    SweepRow {
                        experiment: spec.name.clone(),
                        param1: spec.sweep[0].path.clone(),
                        value1: x,
                        param2: spec.sweep.get(1).map(|a| a.path.clone()),
                        value2: y,
                        metric: metric.clone(),
                        value,
                        reason,
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

type PointValues = Vec<(String, (f64, Option<String>))>;

fn evaluate_point(
    spec: &ExperimentSpec,
    base: &toml::Value,
    x: f64,
    y: Option<f64>,
    want_opt: bool,
) -> Result<PointValues> {
    let mut value = base.clone();
    set_path(&mut value, &spec.sweep[0].path, x)?;
    if let Some(y) = y {
        set_path(&mut value, &spec.sweep[1].path, y)?;
    }
    let cfg: SystemConfig = value
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    cfg.validate()?;

    let semantic = SemanticReport::compute(&cfg)?;
    let mut out: PointValues = semantic
        .metrics()
        .into_iter()
        .map(|(k, v)| (k, (v, None)))
        .collect();
    let qp = cfg.queue_params();
    match QueueReport::compute(&qp, &semantic.similarities) {
        Ok(q) => out.extend(q.metrics().into_iter().map(|(k, v)| (k, (v, None)))),
        Err(e) => {
            let reason = e.to_string();
            out.extend(
                QueueReport::METRIC_NAMES
                    .iter()
                    .map(|k| (k.to_string(), (f64::NAN, Some(reason.clone())))),
            );
        }
    }
    if want_opt {
        let space = cfg.policy_space()?;
        match optimizer::solve_p1(&qp, &space) {
            Ok(p1) => {
                let deficit = 1.0 - semantic.mean_similarity;
                out.push(("opt_mu0".into(), (p1.mu0, None)));
                out.push(("opt_mu1".into(), (p1.mu1, None)));
                out.push(("opt_mu2".into(), (p1.mu2, None)));
                out.push(("opt_aoi_min".into(), (p1.aoi_min, None)));
                out.push(("min_aoii".into(), (p1.aoi_min * deficit, None)));
            }
            Err(e) => {
                let reason = e.to_string();
                for k in &OPT_METRICS[..5] {
                    out.push((k.to_string(), (f64::NAN, Some(reason.clone()))));
                }
            }
        }
        let p0 = optimizer::solve_p0(&cfg.scenario()?, &cfg.logistic, &qp, &space);
        out.push((
            "opt_aoii_min".into(),
            match p0 {
                Ok(r) => (r.aoii_min, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            },
        ));
    }
    Ok(out)
}

/// Write `(metric, value)` pairs as a JSON object or a two-column CSV.
pub fn write_metrics<W: Write>(
    metrics: &[(String, f64)],
    format: Format,
    mut out: W,
) -> Result<()> {
    match format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = metrics
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                .collect();
            serde_json::to_writer_pretty(&mut out, &map)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["metric", "value"])?;
            for (k, v) in metrics {
                w.write_record([k.as_str(), &v.to_string()])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Serialize `rows` as CSV with a header, or as a JSON array.
pub fn write_rows<W: Write, T: Serialize>(rows: &[T], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_path_scalar_wildcard_and_integer() {
        let mut v = toml::Value::try_from(SystemConfig::default()).unwrap();
        set_path(&mut v, "queue.mu0", 18.0).unwrap();
        set_path(&mut v, "scenario.users.*.power", 3.0).unwrap();
        set_path(&mut v, "policy_space.grid_steps", 7.0).unwrap();
        set_path(&mut v, "scenario.users.0.gain_sq", 0.9).unwrap();
        let cfg: SystemConfig = v.clone().try_into().unwrap();
        assert_eq!(cfg.queue.mu0, 18.0);
        assert!(cfg.scenario.users.iter().all(|u| u.power == 3.0));
        assert_eq!(cfg.policy_space.grid_steps, 7);
        assert_eq!(cfg.scenario.users[0].gain_sq, 0.9);

        for bad in [
            "queue.mu9",
            "queue",
            "queue.mu0.x",
            "scenario.users.9.power",
            "queue..a",
        ] {
            assert!(
                matches!(set_path(&mut v, bad, 1.0), Err(Error::Config(_))),
                "{bad}"
            );
        }
        assert!(set_path(&mut v, "policy_space.grid_steps", 2.5).is_err());
    }

    #[test]
    fn metric_lists_cover_catalog() {
        let cfg = SystemConfig::default();
        let report = cmd_analytic(&cfg).unwrap();
        let catalog = metric_catalog(6);
        for (name, _) in report.metrics() {
            assert!(catalog.contains(&name), "{name}");
        }
        assert_eq!(report.metrics().len() + OPT_METRICS.len(), catalog.len());
    }

    #[test]
    fn analytic_matches_library() {
        let cfg = SystemConfig::default();
        let report = cmd_analytic(&cfg).unwrap();
        let aoi = queueing::average_aoi(&cfg.queue_params()).unwrap();
        assert_eq!(report.queue.aoi, aoi);
    }

    #[test]
    fn unstable_point_becomes_nan_row() {
        let spec = ExperimentSpec {
            name: "t".into(),
            description: None,
            base_config: None,
            base: toml::Table::new(),
            sweep: vec![SweepAxis {
                path: "queue.mu0".into(),
                values: vec![8.0, 20.0],
            }],
            outputs: vec!["d0".into(), "mean_similarity".into()],
        };
        let rows = cmd_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].value.is_nan());
        assert!(rows[0].reason.as_deref().unwrap().contains("C5"));
        assert!(rows[1].value.is_finite());
        assert!(rows[2].value.is_finite() && rows[2].reason.is_none());
    }

    #[test]
    fn sweep_spec_errors_are_config_errors() {
        let mut spec = ExperimentSpec {
            name: "t".into(),
            description: None,
            base_config: None,
            base: toml::Table::new(),
            sweep: vec![SweepAxis {
                path: "queue.mu0".into(),
                values: vec![],
            }],
            outputs: vec!["d0".into()],
        };
        assert!(matches!(cmd_sweep(&spec), Err(Error::Config(_))));
        spec.sweep[0].values = vec![18.0];
        spec.outputs = vec!["nope".into()];
        assert!(matches!(cmd_sweep(&spec), Err(Error::Config(_))));
        spec.outputs = vec!["d0".into()];
        spec.sweep[0].path = "queue.nope".into();
        assert!(matches!(cmd_sweep(&spec), Err(Error::Config(_))));
    }
}
