use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use chaining_core::dist::{certified_alpha, DistributionModel};
use chaining_core::gamma::{compute_gamma, Functional, GammaMode, EXACT_MAX_POINTS};
use chaining_core::metric::{IndexSet, NormOptions, ProcessMetric, ProcessSpec};
use chaining_core::stochlab::{estimate_sup, RngStream, SupTarget};
use chaining_core::tailkit::envelope_sandwich;
use chaining_core::verify::{
    comparison_experiment, convex_hull_decomposition, sudakov_experiment, two_sided_experiment, uniform_gamma,
    weak_strong_experiment, C_GRID, QUANTILE_GRID,
};

use crate::config::{build_process, Experiment, ExperimentConfig, IndexSetSpec};
use crate::error::CliError;
use crate::report::{Check, ReportDocument, Seeds};
use crate::tables::Table;

pub const DEFAULT_SAMPLES: usize = 100_000;
/// Desk-scale ceiling on observed constants for the two-sided upper bound.
pub const DEFAULT_TWO_SIDED_MAX: f64 = 40.0;
pub const DEFAULT_WEAK_STRONG_MAX: f64 = 4.0;
pub const DEFAULT_COMPARE_GRID: [f64; 3] = [2.0, 4.0, 8.0];
pub const DEFAULT_TAIL_POINTS: usize = 256;

/// A finished run: the report plus its tables.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ReportDocument,
    pub tables: Vec<Table>,
}

impl Outcome {
    /// Writes `report.json` and every table into `dir`, returning the report path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { context: format!("creating {}", dir.display()), source: e })?;
        for t in &self.tables {
            t.write(dir)?;
        }
        let path = dir.join("report.json");
        std::fs::write(&path, self.report.to_json())
            .map_err(|e| CliError::Io { context: format!("writing {}", path.display()), source: e })?;
        Ok(path)
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

fn set_seeds(spec: &IndexSetSpec, role: &str, out: &mut Vec<(String, u64)>) {
    match spec {
        IndexSetSpec::SphereRandom { seed, .. } => out.push((role.to_string(), *seed)),
        IndexSetSpec::InterleaveOf(inner) | IndexSetSpec::Scaled { of: inner, .. } => set_seeds(inner, role, out),
        _ => {}
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    proc: ProcessSpec,
    stream: RngStream,
    samples: usize,
}

impl Ctx<'_> {
    fn set(&self) -> Result<IndexSet, CliError> {
        Ok(self.cfg.index_set.as_ref().expect("validated").build()?)
    }

    fn p(&self) -> Result<f64, CliError> {
        self.cfg.params.p.ok_or_else(|| CliError::Schema { path: "params.p".into(), message: "this experiment needs p".into() })
    }

    fn metric(&self, set: IndexSet) -> Result<ProcessMetric, CliError> {
        Ok(ProcessMetric::new(
            self.proc.clone(),
            set,
            NormOptions { stream: self.stream.child(u64::MAX), ..NormOptions::default() },
        )?)
    }
}

struct Parts {
    grids: Value,
    checks: Vec<Check>,
    result: Value,
    tables: Vec<Table>,
}

/// Executes a validated config.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        proc: build_process(&cfg.process)?,
        stream: cfg.stream(),
        samples: cfg.params.samples.unwrap_or(DEFAULT_SAMPLES),
    };
    let parts = match cfg.experiment {
        Experiment::Gamma => gamma(&ctx)?,
        Experiment::Supremum => supremum(&ctx)?,
        Experiment::Sudakov => sudakov(&ctx)?,
        Experiment::TwoSided => two_sided(&ctx)?,
        Experiment::WeakStrong => weak_strong(&ctx)?,
        Experiment::Compare => compare(&ctx)?,
        Experiment::Tails => tails(&ctx)?,
        Experiment::Hull => hull(&ctx)?,
    };
    let mut index_set_seeds = Vec::new();
    if let Some(s) = &cfg.index_set {
        set_seeds(s, "index_set", &mut index_set_seeds);
    }
    if let Some(s) = &cfg.params.index_set_y {
        set_seeds(s, "index_set_y", &mut index_set_seeds);
    }
    let seeds = Seeds { master_seed: ctx.stream.master_seed, stream_id: ctx.stream.stream_id, index_set_seeds };
    let tables = if cfg.output.tables { parts.tables } else { Vec::new() };
    let names = tables.iter().map(Table::file_name).collect();
    let report = ReportDocument::new(cfg, seeds, parts.grids, parts.checks, parts.result, names);
    Ok(Outcome { report, tables })
}

fn matrix_table(metric: &ProcessMetric, p: f64) -> Result<Table, CliError> {
    let set = metric.index_set();
    let labels: Vec<String> = (0..set.len()).map(|i| set.label(i)).collect();
    let mut header = vec!["label"];
    header.extend(labels.iter().map(String::as_str));
    let mut t = Table::new(format!("distance_matrix_p{p}"), &header);
    let m = metric.matrix(p)?;
    for (i, l) in labels.iter().enumerate() {
        let mut row = vec![l.clone().into()];
        row.extend((0..set.len()).map(|j| m.get(i, j).into()));
        t.push(row);
    }
    Ok(t)
}

fn gamma(ctx: &Ctx) -> Result<Parts, CliError> {
    let set = ctx.set()?;
    let functional = ctx.cfg.params.functional.unwrap_or(Functional::GammaX);
    let mode = ctx.cfg.params.mode.unwrap_or(GammaMode::Greedy);
    let metric = ctx.metric(set)?;
    let g = compute_gamma(&metric, functional, mode)?;
    let oracle = if functional == Functional::GammaX { uniform_gamma(&metric) } else { None };
    let mut checks = vec![Check::new("certificate_valid", g.certificate.validate(metric.index_set().len()).is_ok(), "")];
    if let Some(o) = oracle {
        checks.push(Check::new(
            "uniform_oracle_agrees",
            (g.value - o).abs() <= 1e-6,
            format!("certificate {} vs oracle {o}", g.value),
        ));
    }
    let p = ctx.cfg.params.p.unwrap_or(2.0);
    let tables = if metric.index_set().len() <= 2048 { vec![matrix_table(&metric, p)?] } else { Vec::new() };
    Ok(Parts {
        grids: json!({ "matrix_order": p }),
        checks,
        result: json!({ "gamma": g, "uniform_oracle": oracle, "deterministic_metric": chaining_core::metric::IncrementMetric::is_deterministic(&metric) }),
        tables,
    })
}

fn supremum(ctx: &Ctx) -> Result<Parts, CliError> {
    let set = ctx.set()?;
    let target = ctx.cfg.params.target.unwrap_or(SupTarget::SupIncrements);
    let e = estimate_sup(&ctx.proc, &set, ctx.samples, ctx.stream, target)?;
    let nonneg = target != SupTarget::SupIncrements || e.mean >= 0.0;
    Ok(Parts {
        grids: json!({}),
        checks: vec![Check::new("nonnegative", nonneg, format!("mean {}", e.mean))],
        result: to_value(&e),
        tables: Vec::new(),
    })
}

fn sudakov(ctx: &Ctx) -> Result<Parts, CliError> {
    let set = ctx.set()?;
    let p = ctx.p()?;
    let observed_u = |p: f64| -> Result<f64, CliError> {
        let m = ctx.metric(set.clone())?.matrix(p)?;
        let n = set.len();
        Ok((0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| m.get(i, j)).fold(f64::INFINITY, f64::min))
    };
    let u = match ctx.cfg.params.u {
        Some(u) => u,
        None => observed_u(p)?,
    };
    let r = sudakov_experiment(&ctx.proc, &set, p, u, ctx.samples, ctx.stream)?;
    let checks = vec![
        Check::new("cardinality_ok", r.cardinality_ok, format!("|T| = {} vs e^p = {}", r.cardinality, p.exp())),
        Check::new("separation_ok", r.separation_ok, format!("min d_p = {} vs u = {u}", r.min_observed_separation)),
    ];
    let mut tables = Vec::new();
    let mut sweep = Vec::new();
    if let Some(grid) = &ctx.cfg.params.p_grid {
        let mut t = Table::new("kappa_sweep", &["p", "kappa_obs"]);
        for &q in grid {
            let s = sudakov_experiment(&ctx.proc, &set, q, observed_u(q)?, ctx.samples, ctx.stream)?;
            t.push(vec![q.into(), s.kappa_obs.into()]);
            sweep.push(s);
        }
        tables.push(t);
    }
    Ok(Parts {
        grids: json!({ "p": p, "p_grid": ctx.cfg.params.p_grid }),
        checks,
        result: json!({ "report": r, "u_source": if ctx.cfg.params.u.is_some() { "claimed" } else { "observed" }, "sweep": sweep }),
        tables,
    })
}

fn two_sided(ctx: &Ctx) -> Result<Parts, CliError> {
    let set = ctx.set()?;
    let mode = ctx.cfg.params.mode.unwrap_or(GammaMode::Greedy);
    let max = ctx.cfg.params.max_constant.unwrap_or(DEFAULT_TWO_SIDED_MAX);
    let r = two_sided_experiment(&ctx.proc, &set, ctx.samples, ctx.stream, mode)?;
    let mut checks = vec![Check::new(
        "upper_ratio_within",
        r.degenerate || r.esup.mean <= max * r.gamma_upper_cert + 3.0 * r.esup.stderr,
        format!("E sup {} vs {max} x certificate {}", r.esup.mean, r.gamma_upper_cert),
    )];
    if let Some(e) = r.gamma_exact {
        checks.push(Check::new(
            "exact_below_certificate",
            e <= r.gamma_upper_cert * (1.0 + 1e-12),
            format!("{e} vs {}", r.gamma_upper_cert),
        ));
    }
    Ok(Parts { grids: json!({ "max_constant": max }), checks, result: to_value(&r), tables: Vec::new() })
}

fn weak_strong(ctx: &Ctx) -> Result<Parts, CliError> {
    let set = ctx.set()?;
    let grid = match &ctx.cfg.params.p_grid {
        Some(g) => g.clone(),
        None => vec![ctx.p()?],
    };
    let max = ctx.cfg.params.max_constant.unwrap_or(DEFAULT_WEAK_STRONG_MAX);
    let mut t = Table::new("weak_strong", &["p", "strong", "weak_sup", "max_norm", "c_obs"]);
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for &p in &grid {
        let r = weak_strong_experiment(&ctx.proc, &set, p, ctx.samples, ctx.stream)?;
        t.push(vec![p.into(), r.strong.into(), r.weak_sup.mean.into(), r.max_norm.into(), r.c_obs.into()]);
        checks.push(Check::new(&format!("c_obs_within_p{p}"), r.c_obs <= max, format!("C_obs = {} vs {max}", r.c_obs)));
        reports.push(r);
    }
    Ok(Parts { grids: json!({ "p_grid": grid, "max_constant": max }), checks, result: to_value(&reports), tables: vec![t] })
}

fn compare(ctx: &Ctx) -> Result<Parts, CliError> {
    let set = ctx.set()?;
    let proc_y = match &ctx.cfg.params.process_y {
        Some(m) => build_process(m)?,
        None => ctx.proc.clone(),
    };
    let set_y = match &ctx.cfg.params.index_set_y {
        Some(s) => s.build()?,
        None => set.clone(),
    };
    let grid = ctx.cfg.params.p_grid.clone().unwrap_or(DEFAULT_COMPARE_GRID.to_vec());
    let r = comparison_experiment(&ctx.proc, &set, &proc_y, &set_y, &grid, ctx.samples, ctx.stream)?;
    let mut curves = Table::new("tail_curves", &["quantile", "u", "c", "p_y", "p_x", "ratio"]);
    for row in &r.tail_rows {
        curves.push(vec![row.quantile.into(), row.u.into(), row.c.into(), row.p_y.into(), row.p_x.into(), row.ratio.into()]);
    }
    let mut frontier = Table::new("frontier", &["c_arg", "c_prob"]);
    for f in &r.frontier {
        frontier.push(vec![f.c_arg.into(), f.c_prob.into()]);
    }
    Ok(Parts {
        grids: json!({ "p_grid": grid, "quantile_grid": QUANTILE_GRID, "c_grid": C_GRID }),
        checks: vec![Check::new("domination", true, format!("max ratio {}", r.max_domination_ratio))],
        result: to_value(&r),
        tables: vec![curves, frontier],
    })
}

fn tails(ctx: &Ctx) -> Result<Parts, CliError> {
    let points = ctx.cfg.params.points.unwrap_or(DEFAULT_TAIL_POINTS);
    let mut distinct: Vec<&DistributionModel> = Vec::new();
    for m in ctx.proc.models() {
        if !distinct.contains(&m) {
            distinct.push(m);
        }
    }
    let (mut checks, mut results, mut tables, mut grids) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, m) in distinct.iter().enumerate() {
        let alpha = match ctx.cfg.params.alpha {
            Some(a) => a,
            None => certified_alpha(m)?,
        };
        let r = envelope_sandwich(m, alpha, points)?;
        let mut t = Table::new(format!("sandwich_{i}_{}", m.name()), &["t", "N", "M", "M_shifted"]);
        for row in &r.rows {
            t.push(vec![row.t.into(), row.n.into(), row.m.into(), row.m_stretched.into()]);
        }
        checks.push(Check::new(
            &format!("sandwich_{i}_{}", m.name()),
            r.passed(),
            format!("{} violations, {} convexity violations", r.violations, r.convexity_violations),
        ));
        grids.push(json!({ "model": m.name(), "alpha": alpha, "lo": r.constants.threshold, "hi": 100.0 * r.constants.threshold, "points": points, "spacing": "log" }));
        results.push(json!({ "model": m.name(), "alpha": alpha, "report": r }));
        tables.push(t);
    }
    Ok(Parts { grids: Value::Array(grids), checks, result: Value::Array(results), tables })
}

fn hull(ctx: &Ctx) -> Result<Parts, CliError> {
    let set = ctx.set()?;
    let mode = ctx.cfg.params.mode.unwrap_or(if set.len() <= EXACT_MAX_POINTS { GammaMode::Exact } else { GammaMode::Greedy });
    let metric = ctx.metric(set.clone())?;
    let g = compute_gamma(&metric, Functional::GammaX, mode)?;
    let h = convex_hull_decomposition(&set, &g.certificate, &ctx.proc)?;
    let mut t = Table::new("chain_points", &["k", "level", "block", "from", "to", "weight", "norm_cap"]);
    for c in &h.chain_points {
        t.push(vec![c.k.into(), c.level.into(), c.block.into(), c.from.into(), c.to.into(), c.weight.into(), c.norm_cap.into()]);
    }
    let checks = vec![
        Check::new("residuals", h.max_residual <= 1e-9, format!("max residual {}", h.max_residual)),
        Check::new("norm_caps", h.max_norm_cap() <= 1.0 + 1e-9, format!("max cap {}", h.max_norm_cap())),
        Check::new("radius", h.passed(1e-9), format!("R = {}, largest step {}", h.r, h.largest_step)),
    ];
    Ok(Parts {
        grids: json!({ "mode": mode }),
        checks,
        result: json!({ "gamma": g.value, "certificate": g.certificate, "decomposition": h }),
        tables: vec![t],
    })
}
