//! Batch front end: built-in benchmark demos and user-configured runs,
//! emitting CSV tables and static SVG figures.

pub mod config;
pub mod svg;

use std::fs;
use std::path::Path;

use crate::adversary::rdd_blend;
use crate::mc::{run_curve, RowLabel, Scenario, SummaryTable};
use crate::metrics::{
    kolmogorov_discrete_vs_normal, standardized_binomial, tv_discrete_vs_continuous,
};
use config::ConfigSpec;
use svg::Series;

/// Failure with the process exit code it maps to: 2 for usage, validation
/// and output-path problems, 1 for internal errors.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl CliFailure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl std::fmt::Display for CliFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliFailure> {
    fs::write(path, content)
        .map_err(|e| CliFailure::usage(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> Result<(), CliFailure> {
    fs::create_dir_all(path)
        .map_err(|e| CliFailure::usage(format!("cannot create {}: {e}", path.display())))
}

fn with_pool<T: Send>(
    jobs: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliFailure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if jobs > 0 {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| CliFailure::internal(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn curve_chart(table: &SummaryTable, title: &str) -> String {
    // log-k axis; the Q sentinel sits one decade past the largest k
    let max_k = table
        .rows
        .iter()
        .filter_map(|r| match r.label {
            RowLabel::K(k) => Some(k),
            RowLabel::Q => None,
        })
        .max()
        .unwrap_or(1);
    let pos = |label: RowLabel| -> f64 {
        match label {
            RowLabel::K(k) => (k as f64).log10(),
            RowLabel::Q => (max_k as f64).log10() + 1.0,
        }
    };
    let series = vec![
        Series {
            name: "reject rate".into(),
            color: "#cc3311",
            points: table.rows.iter().map(|r| (pos(r.label), r.reject_rate)).collect(),
        },
        Series {
            name: "cover rate of m0".into(),
            color: "#0077bb",
            points: table.rows.iter().map(|r| (pos(r.label), r.cover_rate)).collect(),
        },
        Series {
            name: "mean CI length".into(),
            color: "#009988",
            points: table.rows.iter().map(|r| (pos(r.label), r.mean_ci_len)).collect(),
        },
    ];
    svg::line_chart(title, "log10(k)   (rightmost point: Q)", "rate / length", &series)
}

fn blend_chart(spec: &ConfigSpec) -> Result<String, CliFailure> {
    let q_mean = spec
        .to_experiment(Some(0))
        .map_err(|e| CliFailure::internal(e.to_string()))?
        .q
        .mean;
    let (lo, hi) = q_mean.support();
    let grid: Vec<f64> = (0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0).collect();
    let trace = |mean: &crate::model::MeanFunction, name: &str, color: &'static str| Series {
        name: name.to_string(),
        color,
        points: grid
            .iter()
            .filter_map(|&x| mean.eval(x, None).ok().map(|y| (x, y)))
            .collect(),
    };
    let mut series = vec![trace(&q_mean, "g_Q (alternative)", "#000000")];
    for (k, color) in [(2u64, "#cc3311"), (10, "#0077bb"), (50, "#009988")] {
        let blended = rdd_blend(&q_mean, spec.m0, k)
            .map_err(|e| CliFailure::internal(e.to_string()))?;
        series.push(trace(&blended, &format!("g_k, k = {k}"), color));
    }
    Ok(svg::line_chart(
        "Continuous approximation of a discontinuous mean",
        "x",
        "conditional mean",
        &series,
    ))
}

fn metrics_table() -> String {
    let mut out = String::from("n,tv,kolmogorov\n");
    for n in [10u64, 100, 1_000, 10_000] {
        let dist = standardized_binomial(n, 0.5).expect("valid binomial");
        out.push_str(&format!(
            "{n},{:.6},{:.6}\n",
            tv_discrete_vs_continuous(&dist),
            kolmogorov_discrete_vs_normal(&dist)
        ));
    }
    out
}

fn metrics_chart(csv: &str) -> String {
    let mut tv = Vec::new();
    let mut ks = Vec::new();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let n: f64 = cols[0].parse().unwrap_or(0.0);
        tv.push((n.log10(), cols[1].parse().unwrap_or(0.0)));
        ks.push((n.log10(), cols[2].parse().unwrap_or(0.0)));
    }
    svg::line_chart(
        "Total variation vs Kolmogorov distance, standardized binomial",
        "log10(trials)",
        "distance to the standard normal",
        &[
            Series { name: "total variation".into(), color: "#cc3311", points: tv },
            Series { name: "kolmogorov".into(), color: "#0077bb", points: ks },
        ],
    )
}

/// `demo <scenario>`: run the built-in benchmark and write
/// `out/<scenario>/table.csv` plus figures.
pub fn cmd_demo(
    scenario: &str,
    out: &Path,
    seed: u64,
    jobs: usize,
) -> Result<(), CliFailure> {
    let dir = out.join(scenario);
    ensure_dir(&dir)?;
    if scenario == "metrics" {
        let csv = metrics_table();
        write_file(&dir.join("table.csv"), &csv)?;
        write_file(&dir.join("curve.svg"), &metrics_chart(&csv))?;
        return Ok(());
    }
    let sc = match scenario {
        "rdd" => Scenario::Rdd,
        "rkd" => Scenario::Rkd,
        "bunching" => Scenario::Bunching,
        other => {
            return Err(CliFailure::usage(format!(
                "unknown scenario '{other}'; expected rdd, rkd, bunching or metrics"
            )))
        }
    };
    let spec = ConfigSpec::benchmark(sc);
    let experiment = spec
        .to_experiment(Some(seed))
        .map_err(|e| CliFailure::internal(e.to_string()))?;
    let table = with_pool(jobs, || run_curve(&experiment))?
        .map_err(|e| CliFailure::internal(e.to_string()))?;
    write_file(&dir.join("table.csv"), &table.to_csv())?;
    write_file(
        &dir.join("curve.svg"),
        &curve_chart(&table, &format!("{scenario} benchmark: rejection and coverage vs k")),
    )?;
    if sc == Scenario::Rdd {
        write_file(&dir.join("blend.svg"), &blend_chart(&spec)?)?;
    }
    Ok(())
}

/// `run <config>`: validate, echo the resolved config, run the curve, write
/// CSV and SVG.
pub fn cmd_run(
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    jobs: usize,
) -> Result<(), CliFailure> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliFailure::usage(format!("cannot read {}: {e}", config_path.display())))?;
    let spec = ConfigSpec::parse(&text).map_err(|e| CliFailure::usage(e.to_string()))?;
    let experiment = spec
        .to_experiment(seed)
        .map_err(|e| CliFailure::usage(e.to_string()))?;
    ensure_dir(out)?;
    write_file(&out.join("resolved.cfg"), &spec.render(experiment.master_seed))?;
    let table = with_pool(jobs, || run_curve(&experiment))?
        .map_err(|e| CliFailure::internal(e.to_string()))?;
    write_file(&out.join("table.csv"), &table.to_csv())?;
    write_file(
        &out.join("curve.svg"),
        &curve_chart(
            &table,
            &format!("{}: rejection and coverage vs k", config::scenario_name(spec.scenario)),
        ),
    )?;
    Ok(())
}
