//! Subcommand execution: build configuration, run the library, write files.
//!
//! Exit status contract: 0 on success, 1 on validation errors (bad input
//! data, bad flags), 2 on numerical failures (quadrature, bracketing,
//! singular draws).

use crate::csvio;
use crate::report::{render_report, ConfigEcho};
use crate::{Command, McArgs, OutArg};
use invp_core::discrete::{discrete_pvalue, pushforward, FinitePmf};
use invp_core::discretization::{convergence_sweep, Density1D};
use invp_core::loc_scale::{loc_scale_pvalue, LocScaleModel};
use invp_core::normality::{
    alpha_contour_t3t4, check_normal, CheckCurve, NormalCheckRequest, NormalStatistic,
};
use invp_core::{closed_forms, Error, MonteCarloConfig, PValueReport, ScalarOrPair};
use std::fs;
use std::path::{Path, PathBuf};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn validation(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

/// Map library errors onto the exit-status contract.
fn from_core(e: Error) -> CliError {
    let code = match e {
        Error::BracketingFailure(_)
        | Error::QuadratureFailure { .. }
        | Error::SingularFiberPoint
        | Error::ExcessSingularDraws { .. }
        | Error::NonFiniteDifference
        | Error::UnresolvableLevel { .. } => 2,
        _ => 1,
    };
    CliError {
        code,
        message: e.to_string(),
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| validation(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| validation(format!("cannot write {}: {e}", path.display())))
}

fn mc_config(mc: &McArgs) -> MonteCarloConfig {
    MonteCarloConfig {
        n_sim: mc.n_sim,
        seed: mc.seed,
        chunk_size: mc.chunk_size,
        bandwidth: mc.bandwidth,
        grid_size: mc.grid_size,
    }
}

fn mc_echo(entries: &mut Vec<(String, String)>, c: &MonteCarloConfig) {
    entries.push(("n_sim".into(), c.n_sim.to_string()));
    entries.push(("seed".into(), c.seed.to_string()));
    entries.push(("chunk_size".into(), c.chunk_size.to_string()));
    entries.push((
        "bandwidth".into(),
        c.bandwidth.map_or("auto".into(), |h| format!("{h}")),
    ));
    entries.push(("grid_size".into(), c.grid_size.to_string()));
}

pub fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::CheckNormal { data, stat, mc, out } => cmd_check_normal(data, stat, mc, out),
        Command::Pvalue {
            dist,
            k,
            t0,
            xbar,
            n,
            out,
        } => cmd_pvalue(dist, k, t0, xbar, n, out),
        Command::Discrete { pmf, t0, map, out } => cmd_discrete(pmf, t0, map, out),
        Command::DiscretizeDemo {
            density,
            x0,
            levels,
            anchor,
            out,
        } => cmd_discretize_demo(density, x0, levels, anchor, out),
        Command::LocScaleCheck {
            data,
            model,
            df,
            n_sim,
            seed,
            chunk_size,
            out,
        } => cmd_loc_scale(data, model, df, n_sim, seed, chunk_size, out),
        Command::Contour { n, alpha, mc, out } => cmd_contour(n, alpha, mc, out),
    }
}

fn cmd_check_normal(
    data: PathBuf,
    stat: String,
    mc: McArgs,
    out: OutArg,
) -> Result<(), CliError> {
    let statistic = match stat.as_str() {
        "jb" => NormalStatistic::JarqueBera,
        "t3t4" => NormalStatistic::T3T4,
        "sw" => NormalStatistic::ShapiroWilk,
        other => return Err(validation(format!("unknown statistic `{other}`"))),
    };
    let sample = csvio::ingest_csv(&data).map_err(validation)?;
    let config = mc_config(&mc);
    let output = check_normal(&NormalCheckRequest {
        data: sample,
        statistic,
        config: config.clone(),
    })
    .map_err(from_core)?;

    let mut entries = vec![
        ("subcommand".into(), "check-normal".into()),
        ("input".into(), data.display().to_string()),
        ("stat".into(), stat),
    ];
    mc_echo(&mut entries, &config);
    entries.push(("out".into(), out.out.display().to_string()));
    write_file(
        &out.out,
        "report.json",
        &render_report(Some(&output.report), &ConfigEcho { entries }),
    )?;
    match &output.curve {
        CheckCurve::Curve1D(curve) => {
            write_file(&out.out, "density.csv", &csvio::render_density_csv(curve))
        }
        CheckCurve::Grid2D(grid) => {
            write_file(&out.out, "density.csv", &csvio::render_density2_csv(grid))
        }
    }
}

fn cmd_pvalue(
    dist: String,
    k: Option<u32>,
    t0: Option<f64>,
    xbar: Option<f64>,
    n: Option<u32>,
    out: OutArg,
) -> Result<(), CliError> {
    let (report, mut entries) = match dist.as_str() {
        "chisq" => {
            let k = k.ok_or_else(|| validation("--k is required for --dist chisq"))?;
            let t0 = t0.ok_or_else(|| validation("--t0 is required for --dist chisq"))?;
            let p_invariant = closed_forms::chisq_invariant_pvalue(k, t0).map_err(from_core)?;
            let p_measured = closed_forms::chisq_measured_pvalue(k, t0).map_err(from_core)?;
            let report = PValueReport {
                statistic_name: format!("chisq({k})"),
                t_observed: ScalarOrPair::Scalar(t0),
                p_invariant,
                p_plain: None,
                p_measured: Some(p_measured),
                p_tail: None,
                p_asymptotic: None,
                mc: None,
            };
            let entries = vec![
                ("subcommand".into(), "pvalue".into()),
                ("dist".into(), "chisq".into()),
                ("k".into(), k.to_string()),
                ("t0".into(), format!("{t0}")),
            ];
            (report, entries)
        }
        "mean" => {
            let xbar = xbar.ok_or_else(|| validation("--xbar is required for --dist mean"))?;
            let n = n.ok_or_else(|| validation("--n is required for --dist mean"))?;
            let report = PValueReport {
                statistic_name: "mean".into(),
                t_observed: ScalarOrPair::Scalar(xbar),
                p_invariant: closed_forms::mean_stat_pvalue(xbar, n),
                p_plain: None,
                p_measured: None,
                p_tail: None,
                p_asymptotic: None,
                mc: None,
            };
            let entries = vec![
                ("subcommand".into(), "pvalue".into()),
                ("dist".into(), "mean".into()),
                ("xbar".into(), format!("{xbar}")),
                ("n".into(), n.to_string()),
            ];
            (report, entries)
        }
        other => return Err(validation(format!("unknown distribution `{other}`"))),
    };
    entries.push(("out".into(), out.out.display().to_string()));
    write_file(
        &out.out,
        "report.json",
        &render_report(Some(&report), &ConfigEcho { entries }),
    )
}

fn cmd_discrete(
    pmf_path: PathBuf,
    t0: String,
    map: Option<PathBuf>,
    out: OutArg,
) -> Result<(), CliError> {
    let rows = csvio::ingest_pmf_csv(&pmf_path).map_err(validation)?;
    let pmf = FinitePmf::new_truncated(rows).map_err(from_core)?;
    let (pmf, t0_label) = match &map {
        Some(map_path) => {
            let pairs = csvio::ingest_map_csv(map_path).map_err(validation)?;
            let lookup: std::collections::BTreeMap<String, String> = pairs.into_iter().collect();
            let mapped = pushforward(&pmf, |label: &String| {
                lookup.get(label).cloned().unwrap_or_else(|| label.clone())
            });
            (mapped, t0)
        }
        None => (pmf, t0),
    };
    let p0 = pmf
        .prob(&t0_label)
        .ok_or_else(|| from_core(Error::OutcomeNotInSupport))?;
    let p = discrete_pvalue(&pmf, &t0_label).map_err(from_core)?;
    let report = PValueReport {
        statistic_name: "discrete".into(),
        t_observed: ScalarOrPair::Scalar(p0),
        p_invariant: p,
        p_plain: None,
        p_measured: None,
        p_tail: None,
        p_asymptotic: None,
        mc: None,
    };
    let mut entries = vec![
        ("subcommand".into(), "discrete".into()),
        ("pmf".into(), pmf_path.display().to_string()),
        ("t0".into(), t0_label),
    ];
    if let Some(m) = map {
        entries.push(("map".into(), m.display().to_string()));
    }
    entries.push(("out".into(), out.out.display().to_string()));
    write_file(
        &out.out,
        "report.json",
        &render_report(Some(&report), &ConfigEcho { entries }),
    )
}

fn cmd_discretize_demo(
    density: String,
    x0: f64,
    levels: u32,
    anchor: f64,
    out: OutArg,
) -> Result<(), CliError> {
    let f = match density.as_str() {
        "normal" => Density1D::Normal { mean: 0.0, sd: 1.0 },
        "laplace" => Density1D::Laplace { loc: 0.0, scale: 1.0 },
        "uniform" => Density1D::Uniform { lo: 0.0, hi: 1.0 },
        "exponential" => Density1D::Exponential { rate: 1.0 },
        other => return Err(validation(format!("unknown density `{other}`"))),
    };
    let widths: Vec<f64> = (0..=levels).map(|k| 2f64.powi(-(k as i32))).collect();
    let rows = convergence_sweep(&f, x0, &widths, anchor).map_err(from_core)?;
    let last = rows.last().expect("sweep is non-empty");
    let report = PValueReport {
        statistic_name: "discretize-demo".into(),
        t_observed: ScalarOrPair::Scalar(x0),
        p_invariant: last.p_continuous,
        p_plain: None,
        p_measured: Some(last.p_discrete),
        p_tail: None,
        p_asymptotic: None,
        mc: None,
    };
    let entries = vec![
        ("subcommand".into(), "discretize-demo".into()),
        ("density".into(), density),
        ("x0".into(), format!("{x0}")),
        ("levels".into(), levels.to_string()),
        ("anchor".into(), format!("{anchor}")),
        ("out".into(), out.out.display().to_string()),
    ];
    write_file(
        &out.out,
        "report.json",
        &render_report(Some(&report), &ConfigEcho { entries }),
    )?;
    write_file(
        &out.out,
        "convergence.csv",
        &csvio::render_convergence_csv(&rows),
    )
}

fn cmd_loc_scale(
    data: PathBuf,
    model_name: String,
    df: Option<u32>,
    n_sim: usize,
    seed: u64,
    chunk_size: usize,
    out: OutArg,
) -> Result<(), CliError> {
    let model = match model_name.as_str() {
        "normal" => LocScaleModel::Normal,
        "laplace" => LocScaleModel::Laplace,
        "logistic" => LocScaleModel::Logistic,
        "student-t" => LocScaleModel::StudentT {
            df: df.ok_or_else(|| validation("--df is required for --model student-t"))?,
        },
        other => return Err(validation(format!("unknown model `{other}`"))),
    };
    let sample = csvio::ingest_csv(&data).map_err(validation)?;
    let config = MonteCarloConfig {
        n_sim,
        seed,
        chunk_size,
        bandwidth: None,
        grid_size: 512,
    };
    let report = loc_scale_pvalue(&sample, &model, &config).map_err(from_core)?;
    let mut entries = vec![
        ("subcommand".into(), "loc-scale-check".into()),
        ("input".into(), data.display().to_string()),
        ("model".into(), model_name),
    ];
    if let Some(df) = df {
        entries.push(("df".into(), df.to_string()));
    }
    entries.push(("n_sim".into(), n_sim.to_string()));
    entries.push(("seed".into(), seed.to_string()));
    entries.push(("chunk_size".into(), chunk_size.to_string()));
    entries.push(("out".into(), out.out.display().to_string()));
    write_file(
        &out.out,
        "report.json",
        &render_report(Some(&report), &ConfigEcho { entries }),
    )
}

fn cmd_contour(n: usize, alpha: f64, mc: McArgs, out: OutArg) -> Result<(), CliError> {
    let config = mc_config(&mc);
    let set = alpha_contour_t3t4(n, alpha, &config).map_err(from_core)?;
    let mut entries = vec![
        ("subcommand".into(), "contour".into()),
        ("n".into(), n.to_string()),
        ("alpha".into(), format!("{alpha}")),
    ];
    mc_echo(&mut entries, &config);
    entries.push(("out".into(), out.out.display().to_string()));
    write_file(
        &out.out,
        "report.json",
        &render_report(None, &ConfigEcho { entries }),
    )?;
    let jb_lines = vec![set.jb_asymptotic.clone()];
    let curves: Vec<(&str, &[invp_core::contour::Polyline])> = vec![
        ("invariant", set.invariant.as_slice()),
        ("plain", set.plain.as_slice()),
        ("jb_asymptotic", jb_lines.as_slice()),
    ];
    write_file(&out.out, "contour.csv", &csvio::render_contour_csv(&curves))?;
    write_file(&out.out, "density.csv", &csvio::render_density2_csv(&set.grid))
}
