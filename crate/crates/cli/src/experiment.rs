//! Experiment families: homogeneous sweep, heterogeneous grid, random
//! drops, Monte-Carlo validation and single-scenario runs.
//!
//! Scenario points run in parallel; results are collected by scenario index
//! so output ordering (and therefore every emitted byte) is independent of
//! thread scheduling.

use rayon::prelude::*;

use deepdeal_core::baselines::{deep_fixed_m, ref_e, BaselineSpec};
use deepdeal_core::error::CoreError;
use deepdeal_core::link::{SystemParams, UserLink};
use deepdeal_core::mc::{estimate_bussgang, McConfig};
use deepdeal_core::optimizer::{
    alternating_optimize, default_antenna_probe, default_power_probe, AoResult,
};
use deepdeal_core::pa;
use deepdeal_core::rootfind::RootSearchConfig;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::scenario;

/// Algorithm labels as they appear in the result rows.
pub const ALG_DEEP_DEAL: &str = "DEEP-DEAL";
pub const ALG_DEEP: &str = "DEEP";
pub const ALG_REF_E: &str = "REF-E";

/// One `(scenario, algorithm)` outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub algorithm: &'static str,
    pub pa_class: &'static str,
    /// Per-user path losses of the scenario, dB.
    pub beta_db: Vec<f64>,
    pub p_w: f64,
    pub ibo_db: f64,
    pub m: u32,
    pub shares: Vec<f64>,
    pub rates_bps: Vec<f64>,
    pub sum_rate_bps: f64,
    pub p_tot_w: f64,
    pub ee_bit_per_joule: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Cumulative distributions emitted by the drops experiment (values of the
/// jointly optimized allocator across drops).
#[derive(Debug, Clone, PartialEq)]
pub struct DropsCdfs {
    pub ee: Vec<f64>,
    pub ibo_db: Vec<f64>,
    pub m: Vec<u32>,
}

/// One row of the Monte-Carlo validation table.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub psi: f64,
    pub lambda_closed: f64,
    pub lambda_hat: f64,
    pub lambda_se: f64,
    pub d_closed_w: f64,
    pub d_hat_w: f64,
    pub d_se_w: f64,
    pub residual: f64,
    pub pass: bool,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub cdfs: Option<DropsCdfs>,
    pub validation: Option<Vec<ValidationRow>>,
    pub summary: String,
    /// True when no optimizer run hit its iteration cap.
    pub all_converged: bool,
}

/// Run the jointly optimizing allocator with the standard starting probes.
pub fn run_deep_deal(scenario: &[UserLink], params: &SystemParams) -> Result<AoResult, CoreError> {
    let m_init = default_antenna_probe(scenario.len());
    let p_init = default_power_probe(m_init, params);
    let cfg_p = RootSearchConfig::new(p_init, params.tol_p);
    let cfg_m = RootSearchConfig::new(m_init, params.tol_m);
    alternating_optimize(scenario, params, &cfg_p, &cfg_m, m_init, p_init)
}

fn run_deep(
    scenario: &[UserLink],
    params: &SystemParams,
    fixed_m: u32,
) -> Result<AoResult, CoreError> {
    let spec = BaselineSpec::deep_fixed_m(fixed_m);
    let cfg_p = RootSearchConfig::new(default_power_probe(fixed_m as f64, params), params.tol_p);
    deep_fixed_m(scenario, &spec, params, &cfg_p)
}

fn run_ref_e(
    scenario: &[UserLink],
    params: &SystemParams,
    fixed_m: u32,
) -> Result<AoResult, CoreError> {
    ref_e(scenario, &BaselineSpec::ref_e(fixed_m), params)
}

fn row_from(
    scenario_id: String,
    algorithm: &'static str,
    beta_db: &[f64],
    result: &AoResult,
    params: &SystemParams,
) -> ResultRow {
    let alloc = &result.allocation;
    let ev = &result.evaluation;
    ResultRow {
        scenario_id,
        algorithm,
        pa_class: params.pa_class.label(),
        beta_db: beta_db.to_vec(),
        p_w: alloc.total_power_w,
        ibo_db: 10.0 * ev.pa.psi.log10(),
        m: alloc.antennas_int().expect("finalized allocation"),
        shares: alloc.shares.clone(),
        rates_bps: ev.rates_bps.clone(),
        sum_rate_bps: ev.sum_rate_bps,
        p_tot_w: ev.p_tot_w,
        ee_bit_per_joule: ev.ee_bit_per_joule,
        iterations: result.iterations,
        converged: result.converged,
    }
}

/// Optimizer failures (no sign change found at extreme scenarios) are
/// recorded in-row rather than aborting the experiment.
fn failure_row(
    scenario_id: String,
    algorithm: &'static str,
    beta_db: &[f64],
    params: &SystemParams,
) -> ResultRow {
    ResultRow {
        scenario_id,
        algorithm,
        pa_class: params.pa_class.label(),
        beta_db: beta_db.to_vec(),
        p_w: f64::NAN,
        ibo_db: f64::NAN,
        m: 0,
        shares: vec![f64::NAN; beta_db.len()],
        rates_bps: vec![f64::NAN; beta_db.len()],
        sum_rate_bps: f64::NAN,
        p_tot_w: f64::NAN,
        ee_bit_per_joule: f64::NAN,
        iterations: 0,
        converged: false,
    }
}

/// DEEP-DEAL plus the configured baselines on one scenario.
fn rows_for_scenario(
    scenario_id: String,
    scenario: &[UserLink],
    beta_db: &[f64],
    params: &SystemParams,
    baseline_m: Option<u32>,
    with_deep: bool,
) -> Vec<ResultRow> {
    let push = |rows: &mut Vec<ResultRow>,
                    algorithm: &'static str,
                    result: Result<AoResult, CoreError>| {
        rows.push(match result {
            Ok(res) => row_from(scenario_id.clone(), algorithm, beta_db, &res, params),
            Err(_) => failure_row(scenario_id.clone(), algorithm, beta_db, params),
        });
    };
    let mut rows = Vec::with_capacity(3);
    push(&mut rows, ALG_DEEP_DEAL, run_deep_deal(scenario, params));
    if let Some(m) = baseline_m {
        if (m as usize) > scenario.len() {
            if with_deep {
                push(&mut rows, ALG_DEEP, run_deep(scenario, params, m));
            }
            push(&mut rows, ALG_REF_E, run_ref_e(scenario, params, m));
        }
    }
    rows
}

fn median(values: &[f64]) -> f64 {
    let sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp); // failure rows carry NaN, which sorts last
    v
}

/// Dispatch on the configured experiment family.
pub fn run_experiment(cfg: &ExperimentConfig) -> ExperimentOutput {
    match cfg.experiment {
        ExperimentKind::Sweep2 => run_sweep2(cfg),
        ExperimentKind::Grid2 => run_grid2(cfg),
        ExperimentKind::Drops => run_drops(cfg),
        ExperimentKind::Validate => run_validate(cfg),
        ExperimentKind::Single => run_single(cfg),
    }
}

fn run_sweep2(cfg: &ExperimentConfig) -> ExperimentOutput {
    let params = cfg.system_params();
    let axis = cfg.sweep_axis_db();
    let baseline_m = cfg.baseline_m.or(Some(32));

    let per_point: Vec<Vec<ResultRow>> = axis
        .par_iter()
        .map(|&db| {
            let scenario =
                scenario::homogeneous_users(2, db, &params, cfg.resolved_noise_reference());
            rows_for_scenario(
                format!("sweep[{db}]"),
                &scenario,
                &[db, db],
                &params,
                baseline_m,
                true,
            )
        })
        .collect();
    let rows: Vec<ResultRow> = per_point.into_iter().flatten().collect();

    let mut summary = String::new();
    summary.push_str("two-user homogeneous path-loss sweep\n");
    summary.push_str(&format!("{}\n\n", cfg.echo()));
    summary.push_str("beta_db  EE(DEEP-DEAL)   EE(DEEP)        EE(REF-E)       DD/REF-E\n");
    for chunk in rows.chunks(3) {
        if chunk.len() == 3 {
            let (dd, deep, refe) = (&chunk[0], &chunk[1], &chunk[2]);
            summary.push_str(&format!(
                "{:7.1}  {:.8e}  {:.8e}  {:.8e}  {:.6}\n",
                dd.beta_db[0],
                dd.ee_bit_per_joule,
                deep.ee_bit_per_joule,
                refe.ee_bit_per_joule,
                dd.ee_bit_per_joule / refe.ee_bit_per_joule,
            ));
        }
    }
    let all_converged = rows.iter().all(|r| r.converged);
    ExperimentOutput {
        rows,
        cdfs: None,
        validation: None,
        summary,
        all_converged,
    }
}

fn run_grid2(cfg: &ExperimentConfig) -> ExperimentOutput {
    let params = cfg.system_params();
    let axis = cfg.sweep_axis_db();
    let baseline_m = cfg.baseline_m.or(Some(32));

    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect();
    let per_point: Vec<Vec<ResultRow>> = points
        .par_iter()
        .map(|&(db1, db2)| {
            let scenario = scenario::users_from_path_losses(
                &[db1, db2],
                &params,
                cfg.resolved_noise_reference(),
            );
            rows_for_scenario(
                format!("grid[{db1},{db2}]"),
                &scenario,
                &[db1, db2],
                &params,
                baseline_m,
                false,
            )
        })
        .collect();
    let rows: Vec<ResultRow> = per_point.into_iter().flatten().collect();

    let mut summary = String::new();
    summary.push_str("two-user heterogeneous path-loss grid\n");
    summary.push_str(&format!("{}\n\n", cfg.echo()));
    summary.push_str("beta1_db beta2_db  DD/REF-E    omega_1\n");
    for chunk in rows.chunks(2) {
        if chunk.len() == 2 {
            let (dd, refe) = (&chunk[0], &chunk[1]);
            summary.push_str(&format!(
                "{:8.1} {:8.1}  {:10.6}  {:.9}\n",
                dd.beta_db[0],
                dd.beta_db[1],
                dd.ee_bit_per_joule / refe.ee_bit_per_joule,
                dd.shares[0],
            ));
        }
    }
    let all_converged = rows.iter().all(|r| r.converged);
    ExperimentOutput {
        rows,
        cdfs: None,
        validation: None,
        summary,
        all_converged,
    }
}

fn run_drops(cfg: &ExperimentConfig) -> ExperimentOutput {
    let params = cfg.system_params();
    let baseline_m = cfg.baseline_m.expect("validated drops config");

    let per_drop: Vec<Vec<ResultRow>> = (0..cfg.n_drops as u64)
        .into_par_iter()
        .map(|drop| {
            let scenario = scenario::generate_drop(cfg, drop);
            let beta_db: Vec<f64> = scenario.iter().map(|u| -10.0 * u.beta.log10()).collect();
            rows_for_scenario(
                format!("drop[{drop}]"),
                &scenario,
                &beta_db,
                &params,
                Some(baseline_m),
                true,
            )
        })
        .collect();

    let dd_rows: Vec<&ResultRow> = per_drop.iter().map(|rows| &rows[0]).collect();
    let failed = dd_rows
        .iter()
        .filter(|r| !r.ee_bit_per_joule.is_finite())
        .count();
    let cdfs = DropsCdfs {
        ee: sorted(dd_rows.iter().map(|r| r.ee_bit_per_joule).collect()),
        ibo_db: sorted(dd_rows.iter().map(|r| r.ibo_db).collect()),
        m: {
            let mut m: Vec<u32> = dd_rows.iter().map(|r| r.m).collect();
            m.sort_unstable();
            m
        },
    };

    let gain_over = |idx: usize| -> Vec<f64> {
        per_drop
            .iter()
            .map(|rows| rows[0].ee_bit_per_joule / rows[idx].ee_bit_per_joule - 1.0)
            .filter(|g| g.is_finite())
            .collect()
    };
    let gains_deep = sorted(gain_over(1));
    let gains_refe = sorted(gain_over(2));

    let mut summary = String::new();
    summary.push_str("random-drop experiment\n");
    summary.push_str(&format!("{}\n\n", cfg.echo()));
    if failed > 0 {
        summary.push_str(&format!(
            "optimizer failures: {failed} of {} drops\n",
            cfg.n_drops
        ));
    }
    summary.push_str(&format!(
        "median EE (DEEP-DEAL): {:.8e} bit/J\n",
        median(&cdfs.ee)
    ));
    summary.push_str(&format!(
        "median optimal antenna count (DEEP-DEAL): {}\n",
        cdfs.m[cdfs.m.len() / 2]
    ));
    summary.push_str(&format!(
        "median back-off (DEEP-DEAL): {:.6} dB\n",
        median(&cdfs.ibo_db)
    ));
    summary.push_str(&format!(
        "median per-drop EE gain over REF-E (M = {baseline_m}): {:.4} %\n",
        100.0 * median(&gains_refe)
    ));
    summary.push_str(&format!(
        "median per-drop EE gain over DEEP (M = {baseline_m}): {:.4} %\n",
        100.0 * median(&gains_deep)
    ));

    let rows: Vec<ResultRow> = per_drop.into_iter().flatten().collect();
    let all_converged = rows.iter().all(|r| r.converged);
    ExperimentOutput {
        rows,
        cdfs: Some(cdfs),
        validation: None,
        summary,
        all_converged,
    }
}

fn run_single(cfg: &ExperimentConfig) -> ExperimentOutput {
    let params = cfg.system_params();
    let scenario =
        scenario::users_from_path_losses(&cfg.beta_db, &params, cfg.resolved_noise_reference());
    let baseline_m = cfg
        .baseline_m
        .or(Some(32))
        .filter(|&m| (m as usize) > scenario.len());
    let rows = rows_for_scenario(
        "single".to_string(),
        &scenario,
        &cfg.beta_db,
        &params,
        baseline_m,
        true,
    );

    let mut summary = String::new();
    summary.push_str("single scenario\n");
    summary.push_str(&format!("{}\n\n", cfg.echo()));
    for row in &rows {
        summary.push_str(&format!(
            "{:9}: EE = {:.8e} bit/J, P = {:.8e} W, IBO = {:.6} dB, M = {}, converged = {}\n",
            row.algorithm, row.ee_bit_per_joule, row.p_w, row.ibo_db, row.m, row.converged
        ));
    }
    if baseline_m.is_none() {
        summary.push_str("baseline skipped: baseline_m does not exceed the user count\n");
    }
    let all_converged = rows.iter().all(|r| r.converged);
    ExperimentOutput {
        rows,
        cdfs: None,
        validation: None,
        summary,
        all_converged,
    }
}

fn run_validate(cfg: &ExperimentConfig) -> ExperimentOutput {
    let rows: Vec<ValidationRow> = cfg
        .mc_psi
        .iter()
        .enumerate()
        .map(|(i, &psi)| {
            let mc = McConfig::new(
                cfg.mc_samples,
                psi,
                cfg.mc_input_power_w,
                cfg.seed.wrapping_add(i as u64),
            )
            .expect("validated mc config");
            let est = estimate_bussgang(&mc);
            let lambda_closed = pa::lambda_of_psi(psi).expect("validated psi");
            let d_closed =
                pa::distortion_total(cfg.mc_input_power_w, psi, 1.0).expect("validated psi");
            let residual_bound = 4.0 / (cfg.mc_samples as f64).sqrt();
            // Deep back-off draws no clipped samples, degenerating the batch
            // standard errors to zero; one ulp of the input power is the
            // resolution floor of the estimator.
            let pass = (est.lambda_hat - lambda_closed).abs() <= 3.0 * est.lambda_se + f64::EPSILON
                && (est.distortion_power_w - d_closed).abs()
                    <= 3.0 * est.distortion_se + f64::EPSILON * cfg.mc_input_power_w
                && est.correlation_residual <= residual_bound;
            ValidationRow {
                psi,
                lambda_closed,
                lambda_hat: est.lambda_hat,
                lambda_se: est.lambda_se,
                d_closed_w: d_closed,
                d_hat_w: est.distortion_power_w,
                d_se_w: est.distortion_se,
                residual: est.correlation_residual,
                pass,
            }
        })
        .collect();

    let mut summary = String::new();
    summary.push_str("Monte-Carlo validation of the amplifier statistics\n");
    summary.push_str(&format!("{}\n\n", cfg.echo()));
    for r in &rows {
        summary.push_str(&format!(
            "psi = {:>10}: lambda {:.9} vs {:.9} (se {:.3e}), distortion {:.6e} vs {:.6e} W (se {:.3e}), residual {:.3e} -> {}\n",
            r.psi,
            r.lambda_hat,
            r.lambda_closed,
            r.lambda_se,
            r.d_hat_w,
            r.d_closed_w,
            r.d_se_w,
            r.residual,
            if r.pass { "PASS" } else { "FAIL" },
        ));
    }
    let all = rows.iter().all(|r| r.pass);
    summary.push_str(&format!("overall: {}\n", if all { "PASS" } else { "FAIL" }));
    ExperimentOutput {
        rows: Vec::new(),
        cdfs: None,
        validation: Some(rows),
        summary,
        all_converged: true,
    }
}
