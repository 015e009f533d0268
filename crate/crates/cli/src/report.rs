//! Deterministic CSV and summary emission.
//!
//! Formatting is pinned so reruns with identical configs are byte-identical:
//! dB values with 6 decimal places, powers in watts with 9 significant
//! digits, rates and objective values with 13 significant digits. Each CSV
//! starts with a schema tag line.

use std::fs;
use std::io;
use std::path::Path;

use crate::experiment::{DropsCdfs, ExperimentOutput, ResultRow, ValidationRow};

pub const RESULTS_SCHEMA: &str = "# schema: deepdeal-results-v1";
pub const CDF_SCHEMA: &str = "# schema: deepdeal-cdf-v1";
pub const VALIDATION_SCHEMA: &str = "# schema: deepdeal-validation-v1";

fn fmt_db(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_watts(v: f64) -> String {
    format!("{v:.8e}")
}

fn fmt_wide(v: f64) -> String {
    format!("{v:.12e}")
}

fn fmt_share(v: f64) -> String {
    format!("{v:.9}")
}

fn join<T, F: Fn(&T) -> String>(values: &[T], f: F) -> String {
    values.iter().map(f).collect::<Vec<_>>().join(";")
}

/// `results.csv` contents.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(RESULTS_SCHEMA);
    out.push('\n');
    out.push_str(
        "scenario_id,algorithm,pa_class,beta_db,p_w,ibo_db,m,omega,\
         rates_bps,sum_rate_bps,p_tot_w,ee_bit_per_joule,iterations,converged\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario_id,
            r.algorithm,
            r.pa_class,
            join(&r.beta_db, |v| fmt_db(*v)),
            fmt_watts(r.p_w),
            fmt_db(r.ibo_db),
            r.m,
            join(&r.shares, |v| fmt_share(*v)),
            join(&r.rates_bps, |v| fmt_wide(*v)),
            fmt_wide(r.sum_rate_bps),
            fmt_watts(r.p_tot_w),
            fmt_wide(r.ee_bit_per_joule),
            r.iterations,
            r.converged,
        ));
    }
    out
}

fn cdf_csv<T, F: Fn(&T) -> String>(values: &[T], fmt: F) -> String {
    let mut out = String::new();
    out.push_str(CDF_SCHEMA);
    out.push('\n');
    out.push_str("value,cum_prob\n");
    let n = values.len() as f64;
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{:.6}\n", fmt(v), (i + 1) as f64 / n));
    }
    out
}

/// `validation.csv` contents.
pub fn validation_csv(rows: &[ValidationRow]) -> String {
    let mut out = String::new();
    out.push_str(VALIDATION_SCHEMA);
    out.push('\n');
    out.push_str(
        "psi,lambda_closed,lambda_hat,lambda_se,d_closed_w,d_hat_w,d_se_w,residual,pass\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_wide(r.psi),
            fmt_wide(r.lambda_closed),
            fmt_wide(r.lambda_hat),
            fmt_wide(r.lambda_se),
            fmt_watts(r.d_closed_w),
            fmt_watts(r.d_hat_w),
            fmt_watts(r.d_se_w),
            fmt_wide(r.residual),
            r.pass,
        ));
    }
    out
}

/// Write every artifact of a run into `dir`.
pub fn write_outputs(dir: &Path, output: &ExperimentOutput) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    if !output.rows.is_empty() {
        fs::write(dir.join("results.csv"), results_csv(&output.rows))?;
    }
    if let Some(DropsCdfs { ee, ibo_db, m }) = &output.cdfs {
        fs::write(dir.join("cdf_ee.csv"), cdf_csv(ee, |v| fmt_wide(*v)))?;
        fs::write(dir.join("cdf_ibo.csv"), cdf_csv(ibo_db, |v| fmt_db(*v)))?;
        fs::write(dir.join("cdf_m.csv"), cdf_csv(m, |v| v.to_string()))?;
    }
    if let Some(rows) = &output.validation {
        fs::write(dir.join("validation.csv"), validation_csv(rows))?;
    }
    fs::write(dir.join("summary.txt"), &output.summary)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            scenario_id: "sweep[80]".into(),
            algorithm: "DEEP-DEAL",
            pa_class: "classb",
            beta_db: vec![80.0, 80.0],
            p_w: 26.25,
            ibo_db: 13.88,
            m: 4,
            shares: vec![0.5, 0.5],
            rates_bps: vec![2.08e8, 2.08e8],
            sum_rate_bps: 4.16e8,
            p_tot_w: 586.0,
            ee_bit_per_joule: 7.1e5,
            iterations: 7,
            converged: true,
        }
    }

    #[test]
    fn results_csv_has_schema_and_header() {
        let text = results_csv(&[sample_row()]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RESULTS_SCHEMA);
        assert!(lines.next().unwrap().starts_with("scenario_id,algorithm"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("sweep[80],DEEP-DEAL,classb,80.000000;80.000000,"));
        assert!(row.ends_with(",7,true"));
    }

    #[test]
    fn watt_fields_carry_nine_significant_digits() {
        assert_eq!(fmt_watts(1286.0858529329), "1.28608585e3");
        assert_eq!(fmt_db(6.0), "6.000000");
    }

    #[test]
    fn cdf_probabilities_end_at_one() {
        let text = cdf_csv(&[1.0, 2.0, 4.0, 8.0], |v| fmt_wide(*v));
        let last = text.lines().last().unwrap();
        assert!(last.ends_with(",1.000000"), "{last}");
    }
}
