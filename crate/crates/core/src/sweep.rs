//! Parameter sweeps over `ρ_x`.

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{
    ccnr_criterion, closed_form_ccnr_rho_x, covariance_realignment_criterion, map_criterion,
    ppt_criterion,
};
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::states::{rho_x, rho_x_permutation};

pub const CSV_HEADER: &str = "x,ccnr_norm,ccnr_closed_form,ppt_min_eig,map_min_eig,cov_slack";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub ccnr_norm: f64,
    /// NaN outside `[0, 2]`.
    pub ccnr_closed_form: f64,
    pub ppt_min_eig: f64,
    pub map_min_eig: f64,
    pub cov_slack: f64,
}

pub fn sweep_row(x: f64, t: f64) -> Result<SweepRow> {
    let rho = rho_x(x)?;
    Ok(SweepRow {
        x,
        ccnr_norm: ccnr_criterion(&rho),
        ccnr_closed_form: closed_form_ccnr_rho_x(x).unwrap_or(f64::NAN),
        ppt_min_eig: ppt_criterion(&rho)?,
        map_min_eig: map_criterion(4, t, &rho_x_permutation(), &rho)?,
        cov_slack: covariance_realignment_criterion(&rho)?,
    })
}

/// `steps` equally spaced points from `x_min` to `x_max`, both included.
pub fn grid(x_min: f64, x_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(x_min.is_finite() && x_max.is_finite()) || x_min > x_max {
        return Err(Error::InvalidArgument(format!(
            "need finite x-min <= x-max, got {x_min} and {x_max}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                x_max
            } else {
                x_min + (x_max - x_min) * (i as f64 / last)
            }
        })
        .collect())
}

/// Rows in grid order; points are evaluated in parallel.
pub fn sweep(x_min: f64, x_max: f64, steps: usize, t: f64) -> Result<Vec<SweepRow>> {
    grid(x_min, x_max, steps)?
        .into_par_iter()
        .map(|x| sweep_row(x, t))
        .collect()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.x,
            r.ccnr_norm,
            r.ccnr_closed_form,
            r.ppt_min_eig,
            r.map_min_eig,
            r.cov_slack,
        ];
        let line: Vec<String> = fields.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
