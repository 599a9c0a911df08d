use rayon::prelude::*;

use crate::coefficients::{coefficients_dicke, coefficients_product_mixed, coefficients_thermal_hec, CollisionParams};
use crate::error::{Error, Result};

use super::analytic::{steady_temperature, thermalization_time};

/// How the excitation number of a Dicke bath is chosen from N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    /// floor(N/4)
    Quarter,
    /// ⌈N/2⌉ − 1, i.e. N/2 − 1 for even N
    HalfMinusOne,
}

pub fn k_for_rule(n: usize, rule: KRule) -> usize {
    match rule {
        KRule::Quarter => n / 4,
        KRule::HalfMinusOne => n.div_ceil(2).saturating_sub(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepFamily {
    ProductMixed { p_e: f64 },
    ThermalHec { n_bar: f64 },
    Dicke(KRule),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    /// Excitation number; zero for the non-Dicke families.
    pub k: usize,
    pub r_e: f64,
    pub r_d: f64,
    pub t_q: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of ln t_q against ln N.
    pub slope_t_q: Option<f64>,
    /// Least-squares slope of ln T_q against ln N.
    pub slope_temperature: Option<f64>,
}

/// Least-squares slope of ln y against ln x. `None` if fewer than two points
/// or any value is not finite and positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Closed-form rates, thermalization times and temperatures across cluster
/// sizes, with log-log fits of both against N. Rows are computed in parallel
/// and returned in input order.
pub fn scaling_sweep(family: SweepFamily, n_list: &[usize], params: &CollisionParams) -> Result<SweepTable> {
    if n_list.contains(&0) {
        return Err(Error::range("N", "cluster sizes must be positive"));
    }
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let (k, c) = match family {
                SweepFamily::ProductMixed { p_e } => (0, coefficients_product_mixed(n, p_e, params)?),
                SweepFamily::ThermalHec { n_bar } => (0, coefficients_thermal_hec(n, n_bar, params)?),
                SweepFamily::Dicke(rule) => {
                    let k = k_for_rule(n, rule);
                    (k, coefficients_dicke(n, k, params)?)
                }
            };
            Ok(SweepRow { n, k, r_e: c.r_e, r_d: c.r_d, t_q: thermalization_time(&c), temperature: steady_temperature(&c) })
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let tq: Vec<f64> = rows.iter().map(|r| r.t_q).collect();
    let temps: Vec<f64> = rows.iter().map(|r| r.temperature).collect();
    Ok(SweepTable { slope_t_q: loglog_slope(&ns, &tq), slope_temperature: loglog_slope(&ns, &temps), rows })
}
