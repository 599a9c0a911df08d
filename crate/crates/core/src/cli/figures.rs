//! Datasets of the decay and temperature figures, on a scaled-time axis μt.

use crate::coefficients::{coefficients_dicke, coefficients_product_mixed, CollisionParams, MeqCoefficients};
use crate::dynamics::{dicke_temperature_approx, linear_grid, steady_temperature, temperature_trajectory, thermalization_time};
use crate::error::Result;
use crate::io::{columns_csv, fmt_f64};

pub const DEFAULT_POINTS: usize = 201;
pub const DECAY_MU_T_END: f64 = 0.5;
pub const TEMPERATURE_MU_T_END: f64 = 2.0;

pub const DECAY_FILE: &str = "decay_curves.csv";
pub const DECAY_TIMES_FILE: &str = "decay_times.csv";
pub const TEMPERATURE_FILE: &str = "temperature_curves.csv";
pub const ASYMPTOTE_FILE: &str = "temperature_asymptotes.csv";

/// A decay curve: (column name, bath kind, N, k, coefficients).
pub struct DecayCurve {
    pub name: &'static str,
    pub kind: &'static str,
    pub n: usize,
    pub k: usize,
    pub coeffs: MeqCoefficients,
}

/// Mixed baths with N = 4, 8, Dicke baths with k = N/4 for N = 4, 8 and the
/// Dicke bath N = 8, k = 3. The mixed curves do not depend on p_e.
pub fn decay_curves() -> Result<Vec<DecayCurve>> {
    let params = CollisionParams::default();
    Ok(vec![
        DecayCurve { name: "mixed_N4", kind: "mixed", n: 4, k: 0, coeffs: coefficients_product_mixed(4, 0.5, &params)? },
        DecayCurve { name: "mixed_N8", kind: "mixed", n: 8, k: 0, coeffs: coefficients_product_mixed(8, 0.5, &params)? },
        DecayCurve { name: "dicke_N4_k1", kind: "dicke", n: 4, k: 1, coeffs: coefficients_dicke(4, 1, &params)? },
        DecayCurve { name: "dicke_N8_k2", kind: "dicke", n: 8, k: 2, coeffs: coefficients_dicke(8, 2, &params)? },
        DecayCurve { name: "dicke_N8_k3", kind: "dicke", n: 8, k: 3, coeffs: coefficients_dicke(8, 3, &params)? },
    ])
}

/// Scaled thermalization time μ t_q.
pub fn scaled_t_q(c: &MeqCoefficients) -> f64 {
    c.mu * thermalization_time(c)
}

/// exp(−t/t_q) against μt.
pub fn decay_dataset(n_points: usize) -> Result<String> {
    let curves = decay_curves()?;
    let mu_t = linear_grid(DECAY_MU_T_END, n_points);
    let mut header = vec!["mu_t"];
    let mut columns = vec![mu_t.clone()];
    for c in &curves {
        header.push(c.name);
        let tq = scaled_t_q(&c.coeffs);
        columns.push(mu_t.iter().map(|x| (-x / tq).exp()).collect());
    }
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    Ok(columns_csv(&header, &refs))
}

pub fn decay_times_dataset() -> Result<String> {
    let mut out = String::from("curve,N,k,mu_t_q\n");
    for c in decay_curves()? {
        out.push_str(&format!("{},{},{},{}\n", c.name, c.n, c.k, fmt_f64(scaled_t_q(&c.coeffs))));
    }
    Ok(out)
}

pub const TEMPERATURE_SIZES: [usize; 3] = [4, 8, 12];

/// Dicke bath with k = N/2 − 1 and the product bath with the same steady temperature.
pub fn temperature_pair(n: usize) -> Result<(MeqCoefficients, MeqCoefficients)> {
    let params = CollisionParams::default();
    let dicke = coefficients_dicke(n, n / 2 - 1, &params)?;
    let p_e = dicke.r_e / (dicke.r_e + dicke.r_d);
    Ok((dicke, coefficients_product_mixed(n, p_e, &params)?))
}

/// Ground-state temperature trajectories against μt.
pub fn temperature_dataset(n_points: usize) -> Result<String> {
    let mu_t = linear_grid(TEMPERATURE_MU_T_END, n_points);
    let names = ["dicke_N4", "mixed_N4", "dicke_N8", "mixed_N8", "dicke_N12", "mixed_N12"];
    let mut header = vec!["mu_t"];
    header.extend(names);
    let mut columns = vec![mu_t.clone()];
    for n in TEMPERATURE_SIZES {
        let (dicke, mixed) = temperature_pair(n)?;
        for c in [dicke, mixed] {
            let t: Vec<f64> = mu_t.iter().map(|x| x / c.mu).collect();
            columns.push(temperature_trajectory(&c, &t)?);
        }
    }
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    Ok(columns_csv(&header, &refs))
}

pub fn asymptote_dataset() -> Result<String> {
    let mut out = String::from("N,k,T_exact,T_approx\n");
    for n in TEMPERATURE_SIZES {
        let (dicke, _) = temperature_pair(n)?;
        let k = n / 2 - 1;
        out.push_str(&format!(
            "{n},{k},{},{}\n",
            fmt_f64(steady_temperature(&dicke)),
            fmt_f64(dicke_temperature_approx(n, k))
        ));
    }
    Ok(out)
}

/// All figure files as (file name, contents).
pub fn all_datasets(n_points: usize) -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        (DECAY_FILE, decay_dataset(n_points)?),
        (DECAY_TIMES_FILE, decay_times_dataset()?),
        (TEMPERATURE_FILE, temperature_dataset(n_points)?),
        (ASYMPTOTE_FILE, asymptote_dataset()?),
    ])
}
