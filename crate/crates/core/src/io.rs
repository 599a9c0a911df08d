//! CSV emitters. Every float is written with 17 significant digits so that
//! files round-trip exactly and can be diffed byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::bath::write_explicit_csv;
use crate::dynamics::{LadderRun, SweepTable, Trajectory};
use crate::error::Result;

pub const TRAJECTORY_HEADER: &str = "t,mu_t,rho_ee,rho_gg,re_rho_eg,im_rho_eg,temperature,entropy";
pub const SWEEP_HEADER: &str = "N,k,r_e,r_d,t_q,T_q";

/// Formats a float as `d.ddddddddddddddddde±x`; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 + traj.len() * 200);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (i, s) in traj.states.iter().enumerate() {
        let eg = s.rho_eg();
        push_row(
            &mut out,
            &[
                fmt_f64(traj.absolute_time(i)),
                fmt_f64(traj.scaled_time(i)),
                fmt_f64(s.rho_ee()),
                fmt_f64(s.rho_gg()),
                fmt_f64(eg.re),
                fmt_f64(eg.im),
                fmt_f64(traj.temperature[i]),
                fmt_f64(traj.entropy[i]),
            ],
        );
    }
    out
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            r.k,
            fmt_f64(r.r_e),
            fmt_f64(r.r_d),
            fmt_f64(r.t_q),
            fmt_f64(r.temperature)
        );
    }
    out
}

/// Ladder populations over time: `t,P_0,…,P_N` with P_k the weight of k excitations.
pub fn ladder_csv(run: &LadderRun) -> String {
    let n = run.final_state.n;
    let mut out = String::from("t");
    for k in 0..=n {
        let _ = write!(out, ",P_{k}");
    }
    out.push('\n');
    for (t, state) in run.times.iter().zip(&run.history) {
        let mut cells = vec![fmt_f64(*t)];
        cells.extend(state.populations.iter().map(|p| fmt_f64(*p)));
        push_row(&mut out, &cells);
    }
    out
}

/// Product-basis matrix of a prepared bath, in the explicit bath file format.
pub fn product_matrix_csv(run: &LadderRun) -> String {
    write_explicit_csv(run.final_state.n, run.product.matrix())
}

/// Wide table with a leading column and one column per series.
pub fn columns_csv(header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        let cells: Vec<String> = columns.iter().map(|c| fmt_f64(c[i])).collect();
        push_row(&mut out, &cells);
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{QubitState, TimeAxis};

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let traj = Trajectory::from_states(vec![], TimeAxis::Absolute, 1.0, vec![]);
        assert_eq!(trajectory_csv(&traj), format!("{TRAJECTORY_HEADER}\n"));
    }

    #[test]
    fn trajectory_row_layout() {
        let traj = Trajectory::from_states(vec![0.5], TimeAxis::Absolute, 2.0, vec![QubitState::diagonal(0.25)]);
        let csv = trajectory_csv(&traj);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0);
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.25);
        assert!(!csv.contains('\r'));
    }
}
