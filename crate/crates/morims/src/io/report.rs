//! Plot-ready CSV for simulation and power-sweep results.
//!
//! Both writers emit the same seven columns,
//! `switch_id,freq_ghz,power_mw,s21_on_db,s21_off_db,r_onoff_db,phase_shift_deg`,
//! with rows ordered by switch id, then frequency, then power.

use std::collections::BTreeMap;

use crate::device::{PowerSweepRow, SwitchResult};

pub const SWEEP_HEADER: &str =
    "switch_id,freq_ghz,power_mw,s21_on_db,s21_off_db,r_onoff_db,phase_shift_deg";

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

/// Circuit simulation results at a single source power, one row per
/// (switch, frequency).
pub fn sim_results_csv(results: &BTreeMap<String, SwitchResult>, source_power_mw: f64) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (id, result) in results {
        for rec in &result.records {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                id,
                rec.freq_hz / 1e9,
                source_power_mw,
                db(rec.s21_on.norm()),
                db(rec.s21_off.norm()),
                rec.r_onoff_db,
                rec.phase_shift_deg
            ));
        }
    }
    out
}

/// Power sweep of one switch, one row per (frequency, power).
pub fn power_sweep_csv(switch_id: &str, rows: &[PowerSweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            switch_id,
            row.freq_hz / 1e9,
            row.power_mw,
            row.s21_on_db,
            row.s21_off_db,
            row.r_onoff_db,
            row.phase_shift_deg
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{power_sweep, simulate_circuit, SwitchModelSet};
    use crate::netlist::NetlistAst;
    use crate::optical::DeviceType;

    #[test]
    fn single_point_sim_yields_header_plus_one_row() {
        let ast = NetlistAst::parse("source s power_mw=1\nswitch t type=tapered in=s\n").unwrap();
        let results = simulate_circuit(&ast, &SwitchModelSet::default(), &[5e9], 1.0).unwrap();
        let text = sim_results_csv(&results, 1.0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines[1].split(',').count(), 7);
        assert!(lines[1].starts_with("t,5.000000,1.000000,"));
    }

    #[test]
    fn power_sweep_grid_has_rows_per_freq_and_power() {
        let sw = SwitchModelSet::default().standalone(DeviceType::Tapered);
        let powers: Vec<f64> = (0..=16).map(|i| i as f64 * 0.25).collect();
        let rows = power_sweep(&sw, &powers, &[5e9, 20e9, 40e9]).unwrap();
        let text = power_sweep_csv("sw", &rows);
        assert_eq!(text.lines().count(), 1 + 3 * 17);
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 7);
        }
    }

    #[test]
    fn rows_are_ordered_by_switch_then_frequency() {
        let ast = NetlistAst::parse(
            "source s power_mw=2\nybranch y in=s out=a,b\nswitch M2 type=tapered in=a\nswitch M1 type=tapered in=b\n",
        )
        .unwrap();
        let results =
            simulate_circuit(&ast, &SwitchModelSet::default(), &[1e9, 2e9], 2.0).unwrap();
        let text = sim_results_csv(&results, 2.0);
        let ids: Vec<&str> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(ids, ["M1", "M1", "M2", "M2"]);
    }
}
