//! Calibration dataset CSV:
//! `freq_ghz,power_mw,device_type,observable,value,weight`.

use crate::calibration::{CalPoint, CalibrationDataset, Observable};
use crate::optical::DeviceType;

use super::FormatError;

pub const DATASET_HEADER: &str = "freq_ghz,power_mw,device_type,observable,value,weight";

pub fn write_dataset_csv(data: &CalibrationDataset) -> String {
    let mut out = String::from(DATASET_HEADER);
    out.push('\n');
    for p in &data.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.freq_ghz,
            p.power_mw,
            p.device_type,
            p.observable.name(),
            p.value,
            p.weight
        ));
    }
    out
}

pub fn parse_dataset_csv(text: &str, path: &str) -> Result<CalibrationDataset, FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| FormatError::at(path, 1, "empty dataset file"))?;
    if header.trim() != DATASET_HEADER {
        return Err(FormatError::at(
            path,
            1,
            format!("expected header `{DATASET_HEADER}`"),
        ));
    }
    let mut points = Vec::new();
    for (lineno, raw) in lines {
        let line = lineno + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(FormatError::at(
                path,
                line,
                format!("expected 6 fields, got {}", fields.len()),
            ));
        }
        let num = |s: &str, what: &str| -> Result<f64, FormatError> {
            s.parse::<f64>()
                .map_err(|_| FormatError::at(path, line, format!("malformed {what} `{s}`")))
        };
        let device_type = match fields[2] {
            "tapered" => DeviceType::Tapered,
            "through" => DeviceType::Through,
            other => {
                return Err(FormatError::at(
                    path,
                    line,
                    format!("unknown device_type `{other}`"),
                ))
            }
        };
        let observable = Observable::from_name(fields[3]).ok_or_else(|| {
            FormatError::at(path, line, format!("unknown observable `{}`", fields[3]))
        })?;
        let weight = if fields[5].is_empty() {
            1.0
        } else {
            num(fields[5], "weight")?
        };
        points.push(CalPoint {
            freq_ghz: num(fields[0], "freq_ghz")?,
            power_mw: num(fields[1], "power_mw")?,
            device_type,
            observable,
            value: num(fields[4], "value")?,
            weight,
        });
    }
    Ok(CalibrationDataset { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::builtin_paper_dataset;

    #[test]
    fn builtin_dataset_round_trips_through_csv() {
        let data = builtin_paper_dataset();
        let text = write_dataset_csv(&data);
        let back = parse_dataset_csv(&text, "mem").unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn missing_weight_defaults_to_one() {
        let text = format!("{DATASET_HEADER}\n5,2,tapered,r_onoff_db,25,\n");
        let data = parse_dataset_csv(&text, "mem").unwrap();
        assert_eq!(data.points[0].weight, 1.0);
    }

    #[test]
    fn bad_rows_are_rejected_with_line_numbers() {
        let text = format!("{DATASET_HEADER}\n5,2,sideways,r_onoff_db,25,1\n");
        let err = parse_dataset_csv(&text, "d.csv").unwrap_err();
        assert_eq!(
            err.to_string(),
            "d.csv:2: unknown device_type `sideways`"
        );
        let text = format!("{DATASET_HEADER}\n5,2,tapered,r_onoff,25,1\n");
        assert!(parse_dataset_csv(&text, "d.csv")
            .unwrap_err()
            .to_string()
            .contains("unknown observable"));
        let err = parse_dataset_csv("nope\n", "d.csv").unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }
}
