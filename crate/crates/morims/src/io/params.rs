//! Line-oriented `key = value` parameter files.
//!
//! Keys are the [`ParameterVector`] field names; keys absent from a file
//! keep their defaults, so a partial file is a valid override set. Values
//! print in shortest round-trip form, so writing and re-reading a vector is
//! lossless.

use crate::calibration::{ParameterVector, PARAM_NAMES};

use super::FormatError;

const UNITS: [&str; 8] = [
    "collection efficiency, unitless",
    "collection efficiency, unitless",
    "carrier lifetime, s",
    "saturation power scale, mW",
    "gap capacitance, F",
    "contact resistance, ohm",
    "feed loss coefficient, dB per sqrt(GHz)",
    "dark resistivity, ohm*m",
];

/// Renders a parameter file with one `key = value` line per parameter and
/// the unit in a trailing comment.
pub fn write_parameter_file(params: &ParameterVector) -> String {
    let mut out = String::from("# switch model parameters\n");
    for ((name, value), unit) in PARAM_NAMES.iter().zip(params.as_array()).zip(UNITS) {
        out.push_str(&format!("{name} = {value:e}  # {unit}\n"));
    }
    out
}

/// Parses a parameter file, starting from `base` and overriding every key
/// present in the text.
pub fn parse_parameter_file(
    text: &str,
    base: &ParameterVector,
    path: &str,
) -> Result<ParameterVector, FormatError> {
    let mut values = base.as_array();
    let mut seen = [false; PARAM_NAMES.len()];
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| FormatError::at(path, line, "expected `key = value`"))?;
        let key = key.trim();
        let idx = PARAM_NAMES
            .iter()
            .position(|n| *n == key)
            .ok_or_else(|| FormatError::at(path, line, format!("unknown parameter `{key}`")))?;
        if seen[idx] {
            return Err(FormatError::at(
                path,
                line,
                format!("parameter `{key}` set more than once"),
            ));
        }
        seen[idx] = true;
        values[idx] = value.trim().parse::<f64>().map_err(|_| {
            FormatError::at(path, line, format!("malformed number `{}`", value.trim()))
        })?;
    }
    Ok(ParameterVector::from_array(values))
}
