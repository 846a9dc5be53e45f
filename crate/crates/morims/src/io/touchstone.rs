//! Two-port Touchstone (.s2p) writer and a matching reader.
//!
//! Output uses the standard option line `# GHz S RI R <z0>` and data rows
//! `f S11 S21 S12 S22` in real/imaginary pairs, nine decimal places per
//! value. The formatting is fixed so identical inputs produce identical
//! bytes.

use num_complex::Complex64;

use crate::rf::SParameters;

use super::FormatError;

/// Renders a frequency-ascending sequence of S-parameter points as a 2-port
/// Touchstone file.
pub fn write_touchstone(results: &[SParameters], z0: f64) -> Result<String, FormatError> {
    if results.is_empty() {
        return Err(FormatError::EmptyResults);
    }
    if results.windows(2).any(|w| w[1].freq_hz <= w[0].freq_hz) {
        return Err(FormatError::UnsortedFrequencies);
    }
    let mut out = String::new();
    out.push_str(&format!("# GHz S RI R {z0}\n"));
    out.push_str("! freq_ghz s11_re s11_im s21_re s21_im s12_re s12_im s22_re s22_im\n");
    for s in results {
        let f_ghz = s.freq_hz / 1e9;
        out.push_str(&format!(
            "{:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9}\n",
            f_ghz,
            s.s11.re,
            s.s11.im,
            s.s21.re,
            s.s21.im,
            s.s12.re,
            s.s12.im,
            s.s22.re,
            s.s22.im
        ));
    }
    Ok(out)
}

/// Reads a 2-port Touchstone file in `GHz S RI` format.
pub fn parse_touchstone(text: &str, path: &str) -> Result<Vec<SParameters>, FormatError> {
    let mut z0 = 50.0;
    let mut freq_scale = 1e9;
    let mut saw_options = false;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('!') {
            continue;
        }
        if let Some(rest) = content.strip_prefix('#') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            // e.g. ["GHz", "S", "RI", "R", "50"]
            if fields.len() < 3 {
                return Err(FormatError::at(path, line, "incomplete option line"));
            }
            freq_scale = match fields[0].to_ascii_uppercase().as_str() {
                "HZ" => 1.0,
                "KHZ" => 1e3,
                "MHZ" => 1e6,
                "GHZ" => 1e9,
                u => return Err(FormatError::at(path, line, format!("unknown unit `{u}`"))),
            };
            if !fields[1].eq_ignore_ascii_case("S") || !fields[2].eq_ignore_ascii_case("RI") {
                return Err(FormatError::at(path, line, "only `S ... RI` data is supported"));
            }
            if let Some(i) = fields.iter().position(|f| f.eq_ignore_ascii_case("R")) {
                if let Some(v) = fields.get(i + 1) {
                    z0 = v.parse().map_err(|_| {
                        FormatError::at(path, line, format!("malformed reference `{v}`"))
                    })?;
                }
            }
            saw_options = true;
            continue;
        }
        if !saw_options {
            return Err(FormatError::at(path, line, "data before the `#` option line"));
        }
        let nums: Result<Vec<f64>, _> = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| FormatError::at(path, line, format!("malformed value `{t}`")))
            })
            .collect();
        let nums = nums?;
        if nums.len() != 9 {
            return Err(FormatError::at(
                path,
                line,
                format!("expected 9 columns for a 2-port row, got {}", nums.len()),
            ));
        }
        out.push(SParameters {
            freq_hz: nums[0] * freq_scale,
            s11: Complex64::new(nums[1], nums[2]),
            s21: Complex64::new(nums[3], nums[4]),
            s12: Complex64::new(nums[5], nums[6]),
            s22: Complex64::new(nums[7], nums[8]),
            z0,
        });
    }
    Ok(out)
}
