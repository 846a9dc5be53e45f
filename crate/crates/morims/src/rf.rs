//! Two-port microwave network algebra.
//!
//! Networks are represented by their ABCD (transmission) matrices so that
//! cascaded elements compose by matrix multiplication, and converted to
//! scattering parameters at a real reference impedance for reporting.
//! A series impedance `Z` in a matched `Z0` environment satisfies the
//! closed form `S21 = 2*Z0 / (2*Z0 + Z)`, which the tests here use as an
//! independent oracle for the cascade/convert path.

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the RF layer.
pub type Complex = Complex64;

/// Default reference impedance, ohms.
pub const DEFAULT_Z0: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum RfError {
    #[error("cannot cascade two-ports at different frequencies ({0} Hz vs {1} Hz)")]
    FrequencyMismatch(f64, f64),
    #[error("ABCD to S conversion is singular (A + B/Z0 + C*Z0 + D = 0)")]
    SingularConversion,
    #[error("S to ABCD conversion requires S21 != 0")]
    ZeroTransmission,
    #[error("reference impedance must be positive, got {0}")]
    InvalidReference(f64),
    #[error("frequency grid is empty")]
    EmptyGrid,
    #[error("frequency grid must be strictly increasing and positive")]
    BadGrid,
}

/// 2x2 transmission (ABCD) matrix of a two-port at a single frequency.
///
/// `a` and `d` are unitless, `b` is in ohms, `c` in siemens. Reciprocal
/// networks satisfy `a*d - b*c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortAbcd {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub freq_hz: f64,
}

impl TwoPortAbcd {
    /// Through connection: [[1, 0], [0, 1]].
    pub fn identity(freq_hz: f64) -> Self {
        Self {
            a: Complex::new(1.0, 0.0),
            b: Complex::new(0.0, 0.0),
            c: Complex::new(0.0, 0.0),
            d: Complex::new(1.0, 0.0),
            freq_hz,
        }
    }

    /// Series impedance `z` between the ports: [[1, z], [0, 1]].
    pub fn series(z: Complex, freq_hz: f64) -> Self {
        Self {
            a: Complex::new(1.0, 0.0),
            b: z,
            c: Complex::new(0.0, 0.0),
            d: Complex::new(1.0, 0.0),
            freq_hz,
        }
    }

    /// Matched attenuator with `loss_db >= 0` of transmission loss in a
    /// `z0` system. Reflectionless (S11 = S22 = 0) and reciprocal; used for
    /// feed-line loss sections.
    pub fn matched_attenuator(loss_db: f64, z0: f64, freq_hz: f64) -> Self {
        // gamma = ln(10^(dB/20)); cosh/sinh form keeps det = 1 exactly.
        let gamma = loss_db * std::f64::consts::LN_10 / 20.0;
        let (ch, sh) = (gamma.cosh(), gamma.sinh());
        Self {
            a: Complex::new(ch, 0.0),
            b: Complex::new(z0 * sh, 0.0),
            c: Complex::new(sh / z0, 0.0),
            d: Complex::new(ch, 0.0),
            freq_hz,
        }
    }

    /// `a*d - b*c`; equals 1 for reciprocal networks.
    pub fn determinant(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self * rhs` (self on the source side).
    pub fn cascade(&self, rhs: &TwoPortAbcd) -> Result<TwoPortAbcd, RfError> {
        if self.freq_hz != rhs.freq_hz {
            return Err(RfError::FrequencyMismatch(self.freq_hz, rhs.freq_hz));
        }
        Ok(TwoPortAbcd {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
            freq_hz: self.freq_hz,
        })
    }

    /// Standard ABCD -> S conversion with equal source/load reference `z0`.
    pub fn to_s(&self, z0: f64) -> Result<SParameters, RfError> {
        if z0 <= 0.0 {
            return Err(RfError::InvalidReference(z0));
        }
        let z0c = Complex::new(z0, 0.0);
        let den = self.a + self.b / z0c + self.c * z0c + self.d;
        if den.norm() == 0.0 {
            return Err(RfError::SingularConversion);
        }
        let det = self.determinant();
        Ok(SParameters {
            s11: (self.a + self.b / z0c - self.c * z0c - self.d) / den,
            s12: Complex::new(2.0, 0.0) * det / den,
            s21: Complex::new(2.0, 0.0) / den,
            s22: (-self.a + self.b / z0c - self.c * z0c + self.d) / den,
            freq_hz: self.freq_hz,
            z0,
        })
    }
}

/// Scattering parameters of a two-port at one frequency, reference `z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParameters {
    pub s11: Complex,
    pub s12: Complex,
    pub s21: Complex,
    pub s22: Complex,
    pub freq_hz: f64,
    pub z0: f64,
}

impl SParameters {
    /// |S21| in dB.
    pub fn s21_db(&self) -> f64 {
        20.0 * self.s21.norm().log10()
    }

    /// Inverse of [`TwoPortAbcd::to_s`]; requires `s21 != 0`.
    pub fn to_abcd(&self) -> Result<TwoPortAbcd, RfError> {
        if self.s21.norm() == 0.0 {
            return Err(RfError::ZeroTransmission);
        }
        let one = Complex::new(1.0, 0.0);
        let z0 = Complex::new(self.z0, 0.0);
        let den = Complex::new(2.0, 0.0) * self.s21;
        Ok(TwoPortAbcd {
            a: ((one + self.s11) * (one - self.s22) + self.s12 * self.s21) / den,
            b: z0 * ((one + self.s11) * (one + self.s22) - self.s12 * self.s21) / den,
            c: ((one - self.s11) * (one - self.s22) - self.s12 * self.s21) / (den * z0),
            d: ((one - self.s11) * (one + self.s22) + self.s12 * self.s21) / den,
            freq_hz: self.freq_hz,
        })
    }
}

/// A circuit element whose ABCD matrix depends on frequency.
pub trait AbcdElement {
    fn abcd(&self, freq_hz: f64) -> TwoPortAbcd;
}

impl<F> AbcdElement for F
where
    F: Fn(f64) -> TwoPortAbcd,
{
    fn abcd(&self, freq_hz: f64) -> TwoPortAbcd {
        self(freq_hz)
    }
}

/// Cascades `elements` at each grid frequency and converts to S-parameters.
///
/// Frequencies must be positive and strictly increasing. Each grid point is
/// evaluated independently.
pub fn sweep<E: AbcdElement + ?Sized>(
    elements: &[&E],
    freqs_hz: &[f64],
    z0: f64,
) -> Result<Vec<SParameters>, RfError> {
    if freqs_hz.is_empty() {
        return Err(RfError::EmptyGrid);
    }
    if freqs_hz[0] <= 0.0 || freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RfError::BadGrid);
    }
    freqs_hz
        .iter()
        .map(|&f| {
            let mut acc = TwoPortAbcd::identity(f);
            for e in elements {
                acc = acc.cascade(&e.abcd(f))?;
            }
            acc.to_s(z0)
        })
        .collect()
}
