//! Photoconductive patch model.
//!
//! Maps optical power absorbed in a silicon patch to a complex impedance
//! across the signal-electrode gap. Absorbed photons generate electron-hole
//! pairs; the steady-state excess carrier density follows from
//! generation-recombination balance and sets a photoconductance in parallel
//! with the dark conductance and the gap capacitance. A series contact
//! resistance completes the gap impedance:
//!
//! ```text
//! Z(p, f) = r_contact + 1 / (G_ph(p) + G_dark + j*2*pi*f*c_gap)
//! ```
//!
//! Optical saturation is modeled by a smooth saturable map on absorbed power
//! with scale `p_sat`; switching transients follow the carrier lifetime.

use num_complex::Complex64;
use thiserror::Error;

/// Planck constant, J*s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Elementary charge, C (also 1 eV in joules).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Silicon bandgap at room temperature, eV.
pub const SILICON_BANDGAP_EV: f64 = 1.12;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("photon energy {photon_ev:.4} eV at {wavelength_m:e} m does not exceed the silicon bandgap ({SILICON_BANDGAP_EV} eV)")]
    PhotonBelowBandgap { wavelength_m: f64, photon_ev: f64 },
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("collection efficiency eta must lie in (0, 1], got {0}")]
    EtaOutOfRange(f64),
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NotPositive { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Negative { name, value })
    }
}

/// Patch and electrode-gap geometry, meters.
///
/// `length` is the gap dimension along the RF signal path; conduction crosses
/// it through the `width * thickness` face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    pub length_m: f64,
    pub width_m: f64,
    pub thickness_m: f64,
}

impl Default for PatchGeometry {
    fn default() -> Self {
        Self {
            length_m: 12e-6,
            width_m: 16e-6,
            thickness_m: 250e-9,
        }
    }
}

impl PatchGeometry {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("length_m", self.length_m)?;
        positive("width_m", self.width_m)?;
        positive("thickness_m", self.thickness_m)
    }

    /// Patch volume, m^3.
    pub fn volume_m3(&self) -> f64 {
        self.length_m * self.width_m * self.thickness_m
    }

    /// Conduction geometry factor `width * thickness / length`, meters.
    /// Multiplying a conductivity (S/m) by this yields a conductance.
    pub fn conduction_factor_m(&self) -> f64 {
        self.width_m * self.thickness_m / self.length_m
    }
}

/// Optical and transport parameters of the silicon patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Control-light wavelength, m.
    pub wavelength_m: f64,
    /// Electron mobility, m^2/(V*s).
    pub mu_n: f64,
    /// Hole mobility, m^2/(V*s).
    pub mu_p: f64,
    /// Carrier lifetime, s (fit parameter).
    pub tau_s: f64,
    /// Internal quantum/collection efficiency in (0, 1] (fit parameter).
    pub eta: f64,
    /// Dark resistivity, ohm*m (fit parameter).
    pub dark_resistivity_ohm_m: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            wavelength_m: 808e-9,
            mu_n: 0.135,
            mu_p: 0.048,
            tau_s: 1e-6,
            eta: 0.01,
            dark_resistivity_ohm_m: 2.3e3,
        }
    }
}

impl MaterialParams {
    /// Validated constructor; see [`MaterialParams::validate`].
    pub fn new(
        wavelength_m: f64,
        mu_n: f64,
        mu_p: f64,
        tau_s: f64,
        eta: f64,
        dark_resistivity_ohm_m: f64,
    ) -> Result<Self, ModelError> {
        let m = Self {
            wavelength_m,
            mu_n,
            mu_p,
            tau_s,
            eta,
            dark_resistivity_ohm_m,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks positivity of all fields and that the photon energy exceeds
    /// the silicon bandgap (otherwise no electron-hole pairs are generated).
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("wavelength_m", self.wavelength_m)?;
        positive("mu_n", self.mu_n)?;
        positive("mu_p", self.mu_p)?;
        positive("tau_s", self.tau_s)?;
        positive("dark_resistivity_ohm_m", self.dark_resistivity_ohm_m)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(ModelError::EtaOutOfRange(self.eta));
        }
        let ev = photon_energy(self.wavelength_m) / ELEMENTARY_CHARGE;
        if ev <= SILICON_BANDGAP_EV {
            return Err(ModelError::PhotonBelowBandgap {
                wavelength_m: self.wavelength_m,
                photon_ev: ev,
            });
        }
        Ok(())
    }
}

/// Parasitic elements of the electrode gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParasiticParams {
    /// Gap capacitance, F (fit parameter).
    pub c_gap_f: f64,
    /// Series contact/access resistance, ohm (fit parameter).
    pub r_contact_ohm: f64,
    /// Saturation power scale, mW (fit parameter).
    pub p_sat_mw: f64,
}

impl Default for ParasiticParams {
    fn default() -> Self {
        Self {
            c_gap_f: 2e-15,
            r_contact_ohm: 50.0,
            p_sat_mw: 1.5,
        }
    }
}

impl ParasiticParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        non_negative("c_gap_f", self.c_gap_f)?;
        non_negative("r_contact_ohm", self.r_contact_ohm)?;
        positive("p_sat_mw", self.p_sat_mw)
    }
}

/// Photon energy `h*c/lambda`, joules.
pub fn photon_energy(wavelength_m: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength_m
}

/// Saturable map from absorbed power to the power that effectively generates
/// carriers: `p_sat * (1 - exp(-p_abs/p_sat))`. Linear with unit slope for
/// small `p_abs`, asymptotically `p_sat`.
pub fn effective_absorbed_power(p_abs_mw: f64, p_sat_mw: f64) -> f64 {
    p_sat_mw * (1.0 - (-p_abs_mw / p_sat_mw).exp())
}

/// Steady-state excess carrier density, 1/m^3.
///
/// Generation rate `eta * P/E_photon` balanced against recombination at
/// lifetime `tau`, spread over the patch volume.
pub fn carrier_density(p_eff_mw: f64, m: &MaterialParams, g: &PatchGeometry) -> f64 {
    let generation_per_s = m.eta * (p_eff_mw * 1e-3) / photon_energy(m.wavelength_m);
    generation_per_s * m.tau_s / g.volume_m3()
}

/// Photoconductance of the gap at the given absorbed power, siemens.
/// Excludes the dark conductance.
pub fn photoconductance(
    p_abs_mw: f64,
    m: &MaterialParams,
    g: &PatchGeometry,
    par: &ParasiticParams,
) -> f64 {
    let p_eff = effective_absorbed_power(p_abs_mw, par.p_sat_mw);
    let dn = carrier_density(p_eff, m, g);
    ELEMENTARY_CHARGE * (m.mu_n + m.mu_p) * dn * g.conduction_factor_m()
}

/// Dark conductance of the gap, siemens.
pub fn dark_conductance(m: &MaterialParams, g: &PatchGeometry) -> f64 {
    g.conduction_factor_m() / m.dark_resistivity_ohm_m
}

/// Complex gap impedance at absorbed power `p_abs_mw` and frequency
/// `freq_hz`:
/// `Z = r_contact + 1/(G_ph + G_dark + j*w*c_gap)`.
///
/// Always finite since `G_dark > 0`.
pub fn patch_impedance(
    p_abs_mw: f64,
    m: &MaterialParams,
    g: &PatchGeometry,
    par: &ParasiticParams,
    freq_hz: f64,
) -> Complex64 {
    let g_total = photoconductance(p_abs_mw, m, g, par) + dark_conductance(m, g);
    let omega = 2.0 * std::f64::consts::PI * freq_hz;
    let y = Complex64::new(g_total, omega * par.c_gap_f);
    Complex64::new(par.r_contact_ohm, 0.0) + y.inv()
}

/// First-order switching transient of the photoconductance after a step in
/// absorbed optical power.
#[derive(Debug, Clone, Copy)]
pub struct TransientResponse {
    /// Steady-state photoconductance reached after turn-on, S.
    pub g_steady_s: f64,
    /// Carrier lifetime, s.
    pub tau_s: f64,
}

impl TransientResponse {
    pub fn new(
        p_abs_step_mw: f64,
        m: &MaterialParams,
        g: &PatchGeometry,
        par: &ParasiticParams,
    ) -> Self {
        Self {
            g_steady_s: photoconductance(p_abs_step_mw, m, g, par),
            tau_s: m.tau_s,
        }
    }

    /// Photoconductance at time `t >= 0` after turn-on: `G_ss*(1 - e^(-t/tau))`.
    pub fn after_turn_on(&self, t_s: f64) -> f64 {
        self.g_steady_s * (1.0 - (-t_s / self.tau_s).exp())
    }

    /// Photoconductance at time `t >= 0` after turn-off: `G_ss*e^(-t/tau)`.
    pub fn after_turn_off(&self, t_s: f64) -> f64 {
        self.g_steady_s * (-t_s / self.tau_s).exp()
    }

    /// 10-90% rise time, `tau * ln 9`.
    pub fn rise_time_10_90_s(&self) -> f64 {
        self.tau_s * 9f64.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn photon_energy_at_808_nm() {
        // h*c/lambda = 1.98644586e-25 / 808e-9 = 2.45847e-19 J = 1.53446 eV
        let e = photon_energy(808e-9);
        assert_relative_eq!(e, 2.4585e-19, max_relative = 1e-3);
        assert_relative_eq!(e / ELEMENTARY_CHARGE, 1.5345, max_relative = 1e-3);
    }

    #[test]
    fn photon_energy_at_bandgap_edge() {
        let ev = photon_energy(1107e-9) / ELEMENTARY_CHARGE;
        assert_relative_eq!(ev, 1.12, max_relative = 5e-3);
    }

    #[test]
    fn photon_energy_halves_when_wavelength_doubles() {
        let e1 = photon_energy(808e-9);
        let e2 = photon_energy(2.0 * 808e-9);
        assert_relative_eq!(e1, 2.0 * e2, epsilon = 1e-30);
    }

    #[test]
    fn material_rejects_sub_bandgap_wavelength() {
        let m = MaterialParams {
            wavelength_m: 1200e-9,
            ..MaterialParams::default()
        };
        assert!(matches!(
            m.validate(),
            Err(ModelError::PhotonBelowBandgap { .. })
        ));
        assert!(MaterialParams::default().validate().is_ok());
    }

    #[test]
    fn material_rejects_bad_eta() {
        for eta in [0.0, -0.1, 1.5] {
            let m = MaterialParams {
                eta,
                ..MaterialParams::default()
            };
            assert_eq!(m.validate(), Err(ModelError::EtaOutOfRange(eta)));
        }
    }

    #[test]
    fn saturable_map_zero_and_small_signal() {
        assert_eq!(effective_absorbed_power(0.0, 1.5), 0.0);
        // series expansion: 1.5*(1 - exp(-0.01/1.5)) = 0.0099667
        let p = effective_absorbed_power(0.01, 1.5);
        assert_relative_eq!(p, 0.00996678, max_relative = 1e-5);
        assert!((p - 0.01).abs() / 0.01 < 5e-3, "within 0.5% of linear");
    }

    #[test]
    fn saturable_map_plateau() {
        // oracle: 1.5*(1 - e^(-10/1.5)) = 1.4980911
        let p = effective_absorbed_power(10.0, 1.5);
        assert_relative_eq!(p, 1.4980911, max_relative = 1e-6);
        assert!(p > 0.998 * 1.5 && p < 1.5);
        // asymptote
        assert_relative_eq!(effective_absorbed_power(100.0, 1.5), 1.5, max_relative = 1e-9);
    }

    #[test]
    fn carrier_density_dark_state_is_zero() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        assert_eq!(carrier_density(0.0, &m, &g), 0.0);
    }

    #[test]
    fn carrier_density_brute_force_arithmetic() {
        // eta = 1, tau = 1e-6, default geometry, p_eff = 1 mW:
        //   rate   = 1e-3 / 2.4584726e-19 = 4.0675684e15 /s
        //   dn     = rate * 1e-6 / (12e-6 * 16e-6 * 250e-9)
        //          = 4.0675684e9 / 4.8e-17 = 8.4741e25 m^-3
        let m = MaterialParams {
            eta: 1.0,
            tau_s: 1e-6,
            ..MaterialParams::default()
        };
        let g = PatchGeometry::default();
        assert_relative_eq!(carrier_density(1.0, &m, &g), 8.4741e25, max_relative = 1e-4);
    }

    #[test]
    fn carrier_density_linear_in_tau() {
        let g = PatchGeometry::default();
        let m1 = MaterialParams::default();
        let m2 = MaterialParams {
            tau_s: 2.0 * m1.tau_s,
            ..m1
        };
        assert_relative_eq!(
            carrier_density(0.3, &m2, &g),
            2.0 * carrier_density(0.3, &m1, &g),
            epsilon = 1e-25
        );
    }

    #[test]
    fn dark_impedance_is_the_analytic_resistor() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams {
            c_gap_f: 0.0,
            r_contact_ohm: 0.0,
            p_sat_mw: 1.5,
        };
        let z = patch_impedance(0.0, &m, &g, &par, 1e9);
        let expect = m.dark_resistivity_ohm_m * g.length_m / (g.width_m * g.thickness_m);
        assert_relative_eq!(z.re, expect, max_relative = 1e-12);
        assert_relative_eq!(z.im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(z.re, 6.9e9, max_relative = 1e-9);
    }

    #[test]
    fn dark_impedance_is_capacitive_at_1_ghz() {
        // |1/(j*w*C)| = 1/(2*pi*1e9*2e-15) = 79.577 kOhm; dark resistance
        // 6.9 GOhm is negligible in parallel.
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams {
            c_gap_f: 2e-15,
            r_contact_ohm: 0.0,
            p_sat_mw: 1.5,
        };
        let z = patch_impedance(0.0, &m, &g, &par, 1e9);
        assert_relative_eq!(z.norm(), 79.58e3, max_relative = 1e-2);
    }

    #[test]
    fn impedance_magnitude_non_increasing_in_power() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams::default();
        for f in [1e9, 20e9, 40e9] {
            let mut prev = f64::INFINITY;
            for i in 0..50 {
                let p = i as f64 * 0.1;
                let z = patch_impedance(p, &m, &g, &par, f).norm();
                assert!(z <= prev + 1e-12, "at f={f} p={p}");
                prev = z;
            }
        }
    }

    #[test]
    fn low_frequency_limit_matches_real_closed_form() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams::default();
        let z = patch_impedance(0.7, &m, &g, &par, 1.0);
        let g_tot = photoconductance(0.7, &m, &g, &par) + dark_conductance(&m, &g);
        let expect = par.r_contact_ohm + 1.0 / g_tot;
        assert_relative_eq!(z.re, expect, max_relative = 1e-6);
        assert!(z.im.abs() / z.norm() < 1e-6);
    }

    #[test]
    fn small_signal_photoconductance_is_linear() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams::default();
        let p = par.p_sat_mw / 100.0;
        let ratio = photoconductance(2.0 * p, &m, &g, &par) / photoconductance(p, &m, &g, &par);
        assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn photoconductance_strictly_increasing_up_to_plateau() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams::default();
        let mut prev = -1.0;
        for i in 0..100 {
            let gq = photoconductance(i as f64 * 0.05, &m, &g, &par);
            assert!(gq > prev);
            assert!(gq >= 0.0);
            prev = gq;
        }
        assert_eq!(photoconductance(0.0, &m, &g, &par), 0.0);
    }

    #[test]
    fn transient_initial_condition_and_rise_time() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams::default();
        let tr = TransientResponse::new(1.0, &m, &g, &par);
        assert_eq!(tr.after_turn_on(0.0), 0.0);
        assert_eq!(tr.after_turn_off(0.0), tr.g_steady_s);
        // ln(9)*1e-6 = 2.1972e-6 s, "a few microseconds"
        assert_relative_eq!(tr.rise_time_10_90_s(), 2.1972e-6, max_relative = 1e-4);
    }

    #[test]
    fn transient_settles_within_five_lifetimes() {
        let m = MaterialParams::default();
        let g = PatchGeometry::default();
        let par = ParasiticParams::default();
        let tr = TransientResponse::new(0.5, &m, &g, &par);
        let g5 = tr.after_turn_on(5.0 * tr.tau_s);
        // 1 - e^-5 = 0.993262
        assert!((tr.g_steady_s - g5) / tr.g_steady_s < 0.007);
        assert_relative_eq!(g5 / tr.g_steady_s, 0.9932621, max_relative = 1e-6);
    }
}
