//! Switch composition and figures of merit.
//!
//! A switch is a photoconductive patch in series with the signal line,
//! optionally behind matched feed-line loss sections, evaluated in a 50 ohm
//! environment. The On state uses the optical power the patch absorbs; the
//! Off state is the same network at zero absorbed power. The amplitude
//! figure of merit is the extinction ratio `20*log10(|S21_on|/|S21_off|)`;
//! the phase figure of merit is the wrapped difference of the S21 phases.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::netlist::NetlistAst;
use crate::optical::{build_network, DeviceType, GraphError};
use crate::photoconductor::{patch_impedance, MaterialParams, ParasiticParams, PatchGeometry};
use crate::rf::{RfError, SParameters, TwoPortAbcd, DEFAULT_Z0};

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error(transparent)]
    Rf(#[from] RfError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("S-parameters are at different frequencies ({0} Hz vs {1} Hz)")]
    FrequencyMismatch(f64, f64),
    #[error("Off-state |S21| is zero; extinction ratio is undefined")]
    ZeroOffState,
    #[error("S21 magnitude is zero; phase shift is undefined")]
    ZeroMagnitude,
    #[error("netlist has no switch `{0}`")]
    UnknownSwitch(String),
    #[error("power grid must be non-empty and non-negative")]
    BadPowerGrid,
}

/// One physical switch: patch model plus its optical coupling and feed-line
/// loss. In a circuit, the instance id matches the optical tap id.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchInstance {
    pub id: String,
    pub device_type: DeviceType,
    /// Fraction of light incident at the device that reaches the patch.
    pub coupling_fraction: f64,
    pub geometry: PatchGeometry,
    pub material: MaterialParams,
    pub parasitics: ParasiticParams,
    /// Per-port feed loss coefficient; each port attenuates by
    /// `alpha * sqrt(f/GHz)` dB.
    pub alpha_line_db_per_sqrt_ghz: f64,
    pub z0: f64,
}

impl SwitchInstance {
    /// ABCD matrix of the switch at `freq_hz` with `absorbed_mw` of optical
    /// power converted in the patch.
    pub fn two_port(&self, absorbed_mw: f64, freq_hz: f64) -> TwoPortAbcd {
        let z = patch_impedance(
            absorbed_mw,
            &self.material,
            &self.geometry,
            &self.parasitics,
            freq_hz,
        );
        let gap = TwoPortAbcd::series(z, freq_hz);
        if self.alpha_line_db_per_sqrt_ghz == 0.0 {
            return gap;
        }
        let loss_db = self.alpha_line_db_per_sqrt_ghz * (freq_hz / 1e9).sqrt();
        let line = TwoPortAbcd::matched_attenuator(loss_db, self.z0, freq_hz);
        // line.cascade(gap).cascade(line); same frequency throughout
        line.cascade(&gap)
            .and_then(|m| m.cascade(&line))
            .expect("equal frequencies by construction")
    }

    /// S-parameters of [`SwitchInstance::two_port`] at the instance `z0`.
    pub fn s_params(&self, absorbed_mw: f64, freq_hz: f64) -> Result<SParameters, RfError> {
        self.two_port(absorbed_mw, freq_hz).to_s(self.z0)
    }
}

/// Model parameters shared by every switch in a circuit; per-type collection
/// efficiency is the only field that differs between tapered and through
/// devices.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchModelSet {
    pub geometry: PatchGeometry,
    pub tapered_material: MaterialParams,
    pub through_material: MaterialParams,
    pub parasitics: ParasiticParams,
    pub alpha_line_db_per_sqrt_ghz: f64,
    pub z0: f64,
}

impl Default for SwitchModelSet {
    fn default() -> Self {
        Self {
            geometry: PatchGeometry::default(),
            tapered_material: MaterialParams::default(),
            through_material: MaterialParams::default(),
            parasitics: ParasiticParams::default(),
            alpha_line_db_per_sqrt_ghz: 0.0,
            z0: DEFAULT_Z0,
        }
    }
}

impl SwitchModelSet {
    pub fn material_for(&self, device_type: DeviceType) -> &MaterialParams {
        match device_type {
            DeviceType::Tapered => &self.tapered_material,
            DeviceType::Through => &self.through_material,
        }
    }

    pub fn instance(
        &self,
        id: impl Into<String>,
        device_type: DeviceType,
        coupling_fraction: f64,
    ) -> SwitchInstance {
        SwitchInstance {
            id: id.into(),
            device_type,
            coupling_fraction,
            geometry: self.geometry,
            material: *self.material_for(device_type),
            parasitics: self.parasitics,
            alpha_line_db_per_sqrt_ghz: self.alpha_line_db_per_sqrt_ghz,
            z0: self.z0,
        }
    }

    /// Standalone instance with the default coupling for its type.
    pub fn standalone(&self, device_type: DeviceType) -> SwitchInstance {
        self.instance("switch", device_type, device_type.default_coupling())
    }
}

/// Extinction ratio `20*log10(|S21_on| / |S21_off|)` in dB.
pub fn extinction_ratio_db(s_on: &SParameters, s_off: &SParameters) -> Result<f64, DeviceError> {
    if s_on.freq_hz != s_off.freq_hz {
        return Err(DeviceError::FrequencyMismatch(s_on.freq_hz, s_off.freq_hz));
    }
    let off = s_off.s21.norm();
    if off == 0.0 {
        return Err(DeviceError::ZeroOffState);
    }
    Ok(20.0 * (s_on.s21.norm() / off).log10())
}

/// Phase shift `arg(S21_on) - arg(S21_off)` in degrees, wrapped to
/// (-180, 180].
pub fn phase_shift_deg(s_on: &SParameters, s_off: &SParameters) -> Result<f64, DeviceError> {
    if s_on.freq_hz != s_off.freq_hz {
        return Err(DeviceError::FrequencyMismatch(s_on.freq_hz, s_off.freq_hz));
    }
    if s_on.s21.norm() == 0.0 || s_off.s21.norm() == 0.0 {
        return Err(DeviceError::ZeroMagnitude);
    }
    let d = (s_on.s21.arg() - s_off.s21.arg()).to_degrees();
    Ok(wrap_deg(d))
}

fn wrap_deg(mut d: f64) -> f64 {
    while d <= -180.0 {
        d += 360.0;
    }
    while d > 180.0 {
        d -= 360.0;
    }
    d
}

/// Per-frequency On/Off result for one switch.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchRecord {
    pub freq_hz: f64,
    pub s21_on: num_complex::Complex64,
    pub s21_off: num_complex::Complex64,
    pub r_onoff_db: f64,
    pub phase_shift_deg: f64,
    pub absorbed_mw: f64,
}

/// Frequency sweep of one switch at a fixed operating power.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchResult {
    pub switch_id: String,
    pub device_type: DeviceType,
    pub records: Vec<SwitchRecord>,
}

fn sweep_switch(
    sw: &SwitchInstance,
    absorbed_mw: f64,
    freqs_hz: &[f64],
) -> Result<SwitchResult, DeviceError> {
    let mut records = Vec::with_capacity(freqs_hz.len());
    for &f in freqs_hz {
        let s_on = sw.s_params(absorbed_mw, f)?;
        let s_off = sw.s_params(0.0, f)?;
        records.push(SwitchRecord {
            freq_hz: f,
            s21_on: s_on.s21,
            s21_off: s_off.s21,
            r_onoff_db: extinction_ratio_db(&s_on, &s_off)?,
            phase_shift_deg: phase_shift_deg(&s_on, &s_off)?,
            absorbed_mw,
        });
    }
    Ok(SwitchResult {
        switch_id: sw.id.clone(),
        device_type: sw.device_type,
        records,
    })
}

/// Simulates a whole circuit: one optical propagation, then an On/Off RF
/// sweep per switch. Each switch's RF path is electrically independent;
/// only the optical feed is shared.
pub fn simulate_circuit(
    ast: &NetlistAst,
    models: &SwitchModelSet,
    freqs_hz: &[f64],
    source_power_mw: f64,
) -> Result<BTreeMap<String, SwitchResult>, DeviceError> {
    if freqs_hz.is_empty() {
        return Err(DeviceError::Rf(RfError::EmptyGrid));
    }
    let graph = build_network(ast)?.with_source_power(source_power_mw);
    let solution = graph.propagate();
    let mut results = BTreeMap::new();
    for (id, device_type, coupling) in graph.taps() {
        let sw = models.instance(id, device_type, coupling);
        let absorbed = solution.absorbed[id];
        results.insert(id.to_string(), sweep_switch(&sw, absorbed, freqs_hz)?);
    }
    Ok(results)
}

/// One row of an extinction-versus-power table.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweepRow {
    pub power_mw: f64,
    pub freq_hz: f64,
    pub s21_on_db: f64,
    pub s21_off_db: f64,
    pub r_onoff_db: f64,
    pub phase_shift_deg: f64,
}

fn power_sweep_absorbed(
    sw: &SwitchInstance,
    powers_mw: &[f64],
    absorbed_per_mw: f64,
    freqs_hz: &[f64],
) -> Result<Vec<PowerSweepRow>, DeviceError> {
    if powers_mw.is_empty() || powers_mw.iter().any(|&p| p < 0.0) {
        return Err(DeviceError::BadPowerGrid);
    }
    if freqs_hz.is_empty() {
        return Err(DeviceError::Rf(RfError::EmptyGrid));
    }
    let mut rows = Vec::with_capacity(powers_mw.len() * freqs_hz.len());
    for &f in freqs_hz {
        for &p in powers_mw {
            let s_on = sw.s_params(p * absorbed_per_mw, f)?;
            let s_off = sw.s_params(0.0, f)?;
            rows.push(PowerSweepRow {
                power_mw: p,
                freq_hz: f,
                s21_on_db: s_on.s21_db(),
                s21_off_db: s_off.s21_db(),
                r_onoff_db: extinction_ratio_db(&s_on, &s_off)?,
                phase_shift_deg: phase_shift_deg(&s_on, &s_off)?,
            });
        }
    }
    Ok(rows)
}

/// Extinction ratio of a standalone switch versus incident optical power.
/// `powers_mw` is the power arriving at the device; the patch absorbs
/// `coupling_fraction` of it.
pub fn power_sweep(
    sw: &SwitchInstance,
    powers_mw: &[f64],
    freqs_hz: &[f64],
) -> Result<Vec<PowerSweepRow>, DeviceError> {
    power_sweep_absorbed(sw, powers_mw, sw.coupling_fraction, freqs_hz)
}

/// Extinction ratio of one switch inside a circuit versus source power.
/// `powers_mw` is the power injected at the circuit's source; the optical
/// network determines what fraction the switch absorbs.
pub fn circuit_power_sweep(
    ast: &NetlistAst,
    models: &SwitchModelSet,
    switch_id: &str,
    powers_mw: &[f64],
    freqs_hz: &[f64],
) -> Result<Vec<PowerSweepRow>, DeviceError> {
    let graph = build_network(ast)?;
    let (id, device_type, coupling) = graph
        .taps()
        .find(|(id, _, _)| *id == switch_id)
        .ok_or_else(|| DeviceError::UnknownSwitch(switch_id.to_string()))?;
    // absorbed power scales exactly linearly with source power
    let per_mw = graph.with_source_power(1.0).propagate().absorbed[id];
    let sw = models.instance(id, device_type, coupling);
    power_sweep_absorbed(&sw, powers_mw, per_mw, freqs_hz)
}
