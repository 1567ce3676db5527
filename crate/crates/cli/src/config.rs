//! Run configuration: JSON schema and conversion into simulator types.
//!
//! The schema is strict — unknown keys are rejected with the offending key
//! named — and frequencies are given in conventional units (Hz for widths,
//! ITU labels or rad/s for centers).

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sfwm_core::channels::{itu_center, ChannelBank};
use sfwm_core::counting::{ArmNoise, EfficiencyModel, NoiseModel, DEFAULT_COINCIDENCE_WINDOW};
use sfwm_core::error::{Error, Result};
use sfwm_core::grid::FrequencyGrid;
use sfwm_core::measured::{load_measured_spectrum, SpectrumKind};
use sfwm_core::pump::{CoherentPump, IncoherentPump, PowerPrefactor, PumpShape, PumpSpectrum};
use sfwm_core::waveguide::{DispersionModel, WaveguideSpec};

/// A frequency given either as an ITU channel label ("C34") or in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencySpec {
    Label(String),
    RadPerSec(f64),
}

impl FrequencySpec {
    pub fn to_omega(&self) -> Result<f64> {
        match self {
            FrequencySpec::Label(l) => itu_center(l),
            FrequencySpec::RadPerSec(w) => {
                if !(w.is_finite() && *w > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "frequency must be finite and > 0, got {w}"
                    )));
                }
                Ok(*w)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coherence {
    Coherent,
    Incoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub coherence: Coherence,
    /// Line/envelope shape; incoherent pumps accept "rectangular" (flat
    /// comb) or "gaussian".
    pub shape: PumpShapeConfig,
    /// Gaussian σ, or full width for rectangular shapes (Hz).
    pub bandwidth_hz: f64,
    pub center: FrequencySpec,
    /// Lumped power prefactor κ (simulation units).
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Operating pump power (W) used by counting commands.
    #[serde(default = "default_power")]
    pub power_w: f64,
}

fn default_kappa() -> f64 {
    1.0
}
fn default_power() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpShapeConfig {
    Gaussian,
    Rectangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    #[serde(default)]
    pub k0_per_m: f64,
    #[serde(default)]
    pub k1_s_per_m: f64,
    #[serde(default)]
    pub beta2_s2_per_m: f64,
    #[serde(default)]
    pub beta3_s3_per_m: f64,
    /// Validity half-span around the pump center (Hz); 0 means unbounded.
    #[serde(default)]
    pub span_hz: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self { k0_per_m: 0.0, k1_s_per_m: 0.0, beta2_s2_per_m: 0.0, beta3_s3_per_m: 0.0, span_hz: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideConfig {
    pub length_m: f64,
    pub gamma_per_w_m: f64,
    #[serde(default)]
    pub loss_db_per_m: f64,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default)]
    pub include_nonlinear_phase: bool,
    #[serde(default)]
    pub dispersion: DispersionConfig,
}

fn default_segments() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per axis.
    pub points: usize,
    /// Optional explicit grid step (Hz). Defaults to (3·channel width)/(M−1)
    /// so each axis spans the filter band ± one channel width.
    #[serde(default)]
    pub step_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsConfig {
    /// Channel width (Hz), brick-wall unless a measured shape is given.
    pub width_hz: f64,
    pub signal: FrequencySpec,
    pub idler: FrequencySpec,
    /// Optional measured transmittance CSVs replacing the brick-wall shapes.
    #[serde(default)]
    pub signal_spectrum: Option<String>,
    #[serde(default)]
    pub idler_spectrum: Option<String>,
    /// High-pass threshold applied when ingesting measured spectra.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmNoiseConfig {
    #[serde(default)]
    pub linear_per_w: f64,
    #[serde(default)]
    pub background: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub signal: Option<ArmNoiseConfig>,
    #[serde(default)]
    pub idler: Option<ArmNoiseConfig>,
    #[serde(default = "default_window")]
    pub window_s: f64,
}

fn default_window() -> f64 {
    DEFAULT_COINCIDENCE_WINDOW
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { signal: None, idler: None, window_s: DEFAULT_COINCIDENCE_WINDOW }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyConfig {
    #[serde(default = "default_mu")]
    pub mu_ts: f64,
    #[serde(default = "default_mu")]
    pub mu_ti: f64,
    #[serde(default = "default_mu")]
    pub mu_ds: f64,
    #[serde(default = "default_mu")]
    pub mu_di: f64,
}

fn default_mu() -> f64 {
    1.0
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        Self { mu_ts: 1.0, mu_ti: 1.0, mu_ds: 1.0, mu_di: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    /// Detuning interval ΔΩ (Hz).
    pub interval_hz: f64,
    /// Interval indices to tabulate.
    pub intervals: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarConfig {
    pub power_from_w: f64,
    pub power_to_w: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: sfwm_core::counting::SweepVariable,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntanglementConfig {
    pub eta: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub white_noise: f64,
}

impl Default for EntanglementConfig {
    fn default() -> Self {
        Self { eta: 1.0, delta: 0.0, white_noise: 0.0 }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pump: PumpConfig,
    pub waveguide: WaveguideConfig,
    pub grid: GridConfig,
    pub channels: ChannelsConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub efficiency: EfficiencyConfig,
    #[serde(default)]
    pub rates: Option<RatesConfig>,
    #[serde(default)]
    pub car: Option<CarConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub entanglement: Option<EntanglementConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pump.bandwidth_hz", self.pump.bandwidth_hz),
            ("pump.kappa", self.pump.kappa),
            ("pump.power_w", self.pump.power_w),
            ("waveguide.length_m", self.waveguide.length_m),
            ("channels.width_hz", self.channels.width_hz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.grid.points < 2 {
            return Err(Error::InvalidParameter("grid.points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn pump_center(&self) -> Result<f64> {
        self.pump.center.to_omega()
    }

    /// Grid step in rad/s.
    pub fn grid_step(&self) -> Result<f64> {
        Ok(match self.grid.step_hz {
            Some(hz) => {
                if !(hz > 0.0) {
                    return Err(Error::InvalidParameter("grid.step_hz must be > 0".into()));
                }
                TAU * hz
            }
            None => 3.0 * TAU * self.channels.width_hz / (self.grid.points as f64 - 1.0),
        })
    }

    /// Signal/idler grids: `points` slots each, centered on the channel
    /// centers snapped onto the master lattice anchored at the pump center.
    pub fn grids(&self) -> Result<(FrequencyGrid, FrequencyGrid)> {
        let w0 = self.pump_center()?;
        let d = self.grid_step()?;
        let m = self.grid.points;
        let half = (m as f64 - 1.0) / 2.0;
        let mk = |center: f64| -> Result<FrequencyGrid> {
            let offset = ((center - w0) / d).round();
            FrequencyGrid::new(w0 + (offset - half) * d, d, m)
        };
        Ok((mk(self.channels.signal.to_omega()?)?, mk(self.channels.idler.to_omega()?)?))
    }

    pub fn dispersion(&self) -> Result<DispersionModel> {
        let w0 = self.pump_center()?;
        let dc = &self.waveguide.dispersion;
        let span = if dc.span_hz > 0.0 { TAU * dc.span_hz } else { f64::INFINITY };
        DispersionModel::new(w0, dc.k0_per_m, dc.k1_s_per_m, dc.beta2_s2_per_m, dc.beta3_s3_per_m, span)
    }

    pub fn waveguide(&self) -> Result<WaveguideSpec> {
        let mut wg = WaveguideSpec::new(
            self.waveguide.length_m,
            self.waveguide.gamma_per_w_m,
            self.waveguide.loss_db_per_m,
            self.waveguide.segments,
        )?;
        wg.include_nonlinear_phase = self.waveguide.include_nonlinear_phase;
        Ok(wg)
    }

    pub fn pump_spectrum(&self) -> Result<PumpSpectrum> {
        let center = self.pump_center()?;
        let bw = TAU * self.pump.bandwidth_hz;
        match self.pump.coherence {
            Coherence::Coherent => {
                let shape = match self.pump.shape {
                    PumpShapeConfig::Gaussian => PumpShape::Gaussian,
                    PumpShapeConfig::Rectangular => PumpShape::Rectangular,
                };
                Ok(PumpSpectrum::Coherent(CoherentPump::normalized(center, bw, shape)?))
            }
            Coherence::Incoherent => {
                let d = self.grid_step()?;
                let pump = match self.pump.shape {
                    PumpShapeConfig::Rectangular => {
                        IncoherentPump::square_envelope(center, bw, d, self.seed)?
                    }
                    PumpShapeConfig::Gaussian => {
                        IncoherentPump::gaussian_envelope(center, bw, d, self.seed)?
                    }
                };
                Ok(PumpSpectrum::Incoherent(pump))
            }
        }
    }

    pub fn kappa(&self) -> Result<PowerPrefactor> {
        PowerPrefactor::new(self.pump.kappa)
    }

    /// Channel banks holding the single configured channel per arm.
    pub fn channel_banks(&self) -> Result<(ChannelBank, ChannelBank)> {
        let (grid_s, grid_i) = self.grids()?;
        let width = TAU * self.channels.width_hz;
        let mut bank_s = ChannelBank::new(grid_s);
        let mut bank_i = ChannelBank::new(grid_i);
        let label = |spec: &FrequencySpec, fallback: &str| match spec {
            FrequencySpec::Label(l) => l.clone(),
            FrequencySpec::RadPerSec(_) => fallback.to_string(),
        };
        let (ls, li) =
            (label(&self.channels.signal, "signal"), label(&self.channels.idler, "idler"));

        match &self.channels.signal_spectrum {
            Some(path) => {
                let m = load_measured_spectrum(path, SpectrumKind::Transmittance)?;
                bank_s.add_measured(&ls, self.channels.signal.to_omega()?, &m, self.channels.threshold)?;
            }
            None => bank_s.add_brick_wall(&ls, self.channels.signal.to_omega()?, width)?,
        }
        match &self.channels.idler_spectrum {
            Some(path) => {
                let m = load_measured_spectrum(path, SpectrumKind::Transmittance)?;
                bank_i.add_measured(&li, self.channels.idler.to_omega()?, &m, self.channels.threshold)?;
            }
            None => bank_i.add_brick_wall(&li, self.channels.idler.to_omega()?, width)?,
        }
        Ok((bank_s, bank_i))
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let arm = |c: &Option<ArmNoiseConfig>| -> Result<ArmNoise> {
            match c {
                Some(a) => ArmNoise::new(a.linear_per_w, a.background),
                None => Ok(ArmNoise::quiet()),
            }
        };
        NoiseModel::new(arm(&self.noise.signal)?, arm(&self.noise.idler)?, self.noise.window_s)
    }

    pub fn efficiency(&self) -> Result<EfficiencyModel> {
        let e = &self.efficiency;
        EfficiencyModel::new(e.mu_ts, e.mu_ti, e.mu_ds, e.mu_di)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> serde_json::Value {
        serde_json::json!({
            "pump": {
                "coherence": "incoherent",
                "shape": "rectangular",
                "bandwidth_hz": 200e9,
                "center": "C34"
            },
            "waveguide": { "length_m": 0.01, "gamma_per_w_m": 100.0 },
            "grid": { "points": 64 },
            "channels": { "width_hz": 200e9, "signal": "C48", "idler": "C20" }
        })
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::parse(&minimal().to_string()).unwrap();
        assert_eq!(cfg.grid.points, 64);
        let (gs, gi) = cfg.grids().unwrap();
        assert_eq!(gs.len(), 64);
        // Grid centers sit on the channel centers up to lattice snap.
        let cs = itu_center("C48").unwrap();
        let mid = 0.5 * (gs.start + gs.end());
        assert!((mid - cs).abs() <= gs.step);
        assert!(gi.start < gs.start);
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let mut v = minimal();
        v["grid"]["pionts"] = serde_json::json!(64);
        let err = RunConfig::parse(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("pionts"), "error should name the bad key: {err}");
    }

    #[test]
    fn nonpositive_values_rejected() {
        let mut v = minimal();
        v["waveguide"]["length_m"] = serde_json::json!(-1.0);
        assert!(RunConfig::parse(&v.to_string()).is_err());
    }

    #[test]
    fn frequency_spec_forms() {
        assert!(FrequencySpec::Label("C34".into()).to_omega().is_ok());
        assert!(FrequencySpec::RadPerSec(TAU * 193.4e12).to_omega().is_ok());
        assert!(FrequencySpec::RadPerSec(-1.0).to_omega().is_err());
    }
}
