//! Dispersion, phase matching and split-step biphoton amplitude.
//!
//! The propagation constant is a cubic Taylor model around a reference
//! frequency. The conversion amplitude over a waveguide of length `L` is
//! accumulated segment by segment: the pump power decays along the guide, a
//! pair born at `z` picks up the phase `Δk·z`, and both generated photons are
//! attenuated from their birth point to the output facet. In the lossless
//! limit the accumulated magnitude converges to `γ·P·L·|sinc(ΔkL/2)|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cubic Taylor dispersion model `k(ω)` around `omega_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    /// Expansion point ωc (rad/s).
    pub omega_ref: f64,
    /// k(ωc) (1/m).
    pub k0: f64,
    /// dk/dω (s/m).
    pub k1: f64,
    /// d²k/dω² (s²/m).
    pub beta2: f64,
    /// d³k/dω³ (s³/m).
    pub beta3: f64,
    /// Half-width of the validity span around ωc (rad/s).
    pub span: f64,
}

impl DispersionModel {
    pub fn new(omega_ref: f64, k0: f64, k1: f64, beta2: f64, beta3: f64, span: f64) -> Result<Self> {
        for (name, v) in [("k0", k0), ("k1", k1), ("beta2", beta2), ("beta3", beta3)] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("dispersion coefficient {name} must be finite")));
            }
        }
        if !(span > 0.0) {
            return Err(Error::invalid("dispersion validity span must be > 0"));
        }
        Ok(Self { omega_ref, k0, k1, beta2, beta3, span })
    }

    /// Dispersionless model (k identically 0), valid everywhere. Useful for
    /// flat-phase-matching studies where only the pump-sum structure matters.
    pub fn flat(omega_ref: f64) -> Self {
        Self { omega_ref, k0: 0.0, k1: 0.0, beta2: 0.0, beta3: 0.0, span: f64::INFINITY }
    }
}

/// Waveguide parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    /// Length L (m).
    pub length: f64,
    /// Nonlinear parameter γ (1/(W·m)).
    pub gamma: f64,
    /// Propagation loss (dB/m).
    pub loss_db_per_m: f64,
    /// Number of split-step segments.
    pub segments: usize,
    /// Add the nonlinear phase contribution 2γP to the mismatch.
    pub include_nonlinear_phase: bool,
}

impl WaveguideSpec {
    pub fn new(length: f64, gamma: f64, loss_db_per_m: f64, segments: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::invalid(format!("waveguide length must be > 0, got {length}")));
        }
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("nonlinear parameter must be ≥ 0, got {gamma}")));
        }
        if !(loss_db_per_m >= 0.0) {
            return Err(Error::invalid(format!("loss must be ≥ 0, got {loss_db_per_m}")));
        }
        if segments == 0 {
            return Err(Error::invalid("need at least one split-step segment"));
        }
        Ok(Self { length, gamma, loss_db_per_m, segments, include_nonlinear_phase: false })
    }

    /// Field/power loss rate α (1/m) from the dB figure.
    #[inline]
    pub fn alpha_linear(&self) -> f64 {
        self.loss_db_per_m * std::f64::consts::LN_10 / 10.0
    }
}

/// Taylor propagation constant; errors if `omega` leaves the declared span.
pub fn propagation_constant(omega: f64, disp: &DispersionModel) -> Result<f64> {
    let x = omega - disp.omega_ref;
    if x.abs() > disp.span {
        return Err(Error::OutOfRange(format!(
            "ω detuning {:.3e} rad/s exceeds dispersion validity span {:.3e}",
            x, disp.span
        )));
    }
    Ok(disp.k0 + disp.k1 * x + 0.5 * disp.beta2 * x * x + disp.beta3 / 6.0 * x * x * x)
}

/// Phase mismatch Δk = k(ωp1) + k(ωp2) − k(ωs) − k(ωi).
///
/// The four frequencies must satisfy SFWM energy conservation
/// `ωp1 + ωp2 = ωs + ωi` within `energy_tol` (typically half a grid step).
pub fn phase_mismatch(
    omega_p1: f64,
    omega_p2: f64,
    omega_s: f64,
    omega_i: f64,
    disp: &DispersionModel,
    energy_tol: f64,
) -> Result<f64> {
    let defect = omega_p1 + omega_p2 - omega_s - omega_i;
    if defect.abs() > energy_tol {
        return Err(Error::InvalidCombination(format!(
            "ωp1+ωp2−ωs−ωi = {defect:.3e} rad/s exceeds tolerance {energy_tol:.3e}"
        )));
    }
    Ok(propagation_constant(omega_p1, disp)?
        + propagation_constant(omega_p2, disp)?
        - propagation_constant(omega_s, disp)?
        - propagation_constant(omega_i, disp)?)
}

/// sinc(x) = sin(x)/x with sinc(0) = 1.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        // sin(x)/x = 1 − x²/6 + O(x⁴); below 1e-8 the correction is < 1e-17.
        1.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching factor sinc(ΔkL/2).
#[inline]
pub fn pm_sinc(dk: f64, length: f64) -> f64 {
    sinc(0.5 * dk * length)
}

/// Split-step accumulation for a pre-computed mismatch; the kernel behind
/// [`split_step_amplitude`]. `input_power` is the pump power at the input
/// facet. All per-segment factors are evaluated at the segment midpoint.
pub fn split_step_from_mismatch(dk: f64, wg: &WaveguideSpec, input_power: f64) -> Complex64 {
    let n = wg.segments;
    let dz = wg.length / n as f64;
    let alpha = wg.alpha_linear();
    let dk = if wg.include_nonlinear_phase { dk + 2.0 * wg.gamma * input_power } else { dk };

    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let z_mid = (j as f64 + 0.5) * dz;
        // Pump power decay to the birth point (two pump photons -> a single
        // power factor), then amplitude decay of both generated photons from
        // the birth point to the facet.
        let pump = input_power * (-alpha * z_mid).exp();
        let out = (-alpha * (wg.length - z_mid)).exp();
        let phase = Complex64::from_polar(1.0, dk * z_mid);
        acc += wg.gamma * pump * dz * out * phase;
    }
    acc
}

/// Biphoton amplitude generated by pump components (ωp1, ωp2) into (ωs, ωi),
/// accumulated over the waveguide with loss.
#[allow(clippy::too_many_arguments)]
pub fn split_step_amplitude(
    omega_p1: f64,
    omega_p2: f64,
    omega_s: f64,
    omega_i: f64,
    wg: &WaveguideSpec,
    disp: &DispersionModel,
    input_power: f64,
    energy_tol: f64,
) -> Result<Complex64> {
    let dk = phase_mismatch(omega_p1, omega_p2, omega_s, omega_i, disp, energy_tol)?;
    Ok(split_step_from_mismatch(dk, wg, input_power))
}

/// Closed-form magnitude of the split-step limit: `γ·P·L·|sinc(ΔkL/2)|`
/// scaled by the loss factor `exp(−α·L)` (pump decay to z and pair decay
/// from z compound to a z-independent attenuation).
pub fn split_step_closed_form_magnitude(dk: f64, wg: &WaveguideSpec, input_power: f64) -> f64 {
    let lossless = wg.gamma * input_power * wg.length * pm_sinc(dk, wg.length).abs();
    lossless * (-wg.alpha_linear() * wg.length).exp()
}
