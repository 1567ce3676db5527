//! Pump spectral models.
//!
//! A coherent pump is a normalized amplitude density `α_C(ω)` (Gaussian or
//! rectangular line shape); its optical power follows from the squared
//! modulus of the *integrated* amplitude, which is where constructive
//! interference between frequency components enters. A temporally incoherent
//! pump is a set of discrete, mutually uncorrelated components carrying
//! intensities `|α_I(ω_n)|²` and random phases; its power is the plain
//! intensity sum. The bundled field constants (`½ n ε0 c A²`) are collapsed
//! into a single configurable prefactor [`PowerPrefactor`].

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Band;

/// Line shape of a coherent pump's amplitude density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpShape {
    /// `α(ω) = C·exp(−(ω−ω0)²/(2σ_p²))`, `σ_p` the bandwidth parameter.
    Gaussian,
    /// Flat top of full width `σ_p`, height `C`.
    Rectangular,
}

/// Coherent pump: continuous amplitude density.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentPump {
    /// Center angular frequency ω0 (rad/s).
    pub center: f64,
    /// Bandwidth parameter σ_p (rad/s): Gaussian sigma, or full width for the
    /// rectangular shape.
    pub bandwidth: f64,
    pub shape: PumpShape,
    /// Peak amplitude-density coefficient C. [`normalize_coherent`] sets it
    /// so that ∫|α|²dω = 1.
    pub coeff: f64,
}

/// Incoherent pump: discrete components on an evenly spaced comb.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherentPump {
    /// `(ω_n, |α_I(ω_n)|²)`, strictly increasing in ω, intensities ≥ 0.
    pub components: Vec<(f64, f64)>,
    /// Per-component phases in [0, 2π).
    pub phases: Vec<f64>,
    /// Component spacing Δω (rad/s); also the density bandwidth used when the
    /// discrete sum is traded for a continuous integral.
    pub spacing: f64,
    /// Envelope bandwidth σ_A the comb was drawn from (rad/s).
    pub envelope_bandwidth: f64,
}

/// Pump field description, by temporal coherence.
#[derive(Debug, Clone, PartialEq)]
pub enum PumpSpectrum {
    Coherent(CoherentPump),
    Incoherent(IncoherentPump),
}

impl CoherentPump {
    /// Unnormalized construction; call [`normalize_coherent`] (or
    /// [`CoherentPump::normalized`]) before using the density in integrals.
    pub fn new(center: f64, bandwidth: f64, shape: PumpShape) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::invalid(format!(
                "pump bandwidth must be > 0, got {bandwidth}"
            )));
        }
        Ok(Self { center, bandwidth, shape, coeff: 1.0 })
    }

    pub fn normalized(center: f64, bandwidth: f64, shape: PumpShape) -> Result<Self> {
        normalize_coherent(Self::new(center, bandwidth, shape)?)
    }

    /// Amplitude density α_C(ω).
    #[inline]
    pub fn amplitude(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        match self.shape {
            PumpShape::Gaussian => {
                let s = self.bandwidth;
                self.coeff * (-x * x / (2.0 * s * s)).exp()
            }
            PumpShape::Rectangular => {
                if x.abs() <= 0.5 * self.bandwidth {
                    self.coeff
                } else {
                    0.0
                }
            }
        }
    }

    /// ∫ α_C(ω) dω, in closed form.
    pub fn amplitude_integral(&self) -> f64 {
        match self.shape {
            PumpShape::Gaussian => self.coeff * self.bandwidth * (2.0 * PI).sqrt(),
            PumpShape::Rectangular => self.coeff * self.bandwidth,
        }
    }

    /// Band outside which the amplitude density is negligible (Gaussian:
    /// ±8σ_p; rectangular: the support itself).
    pub fn support(&self) -> Band {
        let half = match self.shape {
            PumpShape::Gaussian => 8.0 * self.bandwidth,
            PumpShape::Rectangular => 0.5 * self.bandwidth,
        };
        Band { lo: self.center - half, hi: self.center + half }
    }
}

/// Normalize a coherent pump so that ∫|α_C(ω)|² dω = 1.
///
/// For the Gaussian shape the coefficient is `(σ_p √π)^(−1/2)`; for a
/// rectangle of full width W it is `1/√W`.
pub fn normalize_coherent(mut pump: CoherentPump) -> Result<CoherentPump> {
    if !(pump.bandwidth > 0.0) {
        return Err(Error::invalid("pump bandwidth must be > 0"));
    }
    pump.coeff = match pump.shape {
        PumpShape::Gaussian => 1.0 / (pump.bandwidth * PI.sqrt()).sqrt(),
        PumpShape::Rectangular => 1.0 / pump.bandwidth.sqrt(),
    };
    Ok(pump)
}

impl IncoherentPump {
    pub fn new(components: Vec<(f64, f64)>, phases: Vec<f64>, spacing: f64, envelope_bandwidth: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("incoherent pump needs at least one component"));
        }
        if phases.len() != components.len() {
            return Err(Error::invalid(format!(
                "phase count {} does not match component count {}",
                phases.len(),
                components.len()
            )));
        }
        if !(spacing > 0.0) {
            return Err(Error::invalid("component spacing must be > 0"));
        }
        for w in components.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("component frequencies must be strictly increasing"));
            }
            if (w[1].0 - w[0].0 - spacing).abs() > 1e-6 * spacing {
                return Err(Error::invalid("components must be evenly spaced by the declared spacing"));
            }
        }
        for &(_, i) in &components {
            if !(i >= 0.0) {
                return Err(Error::invalid("component intensities must be ≥ 0"));
            }
        }
        for &p in &phases {
            if !(0.0..2.0 * PI).contains(&p) {
                return Err(Error::invalid("phases must lie in [0, 2π)"));
            }
        }
        Ok(Self { components, phases, spacing, envelope_bandwidth })
    }

    /// Comb sampled from a flat-top envelope of full width `width` centered at
    /// `center`, with components every `spacing` and unit intensity. Phases
    /// are seeded-uniform in [0, 2π).
    pub fn square_envelope(center: f64, width: f64, spacing: f64, seed: u64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::invalid("envelope width must be > 0"));
        }
        let n_side = (0.5 * width / spacing).floor() as i64;
        let components: Vec<(f64, f64)> = (-n_side..=n_side)
            .map(|k| (center + k as f64 * spacing, 1.0))
            .collect();
        let phases = draw_phases(components.len(), seed);
        Self::new(components, phases, spacing, width)
    }

    /// Comb sampled from a Gaussian intensity envelope `exp(−(ω−ω0)²/σ_A²)`
    /// truncated at ±4σ_A.
    pub fn gaussian_envelope(center: f64, sigma: f64, spacing: f64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid("envelope bandwidth must be > 0"));
        }
        let n_side = (4.0 * sigma / spacing).floor() as i64;
        let components: Vec<(f64, f64)> = (-n_side..=n_side)
            .map(|k| {
                let w = center + k as f64 * spacing;
                let x = (w - center) / sigma;
                (w, (-x * x).exp())
            })
            .collect();
        let phases = draw_phases(components.len(), seed);
        Self::new(components, phases, spacing, sigma)
    }

    /// Total intensity Σ|α_I(ω_n)|².
    pub fn intensity_sum(&self) -> f64 {
        self.components.iter().map(|&(_, i)| i).sum()
    }

    /// Intensity of the component nearest `omega`, if one lies within half a
    /// spacing; 0 otherwise.
    pub fn intensity_at(&self, omega: f64) -> f64 {
        let first = self.components[0].0;
        let t = ((omega - first) / self.spacing).round();
        if t < 0.0 || t >= self.components.len() as f64 {
            return 0.0;
        }
        let k = t as usize;
        if (omega - (first + t * self.spacing)).abs() <= 0.5 * self.spacing {
            self.components[k].1
        } else {
            0.0
        }
    }

    /// Intensity-weighted mean frequency.
    pub fn centroid(&self) -> f64 {
        let total = self.intensity_sum();
        if total == 0.0 {
            return self.components[self.components.len() / 2].0;
        }
        self.components.iter().map(|&(w, i)| w * i).sum::<f64>() / total
    }
}

/// Lumped power prefactor κ standing in for `½ n ε0 c A²` (simulation units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPrefactor(pub f64);

impl PowerPrefactor {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::invalid(format!("power prefactor must be > 0, got {kappa}")));
        }
        Ok(Self(kappa))
    }
}

impl Default for PowerPrefactor {
    fn default() -> Self {
        Self(1.0)
    }
}

/// Optical power of a pump field.
///
/// Coherent: `P = κ·|∫α_C dω|²` (Gaussian closed form `κ·2√π·σ_p` for the
/// normalized density). Incoherent: `P = κ·Σ_n |α_I(ω_n)|²`.
pub fn pump_power(spectrum: &PumpSpectrum, kappa: PowerPrefactor) -> Result<f64> {
    match spectrum {
        PumpSpectrum::Coherent(c) => {
            if !(c.bandwidth > 0.0) {
                return Err(Error::invalid("pump bandwidth must be > 0"));
            }
            let integral = c.amplitude_integral();
            Ok(kappa.0 * integral * integral)
        }
        PumpSpectrum::Incoherent(i) => {
            if i.components.is_empty() {
                return Err(Error::invalid("incoherent pump has no components"));
            }
            Ok(kappa.0 * i.intensity_sum())
        }
    }
}

/// `count` i.i.d. phases uniform in [0, 2π), deterministic for a fixed seed.
pub fn draw_phases(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0.0..2.0 * PI)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_normalization_coefficient() {
        let p = CoherentPump::normalized(0.0, 1.0, PumpShape::Gaussian).unwrap();
        // C = π^(−1/4)
        assert_relative_eq!(p.coeff, PI.powf(-0.25), max_relative = 1e-12);
        assert_relative_eq!(p.coeff, 0.7511255444649425, max_relative = 1e-12);

        let p4 = CoherentPump::normalized(0.0, 4.0, PumpShape::Gaussian).unwrap();
        assert_relative_eq!(p4.coeff, (1.0 / (4.0 * PI.sqrt())).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(p4.coeff, 0.3755627722324712, max_relative = 1e-9);
    }

    #[test]
    fn rectangular_normalization_height() {
        let w = 3.0;
        let p = CoherentPump::normalized(0.0, w, PumpShape::Rectangular).unwrap();
        assert_relative_eq!(p.coeff, 1.0 / w.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn normalization_integrates_to_one() {
        // Quadrature of |α|² over ±8σ: midpoint rule, fine grid.
        for &sigma in &[0.5, 1.0, 4.0] {
            let p = CoherentPump::normalized(10.0, sigma, PumpShape::Gaussian).unwrap();
            let (lo, hi) = (10.0 - 8.0 * sigma, 10.0 + 8.0 * sigma);
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let sum: f64 = (0..n)
                .map(|k| {
                    let w = lo + (k as f64 + 0.5) * h;
                    let a = p.amplitude(w);
                    a * a * h
                })
                .sum();
            assert_relative_eq!(sum, 1.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn invalid_bandwidth_rejected() {
        assert!(CoherentPump::new(0.0, 0.0, PumpShape::Gaussian).is_err());
        assert!(CoherentPump::new(0.0, -1.0, PumpShape::Gaussian).is_err());
    }

    #[test]
    fn coherent_gaussian_power_closed_form() {
        let p = CoherentPump::normalized(0.0, 1.0, PumpShape::Gaussian).unwrap();
        let power = pump_power(&PumpSpectrum::Coherent(p), PowerPrefactor(1.0)).unwrap();
        assert_relative_eq!(power, 2.0 * PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(power, 3.5449077018110318, max_relative = 1e-12);
    }

    #[test]
    fn incoherent_power_is_intensity_sum() {
        let comps = vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)];
        let pump = IncoherentPump::new(comps, vec![0.0; 3], 1.0, 2.0).unwrap();
        let power = pump_power(&PumpSpectrum::Incoherent(pump), PowerPrefactor(1.0)).unwrap();
        assert_relative_eq!(power, 6.0);
    }

    #[test]
    fn single_zero_component_gives_zero_power() {
        let pump = IncoherentPump::new(vec![(5.0, 0.0)], vec![0.0], 1.0, 1.0).unwrap();
        let power = pump_power(&PumpSpectrum::Incoherent(pump), PowerPrefactor(1.0)).unwrap();
        assert_eq!(power, 0.0);
    }

    #[test]
    fn incoherent_power_additive_over_concatenation() {
        let a = vec![(0.0, 0.3), (1.0, 0.7)];
        let b = vec![(2.0, 1.1), (3.0, 0.2), (4.0, 0.9)];
        let whole: Vec<_> = a.iter().chain(b.iter()).copied().collect();
        let pw = |c: Vec<(f64, f64)>| {
            let n = c.len();
            pump_power(
                &PumpSpectrum::Incoherent(IncoherentPump::new(c, vec![0.0; n], 1.0, 1.0).unwrap()),
                PowerPrefactor(1.0),
            )
            .unwrap()
        };
        assert_eq!(pw(whole), pw(a) + pw(b));
    }

    #[test]
    fn uneven_spacing_rejected() {
        let comps = vec![(0.0, 1.0), (1.0, 1.0), (2.5, 1.0)];
        assert!(IncoherentPump::new(comps, vec![0.0; 3], 1.0, 1.0).is_err());
    }

    #[test]
    fn phases_deterministic_and_uniform() {
        assert!(draw_phases(0, 1).is_empty());
        assert_eq!(draw_phases(64, 42), draw_phases(64, 42));
        assert_ne!(draw_phases(64, 42), draw_phases(64, 43));

        let n = 100_000;
        let phases = draw_phases(n, 7);
        assert!(phases.iter().all(|&p| (0.0..2.0 * PI).contains(&p)));
        let mean = phases.iter().sum::<f64>() / n as f64;
        // Uniform on [0, 2π): mean π, sd (2π/√12)/√n; allow 3σ.
        let sd = 2.0 * PI / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - PI).abs() < 3.0 * sd, "mean {mean} too far from π");
    }

    #[test]
    fn square_envelope_comb() {
        let p = IncoherentPump::square_envelope(100.0, 10.0, 1.0, 3).unwrap();
        assert_eq!(p.components.len(), 11);
        assert_relative_eq!(p.components[0].0, 95.0);
        assert_relative_eq!(p.components[10].0, 105.0);
        assert_relative_eq!(p.intensity_at(97.2), 1.0);
        assert_relative_eq!(p.intensity_at(110.0), 0.0);
    }
}
