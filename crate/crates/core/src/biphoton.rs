//! Joint spectral amplitudes and Schmidt purity.
//!
//! The effective two-photon amplitude over an (ωs, ωi) grid is assembled from
//! the pump self-convolution and the waveguide conversion amplitude. Coherent
//! pumping adds pump contributions as amplitudes; incoherent pumping adds
//! them as intensities (squared terms summed, then the square root taken),
//! which is what transfers the pump's spectral uncorrelation to the pair and
//! lifts the Schmidt purity. A Monte-Carlo route — random phases per
//! pump-combination term, ensemble-averaged — cross-checks the deterministic
//! recipe.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channels::ChannelBank;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::grid::FrequencyGrid;
use crate::pump::{CoherentPump, IncoherentPump, PumpShape};
use crate::waveguide::{phase_mismatch, split_step_from_mismatch, DispersionModel, WaveguideSpec};

/// Whether matrix values are amplitudes or intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Amplitude,
    Intensity,
}

/// Discretized joint spectrum on an (ωs, ωi) grid, row-major in the signal
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    pub grid_s: FrequencyGrid,
    pub grid_i: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub kind: JointKind,
    pub normalized: bool,
}

impl JointSpectrum {
    pub fn new(
        grid_s: FrequencyGrid,
        grid_i: FrequencyGrid,
        values: Vec<Complex64>,
        kind: JointKind,
    ) -> Result<Self> {
        if values.len() != grid_s.len() * grid_i.len() {
            return Err(Error::invalid(format!(
                "value count {} does not match {}×{} grid",
                values.len(),
                grid_s.len(),
                grid_i.len()
            )));
        }
        if kind == JointKind::Intensity {
            for v in &values {
                if v.im != 0.0 || v.re < 0.0 {
                    return Err(Error::invalid("intensity values must be non-negative reals"));
                }
            }
        }
        Ok(Self { grid_s, grid_i, values, kind, normalized: false })
    }

    #[inline]
    pub fn at(&self, s: usize, i: usize) -> Complex64 {
        self.values[s * self.grid_i.len() + i]
    }

    /// |F|² at a cell, honoring the value kind.
    #[inline]
    pub fn intensity_at(&self, s: usize, i: usize) -> f64 {
        let v = self.at(s, i);
        match self.kind {
            JointKind::Amplitude => v.norm_sqr(),
            JointKind::Intensity => v.re,
        }
    }

    /// Σ|values|² (amplitude kind) or Σ values (intensity kind).
    pub fn total_weight(&self) -> f64 {
        match self.kind {
            JointKind::Amplitude => self.values.iter().map(|v| v.norm_sqr()).sum(),
            JointKind::Intensity => self.values.iter().map(|v| v.re).sum(),
        }
    }

    /// Rescale so the total weight is 1.
    pub fn into_normalized(mut self) -> Result<Self> {
        let w = self.total_weight();
        if w <= 0.0 {
            return Err(Error::Degenerate("cannot normalize an all-zero joint spectrum".into()));
        }
        let scale = match self.kind {
            JointKind::Amplitude => 1.0 / w.sqrt(),
            JointKind::Intensity => 1.0 / w,
        };
        for v in &mut self.values {
            *v *= scale;
        }
        self.normalized = true;
        Ok(self)
    }
}

fn common_step(grid_s: &FrequencyGrid, grid_i: &FrequencyGrid) -> Result<f64> {
    let (ds, di) = (grid_s.step, grid_i.step);
    if (ds - di).abs() > 1e-9 * ds {
        return Err(Error::invalid(format!(
            "signal and idler grids must share one spacing, got {ds} and {di}"
        )));
    }
    Ok(ds)
}

/// Pump comb used inside the JSA sums: points every `d` across the pump
/// support.
fn pump_lattice(center: f64, half_support: f64, d: f64) -> Vec<f64> {
    let n_side = (half_support / d).floor() as i64;
    (-n_side..=n_side).map(|k| center + k as f64 * d).collect()
}

/// Effective JSA for a coherent pump: amplitude-coherent sum over pump
/// components,
/// `F(ωs,ωi) = Σ_p α(ωp)·α(ωs+ωi−ωp)·A(ωp, ωs+ωi−ωp → ωs, ωi)·d`,
/// with `A` the split-step conversion amplitude evaluated at `input_power`.
///
/// The Gaussian shape must be resolved by at least 8 grid points across its
/// amplitude FWHM; the rectangular shape is allowed down to a single bin
/// (the monochromatic limit).
pub fn build_jsa_coherent(
    pump: &CoherentPump,
    wg: &WaveguideSpec,
    disp: &DispersionModel,
    grid_s: &FrequencyGrid,
    grid_i: &FrequencyGrid,
    input_power: f64,
) -> Result<JointSpectrum> {
    let d = common_step(grid_s, grid_i)?;
    if pump.shape == PumpShape::Gaussian {
        let fwhm = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * pump.bandwidth;
        if fwhm / d < 8.0 {
            return Err(Error::Resolution(format!(
                "grid spacing {d:.3e} resolves only {:.1} points across the pump FWHM \
                 {fwhm:.3e}; need ≥ 8",
                fwhm / d
            )));
        }
    }
    let support = pump.support();
    let comb = pump_lattice(pump.center, 0.5 * (support.hi - support.lo), d);
    let tol = 0.5 * d;

    let mi = grid_i.len();
    let rows = map_indexed(grid_s.len(), |si| {
        let omega_s = grid_s.point(si);
        let mut row = vec![Complex64::new(0.0, 0.0); mi];
        for (ii, cell) in row.iter_mut().enumerate() {
            let omega_i = grid_i.point(ii);
            let u = omega_s + omega_i;
            let mut acc = Complex64::new(0.0, 0.0);
            for &omega_p in &comb {
                let a1 = pump.amplitude(omega_p);
                if a1 == 0.0 {
                    continue;
                }
                let partner = u - omega_p;
                let a2 = pump.amplitude(partner);
                if a2 == 0.0 {
                    continue;
                }
                let dk = phase_mismatch(omega_p, partner, omega_s, omega_i, disp, tol)?;
                acc += a1 * a2 * split_step_from_mismatch(dk, wg, input_power) * d;
            }
            *cell = acc;
        }
        Ok::<_, Error>(row)
    });
    let mut values = Vec::with_capacity(grid_s.len() * mi);
    for row in rows {
        values.extend(row?);
    }
    JointSpectrum::new(grid_s.clone(), grid_i.clone(), values, JointKind::Amplitude)
}

/// How to assemble the incoherent effective JSA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncoherentJsaMode {
    /// Deterministic recipe: sum the squared terms, then take the root.
    IntensitySum,
    /// Ensemble average of |coherent-style sum with random phases|², then the
    /// root. One independent phase per pump-combination term, as each
    /// combination's accumulated phase is uncorrelated with the others'.
    MonteCarlo { seed: u64, ensembles: usize },
}

/// Per-cell squared term amplitudes |a_p|² = I(ωp)·I(ωs+ωi−ωp)·|A|², shared
/// by both incoherent construction routes. Component spacing must equal the
/// grid spacing.
fn incoherent_terms(
    pump: &IncoherentPump,
    wg: &WaveguideSpec,
    disp: &DispersionModel,
    grid_s: &FrequencyGrid,
    grid_i: &FrequencyGrid,
    input_power: f64,
) -> Result<Vec<Vec<f64>>> {
    let d = common_step(grid_s, grid_i)?;
    if (pump.spacing - d).abs() > 1e-9 * d {
        return Err(Error::invalid(format!(
            "incoherent component spacing {:.6e} must equal the grid spacing {d:.6e}",
            pump.spacing
        )));
    }
    let tol = 0.5 * d;
    let mi = grid_i.len();
    let rows = map_indexed(grid_s.len(), |si| {
        let omega_s = grid_s.point(si);
        let mut row: Vec<Vec<f64>> = Vec::with_capacity(mi);
        for ii in 0..mi {
            let omega_i = grid_i.point(ii);
            let u = omega_s + omega_i;
            let mut terms = Vec::new();
            for &(omega_p, int_p) in &pump.components {
                if int_p == 0.0 {
                    continue;
                }
                let partner = u - omega_p;
                let int_q = pump.intensity_at(partner);
                if int_q == 0.0 {
                    continue;
                }
                let dk = phase_mismatch(omega_p, partner, omega_s, omega_i, disp, tol)?;
                let a = split_step_from_mismatch(dk, wg, input_power);
                terms.push(int_p * int_q * a.norm_sqr());
            }
            row.push(terms);
        }
        Ok::<_, Error>(row)
    });
    let mut out = Vec::with_capacity(grid_s.len() * mi);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

/// Effective JSA for an incoherent pump.
pub fn build_jsa_incoherent(
    pump: &IncoherentPump,
    wg: &WaveguideSpec,
    disp: &DispersionModel,
    grid_s: &FrequencyGrid,
    grid_i: &FrequencyGrid,
    input_power: f64,
    mode: IncoherentJsaMode,
) -> Result<JointSpectrum> {
    let terms = incoherent_terms(pump, wg, disp, grid_s, grid_i, input_power)?;
    let values: Vec<Complex64> = match mode {
        IncoherentJsaMode::IntensitySum => terms
            .iter()
            .map(|t| Complex64::new(t.iter().sum::<f64>().sqrt(), 0.0))
            .collect(),
        IncoherentJsaMode::MonteCarlo { seed, ensembles } => {
            if ensembles == 0 {
                return Err(Error::invalid("need at least one Monte-Carlo ensemble"));
            }
            let (mean, _) = mc_intensity_mean(&terms, seed, ensembles);
            mean.into_iter().map(|m| Complex64::new(m.sqrt(), 0.0)).collect()
        }
    };
    JointSpectrum::new(grid_s.clone(), grid_i.clone(), values, JointKind::Amplitude)
}

/// Monte-Carlo phase-averaged |Σ a_p e^{iφ_p}|² per cell, with the standard
/// error of each mean. Used by the MonteCarlo mode and by validation tests.
pub fn mc_intensity_mean(
    term_norms_sq: &[Vec<f64>],
    seed: u64,
    ensembles: usize,
) -> (Vec<f64>, Vec<f64>) {
    let stats: Vec<(f64, f64)> = map_indexed(term_norms_sq.len(), |idx| {
        let amps: Vec<f64> = term_norms_sq[idx].iter().map(|t| t.sqrt()).collect();
        if amps.is_empty() {
            return (0.0, 0.0);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64 + 1);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..ensembles {
            let mut s = Complex64::new(0.0, 0.0);
            for &a in &amps {
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                s += Complex64::from_polar(a, phi);
            }
            let v = s.norm_sqr();
            sum += v;
            sum_sq += v * v;
        }
        let n = ensembles as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let stderr = if ensembles > 1 { (var / (n - 1.0)).sqrt() } else { f64::INFINITY };
        (mean, stderr)
    });
    stats.into_iter().unzip()
}

/// Apply per-arm filter transmittances. Amplitude kind multiplies by
/// `√(t_s·t_i)`, intensity kind by `t_s·t_i`.
pub fn apply_filters(
    js: &JointSpectrum,
    t_s: &[f64],
    t_i: &[f64],
    renormalize: bool,
) -> Result<JointSpectrum> {
    if t_s.len() != js.grid_s.len() || t_i.len() != js.grid_i.len() {
        return Err(Error::invalid("filter sample count must match the grids"));
    }
    for &t in t_s.iter().chain(t_i.iter()) {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("transmittance {t} out of [0, 1]")));
        }
    }
    let mi = js.grid_i.len();
    let values = js
        .values
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let w = t_s[idx / mi] * t_i[idx % mi];
            match js.kind {
                JointKind::Amplitude => v * w.sqrt(),
                JointKind::Intensity => v * w,
            }
        })
        .collect();
    let out = JointSpectrum::new(js.grid_s.clone(), js.grid_i.clone(), values, js.kind)?;
    if renormalize {
        out.into_normalized()
    } else {
        Ok(out)
    }
}

/// Schmidt decomposition outcome.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Σλ², in (0, 1].
    pub purity: f64,
    /// Normalized Schmidt coefficients λ_k, descending.
    pub coefficients: Vec<f64>,
}

/// Schmidt purity of an amplitude-kind joint spectrum via singular value
/// decomposition: λ_k = σ_k²/Σσ_k², purity = Σλ_k². Singular values below
/// 1e-12·σ_max are truncated.
pub fn schmidt_purity(js: &JointSpectrum) -> Result<SchmidtDecomposition> {
    if js.kind != JointKind::Amplitude {
        return Err(Error::invalid("Schmidt decomposition needs an amplitude-kind spectrum"));
    }
    if js.total_weight() <= 0.0 {
        return Err(Error::Degenerate("all-zero joint spectrum".into()));
    }
    let m = nalgebra::DMatrix::from_row_iterator(
        js.grid_s.len(),
        js.grid_i.len(),
        js.values.iter().copied(),
    );
    let svals = m.singular_values();
    let smax = svals.iter().fold(0.0_f64, |a, &b| a.max(b));
    let kept: Vec<f64> = svals.iter().copied().filter(|&s| s > 1e-12 * smax).collect();
    let total: f64 = kept.iter().map(|s| s * s).sum();
    let mut coefficients: Vec<f64> = kept.iter().map(|s| s * s / total).collect();
    coefficients.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let purity = coefficients.iter().map(|l| l * l).sum();
    Ok(SchmidtDecomposition { purity, coefficients })
}

/// Channelized joint spectral intensity:
/// entry (a,b) = Σ_{s,i} |F(s,i)|²·T_a(ωs)·T_b(ωi)·d_s·d_i, unnormalized.
pub fn channel_jsi_matrix(
    js: &JointSpectrum,
    bank_s: &ChannelBank,
    bank_i: &ChannelBank,
) -> Result<Vec<Vec<f64>>> {
    if bank_s.grid != js.grid_s || bank_i.grid != js.grid_i {
        return Err(Error::invalid("channel banks must be sampled on the joint spectrum's grids"));
    }
    let d2 = js.grid_s.step * js.grid_i.step;
    let mi = js.grid_i.len();
    let rows = map_indexed(bank_s.channels.len(), |a| {
        let ta = &bank_s.channels[a].transmittance;
        bank_i
            .channels
            .iter()
            .map(|chb| {
                let tb = &chb.transmittance;
                let mut acc = 0.0;
                for s in 0..js.grid_s.len() {
                    if ta[s] == 0.0 {
                        continue;
                    }
                    for i in 0..mi {
                        if tb[i] == 0.0 {
                            continue;
                        }
                        acc += js.intensity_at(s, i) * ta[s] * tb[i] * d2;
                    }
                }
                acc
            })
            .collect()
    });
    Ok(rows)
}

/// Serializable dump of a joint spectrum (complex values as [re, im]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointSpectrumDump {
    pub grid_s: FrequencyGrid,
    pub grid_i: FrequencyGrid,
    pub values: Vec<[f64; 2]>,
    pub kind: JointKind,
    pub normalized: bool,
}

impl From<&JointSpectrum> for JointSpectrumDump {
    fn from(js: &JointSpectrum) -> Self {
        Self {
            grid_s: js.grid_s.clone(),
            grid_i: js.grid_i.clone(),
            values: js.values.iter().map(|v| [v.re, v.im]).collect(),
            kind: js.kind,
            normalized: js.normalized,
        }
    }
}
