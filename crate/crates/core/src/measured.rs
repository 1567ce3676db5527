//! Ingestion of measured wavelength spectra.
//!
//! Input files are UTF-8 CSV with lines `wavelength_nm,value`, optional `#`
//! comment lines and an optional `wavelength_nm,value` header. Raw spectra
//! are high-pass filtered (values below a relative threshold of the maximum
//! are zeroed), converted from wavelength to angular frequency, and linearly
//! interpolated onto a uniform [`FrequencyGrid`].

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::SPEED_OF_LIGHT;

/// What the sample values represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Intensity,
    Transmittance,
}

/// Measured wavelength-domain samples, sorted by wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSpectrum {
    /// `(wavelength_nm, value)`, strictly increasing wavelengths, values ≥ 0.
    pub samples: Vec<(f64, f64)>,
    pub kind: SpectrumKind,
}

impl MeasuredSpectrum {
    pub fn new(mut samples: Vec<(f64, f64)>, kind: SpectrumKind) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("no samples".into()));
        }
        for &(w, v) in &samples {
            if !w.is_finite() || !v.is_finite() {
                return Err(Error::Data("non-finite sample".into()));
            }
            if v < 0.0 {
                return Err(Error::Data(format!("negative value {v} at {w} nm")));
            }
        }
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in samples.windows(2) {
            if w[1].0 == w[0].0 {
                return Err(Error::Data(format!("duplicate wavelength {} nm", w[0].0)));
            }
        }
        Ok(Self { samples, kind })
    }
}

/// Parse a spectrum CSV file.
pub fn load_measured_spectrum(path: impl AsRef<Path>, kind: SpectrumKind) -> Result<MeasuredSpectrum> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_spectrum(&text, kind)
}

/// Parse spectrum CSV text (exposed separately so tests need no files).
pub fn parse_spectrum(text: &str, kind: SpectrumKind) -> Result<MeasuredSpectrum> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        // Optional header.
        if idx == 0 && line.eq_ignore_ascii_case("wavelength_nm,value") {
            continue;
        }
        let mut parts = line.split(',');
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 'wavelength_nm,value', got {line:?}"),
                })
            }
        };
        let wl: f64 = a.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad wavelength {a:?}"),
        })?;
        let val: f64 = b.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad value {b:?}"),
        })?;
        samples.push((wl, val));
    }
    MeasuredSpectrum::new(samples, kind)
}

/// Convert a wavelength in nm to angular frequency in rad/s.
#[inline]
pub fn wavelength_nm_to_omega(lambda_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / (lambda_nm * 1e-9)
}

/// High-pass filter, convert to angular frequency, and linearly interpolate
/// onto `grid`. `threshold` is a fraction of the spectrum maximum; values
/// below `threshold·max` are zeroed before conversion.
pub fn resample_to_grid(
    m: &MeasuredSpectrum,
    grid: &FrequencyGrid,
    threshold: f64,
) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::invalid(format!("threshold must be in [0, 1), got {threshold}")));
    }
    let max = m.samples.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    let cut = threshold * max;

    // Wavelength ascending -> frequency descending; reverse for ascending ω.
    let mut pts: Vec<(f64, f64)> = m
        .samples
        .iter()
        .map(|&(wl, v)| (wavelength_nm_to_omega(wl), if v < cut { 0.0 } else { v }))
        .collect();
    pts.reverse();

    let (w_lo, w_hi) = (pts[0].0, pts[pts.len() - 1].0);
    if grid.start < w_lo || grid.end() > w_hi {
        return Err(Error::OutOfRange(format!(
            "grid [{:.6e}, {:.6e}] rad/s exceeds data span [{:.6e}, {:.6e}]",
            grid.start,
            grid.end(),
            w_lo,
            w_hi
        )));
    }

    let mut out = Vec::with_capacity(grid.len());
    let mut j = 0usize;
    for w in grid.points() {
        while j + 2 < pts.len() && pts[j + 1].0 <= w {
            j += 1;
        }
        let (x0, y0) = pts[j];
        let (x1, y1) = pts[j + 1];
        let t = ((w - x0) / (x1 - x0)).clamp(0.0, 1.0);
        out.push(y0 + t * (y1 - y0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_line_csv() {
        let m = parse_spectrum("1550.0,0.5\n1551.0,0.7\n", SpectrumKind::Intensity).unwrap();
        assert_eq!(m.samples.len(), 2);
        assert_eq!(m.samples[0], (1550.0, 0.5));
    }

    #[test]
    fn comments_and_header_skipped() {
        let text = "wavelength_nm,value\n# calibration lamp\n1550.0,0.5\n# tail\n1551.0,0.7\n";
        let m = parse_spectrum(text, SpectrumKind::Intensity).unwrap();
        assert_eq!(m.samples.len(), 2);
    }

    #[test]
    fn empty_file_errors() {
        let err = parse_spectrum("", SpectrumKind::Intensity).unwrap_err();
        assert!(err.to_string().contains("no samples"));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse_spectrum("1550.0,0.5\noops\n", SpectrumKind::Intensity).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn duplicate_wavelength_rejected() {
        let err = parse_spectrum("1550.0,0.5\n1550.0,0.7\n", SpectrumKind::Intensity).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn wavelength_conversion() {
        // λ = 1550 nm -> ν ≈ 193.414 THz.
        let w = wavelength_nm_to_omega(1550.0);
        assert_relative_eq!(w / TAU / 1e12, 193.414489, max_relative = 1e-6);
    }

    #[test]
    fn flat_spectrum_resamples_flat() {
        let m = parse_spectrum("1540,1.0\n1550,1.0\n1560,1.0\n", SpectrumKind::Intensity).unwrap();
        let lo = wavelength_nm_to_omega(1559.0);
        let hi = wavelength_nm_to_omega(1541.0);
        let grid = FrequencyGrid::new(lo, (hi - lo) / 15.0, 16).unwrap();
        let vals = resample_to_grid(&m, &grid, 0.1).unwrap();
        for v in vals {
            assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn grid_outside_span_errors() {
        let m = parse_spectrum("1549,1.0\n1551,1.0\n", SpectrumKind::Intensity).unwrap();
        let lo = wavelength_nm_to_omega(1560.0);
        let grid = FrequencyGrid::new(lo, 1e9, 4).unwrap();
        assert!(matches!(resample_to_grid(&m, &grid, 0.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn threshold_zeroes_noise_floor_preserves_apex() {
        // Triangular peak with a 5% noise floor; threshold 10% clears the
        // floor and keeps the apex. Interpolation checked by hand at the grid
        // points between samples.
        let text = "1548,0.05\n1549,0.05\n1550,1.0\n1551,0.05\n1552,0.05\n";
        let m = parse_spectrum(text, SpectrumKind::Intensity).unwrap();
        let w_peak = wavelength_nm_to_omega(1550.0);
        let w1549 = wavelength_nm_to_omega(1549.0); // above w_peak in frequency
        // Two-point grid: the apex and the midpoint toward 1549 nm.
        let mid = 0.5 * (w_peak + w1549);
        let grid = FrequencyGrid::new(w_peak, mid - w_peak, 2).unwrap();
        let vals = resample_to_grid(&m, &grid, 0.1).unwrap();
        assert_relative_eq!(vals[0], 1.0, max_relative = 1e-12);
        // Floor zeroed, so the midpoint interpolates between the apex and 0.
        assert_relative_eq!(vals[1], 0.5, max_relative = 1e-9);
    }

    #[test]
    fn resampling_already_gridded_data_is_idempotent() {
        // Samples placed exactly on the target grid, threshold 0: the
        // round trip reproduces the inputs within interpolation error.
        let grid_lo = wavelength_nm_to_omega(1552.0);
        let grid_hi = wavelength_nm_to_omega(1548.0);
        let grid = FrequencyGrid::new(grid_lo, (grid_hi - grid_lo) / 7.0, 8).unwrap();
        let value_at = |w: f64| 0.25 + (w / grid_lo - 1.0) * 3.0;
        let samples: Vec<(f64, f64)> = grid
            .points()
            .map(|w| (TAU * SPEED_OF_LIGHT / w * 1e9, value_at(w)))
            .collect();
        let m = MeasuredSpectrum::new(samples, SpectrumKind::Transmittance).unwrap();
        let vals = resample_to_grid(&m, &grid, 0.0).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert_relative_eq!(*v, value_at(grid.point(k)), max_relative = 1e-12, epsilon = 1e-12);
        }
    }
}
