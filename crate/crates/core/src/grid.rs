//! Uniform angular-frequency grids and band geometry.
//!
//! Everything downstream (pump combs, joint spectra, channel transmittances)
//! lives on a [`FrequencyGrid`]: `M` points `start + k·d`, strictly
//! increasing. [`extend_boundaries`] implements the boundary redefinition
//! used before channelized counting: the signal/idler collection bands are
//! padded until they are symmetric about the pump center, so every generated
//! photon whose twin escapes the nominal bands still has a grid slot (with
//! zero transmittance) and single-side counts stay complete.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid of angular frequencies (rad/s): `start + k·d`, `k ∈ [0, M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    /// First grid point (rad/s).
    pub start: f64,
    /// Spacing between points (rad/s), strictly positive.
    #[serde(rename = "d")]
    pub step: f64,
    /// Number of points, at least 2.
    #[serde(rename = "M")]
    pub len: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid(format!("grid spacing must be > 0, got {step}")));
        }
        if len < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {len}")));
        }
        if !start.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        Ok(Self { start, step, len })
    }

    /// Grid centered on `center` with `len` points and total span `span`
    /// (distance from first to last point).
    pub fn centered(center: f64, span: f64, len: usize) -> Result<Self> {
        if !(span > 0.0) {
            return Err(Error::invalid(format!("grid span must be > 0, got {span}")));
        }
        let step = span / (len as f64 - 1.0);
        Self::new(center - span / 2.0, step, len)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k < self.len);
        self.start + k as f64 * self.step
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // len >= 2 by construction
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.point(k))
    }

    /// Index of the grid point nearest to `omega`, if `omega` lies within
    /// half a step of the grid's span.
    pub fn nearest_index(&self, omega: f64) -> Option<usize> {
        let t = (omega - self.start) / self.step;
        let k = t.round();
        if k < 0.0 || k > (self.len - 1) as f64 {
            return None;
        }
        Some(k as usize)
    }

    /// True when `omega` lies within `tol` of some grid point.
    pub fn snaps_to(&self, omega: f64, tol: f64) -> Option<usize> {
        let k = self.nearest_index(omega)?;
        ((omega - self.point(k)).abs() <= tol).then_some(k)
    }
}

/// Closed frequency interval `[lo, hi]` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid(format!("band must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lo && omega <= self.hi
    }
}

/// Result of the boundary redefinition: the maximum/minimum detuning bounds
/// and the bands padded to symmetry about the pump center. Padded regions are
/// meant to carry zero transmittance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryExtension {
    /// Maximum detuning |ω − ω0| over both padded bands (multiple of `d`).
    pub d_cap: f64,
    /// Minimum detuning over both padded bands (multiple of `d`).
    pub d_floor: f64,
    pub signal: Band,
    pub idler: Band,
}

/// Pad the signal and idler bands so they are mirror images about the pump
/// center `omega0`, and report the detuning bounds.
///
/// The outer bound is rounded up and the inner bound down to integer
/// multiples of the grid spacing `d`, so the padded bands never discard
/// in-band photons. Bands must lie on opposite sides of `omega0`.
pub fn extend_boundaries(
    signal: Band,
    idler: Band,
    omega0: f64,
    d: f64,
) -> Result<BoundaryExtension> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!("grid spacing must be > 0, got {d}")));
    }
    let signal_above = match (signal.lo >= omega0, idler.hi <= omega0) {
        (true, true) => true,
        _ => match (idler.lo >= omega0, signal.hi <= omega0) {
            (true, true) => false,
            _ => {
                return Err(Error::InvalidGeometry(format!(
                    "signal/idler bands must lie on opposite sides of the pump center \
                     (signal [{}, {}], idler [{}, {}], pump {omega0})",
                    signal.lo, signal.hi, idler.lo, idler.hi
                )))
            }
        },
    };
    let (upper, lower) = if signal_above { (signal, idler) } else { (idler, signal) };

    // Detuning intervals of both bands, as positive offsets from omega0.
    let up = (upper.lo - omega0, upper.hi - omega0);
    let lo = (omega0 - lower.hi, omega0 - lower.lo);

    let outer = up.1.max(lo.1);
    let inner = up.0.min(lo.0);

    // Snap: outer up, inner down, to multiples of d. A small epsilon keeps
    // detunings that are already exact multiples from jumping a whole step.
    let eps = 1e-9;
    let d_cap = (outer / d - eps).ceil().max(1.0) * d;
    let d_floor = ((inner / d + eps).floor().max(0.0)) * d;

    let upper_padded = Band { lo: omega0 + d_floor, hi: omega0 + d_cap };
    let lower_padded = Band { lo: omega0 - d_cap, hi: omega0 - d_floor };
    let (signal, idler) = if signal_above {
        (upper_padded, lower_padded)
    } else {
        (lower_padded, upper_padded)
    };
    Ok(BoundaryExtension { d_cap, d_floor, signal, idler })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_points_strictly_increasing() {
        let g = FrequencyGrid::new(10.0, 0.5, 5).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts.len(), 5);
        for w in pts.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_relative_eq!(g.end(), 12.0);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(FrequencyGrid::new(0.0, 0.0, 4).is_err());
        assert!(FrequencyGrid::new(0.0, -1.0, 4).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn nearest_index_snaps_within_half_step() {
        let g = FrequencyGrid::new(0.0, 1.0, 10).unwrap();
        assert_eq!(g.nearest_index(3.4), Some(3));
        assert_eq!(g.nearest_index(3.6), Some(4));
        assert_eq!(g.nearest_index(-0.6), None);
        assert_eq!(g.nearest_index(9.4), Some(9));
        assert_eq!(g.nearest_index(9.6), None);
    }

    #[test]
    fn symmetric_bands_are_a_fixed_point() {
        // Detunings already multiples of d = 1.
        let s = Band::new(105.0, 110.0).unwrap();
        let i = Band::new(90.0, 95.0).unwrap();
        let ext = extend_boundaries(s, i, 100.0, 1.0).unwrap();
        assert_eq!(ext.signal, s);
        assert_eq!(ext.idler, i);
        assert_relative_eq!(ext.d_cap, 10.0);
        assert_relative_eq!(ext.d_floor, 5.0);
    }

    #[test]
    fn wider_signal_pads_idler_low_side() {
        // Signal band reaches 2d further out on its high side; the idler band
        // must grow 2d on its low side.
        let d = 1.0;
        let s = Band::new(105.0, 112.0).unwrap();
        let i = Band::new(90.0, 95.0).unwrap();
        let ext = extend_boundaries(s, i, 100.0, d).unwrap();
        assert_eq!(ext.signal, s);
        assert_eq!(ext.idler, Band { lo: 88.0, hi: 95.0 });
        assert_relative_eq!(ext.d_cap, 12.0);
    }

    #[test]
    fn detunings_snap_outward_to_grid_multiples() {
        // Bands start 3.5d from the pump: floor snaps inner bound to 3d,
        // ceil snaps outer to 8d (7.5d up).
        let d = 2.0;
        let s = Band::new(100.0 + 7.0, 100.0 + 15.0).unwrap();
        let i = Band::new(100.0 - 15.0, 100.0 - 7.0).unwrap();
        let ext = extend_boundaries(s, i, 100.0, d).unwrap();
        assert_relative_eq!(ext.d_floor, 6.0); // 3.5d -> 3d
        assert_relative_eq!(ext.d_cap, 16.0); // 7.5d -> 8d
        assert_relative_eq!(ext.signal.lo, 106.0);
        assert_relative_eq!(ext.signal.hi, 116.0);
    }

    #[test]
    fn bands_spanning_pump_rejected() {
        let s = Band::new(95.0, 110.0).unwrap();
        let i = Band::new(90.0, 99.0).unwrap();
        assert!(matches!(
            extend_boundaries(s, i, 100.0, 1.0),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn swapped_sides_allowed() {
        // Signal below the pump, idler above.
        let s = Band::new(90.0, 95.0).unwrap();
        let i = Band::new(105.0, 110.0).unwrap();
        let ext = extend_boundaries(s, i, 100.0, 1.0).unwrap();
        assert!(ext.signal.hi < 100.0);
        assert!(ext.idler.lo > 100.0);
        // Max detunings mirror exactly.
        assert_relative_eq!(100.0 - ext.signal.lo, ext.idler.hi - 100.0);
    }
}
