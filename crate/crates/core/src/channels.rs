//! DWDM channel banks.
//!
//! Channel labels follow the ITU convention: `Cnn` is centered at
//! `190.0 + 0.1·nn` THz (so C34 = 193.4 THz). Banks hold per-channel
//! transmittance sampled on a shared [`FrequencyGrid`]; simulation defaults
//! use brick-wall shapes, measured shapes can be resampled in.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::measured::{resample_to_grid, MeasuredSpectrum};

/// Center of the ITU channel `Cnn` in rad/s.
pub fn itu_center(label: &str) -> Result<f64> {
    let digits = label
        .strip_prefix('C')
        .or_else(|| label.strip_prefix('c'))
        .ok_or_else(|| Error::invalid(format!("channel label {label:?} must look like 'C34'")))?;
    let nn: u32 = digits
        .parse()
        .map_err(|_| Error::invalid(format!("channel label {label:?} must look like 'C34'")))?;
    Ok(TAU * (190.0 + 0.1 * nn as f64) * 1e12)
}

/// One DWDM channel: label, center and transmittance samples on the bank grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    pub center: f64,
    pub transmittance: Vec<f64>,
}

/// A set of channels sharing one frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBank {
    pub grid: FrequencyGrid,
    pub channels: Vec<Channel>,
}

impl ChannelBank {
    pub fn new(grid: FrequencyGrid) -> Self {
        Self { grid, channels: Vec::new() }
    }

    fn check_label(&self, label: &str) -> Result<()> {
        if self.channels.iter().any(|c| c.label == label) {
            return Err(Error::invalid(format!("duplicate channel label {label:?}")));
        }
        Ok(())
    }

    /// Add a brick-wall channel: transmittance 1 within ±width/2 of the
    /// center, 0 outside.
    pub fn add_brick_wall(&mut self, label: &str, center: f64, width: f64) -> Result<()> {
        self.check_label(label)?;
        if !(width > 0.0) {
            return Err(Error::invalid(format!("channel width must be > 0, got {width}")));
        }
        let transmittance = self
            .grid
            .points()
            .map(|w| if (w - center).abs() <= 0.5 * width { 1.0 } else { 0.0 })
            .collect();
        self.channels.push(Channel { label: label.to_string(), center, transmittance });
        Ok(())
    }

    /// Add a brick-wall channel on the ITU grid.
    pub fn add_itu_brick_wall(&mut self, label: &str, width: f64) -> Result<()> {
        let center = itu_center(label)?;
        self.add_brick_wall(label, center, width)
    }

    /// Add a channel from a measured transmittance spectrum, resampled onto
    /// the bank grid with the given high-pass threshold.
    pub fn add_measured(&mut self, label: &str, center: f64, m: &MeasuredSpectrum, threshold: f64) -> Result<()> {
        self.check_label(label)?;
        let transmittance = resample_to_grid(m, &self.grid, threshold)?;
        for &t in &transmittance {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!(
                    "transmittance {t} out of [0, 1] in channel {label:?}"
                )));
            }
        }
        self.channels.push(Channel { label: label.to_string(), center, transmittance });
        Ok(())
    }

    pub fn channel(&self, label: &str) -> Result<&Channel> {
        self.channels
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::invalid(format!("no channel labelled {label:?}")))
    }

    /// Element-wise union (max) of several channels' transmittances.
    pub fn union_transmittance(&self, labels: &[&str]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.grid.len()];
        for label in labels {
            let ch = self.channel(label)?;
            for (o, &t) in out.iter_mut().zip(&ch.transmittance) {
                *o = f64::max(*o, t);
            }
        }
        Ok(out)
    }

    /// All-pass transmittance on the bank grid.
    pub fn all_pass(&self) -> Vec<f64> {
        vec![1.0; self.grid.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn itu_mapping() {
        assert_relative_eq!(itu_center("C34").unwrap(), TAU * 193.4e12, max_relative = 1e-12);
        assert_relative_eq!(itu_center("C20").unwrap(), TAU * 192.0e12, max_relative = 1e-12);
        assert_relative_eq!(itu_center("C48").unwrap(), TAU * 194.8e12, max_relative = 1e-12);
        assert!(itu_center("D34").is_err());
        assert!(itu_center("Cxx").is_err());
    }

    #[test]
    fn brick_wall_shape() {
        let grid = FrequencyGrid::new(0.0, 1.0, 11).unwrap();
        let mut bank = ChannelBank::new(grid);
        bank.add_brick_wall("A", 5.0, 4.0).unwrap();
        let t = &bank.channel("A").unwrap().transmittance;
        assert_eq!(t[2], 0.0);
        assert_eq!(t[3], 1.0);
        assert_eq!(t[7], 1.0);
        assert_eq!(t[8], 0.0);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let grid = FrequencyGrid::new(0.0, 1.0, 4).unwrap();
        let mut bank = ChannelBank::new(grid);
        bank.add_brick_wall("A", 1.0, 1.0).unwrap();
        assert!(bank.add_brick_wall("A", 2.0, 1.0).is_err());
    }

    #[test]
    fn union_is_elementwise_max() {
        let grid = FrequencyGrid::new(0.0, 1.0, 6).unwrap();
        let mut bank = ChannelBank::new(grid);
        bank.add_brick_wall("A", 1.0, 2.0).unwrap();
        bank.add_brick_wall("B", 4.0, 2.0).unwrap();
        let u = bank.union_transmittance(&["A", "B"]).unwrap();
        assert_eq!(u, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    }
}
