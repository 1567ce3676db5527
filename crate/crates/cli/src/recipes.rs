//! Canned configurations reproducing the headline simulation figures.
//!
//! * [`fig1`] — joint spectral amplitudes and Schmidt purity for coherent vs
//!   incoherent pumping (200 GHz rectangular pump at C34, 200 GHz brick-wall
//!   filters at C20/C48, flat phase matching).
//! * [`fig_s2`] — normalized coincidence and idler-arm single-side counts
//!   against pump detuning and against pump bandwidth, square pump, all-pass
//!   collection between the high-pass edge and the phase-matching tail.
//! * [`fig_s3d`] — CAR against pump power with and without noise, plus the
//!   extremum analysis.

use std::f64::consts::TAU;

use sfwm_core::biphoton::{
    apply_filters, build_jsa_coherent, build_jsa_incoherent, schmidt_purity, IncoherentJsaMode,
    JointSpectrum, SchmidtDecomposition,
};
use sfwm_core::channels::itu_center;
use sfwm_core::counting::{
    car, car_peak, sweep, ArmNoise, BrightnessCoeffs, CarPeak, CountingScenario, EfficiencyModel,
    NoiseModel, SweepRow, SweepVariable, DEFAULT_COINCIDENCE_WINDOW,
};
use sfwm_core::error::Result;
use sfwm_core::grid::{Band, FrequencyGrid};
use sfwm_core::pump::{CoherentPump, IncoherentPump, PumpShape};
use sfwm_core::waveguide::{DispersionModel, WaveguideSpec};

/// Purity contrast between pump coherences on the same filtered geometry.
#[derive(Debug, Clone)]
pub struct Fig1Outcome {
    pub coherent: SchmidtDecomposition,
    pub incoherent: SchmidtDecomposition,
    pub coherent_jsa: JointSpectrum,
    pub incoherent_jsa: JointSpectrum,
}

/// Default grid resolution for [`fig1`].
pub const FIG1_POINTS: usize = 256;

/// 200 GHz rectangular pump at C34, 200 GHz brick-wall filters at C20 (idler)
/// and C48 (signal), flat phase matching, `points` grid slots per axis.
pub fn fig1(points: usize, seed: u64) -> Result<Fig1Outcome> {
    let w0 = itu_center("C34")?;
    let signal_center = itu_center("C48")?;
    let idler_center = itu_center("C20")?;
    let width = TAU * 200e9;

    // Each axis spans the filter band ± one channel width, on a master
    // lattice anchored at the pump center.
    let span = 3.0 * width;
    let step = span / (points as f64 - 1.0);
    let half = (points as f64 - 1.0) / 2.0;
    let grid_about = |center: f64| -> Result<FrequencyGrid> {
        let offset = ((center - w0) / step).round();
        FrequencyGrid::new(w0 + (offset - half) * step, step, points)
    };
    let grid_s = grid_about(signal_center)?;
    let grid_i = grid_about(idler_center)?;

    let wg = WaveguideSpec::new(1.0, 1.0, 0.0, 1)?;
    let disp = DispersionModel::flat(w0);

    let brick = |grid: &FrequencyGrid, center: f64| -> Vec<f64> {
        grid.points().map(|w| if (w - center).abs() <= 0.5 * width { 1.0 } else { 0.0 }).collect()
    };
    let t_s = brick(&grid_s, signal_center);
    let t_i = brick(&grid_i, idler_center);

    let coherent_pump = CoherentPump::normalized(w0, width, PumpShape::Rectangular)?;
    let js_c = build_jsa_coherent(&coherent_pump, &wg, &disp, &grid_s, &grid_i, 1.0)?;
    let js_c = apply_filters(&js_c, &t_s, &t_i, true)?;

    let incoherent_pump = IncoherentPump::square_envelope(w0, width, step, seed)?;
    let js_i = build_jsa_incoherent(
        &incoherent_pump,
        &wg,
        &disp,
        &grid_s,
        &grid_i,
        1.0,
        IncoherentJsaMode::IntensitySum,
    )?;
    let js_i = apply_filters(&js_i, &t_s, &t_i, true)?;

    Ok(Fig1Outcome {
        coherent: schmidt_purity(&js_c)?,
        incoherent: schmidt_purity(&js_i)?,
        coherent_jsa: js_c,
        incoherent_jsa: js_i,
    })
}

/// Detuning/bandwidth response of the counting pipeline.
#[derive(Debug, Clone)]
pub struct FigS2Outcome {
    pub detuning_rows: Vec<SweepRow>,
    pub bandwidth_rows: Vec<SweepRow>,
}

/// The collection geometry behind [`fig_s2`] and [`fig_s3d`]: square pump at
/// C34, high-pass edge 100 GHz, collection out to 4 THz where the
/// phase-matching tail has decayed, β₂ = −8e-24 s²/m over 1 cm.
pub fn s2_base_scenario() -> Result<CountingScenario> {
    let wd = itu_center("C34")?;
    Ok(CountingScenario {
        pump_center: wd,
        pump_width: TAU * 200e9,
        signal_band: Band::new(wd + TAU * 100e9, wd + TAU * 4e12)?,
        idler_band: Band::new(wd - TAU * 4e12, wd - TAU * 100e9)?,
        grid_step: TAU * 10e9,
        wg: WaveguideSpec::new(0.01, 100.0, 0.0, 64)?,
        disp: DispersionModel::new(wd, 0.0, 0.0, -8e-24, 0.0, f64::INFINITY)?,
        eff: EfficiencyModel::unit(),
    })
}

/// Detuning sweep 0–100 GHz (11 points) at 200 GHz bandwidth, and bandwidth
/// sweep 50–500 GHz (10 points) at zero detuning. Noise off: the rows carry
/// the raw brightness coefficients.
pub fn fig_s2() -> Result<FigS2Outcome> {
    let base = s2_base_scenario()?;
    let noise = NoiseModel::quiet();
    let detunings: Vec<f64> = (0..=10).map(|k| TAU * 10e9 * k as f64).collect();
    let detuning_rows = sweep(SweepVariable::Detuning, &detunings, &base, &noise, 1.0)?;
    let bandwidths: Vec<f64> = (1..=10).map(|k| TAU * 50e9 * k as f64).collect();
    let bandwidth_rows = sweep(SweepVariable::Bandwidth, &bandwidths, &base, &noise, 1.0)?;
    Ok(FigS2Outcome { detuning_rows, bandwidth_rows })
}

/// CAR-vs-power response with and without noise.
#[derive(Debug, Clone)]
pub struct FigS3dOutcome {
    pub brightness: BrightnessCoeffs,
    pub noise: NoiseModel,
    pub powers: Vec<f64>,
    pub car_noisy: Vec<f64>,
    pub car_noise_free: Vec<f64>,
    pub peak: CarPeak,
}

/// Mirrored 200 GHz channel pair 1.4 THz from the pump; noise sized to put
/// the CAR peak near 0.3 mW.
pub fn fig_s3d() -> Result<FigS3dOutcome> {
    let wd = itu_center("C34")?;
    let half_width = TAU * 100e9;
    let offset = TAU * 1.4e12;
    let mut scenario = s2_base_scenario()?;
    scenario.signal_band = Band::new(wd + offset - half_width, wd + offset + half_width)?;
    scenario.idler_band = Band::new(wd - offset - half_width, wd - offset + half_width)?;
    let b = scenario.brightness()?;

    let p_peak = 3e-4;
    let noise = NoiseModel::new(
        ArmNoise::new(0.2 * b.b_sc_s * p_peak, b.b_sc_s * p_peak * p_peak)?,
        ArmNoise::new(0.2 * b.b_sc_i * p_peak, b.b_sc_i * p_peak * p_peak)?,
        DEFAULT_COINCIDENCE_WINDOW,
    )?;

    let n = 100;
    let (lo, hi) = (1e-5_f64, 1e-2_f64);
    let powers: Vec<f64> = (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect();
    let quiet = ArmNoise::quiet();
    let mut car_noisy = Vec::with_capacity(n);
    let mut car_noise_free = Vec::with_capacity(n);
    for &p in &powers {
        car_noisy.push(car(
            p,
            b.b_cc,
            (b.b_sc_s, &noise.signal),
            (b.b_sc_i, &noise.idler),
            noise.window,
        )?);
        car_noise_free.push(car(p, b.b_cc, (b.b_sc_s, &quiet), (b.b_sc_i, &quiet), noise.window)?);
    }
    let peak = car_peak(
        b.b_cc,
        (b.b_sc_s, &noise.signal),
        (b.b_sc_i, &noise.idler),
        noise.window,
        (1e-6, 1e-1),
    )?;
    Ok(FigS3dOutcome { brightness: b, noise, powers, car_noisy, car_noise_free, peak })
}
