//! Channelized counting: brightness coefficients, noise and efficiency
//! models, CAR and its extremum, Poissonian count simulation, heralded g².
//!
//! The pipeline enumerates pump-component pairs (ωp1, ωp2) and, for every
//! signal grid slot, snaps the energy-conserving idler ωp1+ωp2−ωs onto the
//! idler grid (off-grid sums land on the nearest slot, error ≤ d/2). Each
//! triple contributes `|A|²·E1·E2·d` with `A` the split-step amplitude at
//! unit power; coincidences weight by both arms' transmittance and the full
//! efficiency chain, single-side counts by one arm only. Dividing by the
//! squared pump power leaves power-quadratic brightness coefficients.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::biphoton::build_jsa_coherent;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::grid::{extend_boundaries, Band, FrequencyGrid};
use crate::pump::{IncoherentPump, PumpSpectrum};
use crate::waveguide::{phase_mismatch, split_step_from_mismatch, DispersionModel, WaveguideSpec};

/// Transmission and detection efficiencies, all in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    pub mu_ts: f64,
    pub mu_ti: f64,
    pub mu_ds: f64,
    pub mu_di: f64,
}

impl EfficiencyModel {
    pub fn new(mu_ts: f64, mu_ti: f64, mu_ds: f64, mu_di: f64) -> Result<Self> {
        for (name, v) in [("mu_ts", mu_ts), ("mu_ti", mu_ti), ("mu_ds", mu_ds), ("mu_di", mu_di)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        Ok(Self { mu_ts, mu_ti, mu_ds, mu_di })
    }

    pub fn unit() -> Self {
        Self { mu_ts: 1.0, mu_ti: 1.0, mu_ds: 1.0, mu_di: 1.0 }
    }

    /// μ_ts·μ_ti·μ_ds·μ_di applied to coincidences.
    pub fn coincidence(&self) -> f64 {
        self.mu_ts * self.mu_ti * self.mu_ds * self.mu_di
    }

    pub fn signal_arm(&self) -> f64 {
        self.mu_ts * self.mu_ds
    }

    pub fn idler_arm(&self) -> f64 {
        self.mu_ti * self.mu_di
    }
}

/// Per-arm noise: `N_sc = B·P² + a·P + N0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmNoise {
    /// Linear coefficient a (counts/s per W).
    pub linear: f64,
    /// Background N0 (counts/s).
    pub background: f64,
}

impl ArmNoise {
    pub fn new(linear: f64, background: f64) -> Result<Self> {
        if !(linear >= 0.0) || !(background >= 0.0) {
            return Err(Error::invalid("noise coefficients must be ≥ 0"));
        }
        Ok(Self { linear, background })
    }

    pub fn quiet() -> Self {
        Self { linear: 0.0, background: 0.0 }
    }
}

/// Two-arm noise model plus the coincidence window Δτ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub signal: ArmNoise,
    pub idler: ArmNoise,
    /// Coincidence window Δτ (s).
    pub window: f64,
}

/// The paper's time-bin width.
pub const DEFAULT_COINCIDENCE_WINDOW: f64 = 0.8e-9;

impl NoiseModel {
    pub fn new(signal: ArmNoise, idler: ArmNoise, window: f64) -> Result<Self> {
        if !(window > 0.0) {
            return Err(Error::invalid(format!("coincidence window must be > 0, got {window}")));
        }
        Ok(Self { signal, idler, window })
    }

    pub fn quiet() -> Self {
        Self { signal: ArmNoise::quiet(), idler: ArmNoise::quiet(), window: DEFAULT_COINCIDENCE_WINDOW }
    }
}

/// Power-quadratic brightness coefficients (rates at unit power).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrightnessCoeffs {
    pub b_cc: f64,
    pub b_sc_s: f64,
    pub b_sc_i: f64,
}

fn checked_transmittance(t: &[f64], grid: &FrequencyGrid, arm: &str) -> Result<()> {
    if t.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{arm} transmittance has {} samples for a {}-point grid",
            t.len(),
            grid.len()
        )));
    }
    for &v in t {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("{arm} transmittance {v} out of [0, 1]")));
        }
    }
    Ok(())
}

/// Accumulate brightness coefficients for a pump spectrum over channelized
/// signal/idler grids.
#[allow(clippy::too_many_arguments)]
pub fn pipeline_counts(
    pump: &PumpSpectrum,
    wg: &WaveguideSpec,
    disp: &DispersionModel,
    grid_s: &FrequencyGrid,
    t_s: &[f64],
    grid_i: &FrequencyGrid,
    t_i: &[f64],
    eff: &EfficiencyModel,
) -> Result<BrightnessCoeffs> {
    let d = grid_s.step;
    if (grid_i.step - d).abs() > 1e-9 * d {
        return Err(Error::invalid("signal and idler grids must share one spacing"));
    }
    checked_transmittance(t_s, grid_s, "signal")?;
    checked_transmittance(t_i, grid_i, "idler")?;

    match pump {
        PumpSpectrum::Incoherent(inc) => {
            pipeline_incoherent(inc, wg, disp, grid_s, t_s, grid_i, t_i, eff, d)
        }
        PumpSpectrum::Coherent(coh) => {
            // Rate accumulation needs the discrete pump convolution to be a
            // faithful quadrature, so the line shape must span several bins.
            // Model a monochromatic/CW laser as a single-component incoherent
            // comb instead; the physics is identical for one component.
            if let crate::pump::PumpShape::Rectangular = coh.shape {
                if coh.bandwidth < 4.0 * d {
                    return Err(Error::Resolution(format!(
                        "rectangular pump width {:.3e} spans fewer than 4 grid steps ({d:.3e}); \
                         for a monochromatic pump use a single-component incoherent comb",
                        coh.bandwidth
                    )));
                }
            }
            // Amplitude-coherent accumulation is exactly the effective JSA;
            // integrate it against the channel weights.
            let js = build_jsa_coherent(coh, wg, disp, grid_s, grid_i, 1.0)?;
            let integral_sq = coh.amplitude_integral().powi(2);
            if integral_sq == 0.0 {
                return Err(Error::Degenerate("coherent pump carries no power".into()));
            }
            let mi = grid_i.len();
            let mut cc = 0.0;
            let mut sc_s = 0.0;
            let mut sc_i = 0.0;
            for s in 0..grid_s.len() {
                for i in 0..mi {
                    let w = js.at(s, i).norm_sqr() * d * d;
                    cc += w * t_s[s] * t_i[i];
                    sc_s += w * t_s[s];
                    sc_i += w * t_i[i];
                }
            }
            // rate = κ²·|∫α|²/(2π)·Σ…; P = κ·|∫α|², so B = rate/P² loses κ.
            let norm = 1.0 / (2.0 * std::f64::consts::PI * integral_sq);
            Ok(BrightnessCoeffs {
                b_cc: cc * norm * eff.coincidence(),
                b_sc_s: sc_s * norm * eff.signal_arm(),
                b_sc_i: sc_i * norm * eff.idler_arm(),
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn pipeline_incoherent(
    pump: &IncoherentPump,
    wg: &WaveguideSpec,
    disp: &DispersionModel,
    grid_s: &FrequencyGrid,
    t_s: &[f64],
    grid_i: &FrequencyGrid,
    t_i: &[f64],
    eff: &EfficiencyModel,
    d: f64,
) -> Result<BrightnessCoeffs> {
    let total_intensity = pump.intensity_sum();
    if total_intensity <= 0.0 {
        return Err(Error::Degenerate("incoherent pump carries no power".into()));
    }
    let comps: Vec<(f64, f64)> =
        pump.components.iter().copied().filter(|&(_, i)| i > 0.0).collect();
    let tol = 0.51 * d;

    // One task per ordered pump pair; the diagonal loop over signal slots is
    // the inner hot loop. Partial sums are reduced sequentially afterwards so
    // the result does not depend on scheduling.
    let n_pairs = comps.len() * comps.len();
    let partials = map_indexed(n_pairs, |pair_idx| {
        let (wp1, i1) = comps[pair_idx / comps.len()];
        let (wp2, i2) = comps[pair_idx % comps.len()];
        let u = wp1 + wp2;
        let weight_pair = i1 * i2;
        let mut cc = 0.0;
        let mut sc_s = 0.0;
        let mut sc_i = 0.0;
        for s in 0..grid_s.len() {
            let ws = grid_s.point(s);
            let Some(i_idx) = grid_i.nearest_index(u - ws) else { continue };
            let wi = grid_i.point(i_idx);
            let dk = match phase_mismatch(wp1, wp2, ws, wi, disp, tol) {
                Ok(dk) => dk,
                Err(e) => return Err(e),
            };
            let a = split_step_from_mismatch(dk, wg, 1.0);
            let w = weight_pair * a.norm_sqr() * d;
            cc += w * t_s[s] * t_i[i_idx];
            sc_s += w * t_s[s];
            sc_i += w * t_i[i_idx];
        }
        Ok((cc, sc_s, sc_i))
    });

    let mut cc = 0.0;
    let mut sc_s = 0.0;
    let mut sc_i = 0.0;
    for p in partials {
        let (a, b, c) = p?;
        cc += a;
        sc_s += b;
        sc_i += c;
    }
    // rate = κ²/(2π)·Σ…·d; P = κ·ΣI, so κ cancels from B = rate/P².
    let norm = 1.0 / (2.0 * std::f64::consts::PI * total_intensity * total_intensity);
    Ok(BrightnessCoeffs {
        b_cc: cc * norm * eff.coincidence(),
        b_sc_s: sc_s * norm * eff.signal_arm(),
        b_sc_i: sc_i * norm * eff.idler_arm(),
    })
}

/// Single-side count rate `B·P² + a·P + N0`.
pub fn singles_rate(power: f64, b_sc: f64, arm: &ArmNoise) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(Error::invalid(format!("power must be ≥ 0, got {power}")));
    }
    Ok(b_sc * power * power + arm.linear * power + arm.background)
}

/// Coincidence-to-accidental ratio
/// `CAR = B_cc·P² / (Δτ·(B1P²+a1P+N1)·(B2P²+a2P+N2))`.
pub fn car(
    power: f64,
    b_cc: f64,
    arm_s: (f64, &ArmNoise),
    arm_i: (f64, &ArmNoise),
    window: f64,
) -> Result<f64> {
    if !(power > 0.0) {
        return Err(Error::invalid(format!("power must be > 0, got {power}")));
    }
    let s1 = singles_rate(power, arm_s.0, arm_s.1)?;
    let s2 = singles_rate(power, arm_i.0, arm_i.1)?;
    let denom = window * s1 * s2;
    if denom <= 0.0 {
        return Err(Error::Undefined("accidental rate vanishes; CAR undefined".into()));
    }
    Ok(b_cc * power * power / denom)
}

/// Full counting bookkeeping at one power point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingResult {
    pub singles_s: f64,
    pub singles_i: f64,
    /// True pair coincidences B_cc·P².
    pub coincidences: f64,
    /// Accidentals Δτ·S1·S2.
    pub accidentals: f64,
    pub car: f64,
}

pub fn counting_result(
    power: f64,
    b: &BrightnessCoeffs,
    noise: &NoiseModel,
) -> Result<CountingResult> {
    let singles_s = singles_rate(power, b.b_sc_s, &noise.signal)?;
    let singles_i = singles_rate(power, b.b_sc_i, &noise.idler)?;
    let coincidences = b.b_cc * power * power;
    let accidentals = noise.window * singles_s * singles_i;
    let car = if accidentals > 0.0 { coincidences / accidentals } else { f64::NAN };
    Ok(CountingResult { singles_s, singles_i, coincidences, accidentals, car })
}

/// The CAR extremum: `P*` solving
/// `(a1N2+a2N1)P + 2N1N2 = 2B1B2P⁴ + (a1B2+a2B1)P³`.
#[derive(Debug, Clone, Copy)]
pub struct CarPeak {
    pub power: f64,
    pub car: f64,
    /// Relative residual of the extremum equation at `power`.
    pub residual: f64,
}

/// Locate the CAR peak by bisection of the monotone difference of the two
/// sides of the extremum equation over `range`.
pub fn car_peak(
    b_cc: f64,
    arm_s: (f64, &ArmNoise),
    arm_i: (f64, &ArmNoise),
    window: f64,
    range: (f64, f64),
) -> Result<CarPeak> {
    let (b1, n1) = (arm_s.0, arm_s.1);
    let (b2, n2) = (arm_i.0, arm_i.1);
    if n1.linear == 0.0 && n1.background == 0.0 && n2.linear == 0.0 && n2.background == 0.0 {
        return Err(Error::Bracket(
            "all noise terms vanish; CAR is monotone and has no interior peak".into(),
        ));
    }
    let lhs = |p: f64| (n1.linear * n2.background + n2.linear * n1.background) * p
        + 2.0 * n1.background * n2.background;
    let rhs = |p: f64| 2.0 * b1 * b2 * p.powi(4) + (n1.linear * b2 + n2.linear * b1) * p.powi(3);
    let h = |p: f64| rhs(p) - lhs(p);

    let (mut lo, mut hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!("bad bracket ({lo}, {hi})")));
    }
    if h(lo) > 0.0 || h(hi) < 0.0 {
        return Err(Error::Bracket(format!(
            "no sign change of the extremum equation in ({lo:.3e}, {hi:.3e})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * hi {
            break;
        }
    }
    let p_star = 0.5 * (lo + hi);
    let residual = (rhs(p_star) - lhs(p_star)).abs() / rhs(p_star).abs().max(lhs(p_star).abs());
    let car = car(p_star, b_cc, arm_s, arm_i, window)?;
    Ok(CarPeak { power: p_star, car, residual })
}

/// Extremum shift indicator for noise rescaled by (μ1 on linear, μ2 on
/// background): `Δ = (μ1μ2−1)·f_cc(P1) + 2(μ2²−μ1μ2)·N1N2`, with
/// `f_cc(P) = 2B1B2P⁴ + (a1B2+a2B1)P³` evaluated at the unscaled parameters.
/// Δ > 0 means the peak moves to higher power.
pub fn car_shift_delta(
    p1: f64,
    mu1: f64,
    mu2: f64,
    arm_s: (f64, &ArmNoise),
    arm_i: (f64, &ArmNoise),
) -> f64 {
    let (b1, n1) = (arm_s.0, arm_s.1);
    let (b2, n2) = (arm_i.0, arm_i.1);
    let f_cc = 2.0 * b1 * b2 * p1.powi(4) + (n1.linear * b2 + n2.linear * b1) * p1.powi(3);
    (mu1 * mu2 - 1.0) * f_cc + 2.0 * (mu2 * mu2 - mu1 * mu2) * n1.background * n2.background
}

/// Mean rates handed to the Poisson sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRates {
    pub singles_s: f64,
    pub singles_i: f64,
    pub coincidences: f64,
    pub accidentals: f64,
}

/// Integer counts drawn for one acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulatedCounts {
    pub singles_s: u64,
    pub singles_i: u64,
    pub coincidences: u64,
    pub accidentals: u64,
}

fn poisson_draw(rng: &mut ChaCha12Rng, mean: f64) -> Result<u64> {
    if mean < 0.0 || !mean.is_finite() {
        return Err(Error::invalid(format!("Poisson mean must be finite and ≥ 0, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Independent Poisson draws with mean `rate·duration`, deterministic per
/// seed.
pub fn simulate_counts(rates: &CountRates, duration: f64, seed: u64) -> Result<SimulatedCounts> {
    if !(duration > 0.0) {
        return Err(Error::invalid(format!("duration must be > 0, got {duration}")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok(SimulatedCounts {
        singles_s: poisson_draw(&mut rng, rates.singles_s * duration)?,
        singles_i: poisson_draw(&mut rng, rates.singles_i * duration)?,
        coincidences: poisson_draw(&mut rng, rates.coincidences * duration)?,
        accidentals: poisson_draw(&mut rng, rates.accidentals * duration)?,
    })
}

/// Three-fold heralded autocorrelation estimator
/// `g²(0) = N123·N1/(N12·N13)`.
pub fn heralded_g2(n1: u64, n12: u64, n13: u64, n123: u64) -> Result<f64> {
    if n12 == 0 || n13 == 0 {
        return Err(Error::Undefined(
            "heralded g² needs nonzero two-fold coincidences in both arms".into(),
        ));
    }
    Ok((n123 as f64 * n1 as f64) / (n12 as f64 * n13 as f64))
}

/// Predicted heralded g²(0) from rates: the heralding arm sees `herald`
/// clicks/s, the heralded arm's stream (true twin rate `pair` plus
/// uncorrelated singles `s_arm`) is split 50:50 onto two detectors, and all
/// accidental combinations follow independent Poisson statistics within the
/// window. A rate model, not a formula from first principles.
pub fn predict_heralded_g2(herald: f64, pair: f64, s_arm: f64, window: f64) -> Result<f64> {
    if !(herald > 0.0) || !(window > 0.0) {
        return Err(Error::invalid("need positive herald rate and window"));
    }
    let (s2, s3) = (0.5 * s_arm, 0.5 * s_arm);
    let (pair2, pair3) = (0.5 * pair, 0.5 * pair);
    let n12 = pair2 + herald * s2 * window;
    let n13 = pair3 + herald * s3 * window;
    if n12 <= 0.0 || n13 <= 0.0 {
        return Err(Error::Undefined("two-fold coincidence rate vanishes".into()));
    }
    let n123 = pair2 * s3 * window + pair3 * s2 * window + herald * s2 * s3 * window * window;
    Ok(n123 * herald / (n12 * n13))
}

/// A counting scenario: square-envelope incoherent pump against mirrored
/// collection bands, on grids symmetrized about the pump.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingScenario {
    pub pump_center: f64,
    /// Square envelope full width σ_A.
    pub pump_width: f64,
    pub signal_band: Band,
    pub idler_band: Band,
    pub grid_step: f64,
    pub wg: WaveguideSpec,
    pub disp: DispersionModel,
    pub eff: EfficiencyModel,
}

impl CountingScenario {
    /// Build symmetrized grids/transmittances and run the pipeline.
    pub fn brightness(&self) -> Result<BrightnessCoeffs> {
        let d = self.grid_step;
        let ext = extend_boundaries(self.signal_band, self.idler_band, self.pump_center, d)?;
        let grid_for = |band: &Band| -> Result<FrequencyGrid> {
            let len = ((band.hi - band.lo) / d).round() as usize + 1;
            FrequencyGrid::new(band.lo, d, len.max(2))
        };
        let grid_s = grid_for(&ext.signal)?;
        let grid_i = grid_for(&ext.idler)?;
        // Nominal bands keep transmittance 1; symmetrization padding gets 0.
        let t_s: Vec<f64> =
            grid_s.points().map(|w| if self.signal_band.contains(w) { 1.0 } else { 0.0 }).collect();
        let t_i: Vec<f64> =
            grid_i.points().map(|w| if self.idler_band.contains(w) { 1.0 } else { 0.0 }).collect();
        let pump = IncoherentPump::square_envelope(self.pump_center, self.pump_width, d, 0)?;
        pipeline_counts(
            &PumpSpectrum::Incoherent(pump),
            &self.wg,
            &self.disp,
            &grid_s,
            &t_s,
            &grid_i,
            &t_i,
            &self.eff,
        )
    }
}

/// Quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    /// Pump power (W); brightness is computed once.
    Power,
    /// Square-envelope pump bandwidth σ_A (rad/s).
    Bandwidth,
    /// Pump-center detuning Δω0 = ω0 − ωd from the collection center (rad/s).
    Detuning,
    /// Signal-band shift Ω_a (rad/s), making the channel pair asymmetric.
    Asymmetry,
}

/// One sweep sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub b_cc: f64,
    pub b_sc_s: f64,
    pub b_sc_i: f64,
    pub singles_s: f64,
    pub singles_i: f64,
    pub coincidences: f64,
    pub accidentals: f64,
    pub car: f64,
    pub g2_prediction: f64,
}

/// Sweep a scenario variable, reporting brightness and the derived counting
/// quantities at `power`.
pub fn sweep(
    variable: SweepVariable,
    values: &[f64],
    base: &CountingScenario,
    noise: &NoiseModel,
    power: f64,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one point"));
    }
    let row_from = |value: f64, p: f64, b: &BrightnessCoeffs| -> Result<SweepRow> {
        let c = counting_result(p, b, noise)?;
        let g2 = predict_heralded_g2(
            c.singles_s,
            b.b_cc * p * p,
            (b.b_sc_i * p * p - b.b_cc * p * p).max(0.0)
                + noise.idler.linear * p
                + noise.idler.background,
            noise.window,
        )
        .unwrap_or(f64::NAN);
        Ok(SweepRow {
            value,
            b_cc: b.b_cc,
            b_sc_s: b.b_sc_s,
            b_sc_i: b.b_sc_i,
            singles_s: c.singles_s,
            singles_i: c.singles_i,
            coincidences: c.coincidences,
            accidentals: c.accidentals,
            car: c.car,
            g2_prediction: g2,
        })
    };

    match variable {
        SweepVariable::Power => {
            let b = base.brightness()?;
            values.iter().map(|&p| row_from(p, p, &b)).collect()
        }
        _ => {
            let rows = map_indexed(values.len(), |k| {
                let v = values[k];
                let mut sc = base.clone();
                match variable {
                    SweepVariable::Bandwidth => sc.pump_width = v,
                    SweepVariable::Detuning => sc.pump_center = base.pump_center + v,
                    SweepVariable::Asymmetry => {
                        sc.signal_band = Band {
                            lo: base.signal_band.lo + v,
                            hi: base.signal_band.hi + v,
                        };
                    }
                    SweepVariable::Power => unreachable!(),
                }
                sc.brightness().map(|b| (v, b))
            });
            rows.into_iter().map(|r| r.and_then(|(v, b)| row_from(v, power, &b))).collect()
        }
    }
}

/// Least-squares fit of `(B, a, N0)` to a singles-vs-power table on the
/// basis `[P², P, 1]`.
pub fn fit_singles_noise(table: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if table.len() < 3 {
        return Err(Error::invalid("noise fit needs at least 3 (power, singles) points"));
    }
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for &(p, y) in table {
        let row = nalgebra::Vector3::new(p * p, p, 1.0);
        ata += row * row.transpose();
        atb += row * y;
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::Degenerate("singular normal equations in noise fit".into()))?;
    Ok((sol[0], sol[1], sol[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pump::{CoherentPump, PumpShape};
    use approx::assert_relative_eq;

    fn flat_wg() -> (WaveguideSpec, DispersionModel) {
        (WaveguideSpec::new(1.0, 1.0, 0.0, 1).unwrap(), DispersionModel::flat(0.0))
    }

    fn symmetric_grids(half_inner: f64, half_outer: f64, d: f64) -> (FrequencyGrid, FrequencyGrid) {
        let len = ((half_outer - half_inner) / d).round() as usize + 1;
        let gs = FrequencyGrid::new(half_inner, d, len).unwrap();
        let gi = FrequencyGrid::new(-half_outer, d, len).unwrap();
        (gs, gi)
    }

    #[test]
    fn monochromatic_coincidences_equal_singles() {
        let (wg, disp) = flat_wg();
        let (gs, gi) = symmetric_grids(4.0, 12.0, 0.25);
        let pump = IncoherentPump::new(vec![(0.0, 1.0)], vec![0.0], 0.25, 0.25).unwrap();
        let b = pipeline_counts(
            &PumpSpectrum::Incoherent(pump),
            &wg,
            &disp,
            &gs,
            &vec![1.0; gs.len()],
            &gi,
            &vec![1.0; gi.len()],
            &EfficiencyModel::unit(),
        )
        .unwrap();
        assert!(b.b_cc > 0.0);
        assert_relative_eq!(b.b_cc, b.b_sc_s, max_relative = 1e-12);
        assert_relative_eq!(b.b_cc, b.b_sc_i, max_relative = 1e-12);
    }

    #[test]
    fn coincidence_never_exceeds_singles() {
        let (wg, disp) = flat_wg();
        let (gs, gi) = symmetric_grids(2.0, 10.0, 0.5);
        let pump = IncoherentPump::square_envelope(0.0, 3.0, 0.5, 5).unwrap();
        let t_s: Vec<f64> = gs.points().map(|w| if w < 6.0 { 1.0 } else { 0.3 }).collect();
        let t_i: Vec<f64> = gi.points().map(|w| if w > -5.0 { 0.8 } else { 0.0 }).collect();
        let eff = EfficiencyModel::new(0.9, 0.7, 0.6, 0.5).unwrap();
        let b = pipeline_counts(
            &PumpSpectrum::Incoherent(pump),
            &wg,
            &disp,
            &gs,
            &t_s,
            &gi,
            &t_i,
            &eff,
        )
        .unwrap();
        assert!(b.b_cc <= b.b_sc_s + 1e-15);
        assert!(b.b_cc <= b.b_sc_i + 1e-15);
    }

    #[test]
    fn coherent_rectangular_pump_line_shape_factor() {
        // Resolved rectangular coherent pump, flat matching, all-pass
        // collection: B_cc = (2/3)·(band/2π)·(γL)², the rectangular
        // self-convolution analog of the Gaussian √2/2 factor. The
        // monochromatic comb has no such penalty.
        let (wg, disp) = flat_wg();
        let pump_width = 4.0;
        let factor_at = |bins_across_pump: usize| -> f64 {
            let d = pump_width / bins_across_pump as f64;
            // Signal window [2, 14]; idler grid padded so every partner of
            // every signal slot is on-grid.
            let m_s = (12.0 / d).round() as usize + 1;
            let gs = FrequencyGrid::new(2.0, d, m_s).unwrap();
            let gi = FrequencyGrid::new(-14.0 - pump_width, d, m_s + 2 * bins_across_pump).unwrap();
            let coh = CoherentPump::normalized(0.0, pump_width, PumpShape::Rectangular).unwrap();
            let ts = vec![1.0; gs.len()];
            let ti = vec![1.0; gi.len()];
            let b = pipeline_counts(
                &PumpSpectrum::Coherent(coh),
                &wg,
                &disp,
                &gs,
                &ts,
                &gi,
                &ti,
                &EfficiencyModel::unit(),
            )
            .unwrap();
            let band = gs.len() as f64 * d;
            b.b_cc * 2.0 * std::f64::consts::PI / (band * (wg.gamma * wg.length).powi(2))
        };
        let errs: Vec<f64> =
            [32, 64, 128].iter().map(|&n| (factor_at(n) - 2.0 / 3.0).abs()).collect();
        assert!(errs[1] < 0.7 * errs[0] && errs[2] < 0.7 * errs[1], "no convergence: {errs:?}");
        assert!(errs[2] < 0.02, "factor off by {} at the finest grid", errs[2]);

        // Sub-bin rectangular pump is rejected with a pointer to the comb.
        let d = 0.125;
        let gs = FrequencyGrid::new(2.0, d, 97).unwrap();
        let gi = FrequencyGrid::new(-14.0, d, 97).unwrap();
        let narrow = CoherentPump::normalized(0.0, d / 8.0, PumpShape::Rectangular).unwrap();
        let ts = vec![1.0; gs.len()];
        let ti = vec![1.0; gi.len()];
        assert!(matches!(
            pipeline_counts(
                &PumpSpectrum::Coherent(narrow),
                &wg,
                &disp,
                &gs,
                &ts,
                &gi,
                &ti,
                &EfficiencyModel::unit()
            ),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn singles_rate_polynomial() {
        let arm = ArmNoise::new(1.0, 1.0).unwrap();
        assert_relative_eq!(singles_rate(1.0, 1.0, &arm).unwrap(), 3.0);
        assert_relative_eq!(singles_rate(0.0, 1.0, &arm).unwrap(), 1.0);
        let arm2 = ArmNoise::new(0.5, 10.0).unwrap();
        assert_relative_eq!(singles_rate(3.0, 2.0, &arm2).unwrap(), 29.5);
    }

    #[test]
    fn car_plug_in_value() {
        let arm = ArmNoise::new(1.0, 1.0).unwrap();
        let c = car(1.0, 1.0, (1.0, &arm), (1.0, &arm), 1.0).unwrap();
        assert_relative_eq!(c, 1.0 / 9.0, max_relative = 1e-12);
    }

    #[test]
    fn noise_free_car_strictly_decreasing() {
        let quiet = ArmNoise::quiet();
        let mut last = f64::INFINITY;
        for k in 1..=100 {
            let p = 0.01 * k as f64;
            let c = car(p, 2.0, (1.0, &quiet), (1.5, &quiet), 0.8e-9).unwrap();
            assert!(c < last, "CAR must decrease monotonically without noise");
            last = c;
        }
    }

    #[test]
    fn car_peak_analytic_case() {
        // a = 0, N1 = N2 = 1, B = 1 both arms: 2 = 2P⁴ → P* = 1.
        let arm = ArmNoise::new(0.0, 1.0).unwrap();
        let peak = car_peak(1.0, (1.0, &arm), (1.0, &arm), 1.0, (0.01, 10.0)).unwrap();
        assert_relative_eq!(peak.power, 1.0, max_relative = 1e-10);
        assert!(peak.residual < 1e-8);

        // With a = 0 the extremum equation is N1N2 = P⁴, so P* = (N1N2)^¼:
        // scaling one background by 4 moves the peak by √2, scaling both by
        // 4 moves it by 2.
        let arm4 = ArmNoise::new(0.0, 4.0).unwrap();
        let one = car_peak(1.0, (1.0, &arm4), (1.0, &arm), 1.0, (0.01, 10.0)).unwrap();
        assert_relative_eq!(one.power, std::f64::consts::SQRT_2, max_relative = 1e-10);
        let both = car_peak(1.0, (1.0, &arm4), (1.0, &arm4), 1.0, (0.01, 10.0)).unwrap();
        assert_relative_eq!(both.power, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn car_peak_requires_noise() {
        let quiet = ArmNoise::quiet();
        assert!(matches!(
            car_peak(1.0, (1.0, &quiet), (1.0, &quiet), 1.0, (0.01, 10.0)),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn car_peak_is_a_maximum() {
        let arm_s = ArmNoise::new(0.3, 2.0).unwrap();
        let arm_i = ArmNoise::new(0.7, 1.0).unwrap();
        let peak = car_peak(5.0, (1.0, &arm_s), (2.0, &arm_i), 0.8e-9, (1e-3, 1e3)).unwrap();
        let up = car(peak.power * 1.1, 5.0, (1.0, &arm_s), (2.0, &arm_i), 0.8e-9).unwrap();
        let dn = car(peak.power * 0.9, 5.0, (1.0, &arm_s), (2.0, &arm_i), 0.8e-9).unwrap();
        assert!(peak.car > up && peak.car > dn);
    }

    #[test]
    fn shift_delta_signs() {
        let arm_s = ArmNoise::new(0.3, 2.0).unwrap();
        let arm_i = ArmNoise::new(0.7, 1.0).unwrap();
        let d0 = car_shift_delta(1.3, 1.0, 1.0, (1.0, &arm_s), (2.0, &arm_i));
        assert_relative_eq!(d0, 0.0);
        let d = car_shift_delta(1.3, 1.5, 2.0, (1.0, &arm_s), (2.0, &arm_i));
        assert!(d > 0.0);
    }

    #[test]
    fn scaled_noise_moves_peak_up() {
        let arm_s = ArmNoise::new(0.3, 2.0).unwrap();
        let arm_i = ArmNoise::new(0.7, 1.0).unwrap();
        let p1 = car_peak(5.0, (1.0, &arm_s), (2.0, &arm_i), 1.0, (1e-3, 1e3)).unwrap().power;
        let (mu1, mu2) = (1.5, 2.0);
        let scaled_s = ArmNoise::new(mu1 * 0.3, mu2 * 2.0).unwrap();
        let scaled_i = ArmNoise::new(mu1 * 0.7, mu2 * 1.0).unwrap();
        let p2 = car_peak(5.0, (1.0, &scaled_s), (2.0, &scaled_i), 1.0, (1e-3, 1e3)).unwrap().power;
        assert!(p2 > p1, "rescaled noise must push the peak to higher power ({p2} vs {p1})");
    }

    #[test]
    fn simulate_counts_deterministic_and_concentrated() {
        let rates =
            CountRates { singles_s: 1e6, singles_i: 0.0, coincidences: 10.0, accidentals: 0.0 };
        let a = simulate_counts(&rates, 1.0, 42).unwrap();
        let b = simulate_counts(&rates, 1.0, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.singles_i, 0);
        assert_eq!(a.accidentals, 0);
        // 5√λ window: misses with probability < 1e-5.
        assert!((a.singles_s as f64 - 1e6).abs() < 5.0 * 1e3);
    }

    #[test]
    fn heralded_g2_estimator() {
        assert_relative_eq!(heralded_g2(100, 10, 10, 1).unwrap(), 1.0);
        assert_relative_eq!(heralded_g2(100, 10, 10, 0).unwrap(), 0.0);
        assert!(heralded_g2(100, 0, 10, 1).is_err());
    }

    #[test]
    fn noise_fit_recovers_coefficients() {
        let (b, a, n0) = (2.5, 0.3, 7.0);
        let table: Vec<(f64, f64)> =
            (1..=12).map(|k| { let p = 0.1 * k as f64; (p, b * p * p + a * p + n0) }).collect();
        let (fb, fa, fn0) = fit_singles_noise(&table).unwrap();
        assert_relative_eq!(fb, b, max_relative = 1e-8);
        assert_relative_eq!(fa, a, max_relative = 1e-8);
        assert_relative_eq!(fn0, n0, max_relative = 1e-8);
    }

    #[test]
    fn power_sweep_matches_pointwise_car() {
        let (wg, disp) = flat_wg();
        let scenario = CountingScenario {
            pump_center: 0.0,
            pump_width: 3.0,
            signal_band: Band::new(2.0, 10.0).unwrap(),
            idler_band: Band::new(-10.0, -2.0).unwrap(),
            grid_step: 0.5,
            wg,
            disp,
            eff: EfficiencyModel::unit(),
        };
        let noise = NoiseModel::new(
            ArmNoise::new(0.1, 0.5).unwrap(),
            ArmNoise::new(0.2, 0.3).unwrap(),
            1e-3,
        )
        .unwrap();
        let powers: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
        let rows = sweep(SweepVariable::Power, &powers, &scenario, &noise, 1.0).unwrap();
        let b = scenario.brightness().unwrap();
        for row in &rows {
            let expect = car(
                row.value,
                b.b_cc,
                (b.b_sc_s, &noise.signal),
                (b.b_sc_i, &noise.idler),
                noise.window,
            )
            .unwrap();
            assert_relative_eq!(row.car, expect, max_relative = 1e-12);
        }
    }
}
