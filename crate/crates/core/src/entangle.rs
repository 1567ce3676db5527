//! Polarization entanglement of the Sagnac-loop output.
//!
//! The source model is `|Φ⟩ = |HH⟩ + η·e^{iδ}|VV⟩` mixed isotropically with
//! white noise. On top of it: polarization interference fringes and their
//! visibility, the CHSH correlator with the experiment's analyzer settings,
//! Uhlmann fidelity, and a linear-inversion tomography round trip.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C64 = Complex64;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;

/// Two-qubit polarization density matrix in the {HH, HV, VH, VV} basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<C64>,
}

impl TwoQubitState {
    /// Validate Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let herm_defect = (&rho - rho.adjoint()).norm();
        if herm_defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian (defect {herm_defect:.3e})"
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace must be 1, got {trace}")));
        }
        let min_eig = hermitian_eigenvalues(&rho).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { rho })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho
    }

    /// |Φ⁺⟩⟨Φ⁺| with Φ⁺ = (|HH⟩ + |VV⟩)/√2.
    pub fn bell_phi_plus() -> Self {
        sagnac_state(&SagnacParams { eta: 1.0, delta: 0.0, white_noise: 0.0 })
            .expect("ideal Bell state is valid")
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: Matrix4::identity().map(|x: C64| x * C64::new(0.25, 0.0)) }
    }

    /// Pure product state |HH⟩⟨HH|.
    pub fn product_hh() -> Self {
        sagnac_state(&SagnacParams { eta: 0.0, delta: 0.0, white_noise: 0.0 })
            .expect("product state is valid")
    }
}

fn hermitian_eigenvalues(m: &Matrix4<C64>) -> Vec<f64> {
    // Work on the Hermitized copy so tiny float asymmetry cannot leak in.
    let h = (m + m.adjoint()).map(|x| x * C64::new(0.5, 0.0));
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Sagnac-loop output parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SagnacParams {
    /// Amplitude ratio η ≥ 0 (η² is the V/H pump power ratio).
    pub eta: f64,
    /// Relative phase δ from residual birefringence (rad).
    pub delta: f64,
    /// Isotropic white-noise fraction p ∈ [0, 1].
    pub white_noise: f64,
}

/// `ρ = (1−p)·|Φ⟩⟨Φ|/(1+η²) + p·I/4` with `|Φ⟩ = |HH⟩ + η e^{iδ}|VV⟩`.
pub fn sagnac_state(params: &SagnacParams) -> Result<TwoQubitState> {
    if !(params.eta >= 0.0) {
        return Err(Error::invalid(format!("amplitude ratio must be ≥ 0, got {}", params.eta)));
    }
    if !(0.0..=1.0).contains(&params.white_noise) {
        return Err(Error::invalid(format!(
            "white-noise fraction must be in [0, 1], got {}",
            params.white_noise
        )));
    }
    let phi = Vector4::new(
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(params.eta, params.delta),
    );
    let norm = 1.0 + params.eta * params.eta;
    let pure = (&phi * phi.adjoint()).map(|x| x / norm);
    let p = params.white_noise;
    let rho = pure.map(|x| x * (1.0 - p))
        + Matrix4::identity().map(|x: C64| x * C64::new(0.25 * p, 0.0));
    TwoQubitState::new(rho)
}

/// Linear-polarization analyzer ket `cosθ|H⟩ + sinθ|V⟩`.
fn analyzer(theta: f64) -> Vector2<C64> {
    Vector2::new(C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0))
}

fn kron2(a: &Vector2<C64>, b: &Vector2<C64>) -> Vector4<C64> {
    Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

/// Coincidence probability `Tr[ρ·(|θs⟩⟨θs| ⊗ |θi⟩⟨θi|)]`.
pub fn coincidence_probability(state: &TwoQubitState, theta_s: f64, theta_i: f64) -> f64 {
    let ket = kron2(&analyzer(theta_s), &analyzer(theta_i));
    let expectation = (ket.adjoint() * state.matrix() * &ket)[(0, 0)];
    expectation.re
}

/// Analyzer basis held fixed on the signal arm during a fringe sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FringeBasis {
    /// θs = 0.
    H,
    /// θs = π/4.
    D,
}

/// Points per 2π fringe sweep (0.5° steps).
pub const FRINGE_SWEEP_POINTS: usize = 720;

/// Fringe visibility `(max − min)/(max + min)` of the coincidence probability
/// as the idler analyzer sweeps [0, 2π).
pub fn fringe_visibility(state: &TwoQubitState, basis: FringeBasis) -> Result<f64> {
    let theta_s = match basis {
        FringeBasis::H => 0.0,
        FringeBasis::D => FRAC_PI_4,
    };
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for k in 0..FRINGE_SWEEP_POINTS {
        let theta_i = 2.0 * PI * k as f64 / FRINGE_SWEEP_POINTS as f64;
        let p = coincidence_probability(state, theta_s, theta_i);
        max = max.max(p);
        min = min.min(p);
    }
    if max + min <= 0.0 {
        return Err(Error::Undefined("fringe has no counts; visibility undefined".into()));
    }
    Ok((max - min) / (max + min))
}

/// Polarization correlator
/// `E(θ1,θ2) = p(θ1,θ2) − p(θ1,θ2⊥) − p(θ1⊥,θ2) + p(θ1⊥,θ2⊥)`.
pub fn correlator(state: &TwoQubitState, theta_1: f64, theta_2: f64) -> f64 {
    coincidence_probability(state, theta_1, theta_2)
        - coincidence_probability(state, theta_1, theta_2 + FRAC_PI_2)
        - coincidence_probability(state, theta_1 + FRAC_PI_2, theta_2)
        + coincidence_probability(state, theta_1 + FRAC_PI_2, theta_2 + FRAC_PI_2)
}

/// CHSH parameter `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)` for analyzer
/// pairs `(a, a′)` on the signal arm and `(b, b′)` on the idler arm.
pub fn chsh(state: &TwoQubitState, signal: (f64, f64), idler: (f64, f64)) -> f64 {
    let (a, a_p) = signal;
    let (b, b_p) = idler;
    correlator(state, a, b) - correlator(state, a, b_p)
        + correlator(state, a_p, b)
        + correlator(state, a_p, b_p)
}

/// The experiment's analyzer settings. The published four-angle lists
/// (θs = −22.5°, 67.5°, 22.5°, 112.5°; θi = −45°, 45°, 0°, 90°) enumerate
/// each analyzer with its orthogonal complement; reading them as
/// (a′, a′⊥, a, a⊥) and (b′, b′⊥, b, b⊥) gives the assignment below, which
/// reaches S = 2√2 on the ideal Bell state with the standard sign pattern.
pub const CHSH_SIGNAL_ANGLES: (f64, f64) = (FRAC_PI_4 / 2.0, -FRAC_PI_4 / 2.0);
/// (b, b′) in radians: 0° and −45°.
pub const CHSH_IDLER_ANGLES: (f64, f64) = (0.0, -FRAC_PI_4);

/// Uhlmann fidelity `F = [Tr√(√ρ_th · ρ_ex · √ρ_th)]²` via Hermitian
/// eigendecompositions.
pub fn fidelity(rho_ex: &TwoQubitState, rho_th: &TwoQubitState) -> Result<f64> {
    let sqrt_th = hermitian_sqrt(rho_th.matrix())?;
    let inner = &sqrt_th * rho_ex.matrix() * &sqrt_th;
    let h = (&inner + inner.adjoint()).map(|x| x * C64::new(0.5, 0.0));
    let eig = SymmetricEigen::new(h);
    let tr: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0 + 1e-9).min(1.0))
}

fn hermitian_sqrt(m: &Matrix4<C64>) -> Result<Matrix4<C64>> {
    let h = (m + m.adjoint()).map(|x| x * C64::new(0.5, 0.0));
    let eig = SymmetricEigen::new(h);
    for &l in eig.eigenvalues.iter() {
        if l < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "matrix square root of a non-PSD input (eigenvalue {l:.3e})"
            )));
        }
    }
    let q = &eig.eigenvectors;
    let mut out = Matrix4::zeros();
    for k in 0..4 {
        let lk = eig.eigenvalues[k].max(0.0).sqrt();
        let col = q.column(k);
        for r in 0..4 {
            for c in 0..4 {
                out[(r, c)] += col[r] * col[c].conj() * lk;
            }
        }
    }
    Ok(out)
}

/// Tomography analyzer settings per arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolSetting {
    H,
    V,
    D,
    R,
}

impl PolSetting {
    pub const ALL: [PolSetting; 4] = [PolSetting::H, PolSetting::V, PolSetting::D, PolSetting::R];

    /// Analyzer ket.
    pub fn ket(self) -> Vector2<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            PolSetting::H => Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            PolSetting::V => Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            PolSetting::D => Vector2::new(C64::new(s, 0.0), C64::new(s, 0.0)),
            PolSetting::R => Vector2::new(C64::new(s, 0.0), C64::new(0.0, s)),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "H" | "h" => Ok(PolSetting::H),
            "V" | "v" => Ok(PolSetting::V),
            "D" | "d" => Ok(PolSetting::D),
            "R" | "r" => Ok(PolSetting::R),
            other => Err(Error::invalid(format!("unknown polarization setting {other:?}"))),
        }
    }
}

/// Projector probability for a setting pair.
pub fn setting_probability(state: &TwoQubitState, s: PolSetting, i: PolSetting) -> f64 {
    let ket = kron2(&s.ket(), &i.ket());
    (ket.adjoint() * state.matrix() * &ket)[(0, 0)].re
}

/// Ideal (noiseless) counts for all 16 settings, `total` pairs per complete
/// {H,V} basis group.
pub fn ideal_tomography_counts(
    state: &TwoQubitState,
    total: f64,
) -> Vec<(PolSetting, PolSetting, f64)> {
    let mut out = Vec::with_capacity(16);
    for s in PolSetting::ALL {
        for i in PolSetting::ALL {
            out.push((s, i, total * setting_probability(state, s, i)));
        }
    }
    out
}

/// Linear-inversion tomography from 16 projective coincidence counts.
///
/// Counts are normalized by the {H,V}⊗{H,V} group total, the 16×16 linear
/// system is solved for ρ, and the estimate is Hermitized, eigenvalue-clipped
/// at 0 and renormalized to unit trace.
pub fn tomography_linear(counts: &[(PolSetting, PolSetting, f64)]) -> Result<TwoQubitState> {
    if counts.len() != 16 {
        return Err(Error::invalid(format!("need exactly 16 settings, got {}", counts.len())));
    }
    let mut seen = std::collections::HashSet::new();
    for &(s, i, n) in counts {
        if !seen.insert((s, i)) {
            return Err(Error::invalid(format!("duplicate setting ({s:?}, {i:?})")));
        }
        if !(n >= 0.0) || !n.is_finite() {
            return Err(Error::invalid(format!("counts must be finite and ≥ 0, got {n}")));
        }
    }

    let basis_total: f64 = counts
        .iter()
        .filter(|(s, i, _)| {
            matches!(s, PolSetting::H | PolSetting::V) && matches!(i, PolSetting::H | PolSetting::V)
        })
        .map(|&(_, _, n)| n)
        .sum();
    if basis_total <= 0.0 {
        return Err(Error::Degenerate("H/V basis group carries no counts".into()));
    }

    // p_j = Σ_{r,c} Π_j[c,r]·ρ[r,c]: assemble the 16×16 design matrix over
    // vec(ρ) (row-major).
    let mut design = DMatrix::<C64>::zeros(16, 16);
    let mut probs = DVector::<C64>::zeros(16);
    for (j, &(s, i, n)) in counts.iter().enumerate() {
        let ket = kron2(&s.ket(), &i.ket());
        for r in 0..4 {
            for c in 0..4 {
                // Π[c,r] = ket[c]·conj(ket[r])
                design[(j, 4 * r + c)] = ket[c] * ket[r].conj();
            }
        }
        probs[j] = C64::new(n / basis_total, 0.0);
    }
    let solution = design
        .lu()
        .solve(&probs)
        .ok_or_else(|| Error::invalid("singular tomography design matrix".to_string()))?;

    let mut rho = Matrix4::<C64>::zeros();
    for r in 0..4 {
        for c in 0..4 {
            rho[(r, c)] = solution[4 * r + c];
        }
    }
    // Hermitize, clip, renormalize.
    let h = (&rho + rho.adjoint()).map(|x| x * C64::new(0.5, 0.0));
    let eig = SymmetricEigen::new(h);
    let q = &eig.eigenvectors;
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("tomography estimate has no positive weight".into()));
    }
    let mut out = Matrix4::<C64>::zeros();
    for k in 0..4 {
        let w = clipped[k] / total;
        let col = q.column(k);
        for r in 0..4 {
            for c in 0..4 {
                out[(r, c)] += col[r] * col[c].conj() * w;
            }
        }
    }
    TwoQubitState::new(out)
}

/// Complex 4×4 as nested [re, im] pairs, row-major, for JSON dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDump {
    pub rho: Vec<Vec<[f64; 2]>>,
}

impl From<&TwoQubitState> for StateDump {
    fn from(state: &TwoQubitState) -> Self {
        let m = state.matrix();
        let rho = (0..4)
            .map(|r| (0..4).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect();
        Self { rho }
    }
}
