//! The parity-gate protocol: lossless evolution, photon-number-resolving
//! measurement with inefficient detectors, and the classical feedforward.
//!
//! The lossy-bus variant lives in [`lossy`]; seeded shot batches in [`sampling`].

pub mod lossy;
pub mod sampling;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::Serialize;

use crate::cavity::{transfer_coefficients, CavityParams};
use crate::error::{GateError, Result};
use crate::scalar::{principal_arg, Real};
use crate::states::{parity_of, Component, HybridBranch, HybridState, Parity, ParityState, PolarizationState};

pub use lossy::{
    coherent_overlap, displace, displace_and_correct, evolve_lossy, odd_state_after_loss, odd_state_after_loss_uniform,
    project_lossy_odd, Coherences, Displaced, LossyBranch, LossyState, OddDensity,
};
pub use sampling::{measure_pnr, run_shots, ShotRecord, ShotRun, Tally, BATCH_SHOTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutputMode {
    O1,
    O2,
}

/// Photon-number-resolving detector with quantum efficiency `eta`.
///
/// Each arriving photon is registered independently with probability `eta`,
/// so the detected count given `n` true photons is `Binomial(n, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    eta: f64,
    mode: OutputMode,
}

impl DetectorModel {
    pub fn new(eta: f64, mode: OutputMode) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(GateError::InvalidParams(format!("detector efficiency must lie in [0, 1], got {eta}")));
        }
        Ok(DetectorModel { eta, mode })
    }

    pub fn perfect(mode: OutputMode) -> Self {
        DetectorModel { eta: 1.0, mode }
    }

    /// The pair of detectors described by `params`.
    pub fn pair(params: &CavityParams<f64>) -> (Self, Self) {
        (
            DetectorModel {
                eta: params.eta1(),
                mode: OutputMode::O1,
            },
            DetectorModel {
                eta: params.eta2(),
                mode: OutputMode::O2,
            },
        )
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mode(&self) -> OutputMode {
        self.mode
    }

    /// Detected count for `n` arriving photons.
    pub fn thin<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> u64 {
        if self.eta >= 1.0 || n == 0 {
            return n;
        }
        if self.eta <= 0.0 {
            return 0;
        }
        Binomial::new(n, self.eta).expect("valid binomial").sample(rng)
    }
}

/// Result of one run of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    /// Detected counts.
    pub n_o1: u64,
    pub n_o2: u64,
    /// Photon counts that actually arrived at the detectors.
    pub true_n_o1: u64,
    pub true_n_o2: u64,
    pub true_component: Component,
    pub classified_parity: Parity,
    pub true_parity: Parity,
    /// Qubit state after feedforward, `None` when the reported subspace has
    /// no weight in the input.
    pub post_state: Option<ParityState<f64>>,
    pub misclassified: bool,
}

impl GateOutcome {
    /// Odd outcome whose feedforward used counts that differ from the true ones.
    pub fn phase_error(&self) -> bool {
        self.classified_parity == Parity::Odd && (self.n_o1 != self.true_n_o1 || self.n_o2 != self.true_n_o2)
    }
}

/// Lossless output state: each polarization component drives the cavity with
/// its own signal photon number and leaves the bus in `|κ_nα⟩|σ_nα⟩`.
pub fn evolve_lossless<T: Real>(psi: &PolarizationState<T>, params: &CavityParams<T>) -> Result<HybridState<T>> {
    if !params.is_lossless() {
        return Err(GateError::Contract(
            "evolve_lossless requires lambda = 0; use evolve_lossy for a lossy bus".into(),
        ));
    }
    let alpha = params.alpha();
    let coeffs = [0, 1, 2].map(|n| transfer_coefficients(params, n));
    let zero = Complex::new(T::zero(), T::zero());
    let branches = Component::ALL
        .iter()
        .filter(|c| psi.amplitude(**c) != zero)
        .map(|&component| {
            let c = coeffs[component.signal_photons() as usize];
            HybridBranch {
                component,
                weight: psi.amplitude(component),
                o1: c.kappa * alpha,
                o2: c.sigma * alpha,
            }
        })
        .collect();
    Ok(HybridState {
        branches,
        kappa: coeffs[0].kappa,
        sigma: coeffs[0].sigma,
    })
}

/// `φ(n_o1, n_o2) = n_o1·Arg κ + n_o2·Arg σ`.
pub fn feedforward_angle<T: Real>(n_o1: u64, n_o2: u64, kappa: Complex<T>, sigma: Complex<T>) -> T {
    let n1 = T::from_u64(n_o1).expect("count fits scalar");
    let n2 = T::from_u64(n_o2).expect("count fits scalar");
    n1 * principal_arg(kappa) + n2 * principal_arg(sigma)
}

/// Relative phase picked up by the odd components after projecting the bus
/// onto `|n_o1⟩|n_o2⟩`: `HV → e^{+iφ}`, `VH → e^{−iφ}`.
pub fn imprint_odd_phase<T: Real>(
    odd_amplitudes: [Complex<T>; 2],
    n_o1: u64,
    n_o2: u64,
    kappa: Complex<T>,
    sigma: Complex<T>,
) -> [Complex<T>; 2] {
    let phi = feedforward_angle(n_o1, n_o2, kappa, sigma);
    let [hv, vh] = odd_amplitudes;
    [hv * Complex::from_polar(T::one(), phi), vh * Complex::from_polar(T::one(), -phi)]
}

/// Classical correction for the odd outcome: `HV → e^{−iφ}`, `VH → e^{+iφ}`.
pub fn feedforward_phase<T: Real>(
    odd_amplitudes: [Complex<T>; 2],
    n_o1: u64,
    n_o2: u64,
    kappa: Complex<T>,
    sigma: Complex<T>,
) -> Result<ParityState<T>> {
    let phi = feedforward_angle(n_o1, n_o2, kappa, sigma);
    let [hv, vh] = odd_amplitudes;
    ParityState::new(
        Parity::Odd,
        [hv * Complex::from_polar(T::one(), -phi), vh * Complex::from_polar(T::one(), phi)],
    )
}

/// Error from leaving `o₂` unmeasured: `1 − |⟨0|σα⟩|² = 1 − exp(−|σα|²)`.
pub fn o2_skip_error<T: Real>(sigma: Complex<T>, alpha: Complex<T>) -> T {
    -(-(sigma * alpha).norm_sqr()).exp_m1()
}

pub fn skip_o2_decision<T: Real>(sigma: Complex<T>, alpha: Complex<T>, threshold: T) -> Result<bool> {
    if !(threshold > T::zero()) {
        return Err(GateError::Domain(format!("threshold must be positive, got {threshold}")));
    }
    Ok(o2_skip_error(sigma, alpha) <= threshold)
}

fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// One shot against a prepared lossless state, drawing from `rng`.
///
/// Branch first by Born weight, then Poisson photon counts of its product
/// coherent state, then binomial thinning by each detector.
pub fn measure_pnr_with<R: Rng + ?Sized>(
    state: &HybridState<f64>,
    d1: &DetectorModel,
    d2: &DetectorModel,
    rng: &mut R,
) -> GateOutcome {
    let total = state.total_weight();
    let mut u = rng.random::<f64>() * total;
    let mut chosen = state.branches.last().expect("non-empty hybrid state");
    for b in &state.branches {
        let w = b.weight.norm_sqr();
        if u < w {
            chosen = b;
            break;
        }
        u -= w;
    }

    let true_n_o1 = sample_poisson(chosen.o1.norm_sqr(), rng);
    let true_n_o2 = sample_poisson(chosen.o2.norm_sqr(), rng);
    let n_o1 = d1.thin(true_n_o1, rng);
    let n_o2 = d2.thin(true_n_o2, rng);

    let classified_parity = if n_o1 == 0 { Parity::Even } else { Parity::Odd };
    let true_parity = parity_of(chosen.component);
    let weight = |c: Component| state.branch(c).map_or(Complex::new(0.0, 0.0), |b| b.weight);

    let post_state = match classified_parity {
        Parity::Even => ParityState::new(Parity::Even, [weight(Component::HH), weight(Component::VV)]).ok(),
        Parity::Odd => {
            // the bus projection imprints phases set by the true counts
            let imprinted = [Component::HV, Component::VH].map(|c| match state.branch(c) {
                Some(b) => {
                    let phase = true_n_o1 as f64 * principal_arg(b.o1) + true_n_o2 as f64 * principal_arg(b.o2);
                    b.weight * Complex::from_polar(1.0, phase)
                }
                None => Complex::new(0.0, 0.0),
            });
            feedforward_phase(imprinted, n_o1, n_o2, state.kappa, state.sigma).ok()
        }
    };

    GateOutcome {
        n_o1,
        n_o2,
        true_n_o1,
        true_n_o2,
        true_component: chosen.component,
        classified_parity,
        true_parity,
        post_state,
        misclassified: classified_parity != true_parity,
    }
}
