//! Steady-state input–output relations of the ring cavity.
//!
//! A coherent bus enters port `i₁`; each photon in the signal mode `s₁` shifts
//! the intracavity phase by `θ`, and a static phase shifter removes one unit
//! of `θ`, so with `n` signal photons the round-trip phase is `(1 − n)θ`. At
//! `n = 1` the cavity is resonant: the bus is fully transmitted to `o₂`.
//!
//! Mode matrices follow the convention that a coherent input with amplitudes
//! `a` on the input ports leaves as the coherent output `M a`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{GateError, Result};
use crate::matrix::{Mat2, Mat3};
use crate::scalar::{expm1_i, lit, Real};

/// Physical knobs of one gate configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityParams<T = f64> {
    theta: T,
    tau: T,
    lambda: T,
    alpha: Complex<T>,
    eta1: T,
    eta2: T,
}

impl<T: Real> CavityParams<T> {
    /// Lossless cavity with perfect detectors.
    pub fn new(theta: T, tau: T, alpha: Complex<T>) -> Result<Self> {
        Self::from_parts(theta, tau, T::zero(), alpha, T::one(), T::one())
    }

    /// Lossless cavity with a real bus amplitude.
    pub fn real(theta: T, tau: T, alpha: T) -> Result<Self> {
        Self::new(theta, tau, Complex::new(alpha, T::zero()))
    }

    pub fn from_parts(theta: T, tau: T, lambda: T, alpha: Complex<T>, eta1: T, eta2: T) -> Result<Self> {
        let p = CavityParams {
            theta,
            tau,
            lambda,
            alpha,
            eta1,
            eta2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_loss(self, lambda: T) -> Result<Self> {
        Self::from_parts(self.theta, self.tau, lambda, self.alpha, self.eta1, self.eta2)
    }

    pub fn with_efficiencies(self, eta1: T, eta2: T) -> Result<Self> {
        Self::from_parts(self.theta, self.tau, self.lambda, self.alpha, eta1, eta2)
    }

    pub fn with_alpha(self, alpha: Complex<T>) -> Result<Self> {
        Self::from_parts(self.theta, self.tau, self.lambda, alpha, self.eta1, self.eta2)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GateError::InvalidParams(msg));
        if !self.theta.is_finite() || self.theta == T::zero() {
            return bad(format!("theta must be finite and nonzero, got {}", self.theta));
        }
        if !(self.tau > T::zero() && self.tau < T::one()) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.lambda >= T::zero() && self.lambda < T::one()) {
            return bad(format!("lambda must lie in [0, 1), got {}", self.lambda));
        }
        for (name, eta) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(eta >= T::zero() && eta <= T::one()) {
                return bad(format!("{name} must lie in [0, 1], got {eta}"));
            }
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return bad("alpha must be finite".into());
        }
        Ok(())
    }

    pub fn theta(&self) -> T {
        self.theta
    }
    pub fn tau(&self) -> T {
        self.tau
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn alpha(&self) -> Complex<T> {
        self.alpha
    }
    pub fn eta1(&self) -> T {
        self.eta1
    }
    pub fn eta2(&self) -> T {
        self.eta2
    }
    pub fn is_lossless(&self) -> bool {
        self.lambda == T::zero()
    }

    /// Round-trip phase `(1 − n)θ` for `n` signal photons.
    fn detuning(&self, n: u32) -> T {
        (T::one() - lit::<T>(n as f64)) * self.theta
    }
}

/// Lossless reflectivity `κ_n` and transmissivity `σ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferCoefficients<T = f64> {
    pub n: u32,
    pub kappa: Complex<T>,
    pub sigma: Complex<T>,
}

impl<T: Real> TransferCoefficients<T> {
    /// `|σ_n|²` from the sine form, independent of the quotient form.
    pub fn sigma_sq_closed_form(tau: T, theta: T, n: u32) -> T {
        let half = (T::one() - lit::<T>(n as f64)) * theta / lit(2.0);
        let s = half.sin();
        T::one() / (T::one() + lit::<T>(4.0) * (T::one() - tau) / (tau * tau) * s * s)
    }
}

/// Lossy three-port coefficients `A_n`, `B_n`, `C_n` and the common denominator `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyTransferCoefficients<T = f64> {
    pub n: u32,
    pub a_n: Complex<T>,
    pub b_n: Complex<T>,
    pub c_n: Complex<T>,
    pub gamma: Complex<T>,
}

pub fn transfer_coefficients<T: Real>(params: &CavityParams<T>, n: u32) -> TransferCoefficients<T> {
    let tau = params.tau;
    let em1 = expm1_i(params.detuning(n));
    let one_minus_tau = T::one() - tau;
    // 1 − (1 − τ)e^{iφ} = τ − (1 − τ)(e^{iφ} − 1)
    let denom = Complex::new(tau, T::zero()) - em1 * one_minus_tau;
    TransferCoefficients {
        n,
        kappa: em1 * one_minus_tau.sqrt() / denom,
        sigma: Complex::new(tau, T::zero()) / denom,
    }
}

struct LossyParts<T> {
    em1: Complex<T>,
    s: T,
    one_minus_s: T,
    gamma: Complex<T>,
}

fn lossy_parts<T: Real>(params: &CavityParams<T>, n: u32) -> LossyParts<T> {
    let tau = params.tau;
    let lambda = params.lambda;
    let em1 = expm1_i(params.detuning(n));
    let s = (T::one() - lambda).sqrt();
    let one_minus_s = lambda / (T::one() + s);
    let q = (T::one() - tau) * s;
    let one_minus_q = tau + (T::one() - tau) * one_minus_s;
    LossyParts {
        em1,
        s,
        one_minus_s,
        gamma: Complex::new(one_minus_q, T::zero()) - em1 * q,
    }
}

pub fn lossy_transfer_coefficients<T: Real>(params: &CavityParams<T>, n: u32) -> LossyTransferCoefficients<T> {
    let tau = params.tau;
    let lambda = params.lambda;
    let LossyParts { em1, s, one_minus_s, gamma } = lossy_parts(params, n);
    let e = em1 + T::one();
    // √(1−λ)e^{iφ} − 1
    let a_num = em1 * s - one_minus_s;
    LossyTransferCoefficients {
        n,
        a_n: a_num * (T::one() - tau).sqrt() / gamma,
        b_n: Complex::new(tau, T::zero()) / gamma,
        c_n: e * (lambda * tau * (T::one() - tau)).sqrt() / gamma,
        gamma,
    }
}

/// Weak-nonlinearity, small-`τ` magnitudes `(|κ|², |σ|²)` as functions of `r = θ/τ`.
pub fn approx_magnitudes<T: Real>(r: T) -> Result<(T, T)> {
    if r.is_nan() || r <= T::zero() {
        return Err(GateError::Domain(format!("r = θ/τ must be positive, got {r}")));
    }
    if r.is_infinite() {
        return Ok((T::one(), T::zero()));
    }
    let sigma_sq = T::one() / (r * r + T::one());
    Ok((T::one() - sigma_sq, sigma_sq))
}

/// Lossless 2×2 mode matrix `[[κ_n, e^{i(1−n)θ}σ_n], [σ_n, κ_n]]`.
pub fn mode_unitary<T: Real>(params: &CavityParams<T>, n: u32) -> Mat2<T> {
    let c = transfer_coefficients(params, n);
    let e = expm1_i(params.detuning(n)) + T::one();
    [[c.kappa, e * c.sigma], [c.sigma, c.kappa]]
}

/// Lossy 3×3 mode matrix over ports `(1, 2, 3)`; port 3 is the loss channel.
pub fn lossy_mode_matrix<T: Real>(params: &CavityParams<T>, n: u32) -> Mat3<T> {
    let tau = params.tau;
    let lambda = params.lambda;
    let c = lossy_transfer_coefficients(params, n);
    let LossyParts { em1, s, one_minus_s, gamma } = lossy_parts(params, n);
    let e = em1 + T::one();
    let one_minus_tau = T::one() - tau;
    let re = |x: T| Complex::new(x, T::zero());
    // (1 − τ)e^{iφ} − √(1−λ)
    let corner = em1 * one_minus_tau + (one_minus_s - tau);
    [
        [c.a_n, e * (tau * s) / gamma, re((tau * lambda).sqrt()) / gamma],
        [c.b_n, c.a_n, re((lambda * tau * one_minus_tau).sqrt()) / gamma],
        [c.c_n, c.c_n / one_minus_tau.sqrt(), corner / gamma],
    ]
}
