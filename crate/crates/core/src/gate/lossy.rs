//! Lossy-bus variant of the protocol.
//!
//! Photon absorption inside the cavity is a third port `o₃` that is traced
//! out. Tracing leaves the qubit ⊗ `(o₁, o₂)` state as a mixture whose
//! inter-branch coherences are damped by the factors `y₁`, `y₂`, `y₃`, the
//! squared overlaps of the loss-port coherent states. The even branch keeps
//! `o₁` in `|A₁α⟩`, so `o₁` is displaced by `−A₁α` before detection.

use num_complex::Complex;
use serde::Serialize;

use crate::cavity::{lossy_transfer_coefficients, CavityParams};
use crate::error::{GateError, Result};
use crate::scalar::{lit, principal_arg, Real};
use crate::states::{Component, PolarizationState};

/// `⟨β|γ⟩ = exp(−|β|²/2 − |γ|²/2 + β*γ)`.
pub fn coherent_overlap<T: Real>(beta: Complex<T>, gamma: Complex<T>) -> Complex<T> {
    let half = lit::<T>(0.5);
    (beta.conj() * gamma - (beta.norm_sqr() + gamma.norm_sqr()) * half).exp()
}

/// Coherent amplitudes of one group of components on `(o₁, o₂, o₃)` plus the
/// phase its ket has accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyBranch<T = f64> {
    pub o1: Complex<T>,
    pub o2: Complex<T>,
    pub o3: Complex<T>,
    pub phase: T,
}

/// Coherence factors between the even group, HV and VH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coherences<T = f64> {
    /// even ↔ HV
    pub y1: T,
    /// even ↔ VH
    pub y2: T,
    /// HV ↔ VH
    pub y3: T,
}

/// Branch-pair form of the traced-out state `ρ_{12 o₁ o₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyState<T = f64> {
    pub x: [Complex<T>; 4],
    /// Shared by HH and VV.
    pub even: LossyBranch<T>,
    pub hv: LossyBranch<T>,
    pub vh: LossyBranch<T>,
    pub y: Coherences<T>,
}

impl<T: Real> LossyState<T> {
    pub fn branch(&self, c: Component) -> &LossyBranch<T> {
        match c {
            Component::HH | Component::VV => &self.even,
            Component::HV => &self.hv,
            Component::VH => &self.vh,
        }
    }
}

pub fn evolve_lossy<T: Real>(psi: &PolarizationState<T>, params: &CavityParams<T>) -> LossyState<T> {
    let alpha = params.alpha();
    let [c0, c1, c2] = [0, 1, 2].map(|n| lossy_transfer_coefficients(params, n));
    let branch = |c: &crate::cavity::LossyTransferCoefficients<T>| LossyBranch {
        o1: c.a_n * alpha,
        o2: c.b_n * alpha,
        o3: c.c_n * alpha,
        phase: T::zero(),
    };
    let (even, hv, vh) = (branch(&c1), branch(&c0), branch(&c2));
    let y = |a: &LossyBranch<T>, b: &LossyBranch<T>| coherent_overlap(a.o3, b.o3).norm_sqr();
    LossyState {
        x: psi.amplitudes(),
        y: Coherences {
            y1: y(&hv, &even),
            y2: y(&vh, &even),
            y3: y(&vh, &hv),
        },
        even,
        hv,
        vh,
    }
}

/// Shifts `o₁` of every branch by `−A₁α`.
///
/// `D(β)|γ⟩ = e^{i Im(βγ*)}|γ + β⟩`, so each ket also picks up a phase,
/// accumulated in [`LossyBranch::phase`].
pub fn displace<T: Real>(state: &LossyState<T>, params: &CavityParams<T>) -> LossyState<T> {
    let shift = -(lossy_transfer_coefficients(params, 1).a_n * params.alpha());
    let displace = |b: &LossyBranch<T>| LossyBranch {
        o1: b.o1 + shift,
        phase: b.phase + (shift * b.o1.conj()).im,
        ..*b
    };
    LossyState {
        even: displace(&state.even),
        hv: displace(&state.hv),
        vh: displace(&state.vh),
        ..*state
    }
}

/// Outcome of [`displace_and_correct`]: the corrected state and the static
/// phases that were removed from the even, HV and VH kets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Displaced<T = f64> {
    pub state: LossyState<T>,
    pub removed_phases: [T; 3],
}

/// [`displace`] followed by static phase shifters that cancel the phases
/// the displacement left on each ket.
pub fn displace_and_correct<T: Real>(state: &LossyState<T>, params: &CavityParams<T>) -> Displaced<T> {
    let shifted = displace(state, params);
    let removed_phases = [
        shifted.even.phase - state.even.phase,
        shifted.hv.phase - state.hv.phase,
        shifted.vh.phase - state.vh.phase,
    ];
    let strip = |b: &LossyBranch<T>, p: T| LossyBranch { phase: b.phase - p, ..*b };
    Displaced {
        state: LossyState {
            even: strip(&shifted.even, removed_phases[0]),
            hv: strip(&shifted.hv, removed_phases[1]),
            vh: strip(&shifted.vh, removed_phases[2]),
            ..shifted
        },
        removed_phases,
    }
}

/// Two-level density operator on `{HV, VH}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OddDensity<T = f64> {
    m: [[Complex<T>; 2]; 2],
}

impl<T: Real> OddDensity<T> {
    /// `|x₁|²|HV⟩⟨HV| + |x₂|²|VH⟩⟨VH| + y x₁x₂*|HV⟩⟨VH| + h.c.`, unit trace.
    pub fn new(x1: Complex<T>, x2: Complex<T>, y: T) -> Result<Self> {
        if !(y >= T::zero() && y <= T::one()) {
            return Err(GateError::Domain(format!("coherence factor must lie in [0, 1], got {y}")));
        }
        let off = x1 * x2.conj() * y;
        Self::from_unnormalized(x1.norm_sqr(), x2.norm_sqr(), off)
    }

    fn from_unnormalized(d0: T, d1: T, off: Complex<T>) -> Result<Self> {
        let tr = d0 + d1;
        if !(tr > T::zero()) {
            return Err(GateError::ZeroNorm {
                norm: tr.to_f64().unwrap_or(f64::NAN),
            });
        }
        let re = |x: T| Complex::new(x / tr, T::zero());
        Ok(OddDensity {
            m: [[re(d0), off / tr], [off.conj() / tr, re(d1)]],
        })
    }

    pub fn matrix(&self) -> [[Complex<T>; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> T {
        self.m[0][0].re + self.m[1][1].re
    }

    pub fn coherence(&self) -> Complex<T> {
        self.m[0][1]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let half = lit::<T>(0.5);
        let mean = (a + d) * half;
        let gap = (((a - d) * half).powi(2) + self.m[0][1].norm_sqr()).sqrt();
        [mean - gap, mean + gap]
    }

    pub fn purity(&self) -> T {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        a * a + d * d + lit::<T>(2.0) * self.m[0][1].norm_sqr()
    }

    /// `⟨φ|ρ|φ⟩ / (⟨φ|φ⟩ tr ρ)` for `|φ⟩ = x₁|HV⟩ + x₂|VH⟩`.
    pub fn fidelity(&self, x1: Complex<T>, x2: Complex<T>) -> T {
        let v = [x1, x2];
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..2 {
            for j in 0..2 {
                acc = acc + v[i].conj() * self.m[i][j] * v[j];
            }
        }
        acc.re / ((x1.norm_sqr() + x2.norm_sqr()) * self.trace())
    }
}

/// Odd-parity output after loss for input odd amplitudes `x1`, `x2`.
pub fn odd_state_after_loss<T: Real>(params: &CavityParams<T>, x1: Complex<T>, x2: Complex<T>) -> Result<OddDensity<T>> {
    let psi = PolarizationState::new([Complex::new(T::zero(), T::zero()), x1, x2, Complex::new(T::zero(), T::zero())])?;
    let y3 = evolve_lossy(&psi, params).y.y3;
    OddDensity::new(x1, x2, y3)
}

/// [`odd_state_after_loss`] with `x₁ = x₂ = ½`.
pub fn odd_state_after_loss_uniform<T: Real>(params: &CavityParams<T>) -> OddDensity<T> {
    let h = Complex::new(lit(0.5), T::zero());
    odd_state_after_loss(params, h, h).expect("uniform amplitudes are valid")
}

/// `ln |⟨n|β⟩|` up to the `−½ ln n!` term, and `arg ⟨n|β⟩`.
fn fock_log_amplitude<T: Real>(beta: Complex<T>, n: u64) -> (T, T) {
    let nf = T::from_u64(n).expect("count fits scalar");
    let mag = beta.norm();
    let log_mag = if n == 0 {
        T::zero()
    } else if mag == T::zero() {
        T::neg_infinity()
    } else {
        nf * mag.ln()
    };
    (log_mag - beta.norm_sqr() * lit(0.5), nf * principal_arg(beta))
}

/// Odd qubit state after detecting `(n_o1, n_o2)` on a displaced, corrected
/// lossy state and applying the feedforward with `Arg(A₀ − A₁)` and `Arg(B₀)`.
pub fn project_lossy_odd<T: Real>(
    state: &LossyState<T>,
    params: &CavityParams<T>,
    n_o1: u64,
    n_o2: u64,
) -> Result<OddDensity<T>> {
    let amp = |b: &LossyBranch<T>| {
        let (l1, p1) = fock_log_amplitude(b.o1, n_o1);
        let (l2, p2) = fock_log_amplitude(b.o2, n_o2);
        (l1 + l2, p1 + p2 + b.phase)
    };
    let (lh, ph) = amp(&state.hv);
    let (lv, pv) = amp(&state.vh);
    let top = lh.max(lv);
    if top == T::neg_infinity() {
        return Err(GateError::ZeroNorm { norm: 0.0 });
    }
    let rh = Complex::from_polar((lh - top).exp(), ph);
    let rv = Complex::from_polar((lv - top).exp(), pv);
    let x1 = state.x[Component::HV.index()];
    let x2 = state.x[Component::VH.index()];

    let c0 = lossy_transfer_coefficients(params, 0);
    let c1 = lossy_transfer_coefficients(params, 1);
    let nf = |n: u64| T::from_u64(n).expect("count fits scalar");
    let phi = nf(n_o1) * principal_arg(c0.a_n - c1.a_n) + nf(n_o2) * principal_arg(c0.b_n);

    let off = x1 * rh * (x2 * rv).conj() * state.y.y3 * Complex::from_polar(T::one(), -(phi + phi));
    OddDensity::from_unnormalized((x1 * rh).norm_sqr(), (x2 * rv).norm_sqr(), off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::evolve_lossless;
    use proptest::prelude::*;

    fn lossy(theta: f64, tau: f64, lambda: f64, alpha: f64) -> CavityParams {
        CavityParams::real(theta, tau, alpha).unwrap().with_loss(lambda).unwrap()
    }

    #[test]
    fn overlap_formula() {
        let b = Complex::new(0.3f64, -0.2);
        assert!((coherent_overlap(b, b) - 1.0).norm() < 1e-15);
        let g = Complex::new(-0.5, 0.9);
        assert!((coherent_overlap(b, g).norm_sqr() - (-(b - g).norm_sqr()).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_loss_matches_lossless() {
        let p = CavityParams::real(1e-3f64, 1e-3, 4.0).unwrap();
        let psi = PolarizationState::uniform();
        let l = evolve_lossy(&psi, &p);
        assert_eq!((l.y.y1, l.y.y2, l.y.y3), (1.0, 1.0, 1.0));
        let h = evolve_lossless(&psi, &p).unwrap();
        for c in Component::ALL {
            let hb = h.branch(c).unwrap();
            let lb = l.branch(c);
            assert!((hb.o1 - lb.o1).norm() < 1e-12);
            assert!((hb.o2 - lb.o2).norm() < 1e-12);
        }
        let rho = odd_state_after_loss_uniform(&p);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn y3_closed_form_for_real_alpha() {
        let p = lossy(1e-4, 1e-4, 1e-4, 4.0);
        let l = evolve_lossy(&PolarizationState::uniform(), &p);
        let c0 = lossy_transfer_coefficients(&p, 0).c_n;
        let expected = (-4.0 * 16.0 * c0.im * c0.im).exp();
        assert!((l.y.y3 - expected).abs() < 1e-12);
        for y in [l.y.y1, l.y.y2, l.y.y3] {
            assert!(y > 0.0 && y <= 1.0);
        }
    }

    #[test]
    fn displacement_empties_even_port() {
        let p = lossy(1e-4, 1e-4, 1e-4, 4.0);
        let l = evolve_lossy(&PolarizationState::uniform(), &p);
        let d = displace_and_correct(&l, &p);
        assert_eq!(d.state.even.o1, Complex::new(0.0, 0.0));
        let c0 = lossy_transfer_coefficients(&p, 0).a_n;
        let c1 = lossy_transfer_coefficients(&p, 1).a_n;
        assert!((d.state.hv.o1 - (c0 - c1) * 4.0).norm() < 1e-12);
        assert!((d.state.vh.o1 - (c0 - c1).conj() * 4.0).norm() < 1e-12);
        // phase on HV ket is |α|² A₁ Im A₀, VH the opposite, even none
        let chi = 16.0 * c1.re * c0.im;
        assert!((d.removed_phases[1] - chi).abs() < 1e-12);
        assert!((d.removed_phases[2] + chi).abs() < 1e-12);
        assert_eq!(d.removed_phases[0], 0.0);
        assert_eq!(d.state.hv.phase, 0.0);
    }

    #[test]
    fn displacement_at_zero_loss_gives_kappa() {
        let p = CavityParams::real(1e-3, 1e-3, 4.0).unwrap();
        let d = displace_and_correct(&evolve_lossy(&PolarizationState::uniform(), &p), &p);
        let k = crate::cavity::transfer_coefficients(&p, 0).kappa;
        assert!((d.state.hv.o1 - k * 4.0).norm() < 1e-12);
    }

    #[test]
    fn uncorrected_displacement_leaves_relative_phase() {
        let p = lossy(1e-4, 1e-4, 1e-4, 4.0);
        let psi = PolarizationState::uniform();
        let raw = displace(&evolve_lossy(&psi, &p), &p);
        let h = Complex::new(0.5, 0.0);
        let reference = odd_state_after_loss(&p, h, h).unwrap();
        let got = project_lossy_odd(&raw, &p, 2, 1).unwrap();
        assert!((got.coherence() - reference.coherence()).norm() > 1e-6);
    }

    #[test]
    fn fidelity_is_half_plus_half_y3() {
        let p = lossy(1e-4, 1e-4, 3e-4, 2.0);
        let rho = odd_state_after_loss_uniform(&p);
        let y3 = evolve_lossy(&PolarizationState::uniform(), &p).y.y3;
        let h = Complex::new(0.5, 0.0);
        assert!((rho.fidelity(h, h) - (0.5 + 0.5 * y3)).abs() < 1e-12);
        assert!((rho.fidelity(h, h) - crate::analysis::odd_fidelity(&p)).abs() < 1e-10);
    }

    #[test]
    fn fully_dephased_limit() {
        let h = Complex::new(0.5f64, 0.0);
        let rho = OddDensity::new(h, h, 0.0).unwrap();
        assert!((rho.fidelity(h, h) - 0.5).abs() < 1e-15);
        assert!(OddDensity::new(h, h, 1.5).is_err());
    }

    #[test]
    fn lossy_feedforward_recovers_rho_odd() {
        let p = lossy(1e-4, 1e-4, 2e-4, 4.0);
        let x1 = Complex::new(0.5, 0.0);
        let x2 = Complex::from_polar(0.5, 0.4);
        let psi = PolarizationState::new([Complex::new(0.5, 0.0), x1, x2, Complex::new(0.0, 0.5)]).unwrap();
        let d = displace_and_correct(&evolve_lossy(&psi, &p), &p);
        let reference = odd_state_after_loss(&p, x1, x2).unwrap();
        for (n1, n2) in [(1, 0), (3, 7), (12, 2), (40, 40)] {
            let got = project_lossy_odd(&d.state, &p, n1, n2).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((got.matrix()[i][j] - reference.matrix()[i][j]).norm() < 1e-10, "({n1},{n2})");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn odd_density_is_a_state(
            theta in 1e-6f64..1.0, tau in 1e-6f64..0.99, lambda in 0f64..0.9, alpha in 0f64..40.0,
            x1 in (-1.0f64..1.0, -1.0f64..1.0), x2 in (-1.0f64..1.0, -1.0f64..1.0)
        ) {
            let x1 = Complex::new(x1.0, x1.1);
            let x2 = Complex::new(x2.0, x2.1);
            prop_assume!(x1.norm_sqr() + x2.norm_sqr() > 1e-6);
            let rho = odd_state_after_loss(&lossy(theta, tau, lambda, alpha), x1, x2).unwrap();
            prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
            prop_assert!(rho.eigenvalues()[0] >= -1e-12);
            let m = rho.matrix();
            prop_assert!((m[0][1] - m[1][0].conj()).norm() < 1e-15);
            prop_assert!(m[0][1].norm() <= (m[0][0].re * m[1][1].re).sqrt() + 1e-15);
        }
    }
}
