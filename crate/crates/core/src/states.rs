//! Two-qubit polarization states, PBS path routing and the hybrid qubit ⊗ bus state.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{GateError, Result};
use crate::scalar::{lit, Real};

/// Computational basis label of the two polarization qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    HH,
    HV,
    VH,
    VV,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::HH, Component::HV, Component::VH, Component::VV];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Photons routed into the signal mode `s₁` by the first PBS.
    pub fn signal_photons(self) -> u32 {
        match self {
            Component::HH | Component::VV => 1,
            Component::HV => 0,
            Component::VH => 2,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

pub fn parity_of(component: Component) -> Parity {
    match component {
        Component::HH | Component::VV => Parity::Even,
        Component::HV | Component::VH => Parity::Odd,
    }
}

const MIN_NORM: f64 = 1e-12;

fn normalize<T: Real, const N: usize>(amps: [Complex<T>; N]) -> Result<[Complex<T>; N]> {
    let norm = amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    if !(norm >= lit(MIN_NORM)) {
        return Err(GateError::ZeroNorm {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(amps.map(|a| a / norm))
}

/// `x₀|HH⟩ + x₁|HV⟩ + x₂|VH⟩ + x₃|VV⟩`, normalized at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState<T = f64> {
    amps: [Complex<T>; 4],
}

impl<T: Real> PolarizationState<T> {
    pub fn new(amps: [Complex<T>; 4]) -> Result<Self> {
        Ok(PolarizationState { amps: normalize(amps)? })
    }

    pub fn from_real(amps: [T; 4]) -> Result<Self> {
        Self::new(amps.map(|a| Complex::new(a, T::zero())))
    }

    pub fn basis(component: Component) -> Self {
        let mut amps = [Complex::new(T::zero(), T::zero()); 4];
        amps[component.index()] = Complex::new(T::one(), T::zero());
        PolarizationState { amps }
    }

    /// All four components with amplitude ½.
    pub fn uniform() -> Self {
        PolarizationState {
            amps: [Complex::new(lit(0.5), T::zero()); 4],
        }
    }

    /// `(|HV⟩ + |VH⟩)/√2`.
    pub fn odd_bell() -> Self {
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        PolarizationState { amps: [z, h, h, z] }
    }

    pub fn amplitudes(&self) -> [Complex<T>; 4] {
        self.amps
    }

    pub fn amplitude(&self, c: Component) -> Complex<T> {
        self.amps[c.index()]
    }

    /// Weight of the even or odd subspace.
    pub fn parity_weight(&self, parity: Parity) -> T {
        Component::ALL
            .iter()
            .filter(|c| parity_of(**c) == parity)
            .map(|c| self.amps[c.index()].norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord::from_pairs(Component::ALL.iter().map(|c| (*c, self.amps[c.index()])))
    }
}

/// One branch of the path-mode state after the first PBS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathBranch<T = f64> {
    pub component: Component,
    pub s1: u32,
    pub s2: u32,
    pub amplitude: Complex<T>,
}

impl<T> PathBranch<T> {
    /// One photon per path mode.
    pub fn is_balanced(&self) -> bool {
        self.s1 == 1 && self.s2 == 1
    }

    /// Both photons in the same path mode.
    pub fn is_bunched(&self) -> bool {
        !self.is_balanced()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathState<T = f64> {
    pub branches: Vec<PathBranch<T>>,
}

impl<T: Real> PathState<T> {
    pub fn norm_sqr(&self) -> T {
        self.branches.iter().map(|b| b.amplitude.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }
}

/// PBS₁ transmits H and reflects V: HH and VV leave one photon in each path
/// mode, HV bunches both in `s₂`, VH both in `s₁`. Zero-amplitude components
/// are dropped.
pub fn route_through_pbs<T: Real>(psi: &PolarizationState<T>) -> PathState<T> {
    let branches = Component::ALL
        .iter()
        .filter(|c| psi.amplitude(**c) != Complex::new(T::zero(), T::zero()))
        .map(|&component| {
            let s1 = component.signal_photons();
            PathBranch {
                component,
                s1,
                s2: 2 - s1,
                amplitude: psi.amplitude(component),
            }
        })
        .collect();
    PathState { branches }
}

/// A polarization component entangled with a product coherent state on `(o₁, o₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridBranch<T = f64> {
    pub component: Component,
    pub weight: Complex<T>,
    pub o1: Complex<T>,
    pub o2: Complex<T>,
}

/// Exact lossless output `Σ x_c |c⟩|β_c⟩_{o₁}|γ_c⟩_{o₂}`.
///
/// `kappa` and `sigma` are the `n = 0` coefficients that the feedforward
/// phase is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState<T = f64> {
    pub branches: Vec<HybridBranch<T>>,
    pub kappa: Complex<T>,
    pub sigma: Complex<T>,
}

impl<T: Real> HybridState<T> {
    pub fn total_weight(&self) -> T {
        self.branches.iter().map(|b| b.weight.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }

    pub fn branch(&self, c: Component) -> Option<&HybridBranch<T>> {
        self.branches.iter().find(|b| b.component == c)
    }
}

/// Normalized state in the even `{HH, VV}` or odd `{HV, VH}` subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityState<T = f64> {
    parity: Parity,
    amps: [Complex<T>; 2],
}

impl<T: Real> ParityState<T> {
    pub fn new(parity: Parity, amps: [Complex<T>; 2]) -> Result<Self> {
        Ok(ParityState {
            parity,
            amps: normalize(amps)?,
        })
    }

    /// Projection of `psi` onto the given parity subspace, renormalized.
    pub fn project(psi: &PolarizationState<T>, parity: Parity) -> Result<Self> {
        let [a, b] = Self::components(parity);
        Self::new(parity, [psi.amplitude(a), psi.amplitude(b)])
    }

    pub fn components(parity: Parity) -> [Component; 2] {
        match parity {
            Parity::Even => [Component::HH, Component::VV],
            Parity::Odd => [Component::HV, Component::VH],
        }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn amplitudes(&self) -> [Complex<T>; 2] {
        self.amps
    }

    /// `|⟨self|other⟩|²`; insensitive to global phase, zero across parities.
    pub fn fidelity(&self, other: &Self) -> T {
        if self.parity != other.parity {
            return T::zero();
        }
        let ov = self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1];
        ov.norm_sqr()
    }

    pub fn to_record(&self) -> StateRecord {
        let [a, b] = Self::components(self.parity);
        StateRecord::from_pairs([(a, self.amps[0]), (b, self.amps[1])])
    }
}

/// JSON-friendly view of a pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub amplitudes: Vec<AmplitudeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub component: Component,
    pub re: f64,
    pub im: f64,
}

impl StateRecord {
    fn from_pairs<T: Real>(pairs: impl IntoIterator<Item = (Component, Complex<T>)>) -> Self {
        StateRecord {
            amplitudes: pairs
                .into_iter()
                .map(|(component, a)| AmplitudeRecord {
                    component,
                    re: a.re.to_f64().unwrap_or(f64::NAN),
                    im: a.im.to_f64().unwrap_or(f64::NAN),
                })
                .collect(),
        }
    }
}
