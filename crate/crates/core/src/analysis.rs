//! Closed-form error probabilities and fidelities, the required-amplitude
//! solvers, and the parameter sweeps behind the published curves.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::cavity::{approx_magnitudes, transfer_coefficients, CavityParams};
use crate::error::{GateError, Result};
use crate::scalar::{lit, underflow_limit, Real};

/// A probability together with an underflow flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checked<T = f64> {
    pub value: T,
    /// Set when the exponent went past [`underflow_limit`] and the value was
    /// reported as zero.
    pub underflow: bool,
}

/// `scale · exp(−x)` for `x ≥ 0`, flushed to zero past the underflow limit.
fn scaled_exp_neg<T: Real>(scale: T, x: T) -> Checked<T> {
    if x > underflow_limit::<T>() {
        Checked {
            value: T::zero(),
            underflow: true,
        }
    } else {
        Checked {
            value: scale * (-x).exp(),
            underflow: false,
        }
    }
}

/// Odd branch read as vacuum on `o₁`, uniform input: `½ exp(−|κα|²)`.
pub fn error_probability<T: Real>(kappa_alpha_mag: T) -> T {
    error_probability_checked(kappa_alpha_mag).value
}

pub fn error_probability_checked<T: Real>(kappa_alpha_mag: T) -> Checked<T> {
    scaled_exp_neg(lit(0.5), kappa_alpha_mag * kappa_alpha_mag)
}

/// Same as [`error_probability`] for a detector of efficiency `eta1` on `o₁`.
pub fn error_probability_eta<T: Real>(kappa_alpha_mag: T, eta1: T) -> Result<T> {
    check_efficiency(eta1, "eta1")?;
    Ok(scaled_exp_neg(lit(0.5), eta1 * kappa_alpha_mag * kappa_alpha_mag).value)
}

/// Bus amplitude `α/√η₁` that restores the perfect-detector error rate.
pub fn compensated_alpha<T: Real>(alpha: T, eta1: T) -> Result<T> {
    check_efficiency(eta1, "eta1")?;
    if eta1 == T::zero() {
        return Err(GateError::Domain("a blind detector cannot be compensated".into()));
    }
    Ok(alpha / eta1.sqrt())
}

fn check_efficiency<T: Real>(eta: T, name: &str) -> Result<()> {
    if eta >= T::zero() && eta <= T::one() {
        Ok(())
    } else {
        Err(GateError::Domain(format!("{name} must lie in [0, 1], got {eta}")))
    }
}

/// `|α| ≈ (1/r)·√((r² + 1)·ln(1/(2P)))` in the weak-coupling approximation.
pub fn required_alpha<T: Real>(r: T, p_err: T) -> Result<T> {
    check_target(p_err)?;
    let (kappa_sq, _) = approx_magnitudes(r)?;
    Ok(((-(lit::<T>(2.0) * p_err).ln()) / kappa_sq).sqrt())
}

fn check_target<T: Real>(p_err: T) -> Result<()> {
    if p_err > T::zero() && p_err < lit(0.5) {
        Ok(())
    } else {
        Err(GateError::Domain(format!("target error probability must lie in (0, 1/2), got {p_err}")))
    }
}

pub const BISECTION_TOL: f64 = 1e-10;
pub const BISECTION_BRACKET: f64 = 1e3;

/// Exact `|α|` solving `½ exp(−|κ₀α|²) = p_err` by bisection on `[0, 10³]`.
pub fn required_alpha_exact<T: Real>(theta: T, tau: T, p_err: T) -> Result<T> {
    check_target(p_err)?;
    let base = CavityParams::real(theta, tau, T::one())?;
    let kappa = transfer_coefficients(&base, 0).kappa.norm();
    let excess = |a: T| error_probability(kappa * a) - p_err;
    let (mut lo, mut hi) = (T::zero(), lit::<T>(BISECTION_BRACKET));
    if excess(hi) > T::zero() {
        return Err(GateError::Domain(format!(
            "|alpha| above {BISECTION_BRACKET} needed for theta = {theta}, tau = {tau}"
        )));
    }
    while hi - lo > lit(BISECTION_TOL) {
        let mid = (lo + hi) * lit(0.5);
        if excess(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit(0.5))
}

/// Chance that a lost photon corrupts the odd-branch feedforward:
/// `1 − exp[(η₁|κ|² + η₂|σ|² − 1)|α|²]`.
pub fn phase_error_probability<T: Real>(kappa: Complex<T>, sigma: Complex<T>, alpha: Complex<T>, eta1: T, eta2: T) -> T {
    let rate = if eta1 == eta2 {
        // |κ|² + |σ|² = 1
        eta1 - T::one()
    } else {
        eta1 * kappa.norm_sqr() + eta2 * sigma.norm_sqr() - T::one()
    };
    -(rate * alpha.norm_sqr()).exp_m1()
}

/// Terms shared by the lossy closed forms: `(1 − q)` and `|1 − q e^{iθ}|²` with `q = (1 − τ)√(1 − λ)`.
fn lossy_denominators<T: Real>(params: &CavityParams<T>) -> (T, T) {
    let tau = params.tau();
    let lambda = params.lambda();
    let s = (T::one() - lambda).sqrt();
    let one_minus_s = lambda / (T::one() + s);
    let q = (T::one() - tau) * s;
    let one_minus_q = tau + (T::one() - tau) * one_minus_s;
    let half_sin = (params.theta() * lit(0.5)).sin();
    (one_minus_q, one_minus_q * one_minus_q + lit::<T>(4.0) * q * half_sin * half_sin)
}

/// Probability of reading an odd component as even with a lossy bus,
/// uniform input: `½ |⟨0|(A₀ − A₁)α⟩|²`.
pub fn loss_distinguish_error<T: Real>(params: &CavityParams<T>) -> T {
    loss_distinguish_error_checked(params).value
}

pub fn loss_distinguish_error_checked<T: Real>(params: &CavityParams<T>) -> Checked<T> {
    let tau = params.tau();
    let (one_minus_q, gamma0_sq) = lossy_denominators(params);
    let half_sin = (params.theta() * lit(0.5)).sin();
    // 2τ²(1−τ)(1−λ)(1 − cos θ)|α|², with 1 − cos θ = 2 sin²(θ/2)
    let num = lit::<T>(4.0) * tau * tau * (T::one() - tau) * (T::one() - params.lambda()) * half_sin * half_sin
        * params.alpha().norm_sqr();
    scaled_exp_neg(lit(0.5), num / (gamma0_sq * one_minus_q * one_minus_q))
}

/// Overlap of the lossy odd output with the ideal odd state, uniform input.
pub fn odd_fidelity<T: Real>(params: &CavityParams<T>) -> T {
    let tau = params.tau();
    let (_, gamma0_sq) = lossy_denominators(params);
    let sin = params.theta().sin();
    let num = lit::<T>(4.0) * tau * (T::one() - tau) * params.lambda() * params.alpha().norm_sqr() * sin * sin;
    let half = lit::<T>(0.5);
    half + half * scaled_exp_neg(T::one(), num / (gamma0_sq * gamma0_sq)).value
}

/// Quantity a sweep evaluates; each target fixes its own x variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    /// x = r, approximate inverse at fixed `p_err`.
    RequiredAlpha,
    /// x = r with θ = r·τ, exact bisection inverse at fixed `p_err`.
    RequiredAlphaExact,
    /// x = λ/θ.
    LossDistinguishError,
    /// x = λ/θ.
    OddFidelity,
    /// x = |κα|.
    ErrorProbability,
    /// x = η₁ at the `|κ₀α|` of the fixed parameters.
    ErrorProbabilityEta,
    /// x = η₁ = η₂.
    PhaseErrorProbability,
}

impl SweepTarget {
    pub fn name(self) -> &'static str {
        match self {
            SweepTarget::RequiredAlpha => "required_alpha",
            SweepTarget::RequiredAlphaExact => "required_alpha_exact",
            SweepTarget::LossDistinguishError => "loss_distinguish_error",
            SweepTarget::OddFidelity => "odd_fidelity",
            SweepTarget::ErrorProbability => "error_probability",
            SweepTarget::ErrorProbabilityEta => "error_probability_eta",
            SweepTarget::PhaseErrorProbability => "phase_error_probability",
        }
    }

    pub fn variable(self) -> &'static str {
        match self {
            SweepTarget::RequiredAlpha | SweepTarget::RequiredAlphaExact => "r",
            SweepTarget::LossDistinguishError | SweepTarget::OddFidelity => "lambda_over_theta",
            SweepTarget::ErrorProbability => "kappa_alpha",
            SweepTarget::ErrorProbabilityEta => "eta1",
            SweepTarget::PhaseErrorProbability => "eta",
        }
    }

    const ALL: [SweepTarget; 7] = [
        SweepTarget::RequiredAlpha,
        SweepTarget::RequiredAlphaExact,
        SweepTarget::LossDistinguishError,
        SweepTarget::OddFidelity,
        SweepTarget::ErrorProbability,
        SweepTarget::ErrorProbabilityEta,
        SweepTarget::PhaseErrorProbability,
    ];
}

impl FromStr for SweepTarget {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self> {
        SweepTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| GateError::Config(format!("unknown sweep target `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Evaluation grid; endpoints are hit exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(GateError::Config(format!("grid needs finite min < max, got [{min}, {max}]")));
        }
        if points < 2 {
            return Err(GateError::Config(format!("grid needs at least 2 points, got {points}")));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(GateError::Config(format!("log grid needs min > 0, got {min}")));
        }
        Ok(Grid {
            min,
            max,
            points,
            spacing,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.points {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub grid: Grid,
    pub params: CavityParams<f64>,
    /// Target error probability for the required-amplitude sweeps.
    pub p_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub x_name: String,
    pub y_name: String,
    pub rows: Vec<(f64, f64)>,
    pub underflow: Vec<bool>,
}

/// Fixed 17-significant-digit rendering; parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.x_name, self.y_name);
        for (x, y) in &self.rows {
            let _ = writeln!(out, "{},{}", format_float(*x), format_float(*y));
        }
        out
    }

    pub fn ys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }
}

fn eval_point(spec: &SweepSpec, x: f64) -> Result<Checked<f64>> {
    let p = &spec.params;
    let plain = |value| Checked { value, underflow: false };
    Ok(match spec.target {
        SweepTarget::RequiredAlpha => plain(required_alpha(x, spec.p_err)?),
        SweepTarget::RequiredAlphaExact => plain(required_alpha_exact(x * p.tau(), p.tau(), spec.p_err)?),
        SweepTarget::LossDistinguishError => loss_distinguish_error_checked(&p.with_loss(x * p.theta())?),
        SweepTarget::OddFidelity => plain(odd_fidelity(&p.with_loss(x * p.theta())?)),
        SweepTarget::ErrorProbability => error_probability_checked(x),
        SweepTarget::ErrorProbabilityEta => {
            let m = (transfer_coefficients(p, 0).kappa * p.alpha()).norm();
            plain(error_probability_eta(m, x)?)
        }
        SweepTarget::PhaseErrorProbability => {
            check_efficiency(x, "eta")?;
            let c = transfer_coefficients(p, 0);
            plain(phase_error_probability(c.kappa, c.sigma, p.alpha(), x, x))
        }
    })
}

/// Evaluates the target over the grid; points are computed in parallel and
/// kept in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let xs = spec.grid.values();
    let ys = xs
        .par_iter()
        .map(|&x| eval_point(spec, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        x_name: spec.target.variable().into(),
        y_name: spec.target.name().into(),
        underflow: ys.iter().map(|c| c.underflow).collect(),
        rows: xs.into_iter().zip(ys.into_iter().map(|c| c.value)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::evolve_lossy;
    use crate::states::PolarizationState;
    use proptest::prelude::*;

    fn params(theta: f64, tau: f64, alpha: f64) -> CavityParams {
        CavityParams::real(theta, tau, alpha).unwrap()
    }

    #[test]
    fn error_probability_values() {
        // mpmath: ½e^{−9} = 6.1704902043339775e-5, ½e^{−4} = 9.1578194443670901e-3
        assert!((error_probability(3.0f64) - 6.170_490_204_333_977_5e-5).abs() < 1e-19);
        assert!(error_probability(3.0) < 1e-4);
        assert_eq!(error_probability(0.0), 0.5);
        assert!((error_probability(2.0f64) - 9.157_819_444_367_09e-3).abs() < 1e-17);
        let c = error_probability_checked(30.0);
        assert!(c.underflow && c.value == 0.0);
        assert!(!error_probability_checked(26.0).underflow);
    }

    #[test]
    fn required_alpha_values() {
        // mpmath: √(2 ln 5000) = 4.1272734804992599
        assert!((required_alpha(1.0f64, 1e-4).unwrap() - 4.127_273_480_499_26).abs() < 1e-12);
        let asym = (5000.0f64).ln().sqrt();
        assert!((required_alpha(1e8, 1e-4).unwrap() - asym).abs() < 1e-10);
        assert!(required_alpha(1.0, 0.5).is_err());
        assert!(required_alpha(1.0, 0.0).is_err());
        assert!(required_alpha(0.0, 1e-4).is_err());
    }

    #[test]
    fn exact_inverse_close_to_approximation_for_small_couplings() {
        let approx = required_alpha(1.0f64, 1e-4).unwrap();
        let exact = required_alpha_exact(1e-4, 1e-4, 1e-4).unwrap();
        assert!((exact - approx).abs() / approx < 1e-3);
        let k = transfer_coefficients(&params(1e-4, 1e-4, 1.0), 0).kappa.norm();
        assert!((error_probability(k * exact) - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(error_probability_eta(2.5, 1.0).unwrap(), error_probability(2.5));
        let a = compensated_alpha(4.0f64, 0.9).unwrap();
        assert!((a - 4.216_370_213_557_839).abs() < 1e-12);
        assert!((error_probability_eta(0.7 * a, 0.9).unwrap() - error_probability(0.7 * 4.0)).abs() < 1e-16);
        assert!(compensated_alpha(4.0, 0.0).is_err());
        assert!(error_probability_eta(1.0, 1.1).is_err());
    }

    #[test]
    fn phase_error_examples() {
        let c = transfer_coefficients(&params(1e-3, 1e-3, 4.0), 0);
        let a = Complex::new(4.0, 0.0);
        assert_eq!(phase_error_probability(c.kappa, c.sigma, a, 1.0, 1.0), 0.0);
        // mpmath: 1 − e^{−0.16} = 0.14785621103378866
        let p = phase_error_probability(c.kappa, c.sigma, a, 0.99, 0.99);
        assert!((p - 0.147_856_211_033_788_66).abs() < 1e-15);
        let a = Complex::new((0.05f64 / 0.1).sqrt(), 0.0);
        let p = phase_error_probability(c.kappa, c.sigma, a, 0.9, 0.9);
        assert!((p - 0.048_770_575_499_285_99).abs() < 1e-15);
    }

    #[test]
    fn phase_error_independent_of_theta() {
        let a = Complex::new(4.0, 0.0);
        let reference = {
            let c = transfer_coefficients(&params(1e-3, 1e-3, 4.0), 0);
            phase_error_probability(c.kappa, c.sigma, a, 0.97, 0.97)
        };
        for theta in [1e-6, 1e-4, 0.1, 1.0, 2.5] {
            let c = transfer_coefficients(&params(theta, 1e-3, 4.0), 0);
            assert!((phase_error_probability(c.kappa, c.sigma, a, 0.97, 0.97) - reference).abs() <= 1e-15);
        }
    }

    #[test]
    fn loss_error_endpoints() {
        assert_eq!(loss_distinguish_error(&params(1e-3, 1e-3, 0.0)), 0.5);
        let base = params(1e-4, 1e-4, 1.0);
        let mut last = 1.0;
        for a in [2.0, 4.0, 30.0] {
            let pe = loss_distinguish_error(&base.with_alpha(Complex::new(a, 0.0)).unwrap().with_loss(2e-4).unwrap());
            assert!(pe < last);
            last = pe;
        }
    }

    #[test]
    fn loss_error_matches_displaced_amplitude() {
        // ½|⟨0|(A₀ − A₁)α⟩|² evaluated from the coefficients
        use crate::cavity::lossy_transfer_coefficients;
        let p = params(3e-4, 2e-4, 5.0).with_loss(4e-4).unwrap();
        let d = lossy_transfer_coefficients(&p, 0).a_n - lossy_transfer_coefficients(&p, 1).a_n;
        let direct = 0.5 * (-(d * 5.0).norm_sqr()).exp();
        assert!((loss_distinguish_error(&p) - direct).abs() < 1e-12);
    }

    #[test]
    fn odd_fidelity_bounds() {
        assert_eq!(odd_fidelity(&params(1e-3, 1e-3, 4.0)), 1.0);
        let f = odd_fidelity(&params(1e-4, 1e-4, 2.0).with_loss(5e-4).unwrap());
        assert!(f > 0.5 && f < 1.0);
    }

    #[test]
    fn unknown_target() {
        assert!(matches!("bogus".parse::<SweepTarget>(), Err(GateError::Config(_))));
        assert_eq!("odd_fidelity".parse::<SweepTarget>().unwrap(), SweepTarget::OddFidelity);
    }

    #[test]
    fn grids() {
        let g = Grid::new(0.1, 10.0, 200, Spacing::Log).unwrap();
        let v = g.values();
        assert_eq!((v[0], v[199]), (0.1, 10.0));
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(Grid::new(1.0, 1.0, 5, Spacing::Linear).is_err());
        assert!(Grid::new(0.0, 1.0, 1, Spacing::Linear).is_err());
        assert!(Grid::new(0.0, 1.0, 3, Spacing::Log).is_err());
    }

    #[test]
    fn figure_two_sweep() {
        let spec = SweepSpec {
            target: SweepTarget::RequiredAlpha,
            grid: Grid::new(0.1, 10.0, 201, Spacing::Log).unwrap(),
            params: params(1e-3, 1e-3, 4.0),
            p_err: 1e-4,
        };
        let t = sweep(&spec).unwrap();
        let mid = t.rows[100];
        assert!((mid.0 - 1.0).abs() < 1e-12);
        assert!((mid.1 - 4.128).abs() < 1e-3);
        let csv = t.to_csv();
        assert!(csv.starts_with("r,required_alpha\n"));
        let line = csv.lines().nth(101).unwrap();
        let y: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(y, mid.1);
    }

    #[test]
    fn figure_five_sweep_starts_at_one() {
        let spec = SweepSpec {
            target: SweepTarget::OddFidelity,
            grid: Grid::new(0.0, 10.0, 11, Spacing::Linear).unwrap(),
            params: params(1e-4, 1e-4, 2.0),
            p_err: 1e-4,
        };
        let t = sweep(&spec).unwrap();
        assert_eq!(t.rows[0].1, 1.0);
        // with τ = θ the exponent scales like r/((1 + r/2)² + 1)², so the
        // curve dips near r ≈ 1 and recovers
        let ys = t.ys();
        assert!(ys[1] < ys[0] && ys[10] > ys[1]);
        assert!(ys.iter().all(|&f| f > 0.5 && f <= 1.0));
        for &(r, f) in &t.rows {
            let approx = 0.5 + 0.5 * (-4.0 * r * 4.0 / ((1.0 + r / 2.0).powi(2) + 1.0).powi(2)).exp();
            assert!((f - approx).abs() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn zero_loss_reduction(theta in 1e-6f64..1.0, tau in 1e-6f64..0.99, alpha in 0f64..30.0) {
            let p = params(theta, tau, alpha);
            let k = transfer_coefficients(&p, 0).kappa;
            prop_assert!((loss_distinguish_error(&p) - error_probability((k * alpha).norm())).abs() < 1e-12);
            prop_assert_eq!(odd_fidelity(&p), 1.0);
        }

        #[test]
        fn fidelity_matches_y3(
            theta in 1e-6f64..1.0, tau in 1e-6f64..0.99, lambda in 0f64..0.5, alpha in 0f64..30.0
        ) {
            let p = params(theta, tau, alpha).with_loss(lambda).unwrap();
            let y3 = evolve_lossy(&PolarizationState::uniform(), &p).y.y3;
            prop_assert!((odd_fidelity(&p) - (0.5 + 0.5 * y3)).abs() < 1e-10);
        }

        #[test]
        fn consistency_triangle(r in 0.05f64..50.0, log_p in -12f64..-1.0) {
            let p = 10f64.powf(log_p);
            let a = required_alpha(r, p).unwrap();
            let (k2, _) = approx_magnitudes(r).unwrap();
            let back = error_probability(k2.sqrt() * a);
            prop_assert!((back - p).abs() < 1e-10);
        }

        #[test]
        fn monotone(a in 0f64..20.0, da in 1e-3f64..5.0, r1 in 0.05f64..50.0, dr in 1e-3f64..5.0) {
            let (b, r2) = (a + da, r1 + dr);
            prop_assert!(error_probability(a) > error_probability(b));
            prop_assert!(required_alpha(r1, 1e-4).unwrap() > required_alpha(r2, 1e-4).unwrap());
        }
    }
}
