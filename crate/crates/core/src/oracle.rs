//! Brute-force truncated Fock-space simulator used to cross-check the
//! coherent-state branch algebra.
//!
//! Everything here works directly with photon-number amplitudes: coherent
//! states are expanded term by term, passive two-mode transforms are applied
//! by expanding products of output creation operators, and detector
//! inefficiency is binomial thinning of the joint count distribution. None of
//! it goes through the closed forms it is compared against.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::cavity::{mode_unitary, CavityParams};
use crate::error::{GateError, Result};
use crate::gate::evolve_lossless;
use crate::matrix::{unitarity_residual, Mat2};
use crate::states::{parity_of, Component, Parity, PolarizationState};

pub const DEFAULT_TAIL_BOUND: f64 = 1e-12;
pub const VALIDATION_TOLERANCE: f64 = 1e-7;
const UNITARITY_TOLERANCE: f64 = 1e-10;

/// `⌈|α|² + 8|α| + 16⌉`.
pub fn default_cutoff(alpha_mag: f64) -> usize {
    (alpha_mag * alpha_mag + 8.0 * alpha_mag + 16.0).ceil() as usize
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Single-mode amplitudes over `|0⟩ … |cutoff⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
    deficit: f64,
}

impl FockVector {
    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Probability mass beyond the cutoff.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `ln |⟨n|α⟩|²` for a Poisson-distributed photon number with mean `mean`.
fn ln_poisson(mean: f64, n: usize, ln_fact: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + n as f64 * mean.ln() - ln_fact
}

pub fn coherent_fock(alpha: C64, cutoff: usize) -> Result<FockVector> {
    coherent_fock_with_bound(alpha, cutoff, DEFAULT_TAIL_BOUND)
}

/// `e^{−|α|²/2} αⁿ/√(n!)` for `n ≤ cutoff`, with the discarded tail mass
/// summed explicitly and checked against `tail_bound`.
pub fn coherent_fock_with_bound(alpha: C64, cutoff: usize, tail_bound: f64) -> Result<FockVector> {
    if cutoff < 1 {
        return Err(GateError::Contract("cutoff must be at least 1".into()));
    }
    let mean = alpha.norm_sqr();
    let phase = alpha.arg();

    // amplitude recurrence a_n = a_{n−1}·α/√n, carried in log magnitude
    let mut ln_fact = 0.0;
    let mut amps = Vec::with_capacity(cutoff + 1);
    for n in 0..=cutoff {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let mag = (0.5 * ln_poisson(mean, n, ln_fact)).exp();
        amps.push(C64::from_polar(mag, n as f64 * phase));
    }

    let mut deficit = 0.0;
    let mut n = cutoff;
    loop {
        n += 1;
        ln_fact += (n as f64).ln();
        let p = ln_poisson(mean, n, ln_fact).exp();
        deficit += p;
        if n as f64 > mean && p <= deficit * 1e-17 {
            break;
        }
    }
    if deficit > tail_bound {
        return Err(GateError::CutoffTooSmall {
            cutoff,
            deficit,
            bound: tail_bound,
        });
    }
    Ok(FockVector { amps, deficit })
}

/// Two-mode amplitudes over `|n₁, n₂⟩`, `n₁ ≤ c₁`, `n₂ ≤ c₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFock {
    c1: usize,
    c2: usize,
    amps: Vec<C64>,
    deficit: f64,
}

impl TwoModeFock {
    pub fn zeros(c1: usize, c2: usize) -> Self {
        TwoModeFock {
            c1,
            c2,
            amps: vec![C64::new(0.0, 0.0); (c1 + 1) * (c2 + 1)],
            deficit: 0.0,
        }
    }

    pub fn product(a: &FockVector, b: &FockVector) -> Self {
        let mut out = Self::zeros(a.cutoff(), b.cutoff());
        for (i, x) in a.amps.iter().enumerate() {
            for (j, y) in b.amps.iter().enumerate() {
                out.set(i, j, x * y);
            }
        }
        // 1 − (1 − d₁)(1 − d₂)
        out.deficit = a.deficit + b.deficit - a.deficit * b.deficit;
        out
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.c1, self.c2)
    }

    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn get(&self, n1: usize, n2: usize) -> C64 {
        self.amps[n1 * (self.c2 + 1) + n2]
    }

    pub fn set(&mut self, n1: usize, n2: usize, v: C64) {
        self.amps[n1 * (self.c2 + 1) + n2] = v;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Nonzero entries as `(n₁, n₂, amplitude)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..=self.c1)
            .flat_map(move |i| (0..=self.c2).map(move |j| (i, j, self.get(i, j))))
            .filter(|e| e.2 != C64::new(0.0, 0.0))
    }

    /// Largest `|a − b|` over the union of both supports.
    pub fn max_abs_diff(&self, other: &TwoModeFock) -> f64 {
        self.max_abs_diff_within(other, usize::MAX)
    }

    /// [`Self::max_abs_diff`] restricted to `n₁ + n₂ ≤ max_total`.
    pub fn max_abs_diff_within(&self, other: &TwoModeFock, max_total: usize) -> f64 {
        let c1 = self.c1.max(other.c1);
        let c2 = self.c2.max(other.c2);
        let at = |s: &TwoModeFock, i: usize, j: usize| {
            if i <= s.c1 && j <= s.c2 {
                s.get(i, j)
            } else {
                C64::new(0.0, 0.0)
            }
        };
        let mut worst = 0.0f64;
        for i in 0..=c1.min(max_total) {
            for j in 0..=c2.min(max_total - i) {
                worst = worst.max((at(self, i, j) - at(other, i, j)).norm());
            }
        }
        worst
    }
}

/// Output of `|n₁, n₂⟩` under the transform: the block of total photon
/// number `n₁ + n₂`, indexed by photons in output mode 1.
fn transform_basis_state(m: &Mat2, n1: usize, n2: usize) -> Vec<C64> {
    let mut v = vec![C64::new(1.0, 0.0)];
    for (col, count) in [(0, n1), (1, n2)] {
        let (a, b) = (m[0][col], m[1][col]);
        for step in 1..=count {
            let total = v.len() - 1;
            let mut next = vec![C64::new(0.0, 0.0); v.len() + 1];
            for (k, x) in v.iter().enumerate() {
                // a†₁ |k, t−k⟩ = √(k+1) |k+1, t−k⟩, a†₂ |k, t−k⟩ = √(t−k+1) |k, t−k+1⟩
                next[k + 1] += a * x * ((k + 1) as f64).sqrt();
                next[k] += b * x * ((total - k + 1) as f64).sqrt();
            }
            let scale = 1.0 / (step as f64).sqrt();
            v = next.into_iter().map(|x| x * scale).collect();
        }
    }
    v
}

/// Passive two-mode transform on Fock amplitudes: input creation operator `j`
/// becomes `Σ_k M[k][j] b†_k`. The output is sized so nothing is truncated.
pub fn apply_two_mode_transform(input: &TwoModeFock, m: &Mat2) -> Result<TwoModeFock> {
    let residual = unitarity_residual(m);
    if !(residual <= UNITARITY_TOLERANCE) {
        return Err(GateError::Contract(format!(
            "two-mode transform is not unitary (residual {residual:e})"
        )));
    }
    let dim = input.c1 + input.c2;
    let mut out = TwoModeFock::zeros(dim, dim);
    out.deficit = input.deficit;
    for (n1, n2, amp) in input.entries() {
        let total = n1 + n2;
        for (k, w) in transform_basis_state(m, n1, n2).into_iter().enumerate() {
            let cur = out.get(k, total - k);
            out.set(k, total - k, cur + amp * w);
        }
    }
    Ok(out)
}

/// Joint distribution of detected counts on `(o₁, o₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    d1: usize,
    d2: usize,
    p: Vec<f64>,
}

impl JointDistribution {
    pub fn get(&self, k1: usize, k2: usize) -> f64 {
        if k1 <= self.d1 && k2 <= self.d2 {
            self.p[k1 * (self.d2 + 1) + k2]
        } else {
            0.0
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn marginal_o1(&self) -> Vec<f64> {
        (0..=self.d1).map(|i| (0..=self.d2).map(|j| self.get(i, j)).sum()).collect()
    }

    pub fn marginal_o2(&self) -> Vec<f64> {
        (0..=self.d2).map(|j| (0..=self.d1).map(|i| self.get(i, j)).sum()).collect()
    }

    /// `P(n_o1 = 0)`.
    pub fn zero_class_o1(&self) -> f64 {
        self.marginal_o1()[0]
    }

    pub fn total_variation(&self, other: &JointDistribution) -> f64 {
        let d1 = self.d1.max(other.d1);
        let d2 = self.d2.max(other.d2);
        let mut acc = 0.0;
        for i in 0..=d1 {
            for j in 0..=d2 {
                acc += (self.get(i, j) - other.get(i, j)).abs();
            }
        }
        0.5 * acc
    }

    /// Product of Poissons with means `eta·mean`, the thinned coherent-state
    /// statistics.
    pub fn poisson_product(mean1: f64, mean2: f64, d1: usize, d2: usize) -> Self {
        let lf = ln_factorials(d1.max(d2));
        let pmf = |mean: f64, d: usize| (0..=d).map(|n| ln_poisson(mean, n, lf[n]).exp()).collect::<Vec<_>>();
        let (a, b) = (pmf(mean1, d1), pmf(mean2, d2));
        let mut p = Vec::with_capacity((d1 + 1) * (d2 + 1));
        for x in &a {
            for y in &b {
                p.push(x * y);
            }
        }
        JointDistribution { d1, d2, p }
    }
}

/// `T[k][n] = C(n, k) ηᵏ (1 − η)ⁿ⁻ᵏ`.
fn thinning_matrix(eta: f64, d: usize, lf: &[f64]) -> Vec<Vec<f64>> {
    (0..=d)
        .map(|k| {
            (0..=d)
                .map(|n| {
                    if k > n {
                        0.0
                    } else if eta >= 1.0 {
                        (k == n) as u8 as f64
                    } else if eta <= 0.0 {
                        (k == 0) as u8 as f64
                    } else {
                        let ln_binom = lf[n] - lf[k] - lf[n - k];
                        (ln_binom + k as f64 * eta.ln() + (n - k) as f64 * (1.0 - eta).ln()).exp()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn detection_distribution(state: &TwoModeFock, eta1: f64, eta2: f64) -> Result<JointDistribution> {
    for eta in [eta1, eta2] {
        if !(0.0..=1.0).contains(&eta) {
            return Err(GateError::InvalidParams(format!("detector efficiency must lie in [0, 1], got {eta}")));
        }
    }
    let (d1, d2) = state.cutoffs();
    let lf = ln_factorials(d1.max(d2));
    let t1 = thinning_matrix(eta1, d1, &lf);
    let t2 = thinning_matrix(eta2, d2, &lf);
    let raw: Vec<Vec<f64>> = (0..=d1).map(|i| (0..=d2).map(|j| state.get(i, j).norm_sqr()).collect()).collect();

    // thin mode 2 first: half[n1][k2] = Σ_{n2} raw[n1][n2] T2[k2][n2]
    let half: Vec<Vec<f64>> = raw
        .iter()
        .map(|row| (0..=d2).map(|k2| (k2..=d2).map(|n2| row[n2] * t2[k2][n2]).sum()).collect())
        .collect();
    let mut p = Vec::with_capacity((d1 + 1) * (d2 + 1));
    for k1 in 0..=d1 {
        for k2 in 0..=d2 {
            p.push((k1..=d1).map(|n1| t1[k1][n1] * half[n1][k2]).sum());
        }
    }
    Ok(JointDistribution { d1, d2, p })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchReport {
    pub component: Component,
    pub signal_photons: u32,
    pub weight: f64,
    /// Largest amplitude difference between brute-force and analytic output.
    pub state_deviation: f64,
    /// Total variation between detection distributions.
    pub detection_tv: f64,
    pub zero_class_oracle: f64,
    pub zero_class_analytic: f64,
}

impl BranchReport {
    pub fn deviation(&self) -> f64 {
        self.state_deviation.max(self.detection_tv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub cutoff: usize,
    pub tail_deficit: f64,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub worst_branch: Option<Component>,
    pub branches: Vec<BranchReport>,
    /// Probability that an odd component is read as even.
    pub p_misclassify_oracle: f64,
    pub p_misclassify_analytic: f64,
    pub passed: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the brute-force evolution for every branch of `psi` and compares it
/// with the coherent-state branches of [`evolve_lossless`]. The report is
/// returned whether or not the comparison passes.
pub fn oracle_report(params: &CavityParams, psi: &PolarizationState, cutoff: usize) -> Result<ValidationReport> {
    if !params.is_lossless() {
        return Err(GateError::Contract("the Fock oracle covers the lossless cavity only".into()));
    }
    let hybrid = evolve_lossless(psi, params)?;
    let bus = coherent_fock(params.alpha(), cutoff)?;
    let input = TwoModeFock::product(&bus, &coherent_fock(C64::new(0.0, 0.0), cutoff)?);

    let mut branches = Vec::new();
    for b in &hybrid.branches {
        let n = b.component.signal_photons();
        let out = apply_two_mode_transform(&input, &mode_unitary(params, n))?;
        let (d1, d2) = out.cutoffs();
        let analytic = TwoModeFock::product(
            &coherent_fock_with_bound(b.o1, d1, 1.0)?,
            &coherent_fock_with_bound(b.o2, d2, 1.0)?,
        );
        let oracle_counts = detection_distribution(&out, params.eta1(), params.eta2())?;
        let analytic_counts = JointDistribution::poisson_product(
            params.eta1() * b.o1.norm_sqr(),
            params.eta2() * b.o2.norm_sqr(),
            d1,
            d2,
        );
        branches.push(BranchReport {
            component: b.component,
            signal_photons: n,
            weight: b.weight.norm_sqr(),
            // the transform conserves total photon number and the input holds
            // every total up to `cutoff`, so beyond that only the tail remains
            state_deviation: out.max_abs_diff_within(&analytic, cutoff),
            detection_tv: oracle_counts.total_variation(&analytic_counts),
            zero_class_oracle: oracle_counts.zero_class_o1(),
            zero_class_analytic: analytic_counts.zero_class_o1(),
        });
    }

    let odd_sum = |f: fn(&BranchReport) -> f64| {
        branches
            .iter()
            .filter(|b| parity_of(b.component) == Parity::Odd)
            .map(|b| b.weight * f(b))
            .sum::<f64>()
    };
    let worst = branches
        .iter()
        .max_by(|a, b| a.deviation().total_cmp(&b.deviation()));
    let max_deviation = worst.map_or(0.0, |b| b.deviation());
    Ok(ValidationReport {
        cutoff,
        tail_deficit: bus.deficit(),
        tolerance: VALIDATION_TOLERANCE,
        max_deviation,
        worst_branch: worst.map(|b| b.component),
        p_misclassify_oracle: odd_sum(|b| b.zero_class_oracle),
        p_misclassify_analytic: odd_sum(|b| b.zero_class_analytic),
        passed: max_deviation < VALIDATION_TOLERANCE,
        branches,
    })
}

/// [`oracle_report`] that fails when any branch deviates by more than
/// [`VALIDATION_TOLERANCE`].
pub fn validate_protocol(params: &CavityParams, psi: &PolarizationState, cutoff: usize) -> Result<ValidationReport> {
    let report = oracle_report(params, psi, cutoff)?;
    if !report.passed {
        return Err(GateError::Validation {
            branch: report.worst_branch.map_or_else(|| "?".into(), |c| c.to_string()),
            deviation: report.max_deviation,
            tolerance: VALIDATION_TOLERANCE,
        });
    }
    Ok(report)
}
