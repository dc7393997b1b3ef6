//! Seeded Monte Carlo runs of the lossless protocol.
//!
//! Shots are grouped into fixed-size batches; batch `b` draws from a ChaCha8
//! generator seeded with the run seed on stream `b`. Batches run in parallel
//! and are merged in index order, so output does not depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{measure_pnr_with, DetectorModel, GateOutcome};
use crate::states::{HybridState, Parity};

pub const BATCH_SHOTS: u64 = 1 << 14;

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Single seeded shot; identical to shot 0 of [`run_shots`] with the same seed.
pub fn measure_pnr(state: &HybridState<f64>, d1: &DetectorModel, d2: &DetectorModel, rng_seed: u64) -> GateOutcome {
    measure_pnr_with(state, d1, d2, &mut batch_rng(rng_seed, 0))
}

/// Per-shot CSV record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    pub seed: u64,
    pub shot: u64,
    pub n_o1: u64,
    pub n_o2: u64,
    pub classified_parity: Parity,
    pub true_parity: Parity,
    pub misclassified: bool,
}

impl ShotRecord {
    pub const CSV_HEADER: &'static str = "seed,shot,n_o1,n_o2,classified_parity,true_parity,misclassified";

    pub fn new(seed: u64, shot: u64, o: &GateOutcome) -> Self {
        ShotRecord {
            seed,
            shot,
            n_o1: o.n_o1,
            n_o2: o.n_o2,
            classified_parity: o.classified_parity,
            true_parity: o.true_parity,
            misclassified: o.misclassified,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seed, self.shot, self.n_o1, self.n_o2, self.classified_parity, self.true_parity, self.misclassified
        )
    }
}

/// Aggregate counts over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub shots: u64,
    pub classified_even: u64,
    pub classified_odd: u64,
    pub true_even: u64,
    pub true_odd: u64,
    pub misclassified: u64,
    /// Odd outcomes whose feedforward used wrong photon counts.
    pub phase_errors: u64,
}

impl Tally {
    fn add(&mut self, o: &GateOutcome) {
        self.shots += 1;
        match o.classified_parity {
            Parity::Even => self.classified_even += 1,
            Parity::Odd => self.classified_odd += 1,
        }
        match o.true_parity {
            Parity::Even => self.true_even += 1,
            Parity::Odd => self.true_odd += 1,
        }
        self.misclassified += o.misclassified as u64;
        self.phase_errors += o.phase_error() as u64;
    }

    fn merge(mut self, other: &Tally) -> Tally {
        self.shots += other.shots;
        self.classified_even += other.classified_even;
        self.classified_odd += other.classified_odd;
        self.true_even += other.true_even;
        self.true_odd += other.true_odd;
        self.misclassified += other.misclassified;
        self.phase_errors += other.phase_errors;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotRun {
    pub seed: u64,
    pub tally: Tally,
    /// Empty unless records were requested.
    pub records: Vec<ShotRecord>,
}

pub fn run_shots(
    state: &HybridState<f64>,
    d1: &DetectorModel,
    d2: &DetectorModel,
    seed: u64,
    shots: u64,
    keep_records: bool,
) -> ShotRun {
    let batches = shots.div_ceil(BATCH_SHOTS);
    let parts: Vec<(Tally, Vec<ShotRecord>)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let start = b * BATCH_SHOTS;
            let end = (start + BATCH_SHOTS).min(shots);
            let mut tally = Tally::default();
            let mut records = Vec::new();
            for shot in start..end {
                let o = measure_pnr_with(state, d1, d2, &mut rng);
                tally.add(&o);
                if keep_records {
                    records.push(ShotRecord::new(seed, shot, &o));
                }
            }
            (tally, records)
        })
        .collect();

    let mut tally = Tally::default();
    let mut records = Vec::new();
    for (t, r) in parts {
        tally = tally.merge(&t);
        records.extend(r);
    }
    ShotRun { seed, tally, records }
}
