//! Simulated N-party runtime with exact communication accounting.
//!
//! The simulator holds a global view: a share stores every party's point, and
//! communicating operations perform the real per-party protocol arithmetic
//! while charging the ledger. One round is one synchronized exchange barrier,
//! however many messages travel through it, so protocols must batch. All
//! randomness (protocol randomness and dealer-style preprocessing) flows from
//! a single seeded ChaCha stream, which makes whole executions reproducible
//! from the 64-bit seed.

use crate::field::Field;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;

pub type PartyId = usize;

/// Static parameters of a simulated protocol run.
#[derive(Debug, Clone, Copy)]
pub struct RuntimeConfig {
    /// Number of computation parties (N >= 3).
    pub parties: usize,
    /// Corruption threshold t with 2t < N; shares are degree-t polynomials.
    pub threshold: usize,
    /// Seed for every random choice in the run.
    pub seed: u64,
}

impl RuntimeConfig {
    pub fn new(parties: usize, threshold: usize, seed: u64) -> Self {
        assert!(parties >= 3, "honest-majority protocols need at least 3 parties");
        assert!(2 * threshold < parties, "threshold must satisfy 2t < N");
        assert!(threshold >= 1, "threshold must be at least 1");
        RuntimeConfig { parties, threshold, seed }
    }
}

/// Accumulated cost of a run.
///
/// `bytes_sent` is always `elements_sent` times the field's wire size;
/// `opened_values` counts logical reveals of content-derived values (a
/// bit-decomposed integer opened in one barrier counts once). Openings of
/// freshly masked values, as in truncation, pay wire cost but reveal
/// nothing, so they do not count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CostLedger {
    pub rounds: u64,
    pub elements_sent: u64,
    pub bytes_sent: u64,
    pub opened_values: u64,
    pub peak_stored_elements: u64,
}

impl CostLedger {
    /// Difference of two snapshots (self taken after `earlier`).
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        CostLedger {
            rounds: self.rounds - earlier.rounds,
            elements_sent: self.elements_sent - earlier.elements_sent,
            bytes_sent: self.bytes_sent - earlier.bytes_sent,
            opened_values: self.opened_values - earlier.opened_values,
            peak_stored_elements: self.peak_stored_elements,
        }
    }
}

/// One point-to-point message of field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message<F: Field> {
    pub from: PartyId,
    pub to: PartyId,
    pub payload: Vec<F>,
}

/// Simulation context shared by every protocol invocation.
pub struct Ctx<F: Field> {
    cfg: RuntimeConfig,
    rng: ChaCha12Rng,
    rounds: u64,
    elements_sent: u64,
    opened_values: u64,
    stored_current: u64,
    stored_peak: u64,
    eval_points: Vec<F>,
    lagrange_cache: HashMap<usize, Vec<F>>,
}

impl<F: Field> Ctx<F> {
    pub fn new(cfg: RuntimeConfig) -> Self {
        let eval_points = (0..cfg.parties).map(|i| F::from_u64(i as u64 + 1)).collect();
        Ctx {
            cfg,
            rng: ChaCha12Rng::seed_from_u64(cfg.seed),
            rounds: 0,
            elements_sent: 0,
            opened_values: 0,
            stored_current: 0,
            stored_peak: 0,
            eval_points,
            lagrange_cache: HashMap::new(),
        }
    }

    pub fn parties(&self) -> usize {
        self.cfg.parties
    }

    pub fn threshold(&self) -> usize {
        self.cfg.threshold
    }

    pub fn config(&self) -> RuntimeConfig {
        self.cfg
    }

    /// Party i evaluates sharing polynomials at this point (i + 1; zero is
    /// reserved for the secret).
    pub fn eval_point(&self, party: PartyId) -> F {
        self.eval_points[party]
    }

    /// RNG for protocol randomness and dealer-style preprocessing. Draws are
    /// not ledger-charged: shared-randomness setup counts as free
    /// preprocessing established before the protocol starts.
    pub fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }

    /// Charge one synchronized exchange barrier carrying `elements` field
    /// elements in total (all senders combined).
    pub fn barrier(&mut self, elements: u64) {
        assert!(elements > 0, "a barrier must carry at least one element");
        debug_assert!(
            self.stored_peak >= self.stored_current,
            "storage peak must dominate live storage at every barrier"
        );
        self.rounds += 1;
        self.elements_sent += elements;
    }

    /// Charge a barrier that opens `logical_values` secrets to all parties.
    pub fn open_barrier(&mut self, logical_values: u64, elements: u64) {
        self.barrier(elements);
        self.opened_values += logical_values;
    }

    /// Faithful message-level exchange: charges one barrier for the whole
    /// batch and delivers the messages ordered by recipient. The share-level
    /// protocols use the aggregate [`Ctx::barrier`] fast path with identical
    /// accounting.
    pub fn exchange(&mut self, mut batch: Vec<Message<F>>) -> Vec<Message<F>> {
        let elements: u64 = batch.iter().map(|m| m.payload.len() as u64).sum();
        for m in &batch {
            assert!(m.from < self.cfg.parties && m.to < self.cfg.parties, "bad party id");
        }
        self.barrier(elements);
        batch.sort_by_key(|m| (m.to, m.from));
        batch
    }

    /// Record that `elements` live share elements were materialized.
    pub fn storage_acquire(&mut self, elements: u64) {
        self.stored_current += elements;
        self.stored_peak = self.stored_peak.max(self.stored_current);
    }

    /// Release previously acquired storage.
    pub fn storage_release(&mut self, elements: u64) {
        debug_assert!(self.stored_current >= elements, "storage release underflow");
        self.stored_current = self.stored_current.saturating_sub(elements);
    }

    pub fn ledger(&self) -> CostLedger {
        CostLedger {
            rounds: self.rounds,
            elements_sent: self.elements_sent,
            bytes_sent: self.elements_sent * F::wire_bytes(),
            opened_values: self.opened_values,
            peak_stored_elements: self.stored_peak,
        }
    }

    /// Lagrange coefficients reconstructing f(0) from evaluations at points
    /// 1..=degree+1 (the canonical first degree+1 parties). Cached per degree.
    pub fn lagrange_at_zero(&mut self, degree: usize) -> Vec<F> {
        assert!(degree + 1 <= self.cfg.parties, "not enough parties to reconstruct");
        if let Some(c) = self.lagrange_cache.get(&degree) {
            return c.clone();
        }
        let pts: Vec<F> = self.eval_points[..=degree].to_vec();
        let mut coeffs = Vec::with_capacity(degree + 1);
        for i in 0..=degree {
            let mut num = F::ONE;
            let mut den = F::ONE;
            for j in 0..=degree {
                if i != j {
                    num *= pts[j];
                    den *= pts[j] - pts[i];
                }
            }
            coeffs.push(num * den.inv());
        }
        self.lagrange_cache.insert(degree, coeffs.clone());
        coeffs
    }
}
