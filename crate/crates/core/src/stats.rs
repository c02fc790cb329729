//! Hypergeometric upper-tail probabilities in log space.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("inconsistent enrichment counts: {0:?}")]
    InvariantViolation(EnrichmentInput),
    #[error("population {total} exceeds the ln-factorial table size {capacity}")]
    TableTooSmall { total: u64, capacity: u64 },
}

/// Sequence counts for one candidate pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnrichmentInput {
    /// All sequences, target plus background.
    pub total: u64,
    pub target_total: u64,
    /// Sequences (target or background) containing the pattern.
    pub containing: u64,
    pub target_containing: u64,
}

impl EnrichmentInput {
    pub fn validate(&self) -> Result<(), StatsError> {
        let ok = self.target_total <= self.total
            && self.containing <= self.total
            && self.target_containing <= self.target_total.min(self.containing);
        if ok {
            Ok(())
        } else {
            Err(StatsError::InvariantViolation(*self))
        }
    }
}

/// `ln(n!)` for `n` up to a fixed bound, by cumulative summation of `ln(i)`.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max_n: u64) -> Self {
        let mut table = Vec::with_capacity(max_n as usize + 1);
        table.push(0.0);
        let mut acc = 0.0f64;
        for i in 1..=max_n {
            acc += (i as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    pub fn max_n(&self) -> u64 {
        self.table.len() as u64 - 1
    }

    #[inline]
    pub fn ln_factorial(&self, n: u64) -> f64 {
        self.table[n as usize]
    }

    #[inline]
    pub fn ln_choose(&self, n: u64, k: u64) -> f64 {
        debug_assert!(k <= n);
        self.table[n as usize] - self.table[k as usize] - self.table[(n - k) as usize]
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Scores enrichment inputs against a shared ln-factorial table.
#[derive(Debug, Clone)]
pub struct HypergeomTail {
    lnfact: LnFactorial,
}

impl HypergeomTail {
    pub fn new(max_total: u64) -> Self {
        Self {
            lnfact: LnFactorial::new(max_total),
        }
    }

    /// `ln P(X >= target_containing)` with X hypergeometric over `total`
    /// items, `target_total` successes, `containing` draws.
    pub fn log_tail(&self, e: &EnrichmentInput) -> Result<f64, StatsError> {
        e.validate()?;
        if e.total > self.lnfact.max_n() {
            return Err(StatsError::TableTooSmall {
                total: e.total,
                capacity: self.lnfact.max_n(),
            });
        }
        let (n_pop, succ, draws, k) = (e.total, e.target_total, e.containing, e.target_containing);
        let lo = (draws + succ).saturating_sub(n_pop);
        let hi = succ.min(draws);
        if k <= lo {
            return Ok(0.0);
        }
        let f = &self.lnfact;
        let denom = f.ln_choose(n_pop, draws);
        let term = move |i: u64| f.ln_choose(succ, i) + f.ln_choose(n_pop - succ, draws - i) - denom;

        let upper = log_sum_exp((k..=hi).map(term));
        if upper < -std::f64::consts::LN_2 {
            return Ok(upper.min(0.0));
        }
        // Upper tail is above one half: go through the complement so values
        // close to zero keep their relative precision.
        let lower = log_sum_exp((lo..k).map(term));
        Ok((-lower.exp()).ln_1p().min(0.0))
    }
}

/// One-shot convenience; builds a table sized for `e.total`.
pub fn log_hypergeom_tail(e: &EnrichmentInput) -> Result<f64, StatsError> {
    HypergeomTail::new(e.total).log_tail(e)
}
