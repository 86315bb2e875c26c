//! Run-time decrease certificates.
//!
//! When monitoring is on, every solver records its potential after each
//! iteration and aborts with a diagnostic if an inequality fails beyond the
//! configured slack. The type-I solver's guaranteed drop constant depends on
//! the largest momentum coefficient of the whole run, so its quadratic-drop
//! check replays the recorded trajectory at the end; the other two know
//! their drop constants up front and check online.

use crate::error::{Error, Result};

/// Monitor for the type-I potential: online nonincrease, post-hoc drop.
pub(crate) struct E1Monitor {
    slack: f64,
    half_l: f64,
    prev: f64,
    max_beta_sq: f64,
    /// `(drop, ||x^k - x^{k-1}||^2)` per iteration.
    records: Vec<(f64, f64)>,
}

impl E1Monitor {
    pub fn new(l: f64, slack: f64, initial_potential: f64) -> Self {
        E1Monitor { slack, half_l: 0.5 * l, prev: initial_potential, max_beta_sq: 0.0, records: Vec::new() }
    }

    pub fn record(&mut self, iteration: usize, potential: f64, prev_step_sq: f64, beta: f64) -> Result<()> {
        if potential > self.prev + self.slack {
            return Err(Error::Numerical(format!(
                "potential increased at iteration {iteration}: {} -> {potential}",
                self.prev
            )));
        }
        self.max_beta_sq = self.max_beta_sq.max(beta * beta);
        self.records.push((self.prev - potential, prev_step_sq));
        self.prev = potential;
        Ok(())
    }

    /// Verifies `drop_k >= (L/2)(1 - sup beta^2) ||x^k - x^{k-1}||^2` with the
    /// supremum taken over the recorded run.
    pub fn finish(&self) -> Result<()> {
        let coefficient = self.half_l * (1.0 - self.max_beta_sq);
        for (k, &(drop, step_sq)) in self.records.iter().enumerate() {
            if drop < coefficient * step_sq - self.slack {
                return Err(Error::Numerical(format!(
                    "insufficient potential drop at iteration {k}: {drop} < {}",
                    coefficient * step_sq
                )));
            }
        }
        Ok(())
    }
}

/// Monitor for potentials with a known per-iteration drop requirement
/// `potential_new <= potential_prev - coefficient * drop_term`.
pub(crate) struct DropMonitor {
    slack: f64,
    coefficient: f64,
    prev: Option<f64>,
}

impl DropMonitor {
    pub fn new(coefficient: f64, slack: f64) -> Self {
        DropMonitor { slack, coefficient, prev: None }
    }

    /// The first record sets the baseline; subsequent records enforce the
    /// drop inequality.
    pub fn record(&mut self, iteration: usize, potential: f64, drop_term: f64) -> Result<()> {
        if let Some(prev) = self.prev {
            let required = prev - self.coefficient * drop_term;
            if potential > required + self.slack {
                return Err(Error::Numerical(format!(
                    "potential decrease certificate failed at iteration {iteration}: \
                     {potential} > {prev} - {} * {drop_term}",
                    self.coefficient
                )));
            }
        }
        self.prev = Some(potential);
        Ok(())
    }
}

/// Monitor for the line-search solvers: the nonmonotone reference value (the
/// running maximum of the objective window) never increases, and every
/// accepted step beats it by the sufficient-decrease margin.
pub(crate) struct EnvelopeMonitor {
    slack: f64,
    prev_reference: Option<f64>,
}

impl EnvelopeMonitor {
    pub fn new(slack: f64) -> Self {
        EnvelopeMonitor { slack, prev_reference: None }
    }

    pub fn record(
        &mut self,
        iteration: usize,
        reference: f64,
        accepted_value: f64,
        margin: f64,
    ) -> Result<()> {
        if accepted_value > reference - margin + self.slack {
            return Err(Error::Numerical(format!(
                "accepted step lost its sufficient decrease at iteration {iteration}: \
                 {accepted_value} > {reference} - {margin}"
            )));
        }
        if let Some(prev) = self.prev_reference {
            if reference > prev + self.slack {
                return Err(Error::Numerical(format!(
                    "nonmonotone reference increased at iteration {iteration}: {prev} -> {reference}"
                )));
            }
        }
        self.prev_reference = Some(reference);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_monitor_accepts_valid_runs_and_flags_increases() {
        let mut m = E1Monitor::new(2.0, 1e-9, 10.0);
        m.record(0, 9.0, 0.0, 0.0).unwrap();
        m.record(1, 8.5, 0.25, 0.5).unwrap();
        m.finish().unwrap();
        assert!(m.record(2, 9.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn e1_monitor_flags_insufficient_drop() {
        let mut m = E1Monitor::new(2.0, 1e-9, 10.0);
        // Drop 0.1 but step^2 1.0 with beta 0 requires a drop of L/2 = 1.
        m.record(0, 9.9, 1.0, 0.0).unwrap();
        assert!(m.finish().is_err());
    }

    #[test]
    fn drop_monitor_baseline_then_enforcement() {
        let mut m = DropMonitor::new(0.5, 1e-9);
        m.record(0, 5.0, 123.0).unwrap(); // baseline, drop term ignored
        m.record(1, 4.0, 1.0).unwrap(); // needs <= 5 - 0.5
        assert!(m.record(2, 3.9, 1.0).is_err()); // needs <= 3.5
    }

    #[test]
    fn envelope_monitor_checks_margin_and_monotone_reference() {
        let mut m = EnvelopeMonitor::new(1e-9);
        m.record(0, 10.0, 9.0, 0.5).unwrap();
        assert!(m.record(1, 11.0, 9.0, 0.5).is_err());
        let mut m = EnvelopeMonitor::new(1e-9);
        assert!(m.record(0, 10.0, 9.9, 0.5).is_err());
    }
}
