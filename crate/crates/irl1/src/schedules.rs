//! Extrapolation parameter schedules and their machine-checkable validity
//! conditions.
//!
//! Three schedules are provided. The momentum coefficients for the type-I
//! solver come from the FISTA recurrence with fixed restart every
//! [`RESTART_PERIOD`] iterations plus adaptive restart. The type-II solver
//! uses a periodic table of length 100 built from a truncated and mirrored
//! FISTA run. The type-III solver uses a shifted FISTA run that saturates at
//! its 57th value.

use crate::error::{Error, Result};
use crate::linalg::dot_diff;

/// Fixed-restart period of the type-I schedule.
pub const RESTART_PERIOD: usize = 200;

/// Default strictness margin that turns `sup < 0` into a finite check.
pub const VALIDATION_DELTA: f64 = 1e-8;

/// One step of the recurrence `theta -> 2 / (1 + sqrt(1 + 4/theta^2))`.
/// Strictly decreasing on `(0, 1]` with values in `(0, 1)`.
pub fn fista_next(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidArgument(format!("fista_next needs theta in (0, 1], got {theta}")));
    }
    Ok(2.0 / (1.0 + (1.0 + 4.0 / (theta * theta)).sqrt()))
}

/// Momentum state for the type-I solver: two consecutive recurrence values
/// and an iteration counter since the last restart. Single-owner mutable
/// state confined to one solver run.
#[derive(Debug, Clone)]
pub struct FistaState {
    theta_prev: f64,
    theta: f64,
    iterations_since_restart: usize,
}

impl Default for FistaState {
    fn default() -> Self {
        Self::new()
    }
}

impl FistaState {
    pub fn new() -> Self {
        FistaState { theta_prev: 1.0, theta: 1.0, iterations_since_restart: 0 }
    }

    /// Emits the next momentum coefficient `beta = theta * (1/theta_prev - 1)`
    /// and advances the recurrence. A reset to `theta_prev = theta = 1`
    /// happens first when the fixed period has elapsed or when the caller
    /// requests it; either way the counter restarts from zero, so adaptive
    /// restarts also push the next fixed restart back.
    pub fn next_beta(&mut self, restart_requested: bool) -> f64 {
        if restart_requested || self.iterations_since_restart == RESTART_PERIOD {
            self.theta_prev = 1.0;
            self.theta = 1.0;
            self.iterations_since_restart = 0;
        }
        let beta = self.theta * (1.0 / self.theta_prev - 1.0);
        self.theta_prev = self.theta;
        self.theta = fista_next(self.theta).expect("recurrence keeps theta in (0, 1]");
        self.iterations_since_restart += 1;
        debug_assert!((0.0..1.0).contains(&beta));
        beta
    }
}

/// Adaptive restart trigger: true when the previous extrapolation direction
/// opposes the latest step, i.e. `<y_prev - x_curr, x_curr - x_prev> > 0`.
pub fn adaptive_restart_test(y_prev: &[f64], x_curr: &[f64], x_prev: &[f64]) -> Result<bool> {
    if y_prev.len() != x_curr.len() {
        return Err(Error::DimensionMismatch { expected: y_prev.len(), found: x_curr.len() });
    }
    if x_prev.len() != x_curr.len() {
        return Err(Error::DimensionMismatch { expected: x_curr.len(), found: x_prev.len() });
    }
    Ok(dot_diff(y_prev, x_curr, x_curr, x_prev) > 0.0)
}

/// Periodic table for the type-II solver: FISTA values for indices 0..=49,
/// a repeated value at 50, the mirror `theta_k = theta_{99-k}` for 51..=99,
/// then periodic extension with period 100.
#[derive(Debug, Clone)]
pub struct ThetaScheduleE2 {
    table: [f64; 100],
}

impl Default for ThetaScheduleE2 {
    fn default() -> Self {
        Self::new()
    }
}

impl ThetaScheduleE2 {
    pub fn new() -> Self {
        let mut table = [0.0; 100];
        table[0] = 1.0;
        for k in 0..=48 {
            table[k + 1] = fista_next(table[k]).expect("theta stays in (0, 1]");
        }
        table[50] = table[49];
        for k in 51..=99 {
            table[k] = table[99 - k];
        }
        ThetaScheduleE2 { table }
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.table[k % 100]
    }

    /// The prefix `theta_0 ..= theta_horizon`.
    pub fn prefix(&self, horizon: usize) -> Vec<f64> {
        (0..=horizon).map(|k| self.theta(k)).collect()
    }

    /// Checks the strict-negativity condition over `k = 1..=horizon`. One
    /// period plus the seam (horizon >= 101) certifies the true supremum.
    pub fn validate(&self, horizon: usize, delta: f64) -> Result<(f64, bool)> {
        validate_condition_e2(&self.prefix(horizon), delta)
    }

    /// `inf_k { theta_{k-1}^2 - theta_k^2 (1 - theta_{k-1})^2 }` over a full
    /// period plus the seam; scaled by `L/2` this is the guaranteed potential
    /// drop coefficient of the type-II solver.
    pub fn min_drop_coefficient(&self) -> f64 {
        (1..=200)
            .map(|k| {
                let tp = self.theta(k - 1);
                let t = self.theta(k);
                tp * tp - t * t * (1.0 - tp) * (1.0 - tp)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Saturating schedule for the type-III solver: a FISTA run `rho_0 ..= rho_56`
/// frozen at its last value, emitted with an offset of six,
/// `theta_k = rho_{min(k + 6, 56)}`.
#[derive(Debug, Clone)]
pub struct ThetaScheduleE3 {
    rho: [f64; 57],
    gamma: f64,
}

impl ThetaScheduleE3 {
    /// `gamma` is the split parameter of the validity condition; 0.95 is the
    /// value certified for this schedule.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        let mut rho = [0.0; 57];
        rho[0] = 1.0;
        for k in 0..=55 {
            rho[k + 1] = fista_next(rho[k]).expect("theta stays in (0, 1]");
        }
        Ok(ThetaScheduleE3 { rho, gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.rho[(k + 6).min(56)]
    }

    pub fn prefix(&self, horizon: usize) -> Vec<f64> {
        (0..=horizon).map(|k| self.theta(k)).collect()
    }

    /// Checks the two-term condition over `k = 1..=horizon`; the tail is
    /// constant, so horizon 60 certifies the true supremum.
    pub fn validate(&self, horizon: usize, delta: f64) -> Result<(f64, bool)> {
        validate_condition_e3(&self.prefix(horizon), self.gamma, delta)
    }

    /// `inf_k min{ theta_{k-1}^2 - theta_k^2 (1-theta_{k-1})^2 / gamma,
    /// 1 - theta_k^2 / (1-gamma) }` over the certifying horizon; scaled by
    /// `L/2` this is the guaranteed potential drop coefficient of the
    /// type-III solver.
    pub fn min_drop_coefficient(&self) -> f64 {
        (1..=60)
            .map(|k| {
                let tp = self.theta(k - 1);
                let t = self.theta(k);
                let first = tp * tp - t * t * (1.0 - tp) * (1.0 - tp) / self.gamma;
                let second = 1.0 - t * t / (1.0 - self.gamma);
                first.min(second)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Supremum over `k = 1..len-1` of `theta_k^2 (1 - theta_{k-1})^2 - theta_{k-1}^2`,
/// and whether it clears the strictness margin `delta`.
pub fn validate_condition_e2(thetas: &[f64], delta: f64) -> Result<(f64, bool)> {
    if thetas.len() < 2 {
        return Err(Error::InvalidArgument(
            "condition check needs at least theta_0 and theta_1".into(),
        ));
    }
    let mut sup = f64::NEG_INFINITY;
    for k in 1..thetas.len() {
        let tp = thetas[k - 1];
        let t = thetas[k];
        sup = sup.max(t * t * (1.0 - tp) * (1.0 - tp) - tp * tp);
    }
    Ok((sup, sup <= -delta))
}

/// Supremum over `k = 1..len-1` of
/// `max{ theta_k^2 (1-theta_{k-1})^2 / gamma - theta_{k-1}^2,
///       theta_k^2 / (1-gamma) - 1 }`, and whether it clears `delta`.
/// The index starts at one: the opening value of a schedule may violate the
/// second term and remain admissible.
pub fn validate_condition_e3(thetas: &[f64], gamma: f64, delta: f64) -> Result<(f64, bool)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if thetas.len() < 2 {
        return Err(Error::InvalidArgument(
            "condition check needs at least theta_0 and theta_1".into(),
        ));
    }
    let mut sup = f64::NEG_INFINITY;
    for k in 1..thetas.len() {
        let tp = thetas[k - 1];
        let t = thetas[k];
        let first = t * t * (1.0 - tp) * (1.0 - tp) / gamma - tp * tp;
        let second = t * t / (1.0 - gamma) - 1.0;
        sup = sup.max(first.max(second));
    }
    Ok((sup, sup <= -delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_values() {
        let t1 = fista_next(1.0).unwrap();
        assert!((t1 - 0.6180339887498948).abs() < 1e-15);
        let t2 = fista_next(t1).unwrap();
        assert!((t2 - 0.4558867801028666).abs() < 1e-15);
        assert!(fista_next(0.0).is_err());
        assert!(fista_next(1.5).is_err());
    }

    #[test]
    fn recurrence_is_strictly_decreasing() {
        let mut t = 1.0;
        for _ in 0..500 {
            let next = fista_next(t).unwrap();
            assert!(next < t && next > 0.0);
            t = next;
        }
    }

    #[test]
    fn beta_sequence_examples() {
        let mut st = FistaState::new();
        assert_eq!(st.next_beta(false), 0.0);
        assert_eq!(st.next_beta(false), 0.0);
        let b2 = st.next_beta(false);
        assert!((b2 - 0.28175352512532087).abs() < 1e-15, "b2 = {b2}");
    }

    #[test]
    fn restart_resets_beta_to_zero() {
        let mut st = FistaState::new();
        for _ in 0..17 {
            st.next_beta(false);
        }
        assert_eq!(st.next_beta(true), 0.0);
    }

    #[test]
    fn fixed_restart_period() {
        let mut st = FistaState::new();
        let betas: Vec<f64> = (0..2 * RESTART_PERIOD).map(|_| st.next_beta(false)).collect();
        // The schedule restarts exactly at the period boundary and repeats.
        assert_eq!(betas[RESTART_PERIOD], 0.0);
        assert_ne!(betas[RESTART_PERIOD - 1], 0.0);
        assert_eq!(&betas[..RESTART_PERIOD], &betas[RESTART_PERIOD..]);
    }

    #[test]
    fn restart_counter_restarts_after_adaptive_reset() {
        let mut a = FistaState::new();
        let mut b = FistaState::new();
        for _ in 0..50 {
            a.next_beta(false);
            b.next_beta(false);
        }
        a.next_beta(true);
        b.next_beta(true);
        // Replay after the adaptive restart stays in lockstep.
        for _ in 0..300 {
            assert_eq!(a.next_beta(false), b.next_beta(false));
        }
    }

    #[test]
    fn beta_trajectory_stays_below_one() {
        let mut st = FistaState::new();
        let mut rng = crate::rng::SplitMix64::new(5);
        let mut sup: f64 = 0.0;
        for _ in 0..100_000 {
            let beta = st.next_beta(rng.next_unit() < 0.01);
            assert!((0.0..1.0).contains(&beta));
            sup = sup.max(beta);
        }
        assert!(sup < 1.0);
    }

    #[test]
    fn adaptive_restart_examples() {
        assert!(!adaptive_restart_test(&[1.0, 2.0], &[1.0, 2.0], &[0.0, 0.0]).unwrap());
        assert!(adaptive_restart_test(&[2.0, 0.0], &[1.0, 0.0], &[0.0, 0.0]).unwrap());
        assert!(!adaptive_restart_test(&[1.0, 1.0], &[0.0, 1.0], &[0.0, 0.0]).unwrap());
        assert!(adaptive_restart_test(&[1.0], &[0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn e2_table_shape() {
        let s = ThetaScheduleE2::new();
        assert_eq!(s.theta(0), 1.0);
        assert_eq!(s.theta(99), 1.0);
        assert_eq!(s.theta(100), 1.0);
        assert_eq!(s.theta(50), s.theta(49));
        for k in 51..=99 {
            assert_eq!(s.theta(k), s.theta(99 - k));
        }
        for k in 0..250 {
            let t = s.theta(k);
            assert!(t > 0.0 && t <= 1.0);
        }
        assert_eq!(s.theta(137), s.theta(37));
    }

    #[test]
    fn e3_schedule_shape() {
        let s = ThetaScheduleE3::new(0.95).unwrap();
        assert!((s.theta(0) - 0.22909094307890215).abs() < 1e-15);
        assert_eq!(s.theta(50), s.theta(1_000_000));
        assert!((s.theta(50) - 0.03350585048343091).abs() < 1e-15);
        assert!(ThetaScheduleE3::new(1.0).is_err());
        assert!(ThetaScheduleE3::new(0.0).is_err());
    }

    #[test]
    fn e2_condition_examples() {
        let (sup, ok) = validate_condition_e2(&[1.0; 10], VALIDATION_DELTA).unwrap();
        assert!((sup + 1.0).abs() < 1e-15 && ok);
        let (sup, ok) = validate_condition_e2(&[0.5; 10], VALIDATION_DELTA).unwrap();
        assert!((sup + 3.0 / 16.0).abs() < 1e-15 && ok);
        let (sup, ok) = ThetaScheduleE2::new().validate(200, VALIDATION_DELTA).unwrap();
        assert!(ok, "sup = {sup}");
        assert!((sup + 5.488287112796991e-5).abs() < 1e-15);
        assert!(validate_condition_e2(&[1.0], VALIDATION_DELTA).is_err());
    }

    #[test]
    fn e3_condition_examples() {
        let (sup, ok) = validate_condition_e3(&[1.0; 5], 0.95, VALIDATION_DELTA).unwrap();
        assert!((sup - 19.0).abs() < 1e-12 && !ok);
        let (sup, ok) = validate_condition_e3(&[0.1; 5], 0.95, VALIDATION_DELTA).unwrap();
        assert!(ok && sup < 0.0);
        let (sup, ok) = ThetaScheduleE3::new(0.95).unwrap().validate(60, VALIDATION_DELTA).unwrap();
        assert!(ok, "sup = {sup}");
        assert!((sup + 1.8776552823225644e-5).abs() < 1e-15);
        assert!(validate_condition_e3(&[1.0, 0.5], 1.2, VALIDATION_DELTA).is_err());
    }

    #[test]
    fn drop_coefficients_are_positive() {
        assert!(ThetaScheduleE2::new().min_drop_coefficient() > 0.0);
        assert!(ThetaScheduleE3::new(0.95).unwrap().min_drop_coefficient() > 0.0);
    }

    #[test]
    fn replaying_restart_log_reproduces_betas() {
        let mut rng = crate::rng::SplitMix64::new(11);
        let events: Vec<bool> = (0..5_000).map(|_| rng.next_unit() < 0.02).collect();
        let run = |events: &[bool]| -> Vec<f64> {
            let mut st = FistaState::new();
            events.iter().map(|&e| st.next_beta(e)).collect()
        };
        assert_eq!(run(&events), run(&events));
    }
}
