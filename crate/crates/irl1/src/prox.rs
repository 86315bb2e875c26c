//! Closed-form proximal kernels.
//!
//! Every subproblem of the reweighted l1 solvers is a separable quadratic
//! plus weighted l1 over a box, solved exactly by soft-thresholding followed
//! by a clamp: each scalar objective is convex, so the box minimizer is the
//! clamp of the unconstrained minimizer. The line-search baseline on the log
//! penalty needs the scalar log prox, solved by candidate enumeration.

use crate::error::{Error, Result};

/// Componentwise box `[lower_i, upper_i]`, with infinite entries allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxConstraint {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxConstraint {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "box bound {i} invalid: [{lo}, {hi}]"
                )));
            }
        }
        Ok(BoxConstraint { lower, upper })
    }

    /// The all-infinite box, i.e. no constraint.
    pub fn unbounded(n: usize) -> Self {
        BoxConstraint {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// `[lo, hi]^n`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower.iter().all(|&v| v == f64::NEG_INFINITY)
            && self.upper.iter().all(|&v| v == f64::INFINITY)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }
}

#[inline]
fn soft_threshold(t: f64, thr: f64) -> f64 {
    if t > thr {
        t - thr
    } else if t < -thr {
        t + thr
    } else {
        0.0
    }
}

/// Minimizer over the box of `(step/2) * ||y - t||^2 + sum_i s_i |y_i|`,
/// computed componentwise as a clamped soft-threshold.
pub fn prox_weighted_l1_box(
    t: &[f64],
    s: &[f64],
    step: f64,
    bounds: &BoxConstraint,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; t.len()];
    prox_weighted_l1_box_into(t, s, step, bounds, &mut out)?;
    Ok(out)
}

/// As [`prox_weighted_l1_box`], writing into a caller-provided buffer.
pub fn prox_weighted_l1_box_into(
    t: &[f64],
    s: &[f64],
    step: f64,
    bounds: &BoxConstraint,
    out: &mut [f64],
) -> Result<()> {
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), found: s.len() });
    }
    if bounds.dim() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), found: bounds.dim() });
    }
    if out.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), found: out.len() });
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("prox needs step > 0, got {step}")));
    }
    let inv_step = 1.0 / step;
    for i in 0..t.len() {
        if s[i] < 0.0 || s[i].is_nan() {
            return Err(Error::InvalidArgument(format!("negative weight s[{i}] = {}", s[i])));
        }
        if !t[i].is_finite() {
            return Err(Error::Numerical(format!("non-finite prox center t[{i}] = {}", t[i])));
        }
        let u = soft_threshold(t[i], s[i] * inv_step);
        out[i] = u.clamp(bounds.lower[i], bounds.upper[i]);
    }
    Ok(())
}

/// Componentwise clamp onto the box. Idempotent.
pub fn project_box(x: &[f64], bounds: &BoxConstraint) -> Result<Vec<f64>> {
    if bounds.dim() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: bounds.dim() });
    }
    Ok(x.iter()
        .zip(bounds.lower.iter().zip(&bounds.upper))
        .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
        .collect())
}

/// Global minimizer of `g(u) = (step/2)(u - v)^2 + lambda (ln(|u| + eps) - ln eps)`.
///
/// The minimizer lies on the closed half-line with the sign of `v` (the
/// objective only grows when `u` moves to the opposite sign), so it is
/// either `u = 0` or a positive root `w` of the stationarity quadratic on
/// that half-line,
///
/// ```text
/// step * w^2 + step * (eps - |v|) * w + (lambda - step * |v| * eps) = 0,
/// ```
///
/// mapped back as `u = sign(v) * w`. All candidates are enumerated and the
/// one with the smallest objective wins; candidates whose objectives agree
/// within 1e-12 resolve toward the smaller `|u|`.
pub fn prox_scalar_log(v: f64, step: f64, lambda: f64, eps: f64) -> Result<f64> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("prox_scalar_log needs step > 0, got {step}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "prox_scalar_log needs lambda > 0, got {lambda}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("prox_scalar_log needs eps > 0, got {eps}")));
    }
    if !v.is_finite() {
        return Err(Error::Numerical(format!("non-finite prox center {v}")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let a = v.abs();
    let sign = if v > 0.0 { 1.0 } else { -1.0 };

    // g restricted to w = |u| on the sign(v) half-line.
    let g = |w: f64| -> f64 {
        let d = w - a;
        0.5 * step * d * d + lambda * (w / eps).ln_1p()
    };

    // Monic form w^2 + b w + c = 0.
    let b = eps - a;
    let c = lambda / step - a * eps;
    let disc = b * b - 4.0 * c;

    // Candidates in ascending w; start from the kink at zero.
    let mut candidates = [0.0f64; 3];
    let mut count = 1;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Stable quadratic roots; a double root yields one candidate.
        let q = -0.5 * (b + sq.copysign(if b == 0.0 { 1.0 } else { b }));
        let (r1, r2) = if q != 0.0 { (q, c / q) } else { (0.0, 0.0) };
        for r in [r1, r2] {
            if r > 0.0 && r.is_finite() && !candidates[..count].contains(&r) {
                candidates[count] = r;
                count += 1;
            }
        }
        candidates[..count].sort_by(|x, y| x.partial_cmp(y).unwrap());
    }

    let mut best_w = candidates[0];
    let mut best_g = g(candidates[0]);
    for &w in &candidates[1..count] {
        let gw = g(w);
        if gw < best_g - 1e-12 {
            best_g = gw;
            best_w = w;
        }
    }
    Ok(sign * best_w)
}

/// Exact distance from zero to `grad + s * subdiff|u| + N_[lo,hi](u)`, the
/// scalar stationarity residual shared by the prox certificates and the
/// problem-level residual. `grad` is the derivative of the smooth part at
/// `u`; `u` must lie in `[lo, hi]`.
pub fn scalar_subdifferential_distance(grad: f64, s: f64, u: f64, lo: f64, hi: f64) -> f64 {
    // The set grad + s*subdiff|u| is the interval [k_lo, k_hi].
    let (k_lo, k_hi) = if u == 0.0 {
        (grad - s, grad + s)
    } else {
        let k = grad + s * u.signum();
        (k, k)
    };
    let at_lower = u == lo && lo.is_finite();
    let at_upper = u == hi && hi.is_finite();
    if at_lower && at_upper {
        // Pinned component: the normal cone is the whole line.
        0.0
    } else if at_lower {
        // Adding (-inf, 0] extends the interval to the left.
        (-k_hi).max(0.0)
    } else if at_upper {
        k_lo.max(0.0)
    } else if k_lo > 0.0 {
        k_lo
    } else if k_hi < 0.0 {
        -k_hi
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::nrm2_diff;
    use proptest::prelude::*;

    #[test]
    fn zero_weights_unbounded_is_identity() {
        let t = vec![2.0, -0.7, 0.0];
        let out =
            prox_weighted_l1_box(&t, &[0.0; 3], 1.0, &BoxConstraint::unbounded(3)).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn scalar_shrinkage_examples() {
        let b = BoxConstraint::unbounded(1);
        let out = prox_weighted_l1_box(&[2.0], &[0.5], 1.0, &b).unwrap();
        assert_eq!(out, vec![1.5]);
        let out = prox_weighted_l1_box(&[-0.3], &[0.5], 1.0, &b).unwrap();
        assert_eq!(out, vec![0.0]);
    }

    #[test]
    fn zero_input_is_preserved() {
        let b = BoxConstraint::uniform(2, -1.0, 3.0).unwrap();
        let out = prox_weighted_l1_box(&[0.0, 0.0], &[0.3, 0.0], 2.0, &b).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn clamp_applies_after_threshold() {
        let b = BoxConstraint::uniform(2, -1.0, 1.0).unwrap();
        let out = prox_weighted_l1_box(&[5.0, -5.0], &[0.5, 0.5], 1.0, &b).unwrap();
        assert_eq!(out, vec![1.0, -1.0]);
    }

    #[test]
    fn bad_arguments_rejected() {
        let b = BoxConstraint::unbounded(1);
        assert!(prox_weighted_l1_box(&[1.0], &[-0.1], 1.0, &b).is_err());
        assert!(prox_weighted_l1_box(&[1.0], &[0.1], 0.0, &b).is_err());
        assert!(prox_weighted_l1_box(&[1.0, 2.0], &[0.1], 1.0, &b).is_err());
        assert!(BoxConstraint::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn project_box_examples() {
        let unb = BoxConstraint::unbounded(2);
        assert_eq!(project_box(&[3.0, -9.0], &unb).unwrap(), vec![3.0, -9.0]);
        let b = BoxConstraint::uniform(2, -1.0, 1.0).unwrap();
        assert_eq!(project_box(&[2.0, -2.0], &b).unwrap(), vec![1.0, -1.0]);
        let inside = project_box(&[0.5, -0.25], &b).unwrap();
        assert_eq!(inside, vec![0.5, -0.25]);
        assert_eq!(project_box(&inside, &b).unwrap(), inside);
    }

    #[test]
    fn scalar_log_zero_input() {
        assert_eq!(prox_scalar_log(0.0, 1.0, 5e-4, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn scalar_log_interior_root() {
        // Stationary point of u - 2 + lambda/(u + eps) located by bisection.
        let u = prox_scalar_log(2.0, 1.0, 5e-4, 0.5).unwrap();
        assert!((u - 1.9997999839974394).abs() < 1e-12, "u = {u}");
        // Mirror symmetry in the sign of v.
        let um = prox_scalar_log(-2.0, 1.0, 5e-4, 0.5).unwrap();
        assert_eq!(um, -u);
    }

    #[test]
    fn scalar_log_heavy_weight_snaps_to_zero() {
        let u = prox_scalar_log(1e-6, 1.0, 0.5, 0.1).unwrap();
        assert_eq!(u, 0.0);
    }

    #[test]
    fn scalar_log_invalid_parameters() {
        assert!(prox_scalar_log(1.0, 0.0, 0.5, 0.1).is_err());
        assert!(prox_scalar_log(1.0, 1.0, 0.0, 0.1).is_err());
        assert!(prox_scalar_log(1.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn scalar_log_stationarity_certificate() {
        let mut rng = crate::rng::SplitMix64::new(2024);
        for _ in 0..2000 {
            let v = 10.0 * (rng.next_unit() - 0.5);
            let step = 0.1 + 9.9 * rng.next_unit();
            let lambda = 1e-4 + rng.next_unit();
            let eps = 0.05 + rng.next_unit();
            let u = prox_scalar_log(v, step, lambda, eps).unwrap();
            if u != 0.0 {
                let r = step * (u - v) + lambda * u.signum() / (u.abs() + eps);
                assert!(r.abs() <= 1e-9, "residual {r} at v={v} step={step}");
            } else {
                // Zero must at least be one-sided optimal.
                assert!(step * v.abs() <= lambda / eps + 1e-9);
            }
        }
    }

    #[test]
    fn near_tie_resolves_to_zero() {
        // Find v where the interior candidate's objective crosses g(0); at the
        // crossing the tie rule must prefer the sparse answer.
        let (step, lambda, eps) = (1.0, 0.5, 0.1);
        let g = |u: f64, v: f64| 0.5 * step * (u - v) * (u - v) + lambda * (u / eps).ln_1p();
        let interior = |v: f64| -> Option<f64> {
            let b = eps - v;
            let c = lambda / step - v * eps;
            let disc = b * b - 4.0 * c;
            if disc < 0.0 {
                return None;
            }
            let w = 0.5 * (-b + disc.sqrt());
            (w > 0.0).then_some(w)
        };
        let mut lo = 1.0;
        let mut hi = 3.0;
        assert!(g(interior(hi).unwrap(), hi) < g(0.0, hi));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            match interior(mid) {
                Some(w) if g(w, mid) < g(0.0, mid) => hi = mid,
                _ => lo = mid,
            }
        }
        let v = 0.5 * (lo + hi);
        let w = interior(v).unwrap();
        assert!((g(w, v) - g(0.0, v)).abs() < 1e-12);
        assert_eq!(prox_scalar_log(v, step, lambda, eps).unwrap(), 0.0);
    }

    #[test]
    fn weighted_prox_kkt_certificate() {
        let mut rng = crate::rng::SplitMix64::new(7);
        let bounds = BoxConstraint::new(vec![-0.8, f64::NEG_INFINITY], vec![0.8, f64::INFINITY])
            .unwrap();
        for _ in 0..2000 {
            let t = vec![10.0 * (rng.next_unit() - 0.5), 10.0 * (rng.next_unit() - 0.5)];
            let s = vec![2.0 * rng.next_unit(), 2.0 * rng.next_unit()];
            let step = 0.1 + 9.9 * rng.next_unit();
            let u = prox_weighted_l1_box(&t, &s, step, &bounds).unwrap();
            for i in 0..2 {
                let r = scalar_subdifferential_distance(
                    step * (u[i] - t[i]),
                    s[i],
                    u[i],
                    bounds.lower()[i],
                    bounds.upper()[i],
                );
                assert!(r <= 1e-9, "kkt residual {r}");
            }
        }
    }

    proptest! {
        #[test]
        fn weighted_prox_is_nonexpansive(
            t1 in proptest::collection::vec(-5.0f64..5.0, 4),
            t2 in proptest::collection::vec(-5.0f64..5.0, 4),
            s in proptest::collection::vec(0.0f64..2.0, 4),
            step in 0.1f64..10.0,
        ) {
            let b = BoxConstraint::uniform(4, -3.0, 3.0).unwrap();
            let p1 = prox_weighted_l1_box(&t1, &s, step, &b).unwrap();
            let p2 = prox_weighted_l1_box(&t2, &s, step, &b).unwrap();
            prop_assert!(nrm2_diff(&p1, &p2) <= nrm2_diff(&t1, &t2) + 1e-12);
        }
    }
}
