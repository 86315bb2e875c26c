//! Concave separable sparsity penalties and their reweighting weights.
//!
//! Each family defines a scalar penalty `phi` on `[0, inf)` with `phi(0) = 0`,
//! a nonincreasing nonnegative weight function `t -> phi'_+(t)` (the
//! right-hand derivative), a finite weight at zero, and a Lipschitz modulus
//! for the weight function. At nondifferentiable points of the piecewise
//! families the weight is the right-hand derivative.

use crate::error::{Error, Result};

/// A concave separable penalty. Immutable after construction; all
/// evaluations are pure and allocation-free per scalar call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// `phi(t) = lambda * (ln(t + eps) - ln(eps))`.
    Log { lambda: f64, eps: f64 },
    /// Smoothly clipped absolute deviation with knots at `lambda` and
    /// `a * lambda`, constant beyond the second knot.
    Scad { lambda: f64, a: f64 },
    /// Minimax concave penalty, constant beyond `b * lambda`.
    Mcp { lambda: f64, b: f64 },
    /// Plain weighted l1: `phi(t) = lambda * t`.
    L1 { lambda: f64 },
}

impl Penalty {
    pub fn log(lambda: f64, eps: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("log penalty needs lambda > 0, got {lambda}")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("log penalty needs eps > 0, got {eps}")));
        }
        Ok(Penalty::Log { lambda, eps })
    }

    pub fn scad(lambda: f64, a: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("scad needs lambda > 0, got {lambda}")));
        }
        if !(a > 2.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("scad needs a > 2, got {a}")));
        }
        Ok(Penalty::Scad { lambda, a })
    }

    pub fn mcp(lambda: f64, b: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("mcp needs lambda > 0, got {lambda}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("mcp needs b > 0, got {b}")));
        }
        Ok(Penalty::Mcp { lambda, b })
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("l1 needs lambda > 0, got {lambda}")));
        }
        Ok(Penalty::L1 { lambda })
    }

    /// Regularization strength shared by every family.
    pub fn lambda(&self) -> f64 {
        match *self {
            Penalty::Log { lambda, .. }
            | Penalty::Scad { lambda, .. }
            | Penalty::Mcp { lambda, .. }
            | Penalty::L1 { lambda } => lambda,
        }
    }

    /// `(lambda, eps)` when this is the log penalty.
    pub fn log_params(&self) -> Option<(f64, f64)> {
        match *self {
            Penalty::Log { lambda, eps } => Some((lambda, eps)),
            _ => None,
        }
    }

    /// Scalar penalty value `phi(t)` for `t >= 0`; `phi(0) = 0` exactly.
    pub fn phi_value(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("phi_value needs t >= 0, got {t}")));
        }
        Ok(match *self {
            Penalty::Log { lambda, eps } => {
                if t == 0.0 {
                    0.0
                } else {
                    lambda * ((t + eps).ln() - eps.ln())
                }
            }
            Penalty::Scad { lambda, a } => {
                if t <= lambda {
                    lambda * t
                } else if t <= a * lambda {
                    (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
                } else {
                    lambda * lambda * (a + 1.0) / 2.0
                }
            }
            Penalty::Mcp { lambda, b } => {
                if t <= b * lambda {
                    lambda * t - t * t / (2.0 * b)
                } else {
                    b * lambda * lambda / 2.0
                }
            }
            Penalty::L1 { lambda } => lambda * t,
        })
    }

    /// Right-hand derivative `phi'_+(t)` for `t >= 0`; finite at zero.
    pub fn phi_weight(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("phi_weight needs t >= 0, got {t}")));
        }
        Ok(match *self {
            Penalty::Log { lambda, eps } => lambda / (t + eps),
            Penalty::Scad { lambda, a } => {
                if t <= lambda {
                    lambda
                } else if t < a * lambda {
                    (a * lambda - t) / (a - 1.0)
                } else {
                    0.0
                }
            }
            Penalty::Mcp { lambda, b } => {
                if t < b * lambda {
                    lambda - t / b
                } else {
                    0.0
                }
            }
            Penalty::L1 { lambda } => lambda,
        })
    }

    /// Weight at zero, the finite limit of `phi'` as `t` decreases to zero.
    pub fn weight_at_zero(&self) -> f64 {
        match *self {
            Penalty::Log { lambda, eps } => lambda / eps,
            Penalty::Scad { lambda, .. } | Penalty::Mcp { lambda, .. } | Penalty::L1 { lambda } => lambda,
        }
    }

    /// Lipschitz modulus of the weight function on `[0, inf)`. This is the
    /// factor that multiplies step norms in every termination rule.
    pub fn weight_lipschitz(&self) -> f64 {
        match *self {
            Penalty::Log { lambda, eps } => lambda / (eps * eps),
            Penalty::Scad { a, .. } => 1.0 / (a - 1.0),
            Penalty::Mcp { b, .. } => 1.0 / b,
            Penalty::L1 { .. } => 0.0,
        }
    }

    /// Componentwise weights `phi'_+(|x_i|)`, the reweighting vector of every
    /// iteratively reweighted l1 subproblem.
    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        self.weights_into(x, &mut out);
        out
    }

    /// As [`Self::weights`], reusing the output buffer.
    pub fn weights_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(x.iter().map(|&v| {
            self.phi_weight(v.abs()).expect("weights require finite input")
        }));
    }

    /// `sum_i phi(|x_i|)`.
    pub fn big_phi(&self, x: &[f64]) -> f64 {
        x.iter()
            .map(|&v| self.phi_value(v.abs()).expect("penalty sum requires finite input"))
            .sum()
    }
}
