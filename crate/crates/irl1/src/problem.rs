//! Least-squares problem instances: the smooth oracle, spectral-norm step
//! constant, random instance synthesis, and the exact stationarity residual.
//!
//! An instance is `F(x) = 0.5 ||Ax - b||^2 + sum_i phi(|x_i|)` over a box.
//! The gradient step constant `L` is an upper bound on the largest eigenvalue
//! of `A^T A`, estimated once at construction and cached.

use std::io::{BufRead, BufReader, Read, Write};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{dot, nrm2, DenseMatrix};
use crate::penalty::Penalty;
use crate::prox::{scalar_subdifferential_distance, BoxConstraint};
use crate::rng::NormalSource;

/// Recipe for a random compressed-sensing style instance: a column-normalized
/// Gaussian design, a planted sparse signal with `sparsity` nonzeros drawn on
/// a uniform support, and Gaussian observation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceRecipe {
    pub m: usize,
    pub n: usize,
    /// Support size of the planted signal; defaults to `floor(m / 9)`.
    pub sparsity: usize,
    /// Noise multiplier on the observations; defaults to 0.01.
    pub noise_scale: f64,
    pub seed: u64,
}

impl InstanceRecipe {
    /// Default sparsity and noise for the given shape.
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        InstanceRecipe { m, n, sparsity: m / 9, noise_scale: 0.01, seed }
    }

    pub fn with_sparsity(mut self, sparsity: usize) -> Self {
        self.sparsity = sparsity;
        self
    }

    pub fn with_noise_scale(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidArgument(format!(
                "instance shape must be positive, got {}x{}",
                self.m, self.n
            )));
        }
        if self.sparsity == 0 || self.sparsity > self.n {
            return Err(Error::InvalidArgument(format!(
                "sparsity must lie in [1, n]; got {} with n = {}",
                self.sparsity, self.n
            )));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise scale must be nonnegative, got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }
}

/// An immutable problem instance. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: DenseMatrix,
    b: Vec<f64>,
    penalty: Penalty,
    bounds: BoxConstraint,
    lipschitz: f64,
    lipschitz_seconds: f64,
}

impl ProblemInstance {
    /// Wraps the data and estimates the step constant.
    pub fn new(a: DenseMatrix, b: Vec<f64>, penalty: Penalty, bounds: BoxConstraint) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch { expected: a.rows(), found: b.len() });
        }
        if bounds.dim() != a.cols() {
            return Err(Error::DimensionMismatch { expected: a.cols(), found: bounds.dim() });
        }
        if a.data().iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("instance data must be finite".into()));
        }
        let started = Instant::now();
        let lipschitz = estimate_lipschitz(&a)?;
        let lipschitz_seconds = started.elapsed().as_secs_f64();
        Ok(ProblemInstance { a, b, penalty, bounds, lipschitz, lipschitz_seconds })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn observations(&self) -> &[f64] {
        &self.b
    }

    pub fn penalty(&self) -> &Penalty {
        &self.penalty
    }

    pub fn bounds(&self) -> &BoxConstraint {
        &self.bounds
    }

    /// Cached upper bound on the largest eigenvalue of `A^T A`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Wall time spent estimating the step constant at construction.
    pub fn lipschitz_seconds(&self) -> f64 {
        self.lipschitz_seconds
    }

    /// `r = A x - b`.
    pub fn residual_into(&self, x: &[f64], out: &mut [f64]) {
        self.a.matvec(x, out);
        for (o, &bi) in out.iter_mut().zip(&self.b) {
            *o -= bi;
        }
    }

    /// Full objective `0.5 ||Ax - b||^2 + Phi(|x|)`, `+inf` outside the box.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: x.len() });
        }
        if !self.bounds.contains(x) {
            return Ok(f64::INFINITY);
        }
        let mut r = vec![0.0; self.m()];
        self.residual_into(x, &mut r);
        Ok(0.5 * dot(&r, &r) + self.penalty.big_phi(x))
    }

    /// Smooth objective value from a precomputed residual.
    pub fn objective_from_residual(&self, x: &[f64], residual: &[f64]) -> f64 {
        0.5 * dot(residual, residual) + self.penalty.big_phi(x)
    }

    /// Gradient of the smooth part, `A^T (Ax - b)`.
    pub fn grad_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: x.len() });
        }
        let mut r = vec![0.0; self.m()];
        self.residual_into(x, &mut r);
        let mut g = vec![0.0; self.n()];
        self.a.matvec_t(&r, &mut g);
        Ok(g)
    }

    /// Exact Euclidean distance from zero to the objective subdifferential at
    /// `x`, combining the smooth gradient, the penalty weights and the normal
    /// cone of the box componentwise.
    pub fn stationarity_residual(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: x.len() });
        }
        if !self.bounds.contains(x) {
            return Err(Error::InvalidArgument("point lies outside the box".into()));
        }
        let g = self.grad_f(x)?;
        let mut sum_sq = 0.0;
        for i in 0..x.len() {
            let s = self.penalty.phi_weight(x[i].abs())?;
            let r = scalar_subdifferential_distance(
                g[i],
                s,
                x[i],
                self.bounds.lower()[i],
                self.bounds.upper()[i],
            );
            sum_sq += r * r;
        }
        Ok(sum_sq.sqrt())
    }
}

/// Relative tolerance on successive Rayleigh quotients.
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 5000;
/// Relative inflation applied to the final Rayleigh quotient so the returned
/// value majorizes the true spectral bound.
const POWER_INFLATION: f64 = 1e-6;

/// Largest eigenvalue of `A^T A` by power iteration on the smaller Gram
/// operator, inflated by a relative margin. Deterministic: the start vector
/// comes from a fixed-seed generator.
pub fn estimate_lipschitz(a: &DenseMatrix) -> Result<f64> {
    if a.is_zero() {
        return Err(Error::Degenerate("cannot estimate spectral norm of a zero matrix".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    let dim = m.min(n);
    let mut src = NormalSource::new(0x5ca1ab1e);
    let mut v: Vec<f64> = (0..dim).map(|_| src.next_normal()).collect();
    let norm = nrm2(&v);
    for vi in v.iter_mut() {
        *vi /= norm;
    }

    let mut tmp = vec![0.0; m.max(n)];
    let mut w = vec![0.0; dim];
    let mut rayleigh_prev = 0.0;
    let mut rayleigh = 0.0;
    for _ in 0..POWER_MAX_ITER {
        // w = Gram * v through two rectangular products.
        if n <= m {
            a.matvec(&v, &mut tmp[..m]);
            a.matvec_t(&tmp[..m], &mut w);
        } else {
            a.matvec_t(&v, &mut tmp[..n]);
            a.matvec(&tmp[..n], &mut w);
        }
        rayleigh = dot(&v, &w);
        if rayleigh <= 0.0 {
            // v fell into the nullspace; draw a fresh direction.
            for vi in v.iter_mut() {
                *vi = src.next_normal();
            }
            let norm = nrm2(&v);
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            rayleigh_prev = 0.0;
            continue;
        }
        if (rayleigh - rayleigh_prev).abs() < POWER_TOL * rayleigh {
            break;
        }
        rayleigh_prev = rayleigh;
        let wnorm = nrm2(&w);
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / wnorm;
        }
    }
    Ok(rayleigh * (1.0 + POWER_INFLATION))
}

/// Draws an instance from the recipe. The draw order is fixed: design
/// entries in column-major order, then the support by partial Fisher-Yates,
/// then the planted values in ascending support index, then the noise.
pub fn generate_instance(
    recipe: &InstanceRecipe,
    penalty: Penalty,
    bounds: BoxConstraint,
) -> Result<ProblemInstance> {
    let (a, b) = generate_data(recipe)?;
    ProblemInstance::new(a, b, penalty, bounds)
}

/// The `(A, b)` pair of [`generate_instance`], without penalty or box.
pub fn generate_data(recipe: &InstanceRecipe) -> Result<(DenseMatrix, Vec<f64>)> {
    let (a, b, _planted) = generate_data_with_signal(recipe)?;
    Ok((a, b))
}

/// As [`generate_data`], also returning the planted sparse signal.
pub fn generate_data_with_signal(
    recipe: &InstanceRecipe,
) -> Result<(DenseMatrix, Vec<f64>, Vec<f64>)> {
    recipe.validate()?;
    let (m, n) = (recipe.m, recipe.n);
    let mut src = NormalSource::new(recipe.seed);

    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        data.push(src.next_normal());
    }
    let mut a = DenseMatrix::from_column_major(m, n, data)?;
    a.normalize_columns()?;

    let rng = src.raw();
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..recipe.sparsity {
        let j = i + rng.next_below(n - i);
        indices.swap(i, j);
    }
    let mut support = indices[..recipe.sparsity].to_vec();
    support.sort_unstable();

    let mut planted = vec![0.0; n];
    for &idx in &support {
        planted[idx] = src.next_normal();
    }

    let mut b = vec![0.0; m];
    a.matvec(&planted, &mut b);
    for bi in b.iter_mut() {
        *bi += recipe.noise_scale * src.next_normal();
    }
    Ok((a, b, planted))
}

const DUMP_MAGIC: &[u8; 4] = b"IRL1";

/// Writes `(A, b)` in the binary interchange format: magic `IRL1`, `u32` row
/// and column counts, the column-major design, then the observations, all
/// little-endian.
pub fn dump_instance<W: Write>(w: &mut W, a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: b.len() });
    }
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(a.rows() as u32).to_le_bytes())?;
    w.write_all(&(a.cols() as u32).to_le_bytes())?;
    for &v in a.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    for &v in b {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads the binary interchange format written by [`dump_instance`].
pub fn load_instance<R: Read>(r: &mut R) -> Result<(DenseMatrix, Vec<f64>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Parse("bad magic bytes in instance file".into()));
    }
    let mut quad = [0u8; 4];
    r.read_exact(&mut quad)?;
    let m = u32::from_le_bytes(quad) as usize;
    r.read_exact(&mut quad)?;
    let n = u32::from_le_bytes(quad) as usize;
    let mut oct = [0u8; 8];
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        r.read_exact(&mut oct)?;
        data.push(f64::from_le_bytes(oct));
    }
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        r.read_exact(&mut oct)?;
        b.push(f64::from_le_bytes(oct));
    }
    Ok((DenseMatrix::from_column_major(m, n, data)?, b))
}

/// Text alternative for small instances: a `m,n` header line, `m` rows of the
/// design with `n` comma-separated entries each, then one line with the `m`
/// observations. Reals carry 17 significant digits, enough to round-trip.
pub fn dump_instance_csv<W: Write>(w: &mut W, a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: b.len() });
    }
    writeln!(w, "{},{}", a.rows(), a.cols())?;
    for i in 0..a.rows() {
        let row: Vec<String> = (0..a.cols()).map(|j| format!("{:.16e}", a.get(i, j))).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    let obs: Vec<String> = b.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(w, "{}", obs.join(","))?;
    Ok(())
}

/// Reads the text format written by [`dump_instance_csv`].
pub fn load_instance_csv<R: Read>(r: &mut R) -> Result<(DenseMatrix, Vec<f64>)> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty instance file".into()))??;
    let dims: Vec<&str> = header.trim().split(',').collect();
    if dims.len() != 2 {
        return Err(Error::Parse(format!("bad header line: {header}")));
    }
    let m: usize = dims[0].trim().parse().map_err(|_| Error::Parse("bad row count".into()))?;
    let n: usize = dims[1].trim().parse().map_err(|_| Error::Parse("bad column count".into()))?;
    let parse_row = |line: &str, expect: usize| -> Result<Vec<f64>> {
        let vals: Vec<f64> = line
            .trim()
            .split(',')
            .map(|tok| tok.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad real: {tok}"))))
            .collect::<Result<_>>()?;
        if vals.len() != expect {
            return Err(Error::DimensionMismatch { expected: expect, found: vals.len() });
        }
        Ok(vals)
    };
    let mut a = DenseMatrix::zeros(m, n);
    for i in 0..m {
        let line = lines.next().ok_or_else(|| Error::Parse("truncated design".into()))??;
        for (j, v) in parse_row(&line, n)?.into_iter().enumerate() {
            a.set(i, j, v);
        }
    }
    let line = lines.next().ok_or_else(|| Error::Parse("missing observations".into()))??;
    let b = parse_row(&line, m)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::nrm2_diff;

    fn small_instance(seed: u64) -> ProblemInstance {
        let recipe = InstanceRecipe::new(18, 40, seed);
        generate_instance(&recipe, Penalty::log(5e-4, 0.5).unwrap(), BoxConstraint::unbounded(40))
            .unwrap()
    }

    #[test]
    fn objective_examples() {
        let inst = small_instance(3);
        let b = inst.observations().to_vec();
        let zero = vec![0.0; inst.n()];
        let expect = 0.5 * dot(&b, &b);
        assert!((inst.objective(&zero).unwrap() - expect).abs() < 1e-14);

        let a = DenseMatrix::from_fn(1, 1, |_, _| 1.0);
        let p = Penalty::log(5e-4, 0.5).unwrap();
        let one = ProblemInstance::new(a, vec![1.0], p, BoxConstraint::unbounded(1)).unwrap();
        let val = one.objective(&[1.0]).unwrap();
        assert!((val - 5.493061443340549e-4).abs() < 1e-15, "val = {val}");

        let boxed = ProblemInstance::new(
            DenseMatrix::from_fn(1, 1, |_, _| 1.0),
            vec![1.0],
            p,
            BoxConstraint::uniform(1, -0.5, 0.5).unwrap(),
        )
        .unwrap();
        assert_eq!(boxed.objective(&[0.75]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gradient_examples() {
        let inst = small_instance(4);
        let zero = vec![0.0; inst.n()];
        let g = inst.grad_f(&zero).unwrap();
        let mut atb = vec![0.0; inst.n()];
        inst.matrix().matvec_t(inst.observations(), &mut atb);
        for i in 0..inst.n() {
            assert!((g[i] + atb[i]).abs() < 1e-14);
        }

        let eye = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        let p = Penalty::l1(1.0).unwrap();
        let id = ProblemInstance::new(eye, vec![0.0; 3], p, BoxConstraint::unbounded(3)).unwrap();
        let x = vec![0.3, -1.25, 2.0];
        assert_eq!(id.grad_f(&x).unwrap(), x);
        assert!(id.grad_f(&[1.0]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let inst = small_instance(5);
        let mut src = NormalSource::new(17);
        let x: Vec<f64> = (0..inst.n()).map(|_| src.next_normal()).collect();
        let g = inst.grad_f(&x).unwrap();
        let h = 1e-6;
        for i in 0..inst.n() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            // Differentiate the smooth part only.
            let fp = inst.objective(&xp).unwrap() - inst.penalty().big_phi(&xp);
            let fm = inst.objective(&xm).unwrap() - inst.penalty().big_phi(&xm);
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0),
                "component {i}: fd {fd} vs grad {}",
                g[i]
            );
        }
    }

    #[test]
    fn lipschitz_diagonal_cases() {
        let a = DenseMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => 3.0,
            (1, 1) => 1.0,
            _ => 0.0,
        });
        let l = estimate_lipschitz(&a).unwrap();
        assert!((l / (1.0 + 1e-6) - 9.0).abs() < 1e-5 * 9.0, "l = {l}");

        let eye = DenseMatrix::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        let l = estimate_lipschitz(&eye).unwrap();
        assert!((l / (1.0 + 1e-6) - 1.0).abs() < 1e-9);

        assert!(estimate_lipschitz(&DenseMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn lipschitz_majorizes_descent_lemma() {
        let inst = small_instance(6);
        let l = inst.lipschitz();
        let mut src = NormalSource::new(23);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..inst.n()).map(|_| src.next_normal()).collect();
            let y: Vec<f64> = (0..inst.n()).map(|_| src.next_normal()).collect();
            let fx = inst.objective(&x).unwrap() - inst.penalty().big_phi(&x);
            let fy = inst.objective(&y).unwrap() - inst.penalty().big_phi(&y);
            let g = inst.grad_f(&x).unwrap();
            let mut lin = fx;
            for i in 0..inst.n() {
                lin += g[i] * (y[i] - x[i]);
            }
            let quad = 0.5 * l * nrm2_diff(&y, &x).powi(2);
            assert!(fy <= lin + quad + 1e-10 * (1.0 + fy.abs()));
        }
    }

    #[test]
    fn generation_postconditions() {
        let recipe = InstanceRecipe::new(45, 128, 9);
        assert_eq!(recipe.sparsity, 5);
        let (a, _b) = generate_data(&recipe).unwrap();
        for j in 0..a.cols() {
            assert!((nrm2(a.col(j)) - 1.0).abs() < 1e-12);
        }

        let (a1, b1) = generate_data(&recipe).unwrap();
        let (a2, b2) = generate_data(&recipe).unwrap();
        assert_eq!(a1.data(), a2.data());
        assert_eq!(b1, b2);

        let other = InstanceRecipe::new(45, 128, 10);
        let (_, b3) = generate_data(&other).unwrap();
        assert!(nrm2_diff(&b1, &b3) > 0.0);
    }

    #[test]
    fn planted_signal_has_requested_support() {
        let recipe = InstanceRecipe::new(27, 64, 12).with_noise_scale(0.0);
        assert_eq!(recipe.sparsity, 3);
        let (a, b, planted) = generate_data_with_signal(&recipe).unwrap();
        assert_eq!(planted.iter().filter(|v| **v != 0.0).count(), recipe.sparsity);
        // With zero noise the observations are exactly the planted image.
        let mut image = vec![0.0; a.rows()];
        a.matvec(&planted, &mut image);
        assert_eq!(image, b);
    }

    #[test]
    fn invalid_recipes_rejected() {
        assert!(generate_data(&InstanceRecipe::new(5, 10, 0)).is_err()); // sparsity 0
        assert!(generate_data(&InstanceRecipe::new(0, 10, 0)).is_err());
        let huge = InstanceRecipe::new(90, 4, 0); // default sparsity 10 > n
        assert!(generate_data(&huge).is_err());
    }

    #[test]
    fn stationarity_residual_examples() {
        let p = Penalty::log(5e-4, 0.5).unwrap();
        let a = DenseMatrix::from_fn(1, 1, |_, _| 1.0);
        let inst = ProblemInstance::new(a, vec![0.0], p, BoxConstraint::unbounded(1)).unwrap();
        assert_eq!(inst.stationarity_residual(&[0.0]).unwrap(), 0.0);

        let inst = small_instance(7);
        let zero = vec![0.0; inst.n()];
        let r = inst.stationarity_residual(&zero).unwrap();
        let mut atb = vec![0.0; inst.n()];
        inst.matrix().matvec_t(inst.observations(), &mut atb);
        let ell = inst.penalty().weight_at_zero();
        let expect: f64 =
            atb.iter().map(|&v| (v.abs() - ell).max(0.0).powi(2)).sum::<f64>().sqrt();
        assert!((r - expect).abs() < 1e-12);
    }

    #[test]
    fn stationarity_residual_outside_box_is_error() {
        let p = Penalty::l1(1.0).unwrap();
        let a = DenseMatrix::from_fn(1, 1, |_, _| 1.0);
        let inst =
            ProblemInstance::new(a, vec![0.0], p, BoxConstraint::uniform(1, -1.0, 1.0).unwrap())
                .unwrap();
        assert!(inst.stationarity_residual(&[2.0]).is_err());
    }

    #[test]
    fn stationarity_residual_matches_enumeration_on_small_problems() {
        // Brute-force oracle: grid over the product subdifferential and the
        // normal cone, n <= 2.
        let mut src = NormalSource::new(31);
        for trial in 0..50 {
            let n = 1 + trial % 2;
            let a = DenseMatrix::from_fn(3, n, |_, _| src.next_normal());
            let b: Vec<f64> = (0..3).map(|_| src.next_normal()).collect();
            let p = Penalty::log(0.3, 0.4).unwrap();
            let bounds = if trial % 3 == 0 {
                BoxConstraint::uniform(n, -0.25, 0.25).unwrap()
            } else {
                BoxConstraint::unbounded(n)
            };
            let inst = ProblemInstance::new(a, b, p, bounds.clone()).unwrap();
            let raw: Vec<f64> = (0..n).map(|_| 0.6 * src.next_normal()).collect();
            let mut x = crate::prox::project_box(&raw, &bounds).unwrap();
            if trial % 4 == 0 {
                x[0] = 0.0;
            }
            let fast = inst.stationarity_residual(&x).unwrap();

            let g = inst.grad_f(&x).unwrap();
            let mut best = 0.0f64;
            for i in 0..n {
                let s = p.phi_weight(x[i].abs()).unwrap();
                let (lo, hi) = if x[i] == 0.0 { (-s, s) } else { (s * x[i].signum(), s * x[i].signum()) };
                let at_lower = x[i] == bounds.lower()[i] && bounds.lower()[i].is_finite();
                let at_upper = x[i] == bounds.upper()[i] && bounds.upper()[i].is_finite();
                // Distance from zero to g_i + u plus the normal-cone ray.
                let d = |u: f64| -> f64 {
                    let v = g[i] + u;
                    if at_lower && at_upper {
                        0.0
                    } else if at_lower {
                        (-v).max(0.0)
                    } else if at_upper {
                        v.max(0.0)
                    } else {
                        v.abs()
                    }
                };
                // d is convex in u, so the grid argmin brackets the true
                // minimizer; three refinement passes reach 1e-9 accuracy.
                let (mut lo_w, mut hi_w) = (lo, hi);
                let mut comp_best = f64::INFINITY;
                for _ in 0..3 {
                    let grid = 2000;
                    let mut arg = lo_w;
                    for t in 0..=grid {
                        let u = lo_w + (hi_w - lo_w) * t as f64 / grid as f64;
                        let val = d(u);
                        if val < comp_best {
                            comp_best = val;
                            arg = u;
                        }
                    }
                    if lo_w == hi_w {
                        break;
                    }
                    let cell = (hi_w - lo_w) / grid as f64;
                    lo_w = (arg - cell).max(lo);
                    hi_w = (arg + cell).min(hi);
                }
                best += comp_best * comp_best;
            }
            let oracle = best.sqrt();
            assert!((fast - oracle).abs() <= 1e-9, "fast {fast} vs oracle {oracle}");
        }
    }

    #[test]
    fn binary_dump_round_trips() {
        let recipe = InstanceRecipe::new(12, 20, 77);
        let (a, b) = generate_data(&recipe).unwrap();
        let mut buf = Vec::new();
        dump_instance(&mut buf, &a, &b).unwrap();
        let (a2, b2) = load_instance(&mut buf.as_slice()).unwrap();
        assert_eq!(a.data(), a2.data());
        assert_eq!(b, b2);
        assert!(load_instance(&mut &b"JUNK"[..]).is_err());
    }

    #[test]
    fn csv_dump_round_trips() {
        let recipe = InstanceRecipe::new(10, 15, 78);
        let (a, b) = generate_data(&recipe).unwrap();
        let mut buf = Vec::new();
        dump_instance_csv(&mut buf, &a, &b).unwrap();
        let (a2, b2) = load_instance_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(a.data(), a2.data());
        assert_eq!(b, b2);
    }
}
