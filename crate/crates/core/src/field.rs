//! Periodic grids, sampled fields and second-order difference operators.
//!
//! The torus `[0, L)^dim` stands in for `ℝⁿ`: a positive periodic solution
//! extends periodically to a positive solution on the whole space. All
//! derivatives are central differences with periodic wrap, so every
//! operator has an `O(h²)` truncation error and is exact on constants.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::scalar::Scalar;

/// Minimum number of nodes per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("sample {value} at node {node} is not strictly positive")]
    NonPositiveSample { node: usize, value: f64 },
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("snapshot parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniform periodic grid in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<S> {
    dim: usize,
    points: usize,
    extent: S,
}

impl<S: Scalar> Grid<S> {
    pub fn new(dim: usize, points: usize, extent: S) -> Result<Self, FieldError> {
        if !(dim == 1 || dim == 2) {
            return Err(FieldError::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if points < MIN_POINTS {
            return Err(FieldError::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per axis, got {points}"
            )));
        }
        if !(extent > S::zero() && extent.is_finite()) {
            return Err(FieldError::InvalidGrid(format!("extent must be positive, got {extent}")));
        }
        Ok(Self { dim, points, extent })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn extent(&self) -> S {
        self.extent
    }

    #[inline]
    pub fn spacing(&self) -> S {
        self.extent / S::from_count(self.points)
    }

    /// Total node count, `points^dim`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis indices of a flat (row-major) node index.
    #[inline]
    pub fn axis_indices(&self, node: usize) -> [usize; 2] {
        if self.dim == 1 {
            [node, 0]
        } else {
            [node / self.points, node % self.points]
        }
    }

    #[inline]
    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.points + idx[1]
        }
    }

    /// Coordinates of a node; unused axes are zero.
    pub fn coords(&self, node: usize) -> [S; 2] {
        let h = self.spacing();
        let [i, j] = self.axis_indices(node);
        [S::from_count(i) * h, S::from_count(j) * h]
    }

    /// Node index reached by moving `offset` steps along `axis`, with wrap.
    #[inline]
    pub fn shift(&self, node: usize, axis: usize, offset: isize) -> usize {
        let n = self.points as isize;
        let mut idx = self.axis_indices(node);
        idx[axis] = (idx[axis] as isize + offset).rem_euclid(n) as usize;
        self.flat_index(idx)
    }

    /// Signed minimal-image displacement from `x1` to `x2` along one axis.
    pub fn min_image(&self, x1: S, x2: S) -> S {
        let l = self.extent;
        let mut d = (x2 - x1) % l;
        let half = l / S::lit(2.0);
        if d > half {
            d -= l;
        } else if d < -half {
            d += l;
        }
        d
    }

    /// Squared minimal-image distance between two points.
    pub fn distance_sq(&self, x1: &[S], x2: &[S]) -> S {
        (0..self.dim).map(|k| self.min_image(x1[k], x2[k]).powi(2)).sum()
    }

    /// Node nearest to `x`, if `x` lies on a node within `rel_tol · h`.
    pub fn node_at(&self, x: &[S], rel_tol: S) -> Option<usize> {
        let h = self.spacing();
        let mut idx = [0usize; 2];
        for k in 0..self.dim {
            let r = x[k] / h;
            let k_round = r.round();
            if (r - k_round).abs() > rel_tol {
                return None;
            }
            let i = k_round.to_i64()?.rem_euclid(self.points as i64) as usize;
            idx[k] = i;
        }
        Some(self.flat_index(idx))
    }
}

/// Samples on every node of a grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<S> {
    grid: Grid<S>,
    time: S,
    values: Vec<S>,
}

impl<S: Scalar> Field<S> {
    pub fn new(grid: Grid<S>, time: S, values: Vec<S>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, time, values })
    }

    pub fn constant(grid: Grid<S>, time: S, value: S) -> Self {
        Self { grid, time, values: vec![value; grid.len()] }
    }

    pub fn from_fn(grid: Grid<S>, time: S, f: impl Fn([S; 2]) -> S) -> Self {
        let values = (0..grid.len()).map(|node| f(grid.coords(node))).collect();
        Self { grid, time, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    #[inline]
    pub fn time(&self) -> S {
        self.time
    }

    pub fn with_time(mut self, time: S) -> Self {
        self.time = time;
        self
    }

    #[inline]
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    /// Same grid and time, new samples.
    fn derived(&self, values: Vec<S>) -> Self {
        Self { grid: self.grid, time: self.time, values }
    }

    /// Same grid and time with replacement samples.
    ///
    /// # Panics
    /// If the sample count does not match the grid.
    pub fn with_values(self, values: Vec<S>) -> Self {
        assert_eq!(values.len(), self.grid.len(), "sample count must match the grid");
        Self { values, ..self }
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        self.derived(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        self.derived(self.values.iter().zip(&other.values).map(|(&x, &y)| f(x, y)).collect())
    }

    /// First node whose sample is not strictly positive.
    pub fn check_positive(&self) -> Result<(), FieldError> {
        match self.values.iter().position(|&v| !(v > S::zero())) {
            Some(node) => Err(FieldError::NonPositiveSample {
                node,
                value: self.values[node].to_f64_lossy(),
            }),
            None => Ok(()),
        }
    }

    /// Elementwise natural logarithm; requires a strictly positive field.
    pub fn log_field(&self) -> Result<Self, FieldError> {
        self.check_positive()?;
        Ok(self.map(|v| v.ln()))
    }

    pub fn max_abs(&self) -> S {
        self.values.iter().fold(S::zero(), |m, &v| m.max(v.abs()))
    }

    /// Minimum value and the first node attaining it.
    pub fn min_with_node(&self) -> (S, usize) {
        let mut best = (S::infinity(), 0);
        for (i, &v) in self.values.iter().enumerate() {
            if v < best.0 {
                best = (v, i);
            }
        }
        best
    }

    pub fn max_value(&self) -> S {
        self.values.iter().fold(S::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn min_value(&self) -> S {
        self.min_with_node().0
    }

    /// Sum of samples times the cell volume `h^dim`.
    pub fn integral(&self) -> S {
        let cell = self.grid.spacing().powi(self.grid.dim as i32);
        self.values.iter().copied().sum::<S>() * cell
    }

    /// Central first difference along `axis`.
    pub fn diff(&self, axis: usize) -> Self {
        let g = &self.grid;
        let scale = S::one() / (S::lit(2.0) * g.spacing());
        let v = &self.values;
        self.derived(
            (0..v.len())
                .map(|i| (v[g.shift(i, axis, 1)] - v[g.shift(i, axis, -1)]) * scale)
                .collect(),
        )
    }

    /// Three-point second difference along `axis`.
    pub fn second_diff(&self, axis: usize) -> Self {
        let g = &self.grid;
        let h = g.spacing();
        let scale = S::one() / (h * h);
        let v = &self.values;
        let two = S::lit(2.0);
        self.derived(
            (0..v.len())
                .map(|i| (v[g.shift(i, axis, 1)] - two * v[i] + v[g.shift(i, axis, -1)]) * scale)
                .collect(),
        )
    }

    /// Four-point mixed central difference `∂²/∂x∂y` (2D only).
    pub fn mixed_diff(&self) -> Self {
        let g = &self.grid;
        let h = g.spacing();
        let scale = S::one() / (S::lit(4.0) * h * h);
        let v = &self.values;
        self.derived(
            (0..v.len())
                .map(|i| {
                    let ip = g.shift(i, 0, 1);
                    let im = g.shift(i, 0, -1);
                    (v[g.shift(ip, 1, 1)] - v[g.shift(ip, 1, -1)] - v[g.shift(im, 1, 1)]
                        + v[g.shift(im, 1, -1)])
                        * scale
                })
                .collect(),
        )
    }

    pub fn laplacian(&self) -> Self {
        let g = &self.grid;
        let h = g.spacing();
        let scale = S::one() / (h * h);
        let v = &self.values;
        let dim = g.dim;
        let two_dim = S::from_count(2 * dim);
        self.derived(
            (0..v.len())
                .map(|i| {
                    let mut acc = -two_dim * v[i];
                    for axis in 0..dim {
                        acc += v[g.shift(i, axis, 1)] + v[g.shift(i, axis, -1)];
                    }
                    acc * scale
                })
                .collect(),
        )
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.grid.dim).map(|axis| self.diff(axis)).collect()
    }

    /// `|∇u|²` from central differences.
    pub fn gradient_sq(&self) -> Self {
        self.grad_dot(self)
    }

    /// `∇u · ∇w` from central differences.
    pub fn grad_dot(&self, other: &Self) -> Self {
        let gu = self.gradient();
        let gw = other.gradient();
        let mut out = vec![S::zero(); self.values.len()];
        for (du, dw) in gu.iter().zip(&gw) {
            for (o, (&x, &y)) in out.iter_mut().zip(du.values.iter().zip(&dw.values)) {
                *o += x * y;
            }
        }
        self.derived(out)
    }

    /// `|∇∇u|²`, diagonal entries from second differences, off-diagonal from
    /// the mixed stencil.
    pub fn hessian_sq(&self) -> Self {
        let mut out = vec![S::zero(); self.values.len()];
        for axis in 0..self.grid.dim {
            let d = self.second_diff(axis);
            for (o, &x) in out.iter_mut().zip(&d.values) {
                *o += x * x;
            }
        }
        if self.grid.dim == 2 {
            let m = self.mixed_diff();
            for (o, &x) in out.iter_mut().zip(&m.values) {
                *o += S::lit(2.0) * x * x;
            }
        }
        self.derived(out)
    }

    /// `Δ|∇l|² − 2∇l·∇(Δl) − 2|∇∇l|²`, which vanishes in the continuum.
    pub fn bochner_residual(&self) -> Self {
        let lap_grad_sq = self.gradient_sq().laplacian();
        let transport = self.grad_dot(&self.laplacian());
        let hess = self.hessian_sq();
        let two = S::lit(2.0);
        let vals = lap_grad_sq
            .values
            .iter()
            .zip(&transport.values)
            .zip(&hess.values)
            .map(|((&a, &b), &c)| a - two * b - two * c)
            .collect();
        self.derived(vals)
    }

    /// Writes the snapshot format: a `# t=.. dim=.. N=.. L=..` header, then one
    /// sample per line (row-major in 2D), 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), FieldError> {
        writeln!(
            w,
            "# t={:.16e} dim={} N={} L={:.16e}",
            self.time, self.grid.dim, self.grid.points, self.grid.extent
        )?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, FieldError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| FieldError::Parse { line: 1, msg: "empty snapshot".into() })??;
        let parse_err = |msg: String| FieldError::Parse { line: 1, msg };
        let body = header
            .strip_prefix('#')
            .ok_or_else(|| parse_err("header must start with '#'".into()))?;
        let (mut t, mut dim, mut n, mut l) = (None, None, None, None);
        for tok in body.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(format!("malformed header token {tok:?}")))?;
            match k {
                "t" => t = v.parse::<f64>().ok(),
                "dim" => dim = v.parse::<usize>().ok(),
                "N" => n = v.parse::<usize>().ok(),
                "L" => l = v.parse::<f64>().ok(),
                _ => return Err(parse_err(format!("unknown header key {k:?}"))),
            }
        }
        let (Some(t), Some(dim), Some(n), Some(l)) = (t, dim, n, l) else {
            return Err(parse_err("header needs t, dim, N and L".into()));
        };
        let grid = Grid::new(dim, n, S::lit(l))?;
        let mut values = Vec::with_capacity(grid.len());
        for (i, line) in lines.enumerate() {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            let v: f64 = s.parse().map_err(|e| FieldError::Parse {
                line: i + 2,
                msg: format!("{e}: {s:?}"),
            })?;
            values.push(S::lit(v));
        }
        Field::new(grid, S::lit(t), values)
    }
}
