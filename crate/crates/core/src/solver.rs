//! Method-of-lines integration of `f_t = Δf + a f − b f³` with classical RK4.
//!
//! The step is chosen so that the snapshot interval is an exact integer
//! number of steps; snapshot times are therefore `k · interval` up to
//! rounding, and trajectories at different resolutions share time levels.
//! Positivity is checked at every stage and never enforced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{Field, FieldError, Grid};
use crate::params::PdeParams;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("positivity lost at t = {t}, node {node} (value {value})")]
    PositivityLost { t: f64, node: usize, value: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("steady state not reached by t_max = {t_max} (residual {residual})")]
    NotConverged { t_max: f64, residual: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Initial data. All variants must produce strictly positive samples.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<S> {
    Constant(S),
    /// The constant steady state `√(a/b)`.
    Equilibrium,
    /// `√(a/b) + amplitude · Π sin(2π·mode·x_k/L)`.
    SinePerturbed { amplitude: S, mode: u32 },
    /// `floor + √(a/b)·exp(−d²/(2 width²))`, `d` the minimal-image distance to
    /// `(center, center)`.
    GaussianBump { center: S, width: S, floor: S },
    /// Independent uniform samples in `[lo, hi)` from a seeded ChaCha8 stream.
    RandomPositive { lo: S, hi: S, seed: u64 },
    /// The closed-form traveling front centred at `center` (1D).
    ExactFront { center: S },
    /// `low` on `[0, position)`, `high` on `[position, L)` (1D).
    Step { low: S, high: S, position: S },
    /// Explicit samples.
    Samples(Vec<S>),
}

impl<S: Scalar> InitialCondition<S> {
    pub fn sample(&self, grid: &Grid<S>, pde: &PdeParams<S>) -> Result<Field<S>, SolverError> {
        let eq = pde.equilibrium();
        let l = grid.extent();
        let two_pi = S::lit(2.0) * S::PI();
        let field = match self {
            Self::Constant(c) => {
                if !(*c > S::zero()) {
                    return Err(SolverError::InvalidConfig(format!("constant {c} must be positive")));
                }
                Field::constant(*grid, S::zero(), *c)
            }
            Self::Equilibrium => Field::constant(*grid, S::zero(), eq),
            Self::SinePerturbed { amplitude, mode } => {
                if !(amplitude.abs() < eq) {
                    return Err(SolverError::InvalidConfig(format!(
                        "sine amplitude {amplitude} must be below the equilibrium value {eq}"
                    )));
                }
                let k = two_pi * S::from_u32(*mode).unwrap_or_else(S::one) / l;
                let dim = grid.dim();
                Field::from_fn(*grid, S::zero(), |x| {
                    let p = (0..dim).fold(S::one(), |acc, ax| acc * (k * x[ax]).sin());
                    eq + *amplitude * p
                })
            }
            Self::GaussianBump { center, width, floor } => {
                if !(*floor > S::zero() && *width > S::zero()) {
                    return Err(SolverError::InvalidConfig("bump floor and width must be positive".into()));
                }
                let c = [*center, *center];
                let denom = S::lit(2.0) * *width * *width;
                Field::from_fn(*grid, S::zero(), |x| *floor + eq * (-grid.distance_sq(&x, &c) / denom).exp())
            }
            Self::RandomPositive { lo, hi, seed } => {
                if !(*lo > S::zero() && *hi > *lo) {
                    return Err(SolverError::InvalidConfig(format!(
                        "random range [{lo}, {hi}) must satisfy 0 < lo < hi"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let (lo64, hi64) = (lo.to_f64_lossy(), hi.to_f64_lossy());
                let values = (0..grid.len()).map(|_| S::lit(rng.gen_range(lo64..hi64))).collect();
                Field::new(*grid, S::zero(), values)?
            }
            Self::ExactFront { center } => {
                require_1d(grid, "exact front")?;
                let front = crate::waves::ExactFront::new(*pde);
                Field::from_fn(*grid, S::zero(), |x| front.value(x[0] - *center))
            }
            Self::Step { low, high, position } => {
                require_1d(grid, "step")?;
                if !(*low > S::zero() && *high > S::zero()) {
                    return Err(SolverError::InvalidConfig("step levels must be positive".into()));
                }
                Field::from_fn(*grid, S::zero(), |x| if x[0] < *position { *low } else { *high })
            }
            Self::Samples(v) => Field::new(*grid, S::zero(), v.clone())?,
        };
        field.check_positive()?;
        Ok(field)
    }
}

fn require_1d<S: Scalar>(grid: &Grid<S>, what: &str) -> Result<(), SolverError> {
    if grid.dim() == 1 {
        Ok(())
    } else {
        Err(SolverError::InvalidConfig(format!("{what} initial data is one-dimensional")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<S> {
    pub pde: PdeParams<S>,
    pub grid: Grid<S>,
    pub t_end: S,
    pub cfl_safety: S,
    pub snapshot_interval: S,
    pub initial_condition: InitialCondition<S>,
    /// Optional cap on the step; the stability bound still applies.
    pub max_dt: Option<S>,
}

impl<S: Scalar> SolverConfig<S> {
    pub fn new(pde: PdeParams<S>, grid: Grid<S>, initial_condition: InitialCondition<S>, t_end: S) -> Self {
        Self {
            pde,
            grid,
            t_end,
            cfl_safety: S::lit(0.4),
            snapshot_interval: t_end,
            initial_condition,
            max_dt: None,
        }
    }

    pub fn with_snapshot_interval(mut self, interval: S) -> Self {
        self.snapshot_interval = interval;
        self
    }

    pub fn with_max_dt(mut self, dt: S) -> Self {
        self.max_dt = Some(dt);
        self
    }

    pub fn with_cfl_safety(mut self, safety: S) -> Self {
        self.cfl_safety = safety;
        self
    }

    fn check(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.into()));
        if !(self.t_end > S::zero() && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if !(self.cfl_safety > S::zero() && self.cfl_safety <= S::one()) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.snapshot_interval > S::zero() && self.snapshot_interval.is_finite()) {
            return bad("snapshot_interval must be positive");
        }
        if let Some(dt) = self.max_dt {
            if !(dt > S::zero()) {
                return bad("max_dt must be positive");
            }
        }
        Ok(())
    }
}

/// Snapshots of one run, at strictly increasing times starting at 0.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub config: SolverConfig<S>,
    pub snapshots: Vec<Field<S>>,
    pub dt_used: S,
    pub steps: usize,
}

impl<S: Scalar> Trajectory<S> {
    pub fn times(&self) -> Vec<S> {
        self.snapshots.iter().map(|f| f.time()).collect()
    }

    /// Index of the snapshot whose time is within `rel_tol` of `t`.
    pub fn snapshot_at(&self, t: S, rel_tol: S) -> Option<usize> {
        let scale = t.abs().max(self.dt_used);
        self.snapshots.iter().position(|f| (f.time() - t).abs() <= rel_tol * scale)
    }
}

/// `cfl_safety · min(h²/(2·dim), 1/(a + 3b·f_max²))`.
pub fn stable_dt<S: Scalar>(grid: &Grid<S>, pde: &PdeParams<S>, f_max: S, cfl_safety: S) -> S {
    let h = grid.spacing();
    let diffusion = h * h / S::from_count(2 * grid.dim());
    let reaction = S::one() / (pde.a() + S::lit(3.0) * pde.b() * f_max * f_max);
    cfl_safety * diffusion.min(reaction)
}

/// `Δf + a f − b f³` on the grid.
pub fn pde_rhs<S: Scalar>(f: &Field<S>, pde: &PdeParams<S>) -> Field<S> {
    let lap = f.laplacian();
    lap.zip_map(f, |d, v| d + pde.reaction(v))
}

fn rhs_into<S: Scalar>(grid: &Grid<S>, pde: &PdeParams<S>, u: &[S], out: &mut [S]) {
    let h = grid.spacing();
    let scale = S::one() / (h * h);
    let dim = grid.dim();
    let two_dim = S::from_count(2 * dim);
    if dim == 1 {
        let n = u.len();
        for i in 0..n {
            let l = u[if i == 0 { n - 1 } else { i - 1 }];
            let r = u[if i + 1 == n { 0 } else { i + 1 }];
            out[i] = (l + r - two_dim * u[i]) * scale + pde.reaction(u[i]);
        }
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = -two_dim * u[i];
            for axis in 0..dim {
                acc += u[grid.shift(i, axis, 1)] + u[grid.shift(i, axis, -1)];
            }
            *o = acc * scale + pde.reaction(u[i]);
        }
    }
}

/// RK4 integrator state.
struct Stepper<S> {
    grid: Grid<S>,
    pde: PdeParams<S>,
    dt: S,
    u: Vec<S>,
    k: [Vec<S>; 4],
    stage: Vec<S>,
}

impl<S: Scalar> Stepper<S> {
    fn new(grid: Grid<S>, pde: PdeParams<S>, dt: S, u: Vec<S>) -> Self {
        let n = u.len();
        Self { grid, pde, dt, u, k: std::array::from_fn(|_| vec![S::zero(); n]), stage: vec![S::zero(); n] }
    }

    fn check_stage(values: &[S], t: S) -> Result<(), SolverError> {
        for (node, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(SolverError::NonFiniteState { t: t.to_f64_lossy() });
            }
            if v <= S::zero() {
                return Err(SolverError::PositivityLost { t: t.to_f64_lossy(), node, value: v.to_f64_lossy() });
            }
        }
        Ok(())
    }

    /// Max-norm of the right-hand side at the current state (valid after `step`
    /// computed it as the first stage, or after `refresh_rate`).
    fn rate_norm(&self) -> S {
        self.k[0].iter().fold(S::zero(), |m, &v| m.max(v.abs()))
    }

    fn refresh_rate(&mut self) {
        rhs_into(&self.grid, &self.pde, &self.u, &mut self.k[0]);
    }

    /// Advances from time `t`; assumes `k[0]` already holds the rate at `u`.
    fn step(&mut self, t: S) -> Result<(), SolverError> {
        let dt = self.dt;
        let half = dt / S::lit(2.0);
        let (k, rest) = self.k.split_at_mut(1);
        let k1 = &k[0];
        let (k2s, rest) = rest.split_at_mut(1);
        let (k3s, k4s) = rest.split_at_mut(1);
        let (k2, k3, k4) = (&mut k2s[0], &mut k3s[0], &mut k4s[0]);

        for ((s, &u), &r) in self.stage.iter_mut().zip(&self.u).zip(k1) {
            *s = u + half * r;
        }
        Self::check_stage(&self.stage, t + half)?;
        rhs_into(&self.grid, &self.pde, &self.stage, k2);
        for ((s, &u), &r) in self.stage.iter_mut().zip(&self.u).zip(k2.iter()) {
            *s = u + half * r;
        }
        Self::check_stage(&self.stage, t + half)?;
        rhs_into(&self.grid, &self.pde, &self.stage, k3);
        for ((s, &u), &r) in self.stage.iter_mut().zip(&self.u).zip(k3.iter()) {
            *s = u + dt * r;
        }
        Self::check_stage(&self.stage, t + dt)?;
        rhs_into(&self.grid, &self.pde, &self.stage, k4);
        let sixth = dt / S::lit(6.0);
        let two = S::lit(2.0);
        for i in 0..self.u.len() {
            self.u[i] += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        Self::check_stage(&self.u, t + dt)?;
        self.refresh_rate();
        Ok(())
    }
}

/// Step size and steps per snapshot so that the interval is an exact multiple.
fn plan_steps<S: Scalar>(config: &SolverConfig<S>, initial: &Field<S>) -> (S, usize) {
    let f_max = initial.max_value().max(config.pde.equilibrium());
    let mut dt = stable_dt(&config.grid, &config.pde, f_max, config.cfl_safety);
    if let Some(cap) = config.max_dt {
        dt = dt.min(cap);
    }
    let ratio = config.snapshot_interval / dt;
    // Tolerate rounding when the interval is already an exact multiple.
    let per_snapshot = (ratio * (S::one() - S::lit(1e-12))).ceil().max(S::one());
    let per_snapshot = per_snapshot.to_usize().unwrap_or(1);
    (config.snapshot_interval / S::from_count(per_snapshot), per_snapshot)
}

/// Integrates the configured initial data up to `t_end`, recording snapshots at
/// `t = 0`, at every multiple of the snapshot interval, and at `t_end`.
pub fn evolve<S: Scalar>(config: &SolverConfig<S>) -> Result<Trajectory<S>, SolverError> {
    config.check()?;
    let initial = config.initial_condition.sample(&config.grid, &config.pde)?;
    let (dt, per_snapshot) = plan_steps(config, &initial);
    let total = (config.t_end / dt).round().to_usize().unwrap_or(0).max(1);

    let mut stepper = Stepper::new(config.grid, config.pde, dt, initial.values().to_vec());
    stepper.refresh_rate();
    let mut snapshots = vec![initial];
    for step in 1..=total {
        let t = S::from_count(step - 1) * dt;
        stepper.step(t)?;
        if step % per_snapshot == 0 || step == total {
            let t_now = S::from_count(step) * dt;
            snapshots.push(Field::new(config.grid, t_now, stepper.u.clone())?);
        }
    }
    Ok(Trajectory { config: config.clone(), snapshots, dt_used: dt, steps: total })
}

/// Integrates until `max|Δf + af − bf³| ≤ tol`, returning the field at that time.
pub fn relax_steady<S: Scalar>(config: &SolverConfig<S>, tol: S, t_max: S) -> Result<Field<S>, SolverError> {
    config.check()?;
    if !(tol > S::zero()) {
        return Err(SolverError::InvalidConfig("tolerance must be positive".into()));
    }
    let initial = config.initial_condition.sample(&config.grid, &config.pde)?;
    let (dt, _) = plan_steps(config, &initial);
    let mut stepper = Stepper::new(config.grid, config.pde, dt, initial.into_values());
    stepper.refresh_rate();
    let mut step = 0usize;
    loop {
        let t = S::from_count(step) * dt;
        if stepper.rate_norm() <= tol {
            return Ok(Field::new(config.grid, t, stepper.u)?);
        }
        if t >= t_max {
            return Err(SolverError::NotConverged {
                t_max: t_max.to_f64_lossy(),
                residual: stepper.rate_norm().to_f64_lossy(),
            });
        }
        stepper.step(t)?;
        step += 1;
    }
}
