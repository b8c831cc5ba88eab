//! Traveling waves `f(x, t) = v(x + ηt)`.
//!
//! With this sign convention the profile solves `v'' − ηv' + av − bv³ = 0`
//! and a front with `η > 0` moves towards negative `x`. The module provides
//! a closed-form front used as an oracle, a shooting construction for
//! general speeds, front tracking on simulated trajectories, and the speed
//! and gradient checks.

use thiserror::Error;

use crate::field::Field;
use crate::params::PdeParams;
use crate::scalar::{ls_slope, Scalar};
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("invalid wave input: {0}")]
    InvalidInput(String),
    #[error("profile integration produced a non-finite state at xi = {xi}")]
    NonFiniteState { xi: f64 },
    #[error("level {level} is not crossed upwards in the snapshot at t = {t}")]
    LevelNotCrossed { level: f64, t: f64 },
    #[error("tracked front came within {gap} of another interface at t = {t}")]
    FrontHitBoundaryWindow { t: f64, gap: f64 },
}

/// `v(ξ) = √(a/b) · (1 + tanh(√(a/8) ξ)) / 2`, traveling with `η = 3√(a/2)`.
#[derive(Debug, Clone, Copy)]
pub struct ExactFront<S> {
    amplitude: S,
    rate: S,
    eta: S,
    pde: PdeParams<S>,
}

impl<S: Scalar> ExactFront<S> {
    pub fn new(pde: PdeParams<S>) -> Self {
        let a = pde.a();
        Self {
            amplitude: pde.equilibrium(),
            rate: (a / S::lit(8.0)).sqrt(),
            eta: S::lit(3.0) * (a / S::lit(2.0)).sqrt(),
            pde,
        }
    }

    pub fn eta(&self) -> S {
        self.eta
    }

    pub fn amplitude(&self) -> S {
        self.amplitude
    }

    // Logistic form of (1 + tanh(kξ))/2, accurate in both tails.
    fn sigma(&self, xi: S) -> S {
        let z = S::lit(2.0) * self.rate * xi;
        if z >= S::zero() {
            S::one() / (S::one() + (-z).exp())
        } else {
            let e = z.exp();
            e / (S::one() + e)
        }
    }

    pub fn value(&self, xi: S) -> S {
        self.amplitude * self.sigma(xi)
    }

    pub fn derivative(&self, xi: S) -> S {
        let s = self.sigma(xi);
        let s_bar = self.sigma(-xi);
        self.amplitude * S::lit(2.0) * self.rate * s * s_bar
    }

    pub fn second_derivative(&self, xi: S) -> S {
        let s = self.sigma(xi);
        let s_bar = self.sigma(-xi);
        let k = self.rate;
        self.amplitude * S::lit(4.0) * k * k * s * s_bar * (s_bar - s)
    }

    /// `v'' − ηv' + av − bv³` with analytic derivatives.
    pub fn residual(&self, xi: S) -> S {
        let v = self.value(xi);
        self.second_derivative(xi) - self.eta * self.derivative(xi) + self.pde.reaction(v)
    }

    /// Samples on `points` equispaced nodes of `[−half_width, half_width]`.
    pub fn sample(&self, half_width: S, points: usize) -> WaveProfile<S> {
        let h = S::lit(2.0) * half_width / S::from_count(points - 1);
        let xi: Vec<S> = (0..points).map(|i| -half_width + S::from_count(i) * h).collect();
        let v = xi.iter().map(|&x| self.value(x)).collect();
        WaveProfile { xi, v, eta: self.eta }
    }
}

/// A sampled profile on a uniform coordinate, with its signed speed.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile<S> {
    pub xi: Vec<S>,
    pub v: Vec<S>,
    pub eta: S,
}

impl<S: Scalar> WaveProfile<S> {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn spacing(&self) -> S {
        self.xi[1] - self.xi[0]
    }

    /// Central differences inside, second-order one-sided at the ends.
    pub fn derivative(&self) -> Vec<S> {
        let v = &self.v;
        let n = v.len();
        let h = self.spacing();
        let two = S::lit(2.0);
        let (three, four) = (S::lit(3.0), S::lit(4.0));
        (0..n)
            .map(|i| {
                if i == 0 {
                    (-three * v[0] + four * v[1] - v[2]) / (two * h)
                } else if i == n - 1 {
                    (three * v[n - 1] - four * v[n - 2] + v[n - 3]) / (two * h)
                } else {
                    (v[i + 1] - v[i - 1]) / (two * h)
                }
            })
            .collect()
    }

    pub fn second_derivative(&self) -> Vec<S> {
        let v = &self.v;
        let n = v.len();
        let h2 = self.spacing() * self.spacing();
        let two = S::lit(2.0);
        (0..n)
            .map(|i| {
                let c = i.clamp(1, n - 2);
                (v[c + 1] - two * v[c] + v[c - 1]) / h2
            })
            .collect()
    }

    /// Discrete `v'' − ηv' + av − bv³` at each sample.
    pub fn ode_residual(&self, pde: &PdeParams<S>) -> Vec<S> {
        let d1 = self.derivative();
        let d2 = self.second_derivative();
        self.v
            .iter()
            .zip(d1.iter().zip(&d2))
            .map(|(&v, (&dv, &ddv))| ddv - self.eta * dv + pde.reaction(v))
            .collect()
    }

    /// Coordinate where the profile first crosses `level` upwards.
    pub fn crossing(&self, level: S) -> Option<S> {
        self.v.windows(2).zip(self.xi.windows(2)).find_map(|(v, x)| {
            (v[0] < level && v[1] >= level).then(|| x[0] + (level - v[0]) / (v[1] - v[0]) * (x[1] - x[0]))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoConnectionReason {
    /// The orbit crossed zero (spiral at the origin).
    LostPositivity,
    /// The orbit climbed above the upper equilibrium.
    Overshoot,
    /// The orbit stayed above the tolerance over the whole window.
    DidNotDecay,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShootOutcome<S> {
    Connected(WaveProfile<S>),
    NoConnection { reason: NoConnectionReason, xi: S },
}

impl<S> ShootOutcome<S> {
    pub fn profile(&self) -> Option<&WaveProfile<S>> {
        match self {
            Self::Connected(p) => Some(p),
            Self::NoConnection { .. } => None,
        }
    }
}

/// Step of the profile integrator.
const SHOOT_STEP: f64 = 1e-3;
/// Initial offset from the upper equilibrium, relative to its value.
const SHOOT_OFFSET: f64 = 1e-8;

/// Follows the one-dimensional unstable manifold of `(√(a/b), 0)` (in
/// decreasing `ξ`) across `[−half_width, half_width]` and reports whether it
/// reaches zero while staying positive.
pub fn shoot_profile<S: Scalar>(
    pde: &PdeParams<S>,
    eta: S,
    half_width: S,
    tol: S,
) -> Result<ShootOutcome<S>, WaveError> {
    if !(eta != S::zero() && eta.is_finite()) {
        return Err(WaveError::InvalidInput(format!("speed must be finite and non-zero, got {eta}")));
    }
    if !(half_width > S::zero() && tol > S::zero()) {
        return Err(WaveError::InvalidInput("half width and tolerance must be positive".into()));
    }
    let amp = pde.equilibrium();
    let (a, b) = (pde.a(), pde.b());
    // v'' − ηv' − 2a u = 0 around the upper state: decaying root as ξ → +∞.
    let lambda = (eta - (eta * eta + S::lit(8.0) * a).sqrt()) / S::lit(2.0);
    let delta = amp * S::lit(SHOOT_OFFSET);
    let mut state = [amp - delta, lambda * (-delta)];

    // Backward-in-ξ system: d/ds (v, w) = −(w, ηw − av + bv³).
    let field = |s: [S; 2]| -> [S; 2] { [-s[1], -(eta * s[1] - a * s[0] + b * s[0] * s[0] * s[0])] };
    let h = S::lit(SHOOT_STEP);
    let steps = (S::lit(2.0) * half_width / h).ceil().to_usize().unwrap_or(0).max(2);
    let half = h / S::lit(2.0);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    xs.push(half_width);
    vs.push(state[0]);
    for i in 1..=steps {
        let k1 = field(state);
        let k2 = field([state[0] + half * k1[0], state[1] + half * k1[1]]);
        let k3 = field([state[0] + half * k2[0], state[1] + half * k2[1]]);
        let k4 = field([state[0] + h * k3[0], state[1] + h * k3[1]]);
        for c in 0..2 {
            state[c] += h / S::lit(6.0) * (k1[c] + S::lit(2.0) * (k2[c] + k3[c]) + k4[c]);
        }
        let xi = half_width - S::from_count(i) * h;
        if !(state[0].is_finite() && state[1].is_finite()) {
            return Err(WaveError::NonFiniteState { xi: xi.to_f64_lossy() });
        }
        if state[0] <= S::zero() {
            return Ok(ShootOutcome::NoConnection { reason: NoConnectionReason::LostPositivity, xi });
        }
        if state[0] > amp + tol {
            return Ok(ShootOutcome::NoConnection { reason: NoConnectionReason::Overshoot, xi });
        }
        xs.push(xi);
        vs.push(state[0]);
    }
    if *vs.last().expect("at least one sample") >= tol {
        let xi = *xs.last().expect("at least one sample");
        return Ok(ShootOutcome::NoConnection { reason: NoConnectionReason::DidNotDecay, xi });
    }
    xs.reverse();
    vs.reverse();
    Ok(ShootOutcome::Connected(WaveProfile { xi: xs, v: vs, eta }))
}

/// Outcome of the speed bound `η² ≥ 4a/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBoundCheck<S> {
    pub margin: S,
    pub pass: bool,
}

pub fn check_speed_bound<S: Scalar>(eta: S, pde: &PdeParams<S>, tol: S) -> SpeedBoundCheck<S> {
    let margin = eta * eta - S::lit(4.0) / S::lit(3.0) * pde.a();
    SpeedBoundCheck { margin, pass: margin >= -tol }
}

/// Outcome of the gradient bound `|v'| ≤ v|η|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientBoundCheck<S> {
    pub max_ratio: S,
    pub at_xi: S,
    pub pass: bool,
}

/// Maximum of `|v'| / (v|η|)` over interior samples (central differences).
pub fn check_gradient_bound<S: Scalar>(profile: &WaveProfile<S>, tol: S) -> GradientBoundCheck<S> {
    let v = &profile.v;
    let h = profile.spacing();
    let speed = profile.eta.abs();
    let mut best = (S::zero(), profile.xi.first().copied().unwrap_or_else(S::zero));
    for i in 1..v.len().saturating_sub(1) {
        let dv = ((v[i + 1] - v[i - 1]) / (S::lit(2.0) * h)).abs();
        let ratio = if dv == S::zero() { S::zero() } else { dv / (v[i] * speed) };
        if ratio > best.0 {
            best = (ratio, profile.xi[i]);
        }
    }
    GradientBoundCheck { max_ratio: best.0, at_xi: best.1, pass: best.0 <= S::one() + tol }
}

/// Positions of upward and downward level crossings of a periodic 1D field.
fn crossings<S: Scalar>(f: &Field<S>, level: S) -> (Vec<S>, Vec<S>) {
    let v = f.values();
    let n = v.len();
    let h = f.grid().spacing();
    let (mut up, mut down) = (Vec::new(), Vec::new());
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let x = (S::from_count(i) + (level - a) / (b - a)) * h;
        if a < level && b >= level {
            up.push(x);
        } else if a >= level && b < level {
            down.push(x);
        }
    }
    (up, down)
}

/// Front track used for the speed fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrack<S> {
    pub times: Vec<S>,
    /// Unwrapped positions of the upward level crossing.
    pub positions: Vec<S>,
    /// Least-squares slope of position against time (signed).
    pub speed: S,
}

/// Tracks the upward crossing of `level` over the final half of the
/// snapshots and fits its velocity. The tracked interface must stay at least
/// `L/10` away from any downward crossing.
pub fn measure_front_speed<S: Scalar>(traj: &Trajectory<S>, level: S) -> Result<FrontTrack<S>, WaveError> {
    let grid = traj.config.grid;
    if grid.dim() != 1 {
        return Err(WaveError::InvalidInput("front tracking needs a 1D trajectory".into()));
    }
    let eq = traj.config.pde.equilibrium();
    if !(level > S::zero() && level < eq) {
        return Err(WaveError::InvalidInput(format!("level must lie in (0, {eq})")));
    }
    let count = traj.snapshots.len();
    if count < 4 {
        return Err(WaveError::InvalidInput("need at least four snapshots".into()));
    }
    let window = &traj.snapshots[count / 2..];
    let l = grid.extent();
    let guard = l / S::lit(10.0);
    let mut times = Vec::with_capacity(window.len());
    let mut positions: Vec<S> = Vec::with_capacity(window.len());
    for snap in window {
        let t = snap.time();
        let (up, down) = crossings(snap, level);
        if up.is_empty() {
            return Err(WaveError::LevelNotCrossed { level: level.to_f64_lossy(), t: t.to_f64_lossy() });
        }
        let x = match positions.last() {
            None => up[0],
            Some(&prev) => {
                let wrapped = prev - (prev / l).floor() * l;
                *up.iter()
                    .min_by(|&&p, &&q| {
                        grid.min_image(wrapped, p).abs().partial_cmp(&grid.min_image(wrapped, q).abs()).unwrap()
                    })
                    .expect("non-empty")
            }
        };
        if let Some(gap) = down.iter().map(|&d| grid.min_image(x, d).abs()).reduce(S::min) {
            if gap < guard {
                return Err(WaveError::FrontHitBoundaryWindow { t: t.to_f64_lossy(), gap: gap.to_f64_lossy() });
            }
        }
        let unwrapped = match positions.last() {
            None => x,
            Some(&prev) => {
                let wrapped = prev - (prev / l).floor() * l;
                prev + grid.min_image(wrapped, x)
            }
        };
        times.push(t);
        positions.push(unwrapped);
    }
    let speed = ls_slope(&times, &positions);
    Ok(FrontTrack { times, positions, speed })
}
