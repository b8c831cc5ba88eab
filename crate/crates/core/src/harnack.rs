//! The Harnack quantity `H = αΔl + β|∇l|² + γe^{2l} + gauge(t)`, `l = log f`,
//! evaluated on simulated solutions, together with discrete checks of the
//! evolution identities it satisfies and of the two-point (classical)
//! Harnack inequality obtained by integrating it along space-time lines.
//!
//! The gauge depends on time only, so every `Δgauge` and `∇gauge` term is
//! identically zero here. In the `□ = ∂_t − Δ` checks the gauge contributes
//! through its analytic derivative; only the spatial part of `H` is
//! differenced in time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{Field, FieldError, Grid};
use crate::gauge::{GaugeError, TimeGauge};
use crate::params::{HarnackParams, PdeParams};
use crate::scalar::{ln_expm1, Scalar};
use crate::solver::{pde_rhs, Trajectory};

#[derive(Debug, Error)]
pub enum HarnackError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error("snapshot index {index} needs neighbours in time (have {len} snapshots)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("need 0 < t1 < t2, got t1 = {t1}, t2 = {t2}")]
    BadTimeOrder { t1: f64, t2: f64 },
    #[error("query {id} is not on a grid node / snapshot time: {what}")]
    QueryOffGrid { id: usize, what: String },
    #[error("parameter dimension n = {n} is smaller than the grid dimension {dim}")]
    DimensionMismatch { n: u32, dim: usize },
}

/// Nodewise values of `H` on one snapshot.
#[derive(Debug, Clone)]
pub struct HarnackField<S> {
    pub values: Field<S>,
    pub gauge: S,
}

impl<S: Scalar> HarnackField<S> {
    pub fn time(&self) -> S {
        self.values.time()
    }

    pub fn min(&self) -> (S, usize) {
        self.values.min_with_node()
    }
}

fn check_dimension<S: Scalar>(params: &HarnackParams<S>, grid: &Grid<S>) -> Result<(), HarnackError> {
    let n = params.pde().n();
    if (n as usize) < grid.dim() {
        return Err(HarnackError::DimensionMismatch { n, dim: grid.dim() });
    }
    Ok(())
}

/// Discrete pieces of `l = log f` reused by several checks.
struct LogParts<S> {
    l: Field<S>,
    lap: Field<S>,
    grad_sq: Field<S>,
    /// `e^{2l}`, evaluated as `f²`.
    exp2: Field<S>,
}

impl<S: Scalar> LogParts<S> {
    fn new(f: &Field<S>) -> Result<Self, FieldError> {
        let l = f.log_field()?;
        Ok(Self { lap: l.laplacian(), grad_sq: l.gradient_sq(), exp2: f.map(|v| v * v), l })
    }

    /// `αΔl + β|∇l|² + γe^{2l}`.
    fn spatial_h(&self, p: &HarnackParams<S>) -> Field<S> {
        let (alpha, beta, gamma) = (p.alpha(), p.beta(), p.gamma());
        let vals = self
            .lap
            .values()
            .iter()
            .zip(self.grad_sq.values())
            .zip(self.exp2.values())
            .map(|((&d, &g), &e)| alpha * d + beta * g + gamma * e)
            .collect();
        Field::new(*self.l.grid(), self.l.time(), vals).expect("same grid")
    }
}

/// `H` at every node of `f`, at the snapshot's own time.
pub fn harnack_field<S: Scalar>(f: &Field<S>, gauge: &TimeGauge<S>) -> Result<HarnackField<S>, HarnackError> {
    check_dimension(gauge.params(), f.grid())?;
    let g = gauge.evaluate(f.time())?;
    let parts = LogParts::new(f)?;
    let values = parts.spatial_h(gauge.params()).map(|h| h + g);
    Ok(HarnackField { values, gauge: g })
}

/// `α f_t/f − αa + (β−α)|∇f|²/f² + (γ+αb)f² + gauge(t)` with `f_t` taken as
/// the discrete right-hand side of the equation. Agrees with
/// [`harnack_field`] up to `O(h²)`.
pub fn harnack_field_fform<S: Scalar>(f: &Field<S>, gauge: &TimeGauge<S>) -> Result<HarnackField<S>, HarnackError> {
    let p = gauge.params();
    check_dimension(p, f.grid())?;
    f.check_positive()?;
    let g = gauge.evaluate(f.time())?;
    let pde = p.pde();
    let ft = pde_rhs(f, pde);
    let grad_sq = f.gradient_sq();
    let (alpha, beta, gamma) = (p.alpha(), p.beta(), p.gamma());
    let vals = f
        .values()
        .iter()
        .zip(ft.values())
        .zip(grad_sq.values())
        .map(|((&v, &vt), &gs)| {
            alpha * vt / v - alpha * pde.a() + (beta - alpha) * gs / (v * v) + (gamma + alpha * pde.b()) * v * v + g
        })
        .collect();
    Ok(HarnackField { values: Field::new(*f.grid(), f.time(), vals)?, gauge: g })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRecord<S> {
    pub time: S,
    pub min_h: S,
    pub argmin: usize,
    pub gauge: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation<S> {
    pub time: S,
    pub node: usize,
    pub value: S,
}

/// Per-snapshot minima of `H` and every node where `H < −tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnackReport<S> {
    pub records: Vec<SnapshotRecord<S>>,
    pub violations: Vec<Violation<S>>,
    pub tolerance: S,
}

impl<S: Scalar> HarnackReport<S> {
    /// Smallest `H` over all certified snapshots.
    pub fn min_h(&self) -> S {
        self.records.iter().map(|r| r.min_h).fold(S::infinity(), S::min)
    }

    /// `max(0, −min H)`.
    pub fn worst_negative_excursion(&self) -> S {
        (-self.min_h()).max(S::zero())
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates `H` on every snapshot with `t ≥ t_min` and records violations.
pub fn certify<S: Scalar>(
    traj: &Trajectory<S>,
    gauge: &TimeGauge<S>,
    t_min: S,
    tolerance: S,
) -> Result<HarnackReport<S>, HarnackError> {
    let cutoff = t_min * (S::one() - S::lit(1e-9));
    let mut records = Vec::new();
    let mut violations = Vec::new();
    for snap in traj.snapshots.iter().filter(|s| s.time() >= cutoff && s.time() > S::zero()) {
        let h = harnack_field(snap, gauge)?;
        let (min_h, argmin) = h.min();
        records.push(SnapshotRecord { time: snap.time(), min_h, argmin, gauge: h.gauge });
        for (node, &value) in h.values.values().iter().enumerate() {
            if value < -tolerance {
                violations.push(Violation { time: snap.time(), node, value });
            }
        }
    }
    Ok(HarnackReport { records, violations, tolerance })
}

/// Residual (left minus right side) of one evolution identity, with its
/// right-hand side for scale.
#[derive(Debug, Clone)]
pub struct IdentityResidual<S> {
    pub residual: Field<S>,
    pub rhs: Field<S>,
}

impl<S: Scalar> IdentityResidual<S> {
    fn new(lhs: Field<S>, rhs: Field<S>) -> Self {
        Self { residual: lhs.zip_map(&rhs, |x, y| x - y), rhs }
    }

    /// `‖residual‖_∞ / ‖rhs‖_∞`.
    pub fn relative(&self) -> S {
        self.residual.max_abs() / self.rhs.max_abs()
    }
}

/// Residuals of the evolution identities for `Δl`, `|∇l|²` and `e^{2l}`.
#[derive(Debug, Clone)]
pub struct EvolutionResiduals<S> {
    pub laplacian_log: IdentityResidual<S>,
    pub gradient_sq: IdentityResidual<S>,
    pub exp_two_log: IdentityResidual<S>,
}

fn neighbours<S: Scalar>(traj: &Trajectory<S>, index: usize) -> Result<[&Field<S>; 3], HarnackError> {
    let len = traj.snapshots.len();
    if index == 0 || index + 1 >= len {
        return Err(HarnackError::IndexOutOfRange { index, len });
    }
    Ok([&traj.snapshots[index - 1], &traj.snapshots[index], &traj.snapshots[index + 1]])
}

/// `(q₊ − q₋)/(t₊ − t₋) − Δq₀`.
fn box_op<S: Scalar>(prev: &Field<S>, mid: &Field<S>, next: &Field<S>, span: S) -> Field<S> {
    let lap = mid.laplacian();
    let vals = prev
        .values()
        .iter()
        .zip(next.values())
        .zip(lap.values())
        .map(|((&p, &n), &d)| (n - p) / span - d)
        .collect();
    Field::new(*mid.grid(), mid.time(), vals).expect("same grid")
}

pub fn evolution_residuals<S: Scalar>(traj: &Trajectory<S>, index: usize) -> Result<EvolutionResiduals<S>, HarnackError> {
    let [prev, mid, next] = neighbours(traj, index)?;
    let pde = traj.config.pde;
    let span = next.time() - prev.time();
    let [pp, pm, pn] = [LogParts::new(prev)?, LogParts::new(mid)?, LogParts::new(next)?];
    let (a, b) = (pde.a(), pde.b());
    let two = S::lit(2.0);
    let four = S::lit(4.0);

    let lap_grad_sq = pm.grad_sq.laplacian();
    let g = pm.grad_sq.values();
    let e = pm.exp2.values();

    // □(Δl) = Δ|∇l|² − 2bΔl e^{2l} − 4b|∇l|² e^{2l}
    let lhs = box_op(&pp.lap, &pm.lap, &pn.lap, span);
    let rhs: Vec<S> = (0..g.len())
        .map(|i| lap_grad_sq.values()[i] - two * b * pm.lap.values()[i] * e[i] - four * b * g[i] * e[i])
        .collect();
    let laplacian_log = IdentityResidual::new(lhs, mid.clone().with_values(rhs));

    // □|∇l|² = 2∇l·∇Δl + 2∇l·∇|∇l|² − 4b|∇l|²e^{2l} − Δ|∇l|²
    let lhs = box_op(&pp.grad_sq, &pm.grad_sq, &pn.grad_sq, span);
    let t1 = pm.l.grad_dot(&pm.lap);
    let t2 = pm.l.grad_dot(&pm.grad_sq);
    let rhs: Vec<S> = (0..g.len())
        .map(|i| two * t1.values()[i] + two * t2.values()[i] - four * b * g[i] * e[i] - lap_grad_sq.values()[i])
        .collect();
    let gradient_sq = IdentityResidual::new(lhs, mid.clone().with_values(rhs));

    // □e^{2l} = 2∇l·∇e^{2l} + 2ae^{2l} − 2be^{4l} − 6|∇l|²e^{2l}
    let lhs = box_op(&pp.exp2, &pm.exp2, &pn.exp2, span);
    let t1 = pm.l.grad_dot(&pm.exp2);
    let rhs: Vec<S> = (0..g.len())
        .map(|i| two * t1.values()[i] + two * a * e[i] - two * b * e[i] * e[i] - S::lit(6.0) * g[i] * e[i])
        .collect();
    let exp_two_log = IdentityResidual::new(lhs, mid.clone().with_values(rhs));

    Ok(EvolutionResiduals { laplacian_log, gradient_sq, exp_two_log })
}

/// Identity residual of the evolution equation for `H` and the slack of the
/// lower bound obtained from `|∇∇l|² ≥ (Δl)²/n`.
#[derive(Debug, Clone)]
pub struct LemmaResiduals<S> {
    pub identity: IdentityResidual<S>,
    /// `□H` minus the lower bound; nonnegative in the continuum.
    pub slack: Field<S>,
}

pub fn lemma_residuals<S: Scalar>(
    traj: &Trajectory<S>,
    index: usize,
    gauge: &TimeGauge<S>,
) -> Result<LemmaResiduals<S>, HarnackError> {
    let [prev, mid, next] = neighbours(traj, index)?;
    let p = gauge.params();
    check_dimension(p, mid.grid())?;
    let pde = p.pde();
    let span = next.time() - prev.time();
    let t = mid.time();
    let g = gauge.evaluate(t)?;
    let dg = gauge.derivative(t)?;
    let [pp, pm, pn] = [LogParts::new(prev)?, LogParts::new(mid)?, LogParts::new(next)?];
    let [hp, hm, hn] = [pp.spatial_h(p), pm.spatial_h(p), pn.spatial_h(p)];
    let box_h = box_op(&hp, &hm, &hn, span).map(|v| v + dg);

    let (alpha, beta, gamma) = (p.alpha(), p.beta(), p.gamma());
    let (a, b) = (pde.a(), pde.b());
    let two = S::lit(2.0);
    let (three, four) = (S::lit(3.0), S::lit(4.0));
    let c = (alpha - beta) / (pde.n_scalar() * alpha * alpha);
    let transport = pm.l.grad_dot(&hm);
    let hess = pm.l.hessian_sq();

    let n_nodes = hm.values().len();
    let mut rhs_identity = Vec::with_capacity(n_nodes);
    let mut rhs_bound = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let h = hm.values()[i] + g;
        let gs = pm.grad_sq.values()[i];
        let e = pm.exp2.values()[i];
        let tr = two * transport.values()[i];
        let bracket = (h - g) + two * alpha * gs + beta * gs - gamma * a / b + three * gamma / b * gs;
        rhs_identity.push(tr + two * (alpha - beta) * hess.values()[i] + dg - two * b * e * bracket);

        let bound = tr
            + h * (two * c * (h - two * beta * gs - two * gamma * e - two * g) - two * b * e)
            + dg
            + two * gs * e * (two * c * beta * gamma - two * alpha * b - beta * b - three * gamma)
            + gs * g * (four * c * beta)
            + e * (four * c * gamma * g + two * b * g + two * a * gamma)
            + two * c * (beta * beta * gs * gs + gamma * gamma * e * e + g * g);
        rhs_bound.push(bound);
    }
    let identity = IdentityResidual::new(box_h.clone(), mid.clone().with_values(rhs_identity));
    let bound = mid.clone().with_values(rhs_bound);
    let slack = box_h.zip_map(&bound, |x, y| x - y);
    Ok(LemmaResiduals { identity, slack })
}

/// Two space-time points `(x1, t1)`, `(x2, t2)` with `0 < t1 < t2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalQuery<S> {
    pub x1: [S; 2],
    pub x2: [S; 2],
    pub t1: S,
    pub t2: S,
}

impl<S: Scalar> ClassicalQuery<S> {
    fn check_times(&self) -> Result<(), HarnackError> {
        if self.t1 > S::zero() && self.t2 > self.t1 {
            Ok(())
        } else {
            Err(HarnackError::BadTimeOrder { t1: self.t1.to_f64_lossy(), t2: self.t2.to_f64_lossy() })
        }
    }
}

/// Logarithm of the two-point lower bound on `f(x2,t2)/f(x1,t1)` in dimension `n`:
/// `−d²/(4Δt) + a(1 + n/3)Δt + (2n/3) ln((e^{2at1} − 1)/(e^{2at2} − 1))`.
pub fn classical_log_bound<S: Scalar>(dist_sq: S, t1: S, t2: S, a: S, n: S) -> Result<S, HarnackError> {
    if !(t1 > S::zero() && t2 > t1) {
        return Err(HarnackError::BadTimeOrder { t1: t1.to_f64_lossy(), t2: t2.to_f64_lossy() });
    }
    let dt = t2 - t1;
    let two = S::lit(2.0);
    let three = S::lit(3.0);
    let ratio = ln_expm1(two * a * t1) - ln_expm1(two * a * t2);
    Ok(-dist_sq / (S::lit(4.0) * dt) + a * (S::one() + n / three) * dt + two * n / three * ratio)
}

/// Two-point bound with minimal-image distance on `grid` and `n = grid.dim()`.
pub fn classical_bound<S: Scalar>(q: &ClassicalQuery<S>, pde: &PdeParams<S>, grid: &Grid<S>) -> Result<S, HarnackError> {
    q.check_times()?;
    let d2 = grid.distance_sq(&q.x1, &q.x2);
    Ok(classical_log_bound(d2, q.t1, q.t2, pde.a(), S::from_count(grid.dim()))?.exp())
}

/// The same bound from composite Simpson quadrature of
/// `−¼(dx/dt)² + a − φ/α` along the straight line between the two points,
/// where `φ/α = an(e^{2at} + 1/3)/(e^{2at} − 1)`.
pub fn path_bound_numeric<S: Scalar>(
    q: &ClassicalQuery<S>,
    pde: &PdeParams<S>,
    grid: &Grid<S>,
    steps: usize,
) -> Result<S, HarnackError> {
    q.check_times()?;
    let steps = steps.max(10);
    let steps = steps + steps % 2;
    let a = pde.a();
    let n = S::from_count(grid.dim());
    let dt = q.t2 - q.t1;
    let speed_sq = grid.distance_sq(&q.x1, &q.x2) / (dt * dt);
    let quarter = S::lit(0.25);
    let four_thirds = S::lit(4.0) / S::lit(3.0);
    let integrand = |t: S| {
        let gauge_over_alpha = a * n * (S::one() + four_thirds / (S::lit(2.0) * a * t).exp_m1());
        -quarter * speed_sq + a - gauge_over_alpha
    };
    let h = dt / S::from_count(steps);
    let mut sum = integrand(q.t1) + integrand(q.t2);
    for k in 1..steps {
        let w = if k % 2 == 1 { S::lit(4.0) } else { S::lit(2.0) };
        sum += w * integrand(q.t1 + S::from_count(k) * h);
    }
    Ok((sum * h / S::lit(3.0)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRecord<S> {
    pub id: usize,
    pub log_ratio: S,
    pub log_bound: S,
    /// `log_ratio − log_bound`.
    pub slack: S,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalReport<S> {
    pub records: Vec<ClassicalRecord<S>>,
    pub tolerance: S,
}

impl<S: Scalar> ClassicalReport<S> {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.pass).count()
    }

    pub fn min_slack(&self) -> S {
        self.records.iter().map(|r| r.slack).fold(S::infinity(), S::min)
    }
}

/// Compares `log f(x2,t2) − log f(x1,t1)` with the two-point bound for
/// queries placed on grid nodes and snapshot times.
pub fn classical_check<S: Scalar>(
    traj: &Trajectory<S>,
    queries: &[ClassicalQuery<S>],
    tolerance: S,
) -> Result<ClassicalReport<S>, HarnackError> {
    let grid = traj.config.grid;
    let pde = traj.config.pde;
    let node_tol = S::lit(1e-9);
    let mut records = Vec::with_capacity(queries.len());
    for (id, q) in queries.iter().enumerate() {
        q.check_times()?;
        let locate = |x: &[S; 2], t: S, label: &str| -> Result<(usize, usize), HarnackError> {
            let node = grid
                .node_at(x, node_tol)
                .ok_or_else(|| HarnackError::QueryOffGrid { id, what: format!("{label} is not a grid node") })?;
            let snap = traj
                .snapshot_at(t, node_tol)
                .ok_or_else(|| HarnackError::QueryOffGrid { id, what: format!("{label} time is not a snapshot") })?;
            Ok((snap, node))
        };
        let (s1, n1) = locate(&q.x1, q.t1, "x1")?;
        let (s2, n2) = locate(&q.x2, q.t2, "x2")?;
        let f1 = traj.snapshots[s1].values()[n1];
        let f2 = traj.snapshots[s2].values()[n2];
        let log_ratio = f2.ln() - f1.ln();
        let d2 = grid.distance_sq(&q.x1, &q.x2);
        let log_bound = classical_log_bound(d2, q.t1, q.t2, pde.a(), S::from_count(grid.dim()))?;
        let slack = log_ratio - log_bound;
        records.push(ClassicalRecord { id, log_ratio, log_bound, slack, pass: slack >= -tolerance });
    }
    Ok(ClassicalReport { records, tolerance })
}

/// Seeded random queries on grid nodes and snapshot times with
/// `t1 ≥ t_min` and `t2 − t1 ≥ min_gap`.
pub fn random_queries<S: Scalar>(
    traj: &Trajectory<S>,
    count: usize,
    t_min: S,
    min_gap: S,
    seed: u64,
) -> Vec<ClassicalQuery<S>> {
    let grid = traj.config.grid;
    let times = traj.times();
    let cutoff = t_min * (S::one() - S::lit(1e-9));
    let eligible: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= cutoff && times[i] > S::zero()).collect();
    let mut pairs = Vec::new();
    for (k, &i) in eligible.iter().enumerate() {
        for &j in &eligible[k + 1..] {
            if times[j] - times[i] >= min_gap * (S::one() - S::lit(1e-9)) {
                pairs.push((i, j));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if pairs.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let (i, j) = pairs[rng.gen_range(0..pairs.len())];
            let n1 = rng.gen_range(0..grid.len());
            let n2 = rng.gen_range(0..grid.len());
            ClassicalQuery { x1: grid.coords(n1), x2: grid.coords(n2), t1: times[i], t2: times[j] }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PdeParams;
    use crate::solver::{evolve, InitialCondition, SolverConfig};
    use approx::assert_relative_eq;

    fn unit_pde() -> PdeParams<f64> {
        PdeParams::new(1.0, 1.0, 1).unwrap()
    }

    fn gauge(alpha: f64, beta: f64, gamma: f64) -> TimeGauge<f64> {
        TimeGauge::new(HarnackParams::validate(alpha, beta, gamma, unit_pde()).unwrap())
    }

    #[test]
    fn constant_field_values() {
        let g = gauge(1.0, 0.0, -1.0);
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let t = 0.5 * 3f64.ln();
        let f = Field::constant(grid, t, 1.0);
        let h = harnack_field(&f, &g).unwrap();
        for &v in h.values.values() {
            assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-14);
        }
        let hf = harnack_field_fform(&f, &g).unwrap();
        for (&x, &y) in h.values.values().iter().zip(hf.values.values()) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
        let late = harnack_field(&f.clone().with_time(40.0), &g).unwrap();
        assert!(late.values.max_abs() < 1e-15);
    }

    #[test]
    fn zero_time_is_rejected() {
        let g = gauge(1.0, 0.0, -1.0);
        let f = Field::constant(Grid::new(1, 16, 10.0).unwrap(), 0.0, 1.0);
        assert!(matches!(harnack_field(&f, &g), Err(HarnackError::Gauge(_))));
    }

    #[test]
    fn forms_agree_on_analytic_data_to_second_order() {
        // f = 2 + sin x on a 2π torus.
        let g = gauge(1.0, 0.3, -1.5);
        let diff = |n: usize| {
            let grid = Grid::new(1, n, 2.0 * std::f64::consts::PI).unwrap();
            let f = Field::from_fn(grid, 1.0, |x| 2.0 + x[0].sin());
            let a = harnack_field(&f, &g).unwrap();
            let b = harnack_field_fform(&f, &g).unwrap();
            a.values.zip_map(&b.values, |x, y| x - y).max_abs()
        };
        let order = crate::scalar::observed_order(diff(64), diff(128), 2.0);
        assert!((1.9..2.1).contains(&order), "order {order}");
    }

    #[test]
    fn forms_agree_with_analytic_derivatives() {
        // u = 2 + sin x at x = 0.7, with f_t from the equation.
        let (a, b) = (1.0, 1.0);
        let (alpha, beta, gamma) = (1.0, 0.3, -1.5);
        let x: f64 = 0.7;
        let u = 2.0 + x.sin();
        let (ux, uxx) = (x.cos(), -x.sin());
        let ut = uxx + a * u - b * u.powi(3);
        let lxx = uxx / u - (ux / u).powi(2);
        let l_form = alpha * lxx + beta * (ux / u).powi(2) + gamma * u * u;
        let f_form = alpha * ut / u - alpha * a + (beta - alpha) * (ux / u).powi(2) + (gamma + alpha * b) * u * u;
        assert_relative_eq!(l_form, f_form, max_relative = 1e-14);
    }

    fn equilibrium_trajectory() -> Trajectory<f64> {
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let cfg = SolverConfig::new(unit_pde(), grid, InitialCondition::Equilibrium, 2.0).with_snapshot_interval(0.1);
        evolve(&cfg).unwrap()
    }

    #[test]
    fn equilibrium_certifies_with_decreasing_minimum() {
        let traj = equilibrium_trajectory();
        for g in [gauge(1.0, 0.0, -1.0), gauge(1.0, 0.9, -2.0)] {
            let rep = certify(&traj, &g, 0.05, 5e-3).unwrap();
            assert!(rep.passed());
            assert_eq!(rep.records.len(), 20);
            for r in &rep.records {
                let expected = g.params().gamma() + g.evaluate(r.time).unwrap();
                assert_relative_eq!(r.min_h, expected, max_relative = 1e-12);
                assert!(r.min_h > 0.0);
            }
            assert!(rep.records.windows(2).all(|w| w[1].min_h < w[0].min_h));
        }
    }

    #[test]
    fn equilibrium_identities_vanish() {
        let traj = equilibrium_trajectory();
        let ev = evolution_residuals(&traj, 5).unwrap();
        assert!(ev.laplacian_log.residual.max_abs() < 1e-12);
        assert!(ev.gradient_sq.residual.max_abs() < 1e-12);
        assert!(ev.exp_two_log.residual.max_abs() < 1e-12);
        let g = gauge(1.0, 0.9, -2.0);
        let lr = lemma_residuals(&traj, 5, &g).unwrap();
        assert!(lr.identity.residual.max_abs() < 1e-10);
        assert!(lr.slack.min_value() > -1e-10);
    }

    #[test]
    fn identity_endpoints_are_out_of_range() {
        let traj = equilibrium_trajectory();
        let last = traj.snapshots.len() - 1;
        assert!(matches!(evolution_residuals(&traj, 0), Err(HarnackError::IndexOutOfRange { .. })));
        assert!(matches!(evolution_residuals(&traj, last), Err(HarnackError::IndexOutOfRange { .. })));
    }

    #[test]
    fn classical_bound_examples() {
        let grid = Grid::new(1, 16, 100.0).unwrap();
        let p = unit_pde();
        let q = ClassicalQuery { x1: [3.0, 0.0], x2: [3.0, 0.0], t1: 1.0, t2: 2.0 };
        // e^{4/3} (1/(e²+1))^{2/3}, 30-digit reference
        assert_relative_eq!(classical_bound(&q, &p, &grid).unwrap(), 0.918862603779198702, max_relative = 1e-14);
        let near = ClassicalQuery { t2: 1.0 + 1e-9, ..q };
        assert_relative_eq!(classical_bound(&near, &p, &grid).unwrap(), 1.0, max_relative = 1e-7);
        let apart = ClassicalQuery { x2: [5.0, 0.0], t2: 1.0 + 1e-6, ..q };
        assert!(classical_bound(&apart, &p, &grid).unwrap() < 1e-100);
        let bad = ClassicalQuery { t1: 2.0, t2: 1.0, ..q };
        assert!(matches!(classical_bound(&bad, &p, &grid), Err(HarnackError::BadTimeOrder { .. })));
    }

    #[test]
    fn classical_bound_decreases_with_distance() {
        let grid = Grid::new(1, 64, 64.0).unwrap();
        let p = unit_pde();
        let mut prev = f64::INFINITY;
        for k in 0..=32 {
            let q = ClassicalQuery { x1: [0.0, 0.0], x2: [k as f64, 0.0], t1: 0.5, t2: 1.5 };
            let b = classical_bound(&q, &p, &grid).unwrap();
            assert!(b > 0.0 && b < prev);
            prev = b;
        }
    }

    #[test]
    fn simpson_path_integral_matches_closed_form() {
        let grid = Grid::new(1, 16, 100.0).unwrap();
        let p = unit_pde();
        let q = ClassicalQuery { x1: [3.0, 0.0], x2: [3.0, 0.0], t1: 1.0, t2: 2.0 };
        let exact = classical_bound(&q, &p, &grid).unwrap();
        assert_relative_eq!(path_bound_numeric(&q, &p, &grid, 2000).unwrap(), exact, max_relative = 1e-8);

        let moving = ClassicalQuery { x2: [7.5, 0.0], t1: 0.2, t2: 0.7, ..q };
        let exact = classical_bound(&moving, &p, &grid).unwrap();
        let err = |s: usize| (path_bound_numeric(&moving, &p, &grid, s).unwrap() / exact - 1.0).abs();
        let order = crate::scalar::observed_order(err(40), err(80), 2.0);
        assert!((3.7..4.3).contains(&order), "order {order}");

        let short = ClassicalQuery { x1: [0.0, 0.0], x2: [0.0, 0.0], t1: 1.0, t2: 1.1 };
        let exact = classical_bound(&short, &p, &grid).unwrap();
        assert_relative_eq!(path_bound_numeric(&short, &p, &grid, 10).unwrap(), exact, max_relative = 1e-4);
    }

    #[test]
    fn classical_check_on_equilibrium() {
        let traj = equilibrium_trajectory();
        let queries = random_queries(&traj, 50, 0.05, 0.1, 11);
        assert_eq!(queries.len(), 50);
        let rep = classical_check(&traj, &queries, 1e-6).unwrap();
        assert_eq!(rep.failures(), 0);
        for r in &rep.records {
            assert_eq!(r.log_ratio, 0.0);
        }
        let off = ClassicalQuery { x1: [0.3, 0.0], ..queries[0] };
        assert!(matches!(classical_check(&traj, &[off], 1e-6), Err(HarnackError::QueryOffGrid { .. })));
    }

    #[test]
    fn dimension_guard() {
        let p2 = PdeParams::new(1.0, 1.0, 1).unwrap();
        let g = TimeGauge::new(HarnackParams::validate(1.0, 0.0, -1.0, p2).unwrap());
        let f = Field::constant(Grid::new(2, 8, 1.0).unwrap(), 1.0, 1.0);
        assert!(matches!(harnack_field(&f, &g), Err(HarnackError::DimensionMismatch { .. })));
    }
}
