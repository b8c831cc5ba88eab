//! Time gauges added to the Harnack quantity.
//!
//! Branch C uses a single closed form φ(t); branch D uses ψ(t), equal to
//! `1/(w t)` (with `w = 2(α−β)/(nα²)`) up to the switch time `T` and to a
//! Riccati solution afterwards. Both blow up at `t = 0⁺` and decay to
//! `−aγ/b` as `t → ∞`.
//!
//! Every formula is written in terms of `e^{−2at}` so evaluation never
//! overflows, whatever the horizon.

use thiserror::Error;

use crate::params::{Branch, GaugeConstants, HarnackParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaugeError {
    #[error("gauge evaluated at non-positive time t = {0}")]
    NonPositiveTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    Phi,
    Psi,
}

/// The time-dependent gauge of a validated parameter set.
#[derive(Debug, Clone, Copy)]
pub struct TimeGauge<S> {
    params: HarnackParams<S>,
    constants: GaugeConstants<S>,
    kind: GaugeKind,
    switch_time: Option<S>,
}

impl<S: Scalar> TimeGauge<S> {
    pub fn new(params: HarnackParams<S>) -> Self {
        let (kind, switch_time) = match params.branch() {
            Branch::C => (GaugeKind::Phi, None),
            Branch::D => (GaugeKind::Psi, params.switch_time().ok()),
        };
        Self { params, constants: params.gauge_constants(), kind, switch_time }
    }

    pub fn params(&self) -> &HarnackParams<S> {
        &self.params
    }

    pub fn constants(&self) -> GaugeConstants<S> {
        self.constants
    }

    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    pub fn switch_time(&self) -> Option<S> {
        self.switch_time
    }

    fn check_time(t: S) -> Result<(), GaugeError> {
        if t > S::zero() && t.is_finite() {
            Ok(())
        } else {
            Err(GaugeError::NonPositiveTime(t.to_f64_lossy()))
        }
    }

    fn on_inner_segment(&self, t: S) -> bool {
        matches!(self.switch_time, Some(ts) if t <= ts)
    }

    pub fn evaluate(&self, t: S) -> Result<S, GaugeError> {
        Self::check_time(t)?;
        Ok(match self.kind {
            GaugeKind::Phi => self.phi(t),
            GaugeKind::Psi if self.on_inner_segment(t) => self.psi_inner(t),
            GaugeKind::Psi => self.psi_outer(t),
        })
    }

    /// Time derivative of the active segment. At the switch time both
    /// segments share value and slope; the inner formula is used.
    pub fn derivative(&self, t: S) -> Result<S, GaugeError> {
        Self::check_time(t)?;
        Ok(match self.kind {
            GaugeKind::Phi => self.phi_derivative(t),
            GaugeKind::Psi if self.on_inner_segment(t) => self.psi_inner_derivative(t),
            GaugeKind::Psi => self.psi_outer_derivative(t),
        })
    }

    pub fn second_derivative(&self, t: S) -> Result<S, GaugeError> {
        Self::check_time(t)?;
        Ok(match self.kind {
            GaugeKind::Phi => self.phi_second_derivative(t),
            GaugeKind::Psi if self.on_inner_segment(t) => self.psi_inner_second_derivative(t),
            GaugeKind::Psi => self.psi_outer_second_derivative(t),
        })
    }

    /// `−aγ/b`, the common large-time limit of both gauges.
    pub fn limit_at_infinity(&self) -> S {
        let pde = self.params.pde();
        -pde.a() * self.params.gamma() / pde.b()
    }

    /// Residual of the ODE the active segment solves exactly:
    /// `(ωg)² − (μ+νg)² + g'` for φ and for ψ past the switch time,
    /// `w g² + g'` for ψ up to it.
    pub fn ode_residual(&self, t: S) -> Result<S, GaugeError> {
        let g = self.evaluate(t)?;
        let dg = self.derivative(t)?;
        if self.kind == GaugeKind::Psi && self.on_inner_segment(t) {
            Ok(self.params.curvature_weight() * g * g + dg)
        } else {
            Ok(self.riccati_residual(g, dg))
        }
    }

    /// `(ωg)² − (μ+νg)² + g'` for an arbitrary value/slope pair.
    pub fn riccati_residual(&self, g: S, dg: S) -> S {
        let GaugeConstants { omega, mu, nu } = self.constants;
        let og = omega * g;
        let m = mu + nu * g;
        og * og - m * m + dg
    }

    // φ = aα (g₀ − c E) / (E − 1), E = e^{−2at}, g₀ = γ/(αb),
    // c = αγn / (4γ(α−β) + α²bn).
    fn phi_coefficients(&self) -> (S, S) {
        let p = &self.params;
        let g0 = p.gamma() / (p.alpha() * p.pde().b());
        let c = p.alpha() * p.gamma() * p.pde().n_scalar() / p.branch_quantity();
        (g0, c)
    }

    /// φ in the `(a, α, β, γ, b, n)` parametrisation.
    pub fn phi(&self, t: S) -> S {
        let a = self.params.pde().a();
        let (g0, c) = self.phi_coefficients();
        let x = -S::lit(2.0) * a * t;
        a * self.params.alpha() * (g0 - c * x.exp()) / x.exp_m1()
    }

    /// φ in the `(μ, ω, ν)` parametrisation; agrees with [`Self::phi`].
    pub fn phi_rate_form(&self, t: S) -> S {
        let GaugeConstants { omega, mu, nu } = self.constants;
        let x = -S::lit(2.0) * mu * omega * t;
        mu * (S::one() / (nu - omega) - x.exp() / (nu + omega)) / x.exp_m1()
    }

    pub fn phi_derivative(&self, t: S) -> S {
        let a = self.params.pde().a();
        let (g0, c) = self.phi_coefficients();
        let x = -S::lit(2.0) * a * t;
        let em1 = x.exp_m1();
        S::lit(2.0) * a * a * self.params.alpha() * (g0 - c) * x.exp() / (em1 * em1)
    }

    pub fn phi_second_derivative(&self, t: S) -> S {
        let a = self.params.pde().a();
        let (g0, c) = self.phi_coefficients();
        let x = -S::lit(2.0) * a * t;
        let e = x.exp();
        let em1 = x.exp_m1();
        S::lit(4.0) * a * a * a * self.params.alpha() * (g0 - c) * e * (S::one() + e)
            / (em1 * em1 * em1)
    }

    /// Inner segment `nα² / (2(α−β) t)`, defined for any `t > 0`.
    pub fn psi_inner(&self, t: S) -> S {
        S::one() / (self.params.curvature_weight() * t)
    }

    pub fn psi_inner_derivative(&self, t: S) -> S {
        -S::one() / (self.params.curvature_weight() * t * t)
    }

    pub fn psi_inner_second_derivative(&self, t: S) -> S {
        S::lit(2.0) / (self.params.curvature_weight() * t * t * t)
    }

    // ψ₂ = P(1+G) / (Q(1+G) + RG), G = e^{−2a(t−T)},
    // P = −anα²γ, Q = nα²b, R = 4γ(α−β).
    fn psi_outer_parts(&self, t: S) -> (S, S, S, S, S) {
        let p = &self.params;
        let pde = p.pde();
        let na2 = pde.n_scalar() * p.alpha() * p.alpha();
        let big_p = -pde.a() * na2 * p.gamma();
        let q = na2 * pde.b();
        let r = S::lit(4.0) * p.gamma() * (p.alpha() - p.beta());
        let ts = self.switch_time.unwrap_or_else(S::zero);
        let g = (-S::lit(2.0) * pde.a() * (t - ts)).exp();
        let d = q * (S::one() + g) + r * g;
        (big_p, q, r, g, d)
    }

    /// Outer segment (the Riccati solution through the switch point), any `t > 0`.
    pub fn psi_outer(&self, t: S) -> S {
        let (p, _, _, g, d) = self.psi_outer_parts(t);
        p * (S::one() + g) / d
    }

    /// Outer segment in the `(μ, ω, ν)` parametrisation.
    pub fn psi_outer_rate_form(&self, t: S) -> S {
        let GaugeConstants { omega, mu, nu } = self.constants;
        let ts = self.switch_time.unwrap_or_else(S::zero);
        let g = (-S::lit(2.0) * mu * omega * (t - ts)).exp();
        -mu * (S::one() + g) / ((nu - omega) + (nu + omega) * g)
    }

    pub fn psi_outer_derivative(&self, t: S) -> S {
        let a = self.params.pde().a();
        let (p, _, r, g, d) = self.psi_outer_parts(t);
        S::lit(2.0) * a * p * r * g / (d * d)
    }

    pub fn psi_outer_second_derivative(&self, t: S) -> S {
        let a = self.params.pde().a();
        let (p, q, r, g, d) = self.psi_outer_parts(t);
        -S::lit(4.0) * a * a * p * r * g * (q - g * (q + r)) / (d * d * d)
    }
}
