//! Equation constants and Harnack coefficients.
//!
//! [`PdeParams`] carries the constants of `f_t = Δf + a f − b f³`;
//! [`HarnackParams`] adds the coefficients `(α, β, γ)` of the Harnack quantity
//! `H = αΔl + β|∇l|² + γe^{2l} + gauge(t)` and records which admissible
//! regime the triple falls into.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),
    #[error("invalid equation constants: {0}")]
    InvalidPde(String),
    #[error("condition (a) violated: need alpha > beta >= 0, got alpha = {alpha}, beta = {beta}")]
    ConditionAViolated { alpha: f64, beta: f64 },
    #[error("condition (b) violated: need gamma <= {bound} (< 0), got gamma = {gamma}")]
    ConditionBViolated { gamma: f64, bound: f64 },
    #[error("switch time only exists in branch D")]
    WrongBranch,
}

/// Constants of the reaction-diffusion equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeParams<S> {
    a: S,
    b: S,
    n: u32,
}

impl<S: Scalar> PdeParams<S> {
    pub fn new(a: S, b: S, n: u32) -> Result<Self, ParamError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(ParamError::NonFiniteInput("a, b"));
        }
        if a <= S::zero() {
            return Err(ParamError::InvalidPde(format!("a must be positive, got {a}")));
        }
        if b <= S::zero() {
            return Err(ParamError::InvalidPde(format!("b must be positive, got {b}")));
        }
        if n == 0 {
            return Err(ParamError::InvalidPde("dimension n must be at least 1".into()));
        }
        Ok(Self { a, b, n })
    }

    #[inline]
    pub fn a(&self) -> S {
        self.a
    }

    #[inline]
    pub fn b(&self) -> S {
        self.b
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn n_scalar(&self) -> S {
        S::from_u32(self.n).expect("dimension representable")
    }

    /// The positive constant steady state `√(a/b)`.
    #[inline]
    pub fn equilibrium(&self) -> S {
        (self.a / self.b).sqrt()
    }

    /// Reaction term `a f − b f³`.
    #[inline]
    pub fn reaction(&self, f: S) -> S {
        self.a * f - self.b * f * f * f
    }
}

/// Admissible regime of a coefficient triple.
///
/// `C`: `4γ(α−β) + nα²b < 0`, gauge φ. `D`: the same quantity `≥ 0`,
/// piecewise gauge ψ with a switch time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    C,
    D,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::C => f.write_str("C"),
            Branch::D => f.write_str("D"),
        }
    }
}

/// Validated Harnack coefficients together with their equation constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackParams<S> {
    pde: PdeParams<S>,
    alpha: S,
    beta: S,
    gamma: S,
    branch: Branch,
}

/// Derived constants of the gauge Riccati equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeConstants<S> {
    pub omega: S,
    pub mu: S,
    pub nu: S,
}

/// Upper bound on γ imposed by condition (b).
pub fn condition_b_bound<S: Scalar>(alpha: S, beta: S, pde: &PdeParams<S>) -> S {
    let n = pde.n_scalar();
    let two = S::lit(2.0);
    let three = S::lit(3.0);
    -n * pde.b() * alpha * alpha * (two * alpha + beta)
        / (three * n * alpha * alpha - two * (alpha - beta) * beta)
}

/// `4γ(α−β) + nα²b`; its sign selects the branch.
pub fn branch_quantity<S: Scalar>(alpha: S, beta: S, gamma: S, pde: &PdeParams<S>) -> S {
    S::lit(4.0) * gamma * (alpha - beta) + pde.n_scalar() * alpha * alpha * pde.b()
}

impl<S: Scalar> HarnackParams<S> {
    /// Checks conditions (a) and (b) and tags the branch.
    pub fn validate(alpha: S, beta: S, gamma: S, pde: PdeParams<S>) -> Result<Self, ParamError> {
        if !alpha.is_finite() || !beta.is_finite() || !gamma.is_finite() {
            return Err(ParamError::NonFiniteInput("alpha, beta, gamma"));
        }
        if !(alpha > beta && beta >= S::zero()) {
            return Err(ParamError::ConditionAViolated {
                alpha: alpha.to_f64_lossy(),
                beta: beta.to_f64_lossy(),
            });
        }
        let bound = condition_b_bound(alpha, beta, &pde);
        if !(gamma <= bound && gamma < S::zero()) {
            return Err(ParamError::ConditionBViolated {
                gamma: gamma.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
            });
        }
        let branch = if branch_quantity(alpha, beta, gamma, &pde) < S::zero() {
            Branch::C
        } else {
            Branch::D
        };
        Ok(Self { pde, alpha, beta, gamma, branch })
    }

    /// β = 0, γ = −nbα: the choice behind the classical (two-point) Harnack bound.
    pub fn classical_choice(alpha: S, pde: PdeParams<S>) -> Result<Self, ParamError> {
        let gamma = -pde.n_scalar() * pde.b() * alpha;
        Self::validate(alpha, S::zero(), gamma, pde)
    }

    /// β = 0, γ = −(2/3)bα: maximises the traveling-wave speed bound.
    pub fn wavespeed_choice(alpha: S, pde: PdeParams<S>) -> Result<Self, ParamError> {
        let gamma = -S::lit(2.0) / S::lit(3.0) * pde.b() * alpha;
        Self::validate(alpha, S::zero(), gamma, pde)
    }

    /// β = 0, γ = −bα: used by the gradient bound and the standing-solution argument.
    pub fn gradient_choice(alpha: S, pde: PdeParams<S>) -> Result<Self, ParamError> {
        Self::validate(alpha, S::zero(), -pde.b() * alpha, pde)
    }

    /// γ = −2nbα. Scaling with α keeps it homogeneous like every other
    /// constraint on γ; at α = 1 it is −2nb.
    pub fn simplified_choice(alpha: S, beta: S, pde: PdeParams<S>) -> Result<Self, ParamError> {
        let gamma = -S::lit(2.0) * pde.n_scalar() * pde.b() * alpha;
        Self::validate(alpha, beta, gamma, pde)
    }

    #[inline]
    pub fn pde(&self) -> &PdeParams<S> {
        &self.pde
    }

    #[inline]
    pub fn alpha(&self) -> S {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> S {
        self.beta
    }

    #[inline]
    pub fn gamma(&self) -> S {
        self.gamma
    }

    #[inline]
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `4γ(α−β) + nα²b`.
    pub fn branch_quantity(&self) -> S {
        branch_quantity(self.alpha, self.beta, self.gamma, &self.pde)
    }

    /// `2(α−β)/(nα²)`, the coefficient that recurs throughout the estimate.
    pub fn curvature_weight(&self) -> S {
        S::lit(2.0) * (self.alpha - self.beta) / (self.pde.n_scalar() * self.alpha * self.alpha)
    }

    pub fn gauge_constants(&self) -> GaugeConstants<S> {
        let two = S::lit(2.0);
        let n = self.pde.n_scalar();
        let diff = self.alpha - self.beta;
        let root = (n / (two * diff)).sqrt();
        let omega = (two * diff / n).sqrt() / self.alpha;
        let mu = self.pde.a() * self.alpha * root;
        let nu = omega + self.alpha * self.pde.b() / self.gamma * root;
        GaugeConstants { omega, mu, nu }
    }

    /// Time at which the branch-D gauge switches from `1/(w t)` to the Riccati solution.
    pub fn switch_time(&self) -> Result<S, ParamError> {
        if self.branch != Branch::D {
            return Err(ParamError::WrongBranch);
        }
        let w = self.curvature_weight();
        Ok((w * self.gamma + self.pde.b()) / (w * (-self.pde.a() * self.gamma)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_pde(n: u32) -> PdeParams<f64> {
        PdeParams::new(1.0, 1.0, n).unwrap()
    }

    #[test]
    fn branch_c_example() {
        let p = HarnackParams::validate(1.0, 0.0, -1.0, unit_pde(1)).unwrap();
        assert_eq!(p.branch(), Branch::C);
        assert_relative_eq!(condition_b_bound(1.0, 0.0, p.pde()), -2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p.branch_quantity(), -3.0, epsilon = 1e-15);
    }

    #[test]
    fn equality_in_condition_a_is_rejected() {
        for n in 1..4 {
            let err = HarnackParams::validate(1.0, 1.0, -1.0, unit_pde(n)).unwrap_err();
            assert!(matches!(err, ParamError::ConditionAViolated { .. }));
        }
        let err = HarnackParams::validate(1.0, -0.1, -1.0, unit_pde(1)).unwrap_err();
        assert!(matches!(err, ParamError::ConditionAViolated { .. }));
    }

    #[test]
    fn branch_d_example() {
        let p = HarnackParams::validate(1.0, 0.9, -2.0, unit_pde(1)).unwrap();
        assert_eq!(p.branch(), Branch::D);
        assert_relative_eq!(condition_b_bound(1.0, 0.9, p.pde()), -2.9 / 2.82, epsilon = 1e-14);
        assert_relative_eq!(p.branch_quantity(), 0.2, epsilon = 1e-14);
    }

    #[test]
    fn condition_b_rejects_weak_gamma() {
        let err = HarnackParams::validate(1.0, 0.0, -0.5, unit_pde(1)).unwrap_err();
        match err {
            ParamError::ConditionBViolated { bound, .. } => assert_relative_eq!(bound, -2.0 / 3.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_inputs_are_named() {
        let err = HarnackParams::validate(f64::NAN, 0.0, -1.0, unit_pde(1)).unwrap_err();
        assert!(matches!(err, ParamError::NonFiniteInput(_)));
        assert!(PdeParams::new(f64::INFINITY, 1.0, 1).is_err());
        assert!(PdeParams::new(1.0, 0.0, 1).is_err());
        assert!(PdeParams::new(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn borderline_branch_quantity_goes_to_d() {
        // 4γ(α−β) + nα²b = 0 with α = 1, β = 7/8, n = b = 1 → γ = −2.
        let pde = unit_pde(1);
        assert!(condition_b_bound(1.0, 0.875, &pde) >= -2.0);
        let p = HarnackParams::validate(1.0, 0.875, -2.0, pde).unwrap();
        assert_eq!(p.branch_quantity(), 0.0);
        assert_eq!(p.branch(), Branch::D);
    }

    #[test]
    fn gauge_constants_examples() {
        let c = HarnackParams::validate(1.0, 0.0, -1.0, unit_pde(1)).unwrap().gauge_constants();
        assert_relative_eq!(c.omega, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c.mu, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c.nu, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        // α = 2, β = 0, γ = −4/3 (the condition-(b) bound itself); values from
        // an independent 30-digit evaluation.
        let p = HarnackParams::validate(2.0, 0.0, -4.0 / 3.0, unit_pde(1)).unwrap();
        let c = p.gauge_constants();
        assert_relative_eq!(c.omega, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.mu, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.nu, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn switch_time_examples() {
        let p = HarnackParams::validate(1.0, 0.9, -2.0, unit_pde(1)).unwrap();
        assert_relative_eq!(p.switch_time().unwrap(), 1.5, epsilon = 1e-14);
        let p = HarnackParams::validate(1.0, 0.0, -0.7, unit_pde(3)).unwrap();
        assert_eq!(p.branch(), Branch::D);
        assert_relative_eq!(p.switch_time().unwrap(), 8.0 / 7.0, epsilon = 1e-14);
        let p = HarnackParams::validate(1.0, 0.0, -1.0, unit_pde(1)).unwrap();
        assert_eq!(p.switch_time(), Err(ParamError::WrongBranch));
    }

    #[test]
    fn beta_zero_threshold_is_dimension_free() {
        for n in 1..=10 {
            for &(alpha, b) in &[(1.0, 1.0), (0.3, 2.5), (4.0, 0.2)] {
                let pde = PdeParams::new(1.0, b, n).unwrap();
                let bound = condition_b_bound(alpha, 0.0, &pde);
                assert_relative_eq!(bound, -2.0 / 3.0 * alpha * b, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn classical_choice_lands_in_branch_c() {
        for n in 1..=6 {
            for &(alpha, b) in &[(1.0, 1.0), (0.5, 3.0), (2.5, 0.4)] {
                let pde = PdeParams::new(0.7, b, n).unwrap();
                let p = HarnackParams::classical_choice(alpha, pde).unwrap();
                let expected = -3.0 * n as f64 * alpha * alpha * b;
                assert_relative_eq!(p.branch_quantity(), expected, max_relative = 1e-14);
                assert_eq!(p.branch(), Branch::C);
            }
        }
    }

    #[test]
    fn presets_validate() {
        let pde = unit_pde(1);
        assert_eq!(HarnackParams::wavespeed_choice(1.0, pde).unwrap().branch(), Branch::C);
        assert_eq!(HarnackParams::gradient_choice(1.0, pde).unwrap().branch(), Branch::C);
        assert!(HarnackParams::simplified_choice(1.0, 0.0, pde).is_ok());
        let p3 = HarnackParams::wavespeed_choice(1.0, unit_pde(3)).unwrap();
        assert_eq!(p3.branch(), Branch::D);
    }

    #[test]
    fn mu_omega_product_is_a() {
        for &(alpha, beta, gamma, a) in &[(1.0, 0.0, -1.0, 1.0), (2.0, 0.5, -9.0, 0.3), (1.0, 0.9, -2.0, 5.0)] {
            let pde = PdeParams::new(a, 1.0, 2).unwrap();
            let c = HarnackParams::validate(alpha, beta, gamma, pde).unwrap().gauge_constants();
            assert_relative_eq!(2.0 * c.mu * c.omega, 2.0 * a, max_relative = 1e-14);
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let pde = PdeParams::<f32>::new(1.0, 1.0, 1).unwrap();
        let p = HarnackParams::validate(1.0f32, 0.9, -2.0, pde).unwrap();
        assert!((p.switch_time().unwrap() - 1.5).abs() < 1e-5);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn validate_is_total(alpha in -10.0..10.0f64, beta in -10.0..10.0f64,
                                 gamma in -50.0..5.0f64, n in 1u32..6) {
                let pde = PdeParams::new(1.3, 0.7, n).unwrap();
                match HarnackParams::validate(alpha, beta, gamma, pde) {
                    Ok(p) => {
                        prop_assert!(p.alpha() > p.beta() && p.beta() >= 0.0 && p.gamma() < 0.0);
                        let q = p.branch_quantity();
                        prop_assert_eq!(p.branch(), if q < 0.0 { Branch::C } else { Branch::D });
                    }
                    Err(ParamError::ConditionAViolated { .. }) => prop_assert!(!(alpha > beta && beta >= 0.0)),
                    Err(ParamError::ConditionBViolated { bound, .. }) => prop_assert!(gamma > bound),
                    Err(e) => prop_assert!(false, "unexpected error {e}"),
                }
            }
        }
    }
}
