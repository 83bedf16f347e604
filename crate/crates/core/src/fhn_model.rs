//! The FitzHugh-Nagumo model in the excitable regime.
//!
//! ```text
//! dv = (v − v³/3 − w + I) dt
//! dw = ε(v + α − βw) dt + h(w) ∘ dB
//! ```
//!
//! with channel noise `h(w) = σ₀` (additive) or `h(w) = σ₀·w` (multiplicative).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Mat2;
use crate::sde_engine::{Interpretation, SdeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Additive,
    Multiplicative,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "additive" => Ok(NoiseKind::Additive),
            "multiplicative" => Ok(NoiseKind::Multiplicative),
            other => Err(invalid(format!("unknown noise kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma0: f64,
}

impl NoiseSpec {
    pub fn additive(sigma0: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Additive,
            sigma0,
        }
    }

    pub fn multiplicative(sigma0: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Multiplicative,
            sigma0,
        }
    }

    /// Diffusion vector `H(X)`: `(0, σ₀)` or `(0, σ₀·w)`.
    #[inline]
    pub fn field(&self, x: &[f64; 2]) -> [f64; 2] {
        match self.kind {
            NoiseKind::Additive => [0.0, self.sigma0],
            NoiseKind::Multiplicative => [0.0, self.sigma0 * x[1]],
        }
    }
}

/// Free-function form of [`NoiseSpec::field`].
pub fn noise_field(noise: &NoiseSpec, x: &[f64; 2]) -> [f64; 2] {
    noise.field(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhnParams {
    /// Bias current `I`.
    pub current: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub noise: NoiseSpec,
}

impl Default for FhnParams {
    fn default() -> Self {
        FhnParams {
            current: 0.265,
            alpha: 0.7,
            beta: 0.75,
            epsilon: 0.08,
            noise: NoiseSpec::additive(0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchStability {
    Stable,
    Unstable,
}

/// Eigenvalues of the Jacobian at the fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Spectrum {
    /// `−μ ± iν`.
    Focus { mu: f64, nu: f64 },
    Real { lambda1: f64, lambda2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub v_e: f64,
    pub w_e: f64,
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub jacobian: Mat2,
    pub spectrum: Spectrum,
}

impl FixedPoint {
    pub fn state(&self) -> [f64; 2] {
        [self.v_e, self.w_e]
    }

    /// `(μ, ν)` when the equilibrium is a focus.
    pub fn focus(&self) -> Option<(f64, f64)> {
        match self.spectrum {
            Spectrum::Focus { mu, nu } => Some((mu, nu)),
            Spectrum::Real { .. } => None,
        }
    }

    pub fn focus_or_err(&self) -> Result<(f64, f64)> {
        self.focus().ok_or_else(|| {
            Error::UnsupportedRegime("Jacobian at the fixed point has real eigenvalues".into())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitabilityReport {
    pub delta: f64,
    pub unique_fixed_point: bool,
    pub complex_eigenvalues: bool,
    pub stable: bool,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub ratio: Option<f64>,
    pub ratio_threshold: f64,
    pub averaging_valid: bool,
    pub pass: bool,
}

/// One-sided dissipativity constants: `⟨X₁−X₂, F(X₁)−F(X₂)⟩ ≤ a − b‖X₁−X₂‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dissipativity {
    pub a: f64,
    pub b: f64,
}

pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.2;

impl FhnParams {
    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_sigma0(mut self, sigma0: f64) -> Self {
        self.noise.sigma0 = sigma0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.current, self.alpha, self.beta, self.epsilon, self.noise.sigma0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("parameters must be finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.beta > 0.0) {
            return Err(invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if self.noise.sigma0 < 0.0 {
            return Err(invalid("sigma0 must be non-negative"));
        }
        Ok(())
    }

    /// Deterministic vector field `F = (f, g)`.
    #[inline]
    pub fn drift(&self, x: &[f64; 2]) -> [f64; 2] {
        let [v, w] = *x;
        [
            v - v * v * v / 3.0 - w + self.current,
            self.epsilon * (v + self.alpha - self.beta * w),
        ]
    }

    pub fn jacobian(&self, x: &[f64; 2]) -> Mat2 {
        Mat2::new(1.0 - x[0] * x[0], -1.0, self.epsilon, -self.epsilon * self.beta)
    }

    /// Critical manifold `w = v − v³/3 + I`.
    pub fn critical_manifold(&self, v: f64) -> f64 {
        v - v * v * v / 3.0 + self.current
    }

    /// Stability of the fast (layer) dynamics on the critical manifold, from `∂f/∂v = 1 − v²`.
    pub fn branch_stability(&self, v: f64) -> BranchStability {
        if 1.0 - v * v < 0.0 {
            BranchStability::Stable
        } else {
            BranchStability::Unstable
        }
    }

    /// Coefficients of the depressed cubic `v³ + p·v + q = 0` whose real roots are the
    /// fixed-point voltages.
    pub fn cardano_coefficients(&self) -> (f64, f64) {
        (
            3.0 * (1.0 / self.beta - 1.0),
            3.0 * (self.alpha / self.beta - self.current),
        )
    }

    /// `Δ = (1/β − 1)³ + (9/4)(α/β − I)²`, which equals `(p/3)³ + (q/2)²`.
    pub fn discriminant(&self) -> f64 {
        let s = 1.0 / self.beta - 1.0;
        let c = self.alpha / self.beta - self.current;
        s * s * s + 2.25 * c * c
    }

    pub fn fixed_point(&self) -> Result<FixedPoint> {
        let (p, q) = self.cardano_coefficients();
        let delta = self.discriminant();
        // Δ = 0 with p = 0 is the triple root v = −∛q, still a single equilibrium.
        if delta < 0.0 || (delta == 0.0 && p != 0.0) || !delta.is_finite() {
            return Err(Error::NotUniqueFixedPoint { delta });
        }
        let sd = delta.sqrt();
        let mut v = (-q / 2.0 - sd).cbrt() + (-q / 2.0 + sd).cbrt();
        // Newton polish on the cubic.
        for _ in 0..50 {
            let h = v * v * v + p * v + q;
            let dh = 3.0 * v * v + p;
            if h == 0.0 || dh == 0.0 {
                break;
            }
            let step = h / dh;
            v -= step;
            if step.abs() <= 1e-16 * v.abs().max(1.0) {
                break;
            }
        }
        let w = (v + self.alpha) / self.beta;
        let jacobian = self.jacobian(&[v, w]);
        let eb = self.epsilon * self.beta;
        let trace_half = 0.5 * (1.0 - v * v - eb);
        let radicand = 4.0 * self.epsilon - (1.0 - v * v + eb).powi(2);
        let spectrum = if radicand > 0.0 {
            Spectrum::Focus {
                mu: -trace_half,
                nu: 0.5 * radicand.sqrt(),
            }
        } else {
            let s = 0.5 * (-radicand).sqrt();
            Spectrum::Real {
                lambda1: trace_half + s,
                lambda2: trace_half - s,
            }
        };
        Ok(FixedPoint {
            v_e: v,
            w_e: w,
            p,
            q,
            delta,
            jacobian,
            spectrum,
        })
    }

    pub fn validate_excitable(&self, ratio_threshold: f64) -> ExcitabilityReport {
        let delta = self.discriminant();
        let mut report = ExcitabilityReport {
            delta,
            unique_fixed_point: false,
            complex_eigenvalues: false,
            stable: false,
            mu: None,
            nu: None,
            ratio: None,
            ratio_threshold,
            averaging_valid: false,
            pass: false,
        };
        let Ok(fp) = self.fixed_point() else {
            return report;
        };
        report.unique_fixed_point = true;
        match fp.spectrum {
            Spectrum::Focus { mu, nu } => {
                report.complex_eigenvalues = true;
                report.stable = mu > 0.0;
                report.mu = Some(mu);
                report.nu = Some(nu);
                report.ratio = Some(mu / nu);
                report.averaging_valid = mu / nu < ratio_threshold;
            }
            Spectrum::Real { lambda1, lambda2 } => {
                report.stable = lambda1 < 0.0 && lambda2 < 0.0;
            }
        }
        report.pass = report.unique_fixed_point
            && report.complex_eigenvalues
            && report.stable
            && report.averaging_valid;
        report
    }

    pub fn dissipativity_constants(&self) -> Result<Dissipativity> {
        let eb = self.epsilon * self.beta;
        if !(eb > 0.0) {
            return Err(invalid("dissipativity requires epsilon·beta > 0"));
        }
        let inner = 1.0 + eb / 2.0 + (1.0 - self.epsilon).powi(2) / (2.0 * eb);
        Ok(Dissipativity {
            a: 3.0 * inner * inner,
            b: eb / 2.0,
        })
    }

    /// The stochastic model as an engine system.
    pub fn system(&self) -> FhnSystem {
        FhnSystem { params: *self }
    }
}

/// Stochastic FHN in Stratonovich form.
#[derive(Debug, Clone, Copy)]
pub struct FhnSystem {
    pub params: FhnParams,
}

impl SdeSystem<2> for FhnSystem {
    #[inline]
    fn drift(&self, x: &[f64; 2], _t: f64) -> [f64; 2] {
        self.params.drift(x)
    }

    #[inline]
    fn diffusion(&self, x: &[f64; 2], _t: f64) -> [f64; 2] {
        self.params.noise.field(x)
    }

    fn interpretation(&self) -> Interpretation {
        Interpretation::Stratonovich
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot2, norm2, sub2};
    use crate::sde_engine::{integrate, BrownianPath};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chosen() -> FhnParams {
        FhnParams::default()
    }

    #[test]
    fn drift_examples() {
        let p = chosen();
        let f = p.drift(&[-1.00125, -0.401665]);
        assert!(f[0].abs() < 1e-5 && f[1].abs() < 1e-5, "{f:?}");

        let p0 = FhnParams { current: 0.0, ..p };
        assert_eq!(p0.drift(&[0.0, 0.0]), [0.0, 0.08 * 0.7]);

        let f = p.drift(&[1.0, 0.0]);
        assert!((f[0] - (1.0 - 1.0 / 3.0 + 0.265)).abs() < 1e-15);
        assert!((f[1] - 0.136).abs() < 1e-15);
        assert!((f[0] - 0.931_667).abs() < 1e-6);
    }

    #[test]
    fn critical_manifold_examples() {
        let p = chosen();
        assert_eq!(p.critical_manifold(0.0), 0.265);
        let fp = p.fixed_point().unwrap();
        assert!((p.critical_manifold(fp.v_e) - fp.w_e).abs() < 1e-5);
        assert_eq!(p.branch_stability(-2.0), BranchStability::Stable);
        assert_eq!(p.branch_stability(0.0), BranchStability::Unstable);
        assert_eq!(p.branch_stability(2.0), BranchStability::Stable);
    }

    #[test]
    fn fixed_point_of_chosen_params() {
        let fp = chosen().fixed_point().unwrap();
        assert!((fp.v_e + 1.00125).abs() < 1e-5);
        assert!((fp.w_e + 0.401665).abs() < 1e-5);
        let (mu, nu) = fp.focus().unwrap();
        assert!((mu - 0.0312496).abs() < 1e-4);
        assert!((nu - 0.281378).abs() < 1e-4);
        let r = chosen().drift(&fp.state());
        assert!(norm2(&r) < 1e-10);
        // −μ ± iν reproduce trace and determinant.
        assert!((fp.jacobian.trace() + 2.0 * mu).abs() < 1e-12);
        assert!((fp.jacobian.det() - (mu * mu + nu * nu)).abs() < 1e-12);
    }

    #[test]
    fn triple_root_degenerate_case() {
        let p = FhnParams {
            current: 0.0,
            alpha: 0.0,
            beta: 1.0,
            ..chosen()
        };
        let fp = p.fixed_point().unwrap();
        assert_eq!((fp.p, fp.q), (0.0, 0.0));
        assert_eq!(fp.v_e, 0.0);
        assert_eq!(fp.w_e, 0.0);
    }

    #[test]
    fn negative_discriminant_is_rejected() {
        let p = FhnParams {
            current: 0.0,
            alpha: 0.0,
            beta: 3.0,
            ..chosen()
        };
        assert!(p.discriminant() < 0.0);
        assert!(matches!(p.fixed_point(), Err(Error::NotUniqueFixedPoint { .. })));
        let rep = p.validate_excitable(DEFAULT_RATIO_THRESHOLD);
        assert!(!rep.unique_fixed_point && !rep.pass);
    }

    #[test]
    fn excitable_report() {
        let rep = chosen().validate_excitable(DEFAULT_RATIO_THRESHOLD);
        assert!(rep.pass);
        assert!((rep.ratio.unwrap() - 0.111059).abs() < 1e-4);

        // ε = 0.5: recompute the eigenvalues from the closed form and compare.
        let p = FhnParams { epsilon: 0.5, ..chosen() };
        let rep = p.validate_excitable(DEFAULT_RATIO_THRESHOLD);
        let fp = p.fixed_point().unwrap();
        let m = p.jacobian(&fp.state());
        let [(re, im), _] = m.eigenvalues();
        assert_eq!(rep.complex_eigenvalues, im > 0.0);
        if let (Some(mu), Some(nu)) = (rep.mu, rep.nu) {
            assert!((mu + re).abs() < 1e-12 && (nu - im).abs() < 1e-12);
            assert_eq!(rep.averaging_valid, mu / nu < 0.2);
        }
    }

    #[test]
    fn dissipativity_constants_examples() {
        let d = chosen().dissipativity_constants().unwrap();
        let expected_a = 3.0 * (1.0 + 0.03 + 0.92f64.powi(2) / 0.12).powi(2);
        assert!((d.a - expected_a).abs() < 1e-12);
        assert!((d.a - 196.02).abs() < 0.01);
        assert!((d.b - 0.03).abs() < 1e-15);

        let p = FhnParams { epsilon: 1.0, beta: 2.0, ..chosen() };
        let d = p.dissipativity_constants().unwrap();
        assert_eq!((d.a, d.b), (12.0, 1.0));
    }

    #[test]
    fn dissipativity_inequality_on_sampled_pairs() {
        let p = chosen();
        let d = p.dissipativity_constants().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x1 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let x2 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let dx = sub2(&x1, &x2);
            let lhs = dot2(&dx, &sub2(&p.drift(&x1), &p.drift(&x2)));
            assert!(lhs <= d.a - d.b * dot2(&dx, &dx));
        }
    }

    #[test]
    fn noise_field_examples() {
        let x = [1.0, -0.4];
        assert_eq!(NoiseSpec::additive(0.01).field(&x), [0.0, 0.01]);
        let h = NoiseSpec::multiplicative(0.01).field(&x);
        assert_eq!(h[0], 0.0);
        assert!((h[1] + 0.004).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for spec in [NoiseSpec::additive(0.3), NoiseSpec::multiplicative(0.3)] {
            for _ in 0..1000 {
                let x1 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
                let x2 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
                let lhs = norm2(&sub2(&spec.field(&x1), &spec.field(&x2)));
                assert!(lhs <= 0.3 * norm2(&sub2(&x1, &x2)) + 1e-15);
            }
        }
    }

    #[test]
    fn zero_noise_matches_deterministic_bitwise() {
        let det = chosen().with_sigma0(0.0);
        let path = crate::sde_engine::brownian_path(3, 0, 0.01, 5000).unwrap();
        let zeros = BrownianPath::zeros(0.01, 0.0, 5000).unwrap();
        let a = integrate(&det.system(), [-1.0, -0.45], &path, &[]).unwrap();
        let b = integrate(&det.system(), [-1.0, -0.45], &zeros, &[]).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn deterministic_flow_settles_at_rest() {
        let det = chosen().with_sigma0(0.0);
        let xe = det.fixed_point().unwrap().state();
        let zeros = BrownianPath::zeros(0.01, 0.0, 100_000).unwrap();
        for x0 in [[0.0, 0.0], [2.0, 1.0], [-2.0, -1.0], [1.0, -0.5]] {
            let tr = integrate(&det.system(), x0, &zeros, &[]).unwrap();
            assert!(norm2(&sub2(tr.last(), &xe)) < 1e-6);
        }
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(FhnParams { epsilon: 1.5, ..chosen() }.validate().is_err());
        assert!(FhnParams { beta: -1.0, ..chosen() }.validate().is_err());
        assert!(chosen().with_sigma0(-0.1).validate().is_err());
        assert!(chosen().validate().is_ok());
        assert_eq!("Multiplicative".parse::<NoiseKind>().unwrap(), NoiseKind::Multiplicative);
    }
}
