//! Velocity laws v(ρ), the flux f(ρ) = ρ·v(ρ), and the entropy machinery
//! η, ψ, W built on them.
//!
//! Every built-in law is a polynomial in ρ, so ψ and W have exact
//! term-by-term antiderivatives and no quadrature enters the audits.

use crate::error::{Error, Result};

/// Slack tolerated when clamping densities to [0, rho_jam].
pub const DENSITY_SLACK: f64 = 1e-9;

/// Absolute tolerance on v(rho_jam) = 0 and on the slope margin.
pub const MODEL_TOL: f64 = 1e-12;

/// Built-in velocity law families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// v(ρ) = v_max (1 − ρ/ρ_jam), params = [v_max].
    Greenshields,
    /// v(ρ) = a (ρ_jam − ρ) + c (ρ_jam − ρ)², params = [a, c].
    /// Strictly nonlinear for c > 0; the flux is non-concave once
    /// c > a/ρ_jam, which exercises general-envelope Riemann fans.
    Quadratic,
    /// v(ρ) = Σ params[k] ρ^k (ascending powers).
    CustomPolynomial,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Greenshields => "greenshields",
            ModelKind::Quadratic => "quadratic",
            ModelKind::CustomPolynomial => "custom-polynomial",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "greenshields" => Some(ModelKind::Greenshields),
            "quadratic" => Some(ModelKind::Quadratic),
            "custom-polynomial" => Some(ModelKind::CustomPolynomial),
            _ => None,
        }
    }
}

/// A decreasing velocity law on [0, rho_jam] together with precomputed
/// polynomial coefficients for v, v', ψ, W and the interior extrema of
/// the flux. Immutable after construction; all evaluations are pure.
#[derive(Debug, Clone)]
pub struct VelocityModel {
    kind: ModelKind,
    rho_jam: f64,
    params: Vec<f64>,
    delta_star: f64,
    /// Monomial coefficients of v (ascending powers).
    v_coeffs: Vec<f64>,
    /// Coefficients of v'.
    dv_coeffs: Vec<f64>,
    /// Coefficients of ψ(ρ) = ∫₀^ρ [s v(s) + s² v'(s)] ds.
    psi_coeffs: Vec<f64>,
    /// Coefficients of W(ρ) = ∫₀^ρ s² v'(s) ds.
    w_coeffs: Vec<f64>,
    /// Sign-changing roots of f' strictly inside (0, rho_jam):
    /// the interior extrema of the flux.
    flux_extrema: Vec<f64>,
    /// max over [0, rho_jam] of |f'(ρ)| = |v(ρ) + ρ v'(ρ)|.
    max_flux_slope: f64,
}

impl VelocityModel {
    pub fn greenshields(v_max: f64, rho_jam: f64, delta_star: f64) -> Result<Self> {
        let coeffs = vec![v_max, -v_max / rho_jam];
        Self::build(ModelKind::Greenshields, rho_jam, vec![v_max], delta_star, coeffs)
    }

    pub fn quadratic(a: f64, c: f64, rho_jam: f64, delta_star: f64) -> Result<Self> {
        // a(R−ρ) + c(R−ρ)² expanded in ρ.
        let coeffs = vec![
            a * rho_jam + c * rho_jam * rho_jam,
            -(a + 2.0 * c * rho_jam),
            c,
        ];
        Self::build(ModelKind::Quadratic, rho_jam, vec![a, c], delta_star, coeffs)
    }

    pub fn custom(coeffs: Vec<f64>, rho_jam: f64, delta_star: f64) -> Result<Self> {
        Self::build(
            ModelKind::CustomPolynomial,
            rho_jam,
            coeffs.clone(),
            delta_star,
            coeffs,
        )
    }

    /// Build from the config-level description (kind, rho_jam, params,
    /// delta_star).
    pub fn from_spec(kind: ModelKind, rho_jam: f64, params: &[f64], delta_star: f64) -> Result<Self> {
        match kind {
            ModelKind::Greenshields => {
                if params.len() != 1 {
                    return Err(Error::Domain(
                        "greenshields expects params = [v_max]".into(),
                    ));
                }
                Self::greenshields(params[0], rho_jam, delta_star)
            }
            ModelKind::Quadratic => {
                if params.len() != 2 {
                    return Err(Error::Domain("quadratic expects params = [a, c]".into()));
                }
                Self::quadratic(params[0], params[1], rho_jam, delta_star)
            }
            ModelKind::CustomPolynomial => {
                if params.is_empty() {
                    return Err(Error::Domain(
                        "custom-polynomial expects at least one coefficient".into(),
                    ));
                }
                Self::custom(params.to_vec(), rho_jam, delta_star)
            }
        }
    }

    fn build(
        kind: ModelKind,
        rho_jam: f64,
        params: Vec<f64>,
        delta_star: f64,
        v_coeffs: Vec<f64>,
    ) -> Result<Self> {
        if !(rho_jam > 0.0) {
            return Err(Error::Domain(format!("rho_jam must be > 0, got {rho_jam}")));
        }
        if !(delta_star > 0.0) {
            return Err(Error::Domain(format!(
                "delta_star must be > 0, got {delta_star}"
            )));
        }
        if v_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("non-finite coefficient".into()));
        }
        let dv_coeffs = poly::derivative(&v_coeffs);
        // s·v(s) + s²·v'(s) = Σ (k+1) a_k s^{k+1}  ⇒  ψ = Σ (k+1)/(k+2) a_k ρ^{k+2}
        let mut psi_coeffs = vec![0.0; v_coeffs.len() + 2];
        for (k, &a) in v_coeffs.iter().enumerate() {
            psi_coeffs[k + 2] = (k as f64 + 1.0) / (k as f64 + 2.0) * a;
        }
        // s²·v'(s) = Σ k a_k s^{k+1}  ⇒  W = Σ k/(k+2) a_k ρ^{k+2}
        let mut w_coeffs = vec![0.0; v_coeffs.len() + 2];
        for (k, &a) in v_coeffs.iter().enumerate().skip(1) {
            w_coeffs[k + 2] = k as f64 / (k as f64 + 2.0) * a;
        }
        let mut model = VelocityModel {
            kind,
            rho_jam,
            params,
            delta_star,
            v_coeffs,
            dv_coeffs,
            psi_coeffs,
            w_coeffs,
            flux_extrema: Vec::new(),
            max_flux_slope: 0.0,
        };
        model.flux_extrema = model.find_flux_extrema();
        model.max_flux_slope = model.find_max_flux_slope();
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn rho_jam(&self) -> f64 {
        self.rho_jam
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    /// One-line description used in run metadata and CSV headers.
    pub fn descriptor(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        format!(
            "{}(rho_jam={}, params=[{}], delta_star={})",
            self.kind.as_str(),
            self.rho_jam,
            params.join(","),
            self.delta_star
        )
    }

    pub fn velocity(&self, rho: f64) -> f64 {
        poly::eval(&self.v_coeffs, rho)
    }

    pub fn velocity_prime(&self, rho: f64) -> f64 {
        poly::eval(&self.dv_coeffs, rho)
    }

    /// Clamp a density into [0, rho_jam], rejecting values further than
    /// `DENSITY_SLACK` outside.
    pub fn clamp_density(&self, rho: f64) -> Result<f64> {
        if !rho.is_finite() || rho < -DENSITY_SLACK || rho > self.rho_jam + DENSITY_SLACK {
            return Err(Error::Domain(format!(
                "density {rho} outside [0, {}]",
                self.rho_jam
            )));
        }
        Ok(rho.clamp(0.0, self.rho_jam))
    }

    /// Local flux f(ρ) = ρ·v(ρ); exactly 0 at both endpoints.
    pub fn local_flux(&self, rho: f64) -> Result<f64> {
        let rho = self.clamp_density(rho)?;
        if rho == 0.0 || rho == self.rho_jam {
            return Ok(0.0);
        }
        Ok(rho * self.velocity(rho))
    }

    /// f(ρ) without the domain check; callers guarantee ρ ∈ [0, rho_jam].
    pub(crate) fn flux_unchecked(&self, rho: f64) -> f64 {
        rho * self.velocity(rho)
    }

    /// f'(ρ) = v(ρ) + ρ v'(ρ).
    pub fn flux_prime(&self, rho: f64) -> f64 {
        self.velocity(rho) + rho * self.velocity_prime(rho)
    }

    /// Entropy η(ρ) = ρ²/2.
    pub fn eta(&self, rho: f64) -> f64 {
        0.5 * rho * rho
    }

    /// Entropy flux ψ(ρ) = ∫₀^ρ [s v(s) + s² v'(s)] ds, exact closed form.
    pub fn psi(&self, rho: f64) -> f64 {
        poly::eval(&self.psi_coeffs, rho)
    }

    /// W(ρ) = ∫₀^ρ s² v'(s) ds, exact closed form; ≤ 0 since v' ≤ 0.
    pub fn w(&self, rho: f64) -> f64 {
        poly::eval(&self.w_coeffs, rho)
    }

    /// (η, ψ) evaluated together, with the domain check of `local_flux`.
    pub fn entropy_pair_eval(&self, rho: f64) -> Result<(f64, f64)> {
        let rho = self.clamp_density(rho)?;
        Ok((self.eta(rho), self.psi(rho)))
    }

    /// W with the domain check.
    pub fn w_eval(&self, rho: f64) -> Result<f64> {
        let rho = self.clamp_density(rho)?;
        Ok(self.w(rho))
    }

    pub fn entropy_pair(&self) -> EntropyPair<'_> {
        EntropyPair { model: self }
    }

    /// Interior extrema of the flux: sign-changing roots of f' in
    /// (0, rho_jam), located by a 1024-interval scan plus bisection.
    pub fn flux_interior_extrema(&self) -> &[f64] {
        &self.flux_extrema
    }

    /// max |f'| over [0, rho_jam]; bounds every characteristic speed.
    pub fn max_flux_slope(&self) -> f64 {
        self.max_flux_slope
    }

    fn find_flux_extrema(&self) -> Vec<f64> {
        let fp = |rho: f64| self.flux_prime(rho);
        poly::sign_change_roots(&fp, 0.0, self.rho_jam, 1024, 1e-12)
            .into_iter()
            .filter(|&r| r > MODEL_TOL && r < self.rho_jam - MODEL_TOL)
            .collect()
    }

    fn find_max_flux_slope(&self) -> f64 {
        // |f'| peaks at an endpoint or at a root of f''.
        let fpp_coeffs = poly::derivative(&poly::derivative(&poly::flux_coeffs(&self.v_coeffs)));
        let fpp = |rho: f64| poly::eval(&fpp_coeffs, rho);
        let mut candidates = vec![0.0, self.rho_jam];
        candidates.extend(poly::sign_change_roots(&fpp, 0.0, self.rho_jam, 1024, 1e-12));
        candidates
            .iter()
            .map(|&r| self.flux_prime(r).abs())
            .fold(0.0, f64::max)
    }

    /// Check the admissibility assumptions on a uniform sample grid:
    /// v(rho_jam) ≈ 0 and v'(ρ) ≤ −delta_star everywhere.
    pub fn validate(&self, samples: usize) -> Result<ValidationReport> {
        if samples < 2 {
            return Err(Error::Domain(format!(
                "validate requires samples >= 2, got {samples}"
            )));
        }
        let v_at_jam = self.velocity(self.rho_jam);
        if !v_at_jam.is_finite() {
            return Err(Error::InvalidModel("v(rho_jam) is not finite".into()));
        }
        let mut max_slope = f64::NEG_INFINITY;
        let mut max_slope_at = 0.0;
        for i in 0..samples {
            let rho = self.rho_jam * i as f64 / (samples - 1) as f64;
            let v = self.velocity(rho);
            let dv = self.velocity_prime(rho);
            if !v.is_finite() || !dv.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "non-finite evaluation at rho = {rho}"
                )));
            }
            if dv > max_slope {
                max_slope = dv;
                max_slope_at = rho;
            }
        }
        Ok(ValidationReport {
            samples,
            delta_star: self.delta_star,
            v_at_jam,
            max_slope,
            max_slope_at,
        })
    }
}

/// Outcome of `VelocityModel::validate`: worst margins over the sample grid.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub samples: usize,
    pub delta_star: f64,
    /// v(rho_jam); must vanish to within `MODEL_TOL`.
    pub v_at_jam: f64,
    /// Largest v' seen; must stay ≤ −delta_star + `MODEL_TOL`.
    pub max_slope: f64,
    /// Location of the largest v'.
    pub max_slope_at: f64,
}

impl ValidationReport {
    pub fn jam_ok(&self) -> bool {
        self.v_at_jam.abs() <= MODEL_TOL
    }

    pub fn slope_ok(&self) -> bool {
        self.max_slope <= -self.delta_star + MODEL_TOL
    }

    pub fn pass(&self) -> bool {
        self.jam_ok() && self.slope_ok()
    }

    /// Distance to the slope bound; negative when violated.
    pub fn slope_margin(&self) -> f64 {
        -self.delta_star - self.max_slope
    }
}

/// The entropy / entropy-flux pair (η, ψ) together with W, as maps on
/// [0, rho_jam].
#[derive(Debug, Clone, Copy)]
pub struct EntropyPair<'a> {
    model: &'a VelocityModel,
}

impl EntropyPair<'_> {
    pub fn eta(&self, rho: f64) -> f64 {
        self.model.eta(rho)
    }

    pub fn psi(&self, rho: f64) -> f64 {
        self.model.psi(rho)
    }

    pub fn w(&self, rho: f64) -> f64 {
        self.model.w(rho)
    }
}

/// Small dense-polynomial helpers (monomial basis, ascending powers).
pub(crate) mod poly {
    pub fn eval(coeffs: &[f64], x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
        if coeffs.len() <= 1 {
            return vec![0.0];
        }
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect()
    }

    /// Coefficients of ρ·v(ρ) given those of v.
    pub fn flux_coeffs(v_coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend_from_slice(v_coeffs);
        out
    }

    /// Sign-changing roots of `f` on [a, b]: scan `intervals` uniform
    /// subintervals, bisect each bracket to `tol`. Exact zeros at sample
    /// points are kept as roots.
    pub fn sign_change_roots(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        intervals: usize,
        tol: f64,
    ) -> Vec<f64> {
        let mut roots = Vec::new();
        if !(b > a) {
            return roots;
        }
        let h = (b - a) / intervals as f64;
        let mut x0 = a;
        let mut f0 = f(x0);
        for i in 1..=intervals {
            let x1 = if i == intervals { b } else { a + i as f64 * h };
            let f1 = f(x1);
            if f0 == 0.0 {
                push_root(&mut roots, x0, tol);
            } else if f1 != 0.0 && f0.signum() != f1.signum() {
                push_root(&mut roots, bisect(f, x0, x1, tol), tol);
            }
            x0 = x1;
            f0 = f1;
        }
        if f0 == 0.0 {
            push_root(&mut roots, x0, tol);
        }
        roots
    }

    fn push_root(roots: &mut Vec<f64>, r: f64, tol: f64) {
        if roots.last().map_or(true, |&p| (r - p).abs() > 2.0 * tol) {
            roots.push(r);
        }
    }

    fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let mut fa = f(a);
        while b - a > tol {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return m;
            }
            if fa.signum() * fm.signum() < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn greenshields() -> VelocityModel {
        VelocityModel::greenshields(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn greenshields_validates() {
        let report = greenshields().validate(1001).unwrap();
        assert!(report.pass());
        assert_eq!(report.max_slope, -1.0);
    }

    #[test]
    fn flat_top_velocity_fails_validation() {
        // v = 1 − ρ² has v'(0) = 0, violating v' ≤ −δ* for any δ* > 0.
        let model = VelocityModel::custom(vec![1.0, 0.0, -1.0], 1.0, 0.1).unwrap();
        let report = model.validate(1001).unwrap();
        assert!(!report.pass());
        assert!(report.jam_ok());
        assert!(!report.slope_ok());
        assert!(report.max_slope.abs() < 1e-12);
        assert!(report.max_slope_at.abs() < 1e-12, "worst slope sits at rho = 0");
    }

    #[test]
    fn quadratic_family_validates() {
        // v'(ρ) = −a − 2c(1−ρ) ≤ −a on [0, 1].
        let model = VelocityModel::quadratic(0.5, 0.25, 1.0, 0.5).unwrap();
        let report = model.validate(1001).unwrap();
        assert!(report.pass());
        assert!((report.max_slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rho_jam_must_be_positive() {
        assert!(matches!(
            VelocityModel::greenshields(1.0, 0.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            VelocityModel::greenshields(1.0, -1.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn local_flux_examples() {
        let m = greenshields();
        assert_eq!(m.local_flux(0.0).unwrap(), 0.0);
        assert_eq!(m.local_flux(1.0).unwrap(), 0.0);
        assert!((m.local_flux(0.5).unwrap() - 0.25).abs() < 1e-15);
        // within slack: clamps
        assert_eq!(m.local_flux(1.0 + 0.5e-9).unwrap(), 0.0);
        // beyond slack: domain error
        assert!(m.local_flux(1.0 + 1e-6).is_err());
        assert!(m.local_flux(-1e-6).is_err());
    }

    #[test]
    fn entropy_pair_closed_forms() {
        // For v = 1 − ρ: ψ(ρ) = ρ²/2 − 2ρ³/3, W(ρ) = −ρ³/3.
        let m = greenshields();
        assert_eq!(m.entropy_pair_eval(0.0).unwrap(), (0.0, 0.0));
        let (eta1, psi1) = m.entropy_pair_eval(1.0).unwrap();
        assert!((eta1 - 0.5).abs() < 1e-15);
        assert!((psi1 + 1.0 / 6.0).abs() < 1e-15);
        let (eta_h, psi_h) = m.entropy_pair_eval(0.5).unwrap();
        assert!((eta_h - 0.125).abs() < 1e-15);
        assert!((psi_h - 1.0 / 24.0).abs() < 1e-15);

        assert_eq!(m.w_eval(0.0).unwrap(), 0.0);
        assert!((m.w_eval(1.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!((m.w_eval(0.5).unwrap() + 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn psi_prime_matches_eta_prime_times_flux_prime() {
        // ψ'(ρ) = ρ (v(ρ) + ρ v'(ρ)) checked by central differences.
        let mut rng = StdRng::seed_from_u64(7);
        let h = 1e-6;
        for model in [greenshields(), VelocityModel::quadratic(0.2, 0.8, 1.0, 0.2).unwrap()] {
            for _ in 0..1000 {
                let rho = rng.gen_range(h..model.rho_jam() - h);
                let fd = (model.psi(rho + h) - model.psi(rho - h)) / (2.0 * h);
                let exact = rho * (model.velocity(rho) + rho * model.velocity_prime(rho));
                let denom = exact.abs().max(1e-3);
                assert!(
                    (fd - exact).abs() / denom <= 1e-6,
                    "psi' mismatch at rho={rho}: fd={fd}, exact={exact}"
                );
            }
        }
    }

    #[test]
    fn w_is_non_increasing() {
        let mut rng = StdRng::seed_from_u64(11);
        for model in [greenshields(), VelocityModel::quadratic(0.2, 0.8, 1.0, 0.2).unwrap()] {
            let mut samples: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..=1.0)).collect();
            samples.sort_by(f64::total_cmp);
            for pair in samples.windows(2) {
                assert!(model.w(pair[1]) <= model.w(pair[0]) + 1e-15);
            }
        }
    }

    #[test]
    fn flux_is_lipschitz_and_vanishes_at_endpoints() {
        let m = greenshields();
        let lip = m.velocity(0.0) + m.rho_jam() * 1.0; // max v + rho_jam·max|v'|
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..500 {
            let a = rng.gen_range(0.0..=1.0);
            let h = rng.gen_range(0.0..0.05_f64).min(1.0 - a);
            let fa = m.local_flux(a).unwrap();
            let fb = m.local_flux(a + h).unwrap();
            assert!((fb - fa).abs() <= lip * h + 1e-14);
        }
    }

    #[test]
    fn flux_extrema_found() {
        let m = greenshields();
        assert_eq!(m.flux_interior_extrema().len(), 1);
        assert!((m.flux_interior_extrema()[0] - 0.5).abs() < 1e-11);
        assert!((m.max_flux_slope() - 1.0).abs() < 1e-12);
    }
}
