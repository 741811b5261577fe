//! Closed-form capacity rectangles for continuous-alphabet additive two-way
//! channels, with quadrature cross-checks.
//!
//! All of these channels are injective semi-deterministic: each terminal
//! subtracts its own signal, so the capacity region is the rectangle of the
//! two one-way capacities. Rates are in nats per channel use.
//!
//! Index convention: `R1` is the rate from terminal 1 to terminal 2, so it is
//! limited by sender 1's budget and receiver 2's noise.

use crate::bounds::{OptimizerConfig, RateRegion};
use crate::error::{Error, Result};
use crate::infocore::{Direction, Pmf};
use crate::optim::{maximize_concave, FeasibleSet};
use crate::quad::{integrate, integrate_with_breaks};

use std::f64::consts::{FRAC_PI_2, PI};

/// Absolute tolerance of every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-8;

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// Additive exponential noise with expected-amplitude constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTwcParams {
    /// Amplitude budgets `E[Xi] <= ai`.
    pub a1: f64,
    pub a2: f64,
    /// Noise means at receivers 1 and 2.
    pub m1: f64,
    pub m2: f64,
}

impl ExpTwcParams {
    pub fn validate(&self) -> Result<()> {
        positive("a1", self.a1)?;
        positive("a2", self.a2)?;
        positive("m1", self.m1)?;
        positive("m2", self.m2)
    }
}

/// Rectangle with corner `(ln(1 + a1/m2), ln(1 + a2/m1))`.
pub fn exp_capacity(p: &ExpTwcParams) -> Result<RateRegion> {
    p.validate()?;
    Ok(RateRegion::rectangle(
        (p.a1 / p.m2).ln_1p(),
        (p.a2 / p.m1).ln_1p(),
    ))
}

/// Capacity-achieving input of the one-way exponential-noise channel: an
/// atom at zero plus an exponential component, normalized so that the
/// output `X + Z` is exponential with mean `a + m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSaddleInput {
    pub atom_mass: f64,
    /// Total mass of the continuous component, `a / (a + m)`.
    pub continuous_mass: f64,
    /// Mean of the continuous component, `a + m`.
    pub scale: f64,
}

pub fn exp_saddle_input(a: f64, m: f64) -> Result<ExpSaddleInput> {
    positive("a", a)?;
    positive("m", m)?;
    Ok(ExpSaddleInput {
        atom_mass: m / (a + m),
        continuous_mass: a / (a + m),
        scale: a + m,
    })
}

impl ExpSaddleInput {
    pub fn mean(&self) -> f64 {
        self.continuous_mass * self.scale
    }

    /// Density of the continuous component at `x >= 0`.
    pub fn continuous_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.continuous_mass / self.scale * (-x / self.scale).exp()
    }

    /// Output density of `X + Z`, `Z ~ Exp(mean noise_mean)`, by numerical convolution.
    pub fn output_density_numeric(&self, y: f64, noise_mean: f64) -> Result<f64> {
        if y < 0.0 {
            return Ok(0.0);
        }
        let noise = |z: f64| (-z / noise_mean).exp() / noise_mean;
        let atom = self.atom_mass * noise(y);
        if y == 0.0 {
            return Ok(atom);
        }
        let conv = integrate(
            |x| self.continuous_density(x) * noise(y - x),
            0.0,
            y,
            QUAD_TOL * 1e-2,
        )?;
        Ok(atom + conv)
    }

    /// `h(X + Z) - h(Z)` with the output density built by numerical
    /// convolution and its entropy by quadrature.
    pub fn mutual_information_numeric(&self, noise_mean: f64) -> Result<f64> {
        positive("noise mean", noise_mean)?;
        let tail = 60.0 * self.scale.max(noise_mean);
        let breaks = [0.0, self.scale, 10.0 * self.scale, tail];
        let err = std::cell::RefCell::new(None);
        // the quadrature must see the whole output law, or its entropy is meaningless
        let mass = integrate_with_breaks(
            |y| match self.output_density_numeric(y, noise_mean) {
                Ok(f) => f,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &breaks,
            QUAD_TOL,
        )?;
        if let Some(e) = err.borrow_mut().take() {
            return Err(e);
        }
        if (mass - 1.0).abs().is_nan() || (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Numeric(format!(
                "output density integrates to {mass} instead of 1; parameters are outside the quadrature's resolution"
            )));
        }
        let h_out = integrate_with_breaks(
            |y| match self.output_density_numeric(y, noise_mean) {
                Ok(f) if f > 0.0 => -f * f.ln(),
                Ok(_) => 0.0,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &breaks,
            QUAD_TOL,
        )?;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        // differential entropy of Exp(mean m) is 1 + ln m
        Ok(h_out - (1.0 + noise_mean.ln()))
    }
}

/// `ln(4 π γ)`, the differential entropy of Cauchy(0, γ).
pub fn cauchy_entropy(gamma: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    Ok((4.0 * PI * gamma).ln())
}

/// `-∫ p ln p` for Cauchy(0, γ) by quadrature, with `x = γ tan u`.
pub fn cauchy_entropy_numeric(gamma: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    // p(x) dx = du / π and -ln p = ln(π γ sec² u)
    let v = integrate(
        |u| {
            let c = u.cos();
            (PI * gamma / (c * c)).ln()
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        QUAD_TOL,
    )?;
    Ok(v / PI)
}

/// Additive Cauchy noise under the logarithmic constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyTwcParams {
    /// Constraint levels `A1, A2`.
    pub a1: f64,
    pub a2: f64,
    /// Noise dispersions at receivers 1 and 2.
    pub gamma1: f64,
    pub gamma2: f64,
}

impl CauchyTwcParams {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [
            ("a1", self.a1),
            ("a2", self.a2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
        ] {
            positive(n, v)?;
        }
        if self.a1 < self.gamma2 {
            return Err(Error::Constraint(format!(
                "a1 = {} is below the dispersion gamma2 = {} it must cover",
                self.a1, self.gamma2
            )));
        }
        if self.a2 < self.gamma1 {
            return Err(Error::Constraint(format!(
                "a2 = {} is below the dispersion gamma1 = {} it must cover",
                self.a2, self.gamma1
            )));
        }
        Ok(())
    }

    /// Effective dispersion budgets at the optimum, `k1 = a1`, `k2 = a2`.
    pub fn effective_budgets(&self) -> (f64, f64) {
        (self.a1, self.a2)
    }

    /// Dispersions of the Cauchy inputs achieving the corner:
    /// `X1 ~ Cauchy(0, a1 - gamma2)`, `X2 ~ Cauchy(0, a2 - gamma1)`.
    pub fn achieving_inputs(&self) -> (f64, f64) {
        (self.a1 - self.gamma2, self.a2 - self.gamma1)
    }
}

/// Rectangle with corner `(ln(a1/γ2), ln(a2/γ1))`.
pub fn cauchy_capacity(p: &CauchyTwcParams) -> Result<RateRegion> {
    p.validate()?;
    Ok(RateRegion::rectangle(
        (p.a1 / p.gamma2).ln(),
        (p.a2 / p.gamma1).ln(),
    ))
}

/// `E[ln(((a + γ)/a)² + (X/a)²)]` for `X ~ Cauchy(0, μ)`, by quadrature.
pub fn cauchy_constraint_value(mu: f64, a: f64, gamma: f64) -> Result<f64> {
    positive("mu", mu)?;
    positive("a", a)?;
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!(
            "gamma must be nonnegative, got {gamma}"
        )));
    }
    let c = (a + gamma) / a;
    let v = integrate(
        |u| {
            let x = mu * u.tan() / a;
            (c * c + x * x).ln()
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        QUAD_TOL,
    )?;
    Ok(v / PI)
}

/// Additive channel with input-dependent Gaussian noise,
/// `Yi = ai Xi + Xj + sqrt(Xj) Z̃i + Ẑi`, `Xi >= 0`.
///
/// Index `i` of the variance arrays refers to receiver `i`. The own-signal
/// term `ai Xi` is known at receiver `i` and does not affect the rates.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDepGaussianParams {
    pub gains: [f64; 2],
    pub sigma_hat_sq: [f64; 2],
    pub sigma_tilde_sq: [f64; 2],
    /// Finite input support shared by both senders.
    pub support: Vec<f64>,
    /// Per-symbol cost and budget for `E[c(X)] <= budget`, if constrained.
    pub cost: Option<(Vec<f64>, f64)>,
}

impl InputDepGaussianParams {
    pub fn validate(&self) -> Result<()> {
        for i in 0..2 {
            positive("sigma_hat_sq", self.sigma_hat_sq[i])?;
            if !(self.sigma_tilde_sq[i].is_finite() && self.sigma_tilde_sq[i] >= 0.0) {
                return Err(Error::Domain("sigma_tilde_sq must be nonnegative".into()));
            }
        }
        if self.support.is_empty() || self.support.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Domain(
                "support points must be finite and nonnegative".into(),
            ));
        }
        if let Some((cost, budget)) = &self.cost {
            if cost.len() != self.support.len() {
                return Err(Error::Validation(
                    "cost vector must match the support".into(),
                ));
            }
            let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
            if *budget < min {
                return Err(Error::Constraint(format!(
                    "budget {budget} is below the cheapest support point cost {min}"
                )));
            }
        }
        Ok(())
    }

    fn receiver(&self, direction: Direction) -> usize {
        match direction {
            Direction::OneToTwo => 1,
            Direction::TwoToOne => 0,
        }
    }

    fn variances(&self, direction: Direction) -> Vec<f64> {
        let r = self.receiver(direction);
        self.support
            .iter()
            .map(|x| x * self.sigma_tilde_sq[r] + self.sigma_hat_sq[r])
            .collect()
    }
}

fn log_normal_pdf(y: f64, mean: f64, var: f64) -> f64 {
    let d = y - mean;
    -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
}

/// `ln Σ_k p_k N(y; x_k, v_k)`.
fn log_mixture(y: f64, probs: &[f64], means: &[f64], vars: &[f64]) -> f64 {
    let terms: Vec<f64> = probs
        .iter()
        .zip(means.iter().zip(vars))
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, (m, v))| p.ln() + log_normal_pdf(y, *m, *v))
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// `D(N(x_k, v_k) || mixture)` for every support point.
fn component_divergences(probs: &[f64], means: &[f64], vars: &[f64]) -> Result<Vec<f64>> {
    let spread = vars.iter().copied().fold(0.0, f64::max).sqrt();
    means
        .iter()
        .zip(vars)
        .map(|(&m, &v)| {
            let sd = v.sqrt();
            let (lo, hi) = (m - 10.0 * sd, m + 10.0 * sd);
            let mut breaks: Vec<f64> = means
                .iter()
                .copied()
                .chain([lo, m - 3.0 * sd, m + 3.0 * sd, hi])
                .filter(|b| *b >= lo && *b <= hi)
                .collect();
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            integrate_with_breaks(
                |y| {
                    let lp = log_normal_pdf(y, m, v);
                    lp.exp() * (lp - log_mixture(y, probs, means, vars))
                },
                &breaks,
                QUAD_TOL * 1e-2 * (1.0 + spread),
            )
        })
        .collect()
}

/// `I(Xi; Yj | Xj) = h(Xi + sqrt(Xi) Z̃j + Ẑj) - E[½ ln(2πe(Xi σ̃j² + σ̂j²))]`
/// for a finite-support input law.
///
/// Evaluated in the equivalent divergence form
/// `Σ_k p_k D(N(x_k, v_k) || Σ_l p_l N(x_l, v_l))`, each term by quadrature
/// over ±10 standard deviations of its component.
pub fn input_dep_gaussian_rate(
    p: &InputDepGaussianParams,
    input: &Pmf,
    direction: Direction,
) -> Result<f64> {
    p.validate()?;
    if input.len() != p.support.len() {
        return Err(Error::Validation(format!(
            "input pmf has {} entries for a support of {} points",
            input.len(),
            p.support.len()
        )));
    }
    if let Some((cost, budget)) = &p.cost {
        let spent: f64 = cost.iter().zip(input.probs()).map(|(c, q)| c * q).sum();
        if spent > budget + 1e-12 {
            return Err(Error::Constraint(format!(
                "expected cost {spent} exceeds budget {budget}"
            )));
        }
    }
    rate_for(p, input.probs(), direction)
}

fn rate_for(p: &InputDepGaussianParams, probs: &[f64], direction: Direction) -> Result<f64> {
    let vars = p.variances(direction);
    let d = component_divergences(probs, &p.support, &vars)?;
    Ok(probs
        .iter()
        .zip(&d)
        .map(|(q, dk)| q * dk)
        .sum::<f64>()
        .max(0.0))
}

/// Result of the restricted-support maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct CbarReport {
    /// Best rate over laws on the declared support; a lower bound on the
    /// maximum over all laws on the half-line.
    pub value: f64,
    pub input: Vec<f64>,
}

/// Maximizes [`input_dep_gaussian_rate`] over pmfs on the declared support
/// under the cost constraint. The objective is concave in the pmf.
pub fn input_dep_gaussian_cbar(
    p: &InputDepGaussianParams,
    direction: Direction,
    cfg: &OptimizerConfig,
) -> Result<CbarReport> {
    p.validate()?;
    cfg.validate()?;
    let n = p.support.len();
    let set = match &p.cost {
        None => FeasibleSet::simplex(n),
        Some((cost, budget)) => {
            let cheapest = (0..n)
                .min_by(|&a, &b| cost[a].total_cmp(&cost[b]))
                .unwrap_or(0);
            let mut anchor = vec![0.0; n];
            anchor[cheapest] = 1.0;
            FeasibleSet::with_constraints(n, vec![(cost.clone(), *budget)], anchor)?
        }
    };
    if n == 1 {
        return Ok(CbarReport {
            value: 0.0,
            input: vec![1.0],
        });
    }
    let vars = p.variances(direction);
    let failure = std::cell::RefCell::new(None);
    let record = |r: Result<Vec<f64>>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            vec![0.0; n]
        }
    };
    let objective = |q: &[f64]| {
        let d = record(component_divergences(q, &p.support, &vars));
        q.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>()
    };
    let gradient = |q: &[f64]| {
        record(component_divergences(q, &p.support, &vars))
            .into_iter()
            .map(|d| d - 1.0)
            .collect::<Vec<f64>>()
    };
    let start = vec![1.0 / n as f64; n];
    let res = maximize_concave(objective, gradient, &set, &start, &cfg.ascent());
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(CbarReport {
        value: res.value.max(0.0),
        input: res.point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::RatePair;
    use std::f64::consts::LN_2;

    fn quick() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    #[test]
    fn exp_capacity_substitution() {
        let r = exp_capacity(&ExpTwcParams {
            a1: 1.0,
            a2: 3.0,
            m1: 1.0,
            m2: 1.0,
        })
        .unwrap();
        assert_eq!(r.rectangle_corner(), Some(RatePair::new(LN_2, 4f64.ln())));
        let r = exp_capacity(&ExpTwcParams {
            a1: 1e-12,
            a2: 1.0,
            m1: 1.0,
            m2: 1.0,
        })
        .unwrap();
        assert!(r.max_r1() < 1e-11);
        // R1 follows sender 1's budget and receiver 2's noise
        let r = exp_capacity(&ExpTwcParams {
            a1: 3.0,
            a2: 1.0,
            m1: 5.0,
            m2: 1.0,
        })
        .unwrap();
        assert!((r.max_r1() - 4f64.ln()).abs() < 1e-15);
        assert!(exp_capacity(&ExpTwcParams {
            a1: 0.0,
            a2: 1.0,
            m1: 1.0,
            m2: 1.0
        })
        .is_err());
    }

    #[test]
    fn exp_saddle_input_shape() {
        let s = exp_saddle_input(1.0, 1.0).unwrap();
        assert_eq!(s.atom_mass, 0.5);
        assert!((s.mean() - 1.0).abs() < 1e-15);
        let total = s.atom_mass + integrate(|x| s.continuous_density(x), 0.0, 80.0, 1e-12).unwrap();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exp_saddle_output_is_exponential() {
        for (a, m) in [(1.0, 1.0), (3.0, 0.5), (1.0, 2.0)] {
            let s = exp_saddle_input(a, m).unwrap();
            for y in [0.0, 0.1, 0.5, 1.0, 2.5, 7.0, 20.0] {
                let f = s.output_density_numeric(y, m).unwrap();
                let target = (-y / (a + m)).exp() / (a + m);
                assert!(
                    (f - target).abs() < 1e-8,
                    "a={a} m={m} y={y}: {f} vs {target}"
                );
            }
        }
    }

    #[test]
    fn exp_saddle_mutual_information() {
        for a in [1.0, 3.0] {
            for m in [0.5, 1.0, 2.0] {
                let mi = exp_saddle_input(a, m)
                    .unwrap()
                    .mutual_information_numeric(m)
                    .unwrap();
                assert!((mi - (a / m).ln_1p()).abs() < 1e-4, "a={a} m={m}: {mi}");
            }
        }
    }

    #[test]
    fn exp_quadrature_outside_resolution_is_numeric_failure() {
        for (a, m) in [(1e300, 1.0), (1.0, 1e-300)] {
            let e = exp_saddle_input(a, m)
                .unwrap()
                .mutual_information_numeric(m)
                .unwrap_err();
            assert!(e.is_numeric(), "a={a} m={m}: {e}");
        }
    }

    #[test]
    fn cauchy_entropy_values() {
        assert!((cauchy_entropy(1.0).unwrap() - 2.531024246969291).abs() < 1e-12);
        assert!((cauchy_entropy(2.0).unwrap() - (2.531024246969291 + LN_2)).abs() < 1e-12);
        assert!(cauchy_entropy(0.0).is_err());
        for g in [0.5, 1.0, 2.0] {
            let q = cauchy_entropy_numeric(g).unwrap();
            assert!(
                (q - cauchy_entropy(g).unwrap()).abs() < 1e-6,
                "gamma={g}: {q}"
            );
        }
    }

    // Independent route: truncated Simpson in x plus the exact tail mass of
    // -p ln p beyond |x| = L, which is bounded and small for L = 1e4 γ.
    #[test]
    fn cauchy_entropy_by_direct_simpson() {
        let g: f64 = 0.5;
        let p = |x: f64| 1.0 / (PI * g * (1.0 + (x / g) * (x / g)));
        let l = 2.0e3 * g;
        let n = 2_000_000;
        let h = 2.0 * l / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let x = -l + k as f64 * h;
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let px = p(x);
            s += w * (-px * px.ln());
        }
        let body = s * h / 3.0;
        // tail: ∫_{|x|>L} -p ln p ≈ (2/π)(γ/L)(ln(π L²/γ) + 2)
        let tail = 2.0 / PI * (g / l) * ((PI * l * l / g).ln() + 2.0);
        assert!((body + tail - cauchy_entropy(g).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn cauchy_capacity_examples() {
        let p = CauchyTwcParams {
            a1: 2.0,
            a2: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
        };
        let r = cauchy_capacity(&p).unwrap();
        assert!((r.max_r1() - LN_2).abs() < 1e-15);
        assert_eq!(r.max_r2(), 0.0);
        assert_eq!(p.achieving_inputs(), (1.0, 0.0));
        let bad = CauchyTwcParams {
            a1: 0.5,
            a2: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
        };
        assert!(matches!(cauchy_capacity(&bad), Err(Error::Constraint(_))));
    }

    #[test]
    fn cauchy_capacity_monotonicity() {
        let base = CauchyTwcParams {
            a1: 2.0,
            a2: 3.0,
            gamma1: 0.5,
            gamma2: 1.0,
        };
        let r0 = cauchy_capacity(&base).unwrap().max_r1();
        let r_more_a = cauchy_capacity(&CauchyTwcParams { a1: 2.5, ..base })
            .unwrap()
            .max_r1();
        let r_more_g = cauchy_capacity(&CauchyTwcParams {
            gamma2: 1.5,
            ..base
        })
        .unwrap()
        .max_r1();
        assert!(r_more_a > r0 && r_more_g < r0);
    }

    #[test]
    fn cauchy_constraint_examples() {
        let ln4 = 4f64.ln();
        for (a, g) in [(2.0, 1.0), (3.0, 0.5), (1.0, 1.0 - 1e-9)] {
            let v = cauchy_constraint_value(a - g, a, g).unwrap();
            assert!((v - ln4).abs() < 1e-6, "a={a} g={g}: {v}");
        }
        let v = cauchy_constraint_value(1.0, 2.0, 1.0).unwrap();
        assert!((v - ln4).abs() < 1e-6);
        // point-mass limit: 2 ln((a + γ)/a)
        let v = cauchy_constraint_value(1e-9, 2.0, 1.0).unwrap();
        assert!((v - 2.0 * 1.5f64.ln()).abs() < 1e-6);
        // closed form 2 ln((a + γ + μ)/a) for general μ
        let v = cauchy_constraint_value(0.7, 2.0, 0.4).unwrap();
        assert!((v - 2.0 * (3.1f64 / 2.0).ln()).abs() < 1e-7);
        assert!(cauchy_constraint_value(0.0, 2.0, 1.0).is_err());
    }

    fn idg(tilde: f64, support: Vec<f64>) -> InputDepGaussianParams {
        InputDepGaussianParams {
            gains: [1.0, 1.0],
            sigma_hat_sq: [1.0, 1.0],
            sigma_tilde_sq: [tilde, tilde],
            support,
            cost: None,
        }
    }

    /// Oracle: h(Y) by composite Simpson on a wide grid minus the Gaussian
    /// conditional entropies.
    fn simpson_rate(p: &InputDepGaussianParams, probs: &[f64]) -> f64 {
        let vars: Vec<f64> = p
            .support
            .iter()
            .map(|x| x * p.sigma_tilde_sq[1] + p.sigma_hat_sq[1])
            .collect();
        let f = |y: f64| -> f64 {
            probs
                .iter()
                .zip(p.support.iter().zip(&vars))
                .map(|(q, (m, v))| {
                    q * (-(y - m) * (y - m) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
                })
                .sum()
        };
        let (lo, hi) = (-30.0, 40.0);
        let n = 400_000;
        let h = (hi - lo) / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let y = lo + k as f64 * h;
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let fy = f(y);
            if fy > 0.0 {
                s += w * (-fy * fy.ln());
            }
        }
        let hy = s * h / 3.0;
        let hyx: f64 = probs
            .iter()
            .zip(&vars)
            .map(|(q, v)| q * 0.5 * (2.0 * PI * std::f64::consts::E * v).ln())
            .sum();
        hy - hyx
    }

    #[test]
    fn idg_point_mass_carries_nothing() {
        let p = idg(0.5, vec![0.0, 1.0]);
        let r =
            input_dep_gaussian_rate(&p, &Pmf::new(vec![1.0, 0.0]).unwrap(), Direction::OneToTwo)
                .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn idg_without_input_noise_is_awgn() {
        let p = idg(0.0, vec![0.0, 2.0]);
        let r =
            input_dep_gaussian_rate(&p, &Pmf::uniform(2).unwrap(), Direction::OneToTwo).unwrap();
        let oracle = simpson_rate(&p, &[0.5, 0.5]);
        assert!((r - oracle).abs() < 1e-6, "{r} vs {oracle}");
    }

    #[test]
    fn idg_with_input_noise_matches_simpson() {
        let p = idg(0.8, vec![0.0, 1.0, 4.0]);
        let probs = [0.3, 0.3, 0.4];
        let r =
            input_dep_gaussian_rate(&p, &Pmf::new(probs.to_vec()).unwrap(), Direction::OneToTwo)
                .unwrap();
        assert!((r - simpson_rate(&p, &probs)).abs() < 1e-6);
    }

    #[test]
    fn idg_cbar_two_point_oracle() {
        let p = idg(0.0, vec![0.0, 1.0]);
        let rep = input_dep_gaussian_cbar(&p, Direction::OneToTwo, &quick()).unwrap();
        // 1-D grid over the Bernoulli parameter
        let oracle = (1..200)
            .map(|k| {
                let q = k as f64 / 200.0;
                input_dep_gaussian_rate(
                    &p,
                    &Pmf::new(vec![1.0 - q, q]).unwrap(),
                    Direction::OneToTwo,
                )
                .unwrap()
            })
            .fold(0.0, f64::max);
        assert!(rep.value >= oracle - 1e-9);
        assert!((rep.value - oracle).abs() < 1e-5);
    }

    #[test]
    fn idg_cbar_trivial_and_monotone() {
        let p = idg(0.3, vec![0.0]);
        assert_eq!(
            input_dep_gaussian_cbar(&p, Direction::OneToTwo, &quick())
                .unwrap()
                .value,
            0.0
        );
        let small =
            input_dep_gaussian_cbar(&idg(0.3, vec![0.0, 2.0]), Direction::OneToTwo, &quick())
                .unwrap();
        let big = input_dep_gaussian_cbar(
            &idg(0.3, vec![0.0, 1.0, 2.0]),
            Direction::OneToTwo,
            &quick(),
        )
        .unwrap();
        assert!(big.value >= small.value - 1e-9);
        let any = input_dep_gaussian_rate(
            &idg(0.3, vec![0.0, 1.0, 2.0]),
            &Pmf::new(vec![0.2, 0.5, 0.3]).unwrap(),
            Direction::OneToTwo,
        )
        .unwrap();
        assert!(any <= big.value + 1e-9);
    }

    #[test]
    fn idg_cost_constraint() {
        let mut p = idg(0.3, vec![0.0, 1.0, 2.0]);
        p.cost = Some((vec![0.0, 1.0, 2.0], 0.5));
        let rep = input_dep_gaussian_cbar(&p, Direction::TwoToOne, &quick()).unwrap();
        let spent: f64 = rep
            .input
            .iter()
            .zip([0.0, 1.0, 2.0])
            .map(|(a, b)| a * b)
            .sum();
        assert!(spent <= 0.5 + 1e-12);
        let over = Pmf::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            input_dep_gaussian_rate(&p, &over, Direction::OneToTwo),
            Err(Error::Constraint(_))
        ));
        p.cost = Some((vec![1.0, 1.0, 2.0], 0.5));
        assert!(matches!(
            input_dep_gaussian_cbar(&p, Direction::OneToTwo, &quick()),
            Err(Error::Constraint(_))
        ));
    }
}
