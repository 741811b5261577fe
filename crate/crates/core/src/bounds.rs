//! Shannon's inner and outer bounds for finite two-way channels, and the
//! rate-region geometry they are reported in.
//!
//! Both bounds are traced by scalarization: for each weight `mu` on a uniform
//! grid over `[0, 1]` the weighted sum `mu * I(X1;Y2|X2) + (1 - mu) * I(X2;Y1|X1)`
//! is maximized, and the region is the convex hull of every attained pair.
//!
//! * Inner bound: product inputs `p1 x p2`. The weighted sum is concave in
//!   each factor with the other fixed, so the two blocks are ascended in turn,
//!   with seeded random restarts.
//! * Outer bound: arbitrary joint `p(x1, x2)`. The weighted sum is concave in
//!   the joint pmf and is ascended directly.
//!
//! The outer bound proper is a union that need not be convex; what is
//! reported here is its convex hull.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{InputConstraint, TwcChannel};
use crate::error::{Error, Result};
use crate::infocore::{conditional_mi_raw, entropy_of, Direction};
use crate::optim::{maximize_concave, AscentConfig, FeasibleSet};

/// Floor applied inside logarithms of output probabilities in gradients.
const LOG_FLOOR: f64 = 1e-300;

/// An achievable rate pair, nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn new(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }

    pub fn weighted(&self, mu: f64) -> f64 {
        mu * self.r1 + (1.0 - mu) * self.r2
    }
}

/// A convex, downward-closed region containing the origin, stored as its
/// upper-right boundary from `(0, r2_max)` to `(r1_max, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    vertices: Vec<RatePair>,
}

impl RateRegion {
    pub fn vertices(&self) -> &[RatePair] {
        &self.vertices
    }

    /// Rectangle `[0, r1] x [0, r2]`.
    pub fn rectangle(r1: f64, r2: f64) -> Self {
        let r1 = r1.max(0.0);
        let r2 = r2.max(0.0);
        let vertices = match (r1 > 0.0, r2 > 0.0) {
            (false, false) => vec![RatePair::new(0.0, 0.0)],
            (true, false) => vec![RatePair::new(0.0, 0.0), RatePair::new(r1, 0.0)],
            (false, true) => vec![RatePair::new(0.0, r2), RatePair::new(0.0, 0.0)],
            (true, true) => vec![
                RatePair::new(0.0, r2),
                RatePair::new(r1, r2),
                RatePair::new(r1, 0.0),
            ],
        };
        Self { vertices }
    }

    pub fn max_r1(&self) -> f64 {
        self.vertices.iter().map(|v| v.r1).fold(0.0, f64::max)
    }

    pub fn max_r2(&self) -> f64 {
        self.vertices.iter().map(|v| v.r2).fold(0.0, f64::max)
    }

    /// `max r1 cos(theta) + r2 sin(theta)` over the region.
    pub fn support(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.vertices
            .iter()
            .map(|v| c * v.r1 + s * v.r2)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max mu r1 + (1 - mu) r2` over the region.
    pub fn weighted_support(&self, mu: f64) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.weighted(mu))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The corner `(r1_max, r2_max)` when the region is a rectangle.
    pub fn rectangle_corner(&self) -> Option<RatePair> {
        let (a, b) = (self.max_r1(), self.max_r2());
        let tol = 1e-12 * (1.0 + a.max(b));
        self.vertices
            .iter()
            .any(|v| (v.r1 - a).abs() <= tol && (v.r2 - b).abs() <= tol)
            .then(|| RatePair::new(a, b))
    }

    /// Does the region contain `p`, up to `tol` in every support direction?
    pub fn contains(&self, p: RatePair, tol: f64) -> bool {
        if p.r1 < -tol || p.r2 < -tol {
            return false;
        }
        (0..=90).all(|deg| {
            let th = (deg as f64).to_radians();
            let (s, c) = th.sin_cos();
            c * p.r1 + s * p.r2 <= self.support(th) + tol
        }) && p.r1 <= self.max_r1() + tol
            && p.r2 <= self.max_r2() + tol
    }
}

fn cross(o: RatePair, a: RatePair, b: RatePair) -> f64 {
    (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1)
}

/// Relative size below which hull vertices are merged as round-off.
const HULL_RELATIVE_TOL: f64 = 1e-12;

/// Convex, downward-closed hull of a set of rate pairs together with the
/// origin and the axis projections of every point.
pub fn region_hull(points: &[RatePair]) -> Result<RateRegion> {
    if points.is_empty() {
        return Err(Error::Validation(
            "cannot take the hull of no points".into(),
        ));
    }
    if let Some(bad) = points
        .iter()
        .find(|p| !(p.r1.is_finite() && p.r2.is_finite()) || p.r1 < 0.0 || p.r2 < 0.0)
    {
        return Err(Error::Validation(format!(
            "rate pair ({}, {}) is not a nonnegative finite point",
            bad.r1, bad.r2
        )));
    }
    let r1_max = points.iter().map(|p| p.r1).fold(0.0, f64::max);
    let r2_max = points.iter().map(|p| p.r2).fold(0.0, f64::max);
    if r1_max == 0.0 || r2_max == 0.0 {
        return Ok(RateRegion::rectangle(r1_max, r2_max));
    }

    let mut pts: Vec<RatePair> = points.to_vec();
    pts.push(RatePair::new(0.0, r2_max));
    pts.push(RatePair::new(r1_max, 0.0));
    pts.sort_by(|a, b| a.r1.total_cmp(&b.r1).then(b.r2.total_cmp(&a.r2)));
    // points closer than round-off in R1 are one vertex; keep the outermost
    let r1_tol = HULL_RELATIVE_TOL * r1_max;
    pts.dedup_by(|b, a| {
        let same = b.r1 - a.r1 <= r1_tol;
        if same {
            a.r1 = b.r1;
        }
        same
    });
    // and a vertex within round-off of the chord that skips it is dropped
    let dist_tol = HULL_RELATIVE_TOL * r1_max.max(r2_max);
    let negligible = |o: RatePair, a: RatePair, b: RatePair| {
        let chord = (b.r1 - o.r1).hypot(b.r2 - o.r2);
        cross(o, a, b) >= -dist_tol * chord
    };

    let mut hull: Vec<RatePair> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 && negligible(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    // the chain runs from (0, r2_max) to the highest point at r1_max
    if hull.last().is_some_and(|v| v.r2 > 0.0) {
        hull.push(RatePair::new(r1_max, 0.0));
    }
    Ok(RateRegion { vertices: hull })
}

/// Largest support-function excess of `outer` over `inner` on the angular
/// grid `0°, 1°, …, 90°`. Zero when the two agree on that grid.
pub fn region_gap(inner: &RateRegion, outer: &RateRegion) -> f64 {
    (0..=90)
        .map(|deg| {
            let th = (deg as f64).to_radians();
            outer.support(th) - inner.support(th)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest `|support(a, mu) - support(b, mu)|` over a set of weights.
pub fn weighted_support_gap(a: &RateRegion, b: &RateRegion, weights: &[f64]) -> f64 {
    weights
        .iter()
        .map(|&mu| (a.weighted_support(mu) - b.weighted_support(mu)).abs())
        .fold(0.0, f64::max)
}

/// Settings for the scalarized sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Number of weights on the uniform grid over `[0, 1]`.
    pub weights: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Improvement (nats) below which an ascent is considered converged.
    pub tolerance: f64,
    /// Max-norm movement of the pmf below which an ascent stops.
    pub step_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            weights: 33,
            restarts: 8,
            seed: 0x7763,
            max_iterations: 10_000,
            tolerance: 1e-10,
            step_tolerance: 1e-12,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weights < 1 || self.restarts < 1 || self.max_iterations < 1 {
            return Err(Error::Validation(
                "optimizer counts must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.step_tolerance > 0.0) {
            return Err(Error::Validation(
                "optimizer tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The scalarization weights, `k / (weights - 1)`.
    pub fn weight_grid(&self) -> Vec<f64> {
        if self.weights == 1 {
            return vec![0.5];
        }
        (0..self.weights)
            .map(|k| k as f64 / (self.weights - 1) as f64)
            .collect()
    }

    pub(crate) fn ascent(&self) -> AscentConfig {
        AscentConfig {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            step_tolerance: self.step_tolerance,
        }
    }

    /// Independent stream for one (weight, restart) task.
    pub(crate) fn rng_for(&self, task: u64, restart: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(task.wrapping_mul(0x9E37_79B9).wrapping_add(restart));
        rng
    }
}

/// Best pair found for one weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOptimum {
    pub weight: f64,
    pub rates: RatePair,
    pub value: f64,
    /// The maximizing input law: `p1 ++ p2` for the inner bound, the
    /// row-major joint for the outer bound.
    pub input: Vec<f64>,
}

/// A region together with the per-weight optima that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub region: RateRegion,
    pub optima: Vec<WeightedOptimum>,
}

pub(crate) fn feasible_set_for(c: &InputConstraint, n: usize) -> Result<FeasibleSet> {
    c.validate(n)?;
    match c {
        InputConstraint::None => Ok(FeasibleSet::simplex(n)),
        InputConstraint::MeanUpper { cost, budget } => {
            let cheapest = cost
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let mut anchor = vec![0.0; n];
            anchor[cheapest] = 1.0;
            FeasibleSet::with_constraints(n, vec![(cost.clone(), *budget)], anchor)
        }
    }
}

pub(crate) fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn kl_to(row: &[f64], q: &[f64]) -> f64 {
    row.iter()
        .zip(q)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, qq)| w * (w.ln() - qq.max(LOG_FLOOR).ln()))
        .sum()
}

/// Rates `(I(X1;Y2|X2), I(X2;Y1|X1))` under product inputs.
pub fn product_rates(ch: &TwcChannel, p1: &[f64], p2: &[f64]) -> RatePair {
    let joint: Vec<f64> = p1
        .iter()
        .flat_map(|a| p2.iter().map(move |b| a * b))
        .collect();
    joint_rates(ch, &joint)
}

/// Rates under an arbitrary row-major joint input pmf.
pub fn joint_rates(ch: &TwcChannel, joint: &[f64]) -> RatePair {
    RatePair::new(
        conditional_mi_raw(joint, ch, Direction::OneToTwo),
        conditional_mi_raw(joint, ch, Direction::TwoToOne),
    )
}

/// Output law of `Y2` given `x2` for each `x2`, and of `Y1` given `x1`,
/// under product inputs.
fn product_output_laws(ch: &TwcChannel, p1: &[f64], p2: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let y2_given_x2 = (0..ch.nx2())
        .map(|x2| {
            let mut q = vec![0.0; ch.ny2()];
            for (x1, &a) in p1.iter().enumerate() {
                for (qq, w) in q.iter_mut().zip(ch.w2_row(x1, x2)) {
                    *qq += a * w;
                }
            }
            q
        })
        .collect();
    let y1_given_x1 = (0..ch.nx1())
        .map(|x1| {
            let mut q = vec![0.0; ch.ny1()];
            for (x2, &b) in p2.iter().enumerate() {
                for (qq, w) in q.iter_mut().zip(ch.w1_row(x1, x2)) {
                    *qq += b * w;
                }
            }
            q
        })
        .collect();
    (y2_given_x2, y1_given_x1)
}

fn product_gradient_p1(ch: &TwcChannel, p1: &[f64], p2: &[f64], mu: f64) -> Vec<f64> {
    let (q2, q1) = product_output_laws(ch, p1, p2);
    (0..ch.nx1())
        .map(|x1| {
            let mut g1 = 0.0;
            let mut noise1 = 0.0;
            for (x2, &b) in p2.iter().enumerate() {
                g1 += b * (kl_to(ch.w2_row(x1, x2), &q2[x2]) - 1.0);
                noise1 += b * entropy_of(ch.w1_row(x1, x2));
            }
            let g2 = entropy_of(&q1[x1]) - noise1;
            mu * g1 + (1.0 - mu) * g2
        })
        .collect()
}

fn product_gradient_p2(ch: &TwcChannel, p1: &[f64], p2: &[f64], mu: f64) -> Vec<f64> {
    let (q2, q1) = product_output_laws(ch, p1, p2);
    (0..ch.nx2())
        .map(|x2| {
            let mut g2 = 0.0;
            let mut noise2 = 0.0;
            for (x1, &a) in p1.iter().enumerate() {
                g2 += a * (kl_to(ch.w1_row(x1, x2), &q1[x1]) - 1.0);
                noise2 += a * entropy_of(ch.w2_row(x1, x2));
            }
            let g1 = entropy_of(&q2[x2]) - noise2;
            mu * g1 + (1.0 - mu) * g2
        })
        .collect()
}

fn ascend_product(
    ch: &TwcChannel,
    sets: (&FeasibleSet, &FeasibleSet),
    mu: f64,
    start: (Vec<f64>, Vec<f64>),
    cfg: &OptimizerConfig,
) -> (Vec<f64>, Vec<f64>, f64) {
    let ascent = cfg.ascent();
    let (mut p1, mut p2) = (sets.0.project(&start.0), sets.1.project(&start.1));
    let mut value = product_rates(ch, &p1, &p2).weighted(mu);
    for _ in 0..cfg.max_iterations {
        let fixed2 = p2.clone();
        p1 = maximize_concave(
            |p| product_rates(ch, p, &fixed2).weighted(mu),
            |p| product_gradient_p1(ch, p, &fixed2, mu),
            sets.0,
            &p1,
            &ascent,
        )
        .point;
        let fixed1 = p1.clone();
        let r = maximize_concave(
            |p| product_rates(ch, &fixed1, p).weighted(mu),
            |p| product_gradient_p2(ch, &fixed1, p, mu),
            sets.1,
            &p2,
            &ascent,
        );
        p2 = r.point;
        let improved = r.value - value;
        value = value.max(r.value);
        if improved < cfg.tolerance {
            break;
        }
    }
    (p1, p2, value)
}

/// Shannon's inner bound: convex hull over product input distributions.
pub fn inner_bound(
    ch: &TwcChannel,
    c1: &InputConstraint,
    c2: &InputConstraint,
    cfg: &OptimizerConfig,
) -> Result<RateRegion> {
    Ok(inner_bound_report(ch, c1, c2, cfg)?.region)
}

pub fn inner_bound_report(
    ch: &TwcChannel,
    c1: &InputConstraint,
    c2: &InputConstraint,
    cfg: &OptimizerConfig,
) -> Result<BoundReport> {
    cfg.validate()?;
    let s1 = feasible_set_for(c1, ch.nx1())?;
    let s2 = feasible_set_for(c2, ch.nx2())?;
    let weights = cfg.weight_grid();

    let per_weight: Vec<(WeightedOptimum, Vec<RatePair>)> = weights
        .par_iter()
        .enumerate()
        .map(|(k, &mu)| {
            let mut best: Option<WeightedOptimum> = None;
            let mut attained = Vec::with_capacity(cfg.restarts);
            for r in 0..cfg.restarts {
                let start = if r == 0 {
                    (
                        vec![1.0 / ch.nx1() as f64; ch.nx1()],
                        vec![1.0 / ch.nx2() as f64; ch.nx2()],
                    )
                } else {
                    let mut rng = cfg.rng_for(k as u64, r as u64);
                    (
                        random_pmf(&mut rng, ch.nx1()),
                        random_pmf(&mut rng, ch.nx2()),
                    )
                };
                let (p1, p2, value) = ascend_product(ch, (&s1, &s2), mu, start, cfg);
                let rates = product_rates(ch, &p1, &p2);
                attained.push(rates);
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(WeightedOptimum {
                        weight: mu,
                        rates,
                        value,
                        input: [p1, p2].concat(),
                    });
                }
            }
            (best.expect("restarts >= 1"), attained)
        })
        .collect();

    let points: Vec<RatePair> = per_weight
        .iter()
        .flat_map(|(_, a)| a.iter().copied())
        .collect();
    let region = region_hull(&points)?;
    Ok(BoundReport {
        region,
        optima: per_weight.into_iter().map(|(o, _)| o).collect(),
    })
}

/// Gradient of the weighted sum with respect to the joint pmf:
/// `mu D(W2(.|x1,x2) || P(y2|x2)) + (1-mu) D(W1(.|x1,x2) || P(y1|x1))`.
fn joint_gradient(ch: &TwcChannel, joint: &[f64], mu: f64) -> Vec<f64> {
    let (nx1, nx2) = (ch.nx1(), ch.nx2());
    let cond_y2: Vec<Vec<f64>> = (0..nx2)
        .map(|x2| {
            let m: f64 = (0..nx1).map(|x1| joint[x1 * nx2 + x2]).sum();
            let mut q = vec![0.0; ch.ny2()];
            for x1 in 0..nx1 {
                let w = if m > 0.0 {
                    joint[x1 * nx2 + x2] / m
                } else {
                    1.0 / nx1 as f64
                };
                for (qq, v) in q.iter_mut().zip(ch.w2_row(x1, x2)) {
                    *qq += w * v;
                }
            }
            q
        })
        .collect();
    let cond_y1: Vec<Vec<f64>> = (0..nx1)
        .map(|x1| {
            let m: f64 = (0..nx2).map(|x2| joint[x1 * nx2 + x2]).sum();
            let mut q = vec![0.0; ch.ny1()];
            for x2 in 0..nx2 {
                let w = if m > 0.0 {
                    joint[x1 * nx2 + x2] / m
                } else {
                    1.0 / nx2 as f64
                };
                for (qq, v) in q.iter_mut().zip(ch.w1_row(x1, x2)) {
                    *qq += w * v;
                }
            }
            q
        })
        .collect();
    let mut g = Vec::with_capacity(nx1 * nx2);
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            g.push(
                mu * kl_to(ch.w2_row(x1, x2), &cond_y2[x2])
                    + (1.0 - mu) * kl_to(ch.w1_row(x1, x2), &cond_y1[x1]),
            );
        }
    }
    g
}

fn joint_feasible_set(
    ch: &TwcChannel,
    c1: &InputConstraint,
    c2: &InputConstraint,
) -> Result<FeasibleSet> {
    c1.validate(ch.nx1())?;
    c2.validate(ch.nx2())?;
    let (nx1, nx2) = (ch.nx1(), ch.nx2());
    let mut constraints = Vec::new();
    let mut a1 = 0;
    let mut a2 = 0;
    if let InputConstraint::MeanUpper { cost, budget } = c1 {
        constraints.push(((0..nx1 * nx2).map(|k| cost[k / nx2]).collect(), *budget));
        a1 = (0..nx1)
            .min_by(|&a, &b| cost[a].total_cmp(&cost[b]))
            .unwrap_or(0);
    }
    if let InputConstraint::MeanUpper { cost, budget } = c2 {
        constraints.push(((0..nx1 * nx2).map(|k| cost[k % nx2]).collect(), *budget));
        a2 = (0..nx2)
            .min_by(|&a, &b| cost[a].total_cmp(&cost[b]))
            .unwrap_or(0);
    }
    if constraints.is_empty() {
        return Ok(FeasibleSet::simplex(nx1 * nx2));
    }
    let mut anchor = vec![0.0; nx1 * nx2];
    anchor[a1 * nx2 + a2] = 1.0;
    FeasibleSet::with_constraints(nx1 * nx2, constraints, anchor)
}

/// Shannon's outer bound (convex hull) over joint input distributions; the
/// constraints apply to the marginals of `X1` and `X2`.
pub fn outer_bound(
    ch: &TwcChannel,
    c1: &InputConstraint,
    c2: &InputConstraint,
    cfg: &OptimizerConfig,
) -> Result<RateRegion> {
    Ok(outer_bound_report(ch, c1, c2, cfg)?.region)
}

pub fn outer_bound_report(
    ch: &TwcChannel,
    c1: &InputConstraint,
    c2: &InputConstraint,
    cfg: &OptimizerConfig,
) -> Result<BoundReport> {
    cfg.validate()?;
    let set = joint_feasible_set(ch, c1, c2)?;
    let n = ch.nx1() * ch.nx2();
    let ascent = cfg.ascent();
    let weights = cfg.weight_grid();

    let per_weight: Vec<(WeightedOptimum, Vec<RatePair>)> = weights
        .par_iter()
        .enumerate()
        .map(|(k, &mu)| {
            let mut best: Option<WeightedOptimum> = None;
            let mut attained = Vec::with_capacity(cfg.restarts);
            for r in 0..cfg.restarts {
                let start = if r == 0 {
                    vec![1.0 / n as f64; n]
                } else {
                    random_pmf(&mut cfg.rng_for(k as u64, r as u64), n)
                };
                let res = maximize_concave(
                    |p| joint_rates(ch, p).weighted(mu),
                    |p| joint_gradient(ch, p, mu),
                    &set,
                    &start,
                    &ascent,
                );
                let rates = joint_rates(ch, &res.point);
                attained.push(rates);
                if best.as_ref().is_none_or(|b| res.value > b.value) {
                    best = Some(WeightedOptimum {
                        weight: mu,
                        rates,
                        value: res.value,
                        input: res.point,
                    });
                }
            }
            (best.expect("restarts >= 1"), attained)
        })
        .collect();

    let points: Vec<RatePair> = per_weight
        .iter()
        .flat_map(|(_, a)| a.iter().copied())
        .collect();
    let region = region_hull(&points)?;
    Ok(BoundReport {
        region,
        optima: per_weight.into_iter().map(|(o, _)| o).collect(),
    })
}
