//! Concave maximization over probability simplices with mean-cost constraints.
//!
//! Projection is Euclidean. Each linear cost constraint `c·p <= b` enters the
//! projection through a nonnegative dual variable; with one constraint the
//! dual is found by bisection, with several by cyclic bisection over the
//! duals followed by a convex step toward a feasible anchor so that returned
//! points are exactly feasible.

use crate::error::{Error, Result};

/// Euclidean projection of `y` onto the probability simplex.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in u.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[derive(Debug, Clone)]
struct Halfspace {
    cost: Vec<f64>,
    budget: f64,
}

impl Halfspace {
    fn slack(&self, p: &[f64]) -> f64 {
        self.budget - self.cost.iter().zip(p).map(|(c, q)| c * q).sum::<f64>()
    }
}

/// The probability simplex intersected with zero or more `c·p <= b` halfspaces.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    anchor: Vec<f64>,
}

const DUAL_BISECTIONS: usize = 200;
const DUAL_SWEEPS: usize = 60;

impl FeasibleSet {
    pub fn simplex(dim: usize) -> Self {
        let mut anchor = vec![0.0; dim];
        if dim > 0 {
            anchor[0] = 1.0;
        }
        Self {
            dim,
            halfspaces: Vec::new(),
            anchor,
        }
    }

    /// Simplex with linear cost constraints. `anchor` must satisfy every
    /// constraint; it is used to restore exact feasibility after projection.
    pub fn with_constraints(
        dim: usize,
        constraints: Vec<(Vec<f64>, f64)>,
        anchor: Vec<f64>,
    ) -> Result<Self> {
        if anchor.len() != dim {
            return Err(Error::Validation("anchor dimension mismatch".into()));
        }
        let halfspaces: Vec<Halfspace> = constraints
            .into_iter()
            .map(|(cost, budget)| Halfspace { cost, budget })
            .collect();
        for h in &halfspaces {
            if h.cost.len() != dim {
                return Err(Error::Validation("cost dimension mismatch".into()));
            }
            if h.slack(&anchor) < 0.0 {
                return Err(Error::Constraint("no feasible input distribution".into()));
            }
        }
        Ok(Self {
            dim,
            halfspaces,
            anchor,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        let sum: f64 = p.iter().sum();
        p.len() == self.dim
            && p.iter().all(|&q| q >= 0.0)
            && (sum - 1.0).abs() <= tol
            && self.halfspaces.iter().all(|h| h.slack(p) >= -tol)
    }

    fn shifted(&self, y: &[f64], duals: &[f64]) -> Vec<f64> {
        let mut z = y.to_vec();
        for (h, &nu) in self.halfspaces.iter().zip(duals) {
            if nu > 0.0 {
                for (zi, c) in z.iter_mut().zip(&h.cost) {
                    *zi -= nu * c;
                }
            }
        }
        project_simplex(&z)
    }

    /// Euclidean projection onto the feasible set.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let base = project_simplex(y);
        if self.halfspaces.iter().all(|h| h.slack(&base) >= 0.0) {
            return base;
        }
        let mut duals = vec![0.0; self.halfspaces.len()];
        let sweeps = if self.halfspaces.len() == 1 {
            1
        } else {
            DUAL_SWEEPS
        };
        for _ in 0..sweeps {
            let mut changed = false;
            for k in 0..self.halfspaces.len() {
                let old = duals[k];
                duals[k] = 0.0;
                if self.halfspaces[k].slack(&self.shifted(y, &duals)) >= 0.0 {
                    changed |= old != 0.0;
                    continue;
                }
                // slack is nondecreasing in the dual; grow an upper bracket
                let mut hi = 1.0;
                loop {
                    duals[k] = hi;
                    if self.halfspaces[k].slack(&self.shifted(y, &duals)) >= 0.0 || hi > 1e12 {
                        break;
                    }
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..DUAL_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    duals[k] = mid;
                    if self.halfspaces[k].slack(&self.shifted(y, &duals)) >= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                duals[k] = hi;
                changed |= (hi - old).abs() > 1e-15 * hi.max(1.0);
            }
            if !changed {
                break;
            }
        }
        let p = self.shifted(y, &duals);
        self.repair(p)
    }

    /// Smallest convex step toward the anchor that satisfies every constraint.
    fn repair(&self, p: Vec<f64>) -> Vec<f64> {
        let mut theta: f64 = 0.0;
        for h in &self.halfspaces {
            let sp = h.slack(&p);
            if sp < 0.0 {
                let sa = h.slack(&self.anchor);
                let t = if sa - sp > 0.0 { -sp / (sa - sp) } else { 1.0 };
                theta = theta.max(t.min(1.0));
            }
        }
        if theta == 0.0 {
            return p;
        }
        p.iter()
            .zip(&self.anchor)
            .map(|(a, b)| (1.0 - theta) * a + theta * b)
            .collect()
    }
}

/// Stopping rules for [`maximize_concave`].
#[derive(Debug, Clone, Copy)]
pub struct AscentConfig {
    pub max_iterations: usize,
    /// Stop once an accepted step gains less than this (nats).
    pub tolerance: f64,
    /// Stop once an accepted step moves less than this in max-norm.
    pub step_tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct AscentResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Projected gradient ascent with backtracking (Armijo) step control.
///
/// `objective` must be concave on the feasible set; `gradient` may return
/// large finite values near the boundary.
pub fn maximize_concave<F, G>(
    objective: F,
    gradient: G,
    set: &FeasibleSet,
    start: &[f64],
    cfg: &AscentConfig,
) -> AscentResult
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = set.project(start);
    let mut fx = objective(&x);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut small_gains = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let g = gradient(&x);
        let mut accepted = None;
        while step > 1e-14 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let y = set.project(&trial);
            let predicted: f64 = g
                .iter()
                .zip(y.iter().zip(&x))
                .map(|(gi, (yi, xi))| gi * (yi - xi))
                .sum();
            let fy = objective(&y);
            if fy >= fx + 1e-4 * predicted && fy >= fx {
                accepted = Some((y, fy));
                break;
            }
            step *= 0.5;
        }
        let Some((y, fy)) = accepted else { break };
        let moved = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let gain = fy - fx;
        x = y;
        fx = fy;
        if moved < cfg.step_tolerance {
            break;
        }
        if gain < cfg.tolerance {
            small_gains += 1;
            if small_gains >= 3 {
                break;
            }
        } else {
            small_gains = 0;
        }
        step = (step * 2.0).min(1e6);
    }
    AscentResult {
        point: x,
        value: fx,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simplex_projection_known_cases() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_simplex(&[2.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0]);
        let p = project_simplex(&[0.0, 0.0, 0.0]);
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constrained_projection_hits_budget() {
        let set =
            FeasibleSet::with_constraints(2, vec![(vec![0.0, 1.0], 0.3)], vec![1.0, 0.0]).unwrap();
        let p = set.project(&[0.0, 1.0]);
        assert!((p[1] - 0.3).abs() < 1e-12, "{p:?}");
        assert!(set.contains(&p, 0.0));
    }

    #[test]
    fn two_constraints_are_both_enforced() {
        // product-cost structure on a 2x2 joint, x1 major
        let c1 = vec![0.0, 0.0, 1.0, 1.0];
        let c2 = vec![0.0, 1.0, 0.0, 1.0];
        let set =
            FeasibleSet::with_constraints(4, vec![(c1, 0.3), (c2, 0.2)], vec![1.0, 0.0, 0.0, 0.0])
                .unwrap();
        let p = set.project(&[0.0, 0.1, 0.2, 0.9]);
        assert!(set.contains(&p, 1e-12), "{p:?}");
    }

    #[test]
    fn infeasible_anchor_is_rejected() {
        let r = FeasibleSet::with_constraints(2, vec![(vec![1.0, 2.0], 0.5)], vec![1.0, 0.0]);
        assert!(matches!(r, Err(Error::Constraint(_))));
    }

    #[test]
    fn ascent_finds_entropy_maximum() {
        let set = FeasibleSet::simplex(3);
        let cfg = AscentConfig {
            max_iterations: 10_000,
            tolerance: 1e-14,
            step_tolerance: 1e-14,
        };
        let h = |p: &[f64]| {
            p.iter()
                .map(|&q| if q > 0.0 { -q * q.ln() } else { 0.0 })
                .sum::<f64>()
        };
        let g = |p: &[f64]| {
            p.iter()
                .map(|&q| -(q.max(1e-300)).ln() - 1.0)
                .collect::<Vec<_>>()
        };
        let r = maximize_concave(h, g, &set, &[0.9, 0.05, 0.05], &cfg);
        assert!((r.value - 3f64.ln()).abs() < 1e-10, "{r:?}");
    }

    proptest! {
        #[test]
        fn projection_lands_on_simplex(y in prop::collection::vec(-3.0f64..3.0, 1..10)) {
            let p = project_simplex(&y);
            let s: f64 = p.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn projection_is_idempotent(y in prop::collection::vec(-3.0f64..3.0, 2..8), b in 0.05f64..0.9) {
            let n = y.len();
            let cost: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let mut anchor = vec![0.0; n];
            anchor[0] = 1.0;
            let set = FeasibleSet::with_constraints(n, vec![(cost, b)], anchor).unwrap();
            let p = set.project(&y);
            prop_assert!(set.contains(&p, 1e-12));
            let q = set.project(&p);
            for (a, c) in p.iter().zip(&q) {
                prop_assert!((a - c).abs() < 1e-9);
            }
        }
    }
}
