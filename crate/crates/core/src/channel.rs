//! Finite-alphabet two-way channels and the named example channels.

use crate::error::{Error, Result};
use crate::infocore::SIMPLEX_TOL;

/// A memoryless two-way channel given by its two marginal transition laws
/// `W1(y1 | x1, x2)` and `W2(y2 | x1, x2)`.
///
/// Rows are stored flat, indexed by `x1 * nx2 + x2`. Alphabets are the index
/// sets `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwcChannel {
    nx1: usize,
    nx2: usize,
    ny1: usize,
    ny2: usize,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

fn validate_rows(name: &str, nx1: usize, nx2: usize, ny: usize, rows: &mut [f64]) -> Result<()> {
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            let row = &mut rows[(x1 * nx2 + x2) * ny..(x1 * nx2 + x2 + 1) * ny];
            if let Some(bad) = row
                .iter()
                .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
            {
                return Err(Error::Validation(format!(
                    "{name} row (x1={x1}, x2={x2}) has entry {bad} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::Validation(format!(
                    "{name} row (x1={x1}, x2={x2}) sums to {sum}, expected 1"
                )));
            }
            row.iter_mut().for_each(|p| *p /= sum);
        }
    }
    Ok(())
}

impl TwcChannel {
    /// Builds a channel from flat tensors of shape `nx1 x nx2 x ny` (x1 major).
    pub fn new(
        nx1: usize,
        nx2: usize,
        ny1: usize,
        ny2: usize,
        mut w1: Vec<f64>,
        mut w2: Vec<f64>,
    ) -> Result<Self> {
        if nx1 == 0 || nx2 == 0 || ny1 == 0 || ny2 == 0 {
            return Err(Error::Validation("alphabet sizes must be positive".into()));
        }
        if w1.len() != nx1 * nx2 * ny1 {
            return Err(Error::Validation(format!(
                "W1 has {} entries, expected {}x{}x{}",
                w1.len(),
                nx1,
                nx2,
                ny1
            )));
        }
        if w2.len() != nx1 * nx2 * ny2 {
            return Err(Error::Validation(format!(
                "W2 has {} entries, expected {}x{}x{}",
                w2.len(),
                nx1,
                nx2,
                ny2
            )));
        }
        validate_rows("W1", nx1, nx2, ny1, &mut w1)?;
        validate_rows("W2", nx1, nx2, ny2, &mut w2)?;
        Ok(Self {
            nx1,
            nx2,
            ny1,
            ny2,
            w1,
            w2,
        })
    }

    /// Builds a channel from per-input rows, `rows[x1 * nx2 + x2]`.
    pub fn from_rows(nx1: usize, nx2: usize, w1: Vec<Vec<f64>>, w2: Vec<Vec<f64>>) -> Result<Self> {
        let ny1 = w1.first().map_or(0, Vec::len);
        let ny2 = w2.first().map_or(0, Vec::len);
        if w1.len() != nx1 * nx2 || w2.len() != nx1 * nx2 {
            return Err(Error::Validation(format!(
                "expected {} rows per output, got {} and {}",
                nx1 * nx2,
                w1.len(),
                w2.len()
            )));
        }
        if w1.iter().any(|r| r.len() != ny1) || w2.iter().any(|r| r.len() != ny2) {
            return Err(Error::Validation("ragged transition rows".into()));
        }
        Self::new(nx1, nx2, ny1, ny2, w1.concat(), w2.concat())
    }

    pub fn nx1(&self) -> usize {
        self.nx1
    }
    pub fn nx2(&self) -> usize {
        self.nx2
    }
    pub fn ny1(&self) -> usize {
        self.ny1
    }
    pub fn ny2(&self) -> usize {
        self.ny2
    }

    /// `W1(. | x1, x2)`.
    #[inline]
    pub fn w1_row(&self, x1: usize, x2: usize) -> &[f64] {
        let k = x1 * self.nx2 + x2;
        &self.w1[k * self.ny1..(k + 1) * self.ny1]
    }

    /// `W2(. | x1, x2)`.
    #[inline]
    pub fn w2_row(&self, x1: usize, x2: usize) -> &[f64] {
        let k = x1 * self.nx2 + x2;
        &self.w2[k * self.ny2..(k + 1) * self.ny2]
    }

    /// Largest absolute entry-wise difference to another channel of the same shape.
    pub fn max_abs_diff(&self, other: &TwcChannel) -> Option<f64> {
        if (self.nx1, self.nx2, self.ny1, self.ny2) != (other.nx1, other.nx2, other.ny1, other.ny2)
        {
            return None;
        }
        let d = self
            .w1
            .iter()
            .zip(&other.w1)
            .chain(self.w2.iter().zip(&other.w2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Some(d)
    }
}

/// A mean-cost constraint `E[c(X)] <= budget` on one input, or none.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InputConstraint {
    #[default]
    None,
    MeanUpper {
        cost: Vec<f64>,
        budget: f64,
    },
}

impl InputConstraint {
    pub fn mean_upper(cost: Vec<f64>, budget: f64) -> Self {
        InputConstraint::MeanUpper { cost, budget }
    }

    /// Checks the cost vector against an alphabet and that some input is affordable.
    pub fn validate(&self, alphabet: usize) -> Result<()> {
        match self {
            InputConstraint::None => Ok(()),
            InputConstraint::MeanUpper { cost, budget } => {
                if cost.len() != alphabet {
                    return Err(Error::Validation(format!(
                        "cost vector has {} entries for an alphabet of size {alphabet}",
                        cost.len()
                    )));
                }
                if cost
                    .iter()
                    .chain(std::iter::once(budget))
                    .any(|c| !c.is_finite())
                {
                    return Err(Error::Validation("non-finite cost or budget".into()));
                }
                let min = cost.iter().copied().fold(f64::INFINITY, f64::min);
                if *budget < min {
                    return Err(Error::Constraint(format!(
                        "budget {budget} is below the cheapest input cost {min}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_satisfied(&self, p: &[f64], tol: f64) -> bool {
        match self {
            InputConstraint::None => true,
            InputConstraint::MeanUpper { cost, budget } => {
                let spent: f64 = cost.iter().zip(p).map(|(c, q)| c * q).sum();
                spent <= budget + tol
            }
        }
    }
}

fn check_crossover(c: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&c) {
        return Err(Error::Domain(format!(
            "crossover probability {c} outside [0, 1/2]"
        )));
    }
    Ok(())
}

/// Binary channel `Yi = X1 xor X2 xor Zi` with `Zi ~ Bern(crossover_i)`.
pub fn example_mod2_adder(crossover1: f64, crossover2: f64) -> Result<TwcChannel> {
    check_crossover(crossover1)?;
    check_crossover(crossover2)?;
    let row = |x: usize, c: f64| {
        if x == 0 {
            vec![1.0 - c, c]
        } else {
            vec![c, 1.0 - c]
        }
    };
    let mut w1 = Vec::with_capacity(4);
    let mut w2 = Vec::with_capacity(4);
    for x1 in 0..2 {
        for x2 in 0..2 {
            w1.push(row(x1 ^ x2, crossover1));
            w2.push(row(x1 ^ x2, crossover2));
        }
    }
    TwcChannel::from_rows(2, 2, w1, w2)
}

/// Shannon's binary multiplier channel, `Y1 = Y2 = X1 X2`.
pub fn example_binary_multiplier() -> TwcChannel {
    let mut rows = Vec::with_capacity(4);
    for x1 in 0..2 {
        for x2 in 0..2 {
            let y = x1 * x2;
            rows.push(if y == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            });
        }
    }
    TwcChannel::from_rows(2, 2, rows.clone(), rows).expect("one-hot rows are stochastic")
}

/// Binary channel with `Y1 = X2`, and `Y2 = X1` when `X2 = 0`, a fair coin otherwise.
pub fn example_shannon_table2() -> TwcChannel {
    let mut w1 = Vec::with_capacity(4);
    let mut w2 = Vec::with_capacity(4);
    for x1 in 0..2 {
        for x2 in 0..2 {
            w1.push(if x2 == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            });
            w2.push(match (x1, x2) {
                (0, 0) => vec![1.0, 0.0],
                (1, 0) => vec![0.0, 1.0],
                _ => vec![0.5, 0.5],
            });
        }
    }
    TwcChannel::from_rows(2, 2, w1, w2).expect("rows are stochastic")
}
