//! Finite-alphabet entropy and mutual information, all in nats.
//!
//! The convention `0 · ln 0 = 0` is applied entry-wise before summation.

use crate::channel::TwcChannel;
use crate::error::{Error, Result};

/// Simplex membership tolerance. Vectors off by less than this are
/// renormalized, anything further away is rejected.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// `-p ln p` with the zero convention.
#[inline]
pub fn plogp_neg(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

fn check_simplex(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Validation("empty probability vector".into()));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(format!(
                "entry {i} is {p}, expected a nonnegative probability"
            )));
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Validation(format!(
            "probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(sum)
}

/// Rescale a vector that is within [`SIMPLEX_TOL`] of the simplex.
pub(crate) fn normalized(probs: &[f64]) -> Result<Vec<f64>> {
    let sum = check_simplex(probs)?;
    Ok(probs.iter().map(|p| p / sum).collect())
}

/// A probability vector over a labeled finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl Pmf {
    /// Builds a pmf labeled `0..n`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, probs)
    }

    pub fn with_labels(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::Validation(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Validation(format!("duplicate label {l:?}")));
            }
        }
        let probs = normalized(&probs)?;
        Ok(Self { labels, probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("empty alphabet".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::Validation(format!(
                "index {at} outside alphabet of size {n}"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self::new(probs)
    }

    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!(
                "Bernoulli parameter {q} outside [0, 1]"
            )));
        }
        Self::new(vec![1.0 - q, q])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A joint pmf over `X1 x X2`, stored row-major (x1 major).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || probs.len() != rows * cols {
            return Err(Error::Validation(format!(
                "joint pmf of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                probs.len()
            )));
        }
        let probs = normalized(&probs)?;
        Ok(Self { rows, cols, probs })
    }

    /// Product `p1 ⊗ p2`.
    pub fn product(p1: &[f64], p2: &[f64]) -> Result<Self> {
        let probs = p1
            .iter()
            .flat_map(|a| p2.iter().map(move |b| a * b))
            .collect();
        Self::new(p1.len(), p2.len(), probs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, x1: usize, x2: usize) -> f64 {
        self.probs[x1 * self.cols + x2]
    }

    pub fn marginal_x1(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn marginal_x2(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }
}

/// Entropy of a pmf in nats.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

/// Entropy of a raw probability slice; the caller vouches for validity.
pub fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plogp_neg(p)).sum()
}

/// Validating entropy for raw slices.
pub fn entropy_checked(probs: &[f64]) -> Result<f64> {
    check_simplex(probs)?;
    Ok(entropy_of(probs))
}

/// `H2(q) = -q ln q - (1-q) ln(1-q)`, accurate for small `q`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!(
            "binary entropy argument {q} outside [0, 1]"
        )));
    }
    Ok(binary_entropy_unchecked(q))
}

#[inline]
pub(crate) fn binary_entropy_unchecked(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    // ln(1-q) through ln_1p keeps full precision when q is tiny
    -q * q.ln() - (1.0 - q) * (-q).ln_1p()
}

/// Which conditional mutual information of a two-way channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `I(X1; Y2 | X2)`, the rate from terminal 1 to terminal 2.
    OneToTwo,
    /// `I(X2; Y1 | X1)`.
    TwoToOne,
}

/// `H(Y2|X2)` or `H(Y1|X1)`: entropy of the receiver's output given its own input.
pub fn output_entropy_given_own_input(
    joint: &JointPmf,
    ch: &TwcChannel,
    direction: Direction,
) -> Result<f64> {
    check_dims(joint, ch)?;
    Ok(own_input_entropy(joint.probs(), ch, direction))
}

/// `H(Y2|X1,X2)` or `H(Y1|X1,X2)`.
pub fn output_entropy_given_inputs(
    joint: &JointPmf,
    ch: &TwcChannel,
    direction: Direction,
) -> Result<f64> {
    check_dims(joint, ch)?;
    Ok(noise_entropy(joint.probs(), ch, direction))
}

/// Conditional mutual information across the channel, in nats.
///
/// For [`Direction::OneToTwo`] this is `H(Y2|X2) - H(Y2|X1,X2)`, evaluated
/// by explicit finite sums in the equivalent divergence form
/// `Σ p(x1,x2) D(W2(.|x1,x2) || P(y2|x2))`, which is nonnegative term by term
/// and exactly zero for degenerate inputs.
pub fn conditional_mutual_information(
    joint: &JointPmf,
    ch: &TwcChannel,
    direction: Direction,
) -> Result<f64> {
    check_dims(joint, ch)?;
    Ok(conditional_mi_raw(joint.probs(), ch, direction))
}

/// Divergence-form conditional mutual information on a raw row-major joint.
pub(crate) fn conditional_mi_raw(joint: &[f64], ch: &TwcChannel, direction: Direction) -> f64 {
    let (nx1, nx2) = (ch.nx1(), ch.nx2());
    let (n_own, n_other, ny) = match direction {
        Direction::OneToTwo => (nx2, nx1, ch.ny2()),
        Direction::TwoToOne => (nx1, nx2, ch.ny1()),
    };
    let cell = |own: usize, other: usize| match direction {
        Direction::OneToTwo => (other, own),
        Direction::TwoToOne => (own, other),
    };
    let row = |x1: usize, x2: usize| match direction {
        Direction::OneToTwo => ch.w2_row(x1, x2),
        Direction::TwoToOne => ch.w1_row(x1, x2),
    };
    let mut out = vec![0.0; ny];
    let mut mi = 0.0;
    for own in 0..n_own {
        let mass: f64 = (0..n_other)
            .map(|o| {
                let (x1, x2) = cell(own, o);
                joint[x1 * nx2 + x2]
            })
            .sum();
        if mass <= 0.0 {
            continue;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for o in 0..n_other {
            let (x1, x2) = cell(own, o);
            let w = joint[x1 * nx2 + x2] / mass;
            if w > 0.0 {
                for (q, v) in out.iter_mut().zip(row(x1, x2)) {
                    *q += w * v;
                }
            }
        }
        for o in 0..n_other {
            let (x1, x2) = cell(own, o);
            let p = joint[x1 * nx2 + x2];
            if p > 0.0 {
                let d: f64 = row(x1, x2)
                    .iter()
                    .zip(&out)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, q)| w * (w / q).ln())
                    .sum();
                mi += p * d;
            }
        }
    }
    mi.max(0.0)
}

fn check_dims(joint: &JointPmf, ch: &TwcChannel) -> Result<()> {
    if joint.rows() != ch.nx1() || joint.cols() != ch.nx2() {
        return Err(Error::Validation(format!(
            "joint pmf is {}x{} but channel inputs are {}x{}",
            joint.rows(),
            joint.cols(),
            ch.nx1(),
            ch.nx2()
        )));
    }
    Ok(())
}

/// `joint` is a row-major `nx1 x nx2` slice; no validation.
pub(crate) fn own_input_entropy(joint: &[f64], ch: &TwcChannel, direction: Direction) -> f64 {
    let (nx1, nx2) = (ch.nx1(), ch.nx2());
    match direction {
        Direction::OneToTwo => {
            let ny = ch.ny2();
            let mut out = vec![0.0; ny];
            let mut h = 0.0;
            for x2 in 0..nx2 {
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut mass = 0.0;
                for x1 in 0..nx1 {
                    let p = joint[x1 * nx2 + x2];
                    if p == 0.0 {
                        continue;
                    }
                    mass += p;
                    for (o, w) in out.iter_mut().zip(ch.w2_row(x1, x2)) {
                        *o += p * w;
                    }
                }
                if mass > 0.0 {
                    // Σ_y -q ln(q/m) = H(q) + m ln m
                    h += entropy_of(&out) + mass * mass.ln();
                }
            }
            h
        }
        Direction::TwoToOne => {
            let ny = ch.ny1();
            let mut out = vec![0.0; ny];
            let mut h = 0.0;
            for x1 in 0..nx1 {
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut mass = 0.0;
                for x2 in 0..nx2 {
                    let p = joint[x1 * nx2 + x2];
                    if p == 0.0 {
                        continue;
                    }
                    mass += p;
                    for (o, w) in out.iter_mut().zip(ch.w1_row(x1, x2)) {
                        *o += p * w;
                    }
                }
                if mass > 0.0 {
                    h += entropy_of(&out) + mass * mass.ln();
                }
            }
            h
        }
    }
}

pub(crate) fn noise_entropy(joint: &[f64], ch: &TwcChannel, direction: Direction) -> f64 {
    let nx2 = ch.nx2();
    let mut h = 0.0;
    for x1 in 0..ch.nx1() {
        for x2 in 0..nx2 {
            let p = joint[x1 * nx2 + x2];
            if p > 0.0 {
                let row = match direction {
                    Direction::OneToTwo => ch.w2_row(x1, x2),
                    Direction::TwoToOne => ch.w1_row(x1, x2),
                };
                h += p * entropy_of(row);
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{example_binary_multiplier, example_mod2_adder, TwcChannel};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(
            entropy(&Pmf::new(vec![0.5, 0.5]).unwrap()),
            LN2,
            epsilon = 1e-15
        );
        assert_eq!(entropy(&Pmf::new(vec![1.0, 0.0]).unwrap()), 0.0);
        // -0.3 ln 0.3 - 0.7 ln 0.7
        assert_abs_diff_eq!(
            entropy(&Pmf::new(vec![0.3, 0.7]).unwrap()),
            0.610864302054894,
            epsilon = 1e-12
        );
    }

    #[test]
    fn invalid_pmfs_are_rejected() {
        assert!(matches!(
            Pmf::new(vec![-0.1, 1.1]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Pmf::new(vec![0.5, 0.4]),
            Err(Error::Validation(_))
        ));
        assert!(entropy_checked(&[0.6, 0.6]).is_err());
        assert!(Pmf::with_labels(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
        assert!(Pmf::with_labels(vec!["a".into()], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn tiny_drift_is_renormalized() {
        let p = Pmf::new(vec![0.5, 0.5 + 5e-13]).unwrap();
        let s: f64 = p.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), LN2, epsilon = 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            binary_entropy(0.1).unwrap(),
            0.325082973391448,
            epsilon = 1e-12
        );
        assert!(matches!(binary_entropy(1.5), Err(Error::Domain(_))));
        assert!(binary_entropy(-0.01).is_err());
    }

    #[test]
    fn binary_entropy_small_argument_precision() {
        // series: q(1 - ln q) - q^2/2 - q^3/6
        let q: f64 = 1e-9;
        let series = q * (1.0 - q.ln()) - q * q / 2.0 - q * q * q / 6.0;
        assert!((binary_entropy(q).unwrap() - series).abs() < 1e-24);
    }

    #[test]
    fn noiseless_identity_channel_carries_one_bit() {
        // Y2 = X1, Y1 = X2
        let ch = example_mod2_adder(0.0, 0.0).unwrap();
        let joint = JointPmf::product(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let i12 = conditional_mutual_information(&joint, &ch, Direction::OneToTwo).unwrap();
        assert_abs_diff_eq!(i12, LN2, epsilon = 1e-15);
    }

    #[test]
    fn point_mass_input_carries_nothing() {
        let ch = example_mod2_adder(0.1, 0.2).unwrap();
        let joint = JointPmf::product(&[1.0, 0.0], &[0.3, 0.7]).unwrap();
        assert_eq!(
            conditional_mutual_information(&joint, &ch, Direction::OneToTwo).unwrap(),
            0.0
        );
    }

    #[test]
    fn binary_multiplier_hand_expansion() {
        let ch = example_binary_multiplier();
        let joint = JointPmf::product(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let i = conditional_mutual_information(&joint, &ch, Direction::OneToTwo).unwrap();
        // p2(1) * H2(1/2)
        assert_abs_diff_eq!(i, 0.5 * LN2, epsilon = 1e-15);
        assert_abs_diff_eq!(i, 0.346573590279973, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let ch = example_binary_multiplier();
        let joint = JointPmf::product(&[0.5, 0.25, 0.25], &[0.5, 0.5]).unwrap();
        assert!(matches!(
            conditional_mutual_information(&joint, &ch, Direction::OneToTwo),
            Err(Error::Validation(_))
        ));
    }

    fn random_channel(rng: &mut ChaCha8Rng) -> TwcChannel {
        let mut row = |n: usize| {
            let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let w1: Vec<Vec<f64>> = (0..4).map(|_| row(2)).collect();
        let w2: Vec<Vec<f64>> = (0..4).map(|_| row(2)).collect();
        TwcChannel::from_rows(2, 2, w1, w2).unwrap()
    }

    fn random_joint(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().ln()).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    // Permute both input alphabets and both output alphabets consistently.
    #[test]
    fn mutual_information_invariant_under_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let ch = random_channel(&mut rng);
            let p = random_joint(&mut rng, 4);
            let joint = JointPmf::new(2, 2, p.clone()).unwrap();
            let mut px1 = [0usize, 1];
            let mut px2 = [0usize, 1];
            let mut py1 = [0usize, 1];
            let mut py2 = [0usize, 1];
            px1.shuffle(&mut rng);
            px2.shuffle(&mut rng);
            py1.shuffle(&mut rng);
            py2.shuffle(&mut rng);

            let mut w1 = vec![vec![0.0; 2]; 4];
            let mut w2 = vec![vec![0.0; 2]; 4];
            let mut q = vec![0.0; 4];
            for x1 in 0..2 {
                for x2 in 0..2 {
                    let (a, b) = (px1[x1], px2[x2]);
                    q[a * 2 + b] = joint.get(x1, x2);
                    for y in 0..2 {
                        w1[a * 2 + b][py1[y]] = ch.w1_row(x1, x2)[y];
                        w2[a * 2 + b][py2[y]] = ch.w2_row(x1, x2)[y];
                    }
                }
            }
            let ch2 = TwcChannel::from_rows(2, 2, w1, w2).unwrap();
            let joint2 = JointPmf::new(2, 2, q).unwrap();
            for d in [Direction::OneToTwo, Direction::TwoToOne] {
                let a = conditional_mutual_information(&joint, &ch, d).unwrap();
                let b = conditional_mutual_information(&joint2, &ch2, d).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn entropy_bounded_by_log_alphabet(raw in prop::collection::vec(0.0f64..1.0, 1..12)) {
            let s: f64 = raw.iter().sum();
            prop_assume!(s > 1e-6);
            let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let h = entropy(&Pmf::new(p.clone()).unwrap());
            let n = p.len() as f64;
            prop_assert!(h >= 0.0);
            prop_assert!(h <= n.ln() + 1e-12);
        }

        #[test]
        fn uniform_attains_log_alphabet(n in 1usize..64) {
            let h = entropy(&Pmf::uniform(n).unwrap());
            prop_assert!((h - (n as f64).ln()).abs() < 1e-12);
        }

        #[test]
        fn conditioning_reduces_entropy(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ch = random_channel(&mut rng);
            let joint = JointPmf::new(2, 2, random_joint(&mut rng, 4)).unwrap();
            for d in [Direction::OneToTwo, Direction::TwoToOne] {
                let own = output_entropy_given_own_input(&joint, &ch, d).unwrap();
                let both = output_entropy_given_inputs(&joint, &ch, d).unwrap();
                prop_assert!(own >= both - 1e-14);
                prop_assert!(own <= 2f64.ln() + 1e-14);
                let mi = conditional_mutual_information(&joint, &ch, d).unwrap();
                prop_assert!((mi - (own - both)).abs() < 1e-13);
            }
        }
    }
}
