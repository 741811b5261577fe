//! Injective semi-deterministic (ISD) two-way channels.
//!
//! An ISD channel has `Yi = fi(Xi, Ti)` and `Ti = gi(Xj, Zi)` where, for every
//! fixed first argument, `fi` is one-to-one in `Ti` and `gi` is one-to-one in
//! `Zi`, and the noises `Z1, Z2` are independent of the inputs. For such a
//! channel Shannon's inner and outer bounds coincide and the capacity region
//! is the rectangle
//! `Ri <= max_{p(xi)} H(gj(Xi, Zj)) - H(Zj)`.
//!
//! The checkers here also probe the two entropy conditions behind that
//! result on arbitrary finite channels: C1 (the noise entropy
//! `H(Yi | X1, X2)` does not depend on `p(x1 | x2)`) and C2 (for every joint
//! input there is a product input with the same `X2` marginal whose output
//! entropies `H(Yi | Xi)` are at least as large).

use rayon::prelude::*;

use crate::bounds::{feasible_set_for, random_pmf, OptimizerConfig, RateRegion};
use crate::channel::{InputConstraint, TwcChannel};
use crate::error::{Error, Result};
use crate::infocore::{entropy_of, own_input_entropy, Direction, JointPmf, Pmf};
use crate::optim::{maximize_concave, AscentConfig, FeasibleSet};

/// One of the four maps of an ISD structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsdMap {
    /// `g1 : X2 x Z1 -> T1`
    G1,
    /// `f1 : X1 x T1 -> Y1`
    F1,
    /// `g2 : X1 x Z2 -> T2`
    G2,
    /// `f2 : X2 x T2 -> Y2`
    F2,
}

impl std::fmt::Display for IsdMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IsdMap::G1 => "g1",
            IsdMap::F1 => "f1",
            IsdMap::G2 => "g2",
            IsdMap::F2 => "f2",
        })
    }
}

/// Finite tables for `g1, f1, g2, f2` and the noise laws.
///
/// Tables are indexed `[fixed input][second argument]` and hold indices into
/// the codomain alphabet. Input labels are kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct IsdStructure {
    x1_labels: Vec<i64>,
    x2_labels: Vec<i64>,
    g1: Vec<Vec<usize>>,
    f1: Vec<Vec<usize>>,
    g2: Vec<Vec<usize>>,
    f2: Vec<Vec<usize>>,
    pz1: Pmf,
    pz2: Pmf,
    ny1: usize,
    ny2: usize,
}

fn check_table(
    name: &str,
    table: &[Vec<usize>],
    rows: usize,
    cols: usize,
    codomain: Option<usize>,
) -> Result<()> {
    if table.len() != rows {
        return Err(Error::Structure(format!(
            "{name} has {} rows, expected {rows}",
            table.len()
        )));
    }
    for (i, r) in table.iter().enumerate() {
        if r.len() != cols {
            return Err(Error::Structure(format!(
                "{name} row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        if let Some(n) = codomain {
            if let Some(v) = r.iter().find(|&&v| v >= n) {
                return Err(Error::Structure(format!(
                    "{name} row {i} maps to {v}, outside the codomain of size {n}"
                )));
            }
        }
    }
    Ok(())
}

impl IsdStructure {
    /// Builds a structure from index tables; the input alphabets are labeled `0..n`.
    ///
    /// Shapes: `g1[x2][z1]`, `f1[x1][t1]`, `g2[x1][z2]`, `f2[x2][t2]`.
    pub fn new(
        g1: Vec<Vec<usize>>,
        f1: Vec<Vec<usize>>,
        g2: Vec<Vec<usize>>,
        f2: Vec<Vec<usize>>,
        pz1: Pmf,
        pz2: Pmf,
    ) -> Result<Self> {
        let nx1 = f1.len();
        let nx2 = f2.len();
        if nx1 == 0 || nx2 == 0 {
            return Err(Error::Structure("empty input alphabet".into()));
        }
        let nt1 = f1[0].len();
        let nt2 = f2[0].len();
        check_table("f1", &f1, nx1, nt1, None)?;
        check_table("f2", &f2, nx2, nt2, None)?;
        check_table("g1", &g1, nx2, pz1.len(), Some(nt1))?;
        check_table("g2", &g2, nx1, pz2.len(), Some(nt2))?;
        let ny1 = f1.iter().flatten().max().map_or(1, |m| m + 1);
        let ny2 = f2.iter().flatten().max().map_or(1, |m| m + 1);
        Ok(Self {
            x1_labels: (0..nx1 as i64).collect(),
            x2_labels: (0..nx2 as i64).collect(),
            g1,
            f1,
            g2,
            f2,
            pz1,
            pz2,
            ny1,
            ny2,
        })
    }

    /// Builds a structure from maps over integer-valued alphabets. The `T`
    /// and `Y` alphabets are the sorted images of the maps.
    #[allow(clippy::too_many_arguments)]
    pub fn from_maps(
        x1: &[i64],
        x2: &[i64],
        z1: &[i64],
        z2: &[i64],
        g1: impl Fn(i64, i64) -> i64,
        f1: impl Fn(i64, i64) -> i64,
        g2: impl Fn(i64, i64) -> i64,
        f2: impl Fn(i64, i64) -> i64,
        pz1: Pmf,
        pz2: Pmf,
    ) -> Result<Self> {
        fn image(values: impl Iterator<Item = i64>) -> Vec<i64> {
            let mut v: Vec<i64> = values.collect();
            v.sort_unstable();
            v.dedup();
            v
        }
        fn idx(alpha: &[i64], v: i64) -> usize {
            alpha
                .binary_search(&v)
                .expect("value drawn from the same image")
        }
        let t1 = image(
            x2.iter()
                .flat_map(|&a| z1.iter().map(move |&z| (a, z)))
                .map(|(a, z)| g1(a, z)),
        );
        let t2 = image(
            x1.iter()
                .flat_map(|&a| z2.iter().map(move |&z| (a, z)))
                .map(|(a, z)| g2(a, z)),
        );
        let y1 = image(
            x1.iter()
                .flat_map(|&a| t1.iter().map(move |&t| (a, t)))
                .map(|(a, t)| f1(a, t)),
        );
        let y2 = image(
            x2.iter()
                .flat_map(|&a| t2.iter().map(move |&t| (a, t)))
                .map(|(a, t)| f2(a, t)),
        );

        let g1t = x2
            .iter()
            .map(|&a| z1.iter().map(|&z| idx(&t1, g1(a, z))).collect())
            .collect();
        let f1t = x1
            .iter()
            .map(|&a| t1.iter().map(|&t| idx(&y1, f1(a, t))).collect())
            .collect();
        let g2t = x1
            .iter()
            .map(|&a| z2.iter().map(|&z| idx(&t2, g2(a, z))).collect())
            .collect();
        let f2t = x2
            .iter()
            .map(|&a| t2.iter().map(|&t| idx(&y2, f2(a, t))).collect())
            .collect();
        let mut s = Self::new(g1t, f1t, g2t, f2t, pz1, pz2)?;
        s.x1_labels = x1.to_vec();
        s.x2_labels = x2.to_vec();
        s.ny1 = y1.len();
        s.ny2 = y2.len();
        Ok(s)
    }

    pub fn nx1(&self) -> usize {
        self.f1.len()
    }
    pub fn nx2(&self) -> usize {
        self.f2.len()
    }
    pub fn pz1(&self) -> &Pmf {
        &self.pz1
    }
    pub fn pz2(&self) -> &Pmf {
        &self.pz2
    }
    pub fn tables(&self) -> [&[Vec<usize>]; 4] {
        [&self.g1, &self.f1, &self.g2, &self.f2]
    }

    /// Transition law of `T2 = g2(X1, Z2)` given `x1` (and of `T1` given `x2`).
    fn noise_kernel(g: &[Vec<usize>], pz: &Pmf, nt: usize) -> Vec<Vec<f64>> {
        g.iter()
            .map(|row| {
                let mut k = vec![0.0; nt];
                for (&t, &p) in row.iter().zip(pz.probs()) {
                    k[t] += p;
                }
                k
            })
            .collect()
    }
}

/// The first injectivity violation found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectivityWitness {
    pub map: IsdMap,
    /// Index of the fixed input symbol.
    pub fixed_input: usize,
    /// Its label.
    pub fixed_label: i64,
    /// Two distinct second arguments with the same image.
    pub collision: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Injectivity {
    Holds,
    Violated(InjectivityWitness),
}

impl Injectivity {
    pub fn holds(&self) -> bool {
        matches!(self, Injectivity::Holds)
    }
}

fn first_collision(table: &[Vec<usize>]) -> Option<(usize, (usize, usize))> {
    for (i, row) in table.iter().enumerate() {
        for a in 0..row.len() {
            for b in a + 1..row.len() {
                if row[a] == row[b] {
                    return Some((i, (a, b)));
                }
            }
        }
    }
    None
}

/// Checks that each `fi(xi, .)` and `gi(xj, .)` is one-to-one.
pub fn check_injectivity(s: &IsdStructure) -> Injectivity {
    let checks = [
        (IsdMap::G1, &s.g1, &s.x2_labels),
        (IsdMap::F1, &s.f1, &s.x1_labels),
        (IsdMap::G2, &s.g2, &s.x1_labels),
        (IsdMap::F2, &s.f2, &s.x2_labels),
    ];
    for (map, table, labels) in checks {
        if let Some((fixed, collision)) = first_collision(table) {
            return Injectivity::Violated(InjectivityWitness {
                map,
                fixed_input: fixed,
                fixed_label: labels[fixed],
                collision,
            });
        }
    }
    Injectivity::Holds
}

/// The channel induced by an injective structure:
/// `Wi(yi | x1, x2) = Σ_{z : fi(xi, gi(xj, z)) = yi} pzi(z)`.
pub fn to_channel(s: &IsdStructure) -> Result<TwcChannel> {
    if let Injectivity::Violated(w) = check_injectivity(s) {
        return Err(Error::Structure(format!(
            "{} is not injective for fixed input {} (arguments {} and {} collide)",
            w.map, w.fixed_label, w.collision.0, w.collision.1
        )));
    }
    let (nx1, nx2) = (s.nx1(), s.nx2());
    let mut w1 = Vec::with_capacity(nx1 * nx2 * s.ny1);
    let mut w2 = Vec::with_capacity(nx1 * nx2 * s.ny2);
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            let mut r1 = vec![0.0; s.ny1];
            for (z, &p) in s.pz1.probs().iter().enumerate() {
                r1[s.f1[x1][s.g1[x2][z]]] += p;
            }
            let mut r2 = vec![0.0; s.ny2];
            for (z, &p) in s.pz2.probs().iter().enumerate() {
                r2[s.f2[x2][s.g2[x1][z]]] += p;
            }
            w1.extend(r1);
            w2.extend(r2);
        }
    }
    TwcChannel::new(nx1, nx2, s.ny1, s.ny2, w1, w2)
}

/// A C1 violation: at output `i`, fixed `x2`, the row entropies at `x1` and
/// `x1_alt` differ by more than the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1Witness {
    pub output: u8,
    pub x2: usize,
    pub x1: usize,
    pub x1_alt: usize,
    pub entropies: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct C1Report {
    pub holds: bool,
    pub witness: Option<C1Witness>,
    /// Informational: constancy in `x2` for each fixed `x1`.
    pub symmetric_holds: bool,
}

/// C1 on a finite channel: for each output and each fixed `x2`, the row
/// entropy `H(Yi | x1, x2)` is the same for every `x1` (within `tol` nats).
pub fn check_c1(ch: &TwcChannel, tol: f64) -> C1Report {
    let row_entropy = |i: u8, x1: usize, x2: usize| match i {
        1 => entropy_of(ch.w1_row(x1, x2)),
        _ => entropy_of(ch.w2_row(x1, x2)),
    };
    let mut witness = None;
    'outer: for i in [1u8, 2] {
        for x2 in 0..ch.nx2() {
            let h0 = row_entropy(i, 0, x2);
            for x1 in 1..ch.nx1() {
                let h = row_entropy(i, x1, x2);
                if (h - h0).abs() > tol {
                    witness = Some(C1Witness {
                        output: i,
                        x2,
                        x1: 0,
                        x1_alt: x1,
                        entropies: (h0, h),
                    });
                    break 'outer;
                }
            }
        }
    }
    let symmetric_holds = [1u8, 2].iter().all(|&i| {
        (0..ch.nx1()).all(|x1| {
            let h0 = row_entropy(i, x1, 0);
            (1..ch.nx2()).all(|x2| (row_entropy(i, x1, x2) - h0).abs() <= tol)
        })
    });
    C1Report {
        holds: witness.is_none(),
        witness,
        symmetric_holds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C2Status {
    VerifiedByStructure,
    CounterexampleFound,
    Inconclusive,
}

impl std::fmt::Display for C2Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            C2Status::VerifiedByStructure => "verified-by-structure",
            C2Status::CounterexampleFound => "counterexample-found",
            C2Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct C2Report {
    pub status: C2Status,
    /// The joint input no product could match, when one was found.
    pub witness: Option<JointPmf>,
    /// Upper estimate of `max over p̄1 of min_i [H(Ȳi|X̄i) - H(Yi|Xi)]` at the witness.
    pub witness_slack: Option<f64>,
    pub samples: usize,
}

/// Budget of the C2 falsification search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C2ProbeConfig {
    pub samples: usize,
    pub seed: u64,
    /// A joint is a counterexample when its best product slack is below `-tol`.
    pub tol: f64,
    pub shards: usize,
}

impl Default for C2ProbeConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0xC2,
            tol: 1e-7,
            shards: 16,
        }
    }
}

/// Slack functions of C2 for one joint: `s1(p̄1)` is linear, `s2(p̄1)` concave.
struct C2Slack<'a> {
    ch: &'a TwcChannel,
    p2: Vec<f64>,
    h1: f64,
    h2: f64,
}

impl<'a> C2Slack<'a> {
    fn new(ch: &'a TwcChannel, joint: &[f64]) -> Self {
        let (nx1, nx2) = (ch.nx1(), ch.nx2());
        let p2 = (0..nx2)
            .map(|x2| (0..nx1).map(|x1| joint[x1 * nx2 + x2]).sum())
            .collect();
        Self {
            ch,
            p2,
            h1: own_input_entropy(joint, ch, Direction::TwoToOne),
            h2: own_input_entropy(joint, ch, Direction::OneToTwo),
        }
    }

    fn product(&self, p1: &[f64]) -> Vec<f64> {
        p1.iter()
            .flat_map(|a| self.p2.iter().map(move |b| a * b))
            .collect()
    }

    fn slacks(&self, p1: &[f64]) -> (f64, f64) {
        let prod = self.product(p1);
        (
            own_input_entropy(&prod, self.ch, Direction::TwoToOne) - self.h1,
            own_input_entropy(&prod, self.ch, Direction::OneToTwo) - self.h2,
        )
    }

    fn gradients(&self, p1: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ch = self.ch;
        let g1 = (0..ch.nx1())
            .map(|x1| {
                let mut q = vec![0.0; ch.ny1()];
                for (x2, &b) in self.p2.iter().enumerate() {
                    for (qq, w) in q.iter_mut().zip(ch.w1_row(x1, x2)) {
                        *qq += b * w;
                    }
                }
                entropy_of(&q)
            })
            .collect();
        let outs: Vec<Vec<f64>> = (0..ch.nx2())
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
        let g2 = (0..ch.nx1())
            .map(|x1| {
                self.p2
                    .iter()
                    .enumerate()
                    .map(|(x2, &b)| {
                        -b * ch
                            .w2_row(x1, x2)
                            .iter()
                            .zip(&outs[x2])
                            .map(|(w, q)| w * (q.max(1e-300).ln() + 1.0))
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect();
        (g1, g2)
    }

    /// Upper estimate of `max_{p̄1} min(s1, s2)` through the minimax identity
    /// `min_{λ ∈ [0,1]} max_{p̄1} λ s1 + (1 - λ) s2`; the outer function is
    /// convex in `λ` and is minimized by golden-section search. Any `λ`
    /// bounds the max-min from above, so a negative result is a certificate
    /// up to the accuracy of the inner ascent.
    fn best_min_slack(&self, set: &FeasibleSet, cfg: &AscentConfig, start: &[f64]) -> f64 {
        let phi = |lam: f64| {
            maximize_concave(
                |p| {
                    let (a, b) = self.slacks(p);
                    lam * a + (1.0 - lam) * b
                },
                |p| {
                    let (a, b) = self.gradients(p);
                    a.iter()
                        .zip(&b)
                        .map(|(x, y)| lam * x + (1.0 - lam) * y)
                        .collect()
                },
                set,
                start,
                cfg,
            )
            .value
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (phi(c), phi(d));
        let mut upper = phi(0.0).min(phi(1.0)).min(fc).min(fd);
        for _ in 0..60 {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = phi(c);
                upper = upper.min(fc);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = phi(d);
                upper = upper.min(fd);
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
        upper
    }
}

/// Randomized falsification search for C2.
///
/// Samples joint input laws; for each, looks for a product law `p̄1 x p(x2)`
/// under which both `H(Ȳi | X̄i)` are at least the joint's `H(Yi | Xi)`.
/// A joint for which the best product falls short by more than `tol` is a
/// counterexample. When an injective `structure` that induces `ch` is
/// supplied, C2 holds by construction and no search is run.
pub fn probe_c2(
    ch: &TwcChannel,
    structure: Option<&IsdStructure>,
    probe: &C2ProbeConfig,
    cfg: &OptimizerConfig,
) -> Result<C2Report> {
    if let Some(s) = structure {
        if check_injectivity(s).holds() {
            let induced = to_channel(s)?;
            if induced.max_abs_diff(ch).is_some_and(|d| d <= 1e-12) {
                return Ok(C2Report {
                    status: C2Status::VerifiedByStructure,
                    witness: None,
                    witness_slack: None,
                    samples: 0,
                });
            }
        }
    }
    let (nx1, nx2) = (ch.nx1(), ch.nx2());
    let n = nx1 * nx2;
    let set = FeasibleSet::simplex(nx1);
    let ascent = AscentConfig {
        max_iterations: cfg.max_iterations.min(2_000),
        tolerance: 1e-13,
        step_tolerance: 1e-13,
    };
    let shards = probe.shards.max(1);
    let per_shard = probe.samples.div_ceil(shards);
    let uniform = vec![1.0 / nx1 as f64; nx1];

    let found: Vec<Option<(Vec<f64>, f64)>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = OptimizerConfig {
                seed: probe.seed,
                ..*cfg
            }
            .rng_for(shard as u64, 0);
            let take = per_shard.min(probe.samples.saturating_sub(shard * per_shard));
            for k in 0..take {
                let joint = if k % 2 == 0 {
                    random_pmf(&mut rng, n)
                } else {
                    // sparse joints reach the faces of the simplex
                    let mut p = random_pmf(&mut rng, n);
                    for v in p.iter_mut() {
                        if rand::Rng::gen_bool(&mut rng, 0.4) {
                            *v = 0.0;
                        }
                    }
                    let s: f64 = p.iter().sum();
                    if s == 0.0 {
                        continue;
                    }
                    p.iter_mut().for_each(|v| *v /= s);
                    p
                };
                let slack = C2Slack::new(ch, &joint);
                let marginal: Vec<f64> = (0..nx1)
                    .map(|x1| joint[x1 * nx2..(x1 + 1) * nx2].iter().sum())
                    .collect();
                let screened = [&marginal, &uniform].iter().any(|p| {
                    let (a, b) = slack.slacks(p);
                    a.min(b) >= -probe.tol
                });
                if screened {
                    continue;
                }
                let best = slack.best_min_slack(&set, &ascent, &marginal);
                if best < -probe.tol {
                    return Some((joint, best));
                }
            }
            None
        })
        .collect();

    match found.into_iter().flatten().next() {
        Some((joint, slack)) => Ok(C2Report {
            status: C2Status::CounterexampleFound,
            witness: Some(JointPmf::new(nx1, nx2, joint)?),
            witness_slack: Some(slack),
            samples: probe.samples,
        }),
        None => Ok(C2Report {
            status: C2Status::Inconclusive,
            witness: None,
            witness_slack: None,
            samples: probe.samples,
        }),
    }
}

/// The rectangle's corner and the inputs attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangleReport {
    pub region: RateRegion,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

/// Capacity region of an ISD channel:
/// `R1 <= max_{p1} H(g2(X1, Z2)) - H(Z2)` and `R2 <= max_{p2} H(g1(X2, Z1)) - H(Z1)`.
pub fn rectangle_capacity(
    s: &IsdStructure,
    c1: &InputConstraint,
    c2: &InputConstraint,
    cfg: &OptimizerConfig,
) -> Result<RateRegion> {
    Ok(rectangle_capacity_report(s, c1, c2, cfg)?.region)
}

pub fn rectangle_capacity_report(
    s: &IsdStructure,
    c1: &InputConstraint,
    c2: &InputConstraint,
    cfg: &OptimizerConfig,
) -> Result<RectangleReport> {
    cfg.validate()?;
    if let Injectivity::Violated(w) = check_injectivity(s) {
        return Err(Error::Structure(format!(
            "{} is not injective for fixed input {}",
            w.map, w.fixed_label
        )));
    }
    let nt1 = s.f1[0].len();
    let nt2 = s.f2[0].len();
    let k2 = IsdStructure::noise_kernel(&s.g2, &s.pz2, nt2);
    let k1 = IsdStructure::noise_kernel(&s.g1, &s.pz1, nt1);
    let (r1, p1) = max_output_entropy(&k2, c1, cfg)?;
    let (r2, p2) = max_output_entropy(&k1, c2, cfg)?;
    let r1 = (r1 - entropy_of(s.pz2.probs())).max(0.0);
    let r2 = (r2 - entropy_of(s.pz1.probs())).max(0.0);
    Ok(RectangleReport {
        region: RateRegion::rectangle(r1, r2),
        p1,
        p2,
    })
}

/// `max_p H(Σ_x p(x) K(. | x))` under a mean-cost constraint.
fn max_output_entropy(
    kernel: &[Vec<f64>],
    c: &InputConstraint,
    cfg: &OptimizerConfig,
) -> Result<(f64, Vec<f64>)> {
    let n = kernel.len();
    let set = feasible_set_for(c, n)?;
    let out = |p: &[f64]| {
        let mut q = vec![0.0; kernel[0].len()];
        for (row, &a) in kernel.iter().zip(p) {
            for (qq, k) in q.iter_mut().zip(row) {
                *qq += a * k;
            }
        }
        q
    };
    let objective = |p: &[f64]| entropy_of(&out(p));
    let gradient = |p: &[f64]| {
        let q = out(p);
        kernel
            .iter()
            .map(|row| {
                -row.iter()
                    .zip(&q)
                    .map(|(k, qq)| k * (qq.max(1e-300).ln() + 1.0))
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
    };
    let ascent = cfg.ascent();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in 0..cfg.restarts {
        let start = if r == 0 {
            vec![1.0 / n as f64; n]
        } else {
            random_pmf(&mut cfg.rng_for(u64::MAX, r as u64), n)
        };
        let res = maximize_concave(objective, gradient, &set, &start, &ascent);
        if best.as_ref().is_none_or(|b| res.value > b.0) {
            best = Some((res.value, res.point));
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// ISD structure of the binary modulo-2 adder with `Zi ~ Bern(crossover_i)`.
pub fn mod2_adder_structure(crossover1: f64, crossover2: f64) -> Result<IsdStructure> {
    let xor = |a: i64, b: i64| a ^ b;
    IsdStructure::from_maps(
        &[0, 1],
        &[0, 1],
        &[0, 1],
        &[0, 1],
        xor,
        xor,
        xor,
        xor,
        Pmf::bernoulli(crossover1)?,
        Pmf::bernoulli(crossover2)?,
    )
}

/// Multiplicative structure `Yi = Xi · Xj · Zi` over integer alphabets.
pub fn multiplicative_structure(x: &[i64], z: &[i64], pz1: Pmf, pz2: Pmf) -> Result<IsdStructure> {
    let mul = |a: i64, b: i64| a * b;
    IsdStructure::from_maps(x, x, z, z, mul, mul, mul, mul, pz1, pz2)
}
