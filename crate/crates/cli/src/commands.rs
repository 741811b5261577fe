use crate::args::{Cli, Closedform, Command, Common, Constraints, Poisson, PoissonArgs};

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::Path;
use twc_core::bounds::{inner_bound_report, outer_bound_report, region_gap, BoundReport};
use twc_core::closedform::{
    cauchy_capacity, cauchy_constraint_value, cauchy_entropy, cauchy_entropy_numeric, exp_capacity,
    exp_saddle_input, input_dep_gaussian_cbar, CauchyTwcParams, ExpTwcParams,
    InputDepGaussianParams,
};
use twc_core::io::{
    format_float, parse_channel, parse_isd, point_rows, region_rows, render_svg, write_atomic,
    write_region_csv, write_scalar_csv, RegionRow, SvgSeries,
};
use twc_core::isd::{
    check_c1, check_injectivity, probe_c2, rectangle_capacity_report, to_channel, C2ProbeConfig,
    Injectivity,
};
use twc_core::poisson::{
    corner_gap, fig3_dataset, gap_asymptote, inner_region, outer_region, owc_capacity, pi0,
    PoissonParams,
};
use twc_core::{Direction, Error, InputConstraint, OptimizerConfig, RatePair, TwcChannel};

/// What a subcommand produced.
struct Output {
    csv: String,
    report: String,
    svg: Option<String>,
}

/// Bounds that agree to within this many nats are reported as coinciding.
const COINCIDE_TOL: f64 = 1e-6;

pub fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let out = match &cli.command {
        Command::Bounds {
            channel,
            constraints,
        } => bounds(c, &read_channel(channel)?, constraints)?,
        Command::IsdCheck {
            channel,
            structure,
            samples,
            tol,
        } => isd_check(
            c,
            &read_channel(channel)?,
            structure.as_deref(),
            *samples,
            *tol,
        )?,
        Command::Rectangle {
            structure,
            constraints,
        } => rectangle(c, structure, constraints)?,
        Command::Closedform { family } => closedform(c, family)?,
        Command::Poisson { what, params } => poisson(c, what, params)?,
    };
    emit(c, out)
}

fn emit(c: &Common, out: Output) -> Result<()> {
    if let (Some(path), Some(svg)) = (&c.svg, &out.svg) {
        write_atomic(path, svg.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
    } else if c.svg.is_some() {
        eprintln!("note: this subcommand has no plot; --svg ignored");
    }
    match &c.out {
        Some(path) => {
            write_atomic(path, out.csv.as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
            print!("{}", out.report);
        }
        None => {
            print!("{}", out.csv);
            eprint!("{}", out.report);
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())).into())
}

fn read_channel(path: &Path) -> Result<TwcChannel> {
    let text = read_text(path)?;
    parse_channel(&text).with_context(|| format!("in {}", path.display()))
}

/// Formats a rate for the text report in the requested display unit.
struct Units {
    bits: bool,
}

impl Units {
    fn new(c: &Common) -> Self {
        Self { bits: c.bits }
    }

    fn rate(&self, nats: f64) -> String {
        if self.bits {
            format_float(nats / std::f64::consts::LN_2)
        } else {
            format_float(nats)
        }
    }

    fn name(&self, per_second: bool) -> &'static str {
        match (self.bits, per_second) {
            (false, false) => "nats",
            (true, false) => "bits",
            (false, true) => "nats/s",
            (true, true) => "bits/s",
        }
    }
}

fn optimizer(c: &Common) -> Result<OptimizerConfig> {
    let cfg = OptimizerConfig {
        weights: c.weights,
        seed: c.seed,
        ..OptimizerConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn constraints(k: &Constraints) -> (InputConstraint, InputConstraint) {
    let one = |cost: &Option<Vec<f64>>, budget: Option<f64>| match (cost, budget) {
        (Some(cost), Some(budget)) => InputConstraint::mean_upper(cost.clone(), budget),
        _ => InputConstraint::None,
    };
    (one(&k.cost1, k.budget1), one(&k.cost2, k.budget2))
}

fn bounds(c: &Common, ch: &TwcChannel, k: &Constraints) -> Result<Output> {
    let cfg = optimizer(c)?;
    let (c1, c2) = constraints(k);
    let inner = inner_bound_report(ch, &c1, &c2, &cfg)?;
    let outer = outer_bound_report(ch, &c1, &c2, &cfg)?;
    let u = Units::new(c);
    let gap = region_gap(&inner.region, &outer.region);

    let mut rows = region_rows("bounds", "inner", &inner.region);
    rows.extend(region_rows("bounds", "outer", &outer.region));
    let mut report = String::new();
    let describe = |name: &str, r: &BoundReport, report: &mut String| {
        let _ = writeln!(
            report,
            "{name} bound: {} vertices, max R1 = {}, max R2 = {} {}",
            r.region.vertices().len(),
            u.rate(r.region.max_r1()),
            u.rate(r.region.max_r2()),
            u.name(false)
        );
    };
    describe("inner", &inner, &mut report);
    describe("outer", &outer, &mut report);
    let _ = writeln!(
        report,
        "weight  inner  outer  difference ({})",
        u.name(false)
    );
    for (a, b) in inner.optima.iter().zip(&outer.optima) {
        let (si, so) = (
            inner.region.weighted_support(a.weight),
            outer.region.weighted_support(b.weight),
        );
        let _ = writeln!(
            report,
            "{}  {}  {}  {}",
            format_float(a.weight),
            u.rate(si),
            u.rate(so),
            u.rate(so - si)
        );
    }
    let _ = writeln!(
        report,
        "largest support gap over 0..90 degrees: {} {}",
        u.rate(gap),
        u.name(false)
    );
    if gap <= COINCIDE_TOL {
        let _ = writeln!(
            report,
            "inner and outer bounds coincide: the capacity region is determined"
        );
    } else {
        let _ = writeln!(
            report,
            "inner and outer bounds differ: the capacity region is not determined by these bounds"
        );
    }
    let svg = render_svg(
        "Shannon bounds",
        "nats",
        &[
            SvgSeries::region("inner", &inner.region),
            SvgSeries::region("outer", &outer.region),
        ],
    );
    Ok(Output {
        csv: write_region_csv(&rows)?,
        report,
        svg: Some(svg),
    })
}

fn isd_check(
    c: &Common,
    ch: &TwcChannel,
    structure: Option<&Path>,
    samples: usize,
    tol: f64,
) -> Result<Output> {
    let cfg = optimizer(c)?;
    let mut report = String::new();
    let mut scalars: Vec<(String, f64)> = Vec::new();
    let flag = |b: bool| if b { 1.0 } else { 0.0 };

    let c1 = check_c1(ch, tol);
    match &c1.witness {
        None => {
            let _ = writeln!(
                report,
                "C1: holds (row entropies constant in x1 for every x2, both outputs)"
            );
        }
        Some(w) => {
            let _ = writeln!(
                report,
                "C1: fails at output {} with x2 = {}: H = {} at x1 = {} but {} at x1 = {}",
                w.output,
                w.x2,
                format_float(w.entropies.0),
                w.x1,
                format_float(w.entropies.1),
                w.x1_alt
            );
        }
    }
    let _ = writeln!(
        report,
        "C1 mirrored (constant in x2 for every x1, informational): {}",
        if c1.symmetric_holds { "holds" } else { "fails" }
    );
    scalars.push(("c1_holds".into(), flag(c1.holds)));
    scalars.push(("c1_mirrored_holds".into(), flag(c1.symmetric_holds)));

    let parsed = match structure {
        Some(path) => {
            let text = read_text(path)?;
            Some(parse_isd(&text).with_context(|| format!("in {}", path.display()))?)
        }
        None => None,
    };
    if let Some(s) = &parsed {
        let injective = match check_injectivity(s) {
            Injectivity::Holds => {
                let _ = writeln!(report, "structure: injective");
                true
            }
            Injectivity::Violated(w) => {
                let _ = writeln!(
                    report,
                    "structure: {} is not injective at fixed input {}: arguments {} and {} collide",
                    w.map, w.fixed_label, w.collision.0, w.collision.1
                );
                false
            }
        };
        scalars.push(("injective".into(), flag(injective)));
        if injective {
            let induced = to_channel(s)?;
            let diff = induced.max_abs_diff(ch);
            let _ = writeln!(
                report,
                "structure induces the channel: {}",
                match diff {
                    Some(d) if d <= 1e-12 => "yes".to_string(),
                    Some(d) => format!("no (largest transition difference {})", format_float(d)),
                    None => "no (alphabet sizes differ)".to_string(),
                }
            );
        }
    }

    let probe = C2ProbeConfig {
        samples,
        seed: c.seed,
        ..C2ProbeConfig::default()
    };
    let c2 = probe_c2(ch, parsed.as_ref(), &probe, &cfg)?;
    match c2.status {
        twc_core::isd::C2Status::VerifiedByStructure => {
            let _ = writeln!(
                report,
                "C2: {} (an injective structure induces the channel)",
                c2.status
            );
        }
        twc_core::isd::C2Status::CounterexampleFound => {
            let _ = writeln!(
                report,
                "C2: {} among {} sampled joints",
                c2.status, c2.samples
            );
        }
        twc_core::isd::C2Status::Inconclusive => {
            let _ = writeln!(
                report,
                "C2: no counterexample among {} sampled joints ({}: sampling cannot prove the condition)",
                c2.samples, c2.status
            );
        }
    }
    if let (Some(w), Some(slack)) = (&c2.witness, c2.witness_slack) {
        let cells: Vec<String> = w.probs().iter().map(|v| format_float(*v)).collect();
        let _ = writeln!(
            report,
            "C2 witness joint (x1 major): [{}], best product slack {}",
            cells.join(", "),
            format_float(slack)
        );
    }
    scalars.push(("c2_counterexample".into(), flag(c2.witness.is_some())));
    scalars.push((
        "c2_verified_by_structure".into(),
        flag(c2.status == twc_core::isd::C2Status::VerifiedByStructure),
    ));
    scalars.push(("c2_samples".into(), c2.samples as f64));
    Ok(Output {
        csv: write_scalar_csv(&scalars)?,
        report,
        svg: None,
    })
}

fn rectangle(c: &Common, path: &Path, k: &Constraints) -> Result<Output> {
    let cfg = optimizer(c)?;
    let s = parse_isd(&read_text(path)?).with_context(|| format!("in {}", path.display()))?;
    let (c1, c2) = constraints(k);
    let rep = rectangle_capacity_report(&s, &c1, &c2, &cfg)?;
    let u = Units::new(c);
    let corner = RatePair::new(rep.region.max_r1(), rep.region.max_r2());
    let mut rows = region_rows("rectangle", "capacity", &rep.region);
    rows.extend(point_rows("rectangle", "corner", &[corner]));
    let pmf = |p: &[f64]| {
        p.iter()
            .map(|v| format_float(*v))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let report = format!(
        "capacity region is the rectangle with corner ({}, {}) {}\nmaximizing p1 = [{}]\nmaximizing p2 = [{}]\n",
        u.rate(corner.r1),
        u.rate(corner.r2),
        u.name(false),
        pmf(&rep.p1),
        pmf(&rep.p2)
    );
    let svg = render_svg(
        "ISD capacity rectangle",
        "nats",
        &[
            SvgSeries::region("capacity", &rep.region),
            SvgSeries::corners("corner", vec![corner]),
        ],
    );
    Ok(Output {
        csv: write_region_csv(&rows)?,
        report,
        svg: Some(svg),
    })
}

fn closedform(c: &Common, family: &Closedform) -> Result<Output> {
    let u = Units::new(c);
    let mut scalars: Vec<(String, f64)> = Vec::new();
    let mut report = String::new();
    match *family {
        Closedform::Exp { a1, a2, m1, m2 } => {
            let p = ExpTwcParams { a1, a2, m1, m2 };
            let r = exp_capacity(&p)?;
            // R1 uses sender 1's budget against receiver 2's noise
            let mi1 = exp_saddle_input(a1, m2)?.mutual_information_numeric(m2)?;
            let mi2 = exp_saddle_input(a2, m1)?.mutual_information_numeric(m1)?;
            scalars.extend([
                ("r1".into(), r.max_r1()),
                ("r2".into(), r.max_r2()),
                ("r1_quadrature".into(), mi1),
                ("r2_quadrature".into(), mi2),
            ]);
            let _ = writeln!(
                report,
                "exponential noise: corner ({}, {}) {}; quadrature under the saddle-point inputs: ({}, {})",
                u.rate(r.max_r1()),
                u.rate(r.max_r2()),
                u.name(false),
                u.rate(mi1),
                u.rate(mi2)
            );
        }
        Closedform::Cauchy {
            a1,
            a2,
            gamma1,
            gamma2,
        } => {
            let p = CauchyTwcParams {
                a1,
                a2,
                gamma1,
                gamma2,
            };
            let r = cauchy_capacity(&p)?;
            let (d1, d2) = p.achieving_inputs();
            let mut check = |name: &str, mu: f64, a: f64, g: f64| -> Result<()> {
                if mu > 0.0 {
                    scalars.push((
                        format!("{name}_constraint_at_optimum"),
                        cauchy_constraint_value(mu, a, g)?,
                    ));
                }
                Ok(())
            };
            check("x1", d1, a1, gamma2)?;
            check("x2", d2, a2, gamma1)?;
            for (name, g) in [("noise1", gamma1), ("noise2", gamma2)] {
                scalars.push((format!("{name}_entropy"), cauchy_entropy(g)?));
                scalars.push((
                    format!("{name}_entropy_quadrature"),
                    cauchy_entropy_numeric(g)?,
                ));
            }
            scalars.insert(0, ("r2".into(), r.max_r2()));
            scalars.insert(0, ("r1".into(), r.max_r1()));
            let _ = writeln!(
                report,
                "Cauchy noise: corner ({}, {}) {}; achieving inputs Cauchy(0, {}) and Cauchy(0, {}); constraint value at the optimum is ln 4 = {}",
                u.rate(r.max_r1()),
                u.rate(r.max_r2()),
                u.name(false),
                format_float(d1),
                format_float(d2),
                format_float(4f64.ln())
            );
        }
        Closedform::Idg {
            ref support,
            ref sigma_hat_sq,
            ref sigma_tilde_sq,
            budget,
        } => {
            for (name, v) in [
                ("--sigma-hat-sq", sigma_hat_sq),
                ("--sigma-tilde-sq", sigma_tilde_sq),
            ] {
                if v.len() != 2 {
                    return Err(Error::Validation(format!(
                        "{name} takes two values (receivers 1 and 2), got {}",
                        v.len()
                    ))
                    .into());
                }
            }
            let p = InputDepGaussianParams {
                gains: [1.0, 1.0],
                sigma_hat_sq: [sigma_hat_sq[0], sigma_hat_sq[1]],
                sigma_tilde_sq: [sigma_tilde_sq[0], sigma_tilde_sq[1]],
                support: support.clone(),
                cost: budget.map(|b| (support.clone(), b)),
            };
            let cfg = optimizer(c)?;
            let r1 = input_dep_gaussian_cbar(&p, Direction::OneToTwo, &cfg)?;
            let r2 = input_dep_gaussian_cbar(&p, Direction::TwoToOne, &cfg)?;
            scalars.push(("r1_lower".into(), r1.value));
            scalars.push(("r2_lower".into(), r2.value));
            for (k, (a, b)) in r1.input.iter().zip(&r2.input).enumerate() {
                scalars.push((format!("p1_{k}"), *a));
                scalars.push((format!("p2_{k}"), *b));
            }
            let _ = writeln!(
                report,
                "input-dependent Gaussian noise: rectangle corner at least ({}, {}) {} using laws on the declared support",
                u.rate(r1.value),
                u.rate(r2.value),
                u.name(false)
            );
        }
    }
    Ok(Output {
        csv: write_scalar_csv(&scalars)?,
        report,
        svg: None,
    })
}

fn single_lambda0(c: &Common) -> Result<f64> {
    match c.lambda0.as_deref() {
        None => Ok(2.0),
        Some([l]) => Ok(*l),
        Some(list) => Err(Error::Validation(format!(
            "this subcommand takes one dark current, got {} values",
            list.len()
        ))
        .into()),
    }
}

fn poisson(c: &Common, what: &Poisson, args: &PoissonArgs) -> Result<Output> {
    let u = Units::new(c);
    let base = PoissonParams {
        a: args.a,
        sigma1: args.sigma1,
        sigma2: args.sigma2,
        lambda0: c
            .lambda0
            .as_deref()
            .and_then(|l| l.first().copied())
            .unwrap_or(2.0),
        delta: c.delta,
    };
    let mut report = String::new();
    match what {
        Poisson::Owc => {
            let p = PoissonParams {
                lambda0: single_lambda0(c)?,
                ..base
            };
            p.validate()?;
            let pi0 = pi0(p.s())?;
            let c1 = owc_capacity(p.a, p.sigma1, p.lambda0)?;
            let c2 = owc_capacity(p.a, p.sigma2, p.lambda0)?;
            let scalars = vec![
                ("s".to_string(), p.s()),
                ("pi0".to_string(), pi0),
                ("pi1_star".to_string(), p.sigma1.min(pi0)),
                ("pi2_star".to_string(), p.sigma2.min(pi0)),
                ("capacity1".to_string(), c1),
                ("capacity2".to_string(), c2),
            ];
            let _ = writeln!(
                report,
                "one-way capacities at s = {}: {} and {} {} (unconstrained duty cycle {})",
                format_float(p.s()),
                u.rate(c1),
                u.rate(c2),
                u.name(true),
                format_float(pi0)
            );
            Ok(Output {
                csv: write_scalar_csv(&scalars)?,
                report,
                svg: None,
            })
        }
        Poisson::Region => {
            let p = PoissonParams {
                lambda0: single_lambda0(c)?,
                ..base
            };
            let inner = inner_region(&p, c.grid, c.mode)?;
            let outer = outer_region(&p)?;
            let gap = corner_gap(&p, c.mode)?;
            let group = format!("lambda0={}", format_float(p.lambda0));
            let mut rows = region_rows(&group, "inner", &inner);
            rows.extend(region_rows(&group, "outer", &outer));
            rows.extend(point_rows(&group, "corner", &[gap.corner]));
            let _ = writeln!(
                report,
                "inner region: {} vertices; outer corner ({}, {}) {}; inner corner ({}, {})",
                inner.vertices().len(),
                u.rate(outer.max_r1()),
                u.rate(outer.max_r2()),
                u.name(true),
                u.rate(gap.corner.r1),
                u.rate(gap.corner.r2)
            );
            let svg = render_svg(
                &format!("Poisson two-way channel, {group}"),
                "nats/s",
                &[
                    SvgSeries::region("inner", &inner),
                    SvgSeries::region("outer", &outer),
                    SvgSeries::corners("corner", vec![gap.corner]),
                ],
            );
            Ok(Output {
                csv: write_region_csv(&rows)?,
                report,
                svg: Some(svg),
            })
        }
        Poisson::Gap => {
            let p = PoissonParams {
                lambda0: single_lambda0(c)?,
                ..base
            };
            let g = corner_gap(&p, c.mode)?;
            let mut scalars = vec![
                ("pi1_star".to_string(), g.pi1),
                ("pi2_star".to_string(), g.pi2),
                ("gap1".to_string(), g.gap1),
                ("gap2".to_string(), g.gap2),
                ("gap1_fixed_delta".to_string(), g.raw_gap1),
                ("gap2_fixed_delta".to_string(), g.raw_gap2),
            ];
            let _ = writeln!(
                report,
                "corner gaps ({}, {}) {} (Δ → 0 extrapolation); at Δ = {}: ({}, {})",
                u.rate(g.gap1),
                u.rate(g.gap2),
                u.name(true),
                format_float(p.delta),
                u.rate(g.raw_gap1),
                u.rate(g.raw_gap2)
            );
            if p.lambda0 > 0.0 {
                let (a1, a2) = gap_asymptote(&p)?;
                scalars.extend([
                    ("asymptote1".to_string(), a1),
                    ("asymptote2".to_string(), a2),
                    ("ratio1".to_string(), g.gap1 / a1),
                    ("ratio2".to_string(), g.gap2 / a2),
                ]);
                let _ = writeln!(
                    report,
                    "large-s asymptote ({}, {}); ratios {} and {}",
                    u.rate(a1),
                    u.rate(a2),
                    format_float(g.gap1 / a1),
                    format_float(g.gap2 / a2)
                );
            }
            Ok(Output {
                csv: write_scalar_csv(&scalars)?,
                report,
                svg: None,
            })
        }
        Poisson::Fig3 => {
            let lambdas = c.lambda0.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0]);
            let groups = fig3_dataset(&base, &lambdas, c.grid, c.mode)?;
            let mut rows: Vec<RegionRow> = Vec::new();
            let mut series = Vec::new();
            let mut corners = Vec::new();
            for g in &groups {
                let name = format!("lambda0={}", format_float(g.lambda0));
                rows.extend(region_rows(&name, "inner", &g.inner));
                rows.extend(region_rows(&name, "outer", &g.outer));
                rows.extend(point_rows(&name, "corner", &[g.gap.corner]));
                rows.extend(point_rows(
                    &name,
                    "gap",
                    &[RatePair::new(g.gap.gap1, g.gap.gap2)],
                ));
                rows.extend(point_rows(
                    &name,
                    "gap_fixed_delta",
                    &[RatePair::new(g.gap.raw_gap1, g.gap.raw_gap2)],
                ));
                let _ = writeln!(
                    report,
                    "{name}: outer corner ({}, {}), inner corner ({}, {}), gaps ({}, {}) {}",
                    u.rate(g.outer.max_r1()),
                    u.rate(g.outer.max_r2()),
                    u.rate(g.gap.corner.r1),
                    u.rate(g.gap.corner.r2),
                    u.rate(g.gap.gap1),
                    u.rate(g.gap.gap2),
                    u.name(true)
                );
                series.push(SvgSeries::region(format!("inner, {name}"), &g.inner));
                series.push(SvgSeries::region(format!("outer, {name}"), &g.outer));
                corners.push(g.gap.corner);
            }
            series.push(SvgSeries::corners("corners", corners));
            let svg = render_svg("Poisson two-way channel", "nats/s", &series);
            Ok(Output {
                csv: write_region_csv(&rows)?,
                report,
                svg: Some(svg),
            })
        }
    }
}
