//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::{Duration, Instant};

use emfront::classify::{classify_point, classify_window, find_singular_set, Classification, Tolerances};
use emfront::geometry::{dual_chart_point, dualize, lift, project_e, project_m};
use emfront::identities::{run_identity_suite, IdentityOptions};
use emfront::nalgebra::{DMatrix, DVector};
use emfront::normalform::{extract_normal_form, polish_to_singular, round_trip};
use emfront::{
    AffineChartModel, AffineLegendre, Branch, ChartWindow, Error, GeneratingFunction, Jet, MultiIndex, Partition,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const A2: &str = "x1^3/3 - p2^2/2";
const SWALLOWTAIL: &str = "x1^4/4 + p2*x1^2/2";
const A3: &str = "x1^4/4 - p2^2/2";

const NORMAL_FORM_RESIDUAL: f64 = 1e-6;
const SWALLOWTAIL_T3: f64 = 1e-8;
const SWALLOWTAIL_T4: f64 = 1e-8;
const SWALLOWTAIL_GRAD: f64 = 1e-5;
const POLYNOMIAL_IDENTITY: f64 = 1e-9;
const TRANSCENDENTAL_IDENTITY: f64 = 1e-7;
const FD_RELATIVE: f64 = 1e-5;
const FD_FLOOR: f64 = 1e-6;
const FD_STEP: f64 = 1e-3;
const SYMBOLIC_RELATIVE: f64 = 1e-10;
const DUALITY: f64 = 1e-10;
const REGRESSION_BUDGET: Duration = Duration::from_secs(5);
const IDENTITY_BUDGET: Duration = Duration::from_secs(10);

type Outcome = Result<String, String>;

fn gf(src: &str) -> GeneratingFunction {
    GeneratingFunction::parse(src, 2, &[1]).expect("fixture parses")
}

fn paper_window() -> ChartWindow {
    ChartWindow::cube(&[0.0, 0.0], 1.0, 41).expect("valid window")
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(t <= budget, || format!("runtime {t:.2?} exceeds {budget:?}"))
}

/// Largest distance over window samples between the sampled m-wavefront,
/// the reconstructed branches, and the closed-form dual potential.
fn normal_form_residuals(
    g: &GeneratingFunction,
    closed: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<(f64, f64, usize), String> {
    let w = paper_window();
    let (nf, _) = extract_normal_form(g, &w, &Tolerances::default()).map_err(err)?;
    let rt = round_trip(&nf, g, &w).map_err(err)?;
    check(rt.skipped == 0, || format!("{} samples outside the sampled range", rt.skipped))?;
    let mut vs_closed: f64 = 0.0;
    for flat in 0..w.num_nodes() {
        let q = w.point(&w.unflatten(flat));
        let (p, zd) = project_m(&lift(g, &q).map_err(err)?);
        let branches = closed(&p);
        let sampled = branches.iter().map(|b| (b - zd).abs()).fold(f64::INFINITY, f64::min);
        check(sampled <= 1e-12, || format!("closed form misses the sample at {q:?}"))?;
        for (k, branch) in [Branch::Plus, Branch::Minus].into_iter().enumerate().take(branches.len()) {
            let r = nf.reconstruct(&p, branch).map_err(err)?;
            vs_closed = vs_closed.max((r - branches[k]).abs());
        }
    }
    Ok((rt.max_residual, vs_closed, rt.samples))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = gf(A2);
    let reports = classify_window(&g, &paper_window(), &Tolerances::default());
    check(reports.len() >= 41, || format!("only {} singular points", reports.len()))?;
    for (q, r) in &reports {
        let r = r.as_ref().map_err(|e| format!("{q:?}: {e}"))?;
        check(r.classification == Classification::CuspidalEdge, || {
            format!("{q:?} labelled {:?}", r.classification)
        })?;
    }
    let (rt, closed, samples) = normal_form_residuals(&g, |p| {
        let s = 2.0 / 3.0 * p[0].max(0.0).powf(1.5);
        vec![s + p[1] * p[1] / 2.0, -s + p[1] * p[1] / 2.0]
    })?;
    check(rt <= NORMAL_FORM_RESIDUAL && closed <= NORMAL_FORM_RESIDUAL, || {
        format!("round trip {rt:.2e}, closed form {closed:.2e}")
    })?;
    within_budget(start, REGRESSION_BUDGET)?;
    Ok(format!(
        "{} cuspidal edges; residual {rt:.1e} over {samples} samples, {closed:.1e} against the closed form",
        reports.len()
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = gf(SWALLOWTAIL);
    let tols = Tolerances::default();
    let reports = classify_window(&g, &paper_window(), &tols);
    let mut swallowtails = Vec::new();
    for (q, r) in &reports {
        let r = r.as_ref().map_err(|e| format!("{q:?}: {e}"))?;
        match r.classification {
            Classification::Swallowtail => swallowtails.push(r.clone()),
            Classification::CuspidalEdge => {}
            other => return Err(format!("{q:?} labelled {other:?}")),
        }
    }
    check(swallowtails.len() == 1, || format!("{} swallowtail points", swallowtails.len()))?;
    let s = &swallowtails[0];
    check(s.point.iter().all(|v| v.abs() <= tols.tol_root), || format!("swallowtail at {:?}", s.point))?;
    let origin = classify_point(&g, &[0.0, 0.0], &tols).map_err(err)?;
    let t3 = origin.t3.unwrap_or(f64::NAN);
    let t4 = origin.t4.unwrap_or(f64::NAN);
    let grad = origin.grad_lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
    check(origin.classification == Classification::Swallowtail, || "origin not a swallowtail".into())?;
    check(t3.abs() <= SWALLOWTAIL_T3, || format!("T3 = {t3:e}"))?;
    check((t4 - 3.0).abs() <= SWALLOWTAIL_T4, || format!("T4 = {t4}"))?;
    check(grad >= SWALLOWTAIL_GRAD, || format!("|dλ| = {grad:e}"))?;
    within_budget(start, REGRESSION_BUDGET)?;
    Ok(format!(
        "1 swallowtail at the origin (T3 = {t3:.1e}, T4 = {t4}, |dλ| = {grad}), {} cuspidal edges",
        reports.len() - 1
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let g = gf(A3);
    let reports = classify_window(&g, &paper_window(), &Tolerances::default());
    check(!reports.is_empty(), || "no singular points".into())?;
    for (q, r) in &reports {
        let r = r.as_ref().map_err(|e| format!("{q:?}: {e}"))?;
        check(r.classification == Classification::A3Type && r.h_psd, || {
            format!("{q:?} labelled {:?}, h psd {}", r.classification, r.h_psd)
        })?;
    }
    let (rt, closed, samples) =
        normal_form_residuals(&g, |p| vec![0.75 * p[0].abs().powf(4.0 / 3.0) + p[1] * p[1] / 2.0])?;
    check(rt <= NORMAL_FORM_RESIDUAL && closed <= NORMAL_FORM_RESIDUAL, || {
        format!("round trip {rt:.2e}, closed form {closed:.2e}")
    })?;
    within_budget(start, REGRESSION_BUDGET)?;
    Ok(format!(
        "{} A3-type points with h psd; residual {rt:.1e} over {samples} samples, {closed:.1e} against the closed form",
        reports.len()
    ))
}

/// A quartic in `names` with seeded coefficients, plus a cubic term in `x1`
/// so the singular set meets the window.
fn random_quartic(rng: &mut ChaCha8Rng, names: &[&str]) -> String {
    let mut terms = vec!["x1^3/3".to_string()];
    for _ in 0..10 {
        let c: f64 = rng.gen_range(-0.5..0.5);
        let mut t = format!("({c:.4})");
        let mut degree = 0;
        let target = rng.gen_range(2..=4);
        while degree < target {
            t.push_str(&format!("*{}", names[rng.gen_range(0..names.len())]));
            degree += 1;
        }
        terms.push(t);
    }
    terms.join(" + ")
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cube2 = ChartWindow::cube(&[0.0, 0.0], 1.0, 21).map_err(err)?;
    let cube3 = ChartWindow::cube(&[0.0, 0.0, 0.0], 1.0, 9).map_err(err)?;
    let fixtures: Vec<(String, usize, Vec<usize>, ChartWindow)> = vec![
        (A2.into(), 2, vec![1], cube2.clone()),
        (SWALLOWTAIL.into(), 2, vec![1], cube2.clone()),
        (A3.into(), 2, vec![1], cube2.clone()),
        (random_quartic(&mut rng, &["x1", "p2", "p3"]), 3, vec![1], cube3.clone()),
        (random_quartic(&mut rng, &["x1", "x2", "p3"]), 3, vec![1, 2], cube3.clone()),
        ("sin(x1)*exp(p2/2) + log(2 + x1^2) - p2^2/2 + x1^3/3".into(), 2, vec![1], cube2),
        ("x1^3/3 + cos(x2)*sqrt(2 + p3^2) - p3^2/2".into(), 3, vec![1, 2], cube3),
    ];
    let mut worst: f64 = 0.0;
    for (k, (src, n, i, w)) in fixtures.iter().enumerate() {
        let g = GeneratingFunction::parse(src, *n, i).map_err(err)?;
        let r = run_identity_suite(&g, w, &Tolerances::default(), 100, 100 + k as u64, IdentityOptions::default())
            .map_err(err)?;
        let threshold = if g.is_transcendental() {
            TRANSCENDENTAL_IDENTITY
        } else {
            POLYNOMIAL_IDENTITY
        };
        check(r.skipped == 0, || format!("{src}: {} trials skipped", r.skipped))?;
        check(r.corank_one_trials >= 100, || format!("{src}: only {} corank-one trials", r.corank_one_trials))?;
        check(r.residuals.max() <= threshold, || format!("{src}: {:?}", r.residuals))?;
        worst = worst.max(r.residuals.max());
    }
    within_budget(start, IDENTITY_BUDGET)?;
    Ok(format!(
        "{} generating functions x 100 trials; max residual {worst:.1e}",
        fixtures.len()
    ))
}

fn random_smooth(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => "x1".into(),
            1 => "p2".into(),
            _ => format!("({:.3})", rng.gen_range(-2.0..2.0)),
        };
    }
    let a = random_smooth(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => format!("({a} + {})", random_smooth(rng, depth - 1)),
        1 => format!("({a} - {})", random_smooth(rng, depth - 1)),
        2 => format!("({a} * {})", random_smooth(rng, depth - 1)),
        3 => format!("sin({a})"),
        4 => format!("cos({a})"),
        5 => format!("exp({a}/4)"),
        6 => format!("log(2 + ({a})^2)"),
        _ => format!("sqrt(1 + ({a})^2)"),
    }
}

/// Cascaded central differences: `∂^α f` as nested first differences.
/// Orders two and three difference the symbolic first partials, which keeps
/// the oracle off the jet code path while staying clear of roundoff.
/// Steps `h` and `h/2` are combined by Richardson extrapolation.
fn finite_difference(f: &dyn Fn(&[f64]) -> f64, q: &[f64], vars: &[usize]) -> f64 {
    let coarse = central_difference(f, q, vars, FD_STEP);
    let fine = central_difference(f, q, vars, FD_STEP / 2.0);
    (4.0 * fine - coarse) / 3.0
}

fn central_difference(f: &dyn Fn(&[f64]) -> f64, q: &[f64], vars: &[usize], h: f64) -> f64 {
    match vars.split_first() {
        None => f(q),
        Some((&v, rest)) => {
            let shifted = |s: f64| {
                let mut p = q.to_vec();
                p[v] += s;
                central_difference(f, &p, rest, h)
            };
            (shifted(h) - shifted(-h)) / (2.0 * h)
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_fd: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..1000 {
        let src = random_smooth(&mut rng, 3);
        let g = GeneratingFunction::parse(&src, 2, &[1]).map_err(err)?;
        let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let jet = g.eval_jet(&q, 3).map_err(err)?;
        let f = |p: &[f64]| g.eval_real(p).expect("smooth everywhere");
        for alpha in jet.monomials().iter().filter(|a| a.degree() >= 1) {
            let vars: Vec<usize> = alpha
                .exponents()
                .iter()
                .enumerate()
                .flat_map(|(k, &e)| std::iter::repeat(k).take(e as usize))
                .collect();
            let exact = jet.derivative(alpha).map_err(err)?;
            let fd = if vars.len() == 1 {
                finite_difference(&f, &q, &vars)
            } else {
                let (&first, rest) = vars.split_first().expect("nonempty");
                let partial = |p: &[f64]| g.eval_gradient(p).expect("smooth everywhere")[first];
                finite_difference(&partial, &q, rest)
            };
            let scale = exact.abs().max(fd.abs());
            if scale <= FD_FLOOR {
                continue;
            }
            let rel = (exact - fd).abs() / scale;
            check(rel <= FD_RELATIVE, || format!("{src} at {q:?}, {alpha}: jet {exact} vs fd {fd}"))?;
            worst_fd = worst_fd.max(rel);
            compared += 1;
        }
    }

    let mut worst_sym: f64 = 0.0;
    for _ in 0..200 {
        let terms: Vec<(f64, [usize; 3])> = (0..rng.gen_range(1..10))
            .map(|_| {
                let mut e = [0usize; 3];
                for _ in 0..rng.gen_range(0..=4) {
                    e[rng.gen_range(0..3)] += 1;
                }
                (rng.gen_range(-3.0..3.0), e)
            })
            .collect();
        let src = terms
            .iter()
            .map(|(c, e)| format!("({c})*x1^{}*x2^{}*p3^{}", e[0], e[1], e[2]))
            .collect::<Vec<_>>()
            .join(" + ");
        let g = GeneratingFunction::parse(&src, 3, &[1, 2]).map_err(err)?;
        let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let jet: Jet = g.eval_jet(&q, 4).map_err(err)?;
        for alpha in jet.monomials() {
            let a: Vec<usize> = alpha.exponents().iter().map(|&v| v as usize).collect();
            let exact: f64 = terms
                .iter()
                .map(|(c, e)| {
                    (0..3).fold(*c, |acc, k| {
                        if a[k] > e[k] {
                            return 0.0;
                        }
                        let falling: f64 = (0..a[k]).map(|j| (e[k] - j) as f64).product();
                        acc * falling * q[k].powi((e[k] - a[k]) as i32)
                    })
                })
                .sum();
            let got = jet.derivative(&MultiIndex::new(&a).map_err(err)?).map_err(err)?;
            let rel = (got - exact).abs() / exact.abs().max(1.0);
            check(rel <= SYMBOLIC_RELATIVE, || format!("{src} at {q:?}, {alpha}: {got} vs {exact}"))?;
            worst_sym = worst_sym.max(rel);
        }
    }
    Ok(format!(
        "finite differences: {compared} comparisons, worst {worst_fd:.1e}; power rule: worst {worst_sym:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let w = paper_window();
    let mut worst: f64 = 0.0;
    for src in [A2, SWALLOWTAIL, A3] {
        let g = gf(src);
        let d = dualize(&g);
        for flat in 0..w.num_nodes() {
            let q = w.point(&w.unflatten(flat));
            let (x, z) = project_e(&lift(&g, &q).map_err(err)?);
            let (p, zd) = project_m(&lift(&d, &dual_chart_point(g.partition(), &q)).map_err(err)?);
            let gap = x.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold((z - zd).abs(), f64::max);
            check(gap <= DUALITY, || format!("{src} at {q:?}: gap {gap:e}"))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!("3 examples x {} samples; max gap {worst:.1e}", w.num_nodes()))
}

/// A random equivalence whose `(x1, p2)` chart stays well conditioned.
fn random_equivalence(rng: &mut ChaCha8Rng) -> AffineLegendre {
    loop {
        let a: DMatrix<f64> = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-2.0..2.0));
        let Some(inv) = a.clone().try_inverse() else { continue };
        let svd = a.clone().svd(false, false);
        let cond = svd.singular_values.max() / svd.singular_values.min();
        let dual = inv.transpose();
        if a[(0, 0)].abs() < 0.3 || dual[(1, 1)].abs() < 0.3 || cond > 10.0 {
            continue;
        }
        let b = DVector::from_fn(2, |_, _| rng.gen_range(-0.5..0.5));
        let b_dual = DVector::from_fn(2, |_, _| rng.gen_range(-0.5..0.5));
        if let Ok(map) = AffineLegendre::new(a, b, b_dual, rng.gen_range(-1.0..1.0)) {
            return map;
        }
    }
}

fn criterion_7() -> Outcome {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    let mut resampled = 0;
    for src in [A2, SWALLOWTAIL] {
        let g = gf(src);
        let w = ChartWindow::cube(&[0.0, 0.0], 0.5, 21).map_err(err)?;
        let singular = find_singular_set(&g, &w, tols.tol_root);
        let mut points: Vec<Vec<f64>> = singular.iter().step_by(4).cloned().collect();
        points.push(vec![0.0, 0.0]);
        points.push(vec![0.3, 0.2]);
        let expected: Vec<Classification> = points
            .iter()
            .map(|q| classify_point(&g, q, &tols).map(|r| r.classification))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let mut maps = 0;
        while maps < 20 {
            let map = random_equivalence(&mut rng);
            let model = match AffineChartModel::new(&g, map, Partition::new(2, &[1]).map_err(err)?, vec![0.0, 0.0]) {
                Ok(m) => m,
                Err(Error::ChartDegenerate(_)) => {
                    resampled += 1;
                    continue;
                }
                Err(e) => return Err(e.to_string()),
            };
            let images: Result<Vec<Vec<f64>>, Error> = points
                .iter()
                .zip(&expected)
                .map(|(q, label)| {
                    let image = model.image(q)?;
                    if *label == Classification::Regular {
                        Ok(image)
                    } else {
                        polish_to_singular(&model, &image, &tols)
                    }
                })
                .collect();
            let images = match images {
                Ok(v) => v,
                Err(Error::ChartDegenerate(_)) => {
                    resampled += 1;
                    continue;
                }
                Err(e) => return Err(e.to_string()),
            };
            for ((q, image), want) in points.iter().zip(&images).zip(&expected) {
                let got = classify_point(&model, image, &tols).map_err(err)?.classification;
                check(got == *want, || format!("{src}: {q:?} was {want:?}, image {image:?} is {got:?}"))?;
                compared += 1;
            }
            maps += 1;
        }
    }
    Ok(format!(
        "2 models x 20 equivalences, {compared} labels preserved ({resampled} degenerate charts resampled)"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("cuspidal-edge regression", criterion_1),
        ("swallowtail regression", criterion_2),
        ("A3 regression", criterion_3),
        ("identity suite", criterion_4),
        ("derivative oracles", criterion_5),
        ("e/m duality", criterion_6),
        ("affine equivariance", criterion_7),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} [{t:.2}s]: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} [{t:.2}s]: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
