//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Each check uses an oracle independent of the code path
//! it validates where one exists.

use std::time::Instant;

use kenergy::asymptotics::{energy_along, log_samples, slope_integer, stability_scan};
use kenergy::catalog::{
    cayley_hyperdet, conic, quadric_hypersurface, quadric_surface, rational_normal_curve, VarietyInstance,
};
use kenergy::chern::{closed_form_jet_top_chern, derive_jet_top_chern};
use kenergy::energy::{
    build_pair_vectors, energy_via_formula, energy_via_pair, energy_via_recursion, finite_difference,
    minimize_energy, EnergyFunction, MinimizeOptions,
};
use kenergy::exactpoly::{ExactPoly, FloatPoly, MatrixExponent};
use kenergy::invariants::{hyperdiscriminant_degree, mu_from_degrees};
use kenergy::numeric::{
    energy_quadrature, energy_slope, mu_quadrature, surface_integrals, CurvatureMethod, CurveChart,
    DetourPath, LinearPath, QuadraticPath, QuadratureSpec,
};
use kenergy::pairing::{fs_distance_sum, log_fs_norm_sq, FactorRef, GroupElement, OneParamSubgroup};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = fn() -> Check;
type SlopeCase = (VarietyInstance, u32, Vec<i64>, i64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn lam(w: &[i64]) -> OneParamSubgroup {
    OneParamSubgroup::new(w.to_vec()).expect("weights sum to zero")
}

fn catalog() -> Result<Vec<VarietyInstance>, String> {
    let mut v = vec![conic().map_err(e)?];
    for d in 3..=6 {
        v.push(rational_normal_curve(d).map_err(e)?);
    }
    v.push(quadric_surface().map_err(e)?);
    for n in 2..=3 {
        v.push(quadric_hypersurface(n).map_err(e)?);
    }
    Ok(v)
}

fn c1_jet_chern() -> Check {
    let mut count = 0;
    for n in 1..=6 {
        for k in 1..=n {
            let a = derive_jet_top_chern(n, k).map_err(e)?;
            let b = closed_form_jet_top_chern(n, k).map_err(e)?;
            ensure(a == b, || format!("n={n} k={k}: derived {a} vs closed {b}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} (n,k) pairs exact"))
}

fn c2_degree_oracles() -> Check {
    for d in 2..=6u32 {
        let inst = rational_normal_curve(d).map_err(e)?;
        let deg = hyperdiscriminant_degree(&inst.data, 1).map_err(e)?;
        ensure(deg == BigInt::from(2 * d - 2), || format!("rnc({d}): {deg}"))?;
    }
    let s = quadric_surface().map_err(e)?;
    let deg = hyperdiscriminant_degree(&s.data, 1).map_err(e)?;
    let cayley = cayley_hyperdet().homogeneous_degree();
    ensure(deg == BigInt::from(4) && cayley == Some(4), || format!("format 1: {deg}, {cayley:?}"))?;
    for n in 1..=4 {
        let q = quadric_hypersurface(n).map_err(e)?;
        let deg = hyperdiscriminant_degree(&q.data, n).map_err(e)?;
        ensure(deg == BigInt::from(2), || format!("dual quadric n={n}: {deg}"))?;
    }
    for inst in catalog()? {
        let deg = hyperdiscriminant_degree(&inst.data, 0).map_err(e)?;
        let want = (inst.data.n + 1) * inst.data.degree;
        ensure(deg == BigInt::from(want), || format!("{}: chow {deg} vs {want}", inst.name))?;
    }
    Ok("2d-2, 4, 2 and (n+1)d reproduced".into())
}

fn c3_build_consistency() -> Check {
    let mut polys = 0;
    for inst in catalog()? {
        let mut degs = Vec::new();
        for i in 0..=inst.n() {
            let Ok(want) = hyperdiscriminant_degree(&inst.data, i) else { break };
            degs.push(want.clone());
            let Ok(p) = inst.delta(i) else { continue };
            let got = p.homogeneous_degree().map(BigInt::from);
            ensure(got.as_ref() == Some(&want), || format!("{} Δ{i}: {got:?} vs {want}", inst.name))?;
            polys += 1;
        }
        for k in 0..degs.len() as u32 {
            let mu = mu_from_degrees(&degs, inst.data.degree, inst.n(), k).map_err(e)?;
            ensure(mu == inst.data.mu.mu[k as usize], || format!("{} μ{k}: {mu}", inst.name))?;
        }
    }
    Ok(format!("{polys} polynomials match, μ round-trips"))
}

fn c4_triple_agreement() -> Check {
    let cases = [
        (conic().map_err(e)?, 1),
        (rational_normal_curve(3).map_err(e)?, 1),
        (quadric_surface().map_err(e)?, 1),
        (quadric_surface().map_err(e)?, 2),
    ];
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (inst, k) in &cases {
        let size = inst.ambient() as usize + 1;
        let id = energy_via_formula(inst, &GroupElement::identity(size), *k).map_err(e)?;
        ensure(id.total == 0.0, || format!("{} k={k}: M(id) = {}", inst.name, id.total))?;
        for _ in 0..100 {
            let s = GroupElement::random(&mut rng, size, 0.6);
            let a = energy_via_formula(inst, &s, *k).map_err(e)?.total;
            let b = energy_via_pair(inst, &s, *k).map_err(e)?;
            let c = energy_via_recursion(inst, &s, *k).map_err(e)?;
            let d = (a - b).abs().max((a - c).abs());
            worst = worst.max(d);
            ensure(d < 1e-9, || format!("{} k={k}: {a} {b} {c}", inst.name))?;
        }
    }
    Ok(format!("400 samples, max difference {worst:.1e}; M(id) = 0"))
}

/// Weight of each monomial read from its nested exponent rows.
fn brute_min_weight(p: &ExactPoly, w: &[i64]) -> i64 {
    p.terms()
        .map(|(ex, _)| {
            ex.to_nested()
                .iter()
                .flat_map(|row| row.iter().enumerate().map(|(j, &x)| x as i64 * w[j]))
                .sum::<i64>()
        })
        .min()
        .expect("nonzero polynomial")
}

fn brute_slope(inst: &VarietyInstance, k: u32, w: &[i64]) -> Result<i64, String> {
    let pair = build_pair_vectors(&inst.data, k).map_err(e)?;
    let side = |fs: &[(FactorRef, BigInt)]| -> Result<i64, String> {
        let mut s = 0;
        for (f, ex) in fs {
            s += ex.to_i64().ok_or("exponent overflow")? * brute_min_weight(inst.delta(f.0).map_err(e)?, w);
        }
        Ok(s)
    };
    Ok(side(&pair.v.factors)? - side(&pair.w.factors)?)
}

fn slope_cases() -> Result<Vec<SlopeCase>, String> {
    let c = conic().map_err(e)?;
    let s = quadric_surface().map_err(e)?;
    Ok(vec![
        (c.clone(), 1, vec![1, 0, -1], 0),
        (c, 1, vec![2, -1, -1], -6),
        (s.clone(), 2, vec![3, -1, -1, -1], -8),
        (s, 2, vec![1, 1, -1, -1], 0),
    ])
}

fn c5_integer_slopes() -> Check {
    let mut out = Vec::new();
    for (inst, k, w, want) in slope_cases()? {
        let a = slope_integer(&inst, k, &lam(&w)).map_err(e)?;
        let b = brute_slope(&inst, k, &w)?;
        ensure(a == BigInt::from(want) && b == want, || format!("{} {w:?}: {a}, brute {b}", inst.name))?;
        out.push(format!("{want}"));
    }
    Ok(format!("A = [{}], brute force agrees", out.join(", ")))
}

fn c6_slope_fit() -> Check {
    let ts = log_samples(1e-1, 1e-6, 6).map_err(e)?;
    let x: Vec<f64> = ts.iter().map(|t| 2.0 * t.ln()).collect();
    let mut out = Vec::new();
    for (inst, k, w, want) in slope_cases()? {
        let l = lam(&w);
        // M_k(λ(t)) through the group action on the polynomials
        let group: Vec<f64> = ts
            .iter()
            .map(|&t| Ok(energy_via_formula(&inst, &l.at(t).map_err(e)?, k).map_err(e)?.total))
            .collect::<Result<_, String>>()?;
        let torus: Vec<f64> = ts
            .iter()
            .map(|&t| energy_along(&inst, k, &l, t).map_err(e))
            .collect::<Result<_, String>>()?;
        for y in [&group, &torus] {
            let slope = kenergy::asymptotics::affine_fit(&x, y).0;
            let tol = 0.01 * (want as f64).abs().max(1.0);
            ensure((slope - want as f64).abs() <= tol, || format!("{} {w:?}: slope {slope}", inst.name))?;
        }
        out.push(format!("{:.4}", kenergy::asymptotics::affine_fit(&x, &group).0));
    }
    Ok(format!("fitted slopes [{}]", out.join(", ")))
}

fn c7_analytic_slope() -> Check {
    let inst = conic().map_err(e)?;
    let chart = CurveChart::from_instance(&inst).map_err(e)?;
    let ts = log_samples(1e-1, 1e-4, 4).map_err(e)?;
    let mut out = Vec::new();
    for w in [[2, -1, -1], [1, 0, -1]] {
        let l = lam(&w);
        let a = slope_integer(&inst, 1, &l).map_err(e)?.to_f64().ok_or("slope overflow")?;
        let r = energy_slope(&chart, &l, &ts, &QuadratureSpec::default()).map_err(e)?;
        ensure((r.slope - a).abs() <= 0.01 * a.abs().max(1.0), || format!("{w:?}: {} vs {a}", r.slope))?;
        out.push(format!("{w:?}: {:.4} vs {a}", r.slope));
    }
    Ok(out.join("; "))
}

fn traceless(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let tr = m.trace() / n as f64;
    &m - DMatrix::identity(n, n) * tr
}

fn random_generator(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<Complex64> {
    traceless(DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    }))
}

fn c8_path_independence() -> Check {
    let chart = CurveChart::from_instance(&conic().map_err(e)?).map_err(e)?;
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let xi = random_generator(&mut rng, 3, 0.6);
        let eta = random_generator(&mut rng, 3, 0.6);
        let a = energy_quadrature(&chart, &LinearPath::new(xi.clone()).map_err(e)?, &spec).map_err(e)?;
        let b = energy_quadrature(&chart, &QuadraticPath::new(xi.clone()).map_err(e)?, &spec).map_err(e)?;
        let c = energy_quadrature(&chart, &DetourPath::new(xi, eta).map_err(e)?, &spec).map_err(e)?;
        let d = (a - b).abs().max((a - c).abs());
        worst = worst.max(d);
        ensure(d < 1e-5, || format!("linear {a}, t² {b}, detour {c}"))?;
    }
    Ok(format!("3 endpoints, max path difference {worst:.1e}"))
}

fn c9_mu_gauss_bonnet() -> Check {
    let spec = QuadratureSpec {
        curvature: CurvatureMethod::FiniteDifference,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for d in 2..=4 {
        let chart = CurveChart::from_instance(&rational_normal_curve(d).map_err(e)?).map_err(e)?;
        let r = mu_quadrature(&chart, &spec).map_err(e)?;
        ensure((r.mu1 - 2.0 / d as f64).abs() < 1e-5, || format!("d={d}: μ1 = {}", r.mu1))?;
        for _ in 0..5 {
            let s = GroupElement::random(&mut rng, d as usize + 1, 0.5);
            let g = surface_integrals(&chart, s.matrix(), &spec).map_err(e)?;
            worst = worst.max((g.chern1 - 2.0).abs());
            ensure((g.chern1 - 2.0).abs() < 1e-4 && g.min_metric > 0.0, || format!("d={d}: ∫c1 = {}", g.chern1))?;
        }
    }
    Ok(format!("μ1 = 2/d for d = 2,3,4; ∫c1 within {worst:.1e} of 2 on 15 σ"))
}

fn c10_pair_structure() -> Check {
    let mut count = 0;
    for inst in catalog()? {
        let dv = inst.data.dual_degrees(1).map_err(e)?;
        for k in inst.supported_k() {
            let p = build_pair_vectors(&inst.data, k).map_err(e)?;
            let dv_k = inst.data.dual_degrees(k).map_err(e)?;
            let deg = |fs: &[(FactorRef, BigInt)]| -> BigInt {
                fs.iter().map(|(f, x)| x * &dv_k[f.0 as usize]).sum()
            };
            ensure(deg(&p.v.factors) == deg(&p.w.factors), || format!("{} k={k}", inst.name))?;
            count += 1;
        }
        let p = build_pair_vectors(&inst.data, 1).map_err(e)?;
        ensure(
            p.v.factors == vec![(FactorRef(1), dv[0].clone())] && p.w.factors == vec![(FactorRef(0), dv[1].clone())],
            || format!("{}: k=1 pair {:?} {:?}", inst.name, p.v, p.w),
        )?;
    }
    Ok(format!("{count} pairs balanced; k=1 pair is (Δ^deg R, R^deg Δ)"))
}

fn random_poly(rng: &mut ChaCha8Rng, rows: usize, cols: usize, terms: usize) -> FloatPoly {
    let t: Vec<(MatrixExponent, Complex64)> = (0..terms)
        .map(|_| {
            let ex: Vec<u32> = (0..rows * cols).map(|_| rng.gen_range(0..3)).collect();
            let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            (MatrixExponent::from_flat(rows, cols, ex), c)
        })
        .collect();
    FloatPoly::from_terms(rows, cols, t)
}

fn c11_distance_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let cols = rng.gen_range(2..5);
        let s = GroupElement::random(&mut rng, cols, 0.7);
        let v = random_poly(&mut rng, 2, cols, 4).right_substitute(s.matrix()).map_err(e)?;
        let w = random_poly(&mut rng, 1, cols, 5).right_substitute(s.matrix()).map_err(e)?;
        let zero = FloatPoly::zero(1, cols);
        let d = fs_distance_sum(&[&v, &w], &[&v, &zero]).map_err(e)?;
        let lhs = log_fs_norm_sq(&w).map_err(e)? - log_fs_norm_sq(&v).map_err(e)?;
        let rhs = (d.tan() * d.tan()).ln();
        worst = worst.max((lhs - rhs).abs());
        ensure((lhs - rhs).abs() < 1e-9, || format!("{lhs} vs {rhs}"))?;
    }
    Ok(format!("100 triples, max error {worst:.1e}"))
}

fn c12_scan() -> Check {
    let c = conic().map_err(e)?;
    let s = quadric_surface().map_err(e)?;
    let mut out = Vec::new();
    for (inst, k) in [(&c, 1), (&s, 1), (&s, 2)] {
        let r = stability_scan(inst, k, 3).map_err(e)?;
        ensure(r.no_destabilizer(), || format!("{} k={k}: {} positive, worst {}", inst.name, r.positive, r.worst))?;
        out.push(format!("{} k={k}: {} λ", inst.name, r.scanned));
    }
    Ok(format!("no A_k > 0 ({})", out.join(", ")))
}

fn c13_optimizer() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for (inst, k) in [(conic().map_err(e)?, 1), (quadric_surface().map_err(e)?, 2)] {
        let f = EnergyFunction::new(&inst, k).map_err(e)?;
        let size = inst.ambient() as usize + 1;
        for _ in 0..5 {
            let s = GroupElement::random(&mut rng, size, 0.5);
            let xi = random_generator(&mut rng, size, 1.0);
            let an = f.directional_derivative(&s, &xi).map_err(e)?;
            let fd = finite_difference(&f, &s, &xi, 1e-5).map_err(e)?;
            let rel = (an - fd).abs() / an.abs().max(1e-3);
            worst = worst.max(rel);
            ensure(rel < 1e-4, || format!("{} k={k}: analytic {an}, FD {fd}", inst.name))?;
        }
    }
    let c = conic().map_err(e)?;
    let opts = MinimizeOptions {
        max_iters: 40,
        ..Default::default()
    };
    for seed in 0..5 {
        let start = GroupElement::random(&mut ChaCha8Rng::seed_from_u64(seed), 3, 0.5);
        let r = minimize_energy(&c, 1, &start, &opts).map_err(e)?;
        let mono = r.trace.windows(2).all(|w| w[1].energy <= w[0].energy);
        let first = r.trace.first().map(|t| t.energy);
        let last = r.trace.last().map(|t| t.energy);
        ensure(mono && last < first, || format!("seed {seed}: trace not monotone"))?;
    }
    Ok(format!("max relative FD error {worst:.1e}; 5 monotone descents"))
}

fn main() {
    let criteria: [(&str, Criterion); 13] = [
        ("jet Chern derivation", c1_jet_chern),
        ("degree oracles", c2_degree_oracles),
        ("build-time consistency", c3_build_consistency),
        ("triple-evaluator agreement", c4_triple_agreement),
        ("integer slopes", c5_integer_slopes),
        ("algebraic slope fit", c6_slope_fit),
        ("analytic slope cross-check", c7_analytic_slope),
        ("path independence", c8_path_independence),
        ("μ and Gauss–Bonnet", c9_mu_gauss_bonnet),
        ("pair structure", c10_pair_structure),
        ("distance identity", c11_distance_identity),
        ("stability scan", c12_scan),
        ("optimizer contract", c13_optimizer),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let res = check();
        let dt = t0.elapsed();
        let (tag, detail) = match res {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] {:>2}. {name}: {detail} ({dt:.2?})", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
