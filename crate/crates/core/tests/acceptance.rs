//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the output.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use sadic::dirichlet::solve_dirichlet;
use sadic::experiments::{csv_bodies, manifest_path, replay, run_text, Overrides, RunManifest};
use sadic::lattice::{
    check_correspondence, covolume_submodule, delta_lattice, subsets, wedge_action, PrimitiveSubmodule, SLatticeBasis,
    Structure, WedgeVec,
};
use sadic::measures::{certify_good, coordinate_abs, sublevel_fraction, MeasureSpec, PlaceBall, SamplePoint};
use sadic::number_field::{check_product_formula, places_over, NumberField, Place, SUPPORTED_D};
use sadic::s_adic::{SConfig, DEFAULT_CAP};

const INSTANCES: usize = 500;
const C1_BUDGET: Duration = Duration::from_secs(600);
const IMPROVE_EPS: f64 = 0.5;
const WEDGE_SAMPLES: usize = 200;
const WEDGE_REL: f64 = 1e-9;
const PRODUCT_SAMPLES: usize = 1000;
const PRODUCT_TOL: f64 = 1e-12;
const GOOD_N: usize = 100_000;
const GOOD_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.25, 0.5];
const C5_BUDGET: Duration = Duration::from_secs(120);
const NONDIV_N: usize = 100_000;
const DISCAN_N: usize = 10_000;
const DISCAN_LEN: usize = 10;
const SIGMA: f64 = 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1_2() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fields = vec![NumberField::rationals()];
    fields.extend(SUPPORTED_D.iter().map(|&d| NumberField::imaginary_quadratic(d).unwrap()));
    let (mut solved, mut failures) = (0usize, Vec::new());
    let (mut witnesses, mut violations) = (0usize, Vec::new());
    for i in 0..INSTANCES {
        let inst = common::random_instance(&mut rng, fields[i % fields.len()]);
        match solve_dirichlet(&inst, DEFAULT_CAP) {
            Ok(sol) => {
                let (rows, cols) = inst.t.bounds(&inst.cfg, 1.0).unwrap();
                let places = inst.cfg.places();
                let within = |vals: &[Vec<f64>], bounds: &[Vec<sadic::s_adic::LocalBound>]| {
                    vals.iter().zip(bounds).zip(places).all(|((vs, bs), v)| {
                        vs.iter().zip(bs).all(|(x, b)| *x <= b.to_abs(v) * (1.0 + sadic::s_adic::TAU_ARCH))
                    })
                };
                let nonzero = sol.x.iter().any(|x| !x.is_zero());
                if nonzero && within(&sol.row_residuals, &rows) && within(&sol.col_norms, &cols) {
                    solved += 1;
                } else {
                    failures.push(format!("instance {i}: witness fails re-verification"));
                }
            }
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
        match check_correspondence(&inst, IMPROVE_EPS, DEFAULT_CAP) {
            Ok(r) => {
                if let Some(p) = &r.point {
                    witnesses += 1;
                    if !(p.content < r.threshold) {
                        violations.push(format!("instance {i}: content {} >= {}", p.content, r.threshold));
                    }
                }
            }
            Err(e) => violations.push(format!("instance {i}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let c1 = outcome(
        failures.is_empty() && elapsed <= C1_BUDGET,
        format!(
            "{solved}/{INSTANCES} instances solved and re-verified, {} falsification events, {:.1}s (budget {}s){}",
            failures.len(),
            elapsed.as_secs_f64(),
            C1_BUDGET.as_secs(),
            failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
        ),
    );
    let c2 = outcome(
        violations.is_empty(),
        format!(
            "{witnesses} instances improvable at eps = {IMPROVE_EPS}, {} with lattice content not below the threshold{}",
            violations.len(),
            violations.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
    (c1, c2)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let q = NumberField::rationals();
    let g = NumberField::gaussian();
    let places = [
        Place::Real,
        Place::Complex,
        places_over(q, 2).unwrap()[0],
        places_over(g, 5).unwrap()[0],
    ];
    let (mut checked, mut bad) = (0usize, Vec::new());
    for v in &places {
        for dim in 1..=4 {
            for s in [Structure::Diagonal, Structure::Unipotent, Structure::Flow] {
                for _ in 0..WEDGE_SAMPLES {
                    let m = common::structured_matrix(&mut rng, v, dim, s);
                    for rank in 1..=dim {
                        let coeffs = (0..subsets(dim, rank).len()).map(|_| common::random_local(&mut rng, v)).collect();
                        let w = WedgeVec::new(dim, rank, coeffs).unwrap();
                        let a = wedge_action(&m, &w, s).unwrap();
                        let b = wedge_action(&m, &w, Structure::Generic).unwrap();
                        checked += 1;
                        if !a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| common::agree(x, y, WEDGE_REL)) {
                            bad.push(format!("{v} dim {dim} rank {rank} {s:?}"));
                        }
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{checked} structured actions against minor expansion ({WEDGE_SAMPLES} matrices per shape, dims 1-4, all ranks, \
             real/complex/2-adic/5-adic), {} mismatches",
            bad.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut fields = vec![NumberField::rationals()];
    fields.extend(SUPPORTED_D.iter().map(|&d| NumberField::imaginary_quadratic(d).unwrap()));
    let mut worst = 0.0f64;
    for k in &fields {
        let mut done = 0;
        while done < PRODUCT_SAMPLES {
            let x = common::random_kelem(&mut rng, *k, 100_000, 1_000);
            if x.is_zero() {
                continue;
            }
            worst = worst.max(check_product_formula(&x).unwrap());
            done += 1;
        }
    }
    let cq = NumberField::rationals().field_constant();
    let ci = NumberField::gaussian().field_constant();
    let ci_err = (ci - 4.0 / std::f64::consts::PI).abs();
    outcome(
        worst < PRODUCT_TOL && cq == 1.0 && ci_err < PRODUCT_TOL,
        format!(
            "max |log prod_v |x|_v| = {worst:.2e} over {} fields x {PRODUCT_SAMPLES}; const_Q = {cq}; |const_Q(i) - 4/pi| = {ci_err:.1e}",
            fields.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let spec = MeasureSpec::new(vec![PlaceBall::interval(-1.0, 1.0)]).unwrap();
    let x = coordinate_abs(0);
    let cert = certify_good(&[&x], &spec, 1.0, 1.0, &GOOD_GRID, GOOD_N, 5).unwrap();
    let sq = |p: &SamplePoint| p[0][0].abs_f64().powi(2);
    let mut worst = 0.0f64;
    for (i, eps) in GOOD_GRID.iter().enumerate() {
        let (p, se) = sublevel_fraction(&sq, &spec, *eps, GOOD_N, 50 + i as u64).unwrap();
        worst = worst.max((p - eps.sqrt()).abs() / se);
    }
    let elapsed = start.elapsed();
    outcome(
        cert.pass && worst <= SIGMA && elapsed <= C5_BUDGET,
        format!(
            "x is (1,1)-good: {}; x^2 sublevel fractions within {worst:.2} stderr of sqrt(eps) at N = {GOOD_N}; {:.1}s",
            cert.pass,
            elapsed.as_secs_f64()
        ),
    )
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn veronese_config(experiment: &str, two_adic: bool, extra: &str) -> String {
    let (s, ball, t) = if two_adic {
        (r#"["inf",2]"#, r#"{"inf":{"interval":[0,1]},"2":{}}"#, r#"{"inf":16,"2":4}"#)
    } else {
        (r#"["inf"]"#, r#"{"inf":{"interval":[0,1]}}"#, r#"{"inf":16}"#)
    };
    format!(
        r#"{{"experiment":"{experiment}","field":"Q","S":{s},"ball":{ball},"map":{{"veronese":2}},
            "t":{{"central":{t}}},"seed":11{extra}}}"#
    )
}

fn constants_line(c: &Value) -> String {
    format!(
        "rho_v = {}, rho_tilde = {:.4e}, rho = {:.4e}, C_tilde = {:.4e}, eps0 = {:.4e}",
        c["rho_v"], c["rho_tilde"].as_f64().unwrap(), c["rho"].as_f64().unwrap(),
        c["C_tilde"].as_f64().unwrap(), c["eps0"].as_f64().unwrap()
    )
}

fn criterion_6(root: &Path, runs: &mut Vec<(PathBuf, RunManifest)>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, two) in [("S={inf}", false), ("S={inf,2}", true)] {
        let dir = root.join(format!("nondiv-check-{}", if two { "inf2" } else { "inf" }));
        let cfg = veronese_config("nondiv-check", two, &format!(r#","samples":{NONDIV_N}"#));
        match run_text(&cfg, &dir, &Overrides::default()) {
            Ok(m) => {
                let rows = read_csv(&dir.join("report.csv"));
                let c = read_json(&dir.join("constants.json"));
                let cap = c["rho"].as_f64().unwrap();
                let ok = rows.iter().all(|r| {
                    let (eps, lhs, se, rhs): (f64, f64, f64, f64) =
                        (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
                    eps <= cap && lhs - SIGMA * se <= rhs
                });
                let max_lhs = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).fold(0.0, f64::max);
                pass &= ok;
                parts.push(format!("{label}: {} grid eps pass {ok}, max LHS {max_lhs}, {}", rows.len(), constants_line(&c)));
                runs.push((dir, m));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    outcome(pass, parts.join(" | "))
}

fn criterion_7(root: &Path, runs: &mut Vec<(PathBuf, RunManifest)>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, two) in [("S={inf}", false), ("S={inf,2}", true)] {
        let dir = root.join(format!("nondiv-discan-{}", if two { "inf2" } else { "inf" }));
        let extra = format!(
            r#","samples":{DISCAN_N},"t0":1,"schedule":{{"len":{DISCAN_LEN},"arch_start":4,"arch_ratio":2}}"#
        );
        let cfg = veronese_config("nondiv-discan", two, &extra);
        match run_text(&cfg, &dir, &Overrides::default()) {
            Ok(m) => {
                let rows = read_csv(&dir.join("discan.csv"));
                let c = read_json(&dir.join("constants.json"));
                let f = |r: &Vec<String>, i: usize| r[i].parse::<f64>().unwrap();
                let bounded = rows.iter().all(|r| f(r, 3) <= f(r, 5) + SIGMA * f(r, 4));
                let (first, last) = (&rows[0], &rows[rows.len() - 1]);
                let decay = f(last, 3) <= f(first, 3) + SIGMA * (f(first, 4).hypot(f(last, 4)));
                let eps = c["eps"].as_f64().unwrap();
                let eps_ok = (eps - c["eps0"].as_f64().unwrap() / 2.0).abs() <= 1e-15 * eps.abs().max(1e-300);
                pass &= bounded && decay && eps_ok && rows.len() == DISCAN_LEN;
                parts.push(format!(
                    "{label}: eps = eps0/2 = {eps:.3e}, bound {:.3e}, fractions {} .. {}, all bounded {bounded}, decay {decay}",
                    f(first, 5),
                    f(first, 3),
                    f(last, 3)
                ));
                runs.push((dir, m));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    outcome(pass, parts.join(" | "))
}

fn criterion_8() -> Outcome {
    let q = NumberField::rationals();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut deltas = 0;
    let mut bad = Vec::new();
    for primes in [&[][..], &[2][..], &[3][..], &[2, 3][..], &[2, 5][..], &[2, 3, 5][..]] {
        let cfg = SConfig::with_primes(q, primes).unwrap();
        for m in 1..=3 {
            let d = delta_lattice(&SLatticeBasis::identity(&cfg, m), None, DEFAULT_CAP).unwrap().delta;
            deltas += 1;
            if d != 1.0 {
                bad.push(format!("delta(O_S^{m}) = {d} for primes {primes:?}"));
            }
        }
    }
    let mut fields = vec![q];
    fields.extend(SUPPORTED_D.iter().map(|&d| NumberField::imaginary_quadratic(d).unwrap()));
    let mut covs = 0;
    for k in fields {
        for _ in 0..3 {
            let cfg = common::random_s(&mut rng, k, 2);
            for m in 1..=3 {
                let c = covolume_submodule(&PrimitiveSubmodule::full(&cfg, m), &SLatticeBasis::identity(&cfg, m)).unwrap();
                covs += 1;
                if c != k.sqrt_abs_disc().powi(m as i32) {
                    bad.push(format!("covolume {c} for {k} m = {m}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{deltas} delta(O_S^m) values over Q, {covs} covolumes over all fields, {} deviations", bad.len()),
    )
}

fn criterion_9(root: &Path, runs: &[(PathBuf, RunManifest)]) -> Outcome {
    let mut same = 0;
    let mut bad = Vec::new();
    for (dir, m) in runs {
        let again = root.join(format!("replay-{}", m.run_id));
        match replay(&manifest_path(dir), &again) {
            Ok(m2) => {
                let (a, b) = (csv_bodies(dir, m).unwrap(), csv_bodies(&again, &m2).unwrap());
                if a == b && !a.is_empty() && m.config_hash == m2.config_hash {
                    same += 1;
                } else {
                    bad.push(m.run_id.clone());
                }
            }
            Err(e) => bad.push(format!("{}: {e}", m.run_id)),
        }
    }
    outcome(
        bad.is_empty() && same > 0,
        format!("{same}/{} acceptance runs replayed from their manifests with byte-identical CSV bodies", runs.len()),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut runs = Vec::new();
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let (c1, c2) = criterion_1_2();
    results.push((1, c1));
    results.push((2, c2));
    results.push((3, criterion_3()));
    results.push((4, criterion_4()));
    results.push((5, criterion_5()));
    results.push((6, criterion_6(root, &mut runs)));
    results.push((7, criterion_7(root, &mut runs)));
    results.push((8, criterion_8()));
    results.push((9, criterion_9(root, &runs)));
    for (k, o) in &results {
        println!("criterion {k}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
