use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::output::{canonical_json, fmt_f64, sha256_hex, write_json, Table};
use crate::dirichlet::{is_improvable_at, scan_di, solve_dirichlet, DirichletInstance, DirichletSolution};
use crate::error::{Error, Result};
use crate::lattice::{check_correspondence, delta_lattice, enumerate_primitive_submodules, flow_lattice};
use crate::measures::{
    besicovitch_constant, certify_good, combine_good_product, estimate_rho_v, federer_constant, Combination,
    GoodCert, MapSpec, MeasureSpec, RhoEstimate, SampleFn, SamplePoint,
};
use crate::nondiv::{
    di_measure_scan, map_lattice, prop_constants, qn_empirical_check, DiScanSetup, PropConstants, PropInputs, QNConfig,
};
use crate::s_adic::{LocalValue, SConfig, DEFAULT_PREC};

/// Command-line overrides applied to a configuration before it is hashed.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub cap: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

/// Record of one run. Timestamps live only here, never in the artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub experiment: String,
    pub config_hash: String,
    /// Canonical configuration, stored next to the manifest.
    pub config_file: String,
    pub seed: u64,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub artifacts: Vec<ArtifactEntry>,
}

/// Reads a configuration file and runs it into `out`.
pub fn run(config: &Path, out: &Path, ov: &Overrides) -> Result<RunManifest> {
    let text = fs::read_to_string(config)?;
    run_text(&text, out, ov)
}

/// Re-executes the configuration recorded in a manifest into `out`.
pub fn replay(manifest: &Path, out: &Path) -> Result<RunManifest> {
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(manifest)?)?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(dir.join(&m.config_file))?;
    if sha256_hex(text.trim_end().as_bytes()) != m.config_hash {
        return Err(Error::invalid("stored configuration does not match the manifest hash"));
    }
    run_text(&text, out, &Overrides::default())
}

pub fn run_text(text: &str, out: &Path, ov: &Overrides) -> Result<RunManifest> {
    let mut v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| Error::invalid("the configuration must be a JSON object"))?;
    if let Some(s) = ov.seed {
        obj.insert("seed".into(), json!(s));
    }
    if let Some(c) = ov.cap {
        obj.insert("cap".into(), json!(c));
    }
    let canonical = canonical_json(&v);
    let cfg = ExperimentConfig::from_json(&canonical)?;
    let hash = sha256_hex(canonical.as_bytes());
    fs::create_dir_all(out)?;
    let started = chrono::Utc::now().to_rfc3339();
    let files = match ov.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("worker pool: {e}")))?
            .install(|| execute(&cfg, out))?,
        None => execute(&cfg, out)?,
    };
    let config_file = "config.json".to_string();
    fs::write(out.join(&config_file), canonical.clone() + "\n")?;
    let mut artifacts = Vec::with_capacity(files.len());
    for f in files {
        let bytes = fs::read(out.join(&f))?;
        artifacts.push(ArtifactEntry {
            sha256: sha256_hex(&bytes),
            file: f,
        });
    }
    let manifest = RunManifest {
        run_id: format!("{}-{}-s{}", cfg.experiment, &hash[..12], cfg.seed()),
        experiment: cfg.experiment.clone(),
        config_hash: hash,
        config_file,
        seed: cfg.seed(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        artifacts,
    };
    write_json(out, "manifest", &manifest)?;
    Ok(manifest)
}

fn execute(c: &ExperimentConfig, out: &Path) -> Result<Vec<String>> {
    let cfg = c.s_config()?;
    match c.experiment.as_str() {
        "dirichlet-solve" => dirichlet_solve(c, &cfg, out, None),
        "dirichlet-improvable" => {
            let eps = *c.require(&c.eps, "eps")?;
            dirichlet_solve(c, &cfg, out, Some(eps))
        }
        "di-scan" => di_scan(c, &cfg, out),
        "delta-trajectory" => delta_trajectory(c, &cfg, out),
        "lattice-delta" => lattice_delta(c, &cfg, out),
        "lattice-correspond" => lattice_correspond(c, &cfg, out),
        "good-certify" => good_certify(c, &cfg, out),
        "good-rho" => good_rho(c, &cfg, out),
        "nondiv-constants" => nondiv_constants(c, &cfg, out),
        "nondiv-check" => nondiv_check(c, &cfg, out),
        "nondiv-discan" => nondiv_discan(c, &cfg, out),
        other => Err(Error::invalid(format!("unknown experiment {other:?}"))),
    }
}

fn instance(c: &ExperimentConfig, cfg: &SConfig) -> Result<DirichletInstance> {
    let (m, n) = c.dims()?;
    DirichletInstance::new(cfg.clone(), c.matrices(cfg)?, c.ray_point(cfg, m, n)?)
}

fn solution_json(s: &DirichletSolution) -> Value {
    json!({
        "x": s.x.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "y": s.y.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "row_residuals": s.row_residuals,
        "col_norms": s.col_norms,
        "residual_content": s.residual_content,
    })
}

fn solution_table(cfg: &SConfig, s: &DirichletSolution) -> Table {
    let mut t = Table::new(
        "solution",
        vec![
            ("place", "place of S"),
            ("kind", "row: |A x - y|_v per row; col: |x_j|_v per column"),
            ("index", "row or column index"),
            ("abs_value", "normalized absolute value at the place"),
        ],
    );
    for (vi, v) in cfg.places().iter().enumerate() {
        for (i, r) in s.row_residuals[vi].iter().enumerate() {
            t.push(vec![v.to_string(), "row".into(), i.to_string(), fmt_f64(*r)]);
        }
        for (j, r) in s.col_norms[vi].iter().enumerate() {
            t.push(vec![v.to_string(), "col".into(), j.to_string(), fmt_f64(*r)]);
        }
    }
    t
}

fn dirichlet_solve(c: &ExperimentConfig, cfg: &SConfig, out: &Path, eps: Option<f64>) -> Result<Vec<String>> {
    let inst = instance(c, cfg)?;
    let mut files = Vec::new();
    match eps {
        None => {
            let s = solve_dirichlet(&inst, c.cap())?;
            files.push(write_json(out, "solution", &solution_json(&s))?);
            files.extend(solution_table(cfg, &s).write(out)?);
        }
        Some(e) => {
            let w = is_improvable_at(&inst, e, c.cap())?;
            let body = json!({"eps": e, "improvable": w.is_some(), "witness": w.as_ref().map(solution_json)});
            files.push(write_json(out, "improvable", &body)?);
            if let Some(s) = &w {
                files.extend(solution_table(cfg, s).write(out)?);
            }
        }
    }
    Ok(files)
}

fn di_scan(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let (m, n) = c.dims()?;
    let a = c.matrices(cfg)?;
    let schedule = c.schedule(cfg, m, n)?;
    let eps = *c.require(&c.eps, "eps")?;
    let rep = scan_di(cfg, &a, &schedule, eps, c.t0.unwrap_or(0.0), c.cap())?;
    let mut t = Table::new(
        "scan",
        vec![
            ("t_index", "position in the schedule"),
            ("place", "place of S"),
            ("t_components", "absolute values of the ray point at the place, eps then delta, space separated"),
            ("included", "all projections exceed t0"),
            ("improvable", "the tightened system has a solution"),
            ("witness_x", "x of the witness, space separated; empty without witness"),
            ("witness_y", "y of the witness, space separated; empty without witness"),
            ("residual_content", "product over places of max_i |A x - y|_v; empty without witness"),
        ],
    );
    let join = |v: &[crate::number_field::KElem]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for r in &rep.rows {
        for (vi, v) in cfg.places().iter().enumerate() {
            let (x, y, rc) = match &r.witness {
                Some(w) => (join(&w.x), join(&w.y), fmt_f64(w.residual_content)),
                None => (String::new(), String::new(), String::new()),
            };
            let comps: Vec<String> = r.t.components()[vi].iter().map(|c| fmt_f64(*c)).collect();
            t.push(vec![
                r.t_index.to_string(),
                v.to_string(),
                comps.join(" "),
                r.included.to_string(),
                r.witness.is_some().to_string(),
                x,
                y,
                rc,
            ]);
        }
    }
    let mut files = t.write(out)?;
    files.push(write_json(out, "scan", &json!({"eps": eps, "t0": rep.t0, "aggregate": rep.aggregate}))?);
    Ok(files)
}

fn delta_trajectory(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let (m, n) = c.dims()?;
    let a = c.matrices(cfg)?;
    let schedule = c.schedule(cfg, m, n)?;
    let eps = *c.require(&c.eps, "eps")?;
    let threshold = ((m + n) as f64).powf(cfg.threshold_exponent()) * eps;
    let mut t = Table::new(
        "trajectory",
        vec![
            ("t_index", "position in the schedule"),
            ("t_sup", "sup norm of t"),
            ("delta_upper_bound", "shortest content of the flowed lattice"),
            ("threshold", "(m+n)^(|S_r|/2+|S_c|) eps"),
            ("below_threshold", "delta is below the threshold"),
        ],
    );
    for (k, tp) in schedule.iter().enumerate() {
        let l = flow_lattice(cfg, &a, tp)?;
        let d = delta_lattice(&l, None, c.cap())?;
        t.push(vec![
            k.to_string(),
            fmt_f64(tp.sup_norm()),
            fmt_f64(d.delta),
            fmt_f64(threshold),
            (d.delta < threshold).to_string(),
        ]);
    }
    t.write(out)
}

fn lattice_delta(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let inst = instance(c, cfg)?;
    let l = flow_lattice(cfg, &inst.a, &inst.t)?;
    let d = delta_lattice(&l, None, c.cap())?;
    let body = json!({
        "delta": d.delta,
        "argmin": d.argmin.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "theta": d.region.theta,
    });
    Ok(vec![write_json(out, "delta", &body)?])
}

fn lattice_correspond(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let inst = instance(c, cfg)?;
    let eps = *c.require(&c.eps, "eps")?;
    let r = check_correspondence(&inst, eps, c.cap())?;
    if !r.holds {
        return Err(Error::Falsified(format!(
            "improvable at ε = {eps} but the lattice point exceeds {}",
            r.threshold
        )));
    }
    let body = json!({
        "eps": r.eps,
        "threshold": r.threshold,
        "witness": r.witness.as_ref().map(solution_json),
        "point": r.point.as_ref().map(|p| json!({
            "z": p.z.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "content": p.content,
        })),
        "holds": r.holds,
    });
    Ok(vec![write_json(out, "correspond", &body)?])
}

/// The measure and map restricted to place `v`.
fn at_place(spec: &MeasureSpec, map: &MapSpec, v: usize) -> Result<(MeasureSpec, MapSpec)> {
    Ok((
        MeasureSpec::new(vec![spec.balls[v].clone()])?,
        MapSpec::new(vec![map.comps[v].clone()])?,
    ))
}

/// `(2k(k+1)^{1/k}, 1/k)` for polynomials of degree at most `k`.
fn polynomial_candidate(map: &MapSpec) -> (f64, f64) {
    let k = map
        .comps
        .iter()
        .flatten()
        .flat_map(|p| p.terms.iter().map(|t| t.1.iter().sum::<u32>()))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    (2.0 * k * (k + 1.0).powf(1.0 / k), 1.0 / k)
}

struct GoodOutcome {
    per_place: Vec<GoodCert>,
    product: Option<crate::measures::ProductCert>,
    c: f64,
    alpha: f64,
}

/// Certifies the coordinate functions and random unit combinations of
/// `1, f_1, …, f_n` at every place, then the product over places.
fn certify_map(c: &ExperimentConfig, cfg: &SConfig, spec: &MeasureSpec, map: &MapSpec) -> Result<GoodOutcome> {
    let g = c.good.clone().unwrap_or_default();
    let (c0, a0) = polynomial_candidate(map);
    let (cc, aa) = (g.c.unwrap_or(c0), g.alpha.unwrap_or(a0));
    let seed = c.seed();
    let mut per_place = Vec::with_capacity(cfg.len());
    let mut firsts: Vec<Combination> = Vec::new();
    for (vi, v) in cfg.places().iter().enumerate() {
        let (sp, mp) = at_place(spec, map, vi)?;
        let n = mp.n();
        let mut fam: Vec<Combination> = (1..=n)
            .map(|i| {
                let coeffs = (0..=n)
                    .map(|k| {
                        if k == i {
                            LocalValue::one(v, DEFAULT_PREC)
                        } else {
                            LocalValue::zero(v)
                        }
                    })
                    .collect();
                Combination::new(mp.clone(), 0, coeffs)
            })
            .collect::<Result<_>>()?;
        fam.extend(crate::measures::random_combinations(&mp, &sp, 0, g.family, seed.wrapping_add(17 + vi as u64))?);
        firsts.push(Combination::new(
            MapSpec::new(vec![map.comps[vi].clone()])?,
            0,
            fam[0].coeffs.clone(),
        )?);
        let refs: Vec<&dyn SampleFn> = fam.iter().map(|f| f as &dyn SampleFn).collect();
        per_place.push(certify_good(&refs, &sp, cc, aa, &g.eps_grid, g.samples, seed.wrapping_add(101 + vi as u64))?);
    }
    if cfg.len() == 1 {
        let p = &per_place[0];
        return Ok(GoodOutcome {
            c: p.c,
            alpha: p.alpha,
            product: None,
            per_place,
        });
    }
    let prod = move |x: &SamplePoint| -> f64 {
        firsts
            .iter()
            .enumerate()
            .map(|(vi, f)| f.abs_at(&vec![x[vi].clone()]))
            .product()
    };
    let pc = combine_good_product(&per_place, &prod, spec, &g.eps_grid, g.samples, seed.wrapping_add(211))?;
    Ok(GoodOutcome {
        c: pc.candidate.0,
        alpha: pc.candidate.1,
        product: Some(pc),
        per_place,
    })
}

fn evidence_table(cfg: &SConfig, g: &GoodOutcome) -> Table {
    let mut t = Table::new(
        "evidence",
        vec![
            ("ball_id", "place/function/ball of the grid"),
            ("epsilon", "relative level eps: sublevel set |f| < eps sup|f|"),
            ("fraction", "empirical measure of the sublevel set"),
            ("stderr", "binomial standard error"),
            ("bound", "C eps^alpha"),
            ("pass", "fraction <= bound + 3 stderr"),
        ],
    );
    let mut push = |prefix: String, cert: &GoodCert| {
        for e in &cert.evidence {
            t.push(vec![
                format!("{prefix}/{}", e.ball_id),
                fmt_f64(e.epsilon),
                fmt_f64(e.fraction),
                fmt_f64(e.stderr),
                fmt_f64(e.bound),
                e.pass.to_string(),
            ]);
        }
    };
    for (v, cert) in cfg.places().iter().zip(&g.per_place) {
        push(v.to_string(), cert);
    }
    if let Some(p) = &g.product {
        push("product".into(), &p.recert);
    }
    t
}

fn good_json(cfg: &SConfig, g: &GoodOutcome) -> Value {
    json!({
        "places": cfg.places().iter().zip(&g.per_place).map(|(v, c)| json!({
            "place": v.to_string(), "C": c.c, "alpha": c.alpha, "pass": c.pass,
        })).collect::<Vec<_>>(),
        "product": g.product.as_ref().map(|p| json!({
            "candidate": [p.candidate.0, p.candidate.1],
            "confirmed": p.confirmed.map(|x| [x.0, x.1]),
        })),
        "C": g.c,
        "alpha": g.alpha,
        "pass": g.per_place.iter().all(|c| c.pass) && g.product.as_ref().is_none_or(|p| p.confirmed.is_some()),
    })
}

fn good_certify(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let spec = c.measure(cfg)?;
    let map = c.map_spec(cfg, &spec)?;
    let g = certify_map(c, cfg, &spec, &map)?;
    let mut files = evidence_table(cfg, &g).write(out)?;
    files.push(write_json(out, "cert", &good_json(cfg, &g))?);
    Ok(files)
}

fn rho_estimates(c: &ExperimentConfig, cfg: &SConfig, spec: &MeasureSpec, map: &MapSpec) -> Result<Vec<RhoEstimate>> {
    let nd = c.nondiv.clone().unwrap_or_default();
    (0..cfg.len())
        .map(|vi| {
            let (sp, mp) = at_place(spec, map, vi)?;
            let net = if cfg.places()[vi].is_archimedean() {
                nd.arch_net
            } else {
                nd.finite_net
            };
            estimate_rho_v(&mp, 0, &sp, nd.rho_samples, net, c.seed().wrapping_add(307 + vi as u64))
        })
        .collect()
}

fn rho_table(cfg: &SConfig, rho: &[RhoEstimate]) -> Table {
    let mut t = Table::new(
        "rho",
        vec![
            ("place", "place of S"),
            ("raw", "minimum over the coefficient net of the sample sup"),
            ("lower", "raw minus the net discretization error"),
            ("net_size", "coefficient vectors tested"),
            ("samples", "sample points"),
        ],
    );
    for (v, r) in cfg.places().iter().zip(rho) {
        t.push(vec![
            v.to_string(),
            fmt_f64(r.raw),
            fmt_f64(r.lower),
            r.net_size.to_string(),
            r.samples.to_string(),
        ]);
    }
    t
}

fn good_rho(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let spec = c.measure(cfg)?;
    let map = c.map_spec(cfg, &spec)?;
    rho_table(cfg, &rho_estimates(c, cfg, &spec, &map)?).write(out)
}

/// Everything the nondivergence experiments derive from the map and measure.
pub struct Pipeline {
    pub spec: MeasureSpec,
    pub map: MapSpec,
    pub rho: Vec<RhoEstimate>,
    pub c: f64,
    pub alpha: f64,
    pub d: f64,
    pub n_x: f64,
    pub consts: PropConstants,
    good: GoodOutcome,
}

fn pipeline(c: &ExperimentConfig, cfg: &SConfig) -> Result<Pipeline> {
    let spec = c.measure(cfg)?;
    spec.check_places(cfg)?;
    let map = c.map_spec(cfg, &spec)?;
    let rho = rho_estimates(c, cfg, &spec, &map)?;
    let good = certify_map(c, cfg, &spec, &map)?;
    let confirmed = good.per_place.iter().all(|x| x.pass) && good.product.as_ref().is_none_or(|p| p.confirmed.is_some());
    if !confirmed {
        return Err(Error::LowerBound(format!(
            "({}, {})-goodness was not confirmed on the ball",
            good.c, good.alpha
        )));
    }
    let d = federer_constant(&spec);
    let n_x = c.nondiv.as_ref().and_then(|x| x.n_x).unwrap_or_else(|| besicovitch_constant(&spec));
    let rho_v: Vec<f64> = rho.iter().map(|r| r.lower).collect();
    let inp = PropInputs {
        n: map.n(),
        c: good.c,
        alpha: good.alpha,
        d,
        n_x,
        s_r: cfg.real_count(),
        s_c: cfg.complex_count(),
    };
    let consts = prop_constants(&inp, cfg.field(), &rho_v)?;
    Ok(Pipeline {
        spec,
        map,
        rho,
        c: good.c,
        alpha: good.alpha,
        d,
        n_x,
        consts,
        good,
    })
}

fn constants_json(p: &Pipeline) -> Value {
    json!({
        "rho_v": p.consts.rho_v,
        "rho_tilde": p.consts.rho_tilde,
        "rho": p.consts.rho,
        "C_tilde": p.consts.c_tilde,
        "eps0": p.consts.eps0,
        "C": p.c,
        "alpha": p.alpha,
        "D": p.d,
        "N_X": p.n_x,
    })
}

fn nondiv_constants(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let p = pipeline(c, cfg)?;
    let mut files = rho_table(cfg, &p.rho).write(out)?;
    files.extend(evidence_table(cfg, &p.good).write(out)?);
    files.push(write_json(out, "constants", &constants_json(&p))?);
    Ok(files)
}

fn nondiv_check(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let p = pipeline(c, cfg)?;
    let nd = c.nondiv.clone().unwrap_or_default();
    let n = p.map.n();
    let t = c.ray_point(cfg, 1, n)?;
    let mut deltas = Vec::new();
    for j in 1..=n + 1 {
        deltas.extend(enumerate_primitive_submodules(cfg, n + 1, j, nd.delta_height, c.cap())?);
    }
    let eps_cap = p.consts.rho / cfg.field().sqrt_abs_disc();
    let qn = QNConfig {
        m: n + 1,
        c: p.c,
        alpha: p.alpha,
        n_x: p.n_x,
        d: p.d,
        d_k: cfg.field().discriminant().unsigned_abs(),
        rho: p.consts.rho,
        eps_grid: nd.eps_rel.iter().map(|r| r * eps_cap).collect(),
        n_samples: c.samples.unwrap_or(10_000),
        seed: c.seed(),
        sup_samples: nd.sup_samples,
        delta_height: nd.delta_height,
        cap: c.cap(),
    };
    let map = &p.map;
    let report = qn_empirical_check(|x: &SamplePoint| map_lattice(map, cfg, &t, x), &p.spec, &deltas, &qn)?;
    let mut tab = Table::new(
        "report",
        vec![
            ("epsilon", "level"),
            ("lhs", "fraction of samples with delta(h(x) O_S^m) < epsilon"),
            ("stderr", "binomial standard error"),
            ("rhs", "m C (N_X D^2)^m (epsilon sqrt|D_K| / rho)^alpha"),
            ("pass", "lhs - 3 stderr <= rhs"),
        ],
    );
    for r in &report.rows {
        tab.push(vec![
            fmt_f64(r.epsilon),
            fmt_f64(r.lhs),
            fmt_f64(r.stderr),
            fmt_f64(r.rhs),
            r.pass.to_string(),
        ]);
    }
    let mut cov = Table::new(
        "covolumes",
        vec![
            ("rank", "rank of the primitive submodule"),
            ("basis", "basis vectors"),
            ("sup", "largest sampled covolume"),
        ],
    );
    for s in &report.covolume_sups {
        let basis: Vec<String> = s.basis.iter().map(|v| format!("({})", v.join(" "))).collect();
        cov.push(vec![s.rank.to_string(), basis.join(" "), fmt_f64(s.sup)]);
    }
    let mut files = tab.write(out)?;
    files.extend(cov.write(out)?);
    let mut cj = constants_json(&p);
    cj["pass"] = json!(report.pass);
    cj["delta_height"] = json!(nd.delta_height);
    files.push(write_json(out, "constants", &cj)?);
    Ok(files)
}

fn nondiv_discan(c: &ExperimentConfig, cfg: &SConfig, out: &Path) -> Result<Vec<String>> {
    let p = pipeline(c, cfg)?;
    let n = p.map.n();
    let schedule = c.schedule(cfg, 1, n)?;
    let eps = c.eps.unwrap_or(p.consts.eps0 / 2.0);
    let setup = DiScanSetup {
        cfg,
        schedule: &schedule,
        t0: c.t0.unwrap_or(0.0),
        n: c.samples.unwrap_or(10_000),
        seed: c.seed(),
        cap: c.cap(),
    };
    let rep = di_measure_scan(&p.map, &p.spec, eps, &p.consts, &setup)?;
    let mut tab = Table::new(
        "discan",
        vec![
            ("t_index", "position in the schedule"),
            ("t_norm", "sup norm of t"),
            ("included", "sup norm at least t0"),
            ("lhs", "fraction of samples whose flowed lattice is below the threshold"),
            ("stderr", "binomial standard error"),
            ("rhs", "C_tilde eps^alpha"),
            ("pass", "lhs <= rhs + 3 stderr"),
        ],
    );
    for r in &rep.rows {
        tab.push(vec![
            r.t_index.to_string(),
            fmt_f64(r.t_norm),
            r.included.to_string(),
            fmt_f64(r.fraction),
            fmt_f64(r.stderr),
            fmt_f64(r.bound),
            r.pass.to_string(),
        ]);
    }
    let mut files = tab.write(out)?;
    let mut cj = constants_json(&p);
    cj["eps"] = json!(eps);
    cj["threshold"] = json!(rep.threshold);
    cj["pass"] = json!(rep.pass);
    files.push(write_json(out, "constants", &cj)?);
    Ok(files)
}

/// Bodies of every CSV artifact listed in a manifest, keyed by file name.
pub fn csv_bodies(dir: &Path, m: &RunManifest) -> Result<Vec<(String, Vec<u8>)>> {
    m.artifacts
        .iter()
        .filter(|a| a.file.ends_with(".csv"))
        .map(|a| Ok((a.file.clone(), fs::read(dir.join(&a.file))?)))
        .collect()
}

/// `<dir>/manifest.json`.
pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = r#"{"experiment":"dirichlet-solve","field":"Q","S":["inf"],"m":1,"n":1,
        "A":{"inf":"sqrt2"},"t":{"central":{"inf":5}}}"#;

    #[test]
    fn smoke_solve_and_replay() {
        let a = tempfile::tempdir().unwrap();
        let m = run_text(SOLVE, a.path(), &Overrides::default()).unwrap();
        let sol: Value = serde_json::from_str(&fs::read_to_string(a.path().join("solution.json")).unwrap()).unwrap();
        assert_eq!(sol["x"][0], "5");
        assert_eq!(sol["y"][0], "7");
        let b = tempfile::tempdir().unwrap();
        let m2 = replay(&manifest_path(a.path()), b.path()).unwrap();
        assert_eq!(m.config_hash, m2.config_hash);
        assert_eq!(csv_bodies(a.path(), &m).unwrap(), csv_bodies(b.path(), &m2).unwrap());
    }

    #[test]
    fn unknown_experiment_is_schema_error() {
        let d = tempfile::tempdir().unwrap();
        let e = run_text(r#"{"experiment":"bogus","field":"Q","S":["inf"]}"#, d.path(), &Overrides::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn rational_trajectory_hits_zero_row() {
        let d = tempfile::tempdir().unwrap();
        let cfg = r#"{"experiment":"delta-trajectory","field":"Q","S":["inf"],"m":1,"n":1,
            "A":{"inf":"3/7"},"eps":0.5,"schedule":{"len":5,"arch_start":2,"arch_ratio":2}}"#;
        run_text(cfg, d.path(), &Overrides::default()).unwrap();
        let body = fs::read_to_string(d.path().join("trajectory.csv")).unwrap();
        let last = body.lines().last().unwrap();
        assert!(last.ends_with("true"), "{body}");
    }

    #[test]
    fn seed_override_changes_hash() {
        let a = tempfile::tempdir().unwrap();
        let m1 = run_text(SOLVE, a.path(), &Overrides::default()).unwrap();
        let m2 = run_text(
            SOLVE,
            a.path(),
            &Overrides {
                seed: Some(9),
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(m1.config_hash, m2.config_hash);
        assert_eq!(m2.seed, 9);
    }
}
