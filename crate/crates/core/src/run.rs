//! Task execution and artifact emission.
//!
//! Every run writes its files plus `manifest.json` (name, size and sha256 of
//! each file). Failed runs write `error.json` instead of results. Outputs
//! depend only on the configuration and seed.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::abel::{calibrate_velocity, AbelContext, FlowMode};
use crate::braid::{admissible_levels, monodromy_matrix, sweep_and_detect, ParameterPath};
use crate::config::{Format, RunConfig, StateBlock, Task};
use crate::curve::{build_curve, separation_roots, CurvePoint, RootChoice};
use crate::dubrovin::integrate_dubrovin;
use crate::error::{Error, Result};
use crate::model::{integrate_spins_sampled, ClassicalSpinState, EnergySpectrum};
use crate::pfaffian::{ground_state_amplitude, pfaffian, two_hole_amplitude, SkewMatrix};
use crate::richardson::{exact_diagonalize, ground_occupation, solve_richardson, SenioritySector};
use crate::theta::JacobianPoint;

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "GAUDIN_FORGE_THREADS";

/// Overrides applied on top of a parsed configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub mode: Option<FlowMode>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(d) = &o.out {
            self.output.directory = Some(d.clone());
        }
        if let Some(s) = o.seed {
            self.seed = Some(s);
            if let Some(StateBlock::Random { seed, .. }) = &mut self.state {
                *seed = Some(s);
            }
        }
        if let Some(t) = o.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("--tol must be positive, got {t}")));
            }
            if let Some(time) = &mut self.time {
                time.tol = t;
            }
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        Ok(())
    }

    /// Run seed; random states without their own seed use it too.
    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn tol(&self, fallback: f64, overrides: Option<f64>) -> f64 {
        overrides.or(self.time.as_ref().map(|t| t.tol)).unwrap_or(fallback)
    }
}

/// Worker count: available parallelism capped by `GAUDIN_FORGE_THREADS`.
pub fn worker_count() -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => avail.min(cap),
        _ => avail,
    }
}

/// Order-preserving parallel map over contiguous chunks.
pub fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = worker_count().min(items.len()).max(1);
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Fixed significant-digit float formatting for CSV cells.
pub fn format_float(x: f64, precision: usize) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", precision.saturating_sub(1), x)
    }
}

/// Files produced by a task, in emission order.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }
}

/// A table that goes to CSV, or into the JSON summary when CSV is off.
struct Table {
    name: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    text_rows: Option<Vec<Vec<String>>>,
    /// Leading columns that hold integers.
    int_cols: usize,
}

impl Table {
    fn numeric(name: &'static str, header: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self { name, header, rows, text_rows: None, int_cols: 0 }
    }

    fn indexed(name: &'static str, header: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self { int_cols: 1, ..Self::numeric(name, header, rows) }
    }

    fn cells(&self, precision: usize) -> Vec<Vec<String>> {
        match &self.text_rows {
            Some(t) => t.clone(),
            None => self
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .map(|(c, &x)| {
                            if c < self.int_cols {
                                format!("{}", x as i64)
                            } else {
                                format_float(x, precision)
                            }
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn as_json(&self) -> Value {
        let rows: Vec<Value> = match &self.text_rows {
            Some(t) => t.iter().map(|r| json!(r)).collect(),
            None => self.rows.iter().map(|r| json!(r)).collect(),
        };
        json!({ "columns": self.header, "rows": rows })
    }
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn build_spectrum(cfg: &RunConfig) -> Result<EnergySpectrum> {
    let s = cfg.spectrum.as_ref().ok_or_else(|| Error::Config("spectrum block missing".into()))?;
    EnergySpectrum::new(s.epsilons.clone(), s.g, s.pairs)
}

fn build_state(cfg: &RunConfig) -> Result<(ClassicalSpinState, Option<u64>)> {
    match cfg.state.as_ref().ok_or_else(|| Error::Config("state block missing".into()))? {
        StateBlock::Spins(s) => Ok((ClassicalSpinState::new(s.clone())?, None)),
        StateBlock::Random { seed, radii } => {
            let seed = seed.unwrap_or(cfg.effective_seed());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((ClassicalSpinState::random(radii, &mut rng)?, Some(seed)))
        }
    }
}

fn sample_times(cfg: &RunConfig) -> Result<Vec<f64>> {
    let t = cfg.time.as_ref().ok_or_else(|| Error::Config("time block missing".into()))?;
    let n = t.samples;
    Ok((0..n).map(|k| t.t_end * k as f64 / (n - 1) as f64).collect())
}

fn state_json(state: &ClassicalSpinState, seed: Option<u64>) -> Value {
    json!({ "spins": state.spins(), "radii": state.radii(), "seed": seed })
}

struct Outcome {
    summary: Value,
    tables: Vec<Table>,
}

fn run_richardson(cfg: &RunConfig, tol: f64) -> Result<Outcome> {
    let spec = build_spectrum(cfg)?;
    let occ = ground_occupation(&spec);
    let sol = solve_richardson(&spec, &occ, tol)?;
    let rows: Vec<Vec<f64>> =
        sol.pair_energies.iter().enumerate().map(|(k, e)| vec![k as f64, e.re, e.im]).collect();
    let exact = match SenioritySector::new(&spec) {
        Ok(sector) if sector.dimension() <= 400 => {
            let ed = exact_diagonalize(&spec)?;
            let nearest = ed
                .eigenvalues
                .iter()
                .map(|&x| (x, (x - sol.eigenvalue()).abs()))
                .fold((f64::NAN, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
            json!({ "dimension": sector.dimension(), "ground": ed.eigenvalues[0], "nearest": nearest.0, "deviation": nearest.1 })
        }
        _ => Value::Null,
    };
    Ok(Outcome {
        summary: json!({
            "spectrum": { "epsilons": spec.epsilons(), "g": spec.g(), "pairs": spec.pairs() },
            "start_occupation": occ,
            "energy": sol.eigenvalue(),
            "total_pair_energy": cjson(sol.total_pair_energy()),
            "residual": sol.residual,
            "continuation_steps": sol.g_path.len(),
            "exact_check": exact,
        }),
        tables: vec![Table::indexed("richardson", header(&["k", "re_e", "im_e"]), rows)],
    })
}

fn run_evolve(cfg: &RunConfig, tol: f64) -> Result<Outcome> {
    let spec = build_spectrum(cfg)?;
    let (state, seed) = build_state(cfg)?;
    let times = sample_times(cfg)?;
    let traj = integrate_spins_sampled(&state, &spec, &times, tol)?;
    let n = state.n();
    let mut cols = vec!["t".to_string()];
    for i in 0..n {
        for c in ["x", "y", "z"] {
            cols.push(format!("s{i}_{c}"));
        }
    }
    cols.extend(["energy", "j3"].map(String::from));
    let rows = times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let mut r = vec![t];
            for v in s.spins() {
                r.extend_from_slice(v);
            }
            r.push(crate::model::hamiltonian(s, &spec)?);
            r.push(s.j3());
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        summary: json!({
            "state": state_json(&state, seed),
            "tol": tol,
            "drift": traj.drift,
            "max_drift": traj.drift.max(),
            "stats": traj.stats,
        }),
        tables: vec![Table::numeric("evolve", cols, rows)],
    })
}

fn run_curve(cfg: &RunConfig) -> Result<Outcome> {
    let spec = build_spectrum(cfg)?;
    let (state, seed) = build_state(cfg)?;
    let curve = build_curve(&state, &spec)?;
    let ctx = AbelContext::new(curve.clone())?;
    let roots = separation_roots(&state, &spec, &curve, RootChoice::B)?;
    let g = ctx.genus();
    let mat = |m: &nalgebra::DMatrix<C64>| -> Value {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| cjson(m[(i, j)])).collect::<Vec<_>>()).collect()
    };
    let defect = ctx.riemann_vanishing_defect(8, cfg.effective_seed())?;
    let rows: Vec<Vec<f64>> = curve
        .branch_points
        .iter()
        .enumerate()
        .map(|(k, b)| vec![k as f64, b.re, b.im, (k / 2) as f64])
        .collect();
    Ok(Outcome {
        summary: json!({
            "state": state_json(&state, seed),
            "genus": g,
            "q_coefficients": curve.q_coeffs.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "branch_points": curve.branch_points.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "cuts": curve.cuts.iter().map(|c| json!({"lower": cjson(c.lower), "upper": cjson(c.upper)})).collect::<Vec<_>>(),
            "alpha_periods": mat(&ctx.periods.m),
            "period_matrix": mat(&ctx.periods.b),
            "symmetry_defect": ctx.periods.symmetry_defect(),
            "min_imag_eigenvalue": ctx.periods.min_imag_eigenvalue(),
            "riemann_vector": ctx.k.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "riemann_vanishing_defect": defect,
            "separation_roots": roots.points.iter().zip(&roots.cut_index).zip(&roots.cut_distance)
                .map(|((p, c), d)| json!({"lambda": cjson(p.lambda), "sheet": p.sheet, "cut": c, "cut_distance": d}))
                .collect::<Vec<_>>(),
        }),
        tables: vec![Table::indexed("branch_points", header(&["index", "re", "im", "cut"]), rows)],
    })
}

/// Reorder `pts` to follow `reference` (greedy nearest match).
fn align(pts: &[CurvePoint], reference: &[CurvePoint]) -> Vec<CurvePoint> {
    let mut left: Vec<CurvePoint> = pts.to_vec();
    reference
        .iter()
        .map(|r| {
            let (k, _) = left
                .iter()
                .enumerate()
                .map(|(k, p)| (k, (p.lambda - r.lambda).norm()))
                .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
            left.remove(k)
        })
        .collect()
}

fn run_theta_flow(cfg: &RunConfig, tol: f64) -> Result<Outcome> {
    let spec = build_spectrum(cfg)?;
    let (state, seed) = build_state(cfg)?;
    let times = sample_times(cfg)?;
    let curve = build_curve(&state, &spec)?;
    let ctx = AbelContext::new(curve.clone())?;
    let g = ctx.genus();
    let roots = separation_roots(&state, &spec, &curve, RootChoice::B)?;
    let z0 = ctx.divisor_image(&roots.points)?;
    let velocity: Vec<C64> = match cfg.mode {
        FlowMode::Calibrated => calibrate_velocity(&ctx, &roots.points, &spec, &state, 1e-2, tol.min(1e-12))?,
        FlowMode::Paper => (0..g).map(|i| if i + 1 == g { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) }).collect(),
    };
    let inverted: Vec<Result<crate::abel::Inversion>> = parallel_map(&times, |&t| {
        let z: JacobianPoint = ctx.flow(&z0, t, cfg.mode, &velocity);
        ctx.invert_divisor(&z)
    });
    let inverted = inverted.into_iter().collect::<Result<Vec<_>>>()?;
    let jm_theta = ctx.jminus_along_flow(&z0.z, &velocity, &times, &state, &spec);
    let dub = integrate_dubrovin(&roots.points, &curve, &spec, &state, &times, tol)?;

    let mut cols = vec!["t".to_string()];
    for src in ["theta", "dubrovin"] {
        for i in 0..g {
            cols.push(format!("re_u{i}_{src}"));
            cols.push(format!("im_u{i}_{src}"));
        }
        cols.push(format!("re_jminus_{src}"));
        cols.push(format!("im_jminus_{src}"));
    }
    cols.push("deviation".into());
    let mut max_dev: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    let mut rows = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let th = align(&inverted[k].points, &dub.points[k]);
        max_residual = max_residual.max(inverted[k].residual);
        let mut r = vec![times[k]];
        for p in &th {
            r.extend([p.lambda.re, p.lambda.im]);
        }
        r.extend([jm_theta[k].re, jm_theta[k].im]);
        for p in &dub.points[k] {
            r.extend([p.lambda.re, p.lambda.im]);
        }
        r.extend([dub.jminus[k].re, dub.jminus[k].im]);
        let du = th
            .iter()
            .zip(&dub.points[k])
            .map(|(a, b)| (a.lambda - b.lambda).norm())
            .fold(0.0, f64::max);
        let dev = du.max((jm_theta[k] - dub.jminus[k]).norm());
        max_dev = max_dev.max(dev);
        r.push(dev);
        rows.push(r);
    }
    Ok(Outcome {
        summary: json!({
            "state": state_json(&state, seed),
            "mode": cfg.mode,
            "genus": g,
            "velocity": velocity.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "max_deviation": max_dev,
            "max_inversion_residual": max_residual,
            "min_branch_distance": dub.min_branch_distance,
            "min_gap": dub.min_gap,
            "dubrovin_stats": dub.stats,
            "tol": tol,
        }),
        tables: vec![Table::numeric("theta_flow", cols, rows)],
    })
}

fn run_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let (state, seed) = build_state(cfg)?;
    let sw = cfg.sweep.as_ref().ok_or_else(|| Error::Config("sweep block missing".into()))?;
    let path = ParameterPath::new(sw.nodes.clone(), sw.samples, sw.closed)?;
    let res = if sw.closed {
        monodromy_matrix(&path, &state, sw.delta)?
    } else {
        sweep_and_detect(&path, &state, sw.delta)?
    };
    Ok(Outcome {
        summary: json!({
            "state": state_json(&state, seed),
            "delta": sw.delta,
            "closed": sw.closed,
            "braid_word": res.braid_word,
            "permutation": res.permutation,
            "monodromy": res.matrix,
            "events": res.events.iter().map(|e| json!({
                "s": e.s, "g": cjson(e.g), "pair": [e.pair.0, e.pair.1],
                "min_distance": e.min_distance,
                "period_before": e.period_before, "period_after": e.period_after,
            })).collect::<Vec<_>>(),
            "min_distance": res.min_distance,
            "steps": res.steps,
        }),
        tables: Vec::new(),
    })
}

fn run_levels(cfg: &RunConfig) -> Result<Outcome> {
    let lv = cfg.levels.as_ref().ok_or_else(|| Error::Config("levels block missing".into()))?;
    let levels = lv.m.iter().map(|&m| admissible_levels(m)).collect::<Result<Vec<_>>>()?;
    let text: Vec<Vec<String>> = levels
        .iter()
        .map(|l| {
            vec![
                l.m.to_string(),
                l.k.to_string(),
                l.k_plus_2.to_string(),
                l.c.to_string(),
                l.q_phase.to_string(),
                format_float(l.q.re, cfg.output.precision),
                format_float(l.q.im, cfg.output.precision),
            ]
        })
        .collect();
    let summary = json!({
        "levels": levels.iter().map(|l| json!({
            "m": l.m, "k": l.k.to_string(), "k_plus_2": l.k_plus_2.to_string(),
            "c": l.c.to_string(), "q_phase_over_pi": l.q_phase.to_string(), "q": cjson(l.q),
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        summary,
        tables: vec![Table {
            name: "levels",
            header: header(&["m", "k", "k_plus_2", "c", "q_phase_over_pi", "re_q", "im_q"]),
            rows: Vec::new(),
            text_rows: Some(text),
            int_cols: 0,
        }],
    })
}

fn run_pfaffian(cfg: &RunConfig) -> Result<Outcome> {
    let pb = cfg.pfaffian.as_ref().ok_or_else(|| Error::Config("pfaffian block missing".into()))?;
    let seed = cfg.effective_seed();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<C64> = (0..pb.particles)
        .map(|_| C64::new(rng.gen_range(-pb.extent..pb.extent), rng.gen_range(-pb.extent..pb.extent)))
        .collect();
    let gs = ground_state_amplitude(&z)?;
    let th = two_hole_amplitude(pb.holes[0], pb.holes[1], &z)?;
    // antisymmetry under every transposition, relative in log form
    let mut swap_defect: f64 = 0.0;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            let mut w = z.clone();
            w.swap(i, j);
            let s = ground_state_amplitude(&w)?;
            let dphase = (s.arg - gs.arg - std::f64::consts::PI).rem_euclid(std::f64::consts::TAU);
            let dphase = dphase.min(std::f64::consts::TAU - dphase);
            swap_defect = swap_defect.max((s.ln_abs - gs.ln_abs).abs()).max(dphase);
        }
    }
    let kernel = SkewMatrix::from_fn(z.len(), |i, j| 1.0 / (z[i] - z[j]))?;
    let pf = pfaffian(&kernel);
    let det = kernel.to_dense().lu().determinant();
    let rows: Vec<Vec<f64>> = z.iter().enumerate().map(|(k, p)| vec![k as f64, p.re, p.im]).collect();
    Ok(Outcome {
        summary: json!({
            "seed": seed,
            "particles": pb.particles,
            "holes": pb.holes.iter().map(|h| cjson(*h)).collect::<Vec<_>>(),
            "ground_state": { "ln_abs": gs.ln_abs, "arg": gs.arg },
            "two_hole": { "ln_abs": th.ln_abs, "arg": th.arg },
            "antisymmetry_defect": swap_defect,
            "kernel_pf_squared_vs_det": (pf * pf - det).norm() / det.norm(),
        }),
        tables: vec![Table::indexed("particles", header(&["index", "re", "im"]), rows)],
    })
}

/// Execute the configured task and return its artifacts (not yet written).
pub fn execute(cfg: &RunConfig, tol_override: Option<f64>) -> Result<Artifacts> {
    let outcome = match cfg.task {
        Task::Richardson => run_richardson(cfg, cfg.tol(1e-12, tol_override))?,
        Task::Evolve => run_evolve(cfg, cfg.tol(1e-10, tol_override))?,
        Task::Curve => run_curve(cfg)?,
        Task::ThetaFlow => run_theta_flow(cfg, cfg.tol(1e-11, tol_override))?,
        Task::Sweep => run_sweep(cfg)?,
        Task::Levels => run_levels(cfg)?,
        Task::PfaffianDemo => run_pfaffian(cfg)?,
    };
    let mut art = Artifacts::default();
    let csv_on = cfg.output.formats.contains(&Format::Csv);
    let json_on = cfg.output.formats.contains(&Format::Json) || outcome.tables.is_empty();
    if csv_on {
        for t in &outcome.tables {
            art.csv(&format!("{}.csv", t.name), &t.header, &t.cells(cfg.output.precision))?;
        }
    }
    if json_on {
        let mut summary = json!({
            "schema_version": SCHEMA_VERSION,
            "task": cfg.task.name(),
            "status": "ok",
            "seed": cfg.effective_seed(),
            "result": outcome.summary,
        });
        if !csv_on {
            let tables: serde_json::Map<String, Value> =
                outcome.tables.iter().map(|t| (t.name.to_string(), t.as_json())).collect();
            summary["tables"] = Value::Object(tables);
        }
        art.json(&format!("{}.json", cfg.task.name().replace('-', "_")), &summary)?;
    }
    Ok(art)
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write artifacts and `manifest.json` into `dir`.
pub fn write_artifacts(dir: &Path, task: &str, art: &Artifacts) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(art.files.len());
    for (name, bytes) in &art.files {
        std::fs::write(dir.join(name), bytes)?;
        entries.push(ManifestEntry { file: name.clone(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
    }
    entries.sort_by(|a, b| a.file.cmp(&b.file));
    let manifest = json!({ "schema_version": SCHEMA_VERSION, "task": task, "files": entries });
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(dir.join("manifest.json"), bytes)?;
    Ok(entries)
}

/// Machine-readable failure record.
pub fn error_json(task: Option<&str>, err: &Error, config: Option<&RunConfig>) -> Value {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    json!({
        "schema_version": SCHEMA_VERSION,
        "status": "error",
        "task": task,
        "error": { "kind": err.kind(), "message": err.to_string() },
        "parameters": config.map(|c| serde_json::to_value(c).unwrap_or(Value::Null)),
        "timestamp": ts,
    })
}

/// Write `error.json` (and a manifest listing it) into `dir`.
pub fn write_error(dir: &Path, task: Option<&str>, err: &Error, config: Option<&RunConfig>) -> Result<()> {
    let mut art = Artifacts::default();
    art.json("error.json", &error_json(task, err, config))?;
    write_artifacts(dir, task.unwrap_or("unknown"), &art)?;
    Ok(())
}

/// Full run: execute, then write results or the error record.
pub fn run(cfg: &RunConfig, tol_override: Option<f64>) -> Result<Vec<ManifestEntry>> {
    let dir = cfg.output.directory.clone().unwrap_or_else(|| PathBuf::from("out"));
    match execute(cfg, tol_override) {
        Ok(art) => write_artifacts(&dir, cfg.task.name(), &art),
        Err(e) => {
            write_error(&dir, Some(cfg.task.name()), &e, Some(cfg))?;
            Err(e)
        }
    }
}
