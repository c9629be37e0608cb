//! Run configuration: a TOML document validated into [`RunConfig`].
//!
//! Validation collects every problem rather than stopping at the first one.
//! Unknown keys are errors.

use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::abel::FlowMode;
use crate::braid::ParamPoint;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Richardson,
    Evolve,
    Curve,
    ThetaFlow,
    Sweep,
    Levels,
    PfaffianDemo,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Richardson,
        Task::Evolve,
        Task::Curve,
        Task::ThetaFlow,
        Task::Sweep,
        Task::Levels,
        Task::PfaffianDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Richardson => "richardson",
            Task::Evolve => "evolve",
            Task::Curve => "curve",
            Task::ThetaFlow => "theta-flow",
            Task::Sweep => "sweep",
            Task::Levels => "levels",
            Task::PfaffianDemo => "pfaffian-demo",
        }
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown task '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBlock {
    pub epsilons: Vec<f64>,
    pub g: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateBlock {
    Spins(Vec<[f64; 3]>),
    /// Uniformly random directions with the given lengths; the seed falls
    /// back to the run seed.
    Random { seed: Option<u64>, radii: Vec<f64> },
}

impl StateBlock {
    pub fn n(&self) -> usize {
        match self {
            StateBlock::Spins(s) => s.len(),
            StateBlock::Random { radii, .. } => radii.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBlock {
    pub t_end: f64,
    pub samples: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBlock {
    pub nodes: Vec<ParamPoint>,
    pub samples: usize,
    pub closed: bool,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelsBlock {
    pub m: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaffianBlock {
    pub particles: usize,
    /// Hole positions for the two-hole amplitude.
    pub holes: [C64; 2],
    /// Half-width of the square the particles are drawn from.
    pub extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputBlock {
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { directory: None, formats: vec![Format::Csv, Format::Json], precision: 17 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    pub seed: Option<u64>,
    pub mode: FlowMode,
    pub spectrum: Option<SpectrumBlock>,
    pub state: Option<StateBlock>,
    pub time: Option<TimeBlock>,
    pub sweep: Option<SweepBlock>,
    pub levels: Option<LevelsBlock>,
    pub pfaffian: Option<PfaffianBlock>,
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Joins the issues into a single [`Error::Config`].
pub fn issues_to_error(issues: &[ConfigIssue]) -> Error {
    Error::Config(issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
}

struct Reader {
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue { field: field.to_string(), message: message.into() });
    }

    fn known_keys(&mut self, table: &Table, prefix: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let field = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                self.push(&field, "unknown key");
            }
        }
    }

    fn table<'a>(&mut self, root: &'a Table, key: &str) -> Option<&'a Table> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.push(key, "expected a table");
                None
            }
        }
    }

    fn float(&mut self, v: &Value, field: &str) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.push(field, "expected a number");
                None
            }
        }
    }

    fn opt_float(&mut self, t: &Table, key: &str, prefix: &str) -> Option<f64> {
        let field = format!("{prefix}.{key}");
        t.get(key).and_then(|v| self.float(v, &field))
    }

    fn req_float(&mut self, t: &Table, key: &str, prefix: &str) -> Option<f64> {
        if !t.contains_key(key) {
            self.push(&format!("{prefix}.{key}"), "missing");
            return None;
        }
        self.opt_float(t, key, prefix)
    }

    fn positive(&mut self, v: Option<f64>, field: &str) -> Option<f64> {
        match v {
            Some(x) if x > 0.0 && x.is_finite() => Some(x),
            Some(x) => {
                self.push(field, format!("must be positive and finite, got {x}"));
                None
            }
            None => None,
        }
    }

    fn uint(&mut self, v: &Value, field: &str) -> Option<u64> {
        match v {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                self.push(field, "expected a non-negative integer");
                None
            }
        }
    }

    fn opt_uint(&mut self, t: &Table, key: &str, prefix: &str) -> Option<u64> {
        let field = if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
        t.get(key).and_then(|v| self.uint(v, &field))
    }

    fn req_uint(&mut self, t: &Table, key: &str, prefix: &str) -> Option<u64> {
        if !t.contains_key(key) {
            self.push(&format!("{prefix}.{key}"), "missing");
            return None;
        }
        self.opt_uint(t, key, prefix)
    }

    fn float_list(&mut self, v: &Value, field: &str) -> Option<Vec<f64>> {
        let Value::Array(a) = v else {
            self.push(field, "expected an array of numbers");
            return None;
        };
        let out: Vec<Option<f64>> =
            a.iter().enumerate().map(|(i, x)| self.float(x, &format!("{field}[{i}]"))).collect();
        out.into_iter().collect()
    }

    /// A number or a `[re, im]` pair.
    fn complex(&mut self, v: &Value, field: &str) -> Option<C64> {
        match v {
            Value::Array(a) if a.len() == 2 => {
                let re = self.float(&a[0], field)?;
                let im = self.float(&a[1], field)?;
                Some(C64::new(re, im))
            }
            Value::Array(_) => {
                self.push(field, "complex values are written [re, im]");
                None
            }
            other => self.float(other, field).map(|x| C64::new(x, 0.0)),
        }
    }

    fn boolean(&mut self, t: &Table, key: &str, prefix: &str) -> Option<bool> {
        match t.get(key) {
            None => None,
            Some(Value::Boolean(b)) => Some(*b),
            Some(_) => {
                self.push(&format!("{prefix}.{key}"), "expected true or false");
                None
            }
        }
    }

    fn string<'a>(&mut self, t: &'a Table, key: &str, field: &str) -> Option<&'a str> {
        match t.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.push(field, "expected a string");
                None
            }
        }
    }
}

fn check_levels(r: &mut Reader, eps: &[f64], field: &str) -> bool {
    let mut ok = true;
    for w in eps.windows(2) {
        if w[1] == w[0] {
            r.push(field, format!("duplicate value {}", w[0]));
            ok = false;
        } else if w[1] < w[0] {
            r.push(field, "must be strictly increasing");
            ok = false;
        }
    }
    if eps.iter().any(|e| !e.is_finite()) {
        r.push(field, "values must be finite");
        ok = false;
    }
    ok
}

fn parse_spectrum(r: &mut Reader, t: &Table) -> Option<SpectrumBlock> {
    r.known_keys(t, "spectrum", &["epsilons", "g", "pairs"]);
    let eps = match t.get("epsilons") {
        Some(v) => r.float_list(v, "spectrum.epsilons"),
        None => {
            r.push("spectrum.epsilons", "missing");
            None
        }
    };
    let eps = eps.filter(|e| {
        if e.is_empty() {
            r.push("spectrum.epsilons", "needs at least one level");
            return false;
        }
        check_levels(r, e, "spectrum.epsilons")
    });
    let g = r.req_float(t, "g", "spectrum");
    let g = match g {
        Some(x) if x == 0.0 || !x.is_finite() => {
            r.push("spectrum.g", "must be nonzero and finite");
            None
        }
        other => other,
    };
    let pairs = r.opt_uint(t, "pairs", "spectrum").unwrap_or(1) as usize;
    if let Some(e) = &eps {
        if pairs == 0 || pairs > e.len() {
            r.push("spectrum.pairs", format!("must be in 1..={}", e.len()));
            return None;
        }
    }
    Some(SpectrumBlock { epsilons: eps?, g: g?, pairs })
}

fn parse_state(r: &mut Reader, t: &Table) -> Option<StateBlock> {
    r.known_keys(t, "state", &["spins", "seed", "radii"]);
    let has_spins = t.contains_key("spins");
    if has_spins && (t.contains_key("seed") || t.contains_key("radii")) {
        r.push("state", "spins and seed/radii are mutually exclusive");
        return None;
    }
    if has_spins {
        let Some(Value::Array(rows)) = t.get("spins") else {
            r.push("state.spins", "expected an array of [x, y, z] triples");
            return None;
        };
        let mut out = Vec::with_capacity(rows.len());
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            let field = format!("state.spins[{i}]");
            match r.float_list(row, &field) {
                Some(v) if v.len() == 3 => {
                    if v.iter().all(|x| *x == 0.0) {
                        r.push(&field, "zero spin");
                        ok = false;
                    }
                    out.push([v[0], v[1], v[2]]);
                }
                Some(_) => {
                    r.push(&field, "expected 3 components");
                    ok = false;
                }
                None => ok = false,
            }
        }
        return ok.then_some(StateBlock::Spins(out));
    }
    let seed = r.opt_uint(t, "seed", "state");
    let radii = match t.get("radii") {
        Some(v) => r.float_list(v, "state.radii"),
        None => {
            r.push("state.radii", "missing (give spins, or radii with an optional seed)");
            None
        }
    }?;
    if radii.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        r.push("state.radii", "must be positive");
        return None;
    }
    Some(StateBlock::Random { seed, radii })
}

fn parse_time(r: &mut Reader, t: &Table) -> Option<TimeBlock> {
    r.known_keys(t, "time", &["t_end", "samples", "tol"]);
    let t_end = r.req_float(t, "t_end", "time");
    let t_end = r.positive(t_end, "time.t_end");
    let samples = r.opt_uint(t, "samples", "time").unwrap_or(101) as usize;
    if samples < 2 {
        r.push("time.samples", "must be at least 2");
    }
    let tol = r.opt_float(t, "tol", "time").or(Some(1e-10));
    let tol = r.positive(tol, "time.tol");
    (samples >= 2).then_some(())?;
    Some(TimeBlock { t_end: t_end?, samples, tol: tol? })
}

fn parse_sweep(r: &mut Reader, t: &Table) -> Option<SweepBlock> {
    r.known_keys(t, "sweep", &["nodes", "samples", "closed", "delta"]);
    let delta = r.req_float(t, "delta", "sweep");
    let delta = r.positive(delta, "sweep.delta");
    let samples = r.opt_uint(t, "samples", "sweep").unwrap_or(50) as usize;
    let closed = r.boolean(t, "closed", "sweep").unwrap_or(false);
    let Some(Value::Array(nodes)) = t.get("nodes") else {
        r.push("sweep.nodes", "missing array of tables");
        return None;
    };
    let mut out = Vec::new();
    let mut ok = true;
    for (i, node) in nodes.iter().enumerate() {
        let prefix = format!("sweep.nodes[{i}]");
        let Value::Table(nt) = node else {
            r.push(&prefix, "expected a table");
            ok = false;
            continue;
        };
        r.known_keys(nt, &prefix, &["g", "epsilons", "radii"]);
        let g = match nt.get("g") {
            Some(v) => r.complex(v, &format!("{prefix}.g")),
            None => {
                r.push(&format!("{prefix}.g"), "missing");
                None
            }
        };
        let eps = match nt.get("epsilons") {
            Some(Value::Array(a)) => a
                .iter()
                .enumerate()
                .map(|(k, v)| r.complex(v, &format!("{prefix}.epsilons[{k}]")))
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<Option<Vec<_>>>(),
            _ => {
                r.push(&format!("{prefix}.epsilons"), "missing array");
                None
            }
        };
        let radii = nt.get("radii").map(|v| r.float_list(v, &format!("{prefix}.radii")));
        match (g, eps, radii) {
            (Some(g), Some(epsilons), None) => out.push(ParamPoint { g, epsilons, radii: None }),
            (Some(g), Some(epsilons), Some(Some(rad))) => {
                out.push(ParamPoint { g, epsilons, radii: Some(rad) })
            }
            _ => ok = false,
        }
    }
    if ok && out.len() < 2 {
        r.push("sweep.nodes", "need at least 2 nodes");
        ok = false;
    }
    if samples < 2 {
        r.push("sweep.samples", "must be at least 2");
        ok = false;
    }
    if ok && closed && !out[0].same_as(out.last().expect("non-empty")) {
        r.push("sweep.closed", "closed path must end at its first node");
        ok = false;
    }
    if ok && out.iter().any(|p| p.epsilons.len() != out[0].epsilons.len()) {
        r.push("sweep.nodes", "all nodes need the same number of levels");
        ok = false;
    }
    ok.then_some(())?;
    Some(SweepBlock { nodes: out, samples, closed, delta: delta? })
}

fn parse_levels(r: &mut Reader, t: &Table) -> Option<LevelsBlock> {
    r.known_keys(t, "levels", &["m"]);
    match t.get("m") {
        Some(Value::Array(a)) => {
            let vals: Option<Vec<u64>> = a
                .iter()
                .enumerate()
                .map(|(i, v)| r.uint(v, &format!("levels.m[{i}]")))
                .collect::<Vec<_>>()
                .into_iter()
                .collect();
            let vals = vals?;
            if vals.is_empty() || vals.contains(&0) {
                r.push("levels.m", "needs positive entries");
                return None;
            }
            Some(LevelsBlock { m: vals })
        }
        Some(v) => {
            let m = r.uint(v, "levels.m")?;
            if m == 0 {
                r.push("levels.m", "must be positive");
                return None;
            }
            Some(LevelsBlock { m: vec![m] })
        }
        None => {
            r.push("levels.m", "missing");
            None
        }
    }
}

fn parse_pfaffian(r: &mut Reader, t: &Table) -> Option<PfaffianBlock> {
    r.known_keys(t, "pfaffian", &["particles", "holes", "extent"]);
    let particles = r.req_uint(t, "particles", "pfaffian")? as usize;
    if particles == 0 || !particles.is_multiple_of(2) {
        r.push("pfaffian.particles", "must be even and positive");
        return None;
    }
    let extent = r.opt_float(t, "extent", "pfaffian").or(Some(1.0));
    let extent = r.positive(extent, "pfaffian.extent")?;
    let holes = match t.get("holes") {
        None => [C64::new(0.5 * extent, 1.5 * extent), C64::new(-1.5 * extent, 0.5 * extent)],
        Some(Value::Array(a)) if a.len() == 2 => {
            let h0 = r.complex(&a[0], "pfaffian.holes[0]")?;
            let h1 = r.complex(&a[1], "pfaffian.holes[1]")?;
            [h0, h1]
        }
        Some(_) => {
            r.push("pfaffian.holes", "expected two [re, im] pairs");
            return None;
        }
    };
    Some(PfaffianBlock { particles, holes, extent })
}

fn parse_output(r: &mut Reader, t: &Table) -> OutputBlock {
    r.known_keys(t, "output", &["directory", "formats", "precision"]);
    let mut out = OutputBlock::default();
    if let Some(d) = r.string(t, "directory", "output.directory") {
        out.directory = Some(PathBuf::from(d));
    }
    if let Some(v) = t.get("formats") {
        match v {
            Value::Array(a) => {
                let mut f = Vec::new();
                for (i, x) in a.iter().enumerate() {
                    match x.as_str() {
                        Some("csv") => f.push(Format::Csv),
                        Some("json") => f.push(Format::Json),
                        _ => r.push(&format!("output.formats[{i}]"), "expected \"csv\" or \"json\""),
                    }
                }
                f.sort_by_key(|x| *x as u8);
                f.dedup();
                if f.is_empty() {
                    r.push("output.formats", "needs at least one format");
                }
                out.formats = f;
            }
            _ => r.push("output.formats", "expected an array"),
        }
    }
    if let Some(p) = r.opt_uint(t, "precision", "output") {
        if !(1..=17).contains(&p) {
            r.push("output.precision", "must be in 1..=17");
        } else {
            out.precision = p as usize;
        }
    }
    out
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigIssue>> {
    let root: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![ConfigIssue { field: "<document>".into(), message: e.to_string() }])
        }
    };
    let mut r = Reader { issues: Vec::new() };
    r.known_keys(
        &root,
        "",
        &["task", "seed", "mode", "spectrum", "state", "time", "sweep", "levels", "pfaffian", "output"],
    );
    let task = match r.string(&root, "task", "task") {
        Some(s) => match Task::from_str(s) {
            Ok(t) => Some(t),
            Err(_) => {
                let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
                r.push("task", format!("unknown task '{s}', expected one of {}", names.join(", ")));
                None
            }
        },
        None => {
            if !root.contains_key("task") {
                r.push("task", "missing");
            }
            None
        }
    };
    let seed = r.opt_uint(&root, "seed", "");
    let mode = match r.string(&root, "mode", "mode") {
        Some(s) => FlowMode::from_str(s).map_err(|e| r.push("mode", e.to_string())).ok(),
        None => Some(FlowMode::default()),
    };
    let spectrum = r.table(&root, "spectrum").cloned().and_then(|t| parse_spectrum(&mut r, &t));
    let state = r.table(&root, "state").cloned().and_then(|t| parse_state(&mut r, &t));
    let time = r.table(&root, "time").cloned().and_then(|t| parse_time(&mut r, &t));
    let sweep = r.table(&root, "sweep").cloned().and_then(|t| parse_sweep(&mut r, &t));
    let levels = r.table(&root, "levels").cloned().and_then(|t| parse_levels(&mut r, &t));
    let pfaffian = r.table(&root, "pfaffian").cloned().and_then(|t| parse_pfaffian(&mut r, &t));
    let output = match r.table(&root, "output").cloned() {
        Some(t) => parse_output(&mut r, &t),
        None => OutputBlock::default(),
    };

    if let Some(task) = task {
        let needs: &[&str] = match task {
            Task::Richardson => &["spectrum"],
            Task::Evolve | Task::Curve | Task::ThetaFlow => &["spectrum", "state"],
            Task::Sweep => &["state", "sweep"],
            Task::Levels => &["levels"],
            Task::PfaffianDemo => &["pfaffian"],
        };
        for block in needs {
            if !root.contains_key(*block) {
                r.push(block, format!("required by task '{}'", task.name()));
            }
        }
        if matches!(task, Task::Evolve | Task::ThetaFlow) && !root.contains_key("time") {
            r.push("time", format!("required by task '{}'", task.name()));
        }
        if let (Some(s), Some(st)) = (&spectrum, &state) {
            if s.epsilons.len() != st.n() {
                r.push("state", format!("has {} spins but spectrum has {} levels", st.n(), s.epsilons.len()));
            }
        }
        if let (Some(sw), Some(st)) = (&sweep, &state) {
            if sw.nodes[0].epsilons.len() != st.n() {
                r.push("sweep.nodes", format!("have {} levels but state has {} spins", sw.nodes[0].epsilons.len(), st.n()));
            }
        }
        if matches!(task, Task::Curve | Task::ThetaFlow) {
            if let Some(st) = &state {
                if st.n() < 2 {
                    r.push("state", "the spectral curve needs at least 2 spins");
                }
            }
        }
    }
    if !r.issues.is_empty() {
        return Err(r.issues);
    }
    Ok(RunConfig {
        task: task.expect("checked"),
        seed,
        mode: mode.expect("checked"),
        spectrum,
        state,
        time,
        sweep,
        levels,
        pfaffian,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_richardson_config() {
        let cfg = parse_config("task = \"richardson\"\n[spectrum]\nepsilons = [0.0, 1.0]\ng = 0.5\npairs = 1\n")
            .unwrap();
        assert_eq!(cfg.task, Task::Richardson);
        assert_eq!(cfg.spectrum.unwrap().epsilons, vec![0.0, 1.0]);
        assert_eq!(cfg.output.precision, 17);
    }

    #[test]
    fn duplicate_levels_name_the_field() {
        let err = parse_config("task = \"richardson\"\n[spectrum]\nepsilons = [0.0, 0.0]\ng = 0.5\n")
            .unwrap_err();
        assert!(err.iter().any(|i| i.field == "spectrum.epsilons"), "{err:?}");
    }

    #[test]
    fn spins_and_seed_are_mutually_exclusive() {
        let err = parse_config(
            "task = \"evolve\"\n[spectrum]\nepsilons = [0.0, 1.0]\ng = 0.5\n[state]\nspins = [[1,0,0],[0,1,0]]\nseed = 3\n[time]\nt_end = 1.0\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|i| i.message.contains("mutually exclusive")), "{err:?}");
    }

    #[test]
    fn all_issues_are_reported() {
        let err = parse_config(
            "task = \"theta-flow\"\nbogus = 1\n[spectrum]\nepsilons = [1.0, 0.0]\ng = 0.0\ncolour = 2\n",
        )
        .unwrap_err();
        let fields: Vec<&str> = err.iter().map(|i| i.field.as_str()).collect();
        for f in ["bogus", "spectrum.colour", "spectrum.epsilons", "spectrum.g", "state", "time"] {
            assert!(fields.contains(&f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn sweep_nodes_accept_complex_coupling() {
        let cfg = parse_config(
            "task = \"sweep\"\n[state]\nspins = [[1,0,0.3],[0.8,0,-0.2]]\n[sweep]\ndelta = 1e-3\nclosed = true\n\
             [[sweep.nodes]]\ng = [2.0, 0.0]\nepsilons = [0.0, 1.0]\n\
             [[sweep.nodes]]\ng = [2.0, 0.3]\nepsilons = [0.0, 1.0]\n\
             [[sweep.nodes]]\ng = [2.0, 0.0]\nepsilons = [0.0, 1.0]\n",
        )
        .unwrap();
        let sw = cfg.sweep.unwrap();
        assert_eq!(sw.nodes[1].g, C64::new(2.0, 0.3));
        assert!(sw.closed);
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let err = parse_config(
            "task = \"evolve\"\n[spectrum]\nepsilons = [0.0, 1.0]\ng = 0.5\n[state]\nradii = [0.5, 0.5]\n[time]\nt_end = 1.0\ntol = -1.0\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|i| i.field == "time.tol"), "{err:?}");
    }
}
