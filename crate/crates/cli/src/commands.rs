//! Command implementations: config resolution, validation, computation and
//! artifact assembly.

use loewner_core::circle::{self, CentralParams, FourierField};
use loewner_core::coeffpoly::{Chart, PolynomialJson};
use loewner_core::error::CoreError;
use loewner_core::grunsky::{self, GrunskyData, MatrixJson};
use loewner_core::loewner::{radial_flow, HerglotzMeasure, RadialFlowOptions};
use loewner_core::martingale::{
    ch_from_kappa, kernel_martingale_suite, rn_density_report, McConfig,
};
use loewner_core::scalar::{parse_rat, rat_to_f64, Coeff, Rat, C64};
use loewner_core::series::{ArithmeticKind, SeriesJson, TruncatedTaylor};
use loewner_core::sle::{coeff_hierarchy, sle_trace, Driving};
use loewner_core::witt::{self, kernel_solve, operator_action};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::fmt;
use std::fs;
use std::path::Path;

pub type Artifacts = Vec<(String, Vec<u8>)>;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(CoreError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid config: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(CoreError::PathSwallowed { .. })
            | CliError::Core(CoreError::InsufficientPaths { .. }) => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

type CmdResult = Result<Artifacts, CliError>;

fn cfg_err(field: &str, why: &str) -> CliError {
    CliError::Config(format!("field '{field}': {why}"))
}

// ---------------------------------------------------------------------------
// Config resolution
// ---------------------------------------------------------------------------

fn load_config(common: &super::Common) -> Result<Value, CliError> {
    let mut value: Value = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("cannot parse {path}: {e}")))?
        }
        None => Value::Object(Map::new()),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Config("config root must be a JSON object".into()))?;

    for set in &common.sets {
        let (k, v) = set
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set needs KEY=VALUE, got '{set}'")))?;
        // Interpret as JSON when possible, else as string.
        let parsed = serde_json::from_str::<Value>(v).unwrap_or(Value::String(v.to_string()));
        obj.insert(k.to_string(), parsed);
    }
    if let Some(k) = &common.kappa {
        let parsed = serde_json::from_str::<Value>(k).unwrap_or(Value::String(k.clone()));
        obj.insert("kappa".to_string(), parsed);
    }
    if let Some(n) = common.n {
        obj.insert("n".to_string(), json!(n));
    }
    if let Some(t) = common.t_end {
        obj.insert("t_end".to_string(), json!(t));
    }
    if let Some(dt) = common.dt {
        obj.insert("dt".to_string(), json!(dt));
    }
    if let Some(p) = common.paths {
        obj.insert("paths".to_string(), json!(p));
    }
    if let Some(s) = common.seed {
        obj.insert("seed".to_string(), json!(s));
    }
    if let Some(w) = common.weight {
        obj.insert("weight".to_string(), json!(w));
    }
    Ok(value)
}

fn typed<T: for<'de> Deserialize<'de>>(value: &Value) -> Result<T, CliError> {
    serde_json::from_value(value.clone()).map_err(|e| CliError::Config(e.to_string()))
}

/// Parse the config and re-serialize it so the artifact echo records every
/// applied default.
fn typed_echo<T>(value: &Value) -> Result<(T, Value), CliError>
where
    T: for<'de> Deserialize<'de> + Serialize,
{
    let cfg: T = typed(value)?;
    let resolved = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((cfg, resolved))
}

/// Kappa values accept numbers or exact rational strings like "8/3".
fn parse_kappa(v: &Value, field: &str) -> Result<(f64, Rat), CliError> {
    match v {
        Value::Number(n) => {
            let x = n.as_f64().ok_or_else(|| cfg_err(field, "not a finite number"))?;
            if x.is_nan() || x <= 0.0 {
                return Err(cfg_err(field, "must be > 0"));
            }
            // Exact binary-float rational.
            let scaled = (x * (1u64 << 32) as f64).round() as i64;
            Ok((x, Rat::from_int(scaled) * Rat::from_int(1i64 << 32).try_inv().unwrap()))
        }
        Value::String(s) => {
            let r = parse_rat(s).ok_or_else(|| cfg_err(field, "not a rational p/q"))?;
            let x = rat_to_f64(&r);
            if x.is_nan() || x <= 0.0 {
                return Err(cfg_err(field, "must be > 0"));
            }
            Ok((x, r))
        }
        _ => Err(cfg_err(field, "expected number or rational string")),
    }
}

#[derive(Serialize)]
struct Echo<'a> {
    command: &'a str,
    version: &'a str,
    threads: usize,
    config: Value,
}

fn with_echo(command: &str, threads: usize, config: &Value, payload: Value) -> Value {
    json!({
        "meta": Echo { command, version: env!("CARGO_PKG_VERSION"), threads, config: config.clone() },
        "result": payload,
    })
}

fn json_artifact(name: &str, value: &Value) -> (String, Vec<u8>) {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    (name.to_string(), text.into_bytes())
}

fn csv_artifact(name: &str, command: &str, config: &Value, body: String) -> (String, Vec<u8>) {
    let echo = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    let mut text = format!("# {}\n", serde_json::to_string(&echo).unwrap());
    text.push_str(&body);
    (name.to_string(), text.into_bytes())
}

pub fn write_artifacts(out_dir: &str, artifacts: &Artifacts) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    for (name, bytes) in artifacts {
        fs::write(Path::new(out_dir).join(name), bytes)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared input helpers
// ---------------------------------------------------------------------------

/// A series given inline or by file path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SeriesRef {
    Inline(SeriesJson),
    File(String),
    /// Named built-ins: {"builtin": "koebe" | "identity", "order": N}.
    Builtin { builtin: String, order: usize },
}

fn resolve_series(r: &SeriesRef, field: &str) -> Result<SeriesJson, CliError> {
    match r {
        SeriesRef::Inline(js) => Ok(js.clone()),
        SeriesRef::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| cfg_err(field, &format!("cannot read {path}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| cfg_err(field, &e.to_string()))
        }
        SeriesRef::Builtin { builtin, order } => {
            let f = match builtin.as_str() {
                "koebe" => TruncatedTaylor::<C64>::koebe(*order),
                "identity" => TruncatedTaylor::<C64>::identity(*order),
                other => return Err(cfg_err(field, &format!("unknown builtin '{other}'"))),
            };
            Ok(SeriesJson::from_taylor(&f))
        }
    }
}

fn taylor_of(r: &SeriesRef, field: &str) -> Result<TruncatedTaylor<C64>, CliError> {
    let js = resolve_series(r, field)?;
    js.to_taylor().ok_or_else(|| cfg_err(field, "expected kind = taylor"))
}

fn default_checkpoints() -> usize {
    8
}
fn default_z_crit() -> f64 {
    4.0
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

pub fn run(command: &str, common: &super::Common) -> CmdResult {
    let config = load_config(common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let threads = common.threads.max(1);
    pool.install(|| match command {
        "series" => cmd_series(&config, threads),
        "grunsky" => cmd_grunsky(&config, threads),
        "faber" => cmd_faber(&config, threads),
        "embed" => cmd_embed(&config, threads),
        "circle" => cmd_circle(&config, threads),
        "virasoro" => cmd_virasoro(&config, threads),
        "kernel" => cmd_kernel(&config, threads),
        "radial" => cmd_radial(&config, threads),
        "sle-trace" => cmd_sle_trace(&config, threads),
        "sle-coeff" => cmd_sle_coeff(&config, threads),
        "martingale" => cmd_martingale(&config, threads),
        "report" => cmd_report(&config, threads),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    })
}

// ---------------------------------------------------------------------------
// series
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SeriesCfg {
    op: String,
    f: SeriesRef,
    #[serde(default)]
    g: Option<SeriesRef>,
}

fn cmd_series(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (SeriesCfg, Value) = typed_echo(config)?;
    let config = &config;
    let f = taylor_of(&cfg.f, "f")?;
    let need_g = || -> Result<TruncatedTaylor<C64>, CliError> {
        taylor_of(cfg.g.as_ref().ok_or_else(|| cfg_err("g", "required for this op"))?, "g")
    };
    let payload = match cfg.op.as_str() {
        "mul" | "div" | "log" | "exp" | "derivative" => {
            let kind = match cfg.op.as_str() {
                "mul" => ArithmeticKind::Mul,
                "div" => ArithmeticKind::Div,
                "log" => ArithmeticKind::Log,
                "exp" => ArithmeticKind::Exp,
                _ => ArithmeticKind::Derivative,
            };
            let g = if matches!(kind, ArithmeticKind::Mul | ArithmeticKind::Div) {
                Some(need_g()?)
            } else {
                None
            };
            let out = loewner_core::series::arithmetic(&f, g.as_ref(), kind)?;
            serde_json::to_value(SeriesJson::from_taylor(&out)).unwrap()
        }
        "compose" => {
            let out = f.compose(&need_g()?)?;
            serde_json::to_value(SeriesJson::from_taylor(&out)).unwrap()
        }
        "reversion" => {
            let out = f.reversion()?;
            serde_json::to_value(SeriesJson::from_taylor(&out)).unwrap()
        }
        "invert_at_infinity" => {
            let out = f.invert_at_infinity()?;
            serde_json::to_value(SeriesJson::from_laurent(&out)).unwrap()
        }
        "reciprocal" => {
            let v = f.reciprocal_coeffs()?;
            json!({ "convention": "value[j] multiplies z^(j-1)",
                    "coeffs": v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>() })
        }
        "schwarzian" => {
            let out = f.schwarzian()?;
            serde_json::to_value(SeriesJson::from_taylor(&out)).unwrap()
        }
        "debranges" => {
            let violated = loewner_core::series::debranges_check(&f);
            json!({ "violated_indices": violated })
        }
        other => return Err(cfg_err("op", &format!("unknown series op '{other}'"))),
    };
    Ok(vec![json_artifact("series.json", &with_echo("series", threads, config, payload))])
}

// ---------------------------------------------------------------------------
// grunsky / faber / embed
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GrunskyCfg {
    #[serde(default)]
    f: Option<SeriesRef>,
    #[serde(default)]
    g: Option<SeriesRef>,
    n: usize,
}

fn laurent_of(r: &SeriesRef, field: &str) -> Result<loewner_core::TruncatedLaurentInf<C64>, CliError> {
    let js = resolve_series(r, field)?;
    js.to_laurent().ok_or_else(|| cfg_err(field, "expected kind = laurent_inf"))
}

fn cmd_grunsky(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (GrunskyCfg, Value) = typed_echo(config)?;
    let config = &config;
    if cfg.n == 0 {
        return Err(cfg_err("n", "must be >= 1"));
    }
    let mut artifacts = Vec::new();
    let data = match (&cfg.f, &cfg.g) {
        (Some(fr), Some(gr)) => {
            GrunskyData::pair(&taylor_of(fr, "f")?, &laurent_of(gr, "g")?, cfg.n)?
        }
        (Some(fr), None) => GrunskyData::disc_only(&taylor_of(fr, "f")?, cfg.n)?,
        (None, Some(gr)) => GrunskyData::infinity_only(&laurent_of(gr, "g")?, cfg.n)?,
        (None, None) => return Err(cfg_err("f", "need at least one of f, g")),
    };
    let mut blocks = Vec::new();
    for (name, block) in [("c", &data.c), ("d", &data.d), ("e", &data.e)] {
        if let Some(b) = block {
            let js = MatrixJson::from_bivariate(name, b);
            artifacts.push(csv_artifact(
                &format!("grunsky_{name}.csv"),
                "grunsky",
                config,
                js.to_csv(),
            ));
            blocks.push(serde_json::to_value(js).unwrap());
        }
    }
    let payload = json!({
        "r": data.r,
        "R": data.big_r,
        "symmetry_defect": data.symmetry_defect(),
        "blocks": blocks,
    });
    artifacts.insert(0, json_artifact("grunsky.json", &with_echo("grunsky", threads, config, payload)));
    Ok(artifacts)
}

#[derive(Serialize, Deserialize)]
struct FaberCfg {
    #[serde(default)]
    f: Option<SeriesRef>,
    #[serde(default)]
    g: Option<SeriesRef>,
    n: usize,
}

fn cmd_faber(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (FaberCfg, Value) = typed_echo(config)?;
    let config = &config;
    let mut payload = Map::new();
    if let Some(gr) = &cfg.g {
        let g = laurent_of(gr, "g")?;
        let gs = grunsky::faber_g(&g, cfg.n)?;
        payload.insert(
            "G".into(),
            json!(gs
                .iter()
                .map(|p| p.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        );
    }
    if let Some(fr) = &cfg.f {
        let f = taylor_of(fr, "f")?;
        let fs = grunsky::faber_f(&f, cfg.n)?;
        payload.insert(
            "F".into(),
            json!(fs
                .iter()
                .map(|p| p.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        );
    }
    if payload.is_empty() {
        return Err(cfg_err("f", "need at least one of f, g"));
    }
    payload.insert(
        "convention".into(),
        json!({"G": "G_n coefficients of w^0..w^n", "F": "F_n coefficients of w^0, w^-1..w^-n"}),
    );
    Ok(vec![json_artifact(
        "faber.json",
        &with_echo("faber", threads, config, Value::Object(payload)),
    )])
}

#[derive(Serialize, Deserialize)]
struct EmbedCfg {
    f: SeriesRef,
    n: usize,
}

fn cmd_embed(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (EmbedCfg, Value) = typed_echo(config)?;
    let config = &config;
    let f = taylor_of(&cfg.f, "f")?;
    let emb = grunsky::yk_embedding(&f, cfg.n)?;
    let z_json = MatrixJson::from_dmatrix("Z", &emb.point.z, Some(emb.point.weighting.to_string()));
    let check = match grunsky::siegel_check(&emb.point) {
        Ok(c) => json!({"symmetric": c.symmetric, "spectral_gap": c.spectral_gap,
                        "kahler_potential": c.kahler_potential, "in_disc": true}),
        Err(CoreError::NotInDisc { gap }) => {
            json!({"symmetric": true, "spectral_gap": gap, "kahler_potential": null, "in_disc": false})
        }
        Err(e) => return Err(e.into()),
    };
    let payload = json!({
        "Z": serde_json::to_value(&z_json).unwrap(),
        "siegel": check,
        "vectors": emb.vectors_grunsky.iter().map(|v| {
            v.coeffs.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
        "vector_convention": format!("row m lists coefficients of z^k, k = -{0}..{0}", cfg.n),
    });
    Ok(vec![
        json_artifact("embed.json", &with_echo("embed", threads, config, payload)),
        csv_artifact("embed_Z.csv", "embed", config, z_json.to_csv()),
    ])
}

// ---------------------------------------------------------------------------
// circle
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CircleCfg {
    op: String,
    #[serde(default)]
    v1: Option<FourierField>,
    #[serde(default)]
    v2: Option<FourierField>,
    #[serde(default)]
    f: Option<SeriesRef>,
    #[serde(default)]
    c: f64,
    #[serde(default)]
    h: f64,
    #[serde(default)]
    k: usize,
}

fn cmd_circle(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (CircleCfg, Value) = typed_echo(config)?;
    let config = &config;
    let params = CentralParams { c: cfg.c, h: cfg.h };
    let need_v1 = || cfg.v1.clone().ok_or_else(|| cfg_err("v1", "required"));
    let payload = match cfg.op.as_str() {
        "hilbert" => serde_json::to_value(circle::hilbert_transform(&need_v1()?)).unwrap(),
        "j" => serde_json::to_value(circle::complex_structure_j(&need_v1()?)?).unwrap(),
        "bracket" => {
            let v2 = cfg.v2.clone().ok_or_else(|| cfg_err("v2", "required"))?;
            serde_json::to_value(circle::bracket(&need_v1()?, &v2)).unwrap()
        }
        "omega" => {
            let v2 = cfg.v2.clone().ok_or_else(|| cfg_err("v2", "required"))?;
            json!({"omega": circle::omega_ch(&need_v1()?, &v2, params)})
        }
        "kahler" => {
            if cfg.k == 0 {
                return Err(cfg_err("k", "must be >= 1"));
            }
            json!({"k": cfg.k, "coefficient": circle::kahler_metric_coeff(cfg.k, params)})
        }
        "polyakov" => {
            let f = taylor_of(cfg.f.as_ref().ok_or_else(|| cfg_err("f", "required"))?, "f")?;
            serde_json::to_value(circle::polyakov_alvarez(&f)?).unwrap()
        }
        other => return Err(cfg_err("op", &format!("unknown circle op '{other}'"))),
    };
    Ok(vec![json_artifact("circle.json", &with_echo("circle", threads, config, payload))])
}

// ---------------------------------------------------------------------------
// virasoro / kernel
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct VirasoroCfg {
    /// Levels to tabulate.
    levels: Vec<i64>,
    #[serde(default)]
    c: Option<String>,
    #[serde(default)]
    h: Option<String>,
    n: usize,
    weight: u32,
    /// Optional commutator pair [m, n].
    #[serde(default)]
    commutator: Option<(i64, i64)>,
}

fn parse_rat_field(s: &Option<String>, field: &str) -> Result<Rat, CliError> {
    match s {
        None => Ok(Rat::zero()),
        Some(text) => parse_rat(text).ok_or_else(|| cfg_err(field, "not a rational p/q")),
    }
}

fn action_json(action: &witt::OpAction<Rat>) -> Value {
    let chart = action.chart;
    json!(action
        .basis
        .iter()
        .zip(&action.images)
        .map(|(m, img)| {
            json!({
                "monomial": m.pairs().iter().map(|&(v, e)| (chart.var_name(v), e)).collect::<std::collections::BTreeMap<_, _>>(),
                "image": PolynomialJson::from_rational(img, chart),
            })
        })
        .collect::<Vec<_>>())
}

fn cmd_virasoro(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (VirasoroCfg, Value) = typed_echo(config)?;
    let config = &config;
    let c = parse_rat_field(&cfg.c, "c")?;
    let h = parse_rat_field(&cfg.h, "h")?;
    if cfg.n < 2 {
        return Err(cfg_err("n", "must be >= 2"));
    }
    let n = cfg.n as u16;
    let mut payload = Map::new();
    let mut levels = Vec::new();
    for &level in &cfg.levels {
        let op = witt::virasoro_op(level, &c, &h, n)?;
        let action = operator_action(&op, cfg.weight)?;
        levels.push(json!({"level": level, "action": action_json(&action)}));
    }
    payload.insert("levels".into(), json!(levels));
    if let Some((m, k)) = cfg.commutator {
        let a = witt::virasoro_op(m, &c, &h, n)?;
        let b = witt::virasoro_op(k, &c, &h, n)?;
        let comm = witt::commutator(&a, &b, cfg.weight)?;
        payload.insert(
            "commutator".into(),
            json!({
                "pair": [m, k],
                "structure_constant": witt::witt_structure_constant(m, k),
                "action": action_json(&comm),
            }),
        );
    }
    Ok(vec![json_artifact(
        "virasoro.json",
        &with_echo("virasoro", threads, config, Value::Object(payload)),
    )])
}

#[derive(Serialize, Deserialize)]
struct KernelCfg {
    kappa: Value,
    weight: u32,
}

fn cmd_kernel(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (KernelCfg, Value) = typed_echo(config)?;
    let config = &config;
    let (_, kappa) = parse_kappa(&cfg.kappa, "kappa")?;
    let n = cfg.weight.max(2) as u16;
    let gen = loewner_core::sle::sle_generator::<Rat>(kappa.clone(), n);
    let basis = kernel_solve(&gen, cfg.weight)?;
    let payload = json!({
        "kappa": kappa.to_string(),
        "weight": cfg.weight,
        "dimension": basis.len(),
        "basis": basis
            .iter()
            .map(|p| PolynomialJson::from_rational(p, Chart::Infinity))
            .collect::<Vec<_>>(),
    });
    Ok(vec![json_artifact("kernel.json", &with_echo("kernel", threads, config, payload))])
}

// ---------------------------------------------------------------------------
// radial
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RadialCfg {
    #[serde(default)]
    f0: Option<SeriesRef>,
    n: usize,
    measure: MeasureCfg,
    t_end: f64,
    dt: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MeasureCfg {
    Uniform { mass: f64 },
    Dirac { theta: f64, mass: f64 },
    Density { a: Vec<f64>, b: Vec<f64> },
}

impl MeasureCfg {
    fn build(&self) -> HerglotzMeasure {
        match self {
            MeasureCfg::Uniform { mass } => HerglotzMeasure::uniform(*mass),
            MeasureCfg::Dirac { theta, mass } => HerglotzMeasure::dirac(*theta, *mass),
            MeasureCfg::Density { a, b } => HerglotzMeasure {
                atoms: vec![],
                density: Some(FourierField::new(a.clone(), b.clone())),
            },
        }
    }
}

fn cmd_radial(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (RadialCfg, Value) = typed_echo(config)?;
    let config = &config;
    if cfg.dt.is_nan() || cfg.dt <= 0.0 {
        return Err(cfg_err("dt", "must be > 0"));
    }
    if cfg.t_end.is_nan() || cfg.t_end < 0.0 {
        return Err(cfg_err("t_end", "must be >= 0"));
    }
    let f0 = match &cfg.f0 {
        Some(r) => taylor_of(r, "f0")?,
        None => TruncatedTaylor::identity(cfg.n),
    };
    let measure = cfg.measure.build();
    measure.validate()?;
    let flow = radial_flow(&f0, |_| measure.clone(), cfg.t_end, cfg.dt, &RadialFlowOptions::default())?;
    let samples: Vec<Value> = flow
        .iter()
        .map(|(t, f)| {
            json!({"t": t, "series": SeriesJson::from_taylor(f)})
        })
        .collect();
    let mut csv = String::from("t");
    for k in 1..=f0.order() {
        csv.push_str(&format!(",re_a{k},im_a{k}"));
    }
    csv.push('\n');
    for (t, f) in &flow {
        csv.push_str(&format!("{t}"));
        for k in 1..=f.order() {
            let a = f.coeff(k);
            csv.push_str(&format!(",{},{}", a.re, a.im));
        }
        csv.push('\n');
    }
    Ok(vec![
        json_artifact("radial.json", &with_echo("radial", threads, config, json!({"samples": samples}))),
        csv_artifact("radial.csv", "radial", config, csv),
    ])
}

// ---------------------------------------------------------------------------
// sle-trace / sle-coeff
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TraceCfg {
    kappa: Value,
    t_end: f64,
    n_steps: usize,
    /// Mandatory for stochastic commands: runs must be reproducible.
    seed: u64,
    #[serde(default)]
    dt: Option<f64>,
    /// Deterministic constant driving instead of Brownian motion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_const: Option<f64>,
}

fn cmd_sle_trace(config: &Value, _threads: usize) -> CmdResult {
    let (cfg, config): (TraceCfg, Value) = typed_echo(config)?;
    let config = &config;
    // kappa = 0 is the deterministic slit; keep it admissible here.
    let kappa = match &cfg.kappa {
        Value::Number(n) if n.as_f64() == Some(0.0) => 0.0,
        v => parse_kappa(v, "kappa")?.0,
    };
    if cfg.n_steps == 0 {
        return Err(cfg_err("n_steps", "must be >= 1"));
    }
    let dt = cfg.dt.unwrap_or(cfg.t_end / cfg.n_steps as f64);
    let driving = if let Some(c) = cfg.w_const {
        Driving::constant(c, cfg.t_end)
    } else if kappa == 0.0 {
        Driving::constant(0.0, cfg.t_end)
    } else {
        Driving::brownian(kappa, cfg.seed, dt, cfg.t_end)
    };
    let trace = sle_trace(&driving, cfg.t_end, cfg.n_steps);
    let mut csv = String::from("step,t,re,im\n");
    for (i, (t, gamma)) in trace.iter().enumerate() {
        csv.push_str(&format!("{i},{t},{},{}\n", gamma.re, gamma.im));
    }
    Ok(vec![csv_artifact("trace.csv", "sle-trace", config, csv)])
}

#[derive(Serialize, Deserialize)]
struct CoeffCfg {
    kappa: Value,
    n: usize,
    t_end: f64,
    dt: f64,
    seed: u64,
}

fn cmd_sle_coeff(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (CoeffCfg, Value) = typed_echo(config)?;
    let config = &config;
    let (kappa, _) = parse_kappa(&cfg.kappa, "kappa")?;
    if !(cfg.dt > 0.0 && cfg.t_end > 0.0) {
        return Err(cfg_err("dt", "dt and t_end must be > 0"));
    }
    let path = coeff_hierarchy(kappa, cfg.seed, cfg.n, cfg.t_end, cfg.dt, 0);
    let payload = json!({
        "kappa": path.kappa,
        "seed": path.seed,
        "dt": path.dt,
        "b": path.b,
    });
    Ok(vec![json_artifact("path.json", &with_echo("sle-coeff", threads, config, payload))])
}

// ---------------------------------------------------------------------------
// martingale / report
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MartingaleCfg {
    kappa: Value,
    #[serde(default = "default_weight")]
    weight: u32,
    t_end: f64,
    dt: f64,
    paths: usize,
    #[serde(default = "default_checkpoints")]
    checkpoints: usize,
    seed: u64,
    #[serde(default = "default_z_crit")]
    z_crit: f64,
}

fn default_weight() -> u32 {
    2
}

fn mc_config(kappa: f64, cfg: &MartingaleCfg) -> Result<McConfig, CliError> {
    if !(cfg.dt > 0.0 && cfg.t_end > 0.0) {
        return Err(cfg_err("dt", "dt and t_end must be > 0"));
    }
    if cfg.paths == 0 {
        return Err(cfg_err("paths", "must be >= 1"));
    }
    Ok(McConfig {
        kappa,
        t_end: cfg.t_end,
        dt: cfg.dt,
        paths: cfg.paths,
        checkpoints: cfg.checkpoints.max(1),
        seed: cfg.seed,
        z_crit: cfg.z_crit,
        min_detectable_drift: None,
    })
}

fn cmd_martingale(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (MartingaleCfg, Value) = typed_echo(config)?;
    let config = &config;
    let (kappa_f, kappa_rat) = parse_kappa(&cfg.kappa, "kappa")?;
    let mc = mc_config(kappa_f, &cfg)?;
    let reports = kernel_martingale_suite(&kappa_rat, cfg.weight, &mc)?;
    let all_ok = reports[..reports.len() - 1].iter().all(|r| r.is_consistent())
        && !reports[reports.len() - 1].is_consistent();
    let mut csv = String::from("observable,t,mean,se,z\n");
    for r in &reports {
        for c in &r.checkpoints {
            csv.push_str(&format!("\"{}\",{},{},{},{}\n", r.observable, c.t, c.mean, c.se, c.z));
        }
    }
    let payload = json!({
        "kernel_dimension": reports.len() - 1,
        "suite_passed": all_ok,
        "reports": reports,
    });
    Ok(vec![
        json_artifact("martingale.json", &with_echo("martingale", threads, config, payload)),
        csv_artifact("martingale.csv", "martingale", config, csv),
    ])
}

#[derive(Serialize, Deserialize)]
struct ReportCfg {
    kappa: Value,
    x: f64,
    t_end: f64,
    dt: f64,
    paths: usize,
    #[serde(default = "default_checkpoints")]
    checkpoints: usize,
    seed: u64,
    #[serde(default = "default_z_crit")]
    z_crit: f64,
}

fn cmd_report(config: &Value, threads: usize) -> CmdResult {
    let (cfg, config): (ReportCfg, Value) = typed_echo(config)?;
    let config = &config;
    let (kappa_f, _) = parse_kappa(&cfg.kappa, "kappa")?;
    if cfg.x.is_nan() || cfg.x <= 0.0 {
        return Err(cfg_err("x", "must be > 0"));
    }
    let mc = McConfig {
        kappa: kappa_f,
        t_end: cfg.t_end,
        dt: cfg.dt,
        paths: cfg.paths,
        checkpoints: cfg.checkpoints.max(1),
        seed: cfg.seed,
        z_crit: cfg.z_crit,
        min_detectable_drift: None,
    };
    let report = rn_density_report(cfg.x, &mc)?;
    let params = ch_from_kappa(kappa_f);
    let mut csv = String::from("t,log_boundary_mean,log_boundary_se,schwarzian_mean\n");
    for (c, (st, sm)) in report.log_boundary_factor.iter().zip(&report.schwarzian_integrand) {
        debug_assert!((c.t - st).abs() < 1e-12);
        csv.push_str(&format!("{},{},{},{}\n", c.t, c.mean, c.se, sm));
    }
    let payload = json!({
        "c": params.c,
        "h": params.h,
        "report": report,
    });
    Ok(vec![
        json_artifact("report.json", &with_echo("report", threads, config, payload)),
        csv_artifact("report.csv", "report", config, csv),
    ])
}
