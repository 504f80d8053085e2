//! Pipelines behind each command and the artifacts they write.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use aniso_core::fields::Field;
use aniso_core::geometry::ConvexBody;
use aniso_core::grid::{Grid, GridFunction};
use aniso_core::numfmt::{fmt17, to_json};
use aniso_core::profile::{Continuity, Monotone, Profile};
use aniso_core::rearrange::{distribution, integrand_symmetral, symmetral, triple_symmetral};
use aniso_core::verify::{
    evaluate, extremality_diagnostics, generate_prop51, generate_prop52, sandwich_constants, verify_inequality,
    LevelRecord, Report, Verdict, SCHEMA_VERSION,
};
use aniso_core::young::{conjugate_fast, default_dual_grid, involution_check, Young1D, YoungND};

use crate::config::{parse_list, Command, RunConfig};
use crate::CliError;

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    schema_version: u32,
    command: &'static str,
    run_id: String,
    input_hash: String,
    seed: u64,
    config: &'a RunConfig,
    result: T,
}

/// Files written next to the JSON artifact.
struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { files: Vec::new() }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

pub fn run(cfg: &RunConfig) -> Result<u8, CliError> {
    let hash = input_hash(cfg)?;
    let run_id = hash[..12].to_string();
    let mut out = Outputs::new();
    let (result, code) = match cfg.command() {
        Command::Conjugate => (conjugate(cfg, &mut out)?, 0),
        Command::SymmetrizeBody => (symmetrize_body(cfg, &mut out)?, 0),
        Command::SymmetrizeFn => (symmetrize_fn(cfg, &mut out)?, 0),
        Command::SymmetrizeU => (symmetrize_u(cfg, &mut out)?, 0),
        Command::Verify => {
            let r = verify(cfg, &mut out)?;
            let code = exit_for(r.verdict);
            (json(&r), code)
        }
        Command::GenProp51 => gen_prop51(cfg, &mut out)?,
        Command::GenProp52 => gen_prop52(cfg, &mut out)?,
        Command::Diagnose => (diagnose(cfg, &mut out)?, 0),
        Command::Sandwich => (sandwich(cfg)?, 0),
    };
    let artifact = Artifact {
        schema_version: SCHEMA_VERSION,
        command: cfg.command().name(),
        run_id: run_id.clone(),
        input_hash: hash,
        seed: cfg.seed(),
        config: cfg,
        result,
    };
    let text = to_json(&artifact);
    if let Some(dir) = &cfg.out {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        write(&dir.join(format!("{run_id}-report.json")), &text)?;
        for (name, contents) in &out.files {
            write(&dir.join(format!("{run_id}-{name}")), contents)?;
        }
    }
    println!("{text}");
    Ok(code)
}

fn exit_for(v: Verdict) -> u8 {
    if v == Verdict::Violation {
        2
    } else {
        0
    }
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable result")
}

fn io_err(p: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", p.display()))
}

fn write(p: &Path, s: &str) -> Result<(), CliError> {
    std::fs::write(p, s).map_err(|e| io_err(p, e))
}

/// SHA-256 of the resolved config and of every input file it names.
fn input_hash(cfg: &RunConfig) -> Result<String, CliError> {
    let mut h = Sha256::new();
    let mut keyed = cfg.clone();
    keyed.out = None;
    h.update(serde_json::to_string(&keyed).expect("config json").as_bytes());
    let specs = [&cfg.u, &cfg.phi, &cfg.k, &cfg.l, &cfg.b];
    for spec in specs.into_iter().flatten() {
        let path = spec.strip_prefix("polygon:").unwrap_or(spec);
        if Path::new(path).is_file() {
            let bytes = std::fs::read(path).map_err(|e| io_err(Path::new(path), e))?;
            h.update(&bytes);
        }
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn body(spec: &str) -> Result<ConvexBody, CliError> {
    Ok(ConvexBody::parse(spec)?)
}

fn load_u(cfg: &RunConfig) -> Result<GridFunction, CliError> {
    let spec = cfg.require(&cfg.u, "u")?;
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(|e| io_err(Path::new(spec), e))?;
        let u = GridFunction::from_text(&text)?;
        let cells = u.grid.shape().iter().copied().min().unwrap_or(0).saturating_sub(1);
        if cells < crate::config::MIN_RES {
            return Err(CliError::Config(format!("grid in {spec} has {cells} cells per axis, below the minimum")));
        }
        u.check_support()?;
        return Ok(u);
    }
    let field = if spec == "random" { Field::random(cfg.dim.unwrap_or(2), cfg.seed()) } else { Field::parse(spec)? };
    Ok(field.sample(cfg.res())?)
}

fn load_phi(cfg: &RunConfig, dim: usize) -> Result<YoungND, CliError> {
    let phi = YoungND::parse(cfg.require(&cfg.phi, "phi")?, dim)?;
    if phi.dim() != dim {
        return Err(CliError::Config(format!("phi has dimension {} but {dim} is required", phi.dim())));
    }
    Ok(phi)
}

fn x0(cfg: &RunConfig, dim: usize) -> Result<Vec<f64>, CliError> {
    match &cfg.x0 {
        None => Ok(vec![0.0; dim]),
        Some(s) => {
            let v = parse_list(s, "x0")?;
            if v.len() != dim {
                return Err(CliError::Config(format!("x0 needs {dim} coordinates")));
            }
            Ok(v)
        }
    }
}

fn phi_grid(cfg: &RunConfig, dim: usize) -> Result<Grid, CliError> {
    Ok(Grid::cube(dim, cfg.half(), cfg.res() + 1)?)
}

fn inner_half(g: &Grid, i: usize) -> bool {
    let p = g.node(i);
    (0..g.dim()).all(|k| {
        let c = 0.5 * (g.lo()[k] + g.hi()[k]);
        (p[k] - c).abs() <= 0.25 * (g.hi()[k] - g.lo()[k]) + 1e-12
    })
}

#[derive(Serialize)]
struct ConjugateResult {
    primal: Grid,
    dual: Grid,
    involution_deviation: f64,
    /// Largest deviation from the closed-form conjugate on the inner half
    /// of the dual box, where one exists.
    closed_form_deviation: Option<f64>,
}

fn conjugate(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, CliError> {
    let dim = cfg.dim.unwrap_or(2);
    let phi = load_phi(cfg, dim)?;
    let primal = phi_grid(cfg, phi.dim())?;
    let s = phi.sample(&primal)?;
    let dual = default_dual_grid(&s, 1.0);
    let star = conjugate_fast(&s, &dual);
    let inv = involution_check(&s, &dual);
    let closed_form_deviation = phi.conjugate_closed_form().map(|c| {
        (0..dual.len())
            .filter(|&i| inner_half(&dual, i))
            .map(|i| {
                let e = c.eval(&dual.node(i));
                let v = star.values[i];
                if e.is_infinite() && v.is_infinite() {
                    0.0
                } else {
                    (e - v).abs()
                }
            })
            .fold(0.0, f64::max)
    });
    out.add("phi.txt", s.to_text());
    out.add("phi_star.txt", star.to_text());
    Ok(json(&ConjugateResult { primal, dual, involution_deviation: inv.deviation, closed_form_deviation }))
}

#[derive(Serialize)]
struct BodyResult {
    vertices: Vec<Vec<f64>>,
    volume: f64,
    surface_area: f64,
    origin_symmetric: bool,
    polar_vertices: Vec<Vec<f64>>,
    polar_volume: f64,
    /// `|L| |L°|`.
    volume_product: f64,
    dilated_vertices: Option<Vec<Vec<f64>>>,
}

fn body_csv(b: &ConvexBody) -> String {
    let mut s = String::new();
    for v in b.vertices() {
        let row: Vec<String> = v.iter().map(|x| fmt17(*x)).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

fn symmetrize_body(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, CliError> {
    let l = body(cfg.require(&cfg.l, "L")?)?;
    let polar = l.polar()?;
    let dilated = match &cfg.dilate {
        None => None,
        Some(s) => {
            let (scale, shift) = s.split_once(';').unwrap_or((s, ""));
            let scale: f64 = scale.trim().parse().map_err(|_| CliError::Config(format!("bad dilation {s}")))?;
            let shift = if shift.trim().is_empty() { vec![0.0; l.dim()] } else { parse_list(shift, "shift")? };
            let d = l.dilate_translate(scale, &shift)?;
            out.add("dilated.csv", body_csv(&d));
            Some(d.vertices().to_vec())
        }
    };
    out.add("body.csv", body_csv(&l));
    out.add("polar.csv", body_csv(&polar));
    Ok(json(&BodyResult {
        vertices: l.vertices().to_vec(),
        volume: l.volume(),
        surface_area: l.surface_area(),
        origin_symmetric: l.is_origin_symmetric(1e-9),
        polar_vertices: polar.vertices().to_vec(),
        polar_volume: polar.volume(),
        volume_product: l.volume() * polar.volume(),
        dilated_vertices: dilated,
    }))
}

#[derive(Serialize)]
struct SymFnResult {
    /// Radius and level ranges of `Phi_K = B(gauge_{-K})`.
    phi_k_r_max: f64,
    phi_k_s_max: f64,
    /// Same for `(Phi_*)_K`.
    conj_k_r_max: f64,
    conj_k_s_max: f64,
    /// `max |Phi_{*K*} - Phi|` on the inner half box.
    triple_deviation: f64,
    warnings: Vec<String>,
}

fn symmetrize_fn(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, CliError> {
    let k = body(cfg.require(&cfg.k, "K")?)?;
    let phi = load_phi(cfg, k.dim())?;
    let primal = phi_grid(cfg, k.dim())?;
    let s = phi.sample(&primal)?;
    let phi_k = integrand_symmetral(&s, &k)?;
    let dual = default_dual_grid(&s, 1.0);
    let (triple, conj_k) = triple_symmetral(&phi, &k, &primal, &dual)?;
    let triple_deviation = (0..primal.len())
        .filter(|&i| inner_half(&primal, i) && s.values[i].is_finite())
        .map(|i| (triple.values[i] - s.values[i]).abs())
        .fold(0.0, f64::max);
    out.add("phi_k.txt", phi_k.as_young().sample(&primal)?.to_text());
    out.add("phi_star_k_star.txt", triple.to_text());
    let mut warnings = phi_k.warnings.clone();
    warnings.extend(conj_k.warnings.iter().cloned());
    warnings.dedup();
    Ok(json(&SymFnResult {
        phi_k_r_max: phi_k.r_max,
        phi_k_s_max: phi_k.s_max,
        conj_k_r_max: conj_k.r_max,
        conj_k_s_max: conj_k.s_max,
        triple_deviation,
        warnings,
    }))
}

#[derive(Serialize)]
struct SymUResult {
    grid: Grid,
    symmetral_grid: Grid,
    max: f64,
    essinf: f64,
    /// Largest `| |{u^K > t}| - |{u > t}| |` over the tabulated levels.
    distribution_mismatch: f64,
}

fn symmetrize_u(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, CliError> {
    let u = load_u(cfg)?;
    let k = body(cfg.require(&cfg.k, "K")?)?;
    let uk = symmetral(&u, &k)?;
    let mu = distribution(&u);
    let muk = distribution(&uk);
    let mut csv = String::from("t,mu_u,mu_uk\n");
    let mut mismatch: f64 = 0.0;
    for (&t, &m) in mu.x.iter().zip(&mu.y) {
        let mk = muk.eval(t);
        mismatch = mismatch.max((mk - m).abs());
        let _ = writeln!(csv, "{},{},{}", fmt17(t), fmt17(m), fmt17(mk));
    }
    out.add("u.txt", u.to_text());
    out.add("uk.txt", uk.to_text());
    out.add("distribution.csv", csv);
    Ok(json(&SymUResult {
        grid: u.grid.clone(),
        symmetral_grid: uk.grid.clone(),
        max: u.max(),
        essinf: u.essinf,
        distribution_mismatch: mismatch,
    }))
}

fn levels_csv(levels: &[LevelRecord]) -> String {
    let mut s = String::new();
    let dim = levels.first().map(|l| l.x_t.len()).unwrap_or(0);
    let mut head = vec!["t".to_string(), "s_t".into(), "a_t".into()];
    head.extend((0..dim).map(|k| format!("x_t{k}")));
    head.extend((1..=8).map(|k| format!("T{k}")));
    for c in ["chain_ok", "band_tol", "res_a", "res_b", "tol_b", "res_c", "res_d", "res_e", "quasi_convexity"] {
        head.push(c.into());
    }
    let _ = writeln!(s, "{}", head.join(","));
    for l in levels {
        let mut row = vec![fmt17(l.t), fmt17(l.s_t), fmt17(l.a_t)];
        row.extend(l.x_t.iter().map(|v| fmt17(*v)));
        row.extend(l.chain.iter().map(|v| fmt17(*v)));
        row.push(l.chain_ok.to_string());
        let r = &l.residuals;
        for v in [l.band_tol, r.a, r.b, r.tol_b, r.c, r.d, r.e, l.quasi_convexity] {
            row.push(fmt17(v));
        }
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

fn verify_pair(cfg: &RunConfig, u: &GridFunction, phi: &YoungND, out: &mut Outputs) -> Result<Report, CliError> {
    let k = body(cfg.k.as_deref().unwrap_or("square"))?;
    let r = verify_inequality(u, phi, &k, &cfg.verify_config())?;
    out.add("levels.csv", levels_csv(&r.per_level));
    out.add("u.txt", u.to_text());
    out.add("uk.txt", symmetral(u, &k)?.to_text());
    Ok(r)
}

fn verify(cfg: &RunConfig, out: &mut Outputs) -> Result<Report, CliError> {
    cfg.require(&cfg.k, "K")?;
    let u = load_u(cfg)?;
    let phi = load_phi(cfg, u.grid.dim())?;
    verify_pair(cfg, &u, &phi, out)
}

#[derive(Serialize)]
struct GenResult {
    phi: YoungND,
    grid: Grid,
    closed_form: bool,
    report: Option<Report>,
}

fn finish_gen(
    cfg: &RunConfig,
    u: GridFunction,
    phi: YoungND,
    closed_form: bool,
    out: &mut Outputs,
) -> Result<(serde_json::Value, u8), CliError> {
    let report = if cfg.then_verify.unwrap() { Some(verify_pair(cfg, &u, &phi, out)?) } else { None };
    let code = report.as_ref().map(|r| exit_for(r.verdict)).unwrap_or(0);
    if report.is_none() {
        out.add("u.txt", u.to_text());
    }
    Ok((json(&GenResult { phi, grid: u.grid.clone(), closed_form, report }), code))
}

fn default_b() -> Profile {
    Profile::new(vec![0.0, 1.0], vec![1.0, 0.0], Monotone::Nonincreasing, Continuity::Right).expect("b(t) = 1 - t")
}

fn gen_prop51(cfg: &RunConfig, out: &mut Outputs) -> Result<(serde_json::Value, u8), CliError> {
    let l = body(cfg.require(&cfg.l, "L")?)?;
    let a = Young1D::parse(cfg.big_a.as_deref().unwrap_or("pow(2)"))?;
    let b = match &cfg.b {
        None => default_b(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_err(Path::new(p), e))?;
            Profile::from_csv(&text)?
        }
    };
    let x0 = x0(cfg, l.dim())?;
    let p = generate_prop51(&l, &a, &b, &x0, cfg.res())?;
    finish_gen(cfg, p.u, p.phi, true, out)
}

fn gen_prop52(cfg: &RunConfig, out: &mut Outputs) -> Result<(serde_json::Value, u8), CliError> {
    let dim = cfg.dim.unwrap_or(2);
    let phi = load_phi(cfg, dim)?;
    let t = parse_list(cfg.t.as_deref().unwrap_or("0,1,1"), "levels t1,t2,t3")?;
    let [t1, t2, t3] = t[..] else {
        return Err(CliError::Config("--t needs three levels t1,t2,t3".into()));
    };
    let x0 = x0(cfg, phi.dim())?;
    let p = generate_prop52(&phi, cfg.a.unwrap_or(1.0), t1, t2, t3, &x0, cfg.res())?;
    finish_gen(cfg, p.u, phi, p.closed_form, out)
}

#[derive(Serialize)]
struct DiagnoseResult {
    equality_fraction: f64,
    chain_fraction: f64,
    min_quasi_convexity: f64,
    levels: Vec<LevelRecord>,
}

fn diagnose(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, CliError> {
    let u = load_u(cfg)?;
    let phi = load_phi(cfg, u.grid.dim())?;
    let k = body(cfg.require(&cfg.k, "K")?)?;
    let vc = cfg.verify_config();
    let ev = evaluate(&u, &phi, &k, &vc)?;
    let d = extremality_diagnostics(&ev, &phi, &vc)?;
    out.add("levels.csv", levels_csv(&d.levels));
    Ok(json(&DiagnoseResult {
        equality_fraction: d.equality_fraction,
        chain_fraction: d.chain_fraction,
        min_quasi_convexity: d.min_quasi_convexity,
        levels: d.levels,
    }))
}

fn sandwich(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let k = body(cfg.require(&cfg.k, "K")?)?;
    let phi = load_phi(cfg, k.dim())?;
    let primal = phi_grid(cfg, k.dim())?;
    Ok(json(&sandwich_constants(&phi, &k, &primal)?))
}
