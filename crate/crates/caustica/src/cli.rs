//! Command-line front end: one subcommand per experiment, flat key=value
//! config files (command-line flags win), CSV output with a `# schema:`
//! header, and a single-line JSON summary {quantity, value, tolerance, pass}.
//!
//! Exit codes: 0 = pass, 1 = a check failed, 2 = usage / input error.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use crate::billiard::{self, LazutkinChart, PhasePoint, WeaklyBilliardMap};
use crate::conic::{make_conic, ConicSpec};
use crate::curve::ConvexCurve;
use crate::error::{Error, Result};
use crate::incidence;
use crate::jet::{self, Jet4};
use crate::outer;
use crate::strings;
use crate::surface::{Surface, SurfaceKind, UnitTangent};
use crate::vec3::V3;

#[derive(Parser)]
#[command(
    name = "caustica",
    about = "String and area constructions, billiard normal forms, incidence tests, and jet reconstruction",
    disable_help_subcommand = true
)]
struct Cli {
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output path for CSV/JSON artifacts (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace a geodesic on a surface and emit it as CSV.
    Surface {
        /// euclidean | sphere | hyperbolic
        #[arg(long)]
        kind: Option<String>,
        /// Start point "x,y" (chart) or "x,y,z" (sphere).
        #[arg(long)]
        from: Option<String>,
        /// Initial direction (normalized internally).
        #[arg(long)]
        dir: Option<String>,
        /// Arclength to flow.
        #[arg(long)]
        length: Option<f64>,
        /// Number of CSV samples.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Trace the string curve of length p around a convex curve.
    String {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        anchors: Option<usize>,
        /// pair | bisector
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Test whether the string maps are translations in the
    /// curvature^(2/3) parameter.
    PoritskyCheck {
        #[arg(long)]
        curve: Option<String>,
        /// Comma-separated list of string lengths p.
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Iterate the billiard map in boundary-adapted chart coordinates.
    LazutkinMap {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        y0: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Fit the near-boundary step exponent instead of dumping an orbit.
        #[arg(long, default_value_t = false)]
        check_normal_form: bool,
    },
    /// Quantitative near-boundary orbit bounds (oscillation and step rate).
    Plog {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        y0: Option<f64>,
        /// Chart-X advance at which the orbit stops.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Outer-billiard area construction checks.
    Outer {
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        /// poritsky | homothety
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Weighted Ceva product for a geodesic triangle and cevian feet.
    Ceva {
        /// euclidean | sphere | hyperbolic
        #[arg(long)]
        surface: Option<String>,
        /// Three vertices "x,y;x,y;x,y" (or "x,y,z" triples on the sphere).
        #[arg(long)]
        triangle: Option<String>,
        /// Feet on lines BC;CA;AB, same format.
        #[arg(long)]
        feet: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Tangent-incidence concurrency residual at three curve parameters.
    Incidence {
        #[arg(long)]
        curve: Option<String>,
        /// Comma-separated arclength parameters "a,b,c".
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Integrate the 4-jet reconstruction ODE and emit the curve as CSV.
    JetOde {
        /// "x,b0,b1,b2,b3,b4"
        #[arg(long)]
        jet: Option<String>,
        #[arg(long)]
        range: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Only "euclidean" is supported from the CLI.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Run every acceptance check and print one PASS/FAIL line each.
    VerifyAll {},
}

/// JSON summary printed by every subcommand.
#[derive(serde::Serialize)]
struct Summary {
    quantity: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn emit_summary(s: &Summary) {
    println!(
        "[{}] {} = {:.6e} (tolerance {:.1e})",
        if s.pass { "PASS" } else { "FAIL" },
        s.quantity,
        s.value,
        s.tolerance
    );
    println!("{}", serde_json::to_string(s).expect("summary serializes"));
}

/// Flat key=value config file; '#' starts a comment line.
fn load_config(path: &str) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::invalid(format!("config line {} is not key=value: {line:?}", ln + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Keys every subcommand accepts from a config file.
const KNOWN_KEYS: &[&str] = &[
    "kind", "from", "dir", "length", "steps", "curve", "p", "anchors", "method",
    "tolerance", "samples", "s0", "y0", "delta", "budget", "check", "surface",
    "triangle", "feet", "params", "jet", "range", "step", "metric", "out",
];

struct Opts {
    config: HashMap<String, String>,
}

impl Opts {
    fn new(config_path: Option<&str>) -> Result<Opts> {
        let config = match config_path {
            Some(p) => {
                let map = load_config(p)?;
                for key in map.keys() {
                    if !KNOWN_KEYS.contains(&key.as_str()) {
                        return Err(Error::invalid(format!("unknown config key {key:?}")));
                    }
                }
                map
            }
            None => HashMap::new(),
        };
        Ok(Opts { config })
    }

    /// Flag value if given, else the config value, else an error naming the key.
    fn require<T: FromStr + Clone>(&self, flag: Option<&T>, key: &str) -> Result<T> {
        self.get(flag, key)?
            .ok_or_else(|| Error::invalid(format!("missing required option --{key}")))
    }

    fn get<T: FromStr + Clone>(&self, flag: Option<&T>, key: &str) -> Result<Option<T>> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.config.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::invalid(format!("config value for {key} is malformed: {raw:?}"))),
            None => Ok(None),
        }
    }

    fn or_default<T: FromStr + Clone>(&self, flag: Option<&T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }
}

/// Parse "x,y" or "x,y,z" into a point.
fn parse_point(s: &str) -> Result<V3> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::invalid(format!("malformed point {s:?}")))?;
    match parts.len() {
        2 => Ok(V3::xy(parts[0], parts[1])),
        3 => Ok(V3::new(parts[0], parts[1], parts[2])),
        n => Err(Error::invalid(format!("point needs 2 or 3 coordinates, got {n}"))),
    }
}

fn parse_point_list(s: &str, expect: usize) -> Result<Vec<V3>> {
    let pts: Vec<V3> = s.split(';').map(parse_point).collect::<Result<_>>()?;
    if pts.len() != expect {
        return Err(Error::invalid(format!(
            "expected {expect} points separated by ';', got {}",
            pts.len()
        )));
    }
    Ok(pts)
}

fn parse_surface_kind(s: &str) -> Result<Surface> {
    match s {
        "euclidean" => Ok(Surface::euclidean()),
        "sphere" => Ok(Surface::sphere()),
        "hyperbolic" => Ok(Surface::hyperbolic()),
        other => Err(Error::invalid(format!(
            "unknown surface {other:?} (expected euclidean | sphere | hyperbolic)"
        ))),
    }
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("malformed number {t:?}")))
        })
        .collect()
}

/// Parse a bracketed list "[a,b,c]".
fn parse_bracketed(s: &str) -> Result<Vec<f64>> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::invalid(format!("expected a [..] list, got {s:?}")))?;
    parse_f64_list(inner)
}

/// Curve mini-language:
///   circle:r=1
///   ellipse:a=2,b=1
///   quartic                       (the oval x^4 + y^4 = 1)
///   graph:coeffs=[b0,..],lo=-0.5,hi=0.5
///   conic:k=sphere,c=[c11,c12,c13,c22,c23,c33],base=x,y,z
pub fn parse_curve(spec: &str) -> Result<ConvexCurve> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "circle" => {
            let kv = parse_kv(rest)?;
            let r = kv_num(&kv, "r")?;
            ConvexCurve::circle(r)
        }
        "ellipse" => {
            let kv = parse_kv(rest)?;
            ConvexCurve::ellipse(kv_num(&kv, "a")?, kv_num(&kv, "b")?)
        }
        "quartic" => ConvexCurve::quartic_oval(),
        "graph" => {
            let kv = parse_kv(rest)?;
            let coeffs = parse_bracketed(
                kv.get("coeffs")
                    .ok_or_else(|| Error::invalid("graph curve needs coeffs=[..]"))?,
            )?;
            let lo = kv.get("lo").map(|v| v.parse::<f64>()).transpose().ok().flatten();
            let hi = kv.get("hi").map(|v| v.parse::<f64>()).transpose().ok().flatten();
            ConvexCurve::graph(
                Surface::euclidean(),
                &coeffs,
                lo.unwrap_or(-0.5),
                hi.unwrap_or(0.5),
            )
        }
        "conic" => {
            let kv = parse_kv(rest)?;
            let kind = match kv.get("k").map(|s| s.as_str()) {
                Some("euclidean") => SurfaceKind::Euclidean,
                Some("sphere") => SurfaceKind::Sphere,
                Some("hyperbolic") => SurfaceKind::Hyperbolic,
                other => {
                    return Err(Error::invalid(format!("conic needs k=<model>, got {other:?}")))
                }
            };
            let c = parse_bracketed(
                kv.get("c").ok_or_else(|| Error::invalid("conic needs c=[6 entries]"))?,
            )?;
            if c.len() != 6 {
                return Err(Error::invalid(
                    "conic matrix wants 6 entries c11,c12,c13,c22,c23,c33",
                ));
            }
            let m = [[c[0], c[1], c[2]], [c[1], c[3], c[4]], [c[2], c[4], c[5]]];
            let base = match kv.get("base") {
                Some(b) => parse_point(b)?,
                None => match kind {
                    SurfaceKind::Sphere => V3::new(0.0, 0.0, 1.0),
                    _ => V3::xy(0.0, 0.0),
                },
            };
            make_conic(&ConicSpec { kind, c: m }, base)
        }
        other => Err(Error::invalid(format!(
            "unknown curve {other:?} (expected circle | ellipse | quartic | graph | conic)"
        ))),
    }
}

/// Parse "a=1,b=2,c=[x,y]" style key-value tails (brackets may contain commas).
fn parse_kv(s: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    let mut depth = 0usize;
    let mut token = String::new();
    let mut tokens = Vec::new();
    for ch in s.chars() {
        match ch {
            '[' => {
                depth += 1;
                token.push(ch);
            }
            ']' => {
                depth = depth.saturating_sub(1);
                token.push(ch);
            }
            ',' if depth == 0 => {
                tokens.push(std::mem::take(&mut token));
                continue;
            }
            _ => token.push(ch),
        }
    }
    if !token.is_empty() {
        tokens.push(token);
    }
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("expected key=value, got {t:?}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn kv_num(kv: &HashMap<String, String>, key: &str) -> Result<f64> {
    kv.get(key)
        .ok_or_else(|| Error::invalid(format!("missing {key}= in curve spec")))?
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("malformed number for {key}=")))
}

fn write_artifact(out: Option<&str>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(Error::from),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Cap the global thread pool from CAUSTICA_THREADS (best-effort; ignored if
/// a pool already exists).
fn init_threads() {
    if let Ok(v) = std::env::var("CAUSTICA_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap help/version are not usage errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(&cli) {
        Ok(pass) => {
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("caustica: {e}");
            2
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let opts = Opts::new(cli.config.as_deref())?;
    let out = opts.get(cli.out.as_ref(), "out")?;
    let out = out.as_deref();
    match &cli.command {
        Command::Surface { kind, from, dir, length, steps } => {
            let surf = parse_surface_kind(&opts.require(kind.as_ref(), "kind")?)?;
            let p = parse_point(&opts.require(from.as_ref(), "from")?)?;
            let d = parse_point(&opts.require(dir.as_ref(), "dir")?)?;
            let length = opts.require(length.as_ref(), "length")?;
            let steps = opts.or_default(steps.as_ref(), "steps", 64usize)?;
            let d = d / surf.inner(p, d, d).sqrt();
            let mut csv = String::from("# schema: u,x,y,z (geodesic samples; u = arclength)\n");
            for i in 0..=steps {
                let u = length * i as f64 / steps as f64;
                let q = surf.geodesic_flow(UnitTangent { point: p, vector: d }, u)?.point;
                writeln!(csv, "{u:.12e},{:.12e},{:.12e},{:.12e}", q.x, q.y, q.z).unwrap();
            }
            write_artifact(out, &csv)?;
            let s = Summary { quantity: "geodesic_length", value: length, tolerance: 0.0, pass: true };
            emit_summary(&s);
            Ok(true)
        }
        Command::String { curve, p, anchors, method, tolerance } => {
            let curve = parse_curve(&opts.require(curve.as_ref(), "curve")?)?;
            let p = opts.require(p.as_ref(), "p")?;
            let anchors = opts.or_default(anchors.as_ref(), "anchors", 64usize)?;
            let tolerance = opts.or_default(tolerance.as_ref(), "tolerance", 1e-8f64)?;
            let method = match opts
                .or_default(method.as_ref(), "method", "pair".to_string())?
                .as_str()
            {
                "pair" => strings::StringMethod::PairRootfind,
                "bisector" => strings::StringMethod::BisectorOde,
                other => return Err(Error::invalid(format!("unknown method {other:?}"))),
            };
            let sc = strings::string_curve(&curve, p, method, anchors)?;
            let mut csv = String::from(
                "# schema: s_a,s_b,c_x,c_y,c_z,l_residual (string-curve samples; arclengths and chart/ambient point)\n",
            );
            let mut worst = 0.0f64;
            for smp in &sc.samples {
                worst = worst.max(smp.l_residual.abs());
                writeln!(
                    csv,
                    "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.3e}",
                    smp.s_a, smp.s_b, smp.c.x, smp.c.y, smp.c.z, smp.l_residual
                )
                .unwrap();
            }
            write_artifact(out, &csv)?;
            let s = Summary {
                quantity: "max_string_length_residual",
                value: worst,
                tolerance,
                pass: worst < tolerance,
            };
            emit_summary(&s);
            Ok(s.pass)
        }
        Command::PoritskyCheck { curve, p, samples, tolerance } => {
            let curve = parse_curve(&opts.require(curve.as_ref(), "curve")?)?;
            let ps = parse_f64_list(&opts.require(p.as_ref(), "p")?)?;
            let samples = opts.or_default(samples.as_ref(), "samples", 50usize)?;
            let tolerance = opts.or_default(tolerance.as_ref(), "tolerance", 1e-6f64)?;
            let report = strings::poritsky_check(&curve, &ps, samples, tolerance)?;
            let worst = report
                .entries
                .iter()
                .map(|e| e.max_deviation)
                .fold(0.0f64, f64::max);
            let s = Summary {
                quantity: "max_increment_deviation",
                value: worst,
                tolerance,
                pass: report.pass,
            };
            emit_summary(&s);
            Ok(s.pass)
        }
        Command::LazutkinMap { curve, s0, y0, steps, check_normal_form } => {
            let curve = parse_curve(&opts.require(curve.as_ref(), "curve")?)?;
            let s0 = opts.or_default(s0.as_ref(), "s0", 0.0f64)?;
            let y0 = opts.require(y0.as_ref(), "y0")?;
            let chart = LazutkinChart::for_curve(&curve);
            let map = WeaklyBilliardMap::billiard(curve)?;
            if *check_normal_form {
                let rep = billiard::normal_form_check(&map, &chart, s0, (y0, y0 * 1e3), 16)?;
                let err = (rep.slope - 0.5).abs();
                let s = Summary {
                    quantity: "x_step_exponent_error",
                    value: err,
                    tolerance: 0.01,
                    pass: err < 0.01 && (rep.coeff - 1.0).abs() < 0.02,
                };
                emit_summary(&s);
                return Ok(s.pass);
            }
            let steps = opts.or_default(steps.as_ref(), "steps", 100usize)?;
            let mut q = PhasePoint::from_sy(s0, y0)?;
            let mut csv = String::from(
                "# schema: j,s,y,chart_x,chart_y (billiard orbit; arclength, 1-cos(angle), chart coordinates)\n",
            );
            for j in 0..=steps {
                let (x, yc) = chart.to_chart(q);
                writeln!(csv, "{j},{:.12e},{:.12e},{:.12e},{:.12e}", q.s, q.y(), x, yc).unwrap();
                if j < steps {
                    q = map.forward(q)?;
                }
            }
            write_artifact(out, &csv)?;
            let s = Summary {
                quantity: "orbit_steps",
                value: steps as f64,
                tolerance: 0.0,
                pass: true,
            };
            emit_summary(&s);
            Ok(true)
        }
        Command::Plog { curve, s0, y0, delta, budget, tolerance } => {
            let curve = parse_curve(&opts.require(curve.as_ref(), "curve")?)?;
            let s0 = opts.or_default(s0.as_ref(), "s0", 0.3f64)?;
            let y0 = opts.require(y0.as_ref(), "y0")?;
            let delta = opts.or_default(delta.as_ref(), "delta", 0.4f64)?;
            let budget = opts.or_default(budget.as_ref(), "budget", 200_000usize)?;
            let tolerance = opts.or_default(tolerance.as_ref(), "tolerance", 0.1f64)?;
            let chart = LazutkinChart::for_curve(&curve);
            let map = WeaklyBilliardMap::billiard(curve)?;
            let y = chart.y_of_cap(s0, y0);
            let rec = billiard::orbit(&map, &chart, PhasePoint::from_sy(s0, y)?, delta, budget)?;
            let stats = billiard::plog_bounds_check(&rec);
            println!(
                "orbit: {} steps, alpha_hat = {:.6e}, beta_hat = {:.6e}",
                rec.m, stats.alpha_hat, stats.beta_hat
            );
            let s = Summary {
                quantity: "beta_hat",
                value: stats.beta_hat,
                tolerance,
                pass: stats.beta_hat < tolerance,
            };
            emit_summary(&s);
            Ok(s.pass)
        }
        Command::Outer { curve, p, check, tolerance } => {
            let curve = parse_curve(&opts.require(curve.as_ref(), "curve")?)?;
            let p = opts.require(p.as_ref(), "p")?;
            match opts
                .or_default(check.as_ref(), "check", "poritsky".to_string())?
                .as_str()
            {
                "poritsky" => {
                    let tolerance = opts.or_default(tolerance.as_ref(), "tolerance", 1e-5f64)?;
                    let report =
                        outer::area_poritsky_check(&curve, 0.5 * p, &[p], 40, tolerance)?;
                    let s = Summary {
                        quantity: "area_translation_deviation",
                        value: report.entries[0].max_deviation,
                        tolerance,
                        pass: report.pass,
                    };
                    emit_summary(&s);
                    Ok(s.pass)
                }
                "homothety" => {
                    let tolerance = opts.or_default(tolerance.as_ref(), "tolerance", 1e-6f64)?;
                    let value = homothety_residual(&curve, p)?;
                    let s = Summary {
                        quantity: "envelope_homothety_residual",
                        value,
                        tolerance,
                        pass: value < tolerance,
                    };
                    emit_summary(&s);
                    Ok(s.pass)
                }
                other => Err(Error::invalid(format!(
                    "unknown check {other:?} (expected poritsky | homothety)"
                ))),
            }
        }
        Command::Ceva { surface, triangle, feet, tolerance } => {
            let surf = parse_surface_kind(&opts.require(surface.as_ref(), "surface")?)?;
            let tri = parse_point_list(&opts.require(triangle.as_ref(), "triangle")?, 3)?;
            let feet = parse_point_list(&opts.require(feet.as_ref(), "feet")?, 3)?;
            let tolerance = opts.or_default(tolerance.as_ref(), "tolerance", 1e-9f64)?;
            let tri = incidence::GeodesicTriangle::new(&surf, tri[0], tri[1], tri[2])?;
            let product = incidence::ceva_product(&surf, &tri, feet[0], feet[1], feet[2])?;
            let s = Summary {
                quantity: "ceva_product_deviation",
                value: (product - 1.0).abs(),
                tolerance,
                pass: (product - 1.0).abs() < tolerance,
            };
            emit_summary(&s);
            Ok(s.pass)
        }
        Command::Incidence { curve, params, tolerance } => {
            let curve = parse_curve(&opts.require(curve.as_ref(), "curve")?)?;
            let ps = parse_f64_list(&opts.require(params.as_ref(), "params")?)?;
            if ps.len() != 3 {
                return Err(Error::invalid("incidence wants exactly three parameters a,b,c"));
            }
            let tolerance = opts.or_default(tolerance.as_ref(), "tolerance", 1e-8f64)?;
            let value = incidence::tangent_incidence_check(&curve, ps[0], ps[1], ps[2])?;
            let s = Summary {
                quantity: "concurrency_residual",
                value,
                tolerance,
                pass: value < tolerance,
            };
            emit_summary(&s);
            Ok(s.pass)
        }
        Command::JetOde { jet, range, step, metric } => {
            let vals = parse_f64_list(&opts.require(jet.as_ref(), "jet")?)?;
            if vals.len() != 6 {
                return Err(Error::invalid("jet wants 6 numbers x,b0,b1,b2,b3,b4"));
            }
            let metric = opts.or_default(metric.as_ref(), "metric", "euclidean".to_string())?;
            if metric != "euclidean" {
                return Err(Error::Unsupported(
                    "only the euclidean metric is wired to the CLI jet solver".into(),
                ));
            }
            let range = opts.require(range.as_ref(), "range")?;
            let step = opts.or_default(step.as_ref(), "step", 1e-3f64)?;
            let jet = Jet4::new(vals[0], [vals[1], vals[2], vals[3], vals[4], vals[5]])?;
            let pts = jet::integrate_jet_ode(&Surface::euclidean(), &jet, range, step)?;
            let mut csv =
                String::from("# schema: x,y (reconstructed graph curve through the 4-jet)\n");
            // Deviation from the osculating circle of the jet, as a summary
            // of how far the reconstruction departs from the trivial guess.
            let kappa = jet.kappa();
            let mut dev = 0.0f64;
            for &(x, y) in &pts {
                writeln!(csv, "{x:.12e},{y:.12e}").unwrap();
                let dx = x - jet.x;
                let circ = jet.b[0] + jet.b[1] * dx
                    + (1.0 / kappa
                        - ((1.0 / kappa) * (1.0 / kappa) - dx * dx).max(0.0).sqrt());
                dev = dev.max((y - circ).abs());
            }
            write_artifact(out, &csv)?;
            let s = Summary {
                quantity: "deviation_from_osculating_circle",
                value: dev,
                tolerance: 0.0,
                pass: true,
            };
            emit_summary(&s);
            Ok(true)
        }
        Command::VerifyAll {} => {
            let results = crate::acceptance::run_all();
            for c in &results {
                println!(
                    "[{}] {:2}. {} — {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.detail
                );
            }
            if let Some(path) = out {
                fs::write(path, serde_json::to_string_pretty(&results).expect("serializes"))?;
            }
            Ok(results.iter().all(|c| c.pass))
        }
    }
}

/// Max deviation of the area-construction envelope from a central scaling
/// of the curve (polar-radius ratio about the interior centroid).
fn homothety_residual(curve: &ConvexCurve, p: f64) -> Result<f64> {
    let center = curve.interior_point()?;
    let ac = outer::area_construction(curve, p, 32)?;
    let total = curve.total_length();
    // Polar angle of a curve point about the center, unwrapped per query.
    let ang = |s: f64| -> f64 {
        let q = curve.point_at(s) - center;
        q.y.atan2(q.x)
    };
    let mut ratios = Vec::new();
    for smp in &ac.samples {
        let e = smp.envelope - center;
        let target = e.y.atan2(e.x);
        // Bracket the curve parameter whose polar angle matches the envelope's.
        let n = 512;
        let diff = |s: f64| {
            let mut d = ang(s) - target;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            d
        };
        let mut found = None;
        for i in 0..n {
            let a = total * i as f64 / n as f64;
            let b = total * (i + 1) as f64 / n as f64;
            let (da, db) = (diff(a), diff(b));
            if da == 0.0 {
                found = Some(a);
                break;
            }
            if da * db < 0.0 && (da - db).abs() < 1.0 {
                let mut f = |s: f64| diff(s);
                found = Some(crate::numerics::brent(&mut f, a, b, 1e-13, 100)?);
                break;
            }
        }
        let s_star = found
            .ok_or_else(|| Error::construction("no curve point at the envelope azimuth"))?;
        let r_curve = (curve.point_at(s_star) - center).norm_xy();
        ratios.push(e.norm_xy() / r_curve);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(ratios
        .iter()
        .map(|r| (r - mean).abs())
        .fold(0.0f64, f64::max))
}
