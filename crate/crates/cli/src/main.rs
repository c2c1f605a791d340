//! Command-line front end: every computation is a subcommand with
//! reproducible, file-based outputs (CSV / JSON / self-contained SVG).
//!
//! Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 precision
//! underflow.

mod config;
mod svg;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::FileConfig;
use expsplit::cflow::{
    disc_projection, infinity_equilibria, locate_pj, trace_flow, Chart, EquilibriumKind,
    FlowConfig, FlowKind, StopRule,
};
use expsplit::series::{gevrey_diagnostic, phi_coefficients};
use expsplit::split::{sweep_and_fit, MeasureStatus, SplitError, SweepOpts};
use expsplit::{Cx, PolyQ, Precision, Rdd, Rqd, Scalar};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const EXIT_INPUT: i32 = 2;
const EXIT_NUMERIC: i32 = 3;
const EXIT_UNDERFLOW: i32 = 4;

#[derive(Parser)]
#[command(
    name = "expsplit",
    version,
    about = "Blowup times, inner-series diagnostics and exponentially small splitting \
             for eps^(2(k-1)) f''' + f' = Q(f)"
)]
struct Cli {
    /// Plain key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for generated files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct PolyArg {
    /// Polynomial text, e.g. "-f^3 + 1/2 f + 1" (leading coefficient -1).
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find and validate the simple real roots of Q.
    ///
    /// Writes roots.csv with columns (j, root, dQ).
    Roots {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        precision: Option<Precision>,
    },
    /// Blowup times T^j: residue formula and direct integration side by side.
    ///
    /// Writes tj.csv with columns
    /// (j, T_formula, T_integrated, rel_diff, pj, bisection_width, tail_terms).
    Tj {
        #[command(flatten)]
        poly: PolyArg,
        /// Connection index (default: all j in 1..kappa).
        #[arg(long)]
        j: Option<usize>,
        /// Bisection tolerance for p^j.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        precision: Option<Precision>,
    },
    /// Phase portraits of x' = Q(x) and x' = iQ(x) on the Poincare disc.
    ///
    /// Writes portrait.csv with columns (flow, s, re, im, chart) and,
    /// with --svg, portrait_real.svg / portrait_imag.svg.
    Portrait {
        #[command(flatten)]
        poly: PolyArg,
        /// real | imag | both
        #[arg(long)]
        flow: Option<String>,
        #[arg(long)]
        svg: bool,
    },
    /// Inner-series coefficients and the Gevrey growth diagnostic.
    ///
    /// Writes series.csv with columns
    /// (alpha, y_num, y_den, z_num, z_den, log_abs_phi_pow).
    Series {
        #[arg(long)]
        kappa: Option<usize>,
        /// Truncation order (default 80).
        #[arg(long)]
        order: Option<usize>,
        /// Least-squares window "a:b" (default 40:80).
        #[arg(long, value_name = "A:B")]
        fit_range: Option<String>,
        #[arg(long)]
        svg: bool,
    },
    /// Measure the splitting over an eps grid and fit the law.
    ///
    /// Writes split.csv with columns
    /// (kappa, j, eps, pj, dy, dz, abs, ln_abs, seed_delta, tol, status).
    Split {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        j: Option<usize>,
        /// Grid "a:b:n" (linear) or "a:b:n:log".
        #[arg(long, value_name = "A:B:N[:log]")]
        eps_grid: Option<String>,
        #[arg(long)]
        precision: Option<Precision>,
        /// Integrator tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed_delta: Option<f64>,
        /// Worker threads for the sweep.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit the splitting law to a stored split.csv.
    ///
    /// Writes fit.json (fitted_T, reference_T, prefactor_exponent,
    /// per-point residuals).
    Fit {
        /// Input CSV produced by `split`.
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        svg: bool,
    },
    /// Run the randomized property suites.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        /// Smaller case counts.
        #[arg(long)]
        quick: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            classify_exit(&e)
        }
    };
    std::process::exit(code);
}

fn classify_exit(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(se) = cause.downcast_ref::<SplitError>() {
            return match se {
                SplitError::Underflow { .. } => EXIT_UNDERFLOW,
                _ => EXIT_NUMERIC,
            };
        }
        if cause.downcast_ref::<expsplit::PolyError>().is_some() {
            return EXIT_INPUT;
        }
        if cause.downcast_ref::<expsplit::cflow::FlowError>().is_some() {
            return EXIT_NUMERIC;
        }
        if cause.downcast_ref::<InputError>().is_some() {
            return EXIT_INPUT;
        }
    }
    EXIT_NUMERIC
}

#[derive(Debug)]
struct InputError(String);
impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl std::error::Error for InputError {}

fn input_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

fn run(cli: Cli) -> Result<()> {
    let fc = FileConfig::load(cli.config.as_deref())?;
    let out_dir = match cli.out {
        Some(d) => d,
        None => fc
            .get("out")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    match cli.cmd {
        Cmd::Roots { poly, precision } => {
            let q = parse_poly(&fc, &poly)?;
            let precision = fc.resolve(precision, "precision", Precision::Qd)?;
            cmd_roots(&q, precision, &out_dir)
        }
        Cmd::Tj {
            poly,
            j,
            tol,
            precision,
        } => {
            let q = parse_poly(&fc, &poly)?;
            let j = fc.resolve_opt(j, "j")?;
            let tol = fc.resolve(tol, "tol", 1e-13)?;
            let precision = fc.resolve(precision, "precision", Precision::Dd)?;
            cmd_tj(&q, j, tol, precision, &out_dir)
        }
        Cmd::Portrait { poly, flow, svg } => {
            let q = parse_poly(&fc, &poly)?;
            let flow = fc.resolve(flow, "flow", "both".to_string())?;
            cmd_portrait(&q, &flow, svg || fc.get("svg") == Some("true"), &out_dir)
        }
        Cmd::Series {
            kappa,
            order,
            fit_range,
            svg,
        } => {
            let kappa = fc
                .resolve_opt(kappa, "kappa")?
                .ok_or_else(|| input_err("--kappa is required"))?;
            let order = fc.resolve(order, "order", 80usize)?;
            let range = fc.resolve(fit_range, "fit-range", "40:80".to_string())?;
            cmd_series(
                kappa,
                order,
                &range,
                svg || fc.get("svg") == Some("true"),
                &out_dir,
            )
        }
        Cmd::Split {
            poly,
            j,
            eps_grid,
            precision,
            tol,
            seed_delta,
            workers,
        } => {
            let q = parse_poly(&fc, &poly)?;
            let j = fc.resolve(j, "j", 1usize)?;
            let grid = fc.resolve(eps_grid, "eps-grid", "0.06:0.12:6:log".to_string())?;
            let precision = fc.resolve(precision, "precision", Precision::Qd)?;
            let tol = fc.resolve_opt(tol, "tol")?;
            let seed_delta = fc.resolve(seed_delta, "seed-delta", 1e-8)?;
            let workers = fc.resolve_opt(workers, "workers")?;
            cmd_split(&q, j, &grid, precision, tol, seed_delta, workers, &out_dir)
        }
        Cmd::Fit {
            input,
            poly,
            j,
            svg,
        } => {
            let q = parse_poly(&fc, &poly)?;
            let j = fc.resolve(j, "j", 1usize)?;
            let input = match input {
                Some(p) => p,
                None => fc
                    .get("in")
                    .map(PathBuf::from)
                    .unwrap_or_else(|| out_dir.join("split.csv")),
            };
            cmd_fit(
                &q,
                j,
                &input,
                svg || fc.get("svg") == Some("true"),
                &out_dir,
            )
        }
        Cmd::Selftest { seed, quick } => {
            let seed = fc.resolve(seed, "seed", 20260809u64)?;
            cmd_selftest(seed, quick || fc.get("quick") == Some("true"))
        }
    }
}

fn parse_poly(fc: &FileConfig, arg: &PolyArg) -> Result<PolyQ> {
    let text = match (&arg.poly, fc.get("poly")) {
        (Some(t), _) => t.clone(),
        (None, Some(t)) => t.to_string(),
        (None, None) => return Err(input_err("--poly is required")),
    };
    Ok(PolyQ::parse(&text)?)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn dec<T: Scalar>(v: T) -> String {
    v.to_decimal(T::DIGITS + 3)
}

fn f64s(v: f64) -> String {
    format!("{v:.17e}")
}

// ---------------------------------------------------------------- roots --

fn cmd_roots(q: &PolyQ, precision: Precision, out: &Path) -> Result<()> {
    match precision {
        Precision::Dd => roots_impl::<Rdd>(q, out),
        Precision::Qd => roots_impl::<Rqd>(q, out),
    }
}

fn roots_impl<T: Scalar>(q: &PolyQ, out: &Path) -> Result<()> {
    let rs = q.real_roots::<T>();
    if !rs.valid {
        let why = rs
            .failure
            .map(|f| f.to_string())
            .unwrap_or_else(|| "unknown".into());
        return Err(anyhow::Error::new(expsplit::PolyError::InvalidRoots(why)));
    }
    let mut csv = String::from("j,root,dQ\n");
    println!("Q = {q}   (kappa = {}, precision {})", q.kappa(), T::NAME);
    println!("{:>3} {:>40} {:>40}", "j", "q^j", "Q'(q^j)");
    for j in 1..=rs.kappa() {
        let _ = writeln!(csv, "{j},{},{}", dec(rs.root(j)), dec(rs.dq_at(j)));
        println!(
            "{j:>3} {:>40} {:>40}",
            trim40(&dec(rs.root(j))),
            trim40(&dec(rs.dq_at(j)))
        );
    }
    write_out(out, "roots.csv", &csv)?;
    Ok(())
}

fn trim40(s: &str) -> String {
    if s.len() > 40 {
        s[..40].to_string()
    } else {
        s.to_string()
    }
}

// ------------------------------------------------------------------- tj --

fn cmd_tj(q: &PolyQ, j: Option<usize>, tol: f64, precision: Precision, out: &Path) -> Result<()> {
    match precision {
        Precision::Dd => tj_impl::<Rdd>(q, j, tol, out),
        Precision::Qd => tj_impl::<Rqd>(q, j, tol, out),
    }
}

fn tj_impl<T: Scalar>(q: &PolyQ, j: Option<usize>, tol: f64, out: &Path) -> Result<()> {
    let rs = q.real_roots::<T>();
    if !rs.valid {
        let why = rs
            .failure
            .map(|f| f.to_string())
            .unwrap_or_else(|| "unknown".into());
        return Err(anyhow::Error::new(expsplit::PolyError::InvalidRoots(why)));
    }
    let cfg = FlowConfig::from_roots(&rs.roots, T::from_f64((tol * 1e-6).max(1e-26)));
    let js: Vec<usize> = match j {
        Some(one) => vec![one],
        None => (1..q.kappa()).collect(),
    };
    let mut csv = String::from("j,T_formula,T_integrated,rel_diff,pj,bisection_width,tail_terms\n");
    println!("Q = {q}");
    println!(
        "{:>3} {:>24} {:>24} {:>11} {:>24}",
        "j", "T_formula", "T_integrated", "rel_diff", "p^j"
    );
    for jj in js {
        let t_formula = rs.blowup_time_formula(jj)?;
        let sep = locate_pj(q, &rs, jj, T::from_f64(tol), &cfg)?;
        let rel = ((sep.tj_integrated - t_formula) / t_formula).abs().to_f64();
        let _ = writeln!(
            csv,
            "{jj},{},{},{},{},{},{}",
            dec(t_formula),
            dec(sep.tj_integrated),
            f64s(rel),
            dec(sep.pj),
            f64s(sep.bisection_width.to_f64()),
            sep.tail_terms_used
        );
        println!(
            "{jj:>3} {:>24.20} {:>24.20} {:>11.2e} {:>24.20}",
            t_formula.to_f64(),
            sep.tj_integrated.to_f64(),
            rel,
            sep.pj.to_f64()
        );
    }
    write_out(out, "tj.csv", &csv)?;
    Ok(())
}

// ------------------------------------------------------------- portrait --

fn cmd_portrait(q: &PolyQ, flow: &str, want_svg: bool, out: &Path) -> Result<()> {
    type T = Rdd;
    let rs = q.real_roots::<T>();
    if !rs.valid {
        let why = rs
            .failure
            .map(|f| f.to_string())
            .unwrap_or_else(|| "unknown".into());
        return Err(anyhow::Error::new(expsplit::PolyError::InvalidRoots(why)));
    }
    let cfg = FlowConfig::from_roots(&rs.roots, T::from_f64(1e-16));
    let kappa = q.kappa();
    let flows: Vec<FlowKind> = match flow {
        "real" => vec![FlowKind::Real],
        "imag" | "imaginary" => vec![FlowKind::Imaginary],
        "both" => vec![FlowKind::Real, FlowKind::Imaginary],
        other => return Err(input_err(format!("unknown flow {other:?}"))),
    };
    let mut csv = String::from("flow,s,re,im,chart\n");
    for fk in flows.clone() {
        let name = match fk {
            FlowKind::Real => "real",
            FlowKind::Imaginary => "imag",
        };
        let mut curves: Vec<svg::Series> = Vec::new();
        let mut add = |path: &expsplit::cflow::PhasePath<T>, csv: &mut String, idx: usize| {
            let mut pts = Vec::new();
            for s in &path.samples {
                let (re, im) = (s.x.re.to_f64(), s.x.im.to_f64());
                let _ = writeln!(
                    csv,
                    "{name},{},{},{},{}",
                    f64s(s.s.to_f64()),
                    f64s(re),
                    f64s(im),
                    match s.chart {
                        Chart::Interior => "interior",
                        Chart::W1Theta => "w1theta",
                    }
                );
                pts.push(disc_projection(re, im));
            }
            curves.push(svg::Series {
                points: pts,
                color: svg::color(idx),
            });
        };
        // Separatrices seeded near the equator saddles.
        let eqs = infinity_equilibria::<T>(kappa);
        let kind = match fk {
            FlowKind::Real => EquilibriumKind::RealFlowE,
            FlowKind::Imaginary => EquilibriumKind::ImagFlowH,
        };
        let mut stop = StopRule::none();
        stop.s_cap = Some(T::from_f64(80.0));
        stop.arc_cap = Some(6.0);
        stop.max_steps = 60_000;
        for (i, e) in eqs.iter().filter(|e| e.kind == kind).enumerate() {
            let r0 = cfg.r_esc.to_f64() * 0.98;
            let th = e.theta.to_f64();
            let x0 = Cx::<T>::from_f64s(r0 * th.cos(), r0 * th.sin());
            // The interior branch is unstable for odd l of the real flow and
            // for even l of the imaginary flow.
            let dir = match (fk, e.l % 2) {
                (FlowKind::Real, 1) | (FlowKind::Imaginary, 0) => 1,
                _ => -1,
            };
            if let Ok(p) = trace_flow(q, &cfg, x0, fk, dir, &stop, true) {
                add(&p, &mut csv, i);
            }
        }
        // Texture orbits.
        match fk {
            FlowKind::Real => {
                let r = cfg.r_switch.to_f64() * 0.45;
                for i in 0..8 {
                    let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / 8.0;
                    let x0 = Cx::<T>::from_f64s(r * th.cos(), r * th.sin());
                    let mut st = stop.clone();
                    st.arc_cap = Some(2.5);
                    for dir in [1, -1] {
                        if let Ok(p) = trace_flow(q, &cfg, x0, fk, dir, &st, true) {
                            add(&p, &mut csv, 6);
                        }
                    }
                }
            }
            FlowKind::Imaginary => {
                // Periodic orbits around the centers.
                for j in 1..=kappa - 1 {
                    let a = rs.root(j + 1).to_f64();
                    let b = rs.root(j).to_f64();
                    for frac in [0.25, 0.5, 0.75] {
                        let x0 = Cx::<T>::from_f64s(a + (b - a) * frac, 0.0);
                        let mut st = stop.clone();
                        st.arc_cap = Some(2.4);
                        if let Ok(p) = trace_flow(q, &cfg, x0, fk, 1, &st, true) {
                            add(&p, &mut csv, 6);
                        }
                    }
                }
            }
        }
        if want_svg {
            let marks: Vec<(f64, f64)> = (1..=kappa)
                .map(|j| disc_projection(rs.root(j).to_f64(), 0.0))
                .collect();
            let title = format!(
                "{} flow of Q = {q}",
                if fk == FlowKind::Real {
                    "real-time"
                } else {
                    "imaginary-time"
                }
            );
            let doc = svg::disc_portrait(&title, &curves, &marks);
            write_out(out, &format!("portrait_{name}.svg"), &doc)?;
        }
    }
    write_out(out, "portrait.csv", &csv)?;
    println!("portrait of Q = {q} done ({} flows)", flows.len());
    Ok(())
}

// --------------------------------------------------------------- series --

fn cmd_series(kappa: usize, order: usize, range: &str, want_svg: bool, out: &Path) -> Result<()> {
    if kappa < 2 {
        return Err(input_err("kappa must be >= 2"));
    }
    let (a, b) = range
        .split_once(':')
        .ok_or_else(|| input_err("fit-range must be A:B"))?;
    let a: usize = a.parse().map_err(|_| input_err("bad fit-range"))?;
    let b: usize = b.parse().map_err(|_| input_err("bad fit-range"))?;
    if b > order || a >= b {
        return Err(input_err(format!(
            "fit-range {a}:{b} must satisfy a < b <= order ({order})"
        )));
    }
    let sp = phi_coefficients(kappa, order);
    let rep = gevrey_diagnostic(&sp, a, b).map_err(|e| anyhow!(e.to_string()))?;
    let mut csv = String::from("alpha,y_num,y_den,z_num,z_den,log_abs_phi_pow\n");
    use expsplit::series::ln_abs_rational;
    for alpha in 0..=order {
        let nsq = sp.phi_norm_sqr(alpha);
        let lg = if alpha == 0 {
            f64::NAN
        } else {
            0.5 * ln_abs_rational(&nsq) / alpha as f64
        };
        let _ = writeln!(
            csv,
            "{alpha},{},{},{},{},{}",
            sp.y[alpha].numer(),
            sp.y[alpha].denom(),
            sp.z[alpha].numer(),
            sp.z[alpha].denom(),
            if lg.is_finite() {
                f64s(lg)
            } else {
                "nan".into()
            }
        );
    }
    write_out(out, "series.csv", &csv)?;
    println!(
        "kappa = {kappa}, order = {order}: Gevrey slope over [{a}, {b}] = {:.4} \
         (intercept {:.4}, r^2 = {:.6}, heuristic evidence of divergence)",
        rep.slope, rep.intercept, rep.r_squared
    );
    if want_svg {
        let pts: Vec<(f64, f64)> = rep
            .values
            .iter()
            .map(|(al, v)| ((*al as f64).ln(), *v))
            .collect();
        let line: Vec<(f64, f64)> = pts
            .iter()
            .map(|(x, _)| (*x, rep.intercept + rep.slope * x))
            .collect();
        let doc = svg::chart(
            &format!("log|phi_a|^(1/a) vs log a, kappa = {kappa}"),
            "log alpha",
            "log |phi_alpha|^(1/alpha)",
            &[
                svg::Series {
                    points: pts,
                    color: svg::color(0),
                },
                svg::Series {
                    points: line,
                    color: svg::color(1),
                },
            ],
        );
        write_out(out, "series.svg", &doc)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- split --

#[allow(clippy::too_many_arguments)]
fn cmd_split(
    q: &PolyQ,
    j: usize,
    grid: &str,
    precision: Precision,
    tol: Option<f64>,
    seed_delta: f64,
    workers: Option<usize>,
    out: &Path,
) -> Result<()> {
    match precision {
        Precision::Dd => split_impl::<Rdd>(q, j, grid, tol, seed_delta, workers, out),
        Precision::Qd => split_impl::<Rqd>(q, j, grid, tol, seed_delta, workers, out),
    }
}

fn parse_grid<T: Scalar>(grid: &str) -> Result<Vec<T>> {
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() < 3 {
        return Err(input_err("eps-grid must be a:b:n or a:b:n:log"));
    }
    let a: f64 = parts[0].parse().map_err(|_| input_err("bad grid start"))?;
    let b: f64 = parts[1].parse().map_err(|_| input_err("bad grid end"))?;
    let mut nstr = parts[2];
    let mut log = parts.len() > 3 && parts[3] == "log";
    if let Some(stripped) = nstr.strip_suffix("log") {
        nstr = stripped;
        log = true;
    }
    let n: usize = nstr.parse().map_err(|_| input_err("bad grid count"))?;
    if !(a > 0.0 && b > a && n >= 2) {
        return Err(input_err("grid needs 0 < a < b and n >= 2"));
    }
    Ok((0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            let e = if log {
                (a.ln() + (b.ln() - a.ln()) * f).exp()
            } else {
                a + (b - a) * f
            };
            T::from_f64(e)
        })
        .collect())
}

fn split_impl<T: Scalar>(
    q: &PolyQ,
    j: usize,
    grid: &str,
    tol: Option<f64>,
    seed_delta: f64,
    workers: Option<usize>,
    out: &Path,
) -> Result<()> {
    let rs = q.real_roots::<T>();
    if !rs.valid {
        let why = rs
            .failure
            .map(|f| f.to_string())
            .unwrap_or_else(|| "unknown".into());
        return Err(anyhow::Error::new(expsplit::PolyError::InvalidRoots(why)));
    }
    let eps_grid: Vec<T> = parse_grid(grid)?;

    // p^j from the flow side (double-double suffices for the section point).
    let rs_d = q.real_roots::<Rdd>();
    let cfg = FlowConfig::from_roots(&rs_d.roots, Rdd::from_f64(1e-22));
    let sep = locate_pj(q, &rs_d, j, Rdd::from_f64(1e-14), &cfg)?;
    let pj = T::from_f64(sep.pj.to_f64());

    // Headroom: the law's exponential must stay above the qd floor.
    let t_ref = rs.blowup_time_formula(j)?.to_f64();
    let kappa = q.kappa();
    let worst = eps_grid
        .iter()
        .map(|e| -t_ref * e.to_f64().powi(1 - kappa as i32) / std::f64::consts::LN_10)
        .fold(f64::INFINITY, f64::min);
    println!(
        "splitting scale bound: exp(-T^j eps^(1-k)) >= 10^{:.1} on this grid \
         (qd headroom floor 10^-45)",
        worst
    );

    let mut opts = SweepOpts::<T>::default();
    opts.measure.seed_delta = T::from_f64(seed_delta);
    if let Some(t) = tol {
        opts.measure.tol = T::from_f64(t);
    }
    opts.workers = workers;
    let (report, records) = sweep_and_fit(q, &rs, pj, j, &eps_grid, &opts)?;

    let mut csv = String::from("kappa,j,eps,pj,dy,dz,abs,ln_abs,seed_delta,tol,status\n");
    for r in &records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.kappa,
            r.j,
            dec(r.eps),
            dec(r.pj),
            dec(r.dy),
            dec(r.dz),
            dec(r.abs()),
            f64s(r.abs().ln().to_f64()),
            dec(r.seed_delta),
            dec(r.integrator_tol),
            match r.status {
                MeasureStatus::Ok => "ok",
                MeasureStatus::Underflow => "underflow",
            }
        );
    }
    write_out(out, "split.csv", &csv)?;
    println!(
        "{:>12} {:>14} {:>14} {:>12} {:>10}",
        "eps", "|d|", "ln|d|", "richardson", "status"
    );
    for r in &records {
        println!(
            "{:>12.6} {:>14.6e} {:>14.8} {:>12.2e} {:>10}",
            r.eps.to_f64(),
            r.abs().to_f64(),
            r.abs().ln().to_f64(),
            r.richardson_rel.unwrap_or(f64::NAN),
            match r.status {
                MeasureStatus::Ok => "ok",
                MeasureStatus::Underflow => "underflow",
            }
        );
    }
    println!(
        "fitted T = {:.10} (reference {:.10}, rel diff {:.2e}); prefactor exponent = {:.4} \
         (theory {:.1})",
        report.fitted_t,
        report.reference_t,
        (report.fitted_t - report.reference_t).abs() / report.reference_t,
        report.prefactor_exponent,
        -1.5 * kappa as f64
    );
    Ok(())
}

// ------------------------------------------------------------------ fit --

fn cmd_fit(q: &PolyQ, j: usize, input: &Path, want_svg: bool, out: &Path) -> Result<()> {
    let text =
        std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 11 {
            return Err(input_err(format!("{}: short row {i}", input.display())));
        }
        if cols[1].parse::<usize>().ok() != Some(j) {
            continue;
        }
        if cols[10].trim() != "ok" {
            return Err(anyhow::Error::new(SplitError::Underflow {
                measured: 0.0,
                floor: 0.0,
            }))
            .context(format!("row {i} is marked underflow"));
        }
        let eps: f64 = parse_dec_f64(cols[2])?;
        let ln_abs: f64 = cols[7]
            .trim()
            .parse()
            .map_err(|_| input_err(format!("bad ln_abs in row {i}")))?;
        pts.push((eps, ln_abs));
    }
    if pts.is_empty() {
        return Err(input_err(format!(
            "no rows for j = {j} in {}",
            input.display()
        )));
    }
    let rs = q.real_roots::<Rqd>();
    if !rs.valid {
        return Err(anyhow::Error::new(expsplit::PolyError::InvalidRoots(
            rs.failure.map(|f| f.to_string()).unwrap_or_default(),
        )));
    }
    let t_ref = rs.blowup_time_formula(j)?.to_f64();
    let report = expsplit::split::fit_points_public(q.kappa(), j, &pts, t_ref)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_out(out, "fit.json", &json)?;
    println!(
        "fitted T = {:.10}  reference T = {:.10}  rel diff = {:.3e}",
        report.fitted_t,
        report.reference_t,
        (report.fitted_t - report.reference_t).abs() / report.reference_t
    );
    println!(
        "prefactor exponent = {:.4} (theory {:.1}); intercept ln C = {:.4}",
        report.prefactor_exponent,
        -1.5 * q.kappa() as f64,
        report.intercept_ln_c
    );
    if want_svg {
        let pts_u: Vec<(f64, f64)> = report.points.iter().map(|p| (p.u, p.ln_abs)).collect();
        let line: Vec<(f64, f64)> = report
            .points
            .iter()
            .map(|p| {
                (
                    p.u,
                    report.intercept_ln_c + report.prefactor_exponent * p.eps.ln()
                        - report.fitted_t * p.u,
                )
            })
            .collect();
        let doc = svg::chart(
            &format!("splitting law fit, j = {j}, Q = {q}"),
            "eps^(1-kappa)",
            "ln |dy + i dz|",
            &[
                svg::Series {
                    points: pts_u,
                    color: svg::color(0),
                },
                svg::Series {
                    points: line,
                    color: svg::color(1),
                },
            ],
        );
        write_out(out, "fit.svg", &doc)?;
    }
    Ok(())
}

fn parse_dec_f64(s: &str) -> Result<f64> {
    let r = expsplit::hiprec::parse_decimal_rational(s.trim())
        .map_err(|e| input_err(format!("bad decimal {s:?}: {e}")))?;
    Ok(expsplit::hiprec::rational_to_f64_nearest(&r))
}

// ------------------------------------------------------------- selftest --

fn cmd_selftest(seed: u64, quick: bool) -> Result<()> {
    println!(
        "selftest seed = {seed}{}",
        if quick { " (quick)" } else { "" }
    );
    let results = expsplit::selftest::run_all(seed, quick);
    let mut ok = true;
    for r in &results {
        if r.passed() {
            println!(
                "PASS {:<22} ({} cases, {} ms)",
                r.name, r.cases, r.elapsed_ms
            );
        } else {
            ok = false;
            println!(
                "FAIL {:<22} ({} cases, {} failures, {} ms)",
                r.name,
                r.cases,
                r.failures.len(),
                r.elapsed_ms
            );
            for f in r.failures.iter().take(5) {
                println!("     {f}");
            }
        }
    }
    if ok {
        Ok(())
    } else {
        Err(anyhow!("selftest failures"))
    }
}
