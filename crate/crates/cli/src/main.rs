//! `zonalval` command-line front end.
//!
//! Floats are printed with 17 significant digits. Exit codes: 0 ok, 2 validation, 3 numerical,
//! 4 capability.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use zonalval::functional::{self, ZetaDensity};
use zonalval::io::{self, fmt17, Table};
use zonalval::measures::{self, McConfig};
use zonalval::reconstruct;
use zonalval::special::canonical_exponent;
use zonalval::transforms::{self, chebyshev_angles};
use zonalval::valuations::{self, ValuationHandle};
use zonalval::{Pt, Result, ZonalError};

#[derive(Parser, Debug)]
#[command(name = "zonalval", version, about = "Zonal translation-invariant valuations on convex bodies")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Ambient dimension.
    #[arg(long, global = true, default_value_t = 3)]
    n: usize,
    /// Degree of homogeneity.
    #[arg(long, global = true, default_value_t = 1)]
    j: usize,
    /// Principal-value tolerance for Monte Carlo evaluation.
    #[arg(long, global = true, default_value_t = 1e-3)]
    tol: f64,
    /// Seed for every Monte Carlo computation (required by them).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    samples: usize,
    /// Grid size (nodes or directions, depending on the command).
    #[arg(long, global = true, default_value_t = 64)]
    grid: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Φ_j(f)[K]: the principal value of ∫ f(v_n) dS_j(K, v) over |v_n| <= r as r -> 1.
    /// Closed forms for cones, disks, cylinders, balls and bodies of revolution; Monte Carlo otherwise.
    Eval {
        /// Density: power:β | poly:[c0,..] | const:c | linear:c | JSON | file; prefix a=<a>; to set the exponent.
        #[arg(long)]
        density: String,
        /// Body: cone:h | ball:r | disk:r | cylinder:r,L | frustum:r0,r1,L | cube | revolution:z0,r0,.. | JSON | file.
        #[arg(long)]
        body: String,
        /// Apply the Lefschetz operator (derivative of Φ_j(f)[K + tB] at t = 0).
        #[arg(long)]
        lefschetz: bool,
    },
    /// Φ_j(f) on the cones C_h, h = √(1-s²)/s, with s on the reconstruction grid; the second
    /// value integrates f against the closed-form pushforward of S_j(C_h).
    ConeTable {
        #[arg(long)]
        density: String,
    },
    /// The transform pair between densities in D^a and cone profiles.
    Transform {
        #[command(subcommand)]
        which: TransformCmd,
    },
    /// Density f with μ = Φ_j(f), from the values of μ on cones, truncated cones and cylinders;
    /// unique up to linear functions, returned centred.
    Reconstruct {
        /// Built-in valuation Φ_j(density).
        #[arg(long, conflicts_with = "table")]
        density: Option<String>,
        /// Valuation table CSV with rows (body JSON, value).
        #[arg(long)]
        table: Option<PathBuf>,
        /// Print the bodies the table must cover (valued by --density when given, NaN otherwise).
        #[arg(long)]
        emit_bodies: bool,
    },
    /// Monte Carlo local Steiner estimate of the zonal area measures S_0..S_{n-1} of a body.
    SteinerCheck {
        #[arg(long)]
        body: String,
    },
    /// Cap masses S_j(K)[{v_n > r}] and the ratio mass / (diam^j (1 - r²)^((n-j-1)/2)).
    CapBound {
        #[arg(long)]
        body: String,
        /// Comma-separated heights in [0, 1).
        #[arg(long, default_value = "0,0.5,0.9,0.99")]
        r: String,
    },
    /// The transform R^{n-j} and valuations on u_t(x) = max(0, |x| - t).
    Functional {
        #[command(subcommand)]
        which: FunctionalCmd,
    },
    /// h(y) = c0 + Σ_j Φ_j(f_j)[rotated K] + cn vol(K) on a grid of directions, with a subadditivity check.
    Minkowski {
        #[arg(long)]
        body: String,
        /// One density per degree 1..n-1, in order.
        #[arg(long, num_args = 1..)]
        density: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        c0: f64,
        #[arg(long, default_value_t = 0.0)]
        cn: f64,
    },
}

#[derive(Subcommand, Debug)]
enum TransformCmd {
    /// I_a(f) as CSV rows (s, u) including s = ±1.
    Ia {
        #[arg(long)]
        density: String,
    },
    /// J_a(u) from a profile CSV (s, u) with rows s = ±1; emits (s, f, g) on Chebyshev nodes.
    Ja {
        #[arg(long)]
        input: PathBuf,
        /// Exponent a; defaults to (n - j - 1) / 2.
        #[arg(long)]
        a: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum FunctionalCmd {
    /// R^{n-j}(ζ)[t] and ω_n binom(n, j) R^{n-j}(ζ)[t] on t_k = R k / (grid - 1).
    R {
        /// hat:R for (R - s)_+, or a CSV file with columns (t, zeta).
        #[arg(long)]
        zeta: String,
    },
    /// Inverse of R^{n-j} from a CSV (t, phi) on a uniform grid.
    Rinv {
        #[arg(long)]
        input: PathBuf,
    },
    /// ζ from samples (t, phi) with phi(t) = V*(u_t).
    Zeta {
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ZONALVAL_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            warn!("thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zonalval: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(c: &Common, json: &impl Serialize, table: Option<Table>) -> Result<()> {
    let text = match (c.format, table) {
        (Format::Csv, Some(t)) => t.to_csv()?,
        (Format::Csv, None) => return Err(ZonalError::Validation("this command has no CSV output".into())),
        (Format::Json, _) => io::to_json(json)? + "\n",
    };
    match &c.out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn mc(c: &Common) -> Result<McConfig> {
    let seed = c.seed.ok_or_else(|| ZonalError::Validation("Monte Carlo needs an explicit --seed".into()))?;
    Ok(McConfig::new(c.samples, seed))
}

fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let (n, j) = (c.n, c.j);
    if n < 2 || j == 0 || j >= n {
        return Err(ZonalError::Validation(format!("need n >= 2 and 1 <= j <= n-1, got n={n}, j={j}")));
    }
    match &cli.cmd {
        Cmd::Eval { density, body, lefschetz } => {
            let f = io::parse_density(density, n, j)?;
            let k = io::parse_body(body, n)?;
            let mu = ValuationHandle::builtin(n, j, f.clone())?;
            let report = if *lefschetz {
                let v = valuations::lefschetz(&mu, &k)?;
                json!({"value": v, "err": 0.0, "backend": "closed-form", "n": n, "j": j, "lefschetz": true})
            } else if let Some(v) = valuations::phi_exact(n, j, &f, &k)? {
                json!({"value": v, "err": 0.0, "backend": "closed-form", "n": n, "j": j})
            } else {
                let cfg = mc(c).map_err(|_| {
                    ZonalError::Validation("no closed form for this body; Monte Carlo evaluation needs --seed".into())
                })?;
                let pv = valuations::phi_general(n, j, &f, &k, c.tol, &cfg)?;
                if !pv.converged {
                    warn!("principal value did not settle below --tol {}; err {}", c.tol, fmt17(pv.err));
                }
                json!({"value": pv.value, "err": pv.err, "backend": "mc", "n": n, "j": j, "converged": pv.converged, "seed": pv.seed, "samples": pv.samples})
            };
            info!("eval {body}: {report}");
            let mut t = Table::new(&["value", "err"]);
            t.push(vec![report["value"].as_f64().unwrap_or(f64::NAN), report["err"].as_f64().unwrap_or(f64::NAN)]);
            emit(c, &report, Some(t))
        }
        Cmd::ConeTable { density } => {
            let f = io::parse_density(density, n, j)?;
            let mut t = Table::new(&["s", "h", "phi", "measure"]);
            for s in reconstruct::profile_grid(c.grid) {
                let h = Pt::from_s(s).apex_height();
                let v = valuations::phi_cone(n, j, &f, h)?;
                let m = measures::cone_measure(n, j, h)?.integrate(&f)?;
                t.push(vec![s, h, v, m]);
            }
            let rows: Vec<_> =
                t.rows.iter().map(|r| json!({"s": r[0], "h": r[1], "phi": r[2], "measure": r[3]})).collect();
            emit(c, &json!({"n": n, "j": j, "density": f, "rows": rows}), Some(t))
        }
        Cmd::Transform { which: TransformCmd::Ia { density } } => {
            let f = io::parse_density(density, n, j)?;
            let u = transforms::transform_i(&f)?;
            let t = io::profile_to_table(&u, &reconstruct::profile_grid(c.grid))?;
            emit(c, &json!({"a": f.a(), "s": t.column("s")?, "u": t.column("u")?}), Some(t))
        }
        Cmd::Transform { which: TransformCmd::Ja { input, a } } => {
            let u = io::profile_from_table(&Table::read(input)?)?;
            let a = a.unwrap_or_else(|| canonical_exponent(n, j));
            let f = transforms::transform_j(&u, a, &chebyshev_angles(c.grid))?;
            let t = density_table(&f)?;
            emit(c, &f, Some(t))
        }
        Cmd::Reconstruct { density, table, emit_bodies } => {
            let value_of = match density {
                Some(d) => Some(ValuationHandle::builtin(n, j, io::parse_density(d, n, j)?)?),
                None => None,
            };
            if *emit_bodies {
                let rows = reconstruct::required_bodies(n, j, c.grid)?
                    .into_iter()
                    .map(|b| {
                        let v = match &value_of {
                            Some(mu) => mu.eval(&b)?,
                            None => f64::NAN,
                        };
                        Ok((b, v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let text = io::write_valuation_table(&rows)?;
                return match &c.out {
                    Some(p) => Ok(fs::write(p, text)?),
                    None => {
                        print!("{text}");
                        Ok(())
                    }
                };
            }
            let mu = match (value_of, table) {
                (Some(mu), _) => mu,
                (None, Some(p)) => ValuationHandle::table(n, j, io::read_valuation_table(fs::File::open(p)?)?)?,
                (None, None) => return Err(ZonalError::Validation("reconstruct needs --density or --table".into())),
            };
            let r = reconstruct::reconstruct_density(&mu, c.grid)?;
            let t = density_table(&r.density)?;
            let report = json!({
                "n": n,
                "j": j,
                "grid": c.grid,
                "density": r.density,
                "endpoint_gap": r.profile.endpoint_gap(),
                "limit_gap": r.profile.limit_gap(),
                "profile": {"s": r.profile.s, "phi": r.profile.phi, "weighted": r.profile.weighted},
            });
            emit(c, &report, Some(t))
        }
        Cmd::SteinerCheck { body } => {
            let k = io::parse_body(body, n)?;
            let est = measures::mc_steiner_estimate(&k, &mc(c)?)?;
            let mut header = vec!["lo".to_string(), "hi".to_string()];
            for d in 0..n {
                header.push(format!("S{d}"));
                header.push(format!("se{d}"));
            }
            let mut t = Table { header, rows: vec![] };
            for b in 0..est.bands.len() - 1 {
                let mut row = vec![est.bands[b], est.bands[b + 1]];
                for d in 0..n {
                    row.push(est.s[d][b].mass);
                    row.push(est.s[d][b].stderr);
                }
                t.push(row);
            }
            emit(c, &est, Some(t))
        }
        Cmd::CapBound { body, r } => {
            let k = io::parse_body(body, n)?;
            let closed = measures::closed_form_measure(&k, j)?.is_some();
            let cfg = if closed { McConfig::new(c.samples, c.seed.unwrap_or(0)) } else { mc(c)? };
            let diam = k.diameter();
            let mut t = Table::new(&["r", "mass", "stderr", "ratio"]);
            for x in r.split(',') {
                let r: f64 = x.trim().parse().map_err(|_| ZonalError::Validation(format!("bad height '{x}'")))?;
                let m = measures::cap_mass(&k, j, r, &cfg)?;
                let ratio = m.mass / (diam.powi(j as i32) * (1.0 - r * r).powf((n - j - 1) as f64 / 2.0));
                t.push(vec![r, m.mass, m.stderr, ratio]);
            }
            let rows: Vec<_> =
                t.rows.iter().map(|v| json!({"r": v[0], "mass": v[1], "stderr": v[2], "ratio": v[3]})).collect();
            emit(c, &json!({"n": n, "j": j, "closed_form": closed, "rows": rows}), Some(t))
        }
        Cmd::Functional { which } => functional_cmd(c, which),
        Cmd::Minkowski { body, density, c0, cn } => {
            let k = io::parse_body(body, n)?;
            let fs =
                density.iter().enumerate().map(|(i, d)| io::parse_density(d, n, i + 1)).collect::<Result<Vec<_>>>()?;
            let grid = valuations::sphere_grid(n, c.grid);
            let cand = valuations::minkowski_support_candidate(*c0, *cn, &fs, &k, &grid, &mc(c)?)?;
            if cand.violations > 0 {
                warn!("{} subadditivity violations beyond the error bars", cand.violations);
            }
            let mut header: Vec<String> = (0..n).map(|i| format!("y{i}")).collect();
            header.push("h".into());
            header.push("err".into());
            let mut t = Table { header, rows: vec![] };
            for row in &cand.rows {
                let mut v = row.y.clone();
                v.push(row.h);
                v.push(row.err);
                t.push(v);
            }
            emit(c, &cand, Some(t))
        }
    }
}

/// `(s, f(s), g(s))` at the nodes of a sampled density.
fn density_table(f: &zonalval::dspace::ZonalDensity) -> Result<Table> {
    let mut t = Table::new(&["s", "f", "g"]);
    let nodes: Vec<f64> = match f.repr() {
        zonalval::dspace::Repr::Sampled(d) => d.nodes().to_vec(),
        _ => chebyshev_angles(64).into_iter().map(|a| Pt::from_node_angle(a).s).collect(),
    };
    for s in nodes {
        t.push(vec![s, f.eval_f(s)?, f.eval_weighted(s)?]);
    }
    Ok(t)
}

fn zeta_from(spec: &str) -> Result<ZetaDensity> {
    if let Some(r) = spec.strip_prefix("hat:") {
        let r: f64 = r.trim().parse().map_err(|_| ZonalError::Validation(format!("bad support radius '{r}'")))?;
        return ZetaDensity::hat(r);
    }
    let t = Table::read(std::path::Path::new(spec))?;
    ZetaDensity::sampled(t.column("t")?, t.column("zeta")?)
}

fn samples_from(p: &std::path::Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = Table::read(p)?;
    Ok((t.column("t")?, t.column("phi")?))
}

fn functional_cmd(c: &Common, which: &FunctionalCmd) -> Result<()> {
    let (n, j) = (c.n, c.j);
    match which {
        FunctionalCmd::R { zeta } => {
            let z = zeta_from(zeta)?;
            let m = c.grid.max(2);
            let ts: Vec<f64> = (0..m).map(|k| z.support() * k as f64 / (m - 1) as f64).collect();
            let r = functional::r_transform(&z, n, j, &ts)?;
            let mut t = Table::new(&["t", "r", "vstar"]);
            for (x, v) in ts.iter().zip(&r) {
                t.push(vec![*x, *v, functional::v_star_on_ut(&z, n, j, *x)?]);
            }
            emit(c, &json!({"n": n, "j": j, "t": ts, "r": r, "vstar": t.column("vstar")?}), Some(t))
        }
        FunctionalCmd::Rinv { input } | FunctionalCmd::Zeta { input } => {
            let (ts, phi) = samples_from(input)?;
            let out = if matches!(which, FunctionalCmd::Rinv { .. }) {
                functional::r_inverse(&ts, &phi, n, j)?
            } else {
                functional::reconstruct_zeta(&ts, &phi, n, j)?
            };
            for w in &out.warnings {
                warn!("{w}");
            }
            let (nodes, z) = out.zeta.nodes().expect("inverse densities are sampled");
            let mut t = Table::new(&["t", "zeta"]);
            for (x, v) in nodes.iter().zip(z) {
                t.push(vec![*x, *v]);
            }
            let report = json!({
                "n": n,
                "j": j,
                "t": nodes,
                "zeta": z,
                "residual": out.residual,
                "warnings": out.warnings,
            });
            info!("residual {}", fmt17(out.residual));
            emit(c, &report, Some(t))
        }
    }
}
