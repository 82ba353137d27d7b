use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use cgolab::experiments::{
    run_boundary_defect, run_cgo_decay, run_gauge_check, run_holonomy_study, run_stability_sweep,
    run_stationary_phase, ExperimentConfig, StudyReport,
};
use cgolab::forward::{dtn_matrix, DtnMatrix};
use cgolab::geometry::{read_snapshot, write_snapshot, Loop, OneForm, Snapshot};
use cgolab::holonomy::holonomy_defect;
use cgolab::metrics::cauchy_distance;
use cgolab::{Complex64, Error};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cgolab", version, about = "CGO and boundary-stability experiments on planar domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (defaults to `output` from the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fourier truncation N of DtN matrices (overrides `truncation`).
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// DtN matrix of the base potential, or of base + t·perturbation, plus X and q snapshots.
    Forward {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Cauchy-data distances between two DtN CSV files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        order: Option<usize>,
    },
    CgoDecay(Common),
    StationaryPhase(Common),
    BoundaryDefect(Common),
    StabilitySweep(Common),
    GaugeCheck(Common),
    /// With two one-form snapshots and a loop, the holonomy defect of X₁ - X₂;
    /// with no snapshots, the annulus study.
    Holonomy {
        #[command(flatten)]
        common: Common,
        x1: Option<PathBuf>,
        x2: Option<PathBuf>,
        /// Circle about the grid center.
        #[arg(long, conflicts_with = "polyline")]
        radius: Option<f64>,
        /// Closed polyline, one `x y` vertex per line.
        #[arg(long)]
        polyline: Option<PathBuf>,
    },
}

fn load_config(c: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(n) = c.order {
        cfg.truncation = n;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn out_dir(c: &Common, cfg: &ExperimentConfig) -> PathBuf {
    c.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output))
}

fn study(c: &Common, run: fn(&ExperimentConfig) -> cgolab::Result<StudyReport>) -> anyhow::Result<()> {
    let cfg = load_config(c)?;
    let rep = run(&cfg)?;
    let dir = out_dir(c, &cfg);
    rep.write(&cfg, &dir)?;
    println!("{}", serde_json::to_string_pretty(&rep.manifest(&cfg))?);
    for ch in &rep.checks {
        eprintln!("{} {}: {}", if ch.passed { "ok  " } else { "FAIL" }, ch.anchor, ch.detail);
    }
    rep.ensure()?;
    Ok(())
}

fn read_dtn(p: &Path) -> anyhow::Result<DtnMatrix> {
    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    Ok(DtnMatrix::read_csv(BufReader::new(f))?)
}

fn read_oneform(p: &Path) -> anyhow::Result<OneForm> {
    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    match read_snapshot(BufReader::new(f))? {
        Snapshot::OneForm(w) => Ok(w),
        _ => bail!("{} is not a one-form snapshot", p.display()),
    }
}

fn read_polyline(p: &Path) -> anyhow::Result<Loop> {
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    let mut pts = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let xy: Vec<f64> = line.split_whitespace().map(str::parse).collect::<Result<_, _>>()?;
        if xy.len() != 2 {
            bail!("polyline line `{line}` needs two numbers");
        }
        pts.push(Complex64::new(xy[0], xy[1]));
    }
    Ok(Loop::closed_polyline(pts)?)
}

fn forward(common: &Common, t: f64) -> anyhow::Result<()> {
    let cfg = load_config(common)?;
    let grid = cfg.grid()?;
    let spec = if t == 0.0 { cfg.base.clone() } else { cfg.base.blend(&cfg.perturbation, t) };
    let pot = spec.sample(&grid)?;
    let dtn = dtn_matrix(&pot, cfg.truncation)?;
    let dir = out_dir(common, &cfg);
    fs::create_dir_all(&dir)?;
    let mut w = BufWriter::new(File::create(dir.join("dtn.csv"))?);
    dtn.write_csv(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join("x.field"))?);
    write_snapshot(&mut w, &Snapshot::OneForm(pot.x.clone()))?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join("q.field"))?);
    write_snapshot(&mut w, &Snapshot::Scalar(pot.q.clone()))?;
    w.flush()?;
    println!("{}", dir.join("dtn.csv").display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Forward { common, t } => forward(&common, t),
        Cmd::Distance { a, b, order } => {
            let (mut a, mut b) = (read_dtn(&a)?, read_dtn(&b)?);
            if let Some(n) = order {
                if n > a.n_max.min(b.n_max) {
                    bail!("--order {n} exceeds the stored truncation");
                }
                a = a.truncate(n);
                b = b.truncate(n);
            }
            let d = cauchy_distance(&a, &b)?;
            let out = serde_json::json!({ "surrogate": d.surrogate, "sup_inf": d.sup_inf, "truncation": a.n_max });
            println!("{out}");
            Ok(())
        }
        Cmd::CgoDecay(c) => study(&c, run_cgo_decay),
        Cmd::StationaryPhase(c) => study(&c, run_stationary_phase),
        Cmd::BoundaryDefect(c) => study(&c, run_boundary_defect),
        Cmd::StabilitySweep(c) => study(&c, run_stability_sweep),
        Cmd::GaugeCheck(c) => study(&c, run_gauge_check),
        Cmd::Holonomy { common, x1: None, x2: None, .. } => study(&common, run_holonomy_study),
        Cmd::Holonomy { x1: Some(x1), x2: Some(x2), radius, polyline, .. } => {
            let (x1, x2) = (read_oneform(&x1)?, read_oneform(&x2)?);
            let gamma = match (radius, polyline) {
                (Some(r), None) => Loop::circle(x1.grid().domain().center(), r, 400),
                (None, Some(p)) => read_polyline(&p)?,
                _ => bail!("give exactly one of --radius or --polyline"),
            };
            let rep = holonomy_defect(&x1, &x2, &gamma)?;
            println!("{}", serde_json::to_string(&rep)?);
            Ok(())
        }
        Cmd::Holonomy { .. } => bail!("give both snapshots or neither"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(Error::CheckFailed { anchor, .. }) => eprintln!("error: check `{anchor}` failed"),
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
