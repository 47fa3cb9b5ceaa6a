//! Runs that write their tables, heatmaps and summaries to an output directory.

use std::path::{Path, PathBuf};

use holobeam::{GridSpec, Trajectory};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::experiment::{db, BeamKind, BeamRow, BeamSpec, Experiment, OffsetSummary, SingleRun};
use crate::output::{write_field, write_heatmap, write_summary, write_table, Provenance, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Both curved beams at an offset inside the aperture.
    Fig3,
    /// Received power versus offset, and the best beam of each array.
    Fig4,
    /// Optimized curved beam against the focused beam.
    Fig6,
    /// Rates over receiver depth for every beam.
    Fig7,
    /// Optimized trajectory parameters over receiver depth.
    Fig8,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    OffsetC,
    UserZ,
    Spacing,
}

/// One beam to the configured user; see [`Experiment::run_single`].
pub fn single(exp: &Experiment, kind: BeamKind, offset: Option<f64>, out: &Path) -> Result<Vec<PathBuf>> {
    let mut w = Writer::new(exp, out, "run")?;
    let run = exp.run_single(kind, offset, true)?;
    w.run(kind.name(), exp, &run)?;
    w.summary(&BeamReport::of(exp, &run))?;
    Ok(w.written)
}

pub fn sweep(exp: &Experiment, sweep: Sweep, out: &Path, workers: usize) -> Result<Vec<PathBuf>> {
    let mut w = Writer::new(exp, out, "sweep")?;
    match sweep {
        Sweep::OffsetC => w.table("offset_c.csv", &exp.offset_sweep(workers)?)?,
        Sweep::UserZ => w.table("user_z.csv", &exp.user_sweep(workers)?)?,
        Sweep::Spacing => w.table("spacing.csv", &exp.spacing_sweep(workers)?)?,
    }
    Ok(w.written)
}

/// Runs `figure` and returns the files written under `out`.
pub fn reproduce(exp: &Experiment, figure: Figure, out: &Path, workers: usize) -> Result<Vec<PathBuf>> {
    let mut w = Writer::new(exp, out, figure.name())?;
    match figure {
        Figure::Fig3 => fig3(exp, &mut w)?,
        Figure::Fig4 => fig4(exp, &mut w, workers)?,
        Figure::Fig6 => fig6(exp, &mut w)?,
        Figure::Fig7 => {
            let rows = exp.user_sweep(workers)?;
            w.table("beams.csv", &rows)?;
            w.summary(&RateOrdering::of(&rows))?;
        }
        Figure::Fig8 => {
            let depths = exp.config().sweeps.user_z.values()?;
            let beam = BeamSpec::Rhs(exp.config().rhs.spacing_wavelengths);
            let rows = exp.compare_beams(&depths, &[beam], workers)?;
            w.table("parameters.csv", &rows)?;
            w.summary(&ParameterTrends::of(&rows))?;
        }
    }
    Ok(w.written)
}

struct Writer<'a> {
    prov: Provenance,
    out: &'a Path,
    written: Vec<PathBuf>,
    prefix: &'static str,
}

impl<'a> Writer<'a> {
    fn new(exp: &Experiment, out: &'a Path, prefix: &'static str) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Self {
            prov: Provenance::of(exp.config()),
            out,
            written: Vec::new(),
            prefix,
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(format!("{}_{name}", self.prefix));
        self.written.push(p.clone());
        p
    }

    fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = self.path(name);
        write_table(&p, &self.prov, rows)
    }

    fn summary<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let p = self.path("summary.json");
        write_summary(&p, &self.prov, value)
    }

    /// Heatmap and final-plane field of `run`.
    fn run(&mut self, name: &str, exp: &Experiment, run: &SingleRun) -> Result<()> {
        if let Some(rows) = &run.propagation.intensity {
            let p = self.path(&format!("{name}.pgm"));
            write_heatmap(&p, &self.prov, rows, exp.grid(), exp.scene().plane_spacing())?;
        }
        let p = self.path(&format!("{name}_field.csv"));
        write_field(&p, &self.prov, &run.propagation.final_slice)?;
        if let Some(opt) = &run.optimization {
            let rows: Vec<TraceRow> = opt.trace.iter().map(TraceRow::from).collect();
            let p = self.path(&format!("{name}_trace.csv"));
            write_table(&p, &self.prov, &rows)?;
        }
        Ok(())
    }
}

/// What a summary records about one propagated beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamReport {
    pub beam: BeamKind,
    pub c: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub z_max: Option<f64>,
    pub full_aperture: Option<bool>,
    /// Median distance between the brightest sample of each plane and the
    /// trajectory, over the stretch the trajectory is expected to hold.
    pub track_deviation: Option<f64>,
    pub power: f64,
    pub power_dbw: f64,
    pub rate: f64,
}

impl BeamReport {
    pub fn of(exp: &Experiment, run: &SingleRun) -> Self {
        let l = exp.config().rhs.aperture_length;
        let z_max = run.trajectory.and_then(|t| t.z_max(l).ok());
        let track_deviation = run.trajectory.zip(run.propagation.intensity.as_ref()).and_then(|(t, rows)| {
            let end = z_max.unwrap_or(run.user.z).min(run.user.z);
            track_deviation(rows, exp.grid(), exp.scene().plane_spacing(), &t, end)
        });
        Self {
            beam: run.kind,
            c: run.trajectory.map(|t| t.c()),
            a: run.trajectory.map(|t| t.a()),
            b: run.trajectory.map(|t| t.b()),
            z_max,
            full_aperture: run.full_aperture,
            track_deviation,
            power: run.power,
            power_dbw: 10.0 * run.power.log10(),
            rate: run.rate,
        }
    }
}

/// Median `|argmax_x |E|^2 - f(z)|` over planes with `0.1 m <= z <= 0.9 z_end`.
pub fn track_deviation(rows: &[Vec<f64>], grid: &GridSpec, plane_spacing: f64, traj: &Trajectory, z_end: f64) -> Option<f64> {
    let mut dev: Vec<f64> = rows
        .iter()
        .enumerate()
        .filter(|&(s, _)| {
            let z = s as f64 * plane_spacing;
            z >= 0.1 && z <= 0.9 * z_end
        })
        .map(|(s, row)| {
            let peak = row
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
                .0;
            (grid.x(peak) - traj.x_at(s as f64 * plane_spacing)).abs()
        })
        .collect();
    if dev.is_empty() {
        return None;
    }
    dev.sort_by(f64::total_cmp);
    Some(dev[dev.len() / 2])
}

fn fig3(exp: &Experiment, w: &mut Writer) -> Result<()> {
    let c = exp.config().rhs.aperture_length / 2.0;
    let rhs = exp.run_single(BeamKind::AiryRhs, Some(c), true)?;
    let ula = exp.run_single(BeamKind::AiryUla, Some(c), true)?;
    w.run("rhs", exp, &rhs)?;
    w.run("ula", exp, &ula)?;
    w.summary(&[BeamReport::of(exp, &rhs), BeamReport::of(exp, &ula)])
}

#[derive(Debug, Clone, Serialize)]
struct OffsetReport {
    sweep: OffsetSummary,
    best_rhs: Option<BeamReport>,
    best_ula: Option<BeamReport>,
}

fn fig4(exp: &Experiment, w: &mut Writer, workers: usize) -> Result<()> {
    let rows = exp.offset_sweep(workers)?;
    w.table("offset_sweep.csv", &rows)?;
    let sweep = OffsetSummary::of(&rows, exp.config().rhs.aperture_length);
    let mut report = OffsetReport {
        sweep,
        best_rhs: None,
        best_ula: None,
    };
    if let Some((c, _)) = sweep.best_rhs {
        let run = exp.run_single(BeamKind::AiryRhs, Some(c), true)?;
        w.run("rhs_best", exp, &run)?;
        report.best_rhs = Some(BeamReport::of(exp, &run));
    }
    if let Some((c, _)) = sweep.best_ula {
        let run = exp.run_single(BeamKind::AiryUla, Some(c), true)?;
        w.run("ula_best", exp, &run)?;
        report.best_ula = Some(BeamReport::of(exp, &run));
    }
    w.summary(&report)
}

#[derive(Debug, Clone, Serialize)]
struct CurvedVsFocused {
    c_est: Option<f64>,
    curved: BeamReport,
    focused: BeamReport,
    margin_db: f64,
}

fn fig6(exp: &Experiment, w: &mut Writer) -> Result<()> {
    let curved = exp.run_single(BeamKind::AiryRhs, None, true)?;
    let focused = exp.run_single(BeamKind::Focused, None, true)?;
    w.run("curved", exp, &curved)?;
    w.run("focused", exp, &focused)?;
    w.summary(&CurvedVsFocused {
        c_est: curved.optimization.as_ref().map(|o| o.c_est()),
        curved: BeamReport::of(exp, &curved),
        focused: BeamReport::of(exp, &focused),
        margin_db: db(curved.power / focused.power),
    })
}

/// Rates of the beams at each depth, in table order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateOrdering {
    pub depths: Vec<DepthRates>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthRates {
    pub z_r: f64,
    pub beams: Vec<(String, f64, f64)>,
    /// Rates non-increasing in table order.
    pub ordered: bool,
}

impl RateOrdering {
    pub fn of(rows: &[BeamRow]) -> Self {
        let mut depths: Vec<DepthRates> = Vec::new();
        for r in rows {
            let entry = (r.beam.clone(), r.spacing_wavelengths, r.rate);
            match depths.last_mut() {
                Some(d) if d.z_r == r.z_r => d.beams.push(entry),
                _ => depths.push(DepthRates {
                    z_r: r.z_r,
                    beams: vec![entry],
                    ordered: true,
                }),
            }
        }
        for d in &mut depths {
            // the focused beam is a reference, not part of the ordering
            let rates: Vec<f64> = d.beams.iter().filter(|b| b.0 != "focused").map(|b| b.2).collect();
            d.ordered = rates.windows(2).all(|p| p[0] >= p[1]);
        }
        Self { depths }
    }
}

/// Largest step-to-step increase of each parameter over increasing depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterTrends {
    pub abs_a_max_rise: Option<f64>,
    pub d_r_max_rise: Option<f64>,
    pub theta_r_max_rise: Option<f64>,
    pub c_opt_range: Option<(f64, f64)>,
}

impl ParameterTrends {
    pub fn of(rows: &[BeamRow]) -> Self {
        let rise = |f: &dyn Fn(&BeamRow) -> Option<f64>| {
            let v: Option<Vec<f64>> = rows.iter().map(f).collect();
            v.and_then(|v| v.windows(2).map(|p| p[1] - p[0]).reduce(f64::max))
        };
        let c: Vec<f64> = rows.iter().filter_map(|r| r.c_opt).collect();
        Self {
            abs_a_max_rise: rise(&|r| r.a.map(f64::abs)),
            d_r_max_rise: rise(&|r| r.d_r),
            theta_r_max_rise: rise(&|r| r.theta_r),
            c_opt_range: (!c.is_empty()).then(|| {
                (
                    c.iter().copied().fold(f64::INFINITY, f64::min),
                    c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            }),
        }
    }
}
