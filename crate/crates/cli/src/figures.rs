use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use symlandscape::characters::{scan_landscape, IrrepLabel, LandscapeGrid};
use symlandscape::kinematic::{reduced_scan, TargetGate};
use symlandscape::report::{heatmap_svg, line_chart_svg, Series};
use symlandscape::representations::{build_spin_operators, SpinLabel};
use symlandscape::topology::critical_points;

use crate::output::{default_dir, meta_json, write_file, write_stream, CliError};
use crate::{to_json, GlobalOpts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Fig1,
    Fig2,
    Fig3,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct FigureArgs {
    #[arg(long, value_enum, default_value_t = Which::All)]
    which: Which,
    /// Output directory. Defaults to `$SYMLANDSCAPE_OUT`, then `./figures`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Points per axis. Defaults: 1024 (fig1), 512 (fig2), 256 (fig3).
    #[arg(long)]
    resolution: Option<usize>,
}

/// What one figure produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSummary {
    pub figure: String,
    pub resolution: usize,
    pub files: Vec<String>,
    /// Local-maxima counts per panel.
    pub local_maxima: BTreeMap<String, usize>,
    /// Grid maxima per panel.
    pub grid_max: BTreeMap<String, f64>,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        write_file(&self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn spin(s: &str) -> SpinLabel {
    s.parse().expect("valid spin literal")
}

fn fig1(w: &mut Writer, res: usize) -> Result<FigureSummary, CliError> {
    let mut series = Vec::new();
    let mut local_maxima = BTreeMap::new();
    let mut grid_max = BTreeMap::new();
    for (name, j) in [("D3", spin("3")), ("D7_2", spin("7/2"))] {
        let label = IrrepLabel::Su2(j);
        let mut grid = scan_landscape(&label, res)?;
        grid.description = format!("j = {j}");
        w.put(&format!("fig1_{name}.csv"), &grid.to_csv())?;
        let report = critical_points(&label, 0, 1e-10)?;
        local_maxima.insert(name.to_string(), report.local_maxima());
        grid_max.insert(name.to_string(), grid.max());
        series.push(Series::from_grid(&grid)?);
    }
    w.put("fig1.svg", &line_chart_svg("Fidelity along the SU(2) torus", "beta", "J", &series)?)?;
    Ok(FigureSummary {
        figure: "fig1".into(),
        resolution: res,
        files: Vec::new(),
        local_maxima,
        grid_max,
    })
}

fn euler_panel(j: SpinLabel, target: &str, res: usize) -> Result<LandscapeGrid, CliError> {
    let ops = build_spin_operators(j);
    let w = TargetGate::named(target, j.dim())?;
    Ok(reduced_scan(&ops, &w, res)?)
}

fn fig2(w: &mut Writer, res: usize) -> Result<FigureSummary, CliError> {
    let j = spin("7/2");
    let mut grid_max = BTreeMap::new();
    for (panel, target) in [("a", "identity"), ("b", "flip")] {
        let grid = euler_panel(j, target, res)?;
        w.put(&format!("fig2{panel}.csv"), &grid.to_csv())?;
        let title = format!("j = 7/2, target {target}");
        w.put(&format!("fig2{panel}.svg"), &heatmap_svg(&title, &grid)?)?;
        grid_max.insert(panel.to_string(), grid.max());
    }
    Ok(FigureSummary {
        figure: "fig2".into(),
        resolution: res,
        files: Vec::new(),
        local_maxima: BTreeMap::new(),
        grid_max,
    })
}

fn fig3(w: &mut Writer, res: usize) -> Result<FigureSummary, CliError> {
    let mut local_maxima = BTreeMap::new();
    let mut grid_max = BTreeMap::new();
    let panels = [
        ("a", IrrepLabel::Su2(spin("7"))),
        ("b", IrrepLabel::su3(6, 1)?),
        ("c", IrrepLabel::su3(5, 2)?),
    ];
    for (panel, label) in panels {
        // The SU(2) landscape is drawn over the (theta, phi) rotation angles.
        let grid = match label {
            IrrepLabel::Su2(j) => euler_panel(j, "identity", res)?,
            IrrepLabel::Su3 { .. } => scan_landscape(&label, res)?,
        };
        w.put(&format!("fig3{panel}.csv"), &grid.to_csv())?;
        w.put(&format!("fig3{panel}.svg"), &heatmap_svg(&label.to_string(), &grid)?)?;
        let report = critical_points(&label, res, 1e-10)?;
        local_maxima.insert(label.to_string(), report.local_maxima());
        grid_max.insert(label.to_string(), grid.max());
    }
    Ok(FigureSummary {
        figure: "fig3".into(),
        resolution: res,
        files: Vec::new(),
        local_maxima,
        grid_max,
    })
}

pub fn run(global: &GlobalOpts, args: &FigureArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let dir = args
        .out_dir
        .clone()
        .or_else(default_dir)
        .unwrap_or_else(|| PathBuf::from("figures"));
    let which: &[Which] = match args.which {
        Which::All => &[Which::Fig1, Which::Fig2, Which::Fig3],
        Which::Fig1 => &[Which::Fig1],
        Which::Fig2 => &[Which::Fig2],
        Which::Fig3 => &[Which::Fig3],
    };
    let mut summaries = Vec::new();
    for &fig in which {
        let t0 = Instant::now();
        let mut w = Writer {
            dir: &dir,
            files: Vec::new(),
        };
        let (res, name) = match fig {
            Which::Fig1 => (args.resolution.unwrap_or(1024), "fig1"),
            Which::Fig2 => (args.resolution.unwrap_or(512), "fig2"),
            _ => (args.resolution.unwrap_or(256), "fig3"),
        };
        let mut summary = match fig {
            Which::Fig1 => fig1(&mut w, res)?,
            Which::Fig2 => fig2(&mut w, res)?,
            _ => fig3(&mut w, res)?,
        };
        let config = serde_json::json!({
            "figure": name,
            "resolution": res,
            "out_dir": dir,
        });
        w.put(&format!("{name}.meta.json"), &format!("{}\n", meta_json("figures", global, config)))?;
        summary.files = w.files;
        if global.verbose > 0 {
            write_stream(err, &format!("{name}: {:.2?}\n", t0.elapsed()))?;
        }
        summaries.push(summary);
    }
    write_stream(out, &to_json(&summaries))
}
