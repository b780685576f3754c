//! File formats: bath JSON, coherence-curve CSV with a JSON sidecar, sweep
//! CSV, and a small hand-rolled SVG plot.
//!
//! Floats are written with the shortest round-trip representation, so a file
//! written and read back reproduces the numbers bit for bit.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use cce_lab_core::ensemble::{SweepPoint, T2Flag};
use cce_lab_core::geometry::{BathScenario, Species, SpinBath, SpinSite};
use cce_lab_core::spinops::Cx;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BathSiteRecord {
    pub position_nm: [f64; 3],
    pub species: String,
    /// Spin quantum number (0.5, 1.5, ...).
    pub spin: f64,
    pub gamma_khz_per_g: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BathFile {
    pub scenario: String,
    pub seed: u64,
    pub sites: Vec<BathSiteRecord>,
}

impl BathFile {
    pub fn from_bath(bath: &SpinBath) -> BathFile {
        BathFile {
            scenario: bath.scenario.name().to_string(),
            seed: bath.rng_seed,
            sites: bath
                .sites
                .iter()
                .map(|s| BathSiteRecord {
                    position_nm: s.position_nm,
                    species: s.species.name().to_string(),
                    spin: s.spin_2x as f64 / 2.0,
                    gamma_khz_per_g: s.gamma_khz_per_g,
                })
                .collect(),
        }
    }

    pub fn to_bath(&self) -> anyhow::Result<SpinBath> {
        let scenario = BathScenario::parse(&self.scenario)
            .with_context(|| format!("unknown bath scenario '{}'", self.scenario))?;
        let sites = self
            .sites
            .iter()
            .map(|r| {
                let species = Species::parse(&r.species)
                    .with_context(|| format!("unknown species '{}'", r.species))?;
                let spin_2x = (r.spin * 2.0).round();
                if spin_2x < 1.0 || (r.spin * 2.0 - spin_2x).abs() > 1e-9 {
                    bail!("invalid spin quantum number {}", r.spin);
                }
                Ok(SpinSite {
                    position_nm: r.position_nm,
                    species,
                    gamma_khz_per_g: r.gamma_khz_per_g,
                    spin_2x: spin_2x as u32,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(SpinBath::new(sites, scenario, self.seed)?)
    }
}

pub fn write_bath(path: &Path, bath: &SpinBath) -> anyhow::Result<()> {
    let file = BathFile::from_bath(bath);
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_bath(path: &Path) -> anyhow::Result<SpinBath> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: BathFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.to_bath()
}

/// Metadata written next to every curve CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CurveMeta {
    pub scenario: String,
    pub sequence: String,
    pub cce_order: usize,
    pub expansion_mode: String,
    pub bath_state_id: String,
    pub config_hash: String,
    #[serde(default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

pub const CURVE_HEADER: &str = "time_ms,re_L,im_L,abs_L";

pub fn write_curve_csv(path: &Path, times_ms: &[f64], values: &[Cx]) -> anyhow::Result<()> {
    if times_ms.len() != values.len() {
        bail!("curve grids have mismatched lengths");
    }
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for (&t, v) in times_ms.iter().zip(values) {
        out.push_str(&format!("{},{},{},{}\n", t, v.re, v.im, v.norm()));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_curve_csv(path: &Path) -> anyhow::Result<(Vec<f64>, Vec<Cx>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CURVE_HEADER => {}
        other => bail!("unexpected curve header {:?}", other),
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            bail!("line {}: expected 4 fields", i + 2);
        }
        let parse = |s: &str| -> anyhow::Result<f64> {
            s.parse::<f64>().with_context(|| format!("line {}", i + 2))
        };
        times.push(parse(fields[0])?);
        values.push(Cx::new(parse(fields[1])?, parse(fields[2])?));
    }
    Ok((times, values))
}

pub fn write_curve_meta(path: &Path, meta: &CurveMeta) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(meta)?;
    std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub const SWEEP_HEADER: &str = "B,T2_ms,flag";

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> anyhow::Result<()> {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let t2 = match p.t2.t2_ms {
            Some(v) => format!("{v}"),
            None => String::from("nan"),
        };
        out.push_str(&format!("{},{},{}\n", p.b_value, t2, p.t2.flag.name()));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> anyhow::Result<Vec<(f64, Option<f64>)>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SWEEP_HEADER => {}
        other => bail!("unexpected sweep header {:?}", other),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            bail!("expected 3 fields per sweep row");
        }
        let b: f64 = fields[0].parse()?;
        let t2 = if fields[2] == T2Flag::Crossed.name() {
            Some(fields[1].parse()?)
        } else {
            None
        };
        out.push((b, t2));
    }
    Ok(out)
}

/// Minimal line plot of |L|(t) curves as standalone SVG.
pub fn plot_curves_svg(
    path: &Path,
    series: &[(&str, &[f64], &[f64])],
    x_label: &str,
    y_label: &str,
) -> anyhow::Result<()> {
    if series.is_empty() {
        bail!("nothing to plot");
    }
    let (w, h, ml, mb, mt, mr) = (640.0, 420.0, 60.0, 50.0, 20.0, 20.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, xs, ys) in series {
        for &x in *xs {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        }
        for &y in *ys {
            if y.is_finite() {
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
    }
    if !(xmax > xmin) {
        xmax = xmin + 1.0;
    }
    if !(ymax > ymin) {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| ml + (x - xmin) / (xmax - xmin) * pw;
    let sy = |y: f64| mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph;
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let fx = xmin + (xmax - xmin) * i as f64 / 4.0;
        let fy = ymin + (ymax - ymin) * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{:.3}</text>\n",
            sx(fx),
            h - mb + 16.0,
            fx
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.3}</text>\n",
            ml - 6.0,
            sy(fy) + 4.0,
            fy
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        ml + pw / 2.0,
        h - 8.0,
        x_label
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>\n",
        mt + ph / 2.0,
        mt + ph / 2.0,
        y_label
    ));
    for (k, (label, xs, ys)) in series.iter().enumerate() {
        let color = colors[k % colors.len()];
        let mut points = String::new();
        for (&x, &y) in xs.iter().zip(*ys) {
            if y.is_finite() {
                points.push_str(&format!("{:.2},{:.2} ", sx(x), sy(y)));
            }
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.trim_end()
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            ml + 10.0,
            mt + 16.0 + 16.0 * k as f64,
            label
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
