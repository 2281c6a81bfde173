//! Subcommand implementations. Each writes a CSV table to `out`.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use recoil_core::{
    exit_state, talbot_carpet, unwrap_phases, EvaluationMode, Interferometer, VisibilityCurve,
    VisibilityPhase,
};

use crate::config::RunConfig;

pub const SWEEP_HEADER: [&str; 4] = ["dp_over_lambda_i", "visibility", "phase_rad", "phase_unwrapped_rad"];
pub const CARPET_HEADER: [&str; 3] = ["x_m", "y_m", "intensity"];
pub const OVERLAY_HEADER: [&str; 8] = [
    "dp_over_lambda_i",
    "visibility",
    "phase_rad",
    "phase_unwrapped_rad",
    "exp_dp_over_lambda_i",
    "exp_value",
    "exp_kind",
    "deviation",
];

fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

/// Closed-form (or quadrature, for `mode = Numeric`) visibility curve.
pub fn model_curve(config: &RunConfig, mode: EvaluationMode) -> Result<VisibilityCurve> {
    let dist = &config.distribution;
    let lambda_i = config.apparatus.photon.wavelength_i;
    let ratios = config.sweep.ratios();
    let points: Vec<VisibilityPhase> = ratios
        .iter()
        .map(|&r| dist.visibility_phase(r * lambda_i, mode))
        .collect::<recoil_core::Result<_>>()
        .map_err(|e| match e {
            recoil_core::Error::Unsupported(_) => {
                anyhow::anyhow!("distribution has no closed form; use --mode numeric ({e})")
            }
            other => other.into(),
        })?;
    Ok(VisibilityCurve::from_points(ratios, &points))
}

pub fn sweep_analytic(config: &RunConfig, mode: EvaluationMode, out: impl Write) -> Result<()> {
    let curve = model_curve(config, mode)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for j in 0..curve.dp_over_lambda_i.len() {
        w.write_record([
            num(curve.dp_over_lambda_i[j]),
            num(curve.visibility[j]),
            num(curve.phase_rad[j]),
            num(curve.phase_unwrapped[j]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Full wave-propagation pipeline. Points whose fit degenerates are written
/// with `NaN` values.
pub fn sweep_numeric(config: &RunConfig, out: impl Write) -> Result<()> {
    let ifm = Interferometer::new(config.apparatus, config.pipeline).context("numeric pipeline setup")?;
    let ratios = config.sweep.ratios();
    let mut rows = Vec::with_capacity(ratios.len());
    for &r in &ratios {
        match ifm.relative_fringe(&config.distribution, r) {
            Ok(p) => rows.push((
                p.fringe.relative_contrast,
                p.fringe.phase_rad.unwrap_or(f64::NAN),
                p.fringe.residual,
            )),
            Err(recoil_core::Error::Degenerate(_)) => rows.push((f64::NAN, f64::NAN, f64::NAN)),
            Err(e) => return Err(e).with_context(|| format!("d_p/lambda_i = {r}")),
        }
    }
    let phases: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let unwrapped = unwrap_phases(&phases);
    let mut w = csv::Writer::from_writer(out);
    let mut header = SWEEP_HEADER.to_vec();
    header.push("residual");
    w.write_record(&header)?;
    for (j, &r) in ratios.iter().enumerate() {
        let (v, p, res) = rows[j];
        w.write_record([num(r), num(v), num(p), num(unwrapped[j]), num(res)])?;
    }
    w.flush()?;
    Ok(())
}

/// `|ψ(x, y)|²` behind G1 on the configured rectangle, one row per sample.
pub fn carpet(config: &RunConfig, out: impl Write) -> Result<()> {
    let a = &config.apparatus;
    let p = &config.pipeline;
    let c = &config.carpet;
    let grid = recoil_core::SpatialGrid::new(p.grid_spacing, p.grid_extent)?;
    let (lo, hi) = grid.bounds();
    if c.x_min < lo || c.x_max > hi {
        bail!("carpet x range [{}, {}] lies outside the grid [{lo}, {hi}]", c.x_min, c.x_max);
    }
    let g1 = recoil_core::build_transmission(&a.grating, &grid)?;
    let exit = exit_state(&g1, &p.envelope.sample(&a.grating, &grid))?;
    let carpet = talbot_carpet(&exit, &c.ys(), c.x_min, c.x_max, &a.beam)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CARPET_HEADER)?;
    for (j, &y) in carpet.ys.iter().enumerate() {
        for (i, &x) in carpet.xs.iter().enumerate() {
            w.write_record([num(x), num(y), num(carpet.intensity[j][i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// What an experimental point measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlayKind {
    Contrast,
    Phase,
}

impl OverlayKind {
    fn as_str(self) -> &'static str {
        match self {
            OverlayKind::Contrast => "contrast",
            OverlayKind::Phase => "phase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayPoint {
    pub dp_over_lambda_i: f64,
    pub value: f64,
    pub kind: OverlayKind,
}

/// Reads `dp_over_lambda_i,value,kind` rows. A header row is optional.
pub fn read_overlay(path: &Path) -> Result<Vec<OverlayPoint>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read overlay {}", path.display()))?;
    parse_overlay(&text).with_context(|| format!("overlay {}", path.display()))
}

pub fn parse_overlay(text: &str) -> Result<Vec<OverlayPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("line {}", idx + 1))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != 3 {
            bail!("line {line}: expected 3 columns (dp_over_lambda_i,value,kind), found {}", record.len());
        }
        if line == 1 && record[0].parse::<f64>().is_err() {
            continue;
        }
        let dp: f64 = record[0].parse().with_context(|| format!("line {line}: bad dp_over_lambda_i `{}`", &record[0]))?;
        let value: f64 = record[1].parse().with_context(|| format!("line {line}: bad value `{}`", &record[1]))?;
        if !(dp.is_finite() && dp >= 0.0) {
            bail!("line {line}: dp_over_lambda_i must be finite and >= 0, got {dp}");
        }
        if !value.is_finite() {
            bail!("line {line}: value must be finite");
        }
        let kind = match &record[2] {
            "contrast" => OverlayKind::Contrast,
            "phase" => OverlayKind::Phase,
            other => bail!("line {line}: kind `{other}` is not contrast or phase"),
        };
        points.push(OverlayPoint { dp_over_lambda_i: dp, value, kind });
    }
    Ok(points)
}

/// Model curve with each experimental point attached to the nearest model
/// row. Contrast points are compared with the visibility, phase points with
/// the unwrapped phase.
pub fn overlay(config: &RunConfig, mode: EvaluationMode, points: &[OverlayPoint], out: impl Write) -> Result<()> {
    let curve = model_curve(config, mode)?;
    let xs = &curve.dp_over_lambda_i;
    let mut attached: Vec<Vec<&OverlayPoint>> = vec![Vec::new(); xs.len()];
    for p in points {
        let j = (0..xs.len())
            .min_by(|&a, &b| {
                (xs[a] - p.dp_over_lambda_i).abs().total_cmp(&(xs[b] - p.dp_over_lambda_i).abs())
            })
            .expect("sweep has at least two points");
        attached[j].push(p);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OVERLAY_HEADER)?;
    for j in 0..xs.len() {
        let model = [num(xs[j]), num(curve.visibility[j]), num(curve.phase_rad[j]), num(curve.phase_unwrapped[j])];
        if attached[j].is_empty() {
            w.write_record(model.iter().map(String::as_str).chain(["", "", "", ""]))?;
        }
        for p in &attached[j] {
            let deviation = match p.kind {
                OverlayKind::Contrast => (p.value - curve.visibility[j]).abs(),
                OverlayKind::Phase => (p.value - curve.phase_unwrapped[j]).abs(),
            };
            let extra = [num(p.dp_over_lambda_i), num(p.value), p.kind.as_str().to_string(), num(deviation)];
            w.write_record(model.iter().chain(extra.iter()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_parsing() {
        let p = parse_overlay("dp_over_lambda_i,value,kind\n0.1, 0.9, contrast\n0.2,1.0,phase\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[1].kind, OverlayKind::Phase);
        assert!(parse_overlay("").unwrap().is_empty());
    }

    #[test]
    fn overlay_errors_carry_line_numbers() {
        let e = parse_overlay("0.1,0.9,contrast\n0.2,x,contrast\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 2"), "{e:#}");
        let e = parse_overlay("0.1,0.9,contrast\n0.2,0.3\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 2"), "{e:#}");
        let e = parse_overlay("0.1,0.9,contrast\n-0.2,0.3,phase\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 2"), "{e:#}");
        let e = parse_overlay("0.1,0.9,visibility\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 1"), "{e:#}");
    }
}
