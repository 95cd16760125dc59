use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Manifest, RunOutput};
use crate::error::Result;

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_g_csv<W: Write>(out: &mut W, run: &RunOutput) -> Result<()> {
    writeln!(out, "# experiment: {}", run.config.experiment)?;
    writeln!(out, "# shots: {}", run.g.n_shots)?;
    writeln!(out, "# x2_index,x2_meters,G_mc,G_oracle,visibility")?;
    for (k, x) in run.x2.iter().enumerate() {
        writeln!(
            out,
            "{k},{},{},{},{}",
            num(*x),
            num(run.g.g[k]),
            num(run.g_oracle[k]),
            num(run.g.visibility[k])
        )?;
    }
    Ok(())
}

pub fn write_stats_csv<W: Write>(out: &mut W, run: &RunOutput) -> Result<()> {
    let nan = f64::NAN;
    let p = run.pixels;
    let c = run.correlation;
    let mean_i2 = run.g.mean_i2.iter().sum::<f64>() / run.g.mean_i2.len() as f64;
    writeln!(out, "# experiment: {}", run.config.experiment)?;
    writeln!(out, "# quantity,value")?;
    writeln!(out, "shots,{}", run.g.n_shots)?;
    let rows = [
        ("C", c.map_or(nan, |c| c.c)),
        ("C_from_variance", c.map_or(nan, |c| c.from_variance)),
        ("Nminus_ratio", run.n_minus_ratio().unwrap_or(nan)),
        ("mean_N1", p.map_or(nan, |p| p.mean_n1)),
        ("mean_N2", p.map_or(nan, |p| p.mean_n2)),
        ("var_N1", p.map_or(nan, |p| p.var_n1)),
        ("var_N2", p.map_or(nan, |p| p.var_n2)),
        ("cov_N1N2", p.map_or(nan, |p| p.cov)),
        ("var_Nminus", p.map_or(nan, |p| p.var_n_minus)),
        ("mean_I1", run.g.mean_i1),
        ("mean_I2_per_pixel", mean_i2),
    ];
    for (name, v) in rows {
        writeln!(out, "{name},{}", num(v))?;
    }
    Ok(())
}

pub fn write_manifest<W: Write>(out: &mut W, manifest: &Manifest) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, manifest)
        .map_err(|e| crate::error::Error::Parse(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Oracle-only table: `x2_index,x2_meters,G_oracle`.
pub fn write_oracle_csv<W: Write>(out: &mut W, x2: &[f64], g: &[f64]) -> Result<()> {
    writeln!(out, "# x2_index,x2_meters,G_oracle")?;
    for (k, (x, v)) in x2.iter().zip(g).enumerate() {
        writeln!(out, "{k},{},{}", num(*x), num(*v))?;
    }
    Ok(())
}

/// Writes `G.csv`, `stats.csv` and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, run: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut g = BufWriter::new(fs::File::create(dir.join("G.csv"))?);
    write_g_csv(&mut g, run)?;
    g.flush()?;
    let mut s = BufWriter::new(fs::File::create(dir.join("stats.csv"))?);
    write_stats_csv(&mut s, run)?;
    s.flush()?;
    let mut m = BufWriter::new(fs::File::create(dir.join("manifest.json"))?);
    write_manifest(&mut m, &run.manifest)?;
    m.flush()?;
    Ok(())
}
