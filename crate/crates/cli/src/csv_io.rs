//! Layer CSV format: `step,t,x,u`, one row per node, 17 significant digits
//! (round-trip safe, byte-reproducible).

use heatsym::MeshLayer;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Formats a number with 17 significant digits; `f64` round-trips exactly.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_layers(path: &Path, history: &[MeshLayer]) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "step,t,x,u")?;
    for (step, layer) in history.iter().enumerate() {
        for (&x, &u) in layer.xs().iter().zip(layer.us()) {
            writeln!(w, "{step},{},{},{}", fmt(layer.t()), fmt(x), fmt(u))?;
        }
    }
    w.flush()
}

/// Parses a layer CSV back into the history it was written from.
pub fn read_layers(path: &Path) -> std::io::Result<Vec<MeshLayer>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let bad = |msg: String| std::io::Error::new(std::io::ErrorKind::InvalidData, msg);
    let mut history: Vec<MeshLayer> = Vec::new();
    let mut current: Option<(usize, f64, Vec<f64>, Vec<f64>)> = None;
    for (idx, line) in file.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line.trim() != "step,t,x,u" {
                return Err(bad(format!("unexpected header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad(format!("line {}: want 4 fields", idx + 1)));
        }
        let step: usize = fields[0]
            .parse()
            .map_err(|_| bad(format!("line {}: bad step", idx + 1)))?;
        let parse = |s: &str| -> std::io::Result<f64> {
            s.parse()
                .map_err(|_| bad(format!("line {}: bad number `{s}`", idx + 1)))
        };
        let (t, x, u) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
        match &mut current {
            Some((s, st, xs, us)) if *s == step => {
                if t != *st {
                    return Err(bad(format!("line {}: time changed within step", idx + 1)));
                }
                xs.push(x);
                us.push(u);
            }
            _ => {
                if let Some((_, st, xs, us)) = current.take() {
                    history.push(MeshLayer::new(st, xs, us).map_err(|e| bad(e.to_string()))?);
                }
                current = Some((step, t, vec![x], vec![u]));
            }
        }
    }
    if let Some((_, st, xs, us)) = current.take() {
        history.push(MeshLayer::new(st, xs, us).map_err(|e| bad(e.to_string()))?);
    }
    Ok(history)
}
