use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{render_svg, SimulationResult};
use crate::error::{Error, Result};
use crate::request::RequestSequence;

pub const SERIES_HEADER: [&str; 13] = [
    "index",
    "op",
    "id",
    "outcome",
    "layer",
    "live_modules",
    "live_area",
    "pixel_volume",
    "u",
    "mean_u",
    "moves",
    "total_volume",
    "rel_volume",
];

/// Writes one line per row. Volumes moved are exact fractions, the rest use
/// the shortest decimal that round-trips.
pub fn write_series_csv<W: Write>(result: &SimulationResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SERIES_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.index.to_string(),
            if r.insert { "insert" } else { "delete" }.to_string(),
            r.id.to_string(),
            r.outcome.to_string(),
            r.layer.to_string(),
            r.live_modules.to_string(),
            r.live_area.to_string(),
            r.pixel_volume.to_string(),
            r.u.to_string(),
            r.mean_u.to_string(),
            r.moves.to_string(),
            r.total_volume.to_string(),
            r.rel_volume.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<series writer>", e))?;
    Ok(())
}

fn summary_text(result: &SimulationResult) -> String {
    let s = &result.summary;
    format!(
        "strategy: {}\naspect: {}\nrequests: {}\ncollisions: {}\nfinal_u: {}\nmean_u: {}\nmax_u: {}\nmax_moves: {}\nmax_total_volume: {}\nmax_rel_volume: {}\n",
        result.strategy,
        result.aspect,
        s.requests,
        s.collisions,
        s.final_u,
        s.mean_u,
        s.max_u,
        s.max_moves,
        s.max_total_volume,
        s.max_rel_volume
    )
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = io::BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(&path, e))
}

/// Writes `series.csv`, `summary.txt`, `plot.svg` and `sequence.csv` into `dir`.
pub fn write_outputs(
    dir: &Path,
    sequence: &RequestSequence,
    result: &SimulationResult,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if result.rows.is_empty() {
        return Err(Error::PreconditionViolated("no requests to report".into()));
    }
    write_file(dir, "series.csv", |w| write_series_csv(result, w))?;
    let io_err = |name: &str| {
        let path = dir.join(name);
        move |e| Error::io(path, e)
    };
    write_file(dir, "summary.txt", |w| {
        w.write_all(summary_text(result).as_bytes())
            .map_err(io_err("summary.txt"))
    })?;
    write_file(dir, "plot.svg", |w| {
        w.write_all(render_svg(result).as_bytes())
            .map_err(io_err("plot.svg"))
    })?;
    write_file(dir, "sequence.csv", |w| sequence.write_csv(w))
}
