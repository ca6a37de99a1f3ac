//! Feature table writers.
//!
//! Column order is fixed:
//! `id,tile,delay,U,q1,q2,q3,tau,kappa,entropy,complexity`, then `H,seed`
//! for simulated rows, then `p1..p24` when requested.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ordpat_core::FeatureVector;
use serde::Serialize;

use crate::Format;

#[derive(Debug, Clone)]
pub struct Row {
    pub id: String,
    pub tile: usize,
    pub features: FeatureVector,
    pub simulation: Option<Simulation>,
}

#[derive(Debug, Clone, Copy)]
pub struct Simulation {
    pub hurst: Option<f64>,
    pub seed: u64,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    id: &'a str,
    tile: usize,
    delay: usize,
    #[serde(rename = "U")]
    count: u64,
    q1: f64,
    q2: f64,
    q3: f64,
    tau: f64,
    kappa: f64,
    entropy: f64,
    complexity: f64,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    hurst: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    patterns: Option<&'a [f64]>,
}

pub struct TableWriter {
    patterns: bool,
    simulated: bool,
    out: Sink,
}

enum Sink {
    Csv(Box<csv::Writer<Box<dyn Write>>>),
    Json(Box<dyn Write>),
}

pub fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn header(patterns: bool, simulated: bool) -> Vec<String> {
    let mut h: Vec<String> = [
        "id", "tile", "delay", "U", "q1", "q2", "q3", "tau", "kappa", "entropy", "complexity",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if simulated {
        h.push("H".into());
        h.push("seed".into());
    }
    if patterns {
        h.extend((1..=24).map(|k| format!("p{k}")));
    }
    h
}

impl TableWriter {
    pub fn new(out: Box<dyn Write>, format: Format, patterns: bool, simulated: bool) -> io::Result<Self> {
        let out = match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(header(patterns, simulated))?;
                Sink::Csv(Box::new(w))
            }
            Format::Json => Sink::Json(out),
        };
        Ok(Self {
            patterns,
            simulated,
            out,
        })
    }

    pub fn write(&mut self, row: &Row) -> io::Result<()> {
        let f = &row.features;
        match &mut self.out {
            Sink::Csv(w) => {
                let mut rec = vec![
                    row.id.clone(),
                    row.tile.to_string(),
                    f.delay.rows.to_string(),
                    f.count.to_string(),
                ];
                rec.extend([f.q[0], f.q[1], f.q[2], f.tau, f.kappa, f.entropy, f.complexity].map(|x| x.to_string()));
                if self.simulated {
                    let sim = row.simulation.expect("simulated table rows carry parameters");
                    rec.push(sim.hurst.map(|h| h.to_string()).unwrap_or_default());
                    rec.push(sim.seed.to_string());
                }
                if self.patterns {
                    rec.extend(f.patterns.p.iter().map(|x| x.to_string()));
                }
                w.write_record(&rec)?;
            }
            Sink::Json(w) => {
                let json = JsonRow {
                    id: &row.id,
                    tile: row.tile,
                    delay: f.delay.rows,
                    count: f.count,
                    q1: f.q[0],
                    q2: f.q[1],
                    q3: f.q[2],
                    tau: f.tau,
                    kappa: f.kappa,
                    entropy: f.entropy,
                    complexity: f.complexity,
                    hurst: row.simulation.map(|s| s.hurst),
                    seed: row.simulation.map(|s| s.seed),
                    patterns: self.patterns.then_some(&f.patterns.p[..]),
                };
                serde_json::to_writer(&mut *w, &json)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> io::Result<()> {
        match self.out {
            Sink::Csv(mut w) => w.flush(),
            Sink::Json(mut w) => w.flush(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::header;

    #[test]
    fn header_layout() {
        assert_eq!(header(false, false).len(), 11);
        let h = header(true, true);
        assert_eq!(&h[9..13], ["entropy", "complexity", "H", "seed"]);
        assert_eq!(h.last().unwrap(), "p24");
        assert_eq!(h.len(), 11 + 2 + 24);
    }
}
