//! CSV / JSON / SVG artifacts. Every file carries the config hash and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Table { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip float text, so identical runs give identical bytes.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Clone, Debug)]
pub struct Artifacts {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub metrics: Map<String, Value>,
    pub fits: Map<String, Value>,
    pub conventions: Map<String, Value>,
    pub plots: Vec<(String, String)>,
}

impl Artifacts {
    pub fn new(experiment: &str, config_hash: &str, seed: u64) -> Self {
        let mut conventions = Map::new();
        conventions.insert("site_order".into(), json!("little-endian: site i is bit i-1"));
        conventions.insert("rotations".into(), json!("R_P(t) = exp(-i t P / 2)"));
        conventions.insert(
            "rotated_measurement".into(),
            json!("O = cos(b) X - sin(b) Y; outcome +1 <-> s = 0; <Y> = +sigma sin(b)"),
        );
        Artifacts {
            experiment: experiment.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            tables: Vec::new(),
            metrics: Map::new(),
            fits: Map::new(),
            conventions,
            plots: Vec::new(),
        }
    }

    pub fn csv_text(&self, t: &Table) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&t.header).expect("in-memory csv");
        for r in &t.rows {
            w.write_record(r).expect("in-memory csv");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv");
        format!("# config_hash={} seed={}\n{body}", self.config_hash, self.seed)
    }

    pub fn summary(&self) -> Value {
        json!({
            "config_hash": self.config_hash,
            "seed": self.seed,
            "experiment": self.experiment,
            "metrics": self.metrics,
            "fits": self.fits,
            "conventions": self.conventions,
        })
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            fs::write(&p, self.csv_text(t))?;
            out.push(p);
        }
        let p = dir.join(format!("{}_summary.json", self.experiment));
        fs::write(&p, serde_json::to_string_pretty(&self.summary())? + "\n")?;
        out.push(p);
        for (name, svg) in &self.plots {
            let p = dir.join(format!("{name}.svg"));
            let tagged = svg.replacen(
                "<svg ",
                &format!("<!-- config_hash={} seed={} -->\n<svg ", self.config_hash, self.seed),
                1,
            );
            fs::write(&p, tagged)?;
            out.push(p);
        }
        Ok(out)
    }
}
