use std::io::Write;

use serde_json::{json, Value};

use crate::error::{invalid, Result};

use super::evolve::{EvolutionResult, ScenarioConfig};

impl EvolutionResult {
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec!["t".to_string()];
        for c in &self.channels {
            for field in ["norm", "r2", "kinetic", "potential", "phase0"] {
                names.push(format!("{}_{field}", c.label));
            }
        }
        names
    }

    /// One row per output time; `header` lines are written first as `# ...`.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &[String]) -> Result<()> {
        let io = |e: std::io::Error| invalid("output", e.to_string());
        for line in header {
            writeln!(out, "# {line}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| invalid("output", e.to_string());
        w.write_record(self.column_names()).map_err(csv_err)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:e}")];
            for c in &self.channels {
                for v in [
                    c.norm[i],
                    c.mean_square_radius[i],
                    c.kinetic_energy[i],
                    c.potential_energy[i],
                    c.central_phase[i],
                ] {
                    row.push(format!("{v:e}"));
                }
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    /// Self-describing envelope: the configuration alongside the arrays.
    pub fn to_json(&self, config: &ScenarioConfig) -> Value {
        json!({ "config": config, "result": self })
    }
}
