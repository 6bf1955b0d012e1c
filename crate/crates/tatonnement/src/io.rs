//! File formats: JSON economy descriptions, CSV trajectory and sweep tables.
//!
//! CSV floats are written with 17 significant digits so files round-trip
//! bit-exactly and identical runs produce identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::SweepTable;
use crate::dynamics::Trajectory;
use crate::economy::{CobbDouglasConsumer, Economy, LeontiefConsumer, PriceVector};
use crate::Result;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CobbDouglasConsumerFile {
    pub alphas: Vec<f64>,
    pub endowments: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeontiefConsumerFile {
    pub coefficients: Vec<f64>,
    pub endowments: Vec<f64>,
}

/// On-disk economy description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EconomyFile {
    CobbDouglas {
        consumers: Vec<CobbDouglasConsumerFile>,
    },
    ScarfLeontief {
        consumers: Vec<LeontiefConsumerFile>,
    },
    Linearized {
        p_star: Vec<f64>,
        /// Row-major jacobian of the field at p_star.
        jacobian: Vec<Vec<f64>>,
        /// Project the jacobian onto the tangent space on load (default).
        /// Disable only to study deliberately broken fields.
        #[serde(default = "default_true")]
        project: bool,
    },
}

impl EconomyFile {
    pub fn to_economy(&self) -> Result<Economy> {
        match self {
            EconomyFile::CobbDouglas { consumers } => {
                let consumers = consumers
                    .iter()
                    .map(|c| CobbDouglasConsumer::new(c.alphas.clone(), c.endowments.clone()))
                    .collect::<Result<Vec<_>>>()?;
                Economy::cobb_douglas(consumers)
            }
            EconomyFile::ScarfLeontief { consumers } => {
                let consumers = consumers
                    .iter()
                    .map(|c| LeontiefConsumer::new(c.coefficients.clone(), c.endowments.clone()))
                    .collect::<Result<Vec<_>>>()?;
                Economy::scarf_leontief(consumers)
            }
            EconomyFile::Linearized { p_star, jacobian, project } => {
                let p = PriceVector::new(p_star)?;
                let n = p.len();
                if jacobian.len() != n || jacobian.iter().any(|row| row.len() != n) {
                    return Err(crate::Error::invalid(format!(
                        "jacobian must be {n} x {n} to match p_star"
                    )));
                }
                let flat: Vec<f64> = jacobian.iter().flatten().copied().collect();
                Economy::linearized(p, DMatrix::from_row_slice(n, n, &flat), *project)
            }
        }
    }

    /// Description of an in-memory economy. Linearized economies are written
    /// with their stored (already projected) jacobian and project = false so
    /// a round-trip is exact.
    pub fn from_economy(economy: &Economy) -> Self {
        match economy {
            Economy::CobbDouglas { consumers } => EconomyFile::CobbDouglas {
                consumers: consumers
                    .iter()
                    .map(|c| CobbDouglasConsumerFile {
                        alphas: c.alphas().iter().copied().collect(),
                        endowments: c.endowments().iter().copied().collect(),
                    })
                    .collect(),
            },
            Economy::ScarfLeontief { consumers } => EconomyFile::ScarfLeontief {
                consumers: consumers
                    .iter()
                    .map(|c| LeontiefConsumerFile {
                        coefficients: c.coefficients().iter().copied().collect(),
                        endowments: c.endowments().iter().copied().collect(),
                    })
                    .collect(),
            },
            Economy::Linearized { p_star, jacobian } => EconomyFile::Linearized {
                p_star: p_star.to_vec(),
                jacobian: (0..jacobian.nrows())
                    .map(|i| jacobian.row(i).iter().copied().collect())
                    .collect(),
                project: false,
            },
        }
    }
}

pub fn load_economy(path: &Path) -> Result<Economy> {
    let file = File::open(path)?;
    let parsed: EconomyFile = serde_json::from_reader(file)?;
    parsed.to_economy()
}

pub fn save_economy(path: &Path, economy: &Economy) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &EconomyFile::from_economy(economy))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// 17 significant digits: enough to reconstruct the exact double.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// One row per recorded state:
/// step,time,p_1..p_n,xi_norm,angle_prev,angle_eq,scale
/// with optional columns left empty where undefined.
pub fn write_trajectory_csv<W: Write>(w: &mut W, trajectory: &Trajectory) -> Result<()> {
    let n = trajectory.points.first().map(|p| p.len()).unwrap_or(0);
    let mut header = String::from("step,time");
    for i in 1..=n {
        header.push_str(&format!(",p_{i}"));
    }
    header.push_str(",xi_norm,angle_prev,angle_eq,scale");
    writeln!(w, "{header}")?;
    for (idx, point) in trajectory.points.iter().enumerate() {
        let d = &trajectory.diagnostics[idx];
        let mut row = format!("{},{}", idx, fmt(trajectory.times[idx]));
        for x in point.iter() {
            row.push(',');
            row.push_str(&fmt(*x));
        }
        row.push(',');
        row.push_str(&fmt(d.xi_norm));
        row.push(',');
        row.push_str(&fmt(d.angle_prev));
        row.push(',');
        row.push_str(&fmt_opt(d.angle_eq));
        row.push(',');
        row.push_str(&fmt_opt(d.scale));
        writeln!(w, "{row}")?;
    }
    Ok(())
}

pub fn write_trajectory_csv_path(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_trajectory_csv(&mut w, trajectory)?;
    w.flush()?;
    Ok(())
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// One row per damping value:
/// gamma_hat,converged,alpha,alpha_predicted,xi_norm_a,balance_residual,error
pub fn write_sweep_csv<W: Write>(w: &mut W, table: &SweepTable) -> Result<()> {
    writeln!(w, "gamma_hat,converged,alpha,alpha_predicted,xi_norm_a,balance_residual,error")?;
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt(row.gamma_hat),
            row.converged,
            fmt_opt(row.alpha),
            fmt_opt(row.alpha_predicted),
            fmt_opt(row.xi_norm_a),
            fmt_opt(row.balance_residual),
            row.error.as_deref().map(csv_quote).unwrap_or_default(),
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv_path(path: &Path, table: &SweepTable) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_sweep_csv(&mut w, table)?;
    w.flush()?;
    Ok(())
}
