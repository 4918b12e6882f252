//! JSON schemas for systems, controllers, and reports, plus CSV emission.
//!
//! Matrices are nested arrays of numbers. Empty channels are written as `[]`
//! (or rows of empty arrays); the `dims` object is authoritative for their
//! sizes, and non-empty arrays must agree with it.

use std::fmt::Write as _;
use std::path::Path;

use jumpflow::discretize::{CtSystem, DtSystem};
use jumpflow::system::{DiscreteController, HoldDevice, SampledDataPlant};
use jumpflow::Matrix;
use serde::{Deserialize, Serialize};

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<jumpflow::Error> for CliError {
    fn from(e: jumpflow::Error) -> Self {
        CliError(e.to_string())
    }
}

pub fn fail<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError(msg.into()))
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub n_x: usize,
    pub n_wc: usize,
    pub n_zc: usize,
    pub n_wd: usize,
    pub n_zd: usize,
    pub n_u: usize,
    pub n_y: usize,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct PlantBlock {
    #[serde(rename = "A_c")]
    pub a_c: Rows,
    #[serde(rename = "B_c")]
    pub b_c: Rows,
    #[serde(rename = "B_cu")]
    pub b_cu: Rows,
    #[serde(rename = "A_d")]
    pub a_d: Rows,
    #[serde(rename = "B_d")]
    pub b_d: Rows,
    #[serde(rename = "B_du")]
    pub b_du: Rows,
    #[serde(rename = "C_c")]
    pub c_c: Rows,
    #[serde(rename = "D_cc")]
    pub d_cc: Rows,
    #[serde(rename = "D_cu")]
    pub d_cu: Rows,
    #[serde(rename = "C_d")]
    pub c_d: Rows,
    #[serde(rename = "D_dd")]
    pub d_dd: Rows,
    #[serde(rename = "D_du")]
    pub d_du: Rows,
    #[serde(rename = "C_y")]
    pub c_y: Rows,
    #[serde(rename = "D_yd")]
    pub d_yd: Rows,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct HoldMatrices {
    #[serde(rename = "A_c_h")]
    pub a_c: Rows,
    #[serde(rename = "A_d_h")]
    pub a_d: Rows,
    #[serde(rename = "B_h")]
    pub b: Rows,
    #[serde(rename = "C_h")]
    pub c: Rows,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum HoldBlock {
    Zoh,
    Foh,
    Custom { matrices: HoldMatrices },
}

#[derive(Serialize, Deserialize, Debug)]
pub struct ControllerBlock {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D")]
    pub d: Rows,
}

/// Sampled-data plant with its hold and an optional controller.
#[derive(Serialize, Deserialize, Debug)]
pub struct SystemFile {
    pub h: f64,
    pub dims: Dims,
    pub plant: PlantBlock,
    pub hold: HoldBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerBlock>,
}

/// Standalone discrete controller, as emitted by synthesis.
#[derive(Serialize, Deserialize, Debug)]
pub struct ControllerFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(flatten)]
    pub matrices: ControllerBlock,
}

/// Continuous-time state-space system; `dims` is only needed when the
/// arrays alone cannot pin the sizes (empty channels).
#[derive(Serialize, Deserialize, Debug)]
pub struct CtSystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D")]
    pub d: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<SsDims>,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
pub struct SsDims {
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
}

#[derive(Serialize, Debug, Default)]
pub struct Report {
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_monodromy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dlmi_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerBlock>,
    /// Per-method certified level; absent entries mean the method's loop
    /// is unstable or the discretization failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_table: Option<Vec<(String, Option<f64>)>>,
    /// Per-method closed-loop spectral radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<Vec<(String, f64)>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub csv: Vec<String>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    // serde_json errors carry line and column positions.
    serde_json::from_str(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

/// Nested arrays to a matrix of the declared shape. Empty channels may be
/// written as `[]` regardless of the declared row count.
pub fn to_matrix(field: &str, rows: usize, cols: usize, data: &Rows) -> Result<Matrix, CliError> {
    if data.is_empty() && (rows == 0 || cols == 0) {
        return Ok(Matrix::zeros(rows, cols));
    }
    if data.len() != rows {
        return fail(format!(
            "{field}: expected {rows}x{cols}, got {} rows",
            data.len()
        ));
    }
    let mut m = Matrix::zeros(rows, cols);
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return fail(format!(
                "{field}: expected {rows}x{cols}, row {i} has {} entries",
                row.len()
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return fail(format!("{field}: entry ({i},{j}) is not finite"));
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

pub fn from_matrix(m: &Matrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl SystemFile {
    pub fn plant(&self) -> Result<SampledDataPlant, CliError> {
        let d = self.dims;
        let p = &self.plant;
        let plant = SampledDataPlant {
            h: self.h,
            a_c: to_matrix("plant.A_c", d.n_x, d.n_x, &p.a_c)?,
            b_c: to_matrix("plant.B_c", d.n_x, d.n_wc, &p.b_c)?,
            b_cu: to_matrix("plant.B_cu", d.n_x, d.n_u, &p.b_cu)?,
            a_d: to_matrix("plant.A_d", d.n_x, d.n_x, &p.a_d)?,
            b_d: to_matrix("plant.B_d", d.n_x, d.n_wd, &p.b_d)?,
            b_du: to_matrix("plant.B_du", d.n_x, d.n_u, &p.b_du)?,
            c_c: to_matrix("plant.C_c", d.n_zc, d.n_x, &p.c_c)?,
            d_cc: to_matrix("plant.D_cc", d.n_zc, d.n_wc, &p.d_cc)?,
            d_cu: to_matrix("plant.D_cu", d.n_zc, d.n_u, &p.d_cu)?,
            c_d: to_matrix("plant.C_d", d.n_zd, d.n_x, &p.c_d)?,
            d_dd: to_matrix("plant.D_dd", d.n_zd, d.n_wd, &p.d_dd)?,
            d_du: to_matrix("plant.D_du", d.n_zd, d.n_u, &p.d_du)?,
            c_y: to_matrix("plant.C_y", d.n_y, d.n_x, &p.c_y)?,
            d_yd: to_matrix("plant.D_yd", d.n_y, d.n_wd, &p.d_yd)?,
        };
        plant.validate()?;
        Ok(plant)
    }

    pub fn hold(&self) -> Result<HoldDevice, CliError> {
        let n_u = self.dims.n_u;
        match &self.hold {
            HoldBlock::Zoh => Ok(jumpflow::system::zoh_hold(n_u)),
            HoldBlock::Foh => Ok(jumpflow::system::foh_hold(n_u, self.h)),
            HoldBlock::Custom { matrices } => {
                // Custom hold state count comes from its own arrays.
                let n_h = matrices.a_c.len();
                Ok(HoldDevice {
                    a_c: to_matrix("hold.A_c_h", n_h, n_h, &matrices.a_c)?,
                    a_d: to_matrix("hold.A_d_h", n_h, n_h, &matrices.a_d)?,
                    b: to_matrix("hold.B_h", n_h, n_u, &matrices.b)?,
                    c: to_matrix("hold.C_h", n_u, n_h, &matrices.c)?,
                })
            }
        }
    }

    pub fn controller(&self) -> Result<Option<DiscreteController>, CliError> {
        match &self.controller {
            None => Ok(None),
            Some(block) => Ok(Some(controller_from_block(
                block,
                self.dims.n_y,
                self.dims.n_u,
            )?)),
        }
    }
}

pub fn controller_from_block(
    block: &ControllerBlock,
    n_y: usize,
    n_u: usize,
) -> Result<DiscreteController, CliError> {
    let n_c = block.a.len();
    Ok(DiscreteController {
        a: to_matrix("controller.A", n_c, n_c, &block.a)?,
        b: to_matrix("controller.B", n_c, n_y, &block.b)?,
        c: to_matrix("controller.C", n_u, n_c, &block.c)?,
        d: to_matrix("controller.D", n_u, n_y, &block.d)?,
    })
}

pub fn controller_to_block(k: &DiscreteController) -> ControllerBlock {
    ControllerBlock {
        a: from_matrix(&k.a),
        b: from_matrix(&k.b),
        c: from_matrix(&k.c),
        d: from_matrix(&k.d),
    }
}

impl CtSystemFile {
    fn shape(&self) -> Result<SsDims, CliError> {
        if let Some(d) = self.dims {
            return Ok(d);
        }
        let n_x = self.a.len();
        let n_u = self
            .b
            .first()
            .map(Vec::len)
            .or_else(|| self.d.first().map(Vec::len));
        let n_y = if self.c.is_empty() && self.d.is_empty() {
            None
        } else {
            Some(self.c.len().max(self.d.len()))
        };
        match (n_u, n_y) {
            (Some(n_u), Some(n_y)) => Ok(SsDims { n_x, n_u, n_y }),
            _ => fail("cannot infer dimensions from empty matrices; add a dims object"),
        }
    }

    pub fn ct(&self) -> Result<CtSystem, CliError> {
        let d = self.shape()?;
        let sys = CtSystem {
            a: to_matrix("A", d.n_x, d.n_x, &self.a)?,
            b: to_matrix("B", d.n_x, d.n_u, &self.b)?,
            c: to_matrix("C", d.n_y, d.n_x, &self.c)?,
            d: to_matrix("D", d.n_y, d.n_u, &self.d)?,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn dt(&self) -> Result<DtSystem, CliError> {
        let h = match self.h {
            Some(h) => h,
            None => return fail("discrete-time system file needs an \"h\" field"),
        };
        let ct = self.ct()?;
        let sys = DtSystem {
            h,
            a: ct.a,
            b: ct.b,
            c: ct.c,
            d: ct.d,
        };
        sys.validate()?;
        Ok(sys)
    }
}

/// Write one CSV with a header row; every record must match its length.
pub fn write_csv(
    path: &Path,
    header: &[String],
    records: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for rec in records {
        assert_eq!(rec.len(), header.len(), "csv record width");
        let mut first = true;
        for v in rec {
            if !first {
                text.push(',');
            }
            first = false;
            let _ = write!(text, "{v}");
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}
