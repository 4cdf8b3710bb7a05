//! Data matrices as CSV and true models as JSON.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dag::{CholeskyParam, Dag};
use crate::error::{Error, Result};
use crate::synth::{GeneratorInfo, TrueModel};

/// Writes `y` with a header `x1,…,xp`.
pub fn write_data_csv(path: &Path, y: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=y.ncols()).map(|k| format!("x{k}")))?;
    for r in 0..y.nrows() {
        w.write_record(y.row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV with a header row. Rows of unequal length are rejected.
pub fn read_data_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let p = rdr.headers()?.len();
    let mut vals = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: rec.len(),
            });
        }
        for f in rec.iter() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{}: non-numeric entry {f:?}", path.display())))?;
            vals.push(v);
        }
        n += 1;
    }
    if n == 0 || p == 0 {
        return Err(Error::InvalidConfig(format!("{}: no data", path.display())));
    }
    Ok(DMatrix::from_row_slice(n, p, &vals))
}

/// Serialized form of a [`TrueModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub generator: Option<GeneratorInfo>,
    pub dag: Dag,
    pub d: Vec<f64>,
    /// Row-major `L₀`.
    pub l: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn from_model(model: &TrueModel, generator: Option<GeneratorInfo>) -> Self {
        let p = model.p();
        ModelFile {
            generator,
            dag: model.dag0.clone(),
            d: model.d0.iter().copied().collect(),
            l: (0..p).map(|i| model.l0.row(i).iter().copied().collect()).collect(),
        }
    }

    pub fn to_model(&self) -> Result<TrueModel> {
        let p = self.d.len();
        if self.l.len() != p || self.l.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: self.l.len(),
            });
        }
        let flat: Vec<f64> = self.l.iter().flatten().copied().collect();
        let param = CholeskyParam::new(DVector::from_vec(self.d.clone()), DMatrix::from_row_slice(p, p, &flat))?;
        let model = TrueModel::from_cholesky(&param)?;
        if model.dag0 != self.dag {
            return Err(Error::InvalidConfig("model dag does not match the support of L".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::synth::{gen_true_model, sample_data};

    #[test]
    fn data_and_model_round_trip() {
        let dir = std::env::temp_dir().join(format!("bayes-dag-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let mut r = rng::stream(3, 0);
        let m = gen_true_model(5, 0.5, 3.0, &mut r).unwrap();
        let (y, _) = sample_data(&m, 8, &mut r);
        let path = dir.join("y.csv");
        write_data_csv(&path, &y).unwrap();
        assert_eq!(read_data_csv(&path).unwrap(), y);

        let mf = ModelFile::from_model(&m, Some(GeneratorInfo::new(5, 8, 3, 0.5, 3.0)));
        let mp = dir.join("model.json");
        mf.save(&mp).unwrap();
        let back = ModelFile::load(&mp).unwrap();
        assert_eq!(back, mf);
        assert_eq!(back.to_model().unwrap(), m);
        fs::remove_dir_all(&dir).ok();
    }
}
