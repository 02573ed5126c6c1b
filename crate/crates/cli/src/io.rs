use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use lle_spectra::geometry::{Metric, PointCloud, SHEPP_LOGAN_TABLE_VERSION};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Metadata written next to every generated cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub n: usize,
    pub p: usize,
    pub d: usize,
    pub sampler: String,
    pub seed: Option<u64>,
    pub params_file: Option<String>,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default)]
    pub table_version: Option<String>,
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `cloud.csv` → `cloud.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Writes a header line and rows of preformatted fields.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = create(path)?;
    let mut go = || -> std::io::Result<()> {
        writeln!(out, "{}", header.join(","))?;
        for r in rows {
            writeln!(out, "{}", r.join(","))?;
        }
        out.flush()
    };
    go().map_err(|e| CliError::io(path, e))
}

fn write_matrix(path: &Path, prefix: &str, data: &[f64], cols: usize) -> Result<(), CliError> {
    let header: Vec<String> = (0..cols).map(|j| format!("{prefix}{j}")).collect();
    let rows: Vec<Vec<String>> = data.chunks(cols).map(|r| r.iter().map(|&v| num(v)).collect()).collect();
    write_csv(path, &header, &rows)
}

/// Writes the cloud CSV, its sidecar and (when present) the parameter CSV.
/// Returns every path written.
pub fn save_cloud(cloud: &PointCloud, path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = vec![path.to_path_buf()];
    write_matrix(path, "x", cloud.as_slice(), cloud.ambient_dim())?;
    let params_file = if cloud.param_dim() > 0 {
        let ppath = sibling(path, "params.csv");
        let data: Vec<f64> = (0..cloud.len()).flat_map(|i| cloud.params(i).unwrap().to_vec()).collect();
        write_matrix(&ppath, "t", &data, cloud.param_dim())?;
        let name = ppath.file_name().unwrap().to_string_lossy().into_owned();
        written.push(ppath);
        Some(name)
    } else {
        None
    };
    let sidecar = Sidecar {
        n: cloud.len(),
        p: cloud.ambient_dim(),
        d: cloud.intrinsic_dim(),
        sampler: cloud.sampler.name().to_string(),
        seed: cloud.seed,
        params_file,
        period: match cloud.metric() {
            Metric::Periodic1d { period } => Some(period),
            Metric::AmbientEuclidean => None,
        },
        table_version: (cloud.sampler.name() == "shepp-logan").then(|| SHEPP_LOGAN_TABLE_VERSION.to_string()),
    };
    let spath = sibling(path, "json");
    let mut out = create(&spath)?;
    serde_json::to_writer_pretty(&mut out, &sidecar).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(&spath, e))?;
    written.push(spath);
    Ok(written)
}

fn read_matrix(path: &Path) -> Result<(Vec<f64>, usize), CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|e| CliError::io(path, e))?,
        None => return Err(CliError::Usage(format!("{}: empty file", path.display()))),
    };
    let cols = header.split(',').count();
    let mut data = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(CliError::Usage(format!(
                "{}: row {} has {} fields, header has {cols}",
                path.display(),
                row + 2,
                fields.len()
            )));
        }
        for f in fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{}: row {}: cannot parse '{f}'", path.display(), row + 2)))?;
            data.push(v);
        }
    }
    Ok((data, cols))
}

pub fn read_sidecar(cloud_path: &Path) -> Result<Option<Sidecar>, CliError> {
    let spath = sibling(cloud_path, "json");
    if !spath.exists() {
        return Ok(None);
    }
    let file = File::open(&spath).map_err(|e| CliError::io(&spath, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map(Some)
        .map_err(|e| CliError::Usage(format!("{}: {e}", spath.display())))
}

/// Loads a cloud; the sidecar, when present, supplies d, metric and parameters.
pub fn load_cloud(path: &Path, d: Option<usize>) -> Result<PointCloud, CliError> {
    let (data, p) = read_matrix(path)?;
    let sidecar = read_sidecar(path)?;
    let d = d
        .or(sidecar.as_ref().map(|s| s.d))
        .ok_or_else(|| CliError::Usage("intrinsic dimension unknown: pass --d or keep the .json sidecar".into()))?;
    let metric = match sidecar.as_ref().and_then(|s| s.period) {
        Some(period) => Metric::Periodic1d { period },
        None => Metric::AmbientEuclidean,
    };
    let mut cloud = PointCloud::new(data, p, d, metric)?;
    if let Some(name) = sidecar.as_ref().and_then(|s| s.params_file.clone()) {
        let ppath = path.with_file_name(name);
        if ppath.exists() {
            let (params, q) = read_matrix(&ppath)?;
            cloud = cloud.with_params(params, q)?;
        }
    }
    Ok(cloud)
}
