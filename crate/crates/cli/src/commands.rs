use std::path::{Path, PathBuf};

use lle_spectra::baseline_dm::{default_sigma, dm_embed, DmConfig};
use lle_spectra::geometry::{
    circle_angles, sample_circle, sample_flat_torus, sample_sphere, sample_torus, shepp_logan_dataset, CircleMode,
    PointCloud, SphereMode,
};
use lle_spectra::kernel::{covariance_spectrum, kernel_slice};
use lle_spectra::lle_matrix::{assemble_w, generator, normalized_knn_generator};
use lle_spectra::neighbors::{build_eps_neighbors, build_knn, eps_for_neighbor_count};
use lle_spectra::spectral::{circular_spearman, embed, generator_spectrum, recovered_angles};
use lle_spectra::theory::{circle_fourth_order_scale, spectrum_prediction};
use lle_spectra::{LleConfig, LleError, NeighborList, NeighborRule, SolverOptions, SpectrumResult};
use serde_json::{json, Value};

use crate::args::*;
use crate::io::{create, load_cloud, num, save_cloud, sibling, write_csv};
use crate::CliError;

/// What a command produced; the caller turns it into a manifest.
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub manifest: Option<PathBuf>,
    /// Set when outputs were written but a numerical step failed.
    pub failure: Option<String>,
}

pub fn diag(v: Value) {
    eprintln!("{v}");
}

fn solver_options(s: &SolverArgs) -> SolverOptions {
    SolverOptions {
        tol: s.tol,
        max_iter: s.max_iter,
        ..Default::default()
    }
}

fn config(rho: f64, d: usize) -> Result<LleConfig, CliError> {
    Ok(LleConfig::new(rho, d)?)
}

fn neighbors(cloud: &PointCloud, nb: &Neighborhood) -> Result<NeighborList, CliError> {
    let list = match (nb.eps, nb.knn, nb.eps_count) {
        (Some(eps), _, _) => build_eps_neighbors(cloud, eps)?,
        (_, Some(k), _) => build_knn(cloud, k)?,
        (_, _, Some(target)) => build_eps_neighbors(cloud, eps_for_neighbor_count(cloud, target)?)?,
        _ => return Err(CliError::Usage("one of --eps, --knn, --eps-count is required".into())),
    };
    let counts: Vec<usize> = (0..list.len()).map(|i| list.count(i)).collect();
    let (rule, value) = match list.rule {
        NeighborRule::EpsRadius(e) => ("eps", e),
        NeighborRule::Knn(k) => ("knn", k as f64),
    };
    diag(json!({
        "event": "neighbors",
        "rule": rule,
        "value": value,
        "mean_count": counts.iter().sum::<usize>() as f64 / counts.len() as f64,
        "min_count": counts.iter().min(),
        "max_count": counts.iter().max(),
    }));
    Ok(list)
}

fn rule_json(list: &NeighborList) -> Value {
    match list.rule {
        NeighborRule::EpsRadius(e) => json!({"eps": e}),
        NeighborRule::Knn(k) => json!({"knn": k}),
    }
}

pub fn generate(a: &GenerateArgs) -> Result<Outcome, CliError> {
    let circle_mode = || match a.mode {
        ModeName::Uniform => Ok(CircleMode::Uniform),
        ModeName::Nonuniform => Ok(CircleMode::Nonuniform),
        ModeName::Perturbed => Err(CliError::Usage("circle modes: uniform, nonuniform".into())),
    };
    let sphere_mode = || match a.mode {
        ModeName::Uniform => Ok(SphereMode::Uniform),
        ModeName::Perturbed => Ok(SphereMode::Perturbed),
        ModeName::Nonuniform => Err(CliError::Usage("sphere modes: uniform, perturbed".into())),
    };
    let cloud = match a.sampler {
        SamplerName::Circle => sample_circle(a.n, circle_mode()?, a.seed)?,
        SamplerName::Sphere => sample_sphere(a.n, a.radius, sphere_mode()?, a.seed)?,
        SamplerName::Torus => sample_torus(a.n, a.seed)?,
        SamplerName::FlatTorus => sample_flat_torus(a.n)?,
        SamplerName::SheppLogan => shepp_logan_dataset(a.n, a.p)?,
    };
    let outputs = save_cloud(&cloud, &a.out)?;
    diag(json!({"event": "generate", "n": cloud.len(), "p": cloud.ambient_dim()}));
    Ok(Outcome {
        inputs: vec![],
        outputs,
        parameters: json!({
            "sampler": format!("{:?}", a.sampler),
            "n": a.n,
            "mode": format!("{:?}", a.mode),
            "radius": a.radius,
            "p": a.p,
        }),
        seed: Some(a.seed),
        manifest: Some(sibling(&a.out, "manifest.json")),
        failure: None,
    })
}

fn spectrum_rows(r: &SpectrumResult, theory: Option<&[f64]>) -> Vec<Vec<String>> {
    let scaled = r.rescaled();
    (0..r.len())
        .map(|k| {
            let t = theory.map(|t| t[k]);
            let log_err = match t {
                Some(t) if t > 0.0 && scaled[k] != 0.0 => num(scaled[k].abs().log10() - t.log10()),
                _ => String::new(),
            };
            vec![
                (k + 1).to_string(),
                num(r.eigenvalues[k]),
                num(r.imag_parts[k]),
                num(scaled[k]),
                num(r.residuals[k]),
                r.converged[k].to_string(),
                t.map(num).unwrap_or_default(),
                log_err,
            ]
        })
        .collect()
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Outcome, CliError> {
    let cloud = load_cloud(&a.input.cloud, a.input.d)?;
    let d = cloud.intrinsic_dim();
    let list = neighbors(&cloud, &a.nbhd)?;
    let lle = assemble_w(&cloud, &list, config(a.rho, d)?)?;
    if !lle.skipped.is_empty() {
        diag(json!({"event": "skipped_points", "count": lle.skipped.len(), "first": lle.skipped[0].0}));
    }
    let mut outputs = vec![];
    if let Some(path) = &a.dump_w {
        lle.w.write_matrix_market(create(path)?)?;
        outputs.push(path.clone());
    }
    let rescale = a.rescale.unwrap_or(match a.theory {
        Some(TheoryName::CircleFourthOrder) => Rescale::FourthOrder,
        _ => Rescale::Lb,
    });
    let lb = 2.0 * (d as f64 + 2.0);
    let (op, scale) = match (list.rule, rescale) {
        (NeighborRule::EpsRadius(eps), Rescale::Lb) => (generator(&lle.w, 1.0), lb / (eps * eps)),
        (NeighborRule::EpsRadius(eps), Rescale::FourthOrder) => (generator(&lle.w, 1.0), circle_fourth_order_scale(eps)),
        (NeighborRule::EpsRadius(_), Rescale::None) => (generator(&lle.w, 1.0), 1.0),
        (NeighborRule::Knn(_), Rescale::Lb) => (normalized_knn_generator(&lle.w, &lle.radii)?, lb),
        (NeighborRule::Knn(_), Rescale::None) => (normalized_knn_generator(&lle.w, &lle.radii)?, 1.0),
        (NeighborRule::Knn(_), Rescale::FourthOrder) => {
            return Err(CliError::Usage("fourth-order rescaling needs an ε-ball neighborhood".into()))
        }
    };
    let theory = match a.theory {
        Some(t) => Some(spectrum_prediction(t.key(), a.m, a.radius)?.values),
        None => None,
    };
    let (result, failure) = match generator_spectrum(&op, a.m, &solver_options(&a.solver)) {
        Ok(r) => (r, None),
        Err(LleError::NotConverged { partial }) => {
            let msg = format!("eigensolver did not converge after {} iterations", partial.iterations);
            (*partial, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    let result = result.with_scale(scale);
    diag(json!({
        "event": "spectrum",
        "iterations": result.iterations,
        "max_residual": result.residuals.iter().cloned().fold(0.0, f64::max),
        "converged": result.all_converged(),
    }));
    let header: Vec<String> = [
        "k",
        "eigenvalue",
        "imag_part",
        "rescaled_eigenvalue",
        "residual",
        "converged",
        "theory_value",
        "log10_error",
    ]
    .map(String::from)
    .to_vec();
    write_csv(&a.out, &header, &spectrum_rows(&result, theory.as_deref()))?;
    outputs.insert(0, a.out.clone());
    Ok(Outcome {
        inputs: vec![a.input.cloud.clone()],
        outputs,
        parameters: json!({
            "neighborhood": rule_json(&list),
            "rho": a.rho.to_string(),
            "d": d,
            "m": a.m,
            "theory": a.theory.map(|t| t.key()),
            "radius": a.radius,
            "rescale": format!("{rescale:?}"),
            "scale": scale,
            "tol": a.solver.tol,
            "max_iter": a.solver.max_iter,
        }),
        seed: None,
        manifest: Some(sibling(&a.out, "manifest.json")),
        failure,
    })
}

pub fn kernel(a: &KernelArgs) -> Result<Outcome, CliError> {
    let cloud = load_cloud(&a.input.cloud, a.input.d)?;
    if a.center >= cloud.len() {
        return Err(CliError::Usage(format!("center {} out of range (n = {})", a.center, cloud.len())));
    }
    let list = neighbors(&cloud, &a.nbhd)?;
    let slice = kernel_slice(&cloud, a.center, &list, config(a.rho, cloud.intrinsic_dim())?)?;
    let header: Vec<String> = ["neighbor_index", "distance", "raw_value", "normalized_value"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = (0..slice.neighbors.len())
        .map(|j| {
            vec![
                slice.neighbors[j].to_string(),
                num(slice.distances[j]),
                num(slice.raw[j]),
                num(slice.normalized[j]),
            ]
        })
        .collect();
    write_csv(&a.out, &header, &rows)?;
    Ok(Outcome {
        inputs: vec![a.input.cloud.clone()],
        outputs: vec![a.out.clone()],
        parameters: json!({
            "neighborhood": rule_json(&list),
            "rho": a.rho.to_string(),
            "d": cloud.intrinsic_dim(),
            "center": a.center,
            "eps": slice.eps,
        }),
        seed: None,
        manifest: Some(sibling(&a.out, "manifest.json")),
        failure: None,
    })
}

pub fn covariance(a: &CovarianceArgs) -> Result<Outcome, CliError> {
    let cloud = load_cloud(&a.input.cloud, a.input.d.or(Some(1)))?;
    let n = cloud.len();
    let eps = match (a.eps, a.eps_count) {
        (Some(e), _) => e,
        (None, Some(t)) => eps_for_neighbor_count(&cloud, t)?,
        (None, None) => return Err(CliError::Usage("--eps or --eps-count is required".into())),
    };
    let centers: Vec<usize> = match a.center_count {
        Some(c) if c == 0 || c > n => return Err(CliError::Usage(format!("--center-count must lie in 1..={n}"))),
        Some(c) => (0..c).map(|i| i * n / c).collect(),
        None => a.centers.clone(),
    };
    if let Some(&bad) = centers.iter().find(|&&k| k >= n) {
        return Err(CliError::Usage(format!("center {bad} out of range (n = {n})")));
    }
    let header: Vec<String> = ["center", "eps", "neighbor_count", "index", "eigenvalue"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for &k in &centers {
        let s = covariance_spectrum(&cloud, k, eps)?;
        for (i, v) in s.eigenvalues.iter().enumerate() {
            rows.push(vec![k.to_string(), num(eps), s.neighbor_count.to_string(), (i + 1).to_string(), num(*v)]);
        }
    }
    write_csv(&a.out, &header, &rows)?;
    Ok(Outcome {
        inputs: vec![a.input.cloud.clone()],
        outputs: vec![a.out.clone()],
        parameters: json!({"eps": eps, "centers": centers}),
        seed: None,
        manifest: Some(sibling(&a.out, "manifest.json")),
        failure: None,
    })
}

fn coords_csv(path: &Path, coords: &faer::Mat<f64>, angles: Option<&[f64]>) -> Result<(), CliError> {
    let dim = coords.ncols();
    let mut header = vec!["index".to_string()];
    header.extend((1..=dim).map(|j| format!("y{j}")));
    if angles.is_some() {
        header.push("angle".into());
    }
    let rows: Vec<Vec<String>> = (0..coords.nrows())
        .map(|i| {
            let mut r = vec![i.to_string()];
            r.extend((0..dim).map(|j| num(coords[(i, j)])));
            if let Some(a) = angles {
                r.push(num(a[i]));
            }
            r
        })
        .collect();
    write_csv(path, &header, &rows)
}

pub fn embed_cmd(a: &EmbedArgs) -> Result<Outcome, CliError> {
    let cloud = load_cloud(&a.input.cloud, a.input.d)?;
    let list = neighbors(&cloud, &a.nbhd)?;
    let e = embed(&cloud, &list, config(a.rho, cloud.intrinsic_dim())?, a.dim, &solver_options(&a.solver))?;
    diag(json!({"event": "embed", "eigenvalues": e.eigenvalues}));
    coords_csv(&a.out, &e.coords, None)?;
    Ok(Outcome {
        inputs: vec![a.input.cloud.clone()],
        outputs: vec![a.out.clone()],
        parameters: json!({
            "neighborhood": rule_json(&list),
            "rho": a.rho.to_string(),
            "d": cloud.intrinsic_dim(),
            "dim": a.dim,
            "tol": a.solver.tol,
        }),
        seed: None,
        manifest: Some(sibling(&a.out, "manifest.json")),
        failure: None,
    })
}

/// Spearman threshold used to call an embedding a recovery of the curve.
const RECOVERY_THRESHOLD: f64 = 0.95;
const COMPARE_RHOS: [f64; 3] = [-5.0, 3.0, 8.0];

pub fn compare(a: &CompareArgs) -> Result<Outcome, CliError> {
    let cloud = load_cloud(&a.input.cloud, a.input.d)?;
    let truth = circle_angles(&cloud);
    let eps = match a.eps {
        Some(e) => e,
        None => eps_for_neighbor_count(&cloud, a.eps_count)?,
    };
    let list = build_eps_neighbors(&cloud, eps)?;
    let opts = solver_options(&a.solver);
    let mut outputs = vec![];
    let mut summary = vec![];
    let mut record = |method: String, rho: String, coords: &faer::Mat<f64>, eigs: &[f64]| -> Result<(), CliError> {
        let angles = recovered_angles(coords);
        let path = a.out_dir.join(format!("{method}.csv"));
        coords_csv(&path, coords, Some(&angles))?;
        outputs.push(path);
        let score = truth.as_ref().map(|t| circular_spearman(t, &angles));
        summary.push(vec![
            method,
            rho,
            score.map(num).unwrap_or_default(),
            score.map(|s| (s > RECOVERY_THRESHOLD).to_string()).unwrap_or_default(),
            num(eigs[0]),
            num(eigs.get(1).copied().unwrap_or(f64::NAN)),
        ]);
        Ok(())
    };
    for rho in COMPARE_RHOS {
        let e = embed(&cloud, &list, config(rho, cloud.intrinsic_dim())?, 2, &opts)?;
        record(format!("lle_rho_{rho}"), rho.to_string(), &e.coords, &e.eigenvalues)?;
    }
    let sigma = match a.sigma {
        Some(s) => s,
        None => default_sigma(&cloud)?,
    };
    let dm = dm_embed(&cloud, &DmConfig::new(sigma, a.alpha, 2)?, &opts)?;
    record("dm".into(), String::new(), &dm.coords, &dm.eigenvalues)?;
    let header: Vec<String> = ["method", "rho", "spearman", "recovers_curve", "eigenvalue_1", "eigenvalue_2"]
        .map(String::from)
        .to_vec();
    let spath = a.out_dir.join("summary.csv");
    write_csv(&spath, &header, &summary)?;
    outputs.push(spath);
    diag(json!({"event": "compare", "eps": eps, "sigma": sigma}));
    Ok(Outcome {
        inputs: vec![a.input.cloud.clone()],
        outputs,
        parameters: json!({
            "eps": eps,
            "rhos": COMPARE_RHOS,
            "sigma": sigma,
            "alpha": a.alpha,
            "recovery_threshold": RECOVERY_THRESHOLD,
        }),
        seed: None,
        manifest: Some(a.out_dir.join("compare.manifest.json")),
        failure: None,
    })
}

pub fn theory(a: &TheoryArgs) -> Result<Outcome, CliError> {
    let pred = spectrum_prediction(a.name.key(), a.m, a.radius)?;
    let header = vec!["k".to_string(), "value".to_string()];
    let rows: Vec<Vec<String>> = pred
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| vec![(k + 1).to_string(), num(*v)])
        .collect();
    let (outputs, manifest) = match &a.out {
        Some(path) => {
            write_csv(path, &header, &rows)?;
            (vec![path.clone()], Some(sibling(path, "manifest.json")))
        }
        None => {
            println!("{}", header.join(","));
            for r in &rows {
                println!("{}", r.join(","));
            }
            (vec![], None)
        }
    };
    Ok(Outcome {
        inputs: vec![],
        outputs,
        parameters: json!({"name": a.name.key(), "m": a.m, "radius": a.radius}),
        seed: None,
        manifest,
        failure: None,
    })
}
