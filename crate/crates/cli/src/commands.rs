//! Subcommand implementations.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::Instant;

use despeckle_core::{
    apply_multiplicative_noise, bias_factor, denoise_detailed, denoise_hardthreshold, denoise_l2tv,
    mae, phantom, psnr, threshold_for, BandScaling, Image, LambdaWeights, NoiseModel, Restoration,
    SolverConfig, SplineFramelets, TvProxConfig,
};

use crate::args::{
    with_suffix, Cli, Command, DenoiseArgs, EvalArgs, Method, MethodParams, RerunArgs, Scaling,
    SimulateArgs, SweepArgs,
};
use crate::error::{CliError, Result};
use crate::io::{read_image, write_image, BitDepth, Loaded};
use crate::manifest::{Invocation, RunManifest};
use crate::report::{
    format_psnr, write_trace, DenoiseReport, ImageStats, NoiseEcho, PartitionSizes,
};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Denoise(a) => denoise(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Rerun(a) => rerun(a),
    }
}

/// Executes a recorded invocation.
pub fn execute(invocation: Invocation) -> Result<()> {
    match invocation {
        Invocation::Simulate(a) => simulate(a),
        Invocation::Denoise(a) => denoise(a),
        Invocation::Eval(a) => eval(a),
        Invocation::Sweep(a) => sweep(a),
    }
}

fn warn(message: impl AsRef<str>) {
    eprintln!("warning: {}", message.as_ref());
}

fn load(path: &Path) -> Result<Loaded> {
    let loaded = read_image(path)?;
    if loaded.promoted > 0 {
        warn(format!(
            "{}: {} non-positive pixel(s) raised to 1",
            path.display(),
            loaded.promoted
        ));
    }
    Ok(loaded)
}

fn save(path: &Path, image: &Image, depth: BitDepth) -> Result<usize> {
    let clamped = write_image(path, image, depth)?;
    if clamped > 0 {
        warn(format!(
            "{}: {clamped} pixel(s) clamped to the PGM range",
            path.display()
        ));
    }
    Ok(clamped)
}

pub fn simulate(mut a: SimulateArgs) -> Result<()> {
    a.resolve();
    let model = NoiseModel::new(a.looks, a.mu)?;
    let (clean, inputs) = match (&a.input, a.phantom) {
        (Some(p), _) => (load(p)?.image, vec![p.clone()]),
        (None, Some(0)) => return Err(CliError::Usage("phantom size must be >= 1".into())),
        (None, Some(n)) => (phantom::shepp_logan(n, n), vec![]),
        (None, None) => {
            return Err(CliError::Usage(
                "either --input or --phantom is required".into(),
            ))
        }
    };
    let noisy = apply_multiplicative_noise(&clean, &model, a.seed)?;
    let output = a.output.clone().expect("resolved");
    save(&output, &noisy, a.bit_depth)?;
    let mut outputs = vec![output.clone()];
    if let Some(p) = &a.clean_output {
        save(p, &clean, a.bit_depth)?;
        outputs.push(p.clone());
    }
    let manifest_path = with_suffix(&output, ".manifest.json");
    outputs.push(manifest_path.clone());
    RunManifest::new(Invocation::Simulate(a.clone()), a.seed, inputs, outputs).write(&manifest_path)
}

/// Validated core settings for one parameter set.
struct Resolved {
    model: NoiseModel,
    frame: SplineFramelets,
    solver: SolverConfig,
    tv: TvProxConfig,
    threshold: f64,
    scaling: BandScaling,
}

fn resolve(p: &MethodParams, trace: bool) -> Result<Resolved> {
    let model = NoiseModel::new(p.looks, p.noise_mean)?;
    let tv = TvProxConfig::new(p.beta, p.n_fb)?;
    let weights = LambdaWeights::new(p.lambda0, p.lambda1)?;
    let scaling = match p.scaling {
        Scaling::Normalized => BandScaling::AtomNormalized,
        Scaling::Uniform => BandScaling::Uniform,
    };
    let solver =
        SolverConfig::new(p.gamma, p.mu, p.n_dr, weights, tv, trace)?.with_scaling(scaling);
    if !(p.t_over_sigma >= 0.0) {
        return Err(CliError::Usage(format!(
            "T/σ must be >= 0, got {}",
            p.t_over_sigma
        )));
    }
    if !(p.rho > 0.0) {
        return Err(CliError::Usage(format!("ρ must be > 0, got {}", p.rho)));
    }
    let frame = SplineFramelets::new(p.levels)?;
    Ok(Resolved {
        threshold: threshold_for(&model, p.t_over_sigma),
        model,
        frame,
        solver,
        tv,
        scaling,
    })
}

struct Outcome {
    image: Image,
    restoration: Option<Restoration>,
    seconds: f64,
}

fn restore(noisy: &Image, p: &MethodParams, r: &Resolved) -> Result<Outcome> {
    let start = Instant::now();
    let (image, restoration) = match p.method {
        Method::L1frameTv => {
            let clock = || start.elapsed().as_secs_f64();
            let rest = denoise_detailed(noisy, &r.model, &r.frame, &r.solver, r.threshold, &clock)?;
            (rest.image.clone(), Some(rest))
        }
        Method::L2tv => (denoise_l2tv(noisy, &r.model, p.rho, &r.tv)?, None),
        Method::Hard => (
            denoise_hardthreshold(noisy, &r.model, &r.frame, r.threshold, r.scaling)?,
            None,
        ),
    };
    Ok(Outcome {
        image,
        restoration,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn denoise(mut a: DenoiseArgs) -> Result<()> {
    a.resolve();
    let want_trace = a.trace.is_some();
    if want_trace && a.params.method != Method::L1frameTv {
        return Err(CliError::Usage(
            "--trace is only available for --method l1frame-tv".into(),
        ));
    }
    let resolved = resolve(&a.params, want_trace)?;
    let input = load(&a.input)?;
    let truth = a.truth.as_deref().map(load).transpose()?.map(|l| l.image);
    let out = restore(&input.image, &a.params, &resolved)?;

    let output = a.output.clone().expect("resolved");
    let report_path = a.report.clone().expect("resolved");
    let clamped = save(&output, &out.image, a.bit_depth)?;
    let mut outputs = vec![output.clone(), report_path.clone()];
    if let (Some(path), Some(rest)) = (&a.trace, &out.restoration) {
        write_trace(path, &rest.solution.trace)?;
        outputs.push(path.clone());
    }
    let metrics = match &truth {
        Some(t) => Some((
            psnr(t, &input.image)?,
            psnr(t, &out.image)?,
            mae(t, &input.image)?,
            mae(t, &out.image)?,
        )),
        None => None,
    };
    let report = DenoiseReport {
        input: ImageStats::of(&a.input, &input.image, input.promoted),
        model: NoiseEcho {
            looks: resolved.model.looks(),
            mean: resolved.model.mean(),
        },
        method: a.params.method,
        parameters: a.params.clone(),
        bias_factor: bias_factor(&resolved.model),
        threshold: (a.params.method != Method::L2tv).then_some(resolved.threshold),
        partition: out.restoration.as_ref().map(|r| PartitionSizes {
            approx: r.partition_sizes[0],
            kept: r.partition_sizes[1],
            zeroed: r.partition_sizes[2],
        }),
        final_residual: out.restoration.as_ref().map(|r| r.solution.final_residual),
        relative_residual: out.restoration.as_ref().map(|r| r.relative_residual),
        psnr_noisy: metrics.map(|m| m.0),
        psnr_denoised: metrics.map(|m| m.1),
        mae_noisy: metrics.map(|m| m.2),
        mae_denoised: metrics.map(|m| m.3),
        output: output.clone(),
        clamped_pixels: clamped,
        runtime_seconds: out.seconds,
        trace: a.trace.clone(),
    };
    report.write(&report_path)?;
    if let Some((pn, pd, _, md)) = metrics {
        eprintln!(
            "PSNR noisy {} dB, denoised {} dB, MAE {md}",
            format_psnr(pn),
            format_psnr(pd)
        );
    }
    let manifest_path = with_suffix(&output, ".manifest.json");
    outputs.push(manifest_path.clone());
    let mut inputs = vec![a.input.clone()];
    inputs.extend(a.truth.clone());
    RunManifest::new(Invocation::Denoise(a.clone()), a.seed, inputs, outputs).write(&manifest_path)
}

pub fn eval(mut a: EvalArgs) -> Result<()> {
    a.resolve();
    let truth = load(&a.truth)?.image;
    let candidate = load(&a.candidate)?.image;
    let p = psnr(&truth, &candidate)?;
    let m = mae(&truth, &candidate)?;
    println!("PSNR: {}, MAE: {m}", format_psnr(p));
    let manifest_path = a.manifest.clone().expect("resolved");
    let inputs = vec![a.truth.clone(), a.candidate.clone()];
    RunManifest::new(Invocation::Eval(a), 0, inputs, vec![manifest_path.clone()])
        .write(&manifest_path)
}

/// Parses `name=v1,v2,...` axes; an empty grid is a usage error.
pub fn parse_grid(specs: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    if specs.is_empty() {
        return Err(CliError::Usage(
            "empty grid: give at least one --grid NAME=V1,V2,...".into(),
        ));
    }
    specs
        .iter()
        .map(|spec| {
            let (name, values) = spec
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("grid axis {spec:?} is not NAME=VALUES")))?;
            let name = name.trim();
            if !MethodParams::GRID_NAMES.contains(&name) {
                return Err(CliError::Usage(format!(
                    "unknown grid parameter {name:?}; expected one of {}",
                    MethodParams::GRID_NAMES.join(", ")
                )));
            }
            let values: Vec<f64> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| {
                    v.parse().map_err(|_| {
                        CliError::Usage(format!("grid value {v:?} for {name} is not a number"))
                    })
                })
                .collect::<Result<_>>()?;
            if values.is_empty() {
                return Err(CliError::Usage(format!(
                    "empty grid: axis {name} has no values"
                )));
            }
            Ok((name.to_owned(), values))
        })
        .collect()
}

/// Cartesian product, first axis varying slowest.
pub fn grid_cells(axes: &[(String, Vec<f64>)]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, (_, values)| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut cell = prefix.clone();
                    cell.push(*v);
                    cell
                })
            })
            .collect()
    })
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let axes = parse_grid(&a.grid)?;
    let cells = grid_cells(&axes);
    // validate every cell before doing any work
    let mut plans = Vec::with_capacity(cells.len());
    for cell in &cells {
        let mut p = a.params.clone();
        for ((name, _), v) in axes.iter().zip(cell) {
            p.set(name, *v)?;
        }
        let r = resolve(&p, false)?;
        plans.push((p, r));
    }
    let input = load(&a.input)?;
    let truth = a.truth.as_deref().map(load).transpose()?.map(|l| l.image);
    let dir = &a.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join("sweep.csv");
    let fresh = fs::metadata(&csv_path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&csv_path)
        .map_err(|e| CliError::io(&csv_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        let mut header = vec!["cell".to_owned(), "method".to_owned()];
        header.extend(axes.iter().map(|(n, _)| n.clone()));
        header.extend(["psnr", "mae", "runtime_seconds", "image"].map(String::from));
        w.write_record(&header)?;
        w.flush().map_err(|e| CliError::io(&csv_path, e))?;
    }
    let mut outputs = vec![csv_path.clone()];
    for (index, ((p, r), cell)) in plans.iter().zip(&cells).enumerate() {
        let out = restore(&input.image, p, r)?;
        let image_path = dir.join(format!("cell{index:04}.{}", a.image_ext));
        save(&image_path, &out.image, a.bit_depth)?;
        let (ps, ma) = match &truth {
            Some(t) => (
                format_psnr(psnr(t, &out.image)?),
                mae(t, &out.image)?.to_string(),
            ),
            None => (String::new(), String::new()),
        };
        let method = serde_json::to_value(p.method)?;
        let mut row = vec![
            index.to_string(),
            method.as_str().unwrap_or_default().to_owned(),
        ];
        row.extend(cell.iter().map(|v| v.to_string()));
        row.extend([
            ps,
            ma,
            format!("{:.6}", out.seconds),
            image_path.display().to_string(),
        ]);
        w.write_record(&row)?;
        // each finished row reaches the disk before the next cell starts
        w.flush().map_err(|e| CliError::io(&csv_path, e))?;
        outputs.push(image_path);
    }
    let manifest_path = dir.join("sweep.manifest.json");
    outputs.push(manifest_path.clone());
    let mut inputs = vec![a.input.clone()];
    inputs.extend(a.truth.clone());
    RunManifest::new(Invocation::Sweep(a), 0, inputs, outputs).write(&manifest_path)
}

pub fn rerun(a: RerunArgs) -> Result<()> {
    let manifest = RunManifest::read(&a.manifest)?;
    let mut invocation = manifest.invocation;
    if let Some(dir) = &a.redirect {
        redirect(&mut invocation, dir);
    }
    execute(invocation)
}

pub fn redirect(invocation: &mut Invocation, dir: &Path) {
    let dir: PathBuf = dir.to_path_buf();
    match invocation {
        Invocation::Simulate(a) => a.redirect(&dir),
        Invocation::Denoise(a) => a.redirect(&dir),
        Invocation::Eval(a) => a.redirect(&dir),
        Invocation::Sweep(a) => a.redirect(&dir),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing_and_product() {
        let axes =
            parse_grid(&["t_over_sigma=2,3".into(), "lambda1 = 0.4, 0.5 ,0.6".into()]).unwrap();
        let cells = grid_cells(&axes);
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0], vec![2.0, 0.4]);
        assert_eq!(cells[5], vec![3.0, 0.6]);
        for bad in [
            vec![],
            vec!["gamma=".to_owned()],
            vec!["x=1".to_owned()],
            vec!["gamma".to_owned()],
        ] {
            assert!(matches!(parse_grid(&bad), Err(CliError::Usage(_))));
        }
    }
}
