use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ssa_lab::estimate::{estimate_params, estimate_pseudospectrum};
use ssa_lab::forecast::{ssa_forecast, ForecastParams};
use ssa_lab::io::EigentripleSetJson;
use ssa_lab::series::write_values_csv;
use ssa_lab::simlab::{run_experiment, ExperimentConfig};
use ssa_lab::ssa::{center, parse_indices, reconstruct_from};
use ssa_lab::{ssa, DecompositionMethod, EigentripleSet, EstimationMethod, TimeSeries};

use crate::{
    CliError, Common, DecomposeArgs, EstimateArgs, ForecastArgs, Format, PseudospectrumArgs, ReconstructArgs,
    SeriesArgs, SimulateArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).map_err(|e| io_err(path, e))?;
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(|e| io_err(path, e))?;
    }
    Ok(text)
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    TimeSeries::from_csv_str(&read_text(path)?).map_err(|e| match e {
        ssa_lab::SsaError::Parse(m) => CliError::Usage(format!("{}: {m}", path.display())),
        e => CliError::Domain(e),
    })
}

/// Writes through `f` to the output file or stdout.
fn emit(common: &Common, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match &common.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_err(path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

fn emit_json<T: serde::Serialize>(common: &Common, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    emit(common, |w| writeln!(w, "{text}"))
}

fn window_for(len: usize, window: Option<usize>, verbose: bool) -> usize {
    window.unwrap_or_else(|| {
        let l = (len + 1) / 2;
        if verbose {
            eprintln!("window: L = {l} (default floor((N+1)/2) for N = {len}; about half the length is usually best)");
        }
        l
    })
}

/// The (possibly centered) series, its removed mean and the window.
fn prepare(args: &SeriesArgs, verbose: bool) -> Result<(TimeSeries, Option<f64>, usize)> {
    let series = read_series(&args.input)?;
    let window = window_for(series.len(), args.window, verbose);
    if args.center {
        let (c, mean) = center(&series);
        if verbose {
            eprintln!("centering: subtracted mean {mean}");
        }
        Ok((c, Some(mean), window))
    } else {
        Ok((series, None, window))
    }
}

fn method(toeplitz: bool) -> DecompositionMethod {
    if toeplitz {
        DecompositionMethod::Toeplitz
    } else {
        DecompositionMethod::Basic
    }
}

fn decomposition(series: &TimeSeries, window: usize, method: DecompositionMethod) -> Result<EigentripleSet> {
    Ok(match method {
        DecompositionMethod::Basic => ssa::decompose(&ssa::embed(series, window)?)?,
        DecompositionMethod::Toeplitz => ssa::decompose_toeplitz(series, window)?,
    })
}

fn add_mean(values: &mut [f64], mean: Option<f64>) {
    if let Some(m) = mean {
        values.iter_mut().for_each(|v| *v += m);
    }
}

pub fn decompose(a: DecomposeArgs) -> Result<()> {
    let (series, mean, window) = prepare(&a.series, a.common.verbose)?;
    let ets = decomposition(&series, window, method(a.series.toeplitz))?;
    if a.common.verbose {
        eprintln!("retained {} eigentriples (L = {}, K = {})", ets.len(), ets.window(), ets.k());
    }
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => emit(&a.common, |w| writeln!(w, "{}", EigentripleSetJson::new(&ets, mean).to_json())),
        Format::Csv => emit(&a.common, |w| {
            writeln!(w, "index,sigma")?;
            for (i, s) in ets.sigmas().iter().enumerate() {
                writeln!(w, "{},{s}", i + 1)?;
            }
            Ok(())
        }),
    }
}

pub fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let indices = match (&a.group, a.rank) {
        (Some(g), _) => parse_indices(g)?,
        (None, Some(0)) => return Err(CliError::Usage("--rank must be at least 1".into())),
        (None, Some(r)) => (0..r).collect(),
        (None, None) => return Err(CliError::Usage("reconstruct needs --group or --rank".into())),
    };
    let (ets, mean) = match &a.from_decomposition {
        Some(path) => {
            let json = EigentripleSetJson::from_json(&read_text(path)?)?;
            (json.to_set()?, json.mean)
        }
        None => {
            let args = SeriesArgs {
                input: a.input.clone().expect("clap requires --input"),
                window: a.window,
                toeplitz: a.toeplitz,
                center: a.center,
            };
            let (series, mean, window) = prepare(&args, a.common.verbose)?;
            (decomposition(&series, window, method(a.toeplitz))?, mean)
        }
    };
    let mut values = reconstruct_from(&ets, &indices)?.into_inner();
    add_mean(&mut values, mean);
    write_values(&a.common, "value", &values)
}

fn write_values(common: &Common, name: &str, values: &[f64]) -> Result<()> {
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(common, |w| write_values_csv(w, Some(name), values)),
        Format::Json => emit_json(common, &serde_json::json!({ name: values })),
    }
}

pub fn forecast(a: ForecastArgs) -> Result<()> {
    let (series, mean, window) = prepare(&a.series, a.common.verbose)?;
    if a.series.toeplitz {
        eprintln!(
            "ssa-lab: warning: Toeplitz forecasting is unreliable for nonstationary series \
             (trends, growth, damping); prefer the basic decomposition"
        );
    }
    let params = ForecastParams {
        reconstruction_window: window,
        recurrence_window: a.lrf_window.unwrap_or(window),
        rank: a.rank,
        steps: a.steps,
        method: method(a.series.toeplitz),
    };
    let mut values = ssa_forecast(&series, params)?;
    add_mean(&mut values, mean);
    write_values(&a.common, "forecast", &values)
}

fn parse_method(s: &str) -> Result<EstimationMethod> {
    s.parse::<EstimationMethod>().map_err(|_| {
        CliError::Usage(format!(
            "unknown method '{s}' (expected one of: {})",
            EstimationMethod::ALL.map(|m| m.name()).join(", ")
        ))
    })
}

fn basic_only(args: &SeriesArgs, what: &str) -> Result<()> {
    if args.toeplitz {
        return Err(CliError::Usage(format!("{what} uses the basic decomposition; --toeplitz does not apply")));
    }
    Ok(())
}

pub fn estimate(a: EstimateArgs) -> Result<()> {
    basic_only(&a.series, "estimate")?;
    let m = parse_method(&a.method)?;
    let (series, _, window) = prepare(&a.series, a.common.verbose)?;
    let params = estimate_params(&series, window, a.rank, m)?;
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(&a.common, |w| params.write_csv(w)),
        Format::Json => emit_json(&a.common, &params),
    }
}

pub fn pseudospectrum(a: PseudospectrumArgs) -> Result<()> {
    basic_only(&a.series, "pseudospectrum")?;
    let m = parse_method(&a.method)?;
    if m.gives_poles() {
        return Err(CliError::Usage(format!("{m} has no pseudospectrum; use minnorm, music or ev")));
    }
    let (series, _, window) = prepare(&a.series, a.common.verbose)?;
    let ps = estimate_pseudospectrum(&series, window, a.rank, m, a.grid)?;
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(&a.common, |w| ps.write_csv(w)),
        Format::Json => emit_json(&a.common, &ps),
    }
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_json(&read_text(&a.config)?)?;
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let output: Option<PathBuf> = a.common.output.clone().or_else(|| {
        // relative config outputs are resolved next to the config file
        cfg.output.as_ref().map(|o| a.config.parent().unwrap_or(Path::new(".")).join(o))
    });
    if a.common.verbose {
        eprintln!("running {:?} experiment, {} replications, seed {}", cfg.experiment, cfg.reps, cfg.seed);
    }
    if let Some(dir) = output.as_deref().and_then(Path::parent).filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let report = run_experiment(&cfg)?;
    let common = Common { output: output.clone(), format: a.common.format, verbose: a.common.verbose };
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(&common, &report),
        Format::Csv => {
            emit(&common, |w| report.write_csv(w))?;
            // the JSON report goes next to a CSV file
            if let Some(path) = output {
                let json = path.with_extension("json");
                if json != path {
                    emit_json(&Common { output: Some(json), ..common }, &report)?;
                }
            }
            Ok(())
        }
    }
}
