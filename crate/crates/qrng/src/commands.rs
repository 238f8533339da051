//! The work behind each subcommand. Every function writes its artifacts and
//! returns the text to print on standard output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qrng_core::audit::{self, AuditOptions, Scheme};
use qrng_core::bits::{self, BitStream};
use qrng_core::optics::{self, CountRecord, MeasurementSetting};
use qrng_core::state::{self, from_pure, FidelityConvention};
use qrng_core::tomography::{self, BootstrapConfig};
use qrng_core::DensityMatrix;
use serde::Serialize;

use crate::config::{self, RunConfig};
use crate::error::{AppError, Result};
use crate::format::{self, AuditReportJson, CountRecordJson, ReconstructionReport, StateJson};
use crate::ingest;
use crate::manifest::{self, Manifest, OutputDir};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub convention: FidelityConvention,
    /// `None` picks each command's default: JSON files, or a text table
    /// for the reproduction report.
    pub format: Option<OutputFormat>,
}

impl Globals {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

fn setting_slug(s: &MeasurementSetting) -> String {
    match s.bases() {
        Some((a, None)) => a.name().to_string(),
        Some((a, Some(b))) => format!("{}-{}", a.name(), b.name()),
        None => "custom".to_string(),
    }
}

pub fn simulate(config_path: &Path, globals: &Globals) -> Result<String> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(seed) = globals.seed {
        config.seed = seed;
    }
    let dir = globals
        .out
        .clone()
        .or_else(|| {
            config
                .output_dir
                .as_ref()
                .map(|d| config_path.parent().unwrap_or(Path::new(".")).join(d))
        })
        .ok_or_else(|| {
            AppError::validation("output_dir: not set in the config and no --out given")
        })?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let run = config.validate(base)?;

    let records = run
        .settings
        .iter()
        .map(|s| {
            optics::simulate_counts(
                &run.source,
                s,
                run.trials_per_setting,
                &run.options,
                run.seed,
            )
        })
        .collect::<qrng_core::Result<Vec<CountRecord>>>()?;

    let mut out = OutputDir::create(&dir)?;
    match globals.format.unwrap_or_default() {
        OutputFormat::Json => {
            for (i, r) in records.iter().enumerate() {
                let name = format!("record_{i:02}_{}.json", setting_slug(&r.setting));
                out.write_json(&name, &CountRecordJson::from(r))?;
            }
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            ingest::write_csv(&mut buf, &records)?;
            out.write("records.csv", &buf)?;
        }
    }
    let n_files = out.outputs().len();
    let m = out.finish("simulate", config.hash()?, run.seed)?;
    Ok(format!(
        "simulated {} settings x {} trials from {} (seed {})\nwrote {n_files} files and {} to {}\n",
        records.len(),
        run.trials_per_setting,
        run.source.label(),
        run.seed,
        manifest::FILE_NAME,
        dir.display()
    ) + &format!("config hash {}\n", m.config_hash))
}

pub struct TomoArgs {
    pub records: PathBuf,
    pub dim: usize,
    pub truth: Option<PathBuf>,
    pub bootstrap: usize,
}

pub fn tomo(args: &TomoArgs, globals: &Globals) -> Result<String> {
    let records = ingest::load_records(&args.records)?;
    if let Some(r) = records.iter().find(|r| r.setting.dim() != args.dim) {
        return Err(AppError::validation(format!(
            "record for {} does not match --dim {}",
            r.setting, args.dim
        )));
    }
    let rec = tomography::reconstruct(&records, args.dim)?;
    let truth = args.truth.as_deref().map(format::read_state).transpose()?;
    let mut report = ReconstructionReport::new(&rec);
    if let Some(t) = &truth {
        report.fidelity_to_truth = Some(state::fidelity(rec.state(), t, globals.convention)?);
    }
    if args.bootstrap > 0 {
        let cfg = BootstrapConfig {
            target: truth.clone(),
            convention: globals.convention,
            ..BootstrapConfig::new(args.bootstrap, globals.seed.unwrap_or(0))
        };
        let summary = tomography::bootstrap_uncertainty(&records, args.dim, &cfg)?;
        report.bootstrap = Some((&summary).into());
    }

    let mut out = OutputDir::create(&globals.out_dir())?;
    out.write_json("reconstruction.json", &report)?;
    out.write_json("state.json", &StateJson::from(rec.state()))?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "reconstructed dim-{} state from {} records",
        args.dim,
        records.len()
    );
    let _ = writeln!(
        text,
        "eigenvalues before projection: {}",
        fmt_list(&rec.projection.eigenvalues_before)
    );
    let _ = writeln!(
        text,
        "eigenvalues after projection:  {}",
        fmt_list(&rec.projection.eigenvalues_after)
    );
    if let Some(f) = report.fidelity_to_truth {
        let _ = writeln!(
            text,
            "fidelity ({}) to truth = {f:.4}",
            globals.convention.as_str()
        );
    }
    if let Some(b) = &report.bootstrap {
        let _ = writeln!(
            text,
            "bootstrap ({} resamples): C = {:.4} +/- {:.4}",
            b.n_resamples, b.coherence.mean, b.coherence.std
        );
    }
    let _ = writeln!(
        text,
        "wrote reconstruction.json and state.json to {}",
        out.path().display()
    );
    Ok(text)
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub struct AuditArgs {
    pub state: PathBuf,
    pub scheme: Scheme,
    pub target: Option<PathBuf>,
    pub target_state: Option<String>,
    pub raw_length: u64,
}

fn load_target(path: &Option<PathBuf>, named: &Option<String>) -> Result<Option<DensityMatrix>> {
    match (path, named) {
        (Some(_), Some(_)) => Err(AppError::validation(
            "give either --target or --target-state, not both",
        )),
        (Some(p), None) => Ok(Some(format::read_state(p)?)),
        (None, Some(n)) => Ok(Some(from_pure(&config::named_state(n)?))),
        (None, None) => Ok(None),
    }
}

pub fn audit(args: &AuditArgs, globals: &Globals) -> Result<String> {
    let rho = format::read_state(&args.state)?;
    let target = load_target(&args.target, &args.target_state)?;
    let options = AuditOptions {
        convention: globals.convention,
        raw_length: args.raw_length,
        ..AuditOptions::default()
    };
    let report = audit::audit(&rho, args.scheme, target.as_ref(), &options)?;
    let json = AuditReportJson::from(&report);

    let mut out = OutputDir::create(&globals.out_dir())?;
    let name = match globals.format.unwrap_or_default() {
        OutputFormat::Json => {
            out.write_json("audit.json", &json)?;
            "audit.json"
        }
        OutputFormat::Csv => {
            out.write("audit.csv", audit_csv(&json)?.as_bytes())?;
            "audit.csv"
        }
    };
    let mut text = report::audit_summary(&report, args.scheme);
    if !rho.is_physical() {
        let _ = writeln!(
            text,
            "warning: input has a negative eigenvalue ({:.4}); values are computed from it as given",
            rho.min_eigenvalue()
        );
    }
    let _ = writeln!(text, "wrote {name} to {}", out.path().display());
    Ok(text)
}

fn audit_csv(r: &AuditReportJson) -> Result<String> {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "p0",
        "p1",
        "coherence_C",
        "min_entropy_bound",
        "empirical_min_entropy",
        "fidelity_to_target",
        "chsh_S",
        "extractable_bits",
    ])?;
    w.write_record([
        r.probabilities[0].to_string(),
        r.probabilities[1].to_string(),
        r.coherence_c.to_string(),
        r.min_entropy_bound.to_string(),
        r.empirical_min_entropy.to_string(),
        opt(r.fidelity_to_target),
        opt(r.chsh_s),
        r.extractable_bits.to_string(),
    ])?;
    let bytes = w
        .into_inner()
        .map_err(|e| AppError::Unexpected(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extractor {
    None,
    VonNeumann,
    Toeplitz,
}

pub struct BitsArgs {
    pub state: PathBuf,
    pub scheme: Scheme,
    pub n: usize,
    pub extractor: Extractor,
    pub out_len: Option<usize>,
}

/// What determines a `bits` run, hashed into its manifest.
#[derive(Serialize)]
struct BitsConfig<'a> {
    state_sha256: String,
    scheme: &'a str,
    n: usize,
    extractor: Extractor,
    out_len: Option<usize>,
    seed: u64,
}

fn bias(b: &BitStream) -> f64 {
    if b.is_empty() {
        0.0
    } else {
        b.count_ones() as f64 / b.len() as f64 - 0.5
    }
}

pub fn bits(args: &BitsArgs, globals: &Globals) -> Result<String> {
    let bytes = std::fs::read(&args.state).map_err(|e| AppError::io(&args.state, e))?;
    let rho = format::read_state(&args.state)?;
    let seed = globals.seed.unwrap_or(0);
    if args.n == 0 {
        return Err(AppError::validation("n: must be at least 1"));
    }
    if args.out_len.is_some() && args.extractor != Extractor::Toeplitz {
        return Err(AppError::validation(
            "out-len: only applies to the toeplitz extractor",
        ));
    }

    // Check the budget before drawing any bits.
    let budget = match args.extractor {
        Extractor::Toeplitz => {
            let options = AuditOptions {
                chsh_angles: None,
                raw_length: args.n as u64,
                ..AuditOptions::default()
            };
            let report = audit::audit(&rho, args.scheme, None, &options)?;
            let budget = report.extractable_bits as usize;
            let requested = args.out_len.unwrap_or(budget);
            if requested > budget {
                return Err(qrng_core::Error::BudgetExceeded { requested, budget }.into());
            }
            Some((budget, requested))
        }
        _ => None,
    };

    let generated = bits::generate_bits(&rho, args.scheme, args.n, seed)?;
    let raw = &generated.stream;
    let extracted = match (args.extractor, budget) {
        (Extractor::None, _) => None,
        (Extractor::VonNeumann, _) => Some(bits::extract_von_neumann(raw)),
        (Extractor::Toeplitz, Some((budget, requested))) => {
            Some(bits::extract_toeplitz(raw, requested, budget, seed)?)
        }
        (Extractor::Toeplitz, None) => unreachable!("budget computed above"),
    };

    let mut out = OutputDir::create(&globals.out_dir())?;
    write_stream(&mut out, "raw", raw)?;
    if let Some(e) = &extracted {
        write_stream(&mut out, "extracted", e)?;
    }
    let config = BitsConfig {
        state_sha256: manifest::sha256_hex(&bytes),
        scheme: args.scheme.as_str(),
        n: args.n,
        extractor: args.extractor,
        out_len: args.out_len,
        seed,
    };
    let m: Manifest = out.finish("bits", manifest::config_hash(&config)?, seed)?;

    let mut text = String::new();
    let _ = writeln!(text, "raw: {} bits, bias {:+.5}", raw.len(), bias(raw));
    if args.scheme == Scheme::CoincidenceHhVv {
        let _ = writeln!(
            text,
            "discarded HV/VH events: {} (rate {:.4})",
            generated.discarded,
            generated.discard_rate()
        );
    }
    if let Some((budget, _)) = budget {
        let _ = writeln!(text, "entropy budget: {budget} bits");
    }
    if let Some(e) = &extracted {
        let _ = writeln!(text, "extracted: {} bits, bias {:+.5}", e.len(), bias(e));
    }
    let _ = writeln!(
        text,
        "wrote {} files to {}",
        m.outputs.len() + 1,
        globals.out_dir().display()
    );
    Ok(text)
}

fn write_stream(out: &mut OutputDir, stem: &str, b: &BitStream) -> Result<()> {
    out.write(&format!("{stem}.bin"), b.as_bytes())?;
    out.write_json(&format!("{stem}.json"), &format::BitSidecar::from(b))?;
    Ok(())
}

pub fn reproduce(globals: &Globals) -> Result<String> {
    let rows = report::reproduction_rows(globals.convention)?;
    let (text, name) = match globals.format {
        None => (
            report::render_table(&rows, globals.convention),
            "reproduction.txt",
        ),
        Some(OutputFormat::Json) => (
            report::render_json(&rows, globals.convention)?,
            "reproduction.json",
        ),
        Some(OutputFormat::Csv) => (report::render_csv(&rows)?, "reproduction.csv"),
    };
    if let Some(dir) = &globals.out {
        let mut out = OutputDir::create(dir)?;
        out.write(name, text.as_bytes())?;
    }
    Ok(text)
}
