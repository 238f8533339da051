use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use qrng_core::audit::Scheme;
use qrng_core::FidelityConvention;

use crate::commands::{self, AuditArgs, BitsArgs, Extractor, Globals, OutputFormat, TomoArgs};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "qrng",
    version,
    about = "Polarization QRNG simulation, tomography and randomness audit"
)]
pub struct Cli {
    /// Seed for every random stream (overrides a config's seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fidelity convention: root = Tr sqrt(sqrt(rho) sigma sqrt(rho)), squared = its square.
    #[arg(long, global = true, value_enum, default_value_t = ConventionArg::Root)]
    pub convention: ConventionArg,
    /// Output format for records, audit reports and the reproduction table.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConventionArg {
    Root,
    Squared,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    /// One photon in HV: H -> 0, V -> 1 (the signal photon of a pair).
    #[value(name = "single_HV", alias = "single-hv")]
    SingleHv,
    /// Both photons in HV: HH -> 0, VV -> 1, HV/VH discarded.
    #[value(name = "coincidence_HH_VV", alias = "coincidence")]
    CoincidenceHhVv,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::SingleHv => Scheme::SingleHv,
            SchemeArg::CoincidenceHhVv => Scheme::CoincidenceHhVv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExtractorArg {
    None,
    #[value(name = "von_neumann", alias = "von-neumann")]
    VonNeumann,
    Toeplitz,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate count records for every setting of a run config.
    Simulate {
        /// Run configuration (JSON).
        config: PathBuf,
    },
    /// Reconstruct a density matrix from count records.
    Tomo {
        /// A record file (JSON or CSV) or a directory of them.
        records: PathBuf,
        #[arg(long, value_parser = ["2", "4"])]
        dim: String,
        /// Known true state, for a fidelity figure.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Number of bootstrap resamples (0 disables, minimum 100).
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
    },
    /// Coherence, min-entropy bound, fidelity and CHSH of a state.
    Audit {
        /// Density matrix (JSON).
        state: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Target state file for the fidelity figure.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Named target instead of a file: H, V, D, A, R, L or phi_plus.
        #[arg(long)]
        target_state: Option<String>,
        /// Raw bit count used for the extractable-bit budget.
        #[arg(long, default_value_t = 1_000_000)]
        raw_length: u64,
    },
    /// Generate raw bits from a state and optionally extract them.
    Bits {
        /// Density matrix (JSON).
        state: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Number of raw bits.
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ExtractorArg::None)]
        extractor: ExtractorArg,
        /// Toeplitz output length (defaults to the full budget).
        #[arg(long)]
        out_len: Option<usize>,
    },
    /// Recompute the reference figures from the bundled measured states.
    #[command(name = "reproduce-paper", visible_alias = "reproduce")]
    Reproduce,
}

pub fn run(cli: Cli) -> Result<String> {
    let globals = Globals {
        seed: cli.seed,
        out: cli.out,
        convention: match cli.convention {
            ConventionArg::Root => FidelityConvention::Root,
            ConventionArg::Squared => FidelityConvention::Squared,
        },
        format: cli.format.map(|f| match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }),
    };
    match cli.command {
        Command::Simulate { config } => commands::simulate(&config, &globals),
        Command::Tomo {
            records,
            dim,
            truth,
            bootstrap,
        } => commands::tomo(
            &TomoArgs {
                records,
                dim: dim.parse().expect("clap restricts --dim to 2 or 4"),
                truth,
                bootstrap,
            },
            &globals,
        ),
        Command::Audit {
            state,
            scheme,
            target,
            target_state,
            raw_length,
        } => commands::audit(
            &AuditArgs {
                state,
                scheme: scheme.into(),
                target,
                target_state,
                raw_length,
            },
            &globals,
        ),
        Command::Bits {
            state,
            scheme,
            n,
            extractor,
            out_len,
        } => commands::bits(
            &BitsArgs {
                state,
                scheme: scheme.into(),
                n,
                extractor: match extractor {
                    ExtractorArg::None => Extractor::None,
                    ExtractorArg::VonNeumann => Extractor::VonNeumann,
                    ExtractorArg::Toeplitz => Extractor::Toeplitz,
                },
                out_len,
            },
            &globals,
        ),
        Command::Reproduce => commands::reproduce(&globals),
    }
}
