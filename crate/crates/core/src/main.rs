use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lgpca::features::{select_locations, Selection};
use lgpca::filterbank::{build_bank, FilterParams, MagnitudeStack};
use lgpca::harness::{
    self, load_samples, run_identify_evaluate, run_shift_experiment, run_train_enroll, shift_csv,
    Eye, Manifest, Pipeline, PipelineConfig, SynthParams, DEFAULT_SHIFTS,
};
use lgpca::imaging::{pgm, two_point_crop_mask, NormalizationMethod, FACE_SIZE};
use lgpca::metrics::{cmc_csv, roc_csv};
use lgpca::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lgpca",
    version,
    about = "Log-Gabor + whitened PCA face identification"
)]
struct Cli {
    /// Pipeline configuration file (key=value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print unmasked pixel counts of the normalization masks and the resulting feature counts.
    MaskStats,
    /// Write normalized faces of a manifest as PGM files.
    Normalize {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Write the filter bank's transfer functions as centered PGM images.
    BuildBank {
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train the subspace on a manifest's images and enroll them as the gallery.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Identify probes against a trained model and print the report.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        set: Option<String>,
    },
    /// Eye-marker shift experiment on 2-point models.
    ShiftExp {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value = "left")]
        eye: String,
        /// Comma-separated percentages of the interocular distance.
        #[arg(long, value_delimiter = ',')]
        shifts: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate and write report.txt, cmc.csv and roc.csv.
    ExportReport {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate a synthetic dataset with gallery and probe sets.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 40)]
        identities: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn feature_count(
    method: NormalizationMethod,
    params: &FilterParams,
    selection: &Selection,
) -> Result<usize> {
    let mask = method.mask().clone();
    let rasters = vec![vec![0.0f64; FACE_SIZE * FACE_SIZE]; params.filter_count()];
    let stack = MagnitudeStack::new(
        FACE_SIZE,
        FACE_SIZE,
        params.num_orients,
        params.num_scales,
        rasters,
        mask,
    )?;
    Ok(select_locations(&stack, selection, params)?.total() * params.num_scales)
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Some(PipelineConfig::read(path)?),
        None => None,
    };
    let pipeline_config = config.unwrap_or_default();
    let samples = |manifest: &Path, set: &Option<String>| -> Result<Vec<harness::Sample>> {
        let entries = Manifest::read(manifest)?.subset(set.as_deref());
        if entries.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} has no rows for the selected set",
                manifest.display()
            )));
        }
        load_samples(&entries)
    };

    match cli.command {
        Command::MaskStats => {
            let c = &pipeline_config;
            println!(
                "mask_3pt={}",
                NormalizationMethod::ThreePoint.expected_unmasked()
            );
            println!("mask_2pt_crop={}", two_point_crop_mask().unmasked_count());
            println!(
                "mask_2pt={}",
                NormalizationMethod::TwoPoint.expected_unmasked()
            );
            let unmasked = Selection {
                use_mask: false,
                ..c.selection
            };
            println!(
                "features_unmasked={}",
                feature_count(NormalizationMethod::ThreePoint, &c.filter, &unmasked)?
            );
            for method in [
                NormalizationMethod::ThreePoint,
                NormalizationMethod::TwoPoint,
            ] {
                println!(
                    "features_{method}={}",
                    feature_count(method, &c.filter, &c.selection)?
                );
            }
        }
        Command::Normalize {
            manifest,
            set,
            out_dir,
        } => {
            let pipeline = Pipeline::new(&pipeline_config)?;
            let entries = Manifest::read(&manifest)?.subset(set.as_deref());
            let loaded = load_samples(&entries)?;
            create_dir(&out_dir)?;
            for (entry, sample) in entries.iter().zip(&loaded) {
                let face = pipeline.normalize(sample)?;
                let stem = Path::new(&entry.path)
                    .file_stem()
                    .map_or_else(|| entry.label.clone(), |s| s.to_string_lossy().into_owned());
                pgm::write(out_dir.join(format!("{stem}_norm.pgm")), face.image())?;
            }
            println!("normalized {} images", loaded.len());
        }
        Command::BuildBank { out_dir } => {
            let params = pipeline_config.filter;
            let bank = build_bank::<f64>(FACE_SIZE, FACE_SIZE, &params)?;
            create_dir(&out_dir)?;
            for filter in bank.filters() {
                let (o, s) = (filter.orient_index(), filter.scale_index());
                let view = filter.centered();
                let img = pgm::rescale_for_display(view.width(), view.height(), view.pixels())?;
                pgm::write(out_dir.join(format!("filter_o{o}_s{s}.pgm")), &img)?;
                println!(
                    "o={o} s={s} wavelength={} orientation={}",
                    params.wavelength(s),
                    params.orientation(o)
                );
            }
        }
        Command::Train { manifest, set, out } => {
            let gallery = samples(&manifest, &set)?;
            let container = run_train_enroll(&gallery, &pipeline_config)?;
            harness::save(&container, &out)?;
            println!(
                "trained on {} images: N={} q={} components={} layout={}",
                gallery.len(),
                container.model.dim(),
                container.model.components(),
                container.components,
                container.layout()
            );
        }
        Command::Evaluate {
            model,
            manifest,
            set,
        } => {
            let container = harness::load(&model)?;
            let probes = samples(&manifest, &set)?;
            let report = run_identify_evaluate(&container, &probes, config.as_ref())?;
            print!("{}", report.to_key_values());
        }
        Command::ShiftExp {
            model,
            manifest,
            set,
            eye,
            shifts,
            out,
        } => {
            let container = harness::load(&model)?;
            let probes = samples(&manifest, &set)?;
            let eye: Eye = eye.parse()?;
            let shifts = shifts.unwrap_or_else(|| DEFAULT_SHIFTS.to_vec());
            let rows = run_shift_experiment(&container, &probes, &shifts, eye)?;
            let table = shift_csv(&rows)?;
            match out {
                Some(path) => write(&path, table)?,
                None => print!("{table}"),
            }
        }
        Command::ExportReport {
            model,
            manifest,
            set,
            out_dir,
        } => {
            let container = harness::load(&model)?;
            let probes = samples(&manifest, &set)?;
            let report = run_identify_evaluate(&container, &probes, config.as_ref())?;
            create_dir(&out_dir)?;
            write(&out_dir.join("report.txt"), report.to_key_values())?;
            write(&out_dir.join("cmc.csv"), cmc_csv(&report.cmc)?)?;
            write(&out_dir.join("roc.csv"), roc_csv(&report.roc)?)?;
            println!("wrote report to {}", out_dir.display());
        }
        Command::Synth {
            out_dir,
            identities,
            seed,
        } => {
            let params = SynthParams {
                identities,
                seed,
                ..SynthParams::default()
            };
            let data = harness::generate(&params)?;
            let manifest = harness::write_dataset(&data, &out_dir)?;
            println!("wrote {} images and manifest.csv", manifest.entries.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
