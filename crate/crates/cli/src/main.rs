//! `strata`: stratify momentum images and covers, compute Duistermaat-Heckman
//! densities, render planar pictures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use strata_core::cover::PiecewiseAffineCover;
use strata_core::dh::{all_densities_checked, fiber_volume, mc_fiber_volume, DEFAULT_SEED};
use strata_core::io::{InputFile, Provenance, StratificationFile};
use strata_core::linalg::{format_point, rat_to_f64};
use strata_core::par::Execution;
use strata_core::render::{render_svg, RenderOptions};
use strata_core::stratifier::stratify_with;
use strata_core::toric::{momentum_cover, ToricAction};
use strata_core::Error;

#[derive(Parser)]
#[command(name = "strata", version, about = "Exact affine stratifications and Duistermaat-Heckman densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Input file (toric spec or cover JSON)
    input: PathBuf,
    /// Write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long, env = "STRATA_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Held-out points per chamber (dh) or random points per chamber (oracle)
    #[arg(long, default_value_t = 3)]
    samples: usize,
    /// Run the library single-threaded
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the closure condition of a cover; exit 3 when it fails
    ValidateCover(Common),
    /// Compute the stratification as JSON
    Stratify(Common),
    /// Stratify a toric input and attach a density polynomial to every chamber
    Dh(Common),
    /// Draw a stratification file of dimension 1 or 2 as SVG
    Render {
        #[command(flatten)]
        common: Common,
        /// Leave out coordinate and density labels
        #[arg(long)]
        no_labels: bool,
    },
    /// Compare exact fiber volumes with Monte-Carlo estimates
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Monte-Carlo trials per point
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
}

fn read(path: &Path) -> anyhow::Result<(String, Provenance)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let provenance = Provenance::for_input(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((text, provenance))
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

enum Loaded {
    Toric(Box<ToricAction>),
    Cover(PiecewiseAffineCover),
}

impl Loaded {
    fn cover(&self) -> anyhow::Result<PiecewiseAffineCover> {
        Ok(match self {
            Loaded::Toric(a) => momentum_cover(a)?,
            Loaded::Cover(c) => c.clone(),
        })
    }

    fn toric(self) -> anyhow::Result<ToricAction> {
        match self {
            Loaded::Toric(a) => Ok(*a),
            Loaded::Cover(_) => Err(Error::Parse("this command needs a toric spec".into()).into()),
        }
    }
}

fn load(text: &str) -> anyhow::Result<Loaded> {
    Ok(match InputFile::parse(text)? {
        InputFile::Toric(t) => Loaded::Toric(Box::new(t.to_action()?)),
        InputFile::Cover(c) => Loaded::Cover(c.to_cover()?),
    })
}

/// Validates first so that a failing cover reports its offending members.
fn checked_cover(loaded: &Loaded, exec: Execution) -> anyhow::Result<PiecewiseAffineCover> {
    let cover = loaded.cover()?;
    let report = cover.validate_with(exec);
    if !report.valid {
        eprint!("{report}");
        return Err(report.into_result().unwrap_err().into());
    }
    Ok(cover)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::ValidateCover(c) => {
            let (text, _) = read(&c.input)?;
            let cover = load(&text)?.cover()?;
            let report = cover.validate_with(c.exec());
            emit(&c.out, &report.to_string())?;
            report.into_result()?;
        }
        Command::Stratify(c) => {
            let (text, provenance) = read(&c.input)?;
            let loaded = load(&text)?;
            let cover = checked_cover(&loaded, c.exec())?;
            let s = stratify_with(&cover, c.exec())?;
            emit(&c.out, &StratificationFile::new(&s, &Default::default(), provenance).to_json())?;
        }
        Command::Dh(c) => {
            let (text, provenance) = read(&c.input)?;
            let loaded = load(&text)?;
            let cover = checked_cover(&loaded, c.exec())?;
            let s = stratify_with(&cover, c.exec())?;
            let a = loaded.toric()?;
            let d = all_densities_checked(&a, &s, c.seed, c.samples, c.exec())?;
            emit(&c.out, &StratificationFile::new(&s, &d, provenance).to_json())?;
        }
        Command::Render { common: c, no_labels } => {
            let (text, _) = read(&c.input)?;
            let (s, d) = StratificationFile::parse(&text)?.to_stratification()?;
            let opts = RenderOptions { label_vertices: !no_labels, label_densities: !no_labels, ..Default::default() };
            emit(&c.out, &render_svg(&s, &d, &opts)?)?;
        }
        Command::Oracle { common: c, trials } => {
            let (text, _) = read(&c.input)?;
            let loaded = load(&text)?;
            let cover = checked_cover(&loaded, c.exec())?;
            let s = stratify_with(&cover, c.exec())?;
            let a = loaded.toric()?;
            let mut out = String::from("stratum\tpoint\texact\testimate\tstd_error\tagrees\n");
            let mut failures = 0;
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(c.seed);
            for st in s.top_strata() {
                let cells: Vec<_> = st.cells.iter().filter(|x| x.dim() == st.dim).collect();
                for i in 0..c.samples {
                    let x = cells[i % cells.len()].random_point(&mut rng);
                    let exact = fiber_volume(&a, &x)?.volume;
                    let est = mc_fiber_volume(&a, &x, trials, c.seed.wrapping_add(i as u64))?;
                    let ok = est.agrees_with(rat_to_f64(&exact), 4.0);
                    failures += usize::from(!ok);
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\n",
                        st.id,
                        format_point(&x),
                        strata_core::linalg::format_rat(&exact),
                        est.estimate,
                        est.std_error,
                        if ok { "yes" } else { "no" }
                    ));
                }
            }
            emit(&c.out, &out)?;
            if failures > 0 {
                bail!(Error::Internal(format!("{failures} Monte-Carlo estimates off by more than 4 standard errors")));
            }
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::Parse(_)
            | Error::DimensionMismatch { .. }
            | Error::NonIntegralInput
            | Error::RankDeficient { .. }
            | Error::UnboundedPolytope
            | Error::EmptyPolytope,
        ) => 2,
        Some(Error::InvalidCover { .. }) => 3,
        Some(Error::InterpolationInconsistent { .. }) => 5,
        Some(Error::UnsupportedDimension(_)) => 6,
        Some(_) => 4,
        // unreadable or unwritable files
        None => 2,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
