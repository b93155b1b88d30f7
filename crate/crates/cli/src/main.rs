use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use gril::complex::{BiFiltration, GridPoint, GridSpec};
use gril::filtrations::{
    hks_rc_bifiltration, hourglass_bifiltration, hourglass_generate, random_bifiltration, Traversal,
};
use gril::io::{
    emit_features, emit_heatmap, has_node_attributes, parse_bifiltration, read_features, read_tudataset,
    write_tudataset,
};
use gril::landscape::{compute_gril_vector, subgrid_centers, GrilVector};
use gril::rank::{IntervalRegion, RankContext};
use gril::worm::DiscreteWorm;

const HKS_TIME: f64 = 10.0;

#[derive(Parser)]
#[command(name = "gril", version, about = "Generalized rank invariant landscapes of bifiltrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Bifil,
    Tudataset,
}

#[derive(Subcommand)]
enum Command {
    /// GRIL feature vectors for a bifiltration file or a TUDataset directory.
    Compute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        /// Grid size M. Must match the header of a bifiltration file.
        #[arg(long)]
        grid: u32,
        #[arg(long)]
        subgrid_step: u32,
        #[arg(long)]
        kmax: usize,
        /// One or more comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        ell: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        dims: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        heatmaps: Option<PathBuf>,
        /// 0 uses all cores.
        #[arg(long, env = "GRIL_WORKERS", default_value_t = 0)]
        workers: usize,
    },
    /// Writes an HourGlass dataset in TUDataset layout.
    Hourglass {
        #[arg(long)]
        min: u32,
        #[arg(long)]
        max: u32,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generalized rank of one worm.
    Rank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_point)]
        center: GridPoint,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        dim: usize,
    },
    /// Compares the zigzag rank with the limit-to-colimit rank on random inputs.
    CheckOracle {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        max_simplices: usize,
        #[arg(long, default_value_t = 8)]
        grid: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sup-norm distance between rows of two feature files.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

fn parse_point(s: &str) -> Result<GridPoint, String> {
    let (i, j) = s.split_once(',').ok_or("expected i,j")?;
    let i = i.trim().parse().map_err(|_| format!("bad coordinate {i:?}"))?;
    let j = j.trim().parse().map_err(|_| format!("bad coordinate {j:?}"))?;
    Ok(GridPoint::new(i, j))
}

enum Failure {
    Invalid(anyhow::Error),
    Mismatch(usize),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(n)) => {
            eprintln!("error: {n} oracle mismatches");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Compute {
            input,
            format,
            grid,
            subgrid_step,
            kmax,
            ell,
            dims,
            out,
            heatmaps,
            workers,
        } => compute(&input, format, grid, subgrid_step, kmax, &ell, &dims, &out, heatmaps.as_deref(), workers)?,
        Command::Hourglass {
            min,
            max,
            count,
            seed,
            out,
        } => hourglass(min, max, count, seed, &out)?,
        Command::Rank {
            input,
            center,
            width,
            ell,
            dim,
        } => {
            let f = read_bifil(&input)?;
            let worm = DiscreteWorm::new(center, width, ell, f.grid()).map_err(anyhow::Error::from)?;
            let r = RankContext::new(&f).compute_rank(&worm, dim).map_err(anyhow::Error::from)?;
            println!("{r}");
        }
        Command::CheckOracle {
            trials,
            max_simplices,
            grid,
            seed,
        } => {
            let mismatches = check_oracle(trials, max_simplices, grid, seed)?;
            println!("{} trials, {mismatches} mismatches", trials);
            if mismatches > 0 {
                return Err(Failure::Mismatch(mismatches));
            }
        }
        Command::Distance { a, b } => distance(&a, &b)?,
    }
    Ok(())
}

fn read_bifil(path: &Path) -> anyhow::Result<BiFiltration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_bifiltration(&text).with_context(|| format!("parsing {}", path.display()))
}

fn dataset_name(dir: &Path) -> anyhow::Result<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str()?.strip_suffix("_A.txt").map(str::to_string))
        .collect();
    names.sort();
    match names.as_slice() {
        [one] => Ok(one.clone()),
        [] => bail!("no <name>_A.txt in {}", dir.display()),
        _ => bail!("several datasets in {}", dir.display()),
    }
}

#[allow(clippy::too_many_arguments)]
fn compute(
    input: &Path,
    format: Format,
    m: u32,
    step: u32,
    kmax: usize,
    ells: &[u32],
    dims: &[usize],
    out: &Path,
    heatmaps: Option<&Path>,
    workers: usize,
) -> anyhow::Result<()> {
    let grid = GridSpec::new(m)?;
    let (ids, labels, filtrations): (Vec<String>, Vec<i64>, Vec<BiFiltration>) = match format {
        Format::Bifil => {
            let f = read_bifil(input)?;
            if f.grid().m() != m {
                bail!("file grid is {} but --grid is {m}", f.grid().m());
            }
            let id = input
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("input")
                .to_string();
            (vec![id], vec![0], vec![f])
        }
        Format::Tudataset => {
            let name = dataset_name(input)?;
            let graphs = read_tudataset(input, &name)?;
            let attributed = has_node_attributes(input, &name);
            let fs = graphs
                .iter()
                .map(|g| {
                    if attributed {
                        hourglass_bifiltration(g, grid)
                    } else {
                        hks_rc_bifiltration(g, HKS_TIME, grid)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let ids = (1..=graphs.len()).map(|i| i.to_string()).collect();
            let labels = graphs.iter().map(|g| g.label().unwrap_or(0)).collect();
            (ids, labels, fs)
        }
    };
    let centers = subgrid_centers(grid, step)?;
    let job = || -> anyhow::Result<Vec<GrilVector>> {
        filtrations
            .par_iter()
            .map(|f| compute_gril_vector(f, &centers, kmax, ells, dims, 1).map_err(anyhow::Error::from))
            .collect()
    };
    let vectors = if workers == 0 {
        job()?
    } else {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build()?.install(job)?
    };
    std::fs::write(out, emit_features(&vectors, &ids, &labels)?)
        .with_context(|| format!("writing {}", out.display()))?;
    if let Some(dir) = heatmaps {
        std::fs::create_dir_all(dir)?;
        for (v, id) in vectors.iter().zip(&ids) {
            for &dim in dims {
                for k in 1..=kmax {
                    for &ell in ells {
                        let path = dir.join(format!("{id}_h{dim}_k{k}_l{ell}.pgm"));
                        std::fs::write(&path, emit_heatmap(v, k, ell, dim)?)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn hourglass(min: u32, max: u32, count: usize, seed: u64, out: &Path) -> anyhow::Result<()> {
    if min > max {
        bail!("--min must not exceed --max");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs = (0..count)
        .map(|i| {
            let traversal = if i % 2 == 0 { Traversal::T1 } else { Traversal::T2 };
            let (n1, n2) = (rng.gen_range(min..=max), rng.gen_range(min..=max));
            hourglass_generate(n1, n2, traversal, rng.gen())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let name = format!("HourGlass_{min}_{max}");
    write_tudataset(out, &name, &graphs)?;
    println!("{}", out.join(format!("{name}_A.txt")).display());
    Ok(())
}

fn check_oracle(trials: usize, max_simplices: usize, m: u32, seed: u64) -> anyhow::Result<usize> {
    if max_simplices == 0 {
        bail!("--max-simplices must be positive");
    }
    let grid = GridSpec::new(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for t in 0..trials {
        let f = random_bifiltration(&mut rng, max_simplices, grid, false);
        let center = GridPoint::new(rng.gen_range(0..=m), rng.gen_range(0..=m));
        let worm = DiscreteWorm::new(center, rng.gen_range(1..=m), rng.gen_range(1..=3), grid)?;
        let region = IntervalRegion::from_staircase(&worm.region())?;
        let ctx = RankContext::new(&f);
        for dim in 0..=1 {
            let zz = ctx.compute_rank(&worm, dim)?;
            let oracle = ctx.rank_oracle(&region, dim)?;
            if zz != oracle {
                mismatches += 1;
                eprintln!("trial {t} dim {dim}: zigzag {zz}, oracle {oracle}");
            }
        }
    }
    Ok(mismatches)
}

fn distance(a: &Path, b: &Path) -> anyhow::Result<()> {
    let read = |p: &Path| -> anyhow::Result<_> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        read_features(&text).with_context(|| format!("parsing {}", p.display()))
    };
    let (cols_a, rows_a) = read(a)?;
    let (cols_b, rows_b) = read(b)?;
    if cols_a != cols_b {
        bail!("feature files have different columns");
    }
    if rows_a.len() != rows_b.len() {
        bail!("feature files have {} and {} rows", rows_a.len(), rows_b.len());
    }
    for (ra, rb) in rows_a.iter().zip(&rows_b) {
        let d = ra
            .values
            .iter()
            .zip(&rb.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        println!("{}\t{}\t{d}", ra.id, rb.id);
    }
    if rows_a.is_empty() {
        return Err(anyhow!("feature files have no rows"));
    }
    Ok(())
}
