use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relu_atlas::enumerate::{enumerate_brute, enumerate_traverse, DEFAULT_MAX_BRUTE_BITS};
use relu_atlas::metric::{combine, euclidean_matrix, hamming_matrix, CombineOp};
use relu_atlas::persistence::{build_filtration_capped, compute_barcodes, DEFAULT_SIMPLEX_CAP};
use relu_atlas::regions::{region_of, Region};
use relu_atlas::sampling::{
    circle_samples, random_orthogonal_anchors, torus_samples, torus_samples_uniform, AnchorFamily, PointSet,
    TorusLayout,
};
use relu_atlas::{BitVector, BoxRegion, DistanceMatrix, EnumerateOptions, Error, NetworkSpec, Tolerances};

#[derive(Parser)]
#[command(name = "relu-atlas", version, about = "Linear regions of ReLU networks and Rips persistence of activation patterns")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// LP feasibility and optimality slack
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_lp: f64,
    /// Chebyshev radius below which a region is lower-dimensional
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_dim: f64,
    /// Pre-activation magnitude treated as zero
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_bit: f64,
}

#[derive(Args)]
struct BoxArgs {
    /// Lower corner of the input box, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "upper")]
    lower: Option<Vec<f64>>,
    /// Upper corner of the input box, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "lower")]
    upper: Option<Vec<f64>>,
}

impl BoxArgs {
    fn bounds(&self) -> Result<Option<BoxRegion>, Error> {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => Ok(Some(BoxRegion::new(l.clone(), u.clone())?)),
            _ => Ok(None),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Brute,
    Traverse,
}

#[derive(Subcommand)]
enum Command {
    /// Activation bit vector of every input point, one 0/1 string per line
    Bits {
        /// Network JSON
        #[arg(long)]
        net: PathBuf,
        /// Point set JSON
        #[arg(long)]
        points: PathBuf,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// All linear regions and their adjacencies
    Enumerate {
        /// Network JSON
        #[arg(long)]
        net: PathBuf,
        /// Brute force over all patterns or traversal from a seed
        #[arg(long, value_enum, default_value_t = Mode::Traverse)]
        mode: Mode,
        #[command(flatten)]
        bounds: BoxArgs,
        /// Starting point for traversal (default: box center or origin)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        seed_point: Option<Vec<f64>>,
        /// Refuse brute force above this many hidden nodes
        #[arg(long, default_value_t = DEFAULT_MAX_BRUTE_BITS)]
        max_brute_bits: usize,
        /// Region file, one JSON object per line
        #[arg(long)]
        regions: Option<PathBuf>,
        /// Edge file, one pair of bit strings per line
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Inequalities, affine map and witness of one region as JSON
    Region {
        /// Network JSON
        #[arg(long)]
        net: PathBuf,
        /// Bit string naming the region
        #[arg(long, conflicts_with = "point", required_unless_present = "point")]
        bits: Option<String>,
        /// Point inside the region, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
        #[command(flatten)]
        bounds: BoxArgs,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Distance matrix in lower-triangular CSV
    Distmat {
        /// Bit vector file (Hamming distance)
        #[arg(long, conflicts_with = "points", required_unless_present = "points")]
        bits: Option<PathBuf>,
        /// Point file (Euclidean distance)
        #[arg(long)]
        points: Option<PathBuf>,
        /// Keep one copy of repeated bit vectors
        #[arg(long)]
        dedup: bool,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Entrywise min or max of two matrices
    Combine {
        /// First lower-triangular CSV matrix
        first: PathBuf,
        /// Second lower-triangular CSV matrix
        second: PathBuf,
        /// Entrywise operation
        #[arg(long, value_enum)]
        op: CombineOp,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rips barcodes of a lower-triangular CSV matrix
    Persist {
        /// Lower-triangular CSV matrix
        matrix: PathBuf,
        /// Highest homology dimension
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
        /// Largest filtration value (default: largest finite entry)
        #[arg(long)]
        t_max: Option<f64>,
        /// Keep bars with birth equal to death
        #[arg(long)]
        include_zero: bool,
        /// Refuse filtrations with more simplices
        #[arg(long, default_value_t = DEFAULT_SIMPLEX_CAP)]
        max_simplices: usize,
        /// Also write a plain-text table
        #[arg(long)]
        table: Option<PathBuf>,
        /// Barcode JSON output (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Square CSV matrix to lower-triangular CSV
    ExportLdm {
        /// Square CSV matrix
        matrix: PathBuf,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evenly spaced points on a circle spanned by two anchors
    SampleCircle {
        /// Anchor JSON
        #[arg(long)]
        anchors: PathBuf,
        /// Index of the anchor used as center
        #[arg(long)]
        offset: Option<usize>,
        /// Number of points
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// First angle
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// End of the angle range, excluded
        #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
        t1: f64,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Points on a torus spanned by four anchors around a fifth
    SampleTorus {
        /// Anchor JSON
        #[arg(long)]
        anchors: PathBuf,
        /// Index of the anchor used as center
        #[arg(long, default_value_t = 4)]
        offset: usize,
        /// Grid size `N1,N2`; uniform layout draws `N1 * N2` points
        #[arg(long, value_delimiter = ',', default_values_t = [10, 10])]
        grid: Vec<usize>,
        /// Tube radius
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Regular grid or uniform random angles
        #[arg(long, value_enum, default_value_t = TorusLayout::Grid)]
        layout: TorusLayout,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random orthonormal anchor vectors
    GenAnchors {
        /// Ambient dimension
        #[arg(long)]
        dim: usize,
        /// Number of anchors
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Output file (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::Parse(_)
        | Error::ParseLine { .. }
        | Error::LayerDimension { .. }
        | Error::NonFinite { .. }
        | Error::Dimension { .. }
        | Error::Json(_)
        | Error::Io(_) => 3,
        Error::Infeasible
        | Error::Degenerate { .. }
        | Error::OnBoundary { .. }
        | Error::Seed(_)
        | Error::IterationLimit(_) => 4,
        Error::ResourceCap(_) => 5,
        Error::RegionFailure { source, .. } => exit_code(source),
        Error::Consistency(_) => 1,
    }
}

fn open(path: &Path) -> Result<Box<dyn BufRead>, Error> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

fn create(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_net(path: &Path) -> Result<NetworkSpec, Error> {
    NetworkSpec::load(open(path)?)
}

fn load_points(path: &Path) -> Result<Vec<Vec<f64>>, Error> {
    Ok(PointSet::load(open(path)?)?.points)
}

fn read_bit_lines(path: &Path) -> Result<Vec<BitVector>, Error> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(line.parse().map_err(|e: Error| Error::ParseLine { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

fn read_matrix(path: &Path) -> Result<DistanceMatrix, Error> {
    DistanceMatrix::read_lower(open(path)?)
}

fn write_points(points: Vec<Vec<f64>>, output: Option<&Path>) -> Result<(), Error> {
    let mut sink = create(output)?;
    writeln!(sink, "{}", PointSet { points }.to_json())?;
    sink.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let g = cli.global;
    let tol = Tolerances { lp: g.tol_lp, dim: g.tol_dim, bit: g.tol_bit };
    tol.validate()?;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    match cli.command {
        Command::Bits { net, points, output } => {
            let net = load_net(&net)?;
            let mut sink = create(output.as_deref())?;
            for p in load_points(&points)? {
                writeln!(sink, "{}", net.bit_vector_with(&p, tol.bit)?)?;
            }
            sink.flush()?;
        }
        Command::Enumerate { net, mode, bounds, seed_point, max_brute_bits, regions, edges } => {
            let net = load_net(&net)?;
            let bounds = bounds.bounds()?;
            let opts = EnumerateOptions { tol, max_brute_bits, rng_seed: g.seed };
            let atlas = match mode {
                Mode::Brute => enumerate_brute(&net, bounds.as_ref(), &opts)?,
                Mode::Traverse => {
                    let seed = match seed_point {
                        Some(p) => p,
                        None => default_seed(&net, bounds.as_ref()),
                    };
                    enumerate_traverse(&net, &seed, bounds.as_ref(), &opts)?
                }
            };
            let mut sink = create(regions.as_deref())?;
            atlas.write_regions(&mut sink)?;
            sink.flush()?;
            if let Some(path) = edges {
                let mut sink = create(Some(&path))?;
                atlas.write_edges(&mut sink)?;
                sink.flush()?;
            }
        }
        Command::Region { net, bits, point, bounds, output } => {
            let net = load_net(&net)?;
            let bounds = bounds.bounds()?;
            let region = match (bits, point) {
                (Some(b), _) => Region::build(&net, b.parse()?, bounds.as_ref(), &tol)?,
                (None, Some(p)) => region_of(&net, &p, bounds.as_ref(), &tol)?,
                (None, None) => return Err(Error::InvalidArgument("pass --bits or --point".into())),
            };
            let mut sink = create(output.as_deref())?;
            serde_json::to_writer_pretty(&mut sink, &region.to_dump())?;
            writeln!(sink)?;
            sink.flush()?;
        }
        Command::Distmat { bits, points, dedup, output } => {
            let d = match (bits, points) {
                (Some(path), _) => hamming_matrix(&read_bit_lines(&path)?, dedup)?,
                (None, Some(path)) => euclidean_matrix(&load_points(&path)?)?,
                (None, None) => return Err(Error::InvalidArgument("pass --bits or --points".into())),
            };
            let mut sink = create(output.as_deref())?;
            d.write_lower(&mut sink)?;
            sink.flush()?;
        }
        Command::Combine { first, second, op, output } => {
            let d = combine(&read_matrix(&first)?, &read_matrix(&second)?, op)?;
            let mut sink = create(output.as_deref())?;
            d.write_lower(&mut sink)?;
            sink.flush()?;
        }
        Command::Persist { matrix, max_dim, t_max, include_zero, max_simplices, table, output } => {
            let d = read_matrix(&matrix)?;
            let filtration = build_filtration_capped(&d, max_dim, t_max, max_simplices)?;
            let mut barcode = compute_barcodes(&filtration)?;
            if !include_zero {
                barcode = barcode.without_zero_length();
            }
            let mut sink = create(output.as_deref())?;
            writeln!(sink, "{}", barcode.to_json())?;
            sink.flush()?;
            if let Some(path) = table {
                let mut sink = create(Some(&path))?;
                barcode.write_table(&mut sink)?;
                sink.flush()?;
            }
        }
        Command::ExportLdm { matrix, output } => {
            let d = DistanceMatrix::read_square(open(&matrix)?)?;
            let mut sink = create(output.as_deref())?;
            d.write_lower(&mut sink)?;
            sink.flush()?;
        }
        Command::SampleCircle { anchors, offset, count, t0, t1, output } => {
            let family = AnchorFamily::new(load_points(&anchors)?, offset)?;
            write_points(circle_samples(&family, count, (t0, t1))?, output.as_deref())?;
        }
        Command::SampleTorus { anchors, offset, grid, alpha, layout, output } => {
            let [n1, n2] = grid[..] else {
                return Err(Error::InvalidArgument("--grid takes two sizes, N1,N2".into()));
            };
            let family = AnchorFamily::new(load_points(&anchors)?, Some(offset))?;
            let points = match layout {
                TorusLayout::Grid => torus_samples(&family, (n1, n2), alpha)?,
                TorusLayout::Uniform => torus_samples_uniform(&family, n1 * n2, alpha, g.seed)?,
            };
            write_points(points, output.as_deref())?;
        }
        Command::GenAnchors { dim, count, output } => {
            write_points(random_orthogonal_anchors(dim, count, g.seed)?, output.as_deref())?;
        }
    }
    Ok(())
}

/// Center of the box, or the origin without one; traversal redraws it if it
/// lands on a hyperplane.
fn default_seed(net: &NetworkSpec, bounds: Option<&BoxRegion>) -> Vec<f64> {
    match bounds {
        Some(b) => b.lower().iter().zip(b.upper()).map(|(l, u)| 0.5 * (l + u)).collect(),
        None => vec![0.0; net.input_dim()],
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
