//! Command-line pipeline over `shapesim`: score shapes, build the pairwise
//! matrix, then cluster, embed and plot it. Stages exchange CSV files.

pub mod svg;

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use shapesim::analysis::{
    block_cluster, correlation_embed, distances_from_coords, fit_similarity_2d, gmds_embed, kmeans,
    least_squares_rescale, pca_project, quality, torgerson_embed, triangle_violations, ClusterAssignment,
    CorrelationOptions, Embedding, GaOptions, GmdsOptions, QualityReport,
};
use shapesim::geometry::Shape;
use shapesim::io;
use shapesim::score::{dissimilarity, dissimilarity_matrix, DissimilarityMatrix, ScoreOptions};

/// Overlap-based shape dissimilarity and matrix analysis.
#[derive(Debug, Clone, Parser)]
#[command(name = "shapesim", version)]
pub struct RunConfig {
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    /// Initial orientations per pair.
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Relative finite-difference step.
    #[arg(long, default_value_t = 1e-6)]
    pub grad_step: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

impl ScoreArgs {
    fn options(&self, seed: u64) -> ScoreOptions {
        ScoreOptions {
            n_starts: self.starts,
            max_iters: self.max_iters,
            grad_step: self.grad_step,
            tol: self.tol,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Dissimilarity of B placed onto A, in percent.
    Score {
        fixed: PathBuf,
        mobile: PathBuf,
        #[command(flatten)]
        opts: ScoreArgs,
    },
    /// Pairwise matrix over every `*.json` shape in a directory.
    Matrix {
        dir: PathBuf,
        /// Output CSV [default: <out-dir>/matrix.csv].
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: ScoreArgs,
    },
    /// Count triangle-inequality violations.
    Triangles { matrix: PathBuf },
    /// Block clustering by genetic search.
    BlockCluster {
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 50)]
        population: usize,
        #[arg(long, default_value_t = 500)]
        generations: usize,
        #[arg(long, default_value_t = 0.2)]
        mutation_rate: f64,
        /// Output CSV [default: <out-dir>/assignment.csv].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stress-minimizing embedding.
    Gmds {
        matrix: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        /// Output CSV [default: <out-dir>/embedding.csv].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical (eigendecomposition) embedding.
    Torgerson {
        matrix: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-means on embedding coordinates.
    Kmeans {
        embedding: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation-maximizing embedding.
    Correlate {
        matrix: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Principal-component projection of an embedding.
    Project {
        embedding: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quality report and figures for an embedding of a matrix.
    Report {
        matrix: PathBuf,
        embedding: PathBuf,
        /// Cluster assignment CSV used to color the map.
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// CSV `label,x,y` of reference positions; the map is fitted onto
        /// them by a least-squares similarity before drawing.
        #[arg(long)]
        anchors: Option<PathBuf>,
        /// Allow a mirror image in the anchor fit.
        #[arg(long)]
        allow_reflection: bool,
        /// Rescale fitted distances by the least-squares factor first
        /// (appropriate for correlation embeddings).
        #[arg(long)]
        rescale: bool,
        /// Also write the data-versus-fit scatter plot.
        #[arg(long)]
        scatter: bool,
    },
}

/// Loads shape files, requiring distinct names.
pub fn load_shapes(paths: &[PathBuf]) -> Result<Vec<Shape>> {
    let mut seen: HashMap<String, &Path> = HashMap::new();
    let mut shapes = Vec::with_capacity(paths.len());
    for p in paths {
        let shape = io::read_shape_file(p).with_context(|| format!("loading {}", p.display()))?;
        if let Some(prev) = seen.insert(shape.name().to_string(), p) {
            bail!("duplicate shape name `{}` in {} and {}", shape.name(), prev.display(), p.display());
        }
        shapes.push(shape);
    }
    Ok(shapes)
}

/// Every `*.json` file in `dir`, sorted by file name.
pub fn shape_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    if files.is_empty() {
        bail!("no .json shape files in {}", dir.display());
    }
    Ok(files)
}

fn target(cfg: &RunConfig, out: &Option<PathBuf>, default: &str) -> Result<PathBuf> {
    let path = out.clone().unwrap_or_else(|| cfg.out_dir.join(default));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(path)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_matrix(path: &Path) -> Result<DissimilarityMatrix> {
    io::read_matrix_file(path).with_context(|| format!("loading {}", path.display()))
}

fn load_embedding(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    io::read_embedding_file(path).with_context(|| format!("loading {}", path.display()))
}

fn quality_lines(report: &QualityReport) -> String {
    format!(
        "norm_ratio_percent: {:.6}\nresidual_ratio_percent: {:.6}\npythagoras_defect: {:.3e}\n",
        report.norm_ratio, report.residual_ratio, report.pythagoras_defect
    )
}

/// Writes an embedding CSV plus `quality.txt` comparing it with the matrix.
fn finish_embedding(cfg: &RunConfig, m: &DissimilarityMatrix, e: &Embedding, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    let path = target(cfg, out, "embedding.csv")?;
    io::write_embedding_csv(&m.labels, &e.coords, create(&path)?)?;
    let fitted = e.distances();
    let mut text = format!("method: {}\nobjects: {}\ndimension: {}\n", e.method, m.len(), e.dim());
    if let Some(seed) = e.seed {
        text += &format!("seed: {seed}\n");
    }
    if let Some(s) = e.stress {
        text += &format!("stress: {s:.6e}\n");
    }
    if let Some(r) = e.r {
        text += &format!("pearson_r: {r:.12}\n");
    }
    if let Some(u) = e.usable_terms {
        text += &format!("usable_terms: {u}\n");
    }
    if let Some(ev) = &e.eigenvalues {
        let shown: Vec<String> = ev.iter().map(|v| format!("{v:.6e}")).collect();
        text += &format!("eigenvalues: {}\n", shown.join(" "));
    }
    if let Some(neg) = e.negative_eigen_mass {
        text += &format!("negative_eigen_mass: {neg:.6e}\n");
    }
    let q = if e.r.is_some() {
        // Correlation ignores scale; compare after the least-squares rescale.
        let (factor, scaled) = least_squares_rescale(&m.entries, &fitted)?;
        text += &format!("rescale_factor: {factor:.12}\n");
        quality(&m.entries, &scaled)?
    } else {
        quality(&m.entries, &fitted)?
    };
    text += &quality_lines(&q);
    for w in &e.warnings {
        text += &format!("warning: {w}\n");
    }
    let qpath = cfg.out_dir.join("quality.txt");
    fs::create_dir_all(&cfg.out_dir)?;
    write_text(&qpath, &text)?;
    write!(stdout, "{text}")?;
    writeln!(stdout, "wrote {} and {}", path.display(), qpath.display())?;
    Ok(())
}

fn write_assignment(cfg: &RunConfig, labels: &[String], a: &ClusterAssignment, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    let path = target(cfg, out, "assignment.csv")?;
    io::write_assignment_csv(labels, a, create(&path)?)?;
    writeln!(stdout, "objective: {:.6}\neffective_k: {}", a.objective, a.effective_k())?;
    for c in 0..a.k {
        let members: Vec<&str> = a.members(c).into_iter().map(|i| labels[i].as_str()).collect();
        let centroid = a.centroid_index[c].map_or("-", |i| labels[i].as_str());
        writeln!(stdout, "cluster {c} (centroid {centroid}): {}", members.join(" "))?;
    }
    writeln!(stdout, "wrote {}", path.display())?;
    Ok(())
}

fn read_anchors(path: &Path) -> Result<HashMap<String, [f64; 2]>> {
    let (labels, coords) = load_embedding(path)?;
    if coords.ncols() != 2 {
        bail!("{}: anchors need exactly two coordinates", path.display());
    }
    Ok(labels.into_iter().enumerate().map(|(i, l)| (l, [coords[(i, 0)], coords[(i, 1)]])).collect())
}

/// Fits the 2D map onto whichever labels appear in the anchor file.
fn align_to_anchors(labels: &[String], coords: &DMatrix<f64>, anchors: &HashMap<String, [f64; 2]>, allow_reflection: bool) -> Result<(DMatrix<f64>, f64)> {
    let matched: Vec<usize> = (0..labels.len()).filter(|&i| anchors.contains_key(&labels[i])).collect();
    if matched.len() < 2 {
        bail!("at least two embedding labels must appear in the anchor file, found {}", matched.len());
    }
    let p = DMatrix::from_fn(matched.len(), 2, |r, c| coords[(matched[r], c)]);
    let q = DMatrix::from_fn(matched.len(), 2, |r, c| anchors[&labels[matched[r]]][c]);
    let fit = fit_similarity_2d(&p, &q, allow_reflection)?;
    let (sin, cos) = fit.angle.sin_cos();
    let aligned = DMatrix::from_fn(coords.nrows(), 2, |i, c| {
        let x = coords[(i, 0)];
        let y = if fit.reflected { -coords[(i, 1)] } else { coords[(i, 1)] };
        let v = if c == 0 { cos * x - sin * y } else { sin * x + cos * y };
        fit.scale * v + fit.translation[c]
    });
    Ok((aligned, fit.rms))
}

pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.command {
        Command::Score { fixed, mobile, opts } => {
            let shapes = load_shapes(&[fixed.clone(), mobile.clone()])?;
            let res = dissimilarity(&shapes[0], &shapes[1], &opts.options(cfg.seed))?;
            let t = res.best_transform;
            writeln!(stdout, "score: {:.4}", res.score)?;
            writeln!(
                stdout,
                "transform: scale {:.6} angle {:.6} translation ({:.6}, {:.6})",
                t.scale(),
                t.angle,
                t.tx,
                t.ty
            )?;
            writeln!(stdout, "evaluations: {}", res.evaluations)?;
        }
        Command::Matrix { dir, out, opts } => {
            let shapes = load_shapes(&shape_files(dir)?)?;
            let m = dissimilarity_matrix(&shapes, &opts.options(cfg.seed))?;
            let path = target(cfg, out, "matrix.csv")?;
            io::write_matrix_csv(&m, create(&path)?)?;
            writeln!(stdout, "shapes: {}\nmax_asymmetry: {:.4}\nwrote {}", m.len(), m.asymmetry_diag, path.display())?;
        }
        Command::Triangles { matrix } => {
            let m = load_matrix(matrix)?;
            let rep = triangle_violations(&m.entries);
            writeln!(
                stdout,
                "violating_triples: {} of {}\nviolating_pairs: {} of {}",
                rep.count(),
                m.len() * (m.len().saturating_sub(1)) * (m.len().saturating_sub(2)) / 6,
                rep.violating_pairs,
                rep.pairs
            )?;
        }
        Command::BlockCluster { matrix, k, restarts, population, generations, mutation_rate, out } => {
            let m = load_matrix(matrix)?;
            let opts = GaOptions {
                population: *population,
                generations: *generations,
                mutation_rate: *mutation_rate,
                restarts: *restarts,
                seed: cfg.seed,
            };
            let a = block_cluster(&m.entries, *k, &opts)?;
            write_assignment(cfg, &m.labels, &a, out, stdout)?;
        }
        Command::Gmds { matrix, dim, starts, max_iters, out } => {
            let m = load_matrix(matrix)?;
            let opts = GmdsOptions { starts: *starts, max_iters: *max_iters, seed: cfg.seed, ..Default::default() };
            let e = gmds_embed(&m.entries, *dim, &opts)?;
            finish_embedding(cfg, &m, &e, out, stdout)?;
        }
        Command::Torgerson { matrix, dim, out } => {
            let m = load_matrix(matrix)?;
            let e = torgerson_embed(&m.entries, *dim)?;
            finish_embedding(cfg, &m, &e, out, stdout)?;
        }
        Command::Correlate { matrix, dim, starts, max_iters, out } => {
            let m = load_matrix(matrix)?;
            let opts = CorrelationOptions { starts: *starts, max_iters: *max_iters, seed: cfg.seed, ..Default::default() };
            let e = correlation_embed(&m.entries, *dim, &opts)?;
            finish_embedding(cfg, &m, &e, out, stdout)?;
        }
        Command::Kmeans { embedding, k, out } => {
            let (labels, coords) = load_embedding(embedding)?;
            let res = kmeans(&coords, *k, cfg.seed)?;
            writeln!(stdout, "iterations: {}", res.iterations)?;
            write_assignment(cfg, &labels, &res.assignment, out, stdout)?;
        }
        Command::Project { embedding, dim, out } => {
            let (labels, coords) = load_embedding(embedding)?;
            let p = pca_project(&coords, *dim)?;
            let path = target(cfg, out, "projection.csv")?;
            io::write_embedding_csv(&labels, &p, create(&path)?)?;
            writeln!(stdout, "projected {} -> {} dimensions\nwrote {}", coords.ncols(), dim, path.display())?;
        }
        Command::Report { matrix, embedding, assignment, anchors, allow_reflection, rescale, scatter } => {
            let m = load_matrix(matrix)?;
            let (labels, coords) = load_embedding(embedding)?;
            if labels != m.labels {
                bail!("embedding labels do not match the matrix labels");
            }
            let mut fitted = distances_from_coords(&coords);
            let mut text = format!("objects: {}\ndimension: {}\n", labels.len(), coords.ncols());
            if *rescale {
                let (factor, scaled) = least_squares_rescale(&m.entries, &fitted)?;
                text += &format!("rescale_factor: {factor:.12}\n");
                fitted = scaled;
            }
            text += &quality_lines(&quality(&m.entries, &fitted)?);

            fs::create_dir_all(&cfg.out_dir)?;
            let mut written = vec![cfg.out_dir.join("report.txt"), cfg.out_dir.join("rank.svg")];
            write_text(&written[1], &svg::render_rank_plot_svg(&m.entries, &fitted)?)?;
            if *scatter {
                written.push(cfg.out_dir.join("scatter.svg"));
                write_text(&written[2], &svg::render_scatter_svg(&m.entries, &fitted)?)?;
            }

            let clusters = match assignment {
                Some(path) => {
                    let (names, a) = io::read_assignment_file(path).with_context(|| format!("loading {}", path.display()))?;
                    if names != labels {
                        bail!("assignment labels do not match the embedding labels");
                    }
                    Some(a)
                }
                None => None,
            };
            if coords.ncols() == 2 {
                let map = match anchors {
                    Some(path) => {
                        let (aligned, rms) = align_to_anchors(&labels, &coords, &read_anchors(path)?, *allow_reflection)?;
                        text += &format!("anchor_fit_rms: {rms:.6}\n");
                        aligned
                    }
                    None => coords.clone(),
                };
                let path = cfg.out_dir.join("map.svg");
                write_text(&path, &svg::render_map_svg(&labels, &map, clusters.as_ref())?)?;
                written.push(path);
            } else {
                if anchors.is_some() || clusters.is_some() {
                    bail!("maps need a 2D embedding; project it first");
                }
                text += "map: skipped (embedding is not 2D)\n";
            }
            write_text(&written[0], &text)?;
            write!(stdout, "{text}")?;
            for p in written {
                writeln!(stdout, "wrote {}", p.display())?;
            }
        }
    }
    Ok(())
}
