//! Command-line front-end: decompose targets into panel patterns, simulate
//! the perceived result, and run the analysis suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stackres::analysis::charts;
use stackres::analysis::sweep::{resample_area, sweep, SweepGrid, SweepKind};
use stackres::analysis::{baseline_cubic, baseline_wobulation, mtf_slanted_edge, psnr};
use stackres::artifacts::{write_pattern_set, DisplayMode};
use stackres::config::{geometry_hash, load_config, DisplayConfig};
use stackres::error::Error;
use stackres::modes::{
    build_lightfield_target, decompose_3d, decompose_hdr, per_view_psnr, simulate_hdr,
    single_panel_rendition, ViewGrid,
};
use stackres::pnm::{read_pnm, write_pnm, BitDepth};
use stackres::solver::{decompose_superres, SolverConfig};
use stackres::{build_projection, render_view, simulate_native, ImagePlane};

#[derive(Parser)]
#[command(name = "stackres", version, about = "Dual-layer superresolution display toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a target image into time-multiplexed pattern pairs.
    Decompose(DecomposeArgs),
    /// Reproduce the quantitative analyses (conditioning, MTF, sweeps,
    /// baselines).
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Generate deterministic test charts.
    Chart(ChartArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    /// Display configuration file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Target image (binary PGM/PPM; color inputs use Rec. 709 luma).
    #[arg(long)]
    target: PathBuf,
    /// Display mode.
    #[arg(long, default_value = "superres")]
    mode: String,
    /// Number of subframes (light-field rank).
    #[arg(long, default_value_t = 4)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for patterns, manifest, diagnostics, simulation.
    #[arg(long)]
    out: PathBuf,
    /// Panel transmittance floor for HDR mode.
    #[arg(long, default_value_t = 0.15)]
    black_level: f64,
    /// View grid for hdr/lightfield3d modes, e.g. 5x3.
    #[arg(long, default_value = "5x3")]
    views: String,
    /// Foreground disparity (pixels per view step) for the single-image 3D
    /// demo.
    #[arg(long, default_value_t = 1.0)]
    disparity: f64,
    #[arg(long, default_value_t = 60)]
    outer_iters: usize,
    #[arg(long, default_value_t = 10)]
    sart_iters: usize,
    #[arg(long, default_value_t = 2)]
    fact_iters: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_primal: f64,
    #[arg(long, default_value_t = 0.5)]
    relaxation: f64,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Condition-number landscape over diffuser distance and spread.
    Conditioning {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated distances in mm.
        #[arg(long, default_value = "0.3,0.6,1.2,2.5,5,10")]
        distances: String,
        /// Comma-separated spreads in degrees.
        #[arg(long, default_value = "1,2.5,5,7.5,10,15,20")]
        spreads: String,
        /// Tile edge in superpixels.
        #[arg(long, default_value_t = 16)]
        tile: usize,
    },
    /// Slanted-edge MTF of an image.
    Mtf {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        /// Superresolution factor of the image grid (frequency
        /// normalization).
        #[arg(long, default_value_t = 1.0)]
        sr_factor: f64,
        #[arg(long, default_value_t = 5.0)]
        edge_angle: f64,
    },
    /// PSNR sweeps over rank, diffuser distance, or superresolution factor.
    Sweep {
        /// One of: rank, distance, factor, conditioning.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated grid points for the chosen axis.
        #[arg(long)]
        sweep_grid: Option<String>,
        /// Rank used by distance/factor sweeps.
        #[arg(long, default_value_t = 4)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        outer_iters: usize,
    },
    /// Render all comparison baselines for one target and tabulate PSNR.
    Baselines {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        outer_iters: usize,
    },
}

#[derive(Args)]
struct ChartArgs {
    /// One of: slanted-edge, chirp, checkerboard, texture.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 120)]
    cols: usize,
    #[arg(long, default_value_t = 120)]
    rows: usize,
    /// Output PGM path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    angle: f64,
    #[arg(long, default_value_t = 3.0)]
    sr_factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    cell: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::ImageFormat(_) => 3,
        Error::SolverDiverged { .. } => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> stackres::Result<()> {
    match cli.command {
        Command::Decompose(args) => decompose(args),
        Command::Analyze { what } => analyze(what),
        Command::Chart(args) => chart(args),
    }
}

fn load_target(path: &Path) -> stackres::Result<ImagePlane> {
    Ok(read_pnm(path)?.to_luma())
}

fn parse_views(s: &str) -> stackres::Result<ViewGrid> {
    let (c, r) = s
        .split_once('x')
        .ok_or_else(|| Error::invalid(format!("views must look like 5x3, got {:?}", s)))?;
    let cols = c
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::invalid("bad view columns"))?;
    let rows = r
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::invalid("bad view rows"))?;
    ViewGrid::new(cols, rows, 1.0)
}

fn parse_list(s: &str, what: &str) -> stackres::Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad {} value {:?}", what, p)))
        })
        .collect()
}

fn solver_config(args: &DecomposeArgs) -> SolverConfig {
    SolverConfig {
        outer_iters: args.outer_iters,
        sart_iters: args.sart_iters,
        fact_iters: args.fact_iters,
        rho: args.rho,
        tol_primal: args.tol_primal,
        seed: args.seed,
        relaxation: args.relaxation,
    }
}

fn decompose(args: DecomposeArgs) -> stackres::Result<()> {
    let mode = DisplayMode::parse(&args.mode)
        .ok_or_else(|| Error::invalid(format!("unknown mode {:?}", args.mode)))?;
    let display = load_config(&args.config)?;
    let target = load_target(&args.target)?;
    let cfg = solver_config(&args);
    std::fs::create_dir_all(&args.out)?;

    match mode {
        DisplayMode::Superres => decompose_superres_cmd(&args, &display, &target, &cfg),
        DisplayMode::Hdr => decompose_hdr_cmd(&args, &display, &target, &cfg),
        DisplayMode::LightField3d => decompose_3d_cmd(&args, &display, &target, &cfg),
    }
}

fn decompose_superres_cmd(
    args: &DecomposeArgs,
    display: &DisplayConfig,
    target: &ImagePlane,
    cfg: &SolverConfig,
) -> stackres::Result<()> {
    let geom = &display.geometry;
    let (tc, tr) = (geom.target_cols(), geom.target_rows());
    let resampled = target.cols != tc || target.rows != tr;
    let target = if resampled {
        resample_area(target, tc, tr)
    } else {
        target.clone()
    };
    let op = build_projection(geom, &display.diffuser)?;
    let (pat, diags) = decompose_superres(&target, &op, args.rank, cfg)?;

    let shown = op.apply(&pat)?;
    let native = simulate_native(&target, geom)?;
    let ours_db = psnr(&shown.clamped(), &target)?;
    let native_db = psnr(&native, &target)?;

    let manifest = write_pattern_set(&args.out, &pat, DisplayMode::Superres, cfg.seed,
        geometry_hash(display))?;
    std::fs::write(args.out.join("diagnostics.csv"), diags.csv())?;
    write_pnm(&args.out.join("simulated.pgm"), &shown.clamped(), BitDepth::Sixteen)?;
    write_pnm(&args.out.join("native.pgm"), &native, BitDepth::Sixteen)?;

    let mut summary = String::new();
    summary.push_str(&format!("mode = superres\nrank = {}\n", pat.k));
    summary.push_str(&format!("target_resampled = {}\n", resampled));
    summary.push_str(&format!("psnr_ours_db = {:.4}\n", ours_db));
    summary.push_str(&format!("psnr_native_db = {:.4}\n", native_db));
    summary.push_str(&format!("converged = {}\n", diags.converged));
    std::fs::write(args.out.join("summary.txt"), &summary)?;

    println!(
        "superres rank {}: ours {:.2} dB, native {:.2} dB ({} files per panel)",
        pat.k,
        ours_db,
        native_db,
        manifest.front_files.len()
    );
    Ok(())
}

fn decompose_hdr_cmd(
    args: &DecomposeArgs,
    display: &DisplayConfig,
    target: &ImagePlane,
    cfg: &SolverConfig,
) -> stackres::Result<()> {
    let geom = &display.geometry;
    let (pc, pr) = (geom.panel_cols, geom.panel_rows);
    let image = if target.cols != pc || target.rows != pr {
        resample_area(target, pc, pr)
    } else {
        target.clone()
    };
    let grid = parse_views(&args.views)?;
    let mut fact_cfg = cfg.clone();
    fact_cfg.fact_iters = cfg.fact_iters.max(500);

    let (pat, report) = decompose_hdr(&image, args.rank, args.black_level, geom, &grid, &fact_cfg)?;
    let perceived = simulate_hdr(&pat, args.black_level)?;
    let companion = single_panel_rendition(&image, args.black_level);
    let quality = psnr(&perceived.clamped(), &image)?;

    write_pattern_set(&args.out, &pat, DisplayMode::Hdr, cfg.seed, geometry_hash(display))?;
    write_pnm(&args.out.join("simulated.pgm"), &perceived.clamped(), BitDepth::Sixteen)?;
    write_pnm(&args.out.join("single_panel.pgm"), &companion, BitDepth::Sixteen)?;
    std::fs::write(
        args.out.join("diagnostics.csv"),
        format!("iter,primal_residual,fact_error,psnr\n1,0,{:.12e},{:.6}\n", 0.0, quality),
    )?;

    let mut summary = String::new();
    summary.push_str(&format!("mode = hdr\nrank = {}\nblack_level = {}\n", pat.k, args.black_level));
    summary.push_str(&format!("perceived_floor = {}\n", report.perceived_floor));
    summary.push_str(&format!("unreachable_pixels = {}\n", report.unreachable_pixels));
    summary.push_str(&format!("perceived_min = {:.6}\n", perceived.min_value()));
    summary.push_str(&format!("perceived_max = {:.6}\n", perceived.max_value()));
    summary.push_str(&format!("psnr_db = {:.4}\n", quality));
    std::fs::write(args.out.join("summary.txt"), &summary)?;

    println!(
        "hdr rank {}: perceived floor {:.4}, min {:.4}, psnr {:.2} dB",
        pat.k,
        report.perceived_floor,
        perceived.min_value(),
        quality
    );
    Ok(())
}

fn decompose_3d_cmd(
    args: &DecomposeArgs,
    display: &DisplayConfig,
    target: &ImagePlane,
    cfg: &SolverConfig,
) -> stackres::Result<()> {
    let geom = &display.geometry;
    let (pc, pr) = (geom.panel_cols, geom.panel_rows);
    let image = if target.cols != pc || target.rows != pr {
        resample_area(target, pc, pr)
    } else {
        target.clone()
    };
    let grid = parse_views(&args.views)?;

    // single-image demo scene: the image sits on a plane in front of the
    // panels, shifting by `disparity` pixels per view step
    let views: Vec<ImagePlane> = grid
        .indices()
        .into_iter()
        .map(|(jx, jy)| {
            let mut v = ImagePlane::zeros(pc, pr);
            let dx = (jx as f64 * args.disparity).round() as i64;
            let dy = (jy as f64 * args.disparity).round() as i64;
            for y in 0..pr {
                for x in 0..pc {
                    let sx = (x as i64 - dx).clamp(0, pc as i64 - 1) as usize;
                    let sy = (y as i64 - dy).clamp(0, pr as i64 - 1) as usize;
                    v.set(x, y, image.get(sx, sy));
                }
            }
            v
        })
        .collect();

    let lf = build_lightfield_target(&views, geom, &grid)?;
    let mut fact_cfg = cfg.clone();
    fact_cfg.fact_iters = cfg.fact_iters.max(500);
    let pat = decompose_3d(&lf, args.rank, &fact_cfg)?;

    let center = render_view(&pat, geom, (0.0, 0.0))?;
    let view_psnrs = per_view_psnr(&pat, geom, &grid, &views)?;

    write_pattern_set(&args.out, &pat, DisplayMode::LightField3d, cfg.seed,
        geometry_hash(display))?;
    write_pnm(&args.out.join("simulated.pgm"), &center.clamped(), BitDepth::Sixteen)?;
    let mean_psnr = view_psnrs.iter().sum::<f64>() / view_psnrs.len() as f64;
    std::fs::write(
        args.out.join("diagnostics.csv"),
        format!("iter,primal_residual,fact_error,psnr\n1,0,0,{:.6}\n", mean_psnr),
    )?;

    let mut summary = format!("mode = lightfield3d\nrank = {}\nviews = {}x{}\n", pat.k, grid.cols, grid.rows);
    for (i, q) in view_psnrs.iter().enumerate() {
        summary.push_str(&format!("view_{:02}_psnr_db = {:.4}\n", i, q));
    }
    summary.push_str(&format!("mean_view_psnr_db = {:.4}\n", mean_psnr));
    std::fs::write(args.out.join("summary.txt"), &summary)?;

    println!(
        "lightfield3d rank {}: {} views, mean view psnr {:.2} dB",
        pat.k,
        view_psnrs.len(),
        mean_psnr
    );
    Ok(())
}

fn analyze(what: AnalyzeCommand) -> stackres::Result<()> {
    match what {
        AnalyzeCommand::Conditioning {
            config,
            out,
            distances,
            spreads,
            tile,
        } => {
            let display = load_config(&config)?;
            let grid = SweepGrid {
                distances_mm: parse_list(&distances, "distance")?,
                spreads_deg: parse_list(&spreads, "spread")?,
                tile_superpixels: tile,
                ..SweepGrid::default()
            };
            let res = sweep(SweepKind::Conditioning, &grid, &display, None,
                &SolverConfig::default())?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("conditioning.csv"), res.csv())?;
            let best = res.argmin();
            println!(
                "conditioning minimum at distance {} mm, spread {} deg",
                best[0], best[1]
            );
            Ok(())
        }
        AnalyzeCommand::Mtf {
            target,
            out,
            oversample,
            sr_factor,
            edge_angle,
        } => {
            let img = load_target(&target)?;
            let curve = mtf_slanted_edge(&img, edge_angle, oversample, sr_factor)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("mtf.csv"), curve.csv())?;
            println!(
                "mtf: slant {:.2} deg{}, {} bins, DC {:.3}",
                curve.slant_deg,
                if curve.slant_warning { " (outside 2-10 range)" } else { "" },
                curve.frequencies.len(),
                curve.magnitudes[0]
            );
            Ok(())
        }
        AnalyzeCommand::Sweep {
            kind,
            config,
            target,
            out,
            sweep_grid,
            rank,
            seed,
            outer_iters,
        } => {
            let display = load_config(&config)?;
            let kind = SweepKind::parse(&kind)
                .ok_or_else(|| Error::invalid(format!("unknown sweep kind {:?}", kind)))?;
            let mut grid = SweepGrid {
                fixed_rank: rank,
                ..SweepGrid::default()
            };
            if let Some(points) = &sweep_grid {
                let values = parse_list(points, "grid")?;
                match kind {
                    SweepKind::RankPsnr => {
                        grid.ranks = values.iter().map(|v| *v as usize).collect()
                    }
                    SweepKind::DistancePsnr => grid.distances_mm = values,
                    SweepKind::FactorPsnr => grid.factors = values,
                    SweepKind::Conditioning => {
                        return Err(Error::invalid(
                            "use `analyze conditioning` for the 2D landscape",
                        ))
                    }
                }
            }
            let image = match &target {
                Some(p) => Some(load_target(p)?),
                None => None,
            };
            let cfg = SolverConfig {
                seed,
                outer_iters,
                sart_iters: 10,
                fact_iters: 2,
                ..SolverConfig::default()
            };
            let res = sweep(kind, &grid, &display, image.as_ref(), &cfg)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("sweep.csv"), res.csv())?;
            println!("sweep complete: {} points", res.metric.len());
            Ok(())
        }
        AnalyzeCommand::Baselines {
            config,
            target,
            out,
            rank,
            seed,
            outer_iters,
        } => {
            let display = load_config(&config)?;
            let geom = &display.geometry;
            let raw = load_target(&target)?;
            let (tc, tr) = (geom.target_cols(), geom.target_rows());
            let img = if raw.cols != tc || raw.rows != tr {
                resample_area(&raw, tc, tr)
            } else {
                raw
            };

            let op = build_projection(geom, &display.diffuser)?;
            let cfg = SolverConfig {
                seed,
                outer_iters,
                sart_iters: 10,
                fact_iters: 2,
                ..SolverConfig::default()
            };
            let (pat, _) = decompose_superres(&img, &op, rank, &cfg)?;
            let ours = op.apply(&pat)?.clamped();
            let native = simulate_native(&img, geom)?;
            let wob = baseline_wobulation(&img, rank, geom)?;
            let cubic = baseline_cubic(&img, geom)?.clamped();

            std::fs::create_dir_all(&out)?;
            write_pnm(&out.join("ours.pgm"), &ours, BitDepth::Sixteen)?;
            write_pnm(&out.join("native.pgm"), &native, BitDepth::Sixteen)?;
            write_pnm(&out.join("wobulation.pgm"), &wob, BitDepth::Sixteen)?;
            write_pnm(&out.join("cubic.pgm"), &cubic, BitDepth::Sixteen)?;
            let mut csv = String::from("method,psnr_db\n");
            for (name, image) in [
                ("ours", &ours),
                ("native", &native),
                ("wobulation", &wob),
                ("cubic", &cubic),
            ] {
                csv.push_str(&format!("{},{:.6}\n", name, psnr(image, &img)?));
            }
            std::fs::write(out.join("baselines.csv"), &csv)?;
            print!("{}", csv);
            Ok(())
        }
    }
}

fn chart(args: ChartArgs) -> stackres::Result<()> {
    let img = match args.kind.as_str() {
        "slanted-edge" => charts::slanted_edge(args.cols, args.rows, args.angle, 0.1, 0.9, 0.0),
        "chirp" => charts::chirp(args.cols, args.rows, args.sr_factor, 3.0),
        "checkerboard" => charts::checkerboard(args.cols, args.rows, args.cell, 0.1, 0.9),
        "texture" => charts::texture(args.cols, args.rows, args.seed),
        other => return Err(Error::invalid(format!("unknown chart kind {:?}", other))),
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_pnm(&args.out, &img, BitDepth::Sixteen)?;
    println!("wrote {} chart to {}", args.kind, args.out.display());
    Ok(())
}
