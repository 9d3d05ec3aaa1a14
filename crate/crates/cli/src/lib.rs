//! Command-line front end: generators, checks, the collapse engine,
//! sequence files, mesh geodesics and DOT/SVG figure emission.
//!
//! Exit status: 0 when the command ran and produced its verdict, 1 when a
//! pass/fail check failed (validation violations, a failed `verify`, or a
//! `--expect` mismatch), 2 on usage or I/O errors. `-` names standard
//! input; all commands are pipe-friendly. `--machine` switches the report
//! to key<TAB>value lines. `SQC_SEED` supplies the default seed.

mod render;

use std::io::{BufRead, Write};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sqc::collapse::{
    collapse_all_with, filtration, spine, verify_sequence, CollapseMode, CollapseSequence,
    Strategy,
};
use sqc::complex::{EdgeId, SquareComplex, SquareId, VertexId};
use sqc::curvature::{check_cat0, is_median, is_npc, CurvatureReport};
use sqc::generate::{generate, GeneratorSpec};
use sqc::geometry::{
    check_collapsed_geodesic, sample_cat0, GeodesicCase, Mesh, RemovalMask, SurfacePoint,
};

#[derive(Parser)]
#[command(
    name = "sqc",
    version,
    about = "Finite square 2-complexes: curvature checks, collapses, and geodesic sampling"
)]
struct Cli {
    /// Emit a machine-readable key<TAB>value block instead of prose.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural rules; exit 1 when violations are found.
    Validate { input: String },
    /// Decide a curvature-style verdict (npc, cat0 or median).
    Check {
        kind: CheckKind,
        input: String,
        /// Fail (exit 1) unless the verdict matches, e.g. `cat0` or `not-cat0`.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Per-vertex curvature table with the nonpositive-curvature verdict.
    Curvature { input: String },
    /// Run the collapse engine to exhaustion.
    Collapse {
        input: String,
        #[arg(long, default_value = "first", value_parser = Strategy::from_str)]
        strategy: Strategy,
        #[arg(long)]
        seed: Option<u64>,
        /// Offer 2→1 and 1→0 pairs together instead of phase by phase.
        #[arg(long)]
        mixed: bool,
        /// Write the collapse sequence file here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Perform only 2→1 collapses and print the spine as a complex.
    Spine {
        input: String,
        #[arg(long, default_value = "first", value_parser = Strategy::from_str)]
        strategy: Strategy,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay a collapse sequence against a complex; exit 1 when invalid.
    Verify { sequence: String, input: String },
    /// Print the combinatorial ball around a vertex as a complex.
    Ball {
        input: String,
        #[arg(long)]
        vertex: u32,
        #[arg(long)]
        radius: usize,
    },
    /// Collapse every ball around a vertex, radius by radius.
    Filtration {
        input: String,
        #[arg(long)]
        vertex: u32,
        #[arg(long, default_value = "first", value_parser = Strategy::from_str)]
        strategy: Strategy,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mesh distance between two surface points.
    Geodesic {
        input: String,
        /// Point as `<square>:<x>,<y>`, `<edge>:<t>` or `v<vertex>`.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 32)]
        k: usize,
        /// Cells to remove, e.g. `s3,e5`.
        #[arg(long)]
        mask: Option<String>,
    },
    /// Sample random mesh triangles against the CAT(0) inequality.
    Cat0Sample {
        input: String,
        #[arg(long, default_value_t = 32)]
        k: usize,
        #[arg(long, default_value_t = 500)]
        triangles: usize,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mask: Option<String>,
        /// Fail (exit 1) unless the outcome matches: `clean` or `violations`.
        #[arg(long)]
        expect: Option<SampleExpectation>,
    },
    /// Verify the detour geodesic after removing a square with a free edge.
    CollapsedGeodesic {
        input: String,
        #[arg(long)]
        square: u32,
        /// Free edge of the square; defaults to its smallest free edge.
        #[arg(long)]
        edge: Option<u32>,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 32)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Generate a corpus complex, e.g. `gen grid 3 3` or `gen randomcat0 7 20`.
    Gen {
        #[arg(required = true)]
        spec: Vec<String>,
    },
    /// Emit DOT (1-skeleton or a vertex link) or SVG (grid layouts only).
    Render {
        input: String,
        #[arg(long, value_enum, default_value_t = RenderFormat::Dot)]
        format: RenderFormat,
        /// Render the link of this vertex instead of the 1-skeleton.
        #[arg(long)]
        link: Option<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Npc,
    Cat0,
    Median,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RenderFormat {
    Dot,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SampleExpectation {
    Clean,
    Violations,
}

/// Entry point shared by the binary and the tests: parses `argv`, executes
/// one subcommand, and returns the exit status.
pub fn run(
    argv: &[String],
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{err}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{err}");
                    2
                }
            };
        }
    };
    match execute(cli, stdin, stdout) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "sqc: {err:#}");
            2
        }
    }
}

fn execute(cli: Cli, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32> {
    let machine = cli.machine;
    match cli.command {
        Command::Validate { input } => {
            let k = load(&input, stdin)?;
            let report = k.validate();
            if machine {
                kv(out, "ok", report.ok())?;
                kv(out, "violations", report.violations.len())?;
                for v in &report.violations {
                    kv(out, "violation", format_args!("[{}] {}", v.rule, v.message))?;
                }
            } else {
                write!(out, "{report}")?;
            }
            Ok(if report.ok() { 0 } else { 1 })
        }

        Command::Check { kind, input, expect } => {
            let k = load_valid(&input, stdin)?;
            let (token, detail) = match kind {
                CheckKind::Npc => match is_npc(&k) {
                    (true, _) => ("npc", "npc: true".to_string()),
                    (false, witness) => (
                        "not-npc",
                        format!(
                            "npc: false (witness vertex {})",
                            witness.expect("witness accompanies failure")
                        ),
                    ),
                },
                CheckKind::Cat0 => {
                    let verdict = check_cat0(&k);
                    let token = if verdict.is_cat0() { "cat0" } else { "not-cat0" };
                    (token, format!("verdict: {verdict}"))
                }
                CheckKind::Median => match is_median(&k).map_err(|e| anyhow!("{e}"))? {
                    (true, _) => ("median", "median: true".to_string()),
                    (false, witness) => {
                        let w = witness.expect("witness accompanies failure");
                        (
                            "not-median",
                            format!(
                                "median: false (triple {} {} {} has {} medians)",
                                w.triple[0], w.triple[1], w.triple[2], w.medians
                            ),
                        )
                    }
                },
            };
            if machine {
                kv(out, "check", format_args!("{kind:?}").to_string().to_lowercase())?;
                kv(out, "verdict", token)?;
            } else {
                writeln!(out, "{detail}")?;
            }
            match expect {
                Some(expected) if expected != token => {
                    if !machine {
                        writeln!(out, "expected {expected}, got {token}")?;
                    }
                    Ok(1)
                }
                _ => Ok(0),
            }
        }

        Command::Curvature { input } => {
            let k = load_valid(&input, stdin)?;
            let report = CurvatureReport::new(&k);
            if machine {
                kv(out, "npc", report.npc)?;
                if let Some(w) = report.witness {
                    kv(out, "witness", w)?;
                    kv(
                        out,
                        "witness_cycle_length",
                        report.witness_cycle.as_ref().map(Vec::len).unwrap_or(0),
                    )?;
                }
            } else {
                write!(out, "{report}")?;
            }
            Ok(0)
        }

        Command::Collapse { input, strategy, seed, mixed, out: path } => {
            let k = load_valid(&input, stdin)?;
            let seed = resolve_seed(seed);
            let mode = if mixed { CollapseMode::Mixed } else { CollapseMode::Phased };
            let (seq, fin) = collapse_all_with(&k, strategy, seed, mode);
            if let Some(path) = path {
                std::fs::write(&path, seq.to_text())
                    .with_context(|| format!("writing sequence to {path}"))?;
            }
            let collapsed = sqc::collapse::is_single_vertex(&fin);
            if machine {
                kv(out, "strategy", strategy)?;
                kv(out, "seed", seed)?;
                kv(out, "steps", seq.steps.len())?;
                kv(out, "collapsed", collapsed)?;
                kv(out, "final_vertices", fin.n_vertices())?;
                kv(out, "final_edges", fin.n_edges())?;
                kv(out, "final_squares", fin.n_squares())?;
                kv(out, "fingerprint", &seq.final_fingerprint)?;
            } else if collapsed {
                writeln!(out, "collapsed to a point in {} steps", seq.steps.len())?;
            } else {
                writeln!(
                    out,
                    "stalled, {} squares remain ({} vertices, {} edges) after {} steps",
                    fin.n_squares(),
                    fin.n_vertices(),
                    fin.n_edges(),
                    seq.steps.len()
                )?;
            }
            Ok(0)
        }

        Command::Spine { input, strategy, seed } => {
            let k = load_valid(&input, stdin)?;
            let s = spine(&k, strategy, resolve_seed(seed));
            write!(out, "{}", s.to_sqc())?;
            Ok(0)
        }

        Command::Verify { sequence, input } => {
            let text = std::fs::read_to_string(&sequence)
                .with_context(|| format!("reading sequence {sequence}"))?;
            let seq = CollapseSequence::parse(&text).map_err(|e| anyhow!("{sequence}: {e}"))?;
            let k = load(&input, stdin)?;
            let valid = verify_sequence(&k, &seq);
            if machine {
                kv(out, "valid", valid)?;
            } else {
                writeln!(out, "sequence {}", if valid { "valid" } else { "invalid" })?;
            }
            Ok(if valid { 0 } else { 1 })
        }

        Command::Ball { input, vertex, radius } => {
            let k = load_valid(&input, stdin)?;
            let ball = k.ball(VertexId(vertex), radius).map_err(|e| anyhow!("{e}"))?;
            write!(out, "{}", ball.to_sqc())?;
            Ok(0)
        }

        Command::Filtration { input, vertex, strategy, seed } => {
            let k = load_valid(&input, stdin)?;
            let filt = filtration(&k, VertexId(vertex), strategy, resolve_seed(seed))
                .map_err(|e| anyhow!("{e}"))?;
            for ball in &filt.balls {
                let b = &ball.complex;
                if machine {
                    kv(
                        out,
                        "ball",
                        format_args!(
                            "{}\t{}\t{}\t{}\t{}",
                            ball.radius,
                            b.n_vertices(),
                            b.n_edges(),
                            b.n_squares(),
                            ball.collapsed_to_point()
                        ),
                    )?;
                } else {
                    writeln!(
                        out,
                        "radius {}: V={} E={} S={} -> {}",
                        ball.radius,
                        b.n_vertices(),
                        b.n_edges(),
                        b.n_squares(),
                        if ball.collapsed_to_point() {
                            "collapsed to a point".to_string()
                        } else {
                            format!("stalled, {} squares remain", ball.final_complex.n_squares())
                        }
                    )?;
                }
            }
            Ok(0)
        }

        Command::Geodesic { input, from, to, k, mask } => {
            let complex = load_valid(&input, stdin)?;
            let mask = parse_mask(mask.as_deref())?;
            let mesh = Mesh::build(&complex, k, &mask).map_err(|e| anyhow!("{e}"))?;
            let p = parse_point(&from)?;
            let q = parse_point(&to)?;
            let path = mesh.distance(&p, &q).map_err(|e| anyhow!("{e}"))?;
            if machine {
                kv(out, "length", path.length)?;
                kv(out, "path_nodes", path.nodes.len())?;
                kv(out, "k", k)?;
            } else {
                writeln!(
                    out,
                    "distance {from} -> {to} = {:.6} (path of {} nodes at k={k})",
                    path.length,
                    path.nodes.len()
                )?;
            }
            Ok(0)
        }

        Command::Cat0Sample { input, k, triangles, tolerance, seed, mask, expect } => {
            let complex = load_valid(&input, stdin)?;
            let mask = parse_mask(mask.as_deref())?;
            let report = sample_cat0(&complex, &mask, triangles, k, tolerance, resolve_seed(seed))
                .map_err(|e| anyhow!("{e}"))?;
            if machine {
                kv(out, "sampled", report.sampled)?;
                kv(out, "degenerate_skipped", report.degenerate_skipped)?;
                kv(out, "checks", report.checks_run)?;
                kv(out, "violations", report.violations.len())?;
                kv(out, "worst_ratio", format_args!("{:.6}", report.worst_ratio))?;
                kv(out, "touching_removed_boundary", report.touching_removed_boundary)?;
                for v in report.violations.iter().take(20) {
                    kv(
                        out,
                        "violation",
                        format_args!(
                            "triangle={:?}\tpair={:?}\tmeasured={:.6}\tbound={:.6}",
                            v.triangle, v.pair, v.measured, v.bound
                        ),
                    )?;
                }
            } else {
                writeln!(
                    out,
                    "sampled {} triangles ({} degenerate skipped), {} midpoint checks",
                    report.sampled, report.degenerate_skipped, report.checks_run
                )?;
                writeln!(
                    out,
                    "violations: {} (worst measured/bound ratio {:.4})",
                    report.violations.len(),
                    report.worst_ratio
                )?;
                if !mask.is_empty() {
                    writeln!(
                        out,
                        "{} triangles touched the removed boundary",
                        report.touching_removed_boundary
                    )?;
                }
                for v in report.violations.iter().take(10) {
                    writeln!(
                        out,
                        "  triangle {:?}, pair {:?}: measured {:.4} > bound {:.4}",
                        v.triangle, v.pair, v.measured, v.bound
                    )?;
                }
            }
            let code = match expect {
                Some(SampleExpectation::Clean) if !report.ok() => 1,
                Some(SampleExpectation::Violations) if report.ok() => 1,
                _ => 0,
            };
            Ok(code)
        }

        Command::CollapsedGeodesic { input, square, edge, from, to, k, tolerance } => {
            let complex = load_valid(&input, stdin)?;
            let square = SquareId(square);
            let edge = match edge {
                Some(e) => EdgeId(e),
                None => smallest_free_edge(&complex, square)?,
            };
            let p = parse_point(&from)?;
            let q = parse_point(&to)?;
            let report = check_collapsed_geodesic(&complex, square, edge, &p, &q, k, tolerance)
                .map_err(|e| anyhow!("{e}"))?;
            if machine {
                kv(out, "case", report.case)?;
                kv(out, "masked_distance", format_args!("{:.6}", report.masked_distance))?;
                kv(out, "full_distance", format_args!("{:.6}", report.full_distance))?;
                kv(out, "corner", report.corner)?;
                kv(out, "corner_sum", format_args!("{:.6}", report.corner_sum))?;
                kv(out, "far_edge_sum", format_args!("{:.6}", report.far_edge_sum))?;
                kv(out, "corner_rel_err", format_args!("{:.6}", report.corner_rel_err))?;
                kv(out, "far_edge_rel_err", format_args!("{:.6}", report.far_edge_rel_err))?;
                kv(out, "matches", report.matches)?;
            } else {
                match report.case {
                    GeodesicCase::NoDetour => writeln!(
                        out,
                        "no detour needed: masked {:.6} vs full {:.6}",
                        report.masked_distance, report.full_distance
                    )?,
                    case => {
                        writeln!(out, "case {case}: masked distance {:.6}", report.masked_distance)?;
                        writeln!(
                            out,
                            "through corner {}: {:.6} (rel err {:.4})",
                            report.corner, report.corner_sum, report.corner_rel_err
                        )?;
                        writeln!(
                            out,
                            "along far edge {}-{}: {:.6} (rel err {:.4})",
                            report.corner, report.other_corner, report.far_edge_sum,
                            report.far_edge_rel_err
                        )?;
                        writeln!(out, "matches expected concatenation: {}", report.matches)?;
                    }
                }
            }
            Ok(0)
        }

        Command::Gen { spec } => {
            let text = spec.join(" ");
            let spec = GeneratorSpec::from_str(&text).map_err(|e| anyhow!("{e}"))?;
            let k = generate(&spec).map_err(|e| anyhow!("{e}"))?;
            write!(out, "{}", k.to_sqc())?;
            Ok(0)
        }

        Command::Render { input, format, link } => {
            let k = load(&input, stdin)?;
            let text = match (format, link) {
                (RenderFormat::Dot, None) => render::dot(&k),
                (RenderFormat::Dot, Some(v)) => {
                    render::dot_link(&k, VertexId(v)).map_err(|e| anyhow!("{e}"))?
                }
                (RenderFormat::Svg, None) => render::svg(&k).map_err(|e| anyhow!("{e}"))?,
                (RenderFormat::Svg, Some(_)) => {
                    bail!("link rendering is DOT-only")
                }
            };
            write!(out, "{text}")?;
            Ok(0)
        }
    }
}

fn load(input: &str, stdin: &mut dyn BufRead) -> Result<SquareComplex> {
    let text = if input == "-" {
        let mut buf = String::new();
        stdin.read_to_string(&mut buf).context("reading standard input")?;
        buf
    } else {
        std::fs::read_to_string(input).with_context(|| format!("reading {input}"))?
    };
    SquareComplex::parse(&text).map_err(|e| anyhow!("{input}: {e}"))
}

/// Loader for commands whose contract assumes a structurally valid complex.
fn load_valid(input: &str, stdin: &mut dyn BufRead) -> Result<SquareComplex> {
    let k = load(input, stdin)?;
    let report = k.validate();
    match report.violations.first() {
        None => Ok(k),
        Some(first) => bail!(
            "{input} fails validation ({} violation(s)); first: {first}",
            report.violations.len()
        ),
    }
}

fn resolve_seed(explicit: Option<u64>) -> u64 {
    explicit.unwrap_or_else(|| {
        std::env::var("SQC_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0)
    })
}

fn kv(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{key}\t{value}")?;
    Ok(())
}

/// `<square>:<x>,<y>`, `<edge>:<t>` or `v<vertex>`.
fn parse_point(text: &str) -> Result<SurfacePoint> {
    if let Some(id) = text.strip_prefix('v') {
        let v: u32 = id.parse().with_context(|| format!("bad vertex point `{text}`"))?;
        return Ok(SurfacePoint::Vertex(VertexId(v)));
    }
    let (id, rest) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("bad point `{text}` (expected s:x,y, e:t or vN)"))?;
    let id: u32 = id.parse().with_context(|| format!("bad cell id in `{text}`"))?;
    if let Some((x, y)) = rest.split_once(',') {
        Ok(SurfacePoint::Square {
            square: SquareId(id),
            x: x.parse().with_context(|| format!("bad x in `{text}`"))?,
            y: y.parse().with_context(|| format!("bad y in `{text}`"))?,
        })
    } else {
        Ok(SurfacePoint::Edge {
            edge: EdgeId(id),
            t: rest.parse().with_context(|| format!("bad t in `{text}`"))?,
        })
    }
}

/// Comma/whitespace-separated cells, e.g. `s3,e5`.
fn parse_mask(text: Option<&str>) -> Result<RemovalMask> {
    let mut mask = RemovalMask::empty();
    let Some(text) = text else {
        return Ok(mask);
    };
    for token in text.split([',', ' ']).filter(|t| !t.is_empty()) {
        if let Some(id) = token.strip_prefix('s') {
            mask.squares.insert(SquareId(id.parse().with_context(|| format!("bad mask `{token}`"))?));
        } else if let Some(id) = token.strip_prefix('e') {
            mask.edges.insert(EdgeId(id.parse().with_context(|| format!("bad mask `{token}`"))?));
        } else {
            bail!("bad mask token `{token}` (expected sN or eN)");
        }
    }
    Ok(mask)
}

fn smallest_free_edge(k: &SquareComplex, square: SquareId) -> Result<EdgeId> {
    let edges = k
        .boundary_edges(square)
        .ok_or_else(|| anyhow!("unknown square {square}"))?;
    edges
        .into_iter()
        .filter(|&e| k.squares_at_edge(e) == [square])
        .min()
        .ok_or_else(|| anyhow!("square {square} has no free edge"))
}
