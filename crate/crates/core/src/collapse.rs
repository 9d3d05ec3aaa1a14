//! Free-face detection, elementary collapses, strategy-driven full collapse,
//! spines, sequence certification, and ball filtrations.
//!
//! The engine removes a free face together with its unique coface, one pair
//! per step, always taking 2→1 pairs (edge, square) to exhaustion before any
//! 1→0 pair (vertex, edge); a mixed mode that draws from both pools at once
//! is available for experimentation. Stalling is a value, not an error:
//! non-collapsible inputs such as the torus are first-class test subjects.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{CellRef, EdgeId, SquareComplex, SquareId, UnknownCell, VertexId};

/// A free face paired with its unique coface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreeFacePair {
    /// A 2→1 pair: an edge lying in exactly one square.
    EdgeInSquare { edge: EdgeId, square: SquareId },
    /// A 1→0 pair: a degree-1 vertex not meeting any square, with its edge.
    VertexInEdge { vertex: VertexId, edge: EdgeId },
}

impl FreeFacePair {
    pub fn face(&self) -> CellRef {
        match self {
            FreeFacePair::EdgeInSquare { edge, .. } => CellRef::Edge(*edge),
            FreeFacePair::VertexInEdge { vertex, .. } => CellRef::Vertex(*vertex),
        }
    }

    pub fn coface(&self) -> CellRef {
        match self {
            FreeFacePair::EdgeInSquare { square, .. } => CellRef::Square(*square),
            FreeFacePair::VertexInEdge { edge, .. } => CellRef::Edge(*edge),
        }
    }

    /// Dimension of the collapse: 2 for (edge, square), 1 for (vertex, edge).
    pub fn dimension(&self) -> u8 {
        match self {
            FreeFacePair::EdgeInSquare { .. } => 2,
            FreeFacePair::VertexInEdge { .. } => 1,
        }
    }
}

impl fmt::Display for FreeFacePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreeFacePair::EdgeInSquare { edge, square } => write!(f, "c2 {edge} {square}"),
            FreeFacePair::VertexInEdge { vertex, edge } => write!(f, "c1 {vertex} {edge}"),
        }
    }
}

/// Every edge incident to exactly one square, paired with that square, in
/// ascending edge-id order.
pub fn free_edges(k: &SquareComplex) -> Vec<FreeFacePair> {
    let mut out: Vec<FreeFacePair> = k
        .edge_ids()
        .filter_map(|e| match k.squares_at_edge(e) {
            [s] => Some(FreeFacePair::EdgeInSquare { edge: e, square: *s }),
            _ => None,
        })
        .collect();
    out.sort_by_key(|p| match p {
        FreeFacePair::EdgeInSquare { edge, square } => (*edge, *square),
        _ => unreachable!(),
    });
    out
}

/// Every vertex of degree one that meets no square, paired with its edge, in
/// ascending vertex-id order.
pub fn free_vertices(k: &SquareComplex) -> Vec<FreeFacePair> {
    let mut out: Vec<FreeFacePair> = k
        .vertices()
        .iter()
        .filter_map(|&v| {
            if k.corners_at(v).is_empty() {
                if let [e] = k.edges_at(v) {
                    if k.squares_at_edge(*e).is_empty() {
                        return Some(FreeFacePair::VertexInEdge { vertex: v, edge: *e });
                    }
                }
            }
            None
        })
        .collect();
    out.sort_by_key(|p| match p {
        FreeFacePair::VertexInEdge { vertex, edge } => (*vertex, *edge),
        _ => unreachable!(),
    });
    out
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CollapseError {
    #[error("pair is not free: {0}")]
    NotFree(String),
    #[error(transparent)]
    UnknownCell(#[from] UnknownCell),
}

/// Removes exactly the two cells of a currently-free pair.
pub fn elementary_collapse(
    k: &SquareComplex,
    pair: FreeFacePair,
) -> Result<SquareComplex, CollapseError> {
    match pair {
        FreeFacePair::EdgeInSquare { edge, square } => {
            if k.edge_ends(edge).is_none() {
                return Err(UnknownCell(CellRef::Edge(edge)).into());
            }
            if k.square_cycle(square).is_none() {
                return Err(UnknownCell(CellRef::Square(square)).into());
            }
            match k.squares_at_edge(edge) {
                [s] if *s == square => {}
                [] => {
                    return Err(CollapseError::NotFree(format!(
                        "edge {edge} lies in no square"
                    )))
                }
                [s] => {
                    return Err(CollapseError::NotFree(format!(
                        "edge {edge} lies in square {s}, not {square}"
                    )))
                }
                many => {
                    return Err(CollapseError::NotFree(format!(
                        "edge {edge} lies in {} squares",
                        many.len()
                    )))
                }
            }
            Ok(k.without_cells(&[], &[edge], &[square]))
        }
        FreeFacePair::VertexInEdge { vertex, edge } => {
            if !k.contains_vertex(vertex) {
                return Err(UnknownCell(CellRef::Vertex(vertex)).into());
            }
            if k.edge_ends(edge).is_none() {
                return Err(UnknownCell(CellRef::Edge(edge)).into());
            }
            if !k.corners_at(vertex).is_empty() {
                return Err(CollapseError::NotFree(format!(
                    "vertex {vertex} meets a square"
                )));
            }
            match k.edges_at(vertex) {
                [e] if *e == edge => {}
                other => {
                    return Err(CollapseError::NotFree(format!(
                        "vertex {vertex} has {} incident edge(s)",
                        other.len()
                    )))
                }
            }
            if !k.squares_at_edge(edge).is_empty() {
                return Err(CollapseError::NotFree(format!("edge {edge} lies in a square")));
            }
            Ok(k.without_cells(&[vertex], &[edge], &[]))
        }
    }
}

/// Free-pair selection strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Ascending edge id, then ascending square id.
    First,
    /// Uniform choice driven by a seeded ChaCha8 generator.
    Random,
    /// Prefers free edges whose square has the most free edges.
    BoundaryFirst,
    /// Prefers the free edge whose endpoints have the smallest corner counts.
    GreedyMinLink,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::First,
        Strategy::Random,
        Strategy::BoundaryFirst,
        Strategy::GreedyMinLink,
    ];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::First => "first",
            Strategy::Random => "random",
            Strategy::BoundaryFirst => "boundary-first",
            Strategy::GreedyMinLink => "greedy-min-link",
        };
        f.write_str(s)
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(Strategy::First),
            "random" => Ok(Strategy::Random),
            "boundary-first" => Ok(Strategy::BoundaryFirst),
            "greedy-min-link" => Ok(Strategy::GreedyMinLink),
            other => Err(format!(
                "unknown strategy `{other}` (expected first, random, boundary-first or greedy-min-link)"
            )),
        }
    }
}

/// Phase discipline of the engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CollapseMode {
    /// All 2→1 collapses before any 1→0 collapse.
    #[default]
    Phased,
    /// Both pools offered to the strategy at every step.
    Mixed,
}

/// An ordered, replayable list of elementary collapses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseSequence {
    pub steps: Vec<FreeFacePair>,
    pub initial_fingerprint: String,
    pub final_fingerprint: String,
    pub strategy: Strategy,
    pub seed: u64,
}

impl CollapseSequence {
    /// Serializes as header lines (`strategy`, `seed`, initial `fingerprint`)
    /// followed by one `c2`/`c1` line per step and a trailing `fingerprint`
    /// line for the final complex.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("strategy {}\n", self.strategy));
        out.push_str(&format!("seed {}\n", self.seed));
        out.push_str(&format!("fingerprint {}\n", self.initial_fingerprint));
        for step in &self.steps {
            out.push_str(&format!("{step}\n"));
        }
        out.push_str(&format!("fingerprint {}\n", self.final_fingerprint));
        out
    }

    pub fn parse(text: &str) -> Result<CollapseSequence, SequenceParseError> {
        let mut strategy = None;
        let mut seed = None;
        let mut fingerprints = Vec::new();
        let mut steps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens.as_slice() {
                ["strategy", name] => {
                    strategy = Some(
                        Strategy::from_str(name)
                            .map_err(|e| SequenceParseError { line, message: e })?,
                    )
                }
                ["seed", value] => {
                    seed = Some(value.parse::<u64>().map_err(|_| SequenceParseError {
                        line,
                        message: format!("`{value}` is not a seed"),
                    })?)
                }
                ["fingerprint", hex] => fingerprints.push(hex.to_string()),
                ["c2", e, s] => steps.push(FreeFacePair::EdgeInSquare {
                    edge: EdgeId(parse_id(line, e)?),
                    square: SquareId(parse_id(line, s)?),
                }),
                ["c1", v, e] => steps.push(FreeFacePair::VertexInEdge {
                    vertex: VertexId(parse_id(line, v)?),
                    edge: EdgeId(parse_id(line, e)?),
                }),
                _ => {
                    return Err(SequenceParseError {
                        line,
                        message: format!("unrecognized line `{content}`"),
                    })
                }
            }
        }
        let [initial, fin] = fingerprints.as_slice() else {
            return Err(SequenceParseError {
                line: 0,
                message: format!(
                    "expected an initial and a final fingerprint line, found {}",
                    fingerprints.len()
                ),
            });
        };
        Ok(CollapseSequence {
            steps,
            initial_fingerprint: initial.clone(),
            final_fingerprint: fin.clone(),
            strategy: strategy.ok_or(SequenceParseError {
                line: 0,
                message: "missing `strategy` header".into(),
            })?,
            seed: seed.ok_or(SequenceParseError {
                line: 0,
                message: "missing `seed` header".into(),
            })?,
        })
    }
}

fn parse_id(line: usize, tok: &str) -> Result<u32, SequenceParseError> {
    tok.parse::<u32>().map_err(|_| SequenceParseError {
        line,
        message: format!("`{tok}` is not a cell id"),
    })
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct SequenceParseError {
    pub line: usize,
    pub message: String,
}

/// Runs the engine to exhaustion and returns the certified sequence with the
/// final complex. The final complex is a single vertex iff the full collapse
/// succeeded.
pub fn collapse_all(
    k: &SquareComplex,
    strategy: Strategy,
    seed: u64,
) -> (CollapseSequence, SquareComplex) {
    collapse_all_with(k, strategy, seed, CollapseMode::Phased)
}

/// [`collapse_all`] with an explicit phase discipline.
pub fn collapse_all_with(
    k: &SquareComplex,
    strategy: Strategy,
    seed: u64,
    mode: CollapseMode,
) -> (CollapseSequence, SquareComplex) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = k.euler_characteristic();
    let initial_fingerprint = k.fingerprint();
    let mut current = k.clone();
    let mut steps = Vec::new();
    loop {
        let candidates = match mode {
            CollapseMode::Phased => {
                let edges = free_edges(&current);
                if edges.is_empty() {
                    free_vertices(&current)
                } else {
                    edges
                }
            }
            CollapseMode::Mixed => {
                let mut all = free_edges(&current);
                all.extend(free_vertices(&current));
                all
            }
        };
        if candidates.is_empty() {
            break;
        }
        let pair = select(&current, &candidates, strategy, &mut rng);
        current = elementary_collapse(&current, pair).expect("selected pair is free");
        assert_eq!(
            current.euler_characteristic(),
            chi,
            "elementary collapse must preserve the Euler characteristic"
        );
        steps.push(pair);
    }
    let sequence = CollapseSequence {
        steps,
        initial_fingerprint,
        final_fingerprint: current.fingerprint(),
        strategy,
        seed,
    };
    (sequence, current)
}

/// Performs only 2→1 collapses to exhaustion. The result has no free edges;
/// on CAT(0) inputs it is a 1-complex.
pub fn spine(k: &SquareComplex, strategy: Strategy, seed: u64) -> SquareComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = k.euler_characteristic();
    let mut current = k.clone();
    loop {
        let candidates = free_edges(&current);
        if candidates.is_empty() {
            return current;
        }
        let pair = select(&current, &candidates, strategy, &mut rng);
        current = elementary_collapse(&current, pair).expect("selected pair is free");
        assert_eq!(current.euler_characteristic(), chi);
    }
}

fn select(
    k: &SquareComplex,
    candidates: &[FreeFacePair],
    strategy: Strategy,
    rng: &mut ChaCha8Rng,
) -> FreeFacePair {
    debug_assert!(!candidates.is_empty());
    match strategy {
        Strategy::First => candidates[0],
        Strategy::Random => candidates[rng.gen_range(0..candidates.len())],
        Strategy::BoundaryFirst => {
            // Score a 2→1 pair by how many of its square's boundary edges
            // are free; 1→0 pairs score -1 and fall back to first-position.
            let mut best = candidates[0];
            let mut best_score = i64::MIN;
            for &c in candidates {
                let score = match c {
                    FreeFacePair::EdgeInSquare { square, .. } => k
                        .boundary_edges(square)
                        .map(|edges| {
                            edges
                                .iter()
                                .filter(|&&e| k.squares_at_edge(e).len() == 1)
                                .count() as i64
                        })
                        .unwrap_or(0),
                    FreeFacePair::VertexInEdge { .. } => -1,
                };
                if score > best_score {
                    best_score = score;
                    best = c;
                }
            }
            best
        }
        Strategy::GreedyMinLink => {
            // Smallest sum of endpoint corner counts; 1→0 pairs use the
            // corner count of the surviving endpoint.
            let mut best = candidates[0];
            let mut best_score = i64::MAX;
            for &c in candidates {
                let score = match c {
                    FreeFacePair::EdgeInSquare { edge, .. } => {
                        let ends = k.edge_ends(edge).expect("candidate edge exists");
                        (k.corners_at(ends[0]).len() + k.corners_at(ends[1]).len()) as i64
                    }
                    FreeFacePair::VertexInEdge { vertex, edge } => {
                        let ends = k.edge_ends(edge).expect("candidate edge exists");
                        let other = if ends[0] == vertex { ends[1] } else { ends[0] };
                        k.corners_at(other).len() as i64
                    }
                };
                if score < best_score {
                    best_score = score;
                    best = c;
                }
            }
            best
        }
    }
}

/// Replays a sequence from `k`: true iff every pair is free at its turn and
/// both fingerprints match.
pub fn verify_sequence(k: &SquareComplex, seq: &CollapseSequence) -> bool {
    if k.fingerprint() != seq.initial_fingerprint {
        return false;
    }
    let mut current = k.clone();
    for &step in &seq.steps {
        match elementary_collapse(&current, step) {
            Ok(next) => current = next,
            Err(_) => return false,
        }
    }
    current.fingerprint() == seq.final_fingerprint
}

/// The balls B_0 ⊆ B_1 ⊆ … around a base vertex, each run through the
/// collapse engine.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub base: VertexId,
    pub balls: Vec<FiltrationBall>,
}

#[derive(Clone, Debug)]
pub struct FiltrationBall {
    pub radius: usize,
    pub complex: SquareComplex,
    pub sequence: CollapseSequence,
    pub final_complex: SquareComplex,
}

impl FiltrationBall {
    pub fn collapsed_to_point(&self) -> bool {
        is_single_vertex(&self.final_complex)
    }
}

/// Whether a complex is a single vertex with no higher cells.
pub fn is_single_vertex(k: &SquareComplex) -> bool {
    k.n_vertices() == 1 && k.n_edges() == 0 && k.n_squares() == 0
}

/// Balls of radius 0..=eccentricity(v), each collapsed with the given
/// strategy and seed.
pub fn filtration(
    k: &SquareComplex,
    v: VertexId,
    strategy: Strategy,
    seed: u64,
) -> Result<Filtration, UnknownCell> {
    let ecc = k.eccentricity(v)?;
    let mut balls = Vec::with_capacity(ecc + 1);
    for radius in 0..=ecc {
        let complex = k.ball(v, radius)?;
        let (sequence, final_complex) = collapse_all(&complex, strategy, seed);
        balls.push(FiltrationBall {
            radius,
            complex,
            sequence,
            final_complex,
        });
    }
    Ok(Filtration { base: v, balls })
}
