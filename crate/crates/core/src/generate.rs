//! Deterministic generators for the test corpus.
//!
//! Identical specs (including seeds) yield byte-identical serialized output;
//! all randomness flows through a seeded ChaCha8 generator.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::collapse::free_edges;
use crate::complex::{SquareComplex, VertexId};
use crate::curvature::check_cat0;

/// A generator invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// `rows × cols` squares on `(rows+1) × (cols+1)` vertices.
    Grid { rows: u32, cols: u32 },
    /// `rows × cols` squares with both directions wrapped; needs rows, cols ≥ 3.
    Torus { rows: u32, cols: u32 },
    /// The 2-skeleton of the 3-cube.
    Cube3Skel,
    /// Three squares around one vertex; the central link is a 3-cycle.
    CubeCorner,
    /// A 1 × n row of squares.
    Strip { n: u32 },
    /// n squares stepping alternately right and up.
    Staircase { n: u32 },
    /// n squares attached one by one along free edges with fresh vertices.
    TreeOfSquares { seed: u64, n: u32 },
    /// Grows from a point by n expansions (inverse elementary collapses),
    /// re-checking the CAT(0) verdict after every step.
    RandomCat0 { seed: u64, n: u32 },
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Grid { rows, cols } => write!(f, "grid {rows} {cols}"),
            GeneratorSpec::Torus { rows, cols } => write!(f, "torus {rows} {cols}"),
            GeneratorSpec::Cube3Skel => f.write_str("cube3skel"),
            GeneratorSpec::CubeCorner => f.write_str("cubecorner"),
            GeneratorSpec::Strip { n } => write!(f, "strip {n}"),
            GeneratorSpec::Staircase { n } => write!(f, "staircase {n}"),
            GeneratorSpec::TreeOfSquares { seed, n } => write!(f, "treeofsquares {seed} {n}"),
            GeneratorSpec::RandomCat0 { seed, n } => write!(f, "randomcat0 {seed} {n}"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("unknown generator `{0}`")]
    UnknownSpec(String),
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    /// Parses the CLI spec form, e.g. `grid 3 3` or `randomcat0 7 20`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let num = |tok: &str| -> Result<u32, GeneratorError> {
            tok.parse()
                .map_err(|_| GeneratorError::InvalidParams(format!("`{tok}` is not a number")))
        };
        let seed = |tok: &str| -> Result<u64, GeneratorError> {
            tok.parse()
                .map_err(|_| GeneratorError::InvalidParams(format!("`{tok}` is not a seed")))
        };
        match tokens.as_slice() {
            ["grid", r, c] => Ok(GeneratorSpec::Grid { rows: num(r)?, cols: num(c)? }),
            ["torus", r, c] => Ok(GeneratorSpec::Torus { rows: num(r)?, cols: num(c)? }),
            ["cube3skel"] => Ok(GeneratorSpec::Cube3Skel),
            ["cubecorner"] => Ok(GeneratorSpec::CubeCorner),
            ["strip", n] => Ok(GeneratorSpec::Strip { n: num(n)? }),
            ["staircase", n] => Ok(GeneratorSpec::Staircase { n: num(n)? }),
            ["treeofsquares", s, n] => Ok(GeneratorSpec::TreeOfSquares { seed: seed(s)?, n: num(n)? }),
            ["randomcat0", s, n] => Ok(GeneratorSpec::RandomCat0 { seed: seed(s)?, n: num(n)? }),
            _ => Err(GeneratorError::UnknownSpec(s.to_string())),
        }
    }
}

/// Produces the complex described by a spec.
pub fn generate(spec: &GeneratorSpec) -> Result<SquareComplex, GeneratorError> {
    match *spec {
        GeneratorSpec::Grid { rows, cols } => grid(rows, cols),
        GeneratorSpec::Torus { rows, cols } => torus(rows, cols),
        GeneratorSpec::Cube3Skel => Ok(cube3skel()),
        GeneratorSpec::CubeCorner => Ok(cubecorner()),
        GeneratorSpec::Strip { n } => grid(1, n),
        GeneratorSpec::Staircase { n } => staircase(n),
        GeneratorSpec::TreeOfSquares { seed, n } => tree_of_squares(seed, n),
        GeneratorSpec::RandomCat0 { seed, n } => random_cat0(seed, n),
    }
}

fn grid(rows: u32, cols: u32) -> Result<SquareComplex, GeneratorError> {
    if rows == 0 || cols == 0 {
        return Err(GeneratorError::InvalidParams("grid needs rows, cols ≥ 1".into()));
    }
    let v = |x: u32, y: u32| y * (cols + 1) + x;
    let vertices: Vec<u32> = (0..(rows + 1) * (cols + 1)).collect();
    let mut edges = Vec::new();
    let mut eid = 0;
    for y in 0..=rows {
        for x in 0..cols {
            edges.push((eid, v(x, y), v(x + 1, y)));
            eid += 1;
        }
    }
    for y in 0..rows {
        for x in 0..=cols {
            edges.push((eid, v(x, y), v(x, y + 1)));
            eid += 1;
        }
    }
    let mut squares = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            squares.push((y * cols + x, [v(x, y), v(x + 1, y), v(x + 1, y + 1), v(x, y + 1)]));
        }
    }
    Ok(SquareComplex::from_cells(vertices, edges, squares).expect("grid is well-formed"))
}

fn torus(rows: u32, cols: u32) -> Result<SquareComplex, GeneratorError> {
    if rows < 3 || cols < 3 {
        return Err(GeneratorError::InvalidParams(
            "torus needs rows, cols ≥ 3 (smaller wraps would duplicate edges)".into(),
        ));
    }
    let v = |x: u32, y: u32| (y % rows) * cols + (x % cols);
    let vertices: Vec<u32> = (0..rows * cols).collect();
    let mut edges = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            edges.push((y * cols + x, v(x, y), v(x + 1, y)));
        }
    }
    for y in 0..rows {
        for x in 0..cols {
            edges.push((rows * cols + y * cols + x, v(x, y), v(x, y + 1)));
        }
    }
    let squares = (0..rows)
        .flat_map(|y| {
            (0..cols).map(move |x| {
                (y * cols + x, [v(x, y), v(x + 1, y), v(x + 1, y + 1), v(x, y + 1)])
            })
        })
        .collect();
    Ok(SquareComplex::from_cells(vertices, edges, squares).expect("torus is well-formed"))
}

fn cube3skel() -> SquareComplex {
    // Vertices are bit patterns zyx of the cube corners.
    let vertices: Vec<u32> = (0..8).collect();
    let mut edges = Vec::new();
    let mut eid = 0;
    for i in 0..8u32 {
        for j in (i + 1)..8u32 {
            if (i ^ j).count_ones() == 1 {
                edges.push((eid, i, j));
                eid += 1;
            }
        }
    }
    let squares = vec![
        (0, [0u32, 1, 3, 2]), // z = 0
        (1, [4u32, 5, 7, 6]), // z = 1
        (2, [0u32, 1, 5, 4]), // y = 0
        (3, [2u32, 3, 7, 6]), // y = 1
        (4, [0u32, 2, 6, 4]), // x = 0
        (5, [1u32, 3, 7, 5]), // x = 1
    ];
    SquareComplex::from_cells(vertices, edges, squares).expect("cube skeleton is well-formed")
}

fn cubecorner() -> SquareComplex {
    // The three faces of the cube incident to vertex 0.
    let vertices: Vec<u32> = (0..7).collect();
    let edges = vec![
        (0, 0u32, 1u32),
        (1, 0, 2),
        (2, 0, 4),
        (3, 1, 3),
        (4, 2, 3),
        (5, 1, 5),
        (6, 4, 5),
        (7, 2, 6),
        (8, 4, 6),
    ];
    let squares = vec![(0, [0u32, 1, 3, 2]), (1, [0u32, 1, 5, 4]), (2, [0u32, 2, 6, 4])];
    SquareComplex::from_cells(vertices, edges, squares).expect("cube corner is well-formed")
}

/// Shared builder for generators that lay squares on the integer lattice.
struct LatticeBuilder {
    vertex_ids: BTreeMap<(i64, i64), u32>,
    vertices: Vec<u32>,
    edge_ids: BTreeMap<(u32, u32), u32>,
    edges: Vec<(u32, u32, u32)>,
    squares: Vec<(u32, [u32; 4])>,
}

impl LatticeBuilder {
    fn new() -> Self {
        LatticeBuilder {
            vertex_ids: BTreeMap::new(),
            vertices: Vec::new(),
            edge_ids: BTreeMap::new(),
            edges: Vec::new(),
            squares: Vec::new(),
        }
    }

    fn vertex(&mut self, p: (i64, i64)) -> u32 {
        if let Some(&id) = self.vertex_ids.get(&p) {
            return id;
        }
        let id = self.vertices.len() as u32;
        self.vertex_ids.insert(p, id);
        self.vertices.push(id);
        id
    }

    fn edge(&mut self, a: u32, b: u32) {
        let key = (a.min(b), a.max(b));
        if self.edge_ids.contains_key(&key) {
            return;
        }
        let id = self.edges.len() as u32;
        self.edge_ids.insert(key, id);
        self.edges.push((id, a, b));
    }

    fn square_at(&mut self, p: (i64, i64)) {
        let corners = [
            self.vertex(p),
            self.vertex((p.0 + 1, p.1)),
            self.vertex((p.0 + 1, p.1 + 1)),
            self.vertex((p.0, p.1 + 1)),
        ];
        for i in 0..4 {
            self.edge(corners[i], corners[(i + 1) % 4]);
        }
        let id = self.squares.len() as u32;
        self.squares.push((id, corners));
    }

    fn build(self) -> SquareComplex {
        SquareComplex::from_cells(self.vertices, self.edges, self.squares)
            .expect("lattice complexes are well-formed")
    }
}

fn staircase(n: u32) -> Result<SquareComplex, GeneratorError> {
    if n == 0 {
        return Err(GeneratorError::InvalidParams("staircase needs n ≥ 1".into()));
    }
    let mut b = LatticeBuilder::new();
    let mut pos = (0i64, 0i64);
    for i in 0..n {
        b.square_at(pos);
        if i % 2 == 0 {
            pos.0 += 1;
        } else {
            pos.1 += 1;
        }
    }
    Ok(b.build())
}

fn tree_of_squares(seed: u64, n: u32) -> Result<SquareComplex, GeneratorError> {
    if n == 0 {
        return Err(GeneratorError::InvalidParams("treeofsquares needs n ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = grid(1, 1)?;
    for _ in 1..n {
        let free = free_edges(&current);
        let pick = free[rng.gen_range(0..free.len())];
        let crate::collapse::FreeFacePair::EdgeInSquare { edge, .. } = pick else {
            unreachable!("free_edges yields 2→1 pairs")
        };
        let ends = current.edge_ends(edge).expect("free edge exists");
        let ids = current.free_cell_ids();
        let (w, x) = (ids.vertex, ids.vertex + 1);
        let cells = current.into_cell_lists();
        let mut vertices = cells.0;
        let mut edges = cells.1;
        let mut squares = cells.2;
        vertices.extend([w, x]);
        edges.push((ids.edge, ends[1].0, w));
        edges.push((ids.edge + 1, w, x));
        edges.push((ids.edge + 2, x, ends[0].0));
        squares.push((ids.square, [ends[0].0, ends[1].0, w, x]));
        current = SquareComplex::from_cells(vertices, edges, squares)
            .expect("square attachment is well-formed");
    }
    Ok(current)
}

fn random_cat0(seed: u64, n: u32) -> Result<SquareComplex, GeneratorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = SquareComplex::from_cells(vec![0], vec![], vec![]).unwrap();
    for _ in 0..n {
        let try_square = current.n_edges() >= 3 && rng.gen_bool(0.7);
        let mut expanded = false;
        if try_square {
            for _ in 0..30 {
                if let Some(next) = try_square_expansion(&current, &mut rng) {
                    current = next;
                    expanded = true;
                    break;
                }
            }
        }
        if !expanded {
            current = pendant_expansion(&current, &mut rng);
        }
        debug_assert!(check_cat0(&current).is_cat0());
    }
    Ok(current)
}

/// Inverse 1→0 collapse: a fresh vertex hung off a random existing one.
/// Preserves the CAT(0) verdict trivially.
fn pendant_expansion(k: &SquareComplex, rng: &mut ChaCha8Rng) -> SquareComplex {
    let verts = k.vertices();
    let u = verts[rng.gen_range(0..verts.len())];
    let ids = k.free_cell_ids();
    let (mut vertices, mut edges, squares) = k.clone().into_cell_lists();
    vertices.push(ids.vertex);
    edges.push((ids.edge, u.0, ids.vertex));
    SquareComplex::from_cells(vertices, edges, squares).expect("pendant attachment is well-formed")
}

/// Inverse 2→1 collapse: picks an edge-path b–a–h–c, adds the edge [b, c]
/// and the square (b, a, h, c), and keeps the result only if the CAT(0)
/// verdict survives the re-check.
fn try_square_expansion(k: &SquareComplex, rng: &mut ChaCha8Rng) -> Option<SquareComplex> {
    let edge_ids: Vec<_> = k.edge_ids().collect();
    let mid = edge_ids[rng.gen_range(0..edge_ids.len())];
    let [a, h] = k.edge_ends(mid)?;
    let bs: Vec<VertexId> = k.neighbors(a).into_iter().filter(|&x| x != h).collect();
    let cs: Vec<VertexId> = k.neighbors(h).into_iter().filter(|&x| x != a).collect();
    if bs.is_empty() || cs.is_empty() {
        return None;
    }
    let b = bs[rng.gen_range(0..bs.len())];
    let c = cs[rng.gen_range(0..cs.len())];
    if b == c || k.edge_between(b, c).is_some() {
        return None;
    }
    let ids = k.free_cell_ids();
    let (vertices, mut edges, mut squares) = k.clone().into_cell_lists();
    edges.push((ids.edge, b.0, c.0));
    squares.push((ids.square, [b.0, a.0, h.0, c.0]));
    let candidate = SquareComplex::from_cells(vertices, edges, squares).ok()?;
    if !candidate.validate().ok() {
        return None;
    }
    check_cat0(&candidate).is_cat0().then_some(candidate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collapse::{collapse_all, is_single_vertex, Strategy};

    #[test]
    fn grid_counts() {
        let k = generate(&GeneratorSpec::Grid { rows: 2, cols: 2 }).unwrap();
        assert_eq!((k.n_vertices(), k.n_edges(), k.n_squares()), (9, 12, 4));
        assert!(k.validate().ok());
    }

    #[test]
    fn cube_counts() {
        let k = generate(&GeneratorSpec::Cube3Skel).unwrap();
        assert_eq!((k.n_vertices(), k.n_edges(), k.n_squares()), (8, 12, 6));
        assert_eq!(k.euler_characteristic(), 2);
        assert!(k.validate().ok());
    }

    #[test]
    fn cubecorner_counts() {
        let k = generate(&GeneratorSpec::CubeCorner).unwrap();
        assert_eq!((k.n_vertices(), k.n_edges(), k.n_squares()), (7, 9, 3));
        assert!(k.validate().ok());
    }

    #[test]
    fn strip_is_a_row_of_squares() {
        let k = generate(&GeneratorSpec::Strip { n: 3 }).unwrap();
        assert_eq!((k.n_vertices(), k.n_edges(), k.n_squares()), (8, 10, 3));
        assert!(check_cat0(&k).is_cat0());
    }

    #[test]
    fn staircase_is_cat0() {
        let k = generate(&GeneratorSpec::Staircase { n: 7 }).unwrap();
        assert_eq!(k.n_squares(), 7);
        assert!(k.validate().ok());
        assert!(check_cat0(&k).is_cat0());
    }

    #[test]
    fn tree_of_squares_is_cat0_and_collapsible() {
        for seed in [1u64, 2, 3] {
            let k = generate(&GeneratorSpec::TreeOfSquares { seed, n: 12 }).unwrap();
            assert_eq!(k.n_squares(), 12);
            assert!(k.validate().ok());
            assert!(check_cat0(&k).is_cat0());
            let (_, fin) = collapse_all(&k, Strategy::Random, seed);
            assert!(is_single_vertex(&fin));
        }
    }

    #[test]
    fn randomcat0_is_cat0_by_construction() {
        let k = generate(&GeneratorSpec::RandomCat0 { seed: 7, n: 20 }).unwrap();
        assert!(k.validate().ok());
        assert!(check_cat0(&k).is_cat0());
    }

    #[test]
    fn generators_are_deterministic() {
        for spec in [
            GeneratorSpec::Grid { rows: 3, cols: 2 },
            GeneratorSpec::TreeOfSquares { seed: 9, n: 10 },
            GeneratorSpec::RandomCat0 { seed: 9, n: 15 },
        ] {
            let a = generate(&spec).unwrap().to_sqc();
            let b = generate(&spec).unwrap().to_sqc();
            assert_eq!(a, b, "{spec}");
        }
    }

    #[test]
    fn spec_parsing_roundtrip() {
        for text in ["grid 3 3", "torus 4 4", "cube3skel", "cubecorner", "strip 5", "staircase 10", "treeofsquares 1 30", "randomcat0 7 20"] {
            let spec: GeneratorSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("grid x 3".parse::<GeneratorSpec>().is_err());
        assert!("hexagons 3".parse::<GeneratorSpec>().is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(generate(&GeneratorSpec::Grid { rows: 0, cols: 3 }).is_err());
        assert!(generate(&GeneratorSpec::Torus { rows: 2, cols: 4 }).is_err());
        assert!(generate(&GeneratorSpec::Staircase { n: 0 }).is_err());
    }
}
