//! Curvature tests: link girth, nonpositive curvature, vertex and cell
//! curvature, median-graph recognition, and the CAT(0) verdict.
//!
//! Combinatorial angles are exact: each square-corner contributes π/2, so
//! the total angle at a vertex and its curvature are integer multiples of
//! π/2 and never suffer float ties. The CAT(0) decision is combinatorial
//! (connected + link girth ≥ 4 + median 1-skeleton + squares ⟷ induced
//! 4-cycles); the mesh sampler in [`crate::geometry`] is a falsifier, not a
//! decider.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::complex::{EdgeId, LinkClass, LinkGraph, SquareComplex, UnknownCell, VertexId};

/// An angle that is an exact integer multiple of π/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactAngle {
    half_pis: i64,
}

impl ExactAngle {
    pub const ZERO: ExactAngle = ExactAngle { half_pis: 0 };

    pub fn from_half_pis(n: i64) -> Self {
        ExactAngle { half_pis: n }
    }

    pub fn half_pis(&self) -> i64 {
        self.half_pis
    }

    pub fn radians(&self) -> f64 {
        self.half_pis as f64 * std::f64::consts::FRAC_PI_2
    }
}

impl fmt::Display for ExactAngle {
    /// Exact π-multiples print as `k/2·π`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2·π", self.half_pis)
    }
}

/// Girth of a link graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Girth {
    Finite(usize),
    /// The link is acyclic.
    Unbounded,
}

impl Girth {
    pub fn at_least(&self, n: usize) -> bool {
        match self {
            Girth::Finite(g) => *g >= n,
            Girth::Unbounded => true,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Girth of the link of `v`: the minimum number of arcs in a circuit.
pub fn link_girth(k: &SquareComplex, v: VertexId) -> Result<Girth, UnknownCell> {
    let link = k.link_graph(v)?;
    Ok(match shortest_link_cycle(&link) {
        Some(cycle) => Girth::Finite(cycle.len()),
        None => Girth::Unbounded,
    })
}

/// A shortest circuit of a link, as a cyclic node (edge-id) sequence.
///
/// Works on multigraphs: a self-loop is a 1-cycle, a parallel pair a
/// 2-cycle. For every arc, the arc is removed and a shortest path between
/// its endpoints is sought in the rest of the link.
pub fn shortest_link_cycle(link: &LinkGraph) -> Option<Vec<EdgeId>> {
    let n = link.nodes.len();
    let arcs = link.arc_indices();
    let mut best: Option<Vec<usize>> = None;

    for (skip, &[a, b]) in arcs.iter().enumerate() {
        if a == b {
            return Some(vec![link.nodes[a]]);
        }
        // BFS from a to b avoiding arc `skip`.
        let mut prev: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[a] = true;
        let mut queue = VecDeque::from([a]);
        'bfs: while let Some(u) = queue.pop_front() {
            for (i, &[x, y]) in arcs.iter().enumerate() {
                if i == skip {
                    continue;
                }
                let w = if x == u {
                    y
                } else if y == u {
                    x
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some(u);
                    if w == b {
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
        }
        if seen[b] {
            let mut path = vec![b];
            let mut cur = b;
            while let Some(p) = prev[cur] {
                path.push(p);
                cur = p;
            }
            // path is b..=a; closing arc (a,b) completes the cycle.
            if best.as_ref().map_or(true, |c| path.len() < c.len()) {
                best = Some(path);
            }
        }
    }
    best.map(|idx| idx.into_iter().map(|i| link.nodes[i]).collect())
}

/// Whether every vertex link has girth at least 4, with the smallest failing
/// vertex as witness otherwise.
pub fn is_npc(k: &SquareComplex) -> (bool, Option<VertexId>) {
    for &v in k.vertices() {
        let girth = link_girth(k, v).expect("vertex is in the complex");
        if !girth.at_least(4) {
            return (false, Some(v));
        }
    }
    (true, None)
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CurvatureError {
    #[error("vertex {0} is not interior (its link is not a single cycle)")]
    NotInterior(VertexId),
    #[error("angle {value} out of range [0, π]")]
    AngleOutOfRange { value: f64 },
    #[error(transparent)]
    UnknownCell(#[from] UnknownCell),
}

/// Curvature ω(v) = 2π − θ(v) at an interior vertex, where θ(v) counts one
/// π/2 per square-corner.
pub fn vertex_curvature(k: &SquareComplex, v: VertexId) -> Result<ExactAngle, CurvatureError> {
    let link = k.link_graph(v)?;
    if link.class != LinkClass::Cycle {
        return Err(CurvatureError::NotInterior(v));
    }
    let corners = k.corners_at(v).len() as i64;
    Ok(ExactAngle::from_half_pis(4 - corners))
}

/// Curvature of a 2-cell from the six angles of its two diagonal triangles:
/// the sum of the six angles minus 2π.
pub fn cell_curvature(angles: [f64; 6]) -> Result<f64, CurvatureError> {
    for &a in &angles {
        if !(a.is_finite() && (-1e-12..=std::f64::consts::PI + 1e-12).contains(&a)) {
            return Err(CurvatureError::AngleOutOfRange { value: a });
        }
    }
    Ok(angles.iter().sum::<f64>() - 2.0 * std::f64::consts::PI)
}

/// Classification of a vertex in the curvature report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexClass {
    Interior,
    Boundary,
    Other,
}

impl fmt::Display for VertexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VertexClass::Interior => "interior",
            VertexClass::Boundary => "boundary",
            VertexClass::Other => "other",
        };
        f.write_str(s)
    }
}

/// One row of the curvature report.
#[derive(Clone, Debug)]
pub struct VertexCurvature {
    pub vertex: VertexId,
    pub class: VertexClass,
    pub corners: usize,
    /// Total angle θ(v) = (π/2)·corners.
    pub theta: ExactAngle,
    /// ω(v) = 2π − θ(v); reported only when the link is a single cycle.
    pub omega: Option<ExactAngle>,
}

/// Per-vertex curvature data plus the nonpositive-curvature verdict.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub rows: Vec<VertexCurvature>,
    pub npc: bool,
    pub witness: Option<VertexId>,
    /// A shortest link circuit at the witness, when npc fails.
    pub witness_cycle: Option<Vec<EdgeId>>,
}

impl CurvatureReport {
    pub fn new(k: &SquareComplex) -> Self {
        let rows = k
            .vertices()
            .iter()
            .map(|&v| {
                let link = k.link_graph(v).expect("vertex is in the complex");
                let corners = k.corners_at(v).len();
                let class = match link.class {
                    LinkClass::Cycle => VertexClass::Interior,
                    LinkClass::Path => VertexClass::Boundary,
                    _ => VertexClass::Other,
                };
                VertexCurvature {
                    vertex: v,
                    class,
                    corners,
                    theta: ExactAngle::from_half_pis(corners as i64),
                    omega: (class == VertexClass::Interior)
                        .then(|| ExactAngle::from_half_pis(4 - corners as i64)),
                }
            })
            .collect();
        let (npc, witness) = is_npc(k);
        let witness_cycle = witness.map(|v| {
            let link = k.link_graph(v).expect("witness is in the complex");
            shortest_link_cycle(&link).expect("npc witness has a short circuit")
        });
        CurvatureReport {
            rows,
            npc,
            witness,
            witness_cycle,
        }
    }
}

impl fmt::Display for CurvatureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:<9} {:<8} {:<8} {:<8}", "vertex", "class", "corners", "theta", "omega")?;
        for r in &self.rows {
            let omega = r.omega.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:<8} {:<9} {:<8} {:<8} {:<8}",
                r.vertex.to_string(),
                r.class.to_string(),
                r.corners,
                r.theta.to_string(),
                omega
            )?;
        }
        if self.npc {
            writeln!(f, "npc: true")
        } else {
            writeln!(
                f,
                "npc: false (vertex {} has a link circuit of length {})",
                self.witness.expect("witness set when npc fails"),
                self.witness_cycle.as_ref().map(Vec::len).unwrap_or(0)
            )
        }
    }
}

// ---- median recognition ----------------------------------------------------

/// A vertex triple whose metric intervals do not meet in exactly one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MedianWitness {
    pub triple: [VertexId; 3],
    /// Number of common interval vertices of the triple.
    pub medians: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MedianError {
    #[error("median recognition needs a connected complex")]
    Disconnected,
}

/// Brute-force median test on the 1-skeleton: every vertex triple must have
/// exactly one vertex lying on shortest paths between each pair.
///
/// Returns the first failing triple in ascending id order together with its
/// exact median count.
pub fn is_median(k: &SquareComplex) -> Result<(bool, Option<MedianWitness>), MedianError> {
    let verts = k.vertices();
    let n = verts.len();
    if n == 0 {
        return Ok((true, None));
    }
    let dist = all_pairs_distances(k).ok_or(MedianError::Disconnected)?;

    let count_medians = |a: usize, b: usize, c: usize, stop_at: usize| -> usize {
        let mut count = 0;
        for z in 0..n {
            if dist[a][z] + dist[z][b] == dist[a][b]
                && dist[b][z] + dist[z][c] == dist[b][c]
                && dist[a][z] + dist[z][c] == dist[a][c]
            {
                count += 1;
                if count >= stop_at {
                    break;
                }
            }
        }
        count
    };

    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                if count_medians(a, b, c, 2) != 1 {
                    let medians = count_medians(a, b, c, usize::MAX);
                    return Ok((
                        false,
                        Some(MedianWitness {
                            triple: [verts[a], verts[b], verts[c]],
                            medians,
                        }),
                    ));
                }
            }
        }
    }
    Ok((true, None))
}

/// Median count of one triple by direct scan; used to re-check witnesses.
pub fn median_count(k: &SquareComplex, triple: [VertexId; 3]) -> Option<usize> {
    let d0 = k.bfs_distances(triple[0]);
    let d1 = k.bfs_distances(triple[1]);
    let d2 = k.bfs_distances(triple[2]);
    let d01 = *d0.get(&triple[1])?;
    let d12 = *d1.get(&triple[2])?;
    let d02 = *d0.get(&triple[2])?;
    Some(
        k.vertices()
            .iter()
            .filter(|z| {
                match (d0.get(z), d1.get(z), d2.get(z)) {
                    (Some(&a), Some(&b), Some(&c)) => {
                        a + b == d01 && b + c == d12 && a + c == d02
                    }
                    _ => false,
                }
            })
            .count(),
    )
}

fn all_pairs_distances(k: &SquareComplex) -> Option<Vec<Vec<u16>>> {
    let verts = k.vertices();
    let n = verts.len();
    let index: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = verts
        .iter()
        .map(|&v| k.neighbors(v).into_iter().map(|w| index[&w]).collect())
        .collect();
    let mut dist = vec![vec![u16::MAX; n]; n];
    for s in 0..n {
        let row = &mut dist[s];
        row[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for &w in &adj[u] {
                if row[w] == u16::MAX {
                    row[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        if row.iter().any(|&d| d == u16::MAX) {
            return None;
        }
    }
    Some(dist)
}

// ---- the CAT(0) verdict ----------------------------------------------------

/// Outcome of the combinatorial CAT(0) decision. Exactly one variant holds;
/// witnesses are re-checkable against the complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cat0Verdict {
    Cat0,
    Disconnected,
    NotNpc { witness: VertexId },
    NotMedian { witness: MedianWitness },
    /// The squares are not exactly the induced 4-cycles of the 1-skeleton.
    SquareMismatch { cycle: [VertexId; 4] },
}

impl Cat0Verdict {
    pub fn is_cat0(&self) -> bool {
        matches!(self, Cat0Verdict::Cat0)
    }
}

impl fmt::Display for Cat0Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cat0Verdict::Cat0 => f.write_str("CAT0"),
            Cat0Verdict::Disconnected => f.write_str("Disconnected"),
            Cat0Verdict::NotNpc { witness } => write!(f, "NotNPC(vertex {witness})"),
            Cat0Verdict::NotMedian { witness } => write!(
                f,
                "NotMedian(triple {} {} {}, {} medians)",
                witness.triple[0], witness.triple[1], witness.triple[2], witness.medians
            ),
            Cat0Verdict::SquareMismatch { cycle } => write!(
                f,
                "SquareMismatch(cycle {} {} {} {})",
                cycle[0], cycle[1], cycle[2], cycle[3]
            ),
        }
    }
}

/// Decides CAT(0)-ness combinatorially: connected, nonpositively curved,
/// median 1-skeleton, and squares exactly the induced 4-cycles. The first
/// failing condition wins.
pub fn check_cat0(k: &SquareComplex) -> Cat0Verdict {
    if !k.is_connected() {
        return Cat0Verdict::Disconnected;
    }
    if let (false, Some(witness)) = is_npc(k) {
        return Cat0Verdict::NotNpc { witness };
    }
    match is_median(k) {
        Err(MedianError::Disconnected) => return Cat0Verdict::Disconnected,
        Ok((false, Some(witness))) => return Cat0Verdict::NotMedian { witness },
        Ok(_) => {}
    }
    if let Some(cycle) = square_induced_4cycle_mismatch(k) {
        return Cat0Verdict::SquareMismatch { cycle };
    }
    Cat0Verdict::Cat0
}

/// Checks both directions of "squares = induced 4-cycles": every square
/// boundary must be chord-free, and every induced 4-cycle of the 1-skeleton
/// must bound a square. Returns a witness cycle on failure.
fn square_induced_4cycle_mismatch(k: &SquareComplex) -> Option<[VertexId; 4]> {
    // Direction 1: square boundaries are induced (no diagonal edges).
    for s in k.square_ids() {
        let c = k.square_cycle(s).expect("listed square exists");
        if k.edge_between(c[0], c[2]).is_some() || k.edge_between(c[1], c[3]).is_some() {
            return Some(c);
        }
    }
    // Direction 2: every induced 4-cycle bounds a square.
    let verts = k.vertices();
    for (i, &u) in verts.iter().enumerate() {
        for &w in verts.iter().skip(i + 1) {
            if k.edge_between(u, w).is_some() {
                continue;
            }
            let nu = k.neighbors(u);
            let common: Vec<VertexId> = nu
                .iter()
                .copied()
                .filter(|&x| k.edge_between(x, w).is_some())
                .collect();
            for (a, &x) in common.iter().enumerate() {
                for &y in common.iter().skip(a + 1) {
                    if k.edge_between(x, y).is_some() {
                        continue;
                    }
                    let cycle = [u, x, w, y];
                    if k.square_with_cycle(cycle).is_none() {
                        return Some(cycle);
                    }
                }
            }
        }
    }
    None
}
