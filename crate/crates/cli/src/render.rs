//! DOT emission for 1-skeletons and vertex links, and SVG for complexes
//! that embed as unit-grid polyominoes.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use sqc::{SquareComplex, SquareId, VertexId};

/// DOT source for the 1-skeleton.
pub fn dot(k: &SquareComplex) -> String {
    let mut out = String::from("graph complex {\n  node [shape=circle fontsize=10];\n");
    for v in k.vertices() {
        let _ = writeln!(out, "  v{v};");
    }
    for e in k.edge_ids() {
        let ends = k.edge_ends(e).expect("listed edge exists");
        let _ = writeln!(out, "  v{} -- v{} [label=\"e{}\"];", ends[0], ends[1], e);
    }
    out.push_str("}\n");
    out
}

/// DOT source for the link of one vertex: nodes are incident edges, arcs
/// are square-corners.
pub fn dot_link(k: &SquareComplex, v: VertexId) -> Result<String, String> {
    let link = k.link_graph(v).map_err(|e| e.to_string())?;
    let mut out = format!("graph link_v{v} {{\n  node [shape=box fontsize=10];\n");
    for e in &link.nodes {
        let _ = writeln!(out, "  e{e};");
    }
    for arc in &link.arcs {
        let _ = writeln!(
            out,
            "  e{} -- e{} [label=\"s{}\"];",
            arc.ends[0], arc.ends[1], arc.square
        );
    }
    let _ = writeln!(out, "  label=\"link of v{} ({})\";", v, link.class);
    out.push_str("}\n");
    Ok(out)
}

/// SVG for complexes whose squares tile a region of the unit grid. Anything
/// else (tori, cones, dangling edges) is rejected.
pub fn svg(k: &SquareComplex) -> Result<String, String> {
    let (coords, squares) = grid_embedding(k)?;
    let xs: Vec<i64> = coords.values().map(|c| c.0).collect();
    let ys: Vec<i64> = coords.values().map(|c| c.1).collect();
    let (min_x, max_x) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let (min_y, max_y) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
    let scale = 48.0;
    let margin = 24.0;
    let width = (max_x - min_x) as f64 * scale + 2.0 * margin;
    let height = (max_y - min_y) as f64 * scale + 2.0 * margin;
    let place = |c: (i64, i64)| {
        (
            (c.0 - min_x) as f64 * scale + margin,
            (max_y - c.1) as f64 * scale + margin,
        )
    };

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    for (s, corners) in &squares {
        let min_corner = corners
            .iter()
            .fold((i64::MAX, i64::MAX), |acc, c| (acc.0.min(c.0), acc.1.min(c.1)));
        let (x, y) = place((min_corner.0, min_corner.1 + 1));
        let _ = writeln!(
            out,
            "  <rect x=\"{x}\" y=\"{y}\" width=\"{scale}\" height=\"{scale}\" fill=\"#e8eef7\" stroke=\"none\"><title>s{s}</title></rect>"
        );
    }
    for e in k.edge_ids() {
        let ends = k.edge_ends(e).expect("listed edge exists");
        let (x1, y1) = place(coords[&ends[0]]);
        let (x2, y2) = place(coords[&ends[1]]);
        let _ = writeln!(
            out,
            "  <line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#44506a\" stroke-width=\"2\"/>"
        );
    }
    for (v, &c) in &coords {
        let (x, y) = place(c);
        let _ = writeln!(out, "  <circle cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"#1d2739\"/>");
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#1d2739\">{v}</text>",
            x + 6.0,
            y - 6.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

type Coords = BTreeMap<VertexId, (i64, i64)>;

/// Unit-grid coordinates for every vertex, propagated square by square.
fn grid_embedding(k: &SquareComplex) -> Result<(Coords, Vec<(SquareId, [(i64, i64); 4])>), String> {
    let Some(first) = k.square_ids().next() else {
        return Err("complex has no squares to lay out".into());
    };
    let mut coords: Coords = BTreeMap::new();
    let mut occupied: BTreeMap<(i64, i64), VertexId> = BTreeMap::new();
    let mut placements: BTreeMap<SquareId, [(i64, i64); 4]> = BTreeMap::new();

    let set = |coords: &mut Coords,
                   occupied: &mut BTreeMap<(i64, i64), VertexId>,
                   v: VertexId,
                   at: (i64, i64)|
     -> Result<(), String> {
        if let Some(&existing) = coords.get(&v) {
            if existing != at {
                return Err(format!("vertex {v} needs two different grid positions"));
            }
            return Ok(());
        }
        if let Some(&other) = occupied.get(&at) {
            if other != v {
                return Err(format!("vertices {other} and {v} collide at {at:?}"));
            }
        }
        coords.insert(v, at);
        occupied.insert(at, v);
        Ok(())
    };

    let first_cycle = k.square_cycle(first).expect("square exists");
    let unit = [(0, 0), (1, 0), (1, 1), (0, 1)];
    for (i, &v) in first_cycle.iter().enumerate() {
        set(&mut coords, &mut occupied, v, unit[i])?;
    }
    placements.insert(first, unit);
    let mut queue = VecDeque::from([first]);

    while let Some(s) = queue.pop_front() {
        let s_place = placements[&s];
        for e in k.boundary_edges(s).expect("square exists") {
            for &t in k.squares_at_edge(e) {
                if t == s || placements.contains_key(&t) {
                    continue;
                }
                let cycle = k.square_cycle(t).expect("square exists");
                let pos = (0..4)
                    .find(|&i| k.edge_between(cycle[i], cycle[(i + 1) % 4]) == Some(e))
                    .ok_or_else(|| format!("edge {e} not on the boundary of square {t}"))?;
                let (u, v) = (cycle[pos], cycle[(pos + 1) % 4]);
                let (cu, cv) = (coords[&u], coords[&v]);
                let d = (cv.0 - cu.0, cv.1 - cu.1);
                if d.0.abs() + d.1.abs() != 1 {
                    return Err(format!("edge {e} is not a unit grid step"));
                }
                // Place t on the side of u–v away from s.
                let s_sum = s_place.iter().fold((0i64, 0i64), |a, c| (a.0 + c.0, a.1 + c.1));
                let side_s = d.0 * (s_sum.1 - 4 * cu.1) - d.1 * (s_sum.0 - 4 * cu.0);
                let n = if side_s > 0 { (d.1, -d.0) } else { (-d.1, d.0) };
                let cw = (cv.0 + n.0, cv.1 + n.1);
                let cx = (cu.0 + n.0, cu.1 + n.1);
                set(&mut coords, &mut occupied, cycle[(pos + 2) % 4], cw)?;
                set(&mut coords, &mut occupied, cycle[(pos + 3) % 4], cx)?;
                let mut place = [(0, 0); 4];
                for (i, &vv) in cycle.iter().enumerate() {
                    place[i] = coords[&vv];
                }
                placements.insert(t, place);
                queue.push_back(t);
            }
        }
    }

    if placements.len() != k.n_squares() {
        return Err("squares are not edge-connected".into());
    }
    for &v in k.vertices() {
        if !coords.contains_key(&v) {
            return Err(format!("vertex {v} lies in no square"));
        }
    }
    for e in k.edge_ids() {
        let ends = k.edge_ends(e).expect("listed edge exists");
        let (a, b) = (coords[&ends[0]], coords[&ends[1]]);
        if (a.0 - b.0).abs() + (a.1 - b.1).abs() != 1 {
            return Err(format!("edge {e} is not a unit grid step"));
        }
    }
    Ok((coords, placements.into_iter().collect()))
}
