//! Marching squares over the lattice of cell centres.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::field::DensityField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    /// Data-space vertices. A closed loop does not repeat its first vertex.
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourLevel {
    pub level: f64,
    pub lines: Vec<Polyline>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    /// Strictly ascending.
    pub levels: Vec<ContourLevel>,
}

// Cell edges, counter-clockwise from the bottom.
const BOTTOM: u8 = 0;
const RIGHT: u8 = 1;
const TOP: u8 = 2;
const LEFT: u8 = 3;

/// Edge pairs crossed in each corner configuration. Corner bits are
/// bottom-left 1, bottom-right 2, top-right 4, top-left 8; a set bit means
/// the corner value is at or above the level. Saddles 5 and 10 are listed for
/// the case where the cell centre is below the level.
const SEGMENTS: [&[(u8, u8)]; 16] = [
    &[],
    &[(LEFT, BOTTOM)],
    &[(BOTTOM, RIGHT)],
    &[(LEFT, RIGHT)],
    &[(RIGHT, TOP)],
    &[(LEFT, BOTTOM), (RIGHT, TOP)],
    &[(BOTTOM, TOP)],
    &[(LEFT, TOP)],
    &[(TOP, LEFT)],
    &[(TOP, BOTTOM)],
    &[(BOTTOM, RIGHT), (TOP, LEFT)],
    &[(TOP, RIGHT)],
    &[(RIGHT, LEFT)],
    &[(RIGHT, BOTTOM)],
    &[(BOTTOM, LEFT)],
    &[],
];

/// Saddle pairings when the cell centre is at or above the level.
const SADDLE_5_HIGH: &[(u8, u8)] = &[(BOTTOM, RIGHT), (TOP, LEFT)];
const SADDLE_10_HIGH: &[(u8, u8)] = &[(LEFT, BOTTOM), (RIGHT, TOP)];

struct Lattice<'a> {
    field: &'a DensityField,
    level: f64,
}

impl Lattice<'_> {
    /// Global id of a cell edge; horizontal edges are even, vertical ones odd.
    fn edge_id(&self, c: usize, r: usize, edge: u8) -> usize {
        let nx = self.field.nx;
        match edge {
            BOTTOM => 2 * (r * nx + c),
            TOP => 2 * ((r + 1) * nx + c),
            LEFT => 2 * (r * nx + c) + 1,
            _ => 2 * (r * nx + c + 1) + 1,
        }
    }

    /// Crossing point on an edge by linear interpolation between its two centres.
    fn vertex(&self, id: usize) -> [f64; 2] {
        let f = self.field;
        let base = id / 2;
        let (c, r) = (base % f.nx, base / f.nx);
        let (c2, r2) = if id % 2 == 0 { (c + 1, r) } else { (c, r + 1) };
        let (v1, v2) = (f.at(c, r), f.at(c2, r2));
        let t = if v2 == v1 { 0.5 } else { ((self.level - v1) / (v2 - v1)).clamp(0.0, 1.0) };
        let p1 = f.extent.cell_center(c, r, f.nx, f.ny);
        let p2 = f.extent.cell_center(c2, r2, f.nx, f.ny);
        [p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1])]
    }
}

/// Isolines of `field` at each level. Unsorted or duplicate levels are sorted
/// and deduplicated; levels without crossings yield empty line lists.
pub fn contours(field: &DensityField, levels: &[f64]) -> ContourSet {
    let mut sorted: Vec<f64> = levels.iter().copied().filter(|l| l.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    ContourSet {
        levels: sorted
            .into_iter()
            .map(|level| ContourLevel {
                level,
                lines: isolines(field, level),
            })
            .collect(),
    }
}

/// Isolines of a single level.
pub fn isolines(field: &DensityField, level: f64) -> Vec<Polyline> {
    if field.nx < 2 || field.ny < 2 {
        return Vec::new();
    }
    let lattice = Lattice { field, level };
    let mut segments: Vec<[usize; 2]> = Vec::new();
    for r in 0..field.ny - 1 {
        for c in 0..field.nx - 1 {
            let corners = [field.at(c, r), field.at(c + 1, r), field.at(c + 1, r + 1), field.at(c, r + 1)];
            let case = corners
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, v)| acc | (usize::from(*v >= level) << k));
            let pairs = match case {
                5 | 10 if corners.iter().sum::<f64>() / 4.0 >= level => {
                    if case == 5 {
                        SADDLE_5_HIGH
                    } else {
                        SADDLE_10_HIGH
                    }
                }
                _ => SEGMENTS[case],
            };
            for (a, b) in pairs {
                segments.push([lattice.edge_id(c, r, *a), lattice.edge_id(c, r, *b)]);
            }
        }
    }
    chain(&segments)
        .into_iter()
        .map(|(ids, closed)| Polyline {
            points: ids.into_iter().map(|id| lattice.vertex(id)).collect(),
            closed,
        })
        .collect()
}

/// Links segments sharing an edge id into maximal chains. Open chains are
/// traced first from their lowest-indexed free end, then the remaining loops.
fn chain(segments: &[[usize; 2]]) -> Vec<(Vec<usize>, bool)> {
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::with_capacity(segments.len() * 2);
    for (s, seg) in segments.iter().enumerate() {
        for e in seg {
            by_edge.entry(*e).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let trace = |start_seg: usize, start_edge: usize, used: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut ids = vec![start_edge];
        let (mut seg, mut at) = (start_seg, start_edge);
        loop {
            used[seg] = true;
            let [a, b] = segments[seg];
            let next = if a == at { b } else { a };
            if next == start_edge {
                return (ids, true);
            }
            ids.push(next);
            match by_edge[&next].iter().find(|s| !used[**s]) {
                Some(s) => {
                    seg = *s;
                    at = next;
                }
                None => return (ids, false),
            }
        }
    };

    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        for e in segments[s] {
            if by_edge[&e].len() == 1 {
                out.push(trace(s, e, &mut used));
                break;
            }
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            out.push(trace(s, segments[s][0], &mut used));
        }
    }
    out
}
