//! Row-at-a-time reference for predicates and aggregations, kept independent of the
//! columnar implementation. Shared by the core query tests and the acceptance run.
#![allow(dead_code)]

use atlas_core::data::{Column, ColumnTable};
use atlas_core::query::{InvalidClass, Predicate};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const CATS: [&str; 6] = ["alpha", "beta", "gamma", "delta", "eps", "zeta"];
pub const TAGS: [&str; 4] = ["red", "green", "blue", "gold"];
pub const WORDS: [&str; 5] = ["apple", "pear", "plum", "fig", "kiwi"];

/// Plain rows; `None` is null and numeric cells may hold nan or inf.
#[derive(Debug, Clone)]
pub struct PlainTable {
    pub x: Vec<Option<f64>>,
    pub y: Vec<Option<f64>>,
    pub c: Vec<Option<String>>,
    pub m: Vec<Option<Vec<String>>>,
    pub t: Vec<Option<String>>,
}

impl PlainTable {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn to_table(&self) -> ColumnTable {
        ColumnTable::new(vec![
            Column::numerical_opt("x", &self.x),
            Column::numerical_opt("y", &self.y),
            Column::categorical("c", &self.c),
            Column::multi_categorical("m", &self.m),
            Column::text("t", &self.t),
        ])
        .unwrap()
    }

    fn num(&self, col: &str) -> &[Option<f64>] {
        match col {
            "x" => &self.x,
            "y" => &self.y,
            _ => panic!("not numeric: {col}"),
        }
    }
}

fn random_num(rng: &mut impl Rng, integer: bool) -> Option<f64> {
    let r: f64 = rng.random();
    if r < 0.03 {
        None
    } else if r < 0.05 {
        Some(f64::NAN)
    } else if r < 0.06 {
        Some(if rng.random_bool(0.5) { f64::INFINITY } else { f64::NEG_INFINITY })
    } else if integer {
        // duplicates land exactly on bin edges
        Some(rng.random_range(-5..=5) as f64)
    } else {
        Some(rng.random_range(-100.0..100.0))
    }
}

pub fn random_table(rng: &mut impl Rng, n: usize) -> PlainTable {
    let integer = rng.random_bool(0.3);
    let mut p = PlainTable {
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
        m: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
    };
    let ncat = rng.random_range(1..=CATS.len());
    for _ in 0..n {
        p.x.push(random_num(rng, integer));
        p.y.push(random_num(rng, false));
        p.c.push(rng.random_bool(0.95).then(|| CATS[..ncat].choose(rng).unwrap().to_string()));
        p.m.push(rng.random_bool(0.95).then(|| {
            let k = rng.random_range(0..=3);
            TAGS.choose_multiple(rng, k).map(|s| s.to_string()).collect()
        }));
        p.t.push(rng.random_bool(0.9).then(|| WORDS.choose(rng).unwrap().to_string()));
    }
    p
}

fn random_leaf(rng: &mut impl Rng) -> Predicate {
    let num_col = if rng.random_bool(0.5) { "x" } else { "y" };
    match rng.random_range(0..6) {
        0 => {
            let a = rng.random_range(-110.0..110.0f64);
            let b = rng.random_range(-110.0..110.0f64);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // integer bounds hit the integer-valued cells exactly
            let (lo, hi) = if rng.random_bool(0.3) { (lo.round(), hi.round().max(lo.round())) } else { (lo, hi) };
            Predicate::Interval {
                column: num_col.into(),
                lo,
                hi,
                lo_closed: rng.random_bool(0.5),
                hi_closed: rng.random_bool(0.5),
            }
        }
        1 => {
            let (col, pool): (&str, &[&str]) = match rng.random_range(0..3) {
                0 => ("c", &CATS),
                1 => ("m", &TAGS),
                _ => ("t", &WORDS),
            };
            let k = rng.random_range(0..=pool.len());
            let mut values: Vec<String> = pool.choose_multiple(rng, k).map(|s| s.to_string()).collect();
            if rng.random_bool(0.2) {
                values.push("absent".into());
            }
            Predicate::Member { column: col.into(), values }
        }
        2 => {
            let x0 = rng.random_range(-100.0..100.0f64);
            let y0 = rng.random_range(-100.0..100.0f64);
            Predicate::Rect {
                x: "x".into(),
                y: "y".into(),
                x0,
                x1: x0 + rng.random_range(0.0..120.0),
                y0,
                y1: y0 + rng.random_range(0.0..120.0),
            }
        }
        3 => {
            let k = rng.random_range(3..8);
            let points = (0..k)
                .map(|_| [rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0)])
                .collect();
            Predicate::Polygon {
                x: "x".into(),
                y: "y".into(),
                points,
            }
        }
        _ => {
            let col = ["x", "y", "c", "m", "t"].choose(rng).unwrap();
            let class = [InvalidClass::Null, InvalidClass::Nan, InvalidClass::Inf].choose(rng).unwrap();
            Predicate::Validity {
                column: col.to_string(),
                class: *class,
            }
        }
    }
}

pub fn random_predicate(rng: &mut impl Rng, depth: u32) -> Predicate {
    if depth == 0 || rng.random_bool(0.4) {
        return random_leaf(rng);
    }
    match rng.random_range(0..3) {
        0 => Predicate::And {
            of: (0..rng.random_range(0..4)).map(|_| random_predicate(rng, depth - 1)).collect(),
        },
        1 => Predicate::Or {
            of: (0..rng.random_range(0..4)).map(|_| random_predicate(rng, depth - 1)).collect(),
        },
        _ => Predicate::Not {
            of: Box::new(random_predicate(rng, depth - 1)),
        },
    }
}

fn finite(v: Option<f64>) -> Option<f64> {
    v.filter(|v| v.is_finite())
}

/// Crossing-number test, written out directly.
pub fn inside_polygon(px: f64, py: f64, poly: &[[f64; 2]]) -> bool {
    let mut crossings = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let straddles = (a[1] <= py && b[1] > py) || (b[1] <= py && a[1] > py);
        if straddles {
            let t = (py - a[1]) / (b[1] - a[1]);
            if px < a[0] + t * (b[0] - a[0]) {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

fn class_of(p: &PlainTable, col: &str, row: usize) -> Option<InvalidClass> {
    match col {
        "x" | "y" => match p.num(col)[row] {
            None => Some(InvalidClass::Null),
            Some(v) if v.is_nan() => Some(InvalidClass::Nan),
            Some(v) if v.is_infinite() => Some(InvalidClass::Inf),
            Some(_) => None,
        },
        "c" => p.c[row].is_none().then_some(InvalidClass::Null),
        "m" => p.m[row].is_none().then_some(InvalidClass::Null),
        "t" => p.t[row].is_none().then_some(InvalidClass::Null),
        _ => panic!("unknown column {col}"),
    }
}

pub fn row_matches(p: &PlainTable, pred: &Predicate, row: usize) -> bool {
    match pred {
        Predicate::Interval {
            column,
            lo,
            hi,
            lo_closed,
            hi_closed,
        } => match finite(p.num(column)[row]) {
            None => false,
            Some(v) => {
                let above = if *lo_closed { v >= *lo } else { v > *lo };
                let below = if *hi_closed { v <= *hi } else { v < *hi };
                above && below
            }
        },
        Predicate::Member { column, values } => match column.as_str() {
            "c" => p.c[row].as_ref().is_some_and(|s| values.contains(s)),
            "t" => p.t[row].as_ref().is_some_and(|s| values.contains(s)),
            "m" => p.m[row].as_ref().is_some_and(|l| l.iter().any(|s| values.contains(s))),
            _ => panic!("member on {column}"),
        },
        Predicate::Rect { x, y, x0, x1, y0, y1 } => match (finite(p.num(x)[row]), finite(p.num(y)[row])) {
            (Some(a), Some(b)) => *x0 <= a && a <= *x1 && *y0 <= b && b <= *y1,
            _ => false,
        },
        Predicate::Polygon { x, y, points } => match (finite(p.num(x)[row]), finite(p.num(y)[row])) {
            (Some(a), Some(b)) => inside_polygon(a, b, points),
            _ => false,
        },
        Predicate::Validity { column, class } => class_of(p, column, row) == Some(*class),
        Predicate::And { of } => of.iter().all(|q| row_matches(p, q, row)),
        Predicate::Or { of } => of.iter().any(|q| row_matches(p, q, row)),
        Predicate::Not { of } => !row_matches(p, of, row),
    }
}

pub fn oracle_mask(p: &PlainTable, pred: &Predicate) -> Vec<bool> {
    (0..p.len()).map(|i| row_matches(p, pred, i)).collect()
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Range of the finite values, widened when degenerate.
pub fn finite_range(values: &[Option<f64>]) -> Option<(f64, f64)> {
    let fin: Vec<f64> = values.iter().filter_map(|v| finite(*v)).collect();
    if fin.is_empty() {
        return None;
    }
    let lo = fin.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fin.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some(widen(lo, hi))
}

pub fn edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    e.push(hi);
    e
}

/// Bin by scanning edges: the last edge not above `v`, with the top edge closed.
pub fn scan_bin(v: f64, edges: &[f64]) -> Option<usize> {
    let n = edges.len() - 1;
    if v < edges[0] || v > edges[n] {
        return None;
    }
    let mut k = 0;
    while k + 1 < n && edges[k + 1] <= v {
        k += 1;
    }
    Some(k)
}

/// Numeric histogram: (edges, counts, totals).
pub fn numeric_histogram(values: &[Option<f64>], mask: &[bool], n: usize) -> Option<(Vec<f64>, Vec<u64>, Vec<u64>)> {
    let (lo, hi) = finite_range(values)?;
    let e = edges(lo, hi, n);
    let mut counts = vec![0; n];
    let mut totals = vec![0; n];
    for (i, v) in values.iter().enumerate() {
        if let Some(b) = finite(*v).and_then(|v| scan_bin(v, &e)) {
            totals[b] += 1;
            if mask[i] {
                counts[b] += 1;
            }
        }
    }
    Some((e, counts, totals))
}

/// Per-label (count, total) for a categorical or multi-categorical column.
pub fn label_counts(rows: &[Option<Vec<String>>], mask: &[bool]) -> std::collections::BTreeMap<String, (u64, u64)> {
    let mut out = std::collections::BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        for s in r.iter().flatten() {
            let e = out.entry(s.clone()).or_insert((0, 0));
            e.1 += 1;
            if mask[i] {
                e.0 += 1;
            }
        }
    }
    out
}

/// Row-major `ny` by `nx` (counts, totals) over the x and y columns.
pub fn heatmap(p: &PlainTable, mask: &[bool], nx: usize, ny: usize) -> Option<(Vec<u64>, Vec<u64>)> {
    let ex = edges(finite_range(&p.x)?.0, finite_range(&p.x)?.1, nx);
    let ey = edges(finite_range(&p.y)?.0, finite_range(&p.y)?.1, ny);
    let mut counts = vec![0; nx * ny];
    let mut totals = vec![0; nx * ny];
    for i in 0..p.len() {
        if let (Some(a), Some(b)) = (finite(p.x[i]), finite(p.y[i])) {
            let cell = scan_bin(b, &ey).unwrap() * nx + scan_bin(a, &ex).unwrap();
            totals[cell] += 1;
            if mask[i] {
                counts[cell] += 1;
            }
        }
    }
    Some((counts, totals))
}

/// Type-7 quantile of a sorted slice.
pub fn type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() as f64 - 1.0) * p;
    let (j, g) = (h.floor(), h - h.floor());
    let j = j as usize;
    if j + 1 >= sorted.len() {
        sorted[j]
    } else {
        (1.0 - g) * sorted[j] + g * sorted[j + 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBox {
    pub count: usize,
    pub q: [f64; 3],
    pub whiskers: (f64, f64),
    pub outliers: usize,
}

pub fn box_of(mut v: Vec<f64>) -> OracleBox {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = [type7(&v, 0.25), type7(&v, 0.5), type7(&v, 0.75)];
    let iqr = q[2] - q[0];
    let (flo, fhi) = (q[0] - 1.5 * iqr, q[2] + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().cloned().filter(|x| *x >= flo && *x <= fhi).collect();
    OracleBox {
        count: v.len(),
        q,
        whiskers: (inside[0], *inside.last().unwrap()),
        outliers: v.len() - inside.len(),
    }
}

/// Box per category of `c` (by label), for filtered rows with a finite x.
pub fn grouped_boxes(p: &PlainTable, mask: &[bool]) -> std::collections::BTreeMap<String, OracleBox> {
    let mut groups: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for i in 0..p.len() {
        if let (Some(v), Some(g), true) = (finite(p.x[i]), &p.c[i], mask[i]) {
            groups.entry(g.clone()).or_default().push(v);
        }
    }
    groups.into_iter().map(|(g, v)| (g, box_of(v))).collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
