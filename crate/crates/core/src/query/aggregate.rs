//! Binned aggregations. Every aggregation reports filtered counts next to unfiltered totals.

use serde::{Deserialize, Serialize};

use super::Bitmask;
use crate::data::{column_stats, ColumnData, ColumnStats, ColumnTable, Validity};
use crate::error::{Error, Result};

pub const DEFAULT_HISTOGRAM_BINS: usize = 30;
pub const MAX_HEATMAP_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

/// Log scale iff all values are strictly positive and span more than three decades.
pub fn choose_scale(stats: &ColumnStats) -> Scale {
    match (stats.min, stats.max) {
        (Some(lo), Some(hi)) if lo > 0.0 && hi / lo > 1000.0 => Scale::Log,
        _ => Scale::Linear,
    }
}

/// Edge `k` of `bins` uniform bins over `[lo, hi]`; the last edge is exactly `hi`.
#[inline]
pub fn bin_edge(lo: f64, hi: f64, bins: usize, k: usize) -> f64 {
    if k == bins {
        hi
    } else {
        lo + (hi - lo) * k as f64 / bins as f64
    }
}

/// Uniform bin index over `[lo, hi]`: right-open bins, the last one closed.
/// Consistent with [`bin_edge`], so a value equal to an edge starts that bin.
#[inline]
pub fn uniform_bin(v: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if !(v >= lo && v <= hi) {
        return None;
    }
    let mut i = (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
    while i > 0 && v < bin_edge(lo, hi, bins, i) {
        i -= 1;
    }
    while i + 1 < bins && v >= bin_edge(lo, hi, bins, i + 1) {
        i += 1;
    }
    Some(i)
}

/// `[min, max]` widened by half a unit each side when degenerate.
fn bin_range(stats: &ColumnStats) -> Option<(f64, f64)> {
    let (lo, hi) = (stats.min?, stats.max?);
    if lo == hi {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub count: usize,
    /// Explicit range; defaults to the column's valid `[min, max]`.
    pub range: Option<(f64, f64)>,
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec {
            count: DEFAULT_HISTOGRAM_BINS,
            range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bins {
    /// `count + 1` ascending edges.
    Numeric { edges: Vec<f64> },
    /// One bin per dictionary entry, ordered by descending total.
    Categories { codes: Vec<u32>, labels: Vec<String> },
}

/// Filtered and total counts of one invalid class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCount {
    pub count: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidCounts {
    pub null: ClassCount,
    pub nan: ClassCount,
    pub inf: ClassCount,
}

impl InvalidCounts {
    fn tally(validity: &[Validity], filter: &Bitmask) -> Self {
        let mut out = InvalidCounts::default();
        for (i, v) in validity.iter().enumerate() {
            let slot = match v {
                Validity::Valid => continue,
                Validity::Null => &mut out.null,
                Validity::Nan => &mut out.nan,
                Validity::Inf => &mut out.inf,
            };
            slot.total += 1;
            if filter.get(i) {
                slot.count += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Bins,
    pub counts: Vec<u64>,
    pub totals: Vec<u64>,
    pub scale_hint: Scale,
    pub invalid: InvalidCounts,
}

impl Histogram {
    pub fn bin_count(&self) -> usize {
        self.totals.len()
    }
}

fn check_filter(table: &ColumnTable, filter: &Bitmask) -> Result<()> {
    if filter.len() != table.row_count() {
        return Err(Error::Param(format!(
            "filter has {} bits but table has {} rows",
            filter.len(),
            table.row_count()
        )));
    }
    Ok(())
}

/// 1D histogram of a numerical, categorical or multi-categorical column.
pub fn histogram1d(table: &ColumnTable, column: &str, spec: &BinSpec, filter: &Bitmask) -> Result<Histogram> {
    check_filter(table, filter)?;
    let col = table.column(column)?;
    let validity = col.validity();
    let invalid = InvalidCounts::tally(validity, filter);
    match col.data() {
        ColumnData::Numerical(values) => {
            let stats = column_stats(table, column)?;
            let scale_hint = choose_scale(&stats);
            if spec.count == 0 {
                return Err(Error::Param("histogram needs at least one bin".into()));
            }
            let range = match spec.range {
                Some((lo, hi)) if lo < hi => Some((lo, hi)),
                Some((lo, hi)) => return Err(Error::Param(format!("empty bin range [{lo}, {hi}]"))),
                None => bin_range(&stats),
            };
            let Some((lo, hi)) = range else {
                return Ok(Histogram {
                    bins: Bins::Numeric { edges: Vec::new() },
                    counts: Vec::new(),
                    totals: Vec::new(),
                    scale_hint,
                    invalid,
                });
            };
            let n = spec.count;
            let mut counts = vec![0u64; n];
            let mut totals = vec![0u64; n];
            for (i, v) in values.iter().enumerate() {
                if validity[i] != Validity::Valid {
                    continue;
                }
                if let Some(b) = uniform_bin(*v, lo, hi, n) {
                    totals[b] += 1;
                    if filter.get(i) {
                        counts[b] += 1;
                    }
                }
            }
            let edges = (0..=n).map(|k| bin_edge(lo, hi, n, k)).collect();
            Ok(Histogram {
                bins: Bins::Numeric { edges },
                counts,
                totals,
                scale_hint,
                invalid,
            })
        }
        ColumnData::Categorical { codes, dictionary } => {
            let mut counts = vec![0u64; dictionary.len()];
            let mut totals = vec![0u64; dictionary.len()];
            for (i, c) in codes.iter().enumerate() {
                if validity[i] == Validity::Valid {
                    totals[*c as usize] += 1;
                    if filter.get(i) {
                        counts[*c as usize] += 1;
                    }
                }
            }
            Ok(categorical_histogram(dictionary, counts, totals, invalid))
        }
        ColumnData::MultiCategorical { lists, dictionary } => {
            let mut counts = vec![0u64; dictionary.len()];
            let mut totals = vec![0u64; dictionary.len()];
            for (i, list) in lists.iter().enumerate() {
                if validity[i] != Validity::Valid {
                    continue;
                }
                let hit = filter.get(i);
                for c in list {
                    totals[*c as usize] += 1;
                    if hit {
                        counts[*c as usize] += 1;
                    }
                }
            }
            Ok(categorical_histogram(dictionary, counts, totals, invalid))
        }
        _ => Err(Error::Query(format!(
            "histogram requires a numerical or categorical column, {column} is {:?}",
            col.dtype()
        ))),
    }
}

fn categorical_histogram(dictionary: &[String], counts: Vec<u64>, totals: Vec<u64>, invalid: InvalidCounts) -> Histogram {
    let mut order: Vec<u32> = (0..dictionary.len() as u32).collect();
    order.sort_by(|a, b| totals[*b as usize].cmp(&totals[*a as usize]).then(a.cmp(b)));
    Histogram {
        bins: Bins::Categories {
            labels: order.iter().map(|c| dictionary[*c as usize].clone()).collect(),
            codes: order.clone(),
        },
        counts: order.iter().map(|c| counts[*c as usize]).collect(),
        totals: order.iter().map(|c| totals[*c as usize]).collect(),
        scale_hint: Scale::Linear,
        invalid,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Row-major, `ny` rows of `nx` cells; row 0 is the lowest y.
    pub counts: Vec<u64>,
    pub totals: Vec<u64>,
}

/// 2D count grid over two numerical columns. Bin counts are capped at 256 per axis.
pub fn heatmap2d(table: &ColumnTable, x: &str, y: &str, nx: usize, ny: usize, filter: &Bitmask) -> Result<Heatmap> {
    check_filter(table, filter)?;
    let xc = table.column(x)?;
    let yc = table.column(y)?;
    let (Some(xs), Some(ys)) = (xc.as_numerical(), yc.as_numerical()) else {
        return Err(Error::Query(format!("heatmap requires numerical columns, got {x}, {y}")));
    };
    if nx == 0 || ny == 0 {
        return Err(Error::Param("heatmap needs at least one bin per axis".into()));
    }
    let nx = nx.min(MAX_HEATMAP_BINS);
    let ny = ny.min(MAX_HEATMAP_BINS);
    let (Some(xr), Some(yr)) = (bin_range(&column_stats(table, x)?), bin_range(&column_stats(table, y)?)) else {
        return Ok(Heatmap {
            nx: 0,
            ny: 0,
            x_range: (f64::NAN, f64::NAN),
            y_range: (f64::NAN, f64::NAN),
            counts: Vec::new(),
            totals: Vec::new(),
        });
    };
    let mut counts = vec![0u64; nx * ny];
    let mut totals = vec![0u64; nx * ny];
    for i in 0..table.row_count() {
        if !(xc.is_valid(i) && yc.is_valid(i)) {
            continue;
        }
        if let (Some(bx), Some(by)) = (uniform_bin(xs[i], xr.0, xr.1, nx), uniform_bin(ys[i], yr.0, yr.1, ny)) {
            let cell = by * nx + bx;
            totals[cell] += 1;
            if filter.get(i) {
                counts[cell] += 1;
            }
        }
    }
    Ok(Heatmap {
        nx,
        ny,
        x_range: xr,
        y_range: yr,
        counts,
        totals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outlier_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBox {
    /// Group value, or `None` for the ungrouped case.
    pub group: Option<String>,
    pub stats: BoxStats,
}

/// Linear-interpolation quantile (R type 7) of an ascending slice.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box statistics of an ascending, non-empty slice with 1.5·IQR whiskers.
pub fn box_stats(sorted: &[f64]) -> BoxStats {
    let q1 = quantile_type7(sorted, 0.25);
    let median = quantile_type7(sorted, 0.5);
    let q3 = quantile_type7(sorted, 0.75);
    let iqr = q3 - q1;
    let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let lo_idx = sorted.partition_point(|v| *v < fence_lo);
    let hi_idx = sorted.partition_point(|v| *v <= fence_hi);
    BoxStats {
        count: sorted.len(),
        q1,
        median,
        q3,
        whisker_lo: sorted[lo_idx],
        whisker_hi: sorted[hi_idx - 1],
        outlier_count: lo_idx + (sorted.len() - hi_idx),
    }
}

/// Box plot of a numerical column, optionally per value of a categorical group column.
/// Groups without filtered valid rows are omitted.
pub fn boxplot(table: &ColumnTable, value: &str, group: Option<&str>, filter: &Bitmask) -> Result<Vec<GroupBox>> {
    check_filter(table, filter)?;
    let vc = table.column(value)?;
    let Some(values) = vc.as_numerical() else {
        return Err(Error::Query(format!("boxplot requires a numerical column, {value} is {:?}", vc.dtype())));
    };
    let keep = |i: usize| vc.is_valid(i) && filter.get(i);
    let mut buckets: Vec<(Option<String>, Vec<f64>)> = match group {
        None => vec![(None, (0..table.row_count()).filter(|i| keep(*i)).map(|i| values[i]).collect())],
        Some(g) => {
            let gc = table.column(g)?;
            let ColumnData::Categorical { codes, dictionary } = gc.data() else {
                return Err(Error::Query(format!("group column {g} must be categorical")));
            };
            let mut b: Vec<(Option<String>, Vec<f64>)> = dictionary.iter().map(|d| (Some(d.clone()), Vec::new())).collect();
            for i in 0..table.row_count() {
                if keep(i) && gc.is_valid(i) {
                    b[codes[i] as usize].1.push(values[i]);
                }
            }
            b
        }
    };
    Ok(buckets
        .iter_mut()
        .filter(|(_, v)| !v.is_empty())
        .map(|(g, v)| {
            v.sort_by(f64::total_cmp);
            GroupBox {
                group: g.clone(),
                stats: box_stats(v),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;

    fn num(values: Vec<f64>) -> ColumnTable {
        ColumnTable::new(vec![Column::numerical("v", values)]).unwrap()
    }

    #[test]
    fn right_open_bins_last_closed() {
        let t = num(vec![1.0, 2.0, 2.0, 3.0]);
        let h = histogram1d(&t, "v", &BinSpec { count: 2, range: None }, &Bitmask::ones(4)).unwrap();
        assert_eq!(h.bins, Bins::Numeric { edges: vec![1.0, 2.0, 3.0] });
        // [1,2) holds 1; [2,3] holds 2, 2, 3
        assert_eq!(h.totals, vec![1, 3]);
    }

    #[test]
    fn multi_categorical_counts_each_element() {
        let t = ColumnTable::new(vec![Column::multi_categorical("m", &[Some(vec!["a", "b"]), Some(vec!["b"])])]).unwrap();
        let h = histogram1d(&t, "m", &BinSpec::default(), &Bitmask::ones(2)).unwrap();
        assert_eq!(
            h.bins,
            Bins::Categories {
                codes: vec![1, 0],
                labels: vec!["b".into(), "a".into()]
            }
        );
        assert_eq!(h.totals, vec![2, 1]);
    }

    #[test]
    fn categorical_sorted_by_total_then_code() {
        let t = ColumnTable::new(vec![Column::categorical(
            "c",
            &[Some("x"), Some("y"), Some("y"), Some("z"), Some("x"), None],
        )])
        .unwrap();
        let filter = Bitmask::from_fn(6, |i| i < 2);
        let h = histogram1d(&t, "c", &BinSpec::default(), &filter).unwrap();
        match &h.bins {
            Bins::Categories { labels, .. } => assert_eq!(labels, &["x", "y", "z"]),
            other => panic!("{other:?}"),
        }
        assert_eq!(h.totals, vec![2, 2, 1]);
        assert_eq!(h.counts, vec![1, 1, 0]);
        assert_eq!(h.invalid.null, ClassCount { count: 0, total: 1 });
    }

    #[test]
    fn all_invalid_column_gives_empty_histogram() {
        let t = num(vec![f64::NAN, f64::INFINITY]);
        let h = histogram1d(&t, "v", &BinSpec::default(), &Bitmask::ones(2)).unwrap();
        assert_eq!(h.bin_count(), 0);
        assert_eq!(h.invalid.nan.total, 1);
        assert_eq!(h.invalid.inf.total, 1);
    }

    #[test]
    fn text_column_histogram_is_query_error() {
        let t = ColumnTable::new(vec![Column::text("t", &[Some("a")])]).unwrap();
        assert!(matches!(
            histogram1d(&t, "t", &BinSpec::default(), &Bitmask::ones(1)),
            Err(Error::Query(_))
        ));
    }

    #[test]
    fn heatmap_diagonal() {
        let t = ColumnTable::new(vec![Column::numerical("x", vec![0.0, 1.0]), Column::numerical("y", vec![0.0, 1.0])]).unwrap();
        let h = heatmap2d(&t, "x", "y", 2, 2, &Bitmask::ones(2)).unwrap();
        assert_eq!(h.totals, vec![1, 0, 0, 1]);
    }

    #[test]
    fn heatmap_single_point() {
        let t = ColumnTable::new(vec![Column::numerical("x", vec![3.0]), Column::numerical("y", vec![-2.0])]).unwrap();
        let h = heatmap2d(&t, "x", "y", 4, 4, &Bitmask::ones(1)).unwrap();
        assert_eq!(h.totals.iter().sum::<u64>(), 1);
        assert_eq!(h.totals.iter().filter(|c| **c == 1).count(), 1);
    }

    #[test]
    fn heatmap_caps_bins_and_skips_invalid() {
        let t = ColumnTable::new(vec![
            Column::numerical("x", vec![0.0, 1.0, f64::NAN]),
            Column::numerical("y", vec![0.0, 1.0, 0.5]),
        ])
        .unwrap();
        let h = heatmap2d(&t, "x", "y", 1000, 3, &Bitmask::ones(3)).unwrap();
        assert_eq!((h.nx, h.ny), (256, 3));
        assert_eq!(h.totals.iter().sum::<u64>(), 2);
    }

    #[test]
    fn box_one_to_nine() {
        let t = num((1..=9).map(f64::from).collect());
        let b = boxplot(&t, "v", None, &Bitmask::ones(9)).unwrap();
        let s = b[0].stats;
        assert_eq!((s.q1, s.median, s.q3), (3.0, 5.0, 7.0));
        assert_eq!((s.whisker_lo, s.whisker_hi, s.outlier_count), (1.0, 9.0, 0));
    }

    #[test]
    fn box_constant() {
        let t = num(vec![1.0, 1.0, 1.0]);
        let s = boxplot(&t, "v", None, &Bitmask::ones(3)).unwrap()[0].stats;
        assert_eq!([s.q1, s.median, s.q3, s.whisker_lo, s.whisker_hi], [1.0; 5]);
    }

    #[test]
    fn box_outliers_and_empty_groups() {
        let t = ColumnTable::new(vec![
            Column::numerical("v", vec![1.0, 2.0, 3.0, 4.0, 100.0, 5.0]),
            Column::categorical("g", &[Some("a"), Some("a"), Some("a"), Some("a"), Some("a"), Some("b")]),
        ])
        .unwrap();
        let filter = Bitmask::from_fn(6, |i| i < 5);
        let b = boxplot(&t, "v", Some("g"), &filter).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].group.as_deref(), Some("a"));
        assert_eq!(b[0].stats.outlier_count, 1);
        assert_eq!(b[0].stats.whisker_hi, 4.0);
    }

    #[test]
    fn scale_rule() {
        let mk = |lo: f64, hi: f64| ColumnStats {
            row_count: 2,
            valid_count: 2,
            null_count: 0,
            nan_count: 0,
            inf_count: 0,
            min: Some(lo),
            max: Some(hi),
            distinct_count: None,
            dimensionality: None,
        };
        assert_eq!(choose_scale(&mk(1.0, 1e6)), Scale::Log);
        assert_eq!(choose_scale(&mk(-1.0, 1e6)), Scale::Linear);
        assert_eq!(choose_scale(&mk(1.0, 500.0)), Scale::Linear);
        assert_eq!(choose_scale(&mk(1.0, 1000.0)), Scale::Linear);
    }
}
