use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use crate::data::ColumnTable;

const STOPWORDS_TXT: &str = include_str!("stopwords.txt");

pub const MIN_TOKEN_CHARS: usize = 3;
pub const DEFAULT_TOP_K: usize = 3;

pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_TXT.lines().map(str::trim).filter(|l| !l.is_empty()).collect())
}

/// Lowercased alphanumeric runs of at least three characters, stopwords removed.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    let stop = stopwords();
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= MIN_TOKEN_CHARS)
        .map(str::to_lowercase)
        .filter(move |t| !stop.contains(t.as_str()))
}

pub fn fallback_label(id: u32) -> String {
    format!("cluster {id}")
}

/// Token frequencies per cluster id `0..k` from the text of each member row.
fn cluster_term_counts(
    table: &ColumnTable,
    text_column: &str,
    assignment: &[Option<u32>],
    k: usize,
) -> Option<Vec<BTreeMap<String, u64>>> {
    let col = table.column(text_column).ok()?;
    let mut counts = vec![BTreeMap::new(); k];
    for (row, id) in assignment.iter().enumerate() {
        let Some(id) = id else { continue };
        if let Some(text) = col.str_value(row) {
            for tok in tokenize(text) {
                *counts[*id as usize].entry(tok).or_insert(0) += 1;
            }
        }
    }
    Some(counts)
}

/// Class-based TF-IDF score of every term in every cluster:
/// `tf(term, cluster) · ln(k / clusters containing term)`.
pub fn term_scores(counts: &[BTreeMap<String, u64>]) -> Vec<Vec<(String, f64, u64)>> {
    let k = counts.len() as f64;
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for c in counts {
        for t in c.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    counts
        .iter()
        .map(|c| {
            c.iter()
                .map(|(t, tf)| (t.clone(), *tf as f64 * (k / df[t.as_str()] as f64).ln(), *tf))
                .collect()
        })
        .collect()
}

/// Top `top_k` terms by score, then frequency, then alphabetically.
pub fn top_terms(mut scored: Vec<(String, f64, u64)>, top_k: usize) -> Vec<String> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));
    scored.into_iter().take(top_k).map(|(t, _, _)| t).collect()
}

/// Labels for clusters `0..k`. Clusters without usable text, or a missing
/// text column, get `"cluster {id}"`.
pub fn summarize_clusters(
    table: &ColumnTable,
    text_column: Option<&str>,
    assignment: &[Option<u32>],
    k: usize,
    top_k: usize,
) -> Vec<String> {
    let counts = text_column.and_then(|c| cluster_term_counts(table, c, assignment, k));
    let Some(counts) = counts else {
        return (0..k as u32).map(fallback_label).collect();
    };
    term_scores(&counts)
        .into_iter()
        .enumerate()
        .map(|(id, scored)| {
            let terms = top_terms(scored, top_k);
            if terms.is_empty() {
                fallback_label(id as u32)
            } else {
                terms.join(", ")
            }
        })
        .collect()
}

/// Label of a single cluster, scored against all clusters in `assignment`.
pub fn summarize_cluster(
    table: &ColumnTable,
    text_column: Option<&str>,
    assignment: &[Option<u32>],
    cluster: u32,
    top_k: usize,
) -> String {
    let k = assignment.iter().flatten().map(|id| *id as usize + 1).max().unwrap_or(0);
    if cluster as usize >= k {
        return fallback_label(cluster);
    }
    summarize_clusters(table, text_column, assignment, k, top_k).swap_remove(cluster as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;

    #[test]
    fn stopword_list_is_pinned() {
        assert_eq!(stopwords().len(), 122);
        assert!(stopwords().contains("the"));
    }

    #[test]
    fn tokenizer_rules() {
        let toks: Vec<String> = tokenize("The QUICK brown-fox, an ox; naïve42 x").collect();
        assert_eq!(toks, vec!["quick", "brown", "fox", "naïve42"]);
    }

    #[test]
    fn alphabetical_tie_break() {
        let t = ColumnTable::new(vec![Column::text(
            "t",
            &[Some("alpha beta"), Some("alpha beta"), Some("gamma"), Some("gamma")],
        )])
        .unwrap();
        let a = [Some(0), Some(0), Some(1), Some(1)];
        assert_eq!(summarize_cluster(&t, Some("t"), &a, 0, 1), "alpha");
        assert_eq!(summarize_cluster(&t, Some("t"), &a, 1, 1), "gamma");
        assert_eq!(summarize_cluster(&t, Some("t"), &a, 0, 5), "alpha, beta");
    }

    #[test]
    fn missing_text_falls_back() {
        let t = ColumnTable::new(vec![Column::text::<&str>("t", &[None, Some("")])]).unwrap();
        let a = [Some(0), Some(0)];
        assert_eq!(summarize_cluster(&t, Some("t"), &a, 0, 3), "cluster 0");
        assert_eq!(summarize_cluster(&t, None, &a, 0, 3), "cluster 0");
        assert_eq!(summarize_cluster(&t, Some("nope"), &a, 0, 3), "cluster 0");
    }
}
