use std::collections::{BTreeMap, HashMap};

use atlas_core::clustering::{
    assign_cells, assign_points, build_multiresolution, find_peaks, noise_threshold, summarize_clusters, ClusterParams,
    TextSource,
};
use atlas_core::data::{Column, ColumnTable};
use atlas_core::density::{kde, DensityField, Extent};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn mixture(centres: &[[f64; 2]], sd: f64, n: usize, seed: u64) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Normal::new(0.0, sd).unwrap();
    (0..n)
        .map(|i| {
            let k = i % centres.len();
            ([centres[k][0] + g.sample(&mut rng), centres[k][1] + g.sample(&mut rng)], k)
        })
        .unzip()
}

fn field_for(points: &[[f64; 2]], sigma: f64) -> DensityField {
    kde(points, None, Extent::covering(points, 0.02).unwrap(), 128, 128, sigma).unwrap()
}

/// Every strict 8-neighbourhood maximum, found independently.
fn all_strict_maxima(f: &DensityField) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..f.ny as isize {
        for c in 0..f.nx as isize {
            let v = f.at(c as usize, r as usize);
            let mut strict = true;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if (dr, dc) != (0, 0) && rr >= 0 && cc >= 0 && rr < f.ny as isize && cc < f.nx as isize {
                        strict &= f.at(cc as usize, rr as usize) < v;
                    }
                }
            }
            if strict {
                out.push((c as usize, r as usize));
            }
        }
    }
    out
}

#[test]
fn single_blob_single_peak_at_mode() {
    let (pts, _) = mixture(&[[0.0, 0.0]], 1.0, 20_000, 1);
    let f = field_for(&pts, 6.0);
    let peaks = find_peaks(&f, 0.05, 4.0);
    assert_eq!(peaks.len(), 1);
    let mode = f.values.iter().copied().fold(0.0, f64::max);
    assert_eq!(peaks[0].density, mode);
}

#[test]
fn two_blobs_two_peaks_that_match_the_maxima_oracle() {
    let (pts, truth) = mixture(&[[-6.0, 0.0], [6.0, 0.0]], 1.0, 20_000, 2);
    let f = field_for(&pts, 4.0);
    let peaks = find_peaks(&f, 0.05, 4.0);
    assert_eq!(peaks.len(), 2);
    let threshold = noise_threshold(&f, 0.05).unwrap();
    let maxima = all_strict_maxima(&f);
    for p in &peaks {
        assert!(maxima.contains(&(p.col, p.row)));
        assert!(p.density >= threshold);
    }
    // partition agrees with the generating component up to relabelling
    let a = assign_points(&pts, &f, &peaks, 0.05);
    let mut pairs: HashMap<(usize, u32), usize> = HashMap::new();
    for (t, id) in truth.iter().zip(&a) {
        if let Some(id) = id {
            *pairs.entry((*t, *id)).or_default() += 1;
        }
    }
    let agree = pairs.iter().filter(|((t, id), _)| *t as u32 == *id).map(|(_, n)| n).sum::<usize>();
    let disagree = pairs.iter().filter(|((t, id), _)| *t as u32 != *id).map(|(_, n)| n).sum::<usize>();
    assert!(agree.max(disagree) as f64 >= 0.95 * pts.len() as f64, "{pairs:?}");
    assert!(agree.min(disagree) <= 10, "{pairs:?}");
}

#[test]
fn cluster_ids_follow_descending_peak_density() {
    let (mut pts, _) = mixture(&[[-6.0, 0.0]], 1.0, 12_000, 3);
    pts.extend(mixture(&[[6.0, 0.0]], 1.0, 4_000, 4).0);
    let f = field_for(&pts, 4.0);
    let peaks = find_peaks(&f, 0.05, 4.0);
    assert_eq!(peaks.len(), 2);
    assert!(peaks[0].density > peaks[1].density);
    let a = assign_points(&pts, &f, &peaks, 0.05);
    assert_eq!(a[0], Some(0));
    assert_eq!(a[12_000], Some(1));
}

#[test]
fn ascent_invariants_hold_on_every_cell() {
    let (pts, _) = mixture(&[[-5.0, -2.0], [4.0, 3.0], [0.0, 8.0]], 1.3, 15_000, 5);
    let f = field_for(&pts, 3.0);
    let peaks = find_peaks(&f, 0.05, 4.0);
    let threshold = noise_threshold(&f, 0.05).unwrap();
    let cells = assign_cells(&f, &peaks, 0.05);
    for (i, id) in cells.iter().enumerate() {
        match id {
            Some(id) => {
                assert!(f.values[i] >= threshold);
                assert!(peaks[*id as usize].density >= f.values[i]);
            }
            // every ascent here ends on a kept peak, so only sub-threshold cells are noise
            None => assert!(f.values[i] < threshold),
        }
    }
    for (id, p) in peaks.iter().enumerate() {
        assert_eq!(cells[p.row * f.nx + p.col], Some(id as u32));
    }
}

#[test]
fn zero_density_corner_is_noise() {
    let (pts, _) = mixture(&[[0.0, 0.0]], 1.0, 5_000, 6);
    let f = kde(&pts, None, Extent::new(-20.0, 20.0, -20.0, 20.0).unwrap(), 128, 128, 4.0).unwrap();
    let peaks = find_peaks(&f, 0.05, 4.0);
    let a = assign_points(&[[19.9, 19.9], [0.0, 0.0]], &f, &peaks, 0.05);
    assert_eq!(a, vec![None, Some(0)]);
}

#[test]
fn hierarchical_mixture_resolves_per_level() {
    let centres = [[-15.0, 0.0], [-10.0, 0.0], [10.0, 0.0], [15.0, 0.0]];
    let (pts, _) = mixture(&centres, 1.0, 40_000, 7);
    let extent = Extent::covering(&pts, 0.02).unwrap();
    let params = ClusterParams::default();
    let model = build_multiresolution(&pts, extent, &params, None).unwrap();
    let counts: Vec<usize> = model.levels.iter().map(|l| l.clusters.len()).collect();
    assert_eq!(counts.first(), Some(&2));
    assert_eq!(counts.last(), Some(&4));
    for level in &model.levels {
        assert_eq!(level.assignment.len(), pts.len());
        let sized: usize = level.clusters.iter().map(|c| c.size).sum();
        assert_eq!(sized, level.assignment.iter().flatten().count());
    }
}

#[test]
fn empty_input_gives_empty_levels() {
    let extent = Extent::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let model = build_multiresolution(&[], extent, &ClusterParams::default(), None).unwrap();
    assert_eq!(model.levels.len(), 3);
    assert!(model.levels.iter().all(|l| l.clusters.is_empty()));
}

#[test]
fn levels_must_run_coarse_to_fine() {
    let extent = Extent::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let params = ClusterParams {
        sigmas: vec![8.0, 16.0],
        ..Default::default()
    };
    assert!(build_multiresolution(&[], extent, &params, None).is_err());
    let params = ClusterParams {
        sigmas: vec![],
        ..Default::default()
    };
    assert!(build_multiresolution(&[], extent, &params, None).is_err());
}

#[test]
fn model_json_lists_levels_and_clusters() {
    let (pts, _) = mixture(&[[0.0, 0.0]], 1.0, 3_000, 8);
    let extent = Extent::covering(&pts, 0.02).unwrap();
    let model = build_multiresolution(&pts, extent, &ClusterParams::default(), None).unwrap();
    let json = serde_json::to_value(&model).unwrap();
    let c = &json["levels"][0]["clusters"][0];
    assert_eq!(c["id"], 0);
    assert_eq!(c["label"], "cluster 0");
    assert!(c["anchor"].as_array().unwrap().len() == 2);
    assert!(c["size"].as_u64().unwrap() > 2_900);
}

const TOPIC_A: [&str; 4] = ["rocket", "orbit", "launch", "engine"];
const TOPIC_B: [&str; 4] = ["pasta", "sauce", "garlic", "basil"];
const SHARED: [&str; 3] = ["report", "today", "great"];

fn corpus(seed: u64) -> (Vec<[f64; 2]>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pts, truth) = mixture(&[[-8.0, 0.0], [8.0, 0.0]], 1.0, 4_000, seed);
    let texts = truth
        .iter()
        .map(|t| {
            let topic = if *t == 0 { &TOPIC_A } else { &TOPIC_B };
            let mut words: Vec<&str> = (0..4).map(|_| topic[rng.random_range(0..4)]).collect();
            words.push(SHARED[rng.random_range(0..3)]);
            if *t == 0 {
                words.push("rocket");
            }
            words.join(" ")
        })
        .collect();
    (pts, texts)
}

/// Direct recomputation of class-based TF-IDF with the documented ranking.
fn tfidf_oracle(texts: &[String], assignment: &[Option<u32>], k: usize, top_k: usize) -> Vec<Vec<String>> {
    let stop = atlas_core::clustering::stopwords();
    let mut tf: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); k];
    for (t, a) in texts.iter().zip(assignment) {
        let Some(a) = a else { continue };
        for w in t.to_lowercase().split(|c: char| !c.is_alphanumeric()) {
            if w.chars().count() >= 3 && !stop.contains(w) {
                *tf[*a as usize].entry(w.to_string()).or_default() += 1;
            }
        }
    }
    (0..k)
        .map(|c| {
            let mut scored: Vec<(f64, u64, String)> = tf[c]
                .iter()
                .map(|(w, n)| {
                    let df = tf.iter().filter(|m| m.contains_key(w)).count();
                    (*n as f64 * (k as f64 / df as f64).ln(), *n, w.clone())
                })
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
            scored.into_iter().take(top_k).map(|s| s.2).collect()
        })
        .collect()
}

#[test]
fn labels_carry_planted_keywords_and_match_oracle() {
    let (pts, texts) = corpus(9);
    let table = ColumnTable::new(vec![Column::text("body", &texts.iter().map(Some).collect::<Vec<_>>())]).unwrap();
    let f = field_for(&pts, 4.0);
    let peaks = find_peaks(&f, 0.05, 4.0);
    assert_eq!(peaks.len(), 2);
    let a = assign_points(&pts, &f, &peaks, 0.05);
    let labels = summarize_clusters(&table, Some("body"), &a, 2, 3);
    let oracle = tfidf_oracle(&texts, &a, 2, 3);
    for (l, o) in labels.iter().zip(&oracle) {
        assert_eq!(l, &o.join(", "));
        assert!(!SHARED.iter().any(|s| l.contains(s)), "{l}");
    }
    let rocket_cluster = a[0].unwrap() as usize;
    assert!(labels[rocket_cluster].starts_with("rocket"));
    assert!(TOPIC_B.iter().any(|w| labels[1 - rocket_cluster].contains(w)));
}

#[test]
fn labels_ignore_row_order_and_runs_are_deterministic() {
    let (pts, texts) = corpus(10);
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    let run = |idx: &[usize]| {
        let p: Vec<[f64; 2]> = idx.iter().map(|i| pts[*i]).collect();
        let t: Vec<Option<&String>> = idx.iter().map(|i| Some(&texts[*i])).collect();
        let table = ColumnTable::new(vec![Column::text("body", &t)]).unwrap();
        let extent = Extent::covering(&pts, 0.02).unwrap();
        let model = build_multiresolution(
            &p,
            extent,
            &ClusterParams::default(),
            Some(TextSource {
                table: &table,
                column: "body",
            }),
        )
        .unwrap();
        let labels: Vec<Vec<String>> = model
            .levels
            .iter()
            .map(|l| l.clusters.iter().map(|c| c.label.clone()).collect())
            .collect();
        (model, labels)
    };
    let identity: Vec<usize> = (0..pts.len()).collect();
    let (m1, l1) = run(&identity);
    let (m2, _) = run(&identity);
    assert_eq!(m1, m2);
    let (m3, l3) = run(&order);
    assert_eq!(l1, l3);
    for (a, b) in m1.levels.iter().zip(&m3.levels) {
        assert_eq!(a.peaks, b.peaks);
        for (pos, i) in order.iter().enumerate() {
            assert_eq!(a.assignment[*i], b.assignment[pos]);
        }
    }
}
