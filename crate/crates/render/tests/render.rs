use atlas_core::density::{kde, DensityField, Extent};
use atlas_core::query::Bitmask;
use atlas_render::{
    benchmark, rasterize_points, render_density, BenchConfig, BenchReport, DensityStyle, FrameBuffer, PointStyle,
    Viewport, BENCH_REPORT_SCHEMA,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const W: u32 = 48;
const H: u32 = 40;

/// Zoom 1 with the centre at the frame middle: data (x, y) lands on screen (x, H − y).
fn identity_view() -> Viewport {
    Viewport::new([W as f64 / 2.0, H as f64 / 2.0], 1.0, W, H).unwrap()
}

fn lattice(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo * 64.0..hi * 64.0) as i64) as f64 / 64.0
}

fn coverage(px: u32, py: u32, x: f64, y: f64, r: f64) -> f64 {
    let h = 0.5f64.sqrt();
    let d = ((px as f64 + 0.5 - x).powi(2) + (py as f64 + 0.5 - y).powi(2)).sqrt();
    if r > h && d <= r - h {
        return 1.0;
    }
    if d >= r + h {
        return 0.0;
    }
    let mut hits = 0;
    for (ox, oy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
        let e = ((px as f64 + ox - x).powi(2) + (py as f64 + oy - y).powi(2)).sqrt();
        if e <= r {
            hits += 1;
        }
    }
    hits as f64 / 4.0
}

/// Direct evaluation of the blend formula, every pixel against every point.
fn oracle_frame(points: &[[f64; 2]], colors: &[[f32; 3]], style: &PointStyle, view: &Viewport) -> Vec<[f64; 4]> {
    let bg = style.background.map(f64::from);
    let mut out = Vec::new();
    for py in 0..view.height {
        for px in 0..view.width {
            let (mut c, mut a, mut r) = ([0.0f64; 3], 0.0f64, 1.0f64);
            for (p, col) in points.iter().zip(colors) {
                let [sx, sy] = view.to_screen(p[0], p[1]);
                let al = style.alpha as f64 * coverage(px, py, sx, sy, style.radius as f64);
                if al > 0.0 {
                    for k in 0..3 {
                        c[k] += al * col[k] as f64;
                    }
                    a += al;
                    r *= 1.0 - al;
                }
            }
            if a == 0.0 {
                out.push(bg);
            } else {
                let f = |k: usize| (c[k] / a.max(1e-6) * (1.0 - r) + bg[k] * r).clamp(0.0, 1.0);
                out.push([f(0), f(1), f(2), ((1.0 - r) + bg[3] * r).clamp(0.0, 1.0)]);
            }
        }
    }
    out
}

fn max_diff_to_oracle(frame: &FrameBuffer, oracle: &[[f64; 4]]) -> f64 {
    let mut worst = 0.0f64;
    for (i, o) in oracle.iter().enumerate() {
        let p = frame.pixel(i as u32 % frame.width(), i as u32 / frame.width());
        for k in 0..4 {
            worst = worst.max((p[k] as f64 - o[k]).abs());
        }
    }
    worst
}

fn random_scene(rng: &mut ChaCha8Rng, n: usize) -> (Vec<[f64; 2]>, Vec<u32>, PointStyle) {
    let points = (0..n)
        .map(|_| [lattice(rng, 10.0, 30.0), lattice(rng, 10.0, 30.0)])
        .collect();
    let cats = (0..n).map(|_| rng.random_range(0..12)).collect();
    let style = PointStyle {
        radius: [0.5, 1.0, 2.0, 3.5][rng.random_range(0..4)],
        alpha: rng.random_range(0.05..=1.0),
        ..PointStyle::default()
    };
    (points, cats, style)
}

#[test]
fn opaque_point_is_exact_at_its_centre() {
    let style = PointStyle {
        alpha: 1.0,
        ..PointStyle::default()
    };
    let f = rasterize_points(&[[20.3, 17.6]], Some(&[2]), None, &identity_view(), &style).unwrap();
    let [sx, sy] = identity_view().to_screen(20.3, 17.6);
    let p = f.pixel(sx as u32, sy as u32);
    let c = style.palette[2];
    assert_eq!([p[0], p[1], p[2], p[3]], [c[0], c[1], c[2], 1.0]);
}

#[test]
fn three_overlapping_points_match_formula() {
    let style = PointStyle::default();
    let pts = [[20.5, 20.5], [20.75, 20.25], [20.25, 20.5]];
    let codes = [0u32, 1, 3];
    let f = rasterize_points(&pts, Some(&codes), None, &identity_view(), &style).unwrap();
    // screen pixel (20, 19) has its centre within r − √½ of all three points
    let a = style.alpha as f64;
    let cols: Vec<[f32; 3]> = codes.iter().map(|c| style.palette[*c as usize]).collect();
    let r = (1.0 - a).powi(3);
    let expect: Vec<f64> = (0..3)
        .map(|k| cols.iter().map(|c| a * c[k] as f64).sum::<f64>() / (3.0 * a) * (1.0 - r) + r)
        .collect();
    let p = f.pixel(20, 19);
    for k in 0..3 {
        assert!((p[k] as f64 - expect[k]).abs() < 1e-6, "channel {k}: {} vs {}", p[k], expect[k]);
    }
}

#[test]
fn frames_match_direct_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let view = identity_view();
    for _ in 0..40 {
        let n = rng.random_range(1..60);
        let (pts, cats, style) = random_scene(&mut rng, n);
        let f = rasterize_points(&pts, Some(&cats), None, &view, &style).unwrap();
        let colors: Vec<[f32; 3]> = cats.iter().map(|c| style.color_of(Some(*c))).collect();
        let worst = max_diff_to_oracle(&f, &oracle_frame(&pts, &colors, &style, &view));
        assert!(worst < 1e-5, "worst channel error {worst}");
    }
}

#[test]
fn mask_hides_points() {
    let pts = [[10.0, 10.0], [30.0, 30.0]];
    let mut mask = Bitmask::ones(2);
    mask.set(1, false);
    let view = identity_view();
    let style = PointStyle::default();
    let masked = rasterize_points(&pts, None, Some(&mask), &view, &style).unwrap();
    let single = rasterize_points(&pts[..1], None, None, &view, &style).unwrap();
    assert_eq!(masked, single);
}

#[test]
fn non_finite_points_are_skipped_and_output_stays_finite() {
    let pts = [
        [f64::NAN, 1.0],
        [f64::INFINITY, 3.0],
        [1e300, -1e300],
        [20.0, 20.0],
        [20.0, 20.0],
    ];
    for alpha in [1e-30, 1e-7, 0.999_999, 1.0] {
        let style = PointStyle {
            alpha,
            radius: 40.0,
            ..PointStyle::default()
        };
        let f = rasterize_points(&pts, None, None, &identity_view(), &style).unwrap();
        assert!(f.data().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
    }
}

#[test]
fn invalid_style_is_rejected() {
    for style in [
        PointStyle {
            alpha: 0.0,
            ..PointStyle::default()
        },
        PointStyle {
            radius: -1.0,
            ..PointStyle::default()
        },
        PointStyle {
            palette: vec![[2.0, 0.0, 0.0]],
            ..PointStyle::default()
        },
    ] {
        assert!(rasterize_points(&[[0.0, 0.0]], None, None, &identity_view(), &style).is_err());
    }
}

fn luminance(f: &FrameBuffer) -> Vec<f64> {
    f.data().chunks(4).map(|p| (p[0] + p[1] + p[2]) as f64 / 3.0).collect()
}

#[test]
fn panning_shifts_the_image() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pts: Vec<[f64; 2]> = (0..400).map(|_| [rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)]).collect();
    let (w, h, zoom) = (160u32, 120u32, 2.0);
    let style = PointStyle::default();
    let base = Viewport::new([0.0, 0.0], zoom, w, h).unwrap();
    let (dx, dy) = (3.5, -1.5);
    let moved = Viewport::new([dx, dy], zoom, w, h).unwrap();
    let a = luminance(&rasterize_points(&pts, None, None, &base, &style).unwrap());
    let b = luminance(&rasterize_points(&pts, None, None, &moved, &style).unwrap());
    // content moves by (−dx·zoom, +dy·zoom) pixels
    let expect = ((-dx * zoom) as i64, (dy * zoom) as i64);
    let margin = 20i64;
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for sy in -10..=10i64 {
        for sx in -10..=10i64 {
            let mut score = 0.0;
            for y in margin..h as i64 - margin {
                for x in margin..w as i64 - margin {
                    let i = (y * w as i64 + x) as usize;
                    let j = ((y + sy) * w as i64 + x + sx) as usize;
                    score += (1.0 - a[i]) * (1.0 - b[j]);
                }
            }
            if score > best.0 {
                best = (score, (sx, sy));
            }
        }
    }
    assert_eq!(best.1, expect);
}

#[test]
fn output_is_bit_identical_across_thread_counts() {
    let (pts, cats) = atlas_render::synthetic_points(20_000, 5, 1);
    let view = Viewport::new([0.0, 0.0], 20.0, 300, 260).unwrap();
    let style = PointStyle::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| rasterize_points(&pts, Some(&cats), None, &view, &style).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(4));
}

#[test]
fn png_export_decodes_to_the_same_pixels() {
    let f = rasterize_points(&[[20.0, 20.0]], None, None, &identity_view(), &PointStyle::default()).unwrap();
    let mut bytes = Vec::new();
    f.write_png(&mut bytes).unwrap();
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    assert_eq!((info.width, info.height), (W, H));
    assert_eq!(&buf[..info.buffer_size()], &f.to_rgba8()[..]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn draw_order_does_not_matter(seed in any::<u64>(), n in 1usize..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pts, cats, style) = random_scene(&mut rng, n);
        let view = identity_view();
        let base = rasterize_points(&pts, Some(&cats), None, &view, &style).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let p2: Vec<[f64; 2]> = order.iter().map(|i| pts[*i]).collect();
        let c2: Vec<u32> = order.iter().map(|i| cats[*i]).collect();
        let shuffled = rasterize_points(&p2, Some(&c2), None, &view, &style).unwrap();
        prop_assert!(base.max_abs_diff(&shuffled) <= 1e-5);
    }
}

fn gaussian_field(center: [f64; 2], sigma_px: f64) -> DensityField {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    let pts: Vec<[f64; 2]> = (0..20_000)
        .map(|_| {
            use rand_distr::Distribution;
            [center[0] + normal.sample(&mut rng), center[1] + normal.sample(&mut rng)]
        })
        .collect();
    kde(&pts, None, Extent::new(-8.0, 8.0, -8.0, 8.0).unwrap(), 64, 64, sigma_px).unwrap()
}

fn density_view() -> Viewport {
    Viewport::new([0.0, 0.0], 6.0, 96, 96).unwrap()
}

#[test]
fn zero_field_renders_background_only() {
    let mut f = gaussian_field([0.0, 0.0], 2.0);
    f.values.iter_mut().for_each(|v| *v = 0.0);
    let style = DensityStyle::default();
    let frame = render_density(&[f], &density_view(), &[0.01], &style).unwrap();
    assert_eq!(frame, FrameBuffer::filled(96, 96, style.background));
}

#[test]
fn density_layers_commute() {
    let a = gaussian_field([-1.0, 0.0], 2.0);
    let b = gaussian_field([1.5, 0.5], 3.0);
    let levels = [a.max_value() * 0.3, b.max_value() * 0.5];
    let pal = DensityStyle::default().palette;
    let ab = DensityStyle {
        palette: vec![pal[0], pal[1]],
        ..DensityStyle::default()
    };
    let ba = DensityStyle {
        palette: vec![pal[1], pal[0]],
        ..DensityStyle::default()
    };
    let f1 = render_density(&[a.clone(), b.clone()], &density_view(), &levels, &ab).unwrap();
    let f2 = render_density(&[b, a.clone()], &density_view(), &levels, &ba).unwrap();
    assert!(f1.max_abs_diff(&f2) <= 1e-5);
    // identical fields in swapped order
    let g1 = render_density(&[a.clone(), a.clone()], &density_view(), &levels, &ab).unwrap();
    let g2 = render_density(&[a.clone(), a], &density_view(), &levels, &ba).unwrap();
    assert!(g1.max_abs_diff(&g2) <= 1e-5);
}

#[test]
fn opacity_falls_away_from_the_mode() {
    let f = gaussian_field([0.0, 0.0], 1.0);
    let view = density_view();
    let style = DensityStyle::default();
    let frame = render_density(std::slice::from_ref(&f), &view, &[], &style).unwrap();
    let darkness = |x: f64, y: f64| {
        let [sx, sy] = view.to_screen(x, y);
        let p = frame.pixel(sx as u32, sy as u32);
        1.0 - (p[0] + p[1] + p[2]) / 3.0
    };
    // the sampled field orders the two points the same way
    assert!(f.density_at(0.0, 0.0) > f.density_at(2.0, 0.0));
    assert!(darkness(0.0, 0.0) > darkness(2.0, 0.0));
}

#[test]
fn contours_are_drawn_in_a_darker_colour() {
    let f = gaussian_field([0.0, 0.0], 1.0);
    let level = f.max_value() * 0.5;
    let view = density_view();
    let style = DensityStyle::default();
    let plain = render_density(std::slice::from_ref(&f), &view, &[], &style).unwrap();
    let lined = render_density(std::slice::from_ref(&f), &view, &[level], &style).unwrap();
    let changed = (0..96 * 96)
        .filter(|i| {
            let (x, y) = (i % 96, i / 96);
            plain.pixel(x, y) != lined.pixel(x, y)
        })
        .count();
    assert!(changed > 20, "only {changed} contour pixels");
    assert!(lined.data().iter().zip(plain.data()).all(|(l, p)| *l <= *p + 1e-6));
}

#[test]
fn mismatched_extents_are_rejected() {
    let a = gaussian_field([0.0, 0.0], 2.0);
    let mut b = a.clone();
    b.extent = Extent::new(-9.0, 8.0, -8.0, 8.0).unwrap();
    assert!(matches!(
        render_density(&[a, b], &density_view(), &[], &DensityStyle::default()),
        Err(atlas_core::Error::Param(_))
    ));
}

#[test]
fn single_point_benchmark_completes() {
    let cfg = BenchConfig {
        points: 1,
        frames: 10,
        width: 64,
        height: 64,
        ..BenchConfig::default()
    };
    let report = benchmark(&cfg).unwrap();
    assert_eq!(report.frame_times_ms.len(), 10);
    assert!(report.mean_fps > 0.0 && report.p5_fps > 0.0);
    assert!(benchmark(&BenchConfig { points: 0, ..cfg }).is_err());
}

#[test]
fn report_has_exactly_the_schema_fields() {
    let report = BenchReport::from_frame_times(vec![5.0, 6.0]);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    let schema: serde_json::Value = serde_json::from_str(BENCH_REPORT_SCHEMA).unwrap();
    let mut keys: Vec<&String> = json.as_object().unwrap().keys().collect();
    let mut required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    keys.sort();
    required.sort();
    assert_eq!(keys, required);
    assert_eq!(schema["additionalProperties"], false);
}
