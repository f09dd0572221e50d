//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.

#![allow(clippy::needless_range_loop, clippy::field_reassign_with_default)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viewfuse::geometry::{normalize_unit, parse_off, write_off, Mesh, PointCloud};
use viewfuse::harness::synthetic::{primitive, write_primitive_dataset};
use viewfuse::harness::{run_pipeline, scan_dataset, RunConfig, Stage};
use viewfuse::projection::{maxpool_densify, project, DepthMap, RasterConfig, ViewConfig};
use viewfuse::sampling::{sample_mesh, sample_mesh_tagged, Primitive, SamplingParams};
use viewfuse::scalar::sin_cos_deg;
use viewfuse::zeroshot::{
    aggregate_probability_matrix, fuse_baseline, fuse_strategy_geo, fuse_strategy_sum, predict,
    ProbabilityMatrix, Strategy,
};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "fusion oracle equivalence", budget: Duration::from_secs(10), check: fusion_oracle },
        Criterion { name: "dilation equivalence", budget: Duration::from_secs(5), check: dilation_oracle },
        Criterion { name: "projection oracle", budget: Duration::from_secs(30), check: projection_oracle },
        Criterion { name: "sampling counts", budget: Duration::from_secs(10), check: sampling_counts },
        Criterion { name: "end-to-end planted run", budget: Duration::from_secs(60), check: planted_run },
        Criterion { name: "parser round-trip", budget: Duration::MAX, check: parser_corpus },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed >= c.budget => Err(format!("{detail}; over budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<26} {detail} ({:.2} s)", c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:<26} {detail} ({:.2} s)", c.name, elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------------
// fusion

fn naive_probability(logits: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let k = logits[0].len();
    let mut p = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut pooled = vec![f64::NEG_INFINITY; k];
        for view in logits {
            for c in 0..k {
                if view[j][c] > pooled[c] {
                    pooled[c] = view[j][c];
                }
            }
        }
        let top = pooled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for c in 0..k {
            z += (pooled[c] - top).exp();
        }
        for c in 0..k {
            p[j][c] = (pooled[c] - top).exp() / z;
        }
    }
    p
}

fn naive_sum(p: &[Vec<f64>], w_glo: f64, w_loc: f64) -> Vec<f64> {
    let k = p.len();
    let mut out = vec![0.0; k];
    for c in 0..k {
        let mut glo = 0.0;
        for row in p {
            if row[c] <= p[c][c] {
                glo += row[c];
            }
        }
        out[c] = w_glo * glo + w_loc * p[c][c];
    }
    out
}

fn naive_geo(p: &[Vec<f64>]) -> Vec<f64> {
    let k = p.len();
    let mut glo = vec![1.0; k];
    let mut loc = vec![0.0; k];
    for c in 0..k {
        for row in p {
            glo[c] *= row[c];
            loc[c] = f64::max(loc[c], row[c]);
        }
        glo[c] = glo[c].powf(1.0 / k as f64);
    }
    let lo = glo.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = glo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..k)
        .map(|c| {
            let n = if hi == lo { 1.0 } else { (glo[c] - lo) / (hi - lo) };
            n * loc[c]
        })
        .collect()
}

fn naive_baseline(views: &[Vec<f64>], alpha: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; views[0].len()];
    for (i, row) in views.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            out[c] += alpha[i] * v;
        }
    }
    out
}

fn fusion_oracle() -> Outcome {
    let worked = ProbabilityMatrix::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).map_err(|e| e.to_string())?;
    let sum = fuse_strategy_sum(&worked, 1.0, 1.0).map_err(|e| e.to_string())?;
    let geo = fuse_strategy_geo(&worked).map_err(|e| e.to_string())?;
    ensure(max_abs(&sum, &[1.8, 1.5]) <= 4.0 * f64::EPSILON, || format!("sum example gave {sum:?}"))?;
    ensure(geo == vec![0.7, 0.0], || format!("geo example gave {geo:?}"))?;
    ensure(predict(&sum) == Ok(0) && predict(&geo) == Ok(0), || "worked example argmax".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xF0510);
    let mut worst: f64 = 0.0;
    for n in 0..1000 {
        let k = rng.random_range(2..=8);
        let m = rng.random_range(1..=8);
        let logits: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|_| (0..k).map(|_| (0..k).map(|_| rng.random_range(-10.0..10.0)).collect()).collect())
            .collect();
        let p = aggregate_probability_matrix(&logits).map_err(|e| format!("instance {n}: {e}"))?;
        let naive_p = naive_probability(&logits);
        for (a, b) in p.rows().iter().zip(&naive_p) {
            worst = worst.max(max_abs(a, b));
        }
        let (wg, wl) = (rng.random_range(0.0..3.0), rng.random_range(0.1..3.0));
        let s = fuse_strategy_sum(&p, wg, wl).map_err(|e| format!("instance {n}: {e}"))?;
        worst = worst.max(max_abs(&s, &naive_sum(&naive_p, wg, wl)));
        let g = fuse_strategy_geo(&p).map_err(|e| format!("instance {n}: {e}"))?;
        worst = worst.max(max_abs(&g, &naive_geo(&naive_p)));

        let views: Vec<Vec<f64>> = (0..m).map(|_| (0..k).map(|_| rng.random_range(-100.0..100.0)).collect()).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let alpha: Vec<f64> = raw.iter().map(|a| a / total).collect();
        let b = fuse_baseline(&views, &alpha).map_err(|e| format!("instance {n}: {e}"))?;
        worst = worst.max(max_abs(&b, &naive_baseline(&views, &alpha)));
        if worst >= 1e-12 {
            return Err(format!("instance {n} (K={k}, M={m}): max abs error {worst:e}"));
        }
    }
    Ok(format!("1000 instances, max abs error {worst:.1e}; worked examples reproduced"))
}

// ---------------------------------------------------------------------------------
// dilation

fn naive_dilation(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for r in 0..h as i64 {
        for c in 0..w as i64 {
            let mut best = 0.0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr >= 0 && cc >= 0 && rr < h as i64 && cc < w as i64 {
                        best = f64::max(best, data[(rr * w as i64 + cc) as usize]);
                    }
                }
            }
            out[(r * w as i64 + c) as usize] = best;
        }
    }
    out
}

fn dilation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD11A7E);
    for n in 0..200 {
        let density = rng.random_range(0.01..0.6);
        let data: Vec<f64> = (0..64 * 64)
            .map(|_| if rng.random_bool(density) { rng.random_range(0.1..50.0) } else { 0.0 })
            .collect();
        let map = DepthMap::from_data(64, 64, data.clone(), ViewConfig::new(0.0, 35.0), "m");
        let got = maxpool_densify(&map);
        if got.data() != naive_dilation(&data, 64, 64).as_slice() {
            return Err(format!("map {n} differs from the 3x3 max filter"));
        }
    }
    Ok("200 maps of 64x64 pixel-exact".into())
}

// ---------------------------------------------------------------------------------
// projection

/// Reference rasterizer: each point is placed independently and the z-buffer is a map
/// from pixel to the best intensity seen so far.
fn reference_raster(points: &[[f64; 3]], view: &ViewConfig, raster: &RasterConfig) -> Vec<f64> {
    let (sa, ca) = sin_cos_deg(view.azimuth);
    let (se, ce) = sin_cos_deg(view.elevation);
    let extent = raster.field_extent;
    let mut zbuf: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for p in points {
        // rotate the world so the camera sits on +X
        let x_az = ca * p[0] + sa * p[1];
        let y_az = ca * p[1] - sa * p[0];
        let x_cam = ce * x_az + se * p[2];
        let z_cam = ce * p[2] - se * x_az;
        let axial = view.camera_distance - x_cam;
        if axial <= 0.0 {
            continue;
        }
        let u = view.focal_distance * y_az / axial;
        let v = view.focal_distance * z_cam / axial;
        let col = ((u + extent) / (extent + extent) * raster.width as f64).floor();
        let row = ((extent - v) / (extent + extent) * raster.height as f64).floor();
        if col < 0.0 || row < 0.0 || col >= raster.width as f64 || row >= raster.height as f64 {
            continue;
        }
        let d = 1.0 / f64::max(raster.epsilon, axial - view.focal_distance);
        let e = zbuf.entry((row as usize, col as usize)).or_insert(0.0);
        *e = e.max(d);
    }
    let mut out = vec![0.0; raster.width * raster.height];
    for ((r, c), d) in zbuf {
        out[r * raster.width + c] = d;
    }
    out
}

fn unit_ball(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 {
            pts.push(p);
        }
    }
    pts
}

fn projection_oracle() -> Outcome {
    let raster = RasterConfig::square(64);
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E0);
    for n in 0..100 {
        let pts = unit_ball(&mut rng, 1000);
        let view = ViewConfig::new(rng.random_range(-180.0..180.0), rng.random_range(-80.0..80.0));
        let cloud = PointCloud::new(pts.clone()).map_err(|e| e.to_string())?;
        let got = project(&cloud, &view, &raster).map_err(|e| e.to_string())?;
        if got.data() != reference_raster(&pts, &view, &raster).as_slice() {
            return Err(format!("cloud {n} (az {}, el {}) differs", view.azimuth, view.elevation));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xA71);
    let params = SamplingParams { beta_edge: 0.02, beta_face: 0.002, seed: 3 };
    let azimuths = [-180.0, -135.0, -90.0, -45.0, 0.0, 35.0, 45.0, 90.0, 135.0];
    let mut compared = 0;
    for class in 0..3 {
        let (mesh, _) = normalize_unit(&primitive(class, 0.0, &mut rng)).map_err(|e| e.to_string())?;
        let cloud = sample_mesh(&mesh, &params).map_err(|e| e.to_string())?;
        let quarter = cloud.map_points(|[x, y, z]| [-y, x, z]);
        let half = cloud.map_points(|[x, y, z]| [-x, -y, z]);
        for &a in &azimuths {
            for (theta, turned) in [(90.0, &quarter), (180.0, &half)] {
                let lhs = project(turned, &ViewConfig::new(a, 35.0), &raster).map_err(|e| e.to_string())?;
                let rhs = project(&cloud, &ViewConfig::new(a - theta, 35.0), &raster).map_err(|e| e.to_string())?;
                if lhs.data() != rhs.data() {
                    return Err(format!("shape {class}: rotation {theta} at azimuth {a} not equivariant"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("100 clouds (N=1000, 64x64) exact; {compared} equivariance pairs exact"))
}

// ---------------------------------------------------------------------------------
// sampling

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn expected_count(measure: f64, beta: f64) -> usize {
    let q = (measure / beta).ceil();
    if q < 1.0 {
        1
    } else {
        q as usize
    }
}

/// Distance from `p` to triangle `abc` (zero inside), via barycentric projection and
/// edge fallbacks.
fn triangle_distance(p: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let seg = |p: [f64; 3], a: [f64; 3], b: [f64; 3]| {
        let ab = sub(b, a);
        let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
        let t = if len2 == 0.0 {
            0.0
        } else {
            let ap = sub(p, a);
            ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0)
        };
        norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]]))
    };
    let n = cross(sub(b, a), sub(c, a));
    let area2 = norm(n);
    let edges = seg(p, a, b).min(seg(p, b, c)).min(seg(p, c, a));
    if area2 == 0.0 {
        return edges;
    }
    let signed = |x: [f64; 3], y: [f64; 3]| {
        let w = cross(sub(y, x), sub(p, x));
        w[0] * n[0] + w[1] * n[1] + w[2] * n[2]
    };
    let inside = signed(a, b) >= 0.0 && signed(b, c) >= 0.0 && signed(c, a) >= 0.0;
    if inside {
        let ap = sub(p, a);
        ((ap[0] * n[0] + ap[1] * n[1] + ap[2] * n[2]) / area2).abs()
    } else {
        edges
    }
}

fn random_mesh(rng: &mut ChaCha8Rng) -> Mesh<f64> {
    let nv = rng.random_range(4..20);
    let mut v: Vec<[f64; 3]> = (0..nv)
        .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let mut faces = Vec::new();
    for _ in 0..rng.random_range(1..12) {
        let mut idx: Vec<usize> = (0..nv).collect();
        for i in 0..3 {
            let j = rng.random_range(i..nv);
            idx.swap(i, j);
        }
        faces.push(idx[..3].to_vec());
    }
    // a planar quad so the fan triangulation is exercised
    let (a, b, c) = (v[0], v[1], v[2]);
    v.push([c[0] + b[0] - a[0], c[1] + b[1] - a[1], c[2] + b[2] - a[2]]);
    faces.push(vec![0, 1, nv, 2]);
    Mesh::new(v, faces).expect("valid random mesh")
}

fn sampling_counts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A3);
    let mut total = 0;
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let mesh = random_mesh(&mut rng);
        let params = SamplingParams {
            beta_edge: rng.random_range(0.05..0.5),
            beta_face: rng.random_range(0.05..0.5),
            seed: rng.random(),
        };
        let tagged = sample_mesh_tagged(&mesh, &params).map_err(|e| e.to_string())?;
        ensure(tagged == sample_mesh_tagged(&mesh, &params).map_err(|e| e.to_string())?, || format!("mesh {n}: rerun differs"))?;
        let other = SamplingParams { seed: params.seed ^ 1, ..params };
        ensure(tagged != sample_mesh_tagged(&mesh, &other).map_err(|e| e.to_string())?, || format!("mesh {n}: seed ignored"))?;

        let mut per: BTreeMap<Primitive, usize> = BTreeMap::new();
        for (prim, _) in &tagged {
            *per.entry(*prim).or_default() += 1;
        }
        let v = mesh.vertices();
        for (i, &[a, b]) in mesh.edges().iter().enumerate() {
            let want = expected_count(norm(sub(v[b], v[a])), params.beta_edge);
            ensure(per.get(&Primitive::Edge(i)) == Some(&want), || format!("mesh {n} edge {i}: wanted {want}"))?;
        }
        for (i, f) in mesh.faces().iter().enumerate() {
            let area: f64 = (1..f.len() - 1)
                .map(|t| 0.5 * norm(cross(sub(v[f[t]], v[f[0]]), sub(v[f[t + 1]], v[f[0]]))))
                .sum();
            let want = expected_count(area, params.beta_face);
            ensure(per.get(&Primitive::Face(i)) == Some(&want), || format!("mesh {n} face {i}: wanted {want}"))?;
        }
        for (prim, p) in &tagged {
            let d = match *prim {
                Primitive::Edge(i) => {
                    let [a, b] = mesh.edges()[i];
                    triangle_distance(*p, v[a], v[b], v[b])
                }
                Primitive::Face(i) => {
                    let f = &mesh.faces()[i];
                    (1..f.len() - 1)
                        .map(|t| triangle_distance(*p, v[f[0]], v[f[t]], v[f[t + 1]]))
                        .fold(f64::INFINITY, f64::min)
                }
            };
            worst = worst.max(d);
        }
        ensure(worst <= 1e-9, || format!("mesh {n}: sample {worst:e} away from its primitive"))?;
        total += tagged.len();
    }
    Ok(format!("100 meshes, {total} samples, counts exact, max containment error {worst:.1e}"))
}

// ---------------------------------------------------------------------------------
// end to end

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).expect("readable output dir") {
            let p = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).expect("under root").display().to_string();
                out.insert(rel, fs::read(&p).expect("readable artifact"));
            }
        }
    }
    out
}

fn planted_run() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("primitives");
    write_primitive_dataset(&data, "test", 10, 2024).map_err(|e| e.to_string())?;
    let manifest = scan_dataset(&data, "test").map_err(|e| e.to_string())?;
    ensure(manifest.items.len() == 30 && manifest.classes.len() == 3, || "dataset shape".into())?;

    let mut config = RunConfig::default();
    config.dataset_root = data.clone();
    config.backend.endpoint = "planted".into();
    config.backend.max_inflight = 1;
    config.workers = 1;
    config.fusion.strategies = vec![Strategy::Sum, Strategy::Geo];

    let mut report = Vec::new();
    for skip in [false, true] {
        config.skip_diffusion = skip;
        config.out_dir = dir.path().join(if skip { "skip" } else { "full" });
        let summary = run_pipeline(&manifest, &config, Stage::Full).map_err(|e| e.to_string())?;
        ensure(summary.failures.is_empty(), || format!("item failures {:?}", summary.failures))?;
        let metrics = summary.metrics.ok_or("no metrics")?;
        for s in [Strategy::Sum, Strategy::Geo] {
            let acc = metrics.accuracy(s).ok_or("missing strategy")?;
            ensure(acc == 1.0, || format!("{s} accuracy {acc} (skip_diffusion={skip})"))?;
        }
        report.push(if skip { "skip-diffusion 1.0" } else { "sum 1.0, geo 1.0" });
    }

    config.skip_diffusion = false;
    config.out_dir = dir.path().join("full");
    let first = snapshot(&config.out_dir);
    fs::remove_dir_all(&config.out_dir).map_err(|e| e.to_string())?;
    run_pipeline(&manifest, &config, Stage::Full).map_err(|e| e.to_string())?;
    ensure(snapshot(&config.out_dir) == first, || "rerun artifacts differ".into())?;
    Ok(format!("30 objects: {}; rerun byte-identical over {} files", report.join(", "), first.len()))
}

// ---------------------------------------------------------------------------------
// parser

struct Generated {
    text: String,
    vertices: Vec<[f64; 3]>,
    faces: Vec<Vec<usize>>,
}

fn generate_off(n: usize, rng: &mut ChaCha8Rng) -> Generated {
    let nv = rng.random_range(3..40);
    let vertices: Vec<[f64; 3]> = (0..nv)
        .map(|_| {
            let mut c = || {
                let mag = 10f64.powi(rng.random_range(-4..4));
                rng.random_range(-1.0..1.0) * mag
            };
            [c(), c(), c()]
        })
        .collect();
    let faces: Vec<Vec<usize>> = (0..rng.random_range(1..30))
        .map(|_| {
            let arity = rng.random_range(3..=nv.min(6));
            let mut idx: Vec<usize> = (0..nv).collect();
            for i in 0..arity {
                let j = rng.random_range(i..nv);
                idx.swap(i, j);
            }
            idx[..arity].to_vec()
        })
        .collect();
    let edges = rng.random_range(0..50);
    let eol = if n % 7 == 3 { "\r\n" } else { "\n" };
    let counts = format!("{nv} {} {edges}", faces.len());
    let mut text = match n % 5 {
        0 => format!("OFF{eol}{counts}{eol}"),
        1 => format!("OFF {counts}{eol}"),
        2 => format!("OFF{counts}{eol}"),
        3 => format!("OFF{eol}# exported mesh{eol}{eol}{counts}{eol}"),
        _ => format!("OFF  # header comment{eol}\t{counts}   {eol}"),
    };
    for (i, v) in vertices.iter().enumerate() {
        let line = if i % 2 == 0 {
            format!("{} {} {}", v[0], v[1], v[2])
        } else {
            format!("{:e}\t{:e}  {:e}", v[0], v[1], v[2])
        };
        text.push_str(&line);
        if n.is_multiple_of(4) && i == 0 {
            text.push_str(" # first vertex");
        }
        text.push_str(eol);
        if n % 6 == 5 && i == nv / 2 {
            text.push_str(eol);
        }
    }
    for f in &faces {
        let idx: Vec<String> = f.iter().map(|i| i.to_string()).collect();
        text.push_str(&format!("{} {}", f.len(), idx.join(" ")));
        if n % 3 == 2 {
            // trailing per-face color columns, as some exporters emit
            text.push_str(" 255 128 0");
        }
        text.push_str(eol);
    }
    Generated { text, vertices, faces }
}

fn check_mesh_invariants(m: &Mesh<f64>) -> Result<(), String> {
    let nv = m.vertices().len();
    ensure(nv >= 3, || "fewer than 3 vertices".into())?;
    let mut boundary = BTreeSet::new();
    let mut arity = 0;
    for f in m.faces() {
        ensure(f.len() >= 3, || "face arity < 3".into())?;
        ensure(f.iter().all(|&i| i < nv), || "face index out of range".into())?;
        ensure(f.iter().collect::<BTreeSet<_>>().len() == f.len(), || "repeated face index".into())?;
        arity += f.len();
        for i in 0..f.len() {
            let (a, b) = (f[i], f[(i + 1) % f.len()]);
            boundary.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize)> = m.edges().iter().map(|&[a, b]| (a, b)).collect();
    let unique: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    ensure(unique.len() == edges.len(), || "duplicate edge".into())?;
    ensure(edges.len() <= arity, || "more edges than face sides".into())?;
    ensure(unique == boundary, || "edge set differs from face boundaries".into())
}

fn parser_corpus() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0FF);
    for n in 0..50 {
        let g = generate_off(n, &mut rng);
        let path = dir.path().join(format!("shape_{n:02}.off"));
        fs::write(&path, &g.text).map_err(|e| e.to_string())?;
        let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let mesh: Mesh<f64> = parse_off(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure(mesh.vertices() == g.vertices.as_slice(), || format!("file {n}: vertices differ"))?;
        ensure(mesh.faces() == g.faces.as_slice(), || format!("file {n}: faces differ"))?;
        check_mesh_invariants(&mesh).map_err(|e| format!("file {n}: {e}"))?;
        let again: Mesh<f64> = parse_off(&write_off(&mesh)).map_err(|e| format!("file {n} rewrite: {e}"))?;
        ensure(again == mesh, || format!("file {n}: round-trip differs"))?;
    }
    Ok("50 files with 5 header variants, comments, CRLF, polygons: exact round-trip".into())
}
