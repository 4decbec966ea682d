//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{as_bars, gaussian, kruskal, naive_barcode, random_int_matrix, random_net, random_real_matrix, sort_bars};
use relu_atlas::enumerate::{dual_graph, enumerate_brute, enumerate_traverse};
use relu_atlas::linalg::Matrix;
use relu_atlas::metric::{combine, dedup_bitvectors, euclidean_matrix, hamming_matrix, CombineOp};
use relu_atlas::network::Layer;
use relu_atlas::persistence::barcodes;
use relu_atlas::regions::{region_of, shared_facet_points};
use relu_atlas::sampling::{circle_samples, random_orthogonal_anchors, torus_samples, AnchorFamily};
use relu_atlas::{Barcode, DecompositionAtlas, DistanceMatrix, EnumerateOptions, NetworkSpec, Tolerances};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(start: Instant, budget: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    if spent > budget {
        return Err(format!("took {spent:.1?}, budget {budget:?}"));
    }
    Ok(())
}

fn random_widths(rng: &mut impl Rng, max_total: usize) -> Vec<usize> {
    let depth = rng.random_range(1..=3);
    let mut widths: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=6)).collect();
    while widths.iter().sum::<usize>() > max_total {
        let i = widths.iter().position(|&w| w > 1).unwrap();
        widths[i] -= 1;
    }
    widths
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Atlases shared by the adjacency and coloring checks.
struct Atlases {
    random: Vec<DecompositionAtlas>,
    arrangement: Vec<DecompositionAtlas>,
}

fn brute_equals_traverse(store: &mut Vec<DecompositionAtlas>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let opts = EnumerateOptions::default();
    let mut total = 0;
    for case in 0..60 {
        let m = 1 + case % 3;
        let widths = random_widths(&mut rng, 12);
        let net = random_net(&mut rng, m, &widths);
        let brute = enumerate_brute(&net, None, &opts).map_err(|e| e.to_string())?;
        let traverse = enumerate_traverse(&net, &vec![0.0; m], None, &opts).map_err(|e| e.to_string())?;
        ensure!(brute.same_decomposition(&traverse), "case {case}: widths {widths:?}, m {m} differ");
        total += brute.len();
        store.push(brute);
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("60 networks, {total} regions, identical ({:.1?})", start.elapsed()))
}

fn arrangement_counts(store: &mut Vec<DecompositionAtlas>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for case in 0..24 {
        let h = 3 + case % 6;
        let net = random_net(&mut rng, 2, &[h]);
        let atlas = enumerate_brute(&net, None, &EnumerateOptions::default()).map_err(|e| e.to_string())?;
        let want: usize = (0..=2).map(|i| binomial(h, i)).sum();
        ensure!(atlas.len() == want, "case {case}: h {h} gave {} regions, want {want}", atlas.len());
        store.push(atlas);
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("24 networks with h in 3..=8 ({:.1?})", start.elapsed()))
}

fn one_bit_facets(atlases: &Atlases) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let (mut pairs, mut facets, mut points, mut detached) = (0usize, 0usize, 0usize, 0usize);
    for (atlas, one_layer) in atlases.random.iter().map(|a| (a, false)).chain(atlases.arrangement.iter().map(|a| (a, true))) {
        let keys: Vec<_> = atlas.regions.keys().collect();
        for (i, a) in keys.iter().enumerate() {
            for b in &keys[i + 1..] {
                pairs += 1;
                let adjacent = atlas.edges.contains(&((*a).clone(), (*b).clone()));
                let one_bit = a.hamming(b) == 1;
                ensure!(!adjacent || one_bit, "edge {a} {b} spans {} bits", a.hamming(b));
                if one_bit && !adjacent {
                    // Deeper layers bend their hyperplanes, so two one-bit
                    // neighbours can both exist without touching. Then the
                    // flipped bit bounds neither cell.
                    let k = a.diff_positions(b)[0];
                    let active = atlas.regions[*a].active_bits.contains(&k) || atlas.regions[*b].active_bits.contains(&k);
                    ensure!(!one_layer && !active, "{a} and {b} differ in bit {k} but share no facet");
                    detached += 1;
                }
            }
        }
        for region in atlas.regions.values() {
            for &k in &region.active_bits {
                let flipped = region.bits.flipped(k);
                if atlas.regions.contains_key(&flipped) {
                    let key = if region.bits < flipped { (region.bits.clone(), flipped) } else { (flipped, region.bits.clone()) };
                    ensure!(atlas.edges.contains(&key), "active flip {} -> {} is not an edge", key.0, key.1);
                }
            }
        }
        for (a, b) in &atlas.edges {
            facets += 1;
            let (ra, rb) = (&atlas.regions[a], &atlas.regions[b]);
            for y in shared_facet_points(ra, rb, 20, &mut rng).map_err(|e| e.to_string())? {
                let (ga, gb) = (ra.affine.apply(&y), rb.affine.apply(&y));
                let gap = ga.iter().zip(&gb).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                ensure!(gap <= 1e-8, "maps of {a} and {b} differ by {gap:e} on their facet");
                points += 1;
            }
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{pairs} pairs, {facets} facets, {points} facet points; \
         {detached} deep-net one-bit pairs share no facet (bit inactive in both)"
    ))
}

fn bipartite(atlases: &Atlases) -> Outcome {
    let mut edges = 0;
    for atlas in atlases.random.iter().chain(&atlases.arrangement) {
        let graph = dual_graph(atlas).map_err(|e| e.to_string())?;
        let mono = graph.edges.iter().filter(|&&(i, j)| graph.colors[i] == graph.colors[j]).count();
        ensure!(mono == 0, "{mono} monochromatic edges");
        edges += graph.edges.len();
    }
    Ok(format!("{edges} edges, none monochromatic"))
}

fn piecewise_linear() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let m = rng.random_range(1..=4);
        let widths = random_widths(&mut rng, 12);
        let net = random_net(&mut rng, m, &widths);
        let x: Vec<f64> = (0..m).map(|_| 2.0 * gaussian(&mut rng)).collect();
        let region = region_of(&net, &x, None, &tol).map_err(|e| format!("case {case}: {e}"))?;
        let want = net.forward(&x).map_err(|e| e.to_string())?.output;
        let got = region.affine.apply(&x);
        let gap = want.iter().zip(&got).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        ensure!(gap <= 1e-9, "case {case}: gap {gap:e}");
        worst = worst.max(gap);
    }
    Ok(format!("1000 points, worst gap {worst:.1e}"))
}

fn persistence_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for case in 0..100 {
        let n = rng.random_range(1..=10);
        let d = if case % 2 == 0 { random_int_matrix(&mut rng, n, 5) } else { random_real_matrix(&mut rng, n) };
        let got = as_bars(&barcodes(&d, 2, None).map_err(|e| e.to_string())?);
        ensure!(got == naive_barcode(&d, 2, None), "case {case} (n = {n}) differs from the naive reduction");
    }
    Ok("100 matrices, dims 0..=2, identical".into())
}

fn h0_is_mst() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for case in 0..50 {
        let n = rng.random_range(2..=40);
        let d = if case % 2 == 0 { random_int_matrix(&mut rng, n, 9) } else { random_real_matrix(&mut rng, n) };
        let b = barcodes(&d, 0, None).map_err(|e| e.to_string())?;
        let mut deaths: Vec<f64> = b.dim(0).iter().filter_map(|iv| iv.death).collect();
        deaths.sort_by(f64::total_cmp);
        let (mst, _) = kruskal(&d, d.max_finite());
        ensure!(deaths == mst, "case {case} (n = {n}) differs from Kruskal");
    }
    Ok("50 matrices".into())
}

/// Seven lines in the plane of the first two inputs, each crossing the unit
/// circle twice; the third input only tilts the hyperplanes.
fn circle_net() -> NetworkSpec {
    let rows: Vec<[f64; 3]> = (0..7)
        .map(|k| {
            let phi = f64::from(k) * PI / 7.0 + 0.1;
            [phi.cos(), phi.sin(), 0.5]
        })
        .collect();
    let bias: Vec<f64> = (0..7).map(|k| 0.3 * f64::from(k).sin()).collect();
    let layers = vec![
        Layer::new(Matrix::from_rows(&rows).unwrap(), bias),
        Layer::new(Matrix::from_rows(&[[1.0; 7]]).unwrap(), vec![0.0]),
    ];
    NetworkSpec::new(3, layers).unwrap()
}

fn circle_loop() -> Outcome {
    let net = circle_net();
    let family = AnchorFamily::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], None).map_err(|e| e.to_string())?;
    let points = circle_samples(&family, 500, (0.0, TAU)).map_err(|e| e.to_string())?;
    let bits: Vec<_> = points.iter().map(|x| net.bit_vector(x)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let (distinct, _) = dedup_bitvectors(&bits).map_err(|e| e.to_string())?;
    ensure!(distinct.len() >= 12, "only {} regions meet the circle", distinct.len());
    let d = hamming_matrix(&bits, true).map_err(|e| e.to_string())?;
    let b = barcodes(&d, 1, None).map_err(|e| e.to_string())?;
    let mut lengths: Vec<f64> = b.dim(1).iter().map(|iv| iv.length()).collect();
    lengths.sort_by(|x, y| y.total_cmp(x));
    let first = lengths.first().copied().unwrap_or(0.0);
    let second = lengths.get(1).copied().unwrap_or(0.0);
    ensure!(first > 0.0 && first >= 2.0 * second, "H1 lengths {lengths:?}");
    Ok(format!("{} regions on the circle, H1 longest {first} vs next {second}", distinct.len()))
}

fn torus() -> Outcome {
    let start = Instant::now();
    let anchors = random_orthogonal_anchors(8, 5, 109).map_err(|e| e.to_string())?;
    let family = AnchorFamily::new(anchors, Some(4)).map_err(|e| e.to_string())?;
    let points = torus_samples(&family, (10, 10), 1.0).map_err(|e| e.to_string())?;
    let d = euclidean_matrix(&points).map_err(|e| e.to_string())?;
    let b = barcodes(&d, 2, None).map_err(|e| e.to_string())?;
    let h1 = b.long_bars(1, 0.25).len();
    let h2 = b.long_bars(2, 0.25).len();
    ensure!(h1 == 2 && h2 == 1, "long bars: {h1} in H1, {h2} in H2");
    within(start, Duration::from_secs(120))?;
    Ok(format!("2 long H1 bars, 1 long H2 bar ({:.1?})", start.elapsed()))
}

fn sorted_edges(mut edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    edges.sort_unstable();
    edges
}

fn min_max_thresholds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut checks = 0;
    for case in 0..50 {
        let n = rng.random_range(2..=12);
        let (d1, d2) = if case % 2 == 0 {
            (random_int_matrix(&mut rng, n, 6), random_int_matrix(&mut rng, n, 6))
        } else {
            (random_real_matrix(&mut rng, n), random_real_matrix(&mut rng, n))
        };
        let hi = combine(&d1, &d2, CombineOp::Max).map_err(|e| e.to_string())?;
        let lo = combine(&d1, &d2, CombineOp::Min).map_err(|e| e.to_string())?;
        let mut values = d1.distinct_values();
        values.extend(d2.distinct_values());
        for t in values {
            let (g1, g2) = (d1.threshold_graph(t), d2.threshold_graph(t));
            let both = sorted_edges(g1.iter().filter(|e| g2.contains(e)).copied().collect());
            let mut either = g1.clone();
            either.extend(g2.iter().filter(|e| !g1.contains(e)));
            ensure!(sorted_edges(hi.threshold_graph(t)) == both, "case {case}: max fails at t = {t}");
            ensure!(sorted_edges(lo.threshold_graph(t)) == sorted_edges(either), "case {case}: min fails at t = {t}");
            checks += 1;
        }
    }
    Ok(format!("50 pairs, {checks} thresholds"))
}

fn square_csv(d: &DistanceMatrix) -> Vec<u8> {
    let mut buf = Vec::new();
    d.write_square(&mut buf).unwrap();
    buf
}

fn export_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for case in 0..20 {
        let n = rng.random_range(1..=15);
        let d = random_real_matrix(&mut rng, n).scaled(rng.random_range(0.01..1e4)).map_err(|e| e.to_string())?;
        let square = dir.path().join("square.csv");
        std::fs::write(&square, square_csv(&d)).map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_relu-atlas"))
            .arg("export-ldm")
            .arg(&square)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "export-ldm failed: {}", String::from_utf8_lossy(&out.stderr));
        let back = DistanceMatrix::read_lower(out.stdout.as_slice()).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                ensure!(back.get(i, j).to_bits() == d.get(i, j).to_bits(), "case {case}: entry ({i}, {j}) changed");
            }
        }
    }

    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let ldm = std::fs::read(fixtures.join("rips_10.ldm")).map_err(|e| e.to_string())?;
    let d = DistanceMatrix::read_lower(ldm.as_slice()).map_err(|e| e.to_string())?;
    let recorded = std::fs::read_to_string(fixtures.join("rips_10_ripser.json")).map_err(|e| e.to_string())?;
    let mut want = as_bars(&Barcode::from_json(&recorded).map_err(|e| e.to_string())?);
    let mut got = as_bars(&barcodes(&d, 2, None).map_err(|e| e.to_string())?.without_zero_length());
    for list in want.iter_mut().chain(got.iter_mut()) {
        sort_bars(list);
    }
    ensure!(got == want, "barcode differs from the recorded one:\n got  {got:?}\n want {want:?}");
    Ok(format!("20 round trips bit-exact; 10x10 fixture matches ({} bars)", want.iter().map(Vec::len).sum::<usize>()))
}

fn run(number: usize, name: &str, check: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {number:>2}: {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL criterion {number:>2}: {name}: {detail}");
            false
        }
    }
}

fn main() {
    let mut atlases = Atlases { random: Vec::new(), arrangement: Vec::new() };
    let results = [
        run(1, "brute force and traversal agree", || brute_equals_traverse(&mut atlases.random)),
        run(2, "one-layer region counts", || arrangement_counts(&mut atlases.arrangement)),
        run(3, "adjacency is one-bit flips", || one_bit_facets(&atlases)),
        run(4, "dual graph is bipartite", || bipartite(&atlases)),
        run(5, "forward pass equals region map", piecewise_linear),
        run(6, "reduction matches naive oracle", persistence_oracle),
        run(7, "H0 deaths are MST weights", h0_is_mst),
        run(8, "circle gives one long loop", circle_loop),
        run(9, "torus has two loops and one void", torus),
        run(10, "min/max threshold identity", min_max_thresholds),
        run(11, "export fidelity", export_fidelity),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
