//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p glyph-cli --test acceptance`.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use glyph_core::classifier::{self, kmeans_fit, Category, KMeansParams, LabeledVector, Model};
use glyph_core::dataset::{apply_split, LabeledSample, Selector, SplitManifest, WriterRange};
use glyph_core::eval::{self, AccuracyReport};
use glyph_core::features::oracle::oracle_extract;
use glyph_core::features::{extract, line_lengths, FeatureVector, Segment, FEATURE_DIM, NO_INK};
use glyph_core::preprocess::{prepare, CharMatrix, GrayImage, ThresholdMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, density: f64) -> CharMatrix {
    CharMatrix::from_fn(|_, _| rng.random_bool(density))
}

/// The 1024 single-pixel matrices followed by 10,000 random ones at
/// densities 5%, 50% and 95%.
fn probe_matrices() -> Vec<CharMatrix> {
    let mut out: Vec<CharMatrix> = (0..32 * 32)
        .map(|i| CharMatrix::from_fn(|r, c| r * 32 + c == i))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let densities = [0.05, 0.5, 0.95];
    for i in 0..10_000 {
        out.push(random_matrix(&mut rng, densities[i % 3]));
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let matrices = probe_matrices();
    let start = Instant::now();
    for (i, m) in matrices.iter().enumerate() {
        let (fast, slow) = (extract(m), oracle_extract(m));
        check(fast == slow, || {
            let at = (0..FEATURE_DIM).find(|&j| fast.as_slice()[j] != slow.as_slice()[j]).unwrap();
            format!("matrix #{i}: feature {at} is {} vs oracle {}", fast.as_slice()[at], slow.as_slice()[at])
        })?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:.2?}, limit 10 s"))?;
    Ok(format!("{} matrices identical in {elapsed:.2?}", matrices.len()))
}

fn bounds_ok(v: &FeatureVector) -> Result<(), String> {
    check(v.len() == FEATURE_DIM && v.as_slice().len() == FEATURE_DIM, || {
        format!("vector has {} values", v.len())
    })?;
    for seg in Segment::ALL {
        for n in 1..=16 {
            let x = v.get(seg, n);
            let ok = match (seg, seg.line_family()) {
                (Segment::HorizontalLeft | Segment::VerticalUpper, _) => (0..=16).contains(&x),
                (Segment::HorizontalRight | Segment::VerticalLower, _) => (0..=17).contains(&x),
                (_, Some(family)) => {
                    let len = line_lengths(family)[n - 1] as i32;
                    if seg.is_histogram() {
                        (0..=len).contains(&x)
                    } else {
                        x == NO_INK || (0..len).contains(&x)
                    }
                }
                (_, None) => unreachable!("every non-axis segment has a line family"),
            };
            check(ok, || format!("{seg}({n}) = {x} out of range"))?;
        }
    }
    Ok(())
}

fn feature_bounds() -> Outcome {
    let mut matrices = probe_matrices();
    matrices.push(CharMatrix::blank());
    matrices.push(CharMatrix::filled());
    for (i, m) in matrices.iter().enumerate() {
        bounds_ok(&extract(m)).map_err(|e| format!("matrix #{i}: {e}"))?;
    }
    Ok(format!("{} matrices within bounds", matrices.len()))
}

fn featurize(images: &[GrayImage], label: &str) -> Vec<LabeledVector> {
    images
        .iter()
        .map(|img| LabeledVector::new(label, extract(&prepare(img, ThresholdMode::Otsu).expect("digit has ink"))))
        .collect()
}

const DIGIT_TRAIN: usize = 600;

fn accuracies(r: &AccuracyReport) -> [f64; 3] {
    [1, 2, 3].map(|t| r.accuracy(t).unwrap())
}

fn public_digits() -> Outcome {
    let start = Instant::now();
    let digits = common::load_digits();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (d, images) in digits.iter().enumerate() {
        check(images.len() >= DIGIT_TRAIN + 100, || format!("class {d} has only {} images", images.len()))?;
        let label = d.to_string();
        train.extend(featurize(&images[..DIGIT_TRAIN], &label));
        test.extend(featurize(&images[DIGIT_TRAIN..], &label));
    }
    let params = KMeansParams { k: 64, seed: 1, ..KMeansParams::default() };
    let model = classifier::train(&train, Category::Digits, &params).map_err(|e| e.to_string())?;
    let report = eval::evaluate(&model, &test, &[1, 2, 3]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let [a1, a2, a3] = accuracies(&report);
    let summary = format!(
        "acc@1/2/3 = {a1:.2}/{a2:.2}/{a3:.2}% on {} test digits ({} train) in {elapsed:.1?}",
        test.len(),
        train.len()
    );
    check(a1 >= 85.0, || format!("{summary}: acc@1 below 85%"))?;
    check(a1 <= a2 && a2 <= a3, || format!("{summary}: accuracies not monotone"))?;
    check(elapsed < Duration::from_secs(300), || format!("{summary}: over 5 min"))?;

    let nist = match std::env::var_os("GLYPH_NIST_SD19") {
        None => "NIST SD19 not supplied (set GLYPH_NIST_SD19), reproduction skipped".to_string(),
        Some(root) => nist_digits(Path::new(&root))?,
    };
    Ok(format!("{summary}; {nist}"))
}

fn nist_digits(root: &Path) -> Result<String, String> {
    let manifest = SplitManifest::builtin("nist-digits").unwrap();
    let scan = glyph_core::dataset::scan_dataset(root).map_err(|e| e.to_string())?;
    let (train, test) = apply_split(&scan.samples, &manifest);
    let load = |samples: &[LabeledSample]| -> Result<Vec<LabeledVector>, String> {
        samples
            .iter()
            .map(|s| {
                let m = glyph_core::preprocess::load_char_matrix(&s.image_path, ThresholdMode::Otsu)
                    .map_err(|e| e.to_string())?;
                Ok(LabeledVector::new(s.label.clone(), extract(&m)))
            })
            .collect()
    };
    let model = classifier::train(&load(&train)?, Category::Digits, &KMeansParams::default())
        .map_err(|e| e.to_string())?;
    let report = eval::evaluate(&model, &load(&test)?, &[1, 2, 3]).map_err(|e| e.to_string())?;
    let got = accuracies(&report);
    let want = [93.75, 97.02, 97.90];
    let text = format!("NIST digits {:.2}/{:.2}/{:.2}% vs 93.75/97.02/97.90%", got[0], got[1], got[2]);
    check(got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 2.5), || format!("{text}: outside 2.5 pp"))?;
    Ok(text)
}

/// A clustered problem with deliberate duplicate points.
fn kmeans_problem(seed: u64) -> (Vec<Vec<f64>>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(5..300);
    let dim = rng.random_range(1..12);
    let k = rng.random_range(1..16);
    let centers: Vec<Vec<f64>> = (0..rng.random_range(1..8))
        .map(|_| (0..dim).map(|_| rng.random_range(-50.0..50.0)).collect())
        .collect();
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        if !points.is_empty() && rng.random_bool(0.2) {
            let j = rng.random_range(0..points.len());
            points.push(points[j].clone());
        } else {
            let c = &centers[rng.random_range(0..centers.len())];
            points.push(c.iter().map(|x| x + rng.random_range(-3.0..3.0)).collect());
        }
    }
    (points, k)
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points.iter().map(|p| p.iter().map(|x| (x + 0.0).to_bits()).collect()).collect();
    keys.sort();
    keys.dedup();
    keys.len()
}

/// Neumaier-compensated mean of each coordinate.
fn exact_mean(points: &[Vec<f64>]) -> Vec<f64> {
    (0..points[0].len())
        .map(|j| {
            let (mut sum, mut comp) = (0.0f64, 0.0f64);
            for p in points {
                let x = p[j];
                let t = sum + x;
                comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
                sum = t;
            }
            (sum + comp) / points.len() as f64
        })
        .collect()
}

fn kmeans_properties() -> Outcome {
    let mut lloyd_runs = 0;
    for seed in 0..100u64 {
        let (points, k) = kmeans_problem(seed);
        let params = KMeansParams { k, seed, ..KMeansParams::default() };
        let fit = kmeans_fit(&points, &params).map_err(|e| format!("problem {seed}: {e}"))?;
        if fit.iterations > 0 {
            lloyd_runs += 1;
        }
        for w in fit.inertia_trace.windows(2) {
            check(w[1] <= w[0] * (1.0 + 1e-9), || format!("problem {seed}: inertia rose {} -> {}", w[0], w[1]))?;
        }
        let want = k.min(distinct_count(&points));
        check(fit.centroids.len() == want, || {
            format!("problem {seed}: {} centroids, expected {want}", fit.centroids.len())
        })?;

        let bits = |f: &classifier::KMeansFit| -> Vec<u64> { f.centroids.iter().flatten().map(|x| x.to_bits()).collect() };
        for threads in [1, 3] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let again = pool.install(|| kmeans_fit(&points, &params)).unwrap();
            check(bits(&again) == bits(&fit), || format!("problem {seed}: centroids differ with {threads} threads"))?;
        }

        let one = kmeans_fit(&points, &KMeansParams { k: 1, seed, ..KMeansParams::default() }).unwrap();
        let mean = exact_mean(&points);
        for (j, (&c, &m)) in one.centroids[0].iter().zip(&mean).enumerate() {
            let scale = points.iter().map(|p| p[j].abs()).sum::<f64>() / points.len() as f64;
            check((c - m).abs() <= 1e-12 * scale.max(m.abs()), || {
                format!("problem {seed}: k=1 coordinate {j} is {c}, mean {m}")
            })?;
        }
    }
    Ok(format!("100 problems ({lloyd_runs} ran Lloyd iterations): monotone inertia, exact k=1 mean, bitwise stable, min(k, distinct) centroids"))
}

fn ranking_ok(model: &Model, samples: &[LabeledVector]) -> Result<(), String> {
    let classes = model.codebooks().len();
    for (i, s) in samples.iter().enumerate() {
        let ranked = classifier::classify(model, &s.features, classes).map_err(|e| e.to_string())?;
        let mut labels: Vec<&str> = ranked.choices.iter().map(|c| c.label.as_str()).collect();
        check(ranked.len() == classes, || format!("sample {i}: {} choices of {classes}", ranked.len()))?;
        check(ranked.choices.windows(2).all(|w| w[0].distance <= w[1].distance), || {
            format!("sample {i}: choices not sorted by distance")
        })?;
        labels.sort();
        labels.dedup();
        check(labels.len() == classes, || format!("sample {i}: repeated labels in ranking"))?;
    }
    Ok(())
}

fn training_set_recall() -> Outcome {
    let digits = common::load_digits();
    let train: Vec<LabeledVector> = digits
        .iter()
        .enumerate()
        .flat_map(|(d, images)| featurize(&images[..40], &d.to_string()))
        .collect();
    let model = classifier::train(&train, Category::Digits, &KMeansParams { k: 64, seed: 1, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let report = eval::evaluate(&model, &train, &[1]).map_err(|e| e.to_string())?;
    check(report.accuracy(1) == Some(100.0), || format!("training-set acc@1 = {:?}", report.accuracy(1)))?;
    ranking_ok(&model, &train)?;
    Ok(format!("acc@1 = 100% on {} training samples with k = 64; rankings distinct and sorted", train.len()))
}

fn run_glyph(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_glyph"))
        .args(args)
        .output()
        .map_err(|e| format!("spawn glyph: {e}"))?;
    check(out.status.success(), || {
        format!("glyph {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn end_to_end_determinism() -> Outcome {
    let digits = common::load_digits();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("digits");
    common::write_digit_tree(&data, &digits, 0..30, 0);
    common::write_digit_tree(&data, &digits, 100..110, 30);
    let data = data.to_str().unwrap();

    let mut runs = Vec::new();
    for (run, jobs) in ["1", "4", "1"].iter().enumerate() {
        let model = dir.path().join(format!("model-{run}.bin"));
        let mut files = vec![model.clone()];
        let model = model.to_str().unwrap();
        let mut stdout = run_glyph(&[
            "--jobs", jobs, "train", "--dataset", data, "--manifest", "nist-digits", "--k", "8", "--seed", "1", "--out", model,
        ])?;
        for format in ["text", "csv", "json"] {
            let report = dir.path().join(format!("report-{run}.{format}"));
            stdout.extend(run_glyph(&[
                "--jobs", jobs, "evaluate", "--model", model, "--dataset", data, "--manifest", "nist-digits",
                "--format", format, "--out", report.to_str().unwrap(),
            ])?);
            files.push(report);
        }
        let mut bytes: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        bytes.push(stdout);
        runs.push((jobs, bytes));
    }
    let (first_jobs, first) = &runs[0];
    for (jobs, bytes) in &runs[1..] {
        check(bytes == first, || format!("outputs with --jobs {jobs} differ from --jobs {first_jobs}"))?;
    }
    Ok(format!(
        "model ({} bytes), text/csv/json reports and stdout identical across --jobs 1, 4, 1",
        first[0].len()
    ))
}

fn sample(writer: u32, partition: &str) -> LabeledSample {
    LabeledSample {
        image_path: format!("x/F{writer:04}_{partition}.png").into(),
        label: "x".into(),
        writer_id: Some(format!("F{writer:04}")),
        partition: Some(partition.to_uppercase()),
    }
}

fn manifest_ranges() -> Outcome {
    let expected = [
        ("nist-digits", Category::Digits, (0, 99, vec!["HSF_0"]), (100, 149, vec!["HSF_0"])),
        ("nist-uppercase", Category::Uppercase, (0, 999, vec!["HSF_0", "HSF_1"]), (1000, 1499, vec!["HSF_3"])),
        ("nist-lowercase", Category::Lowercase, (0, 999, vec!["HSF_0", "HSF_1"]), (1000, 1499, vec!["HSF_3"])),
    ];
    let partitions: Vec<String> = (0..8).map(|i| format!("hsf_{i}")).collect();
    let population: Vec<LabeledSample> = (0..4000)
        .flat_map(|w| partitions.iter().map(move |p| sample(w, p)))
        .collect();
    for (name, category, train, test) in expected {
        let m = SplitManifest::builtin(name).ok_or_else(|| format!("{name} is not built in"))?;
        check(m.category == category, || format!("{name}: category {}", m.category))?;
        for (side, got, (first, last, parts)) in [("train", &m.train, train), ("test", &m.test, test)] {
            let want = Selector::Writers {
                ranges: vec![WriterRange::new(first, last)],
                partitions: parts.iter().map(|p| p.to_string()).collect(),
            };
            check(*got == want, || format!("{name} {side}: {got}"))?;
        }
        let (tr, te) = apply_split(&population, &m);
        let writers = |s: &[LabeledSample]| -> std::collections::BTreeSet<u32> { s.iter().filter_map(|x| x.writer_number()).collect() };
        let (wtr, wte) = (writers(&tr), writers(&te));
        check(wtr.is_disjoint(&wte), || format!("{name}: train and test share writers"))?;
        check(wtr.first() == Some(&m.train.writer_ranges().unwrap()[0].first), || format!("{name}: train range start"))?;
        check(wte.last() == Some(&m.test.writer_ranges().unwrap()[0].last), || format!("{name}: test range end"))?;
    }
    Ok("digits F0000-F0099 / F0100-F0149 (HSF_0); letters F0000-F0999 (HSF_0,1) / F1000-F1499 (HSF_3); writer sets disjoint".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("feature dimension and ranges", feature_bounds),
        ("public digit accuracy", public_digits),
        ("k-means properties", kmeans_properties),
        ("training-set recall and ranking", training_set_recall),
        ("end-to-end determinism across --jobs", end_to_end_determinism),
        ("built-in manifest writer ranges", manifest_ranges),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
