//! End-to-end acceptance suite.
//!
//! Runs as a plain binary (no libtest harness) so each criterion prints a
//! single PASS / FAIL line, including its measured values and runtime.
//! The process exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use common::{kws, p, stderr, stdout, toy_manifest};
use kws_core::audio_io::{Split, Waveform};
use kws_core::augment::{select_ops, FadeDraw, GainDraw, ImpulseResponseSet, NoiseBank, NoiseDraw, ReverbDraw};
use kws_core::features::{FeatureConfig, MfccExtractor, Stft};
use kws_core::model::{init_parameters, model_backward, model_forward, param_count, ModelConfig, Mode, Parameters};
use kws_core::rng;
use kws_core::training::{adam_step, batch_gradients, batch_loss, lr_at, nll_loss, AdamConfig, Batch, OptimizerState};
use ndarray::{Array1, Array2};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run(n: usize, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if took > limit => Err(format!("{detail}; took {took:.1?}, limit {limit:?}")),
        other => other,
    };
    match outcome {
        Ok(detail) => {
            println!("criterion {n}: PASS ({detail}; {took:.1?})");
            true
        }
        Err(detail) => {
            println!("criterion {n}: FAIL ({detail}; {took:.1?})");
            false
        }
    }
}

fn random_wave(r: &mut rng::StreamRng, len: usize) -> Waveform {
    Waveform::new((0..len).map(|_| r.random_range(-1.0..1.0)).collect(), 16_000).unwrap()
}

fn augmentation_identities() -> Outcome {
    let mut r = rng::seeded(11);
    let bank = NoiseBank::new(random_wave(&mut r, 20_000)).map_err(|e| e.to_string())?;
    let mut impulse = vec![0.0; 16_000];
    impulse[0] = 1.0;
    let unit = ImpulseResponseSet::new(vec![Waveform::new(impulse, 16_000).unwrap()], false).unwrap();
    for trial in 0..50 {
        let len = r.random_range(1..4000);
        let x = random_wave(&mut r, len);
        let n = x.len();
        let start = r.random_range(0..bank.len() - n);
        let noise = NoiseDraw { start, end: start + r.random_range(0..=n), offset: 0, gain: 0.0 };
        check(noise.apply(&x, &bank).unwrap() == x, format!("zero-gain noise changed trial {trial}"))?;
        let reverb = ReverbDraw { response: 0, length: r.random_range(496..=4000) };
        check(reverb.apply(&x, &unit).unwrap() == x, format!("unit impulse changed trial {trial}"))?;
        check(GainDraw(1.0).apply(&x) == x, format!("unit gain changed trial {trial}"))?;
        check(FadeDraw::none().apply(&x).unwrap() == x, format!("empty fade changed trial {trial}"))?;
    }

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let len = r.random_range(1..=1000);
        let x = random_wave(&mut r, len);
        let ir = random_wave(&mut r, 16_000);
        let irs = ImpulseResponseSet::new(vec![ir.clone()], false).unwrap();
        let draw = ReverbDraw { response: 0, length: r.random_range(496..=4000) };
        let y = draw.apply(&x, &irs).unwrap();
        let h = &ir.samples()[..=draw.length];
        for (t, &got) in y.samples().iter().enumerate() {
            let mut acc = 0.0;
            for (k, &hk) in h.iter().enumerate() {
                if k <= t {
                    acc += hk * x.samples()[t - k];
                }
            }
            worst = worst.max((got - acc).abs());
        }
    }
    check(worst <= 1e-9, format!("reverb deviates from direct sum by {worst:e}"))?;
    Ok(format!("identities bit-exact, reverb max error {worst:.1e}"))
}

fn scheduler_statistics() -> Outcome {
    let registry = [0usize, 1, 2, 3];
    let trials = 100_000;
    let mut counts = [0usize; 4];
    let mut r = rng::seeded(2);
    for _ in 0..trials {
        for op in select_ops(&registry, 0.5, &mut r) {
            counts[op] += 1;
        }
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    for (op, f) in freqs.iter().enumerate() {
        check((f - 0.5).abs() <= 0.01, format!("op {op} included with frequency {f}"))?;
    }
    Ok(format!("frequencies {freqs:.4?}"))
}

fn feature_geometry() -> Outcome {
    let config = FeatureConfig::default();
    let extractor = MfccExtractor::new(config.clone()).map_err(|e| e.to_string())?;
    let sine: Vec<f64> = (0..16_000).map(|n| (2.0 * std::f64::consts::PI * 1000.0 * n as f64 / 16_000.0).sin()).collect();
    let sine = Waveform::new(sine, 16_000).unwrap();
    let mfcc = extractor.mfcc(&sine).map_err(|e| e.to_string())?;
    check(mfcc.data().dim() == (98, 40), format!("shape {:?}", mfcc.data().dim()))?;

    let spectrum = Stft::new(&config).unwrap().process(&sine).unwrap();
    for (f, row) in spectrum.outer_iter().enumerate() {
        let peak = (0..row.len()).max_by(|&a, &b| row[a].norm().total_cmp(&row[b].norm())).unwrap();
        check(peak == 32, format!("frame {f} peaks at bin {peak}"))?;
    }

    let silence = extractor.mfcc(&Waveform::new(vec![0.0; 16_000], 16_000).unwrap()).unwrap();
    let c0 = 80f64.sqrt() * 1e-10f64.ln();
    let mut worst = 0.0f64;
    for row in silence.data().outer_iter() {
        for (k, &v) in row.iter().enumerate() {
            let expected = if k == 0 { c0 } else { 0.0 };
            worst = worst.max((v - expected).abs());
        }
    }
    check(worst < 1e-9, format!("silence frame off by {worst:e}"))?;
    Ok(format!("98x40, sine peak bin 32, silence c0 {c0:.4} (max error {worst:.1e})"))
}

fn gradient_correctness() -> Outcome {
    // Dropout off, so the differentiated train trace matches the eval-mode probes.
    let config = ModelConfig { gru_hidden: 8, dropout: 0.0, ..ModelConfig::with_dims(8, 2, 1) };
    let params: Parameters<f64> = init_parameters(&config, 21).map_err(|e| e.to_string())?;
    let mut r = rng::seeded(22);
    let x = Array2::from_shape_simple_fn((5, 40), || r.random_range(-2.0..2.0));
    let label = 17;
    let loss = |p: &Parameters<f64>| -model_forward(p, x.view(), Mode::Eval).unwrap().log_probs()[label];

    let mut mask_rng = rng::seeded(0);
    let trace = model_forward(&params, x.view(), Mode::Train(&mut mask_rng)).unwrap();
    let mut upstream = Array1::zeros(41);
    upstream[label] = -1.0;
    let grads = model_backward(&params, &trace, &upstream).map_err(|e| e.to_string())?;

    let step = 1e-5;
    let mut worst = (0.0f64, String::new());
    let mut probe = params.clone();
    let analytic = grads.named_tensors();
    for (t, (name, grad)) in analytic.iter().enumerate() {
        for (i, &g) in grad.iter().enumerate() {
            let original = *params.named_tensors()[t].1.iter().nth(i).unwrap();
            let mut shifted = |v: f64| {
                *probe.named_tensors_mut()[t].1.iter_mut().nth(i).unwrap() = v;
                loss(&probe)
            };
            let numeric = (shifted(original + step) - shifted(original - step)) / (2.0 * step);
            shifted(original);
            let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-6);
            if rel > worst.0 {
                worst = (rel, name.clone());
            }
        }
    }
    check(worst.0 < 1e-3, format!("relative error {:.2e} in {}", worst.0, worst.1))?;
    Ok(format!("{} tensors, max relative error {:.2e} in {}", analytic.len(), worst.0, worst.1))
}

fn structural_counts() -> Outcome {
    let table = [(64, 1, 165_000), (64, 2, 234_000), (96, 1, 358_000), (96, 2, 511_000), (128, 1, 625_000), (128, 2, 895_000)];
    let mut lines = Vec::new();
    for (d, n, reported) in table {
        let h2 = param_count(&ModelConfig::with_dims(d, 2, n));
        let h4 = param_count(&ModelConfig::with_dims(d, 4, n));
        check(h2 == h4, format!("d={d} N={n}: h=2 gives {h2}, h=4 gives {h4}"))?;
        let ratio = h2 as f64 / reported as f64;
        check((0.5..=2.0).contains(&ratio), format!("d={d} N={n}: {h2} vs table {reported}"))?;
        lines.push(format!("d{d}/N{n}={h2}"));
    }
    for d in [64, 96, 128] {
        let one = param_count(&ModelConfig::with_dims(d, 2, 1));
        let two = param_count(&ModelConfig::with_dims(d, 2, 2));
        check(two > one, format!("d={d}: not increasing in N"))?;
    }
    for n in [1, 2] {
        let counts: Vec<usize> = [64, 96, 128].iter().map(|&d| param_count(&ModelConfig::with_dims(d, 2, n))).collect();
        check(counts.windows(2).all(|w| w[1] > w[0]), format!("N={n}: not increasing in d"))?;
    }
    Ok(lines.join(" "))
}

fn optimization_sanity() -> Outcome {
    let (total, lr0) = (40, 1e-3);
    for e in [0, total / 2, total - 1] {
        let expected = lr0 * (1.0 - e as f64 / total as f64);
        let got = lr_at(e, total, lr0).map_err(|e| e.to_string())?;
        check(got == expected, format!("lr at {e}: {got} vs {expected}"))?;
    }

    let uniform = Array2::from_elem((3, 41), -(41f64.ln()));
    let loss = nll_loss(uniform.view(), &[0, 20, 40]).unwrap();
    check((loss - 41f64.ln()).abs() < 1e-6, format!("uniform loss {loss}"))?;

    let config = ModelConfig { gru_hidden: 8, ..ModelConfig::with_dims(8, 2, 1) };
    let mut decreases = 0;
    for trial in 0..20u64 {
        let params: Parameters<f32> = init_parameters(&config, 500 + trial).unwrap();
        let mut r = rng::seeded(900 + trial);
        let examples = (0..4)
            .map(|_| {
                let frames = r.random_range(3..12);
                (Array2::from_shape_simple_fn((frames, 40), || r.random_range(-3.0f32..3.0)), r.random_range(0..41))
            })
            .collect();
        let batch = Batch::from_examples(examples).unwrap();
        let streams = || (0..4).map(|i| rng::stream(trial, &format!("ex{i}"), 0)).collect();
        let (before, grads) = batch_gradients(&params, &batch, streams()).unwrap();
        let mut stepped = params.clone();
        let mut state = OptimizerState::new(&params);
        adam_step(&mut stepped, &grads, &mut state, 1e-5, &AdamConfig::default()).unwrap();
        if batch_loss(&stepped, &batch, streams()).unwrap() < before {
            decreases += 1;
        }
    }
    check(decreases == 20, format!("{decreases}/20 single steps decreased the loss"))?;
    Ok("schedule exact, uniform loss ln 41, 20/20 decreases".into())
}

const OVERFIT_SEED: &str = "7";

fn overfit_run(work: &Path, name: &str, manifest: &Path) -> Result<(), String> {
    let out = kws(&[
        "train", "--manifest", p(manifest), "--out", p(&work.join(name)), "--epochs", "60", "--d-model", "32",
        "--heads", "2", "--layers", "1", "--lr", "3e-3", "--batch-size", "16", "--no-augment", "--no-wall-time",
        "--seed", OVERFIT_SEED,
    ]);
    check(out.status.success(), format!("train failed: {}", stderr(&out)))
}

fn overfit_oracle(work: &Path, manifest: &Path, entries: &[kws_core::audio_io::ManifestEntry]) -> Outcome {
    overfit_run(work, "run_a", manifest)?;
    let ckpt = work.join("run_a/best.ckpt");
    let eval = kws(&["eval", "--checkpoint", p(&ckpt), "--manifest", p(manifest), "--split", "train", "--out", p(&work.join("eval"))]);
    check(eval.status.success(), format!("eval failed: {}", stderr(&eval)))?;
    let text = stdout(&eval);
    let accuracy: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("accuracy: "))
        .and_then(|v| v.trim_end_matches('%').parse().ok())
        .ok_or_else(|| format!("no accuracy line in {text}"))?;
    check(accuracy >= 99.0, format!("train accuracy {accuracy:.2}%"))?;

    let train: Vec<_> = entries.iter().filter(|e| e.split == Split::Train).collect();
    let mut missed = Vec::new();
    for entry in &train {
        let out = kws(&["infer", "--checkpoint", p(&ckpt), "--top-k", "1", p(&entry.path)]);
        check(out.status.success(), format!("infer failed: {}", stderr(&out)))?;
        let top = stdout(&out);
        let predicted = top.lines().next().and_then(|l| l.split('\t').nth(1)).unwrap_or("");
        if predicted != entry.label {
            missed.push(format!("{} -> {predicted}", entry.id));
        }
    }
    check(missed.is_empty(), format!("infer missed {} clips: {missed:?}", missed.len()))?;
    Ok(format!("train accuracy {accuracy:.2}%, infer top-1 correct on {}/{} clips", train.len(), train.len()))
}

fn determinism(work: &Path, manifest: &Path) -> Outcome {
    overfit_run(work, "run_b", manifest)?;
    for file in ["metrics.jsonl", "best.ckpt"] {
        let a = fs::read(work.join("run_a").join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(work.join("run_b").join(file)).map_err(|e| e.to_string())?;
        check(a == b, format!("{file} differs between runs"))?;
    }
    Ok("metrics.jsonl and best.ckpt byte-identical".into())
}

fn sweep_harness(work: &Path) -> Outcome {
    let (manifest, _) = toy_manifest(&work.join("sweep_data"), [1, 1, 1], 3);
    let out_dir = work.join("sweep");
    let out = kws(&[
        "sweep", "--preset", "reference", "--epochs", "1", "--manifest", p(&manifest), "--out", p(&out_dir),
        "--no-augment", "--no-wall-time", "--batch-size", "41",
    ]);
    check(out.status.success(), format!("sweep failed: {}", stderr(&out)))?;
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).map_err(|e| e.to_string())?;
    let mut lines = csv.lines();
    check(lines.next() == Some("d_model,heads,layers,params,dev_acc,test_acc,status"), "unexpected header")?;
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    check(rows.len() == 12, format!("{} rows", rows.len()))?;
    check(rows.iter().all(|r| r.len() == 7 && r[6] == "ok"), format!("failed cells in\n{csv}"))?;
    for pair in rows.chunks(2) {
        check(pair[0][3] == pair[1][3], format!("params differ across heads: {:?} {:?}", pair[0], pair[1]))?;
    }
    Ok("12-cell grid completed; headline accuracy needs the full dataset and is not checked".into())
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let mut passed = vec![
        run(1, Duration::from_secs(10), augmentation_identities),
        run(2, Duration::from_secs(10), scheduler_statistics),
        run(3, Duration::from_secs(5), feature_geometry),
        run(4, Duration::from_secs(120), gradient_correctness),
        run(5, Duration::from_secs(1), structural_counts),
        run(6, Duration::from_secs(60), optimization_sanity),
    ];

    let (manifest, entries) = toy_manifest(&work.path().join("toy"), [3, 1, 0], 1);
    passed.push(run(7, Duration::from_secs(15 * 60), || overfit_oracle(work.path(), &manifest, &entries)));
    passed.push(run(8, Duration::from_secs(15 * 60), || determinism(work.path(), &manifest)));
    passed.push(run(9, Duration::from_secs(30 * 60), || sweep_harness(work.path())));

    let failed = passed.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", passed.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
