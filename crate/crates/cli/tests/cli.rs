mod common;

use std::fs;

use common::{kws, p, stderr, stdout, toy_dataset, toy_manifest, write_run_config};
use kws_core::audio_io::{read_manifest, write_wav, Source, Waveform};
use kws_core::toy::toy_clip;

#[test]
fn help_lists_every_subcommand_and_flag() {
    let out = kws(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in ["prepare", "train", "eval", "infer", "sweep", "inspect-checkpoint"] {
        assert!(text.contains(sub), "missing {sub}");
    }
    let train = stdout(&kws(&["train", "--help"]));
    for flag in ["--config", "--manifest", "--d-model", "--heads", "--layers", "--synthetic", "--seed", "--epochs"] {
        assert!(train.contains(flag), "missing {flag}");
    }
    for sub in ["prepare", "eval", "infer", "sweep", "inspect-checkpoint"] {
        assert!(stdout(&kws(&[sub, "--help"])).contains("--seed"), "{sub} lacks --seed");
    }
    assert_eq!(kws(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(kws(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn prepare_covers_every_label_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (dataset, noise) = toy_dataset(dir.path(), 5);
    let run = |out: &str| {
        kws(&[
            "prepare", "--dataset", p(&dataset), "--noise", p(&noise), "--noise-clips", "10", "--seed", "7", "--out", out,
        ])
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = run(p(&a));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("labels covered: 41/41"));
    run(p(&b));
    let manifest = read_manifest(a.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.len(), 40 * 5 + 10);
    assert_eq!(manifest.iter().filter(|e| e.label == "NULL").count(), 10);
    assert!(manifest.iter().filter(|e| e.label == "NULL").all(|e| e.source == Source::Noise));
    // Paths differ between the two output dirs only in the carved clips.
    let text_a = fs::read_to_string(a.join("manifest.jsonl")).unwrap().replace(p(&a), "");
    let text_b = fs::read_to_string(b.join("manifest.jsonl")).unwrap().replace(p(&b), "");
    assert_eq!(text_a, text_b);
    let again = dir.path().join("a");
    run(p(&again));
    assert_eq!(fs::read_to_string(again.join("manifest.jsonl")).unwrap().replace(p(&again), ""), text_a);

    let missing = kws(&["prepare", "--dataset", p(&dataset), "--noise", "/no/such/dir", "--out", p(&a)]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("--noise"));
}

#[test]
fn train_eval_infer_inspect_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, entries) = toy_manifest(dir.path(), [1, 1, 1], 2);
    let config = dir.path().join("run.json");
    write_run_config(&config, "");
    let out_dir = dir.path().join("run");
    let train = kws(&[
        "train", "--config", p(&config), "--manifest", p(&manifest), "--out", p(&out_dir), "--seed", "3",
        "--d-model", "8", "--heads", "4",
    ]);
    assert!(train.status.success(), "{}", stderr(&train));
    assert!(stdout(&train).contains("train 41 / dev 41 utterances"));
    for file in ["metrics.jsonl", "best.ckpt", "resolved-config.json"] {
        assert!(out_dir.join(file).is_file(), "missing {file}");
    }
    let resolved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("resolved-config.json")).unwrap()).unwrap();
    assert_eq!(resolved["model"]["d_model"], 8, "flags beat the file");
    assert_eq!(resolved["model"]["n_heads"], 4);
    assert_eq!(resolved["train"]["seed"], 3);

    // Rerunning from the resolved config reproduces the metrics.
    let rerun = dir.path().join("rerun");
    let again = kws(&["train", "--config", p(&out_dir.join("resolved-config.json")), "--out", p(&rerun)]);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(fs::read(out_dir.join("metrics.jsonl")).unwrap(), fs::read(rerun.join("metrics.jsonl")).unwrap());
    assert_eq!(fs::read(out_dir.join("best.ckpt")).unwrap(), fs::read(rerun.join("best.ckpt")).unwrap());

    let ckpt = out_dir.join("best.ckpt");
    let eval = |out: &str| kws(&["eval", "--checkpoint", p(&ckpt), "--manifest", p(&manifest), "--split", "test", "--out", out]);
    let e1 = eval(p(&dir.path().join("e1")));
    let e2 = eval(p(&dir.path().join("e2")));
    assert!(e1.status.success(), "{}", stderr(&e1));
    let line = stdout(&e1).lines().find(|l| l.starts_with("accuracy: ")).unwrap().to_string();
    let value = line.trim_start_matches("accuracy: ");
    assert_eq!(value.split('.').nth(1).map(str::len), Some(2), "{line}");
    assert_eq!(stdout(&e1).replace("e1", ""), stdout(&e2).replace("e2", ""));
    let csv1 = fs::read_to_string(dir.path().join("e1/confusion.csv")).unwrap();
    assert_eq!(csv1, fs::read_to_string(dir.path().join("e2/confusion.csv")).unwrap());
    assert_eq!(csv1.lines().count(), 42);

    let missing = kws(&["eval", "--checkpoint", "/no/ckpt", "--manifest", p(&manifest)]);
    assert_eq!(missing.status.code(), Some(2));

    let other = dir.path().join("other.json");
    fs::write(&other, r#"{"feature": {"n_mfcc": 40, "window_ms": 25.0, "hop_ms": 10.0, "n_mels": 64, "fft_size": 512,
        "sample_rate": 16000, "fmin": 0.0, "fmax": 8000.0, "log_floor": 1e-10}, "train": {"epochs": 1}}"#)
    .unwrap();
    let mismatch = kws(&["eval", "--checkpoint", p(&ckpt), "--manifest", p(&manifest), "--config", p(&other)]);
    assert_eq!(mismatch.status.code(), Some(2), "{}", stderr(&mismatch));

    let clip = &entries[0].path;
    let infer = kws(&["infer", "--checkpoint", p(&ckpt), "--top-k", "41", p(clip)]);
    assert!(infer.status.success(), "{}", stderr(&infer));
    let rows: Vec<Vec<String>> =
        stdout(&infer).lines().map(|l| l.split('\t').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 41);
    let total: f64 = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-4, "{total}");
    assert!(rows.iter().any(|r| r[1] == "NULL"));

    let slow = dir.path().join("slow.wav");
    write_wav(&slow, &Waveform::new(vec![0.0; 8000], 8000).unwrap()).unwrap();
    let rejected = kws(&["infer", "--checkpoint", p(&ckpt), p(&slow)]);
    assert_eq!(rejected.status.code(), Some(2));
    assert!(stderr(&rejected).contains("resample"));

    let inspect = kws(&["inspect-checkpoint", p(&ckpt), "--tensors"]);
    assert!(inspect.status.success());
    let text = stdout(&inspect);
    assert!(text.contains("labels: 41") && text.contains("prenet.weight [40, 8]"), "{text}");
}

#[test]
fn synthetic_audio_joins_the_train_split_only() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = toy_manifest(dir.path(), [1, 1, 0], 2);
    let synthetic = dir.path().join("tts");
    for label in ["zero", "open"] {
        fs::create_dir_all(synthetic.join(label)).unwrap();
        write_wav(synthetic.join(label).join("a.wav"), &toy_clip(0, 77, 1)).unwrap();
    }
    let config = dir.path().join("run.json");
    write_run_config(&config, "");
    let out = kws(&[
        "train", "--config", p(&config), "--manifest", p(&manifest), "--synthetic", p(&synthetic), "--out",
        p(&dir.path().join("run")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("train 43 / dev 41 utterances"), "{}", stdout(&out));
}

#[test]
fn missing_augmentation_resources_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = toy_manifest(dir.path(), [1, 1, 0], 2);
    let out = kws(&["train", "--epochs", "1", "--manifest", p(&manifest), "--out", p(&dir.path().join("run"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--noise"), "{}", stderr(&out));
    let no_epochs = kws(&["train", "--manifest", p(&manifest)]);
    assert_eq!(no_epochs.status.code(), Some(2));
}

#[test]
fn numeric_blow_up_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = toy_manifest(dir.path(), [1, 1, 0], 2);
    let config = dir.path().join("run.json");
    write_run_config(&config, "");
    let out = kws(&[
        "train", "--config", p(&config), "--manifest", p(&manifest), "--out", p(&dir.path().join("run")), "--lr",
        "1e30", "--epochs", "3", "--batch-size", "4",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("epoch"), "{}", stderr(&out));
}

#[test]
fn sweep_reports_counts_and_survives_bad_cells() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = toy_manifest(dir.path(), [1, 1, 1], 2);
    let config = dir.path().join("run.json");
    write_run_config(&config, "");
    let out_dir = dir.path().join("sweep");
    let out = kws(&[
        "sweep", "--config", p(&config), "--manifest", p(&manifest), "--out", p(&out_dir), "--grid",
        "8x2x1,8x2x2,8x4x1,9x2x1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let params: Vec<usize> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(params[1] > params[0]);
    assert_eq!(params[0], params[2]);
    assert_eq!(rows[0][6], "ok");
    assert!(rows[3][6].starts_with("failed"), "{csv}");

    let empty = kws(&["sweep", "--config", p(&config), "--manifest", p(&manifest), "--out", p(&out_dir), "--grid", ""]);
    assert_eq!(empty.status.code(), Some(2));
}
