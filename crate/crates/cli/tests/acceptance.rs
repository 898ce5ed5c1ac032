//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toporeg_cli::diagram_file;
use toporeg_cli::fieldio::{read_field, write_field};
use toporeg_cli::ops::{self, OptimizeConfig, RegularizerWeights};
use toporeg_core::dense_losses::total_variation;
use toporeg_core::metrics::{depth_metrics, miou_binary};
use toporeg_core::topo_loss::{topo_loss_multichannel, topo_loss_with_grad};
use toporeg_core::{
    build_complex, diagram, GridShape, MultiChannelField, PersistencePair, ScalarField, TopoPenaltyConfig,
};
use toporeg_testkit as kit;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))
}

// 1. ph0 equals the threshold-sweep oracle on 500 integer fields up to 6x6.
fn ph0_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    for trial in 0..500 {
        let (h, w) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let f = kit::integer_field(&mut rng, h, w, 1, 36);
        let dgm = diagram(&f, 0).map_err(|e| e.to_string())?;
        let mut got: Vec<(f64, f64)> = dgm.pairs_in_dim(0).map(|p| (p.birth, p.death)).collect();
        got.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
        let want = kit::sweep_ph0(h, w, f.values());
        ensure(got == want, || format!("trial {trial} ({h}x{w}): {got:?} != {want:?}"))?;
    }
    within(Duration::from_secs(10), start, "500 fields")?;
    Ok(format!("500/500 multisets equal in {:?}", start.elapsed()))
}

fn alive(p: &PersistencePair, t: f64) -> bool {
    if p.essential {
        p.birth >= t && t >= p.death
    } else {
        p.birth >= t && t > p.death
    }
}

// 2. Alive dim-0 minus alive dim-1 equals the Euler characteristic of every
//    super-level set; the full complex has Euler characteristic 1.
fn betti_euler() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let mut checks = 0;
    for trial in 0..100 {
        let f = kit::integer_field(&mut rng, 5, 5, 0, 9);
        let dgm = diagram(&f, 1).map_err(|e| e.to_string())?;
        for t in kit::distinct_values(f.values()) {
            let b0 = dgm.pairs_in_dim(0).filter(|p| alive(p, t)).count() as i64;
            let b1 = dgm.pairs_in_dim(1).filter(|p| alive(p, t)).count() as i64;
            let chi = kit::superlevel_euler(5, 5, f.values(), t);
            ensure(b0 - b1 == chi, || format!("trial {trial}, t={t}: {b0} - {b1} != {chi}"))?;
            checks += 1;
        }
    }
    for h in 1..=32 {
        for w in 1..=32 {
            let chi = build_complex(GridShape::new(h, w).unwrap()).euler_characteristic();
            ensure(chi == 1, || format!("{h}x{w} complex has chi {chi}"))?;
        }
    }
    Ok(format!("{checks} thresholds exact; chi = 1 on all 1024 shapes"))
}

// 3. Dim-0 pair count equals the number of strict local maxima.
fn local_maxima() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    for trial in 0..200 {
        let f = kit::distinct_field(&mut rng, 8, 8, 1.0);
        let n = diagram(&f, 0).map_err(|e| e.to_string())?.count_in_dim(0);
        let m = kit::local_maxima(8, 8, f.values());
        ensure(n == m, || format!("trial {trial}: {n} pairs, {m} maxima"))?;
    }
    Ok("200/200 fields".into())
}

const FD_STEP: f64 = 1e-4;
const FD_REL: f64 = 1e-4;
const FD_ABS_ZERO: f64 = 1e-8;

fn check_grad(label: &str, analytic: &[f64], numeric: &[f64]) -> Result<(), String> {
    match kit::gradient_mismatch(analytic, numeric, FD_REL, FD_ABS_ZERO) {
        None => Ok(()),
        Some((i, a, n)) => Err(format!("{label}: entry {i} analytic {a} vs numeric {n}")),
    }
}

// 4. Analytic gradients match central differences (h = 1e-4).
fn gradient_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let mut entries = 0;
    for trial in 0..20 {
        let f = kit::distinct_field(&mut rng, 8, 8, 0.1);
        let cfg = TopoPenaltyConfig::new(1);
        let lg = topo_loss_with_grad(&f, &cfg).map_err(|e| e.to_string())?;
        let fd = kit::central_differences(f.values(), FD_STEP, |x| {
            topo_loss_with_grad(&ScalarField::new(f.shape(), x.to_vec()).unwrap(), &cfg)
                .unwrap()
                .value
        });
        check_grad(&format!("topo 8x8 trial {trial}"), lg.grad.values(), &fd)?;

        let h = kit::distinct_norm_field(&mut rng, 4, 4, 3, 0.1);
        let cfg0 = TopoPenaltyConfig::new(0);
        let lg = topo_loss_multichannel(&h, &cfg0).map_err(|e| e.to_string())?;
        let fd = kit::central_differences(h.values(), FD_STEP, |x| {
            topo_loss_multichannel(&MultiChannelField::new(h.shape(), 3, x.to_vec()).unwrap(), &cfg0)
                .unwrap()
                .value
        });
        check_grad(&format!("topo 4x4x3 trial {trial}"), lg.grad.values(), &fd)?;

        for field in [f.to_multichannel(), h] {
            let tv = total_variation(&field);
            let fd = kit::central_differences(field.values(), FD_STEP, |x| {
                total_variation(&MultiChannelField::new(field.shape(), field.channels(), x.to_vec()).unwrap()).value
            });
            check_grad(&format!("tv trial {trial}"), tv.grad.values(), &fd)?;
            entries += fd.len();
        }
        entries += 64 + 48;
    }
    Ok(format!("{entries} gradient entries within rel 1e-4"))
}

// 5. Simplification of 32x32 uniform noise with k = 1.
fn simplification() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let f = kit::uniform_field(&mut rng, 32, 32);
    let initial_max = diagram(&f, 0).map_err(|e| e.to_string())?.max_persistence();
    let cfg = OptimizeConfig {
        weights: RegularizerWeights {
            k: 1,
            tv: 0.0,
            top: 1.0,
            project: false,
        },
        steps: 500,
        ..OptimizeConfig::default()
    };
    let out = ops::optimize(&f.to_multichannel(), &cfg).map_err(|e| e.to_string())?;
    within(Duration::from_secs(30), start, "500 steps")?;
    for w in out.trace.windows(2) {
        ensure(w[1].objective <= w[0].objective, || {
            format!(
                "objective rose at step {}: {} -> {}",
                w[1].step, w[0].objective, w[1].objective
            )
        })?;
    }
    let final_dgm = ops::field_diagram(&out.field, false, 0).map_err(|e| e.to_string())?;
    let threshold = 0.05 * initial_max;
    let long = final_dgm
        .pairs_in_dim(0)
        .filter(|p| p.persistence() > threshold)
        .count();
    ensure(long <= 1, || format!("{long} bars longer than {threshold}"))?;
    let before = diagram(&f, 0).unwrap().count_in_dim(0);
    Ok(format!(
        "{before} bars -> {long} above {threshold:.4}; final topo {:.3e}; {:?}",
        out.trace.last().unwrap().topo,
        start.elapsed()
    ))
}

// 6. Perturbations below 0.4 of the minimum gap keep every critical vertex.
fn stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6);
    let key = |p: &PersistencePair| (p.dim, p.birth_vertex, p.death_vertex, p.essential);
    for trial in 0..50 {
        let f = kit::distinct_field(&mut rng, 8, 8, 1.0);
        let eps = 0.4 * kit::min_gap(f.values());
        let g = ScalarField::new(
            f.shape(),
            f.values().iter().map(|v| v + rng.gen_range(-eps..=eps)).collect(),
        )
        .unwrap();
        let (a, b) = (diagram(&f, 1).unwrap(), diagram(&g, 1).unwrap());
        let mut ka: Vec<_> = a.pairs().iter().map(key).collect();
        let mut kb: Vec<_> = b.pairs().iter().map(key).collect();
        ka.sort();
        kb.sort();
        ensure(ka == kb, || format!("trial {trial}: critical vertices changed"))?;
        for p in a.pairs() {
            let q = b.pairs().iter().find(|q| key(q) == key(p)).unwrap();
            ensure(
                (p.birth - q.birth).abs() <= eps && (p.death - q.death).abs() <= eps,
                || format!("trial {trial}: pair moved by more than {eps}"),
            )?;
        }
    }
    Ok("50/50 fields".into())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

// 7. Metric formulas.
fn metric_suite() -> Outcome {
    let row = |v: &[f64]| ScalarField::new(GridShape::new(1, v.len()).unwrap(), v.to_vec()).unwrap();
    let y = row(&[0.5, 1.0, 2.0, 7.0]);
    let yhat = row(&[0.625, 1.25, 2.5, 8.75]);
    let m = depth_metrics(&y, &yhat, None).map_err(|e| e.to_string())?;
    ensure((m.delta1, m.delta2, m.delta3) == (0.0, 1.0, 1.0), || {
        format!("strictness boundary gave {:?}", (m.delta1, m.delta2, m.delta3))
    })?;
    let miou = miou_binary(&row(&[1.0, 1.0, 0.0, 0.0]), &row(&[1.0, 0.0, 0.0, 0.0]), 0.5).unwrap();
    ensure(close(miou, 7.0 / 12.0), || format!("mIoU {miou} != 7/12"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    for trial in 0..20 {
        let (h, w) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let n = h * w;
        let shape = GridShape::new(h, w).unwrap();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let b: Vec<f64> = a.iter().map(|v| v * rng.gen_range(0.5..2.0)).collect();
        let m = depth_metrics(
            &ScalarField::new(shape, a.clone()).unwrap(),
            &ScalarField::new(shape, b.clone()).unwrap(),
            None,
        )
        .unwrap();
        let nf = n as f64;
        let mean = |g: &dyn Fn(f64, f64) -> f64| a.iter().zip(&b).map(|(&x, &y)| g(x, y)).sum::<f64>() / nf;
        let expected = [
            mean(&|x, y| (x - y).abs()),
            mean(&|x, y| (x - y).powi(2)).sqrt(),
            mean(&|x, y| (x - y).abs() / y),
            mean(&|x, y| (x.log10() - y.log10()).abs()),
            mean(&|x, y| (x.log10() - y.log10()).powi(2)).sqrt(),
            mean(&|x, y| ((x / y).max(y / x) < 1.25) as u8 as f64),
            mean(&|x, y| ((x / y).max(y / x) < 1.5625) as u8 as f64),
            mean(&|x, y| ((x / y).max(y / x) < 1.953125) as u8 as f64),
        ];
        let got = [
            m.mae,
            m.rmse,
            m.abs_rel,
            m.mae_log10,
            m.rmse_log10,
            m.delta1,
            m.delta2,
            m.delta3,
        ];
        for (i, (g, e)) in got.iter().zip(&expected).enumerate() {
            ensure(close(*g, *e), || format!("trial {trial} metric {i}: {g} vs {e}"))?;
        }

        let gt: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let pr: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let got = miou_binary(
            &ScalarField::new(shape, gt.clone()).unwrap(),
            &ScalarField::new(shape, pr.clone()).unwrap(),
            0.5,
        )
        .unwrap();
        let iou = |class: bool| {
            let inter = gt
                .iter()
                .zip(&pr)
                .filter(|(g, p)| (**g >= 0.5) == class && (**p >= 0.5) == class)
                .count();
            let union = gt
                .iter()
                .zip(&pr)
                .filter(|(g, p)| (**g >= 0.5) == class || (**p >= 0.5) == class)
                .count();
            if union == 0 {
                1.0
            } else {
                inter as f64 / union as f64
            }
        };
        let want = (iou(true) + iou(false)) / 2.0;
        ensure(close(got, want), || format!("trial {trial} mIoU {got} vs {want}"))?;
    }
    Ok("boundary, 7/12 example and 20 random cross-checks".into())
}

// 8. Byte-identical diagram files across runs; exact raw-f32 and CSV round trips.
fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xA8);
    let f = kit::uniform_field(&mut rng, 12, 9);
    let csv_path = dir.path().join("field.csv");
    write_field(&csv_path, &f.to_multichannel()).map_err(|e| e.to_string())?;
    let back = read_field(&csv_path).map_err(|e| e.to_string())?;
    ensure(
        back.values()
            .iter()
            .zip(f.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()),
        || "csv round trip changed values".into(),
    )?;

    let raw: Vec<f64> = (0..7 * 5 * 3)
        .map(|_| (rng.gen::<f32>() * 100.0 - 50.0) as f64)
        .collect();
    let h = MultiChannelField::new(GridShape::new(7, 5).unwrap(), 3, raw).unwrap();
    let raw_path = dir.path().join("field.raw");
    write_field(&raw_path, &h).map_err(|e| e.to_string())?;
    ensure(read_field(&raw_path).map_err(|e| e.to_string())? == h, || {
        "raw-f32 round trip changed values".into()
    })?;

    let bin = env!("CARGO_BIN_EXE_toporeg");
    let run = |out: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(bin)
            .args(["diagram", "--max-dim", "1", "--out"])
            .arg(out)
            .arg(&csv_path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("diagram exited with {status}"))?;
        std::fs::read(out).map_err(|e| e.to_string())
    };
    let first = run(&dir.path().join("a.csv"))?;
    let second = run(&dir.path().join("b.csv"))?;
    ensure(first == second, || "diagram files differ between runs".into())?;

    let rows = diagram_file::parse_csv(std::str::from_utf8(&first).unwrap())?;
    let expected = diagram_file::rows(&diagram(&f, 1).unwrap(), 0.0);
    ensure(rows == expected, || {
        "diagram CSV does not parse back to the computed pairs".into()
    })?;
    Ok(format!(
        "{} identical bytes; csv and raw-f32 round trips exact",
        first.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 ph0 oracle equivalence", ph0_oracle),
        ("2 Betti/Euler consistency", betti_euler),
        ("3 local-maxima law", local_maxima),
        ("4 gradient checks", gradient_checks),
        ("5 simplification experiment", simplification),
        ("6 stability", stability),
        ("7 metric formulas", metric_suite),
        ("8 CLI determinism and round trips", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
