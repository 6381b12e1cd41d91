//! Acceptance suite: every release criterion as one test with a printed
//! pass/fail line (run with `--nocapture` to see them).
//!
//! The numeric pins here are properties of the shipped default
//! configuration and its synthetic absorption table; they are artifact
//! golden values, not reproductions of published device figures.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng as _, SeedableRng as _};

use mqwtx::config::Config;
use mqwtx::laser::{
    relaxation_frequency, rk4_step, steady_state, threshold_current, LaserParams, LaserState,
};
use mqwtx::metrics::{eye_metrics, fold_eye, max_error_free_bitrate};
use mqwtx::modulator::{
    contrast_from_il, il_from_cr, mod_efficiency, reflectivity, AbsorptionModel, ModulatorParams,
};
use mqwtx::optimizer::{grid_sweep, minimize_power, SweepAxes};
use mqwtx::output::write_sweep_csv;

fn report(id: &str, pass: bool, detail: &str) {
    println!("acceptance {id}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance {id} failed: {detail}");
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Random parameter set inside the documented ranges, rejection-sampled so
/// the transparency modal-gain budget stays inside the tau_p/10 RK4
/// stability envelope.
fn random_params(rng: &mut StdRng) -> LaserParams {
    loop {
        let p = LaserParams {
            v_a: rng.gen_range(1e-17..1e-16),
            g0: rng.gen_range(3e-12..2e-11),
            n0: rng.gen_range(3e23..2e24),
            eps: rng.gen_range(0.5e-23..3e-23),
            tau_n: rng.gen_range(1e-9..3e-9),
            tau_p: rng.gen_range(1e-12..3e-12),
            gamma: rng.gen_range(0.03..0.3),
            beta: rng.gen_range(1e-5..1e-3),
            ..LaserParams::default()
        };
        if p.gamma * p.g0 * p.n0 * p.tau_p <= 4.0 {
            return p;
        }
    }
}

fn integrate_constant(p: &LaserParams, current: f64, t_end: f64, dt: f64) -> LaserState {
    let steps = (t_end / dt).round() as usize;
    let mut state = LaserState::ZERO;
    for k in 0..steps {
        state = rk4_step(&state, |_| current, k as f64 * dt, dt, p).expect("positivity");
    }
    state
}

#[test]
fn criterion_01_steady_state_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xA11CE);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = random_params(&mut rng);
        let i_th = threshold_current(&p);
        for mult in [1.2, 1.5, 2.0, 3.0] {
            let current = mult * i_th;
            let oracle = steady_state(&p, current).unwrap();
            let f_r = relaxation_frequency(&p, current).unwrap();
            let t_end = 30.0 * p.tau_n.max(1.0 / f_r);
            let end = integrate_constant(&p, current, t_end, p.tau_p / 10.0);
            let rel_n =
                (end.carrier_density - oracle.carrier_density).abs() / oracle.carrier_density;
            let rel_s = (end.photon_density - oracle.photon_density).abs() / oracle.photon_density;
            worst = worst.max(rel_n).max(rel_s);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "01 steady-state oracle equivalence",
        worst <= 1e-3 && elapsed < 30.0,
        &format!("worst rel err {worst:.2e}, {elapsed:.1} s"),
    );
}

#[test]
fn criterion_02_rk4_convergence_order() {
    let start = Instant::now();
    let p = LaserParams::default();
    let current = 2.0 * threshold_current(&p);
    let t_end = 5e-9;
    let reference = integrate_constant(&p, current, t_end, p.tau_p / 1000.0);
    let err = |dt: f64| -> f64 {
        let end = integrate_constant(&p, current, t_end, dt);
        let en = (end.carrier_density - reference.carrier_density) / reference.carrier_density;
        let es = (end.photon_density - reference.photon_density) / reference.photon_density;
        (en * en + es * es).sqrt()
    };
    let ratio = err(p.tau_p / 10.0) / err(p.tau_p / 20.0);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "02 RK4 convergence order",
        (12.0..=20.0).contains(&ratio) && elapsed < 10.0,
        &format!("halving-dt error ratio {ratio:.2}, {elapsed:.1} s"),
    );
}

#[test]
fn criterion_03_threshold_consistency() {
    let start = Instant::now();
    let p = LaserParams::default();
    let i_th = threshold_current(&p);
    let currents = linspace(0.0, 2.0 * i_th, 100);
    let s_bar: Vec<f64> =
        currents.iter().map(|&i| steady_state(&p, i).unwrap().photon_density).collect();
    let mut knee = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 1..s_bar.len() - 1 {
        let d2 = s_bar[i + 1] - 2.0 * s_bar[i] + s_bar[i - 1];
        if d2 > best {
            best = d2;
            knee = i;
        }
    }
    let rel = (currents[knee] - i_th).abs() / i_th;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "03 threshold consistency",
        rel <= 0.05 && elapsed < 10.0,
        &format!("L-I knee at {:.4} mA vs closed form {:.4} mA ({:.2}%), {elapsed:.1} s",
            currents[knee] * 1e3, i_th * 1e3, rel * 100.0),
    );
}

#[test]
fn criterion_04_relaxation_oscillation_check() {
    use rustfft::{num_complex::Complex, FftPlanner};
    let start = Instant::now();
    let p = LaserParams::default();
    let i_th = threshold_current(&p);
    let current = 2.0 * i_th;
    let dt = p.tau_p / 10.0;
    let n = 1 << 16; // 65536 samples of 0.2 ps = 13.1 ns
    let mut state = steady_state(&p, 1.5 * i_th).unwrap();
    let mut signal = Vec::with_capacity(n);
    for k in 0..n {
        state = rk4_step(&state, |_| current, k as f64 * dt, dt, &p).unwrap();
        signal.push(state.photon_density);
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> =
        signal.iter().map(|&s| Complex::new(s - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = (1..n / 2)
        .max_by(|&a, &b| buf[a].norm_sqr().total_cmp(&buf[b].norm_sqr()))
        .unwrap();
    let f_peak = peak as f64 / (n as f64 * dt);
    let f_r = relaxation_frequency(&p, current).unwrap();
    let rel = (f_peak - f_r).abs() / f_r;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "04 relaxation-oscillation check",
        rel <= 0.10 && elapsed < 10.0,
        &format!("FFT peak {:.3} GHz vs estimate {:.3} GHz ({:.2}%), {elapsed:.1} s",
            f_peak / 1e9, f_r / 1e9, rel * 100.0),
    );
}

#[test]
fn criterion_05_contrast_law_suite() {
    // worked value, exact
    let exact = contrast_from_il(0.5, 3.0).unwrap() == 4.0;

    // inverse round trip over the stated grid
    let mut worst_rt = 0.0f64;
    for cr in [1.5, 2.0, 5.0, 10.0] {
        for k in [1.5, 2.0, 3.0, 5.0] {
            let il = il_from_cr(cr, k).unwrap();
            let back = contrast_from_il(il, k).unwrap();
            worst_rt = worst_rt.max((back - cr).abs() / cr);
        }
    }

    // monotonicity in IL and K, 1000 random cases
    let mut rng = StdRng::seed_from_u64(5);
    let mut monotone = true;
    for _ in 0..1000 {
        let il_a: f64 = rng.gen_range(0.0..0.9);
        let il_b = il_a + rng.gen_range(1e-4..0.0999);
        let k_a: f64 = rng.gen_range(1.01..8.0);
        let k_b = k_a + rng.gen_range(1e-3..2.0);
        let base = contrast_from_il(il_a, k_a).unwrap();
        monotone &= contrast_from_il(il_b, k_a).unwrap() > base;
        monotone &= contrast_from_il(il_a, k_b).unwrap() > base;
    }
    report(
        "05 contrast/insertion-loss law suite",
        exact && worst_rt <= 1e-12 && monotone,
        &format!("worked value exact, round-trip {worst_rt:.1e}, monotone over 1000 cases"),
    );
}

#[test]
fn criterion_06_static_power_law_suite() {
    let m = ModulatorParams {
        responsivity: 0.5,
        v_bias: 1.0,
        v_dd: 0.8,
        input_power: 1.0,
        ..ModulatorParams::default()
    };
    let (eta, _) = mod_efficiency(0.2, 4.0, &m);
    let worked = (eta - 0.21).abs() <= 1e-12;

    // CR = 1 collapse
    let il = 0.4;
    let (eta_cr1, _) = mod_efficiency(il, 1.0, &m);
    let collapse1 =
        (eta_cr1 - 0.5 * m.responsivity * il * (2.0 * m.v_bias - m.v_dd)).abs() <= 1e-9;

    // CR -> infinity collapse at IL = 0
    let (eta_inf, _) = mod_efficiency(0.0, 1e15, &m);
    let collapse_inf = (eta_inf - 0.5 * m.responsivity * m.v_bias).abs() <= 1e-9;

    report(
        "06 static-power law suite",
        worked && collapse1 && collapse_inf,
        &format!("worked eta {eta:.12}, collapses within 1e-9"),
    );
}

#[test]
fn criterion_07_table_closed_form_agreement() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let alpha_min = rng.gen_range(1e4..1e5);
        let k = rng.gen_range(1.0..30.0);
        let alpha_max = alpha_min * k;
        let mid = alpha_min + (alpha_max - alpha_min) * rng.gen_range(0.05..0.95);
        let length = rng.gen_range(0.5e-6..5e-6);
        let table = AbsorptionModel::new(
            vec![(0.0, alpha_min), (rng.gen_range(0.5..3.5), mid), (4.0, alpha_max)],
            length,
        )
        .unwrap();
        let r_on = reflectivity(0.0, &table);
        let r_off = reflectivity(4.0, &table);
        let cr_table = r_on / r_off;
        let cr_law = contrast_from_il(1.0 - r_on, table.alpha_ratio()).unwrap();
        worst = worst.max((cr_table - cr_law).abs() / cr_law);
    }
    report(
        "07 table/closed-form agreement",
        worst <= 1e-9,
        &format!("worst rel deviation {worst:.2e} over 100 random tables"),
    );
}

#[test]
fn criterion_08_passivity_and_positivity() {
    let start = Instant::now();
    let mut cfg = Config::parse("").unwrap();
    // one million integration steps of the PRBS-driven link
    cfg.sim.t_end_s = 200e-9;
    cfg.sim.transient_skip_s = 0.0;
    cfg.sim.dt_s = 2e-13;
    let scn = cfg.scenario().unwrap();
    let steps = (scn.sim.t_end / scn.sim.dt).round() as u64;
    let trace = scn.run().expect("run must complete without positivity errors");
    let clean = trace.carrier_density.iter().all(|&n| n >= 0.0)
        && trace.photon_density.iter().all(|&s| s >= 0.0)
        && trace.laser_power.iter().all(|&p| p >= 0.0)
        && trace
            .output_power
            .iter()
            .zip(&trace.laser_power)
            .all(|(o, l)| *o >= 0.0 && o <= l);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "08 passivity and positivity",
        clean && steps >= 1_000_000,
        &format!("{steps} PRBS-driven steps, output <= input everywhere, {elapsed:.1} s"),
    );
}

/// Independent re-scan of a sweep CSV: parse the rows and redo the feasible
/// argmin with the documented tie-break.
fn rescan_sweep_csv(text: &str) -> Option<usize> {
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("index,") || line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let idx: usize = cols[0].parse().unwrap();
        let bias: f64 = cols[1].parse().unwrap();
        let il: f64 = cols[2].parse().unwrap();
        let total: f64 = cols[11].parse().unwrap();
        let error_free = cols[17] == "1";
        let failed = cols[18] == "1";
        if failed || !error_free || total.is_nan() {
            continue;
        }
        let key = (total, il, bias);
        let replace = match &best {
            None => true,
            Some((_, t, i, b)) => key < (*t, *i, *b),
        };
        if replace {
            best = Some((idx, total, il, bias));
        }
    }
    best.map(|(idx, ..)| idx)
}

#[test]
fn criterion_09_optimizer_oracle() {
    let start = Instant::now();
    let cfg = Config::parse("").unwrap();
    let rate = 4e9;
    let bounds = cfg.optimize_bounds().unwrap();
    let evaluator = cfg.evaluator().unwrap();

    let (best_point, best_power) = minimize_power(
        rate,
        &bounds,
        cfg.modulator.k_ratio,
        cfg.modulator.v_bias_v,
        cfg.modulator.v_dd_v,
        cfg.metrics.decision_q,
        |p| evaluator.evaluate(p),
    )
    .unwrap();

    // exhaustive 201x201 scan over the same bounds
    let scan_axes = SweepAxes {
        bias: linspace(bounds.bias.0, bounds.bias.1, 201),
        il: linspace(bounds.il.0, bounds.il.1, 201),
        v_bias: vec![cfg.modulator.v_bias_v],
        v_dd: vec![cfg.modulator.v_dd_v],
    };
    let scan = grid_sweep(&scan_axes, cfg.modulator.k_ratio, rate, cfg.metrics.decision_q, |p| {
        evaluator.evaluate(p)
    })
    .unwrap();
    let scan_best = &scan.points[scan.best.expect("scan has feasible points")];
    let cell_il = (bounds.il.1 - bounds.il.0) / 200.0;
    let cell_bias = (bounds.bias.1 - bounds.bias.0) / 200.0;
    let within_cell = (best_point.il - scan_best.point.il).abs() <= cell_il * (1.0 + 1e-9)
        && (best_point.bias_current - scan_best.point.bias_current).abs()
            <= cell_bias * (1.0 + 1e-9);
    let sound = best_power.total <= scan_best.total_power() * (1.0 + 1e-12);

    // grid_sweep's best must equal an independent re-scan of its own CSV
    let sweep = grid_sweep(
        &cfg.sweep_axes(),
        cfg.modulator.k_ratio,
        rate,
        cfg.metrics.decision_q,
        |p| evaluator.evaluate(p),
    )
    .unwrap();
    let mut csv = Vec::new();
    write_sweep_csv(&sweep, &cfg.echo(), &mut csv).unwrap();
    let rescan = rescan_sweep_csv(&String::from_utf8(csv).unwrap());
    let csv_matches = rescan == sweep.best && sweep.best.is_some();

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "09 optimizer oracle",
        within_cell && sound && csv_matches && elapsed < 300.0,
        &format!(
            "refined (il {:.4}, bias {:.4e}) vs scan (il {:.4}, bias {:.4e}), csv re-scan {:?} == best {:?}, {elapsed:.1} s",
            best_point.il,
            best_point.bias_current,
            scan_best.point.il,
            scan_best.point.bias_current,
            rescan,
            sweep.best
        ),
    );
}

#[test]
fn criterion_10_trend_reproduction() {
    let start = Instant::now();
    let cfg = Config::parse("").unwrap();
    let scn = cfg.scenario().unwrap();
    let rates: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0].map(|g| g * 1e9).to_vec();

    let mut heights = Vec::new();
    for &rate in &rates {
        let trace = scn.with_bit_rate(rate).unwrap().run().unwrap();
        let m = eye_metrics(&fold_eye(&trace, rate).unwrap(), cfg.metrics.decision_q).unwrap();
        heights.push(m.eye_height);
    }
    let non_increasing =
        heights.windows(2).all(|w| w[1] <= w[0] * 1.01);

    let cutoff = max_error_free_bitrate(&scn, &rates, cfg.metrics.decision_q).unwrap();
    let inside = matches!(cutoff, Some(c) if c > 1e9 && c < 20e9);
    // artifact golden value, pinned on the shipped defaults (synthetic
    // table, 45 ps drive edges); a property of this configuration only
    let golden = cutoff == Some(16e9);

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "10 trend reproduction",
        non_increasing && inside && golden,
        &format!(
            "eye heights (uW) {:?} non-increasing, cutoff {:?} Gbit/s strictly inside (1, 20), {elapsed:.1} s",
            heights.iter().map(|h| (h * 1e6 * 100.0).round() / 100.0).collect::<Vec<_>>(),
            cutoff.map(|c| c / 1e9)
        ),
    );
}

#[test]
fn criterion_11_cli_reproducibility() {
    use std::fs;
    use std::process::Command;

    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_mqwtx");
    let dir = std::env::temp_dir().join(format!("mqwtx-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();

    let fast_link = "[drive.laser]\nkind = constant\nlevel_a = 1.4e-3\n\
         [sim]\nsource = constant_master\nt_end_s = 8e-9\ndt_s = 5e-13\n";
    let laser_cfg = "[sim]\nt_end_s = 2e-9\ntransient_skip_s = 0\n\
         [drive.laser]\nkind = constant\nlevel_a = 1.4e-3\n";
    let sweep_cfg = "[sim]\nsource = constant_master\n\
         [sweep]\nbias_a = 1.0e-3,1.4e-3\nil = 0.1,0.2\n";
    let cfg_link = dir.join("link.ini");
    let cfg_laser = dir.join("laser.ini");
    let cfg_sweep = dir.join("sweep.ini");
    fs::write(&cfg_link, fast_link).unwrap();
    fs::write(&cfg_laser, laser_cfg).unwrap();
    fs::write(&cfg_sweep, sweep_cfg).unwrap();

    let runs: Vec<(&str, Vec<String>)> = vec![
        ("laser-sim", vec!["--config".into(), cfg_laser.display().to_string()]),
        ("link-sim", vec!["--config".into(), cfg_link.display().to_string()]),
        (
            "eye",
            vec!["--config".into(), cfg_link.display().to_string(), "--bitrate".into(), "10".into()],
        ),
        ("sweep", vec!["--config".into(), cfg_sweep.display().to_string()]),
        (
            "optimize",
            vec!["--config".into(), cfg_sweep.display().to_string(), "--bitrate".into(), "4".into()],
        ),
    ];

    let mut identical = true;
    for (cmd, args) in &runs {
        let mut outputs = Vec::new();
        for pass in 0..2 {
            let out_path = dir.join(format!("{cmd}-{pass}.csv"));
            let status = Command::new(bin)
                .arg(cmd)
                .args(args)
                .args(["--out", &out_path.display().to_string(), "--quiet"])
                .status()
                .unwrap();
            assert!(status.success(), "{cmd} failed");
            outputs.push(fs::read(&out_path).unwrap());
        }
        identical &= outputs[0] == outputs[1];
    }

    // max-bitrate writes no file; its stdout must be identical across runs
    let mut stdouts = Vec::new();
    for _ in 0..2 {
        let out = Command::new(bin)
            .args([
                "max-bitrate",
                "--config",
                &cfg_link.display().to_string(),
                "--rates",
                "1,2,4",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        stdouts.push(out.stdout);
    }
    identical &= stdouts[0] == stdouts[1];

    fs::remove_dir_all(&dir).ok();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "11 reproducibility",
        identical,
        &format!("6 commands rerun byte-identically, {elapsed:.1} s"),
    );
}
