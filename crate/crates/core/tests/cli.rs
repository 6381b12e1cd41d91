//! CLI surface checks: subcommand names, exit codes, flags, file schemas.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use mqwtx::config::Config;
use mqwtx::output::extract_echoed_config;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mqwtx")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("mqwtx-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        fs::remove_dir_all(&self.0).ok();
    }
}

const FAST_MASTER: &str = "[sim]\nsource = constant_master\nt_end_s = 8e-9\ndt_s = 5e-13\n";

#[test]
fn unknown_flag_and_bad_config_exit_2() {
    let out = Command::new(bin()).args(["laser-sim", "--nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let t = TempDir::new("badcfg");
    let cfg = t.path("bad.ini");
    fs::write(&cfg, "[laser]\ntau_p_s = -1e-12\n").unwrap();
    let out = Command::new(bin())
        .args(["laser-sim", "--config", &cfg.display().to_string(), "--out"])
        .arg(t.path("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tau_p_s"), "stderr: {err}");

    let cfg2 = t.path("unknown.ini");
    fs::write(&cfg2, "[laser]\ntau_z_s = 1e-12\n").unwrap();
    let out = Command::new(bin())
        .args(["laser-sim", "--config", &cfg2.display().to_string(), "--out"])
        .arg(t.path("y.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulation_failure_exits_3() {
    // a drive that extracts carriers drives N negative mid-run
    let t = TempDir::new("simfail");
    let cfg = t.path("drain.ini");
    fs::write(
        &cfg,
        "[drive.laser]\nkind = pulse\nbase_a = 1.5e-3\namplitude_a = -3e-3\n\
         t_start_s = 1e-9\nwidth_s = 2e-9\n\
         [sim]\nt_end_s = 4e-9\ntransient_skip_s = 0\n",
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["laser-sim", "--config", &cfg.display().to_string(), "--out"])
        .arg(t.path("drain.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative"));
}

#[test]
fn infeasible_optimization_exits_4() {
    let t = TempDir::new("infeasible");
    let cfg = t.path("hard.ini");
    fs::write(
        &cfg,
        format!("{FAST_MASTER}[metrics]\ndecision_q = 1e9\n[sweep]\nbias_a = 1e-3,2e-3\nil = 0.1,0.3\n"),
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["optimize", "--config", &cfg.display().to_string(), "--bitrate", "4", "--out"])
        .arg(t.path("opt.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn eye_csv_schema_and_summary_block() {
    let t = TempDir::new("eye");
    let cfg = t.path("eye.ini");
    fs::write(&cfg, FAST_MASTER).unwrap();
    let out_path = t.path("eye.csv");
    let out = Command::new(bin())
        .args(["eye", "--config", &cfg.display().to_string(), "--bitrate", "10", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("ui_fraction,power_w"));
    assert!(text.contains("# q_factor = "));
    assert!(text.contains("# eye_height_w = "));
    // data rows span the folded two-UI window
    let first_data = text
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("ui_fraction"))
        .unwrap();
    let ui_frac: f64 = first_data.split(',').next().unwrap().parse().unwrap();
    assert!((0.0..2.0).contains(&ui_frac));
}

#[test]
fn echoed_header_reparses_to_the_same_config() {
    let t = TempDir::new("echo");
    let cfg_path = t.path("run.ini");
    fs::write(&cfg_path, "[drive.modulator]\nkind = prbs_nrz\nbit_rate_bps = 5e9\nseed = 33\n")
        .unwrap();
    let out_path = t.path("run.csv");
    let status = Command::new(bin())
        .args(["link-sim", "--config", &cfg_path.display().to_string(), "--quiet", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out_path).unwrap();
    let echoed = extract_echoed_config(&text).unwrap();
    let reparsed = Config::parse(&echoed).unwrap();
    assert_eq!(reparsed.echo(), echoed);
    assert_eq!(reparsed.drive_modulator.seed, 33);
    assert_eq!(reparsed.drive_modulator.bit_rate_bps, 5e9);
}

#[test]
fn seed_flag_overrides_prbs_and_shows_in_echo() {
    let t = TempDir::new("seed");
    let cfg = t.path("seed.ini");
    fs::write(&cfg, FAST_MASTER).unwrap();
    let out_a = t.path("a.csv");
    let out_b = t.path("b.csv");
    for (path, seed) in [(&out_a, "1"), (&out_b, "99")] {
        let status = Command::new(bin())
            .args(["link-sim", "--config", &cfg.display().to_string(), "--seed", seed, "--quiet", "--out"])
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read_to_string(&out_a).unwrap();
    let b = fs::read_to_string(&out_b).unwrap();
    assert_ne!(a, b, "different seeds must change the PRBS data");
    let echoed = extract_echoed_config(&b).unwrap();
    assert!(echoed.contains("seed = 99"));
}

#[test]
fn plot_flag_emits_gnuplot_script_and_quiet_silences_stdout() {
    let t = TempDir::new("plot");
    let cfg = t.path("p.ini");
    fs::write(&cfg, FAST_MASTER).unwrap();
    let out_path = t.path("p.csv");
    let out = Command::new(bin())
        .args(["link-sim", "--config", &cfg.display().to_string(), "--plot", "--quiet", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "quiet run must not print a summary");
    let script = fs::read_to_string(t.path("p.csv.gp")).unwrap();
    assert!(script.contains("using 1:7"));
    assert!(script.contains("p.csv"));
}

#[test]
fn sweep_csv_has_best_footer_and_eye_column() {
    let t = TempDir::new("sweep");
    let cfg = t.path("s.ini");
    fs::write(
        &cfg,
        format!("{FAST_MASTER}[sweep]\nbias_a = 1.0e-3,1.4e-3\nil = 0.1,0.2\n"),
    )
    .unwrap();
    let out_path = t.path("s.csv");
    let status = Command::new(bin())
        .args(["sweep", "--config", &cfg.display().to_string(), "--quiet", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("# best: index="));
    let header = text.lines().find(|l| l.starts_with("index,")).unwrap();
    assert!(header.contains("eye_height_w"));
    assert!(header.contains("total_w"));
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("index,"))
        .count();
    assert_eq!(rows, 4);
}

#[test]
fn max_bitrate_reports_a_rate_or_none() {
    let t = TempDir::new("maxrate");
    let cfg = t.path("m.ini");
    fs::write(&cfg, FAST_MASTER).unwrap();
    let out = Command::new(bin())
        .args(["max-bitrate", "--config", &cfg.display().to_string(), "--rates", "1,2,4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max_error_free_bitrate_gbps = 4"), "stdout: {stdout}");

    // unsorted rate list is a config error
    let out = Command::new(bin())
        .args(["max-bitrate", "--config", &cfg.display().to_string(), "--rates", "4,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_rate_list_emits_power_curve() {
    let t = TempDir::new("curve");
    let cfg = t.path("c.ini");
    fs::write(
        &cfg,
        format!("{FAST_MASTER}[sweep]\nbias_a = 1.0e-3,1.4e-3\nil = 0.1,0.3\n"),
    )
    .unwrap();
    let out_path = t.path("curve.csv");
    let status = Command::new(bin())
        .args(["optimize", "--config", &cfg.display().to_string(), "--bitrate", "1,4,8", "--quiet", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("bit_rate_bps,feasible"));
    let totals: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("bit_rate_bps"))
        .map(|l| l.split(',').next_back().unwrap().parse().unwrap())
        .collect();
    assert_eq!(totals.len(), 3);
    // dynamic term grows with rate
    assert!(totals.windows(2).all(|w| w[1] > w[0]));
}
