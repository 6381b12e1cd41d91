//! CSV emission and gnuplot-script generation.
//!
//! All numbers go out with 17 significant digits so golden files are
//! bit-exact and reparse to the same doubles; decimal separator is always
//! `.` regardless of locale because formatting never consults one.

use std::io::Write;

use crate::error::Result;
use crate::metrics::{EyeAccumulation, EyeMetrics};
use crate::optimizer::SweepResult;
use crate::sim::Trace;

/// 17-significant-digit scientific form; round-trip exact for f64.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

struct CountingWriter<W: Write> {
    inner: W,
    count: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.count += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

const CONFIG_BLOCK_BEGIN: &str = "# mqwtx config";
const CONFIG_BLOCK_END: &str = "# end config";

fn write_config_block<W: Write>(w: &mut W, config_echo: &str) -> std::io::Result<()> {
    writeln!(w, "{CONFIG_BLOCK_BEGIN}")?;
    for line in config_echo.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{CONFIG_BLOCK_END}")
}

/// Recovers the config text embedded in an output file's comment header.
pub fn extract_echoed_config(file_text: &str) -> Option<String> {
    let mut out = String::new();
    let mut inside = false;
    for line in file_text.lines() {
        if line == CONFIG_BLOCK_BEGIN {
            inside = true;
            continue;
        }
        if line == CONFIG_BLOCK_END {
            return Some(out);
        }
        if inside {
            out.push_str(line.strip_prefix("# ").unwrap_or(line));
            out.push('\n');
        }
    }
    None
}

/// Writes the trace CSV (head comment block, header row, one row per
/// sample) and returns the byte count.
pub fn write_trace_csv<W: Write>(trace: &Trace, config_echo: &str, writer: W) -> Result<u64> {
    let mut w = CountingWriter { inner: writer, count: 0 };
    write_config_block(&mut w, config_echo)?;
    writeln!(
        w,
        "time_s,carrier_density_m3,photon_density_m3,phase_rad,laser_power_w,mod_drive_v,output_power_w"
    )?;
    for i in 0..trace.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            format_g17(trace.time_at(i)),
            format_g17(trace.carrier_density[i]),
            format_g17(trace.photon_density[i]),
            format_g17(trace.phase[i]),
            format_g17(trace.laser_power[i]),
            format_g17(trace.modulator_drive[i]),
            format_g17(trace.output_power[i]),
        )?;
    }
    w.flush()?;
    Ok(w.count)
}

/// Folded-eye CSV plus a trailing metrics summary block.
pub fn write_eye_csv<W: Write>(
    eye: &EyeAccumulation,
    metrics: &EyeMetrics,
    config_echo: &str,
    writer: W,
) -> Result<u64> {
    let mut w = CountingWriter { inner: writer, count: 0 };
    write_config_block(&mut w, config_echo)?;
    writeln!(w, "ui_fraction,power_w")?;
    for p in &eye.points {
        writeln!(w, "{},{}", format_g17(p.ui_fraction), format_g17(p.power))?;
    }
    writeln!(w, "# eye_height_w = {}", format_g17(metrics.eye_height))?;
    writeln!(w, "# eye_width_s = {}", format_g17(metrics.eye_width))?;
    writeln!(w, "# level_one_mean_w = {}", format_g17(metrics.level_one_mean))?;
    writeln!(w, "# level_zero_mean_w = {}", format_g17(metrics.level_zero_mean))?;
    writeln!(w, "# level_one_std_w = {}", format_g17(metrics.level_one_std))?;
    writeln!(w, "# level_zero_std_w = {}", format_g17(metrics.level_zero_std))?;
    writeln!(w, "# q_factor = {}", format_g17(metrics.q_factor))?;
    writeln!(w, "# extinction_ratio = {}", format_g17(metrics.extinction_ratio))?;
    writeln!(w, "# ber_estimate = {}", format_g17(metrics.ber_estimate))?;
    writeln!(w, "# error_free = {}", u8::from(metrics.error_free))?;
    w.flush()?;
    Ok(w.count)
}

/// One row per evaluated sweep point plus a `# best:` footer.
pub fn write_sweep_csv<W: Write>(
    result: &SweepResult,
    config_echo: &str,
    writer: W,
) -> Result<u64> {
    let mut w = CountingWriter { inner: writer, count: 0 };
    write_config_block(&mut w, config_echo)?;
    writeln!(
        w,
        "index,bias_a,il,cr,v_bias_v,v_dd_v,bit_rate_bps,eta_mod,static_w,dynamic_w,laser_wall_w,total_w,eye_height_w,eye_width_s,q_factor,extinction_ratio,ber_estimate,error_free,failed"
    )?;
    for (i, p) in result.points.iter().enumerate() {
        let pt = &p.point;
        let g = format_g17;
        let nan = format_g17(f64::NAN);
        let (eta, st, dy, wall, total) = match &p.power {
            Some(b) => (g(b.eta_mod), g(b.static_power), g(b.dynamic_power), g(b.laser_wall_power), g(b.total)),
            None => (nan.clone(), nan.clone(), nan.clone(), nan.clone(), nan.clone()),
        };
        let (eh, ew, q, er, ber, ef) = match &p.eye {
            Some(e) => (
                g(e.eye_height),
                g(e.eye_width),
                g(e.q_factor),
                g(e.extinction_ratio),
                g(e.ber_estimate),
                u8::from(e.error_free).to_string(),
            ),
            None => (nan.clone(), nan.clone(), nan.clone(), nan.clone(), nan.clone(), "0".into()),
        };
        writeln!(
            w,
            "{i},{},{},{},{},{},{},{eta},{st},{dy},{wall},{total},{eh},{ew},{q},{er},{ber},{ef},{}",
            g(pt.bias_current),
            g(pt.il),
            g(pt.cr),
            g(pt.v_bias),
            g(pt.v_dd),
            g(pt.bit_rate),
            u8::from(p.error.is_some()),
        )?;
    }
    writeln!(w, "# feasibility: {}", result.feasibility_rule)?;
    match result.best {
        Some(i) => {
            let b = &result.points[i];
            writeln!(
                w,
                "# best: index={i} bias_a={} il={} total_w={}",
                format_g17(b.point.bias_current),
                format_g17(b.point.il),
                format_g17(b.total_power()),
            )?;
        }
        None => writeln!(w, "# best: none")?,
    }
    w.flush()?;
    Ok(w.count)
}

/// Minimum-power-versus-rate rows; infeasible rates carry nan columns.
pub fn write_min_power_csv<W: Write>(
    rows: &[crate::optimizer::MinPowerRow],
    config_echo: &str,
    writer: W,
) -> Result<u64> {
    let mut w = CountingWriter { inner: writer, count: 0 };
    write_config_block(&mut w, config_echo)?;
    writeln!(w, "bit_rate_bps,feasible,bias_a,il,cr,static_w,dynamic_w,laser_wall_w,total_w")?;
    let g = format_g17;
    for (rate, row) in rows {
        match row {
            Some((pt, b)) => writeln!(
                w,
                "{},1,{},{},{},{},{},{},{}",
                g(*rate),
                g(pt.bias_current),
                g(pt.il),
                g(pt.cr),
                g(b.static_power),
                g(b.dynamic_power),
                g(b.laser_wall_power),
                g(b.total),
            )?,
            None => {
                let nan = g(f64::NAN);
                writeln!(w, "{},0,{nan},{nan},{nan},{nan},{nan},{nan},{nan}", g(*rate))?
            }
        }
    }
    w.flush()?;
    Ok(w.count)
}

/// Figure families the emitted scripts can draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    PhotonDensity,
    OutputPower,
    Eye,
    MinPowerCurve,
}

impl PlotKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "photon_density" => PlotKind::PhotonDensity,
            "output_power" => PlotKind::OutputPower,
            "eye" => PlotKind::Eye,
            "min_power_curve" => PlotKind::MinPowerCurve,
            other => {
                return Err(crate::error::Error::config(format!("unknown plot kind `{other}`")))
            }
        })
    }
}

/// Emits a self-contained gnuplot script that reads `csv_path` (relative
/// path preserved); no plotting library is linked into the tool.
pub fn emit_gnuplot(csv_path: &str, kind: PlotKind) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set terminal pngcairo size 1000,640\n");
    s.push_str(&format!("set output '{csv_path}.png'\n"));
    s.push_str("set grid\n");
    match kind {
        PlotKind::PhotonDensity => {
            s.push_str("set xlabel 'time (s)'\nset ylabel 'photon density (m^-3)'\n");
            s.push_str(&format!(
                "plot '{csv_path}' using 1:3 with lines title 'photon density'\n"
            ));
        }
        PlotKind::OutputPower => {
            s.push_str("set xlabel 'time (s)'\nset ylabel 'output power (W)'\n");
            s.push_str(&format!(
                "plot '{csv_path}' using 1:7 with lines title 'modulator output'\n"
            ));
        }
        PlotKind::Eye => {
            s.push_str("set xlabel 'position (UI)'\nset ylabel 'power (W)'\n");
            s.push_str(&format!("plot '{csv_path}' using 1:2 with dots notitle\n"));
        }
        PlotKind::MinPowerCurve => {
            s.push_str("set xlabel 'bit rate (bit/s)'\nset ylabel 'minimum power (W)'\n");
            s.push_str("set logscale x\n");
            s.push_str(&format!(
                "plot '{csv_path}' using 1:9 with linespoints title 'minimum transmitter power'\n"
            ));
        }
    }
    s
}
