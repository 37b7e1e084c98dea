use anyhow::{bail, Context, Result};
use log::info;
use losmimo::channel::UlaChannelSpec;
use losmimo::experiments::{
    bound_sweep_table, default_eta_grid, eta_sweep_envelope, eta_sweep_table, format_sig, polarization,
    polarization_histogram, run_bound_sweep, run_eta_sweep, run_surrogate_scaling, run_table1,
    run_three_spacing, surrogate_table, table1_table, three_spacing_table, Table, Table1Options,
};
use losmimo::planner::{geometric_plan, RadialPlan};
use losmimo::transceiver::{
    build_transceiver, dense_receive, fast_receive, mrc_best_streams, mrc_spectral_efficiency,
    transceiver_from_spec, MrcOptions, TransceiverMatrices,
};
use losmimo::units::{db_to_linear, linear_to_db};
use losmimo::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{CommandKind, ExperimentConfig, GeometrySource, SnrGrid};

pub enum Report {
    Table(Table),
    /// Machine-readable record plus a table for humans.
    Plan { json: String, summary: String },
}

pub fn run(kind: CommandKind, cfg: &ExperimentConfig) -> Result<Report> {
    match kind {
        CommandKind::BoundSweep => bound_sweep(cfg),
        CommandKind::EtaSweep => eta_sweep(cfg),
        CommandKind::Plan => plan(cfg),
        CommandKind::Transceive => transceive(cfg),
        CommandKind::Table1 => table1(cfg),
        CommandKind::Polarization => eigen_polarization(cfg),
        CommandKind::SurrogateScaling => surrogate_scaling(cfg),
        CommandKind::ThreeSpacing => three_spacing(cfg),
    }
}

fn bound_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let (n_tx, n_rx) = cfg.counts(16);
    let snrs = cfg.snr_points(SnrGrid::new(-20.0, 30.0, 1.0))?;
    let rows = run_bound_sweep(n_tx, n_rx, &snrs)?;
    Ok(Report::Table(bound_sweep_table(&rows)))
}

fn eta_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let (n_tx, n_rx) = cfg.counts(64);
    let snrs = cfg.snr_points(SnrGrid::new(-20.0, 20.0, 5.0))?;
    let etas = match &cfg.etas {
        Some(e) if e.is_empty() => bail!("eta list is empty"),
        Some(e) => e.clone(),
        None => default_eta_grid(n_tx.min(n_rx), cfg.eta_points.unwrap_or(16)),
    };
    let mut rows = run_eta_sweep(n_tx, n_rx, &etas, &snrs)?;
    if cfg.envelope.unwrap_or(false) {
        rows = eta_sweep_envelope(&rows);
    }
    Ok(Report::Table(eta_sweep_table(&rows)))
}

#[derive(Serialize)]
struct PlanRecord<'a> {
    ratio: f64,
    count: usize,
    n_tx: usize,
    n_rx: usize,
    etas: &'a [f64],
    angles_deg: Vec<f64>,
    snr_thresholds_db: Vec<f64>,
    snr_min_db: Option<f64>,
    guarantee: f64,
    guaranteed_floor_db: f64,
}

fn plan_summary(plan: &RadialPlan) -> String {
    let mut s = format!(
        "{:>3}  {:>10}  {:>10}  {:>14}  {:>14}\n",
        "ula", "eta", "angle_deg", "from_snr_db", "to_snr_db"
    );
    for i in 0..plan.count {
        let from = plan.snr_thresholds.get(i).map(|&t| format!("{:.2}", linear_to_db(t)));
        let to = i.checked_sub(1).map(|j| format!("{:.2}", linear_to_db(plan.snr_thresholds[j])));
        s.push_str(&format!(
            "{:>3}  {:>10.6}  {:>10.3}  {:>14}  {:>14}\n",
            i,
            plan.etas[i],
            plan.angles[i].to_degrees(),
            from.unwrap_or_else(|| "-inf".into()),
            to.unwrap_or_else(|| "+inf".into()),
        ));
    }
    s.push_str(&format!(
        "guarantee {:.6}, holds above {:.2} dB\n",
        plan.guarantee,
        linear_to_db(plan.guaranteed_floor)
    ));
    s
}

fn plan(cfg: &ExperimentConfig) -> Result<Report> {
    let (n_tx, n_rx) = cfg.counts(256);
    let ratio = cfg.ratio.unwrap_or(0.48);
    let plan = geometric_plan(ratio, n_tx, n_rx, cfg.snr_min_db.map(db_to_linear))?;
    let record = PlanRecord {
        ratio: plan.ratio,
        count: plan.count,
        n_tx,
        n_rx,
        etas: &plan.etas,
        angles_deg: plan.angles.iter().map(|a| a.to_degrees()).collect(),
        snr_thresholds_db: plan.snr_thresholds.iter().map(|&t| linear_to_db(t)).collect(),
        snr_min_db: cfg.snr_min_db,
        guarantee: plan.guarantee,
        guaranteed_floor_db: linear_to_db(plan.guaranteed_floor),
    };
    let mut json = serde_json::to_string_pretty(&record)?;
    json.push('\n');
    Ok(Report::Plan { json, summary: plan_summary(&plan) })
}

fn transceiver(cfg: &ExperimentConfig) -> Result<TransceiverMatrices> {
    let model = cfg.model.unwrap_or_default();
    match cfg.geometry {
        Some(GeometrySource::Physical(g)) => Ok(build_transceiver(&g, model)?),
        Some(GeometrySource::Shorthand { n_tx, n_rx, eta }) => {
            Ok(transceiver_from_spec(&UlaChannelSpec::new(eta, n_tx, n_rx)?)?)
        }
        None => bail!("transceive needs a geometry (--geometry <file> or a [geometry] table)"),
    }
}

/// Compares the FFT receive path with the dense product on a seeded random observation.
fn check_fast_path(tm: &TransceiverMatrices, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<Complex64> =
        (0..tm.n_rx()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let fast = fast_receive(tm, &y)?;
    let dense = dense_receive(tm, &y)?;
    let scale = dense.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    Ok(fast.iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
}

fn transceive(cfg: &ExperimentConfig) -> Result<Report> {
    let snr_db = cfg.snr_db.context("transceive needs --snr-db")?;
    let snr = db_to_linear(snr_db);
    let tm = transceiver(cfg)?;
    let interference = cfg.interference.unwrap_or_default();
    let rate = if cfg.sweep_streams.unwrap_or(false) {
        if cfg.streams.is_some() {
            bail!("--streams and --sweep-streams are mutually exclusive");
        }
        mrc_best_streams(&tm, snr, interference)?
    } else {
        mrc_spectral_efficiency(&tm, snr, MrcOptions { streams: cfg.streams, interference })?
    };
    info!(
        "eta {:.6}, {} streams, sum rate {:.6} bits/s/Hz at {snr_db} dB",
        tm.eta, rate.streams, rate.rate_bits
    );
    if let Some(seed) = cfg.seed {
        info!("fast receive vs dense, max relative deviation {:.3e}", check_fast_path(&tm, seed)?);
    }
    let mut t = Table { header: vec!["stream".into(), "sinr_db".into(), "rate_bits".into()], rows: Vec::new() };
    for (k, &sinr) in rate.per_stream_sinr.iter().enumerate() {
        t.rows.push(vec![k.to_string(), format_sig(linear_to_db(sinr)), format_sig(sinr.ln_1p() / std::f64::consts::LN_2)]);
    }
    Ok(Report::Table(t))
}

fn table1(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.n.unwrap_or(256);
    let snrs = cfg.snr_points(SnrGrid::new(-20.0, 10.0, 10.0))?;
    let opts = Table1Options {
        sweep_streams: cfg.sweep_streams.unwrap_or(false),
        interference: cfg.interference.unwrap_or_default(),
    };
    Ok(Report::Table(table1_table(&run_table1(n, &snrs, opts)?)))
}

fn eigen_polarization(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.n.unwrap_or(512);
    let eta = cfg.eta.or(cfg.geometry.and_then(|g| g.eta())).unwrap_or(0.5);
    let epsilon = cfg.epsilon.unwrap_or(0.15);
    let p = polarization(eta, n, epsilon)?;
    info!(
        "eta {eta}, N {n}: {:.4} within {epsilon} of 1, {:.4} below {epsilon}, diagonal share {:.4}",
        p.near_one, p.near_zero, p.diagonal_share
    );
    Ok(Report::Table(polarization_histogram(&p, cfg.bins.unwrap_or(40), cfg.upper.unwrap_or(1.25))))
}

fn surrogate_scaling(cfg: &ExperimentConfig) -> Result<Report> {
    let eta = cfg.eta.unwrap_or(0.5);
    let sizes = cfg.sizes.clone().unwrap_or_else(|| vec![64, 128, 256, 512]);
    if sizes.is_empty() {
        bail!("size list is empty");
    }
    Ok(Report::Table(surrogate_table(&run_surrogate_scaling(eta, &sizes)?)))
}

fn three_spacing(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.n.unwrap_or(256);
    let snrs = cfg.snr_points(SnrGrid::new(-20.0, 20.0, 5.0))?;
    let grid = default_eta_grid(n, cfg.eta_points.unwrap_or(33));
    Ok(Report::Table(three_spacing_table(&run_three_spacing(n, &snrs, &grid)?)))
}
