//! The four subcommands. Each turns a resolved config into a table.

use truncio::{
    asymptotic_auc, forced_choice_auc_with, roc_curve, sweep, total_auc, AucDecomposition,
    TruncationVector,
};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

/// `|z|` above which the oracle report flags a disagreement.
pub const Z_FLAG: f64 = 3.0;

fn decomposition_columns(dim: usize) -> Vec<String> {
    (1..=dim)
        .map(|i| format!("tau_{i}"))
        .chain(
            ["az", "az1", "az2", "az3", "asymptote", "rej0", "rej1", "se"]
                .iter()
                .map(|s| s.to_string()),
        )
        .collect()
}

fn decomposition_row(taus: &TruncationVector, d: &AucDecomposition, asymptote: f64) -> Vec<Cell> {
    taus.as_slice()
        .iter()
        .map(|&t| Cell::Num(t))
        .chain(
            [d.az, d.az1, d.az2, d.az3, asymptote, d.rej0, d.rej1, d.se()]
                .into_iter()
                .map(Cell::Num),
        )
        .collect()
}

pub fn auc(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let model = cfg.model()?;
    let taus = cfg.taus()?;
    let method = cfg.method()?;
    let d = total_auc(&model, &taus, method)?;
    let asymptote = asymptotic_auc(&model, &taus)?;
    let mut table = Table::new(decomposition_columns(model.dim()));
    table.push(decomposition_row(&taus, &d, asymptote));
    Ok(table)
}

pub fn sweep_grid(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let method = cfg.method()?;
    let records = sweep(&model, &grid, method)?;
    let mut table = Table::new(decomposition_columns(model.dim()));
    for r in &records {
        table.push(decomposition_row(&r.taus, &r.decomposition, r.asymptote));
    }
    Ok(table)
}

pub fn roc(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let model = cfg.model()?;
    let taus = cfg.taus()?;
    let method = cfg.method()?;
    let n = cfg.roc.n_thresholds;
    if n < 2 {
        return Err(CliError::Config(format!(
            "roc.n_thresholds: at least 2, got {n}"
        )));
    }
    let curve = roc_curve(&model, &taus, method, n)?;
    let mut table = Table::new(["kind", "fpf", "tpf", "se_fpf", "se_tpf"]);
    let (last, rated) = curve.points.split_last().expect("curve has points");
    for &(x, y) in rated {
        table.push(vec![
            "rated".into(),
            x.into(),
            y.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    let (se_x, se_y) = curve.endpoint_se;
    table.push(vec![
        "endpoint".into(),
        last.0.into(),
        last.1.into(),
        se_x.into(),
        se_y.into(),
    ]);
    if let Some(c) = &curve.completion {
        let (gx, gy) = c.gist_extension[1];
        table.push(vec![
            "gist_extension".into(),
            gx.into(),
            gy.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
        let (qx, qy) = c.guess_segment[1];
        table.push(vec![
            "guess_segment".into(),
            qx.into(),
            qy.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    Ok(table)
}

pub fn oracle(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let model = cfg.model()?;
    let taus = cfg.taus()?;
    let method = cfg.method()?;
    let seed = cfg.seed()?;
    let n_pairs = cfg.oracle.n_pairs;
    if n_pairs == 0 {
        return Err(CliError::Config("oracle.n_pairs: at least 1".into()));
    }
    let fc = forced_choice_auc_with(&model, &taus, n_pairs, seed, cfg.guessing())?;
    let d = total_auc(&model, &taus, method)?;
    let combined = fc.se.hypot(d.se());
    let z = if combined > 0.0 {
        (fc.auc_hat - d.az) / combined
    } else if fc.auc_hat == d.az {
        0.0
    } else {
        f64::INFINITY.copysign(fc.auc_hat - d.az)
    };
    let verdict = if z.abs() > Z_FLAG { "flagged" } else { "ok" };
    if z.abs() > Z_FLAG {
        eprintln!(
            "warning: forced-choice and decomposition areas differ by {z:.2} standard errors"
        );
    }
    let mut table = Table::new([
        "n_pairs",
        "oracle_auc",
        "oracle_se",
        "az",
        "az_se",
        "z",
        "agreement",
    ]);
    table.push(vec![
        Cell::Text(n_pairs.to_string()),
        fc.auc_hat.into(),
        fc.se.into(),
        d.az.into(),
        d.se().into(),
        z.into(),
        verdict.into(),
    ]);
    Ok(table)
}
