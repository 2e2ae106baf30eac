//! The four pipeline stages and the files they exchange.
//!
//! ```text
//! <out>/manifest.txt
//! <out>/train/path_0000.csv ...
//! <out>/test/path_0000.csv ...
//! <out>/models/model_n<N>.txt, gram_n<N>.csv
//! <out>/eval/pnl_n<N>.csv, positions_n<N>.csv
//! <out>/compare.csv
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sighedge_core::hedger::pnl_of_positions;
use sighedge_core::io::{load_model, load_path, save_gram, save_model, save_path};
use sighedge_core::market::{
    delta_hedge_positions, payoffs, simulate_gbm_streams, TEST_STREAM_OFFSET,
};
use sighedge_core::{
    fit_with_gram, gram_matrix, HedgeModel, PayoffKind, PnLReport, SampledPath, StrategyTrajectory,
};

use crate::config::RunConfig;
use crate::error::Failure;

/// Share of the horizon over which position errors are averaged.
pub const POSITION_ERROR_WINDOW: f64 = 0.8;

pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.txt")
    }

    pub fn train_dir(&self) -> PathBuf {
        self.root.join("train")
    }

    pub fn test_dir(&self) -> PathBuf {
        self.root.join("test")
    }

    pub fn path_file(dir: &Path, index: usize) -> PathBuf {
        dir.join(format!("{}.csv", path_id(index)))
    }

    pub fn model(&self, n: usize) -> PathBuf {
        self.root.join("models").join(format!("model_n{n}.txt"))
    }

    pub fn gram(&self, n: usize) -> PathBuf {
        self.root.join("models").join(format!("gram_n{n}.csv"))
    }

    pub fn pnl(&self, n: usize) -> PathBuf {
        self.root.join("eval").join(format!("pnl_n{n}.csv"))
    }

    pub fn positions(&self, n: usize) -> PathBuf {
        self.root.join("eval").join(format!("positions_n{n}.csv"))
    }

    pub fn compare(&self) -> PathBuf {
        self.root.join("compare.csv")
    }
}

pub fn path_id(index: usize) -> String {
    format!("path_{index:04}")
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::data(format!("cannot create {}: {e}", dir.display())))
}

fn create_parent(file: &Path) -> Result<(), Failure> {
    match file.parent() {
        Some(dir) => create_dir(dir),
        None => Ok(()),
    }
}

fn clear_paths(dir: &Path) -> Result<(), Failure> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        let stale = p
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("path_") && n.ends_with(".csv"));
        if stale {
            fs::remove_file(&p)?;
        }
    }
    Ok(())
}

fn load_paths(dir: &Path, count: usize, what: &str) -> Result<Vec<SampledPath>, Failure> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let file = Layout::path_file(dir, i);
            if !file.exists() {
                return Err(Failure::data(format!(
                    "missing {what} path {} (run `sighedge simulate` first)",
                    file.display()
                )));
            }
            load_path(&file).map_err(|e| Failure::from(e).context(format!("reading {}", file.display())))
        })
        .collect()
}

fn load_fitted(layout: &Layout, n: usize) -> Result<HedgeModel, Failure> {
    let file = layout.model(n);
    if !file.exists() {
        return Err(Failure::data(format!(
            "missing model {} (run `sighedge fit --n {n}` first)",
            file.display()
        )));
    }
    load_model(&file).map_err(|e| Failure::from(e).context(format!("reading {}", file.display())))
}

#[derive(Debug)]
pub struct SimulateReport {
    pub train: usize,
    pub test: usize,
    pub manifest: PathBuf,
}

/// Writes training paths (RNG streams from 0) and test paths (streams from
/// the test offset), plus a manifest of the generating config.
pub fn simulate(cfg: &RunConfig) -> Result<SimulateReport, Failure> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.output_dir);
    let train = simulate_gbm_streams(&cfg.market, 0, cfg.max_train_size())?;
    let test = simulate_gbm_streams(&cfg.market, TEST_STREAM_OFFSET, cfg.test_count)?;
    for (dir, paths) in [(layout.train_dir(), &train), (layout.test_dir(), &test)] {
        create_dir(&dir)?;
        clear_paths(&dir)?;
        paths
            .par_iter()
            .enumerate()
            .try_for_each(|(i, p)| save_path(p, Layout::path_file(&dir, i)))?;
    }
    let mut manifest = cfg.to_text();
    manifest.push_str(&format!("train-paths = {}\n", train.len()));
    manifest.push_str(&format!("test-paths = {}\n", test.len()));
    manifest.push_str(&format!("train-streams = 0..{}\n", train.len()));
    manifest.push_str(&format!(
        "test-streams = {TEST_STREAM_OFFSET}..{}\n",
        TEST_STREAM_OFFSET + test.len() as u64
    ));
    fs::write(layout.manifest(), manifest)?;
    Ok(SimulateReport {
        train: train.len(),
        test: test.len(),
        manifest: layout.manifest(),
    })
}

#[derive(Debug)]
pub struct FitReport {
    pub n: usize,
    pub pi0: f64,
    pub residual: f64,
    pub beta_is_zero: bool,
    pub model: PathBuf,
    pub gram: PathBuf,
}

/// Fits one model per requested size. The Gram matrix is assembled once
/// for the largest size; smaller models use its leading blocks.
pub fn fit(cfg: &RunConfig, n: Option<usize>) -> Result<Vec<FitReport>, Failure> {
    cfg.validate()?;
    let sizes = match n {
        Some(0) => return Err(Failure::config("--n must be >= 1")),
        Some(n) => vec![n],
        None => cfg.train_sizes.clone(),
    };
    let layout = Layout::new(&cfg.output_dir);
    let n_max = sizes.iter().copied().max().unwrap_or(0);
    let train = load_paths(&layout.train_dir(), n_max, "training")?;
    let pays = payoffs(&cfg.payoff, &train)?;
    let ids: Vec<String> = (0..n_max).map(path_id).collect();
    let full = sighedge_core::featuremap::gram_matrix_with_ids(&train, ids, cfg.refinement)?;
    let mut reports = Vec::new();
    for n in sizes {
        let pi0 = cfg.pi0.resolve(&cfg.payoff, &cfg.market, &pays[..n])?;
        let gram = full.leading(n);
        let model = fit_with_gram(
            train[..n].to_vec(),
            gram,
            &pays[..n],
            pi0,
            cfg.lambda,
            cfg.refinement,
        )?;
        let model_file = layout.model(n);
        let gram_file = layout.gram(n);
        create_parent(&model_file)?;
        save_model(&model, &model_file)?;
        save_gram(model.gram(), &gram_file)?;
        reports.push(FitReport {
            n,
            pi0,
            residual: model.relative_residual(),
            beta_is_zero: model.dual().iter().all(|b| *b == 0.0),
            model: model_file,
            gram: gram_file,
        });
    }
    Ok(reports)
}

/// Whether the Black-Scholes delta hedge applies to this claim and market.
pub fn delta_hedgeable(cfg: &RunConfig) -> bool {
    cfg.market.dim == 1
        && matches!(
            cfg.payoff.kind,
            PayoffKind::EuropeanCall | PayoffKind::EuropeanPut
        )
}

pub struct Evaluation {
    pub kernel: PnLReport,
    pub delta: Option<PnLReport>,
    pub payoffs: Vec<f64>,
    pub kernel_positions: Vec<StrategyTrajectory>,
    pub delta_positions: Option<Vec<StrategyTrajectory>>,
}

impl Evaluation {
    /// Mean of `|kernel - delta|` positions over the first
    /// [`POSITION_ERROR_WINDOW`] of the sample indices, on the hedged
    /// coordinate.
    pub fn mean_abs_position_error(&self, coordinate: usize) -> Option<f64> {
        let deltas = self.delta_positions.as_ref()?;
        let steps = self.kernel_positions.first()?.len() - 1;
        let window = (POSITION_ERROR_WINDOW * steps as f64).floor() as usize;
        if window == 0 {
            return None;
        }
        let mut total = 0.0;
        for (k, d) in self.kernel_positions.iter().zip(deltas) {
            for i in 0..window {
                total += (k.position(i)[coordinate] - d.position(i)[0]).abs();
            }
        }
        Some(total / (window * deltas.len()) as f64)
    }
}

pub fn evaluate_model(cfg: &RunConfig, model: &HedgeModel, test: &[SampledPath]) -> Result<Evaluation, Failure> {
    let pays = payoffs(&cfg.payoff, test)?;
    let kernel_positions = model.positions_batch(test)?;
    let pnls = kernel_positions
        .iter()
        .zip(test)
        .zip(&pays)
        .map(|((traj, q), p)| pnl_of_positions(traj, q, *p, model.pi0()))
        .collect::<Result<Vec<f64>, _>>()?;
    let (delta, delta_positions) = if delta_hedgeable(cfg) {
        let sigma = cfg.market.sigma;
        let trajs = test
            .par_iter()
            .map(|q| delta_hedge_positions(&cfg.payoff, q, sigma))
            .collect::<Result<Vec<_>, _>>()?;
        let report = sighedge_core::delta_hedge_pnl(&cfg.payoff, test, sigma)?;
        (Some(report), Some(trajs))
    } else {
        (None, None)
    };
    Ok(Evaluation {
        kernel: PnLReport::from_pnls(pnls),
        delta,
        payoffs: pays,
        kernel_positions,
        delta_positions,
    })
}

pub struct EvaluateReport {
    pub n: usize,
    pub evaluation: Evaluation,
    pub pnl_file: PathBuf,
    pub positions_file: PathBuf,
}

/// Evaluates the model of size `n` (default: the largest train size) on the
/// test set; writes per-path P&L and the positions along `eval-path`.
pub fn evaluate(cfg: &RunConfig, n: Option<usize>) -> Result<EvaluateReport, Failure> {
    cfg.validate()?;
    let n = n.unwrap_or_else(|| cfg.max_train_size());
    let layout = Layout::new(&cfg.output_dir);
    let model = load_fitted(&layout, n)?;
    let test = load_paths(&layout.test_dir(), cfg.test_count, "test")?;
    let eval = evaluate_model(cfg, &model, &test)?;

    let pnl_file = layout.pnl(n);
    create_parent(&pnl_file)?;
    let mut w = BufWriter::new(fs::File::create(&pnl_file)?);
    match &eval.delta {
        Some(_) => writeln!(w, "path,payoff,kernel_pnl,delta_pnl")?,
        None => writeln!(w, "path,payoff,kernel_pnl")?,
    }
    for (k, pnl) in eval.kernel.pnls().iter().enumerate() {
        write!(w, "{},{},{}", path_id(k), eval.payoffs[k], pnl)?;
        if let Some(d) = &eval.delta {
            write!(w, ",{}", d.pnls()[k])?;
        }
        writeln!(w)?;
    }
    w.flush()?;

    let positions_file = layout.positions(n);
    let mut w = BufWriter::new(fs::File::create(&positions_file)?);
    writeln!(w, "t,kernel_position,bs_delta")?;
    let k = cfg.eval_path;
    let traj = &eval.kernel_positions[k];
    let coord = cfg.payoff.coordinate;
    for (i, t) in test[k].times().iter().enumerate() {
        let delta = match &eval.delta_positions {
            Some(d) => d[k].position(i)[0].to_string(),
            None => String::new(),
        };
        writeln!(w, "{t},{},{delta}", traj.position(i)[coord])?;
    }
    w.flush()?;

    Ok(EvaluateReport {
        n,
        evaluation: eval,
        pnl_file,
        positions_file,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub n: usize,
    pub std_kernel: f64,
    pub std_delta: Option<f64>,
    pub mean_abs_position_error: Option<f64>,
}

/// One row per configured train size; every model must already be fitted.
pub fn compare(cfg: &RunConfig) -> Result<(Vec<CompareRow>, PathBuf), Failure> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.output_dir);
    let models = cfg
        .train_sizes
        .iter()
        .map(|&n| load_fitted(&layout, n))
        .collect::<Result<Vec<_>, _>>()?;
    let test = load_paths(&layout.test_dir(), cfg.test_count, "test")?;
    let mut rows = Vec::new();
    for (&n, model) in cfg.train_sizes.iter().zip(&models) {
        let eval = evaluate_model(cfg, model, &test)?;
        rows.push(CompareRow {
            n,
            std_kernel: eval.kernel.std,
            std_delta: eval.delta.as_ref().map(|d| d.std),
            mean_abs_position_error: eval.mean_abs_position_error(cfg.payoff.coordinate),
        });
    }
    let file = layout.compare();
    let mut w = BufWriter::new(fs::File::create(&file)?);
    writeln!(w, "n,std_kernel,std_delta,mean_abs_position_error")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.n,
            r.std_kernel,
            opt(r.std_delta),
            opt(r.mean_abs_position_error)
        )?;
    }
    w.flush()?;
    Ok((rows, file))
}

/// Recomputes the Gram matrix of saved training paths; used to check that a
/// stored model matches its data.
pub fn recompute_gram(cfg: &RunConfig, n: usize) -> Result<sighedge_core::GramMatrix, Failure> {
    let layout = Layout::new(&cfg.output_dir);
    let train = load_paths(&layout.train_dir(), n, "training")?;
    Ok(gram_matrix(&train, cfg.refinement)?)
}
