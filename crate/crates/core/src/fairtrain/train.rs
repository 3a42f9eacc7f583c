use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Task};
use super::model::{Adam, Mlp};
use crate::baselines::copula;
use crate::correlation::{hgr_kb, hgr_sk, DegreeConfig, SolverConfig, WarmStart};
use crate::error::{HgrError, Result};
use crate::gradients::{hgr_kb_subgradient, hgr_sk_gradient};
use crate::sample::SampleVector;
use crate::stats;
use crate::Clock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalizer {
    HgrKb(DegreeConfig),
    HgrSk(usize),
    None,
}

impl Penalizer {
    pub fn label(&self) -> &'static str {
        match self {
            Penalizer::HgrKb(_) => "hgr_kb",
            Penalizer::HgrSk(_) => "hgr_sk",
            Penalizer::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub tau: f64,
    pub penalizer: Penalizer,
    pub primal_lr: f64,
    pub dual_lr: f64,
    pub epochs: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
    /// Degrees used to report HGR-KB when it is not the penalizer.
    pub eval_degrees: DegreeConfig,
    /// Degree used to report HGR-SK when it is not the penalizer.
    pub eval_sk_degree: usize,
    pub solver: SolverConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            tau: 0.3,
            penalizer: Penalizer::HgrKb(DegreeConfig::default()),
            primal_lr: 1e-3,
            dual_lr: 1e-3,
            epochs: 500,
            hidden: vec![32, 32],
            seed: 0,
            eval_degrees: DegreeConfig::default(),
            eval_sk_degree: 5,
            solver: SolverConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(HgrError::InvalidConfig("tau must lie in [0, 1]".into()));
        }
        if !(self.primal_lr > 0.0) || !(self.dual_lr > 0.0) {
            return Err(HgrError::InvalidConfig("learning rates must be > 0".into()));
        }
        if self.epochs < 1 {
            return Err(HgrError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(HgrError::InvalidConfig(
                "hidden layer sizes must be >= 1".into(),
            ));
        }
        match self.penalizer {
            Penalizer::HgrKb(d) => {
                DegreeConfig::new(d.h, d.k)?;
            }
            Penalizer::HgrSk(d) if d < 1 => return Err(HgrError::InvalidDegree(d)),
            _ => {}
        }
        DegreeConfig::new(self.eval_degrees.h, self.eval_degrees.k)?;
        if self.eval_sk_degree < 1 {
            return Err(HgrError::InvalidDegree(self.eval_sk_degree));
        }
        self.solver.validate()
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    }
}

fn softplus(s: f64) -> f64 {
    s.max(0.0) + libm::log1p(libm::exp(-s.abs()))
}

/// Model predictions on the task scale: raw outputs for regression,
/// probabilities for binary targets.
pub fn predict(model: &Mlp, data: &Dataset) -> Vec<f64> {
    let raw = model.predict_raw(&data.features);
    match data.task {
        Task::Regression => raw,
        Task::Binary => raw.into_iter().map(sigmoid).collect(),
    }
}

/// Mean squared error or binary cross-entropy of raw outputs.
pub fn task_loss(raw: &[f64], target: &[f64], task: Task) -> f64 {
    let n = raw.len() as f64;
    match task {
        Task::Regression => {
            raw.iter()
                .zip(target)
                .map(|(p, y)| (p - y) * (p - y))
                .sum::<f64>()
                / n
        }
        Task::Binary => {
            raw.iter()
                .zip(target)
                .map(|(s, y)| softplus(*s) - y * s)
                .sum::<f64>()
                / n
        }
    }
}

/// Value of the constraint indicator between `z` and predictions, with its
/// gradient w.r.t. the predictions when requested.
#[derive(Debug, Clone, PartialEq)]
struct Indicator {
    value: f64,
    gradient: Option<Vec<f64>>,
    coefficients: Option<WarmStart>,
}

fn measure(
    penalizer: Penalizer,
    eval_degrees: DegreeConfig,
    z: &SampleVector,
    yhat: &SampleVector,
    solver: &SolverConfig,
) -> Result<Indicator> {
    let res = match penalizer {
        Penalizer::HgrKb(deg) => hgr_kb_subgradient(z, yhat, deg, solver)?,
        Penalizer::HgrSk(d) => hgr_sk_gradient(z, yhat, d, solver)?,
        Penalizer::None => {
            let r = hgr_kb(z, yhat, eval_degrees, solver)?;
            return Ok(Indicator {
                value: r.value,
                gradient: None,
                coefficients: None,
            });
        }
    };
    Ok(Indicator {
        value: res.value,
        gradient: Some(res.gradient),
        coefficients: Some(WarmStart {
            alpha: res.alpha,
            beta: res.beta,
        }),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedLoss {
    pub loss: f64,
    pub task_loss: f64,
    /// Indicator value between the protected attribute and the predictions.
    pub constraint: f64,
    /// Predictions had zero variance; the constraint was taken as 0.
    pub degenerate: bool,
    pub gradient: Vec<f64>,
    pub coefficients: Option<WarmStart>,
    pub predictions: Vec<f64>,
}

/// Task loss plus `lambda * max(0, HGR(z, yhat) - tau)` and its gradient
/// w.r.t. the flattened model parameters.
pub fn penalized_loss(
    model: &Mlp,
    data: &Dataset,
    lambda: f64,
    cfg: &TrainConfig,
    warm: Option<&WarmStart>,
) -> Result<PenalizedLoss> {
    if !(lambda >= 0.0) {
        return Err(HgrError::InvalidConfig("lambda must be >= 0".into()));
    }
    let n = data.len() as f64;
    let pass = model.forward(&data.features);
    let raw = pass.output();
    let task_loss = task_loss(&raw, &data.target, data.task);
    let predictions: Vec<f64> = match data.task {
        Task::Regression => raw.clone(),
        Task::Binary => raw.iter().map(|s| sigmoid(*s)).collect(),
    };
    let mut d_out: Vec<f64> = match data.task {
        Task::Regression => raw
            .iter()
            .zip(&data.target)
            .map(|(p, y)| 2.0 * (p - y) / n)
            .collect(),
        Task::Binary => predictions
            .iter()
            .zip(&data.target)
            .map(|(p, y)| (p - y) / n)
            .collect(),
    };

    let z = SampleVector::new(data.protected.clone())?;
    let mut solver = cfg.solver.clone();
    if let Some(w) = warm {
        solver = solver.with_warm_start(w.alpha.clone(), w.beta.clone());
    }
    let indicator = match SampleVector::new(predictions.clone()) {
        Ok(yhat) => Some(measure(
            cfg.penalizer,
            cfg.eval_degrees,
            &z,
            &yhat,
            &solver,
        )?),
        Err(HgrError::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    let degenerate = indicator.is_none();
    let (constraint, grad, coefficients) = match indicator {
        Some(ind) => (ind.value, ind.gradient, ind.coefficients),
        None => (0.0, None, None),
    };

    let mut loss = task_loss;
    if lambda > 0.0 && constraint > cfg.tau {
        if let Some(g) = grad {
            loss += lambda * (constraint - cfg.tau);
            for (i, (d, gi)) in d_out.iter_mut().zip(&g).enumerate() {
                let link = match data.task {
                    Task::Regression => 1.0,
                    Task::Binary => predictions[i] * (1.0 - predictions[i]),
                };
                *d += lambda * gi * link;
            }
        }
    }
    if !loss.is_finite() {
        return Err(HgrError::NumericalFailure(format!(
            "non-finite loss {loss}"
        )));
    }
    let gradient = model.backward(&pass, &d_out);
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(HgrError::NumericalFailure("non-finite gradient".into()));
    }
    Ok(PenalizedLoss {
        loss,
        task_loss,
        constraint,
        degenerate,
        gradient,
        coefficients,
        predictions,
    })
}

/// R^2 of predictions against the target.
pub fn r_squared(pred: &[f64], target: &[f64]) -> f64 {
    let mean = stats::mean(target);
    let sst: f64 = target.iter().map(|y| (y - mean) * (y - mean)).sum();
    let sse: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    1.0 - sse / sst
}

/// Area under the ROC curve from the rank-sum statistic, ties averaged.
pub fn auc(scores: &[f64], labels: &[f64]) -> f64 {
    let n = scores.len() as f64;
    let ranks = copula(scores);
    let pos = labels.iter().filter(|&&y| y > 0.5).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return f64::NAN;
    }
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y > 0.5)
        .map(|(r, _)| r * n)
        .sum();
    (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg)
}

fn score(pred: &[f64], data: &Dataset) -> f64 {
    match data.task {
        Task::Regression => r_squared(pred, &data.target),
        Task::Binary => auc(pred, &data.target),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub task_loss: f64,
    pub score: f64,
    pub constraint: f64,
    /// Multiplier after this epoch's dual step.
    pub lambda: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub trajectory: Vec<EpochRecord>,
    pub model: Mlp,
    pub lambda: f64,
    pub wall_clock_secs: f64,
}

/// Full-batch primal descent with Adam and projected dual ascent on the
/// multiplier, one step of each per epoch.
pub fn train(data: &Dataset, cfg: &TrainConfig, clock: &dyn Clock) -> Result<TrainRun> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(HgrError::EmptyDataset);
    }
    let start = clock.now_secs();
    let mut model = Mlp::new(data.features.cols(), &cfg.hidden, cfg.seed);
    let mut params = model.params();
    let mut opt = Adam::new(cfg.primal_lr, params.len());
    let mut lambda = 0.0f64;
    let mut warm: Option<WarmStart> = None;
    let mut trajectory = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let step = penalized_loss(&model, data, lambda, cfg, warm.as_ref())?;
        opt.step(&mut params, &step.gradient);
        model.set_params(&params);
        if !model.is_finite() {
            return Err(HgrError::NumericalFailure(format!(
                "non-finite parameters at epoch {epoch}"
            )));
        }
        if cfg.penalizer != Penalizer::None {
            lambda = (lambda + cfg.dual_lr * (step.constraint - cfg.tau).max(0.0)).max(0.0);
        }
        if step.coefficients.is_some() {
            warm = step.coefficients.clone();
        }
        trajectory.push(EpochRecord {
            epoch,
            task_loss: step.task_loss,
            score: score(&step.predictions, data),
            constraint: step.constraint,
            lambda,
            degenerate: step.degenerate,
        });
    }
    Ok(TrainRun {
        trajectory,
        model,
        lambda,
        wall_clock_secs: clock.now_secs() - start,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub score: f64,
    pub hgr_kb: f64,
    pub hgr_sk: f64,
    pub degenerate: bool,
}

impl Evaluation {
    /// The indicator matching `penalizer`; HGR-KB for the unconstrained run.
    pub fn constraint(&self, penalizer: Penalizer) -> f64 {
        match penalizer {
            Penalizer::HgrSk(_) => self.hgr_sk,
            _ => self.hgr_kb,
        }
    }
}

/// Score and both indicators between the protected attribute and the
/// model's predictions. Constant predictions give zero indicators and the
/// degenerate flag.
pub fn evaluate(
    model: &Mlp,
    data: &Dataset,
    deg: DegreeConfig,
    sk_degree: usize,
    solver: &SolverConfig,
) -> Result<Evaluation> {
    let pred = predict(model, data);
    let score = score(&pred, data);
    let z = SampleVector::new(data.protected.clone())?;
    match SampleVector::new(pred) {
        Ok(yhat) => Ok(Evaluation {
            score,
            hgr_kb: hgr_kb(&z, &yhat, deg, solver)?.value,
            hgr_sk: hgr_sk(&z, &yhat, sk_degree, solver)?.value,
            degenerate: false,
        }),
        Err(HgrError::ZeroVariance) => Ok(Evaluation {
            score,
            hgr_kb: 0.0,
            hgr_sk: 0.0,
            degenerate: true,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> MeanStd {
        let (mean, std) = stats::mean_std(values);
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train: Evaluation,
    pub val: Evaluation,
    pub seconds: f64,
    pub run: TrainRun,
}

/// Mean and standard deviation across folds, laid out like a results table
/// row: score and constraint on train and validation, then time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValSummary {
    pub score_train: MeanStd,
    pub score_val: MeanStd,
    pub constraint_train: MeanStd,
    pub constraint_val: MeanStd,
    pub time: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub penalizer: Penalizer,
    pub folds: Vec<FoldResult>,
    pub summary: CrossValSummary,
}

/// Seeded permutation of `0..n`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Seeded shuffle of `0..n` cut into `folds` contiguous validation blocks.
pub fn fold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let order = shuffled_indices(n, seed);
    (0..folds)
        .map(|f| order[f * n / folds..(f + 1) * n / folds].to_vec())
        .collect()
}

/// Trains and evaluates once per fold. Fold `f` initializes its network from
/// `cfg.seed + f`.
pub fn cross_validate(
    data: &Dataset,
    cfg: &TrainConfig,
    folds: usize,
    clock: &dyn Clock,
) -> Result<CrossValidation> {
    if folds < 2 || folds > data.len() {
        return Err(HgrError::InvalidConfig(format!(
            "folds must lie in 2..={}",
            data.len()
        )));
    }
    let blocks = fold_indices(data.len(), folds, cfg.seed);
    (0..folds)
        .map(|f| cross_validate_fold(data, cfg, &blocks, f, clock))
        .collect::<Result<Vec<_>>>()
        .map(|results| summarize(cfg.penalizer, results))
}

/// One fold of [`cross_validate`]; exposed so callers can run folds
/// concurrently and assemble them with [`summarize`].
pub fn cross_validate_fold(
    data: &Dataset,
    cfg: &TrainConfig,
    blocks: &[Vec<usize>],
    fold: usize,
    clock: &dyn Clock,
) -> Result<FoldResult> {
    let val_idx = &blocks[fold];
    let train_idx: Vec<usize> = blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != fold)
        .flat_map(|(_, b)| b.iter().copied())
        .collect();
    let train_set = data.subset(&train_idx);
    let val_set = data.subset(val_idx);
    let fold_cfg = TrainConfig {
        seed: cfg.seed.wrapping_add(fold as u64),
        ..cfg.clone()
    };
    let run = train(&train_set, &fold_cfg, clock)?;
    let (kb_deg, sk_d) = match cfg.penalizer {
        Penalizer::HgrKb(d) => (d, cfg.eval_sk_degree),
        Penalizer::HgrSk(d) => (cfg.eval_degrees, d),
        Penalizer::None => (cfg.eval_degrees, cfg.eval_sk_degree),
    };
    let train_eval = evaluate(&run.model, &train_set, kb_deg, sk_d, &cfg.solver)?;
    let val_eval = evaluate(&run.model, &val_set, kb_deg, sk_d, &cfg.solver)?;
    Ok(FoldResult {
        fold,
        train: train_eval,
        val: val_eval,
        seconds: run.wall_clock_secs,
        run,
    })
}

pub fn summarize(penalizer: Penalizer, folds: Vec<FoldResult>) -> CrossValidation {
    let col =
        |f: &dyn Fn(&FoldResult) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>());
    let summary = CrossValSummary {
        score_train: col(&|r| r.train.score),
        score_val: col(&|r| r.val.score),
        constraint_train: col(&|r| r.train.constraint(penalizer)),
        constraint_val: col(&|r| r.val.constraint(penalizer)),
        time: col(&|r| r.seconds),
    };
    CrossValidation {
        penalizer,
        folds,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairtrain::dataset::{preprocess, synthetic_fairness};
    use crate::NoClock;

    fn small(n: usize) -> Dataset {
        let (t, s) = synthetic_fairness(n, 3);
        preprocess(&t, &s).unwrap()
    }

    #[test]
    fn r_squared_and_auc_examples() {
        let y = [0.0, 0.5, 1.0];
        assert_eq!(r_squared(&y, &y), 1.0);
        assert_eq!(r_squared(&[0.5; 3], &y), 0.0);
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[0.0, 0.0, 1.0, 1.0]), 0.75);
        assert_eq!(auc(&[0.2, 0.2], &[0.0, 1.0]), 0.5);
    }

    #[test]
    fn zero_lambda_gives_task_loss() {
        let data = small(60);
        let cfg = TrainConfig::default();
        let model = Mlp::new(data.features.cols(), &[4], 1);
        let out = penalized_loss(&model, &data, 0.0, &cfg, None).unwrap();
        assert_eq!(out.loss, out.task_loss);
        let unpen = TrainConfig {
            penalizer: Penalizer::None,
            ..cfg
        };
        let plain = penalized_loss(&model, &data, 0.0, &unpen, None).unwrap();
        assert_eq!(out.gradient, plain.gradient);
    }

    #[test]
    fn constant_predictions_are_degenerate() {
        let data = small(40);
        let mut model = Mlp::new(data.features.cols(), &[], 0);
        let zeros = vec![0.0; model.n_params()];
        model.set_params(&zeros);
        let out = penalized_loss(&model, &data, 1.0, &TrainConfig::default(), None).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.constraint, 0.0);
        assert_eq!(out.loss, out.task_loss);
        let ev = evaluate(
            &model,
            &data,
            DegreeConfig::default(),
            5,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(ev.degenerate);
        assert_eq!(ev.hgr_kb, 0.0);
    }

    #[test]
    fn short_run_shapes() {
        let data = small(80);
        let cfg = TrainConfig {
            epochs: 5,
            hidden: vec![4],
            tau: 0.0,
            ..TrainConfig::default()
        };
        let run = train(&data, &cfg, &NoClock).unwrap();
        assert_eq!(run.trajectory.len(), 5);
        assert!(run.trajectory.iter().all(|r| r.lambda >= 0.0));
        assert!(run.lambda > 0.0);
    }

    #[test]
    fn folds_partition_rows() {
        let blocks = fold_indices(23, 5, 9);
        let mut all: Vec<usize> = blocks.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(blocks.iter().all(|b| b.len() == 4 || b.len() == 5));
    }

    #[test]
    fn rejects_bad_config() {
        let bad = TrainConfig {
            tau: 1.5,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            dual_lr: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
