//! Deterministic SGD training, evaluation, gradient checking, and the
//! four-way rule comparison.
//!
//! A run is a pure function of its configuration: model and feedback weights
//! come from labelled substreams of the master seed, batches from another,
//! and nothing consults the clock or the OS. Two runs with the same config
//! produce byte-identical metrics and checkpoints.

use std::path::PathBuf;

use crate::data::{BatchIterator, Dataset, Sampling};
use crate::error::{Error, Result};
use crate::metrics::MetricsRow;
use crate::model::{accuracy, cross_entropy, init_mlp, Mlp};
use crate::numerics::{Matrix, Rng};
use crate::rules::{
    backward, init_feedback, measure_alignment, update_temporal, RuleKind, TemporalState,
    UpdateSet,
};

/// Where training data comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Mnist,
    Synth,
}

impl std::fmt::Display for DataSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DataSource::Mnist => write!(f, "mnist"),
            DataSource::Synth => write!(f, "synth"),
        }
    }
}

impl std::str::FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<DataSource> {
        match s {
            "mnist" => Ok(DataSource::Mnist),
            "synth" => Ok(DataSource::Synth),
            other => Err(Error::Param(format!(
                "unknown data source '{other}' (valid: mnist, synth)"
            ))),
        }
    }
}

/// Source of the temporal difference. Only differencing across consecutive
/// training steps is implemented; the enum exists so a within-step
/// recirculation variant has a configuration surface to land on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalSource {
    /// Difference against the previous training step's batch means.
    Step,
}

impl std::str::FromStr for TemporalSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<TemporalSource> {
        match s {
            "step" => Ok(TemporalSource::Step),
            other => Err(Error::Param(format!(
                "unknown itd-source '{other}' (valid: step)"
            ))),
        }
    }
}

/// Full description of one training run. Defaults mirror the reference
/// hyperparameters: learning rate 1e-3, minibatch 50, one hidden layer of
/// 32 units, 100000 steps.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub rule: RuleKind,
    pub lr: f64,
    pub steps: u64,
    pub batch: usize,
    pub sizes: Vec<usize>,
    pub master_seed: u64,
    pub eval_every: u64,
    pub align_every: u64,
    pub sampling: Sampling,
    pub temporal_source: TemporalSource,
    pub data: DataSource,
    pub out: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rule: RuleKind::Vbp,
            lr: 1e-3,
            steps: 100_000,
            batch: 50,
            sizes: vec![784, 32, 10],
            master_seed: 0,
            eval_every: 500,
            align_every: 500,
            sampling: Sampling::EpochShuffle,
            temporal_source: TemporalSource::Step,
            data: DataSource::Mnist,
            out: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Param(format!("lr must be positive, got {}", self.lr)));
        }
        if self.steps == 0 {
            return Err(Error::Param("steps must be >= 1".into()));
        }
        if self.batch == 0 {
            return Err(Error::Param("batch must be >= 1".into()));
        }
        if self.eval_every == 0 || self.align_every == 0 {
            return Err(Error::Param("eval_every and align_every must be >= 1".into()));
        }
        crate::model::validate_sizes(&self.sizes)
    }
}

/// Product of a training run: the final model and every emitted metrics row.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub mlp: Mlp,
    pub metrics: Vec<MetricsRow>,
}

/// Mean loss and accuracy of `mlp` over `ds`, evaluated in deterministic
/// slices of at most 1000 rows.
pub fn evaluate(mlp: &Mlp, ds: &Dataset) -> Result<(f64, f64)> {
    let n = ds.len();
    let mut loss_total = 0.0;
    let mut hit_total = 0.0;
    let mut start = 0usize;
    while start < n {
        let end = (start + 1000).min(n);
        let rows = end - start;
        let x = slice_rows(&ds.x, start, end);
        let y = slice_rows(&ds.y, start, end);
        let trace = mlp.forward(&x)?;
        loss_total += cross_entropy(trace.output(), &y)? * rows as f64;
        hit_total += accuracy(trace.output(), &y)? * rows as f64;
        start = end;
    }
    Ok((loss_total / n as f64, hit_total / n as f64))
}

fn slice_rows(m: &Matrix, start: usize, end: usize) -> Matrix {
    let cols = m.cols();
    let data = m.data()[start * cols..end * cols].to_vec();
    Matrix::from_vec(end - start, cols, data).expect("slice of a finite matrix")
}

/// Runs the configured training loop on the given datasets.
///
/// Per step: draw a batch, forward, backward under the configured rule,
/// advance temporal state (temporal rules only), then apply the plain SGD
/// update. Metrics rows are emitted at every step divisible by `eval_every`
/// and at the final step; alignment against a same-trace backprop update is
/// filled in when the step is also divisible by `align_every`. The reference
/// backward pass is computed and discarded — it never perturbs the run.
pub fn train(config: &TrainConfig, train_ds: &Dataset, test_ds: &Dataset) -> Result<TrainOutcome> {
    config.validate()?;
    if train_ds.width() != config.sizes[0] || test_ds.width() != config.sizes[0] {
        return Err(Error::shape(
            "train datasets vs model input",
            (train_ds.width(), test_ds.width()),
            (config.sizes[0], config.sizes[0]),
        ));
    }
    let classes = *config.sizes.last().expect("validated sizes");
    if train_ds.y.cols() != classes || test_ds.y.cols() != classes {
        return Err(Error::shape(
            "train targets vs model output",
            (train_ds.y.cols(), test_ds.y.cols()),
            (classes, classes),
        ));
    }

    let mut mlp = init_mlp(&config.sizes, config.master_seed)?;
    let fb = init_feedback(&config.sizes, config.master_seed)?;
    let mut ts = TemporalState::fresh(&config.sizes)?;
    let mut batches = BatchIterator::new(
        train_ds.len(),
        config.batch,
        Rng::substream(config.master_seed, "batches"),
        config.sampling,
    )?;

    let fb_checksum = fb.checksum();
    let mut metrics = Vec::new();

    let tag_step = |e: Error, step: u64| match e {
        Error::NonFinite { rule, layer, .. } => Error::NonFinite { rule, step, layer },
        other => other,
    };
    for step in 0..config.steps {
        let (bx, by) = batches.next_batch(train_ds);
        let trace = mlp.forward(&bx).map_err(|e| tag_step(e, step))?;
        let update = backward(config.rule, &mlp, &fb, &trace, &by, &ts)
            .map_err(|e| tag_step(e, step))?;

        let train_loss = cross_entropy(trace.output(), &by)?;
        if !train_loss.is_finite() {
            return Err(Error::NonFinite {
                rule: config.rule.tag(),
                step,
                layer: mlp.layer_count(),
            });
        }

        if step % config.eval_every == 0 || step + 1 == config.steps {
            let align = if step % config.align_every == 0 {
                let reference = backward(RuleKind::Vbp, &mlp, &fb, &trace, &by, &ts)?;
                measure_alignment(&update, &reference)?
            } else {
                vec![None; mlp.layer_count()]
            };
            let (test_loss, test_acc) = evaluate(&mlp, test_ds)?;
            metrics.push(MetricsRow {
                step,
                rule: config.rule,
                seed: config.master_seed,
                train_loss,
                test_loss,
                test_acc,
                align,
                wall_ms: 0,
            });
        }

        mlp.sgd_step(&update.dw, &update.db, config.lr)?;
        if config.rule.uses_temporal_state() {
            ts = update_temporal(&ts, &trace)?;
        }
    }

    debug_assert_eq!(fb.checksum(), fb_checksum, "feedback weights must not move");
    Ok(TrainOutcome { mlp, metrics })
}

/// Runs all four rules from identical initial weights (same master seed, so
/// the same "init", "feedback" and "batches" substreams) and collects each
/// outcome. Runs execute concurrently; a failing rule never aborts its
/// siblings. Results come back in canonical rule order.
pub fn run_compare(
    base: &TrainConfig,
    train_ds: &Dataset,
    test_ds: &Dataset,
) -> Vec<(RuleKind, Result<TrainOutcome>)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = RuleKind::ALL
            .iter()
            .map(|&rule| {
                let config = TrainConfig {
                    rule,
                    ..base.clone()
                };
                scope.spawn(move || (rule, train(&config, train_ds, test_ds)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    })
}

/// Central-difference gradients of the batch loss with respect to every
/// weight and bias, at perturbation `h`. This is the independent oracle the
/// gradient check compares against: it only ever runs forward passes.
pub fn numeric_gradients(mlp: &Mlp, x: &Matrix, targets: &Matrix, h: f64) -> Result<UpdateSet> {
    let loss_of = |m: &Mlp| -> Result<f64> {
        let trace = m.forward(x)?;
        cross_entropy(trace.output(), targets)
    };
    let mut dw = Vec::with_capacity(mlp.layer_count());
    let mut db = Vec::with_capacity(mlp.layer_count());
    for l in 0..mlp.layer_count() {
        let (rows, cols) = mlp.weights()[l].shape();
        let mut grad = Vec::with_capacity(rows * cols);
        for idx in 0..rows * cols {
            let mut plus = mlp.clone();
            bump(plus.weight_mut(l), idx, h);
            let mut minus = mlp.clone();
            bump(minus.weight_mut(l), idx, -h);
            grad.push((loss_of(&plus)? - loss_of(&minus)?) / (2.0 * h));
        }
        dw.push(Matrix::from_vec(rows, cols, grad)?);

        let width = mlp.biases()[l].cols();
        let mut grad_b = Vec::with_capacity(width);
        for idx in 0..width {
            let mut plus = mlp.clone();
            bump(plus.bias_mut(l), idx, h);
            let mut minus = mlp.clone();
            bump(minus.bias_mut(l), idx, -h);
            grad_b.push((loss_of(&plus)? - loss_of(&minus)?) / (2.0 * h));
        }
        db.push(Matrix::from_vec(1, width, grad_b)?);
    }
    Ok(UpdateSet { dw, db })
}

fn bump(m: &mut Matrix, flat_idx: usize, delta: f64) {
    let cols = m.cols();
    let (i, j) = (flat_idx / cols, flat_idx % cols);
    let mut data = m.data().to_vec();
    data[flat_idx] += delta;
    *m = Matrix::from_vec(m.rows(), cols, data).expect("bumped matrix stays finite");
    debug_assert!(i < m.rows() && j < cols);
}

/// Largest elementwise relative error between two update sets, with the
/// denominator floored at 1e-12 to keep 0/0 silent.
pub fn max_relative_error(a: &UpdateSet, b: &UpdateSet) -> f64 {
    let mut worst = 0.0f64;
    let pairs = a.dw.iter().zip(&b.dw).chain(a.db.iter().zip(&b.db));
    for (ma, mb) in pairs {
        for (&x, &y) in ma.data().iter().zip(mb.data()) {
            let denom = x.abs().max(y.abs()).max(1e-12);
            worst = worst.max((x - y).abs() / denom);
        }
    }
    worst
}

/// Result of one gradient check.
#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub seed: u64,
    pub h: f64,
    pub max_rel_err: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Pass threshold for [`gradcheck`].
pub const GRADCHECK_THRESHOLD: f64 = 1e-6;

/// Checks backprop's analytic gradients against central differences on a
/// 4-3-2 network with a 2-example batch of seeded inputs.
pub fn gradcheck(seed: u64, h: f64) -> Result<GradcheckReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Param(format!("h must be positive, got {h}")));
    }
    let sizes = [4usize, 3, 2];
    let mlp = init_mlp(&sizes, seed)?;
    let fb = init_feedback(&sizes, seed)?;
    let mut rng = Rng::substream(seed, "gradcheck");
    let x = Matrix::rand_uniform(&mut rng, 2, 4, -1.0, 1.0)?;
    let mut t_data = vec![0.0; 4];
    for i in 0..2 {
        t_data[i * 2 + rng.next_below(2) as usize] = 1.0;
    }
    let targets = Matrix::from_vec(2, 2, t_data)?;

    let trace = mlp.forward(&x)?;
    let ts = TemporalState::fresh(&sizes)?;
    let analytic = backward(RuleKind::Vbp, &mlp, &fb, &trace, &targets, &ts)?;
    let numeric = numeric_gradients(&mlp, &x, &targets, h)?;
    let max_rel_err = max_relative_error(&analytic, &numeric);
    Ok(GradcheckReport {
        seed,
        h,
        max_rel_err,
        threshold: GRADCHECK_THRESHOLD,
        pass: max_rel_err <= GRADCHECK_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_train_test;

    fn small_config(rule: RuleKind, steps: u64) -> TrainConfig {
        TrainConfig {
            rule,
            steps,
            batch: 10,
            sizes: vec![8, 6, 3],
            master_seed: 42,
            eval_every: 5,
            align_every: 5,
            data: DataSource::Synth,
            ..TrainConfig::default()
        }
    }

    fn small_data() -> (Dataset, Dataset) {
        synth_train_test(42, 60, 30, 8, 3).unwrap()
    }

    #[test]
    fn config_defaults_match_reference_hyperparameters() {
        let c = TrainConfig::default();
        assert_eq!(c.lr, 1e-3);
        assert_eq!(c.batch, 50);
        assert_eq!(c.steps, 100_000);
        assert_eq!(c.sizes, vec![784, 32, 10]);
        assert_eq!(c.eval_every, 500);
        assert_eq!(c.align_every, 500);
    }

    #[test]
    fn rejects_zero_steps_and_runs_one() {
        let (train_ds, test_ds) = small_data();
        let mut c = small_config(RuleKind::Vbp, 1);
        c.steps = 0;
        assert!(train(&c, &train_ds, &test_ds).is_err());
        c.steps = 1;
        let out = train(&c, &train_ds, &test_ds).unwrap();
        assert!(!out.metrics.is_empty());
        assert_eq!(out.metrics[0].step, 0);
    }

    #[test]
    fn training_is_deterministic() {
        let (train_ds, test_ds) = small_data();
        let c = small_config(RuleKind::ItdY, 25);
        let a = train(&c, &train_ds, &test_ds).unwrap();
        let b = train(&c, &train_ds, &test_ds).unwrap();
        assert_eq!(a.mlp, b.mlp);
        assert_eq!(a.metrics, b.metrics);
        let steps: Vec<u64> = a.metrics.iter().map(|r| r.step).collect();
        assert!(steps.windows(2).all(|w| w[0] < w[1]), "steps strictly increasing");
    }

    #[test]
    fn alignment_instrumentation_never_perturbs_training() {
        let (train_ds, test_ds) = small_data();
        let mut sparse = small_config(RuleKind::Fba, 20);
        sparse.align_every = 1_000_000_000;
        let mut dense = small_config(RuleKind::Fba, 20);
        dense.align_every = 1;
        let a = train(&sparse, &train_ds, &test_ds).unwrap();
        let b = train(&dense, &train_ds, &test_ds).unwrap();
        assert_eq!(a.mlp, b.mlp);
    }

    #[test]
    fn doubling_lr_exactly_doubles_the_per_step_change() {
        // Exact form: the computed update term (-lr * dW) doubles bitwise
        // when lr doubles, observable by stepping a zero-weight model.
        let sizes = [5usize, 4, 3];
        let seeded = init_mlp(&sizes, 3).unwrap();
        let fb = crate::rules::init_feedback(&sizes, 3).unwrap();
        let mut rng = Rng::substream(3, "lr-linearity");
        let x = Matrix::rand_uniform(&mut rng, 4, 5, 0.0, 1.0).unwrap();
        let mut t = vec![0.0; 12];
        for i in 0..4 {
            t[i * 3 + rng.next_below(3) as usize] = 1.0;
        }
        let targets = Matrix::from_vec(4, 3, t).unwrap();
        let trace = seeded.forward(&x).unwrap();
        let ts = crate::rules::TemporalState::fresh(&sizes).unwrap();
        let u = backward(RuleKind::Vbp, &seeded, &fb, &trace, &targets, &ts).unwrap();

        let zero = Mlp::from_parts(
            sizes.to_vec(),
            vec![Matrix::zeros(4, 5), Matrix::zeros(3, 4)],
            vec![Matrix::zeros(1, 4), Matrix::zeros(1, 3)],
        )
        .unwrap();
        let lr = 1e-3;
        let mut once = zero.clone();
        once.sgd_step(&u.dw, &u.db, lr).unwrap();
        let mut twice = zero.clone();
        twice.sgd_step(&u.dw, &u.db, 2.0 * lr).unwrap();
        for l in 0..2 {
            assert_eq!(twice.weights()[l], once.weights()[l].scale(2.0));
            assert_eq!(twice.biases()[l], once.biases()[l].scale(2.0));
        }

        // Through train() the change re-rounds when added to nonzero weights;
        // the doubling then holds to the last couple of ulps of the weights.
        let (train_ds, test_ds) = small_data();
        let base = small_config(RuleKind::Vbp, 1);
        let mut doubled = base.clone();
        doubled.lr = base.lr * 2.0;
        let w0 = init_mlp(&base.sizes, base.master_seed).unwrap();
        let a = train(&base, &train_ds, &test_ds).unwrap();
        let b = train(&doubled, &train_ds, &test_ds).unwrap();
        for l in 0..w0.layer_count() {
            let da = a.mlp.weights()[l].sub(&w0.weights()[l]).unwrap();
            let db = b.mlp.weights()[l].sub(&w0.weights()[l]).unwrap();
            let gap = db.sub(&da.scale(2.0)).unwrap();
            assert!(
                gap.data().iter().all(|&v| v.abs() <= 1e-16),
                "layer {l}"
            );
        }
    }

    #[test]
    fn evaluate_is_idempotent_and_analytic_on_zero_weights() {
        let (_, test_ds) = small_data();
        let zero = Mlp::from_parts(
            vec![8, 3],
            vec![Matrix::zeros(3, 8)],
            vec![Matrix::zeros(1, 3)],
        )
        .unwrap();
        let (l1, a1) = evaluate(&zero, &test_ds).unwrap();
        let (l2, a2) = evaluate(&zero, &test_ds).unwrap();
        assert_eq!(l1.to_bits(), l2.to_bits());
        assert_eq!(a1.to_bits(), a2.to_bits());
        assert!((l1 - 3.0f64.ln()).abs() < 1e-12, "uniform softmax loss");
    }

    #[test]
    fn compare_starts_all_rules_from_identical_weights() {
        let (train_ds, test_ds) = small_data();
        let c = small_config(RuleKind::Vbp, 6);
        let results = run_compare(&c, &train_ds, &test_ds);
        assert_eq!(results.len(), 4);
        let tags: Vec<&str> = results.iter().map(|(r, _)| r.tag()).collect();
        assert_eq!(tags, vec!["vbp", "fba", "itd-y", "itd-dy"]);
        // The step-0 row evaluates the untouched initial model, so identical
        // starting weights show up as bit-identical test metrics there.
        let vbp = results[0].1.as_ref().unwrap();
        for (_, out) in &results {
            let out = out.as_ref().unwrap();
            assert_eq!(out.metrics[0].test_loss.to_bits(), vbp.metrics[0].test_loss.to_bits());
            assert_eq!(out.metrics[0].test_acc.to_bits(), vbp.metrics[0].test_acc.to_bits());
            // and after training weights differ from init
            assert_ne!(out.mlp, init_mlp(&c.sizes, c.master_seed).unwrap());
        }
        // vbp differs from fba after step 1 for generic seeds
        let fba = results[1].1.as_ref().unwrap();
        assert_ne!(vbp.mlp, fba.mlp);
        assert_ne!(vbp.metrics, fba.metrics);
    }

    #[test]
    fn untrained_model_scores_at_chance_on_balanced_data() {
        let (_, test_ds) = synth_train_test(6, 200, 200, 784, 10).unwrap();
        let mlp = init_mlp(&[784, 32, 10], 6).unwrap();
        let (_, acc) = evaluate(&mlp, &test_ds).unwrap();
        assert!((acc - 0.10).abs() <= 0.05, "untrained accuracy {acc}");
    }

    #[test]
    fn gradcheck_passes_and_detects_corruption() {
        let report = gradcheck(0, 1e-5).unwrap();
        assert!(report.pass, "max_rel_err = {}", report.max_rel_err);
        assert!(report.max_rel_err <= 1e-6);

        // harness sensitivity: flip the sign of one layer's gradient
        let sizes = [4usize, 3, 2];
        let mlp = init_mlp(&sizes, 0).unwrap();
        let fb = init_feedback(&sizes, 0).unwrap();
        let mut rng = Rng::substream(0, "gradcheck");
        let x = Matrix::rand_uniform(&mut rng, 2, 4, -1.0, 1.0).unwrap();
        let mut t_data = vec![0.0; 4];
        for i in 0..2 {
            t_data[i * 2 + rng.next_below(2) as usize] = 1.0;
        }
        let targets = Matrix::from_vec(2, 2, t_data).unwrap();
        let trace = mlp.forward(&x).unwrap();
        let ts = TemporalState::fresh(&sizes).unwrap();
        let mut corrupted = backward(RuleKind::Vbp, &mlp, &fb, &trace, &targets, &ts).unwrap();
        corrupted.dw[0] = corrupted.dw[0].scale(-1.0);
        let numeric = numeric_gradients(&mlp, &x, &targets, 1e-5).unwrap();
        assert!(max_relative_error(&corrupted, &numeric) > 1e-6);
    }

    #[test]
    fn gradcheck_is_deterministic() {
        let a = gradcheck(9, 1e-5).unwrap();
        let b = gradcheck(9, 1e-5).unwrap();
        assert_eq!(a.max_rel_err.to_bits(), b.max_rel_err.to_bits());
    }

    #[test]
    fn larger_h_gives_larger_but_reported_error() {
        let fine = gradcheck(0, 1e-5).unwrap();
        let coarse = gradcheck(0, 1e-3).unwrap();
        assert!(coarse.max_rel_err > fine.max_rel_err);
    }
}
