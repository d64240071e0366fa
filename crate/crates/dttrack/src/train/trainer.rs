//! The epoch-level training loop with schedules, balanced sampling, the
//! dual-branch step, and optional teacher transfer.

use std::fs;
use std::path::Path;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::autodiff::{backward, GradMap, OptimHyper, OptimState, ParamSet, Tape};
use crate::data::{balanced_sample, box_to_crop, crop_at, CropWindow, Dataset, Image};
use crate::error::{Error, Result};
use crate::loss::{make_gaussian_target, NormBox};
use crate::model::{forward, TrackerConfig, TrackerParams};
use crate::util::{split_seed, stream};

use super::config::DTConfig;
use super::losses::total_loss;
use super::mask::MaskSpec;
use super::teacher::{resample_reference, TeacherHandle};

/// One logged training step.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord {
    pub epoch: usize,
    pub step: usize,
    pub l_clean: f64,
    pub l_transfer: f64,
    pub l_align: f64,
    pub l_total: f64,
    pub lr: f64,
    pub mask_ratio: f64,
    pub lambda_transfer: f64,
}

/// The full per-step trace of a run.
#[derive(Clone, Debug, Default)]
pub struct TrainLog {
    pub steps: Vec<StepRecord>,
}

impl TrainLog {
    /// CSV with one row per step:
    /// epoch,step,L_clean,L_transfer,L_align,L_total,lr,mask_ratio,lambda_transfer
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from(
            "epoch,step,L_clean,L_transfer,L_align,L_total,lr,mask_ratio,lambda_transfer\n",
        );
        for r in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.epoch,
                r.step,
                r.l_clean,
                r.l_transfer,
                r.l_align,
                r.l_total,
                r.lr,
                r.mask_ratio,
                r.lambda_transfer
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Mean loss components per epoch.
    pub fn epoch_means(&self) -> Vec<(usize, f64, f64, f64, f64)> {
        let mut out = Vec::new();
        let mut epoch = usize::MAX;
        let (mut n, mut c, mut t, mut a, mut tot) = (0usize, 0.0, 0.0, 0.0, 0.0);
        for r in &self.steps {
            if r.epoch != epoch {
                if n > 0 {
                    out.push((epoch, c / n as f64, t / n as f64, a / n as f64, tot / n as f64));
                }
                epoch = r.epoch;
                (n, c, t, a, tot) = (0, 0.0, 0.0, 0.0, 0.0);
            }
            n += 1;
            c += r.l_clean;
            t += r.l_transfer;
            a += r.l_align;
            tot += r.l_total;
        }
        if n > 0 {
            out.push((epoch, c / n as f64, t / n as f64, a / n as f64, tot / n as f64));
        }
        out
    }
}

/// A trained model plus everything the run produced.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: TrackerParams,
    /// Trained adapter parameters, when a teacher with an adapter was used.
    pub adapter: Option<ParamSet>,
    pub log: TrainLog,
}

/// One (template, search, ground-truth) training example in crop units.
#[derive(Clone, Debug)]
pub struct TrainPair {
    pub template: Image,
    pub search: Image,
    pub gt: NormBox,
}

/// Draws one batch for (epoch, step), deterministically from the run seed.
/// Template and search frames come from one trajectory with a bounded frame
/// gap; the search-crop center is jittered so the target is not always
/// centered; occluded frames are resampled.
pub fn sample_batch(
    datasets: &[Dataset],
    cfg: &TrackerConfig,
    dt: &DTConfig,
    epoch: usize,
    step: usize,
) -> Result<Vec<TrainPair>> {
    let mut rng = ChaCha12Rng::seed_from_u64(split_seed(
        dt.seed,
        &[stream::BATCH, epoch as u64, step as u64],
    ));
    let mut batch = Vec::with_capacity(dt.batch_size);
    for _ in 0..dt.batch_size {
        let mut pair = None;
        for _attempt in 0..64 {
            let (d, s) = balanced_sample(datasets, dt.dataset_weights.as_deref(), &mut rng)?;
            let seq = &datasets[d].sequences[s];
            if seq.len() < 2 {
                continue;
            }
            let t0 = rng.random_range(0..seq.len() - 1);
            let gap_cap = dt.frame_gap_max.min(seq.len() - 1 - t0);
            let t1 = t0 + rng.random_range(1..=gap_cap);
            let gt = seq.boxes[t1];
            let box_side = ((gt.w * seq.canvas as f64) * (gt.h * seq.canvas as f64)).sqrt();
            let jitter = dt.center_jitter * box_side;
            let dx = rng.random_range(-jitter..=jitter);
            let dy = rng.random_range(-jitter..=jitter);
            let scale = rng.random_range(-dt.scale_jitter..=dt.scale_jitter).exp();
            if !seq.visible[t0] || !seq.visible[t1] {
                continue;
            }
            let template_window = CropWindow::around(&seq.boxes[t0], seq.canvas, dt.template_factor);
            let template = crop_at(
                &seq.frames[t0],
                seq.canvas,
                &template_window,
                cfg.template_resolution,
            );
            let mut search_window = CropWindow::around(&gt, seq.canvas, dt.search_factor);
            search_window.cx += dx;
            search_window.cy += dy;
            search_window.side *= scale;
            let search = crop_at(&seq.frames[t1], seq.canvas, &search_window, cfg.search_resolution);
            pair = Some(TrainPair {
                template,
                search,
                gt: box_to_crop(&gt, &search_window, seq.canvas),
            });
            break;
        }
        batch.push(pair.ok_or_else(|| {
            Error::Contract("could not sample a visible pair in 64 attempts".into())
        })?);
    }
    Ok(batch)
}

fn split_grads(grads: GradMap, student: &ParamSet, adapter: Option<&ParamSet>) -> (GradMap, GradMap) {
    let mut g_student = GradMap::default();
    let mut g_adapter = GradMap::default();
    for (name, g) in grads.iter() {
        if student.get(name).is_some() {
            g_student.insert(name.to_string(), g.to_vec());
        } else if adapter.is_some_and(|a| a.get(name).is_some()) {
            g_adapter.insert(name.to_string(), g.to_vec());
        }
    }
    (g_student, g_adapter)
}

/// Trains a student, optionally against a frozen teacher.
///
/// Per step: draw a balanced batch, sample one mask, run the clean branch
/// (and the masked branch when alignment is weighted, and the teacher when
/// transfer is weighted this epoch), assemble the weighted total, run
/// backward, and apply one optimizer update. Branches whose coefficient is
/// zero are skipped, so the degenerate configuration reduces bitwise to a
/// plain supervised loop. The teacher digest is verified unchanged at the
/// end.
pub fn train(
    cfg: &TrackerConfig,
    init: TrackerParams,
    teacher: Option<&TeacherHandle>,
    datasets: &[Dataset],
    dt: &DTConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    dt.validate()?;
    if teacher.is_none() && !dt.lambda_transfer.is_identically_zero() {
        return Err(Error::Contract(
            "no teacher given but the transfer schedule is not identically zero".into(),
        ));
    }
    if datasets.is_empty() {
        return Err(Error::Contract("training needs at least one dataset".into()));
    }

    let teacher_digest_before = teacher.map(TeacherHandle::digest);
    let teacher_vars = teacher.map(|t| t.params.set.as_constants());

    let mut params = init;
    let hyper = OptimHyper {
        weight_decay: dt.weight_decay,
        ..OptimHyper::default()
    };
    let mut student_state = OptimState::new(&params.set, hyper);

    let mut adapter_params: Option<ParamSet> = teacher
        .and_then(|t| t.adapter.as_ref())
        .map(|a| a.params.clone());
    let mut adapter_state = adapter_params.as_ref().map(|p| OptimState::new(p, hyper));

    let mut log = TrainLog::default();

    for epoch in 0..dt.total_epochs {
        let mask_ratio = dt.mask_ratio.value(epoch, dt.total_epochs)?;
        let lambda_transfer = dt.lambda_transfer.value(epoch, dt.total_epochs)?;
        let lambda_align = dt.lambda_align;
        let use_teacher = teacher.is_some() && lambda_transfer > 0.0;
        let use_align = lambda_align > 0.0;

        for step in 0..dt.steps_per_epoch {
            let lr = dt.lr_at_step(epoch, step);
            let batch = sample_batch(datasets, cfg, dt, epoch, step)?;
            let mask = MaskSpec::sample(
                cfg.search_tokens(),
                mask_ratio,
                split_seed(dt.seed, &[stream::MASK, epoch as u64, step as u64]),
            )?;
            let template_mask = if dt.mask_template {
                Some(MaskSpec::sample(
                    cfg.template_tokens(),
                    mask_ratio,
                    split_seed(dt.seed, &[stream::MASK, epoch as u64, step as u64, 1]),
                )?)
            } else {
                None
            };

            let tape = Tape::new();
            let vars = params.set.mount(&tape)?;
            let adapter_vars = if use_teacher {
                match &adapter_params {
                    Some(p) => Some(p.mount(&tape)?),
                    None => None,
                }
            } else {
                None
            };

            let mut batch_total: Option<crate::autodiff::DiffTensor> = None;
            let mut sums = super::losses::LossTerms::default();
            for pair in &batch {
                let clean_out = forward(&vars, cfg, &pair.template, &pair.search, None, None)?;
                let masked_out = if use_align {
                    Some(forward(
                        &vars,
                        cfg,
                        &pair.template,
                        &pair.search,
                        Some(mask.pattern()),
                        template_mask.as_ref().map(|m| m.pattern()),
                    )?)
                } else {
                    None
                };

                let teacher_out = if use_teacher {
                    let t = teacher.expect("use_teacher implies teacher");
                    let t_vars = teacher_vars.as_ref().expect("teacher vars prepared");
                    let t_template = resize_for(&pair.template, t.config.template_resolution);
                    let t_search = resize_for(&pair.search, t.config.search_resolution);
                    let out = forward(t_vars, &t.config, &t_template, &t_search, None, None)?;
                    Some(resample_reference(&out, cfg.grid())?)
                } else {
                    None
                };

                let target = make_gaussian_target(pair.gt, cfg.grid());
                let teacher_ctx = teacher_out.as_ref().map(|t_out| {
                    let adapter_ctx = teacher
                        .and_then(|t| t.adapter.as_ref())
                        .zip(adapter_vars.as_ref());
                    (t_out, adapter_ctx)
                });
                let (loss, terms) = total_loss(
                    &clean_out,
                    masked_out.as_ref(),
                    teacher_ctx,
                    &target,
                    pair.gt,
                    lambda_transfer,
                    lambda_align,
                    &dt.feature_layers,
                    &dt.loss_weights,
                    dt.detach_reference,
                )?;
                sums.clean += terms.clean;
                sums.transfer += terms.transfer;
                sums.align += terms.align;
                sums.total += terms.total;
                batch_total = Some(match batch_total {
                    None => loss,
                    Some(acc) => acc.add(&loss)?,
                });
            }

            let n = batch.len() as f64;
            let batch_loss = batch_total
                .expect("batch is non-empty")
                .scale(1.0 / n)?;
            let record = StepRecord {
                epoch,
                step,
                l_clean: sums.clean / n,
                l_transfer: sums.transfer / n,
                l_align: sums.align / n,
                l_total: sums.total / n,
                lr,
                mask_ratio,
                lambda_transfer,
            };
            if !batch_loss.is_finite() {
                return Err(Error::NumericFault {
                    site: format!("training step {step} of epoch {epoch}"),
                    detail: format!(
                        "non-finite loss: clean={} transfer={} align={} total={}",
                        record.l_clean, record.l_transfer, record.l_align, record.l_total
                    ),
                });
            }

            let grads = backward(&batch_loss)?;
            let (g_student, g_adapter) = split_grads(grads, &params.set, adapter_params.as_ref());
            student_state.step(&mut params.set, &g_student, lr)?;
            if use_teacher {
                if let (Some(ap), Some(astate)) = (&mut adapter_params, &mut adapter_state) {
                    adapter_state_step(astate, ap, &g_adapter, lr)?;
                }
            }
            log.steps.push(record);
        }
    }

    if let (Some(before), Some(t)) = (teacher_digest_before, teacher) {
        if t.digest() != before {
            return Err(Error::Contract(
                "teacher parameters changed during training".into(),
            ));
        }
    }

    Ok(TrainOutcome {
        params,
        adapter: adapter_params,
        log,
    })
}

fn adapter_state_step(
    state: &mut OptimState,
    params: &mut ParamSet,
    grads: &GradMap,
    lr: f64,
) -> Result<()> {
    state.step(params, grads, lr)
}

fn resize_for(img: &Image, res: usize) -> Image {
    img.resize(res, res)
}
