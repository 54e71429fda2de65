//! The training loops: single-direction training with early stopping, and
//! joint fine-tuning of a forward/backward pair against the combined output.

use super::backprop::{accumulate_from_deltas, add_l2, backward, forward_traced, TrainPass};
use super::{lr_schedule, sgd_step, EarlyStopper, Gradients, TrainConfig};
use crate::corpus::{Corpus, EncodedSentence, SequenceExample, VocabSet};
use crate::decode::{
    combine_bidirectional, normalized, predict, predict_bidirectional, BidirModel, Direction,
};
use crate::embed::EmbeddingTable;
use crate::nets::{ModelParams, NetConfig, VocabDims};
use crate::numkit::{Rng, Vector};
use crate::{Error, Result};

/// Pretrained embedding tables to start from; `None` keeps the Xavier
/// initialization.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingInit {
    pub words: Option<EmbeddingTable>,
    pub labels: Option<EmbeddingTable>,
}

impl EmbeddingInit {
    pub fn random() -> EmbeddingInit {
        EmbeddingInit::default()
    }
}

/// One line of training history.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

impl EpochRecord {
    /// Machine-readable history line.
    pub fn line(&self) -> String {
        format!(
            "epoch={} lr={:.6} loss={:.6} dev_acc={:.6}",
            self.epoch, self.lr, self.train_loss, self.dev_accuracy
        )
    }
}

/// Injection points for tests and the command line: a replacement for the
/// dev evaluation, and a per-epoch observer.
#[derive(Default)]
pub struct TrainHooks<'a> {
    pub eval: Option<&'a mut dyn FnMut(&ModelParams, usize) -> f64>,
    pub on_epoch: Option<&'a mut dyn FnMut(&EpochRecord)>,
}

fn check_embedding(
    table: &EmbeddingTable,
    rows: usize,
    dim: usize,
    what: &str,
) -> Result<()> {
    if table.vocab_size() != rows || table.dim() != dim {
        return Err(Error::Config(format!(
            "pretrained {what} embeddings are {}x{}, model needs {rows}x{dim}",
            table.vocab_size(),
            table.dim(),
        )));
    }
    Ok(())
}

fn dev_pairs(
    dev: &[SequenceExample],
    vocabs: &VocabSet,
    direction: Direction,
) -> Vec<(EncodedSentence, Vec<String>)> {
    dev.iter()
        .map(|s| {
            let oriented = match direction {
                Direction::Forward => s.clone(),
                Direction::Backward => s.reversed(),
            };
            let gold = oriented.labels().iter().map(|l| l.to_string()).collect();
            (vocabs.encode_tokens(&oriented), gold)
        })
        .collect()
}

fn dev_accuracy(
    params: &ModelParams,
    pairs: &[(EncodedSentence, Vec<String>)],
    vocabs: &VocabSet,
) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    for (enc, gold) in pairs {
        let p = predict(enc, params);
        for (idx, g) in p.labels.iter().zip(gold) {
            if vocabs.labels.item(*idx) == g {
                hits += 1;
            }
        }
        total += gold.len();
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Trains one model. Sentences are visited in a freshly seeded shuffled
/// order each epoch; the parameters achieving the best dev accuracy are
/// returned (the earliest epoch on ties), and training stops once the score
/// has not improved for `patience` consecutive epochs. `Direction::Backward`
/// trains on reversed sentences.
pub fn train_model(
    train: &Corpus,
    dev: &[SequenceExample],
    net: &NetConfig,
    tc: &TrainConfig,
    direction: Direction,
    init: &EmbeddingInit,
) -> Result<(ModelParams, Vec<EpochRecord>)> {
    train_model_hooked(train, dev, net, tc, direction, init, &mut TrainHooks::default())
}

pub fn train_model_hooked(
    train: &Corpus,
    dev: &[SequenceExample],
    net: &NetConfig,
    tc: &TrainConfig,
    direction: Direction,
    init: &EmbeddingInit,
    hooks: &mut TrainHooks<'_>,
) -> Result<(ModelParams, Vec<EpochRecord>)> {
    tc.validate()?;
    if net.use_classes && !train.has_classes {
        return Err(Error::Config(
            "the configuration uses word classes but the corpus has none".into(),
        ));
    }
    let vocabs = &train.vocabs;
    let encoded: Vec<EncodedSentence> = match direction {
        Direction::Forward => train.encode_all()?,
        Direction::Backward => train
            .examples
            .iter()
            .map(|s| vocabs.encode_train(&s.reversed()))
            .collect::<Result<_>>()?,
    };
    let pairs = dev_pairs(dev, vocabs, direction);
    if pairs.is_empty() && hooks.eval.is_none() {
        return Err(Error::Data("development set is empty".into()));
    }

    let dims = VocabDims::of(vocabs);
    let mut init_rng = Rng::stream(tc.seed, 0);
    let mut params = ModelParams::init(net.clone(), dims, &mut init_rng)?;
    if let Some(words) = &init.words {
        check_embedding(words, dims.words, net.embed_dim, "word")?;
        params.word_embed = words.clone();
    }
    if let Some(labels) = &init.labels {
        if params.label_embed.is_some() {
            check_embedding(labels, dims.labels, net.embed_dim, "label")?;
            params.label_embed = Some(labels.clone());
        }
    }

    let pass = TrainPass {
        teacher_forcing: tc.teacher_forcing,
        p_drop_embed: tc.p_drop_embed,
        p_drop_hidden: tc.p_drop_hidden,
    };
    let mut velocity = Gradients::zeros_like(&params);
    let mut dropout_rng = Rng::stream(tc.seed, 1);
    let mut stopper = EarlyStopper::new(tc.patience);
    let mut best = params.clone();
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..encoded.len()).collect();

    for epoch in 1..=tc.epochs {
        let lr = lr_schedule(tc.learning_rate, tc.epochs, epoch - 1);
        Rng::stream(tc.seed, 100 + epoch as u64).shuffle(&mut order);
        let mut total_loss = 0.0;
        for &i in &order {
            let (grads, loss) =
                backward(&encoded[i], &params, tc.lambda, &pass, Some(&mut dropout_rng))?;
            sgd_step(&mut params, &grads, &mut velocity, lr, tc.momentum);
            total_loss += loss;
        }
        let dev_acc = match hooks.eval.as_mut() {
            Some(f) => f(&params, epoch),
            None => dev_accuracy(&params, &pairs, vocabs),
        };
        let record = EpochRecord {
            epoch,
            lr,
            train_loss: total_loss / encoded.len() as f64,
            dev_accuracy: dev_acc,
        };
        if let Some(f) = hooks.on_epoch.as_mut() {
            f(&record);
        }
        history.push(record);
        if stopper.observe(epoch, dev_acc) {
            best = params.clone();
        }
        if stopper.should_stop() {
            break;
        }
    }
    Ok((best, history))
}

fn bidir_dev_accuracy(
    model: &BidirModel,
    pairs: &[(EncodedSentence, Vec<String>)],
    vocabs: &VocabSet,
) -> Result<f64> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for (enc, gold) in pairs {
        let p = predict_bidirectional(enc, model)?;
        for (idx, g) in p.labels.iter().zip(gold) {
            if vocabs.labels.item(*idx) == g {
                hits += 1;
            }
        }
        total += gold.len();
    }
    Ok(if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    })
}

/// Joint fine-tuning of a trained forward/backward pair against their
/// combined output. Epoch 0 of the history is the untouched initialization,
/// and the pair returned is the best the dev set ever saw, so fine-tuning
/// never hands back something worse than its starting point. With
/// `fine_tune` false the pair is only evaluated and returned.
pub fn train_bidirectional(
    fwd: ModelParams,
    bwd: ModelParams,
    train: &Corpus,
    dev: &[SequenceExample],
    tc: &TrainConfig,
    fine_tune: bool,
) -> Result<(BidirModel, Vec<EpochRecord>)> {
    tc.validate()?;
    let vocabs = &train.vocabs;
    let dims = VocabDims::of(vocabs);
    for (model, name) in [(&fwd, "forward"), (&bwd, "backward")] {
        if model.out_size() != dims.labels || model.word_embed.vocab_size() != dims.words {
            return Err(Error::Config(format!(
                "{name} model does not match the corpus vocabularies"
            )));
        }
    }
    let mut model = BidirModel::new(fwd, bwd)?;
    let fwd_pairs = dev_pairs(dev, vocabs, Direction::Forward);
    let init_score = bidir_dev_accuracy(&model, &fwd_pairs, vocabs)?;
    let mut history = vec![EpochRecord {
        epoch: 0,
        lr: 0.0,
        train_loss: 0.0,
        dev_accuracy: init_score,
    }];
    let mut stopper = EarlyStopper::new(tc.patience);
    stopper.observe(0, init_score);
    let mut best = model.clone();

    if fine_tune {
        let encoded_f = train.encode_all()?;
        let encoded_b: Vec<EncodedSentence> = encoded_f.iter().map(|e| e.reversed()).collect();
        let pass = TrainPass {
            teacher_forcing: tc.teacher_forcing,
            p_drop_embed: tc.p_drop_embed,
            p_drop_hidden: tc.p_drop_hidden,
        };
        let mut velocity_f = Gradients::zeros_like(&model.forward);
        let mut velocity_b = Gradients::zeros_like(&model.backward);
        let mut dropout_rng = Rng::stream(tc.seed, 2);
        let mut order: Vec<usize> = (0..encoded_f.len()).collect();

        for epoch in 1..=tc.epochs {
            let lr = lr_schedule(tc.learning_rate, tc.epochs, epoch - 1);
            Rng::stream(tc.seed, 200 + epoch as u64).shuffle(&mut order);
            let mut total_loss = 0.0;
            for &i in &order {
                let traces_f =
                    forward_traced(&encoded_f[i], &model.forward, &pass, Some(&mut dropout_rng))?;
                let traces_b =
                    forward_traced(&encoded_b[i], &model.backward, &pass, Some(&mut dropout_rng))?;
                let len = traces_f.len();
                let mut deltas_f = Vec::with_capacity(len);
                let mut deltas_b = vec![Vector::new(); len];
                for t in 0..len {
                    let combined =
                        combine_bidirectional(&traces_f[t].probs, &traces_b[len - 1 - t].probs)?;
                    let norm = normalized(&combined);
                    let gold = traces_f[t].gold;
                    total_loss += -norm[gold].max(1e-300).ln();
                    // d(-log normalized_combined[gold])/d(logits) of either
                    // direction is (combined - onehot)/2
                    let mut dz: Vector = norm.iter().map(|p| 0.5 * p).collect();
                    dz[gold] -= 0.5;
                    deltas_b[len - 1 - t] = dz.clone();
                    deltas_f.push(dz);
                }
                let mut grads_f = Gradients::zeros_like(&model.forward);
                accumulate_from_deltas(&model.forward, &traces_f, &deltas_f, &mut grads_f);
                total_loss += add_l2(&model.forward, tc.lambda, &mut grads_f);
                let mut grads_b = Gradients::zeros_like(&model.backward);
                accumulate_from_deltas(&model.backward, &traces_b, &deltas_b, &mut grads_b);
                total_loss += add_l2(&model.backward, tc.lambda, &mut grads_b);
                sgd_step(&mut model.forward, &grads_f, &mut velocity_f, lr, tc.momentum);
                sgd_step(&mut model.backward, &grads_b, &mut velocity_b, lr, tc.momentum);
            }
            let dev_acc = bidir_dev_accuracy(&model, &fwd_pairs, vocabs)?;
            history.push(EpochRecord {
                epoch,
                lr,
                train_loss: total_loss / encoded_f.len() as f64,
                dev_accuracy: dev_acc,
            });
            if stopper.observe(epoch, dev_acc) {
                best = model.clone();
            }
            if stopper.should_stop() {
                break;
            }
        }
    }
    Ok((best, history))
}
