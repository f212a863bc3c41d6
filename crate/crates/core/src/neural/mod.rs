//! Character-level bi-LSTM-CRF sequence tagger.
//!
//! Characters are embedded, encoded by one LSTM per direction, and
//! projected to per-label scores that a linear-chain CRF normalizes
//! over whole label sequences ([`crf`]). Everything — including the
//! backward pass — is implemented here on plain `ndarray` types so the
//! gradients can be verified against finite differences
//! ([`loss_and_grads_with_plans`] with frozen [`DropoutPlan`]s).
//!
//! The sequence unit is a whole tweet: the words of the tweet joined by
//! space characters whose gold label is `WB`. A per-word mode
//! ([`Hyperparams::per_word`]) instead tags each word in isolation.
//! Structural label constraints are enforced by masked transition
//! scores, not decoding-time repair: see [`structural_transitions`].

mod crf;
mod lstm;

pub use crf::{
    crf_log_partition, structural_transitions, viterbi, START_STATE, STOP_STATE, TRANSITION_MASK,
};

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affixes::{decode_labels, encode_labels, AffixInventory, Label, Segmentation};
use crate::error::{Error, Result};
use crate::textnorm::TokenClass;

use lstm::{glorot, LstmBlock, LstmTrace};

/// Training and architecture configuration. Only momentum, batch size,
/// and dropout rate have externally fixed values; the rest are this
/// crate's defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Character embedding dimension.
    pub d: usize,
    /// Hidden units per direction.
    pub h: usize,
    /// SGD learning rate.
    pub lr: f64,
    /// SGD momentum coefficient.
    pub momentum: f64,
    /// Sequences per gradient step.
    pub batch_size: usize,
    /// Dropout rate on the embedding output and on each direction's
    /// hidden output (inverted scaling, so inference needs none).
    pub dropout: f64,
    /// Hard cap on training epochs.
    pub max_epochs: usize,
    /// Epochs without a new best dev accuracy before stopping.
    pub patience: usize,
    /// Seed for initialization, shuffling, and dropout.
    pub seed: u64,
    /// Include the diagonal cell-to-gate (peephole) connections.
    pub peepholes: bool,
    /// Tag each word as its own sequence instead of whole tweets with
    /// WB-labeled spaces.
    pub per_word: bool,
}

impl Default for Hyperparams {
    fn default() -> Hyperparams {
        Hyperparams {
            d: 50,
            h: 100,
            lr: 0.05,
            momentum: 0.9,
            batch_size: 50,
            dropout: 0.5,
            max_epochs: 300,
            patience: 10,
            seed: 0,
            peepholes: true,
            per_word: false,
        }
    }
}

impl Hyperparams {
    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.h == 0 {
            return Err(Error::validation("embedding and hidden dimensions must be at least 1"));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::validation(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::validation(format!("momentum must lie in [0,1), got {}", self.momentum)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::validation(format!("dropout must lie in [0,1), got {}", self.dropout)));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch size must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::validation("max_epochs must be at least 1"));
        }
        Ok(())
    }
}

/// Character-to-index mapping with a reserved trailing row for unknown
/// characters. Indices are assigned in character order, so the mapping
/// is a pure function of the character set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharVocab {
    map: BTreeMap<char, usize>,
}

impl CharVocab {
    /// Collects the distinct characters of `words`. The space character
    /// is always included (it carries the WB label in tweet mode).
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> CharVocab {
        let mut chars: std::collections::BTreeSet<char> = words.into_iter().flat_map(|w| w.chars()).collect();
        chars.insert(' ');
        CharVocab { map: chars.into_iter().enumerate().map(|(i, c)| (c, i)).collect() }
    }

    /// Rebuilds a vocabulary from explicit pairs (archive loading).
    /// Indices must be exactly 0..n in character order.
    pub fn from_pairs(pairs: &[(char, usize)]) -> Result<CharVocab> {
        let map: BTreeMap<char, usize> = pairs.iter().cloned().collect();
        if map.len() != pairs.len() {
            return Err(Error::validation("duplicate character in vocabulary"));
        }
        for (expect, (&c, &i)) in map.iter().enumerate().map(|(k, kv)| (k, kv)) {
            if i != expect {
                return Err(Error::validation(format!(
                    "vocabulary index for {c:?} is {i}, expected {expect}"
                )));
            }
        }
        Ok(CharVocab { map })
    }

    /// Index of `c`, or the unknown index for unseen characters.
    pub fn index(&self, c: char) -> usize {
        self.map.get(&c).copied().unwrap_or(self.map.len())
    }

    pub fn unknown_index(&self) -> usize {
        self.map.len()
    }

    /// Number of embedding rows: distinct characters plus the unknown row.
    pub fn rows(&self) -> usize {
        self.map.len() + 1
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn indices(&self, word: &str) -> Vec<usize> {
        word.chars().map(|c| self.index(c)).collect()
    }

    pub fn chars(&self) -> impl Iterator<Item = (char, usize)> + '_ {
        self.map.iter().map(|(&c, &i)| (c, i))
    }
}

/// All trained parameters of the tagger.
#[derive(Debug, Clone)]
pub struct TaggerParams {
    pub(crate) vocab: CharVocab,
    pub(crate) d: usize,
    pub(crate) h: usize,
    pub(crate) peepholes: bool,
    pub(crate) per_word: bool,
    pub(crate) embeddings: Array2<f64>, // rows × d, last row = unknown
    pub(crate) fwd: LstmBlock,
    pub(crate) bwd: LstmBlock,
    pub(crate) w_fy: Array2<f64>, // L × h
    pub(crate) w_by: Array2<f64>, // L × h
    pub(crate) b_y: Array1<f64>,  // L
    pub(crate) transitions: Array2<f64>, // (L+2) × (L+2)
}

const L: usize = Label::COUNT;

impl TaggerParams {
    pub fn vocab(&self) -> &CharVocab {
        &self.vocab
    }

    pub fn embedding_dim(&self) -> usize {
        self.d
    }

    pub fn hidden_dim(&self) -> usize {
        self.h
    }

    pub fn peepholes(&self) -> bool {
        self.peepholes
    }

    pub fn per_word(&self) -> bool {
        self.per_word
    }

    pub fn transitions(&self) -> &Array2<f64> {
        &self.transitions
    }

    /// Same shapes, all-zero values; the container used for gradients
    /// and momentum state.
    fn zeroed_like(&self) -> TaggerParams {
        TaggerParams {
            vocab: self.vocab.clone(),
            d: self.d,
            h: self.h,
            peepholes: self.peepholes,
            per_word: self.per_word,
            embeddings: Array2::zeros(self.embeddings.dim()),
            fwd: LstmBlock::zeros(self.d, self.h),
            bwd: LstmBlock::zeros(self.d, self.h),
            w_fy: Array2::zeros((L, self.h)),
            w_by: Array2::zeros((L, self.h)),
            b_y: Array1::zeros(L),
            transitions: Array2::zeros((L + 2, L + 2)),
        }
    }

    /// Visits every trainable value in a fixed order (embeddings,
    /// forward block, backward block, output projections, output bias,
    /// transitions). [`TaggerParams::param_vec`] and
    /// [`TaggerParams::set_param_vec`] are defined by this order.
    fn for_each(&self, f: &mut impl FnMut(f64)) {
        self.embeddings.iter().for_each(|&v| f(v));
        self.fwd.for_each(f);
        self.bwd.for_each(f);
        self.w_fy.iter().for_each(|&v| f(v));
        self.w_by.iter().for_each(|&v| f(v));
        self.b_y.iter().for_each(|&v| f(v));
        self.transitions.iter().for_each(|&v| f(v));
    }

    fn for_each_mut(&mut self, f: &mut impl FnMut(&mut f64)) {
        self.embeddings.iter_mut().for_each(&mut *f);
        self.fwd.for_each_mut(f);
        self.bwd.for_each_mut(f);
        self.w_fy.iter_mut().for_each(&mut *f);
        self.w_by.iter_mut().for_each(&mut *f);
        self.b_y.iter_mut().for_each(&mut *f);
        self.transitions.iter_mut().for_each(&mut *f);
    }

    /// Every parameter flattened in a fixed order, for numerical
    /// gradient verification and optimizer state.
    pub fn param_vec(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.for_each(&mut |v| out.push(v));
        out
    }

    /// Inverse of [`TaggerParams::param_vec`].
    pub fn set_param_vec(&mut self, values: &[f64]) -> Result<()> {
        let expected = self.param_vec().len();
        if values.len() != expected {
            return Err(Error::validation(format!(
                "parameter vector has {} values, expected {expected}",
                values.len()
            )));
        }
        let mut it = values.iter();
        self.for_each_mut(&mut |v| *v = *it.next().unwrap());
        Ok(())
    }

    fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each(&mut |v| ok &= v.is_finite());
        ok
    }
}

/// Fresh parameters: Glorot-uniform weights (each matrix bounded by
/// √(6/(fan_in+fan_out))), zero biases except the forget gates at 1.0,
/// and the structural transition matrix. Deterministic per seed; the
/// draw order is embeddings, forward block, backward block, output
/// projections.
pub fn init_params(vocab: CharVocab, hp: &Hyperparams) -> Result<TaggerParams> {
    hp.validate()?;
    if vocab.is_empty() {
        return Err(Error::validation("character vocabulary is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let embeddings = glorot(vocab.rows(), hp.d, &mut rng);
    let fwd = LstmBlock::init(hp.d, hp.h, hp.peepholes, &mut rng);
    let bwd = LstmBlock::init(hp.d, hp.h, hp.peepholes, &mut rng);
    let w_fy = glorot(L, hp.h, &mut rng);
    let w_by = glorot(L, hp.h, &mut rng);
    Ok(TaggerParams {
        vocab,
        d: hp.d,
        h: hp.h,
        peepholes: hp.peepholes,
        per_word: hp.per_word,
        embeddings,
        fwd,
        bwd,
        w_fy,
        w_by,
        b_y: Array1::zeros(L),
        transitions: structural_transitions(),
    })
}

/// One training sequence: character indices and their gold labels.
#[derive(Debug, Clone)]
pub struct Sample {
    pub chars: Vec<usize>,
    pub labels: Vec<Label>,
}

/// A single word as its own sequence (per-word mode).
pub fn word_sample(vocab: &CharVocab, seg: &Segmentation) -> Sample {
    Sample { chars: vocab.indices(&seg.surface()), labels: encode_labels(seg) }
}

/// A whole tweet as one sequence: words joined by spaces, each space
/// labeled `WB`.
pub fn tweet_sample(vocab: &CharVocab, words: &[(String, Segmentation)]) -> Result<Sample> {
    let mut sample = Sample { chars: Vec::new(), labels: Vec::new() };
    for (k, (word, seg)) in words.iter().enumerate() {
        if seg.surface() != *word {
            return Err(Error::validation(format!(
                "segmentation {:?} does not spell its word {word:?}",
                seg.to_plus_string()
            )));
        }
        if k > 0 {
            sample.chars.push(vocab.index(' '));
            sample.labels.push(Label::WB);
        }
        sample.chars.extend(vocab.indices(word));
        sample.labels.extend(encode_labels(seg));
    }
    Ok(sample)
}

/// Frozen inverted-dropout masks for one sequence: entries are 0 or
/// 1/keep-rate. Fixing the plan makes the loss a deterministic,
/// differentiable function of the parameters, which is what the
/// finite-difference gradient checks rely on.
#[derive(Debug, Clone)]
pub struct DropoutPlan {
    emb: Array2<f64>, // T × d
    fwd: Array2<f64>, // T × h
    bwd: Array2<f64>, // T × h
}

impl DropoutPlan {
    /// All-ones masks: dropout disabled.
    pub fn identity(t_len: usize, d: usize, h: usize) -> DropoutPlan {
        DropoutPlan {
            emb: Array2::from_elem((t_len, d), 1.0),
            fwd: Array2::from_elem((t_len, h), 1.0),
            bwd: Array2::from_elem((t_len, h), 1.0),
        }
    }

    /// Bernoulli masks at the given drop rate, scaled by 1/keep. Draw
    /// order: embedding mask row-major, then forward, then backward.
    pub fn sample(t_len: usize, d: usize, h: usize, rate: f64, rng: &mut ChaCha8Rng) -> DropoutPlan {
        if rate <= 0.0 {
            return DropoutPlan::identity(t_len, d, h);
        }
        let keep = 1.0 - rate;
        let mut draw = || if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 };
        DropoutPlan {
            emb: Array2::from_shape_fn((t_len, d), |_| draw()),
            fwd: Array2::from_shape_fn((t_len, h), |_| draw()),
            bwd: Array2::from_shape_fn((t_len, h), |_| draw()),
        }
    }

    fn fits(&self, t_len: usize, d: usize, h: usize) -> bool {
        self.emb.dim() == (t_len, d) && self.fwd.dim() == (t_len, h) && self.bwd.dim() == (t_len, h)
    }
}

struct EmissionTrace {
    fwd: LstmTrace,
    bwd: LstmTrace, // over the reversed inputs
    hf_drop: Vec<Array1<f64>>,
    hb_drop: Vec<Array1<f64>>, // aligned to original positions
}

fn emissions_traced(
    params: &TaggerParams,
    chars: &[usize],
    plan: &DropoutPlan,
) -> (Array2<f64>, EmissionTrace) {
    let t_len = chars.len();
    let xs: Vec<Array1<f64>> = chars
        .iter()
        .enumerate()
        .map(|(t, &ix)| &params.embeddings.row(ix).to_owned() * &plan.emb.row(t))
        .collect();
    let xs_rev: Vec<Array1<f64>> = xs.iter().rev().cloned().collect();
    let fwd = params.fwd.forward(xs, params.peepholes);
    let bwd = params.bwd.forward(xs_rev, params.peepholes);
    let mut em = Array2::zeros((t_len, L));
    let mut hf_drop = Vec::with_capacity(t_len);
    let mut hb_drop = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let hf = &fwd.h[t] * &plan.fwd.row(t);
        let hb = &bwd.h[t_len - 1 - t] * &plan.bwd.row(t);
        let y = params.w_fy.dot(&hf) + params.w_by.dot(&hb) + &params.b_y;
        em.row_mut(t).assign(&y);
        hf_drop.push(hf);
        hb_drop.push(hb);
    }
    (em, EmissionTrace { fwd, bwd, hf_drop, hb_drop })
}

/// Per-position label scores (T×5) at inference: no dropout.
pub fn emissions(params: &TaggerParams, chars: &[usize]) -> Array2<f64> {
    let plan = DropoutPlan::identity(chars.len(), params.d, params.h);
    emissions_traced(params, chars, &plan).0
}

fn backprop_emissions(
    params: &TaggerParams,
    chars: &[usize],
    trace: &EmissionTrace,
    plan: &DropoutPlan,
    d_em: &Array2<f64>,
    grads: &mut TaggerParams,
) {
    let t_len = chars.len();
    let mut d_hf = vec![Array1::zeros(params.h); t_len];
    let mut d_hb_rev = vec![Array1::zeros(params.h); t_len];
    for t in 0..t_len {
        let dy = d_em.row(t).to_owned();
        for (r, &dv) in dy.iter().enumerate() {
            if dv != 0.0 {
                grads.w_fy.row_mut(r).scaled_add(dv, &trace.hf_drop[t]);
                grads.w_by.row_mut(r).scaled_add(dv, &trace.hb_drop[t]);
            }
        }
        grads.b_y += &dy;
        d_hf[t] = &params.w_fy.t().dot(&dy) * &plan.fwd.row(t);
        d_hb_rev[t_len - 1 - t] = &params.w_by.t().dot(&dy) * &plan.bwd.row(t);
    }
    let d_x_f = params.fwd.backward(&trace.fwd, &d_hf, params.peepholes, &mut grads.fwd);
    let d_x_b = params.bwd.backward(&trace.bwd, &d_hb_rev, params.peepholes, &mut grads.bwd);
    for t in 0..t_len {
        let dx = (&d_x_f[t] + &d_x_b[t_len - 1 - t]) * &plan.emb.row(t);
        grads.embeddings.row_mut(chars[t]).scaled_add(1.0, &dx);
    }
}

/// Mean CRF negative log-likelihood of the batch and its gradients,
/// with explicitly provided dropout plans (one per sample). With the
/// plans held fixed, every gradient component matches central finite
/// differences.
pub fn loss_and_grads_with_plans(
    params: &TaggerParams,
    batch: &[Sample],
    plans: &[DropoutPlan],
) -> Result<(f64, TaggerParams)> {
    if batch.is_empty() {
        return Err(Error::validation("training batch is empty"));
    }
    if plans.len() != batch.len() {
        return Err(Error::validation(format!(
            "{} dropout plans for {} samples",
            plans.len(),
            batch.len()
        )));
    }
    for (i, sample) in batch.iter().enumerate() {
        if sample.chars.is_empty() {
            return Err(Error::validation(format!("sample {i} is empty")));
        }
        if sample.labels.len() != sample.chars.len() {
            return Err(Error::validation(format!(
                "sample {i}: {} characters but {} labels",
                sample.chars.len(),
                sample.labels.len()
            )));
        }
        if let Some(&bad) = sample.chars.iter().find(|&&ix| ix >= params.embeddings.nrows()) {
            return Err(Error::validation(format!(
                "sample {i}: character index {bad} outside the embedding table"
            )));
        }
        if !plans[i].fits(sample.chars.len(), params.d, params.h) {
            return Err(Error::validation(format!("sample {i}: dropout plan shape mismatch")));
        }
    }

    let scale = 1.0 / batch.len() as f64;
    let mut grads = params.zeroed_like();
    let mut total = 0.0;
    for (sample, plan) in batch.iter().zip(plans) {
        let (em, trace) = emissions_traced(params, &sample.chars, plan);
        let gold: Vec<usize> = sample.labels.iter().map(|l| l.index()).collect();
        let (loss, mut d_em, d_trans) = crf::loss_and_crf_grads(&em, &params.transitions, &gold);
        total += loss * scale;
        d_em *= scale;
        grads.transitions.scaled_add(scale, &d_trans);
        backprop_emissions(params, &sample.chars, &trace, plan, &d_em, &mut grads);
    }
    Ok((total, grads))
}

/// Like [`loss_and_grads_with_plans`], sampling fresh dropout plans
/// from `seed` when `training` is set and using no dropout otherwise.
pub fn loss_and_grads(
    params: &TaggerParams,
    batch: &[Sample],
    hp: &Hyperparams,
    training: bool,
    seed: u64,
) -> Result<(f64, TaggerParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plans: Vec<DropoutPlan> = batch
        .iter()
        .map(|s| {
            if training {
                DropoutPlan::sample(s.chars.len(), params.d, params.h, hp.dropout, &mut rng)
            } else {
                DropoutPlan::identity(s.chars.len(), params.d, params.h)
            }
        })
        .collect();
    loss_and_grads_with_plans(params, batch, &plans)
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone)]
pub struct TrainLog {
    /// Epochs actually executed (≤ max_epochs).
    pub epochs_run: usize,
    /// 1-based epoch whose parameters were returned.
    pub best_epoch: usize,
    /// Dev word accuracy after each epoch.
    pub dev_accuracy: Vec<f64>,
}

/// Trains a tagger by minibatch SGD with momentum, evaluating dev word
/// accuracy after every epoch; keeps the parameters of the best dev
/// epoch and stops once `patience` consecutive epochs bring no strict
/// improvement (or at `max_epochs`). Each tweet is a slice of
/// `(word, gold)` pairs; only word tokens belong in it. Deterministic
/// given `hp.seed`.
pub fn train_tagger(
    train: &[Vec<(String, Segmentation)>],
    dev: &[Vec<(String, Segmentation)>],
    inv: &AffixInventory,
    hp: &Hyperparams,
) -> Result<(TaggerParams, TrainLog)> {
    hp.validate()?;
    if train.iter().all(|t| t.is_empty()) {
        return Err(Error::validation("training corpus has no words"));
    }
    if dev.iter().all(|t| t.is_empty()) {
        return Err(Error::validation("development corpus has no words"));
    }
    let vocab = CharVocab::from_words(
        train.iter().flat_map(|tweet| tweet.iter().map(|(w, _)| w.as_str())),
    );
    let mut samples: Vec<Sample> = Vec::new();
    for tweet in train.iter().filter(|t| !t.is_empty()) {
        if hp.per_word {
            for (word, seg) in tweet {
                if seg.surface() != *word {
                    return Err(Error::validation(format!(
                        "segmentation {:?} does not spell its word {word:?}",
                        seg.to_plus_string()
                    )));
                }
                samples.push(word_sample(&vocab, seg));
            }
        } else {
            samples.push(tweet_sample(&vocab, tweet)?);
        }
    }

    let mut params = init_params(vocab, hp)?;
    let mut velocity = params.zeroed_like();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut best = params.clone();
    let mut best_acc = f64::NEG_INFINITY;
    let mut log = TrainLog { epochs_run: 0, best_epoch: 0, dev_accuracy: Vec::new() };
    let mut stale = 0usize;
    for epoch in 1..=hp.max_epochs {
        samples.shuffle(&mut rng);
        for chunk in samples.chunks(hp.batch_size) {
            let plans: Vec<DropoutPlan> = chunk
                .iter()
                .map(|s| DropoutPlan::sample(s.chars.len(), hp.d, hp.h, hp.dropout, &mut rng))
                .collect();
            let (loss, grads) = loss_and_grads_with_plans(&params, chunk, &plans)?;
            if !loss.is_finite() {
                return Err(Error::Train(format!("non-finite loss at epoch {epoch}")));
            }
            let g = grads.param_vec();
            let mut k = 0;
            velocity.for_each_mut(&mut |v| {
                *v = hp.momentum * *v - hp.lr * g[k];
                k += 1;
            });
            let step = velocity.param_vec();
            let mut k = 0;
            params.for_each_mut(&mut |p| {
                *p += step[k];
                k += 1;
            });
        }
        if !params.all_finite() {
            return Err(Error::Train(format!("parameters diverged at epoch {epoch}")));
        }
        let acc = word_accuracy(&params, dev, inv);
        log.dev_accuracy.push(acc);
        log.epochs_run = epoch;
        if acc > best_acc {
            best_acc = acc;
            best = params.clone();
            log.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale > hp.patience {
                break;
            }
        }
    }
    Ok((best, log))
}

/// Fraction of words whose predicted split equals the gold split.
pub fn word_accuracy(
    params: &TaggerParams,
    corpus: &[Vec<(String, Segmentation)>],
    inv: &AffixInventory,
) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    for tweet in corpus {
        if tweet.is_empty() {
            continue;
        }
        let words: Vec<String> = tweet.iter().map(|(w, _)| w.clone()).collect();
        let preds = tag_words(params, &words, inv);
        for ((_, gold), pred) in tweet.iter().zip(&preds) {
            total += 1;
            if gold.same_split(pred) {
                correct += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

/// Tags the words of one tweet. In tweet mode the words form a single
/// sequence joined by spaces whose emissions are pinned to WB (and WB
/// is pinned away from every non-space position); in per-word mode each
/// word is tagged independently with WB masked off entirely. Either
/// way, every decoded label sequence is structurally valid by
/// construction.
pub fn tag_words(params: &TaggerParams, words: &[String], inv: &AffixInventory) -> Vec<Segmentation> {
    if params.per_word {
        return words.iter().map(|w| tag_single(params, w, inv)).collect();
    }
    let live: Vec<usize> = (0..words.len()).filter(|&i| !words[i].is_empty()).collect();
    let mut out: Vec<Segmentation> =
        words.iter().map(|w| Segmentation::unsegmented(w)).collect();
    if live.is_empty() {
        return out;
    }
    let mut chars: Vec<usize> = Vec::new();
    let mut spans = Vec::with_capacity(live.len());
    let mut spaces = Vec::new();
    for (k, &i) in live.iter().enumerate() {
        if k > 0 {
            spaces.push(chars.len());
            chars.push(params.vocab.index(' '));
        }
        let start = chars.len();
        chars.extend(params.vocab.indices(&words[i]));
        spans.push((i, start, chars.len() - start));
    }
    let mut em = emissions(params, &chars);
    let wb = Label::WB.index();
    for t in 0..em.nrows() {
        em[[t, wb]] = TRANSITION_MASK;
    }
    for &t in &spaces {
        for j in 0..L {
            em[[t, j]] = if j == wb { 0.0 } else { TRANSITION_MASK };
        }
    }
    let path = viterbi(&em, &params.transitions);
    for &(i, start, len) in &spans {
        let decoded = decode_labels(&words[i], &path[start..start + len], inv)
            .expect("masked Viterbi yields per-word label runs without WB");
        out[i] = decoded.seg;
    }
    out
}

fn tag_single(params: &TaggerParams, word: &str, inv: &AffixInventory) -> Segmentation {
    if word.is_empty() {
        return Segmentation::unsegmented(word);
    }
    let chars = params.vocab.indices(word);
    let mut em = emissions(params, &chars);
    for t in 0..em.nrows() {
        em[[t, Label::WB.index()]] = TRANSITION_MASK;
    }
    let path = viterbi(&em, &params.transitions);
    decode_labels(word, &path, inv)
        .expect("masked Viterbi yields one label per character and no WB")
        .seg
}

/// Segments a classified token stream: word tokens are tagged (jointly
/// in tweet mode), everything else passes through unsegmented.
pub fn tag(
    params: &TaggerParams,
    tokens: &[(String, TokenClass)],
    inv: &AffixInventory,
) -> Vec<Segmentation> {
    let word_pos: Vec<usize> = (0..tokens.len())
        .filter(|&i| tokens[i].1 == TokenClass::Word && !tokens[i].0.is_empty())
        .collect();
    let words: Vec<String> = word_pos.iter().map(|&i| tokens[i].0.clone()).collect();
    let segs = tag_words(params, &words, inv);
    let mut out: Vec<Segmentation> =
        tokens.iter().map(|(w, _)| Segmentation::unsegmented(w)).collect();
    for (seg, &i) in segs.into_iter().zip(&word_pos) {
        out[i] = seg;
    }
    out
}
