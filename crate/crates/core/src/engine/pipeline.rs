use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::steps::{fit_data_step, fit_model, model_op, FittedModel, FittedTransform, StepError, StepKind, StepSpec};
use crate::tabular::{accuracy, seeded_rng, Dataset};

use super::{EngineError, Result};

/// Separator between step forms in a prefix key.
pub const PREFIX_SEPARATOR: char = '|';

/// Canonical key of a step sequence: each step's `name{k=v,...}` form joined
/// by `|`.
pub fn canonical_prefix(steps: &[StepSpec]) -> String {
    let parts: Vec<String> = steps.iter().map(StepSpec::canonical).collect();
    parts.join("|")
}

/// A cascade of data steps ending in exactly one model step.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    steps: Vec<StepSpec>,
}

impl Pipeline {
    pub fn new(steps: Vec<StepSpec>) -> Result<Self> {
        let Some((last, init)) = steps.split_last() else {
            return Err(EngineError::InvalidPipeline("no steps".into()));
        };
        if last.kind() != StepKind::ModelStep {
            return Err(EngineError::InvalidPipeline(format!("last step {last} is not a model step")));
        }
        if let Some(s) = init.iter().find(|s| s.kind() != StepKind::DataStep) {
            return Err(EngineError::InvalidPipeline(format!("model step {s} before the last position")));
        }
        Ok(Pipeline { steps })
    }

    pub fn steps(&self) -> &[StepSpec] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn key(&self) -> String {
        canonical_prefix(&self.steps)
    }

    /// Keys of every growing prefix, shortest first.
    pub fn prefix_keys(&self) -> Vec<String> {
        let mut keys = Vec::with_capacity(self.steps.len());
        let mut acc = String::new();
        for s in &self.steps {
            if !acc.is_empty() {
                acc.push(PREFIX_SEPARATOR);
            }
            acc.push_str(&s.canonical());
            keys.push(acc.clone());
        }
        keys
    }

    /// Fits every step on `train` in order; data-step statistics come from
    /// `train` only.
    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<FittedPipeline, StepError> {
        let (model_step, data_steps) = self.steps.split_last().expect("pipeline is nonempty");
        let mut transforms = Vec::with_capacity(data_steps.len());
        let mut data = train.clone();
        for s in data_steps {
            let t = fit_data_step(s, &data)?;
            data = t.transform(&data)?;
            transforms.push(t);
        }
        let model = fit_model(&model_op(model_step)?, &data, seed)?;
        Ok(FittedPipeline { transforms, model })
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl std::str::FromStr for Pipeline {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self> {
        let steps = s.split(PREFIX_SEPARATOR).map(str::parse).collect::<Result<Vec<StepSpec>, _>>()?;
        Pipeline::new(steps)
    }
}

/// Serialized as its canonical key.
impl Serialize for Pipeline {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for Pipeline {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    transforms: Vec<FittedTransform>,
    model: FittedModel,
}

impl FittedPipeline {
    pub fn predict(&self, x: &Dataset) -> Result<Vec<String>, StepError> {
        let mut data = x.clone();
        for t in &self.transforms {
            data = t.transform(&data)?;
        }
        self.model.predict(&data)
    }

    pub fn score(&self, x: &Dataset) -> Result<f64, StepError> {
        let predicted = self.predict(x)?;
        Ok(accuracy(&predicted, x.labels())?)
    }
}

/// Candidate steps per slot; the pipelines are the Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    slots: Vec<Vec<StepSpec>>,
}

impl SearchSpace {
    pub fn new(slots: Vec<Vec<StepSpec>>) -> Result<Self> {
        let last = slots.len().checked_sub(1).ok_or(EngineError::InvalidSpace("no slots".into()))?;
        for (i, slot) in slots.iter().enumerate() {
            if slot.is_empty() {
                return Err(EngineError::InvalidSpace(format!("slot {i} is empty")));
            }
            let want = if i == last { StepKind::ModelStep } else { StepKind::DataStep };
            if let Some(s) = slot.iter().find(|s| s.kind() != want) {
                return Err(EngineError::InvalidSpace(format!("slot {i}: {s} is a {:?}, expected {want:?}", s.kind())));
            }
            let mut keys: Vec<String> = slot.iter().map(StepSpec::canonical).collect();
            keys.sort();
            if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
                return Err(EngineError::InvalidSpace(format!("slot {i}: duplicate candidate {}", w[0])));
            }
        }
        Ok(SearchSpace { slots })
    }

    pub fn slots(&self) -> &[Vec<StepSpec>] {
        &self.slots
    }

    pub fn n_pipelines(&self) -> usize {
        self.slots.iter().map(Vec::len).product()
    }

    /// Parses `{"slots": [[{"name": ..., "params": {...}}, ...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            slots: Vec<Vec<StepSpec>>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        SearchSpace::new(raw.slots)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| EngineError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

/// Every pipeline of the space in odometer order (last slot fastest).
pub fn enumerate_pipelines(space: &SearchSpace) -> Vec<Pipeline> {
    let slots = space.slots();
    let mut out = Vec::with_capacity(space.n_pipelines());
    let mut idx = vec![0usize; slots.len()];
    loop {
        let steps = idx.iter().zip(slots).map(|(&i, slot)| slot[i].clone()).collect();
        out.push(Pipeline { steps });
        let mut pos = slots.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < slots[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `max(1, floor(fraction * N))` pipelines drawn without replacement: the
/// prefix of a seeded Fisher-Yates shuffle.
pub fn sample_pipelines(pipelines: &[Pipeline], fraction: f64, seed: u64) -> Result<Vec<Pipeline>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(EngineError::InvalidFraction(fraction));
    }
    if pipelines.is_empty() {
        return Err(EngineError::InvalidSpace("no pipelines to sample".into()));
    }
    let n = pipelines.len();
    // the epsilon absorbs products such as 0.29 * 100 = 28.999999999999996
    let take = ((fraction * n as f64 + 1e-9).floor() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeded_rng(seed);
    for i in 0..take {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }
    Ok(order[..take].iter().map(|&i| pipelines[i].clone()).collect())
}
