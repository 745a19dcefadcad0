//! CSV ingestion driven by dataset recipes.
//!
//! A recipe names the feature columns, the protected column, optional
//! per-feature scaling and an optional seeded subsample. Recipes are TOML:
//!
//! ```toml
//! name = "adult"
//! data = "../data/adult.csv"          # optional, relative to the recipe file
//! feature_columns = ["age", "fnlwgt"]
//! protected_column = "sex"
//! scaling = "none"                    # or "min-max", "standard"
//! delimiter = ","                     # optional
//! exclude_protected = ["unknown"]     # optional, rows dropped before use
//! interval_columns = []               # optional, "[a-b)" cells read as midpoints
//!
//! [subsample]                         # optional
//! count = 5000
//! seed = 7
//! ```

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    #[default]
    None,
    MinMax,
    /// Zero mean, unit population variance.
    Standard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subsample {
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub name: String,
    /// CSV location; relative paths resolve against the recipe file.
    #[serde(default)]
    pub data: Option<PathBuf>,
    pub feature_columns: Vec<String>,
    pub protected_column: String,
    #[serde(default)]
    pub scaling: Scaling,
    #[serde(default)]
    pub subsample: Option<Subsample>,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default)]
    pub exclude_protected: Vec<String>,
    #[serde(default)]
    pub interval_columns: Vec<String>,
}

fn default_delimiter() -> String {
    ",".to_string()
}

impl Recipe {
    pub fn new(name: &str, feature_columns: &[&str], protected_column: &str) -> Result<Self> {
        let recipe = Self {
            name: name.to_string(),
            data: None,
            feature_columns: feature_columns.iter().map(|s| s.to_string()).collect(),
            protected_column: protected_column.to_string(),
            scaling: Scaling::None,
            subsample: None,
            delimiter: default_delimiter(),
            exclude_protected: Vec::new(),
            interval_columns: Vec::new(),
        };
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let recipe: Recipe = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        recipe.validate()?;
        Ok(recipe)
    }

    /// Reads a recipe file and resolves its `data` path against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut recipe = Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let (Some(data), Some(dir)) = (&recipe.data, path.parent()) {
            if data.is_relative() {
                recipe.data = Some(dir.join(data));
            }
        }
        Ok(recipe)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(Error::Config("recipe has no feature columns".into()));
        }
        if self.feature_columns.contains(&self.protected_column) {
            return Err(Error::Config(format!(
                "protected column `{}` is also listed as a feature",
                self.protected_column
            )));
        }
        if self.delimiter.len() != 1 {
            return Err(Error::Config(format!(
                "delimiter must be a single ASCII character, got `{}`",
                self.delimiter
            )));
        }
        if let Some(sub) = &self.subsample {
            if sub.count == 0 {
                return Err(Error::Config("subsample.count must be positive".into()));
            }
        }
        for c in &self.interval_columns {
            if !self.feature_columns.contains(c) {
                return Err(Error::Config(format!(
                    "interval column `{c}` is not a feature column"
                )));
            }
        }
        Ok(())
    }

    pub fn with_subsample(mut self, count: usize, seed: u64) -> Self {
        self.subsample = Some(Subsample { count, seed });
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = scaling;
        self
    }
}

/// Loads the CSV at `path` as described by `recipe`.
pub fn load_csv(path: &Path, recipe: &Recipe) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(file), recipe)
}

/// Loads the CSV the recipe's `data` entry points at.
pub fn load_recipe_data(recipe: &Recipe) -> Result<Dataset> {
    let path = recipe
        .data
        .as_deref()
        .ok_or_else(|| Error::Config(format!("recipe `{}` has no data path", recipe.name)))?;
    load_csv(path, recipe)
}

/// Parses CSV text with a header row into a dataset.
pub fn read_dataset<R: Read>(reader: R, recipe: &Recipe) -> Result<Dataset> {
    recipe.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(recipe.delimiter.as_bytes()[0])
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let feature_idx = recipe
        .feature_columns
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>>>()?;
    let interval: Vec<bool> = recipe
        .feature_columns
        .iter()
        .map(|c| recipe.interval_columns.contains(c))
        .collect();
    let protected_idx = column(&recipe.protected_column)?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        // 1-based data row, header excluded
        let row = r + 1;
        let label = record.get(protected_idx).unwrap_or("");
        if recipe.exclude_protected.iter().any(|x| x == label) {
            continue;
        }
        let mut values = Vec::with_capacity(feature_idx.len());
        for (f, &c) in feature_idx.iter().enumerate() {
            let cell = record.get(c).unwrap_or("");
            let parsed = if interval[f] {
                parse_interval_midpoint(cell)
            } else {
                cell.parse::<f64>().ok()
            };
            match parsed.filter(|v| v.is_finite()) {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::NonNumericCell {
                        row,
                        column: recipe.feature_columns[f].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        rows.push(values);
        labels.push(label.to_string());
    }

    let mut dataset = Dataset::new(&rows, &labels)?;
    if let Some(sub) = recipe.subsample {
        dataset = subsample(&dataset, sub.count, sub.seed)?;
    }
    match recipe.scaling {
        Scaling::None => {}
        Scaling::MinMax => min_max_scale(&mut dataset),
        Scaling::Standard => standard_scale(&mut dataset),
    }
    Ok(dataset)
}

/// `"[70-80)"` style bucket to its midpoint; plain numbers pass through.
fn parse_interval_midpoint(cell: &str) -> Option<f64> {
    if let Ok(v) = cell.parse::<f64>() {
        return Some(v);
    }
    let inner = cell.strip_prefix(['[', '('])?.strip_suffix([']', ')'])?;
    let (lo, hi) = inner.split_once('-')?;
    let (lo, hi) = (lo.trim().parse::<f64>().ok()?, hi.trim().parse::<f64>().ok()?);
    Some((lo + hi) / 2.0)
}

/// Uniform sample of `count` rows without replacement, kept in file order.
/// Returns the dataset unchanged when `count >= n`.
pub fn subsample(dataset: &Dataset, count: usize, seed: u64) -> Result<Dataset> {
    if count >= dataset.n() {
        return Ok(dataset.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, dataset.n(), count).into_vec();
    idx.sort_unstable();
    dataset.subset(&idx)
}

/// Rescales every feature to `[0, 1]`; constant columns become 0.
pub fn min_max_scale(dataset: &mut Dataset) {
    dataset.map_columns(|_, col| {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        for v in col.iter_mut() {
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    });
}

/// Centers every feature and divides by its population standard deviation;
/// constant columns become 0.
pub fn standard_scale(dataset: &mut Dataset) {
    dataset.map_columns(|_, col| {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        for v in col.iter_mut() {
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    });
}

/// Smallest ratio `n_a / n_b` over group pairs, i.e. `min_l n_l / max_l n_l`.
pub fn dataset_balance(dataset: &Dataset) -> Result<f64> {
    if dataset.m() < 2 {
        return Err(Error::SingleGroup);
    }
    Ok(counts_balance(&dataset.group_counts()))
}

pub(crate) fn counts_balance(counts: &[usize]) -> f64 {
    let lo = counts.iter().copied().min().unwrap_or(0);
    let hi = counts.iter().copied().max().unwrap_or(0);
    if hi == 0 {
        0.0
    } else {
        lo as f64 / hi as f64
    }
}
