//! Loading the nutrition, price and nutrient-bound tables.
//!
//! All three files are comma-separated UTF-8 with a header row:
//!
//! * nutrition: `name`, `serving_size (g)` and one column per nutrient, with
//!   the unit in the header (`calories (kcal)`, `iron (mg)`, ...). A leading
//!   column with an empty header is read as the ingredient id; a
//!   `price_per_unit` column is ignored (prices come from their own file).
//! * prices: `name,price_per_unit`, currency per gram.
//! * bounds: `nutrient,min_value,max_value`, either value may be blank.
//!
//! Nutrient keys are opaque strings and must match byte for byte between the
//! nutrition header and the bounds file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use thiserror::Error;

const NAME: &str = "name";
const SERVING: &str = "serving_size (g)";
const PRICE: &str = "price_per_unit";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{file} file is missing the mandatory column {column:?}")]
    MissingColumn { file: &'static str, column: String },
    #[error("row {row}, column {column:?}: cannot read {value:?} as a number")]
    InvalidNumber { row: usize, column: String, value: String },
    #[error("row {row}, column {column:?}: negative value {value}")]
    Negative { row: usize, column: String, value: f64 },
    #[error("row {row}: serving size must be positive, got {value}")]
    NonPositiveServing { row: usize, value: f64 },
    #[error("duplicate ingredient names: {}", .0.join("; "))]
    DuplicateNames(Vec<String>),
    #[error("duplicate names in price list: {}", .0.join("; "))]
    DuplicatePrices(Vec<String>),
    #[error("bound for {key:?}: min {min} exceeds max {max}")]
    MinAboveMax { key: String, min: f64, max: f64 },
    #[error("bound for {key:?}: minimum {min} is negative")]
    NegativeMin { key: String, min: f64 },
    #[error("bound for {key:?} has neither a minimum nor a maximum")]
    EmptyBound { key: String },
    #[error("bound listed twice for {0:?}")]
    DuplicateBound(String),
    #[error("unknown nutrient {0:?}: no such column in the nutrition table")]
    UnknownNutrient(String),
}

/// One food item, with nutrient amounts per gram.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingredient {
    /// Stable row id from the nutrition table.
    pub id: usize,
    pub name: String,
    /// Grams the nutrient amounts refer to. Always 1 after loading.
    pub serving_size: f64,
    pub price_per_gram: f64,
    pub nutrients: BTreeMap<String, f64>,
}

impl Ingredient {
    /// Amount of `key` per gram; 0 when the ingredient does not list it.
    pub fn nutrient(&self, key: &str) -> f64 {
        self.nutrients.get(key).copied().unwrap_or(0.0)
    }
}

/// Daily range for one nutrient. A missing side means no constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct NutrientBound {
    pub key: String,
    pub min_value: Option<f64>,
    pub max_value: Option<f64>,
    pub unit: String,
}

impl NutrientBound {
    pub fn new(key: impl Into<String>, min_value: Option<f64>, max_value: Option<f64>) -> Result<Self, IngestError> {
        let key = key.into();
        match (min_value, max_value) {
            (None, None) => return Err(IngestError::EmptyBound { key }),
            (Some(min), Some(max)) if min > max => return Err(IngestError::MinAboveMax { key, min, max }),
            _ => {}
        }
        if let Some(min) = min_value {
            if min < 0.0 {
                return Err(IngestError::NegativeMin { key, min });
            }
        }
        Ok(Self {
            unit: unit_of(&key),
            key,
            min_value,
            max_value,
        })
    }
}

/// Unit label from a header such as `"iron (mg)"`; empty if there is none.
pub fn unit_of(key: &str) -> String {
    match (key.rfind('('), key.rfind(')')) {
        (Some(open), Some(close)) if open < close => key[open + 1..close].trim().to_string(),
        _ => String::new(),
    }
}

/// Trims and collapses internal whitespace. Case is preserved.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Ingredients with prices, the nutrient bounds, and the nutrient columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub ingredients: Vec<Ingredient>,
    pub bounds: Vec<NutrientBound>,
    pub nutrient_keys: Vec<String>,
}

impl Catalog {
    pub fn new(
        ingredients: Vec<Ingredient>,
        bounds: Vec<NutrientBound>,
        nutrient_keys: Vec<String>,
    ) -> Result<Self, IngestError> {
        let known: BTreeSet<&str> = nutrient_keys.iter().map(String::as_str).collect();
        for b in &bounds {
            if !known.contains(b.key.as_str()) {
                return Err(IngestError::UnknownNutrient(b.key.clone()));
            }
        }
        let duplicates = duplicate_names(ingredients.iter().map(|i| normalize_name(&i.name)));
        if !duplicates.is_empty() {
            return Err(IngestError::DuplicateNames(duplicates));
        }
        Ok(Self {
            ingredients,
            bounds,
            nutrient_keys,
        })
    }

    /// Loads and joins the three tables.
    pub fn load(
        nutrition: impl AsRef<Path>,
        prices: impl AsRef<Path>,
        bounds: impl AsRef<Path>,
    ) -> Result<(Self, IngestReport), IngestError> {
        let table = load_nutrition(nutrition)?;
        let priced = load_prices(prices, table.ingredients)?;
        let bounds = load_bounds(bounds)?;
        let catalog = Self::new(priced.ingredients, bounds, table.nutrient_keys)?;
        Ok((
            catalog,
            IngestReport {
                load: table.report,
                join: priced.report,
            },
        ))
    }

    /// Same as [`load`](Self::load) over in-memory CSV text.
    pub fn from_csv_strs(nutrition: &str, prices: &str, bounds: &str) -> Result<(Self, IngestReport), IngestError> {
        let table = read_nutrition(nutrition.as_bytes())?;
        let priced = read_prices(prices.as_bytes(), table.ingredients)?;
        let bounds = read_bounds(bounds.as_bytes())?;
        let catalog = Self::new(priced.ingredients, bounds, table.nutrient_keys)?;
        Ok((
            catalog,
            IngestReport {
                load: table.report,
                join: priced.report,
            },
        ))
    }

    pub fn bound(&self, key: &str) -> Option<&NutrientBound> {
        self.bounds.iter().find(|b| b.key == key)
    }

    pub fn position_of(&self, name: &str) -> Option<usize> {
        let name = normalize_name(name);
        self.ingredients.iter().position(|i| normalize_name(&i.name) == name)
    }

    pub fn is_empty(&self) -> bool {
        self.ingredients.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ingredients.len()
    }

    pub fn write_nutrition(&self, out: impl Write) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new(), NAME.to_string(), SERVING.to_string()];
        header.extend(self.nutrient_keys.iter().cloned());
        w.write_record(&header)?;
        for ing in &self.ingredients {
            let mut row = vec![ing.id.to_string(), ing.name.clone(), format_number(ing.serving_size)];
            row.extend(self.nutrient_keys.iter().map(|k| format_number(ing.nutrient(k))));
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_prices(&self, out: impl Write) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([NAME, PRICE])?;
        for ing in &self.ingredients {
            w.write_record([ing.name.clone(), format_number(ing.price_per_gram)])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_bounds(&self, out: impl Write) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["nutrient", "min_value", "max_value"])?;
        for b in &self.bounds {
            w.write_record([
                b.key.clone(),
                b.min_value.map(format_number).unwrap_or_default(),
                b.max_value.map(format_number).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
fn format_number(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub rows: usize,
    /// Blank nutrient cells read as 0, per column.
    pub imputed: BTreeMap<String, usize>,
}

impl LoadReport {
    pub fn lines(&self) -> Vec<String> {
        self.imputed
            .iter()
            .map(|(k, n)| format!("{k}: {n} imputed"))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct JoinReport {
    /// Nutrition rows with no price; these are left out of the catalog.
    pub unpriced: Vec<String>,
    /// Price rows that match no ingredient.
    pub unmatched_prices: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub load: LoadReport,
    pub join: JoinReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NutritionTable {
    pub ingredients: Vec<Ingredient>,
    pub nutrient_keys: Vec<String>,
    pub report: LoadReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedIngredients {
    pub ingredients: Vec<Ingredient>,
    pub report: JoinReport,
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn reader(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input)
}

/// Parses a numeric cell. Blank cells give `None`. A trailing unit word
/// (`"100 g"`, `"0.5mg"`) is tolerated.
fn parse_cell(raw: &str, row: usize, column: &str) -> Result<Option<f64>, IngestError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let invalid = || IngestError::InvalidNumber {
        row,
        column: column.to_string(),
        value: raw.to_string(),
    };
    let value = match raw.parse::<f64>() {
        Ok(v) => v,
        Err(_) => {
            let split = raw
                .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
                .ok_or_else(invalid)?;
            let (num, unit) = raw.split_at(split);
            if !unit.trim().chars().all(|c| c.is_ascii_alphabetic()) {
                return Err(invalid());
            }
            num.trim().parse::<f64>().map_err(|_| invalid())?
        }
    };
    if !value.is_finite() {
        return Err(invalid());
    }
    Ok(Some(value))
}

fn duplicate_names(names: impl Iterator<Item = String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for n in names {
        if !seen.insert(n.clone()) {
            dups.insert(n);
        }
    }
    dups.into_iter().collect()
}

pub fn load_nutrition(path: impl AsRef<Path>) -> Result<NutritionTable, IngestError> {
    read_nutrition(open(path.as_ref())?)
}

pub fn read_nutrition(input: impl Read) -> Result<NutritionTable, IngestError> {
    let mut rdr = reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn {
                file: "nutrition",
                column: name.to_string(),
            })
    };
    let name_col = find(NAME)?;
    let serving_col = find(SERVING)?;
    let id_col = headers.first().filter(|h| h.is_empty()).map(|_| 0);
    let nutrient_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != name_col && c != serving_col && Some(c) != id_col && headers[c] != PRICE)
        .collect();
    let nutrient_keys: Vec<String> = nutrient_cols.iter().map(|&c| headers[c].clone()).collect();

    let mut ingredients = Vec::new();
    let mut report = LoadReport::default();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let cell = |c: usize| record.get(c).unwrap_or("");
        let id = match id_col {
            Some(c) => match parse_cell(cell(c), row, "")? {
                Some(v) if v >= 0.0 && v.fract() == 0.0 => v as usize,
                _ => {
                    return Err(IngestError::InvalidNumber {
                        row,
                        column: String::new(),
                        value: cell(c).to_string(),
                    })
                }
            },
            None => idx,
        };
        let serving = parse_cell(cell(serving_col), row, SERVING)?.unwrap_or(f64::NAN);
        if !(serving > 0.0) {
            return Err(IngestError::NonPositiveServing { row, value: serving });
        }
        let mut nutrients = BTreeMap::new();
        for (&c, key) in nutrient_cols.iter().zip(&nutrient_keys) {
            let amount = match parse_cell(cell(c), row, key)? {
                Some(v) if v < 0.0 => {
                    return Err(IngestError::Negative {
                        row,
                        column: key.clone(),
                        value: v,
                    })
                }
                Some(v) => v,
                None => {
                    *report.imputed.entry(key.clone()).or_insert(0) += 1;
                    0.0
                }
            };
            nutrients.insert(key.clone(), amount / serving);
        }
        ingredients.push(Ingredient {
            id,
            name: normalize_name(cell(name_col)),
            serving_size: 1.0,
            price_per_gram: 0.0,
            nutrients,
        });
    }
    report.rows = ingredients.len();

    let duplicates = duplicate_names(ingredients.iter().map(|i| i.name.clone()));
    if !duplicates.is_empty() {
        return Err(IngestError::DuplicateNames(duplicates));
    }
    for line in report.lines() {
        warn!("{line}");
    }
    Ok(NutritionTable {
        ingredients,
        nutrient_keys,
        report,
    })
}

pub fn load_prices(path: impl AsRef<Path>, ingredients: Vec<Ingredient>) -> Result<PricedIngredients, IngestError> {
    read_prices(open(path.as_ref())?, ingredients)
}

/// Attaches prices by normalized name. Ingredients without a price are
/// dropped and listed in the join report.
pub fn read_prices(input: impl Read, ingredients: Vec<Ingredient>) -> Result<PricedIngredients, IngestError> {
    let mut rdr = reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn {
                file: "prices",
                column: name.to_string(),
            })
    };
    let name_col = find(NAME)?;
    let price_col = find(PRICE)?;

    let mut prices: BTreeMap<String, f64> = BTreeMap::new();
    let mut order = Vec::new();
    let mut duplicates = BTreeSet::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let name = normalize_name(record.get(name_col).unwrap_or(""));
        let Some(price) = parse_cell(record.get(price_col).unwrap_or(""), row, PRICE)? else {
            warn!("price row {row} ({name}) has no price; ignored");
            continue;
        };
        if price < 0.0 {
            return Err(IngestError::Negative {
                row,
                column: PRICE.to_string(),
                value: price,
            });
        }
        if prices.insert(name.clone(), price).is_some() {
            duplicates.insert(name.clone());
        }
        order.push(name);
    }
    if !duplicates.is_empty() {
        return Err(IngestError::DuplicatePrices(duplicates.into_iter().collect()));
    }

    let mut report = JoinReport::default();
    let mut matched = BTreeSet::new();
    let mut kept = Vec::with_capacity(ingredients.len());
    for mut ing in ingredients {
        match prices.get(&ing.name) {
            Some(&p) => {
                ing.price_per_gram = p;
                matched.insert(ing.name.clone());
                kept.push(ing);
            }
            None => report.unpriced.push(ing.name),
        }
    }
    report.unmatched_prices = order.into_iter().filter(|n| !matched.contains(n)).collect();
    if !report.unpriced.is_empty() {
        info!("{} ingredients have no price and were left out", report.unpriced.len());
    }
    if !report.unmatched_prices.is_empty() {
        info!("{} prices match no ingredient", report.unmatched_prices.len());
    }
    Ok(PricedIngredients {
        ingredients: kept,
        report,
    })
}

pub fn load_bounds(path: impl AsRef<Path>) -> Result<Vec<NutrientBound>, IngestError> {
    read_bounds(open(path.as_ref())?)
}

pub fn read_bounds(input: impl Read) -> Result<Vec<NutrientBound>, IngestError> {
    let mut rdr = reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn {
                file: "bounds",
                column: name.to_string(),
            })
    };
    let key_col = find("nutrient")?;
    let min_col = find("min_value")?;
    let max_col = find("max_value")?;

    let mut bounds: Vec<NutrientBound> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let key = record.get(key_col).unwrap_or("").to_string();
        let min = parse_cell(record.get(min_col).unwrap_or(""), row, "min_value")?;
        let max = parse_cell(record.get(max_col).unwrap_or(""), row, "max_value")?;
        if bounds.iter().any(|b| b.key == key) {
            return Err(IngestError::DuplicateBound(key));
        }
        bounds.push(NutrientBound::new(key, min, max)?);
    }
    Ok(bounds)
}
