//! Phonetic-category metadata: articulatory classes, feature vectors and
//! feature-based distances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;

const SHIPPED_FEATURES: &str = include_str!("../data/phoible_features.csv");
const SHIPPED_CLASSES: &str = include_str!("../data/classes.csv");

#[derive(Debug, Error)]
pub enum PhonologyError {
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("duplicate category {0:?}")]
    DuplicateCategory(String),
    #[error("record {record}: {reason}")]
    Malformed { record: usize, reason: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Multi-valued feature vectors. Values are compared as atomic symbols, so
/// contour values such as `"-,+"` only match themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTable {
    feature_names: Vec<String>,
    vectors: BTreeMap<String, Vec<String>>,
}

impl FeatureTable {
    pub fn new(feature_names: Vec<String>) -> Self {
        Self {
            feature_names,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(
        &mut self,
        category: impl Into<String>,
        values: Vec<String>,
    ) -> Result<(), PhonologyError> {
        let category = category.into();
        if values.len() != self.feature_names.len() {
            return Err(PhonologyError::Malformed {
                record: self.vectors.len() + 1,
                reason: format!(
                    "{category:?} has {} values for {} features",
                    values.len(),
                    self.feature_names.len()
                ),
            });
        }
        if self.vectors.contains_key(&category) {
            return Err(PhonologyError::DuplicateCategory(category));
        }
        self.vectors.insert(category, values);
        Ok(())
    }

    /// Parses comma-separated text: a header row (`category`, then feature
    /// names) followed by one row per category.
    pub fn parse(text: &str) -> Result<Self, PhonologyError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        if header.len() < 2 {
            return Err(PhonologyError::Malformed {
                record: 0,
                reason: "header needs a category column and at least one feature".into(),
            });
        }
        let mut table = Self::new(header.iter().skip(1).map(str::to_string).collect());
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let mut fields = rec.iter();
            let category = fields.next().unwrap_or_default();
            if category.is_empty() {
                return Err(PhonologyError::Malformed {
                    record: i + 1,
                    reason: "empty category".into(),
                });
            }
            table.insert(category, fields.map(str::to_string).collect())?;
        }
        Ok(table)
    }

    /// Feature vectors for the 40 reduced TIMIT categories.
    pub fn default_english() -> Self {
        Self::parse(SHIPPED_FEATURES).expect("shipped feature table parses")
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn vector(&self, category: &str) -> Result<&[String], PhonologyError> {
        self.vectors
            .get(category)
            .map(Vec::as_slice)
            .ok_or_else(|| PhonologyError::UnknownCategory(category.to_string()))
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn contains(&self, category: &str) -> bool {
        self.vectors.contains_key(category)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhoneClass {
    Vowel,
    Plosive,
    Fricative,
    Affricate,
    Nasal,
    Approximant,
}

impl PhoneClass {
    pub const ALL: [PhoneClass; 6] = [
        PhoneClass::Vowel,
        PhoneClass::Plosive,
        PhoneClass::Fricative,
        PhoneClass::Affricate,
        PhoneClass::Nasal,
        PhoneClass::Approximant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhoneClass::Vowel => "vowel",
            PhoneClass::Plosive => "plosive",
            PhoneClass::Fricative => "fricative",
            PhoneClass::Affricate => "affricate",
            PhoneClass::Nasal => "nasal",
            PhoneClass::Approximant => "approximant",
        }
    }
}

impl fmt::Display for PhoneClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhoneClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PhoneClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown articulatory class {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Voicing {
    Voiced,
    Voiceless,
    NotApplicable,
}

impl FromStr for Voicing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "voiced" => Ok(Voicing::Voiced),
            "voiceless" => Ok(Voicing::Voiceless),
            "n/a" => Ok(Voicing::NotApplicable),
            other => Err(format!("unknown voicing {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassTable {
    entries: BTreeMap<String, (PhoneClass, Voicing)>,
}

impl ClassTable {
    pub fn insert(
        &mut self,
        category: impl Into<String>,
        class: PhoneClass,
        voicing: Voicing,
    ) -> Result<(), PhonologyError> {
        let category = category.into();
        if self.entries.contains_key(&category) {
            return Err(PhonologyError::DuplicateCategory(category));
        }
        self.entries.insert(category, (class, voicing));
        Ok(())
    }

    /// Parses `category,class,voicing` rows after a header line.
    pub fn parse(text: &str) -> Result<Self, PhonologyError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut table = Self::default();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let bad = |reason: String| PhonologyError::Malformed {
                record: i + 1,
                reason,
            };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let class = rec[1].parse().map_err(bad)?;
            let voicing = rec[2].parse().map_err(bad)?;
            table.insert(&rec[0], class, voicing)?;
        }
        Ok(table)
    }

    pub fn default_english() -> Self {
        Self::parse(SHIPPED_CLASSES).expect("shipped class table parses")
    }

    pub fn class_of(&self, category: &str) -> Result<PhoneClass, PhonologyError> {
        self.entries
            .get(category)
            .map(|e| e.0)
            .ok_or_else(|| PhonologyError::UnknownCategory(category.to_string()))
    }

    pub fn voicing_of(&self, category: &str) -> Result<Voicing, PhonologyError> {
        self.entries
            .get(category)
            .map(|e| e.1)
            .ok_or_else(|| PhonologyError::UnknownCategory(category.to_string()))
    }

    pub fn is_vowel(&self, category: &str) -> Result<bool, PhonologyError> {
        Ok(self.class_of(category)? == PhoneClass::Vowel)
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Number of feature positions at which the two categories differ.
pub fn hamming_distance(a: &str, b: &str, table: &FeatureTable) -> Result<usize, PhonologyError> {
    let va = table.vector(a)?;
    let vb = table.vector(b)?;
    Ok(va.iter().zip(vb).filter(|(x, y)| x != y).count())
}

pub fn feature_distance_matrix<T: Scalar, S: AsRef<str>>(
    categories: &[S],
    table: &FeatureTable,
) -> Result<DistanceMatrix<T>, PhonologyError> {
    for c in categories {
        table.vector(c.as_ref())?;
    }
    let labels: Vec<String> = categories.iter().map(|c| c.as_ref().to_string()).collect();
    Ok(DistanceMatrix::from_pairwise(labels.clone(), |i, j| {
        let d = hamming_distance(&labels[i], &labels[j], table).expect("categories checked");
        T::from_len(d)
    }))
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_len(xs.len())
}

/// Unweighted mean entropy of the members of each class present.
pub fn class_entropy<T: Scalar>(
    entropies: &BTreeMap<String, T>,
    classes: &ClassTable,
) -> Result<BTreeMap<PhoneClass, T>, PhonologyError> {
    let mut members: BTreeMap<PhoneClass, Vec<T>> = BTreeMap::new();
    for (cat, &h) in entropies {
        members.entry(classes.class_of(cat)?).or_default().push(h);
    }
    Ok(members.into_iter().map(|(c, hs)| (c, mean(&hs))).collect())
}

/// Unweighted mean entropy of vowels and of all non-vowel categories.
/// Either side is `None` when it has no members.
pub fn vowel_consonant_entropy<T: Scalar>(
    entropies: &BTreeMap<String, T>,
    classes: &ClassTable,
) -> Result<(Option<T>, Option<T>), PhonologyError> {
    let mut vowels = Vec::new();
    let mut consonants = Vec::new();
    for (cat, &h) in entropies {
        if classes.is_vowel(cat)? {
            vowels.push(h);
        } else {
            consonants.push(h);
        }
    }
    let side = |xs: &[T]| (!xs.is_empty()).then(|| mean(xs));
    Ok((side(&vowels), side(&consonants)))
}
