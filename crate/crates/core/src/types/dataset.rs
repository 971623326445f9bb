use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement scale of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    #[serde(alias = "c", alias = "numeric")]
    Continuous,
    #[serde(alias = "u", alias = "unordered_categorical", alias = "nominal")]
    Unordered,
    #[serde(alias = "o", alias = "ordered_categorical", alias = "ordinal")]
    Ordered,
}

impl VariableKind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, VariableKind::Continuous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Continuous => "continuous",
            VariableKind::Unordered => "unordered",
            VariableKind::Ordered => "ordered",
        }
    }
}

impl std::fmt::Display for VariableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Name, kind and (for categorical variables) level information of one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSchema {
    pub name: String,
    pub kind: VariableKind,
    /// Number of categories; `None` for continuous variables.
    pub levels: Option<u32>,
    /// Labels of the categories indexed by code, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl VariableSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        VariableSchema {
            name: name.into(),
            kind: VariableKind::Continuous,
            levels: None,
            labels: None,
        }
    }

    pub fn unordered(name: impl Into<String>, levels: u32) -> Self {
        VariableSchema {
            name: name.into(),
            kind: VariableKind::Unordered,
            levels: Some(levels),
            labels: None,
        }
    }

    pub fn ordered(name: impl Into<String>, levels: u32) -> Self {
        VariableSchema {
            name: name.into(),
            kind: VariableKind::Ordered,
            levels: Some(levels),
            labels: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.levels) {
            (VariableKind::Continuous, None) => Ok(()),
            (VariableKind::Continuous, Some(_)) => Err(Error::Schema(format!(
                "continuous variable `{}` must not declare levels",
                self.name
            ))),
            (_, Some(g)) if g >= 2 => {
                if let Some(labels) = &self.labels {
                    if labels.len() != g as usize {
                        return Err(Error::Schema(format!(
                            "variable `{}` declares {} levels but {} labels",
                            self.name,
                            g,
                            labels.len()
                        )));
                    }
                }
                Ok(())
            }
            (kind, levels) => Err(Error::Schema(format!(
                "{kind} variable `{}` needs at least 2 levels, got {:?}",
                self.name, levels
            ))),
        }
    }
}

/// One column of raw values, used to assemble a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Continuous(Vec<f64>),
    Categorical(Vec<u32>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Continuous(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }
}

/// Borrowed view of one observation, split by variable kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row<'a> {
    pub continuous: &'a [f64],
    pub unordered: &'a [u32],
    pub ordered: &'a [u32],
}

/// Column-typed observation matrix.
///
/// Columns are always stored continuous first, then unordered, then ordered.
/// Each block is a dense row-major matrix, so a row is three contiguous
/// slices.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedDataset {
    schema: Vec<VariableSchema>,
    n: usize,
    p_c: usize,
    p_u: usize,
    p_o: usize,
    continuous: Vec<f64>,
    unordered: Vec<u32>,
    ordered: Vec<u32>,
}

impl TypedDataset {
    /// Builds a dataset from columns in any kind order. Columns are stably
    /// reordered into continuous, unordered, ordered.
    pub fn from_columns(schema: Vec<VariableSchema>, columns: Vec<Column>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(Error::Dimension(format!(
                "{} schema entries for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Column::len);
        for (var, col) in schema.iter().zip(&columns) {
            var.validate()?;
            if col.len() != n {
                return Err(Error::Dimension(format!(
                    "column `{}` has {} rows, expected {}",
                    var.name,
                    col.len(),
                    n
                )));
            }
        }

        let mut order: Vec<usize> = (0..schema.len()).collect();
        order.sort_by_key(|&k| schema[k].kind);

        let count = |kind| schema.iter().filter(|v| v.kind == kind).count();
        let (p_c, p_u, p_o) = (
            count(VariableKind::Continuous),
            count(VariableKind::Unordered),
            count(VariableKind::Ordered),
        );
        let mut continuous = vec![0.0; n * p_c];
        let mut unordered = vec![0; n * p_u];
        let mut ordered = vec![0; n * p_o];
        let (mut kc, mut ku, mut ko) = (0, 0, 0);
        for &k in &order {
            let var = &schema[k];
            match (&columns[k], var.kind) {
                (Column::Continuous(values), VariableKind::Continuous) => {
                    for (i, &x) in values.iter().enumerate() {
                        if !x.is_finite() {
                            return Err(Error::Schema(format!(
                                "non-finite value {x} in continuous variable `{}` row {i}",
                                var.name
                            )));
                        }
                        continuous[i * p_c + kc] = x;
                    }
                    kc += 1;
                }
                (Column::Categorical(codes), kind) if kind.is_categorical() => {
                    let g = var.levels.unwrap_or(0);
                    if let Some((i, &c)) = codes.iter().enumerate().find(|(_, &c)| c >= g) {
                        return Err(Error::Schema(format!(
                            "code {c} in variable `{}` row {i} is outside [0, {g})",
                            var.name
                        )));
                    }
                    let (block, width, slot) = if kind == VariableKind::Unordered {
                        ku += 1;
                        (&mut unordered, p_u, ku - 1)
                    } else {
                        ko += 1;
                        (&mut ordered, p_o, ko - 1)
                    };
                    for (i, &c) in codes.iter().enumerate() {
                        block[i * width + slot] = c;
                    }
                }
                _ => {
                    return Err(Error::Schema(format!(
                        "column for `{}` does not match its kind {}",
                        var.name, var.kind
                    )))
                }
            }
        }

        Ok(TypedDataset {
            schema: order.iter().map(|&k| schema[k].clone()).collect(),
            n,
            p_c,
            p_u,
            p_o,
            continuous,
            unordered,
            ordered,
        })
    }

    pub fn schema(&self) -> &[VariableSchema] {
        &self.schema
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p_c + self.p_u + self.p_o
    }

    pub fn p_c(&self) -> usize {
        self.p_c
    }

    pub fn p_u(&self) -> usize {
        self.p_u
    }

    pub fn p_o(&self) -> usize {
        self.p_o
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        Row {
            continuous: &self.continuous[i * self.p_c..(i + 1) * self.p_c],
            unordered: &self.unordered[i * self.p_u..(i + 1) * self.p_u],
            ordered: &self.ordered[i * self.p_o..(i + 1) * self.p_o],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    /// Values of the `k`-th continuous variable.
    pub fn continuous_column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.continuous[i * self.p_c + k])
    }

    pub fn unordered_column(&self, k: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.n).map(move |i| self.unordered[i * self.p_u + k])
    }

    pub fn ordered_column(&self, k: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.n).map(move |i| self.ordered[i * self.p_o + k])
    }

    /// Columns in storage order, ready to feed back into [`Self::from_columns`].
    pub fn columns(&self) -> Vec<Column> {
        let mut out = Vec::with_capacity(self.p());
        out.extend((0..self.p_c).map(|k| Column::Continuous(self.continuous_column(k).collect())));
        out.extend((0..self.p_u).map(|k| Column::Categorical(self.unordered_column(k).collect())));
        out.extend((0..self.p_o).map(|k| Column::Categorical(self.ordered_column(k).collect())));
        out
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> TypedDataset {
        let pick = |block: &[f64], width: usize| -> Vec<f64> {
            indices
                .iter()
                .flat_map(|&i| block[i * width..(i + 1) * width].iter().copied())
                .collect()
        };
        let pick_codes = |block: &[u32], width: usize| -> Vec<u32> {
            indices
                .iter()
                .flat_map(|&i| block[i * width..(i + 1) * width].iter().copied())
                .collect()
        };
        TypedDataset {
            schema: self.schema.clone(),
            n: indices.len(),
            p_c: self.p_c,
            p_u: self.p_u,
            p_o: self.p_o,
            continuous: pick(&self.continuous, self.p_c),
            unordered: pick_codes(&self.unordered, self.p_u),
            ordered: pick_codes(&self.ordered, self.p_o),
        }
    }

    /// Sample standard deviation (n - 1 denominator) of each continuous variable.
    pub fn continuous_sd(&self) -> Vec<f64> {
        (0..self.p_c)
            .map(|k| {
                if self.n < 2 {
                    return 0.0;
                }
                let mean = self.continuous_column(k).sum::<f64>() / self.n as f64;
                let ss: f64 = self
                    .continuous_column(k)
                    .map(|x| (x - mean) * (x - mean))
                    .sum();
                (ss / (self.n - 1) as f64).sqrt()
            })
            .collect()
    }

    /// max - min of each continuous variable.
    pub fn continuous_range(&self) -> Vec<f64> {
        (0..self.p_c)
            .map(|k| {
                let (lo, hi) = self
                    .continuous_column(k)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                        (lo.min(x), hi.max(x))
                    });
                if self.n == 0 {
                    0.0
                } else {
                    hi - lo
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TypedDataset {
        TypedDataset::from_columns(
            vec![
                VariableSchema::ordered("o", 4),
                VariableSchema::continuous("c"),
                VariableSchema::unordered("u", 2),
            ],
            vec![
                Column::Categorical(vec![3, 3, 0, 0, 3]),
                Column::Continuous(vec![1.5, 1.5, 1.5, 0.0, 0.0]),
                Column::Categorical(vec![1, 1, 0, 1, 0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn columns_are_reordered_by_kind() {
        let ds = toy();
        let kinds: Vec<_> = ds.schema().iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            [
                VariableKind::Continuous,
                VariableKind::Unordered,
                VariableKind::Ordered
            ]
        );
        assert_eq!((ds.n(), ds.p_c(), ds.p_u(), ds.p_o()), (5, 1, 1, 1));
        let r = ds.row(3);
        assert_eq!(r.continuous, &[0.0]);
        assert_eq!(r.unordered, &[1]);
        assert_eq!(r.ordered, &[0]);
    }

    #[test]
    fn code_outside_levels_is_rejected() {
        let err = TypedDataset::from_columns(
            vec![VariableSchema::ordered("o", 3)],
            vec![Column::Categorical(vec![0, 3])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn categorical_needs_two_levels() {
        let err = TypedDataset::from_columns(
            vec![VariableSchema::unordered("u", 1)],
            vec![Column::Categorical(vec![0])],
        )
        .unwrap_err();
        assert!(err.to_string().contains("at least 2 levels"));
    }

    #[test]
    fn select_rows_permutes() {
        let ds = toy();
        let sub = ds.select_rows(&[4, 0]);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.row(0), ds.row(4));
        assert_eq!(sub.row(1), ds.row(0));
    }

    #[test]
    fn summary_statistics() {
        let ds = toy();
        assert_eq!(ds.continuous_range(), vec![1.5]);
        // values 1.5,1.5,1.5,0,0: mean 0.9, ss = 3*0.36 + 2*0.81 = 2.7
        assert!((ds.continuous_sd()[0] - (2.7f64 / 4.0).sqrt()).abs() < 1e-15);
    }
}
