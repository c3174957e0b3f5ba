use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Configuration, Geometry};

fn common_geometry(lines: &[Configuration]) -> Result<Geometry> {
    let g = *lines
        .first()
        .ok_or_else(|| Error::InvalidParameters("a stack needs at least one line".into()))?
        .geometry();
    if lines.iter().any(|l| *l.geometry() != g) {
        return Err(Error::GeometryMismatch);
    }
    Ok(g)
}

/// Independent lines `α^1, …, α^n` on one geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiLineConfig {
    lines: Vec<Configuration>,
}

impl MultiLineConfig {
    pub fn new(lines: Vec<Configuration>) -> Result<Self> {
        common_geometry(&lines)?;
        Ok(Self { lines })
    }

    pub fn lines(&self) -> &[Configuration] {
        &self.lines
    }

    pub fn lines_mut(&mut self) -> &mut [Configuration] {
        &mut self.lines
    }

    pub fn into_lines(self) -> Vec<Configuration> {
        self.lines
    }

    pub fn depth(&self) -> usize {
        self.lines.len()
    }

    pub fn geometry(&self) -> &Geometry {
        self.lines[0].geometry()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.lines.iter().map(Configuration::len).collect()
    }
}

/// Nested lines `η^1 ⊆ η^2 ⊆ … ⊆ η^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledConfig {
    lines: Vec<Configuration>,
}

impl CoupledConfig {
    pub fn new(lines: Vec<Configuration>) -> Result<Self> {
        common_geometry(&lines)?;
        if let Some(k) = lines.windows(2).position(|w| !w[0].is_subset(&w[1])) {
            return Err(Error::NotNested(k + 1));
        }
        Ok(Self { lines })
    }

    pub(crate) fn from_lines_unchecked(lines: Vec<Configuration>) -> Self {
        debug_assert!(lines.windows(2).all(|w| w[0].is_subset(&w[1])));
        Self { lines }
    }

    pub fn lines(&self) -> &[Configuration] {
        &self.lines
    }

    pub(crate) fn lines_mut(&mut self) -> &mut [Configuration] {
        &mut self.lines
    }

    pub fn into_lines(self) -> Vec<Configuration> {
        self.lines
    }

    pub fn depth(&self) -> usize {
        self.lines.len()
    }

    pub fn geometry(&self) -> &Geometry {
        self.lines[0].geometry()
    }

    pub fn is_nested(&self) -> bool {
        self.lines.windows(2).all(|w| w[0].is_subset(&w[1]))
    }
}

/// Pairwise disjoint classes `ξ^1, …, ξ^n`; class 1 has highest priority.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MulticlassConfig {
    classes: Vec<Configuration>,
}

impl MulticlassConfig {
    pub fn new(classes: Vec<Configuration>) -> Result<Self> {
        common_geometry(&classes)?;
        for i in 0..classes.len() {
            for j in i + 1..classes.len() {
                if !classes[i].is_disjoint(&classes[j]) {
                    return Err(Error::NotDisjoint(i + 1, j + 1));
                }
            }
        }
        Ok(Self { classes })
    }

    pub(crate) fn from_classes_unchecked(classes: Vec<Configuration>) -> Self {
        Self { classes }
    }

    pub fn classes(&self) -> &[Configuration] {
        &self.classes
    }

    pub fn into_classes(self) -> Vec<Configuration> {
        self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn geometry(&self) -> &Geometry {
        self.classes[0].geometry()
    }

    /// All particles with their 1-based class, sorted by position.
    pub fn labelled(&self) -> Vec<(f64, usize)> {
        let mut all: Vec<(f64, usize)> = self
            .classes
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.positions().iter().map(move |&p| (p, k + 1)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all
    }
}
