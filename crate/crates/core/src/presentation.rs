//! Finitely presented subgroups of O(n,2) and their JSON config files.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::element::Isometry;
use crate::error::{Error, Result};
use crate::form::FormContext;
use crate::linalg;
use crate::tol::TAU_REL;
use crate::words::{Word, MAX_WORD_LEN};

#[derive(Debug, Clone)]
pub struct Generator {
    pub label: String,
    pub element: Isometry,
}

/// Generators, optional relators and provenance of a group `Gamma < O(n,2)`.
#[derive(Debug, Clone)]
pub struct Presentation {
    ctx: FormContext,
    generators: Vec<Generator>,
    /// Generators followed by their inverses, indexed by letter.
    letters: Vec<Isometry>,
    relators: Vec<String>,
    provenance: String,
    construction: Option<serde_json::Value>,
}

fn valid_label(label: &str) -> bool {
    let mut chars = label.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// `min(||W - I||_inf, ||W + I||_inf)`.
pub fn residual_to_plus_minus_identity(m: &DMatrix<f64>) -> f64 {
    let id = DMatrix::identity(m.nrows(), m.ncols());
    linalg::inf_norm(&(m - &id)).min(linalg::inf_norm(&(m + &id)))
}

impl Presentation {
    /// Validates every generator against the form and every relator against
    /// `+-I` at `TAU_REL`.
    pub fn new(
        ctx: FormContext,
        generators: Vec<(String, DMatrix<f64>)>,
        relators: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let mut gens = Vec::with_capacity(generators.len());
        for (label, matrix) in generators {
            if !valid_label(&label) {
                return Err(Error::Parse(format!(
                    "generator label `{label}` must be lowercase ascii starting with a letter"
                )));
            }
            if gens.iter().any(|g: &Generator| g.label == label) {
                return Err(Error::Parse(format!("duplicate generator label `{label}`")));
            }
            let element = Isometry::new(ctx, matrix).map_err(|e| match e {
                Error::NotAnIsometry { residual } => Error::InvalidGenerator { label: label.clone(), residual },
                other => other,
            })?;
            gens.push(Generator { label, element });
        }
        Self::from_parts(ctx, gens, relators, provenance.into(), None)
    }

    fn from_parts(
        ctx: FormContext,
        generators: Vec<Generator>,
        relators: Vec<String>,
        provenance: String,
        construction: Option<serde_json::Value>,
    ) -> Result<Self> {
        let mut letters: Vec<Isometry> = generators.iter().map(|g| g.element.clone()).collect();
        letters.extend(generators.iter().map(|g| g.element.inverse()));
        let pres = Self { ctx, generators, letters, relators: Vec::new(), provenance, construction };
        for r in &relators {
            let residual = pres.relator_residual(r)?;
            if !(residual <= TAU_REL) {
                return Err(Error::RelatorNotSatisfied { relator: r.clone(), residual });
            }
        }
        Ok(Self { relators, ..pres })
    }

    pub fn with_construction(mut self, construction: serde_json::Value) -> Self {
        self.construction = Some(construction);
        self
    }

    pub fn ctx(&self) -> &FormContext {
        &self.ctx
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn labels(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.label.clone()).collect()
    }

    pub fn relators(&self) -> &[String] {
        &self.relators
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn construction(&self) -> Option<&serde_json::Value> {
        self.construction.as_ref()
    }

    /// Matrix of a letter (generator or inverse).
    pub fn letter(&self, letter: u8) -> &Isometry {
        &self.letters[letter as usize]
    }

    fn letter_of_token(&self, token: &str) -> Option<u8> {
        let k = self.generators.len();
        if let Some(i) = self.generators.iter().position(|g| g.label == token) {
            return Some(i as u8);
        }
        self.generators
            .iter()
            .position(|g| g.label.to_uppercase() == token && g.label != token)
            .map(|i| (i + k) as u8)
    }

    /// Parses `"a b A B"` (whitespace separated, uppercase for inverses) or,
    /// when every label is a single character, an unseparated `"abAB"`.
    /// Returns the word as written (not reduced).
    pub fn parse_word_raw(&self, text: &str) -> Result<Vec<u8>> {
        let mut letters = Vec::new();
        let single_char = self.generators.iter().all(|g| g.label.chars().count() == 1);
        for token in text.split_whitespace() {
            if let Some(l) = self.letter_of_token(token) {
                letters.push(l);
            } else if single_char {
                for c in token.chars() {
                    let l = self
                        .letter_of_token(&c.to_string())
                        .ok_or_else(|| Error::UnknownLabel(c.to_string()))?;
                    letters.push(l);
                }
            } else {
                return Err(Error::UnknownLabel(token.to_string()));
            }
        }
        Ok(letters)
    }

    /// Parses and freely reduces; the flag reports whether anything cancelled.
    pub fn parse_word(&self, text: &str) -> Result<(Word, bool)> {
        let raw = self.parse_word_raw(text)?;
        let k = self.generators.len();
        let mut stack: Vec<u8> = Vec::with_capacity(raw.len());
        for &l in &raw {
            if stack.last() == Some(&crate::words::inverse_letter(l, k)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        if stack.len() > MAX_WORD_LEN {
            return Err(Error::ContractViolation(format!(
                "reduced word has {} letters, at most {MAX_WORD_LEN} supported",
                stack.len()
            )));
        }
        let reduced = stack.len() != raw.len();
        Ok((Word::from_letters(&stack)?, reduced))
    }

    pub fn evaluate_letters(&self, letters: &[u8]) -> Isometry {
        let mut acc = Isometry::identity(self.ctx);
        for &l in letters {
            acc = acc.compose(self.letter(l));
        }
        acc
    }

    pub fn evaluate(&self, word: &Word) -> Isometry {
        self.evaluate_letters(word.letters())
    }

    pub fn render(&self, word: &Word) -> String {
        word.render(&self.labels())
    }

    /// Distance of the relator's value to `+-I`.
    pub fn relator_residual(&self, relator: &str) -> Result<f64> {
        let letters = self.parse_word_raw(relator)?;
        Ok(residual_to_plus_minus_identity(self.evaluate_letters(&letters).matrix()))
    }

    /// Largest residual over all relators (0 with no relators).
    pub fn max_relator_residual(&self) -> f64 {
        self.relators
            .iter()
            .map(|r| self.relator_residual(r).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// `h Gamma h^{-1}`, generator by generator.
    pub fn conjugated_by(&self, h: &Isometry) -> Result<Self> {
        let gens = self
            .generators
            .iter()
            .map(|g| Generator { label: g.label.clone(), element: g.element.conjugate_by(h) })
            .collect();
        Self::from_parts(
            self.ctx,
            gens,
            self.relators.clone(),
            format!("{} (globally conjugated)", self.provenance),
            self.construction.clone(),
        )
    }
}

/// Serialized form of a generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub label: String,
    /// Row-major decimal strings.
    pub matrix: Vec<Vec<String>>,
}

/// On-disk presentation config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationFile {
    pub n: usize,
    pub generators: Vec<GeneratorEntry>,
    #[serde(default)]
    pub relators: Vec<String>,
    #[serde(default)]
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<serde_json::Value>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_decimal(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_decimal(s: &str, label: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse(format!("generator `{label}`: bad matrix entry `{s}`")))
}

impl PresentationFile {
    pub fn from_presentation(p: &Presentation) -> Self {
        let generators = p
            .generators
            .iter()
            .map(|g| {
                let m = g.element.matrix();
                GeneratorEntry {
                    label: g.label.clone(),
                    matrix: m
                        .row_iter()
                        .map(|r| r.iter().map(|&x| format_decimal(x)).collect())
                        .collect(),
                }
            })
            .collect();
        Self {
            n: p.ctx.n(),
            generators,
            relators: p.relators.clone(),
            provenance: p.provenance.clone(),
            construction: p.construction.clone(),
        }
    }

    pub fn into_presentation(self) -> Result<Presentation> {
        let ctx = FormContext::new(self.n)?;
        let d = ctx.dim();
        let mut gens = Vec::with_capacity(self.generators.len());
        for entry in self.generators {
            if entry.matrix.len() != d || entry.matrix.iter().any(|r| r.len() != d) {
                return Err(Error::Parse(format!(
                    "generator `{}`: expected a {d}x{d} matrix",
                    entry.label
                )));
            }
            let mut values = Vec::with_capacity(d * d);
            for row in &entry.matrix {
                for s in row {
                    values.push(parse_decimal(s, &entry.label)?);
                }
            }
            gens.push((entry.label, DMatrix::from_row_slice(d, d, &values)));
        }
        let pres = Presentation::new(ctx, gens, self.relators, self.provenance)?;
        Ok(match self.construction {
            Some(c) => pres.with_construction(c),
            None => pres,
        })
    }
}

pub fn presentation_to_json(p: &Presentation) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&PresentationFile::from_presentation(p))?;
    s.push('\n');
    Ok(s)
}

pub fn presentation_from_json(text: &str) -> Result<Presentation> {
    let file: PresentationFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed presentation: {e}")))?;
    file.into_presentation()
}

pub fn load_presentation(path: impl AsRef<Path>) -> Result<Presentation> {
    presentation_from_json(&fs::read_to_string(path)?)
}

pub fn save_presentation(path: impl AsRef<Path>, p: &Presentation) -> Result<()> {
    fs::write(path, presentation_to_json(p)?)?;
    Ok(())
}
