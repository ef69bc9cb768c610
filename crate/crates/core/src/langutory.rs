//! Phase strings built from classified trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseLetter;
use crate::plan::PlanSpec;

/// A trajectory rendered as one phase letter per step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Langutory {
    letters: Vec<PhaseLetter>,
    step_refs: Vec<usize>,
    compressed: String,
}

impl Langutory {
    pub fn letters(&self) -> &[PhaseLetter] {
        &self.letters
    }

    pub fn step_refs(&self) -> &[usize] {
        &self.step_refs
    }

    /// Run-length form, e.g. `N R2 P V3 P V`.
    pub fn compressed(&self) -> &str {
        &self.compressed
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Builds a langutory whose step references are simply 1..=n.
    pub fn from_letters(letters: &[PhaseLetter]) -> Result<Self> {
        let pairs: Vec<(usize, PhaseLetter)> = letters.iter().enumerate().map(|(i, &l)| (i + 1, l)).collect();
        build_langutory(&pairs)
    }
}

pub fn build_langutory(letters: &[(usize, PhaseLetter)]) -> Result<Langutory> {
    if letters.is_empty() {
        return Err(Error::EmptyLetters);
    }
    let (step_refs, letters): (Vec<usize>, Vec<PhaseLetter>) = letters.iter().copied().unzip();
    let compressed = compress(&letters);
    Ok(Langutory {
        letters,
        step_refs,
        compressed,
    })
}

/// Maximal runs of identical letters, in order.
pub fn runs(letters: &[PhaseLetter]) -> Vec<(PhaseLetter, usize)> {
    let mut out: Vec<(PhaseLetter, usize)> = Vec::new();
    for &l in letters {
        match out.last_mut() {
            Some((prev, count)) if *prev == l => *count += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

pub fn compress(letters: &[PhaseLetter]) -> String {
    runs(letters)
        .into_iter()
        .map(|(l, k)| if k > 1 { format!("{l}{k}") } else { l.to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Inverse of [`compress`].
pub fn expand(compressed: &str) -> Result<Vec<PhaseLetter>> {
    let mut out = Vec::new();
    for token in compressed.split_whitespace() {
        let digits_at = token
            .find(|c: char| c.is_ascii_digit())
            .unwrap_or(token.len());
        let (letter, count) = token.split_at(digits_at);
        let letter: PhaseLetter = letter.parse()?;
        let count = if count.is_empty() {
            1
        } else {
            count
                .parse::<usize>()
                .map_err(|_| Error::InvalidPlan(format!("bad run token {token:?}")))?
        };
        out.extend(std::iter::repeat_n(letter, count));
    }
    Ok(out)
}

/// For each phase of the plan, in expected order, the 1-based position of its
/// first appearance in the phase string.
pub fn first_occurrences(lang: &Langutory, plan: &PlanSpec) -> Vec<(PhaseLetter, Option<usize>)> {
    plan.expected_sequence()
        .iter()
        .map(|&p| (p, lang.letters.iter().position(|&l| l == p).map(|i| i + 1)))
        .collect()
}
