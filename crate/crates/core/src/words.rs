//! Freely reduced words over a generating set and the word-ball sweep.
//!
//! Letters are encoded as bytes: `0..k` are the generators in presentation
//! order and `k..2k` their inverses, so the byte order `a < b < ... < A < B`
//! is the lexicographic order used everywhere.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};

use crate::element::{
    attracting_repelling, factored_middle_log_moduli, forward_spectrum, log_moduli, sorted_log_moduli, Isometry,
    JordanPoint,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::presentation::Presentation;
use crate::tol::{DEDUP_QUANTUM, EPS_GAP};

pub const MAX_WORD_LEN: usize = 16;

/// Default cap on the number of materialized elements in [`enumerate_words`].
pub const MATERIALIZE_LIMIT: u128 = 2_000_000;
/// Default cap on the number of words a streaming sweep may visit.
pub const SWEEP_LIMIT: u128 = 50_000_000;

/// A word of at most [`MAX_WORD_LEN`] letters. The derived order is
/// length first, then lexicographic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    letters: [u8; MAX_WORD_LEN],
}

#[inline]
pub fn inverse_letter(letter: u8, k: usize) -> u8 {
    let k = k as u8;
    if letter < k {
        letter + k
    } else {
        letter - k
    }
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, letters: [0; MAX_WORD_LEN] };

    pub fn from_letters(letters: &[u8]) -> Result<Self> {
        if letters.len() > MAX_WORD_LEN {
            return Err(Error::ContractViolation(format!(
                "word length {} exceeds {MAX_WORD_LEN}",
                letters.len()
            )));
        }
        let mut w = Self::EMPTY;
        w.letters[..letters.len()].copy_from_slice(letters);
        w.len = letters.len() as u8;
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters[..self.len()]
    }

    pub fn last(&self) -> Option<u8> {
        self.letters().last().copied()
    }

    /// Appends a letter; the caller guarantees capacity.
    pub(crate) fn pushed(&self, letter: u8) -> Self {
        let mut w = *self;
        w.letters[w.len()] = letter;
        w.len += 1;
        w
    }

    pub fn is_reduced(&self, k: usize) -> bool {
        self.letters().windows(2).all(|p| p[1] != inverse_letter(p[0], k))
    }

    /// Cancels adjacent letter-inverse pairs until none remain.
    pub fn free_reduce(&self, k: usize) -> Self {
        let mut stack: Vec<u8> = Vec::with_capacity(self.len());
        for &l in self.letters() {
            if stack.last() == Some(&inverse_letter(l, k)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word::from_letters(&stack).expect("reduction never lengthens")
    }

    /// Strips matching letter/inverse pairs from both ends: `v w v^{-1}`
    /// becomes `w`. The result is conjugate to the input.
    pub fn cyclic_core(&self, k: usize) -> Self {
        let l = self.letters();
        let (mut a, mut b) = (0, l.len());
        while b - a >= 2 && l[b - 1] == inverse_letter(l[a], k) {
            a += 1;
            b -= 1;
        }
        Word::from_letters(&l[a..b]).expect("shorter")
    }

    /// Least cyclic rotation of the cyclic core: one representative per
    /// conjugacy class of cyclically reduced words.
    pub fn cyclic_class(&self, k: usize) -> Self {
        let core = self.cyclic_core(k);
        let l = core.letters();
        (1..l.len()).fold(core, |best, r| {
            let mut w = core;
            w.letters[..l.len()].rotate_left(r);
            best.min(w)
        })
    }

    pub fn inverse(&self, k: usize) -> Self {
        let rev: Vec<u8> = self.letters().iter().rev().map(|&l| inverse_letter(l, k)).collect();
        Word::from_letters(&rev).expect("same length")
    }

    /// Space-separated rendering, uppercase for inverses: `a b A B`.
    pub fn render(&self, labels: &[String]) -> String {
        let k = labels.len();
        self.letters()
            .iter()
            .map(|&l| {
                let i = l as usize;
                if i < k {
                    labels[i].clone()
                } else {
                    labels[i - k].to_uppercase()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word{:?}", self.letters())
    }
}

/// A word together with the matrix it evaluates to.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub word: Word,
    pub element: Isometry,
}

impl GroupElement {
    /// A matrix conjugate to this element, evaluated from the cyclic core of
    /// the word. Spectral quantities are conjugation invariant, and the core
    /// avoids the huge, badly conditioned products of long conjugates.
    pub fn core_matrix(&self, pres: &Presentation) -> Isometry {
        let core = self.word.cyclic_core(pres.generators().len());
        if core.len() == self.word.len() {
            self.element.clone()
        } else {
            pres.evaluate(&core)
        }
    }

    /// The two leading log-moduli and, when their gap exceeds `eps_gap`, the
    /// attracting direction of this element.
    ///
    /// Everything is computed on the cyclic core `c` of `w = v c v^{-1}`; the
    /// attracting direction of `w` is then `v` applied to that of `c`.
    pub fn leading_spectrum(
        &self,
        pres: &Presentation,
        eps_gap: f64,
    ) -> Result<(JordanPoint, Option<DVector<f64>>)> {
        let k = pres.generators().len();
        let core = self.word.cyclic_core(k);
        let core_m = self.core_matrix(pres);
        let fwd = forward_spectrum(core_m.matrix())?;
        let (l1, l2) = (fwd.logs[0], fwd.logs[1]);
        if l1 - l2 <= eps_gap {
            return Ok((JordanPoint::new(l1, l2), None));
        }
        let (plus, minus) = attracting_repelling(*pres.ctx(), core_m.matrix(), fwd.mu)?;
        let middle = core_middle(pres, &core, &plus, &minus)?;
        let strip = (self.word.len() - core.len()) / 2;
        let prefix = pres.evaluate_letters(&self.word.letters()[..strip]);
        let attracting = (prefix.matrix() * plus).normalize();
        Ok((JordanPoint::new(l1, middle[0]), Some(attracting)))
    }

    /// All log-moduli, descending, computed on the cyclic core. The middle of
    /// the spectrum of a proximal element comes from the factored restriction
    /// to the complement of its attracting and repelling lines.
    pub fn log_moduli(&self, pres: &Presentation) -> Result<Vec<f64>> {
        let core = self.word.cyclic_core(pres.generators().len());
        let core_m = self.core_matrix(pres);
        let fwd = forward_spectrum(core_m.matrix())?;
        if fwd.logs[0] - fwd.logs[1] > EPS_GAP {
            let (plus, minus) = attracting_repelling(*pres.ctx(), core_m.matrix(), fwd.mu)?;
            if let Ok(middle) = core_middle(pres, &core, &plus, &minus) {
                let bottom = sorted_log_moduli(core_m.inverse().matrix(), "inverse")?[0];
                let mut out = Vec::with_capacity(middle.len() + 2);
                out.push(fwd.logs[0]);
                out.extend(middle);
                out.push(-bottom);
                out.sort_by(|a, b| b.total_cmp(a));
                return Ok(out);
            }
        }
        log_moduli(&core_m)
    }
}

fn core_middle(pres: &Presentation, core: &Word, plus: &DVector<f64>, minus: &DVector<f64>) -> Result<Vec<f64>> {
    let k = pres.generators().len();
    let factors: Vec<&DMatrix<f64>> = core.letters().iter().map(|&l| pres.letter(l).matrix()).collect();
    let inverses: Vec<&DMatrix<f64>> =
        core.letters().iter().map(|&l| pres.letter(inverse_letter(l, k)).matrix()).collect();
    factored_middle_log_moduli(*pres.ctx(), &factors, &inverses, plus, minus)
}

/// Number of freely reduced nonempty words of length at most `max_len` on
/// `k` generators.
pub fn reduced_word_count(k: usize, max_len: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let letters = 2 * k as u128;
    let mut total: u128 = 0;
    let mut level = letters;
    for _ in 0..max_len {
        total = total.saturating_add(level);
        level = level.saturating_mul(letters - 1);
    }
    total
}

/// Key for matrix dedup: entries rounded to `DEDUP_QUANTUM`, overall sign
/// fixed by the first nonzero rounded entry (so `M` and `-M` collide), then
/// folded into 128 bits.
pub(crate) fn dedup_key(m: &DMatrix<f64>) -> u128 {
    // Rounded values stay floats, so the sign flip cannot overflow; adding
    // 0.0 turns -0.0 into 0.0.
    let rounded = |x: &f64| (x / DEDUP_QUANTUM).round() + 0.0;
    let flip = m.iter().map(rounded).find(|&r| r != 0.0).is_some_and(|r| r < 0.0);
    let mut h1 = DefaultHasher::new();
    let mut h2 = DefaultHasher::new();
    0x9e37_79b9_u32.hash(&mut h2);
    for r in m.iter().map(rounded) {
        let r = if flip { -r + 0.0 } else { r };
        r.to_bits().hash(&mut h1);
        r.to_bits().hash(&mut h2);
    }
    ((h1.finish() as u128) << 64) | h2.finish() as u128
}

/// Controls a word-ball sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub max_len: usize,
    pub exec: Exec,
    /// Refuse to start if the reduced-word count exceeds this.
    pub limit: u128,
}

impl SweepOptions {
    pub fn new(max_len: usize) -> Self {
        Self { max_len, exec: Exec::default(), limit: SWEEP_LIMIT }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

const CHUNK: usize = 1 << 14;

fn check_len(max_len: usize) -> Result<()> {
    if max_len == 0 || max_len > MAX_WORD_LEN {
        return Err(Error::ContractViolation(format!(
            "word length must lie in 1..={MAX_WORD_LEN}, got {max_len}"
        )));
    }
    Ok(())
}

/// Visits every element of the ball of radius `max_len` once, represented by
/// its first word in length-lex order (the identity is excluded), and
/// collects `f`'s outputs in that order. Only one level of the ball is held
/// in memory; the last level is streamed in chunks.
pub fn sweep_words<T, F>(pres: &Presentation, opts: &SweepOptions, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&GroupElement) -> Option<T> + Sync + Send,
{
    check_len(opts.max_len)?;
    let k = pres.generators().len();
    let count = reduced_word_count(k, opts.max_len);
    if count > opts.limit {
        return Err(Error::Resource { count, limit: opts.limit });
    }
    let ctx = *pres.ctx();
    let mut seen: HashSet<u128> = HashSet::new();
    seen.insert(dedup_key(&DMatrix::identity(ctx.dim(), ctx.dim())));
    let mut out: Vec<T> = Vec::new();
    let mut level: Vec<GroupElement> = vec![GroupElement {
        word: Word::EMPTY,
        element: Isometry::identity(ctx),
    }];

    for depth in 1..=opts.max_len {
        let keep_level = depth < opts.max_len;
        let mut next: Vec<GroupElement> = Vec::new();
        for parents in level.chunks(CHUNK) {
            let children: Vec<Vec<(GroupElement, u128)>> = opts.exec.map(parents, |parent| {
                (0..2 * k as u8)
                    .filter(|&l| parent.word.last() != Some(inverse_letter(l, k)))
                    .map(|l| {
                        let m = parent.element.matrix() * pres.letter(l).matrix();
                        let key = dedup_key(&m);
                        (
                            GroupElement { word: parent.word.pushed(l), element: Isometry::trusted(ctx, m) },
                            key,
                        )
                    })
                    .collect()
            });
            let fresh: Vec<GroupElement> = children
                .into_iter()
                .flatten()
                .filter_map(|(g, key)| seen.insert(key).then_some(g))
                .collect();
            out.extend(opts.exec.map(&fresh, &f).into_iter().flatten());
            if keep_level {
                next.extend(fresh);
            }
        }
        level = next;
    }
    Ok(out)
}

/// All elements of the ball of radius `max_len` (identity excluded), one word
/// per distinct matrix up to sign, in length-lex order.
pub fn enumerate_words(pres: &Presentation, max_len: usize) -> Result<Vec<GroupElement>> {
    enumerate_words_with(pres, max_len, Exec::default(), MATERIALIZE_LIMIT)
}

pub fn enumerate_words_with(
    pres: &Presentation,
    max_len: usize,
    exec: Exec,
    limit: u128,
) -> Result<Vec<GroupElement>> {
    let opts = SweepOptions { max_len, exec, limit };
    sweep_words(pres, &opts, |g| Some(g.clone()))
}

/// Every freely reduced word up to `max_len`, without matrix dedup.
pub fn reduced_words(k: usize, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut level = vec![Word::EMPTY];
    for _ in 0..max_len.min(MAX_WORD_LEN) {
        let mut next = Vec::new();
        for w in &level {
            for l in 0..2 * k as u8 {
                if w.last() != Some(inverse_letter(l, k)) {
                    next.push(w.pushed(l));
                }
            }
        }
        out.extend(next.iter().copied());
        level = next;
    }
    out
}
