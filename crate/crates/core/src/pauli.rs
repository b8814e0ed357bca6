//! Pauli words, Pauli sums and their text format.
//!
//! A word on `n` qubits is stored as an X mask and a Z mask over statevector
//! index bits. Qubit 0 is the leftmost letter of the word and the most
//! significant bit of the index, so `"XZ"` is `X ⊗ Z`.
//!
//! Text grammar: `term (("+"|"-") term)*` where a term is an optional real
//! or imaginary coefficient (`0.5`, `-2e-3`, `0.5i`, `i`), an optional `*`
//! and a word over `IXYZ`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nummat::{ComplexMatrix, ComplexVector};

pub const MAX_QUBITS: usize = 30;

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n: usize,
    x: u64,
    z: u64,
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        PauliWord { n, x: 0, z: 0 }
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        PauliWord { n, x: x & mask, z: z & mask }
    }

    /// Word with letter code `0..4` (I, X, Y, Z) per qubit.
    pub fn from_letters(letters: &[u8]) -> Self {
        let n = letters.len();
        let (mut x, mut z) = (0u64, 0u64);
        for (q, &l) in letters.iter().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            if l == 1 || l == 2 {
                x |= bit;
            }
            if l == 2 || l == 3 {
                z |= bit;
            }
        }
        PauliWord { n, x, z }
    }

    /// The `k`-th word in canonical order (I < X < Y < Z, qubit 0 most significant).
    pub fn from_index(n: usize, mut k: usize) -> Self {
        let mut letters = vec![0u8; n];
        for q in (0..n).rev() {
            letters[q] = (k % 4) as u8;
            k /= 4;
        }
        Self::from_letters(&letters)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, q: usize) -> u8 {
        let bit = 1u64 << (self.n - 1 - q);
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        }
    }

    pub fn index(&self) -> usize {
        (0..self.n).fold(0usize, |acc, q| acc * 4 + self.letter(q) as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Qubits on which the word acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != 0).collect()
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Matrix entry `P[k ^ x, k]`.
    #[inline]
    pub fn phase(&self, k: usize) -> Complex64 {
        let sign = ((k as u64) & self.z).count_ones() % 2;
        i_pow(self.y_count() + 2 * sign)
    }

    /// `self * other = phase * word`.
    pub fn mul(&self, other: &PauliWord) -> (Complex64, PauliWord) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y3 = (x & z).count_ones();
        let swaps = (self.z & other.x).count_ones();
        let exp = self.y_count() + other.y_count() + 2 * swaps + 4 * 64 - y3;
        (i_pow(exp), PauliWord { n: self.n, x, z })
    }

    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = 1usize << self.n;
        let mut m = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            m[(k ^ self.x as usize, k)] = self.phase(k);
        }
        m
    }

    /// `tr(P m)`, in O(d).
    pub fn trace_with(&self, m: &ComplexMatrix) -> Complex64 {
        let d = m.nrows();
        (0..d)
            .map(|k| self.phase(k) * m[(k, k ^ self.x as usize)])
            .sum()
    }

    /// Places this word on `wires` of an `n_total`-qubit register.
    pub fn embed(&self, wires: &[usize], n_total: usize) -> PauliWord {
        let mut letters = vec![0u8; n_total];
        for (q, &w) in wires.iter().enumerate() {
            letters[w] = self.letter(q);
        }
        PauliWord::from_letters(&letters)
    }
}

impl Ord for PauliWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.index().cmp(&other.index()))
    }
}

impl PartialOrd for PauliWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", LETTERS[self.letter(q) as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters: Result<Vec<u8>> = s
            .trim()
            .chars()
            .map(|ch| match ch {
                'I' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                other => Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            })
            .collect();
        let letters = letters?;
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(Error::Parse(format!("invalid word length in {s:?}")));
        }
        Ok(PauliWord::from_letters(&letters))
    }
}

/// Complex linear combination of Pauli words on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliWord, Complex64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: BTreeMap::new() }
    }

    pub fn from_word(word: PauliWord, coeff: Complex64) -> Self {
        let mut s = Self::zero(word.n);
        s.add_term(word, coeff);
        s
    }

    pub fn identity(n: usize) -> Self {
        Self::from_word(PauliWord::identity(n), Complex64::new(1.0, 0.0))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (PauliWord, Complex64)>) -> Result<Self> {
        let mut s = Self::zero(n);
        for (w, c) in terms {
            if w.n != n {
                return Err(Error::Shape(format!("word {w} is not on {n} qubits")));
            }
            s.add_term(w, c);
        }
        Ok(s)
    }

    pub fn add_term(&mut self, word: PauliWord, coeff: Complex64) {
        assert_eq!(word.n, self.n, "word length must match the sum");
        let entry = self.terms.entry(word).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&word);
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliWord, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &PauliWord) -> Complex64 {
        self.terms.get(word).copied().unwrap_or_default()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn scale(&self, k: Complex64) -> PauliSum {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            out.add_term(*w, c * k);
        }
        out
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n, other.n, "sums must act on the same register");
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(*w, *c);
        }
        out
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n, other.n, "sums must act on the same register");
        let mut out = Self::zero(self.n);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let (ph, w) = wa.mul(wb);
                out.add_term(w, ph * ca * cb);
            }
        }
        out
    }

    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        self.mul(other).add(&other.mul(self).scale(Complex64::new(-1.0, 0.0)))
    }

    /// Drops terms with modulus at or below `tol`.
    pub fn chop(&self, tol: f64) -> PauliSum {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            if c.norm() > tol {
                out.add_term(*w, *c);
            }
        }
        out
    }

    pub fn commutes_with(&self, other: &PauliSum, tol: f64) -> bool {
        self.commutator(other).terms.values().all(|c| c.norm() <= tol)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (w, c) in &self.terms {
            for k in 0..d {
                m[(k ^ w.x as usize, k)] += c * w.phase(k);
            }
        }
        m
    }

    /// `M |v>` without forming the matrix.
    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        let d = v.len();
        let mut out = ComplexVector::zeros(d);
        for (w, c) in &self.terms {
            for k in 0..d {
                out[k ^ w.x as usize] += c * w.phase(k) * v[k];
            }
        }
        out
    }

    /// `<v| M |v>`.
    pub fn expectation(&self, v: &ComplexVector) -> Complex64 {
        v.dotc(&self.apply(v))
    }

    /// Places the sum on `wires` of an `n_total`-qubit register.
    pub fn embed(&self, wires: &[usize], n_total: usize) -> Result<PauliSum> {
        if wires.len() != self.n {
            return Err(Error::Shape(format!(
                "sum on {} qubits cannot be placed on {} wires",
                self.n,
                wires.len()
            )));
        }
        let mut seen = vec![false; n_total];
        for &w in wires {
            if w >= n_total || seen[w] {
                return Err(Error::Shape(format!("invalid wire list {wires:?}")));
            }
            seen[w] = true;
        }
        let mut out = Self::zero(n_total);
        for (w, c) in &self.terms {
            out.add_term(w.embed(wires, n_total), *c);
        }
        Ok(out)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliSum) -> PauliSum {
        let n = self.n + other.n;
        let mut out = Self::zero(n);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let w = PauliWord::from_masks(n, (wa.x << other.n) | wb.x, (wa.z << other.n) | wb.z);
                out.add_term(w, ca * cb);
            }
        }
        out
    }

    /// Parses a sum and infers the qubit count from its words.
    pub fn parse(text: &str) -> Result<PauliSum> {
        parse_sum(text, None)
    }

    /// Parses a sum that must act on `n` qubits. `"0"` gives the zero sum.
    pub fn parse_n(text: &str, n: usize) -> Result<PauliSum> {
        parse_sum(text, Some(n))
    }
}

impl FromStr for PauliSum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PauliSum::parse(s)
    }
}

fn parse_sum(text: &str, n: Option<usize>) -> Result<PauliSum> {
    let trimmed = text.trim();
    if trimmed == "0" {
        return match n {
            Some(n) => Ok(PauliSum::zero(n)),
            None => Err(Error::Parse("cannot infer the qubit count of \"0\"".into())),
        };
    }
    let chars: Vec<char> = trimmed.chars().collect();
    let mut pos = 0usize;
    let mut terms: Vec<(PauliWord, Complex64)> = Vec::new();
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let err = |msg: &str, at: usize| Error::Parse(format!("{msg} at offset {at} in {text:?}"));
    loop {
        skip_ws(&mut pos);
        let mut sign = 1.0;
        if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
            if chars[pos] == '-' {
                sign = -1.0;
            }
            pos += 1;
            skip_ws(&mut pos);
        } else if !terms.is_empty() {
            return Err(err("expected '+' or '-'", pos));
        }
        let mut coeff = Complex64::new(sign, 0.0);
        if pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '.') {
            let start = pos;
            while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '.') {
                pos += 1;
            }
            if pos < chars.len() && (chars[pos] == 'e' || chars[pos] == 'E') {
                pos += 1;
                if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
                    pos += 1;
                }
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            let literal: String = chars[start..pos].iter().collect();
            let value: f64 = literal
                .parse()
                .map_err(|_| err(&format!("invalid number {literal:?}"), start))?;
            coeff *= value;
            if pos < chars.len() && (chars[pos] == 'i' || chars[pos] == 'j') {
                coeff *= Complex64::new(0.0, 1.0);
                pos += 1;
            }
        } else if pos < chars.len() && (chars[pos] == 'i' || chars[pos] == 'j') {
            coeff *= Complex64::new(0.0, 1.0);
            pos += 1;
        }
        skip_ws(&mut pos);
        if pos < chars.len() && chars[pos] == '*' {
            pos += 1;
            skip_ws(&mut pos);
        }
        let start = pos;
        while pos < chars.len() && matches!(chars[pos], 'I' | 'X' | 'Y' | 'Z') {
            pos += 1;
        }
        if start == pos {
            return Err(err("expected a Pauli word", pos));
        }
        let word: PauliWord = chars[start..pos].iter().collect::<String>().parse()?;
        terms.push((word, coeff));
        skip_ws(&mut pos);
        if pos >= chars.len() {
            break;
        }
    }
    let n_words = terms[0].0.n;
    if terms.iter().any(|(w, _)| w.n != n_words) {
        return Err(Error::Parse(format!("words of different lengths in {text:?}")));
    }
    if let Some(n) = n {
        if n != n_words {
            return Err(Error::Parse(format!(
                "expected words on {n} qubits, found {n_words} in {text:?}"
            )));
        }
    }
    PauliSum::from_terms(n_words, terms)
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pieces: Vec<(f64, bool, PauliWord)> = Vec::new();
        for (w, c) in &self.terms {
            if c.re != 0.0 {
                pieces.push((c.re, false, *w));
            }
            if c.im != 0.0 {
                pieces.push((c.im, true, *w));
            }
        }
        if pieces.is_empty() {
            return write!(f, "0");
        }
        for (k, (v, imag, w)) in pieces.iter().enumerate() {
            let neg = v.is_sign_negative();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{}{}*{}", v.abs(), if *imag { "i" } else { "" }, w)?;
        }
        Ok(())
    }
}

fn check_power_of_two(m: &ComplexMatrix) -> Result<usize> {
    let d = m.nrows();
    if d != m.ncols() || d == 0 || !d.is_power_of_two() {
        return Err(Error::Shape(format!(
            "expected a square matrix of power-of-two size, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Expands a matrix in Pauli words. Coefficients with modulus below 1e-12 are dropped.
pub fn pauli_decompose(m: &ComplexMatrix) -> Result<PauliSum> {
    let n = check_power_of_two(m)?;
    let d = 1usize << n;
    let mut out = PauliSum::zero(n);
    for k in 0..d * d {
        let w = PauliWord::from_index(n, k);
        let coeff = w.trace_with(m) / d as f64;
        if coeff.norm() >= 1e-12 {
            out.add_term(w, coeff);
        }
    }
    Ok(out)
}

/// Writes a skew-Hermitian `z` as `Σ χ_ℓ P_ℓ` with `χ_ℓ` purely imaginary.
pub fn unitary_decomposition(z: &ComplexMatrix) -> Result<Vec<(Complex64, PauliWord)>> {
    check_power_of_two(z)?;
    if !crate::nummat::is_skew_hermitian(z, 1e-10 * (1.0 + crate::nummat::max_abs(z))) {
        return Err(Error::Contract("unitary_decomposition: argument is not skew-Hermitian".into()));
    }
    let herm = pauli_decompose(&(z * Complex64::new(0.0, -1.0)))?;
    Ok(herm
        .terms()
        .map(|(w, c)| (Complex64::new(0.0, c.re), *w))
        .collect())
}
