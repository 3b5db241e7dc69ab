//! Finite words and finitely described infinite words over a map alphabet.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::carpet::{Axis, DiagonalIfs};
use crate::error::{CarpetError, Result};

/// Longest expanded preperiod accepted when normalising a block program.
pub const MAX_EXPANDED: usize = 10_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    pub fn validate(&self, alphabet: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l >= alphabet) {
            Some(l) => Err(CarpetError::Invalid(format!(
                "letter {l} outside alphabet of size {alphabet}"
            ))),
            None => Ok(()),
        }
    }

    /// `log` of the product of the ratios on `axis`.
    pub fn log_ratio(&self, ifs: &DiagonalIfs, axis: Axis) -> f64 {
        self.0.iter().map(|&i| ifs.map(i).ratio(axis).ln()).sum()
    }

    pub fn ratio(&self, ifs: &DiagonalIfs, axis: Axis) -> f64 {
        self.log_ratio(ifs, axis).exp()
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// How often a block is repeated; `Tail` repeats it forever and must close
/// the program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repeat {
    Times(usize),
    Tail,
}

impl Serialize for Repeat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Repeat::Times(n) => serializer.serialize_u64(*n as u64),
            Repeat::Tail => serializer.serialize_str("tail"),
        }
    }
}

impl<'de> Deserialize<'de> for Repeat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RepeatVisitor;

        impl Visitor<'_> for RepeatVisitor {
            type Value = Repeat;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a repeat count or \"tail\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Repeat, E> {
                usize::try_from(v).map(Repeat::Times).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Repeat, E> {
                usize::try_from(v).map(Repeat::Times).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Repeat, E> {
                match v {
                    "tail" => Ok(Repeat::Tail),
                    _ => Err(E::custom(format!("unknown repeat rule {v:?}"))),
                }
            }
        }

        deserializer.deserialize_any(RepeatVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub word: Word,
    pub repeat: Repeat,
}

/// An infinite word `γ`, either eventually periodic or a block program
/// whose last block repeats forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    Periodic { preperiod: Word, period: Word },
    BlockProgram { blocks: Vec<Block> },
}

impl SequenceSpec {
    pub fn constant(letter: usize) -> Self {
        SequenceSpec::Periodic {
            preperiod: Word::empty(),
            period: Word(vec![letter]),
        }
    }

    pub fn periodic(preperiod: Vec<usize>, period: Vec<usize>) -> Self {
        SequenceSpec::Periodic {
            preperiod: Word(preperiod),
            period: Word(period),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: SequenceSpec = serde_json::from_str(s).map_err(|e| CarpetError::Parse(e.to_string()))?;
        spec.check_shape()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sequence serializes")
    }

    fn check_shape(&self) -> Result<()> {
        match self {
            SequenceSpec::Periodic { period, .. } => {
                if period.is_empty() {
                    return Err(CarpetError::Invalid("period must be nonempty".into()));
                }
            }
            SequenceSpec::BlockProgram { blocks } => {
                let Some(last) = blocks.last() else {
                    return Err(CarpetError::Invalid("block program has no blocks".into()));
                };
                if last.repeat != Repeat::Tail || last.word.is_empty() {
                    return Err(CarpetError::Invalid(
                        "the last block must be a nonempty word repeated as the tail".into(),
                    ));
                }
                if blocks[..blocks.len() - 1].iter().any(|b| b.repeat == Repeat::Tail) {
                    return Err(CarpetError::Invalid("only the last block may be the tail".into()));
                }
            }
        }
        Ok(())
    }

    /// Shape checks plus every letter below `alphabet`.
    pub fn validate(&self, alphabet: usize) -> Result<()> {
        self.check_shape()?;
        match self {
            SequenceSpec::Periodic { preperiod, period } => {
                preperiod.validate(alphabet)?;
                period.validate(alphabet)
            }
            SequenceSpec::BlockProgram { blocks } => blocks.iter().try_for_each(|b| b.word.validate(alphabet)),
        }
    }

    /// Eventually periodic normal form.
    pub fn expand(&self) -> Result<Expanded> {
        self.check_shape()?;
        let (pre, period) = match self {
            SequenceSpec::Periodic { preperiod, period } => (preperiod.0.clone(), period.0.clone()),
            SequenceSpec::BlockProgram { blocks } => {
                let mut total: usize = 0;
                for b in &blocks[..blocks.len() - 1] {
                    if let Repeat::Times(n) = b.repeat {
                        total = total.saturating_add(b.word.len().saturating_mul(n));
                    }
                }
                if total > MAX_EXPANDED {
                    return Err(CarpetError::Budget {
                        what: "expanded preperiod",
                        needed: total as u64,
                        budget: MAX_EXPANDED as u64,
                    });
                }
                let mut pre = Vec::with_capacity(total);
                for b in &blocks[..blocks.len() - 1] {
                    if let Repeat::Times(n) = b.repeat {
                        for _ in 0..n {
                            pre.extend_from_slice(&b.word.0);
                        }
                    }
                }
                (pre, blocks.last().expect("checked").word.0.clone())
            }
        };
        Ok(Expanded::new(pre, period))
    }

    /// Apply a letter map (e.g. a projection onto column classes).
    pub fn map_letters(&self, f: impl Fn(usize) -> usize) -> SequenceSpec {
        let m = |w: &Word| Word(w.0.iter().map(|&l| f(l)).collect());
        match self {
            SequenceSpec::Periodic { preperiod, period } => SequenceSpec::Periodic {
                preperiod: m(preperiod),
                period: m(period),
            },
            SequenceSpec::BlockProgram { blocks } => SequenceSpec::BlockProgram {
                blocks: blocks
                    .iter()
                    .map(|b| Block {
                        word: m(&b.word),
                        repeat: b.repeat,
                    })
                    .collect(),
            },
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Periodic { preperiod, period } => write!(f, "{preperiod}({period})^inf"),
            SequenceSpec::BlockProgram { blocks } => {
                for b in blocks {
                    match b.repeat {
                        Repeat::Times(n) => write!(f, "{}^{n} ", b.word)?,
                        Repeat::Tail => write!(f, "{}^inf", b.word)?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// `pre · period^∞` with the period reduced to its primitive root and the
/// preperiod shortened as far as the period allows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expanded {
    pre: Vec<usize>,
    period: Vec<usize>,
}

impl Expanded {
    pub fn new(mut pre: Vec<usize>, period: Vec<usize>) -> Self {
        let q = period.len();
        let root = (1..=q)
            .find(|&d| q.is_multiple_of(d) && (d..q).all(|i| period[i] == period[i - d]))
            .unwrap_or(q);
        let mut period: Vec<usize> = period[..root].to_vec();
        while let Some(&last) = pre.last() {
            if last != *period.last().expect("nonempty period") {
                break;
            }
            pre.pop();
            period.rotate_right(1);
        }
        Expanded { pre, period }
    }

    pub fn preperiod(&self) -> &[usize] {
        &self.pre
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    /// Letter at 0-based position `n`.
    #[inline]
    pub fn letter(&self, n: usize) -> usize {
        if n < self.pre.len() {
            self.pre[n]
        } else {
            self.period[(n - self.pre.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, k: usize) -> Vec<usize> {
        (0..k).map(|n| self.letter(n)).collect()
    }

    pub fn window(&self, start: usize, len: usize) -> Vec<usize> {
        (start..start + len).map(|n| self.letter(n)).collect()
    }

    /// Number of distinct shifts: windows starting later repeat earlier ones.
    pub fn distinct_starts(&self) -> usize {
        self.pre.len() + self.period.len()
    }

    /// Limiting letter frequencies over an alphabet of size `alphabet`.
    pub fn frequencies(&self, alphabet: usize) -> Vec<f64> {
        let mut f = vec![0.0; alphabet];
        for &l in &self.period {
            f[l] += 1.0 / self.period.len() as f64;
        }
        f
    }
}
