use std::fmt;

use serde::{Deserialize, Serialize};

/// Short ASCII identifier stored inline so atoms stay `Copy`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name([u8; Name::CAP]);

impl Name {
    pub const CAP: usize = 16;

    /// Panics on names that are empty, too long or not ASCII.
    pub fn new(s: &str) -> Self {
        Self::try_new(s).unwrap_or_else(|| panic!("invalid name {s:?}"))
    }

    pub fn try_new(s: &str) -> Option<Self> {
        let b = s.as_bytes();
        if b.is_empty() || b.len() >= Self::CAP || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return None;
        }
        let mut buf = [0u8; Self::CAP];
        buf[..b.len()].copy_from_slice(b);
        Some(Name(buf))
    }

    pub fn as_str(&self) -> &str {
        let n = self.0.iter().position(|&c| c == 0).unwrap_or(Self::CAP);
        std::str::from_utf8(&self.0[..n]).expect("ascii name")
    }

    /// Coefficient index for names of the form `b<digits>`.
    pub fn index(&self) -> Option<u32> {
        self.as_str().strip_prefix('b').and_then(|d| d.parse().ok())
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl Serialize for Name {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Name::try_new(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid name {s:?}")))
    }
}

/// How an atom relates to its underlying coefficient function.
///
/// Canonical polynomials only use `Re`, `Im` and `Formal`; `Full` and `Conj`
/// stand for the complex function itself and its conjugate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Re,
    Im,
    Full,
    Conj,
    Formal,
}

impl Family {
    fn tag(self) -> &'static str {
        match self {
            Family::Re => "re",
            Family::Im => "im",
            Family::Full => "cx",
            Family::Conj => "cj",
            Family::Formal => "fp",
        }
    }

    fn from_tag(t: &str) -> Option<Self> {
        Some(match t {
            "re" => Family::Re,
            "im" => Family::Im,
            "cx" => Family::Full,
            "cj" => Family::Conj,
            "fp" => Family::Formal,
            _ => return None,
        })
    }

    pub fn is_real(self) -> bool {
        matches!(self, Family::Re | Family::Im | Family::Formal)
    }
}

/// `∂_x^deriv` of one coefficient function, or a formal parameter.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub family: Family,
    pub name: Name,
    pub deriv: u32,
}

impl Atom {
    pub fn new(family: Family, name: &str, deriv: u32) -> Self {
        Atom { family, name: Name::new(name), deriv }
    }

    pub fn re(name: &str, deriv: u32) -> Self {
        Self::new(Family::Re, name, deriv)
    }

    pub fn im(name: &str, deriv: u32) -> Self {
        Self::new(Family::Im, name, deriv)
    }

    pub fn full(name: &str, deriv: u32) -> Self {
        Self::new(Family::Full, name, deriv)
    }

    pub fn conj_of(name: &str, deriv: u32) -> Self {
        Self::new(Family::Conj, name, deriv)
    }

    pub fn formal(name: &str) -> Self {
        Self::new(Family::Formal, name, 0)
    }

    pub fn with_deriv(self, deriv: u32) -> Self {
        Atom { deriv, ..self }
    }

    /// Identity of the underlying function, ignoring the derivative count.
    pub fn base(&self) -> (Family, Name) {
        (self.family, self.name)
    }

    pub fn dump(&self) -> String {
        format!("{}:{}:{}", self.family.tag(), self.name, self.deriv)
    }

    pub fn parse_dump(s: &str) -> Option<Self> {
        let mut it = s.split(':');
        let family = Family::from_tag(it.next()?)?;
        let name = Name::try_new(it.next()?)?;
        let deriv = it.next()?.parse().ok()?;
        if it.next().is_some() {
            return None;
        }
        Some(Atom { family, name, deriv })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let primes = match self.deriv {
            0 => String::new(),
            d @ 1..=3 => "'".repeat(d as usize),
            d => format!("^({d})"),
        };
        match self.family {
            Family::Re => write!(f, "Re({}{})", self.name, primes),
            Family::Im => write!(f, "Im({}{})", self.name, primes),
            Family::Full => write!(f, "{}{}", self.name, primes),
            Family::Conj => write!(f, "conj({}{})", self.name, primes),
            Family::Formal => write!(f, "{}", self.name),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
