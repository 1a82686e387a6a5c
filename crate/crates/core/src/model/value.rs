use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A constant. Constants are totally ordered by the bytes of their text,
/// which is also the order SQLite's binary collation uses for TEXT.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constant(Arc<str>);

impl Constant {
    pub fn new(text: impl AsRef<str>) -> Result<Self> {
        let text = text.as_ref();
        if text.is_empty() {
            return Err(Error::InvalidConstant(text.into(), "constants must be nonempty"));
        }
        if text.starts_with('@') {
            return Err(Error::InvalidConstant(text.into(), "the '@' prefix is reserved for encoded nulls"));
        }
        Ok(Constant(text.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A Skolem term over constants, `f(v1, ..., vk)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkolemTerm {
    pub function: Arc<str>,
    pub args: Vec<Value>,
}

/// A labeled null: either an anonymous fresh null or a Skolem term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Null {
    Fresh(u64),
    Skolem(Arc<SkolemTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Const(Constant),
    Null(Null),
}

impl Value {
    /// Panics on text that is not a valid constant; meant for tests and fixtures.
    pub fn constant(text: &str) -> Value {
        Value::Const(Constant::new(text).expect("valid constant"))
    }

    pub fn fresh(id: u64) -> Value {
        Value::Null(Null::Fresh(id))
    }

    pub fn skolem(function: impl Into<Arc<str>>, args: Vec<Value>) -> Value {
        Value::Null(Null::Skolem(Arc::new(SkolemTerm { function: function.into(), args })))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Value::Const(_))
    }

    pub fn as_const(&self) -> Option<&Constant> {
        match self {
            Value::Const(c) => Some(c),
            Value::Null(_) => None,
        }
    }
}

impl From<Constant> for Value {
    fn from(c: Constant) -> Self {
        Value::Const(c)
    }
}

pub(crate) fn is_bare_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

pub(crate) fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("'")?;
    for ch in s.chars() {
        if ch == '\'' {
            f.write_str("''")?;
        } else {
            write!(f, "{ch}")?;
        }
    }
    f.write_str("'")
}

/// Fact-file rendering: bare identifiers stay bare, anything else is quoted;
/// nulls are `?N<id>` or `?f(args)`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(c) if is_bare_ident(c.as_str()) => f.write_str(c.as_str()),
            Value::Const(c) => write_quoted(f, c.as_str()),
            Value::Null(Null::Fresh(id)) => write!(f, "?N{id}"),
            Value::Null(Null::Skolem(t)) => {
                write!(f, "?{}(", t.function)?;
                for (i, a) in t.args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
