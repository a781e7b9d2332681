//! Named, ranked symbols.
//!
//! Every variable in the engine (independent variables, dependent
//! variables, opaque functions, parameters) is a [`Sym`]: a name plus a
//! declaration rank. Ordering is by rank first, so canonical forms follow
//! declaration order rather than alphabetical order.

use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym {
    rank: u32,
    name: Arc<str>,
}

impl Sym {
    pub fn new(rank: u32, name: impl AsRef<str>) -> Self {
        Sym {
            rank,
            name: Arc::from(name.as_ref()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.rank)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A symbolic constant living in the coefficient field.
///
/// `nonzero` records the declaration `p != 0`; only nonzero parameters may
/// appear in denominators of user input.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param {
    pub sym: Sym,
    pub nonzero: bool,
}

impl Param {
    pub fn new(rank: u32, name: impl AsRef<str>, nonzero: bool) -> Self {
        Param {
            sym: Sym::new(rank, name),
            nonzero,
        }
    }

    pub fn name(&self) -> &str {
        self.sym.name()
    }
}

impl fmt::Debug for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.sym)?;
        if self.nonzero {
            f.write_str("!=0")?;
        }
        Ok(())
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.sym.name())
    }
}
