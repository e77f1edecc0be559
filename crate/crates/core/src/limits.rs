use crate::error::{Error, Result};

/// Size guards shared by the brute-force parts of the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeLimits {
    /// Maximum number of lattice elements.
    pub max_elements: usize,
    /// Maximum cells in one function table; for naive enumeration, the
    /// total cells over all candidate tables.
    pub max_cells: u64,
    /// Maximum number of tables held by a closure or produced by an enumeration.
    pub max_tables: u64,
}

impl Default for SizeLimits {
    fn default() -> Self {
        SizeLimits {
            max_elements: 4096,
            max_cells: 1_000_000,
            max_tables: 100_000,
        }
    }
}

impl SizeLimits {
    pub(crate) fn check_elements(&self, n: usize) -> Result<()> {
        if n > self.max_elements {
            return Err(Error::SizeGuardExceeded {
                what: "lattice elements",
                needed: n.to_string(),
                limit: self.max_elements as u64,
            });
        }
        Ok(())
    }

    /// Returns `size^arity` if it fits in one table.
    pub fn table_len(&self, size: usize, arity: usize) -> Result<usize> {
        let exceeded = || Error::SizeGuardExceeded {
            what: "table cells",
            needed: format!("{size}^{arity}"),
            limit: self.max_cells,
        };
        let len = u32::try_from(arity)
            .ok()
            .and_then(|a| (size as u64).checked_pow(a))
            .ok_or_else(exceeded)?;
        if len > self.max_cells {
            return Err(exceeded());
        }
        Ok(len as usize)
    }
}
