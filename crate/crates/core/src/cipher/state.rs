use std::fmt;

/// Size of a cipher block in octets.
pub const BLOCK_LEN: usize = 16;

/// The 128-bit cipher state.
///
/// Viewed as a 4×4 matrix of field elements filled column by column:
/// byte `i` sits at row `i % 4`, column `i / 4`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StateBlock(pub [u8; BLOCK_LEN]);

impl StateBlock {
    pub const fn new(bytes: [u8; BLOCK_LEN]) -> Self {
        Self(bytes)
    }

    pub const fn zero() -> Self {
        Self([0; BLOCK_LEN])
    }

    pub fn as_bytes(&self) -> &[u8; BLOCK_LEN] {
        &self.0
    }

    pub fn into_bytes(self) -> [u8; BLOCK_LEN] {
        self.0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0[col * 4 + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.0[col * 4 + row] = value;
    }

    /// Row-major matrix view: `m[row][col]`.
    pub fn to_matrix(&self) -> [[u8; 4]; 4] {
        let mut m = [[0u8; 4]; 4];
        for (row, line) in m.iter_mut().enumerate() {
            for (col, cell) in line.iter_mut().enumerate() {
                *cell = self.get(row, col);
            }
        }
        m
    }

    pub fn from_matrix(m: &[[u8; 4]; 4]) -> Self {
        let mut s = Self::zero();
        for (row, line) in m.iter().enumerate() {
            for (col, &cell) in line.iter().enumerate() {
                s.set(row, col, cell);
            }
        }
        s
    }
}

impl From<[u8; BLOCK_LEN]> for StateBlock {
    fn from(bytes: [u8; BLOCK_LEN]) -> Self {
        Self(bytes)
    }
}

impl fmt::Debug for StateBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateBlock({})", hex::encode(self.0))
    }
}
