//! Dense bit-packed matrices over GF(2).

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A binary matrix stored row by row, each row packed into `u64` words.
/// Tail bits past `cols` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD);
        Gf2Matrix {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Gf2Matrix::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Gf2Matrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &bit) in row.iter().enumerate() {
                m.set(r, c, bit);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.words_per_row + c / WORD] >> (c % WORD) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.words_per_row + c / WORD];
        if value {
            *w |= 1 << (c % WORD);
        } else {
            *w &= !(1 << (c % WORD));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Rank over GF(2) by row elimination on a private copy.
    pub fn rank(&self) -> usize {
        let wpr = self.words_per_row;
        let mut data = self.data.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (w, bit) = (col / WORD, 1u64 << (col % WORD));
            let Some(pivot) = (rank..self.rows).find(|&r| data[r * wpr + w] & bit != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..wpr {
                    data.swap(pivot * wpr + k, rank * wpr + k);
                }
            }
            // columns before `col` are already cleared below the pivot row,
            // so only words from `w` onward need the XOR
            for r in rank + 1..self.rows {
                if data[r * wpr + w] & bit != 0 {
                    for k in w..wpr {
                        let p = data[rank * wpr + k];
                        data[r * wpr + k] ^= p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn hstack(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        Gf2Matrix::block_assemble(&[vec![self.clone(), other.clone()]])
    }

    pub fn vstack(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        Gf2Matrix::block_assemble(&[vec![self.clone()], vec![other.clone()]])
    }

    /// Concatenates a grid of blocks. Every block in a grid row must share
    /// its row count, every block in a grid column its column count.
    pub fn block_assemble(grid: &[Vec<Gf2Matrix>]) -> Result<Gf2Matrix> {
        let Some(first) = grid.first() else {
            return Ok(Gf2Matrix::zeros(0, 0));
        };
        let widths: Vec<usize> = first.iter().map(Gf2Matrix::cols).collect();
        let mut heights = Vec::with_capacity(grid.len());
        for (bi, brow) in grid.iter().enumerate() {
            if brow.len() != widths.len() {
                return Err(Error::InvalidInput(format!(
                    "block row {bi} has {} blocks, expected {}",
                    brow.len(),
                    widths.len()
                )));
            }
            let h = brow.first().map_or(0, Gf2Matrix::rows);
            for (bj, block) in brow.iter().enumerate() {
                if block.rows() != h || block.cols() != widths[bj] {
                    return Err(Error::InvalidInput(format!(
                        "block ({bi},{bj}) is {}x{}, expected {}x{}",
                        block.rows(),
                        block.cols(),
                        h,
                        widths[bj]
                    )));
                }
            }
            heights.push(h);
        }
        let mut out = Gf2Matrix::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (brow, &h) in grid.iter().zip(&heights) {
            let mut c0 = 0;
            for (block, &w) in brow.iter().zip(&widths) {
                for r in 0..h {
                    for c in 0..w {
                        if block.get(r, c) {
                            out.set(r0 + r, c0 + c, true);
                        }
                    }
                }
                c0 += w;
            }
            r0 += h;
        }
        Ok(out)
    }
}

/// The `eta × eta` shift block `D^(eta - m)`: identity `I_m` in the lower
/// left corner, zero elsewhere. Entry `(eta - m + k, k)` is 1 for `k < m`.
pub fn shift_block(eta: usize, m: usize) -> Result<Gf2Matrix> {
    if m > eta {
        return Err(Error::InvalidInput(format!(
            "shift block needs m <= eta, got m = {m}, eta = {eta}"
        )));
    }
    let mut b = Gf2Matrix::zeros(eta, eta);
    for k in 0..m {
        b.set(eta - m + k, k, true);
    }
    Ok(b)
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        fmt::Display::fmt(self, f)
    }
}

/// 0/1 grid, one row per line.
impl fmt::Display for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook elimination on `Vec<Vec<bool>>`, independent of the packed path.
    fn naive_rank(mut m: Vec<Vec<bool>>) -> usize {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..rows).find(|&r| m[r][c]) {
                m.swap(p, rank);
                for r in 0..rows {
                    if r != rank && m[r][c] {
                        for k in 0..cols {
                            let v = m[rank][k];
                            m[r][k] ^= v;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    fn random_bits(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Vec<Vec<bool>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_bool(density)).collect())
            .collect()
    }

    #[test]
    fn shift_block_examples() {
        assert_eq!(shift_block(3, 0).unwrap(), Gf2Matrix::zeros(3, 3));
        assert_eq!(shift_block(3, 3).unwrap(), Gf2Matrix::identity(3));
        let b = shift_block(6, 4).unwrap();
        let ones: Vec<(usize, usize)> = (0..6)
            .flat_map(|r| (0..6).map(move |c| (r, c)))
            .filter(|&(r, c)| b.get(r, c))
            .collect();
        assert_eq!(ones, vec![(2, 0), (3, 1), (4, 2), (5, 3)]);
        assert!(shift_block(2, 3).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(shift_block(5, 3).unwrap().rank(), 3);
        assert_eq!(Gf2Matrix::zeros(4, 4).rank(), 0);
        assert_eq!(Gf2Matrix::zeros(0, 0).rank(), 0);
        assert_eq!(Gf2Matrix::zeros(0, 7).rank(), 0);
        assert_eq!(Gf2Matrix::identity(130).rank(), 130);
    }

    #[test]
    fn rank_of_shift_block_is_m() {
        for eta in 0..=64 {
            for m in 0..=eta {
                assert_eq!(shift_block(eta, m).unwrap().rank(), m, "eta {eta} m {m}");
            }
        }
    }

    #[test]
    fn rank_matches_naive_and_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let rows = rng.gen_range(0..90);
            let cols = rng.gen_range(0..140);
            let density = rng.gen_range(0.02..0.6);
            let bits = random_bits(&mut rng, rows, cols, density);
            let m = if rows == 0 { Gf2Matrix::zeros(0, cols) } else { Gf2Matrix::from_rows(&bits) };
            let r = m.rank();
            assert_eq!(r, naive_rank(bits));
            assert_eq!(r, m.transpose().rank());
        }
    }

    #[test]
    fn rank_invariant_under_row_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let rows = rng.gen_range(2..40);
            let cols = rng.gen_range(1..100);
            let mut bits = random_bits(&mut rng, rows, cols, 0.3);
            let before = Gf2Matrix::from_rows(&bits).rank();
            for _ in 0..10 {
                let a = rng.gen_range(0..rows);
                let b = rng.gen_range(0..rows);
                if rng.gen_bool(0.5) {
                    bits.swap(a, b);
                } else if a != b {
                    let src = bits[b].clone();
                    for (x, y) in bits[a].iter_mut().zip(src) {
                        *x ^= y;
                    }
                }
            }
            assert_eq!(Gf2Matrix::from_rows(&bits).rank(), before);
        }
    }

    #[test]
    fn block_assembly_shapes() {
        let b = shift_block(3, 2).unwrap();
        let g = vec![vec![b.clone(), b.clone()], vec![b.clone(), b.clone()]];
        let m = Gf2Matrix::block_assemble(&g).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 6));
        assert_eq!(Gf2Matrix::block_assemble(&[vec![b.clone()]]).unwrap(), b);
        assert_eq!(b.hstack(&b).unwrap().cols(), 6);
        assert_eq!(b.vstack(&b).unwrap().rows(), 6);
        let bad = vec![vec![b.clone(), Gf2Matrix::zeros(2, 3)]];
        assert!(Gf2Matrix::block_assemble(&bad).is_err());
        let ragged = vec![vec![b.clone(), b.clone()], vec![b.clone()]];
        assert!(Gf2Matrix::block_assemble(&ragged).is_err());
    }

    #[test]
    fn block_rank_subadditive_and_diagonal_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let eta = rng.gen_range(1..12);
            let blocks: Vec<Vec<Gf2Matrix>> = (0..2)
                .map(|_| {
                    (0..2)
                        .map(|_| shift_block(eta, rng.gen_range(0..=eta)).unwrap())
                        .collect()
                })
                .collect();
            let sum: usize = blocks.iter().flatten().map(Gf2Matrix::rank).sum();
            assert!(Gf2Matrix::block_assemble(&blocks).unwrap().rank() <= sum);

            let z = Gf2Matrix::zeros(eta, eta);
            let diag = vec![
                vec![blocks[0][0].clone(), z.clone()],
                vec![z, blocks[1][1].clone()],
            ];
            assert_eq!(
                Gf2Matrix::block_assemble(&diag).unwrap().rank(),
                blocks[0][0].rank() + blocks[1][1].rank()
            );
        }
    }

    #[test]
    fn display_grid() {
        assert_eq!(shift_block(2, 1).unwrap().to_string(), "00\n10\n");
    }
}
