use super::partition::Partition;

/// Standard Young tableau: 1..=n placed with rows and columns increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SYTableau {
    shape: Partition,
    rows: Vec<Vec<usize>>,
}

impl SYTableau {
    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// (row, col) of entry `k` (1-based entries).
    pub fn position(&self, k: usize) -> (usize, usize) {
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(c) = row.iter().position(|&e| e == k) {
                return (r, c);
            }
        }
        panic!("entry {k} not in tableau");
    }

    /// `col − row` of entry `k`.
    pub fn content(&self, k: usize) -> isize {
        let (r, c) = self.position(k);
        c as isize - r as isize
    }

    /// Tableau with `k` and `k+1` exchanged, if it is still standard.
    pub fn swapped(&self, k: usize) -> Option<Self> {
        let (r1, c1) = self.position(k);
        let (r2, c2) = self.position(k + 1);
        if r1 == r2 || c1 == c2 {
            return None;
        }
        let mut rows = self.rows.clone();
        rows[r1][c1] = k + 1;
        rows[r2][c2] = k;
        Some(Self { shape: self.shape.clone(), rows })
    }

    pub fn is_standard(&self) -> bool {
        let rows_ok = self.rows.iter().all(|r| r.windows(2).all(|w| w[0] < w[1]));
        let cols_ok = self.rows.windows(2).all(|pair| pair[1].iter().enumerate().all(|(c, v)| pair[0][c] < *v));
        rows_ok && cols_ok
    }
}

/// Every SYT of shape λ, ordered lexicographically by the sequence
/// (row of 1, row of 2, …, row of n); the row-reading tableau comes first.
pub fn enumerate_syt(shape: &Partition) -> Vec<SYTableau> {
    fn rec(shape: &Partition, k: usize, rows: &mut Vec<Vec<usize>>, out: &mut Vec<SYTableau>) {
        if k > shape.n() {
            out.push(SYTableau { shape: shape.clone(), rows: rows.clone() });
            return;
        }
        for r in 0..shape.len() {
            let len = rows[r].len();
            let fits = len < shape.parts()[r] && (r == 0 || rows[r - 1].len() > len);
            if fits {
                rows[r].push(k);
                rec(shape, k + 1, rows, out);
                rows[r].pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(shape, 1, &mut vec![Vec::new(); shape.len()], &mut out);
    out
}

/// Semistandard Young tableau over the alphabet 0..d.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SSYTableau {
    shape: Partition,
    rows: Vec<Vec<usize>>,
}

impl SSYTableau {
    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn is_semistandard(&self) -> bool {
        let rows_ok = self.rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
        let cols_ok = self.rows.windows(2).all(|pair| pair[1].iter().enumerate().all(|(c, v)| pair[0][c] < *v));
        rows_ok && cols_ok
    }
}

/// Every SSYT of shape λ with entries below `d`, filled cell by cell in
/// row-major order.
pub fn enumerate_ssyt(shape: &Partition, d: usize) -> Vec<SSYTableau> {
    let cells: Vec<(usize, usize)> = shape.cells().collect();
    let mut rows: Vec<Vec<usize>> = shape.parts().iter().map(|&p| vec![0; p]).collect();
    let mut out = Vec::new();
    fn rec(k: usize, cells: &[(usize, usize)], rows: &mut Vec<Vec<usize>>, d: usize, shape: &Partition, out: &mut Vec<SSYTableau>) {
        if k == cells.len() {
            out.push(SSYTableau { shape: shape.clone(), rows: rows.clone() });
            return;
        }
        let (r, c) = cells[k];
        let lo_row = if c > 0 { rows[r][c - 1] } else { 0 };
        let lo_col = if r > 0 { rows[r - 1][c] + 1 } else { 0 };
        for v in lo_row.max(lo_col)..d {
            rows[r][c] = v;
            rec(k + 1, cells, rows, d, shape, out);
        }
    }
    if shape.len() <= d {
        rec(0, &cells, &mut rows, d, shape, &mut out);
    }
    out
}
