/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Clone, Copy)]
pub(crate) enum Tr {
    N,
    T,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Mat { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// `c = beta * c + op(a) * op(b)`.
    pub(crate) fn gemm(c: &mut Mat, a: &Mat, ta: Tr, b: &Mat, tb: Tr, beta: f64) {
        let (m, k, rsa, csa) = match ta {
            Tr::N => (a.rows, a.cols, a.cols as isize, 1),
            Tr::T => (a.cols, a.rows, 1, a.cols as isize),
        };
        let (kb, n, rsb, csb) = match tb {
            Tr::N => (b.rows, b.cols, b.cols as isize, 1),
            Tr::T => (b.cols, b.rows, 1, b.cols as isize),
        };
        assert_eq!(k, kb, "inner dimensions differ");
        assert_eq!((c.rows, c.cols), (m, n), "output shape mismatch");
        if m == 0 || n == 0 {
            return;
        }
        if k == 0 {
            c.data.iter_mut().for_each(|x| *x *= beta);
            return;
        }
        // SAFETY: the asserted shapes bound every access by the slices' lengths.
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                a.data.as_ptr(),
                rsa,
                csa,
                b.data.as_ptr(),
                rsb,
                csb,
                beta,
                c.data.as_mut_ptr(),
                c.cols as isize,
                1,
            );
        }
    }

    pub(crate) fn mul(a: &Mat, ta: Tr, b: &Mat, tb: Tr) -> Mat {
        let rows = match ta {
            Tr::N => a.rows,
            Tr::T => a.cols,
        };
        let cols = match tb {
            Tr::N => b.cols,
            Tr::T => b.rows,
        };
        let mut c = Mat::zeros(rows, cols);
        Mat::gemm(&mut c, a, ta, b, tb, 0.0);
        c
    }

    /// Adds `bias` (a `1 x cols` matrix) to every row.
    pub(crate) fn add_row_vec(&mut self, bias: &Mat) {
        for i in 0..self.rows {
            for (x, b) in self.row_mut(i).iter_mut().zip(&bias.data) {
                *x += b;
            }
        }
    }

    /// Column sums accumulated into `out`.
    pub(crate) fn col_sums_into(&self, out: &mut Mat) {
        for i in 0..self.rows {
            for (o, x) in out.data.iter_mut().zip(self.row(i)) {
                *o += x;
            }
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Mat) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y;
        }
    }
}
