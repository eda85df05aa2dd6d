use crate::image::Gray;

/// Summed-area table with one row and column of zero padding:
/// `at(x, y)` is the sum of all pixels in `[0, x) x [0, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummedAreaTable {
    width: usize,
    height: usize,
    table: Vec<u64>,
}

impl SummedAreaTable {
    pub fn new(img: &Gray) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut table = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += img.get(x, y) as u64;
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        Self {
            width: w,
            height: h,
            table,
        }
    }

    /// Image width (the table is one larger in each direction).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u64 {
        self.table[y * (self.width + 1) + x]
    }

    /// Sum over the half-open rectangle `[x0, x1) x [y0, y1)`.
    #[inline]
    pub fn rect_sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u64 {
        debug_assert!(x0 <= x1 && y0 <= y1 && x1 <= self.width && y1 <= self.height);
        self.at(x1, y1) + self.at(x0, y0) - self.at(x1, y0) - self.at(x0, y1)
    }
}

/// Free-function form of [`SummedAreaTable::new`].
pub fn integral_image(img: &Gray) -> SummedAreaTable {
    SummedAreaTable::new(img)
}
