use super::SpaceLayout;

/// Splits basis indices of a layout into a target part (digits of the
/// selected factors, in selection order) and a rest part (remaining digits,
/// in layout order).
pub(crate) struct FactorSplit {
    pub target_dim: usize,
    pub rest_dim: usize,
    full: Vec<usize>,
}

impl FactorSplit {
    /// `targets` are factor positions; they must be distinct and in range.
    pub fn new(layout: &SpaceLayout, targets: &[usize]) -> Self {
        let dims = layout.dims();
        let n = dims.len();
        let is_target: Vec<bool> = (0..n).map(|p| targets.contains(&p)).collect();
        let target_dim: usize = targets.iter().map(|&p| dims[p]).product();
        let rest_dim: usize = (0..n).filter(|&p| !is_target[p]).map(|p| dims[p]).product();
        let total = layout.dim();

        // Stride of each factor inside the target and rest sub-indices.
        let mut target_stride = vec![0usize; n];
        let mut acc = 1;
        for &p in targets.iter().rev() {
            target_stride[p] = acc;
            acc *= dims[p];
        }
        let mut rest_stride = vec![0usize; n];
        acc = 1;
        for p in (0..n).rev().filter(|&p| !is_target[p]) {
            rest_stride[p] = acc;
            acc *= dims[p];
        }

        let mut full = vec![0usize; total];
        let mut digits = vec![0usize; n];
        for idx in 0..total {
            let (mut t, mut r) = (0, 0);
            for p in 0..n {
                if is_target[p] {
                    t += digits[p] * target_stride[p];
                } else {
                    r += digits[p] * rest_stride[p];
                }
            }
            full[r * target_dim + t] = idx;
            // Odometer increment, last factor fastest.
            for p in (0..n).rev() {
                digits[p] += 1;
                if digits[p] < dims[p] {
                    break;
                }
                digits[p] = 0;
            }
        }
        FactorSplit {
            target_dim,
            rest_dim,
            full,
        }
    }

    #[inline]
    pub fn full(&self, rest: usize, target: usize) -> usize {
        self.full[rest * self.target_dim + target]
    }
}
