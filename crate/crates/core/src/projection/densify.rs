use super::DepthMap;
use crate::scalar::Real;

/// 2x2 max-pool densification.
///
/// For every pixel `(r, c)` the maximum `w` over the window `{r, r+1} x {c, c+1}` is
/// taken (cells past the border count as zero) and written back into those same four
/// cells with max-accumulation. The result is computed out of place, so it does not
/// depend on visiting order, and it coincides with a 3x3 max dilation.
pub fn maxpool_densify<T: Real>(map: &DepthMap<T>) -> DepthMap<T> {
    let (w, h) = (map.width(), map.height());
    let src = map.data();
    let mut out = vec![T::zero(); src.len()];
    let at = |r: usize, c: usize| {
        if r < h && c < w {
            src[r * w + c]
        } else {
            T::zero()
        }
    };
    for r in 0..h {
        for c in 0..w {
            let m = at(r, c).max(at(r, c + 1)).max(at(r + 1, c)).max(at(r + 1, c + 1));
            if m == T::zero() {
                continue;
            }
            for (rr, cc) in [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)] {
                if rr < h && cc < w {
                    let cell = &mut out[rr * w + cc];
                    *cell = cell.max(m);
                }
            }
        }
    }
    map.with_data(out)
}
