//! Haar system on `[0, 1]` with `2^level` functions, normalized in `L_p`.
//!
//! Coordinate 0 is the constant function; coordinate `2^j + k` is the Haar
//! function on the dyadic interval `[k 2^-j, (k+1) 2^-j)`, positive on the left
//! half. A finite combination is a step function on the `2^level` dyadic cells
//! of length `2^-level`, so all integrals are exact finite sums.

/// Value of the `L_r`-normalized Haar function `index` on `cell`.
pub(crate) fn haar_value(level: u32, index: usize, cell: usize, r: f64) -> f64 {
    if index == 0 {
        return 1.0;
    }
    let j = usize::BITS - 1 - index.leading_zeros();
    let k = index - (1usize << j);
    let shift = level - j;
    if cell >> shift != k {
        return 0.0;
    }
    let amp = if r.is_infinite() {
        1.0
    } else {
        (2f64).powf(j as f64 / r)
    };
    if (cell >> (shift - 1)) & 1 == 0 {
        amp
    } else {
        -amp
    }
}

/// Cell values of `sum_i c_i h_i` with `h_i` normalized in `L_r`.
pub(crate) fn synthesize(level: u32, coefs: &[f64], r: f64) -> Vec<f64> {
    let cells = 1usize << level;
    let mut out = vec![0.0; cells];
    for (i, &c) in coefs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (cell, o) in out.iter_mut().enumerate() {
            let h = haar_value(level, i, cell, r);
            if h != 0.0 {
                *o += c * h;
            }
        }
    }
    out
}

/// `L_p` norm of a step function given by equal-length cell values.
pub(crate) fn step_norm(cells: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return cells.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let w = 1.0 / cells.len() as f64;
    (cells.iter().map(|v| v.abs().powf(p)).sum::<f64>() * w).powf(1.0 / p)
}

pub(crate) fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Coefficients (against the `L_p`-normalized system) of the Hölder extremal
/// functional of the step function `cells`.
pub(crate) fn holder_functional(level: u32, cells: &[f64], p: f64) -> Vec<f64> {
    let norm = step_norm(cells, p);
    let w = 1.0 / cells.len() as f64;
    let g: Vec<f64> = cells
        .iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                v.signum() * (v.abs() / norm).powf(p - 1.0)
            }
        })
        .collect();
    (0..cells.len())
        .map(|i| {
            g.iter()
                .enumerate()
                .map(|(c, gv)| gv * haar_value(level, i, c, p))
                .sum::<f64>()
                * w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_in_lp() {
        for p in [1.5, 2.0, 3.0] {
            for i in 0..8 {
                let mut c = vec![0.0; 8];
                c[i] = 1.0;
                let f = synthesize(3, &c, p);
                assert!((step_norm(&f, p) - 1.0).abs() < 1e-12, "p={p} i={i}");
            }
        }
    }

    #[test]
    fn biorthogonal_pairing() {
        // <h_i^(p), h_j^(q)> = delta_ij.
        let p = 3.0;
        let q = conjugate(p);
        for i in 0..8 {
            for j in 0..8 {
                let s: f64 = (0..8)
                    .map(|c| haar_value(3, i, c, p) * haar_value(3, j, c, q))
                    .sum::<f64>()
                    / 8.0;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }
}
