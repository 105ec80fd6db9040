//! 8x8 DCT-II / DCT-III transform pair with the JPEG scaling convention.

pub const BLOCK: usize = 8;

/// cos((2x + 1) * u * pi / 16), indexed [x][u].
fn cos_table() -> [[f64; BLOCK]; BLOCK] {
    let mut t = [[0.0; BLOCK]; BLOCK];
    for (x, row) in t.iter_mut().enumerate() {
        for (u, v) in row.iter_mut().enumerate() {
            *v = (((2 * x + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    t
}

thread_local! {
    static COS: [[f64; BLOCK]; BLOCK] = cos_table();
}

#[inline]
fn c(u: usize) -> f64 {
    if u == 0 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0
    }
}

/// Forward 8x8 DCT-II: F(u,v) = 1/4 C(u)C(v) sum f(x,y) cos.. cos..
pub fn forward(block: &[f64; 64]) -> [f64; 64] {
    COS.with(|cos| {
        let mut out = [0.0; 64];
        for v in 0..BLOCK {
            for u in 0..BLOCK {
                let mut acc = 0.0;
                for y in 0..BLOCK {
                    for x in 0..BLOCK {
                        acc += block[y * BLOCK + x] * cos[x][u] * cos[y][v];
                    }
                }
                out[v * BLOCK + u] = 0.25 * c(u) * c(v) * acc;
            }
        }
        out
    })
}

/// Inverse 8x8 DCT (DCT-III with matching scale).
pub fn inverse(coefs: &[f64; 64]) -> [f64; 64] {
    COS.with(|cos| {
        let mut out = [0.0; 64];
        for y in 0..BLOCK {
            for x in 0..BLOCK {
                let mut acc = 0.0;
                for v in 0..BLOCK {
                    for u in 0..BLOCK {
                        acc += c(u) * c(v) * coefs[v * BLOCK + u] * cos[x][u] * cos[y][v];
                    }
                }
                out[y * BLOCK + x] = 0.25 * acc;
            }
        }
        out
    })
}
