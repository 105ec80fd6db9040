//! Single-channel raster helpers shared by the resampling, codec, and ISP
//! paths. All arithmetic accumulates in f64.

/// One channel of samples, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Plane {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Plane {
        debug_assert_eq!(data.len(), height * width);
        Plane {
            height,
            width,
            data,
        }
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Plane {
        Plane::new(height, width, vec![value; height * width])
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Reflect-101 sample: indices mirror around the edge pixel, so
    /// `get_reflect(-1) == get(1)`.
    #[inline]
    pub fn get_reflect(&self, y: isize, x: isize) -> f32 {
        let yy = reflect_index(y, self.height);
        let xx = reflect_index(x, self.width);
        self.data[yy * self.width + xx]
    }
}

/// Mirror an index into `[0, len)` without repeating the edge sample.
/// For len 1 every index maps to 0.
#[inline]
pub fn reflect_index(i: isize, len: usize) -> usize {
    let n = len as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut m = i % period;
    if m < 0 {
        m += period;
    }
    if m >= n {
        m = period - m;
    }
    m as usize
}

/// Bilinear resize with the align-corners-false coordinate mapping.
pub fn resize_bilinear(src: &Plane, th: usize, tw: usize) -> Plane {
    let (sh, sw) = (src.height, src.width);
    let ry = sh as f64 / th as f64;
    let rx = sw as f64 / tw as f64;
    let mut out = vec![0.0f32; th * tw];
    for dy in 0..th {
        let sy = ((dy as f64 + 0.5) * ry - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let fy = sy - y0 as f64;
        for dx in 0..tw {
            let sx = ((dx as f64 + 0.5) * rx - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let fx = sx - x0 as f64;
            let v00 = src.get(y0, x0) as f64;
            let v01 = src.get(y0, x1) as f64;
            let v10 = src.get(y1, x0) as f64;
            let v11 = src.get(y1, x1) as f64;
            let top = v00 + (v01 - v00) * fx;
            let bot = v10 + (v11 - v10) * fx;
            out[dy * tw + dx] = (top + (bot - top) * fy) as f32;
        }
    }
    Plane::new(th, tw, out)
}

/// Area resize: each target pixel averages its exact fractional source
/// footprint.
pub fn resize_area(src: &Plane, th: usize, tw: usize) -> Plane {
    let (sh, sw) = (src.height, src.width);
    let ry = sh as f64 / th as f64;
    let rx = sw as f64 / tw as f64;
    let mut out = vec![0.0f32; th * tw];
    for dy in 0..th {
        let y_lo = dy as f64 * ry;
        let y_hi = (dy + 1) as f64 * ry;
        let iy_lo = y_lo.floor() as usize;
        let iy_hi = (y_hi.ceil() as usize).min(sh);
        for dx in 0..tw {
            let x_lo = dx as f64 * rx;
            let x_hi = (dx + 1) as f64 * rx;
            let ix_lo = x_lo.floor() as usize;
            let ix_hi = (x_hi.ceil() as usize).min(sw);
            let mut acc = 0.0f64;
            let mut area = 0.0f64;
            for sy in iy_lo..iy_hi {
                let wy = overlap(sy as f64, sy as f64 + 1.0, y_lo, y_hi);
                if wy <= 0.0 {
                    continue;
                }
                for sx in ix_lo..ix_hi {
                    let wx = overlap(sx as f64, sx as f64 + 1.0, x_lo, x_hi);
                    if wx <= 0.0 {
                        continue;
                    }
                    let w = wy * wx;
                    acc += src.get(sy, sx) as f64 * w;
                    area += w;
                }
            }
            out[dy * tw + dx] = (acc / area) as f32;
        }
    }
    Plane::new(th, tw, out)
}

#[inline]
fn overlap(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> f64 {
    (a_hi.min(b_hi) - a_lo.max(b_lo)).max(0.0)
}

/// Keys cubic kernel.
#[inline]
fn cubic_weight(t: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        (((t - 5.0) * t + 8.0) * t - 4.0) * a
    } else {
        0.0
    }
}

/// Bicubic resize (4-tap Keys kernel, border indices clamped).
pub fn resize_bicubic(src: &Plane, th: usize, tw: usize, a: f64) -> Plane {
    let (sh, sw) = (src.height, src.width);
    let ry = sh as f64 / th as f64;
    let rx = sw as f64 / tw as f64;
    let mut out = vec![0.0f32; th * tw];
    for dy in 0..th {
        let sy = (dy as f64 + 0.5) * ry - 0.5;
        let y0 = sy.floor() as isize;
        let fy = sy - y0 as f64;
        let wy: [f64; 4] = [
            cubic_weight(fy + 1.0, a),
            cubic_weight(fy, a),
            cubic_weight(fy - 1.0, a),
            cubic_weight(fy - 2.0, a),
        ];
        for dx in 0..tw {
            let sx = (dx as f64 + 0.5) * rx - 0.5;
            let x0 = sx.floor() as isize;
            let fx = sx - x0 as f64;
            let wx: [f64; 4] = [
                cubic_weight(fx + 1.0, a),
                cubic_weight(fx, a),
                cubic_weight(fx - 1.0, a),
                cubic_weight(fx - 2.0, a),
            ];
            let mut acc = 0.0f64;
            for (j, wyj) in wy.iter().enumerate() {
                let yy = (y0 - 1 + j as isize).clamp(0, sh as isize - 1) as usize;
                for (i, wxi) in wx.iter().enumerate() {
                    let xx = (x0 - 1 + i as isize).clamp(0, sw as isize - 1) as usize;
                    acc += wyj * wxi * src.get(yy, xx) as f64;
                }
            }
            out[dy * tw + dx] = acc as f32;
        }
    }
    Plane::new(th, tw, out)
}

/// 2x2 box decimation; odd trailing rows/cols average the available samples.
pub fn downsample_2x2(src: &Plane) -> Plane {
    let th = src.height.div_ceil(2);
    let tw = src.width.div_ceil(2);
    let mut out = vec![0.0f32; th * tw];
    for dy in 0..th {
        for dx in 0..tw {
            let mut acc = 0.0f64;
            let mut n = 0.0f64;
            for yy in (2 * dy)..(2 * dy + 2).min(src.height) {
                for xx in (2 * dx)..(2 * dx + 2).min(src.width) {
                    acc += src.get(yy, xx) as f64;
                    n += 1.0;
                }
            }
            out[dy * tw + dx] = (acc / n) as f32;
        }
    }
    Plane::new(th, tw, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(h: usize, w: usize) -> Plane {
        let mut data = Vec::with_capacity(h * w);
        for y in 0..h {
            for x in 0..w {
                data.push((y * w + x) as f32 / (h * w) as f32);
            }
        }
        Plane::new(h, w, data)
    }

    #[test]
    fn reflect_index_mirrors() {
        assert_eq!(reflect_index(-1, 5), 1);
        assert_eq!(reflect_index(-2, 5), 2);
        assert_eq!(reflect_index(5, 5), 3);
        assert_eq!(reflect_index(0, 1), 0);
        assert_eq!(reflect_index(-3, 1), 0);
    }

    #[test]
    fn identity_resizes_are_exact() {
        let p = gradient(7, 9);
        assert_eq!(resize_bilinear(&p, 7, 9), p);
        assert_eq!(resize_area(&p, 7, 9), p);
        let bc = resize_bicubic(&p, 7, 9, -0.5);
        for (a, b) in bc.data.iter().zip(p.data.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn area_checkerboard_halves_to_mean() {
        let p = Plane::new(
            4,
            4,
            vec![
                0.0, 1.0, 0.0, 1.0, //
                1.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0, //
                1.0, 0.0, 1.0, 0.0,
            ],
        );
        let d = resize_area(&p, 2, 2);
        assert!(d.data.iter().all(|v| (*v - 0.5).abs() < 1e-7));
    }

    #[test]
    fn constant_preserved_by_all_modes() {
        let p = Plane::filled(5, 6, 0.37);
        for q in [
            resize_bilinear(&p, 9, 4),
            resize_area(&p, 3, 8),
            resize_bicubic(&p, 10, 10, -0.5),
        ] {
            assert!(q.data.iter().all(|v| (*v - 0.37).abs() < 1e-6));
        }
    }
}
