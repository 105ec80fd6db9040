//! Blur kernel synthesis and 2-D convolution.
//!
//! Seven kernel families: isotropic/anisotropic Gaussian, their generalized
//! (exponent-shaped) and plateau variants, and the circular ideal low-pass
//! (sinc) kernel. Profiles are evaluated on the integer grid around the
//! kernel center and normalized to unit sum, with q = d' Sigma^-1 d and
//! Sigma = R(theta) diag(sx^2, sy^2) R(theta)':
//!
//! - gaussian:     exp(-q/2)
//! - generalized:  exp(-0.5 * q^beta)
//! - plateau:      1 / (1 + q^beta)
//! - sinc:         omega * J1(omega*r) / (2*pi*r), center omega^2/(4*pi)

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};

/// Kernel family tags, in the sampling-probability order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Iso,
    Aniso,
    GeneralizedIso,
    GeneralizedAniso,
    PlateauIso,
    PlateauAniso,
    Sinc,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 7] = [
        KernelFamily::Iso,
        KernelFamily::Aniso,
        KernelFamily::GeneralizedIso,
        KernelFamily::GeneralizedAniso,
        KernelFamily::PlateauIso,
        KernelFamily::PlateauAniso,
        KernelFamily::Sinc,
    ];

    pub fn is_isotropic(self) -> bool {
        matches!(
            self,
            KernelFamily::Iso | KernelFamily::GeneralizedIso | KernelFamily::PlateauIso
        )
    }

    pub fn has_beta(self) -> bool {
        matches!(
            self,
            KernelFamily::GeneralizedIso
                | KernelFamily::GeneralizedAniso
                | KernelFamily::PlateauIso
                | KernelFamily::PlateauAniso
        )
    }
}

/// One sampled blur kernel instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Odd kernel side length.
    pub size: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Rotation in radians, `[0, pi)`; zero for isotropic families.
    pub rotation_theta: f64,
    /// Shape exponent; present iff the family is generalized or plateau.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shape_beta: Option<f64>,
    /// Low-pass cutoff in `(0, pi]`; present iff the family is sinc.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cutoff_omega: Option<f64>,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size.is_multiple_of(2) || self.size < 3 {
            return Err(Error::Argument(format!(
                "kernel size must be odd and >= 3, got {}",
                self.size
            )));
        }
        if self.family != KernelFamily::Sinc && (self.sigma_x <= 0.0 || self.sigma_y <= 0.0) {
            return Err(Error::Argument("kernel sigma must be positive".into()));
        }
        if self.family.is_isotropic()
            && (self.sigma_x != self.sigma_y || self.rotation_theta != 0.0)
        {
            return Err(Error::Argument(
                "isotropic kernels require sigma_x == sigma_y and theta == 0".into(),
            ));
        }
        if self.family.has_beta() != self.shape_beta.is_some() {
            return Err(Error::Argument(
                "shape_beta present iff family is generalized or plateau".into(),
            ));
        }
        if (self.family == KernelFamily::Sinc) != self.cutoff_omega.is_some() {
            return Err(Error::Argument("cutoff_omega present iff family is sinc".into()));
        }
        if let Some(w) = self.cutoff_omega {
            if !(w > 0.0 && w <= std::f64::consts::PI) {
                return Err(Error::Argument("cutoff_omega must lie in (0, pi]".into()));
            }
        }
        Ok(())
    }
}

/// Sampling ranges and family probabilities for kernel specs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelRanges {
    /// Family probabilities in `KernelFamily::ALL` order.
    pub family_probs: [f64; 7],
    /// Inclusive odd size bounds.
    pub size: [usize; 2],
    pub sigma: [f64; 2],
    pub beta_generalized: [f64; 2],
    pub beta_plateau: [f64; 2],
    pub omega: [f64; 2],
}

impl Default for KernelRanges {
    fn default() -> Self {
        KernelRanges {
            family_probs: [0.405, 0.225, 0.108, 0.027, 0.108, 0.027, 0.1],
            size: [7, 21],
            sigma: [0.2, 3.0],
            beta_generalized: [0.5, 4.0],
            beta_plateau: [1.0, 2.0],
            omega: [std::f64::consts::PI / 3.0, std::f64::consts::PI],
        }
    }
}

impl KernelRanges {
    pub fn validate(&self) -> Result<()> {
        if self.family_probs.iter().any(|p| *p < 0.0) || self.family_probs.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("kernel family probabilities invalid".into()));
        }
        if self.size[0].is_multiple_of(2) || self.size[1].is_multiple_of(2) || self.size[0] > self.size[1] {
            return Err(Error::Config("kernel size bounds must be odd and ordered".into()));
        }
        for r in [self.sigma, self.beta_generalized, self.beta_plateau, self.omega] {
            if r[0] > r[1] || r[0] <= 0.0 {
                return Err(Error::Config("kernel range bounds must be positive and ordered".into()));
            }
        }
        Ok(())
    }
}

/// Draw a kernel spec: family by the configured categorical, size uniform
/// over odd values in range, then the family's shape parameters.
pub fn sample_kernel_spec(rng: &mut SeededRng, ranges: &KernelRanges) -> KernelSpec {
    let family = KernelFamily::ALL[rng.categorical(&ranges.family_probs)];
    let n_sizes = (ranges.size[1] - ranges.size[0]) / 2 + 1;
    let size = ranges.size[0] + 2 * rng.gen_index(n_sizes);

    let (sigma_x, sigma_y, theta) = if family == KernelFamily::Sinc {
        (1.0, 1.0, 0.0)
    } else if family.is_isotropic() {
        let s = rng.uniform_range(ranges.sigma[0], ranges.sigma[1]);
        (s, s, 0.0)
    } else {
        (
            rng.uniform_range(ranges.sigma[0], ranges.sigma[1]),
            rng.uniform_range(ranges.sigma[0], ranges.sigma[1]),
            rng.uniform_range(0.0, std::f64::consts::PI),
        )
    };

    let shape_beta = match family {
        KernelFamily::GeneralizedIso | KernelFamily::GeneralizedAniso => {
            Some(rng.uniform_range(ranges.beta_generalized[0], ranges.beta_generalized[1]))
        }
        KernelFamily::PlateauIso | KernelFamily::PlateauAniso => {
            Some(rng.uniform_range(ranges.beta_plateau[0], ranges.beta_plateau[1]))
        }
        _ => None,
    };
    let cutoff_omega = (family == KernelFamily::Sinc)
        .then(|| rng.uniform_range(ranges.omega[0], ranges.omega[1]));

    KernelSpec {
        family,
        size,
        sigma_x,
        sigma_y,
        rotation_theta: theta,
        shape_beta,
        cutoff_omega,
    }
}

/// Normalized 2-D blur kernel.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub size: usize,
    /// Row-major `size * size` taps summing to 1.
    pub taps: Vec<f64>,
}

impl Kernel {
    /// Identity kernel: center tap 1.
    pub fn delta(size: usize) -> Kernel {
        let mut taps = vec![0.0; size * size];
        taps[(size / 2) * size + size / 2] = 1.0;
        Kernel { size, taps }
    }

    #[inline]
    pub fn tap(&self, dy: isize, dx: isize) -> f64 {
        let r = (self.size / 2) as isize;
        self.taps[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }
}

/// Evaluate a spec into a normalized kernel.
pub fn make_kernel(spec: &KernelSpec) -> Result<Kernel> {
    spec.validate()?;
    let size = spec.size;
    let r = (size / 2) as isize;
    let mut taps = vec![0.0f64; size * size];

    if spec.family == KernelFamily::Sinc {
        let omega = spec.cutoff_omega.unwrap();
        for dy in -r..=r {
            for dx in -r..=r {
                let rad = ((dy * dy + dx * dx) as f64).sqrt();
                let v = if rad == 0.0 {
                    omega * omega / (4.0 * std::f64::consts::PI)
                } else {
                    omega * bessel_j1(omega * rad) / (2.0 * std::f64::consts::PI * rad)
                };
                taps[((dy + r) as usize) * size + (dx + r) as usize] = v;
            }
        }
    } else {
        // Sigma^-1 in closed form from the rotated diagonal covariance.
        let (ct, st) = (spec.rotation_theta.cos(), spec.rotation_theta.sin());
        let (ix, iy) = (1.0 / (spec.sigma_x * spec.sigma_x), 1.0 / (spec.sigma_y * spec.sigma_y));
        let a = ct * ct * ix + st * st * iy;
        let b = ct * st * (ix - iy);
        let c = st * st * ix + ct * ct * iy;
        let beta = spec.shape_beta.unwrap_or(1.0);
        for dy in -r..=r {
            for dx in -r..=r {
                let (fx, fy) = (dx as f64, dy as f64);
                let q = a * fx * fx + 2.0 * b * fx * fy + c * fy * fy;
                let v = match spec.family {
                    KernelFamily::Iso | KernelFamily::Aniso => (-0.5 * q).exp(),
                    KernelFamily::GeneralizedIso | KernelFamily::GeneralizedAniso => {
                        (-0.5 * q.powf(beta)).exp()
                    }
                    KernelFamily::PlateauIso | KernelFamily::PlateauAniso => {
                        1.0 / (1.0 + q.powf(beta))
                    }
                    KernelFamily::Sinc => unreachable!(),
                };
                taps[((dy + r) as usize) * size + (dx + r) as usize] = v;
            }
        }
    }

    let sum: f64 = taps.iter().sum();
    if !(sum.is_finite() && sum.abs() > 1e-12) {
        return Err(Error::Argument("kernel normalization failed".into()));
    }
    for t in &mut taps {
        *t /= sum;
    }
    Ok(Kernel { size, taps })
}

/// Per-channel 2-D correlation with reflect padding; output keeps the input
/// dimensions.
pub fn convolve(frame: &Frame, kernel: &Kernel) -> Result<Frame> {
    if kernel.size >= frame.height().min(frame.width()) {
        return Err(Error::Argument(format!(
            "kernel size {} must be smaller than frame {}x{}",
            kernel.size,
            frame.height(),
            frame.width()
        )));
    }
    let r = (kernel.size / 2) as isize;
    let mut planes = [
        frame.channel_plane(0),
        frame.channel_plane(1),
        frame.channel_plane(2),
    ];
    for plane in &mut planes {
        let src = plane.clone();
        for y in 0..src.height as isize {
            for x in 0..src.width as isize {
                let mut acc = 0.0f64;
                for dy in -r..=r {
                    for dx in -r..=r {
                        acc += kernel.tap(dy, dx) * src.get_reflect(y + dy, x + dx) as f64;
                    }
                }
                plane.set(y as usize, x as usize, acc as f32);
            }
        }
    }
    Ok(Frame::from_planes(&planes))
}

/// Bessel function of the first kind, order 1. Rational approximations from
/// Abramowitz & Stegun 9.4; absolute error below 1e-7.
fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let p1 = x
            * (72362614232.0
                + y * (-7895059235.0
                    + y * (242396853.1 + y * (-2972611.439 + y * (15704.48260 + y * (-30.16036606))))));
        let p2 = 144725228442.0
            + y * (2300535178.0
                + y * (18583304.74 + y * (99447.43394 + y * (376.9991397 + y))));
        p1 / p2
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 2.356194491;
        let p1 = 1.0
            + y * (0.183105e-2
                + y * (-0.3516396496e-4 + y * (0.2457520174e-5 + y * (-0.240337019e-6))));
        let p2 = 0.04687499995
            + y * (-0.2002690873e-3
                + y * (0.8449199096e-5 + y * (-0.88228987e-6 + y * 0.105787412e-6)));
        let ans = (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p1 - z * xx.sin() * p2);
        if x < 0.0 {
            -ans
        } else {
            ans
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_j1_reference_values() {
        // Abramowitz & Stegun table values.
        for (x, want) in [
            (0.0, 0.0),
            (0.5, 0.2422684577),
            (1.0, 0.4400505857),
            (2.0, 0.5767248078),
            (3.831705970, 0.0), // first zero
            (10.0, 0.04347274616),
        ] {
            assert!((bessel_j1(x) - want).abs() < 2e-7, "J1({x})");
        }
    }

    #[test]
    fn family_frequencies_match_probabilities() {
        let ranges = KernelRanges::default();
        let mut rng = SeededRng::new(100, 0);
        let n = 100_000;
        let mut counts = [0usize; 7];
        for _ in 0..n {
            let spec = sample_kernel_spec(&mut rng, &ranges);
            counts[KernelFamily::ALL.iter().position(|f| *f == spec.family).unwrap()] += 1;
        }
        for (i, &p) in ranges.family_probs.iter().enumerate() {
            let freq = counts[i] as f64 / n as f64;
            assert!((freq - p).abs() < 0.01, "family {i}: {freq} vs {p}");
        }
    }

    #[test]
    fn default_family_probabilities_sum_to_one() {
        let sum: f64 = KernelRanges::default().family_probs.iter().sum();
        assert_eq!(sum, 1.0);
    }

    #[test]
    fn forced_single_family() {
        let ranges = KernelRanges {
            family_probs: [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            ..KernelRanges::default()
        };
        let mut rng = SeededRng::new(5, 1);
        for _ in 0..200 {
            assert_eq!(sample_kernel_spec(&mut rng, &ranges).family, KernelFamily::Sinc);
        }
    }

    #[test]
    fn near_delta_for_tiny_sigma() {
        let spec = KernelSpec {
            family: KernelFamily::Iso,
            size: 7,
            sigma_x: 0.1,
            sigma_y: 0.1,
            rotation_theta: 0.0,
            shape_beta: None,
            cutoff_omega: None,
        };
        let k = make_kernel(&spec).unwrap();
        assert!(k.tap(0, 0) > 0.999, "center {}", k.tap(0, 0));
    }

    #[test]
    fn iso_kernel_dihedral_symmetry() {
        let spec = KernelSpec {
            family: KernelFamily::Iso,
            size: 7,
            sigma_x: 1.0,
            sigma_y: 1.0,
            rotation_theta: 0.0,
            shape_beta: None,
            cutoff_omega: None,
        };
        let k = make_kernel(&spec).unwrap();
        for dy in -3..=3isize {
            for dx in -3..=3isize {
                let v = k.tap(dy, dx);
                assert_eq!(v, k.tap(dx, dy));
                assert_eq!(v, k.tap(-dy, dx));
                assert_eq!(v, k.tap(dy, -dx));
            }
        }
    }

    #[test]
    fn aniso_orientation() {
        // sigma_x = 2 along x: decay slower along x than y.
        let spec = KernelSpec {
            family: KernelFamily::Aniso,
            size: 9,
            sigma_x: 2.0,
            sigma_y: 1.0,
            rotation_theta: 0.0,
            shape_beta: None,
            cutoff_omega: None,
        };
        let k = make_kernel(&spec).unwrap();
        assert!(k.tap(0, 2) > k.tap(2, 0));
    }

    #[test]
    fn all_families_normalize() {
        let ranges = KernelRanges::default();
        for (fi, _) in KernelFamily::ALL.iter().enumerate() {
            let mut probs = [0.0; 7];
            probs[fi] = 1.0;
            let ranges = KernelRanges {
                family_probs: probs,
                ..ranges.clone()
            };
            let mut rng = SeededRng::new(fi as u64, 7);
            for _ in 0..1000 {
                let spec = sample_kernel_spec(&mut rng, &ranges);
                let k = make_kernel(&spec).unwrap();
                let sum: f64 = k.taps.iter().sum();
                assert!((sum - 1.0).abs() < 1e-6, "family {fi} sum {sum}");
                assert!(k.taps.iter().all(|t| t.is_finite()));
            }
        }
    }

    #[test]
    fn delta_kernel_is_identity() {
        let f = Frame::from_fn(16, 12, |y, x| [y as f32 * 0.01, x as f32 * 0.02, 0.5]);
        let out = convolve(&f, &Kernel::delta(5)).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn constant_frame_unchanged() {
        let f = Frame::constant(20, 20, 0.42);
        let spec = KernelSpec {
            family: KernelFamily::Iso,
            size: 7,
            sigma_x: 1.5,
            sigma_y: 1.5,
            rotation_theta: 0.0,
            shape_beta: None,
            cutoff_omega: None,
        };
        let out = convolve(&f, &make_kernel(&spec).unwrap()).unwrap();
        for v in out.data() {
            assert!((*v - 0.42).abs() < 1e-6);
        }
    }

    #[test]
    fn noise_variance_through_kernel() {
        // i.i.d. noise through a linear filter: out variance = v * sum(taps^2),
        // measured away from the reflected borders.
        let spec = KernelSpec {
            family: KernelFamily::Iso,
            size: 7,
            sigma_x: 2.0,
            sigma_y: 2.0,
            rotation_theta: 0.0,
            shape_beta: None,
            cutoff_omega: None,
        };
        let k = make_kernel(&spec).unwrap();
        let mut rng = SeededRng::new(77, 0);
        let v_in = 0.01f64;
        let f = Frame::from_fn(256, 256, |_, _| {
            [
                (rng.normal() * v_in.sqrt()) as f32,
                (rng.normal() * v_in.sqrt()) as f32,
                (rng.normal() * v_in.sqrt()) as f32,
            ]
        });
        let out = convolve(&f, &k).unwrap();
        let m = 4; // margin > kernel radius
        let mut samples = Vec::new();
        for y in m..256 - m {
            for x in m..256 - m {
                for c in 0..3 {
                    samples.push(out.get(y, x, c));
                }
            }
        }
        let s = crate::stats::stats(&samples).unwrap();
        let want = v_in * k.sum_of_squares();
        assert!(
            (s.variance - want).abs() / want < 0.03,
            "variance {} want {}",
            s.variance,
            want
        );
    }

    #[test]
    fn sinc_at_nyquist_is_near_identity_on_smooth_content() {
        let spec = KernelSpec {
            family: KernelFamily::Sinc,
            size: 21,
            sigma_x: 1.0,
            sigma_y: 1.0,
            rotation_theta: 0.0,
            shape_beta: None,
            cutoff_omega: Some(std::f64::consts::PI),
        };
        let k = make_kernel(&spec).unwrap();
        let f = crate::fixtures::natural_frame(96, 96, 3);
        let out = convolve(&f, &k).unwrap();
        let max_err = out
            .data()
            .iter()
            .zip(f.data().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_err < 0.02, "max err {max_err}");
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = KernelSpec {
            family: KernelFamily::Iso,
            size: 7,
            sigma_x: -1.0,
            sigma_y: -1.0,
            rotation_theta: 0.0,
            shape_beta: None,
            cutoff_omega: None,
        };
        assert!(make_kernel(&spec).is_err());
        spec.sigma_x = 1.0;
        spec.sigma_y = 1.0;
        spec.size = 8;
        assert!(make_kernel(&spec).is_err());
    }
}
