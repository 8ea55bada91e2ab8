use serde::{Deserialize, Serialize};

use super::warp::BoundWarp;
use super::{BaseSpec, FiberSpec, WarpSpec, WarpValue};
use crate::error::{Error, Result};

/// Which scalar-curvature formula to use for the total space.
///
/// `Standard` is the classical warped-product formula
/// `R_B - 2p (Delta_B f)/f - p(p-1)(f'/f)^2 + R_0/f^2`; `Reduced` drops the
/// `-2p (Delta_B f)/f` term. Both coincide for constant warps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    #[default]
    Standard,
    Reduced,
}

/// Mean-curvature data of the fibers at one base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCurvature {
    /// `|N| = p |f'| / f`
    pub norm: f64,
    /// `p (Delta_B f / f + (f'/f)^2)`, the closed form used by the comparison constants.
    pub delta_n: f64,
    /// `-div_B N = p (Delta_B f / f - (f'/f)^2)`, the horizontal divergence computed
    /// straight from `N = -(p/f) grad f`.
    pub divergence: f64,
}

/// Constants entering the eigenvalue comparison bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonConstants {
    /// `inf delta_n / 2`
    pub a0: f64,
    /// `sup delta_n / 2`
    pub a1: f64,
    /// `sup_b lambda_1(F_b) = mu_1 / (min f)^2`
    pub lambda_bar_f: f64,
    /// `inf (p/2 Delta f/f + 3p/2 (f'/f)^2)`
    pub c_thm1: f64,
    /// `inf (2p Delta f/f + p(7-p)(f'/f)^2 + R_0/f^2)`
    pub c_thm2: f64,
    /// `inf (2p Delta f/f + p(7-p)(f'/f)^2) + min R_0/f^2`
    pub c_thm2_split: f64,
    /// `A_0`, `A_1` recomputed with the divergence form of `delta_n`.
    pub a0_divergence: f64,
    pub a1_divergence: f64,
}

/// `B x_f F` with metric `g_B + f^2 g_0`.
#[derive(Debug, Clone)]
pub struct WarpedProduct {
    base: BaseSpec,
    fiber: FiberSpec,
    warp_spec: WarpSpec,
    warp: BoundWarp,
}

impl WarpedProduct {
    pub fn new(base: BaseSpec, fiber: FiberSpec, warp: WarpSpec) -> Result<Self> {
        base.validate()?;
        fiber.validate()?;
        let bound = warp.bind(&base)?;
        if bound.min() <= 0.0 {
            return Err(Error::invariant("warp function must be positive"));
        }
        Ok(Self {
            base,
            fiber,
            warp_spec: warp,
            warp: bound,
        })
    }

    pub fn base(&self) -> &BaseSpec {
        &self.base
    }

    pub fn fiber(&self) -> &FiberSpec {
        &self.fiber
    }

    pub fn warp_spec(&self) -> &WarpSpec {
        &self.warp_spec
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    /// `n = m + p`
    pub fn dim(&self) -> usize {
        self.base.dim() + self.fiber.dim()
    }

    pub fn length(&self) -> f64 {
        self.base.length()
    }

    pub fn warp(&self, t: f64) -> WarpValue {
        self.warp.eval(t)
    }

    pub fn warp_min(&self) -> f64 {
        self.warp.min()
    }

    pub fn warp_max(&self) -> f64 {
        self.warp.max()
    }

    pub fn has_constant_warp(&self) -> bool {
        self.warp.is_constant()
    }

    /// Total reduced density `rho(t) = w(t) f(t)^p`.
    pub fn density(&self, t: f64) -> f64 {
        self.base.weight(t) * self.warp.eval(t).f.powi(self.fiber_dim() as i32)
    }

    /// `Delta_B f = f'' + (w'/w) f'`, with the pole limit `m f''` on a sphere base.
    pub fn base_laplacian_of_warp(&self, t: f64) -> f64 {
        let v = self.warp.eval(t);
        if self.base.is_singular_point(t) {
            self.base.dim() as f64 * v.ddf
        } else {
            v.ddf + self.base.weight_log_derivative(t) * v.df
        }
    }

    fn check_point(&self, t: f64) -> Result<WarpValue> {
        let l = self.length();
        if !(t.is_finite() && (-1e-12 * l..=l * (1.0 + 1e-12)).contains(&t)) {
            return Err(Error::config(format!(
                "base coordinate {t} outside [0, {l}]"
            )));
        }
        let v = self.warp.eval(t);
        if v.f <= 0.0 {
            return Err(Error::invariant(format!(
                "warp is non-positive ({}) at t={t}",
                v.f
            )));
        }
        Ok(v)
    }

    pub fn scalar_curvature(&self, t: f64, mode: CurvatureMode) -> Result<f64> {
        let v = self.check_point(t)?;
        Ok(self.scalar_curvature_unchecked(t, v, mode))
    }

    pub(crate) fn scalar_curvature_unchecked(
        &self,
        t: f64,
        v: WarpValue,
        mode: CurvatureMode,
    ) -> f64 {
        let p = self.fiber_dim() as f64;
        let g = v.df / v.f;
        let mut r = self.base.scalar_curvature(t) - p * (p - 1.0) * g * g
            + self.fiber.unit_scalar_curvature() / (v.f * v.f);
        if mode == CurvatureMode::Standard {
            r -= 2.0 * p * self.base_laplacian_of_warp(t) / v.f;
        }
        r
    }

    pub fn mean_curvature(&self, t: f64) -> Result<MeanCurvature> {
        let v = self.check_point(t)?;
        let p = self.fiber_dim() as f64;
        let lap = self.base_laplacian_of_warp(t) / v.f;
        let g = v.df / v.f;
        Ok(MeanCurvature {
            norm: p * v.df.abs() / v.f,
            delta_n: p * (lap + g * g),
            divergence: p * (lap - g * g),
        })
    }

    /// Evaluation points for infima and suprema over the base: a staggered grid of
    /// `resolution` cells plus the critical points of the warp.
    pub fn sample_points(&self, resolution: usize) -> Vec<f64> {
        let l = self.length();
        let h = l / resolution as f64;
        let mut pts: Vec<f64> = (0..resolution).map(|i| (i as f64 + 0.5) * h).collect();
        pts.extend(self.warp.critical_points(l, self.base.is_periodic()));
        pts
    }

    pub fn comparison_constants(&self, resolution: usize) -> Result<ComparisonConstants> {
        if resolution < 64 {
            return Err(Error::config(format!(
                "grid resolution must be >= 64, got {resolution}"
            )));
        }
        let p = self.fiber_dim() as f64;
        let r0 = self.fiber.unit_scalar_curvature();
        let mu1 = self.fiber.eigenvalue(1)?.value;
        let mut acc = Extremes::default();
        for t in self.sample_points(resolution) {
            let v = self.check_point(t)?;
            let lap = self.base_laplacian_of_warp(t) / v.f;
            let g2 = (v.df / v.f).powi(2);
            let fiber_term = r0 / (v.f * v.f);
            acc.a_lo = acc.a_lo.min(p * (lap + g2));
            acc.a_hi = acc.a_hi.max(p * (lap + g2));
            acc.div_lo = acc.div_lo.min(p * (lap - g2));
            acc.div_hi = acc.div_hi.max(p * (lap - g2));
            acc.c1 = acc.c1.min(0.5 * p * lap + 1.5 * p * g2);
            let core = 2.0 * p * lap + p * (7.0 - p) * g2;
            acc.c2 = acc.c2.min(core + fiber_term);
            acc.c2_core = acc.c2_core.min(core);
            acc.fiber_min = acc.fiber_min.min(fiber_term);
        }
        let fmin = self.warp.min();
        Ok(ComparisonConstants {
            a0: 0.5 * acc.a_lo,
            a1: 0.5 * acc.a_hi,
            lambda_bar_f: mu1 / (fmin * fmin),
            c_thm1: acc.c1,
            c_thm2: acc.c2,
            c_thm2_split: acc.c2_core + acc.fiber_min,
            a0_divergence: 0.5 * acc.div_lo,
            a1_divergence: 0.5 * acc.div_hi,
        })
    }

    pub fn describe(&self) -> String {
        format!(
            "{} x_f {} with {}",
            self.base.describe(),
            self.fiber.describe(),
            self.warp_spec.describe()
        )
    }
}

struct Extremes {
    a_lo: f64,
    a_hi: f64,
    div_lo: f64,
    div_hi: f64,
    c1: f64,
    c2: f64,
    c2_core: f64,
    fiber_min: f64,
}

impl Default for Extremes {
    fn default() -> Self {
        let (lo, hi) = (f64::INFINITY, f64::NEG_INFINITY);
        Self {
            a_lo: lo,
            a_hi: hi,
            div_lo: lo,
            div_hi: hi,
            c1: lo,
            c2: lo,
            c2_core: lo,
            fiber_min: lo,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(fiber: FiberSpec, b: f64) -> WarpedProduct {
        WarpedProduct::new(
            BaseSpec::circle(2.0 * PI).unwrap(),
            fiber,
            WarpSpec::CosineBump { a: 1.0, b, m: 1 },
        )
        .unwrap()
    }

    #[test]
    fn flat_product_has_zero_curvature() {
        let wp = WarpedProduct::new(
            BaseSpec::circle(2.0 * PI).unwrap(),
            FiberSpec::FlatTorus {
                sides: vec![1.0, 2.0],
            },
            WarpSpec::Constant { a: 1.0 },
        )
        .unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert_eq!(
                wp.scalar_curvature(t, CurvatureMode::Standard).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn constant_warp_rescales_fiber_curvature() {
        let c = 1.7;
        let wp = WarpedProduct::new(
            BaseSpec::circle(2.0 * PI).unwrap(),
            FiberSpec::RoundSphere { dim: 2 },
            WarpSpec::Constant { a: c },
        )
        .unwrap();
        for mode in [CurvatureMode::Standard, CurvatureMode::Reduced] {
            let r = wp.scalar_curvature(0.4, mode).unwrap();
            assert!((r - 2.0 / (c * c)).abs() < 1e-15);
        }
        let mc = wp.mean_curvature(0.4).unwrap();
        assert_eq!((mc.norm, mc.delta_n), (0.0, 0.0));
    }

    #[test]
    fn cosine_bump_curvature_at_crest() {
        // f = 1 + 0.2 cos t: f(0) = 1.2, f'(0) = 0, f''(0) = -0.2
        let wp = cosine(FiberSpec::Circle { length: 2.0 * PI }, 0.2);
        let standard = wp.scalar_curvature(0.0, CurvatureMode::Standard).unwrap();
        assert!((standard - 0.2 * 2.0 / 1.2).abs() < 1e-15);
        // p = 1 kills the gradient term and R_0 = 0, so the reduced form is zero here
        let reduced = wp.scalar_curvature(0.0, CurvatureMode::Reduced).unwrap();
        assert_eq!(reduced, 0.0);
    }

    #[test]
    fn mean_curvature_at_trough() {
        let wp = cosine(FiberSpec::Circle { length: 2.0 * PI }, 0.2);
        let mc = wp.mean_curvature(PI).unwrap();
        assert!(mc.norm.abs() < 1e-15);
        assert!((mc.delta_n - 0.2 / 0.8).abs() < 1e-14);
        assert!((mc.divergence - 0.2 / 0.8).abs() < 1e-14);
    }

    #[test]
    fn constants_for_constant_warps() {
        for (a, lbar, c2) in [(1.0, 2.0, 2.0), (2.0, 0.5, 0.5)] {
            let wp = WarpedProduct::new(
                BaseSpec::circle(2.0 * PI).unwrap(),
                FiberSpec::RoundSphere { dim: 2 },
                WarpSpec::Constant { a },
            )
            .unwrap();
            let c = wp.comparison_constants(64).unwrap();
            assert_eq!((c.a0, c.a1, c.c_thm1), (0.0, 0.0, 0.0));
            assert_eq!(c.lambda_bar_f, lbar);
            assert_eq!(c.c_thm2, c2);
            assert_eq!(c.c_thm2_split, c2);
        }
    }

    #[test]
    fn sphere_pole_uses_regular_limit() {
        let base = BaseSpec::sphere(3, 1.0).unwrap();
        let wp = WarpedProduct::new(
            base,
            FiberSpec::Circle { length: 1.0 },
            WarpSpec::CosineBump {
                a: 2.0,
                b: 0.5,
                m: 2,
            },
        )
        .unwrap();
        let at_pole = wp.base_laplacian_of_warp(0.0);
        let near = wp.base_laplacian_of_warp(1e-6);
        assert!((at_pole - near).abs() < 1e-8, "{at_pole} vs {near}");
        let at_south = wp.base_laplacian_of_warp(PI);
        let near_south = wp.base_laplacian_of_warp(PI - 1e-6);
        assert!((at_south - near_south).abs() < 1e-8);
        assert!(wp
            .scalar_curvature(PI, CurvatureMode::Standard)
            .unwrap()
            .is_finite());
        assert!(wp.scalar_curvature(3.5, CurvatureMode::Standard).is_err());
    }

    #[test]
    fn constant_grid_scan_oracle() {
        // dense scan of 1/2 f''/f + 3/2 (f'/f)^2 against the 64-cell value
        let wp = cosine(FiberSpec::Circle { length: 2.0 * PI }, 0.2);
        let dense = (0..100_000)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 100_000.0;
                let (f, df, ddf) = (1.0 + 0.2 * t.cos(), -0.2 * t.sin(), -0.2 * t.cos());
                0.5 * ddf / f + 1.5 * (df / f).powi(2)
            })
            .fold(f64::INFINITY, f64::min);
        let c = wp.comparison_constants(64).unwrap();
        assert!((c.c_thm1 - dense).abs() < 1e-4, "{} vs {dense}", c.c_thm1);
        assert!(c.a0 <= c.a1);
    }
}
