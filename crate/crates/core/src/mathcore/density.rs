use serde::{Deserialize, Serialize};

use super::quad::{integrate_panels, QuadConfig};
use super::special::{skew_normal_unchecked, std_normal_pdf};
use crate::error::{domain, Result};

/// Which half-line a [`ComponentKind::HalfGaussian`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `x >= center`
    Upper,
    /// `x <= center`
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ComponentKind {
    Gaussian {
        mean: f64,
        variance: f64,
    },
    SkewNormal {
        location: f64,
        scale: f64,
        shape: f64,
    },
    /// A Gaussian folded onto one side of its center; the density is
    /// `2/σ·φ((x−center)/σ)` on that side and zero on the other.
    HalfGaussian {
        center: f64,
        variance: f64,
        side: Side,
    },
}

impl ComponentKind {
    /// Location of the component's mode region.
    pub fn center(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::SkewNormal { location, .. } => location,
            Self::HalfGaussian { center, .. } => center,
        }
    }

    /// Natural length scale (standard deviation of the parent Gaussian).
    pub fn scale(&self) -> f64 {
        match *self {
            Self::Gaussian { variance, .. } | Self::HalfGaussian { variance, .. } => variance.sqrt(),
            Self::SkewNormal { scale, .. } => scale,
        }
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, variance } => {
                let sd = variance.sqrt();
                std_normal_pdf((x - mean) / sd) / sd
            }
            Self::SkewNormal { location, scale, shape } => skew_normal_unchecked(x, location, scale, shape),
            Self::HalfGaussian { center, variance, side } => {
                let inside = match side {
                    Side::Upper => x >= center,
                    Side::Lower => x <= center,
                };
                if inside {
                    let sd = variance.sqrt();
                    2.0 * std_normal_pdf((x - center) / sd) / sd
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Gaussian { mean, variance } => mean.is_finite() && variance > 0.0 && variance.is_finite(),
            Self::SkewNormal { location, scale, shape } => {
                location.is_finite() && scale > 0.0 && scale.is_finite() && shape.is_finite()
            }
            Self::HalfGaussian { center, variance, .. } => center.is_finite() && variance > 0.0 && variance.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("invalid density component {self:?}")))
        }
    }

    /// Interval outside of which the component has no mass.
    fn support(&self) -> (f64, f64) {
        match *self {
            Self::HalfGaussian { center, side: Side::Upper, .. } => (center, f64::INFINITY),
            Self::HalfGaussian { center, side: Side::Lower, .. } => (f64::NEG_INFINITY, center),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub kind: ComponentKind,
}

/// A finite mixture of Gaussian, skew-normal and half-Gaussian components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    components: Vec<Component>,
    support: (f64, f64),
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl Density {
    /// Builds a mixture; weights must be nonnegative and sum to one.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("a density needs at least one component"));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.weight >= 0.0) || !c.weight.is_finite() {
                return Err(domain(format!("negative or non-finite weight {}", c.weight)));
            }
            c.kind.validate()?;
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(domain(format!("weights sum to {total}, expected 1")));
        }
        let support = components
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| c.kind.support())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
        Ok(Self { components, support })
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![Component { weight: 1.0, kind: ComponentKind::Gaussian { mean, variance } }])
    }

    /// Mixture of Gaussians sharing one variance.
    pub fn gaussian_mixture(weights: &[f64], means: &[f64], variance: f64) -> Result<Self> {
        if weights.len() != means.len() {
            return Err(domain("weights and means differ in length"));
        }
        Self::new(
            weights
                .iter()
                .zip(means)
                .map(|(&weight, &mean)| Component { weight, kind: ComponentKind::Gaussian { mean, variance } })
                .collect(),
        )
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Smallest interval containing all the mass (possibly unbounded).
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().filter(|c| c.weight > 0.0).map(|c| c.weight * c.kind.pdf(x)).sum()
    }

    /// `[min center − t·σ_max, max center + t·σ_max]` over the weighted components.
    pub fn window(&self, truncation_sigmas: f64) -> (f64, f64) {
        let active = self.components.iter().filter(|c| c.weight > 0.0);
        let (mut lo, mut hi, mut sd) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for c in active {
            lo = lo.min(c.kind.center());
            hi = hi.max(c.kind.center());
            sd = sd.max(c.kind.scale());
        }
        let lo = (lo - truncation_sigmas * sd).max(self.support.0);
        let hi = (hi + truncation_sigmas * sd).min(self.support.1);
        (lo, hi)
    }

    /// Panel edges for quadrature: the window ends plus a half-sigma lattice
    /// over each component's core. Half-Gaussian centers, where the density
    /// jumps, always land on an edge.
    pub(crate) fn panel_edges(&self, truncation_sigmas: f64) -> Vec<f64> {
        let (lo, hi) = self.window(truncation_sigmas);
        let steps = (2.0 * truncation_sigmas).ceil() as i64;
        let mut edges = vec![lo, hi];
        for c in self.components.iter().filter(|c| c.weight > 0.0) {
            let (center, sd) = (c.kind.center(), c.kind.scale());
            for j in -steps..=steps {
                let x = center + 0.5 * sd * j as f64;
                if x > lo && x < hi {
                    edges.push(x);
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges
    }
}

/// Differential entropy `−∫ f log₂ f` in bits, with `0·log 0 = 0`.
pub fn diff_entropy_bits(d: &Density, cfg: &QuadConfig) -> Result<f64> {
    let edges = d.panel_edges(cfg.truncation_sigmas);
    integrate_panels(
        |x| {
            let f = d.pdf(x);
            if f > 0.0 {
                -f * f.log2()
            } else {
                0.0
            }
        },
        &edges,
        cfg,
    )
}

/// `∫ f` over the quadrature window; should be one up to truncation.
pub fn total_mass(d: &Density, cfg: &QuadConfig) -> Result<f64> {
    let edges = d.panel_edges(cfg.truncation_sigmas);
    integrate_panels(|x| d.pdf(x), &edges, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::gaussian_entropy_bits;
    use proptest::prelude::*;

    const H_UNIT: f64 = 2.047_095_585_180_641;

    #[test]
    fn unit_gaussian_entropy() {
        let h = diff_entropy_bits(&Density::gaussian(0.0, 1.0).unwrap(), &QuadConfig::default()).unwrap();
        assert!((h - H_UNIT).abs() < 1e-9, "{h}");
        assert!((gaussian_entropy_bits(1.0) - H_UNIT).abs() < 1e-15);
    }

    #[test]
    fn single_gaussian_entropy_across_scales() {
        let cfg = QuadConfig::default();
        for &v in &[0.01, 1.0, 100.0] {
            let h = diff_entropy_bits(&Density::gaussian(3.0, v).unwrap(), &cfg).unwrap();
            assert!((h - gaussian_entropy_bits(v)).abs() < 1e-9, "v={v}: {h}");
        }
    }

    #[test]
    fn separated_mixture_adds_one_bit() {
        let d = Density::gaussian_mixture(&[0.5, 0.5], &[-10.0, 10.0], 1.0).unwrap();
        let h = diff_entropy_bits(&d, &QuadConfig::default()).unwrap();
        assert!((h - (H_UNIT + 1.0)).abs() < 1e-4, "{h}");
    }

    #[test]
    fn coincident_mixture_is_single_gaussian() {
        let d = Density::gaussian_mixture(&[0.5, 0.5], &[0.0, 0.0], 1.0).unwrap();
        let h = diff_entropy_bits(&d, &QuadConfig::default()).unwrap();
        assert!((h - H_UNIT).abs() < 1e-9, "{h}");
    }

    #[test]
    fn half_gaussian_pair_tiles_the_line() {
        // Two halves of the same Gaussian glued at its mean.
        let v = 2.0;
        let d = Density::new(vec![
            Component {
                weight: 0.5,
                kind: ComponentKind::HalfGaussian { center: 0.0, variance: v, side: Side::Upper },
            },
            Component {
                weight: 0.5,
                kind: ComponentKind::HalfGaussian { center: 0.0, variance: v, side: Side::Lower },
            },
        ])
        .unwrap();
        let cfg = QuadConfig::default();
        assert!((total_mass(&d, &cfg).unwrap() - 1.0).abs() < 1e-9);
        let h = diff_entropy_bits(&d, &cfg).unwrap();
        assert!((h - gaussian_entropy_bits(v)).abs() < 1e-9, "{h}");
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Density::gaussian_mixture(&[0.5, 0.4], &[0.0, 1.0], 1.0).is_err());
        assert!(Density::gaussian_mixture(&[1.5, -0.5], &[0.0, 1.0], 1.0).is_err());
        assert!(Density::gaussian(0.0, 0.0).is_err());
        assert!(Density::new(vec![]).is_err());
    }

    #[test]
    fn support_of_half_gaussians() {
        let d = Density::new(vec![Component {
            weight: 1.0,
            kind: ComponentKind::HalfGaussian { center: 1.0, variance: 1.0, side: Side::Upper },
        }])
        .unwrap();
        assert_eq!(d.support(), (1.0, f64::INFINITY));
        assert_eq!(d.pdf(0.99), 0.0);
        assert_eq!(d.window(12.0).0, 1.0);
    }

    fn arb_kind() -> impl Strategy<Value = ComponentKind> {
        prop_oneof![
            (-5.0..5.0f64, 0.05..4.0f64).prop_map(|(mean, variance)| ComponentKind::Gaussian { mean, variance }),
            (-5.0..5.0f64, 0.2..2.0f64, -6.0..6.0f64).prop_map(|(location, scale, shape)| ComponentKind::SkewNormal {
                location,
                scale,
                shape
            }),
            (-5.0..5.0f64, 0.05..4.0f64, any::<bool>()).prop_map(|(center, variance, up)| {
                ComponentKind::HalfGaussian { center, variance, side: if up { Side::Upper } else { Side::Lower } }
            }),
        ]
    }

    fn arb_density() -> impl Strategy<Value = Density> {
        prop::collection::vec((0.05..1.0f64, arb_kind()), 1..5).prop_map(|raw| {
            let total: f64 = raw.iter().map(|(w, _)| w).sum();
            Density::new(raw.into_iter().map(|(w, kind)| Component { weight: w / total, kind }).collect()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn densities_normalize(d in arb_density()) {
            let cfg = QuadConfig::default();
            let mass = total_mass(&d, &cfg).unwrap();
            prop_assert!((mass - 1.0).abs() <= 10.0 * cfg.abs_tol, "mass {}", mass);
        }

        #[test]
        fn pdf_nonnegative(d in arb_density(), x in -30.0..30.0f64) {
            prop_assert!(d.pdf(x) >= 0.0);
        }

        #[test]
        fn entropy_translation_invariant(
            weights in prop::collection::vec(0.1..1.0f64, 1..4),
            spread in 0.0..6.0f64,
            variance in 0.1..3.0f64,
            shift in -20.0..20.0f64,
        ) {
            let total: f64 = weights.iter().sum();
            let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
            let means: Vec<f64> = (0..w.len()).map(|i| spread * i as f64).collect();
            let shifted: Vec<f64> = means.iter().map(|m| m + shift).collect();
            let cfg = QuadConfig::default();
            let a = diff_entropy_bits(&Density::gaussian_mixture(&w, &means, variance).unwrap(), &cfg).unwrap();
            let b = diff_entropy_bits(&Density::gaussian_mixture(&w, &shifted, variance).unwrap(), &cfg).unwrap();
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }

        #[test]
        fn mixture_entropy_bounds(
            weights in prop::collection::vec(0.05..1.0f64, 2..5),
            means in prop::collection::vec(-4.0..4.0f64, 5),
            variances in prop::collection::vec(0.1..3.0f64, 5),
        ) {
            let total: f64 = weights.iter().sum();
            let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
            let comps: Vec<Component> = w.iter().enumerate().map(|(i, &weight)| Component {
                weight,
                kind: ComponentKind::Gaussian { mean: means[i], variance: variances[i] },
            }).collect();
            let d = Density::new(comps).unwrap();
            let h = diff_entropy_bits(&d, &QuadConfig::default()).unwrap();
            let mixing: f64 = -w.iter().map(|p| p * p.log2()).sum::<f64>();
            let hmin = (0..w.len()).map(|i| gaussian_entropy_bits(variances[i])).fold(f64::INFINITY, f64::min);
            let havg: f64 = (0..w.len()).map(|i| w[i] * gaussian_entropy_bits(variances[i])).sum();
            prop_assert!(h >= hmin - 1e-9, "h={} below min {}", h, hmin);
            prop_assert!(h <= havg + mixing + 1e-9, "h={} above {}", h, havg + mixing);
        }
    }
}
