use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::archmeta::{ArtifactId, ValidatedArchitecture};

/// `(√5 − 1) / 2`, the fractional part of the golden ratio.
pub const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_8;

pub const DEFAULT_SATURATION: f64 = 0.25;
pub const DEFAULT_LIGHTNESS: f64 = 0.82;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hsl {
    /// Degrees in `[0, 360)`.
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

impl Hsl {
    /// `#rrggbb`.
    pub fn to_hex(self) -> String {
        let c = (1.0 - (2.0 * self.l - 1.0).abs()) * self.s;
        let h = self.h.rem_euclid(360.0) / 60.0;
        let x = c * (1.0 - (h % 2.0 - 1.0).abs());
        let (r, g, b) = match h as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = self.l - c / 2.0;
        let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
        format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
    }
}

/// Hue of the `k`-th declared artifact type: the fractional part of
/// `(k + 1)` times the golden fraction, scaled to degrees.
pub fn hue(k: usize) -> f64 {
    ((k as f64 + 1.0) * GOLDEN_FRACTION).fract() * 360.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorConfig {
    pub saturation: f64,
    pub lightness: f64,
    /// Fixed colors by artifact name (plain or model-qualified).
    pub overrides: BTreeMap<String, Hsl>,
}

impl Default for ColorConfig {
    fn default() -> Self {
        Self { saturation: DEFAULT_SATURATION, lightness: DEFAULT_LIGHTNESS, overrides: BTreeMap::new() }
    }
}

/// One color per artifact type, indexed by declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorAssignment {
    colors: Vec<Hsl>,
    names: Vec<String>,
}

impl ColorAssignment {
    pub fn get(&self, artifact: ArtifactId) -> Hsl {
        self.colors[artifact.0]
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// `(qualified artifact name, color)` in declaration order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, Hsl)> {
        self.names.iter().map(String::as_str).zip(self.colors.iter().copied())
    }
}

pub fn assign_colors(arch: &ValidatedArchitecture) -> ColorAssignment {
    assign_colors_with(arch, &ColorConfig::default())
}

pub fn assign_colors_with(arch: &ValidatedArchitecture, config: &ColorConfig) -> ColorAssignment {
    let mut colors = Vec::with_capacity(arch.artifact_count());
    let mut names = Vec::with_capacity(arch.artifact_count());
    for id in arch.artifact_ids() {
        let decl = arch.artifact(id);
        let qualified = arch.qualified_artifact_name(id);
        let color = config
            .overrides
            .get(&qualified)
            .or_else(|| config.overrides.get(decl.name.as_str()))
            .copied()
            .unwrap_or(Hsl { h: hue(decl.decl_index), s: config.saturation, l: config.lightness });
        colors.push(color);
        names.push(qualified);
    }
    ColorAssignment { colors, names }
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;
    use proptest::prelude::*;

    use super::*;
    use crate::testkit;

    /// Hue computed with 60 decimal digits of √5.
    fn exact_hue(k: usize) -> f64 {
        let digits = 60u32;
        let scale = BigUint::from(10u32).pow(digits);
        let sqrt5 = (BigUint::from(5u32) * &scale * &scale).sqrt();
        let fraction = (sqrt5 - &scale) / BigUint::from(2u32);
        let multiple = (fraction * BigUint::from(k + 1)) % &scale;
        // keep 15 significant digits of the degree value
        let shift = BigUint::from(10u32).pow(digits - 15);
        let degrees = (multiple * BigUint::from(360u32)) / shift;
        degrees.to_string().parse::<f64>().unwrap() / 1e15
    }

    #[test]
    fn first_hues() {
        assert!((hue(0) - 222.4922).abs() < 1e-4);
        assert!((hue(1) - 84.9845).abs() < 1e-4);
        for k in 0..10 {
            assert!((hue(k) - exact_hue(k)).abs() < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn one_entry_per_type() {
        let arch = testkit::arch("package p SPVizModel M { Only }");
        let colors = assign_colors(&arch);
        assert_eq!(colors.len(), 1);
        assert_eq!(colors.entries().next().unwrap().0, "M.Only");
    }

    #[test]
    fn overrides_win() {
        let arch = testkit::arch(testkit::OSGI_MODEL);
        let mut config = ColorConfig::default();
        let red = Hsl { h: 0.0, s: 1.0, l: 0.5 };
        config.overrides.insert("Bundle".into(), red);
        let colors = assign_colors_with(&arch, &config);
        let bundle = arch.resolve_artifact("Bundle").unwrap();
        assert_eq!(colors.get(bundle), red);
        assert_eq!(colors.get(ArtifactId(0)).s, DEFAULT_SATURATION);
    }

    #[test]
    fn hex_conversion() {
        assert_eq!(Hsl { h: 0.0, s: 1.0, l: 0.5 }.to_hex(), "#ff0000");
        assert_eq!(Hsl { h: 120.0, s: 1.0, l: 0.5 }.to_hex(), "#00ff00");
        assert_eq!(Hsl { h: 240.0, s: 1.0, l: 0.25 }.to_hex(), "#000080");
        assert_eq!(Hsl { h: 42.0, s: 0.0, l: 1.0 }.to_hex(), "#ffffff");
    }

    proptest! {
        #[test]
        fn hues_are_spread(n in 2usize..=20) {
            let hues: Vec<f64> = (0..n).map(hue).collect();
            for i in 0..n {
                for j in i + 1..n {
                    let d = (hues[i] - hues[j]).abs();
                    prop_assert!(d.min(360.0 - d) >= 360.0 * 0.02);
                }
            }
        }
    }
}
