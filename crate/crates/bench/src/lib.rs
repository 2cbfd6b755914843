//! Fixtures shared by the benchmarks.

use casimir_core::materials::{Extrapolation, LowFrequencyTail, PowerLawDecay};
use casimir_core::{CavityConfig, Material, TabulatedMaterial};

pub fn drude() -> Material {
    Material::drude(3.0, 0.035).expect("valid Drude parameters")
}

pub fn lorentz() -> Material {
    Material::lorentz(1.0, 15.0, 0.01).expect("valid Lorentz parameters")
}

pub fn cavity(material: Material, t: f64, d: f64) -> CavityConfig {
    CavityConfig::new(material, t, d).expect("valid cavity")
}

/// A fresh Drude-sampled n,k table, so the imaginary-axis continuation is
/// rebuilt on first use.
pub fn sampled_drude_table(points: usize) -> Material {
    let model = drude();
    let grid: Vec<f64> = (0..points)
        .map(|i| 0.01 * (3e4f64).powf(i as f64 / (points - 1) as f64))
        .collect();
    let (mut n, mut k) = (Vec::with_capacity(points), Vec::with_capacity(points));
    for &w in &grid {
        let nk = model.eps_real_axis(w).expect("Drude is defined on the real axis").sqrt();
        n.push(nk.re);
        k.push(nk.im);
    }
    let ext = Extrapolation::new(
        LowFrequencyTail::DrudeTail { omega_p: 3.0, gamma_p: 0.035 },
        PowerLawDecay { exponent: 3.0 },
    );
    Material::tabulated("sampled-drude", TabulatedMaterial::new(grid, n, k, ext).expect("valid table"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_table_matches_model_on_the_real_axis() {
        let table = sampled_drude_table(400);
        let a = table.eps_real_axis(1.7).unwrap();
        let b = drude().eps_real_axis(1.7).unwrap();
        assert!((a - b).norm() < 1e-3 * b.norm());
    }
}
