//! The bundled dissimilar-metal-weld test block: ferritic and stainless
//! parents, an alloy-82/182 buttering on the ferritic bevel, a V-butt weld
//! and a stainless cladding under the ferritic parent.
//!
//! Dimensions not given numerically by the block drawing (thickness,
//! buttering width, cladding thickness, lateral extent) are approximations.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use super::geometry::Polygon;
use super::grid::OrientationGrid;
use super::ogilvy::OgilvyParams;
use super::specimen::{OrientationSource, Region, RegionKind, Specimen};
use crate::elastodynamics::ElasticMaterial;

pub const THICKNESS_MM: f64 = 30.0;
pub const HALF_LENGTH_MM: f64 = 100.0;
pub const BUTTERING_WIDTH_MM: f64 = 8.0;
pub const CLADDING_MM: f64 = 3.0;
/// Gaussian σ applied to the raw cartography before use.
pub const CARTOGRAPHY_SMOOTH_MM: f64 = 1.0;
/// Attenuation of the buttering at 2 MHz, dB/mm.
pub const BUTTERING_ATTENUATION: f64 = 0.165;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeldDescription {
    /// Closed-form orientation law.
    Analytical,
    /// Smoothed gridded cartography.
    SmoothedGrid,
}

pub fn ferritic_steel() -> ElasticMaterial {
    ElasticMaterial::isotropic("SM490 ferritic steel", 5900.0, 3230.0, 7850.0).expect("valid")
}

pub fn stainless_steel() -> ElasticMaterial {
    ElasticMaterial::isotropic("SUS316L stainless steel", 5800.0, 3100.0, 7900.0).expect("valid")
}

/// Raw (unsmoothed) gridded cartography standing in for a macrograph
/// extraction: a slightly asymmetric closed-form field quantized to 5°,
/// sampled every 0.5 mm over the weld.
pub fn raw_cartography() -> OrientationGrid {
    let tan_a = OgilvyParams::REFERENCE.alpha_deg.to_radians().tan();
    OrientationGrid::from_fn((-16.0, 0.0), (0.5, 0.5), 65, 61, |x, z| {
        let xs = x - 0.3;
        let t = if xs >= 0.0 { 0.8 } else { 0.7 };
        let num = t * (4.25 + z * tan_a);
        let theta = if xs > 0.0 {
            (num / xs).atan()
        } else if xs < 0.0 {
            -(num / -xs).atan()
        } else {
            -FRAC_PI_2
        };
        let step = 5f64.to_radians();
        (theta / step).round() * step
    })
    .expect("valid lattice")
}

/// The test block with the requested weld description.
pub fn dmw_block(description: WeldDescription) -> Specimen {
    let p = OgilvyParams::REFERENCE;
    let tan_a = p.alpha_deg.to_radians().tan();
    let (t, l, d, w, c) = (THICKNESS_MM, HALF_LENGTH_MM, p.d, BUTTERING_WIDTH_MM, CLADDING_MM);
    let weld_orientation = match description {
        WeldDescription::Analytical => OrientationSource::Ogilvy(p),
        WeldDescription::SmoothedGrid => {
            OrientationSource::Grid(Arc::new(raw_cartography().smoothed(CARTOGRAPHY_SMOOTH_MM).expect("σ ≥ 0")))
        }
    };
    let alloy = ElasticMaterial::alloy_182();
    let buttering = alloy.clone().with_attenuation_table(&[(2.0, BUTTERING_ATTENUATION)]).expect("valid");
    let butt_in = d + w;
    let regions = vec![
        Region::new(
            "weld",
            RegionKind::Weld,
            Polygon::new(vec![[-d, 0.0], [d, 0.0], [d + t * tan_a, t], [-d - t * tan_a, t]]),
            alloy,
            weld_orientation,
        ),
        Region::new(
            "buttering",
            RegionKind::Buttering,
            Polygon::new(vec![[-butt_in, 0.0], [-d, 0.0], [-d - t * tan_a, t], [-butt_in - t * tan_a, t]]),
            buttering,
            OrientationSource::Constant(FRAC_PI_2),
        ),
        Region::new(
            "stainless parent",
            RegionKind::Stainless,
            Polygon::new(vec![[d, 0.0], [l, 0.0], [l, t], [d + t * tan_a, t]]),
            stainless_steel(),
            OrientationSource::Constant(0.0),
        ),
        Region::new(
            "cladding",
            RegionKind::Stainless,
            Polygon::new(vec![[-l, 0.0], [-butt_in, 0.0], [-butt_in - c * tan_a, c], [-l, c]]),
            stainless_steel(),
            OrientationSource::Constant(0.0),
        ),
        Region::new(
            "ferritic parent",
            RegionKind::Ferritic,
            Polygon::new(vec![[-l, c], [-butt_in - c * tan_a, c], [-butt_in - t * tan_a, t], [-l, t]]),
            ferritic_steel(),
            OrientationSource::Constant(0.0),
        ),
    ];
    Specimen::new("DMW test block", regions, 0.0, t).expect("bundled geometry is valid")
}

/// A homogeneous isotropic block of the given material.
pub fn homogeneous_block(material: ElasticMaterial, kind: RegionKind, half_length: f64, thickness: f64) -> Specimen {
    let region = Region::new(
        "block",
        kind,
        Polygon::new(vec![[-half_length, 0.0], [half_length, 0.0], [half_length, thickness], [-half_length, thickness]]),
        material,
        OrientationSource::Constant(0.0),
    );
    Specimen::new("homogeneous block", vec![region], 0.0, thickness).expect("valid block")
}
