use serde::{Deserialize, Serialize};

use super::{PlatformProfile, DEFAULT_CACHELINE_ELEMENTS, DEFAULT_PRIVATE_CACHE_ELEMENTS};
use crate::error::{IceError, Result};

// (name, processor, eps_op, pi_op, eps_io, pi_io, cores); energies in nJ.
// The first nine rows come from energy-roofline measurements, the last two
// from regression on micro-benchmarks.
type Row = (&'static str, &'static str, f64, f64, f64, f64, Option<u32>);

const TABLE: [Row; 11] = [
    (
        "Nehalem i7-950",
        "Intel i7-950",
        0.670,
        2.455,
        50.88,
        408.80,
        None,
    ),
    (
        "Ivy Bridge i3-3217U",
        "Intel i3-3217U",
        0.024,
        0.591,
        26.75,
        58.99,
        None,
    ),
    (
        "Bobcat CPU",
        "AMD E2-1800",
        0.199,
        3.980,
        27.84,
        387.47,
        None,
    ),
    (
        "Fermi GTX 580",
        "NVIDIA GF100",
        0.213,
        0.622,
        32.83,
        45.66,
        None,
    ),
    (
        "Kepler GTX 680",
        "NVIDIA GK104",
        0.263,
        0.452,
        27.97,
        26.90,
        None,
    ),
    (
        "Kepler GTX Titan",
        "NVIDIA GK110",
        0.094,
        0.077,
        17.09,
        32.94,
        None,
    ),
    (
        "XeonPhi KNC",
        "Intel 5110P",
        0.012,
        0.178,
        8.70,
        63.65,
        None,
    ),
    (
        "Cortex-A9",
        "TI OMAP 4460",
        0.302,
        1.152,
        51.84,
        174.00,
        None,
    ),
    (
        "Arndale Cortex-A15",
        "Samsung Exynos 5",
        0.275,
        1.385,
        24.70,
        89.34,
        None,
    ),
    (
        "Xeon",
        "2xIntel E5-2650l v3",
        0.263,
        0.108,
        8.86,
        23.29,
        Some(24),
    ),
    (
        "Xeon-Phi",
        "Intel 31S1P",
        0.006,
        0.078,
        25.02,
        64.40,
        Some(57),
    ),
];

/// The eleven built-in platforms, in table order.
pub fn builtin_catalog() -> Vec<PlatformProfile> {
    TABLE
        .iter()
        .map(
            |&(name, processor, eps_op, pi_op, eps_io, pi_io, cores)| PlatformProfile {
                name: name.to_string(),
                processor: processor.to_string(),
                eps_op,
                pi_op,
                eps_io,
                pi_io,
                cacheline_elements: DEFAULT_CACHELINE_ELEMENTS,
                private_cache_elements: DEFAULT_PRIVATE_CACHE_ELEMENTS,
                core_count: cores,
                raw: None,
            },
        )
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    platform: Vec<PlatformProfile>,
}

const HEADER: &str = "\
# ICE platform catalog.
# Units: *_nj fields in nanojoules (per flop or per cache line),
# cacheline_elements and private_cache_elements in elements of the working
# datatype, core_count in cores, raw power in watts, frequency in hertz.
";

/// Serializes profiles as a TOML document with one `[[platform]]` record each.
pub fn to_catalog_toml(profiles: &[PlatformProfile]) -> String {
    let file = CatalogFile {
        platform: profiles.to_vec(),
    };
    // serialization of plain numeric records cannot fail
    let body = toml::to_string(&file).expect("catalog serializes");
    format!("{HEADER}\n{body}")
}

/// Parses and validates a catalog document. Errors name the offending record
/// and field.
pub fn parse_catalog_toml(text: &str) -> Result<Vec<PlatformProfile>> {
    let file: CatalogFile = toml::from_str(text).map_err(|e| IceError::Parse(e.to_string()))?;
    for (i, p) in file.platform.iter().enumerate() {
        p.validate().map_err(|e| match e {
            IceError::InvalidArgument { field, reason } => IceError::InvalidArgument {
                field: format!("platform[{i}] ({}).{field}", p.name),
                reason,
            },
            other => other,
        })?;
    }
    Ok(file.platform)
}
