//! Platform parameter records.
//!
//! A platform is abstracted by four energy parameters, all in nanojoules:
//! dynamic energy per operation (`eps_op`), dynamic energy per cache-line
//! transfer (`eps_io`), and the static energy that accrues while one
//! operation (`pi_op`) or one cache-line transfer (`pi_io`) is in flight.
//! They can be derived from raw power/cycle constants, converted from
//! energy-roofline style parameters, fitted from measurements, or taken
//! from the built-in catalog.

mod catalog;
mod fit;

pub use catalog::{builtin_catalog, parse_catalog_toml, to_catalog_toml};
pub use fit::{fit_parameters, FitResult, MeasurementSample};

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, IceError, Result};

/// Elements of the working datatype per 64-byte line (8-byte doubles).
pub const DEFAULT_CACHELINE_ELEMENTS: u64 = 8;
/// 256 KiB private cache of 8-byte elements.
pub const DEFAULT_PRIVATE_CACHE_ELEMENTS: u64 = 32_768;
/// Size of the working datatype, used to convert byte-based inputs.
pub const ELEMENT_BYTES: u64 = 8;

const NANOJOULES_PER_JOULE: f64 = 1e9;
const IDENTITY_RTOL: f64 = 1e-9;

/// Hardware constants from which the energy parameters are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPlatformConstants {
    /// Static power of the whole platform.
    #[serde(rename = "static_power_w")]
    pub static_power_whole_platform: f64,
    /// Power drawn by one active core performing operations.
    #[serde(rename = "dynamic_power_per_op_w")]
    pub dynamic_power_per_op: f64,
    /// Power drawn by one active core performing cache-line transfers.
    #[serde(rename = "dynamic_power_per_io_w")]
    pub dynamic_power_per_io: f64,
    pub cycles_per_op: f64,
    pub cycles_per_cacheline: f64,
    #[serde(rename = "frequency_hz")]
    pub frequency: f64,
    pub cacheline_elements: u64,
    pub private_cache_elements: u64,
    pub core_count: u32,
}

impl RawPlatformConstants {
    pub fn validate(&self) -> Result<()> {
        require_positive(
            "static_power_whole_platform",
            self.static_power_whole_platform,
        )?;
        require_positive("dynamic_power_per_op", self.dynamic_power_per_op)?;
        require_positive("dynamic_power_per_io", self.dynamic_power_per_io)?;
        require_positive("cycles_per_op", self.cycles_per_op)?;
        require_positive("cycles_per_cacheline", self.cycles_per_cacheline)?;
        require_positive("frequency", self.frequency)?;
        if self.cacheline_elements == 0 {
            return Err(IceError::invalid("cacheline_elements", "must be positive"));
        }
        if self.private_cache_elements == 0 {
            return Err(IceError::invalid(
                "private_cache_elements",
                "must be positive",
            ));
        }
        if self.core_count == 0 {
            return Err(IceError::invalid("core_count", "must be positive"));
        }
        if self.cacheline_elements > self.private_cache_elements {
            return Err(IceError::invalid(
                "cacheline_elements",
                format!(
                    "line of {} elements exceeds private cache of {} elements",
                    self.cacheline_elements, self.private_cache_elements
                ),
            ));
        }
        Ok(())
    }

    /// Seconds per operation.
    pub fn time_per_op(&self) -> f64 {
        self.cycles_per_op / self.frequency
    }

    /// Seconds per cache-line transfer.
    pub fn time_per_cacheline(&self) -> f64 {
        self.cycles_per_cacheline / self.frequency
    }
}

/// The four energy parameters of a platform, in nanojoules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IceParameters {
    pub eps_op: f64,
    pub eps_io: f64,
    pub pi_op: f64,
    pub pi_io: f64,
}

impl IceParameters {
    pub fn scaled(&self, k: f64) -> Self {
        IceParameters {
            eps_op: self.eps_op * k,
            eps_io: self.eps_io * k,
            pi_op: self.pi_op * k,
            pi_io: self.pi_io * k,
        }
    }
}

/// Energy per operation and per line transfer, dynamic and static.
pub fn derive_ice_parameters(raw: &RawPlatformConstants) -> Result<IceParameters> {
    raw.validate()?;
    let op_time = raw.time_per_op();
    let line_time = raw.time_per_cacheline();
    Ok(IceParameters {
        eps_op: raw.dynamic_power_per_op * op_time * NANOJOULES_PER_JOULE,
        eps_io: raw.dynamic_power_per_io * line_time * NANOJOULES_PER_JOULE,
        pi_op: raw.static_power_whole_platform * op_time * NANOJOULES_PER_JOULE,
        pi_io: raw.static_power_whole_platform * line_time * NANOJOULES_PER_JOULE,
    })
}

/// One platform: its energy parameters plus the cache geometry the
/// complexity models need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformProfile {
    pub name: String,
    pub processor: String,
    #[serde(rename = "eps_op_nj")]
    pub eps_op: f64,
    #[serde(rename = "pi_op_nj")]
    pub pi_op: f64,
    #[serde(rename = "eps_io_nj")]
    pub eps_io: f64,
    #[serde(rename = "pi_io_nj")]
    pub pi_io: f64,
    #[serde(default = "default_cacheline_elements")]
    pub cacheline_elements: u64,
    #[serde(default = "default_private_cache_elements")]
    pub private_cache_elements: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawPlatformConstants>,
}

fn default_cacheline_elements() -> u64 {
    DEFAULT_CACHELINE_ELEMENTS
}

fn default_private_cache_elements() -> u64 {
    DEFAULT_PRIVATE_CACHE_ELEMENTS
}

impl PlatformProfile {
    /// Profile with default cache geometry and no core count.
    pub fn new(
        name: impl Into<String>,
        processor: impl Into<String>,
        params: IceParameters,
    ) -> Result<Self> {
        let profile = PlatformProfile {
            name: name.into(),
            processor: processor.into(),
            eps_op: params.eps_op,
            pi_op: params.pi_op,
            eps_io: params.eps_io,
            pi_io: params.pi_io,
            cacheline_elements: DEFAULT_CACHELINE_ELEMENTS,
            private_cache_elements: DEFAULT_PRIVATE_CACHE_ELEMENTS,
            core_count: None,
            raw: None,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Profile whose parameters and geometry all come from raw constants.
    pub fn from_raw(
        name: impl Into<String>,
        processor: impl Into<String>,
        raw: RawPlatformConstants,
    ) -> Result<Self> {
        let params = derive_ice_parameters(&raw)?;
        let profile = PlatformProfile {
            name: name.into(),
            processor: processor.into(),
            eps_op: params.eps_op,
            pi_op: params.pi_op,
            eps_io: params.eps_io,
            pi_io: params.pi_io,
            cacheline_elements: raw.cacheline_elements,
            private_cache_elements: raw.private_cache_elements,
            core_count: Some(raw.core_count),
            raw: Some(raw),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn with_core_count(mut self, cores: u32) -> Result<Self> {
        self.core_count = Some(cores);
        self.validate()?;
        Ok(self)
    }

    pub fn with_cache(
        mut self,
        cacheline_elements: u64,
        private_cache_elements: u64,
    ) -> Result<Self> {
        self.cacheline_elements = cacheline_elements;
        self.private_cache_elements = private_cache_elements;
        self.validate()?;
        Ok(self)
    }

    pub fn params(&self) -> IceParameters {
        IceParameters {
            eps_op: self.eps_op,
            eps_io: self.eps_io,
            pi_op: self.pi_op,
            pi_io: self.pi_io,
        }
    }

    /// Same platform with all four energy parameters multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let p = self.params().scaled(k);
        let mut out = self.clone();
        out.eps_op = p.eps_op;
        out.eps_io = p.eps_io;
        out.pi_op = p.pi_op;
        out.pi_io = p.pi_io;
        out.raw = None;
        out.validate()?;
        Ok(out)
    }

    pub fn require_core_count(&self) -> Result<u32> {
        self.core_count
            .ok_or_else(|| IceError::NeedsCoreCount(self.name.clone()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(IceError::invalid("name", "must not be empty"));
        }
        require_positive("eps_op", self.eps_op)?;
        require_positive("eps_io", self.eps_io)?;
        require_positive("pi_op", self.pi_op)?;
        require_positive("pi_io", self.pi_io)?;
        if self.cacheline_elements == 0 {
            return Err(IceError::invalid("cacheline_elements", "must be positive"));
        }
        if self.private_cache_elements < self.cacheline_elements {
            return Err(IceError::invalid(
                "private_cache_elements",
                format!(
                    "{} elements is smaller than one line of {}",
                    self.private_cache_elements, self.cacheline_elements
                ),
            ));
        }
        if self.core_count == Some(0) {
            return Err(IceError::invalid("core_count", "must be positive"));
        }
        if let Some(raw) = &self.raw {
            raw.validate()?;
            let derived = derive_ice_parameters(raw)?;
            for (field, have, want) in [
                ("eps_op", self.eps_op, derived.eps_op),
                ("eps_io", self.eps_io, derived.eps_io),
                ("pi_op", self.pi_op, derived.pi_op),
                ("pi_io", self.pi_io, derived.pi_io),
            ] {
                if !rel_close(have, want, IDENTITY_RTOL) {
                    return Err(IceError::invalid(
                        field,
                        format!("{have} nJ disagrees with {want} nJ derived from raw constants"),
                    ));
                }
            }
            let line_to_op = raw.cycles_per_cacheline / raw.cycles_per_op;
            if !rel_close(self.pi_io / self.pi_op, line_to_op, IDENTITY_RTOL) {
                return Err(IceError::invalid(
                    "pi_io",
                    "pi_io / pi_op must equal cycles_per_cacheline / cycles_per_op",
                ));
            }
        }
        Ok(())
    }
}

fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// Energy-roofline style platform description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RooflineParameters {
    /// nJ per flop.
    pub energy_per_flop: f64,
    /// nJ per byte moved.
    pub energy_per_byte: f64,
    /// Watts.
    pub constant_power: f64,
    /// Seconds per flop.
    pub time_per_flop: f64,
    /// Seconds per byte.
    pub time_per_byte: f64,
    pub cacheline_bytes: u64,
}

/// Converts roofline parameters: per-byte quantities are scaled up to a
/// whole cache line and constant power times time gives static energy.
pub fn from_roofline(
    name: impl Into<String>,
    processor: impl Into<String>,
    roofline: &RooflineParameters,
) -> Result<PlatformProfile> {
    require_positive("energy_per_flop", roofline.energy_per_flop)?;
    require_positive("energy_per_byte", roofline.energy_per_byte)?;
    require_positive("constant_power", roofline.constant_power)?;
    require_positive("time_per_flop", roofline.time_per_flop)?;
    require_positive("time_per_byte", roofline.time_per_byte)?;
    if roofline.cacheline_bytes == 0 {
        return Err(IceError::invalid("cacheline_bytes", "must be positive"));
    }
    let line_bytes = roofline.cacheline_bytes as f64;
    let params = IceParameters {
        eps_op: roofline.energy_per_flop,
        eps_io: roofline.energy_per_byte * line_bytes,
        pi_op: roofline.constant_power * roofline.time_per_flop * NANOJOULES_PER_JOULE,
        pi_io: roofline.constant_power * roofline.time_per_byte * line_bytes * NANOJOULES_PER_JOULE,
    };
    let elements = (roofline.cacheline_bytes / ELEMENT_BYTES).max(1);
    PlatformProfile::new(name, processor, params)?
        .with_cache(elements, DEFAULT_PRIVATE_CACHE_ELEMENTS.max(elements))
}

/// Finds a profile by name, processor, or name followed by processor model
/// ("XeonPhi-31S1P"), ignoring case and punctuation. Failing an exact
/// match, a unique name prefix ("nehalem") resolves.
pub fn find_platform<'a>(
    profiles: &'a [PlatformProfile],
    query: &str,
) -> Result<&'a PlatformProfile> {
    let key = crate::normalize_name(query);
    let mut matches: Vec<&PlatformProfile> = profiles
        .iter()
        .filter(|p| platform_keys(p).contains(&key))
        .collect();
    if matches.is_empty() && !key.is_empty() {
        matches = profiles
            .iter()
            .filter(|p| crate::normalize_name(&p.name).starts_with(&key))
            .collect();
    }
    match matches.as_slice() {
        [one] => Ok(one),
        [] => Err(IceError::UnknownName {
            kind: "platform",
            name: query.to_string(),
            candidates: profiles.iter().map(|p| p.name.clone()).collect(),
        }),
        many => {
            // an exact name hit wins over processor aliases
            if let Some(exact) = many.iter().find(|p| crate::normalize_name(&p.name) == key) {
                return Ok(exact);
            }
            Err(IceError::AmbiguousName {
                kind: "platform",
                name: query.to_string(),
                matches: many.iter().map(|p| p.name.clone()).collect(),
            })
        }
    }
}

fn platform_keys(p: &PlatformProfile) -> Vec<String> {
    let name = crate::normalize_name(&p.name);
    let mut keys = vec![name.clone(), crate::normalize_name(&p.processor)];
    if let Some(model) = p.processor.split_whitespace().last() {
        keys.push(format!("{name}{}", crate::normalize_name(model)));
    }
    keys
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn raw(p_sta: f64, p_op: f64, p_io: f64, f: f64, m: f64, freq: f64) -> RawPlatformConstants {
        RawPlatformConstants {
            static_power_whole_platform: p_sta,
            dynamic_power_per_op: p_op,
            dynamic_power_per_io: p_io,
            cycles_per_op: f,
            cycles_per_cacheline: m,
            frequency: freq,
            cacheline_elements: 8,
            private_cache_elements: 32_768,
            core_count: 4,
        }
    }

    #[test]
    fn unit_case_gives_one_nanojoule() {
        let p = derive_ice_parameters(&raw(1.0, 1.0, 1.0, 1.0, 1.0, 1e9)).unwrap();
        for v in [p.eps_op, p.eps_io, p.pi_op, p.pi_io] {
            assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn symmetric_constants_give_equal_op_terms() {
        let p = derive_ice_parameters(&raw(3.0, 3.0, 7.0, 2.0, 2.0, 1.5e9)).unwrap();
        assert_relative_eq!(p.eps_op, p.pi_op, max_relative = 1e-15);
    }

    #[test]
    fn hand_evaluated_parameters() {
        let p = derive_ice_parameters(&raw(10.0, 2.0, 20.0, 1.0, 10.0, 2e9)).unwrap();
        assert_relative_eq!(p.eps_op, 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.eps_io, 100.0, max_relative = 1e-12);
        assert_relative_eq!(p.pi_op, 5.0, max_relative = 1e-12);
        assert_relative_eq!(p.pi_io, 50.0, max_relative = 1e-12);
    }

    #[test]
    fn non_positive_raw_field_is_named() {
        let mut r = raw(1.0, 1.0, 1.0, 1.0, 1.0, 1e9);
        r.cycles_per_cacheline = 0.0;
        match derive_ice_parameters(&r) {
            Err(IceError::InvalidArgument { field, .. }) => {
                assert_eq!(field, "cycles_per_cacheline")
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut r = raw(1.0, 1.0, 1.0, 1.0, 1.0, 1e9);
        r.cacheline_elements = 64;
        r.private_cache_elements = 32;
        assert!(derive_ice_parameters(&r).is_err());
    }

    #[test]
    fn profile_rejects_raw_mismatch() {
        let mut p =
            PlatformProfile::from_raw("t", "t", raw(10.0, 2.0, 20.0, 1.0, 10.0, 2e9)).unwrap();
        p.eps_io *= 1.0 + 1e-6;
        assert!(matches!(
            p.validate(),
            Err(IceError::InvalidArgument { ref field, .. }) if field == "eps_io"
        ));
    }

    #[test]
    fn roofline_zero_power_is_rejected() {
        let r = RooflineParameters {
            energy_per_flop: 1.0,
            energy_per_byte: 1.0,
            constant_power: 0.0,
            time_per_flop: 1e-9,
            time_per_byte: 1e-9,
            cacheline_bytes: 64,
        };
        assert!(matches!(
            from_roofline("z", "z", &r),
            Err(IceError::InvalidArgument { ref field, .. }) if field == "constant_power"
        ));
    }

    #[test]
    fn roofline_hand_evaluated() {
        let r = RooflineParameters {
            energy_per_flop: 2.0,
            energy_per_byte: 0.5,
            constant_power: 10.0,
            time_per_flop: 1e-9,
            time_per_byte: 4e-9,
            cacheline_bytes: 64,
        };
        let p = from_roofline("h", "h", &r).unwrap();
        assert_relative_eq!(p.eps_op, 2.0, max_relative = 1e-12);
        assert_relative_eq!(p.eps_io, 32.0, max_relative = 1e-12);
        assert_relative_eq!(p.pi_op, 10.0, max_relative = 1e-12);
        assert_relative_eq!(p.pi_io, 2560.0, max_relative = 1e-12);
        assert_eq!(p.cacheline_elements, 8);
    }

    #[test]
    fn roofline_reproduces_kepler_titan_row() {
        let line = 64u64;
        let r = RooflineParameters {
            energy_per_flop: 0.094,
            energy_per_byte: 17.09 / line as f64,
            constant_power: 1.0,
            time_per_flop: 0.077e-9,
            time_per_byte: 32.94e-9 / line as f64,
            cacheline_bytes: line,
        };
        let p = from_roofline("Kepler GTX Titan", "NVIDIA GK110", &r).unwrap();
        let titan = builtin_catalog()
            .into_iter()
            .find(|p| p.name == "Kepler GTX Titan")
            .unwrap();
        assert_eq!(format!("{:.3}", p.eps_op), format!("{:.3}", titan.eps_op));
        assert_eq!(format!("{:.3}", p.pi_op), format!("{:.3}", titan.pi_op));
        assert_eq!(format!("{:.2}", p.eps_io), format!("{:.2}", titan.eps_io));
        assert_eq!(format!("{:.2}", p.pi_io), format!("{:.2}", titan.pi_io));
    }

    #[test]
    fn missing_core_count_fails_loudly() {
        let p = builtin_catalog()
            .into_iter()
            .find(|p| p.name.starts_with("Nehalem"))
            .unwrap();
        assert!(matches!(
            p.require_core_count(),
            Err(IceError::NeedsCoreCount(_))
        ));
    }

    #[test]
    fn lookup_by_aliases() {
        let cat = builtin_catalog();
        assert_eq!(find_platform(&cat, "xeon").unwrap().name, "Xeon");
        assert_eq!(
            find_platform(&cat, "XeonPhi-31S1P").unwrap().name,
            "Xeon-Phi"
        );
        assert_eq!(
            find_platform(&cat, "xeonphi knc").unwrap().name,
            "XeonPhi KNC"
        );
        assert_eq!(
            find_platform(&cat, "nehalem-i7-950").unwrap().name,
            "Nehalem i7-950"
        );
        assert_eq!(
            find_platform(&cat, "nehalem").unwrap().name,
            "Nehalem i7-950"
        );
        assert!(matches!(
            find_platform(&cat, "kepler"),
            Err(IceError::AmbiguousName { .. })
        ));
        assert!(matches!(
            find_platform(&cat, "pentium"),
            Err(IceError::UnknownName { ref candidates, .. }) if candidates.len() == 11
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn derived_parameters_always_form_valid_profile(
                p_sta in 1e-3f64..1e3, p_op in 1e-3f64..1e3, p_io in 1e-3f64..1e3,
                f in 0.1f64..100.0, m in 0.1f64..1e4, freq in 1e6f64..1e10,
            ) {
                let r = raw(p_sta, p_op, p_io, f, m, freq);
                let profile = PlatformProfile::from_raw("p", "p", r);
                prop_assert!(profile.is_ok());
            }

            #[test]
            fn roofline_is_homogeneous_in_energy(
                e_flop in 1e-3f64..10.0, e_byte in 1e-3f64..10.0, power in 0.1f64..500.0,
                t_flop in 1e-12f64..1e-8, t_byte in 1e-12f64..1e-8, k in 1e-3f64..1e3,
            ) {
                let base = RooflineParameters {
                    energy_per_flop: e_flop, energy_per_byte: e_byte, constant_power: power,
                    time_per_flop: t_flop, time_per_byte: t_byte, cacheline_bytes: 64,
                };
                let scaled = RooflineParameters {
                    energy_per_flop: e_flop * k, energy_per_byte: e_byte * k, constant_power: power * k,
                    ..base
                };
                let a = from_roofline("a", "a", &base).unwrap().params().scaled(k);
                let b = from_roofline("b", "b", &scaled).unwrap().params();
                for (x, y) in [(a.eps_op, b.eps_op), (a.eps_io, b.eps_io), (a.pi_op, b.pi_op), (a.pi_io, b.pi_io)] {
                    prop_assert!(rel_close(x, y, 1e-12));
                }
            }
        }
    }
}
