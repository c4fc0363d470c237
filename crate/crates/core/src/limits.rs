//! Resource guards shared by the exploring operations.

use thiserror::Error;

pub const GUARD_ENV: &str = "HDA_SEM_GUARD";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// States explored by `build_lts`.
    pub states: usize,
    /// Cubes in a single pcset handed to `iso_check`.
    pub iso_cubes: usize,
    /// Cubes produced by tensor products and interpretation.
    pub cubes: usize,
    /// Directed paths enumerated by `bad_realization`.
    pub paths: usize,
    /// Simplices in an order complex.
    pub simplices: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            states: 1_000_000,
            iso_cubes: 10_000,
            cubes: 1_000_000,
            paths: 1_000_000,
            simplices: 200_000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bad guard setting `{0}`: expected N or key=N[,key=N...] with keys states, iso, cubes, paths, simplices")]
pub struct GuardSpecError(pub String);

impl Limits {
    /// Applies an override string: a bare number sets every guard, otherwise
    /// a comma-separated list of `key=N`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Limits, GuardSpecError> {
        let bad = || GuardSpecError(spec.to_string());
        let spec = spec.trim();
        if let Ok(n) = spec.parse::<usize>() {
            return Ok(Limits {
                states: n,
                iso_cubes: n,
                cubes: n,
                paths: n,
                simplices: n,
            });
        }
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(bad)?;
            let n: usize = value.trim().parse().map_err(|_| bad())?;
            match key.trim() {
                "states" => self.states = n,
                "iso" | "iso_cubes" => self.iso_cubes = n,
                "cubes" => self.cubes = n,
                "paths" => self.paths = n,
                "simplices" => self.simplices = n,
                _ => return Err(bad()),
            }
        }
        Ok(self)
    }

    /// Defaults with `HDA_SEM_GUARD` applied when set.
    pub fn from_env() -> Result<Limits, GuardSpecError> {
        match std::env::var(GUARD_ENV) {
            Ok(spec) => Limits::default().with_overrides(&spec),
            Err(_) => Ok(Limits::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let l = Limits::default().with_overrides("7").unwrap();
        assert_eq!((l.states, l.paths, l.iso_cubes), (7, 7, 7));
        let l = Limits::default().with_overrides("paths=5, iso=9").unwrap();
        assert_eq!((l.paths, l.iso_cubes, l.states), (5, 9, 1_000_000));
        assert!(Limits::default().with_overrides("speed=3").is_err());
        assert!(Limits::default().with_overrides("paths").is_err());
    }
}
