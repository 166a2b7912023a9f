//! Finite occupation-number bases and state vectors over them.
//!
//! Three flavors are supported:
//!
//! - `Charge3`: excess Cooper-pair numbers `(n1, n2, n3)` on three islands with
//!   `n1 + n2 + n3 = 0` and `|n1|, |n2| <= delta_n`. `n3` is always derived.
//! - `Boson2`: two bosonic modes holding `N` particles, `(n, N - n)`.
//! - `Fermion`: `M` fermionic modes holding `N` particles, as 0/1 tuples.
//!
//! Configurations are ordered lexicographically on the occupation tuple, so
//! every matrix built downstream is reproducible bit for bit.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// An occupation tuple, one entry per island or mode.
pub type Config = Vec<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Charge3 { delta_n: i64 },
    Boson2 { particles: i64 },
    Fermion { modes: i64, particles: i64 },
}

impl Flavor {
    /// Number of islands or modes in each configuration.
    pub fn n_modes(&self) -> usize {
        match *self {
            Flavor::Charge3 { .. } => 3,
            Flavor::Boson2 { .. } => 2,
            Flavor::Fermion { modes, .. } => modes as usize,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Flavor::Charge3 { delta_n } => write!(f, "charge3(dn={delta_n})"),
            Flavor::Boson2 { particles } => write!(f, "boson2(N={particles})"),
            Flavor::Fermion { modes, particles } => write!(f, "fermion(M={modes}, N={particles})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OccupationBasis {
    flavor: Flavor,
    configs: Vec<Config>,
    index: HashMap<Config, usize>,
}

impl OccupationBasis {
    pub fn new(flavor: Flavor) -> Result<Self> {
        let configs = match flavor {
            Flavor::Charge3 { delta_n } => {
                if delta_n < 0 {
                    return Err(Error::Parameter(format!("delta_n must be >= 0, got {delta_n}")));
                }
                let mut configs = Vec::with_capacity(((2 * delta_n + 1) * (2 * delta_n + 1)) as usize);
                for n1 in -delta_n..=delta_n {
                    for n2 in -delta_n..=delta_n {
                        configs.push(vec![n1, n2, -n1 - n2]);
                    }
                }
                configs
            }
            Flavor::Boson2 { particles } => {
                if particles < 0 {
                    return Err(Error::Parameter(format!("particle number must be >= 0, got {particles}")));
                }
                (0..=particles).map(|n| vec![n, particles - n]).collect()
            }
            Flavor::Fermion { modes, particles } => {
                if modes < 0 || particles < 0 || particles > modes {
                    return Err(Error::Parameter(format!(
                        "need 0 <= N <= M for fermions, got M={modes}, N={particles}"
                    )));
                }
                let mut configs = Vec::new();
                let mut current = Vec::with_capacity(modes as usize);
                fermion_configs(modes as usize, particles as usize, &mut current, &mut configs);
                configs
            }
        };
        let index = configs.iter().enumerate().map(|(k, c)| (c.clone(), k)).collect();
        Ok(Self { flavor, configs, index })
    }

    pub fn charge3(delta_n: i64) -> Result<Arc<Self>> {
        Self::new(Flavor::Charge3 { delta_n }).map(Arc::new)
    }

    pub fn boson2(particles: i64) -> Result<Arc<Self>> {
        Self::new(Flavor::Boson2 { particles }).map(Arc::new)
    }

    pub fn fermion(modes: i64, particles: i64) -> Result<Arc<Self>> {
        Self::new(Flavor::Fermion { modes, particles }).map(Arc::new)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn config(&self, k: usize) -> &[i64] {
        &self.configs[k]
    }

    /// Position of `config`, or `None` when it lies outside the basis.
    pub fn index_of(&self, config: &[i64]) -> Option<usize> {
        self.index.get(config).copied()
    }

    pub fn lookup(&self, config: &[i64]) -> Result<usize> {
        self.index_of(config).ok_or_else(|| Error::Lookup { config: config.to_vec() })
    }

    pub(crate) fn ensure_same(&self, other: &OccupationBasis) -> Result<()> {
        if self.flavor == other.flavor {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.flavor.to_string(),
                right: other.flavor.to_string(),
            })
        }
    }
}

// Emits tuples in lexicographic order: a 0 in the current slot sorts first.
fn fermion_configs(modes: usize, particles: usize, current: &mut Vec<i64>, out: &mut Vec<Config>) {
    let placed = current.iter().filter(|&&b| b == 1).count();
    let remaining_slots = modes - current.len();
    let remaining_particles = particles - placed;
    if remaining_slots == 0 {
        out.push(current.clone());
        return;
    }
    if remaining_slots > remaining_particles {
        current.push(0);
        fermion_configs(modes, particles, current, out);
        current.pop();
    }
    if remaining_particles > 0 {
        current.push(1);
        fermion_configs(modes, particles, current, out);
        current.pop();
    }
}

/// Complex amplitudes over an [`OccupationBasis`].
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<OccupationBasis>,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(basis: Arc<OccupationBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::Parameter(format!(
                "amplitude vector has length {}, basis {} has {}",
                amplitudes.len(),
                basis.flavor(),
                basis.len()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: Arc<OccupationBasis>) -> Self {
        let n = basis.len();
        Self { basis, amplitudes: DVector::zeros(n) }
    }

    /// Unit vector on a single configuration.
    pub fn basis_state(basis: Arc<OccupationBasis>, config: &[i64]) -> Result<Self> {
        let k = basis.lookup(config)?;
        let mut state = Self::zeros(basis);
        state.amplitudes[k] = C64::new(1.0, 0.0);
        Ok(state)
    }

    /// Builds a state from `(config, amplitude)` pairs and normalizes it.
    pub fn superposition(basis: Arc<OccupationBasis>, terms: &[(&[i64], C64)]) -> Result<Self> {
        let mut state = Self::zeros(basis);
        for (config, amp) in terms {
            let k = state.basis.lookup(config)?;
            state.amplitudes[k] += amp;
        }
        state.normalized()
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitude on `config`; zero for configurations outside the basis.
    pub fn amplitude(&self, config: &[i64]) -> C64 {
        self.basis
            .index_of(config)
            .map(|k| self.amplitudes[k])
            .unwrap_or_default()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_squared() - 1.0).abs() <= tol
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Contract(format!("cannot normalize a state of norm {norm}")));
        }
        self.amplitudes.unscale_mut(norm);
        Ok(self)
    }

    /// Complex conjugate of every amplitude in this basis.
    pub fn conj(&self) -> Self {
        Self { basis: self.basis.clone(), amplitudes: self.amplitudes.map(|z| z.conj()) }
    }

    /// Multiplies by the phase that makes the largest amplitude real and
    /// positive. Among amplitudes whose modulus is within a relative `1e-9`
    /// of the largest, the lowest index wins.
    pub fn phase_fixed(mut self) -> Self {
        if let Some(k) = pivot_index(&self.amplitudes) {
            let z = self.amplitudes[k];
            let phase = z.conj() / z.norm();
            self.amplitudes *= phase;
            self.amplitudes[k] = C64::new(self.amplitudes[k].norm(), 0.0);
        }
        self
    }
}

pub(crate) fn pivot_index(amps: &DVector<C64>) -> Option<usize> {
    let max = amps.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return None;
    }
    amps.iter().position(|z| z.norm() >= max * (1.0 - 1e-9))
}
