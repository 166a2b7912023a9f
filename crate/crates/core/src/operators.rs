//! Sparse second-quantized operators over an [`OccupationBasis`].
//!
//! Mode and island labels passed to the builders are 1-based, matching the
//! usual `c_1, c_2, ...` and island `1, 2, 3` notation.
//!
//! Truncation: a hop whose image leaves the basis (for the charge basis, an
//! image with `|n1|` or `|n2|` above `delta_n`) simply has no matrix element.
//! The resulting operator is the truncation of the infinite matrix.
//!
//! Fermionic sign convention: modes are ordered by label, and `c†_i c_j`
//! acting on a configuration with `j` occupied and `i` empty picks up
//! `(-1)^k`, where `k` counts occupied modes strictly between `i` and `j`.
//!
//! Units for the flux qubit: `E_J = 1`, so the charging term carries the
//! prefactor `1 / (E_J/E_C)`, and currents are measured in `2 pi E_J / Phi_0`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::basis::{Flavor, OccupationBasis, StateVector};
use crate::error::{Error, Result};

/// Tolerance on `max |M - M†|` for an operator flagged hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Sparse complex matrix stored as `(row, col, value)` triplets sorted by row
/// then column, with duplicates merged.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    basis: Arc<OccupationBasis>,
    entries: Vec<(usize, usize, C64)>,
    hermitian: bool,
}

impl LinearOperator {
    /// Builds an operator from triplets. Duplicate positions are summed. If
    /// `hermitian` is set the matrix is checked against its adjoint.
    pub fn from_triplets<I>(basis: Arc<OccupationBasis>, triplets: I, hermitian: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let n = basis.len();
        let mut merged: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::Parameter(format!("entry ({r}, {c}) out of range for dimension {n}")));
            }
            *merged.entry((r, c)).or_default() += v;
        }
        let entries = merged
            .into_iter()
            .filter(|(_, v)| *v != C64::new(0.0, 0.0))
            .map(|((r, c), v)| (r, c, v))
            .collect();
        let op = Self { basis, entries, hermitian: false };
        if hermitian {
            op.into_hermitian()
        } else {
            Ok(op)
        }
    }

    /// Flags the operator hermitian after checking it.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let dev = self.hermitian_deviation();
        if dev >= HERMITIAN_TOL {
            return Err(Error::Contract(format!("operator is not hermitian: max |M - M†| = {dev:e}")));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn zero(basis: Arc<OccupationBasis>) -> Self {
        Self { basis, entries: Vec::new(), hermitian: true }
    }

    pub fn identity(basis: Arc<OccupationBasis>) -> Self {
        let entries = (0..basis.len()).map(|k| (k, k, C64::new(1.0, 0.0))).collect();
        Self { basis, entries, hermitian: true }
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Matrix element `<row|M|col>`.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&(row, col)))
            .map(|k| self.entries[k].2)
            .unwrap_or_default()
    }

    pub fn diagonal(&self) -> DVector<C64> {
        let mut d = DVector::zeros(self.dim());
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] += v;
            }
        }
        d
    }

    pub fn adjoint(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Self { basis: self.basis.clone(), entries, hermitian: self.hermitian }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, v * factor))
            .filter(|&(_, _, v)| v != C64::new(0.0, 0.0))
            .collect();
        Self {
            basis: self.basis.clone(),
            entries,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// `sum_k coeff_k * op_k` over a common basis. The result is not flagged
    /// hermitian; use [`LinearOperator::into_hermitian`] when it should be.
    pub fn linear_combination(terms: &[(C64, &LinearOperator)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Parameter("empty linear combination".into()));
        };
        for (_, op) in terms {
            first.basis.ensure_same(&op.basis)?;
        }
        let triplets = terms
            .iter()
            .flat_map(|&(coeff, op)| op.entries.iter().map(move |&(r, c, v)| (r, c, coeff * v)));
        Self::from_triplets(first.basis.clone(), triplets, false)
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let mut sum = Self::linear_combination(&[(one, self), (one, other)])?;
        sum.hermitian = self.hermitian && other.hermitian;
        Ok(sum)
    }

    /// `max |M - M†|` over all entries.
    pub fn hermitian_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn apply_vector(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim());
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Applies the operator to every column of `x`.
    pub fn apply_matrix(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut y = DMatrix::zeros(self.dim(), x.ncols());
        for j in 0..x.ncols() {
            let xj = x.column(j);
            let mut yj = y.column_mut(j);
            for &(r, c, v) in &self.entries {
                yj[r] += v * xj[c];
            }
        }
        y
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.basis.ensure_same(state.basis())?;
        StateVector::new(self.basis.clone(), self.apply_vector(state.amplitudes()))
    }

    /// `<a|M|b>`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> Result<C64> {
        a.inner(&self.apply(b)?)
    }

    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        self.matrix_element(state, state)
    }
}

fn check_mode(basis: &OccupationBasis, label: usize) -> Result<usize> {
    let modes = basis.flavor().n_modes();
    if label == 0 || label > modes {
        return Err(Error::Parameter(format!(
            "mode label {label} out of range 1..={modes} for {}",
            basis.flavor()
        )));
    }
    Ok(label - 1)
}

fn check_pair(basis: &OccupationBasis, i: usize, j: usize) -> Result<(usize, usize)> {
    let (a, b) = (check_mode(basis, i)?, check_mode(basis, j)?);
    if a == b {
        return Err(Error::Parameter(format!("hop needs distinct modes, got i = j = {i}")));
    }
    Ok((a, b))
}

/// Moves one unit of occupation from mode `j` to mode `i`, weighting each
/// transition by `amplitude(source config)`; `None` means no matrix element.
fn hop_operator<F>(basis: &Arc<OccupationBasis>, i: usize, j: usize, amplitude: F) -> Result<LinearOperator>
where
    F: Fn(&[i64]) -> Option<C64>,
{
    let mut triplets = Vec::new();
    for (col, config) in basis.configs().iter().enumerate() {
        let Some(value) = amplitude(config) else { continue };
        let mut image = config.clone();
        image[i] += 1;
        image[j] -= 1;
        if let Some(row) = basis.index_of(&image) {
            triplets.push((row, col, value));
        }
    }
    LinearOperator::from_triplets(basis.clone(), triplets, false)
}

fn expect_charge3(basis: &OccupationBasis) -> Result<i64> {
    match basis.flavor() {
        Flavor::Charge3 { delta_n } => Ok(delta_n),
        other => Err(Error::Parameter(format!("expected a charge3 basis, got {other}"))),
    }
}

/// Cooper-pair hop `exp(i(phi_i - phi_j))`: adds a pair to island `i`, removes
/// one from island `j`, with unit matrix element.
pub fn pair_hop(basis: &Arc<OccupationBasis>, i: usize, j: usize) -> Result<LinearOperator> {
    expect_charge3(basis)?;
    let (a, b) = check_pair(basis, i, j)?;
    hop_operator(basis, a, b, |_| Some(C64::new(1.0, 0.0)))
}

/// Diagonal occupation operator `n_j`; valid on every flavor.
pub fn number_op(basis: &Arc<OccupationBasis>, j: usize) -> Result<LinearOperator> {
    let m = check_mode(basis, j)?;
    let triplets = basis
        .configs()
        .iter()
        .enumerate()
        .map(|(k, c)| (k, k, C64::new(c[m] as f64, 0.0)));
    LinearOperator::from_triplets(basis.clone(), triplets, true)
}

/// Bosonic `c†_i c_j` with ladder amplitudes `sqrt((n_i + 1) n_j)`.
pub fn boson_hop(basis: &Arc<OccupationBasis>, i: usize, j: usize) -> Result<LinearOperator> {
    if !matches!(basis.flavor(), Flavor::Boson2 { .. }) {
        return Err(Error::Parameter(format!("expected a boson2 basis, got {}", basis.flavor())));
    }
    let (a, b) = check_pair(basis, i, j)?;
    hop_operator(basis, a, b, |c| {
        (c[b] > 0).then(|| C64::new((((c[a] + 1) * c[b]) as f64).sqrt(), 0.0))
    })
}

/// Fermionic `c†_i c_j`; see the module docs for the sign convention.
pub fn fermion_hop(basis: &Arc<OccupationBasis>, i: usize, j: usize) -> Result<LinearOperator> {
    if !matches!(basis.flavor(), Flavor::Fermion { .. }) {
        return Err(Error::Parameter(format!("expected a fermion basis, got {}", basis.flavor())));
    }
    let (a, b) = check_pair(basis, i, j)?;
    let (lo, hi) = (a.min(b), a.max(b));
    hop_operator(basis, a, b, |c| {
        if c[b] != 1 || c[a] != 0 {
            return None;
        }
        let between: i64 = c[lo + 1..hi].iter().sum();
        let sign = if between % 2 == 0 { 1.0 } else { -1.0 };
        Some(C64::new(sign, 0.0))
    })
}

/// Parameters of the three-junction flux qubit in the charge basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxQubitParams {
    /// `E_J / E_C`.
    pub ej_over_ec: f64,
    /// Relative size of the small junction.
    pub alpha: f64,
    /// Frustration `Phi / Phi_0`.
    pub f: f64,
    /// Charge truncation: `|n1|, |n2| <= delta_n`.
    pub delta_n: i64,
}

impl FluxQubitParams {
    pub fn new(ej_over_ec: f64, alpha: f64, f: f64, delta_n: i64) -> Result<Self> {
        let params = Self { ej_over_ec, alpha, f, delta_n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ej_over_ec > 0.0 && self.ej_over_ec.is_finite()) {
            return Err(Error::Parameter(format!("E_J/E_C must be positive, got {}", self.ej_over_ec)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.alpha > 1.0 {
            warn!("alpha = {} > 1: the small junction is larger than the others", self.alpha);
        }
        if !self.f.is_finite() {
            return Err(Error::Parameter(format!("frustration must be finite, got {}", self.f)));
        }
        if self.delta_n < 1 {
            return Err(Error::Parameter(format!("delta_n must be >= 1, got {}", self.delta_n)));
        }
        Ok(())
    }

    /// Extra tunneling phase `2 pi f` on the small junction.
    pub fn theta(&self) -> f64 {
        2.0 * PI * self.f
    }

    pub fn with_f(self, f: f64) -> Self {
        Self { f, ..self }
    }

    pub fn basis(&self) -> Result<Arc<OccupationBasis>> {
        OccupationBasis::charge3(self.delta_n)
    }
}

fn check_flux_basis(params: &FluxQubitParams, basis: &OccupationBasis) -> Result<()> {
    let delta_n = expect_charge3(basis)?;
    if delta_n != params.delta_n {
        return Err(Error::Parameter(format!(
            "basis has delta_n = {delta_n} but parameters ask for {}",
            params.delta_n
        )));
    }
    Ok(())
}

/// `exp(i theta) exp(i(phi_1 - phi_3))`, the small-junction hop with its flux phase.
fn small_junction_hop(params: &FluxQubitParams, basis: &Arc<OccupationBasis>) -> Result<LinearOperator> {
    Ok(pair_hop(basis, 1, 3)?.scaled(C64::from_polar(1.0, params.theta())))
}

/// `H_J = -(1/2) [e^{i(phi2-phi1)} + e^{i(phi3-phi2)} + alpha e^{i(phi1-phi3+theta)} + h.c.]`
/// in units of `E_J`. With `alpha = 0` the small-junction terms vanish.
pub fn josephson_hamiltonian(params: &FluxQubitParams, basis: &Arc<OccupationBasis>) -> Result<LinearOperator> {
    check_flux_basis(params, basis)?;
    let h21 = pair_hop(basis, 2, 1)?;
    let h32 = pair_hop(basis, 3, 2)?;
    let h13 = small_junction_hop(params, basis)?;
    let half = C64::new(-0.5, 0.0);
    let alpha = C64::new(-0.5 * params.alpha, 0.0);
    let mut terms = vec![(half, &h21), (half, &h32)];
    let (h12, h23, h31) = (h21.adjoint(), h32.adjoint(), h13.adjoint());
    terms.extend([(half, &h12), (half, &h23)]);
    if params.alpha != 0.0 {
        terms.extend([(alpha, &h13), (alpha, &h31)]);
    }
    LinearOperator::linear_combination(&terms)?.into_hermitian()
}

/// Diagonal charging energy in units of `E_J`.
///
/// With `Q_j = 2e n_j` and `E_C = e^2 / 2C`, the prefactor `(2e)^2 / 2C`
/// equals `4 E_C`, and `E_C = 1 / (E_J/E_C)` in these units:
///
/// ```text
/// E_ch(n1, n3) = 4 / (E_J/E_C) * [ n1^2 + n3^2 - (n1 - n3)^2 / (2 + 1/alpha) ]
/// ```
pub fn charging_hamiltonian(params: &FluxQubitParams, basis: &Arc<OccupationBasis>) -> Result<LinearOperator> {
    check_flux_basis(params, basis)?;
    if params.alpha == 0.0 {
        return Err(Error::Parameter("charging energy needs alpha != 0 (1/alpha)".into()));
    }
    if !(params.ej_over_ec > 0.0) {
        return Err(Error::Parameter(format!("E_J/E_C must be positive, got {}", params.ej_over_ec)));
    }
    let prefactor = 4.0 / params.ej_over_ec;
    let denom = 2.0 + 1.0 / params.alpha;
    let triplets = basis.configs().iter().enumerate().map(|(k, c)| {
        let (n1, n3) = (c[0] as f64, c[2] as f64);
        let e = prefactor * (n1 * n1 + n3 * n3 - (n1 - n3) * (n1 - n3) / denom);
        (k, k, C64::new(e, 0.0))
    });
    LinearOperator::from_triplets(basis.clone(), triplets, true)
}

/// Full flux-qubit Hamiltonian `H_J + H_ch`.
pub fn hamiltonian(params: &FluxQubitParams, basis: &Arc<OccupationBasis>) -> Result<LinearOperator> {
    josephson_hamiltonian(params, basis)?.add(&charging_hamiltonian(params, basis)?)
}

/// `I = -dH/dPhi` in units of `2 pi E_J / Phi_0`.
///
/// Only the small junction carries the flux phase, so with
/// `X = e^{i theta} e^{i(phi_1 - phi_3)}` this is `(i alpha / 2) (X - X†)`.
pub fn current_operator(params: &FluxQubitParams, basis: &Arc<OccupationBasis>) -> Result<LinearOperator> {
    check_flux_basis(params, basis)?;
    let x = small_junction_hop(params, basis)?;
    let coeff = C64::new(0.0, 0.5 * params.alpha);
    LinearOperator::linear_combination(&[(coeff, &x), (-coeff, &x.adjoint())])?.into_hermitian()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn charge(dn: i64) -> Arc<OccupationBasis> {
        OccupationBasis::charge3(dn).unwrap()
    }

    fn apply(op: &LinearOperator, config: &[i64]) -> StateVector {
        op.apply(&StateVector::basis_state(op.basis().clone(), config).unwrap()).unwrap()
    }

    fn max_entry_diff(a: &LinearOperator, b: &LinearOperator) -> f64 {
        (a.to_dense() - b.to_dense()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn pair_hop_moves_one_pair() {
        let b = charge(1);
        let hop = pair_hop(&b, 1, 2).unwrap();
        let out = apply(&hop, &[0, 0, 0]);
        let expect = StateVector::basis_state(b.clone(), &[1, -1, 0]).unwrap();
        assert_eq!(out.amplitudes(), expect.amplitudes());

        let out = apply(&hop, &[1, 0, -1]);
        assert_eq!(out.norm_squared(), 0.0);

        assert!(matches!(pair_hop(&b, 2, 2), Err(Error::Parameter(_))));
        assert!(matches!(pair_hop(&b, 0, 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn pair_hop_adjoint_is_reverse_hop() {
        let b = charge(3);
        for (i, j) in [(1, 2), (2, 3), (1, 3)] {
            let fwd = pair_hop(&b, i, j).unwrap();
            let rev = pair_hop(&b, j, i).unwrap();
            assert_eq!(max_entry_diff(&fwd.adjoint(), &rev), 0.0);
        }
    }

    #[test]
    fn hop_round_trip_is_identity_in_interior() {
        let b = charge(3);
        let fwd = pair_hop(&b, 1, 2).unwrap();
        let rev = pair_hop(&b, 2, 1).unwrap();
        for config in b.configs() {
            let out = fwd.apply(&rev.apply(&StateVector::basis_state(b.clone(), config).unwrap()).unwrap()).unwrap();
            // rev raises n2 and lowers n1; it leaves the window when n2 = dn or n1 = -dn
            let blocked = config[1] == 3 || config[0] == -3;
            if blocked {
                assert_eq!(out.norm_squared(), 0.0, "{config:?}");
            } else {
                assert_eq!(out.amplitude(config), C64::new(1.0, 0.0), "{config:?}");
                assert_eq!(out.norm_squared(), 1.0);
            }
        }
    }

    #[test]
    fn number_operators() {
        let b = charge(2);
        let n1 = number_op(&b, 1).unwrap();
        let out = apply(&n1, &[2, -1, -1]);
        assert_eq!(out.amplitude(&[2, -1, -1]), C64::new(2.0, 0.0));
        assert!(n1.is_hermitian());

        let n2 = number_op(&b, 2).unwrap();
        let n3 = number_op(&b, 3).unwrap();
        let minus = C64::new(-1.0, 0.0);
        let sum = LinearOperator::linear_combination(&[(minus, &n1), (minus, &n2)]).unwrap();
        assert_eq!(max_entry_diff(&sum, &n3), 0.0);

        let trace: C64 = number_op(&charge(1), 1).unwrap().diagonal().iter().sum();
        assert_eq!(trace, C64::new(0.0, 0.0));
        assert!(matches!(number_op(&b, 4), Err(Error::Parameter(_))));
    }

    #[test]
    fn boson_ladder_amplitudes() {
        let b = OccupationBasis::boson2(2).unwrap();
        let c2c1 = boson_hop(&b, 2, 1).unwrap();
        let out = apply(&c2c1, &[2, 0]);
        assert!((out.amplitude(&[1, 1]) - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((out.norm_squared() - 2.0).abs() < 1e-14);

        assert_eq!(apply(&c2c1, &[0, 2]).norm_squared(), 0.0);

        let twice = c2c1.apply(&out).unwrap();
        assert!((twice.amplitude(&[0, 2]) - C64::new(2.0, 0.0)).norm() < 1e-14);
        assert!((twice.norm_squared() - 4.0).abs() < 1e-13);

        assert!(matches!(boson_hop(&b, 1, 1), Err(Error::Parameter(_))));
        let c1c2 = boson_hop(&b, 1, 2).unwrap();
        assert!(max_entry_diff(&c2c1.adjoint(), &c1c2) < 1e-15);
    }

    #[test]
    fn fermion_hops_and_signs() {
        let b = OccupationBasis::fermion(2, 1).unwrap();
        let c2c1 = fermion_hop(&b, 2, 1).unwrap();
        let out = apply(&c2c1, &[1, 0]);
        assert_eq!(out.amplitude(&[0, 1]), C64::new(1.0, 0.0));
        assert_eq!(apply(&c2c1, &[0, 1]).norm_squared(), 0.0);
        assert!(matches!(fermion_hop(&b, 2, 2), Err(Error::Parameter(_))));

        // one occupied mode between 1 and 3
        let b = OccupationBasis::fermion(3, 2).unwrap();
        let c3c1 = fermion_hop(&b, 3, 1).unwrap();
        assert_eq!(apply(&c3c1, &[1, 1, 0]).amplitude(&[0, 1, 1]), C64::new(-1.0, 0.0));
        // Pauli blocked
        let c2c1 = fermion_hop(&b, 2, 1).unwrap();
        assert_eq!(apply(&c2c1, &[1, 1, 0]).norm_squared(), 0.0);

        let b = OccupationBasis::fermion(5, 2).unwrap();
        for i in 1..=5 {
            for j in 1..=5 {
                if i != j {
                    let fwd = fermion_hop(&b, i, j).unwrap();
                    let rev = fermion_hop(&b, j, i).unwrap();
                    assert_eq!(max_entry_diff(&fwd.adjoint(), &rev), 0.0, "({i},{j})");
                }
            }
        }
    }

    // c†_i c_j built from explicit Jordan-Wigner strings of single creation and
    // annihilation operators must agree with the direct sign rule.
    #[test]
    fn fermion_sign_matches_jordan_wigner() {
        fn annihilate(config: &mut [i64], j: usize) -> Option<f64> {
            if config[j] == 0 {
                return None;
            }
            let sign = if config[..j].iter().sum::<i64>() % 2 == 0 { 1.0 } else { -1.0 };
            config[j] = 0;
            Some(sign)
        }
        fn create(config: &mut [i64], i: usize) -> Option<f64> {
            if config[i] == 1 {
                return None;
            }
            let sign = if config[..i].iter().sum::<i64>() % 2 == 0 { 1.0 } else { -1.0 };
            config[i] = 1;
            Some(sign)
        }
        let b = OccupationBasis::fermion(6, 3).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                let op = fermion_hop(&b, i + 1, j + 1).unwrap();
                for config in b.configs() {
                    let mut image = config.clone();
                    let expect = annihilate(&mut image, j).and_then(|s1| create(&mut image, i).map(|s2| s1 * s2));
                    let out = apply(&op, config);
                    match expect {
                        Some(sign) => assert_eq!(out.amplitude(&image), C64::new(sign, 0.0)),
                        None => assert_eq!(out.norm_squared(), 0.0),
                    }
                }
            }
        }
    }

    #[test]
    fn josephson_term_properties() {
        let p = FluxQubitParams::new(20.0, 0.8, 0.5, 3).unwrap();
        let b = p.basis().unwrap();
        let hj = josephson_hamiltonian(&p, &b).unwrap();
        let max_im = hj.entries().iter().map(|e| e.2.im.abs()).fold(0.0, f64::max);
        assert!(max_im < 1e-14, "{max_im}");
        assert!(hj.hermitian_deviation() < 1e-14);

        // alpha = 0 breaks the ring: no element couples n1 and n3 with n2 fixed
        let p0 = FluxQubitParams { alpha: 0.0, ..p };
        let hj0 = josephson_hamiltonian(&p0, &b).unwrap();
        for &(r, c, _) in hj0.entries() {
            assert_ne!(b.config(r)[1], b.config(c)[1]);
        }
        let hop13 = pair_hop(&b, 1, 3).unwrap();
        assert!(hop13.entries().iter().all(|&(r, c, _)| hj0.get(r, c) == C64::new(0.0, 0.0)));

        for &(ej, alpha, f) in &[(3.0, 0.7, 0.13), (40.0, 1.0, 0.77), (1.0, 0.5, -0.3)] {
            let p = FluxQubitParams::new(ej, alpha, f, 2).unwrap();
            let h = hamiltonian(&p, &p.basis().unwrap()).unwrap();
            assert!(h.is_hermitian());
            assert!(h.hermitian_deviation() < 1e-14);
        }
    }

    #[test]
    fn charging_term_properties() {
        let p = FluxQubitParams::new(20.0, 0.8, 0.5, 3).unwrap();
        let b = p.basis().unwrap();
        let hc = charging_hamiltonian(&p, &b).unwrap();
        let e = |n1: i64, n3: i64| -> f64 {
            let k = b.index_of(&[n1, -n1 - n3, n3]).unwrap();
            hc.get(k, k).re
        };
        assert_eq!(e(0, 0), 0.0);
        for n1 in -2..=2 {
            for n3 in -1..=1 {
                assert_eq!(e(n1, n3), e(n3, n1));
                assert_eq!(e(n1, n3), e(-n1, -n3));
            }
        }
        // hand value: (1, 0, -1) -> 4/20 * [1 + 1 - 4/(2 + 1.25)]
        let expect = 0.2 * (2.0 - 4.0 / 3.25);
        assert!((e(1, -1) - expect).abs() < 1e-15);

        let p0 = FluxQubitParams { alpha: 0.0, ..p };
        assert!(matches!(charging_hamiltonian(&p0, &b), Err(Error::Parameter(_))));
    }

    #[test]
    fn current_operator_structure() {
        let p = FluxQubitParams::new(20.0, 0.8, 0.37, 3).unwrap();
        let b = p.basis().unwrap();
        let cur = current_operator(&p, &b).unwrap();
        assert!(cur.entries().iter().all(|&(r, c, _)| r != c));
        assert!(cur.diagonal().iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert!(cur.hermitian_deviation() < 1e-14);

        // -dH/dtheta by central differences in theta
        let h = 1e-6;
        let hp = josephson_hamiltonian(&p.with_f(p.f + h / (2.0 * PI)), &b).unwrap();
        let hm = josephson_hamiltonian(&p.with_f(p.f - h / (2.0 * PI)), &b).unwrap();
        let deriv = LinearOperator::linear_combination(&[
            (C64::new(-0.5 / h, 0.0), &hp),
            (C64::new(0.5 / h, 0.0), &hm),
        ])
        .unwrap();
        assert!(max_entry_diff(&deriv, &cur) < 1e-8);
    }

    #[test]
    fn param_validation() {
        assert!(FluxQubitParams::new(0.0, 1.0, 0.5, 3).is_err());
        assert!(FluxQubitParams::new(1.0, 0.0, 0.5, 3).is_err());
        assert!(FluxQubitParams::new(1.0, 1.0, 0.5, 0).is_err());
        assert!(FluxQubitParams::new(1.0, 1.2, 0.5, 1).is_ok());
        let p = FluxQubitParams::new(1.0, 1.0, 0.5, 2).unwrap();
        assert!(hamiltonian(&p, &charge(3)).is_err());
        assert!(hamiltonian(&p, &OccupationBasis::boson2(2).unwrap()).is_err());
    }
}
