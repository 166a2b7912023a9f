//! Dense hermitian diagonalization, the counter-circulating current states
//! `|+I>` and `|-I>`, and ground-state diagnostics of the flux qubit.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::basis::{OccupationBasis, StateVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{self, FluxQubitParams, LinearOperator};

/// Current eigenvalues closer than this are one eigenspace; also the width of
/// the zero-current window.
pub const CURRENT_MERGE_TOL: f64 = 1e-9;

/// Below this splitting the two-level current matrix is called degenerate.
pub const DEGENERATE_CURRENT_TOL: f64 = 1e-10;

/// Eigenpairs sorted by ascending eigenvalue, each vector phase-fixed so its
/// largest amplitude is real and positive.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        self.eigenvectors[0].basis()
    }
}

/// Full dense decomposition of a hermitian operator.
///
/// Matrices whose imaginary parts are at rounding level (for example the flux
/// qubit at `f = 0.5`, where `e^{i pi}` carries a `1e-16` imaginary part) go
/// through the real symmetric solver, so their eigenvectors come out real.
pub fn eig_hermitian(op: &LinearOperator) -> Result<EigenDecomposition> {
    if !op.is_hermitian() {
        return Err(Error::Contract("eig_hermitian needs an operator flagged hermitian".into()));
    }
    let basis = op.basis().clone();
    let n = op.dim();
    if n == 0 {
        return Err(Error::Contract("cannot diagonalize an empty operator".into()));
    }
    let scale = op.entries().iter().map(|e| e.2.norm()).fold(0.0, f64::max);
    let max_im = op.entries().iter().map(|e| e.2.im.abs()).fold(0.0, f64::max);

    let (values, vectors): (Vec<f64>, Vec<DVector<C64>>) = if max_im <= 1e-14 * scale {
        let (values, vecs) = linalg::symmetric_eigen(&op.to_dense().map(|z| z.re))?;
        (values, (0..n).map(|k| vecs.column(k).map(|x| C64::new(x, 0.0))).collect())
    } else {
        let (values, vecs) = linalg::hermitian_eigen(&op.to_dense())?;
        (values, (0..n).map(|k| vecs.column(k).into_owned()).collect())
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| StateVector::new(basis.clone(), vectors[k].clone()).map(StateVector::phase_fixed))
        .collect::<Result<_>>()?;
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// The two current states extracted from a superposition.
#[derive(Clone, Debug)]
pub struct CurrentStatePair {
    pub plus: StateVector,
    pub minus: StateVector,
    /// `<+I|I|+I>`, positive.
    pub current: f64,
    /// `<-I|I|-I>`; equals `-current` at the symmetry point.
    pub minus_current: f64,
    /// Weight of the source state discarded by the extraction (zero-current
    /// component for the filter method, zero for the two-level method).
    pub excluded_weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extraction {
    /// Diagonalize the current in the span of the two lowest eigenstates.
    TwoLevel,
    /// Split the ground state by the sign of the full-space current eigenvalues.
    Filter,
}

/// Diagonalizes `<psi_a|I|psi_b>` over the ground and first excited state.
pub fn current_states_2d(eig: &EigenDecomposition, current: &LinearOperator) -> Result<CurrentStatePair> {
    if eig.len() < 2 {
        return Err(Error::Contract("need at least two eigenvectors".into()));
    }
    let psi = [&eig.eigenvectors[0], &eig.eigenvectors[1]];
    let mut m = DMatrix::<C64>::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            m[(a, b)] = current.matrix_element(psi[a], psi[b])?;
        }
    }
    // symmetrize away rounding so the 2x2 solver sees an exactly hermitian matrix
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = linalg::hermitian_eigen(&m)?;
    let (lo, hi) = (0, 1);
    let (i_minus, i_plus) = (values[lo], values[hi]);
    if i_plus - i_minus < DEGENERATE_CURRENT_TOL {
        return Err(Error::DegenerateCurrent(0.5 * (i_plus - i_minus)));
    }
    let combine = |k: usize| -> Result<StateVector> {
        let c = vectors.column(k);
        let amps = psi[0].amplitudes() * c[0] + psi[1].amplitudes() * c[1];
        Ok(StateVector::new(psi[0].basis().clone(), amps)?.normalized()?.phase_fixed())
    };
    Ok(CurrentStatePair {
        plus: combine(hi)?,
        minus: combine(lo)?,
        current: i_plus,
        minus_current: i_minus,
        excluded_weight: 0.0,
    })
}

/// Eigen-decomposition of the current operator with degenerate eigenvalues
/// grouped.
#[derive(Clone, Debug)]
pub struct CurrentSpectrum {
    eig: EigenDecomposition,
}

impl CurrentSpectrum {
    pub fn new(current: &LinearOperator) -> Result<Self> {
        Ok(Self { eig: eig_hermitian(current)? })
    }

    pub fn decomposition(&self) -> &EigenDecomposition {
        &self.eig
    }

    /// `(eigenvalue, weight)` for each merged eigenspace, ascending.
    pub fn distribution(&self, state: &StateVector) -> Result<Vec<(f64, f64)>> {
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for (lambda, v) in self.eig.eigenvalues.iter().zip(&self.eig.eigenvectors) {
            let w = v.inner(state)?.norm_sqr();
            match out.last_mut() {
                Some((sum, weight, count)) if lambda - last <= CURRENT_MERGE_TOL => {
                    *sum += lambda;
                    *weight += w;
                    *count += 1;
                }
                _ => out.push((*lambda, w, 1)),
            }
            last = *lambda;
        }
        Ok(out.into_iter().map(|(sum, w, count)| (sum / count as f64, w)).collect())
    }

    /// Projections of `state` onto positive, negative and zero current.
    fn split(&self, state: &StateVector) -> Result<[DVector<C64>; 3]> {
        let n = state.len();
        let mut parts = [DVector::zeros(n), DVector::zeros(n), DVector::zeros(n)];
        for (lambda, v) in self.eig.eigenvalues.iter().zip(&self.eig.eigenvectors) {
            let slot = if *lambda > CURRENT_MERGE_TOL {
                0
            } else if *lambda < -CURRENT_MERGE_TOL {
                1
            } else {
                2
            };
            let c = v.inner(state)?;
            parts[slot].axpy(c, v.amplitudes(), C64::new(1.0, 0.0));
        }
        Ok(parts)
    }
}

/// Current weights of `state` over the eigenspaces of `current`.
pub fn current_distribution(state: &StateVector, current: &LinearOperator) -> Result<Vec<(f64, f64)>> {
    CurrentSpectrum::new(current)?.distribution(state)
}

/// Keeps the positive- and negative-current parts of `ground`. The
/// zero-current part is dropped and reported in `excluded_weight`.
pub fn current_states_filter(
    ground: &StateVector,
    current: &LinearOperator,
    weight_floor: f64,
) -> Result<CurrentStatePair> {
    current_states_filter_with(ground, &CurrentSpectrum::new(current)?, current, weight_floor)
}

pub(crate) fn current_states_filter_with(
    ground: &StateVector,
    spectrum: &CurrentSpectrum,
    current: &LinearOperator,
    weight_floor: f64,
) -> Result<CurrentStatePair> {
    if !ground.is_normalized(1e-10) {
        return Err(Error::Contract("ground state must be normalized".into()));
    }
    let [pos, neg, zero] = spectrum.split(ground)?;
    let basis = ground.basis().clone();
    let pick = |amps: DVector<C64>, sign: &'static str| -> Result<StateVector> {
        let weight = amps.norm_squared();
        if weight < weight_floor || weight == 0.0 {
            return Err(Error::InsufficientWeight { sign, weight, floor: weight_floor });
        }
        Ok(StateVector::new(basis.clone(), amps)?.normalized()?.phase_fixed())
    };
    let excluded_weight = zero.norm_squared();
    let plus = pick(pos, "positive")?;
    let minus = pick(neg, "negative")?;
    Ok(CurrentStatePair {
        current: current.expectation(&plus)?.re,
        minus_current: current.expectation(&minus)?.re,
        plus,
        minus,
        excluded_weight,
    })
}

/// Mean per-island charge fluctuation `sqrt( (1/M) sum_j Var(n_j) )`.
pub fn charge_fluctuation(state: &StateVector) -> f64 {
    let basis = state.basis();
    let modes = basis.flavor().n_modes();
    let mut mean = vec![0.0; modes];
    let mut second = vec![0.0; modes];
    let norm = state.norm_squared();
    for (config, amp) in basis.configs().iter().zip(state.amplitudes().iter()) {
        let p = amp.norm_sqr() / norm;
        for (j, &n) in config.iter().enumerate() {
            mean[j] += p * n as f64;
            second[j] += p * (n * n) as f64;
        }
    }
    let variance: f64 = mean.iter().zip(&second).map(|(m, s)| (s - m * m).max(0.0)).sum();
    (variance / modes as f64).sqrt()
}

/// The `k` lowest levels at every frustration value, in units of `E_J`.
pub fn spectrum_vs_frustration(
    params: &FluxQubitParams,
    f_grid: &[f64],
    levels: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if f_grid.is_empty() {
        return Err(Error::Parameter("frustration grid is empty".into()));
    }
    params.validate()?;
    let basis = params.basis()?;
    f_grid
        .iter()
        .map(|&f| {
            let h = operators::hamiltonian(&params.with_f(f), &basis)?;
            let eig = eig_hermitian(&h)?;
            Ok((f, eig.eigenvalues.into_iter().take(levels).collect()))
        })
        .collect()
}

/// A diagonalized flux qubit at fixed parameters.
#[derive(Clone, Debug)]
pub struct FluxQubit {
    params: FluxQubitParams,
    basis: Arc<OccupationBasis>,
    hamiltonian: LinearOperator,
    current: LinearOperator,
    eig: EigenDecomposition,
}

impl FluxQubit {
    pub fn new(params: FluxQubitParams) -> Result<Self> {
        params.validate()?;
        let basis = params.basis()?;
        let hamiltonian = operators::hamiltonian(&params, &basis)?;
        let current = operators::current_operator(&params, &basis)?;
        let eig = eig_hermitian(&hamiltonian)?;
        Ok(Self { params, basis, hamiltonian, current, eig })
    }

    pub fn params(&self) -> &FluxQubitParams {
        &self.params
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &LinearOperator {
        &self.hamiltonian
    }

    pub fn current_operator(&self) -> &LinearOperator {
        &self.current
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn ground(&self) -> &StateVector {
        &self.eig.eigenvectors[0]
    }

    pub fn ground_energy(&self) -> f64 {
        self.eig.eigenvalues[0]
    }

    /// `E_1 - E_0`, or zero for a one-state basis.
    pub fn gap(&self) -> f64 {
        match self.eig.eigenvalues.as_slice() {
            [e0, e1, ..] => e1 - e0,
            _ => 0.0,
        }
    }

    pub fn charge_fluctuation(&self) -> f64 {
        charge_fluctuation(self.ground())
    }

    pub fn current_states(&self, method: Extraction, weight_floor: f64) -> Result<CurrentStatePair> {
        match method {
            Extraction::TwoLevel => current_states_2d(&self.eig, &self.current),
            Extraction::Filter => current_states_filter(self.ground(), &self.current, weight_floor),
        }
    }

    pub fn ground_current_distribution(&self) -> Result<Vec<(f64, f64)>> {
        current_distribution(self.ground(), &self.current)
    }
}
