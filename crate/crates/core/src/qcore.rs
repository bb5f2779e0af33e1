//! Dense 4x4 complex linear algebra and two-qubit primitives.
//!
//! States, unitaries, Hermitian matrix exponentials, the squared
//! concurrence, the magic (phased Bell) basis, and the SU(2) <-> SO(3)
//! adjoint maps used by the canonical decomposition.
//!
//! Sign convention: evolution operators are `U(t) = exp(+iHt)` throughout.
//! Most texts use `exp(-iHt)`; every downstream formula here assumes the
//! `+i` convention, so do not flip it locally.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrix by index 0..=2 -> x, y, z.
pub fn pauli(i: usize) -> [[C64; 2]; 2] {
    match i {
        0 => [[ZERO, ONE], [ONE, ZERO]],
        1 => [[ZERO, -I], [I, ZERO]],
        2 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("pauli index out of range"),
    }
}

/// Normalized pure state of two qubits, basis order |00>, |01>, |10>, |11>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState(pub [C64; 4]);

impl TwoQubitState {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let n = norm4(&amplitudes);
        if n < 1e-15 {
            return Err(Error::InvalidInput("zero-norm state".into()));
        }
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "state norm {n} deviates from 1 by more than 1e-12"
            )));
        }
        Ok(Self(amplitudes))
    }

    /// Normalizes the amplitudes instead of rejecting them.
    pub fn normalized(amplitudes: [C64; 4]) -> Result<Self> {
        let n = norm4(&amplitudes);
        if n < 1e-15 {
            return Err(Error::InvalidInput("zero-norm state".into()));
        }
        let mut a = amplitudes;
        for x in &mut a {
            *x /= n;
        }
        Ok(Self(a))
    }

    pub fn norm(&self) -> f64 {
        norm4(&self.0)
    }

    pub fn basis(k: usize) -> Self {
        let mut a = [ZERO; 4];
        a[k] = ONE;
        Self(a)
    }
}

fn norm4(a: &[C64; 4]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Tensor product of two single-qubit amplitude pairs, normalized.
pub fn product_state(left: [C64; 2], right: [C64; 2]) -> Result<TwoQubitState> {
    let nl = (left[0].norm_sqr() + left[1].norm_sqr()).sqrt();
    let nr = (right[0].norm_sqr() + right[1].norm_sqr()).sqrt();
    if nl < 1e-15 || nr < 1e-15 {
        return Err(Error::InvalidInput("zero-norm single-qubit factor".into()));
    }
    TwoQubitState::normalized([
        left[0] * right[0],
        left[0] * right[1],
        left[1] * right[0],
        left[1] * right[1],
    ])
}

/// The four named probe states used by the characterization protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeState {
    Psi1,
    Psi2,
    Psi3,
    Psi4,
}

impl ProbeState {
    /// The three probes that feed the row equations.
    pub const TRIO: [ProbeState; 3] = [ProbeState::Psi1, ProbeState::Psi2, ProbeState::Psi3];

    pub fn id(self) -> &'static str {
        match self {
            ProbeState::Psi1 => "psi1",
            ProbeState::Psi2 => "psi2",
            ProbeState::Psi3 => "psi3",
            ProbeState::Psi4 => "psi4",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "psi1" => Some(ProbeState::Psi1),
            "psi2" => Some(ProbeState::Psi2),
            "psi3" => Some(ProbeState::Psi3),
            "psi4" => Some(ProbeState::Psi4),
            _ => None,
        }
    }

    pub fn state(self) -> TwoQubitState {
        let s = match self {
            // (i|0> + |1>) (x) (|0> + i|1>) / 2
            ProbeState::Psi1 => product_state([I, ONE], [ONE, I]),
            // (|0> + |1>) (x) |1> / sqrt(2)
            ProbeState::Psi2 => product_state([ONE, ONE], [ZERO, ONE]),
            // |1> (x) (|0> + |1>) / sqrt(2)
            ProbeState::Psi3 => product_state([ZERO, ONE], [ONE, ONE]),
            // |1> (x) (|0> - i|1>) / sqrt(2)
            ProbeState::Psi4 => product_state([ZERO, ONE], [ONE, -I]),
        };
        s.expect("probe state construction cannot fail")
    }
}

/// 4x4 complex operator on two qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitOperator(pub [[C64; 4]; 4]);

impl TwoQubitOperator {
    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = ONE;
        }
        Self(m)
    }

    pub fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = self.0[c][r].conj();
            }
        }
        Self(m)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for k in 0..4 {
                let a = self.0[r][k];
                if a == ZERO {
                    continue;
                }
                for c in 0..4 {
                    m[r][c] += a * other.0[k][c];
                }
            }
        }
        Self(m)
    }

    pub fn apply(&self, s: &TwoQubitState) -> TwoQubitState {
        let mut out = [ZERO; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r] += self.0[r][c] * s.0[c];
            }
        }
        TwoQubitState(out)
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut m = self.0;
        for row in &mut m {
            for x in row.iter_mut() {
                *x *= z;
            }
        }
        Self(m)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.0;
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] += other.0[r][c];
            }
        }
        Self(m)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = self.0;
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] -= other.0[r][c];
            }
        }
        Self(m)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for r in 0..4 {
            for c in 0..4 {
                if (self.0[r][c] - self.0[c][r].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint()
            .mul(self)
            .sub(&TwoQubitOperator::identity())
            .max_abs()
            <= tol
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|k| self.0[k][k]).sum()
    }
}

/// 2x2 determinant-1 unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitUnitary(pub [[C64; 2]; 2]);

impl SingleQubitUnitary {
    pub fn new(entries: [[C64; 2]; 2]) -> Result<Self> {
        let u = Self(entries);
        if !u.is_unitary(1e-12) {
            return Err(Error::InvalidInput("matrix is not unitary".into()));
        }
        if (u.det() - ONE).norm() > 1e-12 {
            return Err(Error::InvalidInput("determinant is not 1".into()));
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn adjoint(&self) -> Self {
        Self([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn mul2(&self, other: &Self) -> Self {
        let a = &self.0;
        let b = &other.0;
        let mut m = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self(m)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.adjoint().mul2(self);
        let id = Self::identity();
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.0[r][c] - id.0[r][c]).norm());
            }
        }
        worst <= tol
    }
}

/// Kronecker product of two single-qubit operators.
pub fn kron(a: &SingleQubitUnitary, b: &SingleQubitUnitary) -> TwoQubitOperator {
    let mut m = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    TwoQubitOperator(m)
}

/// sigma_i (x) sigma_j as a two-qubit operator (i, j in 0..=2).
pub fn pauli_pair(i: usize, j: usize) -> TwoQubitOperator {
    let a = pauli(i);
    let b = pauli(j);
    let mut m = [[ZERO; 4]; 4];
    for p in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                for s in 0..2 {
                    m[2 * p + r][2 * q + s] = a[p][q] * b[r][s];
                }
            }
        }
    }
    TwoQubitOperator(m)
}

/// Squared concurrence C^2 = |<phi*| YY |phi>|^2 of a pure state.
///
/// Evaluates to |2(phi_1 phi_2 - phi_0 phi_3)|^2, which is 0 for product
/// states and 1 for Bell states.
pub fn squared_concurrence(state: &TwoQubitState) -> Result<f64> {
    let n = state.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "state norm {n} deviates from 1 by more than 1e-6"
        )));
    }
    let mut a = state.0;
    for x in &mut a {
        *x /= n;
    }
    let s = 2.0 * (a[1] * a[2] - a[0] * a[3]);
    let c2 = s.norm_sqr();
    Ok(c2.clamp(0.0, 1.0))
}

// -------------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic complex Jacobi, 4x4)
// -------------------------------------------------------------------------

/// Eigenvalues and eigenvectors of a Hermitian operator.
///
/// `vectors` holds orthonormal eigenvectors as columns; `H = V diag(w) V^dag`.
pub struct HermitianEig {
    pub values: [f64; 4],
    pub vectors: [[C64; 4]; 4],
}

/// Cyclic Jacobi sweeps; off-diagonal norm threshold 1e-14 (relative to the
/// Frobenius norm), at most 100 sweeps.
pub fn hermitian_eig(h: &TwoQubitOperator) -> Result<HermitianEig> {
    if !h.is_hermitian(1e-12) {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    let mut a = h.0;
    // Exact symmetrization so roundoff in the input cannot bias the sweep.
    for r in 0..4 {
        for c in (r + 1)..4 {
            let m = (a[r][c] + a[c][r].conj()) * 0.5;
            a[r][c] = m;
            a[c][r] = m.conj();
        }
        a[r][r] = C64::new(a[r][r].re, 0.0);
    }
    let mut v = TwoQubitOperator::identity().0;
    let fro: f64 = a
        .iter()
        .flatten()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1.0);

    for _sweep in 0..100 {
        let off: f64 = {
            let mut s = 0.0;
            for r in 0..4 {
                for c in 0..4 {
                    if r != c {
                        s += a[r][c].norm_sqr();
                    }
                }
            }
            s.sqrt()
        };
        if off <= 1e-14 * fro {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let b = a[p][q];
                let babs = b.norm();
                if babs <= 1e-300 {
                    continue;
                }
                let phase = b / babs;
                let tau = (a[p][p].re - a[q][q].re) / (2.0 * babs);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s;
                // Columns: M <- M U with U_pp = c, U_qp = s e^{-ib}, U_pq = -s e^{ib}, U_qq = c.
                for r in 0..4 {
                    let hrp = a[r][p];
                    let hrq = a[r][q];
                    a[r][p] = hrp * c + hrq * sp.conj();
                    a[r][q] = -hrp * sp + hrq * c;
                }
                // Rows: M <- U^dag M.
                for r in 0..4 {
                    let hpr = a[p][r];
                    let hqr = a[q][r];
                    a[p][r] = hpr * c + hqr * sp;
                    a[q][r] = -hpr * sp.conj() + hqr * c;
                }
                // Eigenvector accumulation: V <- V U.
                for r in 0..4 {
                    let vrp = v[r][p];
                    let vrq = v[r][q];
                    v[r][p] = vrp * c + vrq * sp.conj();
                    v[r][q] = -vrp * sp + vrq * c;
                }
            }
        }
    }

    let values = [a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re];
    Ok(HermitianEig { values, vectors: v })
}

/// U = exp(+iHt) by Hermitian eigendecomposition.
pub fn matrix_exp_i(h: &TwoQubitOperator, t: f64) -> Result<TwoQubitOperator> {
    let eig = hermitian_eig(h)?;
    let mut m = [[ZERO; 4]; 4];
    for k in 0..4 {
        let ph = C64::from_polar(1.0, eig.values[k] * t);
        for r in 0..4 {
            let vr = eig.vectors[r][k] * ph;
            for c in 0..4 {
                m[r][c] += vr * eig.vectors[c][k].conj();
            }
        }
    }
    Ok(TwoQubitOperator(m))
}

// -------------------------------------------------------------------------
// Magic basis
// -------------------------------------------------------------------------

/// The magic-basis transform Q: columns are phased Bell states.
///
/// Column order follows the eigenphase list for H_a = c1 XX + c2 YY + c3 ZZ:
/// lambda_1 = c1-c2+c3, lambda_2 = c1+c2-c3, lambda_3 = -c1-c2-c3,
/// lambda_4 = -c1+c2+c3, so the columns are Phi+, i Psi+, Psi-, i Phi-.
/// With these phases, Q^dag (u (x) v) Q is real for every pair of
/// determinant-1 single-qubit unitaries.
pub fn magic_basis() -> TwoQubitOperator {
    let r = 1.0 / 2.0_f64.sqrt();
    let h = C64::new(r, 0.0);
    let ih = C64::new(0.0, r);
    TwoQubitOperator([
        [h, ZERO, ZERO, ih],
        [ZERO, ih, h, ZERO],
        [ZERO, ih, -h, ZERO],
        [h, ZERO, ZERO, -ih],
    ])
}

/// Q^dag psi: Bell-basis coefficients of a state.
pub fn to_magic_basis(state: &TwoQubitState) -> [C64; 4] {
    let q = magic_basis();
    let mut out = [ZERO; 4];
    for k in 0..4 {
        for b in 0..4 {
            out[k] += q.0[b][k].conj() * state.0[b];
        }
    }
    out
}

// -------------------------------------------------------------------------
// SU(2) <-> SO(3)
// -------------------------------------------------------------------------

pub type Mat3 = [[f64; 3]; 3];

/// Adjoint rotation of a determinant-1 unitary: R_ij = tr(sigma_i u sigma_j u^dag)/2.
pub fn adjoint_so3(u: &SingleQubitUnitary) -> Mat3 {
    let ud = u.adjoint();
    let mut r = [[0.0; 3]; 3];
    for j in 0..3 {
        // u sigma_j u^dag
        let sj = pauli(j);
        let mut m = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[a][b] += u.0[a][k] * sj[k][l] * ud.0[l][b];
                    }
                }
            }
        }
        for (i, row) in r.iter_mut().enumerate() {
            let si = pauli(i);
            let mut tr = ZERO;
            for a in 0..2 {
                for b in 0..2 {
                    tr += si[a][b] * m[b][a];
                }
            }
            row[j] = 0.5 * tr.re;
        }
    }
    r
}

fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            for k in 0..3 {
                m[r][c] += a[r][k] * b[k][c];
            }
        }
    }
    m
}

fn mat3_transpose(a: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = a[c][r];
        }
    }
    m
}

pub fn mat3_det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Largest entrywise deviation of R^T R from the identity.
pub fn so3_defect(r: &Mat3) -> f64 {
    let p = mat3_mul(&mat3_transpose(r), r);
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[i][j] - want).abs());
        }
    }
    worst
}

/// Deterministic inverse of the adjoint map.
///
/// Returns the lift u with `adjoint_so3(u) = R`; of the two lifts +-u it
/// picks the one whose first nonzero quaternion component is positive.
pub fn su2_from_so3(r: &Mat3) -> Result<SingleQubitUnitary> {
    if so3_defect(r) > 1e-8 || (mat3_det(r) - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(
            "matrix is not special orthogonal within 1e-8".into(),
        ));
    }
    // Shepperd quaternion extraction, branch chosen for numerical safety.
    let tr = r[0][0] + r[1][1] + r[2][2];
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (1.0 + tr).sqrt() * 2.0;
        w = 0.25 * s;
        x = (r[2][1] - r[1][2]) / s;
        y = (r[0][2] - r[2][0]) / s;
        z = (r[1][0] - r[0][1]) / s;
    } else if r[0][0] >= r[1][1] && r[0][0] >= r[2][2] {
        let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt() * 2.0;
        w = (r[2][1] - r[1][2]) / s;
        x = 0.25 * s;
        y = (r[0][1] + r[1][0]) / s;
        z = (r[0][2] + r[2][0]) / s;
    } else if r[1][1] >= r[2][2] {
        let s = (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt() * 2.0;
        w = (r[0][2] - r[2][0]) / s;
        x = (r[0][1] + r[1][0]) / s;
        y = 0.25 * s;
        z = (r[1][2] + r[2][1]) / s;
    } else {
        let s = (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt() * 2.0;
        w = (r[1][0] - r[0][1]) / s;
        x = (r[0][2] + r[2][0]) / s;
        y = (r[1][2] + r[2][1]) / s;
        z = 0.25 * s;
    }
    let mut q = [w, x, y, z];
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut q {
        *v /= n;
    }
    // Sign rule: first component with magnitude above 1e-12 must be positive.
    let flip = q
        .iter()
        .find(|v| v.abs() > 1e-12)
        .map(|v| *v < 0.0)
        .unwrap_or(false);
    if flip {
        for v in &mut q {
            *v = -*v;
        }
    }
    let [w, x, y, z] = q;
    // u = w I - i (x sx + y sy + z sz)
    let u = SingleQubitUnitary([
        [C64::new(w, -z), C64::new(-y, -x)],
        [C64::new(y, -x), C64::new(w, z)],
    ]);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell_phi_plus() -> TwoQubitState {
        let r = 1.0 / 2.0_f64.sqrt();
        TwoQubitState([c(r, 0.0), ZERO, ZERO, c(r, 0.0)]).clone()
    }

    fn rng_unitary(seed: &mut u64) -> SingleQubitUnitary {
        // Random SU(2) via a uniformly-drawn quaternion (splitmix stream).
        let mut draw = || {
            *seed = seed.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = *seed;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        loop {
            let q = [draw(), draw(), draw(), draw()];
            let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n < 1e-3 || n > 1.0 {
                continue;
            }
            let [w, x, y, z] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
            return SingleQubitUnitary([
                [c(w, -z), c(-y, -x)],
                [c(y, -x), c(w, z)],
            ]);
        }
    }

    fn rng_state(seed: &mut u64) -> TwoQubitState {
        let mut draw = || {
            *seed = seed.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = *seed;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let a = [
            c(draw(), draw()),
            c(draw(), draw()),
            c(draw(), draw()),
            c(draw(), draw()),
        ];
        TwoQubitState::normalized(a).unwrap()
    }

    #[test]
    fn product_state_basis_tensor() {
        let s = product_state([ONE, ZERO], [ONE, ZERO]).unwrap();
        assert_eq!(s.0, [ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn product_state_psi2() {
        let s = ProbeState::Psi2.state();
        let r = 1.0 / 2.0_f64.sqrt();
        assert!((s.0[1] - c(r, 0.0)).norm() < 1e-15);
        assert!((s.0[3] - c(r, 0.0)).norm() < 1e-15);
        assert!(s.0[0].norm() < 1e-15 && s.0[2].norm() < 1e-15);
    }

    #[test]
    fn product_state_unnormalized_input_normalizes() {
        let s = product_state([I, ONE], [ONE, I]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert_eq!(s.0, ProbeState::Psi1.state().0);
    }

    #[test]
    fn product_state_zero_factor_rejected() {
        assert!(product_state([ZERO, ZERO], [ONE, ZERO]).is_err());
    }

    #[test]
    fn concurrence_of_bell_state_is_one() {
        assert!((squared_concurrence(&bell_phi_plus()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn concurrence_of_basis_state_is_zero() {
        assert!(squared_concurrence(&TwoQubitState::basis(0)).unwrap() < 1e-15);
    }

    #[test]
    fn concurrence_rejects_unnormalized() {
        let s = TwoQubitState([c(0.5, 0.0), ZERO, ZERO, ZERO]);
        assert!(squared_concurrence(&s).is_err());
    }

    #[test]
    fn concurrence_of_product_states_vanishes() {
        let mut seed = 11u64;
        for _ in 0..50 {
            let mut draw = || {
                seed = seed.wrapping_add(0x9E3779B97F4A7C15);
                let z = seed as f64 / u64::MAX as f64;
                z * 2.0 - 1.0
            };
            let l = [c(draw(), draw()), c(draw(), draw())];
            let r = [c(draw(), draw()), c(draw(), draw())];
            if (l[0].norm_sqr() + l[1].norm_sqr()) < 1e-3 {
                continue;
            }
            if (r[0].norm_sqr() + r[1].norm_sqr()) < 1e-3 {
                continue;
            }
            let s = product_state(l, r).unwrap();
            assert!(squared_concurrence(&s).unwrap() < 1e-12);
        }
    }

    #[test]
    fn concurrence_invariant_under_local_unitaries() {
        let mut seed = 5u64;
        for _ in 0..200 {
            let u = rng_unitary(&mut seed);
            let v = rng_unitary(&mut seed);
            let s = rng_state(&mut seed);
            let rotated = kron(&u, &v).apply(&s);
            let a = squared_concurrence(&s).unwrap();
            let b = squared_concurrence(&rotated).unwrap();
            assert!((a - b).abs() < 1e-10, "violation {}", (a - b).abs());
        }
    }

    #[test]
    fn exp_at_zero_time_is_identity() {
        let h = pauli_pair(0, 1).add(&pauli_pair(2, 2).scale(c(0.7, 0.0)));
        let u = matrix_exp_i(&h, 0.0).unwrap();
        assert!(u.sub(&TwoQubitOperator::identity()).max_abs() < 1e-12);
    }

    #[test]
    fn exp_of_zz_is_diagonal_phases() {
        let h = pauli_pair(2, 2);
        let t = 0.37;
        let u = matrix_exp_i(&h, t).unwrap();
        let want = [t, -t, -t, t];
        for k in 0..4 {
            assert!((u.0[k][k] - C64::from_polar(1.0, want[k])).norm() < 1e-12);
            for l in 0..4 {
                if l != k {
                    assert!(u.0[k][l].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exp_is_unitary_and_a_one_parameter_group() {
        let mut h = TwoQubitOperator::zero();
        let coeffs = [
            [0.9, 0.1, -0.2],
            [0.05, 1.1, 0.3],
            [-0.4, 0.2, 0.75],
        ];
        for i in 0..3 {
            for j in 0..3 {
                h = h.add(&pauli_pair(i, j).scale(c(coeffs[i][j], 0.0)));
            }
        }
        let (s, t) = (0.31, 1.7);
        let us = matrix_exp_i(&h, s).unwrap();
        let ut = matrix_exp_i(&h, t).unwrap();
        let ust = matrix_exp_i(&h, s + t).unwrap();
        assert!(us.is_unitary(1e-10));
        assert!(us.mul(&ut).sub(&ust).max_abs() < 1e-10);
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let mut m = TwoQubitOperator::identity();
        m.0[0][1] = c(1.0, 0.0);
        assert!(matrix_exp_i(&m, 1.0).is_err());
    }

    #[test]
    fn magic_basis_is_unitary() {
        let q = magic_basis();
        assert!(q.adjoint().mul(&q).sub(&TwoQubitOperator::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn magic_basis_first_column_is_phi_plus() {
        let q = magic_basis();
        let r = 1.0 / 2.0_f64.sqrt();
        assert!((q.0[0][0] - c(r, 0.0)).norm() < 1e-15);
        assert!((q.0[3][0] - c(r, 0.0)).norm() < 1e-15);
        assert!(q.0[1][0].norm() < 1e-15 && q.0[2][0].norm() < 1e-15);
    }

    #[test]
    fn magic_basis_realness_pins_the_phases() {
        let q = magic_basis();
        let mut seed = 42u64;
        let mut worst_im = 0.0_f64;
        for _ in 0..1000 {
            let u = rng_unitary(&mut seed);
            let v = rng_unitary(&mut seed);
            let m = q.adjoint().mul(&kron(&u, &v)).mul(&q);
            for row in &m.0 {
                for x in row {
                    worst_im = worst_im.max(x.im.abs());
                }
            }
        }
        assert!(worst_im < 1e-12, "max imaginary part {worst_im}");
    }

    #[test]
    fn magic_basis_eigenphase_order() {
        let mut seed = 7u64;
        for _ in 0..20 {
            let mut draw = || {
                seed = seed.wrapping_add(0x9E3779B97F4A7C15);
                (seed as f64 / u64::MAX as f64) * 2.0 - 1.0
            };
            let (c1, c2, c3) = (draw(), draw(), draw());
            let ha = pauli_pair(0, 0)
                .scale(c(c1, 0.0))
                .add(&pauli_pair(1, 1).scale(c(c2, 0.0)))
                .add(&pauli_pair(2, 2).scale(c(c3, 0.0)));
            let t = 0.83;
            let u = matrix_exp_i(&ha, t).unwrap();
            let q = magic_basis();
            let f = q.adjoint().mul(&u).mul(&q);
            let lam = [c1 - c2 + c3, c1 + c2 - c3, -c1 - c2 - c3, -c1 + c2 + c3];
            for k in 0..4 {
                assert!((f.0[k][k] - C64::from_polar(1.0, lam[k] * t)).norm() < 1e-10);
                for l in 0..4 {
                    if l != k {
                        assert!(f.0[k][l].norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        let r = adjoint_so3(&SingleQubitUnitary::identity());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((r[i][j] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn adjoint_of_z_exponential_is_z_rotation() {
        let th = 0.6;
        let u = SingleQubitUnitary([
            [C64::from_polar(1.0, -th / 2.0), ZERO],
            [ZERO, C64::from_polar(1.0, th / 2.0)],
        ]);
        let r = adjoint_so3(&u);
        let want = [
            [th.cos(), -th.sin(), 0.0],
            [th.sin(), th.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[i][j] - want[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_lands_in_so3() {
        let mut seed = 91u64;
        for _ in 0..100 {
            let u = rng_unitary(&mut seed);
            let r = adjoint_so3(&u);
            assert!(so3_defect(&r) < 1e-12);
            assert!((mat3_det(&r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn su2_lift_round_trip_is_plus_minus_u() {
        let mut seed = 123u64;
        for _ in 0..100 {
            let u = rng_unitary(&mut seed);
            let r = adjoint_so3(&u);
            let w = su2_from_so3(&r).unwrap();
            let mut dplus = 0.0_f64;
            let mut dminus = 0.0_f64;
            for a in 0..2 {
                for b in 0..2 {
                    dplus = dplus.max((w.0[a][b] - u.0[a][b]).norm());
                    dminus = dminus.max((w.0[a][b] + u.0[a][b]).norm());
                }
            }
            assert!(dplus < 1e-8 || dminus < 1e-8);
            let rr = adjoint_so3(&w);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((rr[i][j] - r[i][j]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn su2_lift_of_identity_with_sign_rule() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let u = su2_from_so3(&id).unwrap();
        assert!((u.0[0][0] - ONE).norm() < 1e-12);
        assert!((u.0[1][1] - ONE).norm() < 1e-12);
    }

    #[test]
    fn su2_lift_of_pi_z_rotation() {
        let r = [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        let u = su2_from_so3(&r).unwrap();
        // exp(-i pi sz / 2) = diag(e^{-i pi/2}, e^{i pi/2}) up to overall sign
        let a = u.0[0][0];
        let b = u.0[1][1];
        assert!(u.0[0][1].norm() < 1e-12 && u.0[1][0].norm() < 1e-12);
        assert!((a - c(0.0, -1.0)).norm() < 1e-12 || (a - c(0.0, 1.0)).norm() < 1e-12);
        assert!((a + b).norm() < 1e-12);
    }

    #[test]
    fn su2_lift_rejects_non_orthogonal() {
        let r = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(su2_from_so3(&r).is_err());
    }

    #[test]
    fn concurrence_of_phased_bell_states_is_one() {
        let q = magic_basis();
        for k in 0..4 {
            let col = TwoQubitState([q.0[0][k], q.0[1][k], q.0[2][k], q.0[3][k]]);
            assert!((squared_concurrence(&col).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
