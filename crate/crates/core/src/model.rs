//! Hamiltonian representations and the forward canonical-decomposition
//! oracle.
//!
//! A fully-nonlocal two-qubit Hamiltonian H = sum_ij d_ij sigma_i (x) sigma_j
//! is described interchangeably by its coupling matrix `d`, by spin-orbit
//! parameters (J, beta, Gamma), or by a canonical class [c1,c2,c3] plus a
//! local frame K with H = K^dag H_a K, H_a = c1 XX + c2 YY + c3 ZZ.
//!
//! Spin operators in the spin-orbit form are the Pauli matrices themselves
//! (not sigma/2); this is the only normalization consistent with the
//! expected canonical coefficients near 1 for J = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    self, kron, magic_basis, pauli_pair, su2_from_so3, C64, Mat3, SingleQubitUnitary,
    TwoQubitOperator, TwoQubitState,
};

/// Exchange scale J, Dzyaloshinskii-Moriya vector beta, and symmetric
/// anisotropy tensor Gamma stored as (xx, yy, zz, xy, xz, yz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinOrbitParams {
    pub j: f64,
    pub beta: [f64; 3],
    pub gamma: [f64; 6],
}

impl SpinOrbitParams {
    pub fn gamma_matrix(&self) -> Mat3 {
        let [xx, yy, zz, xy, xz, yz] = self.gamma;
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
    }
}

/// Real 3x3 coupling matrix: d_ij multiplies sigma_i (x) sigma_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix(pub Mat3);

impl CouplingMatrix {
    pub fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn det(&self) -> f64 {
        qcore::mat3_det(&self.0)
    }

    /// The 4x4 Hermitian operator sum_ij d_ij sigma_i (x) sigma_j.
    pub fn operator(&self) -> TwoQubitOperator {
        let mut h = TwoQubitOperator::zero();
        for i in 0..3 {
            for j in 0..3 {
                if self.0[i][j] != 0.0 {
                    h = h.add(&pauli_pair(i, j).scale(C64::new(self.0[i][j], 0.0)));
                }
            }
        }
        h
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

/// Ordered canonical coefficients c1 >= c2 >= c3 >= 0 and the sign of
/// det(d). When the determinant is negative the canonical form is reached
/// only with c3 negated; the class keeps c3 >= 0 and records the sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalClass {
    pub c: [f64; 3],
    pub det_sign: f64,
}

impl CanonicalClass {
    pub fn new(c: [f64; 3], det_sign: f64) -> Self {
        Self { c, det_sign }
    }

    /// Canonical values with det_sign folded into c3.
    pub fn signed_c(&self) -> [f64; 3] {
        [self.c[0], self.c[1], self.c[2] * self.det_sign]
    }

    /// Eigenphases of H_a in the magic basis, ordered to match the basis
    /// columns: c1-c2+c3, c1+c2-c3, -c1-c2-c3, -c1+c2+c3.
    pub fn lambdas(&self) -> [f64; 4] {
        let [c1, c2, c3] = self.signed_c();
        [c1 - c2 + c3, c1 + c2 - c3, -c1 - c2 - c3, -c1 + c2 + c3]
    }
}

/// Local rotation data: K = u1 (x) u2 together with its real orthogonal
/// magic-basis image K_Q = Q^dag K Q.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub u1: SingleQubitUnitary,
    pub u2: SingleQubitUnitary,
    pub kq: [[f64; 4]; 4],
}

impl LocalFrame {
    pub fn identity() -> Self {
        let mut kq = [[0.0; 4]; 4];
        for (k, row) in kq.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        Self {
            u1: SingleQubitUnitary::identity(),
            u2: SingleQubitUnitary::identity(),
            kq,
        }
    }

    pub fn operator(&self) -> TwoQubitOperator {
        kron(&self.u1, &self.u2)
    }

    /// Largest deviation of kq from SO(4) membership (orthonormality and
    /// unit determinant).
    pub fn so4_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let mut dot = 0.0;
                for k in 0..4 {
                    dot += self.kq[k][i] * self.kq[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst.max((det4(&self.kq) - 1.0).abs())
    }
}

pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    // Expansion by LU with partial pivoting; 4x4 only.
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..4 {
        let mut piv = col;
        for r in (col + 1)..4 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in (col + 1)..4 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// d = J S (I + A + Gamma) S with A_jk = sum_i beta_i eps_ijk and
/// S = diag(-1, 1, -1).
///
/// The S-conjugation is a half-turn of the local axes about y. Concurrence
/// records of real-amplitude probe states cannot distinguish the two
/// orientations; the complex probes used for disambiguation can, and they
/// fix this one. `coupling_to_spin_orbit` is the exact inverse.
pub fn spin_orbit_to_coupling(p: &SpinOrbitParams) -> CouplingMatrix {
    let g = p.gamma_matrix();
    let [b1, b2, b3] = p.beta;
    let a = [[0.0, b3, -b2], [-b3, 0.0, b1], [b2, -b1, 0.0]];
    let s = [-1.0, 1.0, -1.0];
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            d[i][j] = p.j * s[i] * s[j] * (id + a[i][j] + g[i][j]);
        }
    }
    CouplingMatrix(d)
}

/// Exact inverse of `spin_orbit_to_coupling` given J.
pub fn coupling_to_spin_orbit(d: &CouplingMatrix, j: f64) -> Result<SpinOrbitParams> {
    if j == 0.0 || !j.is_finite() {
        return Err(Error::InvalidInput("J must be nonzero and finite".into()));
    }
    let sgn = [-1.0, 1.0, -1.0];
    let m = |i: usize, k: usize| sgn[i] * sgn[k] * d.0[i][k] / j;
    let s = |i: usize, k: usize| (m(i, k) + m(k, i)) / 2.0;
    let a = |i: usize, k: usize| (m(i, k) - m(k, i)) / 2.0;
    let gamma = [
        s(0, 0) - 1.0,
        s(1, 1) - 1.0,
        s(2, 2) - 1.0,
        s(0, 1),
        s(0, 2),
        s(1, 2),
    ];
    let beta = [a(1, 2), a(2, 0), a(0, 1)];
    Ok(SpinOrbitParams { j, beta, gamma })
}

// -------------------------------------------------------------------------
// Canonical decomposition
// -------------------------------------------------------------------------

/// Symmetric 3x3 Jacobi eigendecomposition; returns (values, vectors as columns).
fn jacobi_sym3(m: &Mat3) -> ([f64; 3], Mat3) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale: f64 = a
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    for _ in 0..100 {
        let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..2 {
            for q in (p + 1)..3 {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for r in 0..3 {
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for cidx in 0..3 {
                    let (apr, aqr) = (a[p][cidx], a[q][cidx]);
                    a[p][cidx] = c * apr - s * aqr;
                    a[q][cidx] = s * apr + c * aqr;
                }
                for r in 0..3 {
                    let (vrp, vrq) = (v[r][p], v[r][q]);
                    v[r][p] = c * vrp - s * vrq;
                    v[r][q] = s * vrp + c * vrq;
                }
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Canonical decomposition d = R1^T diag(c1, c2, +-c3) R2 with R1, R2 in
/// SO(3), lifted to a local frame K = u1 (x) u2 with H = K^dag H_a K.
///
/// Requires d nonsingular with canonical values pairwise distinct by at
/// least 1e-9 (degenerate classes take a different recovery route and are
/// rejected).
pub fn canonical_decompose(d: &CouplingMatrix) -> Result<(CanonicalClass, LocalFrame)> {
    let m = &d.0;
    // Eigenvectors of d^T d give the right singular directions.
    let mut dtd = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                dtd[i][j] += m[k][i] * m[k][j];
            }
        }
    }
    let (vals, vecs) = jacobi_sym3(&dtd);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| vals[y].partial_cmp(&vals[x]).unwrap());
    let mut sigma = [0.0; 3];
    let mut vmat = [[0.0; 3]; 3];
    for (slot, &src) in order.iter().enumerate() {
        sigma[slot] = vals[src].max(0.0).sqrt();
        for r in 0..3 {
            vmat[r][slot] = vecs[r][src];
        }
    }
    if sigma[2] <= 1e-12 * sigma[0].max(1.0) {
        return Err(Error::InvalidInput("coupling matrix is singular".into()));
    }
    if sigma[0] - sigma[1] < 1e-9 || sigma[1] - sigma[2] < 1e-9 {
        return Err(Error::DegenerateClass(format!(
            "canonical values [{:.6}, {:.6}, {:.6}] are not separated by 1e-9",
            sigma[0], sigma[1], sigma[2]
        )));
    }
    if qcore::mat3_det(&vmat) < 0.0 {
        for row in &mut vmat {
            row[2] = -row[2];
        }
    }
    // Left singular vectors: U = d V Sigma^-1.
    let mut umat = [[0.0; 3]; 3];
    for col in 0..3 {
        for r in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += m[r][k] * vmat[k][col];
            }
            umat[r][col] = s / sigma[col];
        }
    }
    let det_d = d.det();
    let det_sign = if det_d >= 0.0 { 1.0 } else { -1.0 };
    if det_sign < 0.0 {
        // Transfer the irreducible sign into the reported class, keeping
        // U special orthogonal.
        for row in &mut umat {
            row[2] = -row[2];
        }
    }
    orthonormalize_columns(&mut umat);
    orthonormalize_columns(&mut vmat);

    let r1 = transpose3(&umat);
    let r2 = transpose3(&vmat);
    let u1 = su2_from_so3(&r1)?;
    let u2 = su2_from_so3(&r2)?;
    let kq = kq_from_locals(&u1, &u2);
    Ok((
        CanonicalClass::new(sigma, det_sign),
        LocalFrame { u1, u2, kq },
    ))
}

fn transpose3(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            t[r][c] = m[c][r];
        }
    }
    t
}

fn orthonormalize_columns(m: &mut Mat3) {
    for col in 0..3 {
        for prev in 0..col {
            let mut dot = 0.0;
            for r in 0..3 {
                dot += m[r][col] * m[r][prev];
            }
            for r in 0..3 {
                m[r][col] -= dot * m[r][prev];
            }
        }
        let n = (0..3).map(|r| m[r][col] * m[r][col]).sum::<f64>().sqrt();
        for r in 0..3 {
            m[r][col] /= n;
        }
    }
}

/// Real magic-basis image of u1 (x) u2.
pub fn kq_from_locals(u1: &SingleQubitUnitary, u2: &SingleQubitUnitary) -> [[f64; 4]; 4] {
    let q = magic_basis();
    let m = q.adjoint().mul(&kron(u1, u2)).mul(&q);
    let mut kq = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            kq[r][c] = m.0[r][c].re;
        }
    }
    kq
}

/// H = K^dag H_a K projected back onto the Pauli-product basis.
///
/// Fails if the projection leaves a non-negligible identity or
/// single-qubit component (which would mean the frame is inconsistent).
pub fn hamiltonian_from_class(class: &CanonicalClass, frame: &LocalFrame) -> Result<CouplingMatrix> {
    let [c1, c2, c3] = class.signed_c();
    let ha = pauli_pair(0, 0)
        .scale(C64::new(c1, 0.0))
        .add(&pauli_pair(1, 1).scale(C64::new(c2, 0.0)))
        .add(&pauli_pair(2, 2).scale(C64::new(c3, 0.0)));
    let k = frame.operator();
    let h = k.adjoint().mul(&ha).mul(&k);
    project_coupling(&h)
}

/// Same reconstruction through the SO(4) image: H = Q (kq^T Lambda kq) Q^dag.
pub fn coupling_from_kq(kq: &[[f64; 4]; 4], class: &CanonicalClass) -> Result<CouplingMatrix> {
    let lam = class.lambdas();
    let mut hq = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += kq[k][r] * lam[k] * kq[k][c];
            }
            hq[r][c] = s;
        }
    }
    let q = magic_basis();
    let mut hq_c = TwoQubitOperator::zero();
    for r in 0..4 {
        for c in 0..4 {
            hq_c.0[r][c] = C64::new(hq[r][c], 0.0);
        }
    }
    let h = q.mul(&hq_c).mul(&q.adjoint());
    project_coupling(&h)
}

/// Project a Hermitian operator onto sum_ij d_ij sigma_i (x) sigma_j and
/// verify the identity / single-qubit components vanish.
pub fn project_coupling(h: &TwoQubitOperator) -> Result<CouplingMatrix> {
    let scale = h.max_abs().max(1.0);
    let tr = h.trace().norm() / 4.0;
    if tr > 1e-8 * scale {
        return Err(Error::Inconsistency(format!(
            "identity component {tr:.2e} in nominally traceless Hamiltonian"
        )));
    }
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let op = pauli_pair(i, j);
            let mut t = C64::new(0.0, 0.0);
            for a in 0..4 {
                for b in 0..4 {
                    t += op.0[a][b] * h.0[b][a];
                }
            }
            d[i][j] = t.re / 4.0;
        }
    }
    // Single-qubit components sigma_i (x) I and I (x) sigma_j must vanish.
    for i in 0..3 {
        let si = qcore::pauli(i);
        let mut left = C64::new(0.0, 0.0);
        let mut right = C64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..2 {
                    left += si[a][b] * h.0[2 * b + k][2 * a + k];
                    right += si[a][b] * h.0[2 * k + b][2 * k + a];
                }
            }
        }
        if left.norm() / 4.0 > 1e-8 * scale || right.norm() / 4.0 > 1e-8 * scale {
            return Err(Error::Inconsistency(
                "nonzero single-qubit component in reconstructed Hamiltonian".into(),
            ));
        }
    }
    Ok(CouplingMatrix(d))
}

// -------------------------------------------------------------------------
// Spectral frequencies
// -------------------------------------------------------------------------

/// Labels for the six non-DC spectral peaks omega_ij = 2(lambda_i - lambda_j).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeakLabel {
    W12,
    W13,
    W14,
    W23,
    W24,
    W34,
}

impl PeakLabel {
    pub const ALL: [PeakLabel; 6] = [
        PeakLabel::W12,
        PeakLabel::W13,
        PeakLabel::W14,
        PeakLabel::W23,
        PeakLabel::W24,
        PeakLabel::W34,
    ];

    pub fn index(self) -> usize {
        match self {
            PeakLabel::W12 => 0,
            PeakLabel::W13 => 1,
            PeakLabel::W14 => 2,
            PeakLabel::W23 => 3,
            PeakLabel::W24 => 4,
            PeakLabel::W34 => 5,
        }
    }

    /// Modulus pair (i, j) feeding this peak's height |l_i|^4 |l_j|^4,
    /// 0-indexed.
    pub fn pair(self) -> (usize, usize) {
        match self {
            PeakLabel::W12 => (0, 1),
            PeakLabel::W13 => (0, 2),
            PeakLabel::W14 => (0, 3),
            PeakLabel::W23 => (1, 2),
            PeakLabel::W24 => (1, 3),
            PeakLabel::W34 => (2, 3),
        }
    }

    /// Coefficients a with omega = 4 (a . [c1, c2, c3]), all non-negative
    /// under the ordering c1 >= c2 >= c3 >= 0.
    pub fn coeffs(self) -> [f64; 3] {
        match self {
            PeakLabel::W12 => [0.0, 1.0, -1.0],
            PeakLabel::W13 => [1.0, 0.0, 1.0],
            PeakLabel::W14 => [1.0, -1.0, 0.0],
            PeakLabel::W23 => [1.0, 1.0, 0.0],
            PeakLabel::W24 => [1.0, 0.0, -1.0],
            PeakLabel::W34 => [0.0, 1.0, 1.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PeakLabel::W12 => "w12",
            PeakLabel::W13 => "w13",
            PeakLabel::W14 => "w14",
            PeakLabel::W23 => "w23",
            PeakLabel::W24 => "w24",
            PeakLabel::W34 => "w34",
        }
    }
}

/// All six labeled peak frequencies of a canonical class, indexed by
/// `PeakLabel::index`.
pub fn predicted_frequencies(class: &CanonicalClass) -> [f64; 6] {
    let mut out = [0.0; 6];
    for label in PeakLabel::ALL {
        let a = label.coeffs();
        out[label.index()] =
            4.0 * (a[0] * class.c[0] + a[1] * class.c[1] + a[2] * class.c[2]).abs();
    }
    out
}

// -------------------------------------------------------------------------
// Bell coefficients and the closed-form concurrence signal
// -------------------------------------------------------------------------

/// Rotated Bell coefficients l = K_Q Q^dag psi0.
pub fn bell_coefficients(kq: &[[f64; 4]; 4], state: &TwoQubitState) -> [C64; 4] {
    let v = qcore::to_magic_basis(state);
    let mut l = [C64::new(0.0, 0.0); 4];
    for r in 0..4 {
        for c in 0..4 {
            l[r] += C64::new(kq[r][c], 0.0) * v[c];
        }
    }
    l
}

/// C^2(t) = |sum_i exp(2 i lambda_i t) l_i^2|^2.
pub fn analytic_c2(l: &[C64; 4], lambdas: &[f64; 4], t: f64) -> f64 {
    let mut s = C64::new(0.0, 0.0);
    for k in 0..4 {
        s += C64::from_polar(1.0, 2.0 * lambdas[k] * t) * (l[k] * l[k]);
    }
    s.norm_sqr()
}
