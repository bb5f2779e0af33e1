// Development probe: candidate predictions under the y-reflected coupling
// convention (d -> S d S, S = diag(-1,1,-1)).

use hamchar_core::model::*;
use hamchar_core::qcore::{self, ProbeState};

fn conj_coupling(d: &CouplingMatrix) -> CouplingMatrix {
    let s = [-1.0, 1.0, -1.0];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = s[i] * s[j] * d.0[i][j];
        }
    }
    CouplingMatrix(m)
}

fn main() {
    let params = SpinOrbitParams {
        j: 1.0,
        beta: [0.01, 0.005, 0.02],
        gamma: [0.003, 0.005, 0.001, 0.0015, 0.0024, 0.0009],
    };
    let d_naive = spin_orbit_to_coupling(&params);
    let d = conj_coupling(&d_naive);
    let (class, frame) = canonical_decompose(&d).unwrap();

    // Truth predictions.
    let h = d.operator();
    let u1 = qcore::matrix_exp_i(&h, 1.0).unwrap();
    let u05 = qcore::matrix_exp_i(&h, 0.5).unwrap();
    println!("truth (reflected convention):");
    for probe in ProbeState::TRIO {
        println!(
            "  t=1 {} -> {:.6}",
            probe.id(),
            qcore::squared_concurrence(&u1.apply(&probe.state())).unwrap()
        );
    }
    println!(
        "  t=0.5 psi4 -> {:.6}",
        qcore::squared_concurrence(&u05.apply(&ProbeState::Psi4.state())).unwrap()
    );

    // Moduli/heights sanity (Table I should still hold, x 2pi).
    let l2 = bell_coefficients(&frame.kq, &ProbeState::Psi2.state());
    let q: Vec<f64> = l2.iter().map(|z| z.norm().powi(4)).collect();
    println!(
        "state-2 heights x100x2pi: w13={:.3} w14={:.3} w34={:.3}",
        100.0 * 2.0 * std::f64::consts::PI * q[0] * q[2],
        100.0 * 2.0 * std::f64::consts::PI * q[0] * q[3],
        100.0 * 2.0 * std::f64::consts::PI * q[2] * q[3],
    );

    // Candidate family: exact moduli -> mu -> rows -> assembly.
    let mut moduli = [[0.0f64; 4]; 3];
    for (k, probe) in ProbeState::TRIO.iter().enumerate() {
        let l = bell_coefficients(&frame.kq, &probe.state());
        for i in 0..4 {
            moduli[k][i] = l[i].norm();
        }
    }
    let mut row_lists: Vec<Vec<[f64; 4]>> = Vec::new();
    for r in 0..4 {
        let sq = [
            moduli[0][r] * moduli[0][r],
            moduli[1][r] * moduli[1][r],
            moduli[2][r] * moduli[2][r],
        ];
        let mu = [
            sq[0] - sq[1] + sq[2],
            sq[0] + sq[1] - sq[2],
            -sq[0] + sq[1] + sq[2],
            1.0 - sq[0] - sq[1] - sq[2],
        ];
        let us: Vec<f64> = mu.iter().map(|m| (2.0 * m.max(0.0)).sqrt()).collect();
        let mut list: Vec<[f64; 4]> = Vec::new();
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                for s3 in [1.0, -1.0] {
                    for s4 in [1.0, -1.0] {
                        let b1 = (s2 * us[1] + s1 * us[0]) / 2.0;
                        let b3 = (s2 * us[1] - s1 * us[0]) / 2.0;
                        let b2 = (s4 * us[3] + s3 * us[2]) / 2.0;
                        let b4 = (s4 * us[3] - s3 * us[2]) / 2.0;
                        let cand = [b1, b2, b3, b4];
                        if !list.iter().any(|e| {
                            e.iter()
                                .zip(&cand)
                                .map(|(a, b)| (a - b).abs())
                                .fold(0.0f64, f64::max)
                                < 1e-9
                        }) {
                            list.push(cand);
                        }
                    }
                }
            }
        }
        row_lists.push(list);
    }
    let tol = 1e-6;
    let dot = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut survivors: Vec<[[f64; 4]; 4]> = Vec::new();
    for r0 in &row_lists[0] {
        for r1 in &row_lists[1] {
            if dot(r0, r1).abs() > tol {
                continue;
            }
            for r2 in &row_lists[2] {
                if dot(r0, r2).abs() > tol || dot(r1, r2).abs() > tol {
                    continue;
                }
                for r3 in &row_lists[3] {
                    if dot(r0, r3).abs() > tol
                        || dot(r1, r3).abs() > tol
                        || dot(r2, r3).abs() > tol
                    {
                        continue;
                    }
                    let kq = [*r0, *r1, *r2, *r3];
                    if (det4(&kq) - 1.0).abs() < 0.5 {
                        survivors.push(kq);
                    }
                }
            }
        }
    }
    let mut reps: Vec<CouplingMatrix> = Vec::new();
    for kq in &survivors {
        let cand = coupling_from_kq(kq, &class).unwrap();
        if !reps.iter().any(|r| r.max_abs_diff(&cand) < 1e-6) {
            reps.push(cand);
        }
    }
    println!(
        "survivors {}  distinct {}",
        survivors.len(),
        reps.len()
    );
    for (idx, rep) in reps.iter().enumerate() {
        let hh = rep.operator();
        let v1 = qcore::matrix_exp_i(&hh, 1.0).unwrap();
        let v05 = qcore::matrix_exp_i(&hh, 0.5).unwrap();
        let p: Vec<f64> = ProbeState::TRIO
            .iter()
            .map(|pr| qcore::squared_concurrence(&v1.apply(&pr.state())).unwrap())
            .collect();
        let p4 = qcore::squared_concurrence(&v05.apply(&ProbeState::Psi4.state())).unwrap();
        // spin-orbit view in the reflected convention
        let so = coupling_to_spin_orbit(&conj_coupling(rep), 1.0).unwrap();
        println!(
            "H{} t=1 [{:.5} {:.5} {:.5}] psi4@0.5 {:.5}  beta=[{:+.4} {:+.4} {:+.4}] gxx={:+.4}",
            idx + 1, p[0], p[1], p[2], p4, so.beta[0], so.beta[1], so.beta[2], so.gamma[0]
        );
    }
}
