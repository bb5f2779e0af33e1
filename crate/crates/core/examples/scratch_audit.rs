// Development probe: candidate enumeration structure for the reference
// trial Hamiltonian. Not part of the deliverable surface.

use hamchar_core::model::*;
use hamchar_core::qcore::{self, ProbeState};

fn main() {
    let params = SpinOrbitParams {
        j: 1.0,
        beta: [0.01, 0.005, 0.02],
        gamma: [0.003, 0.005, 0.001, 0.0015, 0.0024, 0.0009],
    };
    let d = spin_orbit_to_coupling(&params);
    let (class, frame) = canonical_decompose(&d).unwrap();
    println!("exact c = {:?}  det_sign = {}", class.c, class.det_sign);
    println!("sum c = {}", class.c.iter().sum::<f64>());
    let w = predicted_frequencies(&class);
    for label in PeakLabel::ALL {
        println!("  {} = {:.6}", label.name(), w[label.index()]);
    }

    // Exact Bell moduli per probe.
    let mut moduli = [[0.0f64; 4]; 3];
    for (k, probe) in ProbeState::TRIO.iter().enumerate() {
        let l = bell_coefficients(&frame.kq, &probe.state());
        for i in 0..4 {
            moduli[k][i] = l[i].norm();
        }
        println!("|l({})| = {:?}", k + 1, moduli[k]);
    }

    // Heights p_ij = |l_i|^4 |l_j|^4 per probe (table scale 1e-2).
    for (k, m) in moduli.iter().enumerate() {
        print!("state {} heights x100:", k + 1);
        for label in PeakLabel::ALL {
            let (i, j) = label.pair();
            print!(" {}={:.4}", label.name(), 100.0 * m[i].powi(4) * m[j].powi(4));
        }
        println!();
    }

    // Mu quadruples per row.
    let mut mus = [[0.0f64; 4]; 4];
    for r in 0..4 {
        let sq = [
            moduli[0][r] * moduli[0][r],
            moduli[1][r] * moduli[1][r],
            moduli[2][r] * moduli[2][r],
        ];
        mus[r] = [
            sq[0] - sq[1] + sq[2],
            sq[0] + sq[1] - sq[2],
            -sq[0] + sq[1] + sq[2],
            1.0 - sq[0] - sq[1] - sq[2],
        ];
        println!(
            "mu({}) x100 = {:.4} {:.4} {:.4} {:.4}   sum = {:.6}",
            r + 1,
            100.0 * mus[r][0],
            100.0 * mus[r][1],
            100.0 * mus[r][2],
            100.0 * mus[r][3],
            mus[r].iter().sum::<f64>()
        );
    }

    // Row candidates: w1.b = +-sqrt(2 mu1) with w1 = e1 - e3, etc.
    // (pattern derived from the pinned magic basis; verified in reconstruct).
    let mut row_lists: Vec<Vec<[f64; 4]>> = Vec::new();
    for mu in &mus {
        let u1 = (2.0 * mu[0].max(0.0)).sqrt();
        let u2 = (2.0 * mu[1].max(0.0)).sqrt();
        let u3 = (2.0 * mu[2].max(0.0)).sqrt();
        let u4 = (2.0 * mu[3].max(0.0)).sqrt();
        let mut list = Vec::new();
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                for s3 in [1.0, -1.0] {
                    for s4 in [1.0, -1.0] {
                        // b1 - b3 = s1 u1; b1 + b3 = s2 u2; b2 - b4 = s3 u3; b2 + b4 = s4 u4
                        let b1 = (s2 * u2 + s1 * u1) / 2.0;
                        let b3 = (s2 * u2 - s1 * u1) / 2.0;
                        let b2 = (s4 * u4 + s3 * u3) / 2.0;
                        let b4 = (s4 * u4 - s3 * u3) / 2.0;
                        let cand = [b1, b2, b3, b4];
                        if !list.iter().any(|e: &[f64; 4]| {
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
        println!("row candidates: {}", list.len());
        row_lists.push(list);
    }

    // Assemble with orthogonality pruning at 1e-6, det = 1.
    let tol = 1e-6;
    let mut survivors: Vec<[[f64; 4]; 4]> = Vec::new();
    let dot = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
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
    println!("SO(4)-valid candidate matrices: {}", survivors.len());

    // Distinct Hamiltonians.
    let mut reps: Vec<(CouplingMatrix, usize)> = Vec::new();
    for kq in &survivors {
        let cand = coupling_from_kq(kq, &class).unwrap();
        let mut matched = false;
        for (rep, count) in reps.iter_mut() {
            if rep.max_abs_diff(&cand) < 1e-6 {
                *count += 1;
                matched = true;
                break;
            }
        }
        if !matched {
            reps.push((cand, 1));
        }
    }
    println!("distinct Hamiltonians: {}", reps.len());
    println!("true kq this far from a survivor:");
    let mut best = f64::MAX;
    for kq in &survivors {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((kq[r][c] - frame.kq[r][c]).abs());
            }
        }
        best = best.min(worst);
    }
    println!("  min max-entry distance = {best:.3e}");

    // Spin-orbit view of each distinct Hamiltonian + t=1 concurrence per probe.
    for (idx, (rep, count)) in reps.iter().enumerate() {
        let so = coupling_to_spin_orbit(rep, 1.0).unwrap();
        let h = rep.operator();
        let u1 = qcore::matrix_exp_i(&h, 1.0).unwrap();
        let mut ents = [0.0f64; 3];
        for (k, probe) in ProbeState::TRIO.iter().enumerate() {
            ents[k] = qcore::squared_concurrence(&u1.apply(&probe.state())).unwrap();
        }
        println!(
            "H{:02} (x{}): beta = [{:+.4}, {:+.4}, {:+.4}]  gamma = [{:+.4}, {:+.4}, {:+.4}, {:+.4}, {:+.4}, {:+.4}]  Ent(t=1) = [{:.3}, {:.3}, {:.3}]",
            idx + 1,
            count,
            so.beta[0], so.beta[1], so.beta[2],
            so.gamma[0], so.gamma[1], so.gamma[2], so.gamma[3], so.gamma[4], so.gamma[5],
            ents[0], ents[1], ents[2]
        );
    }
}
