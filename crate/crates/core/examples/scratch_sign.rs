// Development probe: evolution-sign sensitivity of the reference values.

use hamchar_core::model::*;
use hamchar_core::qcore::{self, ProbeState};

fn main() {
    let params = SpinOrbitParams {
        j: 1.0,
        beta: [0.01, 0.005, 0.02],
        gamma: [0.003, 0.005, 0.001, 0.0015, 0.0024, 0.0009],
    };
    let d = spin_orbit_to_coupling(&params);
    let h = d.operator();

    for (name, sign) in [("exp(+iHt)", 1.0), ("exp(-iHt)", -1.0)] {
        let u1 = qcore::matrix_exp_i(&h, sign * 1.0).unwrap();
        let u05 = qcore::matrix_exp_i(&h, sign * 0.5).unwrap();
        let mut vals = Vec::new();
        for probe in ProbeState::TRIO {
            vals.push(qcore::squared_concurrence(&u1.apply(&probe.state())).unwrap());
        }
        let v4 = qcore::squared_concurrence(&u05.apply(&ProbeState::Psi4.state())).unwrap();
        println!(
            "{name}: t=1 probes 1..3 = [{:.4}, {:.4}, {:.4}]   psi4@0.5 = {:.4}",
            vals[0], vals[1], vals[2], v4
        );
    }

    // Transposed coupling under +i for comparison.
    let mut dt = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            dt[i][j] = d.0[j][i];
        }
    }
    let ht = CouplingMatrix(dt).operator();
    let u1 = qcore::matrix_exp_i(&ht, 1.0).unwrap();
    let u05 = qcore::matrix_exp_i(&ht, 0.5).unwrap();
    let mut vals = Vec::new();
    for probe in ProbeState::TRIO {
        vals.push(qcore::squared_concurrence(&u1.apply(&probe.state())).unwrap());
    }
    let v4 = qcore::squared_concurrence(&u05.apply(&ProbeState::Psi4.state())).unwrap();
    println!(
        "exp(+iH^T t): t=1 probes 1..3 = [{:.4}, {:.4}, {:.4}]   psi4@0.5 = {:.4}",
        vals[0], vals[1], vals[2], v4
    );
}
