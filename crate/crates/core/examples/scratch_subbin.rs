// Development probe: behavior of refine_peaks on a sub-bin tone pair.

use hamchar_core::expsim::{ConcurrenceTrace, TraceMeta};
use hamchar_core::spectral::{periodogram, refine_peaks};

fn main() {
    let n = 1024;
    let dt = 0.25;
    let binw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let w1 = 40.0 * binw;
    let w2 = w1 + 0.5 * binw;
    let values: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            0.5 + 0.3 * (w1 * t).cos() + 0.2 * (w2 * t + 0.4).cos()
        })
        .collect();
    let tr = ConcurrenceTrace {
        input_state_id: "synthetic".into(),
        times: (0..n).map(|k| k as f64 * dt).collect(),
        values,
        meta: TraceMeta {
            dt,
            n,
            shots: 0,
            seed: 0,
        },
    };
    let spec = periodogram(&tr).unwrap();
    match refine_peaks(&spec, &tr, 2) {
        Ok(peaks) => {
            println!("true bins: 40.0 and 40.5 (binw = {binw:.5})");
            for p in peaks {
                println!(
                    "tone at bin {:.4}  amp {:.5}  height {:.3e}",
                    p.omega / binw,
                    p.amplitude,
                    p.height
                );
            }
        }
        Err(e) => println!("error: {e}"),
    }
}
