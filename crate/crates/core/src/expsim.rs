//! Virtual experiment: squared-concurrence time series for a hidden
//! Hamiltonian, with optional shot noise and CSV trace files.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::CouplingMatrix;
use crate::qcore::{self, C64, TwoQubitState};

/// Shot-noise settings; `shots_per_point = 0` means exact values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseConfig {
    pub shots_per_point: u64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            shots_per_point: 0,
            seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.shots_per_point == 0
    }

    /// Upper bound on the per-observation standard deviation.
    pub fn sigma_bound(&self) -> f64 {
        if self.shots_per_point == 0 {
            0.0
        } else {
            0.5 / (self.shots_per_point as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMeta {
    pub dt: f64,
    pub n: usize,
    pub shots: u64,
    pub seed: u64,
}

/// A squared-concurrence record on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceTrace {
    pub input_state_id: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: TraceMeta,
}

impl ConcurrenceTrace {
    /// Frequency-grid resolution 2 pi / (N dt).
    pub fn resolution(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.meta.n as f64 * self.meta.dt)
    }
}

/// Precomputed eigensystem of a coupling Hamiltonian; evaluates
/// U(t) psi = V diag(e^{i w t}) V^dag psi cheaply per sample.
pub struct Propagator {
    evals: [f64; 4],
    evecs: [[C64; 4]; 4],
}

impl Propagator {
    pub fn new(d: &CouplingMatrix) -> Result<Self> {
        let eig = qcore::hermitian_eig(&d.operator())?;
        Ok(Self {
            evals: eig.values,
            evecs: eig.vectors,
        })
    }

    pub fn state_at(&self, psi0: &TwoQubitState, t: f64) -> TwoQubitState {
        let mut w = [C64::new(0.0, 0.0); 4];
        for k in 0..4 {
            for b in 0..4 {
                w[k] += self.evecs[b][k].conj() * psi0.0[b];
            }
            w[k] *= C64::from_polar(1.0, self.evals[k] * t);
        }
        let mut out = [C64::new(0.0, 0.0); 4];
        for b in 0..4 {
            for k in 0..4 {
                out[b] += self.evecs[b][k] * w[k];
            }
        }
        TwoQubitState(out)
    }

    pub fn c2_at(&self, psi0: &TwoQubitState, t: f64) -> f64 {
        qcore::squared_concurrence(&self.state_at(psi0, t))
            .expect("propagated state stays normalized")
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic per-point seed from (seed, state id, sample index).
fn point_seed(seed: u64, state_id: &str, t_index: u64) -> u64 {
    splitmix(splitmix(seed ^ fnv1a(state_id.as_bytes())) ^ t_index)
}

/// Gaussian shot-noise perturbation of an exact C^2 value.
///
/// Variance max(C^2 (1 - C^2), 0.25 / N_s) / N_s; the floor keeps the
/// model honest near the endpoints where the binomial variance vanishes.
/// Values are clipped to [-0.5, 1.5]; information-destroying clipping to
/// [0, 1] is deliberately left to the analysis stage.
pub fn noisy_value(exact: f64, noise: &NoiseConfig, state_id: &str, t_index: u64) -> f64 {
    if noise.is_noiseless() {
        return exact;
    }
    let ns = noise.shots_per_point as f64;
    let var = (exact * (1.0 - exact)).max(0.25 / ns) / ns;
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(noise.seed, state_id, t_index));
    let g: f64 = StandardNormal.sample(&mut rng);
    (exact + var.sqrt() * g).clamp(-0.5, 1.5)
}

/// One measurement of C^2 for exp(iHt) applied to `state`.
pub fn measure_point(
    d: &CouplingMatrix,
    state: &TwoQubitState,
    t: f64,
    noise: &NoiseConfig,
    state_id: &str,
    t_index: u64,
) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidInput("time must be finite".into()));
    }
    let prop = Propagator::new(d)?;
    Ok(noisy_value(prop.c2_at(state, t), noise, state_id, t_index))
}

/// Samples C^2 at t_k = k dt for k = 0..n-1.
///
/// `n` must be a power of two (>= 16) so the downstream transform stays
/// radix-2. Deterministic for a fixed seed regardless of evaluation order.
pub fn simulate_trace(
    d: &CouplingMatrix,
    state: &TwoQubitState,
    state_id: &str,
    dt: f64,
    n: usize,
    noise: &NoiseConfig,
) -> Result<ConcurrenceTrace> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidInput("dt must be positive".into()));
    }
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "sample count {n} must be a power of two >= 16"
        )));
    }
    let prop = Propagator::new(d)?;
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * dt;
        times.push(t);
        values.push(noisy_value(prop.c2_at(state, t), noise, state_id, k as u64));
    }
    Ok(ConcurrenceTrace {
        input_state_id: state_id.to_string(),
        times,
        values,
        meta: TraceMeta {
            dt,
            n,
            shots: noise.shots_per_point,
            seed: noise.seed,
        },
    })
}

/// Writes a trace as CSV: one `#` header line, then `t,c2` rows with 17
/// significant digits.
pub fn write_trace<P: AsRef<Path>>(trace: &ConcurrenceTrace, path: P) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(
        f,
        "# input_state={} dt={:.16e} n={} shots={} seed={}",
        trace.input_state_id, trace.meta.dt, trace.meta.n, trace.meta.shots, trace.meta.seed
    )?;
    for (t, v) in trace.times.iter().zip(&trace.values) {
        writeln!(f, "{t:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Reads a trace written by `write_trace`; verifies the grid is uniform
/// and strictly increasing.
pub fn read_trace<P: AsRef<Path>>(path: P) -> Result<ConcurrenceTrace> {
    let f = File::open(path)?;
    let reader = BufReader::new(f);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?
        .map_err(Error::Io)?;
    let (state_id, dt, n, shots, seed) = parse_header(&header)?;
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.map_err(Error::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let (ts, vs) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "expected `t,c2`".into(),
        })?;
        let t: f64 = ts.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad time value {ts:?}"),
        })?;
        let v: f64 = vs.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad c2 value {vs:?}"),
        })?;
        let k = times.len();
        let expected = k as f64 * dt;
        if (t - expected).abs() > 1e-12 * expected.abs().max(1.0) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("non-uniform time {t} (expected {expected})"),
            });
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "times not strictly increasing".into(),
                });
            }
        }
        times.push(t);
        values.push(v);
    }
    if times.len() != n {
        return Err(Error::Parse {
            line: times.len() + 2,
            msg: format!("expected {n} rows, found {}", times.len()),
        });
    }
    Ok(ConcurrenceTrace {
        input_state_id: state_id,
        times,
        values,
        meta: TraceMeta { dt, n, shots, seed },
    })
}

fn parse_header(header: &str) -> Result<(String, f64, usize, u64, u64)> {
    let bad = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.into(),
    };
    let rest = header
        .strip_prefix("# ")
        .ok_or_else(|| bad("header must start with `# `"))?;
    let mut state_id = None;
    let mut dt = None;
    let mut n = None;
    let mut shots = None;
    let mut seed = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| bad(&format!("bad header field {field:?}")))?;
        match key {
            "input_state" => state_id = Some(value.to_string()),
            "dt" => dt = value.parse().ok(),
            "n" => n = value.parse().ok(),
            "shots" => shots = value.parse().ok(),
            "seed" => seed = value.parse().ok(),
            _ => return Err(bad(&format!("unknown header key {key:?}"))),
        }
    }
    Ok((
        state_id.ok_or_else(|| bad("missing input_state"))?,
        dt.ok_or_else(|| bad("missing or bad dt"))?,
        n.ok_or_else(|| bad("missing or bad n"))?,
        shots.ok_or_else(|| bad("missing or bad shots"))?,
        seed.ok_or_else(|| bad("missing or bad seed"))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        bell_coefficients, canonical_decompose, spin_orbit_to_coupling, analytic_c2,
        SpinOrbitParams,
    };
    use crate::qcore::ProbeState;

    fn trial() -> CouplingMatrix {
        spin_orbit_to_coupling(&SpinOrbitParams {
            j: 1.0,
            beta: [0.01, 0.005, 0.02],
            gamma: [0.003, 0.005, 0.001, 0.0015, 0.0024, 0.0009],
        })
    }

    #[test]
    fn no_evolution_no_entanglement() {
        let v = measure_point(
            &trial(),
            &ProbeState::Psi2.state(),
            0.0,
            &NoiseConfig::noiseless(),
            "psi2",
            0,
        )
        .unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn reference_point_values() {
        let noise = NoiseConfig::noiseless();
        let d = trial();
        let v4 = measure_point(&d, &ProbeState::Psi4.state(), 0.5, &noise, "psi4", 0).unwrap();
        assert!((v4 - 0.198705).abs() < 1e-4, "psi4@0.5 = {v4}");
        let v3 = measure_point(&d, &ProbeState::Psi3.state(), 1.0, &noise, "psi3", 0).unwrap();
        assert!((v3 - 0.150).abs() < 1e-3, "psi3@1 = {v3}");
        let v2 = measure_point(&d, &ProbeState::Psi2.state(), 1.0, &noise, "psi2", 0).unwrap();
        assert!((v2 - 0.147).abs() < 1e-3, "psi2@1 = {v2}");
    }

    #[test]
    fn trace_rejects_bad_sample_count() {
        let err = simulate_trace(
            &trial(),
            &ProbeState::Psi2.state(),
            "psi2",
            0.25,
            1000,
            &NoiseConfig::noiseless(),
        );
        assert!(err.is_err());
        assert!(simulate_trace(
            &trial(),
            &ProbeState::Psi2.state(),
            "psi2",
            0.25,
            8,
            &NoiseConfig::noiseless()
        )
        .is_err());
    }

    #[test]
    fn noiseless_trace_stays_in_unit_interval() {
        let tr = simulate_trace(
            &trial(),
            &ProbeState::Psi1.state(),
            "psi1",
            0.25,
            256,
            &NoiseConfig::noiseless(),
        )
        .unwrap();
        assert!(tr.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn noiseless_trace_matches_closed_form() {
        let d = trial();
        let (class, frame) = canonical_decompose(&d).unwrap();
        for probe in ProbeState::TRIO {
            let l = bell_coefficients(&frame.kq, &probe.state());
            let tr = simulate_trace(
                &d,
                &probe.state(),
                probe.id(),
                0.25,
                512,
                &NoiseConfig::noiseless(),
            )
            .unwrap();
            for (t, v) in tr.times.iter().zip(&tr.values) {
                let want = analytic_c2(&l, &class.lambdas(), *t);
                assert!(
                    (v - want).abs() < 1e-10,
                    "t={t}: trace {v} vs closed form {want}"
                );
            }
        }
    }

    #[test]
    fn heisenberg_trace_is_single_tone() {
        // All eigenphase gaps coincide, so the non-DC spectrum collapses
        // to (at most) one line; check periodicity in the time domain.
        let d = CouplingMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let tr = simulate_trace(
            &d,
            &ProbeState::Psi1.state(),
            "psi1",
            0.1,
            64,
            &NoiseConfig::noiseless(),
        )
        .unwrap();
        // lambda gaps are all multiples of 4 -> period pi/4 in C^2(t).
        let period = std::f64::consts::PI / 4.0;
        for (t, v) in tr.times.iter().zip(&tr.values) {
            let t2 = t + period;
            let prop = Propagator::new(&d).unwrap();
            let v2 = prop.c2_at(&ProbeState::Psi1.state(), t2);
            assert!((v - v2).abs() < 1e-10);
        }
    }

    #[test]
    fn traces_are_deterministic() {
        let noise = NoiseConfig {
            shots_per_point: 1000,
            seed: 99,
        };
        let a = simulate_trace(&trial(), &ProbeState::Psi2.state(), "psi2", 0.25, 64, &noise)
            .unwrap();
        let b = simulate_trace(&trial(), &ProbeState::Psi2.state(), "psi2", 0.25, 64, &noise)
            .unwrap();
        assert_eq!(a, b);
        let c = simulate_trace(
            &trial(),
            &ProbeState::Psi2.state(),
            "psi2",
            0.25,
            64,
            &NoiseConfig {
                shots_per_point: 1000,
                seed: 100,
            },
        )
        .unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn noise_averages_toward_exact_values() {
        let d = trial();
        let exact = simulate_trace(
            &d,
            &ProbeState::Psi2.state(),
            "psi2",
            0.25,
            1024,
            &NoiseConfig::noiseless(),
        )
        .unwrap();
        // M * N_s = 1e6 total shots per point.
        let m = 10;
        let ns = 100_000;
        let mut avg = vec![0.0; exact.values.len()];
        for rep in 0..m {
            let tr = simulate_trace(
                &d,
                &ProbeState::Psi2.state(),
                "psi2",
                0.25,
                1024,
                &NoiseConfig {
                    shots_per_point: ns,
                    seed: 1000 + rep,
                },
            )
            .unwrap();
            for (a, v) in avg.iter_mut().zip(&tr.values) {
                *a += v / m as f64;
            }
        }
        let worst = avg
            .iter()
            .zip(&exact.values)
            .map(|(a, e)| (a - e).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 5e-3, "max averaging deviation {worst}");
    }

    #[test]
    fn csv_round_trip_is_bit_faithful() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let noise = NoiseConfig {
            shots_per_point: 500,
            seed: 7,
        };
        let tr = simulate_trace(&trial(), &ProbeState::Psi3.state(), "psi3", 0.25, 64, &noise)
            .unwrap();
        write_trace(&tr, &path).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(tr, back);
    }

    #[test]
    fn csv_write_records_noiseless_flag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let tr = simulate_trace(
            &trial(),
            &ProbeState::Psi3.state(),
            "psi3",
            0.25,
            64,
            &NoiseConfig::noiseless(),
        )
        .unwrap();
        write_trace(&tr, &path).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(back.meta.shots, 0);
    }

    #[test]
    fn csv_shuffled_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let tr = simulate_trace(
            &trial(),
            &ProbeState::Psi3.state(),
            "psi3",
            0.25,
            64,
            &NoiseConfig::noiseless(),
        )
        .unwrap();
        write_trace(&tr, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(5, 9);
        std::fs::write(&path, lines.join("\n")).unwrap();
        match read_trace(&path) {
            Err(Error::Parse { line, .. }) => assert!(line > 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_malformed_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        std::fs::write(&path, "input_state=psi1 dt=0.25\n0,0\n").unwrap();
        match read_trace(&path) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected header parse error, got {other:?}"),
        }
    }
}
