//! Spectral recovery: turn a concurrence trace into labeled peak
//! frequencies and heights, then into the canonical class [c1,c2,c3] and
//! the Bell-coefficient moduli |l_i|.
//!
//! Height normalization is fixed by calibration: a synthetic signal
//! C^2(t) = |sum_i e^{2 i lambda_i t} l_i^2|^2 must yield measured heights
//! equal to |l_i|^4 |l_j|^4. With the power spectrum defined as
//! |X_k|^2 / N^2 an on-bin cosine a cos(wt+g) lands at (a/2)^2, which is
//! exactly that product for the cosine amplitude 2|l_i|^2|l_j|^2.

use std::fs::File;
use std::io::Write as IoWrite;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expsim::ConcurrenceTrace;
use crate::model::{CanonicalClass, PeakLabel};
use crate::qcore::C64;

#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    /// Frequency grid over [0, pi/dt].
    pub omega: Vec<f64>,
    /// |X_k|^2 / N^2 at each grid point.
    pub power: Vec<f64>,
    pub dt: f64,
    pub n: usize,
    pub normalization: &'static str,
}

impl PowerSpectrum {
    pub fn resolution(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.dt)
    }
}

/// In-place radix-2 decimation-in-time FFT; `buf.len()` must be a power
/// of two.
fn fft_radix2(buf: &mut [C64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let log2n = n.trailing_zeros();
    // Bit-reversal permutation.
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - log2n);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * std::f64::consts::PI / len as f64;
        let wlen = C64::from_polar(1.0, ang);
        let mut i = 0;
        while i < n {
            let mut w = C64::new(1.0, 0.0);
            for j in 0..len / 2 {
                let u = buf[i + j];
                let v = buf[i + j + len / 2] * w;
                buf[i + j] = u + v;
                buf[i + j + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// One-sided power density of a trace.
pub fn periodogram(trace: &ConcurrenceTrace) -> Result<PowerSpectrum> {
    let n = trace.values.len();
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "sample count {n} must be a power of two >= 16"
        )));
    }
    let dt = trace.meta.dt;
    for (k, &t) in trace.times.iter().enumerate() {
        let expected = k as f64 * dt;
        if (t - expected).abs() > 1e-12 * expected.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "non-uniform time grid at sample {k}"
            )));
        }
    }
    power_of_samples(&trace.values, dt)
}

fn power_of_samples(values: &[f64], dt: f64) -> Result<PowerSpectrum> {
    let n = values.len();
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft_radix2(&mut buf);
    let scale = (n as f64) * (n as f64);
    let half = n / 2;
    let domega = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let mut omega = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, b) in buf.iter().take(half + 1).enumerate() {
        omega.push(k as f64 * domega);
        power.push(b.norm_sqr() / scale);
    }
    Ok(PowerSpectrum {
        omega,
        power,
        dt,
        n,
        normalization: "amplitude-square",
    })
}

/// Spectrum CSV export: `# dt=... n=...` then `omega,power` rows.
pub fn write_spectrum<P: AsRef<Path>>(spectrum: &PowerSpectrum, path: P) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "# dt={:.16e} n={}", spectrum.dt, spectrum.n)?;
    for (w, p) in spectrum.omega.iter().zip(&spectrum.power) {
        writeln!(f, "{w:.16e},{p:.16e}")?;
    }
    Ok(())
}

/// A refined spectral tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    /// Power-scale height (amplitude/2)^2.
    pub height: f64,
    pub amplitude: f64,
    pub phase: f64,
}

// ---- sum-of-cosines least squares -----------------------------------------

struct Tone {
    a: f64,
    w: f64,
    ph: f64,
}

fn model_eval(times: &[f64], dc: f64, tones: &[Tone], out: &mut [f64]) {
    for (o, &t) in out.iter_mut().zip(times) {
        let mut v = dc;
        for tone in tones {
            v += tone.a * (tone.w * t + tone.ph).cos();
        }
        *o = v;
    }
}

fn ssr(values: &[f64], model: &[f64]) -> f64 {
    values
        .iter()
        .zip(model)
        .map(|(y, m)| (y - m) * (y - m))
        .sum()
}

/// Solve the symmetric positive-definite system via equilibrated Cholesky.
fn solve_spd(a: &mut Vec<Vec<f64>>, b: &mut Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    let mut scale = vec![1.0; m];
    for i in 0..m {
        let d = a[i][i];
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        scale[i] = 1.0 / d.sqrt();
    }
    for i in 0..m {
        for j in 0..m {
            a[i][j] *= scale[i] * scale[j];
        }
        a[i][i] += 1e-13;
        b[i] *= scale[i];
    }
    // Cholesky a = L L^T.
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                a[i][i] = s.sqrt();
            } else {
                a[i][j] = s / a[j][j];
            }
        }
    }
    // Forward/backward substitution.
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    for i in (0..m).rev() {
        let mut s = b[i];
        for k in (i + 1)..m {
            s -= a[k][i] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Some(b.iter().zip(&scale).map(|(x, s)| x * s).collect())
}

/// Gauss-Newton fit of dc + sum of cosines (amplitude, frequency, phase
/// free per tone). Parameter tolerance 1e-10, at most 50 iterations, step
/// halving on nonimproving iterations.
fn gauss_newton_tones(
    times: &[f64],
    values: &[f64],
    dc: &mut f64,
    tones: &mut Vec<Tone>,
) {
    let n = times.len();
    let p = tones.len();
    let m = 1 + 3 * p;
    let t_span = times[n - 1] - times[0];
    let mut model = vec![0.0; n];
    model_eval(times, *dc, tones, &mut model);
    let mut best = ssr(values, &model);

    for _iter in 0..50 {
        // Accumulate normal equations J^T J and J^T r.
        let mut ata = vec![vec![0.0; m]; m];
        let mut atr = vec![0.0; m];
        let mut jrow = vec![0.0; m];
        for (k, &t) in times.iter().enumerate() {
            let mut v = *dc;
            jrow[0] = 1.0;
            for (q, tone) in tones.iter().enumerate() {
                let th = tone.w * t + tone.ph;
                let (s, c) = th.sin_cos();
                v += tone.a * c;
                jrow[1 + 3 * q] = c;
                jrow[2 + 3 * q] = -tone.a * t * s;
                jrow[3 + 3 * q] = -tone.a * s;
            }
            let r = values[k] - v;
            for i in 0..m {
                let ji = jrow[i];
                if ji == 0.0 {
                    continue;
                }
                atr[i] += ji * r;
                for j in 0..=i {
                    ata[i][j] += ji * jrow[j];
                }
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                ata[i][j] = ata[j][i];
            }
        }
        let delta = match solve_spd(&mut ata, &mut atr) {
            Some(d) => d,
            None => break,
        };

        // Step with halving until the fit improves.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _half in 0..12 {
            let new_dc = *dc + lambda * delta[0];
            let new_tones: Vec<Tone> = tones
                .iter()
                .enumerate()
                .map(|(q, tone)| Tone {
                    a: tone.a + lambda * delta[1 + 3 * q],
                    w: tone.w + lambda * delta[2 + 3 * q],
                    ph: tone.ph + lambda * delta[3 + 3 * q],
                })
                .collect();
            model_eval(times, new_dc, &new_tones, &mut model);
            let s = ssr(values, &model);
            if s <= best * (1.0 + 1e-14) {
                *dc = new_dc;
                *tones = new_tones;
                best = s;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        let step = delta[0]
            .abs()
            .max(
                (0..p)
                    .map(|q| {
                        (lambda * delta[1 + 3 * q])
                            .abs()
                            .max((lambda * delta[2 + 3 * q] * t_span).abs())
                            .max((lambda * delta[3 + 3 * q]).abs())
                    })
                    .fold(0.0, f64::max),
            );
        if step < 1e-10 {
            break;
        }
    }

    // Canonical form: nonnegative amplitude, phase in (-pi, pi].
    for tone in tones.iter_mut() {
        if tone.a < 0.0 {
            tone.a = -tone.a;
            tone.ph += std::f64::consts::PI;
        }
        if tone.w < 0.0 {
            tone.w = -tone.w;
            tone.ph = -tone.ph;
        }
        tone.ph = tone.ph.rem_euclid(2.0 * std::f64::consts::PI);
        if tone.ph > std::f64::consts::PI {
            tone.ph -= 2.0 * std::f64::consts::PI;
        }
    }
}

/// Joint refit of all tones; tone pairs that drift within one grid bin of
/// each other collapse to the stronger member (the documented resolution
/// limit). Returns true when a collapse happened.
fn joint_fit_with_resolution_limit(
    times: &[f64],
    values: &[f64],
    dc: &mut f64,
    tones: &mut Vec<Tone>,
    binw: f64,
) -> bool {
    let mut collapsed = false;
    loop {
        gauss_newton_tones(times, values, dc, tones);
        let mut collided = None;
        'scan: for i in 0..tones.len() {
            for j in (i + 1)..tones.len() {
                if (tones[i].w - tones[j].w).abs() < binw {
                    collided = Some(if tones[i].a < tones[j].a { i } else { j });
                    break 'scan;
                }
            }
        }
        match collided {
            Some(i) => {
                collapsed = true;
                tones.remove(i);
                if tones.is_empty() {
                    break;
                }
            }
            None => break,
        }
    }
    collapsed
}

/// Direct DFT of samples at one frequency: amplitude and phase seed for a
/// cosine at `w`.
fn tone_seed(times: &[f64], values: &[f64], w: f64) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for (&t, &v) in times.iter().zip(values) {
        let (s, c) = (w * t).sin_cos();
        re += v * c;
        im -= v * s;
    }
    let n = times.len() as f64;
    let a = 2.0 * (re * re + im * im).sqrt() / n;
    let ph = im.atan2(re);
    (a, ph)
}

/// Local maxima of a trace's residual spectrum, refined by a
/// sum-of-cosines least-squares fit against the raw samples.
///
/// Extraction is iterative: the strongest remaining spectral line above
/// the floor (default 1e-6 x the strongest line) is fitted and removed,
/// with a joint refit of all tones whenever lines interact. Lines closer
/// than one grid bin to an already-extracted tone are not split further;
/// that is the documented resolution limit.
pub fn refine_peaks(
    spectrum: &PowerSpectrum,
    trace: &ConcurrenceTrace,
    count: usize,
) -> Result<Vec<Peak>> {
    if count < 1 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    if spectrum.n != trace.values.len() || (spectrum.dt - trace.meta.dt).abs() > 1e-15 {
        return Err(Error::InvalidInput(
            "spectrum and trace grids do not match".into(),
        ));
    }
    let times = &trace.times;
    let values = &trace.values;
    let n = values.len();
    let binw = spectrum.resolution();
    let nyquist = std::f64::consts::PI / spectrum.dt;

    let mut dc = values.iter().sum::<f64>() / n as f64;
    let mut tones: Vec<Tone> = Vec::new();
    let mut model = vec![0.0; n];
    let mut residual: Vec<f64> = values.iter().map(|v| v - dc).collect();

    // Floor measured on the initial mean-subtracted spectrum.
    let base = power_of_samples(&residual, spectrum.dt)?;
    let peak_power = base.power[1..].iter().cloned().fold(0.0, f64::max);
    let floor = 1e-6 * peak_power;

    // Iterative extraction: strongest remaining line, single-tone fit,
    // joint refit when lines interact. A fit that lands within one bin of
    // an existing tone (or a collapse during a joint refit) means the
    // remaining structure is below the grid resolution; extraction stops
    // there rather than absorbing it into spurious tones.
    let max_tones = 16;
    let mut attempts = 0;
    while tones.len() < max_tones && attempts < 64 {
        attempts += 1;
        let spec = power_of_samples(&residual, spectrum.dt)?;
        // Strongest bin away from DC and from already-extracted tones.
        let mut best_bin = None;
        let mut best_power = floor;
        for k in 1..spec.power.len() - 1 {
            let w = spec.omega[k];
            if tones.iter().any(|t| (t.w - w).abs() < binw) {
                continue;
            }
            if spec.power[k] > best_power {
                best_power = spec.power[k];
                best_bin = Some(k);
            }
        }
        let Some(k) = best_bin else { break };

        // Parabolic interpolation on log power.
        let (pm, p0, pp) = (
            spec.power[k - 1].max(1e-300),
            spec.power[k].max(1e-300),
            spec.power[k + 1].max(1e-300),
        );
        let (lm, l0, lp) = (pm.ln(), p0.ln(), pp.ln());
        let denom = lm - 2.0 * l0 + lp;
        let shift = if denom.abs() > 1e-12 {
            (0.5 * (lm - lp) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let w0 = (spec.omega[k] + shift * binw).clamp(0.5 * binw, nyquist - 0.5 * binw);
        let (a0, ph0) = tone_seed(times, &residual, w0);
        let mut new_tone = vec![Tone {
            a: a0,
            w: w0,
            ph: ph0,
        }];
        let mut zero = 0.0;
        gauss_newton_tones(times, &residual, &mut zero, &mut new_tone);
        let tone = new_tone.pop().unwrap();

        // A fit that lands on an existing tone or wanders more than a bin
        // from its seed is chasing structure below the grid resolution.
        if tones.iter().any(|t| (t.w - tone.w).abs() < binw) || (tone.w - w0).abs() > binw {
            break; // resolution limit
        }
        let near_other = tones.iter().any(|t| (t.w - tone.w).abs() < 16.0 * binw);
        tones.push(tone);
        if near_other && joint_fit_with_resolution_limit(times, values, &mut dc, &mut tones, binw)
        {
            break; // resolution limit
        }
        model_eval(times, dc, &tones, &mut model);
        for ((r, y), m) in residual.iter_mut().zip(values).zip(&model) {
            *r = y - m;
        }
    }

    // Final joint polish under the same one-bin resolution limit.
    if !tones.is_empty() {
        joint_fit_with_resolution_limit(times, values, &mut dc, &mut tones, binw);
    }
    tones.sort_by(|a, b| a.w.partial_cmp(&b.w).unwrap());
    let peaks: Vec<Peak> = tones
        .iter()
        .map(|t| Peak {
            omega: t.w,
            height: (t.a / 2.0) * (t.a / 2.0),
            amplitude: t.a,
            phase: t.ph,
        })
        .collect();
    if peaks.len() < count {
        return Err(Error::InsufficientPeaks {
            needed: count,
            found: peaks.iter().map(|p| (p.omega, p.height)).collect(),
        });
    }
    Ok(peaks)
}

/// Linear least squares for dc + cosines at fixed frequencies; returns
/// (dc, heights) with heights on the (amplitude/2)^2 scale.
pub fn heights_at_frequencies(
    trace: &ConcurrenceTrace,
    freqs: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let p = freqs.len();
    let m = 1 + 2 * p;
    let times = &trace.times;
    let values = &trace.values;
    let mut ata = vec![vec![0.0; m]; m];
    let mut atr = vec![0.0; m];
    let mut row = vec![0.0; m];
    for (&t, &y) in times.iter().zip(values) {
        row[0] = 1.0;
        for (q, &w) in freqs.iter().enumerate() {
            let (s, c) = (w * t).sin_cos();
            row[1 + 2 * q] = c;
            row[2 + 2 * q] = s;
        }
        for i in 0..m {
            atr[i] += row[i] * y;
            for j in 0..=i {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            ata[i][j] = ata[j][i];
        }
    }
    let sol = solve_spd(&mut ata, &mut atr)
        .ok_or_else(|| Error::InvalidInput("singular design in height fit".into()))?;
    let dc = sol[0];
    let heights = (0..p)
        .map(|q| {
            let (al, be) = (sol[1 + 2 * q], sol[2 + 2 * q]);
            (al * al + be * be) / 4.0
        })
        .collect();
    Ok((dc, heights))
}

// ---- peak labeling and class recovery -------------------------------------

/// Six labeled peaks plus the DC coefficient of the power spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSet {
    /// Frequencies indexed by `PeakLabel::index`.
    pub freqs: [f64; 6],
    /// Heights indexed by `PeakLabel::index`; exact zeros below threshold.
    pub heights: [f64; 6],
    pub dc_height: f64,
}

impl PeakSet {
    pub fn freq(&self, label: PeakLabel) -> f64 {
        self.freqs[label.index()]
    }

    pub fn height(&self, label: PeakLabel) -> f64 {
        self.heights[label.index()]
    }
}

/// Least-squares class solve for a full label -> frequency assignment.
/// Returns (c, rms residual).
fn class_fit(freqs: &[f64; 6]) -> ([f64; 3], f64) {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for label in PeakLabel::ALL {
        let a = label.coeffs();
        let w = freqs[label.index()];
        for i in 0..3 {
            atb[i] += 4.0 * a[i] * w;
            for j in 0..3 {
                ata[i][j] += 16.0 * a[i] * a[j];
            }
        }
    }
    // 3x3 solve by Cramer.
    let det = crate::qcore::mat3_det(&ata);
    let mut c = [0.0; 3];
    for col in 0..3 {
        let mut m = ata;
        for r in 0..3 {
            m[r][col] = atb[r];
        }
        c[col] = crate::qcore::mat3_det(&m) / det;
    }
    let mut ss = 0.0;
    for label in PeakLabel::ALL {
        let a = label.coeffs();
        let pred = 4.0 * (a[0] * c[0] + a[1] * c[1] + a[2] * c[2]);
        let r = pred - freqs[label.index()];
        ss += r * r;
    }
    (c, (ss / 6.0).sqrt())
}

/// Labels six refined peaks.
///
/// The two largest frequencies are always w23 and w13 under the ordering
/// c1 >= c2 >= c3 >= 0; the remaining four labels are chosen among the
/// order-compatible assignments by least-squares residual of the full
/// linear system.
pub fn assign_peaks(peaks: &[Peak], resolution: f64) -> Result<PeakSet> {
    if peaks.len() != 6 {
        return Err(Error::InvalidInput(format!(
            "expected exactly 6 peaks, got {}",
            peaks.len()
        )));
    }
    let mut sorted: Vec<&Peak> = peaks.iter().collect();
    sorted.sort_by(|a, b| b.omega.partial_cmp(&a.omega).unwrap());

    let mut best: Option<([usize; 6], [f64; 3], f64)> = None;
    // sorted[0] -> w23, sorted[1] -> w13 always; permute the rest.
    let rest = [2usize, 3, 4, 5];
    let perms = permutations4();
    for perm in perms {
        // perm maps (w34, w24, w14, w12) -> positions in `sorted`.
        let w34 = sorted[rest[perm[0]]].omega;
        let w24 = sorted[rest[perm[1]]].omega;
        let w14 = sorted[rest[perm[2]]].omega;
        let w12 = sorted[rest[perm[3]]].omega;
        let slack = 1e-9 * (1.0 + w24.abs());
        if w24 < w14 - slack || w24 < w12 - slack || w34 < w12 - slack {
            continue;
        }
        let mut freqs = [0.0; 6];
        freqs[PeakLabel::W23.index()] = sorted[0].omega;
        freqs[PeakLabel::W13.index()] = sorted[1].omega;
        freqs[PeakLabel::W34.index()] = w34;
        freqs[PeakLabel::W24.index()] = w24;
        freqs[PeakLabel::W14.index()] = w14;
        freqs[PeakLabel::W12.index()] = w12;
        let (c, rms) = class_fit(&freqs);
        if c[0] < c[1] - 1e-9 || c[1] < c[2] - 1e-9 || c[2] < -resolution {
            continue;
        }
        if best.as_ref().map_or(true, |(_, _, r)| rms < *r) {
            let idx = [
                rest[perm[3]],
                1,
                rest[perm[2]],
                0,
                rest[perm[1]],
                rest[perm[0]],
            ];
            best = Some((idx, c, rms));
        }
    }
    let (idx, _c, rms) =
        best.ok_or_else(|| Error::InconsistentPeaks("no order-compatible labeling".into()))?;
    let limit = 5.0 * resolution;
    if rms > limit {
        return Err(Error::AssignmentFailure {
            residual: rms,
            limit,
        });
    }
    let mut freqs = [0.0; 6];
    let mut heights = [0.0; 6];
    for label in PeakLabel::ALL {
        let p = sorted[idx[label.index()]];
        freqs[label.index()] = p.omega;
        heights[label.index()] = p.height;
    }
    Ok(PeakSet {
        freqs,
        heights,
        dc_height: 0.0,
    })
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    let items = [0usize, 1, 2, 3];
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push([items[a], items[b], items[c], items[d]]);
            }
        }
    }
    out
}

/// Canonical class from labeled peaks by least squares; det_sign is not
/// observable from the spectrum and defaults to +1.
pub fn class_from_peaks(peaks: &PeakSet) -> Result<CanonicalClass> {
    let (mut c, _rms) = class_fit(&peaks.freqs);
    let scale = c[0].abs().max(1.0);
    if c[2] < -1e-6 * scale {
        return Err(Error::InconsistentPeaks(format!(
            "least-squares c3 = {:.3e} is negative",
            c[2]
        )));
    }
    if c[0] < c[1] - 1e-9 * scale || c[1] < c[2] - 1e-9 * scale {
        return Err(Error::InconsistentPeaks(
            "labeled peaks violate c1 >= c2 >= c3".into(),
        ));
    }
    c[2] = c[2].max(0.0);
    Ok(CanonicalClass::new(c, 1.0))
}

// ---- Bell moduli -----------------------------------------------------------

/// Moduli of the rotated Bell coefficients for one probe state.
#[derive(Debug, Clone, PartialEq)]
pub struct BellModuli {
    pub l_abs: [f64; 4],
    pub state_id: String,
    /// Largest log-spread among the redundant ratio forms; a quality
    /// metric, ~1e-6 or below on clean data.
    pub spread: f64,
}

/// Recovers |l_i| from labeled peak heights via |l_i|^8 = p_ij p_ik / p_jk.
///
/// All available ratio forms are combined by a weighted geometric mean;
/// with `amp_sigma = 0` the weights are uniform. A modulus with every
/// associated height exactly zero is set to zero and the rest are
/// recovered from the surviving triangle. The squared moduli are
/// renormalized to unit sum when the raw sum is within 0.05 of 1.
pub fn moduli_from_heights(
    peaks: &PeakSet,
    state_id: &str,
    amp_sigma: f64,
) -> Result<BellModuli> {
    let h = |i: usize, j: usize| -> f64 {
        let label = match (i.min(j), i.max(j)) {
            (0, 1) => PeakLabel::W12,
            (0, 2) => PeakLabel::W13,
            (0, 3) => PeakLabel::W14,
            (1, 2) => PeakLabel::W23,
            (1, 3) => PeakLabel::W24,
            (2, 3) => PeakLabel::W34,
            _ => unreachable!(),
        };
        peaks.height(label)
    };

    let zero: Vec<usize> = (0..4)
        .filter(|&i| (0..4).filter(|&j| j != i).all(|j| h(i, j) == 0.0))
        .collect();
    if zero.len() > 1 {
        return Err(Error::DegenerateHeights(format!(
            "{} vanishing moduli; recovery needs at least three nonzero",
            zero.len()
        )));
    }
    // Every zero height must be explained by a vanishing modulus.
    for i in 0..4 {
        for j in (i + 1)..4 {
            if h(i, j) == 0.0 && !zero.contains(&i) && !zero.contains(&j) {
                return Err(Error::DegenerateHeights(format!(
                    "height for pair ({},{}) vanishes but neither modulus does",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let mut l = [0.0f64; 4];
    let mut spread = 0.0f64;
    for i in 0..4 {
        if zero.contains(&i) {
            continue;
        }
        let others: Vec<usize> = (0..4)
            .filter(|&j| j != i && !zero.contains(&j))
            .collect();
        let mut logs: Vec<(f64, f64)> = Vec::new();
        for a in 0..others.len() {
            for b in (a + 1)..others.len() {
                let (j, k) = (others[a], others[b]);
                let ratio = h(i, j) * h(i, k) / h(j, k);
                if !(ratio.is_finite() && ratio > 0.0) {
                    continue;
                }
                let log_est = ratio.ln() / 8.0;
                // var(log h) ~ 2 (amp_sigma)^2 / h for each height.
                let var = if amp_sigma > 0.0 {
                    (1.0 / 64.0)
                        * (2.0 * amp_sigma * amp_sigma)
                        * (1.0 / h(i, j) + 1.0 / h(i, k) + 1.0 / h(j, k))
                } else {
                    1.0
                };
                logs.push((log_est, 1.0 / var));
            }
        }
        if logs.is_empty() {
            return Err(Error::DegenerateHeights(format!(
                "no usable ratio form for modulus {}",
                i + 1
            )));
        }
        let wsum: f64 = logs.iter().map(|(_, w)| w).sum();
        let mean: f64 = logs.iter().map(|(v, w)| v * w).sum::<f64>() / wsum;
        for (v, _) in &logs {
            spread = spread.max((v - mean).abs());
        }
        l[i] = mean.exp();
    }

    let s: f64 = l.iter().map(|v| v * v).sum();
    if (s - 1.0).abs() >= 0.05 {
        return Err(Error::CorruptHeights(format!(
            "sum of squared moduli {s:.4} deviates from 1 by more than 0.05"
        )));
    }
    let scale = s.sqrt();
    for v in &mut l {
        *v /= scale;
    }
    Ok(BellModuli {
        l_abs: l,
        state_id: state_id.to_string(),
        spread,
    })
}
