//! Independent reference computations ("oracles") that pin down expected
//! values before the library implementations exist.
//!
//! Nothing in this file calls into the library's dynamics, special-function,
//! or spectral code.  Each oracle is a brute-force or closed-form computation
//! of the same quantity the library produces by cleverer means:
//!
//! * a mirror-billiard simulator (straight segments + specular reflection)
//!   that determines corner exit directions and swept polar angles by direct
//!   simulation of near-miss rays;
//! * half-integer Bessel functions in elementary closed form, cross-checked
//!   against a compensated ascending power series;
//! * a naive O(S^2) discrete Fourier transform driving the dyadic band-energy
//!   power law for step / kink / Gaussian profiles.
//!
//! Values frozen here reappear as expected constants in the module unit tests
//! and the acceptance suite.

use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Mirror-billiard oracle
// ---------------------------------------------------------------------------

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn dir(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

/// Unsigned polar angle subtended at the origin by the segment from `p` to `q`.
fn subtended(p: [f64; 2], q: [f64; 2]) -> f64 {
    cross(p, q).abs().atan2(dot(p, q))
}

/// Wrap an angle difference into (-pi, pi].
fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

struct MirrorExit {
    /// Polar angle of the outgoing velocity.
    dir: f64,
    /// Total unsigned polar angle swept around the apex.
    swept: f64,
    reflections: usize,
}

/// Trace a straight ray through the wedge bounded by the half-lines at polar
/// angles 0 and `theta0`, reflecting specularly, until it crosses radius
/// `r_stop` moving outward.  Purely elementary: segment-line intersections
/// and mirror images, no phase-space lift anywhere.
fn mirror_trace(theta0: f64, mut p: [f64; 2], mut v: [f64; 2], r_stop: f64) -> MirrorExit {
    let walls = [dir(0.0), dir(theta0)];
    let mut swept = 0.0;
    let mut reflections = 0usize;
    let mut last_wall = usize::MAX;
    for _ in 0..10_000 {
        // Earliest wall hit strictly ahead, excluding the wall we sit on.
        let mut best: Option<(f64, usize)> = None;
        for (i, d) in walls.iter().enumerate() {
            if i == last_wall {
                continue;
            }
            let denom = cross(v, *d);
            if denom.abs() < 1e-300 {
                continue;
            }
            let t = -cross(p, *d) / denom;
            if t <= 0.0 {
                continue;
            }
            let s = dot([p[0] + t * v[0], p[1] + t * v[1]], *d);
            if s <= 0.0 {
                continue; // would hit the wall's backward extension
            }
            if best.is_none_or(|(tb, _)| t < tb) {
                best = Some((t, i));
            }
        }
        // Outward crossing of the stop circle.
        let a = dot(v, v);
        let b = 2.0 * dot(p, v);
        let c = dot(p, p) - r_stop * r_stop;
        let t_exit = (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a);
        match best {
            Some((t, i)) if t < t_exit => {
                let q = [p[0] + t * v[0], p[1] + t * v[1]];
                swept += subtended(p, q);
                p = q;
                let d = walls[i];
                let n = [-d[1], d[0]];
                let vn = dot(v, n);
                v = [v[0] - 2.0 * vn * n[0], v[1] - 2.0 * vn * n[1]];
                last_wall = i;
                reflections += 1;
            }
            _ => {
                let q = [p[0] + t_exit * v[0], p[1] + t_exit * v[1]];
                swept += subtended(p, q);
                return MirrorExit {
                    dir: v[1].atan2(v[0]),
                    swept,
                    reflections,
                };
            }
        }
    }
    panic!("mirror_trace: reflection cap exceeded (theta0 = {theta0})");
}

/// Launch a ray aimed exactly at the apex along inward aim angle `z_in`,
/// displaced laterally by `side * eps` (perpendicular to travel), from radius
/// `r0`.
fn aimed_ray(z_in: f64, side: f64, eps: f64, r0: f64) -> ([f64; 2], [f64; 2]) {
    let u = dir(z_in);
    let v = [-u[0], -u[1]];
    let left = [-v[1], v[0]];
    let p = [r0 * u[0] + side * eps * left[0], r0 * u[1] + side * eps * left[1]];
    (p, v)
}

/// Limiting exit for one side of the near-miss family, found by simulating at
/// two small offsets and checking the outgoing direction has converged (it is
/// exactly offset-independent once the reflection sequence is stable).
/// Returns `(exit_angle, grazes_wall)`.
fn limiting_exit(theta0: f64, z_in: f64, side: f64) -> (f64, bool) {
    let r0 = 2.0;
    let (p1, v1) = aimed_ray(z_in, side, 1e-6, r0);
    let (p2, v2) = aimed_ray(z_in, side, 1e-7, r0);
    let e1 = mirror_trace(theta0, p1, v1, r0);
    let e2 = mirror_trace(theta0, p2, v2, r0);
    assert!(
        wrap(e1.dir - e2.dir).abs() < 1e-9,
        "exit direction did not stabilize for z_in = {z_in}, side = {side}: \
         {} vs {}",
        e1.dir,
        e2.dir
    );
    let grazes = wrap(e1.dir).abs() < 1e-9 || wrap(e1.dir - theta0).abs() < 1e-9;
    (wrap(e1.dir), grazes)
}

#[test]
fn mirror_oracle_freezes_exit_directions() {
    let theta0 = 0.7 * PI;

    // Aim angle 0.2*pi: both sides exit cleanly, at 0.2*pi and 0.6*pi.
    let (ea, ga) = limiting_exit(theta0, 0.2 * PI, 1.0);
    let (eb, gb) = limiting_exit(theta0, 0.2 * PI, -1.0);
    assert!(!ga && !gb, "0.2*pi exits should be transversal");
    let mut exits = [ea, eb];
    exits.sort_by(f64::total_cmp);
    assert!(
        (exits[0] - 0.2 * PI).abs() < 1e-12,
        "first frozen exit for z_in=0.2pi is 0.2pi, got {}",
        exits[0]
    );
    assert!(
        (exits[1] - 0.6 * PI).abs() < 1e-12,
        "second frozen exit for z_in=0.2pi is 0.6pi, got {}",
        exits[1]
    );

    // Aim angle 0.3*pi: one branch exits at 0.1*pi, the other leaves exactly
    // along the theta0 wall (a grazing exit).
    let (ea, ga) = limiting_exit(theta0, 0.3 * PI, 1.0);
    let (eb, gb) = limiting_exit(theta0, 0.3 * PI, -1.0);
    let (clean, graze) = if ga { (eb, ea) } else { (ea, eb) };
    assert!(
        ga ^ gb,
        "exactly one branch of z_in=0.3pi grazes: got ga={ga}, gb={gb}"
    );
    assert!(
        (clean - 0.1 * PI).abs() < 1e-12,
        "clean exit for z_in=0.3pi is 0.1pi, got {clean}"
    );
    assert!(
        (graze - 0.7 * PI).abs() < 1e-12,
        "grazing exit for z_in=0.3pi leaves along the wall at 0.7pi, got {graze}"
    );

    // A third interior aim for good measure: z_in = 0.55*pi.
    let (ea, _) = limiting_exit(theta0, 0.55 * PI, 1.0);
    let (eb, _) = limiting_exit(theta0, 0.55 * PI, -1.0);
    let mut exits = [ea, eb];
    exits.sort_by(f64::total_cmp);
    assert!((exits[0] - 0.15 * PI).abs() < 1e-12, "got {}", exits[0]);
    assert!((exits[1] - 0.45 * PI).abs() < 1e-12, "got {}", exits[1]);
}

#[test]
fn mirror_oracle_straight_sweep_matches_chord_geometry() {
    // A straight ray with perihelion distance eps entering at radius r1 and
    // leaving at radius r2 sweeps pi - asin(eps/r1) - asin(eps/r2).  Aim the
    // chord into the reflex gap of a 3-radian wedge so it never meets a wall;
    // this validates the swept-angle accumulator on a single segment.  (The
    // launch point sits at radius sqrt(r0^2 + eps^2), not r0.)
    let r0 = 2.0;
    for &eps in &[1e-1, 1e-2, 1e-3, 1e-4] {
        let (p, v) = aimed_ray(6.2, 1.0, eps, r0);
        let exit = mirror_trace(3.0, p, v, r0);
        assert_eq!(exit.reflections, 0, "chord must not reflect");
        let r_entry = r0.hypot(eps);
        let expect = PI - (eps / r_entry).asin() - (eps / r0).asin();
        assert!(
            (exit.swept - expect).abs() < 1e-12,
            "free sweep eps={eps}: {} vs {expect}",
            exit.swept
        );
    }
}

#[test]
fn mirror_oracle_near_miss_sweep_approaches_pi() {
    // Reflections in lines through the apex preserve the perihelion distance,
    // so the swept angle of every near-miss ray is
    // pi - asin(eps/r_entry) - asin(eps/r0) regardless of aim angle or
    // reflection count.  In particular it is within 3*eps of pi and increases
    // monotonically as eps shrinks.
    let theta0 = 0.7 * PI;
    let r0 = 2.0;
    for &z_in in &[0.1 * PI, 0.2 * PI, 0.3 * PI] {
        for side in [1.0, -1.0] {
            let mut prev = 0.0;
            for &eps in &[1e-1, 1e-2, 1e-3, 1e-4] {
                let (p, v) = aimed_ray(z_in, side, eps, r0);
                let exit = mirror_trace(theta0, p, v, r0);
                let expect = PI - (eps / r0.hypot(eps)).asin() - (eps / r0).asin();
                assert!(
                    (exit.swept - expect).abs() < 1e-11,
                    "z_in={z_in} side={side} eps={eps}: swept {} vs {expect}",
                    exit.swept
                );
                assert!(
                    (exit.swept - PI).abs() <= 3.0 * eps,
                    "z_in={z_in} eps={eps}: |swept - pi| = {} > 3eps",
                    (exit.swept - PI).abs()
                );
                assert!(exit.swept > prev, "sweep must grow as eps shrinks");
                prev = exit.swept;
            }
        }
    }
}

#[test]
fn mirror_oracle_brute_force_exits_scan() {
    // Dense scan: for aims away from the fold endpoints the two limiting
    // exits are distinct, transversal, and stable.  (The fold endpoints for
    // theta0 = 0.7pi are the aims where z_in +/- pi lands on a wall image:
    // z_in = 0.3pi and z_in = 0.4pi.)
    let theta0 = 0.7 * PI;
    for k in 0..40 {
        let z_in = theta0 * (k as f64 + 0.5) / 40.0;
        let near_fold =
            (z_in - 0.3 * PI).abs() < 0.02 * PI || (z_in - 0.4 * PI).abs() < 0.02 * PI;
        if near_fold {
            continue;
        }
        let (ea, ga) = limiting_exit(theta0, z_in, 1.0);
        let (eb, gb) = limiting_exit(theta0, z_in, -1.0);
        assert!(!ga && !gb, "unexpected grazing at z_in = {z_in}");
        assert!(
            (ea - eb).abs() > 1e-6,
            "limiting exits coincide at z_in = {z_in}"
        );
        for e in [ea, eb] {
            assert!(
                e > -1e-9 && e < theta0 + 1e-9,
                "exit {e} outside sector at z_in = {z_in}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Bessel oracle: half-integer closed forms vs. ascending series
// ---------------------------------------------------------------------------

fn j_half(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * x.sin()
}

fn j_three_halves(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos())
}

fn j_five_halves(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * ((3.0 / (x * x) - 1.0) * x.sin() - 3.0 * x.cos() / x)
}

/// Ascending power series with Kahan compensation.  Returns the sum and the
/// largest term magnitude, which bounds the cancellation-limited accuracy
/// (the alternating terms grow to ~e^x before decaying).
fn j_series(nu: f64, x: f64, gamma_nu_plus_1: f64) -> (f64, f64) {
    let half_x = 0.5 * x;
    let mut term = half_x.powf(nu) / gamma_nu_plus_1;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut max_term = 0.0f64;
    for m in 0..80 {
        max_term = max_term.max(term.abs());
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let mf = m as f64;
        term *= -(half_x * half_x) / ((mf + 1.0) * (mf + nu + 1.0));
    }
    (sum, max_term)
}

#[test]
fn bessel_oracle_series_matches_closed_forms() {
    let sqrt_pi = PI.sqrt();
    // Gamma(nu + 1) for nu = 1/2, 3/2, 5/2 in exact closed form.
    let g_half = 0.5 * sqrt_pi;
    let g_three_halves = 0.75 * sqrt_pi;
    let g_five_halves = (15.0 / 8.0) * sqrt_pi;

    for &x in &[0.25, 0.5, 1.0, 2.0, 4.0, 7.0] {
        // Largest coefficient inside each closed form; at small x the
        // closed forms cancel to much smaller results, so the achievable
        // agreement is limited by that intermediate scale, not the result.
        let cases = [
            (0.5, g_half, j_half(x), 1.0),
            (1.5, g_three_halves, j_three_halves(x), 1.0f64.max(1.0 / x)),
            (
                2.5,
                g_five_halves,
                j_five_halves(x),
                1.0f64.max(3.0 / (x * x)),
            ),
        ];
        for &(nu, g, closed, coeff) in &cases {
            let (series, max_term) = j_series(nu, x, g);
            let scale = (2.0 / (PI * x)).sqrt() * coeff;
            assert!(
                (series - closed).abs() <= 1e-14 * max_term.max(scale).max(closed.abs()),
                "series vs closed form at nu={nu}, x={x}: {series} vs {closed}"
            );
        }
    }
}

#[test]
fn bessel_oracle_frozen_values() {
    // Frozen reference values (closed forms evaluated once and pinned).
    // These reappear as expected values in the spectral module tests.
    let frozen: [(f64, fn(f64) -> f64, f64); 6] = [
        (2.0, j_half, 0.513_016_136_561_827_8),
        (2.0, j_three_halves, 0.491_293_778_687_162_4),
        (2.0, j_five_halves, 0.223_924_531_468_915_8),
        (30.0, j_half, -0.143_929_653_370_399_92),
        (30.0, j_three_halves, -0.027_267_945_711_177_69),
        (100.0, j_three_halves, -0.069_207_112_795_890_6),
    ];
    for &(x, f, want) in &frozen {
        let got = f(x);
        assert!(
            (got - want).abs() < 1e-15 * want.abs().max(1.0),
            "frozen value drifted at x={x}: {got} vs {want}"
        );
    }
}

// ---------------------------------------------------------------------------
// Dyadic band-energy power-law oracle (naive DFT, no FFT library)
// ---------------------------------------------------------------------------

/// C-infinity bump supported on |u| < 1.
fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// One-sided power spectrum |c_k|^2 for k in [1, s/2), by direct summation.
fn naive_power_spectrum(samples: &[f64]) -> Vec<f64> {
    let s = samples.len();
    let mut power = vec![0.0f64; s / 2];
    for (k, p) in power.iter_mut().enumerate().skip(1) {
        let w = -2.0 * PI * (k as f64) / (s as f64);
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (m, &v) in samples.iter().enumerate() {
            let (sn, cs) = (w * m as f64).sin_cos();
            re += v * cs;
            im += v * sn;
        }
        *p = (re * re + im * im) / (s as f64 * s as f64);
    }
    power
}

/// Band energies E_j = sum over 2^j <= k < 2^{j+1} of |c_k|^2, and the least
/// squares slope of log2(E_j) against j over bands clear of the noise floor.
fn band_slope(power: &[f64], j_lo: u32, j_hi: u32) -> (Vec<f64>, f64, usize) {
    let total: f64 = power.iter().sum();
    let floor = 1e-24 * total;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut energies = Vec::new();
    for j in j_lo..=j_hi {
        let (lo, hi) = (1usize << j, (1usize << (j + 1)).min(power.len()));
        let e: f64 = power[lo..hi].iter().sum();
        energies.push(e);
        if e > floor {
            pts.push((j as f64, e.log2()));
        }
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (cov, var): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx))
    });
    (energies, cov / var, pts.len())
}

#[test]
fn band_law_oracle_step_kink_gaussian() {
    let s = 4096usize;
    let h = 1.0 / s as f64;
    let window: Vec<f64> = (0..s)
        .map(|m| bump((m as f64 * h - 0.5) / 0.25))
        .collect();

    let profiles: [(&str, Box<dyn Fn(f64) -> f64>, f64, f64); 3] = [
        ("step", Box::new(|x| if x < 0.5 { 0.0 } else { 1.0 }), 0.5, 0.05),
        ("kink", Box::new(|x| (x - 0.5f64).max(0.0)), 1.5, 0.05),
        (
            "gaussian",
            Box::new(|x| (-(x - 0.5f64).powi(2) / (2.0 * 0.004f64.powi(2))).exp()),
            4.0,
            f64::INFINITY, // one-sided: only require s_hat >= 4
        ),
    ];

    for (name, f, want, tol) in profiles {
        let samples: Vec<f64> = (0..s)
            .map(|m| f(m as f64 * h) * window[m])
            .collect();
        let power = naive_power_spectrum(&samples);
        let (energies, slope, used) = band_slope(&power, 4, 10);
        let s_hat = -slope / 2.0;
        println!("band-law oracle {name}: s_hat = {s_hat:.4} ({used} bands, E = {energies:?})");
        assert!(used >= 4, "{name}: need at least 4 usable bands, got {used}");
        if tol.is_finite() {
            assert!(
                (s_hat - want).abs() <= tol,
                "{name}: fitted exponent {s_hat} not within {tol} of {want}"
            );
        } else {
            assert!(s_hat >= want, "{name}: fitted exponent {s_hat} below {want}");
        }
    }
}
