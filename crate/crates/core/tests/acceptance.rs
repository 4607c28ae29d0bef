//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if a
//! criterion outside `KNOWN_FAILURES` fails, or if a known failure starts
//! passing (so the list cannot go stale).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use maxhyp::material::{ElasticParams, MaxwellParams};
use maxhyp::relaxation::{ucm_residual, TrajectorySample};
use maxhyp::scenarios::{
    closed_form_check, evolve_gauss, evolve_shear, observed_orders, parse_config, refine, run_scenario,
    shear_mode_grid, RunConfig, ScenarioSpec, CLOSED_FORM_TOL, INVOLUTION_TOL,
};
use maxhyp::solver::{heat_mode, shear1d_cfl_dt, undamped_mode, ShearParams};
use maxhyp::symmetrizer::{audit, random_elasto_state, wave_speeds, SampleRanges};
use maxhyp::system::{Elasto7, StateElasto7, SystemTag};
use maxhyp::tensor::{SymTensor2, Tensor2, Vec2};

/// Criteria reported as failing; see the README for the measurements.
const KNOWN_FAILURES: &[u32] = &[8];

struct Outcome {
    id: u32,
    passed: bool,
    detail: String,
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> (RunConfig, ScenarioSpec) {
    let text = std::fs::read_to_string(config_dir().join(name)).expect("shipped config");
    parse_config(&text).expect("shipped config parses")
}

fn parse(text: &str) -> (RunConfig, ScenarioSpec) {
    parse_config(text).expect("valid config")
}

fn min(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn symmetry_certificate() -> Outcome {
    let start = Instant::now();
    let ranges = SampleRanges::default();
    let mut passed = true;
    let mut detail = Vec::new();
    for tag in [SystemTag::Elasto7, SystemTag::Ucm10] {
        let s = audit(tag, 1000, 8, 7, &ranges).expect("audit runs");
        passed &= s.max_defect <= 1e-7 && s.min_hessian_eig > 0.0 && s.max_ablated_defect > 1e-3;
        detail.push(format!(
            "{}: defect {:.1e}, hessian min {:.1e}, ablated {:.1e}",
            tag.name(),
            s.max_defect,
            s.min_hessian_eig,
            s.max_ablated_defect
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    passed &= secs < 30.0;
    detail.push(format!("{secs:.1} s"));
    Outcome { id: 1, passed, detail: detail.join("; ") }
}

/// `sqrt(1 + |Cof F ν|² γ r |F|^(−γ−1))` for `p = r |F|^(−γ)`, written out
/// from the pressure law without the library's speed routine.
fn acoustic_speed(s: &StateElasto7, nu: Vec2, p: &ElasticParams) -> f64 {
    let f = &s.f;
    let cof_nu = Vec2::new(f.yb * nu.x - f.ya * nu.y, -f.xb * nu.x + f.xa * nu.y);
    let c_sq = cof_nu.x * cof_nu.x + cof_nu.y * cof_nu.y;
    let ratio = p.d1_sq / p.c1_sq;
    (1.0 + c_sq * p.gamma * ratio * s.det_f.powf(-p.gamma - 1.0)).sqrt()
}

fn spectrum_error(sys: &Elasto7, s: &StateElasto7, nu: Vec2) -> f64 {
    let c = acoustic_speed(s, nu, &sys.params);
    let expected = [-c, -1.0, 0.0, 0.0, 0.0, 1.0, c];
    let got = wave_speeds(sys, &s.to_array(), nu).expect("speeds");
    got.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn wave_speed_oracle() -> Outcome {
    let dirs: Vec<Vec2> = (0..8).map(|k| maxhyp::symmetrizer::direction(k, 8)).collect();
    let mut at_identity = 0.0f64;
    for gamma in [1.5, 2.0, 3.0] {
        for ratio in [0.5, 1.0, 2.0] {
            let sys = Elasto7::new(ElasticParams::new(1.0, ratio, gamma, 1.0).unwrap());
            for nu in &dirs {
                at_identity = at_identity.max(spectrum_error(&sys, &StateElasto7::rest(), *nu));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ranges = SampleRanges::default();
    let mut random = 0.0f64;
    for k in 0..1000 {
        let (sys, s) = random_elasto_state(&mut rng, &ranges);
        random = random.max(spectrum_error(&sys, &s, dirs[k % 8]));
    }
    let sys = Elasto7::new(ElasticParams::default());
    let canonical = [-3f64.sqrt(), -1.0, 0.0, 0.0, 0.0, 1.0, 3f64.sqrt()];
    let got = wave_speeds(&sys, &StateElasto7::rest().to_array(), Vec2::new(1.0, 0.0)).expect("speeds");
    let canon = got.iter().zip(canonical).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Outcome {
        id: 2,
        passed: at_identity <= 1e-8 && random <= 1e-6 && canon <= 1e-8,
        detail: format!("F = I {at_identity:.1e}, random {random:.1e}, canonical {canon:.1e}"),
    }
}

fn closed_form() -> Outcome {
    let (scaled, plain) = closed_form_check(1000, 7, &SampleRanges::default()).expect("check runs");
    let (config, spec) = parse("[run]\nsystem = ucm10\nscenario = audit_symmetry\n\n[scenario]\nsamples = 50\n");
    let manifest = run_scenario(&spec, &config).expect("audit runs").manifest;
    let factor = manifest.notes.get("closed_form_factor").and_then(|v| v.as_str()).map(str::to_string);
    let reported = factor.as_deref() == Some("sqrt(det Y)") && manifest.summary.contains_key("closed_form_error");
    Outcome {
        id: 3,
        passed: scaled <= CLOSED_FORM_TOL && reported,
        detail: format!(
            "vs sqrt(det Y) Y^(-1/2) {scaled:.1e}, vs Y^(-1/2) {plain:.1e}, manifest factor {}",
            factor.unwrap_or_else(|| "missing".into())
        ),
    }
}

fn damped_shear_order() -> Outcome {
    let start = Instant::now();
    let (config, spec) = load("converge_shear.cfg");
    assert_eq!((spec.n, spec.levels, config.t_end), (64, 4, 1.0));
    let levels = refine(&spec, &config, 4, false).expect("refinement runs");
    let errors: Vec<f64> = levels.iter().map(|l| l.error).collect();
    let orders = observed_orders(&errors);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 4,
        passed: min(&orders) >= 1.8 && secs < 10.0,
        detail: format!("orders {orders:.3?} over N 64..512, {secs:.2} s"),
    }
}

fn structural_limits() -> Outcome {
    let base = "[run]\nsystem = ucm10\nscenario = shear1d_mode\nscheme = central\nintegrator = ssprk2\ncfl = 0.5\n";
    let mut passed = true;
    let mut detail = Vec::new();
    for (label, material, t_end, elastic_ref) in [
        ("lambda 1e-3", "mu_dot = 0.1\nlambda = 1e-3", 0.1, false),
        ("lambda 1e3", "c1_sq = 1\nlambda = 1e3", 1.0, true),
    ] {
        let text = format!("{base}t_end = {t_end}\n\n[material]\n{material}\n\n[grid]\nn = 256\n");
        let (config, spec) = parse(&text);
        let params = config.material.params().unwrap();
        let (grid, k) = shear_mode_grid(&spec, spec.n).unwrap();
        let dt_cfl = shear1d_cfl_dt(&grid, config.cfl, &ShearParams::from(&params));
        let run = evolve_shear(&params, grid, &config, false).expect("shear run");
        let u: Vec<f64> = run.grid.cells.iter().map(|c| c[0]).collect();
        let reference: Vec<f64> = (0..run.grid.n)
            .map(|i| {
                let y = run.grid.center(i);
                if elastic_ref {
                    undamped_mode(t_end, y, k, run.params.g, spec.amplitude)
                } else {
                    heat_mode(t_end, y, k, params.mu_dot(), spec.amplitude)
                }
            })
            .collect();
        let dist = maxhyp::scenarios::rel_l2(&u, &reference);
        let hyperbolic = run.steps == (t_end / dt_cfl).ceil() as usize;
        passed &= dist < 0.02 && hyperbolic;
        detail.push(format!("{label}: {dist:.2e} in {} steps at cfl {}", run.steps, config.cfl));
    }
    Outcome { id: 5, passed, detail: detail.join("; ") }
}

fn thermodynamic_consistency() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for name in ["shear1d_mode.cfg", "shear1d_elastic.cfg", "gauss2d_ucm.cfg", "gauss2d_maxwell.cfg", "limit_sweep.cfg"]
    {
        let (config, spec) = load(name);
        assert!(spec.id.periodic(), "{name} is periodic");
        let m = run_scenario(&spec, &config).expect("scenario runs").manifest;
        let mut checked = Vec::new();
        for gate in ["energy_non_increasing", "cell_dissipation_nonnegative", "energy_conserved"] {
            if let Some(g) = m.gate(gate) {
                passed &= g.passed;
                checked.push(format!("{gate} {:.1e}", g.value));
            }
        }
        passed &= m.gate("energy_non_increasing").is_some();
        let frozen_central = config.material.lambda.is_infinite()
            && config.step.scheme == maxhyp::solver::Scheme::Central
            && spec.id != maxhyp::scenarios::ScenarioId::LimitSweep;
        if frozen_central {
            passed &= m.gate("energy_conserved").is_some();
        }
        detail.push(format!("{name} [{}]", checked.join(", ")));
    }
    Outcome { id: 6, passed, detail: detail.join("; ") }
}

/// `F = diag(eᵗ, e⁻ᵗ)`, so `∇u = diag(1, −1)` and `λȦ + A = F⁻¹F⁻ᵀ` has the
/// closed-form solution below for `A(0) = diag(a0, b0)`.
fn manufactured(t: f64, lambda: f64, a0: f64, b0: f64) -> TrajectorySample {
    let (p, m) = (1.0 / (1.0 - 2.0 * lambda), 1.0 / (1.0 + 2.0 * lambda));
    let decay = (-t / lambda).exp();
    TrajectorySample {
        rho: 1.0,
        f: Tensor2::new(t.exp(), 0.0, 0.0, (-t).exp()),
        a: SymTensor2::diag((-2.0 * t).exp() * p + (a0 - p) * decay, (2.0 * t).exp() * m + (b0 - m) * decay),
        grad_u: Tensor2::new(1.0, 0.0, 0.0, -1.0),
    }
}

fn upper_convected_identity() -> Outcome {
    let text = "[run]\nsystem = ucm10\nscenario = gauss2d_ucm\nscheme = central\nintegrator = rk4\ncfl = 0.25\n\
                t_end = 0.2\n\n[material]\nc1_sq = 1\nlambda = 0.1\n\n[grid]\nn = 16\n\n[scenario]\n\
                amplitude = 0.05\nwidth = 0.1\n";
    let (config, spec) = parse(text);
    let levels = refine(&spec, &config, 3, false).expect("refinement runs");
    let solver_orders = observed_orders(&levels.iter().map(|l| l.ucm_residual).collect::<Vec<_>>());

    let lambda = 0.3;
    let params = MaxwellParams::new(ElasticParams::default(), lambda).unwrap();
    let residuals: Vec<f64> = (0..4)
        .map(|l| {
            let dt = 0.05 / f64::from(1u32 << l);
            let n = (1.0 / dt).round() as usize;
            let traj: Vec<TrajectorySample> = (0..=n).map(|k| manufactured(k as f64 * dt, lambda, 1.2, 0.7)).collect();
            ucm_residual(&traj, dt, &params).expect("residual")
        })
        .collect();
    let exact_orders = observed_orders(&residuals);
    Outcome {
        id: 7,
        passed: min(&solver_orders) >= 1.0 && min(&exact_orders) >= 1.8 && max(&exact_orders) <= 2.2,
        detail: format!("solver orders {solver_orders:.2?}, manufactured orders {exact_orders:.3?}"),
    }
}

fn structure_preservation() -> Outcome {
    let (config, spec) = load("gauss2d_ucm.cfg");
    let (ev, _) = evolve_gauss(&spec, &config, spec.n, false).expect("central run");
    let involution_ok = ev.max_involution <= INVOLUTION_TOL * ev.field_scale;
    let central = refine(&spec, &config, 3, false).expect("central refinement");
    let central_detf = observed_orders(&central.iter().map(|l| l.detf).collect::<Vec<_>>());

    let text = "[run]\nsystem = ucm10\nscenario = gauss2d_ucm\nscheme = rusanov\nintegrator = ssprk2\ncfl = 0.5\n\
                t_end = 0.02\n\n[material]\nc1_sq = 1\nlambda = inf\n\n[grid]\nn = 64\n\n[scenario]\n\
                amplitude = 0.05\nwidth = 0.15\n";
    let (config, spec) = parse(text);
    let rusanov = refine(&spec, &config, 4, false).expect("rusanov refinement");
    let inv_orders = observed_orders(&rusanov.iter().map(|l| l.involution).collect::<Vec<_>>());
    let detf_orders = observed_orders(&rusanov.iter().map(|l| l.detf).collect::<Vec<_>>());

    let parts = [involution_ok, min(&central_detf) >= 1.8, min(&inv_orders) >= 1.0, min(&detf_orders) >= 1.0];
    Outcome {
        id: 8,
        passed: parts.iter().all(|p| *p),
        detail: format!(
            "central involution {:.1e} (scale {:.1e}) {}, central detF orders {central_detf:.2?} {}, \
             rusanov involution orders {inv_orders:.3?} {}, rusanov detF orders {detf_orders:.3?} {}",
            ev.max_involution,
            ev.field_scale,
            verdict(parts[0]),
            verdict(parts[1]),
            verdict(parts[2]),
            verdict(parts[3]),
        ),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "below target"
    }
}

fn hash_with_threads(config: &Path, threads: usize, out: &Path) -> (String, String) {
    let status = Command::new(env!("CARGO_BIN_EXE_maxhyp"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("MAXHYP_THREADS", threads.to_string())
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let stdout = String::from_utf8_lossy(&status.stdout).to_string();
    let hash = stdout.lines().find_map(|l| l.strip_prefix("content_hash ")).expect("hash printed").to_string();
    let manifest = std::fs::read_to_string(out.join("manifest.json")).expect("manifest written");
    let body: Vec<&str> = manifest.lines().filter(|l| !l.contains("wall_clock_s")).collect();
    (hash, body.join("\n"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut passed = true;
    let mut detail = Vec::new();
    for name in ["gauss2d_maxwell.cfg", "riemann1d_elasto.cfg"] {
        let cfg = config_dir().join(name);
        let (h1, m1) = hash_with_threads(&cfg, 1, &dir.path().join(format!("{name}-1")));
        let (h4, m4) = hash_with_threads(&cfg, 4, &dir.path().join(format!("{name}-4")));
        passed &= h1 == h4 && m1 == m4;
        detail.push(format!("{name} {}", &h1[..12]));
    }
    Outcome { id: 9, passed, detail: detail.join("; ") }
}

#[test]
fn acceptance() {
    let criteria: [fn() -> Outcome; 9] = [
        symmetry_certificate,
        wave_speed_oracle,
        closed_form,
        damped_shear_order,
        structural_limits,
        thermodynamic_consistency,
        upper_convected_identity,
        structure_preservation,
        determinism,
    ];
    let mut unexpected = Vec::new();
    for c in criteria {
        let o = c();
        // written past the test harness capture so the lines show in a plain `cargo test`
        let line = format!("{} criterion {}: {}\n", if o.passed { "PASS" } else { "FAIL" }, o.id, o.detail);
        std::io::stdout().write_all(line.as_bytes()).unwrap();
        if o.passed == KNOWN_FAILURES.contains(&o.id) {
            unexpected.push(o.id);
        }
    }
    assert!(unexpected.is_empty(), "criteria with unexpected outcome: {unexpected:?}");
}
