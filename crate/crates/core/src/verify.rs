//! The pencil verification battery behind `bessm verify`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::accretive_positivity_check;
use crate::cayley::{halfplane_to_disk, CayleyView, InverseDoubleCayley};
use crate::colligation::{agler_identity_residual, colligate_auto, spectrum_condition};
use crate::error::Result;
use crate::function::{conj_point, MatrixFunction};
use crate::geometry::four_quadrant_on;
use crate::hunt::random_accretive_tuple;
use crate::kernel::{check_psd_kernel_scaled, kernel_identity_residual, KernelEvaluator};
use crate::matrix::{is_psd, is_psd_scaled, relative_residual, Hermitian, Tolerances};
use crate::pencil::{Pencil, PsdPencil, RealizedFunction};
use crate::real::{check_real_pencil, is_iota_real_function, AntiUnitary};
use crate::sampling::{halton_halfplane_grid, random_halfplane_point, seeded};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Residual, or eigenvalue margin for sign checks.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub verdict: bool,
    pub seed: u64,
    pub grid_size: usize,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        crate::io::to_json_layout(self)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub grid_size: usize,
    pub seed: u64,
    pub tol: Tolerances,
    /// Involutions on `U` and, when `p > 0`, on `H`.
    pub iota: Option<(AntiUnitary, Option<AntiUnitary>)>,
    /// Random accretive tuples for the calculus positivity check.
    pub tuples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid_size: 25,
            seed: 0,
            tol: Tolerances::default(),
            iota: None,
            tuples: 10,
        }
    }
}

struct Builder {
    checks: Vec<Check>,
}

impl Builder {
    /// `value ≤ tolerance`.
    fn residual(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value, tolerance, value <= tolerance, None);
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64, pass: bool, note: Option<String>) {
        // Keep every reported number finite.
        let value = if value.is_finite() { value } else { f64::MAX };
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance,
            pass: pass && value < f64::MAX,
            note,
        });
    }

    fn failure(&mut self, name: &str, err: &crate::error::Error) {
        self.push(name, f64::MAX, 0.0, false, Some(err.to_string()));
    }
}

/// Runs every check on `pencil`. Checks that need a valid PSD pencil are
/// skipped, and the verdict fails, when the coefficients are not PSD.
pub fn verify_pencil(pencil: &Pencil, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tol;
    let mut b = Builder { checks: Vec::new() };
    let grid = halton_halfplane_grid(pencil.num_vars(), opts.grid_size, opts.seed);

    let mut worst_margin = f64::INFINITY;
    let mut worst_floor = 0.0;
    let mut psd = true;
    for a in pencil.coeffs() {
        let rep = Hermitian::new(a.clone(), &tol).and_then(|h| is_psd(&h, &tol));
        match rep {
            Ok(r) => {
                if r.min_eigenvalue < worst_margin {
                    worst_margin = r.min_eigenvalue;
                    worst_floor = r.floor;
                }
                psd &= r.psd;
            }
            Err(e) => {
                b.failure("pencil_psd", &e);
                return Ok(finish(b, opts));
            }
        }
    }
    b.push("pencil_psd", worst_margin, -worst_floor, psd, None);
    if !psd {
        return Ok(finish(b, opts));
    }
    let f = match PsdPencil::new(pencil.clone(), &tol).and_then(|p| RealizedFunction::new(p, tol)) {
        Ok(f) => f,
        Err(e) => {
            b.failure("realization", &e);
            return Ok(finish(b, opts));
        }
    };
    let trivial_h = (f.dim_h() == 0).then(|| "H = {0}: satisfied by construction".to_string());

    match kernel_identity_residual(&f, &grid) {
        Ok(r) => b.push("kernel_identity", r, tol.residual_tol, r <= tol.residual_tol, trivial_h.clone()),
        Err(e) => b.failure("kernel_identity", &e),
    }
    match KernelEvaluator::new(&f, &grid) {
        Ok(ev) => {
            let mut worst = f64::INFINITY;
            let mut pass = true;
            for k in 0..f.num_vars() {
                match check_psd_kernel_scaled(&ev.gram(k), ev.gram_scale(k), &tol) {
                    Ok(c) => {
                        worst = worst.min(c.min_eigenvalue);
                        pass &= c.psd;
                    }
                    Err(e) => {
                        b.failure("kernel_psd", &e);
                        pass = false;
                    }
                }
            }
            b.push("kernel_psd", worst, 0.0, pass, None);
        }
        Err(e) => b.failure("kernel_psd", &e),
    }

    let mut rng = seeded(opts.seed ^ 0x5EED);
    let (mut hom, mut sym) = (0.0f64, 0.0f64);
    let mut positivity = f64::INFINITY;
    let mut pos_pass = true;
    let mut eval_err = None;
    for z in &grid {
        let t = 0.1 + 9.9 * rng.random::<f64>();
        let lambda = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.random::<f64>());
        let run = || -> Result<(f64, f64, crate::matrix::PsdReport)> {
            let v = f.eval_schur(z)?;
            let mut h: f64 = 0.0;
            for s in [Complex64::new(t, 0.0), lambda] {
                let scaled: Vec<Complex64> = z.iter().map(|c| c * s).collect();
                h = h.max(relative_residual(&f.eval_schur(&scaled)?, &(&v * s)));
            }
            let sy = relative_residual(&f.eval_schur(&conj_point(z))?, &v.adjoint());
            let rep = is_psd_scaled(&Hermitian::new(&v + v.adjoint(), &Tolerances::default())?, 2.0 * f.magnitude(z), &tol)?;
            Ok((h, sy, rep))
        };
        match run() {
            Ok((h, sy, rep)) => {
                hom = hom.max(h);
                sym = sym.max(sy);
                positivity = positivity.min(rep.min_eigenvalue);
                pos_pass &= rep.psd;
            }
            Err(e) => eval_err = Some(e),
        }
    }
    if let Some(e) = eval_err {
        b.failure("evaluation", &e);
    } else {
        b.residual("homogeneity", hom, tol.residual_tol);
        b.residual("symmetry", sym, tol.residual_tol);
        b.push("positivity", positivity, 0.0, pos_pass, None);
    }

    let points: Vec<Vec<Complex64>> = (0..opts.grid_size).map(|_| random_halfplane_point(&mut rng, f.num_vars(), 0.9)).collect();
    match four_quadrant_on(&f, &points, &tol) {
        Ok(r) => {
            let worst = r.quadrants.iter().map(|q| q.min_eigenvalue).fold(f64::INFINITY, f64::min);
            b.push("four_quadrant", worst, 0.0, r.pass, None);
        }
        Err(e) => b.failure("four_quadrant", &e),
    }

    let mut calc_worst = f64::INFINITY;
    let mut calc_pass = true;
    let mut calc_err = None;
    for _ in 0..opts.tuples {
        let dim = rng.random_range(1..=3);
        let res = random_accretive_tuple(&mut rng, f.num_vars(), dim, &tol).and_then(|r| accretive_positivity_check(f.pencil(), &r, &tol));
        match res {
            Ok(rep) => {
                calc_worst = calc_worst.min(rep.min_eigenvalue);
                calc_pass &= rep.psd;
            }
            Err(e) => calc_err = Some(e),
        }
    }
    match calc_err {
        Some(e) => b.failure("calculus_positivity", &e),
        None => b.push("calculus_positivity", calc_worst, 0.0, calc_pass, None),
    }

    match colligate_auto(&f, opts.seed) {
        Ok(syn) => {
            let c = &syn.colligation;
            b.residual("colligation_unitarity", syn.unitarity_residual, tol.residual_tol);
            b.residual("colligation_selfadjoint", syn.selfadjoint_residual, tol.residual_tol);
            b.residual("colligation_interpolation", syn.interpolation_residual, tol.residual_tol);
            match spectrum_condition(c, &tol) {
                Ok(s) => b.push("spectrum_condition", s.distance, tol.margin, s.holds, None),
                Err(e) => b.failure("spectrum_condition", &e),
            }
            let disk_grid: Result<Vec<_>> = grid.iter().map(|z| halfplane_to_disk(z)).collect();
            let roundtrip = disk_grid.and_then(|dg| {
                let back = InverseDoubleCayley::new(c, tol);
                let target = CayleyView::herglotz(&f, tol);
                let mut worst: f64 = 0.0;
                for w in &dg {
                    worst = worst.max(relative_residual(&back.eval(w)?, &target.eval(w)?));
                }
                let (p, m) = agler_identity_residual(c, &dg[..dg.len().min(5)])?;
                Ok((worst, p.max(m)))
            });
            match roundtrip {
                Ok((r, agler)) => {
                    b.residual("colligation_roundtrip", r, 1e-8);
                    b.residual("agler_identity", agler, tol.residual_tol);
                }
                Err(e) => b.failure("colligation_roundtrip", &e),
            }
        }
        Err(e) => b.failure("colligation", &e),
    }

    if let Some((iu, ih)) = &opts.iota {
        match check_real_pencil(&f, iu, ih.as_ref(), &tol) {
            Ok(r) => b.residual("iota_real_pencil", r.residual, tol.residual_tol),
            Err(e) => b.failure("iota_real_pencil", &e),
        }
        match is_iota_real_function(&f, iu, &grid, &tol) {
            Ok(r) => b.residual("iota_real_function", r.residual, tol.residual_tol),
            Err(e) => b.failure("iota_real_function", &e),
        }
    }
    Ok(finish(b, opts))
}

fn finish(b: Builder, opts: &VerifyOptions) -> VerificationReport {
    let verdict = b.checks.iter().all(|c| c.pass);
    VerificationReport {
        checks: b.checks,
        verdict,
        seed: opts.seed,
        grid_size: opts.grid_size,
    }
}
