//! Primal-dual path-following interior-point method with Nesterov-Todd
//! scaling and a Mehrotra predictor-corrector step.
//!
//! Solves `min c'x  s.t.  A x = b, x in K` together with its dual
//! `max b'y  s.t.  c - A'y = z in K*`. Free blocks carry no complementarity;
//! they stay in the KKT system and are stabilised by static regularization.

use nalgebra::DMatrix;

use super::kkt::{KktSolver, ScalingBlocks};
use super::rotated::rotated_to_soc;
use super::{Cone, ConicError, ConicProgram, ConicSolution, Residuals, SolveStatus};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Feasibility and gap tolerance.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Static regularization added to the KKT diagonal.
    pub static_reg: f64,
    /// Fraction-to-boundary damping.
    pub step_fraction: f64,
    /// Iterative-refinement rounds per KKT backsolve.
    pub refine_rounds: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_iterations: 200,
            static_reg: 1e-9,
            step_fraction: 0.99,
            refine_rounds: 2,
        }
    }
}

/// Solve a cone program to the given tolerance.
pub fn solve(
    program: &ConicProgram,
    tolerance: f64,
    max_iterations: usize,
) -> Result<ConicSolution, ConicError> {
    solve_with(
        program,
        &SolverOptions {
            tolerance,
            max_iterations,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_with(
    program: &ConicProgram,
    options: &SolverOptions,
) -> Result<ConicSolution, ConicError> {
    if !(options.tolerance > 0.0 && options.tolerance <= 1e-2) {
        return Err(ConicError::BadProgram(format!(
            "tolerance {} outside (0, 1e-2]",
            options.tolerance
        )));
    }
    program.validate()?;
    if program
        .cones
        .iter()
        .any(|c| matches!(c, Cone::RotatedSoc(_)))
    {
        let conversion = rotated_to_soc(program);
        let solution = solve_with(&conversion.program, options)?;
        return Ok(conversion.solution_back(program, solution));
    }
    Ipm::new(program, options).run()
}

#[derive(Debug, Clone, Copy)]
struct Span {
    offset: usize,
    dim: usize,
}

struct Layout {
    free: Vec<Span>,
    nonneg: Vec<Span>,
    soc: Vec<Span>,
    degree: f64,
}

impl Layout {
    fn of(cones: &[Cone]) -> Self {
        let mut layout = Layout {
            free: Vec::new(),
            nonneg: Vec::new(),
            soc: Vec::new(),
            degree: 0.0,
        };
        let mut offset = 0;
        for cone in cones {
            let dim = cone.dim();
            let span = Span { offset, dim };
            match cone {
                Cone::Free(_) => layout.free.push(span),
                Cone::Nonneg(_) => {
                    layout.nonneg.push(span);
                    layout.degree += dim as f64;
                }
                Cone::Soc(_) => {
                    layout.soc.push(span);
                    layout.degree += 1.0;
                }
                Cone::RotatedSoc(_) => unreachable!("converted before solving"),
            }
            offset += dim;
        }
        layout
    }

    /// Unit interior point `e` of the cone (zero on free blocks).
    fn unit(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for span in &self.nonneg {
            v[span.offset..span.offset + span.dim].fill(1.0);
        }
        for span in &self.soc {
            v[span.offset] = 1.0;
        }
        v
    }

    /// Inner product over cone entries only.
    fn cone_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for span in self.nonneg.iter().chain(&self.soc) {
            for i in span.offset..span.offset + span.dim {
                acc += a[i] * b[i];
            }
        }
        acc
    }

    /// Largest step keeping `v + alpha dv` in the cone; `f64::INFINITY` when
    /// unbounded.
    fn max_step(&self, v: &[f64], dv: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for span in &self.nonneg {
            for i in span.offset..span.offset + span.dim {
                if dv[i] < 0.0 {
                    alpha = alpha.min(-v[i] / dv[i]);
                }
            }
        }
        for span in &self.soc {
            alpha = alpha.min(soc_max_step(
                &v[span.offset..span.offset + span.dim],
                &dv[span.offset..span.offset + span.dim],
            ));
        }
        alpha.max(0.0)
    }
}

fn soc_residual(v: &[f64]) -> f64 {
    // J(v) = v0^2 - ||v1||^2
    v[0] * v[0] - v[1..].iter().map(|x| x * x).sum::<f64>()
}

fn soc_max_step(v: &[f64], dv: &[f64]) -> f64 {
    let aq = soc_residual(dv);
    let bq = 2.0 * (v[0] * dv[0] - v[1..].iter().zip(&dv[1..]).map(|(a, b)| a * b).sum::<f64>());
    let cq = soc_residual(v).max(0.0);
    let mut alpha = f64::INFINITY;
    if dv[0] < 0.0 {
        alpha = alpha.min(-v[0] / dv[0]);
    }
    if aq.abs() < 1e-300 {
        if bq < 0.0 {
            alpha = alpha.min(-cq / bq);
        }
    } else {
        let disc = bq * bq - 4.0 * aq * cq;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for root in [(-bq - sq) / (2.0 * aq), (-bq + sq) / (2.0 * aq)] {
                if root > 0.0 {
                    alpha = alpha.min(root);
                }
            }
        }
    }
    alpha
}

/// Jordan product on one second-order cone block.
fn soc_product(a: &[f64], b: &[f64], out: &mut [f64]) {
    out[0] = a.iter().zip(b).map(|(x, y)| x * y).sum();
    for i in 1..a.len() {
        out[i] = a[0] * b[i] + b[0] * a[i];
    }
}

/// Solve `lambda o d = w` for `d` on one block.
fn soc_divide(lambda: &[f64], w: &[f64], out: &mut [f64]) {
    let det = soc_residual(lambda);
    let l0 = lambda[0];
    let cross: f64 = lambda[1..].iter().zip(&w[1..]).map(|(a, b)| a * b).sum();
    let d0 = (l0 * w[0] - cross) / det;
    out[0] = d0;
    for i in 1..lambda.len() {
        out[i] = (w[i] - d0 * lambda[i]) / l0;
    }
}

/// Nesterov-Todd scaling data for one second-order cone block.
struct SocScaling {
    span: Span,
    eta: f64,
    wbar: Vec<f64>,
}

impl SocScaling {
    fn compute(span: Span, x: &[f64], z: &[f64]) -> Option<Self> {
        let xs = &x[span.offset..span.offset + span.dim];
        let zs = &z[span.offset..span.offset + span.dim];
        let jx = soc_residual(xs);
        let jz = soc_residual(zs);
        if jx <= 0.0 || jz <= 0.0 || xs[0] <= 0.0 || zs[0] <= 0.0 {
            return None;
        }
        let nx = jx.sqrt();
        let nz = jz.sqrt();
        let dot: f64 = xs.iter().zip(zs).map(|(a, b)| a * b).sum();
        let gamma = ((1.0 + dot / (nx * nz)) / 2.0).sqrt();
        let mut wbar = vec![0.0; span.dim];
        wbar[0] = (xs[0] / nx + zs[0] / nz) / (2.0 * gamma);
        for i in 1..span.dim {
            wbar[i] = (xs[i] / nx - zs[i] / nz) / (2.0 * gamma);
        }
        Some(SocScaling {
            span,
            eta: (nx / nz).sqrt(),
            wbar,
        })
    }

    /// `out = W v` with `W = eta [[w0, w1'], [w1, I + w1 w1'/(1+w0)]]`,
    /// whose square is `eta^2 (2 wbar wbar' - J)`.
    fn apply_w(&self, v: &[f64], out: &mut [f64]) {
        let w0 = self.wbar[0];
        let tail: f64 = self.wbar[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
        out[0] = self.eta * (w0 * v[0] + tail);
        let mix = v[0] + tail / (1.0 + w0);
        for i in 1..v.len() {
            out[i] = self.eta * (v[i] + mix * self.wbar[i]);
        }
    }

    /// `out = W^{-1} v`; the inverse swaps `wbar` for `J wbar` and `eta` for
    /// its reciprocal.
    fn apply_w_inv(&self, v: &[f64], out: &mut [f64]) {
        let w0 = self.wbar[0];
        let tail: f64 = self.wbar[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
        out[0] = (w0 * v[0] - tail) / self.eta;
        let mix = -v[0] + tail / (1.0 + w0);
        for i in 1..v.len() {
            out[i] = (v[i] + mix * self.wbar[i]) / self.eta;
        }
    }

    /// Dense `W^{-2} = eta^{-2} (2 (J wbar)(J wbar)' - J)` block for the KKT
    /// matrix.
    fn h_block(&self) -> DMatrix<f64> {
        let q = self.span.dim;
        let mut b = DMatrix::zeros(q, q);
        // v = J wbar
        let mut v = self.wbar.clone();
        for item in v.iter_mut().skip(1) {
            *item = -*item;
        }
        for i in 0..q {
            for j in 0..q {
                b[(i, j)] = 2.0 * v[i] * v[j];
            }
        }
        b[(0, 0)] -= 1.0;
        for i in 1..q {
            b[(i, i)] += 1.0;
        }
        b / (self.eta * self.eta)
    }
}

struct Scaling {
    /// sqrt(x_i / z_i) on nonneg entries.
    nonneg_w: Vec<f64>,
    soc: Vec<SocScaling>,
    /// Scaled point `lambda = W z = W^{-1} x`, zero on free entries.
    lambda: Vec<f64>,
}

struct Ipm<'a> {
    program: &'a ConicProgram,
    options: SolverOptions,
    layout: Layout,
    n: usize,
    m: usize,
    a_max: f64,
}

impl<'a> Ipm<'a> {
    fn new(program: &'a ConicProgram, options: &SolverOptions) -> Self {
        Ipm {
            program,
            options: options.clone(),
            layout: Layout::of(&program.cones),
            n: program.num_vars(),
            m: program.num_rows(),
            a_max: program.rows.max_abs(),
        }
    }

    fn scaling(&self, x: &[f64], z: &[f64]) -> Option<Scaling> {
        let mut nonneg_w = vec![0.0; self.n];
        let mut lambda = vec![0.0; self.n];
        for span in &self.layout.nonneg {
            for i in span.offset..span.offset + span.dim {
                if x[i] <= 0.0 || z[i] <= 0.0 {
                    return None;
                }
                nonneg_w[i] = (x[i] / z[i]).sqrt();
                lambda[i] = (x[i] * z[i]).sqrt();
            }
        }
        let mut soc = Vec::with_capacity(self.layout.soc.len());
        for span in &self.layout.soc {
            let scal = SocScaling::compute(*span, x, z)?;
            scal.apply_w(
                &z[span.offset..span.offset + span.dim],
                &mut lambda[span.offset..span.offset + span.dim],
            );
            soc.push(scal);
        }
        Some(Scaling {
            nonneg_w,
            soc,
            lambda,
        })
    }

    fn h_blocks(&self, scaling: &Scaling) -> ScalingBlocks {
        let mut h = ScalingBlocks::new(self.n);
        for span in &self.layout.nonneg {
            for i in span.offset..span.offset + span.dim {
                let w = scaling.nonneg_w[i];
                h.diag[i] = 1.0 / (w * w);
            }
        }
        for scal in &scaling.soc {
            h.soc.push((scal.span.offset, scal.h_block()));
        }
        h
    }

    fn apply_w(&self, scaling: &Scaling, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for span in &self.layout.nonneg {
            for i in span.offset..span.offset + span.dim {
                out[i] = scaling.nonneg_w[i] * v[i];
            }
        }
        for scal in &scaling.soc {
            let s = scal.span;
            scal.apply_w(&v[s.offset..s.offset + s.dim], &mut out[s.offset..s.offset + s.dim]);
        }
    }

    fn apply_w_inv(&self, scaling: &Scaling, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for span in &self.layout.nonneg {
            for i in span.offset..span.offset + span.dim {
                out[i] = v[i] / scaling.nonneg_w[i];
            }
        }
        for scal in &scaling.soc {
            let s = scal.span;
            scal.apply_w_inv(&v[s.offset..s.offset + s.dim], &mut out[s.offset..s.offset + s.dim]);
        }
    }

    /// Jordan product blockwise over cone entries.
    fn product(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for span in &self.layout.nonneg {
            for i in span.offset..span.offset + span.dim {
                out[i] = a[i] * b[i];
            }
        }
        for span in &self.layout.soc {
            let s = span.offset..span.offset + span.dim;
            let (av, bv) = (&a[s.clone()], &b[s.clone()]);
            let mut tmp = vec![0.0; span.dim];
            soc_product(av, bv, &mut tmp);
            out[s].copy_from_slice(&tmp);
        }
    }

    /// Jordan division `lambda \ w` blockwise.
    fn divide(&self, scaling: &Scaling, w: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for span in &self.layout.nonneg {
            for i in span.offset..span.offset + span.dim {
                out[i] = w[i] / scaling.lambda[i];
            }
        }
        for span in &self.layout.soc {
            let s = span.offset..span.offset + span.dim;
            let mut tmp = vec![0.0; span.dim];
            soc_divide(&scaling.lambda[s.clone()], &w[s.clone()], &mut tmp);
            out[s].copy_from_slice(&tmp);
        }
    }

    fn residuals(&self, x: &[f64], y: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut r_p = vec![0.0; self.m];
        self.program.rows.mul_vec(x, &mut r_p);
        for (rp, b) in r_p.iter_mut().zip(&self.program.rhs) {
            *rp = b - *rp;
        }
        let mut r_d = vec![0.0; self.n];
        self.program.rows.tr_mul_vec(y, &mut r_d);
        for i in 0..self.n {
            r_d[i] = self.program.objective[i] - r_d[i] - z[i];
        }
        (r_p, r_d)
    }

    fn metrics(&self, x: &[f64], y: &[f64], r_p: &[f64], r_d: &[f64]) -> (Residuals, f64, f64) {
        let norm_b = inf_norm(&self.program.rhs);
        let norm_c = inf_norm(&self.program.objective);
        let pobj = dot(&self.program.objective, x);
        let dobj = dot(&self.program.rhs, y);
        let res = Residuals {
            primal: inf_norm(r_p) / (1.0 + norm_b),
            dual: inf_norm(r_d) / (1.0 + norm_c),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        };
        (res, pobj, dobj)
    }

    /// Solve the KKT system with iterative refinement against the
    /// unregularized matrix.
    #[allow(clippy::too_many_arguments)]
    fn kkt_solve(
        &self,
        kkt: &KktSolver,
        h: &ScalingBlocks,
        rx: &[f64],
        ry: &[f64],
        dx: &mut [f64],
        dy: &mut [f64],
    ) -> bool {
        if !kkt.solve(rx, ry, dx, dy) {
            return false;
        }
        let mut res_x = vec![0.0; self.n];
        let mut res_y = vec![0.0; self.m];
        let mut cx = vec![0.0; self.n];
        let mut cy = vec![0.0; self.m];
        for _ in 0..self.options.refine_rounds {
            // res = rhs - M_true [dx; dy]
            self.program.rows.tr_mul_vec(dy, &mut res_x);
            for i in 0..self.n {
                res_x[i] = rx[i] - res_x[i];
            }
            h.apply(dx, &mut res_x);
            self.program.rows.mul_vec(dx, &mut res_y);
            for i in 0..self.m {
                res_y[i] = ry[i] - res_y[i];
            }
            let norm = inf_norm(&res_x).max(inf_norm(&res_y));
            if !norm.is_finite() {
                return false;
            }
            if norm < 1e-14 * (1.0 + inf_norm(rx).max(inf_norm(ry))) {
                break;
            }
            if !kkt.solve(&res_x, &res_y, &mut cx, &mut cy) {
                return false;
            }
            for i in 0..self.n {
                dx[i] += cx[i];
            }
            for i in 0..self.m {
                dy[i] += cy[i];
            }
        }
        dx.iter().chain(dy.iter()).all(|v| v.is_finite())
    }

    fn run(self) -> Result<ConicSolution, ConicError> {
        let n = self.n;
        let m = self.m;
        let tol = self.options.tolerance;
        let mut x = self.layout.unit(n);
        let mut z = self.layout.unit(n);
        let mut y = vec![0.0; m];
        if self.layout.degree == 0.0 {
            return Err(ConicError::BadProgram(
                "program has no cone-restricted variables".into(),
            ));
        }
        let mut kkt = KktSolver::new(self.program, self.options.static_reg);
        let mut best: Option<(f64, ConicSolution)> = None;
        let mut dx = vec![0.0; n];
        let mut dy = vec![0.0; m];
        let mut dz = vec![0.0; n];
        let mut dx_c = vec![0.0; n];
        let mut dy_c = vec![0.0; m];
        let mut rx = vec![0.0; n];
        let mut work = vec![0.0; n];
        let mut wx = vec![0.0; n];
        let mut wz = vec![0.0; n];
        let mut corr = vec![0.0; n];
        let mut svec = vec![0.0; n];
        let mut stalls = 0usize;
        for iteration in 0..self.options.max_iterations {
            let (r_p, r_d) = self.residuals(&x, &y, &z);
            let (res, pobj, dobj) = self.metrics(&x, &y, &r_p, &r_d);
            let snapshot = |status: SolveStatus| ConicSolution {
                status,
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
                primal_objective: pobj,
                dual_objective: dobj,
                residuals: res,
                iterations: iteration,
            };
            if res.primal <= tol && res.dual <= tol && res.gap <= tol {
                return Ok(snapshot(SolveStatus::Optimal));
            }
            if best.as_ref().map_or(true, |(r, _)| res.max() < *r) {
                best = Some((res.max(), snapshot(SolveStatus::IterationLimit)));
            }
            // Farkas-type certificate tests on the raw iterate.
            if iteration >= 3 {
                let by = dot(&self.program.rhs, &y);
                if by > 1e-10 && res.primal > tol {
                    let mut atz = vec![0.0; n];
                    self.program.rows.tr_mul_vec(&y, &mut atz);
                    for i in 0..n {
                        atz[i] += z[i];
                    }
                    if inf_norm(&atz) / by <= tol * (1.0 + self.a_max) {
                        let inv = 1.0 / by;
                        let cert_res = inf_norm(&atz) * inv;
                        return Ok(ConicSolution {
                            status: SolveStatus::InfeasibleCertificate,
                            x: x.clone(),
                            y: y.iter().map(|v| v * inv).collect(),
                            z: z.iter().map(|v| v * inv).collect(),
                            primal_objective: f64::INFINITY,
                            dual_objective: f64::INFINITY,
                            residuals: Residuals {
                                primal: f64::INFINITY,
                                dual: cert_res,
                                gap: 0.0,
                            },
                            iterations: iteration,
                        });
                    }
                }
                let cx = dot(&self.program.objective, &x);
                if cx < -1e-10 && res.dual > tol {
                    let mut ax = vec![0.0; m];
                    self.program.rows.mul_vec(&x, &mut ax);
                    if inf_norm(&ax) / (-cx) <= tol * (1.0 + self.a_max) {
                        let inv = 1.0 / (-cx);
                        let cert_res = inf_norm(&ax) * inv;
                        return Ok(ConicSolution {
                            status: SolveStatus::UnboundedCertificate,
                            x: x.iter().map(|v| v * inv).collect(),
                            y: y.clone(),
                            z: z.clone(),
                            primal_objective: f64::NEG_INFINITY,
                            dual_objective: f64::NEG_INFINITY,
                            residuals: Residuals {
                                primal: cert_res,
                                dual: f64::INFINITY,
                                gap: 0.0,
                            },
                            iterations: iteration,
                        });
                    }
                }
            }
            let mu = self.layout.cone_dot(&x, &z) / self.layout.degree;
            if !mu.is_finite() {
                return Err(ConicError::NumericalFailure {
                    iterations: iteration,
                    residuals: res,
                });
            }
            let scaling = match self.scaling(&x, &z) {
                Some(s) => s,
                None => {
                    return Err(ConicError::NumericalFailure {
                        iterations: iteration,
                        residuals: res,
                    })
                }
            };
            let h = self.h_blocks(&scaling);
            let mut factored = kkt.factor(&self.program.rows, &h);
            while !factored && kkt.static_reg < 1e-4 {
                kkt.static_reg *= 100.0;
                factored = kkt.factor(&self.program.rows, &h);
            }
            if !factored {
                return Err(ConicError::NumericalFailure {
                    iterations: iteration,
                    residuals: res,
                });
            }
            // Affine direction: s = -lambda, rx = r_d + z.
            for i in 0..n {
                rx[i] = r_d[i] + z[i];
            }
            if !self.kkt_solve(&kkt, &h, &rx, &r_p, &mut dx, &mut dy) {
                return Err(ConicError::NumericalFailure {
                    iterations: iteration,
                    residuals: res,
                });
            }
            self.dz_from(&r_d, &dy, &mut dz);
            let alpha_p_aff = self.layout.max_step(&x, &dx).min(1e6);
            let alpha_d_aff = self.layout.max_step(&z, &dz).min(1e6);
            // mu after the full affine step.
            let mut mu_aff = 0.0;
            for span in self.layout.nonneg.iter().chain(&self.layout.soc) {
                for i in span.offset..span.offset + span.dim {
                    mu_aff += (x[i] + alpha_p_aff.min(1.0) * dx[i])
                        * (z[i] + alpha_d_aff.min(1.0) * dz[i]);
                }
            }
            mu_aff /= self.layout.degree;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            // Corrector: svec = lambda \ (sigma mu e - (W^-1 dx)o(W dz) - lambda o lambda).
            self.apply_w_inv(&scaling, &dx, &mut wx);
            self.apply_w(&scaling, &dz, &mut wz);
            self.product(&wx, &wz, &mut corr);
            self.product(&scaling.lambda, &scaling.lambda, &mut work);
            let e = self.layout.unit(n);
            for i in 0..n {
                work[i] = sigma * mu * e[i] - corr[i] - work[i];
            }
            self.divide(&scaling, &work, &mut svec);
            self.apply_w_inv(&scaling, &svec, &mut work);
            for i in 0..n {
                rx[i] = r_d[i] - work[i];
            }
            if !self.kkt_solve(&kkt, &h, &rx, &r_p, &mut dx_c, &mut dy_c) {
                return Err(ConicError::NumericalFailure {
                    iterations: iteration,
                    residuals: res,
                });
            }
            self.dz_from(&r_d, &dy_c, &mut dz);
            let frac = self.options.step_fraction;
            let alpha_p = (frac * self.layout.max_step(&x, &dx_c)).min(1.0);
            let alpha_d = (frac * self.layout.max_step(&z, &dz)).min(1.0);
            if alpha_p < 1e-11 && alpha_d < 1e-11 {
                stalls += 1;
                if stalls >= 3 {
                    return Err(ConicError::NumericalFailure {
                        iterations: iteration,
                        residuals: res,
                    });
                }
            } else {
                stalls = 0;
            }
            for i in 0..n {
                x[i] += alpha_p * dx_c[i];
            }
            for i in 0..m {
                y[i] += alpha_d * dy_c[i];
            }
            for i in 0..n {
                z[i] += alpha_d * dz[i];
            }
        }
        let (_, mut solution) = best.expect("at least one iterate records");
        solution.iterations = self.options.max_iterations;
        Ok(solution)
    }

    /// `dz = r_d - A'dy` on cone entries, zero on free blocks.
    fn dz_from(&self, r_d: &[f64], dy: &[f64], dz: &mut [f64]) {
        self.program.rows.tr_mul_vec(dy, dz);
        for i in 0..self.n {
            dz[i] = r_d[i] - dz[i];
        }
        for span in &self.layout.free {
            dz[span.offset..span.offset + span.dim].fill(0.0);
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
