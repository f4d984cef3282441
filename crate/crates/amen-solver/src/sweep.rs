//! The alternating sweeps: AMEn with residual-sketch enrichment, and the
//! plain one-site baseline that keeps the ranks of its initial guess.
//!
//! Both walk the chain left to right and back with the gauge center at the
//! active site, so every local system inherits the conditioning of the
//! global one. The AMEn variant truncates the solved core by SVD, but the
//! kept rank is chosen in the residual metric of the local system: singular
//! directions are dropped only while the local residual stays within the
//! per-bond budget. The widening step then appends the local residual,
//! approximated through a rank-rho sketch `z` of `b - Ax` that is refreshed
//! by one ALS update per site visit.

use std::time::Instant;

use ndarray::prelude::*;
use ndarray::s;
use ndarray_linalg::{JobSvd, QR, SVDDC};
use tt_core::{C64, RankProfile, TTOperator, TTVector, TruncationPolicy};

use crate::env::{
    adjoint, chain_apply, lu, op_left, op_right, rhs_block, ru, vec_left, vec_right,
};
use crate::local::{assemble, solve_cg, solve_direct, vec_norm, LocalMap, LocalOp};
use crate::{LocalSolver, SolveReport, SolveTimings, SolverConfig, SolverError};

fn thin_qr(a: ArrayView2<C64>) -> (Array2<C64>, Array2<C64>) {
    a.qr().expect("lapack qr failed")
}

fn thin_svd(a: ArrayView2<C64>) -> (Array2<C64>, Array1<f64>, Array2<C64>) {
    let (u, sv, vt) = a.svddc(JobSvd::Some).expect("lapack svd failed");
    (u.expect("svd u"), sv, vt.expect("svd vt"))
}

fn flat3(c: &Array3<C64>) -> Array1<C64> {
    let len = c.len();
    debug_assert!(c.is_standard_layout());
    c.clone().into_shape(len).expect("contiguous core")
}

/// Smallest kept rank whose reconstruction keeps the local residual within
/// `target`; assumes the residual shrinks as the rank grows, which holds up
/// to roundoff because the full reconstruction is the solver output itself.
fn pick_rank(
    op: &LocalOp<'_>,
    v: &Array1<C64>,
    vnorm: f64,
    eps_bond: f64,
    u_flat: &Array1<C64>,
    uu: &Array2<C64>,
    sv: &Array1<f64>,
    vt: &Array2<C64>,
) -> usize {
    let kmax = sv.len();
    if kmax <= 1 || vnorm == 0.0 {
        return kmax.max(1);
    }
    let r_full = vec_norm(&(op.apply(u_flat) - v));
    let target = (r_full * (1.0 + 1e-6)).max(eps_bond * vnorm);
    let res_at = |k: usize| {
        let mut svt = vt.slice(s![..k, ..]).to_owned();
        for (i, mut row) in svt.outer_iter_mut().enumerate() {
            let si = sv[i];
            row.mapv_inplace(|z| z * si);
        }
        let rec = uu.slice(s![.., ..k]).dot(&svt);
        let flat = rec.into_shape(v.len()).expect("owned product");
        vec_norm(&(op.apply(&flat) - v))
    };
    let (mut lo, mut hi) = (1usize, kmax);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if res_at(mid) <= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

struct Sketch {
    z: Vec<Array3<C64>>,
    /// laz[n]: conj(z) x A x iterate over sites < n, (rho, ra, rx).
    laz: Vec<Array3<C64>>,
    raz: Vec<Array3<C64>>,
    /// lbz[n]: conj(z) against b over sites < n, (rho, rb).
    lbz: Vec<Array2<C64>>,
    rbz: Vec<Array2<C64>>,
}

struct Sweeper<'a> {
    a: &'a TTOperator,
    b: &'a TTVector,
    cfg: &'a SolverConfig,
    x: Vec<Array3<C64>>,
    sketch: Option<Sketch>,
    /// la[n]: conj(x) x A x x over sites < n, (rx, ra, rx).
    la: Vec<Array3<C64>>,
    ra: Vec<Array3<C64>>,
    /// lb[n]: conj(x) against b over sites < n, (rx, rb).
    lb: Vec<Array2<C64>>,
    /// rb[n]: b against conj(x) over sites >= n, (rb, rx).
    rb: Vec<Array2<C64>>,
    iterates: Vec<TTVector>,
}

impl<'a> Sweeper<'a> {
    fn new(
        a: &'a TTOperator,
        b: &'a TTVector,
        cfg: &'a SolverConfig,
        x0: &TTVector,
        z0: Option<&TTVector>,
    ) -> Self {
        let n = a.n_sites();
        let e3 = Array3::<C64>::ones((1, 1, 1));
        let e2 = Array2::<C64>::ones((1, 1));
        let mut sw = Self {
            a,
            b,
            cfg,
            x: x0.cores().to_vec(),
            sketch: z0.map(|z| Sketch {
                z: z.cores().to_vec(),
                laz: vec![e3.clone(); n + 1],
                raz: vec![e3.clone(); n + 1],
                lbz: vec![e2.clone(); n + 1],
                rbz: vec![e2.clone(); n + 1],
            }),
            la: vec![e3.clone(); n + 1],
            ra: vec![e3; n + 1],
            lb: vec![e2.clone(); n + 1],
            rb: vec![e2; n + 1],
            iterates: Vec::new(),
        };
        for i in (1..n).rev() {
            sw.ra[i] = op_right(&sw.ra[i + 1], &sw.x[i], a.core(i), &sw.x[i]);
            sw.rb[i] = vec_right(&sw.rb[i + 1], &sw.x[i], b.core(i));
            if let Some(sk) = &mut sw.sketch {
                sk.raz[i] = op_right(&sk.raz[i + 1], &sk.z[i], a.core(i), &sw.x[i]);
                sk.rbz[i] = vec_right(&sk.rbz[i + 1], &sk.z[i], b.core(i));
            }
        }
        sw
    }

    fn local_dims(&self, n: usize) -> (usize, usize, usize) {
        (
            self.la[n].dim().2,
            self.b.core(n).dim().1,
            self.ra[n + 1].dim().2,
        )
    }

    /// Project the system onto the frame around site `n` and solve it.
    fn run_solve(
        &self,
        n: usize,
    ) -> Result<(Array1<C64>, LocalOp<'_>, Array1<C64>, f64), SolverError> {
        let acore = self.a.core(n);
        let le = &self.la[n];
        let re = &self.ra[n + 1];
        let rhs2 = rhs_block(&self.lb[n], self.b.core(n), &self.rb[n + 1]);
        let (rlm, rr) = rhs2.dim();
        let dim = rlm * rr;
        let v = rhs2.into_shape(dim).expect("owned product");
        let vnorm = vec_norm(&v);
        let direct = match self.cfg.local_solver {
            LocalSolver::Direct => true,
            LocalSolver::Iterative => false,
            LocalSolver::Auto => dim <= self.cfg.direct_threshold,
        };
        if vnorm == 0.0 {
            // positive definite systems map only zero to zero
            let op = if direct {
                LocalOp::Dense(assemble(le, acore, re))
            } else {
                LocalOp::Free(LocalMap { le, a: acore, re })
            };
            return Ok((Array1::zeros(dim), op, v, vnorm));
        }
        if direct {
            let mat = assemble(le, acore, re);
            let u = solve_direct(&mat, &v).ok_or(SolverError::LocalSolve { site: n })?;
            Ok((u, LocalOp::Dense(mat), v, vnorm))
        } else {
            let map = LocalMap { le, a: acore, re };
            let warm = flat3(&self.x[n]);
            let tol = 0.1 * self.cfg.rel_tolerance * vnorm;
            let iters = (2 * dim).max(64);
            let u = solve_cg(&map, &v, warm, tol, iters)
                .ok_or(SolverError::LocalSolve { site: n })?;
            Ok((u, LocalOp::Free(map), v, vnorm))
        }
    }

    /// Solve at site `n` and split the core for a forward move: returns the
    /// orthonormal factor (rl*m, k) and the carry (k, rr).
    fn solve_trunc_forward(
        &self,
        n: usize,
        eps_bond: f64,
    ) -> Result<(Array2<C64>, Array2<C64>), SolverError> {
        let (u, op, v, vnorm) = self.run_solve(n)?;
        let (rl, m, rr) = self.local_dims(n);
        let um = u
            .view()
            .into_shape((rl * m, rr))
            .expect("contiguous local vector");
        let (uu, sv, vt) = thin_svd(um);
        let k = pick_rank(&op, &v, vnorm, eps_bond, &u, &uu, &sv, &vt);
        let uk = uu.slice(s![.., ..k]).to_owned();
        let mut carry = vt.slice(s![..k, ..]).to_owned();
        for (i, mut row) in carry.outer_iter_mut().enumerate() {
            let si = sv[i];
            row.mapv_inplace(|z| z * si);
        }
        Ok((uk, carry))
    }

    /// Mirror split for a backward move: returns the row-orthonormal factor
    /// (k, m*rr) and the carry (rl, k).
    fn solve_trunc_backward(
        &self,
        n: usize,
        eps_bond: f64,
    ) -> Result<(Array2<C64>, Array2<C64>), SolverError> {
        let (u, op, v, vnorm) = self.run_solve(n)?;
        let (rl, m, rr) = self.local_dims(n);
        let um = u
            .view()
            .into_shape((rl, m * rr))
            .expect("contiguous local vector");
        let (uu, sv, vt) = thin_svd(um);
        let k = pick_rank(&op, &v, vnorm, eps_bond, &u, &uu, &sv, &vt);
        let vk = vt.slice(s![..k, ..]).to_owned();
        let mut carry = uu.slice(s![.., ..k]).to_owned();
        for (i, mut col) in carry.axis_iter_mut(Axis(1)).enumerate() {
            let si = sv[i];
            col.mapv_inplace(|z| z * si);
        }
        Ok((vk, carry))
    }

    fn forward_step(&mut self, n: usize, eps_bond: f64) -> Result<(), SolverError> {
        let acore = self.a.core(n);
        let bcore = self.b.core(n);
        let (rl, m, rr) = self.local_dims(n);
        let (uk, carry) = self.solve_trunc_forward(n, eps_bond)?;
        let k = uk.ncols();
        let uc = uk
            .dot(&carry)
            .into_shape((rl, m, rr))
            .expect("owned product");

        // one ALS refresh of the residual sketch, then the widening block
        let (enr, rho) = {
            let sk = self.sketch.as_mut().expect("amen sweeps carry a sketch");
            let zb = rhs_block(&sk.lbz[n], bcore, &sk.rbz[n + 1]);
            let za = chain_apply(&sk.laz[n], acore, &sk.raz[n + 1], &uc);
            let (zl, _, zr) = za.dim();
            let znew = zb - &lu(&za);
            let (zq, _) = thin_qr(znew.view());
            let zk = zq.ncols();
            sk.z[n] = zq.into_shape((zl, m, zk)).expect("owned product");

            let eb = rhs_block(&self.lb[n], bcore, &sk.rbz[n + 1]);
            let ea = chain_apply(&self.la[n], acore, &sk.raz[n + 1], &uc);
            (eb - &lu(&ea), zr)
        };

        let mut aug = Array2::zeros((rl * m, k + rho));
        aug.slice_mut(s![.., ..k]).assign(&uk);
        aug.slice_mut(s![.., k..]).assign(&enr);
        let (q, rfac) = thin_qr(aug.view());
        let qk = q.ncols();
        self.x[n] = q.into_shape((rl, m, qk)).expect("owned product");

        let (_, m2, r2) = self.x[n + 1].dim();
        let cx = carry.dot(&ru(&self.x[n + 1]));
        let mut stacked = Array2::zeros((k + rho, m2 * r2));
        stacked.slice_mut(s![..k, ..]).assign(&cx);
        let next = rfac.dot(&stacked);
        self.x[n + 1] = next.into_shape((qk, m2, r2)).expect("owned product");

        self.la[n + 1] = op_left(&self.la[n], &self.x[n], acore, &self.x[n]);
        self.lb[n + 1] = vec_left(&self.lb[n], &self.x[n], bcore);
        let sk = self.sketch.as_mut().expect("amen sweeps carry a sketch");
        sk.laz[n + 1] = op_left(&sk.laz[n], &sk.z[n], acore, &self.x[n]);
        sk.lbz[n + 1] = vec_left(&sk.lbz[n], &sk.z[n], bcore);
        self.record();
        Ok(())
    }

    fn backward_step(&mut self, n: usize, eps_bond: f64) -> Result<(), SolverError> {
        let acore = self.a.core(n);
        let bcore = self.b.core(n);
        let (rl, m, rr) = self.local_dims(n);
        let (vk, carry) = self.solve_trunc_backward(n, eps_bond)?;
        let k = vk.nrows();
        let uc = carry
            .dot(&vk)
            .into_shape((rl, m, rr))
            .expect("owned product");

        let (enr, rho) = {
            let sk = self.sketch.as_mut().expect("amen sweeps carry a sketch");
            let zb = rhs_block(&sk.lbz[n], bcore, &sk.rbz[n + 1]);
            let za = chain_apply(&sk.laz[n], acore, &sk.raz[n + 1], &uc);
            let (zl, _, zr) = za.dim();
            let znew = (zb - &lu(&za))
                .into_shape((zl, m, zr))
                .expect("owned product");
            let (zq, _) = thin_qr(adjoint(ru(&znew)).view());
            let zk = zq.ncols();
            sk.z[n] = adjoint(zq.view())
                .into_shape((zk, m, zr))
                .expect("owned product");

            let eb = rhs_block(&sk.lbz[n], bcore, &self.rb[n + 1]);
            let ea = chain_apply(&sk.laz[n], acore, &self.ra[n + 1], &uc);
            let enr = (eb - &lu(&ea))
                .into_shape((zl, m, rr))
                .expect("owned product");
            (ru(&enr).to_owned(), zl)
        };

        let mut aug = Array2::zeros((k + rho, m * rr));
        aug.slice_mut(s![..k, ..]).assign(&vk);
        aug.slice_mut(s![k.., ..]).assign(&enr);
        let (qa, ra_f) = thin_qr(adjoint(aug.view()).view());
        let qk = qa.ncols();
        self.x[n] = adjoint(qa.view())
            .into_shape((qk, m, rr))
            .expect("owned product");

        let (r0, m0, _) = self.x[n - 1].dim();
        let pc = lu(&self.x[n - 1]).dot(&carry);
        let mut stacked = Array2::zeros((r0 * m0, k + rho));
        stacked.slice_mut(s![.., ..k]).assign(&pc);
        let prev = stacked.dot(&adjoint(ra_f.view()));
        self.x[n - 1] = prev.into_shape((r0, m0, qk)).expect("owned product");

        self.ra[n] = op_right(&self.ra[n + 1], &self.x[n], acore, &self.x[n]);
        self.rb[n] = vec_right(&self.rb[n + 1], &self.x[n], bcore);
        let sk = self.sketch.as_mut().expect("amen sweeps carry a sketch");
        sk.raz[n] = op_right(&sk.raz[n + 1], &sk.z[n], acore, &self.x[n]);
        sk.rbz[n] = vec_right(&sk.rbz[n + 1], &sk.z[n], bcore);
        self.record();
        Ok(())
    }

    fn forward_dmrg(&mut self, n: usize) -> Result<(), SolverError> {
        let acore = self.a.core(n);
        let bcore = self.b.core(n);
        let (rl, m, rr) = self.local_dims(n);
        let u3 = {
            let (u, _, _, _) = self.run_solve(n)?;
            u.into_shape((rl, m, rr)).expect("contiguous local vector")
        };
        let (q, rfac) = thin_qr(lu(&u3));
        let qk = q.ncols();
        self.x[n] = q.into_shape((rl, m, qk)).expect("owned product");
        let (_, m2, r2) = self.x[n + 1].dim();
        let next = rfac.dot(&ru(&self.x[n + 1]));
        self.x[n + 1] = next.into_shape((qk, m2, r2)).expect("owned product");
        self.la[n + 1] = op_left(&self.la[n], &self.x[n], acore, &self.x[n]);
        self.lb[n + 1] = vec_left(&self.lb[n], &self.x[n], bcore);
        self.record();
        Ok(())
    }

    fn backward_dmrg(&mut self, n: usize) -> Result<(), SolverError> {
        let acore = self.a.core(n);
        let bcore = self.b.core(n);
        let (rl, m, rr) = self.local_dims(n);
        let u3 = {
            let (u, _, _, _) = self.run_solve(n)?;
            u.into_shape((rl, m, rr)).expect("contiguous local vector")
        };
        let (qa, rfac) = thin_qr(adjoint(ru(&u3)).view());
        let qk = qa.ncols();
        self.x[n] = adjoint(qa.view())
            .into_shape((qk, m, rr))
            .expect("owned product");
        let (r0, m0, _) = self.x[n - 1].dim();
        let prev = lu(&self.x[n - 1]).dot(&adjoint(rfac.view()));
        self.x[n - 1] = prev.into_shape((r0, m0, qk)).expect("owned product");
        self.ra[n] = op_right(&self.ra[n + 1], &self.x[n], acore, &self.x[n]);
        self.rb[n] = vec_right(&self.rb[n + 1], &self.x[n], bcore);
        self.record();
        Ok(())
    }

    /// Plain local solve with no rank move; closes each sweep at site 0.
    fn solve_center(&mut self, n: usize) -> Result<(), SolverError> {
        let (rl, m, rr) = self.local_dims(n);
        let u3 = {
            let (u, _, _, _) = self.run_solve(n)?;
            u.into_shape((rl, m, rr)).expect("contiguous local vector")
        };
        self.x[n] = u3;
        self.record();
        Ok(())
    }

    fn record(&mut self) {
        if self.cfg.record_site_iterates {
            self.iterates
                .push(TTVector::from_cores_unchecked(self.x.clone(), None));
        }
    }

    /// True relative residual measured in TT arithmetic.
    fn true_residual(&self, b_norm: f64, round_tol: f64) -> Result<f64, SolverError> {
        let xv = TTVector::from_cores_unchecked(self.x.clone(), None);
        let ax = self.a.apply(&xv)?;
        let r = self.b.add(&ax.scale(C64::new(-1.0, 0.0)))?;
        let (r, _) = r.round(&TruncationPolicy::new(round_tol));
        Ok(r.norm() / b_norm)
    }

    fn profile(&self) -> RankProfile {
        let mut ranks = vec![self.x[0].dim().0];
        for c in &self.x {
            ranks.push(c.dim().2);
        }
        RankProfile::from_ranks(ranks)
    }
}

fn validate(
    a: &TTOperator,
    b: &TTVector,
    cfg: &SolverConfig,
) -> Result<TTVector, SolverError> {
    let n = a.n_sites();
    if n != b.n_sites() {
        return Err(tt_core::TTError::SiteCountMismatch {
            left: n,
            right: b.n_sites(),
        }
        .into());
    }
    let outs = a.out_modes();
    let ins = a.in_modes();
    let bmodes = b.mode_sizes();
    for site in 0..n {
        if outs[site] != ins[site] {
            return Err(SolverError::NotSquare {
                site,
                out: outs[site],
                r#in: ins[site],
            });
        }
        if ins[site] != bmodes[site] {
            return Err(SolverError::ModeMismatch {
                site,
                op: ins[site],
                vec: bmodes[site],
            });
        }
    }
    match &cfg.initial_guess {
        Some(g) => {
            if g.n_sites() != n {
                return Err(SolverError::GuessSites {
                    expected: n,
                    found: g.n_sites(),
                });
            }
            let gm = g.mode_sizes();
            for site in 0..n {
                if gm[site] != bmodes[site] {
                    return Err(SolverError::GuessModes {
                        site,
                        expected: bmodes[site],
                        found: gm[site],
                    });
                }
            }
            Ok(g.clone())
        }
        None => Ok(b.clone()),
    }
}

fn run(
    a: &TTOperator,
    b: &TTVector,
    cfg: &SolverConfig,
    enrich: bool,
) -> Result<(TTVector, SolveReport), SolverError> {
    let t_total = Instant::now();
    let x0 = validate(a, b, cfg)?;
    let n = a.n_sites();
    let modes = b.mode_sizes();
    let b_norm = b.norm();
    if b_norm == 0.0 {
        let elapsed = t_total.elapsed().as_secs_f64() * 1e3;
        return Ok((
            TTVector::zeros(&modes),
            SolveReport {
                sweeps_used: 0,
                converged: true,
                residual_history: Vec::new(),
                rank_history: Vec::new(),
                timings: SolveTimings {
                    setup_ms: elapsed,
                    sweep_ms: Vec::new(),
                    total_ms: elapsed,
                },
                site_iterates: Vec::new(),
            },
        ));
    }

    let x0 = x0.orthogonalize(0);
    let z0 =
        enrich.then(|| TTVector::random(&modes, cfg.enrichment_rank, cfg.seed).orthogonalize(0));
    let mut sw = Sweeper::new(a, b, cfg, &x0, z0.as_ref());
    let setup_ms = t_total.elapsed().as_secs_f64() * 1e3;

    let eps = cfg.rel_tolerance;
    let eps_bond = if n > 1 {
        eps / ((n - 1) as f64).sqrt()
    } else {
        eps
    };
    let mut sweep_ms = Vec::new();
    let mut residual_history = Vec::new();
    let mut rank_history = Vec::new();
    let mut converged = false;
    let mut sweeps_used = 0;

    while sweeps_used < cfg.max_sweeps {
        let t_sweep = Instant::now();
        for site in 0..n.saturating_sub(1) {
            if enrich {
                sw.forward_step(site, eps_bond)?;
            } else {
                sw.forward_dmrg(site)?;
            }
        }
        for site in (1..n).rev() {
            if enrich {
                sw.backward_step(site, eps_bond)?;
            } else {
                sw.backward_dmrg(site)?;
            }
        }
        sw.solve_center(0)?;
        sweeps_used += 1;
        let resid = sw.true_residual(b_norm, eps / 10.0)?;
        residual_history.push(resid);
        rank_history.push(sw.profile());
        sweep_ms.push(t_sweep.elapsed().as_secs_f64() * 1e3);
        if resid <= eps {
            converged = true;
            break;
        }
    }

    let x = TTVector::from_cores_unchecked(sw.x.clone(), Some(0));
    let report = SolveReport {
        sweeps_used,
        converged,
        residual_history,
        rank_history,
        timings: SolveTimings {
            setup_ms,
            sweep_ms,
            total_ms: t_total.elapsed().as_secs_f64() * 1e3,
        },
        site_iterates: std::mem::take(&mut sw.iterates),
    };
    Ok((x, report))
}

/// Solve A x = b for Hermitian positive definite A by AMEn: one-site
/// updates, residual-metric truncation, and frame widening from a low-rank
/// residual sketch. Convergence is declared on the true relative residual,
/// recomputed in TT arithmetic after every sweep.
pub fn amen_solve(
    a: &TTOperator,
    b: &TTVector,
    cfg: &SolverConfig,
) -> Result<(TTVector, SolveReport), SolverError> {
    run(a, b, cfg, true)
}

/// The one-site dynamical DMRG baseline: identical local solves and gauge
/// moves, but no truncation and no widening, so the iterate keeps the ranks
/// of the initial guess for the whole run.
pub fn dmrg_solve_one_site(
    a: &TTOperator,
    b: &TTVector,
    cfg: &SolverConfig,
) -> Result<(TTVector, SolveReport), SolverError> {
    run(a, b, cfg, false)
}
