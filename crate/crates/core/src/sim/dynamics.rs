use faer::Mat;

use crate::grid::Grid;
use crate::model::Configuration;
use crate::params::RodParams;

/// Time derivatives of `(x, y, theta)` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Rates {
    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.theta)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Semi-discrete nonlinear rod dynamics on the interior nodes.
///
/// The state vector is `(X, y, theta)` on the `m = n - 2` interior nodes, with
/// `X = x - nu u` the axial displacement from the compressed base state. The
/// clamped node is zero; the tip node is slaved to the interior through the
/// nonlinear traction conditions `F1(1) = -F`, `F2(1) = 0`, `M(1) = 0`, which
/// amount to `theta'(1) = 0`, `x'(1) = nu cos theta(1)`, `y'(1) = nu sin theta(1)`.
#[derive(Debug, Clone)]
pub struct Dynamics {
    params: RodParams,
    grid: Grid,
    nu: f64,
}

struct Fields {
    c: Vec<f64>,
    s: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    pi: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    v1: Vec<f64>,
    v2: Vec<f64>,
    omega: Vec<f64>,
}

impl Dynamics {
    pub fn new(params: &RodParams, grid: &Grid) -> Self {
        Self {
            params: *params,
            grid: grid.clone(),
            nu: params.nu(),
        }
    }

    pub fn params(&self) -> &RodParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn interior(&self) -> usize {
        self.grid.n() - 2
    }

    pub fn dim(&self) -> usize {
        3 * self.interior()
    }

    /// Interior state of a configuration; clamp and tip values are discarded.
    pub fn pack(&self, config: &Configuration) -> Vec<f64> {
        let m = self.interior();
        let u = self.grid.nodes();
        let mut z = Vec::with_capacity(3 * m);
        z.extend((1..=m).map(|i| config.x[i] - self.nu * u[i]));
        z.extend_from_slice(&config.y[1..=m]);
        z.extend_from_slice(&config.theta[1..=m]);
        z
    }

    /// Full nodal fields `(X, y, theta)` with the boundary closure applied.
    fn lift(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.grid.n();
        let m = n - 2;
        let last = n - 1;
        let d = self.grid.diff1();
        let dnn = d[(last, last)];
        let mut xx = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut th = vec![0.0; n];
        xx[1..=m].copy_from_slice(&z[..m]);
        y[1..=m].copy_from_slice(&z[m..2 * m]);
        th[1..=m].copy_from_slice(&z[2 * m..]);
        let dot = |f: &[f64]| (1..=m).map(|j| d[(last, j)] * f[j]).sum::<f64>();
        th[last] = -dot(&th) / dnn;
        let half = (0.5 * th[last]).sin();
        xx[last] = (-2.0 * self.nu * half * half - dot(&xx)) / dnn;
        y[last] = (self.nu * th[last].sin() - dot(&y)) / dnn;
        (xx, y, th)
    }

    pub fn unpack(&self, z: &[f64]) -> Configuration {
        let (xx, y, theta) = self.lift(z);
        let x = xx.iter().zip(self.grid.nodes()).map(|(v, u)| v + self.nu * u).collect();
        Configuration { x, y, theta }
    }

    /// Tip position `(x(1), y(1))`.
    pub fn tip(&self, z: &[f64]) -> (f64, f64) {
        let (xx, y, _) = self.lift(z);
        let last = self.grid.n() - 1;
        (self.nu + xx[last], y[last])
    }

    fn fields(&self, xx: &[f64], y: &[f64], th: &[f64]) -> Fields {
        let n = self.grid.n();
        let (k1, k2) = (self.params.k1_tilde, self.params.k2_tilde);
        let (g1, g3) = (self.params.gamma1_tilde, self.params.gamma3_tilde);
        let force = self.params.force_tilde;
        let nu = self.nu;
        let xp = self.grid.d1(xx);
        let yp = self.grid.d1(y);
        let pi = self.grid.d1(th);
        let mut c = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut dh1 = vec![0.0; n];
        let mut h2 = vec![0.0; n];
        for i in 0..n {
            let (si, ci) = th[i].sin_cos();
            // cos - 1 without cancellation
            let half = (0.5 * th[i]).sin();
            let cm1 = -2.0 * half * half;
            c[i] = ci;
            s[i] = si;
            dh1[i] = nu * cm1 + ci * xp[i] + si * yp[i];
            h2[i] = -si * (nu + xp[i]) + ci * yp[i];
        }
        let h1: Vec<f64> = dh1.iter().map(|v| nu + v).collect();
        let fh1: Vec<f64> = dh1.iter().map(|v| k1 * v).collect();
        let f1: Vec<f64> = fh1.iter().map(|v| v - force).collect();
        let f2: Vec<f64> = h2.iter().map(|v| k2 * v).collect();
        let dfh1 = self.grid.d1(&fh1);
        let df2 = self.grid.d1(&f2);
        let dpi = self.grid.d1(&pi);
        let mut v1 = vec![0.0; n];
        let mut v2 = vec![0.0; n];
        let mut omega = vec![0.0; n];
        for i in 0..n {
            v1[i] = (dfh1[i] - pi[i] * f2[i]) / g1;
            v2[i] = df2[i] + pi[i] * f1[i];
            omega[i] = (dpi[i] + h1[i] * f2[i] - h2[i] * f1[i]) / g3;
        }
        Fields {
            c,
            s,
            h1,
            h2,
            pi,
            f1,
            f2,
            v1,
            v2,
            omega,
        }
    }

    /// Time derivative of the interior state.
    pub fn rhs(&self, z: &[f64]) -> Vec<f64> {
        let m = self.interior();
        let (xx, y, th) = self.lift(z);
        let f = self.fields(&xx, &y, &th);
        let mut out = vec![0.0; 3 * m];
        for k in 0..m {
            let i = k + 1;
            out[k] = f.c[i] * f.v1[i] - f.s[i] * f.v2[i];
            out[m + k] = f.s[i] * f.v1[i] + f.c[i] * f.v2[i];
            out[2 * m + k] = f.omega[i];
        }
        out
    }

    /// Nodal rates including the slaved tip node (zero at the clamp).
    pub fn rates(&self, z: &[f64]) -> Rates {
        let n = self.grid.n();
        let m = n - 2;
        let last = n - 1;
        let d = self.grid.diff1();
        let dnn = d[(last, last)];
        let dz = self.rhs(z);
        let (_, _, th) = self.lift(z);
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut theta = vec![0.0; n];
        x[1..=m].copy_from_slice(&dz[..m]);
        y[1..=m].copy_from_slice(&dz[m..2 * m]);
        theta[1..=m].copy_from_slice(&dz[2 * m..]);
        let dot = |f: &[f64]| (1..=m).map(|j| d[(last, j)] * f[j]).sum::<f64>();
        theta[last] = -dot(&theta) / dnn;
        let (s, c) = th[last].sin_cos();
        x[last] = (-self.nu * s * theta[last] - dot(&x)) / dnn;
        y[last] = (self.nu * c * theta[last] - dot(&y)) / dnn;
        Rates { x, y, theta }
    }

    /// Exact Jacobian of [`Dynamics::rhs`] at `z`.
    pub fn jacobian(&self, z: &[f64]) -> Mat<f64> {
        let n = self.grid.n();
        let m = n - 2;
        let last = n - 1;
        let cols = 3 * m;
        let d = self.grid.diff1();
        let dnn = d[(last, last)];
        let (k1, k2) = (self.params.k1_tilde, self.params.k2_tilde);
        let (g1, g3) = (self.params.gamma1_tilde, self.params.gamma3_tilde);
        let (xx, y, th) = self.lift(z);
        let f = self.fields(&xx, &y, &th);

        // derivatives of the lifted nodal fields with respect to the state
        let mut lx = Mat::<f64>::zeros(n, cols);
        let mut ly = Mat::<f64>::zeros(n, cols);
        let mut lt = Mat::<f64>::zeros(n, cols);
        for k in 0..m {
            lx[(k + 1, k)] = 1.0;
            ly[(k + 1, m + k)] = 1.0;
            lt[(k + 1, 2 * m + k)] = 1.0;
            let tip = -d[(last, k + 1)] / dnn;
            lx[(last, k)] = tip;
            ly[(last, m + k)] = tip;
            lt[(last, 2 * m + k)] = tip;
        }
        let (st, ct) = (f.s[last], f.c[last]);
        for k in 0..m {
            let dth = lt[(last, 2 * m + k)];
            lx[(last, 2 * m + k)] = -self.nu * st * dth / dnn;
            ly[(last, 2 * m + k)] = self.nu * ct * dth / dnn;
        }

        let dxp = d * &lx;
        let dyp = d * &ly;
        let dpi = d * &lt;
        let mut ddh1 = Mat::<f64>::zeros(n, cols);
        let mut dh2 = Mat::<f64>::zeros(n, cols);
        for j in 0..cols {
            let (xp, yp, t) = (dxp.col_as_slice(j), dyp.col_as_slice(j), lt.col_as_slice(j));
            let a = ddh1.col_as_slice_mut(j);
            for i in 0..n {
                a[i] = f.h2[i] * t[i] + f.c[i] * xp[i] + f.s[i] * yp[i];
            }
            let b = dh2.col_as_slice_mut(j);
            for i in 0..n {
                b[i] = -f.h1[i] * t[i] - f.s[i] * xp[i] + f.c[i] * yp[i];
            }
        }
        let d_dfh1 = d * &ddh1 * k1;
        let d_df2 = d * &dh2 * k2;
        let d_dpi = d * &dpi;

        let xdot: Vec<f64> = (0..n).map(|i| f.c[i] * f.v1[i] - f.s[i] * f.v2[i]).collect();
        let ydot: Vec<f64> = (0..n).map(|i| f.s[i] * f.v1[i] + f.c[i] * f.v2[i]).collect();
        let mut jac = Mat::<f64>::zeros(cols, cols);
        for j in 0..cols {
            let (a, b, p, t) = (ddh1.col_as_slice(j), dh2.col_as_slice(j), dpi.col_as_slice(j), lt.col_as_slice(j));
            let (e1, e2, e3) = (d_dfh1.col_as_slice(j), d_df2.col_as_slice(j), d_dpi.col_as_slice(j));
            let out = jac.col_as_slice_mut(j);
            for k in 0..m {
                let i = k + 1;
                let dfh1 = k1 * a[i];
                let df2 = k2 * b[i];
                let dv1 = (e1[i] - p[i] * f.f2[i] - f.pi[i] * df2) / g1;
                let dv2 = e2[i] + p[i] * f.f1[i] + f.pi[i] * dfh1;
                let dom = (e3[i] + a[i] * f.f2[i] + f.h1[i] * df2 - b[i] * f.f1[i] - f.h2[i] * dfh1) / g3;
                out[k] = f.c[i] * dv1 - f.s[i] * dv2 - ydot[i] * t[i];
                out[m + k] = f.s[i] * dv1 + f.c[i] * dv2 + xdot[i] * t[i];
                out[2 * m + k] = dom;
            }
        }
        jac
    }
}

/// Rates of a clamped configuration under the full nonlinear dynamics.
///
/// Clamp values are taken as zero and the tip values are replaced by the
/// traction closure, so only the interior of `config` matters.
pub fn rhs(config: &Configuration, params: &RodParams, grid: &Grid) -> Rates {
    let dynamics = Dynamics::new(params, grid);
    dynamics.rates(&dynamics.pack(config))
}
