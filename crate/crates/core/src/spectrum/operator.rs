use faer::Mat;

use crate::grid::Grid;
use crate::params::RodParams;

/// Boundary condition eliminated from the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRow {
    /// `x = y = theta = 0` at the clamped end.
    Clamp,
    /// `x' = 0` at the tip.
    TipAxial,
    /// `y' - nu theta = 0` at the tip.
    TipShear,
    /// `theta' = 0` at the tip.
    TipMoment,
}

/// Collocation matrix of the linearized dynamics about the base state.
///
/// The state holds the interior nodes of `(x, y, theta)`; the clamped node is
/// zero and the tip node is slaved to the interior through the linearized
/// traction conditions, so the eigenproblem is standard and free of spurious
/// infinite eigenvalues.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    params: RodParams,
    grid: Grid,
    full: Mat<f64>,
    lift: Mat<f64>,
    reduced: Mat<f64>,
    boundary_rows: Vec<(usize, BoundaryRow)>,
}

impl LinearOperator {
    pub fn params(&self) -> &RodParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of interior nodes per field.
    pub fn interior(&self) -> usize {
        self.grid.n() - 2
    }

    /// Operator acting on all `3n` nodal values; boundary rows are meaningless.
    pub fn full(&self) -> &Mat<f64> {
        &self.full
    }

    /// Maps interior values to all nodal values with the boundary conditions applied.
    pub fn lift(&self) -> &Mat<f64> {
        &self.lift
    }

    pub fn reduced(&self) -> &Mat<f64> {
        &self.reduced
    }

    /// The `(y, theta)` block; `x` decouples at linear order.
    pub fn transverse(&self) -> Mat<f64> {
        let m = self.interior();
        self.reduced.submatrix(m, m, 2 * m, 2 * m).to_owned()
    }

    pub fn longitudinal(&self) -> Mat<f64> {
        let m = self.interior();
        self.reduced.submatrix(0, 0, m, m).to_owned()
    }

    /// Full-vector row indices that were eliminated, with the condition each encodes.
    pub fn boundary_rows(&self) -> &[(usize, BoundaryRow)] {
        &self.boundary_rows
    }
}

/// Assemble
/// `gamma1 x_t = k1 x''`,
/// `y_t = k2 y'' - mu theta'`,
/// `gamma3 theta_t = theta'' + mu (y' - nu theta)`.
pub fn assemble_operator(params: &RodParams, grid: &Grid) -> LinearOperator {
    let n = grid.n();
    let last = n - 1;
    let m = n - 2;
    let d = grid.diff1();
    let d2 = grid.diff2();
    let (k1, k2) = (params.k1_tilde, params.k2_tilde);
    let (g1, g3) = (params.gamma1_tilde, params.gamma3_tilde);
    let (nu, mu) = (params.nu(), params.mu());

    let mut full = Mat::<f64>::zeros(3 * n, 3 * n);
    for i in 0..n {
        for j in 0..n {
            full[(i, j)] = k1 / g1 * d2[(i, j)];
            full[(n + i, n + j)] = k2 * d2[(i, j)];
            full[(n + i, 2 * n + j)] = -mu * d[(i, j)];
            full[(2 * n + i, n + j)] = mu / g3 * d[(i, j)];
            full[(2 * n + i, 2 * n + j)] = d2[(i, j)] / g3;
        }
        full[(2 * n + i, 2 * n + i)] -= mu * nu / g3;
    }

    let mut lift = Mat::<f64>::zeros(3 * n, 3 * m);
    for f in 0..3 {
        for j in 0..m {
            lift[(f * n + 1 + j, f * m + j)] = 1.0;
        }
    }
    let dnn = d[(last, last)];
    for j in 0..m {
        let tip = -d[(last, 1 + j)] / dnn;
        lift[(last, j)] = tip;
        lift[(2 * n + last, 2 * m + j)] = tip;
        lift[(n + last, m + j)] = tip;
    }
    for j in 0..m {
        lift[(n + last, 2 * m + j)] = nu * lift[(2 * n + last, 2 * m + j)] / dnn;
    }

    let mut reduced = Mat::<f64>::zeros(3 * m, 3 * m);
    for f in 0..3 {
        for i in 0..m {
            let row = f * n + 1 + i;
            for c in 0..3 * m {
                let mut s = 0.0;
                for k in 0..3 * n {
                    let l = lift[(k, c)];
                    if l != 0.0 {
                        s += full[(row, k)] * l;
                    }
                }
                reduced[(f * m + i, c)] = s;
            }
        }
    }

    let boundary_rows = vec![
        (0, BoundaryRow::Clamp),
        (n, BoundaryRow::Clamp),
        (2 * n, BoundaryRow::Clamp),
        (last, BoundaryRow::TipAxial),
        (n + last, BoundaryRow::TipShear),
        (2 * n + last, BoundaryRow::TipMoment),
    ];

    LinearOperator {
        params: *params,
        grid: grid.clone(),
        full,
        lift,
        reduced,
        boundary_rows,
    }
}
