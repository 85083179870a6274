//! Finite-difference semi-discretisations that turn the boundary and
//! interface problems into linear ODE systems.

use std::sync::Arc;

use crate::error::{Result, SchrError};
use crate::linalg::{SparseMatrix, TripletBuilder, C64};
use crate::ode::{LinearOdeSystem, MatrixFn, SourceFn};

/// Uniform mesh x_j = a + j·dx, j = 0..=Nx.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh1D {
    pub a: f64,
    pub b: f64,
    pub nx: usize,
    pub dx: f64,
}

impl Mesh1D {
    pub fn new(a: f64, b: f64, nx: usize) -> Result<Self> {
        if !(a < b) || nx == 0 {
            return Err(SchrError::InvalidInput(format!("mesh needs a < b and Nx >= 1 (a = {a}, b = {b}, Nx = {nx})")));
        }
        Ok(Mesh1D { a, b, nx, dx: (b - a) / nx as f64 })
    }

    pub fn x(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nx).map(|j| self.x(j)).collect()
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Boundary data g(t); `Zero` lets builders emit b ≡ 0.
#[derive(Clone)]
pub enum Boundary {
    Zero,
    Fn(ScalarFn),
}

impl Boundary {
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Boundary::Fn(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Boundary::Zero => 0.0,
            Boundary::Fn(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Boundary::Zero)
    }
}

fn real_vec(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn sampled(xs: impl Iterator<Item = f64>, u0: &dyn Fn(f64) -> f64) -> Vec<C64> {
    xs.map(|x| C64::new(u0(x), 0.0)).collect()
}

fn source_from(n: usize, f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> SourceFn {
    SourceFn::TimeDependent(Arc::new(move |t| {
        let v = f(t);
        debug_assert_eq!(v.len(), n);
        Ok(real_vec(&v))
    }))
}

/// Upwind u_t + u_x = 0 with inflow at x = a. Unknowns at x_1..x_Nx, the
/// upwind row is applied at the right endpoint as well.
pub fn build_convection_inflow(mesh: &Mesh1D, inflow: Boundary, u0: &dyn Fn(f64) -> f64) -> Result<LinearOdeSystem> {
    let n = mesh.nx;
    let dx = mesh.dx;
    let mut t = TripletBuilder::new(n, n);
    for i in 0..n {
        t.push_real(i, i, -1.0 / dx);
        if i > 0 {
            t.push_real(i, i - 1, 1.0 / dx);
        }
    }
    let b = match inflow {
        Boundary::Zero => SourceFn::Zero,
        g => source_from(n, move |s| {
            let mut v = vec![0.0; n];
            v[0] = g.at(s) / dx;
            v
        }),
    };
    LinearOdeSystem::new(MatrixFn::Constant(t.build()), b, sampled((1..=n).map(|j| mesh.x(j)), u0))
}

/// Default cap on the size of Kronecker-sum assemblies.
pub const KRON_CAP: usize = 1 << 22;

/// A ⊗ I ⊗ … ⊗ I + … + I ⊗ … ⊗ I ⊗ A with d terms.
pub fn build_kron_sum(a: &SparseMatrix, d: usize, cap: usize) -> Result<SparseMatrix> {
    if d == 0 {
        return Err(SchrError::InvalidInput("dimension must be >= 1".into()));
    }
    if !a.is_square() {
        return Err(SchrError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    let size = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(n)).unwrap_or(usize::MAX);
    if size > cap {
        return Err(SchrError::SizeCap { size, cap });
    }
    let mut total = SparseMatrix::zeros(size, size);
    for k in 0..d {
        let left = SparseMatrix::identity(n.pow(k as u32));
        let right = SparseMatrix::identity(n.pow((d - 1 - k) as u32));
        let term = SparseMatrix::kron(&SparseMatrix::kron(&left, a), &right);
        total = SparseMatrix::lin_comb(C64::new(1.0, 0.0), &total, C64::new(1.0, 0.0), &term);
    }
    Ok(total)
}

fn laplacian(n: usize, dx: f64) -> TripletBuilder {
    let s = 1.0 / (dx * dx);
    let mut t = TripletBuilder::new(n, n);
    for i in 0..n {
        t.push_real(i, i, -2.0 * s);
        if i > 0 {
            t.push_real(i, i - 1, s);
        }
        if i + 1 < n {
            t.push_real(i, i + 1, s);
        }
    }
    t
}

/// Central differences for u_t = u_xx with Dirichlet data; unknowns
/// x_1..x_{Nx−1}.
pub fn build_heat_dirichlet(
    mesh: &Mesh1D,
    g_left: Boundary,
    g_right: Boundary,
    u0: &dyn Fn(f64) -> f64,
) -> Result<LinearOdeSystem> {
    if mesh.nx < 2 {
        return Err(SchrError::InvalidInput("heat Dirichlet needs Nx >= 2".into()));
    }
    let n = mesh.nx - 1;
    let s = 1.0 / (mesh.dx * mesh.dx);
    let b = if g_left.is_zero() && g_right.is_zero() {
        SourceFn::Zero
    } else {
        source_from(n, move |t| {
            let mut v = vec![0.0; n];
            v[0] += s * g_left.at(t);
            v[n - 1] += s * g_right.at(t);
            v
        })
    };
    LinearOdeSystem::new(
        MatrixFn::Constant(laplacian(n, mesh.dx).build()),
        b,
        sampled((1..mesh.nx).map(|j| mesh.x(j)), u0),
    )
}

/// Dirichlet g at a, Neumann h at b through a ghost node that is then
/// eliminated; unknowns x_1..x_Nx.
pub fn build_heat_mixed(mesh: &Mesh1D, g: Boundary, h: Boundary, u0: &dyn Fn(f64) -> f64) -> Result<LinearOdeSystem> {
    if mesh.nx < 2 {
        return Err(SchrError::InvalidInput("heat mixed needs Nx >= 2".into()));
    }
    let n = mesh.nx;
    let dx = mesh.dx;
    let s = 1.0 / (dx * dx);
    let mut t = laplacian(n, dx);
    // ghost elimination doubles the last sub-diagonal entry
    t.push_real(n - 1, n - 2, s);
    let b = if g.is_zero() && h.is_zero() {
        SourceFn::Zero
    } else {
        source_from(n, move |tt| {
            let mut v = vec![0.0; n];
            v[0] += s * g.at(tt);
            v[n - 1] += s * 2.0 * h.at(tt) * dx;
            v
        })
    };
    LinearOdeSystem::new(MatrixFn::Constant(t.build()), b, sampled((1..=n).map(|j| mesh.x(j)), u0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Continuity {
    /// u(0⁺) = u(0⁻)
    Mass,
    /// c⁺u(0⁺) = c⁻u(0⁻)
    Flux,
}

/// Speed jump at x = position with u(x⁺) = ρ·u(x⁻).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceSpec {
    pub position: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub continuity: Continuity,
}

impl InterfaceSpec {
    pub fn rho(&self) -> f64 {
        match self.continuity {
            Continuity::Mass => 1.0,
            Continuity::Flux => self.c_minus / self.c_plus,
        }
    }
}

/// Index helpers for the interface grid: unknown j ∈ −(Nx−1)..=Nx sits at
/// x_j = j·dx and storage index j + Nx − 1.
#[derive(Clone, Copy, Debug)]
pub struct InterfaceGrid {
    pub half: usize,
    pub dx: f64,
}

impl InterfaceGrid {
    pub fn len(&self) -> usize {
        2 * self.half
    }

    pub fn is_empty(&self) -> bool {
        self.half == 0
    }

    pub fn x(&self, idx: usize) -> f64 {
        (idx as f64 - (self.half as f64 - 1.0)) * self.dx
    }

    /// Storage index of the node at x = 0 (carries the left limit u(0⁻)).
    pub fn origin(&self) -> usize {
        self.half - 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }
}

/// Upwind advection u_t + c(x)u_x = 0 on [−a, a] with the speed jump at 0.
/// `mesh` must be symmetric with an even cell count so that 0 is a node.
pub fn build_advection_interface(
    mesh: &Mesh1D,
    spec: &InterfaceSpec,
    inflow: Boundary,
    u0: &dyn Fn(f64) -> f64,
) -> Result<(LinearOdeSystem, InterfaceGrid)> {
    if spec.position != 0.0 || mesh.nx % 2 != 0 || (mesh.a + mesh.b).abs() > 1e-12 * mesh.b.abs().max(1.0) {
        return Err(SchrError::InvalidInput("interface grid must be symmetric about a node at x = 0".into()));
    }
    if !(spec.c_minus > 0.0 && spec.c_plus > 0.0) {
        return Err(SchrError::InvalidInput("interface speeds must be positive".into()));
    }
    let half = mesh.nx / 2;
    let dx = mesh.dx;
    let grid = InterfaceGrid { half, dx };
    let n = grid.len();
    let o = grid.origin();
    let (cm, cp, rho) = (spec.c_minus, spec.c_plus, spec.rho());
    let mut t = TripletBuilder::new(n, n);
    for i in 0..n {
        let c = if i <= o { cm } else { cp };
        t.push_real(i, i, -c / dx);
        if i > 0 {
            let lower = if i == o + 1 { cp * rho } else { c };
            t.push_real(i, i - 1, lower / dx);
        }
    }
    let b = match inflow {
        Boundary::Zero => SourceFn::Zero,
        g => source_from(n, move |s| {
            let mut v = vec![0.0; n];
            v[0] = cm * g.at(s) / dx;
            v
        }),
    };
    let sys = LinearOdeSystem::new(MatrixFn::Constant(t.build()), b, sampled(grid.nodes().into_iter(), u0))?;
    Ok((sys, grid))
}

/// Diffusion with a coefficient jump across a moving interface α(t).
#[derive(Clone)]
pub struct StefanProblem {
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub alpha: ScalarFn,
    pub source: FieldFn,
    pub left: Boundary,
    pub right: Boundary,
}

/// Per-row stencil weights γ_{i,1..3} for rows i = 1..N−1 (stored at i−1)
/// and the interface data.
#[derive(Clone, Debug)]
pub struct StefanCoefficients {
    pub gamma: Vec<[f64; 3]>,
    pub alpha: f64,
    pub k: usize,
    pub d_k: f64,
    pub d_k1: f64,
}

pub fn stefan_coefficients(mesh: &Mesh1D, problem: &StefanProblem, t: f64) -> Result<StefanCoefficients> {
    let n = mesh.nx;
    let h = mesh.dx;
    let alpha = (problem.alpha)(t);
    let kf = ((alpha - mesh.a) / h).floor();
    // interface rows k, k+1 must be interior and x_{k−1}, x_{k+2} must exist
    if !(alpha > mesh.a && alpha < mesh.b) || kf < 1.0 || kf > (n as f64) - 2.0 {
        return Err(SchrError::InterfaceOutside { t, alpha });
    }
    let k = kf as usize;
    let (bm, bp) = (problem.beta_minus, problem.beta_plus);
    let jb = bp - bm;
    let x = |i: usize| mesh.x(i);
    let side = |xh: f64| if xh <= alpha { bm } else { bp };
    let h2 = h * h;
    let mut gamma = Vec::with_capacity(n - 1);
    for i in 1..n {
        let bl = side(x(i) - 0.5 * h);
        let br = side(x(i) + 0.5 * h);
        gamma.push([bl / h2, -(bl + br) / h2, br / h2]);
    }
    let d_k = h2 + jb * (x(k - 1) - alpha) * (x(k) - alpha) / (2.0 * bm);
    let d_k1 = h2 - jb * (x(k + 2) - alpha) * (x(k + 1) - alpha) / (2.0 * bp);
    if !(d_k > 0.0) {
        return Err(SchrError::NonPositiveDenominator { t, k, value: d_k });
    }
    if !(d_k1 > 0.0) {
        return Err(SchrError::NonPositiveDenominator { t, k: k + 1, value: d_k1 });
    }
    gamma[k - 1] = [
        (bm - jb * (x(k) - alpha) / h) / d_k,
        (-2.0 * bm + jb * (x(k - 1) - alpha) / h) / d_k,
        bp / d_k,
    ];
    gamma[k] = [
        bm / d_k1,
        (-2.0 * bp + jb * (x(k + 2) - alpha) / h) / d_k1,
        (bp - jb * (x(k + 1) - alpha) / h) / d_k1,
    ];
    Ok(StefanCoefficients { gamma, alpha, k, d_k, d_k1 })
}

fn stefan_matrix(n_cells: usize, c: &StefanCoefficients) -> SparseMatrix {
    let n = n_cells - 1;
    let mut t = TripletBuilder::with_capacity(n, n, 3 * n);
    for (r, g) in c.gamma.iter().enumerate() {
        t.push_real(r, r, g[1]);
        if r > 0 {
            t.push_real(r, r - 1, g[0]);
        }
        if r + 1 < n {
            t.push_real(r, r + 1, g[2]);
        }
    }
    t.build()
}

/// Time-dependent immersed-interface system on the interior nodes
/// x_1..x_{N−1}.
pub fn build_stefan(mesh: &Mesh1D, problem: &StefanProblem, u0: &dyn Fn(f64) -> f64) -> Result<LinearOdeSystem> {
    if mesh.nx < 4 {
        return Err(SchrError::InvalidInput("Stefan problem needs N >= 4".into()));
    }
    // fail early if the initial configuration is inadmissible
    stefan_coefficients(mesh, problem, 0.0)?;
    let n = mesh.nx - 1;
    let (m1, p1) = (*mesh, problem.clone());
    let a = MatrixFn::TimeDependent(Arc::new(move |t| {
        let c = stefan_coefficients(&m1, &p1, t)?;
        Ok(stefan_matrix(m1.nx, &c))
    }));
    let (m2, p2) = (*mesh, problem.clone());
    let b = SourceFn::TimeDependent(Arc::new(move |t| {
        let c = stefan_coefficients(&m2, &p2, t)?;
        let mut v: Vec<f64> = (1..m2.nx).map(|i| (p2.source)(t, m2.x(i))).collect();
        v[0] += c.gamma[0][0] * p2.left.at(t);
        v[n - 1] += c.gamma[n - 1][2] * p2.right.at(t);
        Ok(real_vec(&v))
    }));
    LinearOdeSystem::new(a, b, sampled((1..mesh.nx).map(|j| mesh.x(j)), u0))
}

/// Jump residuals ([u], [βu_x]) at α(t) from one-sided linear
/// extrapolation of the interior values (x_{k−1}, x_k from the left,
/// x_{k+1}, x_{k+2} from the right).
pub fn stefan_jump_residuals(mesh: &Mesh1D, problem: &StefanProblem, u: &[f64], t: f64) -> Result<(f64, f64)> {
    let c = stefan_coefficients(mesh, problem, t)?;
    let k = c.k;
    let h = mesh.dx;
    // interior storage index i−1 for node i
    let v = |i: usize| u[i - 1];
    let sl = (v(k) - v(k - 1)) / h;
    let sr = (v(k + 2) - v(k + 1)) / h;
    let ul = v(k) + sl * (c.alpha - mesh.x(k));
    let ur = v(k + 1) + sr * (c.alpha - mesh.x(k + 1));
    Ok(((ur - ul).abs(), (problem.beta_plus * sr - problem.beta_minus * sl).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use crate::ode::hermitian_split;
    use std::f64::consts::PI;

    fn dense_re(m: &SparseMatrix) -> Vec<Vec<f64>> {
        let d = m.to_dense();
        (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| d[(i, j)].re).collect()).collect()
    }

    fn zero(_: f64) -> f64 {
        0.0
    }

    #[test]
    fn convection_matrix_small() {
        let mesh = Mesh1D::new(0.0, 3.0, 3).unwrap();
        let s = build_convection_inflow(&mesh, Boundary::Zero, &zero).unwrap();
        assert_eq!(
            dense_re(&s.a_at(0.0).unwrap()),
            vec![vec![-1.0, 0.0, 0.0], vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]]
        );
        assert!(!s.has_source());
    }

    #[test]
    fn convection_inflow_enters_first_row() {
        let mesh = Mesh1D::new(0.0, 10.0, 64).unwrap();
        let s = build_convection_inflow(&mesh, Boundary::from_fn(|t| (-t).exp()), &|x| x.exp()).unwrap();
        let b = s.b_at(0.5).unwrap().unwrap();
        assert!((b[0].re - (-0.5f64).exp() / mesh.dx).abs() < 1e-14);
        assert!(b[1..].iter().all(|v| v.norm() == 0.0));
        assert_eq!(s.u0[0].re, mesh.dx.exp());
    }

    #[test]
    fn kron_sum_examples() {
        let a = SparseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(build_kron_sum(&a, 1, 16).unwrap(), a);
        let k = build_kron_sum(&a, 2, 16).unwrap();
        let expect = vec![
            vec![0.0, 1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ];
        assert_eq!(dense_re(&k), expect);
        assert!(matches!(build_kron_sum(&a, 5, 16), Err(SchrError::SizeCap { .. })));
    }

    #[test]
    fn kron_sum_spectrum_is_pairwise_sums() {
        let a = SparseMatrix::from_real_rows(&[vec![-2.0, 1.0, 0.0], vec![1.0, -2.0, 1.0], vec![0.0, 1.0, -2.0]]);
        let e1 = hermitian_eigenvalues(&a).unwrap();
        let e2 = hermitian_eigenvalues(&build_kron_sum(&a, 2, 100).unwrap()).unwrap();
        let mut sums: Vec<f64> = e1.iter().flat_map(|x| e1.iter().map(move |y| x + y)).collect();
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in sums.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_dirichlet_small_and_row_sums() {
        let mesh = Mesh1D::new(0.0, 3.0, 3).unwrap();
        let s = build_heat_dirichlet(&mesh, Boundary::Zero, Boundary::Zero, &zero).unwrap();
        assert_eq!(dense_re(&s.a_at(0.0).unwrap()), vec![vec![-2.0, 1.0], vec![1.0, -2.0]]);
        assert!(!s.has_source());
        let mesh = Mesh1D::new(0.0, 10.0, 65).unwrap();
        let s = build_heat_dirichlet(&mesh, Boundary::Zero, Boundary::Zero, &zero).unwrap();
        let a = s.a_at(0.0).unwrap();
        for i in 1..63 {
            assert_eq!(a.row(i).map(|(_, v)| v.re).sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn heat_mixed_last_row_and_source() {
        let mesh = Mesh1D::new(0.0, 10.0, 64).unwrap();
        let s = build_heat_mixed(&mesh, Boundary::from_fn(|_| 1.0), Boundary::from_fn(|_| 3.0), &zero).unwrap();
        let a = s.a_at(0.0).unwrap();
        let s2 = 1.0 / (mesh.dx * mesh.dx);
        assert_eq!(a.get(63, 62).re, 2.0 * s2);
        assert_eq!(a.get(63, 63).re, -2.0 * s2);
        let b = s.b_at(0.0).unwrap().unwrap();
        assert_eq!(b[0].re, s2);
        assert!((b[63].re - 6.0 * mesh.dx * s2).abs() < 1e-12);
    }

    #[test]
    fn spectrum_oracles() {
        let mesh = Mesh1D::new(0.0, 10.0, 64).unwrap();
        let s = build_convection_inflow(&mesh, Boundary::Zero, &zero).unwrap();
        let ev = hermitian_eigenvalues(&hermitian_split(&s.a_at(0.0).unwrap()).unwrap().h1).unwrap();
        let mut ex: Vec<f64> = (1..=64)
            .map(|j| -(2.0 / mesh.dx) * (j as f64 * PI / (2.0 * 65.0)).sin().powi(2))
            .collect();
        ex.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&ex) {
            assert!((a - b).abs() <= 1e-10 * b.abs());
        }
    }

    #[test]
    fn interface_rows() {
        // Δx = 1, two unknowns per side: j = −1, 0, 1, 2
        let mesh = Mesh1D::new(-2.0, 2.0, 4).unwrap();
        let spec = InterfaceSpec { position: 0.0, c_minus: 2.0, c_plus: 1.0, continuity: Continuity::Flux };
        let (s, grid) = build_advection_interface(&mesh, &spec, Boundary::Zero, &zero).unwrap();
        assert_eq!(grid.nodes(), vec![-1.0, 0.0, 1.0, 2.0]);
        let a = dense_re(&s.a_at(0.0).unwrap());
        assert_eq!(a[2], vec![0.0, 2.0, -1.0, 0.0]);
        assert_eq!(a[1], vec![2.0, -2.0, 0.0, 0.0]);
        assert_eq!(a[3], vec![0.0, 0.0, 1.0, -1.0]);
    }

    #[test]
    fn interface_without_jump_is_plain_upwind() {
        let mesh = Mesh1D::new(-5.0, 5.0, 10).unwrap();
        let spec = InterfaceSpec { position: 0.0, c_minus: 1.5, c_plus: 1.5, continuity: Continuity::Flux };
        let (s, _) = build_advection_interface(&mesh, &spec, Boundary::Zero, &zero).unwrap();
        let plain = build_convection_inflow(&Mesh1D::new(0.0, 10.0, 10).unwrap(), Boundary::Zero, &zero).unwrap();
        let expect = plain.a_at(0.0).unwrap().scale(C64::new(1.5, 0.0));
        assert_eq!(s.a_at(0.0).unwrap(), expect);
        let odd = Mesh1D::new(-5.0, 5.0, 9).unwrap();
        assert!(build_advection_interface(&odd, &spec, Boundary::Zero, &zero).is_err());
    }

    fn problem(bm: f64, bp: f64, alpha: f64) -> StefanProblem {
        StefanProblem {
            beta_minus: bm,
            beta_plus: bp,
            alpha: Arc::new(move |_| alpha),
            source: Arc::new(|_, _| 0.0),
            left: Boundary::Zero,
            right: Boundary::Zero,
        }
    }

    #[test]
    fn stefan_midway_denominator() {
        // h = 1, x_k = 0 → mesh starting at −k
        let mesh = Mesh1D::new(-3.0, 3.0, 6).unwrap();
        let c = stefan_coefficients(&mesh, &problem(1.0, 2.0, 0.5), 0.0).unwrap();
        assert_eq!(c.k, 3);
        assert!((c.d_k - 1.375).abs() < 1e-15);
        assert!(c.d_k1 > 0.0);
    }

    #[test]
    fn stefan_without_jump_is_heat() {
        let mesh = Mesh1D::new(0.0, 10.0, 20).unwrap();
        let p = problem(1.0, 1.0, 3.3);
        let c = stefan_coefficients(&mesh, &p, 0.0).unwrap();
        assert_eq!(c.d_k, mesh.dx * mesh.dx);
        let s = build_stefan(&mesh, &p, &zero).unwrap();
        let h = build_heat_dirichlet(&mesh, Boundary::Zero, Boundary::Zero, &zero).unwrap();
        let (a, b) = (s.a_at(0.4).unwrap(), h.a_at(0.0).unwrap());
        assert!(SparseMatrix::lin_comb(C64::new(1.0, 0.0), &a, C64::new(-1.0, 0.0), &b).max_abs() < 1e-12);
        assert!(s.b_at(0.4).unwrap().unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn stefan_interface_outside_is_rejected() {
        let mesh = Mesh1D::new(0.0, 10.0, 20).unwrap();
        assert!(matches!(
            stefan_coefficients(&mesh, &problem(1.0, 2.0, 12.0), 0.0),
            Err(SchrError::InterfaceOutside { .. })
        ));
    }
}
