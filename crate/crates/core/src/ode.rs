//! Linear ODE systems du/dt = A(t)u + b(t), augmentation, the Hermitian
//! split and a direct time integrator used as an oracle.

use std::sync::Arc;

use crate::error::{Result, SchrError, Stage};
use crate::linalg::{hermitian_extremes, norm2, BorderedLu, SparseMatrix, TripletBuilder, C64, ONE, ZERO};

pub type MatrixAt = Arc<dyn Fn(f64) -> Result<SparseMatrix> + Send + Sync>;
pub type VectorAt = Arc<dyn Fn(f64) -> Result<Vec<C64>> + Send + Sync>;

#[derive(Clone)]
pub enum MatrixFn {
    Constant(SparseMatrix),
    TimeDependent(MatrixAt),
}

#[derive(Clone)]
pub enum SourceFn {
    Zero,
    Constant(Vec<C64>),
    TimeDependent(VectorAt),
}

/// du/dt = A(t)u + b(t), u(0) = u0.
#[derive(Clone)]
pub struct LinearOdeSystem {
    pub n: usize,
    pub a: MatrixFn,
    pub b: SourceFn,
    pub u0: Vec<C64>,
}

impl std::fmt::Debug for LinearOdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearOdeSystem")
            .field("n", &self.n)
            .field("constant", &self.is_constant())
            .field("has_source", &self.has_source())
            .finish()
    }
}

impl LinearOdeSystem {
    pub fn new(a: MatrixFn, b: SourceFn, u0: Vec<C64>) -> Result<Self> {
        let n = u0.len();
        if n == 0 {
            return Err(SchrError::InvalidInput("empty state".into()));
        }
        if let MatrixFn::Constant(m) = &a {
            if m.nrows() != n || m.ncols() != n {
                return Err(SchrError::Shape { expected: n, got: m.nrows().max(m.ncols()) });
            }
        }
        if let SourceFn::Constant(v) = &b {
            if v.len() != n {
                return Err(SchrError::Shape { expected: n, got: v.len() });
            }
        }
        Ok(LinearOdeSystem { n, a, b, u0 })
    }

    /// Constant homogeneous system.
    pub fn homogeneous(a: SparseMatrix, u0: Vec<C64>) -> Result<Self> {
        Self::new(MatrixFn::Constant(a), SourceFn::Zero, u0)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.a, MatrixFn::Constant(_))
    }

    pub fn has_source(&self) -> bool {
        !matches!(self.b, SourceFn::Zero)
    }

    pub fn a_at(&self, t: f64) -> Result<SparseMatrix> {
        let m = match &self.a {
            MatrixFn::Constant(m) => m.clone(),
            MatrixFn::TimeDependent(f) => f(t)?,
        };
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(SchrError::Shape { expected: self.n, got: m.nrows() });
        }
        Ok(m)
    }

    pub fn b_at(&self, t: f64) -> Result<Option<Vec<C64>>> {
        let v = match &self.b {
            SourceFn::Zero => return Ok(None),
            SourceFn::Constant(v) => v.clone(),
            SourceFn::TimeDependent(f) => f(t)?,
        };
        if v.len() != self.n {
            return Err(SchrError::Shape { expected: self.n, got: v.len() });
        }
        Ok(Some(v))
    }
}

/// A = H1 + i·H2 with H1, H2 Hermitian.
#[derive(Clone, Debug)]
pub struct HermitianPair {
    pub h1: SparseMatrix,
    pub h2: SparseMatrix,
}

impl HermitianPair {
    pub fn n(&self) -> usize {
        self.h1.nrows()
    }

    pub fn reconstruct(&self) -> SparseMatrix {
        SparseMatrix::lin_comb(ONE, &self.h1, crate::linalg::I, &self.h2)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[C64] {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Homogeneous (n+1)-system [[A, b],[0, 0]] with initial state [u0; 1].
pub fn augment(system: &LinearOdeSystem) -> LinearOdeSystem {
    augment_scaled(system, 1.0)
}

/// Augmentation with auxiliary value θ: [[A, b/θ],[0, 0]], initial [u0; θ].
/// The first n components are unchanged, the last stays θ. A large θ keeps
/// the coupling column small when ‖b‖ is large.
pub fn augment_scaled(system: &LinearOdeSystem, theta: f64) -> LinearOdeSystem {
    assert!(theta > 0.0, "augmentation scale must be positive");
    let n = system.n;
    let inner = system.clone();
    let build = move |t: f64| -> Result<SparseMatrix> {
        let a = inner.a_at(t)?;
        let b = inner.b_at(t)?;
        let mut tb = TripletBuilder::with_capacity(n + 1, n + 1, a.nnz() + n);
        for (i, j, v) in a.iter() {
            tb.push(i, j, v);
        }
        if let Some(b) = b {
            for (i, v) in b.into_iter().enumerate() {
                if v != ZERO {
                    tb.push(i, n, v / theta);
                }
            }
        }
        Ok(tb.build())
    };
    let a = match (&system.a, &system.b) {
        (MatrixFn::Constant(_), SourceFn::Zero | SourceFn::Constant(_)) => {
            MatrixFn::Constant(build(0.0).expect("constant data cannot fail"))
        }
        _ => MatrixFn::TimeDependent(Arc::new(build)),
    };
    let mut u0 = system.u0.clone();
    u0.push(C64::new(theta, 0.0));
    LinearOdeSystem { n: n + 1, a, b: SourceFn::Zero, u0 }
}

/// H1 = (A + A†)/2, H2 = (A − A†)/(2i).
pub fn hermitian_split(a: &SparseMatrix) -> Result<HermitianPair> {
    if !a.is_square() {
        return Err(SchrError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    let mut t1 = TripletBuilder::with_capacity(n, n, 2 * a.nnz());
    let mut t2 = TripletBuilder::with_capacity(n, n, 2 * a.nnz());
    // each (i,j) pair is computed from the same two entries so the results
    // are exactly Hermitian
    for (i, j, v) in a.iter() {
        let w = a.get(j, i);
        if i < j && w != ZERO {
            continue; // handled when visiting (j, i)
        }
        let (h1, h2) = split_pair(v, w);
        t1.push(i, j, h1);
        t2.push(i, j, h2);
        if i != j {
            t1.push(j, i, h1.conj());
            t2.push(j, i, h2.conj());
        }
    }
    Ok(HermitianPair { h1: t1.build(), h2: t2.build() })
}

// entries (i,j) of H1, H2 given a_ij and a_ji
fn split_pair(aij: C64, aji: C64) -> (C64, C64) {
    let s = aij + aji.conj();
    let d = aij - aji.conj();
    (C64::new(s.re * 0.5, s.im * 0.5), C64::new(d.im * 0.5, -d.re * 0.5))
}

#[derive(Clone, Copy, Debug)]
pub struct DissipativityReport {
    pub max_eigenvalue: f64,
    pub ok: bool,
}

pub fn check_dissipativity(pair: &HermitianPair, tol: f64) -> Result<DissipativityReport> {
    let (_, hi) = hermitian_extremes(&pair.h1)?;
    let ok = hi <= tol;
    if !ok {
        log::warn!("H1 has a positive eigenvalue {hi:.3e}; the system is not dissipative");
    }
    Ok(DissipativityReport { max_eigenvalue: hi, ok })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScheme {
    BackwardEuler,
    ForwardEuler,
}

pub fn direct_integrate(system: &LinearOdeSystem, scheme: TimeScheme, t_end: f64, nt: usize) -> Result<Trajectory> {
    direct_integrate_inner(system, scheme, t_end, nt).map_err(|e| e.at(Stage::Direct))
}

fn direct_integrate_inner(system: &LinearOdeSystem, scheme: TimeScheme, t_end: f64, nt: usize) -> Result<Trajectory> {
    if !(t_end >= 0.0) || nt == 0 {
        return Err(SchrError::InvalidInput(format!("need T >= 0 and Nt >= 1 (T = {t_end}, Nt = {nt})")));
    }
    let n = system.n;
    let dt = t_end / nt as f64;
    let mut times = Vec::with_capacity(nt + 1);
    let mut states = Vec::with_capacity(nt + 1);
    let mut u = system.u0.clone();
    times.push(0.0);
    states.push(u.clone());
    let step_matrix = |a: &SparseMatrix| SparseMatrix::lin_comb(ONE, &SparseMatrix::identity(n), C64::new(-dt, 0.0), a);
    let mut cached: Option<BorderedLu> = None;
    for m in 0..nt {
        let t0 = dt * m as f64;
        let t1 = dt * (m + 1) as f64;
        match scheme {
            TimeScheme::BackwardEuler => {
                let mut rhs = u.clone();
                if let Some(b) = system.b_at(t1)? {
                    for (r, bi) in rhs.iter_mut().zip(b) {
                        *r += bi * dt;
                    }
                }
                if cached.is_none() || !system.is_constant() {
                    let a = system.a_at(t1)?;
                    let lu = BorderedLu::factor(&step_matrix(&a))
                        .map_err(|_| SchrError::Singular { step: m + 1, mode: None })?;
                    cached = Some(lu);
                }
                cached.as_ref().unwrap().solve_in_place(&mut rhs);
                u = rhs;
            }
            TimeScheme::ForwardEuler => {
                let a = system.a_at(t0)?;
                let mut du = a.matvec(&u);
                if let Some(b) = system.b_at(t0)? {
                    for (d, bi) in du.iter_mut().zip(b) {
                        *d += bi;
                    }
                }
                for (ui, d) in u.iter_mut().zip(du) {
                    *ui += d * dt;
                }
            }
        }
        if u.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SchrError::Singular { step: m + 1, mode: None });
        }
        times.push(t1);
        states.push(u.clone());
    }
    Ok(Trajectory { times, states })
}

/// Relative ℓ² distance ‖x − y‖ / ‖y‖.
pub fn relative_l2(x: &[C64], y: &[C64]) -> f64 {
    let d: Vec<C64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm2(&d) / norm2(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn scalar(a: f64) -> SparseMatrix {
        SparseMatrix::from_real_rows(&[vec![a]])
    }

    #[test]
    fn augment_zero_source_appends_decoupled_constant() {
        let s = LinearOdeSystem::homogeneous(scalar(-1.0), vec![c(2.0)]).unwrap();
        let a = augment(&s);
        assert_eq!(a.n, 2);
        let m = a.a_at(0.0).unwrap().to_dense();
        assert_eq!(m[(0, 0)], c(-1.0));
        assert_eq!(m[(0, 1)], ZERO);
        assert_eq!(m[(1, 1)], ZERO);
        assert_eq!(a.u0, vec![c(2.0), c(1.0)]);
        assert!(!a.has_source());
    }

    #[test]
    fn augmented_unit_source_gives_linear_growth() {
        let s = LinearOdeSystem::new(MatrixFn::Constant(scalar(0.0)), SourceFn::Constant(vec![c(1.0)]), vec![c(0.0)])
            .unwrap();
        let tr = direct_integrate(&augment(&s), TimeScheme::BackwardEuler, 1.0, 100).unwrap();
        // A = 0 makes both schemes exact for u = t
        assert!((tr.last()[0] - c(1.0)).norm() < 1e-12);
        assert!((tr.last()[1] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn split_rotation_example() {
        let a = SparseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let p = hermitian_split(&a).unwrap();
        assert_eq!(p.h1.nnz(), 0);
        let h2 = p.h2.to_dense();
        assert_eq!(h2[(0, 1)], -I);
        assert_eq!(h2[(1, 0)], I);
        assert_eq!(h2[(0, 0)], ZERO);
    }

    #[test]
    fn split_of_symmetric_has_zero_h2() {
        let a = SparseMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, -3.0]]);
        assert_eq!(hermitian_split(&a).unwrap().h2.nnz(), 0);
    }

    #[test]
    fn split_rejects_rectangular() {
        let a = SparseMatrix::from_real_rows(&[vec![1.0, 2.0]]);
        assert!(matches!(hermitian_split(&a), Err(SchrError::NotSquare { .. })));
    }

    #[test]
    fn dissipativity_examples() {
        let zero = HermitianPair { h1: SparseMatrix::zeros(2, 2), h2: SparseMatrix::zeros(2, 2) };
        let r = check_dissipativity(&zero, 0.0).unwrap();
        assert_eq!(r.max_eigenvalue, 0.0);
        assert!(r.ok);
        let pos = HermitianPair { h1: scalar(1.0), h2: SparseMatrix::zeros(1, 1) };
        assert!(!check_dissipativity(&pos, 1e-10).unwrap().ok);
    }

    #[test]
    fn backward_euler_scalar_decay() {
        let s = LinearOdeSystem::homogeneous(scalar(-1.0), vec![c(1.0)]).unwrap();
        let tr = direct_integrate(&s, TimeScheme::BackwardEuler, 1.0, 1000).unwrap();
        assert!((tr.last()[0].re - (-1f64).exp()).abs() < 1e-3);
        assert_eq!(tr.times.len(), 1001);
    }

    #[test]
    fn zero_system_is_constant() {
        let s = LinearOdeSystem::homogeneous(SparseMatrix::zeros(2, 2), vec![c(1.0), I]).unwrap();
        for scheme in [TimeScheme::BackwardEuler, TimeScheme::ForwardEuler] {
            let tr = direct_integrate(&s, scheme, 2.0, 7).unwrap();
            assert!(tr.states.iter().all(|u| u == &s.u0));
        }
    }

    #[test]
    fn forward_euler_uses_start_of_step() {
        // du/dt = t, one step from 0 gives 0
        let s = LinearOdeSystem::new(
            MatrixFn::Constant(scalar(0.0)),
            SourceFn::TimeDependent(Arc::new(|t| Ok(vec![c(t)]))),
            vec![c(0.0)],
        )
        .unwrap();
        let fe = direct_integrate(&s, TimeScheme::ForwardEuler, 1.0, 1).unwrap();
        let be = direct_integrate(&s, TimeScheme::BackwardEuler, 1.0, 1).unwrap();
        assert_eq!(fe.last()[0], c(0.0));
        assert_eq!(be.last()[0], c(1.0));
    }

    #[test]
    fn singular_step_is_reported() {
        // I − Δt·A = 0 for A = 1/Δt
        let s = LinearOdeSystem::homogeneous(scalar(2.0), vec![c(1.0)]).unwrap();
        let e = direct_integrate(&s, TimeScheme::BackwardEuler, 0.5, 1).unwrap_err();
        assert!(matches!(e.root(), SchrError::Singular { step: 1, .. }));
    }
}
