use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{apply_dirichlet, Constraints, Discretization, SolutionState};
use crate::error::{Error, Result};
use crate::linsolve::LinearSolver;
use crate::material::SolidModel;
use crate::math::sqrt;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iters: usize,
    pub max_step_halvings: u32,
    /// Modified Newton: keep the last factorization, also across steps of
    /// equal size, while each iteration reduces the residual at least by this
    /// factor. `None` refactorizes every iteration.
    pub tangent_reuse: Option<f64>,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_iters: 25,
            max_step_halvings: 4,
            tangent_reuse: None,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("Newton tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("Newton needs at least one iteration".into()));
        }
        if let Some(c) = self.tangent_reuse {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Config(format!(
                    "tangent reuse factor must lie in (0, 1), got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Boundary data at one time level.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepLoads {
    /// Prescribed values of global dofs.
    pub prescribed: Constraints,
    /// External nodal forces on the displacement dofs (N); empty means none.
    pub external: Vec<f64>,
}

/// Time-dependent boundary conditions.
pub trait Loading {
    fn at(&self, t: f64) -> Result<StepLoads>;
}

/// Passed to the observer after every assembly.
#[derive(Debug)]
pub struct IterationInfo<'a> {
    /// Target time of the Newton solve, s.
    pub time: f64,
    pub dt: f64,
    pub iteration: usize,
    pub residual_norm: f64,
    /// Jacobian before constraint elimination.
    pub matrix: &'a CsrMatrix,
}

/// Outcome of one (possibly subdivided) time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub time: f64,
    pub dt: f64,
    /// Linear solves over all substeps.
    pub iterations: usize,
    /// Matrix factorizations over all substeps.
    pub factorizations: usize,
    pub substeps: usize,
    /// Free-dof residual norms of the last substep.
    pub history: Vec<f64>,
}

struct Failure {
    reason: String,
    history: Vec<f64>,
}

type Observer<'o> = Option<&'o mut dyn FnMut(&IterationInfo)>;

/// Newton–Raphson with backward Euler in time and step halving on failure.
pub struct Solver<'a, S, L> {
    pub disc: Discretization<'a, S>,
    pub linear: L,
    pub settings: NewtonSettings,
    // step size and constrained dofs of the factorization held by `linear`
    factored: Option<(f64, Vec<usize>)>,
}

impl<'a, S: SolidModel, L: LinearSolver> Solver<'a, S, L> {
    pub fn new(disc: Discretization<'a, S>, linear: L, settings: NewtonSettings) -> Result<Self> {
        settings.validate()?;
        Ok(Self {
            disc,
            linear,
            settings,
            factored: None,
        })
    }

    /// Advances `prev` by `dt`, halving the step up to
    /// `settings.max_step_halvings` times when Newton fails.
    pub fn step(
        &mut self,
        prev: &SolutionState,
        dt: f64,
        loading: &dyn Loading,
        mut observer: Observer<'_>,
    ) -> Result<(SolutionState, StepReport)> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let mut report = StepReport {
            time: prev.t + dt,
            dt,
            iterations: 0,
            factorizations: 0,
            substeps: 0,
            history: Vec::new(),
        };
        let state = self.subdivide(prev, dt, 0, loading, &mut observer, &mut report)?;
        Ok((state, report))
    }

    fn subdivide(
        &mut self,
        prev: &SolutionState,
        dt: f64,
        depth: u32,
        loading: &dyn Loading,
        observer: &mut Observer<'_>,
        report: &mut StepReport,
    ) -> Result<SolutionState> {
        match self.newton(prev, dt, loading, observer)? {
            Ok((state, iterations, factorizations, history)) => {
                report.iterations += iterations;
                report.factorizations += factorizations;
                report.substeps += 1;
                report.history = history;
                Ok(state)
            }
            Err(fail) if depth >= self.settings.max_step_halvings => Err(Error::StepFailure {
                time: prev.t + dt,
                halvings: depth,
                reason: fail.reason,
                history: fail.history,
            }),
            Err(_) => {
                let half = 0.5 * dt;
                let mid = self.subdivide(prev, half, depth + 1, loading, observer, report)?;
                let mut end = self.subdivide(&mid, half, depth + 1, loading, observer, report)?;
                end.t = prev.t + dt;
                Ok(end)
            }
        }
    }

    /// Inner result is `Err` for failures that a smaller step may cure.
    #[allow(clippy::type_complexity)]
    fn newton(
        &mut self,
        prev: &SolutionState,
        dt: f64,
        loading: &dyn Loading,
        observer: &mut Observer<'_>,
    ) -> Result<core::result::Result<(SolutionState, usize, usize, Vec<f64>), Failure>> {
        let t = prev.t + dt;
        let loads = loading.at(t)?;
        let n = self.disc.dofs.total();
        if !loads.external.is_empty() && loads.external.len() != n {
            return Err(Error::Validation(format!(
                "external force vector has length {}, expected {n}",
                loads.external.len()
            )));
        }
        let mut state = prev.clone();
        state.t = t;
        for (d, v) in loads.prescribed.iter() {
            if d >= n {
                return Err(Error::Validation(format!("constraint on missing dof {d}")));
            }
            state.set_dof(d, v);
        }
        let increments = loads.prescribed.homogeneous();
        let mut history = Vec::new();
        let mut r0 = 0.0;
        let mut factorizations = 0;
        let constrained: Vec<usize> = increments.iter().map(|(d, _)| d).collect();
        for iteration in 0..=self.settings.max_iters {
            let mut sys = match self.disc.assemble(&state, prev, dt) {
                Ok(s) => s,
                Err(e @ (Error::InvertedElement { .. } | Error::Geometry(_))) => {
                    return Ok(Err(Failure {
                        reason: format!("{e}"),
                        history,
                    }))
                }
                Err(e) => return Err(e),
            };
            if !loads.external.is_empty() {
                for (r, f) in sys.residual.iter_mut().zip(&loads.external) {
                    *r -= f;
                }
            }
            let norm = sqrt(
                sys.residual
                    .iter()
                    .enumerate()
                    .filter(|(d, _)| loads.prescribed.get(*d).is_none())
                    .map(|(_, r)| r * r)
                    .sum(),
            );
            if let Some(obs) = observer.as_mut() {
                obs(&IterationInfo {
                    time: t,
                    dt,
                    iteration,
                    residual_norm: norm,
                    matrix: &sys.matrix,
                });
            }
            history.push(norm);
            if !norm.is_finite() {
                return Ok(Err(Failure {
                    reason: "non-finite residual".into(),
                    history,
                }));
            }
            if iteration == 0 {
                r0 = norm;
            }
            if norm <= self.settings.rel_tol * r0 + self.settings.abs_tol
                && (iteration > 0 || norm <= self.settings.abs_tol)
            {
                return Ok(Ok((state, iteration, factorizations, history)));
            }
            if iteration == self.settings.max_iters {
                break;
            }
            let mut rhs: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
            apply_dirichlet(&mut sys.matrix, &mut rhs, &increments)?;
            let reuse = self.settings.tangent_reuse.is_some_and(|c| {
                self.factored
                    .as_ref()
                    .is_some_and(|(h, dofs)| *h == dt && *dofs == constrained)
                    && (iteration == 0 || norm <= c * history[history.len() - 2])
            });
            let solved = if reuse {
                self.linear.solve_in_place(&mut rhs)
            } else {
                self.factored = None;
                factorizations += 1;
                self.linear.factorize(&sys.matrix).and_then(|_| {
                    self.factored = Some((dt, constrained.clone()));
                    self.linear.solve_in_place(&mut rhs)
                })
            };
            if let Err(e) = solved {
                return Ok(Err(Failure {
                    reason: format!("{e}"),
                    history,
                }));
            }
            for (d, delta) in rhs.iter().enumerate() {
                let v = state.dof(d) + delta;
                state.set_dof(d, v);
            }
        }
        Ok(Err(Failure {
            reason: format!(
                "no convergence in {} iterations (last residual {:e})",
                self.settings.max_iters,
                history.last().copied().unwrap_or(f64::NAN)
            ),
            history,
        }))
    }
}

/// Converged states at `t = i·dt`, starting with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<SolutionState>,
    pub reports: Vec<StepReport>,
}

/// Runs `n_steps` steps of size `dt` from `initial`.
pub fn march<S: SolidModel, L: LinearSolver>(
    solver: &mut Solver<'_, S, L>,
    initial: SolutionState,
    n_steps: usize,
    dt: f64,
    loading: &dyn Loading,
    mut observer: Observer<'_>,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut reports = Vec::with_capacity(n_steps);
    states.push(initial);
    for _ in 0..n_steps {
        let prev = states.last().expect("initial state present");
        let obs: Observer<'_> = match observer.as_mut() {
            Some(o) => Some(&mut **o),
            None => None,
        };
        let (next, report) = solver.step(prev, dt, loading, obs)?;
        states.push(next);
        reports.push(report);
    }
    Ok(Trajectory { states, reports })
}
