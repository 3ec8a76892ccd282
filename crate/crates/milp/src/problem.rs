use crate::{MilpError, Result};

/// Index of a variable inside a [`MilpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Continuous { lo: f64, hi: f64 },
    Binary,
}

impl VarKind {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            VarKind::Continuous { lo, hi } => (lo, hi),
            VarKind::Binary => (0.0, 1.0),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, VarKind::Binary)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    /// Value of the left-hand side at `x`.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub coeffs: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl Objective {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|&(v, c)| c * x[v.0]).sum::<f64>()
    }
}

/// A MILP over bounded continuous and binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
}

impl Default for MilpProblem {
    fn default() -> Self {
        Self::new(Sense::Minimize)
    }
}

impl MilpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense,
                coeffs: Vec::new(),
                constant: 0.0,
            },
        }
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            kind: VarKind::Continuous { lo, hi },
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            kind: VarKind::Binary,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<(VarId, f64)>, constant: f64) {
        self.objective = Objective {
            sense,
            coeffs,
            constant,
        };
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind.is_binary()).count()
    }

    pub fn binary_ids(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind.is_binary())
            .map(|(i, _)| VarId(i))
            .collect()
    }

    /// Variable bounds with binaries relaxed to `[0, 1]`.
    pub fn relaxed_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.variables.iter().map(|v| v.kind.bounds()).unzip()
    }

    /// Largest row violation at `x`, including variable bounds.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        self.variables
            .iter()
            .zip(x)
            .map(|(v, &xi)| {
                let (lo, hi) = v.kind.bounds();
                (lo - xi).max(xi - hi).max(0.0)
            })
            .fold(rows, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(MilpError::NoVariables);
        }
        for (i, v) in self.variables.iter().enumerate() {
            let (lo, hi) = v.kind.bounds();
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(MilpError::InvalidBounds { var: i, lo, hi });
            }
        }
        let n = self.variables.len();
        for (ci, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(MilpError::NonFinite(format!("rhs of constraint {ci}")));
            }
            for &(v, a) in &c.coeffs {
                if v.0 >= n {
                    return Err(MilpError::UnknownVariable {
                        constraint: ci,
                        var: v.0,
                    });
                }
                if !a.is_finite() {
                    return Err(MilpError::NonFinite(format!("constraint {ci}")));
                }
            }
        }
        for &(v, a) in &self.objective.coeffs {
            if v.0 >= n {
                return Err(MilpError::UnknownObjectiveVariable(v.0));
            }
            if !a.is_finite() {
                return Err(MilpError::NonFinite("objective".into()));
            }
        }
        if !self.objective.constant.is_finite() {
            return Err(MilpError::NonFinite("objective constant".into()));
        }
        Ok(())
    }

    /// Dense objective vector in minimization form together with the sign
    /// that maps minimization values back to the problem's sense.
    pub(crate) fn min_form_costs(&self) -> (Vec<f64>, f64) {
        let sign = match self.objective.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut c = vec![0.0; self.variables.len()];
        for &(v, a) in &self.objective.coeffs {
            c[v.0] += sign * a;
        }
        (c, sign)
    }
}
