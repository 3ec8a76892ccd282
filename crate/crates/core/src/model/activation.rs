use std::fmt;

use crate::{Error, Result};

/// Smooth activations with a known derivative shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smooth {
    Sigmoid,
    Tanh,
}

impl Smooth {
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Smooth::Sigmoid => sigmoid(t),
            Smooth::Tanh => t.tanh(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Smooth::Sigmoid => {
                let s = sigmoid(t);
                s * (1.0 - s)
            }
            Smooth::Tanh => {
                let th = t.tanh();
                1.0 - th * th
            }
        }
    }

    /// Point where the derivative peaks. Both registered derivatives are
    /// even, increasing below this point and decreasing above it.
    pub fn derivative_peak(self) -> f64 {
        0.0
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Identity,
    Smooth(Smooth),
}

impl Activation {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Relu => t.max(0.0),
            Activation::Identity => t,
            Activation::Smooth(s) => s.apply(t),
        }
    }

    /// Derivative with the ReLU kink taken as active: `relu'(0) = 1`.
    #[inline]
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Activation::Relu => {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Smooth(s) => s.derivative(t),
        }
    }

    pub fn is_piecewise_linear(self) -> bool {
        matches!(self, Activation::Relu | Activation::Identity)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Smooth(Smooth::Sigmoid) => "sigmoid",
            Activation::Smooth(Smooth::Tanh) => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "identity" | "linear" => Ok(Activation::Identity),
            "sigmoid" => Ok(Activation::Smooth(Smooth::Sigmoid)),
            "tanh" => Ok(Activation::Smooth(Smooth::Tanh)),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
