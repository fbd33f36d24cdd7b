use super::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    Pump,
    G1,
    G2,
}

/// Time profile of one coupling.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// peak · exp(−((t − center)/width)²)
    Gaussian { peak: f64, center: f64, width: f64 },
    /// Value `values[k]` on `[breaks[k], breaks[k+1])`, zero outside.
    /// Intended for tests that need constant couplings.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
}

impl PulseShape {
    pub fn constant(value: f64) -> Self {
        PulseShape::PiecewiseConstant {
            breaks: vec![f64::NEG_INFINITY, f64::INFINITY],
            values: vec![value],
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            PulseShape::Gaussian { peak, center, width } => {
                let x = (t - center) / width;
                peak * (-x * x).exp()
            }
            PulseShape::PiecewiseConstant { breaks, values } => breaks
                .windows(2)
                .zip(values)
                .find(|(w, _)| t >= w[0] && t < w[1])
                .map_or(0.0, |(_, &v)| v),
        }
    }

    /// Whether the shape is zero at every time.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            PulseShape::Gaussian { peak, .. } => *peak == 0.0,
            PulseShape::PiecewiseConstant { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    pub fn center(&self) -> Option<f64> {
        match self {
            PulseShape::Gaussian { center, .. } => Some(*center),
            PulseShape::PiecewiseConstant { .. } => None,
        }
    }
}

/// Pump Ω(t) and cavity couplings g₁(t), g₂(t).
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub pump: PulseShape,
    pub g1: PulseShape,
    pub g2: PulseShape,
}

impl PulseSchedule {
    /// Gaussians centered at δt (pump), 0 (cavity 1) and 2δt (cavity 2).
    pub fn gaussian(params: &PhysicalParams) -> Self {
        Self {
            pump: PulseShape::Gaussian {
                peak: params.omega0,
                center: params.delta_t,
                width: params.tau_p,
            },
            g1: PulseShape::Gaussian {
                peak: params.g10,
                center: 0.0,
                width: params.tau_c,
            },
            g2: PulseShape::Gaussian {
                peak: params.g20,
                center: 2.0 * params.delta_t,
                width: params.tau_c,
            },
        }
    }

    pub fn constant(omega: f64, g1: f64, g2: f64) -> Self {
        Self {
            pump: PulseShape::constant(omega),
            g1: PulseShape::constant(g1),
            g2: PulseShape::constant(g2),
        }
    }

    pub fn shape(&self, which: PulseKind) -> &PulseShape {
        match which {
            PulseKind::Pump => &self.pump,
            PulseKind::G1 => &self.g1,
            PulseKind::G2 => &self.g2,
        }
    }

    pub fn value(&self, which: PulseKind, t: f64) -> f64 {
        self.shape(which).value(t)
    }

    pub fn couplings(&self, t: f64) -> (f64, f64, f64) {
        (self.pump.value(t), self.g1.value(t), self.g2.value(t))
    }

    /// Cavity 1 peaks before the pump, which peaks before cavity 2.
    pub fn is_counterintuitive(&self) -> bool {
        match (self.g1.center(), self.pump.center(), self.g2.center()) {
            (Some(c1), Some(p), Some(c2)) => c1 < p && p < c2,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_landmarks() {
        let p = PhysicalParams::default();
        let s = PulseSchedule::gaussian(&p);
        assert_eq!(s.value(PulseKind::Pump, p.delta_t), p.omega0);
        assert!((s.value(PulseKind::G1, p.tau_c) - p.g10 / std::f64::consts::E).abs() < 1e-14);
        assert_eq!(s.value(PulseKind::G2, 2.0 * p.delta_t), p.g20);
        assert!(s.is_counterintuitive());
    }

    #[test]
    fn coincident_centers_are_not_counterintuitive() {
        let p = PhysicalParams {
            delta_t: 0.0,
            ..Default::default()
        };
        assert!(!PulseSchedule::gaussian(&p).is_counterintuitive());
    }

    #[test]
    fn piecewise_constant_lookup() {
        let shape = PulseShape::PiecewiseConstant {
            breaks: vec![0.0, 1.0, 2.0],
            values: vec![3.0, 4.0],
        };
        assert_eq!(shape.value(-0.5), 0.0);
        assert_eq!(shape.value(0.5), 3.0);
        assert_eq!(shape.value(1.0), 4.0);
        assert_eq!(shape.value(2.0), 0.0);
        assert_eq!(PulseShape::constant(2.0).value(1e9), 2.0);
    }
}
