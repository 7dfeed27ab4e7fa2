use super::Param;

/// A model with a scalar loss that can be probed by finite differences.
pub trait GradCheckable {
    /// Parameters in a stable order.
    fn params_mut(&mut self) -> Vec<&mut Param<f64>>;
    /// Loss only.
    fn loss(&mut self) -> f64;
    /// Zeroes gradients, then runs forward and backward; returns the loss.
    fn loss_and_grad(&mut self) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamReport {
    pub name: String,
    pub worst_index: usize,
    pub worst_rel_error: f64,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub checked: usize,
    pub per_param: Vec<ParamReport>,
}

impl GradReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }

    pub fn worst(&self) -> Option<&ParamReport> {
        self.per_param
            .iter()
            .max_by(|a, b| a.worst_rel_error.total_cmp(&b.worst_rel_error))
    }
}

/// Gradients smaller than this are compared absolutely. Central differences
/// at h = 1e-5 carry about 1e-11 of rounding noise, which would otherwise
/// dominate the ratio for gradients that are exactly zero (e.g. the bias of
/// a layer feeding batch norm).
const REL_FLOOR: f64 = 1e-6;

fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// Compares analytic gradients against central differences with step `h`
/// over every parameter entry.
pub fn gradient_check<M: GradCheckable>(model: &mut M, h: f64, tolerance: f64) -> GradReport {
    model.loss_and_grad();
    let analytic: Vec<(String, Vec<f64>)> = model
        .params_mut()
        .into_iter()
        .map(|p| (p.name.clone(), p.grad.data().to_vec()))
        .collect();

    let mut per_param = Vec::with_capacity(analytic.len());
    let mut checked = 0;
    for (pi, (name, grads)) in analytic.iter().enumerate() {
        let mut worst = ParamReport {
            name: name.clone(),
            worst_index: 0,
            worst_rel_error: 0.0,
            analytic: 0.0,
            numeric: 0.0,
        };
        for (i, &g) in grads.iter().enumerate() {
            let original = model.params_mut()[pi].value.data()[i];
            model.params_mut()[pi].value.data_mut()[i] = original + h;
            let up = model.loss();
            model.params_mut()[pi].value.data_mut()[i] = original - h;
            let down = model.loss();
            model.params_mut()[pi].value.data_mut()[i] = original;
            let numeric = (up - down) / (2.0 * h);
            let err = rel_error(g, numeric);
            if err > worst.worst_rel_error || i == 0 {
                worst.worst_index = i;
                worst.worst_rel_error = err;
                worst.analytic = g;
                worst.numeric = numeric;
            }
            checked += 1;
        }
        per_param.push(worst);
    }
    let max_rel_error = per_param.iter().map(|p| p.worst_rel_error).fold(0.0, f64::max);
    GradReport {
        max_rel_error,
        tolerance,
        checked,
        per_param,
    }
}
