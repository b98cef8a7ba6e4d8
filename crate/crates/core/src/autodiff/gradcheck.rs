use super::{ParamStore, Tape, Var};
use crate::error::Result;
use crate::linalg::Mat;

/// Denominator floor for the relative error, so coordinates whose true
/// gradient is essentially zero are not judged on rounding noise alone.
pub const DEFAULT_DENOM_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    pub coordinates: usize,
}

/// Compare backward gradients of the scalar `f(inputs)` against central
/// differences with step `h`, for every coordinate of every input.
pub fn grad_check<F>(f: F, inputs: &[Mat], h: f64, floor: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let eval = |xs: &[Mat]| -> Result<f64> {
        let mut t = Tape::new();
        let vs: Vec<Var> = xs.iter().map(|m| t.input(m.clone())).collect();
        let out = f(&mut t, &vs)?;
        Ok(t.scalar(out))
    };
    let mut t = Tape::new();
    let vs: Vec<Var> = inputs.iter().map(|m| t.input(m.clone())).collect();
    let out = f(&mut t, &vs)?;
    t.backward(out)?;
    let analytic: Vec<Mat> = vs
        .iter()
        .zip(inputs)
        .map(|(&v, m)| t.grad(v).cloned().unwrap_or_else(|| Mat::zeros(m.rows, m.cols)))
        .collect();

    let mut xs = inputs.to_vec();
    let mut worst: f64 = 0.0;
    let mut coordinates = 0;
    for k in 0..xs.len() {
        for i in 0..xs[k].data.len() {
            let orig = xs[k].data[i];
            xs[k].data[i] = orig + h;
            let up = eval(&xs)?;
            xs[k].data[i] = orig - h;
            let down = eval(&xs)?;
            xs[k].data[i] = orig;
            let num = (up - down) / (2.0 * h);
            let an = analytic[k].data[i];
            let rel = (an - num).abs() / an.abs().max(num.abs()).max(floor);
            worst = worst.max(rel);
            coordinates += 1;
        }
    }
    Ok(GradCheckReport {
        max_rel_error: worst,
        coordinates,
    })
}

/// The same comparison for the parameters of `store`, perturbing each
/// parameter coordinate in place.
pub fn grad_check_params<F>(f: F, store: &mut ParamStore, h: f64, floor: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &ParamStore) -> Result<Var>,
{
    let mut t = Tape::new();
    let out = f(&mut t, store)?;
    t.backward(out)?;
    let analytic = t.param_grads(store);
    let ids: Vec<_> = store.ids().collect();
    let eval = |s: &ParamStore| -> Result<f64> {
        let mut t = Tape::new();
        let out = f(&mut t, s)?;
        Ok(t.scalar(out))
    };
    let mut worst: f64 = 0.0;
    let mut coordinates = 0;
    for (k, id) in ids.into_iter().enumerate() {
        for i in 0..store.value(id).data.len() {
            let orig = store.value(id).data[i];
            store.value_mut(id).data[i] = orig + h;
            let up = eval(store)?;
            store.value_mut(id).data[i] = orig - h;
            let down = eval(store)?;
            store.value_mut(id).data[i] = orig;
            let num = (up - down) / (2.0 * h);
            let an = analytic[k].as_ref().map_or(0.0, |g| g.data[i]);
            worst = worst.max((an - num).abs() / an.abs().max(num.abs()).max(floor));
            coordinates += 1;
        }
    }
    Ok(GradCheckReport {
        max_rel_error: worst,
        coordinates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_is_exact() {
        let c = Mat::from_vec(2, 2, vec![0.5, -1.0, 2.0, 0.25]);
        let r = grad_check(
            |t, v| {
                let k = t.constant(c.clone());
                let p = t.mul(v[0], k)?;
                Ok(t.sum(p))
            },
            &[Mat::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0])],
            1e-5,
            DEFAULT_DENOM_FLOOR,
        )
        .unwrap();
        assert!(r.max_rel_error < 1e-9, "{r:?}");
        assert_eq!(r.coordinates, 4);
    }
}
