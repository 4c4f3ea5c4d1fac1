use super::{BoxDomain, ScalarField};

/// Second-order Neumann Laplacian with reflected ghost cells: the ghost
/// value beyond each face equals the adjacent interior value, so the
/// boundary flux vanishes.
pub fn neumann_laplacian_apply(field: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; field.values().len()];
    apply_into(field.domain(), field.values(), &mut out);
    ScalarField::new(field.domain().clone(), out).expect("same shape")
}

/// `out = Lap_h u` on raw cell arrays.
pub(crate) fn apply_into(domain: &BoxDomain, u: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for axis in 0..domain.dim() {
        let n = domain.cells()[axis];
        let stride = domain.strides()[axis];
        let inv_h2 = 1.0 / (domain.spacing()[axis] * domain.spacing()[axis]);
        for (k, o) in out.iter_mut().enumerate() {
            let j = (k / stride) % n;
            let c = u[k];
            let prev = if j == 0 { c } else { u[k - stride] };
            let next = if j + 1 == n { c } else { u[k + stride] };
            *o += (prev - 2.0 * c + next) * inv_h2;
        }
    }
}

/// `out = u - a Lap_h u`.
pub(crate) fn apply_helmholtz_into(domain: &BoxDomain, a: f64, u: &[f64], out: &mut [f64]) {
    apply_into(domain, u, out);
    for (o, v) in out.iter_mut().zip(u) {
        *o = v - a * *o;
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    #[test]
    fn constant_maps_to_zero() {
        let d = Arc::new(BoxDomain::new(vec![1.0, 2.0], vec![5, 3]).unwrap());
        let lap = neumann_laplacian_apply(&ScalarField::constant(d, 4.2));
        assert!(lap.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hat_in_one_dimension() {
        let d = Arc::new(BoxDomain::new(vec![3.0], vec![3]).unwrap());
        let u = ScalarField::new(d, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(neumann_laplacian_apply(&u).values(), &[1.0, -2.0, 1.0]);
    }
}
