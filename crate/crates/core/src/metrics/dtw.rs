use crate::error::{invalid, Result};

/// Dynamic time warping with Euclidean local cost, no window, both ends
/// matched. Points of both series must share one dimension.
pub fn dtw(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { Ok(0.0) } else { invalid("dtw of an empty and a nonempty series") };
    }
    let dim = a[0].len();
    if a.iter().chain(b).any(|p| p.len() != dim) {
        return invalid("dtw points differ in dimension");
    }
    let dist = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for p in a {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            cur[j] = dist(p, &b[j - 1]) + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero_and_singletons_are_pointwise() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 0.0]];
        assert_eq!(dtw(&a, &a).unwrap(), 0.0);
        assert_eq!(dtw(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]]).unwrap(), 5.0);
        assert!(dtw(&[vec![1.0]], &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn warping_absorbs_repeats() {
        let a: Vec<Vec<f64>> = [1.0, 2.0, 3.0].iter().map(|&x| vec![x]).collect();
        let b: Vec<Vec<f64>> = [1.0, 2.0, 2.0, 2.0, 3.0].iter().map(|&x| vec![x]).collect();
        assert_eq!(dtw(&a, &b).unwrap(), 0.0);
    }
}
