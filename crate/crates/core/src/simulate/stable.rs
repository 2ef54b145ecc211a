//! Positive stable random variables with Laplace transform E[e^{−sV}] = e^{−s^α}.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Exp1, Open01};

/// Kanter's representation: V = {a(πU)/W}^{(1−α)/α} with U uniform on (0,1)
/// and W unit exponential, where
/// a(u) = sin(αu)^{α/(1−α)} · sin((1−α)u) / sin(u)^{1/(1−α)}.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    assert!(alpha > 0.0 && alpha <= 1.0, "positive stable index must lie in (0, 1]");
    if alpha == 1.0 {
        return 1.0;
    }
    let u: f64 = rng.sample(Open01);
    let w: f64 = rng.sample(Exp1);
    let x = PI * u;
    let a = (alpha * x).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * x).sin() / x.sin().powf(1.0 / (1.0 - alpha));
    (a / w).powf((1.0 - alpha) / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_positive_stable(1.0, &mut rng), 1.0);
    }

    #[test]
    fn laplace_transform() {
        for (alpha, s, seed) in [(0.7, 1.0, 11u64), (0.4, 2.0, 12)] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 100_000;
            let mean: f64 = (0..n).map(|_| (-s * sample_positive_stable(alpha, &mut rng)).exp()).sum::<f64>() / n as f64;
            let want = (-f64::powf(s, alpha)).exp();
            assert!((mean - want).abs() < 0.01, "alpha={alpha} s={s}: {mean} vs {want}");
        }
    }
}
