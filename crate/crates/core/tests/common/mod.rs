#![allow(dead_code)]

use rand::Rng;

use clusterfb::stream::StreamKey;

/// Heap's algorithm; calls `visit` once per permutation of `items`.
pub fn for_each_permutation(items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Rank probability by literal enumeration over orderings of the other
/// members: the first `n - 1` of each ordering lie above `r`, the rest below,
/// and each unordered split is counted `(n-1)! (L-n)!` times.
pub fn enumerated_rank_probability(rates: &[f64], m: usize, n: usize, r: f64) -> f64 {
    let l = rates.len();
    let mut others: Vec<usize> = (0..l).filter(|&j| j != m).collect();
    let mut total = 0.0;
    for_each_permutation(&mut others, &mut |perm: &[usize]| {
        let mut term = 1.0;
        for (pos, &j) in perm.iter().enumerate() {
            let above = (-rates[j] * r).exp();
            term *= if pos < n - 1 { above } else { 1.0 - above };
        }
        total += term;
    });
    total / (factorial(n - 1) * factorial(l - n))
}

/// `∏ (1 - e^{-λ x})`, evaluated directly.
pub fn product_cdf(rates: &[f64], x: f64) -> f64 {
    rates.iter().map(|l| 1.0 - (-l * x).exp()).product()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Channel variances in `(0, 1]` drawn from a labelled stream.
pub fn uniform_variances(users: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = StreamKey::from_seed(seed).stream(index);
    (0..users).map(|_| 1.0 - rng.random::<f64>()).collect()
}

/// Exponential rates spread over two decades.
pub fn random_rates(len: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = StreamKey::from_seed(seed).stream(index);
    (0..len).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect()
}

/// Coefficient of determination of a least-squares line through `(x, y)`.
pub fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (my + slope * (a - mx))).powi(2)).sum();
    1.0 - ss_res / syy
}
