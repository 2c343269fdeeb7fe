use crate::maps::FloatMap;

fn kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Half-sample symmetric reflection: -1 -> 0, n -> n-1.
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - 1 - j;
    }
    j as usize
}

/// Separable Gaussian blur with radius `ceil(3 sigma)` and reflected borders.
/// `sigma <= 0` returns the input unchanged.
pub fn gaussian_blur(m: &FloatMap, sigma: f64) -> FloatMap {
    if !(sigma > 0.0) || m.is_empty() {
        return m.clone();
    }
    let k = kernel(sigma);
    let r = (k.len() / 2) as i64;
    let (w, h) = m.dims();
    let src = m.data();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (t, kv) in k.iter().enumerate() {
                acc += kv * row[reflect(x as i64 + t as i64 - r, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = FloatMap::zeros(w, h);
    let dst = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, kv) in k.iter().enumerate() {
                acc += kv * tmp[reflect(y as i64 + t as i64 - r, h) * w + x];
            }
            dst[y * w + x] = acc;
        }
    }
    out
}
