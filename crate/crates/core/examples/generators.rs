// The three sequence generators, each checked against its defining property.
use episig::datagen::{gen_correlated, gen_uniform, sample_model};
use episig::probmodel::{rational, SymbolModel};

fn main() {
    let n = 200_000;
    let u = gen_uniform(10, n, 1);
    let mut counts = [0usize; 10];
    for &a in u.as_slice() {
        counts[a as usize] += 1;
    }
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - n as f64 / 10.0).powi(2) / (n as f64 / 10.0)).sum();
    println!("uniform: counts {counts:?}, chi-square {chi2:.2} on 9 df");

    // gap from each i < 5 to the next i + 5
    let gaps = |s: &[u32]| {
        let mut gaps = Vec::new();
        for (p, &a) in s.iter().enumerate() {
            if a < 5 {
                if let Some(g) = s[p + 1..].iter().position(|&b| b == a + 5) {
                    gaps.push(g + 1);
                }
            }
        }
        gaps.sort_unstable();
        gaps[gaps.len() / 2]
    };
    let c = gen_correlated(n, 1);
    println!("median gap i -> i+5: correlated {}, uniform {}", gaps(c.as_slice()), gaps(u.as_slice()));

    let model = SymbolModel::new(vec![rational(1, 2), rational(1, 4), rational(1, 4)]).unwrap();
    let s = sample_model(&model, 1_000_000, 1);
    let pa = s.as_slice().iter().filter(|&&a| a == 0).count() as f64 / s.len() as f64;
    println!("model sample: p(a) = {pa:.4}");
}
