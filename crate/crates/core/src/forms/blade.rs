use super::C64;

/// Bitmask over the 2n coframe indices.
pub type Blade = u16;

/// Sign of e^I ∧ e^J relative to e^{I∪J}; zero if I and J overlap.
pub fn merge_sign(i: Blade, j: Blade) -> i32 {
    if i & j != 0 {
        return 0;
    }
    let mut inv = 0u32;
    let mut jj = j;
    while jj != 0 {
        let b = jj.trailing_zeros();
        inv += (i >> (b + 1)).count_ones();
        jj &= jj - 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// (p,q) type of a complex-frame blade.
pub fn blade_type(n: usize, b: Blade) -> (usize, usize) {
    let lo = (1u16 << n) - 1;
    ((b & lo).count_ones() as usize, (b >> n).count_ones() as usize)
}

/// Indices of a blade in increasing order.
pub fn blade_indices(b: Blade) -> Vec<usize> {
    (0..16).filter(|i| b & (1 << i) != 0).collect()
}

pub fn blade_from(indices: &[usize]) -> Blade {
    indices.iter().fold(0, |acc, i| acc | (1 << i))
}

/// Sign of the permutation sorting `idx` (zero on repeats).
pub fn sort_sign(idx: &[usize]) -> i32 {
    let mut s = 1;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                s = -s;
            }
        }
    }
    s
}

/// Image of a blade under dz^j ↔ dz̄^j, with its reordering sign.
pub fn conj_blade(n: usize, b: Blade) -> (Blade, f64) {
    let img: Vec<usize> = blade_indices(b).into_iter().map(|a| if a < n { a + n } else { a - n }).collect();
    (blade_from(&img), sort_sign(&img) as f64)
}

/// Expand a wedge of 1-forms, each given as a sparse combination of basis indices.
pub fn expand_wedge(factors: &[Vec<(usize, C64)>]) -> Vec<(Blade, C64)> {
    let mut acc: Vec<(Vec<usize>, C64)> = vec![(vec![], C64::new(1.0, 0.0))];
    for f in factors {
        let mut next = Vec::new();
        for (idx, z) in &acc {
            for (a, w) in f {
                if idx.contains(a) {
                    continue;
                }
                let mut v = idx.clone();
                v.push(*a);
                next.push((v, z * w));
            }
        }
        acc = next;
    }
    let mut out: std::collections::BTreeMap<Blade, C64> = Default::default();
    for (idx, z) in acc {
        let s = sort_sign(&idx);
        *out.entry(blade_from(&idx)).or_insert(C64::new(0.0, 0.0)) += z * s as f64;
    }
    out.into_iter().filter(|(_, z)| z.norm() > 0.0).collect()
}

/// Complex-frame image of the real coordinate 1-form dx^{r} (r in 0..2n).
pub fn real_to_complex_1(n: usize, r: usize) -> Vec<(usize, C64)> {
    if r < n {
        vec![(r, C64::new(0.5, 0.0)), (r + n, C64::new(0.5, 0.0))]
    } else {
        let j = r - n;
        vec![(j, C64::new(0.0, -0.5)), (j + n, C64::new(0.0, 0.5))]
    }
}

/// Real-basis image of the complex coframe element e^a.
pub fn complex_to_real_1(n: usize, a: usize) -> Vec<(usize, C64)> {
    if a < n {
        vec![(a, C64::new(1.0, 0.0)), (a + n, C64::new(0.0, 1.0))]
    } else {
        let j = a - n;
        vec![(j, C64::new(1.0, 0.0)), (j + n, C64::new(0.0, -1.0))]
    }
}

/// dx^{I} (real blade) expressed in the complex frame.
pub fn real_blade_to_complex(n: usize, real: Blade) -> Vec<(Blade, C64)> {
    let f: Vec<_> = blade_indices(real).into_iter().map(|r| real_to_complex_1(n, r)).collect();
    expand_wedge(&f)
}

/// e^{I} (complex blade) expressed in the real coordinate basis.
pub fn complex_blade_to_real(n: usize, b: Blade) -> Vec<(Blade, C64)> {
    let f: Vec<_> = blade_indices(b).into_iter().map(|a| complex_to_real_1(n, a)).collect();
    expand_wedge(&f)
}
