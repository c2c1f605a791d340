//! Error-free transformations: the building blocks of compensated arithmetic.

/// Sum with exact error term, no precondition on magnitudes (Knuth).
#[inline(always)]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Sum with exact error term; requires |a| >= |b| or a == 0 (Dekker).
#[inline(always)]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Product with exact error term via FMA.
#[inline(always)]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p, e)
}

/// Distillation pass: turns an arbitrary slice into an equivalent sequence
/// with the head in front (Ogita-Rump-Oishi VecSum, right to left).
#[inline]
pub fn vec_sum(x: &mut [f64]) {
    let n = x.len();
    if n < 2 {
        return;
    }
    let mut s = x[n - 1];
    for i in (0..n - 1).rev() {
        let (si, ei) = two_sum(x[i], s);
        s = si;
        x[i + 1] = ei;
    }
    x[0] = s;
}

/// Extracts the leading `out.len()` non-overlapping components from a
/// distilled sequence (error-branch renormalization).  `e[0]` must dominate.
#[inline]
pub fn vec_sum_err_branch(e: &[f64], out: &mut [f64]) {
    let m = out.len();
    out.fill(0.0);
    let mut j = 0usize;
    let mut eps = e[0];
    for item in &e[1..] {
        let (r, eps2) = two_sum(eps, *item);
        if eps2 != 0.0 {
            out[j] = r;
            j += 1;
            if j == m {
                return;
            }
            eps = eps2;
        } else {
            eps = r;
        }
    }
    if j < m {
        out[j] = eps;
    }
}

/// Renormalizes `work` in place and writes the leading components to `out`.
/// The distill-and-branch pass needs its input sorted by decreasing
/// magnitude; inputs are usually nearly sorted, so insertion sort is cheap.
#[inline]
pub fn renormalize(work: &mut [f64], out: &mut [f64]) {
    for i in 1..work.len() {
        let x = work[i];
        let mut j = i;
        while j > 0 && work[j - 1].abs() < x.abs() {
            work[j] = work[j - 1];
            j -= 1;
        }
        work[j] = x;
    }
    vec_sum(work);
    vec_sum_err_branch(work, out);
}
