//! Feasibility oracle for degree-bounded pointwise approximation.
//!
//! Question: given a truth table over `m` variables, a monomial set, and a
//! bound `eps`, is there a real coefficient vector whose polynomial stays
//! within `eps` of the table at every point?  This is the Chebyshev LP
//!
//! ```text
//!     min e   s.t.   |Σ_S c_S · [S ⊆ x] − f(x)| ≤ e   for all x
//! ```
//!
//! Small instances (m ≤ 4) go through an exact rational simplex, so the
//! optimum — and hence the minimal feasible degree — is exact.  Larger
//! instances use Lawson's iteratively reweighted least-squares method in
//! f64, exploiting that the normal matrix entries are superset sums over
//! the cube.  Candidate solutions are rounded to dyadic rationals and
//! re-checked exactly; a failed certificate counts as infeasible, which can
//! only push the returned degree up, never produce a bad polynomial.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::transforms::{superset_sum_in_place, zeta_in_place};

pub(crate) enum Feasibility {
    Feasible { coeffs: Vec<BigRational>, achieved: BigRational },
    Infeasible,
}

/// Entry point: decide feasibility of the monomial set against the table.
pub(crate) fn chebyshev_feasible(
    table: &[bool],
    m: usize,
    monomials: &[u64],
    eps: &BigRational,
) -> Feasibility {
    debug_assert_eq!(table.len(), 1 << m);
    if m <= 4 {
        exact_path(table, m, monomials, eps)
    } else {
        lawson_path(table, m, monomials, eps)
    }
}

/// Exact optimum of the Chebyshev LP for tiny instances.
fn exact_path(table: &[bool], m: usize, monomials: &[u64], eps: &BigRational) -> Feasibility {
    let (opt, coeffs) = exact_chebyshev_optimum(table, m, monomials);
    if &opt <= eps {
        Feasibility::Feasible { coeffs, achieved: opt }
    } else {
        Feasibility::Infeasible
    }
}

/// Solve `min e` over the monomial set exactly; returns (e*, coefficients).
pub(crate) fn exact_chebyshev_optimum(
    table: &[bool],
    m: usize,
    monomials: &[u64],
) -> (BigRational, Vec<BigRational>) {
    let points = 1usize << m;
    let n = monomials.len();
    // Variables: u_0..u_{n-1}, v_0..v_{n-1}, e  (c = u - v, all >= 0).
    // Rows (for each point x):
    //   Σ (u-v) z_S(x) - e <= f(x)
    //  -Σ (u-v) z_S(x) - e <= -f(x)
    let cols = 2 * n + 1;
    let mut rows_a: Vec<Vec<BigRational>> = Vec::with_capacity(2 * points);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(2 * points);
    for x in 0..points {
        let fx = BigRational::from(BigInt::from(table[x] as i64));
        let mut row = vec![BigRational::zero(); cols];
        for (j, mon) in monomials.iter().enumerate() {
            if (mon & x as u64) == *mon {
                row[j] = BigRational::one();
                row[n + j] = -BigRational::one();
            }
        }
        row[2 * n] = -BigRational::one();
        let mut neg = row.clone();
        for v in neg.iter_mut() {
            *v = -v.clone();
        }
        neg[2 * n] = -BigRational::one();
        rows_a.push(row);
        rhs.push(fx.clone());
        rows_a.push(neg);
        rhs.push(-fx);
    }
    let mut objective = vec![BigRational::zero(); cols];
    objective[2 * n] = BigRational::one();
    let solution = simplex_min(&rows_a, &rhs, &objective)
        .expect("Chebyshev LP is always feasible and bounded");
    let coeffs = (0..n).map(|j| &solution.x[j] - &solution.x[n + j]).collect();
    (solution.value, coeffs)
}

struct LpSolution {
    value: BigRational,
    x: Vec<BigRational>,
}

/// Two-phase dense simplex with Bland's rule over exact rationals.
/// Solves `min c·x  s.t.  A x <= b, x >= 0`.
fn simplex_min(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Option<LpSolution> {
    let m = a.len();
    let n = c.len();
    // Standard form with slacks: A x + s = b.  Rows with negative b are
    // negated (flipping the slack sign), then artificials make a basis.
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
    let mut slack_sign = vec![BigRational::one(); m];
    for i in 0..m {
        let mut row = a[i].clone();
        let mut bi = b[i].clone();
        if bi < BigRational::zero() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            bi = -bi;
            slack_sign[i] = -BigRational::one();
        }
        t.push(row);
        rhs.push(bi);
    }
    // Tableau columns: n structural + m slack + m artificial.
    let total = n + m + m;
    let mut tab: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row = vec![BigRational::zero(); total];
            row[..n].clone_from_slice(&t[i]);
            row[n + i] = slack_sign[i].clone();
            row[n + m + i] = BigRational::one();
            row
        })
        .collect();
    let mut basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![BigRational::zero(); total];
    for i in n + m..total {
        phase1[i] = BigRational::one();
    }
    let v1 = run_simplex(&mut tab, &mut rhs, &mut basis, &phase1, Some(n + m));
    if !v1.is_zero() {
        return None; // Should not happen: our LPs are always feasible.
    }
    // Drive any artificial still in the basis out (or confirm its row is 0).
    for i in 0..m {
        if basis[i] >= n + m {
            if let Some(j) = (0..n + m).find(|&j| !tab[i][j].is_zero()) {
                pivot(&mut tab, &mut rhs, &mut basis, i, j);
            }
        }
    }
    // Phase 2.
    let mut phase2 = vec![BigRational::zero(); total];
    phase2[..n].clone_from_slice(c);
    let value = run_simplex(&mut tab, &mut rhs, &mut basis, &phase2, Some(n + m));
    let mut x = vec![BigRational::zero(); n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = rhs[i].clone();
        }
    }
    Some(LpSolution { value, x })
}

/// Bland-rule simplex on an existing basic feasible tableau; returns the
/// objective value.  Columns at `forbidden` and beyond never enter.
fn run_simplex(
    tab: &mut [Vec<BigRational>],
    rhs: &mut [BigRational],
    basis: &mut [usize],
    c: &[BigRational],
    forbidden: Option<usize>,
) -> BigRational {
    let m = tab.len();
    let total = tab[0].len();
    let limit = forbidden.unwrap_or(total);
    loop {
        // Reduced costs: r_j = c_j - c_B B^{-1} A_j (tableau is already in
        // basis form, so r_j = c_j - Σ_i c_{basis_i} tab[i][j]).
        let mut entering = None;
        for j in 0..limit {
            if basis.contains(&j) {
                continue;
            }
            let mut r = c[j].clone();
            for i in 0..m {
                if !c[basis[i]].is_zero() && !tab[i][j].is_zero() {
                    r -= &c[basis[i]] * &tab[i][j];
                }
            }
            if r < BigRational::zero() {
                entering = Some(j);
                break; // Bland: smallest index.
            }
        }
        let Some(j) = entering else { break };
        // Ratio test, Bland tie-break on basis index.
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..m {
            if tab[i][j] > BigRational::zero() {
                let ratio = &rhs[i] / &tab[i][j];
                let better = match &best {
                    None => true,
                    Some(b) => &ratio < b || (&ratio == b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(i) = leave else { break }; // Unbounded: impossible here (e >= 0 bounded below).
        pivot(tab, rhs, basis, i, j);
    }
    let mut value = BigRational::zero();
    for i in 0..m {
        if !c[basis[i]].is_zero() {
            value += &c[basis[i]] * &rhs[i];
        }
    }
    value
}

fn pivot(tab: &mut [Vec<BigRational>], rhs: &mut [BigRational], basis: &mut [usize], i: usize, j: usize) {
    let m = tab.len();
    let p = tab[i][j].clone();
    for v in tab[i].iter_mut() {
        *v /= &p;
    }
    rhs[i] /= &p;
    for r in 0..m {
        if r != i && !tab[r][j].is_zero() {
            let factor = tab[r][j].clone();
            let src = tab[i].clone();
            for (v, s) in tab[r].iter_mut().zip(src.iter()) {
                *v -= &factor * s;
            }
            let d = &factor * &rhs[i];
            rhs[r] -= d;
        }
    }
    basis[i] = j;
}

/// Lawson iteration: weighted least squares with weights reinforced by the
/// residuals converges to the Chebyshev optimum.  The weighted RMS error of
/// the optimal LS fit lower-bounds the LP optimum, giving an early
/// infeasibility certificate; sup-norm success is confirmed exactly.
fn lawson_path(table: &[bool], m: usize, monomials: &[u64], eps: &BigRational) -> Feasibility {
    let points = 1usize << m;
    let n = monomials.len();
    // Memory/time guard: give up on huge normal systems.  The caller's
    // degree search treats this as infeasible, which can only push the
    // returned degree toward the exact polynomial.
    if n > 1200 {
        return Feasibility::Infeasible;
    }
    let eps_f = eps.to_f64().unwrap_or(0.0);
    let f: Vec<f64> = table.iter().map(|&b| b as u8 as f64).collect();
    let mut w = vec![1.0 / points as f64; points];
    let mut best_sup = f64::INFINITY;
    let mut best_coeffs: Vec<f64> = vec![0.0; n];
    const MAX_ITERS: usize = 60;
    for _ in 0..MAX_ITERS {
        // Normal equations via superset sums: G[i][j] = Σ_{x ⊇ Si|Sj} w_x.
        let mut h = w.clone();
        superset_sum_in_place(&mut h, m);
        let mut hf: Vec<f64> = w.iter().zip(f.iter()).map(|(a, b)| a * b).collect();
        superset_sum_in_place(&mut hf, m);
        let mut g = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = h[(monomials[i] | monomials[j]) as usize];
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        let ridge = 1e-13 * (0..n).map(|i| g[i * n + i]).fold(0.0, f64::max) + 1e-300;
        for i in 0..n {
            g[i * n + i] += ridge;
        }
        let rhs: Vec<f64> = (0..n).map(|i| hf[monomials[i] as usize]).collect();
        let Some(coeffs) = cholesky_solve(&mut g, &rhs, n) else {
            return Feasibility::Infeasible;
        };
        // Residuals on the full cube.
        let mut vals = vec![0.0f64; points];
        for (i, mon) in monomials.iter().enumerate() {
            vals[*mon as usize] += coeffs[i];
        }
        zeta_in_place(&mut vals, m);
        let mut sup: f64 = 0.0;
        let mut wrms = 0.0;
        for x in 0..points {
            let r = vals[x] - f[x];
            sup = sup.max(r.abs());
            wrms += w[x] * r * r;
        }
        let wrms = wrms.sqrt();
        if sup < best_sup {
            best_sup = sup;
            best_coeffs.clone_from(&coeffs);
        }
        // Comfortable success: certify now.
        if sup <= eps_f * 0.999 {
            if let Some(res) = certify(table, m, monomials, &coeffs, eps) {
                return res;
            }
        }
        // Lower bound exceeds the target: infeasible.
        if wrms > eps_f * (1.0 + 1e-9) + 1e-12 {
            return Feasibility::Infeasible;
        }
        // Lawson update.
        let mut total = 0.0;
        for x in 0..points {
            let r = (vals[x] - f[x]).abs().max(1e-15);
            w[x] *= r;
            total += w[x];
        }
        for v in w.iter_mut() {
            *v /= total;
        }
    }
    // Last chance: certify the best iterate even without the float margin.
    if best_sup <= eps_f * (1.0 + 1e-9) + 1e-9 {
        if let Some(res) = certify(table, m, monomials, &best_coeffs, eps) {
            return res;
        }
    }
    Feasibility::Infeasible
}

/// Solve `G x = b` (symmetric positive definite) in place; `g` is row-major.
fn cholesky_solve(g: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    // Factor G = L L^T.
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i * n + j];
            for k in 0..j {
                s -= g[i * n + k] * g[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                g[i * n + i] = s.sqrt();
            } else {
                g[i * n + j] = s / g[j * n + j];
            }
        }
    }
    // Forward/back substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= g[i * n + k] * y[k];
        }
        y[i] = s / g[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= g[k * n + i] * x[k];
        }
        x[i] = s / g[i * n + i];
    }
    Some(x)
}

const DYADIC_BITS: u32 = 40;

/// Round float coefficients to dyadic rationals and check the sup error
/// exactly; `None` means the rounded solution misses the bound.
fn certify(
    table: &[bool],
    m: usize,
    monomials: &[u64],
    coeffs: &[f64],
    eps: &BigRational,
) -> Option<Feasibility> {
    let points = 1usize << m;
    let scale = (1u64 << DYADIC_BITS) as f64;
    let mut nums: Vec<i128> = Vec::with_capacity(coeffs.len());
    for &c in coeffs {
        let v = (c * scale).round();
        if !v.is_finite() || v.abs() > 9e30 {
            return None;
        }
        nums.push(v as i128);
    }
    let mut vals = vec![0i128; points];
    for (i, mon) in monomials.iter().enumerate() {
        vals[*mon as usize] += nums[i];
    }
    zeta_in_place(&mut vals, m);
    let denom = BigInt::one() << DYADIC_BITS;
    let mut worst = BigInt::zero();
    for x in 0..points {
        let target = if table[x] { 1i128 << DYADIC_BITS } else { 0 };
        let diff = (vals[x] - target).abs();
        let diff = BigInt::from(diff);
        if diff > worst {
            worst = diff;
        }
    }
    let achieved = BigRational::new(worst, denom.clone());
    if &achieved <= eps {
        let coeffs = nums
            .into_iter()
            .map(|v| BigRational::new(BigInt::from(v), denom.clone()))
            .collect();
        Some(Feasibility::Feasible { coeffs, achieved })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::big_ratio;

    fn monomials_up_to(m: usize, d: usize) -> Vec<u64> {
        (0..1u64 << m).filter(|s| s.count_ones() as usize <= d).collect()
    }

    #[test]
    fn exact_or2_halves() {
        // Best constant approximation of OR on 2 vars has error 1/2.
        let table = [false, true, true, true];
        let (opt, _) = exact_chebyshev_optimum(&table, 2, &[0]);
        assert_eq!(opt, big_ratio(1, 2));
    }

    #[test]
    fn exact_degree_one_or2() {
        // Degree-1 fit of OR2: optimum is 1/4 (classic).
        let table = [false, true, true, true];
        let (opt, coeffs) = exact_chebyshev_optimum(&table, 2, &monomials_up_to(2, 1));
        assert_eq!(opt, big_ratio(1, 4));
        assert_eq!(coeffs.len(), 3);
    }

    #[test]
    fn feasibility_monotone_in_eps() {
        let table = [false, true, true, false]; // XOR
        let mons = monomials_up_to(2, 1);
        // XOR needs degree 2 for any eps < 1/2... at degree 1 the optimum is 1/2.
        match chebyshev_feasible(&table, 2, &mons, &big_ratio(1, 2)) {
            Feasibility::Feasible { achieved, .. } => assert!(achieved <= big_ratio(1, 2)),
            Feasibility::Infeasible => panic!("eps = 1/2 must be feasible at degree 1"),
        }
        assert!(matches!(
            chebyshev_feasible(&table, 2, &mons, &big_ratio(49, 100)),
            Feasibility::Infeasible
        ));
    }

    #[test]
    fn lawson_matches_exact_on_majority5() {
        // MAJ on 5 vars, degree 3, a nontrivial instance solved both ways.
        let m = 5;
        let table: Vec<bool> = (0..32u64).map(|x| x.count_ones() >= 3).collect();
        let mons = monomials_up_to(m, 3);
        // Exact optimum via the rational simplex (m > 4, so call it directly).
        let (opt, _) = exact_chebyshev_optimum(&table, m, &mons);
        // Lawson must certify at eps slightly above the optimum and refuse
        // slightly below.
        let above = &opt + big_ratio(1, 1000);
        let below = &opt - big_ratio(1, 1000);
        match lawson_path(&table, m, &mons, &above) {
            Feasibility::Feasible { achieved, .. } => assert!(achieved <= above),
            Feasibility::Infeasible => panic!("should be feasible just above the optimum"),
        }
        if opt > big_ratio(1, 1000) {
            assert!(matches!(lawson_path(&table, m, &mons, &below), Feasibility::Infeasible));
        }
    }
}
