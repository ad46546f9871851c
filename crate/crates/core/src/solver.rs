//! Sparse symmetric direct solver for the condensed trace system.
//!
//! The matrix is permuted by a minimum-degree ordering computed on the
//! trace-block graph (all blocks share one size, so supernodes are free),
//! then factorized as L D L^T by an up-looking elimination-tree algorithm
//! with 1x1 pivots. Positive pivots mean the positive-definite path
//! succeeded; otherwise the same factorization serves as the
//! symmetric-indefinite fallback, and a Jacobi-preconditioned conjugate
//! gradient backstop covers factorization breakdown.

use crate::assembly::TraceSystem;
use crate::DVector;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("zero pivot at eliminated dof {dof} and conjugate-gradient fallback failed (residual {residual:e})")]
    Breakdown { dof: usize, residual: f64 },
    #[error("solver residual {residual:e} exceeds tolerance")]
    ResidualTooLarge { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// L D L^T with all pivots positive.
    PositiveDefinite,
    /// L D L^T with some negative pivots.
    Indefinite,
    ConjugateGradient,
}

/// Outcome of a linear solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: Method,
    pub rel_residual: f64,
    pub factor_ok: bool,
    pub n: usize,
    pub factor_nnz: usize,
    pub smallest_pivot: f64,
}

/// Solve the condensed system. `block` is the trace-block size (free offsets
/// are block-aligned), used to build the supernodal elimination graph.
pub fn solve(system: &TraceSystem, block: usize) -> Result<(DVector<f64>, SolveReport), SolveError> {
    let n = system.n;
    if n == 0 {
        return Ok((
            DVector::zeros(0),
            SolveReport {
                method: Method::PositiveDefinite,
                rel_residual: 0.0,
                factor_ok: true,
                n: 0,
                factor_nnz: 0,
                smallest_pivot: f64::INFINITY,
            },
        ));
    }
    assert_eq!(n % block, 0, "free dofs must be block-aligned");

    let perm = min_degree_permutation(system, block);
    let mut iperm = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        iperm[old] = new;
    }

    let csc = upper_csc(system, &iperm);
    match ldlt_factor(&csc) {
        Ok(fac) => {
            let mut xp = DVector::zeros(n);
            for newi in 0..n {
                xp[newi] = system.rhs[perm[newi]];
            }
            fac.solve_in_place(xp.as_mut_slice());
            let mut x = DVector::zeros(n);
            for newi in 0..n {
                x[perm[newi]] = xp[newi];
            }
            // One step of iterative refinement keeps the residual at noise
            // level even for near-incompressible materials.
            let mut resid = &system.rhs - system.matvec(&x);
            let mut rp = DVector::zeros(n);
            for newi in 0..n {
                rp[newi] = resid[perm[newi]];
            }
            fac.solve_in_place(rp.as_mut_slice());
            for newi in 0..n {
                x[perm[newi]] += rp[newi];
            }
            resid = &system.rhs - system.matvec(&x);
            let bnorm = system.rhs.norm();
            let rel = if bnorm > 0.0 {
                resid.norm() / bnorm
            } else {
                0.0
            };
            let method = if fac.smallest_pivot > 0.0 {
                Method::PositiveDefinite
            } else {
                Method::Indefinite
            };
            if rel > 1e-9 {
                return cg_fallback(system, rel);
            }
            Ok((
                x,
                SolveReport {
                    method,
                    rel_residual: rel,
                    factor_ok: true,
                    n,
                    factor_nnz: fac.li.len(),
                    smallest_pivot: fac.smallest_pivot,
                },
            ))
        }
        Err(dof) => match cg_fallback(system, f64::NAN) {
            Ok(ok) => Ok(ok),
            Err(SolveError::ResidualTooLarge { residual }) => Err(SolveError::Breakdown {
                dof: perm[dof],
                residual,
            }),
            Err(e) => Err(e),
        },
    }
}

fn cg_fallback(
    system: &TraceSystem,
    _prev_residual: f64,
) -> Result<(DVector<f64>, SolveReport), SolveError> {
    let n = system.n;
    let mut diag = vec![0.0f64; n];
    for &(i, j, v) in &system.entries {
        if i == j {
            diag[i as usize] += v;
        }
    }
    for d in diag.iter_mut() {
        if d.abs() < 1e-300 {
            *d = 1.0;
        }
    }
    let b = &system.rhs;
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok((
            DVector::zeros(n),
            SolveReport {
                method: Method::ConjugateGradient,
                rel_residual: 0.0,
                factor_ok: false,
                n,
                factor_nnz: 0,
                smallest_pivot: 0.0,
            },
        ));
    }
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = DVector::from_iterator(n, r.iter().zip(&diag).map(|(ri, di)| ri / di));
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let maxit = 20 * n;
    for _ in 0..maxit {
        let ap = system.matvec(&p);
        let pap = p.dot(&ap);
        if pap.abs() < 1e-300 {
            break;
        }
        let alpha = rz / pap;
        x += alpha * &p;
        r -= alpha * &ap;
        if r.norm() / bnorm < 1e-10 {
            break;
        }
        z = DVector::from_iterator(n, r.iter().zip(&diag).map(|(ri, di)| ri / di));
        let rz_new = r.dot(&z);
        p = &z + (rz_new / rz) * &p;
        rz = rz_new;
    }
    let rel = (b - system.matvec(&x)).norm() / bnorm;
    if rel > 1e-9 {
        return Err(SolveError::ResidualTooLarge { residual: rel });
    }
    Ok((
        x,
        SolveReport {
            method: Method::ConjugateGradient,
            rel_residual: rel,
            factor_ok: false,
            n,
            factor_nnz: 0,
            smallest_pivot: 0.0,
        },
    ))
}

/// Minimum-degree ordering on the block quotient graph, expanded to dofs.
fn min_degree_permutation(system: &TraceSystem, block: usize) -> Vec<usize> {
    use std::collections::BTreeSet;
    let n = system.n;
    let ng = n / block;
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); ng];
    for &(i, j, _) in &system.entries {
        let gi = i as usize / block;
        let gj = j as usize / block;
        if gi != gj {
            adj[gi].insert(gj as u32);
            adj[gj].insert(gi as u32);
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, u32)>> = (0..ng)
        .map(|g| Reverse((adj[g].len(), g as u32)))
        .collect();
    let mut alive = vec![true; ng];
    let mut order = Vec::with_capacity(ng);
    while let Some(Reverse((deg, g))) = heap.pop() {
        let gi = g as usize;
        if !alive[gi] || adj[gi].len() != deg {
            continue;
        }
        alive[gi] = false;
        order.push(gi);
        let neigh: Vec<u32> = adj[gi].iter().copied().collect();
        for &u in &neigh {
            adj[u as usize].remove(&g);
        }
        for a in 0..neigh.len() {
            for b in a + 1..neigh.len() {
                let (x, y) = (neigh[a] as usize, neigh[b] as usize);
                adj[x].insert(neigh[b]);
                adj[y].insert(neigh[a]);
            }
        }
        for &u in &neigh {
            heap.push(Reverse((adj[u as usize].len(), u)));
        }
        adj[gi].clear();
    }
    let mut perm = Vec::with_capacity(n);
    for g in order {
        for d in 0..block {
            perm.push(g * block + d);
        }
    }
    perm
}

struct CscUpper {
    n: usize,
    colptr: Vec<usize>,
    rowidx: Vec<u32>,
    vals: Vec<f64>,
}

/// Build the permuted upper-triangular CSC from full symmetric COO entries.
fn upper_csc(system: &TraceSystem, iperm: &[usize]) -> CscUpper {
    let n = system.n;
    let mut tuples: Vec<(u32, u32, f64)> = Vec::with_capacity(system.entries.len() / 2 + n);
    for &(i, j, v) in &system.entries {
        let pi = iperm[i as usize] as u32;
        let pj = iperm[j as usize] as u32;
        // Keep the upper triangle once; the COO carries both (i,j) and (j,i).
        if pi <= pj {
            tuples.push((pj, pi, v));
        }
    }
    tuples.sort_unstable_by_key(|&(c, r, _)| (c, r));
    let mut colptr = vec![0usize; n + 1];
    let mut rowidx = Vec::with_capacity(tuples.len());
    let mut vals: Vec<f64> = Vec::with_capacity(tuples.len());
    let mut last: Option<(u32, u32)> = None;
    for (c, r, v) in tuples {
        if last == Some((c, r)) {
            *vals.last_mut().unwrap() += v;
        } else {
            colptr[c as usize + 1] += 1;
            rowidx.push(r);
            vals.push(v);
            last = Some((c, r));
        }
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscUpper {
        n,
        colptr,
        rowidx,
        vals,
    }
}

struct LdltFactors {
    colptr: Vec<usize>,
    li: Vec<u32>,
    lx: Vec<f64>,
    d: Vec<f64>,
    smallest_pivot: f64,
}

impl LdltFactors {
    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.d.len();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.colptr[j]..self.colptr[j + 1] {
                    x[self.li[p] as usize] -= self.lx[p] * xj;
                }
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut xj = x[j];
            for p in self.colptr[j]..self.colptr[j + 1] {
                xj -= self.lx[p] * x[self.li[p] as usize];
            }
            x[j] = xj;
        }
    }
}

const NONE: u32 = u32::MAX;

/// Up-looking L D L^T of the upper CSC; returns Err(column) on a zero pivot.
fn ldlt_factor(a: &CscUpper) -> Result<LdltFactors, usize> {
    let n = a.n;
    // Elimination tree (Liu's algorithm with path compression).
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for j in 0..n {
        for p in a.colptr[j]..a.colptr[j + 1] {
            let mut i = a.rowidx[p] as usize;
            while (i as u32) != NONE as u32 && i < j {
                let next = ancestor[i];
                ancestor[i] = j as u32;
                if next == NONE {
                    parent[i] = j as u32;
                    break;
                }
                if next as usize == j {
                    break;
                }
                i = next as usize;
            }
        }
    }

    // Column counts of L via the same reach used by the numeric pass.
    let mut marker = vec![NONE; n];
    let mut counts = vec![0usize; n];
    let mut stack: Vec<u32> = Vec::with_capacity(64);
    for j in 0..n {
        marker[j] = j as u32;
        for p in a.colptr[j]..a.colptr[j + 1] {
            let mut i = a.rowidx[p] as usize;
            if i >= j {
                continue;
            }
            while marker[i] != j as u32 {
                marker[i] = j as u32;
                counts[i] += 1;
                if parent[i] == NONE {
                    break;
                }
                i = parent[i] as usize;
                if i >= j {
                    break;
                }
            }
        }
    }
    let mut colptr = vec![0usize; n + 1];
    for j in 0..n {
        colptr[j + 1] = colptr[j] + counts[j];
    }
    let nnz = colptr[n];
    let mut li = vec![0u32; nnz];
    let mut lx = vec![0.0f64; nnz];
    let mut fill = vec![0usize; n];
    let mut d = vec![0.0f64; n];
    let mut ywork = vec![0.0f64; n];
    let mut marker2 = vec![NONE; n];
    let mut pattern: Vec<u32> = Vec::with_capacity(64);
    let mut smallest_pivot = f64::INFINITY;

    for j in 0..n {
        // Scatter column j of A and collect the pattern of row j of L in
        // topological order along the elimination tree.
        let mut yd = 0.0;
        pattern.clear();
        marker2[j] = j as u32;
        for p in a.colptr[j]..a.colptr[j + 1] {
            let i = a.rowidx[p] as usize;
            if i == j {
                yd += a.vals[p];
                continue;
            }
            ywork[i] += a.vals[p];
            stack.clear();
            let mut k = i;
            while marker2[k] != j as u32 {
                marker2[k] = j as u32;
                stack.push(k as u32);
                if parent[k] == NONE {
                    break;
                }
                let up = parent[k] as usize;
                if up >= j {
                    break;
                }
                k = up;
            }
            // Ancestors first overall: prepend this path reversed.
            for &s in stack.iter().rev() {
                pattern.push(s);
            }
        }
        // Process in ascending topological order (descendants before
        // ancestors): the reversed pattern list.
        for idx in (0..pattern.len()).rev() {
            let k = pattern[idx] as usize;
            let yk = ywork[k];
            ywork[k] = 0.0;
            let ljk = yk / d[k];
            for p in colptr[k]..colptr[k] + fill[k] {
                ywork[li[p] as usize] -= lx[p] * yk;
            }
            yd -= ljk * yk;
            let slot = colptr[k] + fill[k];
            li[slot] = j as u32;
            lx[slot] = ljk;
            fill[k] += 1;
        }
        if yd == 0.0 || !yd.is_finite() {
            return Err(j);
        }
        smallest_pivot = if yd.abs() < smallest_pivot.abs() || j == 0 {
            yd
        } else {
            smallest_pivot
        };
        d[j] = yd;
    }

    Ok(LdltFactors {
        colptr,
        li,
        lx,
        d,
        smallest_pivot,
    })
}
