//! Exact linear programming: dense two-phase simplex returning basic feasible
//! solutions (vertices), exact duals, and warm-started column generation.
//!
//! Arithmetic is exact throughout. The engine is generic over the scalar: a
//! word-sized rational (`Rat64`) carries most solves without heap traffic and
//! poisons itself on overflow, at which point [`AdaptiveSimplex`] rebuilds the
//! tableau over big rationals and continues. Entering columns follow the
//! most-negative reduced cost until the objective stalls, then Bland's rule,
//! so cycling is impossible.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Sparse (variable index, coefficient) pairs; duplicate indices are summed.
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub maximize: bool,
    /// Dense objective over the variables (zero-padded if shorter).
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn minimize(num_vars: usize, objective: Vec<Rational>) -> LinearProgram {
        LinearProgram {
            num_vars,
            maximize: false,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn maximize(num_vars: usize, objective: Vec<Rational>) -> LinearProgram {
        LinearProgram {
            num_vars,
            maximize: true,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct BasicSolution {
    pub status: LpStatus,
    /// One value per LP variable; zeros when not optimal.
    pub values: Vec<Rational>,
    pub objective_value: Rational,
    /// Column indices of the basic variables (standard-form layout).
    pub basis: Vec<usize>,
    /// One dual multiplier per constraint (original orientation).
    pub duals: Vec<Rational>,
}

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("column added while rows were dropped as redundant")]
    DroppedRows,
    #[error("add_column before solve")]
    NotSolved,
}

/// Scalar overflowed the fast representation; retry over big rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision;

pub trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn from_rational(r: &Rational) -> Option<Self>;
    fn to_rational(&self) -> Rational;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn neg(&self) -> Self;
    fn add(&self, o: &Self) -> Result<Self, Precision>;
    fn sub(&self, o: &Self) -> Result<Self, Precision>;
    fn mul(&self, o: &Self) -> Result<Self, Precision>;
    fn div(&self, o: &Self) -> Result<Self, Precision>;
    /// Total order; must never be wrong (overflow must error instead).
    fn cmp_exact(&self, o: &Self) -> Result<std::cmp::Ordering, Precision>;
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Result<Self, Precision> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, Precision> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Result<Self, Precision> {
        Ok(self * o)
    }
    fn div(&self, o: &Self) -> Result<Self, Precision> {
        Ok(self / o)
    }
    fn cmp_exact(&self, o: &Self) -> Result<std::cmp::Ordering, Precision> {
        Ok(self.cmp(o))
    }
}

/// Reduced fraction with numerator and denominator within i64, stored in
/// i128 fields so every intermediate product in add/mul/cmp fits i128
/// exactly. Results outside the i64 window report `Precision`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rat64 {
    num: i128,
    den: i128,
}

const RAT64_MAX: i128 = i64::MAX as i128;

impl Rat64 {
    fn make(num: i128, den: i128) -> Result<Rat64, Precision> {
        debug_assert!(den != 0);
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        if num == 0 {
            return Ok(Rat64 { num: 0, den: 1 });
        }
        let g = gcd_u128(num.unsigned_abs(), den.unsigned_abs()) as i128;
        num /= g;
        den /= g;
        if num.abs() > RAT64_MAX || den > RAT64_MAX {
            return Err(Precision);
        }
        Ok(Rat64 { num, den })
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl Scalar for Rat64 {
    fn from_rational(r: &Rational) -> Option<Self> {
        let num = r.numer().to_i64()?;
        let den = r.denom().to_i64()?;
        if num == i64::MIN || den <= 0 {
            return None;
        }
        Some(Rat64 {
            num: num as i128,
            den: den as i128,
        })
    }
    fn to_rational(&self) -> Rational {
        Rational::new(
            BigInt::from(self.num as i64),
            BigInt::from(self.den as i64),
        )
    }
    fn zero() -> Self {
        Rat64 { num: 0, den: 1 }
    }
    fn one() -> Self {
        Rat64 { num: 1, den: 1 }
    }
    fn is_zero(&self) -> bool {
        self.num == 0
    }
    fn is_one(&self) -> bool {
        self.num == 1 && self.den == 1
    }
    fn is_negative(&self) -> bool {
        self.num < 0
    }
    fn is_positive(&self) -> bool {
        self.num > 0
    }
    fn neg(&self) -> Self {
        Rat64 {
            num: -self.num,
            den: self.den,
        }
    }
    fn add(&self, o: &Self) -> Result<Self, Precision> {
        // |num|, den <= 2^63, so the cross products stay within i128
        Rat64::make(self.num * o.den + o.num * self.den, self.den * o.den)
    }
    fn sub(&self, o: &Self) -> Result<Self, Precision> {
        Rat64::make(self.num * o.den - o.num * self.den, self.den * o.den)
    }
    fn mul(&self, o: &Self) -> Result<Self, Precision> {
        Rat64::make(self.num * o.num, self.den * o.den)
    }
    fn div(&self, o: &Self) -> Result<Self, Precision> {
        if o.num == 0 {
            return Err(Precision);
        }
        Rat64::make(self.num * o.den, self.den * o.num)
    }
    fn cmp_exact(&self, o: &Self) -> Result<std::cmp::Ordering, Precision> {
        Ok((self.num * o.den).cmp(&(o.num * self.den)))
    }
}

pub struct Simplex<T: Scalar> {
    pub pivot_count: u64,
    maximize: bool,
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    active: Vec<bool>,
    row_negated: Vec<bool>,
    identity_col: Vec<usize>,
    is_artificial: Vec<bool>,
    barred: Vec<bool>,
    cost: Vec<T>,
    zrow1: Option<Vec<T>>,
    zrow2: Vec<T>,
    /// Column index of each LP variable (initial block plus appended columns).
    var_cols: Vec<usize>,
    solved: bool,
    dropped_any: bool,
}

impl<T: Scalar> Simplex<T> {
    pub fn try_new(lp: &LinearProgram) -> Result<Simplex<T>, Precision> {
        let n = lp.num_vars;
        let m = lp.constraints.len();
        let mut dense: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut rhs: Vec<T> = Vec::with_capacity(m);
        let mut rels: Vec<Relation> = Vec::with_capacity(m);
        let mut row_negated = vec![false; m];
        let conv = |r: &Rational| T::from_rational(r).ok_or(Precision);
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![T::zero(); n];
            for (idx, v) in &c.coeffs {
                assert!(*idx < n, "constraint references unknown variable");
                row[*idx] = row[*idx].add(&conv(v)?)?;
            }
            let mut b = conv(&c.rhs)?;
            let mut rel = c.rel;
            if b.is_negative() {
                for v in row.iter_mut() {
                    *v = v.neg();
                }
                b = b.neg();
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                row_negated[i] = true;
            }
            dense.push(row);
            rhs.push(b);
            rels.push(rel);
        }

        let mut next = n;
        let mut slack_or_surplus: Vec<Option<(usize, bool)>> = Vec::with_capacity(m);
        for rel in &rels {
            match rel {
                Relation::Le => {
                    slack_or_surplus.push(Some((next, true)));
                    next += 1;
                }
                Relation::Ge => {
                    slack_or_surplus.push(Some((next, false)));
                    next += 1;
                }
                Relation::Eq => slack_or_surplus.push(None),
            }
        }
        let mut art_col: Vec<Option<usize>> = Vec::with_capacity(m);
        for rel in &rels {
            match rel {
                Relation::Le => art_col.push(None),
                _ => {
                    art_col.push(Some(next));
                    next += 1;
                }
            }
        }
        let total = next;

        let mut is_artificial = vec![false; total];
        let mut identity_col = vec![0usize; m];
        for i in 0..m {
            dense[i].resize(total, T::zero());
            if let Some((col, positive)) = slack_or_surplus[i] {
                dense[i][col] = if positive { T::one() } else { T::one().neg() };
            }
            if let Some(col) = art_col[i] {
                dense[i][col] = T::one();
                is_artificial[col] = true;
                identity_col[i] = col;
            } else {
                identity_col[i] = slack_or_surplus[i].expect("Le row has slack").0;
            }
        }

        let mut cost = vec![T::zero(); total];
        for (j, slot) in cost.iter_mut().enumerate().take(n) {
            let v = lp.objective.get(j).cloned().unwrap_or_else(<Rational as Zero>::zero);
            let v = conv(&v)?;
            *slot = if lp.maximize { v.neg() } else { v };
        }

        // reduced costs for the initial identity basis (aux costs are zero)
        let zrow2 = cost.clone();
        let need_phase1 = is_artificial.iter().any(|&a| a);
        let zrow1 = if need_phase1 {
            let mut z: Vec<T> = (0..total)
                .map(|j| if is_artificial[j] { T::one() } else { T::zero() })
                .collect();
            for i in 0..m {
                if art_col[i].is_some() {
                    for j in 0..total {
                        if !dense[i][j].is_zero() {
                            z[j] = z[j].sub(&dense[i][j])?;
                        }
                    }
                }
            }
            Some(z)
        } else {
            None
        };

        Ok(Simplex {
            pivot_count: 0,
            maximize: lp.maximize,
            basis: identity_col.clone(),
            rows: dense,
            rhs,
            active: vec![true; m],
            row_negated,
            identity_col,
            is_artificial,
            barred: vec![false; total],
            cost,
            zrow1,
            zrow2,
            var_cols: (0..n).collect(),
            solved: false,
            dropped_any: false,
        })
    }

    fn cols(&self) -> usize {
        self.zrow2.len()
    }

    fn pivot(&mut self, r: usize, jc: usize) -> Result<(), Precision> {
        self.pivot_count += 1;
        let p = self.rows[r][jc].clone();
        debug_assert!(!p.is_zero());
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.div(&p)?;
                }
            }
            self.rhs[r] = self.rhs[r].div(&p)?;
        }
        let m = self.rows.len();
        for i in 0..m {
            if i == r || !self.active[i] {
                continue;
            }
            let f = self.rows[i][jc].clone();
            if f.is_zero() {
                continue;
            }
            let (pivot_row, row_i) = borrow_two(&mut self.rows, r, i);
            axpy_neg(row_i, &f, pivot_row)?;
            self.rhs[i] = self.rhs[i].sub(&f.mul(&self.rhs[r])?)?;
        }
        if let Some(z) = self.zrow1.as_mut() {
            let f = z[jc].clone();
            if !f.is_zero() {
                axpy_neg(z, &f, &self.rows[r])?;
            }
        }
        let f = self.zrow2[jc].clone();
        if !f.is_zero() {
            axpy_neg(&mut self.zrow2, &f, &self.rows[r])?;
        }
        let leaving = self.basis[r];
        if self.is_artificial[leaving] {
            self.barred[leaving] = true;
        }
        self.basis[r] = jc;
        Ok(())
    }

    /// Entering column: most negative reduced cost while progress is made,
    /// Bland's rule (smallest eligible index) once the objective stalls.
    fn entering(&self, phase1: bool, bland: bool) -> Result<Option<usize>, Precision> {
        let z = if phase1 {
            self.zrow1.as_ref().expect("phase-1 row present")
        } else {
            &self.zrow2
        };
        if bland {
            return Ok((0..self.cols()).find(|&j| !self.barred[j] && z[j].is_negative()));
        }
        let mut best: Option<usize> = None;
        for j in 0..self.cols() {
            if self.barred[j] || !z[j].is_negative() {
                continue;
            }
            match best {
                None => best = Some(j),
                Some(b) => {
                    if z[j].cmp_exact(&z[b])? == std::cmp::Ordering::Less {
                        best = Some(j);
                    }
                }
            }
        }
        Ok(best)
    }

    /// Minimum-ratio row; ties broken by smallest basic variable (Bland).
    fn leaving(&self, jc: usize) -> Result<Option<usize>, Precision> {
        let mut best: Option<(usize, T)> = None;
        for i in 0..self.rows.len() {
            if !self.active[i] {
                continue;
            }
            let a = &self.rows[i][jc];
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs[i].div(a)?;
            match &best {
                None => best = Some((i, ratio)),
                Some((bi, br)) => {
                    let ord = ratio.cmp_exact(br)?;
                    if ord == std::cmp::Ordering::Less
                        || (ord == std::cmp::Ordering::Equal && self.basis[i] < self.basis[*bi])
                    {
                        best = Some((i, ratio));
                    }
                }
            }
        }
        Ok(best.map(|(i, _)| i))
    }

    fn phase1_value_positive(&self) -> bool {
        (0..self.rows.len()).any(|i| {
            self.active[i] && self.is_artificial[self.basis[i]] && self.rhs[i].is_positive()
        })
    }

    fn run_phase1(&mut self) -> Result<LpStatus, Precision> {
        let mut stall = Stall::new();
        loop {
            let Some(jc) = self.entering(true, stall.bland())? else {
                break;
            };
            match self.leaving(jc)? {
                Some(r) => {
                    stall.observe(self.rhs[r].is_zero());
                    self.pivot(r, jc)?;
                }
                // phase-1 objective is bounded below by 0; no leaving row
                // means the column cannot improve it
                None => break,
            }
        }
        if self.phase1_value_positive() {
            return Ok(LpStatus::Infeasible);
        }
        // drive leftover artificials out of the basis or drop redundant rows
        for i in 0..self.rows.len() {
            if !self.active[i] || !self.is_artificial[self.basis[i]] {
                continue;
            }
            debug_assert!(self.rhs[i].is_zero());
            let col = (0..self.cols())
                .find(|&j| !self.is_artificial[j] && !self.rows[i][j].is_zero());
            match col {
                // degenerate pivot (rhs is zero), so a negative element is fine
                Some(jc) => self.pivot(i, jc)?,
                None => {
                    self.active[i] = false;
                    self.dropped_any = true;
                }
            }
        }
        for j in 0..self.cols() {
            if self.is_artificial[j] {
                self.barred[j] = true;
            }
        }
        self.zrow1 = None;
        Ok(LpStatus::Optimal)
    }

    fn run_phase2(&mut self) -> Result<LpStatus, Precision> {
        let mut stall = Stall::new();
        loop {
            let Some(jc) = self.entering(false, stall.bland())? else {
                break;
            };
            match self.leaving(jc)? {
                Some(r) => {
                    stall.observe(self.rhs[r].is_zero());
                    self.pivot(r, jc)?;
                }
                None => return Ok(LpStatus::Unbounded),
            }
        }
        Ok(LpStatus::Optimal)
    }

    pub fn solve(&mut self) -> Result<LpStatus, Precision> {
        if self.zrow1.is_some() {
            let s = self.run_phase1()?;
            if s == LpStatus::Infeasible {
                return Ok(s);
            }
        }
        let s = self.run_phase2()?;
        self.solved = s == LpStatus::Optimal;
        Ok(s)
    }

    /// Phase 1 only: stops at the first basic feasible solution.
    pub fn solve_feasible(&mut self) -> Result<LpStatus, Precision> {
        if self.zrow1.is_some() {
            let s = self.run_phase1()?;
            if s == LpStatus::Infeasible {
                return Ok(s);
            }
        }
        self.solved = true;
        Ok(LpStatus::Optimal)
    }

    pub fn values(&self) -> Vec<Rational> {
        let mut x = vec![<Rational as Zero>::zero(); self.cols()];
        for i in 0..self.rows.len() {
            if self.active[i] {
                x[self.basis[i]] = self.rhs[i].to_rational();
            }
        }
        self.var_cols.iter().map(|&c| x[c].clone()).collect()
    }

    pub fn objective_value(&self) -> Rational {
        let mut v = <Rational as Zero>::zero();
        for i in 0..self.rows.len() {
            if self.active[i] && !self.cost[self.basis[i]].is_zero() {
                v += self.cost[self.basis[i]].to_rational() * self.rhs[i].to_rational();
            }
        }
        if self.maximize {
            -v
        } else {
            v
        }
    }

    /// Dual multipliers per original constraint row.
    pub fn duals(&self) -> Vec<Rational> {
        let mut y = Vec::with_capacity(self.rows.len());
        for i in 0..self.rows.len() {
            if !self.active[i] {
                y.push(<Rational as Zero>::zero());
                continue;
            }
            let mut v = -self.zrow2[self.identity_col[i]].to_rational();
            if self.row_negated[i] {
                v = -v;
            }
            if self.maximize {
                v = -v;
            }
            y.push(v);
        }
        y
    }

    pub fn basis(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| self.active[i])
            .map(|i| self.basis[i])
            .collect()
    }

    /// Appends an LP variable with the given sparse constraint column and
    /// objective coefficient; call [`Simplex::reoptimize`] afterwards.
    pub fn add_column(
        &mut self,
        coeffs: &[(usize, Rational)],
        obj: &Rational,
    ) -> Result<Result<usize, SimplexError>, Precision> {
        if !self.solved {
            return Ok(Err(SimplexError::NotSolved));
        }
        if self.dropped_any {
            return Ok(Err(SimplexError::DroppedRows));
        }
        let m = self.rows.len();
        let mut a = vec![T::zero(); m];
        for (i, v) in coeffs {
            assert!(*i < m);
            let v = T::from_rational(v).ok_or(Precision)?;
            a[*i] = if self.row_negated[*i] {
                a[*i].sub(&v)?
            } else {
                a[*i].add(&v)?
            };
        }
        // tableau form of the new column: B^-1 a, assembled from the columns
        // that started as the identity
        let mut t = vec![T::zero(); m];
        for (k, ak) in a.iter().enumerate() {
            if ak.is_zero() {
                continue;
            }
            let idc = self.identity_col[k];
            for (i, ti) in t.iter_mut().enumerate() {
                let w = &self.rows[i][idc];
                if !w.is_zero() {
                    *ti = ti.add(&ak.mul(w)?)?;
                }
            }
        }
        let obj = T::from_rational(obj).ok_or(Precision)?;
        let cost_std = if self.maximize { obj.neg() } else { obj };
        // reduced cost c_j - c_B t
        let mut r = cost_std.clone();
        for i in 0..m {
            if !self.cost[self.basis[i]].is_zero() && !t[i].is_zero() {
                r = r.sub(&self.cost[self.basis[i]].mul(&t[i])?)?;
            }
        }
        let col = self.cols();
        for (i, ti) in t.into_iter().enumerate() {
            self.rows[i].push(ti);
        }
        self.cost.push(cost_std);
        self.zrow2.push(r);
        self.barred.push(false);
        self.is_artificial.push(false);
        self.var_cols.push(col);
        Ok(Ok(self.var_cols.len() - 1))
    }

    pub fn reoptimize(&mut self) -> Result<LpStatus, Precision> {
        let s = self.run_phase2()?;
        self.solved = s == LpStatus::Optimal;
        Ok(s)
    }
}

/// Degeneracy watchdog: after enough consecutive degenerate pivots the
/// entering rule falls back to Bland's, which cannot cycle.
struct Stall {
    degenerate_run: u32,
}

impl Stall {
    fn new() -> Stall {
        Stall { degenerate_run: 0 }
    }

    fn observe(&mut self, degenerate: bool) {
        if degenerate {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
    }

    fn bland(&self) -> bool {
        self.degenerate_run >= 40
    }
}

fn borrow_two<'a, T>(rows: &'a mut [Vec<T>], a: usize, b: usize) -> (&'a Vec<T>, &'a mut Vec<T>) {
    debug_assert_ne!(a, b);
    if a < b {
        let (left, right) = rows.split_at_mut(b);
        (&left[a], &mut right[0])
    } else {
        let (left, right) = rows.split_at_mut(a);
        (&right[0], &mut left[b])
    }
}

/// `target -= f * source`, skipping zero source entries.
fn axpy_neg<T: Scalar>(target: &mut [T], f: &T, source: &[T]) -> Result<(), Precision> {
    for (t, s) in target.iter_mut().zip(source.iter()) {
        if !s.is_zero() {
            *t = t.sub(&f.mul(s)?)?;
        }
    }
    Ok(())
}

/// Simplex over the fast scalar with a transparent upgrade to big rationals
/// when precision runs out. Columns added after the initial solve are
/// replayed on upgrade.
pub enum AdaptiveSimplex {
    Fast {
        inner: Box<Simplex<Rat64>>,
        lp: LinearProgram,
        added: Vec<(Vec<(usize, Rational)>, Rational)>,
    },
    Big(Box<Simplex<Rational>>),
}

impl AdaptiveSimplex {
    pub fn new(lp: &LinearProgram) -> AdaptiveSimplex {
        match Simplex::<Rat64>::try_new(lp) {
            Ok(inner) => AdaptiveSimplex::Fast {
                inner: Box::new(inner),
                lp: lp.clone(),
                added: Vec::new(),
            },
            Err(Precision) => AdaptiveSimplex::Big(Box::new(
                Simplex::<Rational>::try_new(lp).expect("big rationals never overflow"),
            )),
        }
    }

    fn upgrade(&mut self) -> &mut Simplex<Rational> {
        if let AdaptiveSimplex::Fast { lp, added, .. } = self {
            let mut big =
                Simplex::<Rational>::try_new(lp).expect("big rationals never overflow");
            big.solve().expect("big rationals never overflow");
            for (coeffs, cost) in added.iter() {
                big.add_column(coeffs, cost)
                    .expect("big rationals never overflow")
                    .expect("columns replay cleanly");
            }
            *self = AdaptiveSimplex::Big(Box::new(big));
        }
        match self {
            AdaptiveSimplex::Big(b) => b,
            AdaptiveSimplex::Fast { .. } => unreachable!(),
        }
    }

    pub fn solve(&mut self) -> LpStatus {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => match inner.solve() {
                Ok(s) => s,
                Err(Precision) => {
                    let big = self.upgrade();
                    big.solve().expect("big rationals never overflow")
                }
            },
            AdaptiveSimplex::Big(b) => b.solve().expect("big rationals never overflow"),
        }
    }

    pub fn solve_feasible(&mut self) -> LpStatus {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => match inner.solve_feasible() {
                Ok(s) => s,
                Err(Precision) => {
                    let big = self.upgrade();
                    big.solve_feasible().expect("big rationals never overflow")
                }
            },
            AdaptiveSimplex::Big(b) => b.solve_feasible().expect("big rationals never overflow"),
        }
    }

    pub fn add_column(
        &mut self,
        coeffs: &[(usize, Rational)],
        cost: Rational,
    ) -> Result<usize, SimplexError> {
        match self {
            AdaptiveSimplex::Fast { inner, added, .. } => match inner.add_column(coeffs, &cost) {
                Ok(r) => {
                    if r.is_ok() {
                        added.push((coeffs.to_vec(), cost));
                    }
                    r
                }
                Err(Precision) => {
                    let big = self.upgrade();
                    big.add_column(coeffs, &cost)
                        .expect("big rationals never overflow")
                }
            },
            AdaptiveSimplex::Big(b) => b
                .add_column(coeffs, &cost)
                .expect("big rationals never overflow"),
        }
    }

    pub fn reoptimize(&mut self) -> LpStatus {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => match inner.reoptimize() {
                Ok(s) => s,
                Err(Precision) => {
                    let big = self.upgrade();
                    big.reoptimize().expect("big rationals never overflow")
                }
            },
            AdaptiveSimplex::Big(b) => b.reoptimize().expect("big rationals never overflow"),
        }
    }

    pub fn values(&self) -> Vec<Rational> {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => inner.values(),
            AdaptiveSimplex::Big(b) => b.values(),
        }
    }

    pub fn objective_value(&self) -> Rational {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => inner.objective_value(),
            AdaptiveSimplex::Big(b) => b.objective_value(),
        }
    }

    pub fn duals(&self) -> Vec<Rational> {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => inner.duals(),
            AdaptiveSimplex::Big(b) => b.duals(),
        }
    }

    pub fn basis(&self) -> Vec<usize> {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => inner.basis(),
            AdaptiveSimplex::Big(b) => b.basis(),
        }
    }

    pub fn pivot_count(&self) -> u64 {
        match self {
            AdaptiveSimplex::Fast { inner, .. } => inner.pivot_count,
            AdaptiveSimplex::Big(b) => b.pivot_count,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> BasicSolution {
    let mut sx = AdaptiveSimplex::new(lp);
    let status = sx.solve();
    extract(lp, &sx, status)
}

/// Any basic feasible solution (phase-1 simplex), ignoring the objective.
pub fn feasible_vertex(lp: &LinearProgram) -> BasicSolution {
    let mut sx = AdaptiveSimplex::new(lp);
    let status = sx.solve_feasible();
    extract(lp, &sx, status)
}

fn extract(lp: &LinearProgram, sx: &AdaptiveSimplex, status: LpStatus) -> BasicSolution {
    if status != LpStatus::Optimal {
        return BasicSolution {
            status,
            values: vec![<Rational as Zero>::zero(); lp.num_vars],
            objective_value: <Rational as Zero>::zero(),
            basis: Vec::new(),
            duals: vec![<Rational as Zero>::zero(); lp.constraints.len()],
        };
    }
    BasicSolution {
        status,
        values: sx.values(),
        objective_value: sx.objective_value(),
        basis: sx.basis(),
        duals: sx.duals(),
    }
}

/// Rank of a rational matrix via Gaussian elimination.
pub fn rational_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..ncols {
        let pivot = (row..nrows).find(|&i| !Zero::is_zero(&m[i][col]));
        let Some(p) = pivot else { continue };
        m.swap(row, p);
        let pv = m[row][col].clone();
        for v in m[row].iter_mut() {
            *v /= &pv;
        }
        for i in 0..nrows {
            if i != row && !Zero::is_zero(&m[i][col]) {
                let f = m[i][col].clone();
                for c in 0..ncols {
                    if !Zero::is_zero(&m[row][c]) {
                        let delta = &f * &m[row][c];
                        m[i][c] -= delta;
                    }
                }
            }
        }
        row += 1;
        rank += 1;
        if row == nrows {
            break;
        }
    }
    rank
}
