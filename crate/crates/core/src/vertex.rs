//! Vertex operators on the Fock space.
//!
//! For a creation word `u = X_1(-n_1)⋯X_k(-n_k)1` the vertex operator is the
//! normal-ordered product of the derived fields
//!
//! ```text
//! Y(u, x) = ∘∘ ∏_j 1/(n_j-1)! (d/dx)^{n_j-1} X_j(x) ∘∘,
//! X(x) = Σ_n X(n) x^{-n-1},
//! ```
//!
//! where normal ordering moves strictly negative levels to the left of
//! nonnegative levels, preserving the relative order inside each of the two
//! groups. Expanding the product, the coefficient of `x^p` is a finite sum
//! over integer level tuples `(m_1, …, m_k)` with `Σ (m_j + n_j) = -p`, each
//! contributing the reordered mode word with an exact binomial weight.

use crate::fock::{apply_basis_mode, FockElement, FockMonomial};
use crate::scalar::{binomial, Scalar};
use crate::space::FrameSpace;
use std::collections::BTreeMap;

/// A window of Laurent coefficients of `Y(u, x)v`.
///
/// Coefficients outside `[pmin, pmax]` are not claimed; for homogeneous
/// inputs every power below `-(wt u + wt v)` vanishes identically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockLaurent {
    coeffs: BTreeMap<i64, FockElement>,
    pmin: i64,
    pmax: i64,
}

impl FockLaurent {
    pub fn range(&self) -> (i64, i64) {
        (self.pmin, self.pmax)
    }

    /// The coefficient of `x^p`; zero outside the stored support.
    pub fn coefficient(&self, p: i64) -> FockElement {
        assert!(
            (self.pmin..=self.pmax).contains(&p),
            "power {p} outside declared range [{}, {}]",
            self.pmin,
            self.pmax
        );
        self.coeffs.get(&p).cloned().unwrap_or_else(FockElement::zero)
    }

    /// Borrowing variant of [`Self::coefficient`]: `None` means zero.
    pub fn coefficient_ref(&self, p: i64) -> Option<&FockElement> {
        self.coeffs.get(&p)
    }

    pub fn nonzero_powers(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs.keys().copied()
    }
}

/// One surviving term of the normal-ordered field product applied to a
/// creation word.
#[derive(Clone, Debug)]
pub struct FieldTerm<'a> {
    /// Laurent power of the term.
    pub power: i64,
    /// Creations contributed by the operator word, in word order, as
    /// `(frame index, n ≥ 1)` pairs meaning `X(-n)`; they prepend to the
    /// surviving slots of the target.
    pub new_creations: &'a [(usize, i64)],
    /// Bit `s` set iff slot `s` of the target survives (was not contracted).
    pub kept_slots: u64,
    /// Frame indices of the zero modes, in application order: the first
    /// entry is the mode applied last, i.e. leftmost in a tensor word that
    /// accumulates them.
    pub zeros: &'a [usize],
    /// Exact weight of the term (binomials, contraction pairings, signs).
    pub coeff: &'a Scalar,
}

/// Expands the action of the normal-ordered field product of one creation
/// word on a target creation word, visiting only nonzero terms.
///
/// `factors` are the `(frame index, n_j)` pairs of the operator word;
/// `slots` the `(frame index, n)` creations of the target. Each factor
/// either contributes a creation at a free level, acts as a zero mode
/// (forbidden when `zero_modes_vanish` — the vacuum module kills them), or
/// contracts against a distinct target slot of exactly matching level with
/// weight `n · (e_i, e_j)`. Normal ordering guarantees operator creations
/// never contract among themselves, so this enumeration is exhaustive.
pub fn for_each_field_action(
    factors: &[(usize, i64)],
    slots: &[(usize, i64)],
    pmin: i64,
    pmax: i64,
    zero_modes_vanish: bool,
    space: &FrameSpace,
    visit: &mut dyn FnMut(&FieldTerm<'_>),
) {
    assert!(pmin <= pmax, "empty power window");
    assert!(slots.len() <= 64, "too many target slots");
    let k = factors.len();
    let weight_u: i64 = factors.iter().map(|&(_, n)| n).sum();
    if k == 0 {
        if (pmin..=pmax).contains(&0) {
            visit(&FieldTerm {
                power: 0,
                new_creations: &[],
                kept_slots: !0u64,
                zeros: &[],
                coeff: &Scalar::one(),
            });
        }
        return;
    }

    #[derive(Clone, Copy)]
    enum Role {
        Create,
        Zero,
        Annihilate(usize),
    }

    struct Ctx<'s> {
        factors: &'s [(usize, i64)],
        slots: &'s [(usize, i64)],
        pmin: i64,
        pmax: i64,
        zero_modes_vanish: bool,
        space: &'s FrameSpace,
        weight_u: i64,
    }

    let slot_weight: i64 = slots.iter().map(|&(_, n)| n).sum();
    let ctx = Ctx { factors, slots, pmin, pmax, zero_modes_vanish, space, weight_u };
    let mut roles: Vec<Role> = vec![Role::Create; k];
    assign(&ctx, 0, 0u64, 0, 0, slot_weight, &mut roles, visit);

    /// Chooses a role for each factor, then emits all level compositions.
    /// `creators` and `contracted` track the partial assignment; `unused`
    /// is the total level still available to contract against.
    #[allow(clippy::too_many_arguments)]
    fn assign(
        ctx: &Ctx<'_>,
        j: usize,
        used_slots: u64,
        creators: i64,
        contracted: i64,
        unused: i64,
        roles: &mut Vec<Role>,
        visit: &mut dyn FnMut(&FieldTerm<'_>),
    ) {
        // Each creation level is at least 1, so the power can never drop
        // below creators - wt(u) - (contracted + unused).
        if creators - ctx.weight_u - contracted - unused > ctx.pmax {
            return;
        }
        if j == ctx.factors.len() {
            emit(ctx, roles, used_slots, visit);
            return;
        }
        roles[j] = Role::Create;
        assign(ctx, j + 1, used_slots, creators + 1, contracted, unused, roles, visit);
        if !ctx.zero_modes_vanish {
            roles[j] = Role::Zero;
            assign(ctx, j + 1, used_slots, creators, contracted, unused, roles, visit);
        }
        let (idx, _) = ctx.factors[j];
        for (s, &(sidx, level)) in ctx.slots.iter().enumerate() {
            if used_slots & (1 << s) != 0 || ctx.space.pair(idx, sidx).is_zero() {
                continue;
            }
            roles[j] = Role::Annihilate(s);
            assign(
                ctx,
                j + 1,
                used_slots | (1 << s),
                creators,
                contracted + level,
                unused - level,
                roles,
                visit,
            );
        }
        roles[j] = Role::Create;
    }

    /// Fixed roles: the creation levels must sum to
    /// `p + wt(u) + Σ contracted levels`; walk the powers in range and the
    /// compositions of each sum.
    fn emit(
        ctx: &Ctx<'_>,
        roles: &[Role],
        used_slots: u64,
        visit: &mut dyn FnMut(&FieldTerm<'_>),
    ) {
        let mut fixed = Scalar::one();
        let mut contracted = 0i64;
        let mut creators: Vec<usize> = Vec::new();
        let mut zeros: Vec<usize> = Vec::new();
        for (j, role) in roles.iter().enumerate() {
            let (idx, n) = ctx.factors[j];
            match role {
                Role::Create => creators.push(j),
                Role::Zero => {
                    // Weight of the factor at level 0: (-1)^{n-1}·binom(n-1, n-1).
                    if (n - 1) % 2 == 1 {
                        fixed = -fixed;
                    }
                    zeros.push(idx);
                }
                Role::Annihilate(s) => {
                    let (sidx, level) = ctx.slots[*s];
                    contracted += level;
                    let mut w = binomial(level + n - 1, (n - 1) as u32);
                    if (n - 1) % 2 == 1 {
                        w = -w;
                    }
                    fixed *= &(&w * &(&Scalar::from_int(level) * ctx.space.pair(idx, sidx)));
                }
            }
        }
        if fixed.is_zero() {
            return;
        }
        let kept_slots = !used_slots;
        let base = ctx.weight_u + contracted;
        let r = creators.len() as i64;
        // p = Σ μ - base with Σ μ ≥ r (every creation level ≥ 1).
        let total_lo = (ctx.pmin + base).max(r);
        let total_hi = ctx.pmax + base;
        if r == 0 {
            let p = -base;
            if (ctx.pmin..=ctx.pmax).contains(&p) {
                visit(&FieldTerm {
                    power: p,
                    new_creations: &[],
                    kept_slots,
                    zeros: &zeros,
                    coeff: &fixed,
                });
            }
            return;
        }
        let mut levels: Vec<(usize, i64)> =
            creators.iter().map(|&j| (ctx.factors[j].0, 1)).collect();
        for total in total_lo..=total_hi {
            compose(ctx, &creators, &mut levels, 0, total, &fixed, base, kept_slots, &zeros, visit);
        }
    }

    /// Distributes `total` over the creation factors, each level ≥ 1,
    /// multiplying in the factor weights.
    #[allow(clippy::too_many_arguments)]
    fn compose(
        ctx: &Ctx<'_>,
        creators: &[usize],
        levels: &mut Vec<(usize, i64)>,
        pos: usize,
        remaining: i64,
        coeff: &Scalar,
        base: i64,
        kept_slots: u64,
        zeros: &[usize],
        visit: &mut dyn FnMut(&FieldTerm<'_>),
    ) {
        let left = (creators.len() - pos) as i64;
        if pos == creators.len() {
            debug_assert_eq!(remaining, 0);
            let p = levels.iter().map(|&(_, n)| n).sum::<i64>() - base;
            visit(&FieldTerm {
                power: p,
                new_creations: levels,
                kept_slots,
                zeros,
                coeff,
            });
            return;
        }
        let j = creators[pos];
        let (_, n) = ctx.factors[j];
        let lo = if left == 1 { remaining } else { 1 };
        for mu in lo..=(remaining - (left - 1)) {
            // Weight of factor j at level -mu.
            let mut w = binomial(-mu + n - 1, (n - 1) as u32);
            if w.is_zero() {
                continue;
            }
            if (n - 1) % 2 == 1 {
                w = -w;
            }
            levels[pos].1 = mu;
            let c = coeff * &w;
            compose(ctx, creators, levels, pos + 1, remaining - mu, &c, base, kept_slots, zeros, visit);
        }
    }
}

/// Reference enumeration of the field expansion: walks raw integer level
/// tuples and hands the reordered mode word to the visitor. Slower than
/// [`for_each_field_action`] but independent of it; kept as the oracle the
/// tests compare against.
pub fn for_each_field_term(
    factors: &[(usize, i64)],
    target_weight: i64,
    pmin: i64,
    pmax: i64,
    zero_modes_vanish: bool,
    visit: &mut dyn FnMut(i64, &[(usize, i64)], &Scalar),
) {
    assert!(pmin <= pmax, "empty power window");
    let k = factors.len();
    let total_creation: i64 = factors.iter().map(|&(_, n)| n).sum();
    // Σ m_j must land in [slo, shi] for the power to fall in the window.
    let slo = -pmax - total_creation;
    let shi = -pmin - total_creation;
    if k == 0 {
        // Y(1, x) = identity: only the x^0 coefficient survives.
        if (pmin..=pmax).contains(&0) {
            visit(0, &[], &Scalar::one());
        }
        return;
    }
    // All other entries together contribute at most target_weight (the
    // positive levels share one contraction budget), so any single entry is
    // at least slo - target_weight.
    let entry_lo = slo - target_weight;

    let mut levels = vec![0i64; k];
    let mut coeffs = vec![Scalar::one(); k];
    recurse(
        factors,
        target_weight,
        slo,
        shi,
        entry_lo,
        zero_modes_vanish,
        0,
        0,
        target_weight,
        &mut levels,
        &mut coeffs,
        visit,
    );

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        factors: &[(usize, i64)],
        target_weight: i64,
        slo: i64,
        shi: i64,
        entry_lo: i64,
        zero_modes_vanish: bool,
        j: usize,
        sum: i64,
        pos_budget: i64,
        levels: &mut [i64],
        coeffs: &mut [Scalar],
        visit: &mut dyn FnMut(i64, &[(usize, i64)], &Scalar),
    ) {
        let k = factors.len();
        if j == k {
            if sum < slo || sum > shi {
                return;
            }
            let total_creation: i64 = factors.iter().map(|&(_, n)| n).sum();
            let p = -(sum + total_creation);
            let mut weight = Scalar::one();
            for c in coeffs.iter() {
                weight *= c;
            }
            if weight.is_zero() {
                return;
            }
            // Normal order: negative levels first, then nonnegative, both in
            // original relative order.
            let mut arranged: Vec<(usize, i64)> = Vec::with_capacity(k);
            for (f, &m) in factors.iter().zip(levels.iter()) {
                if m < 0 {
                    arranged.push((f.0, m));
                }
            }
            for (f, &m) in factors.iter().zip(levels.iter()) {
                if m >= 0 {
                    arranged.push((f.0, m));
                }
            }
            visit(p, &arranged, &weight);
            return;
        }
        let remaining = (k - j - 1) as i64;
        // Bounds keeping the final sum reachable: the rest can add at most
        // the remaining positive budget and subtract at most |entry_lo| each.
        let hi = (shi - sum - remaining * entry_lo.min(0)).min(pos_budget.max(0));
        let lo = entry_lo.max(slo - sum - pos_budget.max(0));
        let n_j = factors[j].1;
        for m in lo..=hi {
            if m == 0 && zero_modes_vanish {
                continue;
            }
            if m > 0 && m > pos_budget {
                continue;
            }
            // Weight of factor j at level m:
            // (-1)^{n_j - 1} · binom(m + n_j - 1, n_j - 1).
            let mut w = binomial(m + n_j - 1, (n_j - 1) as u32);
            if w.is_zero() {
                continue;
            }
            if (n_j - 1) % 2 == 1 {
                w = -w;
            }
            levels[j] = m;
            coeffs[j] = w;
            let new_budget = if m > 0 { pos_budget - m } else { pos_budget };
            recurse(
                factors,
                target_weight,
                slo,
                shi,
                entry_lo,
                zero_modes_vanish,
                j + 1,
                sum + m,
                new_budget,
                levels,
                coeffs,
                visit,
            );
        }
    }
}

/// The Laurent coefficients of `Y(u, x)v` over `[pmin, pmax]`.
pub fn vertex_operator(
    u: &FockElement,
    v: &FockElement,
    pmin: i64,
    pmax: i64,
    space: &FrameSpace,
) -> FockLaurent {
    let mut coeffs: BTreeMap<i64, FockElement> = BTreeMap::new();
    for (um, uc) in u.terms() {
        for (vm, vc) in v.terms() {
            let slots = vm.creations();
            let scale = uc * vc;
            for_each_field_action(um.creations(), slots, pmin, pmax, true, space, &mut |term| {
                let mut creations =
                    Vec::with_capacity(term.new_creations.len() + slots.len());
                creations.extend_from_slice(term.new_creations);
                for (s, slot) in slots.iter().enumerate() {
                    if term.kept_slots & (1 << s) != 0 {
                        creations.push(*slot);
                    }
                }
                coeffs
                    .entry(term.power)
                    .or_insert_with(FockElement::zero)
                    .add_term(FockMonomial::new(creations), &scale * term.coeff);
            });
        }
    }
    coeffs.retain(|_, e| !e.is_zero());
    FockLaurent { coeffs, pmin, pmax }
}

/// Same coefficients as [`vertex_operator`], computed from the raw tuple
/// enumeration and single-mode actions. Quadratically slower; used as the
/// independent oracle in tests and verification suites.
pub fn vertex_operator_reference(
    u: &FockElement,
    v: &FockElement,
    pmin: i64,
    pmax: i64,
    space: &FrameSpace,
) -> FockLaurent {
    let mut coeffs: BTreeMap<i64, FockElement> = BTreeMap::new();
    for (um, uc) in u.terms() {
        for (vm, vc) in v.terms() {
            let base = FockElement::monomial(vm.clone());
            let scale = uc * vc;
            for_each_field_term(
                um.creations(),
                vm.weight(),
                pmin,
                pmax,
                true,
                &mut |p, modes, w| {
                    let mut cur = base.clone();
                    for &(idx, m) in modes.iter().rev() {
                        cur = apply_basis_mode(idx, m, &cur, space);
                        if cur.is_zero() {
                            return;
                        }
                    }
                    coeffs
                        .entry(p)
                        .or_insert_with(FockElement::zero)
                        .add_scaled(&cur, &(&scale * w));
                },
            );
        }
    }
    coeffs.retain(|_, e| !e.is_zero());
    FockLaurent { coeffs, pmin, pmax }
}

/// The single coefficient of `x^p` in `Y(u, x)v`.
pub fn mode_coefficient(
    u: &FockElement,
    v: &FockElement,
    p: i64,
    space: &FrameSpace,
) -> FockElement {
    vertex_operator(u, v, p, p, space).coefficient(p)
}

/// A failed coefficient comparison in the associativity check.
#[derive(Clone, Debug)]
pub struct AssociativityMismatch {
    /// Powers `(α, β)` of `(x₁ - x₂, x₂)` where the sides differ.
    pub powers: (i64, i64),
    pub lhs: FockElement,
    pub rhs: FockElement,
}

#[derive(Clone, Debug)]
pub struct AssociativityReport {
    pub pass: bool,
    pub first_mismatch: Option<AssociativityMismatch>,
    /// Number of coefficient pairs compared.
    pub compared: usize,
}

/// Checks weak associativity for the triple `(u, v, w)` up to total order
/// `K`, by exact coefficient comparison of
///
/// ```text
/// (x₀ + x₂)^N Y(u, x₀ + x₂) Y(v, x₂) w  =  (x₀ + x₂)^N Y(Y(u, x₀)v, x₂) w,
/// ```
///
/// with `N = wt u + wt w`, so that `x^N Y(u, x)w` has no negative powers and
/// every compared coefficient is a finite exact sum. On the left, powers of
/// `x₀ + x₂` are expanded binomially with `x₂/x₀` small; on the right the
/// factor is an ordinary polynomial. Both sides are compared for every pair
/// of powers `(α, β)` of `(x₀, x₂)` of total order `α + β ≤ K`, down to
/// below the provable truncation bounds.
pub fn check_weak_associativity(
    u: &FockElement,
    v: &FockElement,
    w: &FockElement,
    order: i64,
    space: &FrameSpace,
) -> AssociativityReport {
    let (wu, wv, ww) = (u.max_weight(), v.max_weight(), w.max_weight());
    let n_big = wu + ww;
    // Window: α down to margin below the composed-side truncation
    // -(wu + wv), β down to margin below the iterated-side truncation
    // -(wv + ww); in the margin rows one side vanishes structurally and the
    // check pins the cancellation of the other.
    let alpha_lo = -(wu + wv) - 2;
    let alpha_hi = order + 2;
    let beta_lo = -(wv + ww) - 2;
    let beta_hi = order + (wu + wv) + 2;

    // Iterated side: b → Y_b(v)w, then a → Y_a(u)(Y_b(v)w). Pairs feeding a
    // compared coefficient satisfy a + b = α + β - N ≤ order - N.
    let b_lo = -(wv + ww);
    let vw = vertex_operator(v, w, b_lo, beta_hi, space);
    let mut iterated: BTreeMap<i64, FockLaurent> = BTreeMap::new();
    for b in vw.nonzero_powers() {
        let inner = vw.coefficient_ref(b).expect("nonzero power");
        // Below -(wt u + wt(inner)) the coefficients vanish structurally.
        let a_lo = (alpha_lo + beta_lo - n_big - b).max(-(wu + inner.max_weight()));
        let a_hi = order - n_big - b;
        if a_lo > a_hi {
            continue;
        }
        iterated.insert(b, vertex_operator(u, inner, a_lo, a_hi, space));
    }

    // Composed side: c → Y_c(u)v, then e → Y_e(Y_c(u)v)w, with
    // e ≤ order - c on compared coefficients.
    let c_lo = -(wu + wv);
    let uv = vertex_operator(u, v, c_lo.min(alpha_lo - n_big), alpha_hi, space);
    let mut composed: BTreeMap<i64, FockLaurent> = BTreeMap::new();
    for c in uv.nonzero_powers() {
        let outer = uv.coefficient_ref(c).expect("nonzero power");
        let e_lo = (beta_lo - n_big).max(-(outer.max_weight() + ww));
        let e_hi = order - n_big - c;
        if e_lo > e_hi {
            continue;
        }
        composed.insert(c, vertex_operator(outer, w, e_lo, e_hi, space));
    }

    // Every nonzero coefficient on either side carries weight
    // wt u + wt v + wt w + α + β - N ≥ 0, so total orders below
    // N - (wu + wv + ww) = -wv are identically zero; keep a small margin.
    let total_lo = -wv - 2;

    let mut compared = 0;
    for alpha in alpha_lo..=alpha_hi {
        for beta in (total_lo - alpha).max(beta_lo)..=(order - alpha).min(beta_hi) {
            let mut lhs = FockElement::zero();
            let mut j = 0;
            while beta - j >= b_lo {
                let b = beta - j;
                if let Some(table) = iterated.get(&b) {
                    let a = alpha - n_big + j;
                    let (alo, ahi) = table.range();
                    if a >= alo && a <= ahi {
                        if let Some(term) = table.coefficient_ref(a) {
                            lhs.add_scaled(term, &binomial(alpha + j, j as u32));
                        }
                    }
                }
                j += 1;
            }

            let mut rhs = FockElement::zero();
            for s in 0..=n_big {
                let c = alpha - n_big + s;
                if let Some(table) = composed.get(&c) {
                    let e = beta - s;
                    let (elo, ehi) = table.range();
                    if e >= elo && e <= ehi {
                        if let Some(term) = table.coefficient_ref(e) {
                            rhs.add_scaled(term, &binomial(n_big, s as u32));
                        }
                    }
                }
            }

            compared += 1;
            if lhs != rhs {
                return AssociativityReport {
                    pass: false,
                    first_mismatch: Some(AssociativityMismatch {
                        powers: (alpha, beta),
                        lhs,
                        rhs,
                    }),
                    compared,
                };
            }
        }
    }
    AssociativityReport { pass: true, first_mismatch: None, compared }
}
