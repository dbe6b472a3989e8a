"""Topological epsilon algorithms over arbitrary element spaces.

The full algorithms (:class:`TeaTable`) accelerate a sequence of elements by
alternating between the element space and its dual: odd entries are scalar
multiples of the chosen functional, even entries are elements.  They are kept
here as references.

The simplified algorithms (:class:`TopoEpsTable`) observe that the whole dual
detour can be collapsed: run the plain scalar epsilon algorithm on the scalar
shadow ``s_n = f(S_n)`` and drive the element recursion with coefficients read
off the scalar table.  Each update is then the three-term combination

    next = base + coeff * difference

of two element entries, once per even entry, which both cuts the work and
lets the scalar table's singular-block repairs stabilize the element table
for free.  The two variants differ in which even entries combine:

* first kind:   ``E_{2k+2}^(n) = E_{2k}^(n+1) + c * (E_{2k}^(n+1) - E_{2k}^(n))``
* second kind:  ``E_{2k+2}^(n) = E_{2k}^(n+1) + c * (E_{2k}^(n+2) - E_{2k}^(n+1))``

For each variant the coefficient ``c`` has four algebraically equivalent
forms, selected by ``form=1..4``; they differ only in rounding behaviour and
in which scalar entries they touch.

Storage: the element buffers hold only what later updates still read.  The
first kind needs the two previous half-diagonals of even entries, the second
kind just one; consumed slots are dropped eagerly, so a table of maximal
order K holds at most ``2K + 2`` (first kind) or ``K + 2`` (second kind)
elements at any step boundary, with the update's two operands as the only
transients.  ``peak_slots`` records the audited high-water mark.
"""

from __future__ import annotations

import numpy as np

from .scalar_eps import ScalarEpsTable
from .vectorspace import DualElement, Element, as_element

__all__ = [
    "TopoEpsTable",
    "TeaTable",
    "ratio_series",
    "stability_margin",
]


def _inv(x):
    """1/x that overflows to inf instead of raising on exact zeros."""
    if x == 0:
        return complex("inf") if isinstance(x, complex) else float("inf")
    return 1.0 / x


class TopoEpsTable:
    """Simplified topological epsilon algorithm, first or second kind.

    Parameters
    ----------
    functional : Functional
        The linear functional whose scalar shadow drives the recursion.
    max_k : int
        Highest transform order; even columns ``0, 2, .., 2*max_k`` are built.
    variant : {"stea1", "stea2"}
        First kind combines column neighbours across superscripts n and n+1;
        second kind across n+1 and n+2.
    form : {1, 2, 3, 4}
        Which of the four equivalent coefficient formulas to use.
    p_threshold, particular_rules, singular_parity
        Passed to the underlying scalar table; see :class:`ScalarEpsTable`.
    debug_full : bool
        Keep every element entry in a side dict (exempt from the storage
        discipline) for inspection and testing.

    Attributes
    ----------
    scalar : ScalarEpsTable
        The scalar shadow table; ``scalar.sigma`` counts singular repairs.
    peak_slots : int
        High-water mark of live element slots at step boundaries.
    invalid : set
        ``(column, superscript)`` of entries that could not be formed.
    """

    def __init__(self, functional, max_k, variant="stea2", form=3,
                 p_threshold=10, particular_rules=True,
                 singular_parity="both", debug_full=False):
        if variant not in ("stea1", "stea2"):
            raise ValueError(f"bad variant: {variant!r}")
        if form not in (1, 2, 3, 4):
            raise ValueError(f"bad form: {form!r}")
        if max_k < 0:
            raise ValueError("max_k must be >= 0")
        self.functional = functional
        self.max_k = max_k
        self.variant = variant
        self.form = form
        self.scalar = ScalarEpsTable(
            max_col=2 * max_k + 2, p_threshold=p_threshold,
            particular_rules=particular_rules, singular_parity=singular_parity)
        self.debug_full = debug_full
        self._full = {} if debug_full else None
        self.invalid = set()
        self.peak_slots = 0
        self.n_terms = 0
        self._shape = None
        K = max_k
        self._prev = [None] * (K + 1)
        self._older = [None] * (K + 1) if variant == "stea1" else None

    @property
    def sigma(self):
        return self.scalar.sigma

    # -- building ----------------------------------------------------------

    def append(self, S):
        """Add one term; returns new even entries as ``(column, n, Element)``."""
        S = as_element(S)
        if self._shape is None:
            self._shape = S.shape
        elif S.shape != self._shape:
            raise ValueError(f"term shape {S.shape} != first term {self._shape}")
        s = self.functional(S)
        self.scalar.append(s)

        N = self.n_terms
        K = self.max_k
        jmax = min(N, 2 * K) // 2

        # Slots the coming sweep will never read are dead: drop them first.
        stale = self._older if self.variant == "stea1" else self._prev
        for m in range(jmax, K + 1):
            stale[m] = None

        cur = [None] * (K + 1)
        cur[0] = S
        out = [(0, N, S)]
        if self._full is not None:
            self._full[(0, N)] = S
        self._sample_live(cur)

        for j in range(1, jmax + 1):
            k = j - 1
            n = N - 2 * j
            coeff = self._coefficient(k, n)
            if self.variant == "stea1":
                a = self._prev[j - 1]       # E_{2k}^(n+1), one diagonal back
                b = self._older[j - 1]      # E_{2k}^(n),  two diagonals back
                e = self._combine(a, coeff, a, b)
                self._older[j - 1] = None
            else:
                a = self._prev[j - 1]       # E_{2k}^(n+1), one diagonal back
                b = cur[j - 1]              # E_{2k}^(n+2), this diagonal
                e = self._combine(a, coeff, b, a)
                self._prev[j - 1] = None
            cur[j] = e
            if e is None:
                self.invalid.add((2 * j, n))
            else:
                out.append((2 * j, n, e))
            if self._full is not None:
                self._full[(2 * j, n)] = e
            self._sample_live(cur)

        if self.variant == "stea1":
            self._older = self._prev
        self._prev = cur
        self.n_terms = N + 1
        return out

    def extend(self, terms):
        for S in terms:
            self.append(S)
        return self

    @staticmethod
    def _combine(base, coeff, hi, lo):
        """``base + coeff * (hi - lo)`` with None/NaN poisoning."""
        if base is None or hi is None or lo is None or coeff is None:
            return None
        if not np.isfinite(coeff):
            return None
        return base + coeff * (hi - lo)

    def _coefficient(self, k, n):
        """Scalar coefficient for the entry in column ``2k + 2`` at ``n``."""
        sc = self.scalar.entry
        if self.variant == "stea1":
            if self.form == 1:
                d1 = _d(sc(2 * k, n + 1), sc(2 * k, n))
                d2 = _d(sc(2 * k + 1, n + 1), sc(2 * k + 1, n))
                return _mulinv(d1, d2)
            if self.form == 2:
                num = _d(sc(2 * k + 1, n), sc(2 * k - 1, n + 1))
                den = _d(sc(2 * k + 1, n + 1), sc(2 * k + 1, n))
                return _ratio(num, den)
            if self.form == 3:
                num = _d(sc(2 * k + 2, n), sc(2 * k, n + 1))
                den = _d(sc(2 * k, n + 1), sc(2 * k, n))
                return _ratio(num, den)
            num1 = _d(sc(2 * k + 1, n), sc(2 * k - 1, n + 1))
            num2 = _d(sc(2 * k + 2, n), sc(2 * k, n + 1))
            return _mul(num1, num2)
        if self.form == 1:
            d1 = _d(sc(2 * k, n + 2), sc(2 * k, n + 1))
            d2 = _d(sc(2 * k + 1, n + 1), sc(2 * k + 1, n))
            return _mulinv(d1, d2)
        if self.form == 2:
            num = _d(sc(2 * k + 1, n + 1), sc(2 * k - 1, n + 2))
            den = _d(sc(2 * k + 1, n + 1), sc(2 * k + 1, n))
            return _ratio(num, den)
        if self.form == 3:
            num = _d(sc(2 * k + 2, n), sc(2 * k, n + 1))
            den = _d(sc(2 * k, n + 2), sc(2 * k, n + 1))
            return _ratio(num, den)
        num1 = _d(sc(2 * k + 1, n + 1), sc(2 * k - 1, n + 2))
        num2 = _d(sc(2 * k + 2, n), sc(2 * k, n + 1))
        return _mul(num1, num2)

    def _sample_live(self, cur):
        live = sum(x is not None for x in cur)
        live += sum(x is not None for x in self._prev)
        if self._older is not None:
            live += sum(x is not None for x in self._older)
        if live > self.peak_slots:
            self.peak_slots = live

    # -- access --------------------------------------------------------------

    def entry(self, col, n):
        """Element at even column ``col``; None unless kept (buffers or debug)."""
        if col % 2 != 0:
            raise ValueError("element entries live in even columns")
        if self._full is not None:
            return self._full.get((col, n))
        d = col + n
        j = col // 2
        if j > self.max_k or n < 0:
            return None
        if d == self.n_terms - 1:
            return self._prev[j]
        if self.variant == "stea1" and d == self.n_terms - 2:
            return self._older[j]
        return None

    def last_entries(self):
        """Live even entries of the newest diagonal as ``(column, n, Element)``."""
        N = self.n_terms - 1
        return [(2 * j, N - 2 * j, e)
                for j, e in enumerate(self._prev) if e is not None]

    def best(self):
        """Highest-order live entry of the newest diagonal."""
        entries = self.last_entries()
        return entries[-1] if entries else None


class TeaTable:
    """Full topological epsilon algorithm, first or second kind.

    Even entries are elements, odd entries are multiples of the functional
    (:class:`DualElement`).  Slower and hungrier than :class:`TopoEpsTable`
    and with no singular-block protection; kept as the reference the
    simplified tables are checked against.

    Storage: each new ascending diagonal overwrites the previous one in
    place, under a two-slot chain of the just-unseated entries (the western
    operands).  That alone suffices for the second kind.  The first kind
    also reads even entries two diagonals back, so those are parked in a
    half-length side buffer as they are unseated.  Peak storage is therefore
    one mixed diagonal plus two temporaries (second kind) plus the half
    diagonal (first kind); ``peak_slots``/``peak_duals``/``peak_total``
    record the audited high-water marks.
    """

    def __init__(self, functional, max_k, variant="tea1", debug_full=False):
        if variant not in ("tea1", "tea2"):
            raise ValueError(f"bad variant: {variant!r}")
        self.functional = functional
        self.max_k = max_k
        self.variant = variant
        self.debug_full = debug_full
        self._full = {} if debug_full else None
        self.invalid = set()
        self.n_terms = 0
        self.peak_slots = 0
        self.peak_duals = 0
        self.peak_total = 0
        self._diag = [None] * (2 * max_k + 1)
        self._half = [None] * max_k if variant == "tea1" else None

    def append(self, S):
        """Add one term; returns new even entries as ``(column, n, Element)``."""
        S = as_element(S)
        N = self.n_terms
        cmax = min(N, 2 * self.max_k)
        f = self.functional
        B = self._diag
        out = []
        t1 = None   # unseated B[c-1], the previous diagonal one column west
        t2 = None   # unseated B[c-2]

        for c in range(0, cmax + 1):
            old = B[c]
            n = N - c
            if c == 0:
                val = S
            elif c % 2 == 1:
                base = t2 if c >= 3 else DualElement(0.0, f)
                hi, lo = B[c - 1], t1
                if base is None or hi is None or lo is None:
                    val = None
                else:
                    den = f(hi - lo)
                    val = DualElement(base.coefficient + _inv(den), f)
            else:
                base = t2
                dual_hi, dual_lo = B[c - 1], t1
                if self.variant == "tea1":
                    j = (c - 2) // 2
                    other = self._half[j]
                    # base is this diagonal's unseated even entry at c-2:
                    # exactly what the next sweep reads two diagonals back
                    self._half[j] = base
                    diff = None if (base is None or other is None) else base - other
                else:
                    other = B[c - 2]
                    diff = None if (base is None or other is None) else other - base
                if base is None or diff is None or dual_hi is None or dual_lo is None:
                    val = None
                else:
                    den = (dual_hi.coefficient - dual_lo.coefficient) * f(diff)
                    val = base + _inv(den) * diff
            B[c] = val
            if (self.variant == "tea1" and c % 2 == 0 and c + 2 > cmax
                    and c // 2 < self.max_k):
                # the parking step c+2 is beyond this sweep (growing table):
                # park the unseated even entry now or it is lost
                self._half[c // 2] = old
            t1, t2 = old, t1
            if val is None:
                self.invalid.add((c, n))
            elif c % 2 == 0:
                out.append((c, n, val))
            if self._full is not None:
                self._full[(c, n)] = val
            self._sample_live((t1, t2))

        self.n_terms = N + 1
        return out

    def extend(self, terms):
        for S in terms:
            self.append(S)
        return self

    def _sample_live(self, temps):
        bufs = [self._diag, temps]
        if self._half is not None:
            bufs.append(self._half)
        live = sum(isinstance(x, Element) for buf in bufs for x in buf)
        duals = sum(isinstance(x, DualElement) for buf in bufs for x in buf)
        if live > self.peak_slots:
            self.peak_slots = live
        if duals > self.peak_duals:
            self.peak_duals = duals
        if live + duals > self.peak_total:
            self.peak_total = live + duals

    def entry(self, col, n):
        """Kept entry at ``(col, n)``: buffers, or anything in debug mode."""
        if self._full is not None:
            return self._full.get((col, n))
        d = col + n
        if d == self.n_terms - 1:
            return self._diag[col]
        if (self._half is not None and d == self.n_terms - 2
                and col % 2 == 0 and col // 2 < self.max_k):
            return self._half[col // 2]
        return None

    def last_entries(self):
        N = self.n_terms - 1
        return [(c, N - c, e) for c, e in enumerate(self._diag)
                if e is not None and c % 2 == 0]

    def best(self):
        entries = self.last_entries()
        return entries[-1] if entries else None


# -- coefficient arithmetic with None/zero poisoning -------------------------

def _d(a, b):
    if a is None or b is None:
        return None
    return a - b


def _mul(a, b):
    if a is None or b is None:
        return None
    return a * b


def _ratio(num, den):
    if num is None or den is None:
        return None
    return num * _inv(den) if den == 0 else num / den


def _mulinv(d1, d2):
    if d1 is None or d2 is None:
        return None
    prod = d1 * d2
    return _inv(prod)


# -- diagnostics --------------------------------------------------------------

def _shadow(table):
    if isinstance(table, ScalarEpsTable):
        return table
    return table.scalar


def ratio_series(table):
    """Measured column-to-column improvement ratios of the scalar shadow.

    For each order k returns the series ``(n, r_k^(n))`` with

        r_k^(n) = (e_{2k+2}^(n) - e_{2k}^(n+1)) / (e_{2k}^(n+1) - e_{2k}^(n)).

    ``|r|`` small means column 2k+2 genuinely improves on column 2k; for a
    sequence dominated by one geometric mode with ratio ``lam`` the series
    tends to ``lam / (1 - lam)``.  Accepts a scalar table or a topological
    table (whose scalar shadow is used).
    """
    sc = _shadow(table)
    out = {}
    kmax_col = max((len(d) for d in sc._diags), default=0) - 1
    for k in range(0, max(0, kmax_col // 2)):
        series = []
        for n in range(0, sc.n_terms):
            e22 = sc.entry(2 * k + 2, n)
            ehi = sc.entry(2 * k, n + 1)
            elo = sc.entry(2 * k, n)
            if e22 is None or ehi is None or elo is None:
                continue
            den = ehi - elo
            if den == 0 or not np.isfinite(np.abs(den)):
                continue
            series.append((n, (e22 - ehi) / den))
        if series:
            out[k] = series
    return out


def stability_margin(table, k):
    """Rounding amplification bounds for column ``2k + 2`` of the shadow.

    Returns the list of margins for n = 0, 1, ... (as far as the table
    reaches), where

        margin = |e_{2k+2}^(n) - e_{2k}^(n)| / |e_{2k}^(n+1) - e_{2k}^(n)|
               + |e_{2k+2}^(n) - e_{2k}^(n+1)| / |e_{2k}^(n+1) - e_{2k}^(n)|.

    A perturbation of the operand entries is magnified by at most this factor
    (to first order), so margins near 1 mean a numerically safe step and huge
    margins flag the steps where singular-block repairs earn their keep.  A
    zero denominator (degenerate column, e.g. a kernel sequence transformed
    exactly) gives a non-finite margin rather than a gap.
    """
    sc = _shadow(table)
    series = []
    for n in range(0, sc.n_terms):
        e22 = sc.entry(2 * k + 2, n)
        ehi = sc.entry(2 * k, n + 1)
        elo = sc.entry(2 * k, n)
        if e22 is None or ehi is None or elo is None:
            break
        den = abs(ehi - elo)
        with np.errstate(divide="ignore", invalid="ignore"):
            m = float(np.divide(abs(e22 - elo), den) + np.divide(abs(e22 - ehi), den))
        series.append(m)
    return series
