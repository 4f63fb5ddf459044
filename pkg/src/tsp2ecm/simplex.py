"""Dense two-phase primal simplex over exact rationals with bounded variables.

Solves ``min c.x`` subject to rows ``a_i.x (<=|=|>=) b_i`` and
``0 <= x_j <= u_j`` (``u_j = None`` for no upper bound).  Upper bounds are
handled implicitly (nonbasic variables sit at either bound), so they cost no
tableau rows.  Pivoting follows Bland's rule: lowest-index eligible entering
variable, lowest-index blocking variable on ratio ties.  That guarantees
termination, and the returned vertex depends only on the input.

Arithmetic runs on ``gmpy2.mpq``; results are converted to ``Fraction``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .errors import Infeasible

LE, EQ, GE = "<=", "=", ">="


class Unbounded(Exception):
    pass


@dataclass
class LpSolution:
    value: Fraction
    x: list[Fraction]
    duals: list[Fraction]  # one per input row, sign convention: c_B B^-1
    pivots: int


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    def __init__(self, c, rows, senses, rhs, upper):
        ncols = len(c)
        nrows = len(rows)
        self.nstruct = ncols
        self.nrows = nrows
        # slack columns
        slack_of_row = []
        extra = 0
        for s in senses:
            if s == EQ:
                slack_of_row.append(None)
            else:
                slack_of_row.append(ncols + extra)
                extra += 1
        self.art0 = ncols + extra
        total = self.art0 + nrows
        self.total = total
        zero = mpq(0)
        T = []
        beta = []
        sign = []
        for i, (row, s, b) in enumerate(zip(rows, senses, rhs)):
            r = [zero] * total
            if isinstance(row, dict):
                for j, a in row.items():
                    r[j] = mpq(a)
            else:
                for j, a in enumerate(row):
                    if a:
                        r[j] = mpq(a)
            if s == GE:
                r[slack_of_row[i]] = mpq(-1)
            elif s == LE:
                r[slack_of_row[i]] = mpq(1)
            b = mpq(b)
            sg = 1
            if b < 0:
                r = [-a for a in r]
                b = -b
                sg = -1
            r[self.art0 + i] = mpq(1)
            T.append(r)
            beta.append(b)
            sign.append(sg)
        self.T = T
        self.beta = beta
        self.sign = sign
        self.upper = [None if u is None else mpq(u) for u in upper] + [None] * (total - ncols)
        self.at_upper = [False] * total
        self.basis = [self.art0 + i for i in range(nrows)]
        self.is_basic = [False] * total
        for j in self.basis:
            self.is_basic[j] = True
        self.cost = [mpq(x) for x in c] + [zero] * (total - ncols)
        self.pivots = 0

    def _reduced_costs(self, cost):
        d = list(cost)
        for i, bj in enumerate(self.basis):
            cb = cost[bj]
            if cb:
                row = self.T[i]
                for j in range(self.total):
                    a = row[j]
                    if a:
                        d[j] -= cb * a
        return d

    def _run(self, d, eligible):
        T, beta, upper, at_upper = self.T, self.beta, self.upper, self.at_upper
        basis, is_basic = self.basis, self.is_basic
        nrows = self.nrows
        while True:
            enter = -1
            for j in range(self.total):
                if is_basic[j] or not eligible[j]:
                    continue
                dj = d[j]
                if at_upper[j]:
                    if dj > 0:
                        enter = j
                        break
                elif dj < 0 and (upper[j] is None or upper[j] > 0):
                    enter = j
                    break
            if enter < 0:
                return
            j = enter
            direction = -1 if at_upper[j] else 1
            best_t = upper[j]
            leave_row = -1  # -1 means bound flip of the entering variable
            leave_var = j if best_t is not None else None
            for i in range(nrows):
                a = T[i][j]
                if not a:
                    continue
                rate = -a * direction  # change of basic var per unit step
                bi = basis[i]
                if rate < 0:
                    t = beta[i] / (-rate)
                elif upper[bi] is not None:
                    t = (upper[bi] - beta[i]) / rate
                else:
                    continue
                if best_t is None or t < best_t or (t == best_t and bi < leave_var):
                    best_t = t
                    leave_row = i
                    leave_var = bi
            if best_t is None:
                raise Unbounded()
            t = best_t
            if t:
                for i in range(nrows):
                    a = T[i][j]
                    if a:
                        beta[i] -= a * direction * t
            if leave_row < 0:
                at_upper[j] = not at_upper[j]
                continue
            r = leave_row
            old = basis[r]
            entering_value = (upper[j] if at_upper[j] else mpq(0)) + direction * t
            rate_old = -T[r][j] * direction
            # leaving variable lands on the bound it hit
            at_upper[old] = rate_old > 0
            self._pivot(r, j, d)
            beta[r] = entering_value
            at_upper[j] = False
            is_basic[old] = False
            is_basic[j] = True
            basis[r] = j
            self.pivots += 1

    def _pivot(self, r, j, d):
        T = self.T
        prow = T[r]
        piv = prow[j]
        if piv != 1:
            inv = 1 / piv
            prow = [a * inv if a else a for a in prow]
            T[r] = prow
        nz = [k for k, a in enumerate(prow) if a]
        for i in range(self.nrows):
            if i == r:
                continue
            row = T[i]
            f = row[j]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
        f = d[j]
        if f:
            for k in nz:
                d[k] -= f * prow[k]

    def values(self):
        x = [mpq(0)] * self.total
        for j in range(self.total):
            if self.at_upper[j]:
                x[j] = self.upper[j]
        for i, bj in enumerate(self.basis):
            x[bj] = self.beta[i]
        return x


def solve(
    c: Sequence,
    rows: Sequence,
    senses: Sequence[str],
    rhs: Sequence,
    upper: Sequence | None = None,
) -> LpSolution:
    """Minimize ``c.x``; rows are dense lists or ``{column: coeff}`` dicts.

    Raises :class:`Infeasible` or :class:`Unbounded`.
    """
    n = len(c)
    if upper is None:
        upper = [None] * n
    tab = _Tableau(c, rows, senses, rhs, upper)
    total = tab.total
    phase1 = [mpq(0)] * tab.art0 + [mpq(1)] * tab.nrows
    d = tab._reduced_costs(phase1)
    tab._run(d, [True] * total)
    x = tab.values()
    if any(x[tab.art0 + i] for i in range(tab.nrows)):
        raise Infeasible("LP has no feasible point")
    for i in range(tab.nrows):
        tab.upper[tab.art0 + i] = mpq(0)
    eligible = [j < tab.art0 for j in range(total)]
    d = tab._reduced_costs(tab.cost)
    tab._run(d, eligible)
    x = tab.values()
    value = sum((tab.cost[j] * x[j] for j in range(n)), mpq(0))
    # dual of normalized row i is -(reduced cost of its artificial column)
    duals = [_frac(-d[tab.art0 + i] * tab.sign[i]) for i in range(tab.nrows)]
    return LpSolution(_frac(value), [_frac(v) for v in x[:n]], duals, tab.pivots)
