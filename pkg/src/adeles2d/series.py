"""Truncated iterated Laurent series over finite fields.

This is the computational model of the two-dimensional local field
k(x)((u))((t)): a sparse dict of (t-exponent, u-exponent) -> coefficient
together with a precision box.  `t_prec` is the first unknown t-exponent and
`u_prec` the first unknown u-exponent, uniform across t-columns; both may be
`inf`, meaning the series is exact in that variable.  Inside the box, absent
keys are exactly zero; outside it, nothing is claimed.  "Exact zero" (no
terms, both precisions infinite) and "zero at this precision" are therefore
different states, and only the former participates in equality assertions.

Valuations are reported with respect to the tracked window: expansion and
inversion routines arrange their output so that the leading tracked column is
genuinely the leading column of the underlying series.

Precision bookkeeping is deliberately conservative.  Multiplication uses the
box rule new_prec = min(prec_a + val_b, prec_b + val_a) in each variable
(valuations taken over tracked terms), addition intersects boxes, and
substitution additionally caps the u-window using u-drop slopes measured on
the parameter images (see `LaurentSeries2.substitute`).
"""

from __future__ import annotations

import math
import re
from typing import Dict, Iterable, List, Optional, Tuple

from .fields import FieldDesc, FieldElem

INF = math.inf
DEFAULT_PREC = 16


class PrecisionError(ArithmeticError):
    """A computation needed coefficients outside the tracked window."""


def _as_prec(x) -> float:
    return INF if x == INF else int(x)


class LaurentSeries1:
    """A one-variable truncated Laurent series (the residue level k(x)((u)))."""

    __slots__ = ("desc", "terms", "prec")

    def __init__(self, desc: FieldDesc, terms: Dict[int, FieldElem], prec=INF):
        self.desc = desc
        self.prec = _as_prec(prec)
        self.terms = {e: c for e, c in terms.items() if not c.is_zero() and e < self.prec}

    def is_exact(self) -> bool:
        return self.prec == INF

    def is_zero_window(self) -> bool:
        return not self.terms

    def valuation(self) -> int:
        if not self.terms:
            raise PrecisionError("series is indistinguishable from 0 in u at this precision")
        return min(self.terms)

    def leading(self) -> FieldElem:
        return self.terms[self.valuation()]

    def coeff(self, e: int) -> FieldElem:
        if e >= self.prec:
            raise PrecisionError(f"u-exponent {e} outside tracked window")
        return self.terms.get(e, self.desc.zero())

    def __mul__(self, other: "LaurentSeries1") -> "LaurentSeries1":
        va = min(self.terms) if self.terms else self.prec
        vb = min(other.terms) if other.terms else other.prec
        prec = min(self.prec + vb, other.prec + va)
        out: Dict[int, FieldElem] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = ea + eb
                if e >= prec:
                    continue
                c = ca * cb
                cur = out.get(e)
                s = c if cur is None else cur + c
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        return LaurentSeries1(self.desc, out, prec)

    def __eq__(self, other):
        return (
            isinstance(other, LaurentSeries1)
            and self.desc == other.desc
            and self.terms == other.terms
            and self.prec == other.prec
        )

    def __repr__(self):
        body = ", ".join(f"u^{e}: {self.terms[e]!r}" for e in sorted(self.terms)) or "0"
        tail = "" if self.prec == INF else f" + O(u^{int(self.prec)})"
        return body + tail


class LaurentSeries2:
    """A two-variable truncated Laurent series in u and t (t outermost)."""

    __slots__ = ("desc", "terms", "t_prec", "u_prec")

    def __init__(self, desc: FieldDesc, terms: Dict[Tuple[int, int], FieldElem],
                 t_prec=INF, u_prec=INF):
        self.desc = desc
        self.t_prec = _as_prec(t_prec)
        self.u_prec = _as_prec(u_prec)
        self.terms = {
            k: c for k, c in terms.items()
            if not c.is_zero() and k[0] < self.t_prec and k[1] < self.u_prec
        }

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, desc: FieldDesc, t_prec=INF, u_prec=INF) -> "LaurentSeries2":
        return cls(desc, {}, t_prec, u_prec)

    @classmethod
    def const(cls, desc: FieldDesc, a: FieldElem, t_prec=INF, u_prec=INF) -> "LaurentSeries2":
        return cls(desc, {(0, 0): a}, t_prec, u_prec)

    @classmethod
    def one(cls, desc: FieldDesc) -> "LaurentSeries2":
        return cls.const(desc, desc.one())

    @classmethod
    def monomial(cls, desc: FieldDesc, a: FieldElem, t_exp: int, u_exp: int,
                 t_prec=INF, u_prec=INF) -> "LaurentSeries2":
        return cls(desc, {(t_exp, u_exp): a}, t_prec, u_prec)

    # -- state queries -------------------------------------------------------

    def is_exact(self) -> bool:
        return self.t_prec == INF and self.u_prec == INF

    def is_zero_window(self) -> bool:
        return not self.terms

    def is_exact_zero(self) -> bool:
        return not self.terms and self.is_exact()

    def _tv(self) -> float:
        """Least tracked t-exponent, or t_prec when the window is all zero."""
        return min(k[0] for k in self.terms) if self.terms else self.t_prec

    def _uv(self) -> float:
        return min(k[1] for k in self.terms) if self.terms else self.u_prec

    def t_valuation(self) -> int:
        if not self.terms:
            raise PrecisionError("series is indistinguishable from 0 in t at this precision")
        return min(k[0] for k in self.terms)

    def column(self, t_exp: int) -> LaurentSeries1:
        """The coefficient of t^t_exp, a one-variable series in u."""
        if t_exp >= self.t_prec:
            raise PrecisionError(f"t-exponent {t_exp} outside tracked window")
        return LaurentSeries1(
            self.desc,
            {u: c for (t, u), c in self.terms.items() if t == t_exp},
            self.u_prec,
        )

    def coeff(self, t_exp: int, u_exp: int) -> FieldElem:
        if t_exp >= self.t_prec or u_exp >= self.u_prec:
            raise PrecisionError(f"coefficient ({t_exp},{u_exp}) outside tracked window")
        return self.terms.get((t_exp, u_exp), self.desc.zero())

    # -- ring operations -----------------------------------------------------

    def _check_desc(self, other: "LaurentSeries2"):
        if self.desc != other.desc:
            raise ValueError("mismatched coefficient fields")

    def __add__(self, other: "LaurentSeries2") -> "LaurentSeries2":
        self._check_desc(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            cur = out.get(k)
            s = c if cur is None else cur + c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return LaurentSeries2(self.desc, out,
                              min(self.t_prec, other.t_prec),
                              min(self.u_prec, other.u_prec))

    def __neg__(self) -> "LaurentSeries2":
        return LaurentSeries2(self.desc, {k: -c for k, c in self.terms.items()},
                              self.t_prec, self.u_prec)

    def __sub__(self, other: "LaurentSeries2") -> "LaurentSeries2":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries2") -> "LaurentSeries2":
        self._check_desc(other)
        t_prec = min(self.t_prec + other._tv(), other.t_prec + self._tv())
        u_prec = min(self.u_prec + other._uv(), other.u_prec + self._uv())
        if math.isnan(t_prec):
            t_prec = INF  # inf + (-inf) cannot occur; guard stays for safety
        out: Dict[Tuple[int, int], FieldElem] = {}
        for (ta, ua), ca in self.terms.items():
            for (tb, ub), cb in other.terms.items():
                k = (ta + tb, ua + ub)
                if k[0] >= t_prec or k[1] >= u_prec:
                    continue
                c = ca * cb
                cur = out.get(k)
                s = c if cur is None else cur + c
                if s.is_zero():
                    out.pop(k, None)
                else:
                    out[k] = s
        return LaurentSeries2(self.desc, out, t_prec, u_prec)

    def scale(self, a: FieldElem) -> "LaurentSeries2":
        if a.is_zero():
            return LaurentSeries2(self.desc, {}, self.t_prec, self.u_prec)
        return LaurentSeries2(self.desc, {k: c * a for k, c in self.terms.items()},
                              self.t_prec, self.u_prec)

    def shift(self, dt: int, du: int) -> "LaurentSeries2":
        """Multiply by the exact monomial t^dt u^du."""
        return LaurentSeries2(
            self.desc,
            {(t + dt, u + du): c for (t, u), c in self.terms.items()},
            self.t_prec + dt, self.u_prec + du,
        )

    def truncate(self, t_to=None, u_to=None) -> "LaurentSeries2":
        t_prec = self.t_prec if t_to is None else min(self.t_prec, _as_prec(t_to))
        u_prec = self.u_prec if u_to is None else min(self.u_prec, _as_prec(u_to))
        return LaurentSeries2(self.desc, self.terms, t_prec, u_prec)

    def inverse(self, t_window: Optional[int] = None,
                u_window: Optional[int] = None) -> "LaurentSeries2":
        """Multiplicative inverse.

        For truncated input the result carries the largest provable window;
        for exact input with a non-monomial expansion the window defaults to
        `t_window`/`u_window` (DEFAULT_PREC) above the valuation.
        """
        lt = DEFAULT_PREC if t_window is None else t_window
        lu = DEFAULT_PREC if u_window is None else u_window
        if self.is_exact_zero():
            raise ZeroDivisionError("inverse of the exact zero series")
        if not self.terms:
            raise PrecisionError("cannot invert: series is indistinguishable from 0 in t")
        vt = self.t_valuation()
        lead = {u: c for (t, u), c in self.terms.items() if t == vt}
        vu_lead = min(lead)
        size = lt if self.t_prec == INF else int(self.t_prec - vt)
        if size <= 0:
            raise PrecisionError("cannot invert: empty provable window in t")
        # Later columns dipping below the leading column's u-valuation erode
        # one u-level per geometric step; for exact input, inflate the working
        # window so the requested one survives the cascade.
        higher = [u for (t, u) in self.terms if t != vt]
        drop = max(0, vu_lead - min(higher)) if higher else 0
        lu_eff = lu if self.u_prec != INF else lu + size * drop
        icol, icol_prec = _invert_column(lead, self.u_prec, lu_eff, self.desc)
        y0 = LaurentSeries2(self.desc, {(-vt, u): c for u, c in icol.items()},
                            INF, icol_prec)
        if not higher and self.t_prec == INF:
            return y0
        # normalize: self * y0 = 1 + r with r of positive t-valuation
        r = self * y0 - LaurentSeries2.one(self.desc)
        negr = (-r).truncate(t_to=size)
        one = LaurentSeries2.one(self.desc)
        total = one
        term = one
        for _ in range(1, size):
            term = (term * negr).truncate(t_to=size)
            if term.is_zero_window():
                # all remaining powers live above the t-window
                break
            total = total + term
        out = (y0 * total).truncate(t_to=size - vt)
        if self.u_prec == INF:
            out = out.truncate(u_to=-vu_lead + lu)
        return out

    def __pow__(self, n: int) -> "LaurentSeries2":
        if n < 0:
            return self.inverse() ** (-n)
        result = LaurentSeries2.one(self.desc)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derive(self, var: str) -> "LaurentSeries2":
        """Termwise formal derivative; the window shrinks by one in `var`."""
        if var not in ("u", "t"):
            raise ValueError("var must be 'u' or 't'")
        idx = 0 if var == "t" else 1
        out: Dict[Tuple[int, int], FieldElem] = {}
        for (t, u), c in self.terms.items():
            e = (t, u)[idx]
            nc = c * self.desc.from_int(e)
            if nc.is_zero():
                continue
            nk = (t - 1, u) if idx == 0 else (t, u - 1)
            out[nk] = nc
        if idx == 0:
            return LaurentSeries2(self.desc, out, self.t_prec - 1, self.u_prec)
        return LaurentSeries2(self.desc, out, self.t_prec, self.u_prec - 1)

    # -- substitution ----------------------------------------------------------

    def substitute(self, u_image: "LaurentSeries2", t_image: "LaurentSeries2",
                   t_cap=None, u_cap=None) -> "LaurentSeries2":
        """Composite series f(u_image, t_image).

        Preconditions: t_image has t-valuation >= 1; u_image has t-valuation 0
        with its t^0 column of u-valuation >= 1 (local parameters map to local
        parameters).  The u-window of the result is capped by tail bounds
        computed from u-drop slopes measured on the tracked image terms, so
        image windows must already exhibit every slope of the underlying
        series (automatic for exact images and for monomial-times-unit
        images, the forms used internally).

        `t_cap`/`u_cap` bound the requested window.  A tight `t_cap` is how a
        caller that only needs low t-columns keeps the uniform u-window from
        eroding: intermediate products (inverted images in particular) are
        then truncated early, and the tail bound is evaluated only up to the
        capped column.
        """
        U, T = u_image, t_image
        self._check_desc(U)
        self._check_desc(T)
        if T.is_zero_window() or T.t_valuation() < 1:
            raise ValueError("t_image must have t-valuation >= 1")
        if U.is_zero_window() or U._tv() != 0:
            raise ValueError("u_image must have t-valuation 0")
        u_lead = {u for (t, u) in U.terms if t == 0}
        if not u_lead or min(u_lead) < 1:
            raise ValueError("u_image must have u-valuation >= 1 at t^0")
        if not self.terms:
            return LaurentSeries2(self.desc, {}, self.t_prec, self.u_prec)

        vT = T.t_valuation()
        cuT = min(u for (t, u) in T.terms if t == vT)
        vaU = min(u_lead)
        sigma = 0.0
        for (t, u) in U.terms:
            if t >= 1:
                sigma = max(sigma, (vaU - u) / t)
        for (t, u) in T.terms:
            if t > vT:
                sigma = max(sigma, (cuT - u) / (t - vT))

        # provable caps against this series' own unknown tails
        vt_f = self.t_valuation()
        if self.t_prec == INF:
            tcap = INF
        else:
            tcap = min(self.t_prec, self.t_prec * vT)
        if t_cap is not None:
            tcap = min(tcap, _as_prec(t_cap))
        if self.u_prec == INF:
            ucap = INF
        else:
            if tcap == INF and sigma > 0:
                # slope contamination grows without bound in t; pick a finite
                # t-window so a uniform u-window exists at all
                tcap = vt_f * vT + DEFAULT_PREC
            bmax = (self.t_prec - 1) if self.t_prec != INF else max(t for (t, _) in self.terms)
            m = min(b * (cuT + sigma * vT) for b in (vt_f, bmax))
            worst_col = (tcap - 1) if tcap != INF else 0
            ucap = math.floor(self.u_prec * vaU + m - sigma * worst_col)
        if u_cap is not None:
            ucap = min(ucap, _as_prec(u_cap))

        # evaluate column by column (Horner over t, cached powers in u)
        cols: Dict[int, Dict[int, FieldElem]] = {}
        for (t, u), c in self.terms.items():
            cols.setdefault(t, {})[u] = c
        # working t-truncation: generous enough that the final T^vt_f shift
        # (downward when vt_f < 0) still lands every needed column
        work_cap = INF if tcap == INF else int(tcap) + max(0, -vt_f) * vT

        def npow(base: "LaurentSeries2", n: int) -> LaurentSeries2:
            """base ** n, truncating the inverse before powering so the
            triangular tail of the inverse cannot erode the u-window."""
            if n >= 0:
                return base ** n
            inv = base.inverse()
            if work_cap != INF:
                inv = inv.truncate(t_to=work_cap)
            return inv ** (-n)

        u_pows: Dict[int, LaurentSeries2] = {}

        def upow(n: int) -> LaurentSeries2:
            got = u_pows.get(n)
            if got is None:
                got = npow(U, n)
                u_pows[n] = got
            return got

        def eval_column(col: Dict[int, FieldElem]) -> LaurentSeries2:
            vu = min(col)
            acc = LaurentSeries2.zero(self.desc)
            for a, c in sorted(col.items()):
                acc = acc + upow(a - vu).scale(c)
            return acc * upow(vu) if vu != 0 else acc

        exps = sorted(cols)
        acc = LaurentSeries2.zero(self.desc)
        prev: Optional[int] = None
        for b in reversed(exps):
            if prev is not None:
                acc = acc * (T ** (prev - b))
                if work_cap != INF:
                    acc = acc.truncate(t_to=work_cap)
            acc = acc + eval_column(cols[b])
            prev = b
        if vt_f != 0:
            acc = acc * npow(T, vt_f)
        return acc.truncate(t_to=tcap, u_to=ucap)

    # -- comparison and display ------------------------------------------------

    def agree(self, other: "LaurentSeries2") -> bool:
        """Equality of all coefficients inside the common window."""
        self._check_desc(other)
        t_prec = min(self.t_prec, other.t_prec)
        u_prec = min(self.u_prec, other.u_prec)
        for k, c in self.terms.items():
            if k[0] < t_prec and k[1] < u_prec and other.terms.get(k) != c:
                return False
        for k, c in other.terms.items():
            if k[0] < t_prec and k[1] < u_prec and self.terms.get(k) != c:
                return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, LaurentSeries2)
            and self.desc == other.desc
            and self.terms == other.terms
            and self.t_prec == other.t_prec
            and self.u_prec == other.u_prec
        )

    def __repr__(self):
        body = ls2_to_text(self)
        wins = []
        if self.t_prec != INF:
            wins.append(f"O(t^{int(self.t_prec)})")
        if self.u_prec != INF:
            wins.append(f"O(u^{int(self.u_prec)})")
        return body + (" + " + " + ".join(wins) if wins else "")


class LocalForm2:
    """A local 2-form f du^dt at a flag: the series f in fixed coordinates."""

    __slots__ = ("body",)

    def __init__(self, body: LaurentSeries2):
        self.body = body

    def __repr__(self):
        return f"({self.body!r}) du^dt"


def _invert_column(col: Dict[int, FieldElem], u_prec, lu: int,
                   desc: FieldDesc) -> Tuple[Dict[int, FieldElem], float]:
    """Invert a one-variable Laurent column; returns (terms, result u_prec)."""
    if not col:
        raise PrecisionError("cannot invert: leading t-column is indistinguishable from 0 in u")
    vu = min(col)
    c0 = col[vu]
    c0i = c0.inverse()
    if len(col) == 1:
        prec = INF if u_prec == INF else u_prec - 2 * vu
        return {-vu: c0i}, prec
    size = lu if u_prec == INF else int(u_prec - vu)
    if size <= 0:
        raise PrecisionError("cannot invert: empty provable window in u")
    # normalized tail s_j = col[vu+j] / c0; e_k = -sum_{j>=1} s_j e_{k-j}
    s = {j - vu: c for j, c in col.items() if j != vu}
    e: List[FieldElem] = [desc.one()]
    for k in range(1, size):
        acc = desc.zero()
        for j, cj in s.items():
            if 0 <= k - j < len(e):
                acc = acc + cj * c0i * e[k - j]
        e.append(-acc)
    out = {}
    for k, ek in enumerate(e):
        v = ek * c0i
        if not v.is_zero():
            out[k - vu] = v
    prec = (-vu + size) if u_prec == INF else u_prec - 2 * vu
    return out, prec


# ---------------------------------------------------------------------------
# operation wrappers and serialization


def ls2_arith(a: LaurentSeries2, b: Optional[LaurentSeries2], op: str) -> LaurentSeries2:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv_of_a":
        return a.inverse()
    raise ValueError(f"unknown series operation {op!r}")


def ls2_substitute(f: LaurentSeries2, u_image: LaurentSeries2,
                   t_image: LaurentSeries2, t_cap=None, u_cap=None) -> LaurentSeries2:
    return f.substitute(u_image, t_image, t_cap=t_cap, u_cap=u_cap)


def ls2_derive(f: LaurentSeries2, var: str) -> LaurentSeries2:
    return f.derive(var)


def ls2_valuation(f: LaurentSeries2) -> Tuple[int, int]:
    """(vt, vu): least t-exponent and the u-valuation of that column."""
    vt = f.t_valuation()
    vu = min(u for (t, u) in f.terms if t == vt)
    return vt, vu


def res2(w) -> FieldElem:
    """The two-dimensional residue: the u^-1 t^-1 coefficient of the form.

    Accepts a LocalForm2 or a bare coefficient series (for f du^dt).
    """
    body = w.body if isinstance(w, LocalForm2) else w
    if body.t_prec <= -1 or body.u_prec <= -1:
        raise PrecisionError("residue slot (-1,-1) lies outside the tracked window")
    return body.terms.get((-1, -1), body.desc.zero())


def _coeff_to_text(c: FieldElem) -> str:
    if c.desc.d == 1:
        return str(c.coeffs[0])
    return "[" + ",".join(str(v) for v in c.coeffs) + "]"


def ls2_to_text(f: LaurentSeries2) -> str:
    """Sparse text form `t^B*u^A: C`, terms sorted by (t, u) exponent."""
    if not f.terms:
        return "0"
    bits = []
    for (t, u) in sorted(f.terms):
        bits.append(f"t^{t}*u^{u}: {_coeff_to_text(f.terms[(t, u)])}")
    return "; ".join(bits)


_TERM_RE = re.compile(r"t\^(-?\d+)\*u\^(-?\d+):\s*(\[[-\d,]+\]|-?\d+)")


def ls2_from_text(text: str, desc: FieldDesc, t_prec=INF, u_prec=INF) -> LaurentSeries2:
    terms: Dict[Tuple[int, int], FieldElem] = {}
    text = text.strip()
    if text == "0":
        return LaurentSeries2(desc, {}, t_prec, u_prec)
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        m = _TERM_RE.fullmatch(part)
        if not m:
            raise ValueError(f"unparseable series term {part!r}")
        t, u = int(m.group(1)), int(m.group(2))
        raw = m.group(3)
        if raw.startswith("["):
            coeffs = [int(v) for v in raw[1:-1].split(",")]
            c = desc.from_coeffs(coeffs)
        else:
            c = desc.from_int(int(raw))
        terms[(t, u)] = c
    return LaurentSeries2(desc, terms, t_prec, u_prec)
