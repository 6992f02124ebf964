"""Pure-Python monomial and polynomial kernels.

Monomials are sorted tuples of integer variable codes, one entry per unit of
exponent, so ``x^2 y`` is ``(cx, cx, cy)``.  Polynomials are plain dicts
mapping monomials to nonzero rational coefficients.  The compiled module
``_ckernels`` provides a drop-in :class:`CurrentEngine` with the same API.
"""

from bisect import insort

IMPLEMENTATION = "python"


def mono_times_var(mono, var):
    out = list(mono)
    insort(out, var)
    return tuple(out)


def mono_times_vars(mono, vars_):
    if not vars_:
        return mono
    out = list(mono)
    out.extend(vars_)
    out.sort()
    return tuple(out)


def mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    out = list(a)
    out.extend(b)
    out.sort()
    return tuple(out)


def mono_diff(mono, var):
    """Return ``(exponent, mono / var)``, or ``(0, None)`` if ``var`` is absent."""
    k = mono.count(var)
    if not k:
        return 0, None
    i = mono.index(var)
    return k, mono[:i] + mono[i + 1:]


def add_term(acc, mono, coef):
    c = acc.get(mono)
    if c is None:
        if coef:
            acc[mono] = coef
    else:
        c += coef
        if c:
            acc[mono] = c
        else:
            del acc[mono]


def add_scaled(acc, poly, scale):
    """``acc += scale * poly`` in place."""
    if not scale:
        return
    get = acc.get
    for mono, coef in poly.items():
        c = get(mono)
        if c is None:
            acc[mono] = coef * scale
        else:
            c += coef * scale
            if c:
                acc[mono] = c
            else:
                del acc[mono]


def poly_mul(p, q):
    acc = {}
    for ma, ca in p.items():
        for mb, cb in q.items():
            add_term(acc, mono_mul(ma, mb), ca * cb)
    return acc


def poly_times_var(p, var):
    return {mono_times_var(m, var): c for m, c in p.items()}


def poly_diff(p, var, scale=1):
    acc = {}
    for mono, coef in p.items():
        k, rest = mono_diff(mono, var)
        if k:
            add_term(acc, rest, coef * k * scale)
    return acc


def poly_sub(p, q):
    acc = dict(p)
    add_scaled(acc, q, -1)
    return acc


# --------------------------------------------------------------------------
# Normal-ordered word evaluation
#
# A compiled word "combo" fixes the role of every factor.  ``ders`` is a tuple
# of tables ``{code >> 36: (sign, qmin, qmax, c, use_q)}``, one per derivation
# factor: a variable of that slot with mode ``q`` in ``[qmin, qmax]`` is
# differentiated at factor mode ``sign * q`` with weight ``c`` (times ``q`` if
# ``use_q``).  ``muls`` is a tuple of ``(bound, base, sign)``; the factor at
# mode ``p`` multiplies by code ``base + sign * p`` and exists only for
# ``p <= bound`` (``bound`` None: every mode).

MODE_OFFSET = 1 << 31
MODE_MASK = (1 << 36) - 1


def eval_combo(ders, muls, total, mono, coef, out):
    """Add the combo's contribution at mode sum ``total`` on ``coef * mono`` to ``out``."""
    if ders:
        _der_step(ders, 0, muls, total, mono, coef, out)
    else:
        _emit(muls, total, mono, coef, out)


def _der_step(ders, t, muls, rem, mono, coef, out):
    table = ders[t]
    last = None
    nxt = t + 1
    final = nxt == len(ders)
    for idx, v in enumerate(mono):
        if v == last:
            continue
        last = v
        hit = table.get(v >> 36)
        if hit is None:
            continue
        sign, qmin, qmax, c, use_q = hit
        q = (v & MODE_MASK) - MODE_OFFSET
        if q < qmin or q > qmax:
            continue
        k = mono.count(v) * c
        if use_q:
            k *= q
        rest = mono[:idx] + mono[idx + 1:]
        if final:
            _emit(muls, rem - sign * q, rest, coef * k, out)
        else:
            _der_step(ders, nxt, muls, rem - sign * q, rest, coef * k, out)


def _emit(muls, rem, mono, coef, out):
    u = len(muls)
    if u == 0:
        if rem == 0:
            add_term(out, mono, coef)
    elif u == 1:
        bound, base, sign = muls[0]
        if bound is None or rem <= bound:
            add_term(out, mono_times_var(mono, base + sign * rem), coef)
    elif u == 2:
        (b1, base1, s1), (b2, base2, s2) = muls
        for p in range(rem - b2, b1 + 1):
            add_term(out, mono_times_vars(mono, (base1 + s1 * p, base2 + s2 * (rem - p))), coef)
    else:
        (b1, base1, s1), (b2, base2, s2), (b3, base3, s3) = muls
        for p in range(rem - b2 - b3, b1 + 1):
            r2 = rem - p
            for q in range(r2 - b3, b2 + 1):
                add_term(
                    out,
                    mono_times_vars(mono, (base1 + s1 * p, base2 + s2 * q, base3 + s3 * (r2 - q))),
                    coef,
                )


class CurrentEngine:
    """Memoized action of registered mode-operator plans on monomials.

    A plan is a list of ``(offset, neg_m, combos)`` words: at mode ``m`` the
    word's factor modes add up to ``m + offset`` and the word carries the
    factor ``-m`` when ``neg_m`` is set.  Labels are ``(plan_key, m)``.
    Coefficients must be exact numbers; the compiled engine additionally
    requires them to be integers.
    """

    def __init__(self):
        self.plans = []
        self._cache = {}
        self._comm = {}

    def add_plan(self, words):
        self.plans.append(tuple(words))
        return len(self.plans) - 1

    def apply(self, key, m, mono):
        ck = (key, m, mono)
        hit = self._cache.get(ck)
        if hit is not None:
            return hit
        out = {}
        for offset, neg_m, combos in self.plans[key]:
            k = -m if neg_m else 1
            if not k:
                continue
            total = m + offset
            for ders, muls, const in combos:
                eval_combo(ders, muls, total, mono, k * const, out)
        self._cache[ck] = out
        return out

    def _apply_poly(self, label, poly, scale, acc):
        key, m = label
        for w, c in poly.items():
            part = self.apply(key, m, w)
            if part:
                add_scaled(acc, part, c * scale)

    def commutator(self, x, y, mono, memo=False):
        if memo:
            ck = (x, y, mono)
            hit = self._comm.get(ck)
            if hit is not None:
                return hit
        acc = {}
        self._apply_poly(x, self.apply(y[0], y[1], mono), 1, acc)
        self._apply_poly(y, self.apply(x[0], x[1], mono), -1, acc)
        if memo:
            self._comm[ck] = acc
        return acc

    def bracket_residual(self, x, y, rhs, central, mono):
        """``[x, y] mono - sum(coef * label mono) - central * mono``."""
        acc = self.commutator(x, y, mono)
        for (key, m), coef in rhs:
            part = self.apply(key, m, mono)
            if part:
                add_scaled(acc, part, -coef)
        if central:
            add_term(acc, mono, -central)
        return acc

    def bracket_fails(self, x, y, rhs, central, monos):
        """Index of the first monomial violating the bracket identity, or -1."""
        for idx, mono in enumerate(monos):
            if self.bracket_residual(x, y, rhs, central, mono):
                return idx
        return -1

    def bracket_table(self, checks, monos, local_limit=None):
        """First failing index per ``(x, y, rhs, central)`` check."""
        return [self.bracket_fails(x, y, rhs, central, monos) for x, y, rhs, central in checks]

    def engel(self, x1, x2, y, mono):
        acc = {}
        for w, c in self.commutator(x2, y, mono, True).items():
            part = self.apply(x1[0], x1[1], w)
            if part:
                add_scaled(acc, part, c)
        for w, c in self.apply(x1[0], x1[1], mono).items():
            part = self.commutator(x2, y, w, True)
            if part:
                add_scaled(acc, part, -c)
        return acc

    def engel_fails(self, x1, x2, y, monos):
        """Index of the first monomial where ``[x1, [x2, y]]`` is nonzero, or -1."""
        for idx, mono in enumerate(monos):
            if self.engel(x1, x2, y, mono):
                return idx
        return -1

    def cache_size(self):
        return len(self._cache) + len(self._comm)

    def clear(self):
        self._cache.clear()
        self._comm.clear()

    def clear_commutators(self):
        self._comm.clear()
