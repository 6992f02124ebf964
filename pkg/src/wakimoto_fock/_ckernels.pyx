# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled mode-operator engine; same API as ``_pykernels.CurrentEngine``."""

from libcpp cimport bool as cbool
from libcpp.vector cimport vector
from libc.string cimport memcpy

IMPLEMENTATION = "compiled"

ctypedef long long i64

cdef extern from "_engine.hpp" namespace "wf":
    int MAXDEG

    cdef cppclass Mono:
        int len
        i64 v[12]

    cdef cppclass DerEntry:
        i64 slot
        int sign
        i64 qmin, qmax
        i64 c
        cbool use_q

    cdef cppclass MulSpec:
        cbool bounded
        i64 bound
        i64 base
        int sign

    cdef cppclass Combo:
        vector[vector[DerEntry]] ders
        vector[MulSpec] muls
        i64 cst

    cdef cppclass Word:
        i64 offset
        cbool neg_m
        vector[Combo] combos

    cdef cppclass Term:
        unsigned int id
        i64 c

    cdef cppclass Engine:
        size_t cache_limit
        int add_plan(const vector[Word]&) except +
        const vector[Term]& apply(int, i64, unsigned int) except +
        unsigned int intern(const Mono&) except +
        const Mono& mono(unsigned int)
        cbool trim()
        long bracket_fails(int, i64, int, i64, const vector[int]&, const vector[i64]&,
                           const vector[i64]&, i64, const vector[Mono]&) except +
        long engel_fails(int, i64, int, i64, int, i64, const vector[Mono]&) except +
        vector[long] bracket_table(const vector[int]&, const vector[i64]&, const vector[int]&,
                                   const vector[i64]&, const vector[int]&, const vector[int]&,
                                   const vector[i64]&, const vector[i64]&, const vector[i64]&,
                                   const vector[Mono]&, size_t) except +
        void clear()
        size_t cache_size()
        size_t comm_size()
        void clear_comm()


cdef i64 _as_int(object q) except? -1:
    if isinstance(q, int) and not isinstance(q, bool):
        return q
    if getattr(q, "denominator", None) == 1:
        return q.numerator
    raise TypeError(f"compiled engine needs integer coefficients, got {q!r}")


cdef Mono _mono(tuple t) except *:
    cdef Mono out
    cdef Py_ssize_t k, n = len(t)
    if n > 12:
        raise OverflowError("monomial degree limit exceeded")
    out.len = <int>n
    for k in range(n):
        out.v[k] = t[k]
    return out


cdef tuple _tuple(const Mono& m):
    return tuple([m.v[k] for k in range(m.len)])


cdef Combo _combo(object ders, object muls, object const) except *:
    cdef Combo cb
    cdef DerEntry e
    cdef MulSpec ms
    cdef vector[DerEntry] table
    for d in ders:
        table.clear()
        for slot, (sign, qmin, qmax, c, use_q) in d.items():
            e.slot = slot
            e.sign = sign
            e.qmin = qmin
            e.qmax = qmax
            e.c = _as_int(c)
            e.use_q = use_q
            table.push_back(e)
        cb.ders.push_back(table)
    for bound, base, sign in muls:
        ms.bounded = bound is not None
        ms.bound = bound if bound is not None else 0
        ms.base = base
        ms.sign = sign
        cb.muls.push_back(ms)
    cb.cst = _as_int(const)
    return cb


cdef class CurrentEngine:
    """Memoized plan action in C++ with checked 64-bit integer coefficients."""

    cdef Engine eng
    cdef vector[Mono] _tests
    cdef object _tests_src

    cdef const vector[Mono]* _test_vector(self, monos) except NULL:
        # the same list object is usually passed for many checks in a row
        if monos is not self._tests_src:
            self._tests.clear()
            for mono in monos:
                self._tests.push_back(_mono(mono))
            self._tests_src = monos
        return &self._tests

    def add_plan(self, words):
        cdef vector[Word] ws
        cdef Word w
        for offset, neg_m, combos in words:
            w.offset = offset
            w.neg_m = neg_m
            w.combos.clear()
            for ders, muls, const in combos:
                w.combos.push_back(_combo(ders, muls, const))
            ws.push_back(w)
        return self.eng.add_plan(ws)

    def apply(self, int key, i64 m, tuple mono):
        self.eng.trim()
        cdef unsigned int mid = self.eng.intern(_mono(mono))
        cdef const vector[Term]* terms = &self.eng.apply(key, m, mid)
        cdef size_t k
        out = {}
        for k in range(terms.size()):
            out[_tuple(self.eng.mono(terms.at(k).id))] = terms.at(k).c
        return out

    def bracket_fails(self, x, y, rhs, central, monos):
        cdef vector[int] rp
        cdef vector[i64] rm, rc
        for (key, m), coef in rhs:
            rp.push_back(key)
            rm.push_back(m)
            rc.push_back(_as_int(coef))
        cdef const vector[Mono]* ms = self._test_vector(monos)
        return self.eng.bracket_fails(x[0], x[1], y[0], y[1], rp, rm, rc, _as_int(central), ms[0])

    def bracket_table(self, checks, monos, size_t local_limit=5000):
        """First failing index per ``(x, y, rhs, central)`` check, test monomial outermost."""
        cdef vector[int] px, py, roff, rp
        cdef vector[i64] mx, my, rm, rc, cen
        roff.push_back(0)
        for x, y, rhs, central in checks:
            px.push_back(x[0])
            mx.push_back(x[1])
            py.push_back(y[0])
            my.push_back(y[1])
            for (key, m), coef in rhs:
                rp.push_back(key)
                rm.push_back(m)
                rc.push_back(_as_int(coef))
            roff.push_back(<int>rp.size())
            cen.push_back(_as_int(central))
        cdef vector[Mono] ms
        for mono in monos:
            ms.push_back(_mono(mono))
        return list(self.eng.bracket_table(px, mx, py, my, roff, rp, rm, rc, cen, ms, local_limit))

    def engel_fails(self, x1, x2, y, monos):
        cdef const vector[Mono]* ms = self._test_vector(monos)
        return self.eng.engel_fails(x1[0], x1[1], x2[0], x2[1], y[0], y[1], ms[0])

    def cache_size(self):
        return self.eng.cache_size() + self.eng.comm_size()

    property cache_limit:
        def __get__(self):
            return self.eng.cache_limit

        def __set__(self, value):
            self.eng.cache_limit = value

    def clear(self):
        self.eng.clear()

    def clear_commutators(self):
        self.eng.clear_comm()
