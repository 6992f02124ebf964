// Memoized mode-operator engine behind the compiled kernels.
//
// Monomials are sorted arrays of 64-bit variable codes (one entry per unit of
// exponent), interned to 32-bit ids so that memo tables and accumulators work
// on small integer keys.  Coefficients are 64-bit integers with checked
// arithmetic; any overflow throws std::overflow_error and the caller falls back
// to the pure-Python engine.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wf {

typedef long long i64;
typedef std::uint64_t u64;
typedef std::uint32_t u32;

static const int MAXDEG = 12;
static const i64 MODE_OFFSET = 1LL << 31;
static const i64 MODE_MASK = (1LL << 36) - 1;

struct Mono {
    int len;
    i64 v[MAXDEG];

    Mono() : len(0) {}

    bool operator==(const Mono& o) const {
        return len == o.len && std::memcmp(v, o.v, sizeof(i64) * len) == 0;
    }

    void insert(i64 code) {
        if (len >= MAXDEG) throw std::overflow_error("monomial degree limit exceeded");
        int k = len;
        while (k > 0 && v[k - 1] > code) {
            v[k] = v[k - 1];
            --k;
        }
        v[k] = code;
        ++len;
    }

    Mono without(int idx) const {
        Mono out;
        out.len = len - 1;
        std::memcpy(out.v, v, sizeof(i64) * idx);
        std::memcpy(out.v + idx, v + idx + 1, sizeof(i64) * (len - idx - 1));
        return out;
    }
};

inline u64 mix(u64 h, u64 x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

inline u64 mono_hash(const Mono& m) {
    u64 h = static_cast<u64>(m.len) * 0x9e3779b97f4a7c15ULL;
    for (int k = 0; k < m.len; ++k) h = mix(h, static_cast<u64>(m.v[k]));
    return h;
}

inline i64 cmul(i64 a, i64 b) {
    i64 r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("coefficient overflow");
    return r;
}

inline i64 cadd(i64 a, i64 b) {
    i64 r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("coefficient overflow");
    return r;
}

// Interning table: monomial <-> dense id.
class MonoTable {
  public:
    MonoTable() : table_(1 << 12), mask_((1 << 12) - 1) {}

    std::size_t size() const { return monos_.size(); }

    const Mono& get(u32 id) const { return monos_[id]; }

    u32 intern(const Mono& m) {
        u64 h = mono_hash(m);
        std::size_t pos = h & mask_;
        while (true) {
            const Slot& s = table_[pos];
            if (s.idx < 0) break;
            if (s.h == h && monos_[s.idx] == m) return static_cast<u32>(s.idx);
            pos = (pos + 1) & mask_;
        }
        if ((monos_.size() + 1) * 2 > table_.size()) {
            grow();
            return intern(m);
        }
        table_[pos] = Slot{h, static_cast<int>(monos_.size())};
        monos_.push_back(m);
        return static_cast<u32>(monos_.size() - 1);
    }

    void clear() {
        monos_.clear();
        table_.assign(1 << 12, Slot());
        mask_ = (1 << 12) - 1;
    }

  private:
    struct Slot {
        u64 h = 0;
        int idx = -1;
    };
    std::deque<Mono> monos_;
    std::vector<Slot> table_;
    std::size_t mask_;

    void grow() {
        std::vector<Slot> old;
        old.swap(table_);
        table_.assign(old.size() * 2, Slot());
        mask_ = table_.size() - 1;
        for (const Slot& s : old) {
            if (s.idx < 0) continue;
            std::size_t pos = s.h & mask_;
            while (table_[pos].idx >= 0) pos = (pos + 1) & mask_;
            table_[pos] = s;
        }
    }
};

struct Term {
    u32 id;
    i64 c;
};

typedef std::vector<Term> Terms;

inline u64 id_hash(u32 id) { return mix(0x12345678ULL, id); }

// Reusable accumulator keyed by monomial id.
class Acc {
  public:
    std::vector<Term> entries;

    Acc() : table_(64, -1), mask_(63) {}

    void clear() {
        for (int s : slots_) table_[s] = -1;
        slots_.clear();
        entries.clear();
    }

    void add(u32 id, i64 c) {
        std::size_t pos = id_hash(id) & mask_;
        while (true) {
            int idx = table_[pos];
            if (idx < 0) break;
            Term& e = entries[idx];
            if (e.id == id) {
                e.c = cadd(e.c, c);
                return;
            }
            pos = (pos + 1) & mask_;
        }
        if ((entries.size() + 1) * 2 > table_.size()) {
            grow();
            add(id, c);
            return;
        }
        table_[pos] = static_cast<int>(entries.size());
        slots_.push_back(static_cast<int>(pos));
        entries.push_back(Term{id, c});
    }

    bool zero() const {
        for (const Term& e : entries)
            if (e.c != 0) return false;
        return true;
    }

    void export_to(Terms& out) const {
        out.clear();
        for (const Term& e : entries)
            if (e.c != 0) out.push_back(e);
    }

  private:
    std::vector<int> table_;
    std::vector<int> slots_;
    std::size_t mask_;

    void grow() {
        std::size_t cap = table_.size() * 2;
        table_.assign(cap, -1);
        mask_ = cap - 1;
        slots_.clear();
        for (std::size_t k = 0; k < entries.size(); ++k) {
            std::size_t pos = id_hash(entries[k].id) & mask_;
            while (table_[pos] >= 0) pos = (pos + 1) & mask_;
            table_[pos] = static_cast<int>(k);
            slots_.push_back(static_cast<int>(pos));
        }
    }
};

// Memo table keyed by two 64-bit words, values in stable storage.
class Memo {
  public:
    Memo() : table_(1 << 12), mask_((1 << 12) - 1) {}

    std::size_t size() const { return store_.size(); }

    static u64 hash(u64 k1, u64 k2) { return mix(mix(0x51ed27ULL, k1), k2); }

    const Terms* find(u64 k1, u64 k2) const {
        std::size_t pos = hash(k1, k2) & mask_;
        while (true) {
            const Slot& s = table_[pos];
            if (!s.val) return nullptr;
            if (s.k1 == k1 && s.k2 == k2) return s.val;
            pos = (pos + 1) & mask_;
        }
    }

    Terms& insert(u64 k1, u64 k2) {
        if ((store_.size() + 1) * 2 > table_.size()) grow();
        std::size_t pos = hash(k1, k2) & mask_;
        while (table_[pos].val) pos = (pos + 1) & mask_;
        store_.emplace_back();
        table_[pos] = Slot{k1, k2, &store_.back()};
        return store_.back();
    }

    void clear() {
        store_.clear();
        table_.assign(1 << 12, Slot());
        mask_ = (1 << 12) - 1;
    }

  private:
    struct Slot {
        u64 k1 = 0, k2 = 0;
        Terms* val = nullptr;
    };
    std::deque<Terms> store_;
    std::vector<Slot> table_;
    std::size_t mask_;

    void grow() {
        std::vector<Slot> old;
        old.swap(table_);
        table_.assign(old.size() * 2, Slot());
        mask_ = table_.size() - 1;
        for (const Slot& s : old) {
            if (!s.val) continue;
            std::size_t pos = hash(s.k1, s.k2) & mask_;
            while (table_[pos].val) pos = (pos + 1) & mask_;
            table_[pos] = s;
        }
    }
};

struct DerEntry {
    i64 slot;
    int sign;
    i64 qmin, qmax;
    i64 c;
    bool use_q;
};

struct MulSpec {
    bool bounded;
    i64 bound;
    i64 base;
    int sign;
};

// One bit per slot (hashed; collisions only weaken the filter below).
inline u64 slot_bit(i64 slot) {
    return 1ULL << ((static_cast<u64>(slot) * 0x9e3779b97f4a7c15ULL) >> 58);
}

inline u64 slot_mask(const Mono& m) {
    u64 mask = 0;
    for (int k = 0; k < m.len; ++k) mask |= slot_bit(m.v[k] >> 36);
    return mask;
}

struct Combo {
    std::vector<std::vector<DerEntry>> ders;
    std::vector<MulSpec> muls;
    i64 cst;
    std::vector<u64> need;  // per derivation: slots it can act on; filled by add_plan
};

struct Word {
    i64 offset;
    bool neg_m;
    std::vector<Combo> combos;
};

// (plan, mode) packed into one word; modes are far below 2^40 in magnitude.
inline u64 label_key(int plan, i64 m) {
    return (static_cast<u64>(plan) << 48) ^ static_cast<u64>(m + (1LL << 40));
}

class Engine {
  public:
    std::vector<std::vector<Word>> plans;
    MonoTable monos;
    Memo cache;
    Memo comm;
    std::size_t cache_limit = 3000000;

    int add_plan(std::vector<Word> words) {
        for (Word& w : words) {
            for (Combo& cb : w.combos) {
                cb.need.clear();
                for (const auto& table : cb.ders) {
                    u64 bits = 0;
                    for (const DerEntry& e : table) bits |= slot_bit(e.slot);
                    cb.need.push_back(bits);
                }
            }
        }
        plans.push_back(std::move(words));
        return static_cast<int>(plans.size()) - 1;
    }

    u32 intern(const Mono& m) { return monos.intern(m); }

    const Mono& mono(u32 id) const { return monos.get(id); }

    const Terms& apply(int plan, i64 m, u32 id) {
        u64 lk = label_key(plan, m);
        const Terms* hit = cache.find(lk, id);
        if (hit) return *hit;
        Acc& out = scratch_apply_;
        out.clear();
        const Mono src = monos.get(id);
        const u64 mask = slot_mask(src);
        for (const Word& w : plans.at(plan)) {
            i64 k = w.neg_m ? -m : 1;
            if (k == 0) continue;
            i64 total = m + w.offset;
            for (const Combo& cb : w.combos) {
                bool possible = true;
                for (u64 bits : cb.need) possible = possible && (bits & mask);
                if (possible) der_step(cb, 0, total, src, cmul(k, cb.cst), out);
            }
        }
        Terms& terms = cache.insert(lk, id);
        out.export_to(terms);
        return terms;
    }

    // Tables only shrink here, between top-level evaluations, so references
    // and ids stay valid while a single evaluation runs.  Returns true when
    // everything was dropped (ids of the caller's monomials are then stale).
    bool trim() {
        if (cache.size() >= cache_limit || comm.size() >= cache_limit || monos.size() >= cache_limit) {
            clear();
            return true;
        }
        return false;
    }

    void apply_into(int plan, i64 m, u32 id, i64 scale, Acc& acc) {
        const Terms& part = apply(plan, m, id);
        for (const Term& t : part) acc.add(t.id, cmul(t.c, scale));
    }

    void commutator_into(int px, i64 mx, int py, i64 my, u32 id, i64 scale, Acc& acc) {
        const Terms& ty = apply(py, my, id);
        for (const Term& t : ty) apply_into(px, mx, t.id, cmul(t.c, scale), acc);
        const Terms& tx = apply(px, mx, id);
        for (const Term& t : tx) apply_into(py, my, t.id, cmul(-t.c, scale), acc);
    }

    const Terms& commutator_memo(int px, i64 mx, int py, i64 my, u32 id) {
        u64 k1 = label_key(px, mx) ^ (label_key(py, my) * 0x9e3779b97f4a7c15ULL);
        u64 k2 = (static_cast<u64>(py) << 56) ^ (static_cast<u64>(my + (1LL << 20)) << 32) ^ id;
        const Terms* hit = comm.find(k1, k2);
        if (hit) return *hit;
        Acc& acc = scratch_comm_;
        acc.clear();
        commutator_into(px, mx, py, my, id, 1, acc);
        Terms& terms = comm.insert(k1, k2);
        acc.export_to(terms);
        return terms;
    }

    // rhs: parallel arrays of (plan, mode, coefficient)
    long bracket_fails(int px, i64 mx, int py, i64 my, const std::vector<int>& rp,
                       const std::vector<i64>& rm, const std::vector<i64>& rc, i64 central,
                       const std::vector<Mono>& tests) {
        Acc& acc = scratch_top_;
        intern_tests(tests);
        for (std::size_t idx = 0; idx < tests.size(); ++idx) {
            if (trim()) intern_tests(tests);
            u32 id = test_ids_[idx];
            acc.clear();
            commutator_into(px, mx, py, my, id, 1, acc);
            for (std::size_t t = 0; t < rp.size(); ++t) apply_into(rp[t], rm[t], id, -rc[t], acc);
            if (central) acc.add(id, -central);
            if (!acc.zero()) return static_cast<long>(idx);
        }
        return -1;
    }

    // Many bracket checks at once, test monomial outermost: the images of one
    // monomial stay hot while every pending check runs on it.  rhs of check k
    // is rp/rm/rc[roff[k] .. roff[k+1]).  Returns the first failing test index
    // per check (-1 when all pass); the first-failure semantics match
    // bracket_fails.
    std::vector<long> bracket_table(const std::vector<int>& px, const std::vector<i64>& mx,
                                    const std::vector<int>& py, const std::vector<i64>& my,
                                    const std::vector<int>& roff, const std::vector<int>& rp,
                                    const std::vector<i64>& rm, const std::vector<i64>& rc,
                                    const std::vector<i64>& central, const std::vector<Mono>& tests,
                                    std::size_t local_limit) {
        const std::size_t K = px.size();
        std::vector<long> first(K, -1);
        std::vector<std::size_t> pending(K);
        for (std::size_t k = 0; k < K; ++k) pending[k] = k;
        Acc& acc = scratch_top_;
        for (std::size_t idx = 0; idx < tests.size() && !pending.empty(); ++idx) {
            if (cache.size() >= local_limit || comm.size() >= local_limit || monos.size() >= local_limit)
                clear();
            u32 id = intern(tests[idx]);
            std::size_t keep = 0;
            for (std::size_t t = 0; t < pending.size(); ++t) {
                const std::size_t k = pending[t];
                acc.clear();
                commutator_into(px[k], mx[k], py[k], my[k], id, 1, acc);
                for (int q = roff[k]; q < roff[k + 1]; ++q) apply_into(rp[q], rm[q], id, -rc[q], acc);
                if (central[k]) acc.add(id, -central[k]);
                if (acc.zero())
                    pending[keep++] = k;
                else
                    first[k] = static_cast<long>(idx);
            }
            pending.resize(keep);
        }
        return first;
    }

    long engel_fails(int p1, i64 m1, int p2, i64 m2, int py, i64 my, const std::vector<Mono>& tests) {
        Acc& acc = scratch_top_;
        intern_tests(tests);
        for (std::size_t idx = 0; idx < tests.size(); ++idx) {
            if (trim()) intern_tests(tests);
            u32 id = test_ids_[idx];
            acc.clear();
            const Terms& inner = commutator_memo(p2, m2, py, my, id);
            for (const Term& t : inner) apply_into(p1, m1, t.id, t.c, acc);
            const Terms& outer = apply(p1, m1, id);
            for (const Term& t : outer) {
                const Terms& c = commutator_memo(p2, m2, py, my, t.id);
                for (const Term& u : c) acc.add(u.id, cmul(-t.c, u.c));
            }
            if (!acc.zero()) return static_cast<long>(idx);
        }
        return -1;
    }

    void clear() {
        cache.clear();
        comm.clear();
        monos.clear();
    }

    void clear_comm() { comm.clear(); }

    std::size_t cache_size() const { return cache.size(); }
    std::size_t comm_size() const { return comm.size(); }

  private:
    std::vector<u32> test_ids_;

    void intern_tests(const std::vector<Mono>& tests) {
        test_ids_.clear();
        for (const Mono& m : tests) test_ids_.push_back(intern(m));
    }

    Acc scratch_apply_;
    Acc scratch_comm_;
    Acc scratch_top_;

    void der_step(const Combo& cb, std::size_t t, i64 rem, const Mono& mono, i64 coef, Acc& out) {
        if (t == cb.ders.size()) {
            emit(cb, rem, mono, coef, out);
            return;
        }
        // codes are sorted and a slot's variables are contiguous (ordered by
        // mode), so each entry only visits the variables it can act on
        for (const DerEntry& e : cb.ders[t]) {
            const i64 base = e.slot << 36;
            const i64 lo = base + std::max<i64>(e.qmin + MODE_OFFSET, 0);
            const i64 hi = base + std::min<i64>(e.qmax + MODE_OFFSET, MODE_MASK);
            int idx = 0;
            while (idx < mono.len && mono.v[idx] < lo) ++idx;
            while (idx < mono.len && mono.v[idx] <= hi) {
                const i64 v = mono.v[idx];
                int k = 1;
                while (idx + k < mono.len && mono.v[idx + k] == v) ++k;
                const i64 q = (v & MODE_MASK) - MODE_OFFSET;
                i64 f = cmul(k, e.c);
                if (e.use_q) f = cmul(f, q);
                der_step(cb, t + 1, rem - e.sign * q, mono.without(idx), cmul(coef, f), out);
                idx += k;
            }
        }
    }

    void emit(const Combo& cb, i64 rem, const Mono& mono, i64 coef, Acc& out) {
        const std::size_t u = cb.muls.size();
        if (u == 0) {
            if (rem == 0) out.add(intern(mono), coef);
        } else if (u == 1) {
            const MulSpec& a = cb.muls[0];
            if (!a.bounded || rem <= a.bound) {
                Mono w = mono;
                w.insert(a.base + a.sign * rem);
                out.add(intern(w), coef);
            }
        } else if (u == 2) {
            const MulSpec& a = cb.muls[0];
            const MulSpec& b = cb.muls[1];
            for (i64 p = rem - b.bound; p <= a.bound; ++p) {
                Mono w = mono;
                w.insert(a.base + a.sign * p);
                w.insert(b.base + b.sign * (rem - p));
                out.add(intern(w), coef);
            }
        } else {
            const MulSpec& a = cb.muls[0];
            const MulSpec& b = cb.muls[1];
            const MulSpec& c = cb.muls[2];
            for (i64 p = rem - b.bound - c.bound; p <= a.bound; ++p) {
                i64 r2 = rem - p;
                for (i64 q = r2 - c.bound; q <= b.bound; ++q) {
                    Mono w = mono;
                    w.insert(a.base + a.sign * p);
                    w.insert(b.base + b.sign * q);
                    w.insert(c.base + c.sign * (r2 - q));
                    out.add(intern(w), coef);
                }
            }
        }
    }
};

}  // namespace wf
