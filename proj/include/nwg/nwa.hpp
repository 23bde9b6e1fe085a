// nwa.hpp -- nested word acceptors: eps-NWA, NWA, DNWA, runs, determinization,
// boolean operations and decision procedures
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nwg/detail/relation.hpp"
#include "nwg/error.hpp"
#include "nwg/nested_word.hpp"

namespace nwg {

using State = std::uint32_t;
using Hier = std::uint32_t;

struct OpenRule {
    State from{};
    Symbol sym{};
    State to{};
    Hier push{};

    friend auto operator<=>(const OpenRule&, const OpenRule&) = default;
};

struct CloseRule {
    State from{};
    Hier pop{};
    Symbol sym{};
    State to{};

    friend auto operator<=>(const CloseRule&, const CloseRule&) = default;
};

struct EpsRule {
    State from{};
    State to{};

    friend auto operator<=>(const EpsRule&, const EpsRule&) = default;
};

/// Nested word automaton with optional internal eps-transitions. With an
/// empty eps rule set this is a plain NWA. Linear states drive the run,
/// hierarchical states are pushed on opening and popped on closing tags.
/// Immutable by convention once built; all decision procedures below are
/// pure functions.
struct EpsNwa {
    Alphabet alphabet;
    std::vector<std::string> linear_names;
    std::vector<std::string> hier_names;
    State initial{};
    std::vector<bool> accepting;  // indexed by linear state
    std::vector<OpenRule> opens;
    std::vector<CloseRule> closes;
    std::vector<EpsRule> eps;

    std::size_t num_linear() const { return linear_names.size(); }
    std::size_t num_hier() const { return hier_names.size(); }

    State add_linear(std::string name = "") {
        State q = static_cast<State>(linear_names.size());
        linear_names.push_back(name.empty() ? "q" + std::to_string(q) : std::move(name));
        accepting.push_back(false);
        return q;
    }

    Hier add_hier(std::string name = "") {
        Hier p = static_cast<Hier>(hier_names.size());
        hier_names.push_back(name.empty() ? "p" + std::to_string(p) : std::move(name));
        return p;
    }

    void add_open(State q, Symbol a, State q2, Hier p) { opens.push_back({q, a, q2, p}); }
    void add_close(State q, Hier p, Symbol a, State q2) { closes.push_back({q, p, a, q2}); }
    void add_eps(State q, State q2) { eps.push_back({q, q2}); }

    void sort_rules() {
        std::sort(opens.begin(), opens.end());
        std::sort(closes.begin(), closes.end());
        std::sort(eps.begin(), eps.end());
    }

    friend bool operator==(const EpsNwa& a, const EpsNwa& b) {
        auto key = [](const EpsNwa& x) {
            auto o = x.opens, c = x.closes;
            auto e = x.eps;
            std::sort(o.begin(), o.end());
            std::sort(c.begin(), c.end());
            std::sort(e.begin(), e.end());
            return std::tuple(x.alphabet.labels(), x.linear_names, x.hier_names, x.initial,
                              x.accepting, o, c, e);
        };
        return key(a) == key(b);
    }
};

/// Deterministic NWA: same shape as EpsNwa minus eps rules. The invariant is
/// exactly one opening rule per (q, a) and one closing rule per (q, p, a);
/// a partial DNWA is diagnosed by validate and can be made total with
/// complete().
struct Dnwa {
    Alphabet alphabet;
    std::vector<std::string> linear_names;
    std::vector<std::string> hier_names;
    State initial{};
    std::vector<bool> accepting;
    std::vector<OpenRule> opens;
    std::vector<CloseRule> closes;

    std::size_t num_linear() const { return linear_names.size(); }
    std::size_t num_hier() const { return hier_names.size(); }

    State add_linear(std::string name = "") {
        State q = static_cast<State>(linear_names.size());
        linear_names.push_back(name.empty() ? "q" + std::to_string(q) : std::move(name));
        accepting.push_back(false);
        return q;
    }

    Hier add_hier(std::string name = "") {
        Hier p = static_cast<Hier>(hier_names.size());
        hier_names.push_back(name.empty() ? "p" + std::to_string(p) : std::move(name));
        return p;
    }

    void add_open(State q, Symbol a, State q2, Hier p) { opens.push_back({q, a, q2, p}); }
    void add_close(State q, Hier p, Symbol a, State q2) { closes.push_back({q, p, a, q2}); }

    EpsNwa to_eps_nwa() const {
        EpsNwa a;
        a.alphabet = alphabet;
        a.linear_names = linear_names;
        a.hier_names = hier_names;
        a.initial = initial;
        a.accepting = accepting;
        a.opens = opens;
        a.closes = closes;
        return a;
    }

    friend bool operator==(const Dnwa& a, const Dnwa& b) {
        return a.to_eps_nwa() == b.to_eps_nwa();
    }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline std::vector<std::string> validate(const EpsNwa& a) {
    std::vector<std::string> defects;
    auto lin_ok = [&](State q) { return q < a.num_linear(); };
    auto hier_ok = [&](Hier p) { return p < a.num_hier(); };
    auto sym_ok = [&](Symbol s) { return a.alphabet.contains(s); };
    if (!lin_ok(a.initial)) defects.push_back("initial state undeclared");
    if (a.accepting.size() != a.num_linear()) defects.push_back("accepting flags size mismatch");
    for (const auto& r : a.opens) {
        if (!lin_ok(r.from) || !lin_ok(r.to)) defects.push_back("opening rule cites undeclared linear state");
        if (!hier_ok(r.push)) defects.push_back("opening rule cites undeclared hierarchical state");
        if (!sym_ok(r.sym)) defects.push_back("opening rule cites undeclared symbol");
    }
    for (const auto& r : a.closes) {
        if (!lin_ok(r.from) || !lin_ok(r.to)) defects.push_back("closing rule cites undeclared linear state");
        if (!hier_ok(r.pop)) defects.push_back("closing rule cites undeclared hierarchical state");
        if (!sym_ok(r.sym)) defects.push_back("closing rule cites undeclared symbol");
    }
    for (const auto& r : a.eps)
        if (!lin_ok(r.from) || !lin_ok(r.to)) defects.push_back("eps rule cites undeclared linear state");
    return defects;
}

/// Checks hygiene plus the determinism claim: exactly one opening rule per
/// (q, a) and one closing rule per (q, p, a).
inline std::vector<std::string> validate(const Dnwa& d) {
    std::vector<std::string> defects = validate(d.to_eps_nwa());
    std::map<std::pair<State, Symbol>, int> open_count;
    std::map<std::tuple<State, Hier, Symbol>, int> close_count;
    for (const auto& r : d.opens) open_count[{r.from, r.sym}]++;
    for (const auto& r : d.closes) close_count[{r.from, r.pop, r.sym}]++;
    for (State q = 0; q < d.num_linear(); ++q) {
        for (Symbol s = 0; s < d.alphabet.size(); ++s) {
            int c = open_count.count({q, s}) ? open_count[{q, s}] : 0;
            if (c == 0)
                defects.push_back("not total: no opening rule for (" + d.linear_names[q] + ", <" +
                                  d.alphabet.name(s) + ">)");
            if (c > 1)
                defects.push_back("determinism defect: " + std::to_string(c) + " opening rules for (" +
                                  d.linear_names[q] + ", <" + d.alphabet.name(s) + ">)");
        }
        for (Hier p = 0; p < d.num_hier(); ++p) {
            for (Symbol s = 0; s < d.alphabet.size(); ++s) {
                int c = close_count.count({q, p, s}) ? close_count[{q, p, s}] : 0;
                if (c == 0)
                    defects.push_back("not total: no closing rule for (" + d.linear_names[q] + ", " +
                                      d.hier_names[p] + ", </" + d.alphabet.name(s) + ">)");
                if (c > 1)
                    defects.push_back("determinism defect: " + std::to_string(c) + " closing rules for (" +
                                      d.linear_names[q] + ", " + d.hier_names[p] + ", </" +
                                      d.alphabet.name(s) + ">)");
            }
        }
    }
    return defects;
}

namespace detail {

/// Duplicate rules are harmless semantically; determinism validation rejects
/// them, so constructions deduplicate before handing out a Dnwa.
inline void dedupe_rules(std::vector<OpenRule>& o, std::vector<CloseRule>& c) {
    std::sort(o.begin(), o.end());
    o.erase(std::unique(o.begin(), o.end()), o.end());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Summary saturation: the workhorse behind membership, emptiness, inclusion
// and trimming. W relates q to q' iff some well-nested word (with arbitrary
// interleaved eps-moves) drives the automaton from q to q'.
// ---------------------------------------------------------------------------

namespace detail {

struct NwaIndexes {
    std::vector<std::vector<std::size_t>> opens_into;   // by target linear state
    std::vector<std::vector<std::size_t>> closes_from;  // by source linear state

    explicit NwaIndexes(const EpsNwa& a)
        : opens_into(a.num_linear()), closes_from(a.num_linear()) {
        for (std::size_t i = 0; i < a.opens.size(); ++i) opens_into[a.opens[i].to].push_back(i);
        for (std::size_t i = 0; i < a.closes.size(); ++i) closes_from[a.closes[i].from].push_back(i);
    }
};

/// Least relation containing the identity and all eps edges, closed under
/// composition and under wrapping a summary with a matching open/close rule
/// pair (same hierarchical state and same label).
inline Relation balanced_reach(const EpsNwa& a) {
    const std::size_t n = a.num_linear();
    Relation w(n), wt(n);
    NwaIndexes idx(a);
    std::deque<std::pair<State, State>> work;
    auto add = [&](State x, State y) {
        if (w.set(x, y)) {
            wt.set(y, x);
            work.emplace_back(x, y);
        }
    };
    for (State q = 0; q < n; ++q) add(q, q);
    for (const auto& e : a.eps) add(e.from, e.to);
    while (!work.empty()) {
        auto [q1, q2] = work.front();
        work.pop_front();
        wt.for_each_in_row(q1, [&](std::size_t q0) { add(static_cast<State>(q0), q2); });
        w.for_each_in_row(q2, [&](std::size_t q3) { add(q1, static_cast<State>(q3)); });
        for (std::size_t oi : idx.opens_into[q1]) {
            const OpenRule& o = a.opens[oi];
            for (std::size_t ci : idx.closes_from[q2]) {
                const CloseRule& c = a.closes[ci];
                if (c.pop == o.push && c.sym == o.sym) add(o.from, c.to);
            }
        }
    }
    return w;
}

/// Reflexive-transitive closure of the eps edges only.
inline Relation eps_closure(const EpsNwa& a) {
    Relation e(a.num_linear());
    for (const auto& r : a.eps) e.set(r.from, r.to);
    e.close_transitive();
    return e;
}

} // namespace detail

/// True iff L(A) contains no well-nested word.
inline bool is_empty(const EpsNwa& a) {
    detail::Relation w = detail::balanced_reach(a);
    for (State q = 0; q < a.num_linear(); ++q)
        if (a.accepting[q] && w.get(a.initial, q)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

namespace detail {

/// Relation of a well-nested span of `tags`, with eps-closure padding at both
/// ends; recursion follows the nesting structure, so each subspan is
/// processed exactly once.
inline Relation span_relation(const EpsNwa& a, std::span<const Tag> tags, const Relation& e,
                              const std::vector<std::size_t>& match) {
    const std::size_t n = a.num_linear();
    Relation rel = e;  // empty span: eps closure
    std::size_t i = 0;
    while (i < tags.size()) {
        std::size_t j = match[i];  // matching close of the open at i
        Relation inner = span_relation(a, tags.subspan(i + 1, j - i - 1), e,
                                       {match.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                        match.begin() + static_cast<std::ptrdiff_t>(j)});
        Relation block(n);
        Symbol sym = tags[i].sym;
        for (const auto& o : a.opens) {
            if (o.sym != sym) continue;
            for (const auto& c : a.closes) {
                if (c.sym != sym || c.pop != o.push) continue;
                if (inner.get(o.to, c.from)) block.set(o.from, c.to);
            }
        }
        rel = rel.composed(block).composed(e);
        i = j + 1;
    }
    return rel;
}

/// match[i] = index of the closing tag associated with the opening tag at i
/// (meaningful only at opening positions). Input must be well-nested.
inline std::vector<std::size_t> matching_positions(std::span<const Tag> tags) {
    std::vector<std::size_t> match(tags.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i].pol == Pol::Opening) {
            stack.push_back(i);
        } else {
            match[stack.back()] = i;
            stack.pop_back();
        }
    }
    return match;
}

// Offsets within matching_positions slices stay valid because the recursion
// rebases both tags and match together.
inline std::vector<std::size_t> rebased_matching(std::span<const Tag> tags) {
    auto m = matching_positions(tags);
    return m;
}

} // namespace detail

/// True iff some run of A on w ends in an accepting linear state with an
/// empty stack; eps-rules may be interleaved anywhere.
inline bool accepts(const EpsNwa& a, const NestedWord& w) {
    for (const Tag& t : w.tags())
        if (!a.alphabet.contains(t.sym))
            throw PreconditionError("accepts: word uses a symbol outside the automaton's alphabet");
    detail::Relation e = detail::eps_closure(a);
    // Rebase match indexes to the local span before recursing.
    std::span<const Tag> tags(w.tags());
    auto match = detail::matching_positions(tags);
    detail::Relation rel = detail::span_relation(a, tags, e, match);
    for (State q = 0; q < a.num_linear(); ++q)
        if (a.accepting[q] && rel.get(a.initial, q)) return true;
    return false;
}

/// Deterministic run; missing transitions reject (a partial DNWA simply has
/// no run).
inline bool accepts(const Dnwa& d, const NestedWord& w) {
    std::unordered_map<std::uint64_t, State> open_idx, close_idx;
    auto okey = [](State q, Symbol s) { return (std::uint64_t(q) << 32) | s; };
    std::unordered_map<std::uint64_t, Hier> open_push;
    for (const auto& r : d.opens) {
        open_idx[okey(r.from, r.sym)] = r.to;
        open_push[okey(r.from, r.sym)] = r.push;
    }
    auto ckey = [&](State q, Hier p, Symbol s) {
        return detail::fnv1a_value(std::tuple(q, p, s));
    };
    std::map<std::tuple<State, Hier, Symbol>, State> cmap;
    (void)close_idx;
    (void)ckey;
    for (const auto& r : d.closes) cmap[{r.from, r.pop, r.sym}] = r.to;
    State q = d.initial;
    std::vector<Hier> stack;
    for (const Tag& t : w.tags()) {
        if (!d.alphabet.contains(t.sym)) return false;
        if (t.pol == Pol::Opening) {
            auto it = open_idx.find(okey(q, t.sym));
            if (it == open_idx.end()) return false;
            stack.push_back(open_push[okey(q, t.sym)]);
            q = it->second;
        } else {
            auto it = cmap.find({q, stack.back(), t.sym});
            if (it == cmap.end()) return false;
            stack.pop_back();
            q = it->second;
        }
    }
    return stack.empty() && d.accepting[q];
}

// ---------------------------------------------------------------------------
// Trimming: drop states that cannot appear on any accepting run. Sound
// overapproximation of usefulness; language is preserved exactly.
// ---------------------------------------------------------------------------

inline EpsNwa trim(const EpsNwa& a) {
    const std::size_t n = a.num_linear();
    detail::Relation w = detail::balanced_reach(a);
    std::vector<bool> fwd(n, false), bwd(n, false);
    // forward: reachable at any nesting depth
    std::deque<State> work;
    auto fpush = [&](State q) {
        if (!fwd[q]) {
            fwd[q] = true;
            work.push_back(q);
        }
    };
    fpush(a.initial);
    while (!work.empty()) {
        State q = work.front();
        work.pop_front();
        w.for_each_in_row(q, [&](std::size_t q2) { fpush(static_cast<State>(q2)); });
        for (const auto& o : a.opens)
            if (o.from == q) fpush(o.to);
    }
    // backward: can still participate in finishing an accepting run
    for (State q = 0; q < n; ++q)
        if (a.accepting[q]) {
            bwd[q] = true;
            work.push_back(q);
        }
    while (!work.empty()) {
        State q = work.front();
        work.pop_front();
        for (State q0 = 0; q0 < n; ++q0)
            if (!bwd[q0] && w.get(q0, q)) {
                bwd[q0] = true;
                work.push_back(q0);
            }
        for (const auto& c : a.closes)
            if (c.to == q && !bwd[c.from]) {
                bwd[c.from] = true;
                work.push_back(c.from);
            }
        for (const auto& o : a.opens)
            if (o.to == q && !bwd[o.from]) {
                bwd[o.from] = true;
                work.push_back(o.from);
            }
    }
    std::vector<bool> keep(n);
    for (State q = 0; q < n; ++q) keep[q] = fwd[q] && bwd[q];
    if (!keep[a.initial]) {
        // empty language: canonical empty automaton over the same alphabet
        EpsNwa out;
        out.alphabet = a.alphabet;
        out.initial = out.add_linear(a.linear_names[a.initial]);
        return out;
    }
    EpsNwa out;
    out.alphabet = a.alphabet;
    std::vector<State> lmap(n, 0);
    for (State q = 0; q < n; ++q)
        if (keep[q]) {
            lmap[q] = out.add_linear(a.linear_names[q]);
            out.accepting[lmap[q]] = a.accepting[q];
        }
    out.initial = lmap[a.initial];
    std::vector<bool> hier_used(a.num_hier(), false);
    for (const auto& o : a.opens)
        if (keep[o.from] && keep[o.to]) hier_used[o.push] = true;
    std::vector<Hier> hmap(a.num_hier(), 0);
    for (Hier p = 0; p < a.num_hier(); ++p)
        if (hier_used[p]) hmap[p] = out.add_hier(a.hier_names[p]);
    for (const auto& o : a.opens)
        if (keep[o.from] && keep[o.to]) out.add_open(lmap[o.from], o.sym, lmap[o.to], hmap[o.push]);
    for (const auto& c : a.closes)
        if (keep[c.from] && keep[c.to] && hier_used[c.pop])
            out.add_close(lmap[c.from], hmap[c.pop], c.sym, lmap[c.to]);
    for (const auto& e : a.eps)
        if (keep[e.from] && keep[e.to]) out.add_eps(lmap[e.from], lmap[e.to]);
    return out;
}

// ---------------------------------------------------------------------------
// Boolean operations
// ---------------------------------------------------------------------------

namespace detail {

/// Common alphabet plus remapped copies of both automata.
inline std::pair<EpsNwa, EpsNwa> on_common_alphabet(const EpsNwa& a, const EpsNwa& b) {
    if (a.alphabet == b.alphabet) return {a, b};
    AlphabetMerge m = merge_alphabets(a.alphabet, b.alphabet);
    auto remap = [](EpsNwa x, const Alphabet& al, const std::vector<Symbol>& rm) {
        x.alphabet = al;
        for (auto& r : x.opens) r.sym = rm[r.sym];
        for (auto& r : x.closes) r.sym = rm[r.sym];
        return x;
    };
    return {remap(a, m.merged, m.remap_a), remap(b, m.merged, m.remap_b)};
}

/// Ensures every (q, a) has at least one opening rule and every (q, p, a) at
/// least one closing rule, by adding a non-accepting sink. Language unchanged.
inline EpsNwa completed(EpsNwa a) {
    State sink = a.add_linear("sink");
    Hier sinkh = a.add_hier("sinkp");
    std::set<std::pair<State, Symbol>> have_open;
    std::set<std::tuple<State, Hier, Symbol>> have_close;
    for (const auto& r : a.opens) have_open.insert({r.from, r.sym});
    for (const auto& r : a.closes) have_close.insert({r.from, r.pop, r.sym});
    for (State q = 0; q < a.num_linear(); ++q)
        for (Symbol s = 0; s < a.alphabet.size(); ++s) {
            if (!have_open.count({q, s})) a.add_open(q, s, sink, sinkh);
            for (Hier p = 0; p < a.num_hier(); ++p)
                if (!have_close.count({q, p, s})) a.add_close(q, p, s, sink);
        }
    return a;
}

enum class ProductKind { Intersection, Union };

inline EpsNwa product(const EpsNwa& a0, const EpsNwa& b0, ProductKind kind) {
    auto [a, b] = on_common_alphabet(a0, b0);
    if (kind == ProductKind::Union) {
        // both components must survive on every word for the union acceptance
        // condition to be meaningful
        a = completed(std::move(a));
        b = completed(std::move(b));
    }
    EpsNwa out;
    out.alphabet = a.alphabet;
    const std::size_t nb = b.num_linear();
    const std::size_t hb = b.num_hier();
    for (State qa = 0; qa < a.num_linear(); ++qa)
        for (State qb = 0; qb < nb; ++qb) {
            State q = out.add_linear(a.linear_names[qa] + "&" + b.linear_names[qb]);
            bool acc = (kind == ProductKind::Intersection)
                           ? (a.accepting[qa] && b.accepting[qb])
                           : (a.accepting[qa] || b.accepting[qb]);
            out.accepting[q] = acc;
        }
    for (Hier pa = 0; pa < a.num_hier(); ++pa)
        for (Hier pb = 0; pb < hb; ++pb)
            out.add_hier(a.hier_names[pa] + "&" + b.hier_names[pb]);
    auto lid = [&](State qa, State qb) { return static_cast<State>(qa * nb + qb); };
    auto hid = [&](Hier pa, Hier pb) { return static_cast<Hier>(pa * hb + pb); };
    out.initial = lid(a.initial, b.initial);
    for (const auto& ra : a.opens)
        for (const auto& rb : b.opens)
            if (ra.sym == rb.sym)
                out.add_open(lid(ra.from, rb.from), ra.sym, lid(ra.to, rb.to), hid(ra.push, rb.push));
    for (const auto& ra : a.closes)
        for (const auto& rb : b.closes)
            if (ra.sym == rb.sym)
                out.add_close(lid(ra.from, rb.from), hid(ra.pop, rb.pop), ra.sym, lid(ra.to, rb.to));
    // eps rules are not synchronised: each product eps move simulates one
    // component's eps rule while the other stands still
    for (const auto& ea : a.eps)
        for (State qb = 0; qb < nb; ++qb) out.add_eps(lid(ea.from, qb), lid(ea.to, qb));
    for (const auto& eb : b.eps)
        for (State qa = 0; qa < a.num_linear(); ++qa) out.add_eps(lid(qa, eb.from), lid(qa, eb.to));
    return trim(out);
}

} // namespace detail

inline EpsNwa intersect(const EpsNwa& a, const EpsNwa& b) {
    return detail::product(a, b, detail::ProductKind::Intersection);
}

inline EpsNwa union_of(const EpsNwa& a, const EpsNwa& b) {
    return detail::product(a, b, detail::ProductKind::Union);
}

// ---------------------------------------------------------------------------
// Determinization (summary-set construction with eps-closures)
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultStateBudget = 1'000'000;

/// Equivalent DNWA via the summary-set construction; linear states of the
/// result are sets of summaries (q, q') closed under eps-reachability of the
/// target component. Output state numbering is discovery-ordered and
/// reproducible byte-for-byte. Throws BudgetError when the subset space
/// exceeds `state_budget` linear states.
inline Dnwa determinize(const EpsNwa& a0, std::size_t state_budget = kDefaultStateBudget) {
    const EpsNwa a = trim(a0);
    const std::size_t n = a.num_linear();
    detail::Relation e = detail::eps_closure(a);

    using Summary = std::vector<std::pair<State, State>>;  // sorted, unique
    auto eclose = [&](Summary s) {
        std::set<std::pair<State, State>> out;
        for (auto [q, q2] : s) {
            e.for_each_in_row(q2, [&](std::size_t q3) { out.insert({q, static_cast<State>(q3)}); });
        }
        return Summary(out.begin(), out.end());
    };

    Dnwa d;
    d.alphabet = a.alphabet;
    std::map<Summary, State> ids;
    std::vector<Summary> sets;
    auto intern_set = [&](const Summary& s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        if (sets.size() >= state_budget)
            throw BudgetError("determinize: state budget of " + std::to_string(state_budget) +
                              " linear states exceeded");
        State q = d.add_linear("s" + std::to_string(sets.size()));
        ids.emplace(s, q);
        sets.push_back(s);
        bool acc = false;
        for (auto [x, y] : s) acc = acc || a.accepting[y];
        d.accepting[q] = acc;
        return q;
    };

    // hier states of the result: (source summary set, opened symbol)
    std::map<std::pair<State, Symbol>, Hier> hier_ids;
    std::vector<std::pair<State, Symbol>> hier_list;
    auto intern_hier = [&](State s, Symbol a_) {
        auto it = hier_ids.find({s, a_});
        if (it != hier_ids.end()) return it->second;
        Hier p = d.add_hier("h" + std::to_string(hier_list.size()));
        hier_ids.emplace(std::pair(s, a_), p);
        hier_list.push_back({s, a_});
        return p;
    };

    std::vector<std::vector<std::size_t>> opens_from(n), closes_from(n);
    for (std::size_t i = 0; i < a.opens.size(); ++i) opens_from[a.opens[i].from].push_back(i);
    for (std::size_t i = 0; i < a.closes.size(); ++i) closes_from[a.closes[i].from].push_back(i);

    Summary init;
    init.push_back({a.initial, a.initial});
    init = eclose(std::move(init));
    State sink_needed = intern_set(init);
    (void)sink_needed;

    // process all (linear, symbol) open transitions and (linear, hier, symbol)
    // close transitions over the growing state/hier lists
    std::size_t next_lin = 0, next_close_lin = 0;
    std::vector<std::size_t> close_done_hier;  // per linear state: hiers handled
    while (next_lin < sets.size() || next_close_lin < sets.size()) {
        if (next_lin < sets.size()) {
            State s = static_cast<State>(next_lin++);
            Summary cur = sets[s];
            for (Symbol sym = 0; sym < d.alphabet.size(); ++sym) {
                std::set<std::pair<State, State>> tgt;
                for (auto [q, q2] : cur)
                    for (std::size_t oi : opens_from[q2]) {
                        const OpenRule& o = a.opens[oi];
                        if (o.sym == sym) tgt.insert({o.to, o.to});
                    }
                Summary nxt = eclose(Summary(tgt.begin(), tgt.end()));
                Hier h = intern_hier(s, sym);
                State t = intern_set(nxt);
                d.add_open(s, sym, t, h);
            }
            continue;
        }
        // close transitions: schedule lazily so newly interned hier states get
        // combined with every linear state and vice versa
        State s1 = static_cast<State>(next_close_lin);
        if (close_done_hier.size() <= next_close_lin) close_done_hier.push_back(0);
        if (close_done_hier[next_close_lin] >= hier_list.size() && next_lin >= sets.size()) {
            ++next_close_lin;
            continue;
        }
        while (close_done_hier[next_close_lin] < hier_list.size()) {
            std::size_t hidx = close_done_hier[next_close_lin]++;
            auto [pre_s, opened_sym] = hier_list[hidx];
            Summary pre = sets[pre_s];
            Summary cur = sets[s1];
            for (Symbol sym = 0; sym < d.alphabet.size(); ++sym) {
                Summary nxt;
                if (sym == opened_sym) {
                    std::set<std::pair<State, State>> tgt;
                    for (auto [q, q1] : pre)
                        for (std::size_t oi : opens_from[q1]) {
                            const OpenRule& o = a.opens[oi];
                            if (o.sym != sym) continue;
                            for (auto [q2, q3] : cur) {
                                if (q2 != o.to) continue;
                                for (std::size_t ci : closes_from[q3]) {
                                    const CloseRule& c = a.closes[ci];
                                    if (c.sym == sym && c.pop == o.push) tgt.insert({q, c.to});
                                }
                            }
                        }
                    nxt = eclose(Summary(tgt.begin(), tgt.end()));
                }  // mismatched labels never occur on well-nested input: sink
                State t = intern_set(nxt);
                d.add_close(s1, static_cast<Hier>(hidx), sym, t);
            }
        }
        if (next_lin >= sets.size() && close_done_hier[next_close_lin] >= hier_list.size())
            ++next_close_lin;
    }
    detail::dedupe_rules(d.opens, d.closes);
    return d;
}

// ---------------------------------------------------------------------------
// Complement and inclusion
// ---------------------------------------------------------------------------

/// Total form of a partial DNWA: missing transitions are routed to a fresh
/// non-accepting sink (with a fresh sink hierarchical state).
inline Dnwa complete(Dnwa d) {
    std::vector<std::string> defects;
    std::set<std::pair<State, Symbol>> have_open;
    std::set<std::tuple<State, Hier, Symbol>> have_close;
    for (const auto& r : d.opens) {
        if (!have_open.insert({r.from, r.sym}).second)
            throw ValidationError("complete: duplicate opening rules; input is not deterministic");
    }
    for (const auto& r : d.closes) {
        if (!have_close.insert({r.from, r.pop, r.sym}).second)
            throw ValidationError("complete: duplicate closing rules; input is not deterministic");
    }
    bool total = true;
    for (State q = 0; q < d.num_linear() && total; ++q)
        for (Symbol s = 0; s < d.alphabet.size() && total; ++s) {
            if (!have_open.count({q, s})) total = false;
            for (Hier p = 0; p < d.num_hier(); ++p)
                if (!have_close.count({q, p, s})) total = false;
        }
    if (total && d.num_hier() > 0) return d;
    State sink = d.add_linear("sink");
    Hier sinkh = d.add_hier("sinkp");
    for (State q = 0; q < d.num_linear(); ++q)
        for (Symbol s = 0; s < d.alphabet.size(); ++s) {
            if (!have_open.count({q, s})) d.add_open(q, s, sink, sinkh);
            for (Hier p = 0; p < d.num_hier(); ++p)
                if (!have_close.count({q, p, s})) d.add_close(q, p, s, sink);
        }
    return d;
}

/// Complement relative to NW(Sigma): completes first, then flips the
/// accepting set.
inline Dnwa complement(Dnwa d) {
    d = complete(std::move(d));
    for (std::size_t q = 0; q < d.accepting.size(); ++q) d.accepting[q] = !d.accepting[q];
    return d;
}

/// L(A) subseteq L(D)? D must be deterministic (duplicates rejected); it is
/// completed internally. PTIME: emptiness of A intersected with the
/// complement of D.
inline bool included_in(const EpsNwa& a, const Dnwa& d) {
    Dnwa comp = complement(d);
    return is_empty(intersect(a, comp.to_eps_nwa()));
}

// ---------------------------------------------------------------------------
// Shortest accepted word (witness extraction from cost-annotated saturation)
// ---------------------------------------------------------------------------

namespace detail {

struct WitnessProd {
    enum Kind { Base, Wrap, Cat } kind = Base;
    // Wrap: open/close rule indexes + inner pair; Cat: two pairs
    std::size_t open_rule = 0, close_rule = 0;
    std::pair<State, State> left{}, right{};
};

} // namespace detail

/// Shortest well-nested word accepted by A (ties broken deterministically),
/// or nullopt if L(A) is empty.
inline std::optional<NestedWord> shortest_accepted(const EpsNwa& a) {
    const std::size_t n = a.num_linear();
    using Pair = std::pair<State, State>;
    std::map<Pair, std::pair<std::size_t, detail::WitnessProd>> settled;
    using QItem = std::tuple<std::size_t, Pair, detail::WitnessProd>;
    auto cmp = [](const QItem& x, const QItem& y) {
        return std::tie(std::get<0>(x), std::get<1>(x)) > std::tie(std::get<0>(y), std::get<1>(y));
    };
    std::priority_queue<QItem, std::vector<QItem>, decltype(cmp)> pq(cmp);
    detail::NwaIndexes idx(a);
    for (State q = 0; q < n; ++q) pq.push({0, {q, q}, {}});
    for (const auto& r : a.eps) pq.push({0, {r.from, r.to}, {}});
    while (!pq.empty()) {
        auto [len, pr, prod] = pq.top();
        pq.pop();
        if (settled.count(pr)) continue;
        settled.emplace(pr, std::pair(len, prod));
        auto [q1, q2] = pr;
        // wrap with matching open/close rule pairs
        for (std::size_t oi : idx.opens_into[q1]) {
            const OpenRule& o = a.opens[oi];
            for (std::size_t ci : idx.closes_from[q2]) {
                const CloseRule& c = a.closes[ci];
                if (c.pop == o.push && c.sym == o.sym) {
                    detail::WitnessProd w;
                    w.kind = detail::WitnessProd::Wrap;
                    w.open_rule = oi;
                    w.close_rule = ci;
                    w.left = pr;
                    pq.push({len + 2, {o.from, c.to}, w});
                }
            }
        }
        // concatenate with already settled partners
        for (const auto& [other, info] : settled) {
            if (other.first == q2) {
                detail::WitnessProd w;
                w.kind = detail::WitnessProd::Cat;
                w.left = pr;
                w.right = other;
                pq.push({len + info.first, {q1, other.second}, w});
            }
            if (other.second == q1) {
                detail::WitnessProd w;
                w.kind = detail::WitnessProd::Cat;
                w.left = other;
                w.right = pr;
                pq.push({len + info.first, {other.first, q2}, w});
            }
        }
    }
    std::optional<Pair> best;
    std::size_t best_len = 0;
    for (State q = 0; q < n; ++q) {
        if (!a.accepting[q]) continue;
        auto it = settled.find({a.initial, q});
        if (it == settled.end()) continue;
        if (!best || it->second.first < best_len) {
            best = it->first;
            best_len = it->second.first;
        }
    }
    if (!best) return std::nullopt;
    // reconstruct
    auto build = [&](auto&& self, Pair pr) -> TagSeq {
        const auto& [len, prod] = settled.at(pr);
        (void)len;
        switch (prod.kind) {
            case detail::WitnessProd::Base:
                return {};
            case detail::WitnessProd::Wrap: {
                TagSeq inner = self(self, prod.left);
                TagSeq out;
                out.push_back(open_tag(a.opens[prod.open_rule].sym));
                out.insert(out.end(), inner.begin(), inner.end());
                out.push_back(close_tag(a.closes[prod.close_rule].sym));
                return out;
            }
            case detail::WitnessProd::Cat: {
                TagSeq l = self(self, prod.left);
                TagSeq r = self(self, prod.right);
                l.insert(l.end(), r.begin(), r.end());
                return l;
            }
        }
        return {};
    };
    return NestedWord::trusted(build(build, *best));
}

// ---------------------------------------------------------------------------
// Language enumeration (oracle backend): exactly the accepted well-nested
// words of length <= max_len, in (length, lexicographic) order.
// ---------------------------------------------------------------------------

inline std::vector<NestedWord> enumerate_language(const EpsNwa& a0, std::size_t max_len) {
    EpsNwa a = trim(a0);
    std::vector<NestedWord> out;
    if (a.opens.empty() && a.num_linear() == 1 && !a.accepting[a.initial] && a.closes.empty() &&
        a.eps.empty())
        return out;  // trimmed to the canonical empty automaton

    detail::Relation e = detail::eps_closure(a.num_linear() ? a : a);

    // threads: (linear state, stack node); stacks share structure via an arena
    struct StackNode {
        Hier h;
        std::int32_t parent;
    };
    std::vector<StackNode> arena;
    using Thread = std::pair<State, std::int32_t>;  // stack -1 = empty

    std::vector<std::vector<std::size_t>> opens_from(a.num_linear()), closes_from(a.num_linear());
    for (std::size_t i = 0; i < a.opens.size(); ++i) opens_from[a.opens[i].from].push_back(i);
    for (std::size_t i = 0; i < a.closes.size(); ++i) closes_from[a.closes[i].from].push_back(i);

    auto eclose_threads = [&](std::vector<Thread> ts) {
        std::set<Thread> seen(ts.begin(), ts.end());
        std::deque<Thread> work(ts.begin(), ts.end());
        while (!work.empty()) {
            auto [q, st] = work.front();
            work.pop_front();
            e.for_each_in_row(q, [&](std::size_t q2) {
                Thread t{static_cast<State>(q2), st};
                if (seen.insert(t).second) work.push_back(t);
            });
        }
        return std::vector<Thread>(seen.begin(), seen.end());
    };

    TagSeq word;
    std::vector<Symbol> label_stack;
    auto dfs = [&](auto&& self, const std::vector<Thread>& threads) -> void {
        if (label_stack.empty()) {
            for (const auto& [q, st] : threads)
                if (st < 0 && a.accepting[q]) {
                    out.push_back(NestedWord::trusted(word));
                    break;
                }
        }
        if (word.size() >= max_len) return;
        // opening moves need room for their matching closes
        if (word.size() + 1 + label_stack.size() + 1 <= max_len) {
            for (Symbol s = 0; s < a.alphabet.size(); ++s) {
                std::vector<Thread> next;
                for (const auto& [q, st] : threads)
                    for (std::size_t oi : opens_from[q]) {
                        const OpenRule& o = a.opens[oi];
                        if (o.sym != s) continue;
                        arena.push_back({o.push, st});
                        next.push_back({o.to, static_cast<std::int32_t>(arena.size() - 1)});
                    }
                if (next.empty()) continue;
                next = eclose_threads(std::move(next));
                word.push_back(open_tag(s));
                label_stack.push_back(s);
                self(self, next);
                label_stack.pop_back();
                word.pop_back();
            }
        }
        if (!label_stack.empty() && word.size() + 1 + (label_stack.size() - 1) <= max_len) {
            Symbol s = label_stack.back();
            std::vector<Thread> next;
            for (const auto& [q, st] : threads) {
                if (st < 0) continue;
                Hier top = arena[static_cast<std::size_t>(st)].h;
                for (std::size_t ci : closes_from[q]) {
                    const CloseRule& c = a.closes[ci];
                    if (c.sym == s && c.pop == top)
                        next.push_back({c.to, arena[static_cast<std::size_t>(st)].parent});
                }
            }
            if (!next.empty()) {
                next = eclose_threads(std::move(next));
                word.push_back(close_tag(s));
                label_stack.pop_back();
                self(self, next);
                label_stack.push_back(s);
                word.pop_back();
            }
        }
    };
    std::vector<Thread> init = eclose_threads({{a.initial, -1}});
    dfs(dfs, init);
    std::sort(out.begin(), out.end(), [](const NestedWord& x, const NestedWord& y) {
        if (x.size() != y.size()) return x.size() < y.size();
        return x.tags() < y.tags();
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Stock automata
// ---------------------------------------------------------------------------

/// Acceptor of all well-nested words over `alphabet`.
inline EpsNwa universal_wellnested(const Alphabet& alphabet) {
    EpsNwa a;
    a.alphabet = alphabet;
    State q = a.add_linear("q");
    a.accepting[q] = true;
    for (Symbol s = 0; s < alphabet.size(); ++s) {
        Hier p = a.add_hier("p_" + alphabet.name(s));
        a.add_open(q, s, q, p);
        a.add_close(q, p, s, q);
    }
    return a;
}

/// Acceptor of the empty language over `alphabet`.
inline EpsNwa empty_automaton(const Alphabet& alphabet) {
    EpsNwa a;
    a.alphabet = alphabet;
    a.add_linear("q0");
    return a;
}

/// Acceptor of exactly {w}.
inline EpsNwa singleton_automaton(const NestedWord& w, const Alphabet& alphabet) {
    EpsNwa a;
    a.alphabet = alphabet;
    const TagSeq& tags = w.tags();
    for (std::size_t i = 0; i <= tags.size(); ++i) a.add_linear("n" + std::to_string(i));
    a.accepting[tags.size()] = true;
    a.initial = 0;
    auto match = detail::matching_positions(tags);
    std::vector<Hier> hier_at(tags.size(), 0);
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i].pol == Pol::Opening) hier_at[i] = a.add_hier("m" + std::to_string(i));
    std::vector<std::size_t> open_of(tags.size(), 0);
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i].pol == Pol::Opening) open_of[match[i]] = i;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        State from = static_cast<State>(i), to = static_cast<State>(i + 1);
        if (tags[i].pol == Pol::Opening)
            a.add_open(from, tags[i].sym, to, hier_at[i]);
        else
            a.add_close(from, hier_at[open_of[i]], tags[i].sym, to);
    }
    return a;
}

namespace detail {

/// Acceptor (over well-nested inputs, used only inside intersections) of tag
/// sequences with at least `min_tags` tags. Label matching is not enforced
/// here; the other product component supplies it.
inline EpsNwa min_tags_automaton(const Alphabet& alphabet, std::size_t min_tags) {
    EpsNwa a;
    a.alphabet = alphabet;
    for (std::size_t c = 0; c <= min_tags; ++c) a.add_linear("c" + std::to_string(c));
    a.accepting[min_tags] = true;
    Hier p = a.add_hier("p");
    auto nxt = [&](std::size_t c) { return static_cast<State>(std::min(c + 1, min_tags)); };
    for (std::size_t c = 0; c <= min_tags; ++c)
        for (Symbol s = 0; s < alphabet.size(); ++s) {
            a.add_open(static_cast<State>(c), s, nxt(c), p);
            a.add_close(static_cast<State>(c), p, s, nxt(c));
        }
    return a;
}

} // namespace detail

} // namespace nwg
