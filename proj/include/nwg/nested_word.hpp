// nested_word.hpp -- tags, alphabets, flat and nested words, positional utilities
#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nwg/detail/hash.hpp"
#include "nwg/error.hpp"

namespace nwg {

/// Interned alphabet symbol; index into an Alphabet's label table.
using Symbol = std::uint32_t;

enum class Pol : std::uint8_t { Opening, Closing };

/// One opening or closing tag. Labels are interned, so tags are two words
/// and hash cheaply inside product constructions and memo tables.
struct Tag {
    Pol pol{};
    Symbol sym{};

    friend auto operator<=>(const Tag&, const Tag&) = default;
};

inline Tag open_tag(Symbol s) { return Tag{Pol::Opening, s}; }
inline Tag close_tag(Symbol s) { return Tag{Pol::Closing, s}; }

/// Raw tag sequence; not necessarily well-nested. Game configurations and
/// rule outputs live at this level, NestedWord adds the well-nested guarantee.
using TagSeq = std::vector<Tag>;

/// Finite label table mapping label strings to Symbols and back.
/// Labels match [A-Za-z0-9_]+. An empty alphabet is permitted; only the
/// empty word is well-nested over it.
class Alphabet {
public:
    Alphabet() = default;

    explicit Alphabet(std::initializer_list<std::string_view> labels) {
        for (auto l : labels) intern(l);
    }

    static bool valid_label(std::string_view label) {
        if (label.empty()) return false;
        return std::all_of(label.begin(), label.end(), [](unsigned char c) {
            return std::isalnum(c) || c == '_';
        });
    }

    /// Returns the symbol for `label`, adding it if missing.
    Symbol intern(std::string_view label) {
        if (!valid_label(label))
            throw ParseError("invalid label '" + std::string(label) + "' (want [A-Za-z0-9_]+)");
        auto it = index_.find(std::string(label));
        if (it != index_.end()) return it->second;
        Symbol s = static_cast<Symbol>(names_.size());
        names_.emplace_back(label);
        index_.emplace(names_.back(), s);
        return s;
    }

    std::optional<Symbol> find(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(Symbol s) const { return names_.at(s); }
    std::size_t size() const { return names_.size(); }
    bool contains(Symbol s) const { return s < names_.size(); }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.names_ == b.names_; }

    const std::vector<std::string>& labels() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Symbol> index_;
};

/// Merge result for combining two alphabets: the union alphabet plus symbol
/// remappings for values built over `a` resp. `b`.
struct AlphabetMerge {
    Alphabet merged;
    std::vector<Symbol> remap_a;
    std::vector<Symbol> remap_b;
};

inline AlphabetMerge merge_alphabets(const Alphabet& a, const Alphabet& b) {
    AlphabetMerge m;
    m.remap_a.reserve(a.size());
    for (Symbol s = 0; s < a.size(); ++s) m.remap_a.push_back(m.merged.intern(a.name(s)));
    m.remap_b.reserve(b.size());
    for (Symbol s = 0; s < b.size(); ++s) m.remap_b.push_back(m.merged.intern(b.name(s)));
    return m;
}

// ---------------------------------------------------------------------------
// Well-nestedness and positional utilities
// ---------------------------------------------------------------------------

/// True iff `seq` is in NW(Sigma): balanced like parentheses with matching
/// labels. One left-to-right pass with a stack of pending open labels.
inline bool is_well_nested(std::span<const Tag> seq) {
    std::vector<Symbol> pending;
    for (const Tag& t : seq) {
        if (t.pol == Pol::Opening) {
            pending.push_back(t.sym);
        } else {
            if (pending.empty() || pending.back() != t.sym) return false;
            pending.pop_back();
        }
    }
    return pending.empty();
}

inline bool is_well_nested(const TagSeq& seq) {
    return is_well_nested(std::span<const Tag>(seq));
}

/// A well-nested word. Construction validates eagerly; all other operations
/// may then assume membership in NW(Sigma).
class NestedWord {
public:
    NestedWord() = default;

    explicit NestedWord(TagSeq tags) : tags_(std::move(tags)) {
        if (!is_well_nested(tags_))
            throw PreconditionError("tag sequence is not well-nested");
    }

    /// Wraps a sequence already known to be well-nested (e.g. produced by a
    /// construction whose invariants guarantee it).
    static NestedWord trusted(TagSeq tags) {
        NestedWord w;
        w.tags_ = std::move(tags);
        return w;
    }

    const TagSeq& tags() const { return tags_; }
    std::size_t size() const { return tags_.size(); }
    bool empty() const { return tags_.empty(); }

    friend auto operator<=>(const NestedWord&, const NestedWord&) = default;

private:
    TagSeq tags_;
};

/// Flat word over Sigma (no tags); used by the standard nested encoding.
struct FlatWord {
    std::vector<Symbol> symbols;

    friend auto operator<=>(const FlatWord&, const FlatWord&) = default;
};

/// True iff w is non-empty and its first and last tags are associated,
/// i.e. the forest of w is a single tree.
inline bool is_rooted(const NestedWord& w) {
    const TagSeq& t = w.tags();
    if (t.empty()) return false;
    int depth = 0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        depth += (t[i].pol == Pol::Opening) ? 1 : -1;
        if (depth == 0) return false;  // forest splits before the last tag
    }
    return true;
}

/// Maximum nesting level of w; depth(eps) = 0.
inline std::size_t depth(const NestedWord& w) {
    std::size_t d = 0, cur = 0;
    for (const Tag& t : w.tags()) {
        if (t.pol == Pol::Opening) {
            ++cur;
            d = std::max(d, cur);
        } else {
            --cur;
        }
    }
    return d;
}

/// LAST(u</a>): the unique rooted well-nested substring of `prefix` ending at
/// its final position. The final tag must be closing and matched within
/// `prefix`; throws PreconditionError otherwise.
inline NestedWord last_rooted_suffix(std::span<const Tag> prefix) {
    if (prefix.empty() || prefix.back().pol != Pol::Closing)
        throw PreconditionError("last_rooted_suffix: prefix must end in a closing tag");
    int depth = 0;
    for (std::size_t i = prefix.size(); i-- > 0;) {
        depth += (prefix[i].pol == Pol::Closing) ? 1 : -1;
        if (depth == 0) {
            TagSeq sub(prefix.begin() + static_cast<std::ptrdiff_t>(i), prefix.end());
            if (!is_well_nested(sub))
                throw PreconditionError("last_rooted_suffix: enclosing span is not well-nested");
            return NestedWord::trusted(std::move(sub));
        }
    }
    throw PreconditionError("last_rooted_suffix: final closing tag is unmatched");
}

inline NestedWord last_rooted_suffix(const TagSeq& prefix) {
    return last_rooted_suffix(std::span<const Tag>(prefix));
}

/// Standard nested string encoding: w1...wn |-> <w1></w1>...<wn></wn>.
inline NestedWord encode_flat(const FlatWord& v) {
    TagSeq tags;
    tags.reserve(2 * v.symbols.size());
    for (Symbol s : v.symbols) {
        tags.push_back(open_tag(s));
        tags.push_back(close_tag(s));
    }
    return NestedWord::trusted(std::move(tags));
}

// ---------------------------------------------------------------------------
// Text format: concatenation of <label> and </label> tokens. Whitespace
// between tokens is skipped on input and never produced on output, so the
// printer and parser are exact inverses on valid input.
// ---------------------------------------------------------------------------

/// Parses a tag sequence, interning labels into `alphabet`.
inline TagSeq parse_tag_seq(std::string_view text, Alphabet& alphabet) {
    TagSeq out;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_ws();
    while (i < text.size()) {
        if (text[i] != '<') throw ParseError("expected '<' at offset " + std::to_string(i));
        ++i;
        bool closing = i < text.size() && text[i] == '/';
        if (closing) ++i;
        std::size_t start = i;
        while (i < text.size() && text[i] != '>') ++i;
        if (i == text.size()) throw ParseError("unterminated tag");
        std::string_view label = text.substr(start, i - start);
        ++i;  // consume '>'
        Symbol s = alphabet.intern(label);
        out.push_back(closing ? close_tag(s) : open_tag(s));
        skip_ws();
    }
    return out;
}

/// Parses a tag sequence without extending `alphabet`; unknown labels are an error.
inline TagSeq parse_tag_seq_strict(std::string_view text, const Alphabet& alphabet) {
    Alphabet scratch = alphabet;
    TagSeq seq = parse_tag_seq(text, scratch);
    if (scratch.size() != alphabet.size()) {
        for (Symbol s = static_cast<Symbol>(alphabet.size()); s < scratch.size(); ++s)
            throw ParseError("label '" + scratch.name(s) + "' not in alphabet");
    }
    return seq;
}

inline NestedWord parse_nested_word(std::string_view text, Alphabet& alphabet) {
    return NestedWord(parse_tag_seq(text, alphabet));
}

inline std::string to_text(std::span<const Tag> seq, const Alphabet& alphabet) {
    std::string out;
    for (const Tag& t : seq) {
        out += '<';
        if (t.pol == Pol::Closing) out += '/';
        out += alphabet.name(t.sym);
        out += '>';
    }
    return out;
}

inline std::string to_text(const TagSeq& seq, const Alphabet& alphabet) {
    return to_text(std::span<const Tag>(seq), alphabet);
}

inline std::string to_text(const NestedWord& w, const Alphabet& alphabet) {
    return to_text(std::span<const Tag>(w.tags()), alphabet);
}

namespace detail {

inline std::uint64_t hash_tags(std::span<const Tag> seq, std::uint64_t h = kFnvOffset) {
    for (const Tag& t : seq) {
        h = fnv1a_value(t.pol, h);
        h = fnv1a_value(t.sym, h);
    }
    return h;
}

} // namespace detail

} // namespace nwg
