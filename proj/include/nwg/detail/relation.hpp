// relation.hpp -- dense bit relations over state sets
#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace nwg::detail {

/// Square boolean matrix over [0, n); rows are bit-packed.
class Relation {
public:
    explicit Relation(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n_ * words_, 0) {}

    std::size_t size() const { return n_; }

    bool get(std::size_t i, std::size_t j) const {
        return (bits_[i * words_ + j / 64] >> (j % 64)) & 1u;
    }

    /// Sets (i, j); returns true if the bit was previously clear.
    bool set(std::size_t i, std::size_t j) {
        std::uint64_t& w = bits_[i * words_ + j / 64];
        std::uint64_t m = 1ull << (j % 64);
        if (w & m) return false;
        w |= m;
        return true;
    }

    void set_identity() {
        for (std::size_t i = 0; i < n_; ++i) set(i, i);
    }

    /// row(i) |= row(k); returns true on change.
    bool or_row(std::size_t i, std::size_t k) {
        bool changed = false;
        for (std::size_t w = 0; w < words_; ++w) {
            std::uint64_t before = bits_[i * words_ + w];
            std::uint64_t after = before | bits_[k * words_ + w];
            if (after != before) {
                bits_[i * words_ + w] = after;
                changed = true;
            }
        }
        return changed;
    }

    /// Reflexive-transitive closure in place (Floyd-Warshall on bit rows).
    void close_transitive() {
        set_identity();
        for (std::size_t k = 0; k < n_; ++k)
            for (std::size_t i = 0; i < n_; ++i)
                if (get(i, k)) or_row(i, k);
    }

    /// this := this o other (boolean matrix product).
    Relation composed(const Relation& other) const {
        Relation out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for_each_in_row(i, [&](std::size_t k) { out.or_row_from(i, other, k); });
        return out;
    }

    void or_row_from(std::size_t i, const Relation& src, std::size_t k) {
        for (std::size_t w = 0; w < words_; ++w)
            bits_[i * words_ + w] |= src.bits_[k * words_ + w];
    }

    template <typename F>
    void for_each_in_row(std::size_t i, F&& f) const {
        for (std::size_t w = 0; w < words_; ++w) {
            std::uint64_t x = bits_[i * words_ + w];
            while (x) {
                unsigned b = static_cast<unsigned>(__builtin_ctzll(x));
                f(w * 64 + b);
                x &= x - 1;
            }
        }
    }

private:
    std::size_t n_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

} // namespace nwg::detail
