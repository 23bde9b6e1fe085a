// hash.hpp -- FNV-1a hashing and hash combiners for aggregate keys
#pragma once

#include <cstdint>
#include <cstddef>
#include <string_view>
#include <vector>

namespace nwg::detail {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
    return fnv1a(s.data(), s.size(), h);
}

template <typename T>
std::uint64_t fnv1a_value(const T& v, std::uint64_t h = kFnvOffset) {
    static_assert(std::is_trivially_copyable_v<T>);
    return fnv1a(&v, sizeof(v), h);
}

template <typename T>
std::uint64_t fnv1a_range(const std::vector<T>& xs, std::uint64_t h = kFnvOffset) {
    static_assert(std::is_trivially_copyable_v<T>);
    return fnv1a(xs.data(), xs.size() * sizeof(T), h);
}

} // namespace nwg::detail
