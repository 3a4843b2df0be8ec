#pragma once

#include <cstdint>
#include <string_view>

namespace ncderp {

/// Worker count for parallel kernels: the OpenMP maximum, capped by the
/// NCD_ERP_THREADS environment variable when it holds a positive integer.
int worker_count();

/// Overrides the worker count for this process (0 restores the default).
void set_worker_count(int n);

/// 64-bit finalizer from splitmix64.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed, an experiment tag
/// and up to three indices. Each component is folded in with mix64 so the
/// result depends only on the inputs, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t i = 0, std::uint64_t j = 0,
                                    std::uint64_t k = 0) {
    std::uint64_t tag_hash = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char ch : tag) {
        tag_hash ^= static_cast<unsigned char>(ch);
        tag_hash *= 0x100000001b3ULL;
    }
    std::uint64_t h = mix64(master ^ tag_hash);
    h = mix64(h ^ i);
    h = mix64(h ^ j);
    return mix64(h ^ k);
}

}  // namespace ncderp
