#pragma once

#include <cstdint>
#include <random>

namespace unipairs {

/// Seed-stream splitting: a master seed plus a stream tag yields an
/// independent engine, so partial reruns (stage-1 folds, stage-2 folds,
/// simulation noise, per-rep draws) stay reproducible in isolation.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    // splitmix64 over the combined word
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace stream {
constexpr std::uint64_t cv_folds_stage1 = 1;
constexpr std::uint64_t cv_folds_stage2 = 2;
constexpr std::uint64_t simulation = 3;
}  // namespace stream

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t stream_tag) {
    return Rng(derive_seed(master, stream_tag));
}

}  // namespace unipairs
