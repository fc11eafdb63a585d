#pragma once

#include <cstdint>

#include "cansub/kisin.hpp"

namespace cansub {

/// Parameters for random BT1 module generation. w must satisfy e*w integral,
/// 0 <= w < 1. triangular_hint requests an upper-triangular presentation
/// (diag(u^{s_i}) times an upper unit; w is then determined by the shape, not
/// the requested value).
struct GenSpec {
    long p = 3;
    int m = 1;
    int e = 1;
    int h = 2;
    int d = 1;
    Rat w = Rat(0);
    std::uint64_t seed = 1;
    std::int64_t precision = 96;
    bool triangular_hint = false;

    void validate() const;
};

/// Deterministic in the seed; the output is re-validated (BT1, dimension,
/// degree, Hodge height) rather than trusted from construction.
KisinModule gen_bt1(const GenSpec& spec);

} // namespace cansub
