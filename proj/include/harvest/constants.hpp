#pragma once

namespace harvest {

// CODATA 2018, pinned as literals so outputs are bit-stable across toolchains.
inline constexpr double hbar        = 1.054571817e-34;    // J s (exact in SI 2019)
inline constexpr double bohr_radius = 5.29177210903e-11;  // m
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg
inline constexpr double c_light     = 2.99792458e8;       // m/s (exact)

}
