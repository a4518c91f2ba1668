#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// parameter outside its physical domain (k = 0 mode, nonpositive density, ...)
struct domain_error : error {
    using error::error;
};

// separation exactly zero where a cross term divides by it
struct degenerate_geometry_error : error {
    using error::error;
};

// excitation probabilities too large for the leading-order two-qubit state
struct perturbative_bound_error : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

// physical quantity given without a unit, or with one not in the unit table
struct unit_error : config_error {
    using config_error::config_error;
};

// tolerance not reached; carries the best value and its error estimate
struct quadrature_error : error {
    double value;
    double estimate;
    quadrature_error(const std::string& what, double v, double e)
        : error(what), value(v), estimate(e) {}
};

// finite time window clips switching-function mass beyond the tail budget
struct window_error : error {
    using error::error;
};

// finite-volume mode count beyond the guard limit
struct mode_count_error : error {
    using error::error;
};

}
