#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdegbm/linalg.hpp"

namespace sdegbm {

// Fine-grid Brownian increments for one path, all drivers. Coarse schemes
// consume exact block sums of these, so a coarse run and the fine reference
// see the same underlying Brownian path at every shared grid point.
struct WienerLattice {
    std::size_t m = 0;
    std::size_t n_fine = 0;
    double T = 0.0;
    double delta = 0.0;  // T / n_fine
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    std::vector<double> increments;  // row-major, m rows of n_fine

    double at(std::size_t driver, std::size_t step) const {
        return increments[driver * n_fine + step];
    }
    // Exact ordered sum of fine increments over [i0, i1), per driver.
    Vec increment_over(std::size_t i0, std::size_t i1) const;
    Vec total() const { return increment_over(0, n_fine); }
};

struct CoarseIncrements {
    std::size_t factor = 1;
    std::size_t m = 0;
    std::size_t n_coarse = 0;
    double dt = 0.0;
    std::vector<double> increments;  // row-major, m rows of n_coarse

    double at(std::size_t driver, std::size_t step) const {
        return increments[driver * n_coarse + step];
    }
    Vec step_vector(std::size_t step) const;
};

WienerLattice sample_lattice(std::uint64_t master_seed, std::uint64_t path_index,
                             std::size_t m, std::size_t n_fine, double T);

CoarseIncrements coarsen(const WienerLattice& lattice, std::size_t factor);

Vec increment_over(const WienerLattice& lattice, std::size_t i0, std::size_t i1);

// Debug dump: fixed little-endian header (m, n_fine, T, seed, path_index)
// followed by the raw increment doubles.
void dump_lattice(const WienerLattice& lattice, const std::string& path);
WienerLattice load_lattice(const std::string& path);

}  // namespace sdegbm
