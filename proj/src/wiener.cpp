#include "sdegbm/wiener.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "sdegbm/errors.hpp"
#include "sdegbm/rng.hpp"

namespace sdegbm {

Vec WienerLattice::increment_over(std::size_t i0, std::size_t i1) const {
    if (!(i0 < i1) || i1 > n_fine)
        throw ConfigError("increment_over: require 0 <= i0 < i1 <= n_fine");
    Vec out(m, 0.0);
    for (std::size_t driver = 0; driver < m; ++driver) {
        const double* row = increments.data() + driver * n_fine;
        double s = 0.0;
        for (std::size_t k = i0; k < i1; ++k) s += row[k];
        out[driver] = s;
    }
    return out;
}

Vec CoarseIncrements::step_vector(std::size_t step) const {
    Vec out(m);
    for (std::size_t driver = 0; driver < m; ++driver) out[driver] = at(driver, step);
    return out;
}

WienerLattice sample_lattice(std::uint64_t master_seed, std::uint64_t path_index,
                             std::size_t m, std::size_t n_fine, double T) {
    if (n_fine < 1) throw ConfigError("sample_lattice: n_fine must be >= 1");
    if (!(T > 0.0)) throw ConfigError("sample_lattice: T must be positive");
    if (m < 1) throw ConfigError("sample_lattice: m must be >= 1");

    WienerLattice lat;
    lat.m = m;
    lat.n_fine = n_fine;
    lat.T = T;
    lat.delta = T / static_cast<double>(n_fine);
    lat.master_seed = master_seed;
    lat.path_index = path_index;
    lat.increments.resize(m * n_fine);

    const double scale = std::sqrt(lat.delta);
    RandomStream stream(master_seed, path_index);
    for (double& dw : lat.increments) dw = scale * stream.next_normal();
    return lat;
}

CoarseIncrements coarsen(const WienerLattice& lattice, std::size_t factor) {
    if (factor == 0 || lattice.n_fine % factor != 0)
        throw ConfigError("coarsen: factor must divide n_fine");

    CoarseIncrements out;
    out.factor = factor;
    out.m = lattice.m;
    out.n_coarse = lattice.n_fine / factor;
    out.dt = lattice.delta * static_cast<double>(factor);
    out.increments.resize(out.m * out.n_coarse);
    for (std::size_t driver = 0; driver < out.m; ++driver) {
        const double* fine = lattice.increments.data() + driver * lattice.n_fine;
        double* coarse = out.increments.data() + driver * out.n_coarse;
        for (std::size_t block = 0; block < out.n_coarse; ++block) {
            double s = 0.0;
            for (std::size_t k = 0; k < factor; ++k) s += fine[block * factor + k];
            coarse[block] = s;
        }
    }
    return out;
}

Vec increment_over(const WienerLattice& lattice, std::size_t i0, std::size_t i1) {
    return lattice.increment_over(i0, i1);
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void dump_lattice(const WienerLattice& lattice, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("dump_lattice: cannot open " + path);
    write_raw(out, static_cast<std::uint64_t>(lattice.m));
    write_raw(out, static_cast<std::uint64_t>(lattice.n_fine));
    write_raw(out, lattice.T);
    write_raw(out, lattice.master_seed);
    write_raw(out, lattice.path_index);
    out.write(reinterpret_cast<const char*>(lattice.increments.data()),
              static_cast<std::streamsize>(lattice.increments.size() * sizeof(double)));
    if (!out) throw ConfigError("dump_lattice: write failed for " + path);
}

WienerLattice load_lattice(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("load_lattice: cannot open " + path);
    std::uint64_t m = 0, n_fine = 0;
    WienerLattice lat;
    read_raw(in, m);
    read_raw(in, n_fine);
    read_raw(in, lat.T);
    read_raw(in, lat.master_seed);
    read_raw(in, lat.path_index);
    lat.m = static_cast<std::size_t>(m);
    lat.n_fine = static_cast<std::size_t>(n_fine);
    lat.delta = lat.T / static_cast<double>(lat.n_fine);
    lat.increments.resize(lat.m * lat.n_fine);
    in.read(reinterpret_cast<char*>(lat.increments.data()),
            static_cast<std::streamsize>(lat.increments.size() * sizeof(double)));
    if (!in) throw ConfigError("load_lattice: truncated file " + path);
    return lat;
}

}  // namespace sdegbm
