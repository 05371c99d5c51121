#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sdegbm/linalg.hpp"

namespace sdegbm {

using DriftFn = std::function<Vec(const Vec&, double)>;
using JacobianFn = std::function<Matrix(const Vec&, double)>;
using DiffusionFn = std::function<Vec(const Vec&, double)>;
using StackedDiffusionFn = std::function<Matrix(const Vec&, double)>;

// Semilinear SDE  dX = (A X + F(X)) dt + sum_i (B_i X + g_i(X)) dW^i.
// The linear parts must satisfy the zero-commutator conditions for the
// flow-based schemes; validate_commutativity checks that.
//
// Instances are treated as immutable once built: every callback is a pure
// function of (state, time), so one model can drive many workers at once.
struct SemilinearSDE {
    std::size_t d = 0;  // state dimension
    std::size_t m = 0;  // driving Wiener processes
    Matrix A;                    // d x d linear drift
    std::vector<Matrix> B;       // m matrices, d x d linear diffusion
    DriftFn F;                   // nonlinear drift; empty means F == 0
    JacobianFn DF;               // optional Jacobian of F
    std::vector<DiffusionFn> g;  // optional nonlinear diffusions (empty = absent)
    StackedDiffusionFn g_stacked;   // optional: all g_i columns in one d x m call
    std::vector<JacobianFn> Dg;     // optional analytic Jacobians of g_i
    Vec x0;
    double T = 1.0;
    double growth_exponent_c = 1.0;  // polynomial growth degree of DF
    bool commutative_flag = true;
    std::function<bool(const Vec&)> domain_violation;  // optional per-state check
    std::string name;

    bool has_g() const { return static_cast<bool>(g_stacked) || !g.empty(); }
    bool linear_parts_diagonal() const;

    Vec nonlinear_drift(const Vec& x, double t) const;  // F(x,t) or zero
    Vec full_drift(const Vec& x, double t) const;       // A x + F(x,t)
    // d x m matrix whose column i is g_i(x); zero matrix when g is absent.
    Matrix stacked_g(const Vec& x, double t) const;
    Vec g_column(std::size_t i, const Vec& x, double t) const;

    void validate() const;  // throws ConfigError naming the offending field
};

struct CommutativityReport {
    double max_ab_commutator = 0.0;  // max_i ||A B_i - B_i A||_F
    double max_bb_commutator = 0.0;  // max_{i,j} ||B_j B_i - B_i B_j||_F
    double tolerance = 0.0;
    bool pass = false;
};

CommutativityReport validate_commutativity(const SemilinearSDE& model, double tol);

enum class ModelName { ginzburg_landau, hiv, lotka_volterra, tumor };

ModelName parse_model_name(const std::string& s);
const char* model_name_str(ModelName name);

using Params = std::map<std::string, double>;

// Parameter sets used in the benchmark runs; builtin_model requires every
// key to be present, so callers merge these with their overrides first.
Params default_params(ModelName name);
SemilinearSDE builtin_model(ModelName name, const Params& params);

}  // namespace sdegbm
