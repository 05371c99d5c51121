#include "sdegbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sdegbm/errors.hpp"

namespace sdegbm {

bool SemilinearSDE::linear_parts_diagonal() const {
    if (!A.is_diagonal()) return false;
    for (const auto& b : B)
        if (!b.is_diagonal()) return false;
    return true;
}

Vec SemilinearSDE::nonlinear_drift(const Vec& x, double t) const {
    if (!F) return Vec(d, 0.0);
    return F(x, t);
}

Vec SemilinearSDE::full_drift(const Vec& x, double t) const {
    Vec out = A.apply(x);
    if (F) {
        const Vec f = F(x, t);
        for (std::size_t i = 0; i < d; ++i) out[i] += f[i];
    }
    return out;
}

Matrix SemilinearSDE::stacked_g(const Vec& x, double t) const {
    if (g_stacked) return g_stacked(x, t);
    Matrix out(d, m);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec col = g[i](x, t);
        for (std::size_t r = 0; r < d; ++r) out(r, i) = col[r];
    }
    return out;
}

Vec SemilinearSDE::g_column(std::size_t i, const Vec& x, double t) const {
    if (!g.empty()) return g[i](x, t);
    if (g_stacked) {
        const Matrix all = g_stacked(x, t);
        Vec col(d);
        for (std::size_t r = 0; r < d; ++r) col[r] = all(r, i);
        return col;
    }
    return Vec(d, 0.0);
}

void SemilinearSDE::validate() const {
    if (d < 1) throw ConfigError("model: state dimension d must be >= 1");
    if (m < 1) throw ConfigError("model: driver count m must be >= 1");
    if (!(T > 0.0)) throw ConfigError("model: horizon T must be positive");
    if (A.rows() != d || A.cols() != d)
        throw ConfigError("model: matrix A is not d x d");
    if (B.size() != m)
        throw ConfigError("model: B must have exactly m entries");
    for (std::size_t i = 0; i < B.size(); ++i)
        if (B[i].rows() != d || B[i].cols() != d)
            throw ConfigError("model: matrix B[" + std::to_string(i) + "] is not d x d");
    if (!g.empty() && g.size() != m)
        throw ConfigError("model: g must have exactly m entries when present");
    if (x0.size() != d) throw ConfigError("model: x0 has wrong dimension");
    if (!(growth_exponent_c > 0.0))
        throw ConfigError("model: growth_exponent_c must be positive");
}

CommutativityReport validate_commutativity(const SemilinearSDE& model, double tol) {
    model.validate();
    CommutativityReport rep;
    rep.tolerance = tol;
    if (model.linear_parts_diagonal()) {
        // Diagonal matrices commute identically; both maxima are exactly 0.
        rep.pass = true;
        return rep;
    }
    for (std::size_t i = 0; i < model.B.size(); ++i) {
        const Matrix c = model.A * model.B[i] - model.B[i] * model.A;
        rep.max_ab_commutator = std::max(rep.max_ab_commutator, c.frobenius_norm());
    }
    for (std::size_t i = 0; i < model.B.size(); ++i)
        for (std::size_t j = i + 1; j < model.B.size(); ++j) {
            const Matrix c = model.B[j] * model.B[i] - model.B[i] * model.B[j];
            rep.max_bb_commutator = std::max(rep.max_bb_commutator, c.frobenius_norm());
        }
    rep.pass = rep.max_ab_commutator <= tol && rep.max_bb_commutator <= tol;
    return rep;
}

ModelName parse_model_name(const std::string& s) {
    if (s == "ginzburg_landau") return ModelName::ginzburg_landau;
    if (s == "hiv") return ModelName::hiv;
    if (s == "lotka_volterra") return ModelName::lotka_volterra;
    if (s == "tumor") return ModelName::tumor;
    throw ConfigError("unknown model name: " + s);
}

const char* model_name_str(ModelName name) {
    switch (name) {
        case ModelName::ginzburg_landau: return "ginzburg_landau";
        case ModelName::hiv: return "hiv";
        case ModelName::lotka_volterra: return "lotka_volterra";
        case ModelName::tumor: return "tumor";
    }
    return "?";
}

namespace {

class ParamReader {
public:
    ParamReader(const Params& params, std::string model)
        : params_(params), model_(std::move(model)) {}

    double get(const std::string& key) {
        auto it = params_.find(key);
        if (it == params_.end())
            throw ConfigError("model " + model_ + ": missing parameter model." + key);
        used_.insert(key);
        return it->second;
    }

    void finish() const {
        for (const auto& [key, value] : params_) {
            (void)value;
            if (!used_.count(key))
                throw ConfigError("model " + model_ + ": unknown parameter model." + key);
        }
    }

private:
    const Params& params_;
    std::string model_;
    std::set<std::string> used_;
};

SemilinearSDE make_ginzburg_landau(const Params& params) {
    ParamReader p(params, "ginzburg_landau");
    const double sigma = p.get("sigma");
    p.finish();
    if (!(sigma > 0.0)) throw ConfigError("ginzburg_landau: sigma must be positive");

    SemilinearSDE sde;
    sde.name = "ginzburg_landau";
    sde.d = 1;
    sde.m = 1;
    sde.A = Matrix::diagonal({-1.0 + sigma / 2.0});
    sde.B = {Matrix::diagonal({std::sqrt(sigma)})};
    sde.F = [](const Vec& x, double) -> Vec { return {-x[0] * x[0] * x[0]}; };
    sde.DF = [](const Vec& x, double) {
        return Matrix::diagonal({-3.0 * x[0] * x[0]});
    };
    // Small initial data keeps the benchmark dt ladder (2^-4 .. 2^-9) inside
    // the scheme's asymptotic regime; larger x0 shows a pre-asymptotic bend.
    sde.x0 = {0.2};
    sde.T = 1.0;
    sde.growth_exponent_c = 2.0;
    return sde;
}

SemilinearSDE make_hiv(const Params& params) {
    ParamReader p(params, "hiv");
    const double lambda = p.get("lambda");
    const double mu = p.get("mu");
    const double k = p.get("k");
    const double alpha = p.get("alpha");
    const double c = p.get("c");
    const double gamma = p.get("gamma");
    const double s1 = p.get("sigma1");
    const double s2 = p.get("sigma2");
    const double s3 = p.get("sigma3");
    p.finish();

    SemilinearSDE sde;
    sde.name = "hiv";
    sde.d = 3;
    sde.m = 2;
    sde.A = Matrix::diagonal({-mu, -alpha, -gamma});
    // W^1 drives the T and I compartments, W^2 drives V.
    sde.B = {Matrix::diagonal({s1, s2, 0.0}), Matrix::diagonal({0.0, 0.0, s3})};
    sde.F = [lambda, k, c](const Vec& x, double) -> Vec {
        const double tv = x[0] * x[2];
        return {lambda - k * tv, k * tv, c * x[1] - k * tv};
    };
    sde.DF = [k, c](const Vec& x, double) {
        Matrix j(3, 3);
        j(0, 0) = -k * x[2]; j(0, 2) = -k * x[0];
        j(1, 0) = k * x[2];  j(1, 2) = k * x[0];
        j(2, 0) = -k * x[2]; j(2, 1) = c; j(2, 2) = -k * x[0];
        return j;
    };
    sde.x0 = {0.5, 0.7, 0.9};
    sde.T = 1.0;
    sde.growth_exponent_c = 1.0;
    return sde;
}

SemilinearSDE make_lotka_volterra(const Params& params) {
    ParamReader p(params, "lotka_volterra");
    const double lambda = p.get("lambda");
    const double beta = p.get("beta");
    const double delta = p.get("delta");
    const double gamma = p.get("gamma");
    const double s1 = p.get("sigma1");
    const double s2 = p.get("sigma2");
    p.finish();

    SemilinearSDE sde;
    sde.name = "lotka_volterra";
    sde.d = 2;
    sde.m = 2;
    sde.A = Matrix::diagonal({lambda, -delta});
    sde.B = {Matrix::diagonal({s1, 0.0}), Matrix::diagonal({0.0, s2})};
    sde.F = [beta, gamma](const Vec& x, double) -> Vec {
        return {-beta * x[0] * x[1], gamma * x[0] * x[1]};
    };
    sde.DF = [beta, gamma](const Vec& x, double) {
        Matrix j(2, 2);
        j(0, 0) = -beta * x[1]; j(0, 1) = -beta * x[0];
        j(1, 0) = gamma * x[1]; j(1, 1) = gamma * x[0];
        return j;
    };
    sde.x0 = {5.0, 10.0};
    sde.T = 1.0;
    sde.growth_exponent_c = 1.0;
    return sde;
}

SemilinearSDE make_tumor(const Params& params) {
    ParamReader p(params, "tumor");
    const double lambda = p.get("lambda");
    const double mu = p.get("mu");
    const double k1 = p.get("k1");
    const double k2 = p.get("k2");
    const double sigma = p.get("sigma");
    p.finish();
    if (!(sigma > 0.0)) throw ConfigError("tumor: sigma must be positive");

    // Drug kill rate G(v(t)) with v(t) = 1/(1+cos t), written in the
    // algebraically equivalent form that stays finite at cos t = -1.
    auto kill_rate = [k1, k2](double t) { return k1 / (1.0 + k2 * (1.0 + std::cos(t))); };
    static constexpr double kFloor = 1e-12;  // guards ln(mu/p) against underflow

    SemilinearSDE sde;
    sde.name = "tumor";
    sde.d = 1;
    sde.m = 1;
    sde.A = Matrix::diagonal({0.0});
    sde.B = {Matrix::diagonal({sigma})};
    sde.F = [lambda, mu, kill_rate](const Vec& x, double t) -> Vec {
        const double pc = std::max(x[0], kFloor);
        return {(lambda * std::log(mu / pc) - kill_rate(t)) * pc};
    };
    sde.DF = [lambda, mu, kill_rate](const Vec& x, double t) {
        const double pc = std::max(x[0], kFloor);
        return Matrix::diagonal({lambda * std::log(mu / pc) - kill_rate(t) - lambda});
    };
    sde.domain_violation = [](const Vec& x) { return x[0] < kFloor; };
    sde.x0 = {0.8};
    sde.T = 1.0;
    sde.growth_exponent_c = 1.0;
    return sde;
}

}  // namespace

Params default_params(ModelName name) {
    switch (name) {
        case ModelName::ginzburg_landau:
            return {{"sigma", 2.0}};
        case ModelName::hiv:
            return {{"lambda", 3.0}, {"mu", 2.0},     {"k", 0.5},
                    {"alpha", 0.7},  {"c", 0.1},      {"gamma", 0.5},
                    {"sigma1", 1.25}, {"sigma2", 0.09}, {"sigma3", 0.4}};
        case ModelName::lotka_volterra:
            return {{"lambda", 0.8}, {"beta", 0.15}, {"delta", 0.75},
                    {"gamma", 0.01}, {"sigma1", 0.1}, {"sigma2", 0.1}};
        case ModelName::tumor:
            return {{"lambda", 1.0}, {"mu", 1.0}, {"k1", 1.0},
                    {"k2", 1.0},     {"sigma", 1.5}};
    }
    throw ConfigError("unknown model");
}

SemilinearSDE builtin_model(ModelName name, const Params& params) {
    SemilinearSDE sde;
    switch (name) {
        case ModelName::ginzburg_landau: sde = make_ginzburg_landau(params); break;
        case ModelName::hiv: sde = make_hiv(params); break;
        case ModelName::lotka_volterra: sde = make_lotka_volterra(params); break;
        case ModelName::tumor: sde = make_tumor(params); break;
    }
    sde.validate();
    return sde;
}

}  // namespace sdegbm
