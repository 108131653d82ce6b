// =============================================================================
// model.hpp — Domain types: mutation model, selection regime, sample
// configurations, simplex points, and the model-file parser.
//
// All types are immutable values after construction and safe to share
// across threads.
// =============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "strongsel/tolerances.hpp"

namespace strongsel {

/// Strong connectivity of the support digraph {(i,j): P_ij > 0}.
inline bool check_irreducible(const std::vector<std::vector<double>>& P) {
    const int d = static_cast<int>(P.size());
    // reachability from every node via BFS on P and on its transpose
    auto reaches_all = [&](bool transpose) {
        std::vector<char> seen(d, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < d; ++v) {
                double w = transpose ? P[v][u] : P[u][v];
                if (w > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reaches_all(false) && reaches_all(true);
}

/// Mutation rate theta and row-stochastic mutation probability matrix P.
/// Allele 0 is the fit allele throughout.
class MutationModel {
  public:
    MutationModel(int d, double theta, std::vector<std::vector<double>> P)
        : d_(d), theta_(theta), P_(std::move(P)) {
        if (d_ < 2) throw std::invalid_argument("MutationModel: need d >= 2");
        if (theta_ < 0.0) throw std::invalid_argument("MutationModel: theta < 0");
        if (static_cast<int>(P_.size()) != d_)
            throw std::invalid_argument("MutationModel: P must be d x d");
        for (const auto& row : P_) {
            if (static_cast<int>(row.size()) != d_)
                throw std::invalid_argument("MutationModel: P must be d x d");
            double s = 0.0;
            for (double p : row) {
                if (p < 0.0 || p > 1.0)
                    throw std::invalid_argument("MutationModel: P entries must lie in [0,1]");
                s += p;
            }
            if (std::abs(s - 1.0) > tol.simplex)
                throw std::invalid_argument("MutationModel: row of P does not sum to 1");
        }
        irreducible_ = check_irreducible(P_);
    }

    int d() const { return d_; }
    double theta() const { return theta_; }
    double P(int i, int j) const { return P_[i][j]; }
    const std::vector<std::vector<double>>& matrix() const { return P_; }
    bool irreducible() const { return irreducible_; }

    /// theta * P_{0i}: immigration rate parameter of unfit type i (0-based).
    double theta_p1(int i) const { return theta_ * P_[0][i]; }

    void require_irreducible(const char* what) const {
        if (!irreducible_)
            throw std::invalid_argument(std::string(what) +
                                        ": requires an irreducible mutation matrix");
    }

  private:
    int d_;
    double theta_;
    std::vector<std::vector<double>> P_;
    bool irreducible_;
};

/// Parent-independent mutation: P_ij = Q_j with all Q_j summing to 1.
class PimModel {
  public:
    PimModel(double theta, std::vector<double> Q) : theta_(theta), Q_(std::move(Q)) {
        if (Q_.size() < 2) throw std::invalid_argument("PimModel: need d >= 2");
        if (theta_ < 0.0) throw std::invalid_argument("PimModel: theta < 0");
        double s = std::accumulate(Q_.begin(), Q_.end(), 0.0);
        if (std::abs(s - 1.0) > tol.simplex)
            throw std::invalid_argument("PimModel: Q does not sum to 1");
        for (double q : Q_)
            if (q < 0.0) throw std::invalid_argument("PimModel: Q entries must be >= 0");
    }

    int d() const { return static_cast<int>(Q_.size()); }
    double theta() const { return theta_; }
    double Q(int i) const { return Q_[i]; }
    const std::vector<double>& q() const { return Q_; }
    // irreducibility of the PIM matrix is equivalent to all Q_j > 0
    bool irreducible() const {
        return std::all_of(Q_.begin(), Q_.end(), [](double q) { return q > 0.0; });
    }

    /// Equivalent general model with every row of P equal to Q.
    MutationModel as_general() const {
        return MutationModel(d(), theta_, std::vector<std::vector<double>>(d(), Q_));
    }

  private:
    double theta_;
    std::vector<double> Q_;
};

/// Selection strengths: sigma is the asymptotic parameter of allele 0;
/// sigma_rest holds sigma_2..sigma_d (0-based entries 0..d-2).
struct SelectionRegime {
    double sigma = 0.0;
    std::vector<double> sigma_rest;  // may be empty => all zero

    double sigma_of(int allele, int d) const {
        if (allele == 0) return sigma;
        if (sigma_rest.empty()) return 0.0;
        if (static_cast<int>(sigma_rest.size()) != d - 1)
            throw std::invalid_argument("SelectionRegime: sigma_rest must have d-1 entries");
        return sigma_rest[allele - 1];
    }
    bool rest_is_zero() const {
        return std::all_of(sigma_rest.begin(), sigma_rest.end(),
                           [](double s) { return s == 0.0; });
    }
    void require_rest_zero(const char* what) const {
        if (!rest_is_zero())
            throw std::invalid_argument(std::string(what) +
                                        ": requires sigma_2..sigma_d = 0");
    }
};

/// Allele count vector n of a sample; the all-zero vector is admitted
/// (convention q(0) = 1).
struct SampleConfig {
    std::vector<int> n;

    SampleConfig() = default;
    explicit SampleConfig(std::vector<int> counts) : n(std::move(counts)) {
        for (int c : n)
            if (c < 0) throw std::invalid_argument("SampleConfig: negative count");
    }
    static SampleConfig unit(int d, int i) {
        std::vector<int> v(d, 0);
        v[i] = 1;
        return SampleConfig(v);
    }
    int d() const { return static_cast<int>(n.size()); }
    int size() const { return std::accumulate(n.begin(), n.end(), 0); }
    int unfit() const { return size() - n[0]; }
};

/// Point on the simplex Delta.
struct SimplexPoint {
    std::vector<double> x;

    SimplexPoint() = default;
    explicit SimplexPoint(std::vector<double> coords) : x(std::move(coords)) {
        double s = 0.0;
        for (double xi : x) {
            if (xi < 0.0) throw std::invalid_argument("SimplexPoint: negative coordinate");
            s += xi;
        }
        if (std::abs(s - 1.0) > tol.simplex)
            throw std::invalid_argument("SimplexPoint: coordinates do not sum to 1");
    }
    static SimplexPoint vertex(int d, int i) {
        std::vector<double> v(d, 0.0);
        v[i] = 1.0;
        return SimplexPoint(v);
    }
    int d() const { return static_cast<int>(x.size()); }
};

// ---------------------------------------------------------------------------
// Model files: human-readable key/value lines, '#' comments.
//
//   d = 2
//   theta = 1.0
//   P = 0.7 0.3  0.7 0.3        # row-major; brackets/commas also accepted
//   sigma = 100
//   sigma_rest = 0
//   Q = 0.7 0.3                 # optional; presence switches PIM mode on
// ---------------------------------------------------------------------------

struct ModelFile {
    int d = 0;
    double theta = 0.0;
    std::vector<std::vector<double>> P;  // empty if only Q given
    double sigma = 0.0;
    std::vector<double> sigma_rest;
    std::vector<double> Q;  // non-empty => PIM mode

    bool pim() const { return !Q.empty(); }
    MutationModel mutation_model() const {
        if (!P.empty()) return MutationModel(d, theta, P);
        return PimModel(theta, Q).as_general();
    }
    PimModel pim_model() const {
        if (!pim()) throw std::invalid_argument("model file has no Q (not PIM)");
        return PimModel(theta, Q);
    }
    SelectionRegime selection() const { return SelectionRegime{sigma, sigma_rest}; }
};

namespace detail {
inline std::vector<double> parse_numbers(const std::string& text) {
    std::string cleaned;
    for (char c : text) cleaned += (c == ',' || c == '[' || c == ']') ? ' ' : c;
    std::istringstream is(cleaned);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    if (!is.eof()) throw std::invalid_argument("model file: malformed number list '" + text + "'");
    return out;
}
}  // namespace detail

inline ModelFile parse_model(std::istream& in) {
    ModelFile mf;
    std::vector<double> flat_p;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::istringstream probe(line);
            std::string leftover;
            if (probe >> leftover)
                throw std::invalid_argument("model file: expected 'key = value', got '" + line + "'");
            continue;
        }
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        std::string value = line.substr(eq + 1);
        if (key == "d") {
            mf.d = static_cast<int>(detail::parse_numbers(value).at(0));
        } else if (key == "theta") {
            mf.theta = detail::parse_numbers(value).at(0);
        } else if (key == "P") {
            flat_p = detail::parse_numbers(value);
        } else if (key == "sigma") {
            mf.sigma = detail::parse_numbers(value).at(0);
        } else if (key == "sigma_rest") {
            mf.sigma_rest = detail::parse_numbers(value);
        } else if (key == "Q") {
            mf.Q = detail::parse_numbers(value);
        } else {
            throw std::invalid_argument("model file: unknown key '" + key + "'");
        }
    }
    if (mf.d < 2) throw std::invalid_argument("model file: missing or invalid 'd'");
    if (!flat_p.empty()) {
        if (static_cast<int>(flat_p.size()) != mf.d * mf.d)
            throw std::invalid_argument("model file: P must have d*d entries");
        mf.P.assign(mf.d, std::vector<double>(mf.d));
        for (int i = 0; i < mf.d; ++i)
            for (int j = 0; j < mf.d; ++j) mf.P[i][j] = flat_p[i * mf.d + j];
    }
    if (!mf.Q.empty() && static_cast<int>(mf.Q.size()) != mf.d)
        throw std::invalid_argument("model file: Q must have d entries");
    if (mf.P.empty() && mf.Q.empty())
        throw std::invalid_argument("model file: need P or Q");
    if (!mf.sigma_rest.empty() && static_cast<int>(mf.sigma_rest.size()) == 1 && mf.d > 2)
        mf.sigma_rest.assign(mf.d - 1, mf.sigma_rest[0]);
    // constructing the models validates stochasticity / simplex invariants
    mf.mutation_model();
    if (mf.pim()) mf.pim_model();
    return mf;
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open model file: " + path);
    return parse_model(f);
}

}  // namespace strongsel
