// Test-only reference computation of the expansion coefficients.
//
// Independent of the production dynamic program: it uses only the order-k
// recursion obtained by inserting the expansion into the sampling recursion
// (the "unsimplified" per-order relation, before the consistency-lemma
// substitutions), plus the fit-boundary normalization.  Pure-fit entries come
// from eliminating the one-unfit states between two instances of that same
// relation, which requires theta (1 - P_11) > 0.
#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "strongsel/expansion.hpp"
#include "strongsel/model.hpp"

namespace strongsel_test {

class RecursionBasisOracle {
  public:
    RecursionBasisOracle(const strongsel::MutationModel& m, int K, int L) : m_(m), d_(m.d()) {
        if (m.theta() * (1.0 - m.P(0, 0)) <= 0.0)
            throw std::invalid_argument("RecursionBasisOracle: needs theta (1 - P_11) > 0");
        // order k needs order k-1 one level beyond its own range
        for (int k = 0; k <= K; ++k) compute_order(k, L + (K - k));
    }

    double at(int k, const std::vector<int>& n) const {
        if (k < 0) return 0.0;
        int size = 0;
        for (int c : n) {
            if (c < 0) return 0.0;
            size += c;
        }
        if (size == 0) return k == 0 ? 1.0 : 0.0;
        return table_.at(k).at(n);
    }

  private:
    double theta() const { return m_.theta(); }
    double P(int i, int j) const { return m_.P(i, j); }

    static std::vector<int> shifted(std::vector<int> n, int i, int di, int j = -1, int dj = 0) {
        n[i] += di;
        if (j >= 0) n[j] += dj;
        return n;
    }

    // lower-order contribution of the per-order relation at state n
    double lower_order_terms(int k, const std::vector<int>& n) const {
        int size = 0;
        for (int c : n) size += c;
        const int n1 = n[0];
        double acc = 0.0;
        if (k >= 1) {
            acc += n1 * (n1 - 1.0) * at(k - 1, shifted(n, 0, -1));
            acc += (n1 * theta() * P(0, 0) - size * (size - 1.0 + theta())) * at(k - 1, n);
            for (int i = 1; i < d_; ++i) {
                if (n[i] == 0) continue;
                for (int j = 1; j < d_; ++j)
                    acc += n[i] * theta() * P(j, i) * at(k - 1, shifted(n, i, -1, j, +1));
            }
            for (int i = 1; i < d_; ++i) acc += size * at(k - 1, shifted(n, i, +1));
        }
        if (k >= 2 && n1 >= 1) {
            for (int j = 1; j < d_; ++j)
                acc += n1 * theta() * P(j, 0) * at(k - 2, shifted(n, 0, -1, j, +1));
        }
        return acc;
    }

    void compute_order(int k, int level_max) {
        auto& tk = table_[k];
        const int d = d_;
        std::vector<int> e1(d, 0);
        e1[0] = 1;
        // fit boundary from sum_i q(e_i) = 1
        double v = (k == 0) ? 1.0 : 0.0;
        if (k >= 1)
            for (int i = 1; i < d; ++i) v -= at(k - 1, shifted(e1, 0, -1, i, +1));
        tk[e1] = v;
        // one-unfit boundary directly from the relation at e_i
        for (int i = 1; i < d; ++i) {
            std::vector<int> ei(d, 0);
            ei[i] = 1;
            tk[ei] = theta() * P(0, i) * tk.at(e1) + lower_order_terms(k, ei);
        }
        for (int size = 2; size <= level_max; ++size) {
            // pure-fit entry: eliminate the one-unfit states of level `size`
            // between the relation at (size-1) e_1 and the relations at
            // (size-2) e_1 + e_i
            const int c = size - 1;
            std::vector<int> fit_c(d, 0), fit_cm1(d, 0), fit_s(d, 0);
            fit_c[0] = c;
            fit_cm1[0] = c - 1;
            fit_s[0] = size;
            double rhs = (c - 1.0 + theta() - theta() * P(0, 0)) * at(k, fit_c) -
                         (c - 1.0) * at(k, fit_cm1);
            for (int i = 1; i < d; ++i) {
                std::vector<int> one_unfit = shifted(fit_c, 0, -1, i, +1);  // (c-1)e1 + e_i
                // A-term of the one-unfit state at fit count c
                std::vector<int> state = fit_c;
                state[i] += 1;  // c e1 + e_i
                rhs -= lower_order_terms(k, state);
                if (k >= 1) rhs -= theta() * P(i, 0) * at(k - 1, one_unfit);
            }
            tk[fit_s] = rhs / (theta() * (1.0 - P(0, 0)));
            // remaining states in descending fit count
            for (int n1 = size - 1; n1 >= 0; --n1) {
                strongsel::detail::for_each_composition(
                    size - n1, d - 1, [&](const std::vector<int>& unfit) {
                        std::vector<int> n(d, 0);
                        n[0] = n1;
                        bool any = false;
                        for (int i = 1; i < d; ++i) {
                            n[i] = unfit[i - 1];
                            any = any || n[i] > 0;
                        }
                        if (!any) return;
                        double acc = lower_order_terms(k, n);
                        for (int i = 1; i < d; ++i) {
                            if (n[i] == 0) continue;
                            acc += n[i] * (n[i] - 1.0) * at(k, shifted(n, i, -1));
                            acc += n[i] * theta() * P(0, i) * at(k, shifted(n, i, -1, 0, +1));
                        }
                        tk[n] = acc / double(size - n1);
                    });
            }
        }
    }

    const strongsel::MutationModel& m_;
    int d_;
    std::map<int, std::map<std::vector<int>, double>> table_;
};

}  // namespace strongsel_test
