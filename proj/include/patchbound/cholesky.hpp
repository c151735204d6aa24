#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "patchbound/error.hpp"
#include "patchbound/sparse.hpp"

namespace patchbound {

/// Reverse Cuthill-McKee ordering of the adjacency graph of a symmetric matrix.
/// Returns perm with perm[new_index] = old_index.
inline std::vector<Index> reverse_cuthill_mckee(const SparseSym& m)
{
    const Index n = m.order();
    std::vector<Index> degree(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        degree[i] = m.row_ptr()[i + 1] - m.row_ptr()[i];

    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n));

    const auto bfs = [&](Index root, std::vector<Index>& out, std::vector<char>& seen) {
        std::queue<Index> q;
        q.push(root);
        seen[root] = 1;
        std::vector<Index> nbrs;
        while (!q.empty()) {
            const Index v = q.front();
            q.pop();
            out.push_back(v);
            nbrs.clear();
            for (Index k = m.row_ptr()[v]; k < m.row_ptr()[v + 1]; ++k) {
                const Index w = m.cols()[k];
                if (!seen[w]) {
                    seen[w] = 1;
                    nbrs.push_back(w);
                }
            }
            std::stable_sort(nbrs.begin(), nbrs.end(), [&](Index x, Index y) { return degree[x] < degree[y]; });
            for (Index w : nbrs)
                q.push(w);
        }
    };

    for (Index start = 0; start < n; ++start) {
        if (visited[start])
            continue;
        // Pseudo-peripheral root: the last BFS node of a probe from the
        // minimum-degree node of this component.
        std::vector<Index> probe;
        std::vector<char> seen = visited;
        bfs(start, probe, seen);
        const Index root = *std::min_element(probe.begin(), probe.end(), [&](Index x, Index y) {
            return degree[x] < degree[y] || (degree[x] == degree[y] && x < y);
        });
        probe.clear();
        seen = visited;
        bfs(root, probe, seen);
        const Index far = probe.back();
        bfs(far, order, visited);
    }
    std::reverse(order.begin(), order.end());
    return order;
}

/// Envelope (profile) Cholesky factor of a permuted s.p.d. matrix:
/// P(perm, perm) = L L^T.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const SparseSym& p) : n_(p.order()), perm_(reverse_cuthill_mckee(p))
    {
        inverse_perm_.resize(static_cast<std::size_t>(n_));
        for (Index k = 0; k < n_; ++k)
            inverse_perm_[perm_[k]] = k;

        first_.assign(static_cast<std::size_t>(n_), 0);
        for (Index i = 0; i < n_; ++i) {
            Index f = i;
            const Index old = perm_[i];
            for (Index k = p.row_ptr()[old]; k < p.row_ptr()[old + 1]; ++k)
                f = std::min(f, inverse_perm_[p.cols()[k]]);
            first_[i] = f;
        }
        offset_.assign(static_cast<std::size_t>(n_ + 1), 0);
        for (Index i = 0; i < n_; ++i)
            offset_[i + 1] = offset_[i] + (i - first_[i] + 1);
        values_.assign(static_cast<std::size_t>(offset_[n_]), 0.0);

        for (Index i = 0; i < n_; ++i) {
            const Index old = perm_[i];
            for (Index k = p.row_ptr()[old]; k < p.row_ptr()[old + 1]; ++k) {
                const Index j = inverse_perm_[p.cols()[k]];
                if (j <= i)
                    entry(i, j) = p.values()[k];
            }
        }

        for (Index i = 0; i < n_; ++i) {
            for (Index j = first_[i]; j <= i; ++j) {
                double s = entry(i, j);
                const Index k0 = std::max(first_[i], first_[j]);
                const double* li = &values_[offset_[i] + (k0 - first_[i])];
                const double* lj = &values_[offset_[j] + (k0 - first_[j])];
                for (Index k = k0; k < j; ++k)
                    s -= *li++ * *lj++;
                if (j < i) {
                    entry(i, j) = s / entry(j, j);
                } else {
                    if (!(s > 0.0))
                        throw NotPositiveDefinite("cholesky: non-positive pivot " + std::to_string(s) + " at row " +
                                                  std::to_string(i));
                    entry(i, i) = std::sqrt(s);
                }
            }
        }
    }

    Index order() const { return n_; }
    std::span<const Index> permutation() const { return perm_; }
    Index stored_entries() const { return static_cast<Index>(values_.size()); }

    /// Solves P x = b.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const
    {
        Eigen::VectorXd y(n_);
        for (Index i = 0; i < n_; ++i) {
            double s = b(perm_[i]);
            const double* li = &values_[offset_[i]];
            for (Index k = first_[i]; k < i; ++k)
                s -= *li++ * y(k);
            y(i) = s / *li;
        }
        for (Index i = n_ - 1; i >= 0; --i) {
            y(i) /= entry(i, i);
            const double yi = y(i);
            const double* li = &values_[offset_[i]];
            for (Index k = first_[i]; k < i; ++k)
                y(k) -= *li++ * yi;
        }
        Eigen::VectorXd x(n_);
        for (Index i = 0; i < n_; ++i)
            x(perm_[i]) = y(i);
        return x;
    }

    /// Dense lower factor in the permuted numbering (tests and diagnostics).
    Eigen::MatrixXd lower_dense() const
    {
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n_, n_);
        for (Index i = 0; i < n_; ++i)
            for (Index j = first_[i]; j <= i; ++j)
                l(i, j) = entry(i, j);
        return l;
    }

private:
    double& entry(Index i, Index j) { return values_[offset_[i] + (j - first_[i])]; }
    double entry(Index i, Index j) const { return values_[offset_[i] + (j - first_[i])]; }

    Index n_ = 0;
    std::vector<Index> perm_;
    std::vector<Index> inverse_perm_;
    std::vector<Index> first_;
    std::vector<Index> offset_;
    std::vector<double> values_;
};

inline CholeskyFactor chol(const SparseSym& p) { return CholeskyFactor(p); }

} // namespace patchbound
