#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "patchbound/error.hpp"
#include "patchbound/local_integrals.hpp"

namespace patchbound {

struct SymmetricTag {};
struct GeneralTag {};

/// Compressed sparse row matrix. The tag only records what the matrix is meant to
/// be; symmetric matrices store both triangles.
template <class Tag>
class Csr {
public:
    Csr() = default;
    Csr(Index order, std::vector<Index> row_ptr, std::vector<Index> cols, std::vector<double> values)
        : order_(order), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values))
    {
    }

    Index order() const { return order_; }
    Index nnz() const { return static_cast<Index>(values_.size()); }
    std::span<const Index> row_ptr() const { return row_ptr_; }
    std::span<const Index> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }

    double at(Index i, Index j) const
    {
        const auto begin = cols_.begin() + row_ptr_[i];
        const auto end = cols_.begin() + row_ptr_[i + 1];
        const auto it = std::lower_bound(begin, end, j);
        return (it != end && *it == j) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
    }

    void multiply(std::span<const double> x, std::span<double> y) const
    {
        for (Index i = 0; i < order_; ++i) {
            double s = 0.0;
            for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                s += values_[k] * x[cols_[k]];
            y[i] = s;
        }
    }

    Eigen::VectorXd operator*(const Eigen::VectorXd& x) const
    {
        Eigen::VectorXd y(order_);
        multiply({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
        return y;
    }

    Eigen::MatrixXd dense() const
    {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(order_, order_);
        for (Index i = 0; i < order_; ++i)
            for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                d(i, cols_[k]) = values_[k];
        return d;
    }

    Csr<Tag> transpose() const
    {
        std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(order_));
        for (Index i = 0; i < order_; ++i)
            for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                rows[cols_[k]].emplace_back(i, values_[k]);
        return from_rows(order_, rows);
    }

    /// Max |a_ij - a_ji| relative to max |a_ij|; with sign = -1 measures skew-symmetry.
    double symmetry_defect(double sign = 1.0) const
    {
        double scale = 0.0, defect = 0.0;
        for (Index i = 0; i < order_; ++i) {
            for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                scale = std::max(scale, std::abs(values_[k]));
                defect = std::max(defect, std::abs(values_[k] - sign * at(cols_[k], i)));
            }
        }
        return scale == 0.0 ? 0.0 : defect / scale;
    }

    template <class OtherTag>
    Csr<OtherTag> retag() const
    {
        return Csr<OtherTag>(order_, row_ptr_, cols_, values_);
    }

    static Csr<Tag> from_rows(Index order, const std::vector<std::vector<std::pair<Index, double>>>& rows)
    {
        std::vector<Index> ptr{0}, cols;
        std::vector<double> vals;
        for (const auto& row : rows) {
            for (const auto& [c, v] : row) {
                cols.push_back(c);
                vals.push_back(v);
            }
            ptr.push_back(static_cast<Index>(cols.size()));
        }
        return Csr<Tag>(order, std::move(ptr), std::move(cols), std::move(vals));
    }

private:
    Index order_ = 0;
    std::vector<Index> row_ptr_{0};
    std::vector<Index> cols_;
    std::vector<double> values_;
};

using SparseSym = Csr<SymmetricTag>;
using SparseGen = Csr<GeneralTag>;

/// Sum of two matrices with the same order (used for A + B).
template <class Tag, class TagA, class TagB>
Csr<Tag> add(const Csr<TagA>& x, const Csr<TagB>& y)
{
    if (x.order() != y.order())
        throw InvalidArgument("add: order mismatch");
    std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(x.order()));
    for (Index i = 0; i < x.order(); ++i) {
        auto& row = rows[i];
        Index p = x.row_ptr()[i], q = y.row_ptr()[i];
        const Index pe = x.row_ptr()[i + 1], qe = y.row_ptr()[i + 1];
        while (p < pe || q < qe) {
            if (q >= qe || (p < pe && x.cols()[p] < y.cols()[q])) {
                row.emplace_back(x.cols()[p], x.values()[p]);
                ++p;
            } else if (p >= pe || y.cols()[q] < x.cols()[p]) {
                row.emplace_back(y.cols()[q], y.values()[q]);
                ++q;
            } else {
                row.emplace_back(x.cols()[p], x.values()[p] + y.values()[q]);
                ++p;
                ++q;
            }
        }
    }
    return Csr<Tag>::from_rows(x.order(), rows);
}

/// Scatter-add local blocks into a global matrix. Entries landing on the same
/// position are summed in ascending contribution order.
template <class Tag = SymmetricTag>
Csr<Tag> assemble(std::span<const LocalContribution> contribs, Index n_dof)
{
    std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(n_dof));
    for (const auto& lc : contribs) {
        for (Index r = 0; r < lc.size(); ++r) {
            const Index i = lc.dofs[r];
            if (i < 0 || i >= n_dof)
                throw InvalidArgument("assemble: DOF index " + std::to_string(i) + " out of range");
            for (Index s = 0; s < lc.size(); ++s) {
                const Index j = lc.dofs[s];
                if (j < 0 || j >= n_dof)
                    throw InvalidArgument("assemble: DOF index " + std::to_string(j) + " out of range");
                rows[i].emplace_back(j, lc.block(r, s));
            }
        }
    }
    for (auto& row : rows) {
        std::stable_sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        std::vector<std::pair<Index, double>> merged;
        for (const auto& e : row) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(e);
        }
        row = std::move(merged);
    }
    return Csr<Tag>::from_rows(n_dof, rows);
}

template <class Tag = SymmetricTag>
Csr<Tag> assemble(const std::vector<LocalContribution>& contribs, Index n_dof)
{
    return assemble<Tag>(std::span<const LocalContribution>(contribs), n_dof);
}

// Matrix Market coordinate format. Symmetric matrices are written with the
// "symmetric" qualifier (lower triangle only), general ones in full.

template <class Tag>
void write_matrix_market(std::ostream& os, const Csr<Tag>& m)
{
    constexpr bool sym = std::is_same_v<Tag, SymmetricTag>;
    std::vector<std::tuple<Index, Index, double>> entries;
    for (Index i = 0; i < m.order(); ++i)
        for (Index k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k)
            if (!sym || m.cols()[k] <= i)
                entries.emplace_back(i, m.cols()[k], m.values()[k]);
    os << "%%MatrixMarket matrix coordinate real " << (sym ? "symmetric" : "general") << '\n';
    os << m.order() << ' ' << m.order() << ' ' << entries.size() << '\n';
    char buf[64];
    for (const auto& [i, j, v] : entries) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << i + 1 << ' ' << j + 1 << ' ' << buf << '\n';
    }
}

template <class Tag>
Csr<Tag> read_matrix_market(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw InvalidArgument("read_matrix_market: missing banner");
    std::istringstream banner(line);
    std::string tok, object, format, field, symmetry;
    banner >> tok >> object >> format >> field >> symmetry;
    if (object != "matrix" || format != "coordinate" || field != "real")
        throw InvalidArgument("read_matrix_market: only real coordinate matrices are supported");
    const bool sym = symmetry == "symmetric";
    if (!sym && symmetry != "general")
        throw InvalidArgument("read_matrix_market: unsupported symmetry '" + symmetry + "'");
    while (std::getline(is, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream header(line);
    Index rows = 0, cols = 0, nnz = 0;
    if (!(header >> rows >> cols >> nnz) || rows != cols)
        throw InvalidArgument("read_matrix_market: bad size line");
    std::vector<std::vector<std::pair<Index, double>>> data(static_cast<std::size_t>(rows));
    for (Index k = 0; k < nnz; ++k) {
        Index i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > rows)
            throw InvalidArgument("read_matrix_market: bad entry " + std::to_string(k));
        data[i - 1].emplace_back(j - 1, v);
        if (sym && i != j)
            data[j - 1].emplace_back(i - 1, v);
    }
    for (auto& row : data)
        std::sort(row.begin(), row.end());
    return Csr<Tag>::from_rows(rows, data);
}

} // namespace patchbound
