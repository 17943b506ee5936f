#include "groupinf/projections.hpp"

#include "groupinf/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace groupinf {

GroupedDesign::GroupedDesign(Matrix X, std::vector<std::vector<Index>> groups,
                             std::vector<std::string> group_names, Vector scaling)
    : X_(std::move(X)), groups_(std::move(groups)), names_(std::move(group_names)),
      scaling_(std::move(scaling)) {
  if (X_.rows() == 0 || X_.cols() == 0) throw ConfigError("design", "design matrix is empty");
  if (groups_.empty()) throw ConfigError("groups", "design has no groups");

  std::vector<char> used(static_cast<std::size_t>(X_.cols()), 0);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].empty()) {
      throw ConfigError("groups", "group " + std::to_string(g) + " is empty");
    }
    for (Index j : groups_[g]) {
      if (j < 0 || j >= X_.cols()) {
        throw ConfigError("groups", "group " + std::to_string(g) + " references column " +
                                        std::to_string(j) + " outside the design");
      }
      if (used[static_cast<std::size_t>(j)]) {
        throw ConfigError("groups", "column " + std::to_string(j) + " appears in two groups");
      }
      used[static_cast<std::size_t>(j)] = 1;
      if (X_.col(j).squaredNorm() == 0.0) {
        throw ConfigError("design", "column " + std::to_string(j) + " is identically zero");
      }
    }
  }

  if (names_.empty()) {
    for (std::size_t g = 0; g < groups_.size(); ++g) names_.push_back("g" + std::to_string(g));
  } else if (names_.size() != groups_.size()) {
    throw ConfigError("groups", "group name count does not match group count");
  }

  if (scaling_.size() == 0) {
    scaling_ = Vector::Ones(X_.cols());
  } else if (scaling_.size() != X_.cols()) {
    throw ConfigError("design", "scaling length does not match column count");
  }
}

GroupedDesign GroupedDesign::contiguous(Matrix X, Index group_size) {
  if (group_size <= 0 || X.cols() % group_size != 0) {
    throw ConfigError("group_size", "column count is not a multiple of the group size");
  }
  std::vector<std::vector<Index>> groups;
  for (Index start = 0; start < X.cols(); start += group_size) {
    std::vector<Index> cols(static_cast<std::size_t>(group_size));
    std::iota(cols.begin(), cols.end(), start);
    groups.push_back(std::move(cols));
  }
  return GroupedDesign(std::move(X), std::move(groups));
}

Matrix GroupedDesign::block(int g) const { return X_(Eigen::all, columns(g)); }

Matrix GroupedDesign::block(std::span<const int> set) const {
  std::vector<Index> cols;
  for (int g : set) cols.insert(cols.end(), columns(g).begin(), columns(g).end());
  return X_(Eigen::all, cols);
}

Vector GroupedDesign::group_part(const Vector& v, int g) const { return v(columns(g)); }

Matrix project_out(const Matrix& Q, const Matrix& M) {
  if (Q.cols() == 0) return M;
  Matrix P = M - Q * (Q.transpose() * M);
  P -= Q * (Q.transpose() * P);
  return P;
}

SubspaceBasis orthonormal_basis(const Matrix& M, double reference_norm) {
  const Index n = M.rows();
  const Index m = M.cols();
  if (n == 0 || m == 0) return SubspaceBasis{Matrix(n, 0)};

  if (reference_norm < 0.0) reference_norm = M.colwise().norm().maxCoeff();
  if (reference_norm == 0.0) return SubspaceBasis{Matrix(n, 0)};

  Eigen::ColPivHouseholderQR<Matrix> qr(M);
  const double tol = static_cast<double>(std::max(n, m)) *
                     std::numeric_limits<double>::epsilon() * reference_norm;
  const auto diag = qr.matrixQR().diagonal();
  Index k = 0;
  while (k < diag.size() && std::abs(diag(k)) > tol) ++k;

  Matrix V = Matrix::Identity(n, k);
  V.applyOnTheLeft(qr.householderQ());
  return SubspaceBasis{std::move(V)};
}

SubspaceBasis test_subspace(const GroupedDesign& design, std::span<const int> S, int g) {
  if (std::find(S.begin(), S.end(), g) == S.end()) {
    throw SelectionError("tested group " + design.group_name(g) + " is not in the selected set");
  }
  std::vector<int> others;
  for (int h : S) {
    if (h != g) others.push_back(h);
  }

  const Matrix Xg = design.block(g);
  const SubspaceBasis control = orthonormal_basis(design.block(others));
  const Matrix projected = project_out(control.V, Xg);
  SubspaceBasis basis = orthonormal_basis(projected, Xg.colwise().norm().maxCoeff());
  if (basis.k() == 0) {
    throw UntestableGroupError("untestable group " + design.group_name(g) +
                               ": its columns lie in the span of the other selected groups");
  }
  return basis;
}

ProjectionDecomposition decompose(const Vector& Y, const SubspaceBasis& basis) {
  const Vector coords = basis.V.transpose() * Y;
  const double R = coords.norm();
  if (!(R > 1e-12 * Y.norm())) {
    throw DegenerateDirectionError("projection of Y onto the test subspace is zero");
  }
  ProjectionDecomposition d;
  d.basis = basis;
  d.R = R;
  const Vector along = basis.V * coords;
  d.U = along / R;
  d.Y_perp = Y - along;
  return d;
}

}  // namespace groupinf
