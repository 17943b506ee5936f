#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace groupinf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

using GroupSet = std::vector<int>;

/// Fixed n x p design with a disjoint partition of (a subset of) its columns
/// into G groups.
class GroupedDesign {
public:
  GroupedDesign() = default;

  /// Throws ConfigError on overlapping, empty, or out-of-range groups and on
  /// identically-zero columns. `scaling` records per-column factors already
  /// applied to X (defaults to all ones).
  GroupedDesign(Matrix X, std::vector<std::vector<Index>> groups,
                std::vector<std::string> group_names = {}, Vector scaling = {});

  /// Columns [0, p) split into consecutive groups of equal size.
  static GroupedDesign contiguous(Matrix X, Index group_size);

  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }
  int num_groups() const { return static_cast<int>(groups_.size()); }

  const Matrix& X() const { return X_; }
  const std::vector<Index>& columns(int g) const { return groups_[static_cast<std::size_t>(g)]; }
  Index group_size(int g) const { return static_cast<Index>(columns(g).size()); }
  const std::string& group_name(int g) const { return names_[static_cast<std::size_t>(g)]; }
  const Vector& scaling() const { return scaling_; }

  /// n x |C_g| block.
  Matrix block(int g) const;
  /// Columns of all groups in `set`, in the order given.
  Matrix block(std::span<const int> set) const;

  /// Entries of a p-vector belonging to group g.
  Vector group_part(const Vector& v, int g) const;

private:
  Matrix X_;
  std::vector<std::vector<Index>> groups_;
  std::vector<std::string> names_;
  Vector scaling_;
};

/// Orthonormal basis V (n x k) of a subspace.
struct SubspaceBasis {
  Matrix V;
  Index k() const { return V.cols(); }
  Index n() const { return V.rows(); }

  Vector project(const Vector& y) const { return V * (V.transpose() * y); }
  Vector project_out(const Vector& y) const { return y - project(y); }
};

/// Y = R U + Y_perp with U a unit vector in span(V) and V^T Y_perp = 0.
struct ProjectionDecomposition {
  SubspaceBasis basis;
  double R = 0.0;
  Vector U;
  Vector Y_perp;

  /// z_Y(r) = r U + Y_perp.
  Vector at_radius(double r) const { return r * U + Y_perp; }
};

/// Orthonormal basis of col(M) from a column-pivoted Householder QR.
///
/// Pivots at or below max(n, m) * eps * reference_norm count as zero; by
/// default reference_norm is the largest column norm of M. A zero matrix
/// gives k = 0.
SubspaceBasis orthonormal_basis(const Matrix& M, double reference_norm = -1.0);

/// Orthonormal basis of span(P_perp_{X_{S \ g}} X_g). Throws
/// UntestableGroupError when the projected block has rank zero relative to
/// the scale of X_g.
SubspaceBasis test_subspace(const GroupedDesign& design, std::span<const int> S, int g);

/// Decomposes Y along the basis; throws DegenerateDirectionError when
/// ||P_L Y|| <= 1e-12 ||Y||.
ProjectionDecomposition decompose(const Vector& Y, const SubspaceBasis& basis);

/// Removes from every column of M its component in span(Q). Two passes of
/// classical Gram-Schmidt keep the result orthogonal to working precision.
Matrix project_out(const Matrix& Q, const Matrix& M);

}  // namespace groupinf
