#pragma once

// Daubechies (9 vanishing moments) scaling function and wavelet, tabulated by
// the cascade algorithm, and the finite interval dictionary built from them.

#include "wsim/types.hpp"

#include <array>
#include <memory>
#include <vector>

namespace wsim {

/// Length of the db9 filter; the mother functions live on [0, kSupportLength].
inline constexpr int kFilterLength = 18;
inline constexpr int kSupportLength = 17;
inline constexpr int kScalingCount = 17;

/// Lowpass filter of the db9 pair, sum equal to sqrt(2). Ordered so that the
/// scaling function carries its mass towards the right end of [0, 17].
const std::array<double, kFilterLength>& db9_lowpass();

/// Dyadic samples of phi, psi and their first derivatives on [0, 17].
struct WaveletTable {
  int depth = 0;
  double spacing = 0.0;  // 2^-depth
  Vector phi;
  Vector psi;
  Vector phi_deriv;
  Vector psi_deriv;

  Index size() const { return phi.size(); }
  double phi_sup_norm() const { return phi.cwiseAbs().maxCoeff(); }
  double psi_sup_norm() const { return psi.cwiseAbs().maxCoeff(); }
};

/// Runs the cascade algorithm to dyadic level `depth` (8..16).
WaveletTable build_table(int depth);

/// Process-wide cached table for `depth`; built once, then shared read-only.
std::shared_ptr<const WaveletTable> shared_table(int depth);

/// Value and first two derivatives of a tabulated mother function.
struct Jet {
  double value = 0.0;
  double deriv = 0.0;
  double second = 0.0;
};

/// Piecewise cubic Hermite evaluation of a table column at x in mother
/// coordinates. Exactly zero outside [0, 17].
Jet eval_mother(const Vector& values, const Vector& derivs, double spacing, double x);

enum class BasisKind { scaling, wavelet };

/// Structured address of a dictionary member. `k` is the 0-based flat
/// position in canonical order (scaling block, then wavelet levels ascending,
/// shifts ascending within a level).
struct BasisIndex {
  Index k = 0;
  BasisKind kind = BasisKind::scaling;
  int level = 0;  // wavelet only
  int shift = 0;

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Closed support of a member for dictionary unit `unit`:
///   scaling shift n:        [-(n+1) u, (16-n) u]
///   wavelet level j, shift q: [-(q+1) u / 2^j, (16-q) u / 2^j]
Interval support(const BasisIndex& idx, double unit);

/// Range of wavelet shifts at `level` whose support meets (-s_X, s_X) in an
/// open set, for `resolution` dictionary units per radius.
std::pair<int, int> wavelet_shift_range(int level, int resolution);

/// Canonical member list: 17 scaling translates whose support contains
/// -s_X, then every level 0..max_level (max_level = -1 gives scaling only).
/// Depends on s_X only through the unit, so counts are scale free.
std::vector<BasisIndex> enumerate_levels(double s_X, int max_level, int resolution = 1);

struct BasisOptions {
  int depth = 12;
  int resolution = 1;  // dictionary units per truncation radius
};

/// The first `m` members of the canonical dictionary on [-s_X, s_X].
/// Immutable after construction and safe to share between threads.
class Basis {
 public:
  Basis(double s_X, Index m, BasisOptions options = {});
  Basis(double s_X, Index m, std::shared_ptr<const WaveletTable> table, int resolution);

  Index size() const { return static_cast<Index>(index_map_.size()); }
  double s_X() const { return s_X_; }
  int resolution() const { return resolution_; }
  double unit() const { return s_X_ / resolution_; }
  const WaveletTable& table() const { return *table_; }
  const std::shared_ptr<const WaveletTable>& table_ptr() const { return table_; }
  const std::vector<BasisIndex>& index_map() const { return index_map_; }
  const BasisIndex& index(Index k) const { return index_map_[static_cast<std::size_t>(k)]; }
  Interval support(Index k) const { return wsim::support(index(k), unit()); }
  int max_level() const;

  /// Flat position of a structured index, or -1 when not in the dictionary.
  Index flat_index(BasisKind kind, int level, int shift) const;

  double eval(Index k, double x) const { return jet(k, x).value; }
  double eval_deriv(Index k, double x) const { return jet(k, x).deriv; }
  double eval_second_deriv(Index k, double x) const { return jet(k, x).second; }
  Jet jet(Index k, double x) const;

  Vector basis_vector(double x) const;
  Vector basis_deriv_vector(double x) const;

  /// Fills e, e' and e'' at x in one pass; outputs must have size m.
  void eval_all(double x, Eigen::Ref<Vector> value, Eigen::Ref<Vector> deriv,
                Eigen::Ref<Vector> second) const;
  void eval_all(double x, Eigen::Ref<Vector> value, Eigen::Ref<Vector> deriv) const;

  /// Cumulative member counts (17, then after each complete level).
  std::vector<Index> admissible_sizes(int max_level) const;

 private:
  double s_X_;
  int resolution_;
  std::shared_ptr<const WaveletTable> table_;
  std::vector<BasisIndex> index_map_;
};

/// sum_k eta_k e_k(x) and its derivatives.
double link_eval(const Basis& basis, const Vector& eta, double x);
double link_deriv(const Basis& basis, const Vector& eta, double x);
double link_second_deriv(const Basis& basis, const Vector& eta, double x);

/// Number of dictionary members at `level` whose support starts inside the
/// half-open support [lo, hi) of member k. Equals 17 * 2^(level - j_k) when
/// the whole range is present in the dictionary.
int overlap_count(const Basis& basis, Index k, int level);

/// Composite midpoint Gram matrix of the members over the real line, on the
/// dyadic grid of the finest level present.
Matrix gram_matrix(const Basis& basis);

}  // namespace wsim
